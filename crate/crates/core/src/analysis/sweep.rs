// SPDX-License-Identifier: Apache-2.0

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ghost_success_bound, AnalysisError, BoundInputs};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Tau,
    Rho,
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    /// Two-subgraph bound clamped to `[0, 1]`.
    pub bound: f64,
    /// The unclamped bound was at or below zero.
    pub vacuous: bool,
}

/// Evaluates the two-subgraph bound over `from, from + step, ..., to`.
/// The endpoint is included when it lies on the grid up to rounding.
pub fn curve_sweep(
    base: &BoundInputs,
    axis: SweepAxis,
    from: f64,
    to: f64,
    step: f64,
) -> Result<Vec<SweepPoint>, AnalysisError> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) || step <= 0.0 || to < from {
        return Err(AnalysisError::InvalidInput("sweep range must satisfy from <= to and step > 0"));
    }
    let count = libm::floor((to - from) / step + 1e-9) as usize + 1;
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let x = from + i as f64 * step;
        let mut inputs = *base;
        match axis {
            SweepAxis::Tau => inputs.tau = x,
            SweepAxis::Rho => inputs.rho = x,
            SweepAxis::D => inputs.d = x,
        }
        let raw = ghost_success_bound(&inputs)?;
        points.push(SweepPoint { x, bound: raw.clamp(0.0, 1.0), vacuous: raw <= 0.0 });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn includes_endpoint_and_flags_vacuous() {
        let base = BoundInputs::new(20e6, 30e6, 0.12, 2, 0.0);
        let pts = curve_sweep(&base, SweepAxis::Tau, 0.0, 3000.0, 60.0).unwrap();
        assert_eq!(pts.len(), 51);
        assert_eq!(pts.last().unwrap().x, 3000.0);
        assert!(pts[0].vacuous && pts[0].bound == 0.0);
        assert!(!pts[50].vacuous);
        assert!(pts.windows(2).all(|w| w[0].bound <= w[1].bound));
    }

    #[test]
    fn rejects_bad_ranges() {
        let base = BoundInputs::new(20e6, 30e6, 0.12, 2, 100.0);
        assert!(curve_sweep(&base, SweepAxis::Rho, 0.3, 0.1, 0.01).is_err());
        assert!(curve_sweep(&base, SweepAxis::Rho, 0.1, 0.3, 0.0).is_err());
        assert!(curve_sweep(&base, SweepAxis::Rho, 0.0, 0.3, 0.1).is_err());
    }

    #[test]
    fn single_point_range() {
        let base = BoundInputs::new(20e6, 30e6, 0.12, 2, 100.0);
        assert_eq!(curve_sweep(&base, SweepAxis::D, 1e6, 1e6, 1.0).unwrap().len(), 1);
    }
}
