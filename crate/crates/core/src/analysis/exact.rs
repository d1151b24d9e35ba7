// SPDX-License-Identifier: Apache-2.0

use alloc::vec::Vec;

use super::AnalysisError;

/// Largest trial count accepted by [`exact_delta_tail`].
pub const EXACT_MAX_TRIALS: u64 = 5000;

fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    let len = n as usize + 1;
    if p <= 0.0 || p >= 1.0 {
        let mut pmf = alloc::vec![0.0; len];
        pmf[if p <= 0.0 { 0 } else { n as usize }] = 1.0;
        return pmf;
    }
    let nf = n as f64;
    let ln_n = libm::lgamma(nf + 1.0);
    let (ln_p, ln_q) = (libm::log(p), libm::log1p(-p));
    (0..len)
        .map(|a| {
            let af = a as f64;
            let ln_choose = ln_n - libm::lgamma(af + 1.0) - libm::lgamma(nf - af + 1.0);
            libm::exp(ln_choose + af * ln_p + (nf - af) * ln_q)
        })
        .collect()
}

/// `Pr[|X1 - X2| < threshold]` for independent `X1, X2 ~ Binomial(n, p)`.
pub fn exact_delta_tail(n: u64, p: f64, threshold: u64) -> Result<f64, AnalysisError> {
    if n > EXACT_MAX_TRIALS {
        return Err(AnalysisError::TooLarge(n));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(AnalysisError::InvalidInput("p must lie in [0, 1]"));
    }
    if threshold == 0 {
        return Ok(0.0);
    }
    let pmf = binomial_pmf(n, p);
    let reach = threshold.min(n + 1) as usize;
    let mut total = 0.0;
    for gap in 0..reach {
        let lag: f64 = pmf.iter().zip(&pmf[gap..]).map(|(a, b)| a * b).sum();
        total += if gap == 0 { lag } else { 2.0 * lag };
    }
    Ok(total.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(exact_delta_tail(2, 0.5, 0), Ok(0.0));
        assert!((exact_delta_tail(2, 0.5, 1).unwrap() - 0.375).abs() < 1e-12);
        assert!((exact_delta_tail(2, 0.5, 2).unwrap() - 0.875).abs() < 1e-12);
        assert!((exact_delta_tail(2, 0.5, 3).unwrap() - 1.0).abs() < 1e-12);
        assert!((exact_delta_tail(2, 0.5, 99).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_success_probability() {
        assert_eq!(exact_delta_tail(10, 0.0, 1), Ok(1.0));
        assert_eq!(exact_delta_tail(10, 1.0, 1), Ok(1.0));
    }

    #[test]
    fn limits() {
        assert_eq!(exact_delta_tail(5001, 0.5, 1), Err(AnalysisError::TooLarge(5001)));
        assert!(exact_delta_tail(5000, 0.5, 1).is_ok());
        assert!(exact_delta_tail(10, 1.5, 1).is_err());
    }

    #[test]
    fn pmf_sums_to_one() {
        for (n, p) in [(1, 0.3), (50, 0.01), (5000, 0.07)] {
            let s: f64 = binomial_pmf(n, p).iter().sum();
            assert!((s - 1.0).abs() < 1e-9, "{n} {p} {s}");
        }
    }
}
