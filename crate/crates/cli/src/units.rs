// SPDX-License-Identifier: Apache-2.0

//! Quantities with optional units: hashes (`H`, `KH`, `MH`, `GH`), hash
//! rates (the same with `/s`) and durations (`ms`, `s`, `min`, `h`).
//! Bare numbers are taken in base units.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Hashes,
    HashRate,
    Seconds,
    /// Plain number, no unit allowed.
    Scalar,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Hashes => "hashes",
            Dimension::HashRate => "hash rate",
            Dimension::Seconds => "duration",
            Dimension::Scalar => "number",
        })
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("cannot read {text:?} as a {dimension}")]
pub struct UnitError {
    pub text: String,
    pub dimension: Dimension,
}

fn hash_prefix(unit: &str) -> Option<f64> {
    match unit.to_ascii_uppercase().as_str() {
        "H" => Some(1.0),
        "KH" => Some(1e3),
        "MH" => Some(1e6),
        "GH" => Some(1e9),
        "TH" => Some(1e12),
        _ => None,
    }
}

/// Value in base units (H, H/s or s).
pub fn parse_quantity(text: &str, dimension: Dimension) -> Result<f64, UnitError> {
    let err = || UnitError { text: text.to_owned(), dimension };
    let trimmed = text.trim();
    let split = trimmed
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .unwrap_or(trimmed.len());
    let (number, unit) = trimmed.split_at(split);
    let value: f64 = number.trim().parse().map_err(|_| err())?;
    let unit = unit.trim();
    if !value.is_finite() {
        return Err(err());
    }
    let scale = match dimension {
        Dimension::Scalar if unit.is_empty() => 1.0,
        Dimension::Scalar => return Err(err()),
        _ if unit.is_empty() => 1.0,
        Dimension::Hashes => hash_prefix(unit).ok_or_else(err)?,
        Dimension::HashRate => unit.strip_suffix("/s").and_then(hash_prefix).ok_or_else(err)?,
        Dimension::Seconds => match unit {
            "ms" => 1e-3,
            "s" | "sec" => 1.0,
            "min" => 60.0,
            "h" => 3600.0,
            _ => return Err(err()),
        },
    };
    Ok(value * scale)
}

/// JSON value that is either a bare number or a string with a unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl Quantity {
    pub fn resolve(&self, dimension: Dimension) -> Result<f64, UnitError> {
        match self {
            Quantity::Number(v) => Ok(*v),
            Quantity::Text(t) => parse_quantity(t, dimension),
        }
    }
}

impl From<f64> for Quantity {
    fn from(v: f64) -> Self {
        Quantity::Number(v)
    }
}

impl From<&str> for Quantity {
    fn from(v: &str) -> Self {
        Quantity::Text(v.to_owned())
    }
}
