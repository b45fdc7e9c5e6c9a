//! Parsing of value lists and ranges given on the command line.
//!
//! A grid is either a comma-separated list (`-1,-0.5,critical`) or an
//! inclusive range `start:stop:count`. Ratio values may be written as
//! multiples of the critical drive with a `c` suffix (`0.5c:1.5c:81`);
//! `critical` is shorthand for `1c`.

use anyhow::{bail, Context, Result};
use spinrot::config::parse_angle;

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn grid_with(text: &str, value: impl Fn(&str) -> Result<f64>) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        bail!("empty grid");
    }
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        1 => text.split(',').map(|t| value(t.trim())).collect(),
        3 => {
            let n: usize = parts[2].trim().parse().with_context(|| format!("bad point count in {text:?}"))?;
            if n == 0 {
                bail!("grid {text:?} has no points");
            }
            Ok(linspace(value(parts[0].trim())?, value(parts[1].trim())?, n))
        }
        _ => bail!("grid {text:?} is neither a list nor start:stop:count"),
    }
}

/// Ratio grid; `critical` is needed only when the text uses `c` multiples.
pub fn ratio_grid(text: &str, critical: Option<f64>) -> Result<Vec<f64>> {
    grid_with(text, |t| ratio_value(t, critical))
}

pub fn ratio_value(t: &str, critical: Option<f64>) -> Result<f64> {
    let scaled = if t == "critical" {
        Some(1.0)
    } else if let Some(m) = t.strip_suffix('c') {
        Some(m.trim().parse::<f64>().with_context(|| format!("bad ratio {t:?}"))?)
    } else {
        None
    };
    let v = match scaled {
        Some(m) => match critical {
            Some(c) => m * c,
            None => bail!("{t:?} refers to the critical ratio, which does not exist for these angles"),
        },
        None => t.parse::<f64>().with_context(|| format!("bad ratio {t:?}"))?,
    };
    if !v.is_finite() {
        bail!("ratio {t:?} is not finite");
    }
    Ok(v)
}

pub fn angle_grid(text: &str, degrees: bool) -> Result<Vec<f64>> {
    grid_with(text, |t| Ok(parse_angle(t, degrees)?))
}
