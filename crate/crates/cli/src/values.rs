//! Parsing of value lists given on the command line.

use anyhow::{bail, Context, Result};

/// Parses `start:stop:step` (stop included when the steps land on it) or a
/// comma-separated list.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            bail!("range `{spec}` must look like start:stop:step");
        };
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("`{s}` in range `{spec}` is not a number"))
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            bail!("range `{spec}` needs start <= stop and a positive step");
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        if n > 1_000_000 {
            bail!("range `{spec}` has too many points");
        }
        return Ok((0..=n).map(|k| start + step * k as f64).collect());
    }
    let values = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .with_context(|| format!("`{s}` is not a number"))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        bail!("empty value list");
    }
    Ok(values)
}
