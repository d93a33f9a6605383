use crate::error::{Error, Result};
use crate::refocus::CouplingTargets;

/// Parses `"1,2:90deg;3,4:-45deg"` into 0-based pairs with angles in radians.
/// A bare number or a `rad` suffix is read as radians.
pub fn parse_targets(spec: &str, n_spins: usize) -> Result<CouplingTargets> {
    let bad = |m: String| Error::InvalidArgument(format!("targets `{spec}`: {m}"));
    let mut out = CouplingTargets::new();
    for item in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (pair, angle) = item.split_once(':').ok_or_else(|| bad(format!("`{item}` lacks `:angle`")))?;
        let (i, j) = pair.split_once(',').ok_or_else(|| bad(format!("`{pair}` is not `i,j`")))?;
        let idx = |t: &str| -> Result<usize> {
            let k: usize = t.trim().parse().map_err(|_| bad(format!("bad spin index `{t}`")))?;
            if k == 0 || k > n_spins {
                return Err(Error::SpinIndex { index: k, count: n_spins });
            }
            Ok(k - 1)
        };
        let (i, j) = (idx(i)?, idx(j)?);
        if i == j {
            return Err(bad(format!("self pair {}", i + 1)));
        }
        let a = angle.trim();
        let theta = if let Some(d) = a.strip_suffix("deg") {
            d.trim().parse::<f64>().map(f64::to_radians)
        } else {
            a.strip_suffix("rad").unwrap_or(a).trim().parse::<f64>()
        }
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| bad(format!("bad angle `{a}`")))?;
        if out.insert((i.min(j), i.max(j)), theta).is_some() {
            return Err(bad(format!("pair {},{} given twice", i + 1, j + 1)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn degrees_and_radians() {
        let t = parse_targets("1,2:90deg; 4,3:0.5rad", 4).unwrap();
        assert!((t[&(0, 1)] - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(t[&(2, 3)], 0.5);
        assert!(parse_targets("1,5:90deg", 4).is_err());
        assert!(parse_targets("1,2:90deg;2,1:10deg", 4).is_err());
        assert!(parse_targets("1,2", 4).is_err());
    }
}
