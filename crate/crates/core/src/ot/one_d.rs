use crate::error::{Error, Result};

/// Sum of |x_(i) - y_(i)|^p over ascending order statistics, divided by n.
/// This is W_p^p between the two uniform empirical measures on the line.
/// Inputs must already be sorted.
pub(crate) fn sorted_wasserstein_pow(xs: &[f64], ys: &[f64], p: u32) -> f64 {
    let n = xs.len() as f64;
    xs.iter()
        .zip(ys)
        .map(|(x, y)| pow_abs(x - y, p))
        .sum::<f64>()
        / n
}

pub(crate) fn pow_abs(v: f64, p: u32) -> f64 {
    match p {
        1 => v.abs(),
        2 => v * v,
        _ => v.abs().powi(p as i32),
    }
}

pub(crate) fn root(v: f64, p: u32) -> f64 {
    match p {
        1 => v,
        2 => v.sqrt(),
        _ => v.powf(1.0 / p as f64),
    }
}

/// W_p between two uniform measures on the real line with the same number of
/// atoms, via order statistics. The inputs are not modified.
pub fn wasserstein_1d(xs: &[f64], ys: &[f64], p: u32) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.is_empty() {
        return Err(Error::InvalidMeasure("empty atom list".into()));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Ok(root(sorted_wasserstein_pow(&a, &b, p), p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sets_in_any_order() {
        assert_eq!(
            wasserstein_1d(&[3.0, 1.0, 2.0], &[2.0, 3.0, 1.0], 2).unwrap(),
            0.0
        );
    }

    #[test]
    fn two_point_example() {
        let w = wasserstein_1d(&[0.0, 1.0], &[0.0, 3.0], 2).unwrap();
        assert!((w - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            wasserstein_1d(&[0.0], &[0.0, 1.0], 2),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn inputs_untouched() {
        let xs = [2.0, 1.0];
        let _ = wasserstein_1d(&xs, &[0.0, 0.0], 1).unwrap();
        assert_eq!(xs, [2.0, 1.0]);
    }
}
