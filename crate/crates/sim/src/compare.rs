//! Reading features off BER curves.

/// Index of the first minimum.
pub fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v < values[b]) {
            best = Some(i);
        }
    }
    best
}

/// True if the curve falls to an interior minimum and then rises.
pub fn has_interior_minimum(values: &[f64]) -> bool {
    match argmin(values) {
        Some(i) => {
            let min = values[i];
            values[..i].iter().any(|&v| v > min) && values[i + 1..].iter().any(|&v| v > min)
        }
        None => false,
    }
}

/// Power at which curve `a` first drops below curve `b`, searching after
/// the minimum of `b`.
///
/// Between two points where both curves are nonzero the log-ratio is
/// interpolated linearly; otherwise (zero-error points) the midpoint of the
/// last strictly-above and first strictly-below powers is returned.
pub fn crossover(powers: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    assert!(powers.len() == a.len() && a.len() == b.len());
    let start = argmin(b)?;
    let mut above = None;
    for i in 0..powers.len() {
        let d = a[i] - b[i];
        if d > 0.0 {
            above = Some(i);
        } else if d < 0.0 && i > start {
            let j = above?;
            if i == j + 1 && a[i] > 0.0 && b[i] > 0.0 && a[j] > 0.0 && b[j] > 0.0 {
                let rj = (a[j] / b[j]).ln();
                let ri = (a[i] / b[i]).ln();
                return Some(powers[j] + (powers[i] - powers[j]) * rj / (rj - ri));
            }
            return Some(0.5 * (powers[j] + powers[i]));
        }
    }
    None
}

/// Power where a decreasing curve first reaches `target`, interpolating
/// `log10(ber)` linearly between the bracketing points.
pub fn power_at_ber(powers: &[f64], bers: &[f64], target: f64) -> Option<f64> {
    assert_eq!(powers.len(), bers.len());
    for i in 1..powers.len() {
        let (hi, lo) = (bers[i - 1], bers[i]);
        if hi > target && lo <= target {
            if lo <= 0.0 {
                let t = (hi - target) / (hi - lo);
                return Some(powers[i - 1] + t * (powers[i] - powers[i - 1]));
            }
            let t = (hi.log10() - target.log10()) / (hi.log10() - lo.log10());
            return Some(powers[i - 1] + t * (powers[i] - powers[i - 1]));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimum_shape() {
        assert!(has_interior_minimum(&[0.3, 0.1, 0.0, 0.0, 0.2]));
        assert!(!has_interior_minimum(&[0.3, 0.1, 0.0]));
        assert!(!has_interior_minimum(&[0.0, 0.1]));
        assert_eq!(argmin(&[0.3, 0.0, 0.0]), Some(1));
        assert_eq!(argmin(&[]), None);
    }

    #[test]
    fn crossover_interpolates() {
        let p = [0.0, 1.0, 2.0, 3.0];
        let b = [0.1, 0.01, 0.01, 0.1];
        let a = [0.5, 0.1, 0.1, 0.01];
        // log ratio ln10 at 2, -ln10 at 3
        assert!((crossover(&p, &a, &b).unwrap() - 2.5).abs() < 1e-12);
        let a = [0.5, 0.1, 0.0, 0.01];
        let b = [0.1, 0.0, 0.0, 0.1];
        assert_eq!(crossover(&p, &a, &b), Some(2.0));
        assert_eq!(crossover(&p, &b, &b), None);
    }

    #[test]
    fn ber_target_interpolation() {
        let p = [10.0, 11.0, 12.0];
        let b = [1e-2, 1e-3, 1e-5];
        assert!((power_at_ber(&p, &b, 1e-4).unwrap() - 11.5).abs() < 1e-12);
        assert!((power_at_ber(&p, &b, 1e-3).unwrap() - 11.0).abs() < 1e-12);
        assert_eq!(power_at_ber(&p, &b, 1e-6), None);
    }
}
