use super::BuildError;

/// Closed-form bracket for the empty-system probability of the symmetric
/// joint-departures walk with axis rate `μ* < μ/2`, perturbed to `μ/2`:
/// `(1−r)² ∓ g` with `r = (−1 + √(1 + 8λ/μ))/2` and
/// `g = 2r(1−r)(μ/2−μ*)(μ−μ*)/(μμ*)`.
pub fn manual_prop4_bounds(lambda: f64, mu: f64, mu_star: f64) -> Result<(f64, f64), BuildError> {
    if !(lambda > 0.0 && mu > 0.0) || (2.0 * lambda + mu - 1.0).abs() > 1e-12 {
        return Err(BuildError::Precondition("requires λ, μ > 0 with 2λ + μ = 1".into()));
    }
    if !(mu_star > 0.0 && mu_star <= mu / 2.0) {
        return Err(BuildError::Precondition("requires 0 < μ* ≤ μ/2".into()));
    }
    let r = (-1.0 + (1.0 + 8.0 * lambda / mu).sqrt()) / 2.0;
    let g = 2.0 * r * (1.0 - r) * (mu / 2.0 - mu_star) * (mu - mu_star) / (mu * mu_star);
    let base = (1.0 - r) * (1.0 - r);
    Ok((base - g, base + g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let (lo, hi) = manual_prop4_bounds(0.1, 0.8, 0.32).unwrap();
        assert!((lo - 0.57942).abs() < 5e-6, "{lo}");
        assert!((hi - 0.67794).abs() < 5e-6, "{hi}");
    }

    #[test]
    fn zero_magnitude() {
        let (lo, hi) = manual_prop4_bounds(0.1, 0.8, 0.4).unwrap();
        assert_eq!(lo, hi);
    }

    #[test]
    fn preconditions() {
        assert!(manual_prop4_bounds(0.1, 0.8, 0.41).is_err());
        assert!(manual_prop4_bounds(0.2, 0.8, 0.3).is_err());
    }
}
