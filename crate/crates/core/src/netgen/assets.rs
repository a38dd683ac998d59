use rand::Rng;

use super::{BankProfile, NetworkConfig};
use crate::error::Result;

/// Draws `n_banks` balance-sheet sizes from a Pareto distribution truncated to
/// `[pareto_min, pareto_min * pareto_truncation_ratio]`, by inverting the
/// truncated CDF.
pub fn generate_bank_assets<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> Result<Vec<f64>> {
    cfg.validate()?;
    let lo = cfg.pareto_min;
    let hi = cfg.pareto_min * cfg.pareto_truncation_ratio;
    let shape = cfg.pareto_shape;
    // Mass of the untruncated Pareto below `hi`.
    let mass = 1.0 - cfg.pareto_truncation_ratio.powf(-shape);
    Ok((0..cfg.n_banks)
        .map(|_| {
            let u: f64 = rng.gen();
            let x = lo * (1.0 - u * mass).powf(-1.0 / shape);
            x.clamp(lo, hi)
        })
        .collect())
}

/// Mean of the Pareto(`shape`, `min`) distribution truncated at `min * ratio`.
pub fn truncated_pareto_mean(shape: f64, min: f64, ratio: f64) -> f64 {
    let max = min * ratio;
    let norm = 1.0 - ratio.powf(-shape);
    if (shape - 1.0).abs() < 1e-12 {
        min * ratio.ln() / norm
    } else {
        shape * min.powf(shape) * (min.powf(1.0 - shape) - max.powf(1.0 - shape))
            / ((shape - 1.0) * norm)
    }
}

/// Splits each balance sheet into external and interbank assets.
///
/// External assets are `theta_bar * A`, interbank assets the remainder, and
/// interbank liabilities mirror interbank assets.
pub fn build_bank_profiles(assets: &[f64], cfg: &NetworkConfig) -> Vec<BankProfile> {
    assets
        .iter()
        .map(|&a| {
            let (external_assets, interbank_assets) = exact_split(a, cfg.theta_bar);
            BankProfile {
                assets: a,
                external_assets,
                interbank_assets,
                interbank_liabilities: interbank_assets,
                net_worth: a - interbank_assets,
            }
        })
        .collect()
}

/// Splits `total` into `(fraction * total, remainder)` with `part + remainder
/// == total` exactly. The larger share is rounded and the smaller one is
/// obtained by an exact subtraction.
fn exact_split(total: f64, fraction: f64) -> (f64, f64) {
    if fraction >= 0.5 {
        let part = fraction * total;
        (part, total - part)
    } else {
        let rest = (1.0 - fraction) * total;
        (total - rest, rest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn cfg(shape: f64, min: f64, ratio: f64) -> NetworkConfig {
        NetworkConfig {
            pareto_shape: shape,
            pareto_min: min,
            pareto_truncation_ratio: ratio,
            ..NetworkConfig::default()
        }
    }

    /// Composite Simpson rule on the truncated density, in log-space.
    fn quadrature_mean(shape: f64, min: f64, ratio: f64) -> f64 {
        let max = min * ratio;
        let pdf = |x: f64| shape * min.powf(shape) / x.powf(shape + 1.0);
        let n = 20_000;
        let (a, b) = (min.ln(), max.ln());
        let h = (b - a) / n as f64;
        let integrand = |t: f64| {
            let x = t.exp();
            x * x * pdf(x)
        };
        let mass_integrand = |t: f64| {
            let x = t.exp();
            x * pdf(x)
        };
        let simpson = |f: &dyn Fn(f64) -> f64| {
            let mut s = f(a) + f(b);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(a + i as f64 * h);
            }
            s * h / 3.0
        };
        simpson(&integrand) / simpson(&mass_integrand)
    }

    #[test]
    fn analytic_mean_matches_quadrature() {
        for &(shape, ratio) in &[(2.0, 100.0), (1.0, 50.0), (0.5, 10.0), (3.0, 1000.0)] {
            let a = truncated_pareto_mean(shape, 1.5, ratio);
            let q = quadrature_mean(shape, 1.5, ratio);
            assert!((a - q).abs() < 1e-8 * q, "shape {shape}: {a} vs {q}");
        }
    }

    #[test]
    fn degenerate_truncation_is_constant() {
        let c = cfg(2.0, 3.0, 1.0 + 1e-9);
        let assets = generate_bank_assets(&c, &mut rng_from_seed(1)).unwrap();
        assert_eq!(assets.len(), 250);
        assert!(assets.iter().all(|&a| (a - 3.0).abs() < 1e-8));
    }

    #[test]
    fn samples_stay_in_support() {
        let c = cfg(1.2, 2.0, 40.0);
        let assets = generate_bank_assets(&c, &mut rng_from_seed(9)).unwrap();
        assert!(assets.iter().all(|&a| (2.0..=80.0).contains(&a)));
    }

    #[test]
    fn empirical_mean_within_three_standard_errors() {
        let c = NetworkConfig {
            n_banks: 250,
            ..cfg(2.0, 1.0, 100.0)
        };
        let expected = quadrature_mean(2.0, 1.0, 100.0);
        let reps = 1000;
        let mut samples = Vec::with_capacity(reps * c.n_banks);
        for s in 0..reps as u64 {
            samples.extend(generate_bank_assets(&c, &mut rng_from_seed(s)).unwrap());
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!(
            (mean - expected).abs() < 3.0 * se,
            "{mean} vs {expected} (se {se})"
        );
    }

    #[test]
    fn same_seed_same_assets() {
        let c = NetworkConfig::default();
        let a = generate_bank_assets(&c, &mut rng_from_seed(5)).unwrap();
        let b = generate_bank_assets(&c, &mut rng_from_seed(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn profile_split() {
        let full = NetworkConfig {
            theta_bar: 1.0,
            ..NetworkConfig::default()
        };
        let p = build_bank_profiles(&[5.0], &full)[0];
        assert_eq!(p.external_assets, 5.0);
        assert_eq!(p.interbank_assets, 0.0);

        let partial = NetworkConfig {
            theta_bar: 0.8,
            ..NetworkConfig::default()
        };
        let p = build_bank_profiles(&[10.0], &partial)[0];
        assert_eq!(p.external_assets, 8.0);
        assert_eq!(p.interbank_assets, 2.0);
        assert_eq!(p.interbank_liabilities, 2.0);
        assert_eq!(p.net_worth, 8.0);
    }

    #[test]
    fn profile_identity_holds_exactly() {
        let c = NetworkConfig {
            theta_bar: 0.37,
            ..NetworkConfig::default()
        };
        let assets = generate_bank_assets(&c, &mut rng_from_seed(3)).unwrap();
        for p in build_bank_profiles(&assets, &c) {
            assert_eq!(p.external_assets + p.interbank_assets, p.assets);
        }
    }

    proptest::proptest! {
        #[test]
        fn profile_identity_for_any_split(a in 1e-3f64..1e6, theta in 0.01f64..1.0) {
            let c = NetworkConfig { theta_bar: theta, ..NetworkConfig::default() };
            let p = build_bank_profiles(&[a], &c)[0];
            proptest::prop_assert_eq!(p.external_assets + p.interbank_assets, a);
            proptest::prop_assert!(p.interbank_assets >= 0.0);
        }
    }
}
