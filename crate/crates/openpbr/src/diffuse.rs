//! Energy-preserving rough diffuse BRDF: a Fujii-style Oren-Nayar core plus
//! an analytic multiple-scattering compensation term driven by tabulated
//! directional albedos. The compensated lobe stays reciprocal (the term is
//! symmetric in both directions) and passes a white furnace by construction.

use crate::math::{cosine_sample_hemisphere, gauss_legendre, Vec3};
use crate::microfacet::LobeSample;
use crate::spectra::Spectrum3;
use rand::Rng;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Parameters of the diffuse lobe.
#[derive(Debug, Clone, Copy)]
pub struct EonParams {
    /// Single-scatter reflectance color, each channel in [0,1].
    pub rho: Spectrum3,
    /// Facet roughness in [0,1]; 0 is Lambertian.
    pub sigma: f64,
    /// Overall lobe weight in [0,1].
    pub weight: f64,
}

/// Constant term of the rough-diffuse kernel; equals 1 at zero roughness.
pub fn fon_a(sigma: f64) -> f64 {
    1.0 / (1.0 + (0.5 - 2.0 / (3.0 * PI)) * sigma)
}

/// Angular term coefficient; vanishes at zero roughness.
pub fn fon_b(sigma: f64) -> f64 {
    sigma * fon_a(sigma)
}

/// Single-scatter kernel value for unit reflectance and unit weight.
fn fon_kernel(wi: Vec3, wo: Vec3, sigma: f64) -> f64 {
    let s = wi.x * wo.x + wi.y * wo.y;
    let t = if s > 0.0 { wi.z.max(wo.z) } else { 1.0 };
    (fon_a(sigma) + fon_b(sigma) * s / t) / PI
}

const TABLE_N: usize = 32;

/// Directional and cosine-averaged albedos of the unit-reflectance
/// single-scatter kernel over (roughness, view cosine).
struct EonAlbedoTable {
    directional: [[f64; TABLE_N]; TABLE_N],
    average: [f64; TABLE_N],
}

/// Albedo of the unit-reflectance kernel by quadrature. The azimuth
/// integral is closed-form (the kernel is linear in cos(phi) with the
/// near-field denominator constant per half-plane), leaving a 1D cosine
/// integral split at the view cosine where the max() kink sits.
pub fn eon_directional_albedo_quadrature(mu_o: f64, sigma: f64) -> f64 {
    let mu_o = mu_o.clamp(1e-6, 1.0);
    let (nodes, weights) = quad_rule();
    let sin_o = (1.0 - mu_o * mu_o).max(0.0).sqrt();
    let mut inner = 0.0;
    // mu_i below mu_o: the near-field denominator is mu_o.
    for (&x, &w) in nodes.iter().zip(weights) {
        let mu = 0.5 * mu_o * (x + 1.0);
        let sin_i = (1.0 - mu * mu).max(0.0).sqrt();
        inner += 0.5 * mu_o * w * mu * sin_i * (1.0 / mu_o - 1.0);
    }
    // mu_i above mu_o: the denominator is mu_i.
    for (&x, &w) in nodes.iter().zip(weights) {
        let mu = 0.5 * (mu_o + 1.0) + 0.5 * (1.0 - mu_o) * x;
        let sin_i = (1.0 - mu * mu).max(0.0).sqrt();
        inner += 0.5 * (1.0 - mu_o) * w * mu * sin_i * (1.0 / mu - 1.0);
    }
    fon_a(sigma) + (2.0 * fon_b(sigma) / PI) * sin_o * inner
}

fn quad_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(64))
}

impl EonAlbedoTable {
    fn build() -> Self {
        let mut directional = [[1.0; TABLE_N]; TABLE_N];
        let mut average = [1.0; TABLE_N];
        let (nodes, weights) = quad_rule();
        for is in 1..TABLE_N {
            let sigma = is as f64 / (TABLE_N - 1) as f64;
            for im in 0..TABLE_N {
                let mu = (im as f64 / (TABLE_N - 1) as f64).max(1e-4);
                directional[is][im] = eon_directional_albedo_quadrature(mu, sigma);
            }
            let mut avg = 0.0;
            for (&x, &w) in nodes.iter().zip(weights) {
                let mu = 0.5 * (x + 1.0);
                avg += w * mu * eon_directional_albedo_quadrature(mu, sigma);
            }
            average[is] = avg; // 2 * integral * (interval jacobian 1/2)
        }
        EonAlbedoTable { directional, average }
    }

    fn lookup_directional(&self, mu: f64, sigma: f64) -> f64 {
        let n = (TABLE_N - 1) as f64;
        let x = mu.clamp(0.0, 1.0) * n;
        let y = sigma.clamp(0.0, 1.0) * n;
        let ix = (x as usize).min(TABLE_N - 2);
        let iy = (y as usize).min(TABLE_N - 2);
        let fx = x - ix as f64;
        let fy = y - iy as f64;
        let a = self.directional[iy][ix] * (1.0 - fx) + self.directional[iy][ix + 1] * fx;
        let b =
            self.directional[iy + 1][ix] * (1.0 - fx) + self.directional[iy + 1][ix + 1] * fx;
        a * (1.0 - fy) + b * fy
    }

    fn lookup_average(&self, sigma: f64) -> f64 {
        let n = (TABLE_N - 1) as f64;
        let y = sigma.clamp(0.0, 1.0) * n;
        let iy = (y as usize).min(TABLE_N - 2);
        let fy = y - iy as f64;
        self.average[iy] * (1.0 - fy) + self.average[iy + 1] * fy
    }
}

fn eon_table() -> &'static EonAlbedoTable {
    static TABLE: OnceLock<EonAlbedoTable> = OnceLock::new();
    TABLE.get_or_init(EonAlbedoTable::build)
}

/// Tabulated directional albedo of the unit-reflectance kernel.
pub fn eon_directional_albedo(mu: f64, sigma: f64) -> f64 {
    eon_table().lookup_directional(mu, sigma)
}

/// Tabulated cosine-averaged albedo of the unit-reflectance kernel.
pub fn eon_average_albedo(sigma: f64) -> f64 {
    eon_table().lookup_average(sigma)
}

/// Effective color of the multiple-scattering compensation term. Chosen so
/// the compensated lobe's albedo at unit reflectance is exactly 1.
pub fn eon_multiscatter_rho(rho: Spectrum3, sigma: f64) -> Spectrum3 {
    let avg = eon_average_albedo(sigma);
    if avg >= 1.0 - 1e-9 {
        return Spectrum3::ZERO;
    }
    let gain = avg / (1.0 - avg);
    rho.zip(rho, |r, _| r * r * gain / (1.0 - r * (1.0 - avg)))
}

/// Compensated rough-diffuse BRDF value (no cosine factor).
pub fn eon_eval(wi: Vec3, wo: Vec3, p: &EonParams) -> Spectrum3 {
    if wi.z <= 0.0 || wo.z <= 0.0 {
        return Spectrum3::ZERO;
    }
    let single = p.rho * (p.weight * fon_kernel(wi, wo, p.sigma));
    if p.sigma <= 0.0 {
        return single;
    }
    let e_i = eon_directional_albedo(wi.z, p.sigma);
    let e_o = eon_directional_albedo(wo.z, p.sigma);
    let comp = eon_multiscatter_rho(p.rho, p.sigma)
        * (p.weight / PI * (1.0 - e_i).max(0.0) * (1.0 - e_o).max(0.0));
    single + comp
}

/// Directional albedo of the compensated lobe, from the tables.
pub fn eon_compensated_albedo(mu_o: f64, p: &EonParams) -> Spectrum3 {
    let e_o = eon_directional_albedo(mu_o, p.sigma);
    let avg = eon_average_albedo(p.sigma);
    let comp = eon_multiscatter_rho(p.rho, p.sigma) * ((1.0 - avg) * (1.0 - e_o).max(0.0));
    (p.rho * e_o + comp) * p.weight
}

/// Cosine-sampled diffuse lobe.
#[derive(Debug, Clone, Copy)]
pub struct DiffuseLobe {
    pub params: EonParams,
}

impl DiffuseLobe {
    pub fn eval(&self, wi: Vec3, wo: Vec3) -> Spectrum3 {
        eon_eval(wi, wo, &self.params)
    }

    pub fn pdf(&self, wi: Vec3, wo: Vec3) -> f64 {
        if wi.z <= 0.0 || wo.z <= 0.0 {
            return 0.0;
        }
        wi.z / PI
    }

    pub fn sample(&self, wo: Vec3, rng: &mut impl Rng) -> Option<LobeSample> {
        if wo.z <= 0.0 {
            return None;
        }
        let wi = cosine_sample_hemisphere(rng.random(), rng.random());
        let pdf = wi.z / PI;
        Some(LobeSample {
            wi,
            pdf,
            weight: self.eval(wi, wo) * PI,
            delta: false,
        })
    }

    pub fn albedo(&self, mu_o: f64) -> Spectrum3 {
        eon_compensated_albedo(mu_o.abs().max(1e-4), &self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dir(mu: f64, phi: f64) -> Vec3 {
        let s = (1.0 - mu * mu).max(0.0).sqrt();
        Vec3::new(s * phi.cos(), s * phi.sin(), mu)
    }

    /// Hemisphere integral of eval times cosine by 2D quadrature.
    fn albedo_by_quadrature(mu_o: f64, p: &EonParams) -> f64 {
        let wo = dir(mu_o, 0.0);
        let (mn, mw) = gauss_legendre(64);
        let (pn, pw) = gauss_legendre(64);
        let mut total = 0.0;
        for (&xm, &wm) in mn.iter().zip(&mw) {
            let mu = 0.5 * (xm + 1.0);
            for (&xp, &wp) in pn.iter().zip(&pw) {
                let phi = PI * (xp + 1.0);
                let wi = dir(mu, phi);
                total += 0.5 * PI * wm * wp * eon_eval(wi, wo, p)[0] * mu;
            }
        }
        total
    }

    #[test]
    fn zero_roughness_is_lambert() {
        let p = EonParams { rho: Spectrum3::splat(0.8), sigma: 0.0, weight: 1.0 };
        for (mi, mo, phi) in [(1.0, 1.0, 0.0), (0.3, 0.9, 1.2), (0.7, 0.2, 4.0)] {
            let f = eon_eval(dir(mi, phi), dir(mo, 0.0), &p);
            for k in 0..3 {
                assert_relative_eq!(f[k], 0.8 / PI, epsilon = 1e-15);
            }
        }
        // Cosine sampling of the Lambert limit has constant weight rho.
        let lobe = DiffuseLobe { params: p };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..16 {
            let s = lobe.sample(dir(0.6, 0.0), &mut rng).unwrap();
            for k in 0..3 {
                assert_relative_eq!(s.weight[k], 0.8, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn white_furnace_at_full_roughness() {
        let p = EonParams { rho: Spectrum3::ONE, sigma: 1.0, weight: 1.0 };
        for mu in [0.05, 0.2, 0.5, 0.8, 1.0] {
            let e = albedo_by_quadrature(mu, &p);
            assert!((e - 1.0).abs() < 3e-3, "mu={mu} albedo={e}");
        }
    }

    #[test]
    fn analytic_albedo_closes_over_roughness_grid() {
        for sigma in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let p = EonParams { rho: Spectrum3::ONE, sigma, weight: 1.0 };
            for mu in [0.05, 0.3, 0.6, 0.9] {
                let e = eon_compensated_albedo(mu, &p)[0];
                assert!((0.997..=1.003).contains(&e), "sigma={sigma} mu={mu} e={e}");
            }
        }
    }

    #[test]
    fn midtone_darkens_under_roughness() {
        let p = EonParams { rho: Spectrum3::splat(0.5), sigma: 1.0, weight: 1.0 };
        for mu in [0.3, 0.6, 0.9] {
            let e = albedo_by_quadrature(mu, &p);
            assert!(e < 0.5, "mu={mu} albedo={e}");
        }
    }

    #[test]
    fn unit_kernel_albedo_table() {
        for mu in [0.05, 0.3, 0.7, 1.0] {
            assert_relative_eq!(eon_directional_albedo(mu, 0.0), 1.0, epsilon = 1e-12);
        }
        // Monotone nonincreasing in roughness at normal view.
        let mut last = f64::INFINITY;
        for i in 0..TABLE_N {
            let sigma = i as f64 / (TABLE_N - 1) as f64;
            let e = eon_directional_albedo(1.0, sigma);
            assert!(e <= last + 1e-12);
            last = e;
        }
        // Table tracks fresh quadrature off the grid nodes.
        for (mu, sigma) in [(0.37, 0.43), (0.81, 0.95), (0.13, 0.61)] {
            let direct = eon_directional_albedo_quadrature(mu, sigma);
            assert!((eon_directional_albedo(mu, sigma) - direct).abs() < 2e-3);
        }
    }

    #[test]
    fn average_albedo_matches_monte_carlo() {
        // Both directions cosine-sampled: the estimator of pi*f at unit
        // reflectance has expectation <E>.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let wi = cosine_sample_hemisphere(rng.random(), rng.random());
            let wo = cosine_sample_hemisphere(rng.random(), rng.random());
            sum += PI * fon_kernel(wi, wo, 1.0);
        }
        let mc = sum / n as f64;
        let quad = eon_average_albedo(1.0);
        assert!((mc - quad).abs() < 1e-3, "mc={mc} quad={quad}");
    }

    #[test]
    fn sampler_closes_furnace() {
        let lobe = DiffuseLobe {
            params: EonParams { rho: Spectrum3::ONE, sigma: 1.0, weight: 1.0 },
        };
        let wo = dir(0.5, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let s = lobe.sample(wo, &mut rng).unwrap();
            sum += s.weight[0];
            sum_sq += s.weight[0] * s.weight[0];
        }
        let mean = sum / n as f64;
        let var = (sum_sq / n as f64 - mean * mean).max(0.0);
        let sigma3 = 3.0 * (var / n as f64).sqrt();
        assert!((mean - 1.0).abs() < sigma3 + 3e-3, "mean={mean} 3sigma={sigma3}");
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let lobe = DiffuseLobe {
            params: EonParams { rho: Spectrum3::splat(0.6), sigma: 0.4, weight: 1.0 },
        };
        let wo = dir(0.7, 0.3);
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..32 {
            let sa = lobe.sample(wo, &mut a).unwrap();
            let sb = lobe.sample(wo, &mut b).unwrap();
            assert_eq!(sa.wi, sb.wi);
            assert_eq!(sa.weight, sb.weight);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn eval_is_reciprocal_and_compensation_nonnegative(
            rho in 0.0..1.0f64,
            sigma in 0.0..1.0f64,
            mi in 0.01..1.0f64,
            mo in 0.01..1.0f64,
            phi in 0.0..(2.0 * PI),
        ) {
            let p = EonParams { rho: Spectrum3::splat(rho), sigma, weight: 1.0 };
            let wi = dir(mi, phi);
            let wo = dir(mo, 0.0);
            let fab = eon_eval(wi, wo, &p);
            let fba = eon_eval(wo, wi, &p);
            for k in 0..3 {
                prop_assert!((fab[k] - fba[k]).abs() < 1e-12);
            }
            let single = rho * fon_kernel(wi, wo, sigma);
            prop_assert!(fab[0] >= single - 1e-15, "compensation must not remove energy");
        }
    }
}
