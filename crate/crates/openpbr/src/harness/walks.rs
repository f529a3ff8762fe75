//! Brute-force random-walk oracles: a photon walk through a smooth
//! dielectric lid over a flat base, and a volumetric walk in a scattering
//! half-space. Ground truth for the layering and inversion approximations,
//! so nothing here calls them: the only shared formula is the scalar
//! dielectric Fresnel, and the samplers are derived inline.

use super::split_seed;
use crate::fresnel::fresnel_dielectric;
use crate::math::{Frame, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Walk budget and stream seed.
#[derive(Debug, Clone, Copy)]
pub struct WalkConfig {
    pub walks: usize,
    pub max_bounces: usize,
    /// Russian roulette starts at this bounce, surviving by throughput.
    pub rr_start: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks: 100_000,
            max_bounces: 4096,
            rr_start: 32,
            seed: 0,
        }
    }
}

/// Mean escaped fraction with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct WalkEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub walks: usize,
}

/// What sits under the dielectric lid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoatBase {
    /// Cosine re-emission with the given reflectance.
    Lambert,
    /// Angle-preserving reflection with the given reflectance.
    Mirror,
}

/// Top surface of the scattering half-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Vacuum,
    /// Refracting boundary with this interior-over-exterior index ratio.
    Ior(f64),
}

/// Cosine of the refracted direction entering a medium denser by `eta`;
/// `None` past the critical angle.
fn refracted_cos(mu: f64, eta: f64) -> Option<f64> {
    let s2 = (1.0 - mu * mu) / (eta * eta);
    (s2 < 1.0).then(|| (1.0 - s2).sqrt())
}

/// Runs `per_walk` over the configured count in fixed-size seeded batches
/// and reduces in batch order.
fn run_walks(
    cfg: &WalkConfig,
    salt: u64,
    per_walk: impl Fn(&mut ChaCha8Rng) -> f64 + Sync,
) -> WalkEstimate {
    const BATCH: usize = 1024;
    let batches = cfg.walks.div_ceil(BATCH);
    let partials: Vec<(f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = BATCH.min(cfg.walks - b * BATCH);
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(cfg.seed, salt, b as u64));
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..count {
                let v = per_walk(&mut rng);
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq)
        })
        .collect();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for (s, sq) in &partials {
        sum += s;
        sum_sq += sq;
    }
    let n = cfg.walks as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    WalkEstimate {
        mean,
        stderr: (var / n).sqrt(),
        walks: cfg.walks,
    }
}

/// Total albedo of a flat base of reflectance `rho_d` under a smooth
/// dielectric lid, by explicit photon transport: Fresnel-sampled entry,
/// Beer absorption along the refracted slant per crossing (`t` is the
/// normal-incidence transmittance), base bounce, Fresnel or TIR at the lid
/// underside, until escape or termination.
pub fn coat_walk_oracle(
    mu_o: f64,
    eta: f64,
    t: f64,
    rho_d: f64,
    base: CoatBase,
    cfg: &WalkConfig,
) -> WalkEstimate {
    let mu_o = mu_o.clamp(1e-4, 1.0);
    run_walks(cfg, 0x1AB, |rng| {
        if rng.random::<f64>() < fresnel_dielectric(mu_o, eta) {
            return 1.0;
        }
        let mut mu = refracted_cos(mu_o, eta).unwrap_or(1.0);
        let mut w = 1.0;
        for bounce in 0..cfg.max_bounces {
            if t < 1.0 {
                w *= t.powf(1.0 / mu.max(1e-6));
            }
            w *= rho_d;
            if base == CoatBase::Lambert {
                mu = rng.random::<f64>().sqrt();
            }
            if t < 1.0 {
                w *= t.powf(1.0 / mu.max(1e-6));
            }
            if rng.random::<f64>() >= fresnel_dielectric(mu, 1.0 / eta) {
                return w;
            }
            if bounce + 1 >= cfg.rr_start {
                let p = w.clamp(1e-3, 1.0);
                if rng.random::<f64>() >= p {
                    return 0.0;
                }
                w /= p;
            }
        }
        0.0
    })
}

/// Henyey-Greenstein deflection of `dir`: the exact cosine inversion of the
/// phase CDF, rotated by a uniform azimuth.
fn hg_deflect(dir: Vec3, g: f64, rng: &mut ChaCha8Rng) -> Vec3 {
    let u: f64 = rng.random();
    let cos_t = if g.abs() < 1e-3 {
        1.0 - 2.0 * u
    } else {
        let s = (1.0 - g * g) / (1.0 - g + 2.0 * g * u);
        ((1.0 + g * g - s * s) / (2.0 * g)).clamp(-1.0, 1.0)
    };
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    Frame::from_normal(dir).to_world(Vec3::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t))
}

/// Escaped fraction of a homogeneous scattering half-space under diffuse
/// (cosine-distributed) illumination: exponential flights at unit
/// extinction, survival `alpha` per collision, Henyey-Greenstein
/// deflections, and Fresnel or total internal reflection at a refracting
/// top boundary. An `Ior` boundary counts light rejected at entry as
/// returned. Deep high-albedo walks that outlive the bounce cap are scored
/// zero; the cap defaults high enough to make that mass negligible next to
/// the Monte Carlo error.
pub fn halfspace_walk_oracle(
    alpha: f64,
    g: f64,
    boundary: Boundary,
    cfg: &WalkConfig,
) -> WalkEstimate {
    let max_bounces = cfg.max_bounces.max(64);
    run_walks(cfg, 0x2CD, |rng| {
        let mu_in = rng.random::<f64>().sqrt().max(1e-6);
        let mu_t = match boundary {
            Boundary::Vacuum => mu_in,
            Boundary::Ior(eta) => {
                if rng.random::<f64>() < fresnel_dielectric(mu_in, eta) {
                    return 1.0;
                }
                refracted_cos(mu_in, eta).unwrap_or(1.0)
            }
        };
        let phi = 2.0 * PI * rng.random::<f64>();
        let s = (1.0 - mu_t * mu_t).max(0.0).sqrt();
        let mut dir = Vec3::new(s * phi.cos(), s * phi.sin(), -mu_t);
        let mut z = 0.0_f64;
        let mut w = 1.0_f64;
        for bounce in 0..max_bounces {
            let flight = -(1.0 - rng.random::<f64>()).ln();
            z += dir.z * flight;
            if z >= 0.0 {
                match boundary {
                    Boundary::Vacuum => return w,
                    Boundary::Ior(eta) => {
                        if rng.random::<f64>() >= fresnel_dielectric(dir.z.max(1e-9), 1.0 / eta)
                        {
                            return w;
                        }
                        // Reflected: mirror the overshoot back inside.
                        z = -z;
                        dir.z = -dir.z;
                    }
                }
            }
            w *= alpha;
            dir = hg_deflect(dir, g, rng);
            if bounce + 1 >= cfg.rr_start {
                let p = w.clamp(1e-3, 1.0);
                if rng.random::<f64>() >= p {
                    return 0.0;
                }
                w /= p;
            }
        }
        0.0
    })
}
