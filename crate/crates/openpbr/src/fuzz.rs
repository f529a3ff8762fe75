//! Fuzz/sheen lobe: a tinted grazing-brightening reflection whose albedo
//! comes from an embedded table, plus the tint-free layering factor and the
//! substrate roughening heuristic. The table is produced by a brute-force
//! volumetric simulator kept here for regeneration audits: a unit-optical-
//! depth slab of purely scattering mirror microflakes with GGX slope
//! statistics, walked until escape, then isotonically smoothed.

use crate::math::{cosine_sample_hemisphere, lerp, reflect, Vec3};
use crate::microfacet::{sample_visible_normal_square, LobeSample, RoughnessAlphas};
use crate::spectra::Spectrum3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

mod albedo_table;
pub use albedo_table::FUZZ_ALBEDO_TABLE;

/// Table resolution along both the roughness and view-cosine axes.
pub const FUZZ_TABLE_N: usize = 32;

/// Fuzz controls. The presence weight acts only in the layer mix; the lobe
/// itself is shaped by color and roughness.
#[derive(Debug, Clone, Copy)]
pub struct FuzzParams {
    pub weight: f64,
    pub color: Spectrum3,
    pub roughness: f64,
}

fn table_mu(index: usize) -> f64 {
    (index as f64 / (FUZZ_TABLE_N - 1) as f64).max(0.02)
}

fn table_alpha(index: usize) -> f64 {
    index as f64 / (FUZZ_TABLE_N - 1) as f64
}

/// One random walk through the flake slab; returns the weight escaping the
/// top (reflectance contribution). Flakes are two-sided mirrors, so the
/// visible-normal draw happens in the upper half and flips with the ray.
/// Grazing entries routinely need dozens of bounces, so roulette starts far
/// out where it cannot starve the estimate of its long-walk mass.
fn walk_escapes_top(mu_o: f64, alphas: &RoughnessAlphas, rng: &mut ChaCha8Rng) -> f64 {
    let sin_o = (1.0 - mu_o * mu_o).max(0.0).sqrt();
    let mut w = Vec3::new(sin_o, 0.0, -mu_o);
    let mut depth = 0.0;
    let mut weight = 1.0;
    for bounce in 0..16384 {
        let s = -(1.0 - rng.random::<f64>()).ln();
        depth -= s * w.z;
        if depth < 0.0 {
            return weight;
        }
        if depth > 1.0 {
            return 0.0;
        }
        let v = -w;
        let flip = v.z < 0.0;
        let v_up = if flip { -v } else { v };
        let m = sample_visible_normal_square(v_up, alphas, rng.random(), rng.random());
        let r = reflect(v_up, m);
        w = if flip { -r } else { r };
        if bounce >= 2048 {
            if rng.random::<f64>() < 0.05 {
                return 0.0;
            }
            weight /= 0.95;
        }
    }
    0.0
}

/// Monte Carlo slab reflectance at one (view cosine, roughness) cell.
pub fn simulate_fuzz_albedo(mu_o: f64, alpha: f64, walks: usize, seed: u64) -> f64 {
    let alphas = RoughnessAlphas::isotropic(alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    for _ in 0..walks {
        sum += walk_escapes_top(mu_o, &alphas, &mut rng);
    }
    sum / walks as f64
}

/// In-place isotonic regression to a nonincreasing sequence (pool adjacent
/// violators, equal weights).
pub fn isotonic_nonincreasing(values: &mut [f64]) {
    let n = values.len();
    let mut level = Vec::with_capacity(n);
    let mut count: Vec<usize> = Vec::with_capacity(n);
    for &v in values.iter() {
        level.push(v);
        count.push(1);
        while level.len() > 1 && level[level.len() - 2] < level[level.len() - 1] {
            let (lv, lc) = (level.pop().unwrap(), count.pop().unwrap());
            let last = level.len() - 1;
            let merged = (level[last] * count[last] as f64 + lv * lc as f64)
                / (count[last] + lc) as f64;
            level[last] = merged;
            count[last] += lc;
        }
    }
    let mut k = 0;
    for (lv, lc) in level.into_iter().zip(count) {
        for _ in 0..lc {
            values[k] = lv;
            k += 1;
        }
    }
}

/// Full table generation: rows indexed by roughness, columns by view cosine,
/// every row smoothed to the nonincreasing shape the physics dictates (more
/// grazing, more reflectance). Deterministic for a given seed; cells get
/// independent streams so the parallel order cannot matter.
pub fn simulate_fuzz_albedo_table(seed: u64, walks_per_cell: usize) -> Vec<Vec<f64>> {
    let cells: Vec<(usize, usize)> = (0..FUZZ_TABLE_N)
        .flat_map(|ia| (0..FUZZ_TABLE_N).map(move |im| (ia, im)))
        .collect();
    let flat: Vec<f64> = cells
        .par_iter()
        .map(|&(ia, im)| {
            let cell_seed = seed ^ ((ia * FUZZ_TABLE_N + im) as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            simulate_fuzz_albedo(table_mu(im), table_alpha(ia), walks_per_cell, cell_seed)
        })
        .collect();
    let mut table: Vec<Vec<f64>> = flat.chunks(FUZZ_TABLE_N).map(|r| r.to_vec()).collect();
    for row in table.iter_mut() {
        isotonic_nonincreasing(row);
        for v in row.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
    }
    table
}

/// Slab reflectance for unit-tint fuzz, bilinearly interpolated from the
/// embedded table.
pub fn fuzz_albedo(mu_o: f64, alpha: f64) -> f64 {
    let n = (FUZZ_TABLE_N - 1) as f64;
    let x = mu_o.clamp(0.0, 1.0) * n;
    let y = alpha.clamp(0.0, 1.0) * n;
    let ix = (x as usize).min(FUZZ_TABLE_N - 2);
    let iy = (y as usize).min(FUZZ_TABLE_N - 2);
    let fx = x - ix as f64;
    let fy = y - iy as f64;
    let at = |r: usize, c: usize| FUZZ_ALBEDO_TABLE[r][c];
    let a = at(iy, ix) * (1.0 - fx) + at(iy, ix + 1) * fx;
    let b = at(iy + 1, ix) * (1.0 - fx) + at(iy + 1, ix + 1) * fx;
    a * (1.0 - fy) + b * fy
}

/// Fuzz BRDF value. The scattered lobe is a normalized cosine density, so
/// the directional albedo is the tinted table value exactly.
pub fn fuzz_eval(wi: Vec3, wo: Vec3, p: &FuzzParams) -> Spectrum3 {
    if wi.z <= 0.0 || wo.z <= 0.0 {
        return Spectrum3::ZERO;
    }
    p.color * (fuzz_albedo(wo.z, p.roughness) / PI)
}

/// Combines the fuzz lobe with what lies beneath: the under-layer sees the
/// untinted escape fraction, because the flakes scatter without absorbing.
pub fn fuzz_layer(
    f_fuzz: Spectrum3,
    e_fuzz_white: f64,
    f_base: Spectrum3,
    fuzz_weight: f64,
) -> Spectrum3 {
    f_fuzz * fuzz_weight + f_base * lerp(1.0, 1.0 - e_fuzz_white, fuzz_weight)
}

/// Substrate roughening by the fuzz layer, proportional to its visible
/// (tinted) reflectance.
pub fn fuzz_roughen(r_base: f64, tinted_albedo: Spectrum3) -> f64 {
    let r_f = tinted_albedo.luminance().clamp(0.0, 1.0);
    (r_base.powi(4) + 2.0 * r_f.powi(4)).min(1.0).powf(0.25)
}

/// Shading normal of the fuzz lobe: between the geometric and coat normals
/// by coat presence, renormalized.
pub fn fuzz_normal(n_geo: Vec3, n_coat: Vec3, coat_weight: f64) -> Vec3 {
    let blended = n_geo.lerp(&n_coat, coat_weight.clamp(0.0, 1.0));
    let len = blended.norm();
    if len < 1e-9 { n_geo } else { blended / len }
}

/// Cosine-sampled fuzz lobe.
#[derive(Debug, Clone, Copy)]
pub struct FuzzLobe {
    pub params: FuzzParams,
}

impl FuzzLobe {
    pub fn eval(&self, wi: Vec3, wo: Vec3) -> Spectrum3 {
        fuzz_eval(wi, wo, &self.params)
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
        Some(LobeSample {
            wi,
            pdf: wi.z / PI,
            weight: self.eval(wi, wo) * PI,
            delta: false,
        })
    }

    /// Tinted directional albedo.
    pub fn albedo(&self, mu_o: f64) -> Spectrum3 {
        self.params.color * fuzz_albedo(mu_o.abs(), self.params.roughness)
    }

    /// Untinted escape fraction used by the layer transmission factor.
    pub fn albedo_white(&self, mu_o: f64) -> f64 {
        fuzz_albedo(mu_o.abs(), self.params.roughness)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn table_entries_are_physical() {
        for row in FUZZ_ALBEDO_TABLE.iter() {
            for &v in row.iter() {
                assert!((0.0..=1.0).contains(&v));
            }
            // Isotonic shape: never brighter away from grazing.
            for pair in row.windows(2) {
                assert!(pair[0] >= pair[1] - 1e-12);
            }
        }
    }

    #[test]
    fn grazing_views_brighten() {
        for ia in 0..FUZZ_TABLE_N {
            let row = &FUZZ_ALBEDO_TABLE[ia];
            assert!(row[0] >= row[FUZZ_TABLE_N - 1]);
        }
        // Pronounced sheen signature on the rough half of the table.
        let rough = &FUZZ_ALBEDO_TABLE[FUZZ_TABLE_N - 1];
        assert!(rough[0] > rough[FUZZ_TABLE_N - 1] + 0.05);
    }

    // Smooth flakes lie flat, so reflection preserves |cos| and the walk
    // collapses to a two-stream slab with exact reflectance T/(1+T) at
    // effective optical depth T = 1/mu, i.e. 1/(1+mu).
    #[test]
    fn smooth_flake_row_matches_two_stream_closed_form() {
        for im in 0..FUZZ_TABLE_N {
            let mu = super::table_mu(im);
            let exact = 1.0 / (1.0 + mu);
            let got = FUZZ_ALBEDO_TABLE[0][im];
            assert!(
                (got - exact).abs() < 5e-3,
                "mu {mu}: table {got}, closed form {exact}"
            );
        }
    }

    #[test]
    fn simulator_matches_two_stream_closed_form() {
        for (mu, walks) in [(0.02, 40_000), (0.3, 60_000), (1.0, 60_000)] {
            let got = simulate_fuzz_albedo(mu, 0.0, walks, 0xAB1E);
            let exact = 1.0 / (1.0 + mu);
            // Bernoulli-scale noise; 5 sigma plus slope-floor slack.
            let tol = 5.0 * 0.5 / (walks as f64).sqrt() + 1e-3;
            assert!(
                (got - exact).abs() < tol,
                "mu {mu}: simulated {got}, closed form {exact}"
            );
        }
    }

    #[test]
    fn regenerated_table_agrees_with_embedded() {
        let fresh = simulate_fuzz_albedo_table(0xF02D, 100_000);
        let mut worst = 0.0f64;
        for ia in 0..FUZZ_TABLE_N {
            for im in 0..FUZZ_TABLE_N {
                worst = worst.max((fresh[ia][im] - FUZZ_ALBEDO_TABLE[ia][im]).abs());
            }
        }
        assert!(worst < 0.01, "worst cell deviation {worst}");
    }

    #[test]
    fn isotonic_regression_pools_violators() {
        let mut v = [1.0, 0.9, 0.95, 0.4, 0.5, 0.3];
        isotonic_nonincreasing(&mut v);
        for pair in v.windows(2) {
            assert!(pair[0] >= pair[1]);
        }
        assert_relative_eq!(v[1], 0.925, epsilon = 1e-12);
        assert_relative_eq!(v[2], 0.925, epsilon = 1e-12);
        assert_relative_eq!(v[3], 0.45, epsilon = 1e-12);
        // Total mass is preserved.
        assert_relative_eq!(v.iter().sum::<f64>(), 4.05, epsilon = 1e-12);
    }

    #[test]
    fn eval_albedo_is_exact_by_construction() {
        let p = FuzzParams {
            weight: 1.0,
            color: Spectrum3::new(0.9, 0.6, 0.3),
            roughness: 0.5,
        };
        let lobe = FuzzLobe { params: p };
        let wo = Vec3::new(0.6, 0.0, 0.8);
        // The weight is constant, so one sample already integrates exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = lobe.sample(wo, &mut rng).unwrap();
        let e = fuzz_albedo(0.8, 0.5);
        for k in 0..3 {
            assert_relative_eq!(s.weight[k], p.color[k] * e, epsilon = 1e-12);
            assert_relative_eq!(lobe.albedo(0.8)[k], p.color[k] * e, epsilon = 1e-12);
        }
        let black = FuzzParams { color: Spectrum3::ZERO, ..p };
        assert_eq!(fuzz_eval(s.wi, wo, &black), Spectrum3::ZERO);
    }

    #[test]
    fn layering_closes_white_on_white() {
        for mu in [0.1, 0.5, 0.9] {
            for alpha in [0.2, 0.7, 1.0] {
                let e = fuzz_albedo(mu, alpha);
                // A white Lambertian base has albedo 1; the combined albedo
                // of unit-weight white fuzz over it must close exactly.
                let combined = 1.0 * e + (1.0 - e) * 1.0;
                assert_relative_eq!(combined, 1.0, epsilon = 1e-12);
                // The layer operator reproduces that algebra per channel.
                let f = fuzz_layer(
                    Spectrum3::splat(e),
                    e,
                    Spectrum3::ONE,
                    1.0,
                );
                assert_relative_eq!(f[0], 1.0 * e + (1.0 - e), epsilon = 1e-12);
            }
        }
        let base = Spectrum3::new(0.2, 0.4, 0.8);
        assert_eq!(fuzz_layer(Spectrum3::ONE, 0.7, base, 0.0), base);
        let pure = fuzz_layer(Spectrum3::splat(0.5), 1.0, base, 1.0);
        assert_relative_eq!(pure[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(pure[2], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn roughening_follows_visible_albedo() {
        assert_relative_eq!(fuzz_roughen(0.3, Spectrum3::ZERO), 0.3, epsilon = 1e-12);
        assert_relative_eq!(fuzz_roughen(0.0, Spectrum3::ONE), 1.0, epsilon = 1e-12);
        let mid = fuzz_roughen(0.2, Spectrum3::splat(0.5));
        assert!(mid > 0.2 && mid < 1.0);
    }

    #[test]
    fn blended_normal_stays_unit() {
        let n_geo = Vec3::z();
        let n_coat = Vec3::new(0.3, 0.1, 0.9486832980505138).normalize();
        for c in [0.0, 0.4, 1.0] {
            let n = fuzz_normal(n_geo, n_coat, c);
            assert_relative_eq!(n.norm(), 1.0, epsilon = 1e-12);
        }
        assert_relative_eq!((fuzz_normal(n_geo, n_coat, 0.0) - n_geo).norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!((fuzz_normal(n_geo, n_coat, 1.0) - n_coat).norm(), 0.0, epsilon = 1e-12);
    }
}
