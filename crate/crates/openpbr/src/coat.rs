//! Coat layer physics: the statistical surrounding-medium IOR, the refracted
//! Fresnel blend for light bent by the coat, internal diffuse reflection
//! coefficients, the artist-controllable darkening factor, view-dependent
//! coat absorption, and the substrate roughening heuristic. The exact
//! interfaced-Lambertian model rides along as the reference oracle.

use crate::fresnel::{
    fresnel_dielectric, fresnel_hemispherical_albedo, refract_cos,
};
use crate::math::lerp;
use crate::spectra::Spectrum3;

/// Effective index ratio a base lobe sees when partially covered by a coat.
/// The covered share uses the coat-base ratio, inverted when the coat is
/// denser than the base so the ratio stays above 1 and the Fresnel math
/// never flags spurious total internal reflection.
pub fn surrounding_eta(n_b: f64, n_c: f64, n_a: f64, coat_weight: f64) -> f64 {
    let eta_bc = if n_c > n_b { n_c / n_b } else { n_b / n_c };
    lerp(n_b / n_a, eta_bc, coat_weight.clamp(0.0, 1.0))
}

/// Base-interface Fresnel for a view ray that may first refract through the
/// coat top: a presence blend of the unbent and bent evaluations. Total
/// internal reflection at the coat top removes the bent contribution.
pub fn refracted_fresnel_blend(mu_i: f64, n_a: f64, n_b: f64, n_c: f64, coat_weight: f64) -> f64 {
    let direct = fresnel_dielectric(mu_i, n_b / n_a);
    let c = coat_weight.clamp(0.0, 1.0);
    if c <= 0.0 {
        return direct;
    }
    let eta_ca = n_c / n_a;
    let bent = match refract_cos(mu_i, eta_ca) {
        Some(mu_c) => fresnel_dielectric(mu_c, n_b / n_c),
        None => 0.0,
    };
    lerp(direct, bent, c)
}

/// Internal diffuse reflection coefficient of a clear boundary: the share of
/// Lambertian interior radiance reflected back down by the top interface.
pub fn internal_reflection_k0(eta: f64) -> f64 {
    if (eta - 1.0).abs() < 1e-12 {
        return 0.0;
    }
    1.0 - (1.0 - fresnel_hemispherical_albedo(eta)) / (eta * eta)
}

/// Internal reflection coefficient of an absorbing boundary layer with
/// normal-incidence transmittance `t` per channel: interior radiance pays
/// the slanted path both ways before the Fresnel bounce.
pub fn internal_reflection_k(eta: f64, t: Spectrum3) -> Spectrum3 {
    t.map(|tc| internal_reflection_k_scalar(eta, tc))
}

fn internal_reflection_k_scalar(eta: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let t = t.min(1.0);
    // Split at the total-internal-reflection cosine where the integrand
    // kinks; below it the Fresnel factor is exactly 1.
    let mu_c = if eta > 1.0 { (1.0 - 1.0 / (eta * eta)).sqrt() } else { 0.0 };
    let (nodes, weights) = crate::math::gauss_legendre(128);
    let mut total = 0.0;
    for (&x, &w) in nodes.iter().zip(&weights) {
        let mu = 0.5 * mu_c * (x + 1.0);
        if mu > 0.0 {
            total += mu_c * w * t.powf(2.0 / mu) * mu;
        }
    }
    for (&x, &w) in nodes.iter().zip(&weights) {
        let mu = mu_c + 0.5 * (1.0 - mu_c) * (x + 1.0);
        let f_r = fresnel_dielectric(mu, 1.0 / eta);
        total += (1.0 - mu_c) * w * t.powf(2.0 / mu) * f_r * mu;
    }
    total // the leading 2 cancels the interval jacobians
}

/// Smooth-boundary internal reflection seen from one view direction.
pub fn internal_reflection_k_smooth(mu_o: f64, eta: f64) -> f64 {
    fresnel_dielectric(mu_o, eta)
}

/// Roughness proxy of the base under the coat, blending the dielectric and
/// metallic estimates by metalness. A weak dielectric specular reads as a
/// diffuse (fully rough) base.
pub fn base_roughness_estimate(
    spec_roughness: f64,
    metalness: f64,
    xi_s: f64,
    f0_s: f64,
) -> f64 {
    let r_d = lerp(1.0, spec_roughness, (xi_s * f0_s).clamp(0.0, 1.0));
    lerp(r_d, spec_roughness, metalness.clamp(0.0, 1.0))
}

/// Inputs of the coat darkening factor.
#[derive(Debug, Clone, Copy)]
pub struct CoatContext {
    /// Coat IOR relative to the ambient medium.
    pub eta_c: f64,
    /// Coat presence weight.
    pub coat_weight: f64,
    /// Artistic darkening control; 0 disables the effect entirely.
    pub darkening: f64,
    /// Normal-incidence squared transmittance of the coat medium (its color).
    pub t_square: Spectrum3,
    /// Base roughness estimate from [`base_roughness_estimate`].
    pub base_roughness: f64,
}

/// Physical darkening ratio of a base with albedo `e_b` under the coat:
/// the multi-bounce series of interior re-reflections, relative to the
/// uncovered base. 1 means no darkening.
pub fn darkening_delta(ctx: &CoatContext, mu_o: f64, e_b: Spectrum3) -> Spectrum3 {
    let k_r = internal_reflection_k0(ctx.eta_c);
    let k_s = internal_reflection_k_smooth(mu_o, ctx.eta_c);
    let k0 = lerp(k_s, k_r, ctx.base_roughness.clamp(0.0, 1.0));
    e_b.zip(ctx.t_square, |eb, t2| {
        (1.0 - k0) / (1.0 - (eb.clamp(0.0, 1.0) * k0 * t2.clamp(0.0, 1.0)).min(1.0 - 1e-12))
    })
}

/// Shipping coat attenuation at normal incidence: the darkening ratio faded
/// by the artistic control, times the coat color.
pub fn darkening_factor(ctx: &CoatContext, mu_o: f64, e_b: Spectrum3) -> Spectrum3 {
    let delta = darkening_delta(ctx, mu_o, e_b);
    delta
        .map(|d| lerp(1.0, d, ctx.darkening.clamp(0.0, 1.0)))
        .zip(ctx.t_square, |m, t2| m * t2)
}

/// Absorption of one bounce through the coat along both slanted paths.
/// Reduces to the squared transmittance (the coat color) at normal
/// incidence. Callers keep TIR directions out.
pub fn view_dependent_absorption(t: Spectrum3, mu_i: f64, mu_o: f64, eta_c: f64) -> Spectrum3 {
    let mu_ti = refract_cos(mu_i.clamp(1e-6, 1.0), eta_c).unwrap_or(1e-4);
    let mu_to = refract_cos(mu_o.clamp(1e-6, 1.0), eta_c).unwrap_or(1e-4);
    let exponent = 1.0 / mu_ti + 1.0 / mu_to;
    t.map(|tc| tc.clamp(0.0, 1.0).powf(exponent))
}

/// Substrate roughening by a rough coat: variances of the slope
/// distributions add, weighted by how much the interface bends light.
pub fn coat_roughen(r_base: f64, r_coat: f64, eta_ca: f64, coat_weight: f64) -> f64 {
    let x_c = 1.0 - eta_ca.min(1.0 / eta_ca);
    let roughened = (r_base.powi(4) + 2.0 * x_c * r_coat.powi(4)).min(1.0).powf(0.25);
    lerp(r_base, roughened, coat_weight.clamp(0.0, 1.0))
}

/// Exact BRDF of a Lambertian base of reflectance `rho_d` under a smooth
/// dielectric boundary of relative index `eta` with interior transmittance
/// `t` (reference model; the boundary's own specular reflection is not
/// included). Reciprocal by construction.
pub fn interfaced_lambertian(mu_i: f64, mu_o: f64, rho_d: f64, eta: f64, t: f64) -> f64 {
    let f_t_i = 1.0 - fresnel_dielectric(mu_i, eta);
    let f_t_o = 1.0 - fresnel_dielectric(mu_o, eta);
    let path = if t >= 1.0 {
        1.0
    } else {
        let mu_ti = refract_cos(mu_i, eta).unwrap_or(1e-4);
        let mu_to = refract_cos(mu_o, eta).unwrap_or(1e-4);
        t.powf(1.0 / mu_ti + 1.0 / mu_to)
    };
    let k = internal_reflection_k_scalar(eta, t);
    rho_d / (std::f64::consts::PI * eta * eta) * f_t_i * f_t_o * path
        / (1.0 - (rho_d * k).min(1.0 - 1e-12))
}

/// Closed-form directional albedo of [`interfaced_lambertian`] plus the
/// boundary's specular reflection, for a clear interior (`t == 1`).
pub fn interfaced_lambertian_albedo(mu_o: f64, rho_d: f64, eta: f64) -> f64 {
    let f_r = fresnel_dielectric(mu_o, eta);
    let f_t = 1.0 - f_r;
    let e_f = fresnel_hemispherical_albedo(eta);
    let k = internal_reflection_k_scalar(eta, 1.0);
    f_r + (rho_d / (eta * eta)) * f_t * (1.0 - e_f) / (1.0 - (rho_d * k).min(1.0 - 1e-12))
}

/// Total reflectance of a Lambertian base under a smooth absorbing layer by
/// geometric-series summation: `f_r` is the top reflection, `c_abs` the
/// round-trip absorption, `rho_b` the base albedo.
pub fn smooth_base_darkened_albedo(
    f_r: Spectrum3,
    c_abs: Spectrum3,
    rho_b: Spectrum3,
) -> Spectrum3 {
    let mut out = Spectrum3::ZERO;
    for k in 0..3 {
        let fr = f_r[k].clamp(0.0, 1.0);
        let ft = 1.0 - fr;
        let cb = (c_abs[k] * rho_b[k]).clamp(0.0, 1.0);
        out.c[k] = fr + ft * ft * cb / (1.0 - (fr * cb).min(1.0 - 1e-12));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::gauss_legendre;
    use approx::assert_relative_eq;

    #[test]
    fn surrounding_eta_branches() {
        assert_relative_eq!(surrounding_eta(1.5, 1.6, 1.0, 0.0), 1.5, epsilon = 1e-12);
        // Denser coat inverts the ratio.
        assert_relative_eq!(surrounding_eta(1.5, 1.6, 1.0, 1.0), 1.6 / 1.5, epsilon = 1e-12);
        // Thinner coat keeps base-over-coat.
        assert_relative_eq!(surrounding_eta(1.5, 1.3, 1.0, 1.0), 1.5 / 1.3, epsilon = 1e-12);
    }

    #[test]
    fn refracted_blend_cases() {
        let direct = fresnel_dielectric(0.4, 1.5);
        assert_relative_eq!(
            refracted_fresnel_blend(0.4, 1.0, 1.5, 1.6, 0.0),
            direct,
            epsilon = 1e-12
        );
        // No bending when the coat matches the ambient index.
        assert_relative_eq!(
            refracted_fresnel_blend(0.4, 1.0, 1.5, 1.0, 0.7),
            direct,
            epsilon = 1e-12
        );
        // Parallel smooth boundaries cannot reach TIR at the base.
        let f = refracted_fresnel_blend(0.3, 1.0, 1.5, 1.6, 1.0);
        assert!(f < 1.0 && f > 0.0, "f={f}");
    }

    #[test]
    fn internal_reflection_limits() {
        for t in [Spectrum3::splat(0.3), Spectrum3::ONE] {
            let k = internal_reflection_k(1.0, t);
            for c in 0..3 {
                assert!(k[c].abs() < 1e-9);
            }
        }
        let k_dark = internal_reflection_k(1.5, Spectrum3::ZERO);
        assert!(k_dark[0].abs() < 1e-12);
        // Clear-layer quadrature agrees with the closed form.
        let k_clear = internal_reflection_k_scalar(1.5, 1.0);
        assert!((k_clear - internal_reflection_k0(1.5)).abs() < 1e-5);
        // More absorption, less internal bounce.
        assert!(internal_reflection_k_scalar(1.5, 0.5) < k_clear);
    }

    #[test]
    fn darkening_factor_contract() {
        let ctx = CoatContext {
            eta_c: 1.6,
            coat_weight: 1.0,
            darkening: 0.0,
            t_square: Spectrum3::splat(0.7),
            base_roughness: 0.5,
        };
        let f = darkening_factor(&ctx, 0.8, Spectrum3::splat(0.6));
        for k in 0..3 {
            assert_relative_eq!(f[k], 0.7, epsilon = 1e-12);
        }
        let unity = CoatContext { eta_c: 1.0, darkening: 1.0, ..ctx };
        let f1 = darkening_factor(&unity, 0.8, Spectrum3::splat(0.6));
        for k in 0..3 {
            assert_relative_eq!(f1[k], 0.7, epsilon = 1e-9);
        }
        // Rough clear coat over a Lambertian base reproduces the series sum.
        let rough = CoatContext {
            eta_c: 1.5,
            coat_weight: 1.0,
            darkening: 1.0,
            t_square: Spectrum3::ONE,
            base_roughness: 1.0,
        };
        let delta = darkening_delta(&rough, 1.0, Spectrum3::splat(0.8));
        let k0 = internal_reflection_k0(1.5);
        assert_relative_eq!(delta[0], (1.0 - k0) / (1.0 - 0.8 * k0), epsilon = 1e-12);
    }

    #[test]
    fn darkening_monotone_in_control() {
        let ctx = |delta: f64| CoatContext {
            eta_c: 1.5,
            coat_weight: 1.0,
            darkening: delta,
            t_square: Spectrum3::splat(0.9),
            base_roughness: 0.8,
        };
        let mut last = f64::INFINITY;
        for i in 0..=10 {
            let d = i as f64 / 10.0;
            let f = darkening_factor(&ctx(d), 0.9, Spectrum3::splat(0.7))[0];
            assert!(f <= last + 1e-15, "not nonincreasing at delta={d}");
            last = f;
        }
    }

    #[test]
    fn smooth_base_darkens_less_than_rough_base() {
        // At normal view the smooth internal reflection is weaker, so the
        // smooth-base darkening ratio sits closer to 1.
        for eta in [1.3, 1.5, 1.8] {
            let mk = |r_b: f64| CoatContext {
                eta_c: eta,
                coat_weight: 1.0,
                darkening: 1.0,
                t_square: Spectrum3::ONE,
                base_roughness: r_b,
            };
            let e_b = Spectrum3::splat(0.7);
            let smooth = darkening_delta(&mk(0.0), 1.0, e_b)[0];
            let rough = darkening_delta(&mk(1.0), 1.0, e_b)[0];
            assert!(smooth >= rough, "eta={eta} smooth={smooth} rough={rough}");
        }
    }

    #[test]
    fn absorption_path_lengths() {
        let t = Spectrum3::splat(0.8);
        let normal = view_dependent_absorption(t, 1.0, 1.0, 1.5);
        for k in 0..3 {
            assert_relative_eq!(normal[k], 0.64, epsilon = 1e-12);
        }
        let clear = view_dependent_absorption(Spectrum3::ONE, 0.3, 0.9, 1.5);
        for k in 0..3 {
            assert_relative_eq!(clear[k], 1.0, epsilon = 1e-12);
        }
        let grazing = view_dependent_absorption(t, 1.0, 0.2, 1.5);
        assert!(grazing[0] < 0.64, "grazing path must darken: {}", grazing[0]);
    }

    #[test]
    fn roughening_heuristic() {
        assert_relative_eq!(coat_roughen(0.3, 0.8, 1.0, 1.0), 0.3, epsilon = 1e-12);
        assert_relative_eq!(coat_roughen(0.3, 0.0, 1.6, 1.0), 0.3, epsilon = 1e-12);
        let expected = (2.0 * (1.0 - 1.0 / 1.6f64)).powf(0.25);
        assert_relative_eq!(coat_roughen(0.0, 1.0, 1.6, 1.0), expected, epsilon = 1e-12);
        // Presence fades the effect linearly.
        let half = coat_roughen(0.0, 1.0, 1.6, 0.5);
        assert_relative_eq!(half, 0.5 * expected, epsilon = 1e-12);
    }

    fn lambertian_quadrature_albedo(mu_o: f64, rho_d: f64, eta: f64, t: f64) -> f64 {
        let (nodes, weights) = gauss_legendre(128);
        let mut total = 0.0;
        for (&x, &w) in nodes.iter().zip(&weights) {
            let mu = 0.5 * (x + 1.0);
            total +=
                w * std::f64::consts::PI * interfaced_lambertian(mu, mu_o, rho_d, eta, t) * mu;
        }
        total
    }

    #[test]
    fn interfaced_lambertian_reference() {
        // Index-matched clear boundary is plain Lambert.
        assert_relative_eq!(
            interfaced_lambertian(0.6, 0.9, 0.5, 1.0, 1.0),
            0.5 / std::f64::consts::PI,
            epsilon = 1e-9
        );
        // Reciprocity is structural.
        for (mi, mo) in [(0.2, 0.9), (0.55, 0.31), (1.0, 0.07)] {
            assert_relative_eq!(
                interfaced_lambertian(mi, mo, 0.7, 1.5, 0.8),
                interfaced_lambertian(mo, mi, 0.7, 1.5, 0.8),
                epsilon = 1e-15
            );
        }
        // White base under a clear boundary loses nothing in total.
        for mu_o in [0.25, 0.6, 1.0] {
            let total = fresnel_dielectric(mu_o, 1.5)
                + lambertian_quadrature_albedo(mu_o, 1.0, 1.5, 1.0);
            assert!((total - 1.0).abs() < 1e-3, "mu_o={mu_o} total={total}");
        }
        // Quadrature albedo matches the closed form.
        for (mu_o, rho) in [(1.0, 0.5), (0.45, 0.8)] {
            let quad =
                fresnel_dielectric(mu_o, 1.5) + lambertian_quadrature_albedo(mu_o, rho, 1.5, 1.0);
            let closed = interfaced_lambertian_albedo(mu_o, rho, 1.5);
            assert!((quad - closed).abs() < 1e-4, "quad={quad} closed={closed}");
        }
        // Bounded by 1 across a parameter grid.
        for rho in [0.3, 0.7, 1.0] {
            for eta in [1.2, 1.5, 2.0] {
                for t in [0.6, 1.0] {
                    for mu_o in [0.3, 0.8] {
                        let total = fresnel_dielectric(mu_o, eta)
                            + lambertian_quadrature_albedo(mu_o, rho, eta, t);
                        assert!(total <= 1.0 + 1e-3, "rho={rho} eta={eta} t={t} => {total}");
                    }
                }
            }
        }
    }

    #[test]
    fn geometric_series_albedo() {
        let f04 = Spectrum3::splat(0.04);
        assert_relative_eq!(
            smooth_base_darkened_albedo(f04, Spectrum3::ONE, Spectrum3::ZERO)[0],
            0.04,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            smooth_base_darkened_albedo(f04, Spectrum3::ONE, Spectrum3::ONE)[0],
            1.0,
            epsilon = 1e-12
        );
        let r = smooth_base_darkened_albedo(f04, Spectrum3::ONE, Spectrum3::splat(0.9))[0];
        assert_relative_eq!(r, 0.04 + 0.9216 * 0.9 / (1.0 - 0.036), epsilon = 1e-12);
        // Independent series summation oracle, term by term.
        let mut series = 0.04;
        let mut bounce = 0.96 * 0.9;
        for _ in 0..200 {
            series += bounce * 0.96;
            bounce *= 0.04 * 0.9;
        }
        assert_relative_eq!(r, series, epsilon = 1e-12);
    }
}
