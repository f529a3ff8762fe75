//! Dielectric and conductor Fresnel factors, the reflection-weight IOR
//! modulation with Stokes-consistent total-internal-reflection handling, and
//! hemispherical Fresnel albedos.

use crate::math::integrate;
use crate::spectra::Spectrum3;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FresnelError {
    #[error("ior {0} outside the albedo fit range [1, 3]")]
    OutOfFitRange(f64),
}

/// Cosine of the refracted direction, or `None` on total internal reflection.
/// `eta_ti` is the transmitted-over-incident index ratio.
pub fn refract_cos(mu_i: f64, eta_ti: f64) -> Option<f64> {
    let s = 1.0 - (1.0 - mu_i * mu_i) / (eta_ti * eta_ti);
    (s > 0.0).then(|| s.sqrt())
}

/// Reflectance of a flat interface at normal incidence.
pub fn normal_incidence_reflectance(eta: f64) -> f64 {
    let r = (eta - 1.0) / (eta + 1.0);
    r * r
}

/// Unpolarized (power-averaged) dielectric Fresnel reflectance.
pub fn fresnel_dielectric(mu_i: f64, eta_ti: f64) -> f64 {
    match refract_cos(mu_i, eta_ti) {
        None => 1.0,
        Some(mu_t) => {
            let r_s = (mu_i - eta_ti * mu_t) / (mu_i + eta_ti * mu_t);
            let r_p = (eta_ti * mu_i - mu_t) / (eta_ti * mu_i + mu_t);
            0.5 * (r_s * r_s + r_p * r_p)
        }
    }
}

/// Remaps the index ratio so that normal-incidence reflectance scales by
/// `xi_s`, capped at mirror reflectance. The sign of `eta - 1` is preserved.
pub fn modulated_eta(eta_ti: f64, xi_s: f64) -> f64 {
    let f0 = normal_incidence_reflectance(eta_ti);
    let eps = (xi_s * f0).min(1.0).sqrt().min(1.0 - 1e-9).copysign(eta_ti - 1.0);
    (1.0 + eps) / (1.0 - eps)
}

/// Fresnel evaluation at one interface: reflectance plus the refracted
/// cosine, which is `None` under total internal reflection (then `f == 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelResult {
    pub f: f64,
    pub mu_t: Option<f64>,
}

/// Weighted specular reflectance. The Fresnel factor responds to the
/// modulated index while the refraction geometry keeps the physical one, and
/// rays inside the total-internal-reflection cone stay at reflectance 1.
pub fn specular_reflectance(mu_i: f64, eta_ti: f64, xi_s: f64) -> FresnelResult {
    let eta_mod = modulated_eta(eta_ti, xi_s);
    if eta_ti >= 1.0 {
        let f = fresnel_dielectric(mu_i, eta_mod);
        FresnelResult { f, mu_t: refract_cos(mu_i, eta_ti) }
    } else {
        match refract_cos(mu_i, eta_ti) {
            None => FresnelResult { f: 1.0, mu_t: None },
            // Stokes relation: evaluate from the far side of the interface,
            // where the modulated ratio is above 1 and TIR cannot occur.
            Some(mu_t) => FresnelResult {
                f: fresnel_dielectric(mu_t, 1.0 / eta_mod),
                mu_t: Some(mu_t),
            },
        }
    }
}

/// Hemispherical albedo of the dielectric Fresnel factor, `2 int F mu dmu`,
/// by quadrature. Below index 1 the variable change `u = eta * mu_t` removes
/// the square-root kink at the critical angle, keeping the rule spectral.
pub fn fresnel_hemispherical_albedo(eta: f64) -> f64 {
    if (eta - 1.0).abs() < 1e-12 {
        return 0.0;
    }
    if eta >= 1.0 {
        2.0 * integrate(64, 0.0, 1.0, |mu| fresnel_dielectric(mu, eta) * mu)
    } else {
        let mu_c2 = 1.0 - eta * eta;
        // mu = sqrt(mu_c^2 + u^2), mu dmu = u du, u in [0, eta].
        mu_c2
            + 2.0
                * integrate(64, 0.0, eta, |u| {
                    fresnel_dielectric((mu_c2 + u * u).sqrt(), eta) * u
                })
    }
}

/// Log-rational closed-form fit of the hemispherical Fresnel albedo,
/// accurate to about 0.0015 absolute on `eta` in [1, 3].
pub fn fresnel_hemispherical_albedo_fit(eta: f64) -> Result<f64, FresnelError> {
    if !(1.0..=3.0).contains(&eta) {
        return Err(FresnelError::OutOfFitRange(eta));
    }
    Ok(((10893.0 * eta - 1438.2) / (-774.4 * eta * eta + 10212.0 * eta + 1.0)).ln())
}

/// Schlick reflectance curve per channel.
pub fn schlick(mu: f64, f0: Spectrum3) -> Spectrum3 {
    let w = (1.0 - mu).powi(5);
    f0.map(|f| f + (1.0 - f) * w)
}

/// Cosine at which the tinted conductor curve is pinned.
const MU_BAR: f64 = 1.0 / 7.0;

/// Correction-term coefficient of the tinted conductor Fresnel.
fn f82_b(f0: Spectrum3, tint: Spectrum3) -> Spectrum3 {
    let denom = MU_BAR * (1.0 - MU_BAR).powi(6);
    let pinned = schlick(MU_BAR, f0);
    (Spectrum3::ONE - tint) * pinned / denom
}

/// Tinted conductor Fresnel before the weight scale and clamp.
pub fn f82_unclamped(mu: f64, f0: Spectrum3, tint: Spectrum3) -> Spectrum3 {
    schlick(mu, f0) - f82_b(f0, tint) * (mu * (1.0 - mu).powi(6))
}

/// Conductor Fresnel: Schlick base pinned to `tint * Schlick` near grazing,
/// scaled by the reflection weight and clamped to physical range.
pub fn f82_fresnel(mu: f64, f0: Spectrum3, tint: Spectrum3, xi_s: f64) -> Spectrum3 {
    (f82_unclamped(mu, f0, tint) * xi_s).clamp(0.0, 1.0)
}

/// Closed-form hemispherical average of the unclamped conductor Fresnel.
pub fn f82_average_albedo(f0: Spectrum3, tint: Spectrum3) -> Spectrum3 {
    let b = f82_b(f0, tint);
    f0 + (Spectrum3::ONE - f0) * (1.0 / 21.0) - b * (1.0 / 126.0)
}
