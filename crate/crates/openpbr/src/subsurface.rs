//! Subsurface parameterization: mean-free-path to extinction mapping and the
//! multi-scatter to single-scatter albedo inversions (a diffusion-era
//! rational fit and a production exponential fit), plus the similarity
//! relations that fold scattering anisotropy into an equivalent isotropic
//! medium.

use crate::spectra::Spectrum3;

/// Homogeneous participating-medium coefficients, per channel, in units of
/// inverse length. `mu_t == mu_a + mu_s` holds componentwise; a channel of
/// `mu_t == +inf` marks the dense limit where the caller should fall back to
/// an opaque diffuse surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumCoefficients {
    pub mu_a: Spectrum3,
    pub mu_s: Spectrum3,
    pub mu_t: Spectrum3,
    /// Mean scattering cosine in [-0.99, 0.99].
    pub g: f64,
    /// Refractive index of the embedding boundary.
    pub ior: f64,
}

/// Which single-scatter albedo inversion drives the medium derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlbedoInversion {
    /// Exponential fit calibrated against an IOR-1.4 boundary; the default.
    #[default]
    Hyperion,
    /// Index-matched rational fit; pairs with the random-walk oracle.
    VanDeHulst,
}

/// Total half-space reflectance of an isotropically scattering medium with
/// similarity variable `s = sqrt(1 - alpha)`.
pub fn vdh_multiscatter(s: f64) -> f64 {
    (1.0 - s) * (1.0 - 0.139 * s) / (1.0 + 1.17 * s)
}

/// Inverse of [`vdh_multiscatter`]: similarity variable from a target
/// reflectance, accurate to under a percent across [0,1].
pub fn vdh_invert(c: f64) -> f64 {
    let s = 4.09712 + 4.20863 * c - (9.59217 + 41.6808 * c + 17.7126 * c * c).sqrt();
    s.clamp(0.0, 1.0)
}

/// Isotropic single-scatter albedo that reproduces reflectance `c` under an
/// index-matched boundary.
pub fn vdh_single_scatter_albedo(c: f64) -> f64 {
    let s = vdh_invert(c);
    (1.0 - s * s).clamp(0.0, 1.0)
}

/// Isotropic single-scatter albedo that reproduces reflectance `c` under a
/// refractive boundary of index 1.4, per the production exponential fit.
pub fn hyperion_invert(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    (1.0 - (-11.43 * c + 15.38 * c * c - 13.91 * c * c * c).exp()).clamp(0.0, 1.0)
}

/// Anisotropic single-scatter albedo with the same multiple-scattering
/// behavior as an isotropic medium of albedo `alpha_star`.
pub fn anisotropic_albedo(alpha_star: f64, g: f64) -> f64 {
    alpha_star / (1.0 - g * (1.0 - alpha_star))
}

/// Similarity remap of the scattering coefficient onto a different phase
/// anisotropy; preserves `mu_s * (1 - g)` exactly, absorption untouched.
pub fn similarity_remap(mu_s: Spectrum3, g: f64, g_target: f64) -> Spectrum3 {
    mu_s * ((1.0 - g) / (1.0 - g_target))
}

/// Derives medium coefficients from the artist-facing subsurface controls.
/// `radius` scaled per channel gives the mean free path; its reciprocal is
/// the extinction (infinite in zero-radius channels). The color inversion
/// then splits extinction into scattering and absorption.
pub fn subsurface_medium(
    radius: f64,
    radius_scale: Spectrum3,
    color: Spectrum3,
    anisotropy: f64,
    ior: f64,
    inversion: AlbedoInversion,
) -> MediumCoefficients {
    let g = anisotropy.clamp(-0.99, 0.99);
    let mu_t = radius_scale.map(|s| {
        let r = radius * s.max(0.0);
        if r > 0.0 { 1.0 / r } else { f64::INFINITY }
    });
    let alpha = color.map(|c| {
        let alpha_star = match inversion {
            AlbedoInversion::Hyperion => hyperion_invert(c),
            AlbedoInversion::VanDeHulst => vdh_single_scatter_albedo(c),
        };
        anisotropic_albedo(alpha_star, g).clamp(0.0, 1.0)
    });
    let mu_s = mu_t.zip(alpha, |t, a| if t.is_finite() { t * a } else { f64::INFINITY });
    let mu_a = mu_t.zip(mu_s, |t, s| if t.is_finite() { (t - s).max(0.0) } else { f64::INFINITY });
    MediumCoefficients { mu_a, mu_s, mu_t, g, ior }
}
