//! Transmissive-volume derivation: Beer extinction from a target tint at a
//! given depth, a directly authored scattering coefficient with a gray shift
//! to keep absorption physical, and the Henyey-Greenstein phase function.

use crate::spectra::Spectrum3;
use crate::subsurface::MediumCoefficients;
use rand::Rng;
use std::f64::consts::PI;

/// Extinction cap standing in for a fully opaque channel (tint exactly 0).
pub const CHANNEL_KILL_EXTINCTION: f64 = 1e7;

/// How the transmission controls act on the refraction lobe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransmissionMedium {
    /// Zero depth: no volume at all, the tint multiplies refraction directly.
    TintOnly(Spectrum3),
    /// Positive depth: a homogeneous interior medium.
    Medium(MediumCoefficients),
}

/// Derives the interior medium from the artist-facing transmission controls.
/// The tint is what white light should become after traveling `depth`; the
/// scatter coefficient is authored directly in units of 1/depth. If that
/// combination implies negative absorption somewhere, every channel shifts
/// up by the same gray amount so the minimum lands at zero.
pub fn transmission_medium(
    color: Spectrum3,
    depth: f64,
    scatter: Spectrum3,
    scatter_anisotropy: f64,
    ior: f64,
) -> TransmissionMedium {
    if depth <= 0.0 {
        return TransmissionMedium::TintOnly(color);
    }
    let mu_t = color.map(|t| {
        if t > 0.0 {
            (-t.min(1.0).ln() / depth).min(CHANNEL_KILL_EXTINCTION)
        } else {
            CHANNEL_KILL_EXTINCTION
        }
    });
    let mu_s = scatter.map(|s| s.max(0.0) / depth);
    let mut mu_a = mu_t - mu_s;
    let lowest = mu_a.min_component();
    if lowest < 0.0 {
        mu_a = mu_a.map(|a| a - lowest);
    }
    let mu_t = mu_a + mu_s;
    TransmissionMedium::Medium(MediumCoefficients {
        mu_a,
        mu_s,
        mu_t,
        g: scatter_anisotropy.clamp(-0.99, 0.99),
        ior,
    })
}

/// Henyey-Greenstein phase density over the sphere for a scattering cosine.
pub fn hg_phase_eval(g: f64, cos_theta: f64) -> f64 {
    let denom = 1.0 + g * g - 2.0 * g * cos_theta;
    (1.0 - g * g) / (4.0 * PI * denom.max(1e-12) * denom.max(1e-12).sqrt())
}

/// Samples a scattering cosine from the Henyey-Greenstein distribution.
pub fn hg_sample(g: f64, rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random();
    if g.abs() < 1e-4 {
        return 1.0 - 2.0 * u;
    }
    let sq = (1.0 - g * g) / (1.0 + g - 2.0 * g * u);
    ((1.0 + g * g - sq * sq) / (2.0 * g)).clamp(-1.0, 1.0)
}
