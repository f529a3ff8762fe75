//! CSV emitters for the model's characteristic curves. Each kind writes a
//! header row plus one row per sample point, values in `%.8e` so digits
//! survive a round trip through plotting tools.

use crate::coat::{darkening_delta, CoatContext};
use crate::fresnel::fresnel_dielectric;
use crate::microfacet::{roughness_to_alphas, DielectricLobe};
use crate::spectra::Spectrum3;
use crate::subsurface::{
    hyperion_invert, vdh_invert, vdh_multiscatter, vdh_single_scatter_albedo,
};
use crate::thinfilm::film_reflectance_spectrum;
use num_complex::Complex64;
use std::io;
use std::io::Write;

/// Curve families the harness can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// Film reflectance vs incidence angle at one wavelength.
    ThinfilmAngle,
    /// Film reflectance vs wavelength at normal incidence.
    ThinfilmSpectrum,
    /// Base darkening ratio under a clear coat vs base albedo.
    CoatDarkening,
    /// Single-scattering albedo inversions vs target multi-scatter albedo.
    SssInversion,
    /// Dielectric directional albedo vs view cosine, bare Fresnel and
    /// compensated rough lobes.
    FresnelE,
}

impl CurveKind {
    pub const ALL: [CurveKind; 5] = [
        CurveKind::ThinfilmAngle,
        CurveKind::ThinfilmSpectrum,
        CurveKind::CoatDarkening,
        CurveKind::SssInversion,
        CurveKind::FresnelE,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CurveKind::ThinfilmAngle => "thinfilm-angle",
            CurveKind::ThinfilmSpectrum => "thinfilm-spectrum",
            CurveKind::CoatDarkening => "coat-darkening",
            CurveKind::SssInversion => "sss-inversion",
            CurveKind::FresnelE => "fresnel-e",
        }
    }

    pub fn parse(s: &str) -> Option<CurveKind> {
        CurveKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Reference stack for the film curves: air over a 1.4 film on a metal-like
/// absorbing substrate.
const FILM_N1: f64 = 1.0;
const FILM_N2: f64 = 1.4;
const FILM_N3: Complex64 = Complex64::new(1.8, 5.0);

fn film_r(thickness_nm: f64, cos1: f64, lambda_nm: f64) -> f64 {
    film_reflectance_spectrum(
        FILM_N1,
        FILM_N2,
        [FILM_N3; 3],
        thickness_nm,
        cos1,
        [lambda_nm; 3],
    )[0]
}

fn thinfilm_angle(out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "theta_deg,cos_theta,reflectance")?;
    for deg in 0..=89 {
        let theta = (deg as f64).to_radians();
        let mu = theta.cos();
        writeln!(out, "{deg},{:.8e},{:.8e}", mu, film_r(400.0, mu, 500.0))?;
    }
    Ok(())
}

fn thinfilm_spectrum(out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "lambda_nm,reflectance")?;
    let mut lambda = 400;
    while lambda <= 700 {
        writeln!(out, "{lambda},{:.8e}", film_r(400.0, 1.0, lambda as f64))?;
        lambda += 2;
    }
    Ok(())
}

fn coat_darkening(out: &mut impl Write) -> io::Result<()> {
    let etas = [1.25, 1.5, 2.0];
    writeln!(out, "base_albedo,delta_eta_1.25,delta_eta_1.5,delta_eta_2.0")?;
    for i in 0..=50 {
        let rho = i as f64 * 0.02;
        write!(out, "{:.8e}", rho)?;
        for eta in etas {
            let ctx = CoatContext {
                eta_c: eta,
                coat_weight: 1.0,
                darkening: 1.0,
                t_square: Spectrum3::ONE,
                base_roughness: 1.0,
            };
            let delta = darkening_delta(&ctx, 1.0, Spectrum3::splat(rho));
            write!(out, ",{:.8e}", delta[0])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn sss_inversion(out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "albedo,alpha_vdh,alpha_hyperion,roundtrip_vdh")?;
    for i in 0..=100 {
        let c = i as f64 * 0.01;
        writeln!(
            out,
            "{:.8e},{:.8e},{:.8e},{:.8e}",
            c,
            vdh_single_scatter_albedo(c),
            hyperion_invert(c),
            vdh_multiscatter(vdh_invert(c)),
        )?;
    }
    Ok(())
}

fn fresnel_e(out: &mut impl Write) -> io::Result<()> {
    let roughnesses = [0.25, 0.5, 1.0];
    let lobes: Vec<DielectricLobe> = roughnesses
        .iter()
        .map(|&r| DielectricLobe::new(roughness_to_alphas(r, 0.0), 1.5, Spectrum3::ONE))
        .collect();
    writeln!(out, "mu,fresnel,albedo_r_0.25,albedo_r_0.5,albedo_r_1.0")?;
    for i in 1..=100 {
        let mu = i as f64 * 0.01;
        write!(out, "{:.8e},{:.8e}", mu, fresnel_dielectric(mu, 1.5))?;
        for lobe in &lobes {
            write!(out, ",{:.8e}", lobe.reflection_albedo(mu)[0])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes the chosen curve family as CSV.
pub fn emit_curves(kind: CurveKind, out: &mut impl Write) -> io::Result<()> {
    match kind {
        CurveKind::ThinfilmAngle => thinfilm_angle(out),
        CurveKind::ThinfilmSpectrum => thinfilm_spectrum(out),
        CurveKind::CoatDarkening => coat_darkening(out),
        CurveKind::SssInversion => sss_inversion(out),
        CurveKind::FresnelE => fresnel_e(out),
    }
}
