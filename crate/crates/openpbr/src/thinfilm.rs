//! Thin-film interference from first principles: complex Snell cosines,
//! amplitude Fresnel coefficients per polarization, reverse-direction
//! symmetry, round-trip phase, and the Airy summation of the infinite
//! bounce series, averaged over polarization. Also the bridge that turns an
//! artistic normal-incidence reflectance into an effective complex index.

use crate::spectra::{Complex64, Spectrum3};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ThinFilmError {
    #[error("transmittance is undefined for an absorbing substrate")]
    ConductorSubstrate,
}

/// One film configuration at a single wavelength and incidence angle.
/// Media are numbered 1 (ambient), 2 (film), 3 (substrate).
#[derive(Debug, Clone, Copy)]
pub struct FilmStack {
    pub n1: f64,
    pub n2: f64,
    pub n3: Complex64,
    pub thickness_nm: f64,
    pub lambda_nm: f64,
    pub cos_theta1: f64,
}

/// Amplitude coefficients of one interface, per polarization.
#[derive(Debug, Clone, Copy)]
pub struct Amplitudes {
    pub r_s: Complex64,
    pub r_p: Complex64,
    pub t_s: Complex64,
    pub t_p: Complex64,
}

/// Propagation cosine in medium `n_j` for light arriving from a real medium
/// `n_i` at real incidence cosine, on the branch with `Im(n_j cos) >= 0`
/// (decay into the medium). Real media beyond the critical angle come out
/// purely imaginary (evanescent).
pub fn snell_cos(n_i: f64, n_j: Complex64, cos_theta_i: f64) -> Complex64 {
    let sin2_i = (1.0 - cos_theta_i * cos_theta_i).max(0.0);
    let ratio = Complex64::new(n_i, 0.0) / n_j;
    let w = Complex64::new(1.0, 0.0) - ratio * ratio * sin2_i;
    let mut c = w.sqrt();
    if (n_j * c).im < 0.0 {
        c = -c;
    }
    c
}

/// Amplitude reflection/transmission coefficients for one interface.
/// Inputs may be complex; incidence from a real medium keeps the power
/// identities below exact.
pub fn fresnel_amplitudes(
    n_i: Complex64,
    n_j: Complex64,
    cos_i: Complex64,
    cos_j: Complex64,
) -> Amplitudes {
    let a = n_i * cos_i;
    let b = n_j * cos_j;
    let u = n_j * cos_i;
    let v = n_i * cos_j;
    Amplitudes {
        r_s: (a - b) / (a + b),
        t_s: 2.0 * a / (a + b),
        r_p: (u - v) / (u + v),
        t_p: 2.0 * a / (u + v),
    }
}

/// Power reflectance/transmittance of one interface per polarization.
/// The transmitted prefactors are `Re(n_j cos_j / (n_i cos_i))` for s and
/// `Re(n_j cos_j^* / (n_i cos_i))` for p, which close `R + T == 1` exactly
/// for incidence from a real medium.
pub fn interface_powers(
    n_i: Complex64,
    n_j: Complex64,
    cos_i: Complex64,
    cos_j: Complex64,
) -> ((f64, f64), (f64, f64)) {
    let amp = fresnel_amplitudes(n_i, n_j, cos_i, cos_j);
    let base = n_i * cos_i;
    let pre_s = (n_j * cos_j / base).re;
    let pre_p = (n_j * cos_j.conj() / base).re;
    let r_s = amp.r_s.norm_sqr();
    let r_p = amp.r_p.norm_sqr();
    ((r_s, pre_s * amp.t_s.norm_sqr()), (r_p, pre_p * amp.t_p.norm_sqr()))
}

/// Reverse-direction amplitudes from the forward ones: `r21 == -r12` and
/// `t21 == t12 * (n2 cos2)/(n1 cos1)` per polarization.
pub fn reverse_amplitudes(
    forward: &Amplitudes,
    n1: Complex64,
    n2: Complex64,
    cos1: Complex64,
    cos2: Complex64,
) -> Amplitudes {
    let ratio = (n2 * cos2) / (n1 * cos1);
    Amplitudes {
        r_s: -forward.r_s,
        r_p: -forward.r_p,
        t_s: forward.t_s * ratio,
        t_p: forward.t_p * ratio,
    }
}

const DENOM_EPS: f64 = 1e-9;

fn airy_polarization(
    r12: Complex64,
    t12: Complex64,
    r21: Complex64,
    t21: Complex64,
    r23: Complex64,
    phase: Complex64,
) -> f64 {
    let mut denom = Complex64::new(1.0, 0.0) - r21 * r23 * phase;
    if denom.norm() < DENOM_EPS {
        denom = Complex64::new(DENOM_EPS, 0.0);
    }
    let r_tot = r12 + t12 * r23 * t21 * phase / denom;
    r_tot.norm_sqr()
}

/// Unpolarized reflectance of the film stack by Airy summation. Total
/// internal reflection at the top interface short-circuits to 1.
pub fn airy_reflectance(stack: &FilmStack) -> f64 {
    let c1 = Complex64::new(stack.cos_theta1.clamp(1e-9, 1.0), 0.0);
    let n1 = Complex64::new(stack.n1, 0.0);
    let n2 = Complex64::new(stack.n2, 0.0);
    let sin1 = (1.0 - c1.re * c1.re).max(0.0).sqrt();
    if stack.n1 * sin1 >= stack.n2 {
        return 1.0;
    }
    let c2 = snell_cos(stack.n1, n2, c1.re);
    let c3 = snell_cos(stack.n1, stack.n3, c1.re);
    let fwd = fresnel_amplitudes(n1, n2, c1, c2);
    let rev = reverse_amplitudes(&fwd, n1, n2, c1, c2);
    let down = fresnel_amplitudes(n2, stack.n3, c2, c3);
    let delta = 4.0 * std::f64::consts::PI * stack.n2 * stack.thickness_nm * c2.re
        / stack.lambda_nm;
    let phase = Complex64::from_polar(1.0, delta);
    let r_s = airy_polarization(fwd.r_s, fwd.t_s, rev.r_s, rev.t_s, down.r_s, phase);
    let r_p = airy_polarization(fwd.r_p, fwd.t_p, rev.r_p, rev.t_p, down.r_p, phase);
    (0.5 * (r_s + r_p)).clamp(0.0, 1.0)
}

/// Unpolarized transmittance through the stack; defined only when the
/// substrate absorbs nothing, where the film merely redistributes energy.
pub fn airy_transmittance(stack: &FilmStack) -> Result<f64, ThinFilmError> {
    if stack.n3.im > 0.0 {
        return Err(ThinFilmError::ConductorSubstrate);
    }
    Ok(1.0 - airy_reflectance(stack))
}

/// Effective substrate index reproducing a normal-incidence reflectance.
/// Indices from this mapping are real; channels are treated independently.
pub fn effective_complex_ior(f0: Spectrum3) -> [Complex64; 3] {
    let mut out = [Complex64::new(1.0, 0.0); 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let root = f0[k].clamp(0.0, 1.0 - 1e-6).sqrt();
        *slot = Complex64::new((1.0 + root) / (1.0 - root), 0.0);
    }
    out
}

/// Per-channel reflectance of one film over a fixed substrate, each channel
/// evaluated at its own wavelength.
pub fn film_reflectance_spectrum(
    n1: f64,
    n2: f64,
    n3: [Complex64; 3],
    thickness_nm: f64,
    cos_theta1: f64,
    lambdas_nm: [f64; 3],
) -> Spectrum3 {
    let mut out = Spectrum3::ZERO;
    for k in 0..3 {
        let stack = FilmStack {
            n1,
            n2,
            n3: n3[k],
            thickness_nm,
            lambda_nm: lambdas_nm[k],
            cos_theta1,
        };
        out.c[k] = airy_reflectance(&stack);
    }
    out
}
