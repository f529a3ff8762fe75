//! Three-channel color values tagged with nominal wavelengths, complex
//! arithmetic for wave-optics code, and chromatic dispersion via the Cauchy
//! empirical formula driven by an Abbe number.

use rand::Rng;
use std::ops::{Add, AddAssign, Div, Index, Mul, MulAssign, Neg, Sub};

pub use num_complex::Complex64;

/// Nominal wavelengths of the three rendering channels, in nm, R to B.
pub const CHANNEL_WAVELENGTHS_NM: [f64; 3] = [650.0, 550.0, 450.0];

/// Half-width of each channel's assumed sensitivity band, in nm.
pub const CHANNEL_HALF_WIDTH_NM: f64 = 60.0;

/// A color or spectral triple. `c` holds the channel values; `lambda` holds
/// the wavelength each channel currently stands for. Componentwise arithmetic
/// keeps the left operand's wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum3 {
    pub c: [f64; 3],
    pub lambda: [f64; 3],
}

impl Default for Spectrum3 {
    fn default() -> Self {
        Self::splat(0.0)
    }
}

impl Spectrum3 {
    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Spectrum3 { c: [r, g, b], lambda: CHANNEL_WAVELENGTHS_NM }
    }

    pub const fn splat(v: f64) -> Self {
        Self::new(v, v, v)
    }

    pub const ZERO: Spectrum3 = Self::splat(0.0);
    pub const ONE: Spectrum3 = Self::splat(1.0);

    /// Tags the triple with explicit wavelengths. Wavelengths must be
    /// strictly decreasing R to B.
    pub fn with_wavelengths(c: [f64; 3], lambda: [f64; 3]) -> Self {
        debug_assert!(lambda[0] > lambda[1] && lambda[1] > lambda[2]);
        Spectrum3 { c, lambda }
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        Spectrum3 { c: self.c.map(f), lambda: self.lambda }
    }

    pub fn zip(self, other: Spectrum3, f: impl Fn(f64, f64) -> f64) -> Self {
        Spectrum3 {
            c: [
                f(self.c[0], other.c[0]),
                f(self.c[1], other.c[1]),
                f(self.c[2], other.c[2]),
            ],
            lambda: self.lambda,
        }
    }

    pub fn lerp(self, other: Spectrum3, t: f64) -> Self {
        self.zip(other, |a, b| a + (b - a) * t)
    }

    pub fn exp(self) -> Self {
        self.map(f64::exp)
    }

    pub fn clamp(self, lo: f64, hi: f64) -> Self {
        self.map(|v| v.clamp(lo, hi))
    }

    pub fn max_component(self) -> f64 {
        self.c[0].max(self.c[1]).max(self.c[2])
    }

    pub fn min_component(self) -> f64 {
        self.c[0].min(self.c[1]).min(self.c[2])
    }

    pub fn mean(self) -> f64 {
        (self.c[0] + self.c[1] + self.c[2]) / 3.0
    }

    /// Rec. 709 luma of the triple.
    pub fn luminance(self) -> f64 {
        0.2126 * self.c[0] + 0.7152 * self.c[1] + 0.0722 * self.c[2]
    }

    pub fn is_finite(self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }
}

impl Add for Spectrum3 {
    type Output = Spectrum3;
    fn add(self, rhs: Spectrum3) -> Spectrum3 {
        self.zip(rhs, |a, b| a + b)
    }
}

impl AddAssign for Spectrum3 {
    fn add_assign(&mut self, rhs: Spectrum3) {
        *self = *self + rhs;
    }
}

impl Sub for Spectrum3 {
    type Output = Spectrum3;
    fn sub(self, rhs: Spectrum3) -> Spectrum3 {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for Spectrum3 {
    type Output = Spectrum3;
    fn mul(self, rhs: Spectrum3) -> Spectrum3 {
        self.zip(rhs, |a, b| a * b)
    }
}

impl MulAssign for Spectrum3 {
    fn mul_assign(&mut self, rhs: Spectrum3) {
        *self = *self * rhs;
    }
}

impl Mul<f64> for Spectrum3 {
    type Output = Spectrum3;
    fn mul(self, rhs: f64) -> Spectrum3 {
        self.map(|v| v * rhs)
    }
}

impl Mul<Spectrum3> for f64 {
    type Output = Spectrum3;
    fn mul(self, rhs: Spectrum3) -> Spectrum3 {
        rhs * self
    }
}

impl Div<f64> for Spectrum3 {
    type Output = Spectrum3;
    fn div(self, rhs: f64) -> Spectrum3 {
        self.map(|v| v / rhs)
    }
}

impl Div for Spectrum3 {
    type Output = Spectrum3;
    fn div(self, rhs: Spectrum3) -> Spectrum3 {
        self.zip(rhs, |a, b| a / b)
    }
}

impl Neg for Spectrum3 {
    type Output = Spectrum3;
    fn neg(self) -> Spectrum3 {
        self.map(|v| -v)
    }
}

impl Index<usize> for Spectrum3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.c[i]
    }
}

/// Converts the dispersion controls to an Abbe number. A zero scale disables
/// dispersion entirely, reported as an infinite Abbe number.
pub fn abbe_number(scale: f64, abbe: f64) -> f64 {
    if scale <= 0.0 {
        f64::INFINITY
    } else {
        abbe / scale
    }
}

/// Fraunhofer line wavelengths anchoring the Abbe definition, in nm.
pub const LAMBDA_C_NM: f64 = 656.3;
pub const LAMBDA_D_NM: f64 = 587.6;
pub const LAMBDA_F_NM: f64 = 486.1;

/// Coefficients of the two-term Cauchy formula `n(lambda) = A + B/lambda^2`
/// with `lambda` in nm, so `B` carries nm^2 units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyCoefficients {
    pub a: f64,
    pub b: f64,
}

impl CauchyCoefficients {
    pub fn ior_at(self, lambda_nm: f64) -> f64 {
        self.a + self.b / (lambda_nm * lambda_nm)
    }
}

/// Fits Cauchy coefficients so that the index at the d line is `n_d` and the
/// F-to-C spread matches the Abbe number `v_d`. An infinite `v_d` yields a
/// constant index.
pub fn cauchy_fit(n_d: f64, v_d: f64) -> CauchyCoefficients {
    if !v_d.is_finite() {
        return CauchyCoefficients { a: n_d, b: 0.0 };
    }
    let inv2 = |l: f64| 1.0 / (l * l);
    let b = (n_d - 1.0) / (v_d * (inv2(LAMBDA_F_NM) - inv2(LAMBDA_C_NM)));
    let a = n_d - b * inv2(LAMBDA_D_NM);
    CauchyCoefficients { a, b }
}

/// One wavelength draw per channel together with its estimator weight.
/// The density matches the assumed channel sensitivity, so weights are unity.
#[derive(Debug, Clone, Copy)]
pub struct WavelengthSample {
    pub lambda: [f64; 3],
    pub weight: [f64; 3],
}

/// Draws one wavelength per channel from a triangular density centered on the
/// channel's nominal wavelength with the given half-width.
pub fn sample_wavelengths_with(rng: &mut impl Rng, half_width_nm: f64) -> WavelengthSample {
    let mut lambda = [0.0; 3];
    for (slot, &center) in lambda.iter_mut().zip(&CHANNEL_WAVELENGTHS_NM) {
        let u: f64 = rng.random();
        let offset = if u < 0.5 {
            -(1.0 - (2.0 * u).sqrt())
        } else {
            1.0 - (2.0 * (1.0 - u)).sqrt()
        };
        *slot = center + half_width_nm * offset;
    }
    WavelengthSample { lambda, weight: [1.0; 3] }
}

/// Draws per-channel wavelengths with the standard channel half-width.
pub fn sample_wavelengths(rng: &mut impl Rng) -> WavelengthSample {
    sample_wavelengths_with(rng, CHANNEL_HALF_WIDTH_NM)
}
