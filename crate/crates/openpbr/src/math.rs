//! Shared geometric and numeric helpers: shading-space vectors, an
//! orthonormal frame, and Gauss-Legendre quadrature nodes.

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

pub fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

pub fn sqr(x: f64) -> f64 {
    x * x
}

/// Reflects `v` about the unit normal `n`. Both point away from the surface.
pub fn reflect(v: Vec3, n: Vec3) -> Vec3 {
    2.0 * v.dot(&n) * n - v
}

/// Shading coordinate frame with `n` as +z. Directions are unit vectors
/// pointing away from the surface point.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub t: Vec3,
    pub b: Vec3,
    pub n: Vec3,
}

impl Frame {
    /// Builds a frame from a normal alone, choosing a stable tangent.
    pub fn from_normal(n: Vec3) -> Self {
        // Branchless ONB of Duff et al.; stable for all unit normals.
        let sign = 1.0_f64.copysign(n.z);
        let a = -1.0 / (sign + n.z);
        let b = n.x * n.y * a;
        Frame {
            t: Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x),
            b: Vec3::new(b, sign + n.y * n.y * a, -n.y),
            n,
        }
    }

    /// Builds a frame from a normal and a tangent hint, Gram-Schmidt
    /// orthonormalized. Falls back to [`Frame::from_normal`] when the hint is
    /// (near-)parallel to the normal.
    pub fn from_normal_tangent(n: Vec3, t_hint: Vec3) -> Self {
        let t = t_hint - n.dot(&t_hint) * n;
        let len = t.norm();
        if len < 1e-9 {
            return Self::from_normal(n);
        }
        let t = t / len;
        Frame { t, b: n.cross(&t), n }
    }

    pub fn to_local(&self, v: Vec3) -> Vec3 {
        Vec3::new(v.dot(&self.t), v.dot(&self.b), v.dot(&self.n))
    }

    pub fn to_world(&self, v: Vec3) -> Vec3 {
        v.x * self.t + v.y * self.b + v.z * self.n
    }
}

/// Spherical direction in the local frame, `z = cos(theta)`.
pub fn spherical_direction(cos_theta: f64, phi: f64) -> Vec3 {
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    Vec3::new(sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta)
}

/// Cosine-weighted hemisphere sample from two uniforms; pdf is `z / pi`.
pub fn cosine_sample_hemisphere(u1: f64, u2: f64) -> Vec3 {
    let r = u1.sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    let z = (1.0 - u1).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre polynomial. Deterministic; accurate to ~1e-15 for n <= 256.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Integrates `f` over [a, b] with `n`-point Gauss-Legendre quadrature.
pub fn integrate<F: FnMut(f64) -> f64>(n: usize, a: f64, b: f64, mut f: F) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}
