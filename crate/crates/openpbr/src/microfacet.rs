//! GGX microfacet machinery: the anisotropic roughness mapping, normal
//! distribution, height-correlated Smith masking, visible-normal sampling,
//! and the conductor/dielectric single-scatter lobes with multiple-scatter
//! energy compensation. Optional hazy and retro-reflective variants sit on
//! top of the conductor lobe.
//!
//! Conventions: directions are unit vectors in shading space (+z is the
//! surface normal) pointing away from the surface. `eval` returns the BSDF
//! value without the cosine factor; transmission uses basic radiance
//! (radiance over squared index), which keeps a lossless interface at
//! `E + T == 1`. Sample weights are `f * |cos| / pdf` with discrete branch
//! probabilities folded in.

use crate::fresnel::{f82_average_albedo, f82_fresnel, refract_cos, specular_reflectance};
use crate::math::{gauss_legendre, Vec3};
use crate::spectra::Spectrum3;
use rand::Rng;
use std::sync::OnceLock;

/// Surfaces rougher than this use the microfacet path; at or below it the
/// lobe degenerates to ideal mirror reflection/refraction.
pub const ALPHA_FLOOR: f64 = 1e-4;

/// Anisotropic GGX slope scales along the tangent and bitangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoughnessAlphas {
    pub alpha_t: f64,
    pub alpha_b: f64,
}

impl RoughnessAlphas {
    pub fn isotropic(alpha: f64) -> Self {
        RoughnessAlphas {
            alpha_t: alpha.max(ALPHA_FLOOR),
            alpha_b: alpha.max(ALPHA_FLOOR),
        }
    }

    /// True when the lobe should be treated as an ideal delta reflection.
    pub fn effectively_smooth(&self) -> bool {
        self.alpha_t <= ALPHA_FLOOR
    }

    /// Scalar roughness proxy used by the shared albedo table.
    pub fn mean_alpha(&self) -> f64 {
        (self.alpha_t * self.alpha_b).sqrt()
    }
}

/// Maps perceptual roughness and anisotropy to slope scales, preserving the
/// mean-square slope (`alpha_t^2 + alpha_b^2 == 2 r^4`) before the floor.
pub fn roughness_to_alphas(r: f64, a: f64) -> RoughnessAlphas {
    let k = 1.0 - a;
    let alpha_t = r * r * (2.0 / (1.0 + k * k)).sqrt();
    let alpha_b = k * alpha_t;
    RoughnessAlphas {
        alpha_t: alpha_t.max(ALPHA_FLOOR),
        alpha_b: alpha_b.max(ALPHA_FLOOR),
    }
}

/// GGX normal distribution, normalized so `int D(m) cos(theta_m) dm == 1`.
pub fn ggx_ndf(m: Vec3, alphas: &RoughnessAlphas) -> f64 {
    if m.z <= 0.0 {
        return 0.0;
    }
    let x = m.x / alphas.alpha_t;
    let y = m.y / alphas.alpha_b;
    let q = x * x + y * y + m.z * m.z;
    1.0 / (std::f64::consts::PI * alphas.alpha_t * alphas.alpha_b * q * q)
}

/// Smith slope-space shadowing term for one direction.
pub fn smith_lambda(w: Vec3, alphas: &RoughnessAlphas) -> f64 {
    let z2 = w.z * w.z;
    if z2 == 0.0 {
        return f64::INFINITY;
    }
    let a2 = alphas.alpha_t * alphas.alpha_t * w.x * w.x
        + alphas.alpha_b * alphas.alpha_b * w.y * w.y;
    0.5 * ((1.0 + a2 / z2).sqrt() - 1.0)
}

pub fn smith_g1(w: Vec3, alphas: &RoughnessAlphas) -> f64 {
    1.0 / (1.0 + smith_lambda(w, alphas))
}

/// Height-correlated masking-shadowing for a direction pair; valid for both
/// reflection and transmission configurations.
pub fn smith_g2(wi: Vec3, wo: Vec3, alphas: &RoughnessAlphas) -> f64 {
    1.0 / (1.0 + smith_lambda(wi, alphas) + smith_lambda(wo, alphas))
}

/// Visible-normal sample driven by two uniforms; deterministic, suitable for
/// both RNG-driven sampling and tensor-grid quadrature. `wo.z > 0` required.
pub fn sample_visible_normal_square(
    wo: Vec3,
    alphas: &RoughnessAlphas,
    u1: f64,
    u2: f64,
) -> Vec3 {
    // Stretch to the hemisphere where the distribution is uniform-slope GGX.
    let vh = Vec3::new(alphas.alpha_t * wo.x, alphas.alpha_b * wo.y, wo.z).normalize();
    let len2 = vh.x * vh.x + vh.y * vh.y;
    let t1 = if len2 > 0.0 {
        Vec3::new(-vh.y, vh.x, 0.0) / len2.sqrt()
    } else {
        Vec3::x()
    };
    let t2 = vh.cross(&t1);
    let r = u1.sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    let p1 = r * phi.cos();
    let mut p2 = r * phi.sin();
    let s = 0.5 * (1.0 + vh.z);
    p2 = (1.0 - s) * (1.0 - p1 * p1).max(0.0).sqrt() + s * p2;
    let p3 = (1.0 - p1 * p1 - p2 * p2).max(0.0).sqrt();
    let nh = p1 * t1 + p2 * t2 + p3 * vh;
    Vec3::new(alphas.alpha_t * nh.x, alphas.alpha_b * nh.y, nh.z.max(1e-9)).normalize()
}

/// Density of [`sample_visible_normal_square`] over micronormal solid angle.
pub fn visible_normal_pdf(wo: Vec3, m: Vec3, alphas: &RoughnessAlphas) -> f64 {
    let cos_om = wo.dot(&m);
    if cos_om <= 0.0 || wo.z <= 0.0 {
        return 0.0;
    }
    smith_g1(wo, alphas) * ggx_ndf(m, alphas) * cos_om / wo.z
}

/// Visible-normal sample with its density, RNG-driven.
pub fn sample_visible_normal(
    wo: Vec3,
    alphas: &RoughnessAlphas,
    rng: &mut impl Rng,
) -> (Vec3, f64) {
    let m = sample_visible_normal_square(wo, alphas, rng.random(), rng.random());
    (m, visible_normal_pdf(wo, m, alphas))
}

fn reflect_about(v: Vec3, m: Vec3) -> Vec3 {
    2.0 * v.dot(&m) * m - v
}

fn mirror_z(w: Vec3) -> Vec3 {
    Vec3::new(w.x, w.y, -w.z)
}

/// Refracts `wo` about micronormal `m` with far-over-near ratio `eta_rel`;
/// `None` under total internal reflection.
pub fn refract_dir(wo: Vec3, m: Vec3, eta_rel: f64) -> Option<Vec3> {
    let cos_om = wo.dot(&m);
    let mu_t = refract_cos(cos_om.abs(), eta_rel)?;
    let sign = if cos_om >= 0.0 { 1.0 } else { -1.0 };
    Some((-wo / eta_rel + (cos_om.abs() / eta_rel - mu_t) * sign * m).normalize())
}

/// One generated scattering direction with its density and path weight.
#[derive(Debug, Clone, Copy)]
pub struct LobeSample {
    pub wi: Vec3,
    /// Solid-angle density including discrete branch probability; 0 marks a
    /// delta lobe (the weight already accounts for the whole branch).
    pub pdf: f64,
    /// `f * |cos theta_i| / pdf`, finite by construction.
    pub weight: Spectrum3,
    pub delta: bool,
}

const TABLE_N: usize = 32;
const GRID_RULE: usize = 48;

fn grid_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GRID_RULE))
}

fn direction_from_mu(mu: f64) -> Vec3 {
    let mu = mu.clamp(1e-4, 1.0);
    Vec3::new((1.0 - mu * mu).max(0.0).sqrt(), 0.0, mu)
}

/// Directional albedo of the no-Fresnel GGX reflection lobe: the fraction of
/// energy kept after one bounce, ignoring the Fresnel split. The sampler
/// weight `G2/G1` is smooth over the uniform square, so a tensor rule is
/// effectively exact.
pub fn ggx_reflection_albedo_nofresnel(mu_o: f64, alphas: &RoughnessAlphas) -> f64 {
    let wo = direction_from_mu(mu_o);
    let g1 = smith_g1(wo, alphas);
    let (nodes, weights) = grid_rule();
    let mut total = 0.0;
    for (&xa, &wa) in nodes.iter().zip(weights) {
        let u1 = 0.5 * (xa + 1.0);
        for (&xb, &wb) in nodes.iter().zip(weights) {
            let u2 = 0.5 * (xb + 1.0);
            let m = sample_visible_normal_square(wo, alphas, u1, u2);
            let wi = reflect_about(wo, m);
            if wi.z > 0.0 {
                total += 0.25 * wa * wb * smith_g2(wi, wo, alphas) / g1;
            }
        }
    }
    total
}

/// Precomputed single-scatter albedo of the no-Fresnel GGX reflection lobe
/// over (cosine, roughness alpha), bilinearly interpolated.
pub struct SingleScatterTable {
    e: Vec<f64>,
}

impl SingleScatterTable {
    fn build() -> Self {
        let mut e = vec![1.0; TABLE_N * TABLE_N];
        for ia in 1..TABLE_N {
            let alpha = ia as f64 / (TABLE_N - 1) as f64;
            let alphas = RoughnessAlphas::isotropic(alpha);
            for im in 0..TABLE_N {
                let mu = (im as f64 / (TABLE_N - 1) as f64).max(1e-3);
                e[ia * TABLE_N + im] = ggx_reflection_albedo_nofresnel(mu, &alphas);
            }
        }
        SingleScatterTable { e }
    }

    pub fn lookup(&self, mu: f64, alpha: f64) -> f64 {
        let n = (TABLE_N - 1) as f64;
        let x = mu.clamp(0.0, 1.0) * n;
        let y = alpha.clamp(0.0, 1.0) * n;
        let ix = (x as usize).min(TABLE_N - 2);
        let iy = (y as usize).min(TABLE_N - 2);
        let fx = x - ix as f64;
        let fy = y - iy as f64;
        let at = |row: usize, col: usize| self.e[row * TABLE_N + col];
        let a = at(iy, ix) * (1.0 - fx) + at(iy, ix + 1) * fx;
        let b = at(iy + 1, ix) * (1.0 - fx) + at(iy + 1, ix + 1) * fx;
        a * (1.0 - fy) + b * fy
    }
}

/// Shared lazily-built single-scatter albedo table.
pub fn single_scatter_table() -> &'static SingleScatterTable {
    static TABLE: OnceLock<SingleScatterTable> = OnceLock::new();
    TABLE.get_or_init(SingleScatterTable::build)
}

/// Per-channel reflectance tabulated over the incidence cosine, sampled at
/// `mu = (k + 0.5)/64` and linearly interpolated. Stands in for an analytic
/// Fresnel factor when interference makes the factor non-analytic.
#[derive(Debug, Clone)]
pub struct FresnelCurve {
    table: [Spectrum3; 64],
}

impl FresnelCurve {
    /// Tabulates `r(mu)`, clamping every entry to [0, 1] per channel.
    pub fn tabulate(r: impl Fn(f64) -> Spectrum3) -> Self {
        let mut table = [Spectrum3::ZERO; 64];
        for (k, slot) in table.iter_mut().enumerate() {
            let mu = (k as f64 + 0.5) / 64.0;
            *slot = r(mu).clamp(0.0, 1.0);
        }
        FresnelCurve { table }
    }

    pub fn eval(&self, mu: f64) -> Spectrum3 {
        let x = mu.clamp(0.0, 1.0) * 64.0 - 0.5;
        let ix = (x.floor().max(0.0) as usize).min(62);
        let f = (x - ix as f64).clamp(0.0, 1.0);
        self.table[ix].lerp(self.table[ix + 1], f)
    }

    /// Cosine-weighted hemispherical average `int 2 mu R(mu) dmu` over the
    /// table nodes; exact 1 for a constant-1 curve.
    pub fn hemispherical_mean(&self) -> Spectrum3 {
        let mut total = Spectrum3::ZERO;
        for (k, r) in self.table.iter().enumerate() {
            total += *r * ((2.0 * k as f64 + 1.0) / 4096.0);
        }
        total
    }
}

/// Interference overlay that replaces part of a lobe's Fresnel factor: a
/// presence weight plus the tabulated film-stack reflectance seen from each
/// side of the interface.
#[derive(Debug, Clone)]
pub struct FilmFresnel {
    pub weight: f64,
    pub above: FresnelCurve,
    /// Reflectance seen from inside the substrate; opaque bases omit it.
    pub below: Option<FresnelCurve>,
}

impl FilmFresnel {
    fn curve(&self, above: bool) -> &FresnelCurve {
        if above {
            &self.above
        } else {
            self.below.as_ref().unwrap_or(&self.above)
        }
    }
}

/// Metallic microfacet BRDF with the tinted-Schlick Fresnel and optional
/// average-albedo energy compensation.
#[derive(Debug, Clone)]
pub struct ConductorLobe {
    pub alphas: RoughnessAlphas,
    pub f0: Spectrum3,
    pub tint: Spectrum3,
    pub xi_s: f64,
    pub compensation: bool,
    pub film: Option<Box<FilmFresnel>>,
}

impl ConductorLobe {
    /// Fresnel factor with the interference overlay folded in; the specular
    /// weight modulates only the analytic part.
    fn effective_fresnel(&self, c: f64) -> Spectrum3 {
        let base = f82_fresnel(c, self.f0, self.tint, self.xi_s);
        match &self.film {
            None => base,
            Some(film) => base.lerp(film.above.eval(c), film.weight.clamp(0.0, 1.0)),
        }
    }

    fn average_fresnel(&self) -> Spectrum3 {
        let base = (f82_average_albedo(self.f0, self.tint) * self.xi_s).clamp(0.0, 1.0);
        match &self.film {
            None => base,
            Some(film) => {
                base.lerp(film.above.hemispherical_mean(), film.weight.clamp(0.0, 1.0))
            }
        }
    }

    fn comp_factor(&self, mu_o: f64) -> Spectrum3 {
        if !self.compensation || self.alphas.effectively_smooth() {
            return Spectrum3::ONE;
        }
        let e_ss = single_scatter_table()
            .lookup(mu_o.abs(), self.alphas.mean_alpha())
            .clamp(1e-4, 1.0);
        Spectrum3::ONE + self.average_fresnel() * ((1.0 - e_ss) / e_ss)
    }

    pub fn eval(&self, wi: Vec3, wo: Vec3) -> Spectrum3 {
        if wi.z <= 0.0 || wo.z <= 0.0 || self.alphas.effectively_smooth() {
            return Spectrum3::ZERO;
        }
        let h = (wi + wo).normalize();
        let f = self.effective_fresnel(wi.dot(&h).clamp(0.0, 1.0));
        let d = ggx_ndf(h, &self.alphas);
        let g2 = smith_g2(wi, wo, &self.alphas);
        self.comp_factor(wo.z) * f * (d * g2 / (4.0 * wi.z * wo.z))
    }

    pub fn pdf(&self, wi: Vec3, wo: Vec3) -> f64 {
        if wi.z <= 0.0 || wo.z <= 0.0 || self.alphas.effectively_smooth() {
            return 0.0;
        }
        let h = (wi + wo).normalize();
        visible_normal_pdf(wo, h, &self.alphas) / (4.0 * wo.dot(&h).abs().max(1e-12))
    }

    pub fn sample(&self, wo: Vec3, rng: &mut impl Rng) -> Option<LobeSample> {
        if wo.z <= 0.0 {
            return None;
        }
        if self.alphas.effectively_smooth() {
            let wi = Vec3::new(-wo.x, -wo.y, wo.z);
            let f = self.effective_fresnel(wo.z);
            return Some(LobeSample { wi, pdf: 0.0, weight: f, delta: true });
        }
        let (m, pdf_m) = sample_visible_normal(wo, &self.alphas, rng);
        let wi = reflect_about(wo, m);
        if wi.z <= 0.0 || pdf_m <= 0.0 {
            return None;
        }
        let f = self.effective_fresnel(wi.dot(&m).clamp(0.0, 1.0));
        let weight = self.comp_factor(wo.z)
            * f
            * (smith_g2(wi, wo, &self.alphas) / smith_g1(wo, &self.alphas));
        Some(LobeSample {
            wi,
            pdf: pdf_m / (4.0 * wo.dot(&m).abs().max(1e-12)),
            weight,
            delta: false,
        })
    }

    /// Directional albedo by tensor quadrature over the sampler square.
    pub fn directional_albedo(&self, mu_o: f64) -> Spectrum3 {
        if self.alphas.effectively_smooth() {
            return self.effective_fresnel(mu_o.clamp(0.0, 1.0));
        }
        let wo = direction_from_mu(mu_o);
        let g1 = smith_g1(wo, &self.alphas);
        let (nodes, weights) = grid_rule();
        let mut total = Spectrum3::ZERO;
        for (&xa, &wa) in nodes.iter().zip(weights) {
            let u1 = 0.5 * (xa + 1.0);
            for (&xb, &wb) in nodes.iter().zip(weights) {
                let u2 = 0.5 * (xb + 1.0);
                let m = sample_visible_normal_square(wo, &self.alphas, u1, u2);
                let wi = reflect_about(wo, m);
                if wi.z > 0.0 {
                    let f = self.effective_fresnel(wi.dot(&m).clamp(0.0, 1.0));
                    total += f * (0.25 * wa * wb * smith_g2(wi, wo, &self.alphas) / g1);
                }
            }
        }
        self.comp_factor(mu_o) * total
    }
}

/// Dielectric microfacet BSDF (reflection plus transmission) around a single
/// interface with interior-over-exterior index ratio `eta`. Two-sided: `wo`
/// may lie in either hemisphere. Reflection is tinted by `reflection_tint`;
/// transmission never is. With compensation enabled, per-side directional
/// albedo tables rescale both transports so a lossless interface closes to 1.
#[derive(Debug, Clone)]
pub struct DielectricLobe {
    pub alphas: RoughnessAlphas,
    pub eta: f64,
    pub xi_s: f64,
    pub reflection_tint: Spectrum3,
    comp: Option<Box<CompTables>>,
    film: Option<Box<FilmFresnel>>,
}

#[derive(Debug, Clone)]
struct CompTables {
    outside: [f64; 64],
    inside: [f64; 64],
}

/// Index ratios this close to 1 make the interface optically absent; the
/// lobe degenerates to a delta pass-through regardless of roughness.
const ETA_UNITY_EPS: f64 = 1e-6;

/// Per-channel single-scatter energy split for one view direction.
#[derive(Debug, Clone, Copy)]
pub struct ThroughputSplit {
    /// Reflected energy with tint and film overlay applied.
    pub reflected: Spectrum3,
    /// Reflected energy before tinting; drives energy compensation.
    pub reflected_untinted: Spectrum3,
    /// Transmitted energy, film fringes included, never tinted.
    pub transmitted: Spectrum3,
}

/// Fresnel factors of one facet interaction with the film overlay folded in.
#[derive(Debug, Clone, Copy)]
struct SplitFresnel {
    /// Tinted reflection numerator.
    refl: Spectrum3,
    /// Untinted reflection, for energy bookkeeping.
    refl_untinted: Spectrum3,
    /// Per-channel transmitted fraction; zero under TIR.
    trans: Spectrum3,
    /// Scalar reflection probability for branch selection and densities.
    branch: f64,
    /// Refracted cosine at the interface, from the unmodified index ratio.
    mu_t: Option<f64>,
}

impl DielectricLobe {
    pub fn new(alphas: RoughnessAlphas, eta: f64, xi_s: f64, reflection_tint: Spectrum3) -> Self {
        DielectricLobe { alphas, eta, xi_s, reflection_tint, comp: None, film: None }
    }

    /// True when the index ratio is close enough to 1 that the interface is
    /// optically absent and every transport is a delta pass-through.
    pub fn index_matched(&self) -> bool {
        (self.eta - 1.0).abs() < ETA_UNITY_EPS
    }

    /// Attaches an interference overlay to the Fresnel factor. Call before
    /// [`DielectricLobe::with_compensation`] so the tables account for it.
    /// An optically absent interface stays a delta pass-through even with an
    /// overlay attached.
    pub fn with_film(mut self, film: FilmFresnel) -> Self {
        self.film = Some(Box::new(film));
        self.comp = None;
        self
    }

    /// Enables energy compensation, building the per-side albedo tables.
    /// Delta transports already preserve energy and skip the tables.
    pub fn with_compensation(mut self) -> Self {
        if self.alphas.effectively_smooth() || self.index_matched() {
            self.comp = None;
            return self;
        }
        let mut tables = Box::new(CompTables { outside: [1.0; 64], inside: [1.0; 64] });
        for k in 0..64 {
            let mu = (k as f64 + 0.5) / 64.0;
            let out = self.throughput_split(mu, self.eta, true);
            tables.outside[k] = (out.reflected_untinted + out.transmitted).mean();
            let inn = self.throughput_split(mu, 1.0 / self.eta, false);
            tables.inside[k] = (inn.reflected_untinted + inn.transmitted).mean();
        }
        self.comp = Some(tables);
        self
    }

    /// Fresnel factors for one facet cosine on the side selected by `above`,
    /// with far-over-near index ratio `eta_rel`.
    fn split_fresnel(&self, c: f64, eta_rel: f64, above: bool) -> SplitFresnel {
        let fres = specular_reflectance(c.min(1.0), eta_rel, self.xi_s);
        let base = SplitFresnel {
            refl: self.reflection_tint * fres.f,
            refl_untinted: Spectrum3::splat(fres.f),
            trans: match fres.mu_t {
                Some(_) => Spectrum3::splat(1.0 - fres.f),
                None => Spectrum3::ZERO,
            },
            branch: match fres.mu_t {
                Some(_) => fres.f,
                None => 1.0,
            },
            mu_t: fres.mu_t,
        };
        let Some(film) = &self.film else { return base };
        let w = film.weight.clamp(0.0, 1.0);
        let r_film = film.curve(above).eval(c);
        let refl_untinted = base.refl_untinted.lerp(r_film, w);
        let (trans, branch) = match fres.mu_t {
            Some(_) => (
                (Spectrum3::ONE - refl_untinted).clamp(0.0, 1.0),
                refl_untinted.mean().clamp(0.0, 1.0),
            ),
            None => (Spectrum3::ZERO, 1.0),
        };
        SplitFresnel {
            refl: base.refl.lerp(r_film, w),
            refl_untinted,
            trans,
            branch,
            mu_t: fres.mu_t,
        }
    }

    /// Single-scatter reflected/transmitted energy for a view cosine on the
    /// side whose far-over-near index ratio is `eta_rel`.
    fn throughput_split(&self, mu_o: f64, eta_rel: f64, above: bool) -> ThroughputSplit {
        if self.index_matched() {
            return ThroughputSplit {
                reflected: Spectrum3::ZERO,
                reflected_untinted: Spectrum3::ZERO,
                transmitted: Spectrum3::ONE,
            };
        }
        let wo = direction_from_mu(mu_o);
        if self.alphas.effectively_smooth() {
            let sf = self.split_fresnel(wo.z, eta_rel, above);
            return ThroughputSplit {
                reflected: sf.refl,
                reflected_untinted: sf.refl_untinted,
                transmitted: sf.trans,
            };
        }
        let g1 = smith_g1(wo, &self.alphas);
        let (nodes, weights) = grid_rule();
        let mut reflected = Spectrum3::ZERO;
        let mut reflected_untinted = Spectrum3::ZERO;
        let mut transmitted = Spectrum3::ZERO;
        for (&xa, &wa) in nodes.iter().zip(weights) {
            let u1 = 0.5 * (xa + 1.0);
            for (&xb, &wb) in nodes.iter().zip(weights) {
                let u2 = 0.5 * (xb + 1.0);
                let q = 0.25 * wa * wb;
                let m = sample_visible_normal_square(wo, &self.alphas, u1, u2);
                let sf = self.split_fresnel(wo.dot(&m).clamp(0.0, 1.0), eta_rel, above);
                let wi_r = reflect_about(wo, m);
                if wi_r.z > 0.0 {
                    let s = q * smith_g2(wi_r, wo, &self.alphas) / g1;
                    reflected += sf.refl * s;
                    reflected_untinted += sf.refl_untinted * s;
                }
                if sf.mu_t.is_some() {
                    if let Some(wi_t) = refract_dir(wo, m, eta_rel) {
                        if wi_t.z < 0.0 {
                            transmitted +=
                                sf.trans * (q * smith_g2(wi_t, wo, &self.alphas) / g1);
                        }
                    }
                }
            }
        }
        ThroughputSplit { reflected, reflected_untinted, transmitted }
    }

    fn comp_factor(&self, mu_o_signed: f64) -> f64 {
        let Some(tables) = &self.comp else { return 1.0 };
        let table = if mu_o_signed >= 0.0 { &tables.outside } else { &tables.inside };
        let x = mu_o_signed.abs().clamp(0.0, 1.0) * 64.0 - 0.5;
        let ix = (x.floor().max(0.0) as usize).min(62);
        let f = (x - ix as f64).clamp(0.0, 1.0);
        let e = table[ix] * (1.0 - f) + table[ix + 1] * f;
        1.0 / e.clamp(1e-3, 1.0)
    }

    /// Relative far-over-near index ratio seen from `wo`'s hemisphere.
    fn eta_rel(&self, wo_z: f64) -> f64 {
        if wo_z >= 0.0 { self.eta } else { 1.0 / self.eta }
    }

    pub fn eval(&self, wi: Vec3, wo: Vec3) -> Spectrum3 {
        if wi.z * wo.z > 0.0 {
            self.eval_reflection(wi, wo)
        } else {
            self.eval_transmission(wi, wo)
        }
    }

    /// Reflection half of the BSDF, Fresnel factor included; zero for
    /// opposite-hemisphere pairs. `eval == eval_reflection + eval_transmission`.
    pub fn eval_reflection(&self, wi: Vec3, wo: Vec3) -> Spectrum3 {
        if self.alphas.effectively_smooth()
            || self.index_matched()
            || wi.z == 0.0
            || wo.z == 0.0
        {
            return Spectrum3::ZERO;
        }
        let above = wo.z > 0.0;
        let comp = self.comp_factor(wo.z);
        // Canonical orientation: viewer above the interface.
        let (wi, wo, eta_rel) = if above {
            (wi, wo, self.eta)
        } else {
            (mirror_z(wi), mirror_z(wo), 1.0 / self.eta)
        };
        if wi.z <= 0.0 {
            return Spectrum3::ZERO;
        }
        let h = (wi + wo).normalize();
        let c_o = wo.dot(&h);
        if c_o <= 0.0 {
            return Spectrum3::ZERO;
        }
        let sf = self.split_fresnel(c_o, eta_rel, above);
        let d = ggx_ndf(h, &self.alphas);
        let g2 = smith_g2(wi, wo, &self.alphas);
        sf.refl * (comp * d * g2 / (4.0 * wi.z * wo.z))
    }

    /// Transmission half of the BSDF, `1 - F` factor included; zero for
    /// same-hemisphere pairs.
    pub fn eval_transmission(&self, wi: Vec3, wo: Vec3) -> Spectrum3 {
        if self.alphas.effectively_smooth()
            || self.index_matched()
            || wi.z == 0.0
            || wo.z == 0.0
        {
            return Spectrum3::ZERO;
        }
        let above = wo.z > 0.0;
        let comp = self.comp_factor(wo.z);
        let (wi, wo, eta_rel) = if above {
            (wi, wo, self.eta)
        } else {
            (mirror_z(wi), mirror_z(wo), 1.0 / self.eta)
        };
        if wi.z >= 0.0 {
            return Spectrum3::ZERO;
        }
        let h_raw = -(eta_rel * wi + wo);
        if h_raw.norm_squared() < 1e-16 {
            return Spectrum3::ZERO;
        }
        let mut h = h_raw.normalize();
        if h.z < 0.0 {
            h = -h;
        }
        let c_o = wo.dot(&h);
        let c_i = wi.dot(&h);
        if c_o <= 0.0 || c_i >= 0.0 {
            return Spectrum3::ZERO;
        }
        let sf = self.split_fresnel(c_o, eta_rel, above);
        if sf.mu_t.is_none() {
            return Spectrum3::ZERO;
        }
        let dd = eta_rel * c_i + c_o;
        let dd2 = dd * dd;
        if dd2 < 1e-14 {
            return Spectrum3::ZERO;
        }
        let d = ggx_ndf(h, &self.alphas);
        let g2 = smith_g2(wi, wo, &self.alphas);
        let val = eta_rel * eta_rel * (c_i.abs() * c_o) / (wi.z.abs() * wo.z) * g2 * d / dd2;
        sf.trans * (comp * val)
    }

    /// Half-vector density of the reflection transport plus the scalar
    /// branch probability, or `None` when the pair cannot reflect.
    fn reflection_density(&self, wi: Vec3, wo: Vec3) -> Option<(f64, f64)> {
        if self.alphas.effectively_smooth()
            || self.index_matched()
            || wi.z == 0.0
            || wo.z == 0.0
        {
            return None;
        }
        let above = wo.z > 0.0;
        let (wi, wo, eta_rel) = if above {
            (wi, wo, self.eta)
        } else {
            (mirror_z(wi), mirror_z(wo), 1.0 / self.eta)
        };
        if wi.z <= 0.0 {
            return None;
        }
        let h = (wi + wo).normalize();
        let c_o = wo.dot(&h);
        if c_o <= 0.0 {
            return None;
        }
        let sf = self.split_fresnel(c_o, eta_rel, above);
        Some((visible_normal_pdf(wo, h, &self.alphas) / (4.0 * c_o), sf.branch))
    }

    /// Half-vector density of the transmission transport plus the scalar
    /// branch probability, or `None` when the pair cannot refract.
    fn transmission_density(&self, wi: Vec3, wo: Vec3) -> Option<(f64, f64)> {
        if self.alphas.effectively_smooth()
            || self.index_matched()
            || wi.z == 0.0
            || wo.z == 0.0
        {
            return None;
        }
        let above = wo.z > 0.0;
        let (wi, wo, eta_rel) = if above {
            (wi, wo, self.eta)
        } else {
            (mirror_z(wi), mirror_z(wo), 1.0 / self.eta)
        };
        if wi.z >= 0.0 {
            return None;
        }
        let h_raw = -(eta_rel * wi + wo);
        if h_raw.norm_squared() < 1e-16 {
            return None;
        }
        let mut h = h_raw.normalize();
        if h.z < 0.0 {
            h = -h;
        }
        let c_o = wo.dot(&h);
        let c_i = wi.dot(&h);
        if c_o <= 0.0 || c_i >= 0.0 {
            return None;
        }
        let sf = self.split_fresnel(c_o, eta_rel, above);
        sf.mu_t?;
        let dd = eta_rel * c_i + c_o;
        let dd2 = (dd * dd).max(1e-14);
        let jac = eta_rel * eta_rel * c_i.abs() / dd2;
        Some((visible_normal_pdf(wo, h, &self.alphas) * jac, sf.branch))
    }

    pub fn pdf(&self, wi: Vec3, wo: Vec3) -> f64 {
        if wi.z * wo.z > 0.0 {
            self.reflection_density(wi, wo).map_or(0.0, |(p, b)| b * p)
        } else {
            self.transmission_density(wi, wo).map_or(0.0, |(p, b)| (1.0 - b) * p)
        }
    }

    /// Density of [`DielectricLobe::sample_reflection`]: the reflection
    /// half-vector density without the branch probability factor.
    pub fn pdf_reflection(&self, wi: Vec3, wo: Vec3) -> f64 {
        if wi.z * wo.z <= 0.0 {
            return 0.0;
        }
        self.reflection_density(wi, wo).map_or(0.0, |(p, _)| p)
    }

    /// Density of [`DielectricLobe::sample_transmission`], without the
    /// branch probability factor.
    pub fn pdf_transmission(&self, wi: Vec3, wo: Vec3) -> f64 {
        if wi.z * wo.z >= 0.0 {
            return 0.0;
        }
        self.transmission_density(wi, wo).map_or(0.0, |(p, _)| p)
    }

    pub fn sample(&self, wo: Vec3, rng: &mut impl Rng) -> Option<LobeSample> {
        if wo.z == 0.0 {
            return None;
        }
        if self.index_matched() {
            return Some(LobeSample { wi: -wo, pdf: 0.0, weight: Spectrum3::ONE, delta: true });
        }
        let above = wo.z > 0.0;
        let wo_c = if above { wo } else { mirror_z(wo) };
        let eta_rel = self.eta_rel(wo.z);
        let comp = self.comp_factor(wo.z);
        if self.alphas.effectively_smooth() {
            let sf = self.split_fresnel(wo_c.z, eta_rel, above);
            if rng.random::<f64>() < sf.branch {
                let wi_c = Vec3::new(-wo_c.x, -wo_c.y, wo_c.z);
                let wi = if above { wi_c } else { mirror_z(wi_c) };
                return Some(LobeSample {
                    wi,
                    pdf: 0.0,
                    weight: sf.refl / sf.branch.max(1e-12),
                    delta: true,
                });
            }
            let mu_t = sf.mu_t?;
            let wi_c = Vec3::new(-wo_c.x / eta_rel, -wo_c.y / eta_rel, -mu_t).normalize();
            let wi = if above { wi_c } else { mirror_z(wi_c) };
            return Some(LobeSample {
                wi,
                pdf: 0.0,
                weight: sf.trans / (1.0 - sf.branch).max(1e-12),
                delta: true,
            });
        }
        let (m, pdf_m) = sample_visible_normal(wo_c, &self.alphas, rng);
        if pdf_m <= 0.0 {
            return None;
        }
        let c_om = wo_c.dot(&m).clamp(0.0, 1.0);
        let sf = self.split_fresnel(c_om, eta_rel, above);
        let g1 = smith_g1(wo_c, &self.alphas);
        if rng.random::<f64>() < sf.branch {
            let wi_c = reflect_about(wo_c, m);
            if wi_c.z <= 0.0 {
                return None;
            }
            let g2 = smith_g2(wi_c, wo_c, &self.alphas);
            let wi = if above { wi_c } else { mirror_z(wi_c) };
            Some(LobeSample {
                wi,
                pdf: sf.branch * pdf_m / (4.0 * c_om.max(1e-12)),
                weight: sf.refl * (comp * g2 / (g1 * sf.branch.max(1e-12))),
                delta: false,
            })
        } else {
            let wi_c = refract_dir(wo_c, m, eta_rel)?;
            if wi_c.z >= 0.0 {
                return None;
            }
            let g2 = smith_g2(wi_c, wo_c, &self.alphas);
            let c_i = wi_c.dot(&m);
            let dd = eta_rel * c_i + c_om;
            let jac = eta_rel * eta_rel * c_i.abs() / (dd * dd).max(1e-14);
            let wi = if above { wi_c } else { mirror_z(wi_c) };
            Some(LobeSample {
                wi,
                pdf: (1.0 - sf.branch) * pdf_m * jac,
                weight: sf.trans * (comp * g2 / (g1 * (1.0 - sf.branch).max(1e-12))),
                delta: false,
            })
        }
    }

    /// Forces the reflection branch: the density omits the branch
    /// probability and the weight keeps the Fresnel factor, making the pair
    /// work as a standalone reflection lobe. `None` when the interface is
    /// optically absent.
    pub fn sample_reflection(&self, wo: Vec3, rng: &mut impl Rng) -> Option<LobeSample> {
        if wo.z == 0.0 || self.index_matched() {
            return None;
        }
        let above = wo.z > 0.0;
        let wo_c = if above { wo } else { mirror_z(wo) };
        let eta_rel = self.eta_rel(wo.z);
        let comp = self.comp_factor(wo.z);
        if self.alphas.effectively_smooth() {
            let sf = self.split_fresnel(wo_c.z, eta_rel, above);
            let wi_c = Vec3::new(-wo_c.x, -wo_c.y, wo_c.z);
            let wi = if above { wi_c } else { mirror_z(wi_c) };
            return Some(LobeSample { wi, pdf: 0.0, weight: sf.refl, delta: true });
        }
        let (m, pdf_m) = sample_visible_normal(wo_c, &self.alphas, rng);
        if pdf_m <= 0.0 {
            return None;
        }
        let wi_c = reflect_about(wo_c, m);
        if wi_c.z <= 0.0 {
            return None;
        }
        let c_om = wo_c.dot(&m).clamp(0.0, 1.0);
        let sf = self.split_fresnel(c_om, eta_rel, above);
        let g2 = smith_g2(wi_c, wo_c, &self.alphas);
        let g1 = smith_g1(wo_c, &self.alphas);
        let wi = if above { wi_c } else { mirror_z(wi_c) };
        Some(LobeSample {
            wi,
            pdf: pdf_m / (4.0 * c_om.max(1e-12)),
            weight: sf.refl * (comp * g2 / g1),
            delta: false,
        })
    }

    /// Forces the transmission branch: the density omits the branch
    /// probability and the weight keeps the transmitted fraction. `None`
    /// under total internal reflection.
    pub fn sample_transmission(&self, wo: Vec3, rng: &mut impl Rng) -> Option<LobeSample> {
        if wo.z == 0.0 {
            return None;
        }
        if self.index_matched() {
            return Some(LobeSample { wi: -wo, pdf: 0.0, weight: Spectrum3::ONE, delta: true });
        }
        let above = wo.z > 0.0;
        let wo_c = if above { wo } else { mirror_z(wo) };
        let eta_rel = self.eta_rel(wo.z);
        let comp = self.comp_factor(wo.z);
        if self.alphas.effectively_smooth() {
            let sf = self.split_fresnel(wo_c.z, eta_rel, above);
            let mu_t = sf.mu_t?;
            let wi_c = Vec3::new(-wo_c.x / eta_rel, -wo_c.y / eta_rel, -mu_t).normalize();
            let wi = if above { wi_c } else { mirror_z(wi_c) };
            return Some(LobeSample { wi, pdf: 0.0, weight: sf.trans, delta: true });
        }
        let (m, pdf_m) = sample_visible_normal(wo_c, &self.alphas, rng);
        if pdf_m <= 0.0 {
            return None;
        }
        let c_om = wo_c.dot(&m).clamp(0.0, 1.0);
        let sf = self.split_fresnel(c_om, eta_rel, above);
        let wi_c = refract_dir(wo_c, m, eta_rel)?;
        if wi_c.z >= 0.0 {
            return None;
        }
        let g2 = smith_g2(wi_c, wo_c, &self.alphas);
        let g1 = smith_g1(wo_c, &self.alphas);
        let c_i = wi_c.dot(&m);
        let dd = eta_rel * c_i + c_om;
        let jac = eta_rel * eta_rel * c_i.abs() / (dd * dd).max(1e-14);
        let wi = if above { wi_c } else { mirror_z(wi_c) };
        Some(LobeSample {
            wi,
            pdf: pdf_m * jac,
            weight: sf.trans * (comp * g2 / g1),
            delta: false,
        })
    }

    /// Tinted reflection-only directional albedo, compensation and film
    /// overlay included. The sign of the cosine selects the side.
    pub fn reflection_albedo(&self, mu_o_signed: f64) -> Spectrum3 {
        let split = self.throughput_split(
            mu_o_signed.abs(),
            self.eta_rel(mu_o_signed),
            mu_o_signed >= 0.0,
        );
        split.reflected * self.comp_factor(mu_o_signed)
    }

    /// Per-channel transmitted fraction, compensation included; tint never
    /// applies to transmission.
    pub fn transmission_albedo(&self, mu_o_signed: f64) -> Spectrum3 {
        let split = self.throughput_split(
            mu_o_signed.abs(),
            self.eta_rel(mu_o_signed),
            mu_o_signed >= 0.0,
        );
        split.transmitted * self.comp_factor(mu_o_signed)
    }
}

/// Roughness of the secondary haze lobe derived from the core roughness.
pub fn hazy_roughness(r: f64, xi_h: f64) -> f64 {
    (r + xi_h * (1.0 - r)).clamp(0.0, 1.0)
}

/// Two-lobe specular: a sharp core plus a broad haze, linearly blended.
#[derive(Debug, Clone)]
pub struct HazyConductor {
    pub core: ConductorLobe,
    pub haze: ConductorLobe,
    pub haze_weight: f64,
}

impl HazyConductor {
    pub fn eval(&self, wi: Vec3, wo: Vec3) -> Spectrum3 {
        self.core.eval(wi, wo).lerp(self.haze.eval(wi, wo), self.haze_weight)
    }

    pub fn pdf(&self, wi: Vec3, wo: Vec3) -> f64 {
        (1.0 - self.haze_weight) * self.core.pdf(wi, wo)
            + self.haze_weight * self.haze.pdf(wi, wo)
    }

    pub fn sample(&self, wo: Vec3, rng: &mut impl Rng) -> Option<LobeSample> {
        let pick_haze = rng.random::<f64>() < self.haze_weight;
        let s = if pick_haze {
            self.haze.sample(wo, rng)?
        } else {
            self.core.sample(wo, rng)?
        };
        if s.delta {
            // Chosen with exactly its blend coefficient, so the weight stands.
            return Some(s);
        }
        let pdf = self.pdf(s.wi, wo);
        if pdf <= 0.0 {
            return None;
        }
        let weight = self.eval(s.wi, wo) * (s.wi.z.abs() / pdf);
        Some(LobeSample { wi: s.wi, pdf, weight, delta: false })
    }
}

fn flip_view(w: Vec3) -> Vec3 {
    Vec3::new(-w.x, -w.y, w.z)
}

/// Half-vector of the retro substitution: the base lobe sees the view
/// direction reflected about the normal, so this peaks at the normal when
/// light returns toward the viewer.
pub fn back_half_vector(wi: Vec3, wo: Vec3) -> Vec3 {
    (flip_view(wo) + wi).normalize()
}

/// Retro-reflective wrapper: evaluates the base conductor with the view
/// direction reflected about the shading normal, which swings the lobe's
/// peak from the mirror direction to the source direction.
#[derive(Debug, Clone)]
pub struct RetroConductor {
    pub base: ConductorLobe,
}

impl RetroConductor {
    pub fn eval(&self, wi: Vec3, wo: Vec3) -> Spectrum3 {
        self.base.eval(wi, flip_view(wo))
    }

    pub fn pdf(&self, wi: Vec3, wo: Vec3) -> f64 {
        self.base.pdf(wi, flip_view(wo))
    }

    pub fn sample(&self, wo: Vec3, rng: &mut impl Rng) -> Option<LobeSample> {
        self.base.sample(flip_view(wo), rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn iso(alpha: f64) -> RoughnessAlphas {
        RoughnessAlphas::isotropic(alpha)
    }

    #[test]
    fn roughness_mapping_examples() {
        let a = roughness_to_alphas(0.5, 0.0);
        assert_relative_eq!(a.alpha_t, 0.25, epsilon = 1e-12);
        assert_relative_eq!(a.alpha_b, 0.25, epsilon = 1e-12);
        let b = roughness_to_alphas(0.5, 1.0);
        assert_relative_eq!(b.alpha_t, 0.25 * 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(b.alpha_b, ALPHA_FLOOR, epsilon = 1e-15);
    }

    #[test]
    fn ndf_peak_and_normalization() {
        let alphas = iso(0.25);
        assert_relative_eq!(
            ggx_ndf(Vec3::z(), &alphas),
            1.0 / (std::f64::consts::PI * 0.0625),
            epsilon = 1e-10
        );
        for alphas in [iso(0.1), iso(0.3), iso(1.0), roughness_to_alphas(0.7, 0.6)] {
            let (tn, tw) = gauss_legendre(192);
            let (pn, pw) = gauss_legendre(64);
            let mut total = 0.0;
            for (&xt, &wt) in tn.iter().zip(&tw) {
                let theta = 0.25 * std::f64::consts::PI * (xt + 1.0);
                for (&xp, &wp) in pn.iter().zip(&pw) {
                    let phi = std::f64::consts::PI * (xp + 1.0);
                    let m = Vec3::new(
                        theta.sin() * phi.cos(),
                        theta.sin() * phi.sin(),
                        theta.cos(),
                    );
                    total += wt
                        * wp
                        * 0.25
                        * std::f64::consts::PI
                        * std::f64::consts::PI
                        * ggx_ndf(m, &alphas)
                        * theta.cos()
                        * theta.sin();
                }
            }
            assert!((total - 1.0).abs() < 1e-3, "normalization {total} for {alphas:?}");
        }
    }

    #[test]
    fn ndf_concentrates_as_alpha_vanishes() {
        let alphas = iso(1e-3);
        let one_degree = 1f64.to_radians();
        let (tn, tw) = gauss_legendre(512);
        let mut mass = 0.0;
        for (&xt, &wt) in tn.iter().zip(&tw) {
            let theta = 0.5 * one_degree * (xt + 1.0);
            let m = Vec3::new(theta.sin(), 0.0, theta.cos());
            mass += wt
                * 0.5
                * one_degree
                * 2.0
                * std::f64::consts::PI
                * ggx_ndf(m, &alphas)
                * theta.cos()
                * theta.sin();
        }
        assert!(mass > 0.99, "mass within 1 degree = {mass}");
    }

    #[test]
    fn anisotropic_slice_scales_with_bitangent_alpha() {
        // Along the tangent plane the quadratic form uses alpha_t only, so
        // two lobes sharing alpha_t differ by the constant alpha_b ratio.
        let a1 = RoughnessAlphas { alpha_t: 0.4, alpha_b: 0.2 };
        let a2 = RoughnessAlphas { alpha_t: 0.4, alpha_b: 0.35 };
        for theta in [0.1, 0.4, 0.9, 1.3] {
            let m = Vec3::new(f64::sin(theta), 0.0, f64::cos(theta));
            let ratio = ggx_ndf(m, &a1) / ggx_ndf(m, &a2);
            assert_relative_eq!(ratio, a2.alpha_b / a1.alpha_b, epsilon = 1e-12);
        }
    }

    #[test]
    fn smith_limits() {
        let tiny = iso(1e-4);
        let w = Vec3::new(0.6, 0.3, 0.74).normalize();
        assert_relative_eq!(smith_g1(w, &tiny), 1.0, epsilon = 1e-6);
        assert_relative_eq!(smith_g2(Vec3::z(), Vec3::z(), &iso(0.8)), 1.0, epsilon = 1e-12);
        let rough = iso(0.8);
        let g = smith_g2(w, Vec3::new(-0.2, 0.5, 0.84).normalize(), &rough);
        assert!((0.0..=1.0).contains(&g));
    }

    #[test]
    fn vndf_sampling_matches_density() {
        let alphas = iso(0.5);
        let wo = Vec3::new((1.0f64 - 0.49).sqrt(), 0.0, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000usize;
        const NZ: usize = 12;
        const NP: usize = 8;
        let mut counts = [[0usize; NP]; NZ];
        for _ in 0..n {
            let (m, _) = sample_visible_normal(wo, &alphas, &mut rng);
            let iz = ((m.z.clamp(0.0, 1.0 - 1e-12)) * NZ as f64) as usize;
            let phi = m.y.atan2(m.x).rem_euclid(2.0 * std::f64::consts::PI);
            let ip = ((phi / (2.0 * std::f64::consts::PI)) * NP as f64) as usize;
            counts[iz][ip.min(NP - 1)] += 1;
        }
        // Expected mass per bin by quadrature over (z, phi).
        let (zn, zw) = gauss_legendre(16);
        let (pn, pw) = gauss_legendre(16);
        let mut chi2 = 0.0;
        let mut dof = 0usize;
        let mut pooled_obs = 0.0;
        let mut pooled_exp = 0.0;
        for iz in 0..NZ {
            let z0 = iz as f64 / NZ as f64;
            let z1 = (iz + 1) as f64 / NZ as f64;
            for ip in 0..NP {
                let p0 = ip as f64 / NP as f64 * 2.0 * std::f64::consts::PI;
                let p1 = (ip + 1) as f64 / NP as f64 * 2.0 * std::f64::consts::PI;
                let mut mass = 0.0;
                for (&xz, &wz) in zn.iter().zip(&zw) {
                    let z = 0.5 * (z0 + z1) + 0.5 * (z1 - z0) * xz;
                    for (&xp, &wp) in pn.iter().zip(&pw) {
                        let phi = 0.5 * (p0 + p1) + 0.5 * (p1 - p0) * xp;
                        let s = (1.0 - z * z).max(0.0).sqrt();
                        let m = Vec3::new(s * phi.cos(), s * phi.sin(), z);
                        mass += 0.25
                            * wz
                            * wp
                            * (z1 - z0)
                            * (p1 - p0)
                            * visible_normal_pdf(wo, m, &alphas);
                    }
                }
                let expected = mass * n as f64;
                let observed = counts[iz][ip] as f64;
                if expected >= 5.0 {
                    chi2 += (observed - expected).powi(2) / expected;
                    dof += 1;
                } else {
                    pooled_obs += observed;
                    pooled_exp += expected;
                }
            }
        }
        if pooled_exp > 0.0 {
            chi2 += (pooled_obs - pooled_exp).powi(2) / pooled_exp.max(1e-9);
            dof += 1;
        }
        let dist = ChiSquared::new((dof - 1) as f64).unwrap();
        let p = 1.0 - dist.cdf(chi2);
        assert!(p > 0.01, "chi2 {chi2} dof {dof} p {p}");
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let lobe = ConductorLobe {
            alphas: iso(0.4),
            f0: Spectrum3::splat(0.9),
            tint: Spectrum3::ONE,
            xi_s: 1.0,
            compensation: false,
            film: None,
        };
        let wo = Vec3::new(0.3, -0.1, 0.948).normalize();
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let mut accepted = 0;
        for _ in 0..64 {
            let sa = lobe.sample(wo, &mut a);
            let sb = lobe.sample(wo, &mut b);
            assert_eq!(sa.is_some(), sb.is_some());
            if let (Some(sa), Some(sb)) = (sa, sb) {
                assert_eq!(sa.wi, sb.wi);
                accepted += 1;
            }
        }
        assert!(accepted > 32, "sampler rejected too often");
    }

    #[test]
    fn conductor_single_scatter_is_reciprocal() {
        let lobe = ConductorLobe {
            alphas: roughness_to_alphas(0.6, 0.4),
            f0: Spectrum3::new(0.9, 0.6, 0.3),
            tint: Spectrum3::new(0.95, 1.0, 0.9),
            xi_s: 1.3,
            compensation: false,
            film: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let a = crate::math::cosine_sample_hemisphere(rng.random(), rng.random());
            let b = crate::math::cosine_sample_hemisphere(rng.random(), rng.random());
            let fab = lobe.eval(a, b);
            let fba = lobe.eval(b, a);
            for k in 0..3 {
                assert!(
                    (fab[k] - fba[k]).abs() <= 1e-9 * (1.0 + fab[k].abs()),
                    "{fab:?} vs {fba:?}"
                );
            }
        }
    }

    #[test]
    fn conductor_furnace_with_compensation() {
        let lobe = ConductorLobe {
            alphas: iso(1.0),
            f0: Spectrum3::ONE,
            tint: Spectrum3::ONE,
            xi_s: 1.0,
            compensation: true,
            film: None,
        };
        for mu in [0.08, 0.2, 0.4, 0.6, 0.8, 1.0] {
            let e = lobe.directional_albedo(mu);
            for k in 0..3 {
                assert!((e[k] - 1.0).abs() < 0.01, "mu={mu} albedo={:?}", e);
            }
        }
        // Monte Carlo via the lobe's own sampler agrees.
        let wo = direction_from_mu(0.6);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            if let Some(s) = lobe.sample(wo, &mut rng) {
                sum += s.weight[0];
            }
        }
        assert!((sum / n as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn conductor_compensation_monotone() {
        // Corrected albedo is never below the uncorrected one.
        for alpha in [0.2, 0.5, 1.0] {
            for mu in [0.1, 0.5, 0.9] {
                let base = ConductorLobe {
                    alphas: iso(alpha),
                    f0: Spectrum3::splat(0.7),
                    tint: Spectrum3::ONE,
                    xi_s: 1.0,
                    compensation: false,
                    film: None,
                };
                let comp = ConductorLobe { compensation: true, ..base.clone() };
                assert!(
                    comp.directional_albedo(mu)[0] >= base.directional_albedo(mu)[0] - 1e-12
                );
            }
        }
    }

    #[test]
    fn single_scatter_table_tracks_direct_quadrature() {
        let t = single_scatter_table();
        assert_relative_eq!(t.lookup(0.5, 0.0), 1.0, epsilon = 1e-12);
        assert!(t.lookup(0.8, 0.2) > t.lookup(0.8, 0.8));
        for (mu, alpha) in [(0.37, 0.43), (0.81, 0.95), (0.13, 0.61)] {
            let direct = ggx_reflection_albedo_nofresnel(mu, &iso(alpha));
            assert!((t.lookup(mu, alpha) - direct).abs() < 2e-3);
        }
    }

    #[test]
    fn index_matched_dielectric_passes_straight_through() {
        let lobe = DielectricLobe::new(iso(0.5), 1.0, 1.0, Spectrum3::ONE);
        let wo = Vec3::new(0.4, 0.2, 0.894).normalize();
        let wi = Vec3::new(-0.3, 0.1, 0.95).normalize();
        assert_eq!(lobe.eval(wi, wo), Spectrum3::ZERO);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = lobe.sample(wo, &mut rng).unwrap();
        assert!(s.delta);
        assert_relative_eq!((s.wi + wo).norm(), 0.0, epsilon = 1e-12);
        assert_eq!(s.weight, Spectrum3::ONE);
    }

    #[test]
    fn smooth_dielectric_branches_follow_fresnel() {
        let lobe = DielectricLobe::new(iso(0.0), 1.5, 1.0, Spectrum3::ONE);
        let mu_o = 0.5;
        let wo = direction_from_mu(mu_o);
        let f = crate::fresnel::fresnel_dielectric(mu_o, 1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 20_000;
        let mut reflects = 0usize;
        for _ in 0..n {
            let s = lobe.sample(wo, &mut rng).unwrap();
            assert!(s.delta);
            assert_eq!(s.weight, Spectrum3::ONE);
            if s.wi.z > 0.0 {
                reflects += 1;
                assert_relative_eq!(s.wi.x, -wo.x, epsilon = 1e-12);
                assert_relative_eq!(s.wi.z, wo.z, epsilon = 1e-12);
            } else {
                let mu_t = refract_cos(mu_o, 1.5).unwrap();
                assert_relative_eq!(s.wi.z, -mu_t, epsilon = 1e-12);
                // Snell: transverse component shrinks by the index ratio.
                assert_relative_eq!(s.wi.x, -wo.x / 1.5, epsilon = 1e-12);
            }
        }
        let frac = reflects as f64 / n as f64;
        let sigma = (f * (1.0 - f) / n as f64).sqrt();
        assert!((frac - f).abs() < 4.0 * sigma + 1e-3);
    }

    #[test]
    fn rough_dielectric_closes_furnace_with_compensation() {
        let lobe =
            DielectricLobe::new(iso(1.0), 1.5, 1.0, Spectrum3::ONE).with_compensation();
        for mu in [0.15, 0.4, 0.75, 1.0, -0.25, -0.6, -0.95] {
            let total = lobe.reflection_albedo(mu)[0] + lobe.transmission_albedo(mu)[0];
            assert!((total - 1.0).abs() < 2e-3, "mu={mu} total={total}");
        }
        // Independent Monte Carlo check through the sampler, both sides.
        for (mu, seed) in [(0.35, 7u64), (-0.6, 8u64)] {
            let wo = if mu >= 0.0 {
                direction_from_mu(mu)
            } else {
                mirror_z(direction_from_mu(-mu))
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 200_000;
            let mut sum = 0.0;
            for _ in 0..n {
                if let Some(s) = lobe.sample(wo, &mut rng) {
                    sum += s.weight[0];
                }
            }
            let mean = sum / n as f64;
            assert!((mean - 1.0).abs() < 0.01, "mu={mu} mean={mean}");
        }
    }

    #[test]
    fn uncompensated_lobe_never_gains_energy() {
        for (alpha, eta) in [(0.3, 1.5), (0.7, 1.5), (1.0, 2.4), (0.5, 1.0 / 1.5)] {
            let lobe = DielectricLobe::new(iso(alpha), eta, 1.0, Spectrum3::ONE);
            for mu in [0.1, 0.3, 0.6, 0.9, -0.2, -0.7] {
                let total = lobe.reflection_albedo(mu)[0] + lobe.transmission_albedo(mu)[0];
                assert!(total <= 1.0 + 1e-3, "alpha={alpha} eta={eta} mu={mu} {total}");
            }
        }
    }

    #[test]
    fn dielectric_eval_sample_pdf_agree() {
        for (eta, alpha, side) in [
            (1.5, 0.6, 1.0),
            (1.5, 0.6, -1.0),
            (2.4, 0.3, 1.0),
            (1.0 / 1.5, 0.8, 1.0),
        ] {
            let lobe = DielectricLobe::new(iso(alpha), eta, 1.0, Spectrum3::new(0.9, 0.8, 1.0))
                .with_compensation();
            let wo = {
                let d = direction_from_mu(0.55);
                if side > 0.0 { d } else { mirror_z(d) }
            };
            let mut rng = ChaCha8Rng::seed_from_u64(31);
            for _ in 0..400 {
                let Some(s) = lobe.sample(wo, &mut rng) else { continue };
                assert!(!s.delta);
                let pdf = lobe.pdf(s.wi, wo);
                assert_relative_eq!(pdf, s.pdf, max_relative = 1e-9);
                let val = lobe.eval(s.wi, wo);
                let recon = val * (s.wi.z.abs() / pdf);
                for k in 0..3 {
                    assert!(
                        (recon[k] - s.weight[k]).abs() <= 1e-9 * (1.0 + s.weight[k]),
                        "recon {recon:?} weight {:?}",
                        s.weight
                    );
                }
            }
        }
    }

    #[test]
    fn conductor_eval_sample_pdf_agree() {
        let lobe = ConductorLobe {
            alphas: roughness_to_alphas(0.5, 0.3),
            f0: Spectrum3::new(0.8, 0.7, 0.4),
            tint: Spectrum3::ONE,
            xi_s: 1.0,
            compensation: true,
            film: None,
        };
        let wo = Vec3::new(0.45, 0.15, 0.88).normalize();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..400 {
            let Some(s) = lobe.sample(wo, &mut rng) else { continue };
            let pdf = lobe.pdf(s.wi, wo);
            assert_relative_eq!(pdf, s.pdf, max_relative = 1e-9);
            let recon = lobe.eval(s.wi, wo) * (s.wi.z / pdf);
            for k in 0..3 {
                assert!((recon[k] - s.weight[k]).abs() <= 1e-9 * (1.0 + s.weight[k]));
            }
        }
    }

    #[test]
    fn forced_branch_samplers_agree_with_their_eval_and_pdf() {
        for side in [1.0, -1.0] {
            let lobe = DielectricLobe::new(iso(0.5), 1.5, 1.0, Spectrum3::new(0.9, 0.8, 1.0))
                .with_compensation();
            // Inside a denser medium stay within the critical cone so forced
            // transmission is not dominated by total internal reflection.
            let wo = {
                let d = direction_from_mu(if side > 0.0 { 0.62 } else { 0.9 });
                if side > 0.0 { d } else { mirror_z(d) }
            };
            let mut rng = ChaCha8Rng::seed_from_u64(41);
            let (mut refl, mut trans) = (0, 0);
            for _ in 0..300 {
                if let Some(s) = lobe.sample_reflection(wo, &mut rng) {
                    assert!(s.wi.z * wo.z > 0.0, "forced reflection crossed sides");
                    let pdf = lobe.pdf_reflection(s.wi, wo);
                    assert_relative_eq!(pdf, s.pdf, max_relative = 1e-9);
                    let recon = lobe.eval_reflection(s.wi, wo) * (s.wi.z.abs() / pdf);
                    for k in 0..3 {
                        assert!((recon[k] - s.weight[k]).abs() <= 1e-9 * (1.0 + s.weight[k]));
                    }
                    refl += 1;
                }
                if let Some(s) = lobe.sample_transmission(wo, &mut rng) {
                    assert!(s.wi.z * wo.z < 0.0, "forced transmission stayed on one side");
                    let pdf = lobe.pdf_transmission(s.wi, wo);
                    assert_relative_eq!(pdf, s.pdf, max_relative = 1e-9);
                    let recon = lobe.eval_transmission(s.wi, wo) * (s.wi.z.abs() / pdf);
                    for k in 0..3 {
                        assert!((recon[k] - s.weight[k]).abs() <= 1e-9 * (1.0 + s.weight[k]));
                    }
                    trans += 1;
                }
            }
            assert!(refl > 150 && trans > 150, "refl {refl} trans {trans}");
        }
    }

    #[test]
    fn eval_is_the_sum_of_its_branch_halves() {
        let lobe =
            DielectricLobe::new(iso(0.4), 1.5, 1.0, Spectrum3::ONE).with_compensation();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let wo = direction_from_mu(0.7);
        for _ in 0..200 {
            let Some(s) = lobe.sample(wo, &mut rng) else { continue };
            let total = lobe.eval(s.wi, wo);
            let split = lobe.eval_reflection(s.wi, wo) + lobe.eval_transmission(s.wi, wo);
            for k in 0..3 {
                assert_relative_eq!(total[k], split[k], max_relative = 1e-12);
            }
            // Exactly one half is active for any direction pair.
            let r = lobe.eval_reflection(s.wi, wo);
            let t = lobe.eval_transmission(s.wi, wo);
            assert!(r.max_component() == 0.0 || t.max_component() == 0.0);
        }
    }

    #[test]
    fn fresnel_curve_interpolates_its_nodes() {
        let curve = FresnelCurve::tabulate(|mu| Spectrum3::new(mu, mu * mu, 1.0 - mu));
        for k in 0..64 {
            let mu = (k as f64 + 0.5) / 64.0;
            let v = curve.eval(mu);
            assert_relative_eq!(v[0], mu, epsilon = 1e-12);
            assert_relative_eq!(v[1], mu * mu, epsilon = 1e-12);
            assert_relative_eq!(v[2], 1.0 - mu, epsilon = 1e-12);
        }
        // Constant curve: exact hemispherical mean and flat extrapolation.
        let flat = FresnelCurve::tabulate(|_| Spectrum3::splat(1.0));
        assert_eq!(flat.hemispherical_mean()[0], 1.0);
        assert_eq!(flat.eval(0.0)[1], 1.0);
        assert_eq!(flat.eval(1.0)[2], 1.0);
    }

    #[test]
    fn film_overlay_keeps_dielectric_energy_closed() {
        // A constant overlay changes the reflection/transmission split but
        // not the total, so the compensated interface still closes to 1.
        let film = FilmFresnel {
            weight: 1.0,
            above: FresnelCurve::tabulate(|_| Spectrum3::splat(0.3)),
            below: Some(FresnelCurve::tabulate(|mu| {
                let f = crate::fresnel::fresnel_dielectric(mu, 1.0 / 1.5);
                Spectrum3::splat(f.max(0.3))
            })),
        };
        let lobe = DielectricLobe::new(iso(0.7), 1.5, 1.0, Spectrum3::ONE)
            .with_film(film)
            .with_compensation();
        for mu in [0.2, 0.5, 0.9] {
            let total = lobe.reflection_albedo(mu) + lobe.transmission_albedo(mu);
            for k in 0..3 {
                assert!((total[k] - 1.0).abs() < 0.02, "mu {mu} total {total:?}");
            }
        }
        // The bare interface reflects a few percent near normal; the overlay
        // multiplies that severalfold.
        let bare = DielectricLobe::new(iso(0.7), 1.5, 1.0, Spectrum3::ONE).with_compensation();
        let r = lobe.reflection_albedo(0.9);
        assert!(
            r.min_component() > 3.0 * bare.reflection_albedo(0.9).max_component(),
            "overlay ignored: {r:?}"
        );
    }

    #[test]
    fn film_overlay_tints_the_smooth_transmission_delta() {
        let film = FilmFresnel {
            weight: 1.0,
            above: FresnelCurve::tabulate(|_| Spectrum3::new(0.5, 0.1, 0.3)),
            below: None,
        };
        let lobe =
            DielectricLobe::new(iso(0.0), 1.5, 1.0, Spectrum3::ONE).with_film(film);
        let wo = direction_from_mu(0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = lobe.sample_transmission(wo, &mut rng).unwrap();
        assert!(s.delta);
        assert_relative_eq!(s.weight[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(s.weight[1], 0.9, epsilon = 1e-12);
        assert_relative_eq!(s.weight[2], 0.7, epsilon = 1e-12);
        let r = lobe.sample_reflection(wo, &mut rng).unwrap();
        assert!(r.delta);
        assert_relative_eq!(r.weight[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn mirror_conductor_under_unit_film_keeps_unit_albedo() {
        // A film over a perfect reflector reflects everything itself, so the
        // blended Fresnel stays 1 and the furnace closes.
        let film = FilmFresnel {
            weight: 1.0,
            above: FresnelCurve::tabulate(|_| Spectrum3::ONE),
            below: None,
        };
        let lobe = ConductorLobe {
            alphas: iso(0.8),
            f0: Spectrum3::ONE,
            tint: Spectrum3::ONE,
            xi_s: 1.0,
            compensation: true,
            film: Some(Box::new(film)),
        };
        for mu in [0.1, 0.5, 1.0] {
            let e = lobe.directional_albedo(mu);
            for k in 0..3 {
                assert!((e[k] - 1.0).abs() < 0.01, "mu {mu} albedo {e:?}");
            }
        }
    }

    #[test]
    fn hazy_blend_softens_peak() {
        let mk = |r: f64| ConductorLobe {
            alphas: roughness_to_alphas(r, 0.0),
            f0: Spectrum3::splat(1.0),
            tint: Spectrum3::ONE,
            xi_s: 1.0,
            compensation: false,
            film: None,
        };
        assert_relative_eq!(hazy_roughness(0.3, 0.0), 0.3);
        assert_relative_eq!(hazy_roughness(0.0, 1.0), 1.0);
        let wo = direction_from_mu(0.866);
        let wi = Vec3::new(-wo.x, -wo.y, wo.z);
        let mut last = f64::INFINITY;
        for xi_h in [0.0, 0.2, 0.4, 0.6] {
            let blend = HazyConductor {
                core: mk(0.3),
                haze: mk(hazy_roughness(0.3, xi_h)),
                haze_weight: 0.5,
            };
            let peak = blend.eval(wi, wo)[0];
            assert!(peak.is_finite() && peak > 0.0);
            assert!(peak <= last, "peak should soften as haze spreads");
            last = peak;
        }
    }

    #[test]
    fn retro_peaks_back_at_the_viewer_and_keeps_albedo() {
        let base = ConductorLobe {
            alphas: iso(0.4),
            f0: Spectrum3::splat(0.9),
            tint: Spectrum3::ONE,
            xi_s: 1.0,
            compensation: false,
            film: None,
        };
        let retro = RetroConductor { base: base.clone() };
        let wo = direction_from_mu(0.8);
        assert_relative_eq!((back_half_vector(wo, wo) - Vec3::z()).norm(), 0.0, epsilon = 1e-12);
        // Response at the viewer exceeds the mirror direction's.
        let mirror = Vec3::new(-wo.x, -wo.y, wo.z);
        assert!(retro.eval(wo, wo)[0] > retro.eval(mirror, wo)[0]);
        // Reciprocity carries over from the base lobe.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = crate::math::cosine_sample_hemisphere(rng.random(), rng.random());
            let b = crate::math::cosine_sample_hemisphere(rng.random(), rng.random());
            let fab = retro.eval(a, b)[0];
            let fba = retro.eval(b, a)[0];
            assert!((fab - fba).abs() <= 1e-9 * (1.0 + fab.abs()));
        }
        // Albedo matches the base lobe (the substitution only redirects it).
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            if let Some(s) = retro.sample(wo, &mut rng) {
                sum += s.weight[0];
            }
        }
        let base_albedo = base.directional_albedo(0.8)[0];
        assert!((sum / n as f64 - base_albedo).abs() < 0.02 * base_albedo.max(0.1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn roughness_mapping_preserves_mean_square_slope(
            r in 0.1..1.0f64,
            a in 0.0..0.95f64,
        ) {
            let al = roughness_to_alphas(r, a);
            let lhs = al.alpha_t * al.alpha_t + al.alpha_b * al.alpha_b;
            prop_assert!((lhs - 2.0 * r.powi(4)).abs() < 1e-12);
        }

        #[test]
        fn conductor_albedo_bounded(
            alpha in 0.05..1.0f64,
            f0 in 0.0..1.0f64,
            tint in 0.5..1.0f64,
            mu in 0.05..1.0f64,
        ) {
            let lobe = ConductorLobe {
                alphas: iso(alpha),
                f0: Spectrum3::splat(f0),
                tint: Spectrum3::splat(tint),
                xi_s: 1.0,
                compensation: true,
                film: None,
            };
            let e = lobe.directional_albedo(mu);
            for k in 0..3 {
                prop_assert!(e[k] <= 1.0 + 1e-2, "albedo {e:?}");
            }
        }
    }
}
