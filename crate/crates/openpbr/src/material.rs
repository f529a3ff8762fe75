//! Assembles validated parameters and shading geometry into an immutable
//! mixture of BSDF lobes. The mixture owns per-view albedo tables so the
//! layering weights can be rebuilt at any outgoing direction, evaluates and
//! samples with one-sample multiple importance sampling, and carries the
//! surface emission. Thin-walled surfaces swap the interior transports for
//! sheet lobes; everything else stays shared.

use crate::coat::{
    base_roughness_estimate, coat_roughen, darkening_factor, surrounding_eta, CoatContext,
};
use crate::diffuse::{eon_compensated_albedo, DiffuseLobe, EonParams};
use crate::fresnel::{normal_incidence_reflectance, specular_reflectance};
use crate::fuzz::{fuzz_albedo, fuzz_normal, fuzz_roughen, FuzzLobe, FuzzParams};
use crate::math::{cosine_sample_hemisphere, lerp, Frame, Vec3};
use crate::microfacet::{
    ggx_ndf, roughness_to_alphas, sample_visible_normal, sample_visible_normal_square,
    smith_g1, smith_g2, visible_normal_pdf, ConductorLobe, DielectricLobe, FilmFresnel,
    FresnelCurve, LobeSample, RoughnessAlphas,
};
use crate::params::ValidatedMaterial;
use crate::spectra::{Spectrum3, CHANNEL_WAVELENGTHS_NM};
use crate::thinfilm::{effective_complex_ior, film_reflectance_spectrum};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// Local frames the lobes shade in, plus the ray's relationship to the
/// surface. The fuzz frame follows the coat normal by coat presence; the
/// base frame carries the cosine convention for sampling weights.
#[derive(Debug, Clone, Copy)]
pub struct ShadingGeometry {
    pub base: Frame,
    pub coat: Frame,
    pub fuzz: Frame,
    /// True when the ray arrives from the ambient side.
    pub entering: bool,
    /// Refractive index of the surrounding medium.
    pub ambient_ior: f64,
}

impl ShadingGeometry {
    /// Z-up frames, entering from vacuum. The reference configuration for
    /// tests and furnace runs.
    pub fn canonical() -> Self {
        let frame = Frame::from_normal(Vec3::new(0.0, 0.0, 1.0));
        ShadingGeometry {
            base: frame,
            coat: frame,
            fuzz: frame,
            entering: true,
            ambient_ior: 1.0,
        }
    }

    /// Builds the frames from the material's optional shading vectors,
    /// falling back to the given geometric frame. Vectors are interpreted in
    /// the same space as `geo_normal`/`geo_tangent`.
    pub fn from_material(
        m: &ValidatedMaterial,
        geo_normal: Vec3,
        geo_tangent: Vec3,
        entering: bool,
        ambient_ior: f64,
    ) -> Self {
        let p = &m.params;
        let n_base = p.geometry_normal.unwrap_or(geo_normal).normalize();
        let t_base = p.geometry_tangent.unwrap_or(geo_tangent);
        let n_coat = p.geometry_coat_normal.unwrap_or(n_base).normalize();
        let t_coat = p.geometry_coat_tangent.unwrap_or(t_base);
        let n_fuzz = fuzz_normal(n_base, n_coat, p.coat_weight);
        ShadingGeometry {
            base: Frame::from_normal_tangent(n_base, t_base),
            coat: Frame::from_normal_tangent(n_coat, t_coat),
            fuzz: Frame::from_normal_tangent(n_fuzz, t_base),
            entering,
            ambient_ior,
        }
    }
}

/// Mirrors a frame through the surface plane, keeping the tangent so
/// anisotropy alignment survives.
fn mirror_frame(f: Frame) -> Frame {
    Frame { t: f.t, b: -f.b, n: -f.n }
}

/// Public identity of a mixture entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LobeKind {
    Transparent,
    Fuzz,
    Coat,
    Conductor,
    SpecularR,
    SpecularT,
    Diffuse,
    SssProxy,
}

/// Internal role: finer than [`LobeKind`] because the thin-walled mode maps
/// several bodies onto the same public kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Transparent,
    Fuzz,
    Coat,
    Conductor,
    SpecR,
    SpecT,
    Diffuse,
    Sss,
    Sheet,
    SheetDiffR,
    SheetDiffT,
}

impl Role {
    fn kind(self) -> LobeKind {
        match self {
            Role::Transparent => LobeKind::Transparent,
            Role::Fuzz => LobeKind::Fuzz,
            Role::Coat => LobeKind::Coat,
            Role::Conductor => LobeKind::Conductor,
            Role::SpecR => LobeKind::SpecularR,
            Role::SpecT | Role::Sheet => LobeKind::SpecularT,
            Role::Diffuse => LobeKind::Diffuse,
            Role::Sss | Role::SheetDiffR | Role::SheetDiffT => LobeKind::SssProxy,
        }
    }
}

/// Which shading frame a lobe lives in.
#[derive(Debug, Clone, Copy)]
enum FrameSel {
    Base,
    Coat,
    Fuzz,
}

const MU_RES: usize = 32;

/// Directional albedo table on view-cosine nodes (k + 1/2)/32, linearly
/// interpolated with flat extrapolation at the ends.
#[derive(Debug, Clone)]
struct MuTable {
    v: [Spectrum3; MU_RES],
}

impl MuTable {
    fn zero() -> Self {
        MuTable { v: [Spectrum3::ZERO; MU_RES] }
    }

    fn build(f: impl Fn(f64) -> Spectrum3) -> Self {
        let mut v = [Spectrum3::ZERO; MU_RES];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = f((k as f64 + 0.5) / MU_RES as f64);
        }
        MuTable { v }
    }

    fn eval(&self, mu: f64) -> Spectrum3 {
        let x = mu.abs().clamp(0.0, 1.0) * MU_RES as f64 - 0.5;
        let ix = (x.floor().max(0.0) as usize).min(MU_RES - 2);
        let t = (x - ix as f64).clamp(0.0, 1.0);
        self.v[ix].lerp(self.v[ix + 1], t)
    }
}

/// Per-material albedo tables the layering weights read at evaluation time.
/// Entries for absent lobes stay zero and are never consulted.
#[derive(Debug, Clone)]
struct Tables {
    e_coat: MuTable,
    e_spec_r_out: MuTable,
    e_spec_r_in: MuTable,
    e_spec_t_out: MuTable,
    e_spec_t_in: MuTable,
    e_conductor: MuTable,
    /// Reflected-back fraction of the base substrate, feeding coat darkening.
    e_base: MuTable,
    e_sheet: MuTable,
}

impl Tables {
    fn zero() -> Self {
        Tables {
            e_coat: MuTable::zero(),
            e_spec_r_out: MuTable::zero(),
            e_spec_r_in: MuTable::zero(),
            e_spec_t_out: MuTable::zero(),
            e_spec_t_in: MuTable::zero(),
            e_conductor: MuTable::zero(),
            e_base: MuTable::zero(),
            e_sheet: MuTable::zero(),
        }
    }

    fn e_spec_r(&self, mu_signed: f64) -> Spectrum3 {
        if mu_signed >= 0.0 {
            self.e_spec_r_out.eval(mu_signed)
        } else {
            self.e_spec_r_in.eval(mu_signed)
        }
    }

    fn e_spec_t(&self, mu_signed: f64) -> Spectrum3 {
        if mu_signed >= 0.0 {
            self.e_spec_t_out.eval(mu_signed)
        } else {
            self.e_spec_t_in.eval(mu_signed)
        }
    }
}

/// Infinitesimally thin dielectric sheet. Both interfaces collapse onto one
/// plane, so the interior bounce ladder sums in closed form: per facet
/// cosine, reflection picks up `F + F(1-F)^2 A^2 / (1 - F^2 A^2)` and
/// transmission `(1-F)^2 A / (1 - F^2 A^2)`, where `A` is the per-channel
/// interior transmittance along the refracted slant. Transmission leaves
/// parallel to the incident ray; the rough lobe mirrors the reflection
/// geometry with a widened roughness for the double crossing.
#[derive(Debug, Clone)]
pub struct SheetLobe {
    alphas_r: RoughnessAlphas,
    alphas_t: RoughnessAlphas,
    eta: f64,
    xi_s: f64,
    /// Normal-incidence interior transmittance.
    absorption: Spectrum3,
}

impl SheetLobe {
    pub fn new(roughness: f64, anisotropy: f64, eta: f64, xi_s: f64, absorption: Spectrum3) -> Self {
        // Two rough crossings: slope variances add in the quartic domain.
        let r_t = (2.0 * roughness.powi(4)).min(1.0).powf(0.25);
        SheetLobe {
            alphas_r: roughness_to_alphas(roughness, anisotropy),
            alphas_t: roughness_to_alphas(r_t, anisotropy),
            eta,
            xi_s,
            absorption: absorption.clamp(0.0, 1.0),
        }
    }

    /// Reflected and transmitted factors of the bounce ladder for one facet
    /// cosine. Total internal reflection returns everything to the top.
    fn split(&self, c: f64) -> (Spectrum3, Spectrum3) {
        let fres = specular_reflectance(c.clamp(0.0, 1.0), self.eta, self.xi_s);
        let f = fres.f;
        let Some(mu_t) = fres.mu_t else {
            return (Spectrum3::splat(f), Spectrum3::ZERO);
        };
        let slant = 1.0 / mu_t.max(1e-3);
        let r = self.absorption.map(|a| {
            let am = a.powf(slant);
            let den = (1.0 - f * f * am * am).max(1e-9);
            f + f * (1.0 - f) * (1.0 - f) * am * am / den
        });
        let t = self.absorption.map(|a| {
            let am = a.powf(slant);
            let den = (1.0 - f * f * am * am).max(1e-9);
            (1.0 - f) * (1.0 - f) * am / den
        });
        (r, t)
    }

    fn smooth(&self) -> bool {
        self.alphas_r.effectively_smooth()
    }

    /// Probability of picking the reflection branch when sampling.
    fn branch(&self, mu_o: f64) -> f64 {
        let (r, t) = self.split(mu_o);
        let (rm, tm) = (r.mean(), t.mean());
        if rm + tm <= 0.0 {
            return 1.0;
        }
        rm / (rm + tm)
    }

    pub fn eval(&self, wi: Vec3, wo: Vec3) -> Spectrum3 {
        if self.smooth() || wi.z == 0.0 || wo.z == 0.0 {
            return Spectrum3::ZERO;
        }
        // The wall is symmetric: orient so the view is on top.
        let (wi, wo) = if wo.z > 0.0 {
            (wi, wo)
        } else {
            (Vec3::new(wi.x, wi.y, -wi.z), Vec3::new(wo.x, wo.y, -wo.z))
        };
        let reflecting = wi.z > 0.0;
        let wi_m = if reflecting { wi } else { Vec3::new(wi.x, wi.y, -wi.z) };
        let alphas = if reflecting { &self.alphas_r } else { &self.alphas_t };
        let h = (wi_m + wo).normalize();
        let c_om = wo.dot(&h);
        if c_om <= 0.0 || wi_m.z <= 0.0 {
            return Spectrum3::ZERO;
        }
        let (r, t) = self.split(c_om);
        let factor = if reflecting { r } else { t };
        let d = ggx_ndf(h, alphas);
        let g2 = smith_g2(wi_m, wo, alphas);
        factor * (d * g2 / (4.0 * wi_m.z * wo.z))
    }

    pub fn pdf(&self, wi: Vec3, wo: Vec3) -> f64 {
        if self.smooth() || wi.z == 0.0 || wo.z == 0.0 {
            return 0.0;
        }
        let (wi, wo) = if wo.z > 0.0 { (wi, wo) } else { (Vec3::new(wi.x, wi.y, -wi.z), Vec3::new(wo.x, wo.y, -wo.z)) };
        let reflecting = wi.z > 0.0;
        let wi_m = if reflecting { wi } else { Vec3::new(wi.x, wi.y, -wi.z) };
        let alphas = if reflecting { &self.alphas_r } else { &self.alphas_t };
        let h = (wi_m + wo).normalize();
        let c_om = wo.dot(&h);
        if c_om <= 0.0 || wi_m.z <= 0.0 {
            return 0.0;
        }
        let q = self.branch(wo.z);
        let branch = if reflecting { q } else { 1.0 - q };
        branch * visible_normal_pdf(wo, h, alphas) / (4.0 * c_om.max(1e-12))
    }

    pub fn sample(&self, wo: Vec3, rng: &mut impl Rng) -> Option<LobeSample> {
        if wo.z == 0.0 {
            return None;
        }
        let flip = wo.z < 0.0;
        let wo_c = if flip { Vec3::new(wo.x, wo.y, -wo.z) } else { wo };
        let q = self.branch(wo_c.z);
        let reflecting = rng.random::<f64>() < q;
        if self.smooth() {
            let (r, t) = self.split(wo_c.z);
            let wi_c = if reflecting {
                Vec3::new(-wo_c.x, -wo_c.y, wo_c.z)
            } else {
                -wo_c
            };
            let weight = if reflecting {
                r * (1.0 / q.max(1e-12))
            } else {
                t * (1.0 / (1.0 - q).max(1e-12))
            };
            let wi = if flip { Vec3::new(wi_c.x, wi_c.y, -wi_c.z) } else { wi_c };
            return Some(LobeSample { wi, pdf: 0.0, weight, delta: true });
        }
        let alphas = if reflecting { &self.alphas_r } else { &self.alphas_t };
        let (m, pdf_m) = sample_visible_normal(wo_c, alphas, rng);
        if pdf_m <= 0.0 {
            return None;
        }
        let c_om = wo_c.dot(&m).clamp(0.0, 1.0);
        let wi_r = m * (2.0 * c_om) - wo_c;
        if wi_r.z <= 0.0 {
            return None;
        }
        let (r, t) = self.split(c_om);
        let g2 = smith_g2(wi_r, wo_c, alphas);
        let g1 = smith_g1(wo_c, alphas);
        let (factor, branch) = if reflecting { (r, q) } else { (t, 1.0 - q) };
        let weight = factor * (g2 / (g1 * branch.max(1e-12)));
        let wi_c = if reflecting { wi_r } else { Vec3::new(wi_r.x, wi_r.y, -wi_r.z) };
        let wi = if flip { Vec3::new(wi_c.x, wi_c.y, -wi_c.z) } else { wi_c };
        Some(LobeSample {
            wi,
            pdf: branch * pdf_m / (4.0 * c_om.max(1e-12)),
            weight,
            delta: false,
        })
    }

    /// Reflected plus transmitted energy for one view cosine, by quadrature
    /// over the sampler square of each branch.
    pub fn directional_albedo(&self, mu_o: f64) -> Spectrum3 {
        let mu = mu_o.abs().clamp(1e-4, 1.0);
        if self.smooth() {
            let (r, t) = self.split(mu);
            return r + t;
        }
        let wo = Vec3::new((1.0 - mu * mu).max(0.0).sqrt(), 0.0, mu);
        let mut total = Spectrum3::ZERO;
        for (alphas, transmitting) in [(&self.alphas_r, false), (&self.alphas_t, true)] {
            let g1 = smith_g1(wo, alphas);
            let n = 32;
            for a in 0..n {
                let u1 = (a as f64 + 0.5) / n as f64;
                for b in 0..n {
                    let u2 = (b as f64 + 0.5) / n as f64;
                    let m = sample_visible_normal_square(wo, alphas, u1, u2);
                    let c_om = wo.dot(&m).clamp(0.0, 1.0);
                    let wi = m * (2.0 * c_om) - wo;
                    if wi.z <= 0.0 {
                        continue;
                    }
                    let (r, t) = self.split(c_om);
                    let factor = if transmitting { t } else { r };
                    total += factor * (smith_g2(wi, wo, alphas) / (g1 * n as f64 * n as f64));
                }
            }
        }
        total
    }
}

/// Diffuse half of the thin scattering sheet: a rough-diffuse lobe
/// normalized to unit albedo, optionally flipped into the transmission
/// hemisphere. The mixture weight carries the split fractions.
#[derive(Debug, Clone)]
pub struct SheetDiffuseLobe {
    eon: EonParams,
    transmit: bool,
}

impl SheetDiffuseLobe {
    pub fn new(sigma: f64, transmit: bool) -> Self {
        SheetDiffuseLobe {
            eon: EonParams { rho: Spectrum3::ONE, sigma, weight: 1.0 },
            transmit,
        }
    }

    fn norm(&self, mu_o: f64) -> Spectrum3 {
        eon_compensated_albedo(mu_o.abs().max(1e-4), &self.eon).map(|e| e.max(1e-6))
    }

    pub fn eval(&self, wi: Vec3, wo: Vec3) -> Spectrum3 {
        if wo.z <= 0.0 {
            return Spectrum3::ZERO;
        }
        let wi_h = if self.transmit { Vec3::new(wi.x, wi.y, -wi.z) } else { wi };
        if wi_h.z <= 0.0 {
            return Spectrum3::ZERO;
        }
        let raw = crate::diffuse::eon_eval(wi_h, wo, &self.eon);
        raw.zip(self.norm(wo.z), |v, e| v / e)
    }

    pub fn pdf(&self, wi: Vec3, wo: Vec3) -> f64 {
        if wo.z <= 0.0 {
            return 0.0;
        }
        let z = if self.transmit { -wi.z } else { wi.z };
        if z <= 0.0 {
            0.0
        } else {
            z / PI
        }
    }

    pub fn sample(&self, wo: Vec3, rng: &mut impl Rng) -> Option<LobeSample> {
        if wo.z <= 0.0 {
            return None;
        }
        let mut wi = cosine_sample_hemisphere(rng.random(), rng.random());
        let pdf = wi.z / PI;
        if self.transmit {
            wi.z = -wi.z;
        }
        Some(LobeSample {
            wi,
            pdf,
            weight: self.eval(wi, wo) * PI,
            delta: false,
        })
    }
}

/// The machinery behind one mixture entry.
#[derive(Debug, Clone)]
enum LobeBody {
    /// Pass-through delta for absent geometry.
    Transparent,
    Fuzz(FuzzLobe),
    /// Reflection-only dielectric interface; transmission is the layer
    /// escape factor in the cascade, not a lobe.
    Coat(DielectricLobe),
    Conductor(ConductorLobe),
    /// Forced-reflection view of the shared base dielectric.
    SpecR(DielectricLobe),
    /// Forced-transmission view, normalized by its own directional albedo so
    /// the cascade controls the transmitted energy exactly.
    SpecT(DielectricLobe),
    Diffuse(DiffuseLobe),
    Sheet(SheetLobe),
    SheetDiffuse(SheetDiffuseLobe),
}

#[derive(Debug, Clone)]
struct Lobe {
    role: Role,
    frame: FrameSel,
    body: LobeBody,
}

impl Lobe {
    fn is_delta(&self) -> bool {
        match &self.body {
            LobeBody::Transparent => true,
            LobeBody::Coat(d) | LobeBody::SpecR(d) => {
                d.alphas.effectively_smooth() || d.index_matched()
            }
            LobeBody::SpecT(d) => d.alphas.effectively_smooth() || d.index_matched(),
            LobeBody::Conductor(c) => c.alphas.effectively_smooth(),
            LobeBody::Sheet(s) => s.smooth(),
            LobeBody::Fuzz(_) | LobeBody::Diffuse(_) | LobeBody::SheetDiffuse(_) => false,
        }
    }
}

/// One draw from the mixture sampler.
#[derive(Debug, Clone, Copy)]
pub struct MixtureSample {
    /// Incident direction, same space as the query.
    pub wi: Vec3,
    /// Combined density over all continuous lobes; 0 for delta draws.
    pub pdf: f64,
    /// Full throughput: BSDF times cosine over density, or the delta weight.
    pub weight: Spectrum3,
    pub delta: bool,
    pub kind: LobeKind,
}

/// Cascade weights by role at one outgoing direction. The formulas are the
/// single place the layer algebra lives; the mixture and its tests both read
/// them from here.
#[derive(Debug, Clone, Copy, Default)]
struct CascadeWeights {
    transparent: Spectrum3,
    fuzz: Spectrum3,
    coat: Spectrum3,
    conductor: Spectrum3,
    spec_r: Spectrum3,
    spec_t: Spectrum3,
    diffuse: Spectrum3,
    sss: Spectrum3,
    sheet: Spectrum3,
    sheet_diff_r: Spectrum3,
    sheet_diff_t: Spectrum3,
}

impl CascadeWeights {
    fn get(&self, role: Role) -> Spectrum3 {
        match role {
            Role::Transparent => self.transparent,
            Role::Fuzz => self.fuzz,
            Role::Coat => self.coat,
            Role::Conductor => self.conductor,
            Role::SpecR => self.spec_r,
            Role::SpecT => self.spec_t,
            Role::Diffuse => self.diffuse,
            Role::Sss => self.sss,
            Role::Sheet => self.sheet,
            Role::SheetDiffR => self.sheet_diff_r,
            Role::SheetDiffT => self.sheet_diff_t,
        }
    }
}

/// View cosines per layer frame; base is signed, the overlays are not
/// consulted below the horizon.
#[derive(Debug, Clone, Copy)]
struct LayerCos {
    base: f64,
    coat: f64,
    fuzz: f64,
}

/// Scalar controls the cascade needs at evaluation time.
#[derive(Debug, Clone, Copy)]
struct MixControls {
    opacity: f64,
    fuzz_weight: f64,
    coat_weight: f64,
    metalness: f64,
    transmission: f64,
    subsurface: f64,
    subsurface_anisotropy: f64,
    subsurface_color: Spectrum3,
    fuzz_roughness: f64,
    /// Multiplier on the refraction lobe when the interior medium is absent.
    transmission_tint: Spectrum3,
}

const MAX_LOBES: usize = 10;

/// Immutable, thread-safe lobe mixture for one surface point.
#[derive(Debug, Clone)]
pub struct LobeMixture {
    lobes: Vec<Lobe>,
    geo: ShadingGeometry,
    tables: Tables,
    coat_ctx: CoatContext,
    controls: MixControls,
    emission: Spectrum3,
    thin: bool,
}

/// Selection probabilities below this floor are raised for any lobe with
/// nonzero weight, bounding the variance of rarely-picked lobes.
const SELECT_FLOOR: f64 = 1e-3;

impl LobeMixture {
    /// Lobe kinds in cascade order, for inspection.
    pub fn kinds(&self) -> Vec<LobeKind> {
        self.lobes.iter().map(|l| l.role.kind()).collect()
    }

    /// Rebinds the shading frames for a new surface point. The albedo
    /// tables and lobe bodies depend only on the parameters, so one
    /// assembled mixture serves every intersection of the same material.
    pub fn with_geometry(&self, g: &ShadingGeometry) -> Self {
        let opaque = self.controls.transmission <= 0.0 || self.controls.metalness >= 1.0;
        let mut out = self.clone();
        out.geo = bind_frames(g, self.thin, opaque);
        out
    }

    pub fn emission_radiance(&self) -> Spectrum3 {
        self.emission
    }

    fn layer_cos(&self, wo: Vec3) -> LayerCos {
        LayerCos {
            base: self.geo.base.to_local(wo).z,
            coat: self.geo.coat.to_local(wo).z.abs(),
            fuzz: self.geo.fuzz.to_local(wo).z.abs(),
        }
    }

    /// The layer algebra. Outside: presence-weighted attenuation down the
    /// stack, with each escape factor read from the tables at this view.
    /// Inside a solid: the base interface alone, since the entering
    /// interaction already paid the overlay round trip.
    fn cascade(&self, cos: &LayerCos) -> CascadeWeights {
        let c = &self.controls;
        let mut w = CascadeWeights::default();
        w.transparent = Spectrum3::splat(1.0 - c.opacity);
        if cos.base < 0.0 && !self.thin {
            let escape =
                (Spectrum3::ONE - self.tables.e_spec_r(cos.base)).clamp(0.0, 1.0);
            w.spec_r = Spectrum3::splat(c.opacity);
            w.spec_t = escape * c.opacity * c.transmission_tint;
            return w;
        }
        let alpha = c.opacity;
        w.fuzz = Spectrum3::splat(alpha * c.fuzz_weight);
        let fuzz_escape = lerp(
            1.0,
            1.0 - fuzz_albedo(cos.fuzz, c.fuzz_roughness),
            c.fuzz_weight,
        );
        w.coat = Spectrum3::splat(alpha * fuzz_escape * c.coat_weight);
        let coat_pass = if c.coat_weight > 0.0 {
            let e_b = self.tables.e_base.eval(cos.coat);
            let dark = darkening_factor(&self.coat_ctx, cos.coat, e_b);
            let through = dark * (Spectrum3::ONE - self.tables.e_coat.eval(cos.coat));
            Spectrum3::ONE.lerp(through, c.coat_weight)
        } else {
            Spectrum3::ONE
        };
        let base = coat_pass * (alpha * fuzz_escape);
        w.conductor = base * c.metalness;
        let diel = base * (1.0 - c.metalness);
        let escape = (Spectrum3::ONE - self.tables.e_spec_r(cos.base)).clamp(0.0, 1.0);
        if self.thin {
            // The sheet carries its own interface reflection, so the plain
            // reflection lobe only covers the non-transmissive fraction.
            w.sheet = diel * c.transmission;
            let opaque_part = diel * (1.0 - c.transmission);
            w.spec_r = opaque_part;
            let under = opaque_part * escape;
            w.diffuse = under * (1.0 - c.subsurface);
            let half = c.subsurface_color * (0.5 * c.subsurface);
            w.sheet_diff_r = under * half * (1.0 - c.subsurface_anisotropy);
            w.sheet_diff_t = under * half * (1.0 + c.subsurface_anisotropy);
        } else {
            w.spec_r = diel;
            w.spec_t = diel * escape * c.transmission * c.transmission_tint;
            let under = diel * escape * (1.0 - c.transmission);
            w.diffuse = under * (1.0 - c.subsurface);
            w.sss = under * c.subsurface;
        }
        w
    }

    /// Role weights at one outgoing direction, in lobe order.
    pub fn layer_weights(&self, wo: Vec3) -> Vec<(LobeKind, Spectrum3)> {
        let wo = self.orient(self.thin_flip(wo), wo);
        let cos = self.layer_cos(wo);
        let w = self.cascade(&cos);
        self.lobes
            .iter()
            .map(|l| (l.role.kind(), w.get(l.role)))
            .collect()
    }

    /// Thin walls are symmetric: a view from below sees the mirrored lobe
    /// stack. The flip is decided by the outgoing side and applied to every
    /// direction in the query.
    fn thin_flip(&self, wo: Vec3) -> bool {
        self.thin && self.geo.base.to_local(wo).z < 0.0
    }

    fn mirror_dir(&self, v: Vec3) -> Vec3 {
        let n = self.geo.base.n;
        v - n * (2.0 * v.dot(&n))
    }

    fn orient(&self, flip: bool, v: Vec3) -> Vec3 {
        if flip {
            self.mirror_dir(v)
        } else {
            v
        }
    }

    fn frame(&self, sel: FrameSel) -> &Frame {
        match sel {
            FrameSel::Base => &self.geo.base,
            FrameSel::Coat => &self.geo.coat,
            FrameSel::Fuzz => &self.geo.fuzz,
        }
    }

    /// Lobe BSDF value in world space, with the role normalizations applied.
    fn lobe_value(&self, lobe: &Lobe, cos: &LayerCos, wi: Vec3, wo: Vec3) -> Spectrum3 {
        let frame = self.frame(lobe.frame);
        let wi_l = frame.to_local(wi);
        let wo_l = frame.to_local(wo);
        match &lobe.body {
            LobeBody::Transparent => Spectrum3::ZERO,
            LobeBody::Fuzz(f) => f.eval(wi_l, wo_l),
            LobeBody::Coat(d) | LobeBody::SpecR(d) => d.eval_reflection(wi_l, wo_l),
            LobeBody::SpecT(d) => {
                let raw = d.eval_transmission(wi_l, wo_l);
                let norm = self.tables.e_spec_t(cos.base).map(|e| e.max(1e-6));
                raw.zip(norm, |v, e| v / e)
            }
            LobeBody::Conductor(c) => c.eval(wi_l, wo_l),
            LobeBody::Diffuse(d) => d.eval(wi_l, wo_l),
            LobeBody::Sheet(s) => s.eval(wi_l, wo_l),
            LobeBody::SheetDiffuse(s) => s.eval(wi_l, wo_l),
        }
    }

    fn lobe_pdf(&self, lobe: &Lobe, wi: Vec3, wo: Vec3) -> f64 {
        let frame = self.frame(lobe.frame);
        let wi_l = frame.to_local(wi);
        let wo_l = frame.to_local(wo);
        match &lobe.body {
            LobeBody::Transparent => 0.0,
            LobeBody::Fuzz(f) => f.pdf(wi_l, wo_l),
            LobeBody::Coat(d) | LobeBody::SpecR(d) => d.pdf_reflection(wi_l, wo_l),
            LobeBody::SpecT(d) => d.pdf_transmission(wi_l, wo_l),
            LobeBody::Conductor(c) => c.pdf(wi_l, wo_l),
            LobeBody::Diffuse(d) => d.pdf(wi_l, wo_l),
            LobeBody::Sheet(s) => s.pdf(wi_l, wo_l),
            LobeBody::SheetDiffuse(s) => s.pdf(wi_l, wo_l),
        }
    }

    /// Estimated energy each lobe returns at this view, driving selection.
    fn lobe_albedo_estimate(&self, lobe: &Lobe, cos: &LayerCos) -> Spectrum3 {
        match &lobe.body {
            LobeBody::Transparent => Spectrum3::ONE,
            LobeBody::Fuzz(f) => f.albedo(cos.fuzz),
            LobeBody::Coat(_) => self.tables.e_coat.eval(cos.coat),
            LobeBody::SpecR(_) => self.tables.e_spec_r(cos.base),
            // Normalized to unit albedo by construction.
            LobeBody::SpecT(_) => Spectrum3::ONE,
            LobeBody::Conductor(_) => self.tables.e_conductor.eval(cos.base),
            LobeBody::Diffuse(d) => d.albedo(cos.base),
            LobeBody::Sheet(_) => self.tables.e_sheet.eval(cos.base),
            LobeBody::SheetDiffuse(_) => Spectrum3::ONE,
        }
    }

    /// Selection probabilities at this view: proportional to the luminance
    /// of weight times albedo estimate, floored for any present lobe.
    fn selection(&self, cos: &LayerCos, weights: &CascadeWeights) -> ([f64; MAX_LOBES], f64) {
        let mut p = [0.0_f64; MAX_LOBES];
        let mut total = 0.0;
        for (k, lobe) in self.lobes.iter().enumerate() {
            let w = weights.get(lobe.role);
            let est = (w * self.lobe_albedo_estimate(lobe, cos)).luminance().max(0.0);
            p[k] = est;
            total += est;
        }
        if total <= 0.0 {
            return (p, 0.0);
        }
        let mut floored = 0.0;
        for (k, lobe) in self.lobes.iter().enumerate() {
            p[k] /= total;
            if weights.get(lobe.role).luminance() > 0.0 {
                p[k] = p[k].max(SELECT_FLOOR);
            }
            floored += p[k];
        }
        for slot in p.iter_mut().take(self.lobes.len()) {
            *slot /= floored;
        }
        (p, 1.0)
    }

    /// Weighted sum of the continuous lobe values. Delta transports never
    /// contribute to eval.
    pub fn eval(&self, wi: Vec3, wo: Vec3) -> Spectrum3 {
        let flip = self.thin_flip(wo);
        let (wi, wo) = (self.orient(flip, wi), self.orient(flip, wo));
        let cos = self.layer_cos(wo);
        let weights = self.cascade(&cos);
        let mut total = Spectrum3::ZERO;
        for lobe in &self.lobes {
            let w = weights.get(lobe.role);
            if w.max_component() <= 0.0 {
                continue;
            }
            total += w * self.lobe_value(lobe, &cos, wi, wo);
        }
        total
    }

    /// Combined density of the mixture sampler over continuous lobes.
    pub fn pdf(&self, wi: Vec3, wo: Vec3) -> f64 {
        let flip = self.thin_flip(wo);
        let (wi, wo) = (self.orient(flip, wi), self.orient(flip, wo));
        let cos = self.layer_cos(wo);
        let weights = self.cascade(&cos);
        let (p, total) = self.selection(&cos, &weights);
        if total <= 0.0 {
            return 0.0;
        }
        let mut density = 0.0;
        for (k, lobe) in self.lobes.iter().enumerate() {
            if p[k] <= 0.0 || lobe.is_delta() {
                continue;
            }
            density += p[k] * self.lobe_pdf(lobe, wi, wo);
        }
        density
    }

    /// One-sample draw: pick a lobe by estimated energy, delegate, then
    /// combine over every continuous lobe. Delta draws return the picked
    /// lobe's throughput over its selection probability.
    pub fn sample(&self, wo: Vec3, rng: &mut impl Rng) -> Option<MixtureSample> {
        let flip = self.thin_flip(wo);
        let wo_o = self.orient(flip, wo);
        let cos = self.layer_cos(wo_o);
        let weights = self.cascade(&cos);
        let (p, total) = self.selection(&cos, &weights);
        if total <= 0.0 {
            return None;
        }
        let mut pick = rng.random::<f64>();
        let mut chosen = self.lobes.len() - 1;
        for k in 0..self.lobes.len() {
            if pick < p[k] {
                chosen = k;
                break;
            }
            pick -= p[k];
        }
        let lobe = &self.lobes[chosen];
        let frame = self.frame(lobe.frame);
        let wo_l = frame.to_local(wo_o);
        let s = match &lobe.body {
            LobeBody::Transparent => Some(LobeSample {
                wi: -wo_l,
                pdf: 0.0,
                weight: Spectrum3::ONE,
                delta: true,
            }),
            LobeBody::Fuzz(f) => f.sample(wo_l, rng),
            LobeBody::Coat(d) | LobeBody::SpecR(d) => d.sample_reflection(wo_l, rng),
            LobeBody::SpecT(d) => d.sample_transmission(wo_l, rng).map(|mut s| {
                let norm = self.tables.e_spec_t(cos.base).map(|e| e.max(1e-6));
                s.weight = s.weight.zip(norm, |v, e| v / e);
                s
            }),
            LobeBody::Conductor(c) => c.sample(wo_l, rng),
            LobeBody::Diffuse(d) => d.sample(wo_l, rng),
            LobeBody::Sheet(sh) => sh.sample(wo_l, rng),
            LobeBody::SheetDiffuse(sh) => sh.sample(wo_l, rng),
        }?;
        let wi_o = frame.to_world(s.wi);
        let wi = self.orient(flip, wi_o);
        let kind = lobe.role.kind();
        if s.delta {
            let w = weights.get(lobe.role);
            return Some(MixtureSample {
                wi,
                pdf: 0.0,
                weight: w * s.weight * (1.0 / p[chosen].max(1e-12)),
                delta: true,
                kind,
            });
        }
        // Balance-heuristic combination over the continuous lobes.
        let mut density = 0.0;
        for (k, other) in self.lobes.iter().enumerate() {
            if p[k] <= 0.0 || other.is_delta() {
                continue;
            }
            density += p[k] * self.lobe_pdf(other, wi_o, wo_o);
        }
        if density <= 0.0 {
            return None;
        }
        let mut value = Spectrum3::ZERO;
        for other in &self.lobes {
            let w = weights.get(other.role);
            if w.max_component() <= 0.0 {
                continue;
            }
            value += w * self.lobe_value(other, &cos, wi_o, wo_o);
        }
        let cos_i = self.geo.base.to_local(wi_o).z.abs();
        Some(MixtureSample {
            wi,
            pdf: density,
            weight: value * (cos_i / density),
            delta: false,
            kind,
        })
    }

    /// Emitted radiance toward `wo`. Solid surfaces emit from the outside
    /// only; thin walls emit from both.
    pub fn emission(&self, wo: Vec3) -> Spectrum3 {
        if self.thin || self.geo.base.to_local(wo).z > 0.0 {
            self.emission
        } else {
            Spectrum3::ZERO
        }
    }

    #[cfg(test)]
    fn cascade_at(&self, wo: Vec3) -> CascadeWeights {
        let wo = self.orient(self.thin_flip(wo), wo);
        self.cascade(&self.layer_cos(wo))
    }

    #[cfg(test)]
    fn tables_ref(&self) -> &Tables {
        &self.tables
    }
}

/// Shared assembly state between the solid and thin-walled paths.
struct Assembly {
    lobes: Vec<Lobe>,
    tables: Tables,
    coat_ctx: CoatContext,
    controls: MixControls,
    emission: Spectrum3,
    geo: ShadingGeometry,
}

fn film_curves(
    m: &ValidatedMaterial,
    ambient: f64,
    conductor_f0: Spectrum3,
) -> (Option<FilmFresnel>, Option<FilmFresnel>) {
    let p = &m.params;
    if p.thin_film_weight <= 0.0 {
        return (None, None);
    }
    let thickness_nm = p.thin_film_thickness * 1000.0;
    let n_film = p.thin_film_ior;
    let c = p.coat_weight.clamp(0.0, 1.0);
    let lambdas = CHANNEL_WAVELENGTHS_NM;
    let blend_tops = |n3: [Complex64; 3]| {
        FresnelCurve::tabulate(|mu| {
            let amb = film_reflectance_spectrum(ambient, n_film, n3, thickness_nm, mu, lambdas);
            if c <= 0.0 {
                amb
            } else {
                let coat =
                    film_reflectance_spectrum(p.coat_ior, n_film, n3, thickness_nm, mu, lambdas);
                amb.lerp(coat, c)
            }
        })
    };
    let conductor = if p.base_metalness > 0.0 {
        Some(FilmFresnel {
            weight: p.thin_film_weight,
            above: blend_tops(effective_complex_ior(conductor_f0)),
            below: None,
        })
    } else {
        None
    };
    let dielectric = if p.base_metalness < 1.0 {
        let n_s = p.specular_ior;
        let spec3 = [Complex64::new(n_s, 0.0); 3];
        let above = blend_tops(spec3);
        // Reverse stack, looking out from the interior.
        let below = FresnelCurve::tabulate(|mu| {
            let amb = film_reflectance_spectrum(
                n_s,
                n_film,
                [Complex64::new(ambient, 0.0); 3],
                thickness_nm,
                mu,
                lambdas,
            );
            if c <= 0.0 {
                amb
            } else {
                let coat = film_reflectance_spectrum(
                    n_s,
                    n_film,
                    [Complex64::new(p.coat_ior, 0.0); 3],
                    thickness_nm,
                    mu,
                    lambdas,
                );
                amb.lerp(coat, c)
            }
        });
        Some(FilmFresnel { weight: p.thin_film_weight, above, below: Some(below) })
    } else {
        None
    };
    (conductor, dielectric)
}

fn assembly(m: &ValidatedMaterial, g: &ShadingGeometry, thin: bool) -> Assembly {
    let p = &m.params;
    let alpha = p.geometry_opacity.clamp(0.0, 1.0);
    let fw = p.fuzz_weight.clamp(0.0, 1.0);
    let cw = p.coat_weight.clamp(0.0, 1.0);
    let metal = p.base_metalness.clamp(0.0, 1.0);
    let trans = p.transmission_weight.clamp(0.0, 1.0);
    let sss = p.subsurface_weight.clamp(0.0, 1.0);
    let ambient = g.ambient_ior;

    // Overlay roughening flows downward: fuzz widens the coat, then fuzz and
    // coat together widen the base.
    let fuzz_tinted = p.fuzz_color * (fuzz_albedo(1.0, p.fuzz_roughness) * fw);
    let r_coat = fuzz_roughen(p.coat_roughness, fuzz_tinted);
    let eta_coat = p.coat_ior / ambient;
    let r_spec = fuzz_roughen(
        coat_roughen(p.specular_roughness, r_coat, eta_coat, cw),
        fuzz_tinted,
    );
    let alphas_spec = roughness_to_alphas(r_spec, p.specular_roughness_anisotropy);
    let eta_s = surrounding_eta(p.specular_ior, p.coat_ior, ambient, cw);
    let conductor_f0 = (p.base_color * p.base_weight).clamp(0.0, 1.0);
    let (cond_film, diel_film) = film_curves(m, ambient, conductor_f0);

    let mut lobes = Vec::with_capacity(8);
    if alpha < 1.0 {
        lobes.push(Lobe {
            role: Role::Transparent,
            frame: FrameSel::Base,
            body: LobeBody::Transparent,
        });
    }
    if fw > 0.0 {
        lobes.push(Lobe {
            role: Role::Fuzz,
            frame: FrameSel::Fuzz,
            body: LobeBody::Fuzz(FuzzLobe {
                params: FuzzParams { weight: fw, color: p.fuzz_color, roughness: p.fuzz_roughness },
            }),
        });
    }
    let coat_lobe = if cw > 0.0 {
        let lobe = DielectricLobe::new(
            roughness_to_alphas(r_coat, 0.0),
            eta_coat,
            1.0,
            Spectrum3::ONE,
        );
        lobes.push(Lobe {
            role: Role::Coat,
            frame: FrameSel::Coat,
            body: LobeBody::Coat(lobe.clone()),
        });
        Some(lobe)
    } else {
        None
    };
    let conductor = if metal > 0.0 {
        let lobe = ConductorLobe {
            alphas: alphas_spec,
            f0: conductor_f0,
            tint: p.specular_color,
            xi_s: p.specular_weight,
            compensation: true,
            film: cond_film.map(Box::new),
        };
        lobes.push(Lobe {
            role: Role::Conductor,
            frame: FrameSel::Base,
            body: LobeBody::Conductor(lobe.clone()),
        });
        Some(lobe)
    } else {
        None
    };
    let dielectric = if metal < 1.0 {
        let mut lobe =
            DielectricLobe::new(alphas_spec, eta_s, p.specular_weight, p.specular_color);
        if let Some(f) = diel_film {
            lobe = lobe.with_film(f);
        }
        let lobe = lobe.with_compensation();
        lobes.push(Lobe {
            role: Role::SpecR,
            frame: FrameSel::Base,
            body: LobeBody::SpecR(lobe.clone()),
        });
        Some(lobe)
    } else {
        None
    };
    let sheet = if metal < 1.0 && thin && trans > 0.0 {
        let lobe = SheetLobe::new(
            r_spec,
            p.specular_roughness_anisotropy,
            eta_s,
            p.specular_weight,
            p.transmission_color,
        );
        lobes.push(Lobe {
            role: Role::Sheet,
            frame: FrameSel::Base,
            body: LobeBody::Sheet(lobe.clone()),
        });
        Some(lobe)
    } else {
        None
    };
    if metal < 1.0 && !thin && trans > 0.0 {
        let lobe = dielectric.clone().expect("dielectric branch present");
        lobes.push(Lobe {
            role: Role::SpecT,
            frame: FrameSel::Base,
            body: LobeBody::SpecT(lobe),
        });
    }
    let diffuse_params = EonParams {
        rho: p.base_color,
        sigma: p.base_diffuse_roughness,
        weight: p.base_weight,
    };
    if metal < 1.0 && trans < 1.0 && sss < 1.0 {
        lobes.push(Lobe {
            role: Role::Diffuse,
            frame: FrameSel::Base,
            body: LobeBody::Diffuse(DiffuseLobe { params: diffuse_params }),
        });
    }
    let sss_params = EonParams {
        rho: p.subsurface_color,
        sigma: p.base_diffuse_roughness,
        weight: 1.0,
    };
    if metal < 1.0 && trans < 1.0 && sss > 0.0 {
        if thin {
            for transmit in [false, true] {
                lobes.push(Lobe {
                    role: if transmit { Role::SheetDiffT } else { Role::SheetDiffR },
                    frame: FrameSel::Base,
                    body: LobeBody::SheetDiffuse(SheetDiffuseLobe::new(
                        p.base_diffuse_roughness,
                        transmit,
                    )),
                });
            }
        } else {
            lobes.push(Lobe {
                role: Role::Sss,
                frame: FrameSel::Base,
                body: LobeBody::Diffuse(DiffuseLobe { params: sss_params }),
            });
        }
    }

    // Albedo tables for the escape factors and lobe selection.
    let mut tables = Tables::zero();
    if let Some(c) = &coat_lobe {
        tables.e_coat = MuTable::build(|mu| c.reflection_albedo(mu));
    }
    if let Some(d) = &dielectric {
        tables.e_spec_r_out = MuTable::build(|mu| d.reflection_albedo(mu));
        tables.e_spec_r_in = MuTable::build(|mu| d.reflection_albedo(-mu));
        tables.e_spec_t_out = MuTable::build(|mu| d.transmission_albedo(mu));
        tables.e_spec_t_in = MuTable::build(|mu| d.transmission_albedo(-mu));
    }
    if let Some(c) = &conductor {
        tables.e_conductor = MuTable::build(|mu| c.directional_albedo(mu));
    }
    if let Some(s) = &sheet {
        tables.e_sheet = MuTable::build(|mu| s.directional_albedo(mu));
    }
    let e_base = {
        let diff_albedo =
            |mu: f64| eon_compensated_albedo(mu.max(1e-4), &diffuse_params);
        let sss_albedo = |mu: f64| {
            if thin {
                // The sheet pair returns half the scattered energy upward.
                sss_params.rho * (0.5 * (1.0 - p.subsurface_anisotropy))
            } else {
                eon_compensated_albedo(mu.max(1e-4), &sss_params)
            }
        };
        MuTable::build(|mu| {
            let e_cond = tables.e_conductor.eval(mu);
            let e_r = tables.e_spec_r_out.eval(mu);
            let under = diff_albedo(mu).lerp(sss_albedo(mu), sss) * (1.0 - trans);
            let e_diel = e_r + (Spectrum3::ONE - e_r).clamp(0.0, 1.0) * under;
            e_cond.lerp(e_diel, 1.0 - metal).clamp(0.0, 1.0)
        })
    };
    tables.e_base = e_base;

    let coat_ctx = CoatContext {
        eta_c: eta_coat,
        coat_weight: cw,
        darkening: p.coat_darkening,
        t_square: p.coat_color,
        base_roughness: base_roughness_estimate(
            r_spec,
            metal,
            p.specular_weight,
            normal_incidence_reflectance(eta_s),
        ),
    };

    let transmission_tint = if !thin && trans > 0.0 && p.transmission_depth <= 0.0 {
        // No interior medium: the color tints the refraction directly.
        p.transmission_color
    } else {
        Spectrum3::ONE
    };

    let controls = MixControls {
        opacity: alpha,
        fuzz_weight: fw,
        coat_weight: cw,
        metalness: metal,
        transmission: trans,
        subsurface: sss,
        subsurface_anisotropy: p.subsurface_anisotropy.clamp(-1.0, 1.0),
        subsurface_color: p.subsurface_color,
        fuzz_roughness: p.fuzz_roughness,
        transmission_tint,
    };

    let emission = p.emission_color
        * (p.emission_weight * p.emission_luminance)
        * Spectrum3::ONE.lerp(p.coat_color, cw);

    let geo = bind_frames(g, thin, trans <= 0.0 || metal >= 1.0);

    Assembly { lobes, tables, coat_ctx, controls, emission, geo }
}

/// Opaque bases queried from behind see the top lobes mirrored into the
/// interior; transmissive solids handle interior views natively.
fn bind_frames(g: &ShadingGeometry, thin: bool, opaque: bool) -> ShadingGeometry {
    let mut geo = *g;
    if !thin && !g.entering && opaque {
        geo.base = mirror_frame(geo.base);
        geo.coat = mirror_frame(geo.coat);
        geo.fuzz = mirror_frame(geo.fuzz);
    }
    geo
}

/// Builds the solid-surface mixture.
pub fn assemble(m: &ValidatedMaterial, g: &ShadingGeometry) -> LobeMixture {
    let a = assembly(m, g, false);
    LobeMixture {
        lobes: a.lobes,
        geo: a.geo,
        tables: a.tables,
        coat_ctx: a.coat_ctx,
        controls: a.controls,
        emission: a.emission,
        thin: false,
    }
}

/// Builds the thin-walled mixture: interior transports become sheet lobes
/// and both sides share the (mirrored) stack.
pub fn assemble_thin_walled(m: &ValidatedMaterial, g: &ShadingGeometry) -> LobeMixture {
    let a = assembly(m, g, true);
    LobeMixture {
        lobes: a.lobes,
        geo: a.geo,
        tables: a.tables,
        coat_ctx: a.coat_ctx,
        controls: a.controls,
        emission: a.emission,
        thin: true,
    }
}

/// Dispatches on the material's wall mode.
pub fn assemble_surface(m: &ValidatedMaterial, g: &ShadingGeometry) -> LobeMixture {
    if m.params.geometry_thin_walled {
        assemble_thin_walled(m, g)
    } else {
        assemble(m, g)
    }
}

/// Straight-ray shadow transmittance: the surface blocks what its present,
/// metallic fraction intercepts, and passes the dielectric estimate through
/// the rest.
pub fn shadow_transmittance(m: &ValidatedMaterial, t_dielectric: Spectrum3) -> Spectrum3 {
    let alpha = m.params.geometry_opacity.clamp(0.0, 1.0);
    let metal = m.params.base_metalness.clamp(0.0, 1.0);
    t_dielectric.map(|t| 1.0 - alpha * (1.0 - (1.0 - metal) * t.clamp(0.0, 1.0)))
}
