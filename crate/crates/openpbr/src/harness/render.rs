//! Minimal sphere path tracer: one material on a unit sphere, three light
//! presets, unidirectional transport with next-event estimation toward the
//! area light, and an interior medium walk for transmissive solids. Output
//! is a binary PPM with simple 2.2 gamma. Every pixel owns an RNG stream
//! derived from the seed, so images are bit-identical across thread counts.

use super::split_seed;
use crate::material::{assemble_surface, LobeMixture, ShadingGeometry};
use crate::math::{Frame, Vec3};
use crate::params::ValidatedMaterial;
use crate::spectra::Spectrum3;
use crate::subsurface::MediumCoefficients;
use crate::translucent::{hg_sample, transmission_medium, TransmissionMedium};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

/// Lighting environment around the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenePreset {
    /// Uniform unit-radiance sky: pixel values equal directional albedo.
    Furnace,
    /// Two-tone gradient sky.
    SphereSky,
    /// Black sky with one spherical area light.
    SphereLight,
}

#[derive(Debug, Clone, Copy)]
pub struct RenderConfig {
    pub width: usize,
    pub height: usize,
    pub spp: usize,
    pub seed: u64,
    pub preset: ScenePreset,
    pub max_bounces: usize,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            width: 128,
            height: 128,
            spp: 64,
            seed: 0,
            preset: ScenePreset::Furnace,
            max_bounces: 256,
        }
    }
}

/// Linear radiance image.
#[derive(Debug, Clone)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Spectrum3>,
}

impl Image {
    pub fn mean(&self) -> Spectrum3 {
        let mut sum = Spectrum3::ZERO;
        for p in &self.pixels {
            sum += *p;
        }
        sum * (1.0 / self.pixels.len() as f64)
    }

    pub fn pixel(&self, x: usize, y: usize) -> Spectrum3 {
        self.pixels[y * self.width + x]
    }

    /// Binary PPM bytes, clamped and gamma-encoded at 2.2.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + self.pixels.len() * 3);
        write!(out, "P6\n{} {}\n255\n", self.width, self.height).expect("in-memory write");
        for p in &self.pixels {
            for k in 0..3 {
                let v = p[k].clamp(0.0, 1.0).powf(1.0 / 2.2);
                out.push((v * 255.0).round() as u8);
            }
        }
        out
    }

    pub fn write_ppm(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_ppm())
    }
}

const CAMERA_EYE: Vec3 = Vec3::new(0.0, 0.0, 3.2);
const VFOV_DEG: f64 = 40.0;
const LIGHT_CENTER: Vec3 = Vec3::new(2.0, 2.4, 1.8);
const LIGHT_RADIUS: f64 = 0.8;
const LIGHT_RADIANCE: Spectrum3 = Spectrum3::new(14.0, 12.5, 10.0);
const RR_START: usize = 32;
const OFFSET: f64 = 1e-7;

/// Nearest positive intersection of a normalized ray with a sphere.
fn hit_sphere(o: Vec3, d: Vec3, center: Vec3, radius: f64) -> Option<f64> {
    let oc = o - center;
    let b = oc.dot(&d);
    let disc = b * b - (oc.dot(&oc) - radius * radius);
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = -b - sq;
    if t0 > 1e-9 {
        return Some(t0);
    }
    let t1 = -b + sq;
    (t1 > 1e-9).then_some(t1)
}

fn sky(preset: ScenePreset, d: Vec3) -> Spectrum3 {
    match preset {
        ScenePreset::Furnace => Spectrum3::ONE,
        ScenePreset::SphereSky => {
            let t = 0.5 * (d.z + 1.0);
            Spectrum3::new(0.85, 0.8, 0.7).lerp(Spectrum3::new(0.35, 0.5, 0.9), t)
        }
        ScenePreset::SphereLight => Spectrum3::ZERO,
    }
}

/// Solid-angle density of cone sampling toward the light from `p`, zero
/// outside the cone.
fn light_pdf(p: Vec3, wi: Vec3) -> f64 {
    let to_c = LIGHT_CENTER - p;
    let d2 = to_c.dot(&to_c);
    if d2 <= LIGHT_RADIUS * LIGHT_RADIUS {
        return 0.0;
    }
    let cos_max = (1.0 - LIGHT_RADIUS * LIGHT_RADIUS / d2).sqrt();
    let cos_dir = wi.dot(&to_c.normalize());
    if cos_dir < cos_max {
        return 0.0;
    }
    1.0 / (2.0 * std::f64::consts::PI * (1.0 - cos_max))
}

fn sample_light_dir(p: Vec3, rng: &mut ChaCha8Rng) -> Option<(Vec3, f64)> {
    let to_c = LIGHT_CENTER - p;
    let d2 = to_c.dot(&to_c);
    if d2 <= LIGHT_RADIUS * LIGHT_RADIUS {
        return None;
    }
    let cos_max = (1.0 - LIGHT_RADIUS * LIGHT_RADIUS / d2).sqrt();
    let u: f64 = rng.random();
    let cos_t = 1.0 - u * (1.0 - cos_max);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    let frame = Frame::from_normal(to_c.normalize());
    let wi = frame.to_world(Vec3::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t));
    Some((wi, 1.0 / (2.0 * std::f64::consts::PI * (1.0 - cos_max))))
}

fn power_heuristic(a: f64, b: f64) -> f64 {
    let a2 = a * a;
    a2 / (a2 + b * b).max(1e-300)
}

/// Per-channel flight through the interior medium with throughput-weighted
/// channel selection: one channel drives the distance, the others are
/// reweighted by the combined density.
struct MediumEvent {
    /// Travelled distance along the ray.
    dist: f64,
    /// Per-channel throughput factor.
    factor: Spectrum3,
    /// A scattering event happened (otherwise the surface was reached).
    scattered: bool,
}

fn medium_flight(
    med: &MediumCoefficients,
    t_exit: f64,
    throughput: Spectrum3,
    rng: &mut ChaCha8Rng,
) -> MediumEvent {
    let total = throughput[0].max(0.0) + throughput[1].max(0.0) + throughput[2].max(0.0);
    let p = if total > 0.0 {
        [
            throughput[0].max(0.0) / total,
            throughput[1].max(0.0) / total,
            throughput[2].max(0.0) / total,
        ]
    } else {
        [1.0 / 3.0; 3]
    };
    let mut pick = rng.random::<f64>();
    let mut hero = 2;
    for (k, &pk) in p.iter().enumerate() {
        if pick < pk {
            hero = k;
            break;
        }
        pick -= pk;
    }
    let dist = -(1.0 - rng.random::<f64>()).ln() / med.mu_t[hero].max(1e-12);
    if dist < t_exit {
        let mut pdf = 0.0;
        for k in 0..3 {
            pdf += p[k] * med.mu_t[k] * (-med.mu_t[k] * dist).exp();
        }
        let factor = med
            .mu_s
            .zip(med.mu_t, |s, t| s * (-t * dist).exp())
            .map(|v| v / pdf.max(1e-300));
        MediumEvent {
            dist,
            factor,
            scattered: true,
        }
    } else {
        let mut pdf = 0.0;
        for k in 0..3 {
            pdf += p[k] * (-med.mu_t[k] * t_exit).exp();
        }
        let factor = med.mu_t.map(|t| (-t * t_exit).exp() / pdf.max(1e-300));
        MediumEvent {
            dist: t_exit,
            factor,
            scattered: false,
        }
    }
}

struct PathState {
    radiance: Spectrum3,
    throughput: Spectrum3,
    origin: Vec3,
    dir: Vec3,
    in_medium: bool,
    /// Solid-angle density of the previous scattering decision, for MIS
    /// against light sampling; `None` marks a delta or unsampled vertex.
    prev_pdf: Option<f64>,
}

fn trace(
    mix0: &LobeMixture,
    m: &ValidatedMaterial,
    medium: Option<&MediumCoefficients>,
    preset: ScenePreset,
    max_bounces: usize,
    origin: Vec3,
    dir: Vec3,
    rng: &mut ChaCha8Rng,
) -> Spectrum3 {
    let mut st = PathState {
        radiance: Spectrum3::ZERO,
        throughput: Spectrum3::ONE,
        origin,
        dir,
        in_medium: false,
        prev_pdf: None,
    };
    for bounce in 0..max_bounces {
        if st.in_medium {
            let med = medium.expect("in_medium only set with a medium");
            let t_exit = hit_sphere(st.origin, st.dir, Vec3::zeros(), 1.0).unwrap_or(2.0);
            let ev = medium_flight(med, t_exit, st.throughput, rng);
            st.throughput = st.throughput * ev.factor;
            st.origin += st.dir * ev.dist;
            if ev.scattered {
                let cos_t = hg_sample(med.g, rng);
                let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
                let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                st.dir = Frame::from_normal(st.dir)
                    .to_world(Vec3::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t));
                st.prev_pdf = None;
                if st.throughput.max_component() <= 0.0 {
                    break;
                }
                continue;
            }
            // Fall through to the surface interaction at the exit point.
        }

        let t_main = if st.in_medium {
            Some(0.0)
        } else {
            hit_sphere(st.origin, st.dir, Vec3::zeros(), 1.0)
        };
        let t_light = (preset == ScenePreset::SphereLight && !st.in_medium)
            .then(|| hit_sphere(st.origin, st.dir, LIGHT_CENTER, LIGHT_RADIUS))
            .flatten();

        let light_first = match (t_main, t_light) {
            (Some(tm), Some(tl)) => tl < tm,
            (None, Some(_)) => true,
            _ => false,
        };
        if light_first {
            let mis = match st.prev_pdf {
                Some(pdf_b) => power_heuristic(pdf_b, light_pdf(st.origin, st.dir)),
                None => 1.0,
            };
            st.radiance += st.throughput * LIGHT_RADIANCE * mis;
            break;
        }
        let Some(t_hit) = t_main else {
            st.radiance += st.throughput * sky(preset, st.dir);
            break;
        };

        let p = st.origin + st.dir * t_hit;
        let n = p.normalize();
        let wo = -st.dir;
        let entering = st.dir.dot(&n) < 0.0;
        let geo = ShadingGeometry::from_material(m, n, Frame::from_normal(n).t, entering, 1.0);
        let mix = mix0.with_geometry(&geo);

        st.radiance += st.throughput * mix.emission(wo);

        if preset == ScenePreset::SphereLight {
            if let Some((wi_l, pdf_l)) = sample_light_dir(p, rng) {
                let shadow_origin = p + n * OFFSET.copysign(wi_l.dot(&n));
                let blocked = hit_sphere(shadow_origin, wi_l, Vec3::zeros(), 1.0)
                    .zip(hit_sphere(shadow_origin, wi_l, LIGHT_CENTER, LIGHT_RADIUS))
                    .map(|(tm, tl)| tm < tl)
                    .unwrap_or(hit_sphere(shadow_origin, wi_l, LIGHT_CENTER, LIGHT_RADIUS).is_none());
                if !blocked {
                    let f = mix.eval(wi_l, wo);
                    if f.max_component() > 0.0 {
                        let mis = power_heuristic(pdf_l, mix.pdf(wi_l, wo));
                        st.radiance += st.throughput
                            * f
                            * LIGHT_RADIANCE
                            * (wi_l.dot(&n).abs() * mis / pdf_l);
                    }
                }
            }
        }

        let Some(s) = mix.sample(wo, rng) else { break };
        st.throughput = st.throughput * s.weight;
        if st.throughput.max_component() <= 0.0 {
            break;
        }
        st.prev_pdf = (!s.delta).then_some(s.pdf);
        st.in_medium = medium.is_some() && s.wi.dot(&n) < 0.0;
        st.origin = p + n * OFFSET.copysign(s.wi.dot(&n));
        st.dir = s.wi;

        if bounce + 1 >= RR_START {
            let p_survive = st.throughput.max_component().clamp(1e-3, 1.0);
            if rng.random::<f64>() >= p_survive {
                break;
            }
            st.throughput = st.throughput * (1.0 / p_survive);
        }
    }
    st.radiance
}

/// Renders the material on a unit sphere under the chosen preset.
pub fn render_sphere(m: &ValidatedMaterial, cfg: &RenderConfig) -> Image {
    let mix0 = assemble_surface(m, &ShadingGeometry::canonical());
    let medium = if m.params.geometry_thin_walled {
        None
    } else {
        match transmission_medium(
            m.params.transmission_color,
            if m.params.transmission_weight > 0.0 {
                m.params.transmission_depth
            } else {
                0.0
            },
            m.params.transmission_scatter,
            m.params.transmission_scatter_anisotropy,
            m.params.specular_ior,
        ) {
            TransmissionMedium::Medium(mc) => Some(mc),
            TransmissionMedium::TintOnly(_) => None,
        }
    };

    let tan_half = (VFOV_DEG.to_radians() / 2.0).tan();
    let aspect = cfg.width as f64 / cfg.height as f64;
    let pixels: Vec<Spectrum3> = (0..cfg.width * cfg.height)
        .into_par_iter()
        .map(|idx| {
            let x = idx % cfg.width;
            let y = idx / cfg.width;
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(cfg.seed, idx as u64, 0x9D2));
            let mut sum = Spectrum3::ZERO;
            for _ in 0..cfg.spp {
                let jx: f64 = rng.random();
                let jy: f64 = rng.random();
                let px = ((x as f64 + jx) / cfg.width as f64 * 2.0 - 1.0) * tan_half * aspect;
                let py = (1.0 - (y as f64 + jy) / cfg.height as f64 * 2.0) * tan_half;
                let dir = Vec3::new(px, py, -1.0).normalize();
                sum += trace(
                    &mix0,
                    m,
                    medium.as_ref(),
                    cfg.preset,
                    cfg.max_bounces,
                    CAMERA_EYE,
                    dir,
                    &mut rng,
                );
            }
            sum * (1.0 / cfg.spp as f64)
        })
        .collect();

    Image {
        width: cfg.width,
        height: cfg.height,
        pixels,
    }
}
