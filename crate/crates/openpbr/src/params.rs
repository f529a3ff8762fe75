//! User-facing material parameters: the full control set with defaults,
//! hard/soft range validation, relevance (gray-out) analysis, and a plain
//! key-value file format. A single field table drives validation, parsing,
//! and writing so the three can never disagree about names or ranges.

use crate::math::Vec3;
use crate::spectra::Spectrum3;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("parameter {field} is not finite")]
    NonFiniteInput { field: &'static str },
    #[error("parameter {field} is a zero-length direction")]
    DegenerateVector { field: &'static str },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: unknown key {name:?}")]
    UnknownKey { name: String, line: usize },
}

/// Raw material controls. Scalars and colors hold whatever the caller set;
/// [`validate`] produces the in-range record the rest of the crate consumes.
/// Direction fields are already-decoded unit vectors (no map unpacking here)
/// and fall back to the shading frame when absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub base_weight: f64,
    pub base_color: Spectrum3,
    pub base_metalness: f64,
    pub base_diffuse_roughness: f64,
    pub specular_weight: f64,
    pub specular_color: Spectrum3,
    pub specular_roughness: f64,
    pub specular_roughness_anisotropy: f64,
    pub specular_ior: f64,
    pub transmission_weight: f64,
    pub transmission_color: Spectrum3,
    pub transmission_depth: f64,
    pub transmission_scatter: Spectrum3,
    pub transmission_scatter_anisotropy: f64,
    pub transmission_dispersion_scale: f64,
    pub transmission_dispersion_abbe_number: f64,
    pub subsurface_weight: f64,
    pub subsurface_color: Spectrum3,
    pub subsurface_radius: f64,
    pub subsurface_radius_scale: Spectrum3,
    pub subsurface_anisotropy: f64,
    pub coat_weight: f64,
    pub coat_color: Spectrum3,
    pub coat_roughness: f64,
    pub coat_ior: f64,
    pub coat_darkening: f64,
    pub fuzz_weight: f64,
    pub fuzz_color: Spectrum3,
    pub fuzz_roughness: f64,
    pub emission_weight: f64,
    pub emission_color: Spectrum3,
    pub emission_luminance: f64,
    pub thin_film_weight: f64,
    pub thin_film_thickness: f64,
    pub thin_film_ior: f64,
    pub geometry_opacity: f64,
    pub geometry_thin_walled: bool,
    pub geometry_normal: Option<Vec3>,
    pub geometry_tangent: Option<Vec3>,
    pub geometry_coat_normal: Option<Vec3>,
    pub geometry_coat_tangent: Option<Vec3>,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            base_weight: 1.0,
            base_color: Spectrum3::splat(0.8),
            base_metalness: 0.0,
            base_diffuse_roughness: 0.0,
            specular_weight: 1.0,
            specular_color: Spectrum3::ONE,
            specular_roughness: 0.3,
            specular_roughness_anisotropy: 0.0,
            specular_ior: 1.5,
            transmission_weight: 0.0,
            transmission_color: Spectrum3::ONE,
            transmission_depth: 0.0,
            transmission_scatter: Spectrum3::ZERO,
            transmission_scatter_anisotropy: 0.0,
            transmission_dispersion_scale: 0.0,
            transmission_dispersion_abbe_number: 20.0,
            subsurface_weight: 0.0,
            subsurface_color: Spectrum3::splat(0.8),
            subsurface_radius: 1.0,
            subsurface_radius_scale: Spectrum3::ONE,
            subsurface_anisotropy: 0.0,
            coat_weight: 0.0,
            coat_color: Spectrum3::ONE,
            coat_roughness: 0.0,
            coat_ior: 1.6,
            coat_darkening: 1.0,
            fuzz_weight: 0.0,
            fuzz_color: Spectrum3::ONE,
            fuzz_roughness: 0.5,
            emission_weight: 0.0,
            emission_color: Spectrum3::ONE,
            emission_luminance: 1000.0,
            thin_film_weight: 0.0,
            thin_film_thickness: 0.5,
            thin_film_ior: 1.4,
            geometry_opacity: 1.0,
            geometry_thin_walled: false,
            geometry_normal: None,
            geometry_tangent: None,
            geometry_coat_normal: None,
            geometry_coat_tangent: None,
        }
    }
}

/// One out-of-range observation. `clamped` distinguishes a hard-range clamp
/// (value was changed) from a soft-range advisory (value kept).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeWarning {
    pub parameter: &'static str,
    pub value: f64,
    pub limit: (f64, f64),
    pub clamped: bool,
}

/// In-range parameter record plus whatever was worth flagging on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedMaterial {
    pub params: MaterialParams,
    pub warnings: Vec<RangeWarning>,
}

pub enum FieldAccess {
    Float {
        get: fn(&MaterialParams) -> f64,
        set: fn(&mut MaterialParams, f64),
        hard: (f64, f64),
        soft: Option<(f64, f64)>,
    },
    Color {
        get: fn(&MaterialParams) -> Spectrum3,
        set: fn(&mut MaterialParams, Spectrum3),
        hard: (f64, f64),
    },
    Flag {
        get: fn(&MaterialParams) -> bool,
        set: fn(&mut MaterialParams, bool),
    },
    Direction {
        get: fn(&MaterialParams) -> Option<Vec3>,
        set: fn(&mut MaterialParams, Vec3),
    },
}

pub struct FieldDesc {
    pub name: &'static str,
    pub access: FieldAccess,
}

macro_rules! float_field {
    ($name:ident, $hard:expr) => {
        float_field!($name, $hard, None)
    };
    ($name:ident, $hard:expr, $soft:expr) => {
        FieldDesc {
            name: stringify!($name),
            access: FieldAccess::Float {
                get: |m| m.$name,
                set: |m, v| m.$name = v,
                hard: $hard,
                soft: $soft,
            },
        }
    };
}

macro_rules! color_field {
    ($name:ident, $hard:expr) => {
        FieldDesc {
            name: stringify!($name),
            access: FieldAccess::Color {
                get: |m| m.$name,
                set: |m, v| m.$name = v,
                hard: $hard,
            },
        }
    };
}

macro_rules! direction_field {
    ($name:ident) => {
        FieldDesc {
            name: stringify!($name),
            access: FieldAccess::Direction {
                get: |m| m.$name,
                set: |m, v| m.$name = Some(v),
            },
        }
    };
}

const UNIT: (f64, f64) = (0.0, 1.0);
const SIGNED_UNIT: (f64, f64) = (-1.0, 1.0);
const NONNEG: (f64, f64) = (0.0, f64::INFINITY);
const IOR: (f64, f64) = (1.0, 3.0);

/// Every parameter, in canonical file order.
pub static FIELDS: &[FieldDesc] = &[
    float_field!(base_weight, UNIT),
    color_field!(base_color, UNIT),
    float_field!(base_metalness, UNIT),
    float_field!(base_diffuse_roughness, UNIT),
    float_field!(specular_weight, NONNEG, Some(UNIT)),
    color_field!(specular_color, UNIT),
    float_field!(specular_roughness, UNIT),
    float_field!(specular_roughness_anisotropy, UNIT),
    float_field!(specular_ior, IOR),
    float_field!(transmission_weight, UNIT),
    color_field!(transmission_color, UNIT),
    float_field!(transmission_depth, NONNEG, Some(UNIT)),
    color_field!(transmission_scatter, UNIT),
    float_field!(transmission_scatter_anisotropy, SIGNED_UNIT),
    float_field!(transmission_dispersion_scale, UNIT),
    float_field!(transmission_dispersion_abbe_number, NONNEG),
    float_field!(subsurface_weight, UNIT),
    color_field!(subsurface_color, UNIT),
    float_field!(subsurface_radius, NONNEG, Some(UNIT)),
    color_field!(subsurface_radius_scale, UNIT),
    float_field!(subsurface_anisotropy, SIGNED_UNIT),
    float_field!(coat_weight, UNIT),
    color_field!(coat_color, UNIT),
    float_field!(coat_roughness, UNIT),
    float_field!(coat_ior, IOR),
    float_field!(coat_darkening, UNIT),
    float_field!(fuzz_weight, UNIT),
    color_field!(fuzz_color, UNIT),
    float_field!(fuzz_roughness, UNIT),
    float_field!(emission_weight, UNIT),
    color_field!(emission_color, NONNEG),
    float_field!(emission_luminance, NONNEG, Some((0.0, 1000.0))),
    float_field!(thin_film_weight, UNIT),
    float_field!(thin_film_thickness, NONNEG, Some(UNIT)),
    float_field!(thin_film_ior, IOR),
    float_field!(geometry_opacity, UNIT),
    FieldDesc {
        name: "geometry_thin_walled",
        access: FieldAccess::Flag {
            get: |m| m.geometry_thin_walled,
            set: |m, v| m.geometry_thin_walled = v,
        },
    },
    direction_field!(geometry_normal),
    direction_field!(geometry_tangent),
    direction_field!(geometry_coat_normal),
    direction_field!(geometry_coat_tangent),
];

fn field_by_name(name: &str) -> Option<&'static FieldDesc> {
    FIELDS.iter().find(|f| f.name == name)
}

/// Enforces hard ranges by clamping (with a warning), flags soft-range
/// excursions without touching the value, rejects non-finite input, and
/// renormalizes direction fields. Never aborts on a merely unusual value:
/// a render must still proceed.
pub fn validate(raw: &MaterialParams) -> Result<ValidatedMaterial, ParamsError> {
    let mut p = *raw;
    let mut warnings = Vec::new();
    for f in FIELDS {
        match f.access {
            FieldAccess::Float { get, set, hard, soft } => {
                let v = get(&p);
                if !v.is_finite() {
                    return Err(ParamsError::NonFiniteInput { field: f.name });
                }
                let c = v.clamp(hard.0, hard.1);
                if c != v {
                    warnings.push(RangeWarning {
                        parameter: f.name,
                        value: v,
                        limit: hard,
                        clamped: true,
                    });
                    set(&mut p, c);
                } else if let Some(s) = soft {
                    if v < s.0 || v > s.1 {
                        warnings.push(RangeWarning {
                            parameter: f.name,
                            value: v,
                            limit: s,
                            clamped: false,
                        });
                    }
                }
            }
            FieldAccess::Color { get, set, hard } => {
                let v = get(&p);
                if !v.is_finite() {
                    return Err(ParamsError::NonFiniteInput { field: f.name });
                }
                let c = v.clamp(hard.0, hard.1);
                if c != v {
                    let worst = (0..3)
                        .map(|k| v[k])
                        .max_by(|a, b| {
                            let d = |x: f64| (x - x.clamp(hard.0, hard.1)).abs();
                            d(*a).total_cmp(&d(*b))
                        })
                        .unwrap();
                    warnings.push(RangeWarning {
                        parameter: f.name,
                        value: worst,
                        limit: hard,
                        clamped: true,
                    });
                    set(&mut p, c);
                }
            }
            FieldAccess::Flag { .. } => {}
            FieldAccess::Direction { get, set } => {
                if let Some(v) = get(&p) {
                    if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                        return Err(ParamsError::NonFiniteInput { field: f.name });
                    }
                    let n = v.norm();
                    if n < 1e-12 {
                        return Err(ParamsError::DegenerateVector { field: f.name });
                    }
                    if (n - 1.0).abs() > 1e-12 {
                        set(&mut p, v / n);
                    }
                }
            }
        }
    }
    Ok(ValidatedMaterial { params: p, warnings })
}

/// Names of the parameters that can still influence the result given the
/// current weights; everything else would be grayed out in a UI. A parameter
/// leaves the set only when the active weights provably zero its effect.
pub fn relevant_parameters(m: &ValidatedMaterial) -> BTreeSet<&'static str> {
    const TRANSMISSION_DETAIL: &[&str] = &[
        "transmission_color",
        "transmission_depth",
        "transmission_scatter",
        "transmission_scatter_anisotropy",
        "transmission_dispersion_scale",
        "transmission_dispersion_abbe_number",
    ];
    const SUBSURFACE_DETAIL: &[&str] = &[
        "subsurface_color",
        "subsurface_radius",
        "subsurface_radius_scale",
        "subsurface_anisotropy",
    ];
    let p = &m.params;
    let mut out: BTreeSet<&'static str> = FIELDS.iter().map(|f| f.name).collect();
    let mut remove_all = |names: &[&'static str]| {
        for n in names {
            out.remove(*n);
        }
    };
    if p.coat_weight == 0.0 {
        remove_all(&["coat_color", "coat_roughness", "coat_ior", "coat_darkening"]);
    }
    if p.fuzz_weight == 0.0 {
        remove_all(&["fuzz_color", "fuzz_roughness"]);
    }
    if p.thin_film_weight == 0.0 {
        remove_all(&["thin_film_thickness", "thin_film_ior"]);
    }
    if p.emission_weight == 0.0 {
        remove_all(&["emission_color", "emission_luminance"]);
    }
    if p.transmission_weight == 0.0 || p.base_metalness == 1.0 {
        remove_all(TRANSMISSION_DETAIL);
    }
    if p.subsurface_weight == 0.0 || p.base_metalness == 1.0 {
        remove_all(SUBSURFACE_DETAIL);
    }
    if p.base_metalness == 1.0 {
        remove_all(&[
            "transmission_weight",
            "subsurface_weight",
            "base_diffuse_roughness",
            "specular_ior",
        ]);
    }
    out
}

fn parse_floats(value: &str, want: usize, line: usize) -> Result<Vec<f64>, ParamsError> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != want {
        return Err(ParamsError::Parse {
            line,
            reason: format!("expected {want} number(s), found {}", parts.len()),
        });
    }
    parts
        .iter()
        .map(|s| {
            s.parse::<f64>().map_err(|_| ParamsError::Parse {
                line,
                reason: format!("invalid number {s:?}"),
            })
        })
        .collect()
}

/// Parses the key-value material format: one `key: value` per line, `#`
/// starts a comment, colors and directions are three whitespace-separated
/// numbers, booleans are `true`/`false`. Unknown keys are errors; missing
/// keys keep their defaults; a repeated key keeps the last occurrence.
pub fn read_material(text: &str) -> Result<MaterialParams, ParamsError> {
    let mut m = MaterialParams::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once(':') else {
            return Err(ParamsError::Parse {
                line,
                reason: "expected `key: value`".into(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let Some(field) = field_by_name(key) else {
            return Err(ParamsError::UnknownKey {
                name: key.into(),
                line,
            });
        };
        match field.access {
            FieldAccess::Float { set, .. } => {
                set(&mut m, parse_floats(value, 1, line)?[0]);
            }
            FieldAccess::Color { set, .. } => {
                let v = parse_floats(value, 3, line)?;
                set(&mut m, Spectrum3::new(v[0], v[1], v[2]));
            }
            FieldAccess::Flag { set, .. } => match value {
                "true" => set(&mut m, true),
                "false" => set(&mut m, false),
                other => {
                    return Err(ParamsError::Parse {
                        line,
                        reason: format!("expected true or false, found {other:?}"),
                    })
                }
            },
            FieldAccess::Direction { set, .. } => {
                let v = parse_floats(value, 3, line)?;
                set(&mut m, Vec3::new(v[0], v[1], v[2]));
            }
        }
    }
    Ok(m)
}

/// Writes every parameter in canonical order (directions only when set),
/// using shortest round-trip float formatting so read∘write is the identity
/// bit for bit.
pub fn write_material(m: &MaterialParams) -> String {
    let mut out = String::new();
    for f in FIELDS {
        match f.access {
            FieldAccess::Float { get, .. } => {
                writeln!(out, "{}: {}", f.name, get(m)).unwrap();
            }
            FieldAccess::Color { get, .. } => {
                let v = get(m);
                writeln!(out, "{}: {} {} {}", f.name, v[0], v[1], v[2]).unwrap();
            }
            FieldAccess::Flag { get, .. } => {
                writeln!(out, "{}: {}", f.name, get(m)).unwrap();
            }
            FieldAccess::Direction { get, .. } => {
                if let Some(v) = get(m) {
                    writeln!(out, "{}: {} {} {}", f.name, v.x, v.y, v.z).unwrap();
                }
            }
        }
    }
    out
}
