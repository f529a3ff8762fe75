//! A layered, physically based surface shading model exposed as an
//! evaluatable and sampleable mixture of BSDF lobes, together with the
//! physics needed to assemble it (Fresnel factors, microfacet distributions,
//! diffuse and sheen models, volumetric coefficient inversions, thin-film
//! interference, coat darkening) and a verification harness (furnace tests,
//! Monte Carlo oracles, curve emitters, a minimal sphere renderer).
//!
//! The crate is renderer-agnostic: it produces lobe weights, evaluations,
//! samples, and medium coefficients in shading space, and leaves scene
//! transport to the caller. The bundled harness is itself such a caller.

pub mod coat;
pub mod diffuse;
pub mod fresnel;
pub mod fuzz;
pub mod harness;
pub mod material;
pub mod math;
pub mod microfacet;
pub mod params;
pub mod spectra;
pub mod subsurface;
pub mod thinfilm;
pub mod translucent;

pub use spectra::Spectrum3;
