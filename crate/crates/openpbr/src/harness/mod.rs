//! Verification machinery: Monte Carlo furnace estimators, brute-force
//! random-walk oracles, deterministic curve emitters, and a minimal sphere
//! path tracer. Everything here is reproducible bit-exactly for a fixed
//! seed: parallel work is split into fixed-size batches, each batch owns an
//! RNG stream derived from the seed, and results reduce in batch order.

pub mod curves;
pub mod furnace;
pub mod render;
pub mod walks;

pub use curves::{emit_curves, CurveKind};
pub use furnace::{furnace_test, FurnaceConfig, FurnaceReport, Scatter, Scatterer};
pub use render::{render_sphere, Image, RenderConfig, ScenePreset};
pub use walks::{
    coat_walk_oracle, halfspace_walk_oracle, Boundary, CoatBase, WalkConfig, WalkEstimate,
};

/// Decorrelated stream id for worker `(a, b)` under a user seed, by double
/// SplitMix64 mixing. Batch RNGs seeded this way stay independent no matter
/// how close the inputs are.
pub(crate) fn split_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
