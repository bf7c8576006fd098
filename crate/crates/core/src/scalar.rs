//! Scalar abstraction for the numeric core.
//!
//! Policy logits, baselines, advantages, optimizer moments and the
//! evaluation oracles are generic over [`Scalar`] so the same code runs in
//! `f32` or `f64`. Checkpoints record which instantiation produced them.

use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar usable throughout the numeric core.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + std::iter::Sum
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::ops::MulAssign
    + std::fmt::Debug
    + std::fmt::Display
    + Serialize
    + DeserializeOwned
    + Default
    + Send
    + Sync
    + 'static
{
    /// Name recorded in checkpoint headers ("f32" or "f64").
    const NAME: &'static str;

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";
}
