//! Scalar abstractions shared by the numeric modules.
//!
//! Tree training, attribution and embedding arithmetic need a real
//! floating-point type ([`Real`]). The agreement statistics only need a
//! field with exact zero/one and conversion from counts ([`Field`]), so they
//! also run over exact rationals.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// A floating-point scalar usable for training and prediction.
pub trait Real:
    Float + FromPrimitive + Debug + Display + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
    /// Name written into model files so that a file trained with one
    /// precision is not silently read as another.
    const NAME: &'static str;

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any Real")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count converts to any Real")
    }
}

impl Real for f32 {
    const NAME: &'static str = "f32";
}

impl Real for f64 {
    const NAME: &'static str = "f64";
}

/// The arithmetic needed to build agreement matrices: ring operations,
/// division, ordering, and conversion from integer counts.
pub trait Field: Num + Copy + FromPrimitive + PartialOrd + Debug {
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count must be representable")
    }
}

impl<T: Num + Copy + FromPrimitive + PartialOrd + Debug> Field for T {}
