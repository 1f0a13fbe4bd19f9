//! Plain-array serialization for nalgebra vectors.

use nalgebra::DVector;
use serde::Serializer;

pub(crate) fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}
