//! Serialization helpers shared by the estimators and oracles.

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

/// Writes a `BigUint` as a decimal string so JSON readers keep every digit.
pub fn ser_biguint<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Writes a list of `BigUint` values as decimal strings.
pub fn ser_biguint_vec<S: Serializer>(xs: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    let v: Vec<String> = xs.iter().map(BigUint::to_string).collect();
    v.serialize(s)
}

/// Pretty JSON for any serializable report.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize infallibly")
}
