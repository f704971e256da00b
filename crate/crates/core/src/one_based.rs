//! Serde helpers that print 0-based node indices as 1-based.

use serde::ser::{SerializeSeq, Serializer};

pub fn node<S: Serializer>(v: &usize, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(*v as u64 + 1)
}

pub fn nodes<S: Serializer>(v: &[usize], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&(x + 1))?;
    }
    seq.end()
}

pub fn edges<S: Serializer>(v: &[(usize, usize)], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (a, b) in v {
        seq.serialize_element(&[a + 1, b + 1])?;
    }
    seq.end()
}

pub fn node_values<S: Serializer>(v: &[(usize, f64)], s: S) -> Result<S::Ok, S::Error> {
    #[derive(serde::Serialize)]
    struct Entry {
        node: usize,
        v_hat: f64,
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for &(node, v_hat) in v {
        seq.serialize_element(&Entry { node: node + 1, v_hat })?;
    }
    seq.end()
}
