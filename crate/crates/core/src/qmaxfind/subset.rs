//! Index strings `(j_1, …, j_l)` packed into `⌈log2 n⌉`-bit fields, first
//! index in the most significant field. Valid strings are strictly increasing
//! and avoid the excluded nodes; everything else in the code space is filler.

use crate::error::{invalid, Result};

/// `⌈log2 n⌉`, at least 1.
pub fn bits_per_index(n: usize) -> u32 {
    (usize::BITS - n.saturating_sub(1).leading_zeros()).max(1)
}

/// `(2^{⌈log2 n⌉})^l`.
pub fn code_space_size(n: usize, l: usize) -> Result<u64> {
    let bits = bits_per_index(n) as usize * l;
    if bits >= 64 {
        return invalid(format!("code space 2^{bits} does not fit in 64 bits"));
    }
    Ok(1u64 << bits)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetString {
    pub indices: Vec<usize>,
    pub n: usize,
    pub code: u64,
}

impl SubsetString {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Packs any in-range tuple, increasing or not.
pub fn encode_subset(indices: &[usize], n: usize) -> Result<SubsetString> {
    if let Some(&j) = indices.iter().find(|&&j| j >= n) {
        return invalid(format!("index {} outside 1..={n}", j + 1));
    }
    let b = bits_per_index(n);
    code_space_size(n, indices.len())?;
    let code = indices.iter().fold(0u64, |acc, &j| (acc << b) | j as u64);
    Ok(SubsetString { indices: indices.to_vec(), n, code })
}

/// Inverse of [`encode_subset`] restricted to valid strings: `None` when a
/// field is out of range, the tuple is not strictly increasing, or it hits
/// an excluded node.
pub fn decode_string(code: u64, l: usize, n: usize, exclude: &[usize]) -> Option<Vec<usize>> {
    let b = bits_per_index(n);
    let mask = (1u64 << b) - 1;
    let mut out = vec![0usize; l];
    for k in 0..l {
        let shift = b as usize * (l - 1 - k);
        out[k] = ((code >> shift) & mask) as usize;
    }
    if l > 0 && (b as usize * l) < 64 && code >> (b as usize * l) != 0 {
        return None;
    }
    let ok = out.iter().all(|&j| j < n && !exclude.contains(&j))
        && out.windows(2).all(|w| w[0] < w[1]);
    ok.then_some(out)
}

/// Whether the string is strictly increasing, and the comparator cost:
/// `l-1` comparisons of `⌈log2 n⌉`-bit fields, returned as (comparisons, bits).
pub fn membership_check(s: &SubsetString) -> (bool, u64, u64) {
    let comparisons = s.indices.len().saturating_sub(1) as u64;
    let member = s.indices.windows(2).all(|w| w[0] < w[1]);
    (member, comparisons, comparisons * u64::from(bits_per_index(s.n)))
}
