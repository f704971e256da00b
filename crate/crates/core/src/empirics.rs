//! The information quantity `v_{u,I|S}` and its empirical estimate.
//!
//! The estimate is
//!
//! ```text
//! v̂ = Σ p̂(x_u) p̂(x_I) | p̂(x_u,x_I,x_S) − p̂(x_u,x_S) p̂(x_I,x_S) / p̂(x_S) |
//! ```
//!
//! summed over the `(x_u, x_I, x_S)` triples that occur in the samples, so
//! `p̂(x_S) > 0` for every term. The exact quantity [`true_v`] uses the same
//! expression with probabilities from a joint table, summed over every
//! configuration with `p(x_S) > 0`.
//!
//! Samples are first collapsed into a histogram of distinct rows; each `v̂`
//! query then costs `O(R log R)` in the number of distinct rows `R`, not `O(M)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, MrfError, Result};
use crate::sampler::{JointTable, SampleSet};

/// Distinct bit-packed sample rows with multiplicities, sorted by row.
#[derive(Clone, Debug)]
pub struct RowHistogram {
    n: usize,
    m_count: u64,
    rows: Vec<(u64, u64)>,
}

impl RowHistogram {
    pub fn new(samples: &SampleSet) -> Self {
        let mut packed = samples.packed_rows();
        packed.sort_unstable();
        let mut rows: Vec<(u64, u64)> = Vec::new();
        for r in packed {
            match rows.last_mut() {
                Some((last, c)) if *last == r => *c += 1,
                _ => rows.push((r, 1)),
            }
        }
        Self { n: samples.n(), m_count: samples.len() as u64, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_count(&self) -> u64 {
        self.m_count
    }

    pub fn distinct_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Packs the spins of `nodes` into an integer, first node most significant.
#[inline]
fn extract(row: u64, nodes: &[usize]) -> u64 {
    nodes.iter().fold(0u64, |acc, &j| (acc << 1) | ((row >> j) & 1))
}

fn code_to_spins(code: u64, len: usize) -> Vec<i8> {
    (0..len)
        .map(|k| if (code >> (len - 1 - k)) & 1 == 1 { 1 } else { -1 })
        .collect()
}

/// Target node `u`, conditioning set `S`, and the configurations of `S`
/// observed in the samples with their counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditioningContext {
    pub u: usize,
    pub s_set: Vec<usize>,
    /// `(b_t, count)` sorted by the packed code of `b_t`.
    pub s_configs: Vec<(u64, u64)>,
}

/// Per-context empirical tables: counts of `x_u`, `x_S`, `(x_u, x_S)`.
/// Tables for a queried `I` are built on demand by [`EmpiricalProbCache::joint_counts`].
#[derive(Clone, Debug)]
pub struct EmpiricalProbCache<'h> {
    hist: &'h RowHistogram,
    ctx: ConditioningContext,
    u_counts: [u64; 2],
    /// `((x_S code, x_u bit), count)`, sorted.
    us_counts: Vec<((u64, u8), u64)>,
}

/// One observed `(x_u, x_I, x_S)` triple with its counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TripleCount {
    pub xu: u8,
    pub xi: u64,
    pub xs: u64,
    pub c_uis: u64,
    pub c_is: u64,
    pub c_us: u64,
    pub c_s: u64,
}

/// One term of the `v̂` sum, for debugging output.
#[derive(Clone, Debug, Serialize)]
pub struct VhatTerm {
    pub x_u: i8,
    pub x_i: Vec<i8>,
    pub x_s: Vec<i8>,
    /// `p̂(x_u) p̂(x_I)`
    pub weight: f64,
    /// `|p̂(x_u,x_I,x_S) − p̂(x_u,x_S) p̂(x_I,x_S) / p̂(x_S)|`
    pub deviation: f64,
    pub contribution: f64,
}

fn check_nodes(n: usize, nodes: &[usize], what: &str) -> Result<()> {
    if let Some(&bad) = nodes.iter().find(|&&j| j >= n) {
        return invalid(format!("{what} contains node {} outside 1..={n}", bad + 1));
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return invalid(format!("{what} has repeated nodes"));
    }
    Ok(())
}

impl<'h> EmpiricalProbCache<'h> {
    pub fn new(hist: &'h RowHistogram, u: usize, s_set: &[usize]) -> Result<Self> {
        if hist.m_count == 0 {
            return Err(MrfError::EmptySamples);
        }
        check_nodes(hist.n, &[u], "target")?;
        check_nodes(hist.n, s_set, "conditioning set")?;
        if s_set.contains(&u) {
            return invalid("conditioning set contains the target node");
        }
        let mut s_set = s_set.to_vec();
        s_set.sort_unstable();

        let mut u_counts = [0u64; 2];
        let mut us: BTreeMap<(u64, u8), u64> = BTreeMap::new();
        let mut s: BTreeMap<u64, u64> = BTreeMap::new();
        for &(row, c) in &hist.rows {
            let xu = ((row >> u) & 1) as u8;
            let xs = extract(row, &s_set);
            u_counts[xu as usize] += c;
            *us.entry((xs, xu)).or_default() += c;
            *s.entry(xs).or_default() += c;
        }
        Ok(Self {
            hist,
            ctx: ConditioningContext { u, s_set, s_configs: s.into_iter().collect() },
            u_counts,
            us_counts: us.into_iter().collect(),
        })
    }

    pub fn context(&self) -> &ConditioningContext {
        &self.ctx
    }

    pub fn m_count(&self) -> u64 {
        self.hist.m_count
    }

    pub fn histogram(&self) -> &'h RowHistogram {
        self.hist
    }

    /// `p̂(x_u = spin)`.
    pub fn p_u(&self, spin: i8) -> f64 {
        self.u_counts[usize::from(spin > 0)] as f64 / self.hist.m_count as f64
    }

    fn check_i(&self, i_set: &[usize]) -> Result<()> {
        if i_set.is_empty() {
            return invalid("candidate set I is empty");
        }
        check_nodes(self.hist.n, i_set, "candidate set")?;
        if i_set.iter().any(|j| *j == self.ctx.u || self.ctx.s_set.contains(j)) {
            return invalid("candidate set overlaps {u} ∪ S");
        }
        Ok(())
    }

    /// Counts of every observed triple, sorted by `(x_S, x_I, x_u)`, plus
    /// the marginal counts of `x_I` indexed by its code.
    pub fn joint_counts(&self, i_set: &[usize]) -> Result<(Vec<TripleCount>, Vec<u64>)> {
        self.check_i(i_set)?;
        let u = self.ctx.u;
        let li = i_set.len();
        let ls = self.ctx.s_set.len();
        let mut i_counts = vec![0u64; 1 << li];
        let mut keyed: Vec<(u64, u64)> = self
            .hist
            .rows
            .iter()
            .map(|&(row, c)| {
                let xi = extract(row, i_set);
                i_counts[xi as usize] += c;
                let xs = extract(row, &self.ctx.s_set);
                let key = ((xs << li | xi) << 1) | ((row >> u) & 1);
                (key, c)
            })
            .collect();
        keyed.sort_unstable_by_key(|&(k, _)| k);

        // Merge equal keys.
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(keyed.len());
        for (k, c) in keyed {
            match merged.last_mut() {
                Some((lk, lc)) if *lk == k => *lc += c,
                _ => merged.push((k, c)),
            }
        }

        let mut out = Vec::with_capacity(merged.len());
        let mut start = 0;
        while start < merged.len() {
            // Group by (x_S, x_I): keys differing only in the x_u bit.
            let is_key = merged[start].0 >> 1;
            let mut end = start;
            let mut c_is = 0;
            while end < merged.len() && merged[end].0 >> 1 == is_key {
                c_is += merged[end].1;
                end += 1;
            }
            for &(k, c) in &merged[start..end] {
                let xu = (k & 1) as u8;
                let xi = (k >> 1) & ((1u64 << li) - 1);
                let xs = if ls == 0 { 0 } else { k >> (li + 1) };
                out.push(TripleCount {
                    xu,
                    xi,
                    xs,
                    c_uis: c,
                    c_is,
                    c_us: self.us_count(xs, xu),
                    c_s: self.s_count(xs),
                });
            }
            start = end;
        }
        Ok((out, i_counts))
    }

    fn us_count(&self, xs: u64, xu: u8) -> u64 {
        self.us_counts
            .binary_search_by_key(&(xs, xu), |&(k, _)| k)
            .map(|i| self.us_counts[i].1)
            .unwrap_or(0)
    }

    fn s_count(&self, xs: u64) -> u64 {
        self.ctx
            .s_configs
            .binary_search_by_key(&xs, |&(k, _)| k)
            .map(|i| self.ctx.s_configs[i].1)
            .unwrap_or(0)
    }

    /// `v̂_{u,I|S}`.
    pub fn v_hat(&self, i_set: &[usize]) -> Result<f64> {
        let (triples, i_counts) = self.joint_counts(i_set)?;
        let m = self.hist.m_count as f64;
        Ok(triples
            .iter()
            .map(|t| {
                let w = self.u_counts[t.xu as usize] as f64 / m * (i_counts[t.xi as usize] as f64 / m);
                w * deviation(t, m)
            })
            .sum())
    }

    /// Per-triple terms of `v̂`, in `(x_S, x_I, x_u)` order.
    pub fn breakdown(&self, i_set: &[usize]) -> Result<Vec<VhatTerm>> {
        let (triples, i_counts) = self.joint_counts(i_set)?;
        let m = self.hist.m_count as f64;
        Ok(triples
            .iter()
            .map(|t| {
                let weight =
                    self.u_counts[t.xu as usize] as f64 / m * (i_counts[t.xi as usize] as f64 / m);
                let dev = deviation(t, m);
                VhatTerm {
                    x_u: if t.xu == 1 { 1 } else { -1 },
                    x_i: code_to_spins(t.xi, i_set.len()),
                    x_s: code_to_spins(t.xs, self.ctx.s_set.len()),
                    weight,
                    deviation: dev,
                    contribution: weight * dev,
                }
            })
            .collect())
    }

    /// `Σ_{x_I} p̂(x_u, x_I, x_S) = p̂(x_u, x_S)` for every observed `(x_u, x_S)`.
    pub fn is_consistent(&self, i_set: &[usize]) -> Result<bool> {
        let (triples, _) = self.joint_counts(i_set)?;
        let mut sums: BTreeMap<(u64, u8), u64> = BTreeMap::new();
        for t in &triples {
            *sums.entry((t.xs, t.xu)).or_default() += t.c_uis;
        }
        Ok(sums.len() == self.us_counts.len()
            && sums.iter().all(|(&(xs, xu), &c)| self.us_count(xs, xu) == c))
    }
}

#[inline]
fn deviation(t: &TripleCount, m: f64) -> f64 {
    let p_uis = t.c_uis as f64 / m;
    let p_us = t.c_us as f64 / m;
    let p_is = t.c_is as f64 / m;
    let p_s = t.c_s as f64 / m;
    (p_uis - p_us * p_is / p_s).abs()
}

/// Empirical probability of each observed configuration of `nodes`.
pub fn empirical_prob(samples: &SampleSet, nodes: &[usize]) -> Result<BTreeMap<Vec<i8>, f64>> {
    if nodes.is_empty() {
        return invalid("empty node tuple");
    }
    check_nodes(samples.n(), nodes, "node tuple")?;
    let mut counts: BTreeMap<Vec<i8>, u64> = BTreeMap::new();
    for row in samples.rows() {
        *counts.entry(nodes.iter().map(|&j| row[j]).collect()).or_default() += 1;
    }
    let m = samples.len() as f64;
    Ok(counts.into_iter().map(|(k, c)| (k, c as f64 / m)).collect())
}

/// One-shot `v̂_{u,I|S}` straight from a sample set.
pub fn v_hat(samples: &SampleSet, u: usize, s_set: &[usize], i_set: &[usize]) -> Result<f64> {
    let hist = RowHistogram::new(samples);
    EmpiricalProbCache::new(&hist, u, s_set)?.v_hat(i_set)
}

/// Exact `v_{u,I|S}` from the joint table.
pub fn true_v(table: &JointTable, u: usize, s_set: &[usize], i_set: &[usize]) -> Result<f64> {
    let n = table.n();
    check_nodes(n, &[u], "target")?;
    check_nodes(n, s_set, "conditioning set")?;
    check_nodes(n, i_set, "candidate set")?;
    if i_set.is_empty() {
        return invalid("candidate set I is empty");
    }
    if s_set.contains(&u) || i_set.iter().any(|j| *j == u || s_set.contains(j)) {
        return invalid("u, S and I must be disjoint");
    }
    let li = i_set.len();
    let ls = s_set.len();
    let mut nodes = vec![u];
    nodes.extend_from_slice(i_set);
    nodes.extend_from_slice(s_set);
    // Index layout: x_u (msb), x_I, x_S (lsb).
    let joint = table.marginal(&nodes);
    let ns = 1usize << ls;
    let ni = 1usize << li;
    let idx = |xu: usize, xi: usize, xs: usize| (xu << (li + ls)) | (xi << ls) | xs;

    let mut p_u = [0.0; 2];
    let mut p_i = vec![0.0; ni];
    let mut p_s = vec![0.0; ns];
    let mut p_us = vec![[0.0; 2]; ns];
    let mut p_is = vec![0.0; ni * ns];
    for xu in 0..2 {
        for xi in 0..ni {
            for xs in 0..ns {
                let p = joint[idx(xu, xi, xs)];
                p_u[xu] += p;
                p_i[xi] += p;
                p_s[xs] += p;
                p_us[xs][xu] += p;
                p_is[xi * ns + xs] += p;
            }
        }
    }
    let mut v = 0.0;
    for xs in 0..ns {
        if p_s[xs] <= 0.0 {
            continue;
        }
        for xi in 0..ni {
            for xu in 0..2 {
                let dev = (joint[idx(xu, xi, xs)] - p_us[xs][xu] * p_is[xi * ns + xs] / p_s[xs]).abs();
                v += p_u[xu] * p_i[xi] * dev;
            }
        }
    }
    Ok(v)
}

/// `v > τ`, strictly.
pub fn threshold_test(v_value: f64, tau: f64) -> bool {
    debug_assert!(tau > 0.0, "threshold must be positive");
    v_value > tau
}
