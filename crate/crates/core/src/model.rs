//! Binary r-wise Markov random fields.
//!
//! A model is a list of cliques (hyperedges), each carrying a dense
//! interaction tensor over the `2^l` spin configurations of its vertices.
//! The joint distribution is `p(x) ∝ exp(Σ_c θ_c(x_c))` over `x ∈ {-1,+1}^n`.
//!
//! Node indices are 0-based in memory. The JSON model file uses 1-based
//! indices; [`MrfModel::from_json`] and [`MrfModel::to_json`] are the only
//! places that convert.
//!
//! # Tensor entry order
//!
//! Entry `k` of a clique with vertices `(v_0, …, v_{l-1})` is the weight of the
//! configuration whose spins are read off the binary digits of `k`: `-1 ↦ 0`,
//! `+1 ↦ 1`, with the least-significant bit belonging to the *last* vertex.
//! For a pair `(i, j)` the order is `(-,-), (-,+), (+,-), (+,+)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MrfError, Result};

/// Largest supported node count. Sample rows are packed into one `u64`.
pub const MAX_NODES: usize = 64;

/// Index of `config` (spins of the clique's vertices, in vertex order).
#[inline]
pub fn config_index(config: &[i8]) -> usize {
    config
        .iter()
        .fold(0usize, |acc, &s| (acc << 1) | usize::from(s > 0))
}

/// Spins encoded by `index` for a clique of `len` vertices.
pub fn index_config(index: usize, len: usize) -> Vec<i8> {
    (0..len)
        .map(|k| if (index >> (len - 1 - k)) & 1 == 1 { 1 } else { -1 })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliqueTensor {
    vertices: Vec<usize>,
    entries: Vec<f64>,
}

impl CliqueTensor {
    /// Checks shape only: non-empty, strictly increasing vertices,
    /// `2^l` finite entries. Range checks against `n` happen in [`MrfModel::new`].
    pub fn new(vertices: Vec<usize>, entries: Vec<f64>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(MrfError::Structure("clique with no vertices".into()));
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MrfError::Structure(format!(
                "clique vertices {} are not strictly increasing",
                fmt_nodes(&vertices)
            )));
        }
        if vertices.len() >= usize::BITS as usize {
            return Err(MrfError::Structure("clique too large".into()));
        }
        let expected = 1usize << vertices.len();
        if entries.len() != expected {
            return Err(MrfError::Structure(format!(
                "clique {} has {} entries, expected {expected}",
                fmt_nodes(&vertices),
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| !e.is_finite()) {
            return Err(MrfError::Structure(format!(
                "clique {} has non-finite entry {bad}",
                fmt_nodes(&vertices)
            )));
        }
        Ok(Self { vertices, entries })
    }

    /// Builds the dense table by evaluating `f` on every configuration.
    pub fn from_fn(vertices: Vec<usize>, f: impl Fn(&[i8]) -> f64) -> Result<Self> {
        let len = vertices.len();
        let entries = (0..1usize << len.min(30))
            .map(|k| f(&index_config(k, len)))
            .collect();
        Self::new(vertices, entries)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0.0)
    }

    pub fn contains(&self, node: usize) -> bool {
        self.vertices.binary_search(&node).is_ok()
    }

    /// Weight of the clique under the full configuration `x` (length n).
    #[inline]
    pub fn value(&self, x: &[i8]) -> f64 {
        let idx = self
            .vertices
            .iter()
            .fold(0usize, |acc, &v| (acc << 1) | usize::from(x[v] > 0));
        self.entries[idx]
    }

    /// Weight with the spin of `node` overridden by `spin`.
    #[inline]
    pub fn value_with(&self, x: &[i8], node: usize, spin: i8) -> f64 {
        let idx = self.vertices.iter().fold(0usize, |acc, &v| {
            let s = if v == node { spin } else { x[v] };
            (acc << 1) | usize::from(s > 0)
        });
        self.entries[idx]
    }

    pub(crate) fn scaled(&self, factor: f64) -> Self {
        Self {
            vertices: self.vertices.clone(),
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }
}

/// A non-degeneracy violation. Node indices are 0-based; `Display` prints 1-based.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// Condition 1: every clique containing the edge has an all-zero tensor.
    UnwitnessedEdge { edge: (usize, usize) },
    /// Condition 2: no entry of the hyperedge or its sub-cliques reaches alpha.
    WeakHyperedge { hyperedge: Vec<usize>, max_abs: f64 },
    /// Condition 3: an entry exceeds beta in absolute value.
    EntryAboveBeta { clique: Vec<usize>, entry: usize, value: f64 },
}

impl Violation {
    pub fn condition(&self) -> u8 {
        match self {
            Violation::UnwitnessedEdge { .. } => 1,
            Violation::WeakHyperedge { .. } => 2,
            Violation::EntryAboveBeta { .. } => 3,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnwitnessedEdge { edge } => write!(
                f,
                "condition 1: edge ({},{}) lies only in zero tensors",
                edge.0 + 1,
                edge.1 + 1
            ),
            Violation::WeakHyperedge { hyperedge, max_abs } => write!(
                f,
                "condition 2: maximal hyperedge {} has max |entry| {max_abs} below alpha",
                fmt_nodes(hyperedge)
            ),
            Violation::EntryAboveBeta { clique, entry, value } => write!(
                f,
                "condition 3: clique {} entry {entry} = {value} exceeds beta",
                fmt_nodes(clique)
            ),
        }
    }
}

/// Formats 0-based nodes as a 1-based tuple, e.g. `(1,2,5)`.
pub fn fmt_nodes(nodes: &[usize]) -> String {
    let inner: Vec<String> = nodes.iter().map(|v| (v + 1).to_string()).collect();
    format!("({})", inner.join(","))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Neighborhoods {
    pub sets: Vec<BTreeSet<usize>>,
}

impl Neighborhoods {
    pub fn of(&self, u: usize) -> &BTreeSet<usize> {
        &self.sets[u]
    }

    /// `d = max_u |N(u)|`.
    pub fn degree(&self) -> usize {
        self.sets.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Undirected edge list `(i, j)` with `i < j`.
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        self.sets
            .iter()
            .enumerate()
            .flat_map(|(u, s)| s.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect()
    }
}

/// Constants that drive the theoretical guarantees.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub gamma: f64,
    pub delta: f64,
    /// May underflow to 0 for strongly coupled models; `log2_tau` stays finite.
    pub tau: f64,
    pub log2_tau: f64,
    /// `L = 8 / tau^2`; often infinite in `f64`, see `log2_cap_l`.
    pub cap_l: f64,
    pub log2_cap_l: f64,
    /// log2 of the sample-size lower bound for failure probability `w`.
    pub log2_sample_bound: f64,
    pub w: f64,
}

/// `C(n, k)` as a float (exact for the small arguments used here).
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Natural log of the threshold `τ = 2α²δ^{r-1} / (r^{2r} 2^{r+1} C(d,r-1) γ e^{2γ})`.
pub fn ln_tau(alpha: f64, gamma: f64, r: usize, d: usize) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(MrfError::DegenerateConstants(
            "gamma = 0: the threshold divides by gamma".into(),
        ));
    }
    if !(alpha > 0.0) {
        return Err(MrfError::DegenerateConstants("alpha must be positive".into()));
    }
    let binom = binomial_f64(d, r.saturating_sub(1));
    if binom == 0.0 {
        return Err(MrfError::DegenerateConstants(format!(
            "C(d={d}, r-1={}) = 0: degree too small for r",
            r.saturating_sub(1)
        )));
    }
    let rf = r as f64;
    let ln_delta = -std::f64::consts::LN_2 - 2.0 * gamma;
    Ok(std::f64::consts::LN_2 + 2.0 * alpha.ln() + (rf - 1.0) * ln_delta
        - 2.0 * rf * rf.ln()
        - (rf + 1.0) * std::f64::consts::LN_2
        - binom.ln()
        - gamma.ln()
        - 2.0 * gamma)
}

/// Builds the full constant set from `gamma`; shared by the model and the cost model.
pub fn constants_from_gamma(
    alpha: f64,
    gamma: f64,
    r: usize,
    d: usize,
    n: usize,
    w: f64,
) -> Result<DerivedConstants> {
    if !(w > 0.0 && w < 1.0) {
        return Err(MrfError::InvalidArgument(format!("w = {w} must lie in (0,1)")));
    }
    let ln_t = ln_tau(alpha, gamma, r, d)?;
    let ln2 = std::f64::consts::LN_2;
    let log2_tau = ln_t / ln2;
    let delta = 0.5 * (-2.0 * gamma).exp();
    let log2_delta = -1.0 - 2.0 * gamma / ln2;
    let log2_cap_l = 3.0 - 2.0 * log2_tau;
    let cap_l = log2_cap_l.exp2();
    let rf = r as f64;
    let bracket =
        (1.0 / w).log2() + (cap_l + rf).log2() + (cap_l + rf) * (2.0 * n as f64).log2() + 1.0;
    let log2_sample_bound =
        60f64.log2() + 2.0 * cap_l - 2.0 * log2_tau - 2.0 * cap_l * log2_delta + bracket.log2();
    Ok(DerivedConstants {
        gamma,
        delta,
        tau: ln_t.exp(),
        log2_tau,
        cap_l,
        log2_cap_l,
        log2_sample_bound,
        w,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MrfModel {
    n: usize,
    r: usize,
    alpha: f64,
    beta: f64,
    cliques: Vec<CliqueTensor>,
}

impl MrfModel {
    /// Structural validation only; use [`MrfModel::validate`] for non-degeneracy.
    pub fn new(
        n: usize,
        r: usize,
        alpha: f64,
        beta: f64,
        cliques: Vec<CliqueTensor>,
    ) -> Result<Self> {
        if n == 0 || n > MAX_NODES {
            return Err(MrfError::Structure(format!(
                "node count {n} outside 1..={MAX_NODES}"
            )));
        }
        if r == 0 {
            return Err(MrfError::Structure("r must be at least 1".into()));
        }
        if !(alpha.is_finite() && beta.is_finite() && alpha >= 0.0 && beta >= alpha) {
            return Err(MrfError::Structure(format!(
                "need 0 <= alpha <= beta, got alpha={alpha}, beta={beta}"
            )));
        }
        let mut seen = BTreeSet::new();
        for c in &cliques {
            if c.order() > r {
                return Err(MrfError::Structure(format!(
                    "clique {} has {} vertices, more than r = {r}",
                    fmt_nodes(c.vertices()),
                    c.order()
                )));
            }
            if c.vertices().iter().any(|&v| v >= n) {
                return Err(MrfError::Structure(format!(
                    "clique {} references a node outside 1..={n}",
                    fmt_nodes(c.vertices())
                )));
            }
            if !seen.insert(c.vertices().to_vec()) {
                return Err(MrfError::Structure(format!(
                    "duplicate clique {}",
                    fmt_nodes(c.vertices())
                )));
            }
        }
        Ok(Self { n, r, alpha, beta, cliques })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn cliques(&self) -> &[CliqueTensor] {
        &self.cliques
    }

    /// `Σ_c θ_c(x_c)`, the unnormalised log-probability of `x`.
    pub fn energy(&self, x: &[i8]) -> f64 {
        self.cliques.iter().map(|c| c.value(x)).sum()
    }

    /// Indices of the cliques that contain each node.
    pub fn cliques_by_node(&self) -> Vec<Vec<usize>> {
        let mut by_node = vec![Vec::new(); self.n];
        for (ci, c) in self.cliques.iter().enumerate() {
            for &v in c.vertices() {
                by_node[v].push(ci);
            }
        }
        by_node
    }

    /// Cliques not strictly contained in another clique of the model.
    pub fn maximal_hyperedges(&self) -> BTreeSet<Vec<usize>> {
        self.maximal_indices()
            .into_iter()
            .map(|i| self.cliques[i].vertices().to_vec())
            .collect()
    }

    fn maximal_indices(&self) -> Vec<usize> {
        (0..self.cliques.len())
            .filter(|&i| {
                let a = self.cliques[i].vertices();
                !self.cliques.iter().any(|b| {
                    let b = b.vertices();
                    b.len() > a.len() && is_subset(a, b)
                })
            })
            .collect()
    }

    pub fn neighborhoods(&self) -> Neighborhoods {
        let mut sets = vec![BTreeSet::new(); self.n];
        for c in &self.cliques {
            for &a in c.vertices() {
                for &b in c.vertices() {
                    if a != b {
                        sets[a].insert(b);
                    }
                }
            }
        }
        Neighborhoods { sets }
    }

    pub fn degree(&self) -> usize {
        self.neighborhoods().degree()
    }

    /// Empty iff the model is (alpha, beta)-non-degenerate.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        // Condition 1: each edge is witnessed by a non-zero tensor.
        let mut witnessed: BTreeMap<(usize, usize), bool> = BTreeMap::new();
        for c in &self.cliques {
            let nz = !c.is_zero();
            let vs = c.vertices();
            for (k, &a) in vs.iter().enumerate() {
                for &b in &vs[k + 1..] {
                    *witnessed.entry((a, b)).or_insert(false) |= nz;
                }
            }
        }
        out.extend(
            witnessed
                .into_iter()
                .filter(|(_, ok)| !ok)
                .map(|(edge, _)| Violation::UnwitnessedEdge { edge }),
        );

        // Condition 2: max over the hyperedge and its sub-cliques reaches alpha.
        for i in self.maximal_indices() {
            let h = self.cliques[i].vertices();
            let max_abs = self
                .cliques
                .iter()
                .filter(|c| is_subset(c.vertices(), h))
                .map(CliqueTensor::max_abs)
                .fold(0.0, f64::max);
            if max_abs < self.alpha {
                out.push(Violation::WeakHyperedge { hyperedge: h.to_vec(), max_abs });
            }
        }

        // Condition 3: entries bounded by beta.
        for c in &self.cliques {
            for (k, &e) in c.entries().iter().enumerate() {
                if e.abs() > self.beta {
                    out.push(Violation::EntryAboveBeta {
                        clique: c.vertices().to_vec(),
                        entry: k,
                        value: e,
                    });
                }
            }
        }
        out
    }

    /// `γ = max_u Σ_{c ∋ u} max|θ_c|`, absent cliques counting as zero.
    pub fn gamma(&self) -> f64 {
        let mut per_node = vec![0.0f64; self.n];
        for c in &self.cliques {
            let m = c.max_abs();
            for &v in c.vertices() {
                per_node[v] += m;
            }
        }
        per_node.into_iter().fold(0.0, f64::max)
    }

    /// γ, δ, τ, L and the sample bound for failure probability `w`.
    pub fn derived_constants(&self, w: f64) -> Result<DerivedConstants> {
        constants_from_gamma(self.alpha, self.gamma(), self.r, self.degree(), self.n, w)
    }

    /// Same hypergraph with every tensor entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            r: self.r,
            alpha: self.alpha,
            beta: self.beta * factor.abs().max(1.0),
            cliques: self.cliques.iter().map(|c| c.scaled(factor)).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|v| big.binary_search(v).is_ok())
}

/// On-disk form; vertices are 1-based.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    n: usize,
    r: usize,
    alpha: f64,
    beta: f64,
    cliques: Vec<CliqueFile>,
}

#[derive(Serialize, Deserialize)]
struct CliqueFile {
    vertices: Vec<usize>,
    entries: Vec<f64>,
}

impl From<&MrfModel> for ModelFile {
    fn from(m: &MrfModel) -> Self {
        Self {
            n: m.n,
            r: m.r,
            alpha: m.alpha,
            beta: m.beta,
            cliques: m
                .cliques
                .iter()
                .map(|c| CliqueFile {
                    vertices: c.vertices.iter().map(|v| v + 1).collect(),
                    entries: c.entries.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<ModelFile> for MrfModel {
    type Error = MrfError;

    fn try_from(f: ModelFile) -> Result<Self> {
        let cliques = f
            .cliques
            .into_iter()
            .map(|c| {
                if c.vertices.contains(&0) {
                    return Err(MrfError::Structure(
                        "vertex index 0 in model file; indices are 1-based".into(),
                    ));
                }
                CliqueTensor::new(c.vertices.into_iter().map(|v| v - 1).collect(), c.entries)
            })
            .collect::<Result<Vec<_>>>()?;
        MrfModel::new(f.n, f.r, f.alpha, f.beta, cliques)
    }
}
