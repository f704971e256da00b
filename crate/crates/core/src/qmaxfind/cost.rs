//! Closed-form run-time predictions, all reported as log2 values so that the
//! astronomically large `L` of realistic models stays representable.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{binomial_f64, constants_from_gamma};

/// Leading constants for each cost formula; all default to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    pub membership: f64,
    pub prep_i: f64,
    pub prep_is: f64,
    pub prep_v: f64,
    pub subset_find: f64,
    pub total_quantum: f64,
    pub classical: f64,
    /// Constant in `2^L M n^{(r+1)/2} log(1/w) = C3 M n^r`.
    pub c3: f64,
    /// Constant of the closed-form crossover `C4 (2^{2L} log²(1/w))^{1/(r-1)}`.
    pub c4: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            membership: 1.0,
            prep_i: 1.0,
            prep_is: 1.0,
            prep_v: 1.0,
            subset_find: 1.0,
            total_quantum: 1.0,
            classical: 1.0,
            c3: 1.0,
            c4: 1.0,
        }
    }
}

fn lg(x: f64) -> f64 {
    x.log2()
}

impl CostModel {
    /// Membership test: `l log n`.
    pub fn membership_log2(&self, l: f64, n: f64) -> f64 {
        lg(self.membership) + lg(l) + lg(lg(n))
    }

    /// Preparing `p̂(x_I)`: `2^{r-1} M + M log n`.
    pub fn prep_i_log2(&self, r: f64, m: f64, n: f64) -> f64 {
        lg(self.prep_i) + lg(m) + lg((r - 1.0).exp2() + lg(n))
    }

    /// Preparing `p̂(x_I, x_S)`: `|S| M (log n + s 2^{r-1})`.
    pub fn prep_is_log2(&self, s_len: f64, m: f64, s: f64, r: f64, n: f64) -> f64 {
        lg(self.prep_is) + lg(s_len) + lg(m) + lg(lg(n) + s * (r - 1.0).exp2())
    }

    /// Preparing the `v̂` oracle: `|S| M (s 2^{r-1} + log n)`.
    pub fn prep_v_log2(&self, s_len: f64, m: f64, s: f64, r: f64, n: f64) -> f64 {
        lg(self.prep_v) + lg(s_len) + lg(m) + lg(s * (r - 1.0).exp2() + lg(n))
    }

    /// One subset search: `|S| s 2^{r-1} M √(n^{r-1}) log(1/w)`.
    pub fn subset_find_log2(&self, s_len: f64, s: f64, r: f64, m: f64, n: f64, w: f64) -> f64 {
        lg(self.subset_find) + lg(s_len) + lg(s) + (r - 1.0) + lg(m)
            + 0.5 * (r - 1.0) * lg(n)
            + lg(lg(1.0 / w))
    }

    /// Whole quantum learner: `2^L M √(n^{r+1}) log(1/w)`, `L` given directly.
    pub fn total_quantum_log2(&self, cap_l: f64, m: f64, n: f64, r: f64, w: f64) -> f64 {
        lg(self.total_quantum) + cap_l + lg(m) + 0.5 * (r + 1.0) * lg(n) + lg(lg(1.0 / w))
    }

    /// Classical learner: `M n^r`.
    pub fn classical_log2(&self, m: f64, n: f64, r: f64) -> f64 {
        lg(self.classical) + lg(m) + r * lg(n)
    }
}

/// log2 of the `n` where the quantum and classical totals meet:
/// `(2/(r-1)) (L + log2 log2(1/w) − log2 C3)`.
pub fn crossover_log2_n(cap_l: f64, w: f64, r: usize, c3: f64) -> Result<f64> {
    if r < 2 {
        return invalid("crossover needs r >= 2");
    }
    if !(w > 0.0 && w < 1.0) {
        return invalid(format!("w = {w} must lie in (0,1)"));
    }
    Ok(2.0 / (r - 1) as f64 * (cap_l + lg(lg(1.0 / w)) - lg(c3)))
}

/// log2 of `C4 (2^{2L} log²(1/w))^{1/(r-1)}`.
pub fn crossover_closed_form_log2(cap_l: f64, w: f64, r: usize, c4: f64) -> Result<f64> {
    if r < 2 {
        return invalid("crossover needs r >= 2");
    }
    if !(w > 0.0 && w < 1.0) {
        return invalid(format!("w = {w} must lie in (0,1)"));
    }
    Ok(lg(c4) + (2.0 * cap_l + 2.0 * lg(lg(1.0 / w))) / (r - 1) as f64)
}

/// `β Σ_{l=1}^{r} C(d, l-1)`: every clique through a node has at most `r`
/// nodes, and there are at most `C(d, l-1)` of size `l`.
pub fn gamma_upper_bound(beta: f64, r: usize, d: usize) -> f64 {
    beta * (1..=r).map(|l| binomial_f64(d, l - 1)).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostPrediction {
    pub n: usize,
    pub r: usize,
    pub d: usize,
    pub m: u64,
    pub w: f64,
    pub gamma_bound: f64,
    pub log2_tau: f64,
    /// `L = 8/τ²` and its log2.
    pub cap_l: f64,
    pub log2_cap_l: f64,
    /// `|S|` and `s` plugged into the per-round formulas.
    pub s_len: f64,
    pub s_configs: f64,
    pub log2_membership: f64,
    pub log2_prep_i: f64,
    pub log2_prep_is: f64,
    pub log2_prep_v: f64,
    pub log2_subset_find: f64,
    pub log2_total_quantum: f64,
    pub log2_classical: f64,
    pub log2_crossover_n: f64,
    pub crossover_n: f64,
    pub log2_crossover_closed_form: f64,
    pub crossover_closed_form: f64,
    pub costs: CostModel,
}

#[allow(clippy::too_many_arguments)]
pub fn predict_costs(
    n: usize,
    r: usize,
    d: usize,
    m: u64,
    w: f64,
    alpha: f64,
    beta: f64,
    costs: &CostModel,
) -> Result<CostPrediction> {
    if n < 2 || r < 2 || m == 0 {
        return invalid("predictions need n >= 2, r >= 2 and M >= 1");
    }
    let gamma = gamma_upper_bound(beta, r, d);
    let k = constants_from_gamma(alpha, gamma, r, d, n, w)?;
    let (nf, rf, mf) = (n as f64, r as f64, m as f64);
    let s_len = k.cap_l.min(nf - 1.0).max(1.0);
    let s_configs = s_len.exp2().min(mf);
    let log2_crossover_n = crossover_log2_n(k.cap_l, w, r, costs.c3)?;
    let log2_closed = crossover_closed_form_log2(k.cap_l, w, r, costs.c4)?;
    Ok(CostPrediction {
        n,
        r,
        d,
        m,
        w,
        gamma_bound: gamma,
        log2_tau: k.log2_tau,
        cap_l: k.cap_l,
        log2_cap_l: k.log2_cap_l,
        s_len,
        s_configs,
        log2_membership: costs.membership_log2(rf - 1.0, nf),
        log2_prep_i: costs.prep_i_log2(rf, mf, nf),
        log2_prep_is: costs.prep_is_log2(s_len, mf, s_configs, rf, nf),
        log2_prep_v: costs.prep_v_log2(s_len, mf, s_configs, rf, nf),
        log2_subset_find: costs.subset_find_log2(s_len, s_configs, rf, mf, nf, w),
        log2_total_quantum: costs.total_quantum_log2(k.cap_l, mf, nf, rf, w),
        log2_classical: costs.classical_log2(mf, nf, rf),
        log2_crossover_n,
        crossover_n: log2_crossover_n.exp2(),
        log2_crossover_closed_form: log2_closed,
        crossover_closed_form: log2_closed.exp2(),
        costs: *costs,
    })
}
