//! Slow reference implementations used as test oracles. They work on plain
//! spin vectors and hash maps and share no code with the library.
#![allow(dead_code)]

use std::collections::HashMap;

use mrfq_core::{MrfModel, SampleSet};

fn project(row: &[i8], nodes: &[usize]) -> Vec<i8> {
    nodes.iter().map(|&j| row[j]).collect()
}

fn counts<'a>(rows: impl Iterator<Item = &'a [i8]>, nodes: &[usize]) -> HashMap<Vec<i8>, f64> {
    let mut out = HashMap::new();
    for row in rows {
        *out.entry(project(row, nodes)).or_insert(0.0) += 1.0;
    }
    out
}

fn cat(parts: &[&[usize]]) -> Vec<usize> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// `v̂` by re-enumerating the samples: sum over observed `(x_u, x_I, x_S)` of
/// `p̂(x_u) p̂(x_I) |p̂(x_u,x_I,x_S) − p̂(x_u,x_S) p̂(x_I,x_S) / p̂(x_S)|`.
pub fn naive_v_hat(samples: &SampleSet, u: usize, s: &[usize], i: &[usize]) -> f64 {
    let m = samples.len() as f64;
    let c_u = counts(samples.rows(), &[u]);
    let c_i = counts(samples.rows(), i);
    let c_s = counts(samples.rows(), s);
    let c_us = counts(samples.rows(), &cat(&[&[u], s]));
    let c_is = counts(samples.rows(), &cat(&[i, s]));
    let c_uis = counts(samples.rows(), &cat(&[&[u], i, s]));
    let (li, ls) = (i.len(), s.len());
    let mut v = 0.0;
    for (key, c) in &c_uis {
        let xu = &key[..1];
        let xi = &key[1..1 + li];
        let xs = &key[1 + li..1 + li + ls];
        let p_uis = c / m;
        let p_us = c_us[&[xu, xs].concat()] / m;
        let p_is = c_is[&[xi, xs].concat()] / m;
        let p_s = c_s[xs] / m;
        v += (c_u[xu] / m) * (c_i[xi] / m) * (p_uis - p_us * p_is / p_s).abs();
    }
    v
}

/// Every spin configuration of `n` nodes with its probability, from the
/// model energies directly.
pub fn brute_force_joint(model: &MrfModel) -> Vec<(Vec<i8>, f64)> {
    let n = model.n();
    let mut out: Vec<(Vec<i8>, f64)> = (0..1u32 << n)
        .map(|bits| {
            let x: Vec<i8> = (0..n).map(|j| if bits >> j & 1 == 1 { 1 } else { -1 }).collect();
            let w = model.energy(&x).exp();
            (x, w)
        })
        .collect();
    let z: f64 = out.iter().map(|(_, w)| w).sum();
    for (_, w) in &mut out {
        *w /= z;
    }
    out
}

fn marginal(joint: &[(Vec<i8>, f64)], nodes: &[usize]) -> HashMap<Vec<i8>, f64> {
    let mut out = HashMap::new();
    for (x, p) in joint {
        *out.entry(project(x, nodes)).or_insert(0.0) += p;
    }
    out
}

/// Exact `v_{u,I|S}` over all configurations with `p(x_S) > 0`.
pub fn naive_true_v(joint: &[(Vec<i8>, f64)], u: usize, s: &[usize], i: &[usize]) -> f64 {
    let p_u = marginal(joint, &[u]);
    let p_i = marginal(joint, i);
    let p_s = marginal(joint, s);
    let p_us = marginal(joint, &cat(&[&[u], s]));
    let p_is = marginal(joint, &cat(&[i, s]));
    let p_uis = marginal(joint, &cat(&[&[u], i, s]));
    let (li, ls) = (i.len(), s.len());
    let mut v = 0.0;
    for (key, p) in &p_uis {
        let xu = &key[..1];
        let xi = &key[1..1 + li];
        let xs = &key[1 + li..1 + li + ls];
        let ps = p_s[xs];
        if ps <= 0.0 {
            continue;
        }
        v += p_u[xu] * p_i[xi] * (p - p_us[&[xu, xs].concat()] * p_is[&[xi, xs].concat()] / ps).abs();
    }
    v
}

/// All subsets of `pool` with at most `k` elements, including the empty set.
pub fn subsets_up_to(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for size in 1..=k.min(pool.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.iter().map(|&t| pool[t]).collect());
            let mut p = size;
            while p > 0 && idx[p - 1] == pool.len() - size + p - 1 {
                p -= 1;
            }
            if p == 0 {
                break;
            }
            idx[p - 1] += 1;
            for q in p..size {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    out
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
