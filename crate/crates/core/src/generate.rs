//! Model presets and random bounded-degree model generation.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{MrfError, Result};
use crate::model::{CliqueTensor, MrfModel};
use crate::seed::rng_from_seed;

/// The five-node, 3-wise example: hyperedges (1,2,5) and (2,4,5), seven
/// pairwise cliques, five singletons. Vertices here are 0-based.
pub fn figure1() -> MrfModel {
    let fields = [0.05, -0.05, 0.05, 0.05, -0.05];
    let pairs: [((usize, usize), f64); 7] = [
        ((0, 1), 0.3),
        ((0, 2), 0.35),
        ((0, 4), 0.25),
        ((1, 3), 0.3),
        ((1, 4), 0.25),
        ((2, 3), 0.35),
        ((3, 4), 0.3),
    ];
    let triples: [([usize; 3], f64); 2] = [([0, 1, 4], 0.2), ([1, 3, 4], -0.2)];

    let mut cliques = Vec::new();
    for (v, h) in fields.iter().enumerate() {
        cliques.push(CliqueTensor::from_fn(vec![v], |x| h * f64::from(x[0])).unwrap());
    }
    for ((i, j), coupling) in pairs {
        cliques.push(
            CliqueTensor::from_fn(vec![i, j], |x| coupling * f64::from(x[0] * x[1])).unwrap(),
        );
    }
    for (vs, k) in triples {
        cliques.push(
            CliqueTensor::from_fn(vs.to_vec(), |x| k * f64::from(x[0] * x[1] * x[2])).unwrap(),
        );
    }
    MrfModel::new(5, 3, 0.2, 1.0, cliques).expect("figure-1 preset is well formed")
}

/// Parameters of a random r-wise model with maximum degree `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomModelSpec {
    pub n: usize,
    pub r: usize,
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Fraction of the degree budget to fill with hyperedges, in (0, 1].
    #[serde(default = "one")]
    pub density: f64,
    /// Add a random external field (singleton tensor) on every node.
    #[serde(default)]
    pub fields: bool,
}

fn one() -> f64 {
    1.0
}

impl RandomModelSpec {
    pub fn new(n: usize, r: usize, d: usize, alpha: f64, beta: f64) -> Self {
        Self { n, r, d, alpha, beta, density: 1.0, fields: false }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(MrfError::InvalidArgument(m));
        if self.n == 0 || self.n > crate::model::MAX_NODES {
            return bad(format!("n = {} outside 1..={}", self.n, crate::model::MAX_NODES));
        }
        if self.r == 0 || self.r > self.n {
            return bad(format!("r = {} must lie in 1..=n (n = {})", self.r, self.n));
        }
        if self.d >= self.n {
            return bad(format!(
                "degree bound d = {} infeasible for n = {} (max degree is n-1)",
                self.d, self.n
            ));
        }
        if self.r >= 2 && self.d < self.r - 1 {
            return bad(format!(
                "a clique of size r = {} needs degree at least {}, got d = {}",
                self.r,
                self.r - 1,
                self.d
            ));
        }
        if !(self.alpha > 0.0 && self.alpha <= self.beta) {
            return bad(format!("need 0 < alpha <= beta, got {} and {}", self.alpha, self.beta));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad(format!("density {} outside (0, 1]", self.density));
        }
        Ok(())
    }
}

/// Random hypergraph with every node degree at most `d`; each hyperedge gets a
/// dense tensor with entries drawn from `[-β,-α] ∪ [α,β]`, so the result is
/// non-degenerate by construction. It is validated before being returned.
pub fn random_model(spec: &RandomModelSpec, seed: u64) -> Result<MrfModel> {
    spec.check()?;
    let mut rng = rng_from_seed(seed);
    let n = spec.n;
    let mut neighbors = vec![BTreeSet::<usize>::new(); n];
    let mut edges: Vec<Vec<usize>> = Vec::new();

    if spec.r >= 2 && spec.d > 0 {
        let target = ((spec.density * (n * spec.d) as f64) / spec.r as f64).ceil().max(1.0) as usize;
        for _ in 0..40 * n {
            if edges.len() >= target {
                break;
            }
            let size = rng.gen_range(2..=spec.r);
            let mut vs = sample(&mut rng, n, size).into_vec();
            vs.sort_unstable();
            let overlaps = edges
                .iter()
                .any(|e| vs.iter().all(|v| e.contains(v)) || e.iter().all(|v| vs.contains(v)));
            if overlaps {
                continue;
            }
            let fits = vs.iter().all(|&a| {
                let mut nb = neighbors[a].clone();
                nb.extend(vs.iter().copied().filter(|&b| b != a));
                nb.len() <= spec.d
            });
            if !fits {
                continue;
            }
            for &a in &vs {
                neighbors[a].extend(vs.iter().copied().filter(|&b| b != a));
            }
            edges.push(vs);
        }
    }

    let draw = |rng: &mut crate::seed::Rng| {
        let mag = rng.gen_range(spec.alpha..=spec.beta);
        if rng.gen::<bool>() {
            mag
        } else {
            -mag
        }
    };
    let mut cliques = Vec::new();
    if spec.fields {
        for v in 0..n {
            let entries = (0..2).map(|_| draw(&mut rng)).collect();
            cliques.push(CliqueTensor::new(vec![v], entries)?);
        }
    }
    for vs in edges {
        let entries = (0..1usize << vs.len()).map(|_| draw(&mut rng)).collect();
        cliques.push(CliqueTensor::new(vs, entries)?);
    }
    let model = MrfModel::new(n, spec.r, spec.alpha, spec.beta, cliques)?;
    let violations = model.validate();
    if let Some(v) = violations.first() {
        return Err(MrfError::InvalidArgument(format!("generated model is degenerate: {v}")));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure1_shape() {
        let m = figure1();
        assert_eq!(m.n(), 5);
        assert_eq!(m.r(), 3);
        assert_eq!(m.cliques().len(), 5 + 7 + 2);
        assert_eq!(m.neighborhoods().edges().len(), 7);
    }

    #[test]
    fn random_models_respect_degree_and_validate() {
        for seed in 0..50 {
            let spec = RandomModelSpec::new(10, 2, 3, 0.2, 0.6);
            let m = random_model(&spec, seed).unwrap();
            assert!(m.validate().is_empty());
            assert!(m.degree() <= 3);
            assert!(!m.cliques().is_empty());
        }
    }

    #[test]
    fn fields_are_optional() {
        let mut spec = RandomModelSpec::new(6, 3, 2, 0.2, 0.6);
        spec.fields = true;
        let m = random_model(&spec, 1).unwrap();
        assert!(m.cliques().iter().filter(|c| c.order() == 1).count() == 6);
    }

    #[test]
    fn infeasible_specs_are_rejected() {
        assert!(random_model(&RandomModelSpec::new(5, 2, 5, 0.2, 0.6), 0).is_err());
        assert!(random_model(&RandomModelSpec::new(5, 4, 2, 0.2, 0.6), 0).is_err());
        assert!(random_model(&RandomModelSpec::new(5, 6, 4, 0.2, 0.6), 0).is_err());
        assert!(random_model(&RandomModelSpec::new(5, 2, 2, 0.7, 0.6), 0).is_err());
    }

    #[test]
    fn generation_is_seeded() {
        let spec = RandomModelSpec::new(8, 3, 3, 0.2, 0.6);
        assert_eq!(random_model(&spec, 11).unwrap(), random_model(&spec, 11).unwrap());
    }
}
