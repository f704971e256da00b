//! Drawing samples from a model: exact inverse-CDF sampling over the full
//! joint table for small `n`, systematic-scan Gibbs sampling otherwise.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng as _;

use crate::error::{MrfError, Result};
use crate::model::{MrfModel, MAX_NODES};
use crate::seed::rng_from_seed;

/// Default node limit for exact enumeration (a 2^20 table, 8 MB).
pub const EXACT_LIMIT: usize = 20;

const MAGIC: &[u8; 8] = b"MRFSAMP1";

/// `M × n` matrix of ±1 observations, row-major, one byte per spin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSet {
    n: usize,
    m_count: usize,
    data: Vec<i8>,
    seed: u64,
}

impl SampleSet {
    pub fn new(n: usize, data: Vec<i8>, seed: u64) -> Result<Self> {
        if n == 0 || n > MAX_NODES {
            return Err(MrfError::SampleFormat(format!("n = {n} outside 1..={MAX_NODES}")));
        }
        if data.len() % n != 0 {
            return Err(MrfError::SampleFormat(format!(
                "{} entries is not a multiple of n = {n}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|&&s| s != 1 && s != -1) {
            return Err(MrfError::SampleFormat(format!("entry {bad} is not -1 or +1")));
        }
        Ok(Self { n, m_count: data.len() / n, data, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.m_count
    }

    pub fn is_empty(&self) -> bool {
        self.m_count == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn data(&self) -> &[i8] {
        &self.data
    }

    pub fn row(&self, m: usize) -> &[i8] {
        &self.data[m * self.n..(m + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i8]> {
        self.data.chunks_exact(self.n)
    }

    /// Per-sample configurations of `nodes`, in sample order.
    pub fn columns(&self, nodes: &[usize]) -> Vec<Vec<i8>> {
        self.rows().map(|r| nodes.iter().map(|&j| r[j]).collect()).collect()
    }

    /// Bit-packed view: bit `j` of row `m` is set iff `x_j = +1`.
    pub fn packed_rows(&self) -> Vec<u64> {
        self.rows()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .fold(0u64, |acc, (j, &s)| acc | (u64::from(s > 0) << j))
            })
            .collect()
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        w.write_all(&(self.m_count as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        let bytes: Vec<u8> = self.data.iter().map(|&s| s as u8).collect();
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(MrfError::SampleFormat("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let m = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let seed = u64::from_le_bytes(b8);
        let len = n
            .checked_mul(m)
            .ok_or_else(|| MrfError::SampleFormat("header size overflow".into()))?;
        let mut bytes = vec![0u8; len];
        r.read_exact(&mut bytes)?;
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(MrfError::SampleFormat(format!("{} trailing bytes", rest.len())));
        }
        Self::new(n, bytes.into_iter().map(|b| b as i8).collect(), seed)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }

    /// One sample per line, comma-separated ±1.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|s| s.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Exact joint distribution over `{-1,+1}^n`. Configuration index bits follow
/// the model-file convention: the last node is the least-significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    n: usize,
    probs: Vec<f64>,
    log_z: f64,
}

impl JointTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Natural log of the partition function.
    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// Spin of node `j` in configuration `index`.
    #[inline]
    pub fn spin(&self, index: usize, j: usize) -> i8 {
        if (index >> (self.n - 1 - j)) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn config(&self, index: usize) -> Vec<i8> {
        (0..self.n).map(|j| self.spin(index, j)).collect()
    }

    /// Marginal over `nodes`, indexed with the first listed node as the most
    /// significant bit (the clique-entry convention).
    pub fn marginal(&self, nodes: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; 1 << nodes.len()];
        for (idx, &p) in self.probs.iter().enumerate() {
            let k = nodes
                .iter()
                .fold(0usize, |acc, &j| (acc << 1) | usize::from(self.spin(idx, j) > 0));
            out[k] += p;
        }
        out
    }

    /// Table from explicit probabilities (normalised on the way in).
    pub fn from_probs(n: usize, probs: Vec<f64>) -> Result<Self> {
        if n == 0 || n > EXACT_LIMIT || probs.len() != 1 << n {
            return Err(MrfError::InvalidArgument(format!(
                "joint table of n = {n} needs 2^n entries, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(MrfError::InvalidArgument("probabilities must be finite and >= 0".into()));
        }
        let total: f64 = probs.iter().sum();
        if !(total > 0.0) {
            return Err(MrfError::InvalidArgument("probabilities sum to zero".into()));
        }
        Ok(Self { n, probs: probs.into_iter().map(|p| p / total).collect(), log_z: total.ln() })
    }
}

pub fn exact_joint(model: &MrfModel) -> Result<JointTable> {
    exact_joint_with_limit(model, EXACT_LIMIT)
}

pub fn exact_joint_with_limit(model: &MrfModel, limit: usize) -> Result<JointTable> {
    let n = model.n();
    if n > limit || n >= 31 {
        return Err(MrfError::ExactLimit { n, limit });
    }
    let mut x = vec![0i8; n];
    let energies: Vec<f64> = (0..1usize << n)
        .map(|idx| {
            for (j, s) in x.iter_mut().enumerate() {
                *s = if (idx >> (n - 1 - j)) & 1 == 1 { 1 } else { -1 };
            }
            model.energy(&x)
        })
        .collect();
    let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = energies.iter().map(|e| (e - max).exp()).collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Ok(JointTable { n, probs, log_z: max + total.ln() })
}

/// `m_count` i.i.d. draws by inverse CDF over the table.
pub fn sample_exact(table: &JointTable, m_count: usize, seed: u64) -> SampleSet {
    let mut cdf = Vec::with_capacity(table.probs.len());
    let mut acc = 0.0;
    for &p in &table.probs {
        acc += p;
        cdf.push(acc);
    }
    let last_positive = table.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut rng = rng_from_seed(seed);
    let n = table.n;
    let mut data = Vec::with_capacity(m_count * n);
    for _ in 0..m_count {
        let u: f64 = rng.gen::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= u).min(last_positive);
        data.extend((0..n).map(|j| table.spin(idx, j)));
    }
    SampleSet { n, m_count, data, seed }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GibbsDiagnostics {
    pub sweeps: usize,
    pub warnings: Vec<String>,
}

/// Probability that `x_u = +1` given every other spin, from the cliques
/// containing `u` only (the Markov blanket).
pub fn conditional_plus(model: &MrfModel, cliques_of_u: &[usize], x: &[i8], u: usize) -> f64 {
    let cl = model.cliques();
    let logit: f64 = cliques_of_u
        .iter()
        .map(|&c| cl[c].value_with(x, u, 1) - cl[c].value_with(x, u, -1))
        .sum();
    1.0 / (1.0 + (-logit).exp())
}

/// Systematic-scan Gibbs sampler. One sample is recorded every `thinning`
/// sweeps after `burn_in` sweeps; a zero in either is allowed and reported.
pub fn gibbs_sample(
    model: &MrfModel,
    m_count: usize,
    burn_in: usize,
    thinning: usize,
    seed: u64,
) -> (SampleSet, GibbsDiagnostics) {
    let mut diag = GibbsDiagnostics::default();
    if burn_in == 0 {
        diag.warnings.push("burn_in = 0: early samples depend on the initial state".into());
    }
    if thinning == 0 {
        diag.warnings.push("thinning = 0: treated as 1".into());
    }
    let thinning = thinning.max(1);
    let n = model.n();
    let by_node = model.cliques_by_node();
    let mut rng = rng_from_seed(seed);
    let mut x: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    let sweep = |x: &mut Vec<i8>, rng: &mut crate::seed::Rng| {
        for u in 0..n {
            let p = conditional_plus(model, &by_node[u], x, u);
            x[u] = if rng.gen::<f64>() < p { 1 } else { -1 };
        }
    };
    for _ in 0..burn_in {
        sweep(&mut x, &mut rng);
    }
    let mut data = Vec::with_capacity(m_count * n);
    for _ in 0..m_count {
        for _ in 0..thinning {
            sweep(&mut x, &mut rng);
        }
        data.extend_from_slice(&x);
    }
    diag.sweeps = burn_in + m_count * thinning;
    (SampleSet { n, m_count, data, seed }, diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{figure1, random_model, RandomModelSpec};
    use crate::model::CliqueTensor;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pair_model(coupling: f64) -> MrfModel {
        let c = CliqueTensor::from_fn(vec![0, 1], |x| coupling * f64::from(x[0] * x[1])).unwrap();
        MrfModel::new(2, 2, 0.1, 1.0, vec![c]).unwrap()
    }

    /// Empirical joint frequencies, indexed like the joint table.
    fn empirical_joint(s: &SampleSet) -> Vec<f64> {
        let n = s.n();
        let mut f = vec![0.0; 1 << n];
        for r in s.rows() {
            let idx = r.iter().fold(0usize, |a, &v| (a << 1) | usize::from(v > 0));
            f[idx] += 1.0 / s.len() as f64;
        }
        f
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = MrfModel::new(3, 2, 0.0, 1.0, vec![]).unwrap();
        let t = exact_joint(&m).unwrap();
        assert!(t.probs().iter().all(|&p| (p - 0.125).abs() < 1e-15));
        assert_relative_eq!(t.log_z(), 8f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn pair_model_by_hand() {
        let t = exact_joint(&pair_model(0.5)).unwrap();
        let e = 0.5f64.exp();
        let z = 2.0 * e + 2.0 / e;
        let want = [e / z, 1.0 / (e * z), 1.0 / (e * z), e / z];
        for (p, w) in t.probs().iter().zip(want) {
            assert_relative_eq!(*p, w, epsilon = 1e-14);
        }
    }

    #[test]
    fn figure1_marginal_matches_brute_force() {
        let m = figure1();
        let t = exact_joint(&m).unwrap();
        assert_relative_eq!(t.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        // Independent brute force: enumerate x directly through the model.
        let mut plus = 0.0;
        let mut z = 0.0;
        for idx in 0..32usize {
            let x: Vec<i8> = (0..5).map(|j| if idx >> j & 1 == 1 { 1 } else { -1 }).collect();
            let w = m.energy(&x).exp();
            z += w;
            if x[2] == 1 {
                plus += w;
            }
        }
        assert_relative_eq!(t.marginal(&[2])[1], plus / z, epsilon = 1e-12);
    }

    #[test]
    fn exact_limit_is_enforced() {
        let m = MrfModel::new(21, 2, 0.0, 1.0, vec![]).unwrap();
        assert!(matches!(exact_joint(&m), Err(MrfError::ExactLimit { n: 21, .. })));
        let m = MrfModel::new(6, 2, 0.0, 1.0, vec![]).unwrap();
        assert!(exact_joint_with_limit(&m, 5).is_err());
    }

    #[test]
    fn uniform_marginals_concentrate() {
        let m = MrfModel::new(4, 2, 0.0, 1.0, vec![]).unwrap();
        let s = sample_exact(&exact_joint(&m).unwrap(), 100_000, 3);
        for j in 0..4 {
            let plus = s.rows().filter(|r| r[j] == 1).count() as f64 / s.len() as f64;
            assert!((plus - 0.5).abs() < 0.01, "node {j}: {plus}");
        }
    }

    #[test]
    fn point_mass_and_empty() {
        let mut probs = vec![0.0; 8];
        probs[5] = 1.0;
        let t = JointTable::from_probs(3, probs).unwrap();
        let s = sample_exact(&t, 50, 9);
        assert!(s.rows().all(|r| r == [1, -1, 1]));
        let empty = sample_exact(&t, 0, 9);
        assert!(empty.is_empty());
    }

    #[test]
    fn sampling_is_deterministic_and_file_round_trips() {
        let t = exact_joint(&figure1()).unwrap();
        let a = sample_exact(&t, 1000, 77);
        let b = sample_exact(&t, 1000, 77);
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        a.write_to(&mut buf_a).unwrap();
        b.write_to(&mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
        assert_eq!(SampleSet::read_from(&buf_a[..]).unwrap(), a);
        assert_eq!(&buf_a[..8], b"MRFSAMP1");

        let mut bad = buf_a.clone();
        bad[0] = b'X';
        assert!(SampleSet::read_from(&bad[..]).is_err());
        bad = buf_a.clone();
        bad.push(0);
        assert!(SampleSet::read_from(&bad[..]).is_err());
    }

    #[test]
    fn csv_export() {
        let s = SampleSet::new(3, vec![1, -1, 1, -1, -1, 1], 0).unwrap();
        let mut out = Vec::new();
        s.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1,-1,1\n-1,-1,1\n");
        assert!(SampleSet::new(2, vec![1, 0], 0).is_err());
    }

    #[test]
    fn packed_rows_match_bytes() {
        let s = SampleSet::new(3, vec![1, -1, 1, -1, 1, 1], 0).unwrap();
        assert_eq!(s.packed_rows(), vec![0b101, 0b110]);
    }

    #[test]
    fn gibbs_on_zero_model_is_fair() {
        let m = MrfModel::new(3, 2, 0.0, 1.0, vec![]).unwrap();
        let (s, diag) = gibbs_sample(&m, 50_000, 10, 1, 5);
        assert!(diag.warnings.is_empty());
        for j in 0..3 {
            let plus = s.rows().filter(|r| r[j] == 1).count() as f64 / s.len() as f64;
            assert!((plus - 0.5).abs() < 0.01);
        }
        let (_, diag) = gibbs_sample(&m, 10, 0, 0, 5);
        assert_eq!(diag.warnings.len(), 2);
    }

    #[test]
    fn gibbs_matches_exact_joint_in_total_variation() {
        let m = figure1();
        let exact = exact_joint(&m).unwrap();
        let (s, _) = gibbs_sample(&m, 100_000, 1000, 1, 12);
        let emp = empirical_joint(&s);
        let tv: f64 = 0.5 * emp.iter().zip(exact.probs()).map(|(a, b)| (a - b).abs()).sum::<f64>();
        assert!(tv <= 0.02, "TV distance {tv}");
    }

    #[test]
    fn positive_coupling_gives_positive_correlation() {
        let m = pair_model(0.4);
        let (s, _) = gibbs_sample(&m, 20_000, 100, 1, 2);
        let corr: f64 = s.rows().map(|r| f64::from(r[0] * r[1])).sum::<f64>() / s.len() as f64;
        let t = exact_joint(&m).unwrap();
        let exact_corr = t.probs()[0] + t.probs()[3] - t.probs()[1] - t.probs()[2];
        assert!(exact_corr > 0.0);
        assert!(corr > 0.0);
    }

    #[test]
    fn exact_sampling_frequencies_converge() {
        let m = random_model(&RandomModelSpec::new(5, 2, 2, 0.2, 0.6), 4).unwrap();
        let t = exact_joint(&m).unwrap();
        let mm = 1_000_000;
        let s = sample_exact(&t, mm, 8);
        let emp = empirical_joint(&s);
        let err = emp.iter().zip(t.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 5.0 / (mm as f64).sqrt(), "max error {err}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn prop_exact_joint_normalised(seed in 0u64..1000, n in 3usize..=12) {
            let m = random_model(&RandomModelSpec::new(n, 3, 2, 0.2, 1.0), seed).unwrap();
            let t = exact_joint(&m).unwrap();
            prop_assert!((t.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(t.probs().iter().all(|&p| p >= 0.0));
        }

        #[test]
        fn prop_gibbs_conditional_matches_exact_ratio(seed in 0u64..1000, n in 3usize..=8) {
            let m = random_model(&RandomModelSpec::new(n, 3, 2, 0.2, 1.0), seed).unwrap();
            let t = exact_joint(&m).unwrap();
            let by_node = m.cliques_by_node();
            for idx in 0..1usize << n {
                let x = t.config(idx);
                for u in 0..n {
                    let bit = 1usize << (n - 1 - u);
                    let (plus, minus) = if x[u] > 0 { (idx, idx ^ bit) } else { (idx ^ bit, idx) };
                    let want = t.probs()[plus] / (t.probs()[plus] + t.probs()[minus]);
                    let got = conditional_plus(&m, &by_node[u], &x, u);
                    prop_assert!((want - got).abs() < 1e-10);
                }
            }
        }
    }
}
