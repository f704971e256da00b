//! Real-amplitude statevector with a phase oracle and the diffusion operator.

use rand::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<f64>,
}

impl StateVector {
    /// Uniform superposition over `n` basis states.
    pub fn uniform(n: usize) -> Self {
        let a = 1.0 / (n as f64).sqrt();
        Self { amps: vec![a; n] }
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a * b).sum()
    }

    pub fn phase_oracle(&mut self, marked: &[bool]) {
        for (a, &m) in self.amps.iter_mut().zip(marked) {
            if m {
                *a = -*a;
            }
        }
    }

    /// Inversion about the mean, `2|s⟩⟨s| − I`.
    pub fn diffusion(&mut self) {
        let mean = self.amps.iter().sum::<f64>() / self.amps.len() as f64;
        for a in &mut self.amps {
            *a = 2.0 * mean - *a;
        }
    }

    pub fn grover_iterate(&mut self, marked: &[bool]) {
        self.phase_oracle(marked);
        self.diffusion();
    }

    pub fn probability(&self, marked: &[bool]) -> f64 {
        self.amps.iter().zip(marked).filter(|(_, &m)| m).map(|(a, _)| a * a).sum()
    }

    /// Samples a basis state with probability `|a_i|²`.
    pub fn measure(&self, rng: &mut impl Rng) -> usize {
        let total: f64 = self.amps.iter().map(|a| a * a).sum();
        let mut x = rng.gen::<f64>() * total;
        for (i, a) in self.amps.iter().enumerate() {
            x -= a * a;
            if x < 0.0 {
                return i;
            }
        }
        self.amps.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn marks(n: usize, idx: &[usize]) -> Vec<bool> {
        (0..n).map(|i| idx.contains(&i)).collect()
    }

    #[test]
    fn norm_is_preserved() {
        let n = 64;
        let m = marks(n, &[3, 17, 40]);
        let mut s = StateVector::uniform(n);
        for _ in 0..200 {
            s.grover_iterate(&m);
            assert!((s.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rotation_angle_matches_closed_form() {
        // After k iterates the marked probability is sin²((2k+1)θ), sin²θ = t/N.
        for (n, t) in [(16usize, 1usize), (64, 3), (256, 5)] {
            let m = marks(n, &(0..t).collect::<Vec<_>>());
            let theta = ((t as f64) / n as f64).sqrt().asin();
            let mut s = StateVector::uniform(n);
            for k in 1..30 {
                s.grover_iterate(&m);
                let want = ((2 * k + 1) as f64 * theta).sin().powi(2);
                assert!((s.probability(&m) - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn two_iterates_compose() {
        // G² applied at once equals G applied twice: compare against the
        // analytic state in the marked/unmarked plane.
        let n = 32;
        let m = marks(n, &[5, 9]);
        let theta = (2.0f64 / n as f64).sqrt().asin();
        let mut s = StateVector::uniform(n);
        s.grover_iterate(&m);
        s.grover_iterate(&m);
        let good = (5.0 * theta).sin() / 2f64.sqrt();
        let bad = (5.0 * theta).cos() / ((n - 2) as f64).sqrt();
        let expect = StateVector {
            amps: (0..n).map(|i| if m[i] { good } else { bad }).collect(),
        };
        assert!((s.inner(&expect).abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn measurement_follows_amplitudes() {
        let n = 16;
        let m = marks(n, &[7]);
        let mut s = StateVector::uniform(n);
        for _ in 0..3 {
            s.grover_iterate(&m);
        }
        let p = s.probability(&m);
        let mut rng = rng_from_seed(4);
        let hits = (0..20_000).filter(|_| s.measure(&mut rng) == 7).count();
        assert!((hits as f64 / 20_000.0 - p).abs() < 0.02);
    }
}
