//! Dense statevector engine.
//!
//! Amplitude `amps[z]` belongs to basis state `|z⟩`; bit `i` of `z` is the
//! value of qubit `i`. All rotations are exact `exp(-iθG)` for a Hermitian
//! generator `G` with `G² = 1` on the subspace it acts on.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{CostTermList, DiagonalOperator};
use crate::hwo::HwOperator;
use crate::subset_sum::SubsetSum;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn plus(n: usize) -> Self {
        let dim = 1usize << n;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Self {
            n,
            amps: vec![a; dim],
        }
    }

    pub fn basis(n: usize, z: usize) -> Result<Self> {
        let dim = 1usize << n;
        if z >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {z} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[z] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(mut amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes is not a power of two",
                amps.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidArgument("zero state".into()));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Ok(Self {
            n: amps.len().trailing_zeros() as usize,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Multiplies amplitude `z` by `factors[z]`.
    pub(crate) fn apply_phases(&mut self, factors: &[Complex64]) {
        for (a, f) in self.amps.iter_mut().zip(factors) {
            *a *= f;
        }
    }

    pub fn apply_rx(&mut self, qubit: usize, beta: f64) {
        let (s, c) = beta.sin_cos();
        let stride = 1usize << qubit;
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                // [[c, -is], [-is, c]]
                *a0 = Complex64::new(c * x.re + s * y.im, c * x.im - s * y.re);
                *a1 = Complex64::new(c * y.re + s * x.im, c * y.im - s * x.re);
            }
        }
    }

    pub fn apply_hwo_exp(&mut self, op: &HwOperator, beta: f64) {
        let (s, c) = beta.sin_cos();
        let involved = op.involved_mask();
        let pattern = op.mask_a();
        for z in 0..self.amps.len() {
            if z & involved != pattern {
                continue;
            }
            let w = z ^ involved;
            let (x, y) = (self.amps[z], self.amps[w]);
            self.amps[z] = Complex64::new(c * x.re + s * y.im, c * x.im - s * y.re);
            self.amps[w] = Complex64::new(c * y.re + s * x.im, c * y.im - s * x.re);
        }
    }

    /// Imaginary part of `⟨other| X_q |self⟩`.
    pub(crate) fn rx_overlap_im(&self, other: &StateVector, qubit: usize) -> f64 {
        let bit = 1usize << qubit;
        self.amps
            .iter()
            .enumerate()
            .map(|(z, a)| (other.amps[z ^ bit].conj() * a).im)
            .sum()
    }

    /// Imaginary part of `⟨other| M |self⟩`.
    pub(crate) fn hwo_overlap_im(&self, other: &StateVector, op: &HwOperator) -> f64 {
        let involved = op.involved_mask();
        let pattern = op.mask_a();
        let mut acc = 0.0;
        for z in 0..self.amps.len() {
            if z & involved != pattern {
                continue;
            }
            let w = z ^ involved;
            acc += (other.amps[w].conj() * self.amps[z]).im + (other.amps[z].conj() * self.amps[w]).im;
        }
        acc
    }

    pub fn apply_cost_phase(&mut self, terms: &CostTermList, gammas: &[f64]) -> Result<()> {
        if gammas.len() != terms.len() {
            return Err(Error::ParamCount {
                expected: terms.len(),
                found: gammas.len(),
            });
        }
        if terms.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: terms.n,
            });
        }
        let phase = terms.weighted_diagonal(gammas);
        for (a, p) in self.amps.iter_mut().zip(&phase) {
            *a *= Complex64::from_polar(1.0, -p);
        }
        Ok(())
    }

    pub fn feasible_mass(&self, constraint: &DiagonalOperator, budget: u64) -> f64 {
        let b = budget as f64;
        self.amps
            .iter()
            .zip(constraint.values())
            .filter(|(_, d)| **d == b)
            .map(|(a, _)| a.norm_sqr())
            .sum()
    }
}

pub fn init_plus_state(n: usize) -> StateVector {
    StateVector::plus(n)
}

/// Basis state of the lexicographically smallest feasible bitstring.
pub fn init_feasible_state(omega: &[u64], budget: u64, n: usize) -> Result<StateVector> {
    if omega.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: omega.len(),
        });
    }
    let z = feasible_start_index(omega, budget)?;
    StateVector::basis(n, z)
}

pub(crate) fn feasible_start_index(omega: &[u64], budget: u64) -> Result<usize> {
    let bits = SubsetSum::new(omega, budget).smallest_solution()?;
    Ok(bits
        .iter()
        .enumerate()
        .filter(|(_, &x)| x)
        .fold(0, |z, (i, _)| z | 1 << i))
}

pub fn apply_cost_phase(state: &mut StateVector, terms: &CostTermList, gammas: &[f64]) -> Result<()> {
    state.apply_cost_phase(terms, gammas)
}

pub fn apply_rx(state: &mut StateVector, qubit: usize, beta: f64) {
    state.apply_rx(qubit, beta)
}

pub fn apply_hwo_exp(state: &mut StateVector, op: &HwOperator, beta: f64) {
    state.apply_hwo_exp(op, beta)
}

pub fn feasible_mass(state: &StateVector, constraint: &DiagonalOperator, budget: u64) -> f64 {
    state.feasible_mass(constraint, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_constraint_diagonal;
    use crate::hwo::{build_sparse_pool, HwEquation};
    use crate::problem::{basis_index, generate_portfolio_instance};
    use std::f64::consts::FRAC_PI_2;

    const W: [u64; 5] = [1, 2, 2, 3, 5];

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn plus_state() {
        let s = init_plus_state(1);
        assert!(close(s.amplitudes()[0], Complex64::new(0.5f64.sqrt(), 0.0)));
        let s = init_plus_state(2);
        assert!(s.amplitudes().iter().all(|a| close(*a, Complex64::new(0.5, 0.0))));
        for n in 0..8 {
            assert!((init_plus_state(n).norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn feasible_start() {
        let s = init_feasible_state(&W, 4, 5).unwrap();
        assert_eq!(s.amplitudes()[basis_index("01100")], Complex64::new(1.0, 0.0));
        let s = init_feasible_state(&[1, 1], 1, 2).unwrap();
        assert_eq!(s.amplitudes()[basis_index("01")], Complex64::new(1.0, 0.0));
        assert!(init_feasible_state(&[2, 2], 3, 2).is_err());
    }

    #[test]
    fn rx_basics() {
        let mut s = StateVector::basis(1, 0).unwrap();
        s.apply_rx(0, 0.0);
        assert_eq!(s, StateVector::basis(1, 0).unwrap());
        s.apply_rx(0, FRAC_PI_2);
        assert!(close(s.amplitudes()[0], Complex64::new(0.0, 0.0)));
        assert!(close(s.amplitudes()[1], Complex64::new(0.0, -1.0)));
    }

    #[test]
    fn hwo_quarter_turn_on_worked_pair() {
        let eq = HwEquation::new(vec![0, 3], vec![1, 2], &W, 4).unwrap();
        let op = HwOperator::new(eq);
        let mut s = StateVector::basis(5, basis_index("10010")).unwrap();
        s.apply_hwo_exp(&op, FRAC_PI_2);
        let target = basis_index("01100");
        for (z, a) in s.amplitudes().iter().enumerate() {
            let expect = if z == target {
                Complex64::new(0.0, -1.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            assert!(close(*a, expect), "z={z} a={a}");
        }
        let mut t = StateVector::basis(5, 7).unwrap();
        t.apply_hwo_exp(&op, 0.0);
        assert_eq!(t, StateVector::basis(5, 7).unwrap());
    }

    #[test]
    fn feasible_mass_values() {
        let inst = generate_portfolio_instance(5, 1, 2)
            .unwrap()
            .with_constraint(W.to_vec(), 4)
            .unwrap();
        let cons = build_constraint_diagonal(&inst);
        let start = init_feasible_state(&W, 4, 5).unwrap();
        assert_eq!(start.feasible_mass(&cons, 4), 1.0);
        assert!((init_plus_state(5).feasible_mass(&cons, 4) - 0.0625).abs() < 1e-15);

        let pool = build_sparse_pool(&W, 4).unwrap();
        let mut s = start;
        for (k, op) in pool.ops().iter().cycle().take(12).enumerate() {
            s.apply_hwo_exp(op, 0.3 + 0.17 * k as f64);
        }
        assert!((s.feasible_mass(&cons, 4) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cost_phase_identity_and_count() {
        let inst = generate_portfolio_instance(3, 2, 2).unwrap();
        let terms = crate::hamiltonian::build_cost_terms(&inst);
        let mut s = init_plus_state(3);
        s.apply_cost_phase(&terms, &vec![0.0; terms.len()]).unwrap();
        assert_eq!(s, init_plus_state(3));
        assert!(matches!(
            s.apply_cost_phase(&terms, &[0.1]),
            Err(Error::ParamCount { .. })
        ));
    }
}
