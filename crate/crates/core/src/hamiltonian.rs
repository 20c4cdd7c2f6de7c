//! Diagonal cost and constraint Hamiltonians.
//!
//! Under `x_i -> (1 - Z_i) / 2` both Hamiltonians are diagonal in the
//! computational basis, so they are stored densely as `2^n` eigenvalues.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::simulator::StateVector;
use crate::walsh::fwht;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    values: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if !values.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "diagonal length {} is not a power of two",
                values.len()
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn num_qubits(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }
}

/// `coeff * Z_i Z_j`, with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadTerm {
    pub i: usize,
    pub j: usize,
    pub coeff: f64,
}

/// `coeff * Z_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinTerm {
    pub k: usize,
    pub coeff: f64,
}

/// Pauli-Z expansion of the cost Hamiltonian. The constant is a global phase
/// for circuits but is needed to reproduce energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTermList {
    pub n: usize,
    pub quad_terms: Vec<QuadTerm>,
    pub lin_terms: Vec<LinTerm>,
    pub constant: f64,
}

impl CostTermList {
    pub fn len(&self) -> usize {
        self.quad_terms.len() + self.lin_terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Qubit mask of term `t`, quadratic terms first.
    pub fn mask(&self, t: usize) -> usize {
        match self.quad_terms.get(t) {
            Some(q) => 1 << q.i | 1 << q.j,
            None => 1 << self.lin_terms[t - self.quad_terms.len()].k,
        }
    }

    pub fn coeff(&self, t: usize) -> f64 {
        match self.quad_terms.get(t) {
            Some(q) => q.coeff,
            None => self.lin_terms[t - self.quad_terms.len()].coeff,
        }
    }

    /// `Σ_t weights[t] * coeff_t * Z_{S_t}` evaluated on every basis state.
    pub fn weighted_diagonal(&self, weights: &[f64]) -> Vec<f64> {
        let mut spectrum = vec![0.0; 1 << self.n];
        for (t, w) in weights.iter().enumerate() {
            spectrum[self.mask(t)] += w * self.coeff(t);
        }
        fwht(&mut spectrum);
        spectrum
    }

    /// Sum of all term diagonals plus the constant.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut d = self.weighted_diagonal(&vec![1.0; self.len()]);
        for v in &mut d {
            *v += self.constant;
        }
        d
    }
}

pub fn build_cost_diagonal(inst: &ProblemInstance) -> DiagonalOperator {
    let values = (0..1usize << inst.n()).map(|z| inst.objective(z)).collect();
    DiagonalOperator { values }
}

pub fn build_constraint_diagonal(inst: &ProblemInstance) -> DiagonalOperator {
    let values = (0..1usize << inst.n())
        .map(|z| inst.constraint_value(z) as f64)
        .collect();
    DiagonalOperator { values }
}

pub fn build_cost_terms(inst: &ProblemInstance) -> CostTermList {
    let n = inst.n();
    let mu = inst.mu();
    let eta = inst.eta();

    // x_i x_j = (1 - Z_i - Z_j + Z_i Z_j) / 4 and x_k = (1 - Z_k) / 2
    let mut z_coeff = vec![0.0; n];
    let mut constant = 0.0;
    let mut quad_terms = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let merged = mu[i][j] + mu[j][i];
            if merged == 0.0 {
                continue;
            }
            quad_terms.push(QuadTerm {
                i,
                j,
                coeff: merged / 4.0,
            });
            z_coeff[i] -= merged / 4.0;
            z_coeff[j] -= merged / 4.0;
            constant += merged / 4.0;
        }
    }
    for k in 0..n {
        let linear = eta[k] + mu[k][k];
        z_coeff[k] -= linear / 2.0;
        constant += linear / 2.0;
    }
    let lin_terms = z_coeff
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c != 0.0)
        .map(|(k, coeff)| LinTerm { k, coeff })
        .collect();
    CostTermList {
        n,
        quad_terms,
        lin_terms,
        constant,
    }
}

pub fn expectation(state: &StateVector, diag: &DiagonalOperator) -> Result<f64> {
    if state.len() != diag.len() {
        return Err(Error::DimensionMismatch {
            expected: diag.len(),
            found: state.len(),
        });
    }
    Ok(state
        .amplitudes()
        .iter()
        .zip(&diag.values)
        .map(|(a, d)| d * a.norm_sqr())
        .sum())
}

/// `⟨H_c⟩ + λ (⟨H_s⟩ - b)^2`.
pub fn penalty_loss(
    state: &StateVector,
    cost: &DiagonalOperator,
    constraint: &DiagonalOperator,
    budget: u64,
    lambda: f64,
) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "penalty factor must be nonnegative, got {lambda}"
        )));
    }
    let hc = expectation(state, cost)?;
    let hs = expectation(state, constraint)?;
    Ok(hc + lambda * (hs - budget as f64).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{generate_portfolio_instance, ProblemKind};
    use num_complex::Complex64;

    fn custom(mu: Vec<Vec<f64>>, eta: Vec<f64>, omega: Vec<u64>, b: u64) -> ProblemInstance {
        ProblemInstance::new(ProblemKind::Custom, None, mu, eta, omega, b).unwrap()
    }

    #[test]
    fn single_linear_term() {
        let inst = custom(vec![vec![0.0]], vec![2.0], vec![1], 1);
        assert_eq!(build_cost_diagonal(&inst).values(), &[0.0, 2.0]);
    }

    #[test]
    fn symmetric_pair_counts_twice() {
        let inst = custom(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.0, 0.0], vec![1, 1], 1);
        assert_eq!(build_cost_diagonal(&inst).values(), &[0.0, 0.0, 0.0, 2.0]);

        let terms = build_cost_terms(&inst);
        assert_eq!(terms.quad_terms.len(), 1);
        let q = terms.quad_terms[0];
        assert_eq!((q.i, q.j), (0, 1));
        // merged mu_01 + mu_10 = 2, carried on Z0 Z1 as 2/4
        assert_eq!(q.coeff, 0.5);
        assert_eq!(terms.lin_terms.len(), 2);
        assert_eq!(terms.reconstruct(), vec![0.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn eta_only_has_no_quadratic_terms() {
        let inst = custom(vec![vec![0.0; 3]; 3], vec![0.3, -0.2, 1.0], vec![1, 1, 1], 2);
        let terms = build_cost_terms(&inst);
        assert!(terms.quad_terms.is_empty());
        assert_eq!(terms.lin_terms.len(), 3);
    }

    #[test]
    fn worked_constraint_values() {
        let inst = generate_portfolio_instance(5, 4, 3)
            .unwrap()
            .with_constraint(vec![1, 2, 2, 3, 5], 4)
            .unwrap();
        let d = build_constraint_diagonal(&inst);
        assert_eq!(d.values()[0b01001], 4.0);
        assert_eq!(d.values()[0], 0.0);
        assert_eq!(d.values()[31], 13.0);

        let c = build_cost_diagonal(&inst);
        for z in 0..32usize {
            let mut f = 0.0;
            for i in 0..5 {
                for j in 0..5 {
                    f += inst.mu()[i][j] * ((z >> i & 1) * (z >> j & 1)) as f64;
                }
                f += inst.eta()[i] * (z >> i & 1) as f64;
            }
            assert!((c.values()[z] - f).abs() < 1e-12);
        }
    }

    #[test]
    fn term_reconstruction_random() {
        for seed in 0..5 {
            let inst = generate_portfolio_instance(6, seed, 3).unwrap();
            let d = build_cost_diagonal(&inst);
            let r = build_cost_terms(&inst).reconstruct();
            for (a, b) in d.values().iter().zip(&r) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn expectation_basis_and_uniform() {
        let d = DiagonalOperator::new(vec![0.5, -1.0, 2.0, 3.0]).unwrap();
        for z in 0..4 {
            let s = StateVector::basis(2, z).unwrap();
            assert_eq!(expectation(&s, &d).unwrap(), d.values()[z]);
        }
        let c = DiagonalOperator::new(vec![1.75; 8]).unwrap();
        let plus = StateVector::plus(3);
        assert!((expectation(&plus, &c).unwrap() - 1.75).abs() < 1e-14);
        assert!(matches!(
            expectation(&plus, &d),
            Err(Error::DimensionMismatch { expected: 4, found: 8 })
        ));
    }

    #[test]
    fn expectation_phase_invariant() {
        let d = DiagonalOperator::new(vec![0.5, -1.0, 2.0, 3.0]).unwrap();
        let amps = vec![
            Complex64::new(0.5, 0.1),
            Complex64::new(-0.3, 0.4),
            Complex64::new(0.2, -0.5),
            Complex64::new(0.1, 0.2),
        ];
        let s = StateVector::from_amplitudes(amps.clone()).unwrap();
        let phase = Complex64::from_polar(1.0, 0.83);
        let t = StateVector::from_amplitudes(amps.iter().map(|a| a * phase).collect()).unwrap();
        let (e1, e2) = (expectation(&s, &d).unwrap(), expectation(&t, &d).unwrap());
        assert!((e1 - e2).abs() < 1e-14);
    }

    #[test]
    fn penalty_arithmetic() {
        let cost = DiagonalOperator::new(vec![0.0, 1.5, -0.5, 2.0]).unwrap();
        let cons = DiagonalOperator::new(vec![0.0, 1.0, 1.0, 2.0]).unwrap();
        let feasible = StateVector::basis(2, 1).unwrap();
        assert_eq!(penalty_loss(&feasible, &cost, &cons, 1, 10.0).unwrap(), 1.5);
        let over = StateVector::basis(2, 3).unwrap();
        assert_eq!(penalty_loss(&over, &cost, &cons, 1, 10.0).unwrap(), 12.0);
        assert_eq!(penalty_loss(&over, &cost, &cons, 1, 100.0).unwrap(), 102.0);
        assert_eq!(
            penalty_loss(&over, &cost, &cons, 1, 0.0).unwrap(),
            expectation(&over, &cost).unwrap()
        );
        assert!(matches!(
            penalty_loss(&over, &cost, &cons, 1, -1.0),
            Err(Error::InvalidArgument(_))
        ));
    }
}
