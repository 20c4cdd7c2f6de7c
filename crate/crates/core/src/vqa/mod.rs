//! Variational ansatze over the statevector engine.
//!
//! A layer is the full multi-angle cost block (one angle per Pauli term)
//! followed by an ordered list of mixer exponentials, each with its own angle.
//! Parameters are laid out layer by layer: cost angles first (quadratic terms
//! then linear terms), then one angle per mixer element.

mod adaptive;
mod optimizer;

pub use adaptive::{adaptive_run, score_candidate, AdaptiveConfig, CandidateScore};
pub use optimizer::{initial_params, optimize, GradientMethod, OptConfig, RunResult, TraceRow};

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_constraint_diagonal, build_cost_diagonal, build_cost_terms, CostTermList, DiagonalOperator,
};
use crate::hwo::{HwOperator, OperatorPool};
use crate::problem::ProblemInstance;
use crate::simulator::{feasible_start_index, StateVector};
use crate::walsh::fwht;

/// Everything about an instance that the circuits and losses need.
#[derive(Debug, Clone)]
pub struct CompiledProblem {
    pub n: usize,
    pub omega: Vec<u64>,
    pub budget: u64,
    pub terms: CostTermList,
    pub cost: DiagonalOperator,
    pub constraint: DiagonalOperator,
}

impl CompiledProblem {
    pub fn new(inst: &ProblemInstance) -> Arc<Self> {
        Arc::new(Self {
            n: inst.n(),
            omega: inst.omega().to_vec(),
            budget: inst.budget(),
            terms: build_cost_terms(inst),
            cost: build_cost_diagonal(inst),
            constraint: build_constraint_diagonal(inst),
        })
    }

    pub fn is_constrained(&self, qubit: usize) -> bool {
        self.omega[qubit] > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitState {
    Plus,
    Feasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Penalty { lambda: f64 },
    Bare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MixerElement {
    /// `exp(-iβ X_q)`
    Rx(usize),
    /// `exp(-iβ M)` for operator `k` of the ansatz operator list
    Hwo(usize),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Layer {
    pub mixer: Vec<MixerElement>,
}

#[derive(Debug, Clone)]
pub struct Ansatz {
    problem: Arc<CompiledProblem>,
    operators: Vec<HwOperator>,
    layers: Vec<Layer>,
    init: InitState,
    loss: LossKind,
    start_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub loss: f64,
    pub energy: f64,
    pub hs_expect: f64,
    pub feasible_mass: f64,
}

impl Ansatz {
    pub fn new(
        problem: Arc<CompiledProblem>,
        operators: Vec<HwOperator>,
        layers: Vec<Layer>,
        init: InitState,
        loss: LossKind,
    ) -> Result<Self> {
        if let LossKind::Penalty { lambda } = loss {
            if !(lambda >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "penalty factor must be nonnegative, got {lambda}"
                )));
            }
        }
        for el in layers.iter().flat_map(|l| &l.mixer) {
            match *el {
                MixerElement::Rx(q) if q >= problem.n => {
                    return Err(Error::InvalidArgument(format!("Rx on qubit {q} out of range")))
                }
                MixerElement::Hwo(k) if k >= operators.len() => {
                    return Err(Error::InvalidArgument(format!("operator {k} out of range")))
                }
                _ => {}
            }
        }
        if loss == LossKind::Bare {
            if init != InitState::Feasible {
                return Err(Error::InvalidArgument(
                    "a bare loss needs the feasible initial state".into(),
                ));
            }
            let breaks = layers.iter().flat_map(|l| &l.mixer).any(|el| match *el {
                MixerElement::Rx(q) => problem.is_constrained(q),
                MixerElement::Hwo(_) => false,
            });
            if breaks {
                return Err(Error::InvalidArgument(
                    "a bare loss only allows Rx on unconstrained qubits".into(),
                ));
            }
        }
        let start_index = match init {
            InitState::Plus => 0,
            InitState::Feasible => feasible_start_index(&problem.omega, problem.budget)?,
        };
        Ok(Self {
            problem,
            operators,
            layers,
            init,
            loss,
            start_index,
        })
    }

    pub fn problem(&self) -> &CompiledProblem {
        &self.problem
    }

    pub fn shared_problem(&self) -> Arc<CompiledProblem> {
        Arc::clone(&self.problem)
    }

    pub fn operators(&self) -> &[HwOperator] {
        &self.operators
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn init(&self) -> InitState {
        self.init
    }

    pub fn loss_kind(&self) -> LossKind {
        self.loss
    }

    /// Basis index of the initial state when `init` is feasible.
    pub fn start_index(&self) -> usize {
        self.start_index
    }

    pub fn parameter_count(&self) -> usize {
        let cost = self.problem.terms.len();
        self.layers.iter().map(|l| cost + l.mixer.len()).sum()
    }

    pub(crate) fn push_mixer(&mut self, layer: usize, element: MixerElement) {
        self.layers[layer].mixer.push(element);
    }

    pub(crate) fn with_layers(&self, layers: Vec<Layer>) -> Self {
        Self {
            layers,
            ..self.clone()
        }
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        let expected = self.parameter_count();
        if params.len() != expected {
            return Err(Error::ParamCount {
                expected,
                found: params.len(),
            });
        }
        Ok(())
    }

    fn initial_state(&self) -> StateVector {
        match self.init {
            InitState::Plus => StateVector::plus(self.problem.n),
            InitState::Feasible => StateVector::basis(self.problem.n, self.start_index)
                .expect("start index is a valid basis state"),
        }
    }

    fn cost_factors(&self, gammas: &[f64]) -> Vec<Complex64> {
        self.problem
            .terms
            .weighted_diagonal(gammas)
            .into_iter()
            .map(|p| Complex64::from_polar(1.0, -p))
            .collect()
    }

    fn apply_mixer(&self, state: &mut StateVector, element: MixerElement, beta: f64) {
        match element {
            MixerElement::Rx(q) => state.apply_rx(q, beta),
            MixerElement::Hwo(k) => state.apply_hwo_exp(&self.operators[k], beta),
        }
    }

    pub fn simulate(&self, params: &[f64]) -> Result<StateVector> {
        self.check_params(params)?;
        let mut state = self.initial_state();
        let cost = self.problem.terms.len();
        let mut offset = 0;
        for layer in &self.layers {
            if cost > 0 {
                state.apply_phases(&self.cost_factors(&params[offset..offset + cost]));
            }
            offset += cost;
            for (el, beta) in layer.mixer.iter().zip(&params[offset..]) {
                self.apply_mixer(&mut state, *el, *beta);
            }
            offset += layer.mixer.len();
        }
        Ok(state)
    }

    pub fn measure(&self, state: &StateVector) -> Evaluation {
        let p = &self.problem;
        let mut energy = 0.0;
        let mut hs = 0.0;
        let mut feasible = 0.0;
        let b = p.budget as f64;
        for ((a, c), s) in state
            .amplitudes()
            .iter()
            .zip(p.cost.values())
            .zip(p.constraint.values())
        {
            let prob = a.norm_sqr();
            energy += prob * c;
            hs += prob * s;
            if *s == b {
                feasible += prob;
            }
        }
        let loss = match self.loss {
            LossKind::Bare => energy,
            LossKind::Penalty { lambda } => energy + lambda * (hs - b).powi(2),
        };
        Evaluation {
            loss,
            energy,
            hs_expect: hs,
            feasible_mass: feasible,
        }
    }

    /// Exact gradient by reverse-mode propagation through the circuit.
    pub fn loss_and_gradient(&self, params: &[f64]) -> Result<(Evaluation, Vec<f64>)> {
        self.check_params(params)?;
        let p = &self.problem;
        let cost = p.terms.len();

        // forward, keeping the cost phase factors for the reverse sweep
        let mut psi = self.initial_state();
        let mut factors = Vec::with_capacity(self.layers.len());
        let mut offset = 0;
        for layer in &self.layers {
            let f = if cost > 0 {
                let f = self.cost_factors(&params[offset..offset + cost]);
                psi.apply_phases(&f);
                f
            } else {
                Vec::new()
            };
            factors.push(f);
            offset += cost;
            for (el, beta) in layer.mixer.iter().zip(&params[offset..]) {
                self.apply_mixer(&mut psi, *el, *beta);
            }
            offset += layer.mixer.len();
        }
        let eval = self.measure(&psi);

        // dL/dθ = 2 Im ⟨φ| G |ψ⟩ with φ = H_eff ψ propagated backwards
        let slope = match self.loss {
            LossKind::Bare => 0.0,
            LossKind::Penalty { lambda } => 2.0 * lambda * (eval.hs_expect - p.budget as f64),
        };
        let mut phi = psi.clone();
        for ((a, c), s) in phi
            .amplitudes_mut()
            .iter_mut()
            .zip(p.cost.values())
            .zip(p.constraint.values())
        {
            *a *= c + slope * s;
        }

        let mut grad = vec![0.0; params.len()];
        let mut work = vec![0.0; if cost > 0 { psi.len() } else { 0 }];
        for (l, layer) in self.layers.iter().enumerate().rev() {
            offset -= layer.mixer.len();
            for (k, el) in layer.mixer.iter().enumerate().rev() {
                let beta = params[offset + k];
                grad[offset + k] = 2.0
                    * match *el {
                        MixerElement::Rx(q) => psi.rx_overlap_im(&phi, q),
                        MixerElement::Hwo(m) => psi.hwo_overlap_im(&phi, &self.operators[m]),
                    };
                self.apply_mixer(&mut psi, *el, -beta);
                self.apply_mixer(&mut phi, *el, -beta);
            }
            offset -= cost;
            if cost > 0 {
                for ((w, a), b) in work.iter_mut().zip(psi.amplitudes()).zip(phi.amplitudes()) {
                    *w = (b.conj() * a).im;
                }
                fwht(&mut work);
                for t in 0..cost {
                    grad[offset + t] = 2.0 * p.terms.coeff(t) * work[p.terms.mask(t)];
                }
                let inverse: Vec<Complex64> = factors[l].iter().map(|f| f.conj()).collect();
                psi.apply_phases(&inverse);
                phi.apply_phases(&inverse);
            }
        }
        Ok((eval, grad))
    }
}

pub fn evaluate(ansatz: &Ansatz, params: &[f64]) -> Result<Evaluation> {
    let state = ansatz.simulate(params)?;
    Ok(ansatz.measure(&state))
}

/// Central finite differences with step `h` in every coordinate.
pub fn gradient(ansatz: &Ansatz, params: &[f64], h: f64) -> Result<Vec<f64>> {
    ansatz.check_params(params)?;
    let mut shifted = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for k in 0..params.len() {
        shifted[k] = params[k] + h;
        let up = evaluate(ansatz, &shifted)?.loss;
        shifted[k] = params[k] - h;
        let down = evaluate(ansatz, &shifted)?.loss;
        shifted[k] = params[k];
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

/// `p` layers of all cost terms followed by `Rx` on every qubit, from `|+⟩^n`.
pub fn build_penalty_ansatz(inst: &ProblemInstance, layers: usize, lambda: f64) -> Result<Ansatz> {
    let problem = CompiledProblem::new(inst);
    let mixer: Vec<MixerElement> = (0..problem.n).map(MixerElement::Rx).collect();
    let layers = vec![Layer { mixer }; layers];
    Ansatz::new(problem, Vec::new(), layers, InitState::Plus, LossKind::Penalty { lambda })
}

/// `p` layers of all cost terms, every pool operator, then `Rx` on the
/// unconstrained qubits, from the smallest feasible basis state.
pub fn build_hwo_ansatz(inst: &ProblemInstance, pool: &OperatorPool, layers: usize) -> Result<Ansatz> {
    let problem = CompiledProblem::new(inst);
    let layer = fixed_hwo_layer(&problem, pool.len());
    Ansatz::new(
        problem,
        pool.ops().to_vec(),
        vec![layer; layers],
        InitState::Feasible,
        LossKind::Bare,
    )
}

fn fixed_hwo_layer(problem: &CompiledProblem, ops: usize) -> Layer {
    let mut mixer: Vec<MixerElement> = (0..ops).map(MixerElement::Hwo).collect();
    mixer.extend(unconstrained_rx(problem));
    Layer { mixer }
}

fn unconstrained_rx(problem: &CompiledProblem) -> impl Iterator<Item = MixerElement> + '_ {
    (0..problem.n)
        .filter(|&q| !problem.is_constrained(q))
        .map(MixerElement::Rx)
}
