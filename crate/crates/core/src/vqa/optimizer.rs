//! Adam with step acceptance: a proposed step is kept only if it does not
//! raise the loss. Otherwise the step size shrinks and the first moment is
//! cleared. The recorded loss sequence is therefore non-increasing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{evaluate, gradient, Ansatz, Evaluation};
use crate::error::{Error, Result};
use crate::hwo::HwEquation;
use crate::oracle::{count_gates, GateCount};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    Adjoint,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptConfig {
    pub max_iters: usize,
    /// Finite-difference step `h`.
    pub grad_step: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// Step-size factor after a rejected step.
    pub lr_shrink: f64,
    /// Step-size factor after an accepted step, capped at `learning_rate`.
    pub lr_growth: f64,
    pub convergence_tol: f64,
    /// Consecutive small changes required to declare convergence.
    pub patience: usize,
    /// Half-width of the symmetric interval for random initial angles.
    pub init_range: f64,
    pub seed: u64,
    pub gradient: GradientMethod,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            grad_step: 1e-5,
            learning_rate: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            lr_shrink: 0.5,
            lr_growth: 1.1,
            convergence_tol: 1e-6,
            patience: 10,
            init_range: 0.1,
            seed: 0,
            gradient: GradientMethod::Adjoint,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grad_step", self.grad_step),
            ("learning_rate", self.learning_rate),
            ("adam_eps", self.adam_eps),
            ("lr_shrink", self.lr_shrink),
            ("lr_growth", self.lr_growth),
            ("convergence_tol", self.convergence_tol),
            ("init_range", self.init_range),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
        if self.max_iters == 0 || self.patience == 0 {
            return Err(Error::InvalidArgument("max_iters and patience must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::InvalidArgument("Adam betas must lie in [0, 1)".into()));
        }
        if self.lr_shrink >= 1.0 {
            return Err(Error::InvalidArgument("lr_shrink must be below 1".into()));
        }
        Ok(())
    }
}

/// Uniform angles in `(-init_range, init_range)` from `seed`.
pub fn initial_params(count: usize, cfg: &OptConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..count)
        .map(|_| rng.gen_range(-cfg.init_range..cfg.init_range))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub loss: f64,
    pub energy: f64,
    pub hs_expect: f64,
    pub feasible_mass: f64,
}

impl TraceRow {
    fn new(iter: usize, e: &Evaluation) -> Self {
        Self {
            iter,
            loss: e.loss,
            energy: e.energy,
            hs_expect: e.hs_expect,
            feasible_mass: e.feasible_mass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub best_params: Vec<f64>,
    /// Row 0 is the starting point; row `t` follows optimizer iteration `t`.
    /// Serialized as the loss column only; the full rows go to the CSV trace.
    #[serde(rename = "energy_trace", serialize_with = "loss_column")]
    pub trace: Vec<TraceRow>,
    #[serde(rename = "final_state")]
    pub final_eval: Evaluation,
    pub selected_operators: Vec<HwEquation>,
    /// Energies after each adaptive re-optimization.
    pub growth_energies: Vec<f64>,
    pub iteration_count: usize,
    pub function_evals: usize,
    pub gradient_evals: usize,
    pub converged: bool,
    pub gate_count: GateCount,
    pub warnings: Vec<String>,
}

impl RunResult {
    pub fn energy_trace(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.loss).collect()
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,loss,energy,hs_expect,feasible_mass\n");
        for r in &self.trace {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                r.iter, r.loss, r.energy, r.hs_expect, r.feasible_mass
            ));
        }
        out
    }
}

fn loss_column<S: serde::Serializer>(trace: &[TraceRow], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(trace.iter().map(|r| r.loss))
}

struct Counters {
    function_evals: usize,
    gradient_evals: usize,
}

fn loss_and_grad(ansatz: &Ansatz, params: &[f64], cfg: &OptConfig, counters: &mut Counters) -> Result<(Evaluation, Vec<f64>)> {
    counters.gradient_evals += 1;
    match cfg.gradient {
        GradientMethod::Adjoint => {
            counters.function_evals += 1;
            ansatz.loss_and_gradient(params)
        }
        GradientMethod::FiniteDifference => {
            counters.function_evals += 1 + 2 * params.len();
            Ok((evaluate(ansatz, params)?, gradient(ansatz, params, cfg.grad_step)?))
        }
    }
}

pub fn optimize(ansatz: &Ansatz, params0: &[f64], cfg: &OptConfig) -> Result<RunResult> {
    cfg.validate()?;
    let dim = ansatz.parameter_count();
    if params0.len() != dim {
        return Err(Error::ParamCount {
            expected: dim,
            found: params0.len(),
        });
    }
    let mut counters = Counters {
        function_evals: 0,
        gradient_evals: 0,
    };
    let mut params = params0.to_vec();
    let (mut current, mut grad) = loss_and_grad(ansatz, &params, cfg, &mut counters)?;
    let mut trace = vec![TraceRow::new(0, &current)];

    let mut m = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    let mut step = 0i32;
    let mut lr = cfg.learning_rate;
    let mut quiet = 0;
    let mut converged = false;
    let mut iterations = 0;

    let mut m_next = vec![0.0; dim];
    let mut v_next = vec![0.0; dim];
    let mut proposal = vec![0.0; dim];

    while iterations < cfg.max_iters {
        iterations += 1;
        if dim == 0 {
            quiet += 1;
        } else {
            let t = step + 1;
            let c1 = 1.0 - cfg.beta1.powi(t);
            let c2 = 1.0 - cfg.beta2.powi(t);
            for k in 0..dim {
                m_next[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
                v_next[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
                let mhat = m_next[k] / c1;
                let vhat = v_next[k] / c2;
                proposal[k] = params[k] - lr * mhat / (vhat.sqrt() + cfg.adam_eps);
            }
            let (candidate, candidate_grad) = loss_and_grad(ansatz, &proposal, cfg, &mut counters)?;
            let change = if candidate.loss <= current.loss {
                let change = current.loss - candidate.loss;
                std::mem::swap(&mut params, &mut proposal);
                std::mem::swap(&mut m, &mut m_next);
                std::mem::swap(&mut v, &mut v_next);
                step = t;
                current = candidate;
                grad = candidate_grad;
                lr = (lr * cfg.lr_growth).min(cfg.learning_rate);
                change
            } else {
                // plain preconditioned gradient on the retry
                lr *= cfg.lr_shrink;
                m.iter_mut().for_each(|x| *x = 0.0);
                0.0
            };
            if change < cfg.convergence_tol {
                quiet += 1;
            } else {
                quiet = 0;
            }
        }
        trace.push(TraceRow::new(iterations, &current));
        if quiet >= cfg.patience {
            converged = true;
            break;
        }
    }

    Ok(RunResult {
        best_params: params,
        trace,
        final_eval: current,
        selected_operators: Vec::new(),
        growth_energies: Vec::new(),
        iteration_count: iterations,
        function_evals: counters.function_evals,
        gradient_evals: counters.gradient_evals,
        converged,
        gate_count: count_gates(ansatz),
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hwo::build_sparse_pool;
    use crate::oracle::brute_force;
    use crate::problem::generate_portfolio_instance;
    use crate::vqa::{build_hwo_ansatz, build_penalty_ansatz};

    fn worked() -> crate::problem::ProblemInstance {
        generate_portfolio_instance(5, 17, 3)
            .unwrap()
            .with_constraint(vec![1, 2, 2, 3, 5], 4)
            .unwrap()
    }

    #[test]
    fn monotone_trace_and_descent() {
        let inst = worked();
        let pool = build_sparse_pool(inst.omega(), 4).unwrap();
        let a = build_hwo_ansatz(&inst, &pool, 1).unwrap();
        let cfg = OptConfig::default();
        let p0 = initial_params(a.parameter_count(), &cfg);
        let res = optimize(&a, &p0, &cfg).unwrap();
        assert!(res.final_eval.energy <= res.trace[0].energy);
        for w in res.trace.windows(2) {
            assert!(w[1].loss <= w[0].loss + 1e-9);
            assert!((w[1].feasible_mass - 1.0).abs() < 1e-9);
        }
        assert_eq!(res.trace.len(), res.iteration_count + 1);
    }

    #[test]
    fn optimal_start_converges_quickly() {
        // a single feasible state is already optimal
        let inst = generate_portfolio_instance(4, 3, 3)
            .unwrap()
            .with_constraint(vec![1, 2, 4, 8], 5)
            .unwrap();
        let pool = build_sparse_pool(inst.omega(), 5).unwrap();
        let a = build_hwo_ansatz(&inst, &pool, 1).unwrap();
        let cfg = OptConfig::default();
        let p0 = initial_params(a.parameter_count(), &cfg);
        let res = optimize(&a, &p0, &cfg).unwrap();
        assert!(res.converged);
        assert!(res.iteration_count <= 10);
        assert!((res.final_eval.energy - res.trace[0].energy).abs() < 1e-12);
    }

    #[test]
    fn deterministic() {
        let inst = generate_portfolio_instance(5, 1, 3).unwrap();
        let a = build_penalty_ansatz(&inst, 2, 10.0).unwrap();
        let cfg = OptConfig {
            seed: 4,
            max_iters: 50,
            ..OptConfig::default()
        };
        let p0 = initial_params(a.parameter_count(), &cfg);
        let r1 = optimize(&a, &p0, &cfg).unwrap();
        let r2 = optimize(&a, &p0, &cfg).unwrap();
        assert_eq!(r1.best_params, r2.best_params);
        assert_eq!(r1.energy_trace(), r2.energy_trace());
    }

    #[test]
    fn finite_difference_mode_tracks_adjoint() {
        let inst = generate_portfolio_instance(4, 2, 3).unwrap();
        let a = build_penalty_ansatz(&inst, 1, 10.0).unwrap();
        let base = OptConfig {
            max_iters: 30,
            ..OptConfig::default()
        };
        let fd = OptConfig {
            gradient: GradientMethod::FiniteDifference,
            ..base.clone()
        };
        let p0 = initial_params(a.parameter_count(), &base);
        let r1 = optimize(&a, &p0, &base).unwrap();
        let r2 = optimize(&a, &p0, &fd).unwrap();
        assert!((r1.final_eval.loss - r2.final_eval.loss).abs() < 1e-6);
        assert!(r2.function_evals > r1.function_evals);
    }

    #[test]
    fn twelve_qubits_reach_feasible_optimum_on_most_seeds() {
        let inst = generate_portfolio_instance(12, 11488562552355084922, 4).unwrap();
        let pool = build_sparse_pool(inst.omega(), inst.budget()).unwrap();
        let a = build_hwo_ansatz(&inst, &pool, 1).unwrap();
        let e0 = brute_force(&inst).unwrap().e0_feasible;
        let hits = (0..10)
            .filter(|&seed| {
                let cfg = OptConfig {
                    seed,
                    ..OptConfig::default()
                };
                let res = optimize(&a, &initial_params(a.parameter_count(), &cfg), &cfg).unwrap();
                (res.final_eval.energy - e0).abs() < 1e-4
            })
            .count();
        assert!(hits > 5, "{hits}/10");
    }

    #[test]
    fn penalty_runs_lower_the_loss() {
        let inst = generate_portfolio_instance(6, 8, 3).unwrap();
        let oracle = brute_force(&inst).unwrap();
        let a = build_penalty_ansatz(&inst, 3, 10.0).unwrap();
        let cfg = OptConfig::default();
        let p0 = initial_params(a.parameter_count(), &cfg);
        let res = optimize(&a, &p0, &cfg).unwrap();
        assert!(res.final_eval.loss < res.trace[0].loss);
        assert!(res.final_eval.energy > oracle.e0_global - 1e-9);
    }

    #[test]
    fn invalid_config() {
        let cfg = OptConfig {
            learning_rate: 0.0,
            ..OptConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
