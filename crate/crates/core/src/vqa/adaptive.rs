//! Greedy operator growth: score every unused pool operator by a 1-D angle
//! scan on top of the current circuit, append the best one, re-optimize all
//! angles, and repeat until no candidate lowers the energy by `convergence_tol`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::optimizer::{initial_params, optimize, OptConfig, RunResult, TraceRow};
use super::{unconstrained_rx, Ansatz, CompiledProblem, InitState, Layer, LossKind, MixerElement};
use crate::error::{Error, Result};
use crate::hwo::{HwOperator, OperatorPool};
use crate::oracle::count_gates;
use crate::problem::ProblemInstance;
use crate::simulator::StateVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptiveConfig {
    pub opt: OptConfig,
    /// Scan points, uniform on `[-π/2, π/2]`.
    pub grid_points: usize,
    /// Number of copies of the grown block in the final circuit.
    pub layers: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            opt: OptConfig::default(),
            grid_points: 17,
            layers: 1,
        }
    }
}

impl AdaptiveConfig {
    pub fn grid(&self) -> Vec<f64> {
        angle_grid(self.grid_points)
    }
}

pub fn angle_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|k| -FRAC_PI_2 + std::f64::consts::PI * k as f64 / (points - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateScore {
    pub energy: f64,
    pub angle: f64,
}

/// Lowest energy reachable by appending `exp(-iβM)` to the current circuit,
/// with the existing angles held fixed.
pub fn score_candidate(
    ansatz: &Ansatz,
    params: &[f64],
    candidate: &HwOperator,
    grid: &[f64],
) -> Result<CandidateScore> {
    let state = ansatz.simulate(params)?;
    Ok(scan(ansatz, &state, candidate, grid))
}

fn scan(ansatz: &Ansatz, state: &StateVector, op: &HwOperator, grid: &[f64]) -> CandidateScore {
    let energy_at = |beta: f64| {
        let mut s = state.clone();
        s.apply_hwo_exp(op, beta);
        ansatz.measure(&s).loss
    };
    if grid.is_empty() {
        return CandidateScore {
            energy: ansatz.measure(state).loss,
            angle: 0.0,
        };
    }
    let energies: Vec<f64> = grid.iter().map(|&b| energy_at(b)).collect();
    let mut best = 0;
    for k in 1..energies.len() {
        if energies[k] < energies[best] {
            best = k;
        }
    }
    let mut score = CandidateScore {
        energy: energies[best],
        angle: grid[best],
    };
    if best > 0 && best + 1 < grid.len() {
        let (l, c, r) = (energies[best - 1], energies[best], energies[best + 1]);
        let curvature = l - 2.0 * c + r;
        if curvature > 0.0 {
            let h = grid[best + 1] - grid[best];
            let beta = grid[best] + 0.5 * h * (l - r) / curvature;
            let e = energy_at(beta);
            if e < score.energy {
                score = CandidateScore { energy: e, angle: beta };
            }
        }
    }
    score
}

pub fn adaptive_run(inst: &ProblemInstance, cfg: &AdaptiveConfig, pool: &OperatorPool) -> Result<RunResult> {
    cfg.opt.validate()?;
    if cfg.layers == 0 {
        return Err(Error::InvalidArgument("adaptive runs need at least one layer".into()));
    }
    let problem = CompiledProblem::new(inst);
    let base_layer = Layer {
        mixer: unconstrained_rx(&problem).collect(),
    };
    let mut ansatz = Ansatz::new(
        problem.clone(),
        pool.ops().to_vec(),
        vec![base_layer],
        InitState::Feasible,
        LossKind::Bare,
    )?;
    let grid = cfg.grid();
    let tol = cfg.opt.convergence_tol;

    let mut params = initial_params(ansatz.parameter_count(), &cfg.opt);
    let mut warnings = Vec::new();
    if pool.is_empty() {
        warnings.push("empty operator pool: cost phases only".to_string());
    }
    if !pool.uncovered().is_empty() {
        warnings.push(format!("qubits without operators stay fixed: {:?}", pool.uncovered()));
    }

    let mut log = RunLog::default();
    let mut current = if ansatz.layers()[0].mixer.is_empty() {
        let e = super::evaluate(&ansatz, &params)?;
        log.start(&e);
        e
    } else {
        let res = optimize(&ansatz, &params, &cfg.opt)?;
        params.clone_from(&res.best_params);
        log.absorb(&res);
        res.final_eval
    };

    let mut unused: Vec<usize> = (0..pool.len()).collect();
    let mut selected = Vec::new();
    let mut growth_energies = Vec::new();
    while !unused.is_empty() {
        let state = ansatz.simulate(&params)?;
        log.function_evals += 1;
        let mut best: Option<(usize, CandidateScore)> = None;
        for &k in &unused {
            let score = scan(&ansatz, &state, &pool.ops()[k], &grid);
            log.function_evals += grid.len() + 1;
            // strict comparison keeps the lowest pool index on ties
            if best.map_or(true, |(_, b)| score.energy < b.energy) {
                best = Some((k, score));
            }
        }
        let (k, score) = best.expect("unused is nonempty");
        if current.energy - score.energy < tol {
            break;
        }
        unused.retain(|&u| u != k);
        selected.push(pool.ops()[k].equation().clone());
        ansatz.push_mixer(0, MixerElement::Hwo(k));
        params.push(score.angle);

        let res = optimize(&ansatz, &params, &cfg.opt)?;
        params.clone_from(&res.best_params);
        log.absorb(&res);
        growth_energies.push(res.final_eval.energy);
        current = res.final_eval;
    }

    if cfg.layers > 1 {
        let grown = ansatz.layers()[0].clone();
        let per_layer = ansatz.parameter_count();
        ansatz = ansatz.with_layers(vec![grown; cfg.layers]);
        params.resize(per_layer * cfg.layers, 0.0);
        let res = optimize(&ansatz, &params, &cfg.opt)?;
        params.clone_from(&res.best_params);
        log.absorb(&res);
        current = res.final_eval;
    }

    Ok(RunResult {
        best_params: params,
        trace: log.trace,
        final_eval: current,
        selected_operators: selected,
        growth_energies,
        iteration_count: log.iterations,
        function_evals: log.function_evals,
        gradient_evals: log.gradient_evals,
        converged: true,
        gate_count: count_gates(&ansatz),
        warnings,
    })
}

/// Concatenated traces of successive optimizer runs on one global iteration axis.
#[derive(Default)]
struct RunLog {
    trace: Vec<TraceRow>,
    iterations: usize,
    function_evals: usize,
    gradient_evals: usize,
}

impl RunLog {
    fn start(&mut self, e: &super::Evaluation) {
        self.trace.push(TraceRow {
            iter: 0,
            loss: e.loss,
            energy: e.energy,
            hs_expect: e.hs_expect,
            feasible_mass: e.feasible_mass,
        });
        self.function_evals += 1;
    }

    fn absorb(&mut self, res: &RunResult) {
        let skip = usize::from(!self.trace.is_empty());
        for row in res.trace.iter().skip(skip) {
            self.trace.push(TraceRow {
                iter: self.iterations + row.iter,
                ..*row
            });
        }
        self.iterations += res.iteration_count;
        self.function_evals += res.function_evals;
        self.gradient_evals += res.gradient_evals;
    }
}
