//! Exhaustive ground truth, the two evaluation metrics, and the gate model.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{bitstring, ProblemInstance};
use crate::vqa::{Ansatz, InitState, MixerElement};

pub const MAX_BRUTE_FORCE_QUBITS: usize = 24;

/// Version tag of the gate model printed alongside every count.
pub const GATE_MODEL: &str = "quad=2cx+1rz;lin=1rz;rx=1;hwo(k)=4(k-1)cx+1;init=h^n|x^popcount;v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub e0_global: f64,
    pub argmin_global: String,
    pub e0_feasible: f64,
    pub argmin_feasible: String,
    pub feasible_count: u64,
}

impl OracleResult {
    pub fn e0(&self, convention: E0Convention) -> f64 {
        match convention {
            E0Convention::Feasible => self.e0_feasible,
            E0Convention::Global => self.e0_global,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum E0Convention {
    #[default]
    Feasible,
    Global,
}

#[derive(Clone, Copy)]
struct Best {
    global: (f64, usize),
    feasible: Option<(f64, usize)>,
    count: u64,
}

fn better(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

impl Best {
    fn merge(self, other: Best) -> Best {
        Best {
            global: better(self.global, other.global),
            feasible: match (self.feasible, other.feasible) {
                (Some(a), Some(b)) => Some(better(a, b)),
                (a, b) => a.or(b),
            },
            count: self.count + other.count,
        }
    }
}

/// Evaluates `f` and the constraint on all `2^n` bitstrings. Ties resolve to
/// the smallest basis index.
pub fn brute_force(inst: &ProblemInstance) -> Result<OracleResult> {
    let n = inst.n();
    if n > MAX_BRUTE_FORCE_QUBITS {
        return Err(Error::TooLarge {
            n,
            max: MAX_BRUTE_FORCE_QUBITS,
        });
    }
    let identity = Best {
        global: (f64::INFINITY, usize::MAX),
        feasible: None,
        count: 0,
    };
    let best = (0..1usize << n)
        .into_par_iter()
        .fold(
            || identity,
            |acc, z| {
                let f = inst.objective(z);
                let feasible = inst.is_feasible(z);
                let mut out = acc;
                out.global = better(acc.global, (f, z));
                if feasible {
                    out.feasible = Some(acc.feasible.map_or((f, z), |a| better(a, (f, z))));
                    out.count += 1;
                }
                out
            },
        )
        .reduce(|| identity, Best::merge);
    let (e0_feasible, zf) = best.feasible.ok_or(Error::Infeasible {
        budget: inst.budget(),
    })?;
    Ok(OracleResult {
        e0_global: best.global.0,
        argmin_global: bitstring(best.global.1, n),
        e0_feasible,
        argmin_feasible: bitstring(zf, n),
        feasible_count: best.count,
    })
}

/// `1 − |⟨H_c⟩ − E_0| / |E_0|`, or 0 for an infeasible outcome.
pub fn approximation_ratio(hc_expect: f64, e0: f64, feasible: bool) -> Result<f64> {
    if e0 == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    if !feasible {
        return Ok(0.0);
    }
    Ok(1.0 - (hc_expect - e0).abs() / e0.abs())
}

pub const DEFAULT_CONSTRAINT_TOL: f64 = 1e-6;

pub fn constraint_satisfied(hs_expect: f64, budget: u64, tol: f64) -> bool {
    (hs_expect - budget as f64).abs() <= tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateCount {
    pub one_qubit: u64,
    pub two_qubit: u64,
    pub total: u64,
}

impl GateCount {
    pub fn new(one_qubit: u64, two_qubit: u64) -> Self {
        Self {
            one_qubit,
            two_qubit,
            total: one_qubit + two_qubit,
        }
    }
}

impl std::ops::Add for GateCount {
    type Output = GateCount;
    fn add(self, rhs: GateCount) -> GateCount {
        GateCount::new(self.one_qubit + rhs.one_qubit, self.two_qubit + rhs.two_qubit)
    }
}

impl std::iter::Sum for GateCount {
    fn sum<I: Iterator<Item = GateCount>>(iter: I) -> GateCount {
        iter.fold(GateCount::default(), |a, b| a + b)
    }
}

pub fn hwo_gates(involved: usize) -> GateCount {
    GateCount::new(1, 4 * involved.saturating_sub(1) as u64)
}

pub fn count_gates(ansatz: &Ansatz) -> GateCount {
    let p = ansatz.problem();
    let init = match ansatz.init() {
        InitState::Plus => GateCount::new(p.n as u64, 0),
        InitState::Feasible => GateCount::new(ansatz.start_index().count_ones() as u64, 0),
    };
    let cost = GateCount::new(
        (p.terms.quad_terms.len() + p.terms.lin_terms.len()) as u64,
        2 * p.terms.quad_terms.len() as u64,
    );
    let layers: GateCount = ansatz
        .layers()
        .iter()
        .map(|layer| {
            cost + layer
                .mixer
                .iter()
                .map(|el| match *el {
                    MixerElement::Rx(_) => GateCount::new(1, 0),
                    MixerElement::Hwo(k) => hwo_gates(ansatz.operators()[k].involved_count()),
                })
                .sum()
        })
        .sum();
    init + layers
}

/// One finished run reduced to what the summary needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub lambda: Option<f64>,
    pub layers: usize,
    pub n: usize,
    pub hc_expect: f64,
    pub hs_expect: f64,
    pub budget: u64,
    pub e0: f64,
    pub iterations: usize,
    pub gates_total: u64,
}

impl RunRecord {
    pub fn feasible(&self, tol: f64) -> bool {
        constraint_satisfied(self.hs_expect, self.budget, tol)
    }

    pub fn approximation_ratio(&self, tol: f64) -> Result<f64> {
        approximation_ratio(self.hc_expect, self.e0, self.feasible(tol))
    }

    /// `|⟨H_c⟩ − E_0|` regardless of feasibility.
    pub fn energy_error(&self) -> f64 {
        (self.hc_expect - self.e0).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub lambda: Option<f64>,
    pub layers: usize,
    pub n: usize,
    pub seed_count: usize,
    /// NaN when every run in the group had `E_0 = 0`.
    pub mean_ar: f64,
    pub constraint_ratio: f64,
    pub mean_iters: f64,
    pub mean_gates_total: f64,
}

pub const SUMMARY_HEADER: &str =
    "method,lambda,layers,n,seed_count,mean_ar,constraint_ratio,mean_iters,mean_gates_total";

impl SummaryRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{:.12},{:.12},{:.6},{:.6}",
            self.method,
            self.lambda.map(|l| l.to_string()).unwrap_or_default(),
            self.layers,
            self.n,
            self.seed_count,
            self.mean_ar,
            self.constraint_ratio,
            self.mean_iters,
            self.mean_gates_total
        )
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct GroupKey {
    method: String,
    lambda: Option<u64>,
    layers: usize,
    n: usize,
}

/// Groups by (method, λ, layers, n), in that sort order. Runs with an
/// undefined ratio are left out of `mean_ar` only.
pub fn aggregate(records: &[RunRecord], tol: f64) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<GroupKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let key = GroupKey {
            method: r.method.clone(),
            lambda: r.lambda.map(f64::to_bits),
            layers: r.layers,
            n: r.n,
        };
        groups.entry(key).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(key, runs)| {
            let count = runs.len() as f64;
            let ratios: Vec<f64> = runs
                .iter()
                .filter_map(|r| r.approximation_ratio(tol).ok())
                .collect();
            SummaryRow {
                method: key.method,
                lambda: key.lambda.map(f64::from_bits),
                layers: key.layers,
                n: key.n,
                seed_count: runs.len(),
                mean_ar: mean(&ratios),
                constraint_ratio: runs.iter().filter(|r| r.feasible(tol)).count() as f64 / count,
                mean_iters: runs.iter().map(|r| r.iterations as f64).sum::<f64>() / count,
                mean_gates_total: runs.iter().map(|r| r.gates_total as f64).sum::<f64>() / count,
            }
        })
        .collect()
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}
