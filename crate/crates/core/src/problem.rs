//! Constrained QUBO instances: `min Σ_ij μ_ij x_i x_j + Σ_k η_k x_k` subject to
//! `Σ_i ω_i x_i = b`, plus the two benchmark generators and the JSON codec.
//!
//! Bit convention used everywhere in the crate: variable `x_i` is qubit `i`,
//! and qubit 0 is the least significant bit of a basis index.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::subset_sum::SubsetSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Portfolio,
    Twojet,
    Custom,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Portfolio => "portfolio",
            ProblemKind::Twojet => "twojet",
            ProblemKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "portfolio" => Ok(ProblemKind::Portfolio),
            "twojet" => Ok(ProblemKind::Twojet),
            "custom" => Ok(ProblemKind::Custom),
            other => Err(Error::Schema {
                field: "kind",
                reason: format!("unknown kind `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    n: usize,
    mu: Vec<Vec<f64>>,
    eta: Vec<f64>,
    omega: Vec<u64>,
    b: u64,
    kind: ProblemKind,
    seed: Option<u64>,
}

impl ProblemInstance {
    /// Validates shape, symmetry of `mu` and feasibility of the constraint.
    pub fn new(
        kind: ProblemKind,
        seed: Option<u64>,
        mu: Vec<Vec<f64>>,
        eta: Vec<f64>,
        omega: Vec<u64>,
        b: u64,
    ) -> Result<Self> {
        let n = eta.len();
        if n == 0 {
            return Err(Error::Schema {
                field: "n",
                reason: "at least one variable is required".into(),
            });
        }
        check_shape(n, &mu, &eta, &omega)?;
        for i in 0..n {
            for j in (i + 1)..n {
                if mu[i][j] != mu[j][i] {
                    return Err(Error::Asymmetric {
                        i,
                        j,
                        a: mu[i][j],
                        b: mu[j][i],
                    });
                }
            }
        }
        if let Some(k) = mu.iter().flatten().chain(&eta).position(|x| !x.is_finite()) {
            return Err(Error::Schema {
                field: if k < n * n { "mu" } else { "eta" },
                reason: "coefficients must be finite".into(),
            });
        }
        if !SubsetSum::new(&omega, b).feasible() {
            return Err(Error::Infeasible { budget: b });
        }
        Ok(Self {
            n,
            mu,
            eta,
            omega,
            b,
            kind,
            seed,
        })
    }

    /// Replaces the constraint, keeping the objective. The result is tagged custom.
    pub fn with_constraint(&self, omega: Vec<u64>, b: u64) -> Result<Self> {
        Self::new(
            ProblemKind::Custom,
            self.seed,
            self.mu.clone(),
            self.eta.clone(),
            omega,
            b,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn mu(&self) -> &[Vec<f64>] {
        &self.mu
    }
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }
    pub fn omega(&self) -> &[u64] {
        &self.omega
    }
    pub fn budget(&self) -> u64 {
        self.b
    }
    pub fn kind(&self) -> ProblemKind {
        self.kind
    }
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Classical objective at basis index `z`, accumulated in index order.
    pub fn objective(&self, z: usize) -> f64 {
        let mut f = 0.0;
        for i in 0..self.n {
            if z >> i & 1 == 0 {
                continue;
            }
            for j in 0..self.n {
                if z >> j & 1 == 1 {
                    f += self.mu[i][j];
                }
            }
        }
        for k in 0..self.n {
            if z >> k & 1 == 1 {
                f += self.eta[k];
            }
        }
        f
    }

    pub fn constraint_value(&self, z: usize) -> u64 {
        (0..self.n)
            .filter(|i| z >> i & 1 == 1)
            .map(|i| self.omega[i])
            .sum()
    }

    pub fn is_feasible(&self, z: usize) -> bool {
        self.constraint_value(z) == self.b
    }
}

fn check_shape(n: usize, mu: &[Vec<f64>], eta: &[f64], omega: &[u64]) -> Result<()> {
    if mu.len() != n {
        return Err(Error::Schema {
            field: "mu",
            reason: format!("expected {n} rows, found {}", mu.len()),
        });
    }
    if let Some((r, row)) = mu.iter().enumerate().find(|(_, row)| row.len() != n) {
        return Err(Error::Schema {
            field: "mu",
            reason: format!("row {r} has {} entries, expected {n}", row.len()),
        });
    }
    if eta.len() != n {
        return Err(Error::Schema {
            field: "eta",
            reason: format!("expected {n} entries, found {}", eta.len()),
        });
    }
    if omega.len() != n {
        return Err(Error::Schema {
            field: "omega",
            reason: format!("expected {n} entries, found {}", omega.len()),
        });
    }
    Ok(())
}

/// Random portfolio instance: uniform `[-1, 1]` coefficients, integer costs in
/// `[1, weight_max]`, budget equal to the cost of a random proper nonempty subset.
pub fn generate_portfolio_instance(n: usize, seed: u64, weight_max: u64) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("portfolio needs n >= 2, got {n}")));
    }
    if weight_max < 1 {
        return Err(Error::InvalidArgument("weight_max must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect();
    let mu = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (raw[i][j] + raw[j][i])).collect())
        .collect();
    let eta = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let omega: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=weight_max)).collect();

    let subset: Vec<bool> = loop {
        let s: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let picked = s.iter().filter(|&&x| x).count();
        if picked != 0 && picked != n {
            break s;
        }
    };
    let b = (0..n).filter(|&i| subset[i]).map(|i| omega[i]).sum();
    ProblemInstance::new(ProblemKind::Portfolio, Some(seed), mu, eta, omega, b)
}

const MAX_ENERGY_DRAWS: usize = 10_000;

/// Balanced two-jet partition: maximize the angular cut
/// `Σ_ij a_ij x_i (1 - x_j)` with `a_ij = (1 - cos θ_ij) / 2`, written as the
/// minimization of its negative. Energies are integers with an even total and
/// the budget is half the total.
pub fn generate_twojet_instance(n: usize, seed: u64, energy_levels: u64) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("two-jet needs n >= 2, got {n}")));
    }
    if energy_levels < 1 {
        return Err(Error::InvalidArgument("energy_levels must be >= 1".into()));
    }
    if energy_levels == 1 && n % 2 == 1 {
        return Err(Error::InvalidArgument(
            "energy_levels = 1 with odd n can never balance".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<[f64; 3]> = (0..n)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (1.0 - z * z).max(0.0).sqrt();
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect();
    let mut mu = vec![vec![0.0; n]; n];
    let mut eta = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let cos = dirs[i][0] * dirs[j][0] + dirs[i][1] * dirs[j][1] + dirs[i][2] * dirs[j][2];
            let a = 0.5 * (1.0 - cos);
            mu[i][j] = a;
            eta[i] -= a;
        }
    }

    for _ in 0..MAX_ENERGY_DRAWS {
        let eps: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=energy_levels)).collect();
        let total: u64 = eps.iter().sum();
        if total % 2 != 0 {
            continue;
        }
        let b = total / 2;
        if !SubsetSum::new(&eps, b).feasible() {
            continue;
        }
        return ProblemInstance::new(ProblemKind::Twojet, Some(seed), mu, eta, eps, b);
    }
    Err(Error::Infeasible { budget: 0 })
}

/// Instance JSON, one `mu` row per line, coefficients written with 17 significant digits.
pub fn emit_instance(inst: &ProblemInstance) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"n\": {},", inst.n);
    let _ = writeln!(out, "  \"kind\": \"{}\",", inst.kind.as_str());
    match inst.seed {
        Some(s) => {
            let _ = writeln!(out, "  \"seed\": {s},");
        }
        None => out.push_str("  \"seed\": null,\n"),
    }
    out.push_str("  \"mu\": [\n");
    for (r, row) in inst.mu.iter().enumerate() {
        out.push_str("    [");
        push_floats(&mut out, row);
        out.push(']');
        if r + 1 < inst.n {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ],\n");
    out.push_str("  \"eta\": [");
    push_floats(&mut out, &inst.eta);
    out.push_str("],\n");
    out.push_str("  \"omega\": [");
    let omega: Vec<String> = inst.omega.iter().map(u64::to_string).collect();
    out.push_str(&omega.join(", "));
    out.push_str("],\n");
    let _ = writeln!(out, "  \"b\": {}", inst.b);
    out.push_str("}\n");
    out
}

fn push_floats(out: &mut String, xs: &[f64]) {
    for (k, x) in xs.iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{x:.16e}");
    }
}

const FIELDS: [&str; 7] = ["n", "kind", "seed", "mu", "eta", "omega", "b"];

pub fn parse_instance(text: &str) -> Result<ProblemInstance> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value.as_object().ok_or(Error::Schema {
        field: "<root>",
        reason: "expected a JSON object".into(),
    })?;
    if let Some(extra) = obj.keys().find(|k| !FIELDS.contains(&k.as_str())) {
        return Err(Error::Schema {
            field: "<root>",
            reason: format!("unknown field `{extra}`"),
        });
    }
    let get = |field: &'static str| {
        obj.get(field).ok_or(Error::Schema {
            field,
            reason: "missing".into(),
        })
    };

    let n = get("n")?.as_u64().ok_or(Error::Schema {
        field: "n",
        reason: "expected a positive integer".into(),
    })? as usize;
    let kind: ProblemKind = get("kind")?
        .as_str()
        .ok_or(Error::Schema {
            field: "kind",
            reason: "expected a string".into(),
        })?
        .parse()?;
    let seed = match get("seed")? {
        Value::Null => None,
        v => Some(v.as_u64().ok_or(Error::Schema {
            field: "seed",
            reason: "expected an unsigned integer or null".into(),
        })?),
    };
    let mu = get("mu")?
        .as_array()
        .ok_or(Error::Schema {
            field: "mu",
            reason: "expected an array of rows".into(),
        })?
        .iter()
        .map(|row| float_array(row, "mu"))
        .collect::<Result<Vec<_>>>()?;
    let eta = float_array(get("eta")?, "eta")?;
    let omega = get("omega")?
        .as_array()
        .ok_or(Error::Schema {
            field: "omega",
            reason: "expected an array".into(),
        })?
        .iter()
        .enumerate()
        .map(|(i, v)| nonneg_integer(v, "omega", Some(i)))
        .collect::<Result<Vec<_>>>()?;
    let b = nonneg_integer(get("b")?, "b", None)?;

    if eta.len() != n {
        return Err(Error::Schema {
            field: "n",
            reason: format!("n = {n} but eta has {} entries", eta.len()),
        });
    }
    ProblemInstance::new(kind, seed, mu, eta, omega, b)
}

fn float_array(v: &Value, field: &'static str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or(Error::Schema {
            field,
            reason: "expected an array of numbers".into(),
        })?
        .iter()
        .map(|x| {
            x.as_f64().ok_or(Error::Schema {
                field,
                reason: format!("expected a number, found {x}"),
            })
        })
        .collect()
}

fn nonneg_integer(v: &Value, field: &'static str, index: Option<usize>) -> Result<u64> {
    if let Some(u) = v.as_u64() {
        return Ok(u);
    }
    if v.as_i64().is_some() {
        return Err(Error::Negative { field, index });
    }
    match v.as_f64() {
        Some(x) if x.fract() != 0.0 || !x.is_finite() => Err(Error::NonInteger { field, index }),
        Some(x) if x < 0.0 => Err(Error::Negative { field, index }),
        Some(x) => Ok(x as u64),
        None => Err(Error::Schema {
            field,
            reason: format!("expected an integer, found {v}"),
        }),
    }
}

/// Bitstring `x_1 … x_n` for basis index `z` (qubit 0 printed first).
pub fn bitstring(z: usize, n: usize) -> String {
    (0..n).map(|i| if z >> i & 1 == 1 { '1' } else { '0' }).collect()
}

/// Inverse of [`bitstring`].
pub fn basis_index(bits: &str) -> usize {
    bits.bytes()
        .enumerate()
        .filter(|(_, c)| *c == b'1')
        .fold(0, |z, (i, _)| z | 1 << i)
}
