//! Hamming weight equations and the operators built from them.
//!
//! An equation `Σ_{i∈A} ω_i = Σ_{j∈B} ω_j ≤ b` over disjoint index sets gives
//! an operator `M` that swaps the bit pattern `1_A 0_B` with `0_A 1_B` on the
//! involved qubits and annihilates every other pattern. Spectator qubits are
//! untouched, so `M` maps feasible basis states to feasible basis states.
//!
//! `M` is stored with unit matrix elements. The ladder-operator product
//! `∏_A (X + iY) ∏_B (X - iY) + h.c.` equals `2^{|A|+|B|}` times this.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::subset_sum::SubsetSum;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HwEquation {
    set_a: Vec<usize>,
    set_b: Vec<usize>,
}

impl HwEquation {
    /// Builds the canonical form (`min(A) < min(B)`) after checking that the
    /// sets are disjoint, nonempty and balanced within the budget.
    pub fn new(set_a: Vec<usize>, set_b: Vec<usize>, omega: &[u64], budget: u64) -> Result<Self> {
        let mut a = set_a;
        let mut b = set_b;
        a.sort_unstable();
        a.dedup();
        b.sort_unstable();
        b.dedup();
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidArgument("equation sides must be nonempty".into()));
        }
        if let Some(&q) = a.iter().chain(&b).find(|&&q| q >= omega.len()) {
            return Err(Error::InvalidArgument(format!("qubit {q} out of range")));
        }
        if a.iter().any(|q| b.binary_search(q).is_ok()) {
            return Err(Error::InvalidArgument("equation sides overlap".into()));
        }
        let sum_a: u64 = a.iter().map(|&q| omega[q]).sum();
        let sum_b: u64 = b.iter().map(|&q| omega[q]).sum();
        if sum_a != sum_b {
            return Err(Error::InvalidArgument(format!(
                "unbalanced equation: {sum_a} != {sum_b}"
            )));
        }
        if sum_a > budget {
            return Err(Error::InvalidArgument(format!(
                "equation weight {sum_a} exceeds budget {budget}"
            )));
        }
        Ok(Self::canonical(a, b))
    }

    fn canonical(a: Vec<usize>, b: Vec<usize>) -> Self {
        if a[0] < b[0] {
            Self { set_a: a, set_b: b }
        } else {
            Self { set_a: b, set_b: a }
        }
    }

    pub fn set_a(&self) -> &[usize] {
        &self.set_a
    }

    pub fn set_b(&self) -> &[usize] {
        &self.set_b
    }

    /// Unordered pair of sorted weight multisets; equal for equations that
    /// state the same relation between weight values.
    fn weight_signature(&self, omega: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let side = |s: &[usize]| {
            let mut w: Vec<u64> = s.iter().map(|&q| omega[q]).collect();
            w.sort_unstable();
            w
        };
        let (a, b) = (side(&self.set_a), side(&self.set_b));
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

impl std::fmt::Display for HwEquation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |s: &[usize]| {
            s.iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "({{{}}}, {{{}}})", join(&self.set_a), join(&self.set_b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct HwOperator {
    equation: HwEquation,
    mask_a: usize,
    mask_b: usize,
}

impl HwOperator {
    pub fn new(equation: HwEquation) -> Self {
        let mask = |s: &[usize]| s.iter().fold(0usize, |m, &q| m | 1 << q);
        let mask_a = mask(&equation.set_a);
        let mask_b = mask(&equation.set_b);
        Self {
            equation,
            mask_a,
            mask_b,
        }
    }

    pub fn equation(&self) -> &HwEquation {
        &self.equation
    }

    pub fn mask_a(&self) -> usize {
        self.mask_a
    }

    pub fn mask_b(&self) -> usize {
        self.mask_b
    }

    pub fn involved_mask(&self) -> usize {
        self.mask_a | self.mask_b
    }

    pub fn involved_count(&self) -> usize {
        self.involved_mask().count_ones() as usize
    }

    /// Partner basis index, or `None` when `M` annihilates `|z⟩`.
    #[inline]
    pub fn apply_to_basis(&self, z: usize) -> Option<usize> {
        let involved = self.involved_mask();
        let pattern = z & involved;
        if pattern == self.mask_a || pattern == self.mask_b {
            Some(z ^ involved)
        } else {
            None
        }
    }
}

pub fn apply_operator_to_basis(op: &HwOperator, z: usize) -> Option<usize> {
    op.apply_to_basis(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationDedup {
    /// `(A, B)` and `(B, A)` are the same equation.
    Index,
    /// Additionally keep only the first equation for each relation between
    /// weight values, e.g. `ω1 + ω2 = ω4` hides `ω1 + ω3 = ω4` when `ω2 = ω3`.
    WeightSignature,
}

#[derive(Debug, Clone)]
pub struct EquationEnumeration {
    pub equations: Vec<HwEquation>,
    pub truncated: bool,
}

/// All equations whose sides have at most `max_subset_size` indices, sorted by
/// `(A, B)`. Only constrained qubits (`ω_i > 0`) take part.
pub fn enumerate_hw_equations(
    omega: &[u64],
    budget: u64,
    max_subset_size: usize,
    max_count: usize,
    dedup: EquationDedup,
) -> EquationEnumeration {
    let candidates: Vec<usize> = (0..omega.len())
        .filter(|&q| omega[q] > 0 && omega[q] <= budget)
        .collect();

    let mut by_sum: HashMap<u64, Vec<Vec<usize>>> = HashMap::new();
    let mut stack = Vec::new();
    collect_subsets(&candidates, omega, budget, max_subset_size, 0, 0, &mut stack, &mut by_sum);

    let mut equations = Vec::new();
    for subsets in by_sum.values() {
        for (k, s) in subsets.iter().enumerate() {
            for t in &subsets[k + 1..] {
                if disjoint(s, t) {
                    equations.push(HwEquation::canonical(s.clone(), t.clone()));
                }
            }
        }
    }
    equations.sort();

    if dedup == EquationDedup::WeightSignature {
        let mut seen = BTreeSet::new();
        equations.retain(|eq| seen.insert(eq.weight_signature(omega)));
    }

    let truncated = equations.len() > max_count;
    equations.truncate(max_count);
    EquationEnumeration {
        equations,
        truncated,
    }
}

#[allow(clippy::too_many_arguments)]
fn collect_subsets(
    candidates: &[usize],
    omega: &[u64],
    budget: u64,
    max_size: usize,
    start: usize,
    sum: u64,
    stack: &mut Vec<usize>,
    out: &mut HashMap<u64, Vec<Vec<usize>>>,
) {
    if !stack.is_empty() {
        out.entry(sum).or_default().push(stack.clone());
    }
    if stack.len() == max_size {
        return;
    }
    for k in start..candidates.len() {
        let q = candidates[k];
        let next = sum + omega[q];
        if next > budget {
            continue;
        }
        stack.push(q);
        collect_subsets(candidates, omega, budget, max_size, k + 1, next, stack, out);
        stack.pop();
    }
}

fn disjoint(s: &[usize], t: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < s.len() && j < t.len() {
        match s[i].cmp(&t[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

/// Qubits that are 0 in every feasible bitstring.
pub fn freeze_infeasible_qubits(omega: &[u64], budget: u64) -> Result<BTreeSet<usize>> {
    let dp = SubsetSum::new(omega, budget);
    if !dp.feasible() {
        return Err(Error::Infeasible { budget });
    }
    Ok((0..omega.len()).filter(|&q| !dp.can_select(q)).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorPool {
    n: usize,
    ops: Vec<HwOperator>,
    frozen_zero: BTreeSet<usize>,
    covered: BTreeSet<usize>,
    uncovered: BTreeSet<usize>,
}

impl OperatorPool {
    pub fn from_operators(n: usize, ops: Vec<HwOperator>, frozen_zero: BTreeSet<usize>, omega: &[u64]) -> Self {
        let covered: BTreeSet<usize> = ops
            .iter()
            .flat_map(|op| op.equation.set_a.iter().chain(&op.equation.set_b).copied())
            .collect();
        let uncovered = (0..n)
            .filter(|q| omega[*q] > 0 && !frozen_zero.contains(q) && !covered.contains(q))
            .collect();
        Self {
            n,
            ops,
            frozen_zero,
            covered,
            uncovered,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn ops(&self) -> &[HwOperator] {
        &self.ops
    }
    pub fn len(&self) -> usize {
        self.ops.len()
    }
    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
    pub fn frozen_zero(&self) -> &BTreeSet<usize> {
        &self.frozen_zero
    }
    pub fn covered(&self) -> &BTreeSet<usize> {
        &self.covered
    }
    pub fn uncovered(&self) -> &BTreeSet<usize> {
        &self.uncovered
    }
}

const MAX_LINK_SIZE: usize = 4;

/// Sparse chain-shaped pool.
///
/// Active qubits (constrained, not frozen) are sorted by `(ω, index)`. Equal
/// weights are chained by adjacent swaps; each pair of consecutive distinct
/// weight values is linked by the smallest balanced equation with at most four
/// indices that puts one qubit of each weight on opposite sides, preferring the
/// shortest prefix of the sorted order.
pub fn build_sparse_pool(omega: &[u64], budget: u64) -> Result<OperatorPool> {
    let n = omega.len();
    let frozen = freeze_infeasible_qubits(omega, budget)?;
    let mut order: Vec<usize> = (0..n)
        .filter(|q| omega[*q] > 0 && !frozen.contains(q))
        .collect();
    order.sort_by_key(|&q| (omega[q], q));

    let mut ops: Vec<HwOperator> = Vec::new();
    let push = |eq: HwEquation, ops: &mut Vec<HwOperator>| {
        if !ops.iter().any(|op| op.equation == eq) {
            ops.push(HwOperator::new(eq));
        }
    };

    for pair in order.windows(2) {
        if omega[pair[0]] == omega[pair[1]] {
            push(HwEquation::canonical(vec![pair[0]], vec![pair[1]]), &mut ops);
        }
    }

    let mut values: Vec<u64> = order.iter().map(|&q| omega[q]).collect();
    values.dedup();
    for w in values.windows(2) {
        if let Some(eq) = find_link(&order, omega, budget, w[0], w[1]) {
            push(eq, &mut ops);
        }
    }

    Ok(OperatorPool::from_operators(n, ops, frozen, omega))
}

fn find_link(order: &[usize], omega: &[u64], budget: u64, low: u64, high: u64) -> Option<HwEquation> {
    // rank: (prefix length, index count, positions of A, positions of B)
    type Rank = (usize, usize, Vec<usize>, Vec<usize>);
    let mut best: Option<(Rank, Vec<usize>, Vec<usize>)> = None;

    let positions_of = |w: u64| (0..order.len()).filter(move |&p| omega[order[p]] == w);
    let weight = |ps: &[usize]| ps.iter().map(|&p| omega[order[p]]).sum::<u64>();

    for pa in positions_of(low) {
        for pc in positions_of(high) {
            let rest: Vec<usize> = (0..order.len()).filter(|&p| p != pa && p != pc).collect();
            let mut extras: Vec<Vec<usize>> = vec![vec![]];
            for (k, &x) in rest.iter().enumerate() {
                extras.push(vec![x]);
                for &y in &rest[k + 1..] {
                    extras.push(vec![x, y]);
                }
            }
            for extra in &extras {
                if 2 + extra.len() > MAX_LINK_SIZE {
                    continue;
                }
                // every way of splitting the extras between the two sides
                for split in 0..(1usize << extra.len()) {
                    let mut side_a = vec![pa];
                    let mut side_b = vec![pc];
                    for (k, &x) in extra.iter().enumerate() {
                        if split >> k & 1 == 0 {
                            side_a.push(x);
                        } else {
                            side_b.push(x);
                        }
                    }
                    let wa = weight(&side_a);
                    if wa != weight(&side_b) || wa > budget {
                        continue;
                    }
                    side_a.sort_unstable();
                    side_b.sort_unstable();
                    let prefix = 1 + *side_a.iter().chain(&side_b).max().unwrap();
                    let rank = (prefix, side_a.len() + side_b.len(), side_a.clone(), side_b.clone());
                    if best.as_ref().map_or(true, |(r, _, _)| rank < *r) {
                        best = Some((rank, side_a, side_b));
                    }
                }
            }
        }
    }

    best.map(|(_, a, b)| {
        let qa: Vec<usize> = a.iter().map(|&p| order[p]).collect();
        let qb: Vec<usize> = b.iter().map(|&p| order[p]).collect();
        HwEquation::new(qa, qb, omega, budget).expect("link equation is balanced by construction")
    })
}

pub const MAX_ENUMERATION_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConnectivityReport {
    pub connected: bool,
    pub components: usize,
    pub feasible_count: usize,
}

/// Connected components of the feasible bitstrings under the pool's swaps.
pub fn verify_connectivity(ops: &[HwOperator], omega: &[u64], budget: u64, n: usize) -> Result<ConnectivityReport> {
    if n > MAX_ENUMERATION_QUBITS {
        return Err(Error::TooLarge {
            n,
            max: MAX_ENUMERATION_QUBITS,
        });
    }
    if omega.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: omega.len(),
        });
    }
    let feasible: Vec<usize> = (0..1usize << n)
        .filter(|&z| {
            (0..n)
                .filter(|q| z >> q & 1 == 1)
                .map(|q| omega[q])
                .sum::<u64>()
                == budget
        })
        .collect();

    let mut parent: Vec<usize> = (0..feasible.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (k, &z) in feasible.iter().enumerate() {
        for op in ops {
            let Some(w) = op.apply_to_basis(z) else {
                continue;
            };
            let Ok(m) = feasible.binary_search(&w) else {
                continue;
            };
            let (rk, rm) = (find(&mut parent, k), find(&mut parent, m));
            if rk != rm {
                parent[rk.max(rm)] = rk.min(rm);
            }
        }
    }
    let components = (0..feasible.len())
        .filter(|&k| find(&mut parent, k) == k)
        .count();
    Ok(ConnectivityReport {
        connected: components <= 1,
        components,
        feasible_count: feasible.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::basis_index;

    const W: [u64; 5] = [1, 2, 2, 3, 5];

    fn eq1(a: &[usize], b: &[usize]) -> HwEquation {
        // 1-based indices as written in the worked example
        HwEquation::new(
            a.iter().map(|q| q - 1).collect(),
            b.iter().map(|q| q - 1).collect(),
            &W,
            4,
        )
        .unwrap()
    }

    #[test]
    fn worked_relations_by_weight_value() {
        let got = enumerate_hw_equations(&W, 4, 2, 100, EquationDedup::WeightSignature);
        assert!(!got.truncated);
        let expect: BTreeSet<HwEquation> =
            [eq1(&[1, 4], &[2, 3]), eq1(&[1, 2], &[4]), eq1(&[2], &[3])].into();
        assert_eq!(got.equations.into_iter().collect::<BTreeSet<_>>(), expect);
    }

    #[test]
    fn worked_relations_by_index() {
        // ω1 + ω3 = ω4 is the same weight relation as ω1 + ω2 = ω4
        let got = enumerate_hw_equations(&W, 4, 2, 100, EquationDedup::Index);
        assert_eq!(
            got.equations,
            vec![
                eq1(&[1, 2], &[4]),
                eq1(&[1, 3], &[4]),
                eq1(&[1, 4], &[2, 3]),
                eq1(&[2], &[3]),
            ]
        );
    }

    #[test]
    fn small_enumerations() {
        let e = enumerate_hw_equations(&[1, 1], 1, 2, 10, EquationDedup::Index);
        assert_eq!(e.equations, vec![HwEquation::new(vec![0], vec![1], &[1, 1], 1).unwrap()]);
        assert!(enumerate_hw_equations(&[7], 4, 2, 10, EquationDedup::Index)
            .equations
            .is_empty());
        let t = enumerate_hw_equations(&W, 4, 2, 2, EquationDedup::Index);
        assert!(t.truncated);
        assert_eq!(t.equations.len(), 2);
    }

    #[test]
    fn equation_validation() {
        assert!(HwEquation::new(vec![0], vec![0], &W, 4).is_err());
        assert!(HwEquation::new(vec![0], vec![1], &W, 4).is_err());
        assert!(HwEquation::new(vec![], vec![1], &W, 4).is_err());
        assert!(HwEquation::new(vec![3, 0], vec![1, 2], &W, 3).is_err());
        let e = HwEquation::new(vec![2], vec![1], &W, 4).unwrap();
        assert_eq!((e.set_a(), e.set_b()), (&[1][..], &[2][..]));
    }

    #[test]
    fn freezing() {
        assert_eq!(freeze_infeasible_qubits(&W, 4).unwrap(), [4].into());
        assert!(freeze_infeasible_qubits(&[1, 1], 1).unwrap().is_empty());
        assert!(freeze_infeasible_qubits(&[3, 3], 3).unwrap().is_empty());
        assert!(freeze_infeasible_qubits(&[2, 2], 3).is_err());
    }

    #[test]
    fn worked_action_on_basis() {
        let op = HwOperator::new(eq1(&[1, 4], &[2, 3]));
        assert_eq!(op.apply_to_basis(basis_index("10010")), Some(basis_index("01100")));
        assert_eq!(op.apply_to_basis(basis_index("01100")), Some(basis_index("10010")));
        let op = HwOperator::new(eq1(&[1, 2], &[4]));
        assert_eq!(op.apply_to_basis(basis_index("11000")), Some(basis_index("00010")));
        assert_eq!(op.apply_to_basis(basis_index("11001")), Some(basis_index("00011")));
        let op = HwOperator::new(eq1(&[2], &[3]));
        assert_eq!(op.apply_to_basis(basis_index("01100")), None);
        assert_eq!(op.apply_to_basis(basis_index("00000")), None);
    }

    #[test]
    fn worked_pool() {
        let pool = build_sparse_pool(&W, 4).unwrap();
        assert_eq!(pool.frozen_zero(), &[4].into());
        assert_eq!(pool.covered(), &[0, 1, 2, 3].into());
        assert!(pool.uncovered().is_empty());
        let eqs: Vec<&HwEquation> = pool.ops().iter().map(|op| op.equation()).collect();
        assert!(eqs.contains(&&eq1(&[2], &[3])));
        assert!(eqs.contains(&&eq1(&[1, 2], &[4])));
        assert!(eqs.contains(&&eq1(&[1, 4], &[2, 3])));
        assert_eq!(eqs.len(), 3);
        let report = verify_connectivity(pool.ops(), &W, 4, 5).unwrap();
        assert_eq!(
            report,
            ConnectivityReport {
                connected: true,
                components: 1,
                feasible_count: 2
            }
        );
    }

    #[test]
    fn equal_weights_chain() {
        for n in 2..7 {
            let omega = vec![3; n];
            for k in 1..n {
                let pool = build_sparse_pool(&omega, 3 * k as u64).unwrap();
                assert_eq!(pool.len(), n - 1);
                for (t, op) in pool.ops().iter().enumerate() {
                    assert_eq!(op.equation().set_a(), &[t]);
                    assert_eq!(op.equation().set_b(), &[t + 1]);
                }
                assert!(verify_connectivity(pool.ops(), &omega, 3 * k as u64, n).unwrap().connected);
            }
        }
    }

    #[test]
    fn mixed_weights_pool() {
        let omega = [1, 1, 2];
        let pool = build_sparse_pool(&omega, 2).unwrap();
        let eqs: Vec<HwEquation> = pool.ops().iter().map(|op| op.equation().clone()).collect();
        assert!(eqs.contains(&HwEquation::new(vec![0], vec![1], &omega, 2).unwrap()));
        assert!(eqs.contains(&HwEquation::new(vec![0, 1], vec![2], &omega, 2).unwrap()));
        let report = verify_connectivity(pool.ops(), &omega, 2, 3).unwrap();
        assert!(report.connected);
        assert_eq!(report.feasible_count, 2);
    }

    #[test]
    fn empty_pool_disconnects() {
        let report = verify_connectivity(&[], &[1, 1], 1, 2).unwrap();
        assert!(!report.connected);
        assert_eq!(report.components, 2);
    }

    #[test]
    fn unconstrained_and_uncovered_qubits() {
        // qubit 1 is unconstrained; qubit 2 has a unique weight and no partner
        let omega = [2, 0, 3, 2];
        let pool = build_sparse_pool(&omega, 5).unwrap();
        assert!(!pool.covered().contains(&1));
        assert_eq!(pool.uncovered(), &[2].into());
        assert_eq!(pool.len(), 1);
        let pool = build_sparse_pool(&[1, 5], 1).unwrap();
        assert_eq!(pool.frozen_zero(), &[1].into());
        assert_eq!(pool.uncovered(), &[0].into());
        assert!(pool.is_empty());
    }
}
