//! Subset-sum reachability over integer weights.
//!
//! `suffix[i][s]` is true when some subset of `weights[i..]` sums to `s`.
//! Sums above the budget are never tracked.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SubsetSum {
    budget: usize,
    // row i covers weights[i..]; row n is the empty suffix
    suffix: Vec<Vec<bool>>,
    prefix: Vec<Vec<bool>>,
    weights: Vec<u64>,
}

impl SubsetSum {
    pub fn new(weights: &[u64], budget: u64) -> Self {
        let budget_us = budget as usize;
        let n = weights.len();
        let width = budget_us + 1;

        let mut suffix = vec![vec![false; width]; n + 1];
        suffix[n][0] = true;
        for i in (0..n).rev() {
            let w = weights[i];
            let (head, tail) = suffix.split_at_mut(i + 1);
            let next = &tail[0];
            let row = &mut head[i];
            row.copy_from_slice(next);
            if w <= budget {
                let w = w as usize;
                for s in w..width {
                    if next[s - w] {
                        row[s] = true;
                    }
                }
            }
        }

        let mut prefix = vec![vec![false; width]; n + 1];
        prefix[0][0] = true;
        for i in 0..n {
            let w = weights[i];
            let (head, tail) = prefix.split_at_mut(i + 1);
            let prev = &head[i];
            let row = &mut tail[0];
            row.copy_from_slice(prev);
            if w <= budget {
                let w = w as usize;
                for s in w..width {
                    if prev[s - w] {
                        row[s] = true;
                    }
                }
            }
        }

        Self {
            budget: budget_us,
            suffix,
            prefix,
            weights: weights.to_vec(),
        }
    }

    pub fn feasible(&self) -> bool {
        self.suffix[0][self.budget]
    }

    /// True if some feasible bitstring sets `x_i = 1`.
    pub fn can_select(&self, i: usize) -> bool {
        let w = self.weights[i];
        if w as usize > self.budget {
            return false;
        }
        let rest = self.budget - w as usize;
        let before = &self.prefix[i];
        let after = &self.suffix[i + 1];
        (0..=rest).any(|s| before[s] && after[rest - s])
    }

    /// Lexicographically smallest feasible bitstring, reading `x_0` first and
    /// preferring `x_i = 0`.
    pub fn smallest_solution(&self) -> Result<Vec<bool>> {
        if !self.feasible() {
            return Err(Error::Infeasible {
                budget: self.budget as u64,
            });
        }
        let n = self.weights.len();
        let mut remaining = self.budget;
        let mut bits = vec![false; n];
        for i in 0..n {
            if self.suffix[i + 1][remaining] {
                continue;
            }
            bits[i] = true;
            remaining -= self.weights[i] as usize;
        }
        debug_assert_eq!(remaining, 0);
        Ok(bits)
    }
}

pub fn is_feasible(weights: &[u64], budget: u64) -> bool {
    SubsetSum::new(weights, budget).feasible()
}
