use proptest::prelude::*;

use hwqaoa::hamiltonian::build_constraint_diagonal;
use hwqaoa::hwo::{build_sparse_pool, enumerate_hw_equations, EquationDedup, HwOperator};
use hwqaoa::oracle::{approximation_ratio, count_gates};
use hwqaoa::problem::{emit_instance, generate_portfolio_instance, parse_instance};
use hwqaoa::simulator::StateVector;
use hwqaoa::subset_sum::SubsetSum;
use hwqaoa::vqa::build_penalty_ansatz;

fn weight_sum(omega: &[u64], z: usize) -> u64 {
    (0..omega.len()).filter(|i| z >> i & 1 == 1).map(|i| omega[i]).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subset_sum_matches_enumeration(omega in prop::collection::vec(0u64..6, 1..9), b in 0u64..20) {
        let dp = SubsetSum::new(&omega, b);
        let sols: Vec<usize> = (0..1usize << omega.len()).filter(|&z| weight_sum(&omega, z) == b).collect();
        prop_assert_eq!(dp.feasible(), !sols.is_empty());
        for i in 0..omega.len() {
            prop_assert_eq!(dp.can_select(i), sols.iter().any(|z| z >> i & 1 == 1));
        }
        if let Ok(bits) = dp.smallest_solution() {
            let z = bits.iter().enumerate().filter(|(_, &x)| x).fold(0usize, |z, (i, _)| z | 1 << i);
            prop_assert_eq!(weight_sum(&omega, z), b);
        }
    }

    #[test]
    fn operators_preserve_the_constraint(omega in prop::collection::vec(1u64..5, 2..8), pick in any::<prop::sample::Index>()) {
        let budget: u64 = omega.iter().sum();
        let eqs = enumerate_hw_equations(&omega, budget, 3, usize::MAX, EquationDedup::Index);
        prop_assume!(!eqs.equations.is_empty());
        let op = HwOperator::new(pick.get(&eqs.equations).clone());
        for z in 0..1usize << omega.len() {
            if let Some(w) = op.apply_to_basis(z) {
                prop_assert_eq!(weight_sum(&omega, z), weight_sum(&omega, w));
                prop_assert_eq!(op.apply_to_basis(w), Some(z));
            }
        }
    }

    #[test]
    fn pool_rotations_keep_feasible_mass(seed in 0u64..500, n in 3usize..8, angles in prop::collection::vec(-3.0f64..3.0, 12)) {
        let inst = generate_portfolio_instance(n, seed, 4).unwrap();
        let pool = build_sparse_pool(inst.omega(), inst.budget()).unwrap();
        let cons = build_constraint_diagonal(&inst);
        let start = SubsetSum::new(inst.omega(), inst.budget()).smallest_solution().unwrap();
        let z = start.iter().enumerate().filter(|(_, &x)| x).fold(0usize, |z, (i, _)| z | 1 << i);
        let mut s = StateVector::basis(n, z).unwrap();
        for (op, beta) in pool.ops().iter().cycle().zip(&angles) {
            s.apply_hwo_exp(op, *beta);
        }
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        prop_assert!((s.feasible_mass(&cons, inst.budget()) - 1.0).abs() < 1e-9);
        for q in pool.covered() {
            prop_assert!(!pool.frozen_zero().contains(q));
        }
    }

    #[test]
    fn instance_json_round_trip(seed in any::<u64>(), n in 2usize..9, wm in 1u64..6) {
        let inst = generate_portfolio_instance(n, seed, wm).unwrap();
        prop_assert_eq!(parse_instance(&emit_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn ratio_is_at_most_one(hc in -50.0f64..50.0, e0 in -50.0f64..50.0, feasible in any::<bool>()) {
        prop_assume!(e0 != 0.0);
        let r = approximation_ratio(hc, e0, feasible).unwrap();
        prop_assert!(r <= 1.0);
        if !feasible {
            prop_assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn gate_count_is_linear_in_layers(seed in 0u64..200, n in 2usize..7, p in 1usize..6) {
        let inst = generate_portfolio_instance(n, seed, 3).unwrap();
        let one = count_gates(&build_penalty_ansatz(&inst, 1, 1.0).unwrap());
        let many = count_gates(&build_penalty_ansatz(&inst, p, 1.0).unwrap());
        let init = n as u64;
        prop_assert_eq!(many.total - init, p as u64 * (one.total - init));
        prop_assert_eq!(many.total, many.one_qubit + many.two_qubit);
    }
}
