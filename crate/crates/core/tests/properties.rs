mod common;

use common::*;
use dgdls::dop::{build_dop_basis, DiscreteInnerProduct};
use dgdls::flux::NumericalFluxKind;
use dgdls::nodes::{equidistant_nodes, scattered_nodes, NodeKind, NodeSet};
use dgdls::operator::{DgOperator, OperatorMode, RulePolicy};
use dgdls::problems::ProblemKind;
use dgdls::quadrature::build_ls_quadrature;
use dgdls::solver::{NRule, Setup};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn node_set(kind: NodeKind, n_points: usize, seed: u64) -> NodeSet {
    match kind {
        NodeKind::Scattered if n_points > 2 => scattered_nodes(n_points, seed).unwrap(),
        _ => equidistant_nodes(n_points).unwrap(),
    }
}

fn node_kind() -> impl Strategy<Value = NodeKind> {
    prop_oneof![Just(NodeKind::Equidistant), Just(NodeKind::Scattered)]
}

fn policy() -> impl Strategy<Value = RulePolicy> {
    prop_oneof![Just(RulePolicy::Exact), Just(RulePolicy::Nonnegative)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ls_rule_is_exact_and_consistent(n in 1usize..=40, frac in 0.0f64..=0.5, seed: u64, kind in node_kind()) {
        let d = (frac * n as f64) as usize;
        let rule = build_ls_quadrature(&node_set(kind, n + 1, seed), d).unwrap();
        let sum: f64 = rule.weights().iter().sum();
        prop_assert!((sum - 2.0).abs() <= 1e-12);
        for j in 0..=d {
            let q: f64 = rule.nodes().points().iter().zip(rule.weights())
                .map(|(x, w)| w * legendre(j, *x)[j]).sum();
            let exact = if j == 0 { 2.0 } else { 0.0 };
            prop_assert!((q - exact).abs() <= 1e-12, "j = {}: {:e}", j, q - exact);
        }
        if rule.is_nonnegative() {
            prop_assert!((rule.kappa() - 2.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn dop_basis_is_orthonormal(n in 1usize..=128, k in 0usize..=12, seed: u64, weight_seed: u64) {
        let k = k.min(n);
        let nodes = node_set(NodeKind::Scattered, n + 1, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(weight_seed);
        let weights: Vec<f64> = (0..=n).map(|_| rand::Rng::gen_range(&mut rng, 0.1..2.0)).collect();
        let ip = DiscreteInnerProduct::new(nodes, weights).unwrap();
        let basis = build_dop_basis(&ip, k).unwrap();
        prop_assert!(orthonormality_residual(&basis) <= 1e-10);
    }

    #[test]
    fn integration_by_parts_with_exact_rules(k in 1usize..=6, m in 2usize..=4, seed: u64, kind in node_kind(), policy in policy()) {
        let op = DgOperator::build(&node_set(kind, m * k + 1, seed), k, OperatorMode::Dgdls { policy }).unwrap();
        // The identity is a consequence of exactness 2K; lower rules are not covered.
        prop_assume!(op.quadrature().exactness_degree() >= 2 * k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..5 {
            prop_assert!(ibp_residual(&op, &mut rng) <= 1e-10);
        }
        prop_assert!(sbp_residual(&op) <= 1e-10);
    }

    #[test]
    fn free_stream_is_preserved(
        k in 1usize..=6, m in 1usize..=4, i in 1usize..=10, seed: u64, value in -2.0f64..2.0,
        kind in node_kind(), policy in policy(),
        problem in prop_oneof![Just(ProblemKind::Advection), Just(ProblemKind::Burgers), Just(ProblemKind::Wave)],
    ) {
        let mut setup = Setup::new(problem, k, i, NRule::TimesK(m)).with_nodes(kind, seed);
        setup.policy = policy;
        let solver = setup.solver().unwrap();
        prop_assert!(free_stream_residual(&solver, value) <= 1e-12);
    }

    #[test]
    fn periodic_mass_is_conserved(
        k in 1usize..=6, m in 1usize..=4, i in 1usize..=10, seed: u64, kind in node_kind(),
        problem in prop_oneof![Just(ProblemKind::Advection), Just(ProblemKind::Burgers), Just(ProblemKind::Wave)],
    ) {
        let solver = Setup::new(problem, k, i, NRule::TimesK(m)).with_nodes(kind, seed).solver().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = random_state(&solver, &mut rng, 0.5);
        for rate in mass_rate(&solver, &state) {
            prop_assert!(rate.abs() <= 1e-12, "{:e}", rate);
        }
    }

    #[test]
    fn entropy_correction_sums_to_zero(
        k in 1usize..=6, seed: u64, dx in 0.01f64..1.0, g_left in -3.0f64..3.0, g_right in -3.0f64..3.0,
    ) {
        let op = DgOperator::build(&equidistant_nodes(2 * k + 1).unwrap(), k, OperatorMode::Dgdls { policy: RulePolicy::Exact }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modal: Vec<f64> = (0..=k).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let rhs: Vec<f64> = (0..=k).map(|_| rand::Rng::gen_range(&mut rng, -10.0..10.0)).collect();
        let r = op.entropy_correction(dx, &modal, &rhs, (g_left, g_right));
        prop_assert!(r.iter().sum::<f64>().abs() <= 1e-13);
    }

    #[test]
    fn numerical_fluxes_are_consistent(u in -3.0f64..3.0, v in -3.0f64..3.0) {
        for problem in [ProblemKind::Advection, ProblemKind::Burgers, ProblemKind::Wave] {
            for kind in [NumericalFluxKind::FullUpwind, NumericalFluxKind::LocalLaxFriedrichs, NumericalFluxKind::WaveUpwind] {
                let Ok(p) = dgdls::problems::Problem::new(problem, kind) else { continue };
                let law = p.law();
                let state = [u, v];
                let (mut exact, mut num) = ([0.0; 2], [0.0; 2]);
                law.flux(&state, &mut exact);
                law.numerical_flux(kind, &state, &state, &mut num);
                for c in 0..law.n_components() {
                    prop_assert!((exact[c] - num[c]).abs() <= 1e-12);
                }
            }
        }
    }
}
