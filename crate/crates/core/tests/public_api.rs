use proptest::prelude::*;
use qdrift_core::channel::{self, SuperOperator};
use qdrift_core::phase_est::{self, PEQuery, PeMethod};
use qdrift_core::{qdrift, Circuit, CountMode, Hamiltonian, WeightProfile};

fn hamiltonian() -> impl Strategy<Value = Hamiltonian> {
    (1usize..=2).prop_flat_map(|n| {
        let word = prop::collection::vec(prop::sample::select(vec!['I', 'X', 'Y', 'Z']), n)
            .prop_map(|w| w.into_iter().collect::<String>())
            .prop_filter("non-identity", |w| w.chars().any(|c| c != 'I'));
        prop::collection::vec((0.05f64..1.0, any::<bool>(), word), 1..=4).prop_map(|terms| {
            let text: String = terms
                .iter()
                .map(|(w, neg, p)| format!("{} {p}\n", if *neg { -w } else { *w }))
                .collect();
            Hamiltonian::parse(&text).unwrap()
        })
    })
}

fn purity(s: &SuperOperator) -> f64 {
    let j = s.choi().matrix().clone();
    (&j * &j).trace().re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn qdrift_step_is_a_channel(h in hamiltonian(), tau in 0.0f64..3.0) {
        let e = channel::qdrift_channel(&h, tau).unwrap();
        prop_assert!(e.trace_preservation_error() <= 1e-10);
        prop_assert!(e.choi().min_eigenvalue() >= -1e-10);
        prop_assert!((e.choi().trace().re - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn segments_compose_to_the_target(h in hamiltonian(), t in 0.1f64..2.0, n in 1u64..40) {
        let seg = channel::segment_channel(&h, t, n).unwrap();
        let full = channel::target_channel(&h, t).unwrap();
        let diff = seg.power(n).matrix() - full.matrix();
        prop_assert!(diff.iter().all(|z| z.norm() <= 1e-8));
    }

    #[test]
    fn circuit_text_round_trips(h in hamiltonian(), seed in any::<u64>(), controlled in any::<bool>()) {
        let c = if controlled {
            qdrift::compile_controlled(&h, 0.7, 0.05, seed, CountMode::Exact).unwrap()
        } else {
            qdrift::compile(&h, 0.7, 0.05, seed, CountMode::Exact).unwrap()
        };
        let back = Circuit::from_text(&c.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), c.to_text());
        prop_assert_eq!(back.gates.len(), c.gates.len());
        let again = qdrift::compile(&h, 0.7, 0.05, seed, CountMode::Exact).unwrap();
        prop_assert_eq!(again.gates.len() as u64, c.meta.n_gates);
    }

    #[test]
    fn pe_plan_budget_balances(
        l in 1u64..1000, lambda in 0.5f64..50.0, frac in 0.01f64..1.0,
        delta_e in 1e-6f64..1e-2, p_total in 1e-5f64..0.2, share in 0.05f64..0.95,
    ) {
        let max_weight = lambda / l as f64 * (1.0 + frac * (l - 1) as f64);
        let profile = WeightProfile::new(l, lambda, max_weight).unwrap();
        let q = PEQuery::new(profile, delta_e, p_total).unwrap();
        for method in [PeMethod::QDrift, PeMethod::Trotter] {
            let plan = phase_est::plan(method, &q, share * p_total).unwrap();
            let eps_sum: f64 = plan.rows.iter().map(|r| r.eps_j).sum();
            prop_assert!((eps_sum - plan.eps_tot).abs() <= 1e-12 * plan.eps_tot.max(1e-300) + 1e-18);
            prop_assert!((plan.failure_probability() - p_total).abs() <= 1e-12);
            prop_assert_eq!(plan.rows.len() as u32, plan.m);
        }
    }

    #[test]
    fn optimized_totals_fall_with_looser_targets(
        l in 2u64..500, lambda in 0.5f64..20.0, delta_e in 1e-5f64..1e-2, p_total in 1e-4f64..0.1,
    ) {
        let profile = WeightProfile::new(l, lambda, lambda / l as f64 * 1.5).unwrap();
        let q = PEQuery::new(profile, delta_e, p_total).unwrap();
        let wider_p = PEQuery::new(profile, delta_e, p_total * 1.5).unwrap();
        let wider_e = PEQuery::new(profile, delta_e * 1.5, p_total).unwrap();
        for method in [PeMethod::QDrift, PeMethod::Trotter] {
            let base = phase_est::optimize_pf(method, &q).unwrap().total;
            prop_assert!(phase_est::optimize_pf(method, &wider_p).unwrap().total < base);
            prop_assert!(phase_est::optimize_pf(method, &wider_e).unwrap().total < base);
        }
    }

    #[test]
    fn filter_minimum_is_tight(f in 0.01f64..1.0, p in 0.0f64..0.5) {
        let v = phase_est::repetition_filter(f, p, 1).unwrap();
        match v.min_repetitions {
            None => prop_assert!(f <= 2.0 * p),
            Some(k) => {
                prop_assert!(phase_est::repetition_filter(f, p, k).unwrap().feasible);
                if k > 1 {
                    prop_assert!(!phase_est::repetition_filter(f, p, k - 1).unwrap().feasible);
                }
            }
        }
    }
}

fn two_term() -> Hamiltonian {
    Hamiltonian::parse("0.5 Z\n0.5 X\n").unwrap()
}

#[test]
fn one_seed_gives_a_pure_channel() {
    let emp = channel::empirical_channel(&two_term(), 0.5, 0.05, &[11]).unwrap();
    assert!((purity(&emp.channel) - 1.0).abs() < 1e-10);
    assert!(emp.channel.is_channel());
}

#[test]
fn single_term_average_is_the_target() {
    let h = Hamiltonian::parse("-0.8 XY\n").unwrap();
    let seeds: Vec<u64> = (0..5).collect();
    let emp = channel::empirical_channel(&h, 1.3, 0.01, &seeds).unwrap();
    let target = channel::target_channel(&h, 1.3).unwrap();
    assert!(channel::choi_distance(&emp.channel, &target).unwrap() < 1e-10);
    assert!(emp.per_seed_distance.iter().all(|&d| d < 1e-10));
}

#[test]
fn seed_average_approaches_the_qdrift_channel() {
    let h = two_term();
    let (t, eps) = (0.5, 0.05);
    let n = qdrift::gate_count_exact(h.lambda(), t, eps).unwrap();
    let ideal = channel::qdrift_channel(&h, h.lambda() * t / n as f64).unwrap().power(n);
    let mut last = f64::INFINITY;
    for count in [10u64, 100, 1000] {
        let seeds: Vec<u64> = (0..count).collect();
        let emp = channel::empirical_channel(&h, t, eps, &seeds).unwrap();
        let d = channel::choi_distance(&emp.channel, &ideal).unwrap();
        println!("{count:>5} seeds: Choi distance to E^N = {d:.3e}");
        assert!(emp.channel.is_channel());
        last = d;
    }
    // Monte-Carlo noise: reported above, only a loose sanity ceiling here
    assert!(last < 0.2, "{last}");
}

#[test]
fn compile_is_deterministic_per_seed() {
    let h = Hamiltonian::parse("0.4 ZZI\n0.3 IZZ\n0.5 XII\n0.1 YYY\n").unwrap();
    let a = qdrift::compile(&h, 1.0, 1e-3, 99, CountMode::Exact).unwrap();
    let b = qdrift::compile(&h, 1.0, 1e-3, 99, CountMode::Exact).unwrap();
    let c = qdrift::compile(&h, 1.0, 1e-3, 100, CountMode::Exact).unwrap();
    assert_eq!(a.to_text(), b.to_text());
    assert_ne!(a.to_text(), c.to_text());
    assert_eq!(a.gates.len() as u64, qdrift::gate_count_exact(h.lambda(), 1.0, 1e-3).unwrap());
}

#[test]
fn choi_distance_of_orthogonal_unitaries() {
    // I versus a π/2 Z rotation (Z up to phase): Choi states are orthogonal Bell states
    let z = qdrift_core::PauliString::from_word("Z").unwrap();
    let rot = SuperOperator::unitary(&channel::pauli_rotation(&z, std::f64::consts::FRAC_PI_2).unwrap());
    let id = SuperOperator::identity(1).unwrap();
    let d = channel::choi_distance(&rot, &id).unwrap();
    assert!((d - 1.0).abs() < 1e-12, "{d}");
}
