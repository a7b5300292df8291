mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{final_state, phase_distance, q, qs, random_circuit};
use qcflow::backends::{CommandCollector, ResourceCounter};
use qcflow::engine::run_stages;
use qcflow::experiments::{compile_shor_iteration, ShorConfig};
use qcflow::optimize::{compile_with_igs, OptimizerStage};
use qcflow::qmath::{add_const, ShorParams};
use qcflow::{Backend, Command, GateKind, Pipeline, QubitId, Stage};

fn optimize(cmds: Vec<Command>, window: usize) -> Vec<Command> {
    let mut stages: Vec<Box<dyn Stage>> = vec![Box::new(OptimizerStage::new(window))];
    run_stages(&mut stages, cmds).unwrap()
}

fn max_per_qubit(cmds: &[Command]) -> usize {
    let mut n: HashMap<QubitId, usize> = HashMap::new();
    for c in cmds {
        for x in c.all_qubits() {
            *n.entry(x).or_default() += 1;
        }
    }
    n.into_values().max().unwrap_or(0)
}

#[test]
fn qft_pair_cancels() {
    let f = Command::qft(qs(5));
    assert!(optimize(vec![f.clone(), f.inverse().unwrap()], 20).is_empty());
}

#[test]
fn rotations_merge_and_blockers_hold() {
    let out = optimize(
        vec![
            Command::single(GateKind::Rz(0.3), q(0)),
            Command::single(GateKind::Rz(0.4), q(0)),
        ],
        20,
    );
    assert_eq!(out.len(), 1);
    match out[0].gate() {
        GateKind::Rz(t) => assert!((t - 0.7).abs() < 1e-12),
        g => panic!("{g:?}"),
    }
    let blocked = vec![
        Command::cnot(q(0), q(1)),
        Command::single(GateKind::Rz(0.1), q(0)),
        Command::cnot(q(0), q(1)),
    ];
    assert_eq!(optimize(blocked.clone(), 20), blocked);
}

fn successive_adders(use_igs: bool) -> Vec<Command> {
    let mut eng = Pipeline::new(CommandCollector::default());
    let r = eng.allocate_qureg(3);
    add_const(&mut eng, 3, &r).unwrap();
    add_const(&mut eng, 2, &r).unwrap();
    eng.flush().unwrap();
    compile_with_igs(eng.into_backend().into_commands(), use_igs, 20).unwrap()
}

#[test]
fn igs_cancels_inner_transform_pair_of_successive_adders() {
    let (with, without) = (successive_adders(true), successive_adders(false));
    let count = |cmds: &[Command]| {
        let mut c = ResourceCounter::default();
        c.receive(cmds).unwrap();
        c.into_report()
    };
    let (a, b) = (count(&with), count(&without));
    assert!(a.rz() < b.rz(), "{} vs {}", a.rz(), b.rz());
    assert!(a.cnot() < b.cnot());
    let d = phase_distance(&final_state(&with, 3), &final_state(&without, 3));
    assert!(d < 1e-8);
}

#[test]
fn igs_and_plain_shor_iterations_are_equivalent() {
    let params = ShorParams::with_default_base(15).unwrap();
    let state = |igs| {
        let cmds: Vec<Command> = compile_shor_iteration(
            &params,
            0,
            &ShorConfig {
                cuc: true,
                igs,
                window: 20,
            },
        )
        .unwrap()
        .into_iter()
        .filter(|c| !matches!(c.gate(), GateKind::Measure))
        .collect();
        final_state(&cmds, params.width())
    };
    assert!(phase_distance(&state(true), &state(false)) < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn optimizer_preserves_semantics(seed in any::<u64>(), k in 1u32..=6, len in 0usize..=48, window in 2usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circuit = random_circuit(&mut rng, k, len);
        let out = optimize(circuit.clone(), window);
        prop_assert!(out.len() <= circuit.len());
        let d = phase_distance(&final_state(&circuit, k as usize), &final_state(&out, k as usize));
        prop_assert!(d < 1e-8, "deviation {}", d);
    }

    #[test]
    fn optimizer_is_idempotent(seed in any::<u64>(), k in 1u32..=6, len in 0usize..=48) {
        let window = 64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circuit = random_circuit(&mut rng, k, len);
        prop_assume!(max_per_qubit(&circuit) <= window);
        let once = optimize(circuit, window);
        let twice = optimize(once.clone(), window);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn optimizer_buffers_at_most_window_per_qubit(seed in any::<u64>(), window in 2usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut stage = OptimizerStage::new(window);
        let mut out = Vec::new();
        for cmd in random_circuit(&mut rng, 4, 60) {
            stage.receive(vec![cmd], &mut out).unwrap();
            prop_assert!(stage.max_pending() <= window);
        }
    }
}
