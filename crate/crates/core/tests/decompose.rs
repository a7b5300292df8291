mod common;

use std::f64::consts::PI;

use itertools::Itertools;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use common::{diag_phase, permutation, q, qs};
use qcflow::backends::{circuit_unitary, CommandCollector};
use qcflow::decompose::{rule_control_composite, DecomposeStage, GateSet, Registry, PHI_ADD};
use qcflow::gate::Composite;
use qcflow::linalg::Matrix;
use qcflow::optimize::OptimizerStage;
use qcflow::qmath::mul_by_const_mod_n;
use qcflow::{Command, GateClass, GateKind, Pipeline};

fn lower(cmd: Command) -> Vec<Command> {
    let mut out = Vec::new();
    Registry::default().lower(cmd, GateSet::Target, &mut out).unwrap();
    out
}

fn lowered_unitary(cmd: Command, width: usize) -> Matrix {
    circuit_unitary(&lower(cmd), width).unwrap()
}

#[test]
fn toffoli_through_pipeline_gives_fifteen_commands() {
    let mut eng = Pipeline::new(CommandCollector::default()).with_stage(DecomposeStage::new(GateSet::Target));
    let r = eng.allocate_qureg(3);
    eng.send(vec![Command::toffoli(r[0], r[1], r[2])]).unwrap();
    eng.flush().unwrap();
    let gates: Vec<Command> = eng
        .into_backend()
        .into_commands()
        .into_iter()
        .filter(|c| !c.gate().is_bookkeeping())
        .collect();
    assert_eq!(gates.len(), 15);
    let count = |class| gates.iter().filter(|c| c.classify() == class).count();
    assert_eq!(count(GateClass::TClass), 7);
    assert_eq!(count(GateClass::Cnot), 6);
    let hadamards = gates.iter().filter(|c| c.gate() == &GateKind::H).count();
    assert_eq!(hadamards, 2);
    let want = permutation(3, |i| if i & 3 == 3 { i ^ 4 } else { i });
    assert!(circuit_unitary(&gates, 3).unwrap().approx_eq(&want, 1e-10));
}

#[test]
fn swap_is_three_cnots() {
    let out = lower(Command::swap(q(0), q(1)));
    assert_eq!(out.len(), 3);
    assert!(out.iter().all(|c| c.classify() == GateClass::Cnot));
}

#[test]
fn controlled_phase_special_angles() {
    let cz = lowered_unitary(Command::controlled(GateKind::Phase(PI), vec![q(0)], q(1)), 2);
    assert!(cz.approx_eq(&diag_phase(2, &[0, 1], PI), 1e-10));
    let cs = lowered_unitary(Command::controlled(GateKind::Phase(PI / 2.0), vec![q(0)], q(1)), 2);
    assert!(cs.approx_eq(&diag_phase(2, &[0, 1], PI / 2.0), 1e-12));
}

#[test]
fn zero_angle_controlled_phase_optimizes_away() {
    let mut eng = Pipeline::new(CommandCollector::default())
        .with_stage(DecomposeStage::new(GateSet::Target))
        .with_stage(OptimizerStage::new(20));
    let r = eng.allocate_qureg(2);
    eng.send(vec![Command::controlled(GateKind::Phase(0.0), vec![r[0]], r[1])])
        .unwrap();
    eng.flush().unwrap();
    assert!(eng.backend().commands().iter().all(|c| c.gate().is_bookkeeping()));
}

#[test]
fn cc_phase_special_angles_and_symmetry() {
    let ccz = lowered_unitary(Command::controlled(GateKind::Phase(PI), vec![q(0), q(1)], q(2)), 3);
    assert!(ccz.approx_eq(&diag_phase(3, &[0, 1, 2], PI), 1e-10));
    let id = lowered_unitary(Command::controlled(GateKind::Phase(0.0), vec![q(0), q(1)], q(2)), 3);
    assert!(id.approx_eq(&Matrix::identity(8), 1e-10));
    let theta = 0.83;
    for p in (0..3u32).permutations(3) {
        let u = lowered_unitary(
            Command::controlled(GateKind::Phase(theta), vec![q(p[0]), q(p[1])], q(p[2])),
            3,
        );
        assert!(u.approx_eq(&diag_phase(3, &[0, 1, 2], theta), 1e-10), "{p:?}");
    }
}

#[test]
fn controlled_x_stays_a_cnot() {
    assert_eq!(lower(Command::cnot(q(0), q(1))), vec![Command::cnot(q(0), q(1))]);
}

#[test]
fn controlled_hadamard_matrix() {
    let h = 1.0 / 2f64.sqrt();
    let want = Matrix::from_fn(4, |r, c| {
        let v = match (r, c) {
            (0, 0) | (2, 2) => 1.0,
            (1, 1) | (1, 3) | (3, 1) => h,
            (3, 3) => -h,
            _ => 0.0,
        };
        C64::new(v, 0.0)
    });
    let got = lowered_unitary(Command::controlled(GateKind::H, vec![q(0)], q(1)), 2);
    assert!(got.approx_eq(&want, 1e-10));
}

#[test]
fn controlled_rz_is_controlled_phase_with_control_correction() {
    let theta = 1.234;
    let rz = lowered_unitary(Command::controlled(GateKind::Rz(theta), vec![q(0)], q(1)), 2);
    let cp = circuit_unitary(
        &[
            Command::controlled(GateKind::Phase(theta), vec![q(0)], q(1)),
            Command::single(GateKind::Phase(-theta / 2.0), q(0)),
        ],
        2,
    )
    .unwrap();
    assert!(rz.approx_eq(&cp, 1e-10));
}

#[test]
fn controlled_qft_controls_every_internal_command() {
    let cmd = Command::qft(vec![q(0), q(1)]).with_controls(&[q(2)]);
    let body = Registry::default().expand(&cmd).unwrap();
    assert!(!body.is_empty());
    assert!(body.iter().all(|c| c.controls().contains(&q(2))));
}

#[test]
fn controlled_phi_add_is_projector_sum() {
    let add = Command::composite(Composite::new(PHI_ADD, vec![5]), qs(3));
    let u = circuit_unitary(&lower(add.clone()), 3).unwrap();
    let controlled = add.with_controls(&[q(3)]);
    let expanded = rule_control_composite(&controlled).unwrap();
    assert!(expanded.iter().all(|c| c.controls().contains(&q(3))));
    let got = circuit_unitary(&lower(controlled), 4).unwrap();
    // control is bit 3: block diagonal I ⊕ U
    let want = Matrix::from_fn(16, |r, c| match (r >> 3, c >> 3) {
        (0, 0) => C64::new(f64::from(u8::from(r == c)), 0.0),
        (1, 1) => u.get(r & 7, c & 7),
        _ => C64::new(0.0, 0.0),
    });
    assert!(got.approx_eq(&want, 1e-10));
}

#[test]
fn target_lowering_never_leaves_unclassified_commands() {
    for modulus in [15u64, 21, 33, 221] {
        let mut eng = Pipeline::new(CommandCollector::default()).with_stage(DecomposeStage::new(GateSet::Target));
        let n = 64 - modulus.leading_zeros() as usize;
        let x = eng.allocate_qureg(n);
        let ctrl = eng.allocate().unwrap();
        mul_by_const_mod_n(&mut eng, 2, modulus, &x, Some(ctrl)).unwrap();
        eng.flush().unwrap();
        let cmds = eng.into_backend().into_commands();
        assert!(cmds.iter().all(|c| c.classify() != GateClass::Other), "N={modulus}");
    }
}

fn single_qubit_gate() -> impl Strategy<Value = GateKind> {
    let angle = -7.0..7.0f64;
    prop_oneof![
        Just(GateKind::X),
        Just(GateKind::Y),
        Just(GateKind::Z),
        Just(GateKind::H),
        Just(GateKind::S),
        Just(GateKind::Sdg),
        Just(GateKind::T),
        Just(GateKind::Tdg),
        angle.clone().prop_map(GateKind::Rx),
        angle.clone().prop_map(GateKind::Ry),
        angle.clone().prop_map(GateKind::Rz),
        angle.prop_map(GateKind::Phase),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn controlled_gates_lower_to_their_unitary(
        gate in single_qubit_gate(),
        controls in 1usize..=3,
        target in 0u32..4,
    ) {
        let width = controls + 1;
        let target = target % width as u32;
        let ctrl: Vec<_> = (0..width as u32).filter(|&i| i != target).map(q).collect();
        let cmd = Command::controlled(gate, ctrl, q(target));
        let direct = circuit_unitary(std::slice::from_ref(&cmd), width).unwrap();
        let lowered = lowered_unitary(cmd, width);
        prop_assert!(lowered.approx_eq(&direct, 1e-9), "{}", lowered.max_abs_diff(&direct));
    }

    #[test]
    fn composites_lower_to_their_unitary(c in -20i64..20, width in 1u32..=4, controlled in any::<bool>()) {
        let mut cmd = Command::composite(Composite::new(PHI_ADD, vec![c]), qs(width));
        let mut w = width as usize;
        if controlled {
            cmd = cmd.with_controls(&[q(width)]);
            w += 1;
        }
        let direct = circuit_unitary(std::slice::from_ref(&cmd), w).unwrap();
        prop_assert!(lowered_unitary(cmd, w).approx_eq(&direct, 1e-9));
    }
}
