use std::f64::consts::FRAC_1_SQRT_2;

use mqc::compiler::{
    compile, compile_with, prepare_zero_and_plus, readout, simulate, verify_equivalence, CircuitGate, CompileOptions,
    GateCircuit, Instr, Machine, Mode, PrepSchedule, Purpose, SetId, UniversalSet,
};
use mqc::observable::{Axis, Observable};
use mqc::outcome::{Forced, Sampler};
use mqc::statevector::{equal_up_to_global_phase, StateVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn s3() -> UniversalSet {
    UniversalSet::new(SetId::S3, None).unwrap()
}

fn plus() -> StateVector {
    StateVector::from_amplitudes(vec![C64::new(FRAC_1_SQRT_2, 0.0); 2]).unwrap()
}

#[test]
fn hadamard_program_is_prep_then_one_rotated_bell_measurement() {
    let c: GateCircuit = "H 0".parse().unwrap();
    let p = compile(&c, &s3(), Mode::Frame).unwrap();
    let m = p.measurements();
    let names: Vec<(String, Purpose)> = m.iter().map(|(o, _, purpose)| (o.to_string(), *purpose)).collect();
    assert_eq!(
        names,
        [
            ("XX".to_string(), Purpose::AncillaPrep),
            ("ZZ".to_string(), Purpose::AncillaPrep),
            ("ZX".to_string(), Purpose::Teleport),
            ("XZ".to_string(), Purpose::Teleport),
        ]
    );
    assert!(m.iter().all(|(_, t, _)| t.len() == 2));
    let out = simulate(&p, &StateVector::basis(1, "0").unwrap(), &mut Sampler::seeded(0)).unwrap();
    assert!(equal_up_to_global_phase(&out.state, &plus(), 1e-10).unwrap());
}

#[test]
fn cnot_program_has_factory_schedule_and_two_bell_measurements() {
    let c: GateCircuit = "CNOT 0 1".parse().unwrap();
    let p = compile(&c, &s3(), Mode::Frame).unwrap();
    let names: Vec<String> = p.measurements().iter().map(|(o, _, _)| o.to_string()).collect();
    assert_eq!(names, ["X", "Z", "XX", "ZZ", "XX", "ZZ", "XX", "ZZ", "XX", "ZZ"]);
    let purposes: Vec<Purpose> = p.measurements().iter().map(|m| m.2).collect();
    assert!(purposes[..6].iter().all(|&x| x == Purpose::AncillaPrep));
    assert!(purposes[6..].iter().all(|&x| x == Purpose::Teleport));
    for seed in 0..20 {
        let out = simulate(&p, &StateVector::basis(2, "10").unwrap(), &mut Sampler::seeded(seed)).unwrap();
        assert!(equal_up_to_global_phase(&out.state, &StateVector::basis(2, "11").unwrap(), 1e-10).unwrap());
    }
}

#[test]
fn empty_circuit_compiles_to_nothing_and_verifies() {
    let c = GateCircuit::empty(2);
    let p = compile(&c, &s3(), Mode::Frame).unwrap();
    assert_eq!(p.static_measurement_count(), 0);
    assert_eq!(p.gadgets, 0);
    assert!(verify_equivalence(&c, &p, 5, 0).unwrap().passed());
}

#[test]
fn random_three_qubit_circuit_over_a_hundred_seeds() {
    let pool = [CircuitGate::H(0), CircuitGate::P(0), CircuitGate::Cnot(0, 1), CircuitGate::Rz(0, std::f64::consts::FRAC_PI_4)];
    let c = GateCircuit::random(3, 5, &pool, &mut ChaCha8Rng::seed_from_u64(42));
    let p = compile(&c, &s3(), Mode::Frame).unwrap();
    let r = verify_equivalence(&c, &p, 100, 7).unwrap();
    assert!(r.passed(), "{r:?}");
    assert!(r.min_fidelity > 1.0 - 1e-9);
}

#[test]
fn verify_mixed_gate_list_and_negative_control() {
    let c: GateCircuit = "H 0\nP 1\nCNOT 0 1\nRZ 1 pi/4".parse().unwrap();
    let mut p = compile(&c, &s3(), Mode::Frame).unwrap();
    assert!(verify_equivalence(&c, &p, 25, 3).unwrap().passed());
    p.inject_fault();
    let bad = verify_equivalence(&c, &p, 25, 3).unwrap();
    assert!(!bad.passed());
    assert!(!bad.failures.is_empty());
}

#[test]
fn sets_compile_their_own_rotations() {
    let cases = [
        (SetId::S1, 0.4, "RX 0 0.4\nRX 1 -0.8\nCNOT 0 1\nRZ 0 pi/2"),
        (SetId::S2, 0.4, "RZ 0 -0.4\nRZ 1 0.4\nCNOT 1 0\nP 0"),
        (SetId::S0, 0.9, "RZ 0 0.9\nRX 1 1.8\nCNOT 0 1"),
    ];
    for (id, theta, text) in cases {
        let c: GateCircuit = text.parse().unwrap();
        let set = UniversalSet::new(id, Some(theta)).unwrap();
        for mode in [Mode::Frame, Mode::Literal] {
            let p = compile(&c, &set, mode).unwrap();
            assert!(p.foreign_observables().is_empty());
            assert!(verify_equivalence(&c, &p, 15, 11).unwrap().passed(), "{id} {mode:?}");
        }
    }
}

#[test]
fn default_prep_plus_one_branch() {
    let instrs = prepare_zero_and_plus(&PrepSchedule::Default { zeros: vec![0], pluses: vec![] }, 0);
    let psi = StateVector::random(1, &mut ChaCha8Rng::seed_from_u64(2));
    let mut m = Machine::new(psi);
    m.run(&instrs, &mut Forced::new([0])).unwrap();
    assert!(equal_up_to_global_phase(m.state(), &StateVector::basis(1, "0").unwrap(), 1e-12).unwrap());
    assert!(m.frame().is_identity());
}

#[test]
fn parity_fragment_on_eigenstate_and_random_input() {
    let instrs = prepare_zero_and_plus(&PrepSchedule::Parity([0, 1, 2]), 0);
    let zero = StateVector::zero(3).unwrap();
    let mut m = Machine::new(zero.clone());
    m.run(&instrs, &mut Sampler::seeded(0)).unwrap();
    assert_eq!((0..3).map(|s| m.slot(s)).collect::<Vec<_>>(), [Some(1), Some(1), Some(1)]);
    assert!(equal_up_to_global_phase(m.state(), &zero, 1e-12).unwrap());

    let psi = StateVector::random(3, &mut ChaCha8Rng::seed_from_u64(9));
    let mut m = Machine::new(psi);
    m.run(&instrs, &mut Forced::new([0, 0, 0])).unwrap();
    // projector onto span{|000⟩, |111⟩}
    let a = m.state().amplitudes();
    let kept = a[0].norm_sqr() + a[7].norm_sqr();
    assert!((kept - 1.0).abs() < 1e-12);
    assert!(a[0].norm() > 1e-3 && a[7].norm() > 1e-3);
}

fn read_bit(data: &StateVector, seed: u64) -> u8 {
    let instrs = readout(0, 0, 1, 0);
    let mut m = Machine::new(data.tensor(&StateVector::random(1, &mut ChaCha8Rng::seed_from_u64(seed ^ 0xabc))).unwrap());
    m.run(&instrs, &mut Sampler::seeded(seed)).unwrap();
    m.bits()[0].unwrap()
}

#[test]
fn readout_of_basis_states_and_plus() {
    for seed in 0..50 {
        assert_eq!(read_bit(&StateVector::basis(1, "0").unwrap(), seed), 0);
        assert_eq!(read_bit(&StateVector::basis(1, "1").unwrap(), seed), 1);
    }
    let ones: usize = (0..10_000).map(|s| read_bit(&plus(), s) as usize).sum();
    let frac = ones as f64 / 10_000.0;
    assert!((frac - 0.5).abs() < 0.02, "{frac}");
}

#[test]
fn readout_fragment_uses_only_z_and_zz() {
    for i in readout(0, 3, 5, 10) {
        if let Instr::Measure { observable, .. } = i {
            assert!(
                observable == Observable::single(Axis::Z) || observable == Observable::pair(Axis::Z, Axis::Z),
                "{observable}"
            );
        }
    }
}

#[test]
fn readout_after_compiled_circuit() {
    let c: GateCircuit = "QUBITS 2\nH 0\nH 0\nCNOT 0 1".parse().unwrap();
    let p = compile_with(&c, &s3(), CompileOptions { mode: Mode::Frame, readout: true }).unwrap();
    for seed in 0..10 {
        let out = simulate(&p, &StateVector::basis(2, "10").unwrap(), &mut Sampler::seeded(seed)).unwrap();
        assert_eq!(out.bits, [Some(1), Some(1)]);
    }
}
