use proptest::prelude::*;
use qyao::graph::VertexId;
use qyao::otm::{
    flag_guess_experiment, flag_length_for, prepare_otms, run_noninteractive, EpOutcomeLabel, FlagString, OneTimeMemory,
    OtmError, OtmPayload,
};
use qyao::pattern::{compile_circuit, Circuit, Gate};
use qyao::protocol::{
    ideal_output, run_qyao, Execution, HonestServer, PartyInput, ProtocolSetup, ServerBehaviour, ServerCtx,
};
use qyao::Angle;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(rows: u32, gates: Vec<Gate>, server_in: &[u32], server_out: &[u32]) -> (ProtocolSetup, Vec<num_complex::Complex64>) {
    let circuit = Circuit { rows, gates };
    (ProtocolSetup::new(compile_circuit(&circuit).unwrap(), server_in, server_out).unwrap(), circuit.unitary())
}

#[test]
fn flag_lengths() {
    assert_eq!(flag_length_for(1.0 / 3.0).unwrap(), 2);
    assert_eq!(flag_length_for((8.0f64 / 9.0).powi(20)).unwrap(), 4);
    assert_eq!(flag_length_for(1.0 - 1e-12).unwrap(), 1);
    assert!(matches!(flag_length_for(0.0), Err(OtmError::EpsilonRange(_))));
    assert!(flag_length_for(1.0).is_err());
}

#[test]
fn second_read_is_destroyed() {
    let cells = (0..4).map(|k| OtmPayload { delta: Some(Angle::from_eighths(k)), flag: FlagString::new(4, k as u64) }).collect();
    let otm = OneTimeMemory::new(VertexId(7), vec![VertexId(1), VertexId(2)], cells);
    assert!(matches!(otm.read(4), Err(OtmError::InvalidLabel { .. })));
    assert!(!otm.is_consumed());
    assert_eq!(otm.read(2).unwrap().delta, Some(Angle::from_eighths(2)));
    assert!(matches!(otm.read(2), Err(OtmError::Destroyed(_))));
    assert!(matches!(otm.read(0), Err(OtmError::Destroyed(_))));
}

#[test]
fn concurrent_reads_succeed_once() {
    let cells = vec![OtmPayload { delta: None, flag: FlagString::new(3, 5) }; 2];
    let otm = OneTimeMemory::new(VertexId(0), vec![VertexId(1)], cells);
    let ok = std::thread::scope(|s| {
        let otm = &otm;
        let hs: Vec<_> = (0..8).map(|k| s.spawn(move || otm.read(k % 2).is_ok())).collect();
        hs.into_iter().map(|h| h.join().unwrap()).filter(|x| *x).count()
    });
    assert_eq!(ok, 1);
}

#[test]
fn otm_cells_match_interactive_angles_on_path2() {
    let (s, _) = setup(1, vec![Gate::Identity], &[], &[]);
    for seed in 0..8 {
        let exec: Execution = Execution::new(&s, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table = prepare_otms(&exec.client, 4, &mut rng).unwrap();
        let secrets = &exec.client.secrets;
        for (v, (ep, cells)) in &table.cells {
            assert_eq!(cells.len(), 1 << ep.len());
            for (k, cell) in cells.iter().enumerate() {
                let label = EpOutcomeLabel::from_index(ep, k);
                assert_eq!(label.index(ep), Some(k));
                if let Some(delta) = cell.delta {
                    // interactive client with those outcomes recorded
                    let mut client = exec.client.clone();
                    for (j, b) in &label.bits {
                        client.record(*j, *b);
                    }
                    assert_eq!(delta, client.delta(*v).unwrap());
                }
                let honest = ep.iter().all(|j| !secrets.colouring.is_trap(s.dtg(), *j) || label.bits[j] == secrets.r(*j));
                assert_eq!(cell.flag == table.accept[v], honest);
            }
        }
        // first layer and tokens cover all measured vertices
        let measured = &s.order().measured;
        assert!(measured.iter().all(|v| table.direct.contains_key(v) ^ table.cells.contains_key(v)));
    }
}

fn check_equivalence(s: &ProtocolSetup, u: &[num_complex::Complex64], client: &PartyInput, server: &PartyInput, seeds: u64) {
    let ideal = ideal_output(u, s.rows(), client, server).unwrap();
    for seed in 0..seeds {
        let a = run_qyao(s, client, server, &mut HonestServer, seed).unwrap();
        let b = run_noninteractive(s, client, server, &mut HonestServer, seed, 4).unwrap();
        assert!(b.outcome.verdict.accepted, "{:?}", b.outcome.verdict);
        assert_eq!(a.rounds, b.outcome.rounds);
        assert!(b.outcome.fidelity(&ideal) >= 1.0 - 1e-9);
        assert!(a.final_state.trace_distance(&b.outcome.final_state) < 1e-9);
        b.outcome.transcript.validate(s.order()).unwrap();
    }
}

#[test]
fn noninteractive_matches_interactive_on_path2() {
    let (s, u) = setup(1, vec![Gate::Identity], &[0], &[0]);
    let server = PartyInput::product(vec![0], &[[0.6.into(), num_complex::Complex64::new(0.0, 0.8)]]).unwrap();
    check_equivalence(&s, &u, &PartyInput::none(), &server, 20);
}

#[test]
fn noninteractive_matches_interactive_on_cz() {
    let (s, u) = setup(2, vec![Gate::Cz { a: 0, b: 1 }], &[1], &[0]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let client = PartyInput::product(vec![0], &[[h.into(), h.into()]]).unwrap();
    let server = PartyInput::product(vec![1], &[[h.into(), (-h).into()]]).unwrap();
    check_equivalence(&s, &u, &client, &server, 5);
}

#[test]
fn token_count_is_non_first_layer_count() {
    let (s, _) = setup(1, vec![Gate::Identity], &[], &[]);
    let client = PartyInput::basis(vec![0], &[0]).unwrap();
    let out = run_noninteractive(&s, &client, &PartyInput::none(), &mut HonestServer, 3, 2).unwrap();
    let expected = s.order().measured.iter().chain(&s.order().outputs).filter(|v| !s.is_first_layer(**v)).count();
    let delivered = out.outcome.transcript.entries.iter().find_map(|e| match e.message {
        qyao::protocol::ProtocolMessage::OtmDelivery { count } => Some(count),
        _ => None,
    });
    assert_eq!(delivered, Some(expected));
    assert_eq!(out.flags.len(), expected);
}

/// Flips the label bit of the first trap it sees in any extended past.
struct BadOpening {
    done: bool,
}

impl ServerBehaviour for BadOpening {
    fn white_box(&self) -> bool {
        true
    }

    fn otm_label_bit(&mut self, ctx: &mut ServerCtx, _i: VertexId, j: VertexId, b: u8) -> u8 {
        let trap = ctx.secrets.unwrap().colouring.is_trap(ctx.setup.dtg(), j);
        if trap && !self.done {
            self.done = true;
            return b ^ 1;
        }
        b
    }
}

#[test]
fn inconsistent_trap_label_aborts() {
    let (s, _) = setup(1, vec![Gate::Identity], &[], &[]);
    let client = PartyInput::basis(vec![0], &[1]).unwrap();
    for seed in 0..10 {
        let mut adv = BadOpening { done: false };
        let out = run_noninteractive(&s, &client, &PartyInput::none(), &mut adv, seed, 4).unwrap();
        assert!(adv.done);
        assert!(!out.outcome.verdict.accepted);
        assert_eq!(out.outcome.verdict.failed_flags.len(), 1);
    }
}

#[test]
fn flag_guess_rate_at_m4() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 100_000;
    let rate = flag_guess_experiment(4, n, &mut rng);
    let p = 1.0 / 15.0;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    assert!((rate - p).abs() <= 5.0 * sigma, "rate {rate}");
    assert_eq!(flag_guess_experiment(1, 1000, &mut rng), 1.0);
}

proptest! {
    #[test]
    fn label_index_round_trips(n in 1usize..10, k in any::<usize>()) {
        let ep: Vec<VertexId> = (0..n as u32).map(|i| VertexId(3 * i + 1)).collect();
        let k = k % (1 << n);
        prop_assert_eq!(EpOutcomeLabel::from_index(&ep, k).index(&ep), Some(k));
    }

    #[test]
    fn reject_flags_differ(m in 1u32..12, bits in any::<u64>(), seed in any::<u64>()) {
        let accept = FlagString::new(m, bits);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let other = FlagString::random_other(m, &accept, &mut rng);
        prop_assert_ne!(&other, &accept);
        prop_assert_eq!(other.to_hex().len() as u32, m.div_ceil(4));
    }
}
