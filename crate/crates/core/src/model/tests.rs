use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::autodiff::{grad_check, GradCheckConfig, Tape, Var};
use crate::stgraph::{build_graph, GraphConfig, Point, Scene};
use crate::training::{mse_loss, NormStats};

const SMALL: ModelDims = ModelDims {
    edge_embed: 3,
    edge_hidden: 4,
    node_embed: 5,
    node_hidden: 6,
};

fn scene(tracks: Vec<Vec<Point>>) -> Scene {
    let n = tracks.len() as i64;
    Scene::from_dense(0.4, (0..n).collect(), tracks).unwrap()
}

fn random_tracks(seed: u64, n: usize, len: usize) -> Vec<Vec<Point>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut p = [rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8)];
            (0..len)
                .map(|_| {
                    p[0] += rng.random_range(-0.05..0.05);
                    p[1] += rng.random_range(-0.05..0.05);
                    p
                })
                .collect()
        })
        .collect()
}

fn edge(params: &ModelParams, kind: FactorKind) -> &EdgeRnn {
    match params.architecture() {
        Architecture::Structural { edges, .. } => edges.iter().find(|e| e.kind == kind).unwrap(),
        Architecture::Vanilla(_) => panic!("no edge RNNs"),
    }
}

fn node(params: &ModelParams) -> &NodeRnn {
    match params.architecture() {
        Architecture::Structural { node, .. } => node,
        Architecture::Vanilla(_) => panic!("no node RNN"),
    }
}

fn rows(tape: &Tape<'_>, v: Var) -> Vec<f64> {
    tape.value(v).data().to_vec()
}

#[test]
fn empty_instances_with_zero_state_give_zero_hidden() {
    let params = ModelParams::init(Variant::Mesrnn, ModelDims::default(), 3);
    for kind in FactorKind::ALL {
        let mut tape = Tape::new(params.store());
        let prev = LstmState::zeros(&mut tape, 1, 128);
        let next = edge(&params, kind)
            .step_instances(&mut tape, &[], prev, &mut Dropout::disabled())
            .unwrap();
        assert!(rows(&tape, next.h).iter().all(|&v| v == 0.0), "{kind}");
    }
}

#[test]
fn instances_are_summed_before_embedding() {
    let params = ModelParams::init(Variant::Mesrnn, SMALL, 4);
    let rnn = edge(&params, FactorKind::ST);
    let mut tape = Tape::new(params.store());
    let prev = LstmState::zeros(&mut tape, 1, SMALL.edge_hidden);
    let d = &mut Dropout::disabled();
    let two = rnn
        .step_instances(&mut tape, &[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]], prev, d)
        .unwrap();
    let one = rnn.step_instances(&mut tape, &[vec![1.0, 1.0, 0.0, 0.0]], prev, d).unwrap();
    assert_eq!(rows(&tape, two.h), rows(&tape, one.h));
    assert_eq!(rows(&tape, two.c), rows(&tape, one.c));

    let single = vec![0.3, -0.2, 0.1, 0.7];
    let a = rnn.step_instances(&mut tape, &[single.clone()], prev, d).unwrap();
    let x = tape.constant(Tensor::new(vec![1, 4], single).unwrap());
    let b = rnn.step(&mut tape, x, prev, d).unwrap();
    assert_eq!(rows(&tape, a.h), rows(&tape, b.h));
}

#[test]
fn edge_rnn_rejects_wrong_width() {
    let params = ModelParams::init(Variant::Mesrnn, SMALL, 4);
    let mut tape = Tape::new(params.store());
    let prev = LstmState::zeros(&mut tape, 1, SMALL.edge_hidden);
    let err = edge(&params, FactorKind::S)
        .step_instances(&mut tape, &[vec![1.0, 2.0, 3.0]], prev, &mut Dropout::disabled())
        .unwrap_err();
    assert!(matches!(err, ModelError::Dimension(_)), "{err}");
}

#[test]
fn zero_parameters_predict_no_motion() {
    for variant in Variant::ALL {
        let params = ModelParams::zeros(variant, ModelDims::default());
        let s = scene(random_tracks(1, 3, 6));
        let mut tape = Tape::new(params.store());
        let preds = teacher_forced(&mut tape, &params, &s, &mut Dropout::disabled()).unwrap();
        for (t, p) in preds.iter().enumerate() {
            let got = rows(&tape, *p);
            for ped in 0..3 {
                let pos = s.position(ped, t).unwrap();
                assert_eq!(&got[2 * ped..2 * ped + 2], &pos, "{variant} step {t}");
            }
        }
    }
}

#[test]
fn single_step_displacement_is_inside_the_unit_box() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..5 {
        let params = ModelParams::init(Variant::Mesrnn, ModelDims::default(), seed);
        let s = scene(random_tracks(seed + 100, 4, 6));
        let mut tape = Tape::new(params.store());
        let preds = teacher_forced(&mut tape, &params, &s, &mut Dropout::new(0.2, rng.random())).unwrap();
        for (t, p) in preds.iter().enumerate() {
            for (k, v) in rows(&tape, *p).iter().enumerate() {
                let d = v - s.position(k / 2, t).unwrap()[k % 2];
                assert!(d.abs() < 1.0, "displacement {d}");
            }
        }
    }
}

#[test]
fn node_rnn_checks_kind_order() {
    let params = ModelParams::init(Variant::Mesrnn, SMALL, 1);
    let mut tape = Tape::new(params.store());
    let pos = tape.constant(Tensor::zeros(&[1, 2]));
    let h = tape.constant(Tensor::zeros(&[1, SMALL.edge_hidden]));
    let prev = LstmState::zeros(&mut tape, 1, SMALL.node_hidden);
    let mut hiddens: Vec<(FactorKind, Var)> = FactorKind::ALL.iter().map(|&k| (k, h)).collect();
    hiddens.swap(2, 3);
    let err = node(&params)
        .step(&mut tape, pos, &hiddens, prev, &mut Dropout::disabled())
        .unwrap_err();
    assert!(matches!(err, ModelError::KindOrder { .. }), "{err}");
}

/// Plain-loop forward of the NodeRNN for one pedestrian.
fn node_step_by_hand(
    store: &crate::autodiff::ParamStore,
    position: Point,
    hiddens: &[Vec<f64>],
    h0: &[f64],
    c0: &[f64],
) -> (Vec<f64>, Vec<f64>, Point) {
    let t = |name: &str| store.get(store.id_of(name).unwrap());
    let affine = |w: &Tensor, b: Option<&Tensor>, x: &[f64]| -> Vec<f64> {
        let (rows, cols) = (w.shape()[0], w.shape()[1]);
        (0..rows)
            .map(|r| {
                let mut s = b.map_or(0.0, |b| b.data()[r]);
                for c in 0..cols {
                    s += w.data()[r * cols + c] * x[c];
                }
                s
            })
            .collect()
    };
    let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
    let embed: Vec<f64> = affine(t("node.encoder.weight"), Some(t("node.encoder.bias")), &position)
        .into_iter()
        .map(f64::tanh)
        .collect();
    let mut zeta = embed;
    for h in hiddens {
        zeta.extend_from_slice(h);
    }
    let a = affine(t("node.cell.w_ih"), Some(t("node.cell.bias")), &zeta);
    let b = affine(t("node.cell.w_hh"), None, h0);
    let hd = h0.len();
    let gate = |k: usize, j: usize| a[k * hd + j] + b[k * hd + j];
    let mut h = vec![0.0; hd];
    let mut c = vec![0.0; hd];
    for j in 0..hd {
        c[j] = sig(gate(1, j)) * c0[j] + sig(gate(0, j)) * gate(2, j).tanh();
        h[j] = sig(gate(3, j)) * c[j].tanh();
    }
    let d = affine(t("node.decoder.weight"), Some(t("node.decoder.bias")), &h);
    (h, c.clone(), [position[0] + d[0].tanh(), position[1] + d[1].tanh()])
}

#[test]
fn node_rnn_matches_hand_computation() {
    let params = ModelParams::init(Variant::Mesrnn, SMALL, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut vec_of = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let position = [0.3, -0.4];
    let hiddens: Vec<Vec<f64>> = (0..6).map(|_| vec_of(SMALL.edge_hidden)).collect();
    let (h0, c0) = (vec_of(SMALL.node_hidden), vec_of(SMALL.node_hidden));

    let mut tape = Tape::new(params.store());
    let pos = tape.constant(Tensor::new(vec![1, 2], position.to_vec()).unwrap());
    let hs: Vec<(FactorKind, Var)> = FactorKind::ALL
        .iter()
        .zip(&hiddens)
        .map(|(&k, h)| (k, tape.constant(Tensor::new(vec![1, h.len()], h.clone()).unwrap())))
        .collect();
    let prev = LstmState {
        h: tape.constant(Tensor::new(vec![1, h0.len()], h0.clone()).unwrap()),
        c: tape.constant(Tensor::new(vec![1, c0.len()], c0.clone()).unwrap()),
    };
    let (state, next) = node(&params)
        .step(&mut tape, pos, &hs, prev, &mut Dropout::disabled())
        .unwrap();
    let (h, c, p) = node_step_by_hand(params.store(), position, &hiddens, &h0, &c0);
    for (a, e) in rows(&tape, state.h).iter().zip(&h).chain(rows(&tape, state.c).iter().zip(&c)) {
        assert!((a - e).abs() < 1e-12);
    }
    for (a, e) in rows(&tape, next).iter().zip(&p) {
        assert!((a - e).abs() < 1e-12);
    }
}

#[test]
fn init_is_deterministic_in_the_seed() {
    let a = ModelParams::init(Variant::Mesrnn, SMALL, 5);
    let b = ModelParams::init(Variant::Mesrnn, SMALL, 5);
    let c = ModelParams::init(Variant::Mesrnn, SMALL, 6);
    assert_eq!(a, b);
    assert_ne!(a, c);
    for (_, name, t) in a.store().iter() {
        let shape = t.shape();
        if shape.len() == 2 {
            let limit = (6.0 / (shape[0] + shape[1]) as f64).sqrt();
            assert!(t.data().iter().all(|v| v.abs() <= limit), "{name}");
        } else if name.ends_with("cell.bias") {
            let h = shape[0] / 4;
            assert!(t.data()[h..2 * h].iter().all(|&v| v == 1.0));
            assert!(t.data()[..h].iter().chain(&t.data()[2 * h..]).all(|&v| v == 0.0));
        } else {
            assert!(t.data().iter().all(|&v| v == 0.0), "{name}");
        }
    }
}

fn lstm_count(input: usize, hidden: usize) -> usize {
    4 * hidden * (input + hidden) + 4 * hidden
}

fn linear_count(input: usize, output: usize) -> usize {
    output * input + output
}

#[test]
fn parameter_counts_match_closed_form() {
    let d = ModelDims::default();
    let edge2 = linear_count(2, 64) + lstm_count(64, 128);
    let edge4 = linear_count(4, 64) + lstm_count(64, 128);
    let node = |input| linear_count(2, 128) + lstm_count(input, 256) + linear_count(256, 2);
    let mesrnn = 2 * edge2 + 4 * edge4 + node(128 + 6 * 128);
    let srnn = 2 * edge2 + node(128 + 2 * 128);
    let vlstm = linear_count(2, 64) + lstm_count(64, 128) + linear_count(128, 2);
    assert_eq!((edge2, edge4), (99_008, 99_136));
    assert_eq!((mesrnn, srnn, vlstm), (1_776_130, 855_298, 99_266));
    assert_eq!(param_count(Variant::Mesrnn, &d), mesrnn);
    assert_eq!(param_count(Variant::Srnn, &d), srnn);
    assert_eq!(param_count(Variant::Vlstm, &d), vlstm);
    assert_eq!(ModelParams::init(Variant::Mesrnn, d, 0).param_count(), mesrnn);
    assert_eq!(d.node_input(Variant::Mesrnn), 896);
    assert_eq!(d.node_input(Variant::Srnn), 384);
}

#[test]
fn parameter_count_does_not_depend_on_crowd_size() {
    let params = ModelParams::init(Variant::Mesrnn, SMALL, 2);
    let before = params.param_count();
    for n in [1, 2, 10, 50] {
        let s = scene(random_tracks(n as u64, n, 4));
        let mut tape = Tape::new(params.store());
        let preds = teacher_forced(&mut tape, &params, &s, &mut Dropout::disabled()).unwrap();
        assert_eq!(tape.value(preds[0]).shape(), &[n, 2]);
        assert_eq!(params.param_count(), before);
    }
}

#[test]
fn lone_pedestrian_has_zero_spatial_aggregates() {
    let s = scene(random_tracks(2, 1, 5));
    let graph = build_graph(&s, 5, &GraphConfig::default()).unwrap();
    for t in 0..5 {
        for kind in [FactorKind::S, FactorKind::SS, FactorKind::ST, FactorKind::TS] {
            assert!(factor_features(&graph, t, kind).unwrap().data().iter().all(|&v| v == 0.0));
        }
    }
    assert!(factor_features(&graph, 3, FactorKind::TT).unwrap().data().iter().any(|&v| v != 0.0));
}

#[test]
fn permuting_pedestrians_permutes_predictions_bitwise() {
    let params = ModelParams::init(Variant::Mesrnn, ModelDims::default(), 9);
    let s = scene(random_tracks(9, 5, 6));
    let perm = [3, 0, 4, 1, 2];
    let p = s.select(&perm).unwrap();
    for unroll in [teacher_forced, teacher_forced_stepwise] {
        let mut ta = Tape::new(params.store());
        let a = unroll(&mut ta, &params, &s, &mut Dropout::disabled()).unwrap();
        let mut tb = Tape::new(params.store());
        let b = unroll(&mut tb, &params, &p, &mut Dropout::disabled()).unwrap();
        for (va, vb) in a.iter().zip(&b) {
            let (ra, rb) = (rows(&ta, *va), rows(&tb, *vb));
            for (new, &old) in perm.iter().enumerate() {
                assert_eq!(ra[2 * old].to_bits(), rb[2 * new].to_bits());
                assert_eq!(ra[2 * old + 1].to_bits(), rb[2 * new + 1].to_bits());
            }
        }
    }
}

#[test]
fn batched_and_stepwise_unrolls_agree() {
    for variant in Variant::ALL {
        let params = ModelParams::init(variant, ModelDims::default(), 10);
        let s = scene(random_tracks(10, 3, 7));
        let mut ta = Tape::new(params.store());
        let a = teacher_forced(&mut ta, &params, &s, &mut Dropout::disabled()).unwrap();
        let mut tb = Tape::new(params.store());
        let b = teacher_forced_stepwise(&mut tb, &params, &s, &mut Dropout::disabled()).unwrap();
        assert_eq!(a.len(), b.len());
        for (va, vb) in a.iter().zip(&b) {
            for (x, y) in rows(&ta, *va).iter().zip(rows(&tb, *vb)) {
                assert!((x - y).abs() < 1e-12, "{variant}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn coincident_pedestrians_share_predictions() {
    let params = ModelParams::init(Variant::Mesrnn, ModelDims::default(), 11);
    let mut tracks = random_tracks(11, 2, 6);
    tracks.insert(1, tracks[0].clone());
    let s = scene(tracks);
    let mut tape = Tape::new(params.store());
    let preds = teacher_forced(&mut tape, &params, &s, &mut Dropout::disabled()).unwrap();
    for p in preds {
        let r = rows(&tape, p);
        assert_eq!(r[0..2], r[2..4]);
        assert_ne!(r[0..2], r[4..6]);
    }
}

#[test]
fn vanilla_ignores_neighbours() {
    let params = ModelParams::init(Variant::Vlstm, ModelDims::default(), 12);
    let s = scene(random_tracks(12, 3, 6));
    let alone = s.select(&[1]).unwrap();
    let mut ta = Tape::new(params.store());
    let a = teacher_forced(&mut ta, &params, &s, &mut Dropout::disabled()).unwrap();
    let mut tb = Tape::new(params.store());
    let b = teacher_forced(&mut tb, &params, &alone, &mut Dropout::disabled()).unwrap();
    for (va, vb) in a.iter().zip(&b) {
        let (ra, rb) = (rows(&ta, *va), rows(&tb, *vb));
        assert_eq!(ra[2].to_bits(), rb[0].to_bits());
        assert_eq!(ra[3].to_bits(), rb[1].to_bits());
    }
}

fn dense_check() -> GradCheckConfig {
    GradCheckConfig::default()
}

#[test]
fn each_edge_rnn_passes_gradient_check() {
    let mut params = ModelParams::init(Variant::Mesrnn, SMALL, 13);
    let shadow = params.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for kind in FactorKind::ALL {
        let inputs: Vec<Vec<Vec<f64>>> = (0..3)
            .map(|_| {
                (0..rng.random_range(0..4))
                    .map(|_| (0..kind.input_dim()).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect()
            })
            .collect();
        let rnn = edge(&shadow, kind).clone();
        let report = grad_check(
            params.store_mut(),
            |tape| -> Result<Var, ModelError> {
                let mut state = LstmState::zeros(tape, 1, SMALL.edge_hidden);
                let mut hs = Vec::new();
                for step in &inputs {
                    state = rnn.step_instances(tape, step, state, &mut Dropout::disabled())?;
                    hs.push(state.h);
                }
                let all = tape.concat(&hs)?;
                let target = tape.constant(Tensor::filled(&[1, 3 * SMALL.edge_hidden], 0.3));
                Ok(tape.mse(all, target)?)
            },
            &dense_check(),
        )
        .unwrap();
        let own: Vec<_> = report
            .tensors
            .iter()
            .filter(|t| t.name.starts_with(&format!("edge.{kind}.")))
            .collect();
        assert_eq!(own.len(), 5);
        assert!(report.passed(), "{kind}: {report:?}");
        assert!(own.iter().all(|t| t.max_abs_error < 1e-6));
    }
}

fn model_loss<'a>(shadow: &'a ModelParams, s: &Scene) -> impl Fn(&mut Tape<'_>) -> Result<Var, ModelError> + 'a {
    let s = s.clone();
    move |tape| {
        let preds = teacher_forced(tape, shadow, &s, &mut Dropout::disabled())?;
        mse_loss(tape, &preds, &s, 1..s.len()).map_err(|e| ModelError::Dimension(e.to_string()))
    }
}

#[test]
fn node_rnn_passes_gradient_check() {
    let mut params = ModelParams::init(Variant::Mesrnn, SMALL, 14);
    let shadow = params.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let hiddens: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..SMALL.edge_hidden).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let report = grad_check(
        params.store_mut(),
        |tape| -> Result<Var, ModelError> {
            let node = node(&shadow);
            let mut state = LstmState::zeros(tape, 2, SMALL.node_hidden);
            let mut pos = tape.constant(Tensor::new(vec![2, 2], vec![0.1, 0.2, -0.3, 0.4])?);
            let mut outs = Vec::new();
            for _ in 0..3 {
                let hs: Vec<(FactorKind, Var)> = FactorKind::ALL
                    .iter()
                    .zip(&hiddens)
                    .map(|(&k, h)| {
                        let both = [h.clone(), h.iter().map(|v| -v).collect()].concat();
                        (k, tape.constant(Tensor::new(vec![2, h.len()], both).unwrap()))
                    })
                    .collect();
                let (s, next) = node.step(tape, pos, &hs, state, &mut Dropout::disabled())?;
                state = s;
                pos = next;
                outs.push(next);
            }
            let all = tape.concat(&outs)?;
            let target = tape.constant(Tensor::filled(&[2, 6], 0.2));
            Ok(tape.mse(all, target)?)
        },
        &dense_check(),
    )
    .unwrap();
    assert!(report.passed(), "{report:?}");
    assert!(report.tensors.iter().any(|t| t.name == "node.cell.w_ih" && t.checked == 4 * 6 * 29));
}

#[test]
fn vanilla_lstm_passes_gradient_check_over_four_steps() {
    let mut params = ModelParams::init(Variant::Vlstm, SMALL, 15);
    let shadow = params.clone();
    let s = scene(random_tracks(15, 2, 5));
    let report = grad_check(params.store_mut(), model_loss(&shadow, &s), &dense_check()).unwrap();
    assert!(report.passed(), "{report:?}");
}

#[test]
fn small_models_pass_gradient_check() {
    for variant in [Variant::Mesrnn, Variant::Srnn] {
        let mut params = ModelParams::init(variant, SMALL, 16);
        let shadow = params.clone();
        let s = scene(random_tracks(16, 3, 5));
        let report = grad_check(params.store_mut(), model_loss(&shadow, &s), &dense_check()).unwrap();
        assert!(report.passed(), "{variant}: {report:?}");
    }
}

#[test]
fn full_size_mesrnn_passes_sampled_gradient_check() {
    let mut params = ModelParams::init(Variant::Mesrnn, ModelDims::default(), 17);
    let shadow = params.clone();
    let s = scene(random_tracks(17, 2, 5));
    let cfg = GradCheckConfig {
        samples_per_tensor: Some(6),
        seed: 17,
        ..GradCheckConfig::default()
    };
    let report = grad_check(params.store_mut(), model_loss(&shadow, &s), &cfg).unwrap();
    assert_eq!(report.tensors.len(), 37);
    assert!(report.passed(), "{report:?}");
    assert_eq!(params, shadow);
}

fn checkpoint(variant: Variant, seed: u64) -> Checkpoint {
    Checkpoint {
        params: ModelParams::init(variant, SMALL, seed),
        norm: NormStats::new([-3.5, 0.25], [12.0, 7.0]).unwrap(),
        meta: CheckpointMeta {
            dropout: 0.2,
            seed,
            frame_interval: 0.4,
            obs: 8,
            pred: 12,
        },
    }
}

#[test]
fn checkpoint_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for variant in Variant::ALL {
        let ck = checkpoint(variant, 21);
        let a = dir.path().join("a.ckpt");
        let b = dir.path().join("b.ckpt");
        save_checkpoint(&ck, &a).unwrap();
        let loaded = load_checkpoint(&a).unwrap();
        assert_eq!(loaded, ck);
        save_checkpoint(&loaded, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
    let text = checkpoint(Variant::Vlstm, 1).to_text();
    assert!(text.starts_with("MESRNN-CKPT v1\nvariant=vlstm edge_embed=3 "));
    assert!(text.contains("\ntensor vlstm.cell.w_ih 16 3\n"));
    assert!(text.ends_with("\nend\n"));
}

#[test]
fn checkpoint_load_errors_name_the_tensor() {
    let text = checkpoint(Variant::Srnn, 2).to_text();

    let short = text.replacen("tensor edge.T.cell.w_hh 16 4", "tensor edge.T.cell.w_hh 16 5", 1);
    let err = Checkpoint::from_text(&short).unwrap_err();
    assert!(err.to_string().contains("edge.T.cell.w_hh"), "{err}");

    let long = text.replacen("tensor edge.T.cell.w_hh 16 4", "tensor edge.T.cell.w_hh 16 3", 1);
    let err = Checkpoint::from_text(&long).unwrap_err();
    assert!(err.to_string().contains("edge.T.cell.w_hh"), "{err}");

    let lines: Vec<&str> = text.lines().collect();
    let cut = lines[..lines.len() - 2].join("\n");
    let err = Checkpoint::from_text(&cut).unwrap_err();
    assert!(err.to_string().contains("node.decoder.bias"), "{err}");

    let err = Checkpoint::from_text(&text.replacen("v1", "v2", 1)).unwrap_err();
    assert!(err.to_string().contains("header"), "{err}");
}

#[test]
fn checkpoint_variant_guard() {
    let ck = Checkpoint::from_text(&checkpoint(Variant::Srnn, 3).to_text()).unwrap();
    let err = ck.expect_variant(Variant::Mesrnn).unwrap_err();
    assert_eq!(
        err,
        ModelError::VariantMismatch {
            expected: Variant::Mesrnn,
            found: Variant::Srnn
        }
    );
    let relabelled = checkpoint(Variant::Srnn, 3).to_text().replacen("variant=srnn", "variant=mesrnn", 1);
    assert!(Checkpoint::from_text(&relabelled).is_err());
}
