//! Self-checks run by `mesrnn verify`: finite-difference gradient checks of
//! every tape primitive and model component, and meta-path extraction
//! against brute-force walk enumeration.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{grad_check, AutodiffError, GradCheckConfig, ParamStore, Tape, Tensor, Var};
use crate::model::{
    teacher_forced, Architecture, Dropout, FactorKind, LstmState, ModelDims, ModelError, ModelParams, Variant,
};
use crate::stgraph::{
    build_graph, enumerate_walks_oracle, metapaths, random_scene, GraphConfig, MetaPathKind, Point, Scene,
};
use crate::training::mse_loss;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub suite: &'static str,
    pub name: String,
    /// Gradient entries or (anchor, step) pairs compared.
    pub checked: usize,
    /// Largest relative gradient error, or the number of mismatches.
    pub error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<CheckRow>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn table(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
        let mut out = format!("{:<9} {:<width$} {:>8} {:>11}  result\n", "suite", "name", "checked", "error");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<9} {:<width$} {:>8} {:>11.3e}  {}",
                r.suite,
                r.name,
                r.checked,
                r.error,
                if r.passed { "ok" } else { "FAIL" }
            );
        }
        out
    }
}

pub fn verify(tol: f64, seed: u64) -> VerifyReport {
    let mut rows = gradient_suite(tol, seed);
    rows.extend(oracle_suite(seed, 100));
    VerifyReport { rows }
}

fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).expect("shape matches")
}

fn row<E: std::fmt::Display>(
    name: impl Into<String>,
    result: Result<crate::autodiff::GradCheckReport, E>,
) -> CheckRow {
    let name = name.into();
    match result {
        Ok(r) => CheckRow {
            suite: "gradient",
            checked: r.tensors.iter().map(|t| t.checked).sum(),
            error: r.max_rel_error(),
            passed: r.passed(),
            name,
        },
        Err(e) => CheckRow {
            suite: "gradient",
            name: format!("{name} ({e})"),
            checked: 0,
            error: f64::INFINITY,
            passed: false,
        },
    }
}

type PrimitiveCase = (&'static str, fn(&mut Tape<'_>, &[Var]) -> Result<Var, AutodiffError>);

const PRIMITIVES: [PrimitiveCase; 14] = [
    ("linear", |t, v| t.linear(v[1], v[4], v[0])),
    ("matmul", |t, v| t.matmul(v[1], v[4])),
    ("add", |t, v| t.add(v[1], v[2])),
    ("sub", |t, v| t.sub(v[1], v[2])),
    ("hadamard", |t, v| t.hadamard(v[1], v[2])),
    ("concat", |t, v| t.concat(&[v[1], v[3], v[2]])),
    ("sum_list", |t, v| t.sum_list(&[v[1], v[2], v[1]])),
    ("slice", |t, v| t.slice(v[3], 1, 3)),
    ("stack_rows", |t, v| t.stack_rows(&[v[1], v[2]])),
    ("rows", |t, v| t.rows(v[3], 1, 2)),
    ("tanh", |t, v| t.tanh(v[1])),
    ("sigmoid", |t, v| t.sigmoid(v[1])),
    ("scale", |t, v| t.scale(v[1], -1.7)),
    ("dropout", |t, v| t.dropout(v[3], vec![0.0, 2.0, 2.0, 0.0, 2.0, 2.0, 2.0, 0.0, 2.0, 0.0, 2.0, 2.0, 2.0, 2.0, 0.0])),
];

/// Central differences against the tape for each primitive, each recurrent
/// component, and the models unrolled over 4 steps with 2 pedestrians. At
/// the default sizes a few entries per tensor are sampled.
pub fn gradient_suite(tol: f64, seed: u64) -> Vec<CheckRow> {
    let cfg = GradCheckConfig {
        tol,
        seed,
        ..GradCheckConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();

    let mut store = ParamStore::new();
    store.add("bias", random_tensor(&mut rng, &[2]));
    for (name, shape) in [("a", [3, 4]), ("b", [3, 4]), ("c", [3, 5]), ("w", [2, 4])] {
        store.add(name, random_tensor(&mut rng, &shape));
    }
    for (name, op) in PRIMITIVES {
        let ids: Vec<_> = store.ids().collect();
        let result = grad_check(
            &mut store,
            |tape| -> Result<Var, AutodiffError> {
                let v: Vec<Var> = ids.iter().map(|&id| tape.param(id)).collect();
                let out = op(tape, &v)?;
                // Squash and compare with a fixed target so every entry of
                // the output gets a distinct weight.
                let squashed = tape.tanh(out)?;
                let shape = tape.value(squashed).shape().to_vec();
                let n: usize = shape.iter().product();
                let target = Tensor::new(shape, (0..n).map(|k| 0.1 * k as f64 - 0.3).collect())?;
                let target = tape.constant(target);
                tape.mse(squashed, target)
            },
            &cfg,
        );
        rows.push(row(format!("primitive {name}"), result));
    }
    // mse on its own, against a parameter target.
    let (a, b) = (store.id_of("a").expect("a"), store.id_of("b").expect("b"));
    let result = grad_check(
        &mut store,
        |tape| -> Result<Var, AutodiffError> {
            let (x, y) = (tape.param(a), tape.param(b));
            tape.mse(x, y)
        },
        &cfg,
    );
    rows.push(row("primitive mse", result));

    let small = ModelDims {
        edge_embed: 3,
        edge_hidden: 4,
        node_embed: 5,
        node_hidden: 6,
    };
    let mut params = ModelParams::init(Variant::Mesrnn, small, seed);
    let shadow = params.clone();
    if let Architecture::Structural { edges, node } = shadow.architecture() {
        for rnn in edges {
            let inputs: Vec<Vec<Vec<f64>>> = (0..4)
                .map(|_| {
                    (0..rng.random_range(1..4))
                        .map(|_| (0..rnn.kind.input_dim()).map(|_| rng.random_range(-1.0..1.0)).collect())
                        .collect()
                })
                .collect();
            let result = grad_check(
                params.store_mut(),
                |tape| -> Result<Var, ModelError> {
                    let mut state = LstmState::zeros(tape, 1, small.edge_hidden);
                    let mut hs = Vec::new();
                    for step in &inputs {
                        state = rnn.step_instances(tape, step, state, &mut Dropout::disabled())?;
                        hs.push(state.h);
                    }
                    let all = tape.concat(&hs)?;
                    let target = tape.constant(Tensor::filled(&[1, 4 * small.edge_hidden], 0.2));
                    Ok(tape.mse(all, target)?)
                },
                &cfg,
            );
            rows.push(row(format!("edge_rnn {}", rnn.kind), result));
        }
        let hiddens: Vec<Tensor> = FactorKind::ALL.iter().map(|_| random_tensor(&mut rng, &[2, small.edge_hidden])).collect();
        let start = random_tensor(&mut rng, &[2, 2]);
        let result = grad_check(
            params.store_mut(),
            |tape| -> Result<Var, ModelError> {
                let mut state = LstmState::zeros(tape, 2, small.node_hidden);
                let mut pos = tape.constant(start.clone());
                let mut outs = Vec::new();
                for _ in 0..4 {
                    let hs: Vec<(FactorKind, Var)> = FactorKind::ALL
                        .iter()
                        .zip(&hiddens)
                        .map(|(&k, h)| (k, tape.constant(h.clone())))
                        .collect();
                    let (s, next) = node.step(tape, pos, &hs, state, &mut Dropout::disabled())?;
                    (state, pos) = (s, next);
                    outs.push(next);
                }
                let all = tape.concat(&outs)?;
                let target = tape.constant(Tensor::filled(&[2, 8], 0.1));
                Ok(tape.mse(all, target)?)
            },
            &cfg,
        );
        rows.push(row("node_rnn", result));
    }

    let scene = two_walkers(&mut rng);
    for (variant, dims, samples) in [
        (Variant::Vlstm, small, None),
        (Variant::Vlstm, ModelDims::default(), Some(4)),
        (Variant::Srnn, small, None),
        (Variant::Mesrnn, small, None),
        (Variant::Mesrnn, ModelDims::default(), Some(4)),
    ] {
        let mut params = ModelParams::init(variant, dims, seed.wrapping_add(1));
        let shadow = params.clone();
        let cfg = GradCheckConfig {
            samples_per_tensor: samples,
            ..cfg.clone()
        };
        let result = grad_check(
            params.store_mut(),
            |tape| -> Result<Var, ModelError> {
                let preds = teacher_forced(tape, &shadow, &scene, &mut Dropout::disabled())?;
                mse_loss(tape, &preds, &scene, 1..scene.len()).map_err(|e| ModelError::Dimension(e.to_string()))
            },
            &cfg,
        );
        let label = if dims == ModelDims::default() { "full" } else { "small" };
        rows.push(row(format!("{variant} {label} 4-step"), result));
    }
    rows
}

/// Two pedestrians over 5 positions, so the unroll makes 4 predictions.
fn two_walkers(rng: &mut ChaCha8Rng) -> Scene {
    let tracks: Vec<Vec<Point>> = (0..2)
        .map(|_| {
            let mut p = [rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6)];
            let v = [rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)];
            (0..5)
                .map(|_| {
                    p = [p[0] + v[0], p[1] + v[1]];
                    p
                })
                .collect()
        })
        .collect();
    Scene::from_dense(0.4, vec![0, 1], tracks).expect("valid scene")
}

type WalkKey = (Vec<(usize, usize)>, Vec<u64>);

fn key(vertices: &[(usize, usize)], value: &[f64]) -> WalkKey {
    (vertices.to_vec(), value.iter().map(|v| v.to_bits()).collect())
}

/// Multiset comparison of [`metapaths`] against [`enumerate_walks_oracle`]
/// for every kind, anchor and step of `scenes` seeded random scenes, plus
/// the instance-count law on fully present scenes.
pub fn oracle_suite(seed: u64, scenes: usize) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    for kind in MetaPathKind::ALL {
        let mut checked = 0;
        let mut mismatches = 0;
        for k in 0..scenes {
            let scene = random_scene(seed.wrapping_mul(1_000_003).wrapping_add(k as u64), 6, 6, 0.75);
            let graph = build_graph(&scene, scene.len(), &GraphConfig::default()).expect("valid scene");
            for anchor in 0..scene.num_peds() {
                for t in 0..scene.len() {
                    let mut got: Vec<WalkKey> = metapaths(&graph, anchor, t, kind)
                        .expect("in range")
                        .iter()
                        .map(|f| key(&f.walk(), &f.value))
                        .collect();
                    let mut want: Vec<WalkKey> = enumerate_walks_oracle(&graph, anchor, t, &kind.signature())
                        .expect("in range")
                        .iter()
                        .map(|w| key(&w.vertices, &w.value))
                        .collect();
                    got.sort();
                    want.sort();
                    checked += 1;
                    mismatches += usize::from(got != want);
                }
            }
        }
        rows.push(CheckRow {
            suite: "metapath",
            name: format!("oracle {kind}"),
            checked,
            error: mismatches as f64,
            passed: mismatches == 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in [2usize, 3, 5, 8] {
        let tracks: Vec<Vec<Point>> = (0..n)
            .map(|_| (0..5).map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)]).collect())
            .collect();
        let scene = Scene::from_dense(0.4, (0..n as i64).collect(), tracks).expect("valid scene");
        let graph = build_graph(&scene, 5, &GraphConfig::default()).expect("valid scene");
        let mut checked = 0;
        let mut mismatches = 0;
        for anchor in 0..n {
            for t in 2..5 {
                for (kind, want) in [
                    (MetaPathKind::SS, (n - 1) * (n - 2)),
                    (MetaPathKind::ST, n - 1),
                    (MetaPathKind::TS, n - 1),
                    (MetaPathKind::TT, 1),
                ] {
                    checked += 1;
                    mismatches += usize::from(metapaths(&graph, anchor, t, kind).expect("in range").len() != want);
                }
            }
        }
        rows.push(CheckRow {
            suite: "metapath",
            name: format!("counts N={n}"),
            checked,
            error: mismatches as f64,
            passed: mismatches == 0,
        });
    }
    rows
}
