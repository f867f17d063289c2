use proptest::prelude::*;

use super::*;

fn dense(tracks: Vec<Vec<Point>>) -> Scene {
    let n = tracks.len() as i64;
    Scene::from_dense(DEFAULT_FRAME_INTERVAL, (0..n).collect(), tracks).unwrap()
}

fn full_graph(scene: &Scene) -> StGraph {
    build_graph(scene, scene.len(), &GraphConfig::default()).unwrap()
}

#[test]
fn spatial_edge_examples() {
    let s = dense(vec![vec![[0.0, 0.0]; 3], vec![[1.0, 1.0]; 3], vec![[0.0, 0.0]; 3]]);
    assert_eq!(spatial_edge(&s, 0, 1, 0).unwrap(), [-1.0, -1.0]);
    assert_eq!(spatial_edge(&s, 0, 2, 1).unwrap(), [0.0, 0.0]);
    assert_eq!(spatial_edge(&s, 1, 1, 1), Err(StGraphError::SelfEdge(1)));
}

#[test]
fn spatial_edge_absent_pedestrian() {
    let mut s = dense(vec![vec![[0.0, 0.0]; 3], vec![[1.0, 1.0]; 3]]);
    s.set_position(1, 2, None);
    assert_eq!(spatial_edge(&s, 0, 1, 2), Err(StGraphError::Absent { ped: 1, step: 2 }));
}

#[test]
fn temporal_edge_examples() {
    let s = dense(vec![vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.0]]]);
    assert_eq!(temporal_edge(&s, 0, 1).unwrap(), [1.0, 0.0]);
    assert_eq!(temporal_edge(&s, 0, 2).unwrap(), [0.0, 0.0]);
    assert!(temporal_edge(&s, 0, 0).is_err());
}

#[test]
fn temporal_edges_telescope() {
    for seed in 0..20 {
        let s = random_scene(seed, 3, 8, 1.0);
        for i in 0..s.num_peds() {
            let mut sum = [0.0, 0.0];
            for t in 1..s.len() {
                let e = temporal_edge(&s, i, t).unwrap();
                sum[0] += e[0];
                sum[1] += e[1];
            }
            let first = s.position(i, 0).unwrap();
            let last = s.position(i, s.len() - 1).unwrap();
            assert!((sum[0] - (last[0] - first[0])).abs() < 1e-12);
            assert!((sum[1] - (last[1] - first[1])).abs() < 1e-12);
        }
    }
}

#[test]
fn graph_edge_counts() {
    let single = dense(vec![vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 1.0]]]);
    let g = full_graph(&single);
    assert_eq!(g.spatial_edges().len(), 0);
    assert_eq!(g.temporal_edges().len(), 3);

    let three = dense(vec![vec![[0.0, 0.0]; 3], vec![[1.0, 0.0]; 3], vec![[0.0, 2.0]; 3]]).select(&[0, 1, 2]).unwrap();
    let g = build_graph(&three, 1, &GraphConfig::default()).unwrap();
    assert_eq!(g.spatial_edges().len(), 3);
    assert_eq!(g.temporal_edges().len(), 0);
    assert!(build_graph(&three, 0, &GraphConfig::default()).is_err());
    assert!(build_graph(&three, 4, &GraphConfig::default()).is_err());
}

#[test]
fn graph_matches_double_loop() {
    for seed in 0..50 {
        let s = random_scene(seed, 6, 6, 0.7);
        let g = full_graph(&s);
        let mut spatial = Vec::new();
        let mut temporal = Vec::new();
        for t in 0..s.len() {
            for i in 0..s.num_peds() {
                for j in 0..s.num_peds() {
                    if i < j && s.is_present(i, t) && s.is_present(j, t) {
                        spatial.push((t, i, j, spatial_edge(&s, i, j, t).unwrap()));
                    }
                }
                if t > 0 && s.is_present(i, t) && s.is_present(i, t - 1) {
                    temporal.push((t, i, temporal_edge(&s, i, t).unwrap()));
                }
            }
        }
        let mut got_s: Vec<_> = g.spatial_edges().iter().map(|e| (e.step, e.i, e.j, e.feature)).collect();
        let mut got_t: Vec<_> = g.temporal_edges().iter().map(|e| (e.step, e.ped, e.feature)).collect();
        got_s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        got_t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        spatial.sort_by(|a, b| a.partial_cmp(b).unwrap());
        temporal.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got_s, spatial);
        assert_eq!(got_t, temporal);
    }
}

#[test]
fn radius_prunes_spatial_edges() {
    let s = dense(vec![vec![[0.0, 0.0]; 3], vec![[1.0, 0.0]; 3], vec![[10.0, 0.0]; 3]]);
    let g = build_graph(&s, 3, &GraphConfig { radius: Some(2.0) }).unwrap();
    assert_eq!(g.spatial_edges().len(), 3);
    assert!(g.spatial(0, 2, 0).is_none());
    assert_eq!(g.spatial(1, 0, 0), Some([1.0, 0.0]));
}

#[test]
fn tt_of_uniform_motion() {
    let s = dense(vec![vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]]);
    let g = full_graph(&s);
    let tt = metapaths(&g, 0, 2, MetaPathKind::TT).unwrap();
    assert_eq!(tt.len(), 1);
    assert_eq!(tt[0].value, [1.0, 0.0, 1.0, 0.0]);
}

#[test]
fn early_steps_lack_temporal_paths() {
    let s = random_scene(4, 4, 6, 1.0);
    let g = full_graph(&s);
    for i in 0..s.num_peds() {
        for kind in [MetaPathKind::ST, MetaPathKind::TS, MetaPathKind::TT] {
            assert!(metapaths(&g, i, 0, kind).unwrap().is_empty());
        }
        assert!(metapaths(&g, i, 1, MetaPathKind::TT).unwrap().is_empty());
    }
}

#[test]
fn four_pedestrian_counts() {
    let tracks = (0..4)
        .map(|i| (0..5).map(|t| [i as f64 + 0.1 * t as f64, (i * i) as f64]).collect())
        .collect();
    let s = dense(tracks);
    let g = full_graph(&s);
    for i in 0..4 {
        for t in 0..5 {
            assert_eq!(metapaths(&g, i, t, MetaPathKind::SS).unwrap().len(), 6);
            if t >= 1 {
                assert_eq!(metapaths(&g, i, t, MetaPathKind::ST).unwrap().len(), 3);
                assert_eq!(metapaths(&g, i, t, MetaPathKind::TS).unwrap().len(), 3);
            }
        }
    }
}

#[test]
fn unknown_kind_is_rejected() {
    assert_eq!("st".parse::<MetaPathKind>().unwrap(), MetaPathKind::ST);
    assert!(matches!("SX".parse::<MetaPathKind>(), Err(StGraphError::UnknownKind(_))));
}

#[test]
fn metapaths_reject_out_of_range() {
    let s = random_scene(2, 2, 4, 1.0);
    let g = full_graph(&s);
    assert!(metapaths(&g, 9, 0, MetaPathKind::SS).is_err());
    assert!(metapaths(&g, 0, 99, MetaPathKind::SS).is_err());
}

#[test]
fn length_one_walks_are_edges() {
    let s = random_scene(8, 5, 5, 0.8);
    let g = full_graph(&s);
    for i in 0..s.num_peds() {
        for t in 0..s.len() {
            let walks = enumerate_walks_oracle(&g, i, t, &[EdgeType::Spatial]).unwrap();
            let mut expected: Vec<Vec<f64>> = (0..s.num_peds())
                .filter(|&j| j != i)
                .filter_map(|j| g.spatial(i, j, t).map(|e| e.to_vec()))
                .collect();
            let mut got: Vec<Vec<f64>> = walks.into_iter().map(|w| w.value).collect();
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(got, expected);

            let t_walks = enumerate_walks_oracle(&g, i, t, &[EdgeType::Temporal]).unwrap();
            assert_eq!(t_walks.len(), usize::from(g.temporal(i, t).is_some()));
        }
    }
}

#[test]
fn oracle_rejects_long_signatures() {
    let s = random_scene(8, 2, 4, 1.0);
    let g = full_graph(&s);
    assert_eq!(
        enumerate_walks_oracle(&g, 0, 0, &[EdgeType::Spatial; 3]),
        Err(StGraphError::Signature(3))
    );
}

/// Sort key making multiset comparison exact.
fn key(vertices: &[(usize, usize)], value: &[f64]) -> (Vec<(usize, usize)>, Vec<u64>) {
    (vertices.to_vec(), value.iter().map(|v| v.to_bits()).collect())
}

fn assert_oracle_agrees(scene: &Scene) {
    let g = full_graph(scene);
    for i in 0..scene.num_peds() {
        for t in 0..scene.len() {
            for kind in MetaPathKind::ALL {
                let mut got: Vec<_> = metapaths(&g, i, t, kind)
                    .unwrap()
                    .iter()
                    .map(|f| key(&f.walk(), &f.value))
                    .collect();
                let mut want: Vec<_> = enumerate_walks_oracle(&g, i, t, &kind.signature())
                    .unwrap()
                    .iter()
                    .map(|w| key(&w.vertices, &w.value))
                    .collect();
                got.sort();
                want.sort();
                assert_eq!(got, want, "kind {kind} anchor {i} step {t}");
            }
        }
    }
}

proptest! {
    #[test]
    fn metapaths_equal_walk_enumeration(seed in any::<u64>(), presence in 0.3f64..1.0) {
        assert_oracle_agrees(&random_scene(seed, 6, 6, presence));
    }

    #[test]
    fn spatial_features_are_antisymmetric(seed in any::<u64>()) {
        let s = random_scene(seed, 6, 6, 0.8);
        let g = full_graph(&s);
        for t in 0..s.len() {
            for i in 0..s.num_peds() {
                for j in 0..s.num_peds() {
                    if let Some(e) = g.spatial(i, j, t) {
                        prop_assert_eq!(g.spatial(j, i, t), Some([-e[0], -e[1]]));
                    }
                }
            }
        }
    }

    #[test]
    fn translation_leaves_features_unchanged(seed in any::<u64>(), dx in -100.0f64..100.0, dy in -100.0f64..100.0) {
        // Integer-valued coordinates keep the cancellation exact.
        let s = random_scene(seed, 5, 5, 0.9).map_positions(|p| [p[0].round(), p[1].round()]);
        let moved = s.translated([dx.round(), dy.round()]);
        let (g, h) = (full_graph(&s), full_graph(&moved));
        for i in 0..s.num_peds() {
            for t in 0..s.len() {
                for kind in MetaPathKind::ALL {
                    let a: Vec<_> = metapaths(&g, i, t, kind).unwrap().iter().map(|f| f.value).collect();
                    let b: Vec<_> = metapaths(&h, i, t, kind).unwrap().iter().map(|f| f.value).collect();
                    prop_assert_eq!(a, b);
                }
            }
        }
    }
}

#[test]
fn hundred_seeded_scenes_match_oracle() {
    for seed in 0..100 {
        assert_oracle_agrees(&random_scene(seed, 6, 6, 0.75));
    }
}

#[test]
fn st_and_ts_stay_distinct() {
    // i at origin moving +x, j above moving +y: composing by addition would
    // make ST and TS coincide.
    let s = dense(vec![
        vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
        vec![[0.0, 3.0], [0.0, 4.0], [0.0, 5.0]],
    ]);
    let g = full_graph(&s);
    let st = metapaths(&g, 0, 2, MetaPathKind::ST).unwrap()[0].value;
    let ts = metapaths(&g, 0, 2, MetaPathKind::TS).unwrap()[0].value;
    let sum = |v: [f64; 4]| [v[0] + v[2], v[1] + v[3]];
    assert_eq!(sum(st), sum(ts));
    assert_ne!(st, ts);
}

#[test]
fn scene_validation() {
    assert!(Scene::new(0.4, vec![1], vec![vec![Some([0.0, 0.0]); 2]]).is_err());
    assert!(Scene::new(0.4, vec![1, 2], vec![vec![Some([0.0, 0.0]); 3]]).is_err());
    assert!(Scene::new(0.4, vec![], vec![]).is_err());
    assert!(Scene::new(0.4, vec![1], vec![vec![Some([f64::NAN, 0.0]); 3]]).is_err());
    assert!(Scene::new(0.4, vec![1], vec![vec![Some([0.0, 0.0]); 3]]).is_ok());
}
