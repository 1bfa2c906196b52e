use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sepconv::decomp::{decompose_2d, decompose_3d, reconstruct};
use sepconv::harness::config::ExperimentConfig;
use sepconv::harness::metrics::{error_indicator, traces_of_fields, zoom_evaluate, zoom_from_traces};
use sepconv::harness::run::{compress_model, evaluate, load_cell, run_cell, write_cell};
use sepconv::harness::train::{objective, train, Prepared, Scalers, TrainConfig};
use sepconv::harness::zoo::{build_model, legal_cells, target_shape, Arch, Regularization, Variant};
use sepconv::nn::gradcheck::{check_gradients, relative_error, FD_STEP, REL_FLOOR};
use sepconv::nn::{count_params, LayerKind, Model};
use sepconv::wave::{Dataset, GridSpec, SamplingConfig};
use sepconv::{Error, Tensor};

fn tiny_grid() -> GridSpec {
    GridSpec::centered(1.0, 1.0, 12, 12, 5, 5, 6, 1.0).unwrap()
}

fn tiny_arch() -> Arch {
    Arch {
        kernel: 3,
        filters: 2,
        blocks: 1,
        lift_width: 3,
        fc_width: 4,
        fc_depth: 1,
    }
}

fn tiny_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        seed: 3,
        grid: GridSpec::centered(1.0, 1.0, 16, 16, 6, 6, 8, 1.0).unwrap(),
        sampling: SamplingConfig {
            n_train: 6,
            n_test: 3,
            ..Default::default()
        },
        arch: Arch {
            kernel: 3,
            filters: 3,
            blocks: 2,
            lift_width: 4,
            fc_width: 8,
            fc_depth: 2,
        },
        ..Default::default()
    };
    cfg.train.epochs = 3;
    cfg
}

fn random(shape: &[usize], r: &mut ChaCha8Rng) -> Tensor {
    Tensor::from_fn(shape, |_| r.random_range(-1.0..1.0))
}

fn with_batch(b: usize, s: &[usize]) -> Vec<usize> {
    let mut shape = vec![b];
    shape.extend_from_slice(s);
    shape
}

#[test]
fn every_legal_cell_passes_the_gradient_checker() {
    let g = tiny_grid();
    let a = tiny_arch();
    let cells = legal_cells(&Variant::ALL, &Regularization::COLUMNS);
    assert_eq!(cells.len(), 11 * 6);
    for (i, (v, reg)) in cells.into_iter().enumerate() {
        let mut r = ChaCha8Rng::seed_from_u64(i as u64);
        let mut model = build_model(v, reg, &g, &a, i as u64).unwrap();
        let x = random(&with_batch(3, model.input_shape()), &mut r);
        let w: Vec<Tensor> = model
            .output_shapes()
            .iter()
            // keeps the probe loss O(1) so difference noise stays far below
            // the relative-error floor
            .map(|s| {
                let w = random(&with_batch(3, s), &mut r);
                w.scale(1.0 / (w.len() as f64).sqrt())
            })
            .collect();
        let rep = check_gradients(&mut model, &x, &w, 3, i as u64).unwrap();
        assert!(rep.checked >= 3, "{v} {reg}");
        assert!(
            rep.max_rel_error < 1e-6,
            "{v} {reg}: {} at {:?}",
            rep.max_rel_error,
            rep.worst
        );
    }
}

#[test]
fn euler_objective_gradients_match_finite_differences() {
    let g = tiny_grid();
    let data = Dataset::generate(&g, &SamplingConfig { n_train: 3, n_test: 1, ..Default::default() }, 1)
        .unwrap()
        .0;
    let sc = Scalers::fit(&data);
    let reg: Regularization = "E&SL".parse().unwrap();
    let cfg = TrainConfig {
        euler_weight: 0.7,
        ..Default::default()
    };
    for v in [Variant::Conv25D, Variant::Conv1DTBoundary] {
        let mut model = build_model(v, reg, &g, &tiny_arch(), 2).unwrap();
        let prep = Prepared::new(v, &data, &sc).unwrap();
        let (x, u, vel) = prep.batch(&[0, 1, 2]);
        let loss = |m: &mut Model| {
            let out = m.forward_train(&x).unwrap();
            m.clear_cache();
            objective(&out, &u, &vel, reg, &cfg, sc.euler(), g.dt()).unwrap().0
        };
        model.zero_grad();
        let out = model.forward_train(&x).unwrap();
        let (_, grads) = objective(&out, &u, &vel, reg, &cfg, sc.euler(), g.dt()).unwrap();
        model.backward(&grads).unwrap();
        let analytic: Vec<Tensor> = model.params().iter().map(|p| p.grad.clone()).collect();
        let mut worst = 0.0f64;
        for (pi, a) in analytic.iter().enumerate() {
            for k in (0..a.len()).step_by(a.len().div_ceil(3).max(1)) {
                let orig = model.params()[pi].value.data()[k];
                model.params_mut()[pi].value.data_mut()[k] = orig + FD_STEP;
                let lp = loss(&mut model);
                model.params_mut()[pi].value.data_mut()[k] = orig - FD_STEP;
                let lm = loss(&mut model);
                model.params_mut()[pi].value.data_mut()[k] = orig;
                let num = (lp - lm) / (2.0 * FD_STEP);
                worst = worst.max(relative_error(a.data()[k], num, REL_FLOOR));
            }
        }
        assert!(worst < 1e-6, "{v}: {worst}");
    }
}

#[test]
fn separable_variants_have_fewer_parameters_than_full_ones() {
    let g = GridSpec::desk();
    let a = Arch::default();
    for reg in Regularization::COLUMNS {
        let n = |v| count_params(&build_model(v, reg, &g, &a, 0).unwrap());
        assert!(n(Variant::Conv25D) < n(Variant::Conv2D), "{reg}");
        assert!(n(Variant::Conv25D) < n(Variant::Conv3D), "{reg}");
        assert!(n(Variant::Conv25Db) < n(Variant::Conv25D), "{reg}");
        assert!(n(Variant::Conv15DBoundary) < n(Variant::Conv2DBoundary), "{reg}");
    }
}

#[test]
fn euler_never_changes_parameter_counts() {
    let g = tiny_grid();
    for v in Variant::ALL {
        for shared in [false, true] {
            let base = Regularization { shared, ..Default::default() };
            let with_e = Regularization { euler: true, ..base };
            let n = |r| count_params(&build_model(v, r, &g, &tiny_arch(), 5).unwrap());
            assert_eq!(n(base), n(with_e), "{v}");
        }
    }
}

#[test]
fn shared_variants_feed_one_trunk_to_both_heads() {
    let g = tiny_grid();
    for v in Variant::ALL {
        let m = build_model(v, "SL".parse().unwrap(), &g, &tiny_arch(), 1).unwrap();
        assert!(m.is_shared());
        assert_eq!(m.trunk_consumers(), 2);
        let ind = build_model(v, Regularization::BASIC, &g, &tiny_arch(), 1).unwrap();
        assert!(count_params(&m) < count_params(&ind), "{v}");
    }
}

#[test]
fn batch_norm_with_euler_is_rejected() {
    let bne: Regularization = "BN&E".parse().unwrap();
    let r = build_model(Variant::Conv3D, bne, &tiny_grid(), &tiny_arch(), 0);
    assert!(matches!(r, Err(Error::BatchNormWithEuler)));
    assert!(legal_cells(&[Variant::Conv3D], &[bne]).is_empty());
}

#[test]
fn variant_contracts() {
    let g = tiny_grid();
    for v in Variant::ALL {
        let t = target_shape(v, &g);
        match (v.time_input(), v.boundary()) {
            (true, true) => assert_eq!(t, vec![g.n_boundary()]),
            (true, false) => assert_eq!(t, vec![g.zoom_nx, g.zoom_ny]),
            (false, true) => assert_eq!(t, vec![g.nt, g.n_boundary()]),
            (false, false) => assert_eq!(t, vec![g.nt, g.zoom_nx, g.zoom_ny]),
        }
        let m = build_model(v, Regularization::BASIC, &g, &tiny_arch(), 0).unwrap();
        let convs: Vec<&'static str> = m
            .layers()
            .filter(|l| matches!(l.kind, LayerKind::Conv(_) | LayerKind::Separable(_)))
            .map(|l| l.name())
            .collect();
        if v.separable() {
            assert!(convs.iter().all(|&n| n == "separable"), "{v}: {convs:?}");
        } else {
            assert!(convs.iter().all(|&n| n != "separable"), "{v}: {convs:?}");
        }
    }
}

#[test]
fn training_is_deterministic_and_zero_epochs_is_a_no_op() {
    let cfg = tiny_config();
    let (train_set, _) = Dataset::generate(&cfg.grid, &cfg.sampling, cfg.seed).unwrap();
    let sc = Scalers::fit(&train_set);
    let reg: Regularization = "BN".parse().unwrap();
    let v = Variant::Conv25D;
    let prep = Prepared::new(v, &train_set, &sc).unwrap();
    let fresh = build_model(v, reg, &cfg.grid, &cfg.arch, 9).unwrap();

    let mut m0 = fresh.clone();
    let zero = TrainConfig { epochs: 0, ..cfg.train.clone() };
    let rep = train(&mut m0, &prep, reg, &cfg.grid, &sc, &zero, 1).unwrap();
    assert!(rep.history.is_empty());
    assert_eq!(m0.state(), fresh.state());

    let run = |bs| {
        let mut m = fresh.clone();
        let c = TrainConfig { epochs: 4, batch_size: bs, ..cfg.train.clone() };
        let rep = train(&mut m, &prep, reg, &cfg.grid, &sc, &c, 11).unwrap();
        (rep.history, m.state())
    };
    for bs in [0, 2] {
        let (h1, s1) = run(bs);
        let (h2, s2) = run(bs);
        assert_eq!(h1.len(), 4);
        assert_eq!(h1, h2);
        assert_eq!(s1, s2);
    }
}

#[test]
fn non_finite_loss_aborts_training() {
    let cfg = tiny_config();
    let (mut train_set, _) = Dataset::generate(&cfg.grid, &cfg.sampling, cfg.seed).unwrap();
    let sc = Scalers::fit(&train_set);
    train_set.samples[0].u.data_mut()[0] = f64::NAN;
    let v = Variant::Conv2D;
    let prep = Prepared::new(v, &train_set, &sc).unwrap();
    let mut m = build_model(v, Regularization::BASIC, &cfg.grid, &cfg.arch, 0).unwrap();
    let r = train(&mut m, &prep, Regularization::BASIC, &cfg.grid, &sc, &cfg.train, 0);
    assert!(matches!(r, Err(Error::Diverged(0))));
}

#[test]
fn zoom_evaluation_paths() {
    let g = GridSpec::desk();
    let s = SamplingConfig {
        n_train: 1,
        n_test: 4,
        ..Default::default()
    };
    let (_, test) = Dataset::generate(&g, &s, 21).unwrap();

    let exact: Vec<Tensor> = test.samples.iter().map(|s| s.boundary_u.clone()).collect();
    let e = zoom_from_traces(&exact, &test).unwrap();
    assert!(e.mean < 1e-6, "{}", e.mean);

    // zero traces give the zero field, whose score is mean|U| / max|U|
    let zeros: Vec<Tensor> = exact.iter().map(|t| Tensor::zeros(t.shape())).collect();
    let z = zoom_from_traces(&zeros, &test).unwrap();
    let refs: Vec<Tensor> = test.samples.iter().map(|s| s.u.clone()).collect();
    let mut per_t = vec![(0.0, 0usize); g.nt];
    for u in &refs {
        let n = g.zoom_nx * g.zoom_ny;
        for (t, acc) in per_t.iter_mut().enumerate() {
            let sl = &u.data()[t * n..(t + 1) * n];
            let peak = sl.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if peak >= 1e-14 {
                acc.0 += sl.iter().map(|v| v.abs()).sum::<f64>() / n as f64 / peak;
                acc.1 += 1;
            }
        }
    }
    let defined: Vec<f64> = per_t.iter().filter(|a| a.1 > 0).map(|a| a.0 / a.1 as f64).collect();
    let want = defined.iter().sum::<f64>() / defined.len() as f64;
    assert!((z.mean - want).abs() < 1e-12);

    // a field prediction and a boundary prediction with the same ring agree
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let fields: Vec<Tensor> = refs
        .iter()
        .map(|u| {
            let noise = random(u.shape(), &mut r);
            u.zip_map(&noise, |x, e| x * (1.0 + 0.1 * e)).unwrap()
        })
        .collect();
    let traces = traces_of_fields(&fields, &g).unwrap();
    let via_field = zoom_evaluate(&fields, false, &test).unwrap();
    let via_boundary = zoom_evaluate(&traces, true, &test).unwrap();
    assert_eq!(via_field, via_boundary);
}

#[test]
fn cell_round_trips_through_its_directory() {
    let cfg = tiny_config();
    let (train_set, test_set) = Dataset::generate(&cfg.grid, &cfg.sampling, cfg.seed).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (v, reg) in [(Variant::Conv3D, "BN&SL"), (Variant::FcTBoundary, "E")] {
        let reg: Regularization = reg.parse().unwrap();
        let cell = run_cell(&cfg, v, reg, &train_set, &test_set).unwrap();
        assert_eq!(cell.report.history.len(), cfg.train.epochs);
        assert_eq!(cell.rows.len(), 6);
        assert!(cell.rows.iter().all(|r| r.value.is_finite()));
        let d = dir.path().join(v.name());
        write_cell(&d, &cfg, &cell).unwrap();
        let (c2, m2, sc2) = load_cell(&d).unwrap();
        assert_eq!((c2.variant, c2.regularization), (v, reg));
        assert_eq!(sc2, cell.scalers);
        let again = evaluate(&m2, v, &train_set, &test_set, &sc2).unwrap();
        assert_eq!(again, cell.eval);
    }
}

#[test]
fn compressing_rank_one_kernels_is_exact() {
    let cfg = tiny_config();
    let (train_set, test_set) = Dataset::generate(&cfg.grid, &cfg.sampling, cfg.seed).unwrap();
    let sc = Scalers::fit(&train_set);
    for v in [Variant::Conv3D, Variant::Conv2D] {
        let mut m = build_model(v, Regularization::BASIC, &cfg.grid, &cfg.arch, 4).unwrap();
        // make every kernel (slice-wise) rank one first
        for l in m.layers_mut() {
            if let LayerKind::Conv(c) = &mut l.kind {
                let klen: usize = c.extents().iter().product();
                for f in 0..c.filters() {
                    let k = c.filter_kernel(f);
                    let d = match k.rank() {
                        2 => decompose_2d(&k, 1).unwrap(),
                        3 => decompose_3d(&k, 1).unwrap(),
                        _ => continue,
                    };
                    c.kernel.value.data_mut()[f * klen..(f + 1) * klen]
                        .copy_from_slice(reconstruct(&d).data());
                }
            }
        }
        let before = evaluate(&m, v, &train_set, &test_set, &sc).unwrap();
        let report = compress_model(&mut m, 1).unwrap();
        assert!(!report.is_empty());
        assert!(report.iter().all(|k| k.relative_residual < 1e-12), "{v}");
        let after = evaluate(&m, v, &train_set, &test_set, &sc).unwrap();
        assert!((before.test_u.mean - after.test_u.mean).abs() < 1e-10);
        assert!((before.zoom.mean - after.zoom.mean).abs() < 1e-10);
    }
}

#[test]
fn error_indicator_of_zero_model_is_mean_over_max() {
    let u = Tensor::new(vec![2, 3], vec![1.0, -2.0, 1.0, 0.0, 4.0, -4.0]).unwrap();
    let e = error_indicator(&[Tensor::zeros(&[2, 3])], &[u]).unwrap();
    assert!((e.mean - 0.5 * (4.0 / 6.0 + 8.0 / 12.0)).abs() < 1e-15);
}

#[test]
fn shipped_configs_parse() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "cfg") {
            let cfg = ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
            n += 1;
        }
    }
    assert!(n >= 1);
}
