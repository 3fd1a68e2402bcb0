mod common;

use common::*;
use nalgebra::DMatrix;
use qbmor::benchmarks::{build_rod, build_toda, RodParams, TodaParams};
use qbmor::interpolation::{
    strategy_avg, strategy_equi, sym_one_sided_blocks, Compression, Method, ReductionBasis,
    Sidedness, StrategyOptions,
};
use qbmor::io::{load_reduced, load_system, save_reduced, save_system};
use qbmor::linalg::{orthonormalize, CMatrix, RMatrix, DEFAULT_RANK_TOL};
use qbmor::metrics::{hinf_relerr1, relerr_freq2, relerr_l2, relerr_linf, table_csv, ErrorReport};
use qbmor::pod::{collect_snapshots, pod_basis, SnapshotSet};
use qbmor::projection::{project, split_congruence, verify_conditions};
use qbmor::system::{second_order_parts, ScalarFn, Structure};
use qbmor::tf::{sweep_level1_values, sweep_level2_values, TfEvaluator};
use qbmor::{Complex64 as C, MorError};

fn opts() -> StrategyOptions {
    StrategyOptions::default()
}

#[test]
fn full_order_projection_leaves_transfer_functions_unchanged() {
    for kind in KINDS {
        let sys = random_structured(kind, 2, 8, 2, 2);
        let q = orthonormalize(&rand_real(&mut rng(3), 8, 8, 1.0), DEFAULT_RANK_TOL);
        let red = project(&sys, &ReductionBasis::galerkin(q, "similarity")).unwrap();
        let (ef, er) = (TfEvaluator::new(&sys), TfEvaluator::new(&red.system));
        let mut g = rng(4);
        for _ in 0..3 {
            let (a, b, c) = (rand_point(&mut g), rand_point(&mut g), rand_point(&mut g));
            for (lvl, pt) in [(1u8, vec![a]), (2, vec![a, b]), (3, vec![a, b, c])] {
                let e = rel(&ef.sym_tf(lvl, &pt).unwrap(), &er.sym_tf(lvl, &pt).unwrap());
                assert!(e < 1e-11, "{kind:?} level {lvl}: {e:.3e}");
            }
        }
    }
}

#[test]
fn projected_second_order_system_keeps_its_form() {
    let (sys, parts) = random_second_order(5, 7, 1, 1);
    let v = orthonormalize(&rand_real(&mut rng(6), 7, 3, 1.0), DEFAULT_RANK_TOL);
    let red = project(&sys, &ReductionBasis::galerkin(v.clone(), "x")).unwrap();
    assert_eq!(red.system.structure, Structure::SecondOrder);
    let rp = second_order_parts(&red.system).unwrap();
    let vh = v.adjoint();
    assert!(rel(&(&vh * &parts.mass * &v), &rp.mass) < 1e-13);
    assert!(rel(&(&vh * &parts.damping * &v), &rp.damping) < 1e-13);
    assert!(rel(&(&vh * &parts.stiffness * &v), &rp.stiffness) < 1e-13);
    assert!(rel(&(&parts.c_v * &v), &rp.c_v) < 1e-13);
    let want = &vh * parts.h_vv.to_matrix() * v.kronecker(&v);
    assert!(rel(&want, &rp.h_vv.to_matrix()) < 1e-12);
}

#[test]
fn split_congruence_contains_the_basis_and_keeps_conditions() {
    let sys = build_toda(&TodaParams {
        particles: 30,
        ..TodaParams::default()
    })
    .unwrap();
    let basis = strategy_equi(&sys, Method::SymInt, Sidedness::OneSided, 8, &opts()).unwrap();
    let split = split_congruence(&basis, 30).unwrap();
    assert!(split.order() <= 16 && split.order() >= 8);
    let proj = &split.v * split.v.adjoint();
    assert!((&basis.v - &proj * &basis.v).norm() <= 1e-12 * basis.v.norm());
    // every column lives in one block only
    for j in 0..split.order() {
        let top = split.v.column(j).rows(0, 30).norm();
        let bot = split.v.column(j).rows(30, 30).norm();
        assert!(top < 1e-14 || bot < 1e-14, "column {j} mixes blocks");
    }
    let red = project(&sys, &split).unwrap();
    assert!(red.all_checks_passed());
    assert!(!red.checks.is_empty());
}

#[test]
fn split_with_empty_lower_block_keeps_effective_order() {
    let mut v = rand_real(&mut rng(9), 10, 3, 1.0);
    v.rows_mut(6, 4).fill(C::new(0.0, 0.0));
    let basis = ReductionBasis::galerkin(orthonormalize(&v, DEFAULT_RANK_TOL), "x");
    let s = split_congruence(&basis, 6).unwrap();
    assert_eq!(s.order(), 3);
    assert!(split_congruence(&basis, 0).is_err());
}

#[test]
fn equi_on_the_rod_verifies_every_condition() {
    let sys = build_rod(&RodParams::default()).unwrap();
    for (method, side) in [
        (Method::SymInt, Sidedness::OneSided),
        (Method::GenInt, Sidedness::TwoSided),
    ] {
        let basis = strategy_equi(&sys, method, side, 24, &opts()).unwrap();
        assert!(basis.v.iter().all(|c| c.im == 0.0));
        let red = project(&sys, &basis).unwrap();
        assert_eq!(red.order(), 24);
        assert!(red.system.is_real());
        for c in &red.checks {
            assert!(
                c.rel_error <= 1e-8,
                "{} {}: {:.3e}",
                basis.method_tag,
                c.condition.label(),
                c.rel_error
            );
        }
    }
}

#[test]
fn unreachable_orders_are_reported() {
    let sys = build_rod(&RodParams { n: 30, delay: 1.0 }).unwrap();
    for r in [0, 4, 31] {
        assert!(matches!(
            strategy_equi(&sys, Method::SymInt, Sidedness::OneSided, r, &opts()),
            Err(MorError::TargetOrderUnreachable { .. })
        ));
    }
}

#[test]
fn avg_compression_options_reach_the_order() {
    let sys = build_rod(&RodParams { n: 60, delay: 1.0 }).unwrap();
    for compression in [Compression::PivotedQr, Compression::Svd] {
        for side in [Sidedness::OneSided, Sidedness::TwoSided] {
            let o = StrategyOptions {
                compression,
                ..opts()
            };
            let b = strategy_avg(&sys, Method::SymInt, side, 12, &o).unwrap();
            assert_eq!((b.v.ncols(), b.w.ncols()), (12, 12));
            assert!(b.guaranteed.is_empty());
            let red = project(&sys, &b).unwrap();
            assert_eq!(red.order(), 12);
        }
    }
}

#[test]
fn avg_fits_the_rod_better_than_equi_in_the_sweep() {
    let sys = build_rod(&RodParams { n: 100, delay: 1.0 }).unwrap();
    let omegas = qbmor::linalg::logspace(1e-3, 1e3, 200);
    let full = sweep_level1_values(&sys, &omegas);
    let err = |b: ReductionBasis| {
        let red = project(&sys, &b).unwrap();
        hinf_relerr1(&full, &sweep_level1_values(&red.system, &omegas))
    };
    let equi = err(strategy_equi(&sys, Method::SymInt, Sidedness::TwoSided, 16, &opts()).unwrap());
    let avg = err(strategy_avg(&sys, Method::SymInt, Sidedness::TwoSided, 16, &opts()).unwrap());
    assert!(avg < equi, "avg {avg:.3e} vs equi {equi:.3e}");
}

#[test]
fn rod_stencil_and_reaction_terms() {
    let sys = build_rod(&RodParams { n: 3, delay: 1.0 }).unwrap();
    assert_eq!(sys.structure, Structure::TimeDelay);
    let h = std::f64::consts::PI / 4.0;
    let a = -sys.k.coefficient(&ScalarFn::Constant);
    // the middle node sits at pi/2 where 2 sin = 2
    assert!((a[(1, 1)].re - (-2.0 / (h * h) - 2.0)).abs() < 1e-12);
    assert!((a[(0, 1)].re - 1.0 / (h * h)).abs() < 1e-12);
    assert_eq!(a[(0, 2)].re, 0.0);
    let ad = -sys.k.coefficient(&ScalarFn::ExpDecay(1.0));
    assert!((ad[(1, 1)].re - 2.0).abs() < 1e-12);
    assert_eq!((sys.m, sys.p), (2, 2));
}

#[test]
fn toda_builder_has_no_vp_term_and_one_particle_identity() {
    let k = 1.7;
    let sys = build_toda(&TodaParams {
        particles: 1,
        stiffness: vec![k],
        damping: vec![0.3],
    })
    .unwrap();
    let p = second_order_parts(&sys).unwrap();
    assert!(p.h_vp.is_empty());
    // z = e^{kq} - 1: z'' = k (z' q' + (z + 1) q'') with q'' = -d q' - z + u
    let (q, qd, u) = (0.2, -0.4, 0.1);
    let z = (k * q).exp() - 1.0;
    let zd = k * (z + 1.0) * qd;
    let qdd = -0.3 * qd - z + u;
    let zdd = k * (zd * qd + (z + 1.0) * qdd);
    let x = [C::new(q, 0.0), C::new(z, 0.0)];
    let v = [C::new(qd, 0.0), C::new(zd, 0.0)];
    let mut rhs: Vec<C> = (0..2)
        .map(|i| {
            p.b_u[(i, 0)] * u
                - (0..2)
                    .map(|j| p.damping[(i, j)] * v[j] + p.stiffness[(i, j)] * x[j])
                    .sum::<C>()
                + (0..2).map(|j| p.n_p[0][(i, j)] * x[j] * u).sum::<C>()
        })
        .collect();
    for (op, a, b) in [(&p.h_pp, &x, &x), (&p.h_pv, &x, &v), (&p.h_vv, &v, &v)] {
        let hv = op.apply(a, b).unwrap();
        for i in 0..2 {
            rhs[i] -= hv[i];
        }
    }
    assert!((rhs[0].re - qdd).abs() < 1e-14);
    assert!((rhs[1].re - zdd).abs() < 1e-13);
}

#[test]
fn snapshots_of_a_scalar_decay_approach_one() {
    let sys = qbmor::system::preset_first_order(
        CMatrix::identity(1, 1),
        -CMatrix::identity(1, 1),
        CMatrix::identity(1, 1),
        CMatrix::identity(1, 1),
        vec![],
        qbmor::linalg::QuadraticOperator::zeros(1, 1),
    )
    .unwrap();
    let s = collect_snapshots(&sys, 0.1, 0.1, 1).unwrap();
    assert_eq!(s.states.ncols(), 2);
    let s = collect_snapshots(&sys, 8.0, 0.01, 10).unwrap();
    let row = s.states.row(0);
    assert!(row.iter().zip(row.iter().skip(1)).all(|(a, b)| b > a));
    assert!((row[row.len() - 1] - (1.0 - (-8.0f64).exp())).abs() < 1e-4);
}

#[test]
fn pod_basis_recovers_low_rank_snapshots() {
    let mut g = rng(12);
    let left = rand_real(&mut g, 20, 5, 1.0).map(|c| c.re);
    let right = rand_real(&mut g, 5, 40, 1.0).map(|c| c.re);
    let x: RMatrix = &left * &right;
    let snaps = SnapshotSet {
        states: x.clone(),
        times: (0..40).map(|i| i as f64).collect(),
        input_descriptor: "synthetic".into(),
        blocks: 1,
        steps: 40,
        newton_iterations: 0,
    };
    let b = pod_basis(&snaps, 5).unwrap();
    let v = b.v.map(|c| c.re);
    let resid = &x - &v * (v.transpose() * &x);
    assert!(resid.norm() <= 1e-10 * x.norm());
    let dup = SnapshotSet {
        states: DMatrix::from_fn(20, 6, |i, _| i as f64),
        ..snaps
    };
    assert!(pod_basis(&dup, 2).is_err());
}

#[test]
fn pod_on_the_rod_is_accurate_for_a_new_input() {
    let sys = build_rod(&RodParams { n: 60, delay: 1.0 }).unwrap();
    let snaps = collect_snapshots(&sys, 10.0, 0.01, 1).unwrap();
    assert_eq!(snaps.states.ncols(), 2 * 1001);
    let red = project(&sys, &pod_basis(&snaps, 10).unwrap()).unwrap();
    let grid = qbmor::simulation::uniform_grid(10.0, 0.05);
    let u = qbmor::simulation::sample_gp_input(1.0, 0.5, &grid, 1, 2)
        .unwrap()
        .to_input();
    let o = qbmor::simulation::SimOptions::new(10.0, 0.01);
    let y = qbmor::simulation::simulate(&sys, &u, &o).unwrap().outputs;
    let yr = qbmor::simulation::simulate(&red.system, &u, &o)
        .unwrap()
        .outputs;
    assert!(relerr_l2(&y, &yr).unwrap() < 1e-3);
}

#[test]
fn time_error_examples() {
    let y = RMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
    let zero = RMatrix::zeros(1, 2);
    assert_eq!(relerr_l2(&y, &zero).unwrap(), 1.0);
    assert_eq!(relerr_linf(&y, &zero).unwrap(), 1.0);
    assert_eq!(relerr_l2(&y, &y).unwrap(), 0.0);
    assert!(matches!(relerr_l2(&zero, &y), Err(MorError::ZeroReference)));
}

#[test]
fn identity_reduced_frequency_errors_vanish() {
    let sys = build_rod(&RodParams { n: 20, delay: 1.0 }).unwrap();
    let red = project(
        &sys,
        &ReductionBasis::galerkin(CMatrix::identity(20, 20), "id"),
    )
    .unwrap();
    let w = qbmor::linalg::logspace(1e-2, 1e2, 12);
    let e1 = hinf_relerr1(
        &sweep_level1_values(&sys, &w),
        &sweep_level1_values(&red.system, &w),
    );
    assert!(e1 <= 1e-12);
    let (f2, r2) = (
        sweep_level2_values(&sys, &w, &w),
        sweep_level2_values(&red.system, &w, &w),
    );
    let worst = relerr_freq2(&f2, &r2)
        .into_iter()
        .flatten()
        .flatten()
        .fold(0.0, f64::max);
    assert!(worst <= 1e-11);
    for i in 0..w.len() {
        for j in 0..w.len() {
            let (a, b) = (f2.norm(i, j).unwrap(), f2.norm(j, i).unwrap());
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}

#[test]
fn unstable_rows_print_infinity_in_time_columns() {
    let r = ErrorReport {
        method: "POD(avg)".into(),
        relerr_l2: f64::INFINITY,
        relerr_linf: f64::INFINITY,
        relerr_hinf1: 2.5e-3,
        relerr_hinf2: 1e-2,
        stable: false,
        note: None,
    };
    let csv = table_csv(&[r]).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("POD(avg),inf,inf,2.5"));
    assert!(!csv.contains("NaN") && !csv.contains("nan"));
    assert_eq!(table_csv(&[]).unwrap().lines().count(), 1);
}

#[test]
fn systems_and_reduced_models_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for (i, sys) in [
        build_rod(&RodParams { n: 12, delay: 0.5 }).unwrap(),
        build_toda(&TodaParams {
            particles: 4,
            ..TodaParams::default()
        })
        .unwrap(),
        random_structured(Kind::SecondOrder, 1, 5, 2, 2),
    ]
    .into_iter()
    .enumerate()
    {
        let path = dir.path().join(format!("sys{i}"));
        save_system(&path, &sys).unwrap();
        let back = load_system(&path).unwrap();
        assert_eq!(back.structure, sys.structure);
        assert_eq!(
            qbmor::projection::system_id(&back),
            qbmor::projection::system_id(&sys)
        );
        let s = C::new(0.1, 0.9);
        let e = rel(
            &TfEvaluator::new(&sys).sym_tf(2, &[s, s]).unwrap(),
            &TfEvaluator::new(&back).sym_tf(2, &[s, s]).unwrap(),
        );
        assert!(e <= 1e-14, "{e}");
    }
    let sys = build_rod(&RodParams { n: 40, delay: 1.0 }).unwrap();
    let red = project(
        &sys,
        &strategy_equi(&sys, Method::GenInt, Sidedness::OneSided, 12, &opts()).unwrap(),
    )
    .unwrap();
    let path = dir.path().join("red");
    save_reduced(&path, &red).unwrap();
    let back = load_reduced(&path).unwrap();
    assert_eq!(back.method_tag, red.method_tag);
    assert_eq!(back.v, red.v);
    assert_eq!(back.guaranteed, red.guaranteed);
    let checks = verify_conditions(&sys, &back.system, &back.guaranteed);
    assert!(checks.iter().all(|c| c.passed));
}

#[test]
fn coincident_symmetric_basis_equals_level3_prefix() {
    let sys = random_structured(Kind::FirstOrder, 77, 25, 1, 1);
    let ev = TfEvaluator::new(&sys);
    let s = C::new(0.0, 0.8);
    let a = sym_one_sided_blocks(&ev, s, s).unwrap();
    let b = qbmor::interpolation::sym_level3_blocks(&ev, s).unwrap();
    let qa = orthonormalize(&a, DEFAULT_RANK_TOL);
    let pb = b.columns(0, 2).into_owned();
    assert!((&pb - &qa * (qa.adjoint() * &pb)).norm() < 1e-10 * pb.norm());
}
