mod common;

use common::*;
use mcomplete_core::rng::{seeded, standard_normal};
use mcomplete_core::solvers::FrsiParams;
use mcomplete_core::{
    apply_t, construct_badx_instance, fejer_slack, fixed_rank_threshold, frsi, gen_synthetic, prox_nuclear,
    soft_threshold, FactoredMatrix, Mat, ObservedMatrix, SolveContext, SvdOptions,
};
use proptest::prelude::*;
use rand::Rng;

fn st_dense(a: &Mat, tau: f64) -> Mat {
    soft_threshold(&FactoredMatrix::from_dense(a), tau).unwrap().to_dense()
}

#[test]
fn soft_threshold_matches_nalgebra() {
    for seed in 0..30u64 {
        let a = gaussian(7 + (seed as usize % 5), 9, seed);
        let tau = 0.3 * seed as f64 / 10.0;
        let got = st_dense(&a, tau);
        let want = na_soft_threshold(&a, tau);
        assert!(got.sub(&want).max_abs() < 1e-11, "seed {seed}");
    }
}

/// ‖S_τ(M) − S_τ(N)‖ ≤ ‖M − N‖ on 200 random pairs up to 40 × 40.
#[test]
fn soft_threshold_is_nonexpansive() {
    let mut rng = seeded(2024);
    for k in 0..200u64 {
        let m = rng.random_range(1..=40);
        let n = rng.random_range(1..=40);
        let a = gaussian(m, n, 10_000 + 2 * k);
        let b = if k % 3 == 0 {
            // nearby pairs exercise the kink at τ
            a.add(&gaussian(m, n, 10_001 + 2 * k).scaled(1e-3))
        } else {
            gaussian(m, n, 10_001 + 2 * k)
        };
        let tau = rng.random_range(0.0..2.0 * (m.max(n) as f64).sqrt());
        let lhs = na_fro(&st_dense(&a, tau).sub(&st_dense(&b, tau)));
        let rhs = na_fro(&a.sub(&b));
        assert!(lhs <= rhs + 1e-10, "pair {k}: {lhs} > {rhs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn soft_threshold_commutes_with_orthogonal_maps(
        m in 1usize..12, n in 1usize..12, tau in 0.0f64..3.0, seed in any::<u64>()
    ) {
        let a = gaussian(m, n, seed);
        let q = na_orthogonal(m, seed ^ 1);
        let w = na_orthogonal(n, seed ^ 2);
        let rotated = from_na(&(&q * to_na(&a) * w.transpose()));
        let lhs = st_dense(&rotated, tau);
        let rhs = from_na(&(&q * to_na(&st_dense(&a, tau)) * w.transpose()));
        prop_assert!(lhs.sub(&rhs).max_abs() <= 1e-10);
    }

    #[test]
    fn apply_t_rank_bound(m in 2usize..20, n in 2usize..20, r in 1usize..5, seed in any::<u64>()) {
        let a = gaussian(m, n, seed);
        let obs = ObservedMatrix::sample_dense(&a, &random_pattern(m, n, 0.5, seed ^ 3)).unwrap();
        let x = low_rank(m, n, m.min(n).min(3), seed ^ 4);
        let (next, rho) = apply_t(&x, &obs, r, &SvdOptions::default()).unwrap();
        prop_assert!(next.rank() <= r);
        prop_assert!(rho >= 0.0);
        prop_assert!(next.orthonormality_error() < 1e-9);
    }
}

#[test]
fn prox_examples() {
    let f = FactoredMatrix::new(Mat::identity(2), vec![4.0, 2.0], Mat::identity(2)).unwrap();
    assert_eq!(prox_nuclear(&f, 1.0, 1.0).unwrap().sigma(), &[3.0, 1.0]);
    let same = prox_nuclear(&f, 1e-300, 1.0).unwrap();
    assert!(same.to_dense().sub(&f.to_dense()).max_abs() <= 1e-15);
    assert!(prox_nuclear(&f, 0.0, 1.0).is_err());
    assert!(prox_nuclear(&f, 1.0, -1.0).is_err());
    assert!(soft_threshold(&f, -1.0).is_err());
}

#[test]
fn exact_ties_are_zeroed() {
    let f = FactoredMatrix::new(Mat::identity(3), vec![3.0, 2.0, 2.0], Mat::identity(3)).unwrap();
    assert_eq!(soft_threshold(&f, 2.0).unwrap().rank(), 1);
    let (x, rho) = fixed_rank_threshold(&f.to_dense(), 2, &SvdOptions::default()).unwrap();
    assert_eq!(rho, 2.0);
    assert_eq!(x.rank(), 1);
}

/// The prox output beats 1,000 random perturbations of itself.
#[test]
fn prox_is_locally_optimal() {
    let (lambda, t) = (0.7, 1.3);
    let m = gaussian(15, 12, 77);
    let z = prox_nuclear(&FactoredMatrix::from_dense(&m), lambda, t).unwrap().to_dense();
    let obj = |x: &Mat| na_fro(&m.sub(x)).powi(2) / (2.0 * t) + lambda * na_nuclear(x);
    let best = obj(&z);
    let mut rng = seeded(78);
    for k in 0..1000u64 {
        let eps = 10f64.powf(rng.random_range(-4.0..0.0));
        let d = gaussian(15, 12, 1000 + k);
        let w = z.add(&d.scaled(eps / na_fro(&d)));
        let v = obj(&w);
        assert!(v > best, "perturbation {k} (eps {eps}): {v} <= {best}");
    }
}

#[test]
fn fixed_rank_step_fixed_point_properties() {
    let svd = SvdOptions::default();
    let (m, n, r) = (25, 20, 3);
    let a = low_rank(m, n, r, 5);
    let ad = a.to_dense();
    let scale = a.frobenius_norm();

    // T(A) = A with ρ = 0 when A is fully observed
    let full = ObservedMatrix::fully_observed(&ad);
    let (x, rho) = apply_t(&a, &full, r, &svd).unwrap();
    assert!(rho <= 1e-12 * scale);
    assert!(na_fro(&x.to_dense().sub(&ad)) <= 1e-10 * scale);

    let obs = ObservedMatrix::sample_dense(&ad, &random_pattern(m, n, 0.4, 6)).unwrap();

    // any B of rank ≤ r agreeing with A on Ω is fixed; A itself is one
    let (x, _) = apply_t(&a, &obs, r, &svd).unwrap();
    assert!(na_fro(&x.to_dense().sub(&ad)) <= 1e-8);
    let (x, _) = apply_t(&a, &obs, r + 2, &svd).unwrap();
    assert!(na_fro(&x.to_dense().sub(&ad)) <= 1e-8);

    // T(P_Ω^⊥(A)) = A
    let off = ad.sub(&dense_project(&ad, &obs));
    let (x, _) = apply_t(&FactoredMatrix::from_dense(&off), &obs, r, &svd).unwrap();
    assert!(na_fro(&x.to_dense().sub(&ad)) <= 1e-9 * scale);

    // T(0) = T(P_Ω(A))
    let (x0, rho0) = apply_t(&FactoredMatrix::zeros(m, n), &obs, r, &svd).unwrap();
    let on = FactoredMatrix::from_dense(&dense_project(&ad, &obs));
    let (x1, rho1) = apply_t(&on, &obs, r, &svd).unwrap();
    assert!((rho0 - rho1).abs() <= 1e-10 * rho0.max(1.0));
    assert!(na_fro(&x0.to_dense().sub(&x1.to_dense())) <= 1e-9 * scale);

    // min(m, n) ≤ r: ρ = 0 and Y is kept
    let tiny = gaussian(3, 5, 8);
    let tobs = ObservedMatrix::sample_dense(&tiny, &random_pattern(3, 5, 0.3, 9)).unwrap();
    let (x, rho) = apply_t(&FactoredMatrix::zeros(3, 5), &tobs, 3, &svd).unwrap();
    assert_eq!(rho, 0.0);
    assert!(x.to_dense().sub(&tobs.to_dense()).max_abs() < 1e-12);
}

/// Random rank-≤ r matrices that agree with the samples are fixed points:
/// B = A + E where E vanishes on Ω and keeps the rank at r.
#[test]
fn fixed_points_beyond_the_ground_truth() {
    let svd = SvdOptions::default();
    for seed in 0..10u64 {
        let (m, n, r) = (18, 14, 2);
        // rows 0..6 fully observed, the rest unobserved in columns 0..4
        let l = gaussian(m, r, seed);
        let rt = gaussian(n, r, seed + 50);
        let mut l2 = l.clone();
        for i in 6..m {
            for c in 0..r {
                l2.col_mut(c)[i] += standard_normal(&mut seeded(seed * 100 + i as u64 * 7 + c as u64));
            }
        }
        let a = FactoredMatrix::from_outer(&l, &rt).unwrap();
        let b = FactoredMatrix::from_outer(&l2, &rt).unwrap();
        let pos: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, _)| i < 6).collect();
        let obs = ObservedMatrix::sample_dense(&a.to_dense(), &pos).unwrap();
        let (x, _) = apply_t(&b, &obs, r, &svd).unwrap();
        assert!(na_fro(&x.to_dense().sub(&b.to_dense())) <= 1e-8, "seed {seed}");
    }
}

#[test]
fn badx_examples() {
    let svd = SvdOptions::default();
    let inst = construct_badx_instance(4, 4, &[1.0], 2.0, &[0.5, 0.5], 1).unwrap();
    let shifted = inst.x.to_dense().sub(&inst.gradient);
    assert!(shifted.sub(&inst.shifted.to_dense()).max_abs() < 1e-12);
    let (t, rho) = fixed_rank_threshold(&shifted, 1, &svd).unwrap();
    assert!((rho - 2.0).abs() < 1e-12);
    assert!(na_fro(&t.to_dense().sub(&inst.x.to_dense())) <= 1e-12);

    assert!(construct_badx_instance(4, 4, &[1.0], 0.4, &[0.5], 1).is_err());
    assert!(construct_badx_instance(3, 3, &[1.0, 1.0, 1.0], 1.0, &[], 1).is_err());
    assert!(construct_badx_instance(4, 4, &[1.0], 0.0, &[], 1).is_err());

    let mut rng = seeded(11);
    let perp: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
    let inst = construct_badx_instance(8, 6, &[3.0, 1.5], 1.0, &perp, 12).unwrap();
    // dense evaluation with nalgebra's SVD
    let shifted = inst.x.to_dense().sub(&inst.gradient);
    let s = na_singular_values(&shifted);
    let t = na_soft_threshold(&shifted, s[2]);
    assert!(na_fro(&t.sub(&inst.x.to_dense())) <= 1e-10);
    let (t2, _) = fixed_rank_threshold(&shifted, 2, &svd).unwrap();
    assert!(na_fro(&t2.to_dense().sub(&inst.x.to_dense())) <= 1e-10);
}

#[test]
fn fejer_slack_examples() {
    let a = low_rank(10, 8, 2, 1);
    assert!(fejer_slack(&a, &a, &a, 2, 0.0).unwrap().abs() < 1e-12);
    let x = low_rank(10, 8, 2, 2);
    let s = fejer_slack(&x, &x, &a, 2, 0.3).unwrap();
    assert!((s - 2f64.sqrt() * 0.3).abs() < 1e-12);
    assert!(fejer_slack(&x, &low_rank(9, 8, 2, 3), &a, 2, 0.3).is_err());
}

/// FRSI on (n = 60, r = 3, 30% missing): the slack is nonnegative at every
/// step, evaluated densely and by the solver's monitor.
#[test]
fn fejer_inequality_along_frsi() {
    let inst = gen_synthetic(60, 3, 0.3, 4).unwrap();
    let truth = inst.ground_truth.to_dense();
    let svd = SvdOptions::default();
    let mut x = FactoredMatrix::zeros(60, 60);
    let mut dense_slacks = Vec::new();
    for _ in 0..40 {
        let (next, rho) = apply_t(&x, &inst.obs, 3, &svd).unwrap();
        let slack = na_fro(&x.to_dense().sub(&truth)) + 3f64.sqrt() * rho - na_fro(&next.to_dense().sub(&truth));
        assert!(slack >= -1e-8, "{slack}");
        dense_slacks.push(slack);
        x = next;
    }

    let ctx = SolveContext::default().with_ground_truth(&inst.ground_truth);
    let res = frsi(&inst.obs, &FrsiParams { r: 3, eps_1: 1e-12, it_max: 40 }, &ctx).unwrap();
    assert!(!res.trace.is_empty());
    for (rec, dense) in res.trace.records.iter().zip(&dense_slacks) {
        let s = rec.fejer_slack.expect("monitor active with ground truth");
        assert!(s >= -1e-8);
        assert!((s - dense).abs() <= 1e-8 * (1.0 + dense.abs()), "iteration {}: {s} vs {dense}", rec.iteration);
    }
}
