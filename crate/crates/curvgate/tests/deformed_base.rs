//! A conformally deformed sphere base makes the invariant curvature form
//! non-parallel, exercising the covariant-derivative term nontrivially.
//! On a surface every 2-form is a multiple of the (parallel) volume form,
//! so for the rank-2 bundle `R(X,Y) = h vol(X,Y) J` and
//! `<(D_X R)(X,Y)W, V> = dh(X) vol(X,Y) <JW, V>` exactly: an analytic
//! oracle for the stencil route.

use std::sync::Arc;

use nalgebra::{dvector, DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use curvgate::base::catalog::round_sphere;
use curvgate::base::{BaseManifold, ChartPoint, MetricField};
use curvgate::bundle::{
    covariant_derivative_curvature, BundleSpec, FiberTransition, VerticalCurvatureField,
};
use curvgate::engine::{psi_derivatives_numeric, psi_second_analytic, PsiInput};
use curvgate::warp::{boost_field, build_total_metric, warping_from_field};
use curvgate::StencilConfig;

const AMP: f64 = 0.35;

/// Round sphere conformally rescaled by exp(2 a z) with z the embedding
/// height: chart-independent, with analytic derivatives.
fn stretched_sphere() -> BaseManifold {
    let round = round_sphere(2, 1.0);
    let atlas = round.atlas;
    let metric = move |chart: usize, x: &DVector<f64>| -> DMatrix<f64> {
        let r2 = x.norm_squared();
        let z = height(chart, x);
        DMatrix::identity(2, 2) * (4.0 / (1.0 + r2).powi(2) * (2.0 * AMP * z).exp())
    };
    let metric_deriv = move |chart: usize, x: &DVector<f64>| -> Vec<DMatrix<f64>> {
        let r2 = x.norm_squared();
        let z = height(chart, x);
        let conf = 4.0 / (1.0 + r2).powi(2) * (2.0 * AMP * z).exp();
        (0..2)
            .map(|d| {
                let dz = dheight(chart, x, d);
                let dconf = conf * (-4.0 * x[d] / (1.0 + r2) + 2.0 * AMP * dz);
                DMatrix::identity(2, 2) * dconf
            })
            .collect()
    };
    BaseManifold {
        name: "stretched-s2".into(),
        atlas,
        metric: MetricField::with_deriv(Box::new(metric), Box::new(metric_deriv)),
    }
}

fn height(chart: usize, x: &DVector<f64>) -> f64 {
    let r2 = x.norm_squared();
    let z = (1.0 - r2) / (1.0 + r2);
    if chart == 0 {
        z
    } else {
        -z
    }
}

fn dheight(chart: usize, x: &DVector<f64>, d: usize) -> f64 {
    let denom = (1.0 + x.norm_squared()).powi(2);
    if chart == 0 {
        -4.0 * x[d] / denom
    } else {
        4.0 * x[d] / denom
    }
}

fn j2() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
}

/// Degree-one connection forms over the stretched base (the potential is
/// metric-independent; only the Levi-Civita transports change).
fn o1_over_stretched() -> BundleSpec {
    let base = Arc::new(stretched_sphere());
    let conn = move |_c: usize, x: &DVector<f64>| -> Vec<DMatrix<f64>> {
        let denom = 1.0 + x.norm_squared();
        vec![j2() * (-x[1] / denom), j2() * (x[0] / denom)]
    };
    let conn_deriv = move |_c: usize, x: &DVector<f64>| -> Vec<Vec<DMatrix<f64>>> {
        let denom = 1.0 + x.norm_squared();
        let d2 = denom * denom;
        (0..2)
            .map(|d| {
                let dd = |i: usize| -> DMatrix<f64> {
                    let sign = if i == 0 { -1.0 } else { 1.0 };
                    let comp = if i == 0 { x[1] } else { x[0] };
                    let delta = if (i == 0 && d == 1) || (i == 1 && d == 0) {
                        1.0
                    } else {
                        0.0
                    };
                    j2() * (sign * (delta * denom - 2.0 * comp * x[d]) / d2)
                };
                vec![dd(0), dd(1)]
            })
            .collect()
    };
    let clutch = |x: &DVector<f64>| -> DMatrix<f64> {
        let phi = x[1].atan2(x[0]);
        let (s, c) = phi.sin_cos();
        DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
    };
    BundleSpec::new(
        "o(1)-stretched",
        2,
        base,
        Box::new(conn),
        Some(Box::new(conn_deriv)),
        vec![
            FiberTransition {
                from: 0,
                to: 1,
                map: Box::new(clutch),
            },
            FiberTransition {
                from: 1,
                to: 0,
                map: Box::new(clutch),
            },
        ],
    )
}

#[test]
fn covariant_derivative_matches_conformal_oracle() {
    let b = o1_over_stretched();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut nontrivial = 0;
    for _ in 0..12 {
        let chart = rng.random_range(0..2);
        let x0 = loop {
            let c = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            if c.norm() <= 1.0 {
                break c;
            }
        };
        let p = ChartPoint::new(chart, x0.clone());
        let xv = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
        let yv = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
        let w = dvector![1.0, 0.0];
        let v = dvector![0.3, 0.9];

        let stencil = covariant_derivative_curvature(&b, &p, &xv, &yv, &w, &v, 1e-2).unwrap();

        // oracle: R = h vol (x) J with h = (1/2) exp(-2 a z)
        let z = height(chart, &x0);
        let dh: f64 = (0..2)
            .map(|d| -AMP * (-2.0 * AMP * z).exp() * dheight(chart, &x0, d) * xv[d])
            .sum();
        let r2 = x0.norm_squared();
        let vol_xy =
            4.0 / (1.0 + r2).powi(2) * (2.0 * AMP * z).exp() * (xv[0] * yv[1] - xv[1] * yv[0]);
        let jw_v = (j2() * &w).dot(&v);
        let oracle = dh * vol_xy * jw_v;

        assert!(
            (stencil - oracle).abs() < 1e-6 * oracle.abs().max(1.0),
            "chart {chart}: stencil {stencil} vs oracle {oracle}"
        );
        if oracle.abs() > 1e-3 {
            nontrivial += 1;
        }
    }
    assert!(nontrivial >= 6, "oracle values degenerate: only {nontrivial} nontrivial");
}

#[test]
fn psi_second_routes_agree_with_every_term_active() {
    // nonconstant R_F over the stretched base: all seven terms of the
    // second-derivative formula are nonzero
    let b = Arc::new(o1_over_stretched());
    let rf = Arc::new(
        boost_field(
            curvgate::bundle::catalog::height_field(2, b.base.clone(), 0.7),
            1.5,
        )
        .unwrap(),
    );
    let total = build_total_metric(b.clone(), Arc::new(warping_from_field(rf.clone())), 0.4).unwrap();
    let cfg = StencilConfig::default();

    let inputs = [
        PsiInput {
            p: ChartPoint::new(0, dvector![0.35, -0.2]),
            x: dvector![1.0, 0.3],
            y: dvector![0.2, 0.9],
            u: dvector![0.4, 0.1],
            v: dvector![0.0, 1.0],
            w: dvector![1.0, 0.0],
        },
        PsiInput {
            p: ChartPoint::new(1, dvector![0.5, 0.25]),
            x: dvector![0.7, -0.4],
            y: dvector![0.5, 0.6],
            u: dvector![0.2, 0.5],
            v: dvector![1.0, 0.0],
            w: dvector![0.0, 1.0],
        },
    ];
    for input in &inputs {
        let analytic = psi_second_analytic(b.as_ref(), rf.as_ref(), input, &cfg).unwrap();
        let numeric = psi_derivatives_numeric(&total, input, cfg.psi_step, 1e-3).unwrap();
        let scale = analytic.abs().max(numeric.second.abs()).max(1e-6);
        assert!(
            (analytic - numeric.second).abs() / scale < 1e-3,
            "analytic {analytic} vs stencil {} (est err {:.1e})",
            numeric.second,
            numeric.second_err
        );
        // the covariant-derivative term itself is nonzero here
        let dxr = covariant_derivative_curvature(
            b.as_ref(),
            &input.p,
            &input.x,
            &input.y,
            &input.w,
            &input.v,
            cfg.hessian_step,
        )
        .unwrap();
        assert!(dxr.abs() > 1e-4, "deformation failed to activate the D_X R term");
    }
}

#[test]
fn stretched_base_keeps_gauge_consistency() {
    // the deformed metric changes nothing about the bundle gauge data
    let b = o1_over_stretched();
    let x = dvector![0.9, 0.55];
    let tr = b.base.atlas.transition(0, 1).unwrap();
    let y = (tr.map)(&x);
    let jac = (tr.jacobian)(&x);
    let sigma = b.clutch(0, 1, &x).unwrap();
    let omega_n = b.connection_at(&ChartPoint::new(0, x.clone()));
    let omega_s = b.connection_at(&ChartPoint::new(1, y));
    let h = 1e-5;
    for d in 0..2 {
        let push = jac.column(d);
        let mut lhs = DMatrix::zeros(2, 2);
        for i in 0..2 {
            lhs += &omega_s[i] * push[i];
        }
        let dsigma = {
            let mut xp = x.clone();
            xp[d] += h;
            let mut xm = x.clone();
            xm[d] -= h;
            (b.clutch(0, 1, &xp).unwrap() - b.clutch(0, 1, &xm).unwrap()) / (2.0 * h)
        };
        let rhs = &sigma * &omega_n[d] * sigma.transpose() - dsigma * sigma.transpose();
        assert!((lhs - rhs).abs().max() < 1e-8);
    }
    // vertical curvature fields stay available over the stretched base
    let rf = VerticalCurvatureField::zero(2);
    assert_eq!(rf.rank, 2);
}
