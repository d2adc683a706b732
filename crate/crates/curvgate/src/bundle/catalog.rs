//! Bundle catalog addressable by string id.
//!
//! Conventions (fixed here, asserted by the gauge-consistency and winding
//! tests):
//! - `o(n)-s2`: rank-2 bundle over the round 2-sphere with the invariant
//!   connection `omega = n (-x2 dx1 + x1 dx2)/(1 + |x|^2) J` in both
//!   stereographic charts; clutching is the rotation by `n * atan2(x2,x1)`.
//!   The Chern integral of this entry is `n` with `J` the +90-degree
//!   rotation and the base oriented by chart-n coordinates.
//! - `ts2`: the tangent bundle of the round 2-sphere with its Levi-Civita
//!   connection in conformal orthonormal frames; the clutch is the
//!   normalized coordinate-frame change. Its connection form coincides
//!   with the `o(-2)-s2` entry and its Chern integral is -2 in the same
//!   orientation convention.
//! - `hopf-s4`: rank-4 quaternionic bundle over the round 4-sphere with
//!   the standard instanton connection `omega = Im(conj(q) dq)/(1+|q|^2)`
//!   acting by left quaternion multiplication, in both charts; the clutch
//!   is left multiplication by `q/|q|`.
//! - `trivial-k-<base>`: flat rank-k bundles (identity clutch, zero form).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::base::catalog::{flat_torus, round_sphere};
use crate::base::{BaseManifold, ChartPoint};
use crate::tensor::CurvatureTensor;
use crate::{Error, Result};

use super::{BundleSpec, FiberTransition, VerticalCurvatureField};

fn rot2(angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Flat rank-k bundle: zero connection form, identity clutches over every
/// base transition.
pub fn trivial_bundle(rank: usize, base: Arc<BaseManifold>) -> BundleSpec {
    let m = base.dim();
    let clutches = base
        .atlas
        .transitions
        .iter()
        .map(|t| FiberTransition {
            from: t.from,
            to: t.to,
            map: Box::new(move |_: &DVector<f64>| DMatrix::identity(rank, rank)) as Box<super::ClutchFn>,
        })
        .collect();
    let id = format!("trivial-{rank}-{}", if base.name.contains("torus") { "torus" } else { "s2" });
    BundleSpec::new(
        id,
        rank,
        base,
        Box::new(move |_, _| vec![DMatrix::zeros(rank, rank); m]),
        Some(Box::new(move |_, _| {
            vec![vec![DMatrix::zeros(rank, rank); m]; m]
        })),
        clutches,
    )
}

fn j2() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
}

/// Degree-n rank-2 bundle over the round 2-sphere with the invariant
/// metric connection (the curvature form is a constant multiple of the
/// round area form, hence parallel).
pub fn o_n_over_sphere(n: i32, radius: f64) -> BundleSpec {
    let base = Arc::new(round_sphere(2, radius));
    let nf = n as f64;
    let conn = move |_c: usize, x: &DVector<f64>| -> Vec<DMatrix<f64>> {
        let denom = 1.0 + x.norm_squared();
        vec![j2() * (-nf * x[1] / denom), j2() * (nf * x[0] / denom)]
    };
    let conn_deriv = move |_c: usize, x: &DVector<f64>| -> Vec<Vec<DMatrix<f64>>> {
        let denom = 1.0 + x.norm_squared();
        let d2 = denom * denom;
        // out[d][i] = d_d omega_i
        (0..2)
            .map(|d| {
                let dd = |i: usize| -> DMatrix<f64> {
                    let sign = if i == 0 { -nf } else { nf };
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
    let clutch_ns = move |x: &DVector<f64>| rot2(nf * x[1].atan2(x[0]));
    let clutch_sn = move |x: &DVector<f64>| rot2(nf * x[1].atan2(x[0]));
    BundleSpec::new(
        format!("o({n})-s2"),
        2,
        base,
        Box::new(conn),
        Some(Box::new(conn_deriv)),
        vec![
            FiberTransition {
                from: 0,
                to: 1,
                map: Box::new(clutch_ns),
            },
            FiberTransition {
                from: 1,
                to: 0,
                map: Box::new(clutch_sn),
            },
        ],
    )
}

/// Tangent bundle of the round 2-sphere with its Levi-Civita connection,
/// expressed in the conformal orthonormal frames of the two charts. The
/// connection form equals the `o(-2)` form; the clutch is the normalized
/// frame change `conj_reflection * (I - 2 xhat xhat^T)`.
pub fn tangent_sphere(radius: f64) -> BundleSpec {
    let base = Arc::new(round_sphere(2, radius));
    let conn = move |_c: usize, x: &DVector<f64>| -> Vec<DMatrix<f64>> {
        let denom = 1.0 + x.norm_squared();
        vec![j2() * (2.0 * x[1] / denom), j2() * (-2.0 * x[0] / denom)]
    };
    let conn_deriv = move |_c: usize, x: &DVector<f64>| -> Vec<Vec<DMatrix<f64>>> {
        let denom = 1.0 + x.norm_squared();
        let d2 = denom * denom;
        (0..2)
            .map(|d| {
                let dd = |i: usize| -> DMatrix<f64> {
                    let sign = if i == 0 { 2.0 } else { -2.0 };
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
    let frame_clutch = |x: &DVector<f64>| -> DMatrix<f64> {
        let xhat = x / x.norm();
        let refl = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        refl * (DMatrix::identity(2, 2) - &xhat * xhat.transpose() * 2.0)
    };
    BundleSpec::new(
        "ts2",
        2,
        base,
        Box::new(conn),
        Some(Box::new(conn_deriv)),
        vec![
            FiberTransition {
                from: 0,
                to: 1,
                map: Box::new(frame_clutch),
            },
            FiberTransition {
                from: 1,
                to: 0,
                map: Box::new(frame_clutch),
            },
        ],
    )
}

// quaternion helpers for the instanton connection, q = x1 + x2 i + x3 j + x4 k

fn qmul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn qconj(a: [f64; 4]) -> [f64; 4] {
    [a[0], -a[1], -a[2], -a[3]]
}

fn qunit(i: usize) -> [f64; 4] {
    let mut e = [0.0; 4];
    e[i] = 1.0;
    e
}

/// Matrix of left multiplication by `u` on the quaternions as R^4.
fn left_mult(u: [f64; 4]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for j in 0..4 {
        let col = qmul(u, qunit(j));
        for i in 0..4 {
            m[(i, j)] = col[i];
        }
    }
    m
}

fn imag(a: [f64; 4]) -> [f64; 4] {
    [0.0, a[1], a[2], a[3]]
}

/// Quaternionic Hopf bundle over the round 4-sphere with the standard
/// instanton connection; the same self-symmetric form serves both charts.
pub fn hopf_over_sphere4(radius: f64) -> BundleSpec {
    let base = Arc::new(round_sphere(4, radius));
    let conn = move |_c: usize, x: &DVector<f64>| -> Vec<DMatrix<f64>> {
        let q = [x[0], x[1], x[2], x[3]];
        let denom = 1.0 + x.norm_squared();
        (0..4)
            .map(|a| left_mult(imag(qmul(qconj(q), qunit(a)))) / denom)
            .collect()
    };
    let conn_deriv = move |_c: usize, x: &DVector<f64>| -> Vec<Vec<DMatrix<f64>>> {
        let q = [x[0], x[1], x[2], x[3]];
        let denom = 1.0 + x.norm_squared();
        (0..4)
            .map(|b| {
                (0..4)
                    .map(|a| {
                        let lead = left_mult(imag(qmul(qconj(qunit(b)), qunit(a)))) / denom;
                        let tail = left_mult(imag(qmul(qconj(q), qunit(a))))
                            * (2.0 * x[b] / (denom * denom));
                        lead - tail
                    })
                    .collect()
            })
            .collect()
    };
    let clutch = |x: &DVector<f64>| -> DMatrix<f64> {
        let q = [x[0], x[1], x[2], x[3]];
        let n = x.norm();
        left_mult([q[0] / n, q[1] / n, q[2] / n, q[3] / n])
    };
    BundleSpec::new(
        "hopf-s4",
        4,
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

/// Vertical curvature field `z(p) * R_1` scaled by the embedding height of
/// a sphere base; nonconstant along the base, gauge-coherent because the
/// unit constant-curvature pattern is orthogonally invariant.
pub fn height_field(rank: usize, base: Arc<BaseManifold>, amplitude: f64) -> VerticalCurvatureField {
    let pattern = CurvatureTensor::constant_curvature(rank, 1.0).expect("rank >= 2");
    let base_f = base.clone();
    let f = move |p: &ChartPoint| -> f64 {
        amplitude * crate::base::catalog::sphere_height(base_f.as_ref(), p)
    };
    let grad = move |p: &ChartPoint| -> DVector<f64> {
        // d_d z in chart coords: -4 rho x_d/(1+r^2)^2 on chart n, +4 rho y_d/(1+s^2)^2 on chart s
        let m = p.coords.len();
        let denom = (1.0 + p.coords.norm_squared()).powi(2);
        let rho = {
            let e = base.atlas.embedding.as_ref().expect("sphere base");
            e(0, &DVector::zeros(m)).norm()
        };
        let sign = if p.chart == 0 { -4.0 } else { 4.0 };
        DVector::from_iterator(m, (0..m).map(|d| amplitude * sign * rho * p.coords[d] / denom))
    };
    VerticalCurvatureField::scalar_profile("height", pattern, Box::new(f), Box::new(grad))
}

/// All catalog ids, as accepted by [`by_id`].
pub fn list() -> Vec<String> {
    let mut ids = vec![
        "trivial-2-torus".to_string(),
        "trivial-3-torus".to_string(),
        "trivial-2-s2".to_string(),
    ];
    for n in -2..=3 {
        ids.push(format!("o({n})-s2"));
    }
    ids.push("ts2".to_string());
    ids.push("hopf-s4".to_string());
    ids
}

/// Bundle lookup for the CLI config layer. Sphere bases use radius 1.
pub fn by_id(id: &str) -> Result<BundleSpec> {
    match id {
        "trivial-2-torus" => Ok(trivial_bundle(2, Arc::new(flat_torus()))),
        "trivial-3-torus" => Ok(trivial_bundle(3, Arc::new(flat_torus()))),
        "trivial-2-s2" => Ok(trivial_bundle(2, Arc::new(round_sphere(2, 1.0)))),
        "ts2" => Ok(tangent_sphere(1.0)),
        "hopf-s4" => Ok(hopf_over_sphere4(1.0)),
        other => {
            if let Some(rest) = other.strip_prefix("o(").and_then(|s| s.strip_suffix(")-s2")) {
                let n: i32 = rest
                    .parse()
                    .map_err(|_| Error::Config(format!("bad bundle degree in id {other:?}")))?;
                if (-2..=3).contains(&n) {
                    return Ok(o_n_over_sphere(n, 1.0));
                }
                return Err(Error::Config(format!(
                    "bundle degree {n} outside cataloged range -2..=3"
                )));
            }
            Err(Error::Config(format!("unknown catalog id {other:?}")))
        }
    }
}
