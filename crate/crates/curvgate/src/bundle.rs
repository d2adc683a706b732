//! Euclidean vector bundles with metric-compatible connections.
//!
//! Fiber trivializations are kept orthonormal, so compatibility of the
//! connection is plain skew-symmetry of the per-direction matrices
//! `omega(d_i)`, and fiber inner products are Euclidean in every chart.
//! Connection curvature comes from the structure equation
//! `R(X,Y) = d omega(X,Y) + [omega(X), omega(Y)]`, with coordinate
//! derivatives of `omega` supplied analytically by the catalog or by
//! central differences as the fallback.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::base::{default_steps, BaseManifold, ChartPoint, GeodesicState};
use crate::tensor::CurvatureTensor;
use crate::{Error, Result};

pub type ConnectionFn = dyn Fn(usize, &DVector<f64>) -> Vec<DMatrix<f64>> + Send + Sync;
pub type ConnectionDerivFn = dyn Fn(usize, &DVector<f64>) -> Vec<Vec<DMatrix<f64>>> + Send + Sync;
pub type ClutchFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;
pub type ScalarFieldFn = dyn Fn(&ChartPoint) -> f64 + Send + Sync;
pub type GradientFn = dyn Fn(&ChartPoint) -> DVector<f64> + Send + Sync;
type FieldFn = dyn Fn(&ChartPoint) -> CurvatureTensor + Send + Sync;
type FieldDerivFn = dyn Fn(&ChartPoint) -> Vec<CurvatureTensor> + Send + Sync;

/// Fiber-trivialization change on a chart overlap: `v_to = map(x) v_from`
/// with `map(x)` orthogonal.
pub struct FiberTransition {
    pub from: usize,
    pub to: usize,
    pub map: Box<ClutchFn>,
}

/// A rank-k Euclidean bundle over a cataloged base, described by
/// per-chart connection-form matrices and clutching maps on overlaps.
pub struct BundleSpec {
    pub id: String,
    pub rank: usize,
    pub base: Arc<BaseManifold>,
    connection: Box<ConnectionFn>,
    connection_deriv: Option<Box<ConnectionDerivFn>>,
    pub clutches: Vec<FiberTransition>,
    /// Rank-2 bundles carry the 90-degree rotation J in the oriented frame.
    pub oriented_rank2: bool,
}

impl BundleSpec {
    pub fn new(
        id: impl Into<String>,
        rank: usize,
        base: Arc<BaseManifold>,
        connection: Box<ConnectionFn>,
        connection_deriv: Option<Box<ConnectionDerivFn>>,
        clutches: Vec<FiberTransition>,
    ) -> Self {
        let rank2 = rank == 2;
        BundleSpec {
            id: id.into(),
            rank,
            base,
            connection,
            connection_deriv,
            clutches,
            oriented_rank2: rank2,
        }
    }

    /// Connection-form matrices `omega(d_i)` at a point, one per base
    /// coordinate direction.
    pub fn connection_at(&self, p: &ChartPoint) -> Vec<DMatrix<f64>> {
        (self.connection)(p.chart, &p.coords)
    }

    pub fn has_analytic_deriv(&self) -> bool {
        self.connection_deriv.is_some()
    }

    /// `d_d omega_i` as `out[d][i]`, analytic when available.
    pub fn connection_deriv_at(&self, p: &ChartPoint, h: f64) -> Vec<Vec<DMatrix<f64>>> {
        if let Some(cd) = &self.connection_deriv {
            return cd(p.chart, &p.coords);
        }
        self.connection_deriv_at_fd(p, h)
    }

    pub fn connection_deriv_at_fd(&self, p: &ChartPoint, h: f64) -> Vec<Vec<DMatrix<f64>>> {
        let m = self.base.dim();
        let mut out = Vec::with_capacity(m);
        for d in 0..m {
            let shifted = |t: f64| {
                let mut x = p.coords.clone();
                x[d] += t;
                (self.connection)(p.chart, &x)
            };
            let (cp, cm, fp, fm) = (shifted(h), shifted(-h), shifted(h / 2.0), shifted(-h / 2.0));
            out.push(
                (0..m)
                    .map(|i| {
                        let coarse = (&cp[i] - &cm[i]) / (2.0 * h);
                        let fine = (&fp[i] - &fm[i]) / h;
                        (fine * 4.0 - coarse) / 3.0
                    })
                    .collect(),
            );
        }
        out
    }

    /// `omega(xdir)` contracted against a base tangent vector.
    pub fn connection_applied(&self, p: &ChartPoint, xdir: &DVector<f64>) -> DMatrix<f64> {
        let omega = self.connection_at(p);
        let mut out = DMatrix::zeros(self.rank, self.rank);
        for (i, om) in omega.iter().enumerate() {
            out += om * xdir[i];
        }
        out
    }

    pub fn clutch(&self, from: usize, to: usize, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.clutches
            .iter()
            .find(|c| c.from == from && c.to == to)
            .map(|c| (c.map)(x))
            .ok_or_else(|| Error::Domain(format!("no fiber transition from chart {from} to {to}")))
    }

    /// The almost-complex structure on oriented rank-2 fibers.
    pub fn j_matrix(&self) -> Result<DMatrix<f64>> {
        if !self.oriented_rank2 {
            return Err(Error::Structural(format!(
                "bundle {} is not an oriented rank-2 bundle",
                self.id
            )));
        }
        Ok(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]))
    }
}

/// Curvature matrices `F_ij = d_i omega_j - d_j omega_i + [omega_i, omega_j]`
/// for all coordinate pairs; `out[i][j]` is k x k and antisymmetric in (i,j).
pub fn curvature_matrices(b: &BundleSpec, p: &ChartPoint, h: f64) -> Vec<Vec<DMatrix<f64>>> {
    let m = b.base.dim();
    let omega = b.connection_at(p);
    let domega = b.connection_deriv_at(p, h);
    let mut out = vec![vec![DMatrix::zeros(b.rank, b.rank); m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let f = &domega[i][j] - &domega[j][i] + &omega[i] * &omega[j] - &omega[j] * &omega[i];
            out[j][i] = -&f;
            out[i][j] = f;
        }
    }
    out
}

/// `R_nabla(X,Y)` as a k x k matrix on the fiber at `p`.
pub fn curvature_form(
    b: &BundleSpec,
    p: &ChartPoint,
    x: &DVector<f64>,
    y: &DVector<f64>,
    h: f64,
) -> DMatrix<f64> {
    let m = b.base.dim();
    let f = curvature_matrices(b, p, h);
    let mut out = DMatrix::zeros(b.rank, b.rank);
    for i in 0..m {
        for j in 0..m {
            if i != j {
                out += &f[i][j] * (x[i] * y[j]);
            }
        }
    }
    out
}

/// The extension `R_nabla(W,V)X` to fiber arguments: the base tangent
/// vector defined by `<R(W,V)X, Y>_gSigma = <R(X,Y)W, V>` for all `Y`,
/// solved through the base metric.
pub fn curvature_adjoint(
    b: &BundleSpec,
    p: &ChartPoint,
    w: &DVector<f64>,
    v: &DVector<f64>,
    x: &DVector<f64>,
    h: f64,
) -> Result<DVector<f64>> {
    let m = b.base.dim();
    let f = curvature_matrices(b, p, h);
    let mut rhs = DVector::zeros(m);
    for j in 0..m {
        // <R(X, e_j) W, V>
        let mut mat = DMatrix::zeros(b.rank, b.rank);
        for i in 0..m {
            if i != j {
                mat += &f[i][j] * x[i];
            }
        }
        rhs[j] = (mat * w).dot(v);
    }
    let g = b.base.metric_at(p);
    g.try_inverse().map(|gi| gi * rhs).ok_or(Error::Numerical {
        msg: "base metric not invertible in curvature adjoint".into(),
        condition: f64::INFINITY,
    })
}

/// Result of transporting data along a base geodesic: the geodesic state
/// (with Levi-Civita-parallel frame) plus connection-parallel fiber vectors.
#[derive(Debug, Clone)]
pub struct BundleTransport {
    pub state: GeodesicState,
    pub fiber: Vec<DVector<f64>>,
}

/// Integrates the base geodesic from `(p, velocity)` carrying `base_frame`
/// by Levi-Civita transport and `fiber_vecs` by connection transport
/// (`W' + omega(gamma') W = 0`), for time `t` (sign allowed).
pub fn bundle_transport(
    b: &BundleSpec,
    p: &ChartPoint,
    velocity: &DVector<f64>,
    base_frame: &[DVector<f64>],
    fiber_vecs: &[DVector<f64>],
    t: f64,
    steps: usize,
) -> Result<BundleTransport> {
    let steps = steps.max(1);
    let sign = if t < 0.0 { -1.0 } else { 1.0 };
    let dt = t.abs() / steps as f64;
    let mut chart = p.chart;
    let mut x = p.coords.clone();
    let mut v = velocity * sign;
    let mut frame: Vec<DVector<f64>> = base_frame.to_vec();
    let mut fiber: Vec<DVector<f64>> = fiber_vecs.to_vec();
    let hstep = crate::StencilConfig::default().base_step;

    for _ in 0..steps {
        type Slope = (DVector<f64>, DVector<f64>, Vec<DVector<f64>>, Vec<DVector<f64>>);
        let deriv = |x: &DVector<f64>,
                     v: &DVector<f64>,
                     frame: &[DVector<f64>],
                     fiber: &[DVector<f64>]|
         -> Result<Slope> {
            let cp = ChartPoint::new(chart, x.clone());
            let gamma = crate::base::christoffel(b.base.as_ref(), &cp, hstep)?;
            let dim = x.len();
            let mut dv = DVector::zeros(dim);
            for k in 0..dim {
                dv[k] = -v.dot(&(&gamma[k] * v));
            }
            let dframe = frame
                .iter()
                .map(|f| {
                    let mut df = DVector::zeros(dim);
                    for k in 0..dim {
                        df[k] = -v.dot(&(&gamma[k] * f));
                    }
                    df
                })
                .collect();
            let om = b.connection_applied(&cp, v);
            let dfiber = fiber.iter().map(|w| -(&om * w)).collect();
            Ok((v.clone(), dv, dframe, dfiber))
        };

        let (k1x, k1v, k1f, k1w) = deriv(&x, &v, &frame, &fiber)?;
        let half = dt / 2.0;
        let add = |a: &[DVector<f64>], b: &[DVector<f64>], s: f64| -> Vec<DVector<f64>> {
            a.iter().zip(b).map(|(ai, bi)| ai + bi * s).collect()
        };
        let (k2x, k2v, k2f, k2w) = deriv(
            &(&x + &k1x * half),
            &(&v + &k1v * half),
            &add(&frame, &k1f, half),
            &add(&fiber, &k1w, half),
        )?;
        let (k3x, k3v, k3f, k3w) = deriv(
            &(&x + &k2x * half),
            &(&v + &k2v * half),
            &add(&frame, &k2f, half),
            &add(&fiber, &k2w, half),
        )?;
        let (k4x, k4v, k4f, k4w) = deriv(
            &(&x + &k3x * dt),
            &(&v + &k3v * dt),
            &add(&frame, &k3f, dt),
            &add(&fiber, &k3w, dt),
        )?;
        x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (dt / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
        for i in 0..frame.len() {
            frame[i] += (&k1f[i] + &k2f[i] * 2.0 + &k3f[i] * 2.0 + &k4f[i]) * (dt / 6.0);
        }
        for i in 0..fiber.len() {
            fiber[i] += (&k1w[i] + &k2w[i] * 2.0 + &k3w[i] * 2.0 + &k4w[i]) * (dt / 6.0);
        }

        // chart switch carries base data through the Jacobian and fiber
        // data through the clutch
        if let Some(limit) = b.base.atlas.charts[chart].switch_radius {
            if x.norm() > limit {
                let tr = b
                    .base
                    .atlas
                    .transitions
                    .iter()
                    .find(|t| t.from == chart)
                    .ok_or_else(|| {
                        Error::Domain(format!("trajectory left chart {chart} with no transition"))
                    })?;
                let jac = (tr.jacobian)(&x);
                let sigma = b.clutch(chart, tr.to, &x)?;
                v = &jac * v;
                for f in &mut frame {
                    *f = &jac * &*f;
                }
                for w in &mut fiber {
                    *w = &sigma * &*w;
                }
                x = (tr.map)(&x);
                chart = tr.to;
            }
        }
    }

    Ok(BundleTransport {
        state: GeodesicState {
            position: ChartPoint::new(chart, x),
            velocity: v * sign,
            frame,
        },
        fiber,
    })
}

/// Connection-parallel transport of fiber vectors along the base geodesic
/// through `(p, velocity)`. Compatibility keeps fiber inner products
/// constant along the way.
pub fn nabla_transport(
    b: &BundleSpec,
    p: &ChartPoint,
    velocity: &DVector<f64>,
    fiber_vecs: &[DVector<f64>],
    t: f64,
    steps: usize,
) -> Result<BundleTransport> {
    bundle_transport(b, p, velocity, &[], fiber_vecs, t, steps)
}

/// `<(D_X R_nabla)(X,Y) W, V>`: derivative of `<R(X_t,Y_t)W_t,V_t>` at
/// t = 0 along the base geodesic through `(p, x)`, with X_t, Y_t
/// Levi-Civita-parallel and W_t, V_t connection-parallel.
pub fn covariant_derivative_curvature(
    b: &BundleSpec,
    p: &ChartPoint,
    x: &DVector<f64>,
    y: &DVector<f64>,
    w: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> Result<f64> {
    let value_at = |t: f64| -> Result<f64> {
        let tr = bundle_transport(
            b,
            p,
            x,
            std::slice::from_ref(y),
            &[w.clone(), v.clone()],
            t,
            default_steps(t),
        )?;
        let xt = &tr.state.velocity;
        let yt = &tr.state.frame[0];
        let f = curvature_form(
            b,
            &tr.state.position,
            xt,
            yt,
            crate::StencilConfig::default().base_step,
        );
        Ok((f * &tr.fiber[0]).dot(&tr.fiber[1]))
    };
    let (p2, p1, m1, m2) = (
        value_at(2.0 * h)?,
        value_at(h)?,
        value_at(-h)?,
        value_at(-2.0 * h)?,
    );
    Ok((-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h))
}

/// Vertical curvature tensor field: a curvature-symmetric rank-4 tensor on
/// the fiber at every base point, in the chart trivialization. Scalar
/// curvature data (`k_F` and friends) is read through connection-parallel
/// transport of the fiber arguments.
pub struct VerticalCurvatureField {
    pub rank: usize,
    pub name: String,
    eval: Box<FieldFn>,
    deriv: Option<Box<FieldDerivFn>>,
}

impl VerticalCurvatureField {
    pub fn zero(rank: usize) -> Self {
        VerticalCurvatureField {
            rank,
            name: "zero".into(),
            eval: Box::new(move |_| CurvatureTensor::zeros(rank)),
            deriv: Some(Box::new(move |p| {
                vec![CurvatureTensor::zeros(rank); p.coords.len()]
            })),
        }
    }

    /// Base-independent tensor. Gauge-coherent across charts for
    /// orthogonally invariant tensors such as the constant-curvature family.
    pub fn constant(tensor: CurvatureTensor) -> Self {
        let rank = tensor.dim();
        VerticalCurvatureField {
            rank,
            name: "constant".into(),
            eval: Box::new(move |_| tensor.clone()),
            deriv: Some(Box::new(move |p| {
                vec![CurvatureTensor::zeros(rank); p.coords.len()]
            })),
        }
    }

    /// `f(p) * pattern` for a scalar field with analytic gradient.
    pub fn scalar_profile(
        name: impl Into<String>,
        pattern: CurvatureTensor,
        f: Box<ScalarFieldFn>,
        grad_f: Box<GradientFn>,
    ) -> Self {
        let rank = pattern.dim();
        let pattern_d = pattern.clone();
        VerticalCurvatureField {
            rank,
            name: name.into(),
            eval: Box::new(move |p| pattern.scale(f(p))),
            deriv: Some(Box::new(move |p| {
                let g = grad_f(p);
                (0..p.coords.len()).map(|d| pattern_d.scale(g[d])).collect()
            })),
        }
    }

    /// Pointwise sum of two fields over the same bundle.
    pub fn sum(self, other: VerticalCurvatureField) -> Result<VerticalCurvatureField> {
        if self.rank != other.rank {
            return Err(Error::Structural(format!(
                "rank mismatch in field sum: {} vs {}",
                self.rank, other.rank
            )));
        }
        let rank = self.rank;
        let name = format!("{}+{}", self.name, other.name);
        let (ea, eb) = (self.eval, other.eval);
        let deriv = match (self.deriv, other.deriv) {
            (Some(da), Some(db)) => Some(Box::new(move |p: &ChartPoint| {
                let (xs, ys) = (da(p), db(p));
                xs.iter()
                    .zip(&ys)
                    .map(|(a, b)| a.add(b).expect("same rank"))
                    .collect()
            }) as Box<FieldDerivFn>),
            _ => None,
        };
        Ok(VerticalCurvatureField {
            rank,
            name,
            eval: Box::new(move |p| ea(p).add(&eb(p)).expect("same rank")),
            deriv,
        })
    }

    pub fn at(&self, p: &ChartPoint) -> CurvatureTensor {
        (self.eval)(p)
    }

    pub fn has_analytic_deriv(&self) -> bool {
        self.deriv.is_some()
    }

    /// Coordinate derivatives of the tensor entries in the trivialization
    /// (not a covariant derivative); feeds the analytic metric-derivative
    /// assembly of built total metrics.
    pub fn deriv_at(&self, p: &ChartPoint, h: f64) -> Vec<CurvatureTensor> {
        if let Some(d) = &self.deriv {
            return d(p);
        }
        let dim = p.coords.len();
        (0..dim)
            .map(|d| {
                let at = |t: f64| {
                    let mut x = p.coords.clone();
                    x[d] += t;
                    (self.eval)(&ChartPoint::new(p.chart, x))
                };
                let (cp, cm, fp, fm) = (at(h), at(-h), at(h / 2.0), at(-h / 2.0));
                let entries: Vec<f64> = cp
                    .entries()
                    .iter()
                    .zip(cm.entries())
                    .zip(fp.entries().iter().zip(fm.entries()))
                    .map(|((a, b), (c, e))| {
                        let coarse = (a - b) / (2.0 * h);
                        let fine = (c - e) / h;
                        (4.0 * fine - coarse) / 3.0
                    })
                    .collect();
                CurvatureTensor::project(self.rank, &entries).0
            })
            .collect()
    }

    /// `k_F(w,v)` at `p`.
    pub fn k_f(&self, p: &ChartPoint, w: &DVector<f64>, v: &DVector<f64>) -> f64 {
        self.at(p).sectional(w, v)
    }
}

/// `k_F(W,V)` at `p` together with its hessian in the base direction `x`:
/// the second derivative along the base geodesic of the fiber curvature
/// read on connection-parallel transports of W and V.
pub fn kf_and_hessian(
    b: &BundleSpec,
    rf: &VerticalCurvatureField,
    p: &ChartPoint,
    x: &DVector<f64>,
    w: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> Result<(f64, f64)> {
    let value = rf.k_f(p, w, v);
    let at = |t: f64| -> Result<f64> {
        if t == 0.0 {
            return Ok(value);
        }
        let tr = nabla_transport(b, p, x, &[w.clone(), v.clone()], t, default_steps(t))?;
        Ok(rf.k_f(&tr.state.position, &tr.fiber[0], &tr.fiber[1]))
    };
    let (p2, p1, m1, m2) = (at(2.0 * h)?, at(h)?, at(-h)?, at(-2.0 * h)?);
    let hess = (-p2 + 16.0 * p1 - 30.0 * value + 16.0 * m1 - m2) / (12.0 * h * h);
    Ok((value, hess))
}

/// Directional derivative `D_x R°_F(w1,w2,u,v)` along the base geodesic,
/// fiber arguments connection-parallel.
#[allow(clippy::too_many_arguments)]
pub fn symmetrized_directional_derivative(
    b: &BundleSpec,
    rf: &VerticalCurvatureField,
    p: &ChartPoint,
    x: &DVector<f64>,
    w1: &DVector<f64>,
    w2: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> Result<f64> {
    let at = |t: f64| -> Result<f64> {
        let tr = nabla_transport(
            b,
            p,
            x,
            &[w1.clone(), w2.clone(), u.clone(), v.clone()],
            t,
            default_steps(t),
        )?;
        Ok(rf
            .at(&tr.state.position)
            .symmetrized_value(&tr.fiber[0], &tr.fiber[1], &tr.fiber[2], &tr.fiber[3]))
    };
    let (p2, p1, m1, m2) = (at(2.0 * h)?, at(h)?, at(-h)?, at(-2.0 * h)?);
    Ok((-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h))
}

/// Base gradient of `q -> R°_F(w1,w2,u,v)(q)` at `p` (arguments
/// connection-parallel), returned as a base tangent vector.
#[allow(clippy::too_many_arguments)]
pub fn symmetrized_gradient(
    b: &BundleSpec,
    rf: &VerticalCurvatureField,
    p: &ChartPoint,
    w1: &DVector<f64>,
    w2: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> Result<DVector<f64>> {
    let m = b.base.dim();
    let mut df = DVector::zeros(m);
    for d in 0..m {
        let mut e = DVector::zeros(m);
        e[d] = 1.0;
        df[d] = symmetrized_directional_derivative(b, rf, p, &e, w1, w2, u, v, h)?;
    }
    let g = b.base.metric_at(p);
    g.try_inverse().map(|gi| gi * df).ok_or(Error::Numerical {
        msg: "base metric not invertible in gradient".into(),
        condition: f64::INFINITY,
    })
}

/// The 2-form `Omega(X,Y) = <R(X,Y)W, JW>` of an oriented rank-2 bundle;
/// independent of the unit fiber vector W.
pub fn omega_form(
    b: &BundleSpec,
    p: &ChartPoint,
    x: &DVector<f64>,
    y: &DVector<f64>,
    h: f64,
) -> Result<f64> {
    let j = b.j_matrix()?;
    let w = DVector::from_vec(vec![1.0, 0.0]);
    let f = curvature_form(b, p, x, y, h);
    Ok((f * &w).dot(&(&j * &w)))
}

/// Chern number `(1/2pi) Integral Omega` of an oriented rank-2 bundle over
/// a two-chart sphere base, by composite quadrature over the unit disk of
/// each chart (the charts split the base along |x| = 1).
pub fn chern_number(b: &BundleSpec) -> Result<f64> {
    if b.rank != 2 {
        return Err(Error::Structural(format!(
            "Chern integration needs a rank-2 bundle, got rank {}",
            b.rank
        )));
    }
    if b.base.dim() != 2 || b.base.atlas.charts.len() != 2 {
        return Err(Error::Structural(
            "Chern integration expects a two-chart surface base".into(),
        ));
    }
    let h = crate::StencilConfig::default().base_step;
    let e1 = DVector::from_vec(vec![1.0, 0.0]);
    let e2 = DVector::from_vec(vec![0.0, 1.0]);

    // composite Simpson in r, trapezoid in the periodic angle
    let (nr, nphi) = (120usize, 256usize);
    let mut total = 0.0;
    for chart in 0..2 {
        let mut integral = 0.0;
        for ri in 0..=nr {
            let r = ri as f64 / nr as f64;
            let wr = if ri == 0 || ri == nr {
                1.0
            } else if ri % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let mut ring = 0.0;
            if r > 0.0 {
                for pi in 0..nphi {
                    let phi = 2.0 * std::f64::consts::PI * pi as f64 / nphi as f64;
                    let x = DVector::from_vec(vec![r * phi.cos(), r * phi.sin()]);
                    let p = ChartPoint::new(chart, x);
                    ring += omega_form(b, &p, &e1, &e2, h)?;
                }
            }
            integral += wr * r * ring * (2.0 * std::f64::consts::PI / nphi as f64);
        }
        integral *= (1.0 / nr as f64) / 3.0;
        total += integral;
    }
    let value = total / (2.0 * std::f64::consts::PI);
    if !value.is_finite() {
        return Err(Error::Numerical {
            msg: "Chern quadrature did not converge".into(),
            condition: f64::NAN,
        });
    }
    Ok(value)
}

pub mod catalog;
