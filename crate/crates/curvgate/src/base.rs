//! Chart-based Riemannian base manifolds.
//!
//! A base manifold is an atlas of named coordinate charts with transition
//! maps, plus a metric field evaluated per chart. Christoffel symbols come
//! from an analytic derivative callback when the catalog provides one and
//! from central differences otherwise; the two paths are cross-checked in
//! the test suite. Geodesics and parallel transport integrate with RK4 and
//! switch charts when a trajectory leaves the well-conditioned region.

use nalgebra::{DMatrix, DVector};

use crate::stencil;
use crate::tensor::CurvatureTensor;
use crate::{Error, Result, StencilConfig};

pub type PointFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
pub type JacobianFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;
pub type MetricFn = dyn Fn(usize, &DVector<f64>) -> DMatrix<f64> + Send + Sync;
pub type MetricDerivFn = dyn Fn(usize, &DVector<f64>) -> Vec<DMatrix<f64>> + Send + Sync;
pub type EmbeddingFn = dyn Fn(usize, &DVector<f64>) -> DVector<f64> + Send + Sync;

/// A point of the base manifold: chart index plus coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub chart: usize,
    pub coords: DVector<f64>,
}

impl ChartPoint {
    pub fn new(chart: usize, coords: DVector<f64>) -> Self {
        ChartPoint { chart, coords }
    }
}

/// Smooth map between overlapping charts, with its Jacobian.
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub map: Box<PointFn>,
    pub jacobian: Box<JacobianFn>,
}

pub struct Chart {
    pub name: String,
    /// Switch to a neighbor chart once |x| exceeds this radius.
    pub switch_radius: Option<f64>,
}

/// Named coordinate charts with transitions; optionally an isometric
/// embedding used by catalog scalar fields and test oracles.
pub struct ChartAtlas {
    pub dim: usize,
    pub charts: Vec<Chart>,
    pub transitions: Vec<Transition>,
    pub embedding: Option<Box<EmbeddingFn>>,
}

impl ChartAtlas {
    pub fn transition(&self, from: usize, to: usize) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.from == from && t.to == to)
    }

    /// Maps a point together with attached tangent vectors into `to`.
    pub fn carry(
        &self,
        p: &ChartPoint,
        vectors: &[DVector<f64>],
        to: usize,
    ) -> Result<(ChartPoint, Vec<DVector<f64>>)> {
        if p.chart == to {
            return Ok((p.clone(), vectors.to_vec()));
        }
        let tr = self.transition(p.chart, to).ok_or_else(|| {
            Error::Domain(format!("no transition from chart {} to {}", p.chart, to))
        })?;
        let jac = (tr.jacobian)(&p.coords);
        let mapped = (tr.map)(&p.coords);
        let carried = vectors.iter().map(|v| &jac * v).collect();
        Ok((ChartPoint::new(to, mapped), carried))
    }
}

/// Per-chart symmetric metric matrix field, with optional analytic
/// coordinate derivatives.
pub struct MetricField {
    eval: Box<MetricFn>,
    deriv: Option<Box<MetricDerivFn>>,
}

impl MetricField {
    pub fn new(eval: Box<MetricFn>) -> Self {
        MetricField { eval, deriv: None }
    }

    pub fn with_deriv(eval: Box<MetricFn>, deriv: Box<MetricDerivFn>) -> Self {
        MetricField {
            eval,
            deriv: Some(deriv),
        }
    }

    pub fn at(&self, chart: usize, x: &DVector<f64>) -> DMatrix<f64> {
        (self.eval)(chart, x)
    }

    pub fn has_analytic_deriv(&self) -> bool {
        self.deriv.is_some()
    }

    /// Coordinate derivatives of the metric, one matrix per direction.
    /// Analytic callback when present, Richardson-refined central
    /// differences otherwise.
    pub fn deriv_at(&self, chart: usize, x: &DVector<f64>, h: f64) -> Vec<DMatrix<f64>> {
        if let Some(d) = &self.deriv {
            return d(chart, x);
        }
        self.deriv_at_fd(chart, x, h)
    }

    /// Finite-difference derivative path, exposed for cross-checks.
    pub fn deriv_at_fd(&self, chart: usize, x: &DVector<f64>, h: f64) -> Vec<DMatrix<f64>> {
        let dim = x.len();
        let mut out = Vec::with_capacity(dim);
        for d in 0..dim {
            let shifted = |t: f64| {
                let mut xs = x.clone();
                xs[d] += t;
                self.at(chart, &xs)
            };
            let coarse = (shifted(h) - shifted(-h)) / (2.0 * h);
            let fine = (shifted(h / 2.0) - shifted(-h / 2.0)) / h;
            out.push((fine * 4.0 - coarse) / 3.0);
        }
        out
    }
}

/// Atlas plus metric: everything the geodesic and curvature machinery
/// needs about the base.
pub struct BaseManifold {
    pub name: String,
    pub atlas: ChartAtlas,
    pub metric: MetricField,
}

impl BaseManifold {
    pub fn dim(&self) -> usize {
        self.atlas.dim
    }

    pub fn metric_at(&self, p: &ChartPoint) -> DMatrix<f64> {
        self.metric.at(p.chart, &p.coords)
    }

    pub fn inner(&self, p: &ChartPoint, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(self.metric_at(p) * y))
    }

    pub fn norm(&self, p: &ChartPoint, x: &DVector<f64>) -> f64 {
        self.inner(p, x, x).max(0.0).sqrt()
    }
}

fn invert_metric(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dim = g.nrows();
    let svd = g.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    g.clone().try_inverse().filter(|_| condition < 1e12).ok_or(Error::Numerical {
        msg: format!("metric not invertible at evaluation point (dim {dim})"),
        condition,
    })
}

/// Christoffel symbols of the Levi-Civita connection at `p`, returned as
/// one matrix per upper index: `gamma[k][(i,j)]`.
pub fn christoffel(base: &BaseManifold, p: &ChartPoint, h: f64) -> Result<Vec<DMatrix<f64>>> {
    let g = base.metric_at(p);
    let ginv = invert_metric(&g)?;
    let dg = base.metric.deriv_at(p.chart, &p.coords, h);
    Ok(christoffel_from_derivs(&ginv, &dg))
}

fn christoffel_from_derivs(ginv: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    let dim = ginv.nrows();
    let mut gamma = vec![DMatrix::zeros(dim, dim); dim];
    for k in 0..dim {
        for i in 0..dim {
            for j in 0..=i {
                let mut acc = 0.0;
                for l in 0..dim {
                    acc += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                let v = 0.5 * acc;
                gamma[k][(i, j)] = v;
                gamma[k][(j, i)] = v;
            }
        }
    }
    gamma
}

/// Riemann tensor of the base metric at `p`, lowered to all-covariant form
/// with `R(i,j,k,l) = <R(d_i,d_j)d_k, d_l>`. Returns the symmetry-projected
/// tensor together with the projection residual of the raw stencil output.
pub fn riemann_base(base: &BaseManifold, p: &ChartPoint, h: f64) -> Result<(CurvatureTensor, f64)> {
    let dim = base.dim();
    let g = base.metric_at(p);

    // dGamma[d][k][(i,j)] by Richardson central differences of Christoffels
    let gamma0 = christoffel(base, p, h)?;
    let mut dgamma: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(dim);
    for d in 0..dim {
        let at = |t: f64| -> Result<Vec<DMatrix<f64>>> {
            let mut coords = p.coords.clone();
            coords[d] += t;
            christoffel(base, &ChartPoint::new(p.chart, coords), h)
        };
        let (cp, cm, fp, fm) = (at(h)?, at(-h)?, at(h / 2.0)?, at(-h / 2.0)?);
        let mut per_k = Vec::with_capacity(dim);
        for k in 0..dim {
            let coarse = (&cp[k] - &cm[k]) / (2.0 * h);
            let fine = (&fp[k] - &fm[k]) / h;
            per_k.push((fine * 4.0 - coarse) / 3.0);
        }
        dgamma.push(per_k);
    }

    let mut entries = vec![0.0; dim.pow(4)];
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                for m in 0..dim {
                    // R(d_i, d_j) d_k, upper index m
                    let mut up = dgamma[i][m][(j, k)] - dgamma[j][m][(i, k)];
                    for q in 0..dim {
                        up += gamma0[m][(i, q)] * gamma0[q][(j, k)]
                            - gamma0[m][(j, q)] * gamma0[q][(i, k)];
                    }
                    for l in 0..dim {
                        entries[((i * dim + j) * dim + k) * dim + l] += up * g[(m, l)];
                    }
                }
            }
        }
    }
    Ok(CurvatureTensor::project(dim, &entries))
}

/// Position, velocity, and a parallel frame carried along a geodesic.
#[derive(Debug, Clone)]
pub struct GeodesicState {
    pub position: ChartPoint,
    pub velocity: DVector<f64>,
    pub frame: Vec<DVector<f64>>,
}

struct FlowState {
    chart: usize,
    x: DVector<f64>,
    v: DVector<f64>,
    frame: Vec<DVector<f64>>,
}

type FlowSlope = (DVector<f64>, DVector<f64>, Vec<DVector<f64>>);

fn flow_derivative(
    base: &BaseManifold,
    chart: usize,
    x: &DVector<f64>,
    v: &DVector<f64>,
    frame: &[DVector<f64>],
    h: f64,
) -> Result<FlowSlope> {
    let gamma = christoffel(base, &ChartPoint::new(chart, x.clone()), h)?;
    let dim = x.len();
    let mut acc = DVector::zeros(dim);
    for k in 0..dim {
        acc[k] = -v.dot(&(&gamma[k] * v));
    }
    let mut dframe = Vec::with_capacity(frame.len());
    for f in frame {
        let mut df = DVector::zeros(dim);
        for k in 0..dim {
            df[k] = -v.dot(&(&gamma[k] * f));
        }
        dframe.push(df);
    }
    Ok((v.clone(), acc, dframe))
}

/// Integrates the coupled geodesic + parallel-transport system from `p`
/// with initial velocity `velocity`, carrying `frame` along, for
/// parameter time `t_max` (may be negative) in `steps` RK4 steps.
pub fn geodesic_transport(
    base: &BaseManifold,
    p: &ChartPoint,
    velocity: &DVector<f64>,
    frame: &[DVector<f64>],
    t_max: f64,
    steps: usize,
) -> Result<GeodesicState> {
    let steps = steps.max(1);
    let sign = if t_max < 0.0 { -1.0 } else { 1.0 };
    let dt = t_max.abs() / steps as f64;
    let mut st = FlowState {
        chart: p.chart,
        x: p.coords.clone(),
        v: velocity * sign,
        frame: frame.to_vec(),
    };
    for _ in 0..steps {
        rk4_step(base, &mut st, dt)?;
        maybe_switch_chart(base, &mut st)?;
    }
    Ok(GeodesicState {
        position: ChartPoint::new(st.chart, st.x),
        velocity: st.v * sign,
        frame: st.frame,
    })
}

fn rk4_step(base: &BaseManifold, st: &mut FlowState, dt: f64) -> Result<()> {
    let h = StencilConfig::default().base_step;
    let nf = st.frame.len();
    let eval = |x: &DVector<f64>, v: &DVector<f64>, fr: &[DVector<f64>]| {
        flow_derivative(base, st.chart, x, v, fr, h)
    };

    let (k1x, k1v, k1f) = eval(&st.x, &st.v, &st.frame)?;
    let x2 = &st.x + &k1x * (dt / 2.0);
    let v2 = &st.v + &k1v * (dt / 2.0);
    let f2: Vec<_> = (0..nf).map(|i| &st.frame[i] + &k1f[i] * (dt / 2.0)).collect();
    let (k2x, k2v, k2f) = eval(&x2, &v2, &f2)?;
    let x3 = &st.x + &k2x * (dt / 2.0);
    let v3 = &st.v + &k2v * (dt / 2.0);
    let f3: Vec<_> = (0..nf).map(|i| &st.frame[i] + &k2f[i] * (dt / 2.0)).collect();
    let (k3x, k3v, k3f) = eval(&x3, &v3, &f3)?;
    let x4 = &st.x + &k3x * dt;
    let v4 = &st.v + &k3v * dt;
    let f4: Vec<_> = (0..nf).map(|i| &st.frame[i] + &k3f[i] * dt).collect();
    let (k4x, k4v, k4f) = eval(&x4, &v4, &f4)?;

    st.x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (dt / 6.0);
    st.v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
    for i in 0..nf {
        st.frame[i] += (&k1f[i] + &k2f[i] * 2.0 + &k3f[i] * 2.0 + &k4f[i]) * (dt / 6.0);
    }
    Ok(())
}

fn maybe_switch_chart(base: &BaseManifold, st: &mut FlowState) -> Result<()> {
    let Some(limit) = base.atlas.charts[st.chart].switch_radius else {
        return Ok(());
    };
    if st.x.norm() <= limit {
        return Ok(());
    }
    let Some(tr) = base
        .atlas
        .transitions
        .iter()
        .find(|t| t.from == st.chart)
    else {
        return Err(Error::Domain(format!(
            "trajectory left chart {} (|x| = {:.3}) with no transition available",
            base.atlas.charts[st.chart].name,
            st.x.norm()
        )));
    };
    let jac = (tr.jacobian)(&st.x);
    let mapped = (tr.map)(&st.x);
    st.v = &jac * &st.v;
    for f in &mut st.frame {
        *f = &jac * &*f;
    }
    st.x = mapped;
    st.chart = tr.to;
    Ok(())
}

/// Steps-per-unit-time heuristic shared by the stencil drivers.
pub fn default_steps(t: f64) -> usize {
    ((t.abs() / 0.01).ceil() as usize).max(8)
}

/// Second derivative at t=0 of `f` along the geodesic through `(p, x_dir)`,
/// by the five-point stencil with step `h`. Because the curve is a
/// geodesic this equals the hessian of `f` in the direction `x_dir`.
pub fn directional_hessian<F: Fn(&ChartPoint) -> f64>(
    base: &BaseManifold,
    p: &ChartPoint,
    x_dir: &DVector<f64>,
    f: &F,
    h: f64,
) -> Result<f64> {
    let at = |t: f64| -> Result<f64> {
        if t == 0.0 {
            return Ok(f(p));
        }
        let st = geodesic_transport(base, p, x_dir, &[], t, default_steps(t))?;
        Ok(f(&st.position))
    };
    let (f2h, fh, f0, fmh, fm2h) = (at(2.0 * h)?, at(h)?, at(0.0)?, at(-h)?, at(-2.0 * h)?);
    Ok(stencil::d2_five_point(h, |t| {
        // values precomputed; match stencil offsets exactly
        if t == 0.0 {
            f0
        } else if t == h {
            fh
        } else if t == -h {
            fmh
        } else if t == 2.0 * h {
            f2h
        } else {
            fm2h
        }
    }))
}

/// First derivative at t=0 of `f` along the geodesic through `(p, x_dir)`.
pub fn directional_derivative<F: Fn(&ChartPoint) -> f64>(
    base: &BaseManifold,
    p: &ChartPoint,
    x_dir: &DVector<f64>,
    f: &F,
    h: f64,
) -> Result<f64> {
    let at = |t: f64| -> Result<f64> {
        let st = geodesic_transport(base, p, x_dir, &[], t, default_steps(t))?;
        Ok(f(&st.position))
    };
    let (v2h, vh, vmh, vm2h) = (at(2.0 * h)?, at(h)?, at(-h)?, at(-2.0 * h)?);
    Ok((-v2h + 8.0 * vh - 8.0 * vmh + vm2h) / (12.0 * h))
}

pub mod catalog {
    //! Base-manifold catalog: the flat torus and round spheres in
    //! stereographic charts.

    use super::*;

    /// Flat square torus (single periodic chart, identity metric).
    pub fn flat_torus() -> BaseManifold {
        let dim = 2;
        BaseManifold {
            name: "flat-2-torus".into(),
            atlas: ChartAtlas {
                dim,
                charts: vec![Chart {
                    name: "periodic".into(),
                    switch_radius: None,
                }],
                transitions: vec![],
                embedding: None,
            },
            metric: MetricField::with_deriv(
                Box::new(move |_, _| DMatrix::identity(dim, dim)),
                Box::new(move |_, _| vec![DMatrix::zeros(dim, dim); dim]),
            ),
        }
    }

    /// Conjugation reflection: negate every coordinate but the first.
    /// Composed with inversion this is z -> 1/z on S^2 and q -> 1/q on S^4,
    /// both orientation-preserving.
    fn conj_reflection(dim: usize) -> DMatrix<f64> {
        let mut r = DMatrix::identity(dim, dim);
        for i in 1..dim {
            r[(i, i)] = -1.0;
        }
        r
    }

    /// Round sphere of dimension `dim` and radius `radius` in two
    /// stereographic charts. Chart "n" is centered on the north pole,
    /// chart "s" on the south, with the orientation-preserving transition
    /// `x -> conj_reflection(x) / |x|^2`; the conformal metric has the same
    /// form in both charts.
    pub fn round_sphere(dim: usize, radius: f64) -> BaseManifold {
        assert!(dim >= 2 && radius > 0.0);
        let rho2 = radius * radius;
        let metric = move |_c: usize, x: &DVector<f64>| -> DMatrix<f64> {
            let f = 4.0 * rho2 / (1.0 + x.norm_squared()).powi(2);
            DMatrix::identity(x.len(), x.len()) * f
        };
        let metric_deriv = move |_c: usize, x: &DVector<f64>| -> Vec<DMatrix<f64>> {
            let dim = x.len();
            let denom = (1.0 + x.norm_squared()).powi(3);
            (0..dim)
                .map(|d| DMatrix::identity(dim, dim) * (-16.0 * rho2 * x[d] / denom))
                .collect()
        };

        let refl = conj_reflection(dim);
        let refl_j = refl.clone();
        let inversion = move |x: &DVector<f64>| -> DVector<f64> { &refl * x / x.norm_squared() };
        let inversion_jac = move |x: &DVector<f64>| -> DMatrix<f64> {
            let n2 = x.norm_squared();
            let xhat = x / x.norm();
            &refl_j * (DMatrix::identity(x.len(), x.len()) - &xhat * xhat.transpose() * 2.0) / n2
        };

        let refl_b = conj_reflection(dim);
        let inversion_b = {
            let refl = refl_b.clone();
            move |x: &DVector<f64>| -> DVector<f64> { &refl * x / x.norm_squared() }
        };
        let inversion_jac_b = {
            let refl = refl_b;
            move |x: &DVector<f64>| -> DMatrix<f64> {
                let n2 = x.norm_squared();
                let xhat = x / x.norm();
                &refl * (DMatrix::identity(x.len(), x.len()) - &xhat * xhat.transpose() * 2.0) / n2
            }
        };

        let embed_refl = conj_reflection(dim);
        let embedding = move |chart: usize, x: &DVector<f64>| -> DVector<f64> {
            let r2 = x.norm_squared();
            let scale = 2.0 / (1.0 + r2);
            let mut out = DVector::zeros(x.len() + 1);
            match chart {
                0 => {
                    for i in 0..x.len() {
                        out[i] = scale * x[i];
                    }
                    out[x.len()] = (1.0 - r2) / (1.0 + r2);
                }
                _ => {
                    let rx = &embed_refl * x;
                    for i in 0..x.len() {
                        out[i] = scale * rx[i];
                    }
                    out[x.len()] = -(1.0 - r2) / (1.0 + r2);
                }
            }
            out * radius
        };

        BaseManifold {
            name: format!("round-s{dim}-r{radius}"),
            atlas: ChartAtlas {
                dim,
                charts: vec![
                    Chart {
                        name: "n".into(),
                        switch_radius: Some(1.5),
                    },
                    Chart {
                        name: "s".into(),
                        switch_radius: Some(1.5),
                    },
                ],
                transitions: vec![
                    Transition {
                        from: 0,
                        to: 1,
                        map: Box::new(inversion),
                        jacobian: Box::new(inversion_jac),
                    },
                    Transition {
                        from: 1,
                        to: 0,
                        map: Box::new(inversion_b),
                        jacobian: Box::new(inversion_jac_b),
                    },
                ],
                embedding: Some(Box::new(embedding)),
            },
            metric: MetricField::with_deriv(Box::new(metric), Box::new(metric_deriv)),
        }
    }

    /// Height function (last embedding coordinate); smooth scalar field
    /// used by the warped catalog entries.
    pub fn sphere_height(base: &BaseManifold, p: &ChartPoint) -> f64 {
        let embed = base.atlas.embedding.as_ref().expect("sphere catalog has embedding");
        let e = embed(p.chart, &p.coords);
        e[e.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use catalog::{flat_torus, round_sphere};
    use nalgebra::dvector;

    #[test]
    fn flat_torus_christoffels_vanish() {
        let torus = flat_torus();
        let p = ChartPoint::new(0, dvector![0.3, -0.7]);
        let gamma = christoffel(&torus, &p, 1e-3).unwrap();
        for g in gamma {
            assert_eq!(g.abs().max(), 0.0);
        }
    }

    #[test]
    fn sphere_christoffels_vanish_at_chart_origin() {
        let s2 = round_sphere(2, 1.0);
        let p = ChartPoint::new(0, dvector![0.0, 0.0]);
        let gamma = christoffel(&s2, &p, 1e-3).unwrap();
        for g in gamma {
            assert!(g.abs().max() < 1e-12);
        }
    }

    #[test]
    fn sphere_christoffels_fd_matches_conformal_formula() {
        let s2 = round_sphere(2, 1.0);
        // analytic conformal-metric Christoffels:
        // Gamma^k_ij = d_kj phi_i + d_ki phi_j - d_ij phi_k, phi_i = -2 x_i/(1+r^2)
        let points = [dvector![0.4, -0.2], dvector![1.1, 0.8], dvector![-0.3, 0.9]];
        for x in points {
            let p = ChartPoint::new(0, x.clone());
            let fd = {
                // force the finite-difference path through a stripped field
                let field = MetricField::new(Box::new(move |_, y: &DVector<f64>| {
                    DMatrix::identity(2, 2) * 4.0 / (1.0 + y.norm_squared()).powi(2)
                }));
                let g = field.at(0, &x);
                let dg = field.deriv_at(0, &x, 1e-3);
                let ginv = g.try_inverse().unwrap();
                christoffel_from_derivs(&ginv, &dg)
            };
            let analytic = christoffel(&s2, &p, 1e-3).unwrap();
            let r2 = x.norm_squared();
            let phi: Vec<f64> = (0..2).map(|i| -2.0 * x[i] / (1.0 + r2)).collect();
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let expected = (if k == j { phi[i] } else { 0.0 })
                            + (if k == i { phi[j] } else { 0.0 })
                            - (if i == j { phi[k] } else { 0.0 });
                        let rel = (fd[k][(i, j)] - expected).abs() / expected.abs().max(1.0);
                        assert!(rel < 1e-6, "fd {} vs {expected}", fd[k][(i, j)]);
                        assert!((analytic[k][(i, j)] - expected).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn flat_torus_riemann_is_zero() {
        let torus = flat_torus();
        let p = ChartPoint::new(0, dvector![0.1, 0.2]);
        let (r, residual) = riemann_base(&torus, &p, 1e-3).unwrap();
        assert_eq!(residual, 0.0);
        assert!(r.entries().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn round_sphere_sectional_curvature_and_scaling() {
        for (radius, expect) in [(1.0, 1.0), (2.0, 0.25)] {
            let s2 = round_sphere(2, radius);
            for chart in 0..2 {
                let p = ChartPoint::new(chart, dvector![0.5, -0.8]);
                let (r, _) = riemann_base(&s2, &p, 1e-3).unwrap();
                let g = s2.metric_at(&p);
                let x = dvector![1.0, 0.0];
                let y = dvector![0.3, 1.0];
                let k = r.sectional(&x, &y) / crate::tensor::wedge_norm_sq(&x, &y, &g);
                assert!(
                    (k - expect).abs() / expect < 1e-5,
                    "chart {chart} radius {radius}: k = {k}"
                );
            }
        }
    }

    #[test]
    fn geodesic_on_flat_torus_is_straight() {
        let torus = flat_torus();
        let p = ChartPoint::new(0, dvector![0.0, 0.0]);
        let v = dvector![0.6, 0.8];
        let f0 = dvector![1.0, 0.0];
        let st = geodesic_transport(&torus, &p, &v, std::slice::from_ref(&f0), 2.0, 64).unwrap();
        assert!((st.position.coords - dvector![1.2, 1.6]).norm() < 1e-12);
        assert!((st.frame[0].clone() - f0).norm() < 1e-12);
    }

    #[test]
    fn great_circle_returns_home_and_frame_stays_orthonormal() {
        let s2 = round_sphere(2, 1.0);
        let p = ChartPoint::new(0, dvector![0.2, 0.1]);
        let g = s2.metric_at(&p);
        let conf = g[(0, 0)];
        let v = dvector![1.0 / conf.sqrt(), 0.0]; // unit speed
        let f1 = v.clone();
        let f2 = dvector![0.0, 1.0 / conf.sqrt()];
        let st = geodesic_transport(
            &s2,
            &p,
            &v,
            &[f1, f2],
            2.0 * std::f64::consts::PI,
            2400,
        )
        .unwrap();
        // should return to start (same chart: trajectory re-enters chart 0)
        let back = if st.position.chart == 0 {
            st.position.clone()
        } else {
            s2.atlas.carry(&st.position, &[], 0).unwrap().0
        };
        let gap = (&back.coords - &p.coords).norm();
        assert!(gap < 1e-4, "returned {gap:.2e} away, at {:?}", back.coords);
        // transported frame still orthonormal in g
        let ge = s2.metric_at(&st.position);
        let ip =
            |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(&ge * b));
        assert!((ip(&st.frame[0], &st.frame[0]) - 1.0).abs() < 1e-6);
        assert!((ip(&st.frame[1], &st.frame[1]) - 1.0).abs() < 1e-6);
        assert!(ip(&st.frame[0], &st.frame[1]).abs() < 1e-6);
        // geodesic speed preserved
        assert!((ip(&st.velocity, &st.velocity) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn chart_exit_without_transition_is_a_domain_error() {
        let s2 = round_sphere(2, 1.0);
        let bounded = BaseManifold {
            name: "one-chart-cap".into(),
            atlas: ChartAtlas {
                dim: 2,
                charts: vec![Chart {
                    name: "n".into(),
                    switch_radius: Some(1.5),
                }],
                transitions: vec![],
                embedding: None,
            },
            metric: s2.metric,
        };
        let p = ChartPoint::new(0, dvector![1.2, 0.0]);
        let v = dvector![1.0, 0.0];
        let err = geodesic_transport(&bounded, &p, &v, &[], 3.0, 200);
        assert!(matches!(err, Err(crate::Error::Domain(_))), "{err:?}");
    }

    #[test]
    fn directional_hessian_polynomial_exactness() {
        let torus = flat_torus();
        let p = ChartPoint::new(0, dvector![0.0, 0.0]);
        let x = dvector![1.0, 0.0];
        let constf = |_: &ChartPoint| 42.0;
        assert!(directional_hessian(&torus, &p, &x, &constf, 2e-2).unwrap().abs() < 1e-12);

        let quad = |q: &ChartPoint| q.coords[0] * q.coords[0];
        let h2 = directional_hessian(&torus, &p, &x, &quad, 2e-2).unwrap();
        assert!((h2 - 2.0).abs() < 1e-10);

        let quartic = |q: &ChartPoint| {
            let t = q.coords[0];
            1.0 + 0.5 * t - 2.0 * t.powi(2) + 0.25 * t.powi(3) + 3.0 * t.powi(4)
        };
        let h4 = directional_hessian(&torus, &p, &x, &quartic, 2e-2).unwrap();
        assert!((h4 - (-4.0)).abs() < 1e-10, "got {h4}");
    }

    #[test]
    fn height_function_hessian_at_north_pole() {
        let s2 = round_sphere(2, 1.0);
        let p = ChartPoint::new(0, dvector![0.0, 0.0]);
        let g = s2.metric_at(&p);
        let x = dvector![1.0 / g[(0, 0)].sqrt(), 0.0]; // unit vector
        let f = |q: &ChartPoint| catalog::sphere_height(&s2, q);
        let h = directional_hessian(&s2, &p, &x, &f, 2e-2).unwrap();
        assert!((h + 1.0).abs() < 1e-6, "got {h}");
    }
}
