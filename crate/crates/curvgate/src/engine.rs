//! Direct numerical Riemannian geometry of total spaces.
//!
//! Everything here works from the metric field alone (Christoffel symbols
//! and the Riemann tensor by nested central differences), independent of
//! the connection-level primitives. That independence is the point: the
//! curvature identities relating the two routes are what the verification
//! layer checks.

use nalgebra::{DMatrix, DVector};

use crate::base::ChartPoint;
use crate::bundle::{self, BundleSpec, VerticalCurvatureField};
use crate::tensor::{wedge_norm_sq, CurvatureTensor};
use crate::warp::{SphereBundleMetric, TotalMetricField, TotalPoint};
use crate::{Error, Result, StencilConfig};

/// Anything that evaluates a chart metric matrix: total metrics, induced
/// distance-sphere metrics. Curvature machinery is generic over this.
pub trait MetricPatch {
    fn dim(&self) -> usize;
    fn metric(&self, chart: usize, z: &DVector<f64>) -> Result<DMatrix<f64>>;
    /// Coordinate derivatives; default is Richardson central differences.
    fn metric_deriv(&self, chart: usize, z: &DVector<f64>, h: f64) -> Result<Vec<DMatrix<f64>>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n);
        for d in 0..n {
            let at = |t: f64| -> Result<DMatrix<f64>> {
                let mut zt = z.clone();
                zt[d] += t;
                self.metric(chart, &zt)
            };
            let coarse = (at(h)? - at(-h)?) / (2.0 * h);
            let fine = (at(h / 2.0)? - at(-h / 2.0)?) / h;
            out.push((fine * 4.0 - coarse) / 3.0);
        }
        Ok(out)
    }
}

impl MetricPatch for TotalMetricField {
    fn dim(&self) -> usize {
        self.total_dim()
    }

    fn metric(&self, chart: usize, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.metric_at(&total_point(self, chart, z))
    }

    fn metric_deriv(&self, chart: usize, z: &DVector<f64>, h: f64) -> Result<Vec<DMatrix<f64>>> {
        self.metric_deriv_at(&total_point(self, chart, z), h)
    }
}

fn total_point(total: &TotalMetricField, chart: usize, z: &DVector<f64>) -> TotalPoint {
    let m = total.base_dim();
    let k = total.fiber_rank();
    TotalPoint::new(
        chart,
        DVector::from_iterator(m, z.iter().take(m).copied()),
        DVector::from_iterator(k, z.iter().skip(m).copied()),
    )
}

impl MetricPatch for SphereBundleMetric {
    fn dim(&self) -> usize {
        SphereBundleMetric::dim(self)
    }

    fn metric(&self, chart: usize, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        SphereBundleMetric::metric(self, chart, z)
    }
}

/// Christoffel symbols of a metric patch, one matrix per upper index.
pub fn christoffel_patch<M: MetricPatch + ?Sized>(
    patch: &M,
    chart: usize,
    z: &DVector<f64>,
    h: f64,
) -> Result<Vec<DMatrix<f64>>> {
    let g = patch.metric(chart, z)?;
    let dim = patch.dim();
    let ginv = g.clone().try_inverse().ok_or_else(|| {
        let svd = g.svd(false, false);
        Error::Numerical {
            msg: "patch metric not invertible".into(),
            condition: svd.singular_values.max() / svd.singular_values.min().max(1e-300),
        }
    })?;
    let dg = patch.metric_deriv(chart, z, h)?;
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
    Ok(gamma)
}

/// Riemann tensor of a metric patch, all indices lowered, symmetry
/// projected; second value is the raw stencil's projection residual.
pub fn riemann_patch<M: MetricPatch + ?Sized>(
    patch: &M,
    chart: usize,
    z: &DVector<f64>,
    h: f64,
) -> Result<(CurvatureTensor, f64)> {
    let dim = patch.dim();
    let g = patch.metric(chart, z)?;
    let gamma0 = christoffel_patch(patch, chart, z, h)?;
    let mut dgamma: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(dim);
    for d in 0..dim {
        let at = |t: f64| -> Result<Vec<DMatrix<f64>>> {
            let mut zt = z.clone();
            zt[d] += t;
            christoffel_patch(patch, chart, &zt, h)
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

/// Riemann tensor of the built total metric at a total point.
pub fn riemann_total(total: &TotalMetricField, q: &TotalPoint, h: f64) -> Result<(CurvatureTensor, f64)> {
    riemann_patch(total, q.chart, &q.coords(), h)
}

/// A 2-plane in a total tangent space.
#[derive(Debug, Clone)]
pub struct TwoPlane {
    pub point: TotalPoint,
    pub e1: DVector<f64>,
    pub e2: DVector<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SectionalValue {
    pub unnormalized: f64,
    pub normalized: f64,
    pub wedge_norm_sq: f64,
}

/// Unnormalized and normalized sectional curvature of a 2-plane.
pub fn sectional(total: &TotalMetricField, plane: &TwoPlane, h: f64) -> Result<SectionalValue> {
    let g = total.metric_at(&plane.point)?;
    let wedge = wedge_norm_sq(&plane.e1, &plane.e2, &g);
    if wedge <= 1e-12 * plane.e1.norm_squared().max(1.0) * plane.e2.norm_squared().max(1.0) {
        return Err(Error::Domain("degenerate 2-plane".into()));
    }
    let (r, _) = riemann_total(total, &plane.point, h)?;
    let k = r.sectional(&plane.e1, &plane.e2);
    Ok(SectionalValue {
        unnormalized: k,
        normalized: k / wedge,
        wedge_norm_sq: wedge,
    })
}

/// Sectional curvature of a plane in an arbitrary metric patch
/// (used for the intrinsic geometry of distance spheres).
pub fn sectional_patch<M: MetricPatch + ?Sized>(
    patch: &M,
    chart: usize,
    z: &DVector<f64>,
    e1: &DVector<f64>,
    e2: &DVector<f64>,
    h: f64,
) -> Result<SectionalValue> {
    let g = patch.metric(chart, z)?;
    let wedge = wedge_norm_sq(e1, e2, &g);
    if wedge <= 1e-12 * e1.norm_squared().max(1.0) * e2.norm_squared().max(1.0) {
        return Err(Error::Domain("degenerate 2-plane".into()));
    }
    let (r, _) = riemann_patch(patch, chart, z, h)?;
    let k = r.sectional(e1, e2);
    Ok(SectionalValue {
        unnormalized: k,
        normalized: k / wedge,
        wedge_norm_sq: wedge,
    })
}

// ---------------------------------------------------------------------
// O'Neill tensors
// ---------------------------------------------------------------------

/// Derivative of the basic horizontal field `X-bar(x', v') = (X, -omega(X) v')`
/// in the direction `zdir` at `q`, as a total vector.
fn basic_field_derivative(
    total: &TotalMetricField,
    q: &TotalPoint,
    x: &DVector<f64>,
    zdir: &DVector<f64>,
) -> DVector<f64> {
    let m = total.base_dim();
    let k = total.fiber_rank();
    let bp = q.base_point();
    let domega = total
        .bundle
        .connection_deriv_at(&bp, StencilConfig::default().base_step);
    let omega = total.bundle.connection_at(&bp);
    // d(omega(X) v)[zdir] = (d_zbase omega(X)) v + omega(X) zfiber
    let zbase = DVector::from_iterator(m, zdir.iter().take(m).copied());
    let zfiber = DVector::from_iterator(k, zdir.iter().skip(m).copied());
    let mut dom = DMatrix::zeros(k, k);
    for d in 0..m {
        for i in 0..m {
            dom += &domega[d][i] * (zbase[d] * x[i]);
        }
    }
    let mut omx = DMatrix::zeros(k, k);
    for i in 0..m {
        omx += &omega[i] * x[i];
    }
    let tail = -(dom * &q.fiber) - omx * zfiber;
    DVector::from_iterator(m + k, std::iter::repeat_n(0.0, m).chain(tail.iter().copied()))
}

fn gamma_contract(gamma: &[DMatrix<f64>], a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = gamma.len();
    let mut out = DVector::zeros(n);
    for k in 0..n {
        out[k] = a.dot(&(&gamma[k] * b));
    }
    out
}

/// `A_X Y`: vertical part of the covariant derivative of one basic field
/// along another, returned as a fiber vector.
pub fn oneill_a(
    total: &TotalMetricField,
    q: &TotalPoint,
    x: &DVector<f64>,
    y: &DVector<f64>,
    h: f64,
) -> Result<DVector<f64>> {
    let gamma = christoffel_patch(total, q.chart, &q.coords(), h)?;
    let xbar = total.horizontal_lift(q, x);
    let ybar_deriv = basic_field_derivative(total, q, y, &xbar);
    let nabla = ybar_deriv + gamma_contract(&gamma, &xbar, &total.horizontal_lift(q, y));
    Ok(total.v_project(q, &nabla))
}

/// `A_X U`: horizontal part of the derivative of a vertical field along a
/// basic field, returned as a base vector.
pub fn oneill_a_mixed(
    total: &TotalMetricField,
    q: &TotalPoint,
    x: &DVector<f64>,
    u: &DVector<f64>,
    h: f64,
) -> Result<DVector<f64>> {
    let gamma = christoffel_patch(total, q.chart, &q.coords(), h)?;
    let xbar = total.horizontal_lift(q, x);
    let ubar = total.vertical_embed(u);
    let nabla = gamma_contract(&gamma, &xbar, &ubar);
    let m = total.base_dim();
    Ok(DVector::from_iterator(m, nabla.iter().take(m).copied()))
}

/// `T_U V`: horizontal part of the derivative of one vertical field along
/// another, returned as a base vector.
pub fn oneill_t(
    total: &TotalMetricField,
    q: &TotalPoint,
    u: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> Result<DVector<f64>> {
    let gamma = christoffel_patch(total, q.chart, &q.coords(), h)?;
    let nabla = gamma_contract(&gamma, &total.vertical_embed(u), &total.vertical_embed(v));
    let m = total.base_dim();
    Ok(DVector::from_iterator(m, nabla.iter().take(m).copied()))
}

/// `T_U X`: vertical part of the derivative of a basic field along a
/// vertical direction, returned as a fiber vector.
pub fn oneill_t_mixed(
    total: &TotalMetricField,
    q: &TotalPoint,
    u: &DVector<f64>,
    x: &DVector<f64>,
    h: f64,
) -> Result<DVector<f64>> {
    let gamma = christoffel_patch(total, q.chart, &q.coords(), h)?;
    let ubar = total.vertical_embed(u);
    let xbar_deriv = basic_field_derivative(total, q, x, &ubar);
    let nabla = xbar_deriv + gamma_contract(&gamma, &ubar, &total.horizontal_lift(q, x));
    Ok(total.v_project(q, &nabla))
}

/// Largest A- and T-tensor component over the coordinate basis at `q`.
pub fn oneill_norms(total: &TotalMetricField, q: &TotalPoint, h: f64) -> Result<(f64, f64)> {
    let m = total.base_dim();
    let k = total.fiber_rank();
    let mut worst_a: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    let basis_m: Vec<DVector<f64>> = (0..m)
        .map(|i| {
            let mut e = DVector::zeros(m);
            e[i] = 1.0;
            e
        })
        .collect();
    let basis_k: Vec<DVector<f64>> = (0..k)
        .map(|a| {
            let mut e = DVector::zeros(k);
            e[a] = 1.0;
            e
        })
        .collect();
    for x in &basis_m {
        for y in &basis_m {
            worst_a = worst_a.max(oneill_a(total, q, x, y, h)?.abs().max());
        }
        for u in &basis_k {
            worst_a = worst_a.max(oneill_a_mixed(total, q, x, u, h)?.abs().max());
            worst_t = worst_t.max(oneill_t_mixed(total, q, u, x, h)?.abs().max());
        }
    }
    for u in &basis_k {
        for v in &basis_k {
            worst_t = worst_t.max(oneill_t(total, q, u, v, h)?.abs().max());
        }
    }
    Ok((worst_a, worst_t))
}

/// `(D_V A)_X Y` at a zero-section point: t-derivative of `A_X Y` along
/// the radial line `(x, t V)`. A vanishes at the soul, so the plain
/// component derivative is the covariant one.
pub fn d_vertical_a(
    total: &TotalMetricField,
    soul: &TotalPoint,
    vdir: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
    h_t: f64,
    h: f64,
) -> Result<DVector<f64>> {
    let at = |t: f64| -> Result<DVector<f64>> {
        let q = TotalPoint::new(soul.chart, soul.base.clone(), vdir * t);
        oneill_a(total, &q, x, y, h)
    };
    Ok((at(h_t)? - at(-h_t)?) / (2.0 * h_t))
}

/// `(D_W T)_U V` at a zero-section point, as a base vector.
pub fn d_vertical_t(
    total: &TotalMetricField,
    soul: &TotalPoint,
    wdir: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    h_t: f64,
    h: f64,
) -> Result<DVector<f64>> {
    let at = |t: f64| -> Result<DVector<f64>> {
        let q = TotalPoint::new(soul.chart, soul.base.clone(), wdir * t);
        oneill_t(total, &q, u, v, h)
    };
    Ok((at(h_t)? - at(-h_t)?) / (2.0 * h_t))
}

/// Second radial derivative of `T_U V` along `(x, t W)`, transported back
/// to the soul; with T and DT vanishing there this is `(D^2_W T)_U V`.
pub fn d2_radial_t(
    total: &TotalMetricField,
    soul: &TotalPoint,
    wdir: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    h_t: f64,
    h: f64,
) -> Result<DVector<f64>> {
    let m = total.base_dim();
    let value = |t: f64| -> Result<DVector<f64>> {
        if t == 0.0 {
            let base = oneill_t(total, soul, u, v, h)?;
            return Ok(total.horizontal_lift(soul, &base));
        }
        let q = TotalPoint::new(soul.chart, soul.base.clone(), wdir * t);
        let tbase = oneill_t(total, &q, u, v, h)?;
        let tvec = total.horizontal_lift(&q, &tbase);
        // transport back to the soul along the radial geodesic
        let back = radial_transport(total, soul, &(wdir * t), &[tvec], -1.0, 32, h)?;
        Ok(back[0].clone())
    };
    let (p2, p1, p0, m1, m2) = (
        value(2.0 * h_t)?,
        value(h_t)?,
        value(0.0)?,
        value(-h_t)?,
        value(-2.0 * h_t)?,
    );
    let d2 = (-&p2 + &p1 * 16.0 - &p0 * 30.0 + &m1 * 16.0 - &m2) / (12.0 * h_t * h_t);
    Ok(DVector::from_iterator(m, d2.iter().take(m).copied()))
}

// ---------------------------------------------------------------------
// Radial transport and the Psi family
// ---------------------------------------------------------------------

/// Levi-Civita parallel transport of total vectors along the radial
/// geodesic `s -> (x, s_end * s * w)` for `s` in [0,1] (fraction = -1.0
/// transports backwards from the tip to the soul). Radial lines are exact
/// geodesics of built metrics, so only the transport ODE is integrated.
pub fn radial_transport(
    total: &TotalMetricField,
    soul: &TotalPoint,
    w: &DVector<f64>,
    vectors: &[DVector<f64>],
    fraction: f64,
    steps: usize,
    h: f64,
) -> Result<Vec<DVector<f64>>> {
    let n = total.total_dim();
    let gdot = total.vertical_embed(w);
    let (s0, s1) = if fraction >= 0.0 { (0.0, fraction) } else { (1.0, 0.0) };
    let ds = (s1 - s0) / steps as f64;
    let mut vecs: Vec<DVector<f64>> = vectors.to_vec();
    let mut s = s0;
    for _ in 0..steps {
        let slope = |s: f64, vecs: &[DVector<f64>]| -> Result<Vec<DVector<f64>>> {
            let q = TotalPoint::new(soul.chart, soul.base.clone(), w * s);
            let gamma = christoffel_patch(total, q.chart, &q.coords(), h)?;
            Ok(vecs
                .iter()
                .map(|v| {
                    let mut dv = DVector::zeros(n);
                    for c in 0..n {
                        dv[c] = -gdot.dot(&(&gamma[c] * v));
                    }
                    dv
                })
                .collect())
        };
        let add = |a: &[DVector<f64>], b: &[DVector<f64>], t: f64| -> Vec<DVector<f64>> {
            a.iter().zip(b).map(|(ai, bi)| ai + bi * t).collect()
        };
        let k1 = slope(s, &vecs)?;
        let k2 = slope(s + ds / 2.0, &add(&vecs, &k1, ds / 2.0))?;
        let k3 = slope(s + ds / 2.0, &add(&vecs, &k2, ds / 2.0))?;
        let k4 = slope(s + ds, &add(&vecs, &k3, ds))?;
        for i in 0..vecs.len() {
            vecs[i] += (&k1[i] + &k2[i] * 2.0 + &k3[i] * 2.0 + &k4[i]) * (ds / 6.0);
        }
        s += ds;
    }
    Ok(vecs)
}

/// Arguments of the Psi family: a soul point, base vectors X, Y, and
/// fiber vectors U, V, W.
#[derive(Debug, Clone)]
pub struct PsiInput {
    pub p: ChartPoint,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub w: DVector<f64>,
}

/// `Psi(t) = k(X_t + t U_t, t Y_t + V_t)` at `gamma(t) = (p, t W)`, all
/// arguments Levi-Civita-parallel in the total space.
pub fn psi(total: &TotalMetricField, input: &PsiInput, t: f64, h: f64) -> Result<f64> {
    psi_general(total, input, None, None, t, h)
}

/// The generalized family `k(X_t + t Xhat_t + t U_t, t Y_t + V_t + t Vhat_t)`;
/// its derivatives at 0 coincide with the plain family's.
pub fn psi_general(
    total: &TotalMetricField,
    input: &PsiInput,
    xhat: Option<&DVector<f64>>,
    vhat: Option<&DVector<f64>>,
    t: f64,
    h: f64,
) -> Result<f64> {
    let soul = TotalPoint::soul(input.p.chart, input.p.coords.clone(), total.fiber_rank());
    let mut carried = vec![
        total.horizontal_lift(&soul, &input.x),
        total.horizontal_lift(&soul, &input.y),
        total.vertical_embed(&input.u),
        total.vertical_embed(&input.v),
    ];
    if let Some(xh) = xhat {
        carried.push(total.horizontal_lift(&soul, xh));
    }
    if let Some(vh) = vhat {
        carried.push(total.vertical_embed(vh));
    }
    let q = TotalPoint::new(soul.chart, soul.base.clone(), &input.w * t);
    let moved = if t == 0.0 {
        carried
    } else {
        radial_transport(total, &soul, &(&input.w * t), &carried, 1.0, 24, h)?
    };
    let (xt, yt, ut, vt) = (&moved[0], &moved[1], &moved[2], &moved[3]);
    let mut e1 = xt + ut * t;
    let mut e2 = yt * t + vt;
    let mut idx = 4;
    if xhat.is_some() {
        e1 += &moved[idx] * t;
        idx += 1;
    }
    if vhat.is_some() {
        e2 += &moved[idx] * t;
    }
    let (r, _) = riemann_total(total, &q, h)?;
    Ok(r.sectional(&e1, &e2))
}

/// Stencil derivatives of Psi at t = 0 with Richardson error estimates.
#[derive(Debug, Clone, Copy)]
pub struct PsiDerivatives {
    pub first: f64,
    pub second: f64,
    pub first_err: f64,
    pub second_err: f64,
}

pub fn psi_derivatives_numeric(
    total: &TotalMetricField,
    input: &PsiInput,
    h_t: f64,
    h: f64,
) -> Result<PsiDerivatives> {
    let at = |t: f64| psi(total, input, t, h);
    let (p2, p1, ph, mh, m1, m2, p0) = (
        at(2.0 * h_t)?,
        at(h_t)?,
        at(h_t / 2.0)?,
        at(-h_t / 2.0)?,
        at(-h_t)?,
        at(-2.0 * h_t)?,
        at(0.0)?,
    );
    let coarse1 = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h_t);
    let fine1 = (-p1 + 8.0 * ph - 8.0 * mh + m1) / (6.0 * h_t);
    let coarse2 = (-p2 + 16.0 * p1 - 30.0 * p0 + 16.0 * m1 - m2) / (12.0 * h_t * h_t);
    let fine2 = (-p1 + 16.0 * ph - 30.0 * p0 + 16.0 * mh - m1) / (3.0 * h_t * h_t);
    Ok(PsiDerivatives {
        first: (16.0 * fine1 - coarse1) / 15.0,
        second: (16.0 * fine2 - coarse2) / 15.0,
        first_err: (fine1 - coarse1).abs() / 15.0,
        second_err: (fine2 - coarse2).abs() / 15.0,
    })
}

/// `Psi''(0)` assembled from connection-level primitives:
///
/// ```text
/// 2 k_Sigma(X,Y) + 2 k_F(U,V) - 6 <R(X,Y)U, V> + (1/2)|R(W,V)X|^2
///   - 2 <(D_X R)(X,Y)W, V> + (1/3) hess_{k_F(W,V)}(X)
///   + (4/3) D_X R°(W,U,V,V) - (4/3) D_X R°(W,V,U,V)
/// ```
///
/// For connection metrics (transport-constant fiber curvature) the hessian
/// and the two symmetrized-derivative terms vanish identically.
pub fn psi_second_analytic(
    b: &BundleSpec,
    rf: &VerticalCurvatureField,
    input: &PsiInput,
    cfg: &StencilConfig,
) -> Result<f64> {
    let p = &input.p;
    let (x, y, u, v, w) = (&input.x, &input.y, &input.u, &input.v, &input.w);
    let h = cfg.base_step;

    let (r_sigma, _) = crate::base::riemann_base(b.base.as_ref(), p, h)?;
    let k_sigma = r_sigma.sectional(x, y);
    let k_f = rf.k_f(p, u, v);
    let r_xy = bundle::curvature_form(b, p, x, y, h);
    let r_xy_uv = (&r_xy * u).dot(v);
    let adj = bundle::curvature_adjoint(b, p, w, v, x, h)?;
    let g_sigma = b.base.metric_at(p);
    let adj_norm2 = adj.dot(&(&g_sigma * &adj));
    let dxr = bundle::covariant_derivative_curvature(b, p, x, y, w, v, cfg.hessian_step)?;
    let (_, hess) = bundle::kf_and_hessian(b, rf, p, x, w, v, cfg.hessian_step)?;
    let d_wuvv = bundle::symmetrized_directional_derivative(b, rf, p, x, w, u, v, v, cfg.hessian_step)?;
    let d_wvuv = bundle::symmetrized_directional_derivative(b, rf, p, x, w, v, u, v, cfg.hessian_step)?;

    Ok(2.0 * k_sigma + 2.0 * k_f - 6.0 * r_xy_uv + 0.5 * adj_norm2 - 2.0 * dxr
        + hess / 3.0
        + (4.0 / 3.0) * (d_wuvv - d_wvuv))
}
