//! Warping functions and total-space metric construction.
//!
//! A warping function prescribes the fiber metrics of a (warped)
//! connection metric: `F(W, ., .)` is the metric of the fiber tangent
//! space at the point W, in the linear coordinates of the trivialization.
//! The two defining properties (positive definiteness, and
//! `F(W,W,U) = <W,U>`, which makes the identity map the fiber exponential)
//! force radial lines to be unit-speed geodesics, so `|v|` is the distance
//! to the zero-section.
//!
//! The total metric on a chart `(x, v)` is assembled from
//! `{g_Sigma, omega, F}`: horizontal lifts `(xdot, -omega(xdot) v)` are
//! orthogonal to the fibers and carry the base metric, fibers carry `F`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::base::ChartPoint;
use crate::bundle::{BundleSpec, VerticalCurvatureField};
use crate::stencil;
use crate::tensor::CurvatureTensor;
use crate::{Error, Result};

/// Rotationally symmetric fiber profile `G^2(r) = 3 r^2 / (3 + C r^2)`,
/// which gives every vertical 2-plane at the zero-section curvature C.
#[derive(Debug, Clone, Copy)]
pub struct FiberProfile {
    pub c: f64,
}

impl FiberProfile {
    pub fn new(c: f64) -> Self {
        FiberProfile { c }
    }

    /// Largest radius on which the profile stays positive.
    pub fn max_radius(&self) -> f64 {
        if self.c >= 0.0 {
            f64::INFINITY
        } else {
            (-3.0 / self.c).sqrt() * 0.999
        }
    }

    pub fn g(&self, r: f64) -> f64 {
        (3.0 * r * r / (3.0 + self.c * r * r)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarpKind {
    /// `F(W,U,V) = <U,V> - (1/3) R°_F(W,W,U,V)` from a vertical curvature
    /// field; nondegenerate only near the zero-section.
    FromField,
    /// Rotationally symmetric fibers `dr^2 + G^2(r) dsigma^2`.
    Rotational,
    Custom,
}

type WarpMatrixFn = dyn Fn(&ChartPoint, &DVector<f64>) -> DMatrix<f64> + Send + Sync;
type WarpMatrixDerivFn = dyn Fn(&ChartPoint, &DVector<f64>) -> Vec<DMatrix<f64>> + Send + Sync;

/// Fiber-metric prescription `(p, W) -> F_p(W, ., .)` as a k x k matrix,
/// with optional analytic derivatives in the fiber and base coordinates.
pub struct WarpingFunction {
    pub rank: usize,
    pub kind: WarpKind,
    matrix: Box<WarpMatrixFn>,
    matrix_dv: Option<Box<WarpMatrixDerivFn>>,
    matrix_dx: Option<Box<WarpMatrixDerivFn>>,
}

impl WarpingFunction {
    pub fn custom(rank: usize, matrix: Box<WarpMatrixFn>) -> Self {
        WarpingFunction {
            rank,
            kind: WarpKind::Custom,
            matrix,
            matrix_dv: None,
            matrix_dx: None,
        }
    }

    pub fn matrix_at(&self, p: &ChartPoint, w: &DVector<f64>) -> DMatrix<f64> {
        (self.matrix)(p, w)
    }

    pub fn value(&self, p: &ChartPoint, w: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(self.matrix_at(p, w) * v))
    }

    pub fn has_analytic_derivs(&self) -> bool {
        self.matrix_dv.is_some() && self.matrix_dx.is_some()
    }

    /// Fiber-coordinate derivatives of the matrix, one per fiber direction.
    pub fn matrix_dv_at(&self, p: &ChartPoint, w: &DVector<f64>, h: f64) -> Vec<DMatrix<f64>> {
        if let Some(dv) = &self.matrix_dv {
            return dv(p, w);
        }
        (0..self.rank)
            .map(|a| {
                let at = |t: f64| {
                    let mut ws = w.clone();
                    ws[a] += t;
                    self.matrix_at(p, &ws)
                };
                let coarse = (at(h) - at(-h)) / (2.0 * h);
                let fine = (at(h / 2.0) - at(-h / 2.0)) / h;
                (fine * 4.0 - coarse) / 3.0
            })
            .collect()
    }

    /// Base-coordinate derivatives of the matrix at fixed fiber coordinates.
    pub fn matrix_dx_at(&self, p: &ChartPoint, w: &DVector<f64>, h: f64) -> Vec<DMatrix<f64>> {
        if let Some(dx) = &self.matrix_dx {
            return dx(p, w);
        }
        (0..p.coords.len())
            .map(|d| {
                let at = |t: f64| {
                    let mut x = p.coords.clone();
                    x[d] += t;
                    self.matrix_at(&ChartPoint::new(p.chart, x), w)
                };
                let coarse = (at(h) - at(-h)) / (2.0 * h);
                let fine = (at(h / 2.0) - at(-h / 2.0)) / h;
                (fine * 4.0 - coarse) / 3.0
            })
            .collect()
    }
}

/// `F(W,U,V) = <U,V> - (1/3) R°_F(W,W,U,V)`; reproduces the whole vertical
/// curvature tensor at the zero-section.
pub fn warping_from_field(rf: Arc<VerticalCurvatureField>) -> WarpingFunction {
    let rank = rf.rank;
    let rf_m = rf.clone();
    let matrix = move |p: &ChartPoint, w: &DVector<f64>| -> DMatrix<f64> {
        let r = rf_m.at(p);
        let mut m = DMatrix::identity(rank, rank);
        for i in 0..rank {
            for j in 0..rank {
                // R°(W,W,e_i,e_j) = R(W,e_i,e_j,W)
                let mut acc = 0.0;
                for a in 0..rank {
                    if w[a] == 0.0 {
                        continue;
                    }
                    for b in 0..rank {
                        acc += w[a] * w[b] * r.get(a, i, j, b);
                    }
                }
                m[(i, j)] -= acc / 3.0;
            }
        }
        m
    };
    let rf_dv = rf.clone();
    let matrix_dv = move |p: &ChartPoint, w: &DVector<f64>| -> Vec<DMatrix<f64>> {
        let r = rf_dv.at(p);
        (0..rank)
            .map(|c| {
                let mut m = DMatrix::zeros(rank, rank);
                for i in 0..rank {
                    for j in 0..rank {
                        // -(2/3) R°(e_c, W, e_i, e_j)
                        let mut acc = 0.0;
                        for b in 0..rank {
                            acc += w[b] * (r.get(c, i, j, b) + r.get(b, i, j, c));
                        }
                        m[(i, j)] = -acc / 3.0;
                    }
                }
                m
            })
            .collect()
    };
    let rf_dx = rf.clone();
    let matrix_dx = move |p: &ChartPoint, w: &DVector<f64>| -> Vec<DMatrix<f64>> {
        let h = crate::StencilConfig::default().base_step;
        rf_dx
            .deriv_at(p, h)
            .into_iter()
            .map(|dr| {
                let mut m = DMatrix::zeros(rank, rank);
                for i in 0..rank {
                    for j in 0..rank {
                        let mut acc = 0.0;
                        for a in 0..rank {
                            for b in 0..rank {
                                acc += w[a] * w[b] * dr.get(a, i, j, b);
                            }
                        }
                        m[(i, j)] = -acc / 3.0;
                    }
                }
                m
            })
            .collect()
    };
    WarpingFunction {
        rank,
        kind: WarpKind::FromField,
        matrix: Box::new(matrix),
        matrix_dv: Some(Box::new(matrix_dv)),
        matrix_dx: Some(Box::new(matrix_dx)),
    }
}

/// Rotationally symmetric warping `F(v) = (3 I + C v v^T) / (3 + C |v|^2)`,
/// the linear-coordinate form of the fiber metric `dr^2 + G^2(r) dsigma^2`.
pub fn warping_rotational(profile: FiberProfile, rank: usize) -> Result<WarpingFunction> {
    if rank < 2 {
        return Err(Error::Structural(format!(
            "rotational warping needs fiber rank >= 2, got {rank}"
        )));
    }
    let c = profile.c;
    let matrix = move |_p: &ChartPoint, w: &DVector<f64>| -> DMatrix<f64> {
        let denom = 3.0 + c * w.norm_squared();
        (DMatrix::identity(rank, rank) * 3.0 + w * w.transpose() * c) / denom
    };
    let matrix_dv = move |_p: &ChartPoint, w: &DVector<f64>| -> Vec<DMatrix<f64>> {
        let denom = 3.0 + c * w.norm_squared();
        let m = (DMatrix::identity(rank, rank) * 3.0 + w * w.transpose() * c) / denom;
        (0..rank)
            .map(|a| {
                let mut e = DVector::zeros(rank);
                e[a] = 1.0;
                let lead = (&e * w.transpose() + w * e.transpose()) * (c / denom);
                lead - &m * (2.0 * c * w[a] / denom)
            })
            .collect()
    };
    let matrix_dx = move |p: &ChartPoint, _w: &DVector<f64>| -> Vec<DMatrix<f64>> {
        vec![DMatrix::zeros(rank, rank); p.coords.len()]
    };
    Ok(WarpingFunction {
        rank,
        kind: WarpKind::Rotational,
        matrix: Box::new(matrix),
        matrix_dv: Some(Box::new(matrix_dv)),
        matrix_dx: Some(Box::new(matrix_dx)),
    })
}

/// Adds the constant-curvature tensor `R_C` to a vertical curvature field,
/// raising every vertical sectional curvature at the zero-section by
/// `C |U ^ V|^2` while leaving all transported hessians unchanged.
pub fn boost_field(rf: VerticalCurvatureField, c: f64) -> Result<VerticalCurvatureField> {
    let rank = rf.rank;
    rf.sum(VerticalCurvatureField::constant(
        CurvatureTensor::constant_curvature(rank, c)?,
    ))
}

/// Numerical report on the warping-function properties.
#[derive(Debug, Clone)]
pub struct WarpPropertyReport {
    /// Smallest eigenvalue of `F(W, ., .)` over the sample set.
    pub min_eigenvalue: f64,
    /// Worst violation of `F(W,W,U) = <W,U>`.
    pub gauss_lemma_err: f64,
    /// Worst violation of the vanishing first radial derivative.
    pub radial_derivative_err: f64,
    /// Worst violation of the mixed-second-derivative symmetry.
    pub mixed_symmetry_err: f64,
}

impl WarpPropertyReport {
    /// Derived properties 3-4 are consequences of smoothness; a violation
    /// flags a custom warping outside the assumed class.
    pub fn violates_smoothness(&self, tol: f64) -> bool {
        self.radial_derivative_err > tol || self.mixed_symmetry_err > tol
    }
}

/// Samples the warping-function properties at the given base points and a
/// fixed direction set of radius `r`.
pub fn check_warping_properties(
    w: &WarpingFunction,
    points: &[ChartPoint],
    r: f64,
) -> WarpPropertyReport {
    let k = w.rank;
    let mut dirs: Vec<DVector<f64>> = Vec::new();
    for a in 0..k {
        let mut e = DVector::zeros(k);
        e[a] = 1.0;
        dirs.push(e);
    }
    for a in 0..k {
        for b in (a + 1)..k {
            let mut e = DVector::zeros(k);
            e[a] = std::f64::consts::FRAC_1_SQRT_2;
            e[b] = std::f64::consts::FRAC_1_SQRT_2;
            dirs.push(e.clone());
            e[b] = -e[b];
            dirs.push(e);
        }
    }

    let mut report = WarpPropertyReport {
        min_eigenvalue: f64::INFINITY,
        gauss_lemma_err: 0.0,
        radial_derivative_err: 0.0,
        mixed_symmetry_err: 0.0,
    };
    let h = 1e-3;
    for p in points {
        for d in &dirs {
            let big_w = d * r;
            let m = w.matrix_at(p, &big_w);
            let min_eig = m
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |a, &b| a.min(b));
            report.min_eigenvalue = report.min_eigenvalue.min(min_eig);

            for u in &dirs {
                let lhs = w.value(p, &big_w, &big_w, u);
                report.gauss_lemma_err = report.gauss_lemma_err.max((lhs - big_w.dot(u)).abs());

                let dr = stencil::d1_central(h, |t| w.value(p, &(&big_w * (1.0 + t)), d, u));
                report.radial_derivative_err = report.radial_derivative_err.max(dr.abs());
            }

            // property 4 on a pair of directions
            for u in dirs.iter().take(2) {
                let w1 = d;
                let w2 = u;
                let lhs = stencil::d2_mixed(h, |s, t| {
                    w.value(p, &(w1 * t + w2 * s), &dirs[0], &dirs[k.min(dirs.len()) - 1])
                });
                let rhs = stencil::d2_mixed(h, |s, t| {
                    w.value(p, &(&dirs[0] * t + &dirs[k.min(dirs.len()) - 1] * s), w1, w2)
                });
                report.mixed_symmetry_err = report.mixed_symmetry_err.max((lhs - rhs).abs());
            }
        }
    }
    report
}

/// A point of a total-space chart: base chart index, base coordinates,
/// fiber coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalPoint {
    pub chart: usize,
    pub base: DVector<f64>,
    pub fiber: DVector<f64>,
}

impl TotalPoint {
    pub fn new(chart: usize, base: DVector<f64>, fiber: DVector<f64>) -> Self {
        TotalPoint { chart, base, fiber }
    }

    pub fn soul(chart: usize, base: DVector<f64>, rank: usize) -> Self {
        TotalPoint {
            chart,
            base,
            fiber: DVector::zeros(rank),
        }
    }

    pub fn base_point(&self) -> ChartPoint {
        ChartPoint::new(self.chart, self.base.clone())
    }

    pub fn radius(&self) -> f64 {
        self.fiber.norm()
    }

    /// Total-space coordinates as one vector (base then fiber).
    pub fn coords(&self) -> DVector<f64> {
        let m = self.base.len();
        let k = self.fiber.len();
        DVector::from_iterator(
            m + k,
            self.base.iter().copied().chain(self.fiber.iter().copied()),
        )
    }
}

/// Orthogonal splitting of a total tangent space into the horizontal
/// distribution, the sphere-tangential vertical directions, and the radial
/// span (the whole fiber at the zero-section).
#[derive(Debug, Clone)]
pub struct Splitting {
    pub horizontal: Vec<DVector<f64>>,
    pub vertical: Vec<DVector<f64>>,
    pub radial: Vec<DVector<f64>>,
}

/// The metric of a (warped) connection metric on a total-space chart,
/// valid on the tube `|v| <= r_max`.
pub struct TotalMetricField {
    pub bundle: Arc<BundleSpec>,
    pub warping: Arc<WarpingFunction>,
    pub r_max: f64,
    pub r_max_requested: f64,
    pub name: String,
}

impl TotalMetricField {
    pub fn base_dim(&self) -> usize {
        self.bundle.base.dim()
    }

    pub fn fiber_rank(&self) -> usize {
        self.bundle.rank
    }

    pub fn total_dim(&self) -> usize {
        self.base_dim() + self.fiber_rank()
    }

    fn check_radius(&self, q: &TotalPoint) -> Result<()> {
        if q.radius() > self.r_max * (1.0 + 1e-9) {
            return Err(Error::Domain(format!(
                "point at fiber radius {:.4} exceeds r_max {:.4}",
                q.radius(),
                self.r_max
            )));
        }
        Ok(())
    }

    /// The (m+k) x (m+k) symmetric metric matrix at a total point.
    pub fn metric_at(&self, q: &TotalPoint) -> Result<DMatrix<f64>> {
        self.check_radius(q)?;
        let m = self.base_dim();
        let k = self.fiber_rank();
        let bp = q.base_point();
        let g_sigma = self.bundle.base.metric_at(&bp);
        let omega = self.bundle.connection_at(&bp);
        let fmat = self.warping.matrix_at(&bp, &q.fiber);

        let mut g = DMatrix::zeros(m + k, m + k);
        let omv: Vec<DVector<f64>> = omega.iter().map(|om| om * &q.fiber).collect();
        for i in 0..m {
            for j in 0..=i {
                let val = g_sigma[(i, j)] + omv[i].dot(&(&fmat * &omv[j]));
                g[(i, j)] = val;
                g[(j, i)] = val;
            }
        }
        for i in 0..m {
            let row = &fmat * &omv[i];
            for a in 0..k {
                g[(i, m + a)] = row[a];
                g[(m + a, i)] = row[a];
            }
        }
        for a in 0..k {
            for b in 0..=a {
                g[(m + a, m + b)] = fmat[(a, b)];
                g[(m + b, m + a)] = fmat[(a, b)];
            }
        }
        Ok(g)
    }

    pub fn inner(&self, q: &TotalPoint, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        Ok(a.dot(&(self.metric_at(q)? * b)))
    }

    pub fn has_analytic_deriv(&self) -> bool {
        self.bundle.base.metric.has_analytic_deriv()
            && self.bundle.has_analytic_deriv()
            && self.warping.has_analytic_derivs()
    }

    /// Coordinate derivatives of the total metric (base directions first,
    /// then fiber directions); assembled from the component callbacks when
    /// all are analytic, otherwise by central differences.
    pub fn metric_deriv_at(&self, q: &TotalPoint, h: f64) -> Result<Vec<DMatrix<f64>>> {
        if self.has_analytic_deriv() {
            self.metric_deriv_analytic(q, h)
        } else {
            self.metric_deriv_fd(q, h)
        }
    }

    pub fn metric_deriv_fd(&self, q: &TotalPoint, h: f64) -> Result<Vec<DMatrix<f64>>> {
        let n = self.total_dim();
        let m = self.base_dim();
        let mut out = Vec::with_capacity(n);
        for d in 0..n {
            let at = |t: f64| -> Result<DMatrix<f64>> {
                let mut qt = q.clone();
                if d < m {
                    qt.base[d] += t;
                } else {
                    qt.fiber[d - m] += t;
                }
                self.metric_at(&qt)
            };
            let coarse = (at(h)? - at(-h)?) / (2.0 * h);
            let fine = (at(h / 2.0)? - at(-h / 2.0)?) / h;
            out.push((fine * 4.0 - coarse) / 3.0);
        }
        Ok(out)
    }

    pub fn metric_deriv_analytic(&self, q: &TotalPoint, h: f64) -> Result<Vec<DMatrix<f64>>> {
        self.check_radius(q)?;
        let m = self.base_dim();
        let k = self.fiber_rank();
        let n = m + k;
        let bp = q.base_point();
        let v = &q.fiber;

        let dg_sigma = self.bundle.base.metric.deriv_at(bp.chart, &bp.coords, h);
        let omega = self.bundle.connection_at(&bp);
        let domega = self.bundle.connection_deriv_at(&bp, h);
        let fmat = self.warping.matrix_at(&bp, v);
        let df_dx = self.warping.matrix_dx_at(&bp, v, h);
        let df_dv = self.warping.matrix_dv_at(&bp, v, h);

        let omv: Vec<DVector<f64>> = omega.iter().map(|om| om * v).collect();
        let mut out = Vec::with_capacity(n);

        // base directions
        for d in 0..m {
            let mut dgm = DMatrix::zeros(n, n);
            let domv: Vec<DVector<f64>> = (0..m).map(|i| &domega[d][i] * v).collect();
            for i in 0..m {
                for j in 0..=i {
                    let val = dg_sigma[d][(i, j)]
                        + domv[i].dot(&(&fmat * &omv[j]))
                        + omv[i].dot(&(&df_dx[d] * &omv[j]))
                        + omv[i].dot(&(&fmat * &domv[j]));
                    dgm[(i, j)] = val;
                    dgm[(j, i)] = val;
                }
            }
            for i in 0..m {
                let row = &df_dx[d] * &omv[i] + &fmat * &domv[i];
                for a in 0..k {
                    dgm[(i, m + a)] = row[a];
                    dgm[(m + a, i)] = row[a];
                }
            }
            for a in 0..k {
                for b in 0..k {
                    dgm[(m + a, m + b)] = df_dx[d][(a, b)];
                }
            }
            out.push(dgm);
        }

        // fiber directions
        for (c, df_c) in df_dv.iter().enumerate() {
            let mut dgm = DMatrix::zeros(n, n);
            let domv: Vec<DVector<f64>> = (0..m).map(|i| omega[i].column(c).into_owned()).collect();
            for i in 0..m {
                for j in 0..=i {
                    let val = domv[i].dot(&(&fmat * &omv[j]))
                        + omv[i].dot(&(df_c * &omv[j]))
                        + omv[i].dot(&(&fmat * &domv[j]));
                    dgm[(i, j)] = val;
                    dgm[(j, i)] = val;
                }
            }
            for i in 0..m {
                let row = df_c * &omv[i] + &fmat * &domv[i];
                for a in 0..k {
                    dgm[(i, m + a)] = row[a];
                    dgm[(m + a, i)] = row[a];
                }
            }
            for a in 0..k {
                for b in 0..k {
                    dgm[(m + a, m + b)] = df_c[(a, b)];
                }
            }
            out.push(dgm);
        }
        Ok(out)
    }

    /// Horizontal lift of a base tangent vector to the total tangent space
    /// at `q`: `(xdot, -omega(xdot) v)`.
    pub fn horizontal_lift(&self, q: &TotalPoint, xdir: &DVector<f64>) -> DVector<f64> {
        let m = self.base_dim();
        let k = self.fiber_rank();
        let om = self.bundle.connection_applied(&q.base_point(), xdir);
        let tail = -(om * &q.fiber);
        DVector::from_iterator(m + k, xdir.iter().copied().chain(tail.iter().copied()))
    }

    /// A fiber vector as a vertical total tangent vector `(0, u)`.
    pub fn vertical_embed(&self, u: &DVector<f64>) -> DVector<f64> {
        let m = self.base_dim();
        let k = self.fiber_rank();
        DVector::from_iterator(m + k, std::iter::repeat_n(0.0, m).chain(u.iter().copied()))
    }

    /// Horizontal part of a total tangent vector at `q`.
    pub fn h_project(&self, q: &TotalPoint, z: &DVector<f64>) -> DVector<f64> {
        let m = self.base_dim();
        let xpart = DVector::from_iterator(m, z.iter().take(m).copied());
        self.horizontal_lift(q, &xpart)
    }

    /// Fiber-valued vertical part: `z - h_project(z)` as a fiber vector.
    pub fn v_project(&self, q: &TotalPoint, z: &DVector<f64>) -> DVector<f64> {
        let m = self.base_dim();
        let k = self.fiber_rank();
        let xpart = DVector::from_iterator(m, z.iter().take(m).copied());
        let om = self.bundle.connection_applied(&q.base_point(), &xpart);
        let vpart = DVector::from_iterator(k, z.iter().skip(m).copied());
        vpart + om * &q.fiber
    }

    /// The H + V + r splitting at `q`. At the zero-section the radial span
    /// is the whole fiber and V is empty.
    pub fn splitting(&self, q: &TotalPoint) -> Result<Splitting> {
        self.check_radius(q)?;
        let m = self.base_dim();
        let k = self.fiber_rank();
        let horizontal = (0..m)
            .map(|i| {
                let mut e = DVector::zeros(m);
                e[i] = 1.0;
                self.horizontal_lift(q, &e)
            })
            .collect();
        let r = q.radius();
        if r < 1e-14 {
            let radial = (0..k)
                .map(|a| {
                    let mut e = DVector::zeros(k);
                    e[a] = 1.0;
                    self.vertical_embed(&e)
                })
                .collect();
            return Ok(Splitting {
                horizontal,
                vertical: Vec::new(),
                radial,
            });
        }
        let vhat = &q.fiber / r;
        let radial = vec![self.vertical_embed(&vhat)];
        // Euclidean-orthonormal completion of vhat in the fiber
        let mut vertical = Vec::with_capacity(k - 1);
        let mut basis: Vec<DVector<f64>> = vec![vhat.clone()];
        for a in 0..k {
            let mut e = DVector::zeros(k);
            e[a] = 1.0;
            for b in &basis {
                let proj = e.dot(b);
                e -= b * proj;
            }
            let norm = e.norm();
            if norm > 1e-8 {
                let u = e / norm;
                vertical.push(self.vertical_embed(&u));
                basis.push(u);
            }
            if basis.len() == k {
                break;
            }
        }
        Ok(Splitting {
            horizontal,
            vertical,
            radial,
        })
    }
}

/// Deterministic base sample points used by the builder's positivity scan.
fn builder_sample_points(bundle: &BundleSpec) -> Vec<ChartPoint> {
    let m = bundle.base.dim();
    let n_charts = bundle.base.atlas.charts.len();
    let grid = [-0.9, -0.3, 0.3, 0.9];
    let mut pts = Vec::new();
    for chart in 0..n_charts {
        if m == 2 {
            for &a in &grid {
                for &b in &grid {
                    pts.push(ChartPoint::new(chart, DVector::from_vec(vec![a, b])));
                }
            }
        } else {
            // coarser lattice in higher dimension
            for &a in &[-0.6, 0.3, 0.9] {
                for &b in &[-0.6, 0.3, 0.9] {
                    for &c in &[-0.5, 0.5] {
                        for &d in &[-0.5, 0.5] {
                            pts.push(ChartPoint::new(chart, DVector::from_vec(vec![a, b, c, d])));
                        }
                    }
                }
            }
        }
    }
    pts
}

/// Builds the total metric determined by `{g_Sigma, omega, F}` on the tube
/// of radius `r_max`. When the warping loses positive definiteness before
/// the requested radius (possible for curvature-built warpings), the tube
/// is shrunk by bisection and the achieved radius is recorded.
pub fn build_total_metric(
    bundle: Arc<BundleSpec>,
    warping: Arc<WarpingFunction>,
    r_max: f64,
) -> Result<TotalMetricField> {
    if warping.rank != bundle.rank {
        return Err(Error::Structural(format!(
            "warping rank {} does not match bundle rank {}",
            warping.rank, bundle.rank
        )));
    }
    if r_max <= 0.0 {
        return Err(Error::Structural("r_max must be positive".into()));
    }
    let points = builder_sample_points(&bundle);
    let pd_ok = |r: f64| -> bool {
        let report = check_warping_properties(&warping, &points, r);
        report.min_eigenvalue > 1e-10
    };

    let achieved = if pd_ok(r_max) && pd_ok(r_max * 0.75) && pd_ok(r_max * 0.5) && pd_ok(r_max * 0.25)
    {
        r_max
    } else {
        // bisection for the positivity radius
        let mut lo = 0.0;
        let mut hi = r_max;
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if pd_ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let shrunk = lo * 0.95;
        if shrunk <= 1e-6 {
            return Err(Error::Structural(
                "warping function is not positive definite near the zero-section".into(),
            ));
        }
        shrunk
    };

    let name = format!("{}:{:?}", bundle.id, warping.kind);
    Ok(TotalMetricField {
        bundle,
        warping,
        r_max: achieved,
        r_max_requested: r_max,
        name,
    })
}

/// Induced metric on the distance sphere `E^1_{r0}` around the
/// zero-section, charted as base chart x stereographic fiber-sphere chart.
/// Chart index is `base_chart * 2 + fiber_chart`.
pub struct SphereBundleMetric {
    pub total: Arc<TotalMetricField>,
    pub r0: f64,
}

impl SphereBundleMetric {
    pub fn dim(&self) -> usize {
        self.total.total_dim() - 1
    }

    pub fn n_charts(&self) -> usize {
        self.total.bundle.base.atlas.charts.len() * 2
    }

    fn split(&self, chart: usize) -> (usize, usize) {
        (chart / 2, chart % 2)
    }

    /// Unit fiber-sphere point of the stereographic coordinates.
    pub fn unit_fiber(&self, fiber_chart: usize, xi: &DVector<f64>) -> DVector<f64> {
        let k = self.total.fiber_rank();
        let s2 = xi.norm_squared();
        let denom = 1.0 + s2;
        let mut u = DVector::zeros(k);
        for a in 0..k - 1 {
            u[a] = 2.0 * xi[a] / denom;
        }
        u[k - 1] = if fiber_chart == 0 {
            (1.0 - s2) / denom
        } else {
            -(1.0 - s2) / denom
        };
        u
    }

    /// Jacobian of `unit_fiber` (k rows, k-1 columns).
    pub fn unit_fiber_jac(&self, fiber_chart: usize, xi: &DVector<f64>) -> DMatrix<f64> {
        let k = self.total.fiber_rank();
        let s2 = xi.norm_squared();
        let denom = 1.0 + s2;
        let d2 = denom * denom;
        let mut jac = DMatrix::zeros(k, k - 1);
        for a in 0..k - 1 {
            for al in 0..k - 1 {
                jac[(a, al)] =
                    (2.0 * if a == al { 1.0 } else { 0.0 } * denom - 4.0 * xi[a] * xi[al]) / d2;
            }
        }
        for al in 0..k - 1 {
            jac[(k - 1, al)] = if fiber_chart == 0 {
                -4.0 * xi[al] / d2
            } else {
                4.0 * xi[al] / d2
            };
        }
        jac
    }

    /// Total-space point of hypersurface coordinates `z = (x, xi)`.
    pub fn embed_point(&self, chart: usize, z: &DVector<f64>) -> TotalPoint {
        let (base_chart, fiber_chart) = self.split(chart);
        let m = self.total.base_dim();
        let x = DVector::from_iterator(m, z.iter().take(m).copied());
        let xi = DVector::from_iterator(z.len() - m, z.iter().skip(m).copied());
        TotalPoint::new(base_chart, x, self.unit_fiber(fiber_chart, &xi) * self.r0)
    }

    /// Jacobian of the embedding (total_dim rows, dim columns).
    pub fn embed_jacobian(&self, chart: usize, z: &DVector<f64>) -> DMatrix<f64> {
        let (_, fiber_chart) = self.split(chart);
        let m = self.total.base_dim();
        let k = self.total.fiber_rank();
        let xi = DVector::from_iterator(z.len() - m, z.iter().skip(m).copied());
        let mut jac = DMatrix::zeros(m + k, m + k - 1);
        for i in 0..m {
            jac[(i, i)] = 1.0;
        }
        let fj = self.unit_fiber_jac(fiber_chart, &xi) * self.r0;
        for a in 0..k {
            for al in 0..k - 1 {
                jac[(m + a, m + al)] = fj[(a, al)];
            }
        }
        jac
    }

    /// First fundamental form of the distance sphere at `z`.
    pub fn metric(&self, chart: usize, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        let q = self.embed_point(chart, z);
        let jac = self.embed_jacobian(chart, z);
        let g = self.total.metric_at(&q)?;
        Ok(jac.transpose() * g * jac)
    }
}

/// Distance-sphere metric at radius `r0` inside the built tube.
pub fn sphere_bundle_metric(total: Arc<TotalMetricField>, r0: f64) -> Result<SphereBundleMetric> {
    if r0 <= 0.0 || r0 >= total.r_max {
        return Err(Error::Domain(format!(
            "sphere radius {r0} outside (0, r_max = {})",
            total.r_max
        )));
    }
    if total.fiber_rank() < 2 {
        return Err(Error::Structural("sphere bundle needs fiber rank >= 2".into()));
    }
    Ok(SphereBundleMetric { total, r0 })
}
