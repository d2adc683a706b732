//! Seeded sampling of the curvature inequalities and definiteness gates.
//!
//! Compactness arguments are replaced by dense deterministic sampling:
//! a [`SamplePlan`] fixes the seed, the counts, and the vector gauge, and
//! every report carries per-sample margins plus the worst case. Verdicts
//! are numerically supported statements about the sampled set, never
//! proofs.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::base::{riemann_base, ChartPoint};
use crate::bundle::{self, BundleSpec, VerticalCurvatureField};
use crate::engine::{self, riemann_total, sectional_patch, TwoPlane};
use crate::tensor::{wedge_norm_sq, wedge_norm_sq_euclidean, Definiteness, QuadraticForm};
use crate::warp::{SphereBundleMetric, TotalMetricField, TotalPoint};
use crate::{Error, Result, StencilConfig};

/// Vector gauge used when drawing sample tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gauge {
    /// Unnormalized Gaussian draws (nondegeneracy enforced).
    General,
    /// X,Y orthonormal in the base metric; W,V orthonormal in the fiber.
    OrthonormalXYWV,
    /// |X| = |W| = |V| = 1, V and U perpendicular to W, Y and U of varying
    /// magnitude: the gauge of the boost-search argument.
    Claim2Gauge,
}

/// Deterministic sampling plan: identical plans produce identical samples
/// and identical reports.
#[derive(Debug, Clone, Copy)]
pub struct SamplePlan {
    pub seed: u64,
    pub n_points: usize,
    pub n_tuples: usize,
    pub gauge: Gauge,
}

impl SamplePlan {
    pub fn new(seed: u64, n_points: usize, n_tuples: usize, gauge: Gauge) -> Self {
        SamplePlan {
            seed,
            n_points,
            n_tuples,
            gauge,
        }
    }
}

/// One sampled configuration: a base point and the vector tuple.
#[derive(Debug, Clone)]
pub struct VectorSample {
    pub index: usize,
    pub p: ChartPoint,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub w: DVector<f64>,
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
    DVector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

fn unit_in(g: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    let n = v.dot(&(g * v)).sqrt();
    v / n
}

fn orthonormal_pair(rng: &mut ChaCha8Rng, g: &DMatrix<f64>, dim: usize) -> (DVector<f64>, DVector<f64>) {
    loop {
        let a = gaussian(rng, dim);
        let b = gaussian(rng, dim);
        if wedge_norm_sq(&a, &b, g) < 1e-6 {
            continue;
        }
        let x = unit_in(g, &a);
        let mut y = b.clone();
        let proj = y.dot(&(g * &x));
        y -= &x * proj;
        return (x, unit_in(g, &y));
    }
}

fn unit_perp_euclid(rng: &mut ChaCha8Rng, w: &DVector<f64>) -> DVector<f64> {
    let k = w.len();
    loop {
        let mut v = gaussian(rng, k);
        let proj = v.dot(w) / w.norm_squared();
        v -= w * proj;
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

fn draw_point(rng: &mut ChaCha8Rng, base: &crate::base::BaseManifold, chart: usize) -> ChartPoint {
    let m = base.dim();
    let coords = if base.atlas.charts[chart].switch_radius.is_some() {
        loop {
            let c = DVector::from_iterator(m, (0..m).map(|_| rng.random_range(-1.1..1.1)));
            if c.norm() <= 1.1 {
                break c;
            }
        }
    } else {
        DVector::from_iterator(m, (0..m).map(|_| rng.random_range(0.0..1.0)))
    };
    ChartPoint::new(chart, coords)
}

/// Draws the full deterministic sample set for a bundle.
pub fn draw_samples(b: &BundleSpec, plan: &SamplePlan) -> Vec<VectorSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let m = b.base.dim();
    let k = b.rank;
    let mut out = Vec::with_capacity(b.base.atlas.charts.len() * plan.n_points * plan.n_tuples);
    let mut index = 0;
    for chart in 0..b.base.atlas.charts.len() {
        for _ in 0..plan.n_points {
            let p = draw_point(&mut rng, b.base.as_ref(), chart);
            let g = b.base.metric_at(&p);
            for _ in 0..plan.n_tuples {
                let (x, y, u, v, w) = match plan.gauge {
                    Gauge::General => loop {
                        let x = gaussian(&mut rng, m);
                        let y = gaussian(&mut rng, m);
                        let u = gaussian(&mut rng, k);
                        let v = gaussian(&mut rng, k);
                        let w = gaussian(&mut rng, k);
                        if wedge_norm_sq(&x, &y, &g) > 1e-6
                            && wedge_norm_sq_euclidean(&w, &v) > 1e-6
                            && wedge_norm_sq_euclidean(&u, &v) > 1e-6
                        {
                            break (x, y, u, v, w);
                        }
                    },
                    Gauge::OrthonormalXYWV => {
                        let (x, y) = orthonormal_pair(&mut rng, &g, m);
                        let ident = DMatrix::identity(k, k);
                        let (w, v) = orthonormal_pair(&mut rng, &ident, k);
                        let u = gaussian(&mut rng, k);
                        (x, y, u, v, w)
                    }
                    Gauge::Claim2Gauge => {
                        let x = unit_in(&g, &gaussian(&mut rng, m));
                        let w = {
                            let raw = gaussian(&mut rng, k);
                            &raw / raw.norm()
                        };
                        let v = unit_perp_euclid(&mut rng, &w);
                        let u_scale: f64 = (rng.sample::<f64, _>(StandardNormal) * 0.8).exp();
                        let u = unit_perp_euclid(&mut rng, &w) * u_scale;
                        let y_scale: f64 = (rng.sample::<f64, _>(StandardNormal) * 0.8).exp();
                        let y = unit_in(&g, &gaussian(&mut rng, m)) * y_scale;
                        (x, y, u, v, w)
                    }
                };
                out.push(VectorSample {
                    index,
                    p: p.clone(),
                    x,
                    y,
                    u,
                    v,
                    w,
                });
                index += 1;
            }
        }
    }
    out
}

/// Outcome of an inequality over the sampled set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    HoldsStrictly,
    Violated,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Holds => write!(f, "holds"),
            Verdict::HoldsStrictly => write!(f, "holds_strictly"),
            Verdict::Violated => write!(f, "violated"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MarginSample {
    pub index: usize,
    pub chart: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// Per-sample margins with worst-case aggregation.
#[derive(Debug, Clone)]
pub struct MarginReport {
    pub id: String,
    pub citation: String,
    pub samples: Vec<MarginSample>,
    pub worst_margin: f64,
    pub worst_index: usize,
    pub verdict: Verdict,
    pub strict: bool,
    pub tol: f64,
    /// Named auxiliary values (fatness witness, zero-set diagnostics).
    pub extra: Vec<(String, f64)>,
}

impl MarginReport {
    fn from_samples(
        id: &str,
        citation: &str,
        samples: Vec<MarginSample>,
        strict: bool,
        tol: f64,
    ) -> Self {
        let (worst_index, worst_margin) = samples
            .iter()
            .map(|s| (s.index, s.margin))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, f64::INFINITY));
        let verdict = if strict {
            if worst_margin > tol {
                Verdict::HoldsStrictly
            } else {
                Verdict::Violated
            }
        } else if worst_margin < -tol {
            Verdict::Violated
        } else if worst_margin > tol {
            Verdict::HoldsStrictly
        } else {
            Verdict::Holds
        };
        MarginReport {
            id: id.into(),
            citation: citation.into(),
            samples,
            worst_margin,
            worst_index,
            verdict,
            strict,
            tol,
            extra: Vec::new(),
        }
    }
}

/// Margin tolerances: algebraic identities vs stencil-backed quantities.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub algebraic: f64,
    pub stencil: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            algebraic: 1e-6,
            stencil: 1e-3,
        }
    }
}

/// Connection-level quantities of one sample, shared by the inequality
/// assemblies.
#[derive(Debug, Clone)]
pub struct ConnData {
    pub k_sigma: f64,
    pub adj_norm2: f64,
    pub dxr: f64,
    pub hess: f64,
    pub k_f: f64,
    pub r_xy_uv: f64,
    pub wedge_uv: f64,
    pub y_norm: f64,
    pub d_wuvv: f64,
    pub d_wvuv: f64,
    pub fatness: f64,
    pub rxyw_norm2: f64,
}

/// Evaluates every connection-level primitive the margin assemblies need.
pub fn connection_data(
    b: &BundleSpec,
    rf: Option<&VerticalCurvatureField>,
    s: &VectorSample,
    cfg: &StencilConfig,
) -> Result<ConnData> {
    let h = cfg.base_step;
    let p = &s.p;
    let g = b.base.metric_at(p);
    let (r_base, _) = riemann_base(b.base.as_ref(), p, h)?;
    let k_sigma = r_base.sectional(&s.x, &s.y);
    let adj = bundle::curvature_adjoint(b, p, &s.w, &s.v, &s.x, h)?;
    let adj_norm2 = adj.dot(&(&g * &adj));
    let dxr = bundle::covariant_derivative_curvature(b, p, &s.x, &s.y, &s.w, &s.v, cfg.hessian_step)?;
    let form_xy = bundle::curvature_form(b, p, &s.x, &s.y, h);
    let r_xy_uv = (&form_xy * &s.u).dot(&s.v);
    let rxyw = &form_xy * &s.w;
    let rxyw_norm2 = rxyw.norm_squared();

    let (k_f, hess, d_wuvv, d_wvuv) = match rf {
        Some(field) => {
            let (_, hess) = bundle::kf_and_hessian(b, field, p, &s.x, &s.w, &s.v, cfg.hessian_step)?;
            let d1 = bundle::symmetrized_directional_derivative(
                b,
                field,
                p,
                &s.x,
                &s.w,
                &s.u,
                &s.v,
                &s.v,
                cfg.hessian_step,
            )?;
            let d2 = bundle::symmetrized_directional_derivative(
                b,
                field,
                p,
                &s.x,
                &s.w,
                &s.v,
                &s.u,
                &s.v,
                cfg.hessian_step,
            )?;
            (field.k_f(p, &s.u, &s.v), hess, d1, d2)
        }
        None => (0.0, 0.0, 0.0, 0.0),
    };

    // fatness witness: |R(W,V)X| on the normalized configuration
    let fatness = {
        let xn = unit_in(&g, &s.x);
        let wn = &s.w / s.w.norm();
        let mut vn = s.v.clone();
        let proj = vn.dot(&wn);
        vn -= &wn * proj;
        if vn.norm() < 1e-9 {
            0.0
        } else {
            vn /= vn.norm();
            let a = bundle::curvature_adjoint(b, p, &wn, &vn, &xn, h)?;
            a.dot(&(&g * &a)).sqrt()
        }
    };

    Ok(ConnData {
        k_sigma,
        adj_norm2,
        dxr,
        hess,
        k_f,
        r_xy_uv,
        wedge_uv: wedge_norm_sq_euclidean(&s.u, &s.v),
        y_norm: s.y.dot(&(&g * &s.y)).sqrt(),
        d_wuvv,
        d_wvuv,
        fatness,
        rxyw_norm2,
    })
}

fn eval_samples<F>(samples: &[VectorSample], eval: F) -> Result<Vec<MarginSample>>
where
    F: Fn(&VectorSample) -> Result<(f64, f64)> + Sync,
{
    samples
        .par_iter()
        .map(|s| {
            let (lhs, rhs) = eval(s)?;
            Ok(MarginSample {
                index: s.index,
                chart: s.p.chart,
                lhs,
                rhs,
                margin: rhs - lhs,
            })
        })
        .collect()
}

/// Necessary-condition margin: `<(D_X R)(X,Y)W,V>^2` against
/// `(|R(W,V)X|^2 + (2/3) hess_{k_F(W,V)}(X)) k_Sigma(X,Y)`.
pub fn theorem_a_report(
    b: &BundleSpec,
    rf: &VerticalCurvatureField,
    plan: &SamplePlan,
    cfg: &StencilConfig,
    tols: &Tolerances,
) -> Result<MarginReport> {
    let samples = draw_samples(b, plan);
    let margins = eval_samples(&samples, |s| {
        let d = connection_data(b, Some(rf), s, cfg)?;
        let lhs = d.dxr * d.dxr;
        let rhs = (d.adj_norm2 + (2.0 / 3.0) * d.hess) * d.k_sigma;
        Ok((lhs, rhs))
    })?;
    Ok(MarginReport::from_samples(
        "thmA",
        "Theorem A",
        margins,
        false,
        tols.stencil,
    ))
}

/// Strict connection-metric margin (no hessian term), plus the fatness
/// witness `min |R(W,V)X|` over normalized samples.
pub fn theorem_b_report(
    b: &BundleSpec,
    plan: &SamplePlan,
    cfg: &StencilConfig,
    tols: &Tolerances,
) -> Result<MarginReport> {
    let samples = draw_samples(b, plan);
    let data: Vec<ConnData> = samples
        .par_iter()
        .map(|s| connection_data(b, None, s, cfg))
        .collect::<Result<Vec<_>>>()?;
    let margins: Vec<MarginSample> = samples
        .iter()
        .zip(&data)
        .map(|(s, d)| MarginSample {
            index: s.index,
            chart: s.p.chart,
            lhs: d.dxr * d.dxr,
            rhs: d.adj_norm2 * d.k_sigma,
            margin: d.adj_norm2 * d.k_sigma - d.dxr * d.dxr,
        })
        .collect();
    let mut report =
        MarginReport::from_samples("thmB", "Theorem B.1", margins, true, tols.stencil);
    let witness = data.iter().map(|d| d.fatness).fold(f64::INFINITY, f64::min);
    report.extra.push(("fatness_witness".into(), witness));
    let worst_lhs = data.iter().map(|d| d.dxr * d.dxr).fold(0.0, f64::max);
    report.extra.push(("max_lhs".into(), worst_lhs));
    Ok(report)
}

/// Strict sufficient-condition margin with the hessian term.
pub fn theorem_c_report(
    b: &BundleSpec,
    rf: &VerticalCurvatureField,
    plan: &SamplePlan,
    cfg: &StencilConfig,
    tols: &Tolerances,
) -> Result<MarginReport> {
    let samples = draw_samples(b, plan);
    let margins = eval_samples(&samples, |s| {
        let d = connection_data(b, Some(rf), s, cfg)?;
        let lhs = d.dxr * d.dxr;
        let rhs = (d.adj_norm2 + (2.0 / 3.0) * d.hess) * d.k_sigma;
        Ok((lhs, rhs))
    })?;
    Ok(MarginReport::from_samples(
        "thmC",
        "Theorem C",
        margins,
        true,
        tols.stencil,
    ))
}

/// The diameter-weighted connection-metric inequality:
/// `<(D_X R)(X,Y)W,V>^2 <= |R(W,V)X|^2 (k_Sigma - (3/4) eps^2 |R(X,Y)W|^2)`.
pub fn strake_walschap_report(
    b: &BundleSpec,
    plan: &SamplePlan,
    eps_diam: f64,
    cfg: &StencilConfig,
    tols: &Tolerances,
) -> Result<MarginReport> {
    let samples = draw_samples(b, plan);
    let margins = eval_samples(&samples, |s| {
        let d = connection_data(b, None, s, cfg)?;
        let lhs = d.dxr * d.dxr;
        let rhs = d.adj_norm2 * (d.k_sigma - 0.75 * eps_diam * eps_diam * d.rxyw_norm2);
        Ok((lhs, rhs))
    })?;
    Ok(MarginReport::from_samples(
        "sw",
        "Ineq. 2 (Strake-Walschap)",
        margins,
        false,
        tols.stencil,
    ))
}

/// `9 (X,Y,U,V)^2 <= 4 k_Sigma(X,Y) k_F(U,V)` at the soul of a built
/// metric, with all four quantities read from the total-space curvature.
pub fn walschap_corollary_report(
    total: &TotalMetricField,
    plan: &SamplePlan,
    cfg: &StencilConfig,
    tols: &Tolerances,
) -> Result<MarginReport> {
    let samples = draw_samples(total.bundle.as_ref(), plan);
    // group by base point: one curvature tensor per point
    let margins: Vec<MarginSample> = samples
        .par_chunks(plan.n_tuples.max(1))
        .map(|chunk| -> Result<Vec<MarginSample>> {
            let p = &chunk[0].p;
            let q = TotalPoint::soul(p.chart, p.coords.clone(), total.fiber_rank());
            let (r_e, _) = riemann_total(total, &q, cfg.base_step)?;
            chunk
                .iter()
                .map(|s| {
                    let xb = total.horizontal_lift(&q, &s.x);
                    let yb = total.horizontal_lift(&q, &s.y);
                    let ub = total.vertical_embed(&s.u);
                    let vb = total.vertical_embed(&s.v);
                    let mixed = r_e.value(&xb, &yb, &ub, &vb);
                    let k_sigma = r_e.sectional(&xb, &yb);
                    let k_f = r_e.sectional(&ub, &vb);
                    let lhs = 9.0 * mixed * mixed;
                    let rhs = 4.0 * k_sigma * k_f;
                    Ok(MarginSample {
                        index: s.index,
                        chart: s.p.chart,
                        lhs,
                        rhs,
                        margin: rhs - lhs,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(MarginReport::from_samples(
        "cor26",
        "Cor. 2.6",
        margins,
        false,
        tols.stencil,
    ))
}

/// The 2x2 form of the necessary condition at one sample:
/// `[[2 k_Sigma, dxr], [dxr, (1/2)|R(W,V)X|^2 + (1/3) hess]]`.
/// Its determinant equals the Theorem A margin.
pub fn q_form_necessary(
    b: &BundleSpec,
    rf: &VerticalCurvatureField,
    s: &VectorSample,
    cfg: &StencilConfig,
) -> Result<(QuadraticForm, ConnData)> {
    let d = connection_data(b, Some(rf), s, cfg)?;
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            2.0 * d.k_sigma,
            d.dxr,
            d.dxr,
            0.5 * d.adj_norm2 + d.hess / 3.0,
        ],
    );
    Ok((QuadraticForm::new(m, 1e-12)?, d))
}

/// The 3x3 radial form at a point of fiber radius r:
/// entries are curvature components on the transported lifts and the
/// radial direction, with the top-left weighted by the hypothesis margin
/// epsilon.
#[allow(clippy::too_many_arguments)]
pub fn q3_form(
    total: &TotalMetricField,
    p: &ChartPoint,
    w_unit: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    r0: f64,
    eps: f64,
    cfg: &StencilConfig,
) -> Result<QuadraticForm> {
    let soul = TotalPoint::soul(p.chart, p.coords.clone(), total.fiber_rank());
    let tip = w_unit * r0;
    let carried = vec![
        total.horizontal_lift(&soul, x),
        total.horizontal_lift(&soul, y),
        total.vertical_embed(u),
        total.vertical_embed(v),
    ];
    let moved = engine::radial_transport(total, &soul, &tip, &carried, 1.0, 24, cfg.base_step)?;
    let q = TotalPoint::new(soul.chart, soul.base.clone(), tip);
    let (r_e, _) = riemann_total(total, &q, cfg.base_step)?;
    let radial = total.vertical_embed(w_unit);
    let (xb, yb, ub, vb) = (&moved[0], &moved[1], &moved[2], &moved[3]);

    let k_xy = r_e.sectional(xb, yb);
    let k_rv = r_e.sectional(&radial, vb);
    let k_ru = r_e.sectional(&radial, ub);
    let xyrv = r_e.value(xb, yb, &radial, vb);
    let xyru = r_e.value(xb, yb, &radial, ub);
    let rvru = r_e.value(&radial, vb, &radial, ub);

    let m = DMatrix::from_row_slice(
        3,
        3,
        &[
            eps * k_xy,
            1.5 * xyrv,
            -1.5 * xyru,
            1.5 * xyrv,
            k_rv,
            rvru,
            -1.5 * xyru,
            rvru,
            k_ru,
        ],
    );
    QuadraticForm::new(m, 1e-12)
}

/// Samples the 3x3 radial form at radius `r0` and reports its smallest
/// eigenvalue per sample; the gate holds when every form is nonnegative
/// definite within tolerance.
pub fn q3_gate_report(
    total: &TotalMetricField,
    r0: f64,
    eps: f64,
    plan: &SamplePlan,
    cfg: &StencilConfig,
    tols: &Tolerances,
) -> Result<MarginReport> {
    if r0 >= total.r_max {
        return Err(Error::Domain(format!(
            "q3 radius {r0} outside tube radius {}",
            total.r_max
        )));
    }
    let b = total.bundle.as_ref();
    let plan_on = SamplePlan {
        gauge: Gauge::Claim2Gauge,
        ..*plan
    };
    let samples = draw_samples(b, &plan_on);
    let margins = eval_samples(&samples, |s| {
        let w_unit = &s.w / s.w.norm();
        // unit U, V perpendicular to W; unit X, Y
        let g = b.base.metric_at(&s.p);
        let x = unit_in(&g, &s.x);
        let y = unit_in(&g, &s.y);
        let v = &s.v / s.v.norm();
        let u = if s.u.norm() > 1e-9 {
            s.u.clone() / s.u.norm()
        } else {
            s.v.clone()
        };
        let q = q3_form(total, &s.p, &w_unit, &x, &y, &u, &v, r0, eps, cfg)?;
        let min_eig = q.eigenvalues()[0];
        Ok((0.0, min_eig))
    })?;
    let mut report = MarginReport::from_samples("q3", "Sec. 7 Q3", margins, false, tols.stencil);
    let n_psd = report
        .samples
        .iter()
        .filter(|s| s.margin >= -tols.stencil)
        .count();
    report
        .extra
        .push(("n_nonnegative_definite".into(), n_psd as f64));
    Ok(report)
}

/// Minimum normalized sectional curvature over sampled 2-planes tangent to
/// the distance sphere; positive verdict requires min > tol.
pub fn sphere_bundle_positive_report(
    sphere: &SphereBundleMetric,
    plan: &SamplePlan,
    cfg: &StencilConfig,
    tols: &Tolerances,
) -> Result<MarginReport> {
    let dim = sphere.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ 0xe1);
    let n = plan.n_points * plan.n_tuples * 2;
    let mut tasks = Vec::with_capacity(n);
    for index in 0..n {
        let chart = rng.random_range(0..sphere.n_charts());
        let m = sphere.total.base_dim();
        let base_ok = sphere.total.bundle.base.atlas.charts[chart / 2]
            .switch_radius
            .is_some();
        let mut z = DVector::zeros(dim);
        for i in 0..dim {
            z[i] = if i < m && !base_ok {
                rng.random_range(0.0..1.0)
            } else {
                rng.random_range(-1.0..1.0)
            };
        }
        let mut e1;
        let mut e2;
        loop {
            e1 = gaussian(&mut rng, dim);
            e2 = gaussian(&mut rng, dim);
            if wedge_norm_sq_euclidean(&e1, &e2) > 1e-4 {
                break;
            }
        }
        tasks.push((index, chart, z, e1, e2));
    }
    let margins: Vec<MarginSample> = tasks
        .par_iter()
        .map(|(index, chart, z, e1, e2)| {
            let k = sectional_patch(sphere, *chart, z, e1, e2, cfg.base_step)?;
            Ok(MarginSample {
                index: *index,
                chart: *chart,
                lhs: 0.0,
                rhs: k.normalized,
                margin: k.normalized,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = MarginReport::from_samples(
        "e1pos",
        "Theorem B.1/C (distance spheres)",
        margins,
        true,
        tols.algebraic,
    );
    // Gauss-equation cross-check on a few span{X+V, Y} planes: intrinsic
    // minus extrinsic curvature
    let m = sphere.total.base_dim();
    let k = sphere.total.fiber_rank();
    let mut worst_gap: f64 = 0.0;
    for i in 0..4 {
        let chart = i % sphere.n_charts();
        let z = DVector::from_iterator(
            sphere.dim(),
            (0..sphere.dim()).map(|d| 0.3 - 0.13 * (d + i) as f64),
        );
        let q = sphere.embed_point(chart, &z);
        let vtan = {
            let mut raw = DVector::from_iterator(k, (0..k).map(|a| 0.4 + 0.3 * a as f64));
            let proj = raw.dot(&q.fiber) / q.fiber.norm_squared();
            raw -= &q.fiber * proj;
            raw * 0.5
        };
        let x = DVector::from_iterator(m, (0..m).map(|d| 1.0 - 0.4 * d as f64));
        let y = DVector::from_iterator(m, (0..m).map(|d| 0.2 + 0.7 * d as f64));
        let gap = gauss_equation_gap(sphere, chart, &z, &x, &y, &vtan, cfg)?;
        worst_gap = worst_gap.max(gap.abs());
    }
    report.extra.push(("gauss_equation_gap".into(), worst_gap));
    Ok(report)
}

/// Minimum normalized sectional curvature over arbitrary 2-planes at fiber
/// radius up to `r_test`; nonnegative verdict allows the known zero set
/// (mixed planes, Perelman flats) within tolerance.
pub fn neighborhood_nonneg_report(
    total: &TotalMetricField,
    plan: &SamplePlan,
    r_test: f64,
    cfg: &StencilConfig,
    tols: &Tolerances,
) -> Result<MarginReport> {
    if r_test > total.r_max {
        return Err(Error::Domain(format!(
            "test radius {r_test} outside tube radius {}",
            total.r_max
        )));
    }
    let b = total.bundle.as_ref();
    let m = total.base_dim();
    let k = total.fiber_rank();
    let n_dim = m + k;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ 0x4bbd);
    let n = plan.n_points * plan.n_tuples * 2;
    let mut tasks = Vec::with_capacity(n);
    for index in 0..n {
        let chart = rng.random_range(0..b.base.atlas.charts.len());
        let p = draw_point(&mut rng, b.base.as_ref(), chart);
        let wdir = {
            let raw = gaussian(&mut rng, k);
            &raw / raw.norm()
        };
        let r: f64 = rng.random_range(0.0..r_test);
        let q = TotalPoint::new(p.chart, p.coords.clone(), wdir * r);
        let mut e1;
        let mut e2;
        loop {
            e1 = gaussian(&mut rng, n_dim);
            e2 = gaussian(&mut rng, n_dim);
            if wedge_norm_sq_euclidean(&e1, &e2) > 1e-4 {
                break;
            }
        }
        tasks.push((index, q, e1, e2));
    }
    let margins: Vec<MarginSample> = tasks
        .par_iter()
        .map(|(index, q, e1, e2)| {
            let plane = TwoPlane {
                point: q.clone(),
                e1: e1.clone(),
                e2: e2.clone(),
            };
            let k = engine::sectional(total, &plane, cfg.base_step)?;
            Ok(MarginSample {
                index: *index,
                chart: q.chart,
                lhs: 0.0,
                rhs: k.normalized,
                margin: k.normalized,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = MarginReport::from_samples(
        "nbhd",
        "Theorem B.2 (neighborhood)",
        margins,
        false,
        tols.algebraic,
    );
    // known zero set: mixed planes at the soul stay flat
    let p0 = ChartPoint::new(0, DVector::zeros(m));
    let soul = TotalPoint::soul(p0.chart, p0.coords.clone(), k);
    let mut xdir = DVector::zeros(m);
    xdir[0] = 1.0;
    let mut udir = DVector::zeros(k);
    udir[0] = 1.0;
    let plane = TwoPlane {
        point: soul.clone(),
        e1: total.horizontal_lift(&soul, &xdir),
        e2: total.vertical_embed(&udir),
    };
    let zero_set = engine::sectional(total, &plane, cfg.base_step)?;
    report
        .extra
        .push(("soul_mixed_plane_abs_k".into(), zero_set.normalized.abs()));
    Ok(report)
}

/// Extremes of the normalized sectional curvature over random 2-planes
/// at a fixed fiber radius (radius 0 scans the zero-section itself).
pub fn radius_extremes(
    total: &TotalMetricField,
    radius: f64,
    n_samples: usize,
    seed: u64,
    cfg: &StencilConfig,
) -> Result<(f64, f64)> {
    if radius > total.r_max {
        return Err(Error::Domain(format!(
            "scan radius {radius} outside tube radius {}",
            total.r_max
        )));
    }
    let b = total.bundle.as_ref();
    let m = total.base_dim();
    let k = total.fiber_rank();
    let n_dim = m + k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ca);
    let mut tasks = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let chart = rng.random_range(0..b.base.atlas.charts.len());
        let p = draw_point(&mut rng, b.base.as_ref(), chart);
        let wdir = {
            let raw = gaussian(&mut rng, k);
            &raw / raw.norm()
        };
        let q = TotalPoint::new(p.chart, p.coords.clone(), wdir * radius);
        let mut e1;
        let mut e2;
        loop {
            e1 = gaussian(&mut rng, n_dim);
            e2 = gaussian(&mut rng, n_dim);
            if wedge_norm_sq_euclidean(&e1, &e2) > 1e-4 {
                break;
            }
        }
        tasks.push((q, e1, e2));
    }
    let values: Vec<f64> = tasks
        .par_iter()
        .map(|(q, e1, e2)| {
            let plane = TwoPlane {
                point: q.clone(),
                e1: e1.clone(),
                e2: e2.clone(),
            };
            Ok(engine::sectional(total, &plane, cfg.base_step)?.normalized)
        })
        .collect::<Result<Vec<_>>>()?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((min, max))
}

/// Constants chosen by the boost search, recorded with every
/// sufficient-condition verdict.
#[derive(Debug, Clone, Copy)]
pub struct EpsilonDelta {
    pub eps: f64,
    pub delta: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub c: f64,
}

/// Result of the boost search: either a sufficient constant (not claimed
/// minimal) or an inconclusive exhaustion report.
#[derive(Debug, Clone)]
pub enum BoostOutcome {
    Chosen(EpsilonDelta),
    Inconclusive { reason: String, worst_margin: f64 },
}

/// Options for the doubling search over the boost constant.
#[derive(Debug, Clone, Copy)]
pub struct BoostSearch {
    pub c_start: f64,
    pub c_cap: f64,
}

impl Default for BoostSearch {
    fn default() -> Self {
        BoostSearch {
            c_start: 1.0,
            c_cap: 1e6,
        }
    }
}

/// Doubling search for a fiber-curvature boost constant C making (i) the
/// soul quadratic-form condition `9 (X,Y,U,V)^2 < 4 k_Sigma k'_F` strict
/// on nondegenerate samples and (ii) the second derivative of the Psi
/// family positive on the constrained-gauge samples, with the small-|Y| /
/// large-|Y| split mirrored and the constants recorded. The returned C is
/// sufficient on the sampled set, not minimal.
pub fn choose_c(
    b: &BundleSpec,
    rf: &VerticalCurvatureField,
    plan: &SamplePlan,
    cfg: &StencilConfig,
    search: &BoostSearch,
) -> Result<BoostOutcome> {
    // hypothesis samples: orthonormal gauge for the epsilon of the
    // strengthened inequality
    let ortho_plan = SamplePlan {
        gauge: Gauge::OrthonormalXYWV,
        ..*plan
    };
    let ortho = draw_samples(b, &ortho_plan);
    let ortho_data: Vec<ConnData> = ortho
        .par_iter()
        .map(|s| connection_data(b, Some(rf), s, cfg))
        .collect::<Result<Vec<_>>>()?;

    // delta: min over normalized samples of (1/2)|R(W,V)X|^2 + (1/3)hess
    let delta = ortho_data
        .iter()
        .map(|d| 0.5 * d.adj_norm2 + d.hess / 3.0)
        .fold(f64::INFINITY, f64::min);
    if delta.is_nan() || delta <= 1e-9 {
        return Ok(BoostOutcome::Inconclusive {
            reason: "hypothesis failed: (1/2)|R(W,V)X|^2 + (1/3)hess not positive on samples"
                .into(),
            worst_margin: delta,
        });
    }

    // epsilon: largest power of 1/2 with
    // lhs <= (1-eps) rhs on the orthonormal samples
    let mut eps_star = f64::INFINITY;
    for d in &ortho_data {
        let rhs = (d.adj_norm2 + (2.0 / 3.0) * d.hess) * d.k_sigma;
        let lhs = d.dxr * d.dxr;
        if rhs <= 1e-12 {
            return Ok(BoostOutcome::Inconclusive {
                reason: "hypothesis failed: Theorem C right side vanishes on a sample".into(),
                worst_margin: rhs,
            });
        }
        eps_star = eps_star.min(1.0 - lhs / rhs);
    }
    if eps_star <= 0.0 {
        return Ok(BoostOutcome::Inconclusive {
            reason: "hypothesis failed: strict inequality violated on a sample".into(),
            worst_margin: eps_star,
        });
    }
    let mut eps = 0.5;
    while eps > eps_star && eps > 1e-6 {
        eps *= 0.5;
    }

    // claim-2 gauge samples with their C-independent parts
    let claim2_plan = SamplePlan {
        gauge: Gauge::Claim2Gauge,
        ..*plan
    };
    let claim2 = draw_samples(b, &claim2_plan);
    let claim2_data: Vec<ConnData> = claim2
        .par_iter()
        .map(|s| connection_data(b, Some(rf), s, cfg))
        .collect::<Result<Vec<_>>>()?;

    // delta1, delta2: radius of the small-|Y| regime where the top lines
    // stay uniformly positive
    let top = |d: &ConnData| {
        2.0 * (1.0 - eps) * d.k_sigma + 0.5 * d.adj_norm2 - 2.0 * d.dxr + d.hess / 3.0
    };
    let mut delta1 = 0.5;
    let mut delta2 = f64::NEG_INFINITY;
    for _ in 0..24 {
        let m = claim2_data
            .iter()
            .filter(|d| d.y_norm <= delta1)
            .map(top)
            .fold(f64::INFINITY, f64::min);
        if m > 0.0 || !m.is_finite() {
            delta2 = if m.is_finite() { m } else { delta };
            break;
        }
        delta1 *= 0.5;
    }
    if delta2 <= 0.0 {
        return Ok(BoostOutcome::Inconclusive {
            reason: "no small-|Y| regime with positive leading terms".into(),
            worst_margin: delta2,
        });
    }

    // doubling search: claim 1 on orthonormal samples, claim 2 on the
    // constrained gauge
    let mut c = search.c_start;
    while c <= search.c_cap {
        let claim1_ok = ortho_data.iter().all(|d| {
            // orthonormal W,V: k'_F = k_F + C; mixed term at the soul is
            // the connection pairing
            let margin = 4.0 * d.k_sigma * (d.k_f + c) - 9.0 * d.r_xy_uv * d.r_xy_uv;
            margin > 1e-9
        });
        let h_term = |d: &ConnData| {
            2.0 * eps * d.k_sigma + 2.0 * (d.k_f + c * d.wedge_uv) - 6.0 * d.r_xy_uv
                + (4.0 / 3.0) * (d.d_wuvv - d.d_wvuv)
        };
        let psi2 = |d: &ConnData| top(d) + h_term(d);
        let claim2_ok = claim2_data.iter().all(|d| psi2(d) > 1e-9)
            && claim2_data
                .iter()
                .filter(|d| d.y_norm <= delta1)
                .all(|d| h_term(d) + delta2 >= 0.0);
        if claim1_ok && claim2_ok {
            return Ok(BoostOutcome::Chosen(EpsilonDelta {
                eps,
                delta,
                delta1,
                delta2,
                c,
            }));
        }
        c *= 2.0;
    }
    let worst = claim2_data
        .iter()
        .map(|d| top(d) + 2.0 * eps * d.k_sigma + 2.0 * d.k_f - 6.0 * d.r_xy_uv)
        .fold(f64::INFINITY, f64::min);
    Ok(BoostOutcome::Inconclusive {
        reason: format!("search exhausted at C cap {}", search.c_cap),
        worst_margin: worst,
    })
}

/// Intrinsic-vs-extrinsic curvature gap for a plane `span{X+V, Y}` tangent
/// to the distance sphere (the Gauss-equation consistency of the sphere
/// route).
pub fn gauss_equation_gap(
    sphere: &SphereBundleMetric,
    chart: usize,
    z: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
    vtan: &DVector<f64>,
    cfg: &StencilConfig,
) -> Result<f64> {
    let total = sphere.total.as_ref();
    let q = sphere.embed_point(chart, z);
    let e1 = total.horizontal_lift(&q, x) + total.vertical_embed(vtan);
    let e2 = total.horizontal_lift(&q, y);
    // extrinsic curvature of the plane in the ambient space
    let plane = TwoPlane {
        point: q.clone(),
        e1: e1.clone(),
        e2: e2.clone(),
    };
    let extrinsic = engine::sectional(total, &plane, cfg.base_step)?;
    // pull the plane back to sphere coordinates
    let jac = sphere.embed_jacobian(chart, z);
    let jtj = jac.transpose() * &jac;
    let solve = |target: &DVector<f64>| -> Result<DVector<f64>> {
        jtj.clone()
            .try_inverse()
            .map(|inv| inv * (jac.transpose() * target))
            .ok_or(Error::Numerical {
                msg: "sphere chart jacobian degenerate".into(),
                condition: f64::INFINITY,
            })
    };
    let w1 = solve(&e1)?;
    let w2 = solve(&e2)?;
    // confirm the vectors are tangent to the sphere
    let recon = (&jac * &w1 - &e1).norm() + (&jac * &w2 - &e2).norm();
    if recon > 1e-8 * (e1.norm() + e2.norm()) {
        return Err(Error::Domain(format!(
            "plane is not tangent to the distance sphere (residual {recon:.2e})"
        )));
    }
    let intrinsic = sectional_patch(sphere, chart, z, &w1, &w2, cfg.base_step)?;
    Ok(intrinsic.normalized - extrinsic.normalized)
}

/// Definiteness of the necessary-condition form against the margin sign:
/// the determinant of the 2x2 form IS the Theorem A margin.
pub fn q_form_consistency(
    b: &BundleSpec,
    rf: &VerticalCurvatureField,
    s: &VectorSample,
    cfg: &StencilConfig,
    tol: f64,
) -> Result<(f64, f64, Definiteness)> {
    let (q, d) = q_form_necessary(b, rf, s, cfg)?;
    let margin = (d.adj_norm2 + (2.0 / 3.0) * d.hess) * d.k_sigma - d.dxr * d.dxr;
    // det Q = 2 k_Sigma (adj^2/2 + hess/3) - dxr^2 = margin, exactly
    let det = q.determinant();
    Ok((margin, det, q.definiteness(tol)))
}
