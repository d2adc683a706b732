//! Pipeline orchestration: build the requested metric, run the requested
//! inequality reports, and emit the deterministic CSV and summary files.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};

use curvgate::bundle::{catalog, BundleSpec, VerticalCurvatureField};
use curvgate::tensor::CurvatureTensor;
use curvgate::verify::{
    self, BoostOutcome, BoostSearch, EpsilonDelta, MarginReport, SamplePlan, Tolerances, Verdict,
};
use curvgate::warp::{
    boost_field, build_total_metric, sphere_bundle_metric, warping_from_field,
    warping_rotational, FiberProfile, TotalMetricField,
};
use curvgate::StencilConfig;

use crate::config::{BoostChoice, FieldChoice, MetricKind, RunConfig};

fn make_field(cfg: &RunConfig, b: &BundleSpec) -> Result<VerticalCurvatureField> {
    match &cfg.field {
        FieldChoice::Zero => Ok(VerticalCurvatureField::zero(b.rank)),
        FieldChoice::Constant(c) => Ok(VerticalCurvatureField::constant(
            CurvatureTensor::constant_curvature(b.rank, *c)
                .map_err(|e| anyhow!("metric.rf: {e}"))?,
        )),
        FieldChoice::Height(a) => {
            if b.base.atlas.embedding.is_none() {
                bail!("metric.rf = height needs a sphere base (catalog {})", cfg.catalog);
            }
            Ok(catalog::height_field(b.rank, b.base.clone(), *a))
        }
    }
}

struct Pipeline {
    bundle: Arc<BundleSpec>,
    plan: SamplePlan,
    stencil: StencilConfig,
    tols: Tolerances,
    chosen: Option<EpsilonDelta>,
    inconclusive: Option<String>,
    boost_c: f64,
    eps: f64,
    total: Option<Arc<TotalMetricField>>,
}

impl Pipeline {
    fn prepare(cfg: &RunConfig) -> Result<Self> {
        let bundle =
            Arc::new(catalog::by_id(&cfg.catalog).map_err(|e| anyhow!("catalog: {e}"))?);
        let plan = SamplePlan::new(cfg.seed, cfg.n_points, cfg.n_tuples, cfg.gauge);
        let stencil = StencilConfig::default();
        let tols = Tolerances {
            algebraic: cfg.tol_algebraic,
            stencil: cfg.tol_stencil,
        };
        let rf = make_field(cfg, bundle.as_ref())?;
        let (chosen, inconclusive, boost_c, eps) = match cfg.boost {
            BoostChoice::Fixed(c) => (None, None, c, cfg.eps_hypothesis),
            BoostChoice::Auto => {
                match verify::choose_c(
                    bundle.as_ref(),
                    &rf,
                    &plan,
                    &stencil,
                    &BoostSearch::default(),
                )
                .map_err(|e| anyhow!("boost search: {e}"))?
                {
                    BoostOutcome::Chosen(ed) => (Some(ed), None, ed.c, ed.eps),
                    BoostOutcome::Inconclusive {
                        reason,
                        worst_margin,
                    } => (
                        None,
                        Some(format!("{reason} (worst margin {worst_margin:.3e})")),
                        f64::NAN,
                        cfg.eps_hypothesis,
                    ),
                }
            }
        };
        Ok(Pipeline {
            bundle,
            plan,
            stencil,
            tols,
            chosen,
            inconclusive,
            boost_c,
            eps,
            total: None,
        })
    }

    fn total_metric(&mut self, cfg: &RunConfig) -> Result<Arc<TotalMetricField>> {
        if let Some(t) = &self.total {
            return Ok(t.clone());
        }
        if !self.boost_c.is_finite() {
            bail!(
                "boost search was inconclusive ({}); set metric.C explicitly to build a metric",
                self.inconclusive.as_deref().unwrap_or("no reason")
            );
        }
        let warping = match cfg.kind {
            MetricKind::Connection => Arc::new(
                warping_rotational(FiberProfile::new(self.boost_c), self.bundle.rank)
                    .map_err(|e| anyhow!("profile: {e}"))?,
            ),
            MetricKind::Warped => {
                let rf = make_field(cfg, self.bundle.as_ref())?;
                let boosted =
                    boost_field(rf, self.boost_c).map_err(|e| anyhow!("boost: {e}"))?;
                Arc::new(warping_from_field(Arc::new(boosted)))
            }
        };
        let total = Arc::new(
            build_total_metric(self.bundle.clone(), warping, cfg.r_max)
                .map_err(|e| anyhow!("metric build: {e}"))?,
        );
        self.total = Some(total.clone());
        Ok(total)
    }

    fn run_inequality(&mut self, cfg: &RunConfig, id: &str) -> Result<MarginReport> {
        let b = self.bundle.clone();
        let rf = make_field(cfg, b.as_ref())?;
        let report = match id {
            "thmA" => verify::theorem_a_report(b.as_ref(), &rf, &self.plan, &self.stencil, &self.tols),
            "thmB" => verify::theorem_b_report(b.as_ref(), &self.plan, &self.stencil, &self.tols),
            "thmC" => verify::theorem_c_report(b.as_ref(), &rf, &self.plan, &self.stencil, &self.tols),
            "sw" => verify::strake_walschap_report(
                b.as_ref(),
                &self.plan,
                cfg.eps_diam,
                &self.stencil,
                &self.tols,
            ),
            "cor26" => {
                let total = self.total_metric(cfg)?;
                verify::walschap_corollary_report(total.as_ref(), &self.plan, &self.stencil, &self.tols)
            }
            "q3" => {
                let total = self.total_metric(cfg)?;
                let eps = self.eps;
                verify::q3_gate_report(total.as_ref(), cfg.r0, eps, &self.plan, &self.stencil, &self.tols)
            }
            "e1pos" => {
                let total = self.total_metric(cfg)?;
                let sphere = sphere_bundle_metric(total, cfg.r0)
                    .map_err(|e| anyhow!("sphere bundle: {e}"))?;
                verify::sphere_bundle_positive_report(&sphere, &self.plan, &self.stencil, &self.tols)
            }
            "nbhd" => {
                let total = self.total_metric(cfg)?;
                verify::neighborhood_nonneg_report(
                    total.as_ref(),
                    &self.plan,
                    cfg.r_test,
                    &self.stencil,
                    &self.tols,
                )
            }
            other => bail!("unknown inequality id {other:?}"),
        };
        report.map_err(|e| anyhow!("{id}: {e}"))
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn sample_verdict(report: &MarginReport, margin: f64) -> Verdict {
    if report.strict {
        if margin > report.tol {
            Verdict::HoldsStrictly
        } else {
            Verdict::Violated
        }
    } else if margin < -report.tol {
        Verdict::Violated
    } else if margin > report.tol {
        Verdict::HoldsStrictly
    } else {
        Verdict::Holds
    }
}

fn write_csv(reports: &[MarginReport], path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("inequality_id,sample_index,chart,lhs,rhs,margin,verdict,paper_ref\n");
    for r in reports {
        for s in &r.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                csv_field(&r.id),
                s.index,
                s.chart,
                s.lhs,
                s.rhs,
                s.margin,
                sample_verdict(r, s.margin),
                csv_field(&r.citation),
            );
        }
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

fn write_summary(
    cfg: &RunConfig,
    pipe: &Pipeline,
    reports: &[MarginReport],
    mismatches: &[String],
    path: &Path,
) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "catalog: {}", cfg.catalog);
    let _ = writeln!(
        out,
        "metric: kind={:?} C={} r0={} rmax={} rtest={}",
        cfg.kind, pipe.boost_c, cfg.r0, cfg.r_max, cfg.r_test
    );
    let _ = writeln!(
        out,
        "samples: seed={} points={} tuples={} gauge={:?}",
        cfg.seed, cfg.n_points, cfg.n_tuples, cfg.gauge
    );
    if let Some(ed) = &pipe.chosen {
        let _ = writeln!(
            out,
            "boost search: C={} (sufficient, not minimal) eps={} delta={:.6e} delta1={} delta2={:.6e}",
            ed.c, ed.eps, ed.delta, ed.delta1, ed.delta2
        );
    }
    if let Some(reason) = &pipe.inconclusive {
        let _ = writeln!(out, "boost search: inconclusive: {reason}");
    }
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{} [{}]: {} (worst margin {:.6e} at sample {}, tol {:.1e}, {} samples)",
            r.id,
            r.citation,
            r.verdict,
            r.worst_margin,
            r.worst_index,
            r.tol,
            r.samples.len()
        );
        for (k, v) in &r.extra {
            let _ = writeln!(out, "    {k} = {v:.6e}");
        }
    }
    out.push('\n');
    if mismatches.is_empty() {
        let _ = writeln!(out, "result: all verdicts as expected");
    } else {
        for m in mismatches {
            let _ = writeln!(out, "MISMATCH: {m}");
        }
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Runs the `check` pipeline; returns the process exit code.
pub fn run_check(cfg: &RunConfig) -> Result<u8> {
    let mut pipe = Pipeline::prepare(cfg)?;
    let mut reports = Vec::new();
    for id in &cfg.inequalities {
        reports.push(pipe.run_inequality(cfg, id)?);
    }

    let mut mismatches = Vec::new();
    for r in &reports {
        match cfg.expectations.get(&r.id) {
            Some(expected) => {
                if r.verdict != *expected {
                    mismatches.push(format!(
                        "{}: expected {}, got {} (worst margin {:.3e})",
                        r.id, expected, r.verdict, r.worst_margin
                    ));
                }
            }
            None => {
                if r.verdict == Verdict::Violated {
                    mismatches.push(format!(
                        "{}: violated with worst margin {:.3e} (no expectation declared)",
                        r.id, r.worst_margin
                    ));
                }
            }
        }
    }

    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    write_csv(&reports, &cfg.output_dir.join("report.csv"))?;
    write_summary(
        cfg,
        &pipe,
        &reports,
        &mismatches,
        &cfg.output_dir.join("summary.txt"),
    )?;

    for line in &mismatches {
        eprintln!("mismatch: {line}");
    }
    for r in &reports {
        println!(
            "{} [{}]: {} (worst margin {:.6e})",
            r.id, r.citation, r.verdict, r.worst_margin
        );
    }
    Ok(if mismatches.is_empty() { 0 } else { 1 })
}

/// Runs the `scan` pipeline: sectional-curvature extremes per radius.
pub fn run_scan(cfg: &RunConfig) -> Result<u8> {
    let mut pipe = Pipeline::prepare(cfg)?;
    let total = pipe.total_metric(cfg)?;
    let n = cfg.n_points * cfg.n_tuples * 2;
    let stencil = StencilConfig::default();

    let mut out = String::new();
    out.push_str("radius,n_samples,min_normalized,max_normalized\n");
    for (i, r) in cfg.scan_radii.iter().enumerate() {
        let (min, max) = verify::radius_extremes(
            total.as_ref(),
            *r,
            n,
            cfg.seed.wrapping_add(i as u64),
            &stencil,
        )
        .map_err(|e| anyhow!("scan at radius {r}: {e}"))?;
        let _ = writeln!(out, "{r},{n},{min},{max}");
        println!("r = {r}: min {min:.6e}, max {max:.6e} over {n} planes");
    }
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    let path = cfg.output_dir.join("scan.csv");
    std::fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(0)
}
