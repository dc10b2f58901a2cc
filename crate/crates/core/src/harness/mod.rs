//! Verification campaigns over grids of `(t1, t2)` and the report they produce.

mod grid;
mod report;

pub use grid::{AxisRange, Exclusion, GridSpec};
pub use report::{
    grid_checks, parse_csv, Check, CheckKind, Meta, PointRecord, ResidualReport, Stat, Summary, Tolerances, CSV_HEADER,
    GRID_CHECKS,
};

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic::{final1_from_conics, p_from_conic, q_from_conic, ConicPoly};
use crate::error::{Error, Result};
use crate::expr::{parse, Expression, Params};
use crate::flatfamily::{example31, CounterexampleSpec};
use crate::jet::{Axis, Jet, Jet2};
use crate::parametrize::PqFamily;
use crate::surface::{check_rank_conditions, SurfacePoint};

pub const DEFAULT_TOL: f64 = 1e-8;
/// Distance kept from the pole `t2 = C` of the closed-form families.
pub const POLE_MARGIN: f64 = 0.05;
/// Lower bound on `q' - w p''` for parametrized families.
pub const MIN_SLOPE: f64 = 0.05;
/// `v`-window on which sampled conic polynomials must stay positive.
pub const V_WINDOW: f64 = 1.0;
/// Lower bound of sampled conic polynomials on the window.
pub const CONIC_MARGIN: f64 = 0.2;
/// Bound on rejected samples per trial.
pub const MAX_RESAMPLES: usize = 1000;
/// Lower bound on `max |P Q' - P' Q|` for the non-proportional probe.
pub const PROBE_SEPARATION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Expr,
    Pq,
    Conic,
    Counterexample,
    Example31,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Expr => "expr",
            Family::Pq => "pq",
            Family::Conic => "conic",
            Family::Counterexample => "counterexample",
            Family::Example31 => "example31",
        }
    }
}

/// Inputs of [`run_report`]; which fields are needed depends on the family.
#[derive(Debug, Clone)]
pub struct ReportConfig {
    pub grid: GridSpec,
    pub tolerances: Tolerances,
    pub params: Params,
    pub seed: Option<u64>,
    pub rho: Option<String>,
    pub p: Option<String>,
    pub q: Option<String>,
    pub conic_p: Option<ConicPoly<f64>>,
    pub conic_q: Option<ConicPoly<f64>>,
    pub sign: f64,
    pub pprime0: f64,
    pub c: Option<f64>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            tolerances: Tolerances::default(),
            params: Params::new(),
            seed: None,
            rho: None,
            p: None,
            q: None,
            conic_p: None,
            conic_q: None,
            sign: 1.0,
            pprime0: 0.0,
            c: None,
        }
    }
}

/// Where the jet of `rho` at a grid point comes from.
#[derive(Clone, Copy)]
enum Source<'a> {
    Expr(&'a Expression, &'a Params),
    Pq(&'a PqFamily),
}

fn eval_point(source: Source, ex: &Exclusion, t1: f64, t2: f64, rank_eps: f64) -> Result<Option<PointRecord>> {
    if !ex.keeps_t(t2) {
        return Ok(None);
    }
    let (v, w, pt) = match source {
        Source::Expr(e, params) => {
            let rho = e.eval_jet2(t1, t2, params)?;
            (rho.partial(1, 0), t2, SurfacePoint::new(t1, t2, rho)?)
        }
        Source::Pq(fam) => {
            let mut guess = None;
            if ex.needs_inversion() {
                // iterates are kept near the window so quadrature-backed p and q stay cheap
                let bound = ex.v_max.map_or(f64::INFINITY, |m| 2.0 * m);
                let Ok(vw) = fam.vw_from_t_within(t1, t2, None, bound) else {
                    return Ok(None);
                };
                let (Ok(p), Ok(q)) = (fam.p().jet(vw.v), fam.q().jet(vw.v)) else {
                    return Ok(None);
                };
                let slope = q.coeffs[1] - t2 * p.derivative(2);
                if !ex.keeps_vw(vw.v, slope) {
                    return Ok(None);
                }
                guess = Some(vw.v);
            }
            let (vw, pt) = fam.rho_jet(t1, t2, guess)?;
            (vw.v, vw.w, pt)
        }
    };
    let q = check_rank_conditions(&pt, rank_eps)?;
    Ok(Some(PointRecord::new(t1, t2, v, w, &q)))
}

/// Evaluates every admissible grid point in parallel; results keep grid order
/// and the first failing point in that order is reported.
fn sweep(source: Source, grid: &GridSpec, tol: &Tolerances) -> Result<(Vec<PointRecord>, usize)> {
    let results: Vec<Result<Option<PointRecord>>> =
        grid.points().par_iter().map(|&(t1, t2)| eval_point(source, &grid.exclusion, t1, t2, tol.rank_eps)).collect();
    let mut points = Vec::with_capacity(results.len());
    let mut excluded = 0;
    for r in results {
        match r? {
            Some(p) => points.push(p),
            None => excluded += 1,
        }
    }
    Ok((points, excluded))
}

fn expected(pairs: &[(&str, bool)]) -> BTreeMap<String, bool> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn meta(family: &str, description: String, params: &Params, tol: &Tolerances, grid: &GridSpec) -> Meta {
    Meta {
        family: family.into(),
        description,
        params: params.clone(),
        seed: None,
        tolerances: *tol,
        grid: *grid,
        trials: 1,
        excluded: 0,
        resampled: 0,
    }
}

fn no_points(grid: &GridSpec) -> Error {
    Error::config("grid", format!("no admissible points in {grid}"))
}

fn sample_conic(rng: &mut ChaCha8Rng) -> ConicPoly<f64> {
    ConicPoly { a0: rng.gen_range(0.5..1.5), a1: rng.gen_range(-0.5..0.5), a2: rng.gen_range(-0.5..0.5) }
}

/// Minimum of `P` over `[-V_WINDOW, V_WINDOW]`.
fn window_min(p: &ConicPoly<f64>) -> f64 {
    let mut m = p.eval(-V_WINDOW).min(p.eval(V_WINDOW));
    if p.a2 > 0.0 {
        let vertex = -p.a1 / (2.0 * p.a2);
        if vertex.abs() <= V_WINDOW {
            m = m.min(p.eval(vertex));
        }
    }
    m
}

fn window_samples(n: usize, half_width: f64) -> Vec<f64> {
    (0..n).map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64).collect()
}

/// Draws conics until `accept` holds, counting rejections.
fn draw(
    rng: &mut ChaCha8Rng,
    resampled: &mut usize,
    what: &str,
    mut accept: impl FnMut(&ConicPoly<f64>) -> bool,
) -> Result<ConicPoly<f64>> {
    for _ in 0..MAX_RESAMPLES {
        let p = sample_conic(rng);
        if window_min(&p) >= CONIC_MARGIN && accept(&p) {
            return Ok(p);
        }
        *resampled += 1;
    }
    Err(Error::TrialDomainError(format!("no admissible {what} after {MAX_RESAMPLES} samples")))
}

fn conic_family(p: ConicPoly<f64>, sign: f64, pprime0: f64, q: ConicPoly<f64>) -> Result<PqFamily> {
    PqFamily::new(Arc::new(p_from_conic(p, sign, pprime0)?), Arc::new(q_from_conic(q)))
}

fn pq_exclusion(grid: &GridSpec, v_max: Option<f64>) -> GridSpec {
    grid.with_exclusion(grid.exclusion.and(Exclusion::slope(MIN_SLOPE, v_max)))
}

/// Random conic pairs with `Q = cP`: both residuals must vanish on the grid.
/// Each trial also draws an independent `Q` with `P Q' - P' Q` not identically
/// zero and measures the mixed ODE residuals, which must not vanish.
pub fn verify_theorem21(trials: usize, seed: u64, grid: &GridSpec, tol: &Tolerances) -> Result<ResidualReport> {
    if trials == 0 {
        return Err(Error::config("trials", "need at least one trial"));
    }
    let grid = pq_exclusion(grid, Some(V_WINDOW));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut resampled = 0;
    let mut excluded = 0;
    let mut points = Vec::new();
    let mut probe_min = f64::INFINITY;
    let probe_v = window_samples(21, 0.5);
    for _ in 0..trials {
        let p = draw(&mut rng, &mut resampled, "P", |_| true)?;
        let c = rng.gen_range(0.5..2.0);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let pprime0 = rng.gen_range(-0.5..0.5);
        let fam = conic_family(p, sign, pprime0, p.scaled(c)?)?;
        let (pts, ex) = sweep(Source::Pq(&fam), &grid, tol)?;
        if pts.is_empty() {
            return Err(no_points(&grid));
        }
        points.extend(pts);
        excluded += ex;

        let q = draw(&mut rng, &mut resampled, "probe Q", |q| {
            let sep = probe_v.iter().map(|&t| (p.eval(t) * q.deriv(t) - p.deriv(t) * q.eval(t)).abs());
            sep.fold(0.0, f64::max) > PROBE_SEPARATION
        })?;
        let mut probe = 0.0f64;
        for &v in &probe_v {
            let r = final1_from_conics(&p, &q, sign, v)?;
            probe = probe.max(r[1].normalized().abs()).max(r[2].normalized().abs());
        }
        probe_min = probe_min.min(probe);
    }
    let mut m = meta(
        "theorem21",
        "conic pairs Q = cP with random P, c, branch sign and p'(0)".into(),
        &Params::new(),
        tol,
        &grid,
    );
    m.seed = Some(seed);
    m.trials = trials;
    m.excluded = excluded;
    m.resampled = resampled;
    let checks = vec![Check::above("contrapositive_probe", probe_min, tol.nonzero)];
    let exp = expected(&[
        ("theta21_flat", true),
        ("monge_flat", true),
        ("monge_ampere", true),
        ("levi_rank", true),
        ("two_nondegenerate", true),
        ("contrapositive_probe", true),
    ]);
    Ok(ResidualReport::assemble(m, points, checks, exp))
}

fn spec_grid(spec: &CounterexampleSpec, grid: &GridSpec) -> GridSpec {
    let ex = grid.exclusion.and(Exclusion::slope(MIN_SLOPE, None)).and(Exclusion::pole(spec.c(), POLE_MARGIN));
    grid.with_exclusion(ex)
}

fn spec_params(spec: &CounterexampleSpec) -> Params {
    [("C".to_string(), spec.c())].into_iter().collect()
}

/// The family `q = C (p' - p'(0))`: the curvature residual must vanish while
/// the Monge residual must not.
pub fn verify_counterexample(spec: &CounterexampleSpec, grid: &GridSpec, tol: &Tolerances) -> Result<ResidualReport> {
    let fam = spec.family()?;
    let ends = [grid.t1.min, grid.t1.max].map(|t1| fam.vw_from_t(t1, 0.0, None).map(|vw| vw.v));
    let (lo, hi) = match ends {
        [Ok(a), Ok(b)] => (a.min(b), a.max(b)),
        _ => (-0.1, 0.1),
    };
    let samples: Vec<f64> = (0..21).map(|i| lo + (hi - lo) * i as f64 / 20.0).collect();
    let m1 = spec.monge1d_max(&samples)?;
    if !(m1 > tol.zero) {
        return Err(Error::PreconditionFailure(format!(
            "p solves the Monge equation on v in [{lo:.3}, {hi:.3}] (max normalized residual {m1:e}); the family is flat"
        )));
    }
    let grid = spec_grid(spec, grid);
    let (points, excluded) = sweep(Source::Pq(&fam), &grid, tol)?;
    if points.is_empty() {
        return Err(no_points(&grid));
    }
    let mut m = meta("counterexample", spec.describe(), &spec_params(spec), tol, &grid);
    m.excluded = excluded;
    let checks = vec![Check::above("monge1d_nonzero", m1, tol.zero)];
    let exp = expected(&[
        ("theta21_flat", true),
        ("monge_nonzero", true),
        ("monge_ampere", true),
        ("levi_rank", true),
        ("two_nondegenerate", true),
    ]);
    Ok(ResidualReport::assemble(m, points, checks, exp))
}

/// Checks that the closed form through `chi` equals the parametrized surface,
/// pointwise to `tol.zero (1 + |rho|)` and for every jet coefficient to
/// `tol.nonzero (1 + |c|)`.
pub fn verify_prop32(spec: &CounterexampleSpec, grid: &GridSpec, tol: &Tolerances) -> Result<ResidualReport> {
    verify_prop32_perturbed(spec, grid, tol, 0.0)
}

/// [`verify_prop32`] with `chi` shifted by `chi_offset`, for checking that the
/// comparison detects a wrong closed form.
pub fn verify_prop32_perturbed(
    spec: &CounterexampleSpec,
    grid: &GridSpec,
    tol: &Tolerances,
    chi_offset: f64,
) -> Result<ResidualReport> {
    let fam = spec.family()?;
    let grid = spec_grid(spec, grid);
    let results: Vec<Result<Option<(PointRecord, f64, f64)>>> = grid
        .points()
        .par_iter()
        .map(|&(t1, t2)| {
            if !grid.exclusion.keeps_t(t2) {
                return Ok(None);
            }
            let Ok(vw) = fam.vw_from_t(t1, t2, None) else {
                return Ok(None);
            };
            let (p, q) = (fam.p().jet(vw.v)?, fam.q().jet(vw.v)?);
            if !grid.exclusion.keeps_vw(vw.v, q.coeffs[1] - t2 * p.derivative(2)) {
                return Ok(None);
            }
            let s = t1 + spec.pprime0() * t2;
            let direct = spec.rho_prop31(vw.v, vw.w)?;
            let tilde = spec.tilde_rho(t1, t2)? + chi_offset * s;
            let value_err = (tilde - direct).abs() / (1.0 + direct.abs());

            let (_, param_pt) = fam.rho_jet(t1, t2, Some(vw.v))?;
            let shift =
                (Jet2::variable(t1, Axis::T1) + Jet2::variable(t2, Axis::T2).scale(spec.pprime0())).scale(chi_offset);
            let tilde_pt = SurfacePoint::new(t1, t2, spec.tilde_rho_jet(t1, t2)?.rho + shift)?;
            let jet_err = param_pt
                .rho
                .iter()
                .map(|(j, k, c)| (tilde_pt.rho.coeff(j, k) - c).abs() / (1.0 + c.abs()))
                .fold(0.0, f64::max);
            let q = check_rank_conditions(&tilde_pt, tol.rank_eps)?;
            Ok(Some((PointRecord::new(t1, t2, vw.v, vw.w, &q), value_err, jet_err)))
        })
        .collect();
    let (mut points, mut excluded, mut value_max, mut jet_max) = (Vec::new(), 0, 0.0f64, 0.0f64);
    for r in results {
        match r? {
            Some((p, ve, je)) => {
                points.push(p);
                value_max = value_max.max(ve);
                jet_max = jet_max.max(je);
            }
            None => excluded += 1,
        }
    }
    if points.is_empty() {
        return Err(no_points(&grid));
    }
    let mut params = spec_params(spec);
    if chi_offset != 0.0 {
        params.insert("chi_offset".into(), chi_offset);
    }
    let mut m = meta("prop32", spec.describe(), &params, tol, &grid);
    m.excluded = excluded;
    let checks =
        vec![Check::below("values_agree", value_max, tol.zero), Check::below("jets_agree", jet_max, tol.nonzero)];
    let exp = expected(&[
        ("values_agree", true),
        ("jets_agree", true),
        ("theta21_flat", true),
        ("monge_ampere", true),
        ("levi_rank", true),
        ("two_nondegenerate", true),
    ]);
    Ok(ResidualReport::assemble(m, points, checks, exp))
}

fn required<'a, T>(field: &'a Option<T>, path: &str, family: Family) -> Result<&'a T> {
    field.as_ref().ok_or_else(|| Error::config(path, format!("required for family {}", family.name())))
}

fn c_param(cfg: &ReportConfig, family: Family) -> Result<f64> {
    match (cfg.c, cfg.params.get("C")) {
        (Some(c), _) | (None, Some(&c)) => Ok(c),
        (None, None) => Err(Error::config("C", format!("required for family {}", family.name()))),
    }
}

fn proportional(p: &ConicPoly<f64>, q: &ConicPoly<f64>) -> bool {
    let (a, b) = ([p.a0, p.a1, p.a2], [q.a0, q.a1, q.a2]);
    let scale = a.iter().chain(&b).fold(0.0f64, |m, x| m.max(x.abs()));
    (0..3).all(|i| (0..3).all(|j| (a[i] * b[j] - a[j] * b[i]).abs() <= 1e-14 * scale * scale))
}

/// Single entry point producing a report for any family.
pub fn run_report(family: Family, cfg: &ReportConfig) -> Result<ResidualReport> {
    let tol = &cfg.tolerances;
    let rank_only = [("levi_rank", true), ("two_nondegenerate", true)];
    let report = match family {
        Family::Expr => {
            let src = required(&cfg.rho, "rho", family)?;
            let e = parse(src, &["t1", "t2"])?;
            e.check_bound(&cfg.params)?;
            let (points, excluded) = sweep(Source::Expr(&e, &cfg.params), &cfg.grid, tol)?;
            let mut m = meta("expr", format!("rho(t1, t2) = {e}"), &cfg.params, tol, &cfg.grid);
            m.excluded = excluded;
            ResidualReport::assemble(m, points, vec![], expected(&rank_only))
        }
        Family::Pq => {
            let fam =
                PqFamily::from_exprs(required(&cfg.p, "p", family)?, required(&cfg.q, "q", family)?, &cfg.params)?;
            let grid = pq_exclusion(&cfg.grid, None);
            let (points, excluded) = sweep(Source::Pq(&fam), &grid, tol)?;
            let mut m = meta("pq", fam.describe(), &cfg.params, tol, &grid);
            m.excluded = excluded;
            let exp = expected(&[("monge_ampere", true), rank_only[0], rank_only[1]]);
            ResidualReport::assemble(m, points, vec![], exp)
        }
        Family::Conic => {
            let (p, q) = (*required(&cfg.conic_p, "P", family)?, *required(&cfg.conic_q, "Q", family)?);
            let fam = conic_family(p, cfg.sign, cfg.pprime0, q)?;
            let grid = pq_exclusion(&cfg.grid, Some(V_WINDOW));
            let (points, excluded) = sweep(Source::Pq(&fam), &grid, tol)?;
            let mut m = meta("conic", fam.describe(), &cfg.params, tol, &grid);
            m.excluded = excluded;
            let flat = proportional(&p, &q);
            let exp = expected(&[
                ("theta21_flat", flat),
                ("monge_flat", flat),
                ("monge_ampere", true),
                rank_only[0],
                rank_only[1],
            ]);
            ResidualReport::assemble(m, points, vec![], exp)
        }
        Family::Counterexample => {
            let spec =
                CounterexampleSpec::from_expr(required(&cfg.p, "p", family)?, c_param(cfg, family)?, &cfg.params)?;
            verify_counterexample(&spec, &cfg.grid, tol)?
        }
        Family::Example31 => {
            let ex = example31(c_param(cfg, family)?)?;
            let grid = cfg.grid.with_exclusion(cfg.grid.exclusion.and(Exclusion::pole(ex.c, POLE_MARGIN)));
            let (points, excluded) = sweep(Source::Expr(&ex.rho, &ex.params), &grid, tol)?;
            let mut m = meta("example31", format!("rho(t1, t2) = {}", ex.rho), &ex.params, tol, &grid);
            m.excluded = excluded;
            let exp = expected(&[
                ("theta21_flat", ex.expected.theta21_flat),
                ("monge_flat", ex.expected.monge_flat),
                ("monge_ampere", ex.expected.monge_ampere),
                rank_only[0],
                rank_only[1],
            ]);
            ResidualReport::assemble(m, points, vec![], exp)
        }
    };
    if report.points.is_empty() {
        return Err(no_points(&report.meta.grid));
    }
    Ok(report)
}
