use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::surface::{PointQuantities, DEFAULT_RANK_EPS};

/// Column order of the CSV output and of [`PointRecord::fields`].
pub const CSV_HEADER: [&str; 11] =
    ["t1", "t2", "v", "w", "rho11", "S", "ma", "theta21_raw", "theta21_norm", "monge_raw", "monge_norm"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub t1: f64,
    pub t2: f64,
    pub v: f64,
    pub w: f64,
    pub rho11: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub ma: f64,
    pub theta21_raw: f64,
    pub theta21_norm: f64,
    pub monge_raw: f64,
    pub monge_norm: f64,
}

impl PointRecord {
    pub fn new(t1: f64, t2: f64, v: f64, w: f64, q: &PointQuantities<f64>) -> Self {
        Self {
            t1,
            t2,
            v,
            w,
            rho11: q.rho11,
            s: q.s,
            ma: q.monge_ampere.raw,
            theta21_raw: q.theta21.raw,
            theta21_norm: q.theta21.normalized(),
            monge_raw: q.monge_t1.raw,
            monge_norm: q.monge_t1.normalized(),
        }
    }

    pub fn fields(&self) -> [f64; 11] {
        [
            self.t1,
            self.t2,
            self.v,
            self.w,
            self.rho11,
            self.s,
            self.ma,
            self.theta21_raw,
            self.theta21_norm,
            self.monge_raw,
            self.monge_norm,
        ]
    }

    pub fn from_fields(f: [f64; 11]) -> Self {
        let [t1, t2, v, w, rho11, s, ma, theta21_raw, theta21_norm, monge_raw, monge_norm] = f;
        Self { t1, t2, v, w, rho11, s, ma, theta21_raw, theta21_norm, monge_raw, monge_norm }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Threshold below which a normalized residual counts as zero.
    pub zero: f64,
    /// Threshold above which a normalized residual counts as nonzero.
    pub nonzero: f64,
    /// Guard for `rho11 > 0` and `S != 0`.
    pub rank_eps: f64,
}

impl Tolerances {
    pub fn new(zero: f64) -> Self {
        Self { zero, nonzero: zero.sqrt(), rank_eps: DEFAULT_RANK_EPS }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::new(super::DEFAULT_TOL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub family: String,
    pub description: String,
    pub params: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub grid: GridSpec,
    pub trials: usize,
    pub excluded: usize,
    pub resampled: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub max_abs: f64,
    pub rms: f64,
}

impl Stat {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut max_abs, mut sum_sq, mut n) = (0.0f64, 0.0, 0usize);
        for x in values {
            max_abs = max_abs.max(x.abs());
            sum_sq += x * x;
            n += 1;
        }
        let rms = if n == 0 { 0.0 } else { (sum_sq / n as f64).sqrt() };
        Self { max_abs, rms }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub ma: Stat,
    pub theta21_raw: Stat,
    pub theta21_norm: Stat,
    pub monge_raw: Stat,
    pub monge_norm: Stat,
}

impl Summary {
    pub fn of(points: &[PointRecord]) -> Self {
        Self {
            ma: Stat::of(points.iter().map(|p| p.ma)),
            theta21_raw: Stat::of(points.iter().map(|p| p.theta21_raw)),
            theta21_norm: Stat::of(points.iter().map(|p| p.theta21_norm)),
            monge_raw: Stat::of(points.iter().map(|p| p.monge_raw)),
            monge_norm: Stat::of(points.iter().map(|p| p.monge_norm)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Below,
    Above,
}

/// A verdict as a measured quantity compared against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub kind: CheckKind,
}

impl Check {
    pub fn below(name: &str, measured: f64, threshold: f64) -> Self {
        Self { name: name.into(), measured, threshold, kind: CheckKind::Below }
    }

    pub fn above(name: &str, measured: f64, threshold: f64) -> Self {
        Self { name: name.into(), measured, threshold, kind: CheckKind::Above }
    }

    pub fn holds(&self) -> bool {
        match self.kind {
            CheckKind::Below => self.measured < self.threshold,
            CheckKind::Above => self.measured > self.threshold,
        }
    }
}

/// Names of the checks derived from the per-point records.
pub const GRID_CHECKS: [&str; 6] =
    ["theta21_flat", "monge_flat", "monge_nonzero", "monge_ampere", "levi_rank", "two_nondegenerate"];

/// The checks that depend only on the per-point records and the tolerances.
pub fn grid_checks(points: &[PointRecord], tol: &Tolerances) -> Vec<Check> {
    let max = |f: &dyn Fn(&PointRecord) -> f64| points.iter().map(f).fold(0.0f64, f64::max);
    let min = |f: &dyn Fn(&PointRecord) -> f64| points.iter().map(f).fold(f64::INFINITY, f64::min);
    let theta = max(&|p| p.theta21_norm.abs());
    let monge = max(&|p| p.monge_norm.abs());
    vec![
        Check::below("theta21_flat", theta, tol.zero),
        Check::below("monge_flat", monge, tol.zero),
        Check::above("monge_nonzero", monge, tol.nonzero),
        Check::below("monge_ampere", max(&|p| p.ma.abs() / (1.0 + p.rho11 * p.rho11)), tol.zero),
        Check::above("levi_rank", min(&|p| p.rho11), tol.rank_eps),
        Check::above("two_nondegenerate", min(&|p| p.s.abs()), tol.rank_eps),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub meta: Meta,
    pub points: Vec<PointRecord>,
    pub summary: Summary,
    pub checks: Vec<Check>,
    pub verdicts: BTreeMap<String, bool>,
    /// Verdict values the family is expected to produce.
    pub expected: BTreeMap<String, bool>,
    pub passed: bool,
}

impl ResidualReport {
    /// Builds the report; `extra` holds checks on quantities outside the point records.
    pub fn assemble(meta: Meta, points: Vec<PointRecord>, extra: Vec<Check>, expected: BTreeMap<String, bool>) -> Self {
        let mut checks = grid_checks(&points, &meta.tolerances);
        checks.extend(extra);
        let verdicts: BTreeMap<String, bool> = checks.iter().map(|c| (c.name.clone(), c.holds())).collect();
        let passed = !points.is_empty() && expected.iter().all(|(k, v)| verdicts.get(k) == Some(v));
        Self { summary: Summary::of(&points), meta, points, checks, verdicts, expected, passed }
    }

    /// Verdicts recomputed from the records, the tolerances and the non-grid checks.
    pub fn recomputed_verdicts(&self) -> BTreeMap<String, bool> {
        let mut out: BTreeMap<String, bool> =
            grid_checks(&self.points, &self.meta.tolerances).iter().map(|c| (c.name.clone(), c.holds())).collect();
        for c in &self.checks {
            if !GRID_CHECKS.contains(&c.name.as_str()) {
                out.insert(c.name.clone(), c.holds());
            }
        }
        out
    }

    /// Expected verdicts that did not come out as expected.
    pub fn failures(&self) -> Vec<String> {
        self.expected
            .iter()
            .filter(|(k, v)| self.verdicts.get(*k) != Some(v))
            .map(|(k, v)| format!("{k}: expected {v}, got {:?}", self.verdicts.get(k)))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::config("report", e.to_string()))
    }

    /// One row per point with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        for p in &self.points {
            let row: Vec<String> = p.fields().iter().map(|x| format!("{x:.16e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn parse_csv(s: &str) -> Result<Vec<PointRecord>> {
    let mut lines = s.lines();
    let header = lines.next().unwrap_or_default();
    if header != CSV_HEADER.join(",") {
        return Err(Error::config("csv", format!("unexpected header {header:?}")));
    }
    lines
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, line)| {
            let values: Vec<f64> = line
                .split(',')
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|_| Error::config(format!("csv row {}", i + 1), format!("bad number {x:?}")))
                })
                .collect::<Result<_>>()?;
            let fields: [f64; 11] =
                values.try_into().map_err(|_| Error::config(format!("csv row {}", i + 1), "expected 11 columns"))?;
            Ok(PointRecord::from_fields(fields))
        })
        .collect()
}
