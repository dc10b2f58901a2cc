use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` equally spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::config("grid", format!("need min < max, got {min}:{max}")));
        }
        if n < 2 {
            return Err(Error::config("grid", format!("need at least 2 points per axis, got {n}")));
        }
        Ok(Self { min, max, n })
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.max
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }

    fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, n] = parts.as_slice() else {
            return Err(Error::config("grid", format!("expected min:max:n, got {s:?}")));
        };
        let num =
            |x: &str| x.trim().parse::<f64>().map_err(|_| Error::config("grid", format!("bad number {x:?} in {s:?}")));
        let n =
            n.trim().parse::<usize>().map_err(|_| Error::config("grid", format!("bad point count {n:?} in {s:?}")))?;
        Self::new(num(min)?, num(max)?, n)
    }
}

/// Domain guards dropping grid points outside a family's admissible window.
/// Dropped points are counted, never evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Exclusion {
    /// Keep `(C - t2) sign(C) >= margin` for the pole of the closed form at `t2 = C`.
    pub pole: Option<f64>,
    pub pole_margin: f64,
    /// Keep `q'(v) - w p''(v) > min_slope` after inversion.
    pub min_slope: Option<f64>,
    /// Keep `|v| <= v_max` after inversion.
    pub v_max: Option<f64>,
}

impl Exclusion {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn pole(c: f64, margin: f64) -> Self {
        Self { pole: Some(c), pole_margin: margin, ..Self::default() }
    }

    pub fn slope(min_slope: f64, v_max: Option<f64>) -> Self {
        Self { min_slope: Some(min_slope), v_max, ..Self::default() }
    }

    pub fn and(self, other: Self) -> Self {
        Self {
            pole: self.pole.or(other.pole),
            pole_margin: self.pole_margin.max(other.pole_margin),
            min_slope: self.min_slope.or(other.min_slope),
            v_max: self.v_max.or(other.v_max),
        }
    }

    pub fn keeps_t(&self, t2: f64) -> bool {
        match self.pole {
            Some(c) => (c - t2) * c.signum() >= self.pole_margin,
            None => true,
        }
    }

    pub fn keeps_vw(&self, v: f64, slope: f64) -> bool {
        self.min_slope.is_none_or(|m| slope > m) && self.v_max.is_none_or(|m| v.abs() <= m)
    }

    pub fn needs_inversion(&self) -> bool {
        self.min_slope.is_some() || self.v_max.is_some()
    }
}

/// Rectangular grid in `(t1, t2)`, visited row-major with `t1` as the outer index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t1: AxisRange,
    pub t2: AxisRange,
    pub exclusion: Exclusion,
}

impl Default for GridSpec {
    fn default() -> Self {
        let axis = AxisRange { min: -0.2, max: 0.2, n: 21 };
        Self { t1: axis, t2: axis, exclusion: Exclusion::none() }
    }
}

impl GridSpec {
    pub fn new(t1: AxisRange, t2: AxisRange) -> Self {
        Self { t1, t2, exclusion: Exclusion::none() }
    }

    /// Parses `"min:max:n,min:max:n"`.
    pub fn parse(s: &str) -> Result<Self> {
        let Some((a, b)) = s.split_once(',') else {
            return Err(Error::config("grid", format!("expected min:max:n,min:max:n, got {s:?}")));
        };
        Ok(Self::new(AxisRange::parse(a)?, AxisRange::parse(b)?))
    }

    pub fn with_exclusion(mut self, exclusion: Exclusion) -> Self {
        self.exclusion = exclusion;
        self
    }

    pub fn len(&self) -> usize {
        self.t1.n * self.t2.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let t2 = self.t2.values();
        self.t1.values().into_iter().flat_map(|a| t2.iter().map(move |&b| (a, b))).collect()
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = (self.t1, self.t2);
        write!(f, "{:?}:{:?}:{},{:?}:{:?}:{}", a.min, a.max, a.n, b.min, b.max, b.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_order() {
        let g = GridSpec::parse("-0.2:0.2:21,-0.1:0.3:3").unwrap();
        assert_eq!(g.t1, AxisRange { min: -0.2, max: 0.2, n: 21 });
        let pts = g.points();
        assert_eq!(pts.len(), 63);
        assert_eq!(pts[0], (-0.2, -0.1));
        assert_eq!(pts[1].0, -0.2);
        assert_eq!(pts[2], (-0.2, 0.3));
        assert_eq!(pts[62], (0.2, 0.3));
        assert_eq!(GridSpec::parse(&g.to_string()).unwrap(), g);
        assert_eq!(GridSpec::default().points()[10 * 21 + 10], (0.0, 0.0));
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in ["", "0:1:5", "0:1:1,0:1:5", "1:0:5,0:1:5", "a:1:5,0:1:5", "0:1:5,0:1", "0:1:5,0:1:x"] {
            assert!(matches!(GridSpec::parse(bad), Err(Error::Config { .. })), "{bad}");
        }
    }

    #[test]
    fn exclusions() {
        let e = Exclusion::pole(1.0, 0.05).and(Exclusion::slope(0.05, Some(1.0)));
        assert!(e.keeps_t(0.9) && !e.keeps_t(0.97));
        assert!(Exclusion::pole(-1.0, 0.05).keeps_t(-0.9));
        assert!(!Exclusion::pole(-1.0, 0.05).keeps_t(-1.0));
        assert!(e.keeps_vw(0.5, 0.1) && !e.keeps_vw(1.5, 0.1) && !e.keeps_vw(0.5, 0.01));
    }
}
