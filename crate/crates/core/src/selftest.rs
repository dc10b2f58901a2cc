//! Seeded invariant checks of the jet kernel, the expression language and the
//! conic identities, runnable from the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conic::{final1_from_conics, monge1d_residual, p_from_conic, pq_identity_residuals, ConicPoly};
use crate::error::Result;
use crate::expr::{parse, Params};
use crate::finite_diff;
use crate::jet::{compose, Axis, Jet, Jet1, Jet2};
use crate::univariate::UnivariateFn;

const SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestCase {
    pub suite: &'static str,
    pub name: &'static str,
    /// Worst error observed, or the quantity compared against `threshold`.
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

fn below(suite: &'static str, name: &'static str, measured: f64, threshold: f64) -> SelftestCase {
    SelftestCase { suite, name, measured, threshold, passed: measured < threshold }
}

fn above(suite: &'static str, name: &'static str, measured: f64, threshold: f64) -> SelftestCase {
    SelftestCase { suite, name, measured, threshold, passed: measured > threshold }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

fn conic(rng: &mut ChaCha8Rng) -> ConicPoly<f64> {
    ConicPoly { a0: rng.gen_range(0.5..1.5), a1: rng.gen_range(-0.5..0.5), a2: rng.gen_range(-0.5..0.5) }
}

/// Taylor coefficients of `sum c_k x^k` about `a`.
fn shift_poly(c: &[f64; 6], a: f64) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (k, &ck) in c.iter().enumerate() {
        let mut binom = 1.0;
        for (j, o) in out.iter_mut().enumerate().take(k + 1) {
            // C(k, j) a^(k-j)
            *o += ck * binom * a.powi((k - j) as i32);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
    }
    out
}

fn horner<J: Jet<f64>>(c: &[f64; 6], x: J) -> J {
    c.iter().rev().fold(x.constant_like(0.0), |acc, &ck| (acc * x).add_scalar(ck))
}

pub fn jet_suite() -> Result<Vec<SelftestCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut poly_err = 0.0f64;
    let mut leibniz_err = 0.0f64;
    let mut round_trip = 0.0f64;
    for _ in 0..50 {
        let a = rng.gen_range(-1.0..1.0);
        let mut f = [0.0; 6];
        let mut g = [0.0; 6];
        for k in 0..3 {
            f[k] = rng.gen_range(-2.0..2.0);
            g[k] = rng.gen_range(-2.0..2.0);
        }
        g[3] = rng.gen_range(-2.0..2.0);
        let x = Jet1::variable(a);
        let (fj, gj) = (horner(&f, x), horner(&g, x));
        let mut fg = [0.0; 6];
        for i in 0..6 {
            for j in 0..6 - i {
                fg[i + j] += f[i] * g[j];
            }
        }
        for (got, exact) in [(fj, shift_poly(&f, a)), (fj * gj, shift_poly(&fg, a))] {
            for (g, e) in got.coeffs.iter().zip(exact) {
                poly_err = poly_err.max((g - e).abs() / (1.0 + e.abs()));
            }
        }
        let h = (fj.sin() + gj).exp();
        let prod = fj * h;
        let fd = fj.derivatives();
        let hd = h.derivatives();
        let leibniz = fd[0] * hd[3] + 3.0 * fd[1] * hd[2] + 3.0 * fd[2] * hd[1] + fd[3] * hd[0];
        leibniz_err = leibniz_err.max((prod.derivative(3) - leibniz).abs() / (1.0 + leibniz.abs()));
        let y = gj.add_scalar(5.0 + g[0].abs());
        let back = (fj * y).try_div(&y)?;
        for k in 0..6 {
            round_trip = round_trip.max(rel(back.coeffs[k], fj.coeffs[k]));
        }
    }

    // closed-form derivatives of exp, log and a rational function up to order 5
    let mut closed = 0.0f64;
    for &a in &[0.3f64, 1.7] {
        let x = Jet1::variable(a);
        let e = x.exp().derivatives();
        let l = x.ln()?.derivatives();
        let r = x.add_scalar(1.0).recip()?.derivatives();
        let mut fact = 1.0;
        for k in 1..6 {
            let km1 = fact;
            fact *= k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            closed = closed.max(rel(e[k], a.exp()));
            closed = closed.max(rel(l[k], sign * km1 / a.powi(k as i32)));
            closed = closed.max(rel(r[k], -sign * fact / (a + 1.0).powi(k as i32 + 1)));
        }
    }

    // central differences against the jet for orders 1..3
    let f = |x: f64| (x.sin() + 2.0).ln() * x.exp();
    let mut fd_err = 0.0f64;
    for &a in &[-0.4, 0.2, 0.9] {
        let j = (Jet1::variable(a).sin().add_scalar(2.0)).ln()? * Jet1::variable(a).exp();
        for n in 1..=3 {
            fd_err = fd_err.max(rel(finite_diff::derivative(f, a, n, 1e-3), j.derivative(n)));
        }
    }

    // log(1 + t1) about (0, 0) through composition
    let outer = Jet1::variable(1.0).ln()?;
    let inner = Jet2::<f64>::variable(0.0, Axis::T1).add_scalar(1.0);
    let c = compose(&outer, 1.0, &inner)?;
    let compose_err = (c.coeff(1, 0) - 1.0).abs() + (c.coeff(2, 0) + 0.5).abs() + c.coeff(0, 1).abs();

    Ok(vec![
        below("jet", "polynomial exactness", poly_err, 1e-13),
        below("jet", "Leibniz rule at order 3", leibniz_err, 1e-12),
        below("jet", "div after mul round trip", round_trip, 1e-12),
        below("jet", "exp/log/rational derivatives to order 5", closed, 1e-10),
        below("jet", "finite differences to order 3", fd_err, 1e-5),
        below("jet", "composition with log", compose_err, 1e-15),
    ])
}

const EXPRESSIONS: [&str; 6] = [
    "(t1+C)*log((t1+C)/(C-t2)) - (t1+t2)",
    "t1^2/(2*(1-t2))",
    "-t1^2 + exp(t2)*sin(t1) - 3/(2+t2)",
    "sqrt(1 + t1^2 + t2^2) * cos(t1 - t2)",
    "pow(1.5 + t1, 2.5) - (t1*t2)^3",
    "2^-t1 + -(t2 - -1)",
];

pub fn expr_suite() -> Result<Vec<SelftestCase>> {
    let params: Params = [("C".to_string(), 1.3)].into_iter().collect();
    let points = [(0.1, -0.2), (-0.15, 0.05), (0.0, 0.0)];
    let (mut reprint, mut order0, mut slope) = (0.0f64, 0.0f64, 0.0f64);
    for src in EXPRESSIONS {
        let e = parse(src, &["t1", "t2"])?;
        let once = e.to_string();
        let again = parse(&once, &["t1", "t2"])?;
        if again.to_string() != once || again != parse(&again.to_string(), &["t1", "t2"])? {
            reprint += 1.0;
        }
        for &(a, b) in &points {
            let jet = e.eval_jet2(a, b, &params)?;
            let value = e.eval_point(&[a, b], &params)?;
            order0 = order0.max((jet.coeff(0, 0) - value).abs() / value.abs().max(1e-300));
            let fd = finite_diff::derivative(|x| e.eval_point(&[x, b], &params).unwrap_or(f64::NAN), a, 1, 1e-3);
            slope = slope.max(rel(fd, jet.coeff(1, 0)));
        }
    }
    Ok(vec![
        below("exprlang", "print/parse/print fixed point (failures)", reprint, 0.5),
        below("exprlang", "jet order 0 equals pointwise value", order0, 1e-14),
        below("exprlang", "first partial against finite differences", slope, 1e-6),
    ])
}

pub fn conic_suite() -> Result<Vec<SelftestCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut monge = 0.0f64;
    for _ in 0..100 {
        // P >= 0.5 - 0.15 - 0.045 on |v| <= 0.3
        let poly = conic(&mut rng);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let p = p_from_conic(poly, sign, rng.gen_range(-1.0..1.0))?;
        let v = rng.gen_range(-0.3..0.3);
        monge = monge.max(monge1d_residual(&p.jet(v)?).normalized().abs());
    }

    let (mut cubic, mut proportional, mut separated) = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..50 {
        let (p, q) = (conic(&mut rng), conic(&mut rng));
        let tau = rng.gen_range(-0.5..0.5);
        let (r1, r2) = pq_identity_residuals(&p, &q, tau);
        let w = p.eval(tau) * q.deriv(tau) - p.deriv(tau) * q.eval(tau);
        cubic = cubic.max((r1.raw - r2.raw - 8.0 * w.powi(3)).abs() / (r1.scale + r2.scale));
        let qc = p.scaled(rng.gen_range(0.5..2.0))?;
        let (s1, s2) = pq_identity_residuals(&p, &qc, tau);
        proportional = proportional.max(s1.normalized().abs()).max(s2.normalized().abs());
        let worst = (-5..=5)
            .map(|i| {
                let (r1, r2) = pq_identity_residuals(&p, &q, 0.1 * i as f64);
                r1.normalized().abs().max(r2.normalized().abs())
            })
            .fold(0.0, f64::max);
        separated = separated.min(worst);
    }

    // 9 (p''' / p''^(5/3))'' against the Monge residual over p''^(11/3), p = e^v + v^3
    let mut chain = 0.0f64;
    for v in [0.05f64, 0.2, 0.4] {
        let e = v.exp();
        let p = Jet1::from_derivatives([e + v.powi(3), e + 3.0 * v * v, e + 6.0 * v, e + 6.0, e, e])?;
        let p2 = p.differentiate().differentiate();
        let ratio = p2.differentiate().try_div(&p2.powf(5.0 / 3.0)?)?;
        let rhs = monge1d_residual(&p).raw / p2.value().powf(11.0 / 3.0);
        chain = chain.max((9.0 * ratio.derivative(2) - rhs).abs() / rhs.abs());
    }

    let p = conic(&mut rng);
    let flat = final1_from_conics(&p, &p.scaled(2.0)?, 1.0, 0.1)?;
    let flat_max = flat.iter().map(|r| r.normalized().abs()).fold(0.0, f64::max);

    Ok(vec![
        below("conic", "conic solutions solve the Monge equation", monge, 1e-9),
        below("conic", "identity difference is 8 (P Q' - P' Q)^3", cubic, 1e-12),
        below("conic", "identities vanish for Q = cP", proportional, 1e-12),
        above("conic", "identities do not vanish for Q != cP", separated, 1e-6),
        below("conic", "antiderivative chain of the Monge equation", chain, 1e-8),
        below("conic", "ODE residuals vanish for Q = 2P", flat_max, 1e-9),
    ])
}

/// All suites in order.
pub fn run_selftest() -> Result<Vec<SelftestCase>> {
    let mut cases = jet_suite()?;
    cases.extend(expr_suite()?);
    cases.extend(conic_suite()?);
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_cases_pass() {
        for case in run_selftest().unwrap() {
            assert!(case.passed, "{case:?}");
        }
    }
}
