//! Composite Gauss–Legendre quadrature.

use std::sync::OnceLock;

/// Number of nodes per panel.
pub const NODES: usize = 16;

/// Nodes and weights on `[-1, 1]`, computed once by Newton iteration on the
/// Legendre polynomial.
pub fn rule() -> &'static ([f64; NODES], [f64; NODES]) {
    static RULE: OnceLock<([f64; NODES], [f64; NODES])> = OnceLock::new();
    RULE.get_or_init(gauss_legendre::<NODES>)
}

fn gauss_legendre<const N: usize>() -> ([f64; N], [f64; N]) {
    let mut x = [0.0; N];
    let mut w = [0.0; N];
    let n = N as f64;
    for i in 0..N.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_N(z) and P_{N-1}(z) by the three-term recurrence
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=N {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[N - 1 - i] = z;
        w[i] = wi;
        w[N - 1 - i] = wi;
    }
    (x, w)
}

/// Integrates `f` over `[a, b]` (either orientation) with `panels` equal panels.
pub fn integrate<E>(mut f: impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64, panels: usize) -> Result<f64, E> {
    let (x, w) = rule();
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut acc = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            acc += wi * f(mid + 0.5 * h * xi)?;
        }
        total += 0.5 * h * acc;
    }
    Ok(total)
}

/// Integrates over `[a, b]` with panels no wider than `max_width`.
pub fn integrate_width<E>(f: impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64, max_width: f64) -> Result<f64, E> {
    if a == b {
        return Ok(0.0);
    }
    let panels = ((b - a).abs() / max_width).ceil() as usize;
    integrate(f, a, b, panels)
}

/// Integrates several functions sharing the same nodes in one pass.
pub fn integrate_many<const K: usize, E>(
    mut f: impl FnMut(f64) -> Result<[f64; K], E>,
    a: f64,
    b: f64,
    max_width: f64,
) -> Result<[f64; K], E> {
    let mut total = [0.0; K];
    if a == b {
        return Ok(total);
    }
    let (x, w) = rule();
    let panels = ((b - a).abs() / max_width).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(w) {
            let values = f(mid + 0.5 * h * xi)?;
            for (t, v) in total.iter_mut().zip(values) {
                *t += 0.5 * h * wi * v;
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn weights_sum_to_two_and_nodes_are_symmetric() {
        let (x, w) = rule();
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for i in 0..NODES {
            assert!((x[i] + x[NODES - 1 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_for_degree_31() {
        let got = integrate(|t| Ok::<_, Infallible>(t.powi(30) + t.powi(31)), -1.0, 1.0, 1).unwrap();
        assert!((got - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn composite_exponential() {
        let got = integrate_width(|t| Ok::<_, Infallible>(t.exp()), 0.0, -0.7, 0.1).unwrap();
        assert!((got - ((-0.7f64).exp() - 1.0)).abs() < 1e-15);
        assert_eq!(integrate_width(Ok::<_, Infallible>, 0.3, 0.3, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn many_at_once() {
        let [a, b] = integrate_many(|t| Ok::<_, Infallible>([t.exp(), t * t]), 0.0, 0.45, 0.1).unwrap();
        assert!((a - (0.45f64.exp() - 1.0)).abs() < 1e-15);
        assert!((b - 0.45f64.powi(3) / 3.0).abs() < 1e-16);
    }
}
