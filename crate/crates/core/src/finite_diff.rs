//! Central finite differences with one Richardson extrapolation step, used as
//! an independent check on jet-extracted derivatives.

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Weights and offsets (in units of `h`) of the central `n`-th difference.
fn stencil(n: usize) -> Vec<(f64, f64)> {
    (0..=n)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            (sign * binomial(n, i), n as f64 / 2.0 - i as f64)
        })
        .collect()
}

fn central(f: &impl Fn(f64) -> f64, x: f64, n: usize, h: f64) -> f64 {
    stencil(n).iter().map(|(c, o)| c * f(x + o * h)).sum::<f64>() / h.powi(n as i32)
}

/// `f^(n)(x)` from central differences at steps `h` and `h/2`, combined to
/// cancel the `h^2` error term.
pub fn derivative(f: impl Fn(f64) -> f64, x: f64, n: usize, h: f64) -> f64 {
    if n == 0 {
        return f(x);
    }
    let coarse = central(&f, x, n, h);
    let fine = central(&f, x, n, 0.5 * h);
    (4.0 * fine - coarse) / 3.0
}

fn central2(f: &impl Fn(f64, f64) -> f64, x: (f64, f64), (j, k): (usize, usize), h: f64) -> f64 {
    let (sj, sk) = (stencil(j), stencil(k));
    let mut acc = 0.0;
    for (cj, oj) in &sj {
        for (ck, ok) in &sk {
            acc += cj * ck * f(x.0 + oj * h, x.1 + ok * h);
        }
    }
    acc / h.powi((j + k) as i32)
}

/// `d^(j+k) f / dx^j dy^k` at `x`, extrapolated like [`derivative`].
pub fn partial(f: impl Fn(f64, f64) -> f64, x: (f64, f64), order: (usize, usize), h: f64) -> f64 {
    if order == (0, 0) {
        return f(x.0, x.1);
    }
    let coarse = central2(&f, x, order, h);
    let fine = central2(&f, x, order, 0.5 * h);
    (4.0 * fine - coarse) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_derivatives() {
        for n in 1..=3 {
            assert!((derivative(f64::exp, 0.3, n, 1e-3) - 0.3f64.exp()).abs() < 1e-5, "{n}");
        }
        for n in 4..=5 {
            assert!((derivative(f64::exp, 0.3, n, 0.05) - 0.3f64.exp()).abs() < 1e-5, "{n}");
        }
    }

    #[test]
    fn mixed_partial() {
        let f = |x: f64, y: f64| (x + 2.0 * y).exp();
        // d^3 / dx dy^2 = 4 e^(x + 2y)
        let got = partial(f, (0.1, -0.2), (1, 2), 1e-2);
        assert!((got - 4.0 * (-0.3f64).exp()).abs() < 1e-6);
    }
}
