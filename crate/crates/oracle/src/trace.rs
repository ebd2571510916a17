//! Direct quadrature of ∫ tr a(ξ)(p(ξ) − λ)^{−N} đξ.

use std::f64::consts::PI;

use num_complex::Complex64;
use tracecoef_core::symbol::{to_f64, ClassicalSymbol};

use crate::error::{OracleError, Result};
use crate::quad::tanh_sinh;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceValue {
    pub value: Complex64,
    /// accumulated quadrature error estimate
    pub error: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    /// relative tolerance of each radial integral
    pub tol: f64,
    /// trapezoid nodes on the circle (n = 2) or per latitude ring (n = 3)
    pub angular_nodes: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-13,
            angular_nodes: 64,
        }
    }
}

/// One homogeneous term evaluated along a fixed direction.
#[derive(Clone, Copy, Debug)]
struct Ray {
    degree: f64,
    extension: i32,
    coef: f64,
}

fn rays(s: &ClassicalSymbol, entry: usize, omega: &[f64]) -> Vec<Ray> {
    s.terms()
        .iter()
        .map(|t| Ray {
            degree: to_f64(t.degree),
            extension: t.extension as i32,
            coef: t.angular.entry(entry).eval_direction(omega),
        })
        .collect()
}

/// Realized value Σ c r^d (times r^K inside the unit ball).
fn realized(terms: &[Ray], r: f64) -> f64 {
    terms
        .iter()
        .map(|t| {
            let h = t.coef * r.powf(t.degree);
            if r >= 1.0 {
                h
            } else {
                h * r.powi(t.extension)
            }
        })
        .sum()
}

/// p(r)/r^m for r ≥ 1, safe for very large r.
fn scaled(terms: &[Ray], m: f64, r: f64) -> f64 {
    terms.iter().map(|t| t.coef * r.powf(t.degree - m)).sum()
}

/// ∫_0^∞ r^{n−1} ρ(r) (p(r) − λ)^{−N} dr for one a-term ρ = r^d (r^{d+K} inside).
fn radial_integral(
    n: usize,
    term: Ray,
    p: &[Ray],
    m: f64,
    big_n: i32,
    lambda: Complex64,
    tol: f64,
) -> Result<(Complex64, f64)> {
    let resolvent = |pv: f64| (Complex64::new(pv, 0.0) - lambda).powi(-big_n);
    let e_in = n as f64 - 1.0 + term.degree + term.extension as f64;
    let inner = tanh_sinh(|r| r.powf(e_in) * resolvent(realized(p, r)), 0.0, 1.0, tol)?;
    let e_out = n as f64 - 1.0 + term.degree;
    let r1 = lambda.norm().powf(1.0 / m).max(1.0);
    let middle = tanh_sinh(|r| r.powf(e_out) * resolvent(realized(p, r)), 1.0, r1, tol)?;
    // r = r1/x on (0, 1]: r^{e_out} dr = r1^{q+1} x^{−q−2} (p/r^m − λ r^{−m})^{−N}
    let q = e_out - m * big_n as f64;
    let lead = r1.powf(q + 1.0);
    let tail = tanh_sinh(
        |x| {
            let r = r1 / x;
            let base = Complex64::new(scaled(p, m, r), 0.0) - lambda * r.powf(-m);
            base.powi(-big_n) * (lead * x.powf(-q - 2.0))
        },
        0.0,
        1.0,
        tol,
    )?;
    let value = (inner.value + middle.value + tail.value) * term.coef;
    let error = (inner.error + middle.error + tail.error) * term.coef.abs();
    Ok((value, error))
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(k: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let mut x = (PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pk = if k == 0 { 1.0 } else { p1 };
            let pkm1 = p0;
            dp = k as f64 * (x * pk - pkm1) / (x * x - 1.0);
            let dx = pk / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Quadrature nodes (direction, weight) on S^{n−1} with `k` base nodes.
fn sphere_nodes(n: usize, k: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    match n {
        1 => Ok(vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)]),
        2 => Ok((0..k)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / k as f64;
                (vec![th.cos(), th.sin()], 2.0 * PI / k as f64)
            })
            .collect()),
        3 => {
            let mut out = Vec::new();
            for (z, wz) in gauss_legendre(k / 2) {
                let s = (1.0 - z * z).sqrt();
                for j in 0..k {
                    let ph = 2.0 * PI * j as f64 / k as f64;
                    out.push((
                        vec![s * ph.cos(), s * ph.sin(), z],
                        wz * 2.0 * PI / k as f64,
                    ));
                }
            }
            Ok(out)
        }
        _ => Err(OracleError::Dimension(n)),
    }
}

/// ∫ tr a(ξ)(p(ξ) − λ)^{−N} đξ, đξ = (2π)^{−n} dξ.
pub fn numeric_trace(
    a: &ClassicalSymbol,
    p: &ClassicalSymbol,
    big_n: u32,
    lambda: Complex64,
    opts: &QuadOptions,
) -> Result<TraceValue> {
    let n = a.dimension();
    if !(1..=3).contains(&n) {
        return Err(OracleError::Dimension(n));
    }
    if p.dimension() != n || p.matrix_size() != a.matrix_size() {
        return Err(OracleError::Unsupported(
            "a and p must share n and M".into(),
        ));
    }
    if big_n == 0 {
        return Err(OracleError::Unsupported("N must be at least 1".into()));
    }
    let m = to_f64(p.order());
    let decay = a.order() - p.order() * tracecoef_core::Degree::from_integer(big_n as i64);
    if m <= 0.0 || to_f64(decay) >= -(n as f64) {
        return Err(OracleError::Decay {
            order: a.order().to_string(),
            decay: decay.to_string(),
            n,
        });
    }
    let norm = (2.0 * PI).powi(-(n as i32));
    let big_n = big_n as i32;
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for i in 0..a.matrix_size() {
        let radial_p = p
            .terms()
            .iter()
            .all(|t| t.angular.entry(i).as_constant().is_some());
        if radial_p {
            let pr = rays(p, i, &vec![1.0; n]);
            for t in a.terms() {
                let w = t.angular.entry(i).moment().to_f64();
                if w == 0.0 {
                    continue;
                }
                let ray = Ray {
                    degree: to_f64(t.degree),
                    extension: t.extension as i32,
                    coef: w,
                };
                let (v, e) = radial_integral(n, ray, &pr, m, big_n, lambda, opts.tol)?;
                value += v;
                error += e;
            }
        } else {
            // trapezoid/Gauss product rule; halving the ring count estimates the angular error
            let nodes = sphere_nodes(n, opts.angular_nodes)?;
            let coarse = sphere_nodes(n, opts.angular_nodes / 2)?;
            let eval = |nodes: &[(Vec<f64>, f64)]| -> Result<(Complex64, f64)> {
                let mut v = Complex64::new(0.0, 0.0);
                let mut e = 0.0;
                for (omega, w) in nodes {
                    let pr = rays(p, i, omega);
                    for ray in rays(a, i, omega) {
                        if ray.coef == 0.0 {
                            continue;
                        }
                        let (x, err) = radial_integral(n, ray, &pr, m, big_n, lambda, opts.tol)?;
                        v += x * *w;
                        e += err * w;
                    }
                }
                Ok((v, e))
            };
            let (fine, e_fine) = eval(&nodes)?;
            let (rough, _) = eval(&coarse)?;
            value += fine;
            error += e_fine + (fine - rough).norm();
        }
    }
    Ok(TraceValue {
        value: value * norm,
        error: error * norm,
    })
}
