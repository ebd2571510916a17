//! Lattice sums Σ_{k∈ℤⁿ} tr a(k)(p(k) − λ)^{−N} with a two-sided tail bound.
//!
//! Each unit cube around a lattice point lies within √n/2 of it, so for a
//! radially decreasing summand G the tail Σ_{|k|>R} G(|k|) is squeezed between
//! ∫_{|ξ|>R+h} G(|ξ|+h) and ∫_{|ξ|>R−h} G(|ξ|−h), h = √n/2.

use std::f64::consts::PI;

use tracecoef_core::symbol::{to_f64, ClassicalSymbol};

use crate::error::{OracleError, Result};
use crate::quad::tanh_sinh;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeValue {
    /// partial sum plus the continuum estimate of the tail
    pub value: f64,
    /// rigorous bound on |value − full sum| (up to quadrature error)
    pub tail_bound: f64,
    pub radius: usize,
    pub points: usize,
}

const MAX_POINTS: usize = 60_000_000;

#[derive(Clone, Debug)]
struct Profile {
    // (degree, extension, coefficient)
    terms: Vec<(f64, i32, f64)>,
}

impl Profile {
    fn of(s: &ClassicalSymbol, i: usize) -> Result<Self> {
        let mut terms = Vec::new();
        for t in s.terms() {
            let c = t.angular.entry(i).as_constant().ok_or_else(|| {
                OracleError::Unsupported("lattice sums need radial symbols".into())
            })?;
            terms.push((to_f64(t.degree), t.extension as i32, c.to_f64()));
        }
        Ok(Profile { terms })
    }

    fn at(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(d, k, c)| {
                if r == 0.0 {
                    let e = d + k as f64;
                    if e == 0.0 {
                        c
                    } else if e > 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else if r >= 1.0 {
                    c * r.powf(d)
                } else {
                    c * r.powf(d) * r.powi(k)
                }
            })
            .sum()
    }
}

/// Number of lattice points with |k|² = j, for j ≤ r².
fn shell_counts(n: usize, r: usize) -> Vec<u32> {
    let r2 = r * r;
    let mut counts = vec![0u32; r2 + 1];
    let ri = r as i64;
    match n {
        1 => {
            counts[0] = 1;
            for k in 1..=r {
                counts[k * k] += 2;
            }
        }
        2 => {
            for a in -ri..=ri {
                let rest = r2 as i64 - a * a;
                let b_max = (rest as f64).sqrt() as i64 + 1;
                for b in -b_max..=b_max {
                    let j = a * a + b * b;
                    if j <= r2 as i64 {
                        counts[j as usize] += 1;
                    }
                }
            }
        }
        _ => {
            for a in -ri..=ri {
                for b in -ri..=ri {
                    let ab = a * a + b * b;
                    if ab > r2 as i64 {
                        continue;
                    }
                    let c_max = ((r2 as i64 - ab) as f64).sqrt() as i64 + 1;
                    for c in -c_max..=c_max {
                        let j = ab + c * c;
                        if j <= r2 as i64 {
                            counts[j as usize] += 1;
                        }
                    }
                }
            }
        }
    }
    counts
}

fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// ∫_{lo}^∞ g(u) du by mapping u = lo/x.
fn tail_integral(g: impl Fn(f64) -> f64, lo: f64) -> Result<f64> {
    let q = tanh_sinh(
        |x| {
            let u = lo / x;
            num_complex::Complex64::new(g(u) * lo / (x * x), 0.0)
        },
        0.0,
        1.0,
        1e-12,
    )?;
    Ok(q.value.re)
}

/// Σ_{k∈ℤⁿ} tr a(k)(p(k) − λ)^{−N} for radial a, p and real λ below the spectrum.
/// The radius doubles until the tail bound is under `tol` relative to the value.
pub fn lattice_trace(
    a: &ClassicalSymbol,
    p: &ClassicalSymbol,
    big_n: u32,
    lambda: f64,
    tol: f64,
) -> Result<LatticeValue> {
    let n = a.dimension();
    if !(1..=3).contains(&n) {
        return Err(OracleError::Dimension(n));
    }
    if p.dimension() != n || p.matrix_size() != a.matrix_size() {
        return Err(OracleError::Unsupported(
            "a and p must share n and M".into(),
        ));
    }
    let decay = a.order() - p.order() * tracecoef_core::Degree::from_integer(big_n as i64);
    if big_n == 0 || to_f64(p.order()) <= 0.0 || to_f64(decay) >= -(n as f64) {
        return Err(OracleError::Decay {
            order: a.order().to_string(),
            decay: decay.to_string(),
            n,
        });
    }
    let h = (n as f64).sqrt() / 2.0;
    let mut entries = Vec::new();
    let mut start = 8usize;
    for i in 0..a.matrix_size() {
        let pa = Profile::of(a, i)?;
        let pp = Profile::of(p, i)?;
        if pa.at(0.0).is_infinite() {
            return Err(OracleError::Unsupported(
                "a is singular at the origin".into(),
            ));
        }
        // p − λ must stay positive along the ray
        let below = (0..=2000).all(|j| {
            let r = j as f64 / 100.0;
            pp.at(r) - lambda > 0.0
        });
        if !below {
            return Err(OracleError::Unsupported("λ is not below p".into()));
        }
        start = start.max(monotone_radius(&pa, &pp, big_n, lambda, h));
        entries.push((pa, pp));
    }
    let area = sphere_area(n);
    let mut radius = start;
    loop {
        let points = (2 * radius + 1).pow(n as u32);
        if points > MAX_POINTS {
            break;
        }
        let counts = shell_counts(n, radius);
        let mut value = 0.0;
        let mut bound = 0.0;
        for (pa, pp) in &entries {
            let f = |r: f64| pa.at(r) * (pp.at(r) - lambda).powi(-(big_n as i32));
            let mut sum = 0.0;
            let mut comp = 0.0;
            for (j, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let term = c as f64 * f((j as f64).sqrt());
                // Neumaier summation
                let t = sum + term;
                if sum.abs() >= term.abs() {
                    comp += (sum - t) + term;
                } else {
                    comp += (term - t) + sum;
                }
                sum = t;
            }
            sum += comp;
            let r = radius as f64;
            // each term separately: |c| r^d (p − λ)^{−N} is decreasing past `start`
            let mut tail = 0.0;
            for &(d, _, c) in &pa.terms {
                let g = |u: f64| c.abs() * u.powf(d) * (pp.at(u) - lambda).powi(-(big_n as i32));
                let nn = n as i32 - 1;
                let mid = tail_integral(|u| u.powi(nn) * g(u), r)?;
                let lower = tail_integral(|u| (u - h).powi(nn) * g(u), r + 2.0 * h)?;
                let upper = tail_integral(|u| (u + h).powi(nn) * g(u), r - 2.0 * h)?;
                tail += mid * c.signum();
                bound += area * (upper - mid).max(mid - lower);
            }
            value += sum + area * tail;
        }
        if bound <= tol * value.abs() {
            return Ok(LatticeValue {
                value,
                tail_bound: bound,
                radius,
                points,
            });
        }
        if (2 * (2 * radius) + 1).pow(n as u32) > MAX_POINTS {
            return Err(OracleError::TailBound { bound, radius });
        }
        radius *= 2;
    }
    Err(OracleError::TailBound {
        bound: f64::INFINITY,
        radius,
    })
}

/// Smallest radius (a power of two) past which every |a-term|·(p − λ)^{−N}
/// is decreasing on a log grid, with room for the 2h shift.
fn monotone_radius(pa: &Profile, pp: &Profile, big_n: u32, lambda: f64, h: f64) -> usize {
    let mut r0 = 8usize;
    'outer: while r0 < 1 << 20 {
        let lo = r0 as f64 - 2.0 * h;
        for &(d, _, _) in &pa.terms {
            let g = |u: f64| u.powf(d) * (pp.at(u) - lambda).powi(-(big_n as i32));
            let mut prev = g(lo);
            for j in 1..=400 {
                let u = lo * (1e4f64).powf(j as f64 / 400.0);
                let v = g(u);
                if v > prev {
                    r0 *= 2;
                    continue 'outer;
                }
                prev = v;
            }
        }
        return r0;
    }
    r0
}
