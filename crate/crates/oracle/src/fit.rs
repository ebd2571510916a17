//! Least-squares fitting of a known exponent ladder to sampled traces.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use tracecoef_core::resolvent::AsymptoticExpansion;
use tracecoef_core::symbol::{deg, to_f64, ClassicalSymbol};
use tracecoef_core::Degree;

use crate::error::{OracleError, Result};
use crate::quad::tanh_sinh;

/// One basis function (−λ)^{exponent} log(−λ)^{log_power}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub exponent: Degree,
    pub log_power: u32,
}

impl Slot {
    pub fn new(exponent: Degree, log_power: u32) -> Self {
        Slot {
            exponent,
            log_power,
        }
    }

    fn basis(&self, z: Complex64) -> Complex64 {
        let l = z.ln();
        (l * to_f64(self.exponent)).exp() * l.powi(self.log_power as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub lambda: Complex64,
    pub value: Complex64,
}

/// λ = −t e^{iθ} on a geometric ladder t = t₀ ρ^i.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RaySampler {
    pub theta: f64,
    pub t0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl RaySampler {
    pub fn new(theta: f64, count: usize) -> Self {
        RaySampler {
            theta,
            t0: 16.0,
            ratio: 4.0,
            count,
        }
    }

    /// Default sample count for a ladder of `len` slots.
    pub fn for_ladder(theta: f64, len: usize) -> Self {
        Self::new(theta, len + 4)
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta.is_nan() || self.theta.abs() >= std::f64::consts::PI {
            return Err(OracleError::Unsupported(format!(
                "ray angle {} outside (−π, π)",
                self.theta
            )));
        }
        if self.t0.is_nan() || self.t0 < 2.0 || self.ratio.is_nan() || self.ratio <= 1.0 {
            return Err(OracleError::Unsupported("need t₀ ≥ 2 and ρ > 1".into()));
        }
        Ok(())
    }

    pub fn lambdas(&self) -> Vec<Complex64> {
        let dir = Complex64::from_polar(1.0, self.theta);
        (0..self.count)
            .map(|i| -dir * (self.t0 * self.ratio.powi(i as i32)))
            .collect()
    }

    /// Evaluate `f` at every ladder point, in order.
    pub fn sample<F>(&self, mut f: F) -> Result<Vec<Sample>>
    where
        F: FnMut(Complex64) -> Result<Complex64>,
    {
        self.validate()?;
        self.lambdas()
            .into_iter()
            .map(|lambda| {
                Ok(Sample {
                    lambda,
                    value: f(lambda)?,
                })
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    /// condition estimate of the scaled design matrix above which the fit is inconclusive
    pub condition_threshold: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            condition_threshold: 1e15,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitStatus {
    Ok,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitRow {
    pub exponent: String,
    #[serde(skip)]
    pub degree: Degree,
    pub log_power: u32,
    pub fitted: f64,
    pub symbolic: Option<f64>,
    pub rel_error: Option<f64>,
    pub verdict: Option<Verdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub status: FitStatus,
    pub samples: usize,
    pub condition: f64,
    pub residual: f64,
    pub rows: Vec<FitRow>,
}

impl FitReport {
    pub fn coefficient(&self, exponent: Degree, log_power: u32) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.degree == exponent && r.log_power == log_power)
            .map(|r| r.fitted)
    }

    /// Fill the comparison columns against `reference` for slots with exponent ≥ `min_exponent`.
    /// A zero reference coefficient is measured against the largest compared magnitude.
    pub fn compare_with(
        &mut self,
        reference: &AsymptoticExpansion,
        min_exponent: Degree,
        tol: f64,
    ) {
        let sym: Vec<Option<f64>> = self
            .rows
            .iter()
            .map(|r| {
                (r.degree >= min_exponent)
                    .then(|| reference.coefficient(r.degree, r.log_power).to_f64())
            })
            .collect();
        let scale = sym.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        for (row, s) in self.rows.iter_mut().zip(sym) {
            match s {
                None => {
                    row.symbolic = None;
                    row.rel_error = None;
                    row.verdict = Some(Verdict::Skipped);
                }
                Some(v) => {
                    let denom = if v != 0.0 { v.abs() } else { scale };
                    let err = (row.fitted - v).abs() / denom;
                    row.symbolic = Some(v);
                    row.rel_error = Some(err);
                    row.verdict = Some(if self.status == FitStatus::Inconclusive {
                        Verdict::Inconclusive
                    } else if err <= tol {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    });
                }
            }
        }
    }

    /// True when the fit is conclusive and every compared row passes.
    pub fn passed(&self) -> bool {
        self.status == FitStatus::Ok
            && self.rows.iter().all(|r| {
                matches!(
                    r.verdict,
                    None | Some(Verdict::Pass) | Some(Verdict::Skipped)
                )
            })
    }

    pub fn max_rel_error(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.rel_error)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("exponent,log_power,fitted,symbolic,rel_error,verdict\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.rows {
            let verdict = match r.verdict {
                Some(Verdict::Pass) => "pass",
                Some(Verdict::Fail) => "fail",
                Some(Verdict::Skipped) => "skipped",
                Some(Verdict::Inconclusive) => "inconclusive",
                None => "",
            };
            let _ = writeln!(
                out,
                "{},{},{:e},{},{},{}",
                r.exponent,
                r.log_power,
                r.fitted,
                opt(r.symbolic),
                opt(r.rel_error),
                verdict
            );
        }
        out
    }
}

/// Weighted least squares of the samples against the ladder basis.
///
/// Real and imaginary parts are stacked so the coefficients come out real;
/// rows are weighted by 1/|value| and columns scaled to unit norm before the SVD.
pub fn fit_expansion(samples: &[Sample], ladder: &[Slot], opts: &FitOptions) -> Result<FitReport> {
    let l = ladder.len();
    if l == 0 {
        return Err(OracleError::Ladder("empty ladder".into()));
    }
    let distinct: BTreeSet<_> = ladder.iter().collect();
    if distinct.len() != l {
        return Err(OracleError::Ladder("ladder slots must be distinct".into()));
    }
    if samples.len() < l + 2 {
        return Err(OracleError::Ladder(format!(
            "{} samples for {} slots; need at least {}",
            samples.len(),
            l,
            l + 2
        )));
    }
    let rows = 2 * samples.len();
    let mut a = DMatrix::<f64>::zeros(rows, l);
    let mut b = DVector::<f64>::zeros(rows);
    for (i, s) in samples.iter().enumerate() {
        let w = 1.0 / s.value.norm().max(f64::MIN_POSITIVE);
        let z = -s.lambda;
        for (j, slot) in ladder.iter().enumerate() {
            let v = slot.basis(z) * w;
            a[(2 * i, j)] = v.re;
            a[(2 * i + 1, j)] = v.im;
        }
        b[2 * i] = s.value.re * w;
        b[2 * i + 1] = s.value.im * w;
    }
    let mut scales = Vec::with_capacity(l);
    for j in 0..l {
        let norm = a.column(j).norm();
        let c = if norm > 0.0 { 1.0 / norm } else { 1.0 };
        a.column_mut(j).scale_mut(c);
        scales.push(c);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    let x = svd
        .solve(&b, smax * f64::EPSILON * rows as f64)
        .map_err(|e| OracleError::Ladder(e.to_string()))?;
    let residual = (&a * &x - &b).norm() / b.norm().max(f64::MIN_POSITIVE);
    let status = if condition.is_finite() && condition <= opts.condition_threshold {
        FitStatus::Ok
    } else {
        FitStatus::Inconclusive
    };
    let rows = ladder
        .iter()
        .zip(x.iter().zip(&scales))
        .map(|(slot, (&v, &c))| FitRow {
            exponent: slot.exponent.to_string(),
            degree: slot.exponent,
            log_power: slot.log_power,
            fitted: v * c,
            symbolic: None,
            rel_error: None,
            verdict: None,
        })
        .collect();
    Ok(FitReport {
        status,
        samples: samples.len(),
        condition,
        residual,
        rows,
    })
}

/// Exponent ladder of tr a(P − λ)^{−N} for the model operator |ξ|^m + 1, read
/// off the degrees of `a` alone: powers s/m − N − j for s = d + n with s/m ∉ ℤ,
/// integers −N − k, and log terms from −N − k₀ on whenever s = −m k₀.
/// Slots below −N − depth are dropped; terms with zero trace moment are skipped.
pub fn model_ladder(a: &ClassicalSymbol, m: u32, big_n: u32, depth: u32) -> Vec<Slot> {
    let n = a.dimension() as i64;
    let md = deg(m as i64);
    let top = -deg(big_n as i64);
    let floor = top - deg(depth as i64);
    let mut slots = BTreeSet::new();
    let mut k = 0;
    while top - deg(k) >= floor {
        slots.insert(Slot::new(top - deg(k), 0));
        k += 1;
    }
    for t in a.terms() {
        if t.angular.trace_moment().is_exact_zero() {
            continue;
        }
        let ratio = (t.degree + deg(n)) / md;
        if ratio.is_integer() {
            let k0 = (-ratio).to_integer();
            let mut e = top - deg(k0);
            while e >= floor {
                slots.insert(Slot::new(e, 1));
                e -= deg(1);
            }
        } else {
            let mut e = ratio + top;
            while e >= floor {
                slots.insert(Slot::new(e, 0));
                e -= deg(1);
            }
        }
    }
    slots.into_iter().rev().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadiusFit {
    pub constant: f64,
    pub log_coefficient: f64,
    pub condition: f64,
    pub residual: f64,
}

/// Constant term of ∫_{|ξ|≤R} tr a đξ as R → ∞, fitted on R = 2^i, i = 1..=samples.
pub fn fit_radius_constant(a: &ClassicalSymbol, samples: usize) -> Result<RadiusFit> {
    let n = a.dimension();
    let norm = (2.0 * std::f64::consts::PI).powi(-(n as i32));
    let terms: Vec<(f64, f64, f64)> = a
        .terms()
        .iter()
        .map(|t| {
            (
                to_f64(t.degree) + n as f64,
                t.extension as f64,
                t.angular.trace_moment().to_f64() * norm,
            )
        })
        .filter(|t| t.2 != 0.0)
        .collect();
    // basis: R^s for every s ≠ 0, log R if some s = 0, and the constant
    let mut powers: Vec<f64> = terms.iter().map(|t| t.0).filter(|&s| s != 0.0).collect();
    powers.sort_by(|x, y| y.partial_cmp(x).unwrap());
    powers.dedup();
    let has_log = terms.iter().any(|t| t.0 == 0.0);
    let cols = powers.len() + usize::from(has_log) + 1;
    if samples < cols + 2 {
        return Err(OracleError::Ladder(format!(
            "{samples} radii for {cols} basis functions"
        )));
    }
    let mut a_mat = DMatrix::<f64>::zeros(samples, cols);
    let mut b = DVector::<f64>::zeros(samples);
    for i in 0..samples {
        let r = 2f64.powi(i as i32 + 1);
        let mut v = 0.0;
        for &(s, k, w) in &terms {
            let inner = tanh_sinh(
                |x| Complex64::new(x.powf(s + k - 1.0), 0.0),
                0.0,
                1.0,
                1e-14,
            )?;
            let outer = tanh_sinh(|x| Complex64::new(x.powf(s - 1.0), 0.0), 1.0, r, 1e-14)?;
            v += w * (inner.value.re + outer.value.re);
        }
        let wt = 1.0 / v.abs().max(1.0);
        for (j, &s) in powers.iter().enumerate() {
            a_mat[(i, j)] = r.powf(s) * wt;
        }
        if has_log {
            a_mat[(i, powers.len())] = r.ln() * wt;
        }
        a_mat[(i, cols - 1)] = wt;
        b[i] = v * wt;
    }
    let mut scales = Vec::with_capacity(cols);
    for j in 0..cols {
        let c = 1.0 / a_mat.column(j).norm();
        a_mat.column_mut(j).scale_mut(c);
        scales.push(c);
    }
    let svd = a_mat.clone().svd(true, true);
    let condition = svd.singular_values.max() / svd.singular_values.min();
    if !condition.is_finite() || condition > 1e13 {
        return Err(OracleError::IllConditioned {
            condition,
            threshold: 1e13,
        });
    }
    let x = svd
        .solve(&b, f64::EPSILON)
        .map_err(|e| OracleError::Ladder(e.to_string()))?;
    let residual = (&a_mat * &x - &b).norm();
    Ok(RadiusFit {
        constant: x[cols - 1] * scales[cols - 1],
        log_coefficient: if has_log {
            x[powers.len()] * scales[powers.len()]
        } else {
            0.0
        },
        condition,
        residual,
    })
}
