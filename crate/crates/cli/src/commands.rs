//! One function per subcommand; each returns the report in every format.

use std::fmt::Write as _;

use serde_json::{json, Value};
use tracecoef_core::densities::{density_report, finite_part, residue0_log, residue_density};
use tracecoef_core::laurent::{resolvent_to_zeta_full, zeta_regular_value, zeta_residue_at_zero};
use tracecoef_core::parse::parse_symbol;
use tracecoef_core::resolvent::{
    c0, difference_coefficient, log_truncation, model_operator, model_trace_expansion, trace_defect,
};
use tracecoef_core::symbol::{deg, series_log};
use tracecoef_core::{ClassicalSymbol, ScalarValue};
use tracecoef_oracle::{
    fit_expansion, model_ladder, numeric_trace, FitOptions, QuadOptions, RaySampler,
};

use crate::config::{Command, Format, LadderSpec, RunConfig};
use crate::error::CliError;
use crate::suite::{run_suite, SuiteOptions};

/// A finished report. `ok` is false only when `verify` has failing criteria.
#[derive(Clone, Debug)]
pub struct Output {
    pub json: Value,
    pub csv: String,
    pub pretty: String,
    pub ok: bool,
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.csv.clone(),
            Format::Pretty => self.pretty.clone(),
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Output, CliError> {
    match cfg.command {
        Command::Fp => cmd_fp(cfg),
        Command::Res => cmd_res(cfg),
        Command::Logsym => cmd_logsym(cfg),
        Command::Expand => cmd_expand(cfg),
        Command::C0 => cmd_c0(cfg),
        Command::Defect => cmd_defect(cfg),
        Command::Fit => cmd_fit(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}

fn symbol_arg(
    cfg: &RunConfig,
    text: Option<&String>,
    what: &'static str,
) -> Result<ClassicalSymbol, CliError> {
    let n = cfg.dimension()?;
    let text =
        text.ok_or_else(|| CliError::Usage(format!("{} needs {what}", cfg.command.name())))?;
    parse_symbol(text, n, cfg.matrix_size).map_err(|source| CliError::Symbol { what, source })
}

fn a_arg(cfg: &RunConfig) -> Result<ClassicalSymbol, CliError> {
    symbol_arg(cfg, cfg.symbol.as_ref(), "--symbol")
}

/// --p, or the model operator |ξ|^m + 1 when absent.
fn p_or_model(cfg: &RunConfig) -> Result<ClassicalSymbol, CliError> {
    match &cfg.p {
        Some(_) => symbol_arg(cfg, cfg.p.as_ref(), "--p"),
        None => {
            let model = model_operator(cfg.dimension()?, cfg.m);
            if cfg.matrix_size == 1 {
                Ok(model)
            } else {
                Err(CliError::Usage(
                    "matrix-valued runs need an explicit --p".into(),
                ))
            }
        }
    }
}

fn scalar_cell(v: &ScalarValue) -> String {
    format!("\"{v}\",{:e}", v.to_f64())
}

fn scalar_line(label: &str, v: &ScalarValue) -> String {
    format!("{label} = {v}  (≈ {:.15e})\n", v.to_f64())
}

fn single_value(command: &str, label: &str, v: &ScalarValue, mut json: Value) -> Output {
    json["command"] = json!(command);
    json["value"] = json!(v);
    Output {
        json,
        csv: format!("quantity,value,approx\n{label},{}\n", scalar_cell(v)),
        pretty: scalar_line(label, v),
        ok: true,
    }
}

pub fn cmd_fp(cfg: &RunConfig) -> Result<Output, CliError> {
    let a = a_arg(cfg)?;
    let report = density_report(&a, None)?;
    let mut csv = String::from("degree,branch,extension,value,approx\n");
    let mut pretty = scalar_line("TR_x", &report.tr_x);
    for t in &report.terms {
        let branch = serde_json::to_value(t.branch).unwrap();
        let branch = branch.as_str().unwrap_or("");
        let _ = writeln!(
            csv,
            "{},{branch},{},{}",
            t.degree,
            t.extension,
            scalar_cell(&t.value)
        );
        let _ = writeln!(
            pretty,
            "  degree {:>6} ({branch}, K = {}): {}",
            t.degree.to_string(),
            t.extension,
            t.value
        );
    }
    let json = json!({
        "command": "fp",
        "symbol": cfg.symbol,
        "n": report.n,
        "M": report.matrix_size,
        "order": report.order.to_string(),
        "value": report.tr_x,
        "residue": report.res_x,
        "parity": report.parity,
        "terms": report.terms,
    });
    Ok(Output {
        json,
        csv,
        pretty,
        ok: true,
    })
}

pub fn cmd_res(cfg: &RunConfig) -> Result<Output, CliError> {
    let a = a_arg(cfg)?;
    let res = residue_density(&a);
    let log_res = match &cfg.p {
        Some(_) => {
            let p = symbol_arg(cfg, cfg.p.as_ref(), "--p")?;
            let j = cfg.truncation.unwrap_or_else(|| log_truncation(&a));
            let logp = series_log(&p, j, cfg.precision)?;
            Some(residue0_log(&a, &logp)?)
        }
        None => None,
    };
    let mut out = single_value(
        "res",
        "res_x",
        &res,
        json!({ "symbol": cfg.symbol, "n": a.dimension(), "order": a.order().to_string() }),
    );
    out.json["log_residue"] = json!(log_res);
    if let Some(v) = &log_res {
        let _ = writeln!(out.csv, "res_x0_log,{}", scalar_cell(v));
        out.pretty.push_str(&scalar_line("res_x,0(a log p)", v));
    }
    Ok(out)
}

pub fn cmd_logsym(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = symbol_arg(cfg, cfg.p.as_ref(), "--p")?;
    let j = cfg.truncation.unwrap_or(3);
    let logp = series_log(&p, j, cfg.precision)?;
    let rows = logp.rows();
    let mut csv = String::from("degree,log_power,angular,weighted\n");
    let mut pretty = format!("log p, truncated below degree {}\n", logp.truncation());
    for r in &rows {
        let weighted: Vec<String> = r
            .weighted
            .iter()
            .map(|(w, q)| format!("({w})*({q})"))
            .collect();
        let _ = writeln!(
            csv,
            "{},{},\"{}\",\"{}\"",
            r.degree,
            r.log_power,
            r.angular,
            weighted.join(" + ")
        );
        let _ = writeln!(
            pretty,
            "  degree {:>6}, log^{}: {} {}",
            r.degree,
            r.log_power,
            r.angular,
            weighted.join(" + ")
        );
    }
    let json = json!({
        "command": "logsym",
        "p": cfg.p,
        "n": p.dimension(),
        "J": j,
        "order": logp.order().to_string(),
        "truncation": logp.truncation().to_string(),
        "rows": rows,
    });
    Ok(Output {
        json,
        csv,
        pretty,
        ok: true,
    })
}

pub fn cmd_expand(cfg: &RunConfig) -> Result<Output, CliError> {
    let a = a_arg(cfg)?;
    let e = model_trace_expansion(&a, cfg.m, cfg.power, cfg.floor, cfg.precision)?;
    let zeta = resolvent_to_zeta_full(&e, cfg.precision)?;
    let regular = zeta_regular_value(&zeta);
    let residue = zeta_residue_at_zero(&zeta);
    let rows = e.rows();
    let mut csv = String::from("exponent,log_power,value,approx,provenance\n");
    let mut pretty = format!(
        "tr a(|D|^{} + 1 − λ)^(−{}) ~ Σ c (−λ)^e log(−λ)^l\n",
        cfg.m, cfg.power
    );
    for r in &rows {
        let prov: Vec<String> = r
            .provenance
            .iter()
            .map(|p| {
                serde_json::to_value(p)
                    .unwrap()
                    .as_str()
                    .unwrap_or("")
                    .to_string()
            })
            .collect();
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            r.exponent,
            r.log_power,
            scalar_cell(&r.value),
            prov.join(";")
        );
        let _ = writeln!(
            pretty,
            "  e = {:>6}, l = {}: {}",
            r.exponent, r.log_power, r.value
        );
    }
    pretty.push_str(&scalar_line("zeta regular value at 0", &regular));
    pretty.push_str(&scalar_line("zeta residue at 0", &residue));
    let json = json!({
        "command": "expand",
        "symbol": cfg.symbol,
        "n": a.dimension(),
        "m": cfg.m,
        "N": cfg.power,
        "floor": e.floor().to_string(),
        "rows": rows,
        "zeta_regular_value": regular,
        "zeta_residue": residue,
    });
    Ok(Output {
        json,
        csv,
        pretty,
        ok: true,
    })
}

pub fn cmd_c0(cfg: &RunConfig) -> Result<Output, CliError> {
    let a = a_arg(cfg)?;
    let p = p_or_model(cfg)?;
    let v = c0(&a, &p, cfg.precision)?;
    let fp = finite_part(&a);
    let mut out = single_value(
        "c0",
        "C0",
        &v,
        json!({ "symbol": cfg.symbol, "n": a.dimension() }),
    );
    out.json["p"] = json!(cfg
        .p
        .clone()
        .unwrap_or_else(|| format!("|xi|^{}; 1", cfg.m)));
    out.json["finite_part"] = json!(fp);
    let _ = writeln!(out.csv, "finite_part,{}", scalar_cell(&fp));
    out.pretty.push_str(&scalar_line("TR_x", &fp));
    Ok(out)
}

pub fn cmd_defect(cfg: &RunConfig) -> Result<Output, CliError> {
    let a = a_arg(cfg)?;
    let p = symbol_arg(cfg, cfg.p.as_ref(), "--p")?;
    let p2 = symbol_arg(cfg, cfg.p2.as_ref(), "--p2")?;
    let v = trace_defect(&a, &p, &p2, cfg.precision)?;
    let diff = if p.order() == p2.order() {
        Some(difference_coefficient(
            &a,
            &p,
            &p2,
            cfg.power,
            cfg.precision,
        )?)
    } else {
        None
    };
    let mut out = single_value(
        "defect",
        "C0(a,p) - C0(a,p2)",
        &v,
        json!({ "symbol": cfg.symbol, "n": a.dimension() }),
    );
    out.json["difference_coefficient"] = json!(diff);
    out.json["N"] = json!(cfg.power);
    if let Some(d) = &diff {
        let _ = writeln!(out.csv, "difference_coefficient,{}", scalar_cell(d));
        out.pretty
            .push_str(&scalar_line("resolvent difference coefficient", d));
    }
    Ok(out)
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<Output, CliError> {
    let a = a_arg(cfg)?;
    if cfg.matrix_size != 1 {
        return Err(CliError::Usage("fit works with scalar symbols".into()));
    }
    let n = a.dimension();
    let p = model_operator(n, cfg.m);
    let e = model_trace_expansion(&a, cfg.m, cfg.power, None, cfg.precision)?;
    let ladder = match &cfg.ladder {
        LadderSpec::Depth(d) => model_ladder(&a, cfg.m, cfg.power, *d),
        LadderSpec::Slots(s) => s.clone(),
    };
    let mut sampler = RaySampler::for_ladder(cfg.theta, ladder.len());
    sampler.t0 = cfg.t0;
    sampler.ratio = cfg.ratio;
    let quad = QuadOptions::default();
    let samples = sampler.sample(|l| Ok(numeric_trace(&a, &p, cfg.power, l, &quad)?.value))?;
    let mut report = fit_expansion(&samples, &ladder, &FitOptions::default())?;
    report.compare_with(&e, -deg(cfg.power as i64), 1e-6);
    let mut pretty = format!(
        "fit of {} slots from {} samples on θ = {}: {:?}, condition {:.2e}, residual {:.2e}\n",
        ladder.len(),
        report.samples,
        cfg.theta,
        report.status,
        report.condition,
        report.residual
    );
    for r in &report.rows {
        let _ = writeln!(
            pretty,
            "  e = {:>6}, l = {}: fitted {:>+.12e}  symbolic {}  rel {}",
            r.exponent,
            r.log_power,
            r.fitted,
            r.symbolic
                .map(|v| format!("{v:+.12e}"))
                .unwrap_or_else(|| "-".into()),
            r.rel_error
                .map(|v| format!("{v:.1e}"))
                .unwrap_or_else(|| "-".into()),
        );
    }
    let json = json!({
        "command": "fit",
        "symbol": cfg.symbol,
        "n": n,
        "m": cfg.m,
        "N": cfg.power,
        "theta": cfg.theta,
        "t0": sampler.t0,
        "ratio": sampler.ratio,
        "report": report,
    });
    Ok(Output {
        json,
        csv: report.to_csv(),
        pretty,
        ok: true,
    })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Output, CliError> {
    let opts = SuiteOptions {
        only: cfg.only.clone(),
        corrupt_alpha: cfg.corrupt_alpha,
        precision: cfg.precision,
    };
    let report = run_suite(&opts)?;
    let mut csv = String::from("id,key,passed,max_error,tolerance,seconds,budget_seconds,detail\n");
    let mut pretty = String::new();
    for c in &report.criteria {
        let _ = writeln!(
            csv,
            "{},{},{},{:e},{:e},{:.3},{},\"{}\"",
            c.id, c.key, c.passed, c.max_error, c.tolerance, c.seconds, c.budget_seconds, c.detail
        );
        pretty.push_str(&c.line());
        pretty.push('\n');
    }
    let _ = writeln!(
        pretty,
        "{}",
        if report.passed {
            "all criteria passed"
        } else {
            "FAILED"
        }
    );
    Ok(Output {
        json: serde_json::to_value(&report).expect("suite report serializes"),
        csv,
        pretty,
        ok: report.passed,
    })
}
