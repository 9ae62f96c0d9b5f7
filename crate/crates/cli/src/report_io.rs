//! Rendering of evaluation reports as human tables or delimited files.
//! Both formats are printed from the same formatted values.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use evaluation::EvalReport;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Delimited,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "table" => Some(ReportFormat::Table),
            "delimited" => Some(ReportFormat::Delimited),
            _ => None,
        }
    }
}

fn fmt_metric(v: f64) -> String {
    format!("{v:.6}")
}

fn fmt_corr(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.2}"),
        None => "undef".into(),
    }
}

fn fmt_time(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.1}"),
        None => "-".into(),
    }
}

/// The accuracy / correlation / weight-quantile tables as one text page.
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();

    let name_width = report
        .models
        .iter()
        .map(|m| m.model.len())
        .chain(std::iter::once("model".len()))
        .max()
        .unwrap_or(5);
    writeln!(
        out,
        "{:<name_width$}  {:>24}  {:>24}  {:>12}",
        "model", "MSE (+- SE)", "MAE (+- SE)", "fit time (s)"
    )
    .unwrap();
    for m in &report.models {
        let mse = format!("{} (+- {})", fmt_metric(m.mse.value), fmt_metric(m.mse.se));
        let mae = format!("{} (+- {})", fmt_metric(m.mae.value), fmt_metric(m.mae.se));
        writeln!(
            out,
            "{:<name_width$}  {:>24}  {:>24}  {:>12}",
            m.model,
            mse,
            mae,
            fmt_time(m.fit_time_secs)
        )
        .unwrap();
    }

    let corr = &report.error_correlation;
    writeln!(out, "\nerror correlation (out-of-fold residuals)").unwrap();
    let label_width = corr.names().iter().map(String::len).max().unwrap_or(4).max(4);
    write!(out, "{:<label_width$}", "").unwrap();
    for name in corr.names() {
        write!(out, "  {name:>label_width$}").unwrap();
    }
    out.push('\n');
    for (i, name) in corr.names().iter().enumerate() {
        write!(out, "{name:<label_width$}").unwrap();
        for j in 0..corr.k() {
            write!(out, "  {:>label_width$}", fmt_corr(corr.get(i, j))).unwrap();
        }
        out.push('\n');
    }

    if !report.redundancy_pairs.is_empty() {
        writeln!(out, "\nredundant learner pairs (rho >= threshold)").unwrap();
        for pair in &report.redundancy_pairs {
            writeln!(
                out,
                "{} ~ {}: {}",
                corr.names()[pair.i],
                corr.names()[pair.j],
                fmt_corr(Some(pair.rho))
            )
            .unwrap();
        }
    }

    if !report.weight_summaries.is_empty() {
        writeln!(out, "\nweight quantiles (test rows)").unwrap();
        writeln!(
            out,
            "{:<name_width$}  {:<12}  {:>10}  {:>10}  {:>10}  {:>10}  {:>10}  {:>9}",
            "model", "learner", "min", "q25", "median", "q75", "max", "neg frac"
        )
        .unwrap();
        for summary in &report.weight_summaries {
            for lw in &summary.learners {
                writeln!(
                    out,
                    "{:<name_width$}  {:<12}  {:>10}  {:>10}  {:>10}  {:>10}  {:>10}  {:>9.4}",
                    summary.model,
                    lw.learner,
                    fmt_metric(lw.quantiles.min),
                    fmt_metric(lw.quantiles.q25),
                    fmt_metric(lw.quantiles.median),
                    fmt_metric(lw.quantiles.q75),
                    fmt_metric(lw.quantiles.max),
                    summary.negative_fraction,
                )
                .unwrap();
            }
        }
    }
    out
}

fn render_metrics_csv(report: &EvalReport) -> String {
    let mut out = String::from("model,mse,mse_se,mae,mae_se,n,fit_time_secs\n");
    for m in &report.models {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            m.model,
            fmt_metric(m.mse.value),
            fmt_metric(m.mse.se),
            fmt_metric(m.mae.value),
            fmt_metric(m.mae.se),
            m.mse.n,
            fmt_time(m.fit_time_secs),
        )
        .unwrap();
    }
    out
}

fn render_correlation_csv(report: &EvalReport) -> String {
    let corr = &report.error_correlation;
    let mut out = String::from("learner");
    for name in corr.names() {
        write!(out, ",{name}").unwrap();
    }
    out.push('\n');
    for (i, name) in corr.names().iter().enumerate() {
        write!(out, "{name}").unwrap();
        for j in 0..corr.k() {
            write!(out, ",{}", fmt_corr(corr.get(i, j))).unwrap();
        }
        out.push('\n');
    }
    out
}

fn render_weights_csv(report: &EvalReport) -> String {
    let mut out = String::from("model,learner,min,q25,median,q75,max,negative_fraction\n");
    for summary in &report.weight_summaries {
        for lw in &summary.learners {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                summary.model,
                lw.learner,
                fmt_metric(lw.quantiles.min),
                fmt_metric(lw.quantiles.q25),
                fmt_metric(lw.quantiles.median),
                fmt_metric(lw.quantiles.q75),
                fmt_metric(lw.quantiles.max),
                format_args!("{:.4}", summary.negative_fraction),
            )
            .unwrap();
        }
    }
    out
}

/// Writes the report in the chosen format and returns the files created.
pub fn emit_report(
    report: &EvalReport,
    format: ReportFormat,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    match format {
        ReportFormat::Table => {
            let path = out_dir.join("report.txt");
            std::fs::write(&path, render_table(report))?;
            written.push(path);
        }
        ReportFormat::Delimited => {
            for (name, contents) in [
                ("metrics.csv", render_metrics_csv(report)),
                ("correlation.csv", render_correlation_csv(report)),
                ("weights.csv", render_weights_csv(report)),
            ] {
                let path = out_dir.join(name);
                std::fs::write(&path, contents)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
