//! CSV/JSON writers and companion gnuplot scripts.
//!
//! Floats are written with `{}`, the shortest representation that parses
//! back to the same value, so every CSV round-trips exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{SamplingResult, SweepResult};
use crate::trajectory::EnsembleResult;

pub const RESULT_HEADER: &str = "step,time,observable_label,mean,stderr";
pub const SWEEP_HEADER: &str = "gamma_dt,T_qn,T_sa,bound_qn";
pub const SAMPLING_HEADER: &str = "n_realizations,mean_eta,std_eta,mean_stderr";

/// One parsed line of `result.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub step: usize,
    pub time: f64,
    pub label: String,
    pub mean: f64,
    pub stderr: f64,
}

fn csv_label(label: &str) -> String {
    if label.contains([',', '"', '\n']) {
        format!("\"{}\"", label.replace('"', "\"\""))
    } else {
        label.to_string()
    }
}

pub fn result_csv(res: &EnsembleResult) -> String {
    let mut s = String::new();
    s.push_str(RESULT_HEADER);
    s.push('\n');
    for (step, t) in res.times.iter().enumerate() {
        for o in &res.observables {
            let _ = writeln!(
                s,
                "{step},{t},{},{},{}",
                csv_label(&o.label),
                o.mean[step],
                o.stderr[step]
            );
        }
    }
    s
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            '"' => quoted = !quoted,
            ',' if !quoted => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

fn parse_field<T: std::str::FromStr>(v: &str, line: usize, col: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidArgument(format!("line {line}: bad {col} value {v:?}")))
}

pub fn parse_result_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(RESULT_HEADER) {
        return Err(Error::InvalidArgument("missing result.csv header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let n = i + 2;
            let f = split_csv_line(line);
            if f.len() != 5 {
                return Err(Error::InvalidArgument(format!("line {n}: expected 5 fields")));
            }
            Ok(ResultRow {
                step: parse_field(&f[0], n, "step")?,
                time: parse_field(&f[1], n, "time")?,
                label: f[2].clone(),
                mean: parse_field(&f[3], n, "mean")?,
                stderr: parse_field(&f[4], n, "stderr")?,
            })
        })
        .collect()
}

/// Averaged density matrices as `[step][row][col] = [re, im]`.
pub fn rho_steps_json(res: &EnsembleResult) -> Option<String> {
    let rhos = res.rho_mean.as_ref()?;
    let steps: Vec<Vec<Vec<[f64; 2]>>> = rhos
        .iter()
        .map(|m| {
            (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect()
        })
        .collect();
    Some(
        serde_json::to_string_pretty(&json!({
            "times": res.times,
            "rho": steps,
        }))
        .expect("plain data serializes"),
    )
}

pub fn sweep_csv(r: &SweepResult) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for p in &r.points {
        let _ = writeln!(s, "{},{},{},{}", p.gamma_dt, p.t_qn, p.t_sa, p.bound_qn);
    }
    s
}

pub fn sweep_fit_json(r: &SweepResult) -> String {
    serde_json::to_string_pretty(r).expect("plain data serializes")
}

pub fn sampling_csv(r: &SamplingResult) -> String {
    let mut s = format!("{SAMPLING_HEADER}\n");
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            row.n_realizations, row.mean_eta, row.std_eta, row.mean_stderr
        );
    }
    s
}

pub fn sampling_fit_json(r: &SamplingResult) -> String {
    serde_json::to_string_pretty(r).expect("plain data serializes")
}

/// Gnuplot script plotting every observable in `result.csv` against time.
pub fn result_gp(res: &EnsembleResult) -> String {
    let mut s =
        String::from("set datafile separator ','\nset key outside\nset xlabel 'time'\nset ylabel 'expectation'\n");
    s.push_str("set terminal pngcairo size 900,600\nset output 'result.png'\n");
    let n = res.observables.len();
    let plots: Vec<String> = res
        .observables
        .iter()
        .enumerate()
        .map(|(k, o)| {
            format!(
                "'result.csv' every {n}::{} using 2:4:5 with yerrorlines title '{}'",
                k + 1,
                o.label.replace('\'', "")
            )
        })
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

pub fn sweep_gp() -> String {
    "set datafile separator ','\n\
     set logscale xy\n\
     set format xy '10^{%L}'\n\
     set xlabel 'gamma dt'\n\
     set ylabel 'trace distance'\n\
     set key top left\n\
     set terminal pngcairo size 800,600\n\
     set output 'sweep.png'\n\
     plot 'sweep.csv' skip 1 using 1:2 with linespoints title 'QN', \\\n     \
     'sweep.csv' skip 1 using 1:3 with linespoints title 'SA', \\\n     \
     'sweep.csv' skip 1 using 1:4 with lines dashtype 2 title 'QN bound'\n"
        .to_string()
}

pub fn sampling_gp() -> String {
    "set datafile separator ','\n\
     set logscale xy\n\
     set xlabel 'N_r'\n\
     set ylabel 'eta'\n\
     set terminal pngcairo size 800,600\n\
     set output 'sampling.png'\n\
     f(x) = a * x**b\n\
     a = 1; b = -0.5\n\
     fit log(f(x)) 'sampling.csv' skip 1 using 1:(log($2)) via a, b\n\
     plot 'sampling.csv' skip 1 using 1:2:3 with yerrorbars title 'mean eta', f(x) title sprintf('slope %.3f', b)\n"
        .to_string()
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}
