//! CSV and JSON report writers, plus the weight-matrix dump format.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::circuit::{Sign, WeightLevel};
use crate::error::{Error, Result};
use crate::experiments::{Implementation, NoiseWindow, SweepReport};
use crate::montecarlo::{iqr_separation, McReport};
use crate::network::{HardwareNetwork, WeightMatrix};
use crate::stats::UTestResult;

fn signed_level(l: WeightLevel) -> String {
    match l.sign {
        Sign::Positive => format!("+{}", l.level()),
        Sign::Negative => format!("-{}", l.level()),
    }
}

fn sign_str(s: Sign) -> &'static str {
    match s {
        Sign::Positive => "positive",
        Sign::Negative => "negative",
    }
}

/// `level,sign,sample_index,fraction`, one row per Monte Carlo sample.
pub fn write_mc_samples<W: Write>(out: W, report: &McReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["level", "sign", "sample_index", "fraction"])?;
    for stats in &report.levels {
        let level = stats.level.level().to_string();
        for (i, f) in stats.samples.iter().enumerate() {
            w.write_record([level.as_str(), sign_str(stats.level.sign), &i.to_string(), &f.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<mc samples>", e))
}

/// Quartile summary per level; `iqr_gap_to_next` is empty on the last row.
pub fn write_mc_summary<W: Write>(out: W, report: &McReport) -> Result<()> {
    let gaps = iqr_separation(report);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["level", "sign", "q1", "median", "q3", "min", "max", "iqr_gap_to_next"])?;
    for (k, s) in report.levels.iter().enumerate() {
        w.write_record([
            s.level.level().to_string(),
            sign_str(s.level.sign).to_string(),
            s.q1.to_string(),
            s.median.to_string(),
            s.q3.to_string(),
            s.min.to_string(),
            s.max.to_string(),
            gaps.get(k).map(f64::to_string).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<mc summary>", e))
}

pub fn write_sweep<W: Write>(out: W, report: &SweepReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "implementation",
        "pattern",
        "noise_rate",
        "recall_rate",
        "trials",
        "successes",
        "converged",
        "two_cycle",
        "mean_iterations",
    ])?;
    for c in &report.cells {
        w.write_record([
            c.implementation.as_str().to_string(),
            c.pattern.to_string(),
            c.noise_rate.to_string(),
            c.recall_rate().to_string(),
            c.trials.to_string(),
            c.successes.to_string(),
            c.converged.to_string(),
            c.two_cycle.to_string(),
            (c.total_iterations as f64 / c.trials as f64).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<sweep>", e))
}

/// `pattern,noise_rate,delta` with delta = hardware minus software.
pub fn write_delta<W: Write>(out: W, report: &SweepReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["pattern", "noise_rate", "delta"])?;
    for d in report.delta() {
        w.write_record([d.pattern.to_string(), d.noise_rate.to_string(), d.delta.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<delta>", e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSummary {
    pub window: NoiseWindow,
    pub test: UTestResult,
    pub mean_recall_software: f64,
    pub mean_recall_hardware: f64,
    pub max_abs_delta: f64,
    pub significant_at_0_05: bool,
}

impl ComparisonSummary {
    pub fn new(report: &SweepReport, window: NoiseWindow, test: UTestResult) -> Self {
        let mean = |imp| {
            let v: Vec<f64> = report
                .cells
                .iter()
                .filter(|c| c.implementation == imp)
                .map(|c| c.recall_rate())
                .collect();
            v.iter().sum::<f64>() / v.len().max(1) as f64
        };
        let max_abs_delta = report.delta().iter().map(|d| d.delta.abs()).fold(0.0, f64::max);
        Self {
            window,
            significant_at_0_05: test.p_value <= 0.05,
            test,
            mean_recall_software: mean(Implementation::Software),
            mean_recall_hardware: mean(Implementation::Hardware),
            max_abs_delta,
        }
    }
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n").map_err(|e| Error::io("<json>", e))
}

/// Header `n=..,m=..,zero_diagonal=..`, then `n` comma-separated rows.
pub fn write_weight_matrix<W: Write>(mut out: W, w: &WeightMatrix) -> Result<()> {
    let mut text = format!("n={},m={},zero_diagonal={}\n", w.n(), w.m(), w.zero_diagonal());
    for i in 0..w.n() {
        let row: Vec<String> = w.row(i).iter().map(i32::to_string).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<weights>", e))
}

pub fn parse_weight_matrix(text: &str, source: &str) -> Result<WeightMatrix> {
    let err = |line: usize, reason: String| Error::Parse {
        path: source.to_string(),
        line,
        reason,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| err(1, "empty weight file".into()))?;
    let (mut n, mut m, mut zd) = (None, None, None);
    for field in header.split(',') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| err(1, format!("malformed header field {field:?}")))?;
        let bad = |_| err(1, format!("bad value for {key}: {value:?}"));
        match key.trim() {
            "n" => n = Some(value.trim().parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "m" => m = Some(value.trim().parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "zero_diagonal" => zd = Some(value.trim().parse::<bool>().map_err(|e| bad(e.to_string()))?),
            other => return Err(err(1, format!("unknown header key {other:?}"))),
        }
    }
    let (Some(n), Some(m), Some(zd)) = (n, m, zd) else {
        return Err(err(1, "header needs n, m and zero_diagonal".into()));
    };
    let mut w = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = k + 2;
        let before = w.len();
        for cell in line.split(',') {
            w.push(
                cell.trim()
                    .parse::<i32>()
                    .map_err(|_| err(lineno, format!("not an integer: {cell:?}")))?,
            );
        }
        if w.len() - before != n {
            return Err(err(lineno, format!("row has {} entries, expected {n}", w.len() - before)));
        }
        rows += 1;
    }
    if rows != n {
        return Err(err(rows + 2, format!("found {rows} rows, expected {n}")));
    }
    WeightMatrix::from_parts(n, m, zd, w)
}

pub fn load_weight_matrix(path: impl AsRef<Path>) -> Result<WeightMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_weight_matrix(&text, &path.display().to_string())
}

/// `i,j,connected,sign,level,fraction` for every synapse, as read back
/// from the programmed devices.
pub fn write_hardware_dump<W: Write>(out: W, net: &HardwareNetwork) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "connected", "sign", "level", "fraction"])?;
    for i in 0..net.n() {
        for j in 0..net.n() {
            let syn = net.synapse(i, j);
            let (sign, level) = if net.is_connected(i, j) {
                let read = syn
                    .read_level()
                    .map(signed_level)
                    .unwrap_or_else(|| "?".into());
                let sign = if syn.read_sign() { "negative" } else { "positive" };
                (sign.to_string(), read)
            } else {
                (String::new(), String::new())
            };
            w.write_record([
                i.to_string(),
                j.to_string(),
                net.is_connected(i, j).to_string(),
                sign,
                level,
                syn.divider_fraction().to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<hardware dump>", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{run_weight_mc, McConfig};
    use crate::network::{quantize, train, HardwareConfig, Pattern};

    fn weights() -> WeightMatrix {
        let p = [
            Pattern::new(vec![1, -1, 1, -1]).unwrap(),
            Pattern::new(vec![1, 1, -1, -1]).unwrap(),
        ];
        train(&p, true).unwrap()
    }

    #[test]
    fn weight_matrix_roundtrip() {
        let w = weights();
        let mut buf = Vec::new();
        write_weight_matrix(&mut buf, &w).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n=4,m=2,zero_diagonal=true\n0,"));
        assert_eq!(parse_weight_matrix(&text, "w").unwrap(), w);
    }

    #[test]
    fn weight_matrix_errors() {
        assert!(parse_weight_matrix("", "w").is_err());
        assert!(parse_weight_matrix("n=2,m=1\n0,1\n1,0\n", "w").is_err());
        assert!(parse_weight_matrix("n=2,m=1,zero_diagonal=true\n0,1\n", "w").is_err());
        assert!(matches!(
            parse_weight_matrix("n=2,m=1,zero_diagonal=true\n0,1\n1,x\n", "w"),
            Err(Error::Parse { line: 3, .. })
        ));
        // asymmetric
        assert!(parse_weight_matrix("n=2,m=1,zero_diagonal=true\n0,1\n-1,0\n", "w").is_err());
    }

    #[test]
    fn hardware_dump_rows() {
        let net = quantize(&weights(), &HardwareConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_hardware_dump(&mut buf, &net).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i,j,connected,sign,level,fraction");
        assert_eq!(lines.len(), 17);
        assert!(lines[1].starts_with("0,0,false,,,"));
    }

    #[test]
    fn mc_csvs() {
        let report = run_weight_mc(&McConfig {
            n_samples: 3,
            ..Default::default()
        })
        .unwrap();
        let mut samples = Vec::new();
        write_mc_samples(&mut samples, &report).unwrap();
        assert_eq!(String::from_utf8(samples).unwrap().lines().count(), 16);
        let mut summary = Vec::new();
        write_mc_summary(&mut summary, &report).unwrap();
        let text = String::from_utf8(summary).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().last().unwrap().ends_with(','));
    }
}
