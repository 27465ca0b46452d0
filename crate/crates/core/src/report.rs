//! Plot-ready result tables (CSV or JSON), one row per case.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::CaseStats;

pub const CSV_HEADER: [&str; 16] = [
    "case",
    "dimension",
    "fault_count",
    "router",
    "runs",
    "seed",
    "delivered",
    "undeliverable",
    "hop_limit",
    "unreachable",
    "mpl",
    "fault_free_mpl",
    "pl_over_mpl",
    "mean_iterations",
    "max_iterations",
    "fallbacks",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

/// One output row. Floats are already rounded to the emitted precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRow {
    pub case: usize,
    pub dimension: u32,
    pub fault_count: usize,
    pub router: String,
    pub runs: usize,
    pub seed: u64,
    pub delivered: u64,
    pub undeliverable: u64,
    pub hop_limit: u64,
    pub unreachable: u64,
    pub mpl: Option<f64>,
    pub fault_free_mpl: f64,
    pub pl_over_mpl: Option<f64>,
    pub mean_iterations: Option<f64>,
    pub max_iterations: Option<u32>,
    pub fallbacks: Option<u64>,
}

const DECIMALS: usize = 6;

fn render(x: f64) -> String {
    format!("{x:.DECIMALS$}")
}

fn round(x: f64) -> f64 {
    render(x).parse().expect("formatted float parses")
}

impl ResultRow {
    pub fn new(case: usize, s: &CaseStats) -> ResultRow {
        ResultRow {
            case,
            dimension: s.dimension,
            fault_count: s.fault_count,
            router: s.router.name().to_string(),
            runs: s.runs,
            seed: s.seed,
            delivered: s.delivered,
            undeliverable: s.undeliverable,
            hop_limit: s.hop_limit,
            unreachable: s.unreachable,
            mpl: s.mpl.map(round),
            fault_free_mpl: round(s.fault_free_mpl),
            pl_over_mpl: s.pl_over_mpl.map(round),
            mean_iterations: s.mean_iterations.map(round),
            max_iterations: s.max_iterations,
            fallbacks: s.fallbacks,
        }
    }

    fn csv_record(&self) -> [String; 16] {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        [
            self.case.to_string(),
            self.dimension.to_string(),
            self.fault_count.to_string(),
            self.router.clone(),
            self.runs.to_string(),
            self.seed.to_string(),
            self.delivered.to_string(),
            self.undeliverable.to_string(),
            self.hop_limit.to_string(),
            self.unreachable.to_string(),
            self.mpl.map(render).unwrap_or_default(),
            render(self.fault_free_mpl),
            self.pl_over_mpl.map(render).unwrap_or_default(),
            self.mean_iterations.map(render).unwrap_or_default(),
            opt(self.max_iterations),
            opt(self.fallbacks),
        ]
    }
}

pub fn rows(stats: &[CaseStats]) -> Vec<ResultRow> {
    stats
        .iter()
        .enumerate()
        .map(|(i, s)| ResultRow::new(i, s))
        .collect()
}

pub fn write_csv<W: Write>(stats: &[CaseStats], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for row in rows(stats) {
        w.write_record(row.csv_record()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(stats: &[CaseStats], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &rows(stats)).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn render_results(stats: &[CaseStats], format: OutputFormat) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => write_csv(stats, &mut buf)?,
        OutputFormat::Json => write_json(stats, &mut buf)?,
    }
    Ok(buf)
}

/// Writes the table to `path`, or to stdout when `path` is `None`.
pub fn emit_results(stats: &[CaseStats], format: OutputFormat, path: Option<&Path>) -> Result<()> {
    if stats.is_empty() {
        return Err(Error::InvalidParameter {
            name: "stats",
            reason: "nothing to emit".into(),
        });
    }
    let bytes = render_results(stats, format)?;
    match path {
        Some(p) => {
            let mut f = BufWriter::new(
                File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
            );
            f.write_all(&bytes)?;
            f.flush()?;
        }
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

pub fn parse_json(bytes: &[u8]) -> Result<Vec<ResultRow>> {
    serde_json::from_slice(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_case, CaseSpec, RouterKind};

    fn sample() -> Vec<CaseStats> {
        vec![
            run_case(&CaseSpec::new(3, 0, RouterKind::Chiu).with_runs(50)).unwrap(),
            run_case(
                &CaseSpec::new(4, 3, RouterKind::FarHopfield)
                    .with_runs(40)
                    .with_seed(2),
            )
            .unwrap(),
        ]
    }

    #[test]
    fn csv_layout() {
        let out = String::from_utf8(render_results(&sample(), OutputFormat::Csv).unwrap()).unwrap();
        let mut lines = out.lines();
        assert_eq!(
            lines.next().unwrap(),
            "case,dimension,fault_count,router,runs,seed,delivered,undeliverable,hop_limit,unreachable,mpl,fault_free_mpl,pl_over_mpl,mean_iterations,max_iterations,fallbacks"
        );
        let chiu: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(chiu.len(), 16);
        assert_eq!(chiu[3], "chiu");
        assert_eq!(chiu[12], "1.000000");
        assert_eq!(&chiu[13..], &["", "", ""]);
        let far: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(far[3], "far");
        assert!(!far[13].is_empty() && !far[15].is_empty());
        assert!(lines.next().is_none());
    }

    #[test]
    fn json_round_trip() {
        let stats = sample();
        let bytes = render_results(&stats, OutputFormat::Json).unwrap();
        let back = parse_json(&bytes).unwrap();
        assert_eq!(back, rows(&stats));
        assert!(back[0].mean_iterations.is_none());
    }

    #[test]
    fn byte_identical() {
        let a = render_results(&sample(), OutputFormat::Csv).unwrap();
        let b = render_results(&sample(), OutputFormat::Csv).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn emit_to_file_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        emit_results(&sample(), OutputFormat::Csv, Some(&p)).unwrap();
        assert!(std::fs::read_to_string(&p).unwrap().starts_with("case,"));
        assert!(emit_results(&[], OutputFormat::Csv, Some(&p)).is_err());
        let bad = dir.path().join("missing/dir/out.csv");
        assert!(matches!(
            emit_results(&sample(), OutputFormat::Json, Some(&bad)),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn rounding() {
        assert_eq!(render(1.0), "1.000000");
        assert_eq!(render(2.123_456_789), "2.123457");
        assert_eq!(round(2.123_456_789), 2.123457);
    }
}
