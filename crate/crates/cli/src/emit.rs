use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::field::FieldFrame;
use crate::series::{MetricEntry, PointSeries, WitnessRun};

/// Everything one command produced, with the config that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFile {
    pub command: String,
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frames: Vec<FieldFrame>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<PointSeries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessRun>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metrics: Vec<MetricEntry>,
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Io { path: path.to_path_buf(), source: e.into() }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, bytes).map_err(io_err(path))
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.into_error() })?;
    write_file(path, &bytes)
}

/// Columns `axis1,axis2,value,mask`; masked cells have an empty value.
pub fn emit_csv(frame: &FieldFrame, path: &Path) -> Result<()> {
    let rows = (0..frame.rows()).flat_map(|j| {
        (0..frame.cols()).map(move |i| {
            vec![
                format_f64(frame.axis1[i]),
                format_f64(frame.axis2[j]),
                opt(frame.value(i, j)),
                frame.mask(i, j).map(|m| m.name().to_string()).unwrap_or_default(),
            ]
        })
    });
    write_rows(path, &["axis1", "axis2", "value", "mask"], rows)
}

pub fn emit_json(run: &RunFile, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(run).expect("run files serialize");
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn read_json(path: &Path) -> Result<RunFile> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Schema { path: path.display().to_string(), message: e.to_string() })
}

pub fn emit_series_csv(series: &[PointSeries], path: &Path) -> Result<()> {
    let rows = series.iter().enumerate().flat_map(|(k, s)| {
        s.records.iter().map(move |r| {
            vec![
                k.to_string(),
                format_f64(s.n0[0]),
                format_f64(s.n0[1]),
                format_f64(s.n0[2]),
                format_f64(r.t),
                serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
                opt(r.gamma.first().copied().flatten()),
                opt(r.idqs),
                opt(r.idf),
                opt(r.ridf),
            ]
        })
    });
    write_rows(path, &["point", "n1", "n2", "n3", "t", "status", "gamma", "idqs", "idf", "ridf"], rows)
}

pub fn emit_witness_csv(run: &WitnessRun, path: &Path) -> Result<()> {
    let mut rows = Vec::new();
    for (c, r) in run.rates.iter().enumerate() {
        for iv in &r.intervals {
            let sign =
                serde_json::to_value(iv.sign).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
            rows.push(vec![format!("rate_{c}"), String::new(), sign, format_f64(iv.start), format_f64(iv.end)]);
        }
    }
    for (k, p) in run.points.iter().enumerate() {
        for iv in &p.backflow.intervals {
            rows.push(vec!["idf".into(), k.to_string(), "positive".into(), format_f64(iv.start), format_f64(iv.end)]);
        }
    }
    write_rows(path, &["witness", "point", "sign", "start", "end"], rows)
}

pub fn emit_metrics_csv(entries: &[MetricEntry], path: &Path) -> Result<()> {
    let rows = entries.iter().map(|e| {
        let mut row = vec![format_f64(e.n0[0]), format_f64(e.n0[1]), format_f64(e.n0[2]), format_f64(e.t), opt(e.idqs)];
        for i in 0..3 {
            for j in 0..3 {
                row.push(opt(e.g.as_ref().map(|g| g[i][j])));
            }
        }
        row
    });
    let header = ["n1", "n2", "n3", "t", "idqs", "g11", "g12", "g13", "g21", "g22", "g23", "g31", "g32", "g33"];
    write_rows(path, &header, rows)
}

/// File stem of a frame, e.g. `idf_t0.5`.
pub fn frame_stem(frame: &FieldFrame) -> String {
    format!("{}_t{}", frame.field.name(), format_f64(frame.t))
}

pub fn frame_path(dir: &Path, frame: &FieldFrame, ext: &str) -> PathBuf {
    dir.join(format!("{}.{ext}", frame_stem(frame)))
}
