use std::path::{Path, PathBuf};

use crate::config::{ExperimentConfig, Format};
use crate::emit::{emit_csv, emit_json, emit_metrics_csv, emit_series_csv, emit_witness_csv, frame_path, RunFile};
use crate::error::Result;
use crate::field::FieldSampler;
use crate::model::Model;
use crate::series::{evolve, metrics, witness};
use crate::svg::write_svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Metric of the initial-state parameterization at each point.
    Qfm,
    /// Flow records along the evolution of each point.
    Evolve,
    /// Snapshot frames over the sampling plane.
    Field,
    /// Backflow and rate-sign interval reports.
    Witness,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Qfm => "qfm",
            Command::Evolve => "evolve",
            Command::Field => "field",
            Command::Witness => "witness",
        }
    }
}

/// Runs one command and writes its outputs into `out`. Returns the written
/// paths in a fixed order.
pub fn run(command: Command, config: &ExperimentConfig, out: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    let model = Model::from_config(config)?;
    let mut run = RunFile {
        command: command.name().to_string(),
        config: config.clone(),
        frames: Vec::new(),
        series: Vec::new(),
        witness: None,
        metrics: Vec::new(),
    };
    let wants = |f: Format| formats.contains(&f);
    let mut written = Vec::new();
    match command {
        Command::Qfm => {
            run.metrics = metrics(config, &model)?;
            if wants(Format::Csv) {
                let p = out.join("qfm.csv");
                emit_metrics_csv(&run.metrics, &p)?;
                written.push(p);
            }
        }
        Command::Evolve => {
            run.series = evolve(config, &model)?;
            if wants(Format::Csv) {
                let p = out.join("evolve.csv");
                emit_series_csv(&run.series, &p)?;
                written.push(p);
            }
        }
        Command::Field => {
            let panels = config.panels();
            let times: Vec<f64> = panels.iter().map(|p| p.t).collect();
            run.frames = FieldSampler::new(config, &times)?.panels(&panels)?;
            for frame in &run.frames {
                if wants(Format::Csv) {
                    let p = frame_path(out, frame, "csv");
                    emit_csv(frame, &p)?;
                    written.push(p);
                }
                if wants(Format::Svg) {
                    let p = frame_path(out, frame, "svg");
                    write_svg(frame, &p)?;
                    written.push(p);
                }
            }
        }
        Command::Witness => {
            run.series = evolve(config, &model)?;
            let report = witness(config, &model, &run.series)?;
            if wants(Format::Csv) {
                let p = out.join("witness.csv");
                emit_witness_csv(&report, &p)?;
                written.push(p);
            }
            run.witness = Some(report);
        }
    }
    if wants(Format::Json) {
        let p = out.join(format!("{}.json", command.name()));
        emit_json(&run, &p)?;
        written.push(p);
    }
    Ok(written)
}
