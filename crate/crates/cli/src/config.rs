use serde::{Deserialize, Serialize};

use idflow_core::qubit::{DissipativeModel, Regime};

use crate::error::{CliError, Result};

/// Radius beyond which grid points are treated as pure states.
pub const BOUNDARY_RADIUS: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub grid: GridSpec,
    pub times: TimeSpec,
    /// Initial Bloch vectors for `evolve`, `witness` and `qfm`.
    pub points: Vec<[f64; 3]>,
    /// Snapshot panels for `field`. When absent: `outputs.fields` crossed with
    /// `times.snapshots` if fields are given, else the reference panels that
    /// fall inside the time window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub panels: Option<Vec<Panel>>,
    pub outputs: OutputSpec,
    pub witness: WitnessSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let r0 = 0.9f64.sqrt();
        Self {
            model: ModelSpec::default(),
            grid: GridSpec::default(),
            times: TimeSpec::default(),
            points: vec![[0.0, 0.0, r0], [r0, 0.0, 0.0], [0.0, 0.0, -r0], [0.0, 0.0, 0.0]],
            panels: None,
            outputs: OutputSpec::default(),
            witness: WitnessSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Dissipative(DissipativeSpec),
    Custom(CustomSpec),
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Dissipative(DissipativeSpec::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DissipativeSpec {
    pub lambda: f64,
    #[serde(rename = "W", alias = "w")]
    pub coupling: f64,
}

impl Default for DissipativeSpec {
    fn default() -> Self {
        Self { lambda: 1.0, coupling: 3.0 }
    }
}

/// Qubit master equation given explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<MatrixSpec>,
    #[serde(default)]
    pub channels: Vec<ChannelSpec>,
}

/// Rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixSpec(pub Vec<Vec<[f64; 2]>>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub jump: MatrixSpec,
    pub rate: RateSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RateSpec {
    Constant(f64),
    /// `amplitude * exp(-decay t)`.
    Exponential {
        amplitude: f64,
        decay: f64,
    },
    /// `offset + amplitude * cos(omega t + phase)`.
    Cosine {
        offset: f64,
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Rate of the damped Jaynes-Cummings model.
    Dissipative {
        lambda: f64,
        #[serde(rename = "W", alias = "w")]
        coupling: f64,
    },
    /// Linear interpolation in a sampled table, constant beyond its ends.
    Table {
        t: Vec<f64>,
        gamma: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    N1,
    N2,
    N3,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::N1 => 0,
            Axis::N2 => 1,
            Axis::N3 => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::N1 => "n1",
            Axis::N2 => "n2",
            Axis::N3 => "n3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Horizontal and vertical axis of the sampled plane.
    pub axes: [Axis; 2],
    /// Value of the remaining Bloch coordinate.
    pub fixed: f64,
    pub range1: [f64; 2],
    pub range2: [f64; 2],
    pub resolution: [usize; 2],
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            axes: [Axis::N1, Axis::N3],
            fixed: 0.0,
            range1: [-1.0, 1.0],
            range2: [-1.0, 1.0],
            resolution: [101, 101],
        }
    }
}

impl GridSpec {
    /// Symmetric ranges give exactly mirrored coordinates.
    pub fn coordinates(range: [f64; 2], n: usize) -> Vec<f64> {
        let last = (n - 1) as f64;
        (0..n).map(|i| (range[0] * (last - i as f64) + range[1] * i as f64) / last).collect()
    }

    pub fn axis1(&self) -> Vec<f64> {
        Self::coordinates(self.range1, self.resolution[0])
    }

    pub fn axis2(&self) -> Vec<f64> {
        Self::coordinates(self.range2, self.resolution[1])
    }

    pub fn fixed_axis(&self) -> Axis {
        [Axis::N1, Axis::N2, Axis::N3]
            .into_iter()
            .find(|a| !self.axes.contains(a))
            .expect("two distinct axes leave one free")
    }

    /// Bloch vector of the grid cell `(a, b)`.
    pub fn point(&self, a: f64, b: f64) -> [f64; 3] {
        let mut n = [0.0; 3];
        n[self.axes[0].index()] = a;
        n[self.axes[1].index()] = b;
        n[self.fixed_axis().index()] = self.fixed;
        n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSpec {
    /// End of the time grid; in units of `1/lambda` for the dissipative model.
    pub t_max: f64,
    pub steps: usize,
    pub snapshots: Vec<f64>,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self { t_max: 3.0, steps: 3000, snapshots: vec![0.02, 0.1, 0.5, 1.0] }
    }
}

impl TimeSpec {
    pub fn grid(&self) -> Vec<f64> {
        GridSpec::coordinates([0.0, self.t_max], self.steps + 1)
    }

    pub fn step(&self) -> f64 {
        self.t_max / self.steps as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// IDQS of the state space, `D_Q(n)` over the current Bloch vector.
    StateIdqs,
    /// IDQS of the initial-state parameterization at time `t`.
    Idqs,
    Idf,
    Ridf,
    Gamma,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::StateIdqs => "state_idqs",
            FieldKind::Idqs => "idqs",
            FieldKind::Idf => "idf",
            FieldKind::Ridf => "ridf",
            FieldKind::Gamma => "gamma",
        }
    }

    pub fn is_signed(self) -> bool {
        matches!(self, FieldKind::Idf | FieldKind::Ridf | FieldKind::Gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Panel {
    pub field: FieldKind,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}` (expected csv, json or svg)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub formats: Vec<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fields: Option<Vec<FieldKind>>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { formats: vec![Format::Csv, Format::Json, Format::Svg], directory: None, fields: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WitnessSpec {
    pub threshold: f64,
}

impl Default for WitnessSpec {
    fn default() -> Self {
        Self { threshold: idflow_core::witness::DEFAULT_BACKFLOW_THRESHOLD }
    }
}

/// Panels of the reference figure: state-space and initial-state IDQS at
/// `0.02, 0.5, 1.0`; IDF and RIDF at `0.1, 0.5, 1.0`.
pub fn reference_panels() -> Vec<Panel> {
    let mut out = Vec::with_capacity(12);
    for (field, times) in [
        (FieldKind::StateIdqs, [0.02, 0.5, 1.0]),
        (FieldKind::Idqs, [0.02, 0.5, 1.0]),
        (FieldKind::Idf, [0.1, 0.5, 1.0]),
        (FieldKind::Ridf, [0.1, 0.5, 1.0]),
    ] {
        out.extend(times.into_iter().map(|t| Panel { field, t }));
    }
    out
}

impl ExperimentConfig {
    pub fn panels(&self) -> Vec<Panel> {
        if let Some(p) = &self.panels {
            return p.clone();
        }
        match &self.outputs.fields {
            Some(fields) => {
                fields.iter().flat_map(|&field| self.times.snapshots.iter().map(move |&t| Panel { field, t })).collect()
            }
            None => reference_panels().into_iter().filter(|p| p.t <= self.times.t_max).collect(),
        }
    }

    /// Coupling regime of the dissipative model, if that is the model.
    pub fn regime(&self) -> Option<Regime> {
        match &self.model {
            ModelSpec::Dissipative(d) => DissipativeModel::new(d.lambda, d.coupling).ok().map(|m| m.regime()),
            ModelSpec::Custom(_) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let range = |msg: String| Err(CliError::Range(msg));
        match &self.model {
            ModelSpec::Dissipative(d) => {
                if !(d.lambda > 0.0 && d.lambda.is_finite()) || !(d.coupling >= 0.0 && d.coupling.is_finite()) {
                    return range(format!("need lambda > 0 and W >= 0, got {} and {}", d.lambda, d.coupling));
                }
            }
            ModelSpec::Custom(c) => {
                if let Some(h) = &c.hamiltonian {
                    check_qubit_matrix("model.custom.hamiltonian", h)?;
                }
                for (i, ch) in c.channels.iter().enumerate() {
                    check_qubit_matrix(&format!("model.custom.channels[{i}].jump"), &ch.jump)?;
                    check_rate(&format!("model.custom.channels[{i}].rate"), &ch.rate)?;
                }
            }
        }
        let g = &self.grid;
        if g.axes[0] == g.axes[1] {
            return range("grid.axes must be two different coordinates".into());
        }
        if g.resolution.iter().any(|&r| r < 2) {
            return range(format!("grid.resolution must be at least 2 per axis, got {:?}", g.resolution));
        }
        for (name, r) in [("grid.range1", g.range1), ("grid.range2", g.range2)] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return range(format!("{name} must be an ascending finite pair, got {r:?}"));
            }
        }
        if !g.fixed.is_finite() {
            return range("grid.fixed must be finite".into());
        }
        let t = &self.times;
        if !(t.t_max > 0.0 && t.t_max.is_finite()) {
            return range(format!("times.t_max must be positive, got {}", t.t_max));
        }
        if t.steps < 2 {
            return range(format!("times.steps must be at least 2, got {}", t.steps));
        }
        let in_window = |x: f64| (0.0..=t.t_max).contains(&x);
        if let Some(bad) = t.snapshots.iter().find(|&&x| !in_window(x)) {
            return range(format!("snapshot time {bad} outside [0, {}]", t.t_max));
        }
        if let Some(bad) = self.panels().iter().find(|p| !in_window(p.t)) {
            return range(format!("panel time {} outside [0, {}]", bad.t, t.t_max));
        }
        for (i, p) in self.points.iter().enumerate() {
            let norm_sq: f64 = p.iter().map(|x| x * x).sum();
            if !norm_sq.is_finite() || norm_sq > 1.0 + 1e-12 {
                return range(format!("points[{i}] = {p:?} lies outside the Bloch ball"));
            }
        }
        if !(self.witness.threshold >= 0.0) {
            return range(format!("witness.threshold must be >= 0, got {}", self.witness.threshold));
        }
        Ok(())
    }
}

fn check_qubit_matrix(path: &str, m: &MatrixSpec) -> Result<()> {
    if m.0.len() != 2 || m.0.iter().any(|row| row.len() != 2) {
        return Err(CliError::Range(format!("{path}: custom models are qubit-only, expected a 2x2 matrix")));
    }
    if m.0.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::Range(format!("{path}: non-finite entry")));
    }
    Ok(())
}

fn check_rate(path: &str, rate: &RateSpec) -> Result<()> {
    let bad = |msg: &str| Err(CliError::Range(format!("{path}: {msg}")));
    match rate {
        RateSpec::Table { t, gamma } => {
            if t.len() != gamma.len() || t.len() < 2 {
                return bad("table needs matching t and gamma arrays of length >= 2");
            }
            if t.windows(2).any(|w| !(w[1] > w[0])) || t.iter().chain(gamma).any(|x| !x.is_finite()) {
                return bad("table times must be finite and strictly ascending");
            }
        }
        RateSpec::Dissipative { lambda, coupling } => {
            if DissipativeModel::new(*lambda, *coupling).is_err() {
                return bad("need lambda > 0 and W >= 0");
            }
        }
        RateSpec::Constant(g) if !g.is_finite() => return bad("non-finite rate"),
        _ => {}
    }
    Ok(())
}

/// Parses and validates a JSON config; missing fields take their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Schema { path: e.path().to_string(), message: e.inner().to_string() })?;
    config.validate()?;
    Ok(config)
}
