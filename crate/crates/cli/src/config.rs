//! JSON experiment descriptions. Angles are degrees here and radians
//! everywhere past [`SceneSpec::build`].

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use mpmcrb::scenario::linspace;
use mpmcrb::{ArrayGeometry, EstimatorConfig, GroundScenario, MultipathScene, C64};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    Bounds(BoundsSpec),
    Sweep(SweepSpec),
    PhaseMap(PhaseMapSpec),
    Montecarlo(MonteCarloSpec),
    Scenario(ScenarioSpec),
    Beampattern(BeampatternSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeometrySpec {
    /// Virtual ULA: receive spacing λ/2, transmit spacing `m_r·λ/2`.
    Standard { m_t: usize, m_r: usize },
    /// Element positions in wavelengths.
    Explicit {
        tx_positions: Vec<f64>,
        rx_positions: Vec<f64>,
    },
}

impl GeometrySpec {
    pub fn build(&self, path: &str) -> Result<ArrayGeometry, CliError> {
        let g = match self {
            Self::Standard { m_t, m_r } => ArrayGeometry::standard_virtual_ula(*m_t, *m_r),
            Self::Explicit {
                tx_positions,
                rx_positions,
            } => ArrayGeometry::new(tx_positions, rx_positions),
        };
        g.map_err(|e| CliError::field(path, e.to_string()))
    }
}

/// Scene parameters that a sweep axis or a curve may override.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneParam {
    ThetaDeg,
    DeltaThetaDeg,
    SnrDb,
    SmrDb,
    DeltaPhiDeg,
}

impl SceneParam {
    pub fn column(&self) -> &'static str {
        match self {
            Self::ThetaDeg => "theta_deg",
            Self::DeltaThetaDeg => "delta_theta_deg",
            Self::SnrDb => "snr_db",
            Self::SmrDb => "smr_db",
            Self::DeltaPhiDeg => "delta_phi_deg",
        }
    }
}

fn one() -> f64 {
    1.0
}

fn one_pulse() -> u32 {
    1
}

/// A single multipath scene. The indirect DOA is `θ − Δθ`. `smr_db: null`
/// removes the indirect path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    #[serde(default)]
    pub theta_deg: f64,
    pub delta_theta_deg: f64,
    pub snr_db: f64,
    pub smr_db: Option<f64>,
    #[serde(default)]
    pub delta_phi_deg: f64,
    #[serde(default = "one_pulse")]
    pub k_pulses: u32,
    #[serde(default = "one")]
    pub e_p: f64,
}

impl SceneSpec {
    pub fn with(&self, param: SceneParam, value: f64) -> Self {
        let mut s = self.clone();
        match param {
            SceneParam::ThetaDeg => s.theta_deg = value,
            SceneParam::DeltaThetaDeg => s.delta_theta_deg = value,
            SceneParam::SnrDb => s.snr_db = value,
            SceneParam::SmrDb => s.smr_db = Some(value),
            SceneParam::DeltaPhiDeg => s.delta_phi_deg = value,
        }
        s
    }

    pub fn with_all(&self, set: &BTreeMap<SceneParam, f64>) -> Self {
        set.iter().fold(self.clone(), |s, (p, v)| s.with(*p, *v))
    }

    pub fn build(&self, geom: &ArrayGeometry, path: &str) -> Result<MultipathScene, CliError> {
        let theta = self.theta_deg.to_radians();
        let psi = (self.theta_deg - self.delta_theta_deg).to_radians();
        MultipathScene::from_ratios(
            geom.clone(),
            theta,
            psi,
            self.snr_db,
            self.smr_db.unwrap_or(f64::INFINITY),
            self.delta_phi_deg.to_radians(),
            self.k_pulses,
            self.e_p,
        )
        .map_err(|e| CliError::field(path, e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisPoints {
    List { values: Vec<f64> },
    Range { start: f64, stop: f64, count: usize },
}

impl AxisPoints {
    pub fn values(&self, path: &str) -> Result<Vec<f64>, CliError> {
        let v = match self {
            Self::List { values } => values.clone(),
            Self::Range { start, stop, count } => {
                if *count == 0 {
                    return Err(CliError::field(path, "axis count must be positive"));
                }
                linspace(*start, *stop, *count)
            }
        };
        if v.is_empty() {
            return Err(CliError::field(path, "axis is empty"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::field(path, "axis values must be finite"));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: SceneParam,
    #[serde(flatten)]
    pub points: AxisPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Curve {
    pub label: String,
    #[serde(default)]
    pub set: BTreeMap<SceneParam, f64>,
}

/// Search settings in degrees; omitted fields follow the geometry defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    pub span_deg: Option<(f64, f64)>,
    pub coarse_step_deg: Option<f64>,
    pub refine_tol_deg: Option<f64>,
}

impl EstimatorSpec {
    pub fn build(
        spec: Option<&Self>,
        geom: &ArrayGeometry,
        path: &str,
    ) -> Result<EstimatorConfig, CliError> {
        let mut cfg = EstimatorConfig::for_geometry(geom);
        if let Some(s) = spec {
            if let Some((lo, hi)) = s.span_deg {
                cfg.span = (lo.to_radians(), hi.to_radians());
            }
            if let Some(c) = s.coarse_step_deg {
                cfg.coarse_step = c.to_radians();
            }
            if let Some(t) = s.refine_tol_deg {
                cfg.refine_tol = t.to_radians();
            }
        }
        cfg.validate()
            .map_err(|e| CliError::field(path, e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub geometry: GeometrySpec,
    pub scene: SceneSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub geometry: GeometrySpec,
    pub scene: SceneSpec,
    pub axis: Axis,
    #[serde(default)]
    pub curves: Vec<Curve>,
    /// Angle grid (degrees) for an accompanying transmit/receive beampattern.
    #[serde(default)]
    pub beampattern_deg: Option<AxisPoints>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseMapSpec {
    pub geometry: GeometrySpec,
    pub scene: SceneSpec,
    pub delta_phi_deg: AxisPoints,
    pub delta_theta_deg: AxisPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSpec {
    pub geometry: GeometrySpec,
    pub scene: SceneSpec,
    pub axis: Axis,
    pub trials: u32,
    pub seed: u64,
    #[serde(default)]
    pub estimator: Option<EstimatorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelledGeometry {
    pub label: String,
    pub geometry: GeometrySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub h_r: f64,
    #[serde(default)]
    pub theta_deg: f64,
    pub lambda: f64,
    pub eps_r: f64,
    pub gamma_cond: f64,
    /// Target reflection coefficient as `[re, im]`.
    #[serde(default = "unit_reflection")]
    pub gamma_t: (f64, f64),
    pub range_m: AxisPoints,
    pub v: f64,
    pub r_res: f64,
    pub v_res: f64,
    #[serde(default = "one_pulse")]
    pub k_pulses: u32,
    #[serde(default = "one")]
    pub e_p: f64,
    pub snr_ref_db: f64,
    pub r_ref: f64,
    pub geometries: Vec<LabelledGeometry>,
}

fn unit_reflection() -> (f64, f64) {
    (1.0, 0.0)
}

impl ScenarioSpec {
    pub fn build(&self, path: &str) -> Result<GroundScenario, CliError> {
        let scn = GroundScenario {
            h_r: self.h_r,
            theta: self.theta_deg.to_radians(),
            lambda: self.lambda,
            eps_r: self.eps_r,
            gamma_cond: self.gamma_cond,
            gamma_t: C64::new(self.gamma_t.0, self.gamma_t.1),
            range_grid: self.range_m.values(&format!("{path}.range_m"))?,
            v: self.v,
            r_res: self.r_res,
            v_res: self.v_res,
            k_pulses: self.k_pulses,
            e_p: self.e_p,
            snr_ref_db: self.snr_ref_db,
            r_ref: self.r_ref,
        };
        scn.validate()
            .map_err(|e| CliError::field(path, e.to_string()))?;
        Ok(scn)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeampatternSpec {
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub steer_deg: f64,
    pub angles_deg: AxisPoints,
}

fn section<T: serde::de::DeserializeOwned>(body: serde_json::Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(body).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." {
            "experiment".to_string()
        } else {
            format!("experiment.{inner}")
        };
        CliError::field(&path, e.into_inner().to_string())
    })
}

// Dispatching on `kind` by hand keeps full field paths in errors; serde's
// internally tagged enums buffer the body and lose them.
fn parse_experiment(value: Option<serde_json::Value>) -> Result<Experiment, CliError> {
    let Some(serde_json::Value::Object(mut body)) = value else {
        return Err(CliError::field(
            "experiment",
            "expected an object with a `kind` field",
        ));
    };
    let kind = match body.remove("kind") {
        Some(serde_json::Value::String(k)) => k,
        _ => {
            return Err(CliError::field(
                "experiment.kind",
                "missing or not a string",
            ))
        }
    };
    let body = serde_json::Value::Object(body);
    Ok(match kind.as_str() {
        "bounds" => Experiment::Bounds(section(body)?),
        "sweep" => Experiment::Sweep(section(body)?),
        "phase_map" => Experiment::PhaseMap(section(body)?),
        "montecarlo" => Experiment::Montecarlo(section(body)?),
        "scenario" => Experiment::Scenario(section(body)?),
        "beampattern" => Experiment::Beampattern(section(body)?),
        other => {
            return Err(CliError::field(
                "experiment.kind",
                format!("unknown kind `{other}`, expected bounds, sweep, phase_map, montecarlo, scenario or beampattern"),
            ))
        }
    })
}

impl ExperimentConfig {
    /// Parses a config, or the `config` member of a run manifest.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::field("$", e.to_string()))?;
        let value = match value.get("config") {
            Some(inner) if value.get("config_sha256").is_some() => inner.clone(),
            _ => value,
        };
        let serde_json::Value::Object(mut top) = value else {
            return Err(CliError::field("$", "expected a JSON object"));
        };
        if let Some(extra) = top.keys().find(|k| *k != "name" && *k != "experiment") {
            return Err(CliError::field(
                extra,
                "unknown field, expected `name` or `experiment`",
            ));
        }
        let name = match top.remove("name") {
            Some(serde_json::Value::String(n)) => n,
            Some(_) => return Err(CliError::field("name", "expected a string")),
            None => return Err(CliError::field("name", "missing field")),
        };
        let experiment = parse_experiment(top.remove("experiment"))?;
        let cfg = Self { name, experiment };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Structural checks that do not need any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(CliError::field(
                "name",
                "must be a non-empty [A-Za-z0-9_-] identifier",
            ));
        }
        match &self.experiment {
            Experiment::Bounds(b) => b.geometry.build("experiment.geometry").map(|_| ()),
            Experiment::Sweep(s) => {
                s.geometry.build("experiment.geometry")?;
                s.axis.points.values("experiment.axis")?;
                labels_unique(
                    s.curves.iter().map(|c| c.label.as_str()),
                    "experiment.curves",
                )
            }
            Experiment::PhaseMap(p) => {
                p.geometry.build("experiment.geometry")?;
                p.delta_phi_deg.values("experiment.delta_phi_deg")?;
                p.delta_theta_deg
                    .values("experiment.delta_theta_deg")
                    .map(|_| ())
            }
            Experiment::Montecarlo(m) => {
                m.geometry.build("experiment.geometry")?;
                m.axis.points.values("experiment.axis")?;
                if m.trials == 0 {
                    return Err(CliError::field("experiment.trials", "must be positive"));
                }
                Ok(())
            }
            Experiment::Scenario(s) => {
                if s.geometries.is_empty() {
                    return Err(CliError::field(
                        "experiment.geometries",
                        "at least one geometry",
                    ));
                }
                for (i, g) in s.geometries.iter().enumerate() {
                    g.geometry.build(&format!("experiment.geometries[{i}]"))?;
                }
                labels_unique(
                    s.geometries.iter().map(|g| g.label.as_str()),
                    "experiment.geometries",
                )?;
                s.build("experiment").map(|_| ())
            }
            Experiment::Beampattern(b) => {
                b.geometry.build("experiment.geometry")?;
                b.angles_deg.values("experiment.angles_deg").map(|_| ())
            }
        }
    }

    /// Overrides the Monte-Carlo trial count and seed.
    pub fn override_trials_seed(
        &mut self,
        trials: Option<u32>,
        seed: Option<u64>,
    ) -> Result<(), CliError> {
        match &mut self.experiment {
            Experiment::Montecarlo(m) => {
                if let Some(t) = trials {
                    if t == 0 {
                        return Err(CliError::field("--trials", "must be positive"));
                    }
                    m.trials = t;
                }
                if let Some(s) = seed {
                    m.seed = s;
                }
                Ok(())
            }
            _ if trials.is_some() || seed.is_some() => Err(CliError::field(
                "--trials/--seed",
                "only Monte-Carlo experiments take trials or a seed",
            )),
            _ => Ok(()),
        }
    }
}

fn labels_unique<'a>(labels: impl Iterator<Item = &'a str>, path: &str) -> Result<(), CliError> {
    let mut seen = std::collections::BTreeSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(CliError::field(path, format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

/// Shipped presets, by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2", include_str!("../presets/fig2.json")),
    ("fig3", include_str!("../presets/fig3.json")),
    ("fig4", include_str!("../presets/fig4.json")),
    ("fig5", include_str!("../presets/fig5.json")),
    ("fig7", include_str!("../presets/fig7.json")),
    ("fig8", include_str!("../presets/fig8.json")),
];

pub fn preset(name: &str) -> Result<ExperimentConfig, CliError> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| CliError::field("preset", format!("unknown preset {name:?}")))?;
    ExperimentConfig::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_of(text: &str) -> String {
        match ExperimentConfig::from_json(text) {
            Err(CliError::Config { path, .. }) => path,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn presets_round_trip() {
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap();
            assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        }
    }

    #[test]
    fn errors_carry_field_paths() {
        let sweep = r#"{"name":"x","experiment":{"kind":"sweep","geometry":{"m_t":3,"m_r":4},
            "scene":{"delta_theta_deg":0,"snr_db":10,"smr_db":0},
            "axis":{"param":"snr_db","start":0,"stop":1,"count":"many"}}}"#;
        // flattened untagged points stop the path at the axis
        assert_eq!(path_of(sweep), "experiment.axis");
        assert_eq!(
            path_of(r#"{"name":"x","experiment":{"kind":"nope"}}"#),
            "experiment.kind"
        );
        assert_eq!(
            path_of(r#"{"name":"x","extra":1,"experiment":{}}"#),
            "extra"
        );
        let typo = r#"{"name":"x","experiment":{"kind":"bounds","geometry":{"m_t":3,"m_r":4},
            "scene":{"delta_theta_deg":0,"snr_db":10,"smr_db":0,"snr":3}}}"#;
        assert_eq!(path_of(typo), "experiment.scene.snr");
    }

    #[test]
    fn manifest_config_is_accepted() {
        let cfg = preset("fig3").unwrap();
        let wrapped = format!(r#"{{"config":{},"config_sha256":"00"}}"#, cfg.to_json());
        assert_eq!(ExperimentConfig::from_json(&wrapped).unwrap(), cfg);
    }

    #[test]
    fn trial_override_only_for_montecarlo() {
        let mut cfg = preset("fig2").unwrap();
        cfg.override_trials_seed(Some(10), Some(3)).unwrap();
        let Experiment::Montecarlo(m) = &cfg.experiment else {
            unreachable!()
        };
        assert_eq!((m.trials, m.seed), (10, 3));
        assert!(preset("fig3")
            .unwrap()
            .override_trials_seed(Some(10), None)
            .is_err());
    }
}
