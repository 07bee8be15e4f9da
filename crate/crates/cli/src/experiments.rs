//! Experiment runners. Each turns a spec into one or more result tables.

use rayon::prelude::*;

use mpmcrb::bounds::{crb_theta, mcrb_sandwich, mcrb_theta_closed, SandwichOptions};
use mpmcrb::estimation::{monte_carlo_rmse, SceneSweep};
use mpmcrb::scenario::{range_sweep, PointBound};
use mpmcrb::{ArrayGeometry, BoundBreakdown, Error, MultipathScene};

use crate::config::*;
use crate::error::CliError;
use crate::table::{Cell, Table};

/// How a table is drawn when SVG output is requested.
#[derive(Debug, Clone, PartialEq)]
pub enum PlotKind {
    Lines {
        x: String,
        ys: Vec<String>,
        log_y: bool,
    },
    Heatmap {
        x: String,
        y: String,
        z: String,
        contour: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub stem: String,
    pub table: Table,
    pub plot: Option<PlotKind>,
}

fn deg(rad: f64) -> f64 {
    rad.to_degrees()
}

/// Closed-form bound, with degeneracy mapped to `None`.
fn closed_or_gap(scene: &MultipathScene) -> Result<Option<BoundBreakdown>, CliError> {
    match mcrb_theta_closed(scene) {
        Ok(b) => Ok(Some(b)),
        Err(Error::DegenerateBound { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn curve_column(base: &str, label: &str) -> String {
    if label.is_empty() {
        base.to_string()
    } else {
        format!("{base}[{label}]")
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Output>, CliError> {
    cfg.validate()?;
    match &cfg.experiment {
        Experiment::Bounds(s) => run_bounds(&cfg.name, s),
        Experiment::Sweep(s) => run_sweep(&cfg.name, s),
        Experiment::PhaseMap(s) => run_phase_map(&cfg.name, s),
        Experiment::Montecarlo(s) => run_montecarlo(&cfg.name, s),
        Experiment::Scenario(s) => run_scenario(&cfg.name, s),
        Experiment::Beampattern(s) => {
            let g = s.geometry.build("experiment.geometry")?;
            let angles = s.angles_deg.values("experiment.angles_deg")?;
            Ok(vec![beampattern_output(
                &cfg.name,
                &g,
                s.steer_deg,
                &angles,
            )])
        }
    }
}

/// Single scene. Degeneracy is an error here rather than a gap.
pub fn run_bounds(name: &str, s: &BoundsSpec) -> Result<Vec<Output>, CliError> {
    let g = s.geometry.build("experiment.geometry")?;
    let scene = s.scene.build(&g, "experiment.scene")?;
    let closed = mcrb_theta_closed(&scene).map_err(|e| match e {
        Error::DegenerateBound { .. } => CliError::Degenerate(e),
        e => e.into(),
    })?;
    let sandwich = mcrb_sandwich(&scene, &SandwichOptions::default())
        .ok()
        .map(|w| deg(w.breakdown.mcrb_theta.sqrt()));
    let mut t = Table::new(
        [
            "theta_deg",
            "delta_theta_deg",
            "snr_db",
            "smr_db",
            "delta_phi_rad",
            "rcrb_deg",
            "rmcrb_deg",
            "theta_a_deg",
            "bias_deg",
            "rmcrb_sandwich_deg",
        ]
        .map(String::from)
        .to_vec(),
    );
    t.push(vec![
        s.scene.theta_deg.into(),
        s.scene.delta_theta_deg.into(),
        s.scene.snr_db.into(),
        s.scene.smr_db.into(),
        scene.delta_phi().into(),
        deg(closed.rcrb()).into(),
        deg(closed.rmcrb()).into(),
        deg(closed.theta_a).into(),
        deg(closed.theta_a - scene.theta).into(),
        sandwich.into(),
    ]);
    Ok(vec![Output {
        stem: name.to_string(),
        table: t,
        plot: None,
    }])
}

pub fn run_sweep(name: &str, s: &SweepSpec) -> Result<Vec<Output>, CliError> {
    let g = s.geometry.build("experiment.geometry")?;
    let xs = s.axis.points.values("experiment.axis")?;
    let curves = if s.curves.is_empty() {
        vec![Curve {
            label: String::new(),
            set: Default::default(),
        }]
    } else {
        s.curves.clone()
    };
    // per axis value: (rcrb, rmcrb) for every curve
    let rows: Vec<Vec<(f64, Option<f64>)>> = xs
        .par_iter()
        .map(|&x| {
            curves
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let spec = s.scene.with_all(&c.set).with(s.axis.param, x);
                    let scene = spec.build(&g, &format!("experiment.curves[{i}]"))?;
                    let crb = crb_theta(&scene)?;
                    Ok((
                        deg(crb.sqrt()),
                        closed_or_gap(&scene)?.map(|b| deg(b.rmcrb())),
                    ))
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<_, _>>()?;

    let shared_rcrb = rows.iter().all(|r| r.iter().all(|c| c.0 == r[0].0));
    let mut columns = vec![s.axis.param.column().to_string()];
    if shared_rcrb {
        columns.push("rcrb_deg".into());
    } else {
        columns.extend(curves.iter().map(|c| curve_column("rcrb_deg", &c.label)));
    }
    let rmcrb_cols: Vec<String> = curves
        .iter()
        .map(|c| curve_column("rmcrb_deg", &c.label))
        .collect();
    columns.extend(rmcrb_cols.iter().cloned());
    let mut t = Table::new(columns.clone());
    for (x, r) in xs.iter().zip(&rows) {
        let mut row = vec![Cell::Num(*x)];
        if shared_rcrb {
            row.push(r[0].0.into());
        } else {
            row.extend(r.iter().map(|c| Cell::Num(c.0)));
        }
        row.extend(r.iter().map(|c| Cell::from(c.1)));
        t.push(row);
    }
    let mut outs = vec![Output {
        stem: name.to_string(),
        plot: Some(PlotKind::Lines {
            x: columns[0].clone(),
            ys: columns[1..].to_vec(),
            log_y: true,
        }),
        table: t,
    }];
    if let Some(grid) = &s.beampattern_deg {
        let angles = grid.values("experiment.beampattern_deg")?;
        outs.push(beampattern_output(
            &format!("{name}_beampattern"),
            &g,
            s.scene.theta_deg,
            &angles,
        ));
    }
    Ok(outs)
}

pub fn beampattern_output(
    stem: &str,
    g: &ArrayGeometry,
    steer_deg: f64,
    angles_deg: &[f64],
) -> Output {
    let rad: Vec<f64> = angles_deg.iter().map(|a| a.to_radians()).collect();
    let mut t = Table::new(vec![
        "angle_deg".into(),
        "tx_gain_db".into(),
        "rx_gain_db".into(),
    ]);
    for (a, b) in angles_deg
        .iter()
        .zip(g.beampattern(steer_deg.to_radians(), &rad))
    {
        t.push(vec![(*a).into(), b.tx_gain_db.into(), b.rx_gain_db.into()]);
    }
    Output {
        stem: stem.to_string(),
        table: t,
        plot: Some(PlotKind::Lines {
            x: "angle_deg".into(),
            ys: vec!["tx_gain_db".into(), "rx_gain_db".into()],
            log_y: false,
        }),
    }
}

pub fn run_phase_map(name: &str, s: &PhaseMapSpec) -> Result<Vec<Output>, CliError> {
    let g = s.geometry.build("experiment.geometry")?;
    let phis = s.delta_phi_deg.values("experiment.delta_phi_deg")?;
    let thetas = s.delta_theta_deg.values("experiment.delta_theta_deg")?;
    let cells: Vec<(f64, f64)> = thetas
        .iter()
        .flat_map(|&dt| phis.iter().map(move |&dp| (dt, dp)))
        .collect();
    let ratios: Vec<(f64, Option<f64>)> = cells
        .par_iter()
        .map(|&(dt, dp)| {
            let spec = s
                .scene
                .with(SceneParam::DeltaThetaDeg, dt)
                .with(SceneParam::DeltaPhiDeg, dp);
            let scene = spec.build(&g, "experiment.scene")?;
            Ok((
                scene.delta_phi(),
                closed_or_gap(&scene)?.map(|b| b.rmcrb() / b.rcrb()),
            ))
        })
        .collect::<Result<_, CliError>>()?;
    let mut t = Table::new(vec![
        "delta_phi_rad".into(),
        "delta_theta_deg".into(),
        "rmcrb_over_rcrb".into(),
    ]);
    for (&(dt, dp), (wrapped, r)) in cells.iter().zip(&ratios) {
        // keep +π at the top edge of the grid instead of folding it onto −π
        let phase = if (dp.to_radians() - wrapped).abs() > 1.0 {
            dp.to_radians()
        } else {
            *wrapped
        };
        t.push(vec![phase.into(), dt.into(), (*r).into()]);
    }
    Ok(vec![Output {
        stem: name.to_string(),
        table: t,
        plot: Some(PlotKind::Heatmap {
            x: "delta_phi_rad".into(),
            y: "delta_theta_deg".into(),
            z: "rmcrb_over_rcrb".into(),
            contour: 1.0,
        }),
    }])
}

pub fn run_montecarlo(name: &str, s: &MonteCarloSpec) -> Result<Vec<Output>, CliError> {
    let g = s.geometry.build("experiment.geometry")?;
    let xs = s.axis.points.values("experiment.axis")?;
    let est = EstimatorSpec::build(s.estimator.as_ref(), &g, "experiment.estimator")?;
    let scenes: Vec<MultipathScene> = xs
        .iter()
        .map(|&x| s.scene.with(s.axis.param, x).build(&g, "experiment.scene"))
        .collect::<Result<_, _>>()?;
    let bounds: Vec<(f64, Option<BoundBreakdown>)> = scenes
        .par_iter()
        .map(|sc| Ok((crb_theta(sc)?, closed_or_gap(sc)?)))
        .collect::<Result<_, CliError>>()?;
    let param = s.axis.param.column().to_string();
    let mml = monte_carlo_rmse(
        &SceneSweep {
            name: param.clone(),
            values: xs.clone(),
            scenes: scenes.clone(),
        },
        &est,
        s.trials,
        s.seed,
    )?;
    let clean: Vec<MultipathScene> = scenes.iter().map(|sc| sc.without_multipath()).collect();
    let ml = monte_carlo_rmse(
        &SceneSweep {
            name: param.clone(),
            values: xs.clone(),
            scenes: clean,
        },
        &est,
        s.trials,
        s.seed,
    )?;
    let columns: Vec<String> = [
        param.as_str(),
        "rcrb_deg",
        "rmcrb_deg",
        "theta_a_deg",
        "rmse_mml_deg",
        "bias_mml_deg",
        "rmse_ml_deg",
    ]
    .map(String::from)
    .to_vec();
    let mut t = Table::new(columns.clone());
    for i in 0..xs.len() {
        let (crb, b) = bounds[i];
        t.push(vec![
            xs[i].into(),
            deg(crb.sqrt()).into(),
            b.map(|b| deg(b.rmcrb())).into(),
            b.map(|b| deg(b.theta_a)).into(),
            deg(mml.rmse_rad[i]).into(),
            deg(mml.bias_rad[i]).into(),
            deg(ml.rmse_rad[i]).into(),
        ]);
    }
    Ok(vec![Output {
        stem: name.to_string(),
        table: t,
        plot: Some(PlotKind::Lines {
            x: param,
            ys: ["rcrb_deg", "rmcrb_deg", "rmse_mml_deg", "rmse_ml_deg"]
                .map(String::from)
                .to_vec(),
            log_y: true,
        }),
    }])
}

pub fn run_scenario(name: &str, s: &ScenarioSpec) -> Result<Vec<Output>, CliError> {
    let scn = s.build("experiment")?;
    let geoms: Vec<ArrayGeometry> = s
        .geometries
        .iter()
        .enumerate()
        .map(|(i, g)| g.geometry.build(&format!("experiment.geometries[{i}]")))
        .collect::<Result<_, _>>()?;
    let sweeps = range_sweep(&scn, &geoms)?;
    let mut columns: Vec<String> = [
        "r_d_m",
        "r_i_m",
        "psi_deg",
        "amplitude_ratio",
        "smr_db",
        "delta_phi_rad",
        "snr_db",
        "same_cell",
    ]
    .map(String::from)
    .to_vec();
    let mut ys = Vec::new();
    for g in &s.geometries {
        let cols = [
            format!("rcrb_deg[{}]", g.label),
            format!("rmcrb_deg[{}]", g.label),
            format!("ratio[{}]", g.label),
        ];
        ys.extend(cols[..2].iter().cloned());
        columns.extend(cols);
    }
    let mut t = Table::new(columns);
    for i in 0..scn.range_grid.len() {
        let p = &sweeps[0][i];
        let mut row: Vec<Cell> = vec![
            p.r_d.into(),
            p.r_i.into(),
            deg(p.psi).into(),
            p.amplitude_ratio().into(),
            p.smr_db.into(),
            p.delta_phi.into(),
            p.snr_db.into(),
            p.same_cell.into(),
        ];
        for sweep in &sweeps {
            let q = &sweep[i];
            let rcrb = q.crb_theta.sqrt();
            let rmcrb = match q.bound {
                PointBound::Bound(b) => Some(b.rmcrb()),
                PointBound::OutOfModel | PointBound::Degenerate => None,
            };
            row.push(deg(rcrb).into());
            row.push(rmcrb.map(deg).into());
            row.push(rmcrb.map(|m| m / rcrb).into());
        }
        t.push(row);
    }
    Ok(vec![Output {
        stem: name.to_string(),
        table: t,
        plot: Some(PlotKind::Lines {
            x: "r_d_m".into(),
            ys,
            log_y: true,
        }),
    }])
}
