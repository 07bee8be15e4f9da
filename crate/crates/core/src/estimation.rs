//! Misspecified ML DOA estimation and the Monte-Carlo RMSE engine.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::array::ArrayGeometry;
use crate::bounds::project;
use crate::error::{Error, Result};
use crate::multipath::MultipathScene;
use crate::search::SearchConfig;
use crate::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Search interval `(lo, hi)` in radians.
    pub span: (f64, f64),
    pub coarse_step: f64,
    pub refine_tol: f64,
}

impl EstimatorConfig {
    /// ±60° span, a coarse step of a tenth of the half-beamwidth and 1e-6 rad
    /// refinement.
    pub fn for_geometry(geom: &ArrayGeometry) -> Self {
        let span = 60.0 * PI / 180.0;
        let bw = geom.beamwidth();
        Self {
            span: (-span, span),
            coarse_step: if bw.is_finite() { bw / 20.0 } else { 1e-3 },
            refine_tol: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.search().validate()?;
        if !(self.coarse_step > self.refine_tol) {
            return Err(Error::invalid(
                "coarse step must exceed the refinement tolerance",
            ));
        }
        Ok(())
    }

    pub fn search(&self) -> SearchConfig {
        SearchConfig {
            lo: self.span.0,
            hi: self.span.1,
            coarse_step: self.coarse_step,
            refine_tol: self.refine_tol,
        }
    }
}

/// DOA estimate under the direct-path-only model: with white noise and the
/// complex amplitude concentrated out, the likelihood is maximized by
/// `argmax_θ' |tr(Aᴴ(θ') Y)|²`.
pub fn mml_doa(y: &CMatrix, geom: &ArrayGeometry, cfg: &EstimatorConfig) -> Result<f64> {
    if y.nrows() != geom.m_r() || y.ncols() != geom.m_t() {
        return Err(Error::invalid(format!(
            "statistic is {}x{}, geometry expects {}x{}",
            y.nrows(),
            y.ncols(),
            geom.m_r(),
            geom.m_t()
        )));
    }
    cfg.validate()?;
    let centre = 0.5 * (cfg.span.0 + cfg.span.1);
    cfg.search()
        .argmax(|t| project(geom, y, t).norm_sqr(), centre)
}

/// Generator for one trial. The key is the base seed; the ChaCha stream
/// index encodes `(scene, trial)`, so every trial draws from its own
/// counter range whatever order trials run in.
pub fn trial_rng(base_seed: u64, scene_index: u32, trial_index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(((scene_index as u64) << 32) | trial_index as u64);
    rng
}

/// Neumaier-compensated sum, evaluated in slice order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsePoint {
    pub rmse_rad: f64,
    pub bias_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseCurve {
    pub sweep_name: String,
    pub sweep_values: Vec<f64>,
    pub rmse_rad: Vec<f64>,
    pub bias_rad: Vec<f64>,
    pub trials: u32,
    pub base_seed: u64,
}

/// Scenes along one swept parameter.
#[derive(Debug, Clone)]
pub struct SceneSweep {
    pub name: String,
    pub values: Vec<f64>,
    pub scenes: Vec<MultipathScene>,
}

fn trial_errors(
    scene: &MultipathScene,
    scene_index: u32,
    cfg: &EstimatorConfig,
    trials: u32,
    base_seed: u64,
) -> Result<Vec<f64>> {
    let mean = scene.compressed_mean();
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(base_seed, scene_index, t);
            let y = scene.synthesize_with(&mean, &mut rng);
            Ok(mml_doa(&y, &scene.geom, cfg)? - scene.theta)
        })
        .collect()
}

fn summarize(errors: &[f64]) -> RmsePoint {
    let n = errors.len() as f64;
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    RmsePoint {
        rmse_rad: (compensated_sum(&sq) / n).sqrt(),
        bias_rad: compensated_sum(errors) / n,
    }
}

/// Monte-Carlo RMSE (around the true θ) and mean bias of [`mml_doa`] for
/// every scene of a sweep.
pub fn monte_carlo_rmse(
    sweep: &SceneSweep,
    cfg: &EstimatorConfig,
    trials: u32,
    base_seed: u64,
) -> Result<RmseCurve> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    if sweep.values.len() != sweep.scenes.len() {
        return Err(Error::invalid("sweep values and scenes differ in length"));
    }
    cfg.validate()?;
    let points: Vec<RmsePoint> = sweep
        .scenes
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            Ok(summarize(&trial_errors(
                s, i as u32, cfg, trials, base_seed,
            )?))
        })
        .collect::<Result<_>>()?;
    Ok(RmseCurve {
        sweep_name: sweep.name.clone(),
        sweep_values: sweep.values.clone(),
        rmse_rad: points.iter().map(|p| p.rmse_rad).collect(),
        bias_rad: points.iter().map(|p| p.bias_rad).collect(),
        trials,
        base_seed,
    })
}

/// Correctly specified reference: the same estimator on data generated
/// without the indirect path.
pub fn ml_reference_doa(
    scene: &MultipathScene,
    cfg: &EstimatorConfig,
    trials: u32,
    seed: u64,
) -> Result<RmsePoint> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    cfg.validate()?;
    Ok(summarize(&trial_errors(
        &scene.without_multipath(),
        0,
        cfg,
        trials,
        seed,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{default_theta_a_search, theta_a};

    fn fig2(snr_db: f64) -> MultipathScene {
        let g = ArrayGeometry::standard_virtual_ula(3, 4).unwrap();
        MultipathScene::from_ratios(g, 0.0, 0.5f64.to_radians(), snr_db, 0.0, 0.0, 1, 1.0).unwrap()
    }

    #[test]
    fn noise_free_direct_path_recovers_theta() {
        let s = MultipathScene {
            theta: 0.23,
            ..fig2(300.0).without_multipath()
        };
        let cfg = EstimatorConfig::for_geometry(&s.geom);
        let est = mml_doa(&s.compressed_mean(), &s.geom, &cfg).unwrap();
        assert!((est - 0.23).abs() < cfg.refine_tol);
    }

    #[test]
    fn noise_free_multipath_converges_to_pseudo_true() {
        let s = MultipathScene::from_ratios(
            ArrayGeometry::standard_virtual_ula(3, 4).unwrap(),
            0.1,
            0.16,
            20.0,
            -3.0,
            0.4,
            1,
            1.0,
        )
        .unwrap();
        let cfg = EstimatorConfig::for_geometry(&s.geom);
        let est = mml_doa(&s.compressed_mean(), &s.geom, &cfg).unwrap();
        let ta = theta_a(&s, &default_theta_a_search(&s)).unwrap();
        assert!((est - ta).abs() < 10.0 * cfg.refine_tol, "{est} vs {ta}");
    }

    #[test]
    fn scale_invariance() {
        let s = fig2(10.0);
        let cfg = EstimatorConfig::for_geometry(&s.geom);
        let y = s.synthesize_compressed(5);
        let a = mml_doa(&y, &s.geom, &cfg).unwrap();
        let b = mml_doa(&(y * crate::C64::new(-3.0, 7.5)), &s.geom, &cfg).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let s = fig2(10.0);
        let cfg = EstimatorConfig::for_geometry(&s.geom);
        let y = CMatrix::zeros(3, 4);
        assert!(mml_doa(&y, &s.geom, &cfg).is_err());
        let bad = EstimatorConfig {
            span: (0.2, 0.2),
            ..cfg
        };
        assert!(mml_doa(&s.compressed_mean(), &s.geom, &bad).is_err());
    }

    #[test]
    fn single_trial_is_reproducible() {
        let s = fig2(0.0);
        let cfg = EstimatorConfig::for_geometry(&s.geom);
        let a = ml_reference_doa(&s, &cfg, 1, 77).unwrap();
        let b = ml_reference_doa(&s, &cfg, 1, 77).unwrap();
        assert_eq!(a, b);
        assert!((a.rmse_rad - a.bias_rad.abs()).abs() < 1e-15);
    }

    #[test]
    fn rmse_dominates_bias() {
        let sweep = SceneSweep {
            name: "snr_db".into(),
            values: vec![0.0, 10.0],
            scenes: vec![fig2(0.0), fig2(10.0)],
        };
        let cfg = EstimatorConfig::for_geometry(&sweep.scenes[0].geom);
        let c = monte_carlo_rmse(&sweep, &cfg, 50, 3).unwrap();
        for (r, b) in c.rmse_rad.iter().zip(&c.bias_rad) {
            assert!(r * r >= b * b);
        }
        assert_eq!(c, monte_carlo_rmse(&sweep, &cfg, 50, 3).unwrap());
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(&v), 2.0);
    }

    #[test]
    fn trial_streams_are_distinct() {
        use rand::Rng;
        let a: u64 = trial_rng(1, 0, 0).random();
        let b: u64 = trial_rng(1, 0, 1).random();
        let c: u64 = trial_rng(1, 1, 0).random();
        assert!(a != b && a != c && b != c);
    }
}
