//! Automotive ground-multipath scene: a radar at height `h_r` above a flat
//! road observes a target at range `r_d`; the road reflection arrives from
//! below broadside at the grazing angle `ψ`.

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::array::ArrayGeometry;
use crate::bounds::{crb_theta, mcrb_theta_closed, BoundBreakdown};
use crate::error::{Error, Result};
use crate::multipath::{path_coefficients, MultipathScene, PathGeometryInputs};
use crate::{wrap_phase, C64};

#[derive(Debug, Clone)]
pub struct GroundScenario {
    /// Radar height above the road (m).
    pub h_r: f64,
    /// Target elevation DOA (rad).
    pub theta: f64,
    /// Wavelength (m).
    pub lambda: f64,
    /// Relative permittivity of the road.
    pub eps_r: f64,
    /// Road conductivity (S/m).
    pub gamma_cond: f64,
    /// Target reflection coefficient.
    pub gamma_t: C64,
    pub range_grid: Vec<f64>,
    /// Relative radial velocity (m/s).
    pub v: f64,
    /// Range resolution (m).
    pub r_res: f64,
    /// Velocity resolution (m/s).
    pub v_res: f64,
    pub k_pulses: u32,
    pub e_p: f64,
    /// SNR of the direct path at `r_ref`.
    pub snr_ref_db: f64,
    /// Reference range (m) for the two-way `1/r²` amplitude loss.
    pub r_ref: f64,
}

impl GroundScenario {
    /// Dry asphalt at 79 GHz (λ = 3.8 mm, ε_r = 4, γ = 0.005 S/m) with the
    /// radar 1 m above the road.
    pub fn asphalt() -> Self {
        Self {
            h_r: 1.0,
            theta: 0.0,
            lambda: 3.8e-3,
            eps_r: 4.0,
            gamma_cond: 0.005,
            gamma_t: C64::new(1.0, 0.0),
            range_grid: linspace(2.0, 150.0, 14_801),
            v: 2.0,
            r_res: 0.5,
            v_res: 0.05,
            k_pulses: 1,
            e_p: 1.0,
            snr_ref_db: 30.0,
            r_ref: 100.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_r > 0.0) {
            return Err(Error::invalid("radar height must be positive"));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::invalid("wavelength must be positive"));
        }
        if !(self.eps_r >= 1.0) {
            return Err(Error::invalid("dielectric constant must be at least 1"));
        }
        if !(self.gamma_cond >= 0.0) {
            return Err(Error::invalid("conductivity must be non-negative"));
        }
        if !(self.theta.abs() < PI / 2.0) {
            return Err(Error::invalid("target DOA must lie inside (-90°, 90°)"));
        }
        if self.range_grid.is_empty()
            || self.range_grid[0] <= 0.0
            || self.range_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::invalid(
                "range grid must be positive and strictly increasing",
            ));
        }
        if !(self.r_res > 0.0 && self.v_res > 0.0 && self.v >= 0.0) {
            return Err(Error::invalid(
                "resolutions must be positive and velocity non-negative",
            ));
        }
        if self.k_pulses == 0 || !(self.e_p > 0.0) || !(self.r_ref > 0.0) {
            return Err(Error::invalid(
                "pulses, chirp energy and reference range must be positive",
            ));
        }
        Ok(())
    }

    /// Complex relative permittivity `ε_r − j·60·λ·γ`.
    pub fn permittivity(&self) -> C64 {
        C64::new(self.eps_r, -60.0 * self.lambda * self.gamma_cond)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![a];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + i as f64 * step).collect()
}

/// Indirect path length and (positive) grazing angle of the ground bounce.
pub fn indirect_geometry(r_d: f64, theta: f64, h_r: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let r_i = ((r_d * c).powi(2) + (r_d * s + 2.0 * h_r).powi(2)).sqrt();
    let psi = (r_d * c / r_i).clamp(-1.0, 1.0).acos();
    (r_i, psi)
}

/// Vertical-polarization Fresnel reflection coefficient at grazing angle
/// `psi` for complex permittivity `ε_r − j60λγ`, principal square root.
pub fn reflection_coefficient(psi: f64, eps_r: f64, gamma_cond: f64, lambda: f64) -> C64 {
    let eps = C64::new(eps_r, -60.0 * lambda * gamma_cond);
    let (s, c) = psi.sin_cos();
    let root = (eps - C64::new(c * c, 0.0)).sqrt();
    let num = eps * s - root;
    let den = eps * s + root;
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointBound {
    Bound(BoundBreakdown),
    /// Direct and indirect echoes fall in different range-Doppler cells.
    OutOfModel,
    /// The closed form is numerically invalid (fully destructive paths).
    Degenerate,
}

#[derive(Debug, Clone, Copy)]
pub struct RangePoint {
    pub r_d: f64,
    pub r_i: f64,
    /// Grazing angle (positive, rad); the array sees the reflection at `-psi`.
    pub psi: f64,
    pub gamma_r: C64,
    pub alpha_d: C64,
    pub alpha_i: C64,
    pub smr_db: f64,
    pub delta_phi: f64,
    pub snr_db: f64,
    pub same_cell: bool,
    pub crb_theta: f64,
    pub bound: PointBound,
}

impl RangePoint {
    /// `|α_i / α_d|`
    pub fn amplitude_ratio(&self) -> f64 {
        self.alpha_i.norm() / self.alpha_d.norm()
    }

    pub fn mcrb_theta(&self) -> Option<f64> {
        match self.bound {
            PointBound::Bound(b) => Some(b.mcrb_theta),
            _ => None,
        }
    }
}

/// Noise power giving `snr_ref_db` for the direct path at `r_ref`.
fn noise_power(scn: &GroundScenario) -> f64 {
    scn.gamma_t.norm_sqr() / 10f64.powf(scn.snr_ref_db / 10.0)
}

/// Multipath scene seen by `geom` for a target at range `r_d`.
pub fn scene_at(scn: &GroundScenario, geom: &ArrayGeometry, r_d: f64) -> Result<MultipathScene> {
    let (r_i, psi) = indirect_geometry(r_d, scn.theta, scn.h_r);
    let gamma_r = reflection_coefficient(psi, scn.eps_r, scn.gamma_cond, scn.lambda);
    let (alpha_d, alpha_i) = path_coefficients(&PathGeometryInputs {
        gamma_t: scn.gamma_t,
        gamma_r,
        alpha_0d: (scn.r_ref / r_d).powi(2),
        alpha_0i: (scn.r_ref / r_i).powi(2),
        r_d,
        r_i,
        lambda: scn.lambda,
    })?;
    MultipathScene::new(
        geom.clone(),
        scn.theta,
        -psi,
        alpha_d,
        alpha_i,
        scn.k_pulses,
        scn.e_p,
        noise_power(scn),
    )
}

pub fn range_point(scn: &GroundScenario, geom: &ArrayGeometry, r_d: f64) -> Result<RangePoint> {
    if !(r_d > 0.0) {
        return Err(Error::invalid("target range must be positive"));
    }
    let (r_i, psi) = indirect_geometry(r_d, scn.theta, scn.h_r);
    let gamma_r = reflection_coefficient(psi, scn.eps_r, scn.gamma_cond, scn.lambda);
    let scene = scene_at(scn, geom, r_d)?;
    let same_cell = (r_i - r_d) < scn.r_res && scn.v * (1.0 - psi.cos()) < scn.v_res;
    let bound = if !same_cell {
        PointBound::OutOfModel
    } else {
        match mcrb_theta_closed(&scene) {
            Ok(b) => PointBound::Bound(b),
            Err(Error::DegenerateBound { .. }) => PointBound::Degenerate,
            Err(e) => return Err(e),
        }
    };
    Ok(RangePoint {
        r_d,
        r_i,
        psi,
        gamma_r,
        alpha_d: scene.alpha_d,
        alpha_i: scene.alpha_i,
        smr_db: 10.0 * scene.smr().log10(),
        delta_phi: scene.delta_phi(),
        snr_db: 10.0 * scene.snr().log10(),
        same_cell,
        crb_theta: crb_theta(&scene)?,
        bound,
    })
}

/// Large-range phase difference `wrap(2π(r_d − r_i)/λ + π)`.
pub fn asymptotic_delta_phi(scn: &GroundScenario, r_d: f64) -> f64 {
    let (r_i, _) = indirect_geometry(r_d, scn.theta, scn.h_r);
    wrap_phase(2.0 * PI * (r_d - r_i) / scn.lambda + PI)
}

/// Range points for every geometry, in grid order.
pub fn range_sweep(scn: &GroundScenario, geoms: &[ArrayGeometry]) -> Result<Vec<Vec<RangePoint>>> {
    scn.validate()?;
    geoms
        .iter()
        .map(|g| {
            scn.range_grid
                .par_iter()
                .map(|&r| range_point(scn, g, r))
                .collect()
        })
        .collect()
}
