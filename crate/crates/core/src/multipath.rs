//! True signal model: a direct echo plus a single-bounce indirect echo
//! reaching the array through both the transmit and receive sides.
//!
//! Everything here lives in the compressed domain. After fast-time matched
//! filtering with orthogonal waveforms and coherent integration over `K`
//! pulses, one range-Doppler cell reduces to an `M_r × M_t` statistic
//!
//! ```text
//! Y = K·E_p·(α_d A_d + α_i A_i) + W,   W_mn ~ CN(0, K·E_p·σ_w²)
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::array::{mimo_matrices, ArrayGeometry, MimoMatrices};
use crate::error::{Error, Result};
use crate::{wrap_phase, CMatrix, C64};

#[derive(Debug, Clone)]
pub struct MultipathScene {
    pub geom: ArrayGeometry,
    /// Target DOA (radians).
    pub theta: f64,
    /// Reflector DOA (radians).
    pub psi: f64,
    pub alpha_d: C64,
    pub alpha_i: C64,
    pub k_pulses: u32,
    pub e_p: f64,
    pub sigma_w2: f64,
}

/// Physical inputs to the path-coefficient model.
#[derive(Debug, Clone, Copy)]
pub struct PathGeometryInputs {
    pub gamma_t: C64,
    pub gamma_r: C64,
    pub alpha_0d: f64,
    pub alpha_0i: f64,
    pub r_d: f64,
    pub r_i: f64,
    pub lambda: f64,
}

impl PathGeometryInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::invalid("wavelength must be positive"));
        }
        if !(self.r_d > 0.0) || !(self.r_i >= self.r_d) {
            return Err(Error::invalid("path lengths must satisfy r_i >= r_d > 0"));
        }
        if !(self.alpha_0d >= 0.0 && self.alpha_0i >= 0.0) {
            return Err(Error::invalid(
                "propagation-loss magnitudes must be non-negative",
            ));
        }
        Ok(())
    }
}

/// Direct and indirect complex path coefficients.
pub fn path_coefficients(p: &PathGeometryInputs) -> Result<(C64, C64)> {
    p.validate()?;
    let phi_d = 2.0 * PI * p.r_d / p.lambda;
    let phi_i = 2.0 * PI * p.r_i / p.lambda;
    let gt = p.gamma_t.norm();
    let alpha_d = C64::from_polar(p.alpha_0d * gt, p.gamma_t.arg() + phi_d);
    let alpha_i = C64::from_polar(
        p.alpha_0i * gt * p.gamma_r.norm(),
        p.gamma_t.arg() + p.gamma_r.arg() + phi_i,
    );
    Ok((alpha_d, alpha_i))
}

impl MultipathScene {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        geom: ArrayGeometry,
        theta: f64,
        psi: f64,
        alpha_d: C64,
        alpha_i: C64,
        k_pulses: u32,
        e_p: f64,
        sigma_w2: f64,
    ) -> Result<Self> {
        let scene = Self {
            geom,
            theta,
            psi,
            alpha_d,
            alpha_i,
            k_pulses,
            e_p,
            sigma_w2,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// Scene parameterized by SNR, SMR and phase difference. The direct path
    /// is the real-positive unit reference; the phase difference is carried
    /// by the indirect coefficient.
    #[allow(clippy::too_many_arguments)]
    pub fn from_ratios(
        geom: ArrayGeometry,
        theta: f64,
        psi: f64,
        snr_db: f64,
        smr_db: f64,
        delta_phi: f64,
        k_pulses: u32,
        e_p: f64,
    ) -> Result<Self> {
        if ![snr_db, smr_db, delta_phi]
            .iter()
            .all(|v| v.is_finite() || *v == f64::INFINITY)
        {
            return Err(Error::invalid("ratios must be finite"));
        }
        let alpha_i = if smr_db == f64::INFINITY {
            C64::new(0.0, 0.0)
        } else {
            C64::from_polar(10f64.powf(-smr_db / 20.0), -delta_phi)
        };
        Self::new(
            geom,
            theta,
            psi,
            C64::new(1.0, 0.0),
            alpha_i,
            k_pulses,
            e_p,
            10f64.powf(-snr_db / 10.0),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_w2 > 0.0) || !self.sigma_w2.is_finite() {
            return Err(Error::invalid("noise power must be positive and finite"));
        }
        if !(self.e_p > 0.0) || !self.e_p.is_finite() {
            return Err(Error::invalid("chirp energy must be positive and finite"));
        }
        if self.k_pulses == 0 {
            return Err(Error::invalid("at least one pulse is required"));
        }
        let half = PI / 2.0;
        if !(self.theta.abs() < half) || !(self.psi.abs() < half) {
            return Err(Error::invalid("DOAs must lie strictly inside (-90°, 90°)"));
        }
        if !(self.alpha_d.re.is_finite() && self.alpha_d.im.is_finite())
            || !(self.alpha_i.re.is_finite() && self.alpha_i.im.is_finite())
        {
            return Err(Error::invalid("path coefficients must be finite"));
        }
        Ok(())
    }

    /// Same scene with the indirect path removed.
    pub fn without_multipath(&self) -> Self {
        Self {
            alpha_i: C64::new(0.0, 0.0),
            ..self.clone()
        }
    }

    /// `|α_d|² / |α_i|²`, `+∞` when the indirect path is absent.
    pub fn smr(&self) -> f64 {
        let pi = self.alpha_i.norm_sqr();
        if pi == 0.0 {
            f64::INFINITY
        } else {
            self.alpha_d.norm_sqr() / pi
        }
    }

    pub fn snr(&self) -> f64 {
        self.alpha_d.norm_sqr() / self.sigma_w2
    }

    /// `wrap(∠α_d − ∠α_i)` in `(−π, π]`.
    pub fn delta_phi(&self) -> f64 {
        wrap_phase(self.alpha_d.arg() - self.alpha_i.arg())
    }

    pub fn matrices(&self) -> MimoMatrices {
        mimo_matrices(
            &self.geom.steering(self.theta),
            &self.geom.steering(self.psi),
        )
    }

    /// Noise-free compressed statistic `K·E_p·(α_d A_d + α_i A_i)`.
    pub fn compressed_mean(&self) -> CMatrix {
        let m = self.matrices();
        let gain = self.k_pulses as f64 * self.e_p;
        (m.a_d * self.alpha_d + m.a_i * self.alpha_i) * C64::new(gain, 0.0)
    }

    /// Per-entry noise variance of the compressed statistic.
    pub fn compressed_noise_var(&self) -> f64 {
        self.k_pulses as f64 * self.e_p * self.sigma_w2
    }

    /// One realization of the compressed statistic. The same seed always
    /// yields the same noise.
    pub fn synthesize_compressed(&self, noise_seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        self.synthesize_with(&self.compressed_mean(), &mut rng)
    }

    /// Adds circular Gaussian noise to a precomputed mean.
    pub fn synthesize_with<R: Rng + ?Sized>(&self, mean: &CMatrix, rng: &mut R) -> CMatrix {
        let sd = (self.compressed_noise_var() / 2.0).sqrt();
        mean.map(|m| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m + C64::new(sd * re, sd * im)
        })
    }
}
