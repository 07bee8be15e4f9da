//! Colocated transmit/receive linear arrays.
//!
//! Element positions are stored in wavelengths and re-centered at
//! construction, so `aᴴ ȧ = 0` holds for every steering set. Angles are
//! measured from broadside and the steering phase uses `sin θ`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::{trace_inner, CMatrix, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    tx_positions: Vec<f64>,
    rx_positions: Vec<f64>,
}

/// Normalized steering vectors at one angle together with their first and
/// second angular derivatives (per radian).
#[derive(Debug, Clone)]
pub struct SteeringSet {
    pub theta: f64,
    pub a_r: Vec<C64>,
    pub a_t: Vec<C64>,
    pub da_r: Vec<C64>,
    pub da_t: Vec<C64>,
    pub dda_r: Vec<C64>,
    pub dda_t: Vec<C64>,
}

/// MIMO steering matrices for a target at θ and a reflector at ψ.
#[derive(Debug, Clone)]
pub struct MimoMatrices {
    /// `a_r(θ) a_tᵀ(θ)`
    pub a_d: CMatrix,
    /// `a_r(ψ) a_tᵀ(θ) + a_r(θ) a_tᵀ(ψ)`
    pub a_i: CMatrix,
    /// `∂A_d/∂θ`
    pub da_d: CMatrix,
    /// `∂²A_d/∂θ²`
    pub dda_d: CMatrix,
}

/// Transmit and receive gains (dB) at one look angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGain {
    pub angle: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
}

fn centered(positions: &[f64], which: &str) -> Result<Vec<f64>> {
    if positions.is_empty() {
        return Err(Error::invalid(format!(
            "{which} array needs at least one element"
        )));
    }
    if positions.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid(format!("{which} positions must be finite")));
    }
    let mean = positions.iter().sum::<f64>() / positions.len() as f64;
    Ok(positions.iter().map(|p| p - mean).collect())
}

fn ula(count: usize, spacing: f64) -> Vec<f64> {
    let mid = (count as f64 - 1.0) / 2.0;
    (0..count).map(|i| (i as f64 - mid) * spacing).collect()
}

impl ArrayGeometry {
    /// Builds a geometry from explicit positions (wavelengths). Both lists are
    /// shifted to zero mean.
    pub fn new(tx_positions: &[f64], rx_positions: &[f64]) -> Result<Self> {
        Ok(Self {
            tx_positions: centered(tx_positions, "transmit")?,
            rx_positions: centered(rx_positions, "receive")?,
        })
    }

    /// Half-wavelength receive ULA of `m_r` elements with a sparse transmit ULA
    /// of `m_t` elements spaced by the receive aperture (`m_r / 2`
    /// wavelengths), so the virtual array is a filled half-wavelength ULA of
    /// `m_t · m_r` elements.
    pub fn standard_virtual_ula(m_t: usize, m_r: usize) -> Result<Self> {
        if m_t == 0 || m_r == 0 {
            return Err(Error::invalid("element counts must be positive"));
        }
        Self::new(&ula(m_t, m_r as f64 / 2.0), &ula(m_r, 0.5))
    }

    pub fn tx_positions(&self) -> &[f64] {
        &self.tx_positions
    }

    pub fn rx_positions(&self) -> &[f64] {
        &self.rx_positions
    }

    pub fn m_t(&self) -> usize {
        self.tx_positions.len()
    }

    pub fn m_r(&self) -> usize {
        self.rx_positions.len()
    }

    /// Geometry with transmit and receive roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            tx_positions: self.rx_positions.clone(),
            rx_positions: self.tx_positions.clone(),
        }
    }

    /// All pairwise sums of transmit and receive positions, sorted.
    pub fn virtual_positions(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .tx_positions
            .iter()
            .flat_map(|t| self.rx_positions.iter().map(move |r| t + r))
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Nominal beamwidth in radians, taken as the inverse of the virtual
    /// aperture extent in wavelengths. Infinite for a single virtual element.
    pub fn beamwidth(&self) -> f64 {
        let v = self.virtual_positions();
        let extent = v[v.len() - 1] - v[0];
        if extent > 0.0 {
            1.0 / extent
        } else {
            f64::INFINITY
        }
    }

    pub fn steering(&self, theta: f64) -> SteeringSet {
        let (s, c) = theta.sin_cos();
        let build = |pos: &[f64]| {
            let norm = 1.0 / (pos.len() as f64).sqrt();
            let mut a = Vec::with_capacity(pos.len());
            let mut da = Vec::with_capacity(pos.len());
            let mut dda = Vec::with_capacity(pos.len());
            for &p in pos {
                let k = 2.0 * PI * p;
                let am = C64::from_polar(norm, k * s);
                let d1 = C64::new(0.0, k * c);
                a.push(am);
                da.push(d1 * am);
                dda.push((d1 * d1 - C64::new(0.0, k * s)) * am);
            }
            (a, da, dda)
        };
        let (a_r, da_r, dda_r) = build(&self.rx_positions);
        let (a_t, da_t, dda_t) = build(&self.tx_positions);
        SteeringSet {
            theta,
            a_r,
            a_t,
            da_r,
            da_t,
            dda_r,
            dda_t,
        }
    }

    /// Receive and transmit steering vectors without derivatives.
    pub fn steering_vectors(&self, theta: f64) -> (Vec<C64>, Vec<C64>) {
        let s = theta.sin();
        let build = |pos: &[f64]| {
            let norm = 1.0 / (pos.len() as f64).sqrt();
            pos.iter()
                .map(|&p| C64::from_polar(norm, 2.0 * PI * p * s))
                .collect::<Vec<_>>()
        };
        (build(&self.rx_positions), build(&self.tx_positions))
    }

    /// Transmit and receive beampatterns steered to `steer`, in dB.
    pub fn beampattern(&self, steer: f64, grid: &[f64]) -> Vec<BeamGain> {
        let (r0, t0) = self.steering_vectors(steer);
        grid.iter()
            .map(|&angle| {
                let (r, t) = self.steering_vectors(angle);
                BeamGain {
                    angle,
                    tx_gain_db: 20.0 * inner(&t0, &t).norm().log10(),
                    rx_gain_db: 20.0 * inner(&r0, &r).norm().log10(),
                }
            })
            .collect()
    }

    /// Array information scalar `E_Ȧ` at `theta`.
    pub fn e_adot(&self, theta: f64) -> f64 {
        e_adot(&self.steering(theta))
    }
}

/// `xᴴ y`
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

/// `x yᵀ` (no conjugation).
pub fn outer(x: &[C64], y: &[C64]) -> CMatrix {
    CMatrix::from_fn(x.len(), y.len(), |i, j| x[i] * y[j])
}

/// `E_Ȧ = ‖ȧ_r‖² + ‖ȧ_t‖² = tr(Ȧ_d Ȧ_dᴴ)`.
pub fn e_adot(s: &SteeringSet) -> f64 {
    norm_sqr(&s.da_r) + norm_sqr(&s.da_t)
}

/// Direct and indirect MIMO steering matrices plus the direct-path
/// derivatives used by the error-score matrix.
pub fn mimo_matrices(target: &SteeringSet, reflect: &SteeringSet) -> MimoMatrices {
    let a_d = outer(&target.a_r, &target.a_t);
    let a_i = outer(&reflect.a_r, &target.a_t) + outer(&target.a_r, &reflect.a_t);
    let da_d = outer(&target.da_r, &target.a_t) + outer(&target.a_r, &target.da_t);
    let dda_d = outer(&target.dda_r, &target.a_t)
        + outer(&target.da_r, &target.da_t) * C64::new(2.0, 0.0)
        + outer(&target.a_r, &target.dda_t);
    MimoMatrices {
        a_d,
        a_i,
        da_d,
        dda_d,
    }
}

/// Residuals of the trace identities that hold for centered geometries:
/// `tr(A_d A_dᴴ) − 1`, `tr(Ȧ_d A_dᴴ)` and `tr(Ä_dᴴ A_d) + E_Ȧ`.
#[derive(Debug, Clone, Copy)]
pub struct TraceIdentities {
    pub norm_residual: f64,
    pub first_order: f64,
    pub second_order: f64,
    pub e_adot: f64,
}

pub fn trace_identities(m: &MimoMatrices) -> TraceIdentities {
    let e = trace_inner(&m.da_d, &m.da_d).re;
    TraceIdentities {
        norm_residual: (trace_inner(&m.a_d, &m.a_d).re - 1.0).abs(),
        first_order: trace_inner(&m.a_d, &m.da_d).norm(),
        second_order: (trace_inner(&m.dda_d, &m.a_d) + e).norm(),
        e_adot: e,
    }
}
