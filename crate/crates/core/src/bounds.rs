//! Conventional and misspecified bounds on the target DOA.
//!
//! The unknown-parameter vector of the assumed (direct-path only) model is
//! ordered `[Re α_d, Im α_d, τ_d, ω_D, θ]`. Under orthogonal waveforms and a
//! shared range-Doppler cell the FIM is diagonal and the error-score matrix
//! reduces to `C_D = (2 K E_p / σ²) · Re{Z(ζ₁..ζ₅)}`.

use nalgebra::{Matrix5, SVD};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::array::inner;
use crate::error::{Error, Result};
use crate::multipath::MultipathScene;
use crate::search::SearchConfig;
use crate::{trace_inner, CMatrix, C64};

/// Index of θ in the parameter vector.
pub const THETA: usize = 4;

/// Ordering of the assumed-model parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiVector {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub tau_d: f64,
    pub omega_dd: f64,
    pub theta: f64,
}

impl XiVector {
    pub fn to_array(&self) -> [f64; 5] {
        [
            self.alpha_re,
            self.alpha_im,
            self.tau_d,
            self.omega_dd,
            self.theta,
        ]
    }
}

/// Delay and Doppler information scalars. They only scale the τ and ω rows,
/// which decouple from θ, so unit defaults are used unless overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationScalars {
    pub f_tau: f64,
    pub f_omega: f64,
}

impl Default for InformationScalars {
    fn default() -> Self {
        Self {
            f_tau: 1.0,
            f_omega: 1.0,
        }
    }
}

impl InformationScalars {
    fn validate(&self) -> Result<()> {
        if self.f_tau > 0.0 && self.f_omega > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(
                "delay/Doppler information scalars must be positive",
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaSet {
    pub zeta1: f64,
    pub zeta2: f64,
    pub zeta3: f64,
    pub zeta4: C64,
    pub zeta5: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundBreakdown {
    pub crb_theta: f64,
    pub m_theta_theta: f64,
    pub theta_a: f64,
    pub b_theta_theta: f64,
    pub mcrb_theta: f64,
}

impl BoundBreakdown {
    pub fn rcrb(&self) -> f64 {
        self.crb_theta.sqrt()
    }

    pub fn rmcrb(&self) -> f64 {
        self.mcrb_theta.sqrt()
    }

    fn assemble(crb: f64, m: f64, theta: f64, theta_a: f64) -> Self {
        let b = (theta - theta_a).powi(2);
        Self {
            crb_theta: crb,
            m_theta_theta: m,
            theta_a,
            b_theta_theta: b,
            mcrb_theta: m + b,
        }
    }
}

/// `2 K E_p / σ²`, the common scale of the FIM and the error-score matrix.
pub fn information_scale(scene: &MultipathScene) -> f64 {
    2.0 * scene.k_pulses as f64 * scene.e_p / scene.sigma_w2
}

fn checked_e_adot(scene: &MultipathScene) -> Result<f64> {
    let e = scene.geom.e_adot(scene.theta);
    if e > 0.0 {
        Ok(e)
    } else {
        Err(Error::SingularInformation { e_adot: e })
    }
}

/// Diagonal FIM of the direct-path model.
pub fn fim(scene: &MultipathScene, info: InformationScalars) -> Result<Matrix5<f64>> {
    scene.validate()?;
    info.validate()?;
    let e = checked_e_adot(scene)?;
    let c = 2.0 * scene.k_pulses as f64 / scene.sigma_w2;
    let a2 = scene.alpha_d.norm_sqr();
    Ok(Matrix5::from_diagonal(&nalgebra::Vector5::new(
        c * scene.e_p,
        c * scene.e_p,
        c * a2 * info.f_tau,
        c * a2 * info.f_omega,
        c * scene.e_p * a2 * e,
    )))
}

/// `CRB(θ) = 1 / (2 · SNR · K · E_p · E_Ȧ)`.
pub fn crb_theta(scene: &MultipathScene) -> Result<f64> {
    scene.validate()?;
    let e = checked_e_adot(scene)?;
    Ok(1.0 / (2.0 * scene.snr() * scene.k_pulses as f64 * scene.e_p * e))
}

/// The ζ parameters of the reduced error-score matrix. The slow-time scale
/// multiplying ζ₄ is taken as 1.
pub fn zeta_set(scene: &MultipathScene, info: InformationScalars) -> Result<ZetaSet> {
    scene.validate()?;
    info.validate()?;
    let m = scene.matrices();
    let e = trace_inner(&m.da_d, &m.da_d).re;
    let a2 = scene.alpha_d.norm_sqr();
    let t2 = trace_inner(&m.dda_d, &m.a_i);
    Ok(ZetaSet {
        zeta1: a2 * info.f_tau / scene.e_p,
        zeta2: a2 * info.f_omega / scene.e_p,
        zeta3: a2 * e - (scene.alpha_d.conj() * scene.alpha_i * t2).re,
        zeta4: scene.alpha_i * trace_inner(&m.a_d, &m.a_i),
        zeta5: scene.alpha_i * trace_inner(&m.da_d, &m.a_i),
    })
}

/// `Re{Z}` with rows/columns ordered as [`XiVector`].
pub fn z_matrix(z: &ZetaSet) -> Matrix5<f64> {
    let mut out = Matrix5::zeros();
    out[(0, 0)] = 1.0;
    out[(1, 1)] = 1.0;
    out[(2, 2)] = z.zeta1;
    out[(3, 3)] = z.zeta2;
    out[(4, 4)] = z.zeta3;
    // Re{-j ζ₄} = Im ζ₄, Re{-ζ₄}, Re{-ζ₅}, Re{j ζ₅} = -Im ζ₅
    let entries = [
        (0, 3, z.zeta4.im),
        (1, 3, -z.zeta4.re),
        (0, 4, -z.zeta5.re),
        (1, 4, -z.zeta5.im),
    ];
    for (i, j, v) in entries {
        out[(i, j)] = v;
        out[(j, i)] = v;
    }
    out
}

/// Error-score matrix `C_D = scale · Re{Z}` with `scale = 2 K E_p / σ²`.
pub fn cd_matrix(z: &ZetaSet, scale: f64) -> Matrix5<f64> {
    z_matrix(z) * scale
}

/// Default pseudo-true search: ±60° around θ (clipped inside ±89°), coarse
/// step of one twentieth of the beamwidth, 1e-7 rad refinement.
pub fn default_theta_a_search(scene: &MultipathScene) -> SearchConfig {
    let lim = 89.0 * PI / 180.0;
    let span = 60.0 * PI / 180.0;
    let bw = scene.geom.beamwidth();
    SearchConfig {
        lo: (scene.theta - span).max(-lim),
        hi: (scene.theta + span).min(lim),
        coarse_step: if bw.is_finite() { bw / 20.0 } else { 1e-3 },
        refine_tol: 1e-7,
    }
}

/// `aᵣᴴ(θ') M a_t*(θ') = tr(Aᴴ(θ') M)`.
pub fn project(scene_geom: &crate::ArrayGeometry, m: &CMatrix, theta: f64) -> C64 {
    let (a_r, a_t) = scene_geom.steering_vectors(theta);
    let mut acc = C64::new(0.0, 0.0);
    for (j, at) in a_t.iter().enumerate() {
        let col: C64 = m
            .column(j)
            .iter()
            .zip(&a_r)
            .map(|(v, ar)| ar.conj() * v)
            .sum();
        acc += at.conj() * col;
    }
    acc
}

fn check_span(scene: &MultipathScene, search: &SearchConfig) -> Result<()> {
    search.validate()?;
    if !search.contains(scene.theta) {
        return Err(Error::invalid(
            "pseudo-true search span must contain the true DOA",
        ));
    }
    Ok(())
}

/// Pseudo-true DOA: the KLD projection of the true mean onto the direct-path
/// model with the complex amplitude concentrated out,
/// `argmax_θ' |tr(Aᴴ(θ') (α_d A_d + α_i A_i))|²`.
pub fn theta_a(scene: &MultipathScene, search: &SearchConfig) -> Result<f64> {
    scene.validate()?;
    check_span(scene, search)?;
    if scene.alpha_i.norm_sqr() == 0.0 {
        return Ok(scene.theta);
    }
    let (r_d, t_d) = scene.geom.steering_vectors(scene.theta);
    let (r_i, t_i) = scene.geom.steering_vectors(scene.psi);
    let terms = [
        (scene.alpha_d, &r_d, &t_d),
        (scene.alpha_i, &r_i, &t_d),
        (scene.alpha_i, &r_d, &t_i),
    ];
    search.argmax(
        |t| project_outer_sum(&scene.geom, &terms, t).norm_sqr(),
        scene.theta,
    )
}

/// [`project`] for a matrix given as `Σ c·x yᵀ`, without forming it.
fn project_outer_sum(
    geom: &crate::ArrayGeometry,
    terms: &[(C64, &Vec<C64>, &Vec<C64>)],
    theta: f64,
) -> C64 {
    let (a_r, a_t) = geom.steering_vectors(theta);
    terms
        .iter()
        .map(|(c, x, y)| c * inner(&a_r, x) * inner(&a_t, y))
        .sum()
}

/// Pseudo-true DOA using the literal weighting
/// `|tr(Aᴴ(θ')A_d) + α_i/(α_d+α_i) · tr(Aᴴ(θ')A_i)|²`.
pub fn theta_a_sum_weighted(scene: &MultipathScene, search: &SearchConfig) -> Result<f64> {
    scene.validate()?;
    check_span(scene, search)?;
    let sum = scene.alpha_d + scene.alpha_i;
    if sum.norm_sqr() == 0.0 {
        return Err(Error::invalid(
            "alpha_d + alpha_i vanishes; weighting undefined",
        ));
    }
    let w = scene.alpha_i / sum;
    let m = scene.matrices();
    let target = m.a_d + m.a_i * w;
    search.argmax(|t| project(&scene.geom, &target, t).norm_sqr(), scene.theta)
}

#[derive(Debug, Clone, Copy)]
pub struct ClosedFormOptions {
    pub search: Option<SearchConfig>,
    /// Relative degeneracy threshold: the squared denominator must exceed
    /// `eps_den_rel · SMR · E_Ȧ²`.
    pub eps_den_rel: f64,
}

impl Default for ClosedFormOptions {
    fn default() -> Self {
        Self {
            search: None,
            eps_den_rel: 1e-9,
        }
    }
}

pub fn mcrb_theta_closed(scene: &MultipathScene) -> Result<BoundBreakdown> {
    mcrb_theta_closed_with(scene, &ClosedFormOptions::default())
}

/// Closed-form MCRB on θ:
///
/// ```text
/// M_θθ = CRB · E_Ȧ (|tr(Ȧ_dᴴ A_i)|² + SMR·E_Ȧ) / (Re{tr(Ä_dᴴ A_i) e^{-jΔφ}} − √SMR·E_Ȧ)²
/// ```
///
/// plus the squared pseudo-true bias. Without an indirect path the
/// `SMR → ∞` limit `M_θθ = CRB` is returned.
pub fn mcrb_theta_closed_with(
    scene: &MultipathScene,
    opts: &ClosedFormOptions,
) -> Result<BoundBreakdown> {
    let crb = crb_theta(scene)?;
    let smr = scene.smr();
    if smr.is_infinite() {
        return Ok(BoundBreakdown::assemble(crb, crb, scene.theta, scene.theta));
    }
    let m = scene.matrices();
    let e = trace_inner(&m.da_d, &m.da_d).re;
    let t1 = trace_inner(&m.da_d, &m.a_i);
    let t2 = trace_inner(&m.dda_d, &m.a_i);
    let rot = C64::from_polar(1.0, -scene.delta_phi());
    let den = ((t2 * rot).re - smr.sqrt() * e).powi(2);
    let threshold = opts.eps_den_rel * smr * e * e;
    if !(den >= threshold) || den == 0.0 {
        return Err(Error::DegenerateBound {
            denominator: den,
            threshold,
        });
    }
    let m_tt = crb * e * (t1.norm_sqr() + smr * e) / den;
    let search = opts.search.unwrap_or_else(|| default_theta_a_search(scene));
    let ta = theta_a(scene, &search)?;
    Ok(BoundBreakdown::assemble(crb, m_tt, scene.theta, ta))
}

#[derive(Debug, Clone, Copy)]
pub struct SandwichOptions {
    pub info: InformationScalars,
    pub search: Option<SearchConfig>,
    /// Largest accepted condition number of `Re{Z}`.
    pub max_condition: f64,
}

impl Default for SandwichOptions {
    fn default() -> Self {
        Self {
            info: InformationScalars::default(),
            search: None,
            max_condition: 1e12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sandwich {
    /// `C_D⁻¹ J C_D⁻¹`
    pub covariance: Matrix5<f64>,
    pub condition: f64,
    pub breakdown: BoundBreakdown,
}

/// 2-norm condition number from singular values.
pub fn condition_number(m: &Matrix5<f64>) -> f64 {
    let sv = SVD::new(*m, false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Full 5×5 MCRB covariance term by numerical inversion of the error-score
/// matrix; element (θ, θ) is `M_θθ`.
pub fn mcrb_sandwich(scene: &MultipathScene, opts: &SandwichOptions) -> Result<Sandwich> {
    let j = fim(scene, opts.info)?;
    let z = zeta_set(scene, opts.info)?;
    let zm = z_matrix(&z);
    let condition = condition_number(&zm);
    if !(condition <= opts.max_condition) {
        return Err(Error::IllConditioned { condition });
    }
    let scale = information_scale(scene);
    let cd_inv = zm
        .try_inverse()
        .ok_or(Error::IllConditioned { condition })?
        / scale;
    let covariance = cd_inv * j * cd_inv;
    let crb = crb_theta(scene)?;
    let search = opts.search.unwrap_or_else(|| default_theta_a_search(scene));
    let ta = theta_a(scene, &search)?;
    Ok(Sandwich {
        covariance,
        condition,
        breakdown: BoundBreakdown::assemble(crb, covariance[(THETA, THETA)], scene.theta, ta),
    })
}

/// `ȧ_rᴴ a_r(ψ) + ȧ_tᴴ a_t(ψ)` plus the two cross terms, i.e. `tr(Ȧ_dᴴ A_i)`
/// expanded over the raw steering vectors.
pub fn expanded_trace_dad_ai(scene: &MultipathScene) -> C64 {
    let st = scene.geom.steering(scene.theta);
    let sp = scene.geom.steering(scene.psi);
    // tr((ȧ_r a_tᵀ + a_r ȧ_tᵀ)ᴴ (a_r(ψ) a_tᵀ + a_r a_tᵀ(ψ)))
    inner(&st.da_r, &sp.a_r) * inner(&st.a_t, &st.a_t)
        + inner(&st.da_r, &st.a_r) * inner(&st.a_t, &sp.a_t)
        + inner(&st.a_r, &sp.a_r) * inner(&st.da_t, &st.a_t)
        + inner(&st.a_r, &st.a_r) * inner(&st.da_t, &sp.a_t)
}
