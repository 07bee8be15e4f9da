//! Analytic self-checks of the library.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use mpmcrb::array::{mimo_matrices, trace_identities};
use mpmcrb::bounds::{
    default_theta_a_search, mcrb_sandwich, mcrb_theta_closed, theta_a, zeta_set,
    InformationScalars, SandwichOptions,
};
use mpmcrb::estimation::{mml_doa, EstimatorConfig};
use mpmcrb::scenario::reflection_coefficient;
use mpmcrb::{ArrayGeometry, Error, MultipathScene, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SelftestOptions {
    /// Perturbs the second steering derivative before the identity checks.
    pub perturb_second_derivative: bool,
}

/// Closed form against the sandwich over random scenes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedVsSandwich {
    pub scenes: usize,
    pub degenerate: usize,
    pub max_rel_deviation: f64,
    pub median_rel_deviation: f64,
    /// Largest residual of `closed·ζ₃² = sandwich·(ζ₃ − |ζ₅|²)²`.
    pub max_schur_residual: f64,
}

/// Random scenes on the 3×4 array: SMR uniform in [−10, 30] dB, |Δθ| within
/// two beamwidths, Δφ uniform, SNR 10 dB.
pub fn closed_vs_sandwich(n: usize, seed: u64) -> Result<ClosedVsSandwich, Error> {
    let g = ArrayGeometry::standard_virtual_ula(3, 4)?;
    let bw = g.beamwidth();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut devs = Vec::with_capacity(n);
    let mut schur: f64 = 0.0;
    let mut degenerate = 0;
    for _ in 0..n {
        let dtheta = rng.random_range(-2.0 * bw..2.0 * bw);
        let smr = rng.random_range(-10.0..30.0);
        let dphi = rng.random_range(-PI..PI);
        let s = MultipathScene::from_ratios(g.clone(), 0.0, -dtheta, 10.0, smr, dphi, 1, 1.0)?;
        let closed = match mcrb_theta_closed(&s) {
            Ok(b) => b,
            Err(Error::DegenerateBound { .. }) | Err(Error::IllConditioned { .. }) => {
                degenerate += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let sandwich = match mcrb_sandwich(&s, &SandwichOptions::default()) {
            Ok(w) => w,
            Err(Error::IllConditioned { .. }) => {
                degenerate += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let (c, w) = (closed.m_theta_theta, sandwich.breakdown.m_theta_theta);
        devs.push((c - w).abs() / w.abs());
        let z = zeta_set(&s, InformationScalars::default())?;
        let lhs = c * z.zeta3.powi(2);
        let rhs = w * (z.zeta3 - z.zeta5.norm_sqr()).powi(2);
        schur = schur.max((lhs - rhs).abs() / rhs.abs());
    }
    devs.sort_by(f64::total_cmp);
    Ok(ClosedVsSandwich {
        scenes: devs.len(),
        degenerate,
        max_rel_deviation: devs.last().copied().unwrap_or(0.0),
        median_rel_deviation: devs.get(devs.len() / 2).copied().unwrap_or(0.0),
        max_schur_residual: schur,
    })
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

pub fn run_selftest(opts: SelftestOptions) -> Result<Vec<Check>, Error> {
    let mut out = Vec::new();
    let g34 = ArrayGeometry::standard_virtual_ula(3, 4)?;

    let s = MultipathScene::from_ratios(g34.clone(), 0.0, 0.0, 10.0, 0.0, 0.0, 1, 1.0)?;
    let b = mcrb_theta_closed(&s)?;
    let r = b.mcrb_theta / b.crb_theta * 9.0 - 1.0;
    out.push(check(
        "coherent_limit",
        r.abs() < 1e-10,
        format!("9·MCRB/CRB − 1 = {r:.3e}"),
    ));

    let s = MultipathScene::from_ratios(g34.clone(), 0.0, 0.2, 10.0, 120.0, 0.3, 1, 1.0)?;
    let b = mcrb_theta_closed(&s)?;
    let r = b.mcrb_theta / b.crb_theta - 1.0;
    let bias = (b.theta_a - s.theta).abs();
    out.push(check(
        "multipath_free_limit",
        r.abs() < 1e-6 && bias < 1e-7,
        format!("MCRB/CRB − 1 = {r:.3e}, |θ_A − θ| = {bias:.3e}"),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut first, mut second) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let tx: Vec<f64> = (0..rng.random_range(1..5))
            .map(|_| rng.random_range(-5.0..5.0))
            .collect();
        let rx: Vec<f64> = (0..rng.random_range(1..9))
            .map(|_| rng.random_range(-3.0..3.0))
            .collect();
        let g = ArrayGeometry::new(&tx, &rx)?;
        let mut target = g.steering(rng.random_range(-1.4..1.4));
        if opts.perturb_second_derivative {
            for v in target.dda_r.iter_mut() {
                *v *= C64::new(1.001, 0.0);
            }
        }
        let id = trace_identities(&mimo_matrices(
            &target,
            &g.steering(rng.random_range(-1.4..1.4)),
        ));
        first = first.max(id.first_order);
        if id.e_adot > 0.0 {
            second = second.max(id.second_order / id.e_adot);
        }
    }
    out.push(check(
        "first_order_trace_identity",
        first < 1e-12,
        format!("max |tr(Ȧ Aᴴ)| = {first:.3e}"),
    ));
    out.push(check(
        "second_order_trace_identity",
        second < 1e-10,
        format!("max |tr(Äᴴ A) + E_Ȧ| / E_Ȧ = {second:.3e}"),
    ));

    let (mut worst, h) = (0.0f64, 1e-5);
    for k in 0..50 {
        let th = -1.2 + 0.05 * k as f64;
        let (s0, sp, sm) = (g34.steering(th), g34.steering(th + h), g34.steering(th - h));
        for (d, (p, m)) in s0.da_r.iter().chain(&s0.da_t).zip(
            sp.a_r
                .iter()
                .chain(&sp.a_t)
                .zip(sm.a_r.iter().chain(&sm.a_t)),
        ) {
            let fd = (p - m) / (2.0 * h);
            worst = worst.max((d - fd).norm() / d.norm().max(1e-3));
        }
    }
    out.push(check(
        "steering_derivative",
        worst < 1e-6,
        format!("max rel. error vs central differences = {worst:.3e}"),
    ));

    let g90 = reflection_coefficient(PI / 2.0, 4.0, 0.0, 3.8e-3).norm();
    let graze = (reflection_coefficient(0.1f64.to_radians(), 4.0, 0.005, 3.8e-3) + 1.0).norm();
    out.push(check(
        "fresnel_limits",
        (g90 - 1.0 / 3.0).abs() < 1e-12 && graze < 0.01,
        format!("|Γ(90°)| = {g90:.15}, |Γ(0.1°) + 1| = {graze:.3e}"),
    ));

    let s = MultipathScene::from_ratios(g34.clone(), 0.05, -0.02, 10.0, 2.0, 0.8, 1, 1.0)?;
    let cfg = EstimatorConfig {
        refine_tol: 1e-9,
        ..EstimatorConfig::for_geometry(&g34)
    };
    let est = mml_doa(&s.compressed_mean(), &g34, &cfg)?;
    let ta = theta_a(&s, &default_theta_a_search(&s))?;
    out.push(check(
        "noise_free_mml_is_pseudo_true",
        (est - ta).abs() < 1e-6,
        format!("|θ̂ − θ_A| = {:.3e} rad", (est - ta).abs()),
    ));

    let cmp = closed_vs_sandwich(1000, 2024)?;
    out.push(check(
        "closed_form_schur_relation",
        cmp.max_schur_residual < 1e-9,
        format!(
            "closed vs sandwich over {} scenes ({} degenerate): max rel. deviation {:.3e}, median {:.3e}; \
             max residual of closed·ζ₃² = sandwich·(ζ₃ − |ζ₅|²)² is {:.3e}",
            cmp.scenes, cmp.degenerate, cmp.max_rel_deviation, cmp.median_rel_deviation, cmp.max_schur_residual
        ),
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_passes() {
        let checks = run_selftest(SelftestOptions::default()).unwrap();
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn injected_fault_is_named() {
        let checks = run_selftest(SelftestOptions {
            perturb_second_derivative: true,
        })
        .unwrap();
        let failed: Vec<_> = checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        assert_eq!(failed, vec!["second_order_trace_identity"]);
    }
}
