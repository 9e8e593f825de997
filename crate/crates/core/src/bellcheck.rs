//! Singlet-state spin correlations and the CHSH quantity.
//!
//! Analyzers live in a fixed plane, so a setting is a single angle θ and the
//! measured observable is `cos θ·Z + sin θ·X` (eigenvalues ±1). For the
//! two-qubit singlet Ψ⁻ the correlation is `E(a,b) = −cos(a−b)`; the module
//! computes it as an exact operator expectation value on the simulator, with
//! an optional seeded sampling variant. The CHSH combination
//! `S = |E(a1,b1) − E(a1,b2) + E(a2,b1) + E(a2,b2)|` reaches `2√2` at the
//! optimal angles, above the local-realist bound of 2.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use crate::error::Result;
use crate::gates::{bell_state, sample_index, BellOutcome};
use crate::qstate::{DenseOperator, Label, StateVector};

/// Direction of a spin analyzer in the fixed measurement plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyzerSetting {
    angle: f64,
}

impl AnalyzerSetting {
    /// Wraps the angle into `[0, 2π)`.
    pub fn new(angle: f64) -> Self {
        let mut wrapped = angle.rem_euclid(TAU);
        if wrapped >= TAU {
            wrapped = 0.0;
        }
        Self { angle: wrapped }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }
}

const LEFT: Label = Label('L');
const RIGHT: Label = Label('R');

/// The ±1-valued spin observable along the analyzer direction:
/// `cos θ·Z + sin θ·X`.
pub fn analyzer_operator(setting: AnalyzerSetting) -> DenseOperator {
    let (s, c) = setting.angle.sin_cos();
    DenseOperator::new(
        1,
        vec![
            Complex64::new(c, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-c, 0.0),
        ],
    )
    .expect("analyzer observable is a valid 2x2 operator")
}

fn singlet() -> StateVector {
    bell_state(BellOutcome::PsiMinus, LEFT, RIGHT).expect("singlet construction is valid")
}

/// Exact singlet correlation `⟨Ψ⁻| (n_a·σ ⊗ n_b·σ) |Ψ⁻⟩`, equal to
/// `−cos(a−b)`.
pub fn singlet_correlation(a: AnalyzerSetting, b: AnalyzerSetting) -> Result<f64> {
    let psi = singlet();
    let acted = psi
        .apply_operator(&analyzer_operator(a), &[LEFT])?
        .apply_operator(&analyzer_operator(b), &[RIGHT])?;
    Ok(psi.inner(&acted)?.re)
}

/// CHSH combination `S = |E(a1,b1) − E(a1,b2) + E(a2,b1) + E(a2,b2)|`.
pub fn chsh_value(
    a1: AnalyzerSetting,
    a2: AnalyzerSetting,
    b1: AnalyzerSetting,
    b2: AnalyzerSetting,
) -> Result<f64> {
    let e11 = singlet_correlation(a1, b1)?;
    let e12 = singlet_correlation(a1, b2)?;
    let e21 = singlet_correlation(a2, b1)?;
    let e22 = singlet_correlation(a2, b2)?;
    Ok((e11 - e12 + e21 + e22).abs())
}

/// The analyzer's ±1 eigenvectors: column 0 for outcome +1, column 1 for −1.
fn analyzer_eigenvectors(setting: AnalyzerSetting) -> [[Complex64; 2]; 2] {
    let half = setting.angle / 2.0;
    let (s, c) = half.sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
    ]
}

/// Joint outcome probabilities for analyzers (a, b) on the singlet, indexed
/// by `2·(a-outcome is −1) + (b-outcome is −1)`.
fn joint_probabilities(a: AnalyzerSetting, b: AnalyzerSetting) -> Result<[f64; 4]> {
    let psi = singlet();
    let ea = analyzer_eigenvectors(a);
    let eb = analyzer_eigenvectors(b);
    let mut probs = [0.0f64; 4];
    for (i, va) in ea.iter().enumerate() {
        for (j, vb) in eb.iter().enumerate() {
            let amp = psi.project_onto(&[LEFT], va)?.project_onto(&[RIGHT], vb)?;
            probs[2 * i + j] = amp.norm().powi(2);
        }
    }
    Ok(probs)
}

/// Monte Carlo estimate of the singlet correlation from `trials` seeded
/// joint measurements. Returns `(estimate, standard_error)`; one uniform
/// variate is consumed per trial.
pub fn sampled_singlet_correlation(
    a: AnalyzerSetting,
    b: AnalyzerSetting,
    trials: u64,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    let probs = joint_probabilities(a, b)?;
    let mut sum = 0i64;
    for _ in 0..trials {
        let k = sample_index(&probs, rng)?;
        // Outcomes +1,+1 / +1,−1 / −1,+1 / −1,−1 → product ±1.
        let product = if k == 0 || k == 3 { 1 } else { -1 };
        sum += product;
    }
    let mean = sum as f64 / trials as f64;
    let variance = (1.0 - mean * mean).max(0.0);
    Ok((mean, (variance / trials as f64).sqrt()))
}

/// Monte Carlo CHSH estimate: each correlation is sampled with
/// `trials_per_setting` measurements. Returns `(estimate, standard_error)`
/// with the errors combined in quadrature.
pub fn sampled_chsh(
    a1: AnalyzerSetting,
    a2: AnalyzerSetting,
    b1: AnalyzerSetting,
    b2: AnalyzerSetting,
    trials_per_setting: u64,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    let (e11, s11) = sampled_singlet_correlation(a1, b1, trials_per_setting, rng)?;
    let (e12, s12) = sampled_singlet_correlation(a1, b2, trials_per_setting, rng)?;
    let (e21, s21) = sampled_singlet_correlation(a2, b1, trials_per_setting, rng)?;
    let (e22, s22) = sampled_singlet_correlation(a2, b2, trials_per_setting, rng)?;
    let s = (e11 - e12 + e21 + e22).abs();
    let err = (s11 * s11 + s12 * s12 + s21 * s21 + s22 * s22).sqrt();
    Ok((s, err))
}
