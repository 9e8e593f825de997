//! The five-element POVM that unambiguously discriminates the four signed
//! channel patterns, plus the channel parameters it is built from.
//!
//! A channel is described by four real, strictly positive coefficients
//! `(α, β, γ, δ)` with unit sum of squares; the shared state is
//! `α|0000⟩ + β|1001⟩ + γ|0110⟩ + δ|1111⟩` on particles (3,4,5,6). After the
//! sender's Bell measurements and the receiver's ancilla copy, the ancilla
//! pair ends up in one of the four *signed channel vectors*
//! `Σ_j s_i(j) w_j |j⟩` with sign patterns
//!
//! ```text
//! s₁ = (+,+,+,+)   s₂ = (+,+,−,−)   s₃ = (+,−,+,−)   s₄ = (+,−,−,+)
//! ```
//!
//! The discrimination states carry the *reciprocal* coefficients with the
//! same sign patterns, so `⟨Ψ_i|` annihilates every signed channel vector
//! except the `i`-th: a conclusive POVM click identifies the branch with
//! certainty. Elements `P_i = (1/x)|Ψ_i⟩⟨Ψ_i|` for `i = 1..4` and
//! `P₅ = I − ΣP_i` form a valid POVM exactly when the scaling `x` is at
//! least [`min_x`], the largest eigenvalue of `Σ|Ψ_i⟩⟨Ψ_i|`; smaller `x`
//! (higher success probability) would make `P₅` indefinite.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Result, SimError};
use crate::gates::sample_index;
use crate::qstate::{hermitian_eigen, DenseOperator, Label, StateVector};
use crate::tolerances::{EPS_COEF, EPS_NORM, EPS_PSD, EPS_ZERO};

/// Labels of the receiver's ancilla pair. The first ancilla copies particle
/// 5 and is the more significant bit of the discrimination space.
pub const ANCILLA_A: Label = Label('A');
pub const ANCILLA_B: Label = Label('B');

/// The four sign patterns, row `i` belonging to discrimination state `Ψ_{i+1}`.
pub(crate) const SIGN_PATTERNS: [[f64; 4]; 4] = [
    [1.0, 1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0, -1.0],
    [1.0, -1.0, 1.0, -1.0],
    [1.0, -1.0, -1.0, 1.0],
];

/// Channel coefficients `(α, β, γ, δ)`: real, strictly positive, unit sum of
/// squares. Strict positivity is required because the discrimination states
/// divide by each coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    coeffs: [f64; 4],
}

impl ChannelParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let coeffs = [alpha, beta, gamma, delta];
        for &w in &coeffs {
            if !w.is_finite() || w < EPS_COEF {
                return Err(SimError::DegenerateChannel(w));
            }
        }
        let sum_sq: f64 = coeffs.iter().map(|w| w * w).sum();
        if (sum_sq - 1.0).abs() > EPS_NORM {
            return Err(SimError::ChannelNotNormalized(sum_sq));
        }
        Ok(Self { coeffs })
    }

    /// Normalizes arbitrary positive weights into channel coefficients.
    pub fn from_unnormalized(weights: [f64; 4]) -> Result<Self> {
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < EPS_ZERO {
            return Err(SimError::ZeroNorm);
        }
        Self::new(
            weights[0] / norm,
            weights[1] / norm,
            weights[2] / norm,
            weights[3] / norm,
        )
    }

    /// The maximally entangled channel `(1/2, 1/2, 1/2, 1/2)`.
    pub fn uniform() -> Self {
        Self::new(0.5, 0.5, 0.5, 0.5).expect("uniform channel is valid")
    }

    /// One-parameter skew family `(cos t, cos t, cos t, sin t)` normalized,
    /// for `t ∈ (0, π/2)`. At `t = π/4` it reduces to the uniform channel;
    /// toward the ends one coefficient group collapses and `min_x → 4`.
    pub fn skew(t: f64) -> Result<Self> {
        Self::from_unnormalized([t.cos(), t.cos(), t.cos(), t.sin()])
    }

    pub fn coefficients(&self) -> [f64; 4] {
        self.coeffs
    }

    /// The four-particle channel ket `α|0000⟩ + β|1001⟩ + γ|0110⟩ + δ|1111⟩`
    /// on the given labels.
    pub fn state(&self, labels: [Label; 4]) -> Result<StateVector> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        amps[0b0000] = Complex64::new(self.coeffs[0], 0.0);
        amps[0b1001] = Complex64::new(self.coeffs[1], 0.0);
        amps[0b0110] = Complex64::new(self.coeffs[2], 0.0);
        amps[0b1111] = Complex64::new(self.coeffs[3], 0.0);
        StateVector::new(labels.to_vec(), amps)
    }
}

/// The four discrimination states on the ancilla pair `(A, B)`:
/// `Ψ_i = (1/N) Σ_j s_i(j) (1/w_j) |j⟩` with the shared normalization
/// `N = √(Σ_j 1/w_j²)`.
pub fn discrimination_states(channel: &ChannelParams) -> [StateVector; 4] {
    let w = channel.coefficients();
    let norm = w.iter().map(|w| 1.0 / (w * w)).sum::<f64>().sqrt();
    SIGN_PATTERNS.map(|signs| {
        let amps = (0..4)
            .map(|j| Complex64::new(signs[j] / (norm * w[j]), 0.0))
            .collect();
        StateVector::new(vec![ANCILLA_A, ANCILLA_B], amps)
            .expect("discrimination state dimensions are consistent")
    })
}

/// Smallest admissible POVM scaling: the largest eigenvalue of the Gram sum
/// `Σ_i |Ψ_i⟩⟨Ψ_i|`. Lies in `[1, 4]`; equals 1 exactly for the uniform
/// channel, where the discrimination states are orthonormal.
pub fn min_x(channel: &ChannelParams) -> f64 {
    let mut gram = DenseOperator::new(2, vec![Complex64::new(0.0, 0.0); 16])
        .expect("4x4 zero operator is consistent");
    for state in discrimination_states(channel) {
        gram = gram
            .add(&DenseOperator::projector(&state))
            .expect("gram sum dimensions agree");
    }
    let eig = hermitian_eigen(&gram).expect("gram sum is Hermitian by construction");
    *eig.values.last().expect("4x4 matrix has eigenvalues")
}

/// Positive-semidefinite test for a Hermitian operator: returns whether the
/// smallest eigenvalue clears `-tol`, together with that eigenvalue.
pub fn is_psd(op: &DenseOperator, tol: f64) -> Result<(bool, f64)> {
    let eig = hermitian_eigen(op)?;
    let min = eig.values[0];
    Ok((min >= -tol, min))
}

/// Spectral square root of a positive-semidefinite operator. Eigenvalues in
/// `(-EPS_PSD, 0)` are round-off and clamp to zero; anything lower is a
/// genuine positivity violation reported under the given element index.
fn sqrt_psd(op: &DenseOperator, element_index: usize) -> Result<DenseOperator> {
    let eig = hermitian_eigen(op)?;
    let dim = eig.dim();
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda <= -EPS_PSD {
            return Err(SimError::PositivityViolation {
                index: element_index,
                min_eigenvalue: lambda,
            });
        }
        let root = lambda.max(0.0).sqrt();
        if root == 0.0 {
            continue;
        }
        let v = eig.eigenvector(k);
        for r in 0..dim {
            for c in 0..dim {
                entries[r * dim + c] += v[r] * v[c].conj() * root;
            }
        }
    }
    DenseOperator::new(op.arity(), entries)
}

/// Where a POVM element comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PovmProvenance {
    /// `(1/x)|Ψ_k⟩⟨Ψ_k|` for the 1-based discrimination index `k`.
    Conclusive(usize),
    /// The completion `I − Σ conclusive`.
    Inconclusive,
}

/// A validated five-element POVM. Outcome indices are 1-based: `1..=4` are
/// the conclusive elements in sign-pattern order, `5` is inconclusive.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<DenseOperator>,
    roots: Vec<DenseOperator>,
    discrimination: [StateVector; 4],
    x: f64,
}

impl Povm {
    pub fn elements(&self) -> &[DenseOperator] {
        &self.elements
    }

    /// Measurement operator `M_m = √P_m` for the 1-based outcome `m`.
    pub fn root(&self, outcome: usize) -> &DenseOperator {
        &self.roots[outcome - 1]
    }

    pub fn element(&self, outcome: usize) -> &DenseOperator {
        &self.elements[outcome - 1]
    }

    pub fn discrimination_state(&self, outcome: usize) -> &StateVector {
        &self.discrimination[outcome - 1]
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn provenance(&self, outcome: usize) -> PovmProvenance {
        if (1..=4).contains(&outcome) {
            PovmProvenance::Conclusive(outcome)
        } else {
            PovmProvenance::Inconclusive
        }
    }

    pub const NUM_OUTCOMES: usize = 5;
}

/// Builds the POVM for a channel at scaling `x`.
///
/// Fails with [`SimError::PositivityViolation`] when `x` is below the
/// admissible minimum (the inconclusive element then has an eigenvalue under
/// `-EPS_PSD`), naming the offending eigenvalue.
pub fn build_povm(channel: &ChannelParams, x: f64) -> Result<Povm> {
    if !x.is_finite() || x <= 0.0 {
        return Err(SimError::InvalidScaling(x));
    }
    let discrimination = discrimination_states(channel);
    let mut elements: Vec<DenseOperator> = discrimination
        .iter()
        .map(|psi| DenseOperator::projector(psi).scaled(1.0 / x))
        .collect();
    let mut completion = DenseOperator::identity(2);
    for e in &elements {
        completion = completion.sub(e)?;
    }
    elements.push(completion);

    let mut roots = Vec::with_capacity(5);
    for (i, e) in elements.iter().enumerate() {
        let (ok, min_eig) = is_psd(e, EPS_PSD)?;
        if !ok {
            return Err(SimError::PositivityViolation {
                index: i + 1,
                min_eigenvalue: min_eig,
            });
        }
        roots.push(sqrt_psd(e, i + 1)?);
    }

    let mut sum = DenseOperator::new(2, vec![Complex64::new(0.0, 0.0); 16])?;
    for e in &elements {
        sum = sum.add(e)?;
    }
    let completeness = sum.sub(&DenseOperator::identity(2))?.max_abs_entry();
    debug_assert!(
        completeness <= EPS_NORM,
        "POVM completeness violated by construction: {completeness}"
    );

    Ok(Povm {
        elements,
        roots,
        discrimination,
        x,
    })
}

/// Samples the POVM on the target qubit pair of a (possibly larger) state.
/// Returns the 1-based outcome index, the normalized post-measurement state
/// (`M_m|ψ⟩` renormalized, labels unchanged), and the outcome probability.
/// One uniform variate is consumed per call.
pub fn povm_sample_on(
    state: &StateVector,
    targets: [Label; 2],
    povm: &Povm,
    rng: &mut impl Rng,
) -> Result<(usize, StateVector, f64)> {
    let mut probs = [0.0f64; Povm::NUM_OUTCOMES];
    for (i, element) in povm.elements.iter().enumerate() {
        let acted = state.apply_operator(element, &targets)?;
        probs[i] = state.inner(&acted)?.re.max(0.0);
    }
    debug_assert!(
        (probs.iter().sum::<f64>() - 1.0).abs() <= 1e-9,
        "POVM outcome probabilities must sum to 1"
    );
    let idx = sample_index(&probs, rng)?;
    let (post, _) = state
        .apply_operator(&povm.roots[idx], &targets)?
        .normalized()?;
    Ok((idx + 1, post, probs[idx]))
}

/// Samples the POVM on a standalone two-qubit state.
pub fn povm_sample(
    state: &StateVector,
    povm: &Povm,
    rng: &mut impl Rng,
) -> Result<(usize, StateVector, f64)> {
    if state.num_qubits() != 2 {
        return Err(SimError::ArityMismatch {
            expected: 2,
            got: state.num_qubits(),
        });
    }
    let targets = [state.labels()[0], state.labels()[1]];
    povm_sample_on(state, targets, povm, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_channel(rng: &mut ChaCha8Rng) -> ChannelParams {
        loop {
            let w = [
                rng.gen_range(0.05f64..1.0),
                rng.gen_range(0.05f64..1.0),
                rng.gen_range(0.05f64..1.0),
                rng.gen_range(0.05f64..1.0),
            ];
            if let Ok(ch) = ChannelParams::from_unnormalized(w) {
                return ch;
            }
        }
    }

    /// `min_x` has a closed form because the Gram sum is diagonal: entry
    /// `(j,j)` is `4 / (N² w_j²)` with `N² = Σ 1/w²`. Independent of the
    /// eigensolver path used by the implementation.
    fn min_x_closed_form(ch: &ChannelParams) -> f64 {
        let w = ch.coefficients();
        let nsq: f64 = w.iter().map(|w| 1.0 / (w * w)).sum();
        let wmin = w.iter().cloned().fold(f64::INFINITY, f64::min);
        4.0 / (nsq * wmin * wmin)
    }

    #[test]
    fn channel_validation() {
        assert!(ChannelParams::new(0.5, 0.5, 0.5, 0.5).is_ok());
        assert!(matches!(
            ChannelParams::new(0.6, 0.6, 0.0, 0.28f64.sqrt()),
            Err(SimError::DegenerateChannel(_))
        ));
        assert!(matches!(
            ChannelParams::new(0.5, 0.5, 0.5, 0.6),
            Err(SimError::ChannelNotNormalized(_))
        ));
    }

    #[test]
    fn channel_ket_has_the_four_expected_components() {
        use crate::qstate::Label;
        let ch = ChannelParams::from_unnormalized([0.4, 0.3, 0.2, 0.1]).unwrap();
        let s = ch
            .state([Label('3'), Label('4'), Label('5'), Label('6')])
            .unwrap();
        let w = ch.coefficients();
        assert_relative_eq!(s.amplitudes()[0b0000].re, w[0], epsilon = 1e-15);
        assert_relative_eq!(s.amplitudes()[0b1001].re, w[1], epsilon = 1e-15);
        assert_relative_eq!(s.amplitudes()[0b0110].re, w[2], epsilon = 1e-15);
        assert_relative_eq!(s.amplitudes()[0b1111].re, w[3], epsilon = 1e-15);
        assert_relative_eq!(s.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn discrimination_states_annihilate_foreign_sign_patterns() {
        let ch = ChannelParams::from_unnormalized([0.61, 0.52, 0.47, 0.38]).unwrap();
        let w = ch.coefficients();
        let states = discrimination_states(&ch);
        let big_n = w.iter().map(|w| 1.0 / (w * w)).sum::<f64>().sqrt();
        for (i, psi) in states.iter().enumerate() {
            assert_relative_eq!(psi.norm(), 1.0, epsilon = 1e-14);
            for (k, signs) in SIGN_PATTERNS.iter().enumerate() {
                let signed_channel = StateVector::new(
                    vec![ANCILLA_A, ANCILLA_B],
                    (0..4)
                        .map(|j| Complex64::new(signs[j] * w[j], 0.0))
                        .collect(),
                )
                .unwrap();
                let overlap = psi.inner(&signed_channel).unwrap().norm();
                let expected = if i == k { 4.0 / big_n } else { 0.0 };
                assert_relative_eq!(overlap, expected, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn uniform_channel_discrimination_states_are_orthonormal() {
        let states = discrimination_states(&ChannelParams::uniform());
        for (i, a) in states.iter().enumerate() {
            for (k, b) in states.iter().enumerate() {
                let ip = a.inner(b).unwrap().norm();
                let expected = if i == k { 1.0 } else { 0.0 };
                assert_relative_eq!(ip, expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn min_x_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x30c4);
        for _ in 0..200 {
            let ch = random_channel(&mut rng);
            let got = min_x(&ch);
            let expected = min_x_closed_form(&ch);
            assert_relative_eq!(got, expected, epsilon = 1e-11, max_relative = 1e-11);
            assert!((1.0 - 1e-10..=4.0 + 1e-10).contains(&got));
        }
    }

    #[test]
    fn uniform_channel_has_min_x_one_and_zero_completion() {
        let ch = ChannelParams::uniform();
        assert_relative_eq!(min_x(&ch), 1.0, epsilon = 1e-12);
        let povm = build_povm(&ch, 1.0).unwrap();
        assert!(povm.element(5).max_abs_entry() < 1e-12);
    }

    #[test]
    fn povm_rejects_x_below_minimum() {
        let ch = ChannelParams::from_unnormalized([0.7, 0.4, 0.35, 0.3]).unwrap();
        let xmin = min_x(&ch);
        match build_povm(&ch, 0.9 * xmin) {
            Err(SimError::PositivityViolation {
                index,
                min_eigenvalue,
            }) => {
                assert_eq!(index, 5);
                assert!(min_eigenvalue < -EPS_PSD);
            }
            other => panic!("expected positivity violation, got {other:?}"),
        }
        assert!(matches!(
            build_povm(&ch, 0.0),
            Err(SimError::InvalidScaling(_))
        ));
        assert!(matches!(
            build_povm(&ch, f64::NAN),
            Err(SimError::InvalidScaling(_))
        ));
    }

    #[test]
    fn povm_is_complete_and_positive_at_min_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7057);
        for _ in 0..50 {
            let ch = random_channel(&mut rng);
            let povm = build_povm(&ch, min_x(&ch)).unwrap();
            let mut sum = DenseOperator::new(2, vec![Complex64::new(0.0, 0.0); 16]).unwrap();
            for e in povm.elements() {
                let (ok, min_eig) = is_psd(e, EPS_PSD).unwrap();
                assert!(ok, "element eigenvalue {min_eig}");
                sum = sum.add(e).unwrap();
            }
            let dev = sum
                .sub(&DenseOperator::identity(2))
                .unwrap()
                .max_abs_entry();
            assert!(dev < 1e-12, "completeness deviation {dev}");
        }
    }

    #[test]
    fn roots_square_back_to_elements() {
        let ch = ChannelParams::from_unnormalized([0.63, 0.5, 0.42, 0.41]).unwrap();
        let povm = build_povm(&ch, min_x(&ch) * 1.3).unwrap();
        for m in 1..=5 {
            let root = povm.root(m);
            assert!(root.hermiticity_deviation() < 1e-12);
            let squared = root.mul(root).unwrap();
            let dev = squared.sub(povm.element(m)).unwrap().max_abs_entry();
            assert!(dev < 1e-12, "element {m}: deviation {dev}");
        }
    }

    #[test]
    fn sampling_a_discrimination_state_is_projective_for_uniform_channel() {
        let ch = ChannelParams::uniform();
        let povm = build_povm(&ch, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 1..=4 {
            let psi = povm.discrimination_state(i).clone();
            let (idx, post, prob) = povm_sample(&psi, &povm, &mut rng).unwrap();
            assert_eq!(idx, i);
            assert_relative_eq!(prob, 1.0, epsilon = 1e-12);
            assert_relative_eq!(post.inner(&psi).unwrap().norm_sqr(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xabcd);
        let ch = random_channel(&mut rng);
        let povm = build_povm(&ch, min_x(&ch) * 1.7).unwrap();
        for _ in 0..25 {
            let amps: Vec<Complex64> = (0..4)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let state = StateVector::new(vec![ANCILLA_A, ANCILLA_B], amps)
                .unwrap()
                .normalized()
                .unwrap()
                .0;
            let total: f64 = povm
                .elements()
                .iter()
                .map(|e| {
                    state
                        .inner(&state.apply_operator(e, &[ANCILLA_A, ANCILLA_B]).unwrap())
                        .unwrap()
                        .re
                })
                .sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn is_psd_rejects_non_hermitian_input() {
        let m = DenseOperator::new(
            1,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            is_psd(&m, EPS_PSD),
            Err(SimError::NotHermitian(_))
        ));
    }

    #[test]
    fn provenance_indexing() {
        let povm = build_povm(&ChannelParams::uniform(), 1.5).unwrap();
        assert_eq!(povm.provenance(3), PovmProvenance::Conclusive(3));
        assert_eq!(povm.provenance(5), PovmProvenance::Inconclusive);
    }

    #[test]
    fn skew_family_hits_uniform_at_quarter_pi() {
        let ch = ChannelParams::skew(std::f64::consts::FRAC_PI_4).unwrap();
        for w in ch.coefficients() {
            assert_relative_eq!(w, 0.5, epsilon = 1e-14);
        }
        let skewed = ChannelParams::skew(0.3).unwrap();
        assert!(min_x(&skewed) > 1.0);
    }
}
