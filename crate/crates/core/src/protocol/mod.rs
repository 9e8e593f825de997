//! End-to-end teleportation engine.
//!
//! The cast: the sender holds particles (1,2) in an unknown two-qubit state
//! `a|00⟩ + b|01⟩ + c|10⟩ + d|11⟩` plus the channel halves (3,4); the
//! receiver holds the channel halves (5,6). The four-particle channel on
//! (3,4,5,6) is `α|0000⟩ + β|1001⟩ + γ|0110⟩ + δ|1111⟩`.
//!
//! One run:
//! 1. [`prepare_world`] tensors input and channel into a six-qubit state.
//! 2. [`alice_measure`] performs Bell measurements on (2,3) and (1,4),
//!    collapsing the receiver's pair (5,6) into one of 16 branches.
//! 3. [`bob_entangle_ancilla`] copies the pair onto ancillas (A,B) in the
//!    computational basis with two CNOTs.
//! 4. [`bob_discriminate_and_recover`] samples the five-element POVM on the
//!    ancillas. Conclusive outcomes (1–4) identify the branch's sign pattern
//!    with certainty; a Pauli-pair lookup ([`recovery`]) then restores the
//!    input on (5,6) exactly. Outcome 5 is inconclusive and the run fails.
//!
//! The success probability is governed by the POVM scaling `x`: exactly
//! `16/(x·N²)` with `N² = Σ_j 1/w_j²` over the channel coefficients —
//! independent of the input state, maximal at `x = min_x`, and equal to 1 for
//! the uniform channel at `x = 1`, where the scheme degenerates to standard
//! two-qubit teleportation. The implementation never assumes this closed
//! form: probabilities come from Born-rule enumeration, and the tests check
//! the two routes against each other.

pub mod recovery;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Result, SimError};
use crate::gates::{
    bell_measure, measure_computational, pauli_correction, standard_gate, BellOutcome,
    StandardGate, BELL_OUTCOMES,
};
use crate::povm::{build_povm, min_x, povm_sample_on, ChannelParams, Povm, ANCILLA_A, ANCILLA_B};
use crate::qstate::{Label, StateVector};
use crate::tolerances::{EPS_NORM, EPS_ZERO};

/// Labels of the six protocol particles. (1,2) carry the unknown input,
/// (3,4) are the sender's channel halves, (5,6) the receiver's.
pub const Q1: Label = Label('1');
pub const Q2: Label = Label('2');
pub const Q3: Label = Label('3');
pub const Q4: Label = Label('4');
pub const Q5: Label = Label('5');
pub const Q6: Label = Label('6');

/// The unknown two-qubit input `a|00⟩ + b|01⟩ + c|10⟩ + d|11⟩`, stored as
/// the amplitude array `[a, b, c, d]` with unit sum of squared magnitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct InputState {
    amps: [Complex64; 4],
}

impl InputState {
    pub fn new(amps: [Complex64; 4]) -> Result<Self> {
        let sum_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !sum_sq.is_finite() || (sum_sq - 1.0).abs() > EPS_NORM {
            return Err(SimError::NotNormalized(sum_sq.sqrt()));
        }
        Ok(Self { amps })
    }

    pub fn from_unnormalized(amps: [Complex64; 4]) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < EPS_ZERO {
            return Err(SimError::ZeroNorm);
        }
        Self::new([
            amps[0] / norm,
            amps[1] / norm,
            amps[2] / norm,
            amps[3] / norm,
        ])
    }

    /// Haar-uniform random input: four complex amplitudes with independent
    /// standard-normal parts, normalized. Consumes eight normal variates.
    pub fn random(rng: &mut impl Rng) -> Self {
        loop {
            let mut amps = [Complex64::new(0.0, 0.0); 4];
            for a in &mut amps {
                *a = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
            if let Ok(state) = Self::from_unnormalized(amps) {
                return state;
            }
        }
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amps
    }

    /// The input as a state vector on the given label pair.
    pub fn state_vector(&self, labels: [Label; 2]) -> Result<StateVector> {
        StateVector::new(labels.to_vec(), self.amps.to_vec())
    }
}

/// How the input of a Monte Carlo run is chosen.
#[derive(Clone, Debug)]
pub enum InputSpec {
    Fixed(InputState),
    /// A fresh Haar-random input per trial.
    Random,
}

/// How the POVM scaling is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum XChoice {
    /// Resolve to `min_x(channel)`, the scaling with the highest success
    /// probability.
    Auto,
    Fixed(f64),
}

/// Resolves an [`XChoice`] against a channel.
pub fn resolve_x(channel: &ChannelParams, choice: XChoice) -> f64 {
    match choice {
        XChoice::Auto => min_x(channel),
        XChoice::Fixed(x) => x,
    }
}

/// Outcome record of one teleportation run.
#[derive(Clone, Debug)]
pub struct TeleportResult {
    pub bell_23: BellOutcome,
    pub bell_14: BellOutcome,
    /// 1-based POVM outcome; 1..=4 conclusive, 5 inconclusive.
    pub povm_index: usize,
    pub conclusive: bool,
    /// Recovered state on (5,6); present exactly when conclusive.
    pub recovered: Option<StateVector>,
    /// Fidelity of the recovered state with the input; present exactly when
    /// conclusive.
    pub fidelity: Option<f64>,
    /// Joint Born probability of the observed Bell outcome pair.
    pub branch_probability: f64,
    /// Conditional probability of the observed POVM outcome given the branch.
    pub povm_probability: f64,
}

/// Aggregate statistics of a Monte Carlo run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunStatistics {
    pub trials: u64,
    pub conclusive_trials: u64,
    pub conclusive_rate: f64,
    /// Mean fidelity over conclusive trials; absent when none were.
    pub mean_conclusive_fidelity: Option<f64>,
    /// Born-rule enumeration over all 16 Bell branches × 4 conclusive POVM
    /// outcomes (input-independent; see module docs).
    pub exact_success_probability: f64,
    pub x_used: f64,
    pub min_x: f64,
    pub seed: u64,
}

/// `|⟨reference|state⟩|²`, comparing amplitudes positionally. The label
/// lists may differ (e.g. recovered state on (5,6) vs. input on (1,2)); only
/// the dimensions must agree.
pub fn fidelity(state: &StateVector, reference: &StateVector) -> Result<f64> {
    if state.dim() != reference.dim() {
        return Err(SimError::DimensionMismatch {
            expected: reference.dim(),
            got: state.dim(),
        });
    }
    let ip: Complex64 = reference
        .amplitudes()
        .iter()
        .zip(state.amplitudes())
        .map(|(r, s)| r.conj() * s)
        .sum();
    Ok(ip.norm_sqr())
}

/// Single-qubit teleportation baseline: teleports a one-qubit state through
/// a fresh Φ⁺ pair using a CNOT, a Hadamard, a computational measurement of
/// the sender's two qubits, and the standard Pauli correction keyed by the
/// two classical bits. Returns the classical message and the recovered
/// state. Consumes one uniform variate.
pub fn teleport_single(input: &StateVector, rng: &mut impl Rng) -> Result<((u8, u8), StateVector)> {
    if input.num_qubits() != 1 {
        return Err(SimError::ArityMismatch {
            expected: 1,
            got: input.num_qubits(),
        });
    }
    if (input.norm() - 1.0).abs() > EPS_NORM {
        return Err(SimError::NotNormalized(input.norm()));
    }
    let source = input.labels()[0];
    let mut pool = ['2', '3', '4']
        .into_iter()
        .map(Label)
        .filter(|&l| l != source);
    let near = pool.next().expect("pool has spare labels");
    let far = pool.next().expect("pool has spare labels");

    let pair = crate::gates::bell_state(BellOutcome::PhiPlus, near, far)?;
    let world = input.tensor(&pair)?;
    let cnot = standard_gate(StandardGate::Cnot);
    let h = standard_gate(StandardGate::H);
    let world = world
        .apply_gate(&cnot, &[source, near])?
        .apply_gate(&h, &[source])?;
    let (bits, post, _prob) = measure_computational(&world, &[source, near], rng)?;
    let message = (bits[0], bits[1]);
    let recovered = post.apply_gate(&pauli_correction(message), &[far])?;
    Ok((message, recovered))
}

/// Tensors the input (on 1,2) with the channel (on 3,4,5,6) into the
/// six-qubit initial state.
pub fn prepare_world(input: &InputState, channel: &ChannelParams) -> Result<StateVector> {
    input
        .state_vector([Q1, Q2])?
        .tensor(&channel.state([Q3, Q4, Q5, Q6])?)
}

/// One of the 16 Bell-measurement branches, obtained by forced enumeration
/// rather than sampling.
#[derive(Clone, Debug)]
pub struct AliceBranch {
    pub bell_23: BellOutcome,
    pub bell_14: BellOutcome,
    /// Joint Born probability of this outcome pair.
    pub probability: f64,
    /// Normalized post-measurement state of the receiver's pair (5,6).
    pub state: StateVector,
}

/// Enumerates all 16 Bell branches of the world state, ordered by
/// `(bell_23, bell_14)` in Bell-outcome index order. Probabilities sum to 1,
/// and for valid inputs every branch has strictly positive probability.
pub fn alice_branches(world: &StateVector) -> Result<Vec<AliceBranch>> {
    let mut branches = Vec::with_capacity(16);
    for bell_23 in BELL_OUTCOMES {
        let after_23 = world.project_onto(&[Q2, Q3], &bell_23.amplitudes())?;
        for bell_14 in BELL_OUTCOMES {
            let unnormalized = after_23.project_onto(&[Q1, Q4], &bell_14.amplitudes())?;
            let norm = unnormalized.norm();
            let (state, _) = unnormalized.normalized()?;
            branches.push(AliceBranch {
                bell_23,
                bell_14,
                probability: norm * norm,
                state,
            });
        }
    }
    Ok(branches)
}

/// Samples the sender's two Bell measurements — on (2,3), then on (1,4) —
/// and returns both outcomes, the collapsed state of the receiver's pair
/// (5,6), and the joint probability of the outcome pair. Consumes two
/// uniform variates. The measurement order is fixed but immaterial: the two
/// measurements act on disjoint pairs and commute, which a test asserts.
pub fn alice_measure(
    world: &StateVector,
    rng: &mut impl Rng,
) -> Result<(BellOutcome, BellOutcome, StateVector, f64)> {
    let (bell_23, after_23, p23) = bell_measure(world, Q2, Q3, rng)?;
    let (bell_14, bob_state, p14) = bell_measure(&after_23, Q1, Q4, rng)?;
    Ok((bell_23, bell_14, bob_state, p23 * p14))
}

/// Appends ancillas (A,B) in `|00⟩` and copies the receiver's pair onto them
/// in the computational basis with CNOT(5→A) and CNOT(6→B). The resulting
/// four-qubit state has labels (5,6,A,B).
pub fn bob_entangle_ancilla(state56: &StateVector) -> Result<StateVector> {
    if state56.labels() != [Q5, Q6] {
        return Err(SimError::LabelMismatch);
    }
    let ancillas = StateVector::basis(vec![ANCILLA_A, ANCILLA_B], 0)?;
    let joined = state56.tensor(&ancillas)?;
    let cnot = standard_gate(StandardGate::Cnot);
    joined
        .apply_gate(&cnot, &[Q5, ANCILLA_A])?
        .apply_gate(&cnot, &[Q6, ANCILLA_B])
}

/// Applies the recovery Pauli pair for the given Bell branch and conclusive
/// POVM outcome to a state holding qubits 5 and 6.
pub fn apply_recovery(
    state: &StateVector,
    bell_23: BellOutcome,
    bell_14: BellOutcome,
    povm_outcome: usize,
) -> Result<StateVector> {
    let (c5, c6) = recovery::operators(bell_23, bell_14, povm_outcome)?;
    state
        .apply_gate(&c5.operator(), &[Q5])?
        .apply_gate(&c6.operator(), &[Q6])
}

/// Samples a pre-built POVM on the ancillas of the entangled four-qubit
/// state (5,6,A,B) and, on a conclusive outcome, recovers the input on
/// (5,6).
///
/// `input` is the reference against which the recovered state's fidelity is
/// reported, and `branch_probability` is the joint probability of the Bell
/// branch as returned by [`alice_measure`]; both are carried into the
/// [`TeleportResult`]. Consumes one uniform variate.
pub fn bob_discriminate_with(
    state56ab: &StateVector,
    povm: &Povm,
    bell_23: BellOutcome,
    bell_14: BellOutcome,
    input: &InputState,
    branch_probability: f64,
    rng: &mut impl Rng,
) -> Result<TeleportResult> {
    let (povm_index, post, povm_probability) =
        povm_sample_on(state56ab, [ANCILLA_A, ANCILLA_B], povm, rng)?;
    if povm_index > 4 {
        return Ok(TeleportResult {
            bell_23,
            bell_14,
            povm_index,
            conclusive: false,
            recovered: None,
            fidelity: None,
            branch_probability,
            povm_probability,
        });
    }
    // A conclusive click leaves (5,6) ⊗ (A,B) in a product state with the
    // ancillas exactly in the identified discrimination state; projecting
    // them out yields the (5,6) factor.
    let (reduced, _) = post
        .project_onto(
            &[ANCILLA_A, ANCILLA_B],
            povm.discrimination_state(povm_index).amplitudes(),
        )?
        .normalized()?;
    let recovered = apply_recovery(&reduced, bell_23, bell_14, povm_index)?;
    let f = fidelity(&recovered, &input.state_vector([Q5, Q6])?)?;
    Ok(TeleportResult {
        bell_23,
        bell_14,
        povm_index,
        conclusive: true,
        recovered: Some(recovered),
        fidelity: Some(f),
        branch_probability,
        povm_probability,
    })
}

/// Convenience wrapper over [`bob_discriminate_with`] that builds the POVM
/// for `(channel, x)` on the fly. Fails when `x` is below `min_x(channel)`.
#[allow(clippy::too_many_arguments)]
pub fn bob_discriminate_and_recover(
    state56ab: &StateVector,
    channel: &ChannelParams,
    x: f64,
    bell_23: BellOutcome,
    bell_14: BellOutcome,
    input: &InputState,
    branch_probability: f64,
    rng: &mut impl Rng,
) -> Result<TeleportResult> {
    let povm = build_povm(channel, x)?;
    bob_discriminate_with(
        state56ab,
        &povm,
        bell_23,
        bell_14,
        input,
        branch_probability,
        rng,
    )
}

/// Deterministic success probability: the Born-rule sum over all 16 Bell
/// branches and all 4 conclusive POVM outcomes of (branch probability ×
/// conditional conclusive probability). Fails when `x < min_x(channel)`.
///
/// The result does not depend on `input` (verified by tests); it is exactly
/// `16/(x·N²)` with `N² = Σ_j 1/w_j²`, though this closed form is never used
/// in the computation.
pub fn exact_success_probability(
    input: &InputState,
    channel: &ChannelParams,
    x: f64,
) -> Result<f64> {
    let povm = build_povm(channel, x)?;
    let world = prepare_world(input, channel)?;
    let mut total = 0.0;
    for branch in alice_branches(&world)? {
        let entangled = bob_entangle_ancilla(&branch.state)?;
        for outcome in 1..=4usize {
            let acted = entangled.apply_operator(povm.element(outcome), &[ANCILLA_A, ANCILLA_B])?;
            let conditional = entangled.inner(&acted)?.re.max(0.0);
            total += branch.probability * conditional;
        }
    }
    Ok(total)
}

/// Canonical input used where a reference input is needed but the quantity
/// is input-independent (exact probability reporting for random-input runs).
fn probe_input() -> InputState {
    InputState::new([Complex64::new(0.5, 0.0); 4]).expect("uniform input is normalized")
}

/// Runs the full pipeline for `trials` seeded Monte Carlo trials.
///
/// Trial `t` draws from an independent, deterministic random stream derived
/// from `(seed, t)`, so results are independent of execution order and
/// bit-identical across runs with the same arguments.
pub fn run_teleportation(
    input: &InputSpec,
    channel: &ChannelParams,
    x: XChoice,
    trials: u64,
    seed: u64,
) -> Result<RunStatistics> {
    if trials == 0 {
        return Err(SimError::InvalidTrialCount(trials));
    }
    let x_used = resolve_x(channel, x);
    let povm = build_povm(channel, x_used)?;
    let exact = match input {
        InputSpec::Fixed(state) => exact_success_probability(state, channel, x_used)?,
        InputSpec::Random => exact_success_probability(&probe_input(), channel, x_used)?,
    };

    let mut conclusive_trials = 0u64;
    let mut fidelity_sum = 0.0f64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial + 1);
        let trial_input = match input {
            InputSpec::Fixed(state) => state.clone(),
            InputSpec::Random => InputState::random(&mut rng),
        };
        let world = prepare_world(&trial_input, channel)?;
        let (bell_23, bell_14, bob_state, branch_prob) = alice_measure(&world, &mut rng)?;
        let entangled = bob_entangle_ancilla(&bob_state)?;
        let result = bob_discriminate_with(
            &entangled,
            &povm,
            bell_23,
            bell_14,
            &trial_input,
            branch_prob,
            &mut rng,
        )?;
        if result.conclusive {
            conclusive_trials += 1;
            fidelity_sum += result.fidelity.expect("conclusive results carry fidelity");
        }
    }

    Ok(RunStatistics {
        trials,
        conclusive_trials,
        conclusive_rate: conclusive_trials as f64 / trials as f64,
        mean_conclusive_fidelity: (conclusive_trials > 0)
            .then(|| fidelity_sum / conclusive_trials as f64),
        exact_success_probability: exact,
        x_used,
        min_x: min_x(channel),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn generic_input() -> InputState {
        InputState::from_unnormalized([
            c(0.53, -0.11),
            c(-0.34, 0.42),
            c(0.18, 0.27),
            c(0.58, 0.09),
        ])
        .unwrap()
    }

    fn generic_channel() -> ChannelParams {
        ChannelParams::from_unnormalized([0.82, 0.55, 0.44, 0.36]).unwrap()
    }

    fn random_input(rng: &mut ChaCha8Rng) -> InputState {
        InputState::random(rng)
    }

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

    #[test]
    fn input_state_validation() {
        assert!(InputState::new([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).is_ok());
        assert!(matches!(
            InputState::new([c(1.0, 0.0); 4]),
            Err(SimError::NotNormalized(_))
        ));
        assert!(matches!(
            InputState::from_unnormalized([c(0.0, 0.0); 4]),
            Err(SimError::ZeroNorm)
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let s = InputState::random(&mut rng);
            let norm: f64 = s.amplitudes().iter().map(|a| a.norm_sqr()).sum();
            assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn world_has_the_expected_amplitudes() {
        let input = generic_input();
        let channel = generic_channel();
        let world = prepare_world(&input, &channel).unwrap();
        assert_eq!(world.labels(), [Q1, Q2, Q3, Q4, Q5, Q6]);
        assert_relative_eq!(world.norm(), 1.0, epsilon = 1e-12);

        let v = input.amplitudes();
        let w = channel.coefficients();
        // Index 0b011001 = |01⟩₁₂ ⊗ |1001⟩₃₄₅₆ → amplitude b·β.
        let expected = v[1] * w[1];
        let got = world.amplitudes()[0b011001];
        assert_relative_eq!(got.re, expected.re, epsilon = 1e-14);
        assert_relative_eq!(got.im, expected.im, epsilon = 1e-14);

        let nonzero = world
            .amplitudes()
            .iter()
            .filter(|a| a.norm() > 1e-15)
            .count();
        assert_eq!(nonzero, 16);
        // A ket outside the channel's support stays empty: |01⟩ ⊗ |0001⟩.
        assert!(world.amplitudes()[0b010001].norm() < 1e-15);
    }

    #[test]
    fn degenerate_limit_is_the_all_zeros_ket() {
        // With a = 1 and α = 1 (hand-built states; the validated types
        // forbid degenerate channels), the world is |000000⟩.
        let input = StateVector::basis(vec![Q1, Q2], 0).unwrap();
        let channel = StateVector::basis(vec![Q3, Q4, Q5, Q6], 0).unwrap();
        let world = input.tensor(&channel).unwrap();
        assert_relative_eq!(world.amplitudes()[0].re, 1.0, epsilon = 1e-15);
        assert_eq!(
            world.amplitudes().iter().filter(|a| a.norm() > 0.0).count(),
            1
        );
    }

    /// Independent symbolic oracle for every Bell branch, derived by hand
    /// from the projection algebra: with Bell outcome bits (sign, parity) =
    /// (s, f), the unnormalized branch amplitude at |q5 q6⟩ is
    ///   (1/2) · v[(q5⊕f14)(q6⊕f23)] · w[q5 q6]
    ///        · (−1)^(s23·(q6⊕f23)) · (−1)^(s14·(q5⊕f14)).
    fn oracle_branch(
        input: &InputState,
        channel: &ChannelParams,
        bell_23: BellOutcome,
        bell_14: BellOutcome,
    ) -> Vec<Complex64> {
        let v = input.amplitudes();
        let w = channel.coefficients();
        let (s23, f23) = bell_23.bits();
        let (s14, f14) = bell_14.bits();
        (0..4usize)
            .map(|j| {
                let (q5, q6) = ((j >> 1) as u8, (j & 1) as u8);
                let vi = (((q5 ^ f14) << 1) | (q6 ^ f23)) as usize;
                let sign = if (s23 & (q6 ^ f23)) ^ (s14 & (q5 ^ f14)) == 1 {
                    -1.0
                } else {
                    1.0
                };
                v[vi] * w[j] * 0.5 * sign
            })
            .collect()
    }

    #[test]
    fn branches_match_the_symbolic_projection_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xa11ce);
        for _ in 0..20 {
            let input = random_input(&mut rng);
            let channel = random_channel(&mut rng);
            let world = prepare_world(&input, &channel).unwrap();
            for branch in alice_branches(&world).unwrap() {
                let oracle = oracle_branch(&input, &channel, branch.bell_23, branch.bell_14);
                let p: f64 = oracle.iter().map(|a| a.norm_sqr()).sum();
                assert_relative_eq!(branch.probability, p, epsilon = 1e-13);
                for (got, expected) in branch.state.amplitudes().iter().zip(&oracle) {
                    let want = expected / p.sqrt();
                    assert_relative_eq!(got.re, want.re, epsilon = 1e-12);
                    assert_relative_eq!(got.im, want.im, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn branch_probabilities_sum_to_one_and_are_positive() {
        let world = prepare_world(&generic_input(), &generic_channel()).unwrap();
        let branches = alice_branches(&world).unwrap();
        assert_eq!(branches.len(), 16);
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        for b in &branches {
            assert!(b.probability > 0.0);
        }
    }

    #[test]
    fn double_phi_plus_branch_is_the_diagonal_product() {
        let input = generic_input();
        let channel = generic_channel();
        let world = prepare_world(&input, &channel).unwrap();
        let branch = &alice_branches(&world).unwrap()[0];
        assert_eq!(branch.bell_23, BellOutcome::PhiPlus);
        assert_eq!(branch.bell_14, BellOutcome::PhiPlus);
        let v = input.amplitudes();
        let w = channel.coefficients();
        let unnormalized: Vec<Complex64> = (0..4).map(|j| v[j] * w[j] * 0.5).collect();
        let norm: f64 = unnormalized
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt();
        for (got, expected) in branch.state.amplitudes().iter().zip(&unnormalized) {
            let want = expected / norm;
            assert_relative_eq!(got.re, want.re, epsilon = 1e-12);
            assert_relative_eq!(got.im, want.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_everything_gives_equal_branches_that_reproduce_the_input() {
        let input = InputState::new([c(0.5, 0.0); 4]).unwrap();
        let channel = ChannelParams::uniform();
        let world = prepare_world(&input, &channel).unwrap();
        for branch in alice_branches(&world).unwrap() {
            assert_relative_eq!(branch.probability, 1.0 / 16.0, epsilon = 1e-13);
        }
        // Single-term input: a = 1 picks out |00⟩ on every Φ⁺Φ⁺-type path.
        let pointer =
            InputState::new([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let world = prepare_world(&pointer, &channel).unwrap();
        let branch = &alice_branches(&world).unwrap()[0];
        assert_relative_eq!(branch.state.amplitudes()[0].norm(), 1.0, epsilon = 1e-12);
    }

    /// The 16-branch decomposition reassembles the world state exactly:
    /// Σ over branches of |B23⟩⊗|B14⟩⊗(unnormalized branch state), with each
    /// tensor factor routed to its original qubit positions.
    #[test]
    fn branch_decomposition_reassembles_the_world() {
        let input = generic_input();
        let channel = generic_channel();
        let world = prepare_world(&input, &channel).unwrap();
        let branches = alice_branches(&world).unwrap();

        let mut rebuilt = vec![Complex64::new(0.0, 0.0); 64];
        for branch in &branches {
            let b23 = branch.bell_23.amplitudes();
            let b14 = branch.bell_14.amplitudes();
            let scale = branch.probability.sqrt();
            for (idx, slot) in rebuilt.iter_mut().enumerate() {
                let (q1, q2, q3) = ((idx >> 5) & 1, (idx >> 4) & 1, (idx >> 3) & 1);
                let (q4, q5, q6) = ((idx >> 2) & 1, (idx >> 1) & 1, idx & 1);
                let amp23 = b23[(q2 << 1) | q3];
                let amp14 = b14[(q1 << 1) | q4];
                let amp56 = branch.state.amplitudes()[(q5 << 1) | q6] * scale;
                *slot += amp23 * amp14 * amp56;
            }
        }
        for (got, expected) in rebuilt.iter().zip(world.amplitudes()) {
            assert_relative_eq!(got.re, expected.re, epsilon = 1e-12);
            assert_relative_eq!(got.im, expected.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn measurement_order_does_not_change_joint_probabilities() {
        let world = prepare_world(&generic_input(), &generic_channel()).unwrap();
        for bell_23 in BELL_OUTCOMES {
            for bell_14 in BELL_OUTCOMES {
                let a = world
                    .project_onto(&[Q2, Q3], &bell_23.amplitudes())
                    .unwrap()
                    .project_onto(&[Q1, Q4], &bell_14.amplitudes())
                    .unwrap();
                let b = world
                    .project_onto(&[Q1, Q4], &bell_14.amplitudes())
                    .unwrap()
                    .project_onto(&[Q2, Q3], &bell_23.amplitudes())
                    .unwrap();
                assert_relative_eq!(a.norm().powi(2), b.norm().powi(2), epsilon = 1e-13);
                for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                    assert_relative_eq!(x.re, y.re, epsilon = 1e-13);
                    assert_relative_eq!(x.im, y.im, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn entangling_copies_the_pair_onto_the_ancillas() {
        let world = prepare_world(&generic_input(), &generic_channel()).unwrap();
        let branch = &alice_branches(&world).unwrap()[5];
        let entangled = bob_entangle_ancilla(&branch.state).unwrap();
        assert_eq!(entangled.labels(), [Q5, Q6, ANCILLA_A, ANCILLA_B]);
        for idx in 0..16usize {
            let (q5, q6, a, b) = ((idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1);
            let expected = if a == q5 && b == q6 {
                branch.state.amplitudes()[(q5 << 1) | q6]
            } else {
                Complex64::new(0.0, 0.0)
            };
            let got = entangled.amplitudes()[idx];
            assert_relative_eq!(got.re, expected.re, epsilon = 1e-14);
            assert_relative_eq!(got.im, expected.im, epsilon = 1e-14);
        }
    }

    #[test]
    fn entangling_preserves_the_pair_marginal() {
        let world = prepare_world(&generic_input(), &generic_channel()).unwrap();
        let branch = &alice_branches(&world).unwrap()[9];
        let entangled = bob_entangle_ancilla(&branch.state).unwrap();
        for pattern in 0..4usize {
            let before = branch.state.amplitudes()[pattern].norm_sqr();
            let after: f64 = (0..4usize)
                .map(|anc| entangled.amplitudes()[(pattern << 2) | anc].norm_sqr())
                .sum();
            assert_relative_eq!(before, after, epsilon = 1e-14);
        }
    }

    #[test]
    fn entangling_requires_the_receiver_labels() {
        let wrong = StateVector::basis(vec![Q1, Q2], 0).unwrap();
        assert!(matches!(
            bob_entangle_ancilla(&wrong),
            Err(SimError::LabelMismatch)
        ));
    }

    #[test]
    fn copied_register_coefficients_follow_the_diagonal_branch() {
        // On the (Φ⁺,Φ⁺) branch, the copy step sends the normalized
        // diagonal state Σ v_j w_j |j⟩ to Σ v_j w_j |jj⟩: the coefficient of
        // |0101⟩ is the normalized b·β.
        let input = generic_input();
        let channel = generic_channel();
        let world = prepare_world(&input, &channel).unwrap();
        let branch = &alice_branches(&world).unwrap()[0];
        let entangled = bob_entangle_ancilla(&branch.state).unwrap();
        let v = input.amplitudes();
        let w = channel.coefficients();
        let norm: f64 = (0..4).map(|j| (v[j] * w[j]).norm_sqr()).sum::<f64>().sqrt();
        let expected = v[1] * w[1] / norm;
        let got = entangled.amplitudes()[0b0101];
        assert_relative_eq!(got.re, expected.re, epsilon = 1e-12);
        assert_relative_eq!(got.im, expected.im, epsilon = 1e-12);
    }

    #[test]
    fn conclusive_recovery_is_exact_for_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xf1de);
        for _ in 0..10 {
            let input = random_input(&mut rng);
            let channel = random_channel(&mut rng);
            let x = min_x(&channel) * rng.gen_range(1.0..2.0);
            let povm = build_povm(&channel, x).unwrap();
            let reference = input.state_vector([Q5, Q6]).unwrap();
            let world = prepare_world(&input, &channel).unwrap();
            for branch in alice_branches(&world).unwrap() {
                let entangled = bob_entangle_ancilla(&branch.state).unwrap();
                for outcome in 1..=4usize {
                    let (reduced, _) = entangled
                        .project_onto(
                            &[ANCILLA_A, ANCILLA_B],
                            povm.discrimination_state(outcome).amplitudes(),
                        )
                        .unwrap()
                        .normalized()
                        .unwrap();
                    let recovered =
                        apply_recovery(&reduced, branch.bell_23, branch.bell_14, outcome).unwrap();
                    let f = fidelity(&recovered, &reference).unwrap();
                    assert!(
                        (f - 1.0).abs() < 1e-10,
                        "branch ({}, {}), outcome {outcome}: fidelity {f}",
                        branch.bell_23.name(),
                        branch.bell_14.name(),
                    );
                }
            }
        }
    }

    #[test]
    fn sampled_runs_report_conclusive_and_inconclusive_outcomes_faithfully() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xb0b);
        let input = generic_input();
        let channel = generic_channel();
        let x = 2.5 * min_x(&channel);
        let povm = build_povm(&channel, x).unwrap();
        let mut saw_conclusive = false;
        let mut saw_inconclusive = false;
        for _ in 0..200 {
            let world = prepare_world(&input, &channel).unwrap();
            let (b23, b14, bob, p) = alice_measure(&world, &mut rng).unwrap();
            let entangled = bob_entangle_ancilla(&bob).unwrap();
            let result =
                bob_discriminate_with(&entangled, &povm, b23, b14, &input, p, &mut rng).unwrap();
            assert!(result.branch_probability > 0.0);
            assert!(result.povm_probability > 0.0);
            if result.conclusive {
                saw_conclusive = true;
                assert!((1..=4).contains(&result.povm_index));
                assert!((result.fidelity.unwrap() - 1.0).abs() < 1e-10);
                assert!(result.recovered.is_some());
            } else {
                saw_inconclusive = true;
                assert_eq!(result.povm_index, 5);
                assert!(result.fidelity.is_none());
                assert!(result.recovered.is_none());
            }
        }
        assert!(saw_conclusive && saw_inconclusive);
    }

    #[test]
    fn exact_probability_matches_the_reciprocal_sum_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e9e);
        for _ in 0..10 {
            let input = random_input(&mut rng);
            let channel = random_channel(&mut rng);
            let x = min_x(&channel) * rng.gen_range(1.0..3.0);
            let p = exact_success_probability(&input, &channel, x).unwrap();
            let nsq: f64 = channel.coefficients().iter().map(|w| 1.0 / (w * w)).sum();
            assert_relative_eq!(p, 16.0 / (x * nsq), epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn exact_probability_is_input_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1d1d);
        let channel = generic_channel();
        let x = 1.4 * min_x(&channel);
        let baseline = exact_success_probability(&generic_input(), &channel, x).unwrap();
        for _ in 0..8 {
            let input = random_input(&mut rng);
            let p = exact_success_probability(&input, &channel, x).unwrap();
            assert_relative_eq!(p, baseline, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn success_probability_scales_as_one_over_x_and_peaks_at_min_x() {
        let input = generic_input();
        let channel = generic_channel();
        let xmin = min_x(&channel);
        let p0 = exact_success_probability(&input, &channel, xmin).unwrap();
        for factor in [1.3, 2.0, 4.0 / xmin] {
            let p = exact_success_probability(&input, &channel, xmin * factor).unwrap();
            assert_relative_eq!(p * factor, p0, epsilon = 1e-12, max_relative = 1e-12);
            assert!(p < p0);
        }
        // At the optimum the probability equals 4·w_min² (closed form).
        let wmin = channel
            .coefficients()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert_relative_eq!(p0, 4.0 * wmin * wmin, epsilon = 1e-12);
    }

    #[test]
    fn x_below_the_minimum_is_rejected() {
        let channel = generic_channel();
        let x = 0.8 * min_x(&channel);
        assert!(matches!(
            exact_success_probability(&generic_input(), &channel, x),
            Err(SimError::PositivityViolation { index: 5, .. })
        ));
        assert!(matches!(
            run_teleportation(
                &InputSpec::Fixed(generic_input()),
                &channel,
                XChoice::Fixed(x),
                10,
                0,
            ),
            Err(SimError::PositivityViolation { index: 5, .. })
        ));
    }

    #[test]
    fn uniform_channel_at_x_one_is_deterministic_teleportation() {
        let stats = run_teleportation(
            &InputSpec::Random,
            &ChannelParams::uniform(),
            XChoice::Auto,
            300,
            7,
        )
        .unwrap();
        assert_eq!(stats.conclusive_trials, 300);
        assert_relative_eq!(stats.conclusive_rate, 1.0);
        assert_relative_eq!(stats.x_used, 1.0, epsilon = 1e-12);
        assert_relative_eq!(stats.exact_success_probability, 1.0, epsilon = 1e-12);
        assert!((stats.mean_conclusive_fidelity.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn auto_scaling_resolves_to_the_minimum() {
        let channel = generic_channel();
        assert_eq!(resolve_x(&channel, XChoice::Auto), min_x(&channel));
        assert_eq!(resolve_x(&channel, XChoice::Fixed(2.5)), 2.5);
    }

    #[test]
    fn runs_are_reproducible_and_validate_trial_count() {
        let spec = InputSpec::Fixed(generic_input());
        let channel = generic_channel();
        let a = run_teleportation(&spec, &channel, XChoice::Auto, 500, 99).unwrap();
        let b = run_teleportation(&spec, &channel, XChoice::Auto, 500, 99).unwrap();
        assert_eq!(a, b);
        let other = run_teleportation(&spec, &channel, XChoice::Auto, 500, 100).unwrap();
        assert_ne!(a.conclusive_trials, 0);
        // A different seed reshuffles outcomes, but the exact probability is
        // a function of (channel, x) only.
        assert_eq!(
            a.exact_success_probability.to_bits(),
            other.exact_success_probability.to_bits()
        );
        assert!(matches!(
            run_teleportation(&spec, &channel, XChoice::Auto, 0, 1),
            Err(SimError::InvalidTrialCount(0))
        ));
    }

    #[test]
    fn empirical_rate_tracks_the_exact_probability() {
        let spec = InputSpec::Fixed(generic_input());
        let channel = generic_channel();
        let stats = run_teleportation(&spec, &channel, XChoice::Fixed(3.0), 4000, 2024).unwrap();
        let p = stats.exact_success_probability;
        let sigma = (p * (1.0 - p) / 4000.0).sqrt();
        assert!(
            (stats.conclusive_rate - p).abs() <= 3.0 * sigma,
            "rate {} vs exact {p} (σ = {sigma})",
            stats.conclusive_rate,
        );
        if let Some(mean) = stats.mean_conclusive_fidelity {
            assert!((mean - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn teleport_single_reproduces_arbitrary_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x51);
        // Pointer state |0⟩ is reproduced exactly.
        let zero = StateVector::basis(vec![Q1], 0).unwrap();
        let (_, out) = teleport_single(&zero, &mut rng).unwrap();
        assert!((fidelity(&out, &zero).unwrap() - 1.0).abs() < 1e-12);
        // The symmetric superposition likewise.
        let plus = StateVector::qubit(
            Q1,
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        )
        .unwrap();
        let (_, out) = teleport_single(&plus, &mut rng).unwrap();
        assert!((fidelity(&out, &plus).unwrap() - 1.0).abs() < 1e-12);

        let mut seen = [false; 4];
        for _ in 0..200 {
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let state = StateVector::qubit(
                Q1,
                c((theta / 2.0).cos(), 0.0),
                c(phi.cos(), phi.sin()) * (theta / 2.0).sin(),
            )
            .unwrap();
            let (bits, out) = teleport_single(&state, &mut rng).unwrap();
            seen[((bits.0 << 1) | bits.1) as usize] = true;
            assert!((fidelity(&out, &state).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(seen.iter().all(|&s| s), "all four messages should occur");
    }

    #[test]
    fn teleport_single_rejects_bad_inputs() {
        let two = StateVector::basis(vec![Q1, Q2], 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            teleport_single(&two, &mut rng),
            Err(SimError::ArityMismatch { .. })
        ));
        let unnormalized = StateVector::new(vec![Q1], vec![c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(
            teleport_single(&unnormalized, &mut rng),
            Err(SimError::NotNormalized(_))
        ));
    }

    #[test]
    fn fidelity_is_positional_and_bounded() {
        let a = StateVector::basis(vec![Q1, Q2], 1).unwrap();
        let b = StateVector::basis(vec![Q5, Q6], 1).unwrap();
        assert_relative_eq!(fidelity(&a, &b).unwrap(), 1.0);
        let orthogonal = StateVector::basis(vec![Q5, Q6], 2).unwrap();
        assert_relative_eq!(fidelity(&a, &orthogonal).unwrap(), 0.0);
        let single = StateVector::basis(vec![Q1], 0).unwrap();
        assert!(matches!(
            fidelity(&a, &single),
            Err(SimError::DimensionMismatch { .. })
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let s = random_input(&mut rng).state_vector([Q1, Q2]).unwrap();
            let r = random_input(&mut rng).state_vector([Q1, Q2]).unwrap();
            let direct: Complex64 = r
                .amplitudes()
                .iter()
                .zip(s.amplitudes())
                .map(|(x, y)| x.conj() * y)
                .sum();
            let f = fidelity(&s, &r).unwrap();
            assert_relative_eq!(f, direct.norm_sqr(), epsilon = 1e-14);
            assert!((0.0..=1.0 + 1e-12).contains(&f));
        }
    }
}
