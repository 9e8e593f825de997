//! Recovery operators for every (Bell outcome pair, conclusive POVM outcome)
//! combination.
//!
//! Each of the 16 Bell branches leaves the receiver's pair in the input state
//! scrambled by a known combination of bit flips and sign flips, and each
//! conclusive POVM outcome contributes one further sign pattern. The
//! composite undoing operator is always a pair of single-qubit Paulis drawn
//! from `{I, X, Z, ZX}` — the 16 phase-distinct two-qubit Pauli products,
//! since `ZX` equals `Y` up to a global phase and fidelity ignores phases.
//!
//! The table below was produced by [`regenerate_recovery_table`], an
//! exhaustive search over those 16 Pauli pairs on two unrelated generic
//! (input, channel) probes: for every branch and every conclusive outcome,
//! exactly one pair restores the input with fidelity 1 on both probes. The
//! result is frozen here as a constant so the hot path is a lookup, and a
//! regeneration test keeps the constant honest.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::gates::{BellOutcome, Correction, CORRECTIONS};
use crate::povm::{build_povm, min_x, ChannelParams, ANCILLA_A, ANCILLA_B};

use super::{alice_branches, bob_entangle_ancilla, fidelity, prepare_world, InputState, Q5, Q6};

/// `(correction on qubit 5, correction on qubit 6)`.
pub type CorrectionPair = (Correction, Correction);

/// Row index of the recovery table for a pair of Bell outcomes.
pub fn branch_index(bell_23: BellOutcome, bell_14: BellOutcome) -> usize {
    (bell_23.index() << 2) | bell_14.index()
}

use Correction::{I, X, Z, ZX};

/// Frozen lookup: `TABLE[branch_index][povm_outcome - 1]`. Rows are ordered
/// by `(bell_23, bell_14)` in Bell-outcome index order (Φ⁺, Ψ⁺, Φ⁻, Ψ⁻);
/// columns by conclusive POVM outcome 1..=4.
const TABLE: [[CorrectionPair; 4]; 16] = [
    // bell_23 = Φ⁺
    [(I, I), (Z, I), (I, Z), (Z, Z)],   // bell_14 = Φ⁺
    [(X, I), (ZX, I), (X, Z), (ZX, Z)], // bell_14 = Ψ⁺
    [(Z, I), (I, I), (Z, Z), (I, Z)],   // bell_14 = Φ⁻
    [(ZX, I), (X, I), (ZX, Z), (X, Z)], // bell_14 = Ψ⁻
    // bell_23 = Ψ⁺
    [(I, X), (Z, X), (I, ZX), (Z, ZX)],
    [(X, X), (ZX, X), (X, ZX), (ZX, ZX)],
    [(Z, X), (I, X), (Z, ZX), (I, ZX)],
    [(ZX, X), (X, X), (ZX, ZX), (X, ZX)],
    // bell_23 = Φ⁻
    [(I, Z), (Z, Z), (I, I), (Z, I)],
    [(X, Z), (ZX, Z), (X, I), (ZX, I)],
    [(Z, Z), (I, Z), (Z, I), (I, I)],
    [(ZX, Z), (X, Z), (ZX, I), (X, I)],
    // bell_23 = Ψ⁻
    [(I, ZX), (Z, ZX), (I, X), (Z, X)],
    [(X, ZX), (ZX, ZX), (X, X), (ZX, X)],
    [(Z, ZX), (I, ZX), (Z, X), (I, X)],
    [(ZX, ZX), (X, ZX), (ZX, X), (X, X)],
];

/// The frozen 16×4 recovery table.
pub fn recovery_table() -> &'static [[CorrectionPair; 4]; 16] {
    &TABLE
}

/// Recovery pair for a Bell branch and a conclusive POVM outcome (1..=4).
pub fn operators(
    bell_23: BellOutcome,
    bell_14: BellOutcome,
    povm_outcome: usize,
) -> Result<CorrectionPair> {
    if !(1..=4).contains(&povm_outcome) {
        return Err(SimError::UnrecoverableOutcome(povm_outcome));
    }
    Ok(TABLE[branch_index(bell_23, bell_14)][povm_outcome - 1])
}

fn probes() -> [(InputState, ChannelParams); 2] {
    // Generic amplitudes with no symmetry, so that distinct Pauli pairs give
    // visibly different fidelities and the search result is unique.
    let c = Complex64::new;
    let input1 = InputState::from_unnormalized([
        c(0.61, 0.13),
        c(-0.28, 0.44),
        c(0.37, -0.21),
        c(0.49, 0.05),
    ])
    .expect("probe input 1 has nonzero norm");
    let channel1 = ChannelParams::from_unnormalized([0.9, 0.6, 0.45, 0.3])
        .expect("probe channel 1 is strictly positive");
    let input2 = InputState::from_unnormalized([
        c(0.17, -0.52),
        c(0.64, 0.08),
        c(-0.31, 0.27),
        c(-0.11, -0.33),
    ])
    .expect("probe input 2 has nonzero norm");
    let channel2 = ChannelParams::from_unnormalized([0.35, 0.85, 0.55, 0.75])
        .expect("probe channel 2 is strictly positive");
    [(input1, channel1), (input2, channel2)]
}

/// Re-derives the recovery table from scratch by exhaustive search over the
/// 16 Pauli pairs, requiring fidelity 1 on two unrelated generic probes.
/// Returns exactly the value frozen in [`recovery_table`]; a test asserts so.
pub fn regenerate_recovery_table() -> Result<[[CorrectionPair; 4]; 16]> {
    // candidates[branch][outcome] = bit mask over the 16 Pauli pairs still
    // achieving fidelity 1 on every probe examined so far.
    let mut candidates = [[u16::MAX; 4]; 16];

    for (input, channel) in probes() {
        let x = 1.25 * min_x(&channel);
        let povm = build_povm(&channel, x)?;
        let reference = input.state_vector([Q5, Q6])?;
        let world = prepare_world(&input, &channel)?;
        for branch in alice_branches(&world)? {
            let row = branch_index(branch.bell_23, branch.bell_14);
            let entangled = bob_entangle_ancilla(&branch.state)?;
            for outcome in 1..=4usize {
                let (reduced, _) = entangled
                    .project_onto(
                        &[ANCILLA_A, ANCILLA_B],
                        povm.discrimination_state(outcome).amplitudes(),
                    )?
                    .normalized()?;
                for (pair_idx, (c5, c6)) in pauli_pairs().into_iter().enumerate() {
                    if candidates[row][outcome - 1] & (1 << pair_idx) == 0 {
                        continue;
                    }
                    let recovered = reduced
                        .apply_gate(&c5.operator(), &[Q5])?
                        .apply_gate(&c6.operator(), &[Q6])?;
                    if (fidelity(&recovered, &reference)? - 1.0).abs() > 1e-9 {
                        candidates[row][outcome - 1] &= !(1 << pair_idx);
                    }
                }
            }
        }
    }

    let pairs = pauli_pairs();
    let mut table = [[(I, I); 4]; 16];
    for (row, row_masks) in candidates.iter().enumerate() {
        for (col, mask) in row_masks.iter().enumerate() {
            assert_eq!(
                mask.count_ones(),
                1,
                "recovery search must single out one Pauli pair per case \
                 (branch {row}, outcome {}): mask {mask:#06x}",
                col + 1,
            );
            table[row][col] = pairs[mask.trailing_zeros() as usize];
        }
    }
    Ok(table)
}

fn pauli_pairs() -> [CorrectionPair; 16] {
    let mut pairs = [(I, I); 16];
    for (i, &c5) in CORRECTIONS.iter().enumerate() {
        for (j, &c6) in CORRECTIONS.iter().enumerate() {
            pairs[i * 4 + j] = (c5, c6);
        }
    }
    pairs
}
