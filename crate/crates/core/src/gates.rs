//! Standard gates, Bell states and the measurement primitives the protocol
//! needs: Bell-basis measurement of a qubit pair and computational-basis
//! measurement of a target list.
//!
//! Measurement convention: measured qubits are *removed* from the register,
//! so the post-measurement state lives on the remaining labels. The
//! `_retaining` variant keeps the measured pair in place (collapsed), which
//! is occasionally useful for idempotence checks and diagnostics.

use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Result, SimError};
use crate::qstate::{DenseOperator, Label, StateVector};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The gate set used by the protocol circuits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StandardGate {
    I,
    X,
    Z,
    H,
    /// Controlled-NOT; the first target is the control.
    Cnot,
}

impl FromStr for StandardGate {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I" => Ok(Self::I),
            "X" => Ok(Self::X),
            "Z" => Ok(Self::Z),
            "H" => Ok(Self::H),
            "CNOT" => Ok(Self::Cnot),
            other => Err(SimError::UnknownGate(other.to_string())),
        }
    }
}

/// Matrix of a standard gate. All of these carry the verified-unitary flag.
pub fn standard_gate(gate: StandardGate) -> DenseOperator {
    let entries = match gate {
        StandardGate::I => vec![re(1.0), re(0.0), re(0.0), re(1.0)],
        StandardGate::X => vec![re(0.0), re(1.0), re(1.0), re(0.0)],
        StandardGate::Z => vec![re(1.0), re(0.0), re(0.0), re(-1.0)],
        StandardGate::H => vec![
            re(FRAC_1_SQRT_2),
            re(FRAC_1_SQRT_2),
            re(FRAC_1_SQRT_2),
            re(-FRAC_1_SQRT_2),
        ],
        StandardGate::Cnot => {
            let mut m = vec![re(0.0); 16];
            // |00⟩→|00⟩, |01⟩→|01⟩, |10⟩→|11⟩, |11⟩→|10⟩ (control = first bit).
            m[0] = re(1.0);
            m[5] = re(1.0);
            m[2 * 4 + 3] = re(1.0);
            m[3 * 4 + 2] = re(1.0);
            m
        }
    };
    let arity = if gate == StandardGate::Cnot { 2 } else { 1 };
    DenseOperator::new(arity, entries).expect("standard gate dimensions are consistent")
}

/// The four Bell states, tagged with the two classical bits a Bell
/// measurement reports for them: the first bit is the sign bit (1 for the
/// `−` superposition), the second is the parity bit (1 for the `Ψ` states).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellOutcome {
    /// `(|00⟩+|11⟩)/√2`, bits (0,0)
    PhiPlus,
    /// `(|01⟩+|10⟩)/√2`, bits (0,1)
    PsiPlus,
    /// `(|00⟩−|11⟩)/√2`, bits (1,0)
    PhiMinus,
    /// `(|01⟩−|10⟩)/√2`, bits (1,1)
    PsiMinus,
}

pub const BELL_OUTCOMES: [BellOutcome; 4] = [
    BellOutcome::PhiPlus,
    BellOutcome::PsiPlus,
    BellOutcome::PhiMinus,
    BellOutcome::PsiMinus,
];

impl BellOutcome {
    /// Classical bit pair `(sign, parity)` reported for this outcome.
    pub fn bits(self) -> (u8, u8) {
        match self {
            Self::PhiPlus => (0, 0),
            Self::PsiPlus => (0, 1),
            Self::PhiMinus => (1, 0),
            Self::PsiMinus => (1, 1),
        }
    }

    pub fn from_bits(sign: u8, parity: u8) -> Self {
        match (sign & 1, parity & 1) {
            (0, 0) => Self::PhiPlus,
            (0, 1) => Self::PsiPlus,
            (1, 0) => Self::PhiMinus,
            _ => Self::PsiMinus,
        }
    }

    /// Index `0..4` in bit order: Φ⁺, Ψ⁺, Φ⁻, Ψ⁻.
    pub fn index(self) -> usize {
        let (s, p) = self.bits();
        ((s << 1) | p) as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::from_bits((i >> 1) as u8, i as u8)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::PhiPlus => "Phi+",
            Self::PsiPlus => "Psi+",
            Self::PhiMinus => "Phi-",
            Self::PsiMinus => "Psi-",
        }
    }

    /// Amplitudes over `|00⟩,|01⟩,|10⟩,|11⟩`.
    pub fn amplitudes(self) -> [Complex64; 4] {
        let h = FRAC_1_SQRT_2;
        match self {
            Self::PhiPlus => [re(h), re(0.0), re(0.0), re(h)],
            Self::PsiPlus => [re(0.0), re(h), re(h), re(0.0)],
            Self::PhiMinus => [re(h), re(0.0), re(0.0), re(-h)],
            Self::PsiMinus => [re(0.0), re(h), re(-h), re(0.0)],
        }
    }
}

/// The chosen Bell state on a labeled qubit pair.
pub fn bell_state(kind: BellOutcome, a: Label, b: Label) -> Result<StateVector> {
    StateVector::new(vec![a, b], kind.amplitudes().to_vec())
}

/// Draws an index from a discrete distribution. Entries may carry round-off
/// (tiny negatives are treated as zero); the distribution is assumed to sum
/// to 1 within round-off, and the draw consumes exactly one uniform variate.
pub(crate) fn sample_index(probs: &[f64], rng: &mut impl Rng) -> Result<usize> {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = Some(i);
            acc += p;
            if u < acc {
                return Ok(i);
            }
        }
    }
    // u landed in the round-off sliver past the accumulated total.
    last_positive.ok_or(SimError::ZeroProbabilityOutcome)
}

/// Measures qubits `(a, b)` in the Bell basis. Returns the outcome, the
/// normalized post-measurement state on the remaining labels, and the
/// outcome's probability. One uniform variate is consumed per call.
pub fn bell_measure(
    state: &StateVector,
    a: Label,
    b: Label,
    rng: &mut impl Rng,
) -> Result<(BellOutcome, StateVector, f64)> {
    let mut branches = Vec::with_capacity(4);
    let mut probs = [0.0f64; 4];
    for (k, outcome) in BELL_OUTCOMES.iter().enumerate() {
        let branch = state.project_onto(&[a, b], &outcome.amplitudes())?;
        let n = branch.norm();
        probs[k] = n * n;
        branches.push(branch);
    }
    let k = sample_index(&probs, rng)?;
    let (post, _) = branches[k].normalized()?;
    Ok((BELL_OUTCOMES[k], post, probs[k]))
}

/// Bell measurement that keeps the measured pair in the register, collapsed
/// onto the observed Bell state. Mainly useful for idempotence checks.
pub fn bell_measure_retaining(
    state: &StateVector,
    a: Label,
    b: Label,
    rng: &mut impl Rng,
) -> Result<(BellOutcome, StateVector, f64)> {
    let mut probs = [0.0f64; 4];
    for (k, outcome) in BELL_OUTCOMES.iter().enumerate() {
        let branch = state.project_onto(&[a, b], &outcome.amplitudes())?;
        probs[k] = branch.norm().powi(2);
    }
    let k = sample_index(&probs, rng)?;
    let projector = DenseOperator::projector(&bell_state(BELL_OUTCOMES[k], a, b)?);
    let (post, _) = state.apply_operator(&projector, &[a, b])?.normalized()?;
    Ok((BELL_OUTCOMES[k], post, probs[k]))
}

/// Measures the target qubits in the computational basis. Returns the
/// observed bits (in target order), the normalized post-measurement state on
/// the remaining labels, and the outcome's probability. One uniform variate
/// is consumed per call regardless of the number of targets.
pub fn measure_computational(
    state: &StateVector,
    targets: &[Label],
    rng: &mut impl Rng,
) -> Result<(Vec<u8>, StateVector, f64)> {
    let k = targets.len();
    let patterns = 1usize << k;
    let mut branches = Vec::with_capacity(patterns);
    let mut probs = vec![0.0f64; patterns];
    for pattern in 0..patterns {
        let mut sub = vec![Complex64::new(0.0, 0.0); patterns];
        sub[pattern] = Complex64::new(1.0, 0.0);
        let branch = state.project_onto(targets, &sub)?;
        probs[pattern] = branch.norm().powi(2);
        branches.push(branch);
    }
    let pattern = sample_index(&probs, rng)?;
    let (post, _) = branches[pattern].normalized()?;
    let bits = (0..k)
        .map(|j| ((pattern >> (k - 1 - j)) & 1) as u8)
        .collect();
    Ok((bits, post, probs[pattern]))
}

/// Pauli correction for single-qubit teleportation, keyed by the two
/// classical bits of the Bell measurement: `(0,0)→I`, `(0,1)→X`, `(1,0)→Z`,
/// `(1,1)→Z·X`. Applying the correction to the corresponding measurement
/// branch restores the input state up to global phase.
pub fn pauli_correction(bits: (u8, u8)) -> DenseOperator {
    Correction::from_bits(bits).operator()
}

/// Single-qubit Pauli correction, also the alphabet of the two-qubit
/// recovery table. `ZX` is the product Z·X (equal to iY); global phase is
/// irrelevant everywhere it is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Correction {
    I,
    X,
    Z,
    ZX,
}

pub const CORRECTIONS: [Correction; 4] =
    [Correction::I, Correction::X, Correction::Z, Correction::ZX];

impl Correction {
    pub fn from_bits(bits: (u8, u8)) -> Self {
        match (bits.0 & 1, bits.1 & 1) {
            (0, 0) => Self::I,
            (0, 1) => Self::X,
            (1, 0) => Self::Z,
            _ => Self::ZX,
        }
    }

    pub fn operator(self) -> DenseOperator {
        match self {
            Self::I => standard_gate(StandardGate::I),
            Self::X => standard_gate(StandardGate::X),
            Self::Z => standard_gate(StandardGate::Z),
            Self::ZX => standard_gate(StandardGate::Z)
                .mul(&standard_gate(StandardGate::X))
                .expect("Z and X share dimensions"),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::I => "I",
            Self::X => "X",
            Self::Z => "Z",
            Self::ZX => "ZX",
        }
    }
}
