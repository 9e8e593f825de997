//! Dense complex state vectors and operators for small labeled registers.
//!
//! A [`StateVector`] holds the full amplitude vector of up to [`MAX_QUBITS`]
//! qubits, each identified by a [`Label`]. The first label in the list is the
//! *most significant* bit of the amplitude index, so kets read left to right:
//! for labels `(1,2)` the amplitude of `|10⟩` lives at index `0b10 = 2`.
//!
//! States and operators are immutable; every operation returns a new value.
//! Global phase is never canonicalized — callers compare states with the
//! phase-insensitive fidelity `|⟨a|b⟩|²` instead of amplitude-wise equality.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::tolerances::{EPS_NORM, EPS_ZERO};

mod eigen;

pub use eigen::{hermitian_eigen, HermitianEigen};

/// Hard cap on register size. Dense simulation of the protocol needs at most
/// six particles plus two ancillas.
pub const MAX_QUBITS: usize = 8;

/// Identifier of a single qubit within a register.
///
/// The protocol uses `'1'..'6'` for the particles and `'A'`, `'B'` for the
/// receiver's ancillas, but any character is accepted.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Label(pub char);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bloch-sphere angles of a single-qubit pure state, with `theta` in `[0, π]`
/// and `phi` in `[0, 2π)`. The overall phase convention makes the `|0⟩`
/// amplitude real and non-negative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

/// Pure state of a labeled qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    labels: Vec<Label>,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state from explicit amplitudes.
    ///
    /// Checks structure only (distinct labels, `2^n` amplitudes, register
    /// cap); the amplitudes may be unnormalized, e.g. when assembling a
    /// measurement branch that will be normalized afterwards.
    pub fn new(labels: Vec<Label>, amps: Vec<Complex64>) -> Result<Self> {
        if labels.len() > MAX_QUBITS {
            return Err(SimError::TooManyQubits(labels.len()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(SimError::LabelCollision(*l));
            }
        }
        let dim = 1usize << labels.len();
        if amps.len() != dim {
            return Err(SimError::DimensionMismatch {
                expected: dim,
                got: amps.len(),
            });
        }
        Ok(Self { labels, amps })
    }

    /// Computational basis ket `|index⟩` on the given labels.
    pub fn basis(labels: Vec<Label>, index: usize) -> Result<Self> {
        let dim = 1usize << labels.len();
        if index >= dim {
            return Err(SimError::DimensionMismatch {
                expected: dim,
                got: index,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(labels, amps)
    }

    /// Single-qubit state `a|0⟩ + b|1⟩`.
    pub fn qubit(label: Label, a: Complex64, b: Complex64) -> Result<Self> {
        Self::new(vec![label], vec![a, b])
    }

    /// Single-qubit state from Bloch angles:
    /// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    pub fn from_bloch(label: Label, angles: &BlochAngles) -> Result<Self> {
        let half = angles.theta / 2.0;
        Self::qubit(
            label,
            Complex64::new(half.cos(), 0.0),
            Complex64::from_polar(half.sin(), angles.phi),
        )
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Index of a label within the register.
    fn position(&self, label: Label) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or(SimError::UnknownLabel(label))
    }

    /// Bit shifts of the given target labels inside the amplitude index
    /// (first label = most significant bit).
    fn shifts(&self, targets: &[Label]) -> Result<Vec<usize>> {
        let n = self.num_qubits();
        let mut shifts = Vec::with_capacity(targets.len());
        for (i, &t) in targets.iter().enumerate() {
            if targets[..i].contains(&t) {
                return Err(SimError::LabelCollision(t));
            }
            shifts.push(n - 1 - self.position(t)?);
        }
        Ok(shifts)
    }

    /// Tensor product; `self`'s labels come first and stay most significant.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        for l in &other.labels {
            if self.labels.contains(l) {
                return Err(SimError::LabelCollision(*l));
            }
        }
        let n = self.num_qubits() + other.num_qubits();
        if n > MAX_QUBITS {
            return Err(SimError::TooManyQubits(n));
        }
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self::new(labels, amps)
    }

    /// Applies a unitary gate to the target qubits and returns the new state.
    /// The first target corresponds to the most significant bit of the gate's
    /// matrix index. Rejects operators that were not verified unitary.
    pub fn apply_gate(&self, gate: &DenseOperator, targets: &[Label]) -> Result<Self> {
        if !gate.unitary {
            return Err(SimError::NotUnitary(gate.unitarity_deviation()));
        }
        self.apply_operator(gate, targets)
    }

    /// Applies an arbitrary dense operator to the target qubits.
    ///
    /// Unlike [`apply_gate`](Self::apply_gate) this does not require
    /// unitarity, so the result is generally unnormalized; it is the
    /// building block for measurement and expectation-value arithmetic.
    pub fn apply_operator(&self, op: &DenseOperator, targets: &[Label]) -> Result<Self> {
        if op.arity() != targets.len() {
            return Err(SimError::ArityMismatch {
                expected: op.arity(),
                got: targets.len(),
            });
        }
        let shifts = self.shifts(targets)?;
        let k = targets.len();
        let subdim = 1usize << k;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut row = 0usize;
            let mut base = i;
            for (j, &sh) in shifts.iter().enumerate() {
                row |= ((i >> sh) & 1) << (k - 1 - j);
                base &= !(1usize << sh);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for col in 0..subdim {
                let mut src = base;
                for (j, &sh) in shifts.iter().enumerate() {
                    src |= ((col >> (k - 1 - j)) & 1) << sh;
                }
                acc += op.entry(row, col) * self.amps[src];
            }
            *slot = acc;
        }
        Self::new(self.labels.clone(), out)
    }

    /// Inner product `⟨self|other⟩`. Both states must carry identical label
    /// lists (same labels, same order).
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.labels != other.labels {
            return Err(SimError::LabelMismatch);
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Returns the normalized state together with the pre-normalization norm.
    /// Errors with [`SimError::ZeroNorm`] when the norm falls below the
    /// zero-vector threshold.
    pub fn normalized(&self) -> Result<(Self, f64)> {
        let norm = self.norm();
        if norm < EPS_ZERO {
            return Err(SimError::ZeroNorm);
        }
        let amps = self.amps.iter().map(|a| a / norm).collect();
        Ok((Self::new(self.labels.clone(), amps)?, norm))
    }

    /// Projects the target qubits onto the sub-state with the given
    /// amplitudes (`⟨sub|` applied from the left) and returns the resulting
    /// *unnormalized* state on the remaining labels, in their original order.
    pub fn project_onto(&self, targets: &[Label], sub: &[Complex64]) -> Result<Self> {
        let k = targets.len();
        if sub.len() != (1usize << k) {
            return Err(SimError::DimensionMismatch {
                expected: 1usize << k,
                got: sub.len(),
            });
        }
        let shifts = self.shifts(targets)?;
        let rest_labels: Vec<Label> = self
            .labels
            .iter()
            .copied()
            .filter(|l| !targets.contains(l))
            .collect();
        let rest_shifts: Vec<usize> = {
            let n = self.num_qubits();
            self.labels
                .iter()
                .enumerate()
                .filter(|(_, l)| !targets.contains(l))
                .map(|(i, _)| n - 1 - i)
                .collect()
        };
        let m = rest_labels.len();
        let mut out = vec![Complex64::new(0.0, 0.0); 1usize << m];
        for (i, amp) in self.amps.iter().enumerate() {
            let mut sub_idx = 0usize;
            for (j, &sh) in shifts.iter().enumerate() {
                sub_idx |= ((i >> sh) & 1) << (k - 1 - j);
            }
            let mut rest_idx = 0usize;
            for (j, &sh) in rest_shifts.iter().enumerate() {
                rest_idx |= ((i >> sh) & 1) << (m - 1 - j);
            }
            out[rest_idx] += sub[sub_idx].conj() * amp;
        }
        Self::new(rest_labels, out)
    }

    /// Bloch angles of a normalized single-qubit state.
    pub fn bloch_angles(&self) -> Result<BlochAngles> {
        if self.num_qubits() != 1 {
            return Err(SimError::DimensionMismatch {
                expected: 2,
                got: self.dim(),
            });
        }
        let norm = self.norm();
        if (norm - 1.0).abs() > EPS_NORM {
            return Err(SimError::NotNormalized(norm));
        }
        let a = self.amps[0];
        let b = self.amps[1];
        let theta = 2.0 * b.norm().atan2(a.norm());
        let mut phi = (b.arg() - a.arg()).rem_euclid(std::f64::consts::TAU);
        if phi >= std::f64::consts::TAU {
            phi = 0.0;
        }
        Ok(BlochAngles { theta, phi })
    }
}

/// Dense operator on a small register, stored row-major.
///
/// The `unitary` flag is determined at construction by checking
/// `U†U = I` within [`EPS_NORM`]; [`StateVector::apply_gate`] insists on it,
/// while measurement plumbing uses
/// [`apply_operator`](StateVector::apply_operator) and accepts anything.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    arity: usize,
    dim: usize,
    entries: Vec<Complex64>,
    unitary: bool,
}

impl DenseOperator {
    /// Builds an operator on `arity` qubits from `(2^arity)²` row-major
    /// entries.
    pub fn new(arity: usize, entries: Vec<Complex64>) -> Result<Self> {
        if arity > MAX_QUBITS {
            return Err(SimError::TooManyQubits(arity));
        }
        let dim = 1usize << arity;
        if entries.len() != dim * dim {
            return Err(SimError::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        let mut op = Self {
            arity,
            dim,
            entries,
            unitary: false,
        };
        op.unitary = op.unitarity_deviation() <= EPS_NORM;
        Ok(op)
    }

    /// Identity on `arity` qubits.
    pub fn identity(arity: usize) -> Self {
        let dim = 1usize << arity;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            entries[r * dim + r] = Complex64::new(1.0, 0.0);
        }
        Self::new(arity, entries).expect("identity dimensions are consistent")
    }

    /// Projector `|ψ⟩⟨ψ|` onto the given state.
    pub fn projector(state: &StateVector) -> Self {
        let dim = state.dim();
        let amps = state.amplitudes();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(amps[r] * amps[c].conj());
            }
        }
        Self::new(state.num_qubits(), entries).expect("projector dimensions are consistent")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// Max-abs deviation of `U†U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.entry(k, r).conj() * self.entry(k, c);
                }
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    /// Max-abs deviation of the operator from its own adjoint.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                worst = worst.max((self.entry(r, c) - self.entry(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                entries.push(self.entry(c, r).conj());
            }
        }
        Self::new(self.arity, entries).expect("adjoint dimensions are consistent")
    }

    /// Matrix product `self · other` (so `other` acts first on a ket).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(SimError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let d = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.entry(r, k) * other.entry(k, c);
                }
                entries[r * d + c] = acc;
            }
        }
        Self::new(self.arity, entries)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(SimError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Self::new(self.arity, entries)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(SimError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Self::new(self.arity, entries)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let entries = self.entries.iter().map(|a| a * factor).collect();
        Self::new(self.arity, entries).expect("scaling preserves dimensions")
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}
