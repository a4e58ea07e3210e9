//! Dense state-vector engine for small qubit registers.
//!
//! States hold `2^n` complex amplitudes for `n <= 8` qubits. Qubit 0 is the
//! most significant bit of the basis-state index, so a ket label reads
//! left-to-right in qubit order: `|abc>` has amplitude `amps[a*4 + b*2 + c]`.
//! Every operation returns a fresh state; nothing is mutated in place, which
//! keeps states safe to share across threads.

use num_complex::Complex64;
use rand::Rng;

use crate::error::Error;

/// Hard cap on register width. The protocol needs at most four qubits per
/// episode (encode particle, Alice's half, Bob's half, Eve's ancilla).
pub const MAX_QUBITS: usize = 8;

/// Tolerance for runtime normalization checks.
pub const NORM_TOL: f64 = 1e-9;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Measurement basis. Z eigenstates are `|0>`, `|1>`; X eigenstates are
/// `|+> = (|0>+|1>)/sqrt(2)` and `|-> = (|0>-|1>)/sqrt(2)`.
///
/// Bit convention: Z outcome 0 is `|0>`, 1 is `|1>`; X outcome 0 is `|+>`,
/// 1 is `|->`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Basis::Z => write!(f, "Z"),
            Basis::X => write!(f, "X"),
        }
    }
}

/// One projective measurement: which qubit, which basis, the sampled bit and
/// the Born probability of that bit (the squared norm of the projected
/// component before renormalization).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOutcome {
    pub qubit: usize,
    pub basis: Basis,
    pub bit: u8,
    pub probability: f64,
}

/// A pure state of `num_qubits` qubits as a dense amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// Build a state from raw amplitudes, validating length, finiteness and
    /// normalization.
    pub fn from_amplitudes(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self, Error> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::QubitCountOutOfRange(num_qubits));
        }
        if amps.len() != 1 << num_qubits {
            return Err(Error::MalformedLabel(format!(
                "{} amplitudes for {} qubits",
                amps.len(),
                num_qubits
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFiniteAmplitude);
        }
        let state = QuantumState { num_qubits, amps };
        let n2 = state.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::UnnormalizedState(n2));
        }
        Ok(state)
    }

    /// Computational basis ket described by a bit-string label, e.g.
    /// `basis_state(3, "010")` is `|010>`.
    pub fn basis_state(num_qubits: usize, label: &str) -> Result<Self, Error> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::QubitCountOutOfRange(num_qubits));
        }
        if label.len() != num_qubits || !label.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::MalformedLabel(label.to_string()));
        }
        let index = label
            .bytes()
            .fold(0usize, |acc, b| (acc << 1) | usize::from(b == b'1'));
        let mut amps = vec![Complex64::ZERO; 1 << num_qubits];
        amps[index] = Complex64::ONE;
        Ok(QuantumState { num_qubits, amps })
    }

    /// The shared entangled pair `(|00> + |11>)/sqrt(2)`.
    pub fn epr_pair() -> Self {
        let c = Complex64::new(SQRT_HALF, 0.0);
        QuantumState {
            num_qubits: 2,
            amps: vec![c, Complex64::ZERO, Complex64::ZERO, c],
        }
    }

    /// Single-qubit X eigenstate: `|+>` for bit 0, `|->` for bit 1. This is
    /// the state Alice prepares to encode one bit.
    pub fn x_eigenstate(bit: u8) -> Self {
        assert!(bit <= 1, "bit must be 0 or 1");
        let c = Complex64::new(SQRT_HALF, 0.0);
        let amps = if bit == 0 { vec![c, c] } else { vec![c, -c] };
        QuantumState {
            num_qubits: 1,
            amps,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest elementwise amplitude difference to another state. Handy for
    /// amplitude-exact assertions.
    pub fn amplitude_distance(&self, other: &QuantumState) -> f64 {
        assert_eq!(self.num_qubits, other.num_qubits);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Bit mask selecting `qubit` inside a basis-state index.
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), Error> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitIndexOutOfRange {
                index: qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Kronecker composite with `self`'s qubits first (most significant).
    pub fn tensor(&self, other: &QuantumState) -> Result<QuantumState, Error> {
        let total = self.num_qubits + other.num_qubits;
        if total > MAX_QUBITS {
            return Err(Error::QubitBudgetExceeded(total));
        }
        let mut amps = Vec::with_capacity(1 << total);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(QuantumState {
            num_qubits: total,
            amps,
        })
    }

    /// Single-qubit Hadamard at `qubit`.
    pub fn hadamard(&self, qubit: usize) -> Result<QuantumState, Error> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        let mut amps = self.amps.clone();
        for i in 0..amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let lo = self.amps[i];
                let hi = self.amps[j];
                amps[i] = (lo + hi) * SQRT_HALF;
                amps[j] = (lo - hi) * SQRT_HALF;
            }
        }
        Ok(QuantumState {
            num_qubits: self.num_qubits,
            amps,
        })
    }

    /// CNOT: flips `target` on every basis ket where `control` is 1.
    pub fn cnot(&self, control: usize, target: usize) -> Result<QuantumState, Error> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::ControlEqualsTarget(control));
        }
        let cmask = self.mask(control);
        let tmask = self.mask(target);
        let mut amps = self.amps.clone();
        for i in 0..amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                amps.swap(i, i | tmask);
            }
        }
        Ok(QuantumState {
            num_qubits: self.num_qubits,
            amps,
        })
    }

    /// Project `qubit` onto outcome `bit` in `basis`. Returns the Born
    /// probability and, when it is nonzero, the renormalized collapsed state.
    ///
    /// An X projection is realized by Hadamard conjugation of the Z
    /// projector, so there is a single projector code path.
    pub fn project(
        &self,
        qubit: usize,
        basis: Basis,
        bit: u8,
    ) -> Result<(f64, Option<QuantumState>), Error> {
        self.check_qubit(qubit)?;
        assert!(bit <= 1, "bit must be 0 or 1");
        match basis {
            Basis::Z => Ok(self.project_z(qubit, bit)),
            Basis::X => {
                let rotated = self.hadamard(qubit)?;
                let (p, collapsed) = rotated.project_z(qubit, bit);
                let collapsed = match collapsed {
                    Some(s) => Some(s.hadamard(qubit)?),
                    None => None,
                };
                Ok((p, collapsed))
            }
        }
    }

    fn project_z(&self, qubit: usize, bit: u8) -> (f64, Option<QuantumState>) {
        let mask = self.mask(qubit);
        let want = if bit == 1 { mask } else { 0 };
        let p: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == want)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if p <= 0.0 {
            return (0.0, None);
        }
        let scale = 1.0 / p.sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if i & mask == want {
                    a * scale
                } else {
                    Complex64::ZERO
                }
            })
            .collect();
        (
            p,
            Some(QuantumState {
                num_qubits: self.num_qubits,
                amps,
            }),
        )
    }

    /// Sample a projective measurement of `qubit` in `basis` with Born
    /// probabilities, returning the outcome and the collapsed state.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        qubit: usize,
        basis: Basis,
        rng: &mut R,
    ) -> Result<(MeasurementOutcome, QuantumState), Error> {
        let (p0, s0) = self.project(qubit, basis, 0)?;
        let (p1, s1) = self.project(qubit, basis, 1)?;
        let total = p0 + p1;
        if total < NORM_TOL {
            return Err(Error::UnnormalizedState(total));
        }
        let (bit, probability, state) = if rng.random::<f64>() < p0 / total {
            (0, p0, s0)
        } else {
            (1, p1, s1)
        };
        let state = state.expect("sampled branch has nonzero probability");
        Ok((
            MeasurementOutcome {
                qubit,
                basis,
                bit,
                probability,
            },
            state,
        ))
    }

    /// Exact joint probability for every bit-string outcome of an ordered
    /// measurement plan, computed by sequential projection. The first plan
    /// entry is the most significant bit of the outcome index.
    pub fn outcome_distribution(
        &self,
        plan: &[(usize, Basis)],
    ) -> Result<OutcomeDistribution, Error> {
        let mut seen = [false; MAX_QUBITS];
        for &(q, _) in plan {
            self.check_qubit(q)?;
            if seen[q] {
                return Err(Error::DuplicatePlanQubit(q));
            }
            seen[q] = true;
        }
        let mut probs = vec![0.0; 1 << plan.len()];
        walk_outcomes(self, plan, 1.0, 0, &mut probs)?;
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < NORM_TOL);
        Ok(OutcomeDistribution {
            plan: plan.to_vec(),
            probs,
        })
    }
}

fn walk_outcomes(
    state: &QuantumState,
    plan: &[(usize, Basis)],
    acc: f64,
    index: usize,
    probs: &mut [f64],
) -> Result<(), Error> {
    let Some(&(qubit, basis)) = plan.first() else {
        probs[index] = acc;
        return Ok(());
    };
    for bit in 0..2u8 {
        let (p, collapsed) = state.project(qubit, basis, bit)?;
        if let Some(next) = collapsed {
            walk_outcomes(
                &next,
                &plan[1..],
                acc * p,
                (index << 1) | bit as usize,
                probs,
            )?;
        }
    }
    Ok(())
}

/// Exact probability table over the outcomes of a measurement plan.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    plan: Vec<(usize, Basis)>,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn plan(&self) -> &[(usize, Basis)] {
        &self.plan
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probability(&self, outcome: usize) -> f64 {
        self.probs[outcome]
    }

    /// Bit-string label of an outcome index, in plan order.
    pub fn label(&self, outcome: usize) -> String {
        bit_label(outcome, self.plan.len())
    }
}

/// Format `value` as a bit string of `width` bits, most significant first.
pub fn bit_label(value: usize, width: usize) -> String {
    (0..width)
        .map(|k| {
            if value & (1 << (width - 1 - k)) != 0 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}
