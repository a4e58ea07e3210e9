//! Eve's attack strategies on the qubits Alice transmits to Bob.
//!
//! Two families are modeled. In an intercept-resend attack Eve measures the
//! in-transit qubit in a basis chosen by her policy and forwards a substitute
//! state. In the collective attack she entangles a `|0>` ancilla with the
//! in-transit qubit via CNOT (optionally conjugated by Hadamards on the
//! transmitted qubit) and measures the ancilla in the X basis later.
//!
//! Eve acts during the initial transmission, before Bob applies his Hadamard
//! layer, and cannot know which positions will receive it.

use rand::Rng;

use crate::error::Error;
use crate::statevec::{Basis, QuantumState};

/// How an intercept-resend Eve picks her measurement basis for each episode.
/// She cannot know which positions get the Hadamard layer, so any fixed or
/// random guess is available.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisPolicy {
    AlwaysZ,
    AlwaysX,
    /// Z or X with probability 1/2, independently per episode.
    UniformRandom,
}

impl BasisPolicy {
    pub fn choose<R: Rng + ?Sized>(&self, rng: &mut R) -> Basis {
        match self {
            BasisPolicy::AlwaysZ => Basis::Z,
            BasisPolicy::AlwaysX => Basis::X,
            BasisPolicy::UniformRandom => {
                if rng.random_bool(0.5) {
                    Basis::Z
                } else {
                    Basis::X
                }
            }
        }
    }
}

/// Eve's session-wide strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackModel {
    None,
    InterceptResend { policy: BasisPolicy },
    CollectiveCnot { pre_hadamard: bool },
}

impl AttackModel {
    pub fn is_none(&self) -> bool {
        matches!(self, AttackModel::None)
    }

    /// Resolve this strategy into the concrete action for one episode.
    /// `attack_probability` is the per-episode chance that Eve acts at all.
    pub fn resolve<R: Rng + ?Sized>(&self, attack_probability: f64, rng: &mut R) -> AttackAction {
        if self.is_none() {
            return AttackAction::None;
        }
        let acts = if attack_probability >= 1.0 {
            true
        } else if attack_probability <= 0.0 {
            false
        } else {
            rng.random_bool(attack_probability)
        };
        if !acts {
            return AttackAction::None;
        }
        match self {
            AttackModel::None => AttackAction::None,
            AttackModel::InterceptResend { policy } => AttackAction::InterceptResend {
                basis: policy.choose(rng),
            },
            AttackModel::CollectiveCnot { pre_hadamard } => AttackAction::CollectiveCnot {
                pre_hadamard: *pre_hadamard,
            },
        }
    }

    /// Stable kind name, matching the CLI's attack flag values.
    pub fn kind(&self) -> &'static str {
        match self {
            AttackModel::None => "none",
            AttackModel::InterceptResend {
                policy: BasisPolicy::AlwaysZ,
            } => "ir-z",
            AttackModel::InterceptResend {
                policy: BasisPolicy::AlwaysX,
            } => "ir-x",
            AttackModel::InterceptResend {
                policy: BasisPolicy::UniformRandom,
            } => "ir-random",
            AttackModel::CollectiveCnot {
                pre_hadamard: false,
            } => "collective",
            AttackModel::CollectiveCnot { pre_hadamard: true } => "collective-h",
        }
    }
}

impl std::str::FromStr for AttackModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(AttackModel::None),
            "ir-z" => Ok(AttackModel::InterceptResend {
                policy: BasisPolicy::AlwaysZ,
            }),
            "ir-x" => Ok(AttackModel::InterceptResend {
                policy: BasisPolicy::AlwaysX,
            }),
            "ir-random" => Ok(AttackModel::InterceptResend {
                policy: BasisPolicy::UniformRandom,
            }),
            "collective" => Ok(AttackModel::CollectiveCnot {
                pre_hadamard: false,
            }),
            "collective-h" => Ok(AttackModel::CollectiveCnot { pre_hadamard: true }),
            other => Err(Error::UnknownAttack(other.to_string())),
        }
    }
}

/// The concrete action Eve takes on one episode after her policy and the
/// per-episode attack probability have been resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackAction {
    None,
    InterceptResend { basis: Basis },
    CollectiveCnot { pre_hadamard: bool },
}

impl AttackAction {
    pub fn is_none(&self) -> bool {
        matches!(self, AttackAction::None)
    }

    /// Parse a concrete per-episode action. `ir-random` is a session policy,
    /// not a single action, so it is rejected here.
    pub fn from_kind(kind: &str) -> Result<Self, Error> {
        match kind {
            "none" => Ok(AttackAction::None),
            "ir-z" => Ok(AttackAction::InterceptResend { basis: Basis::Z }),
            "ir-x" => Ok(AttackAction::InterceptResend { basis: Basis::X }),
            "collective" => Ok(AttackAction::CollectiveCnot {
                pre_hadamard: false,
            }),
            "collective-h" => Ok(AttackAction::CollectiveCnot { pre_hadamard: true }),
            other => Err(Error::UnknownAttack(other.to_string())),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AttackAction::None => "none",
            AttackAction::InterceptResend { basis: Basis::Z } => "ir-z",
            AttackAction::InterceptResend { basis: Basis::X } => "ir-x",
            AttackAction::CollectiveCnot {
                pre_hadamard: false,
            } => "collective",
            AttackAction::CollectiveCnot { pre_hadamard: true } => "collective-h",
        }
    }
}

/// What Eve learned in one episode. Intercept fields are set by
/// [`intercept_resend`], the ancilla field by [`measure_ancilla_x`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EveRecord {
    pub intercept_basis: Option<Basis>,
    pub intercept_bit: Option<u8>,
    pub ancilla_x_bit: Option<u8>,
}

/// Intercept-resend: measure the transmitted qubit in `basis` and forward a
/// substitute. After a Z measurement Eve sends `|+>` for outcome 0 and `|->`
/// for outcome 1; after an X measurement she re-sends the collapsed
/// eigenstate itself. Either way the transmitted qubit ends up in a pure
/// product state with the rest of the system.
pub fn intercept_resend<R: Rng + ?Sized>(
    state: &QuantumState,
    qubit_b: usize,
    basis: Basis,
    rng: &mut R,
) -> Result<(QuantumState, EveRecord), Error> {
    let (outcome, collapsed) = state.measure(qubit_b, basis, rng)?;
    let resent = match basis {
        // |0> -> |+>, |1> -> |->: one Hadamard on the collapsed qubit.
        Basis::Z => collapsed.hadamard(qubit_b)?,
        Basis::X => collapsed,
    };
    Ok((
        resent,
        EveRecord {
            intercept_basis: Some(basis),
            intercept_bit: Some(outcome.bit),
            ancilla_x_bit: None,
        },
    ))
}

/// Collective attack: append a `|0>` ancilla and entangle it with the
/// transmitted qubit. The plain variant applies CNOT with the transmitted
/// qubit as control; the `pre_hadamard` variant conjugates that CNOT with
/// Hadamards on the transmitted qubit, i.e. it copies the qubit's X-basis
/// value instead of its Z-basis value.
pub fn collective_cnot(
    state: &QuantumState,
    qubit_b: usize,
    pre_hadamard: bool,
) -> Result<(QuantumState, EveRecord), Error> {
    let ancilla = state.num_qubits();
    let mut joint = state.tensor(&QuantumState::basis_state(1, "0")?)?;
    if pre_hadamard {
        joint = joint.hadamard(qubit_b)?;
        joint = joint.cnot(qubit_b, ancilla)?;
        joint = joint.hadamard(qubit_b)?;
    } else {
        joint = joint.cnot(qubit_b, ancilla)?;
    }
    Ok((joint, EveRecord::default()))
}

/// Eve's deferred measurement of her ancilla in the X basis.
pub fn measure_ancilla_x<R: Rng + ?Sized>(
    state: &QuantumState,
    ancilla: usize,
    rng: &mut R,
) -> Result<(QuantumState, u8), Error> {
    let (outcome, collapsed) = state.measure(ancilla, Basis::X, rng)?;
    Ok((collapsed, outcome.bit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::str::FromStr;

    const AMP_TOL: f64 = 1e-12;
    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;
    const C2: f64 = SQRT_HALF / 2.0;

    fn assert_amps(state: &QuantumState, expected: &[f64]) {
        let amps = state.amplitudes();
        assert_eq!(amps.len(), expected.len());
        for (k, (got, want)) in amps.iter().zip(expected).enumerate() {
            assert!(
                (got - Complex64::new(*want, 0.0)).norm() < AMP_TOL,
                "amplitude {k}: got {got}, want {want}"
            );
        }
    }

    /// Purity of the reduced single-qubit density matrix; 1 for a qubit in a
    /// pure product state with the rest of the system.
    fn single_qubit_purity(state: &QuantumState, qubit: usize) -> f64 {
        let n = state.num_qubits();
        let mask = 1usize << (n - 1 - qubit);
        let mut rho = [[Complex64::ZERO; 2]; 2];
        for (i, amp) in state.amplitudes().iter().enumerate() {
            for (j, other) in state.amplitudes().iter().enumerate() {
                if i & !mask == j & !mask {
                    let bi = usize::from(i & mask != 0);
                    let bj = usize::from(j & mask != 0);
                    rho[bi][bj] += amp * other.conj();
                }
            }
        }
        (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (rho[i][j] * rho[j][i]).re)
            .sum()
    }

    #[test]
    fn intercept_resend_z_forwards_x_eigenstate() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (state, record) =
                intercept_resend(&QuantumState::epr_pair(), 1, Basis::Z, &mut rng).unwrap();
            assert_eq!(record.intercept_basis, Some(Basis::Z));
            let bit = record.intercept_bit.unwrap();
            // Alice's half collapsed to |bit>, Bob receives |+> or |->.
            let alice = QuantumState::basis_state(1, if bit == 0 { "0" } else { "1" }).unwrap();
            let expected = alice.tensor(&QuantumState::x_eigenstate(bit)).unwrap();
            assert!(state.amplitude_distance(&expected) < AMP_TOL);
        }
    }

    #[test]
    fn intercept_resend_x_forwards_collapsed_eigenstate() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (state, record) =
                intercept_resend(&QuantumState::epr_pair(), 1, Basis::X, &mut rng).unwrap();
            let bit = record.intercept_bit.unwrap();
            // (|00>+|11>)/sqrt(2) = (|++>+|-->)/sqrt(2): both halves collapse
            // to the same X eigenstate.
            let half = QuantumState::x_eigenstate(bit);
            let expected = half.tensor(&half).unwrap();
            assert!(state.amplitude_distance(&expected) < AMP_TOL);
        }
    }

    #[test]
    fn intercept_resend_disentangles_the_forwarded_qubit() {
        for seed in 0..10 {
            for &basis in &[Basis::Z, Basis::X] {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (state, _) =
                    intercept_resend(&QuantumState::epr_pair(), 1, basis, &mut rng).unwrap();
                let purity = single_qubit_purity(&state, 1);
                assert!((purity - 1.0).abs() < 1e-9, "purity {purity}");
            }
        }
    }

    #[test]
    fn collective_cnot_entangles_ancilla() {
        // (|000> + |111>)/sqrt(2) over (A, B, ancilla).
        let (state, record) = collective_cnot(&QuantumState::epr_pair(), 1, false).unwrap();
        assert_eq!(record, EveRecord::default());
        assert_amps(
            &state,
            &[SQRT_HALF, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, SQRT_HALF],
        );
    }

    #[test]
    fn collective_cnot_pre_hadamard_copies_x_value() {
        // (|++0> + |--1>)/sqrt(2) over (A, B, ancilla).
        let (state, _) = collective_cnot(&QuantumState::epr_pair(), 1, true).unwrap();
        assert_amps(&state, &[C2, C2, C2, -C2, C2, -C2, C2, C2]);
    }

    #[test]
    fn pre_hadamard_variant_reduces_to_plain_after_protocol_hadamards() {
        // On a position where both parties apply their Hadamards, the
        // sandwiched attack leaves exactly the plain-attack state.
        let (sandwiched, _) = collective_cnot(&QuantumState::epr_pair(), 1, true).unwrap();
        let after = sandwiched.hadamard(1).unwrap().hadamard(0).unwrap();
        let (plain, _) = collective_cnot(&QuantumState::epr_pair(), 1, false).unwrap();
        assert!(after.amplitude_distance(&plain) < AMP_TOL);
    }

    #[test]
    fn encode_pipeline_after_collective_attack_amplitudes() {
        // Full pipeline over (a, A, B, E) on an unflagged position. Bit 0:
        // 1/(2 sqrt 2) [ |00>(|00>+|11>) + |10>(|00>-|11>)
        //              + |01>(|00>+|11>) + |11>(|11>-|00>) ].
        let (entangled, _) = collective_cnot(&QuantumState::epr_pair(), 1, false).unwrap();
        let state =
            crate::protocol::encode_pipeline_state(entangled.clone(), false, 0).unwrap();
        let mut expected = [0.0f64; 16];
        for (idx, sign) in [
            (0b0000, 1.0),
            (0b0011, 1.0),
            (0b1000, 1.0),
            (0b1011, -1.0),
            (0b0100, 1.0),
            (0b0111, 1.0),
            (0b1111, 1.0),
            (0b1100, -1.0),
        ] {
            expected[idx] = sign * C2;
        }
        assert_amps(&state, &expected);

        // Bit 1 swaps which (a, A) branches carry the minus-signed pairs:
        // 1/(2 sqrt 2) [ |00>(|00>-|11>) + |10>(|00>+|11>)
        //              + |01>(|11>-|00>) + |11>(|00>+|11>) ].
        let state = crate::protocol::encode_pipeline_state(entangled, false, 1).unwrap();
        let mut expected = [0.0f64; 16];
        for (idx, sign) in [
            (0b0000, 1.0),
            (0b0011, -1.0),
            (0b1000, 1.0),
            (0b1011, 1.0),
            (0b0111, 1.0),
            (0b0100, -1.0),
            (0b1100, 1.0),
            (0b1111, 1.0),
        ] {
            expected[idx] = sign * C2;
        }
        assert_amps(&state, &expected);
    }

    #[test]
    fn ancilla_x_measurement_is_unbiased_on_entangled_state() {
        let (state, _) = collective_cnot(&QuantumState::epr_pair(), 1, false).unwrap();
        let dist = state.outcome_distribution(&[(2, Basis::X)]).unwrap();
        assert!((dist.probability(0) - 0.5).abs() < 1e-12);
        assert!((dist.probability(1) - 0.5).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (_, bit) = measure_ancilla_x(&state, 2, &mut rng).unwrap();
        assert!(bit <= 1);
    }

    #[test]
    fn collective_cnot_respects_qubit_budget() {
        let wide = QuantumState::basis_state(8, "00000000").unwrap();
        assert!(matches!(
            collective_cnot(&wide, 0, false),
            Err(Error::QubitBudgetExceeded(9))
        ));
    }

    #[test]
    fn attack_kind_round_trip() {
        for kind in [
            "none",
            "ir-z",
            "ir-x",
            "ir-random",
            "collective",
            "collective-h",
        ] {
            let model = AttackModel::from_str(kind).unwrap();
            assert_eq!(model.kind(), kind);
        }
        assert!(AttackModel::from_str("bogus").is_err());
        assert!(AttackAction::from_kind("ir-random").is_err());
    }

    #[test]
    fn resolve_honors_attack_probability() {
        let model = AttackModel::CollectiveCnot {
            pre_hadamard: false,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(model.resolve(0.0, &mut rng).is_none());
        assert_eq!(
            model.resolve(1.0, &mut rng),
            AttackAction::CollectiveCnot {
                pre_hadamard: false
            }
        );
        let mut acted = 0;
        for _ in 0..1000 {
            if !model.resolve(0.3, &mut rng).is_none() {
                acted += 1;
            }
        }
        assert!((200..400).contains(&acted), "acted {acted} times");
    }

    #[test]
    fn uniform_policy_picks_both_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut z = 0;
        for _ in 0..1000 {
            if BasisPolicy::UniformRandom.choose(&mut rng) == Basis::Z {
                z += 1;
            }
        }
        assert!((400..600).contains(&z), "Z chosen {z} times");
    }
}
