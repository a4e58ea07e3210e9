//! The nine-step QSDC session state machine.
//!
//! One *episode* is the full lifecycle of a single EPR pair:
//!
//! 1. Alice prepares the pair and transmits one half (qubit `B`) to Bob;
//!    Eve's in-transit action, if any, happens here.
//! 2. Bob applies a Hadamard to `B` on a randomly selected subset of
//!    positions and announces the subset.
//! 3. Alice mirrors the Hadamard on her half (`A`) at those positions, then
//!    prepares an encode particle `a` in `|+>` (bit 0) or `|->` (bit 1) —
//!    a random bit on checking positions, a message bit on the rest.
//! 4. Alice applies CNOT (control `a`, target `A`) and a Hadamard on `a`
//!    (steps 4 through 6 of the scheme).
//! 5. Alice measures `a` and `A` in Z; Bob measures `B` in X (step 7).
//! 6. Alice reveals the checking positions, Bob announces his X outcomes
//!    there, and Alice aborts if the reconstruction error rate exceeds the
//!    threshold (step 8).
//! 7. If the check passed, Alice announces her `a` outcomes for the message
//!    positions and Bob reconstructs each bit from the outcome correlation
//!    (step 9).
//!
//! Episodes never entangle with one another, so each runs as an isolated
//! 3- or 4-qubit register, and every episode draws randomness from its own
//! stream derived from `(master_seed, episode index)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversary::{self, AttackAction, AttackModel, EveRecord};
use crate::error::Error;
use crate::statevec::{Basis, QuantumState};

/// Qubit layout of a fully assembled episode register.
pub const QUBIT_ENCODE: usize = 0; // particle a
pub const QUBIT_ALICE: usize = 1; // Alice's EPR half, A
pub const QUBIT_BOB: usize = 2; // Bob's EPR half, B
pub const QUBIT_ANCILLA: usize = 3; // Eve's ancilla, when present

/// A message or announcement as a sequence of bits (each 0 or 1).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bits(Vec<u8>);

impl Bits {
    pub fn new(bits: Vec<u8>) -> Result<Self, Error> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParams("bit values must be 0 or 1".into()));
        }
        Ok(Bits(bits))
    }

    pub fn empty() -> Self {
        Bits(Vec::new())
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Bits((0..len).map(|_| u8::from(rng.random_bool(0.5))).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }
}

impl std::str::FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::InvalidParams(format!(
                "message must be a string of 0s and 1s, got {s:?}"
            )));
        }
        Ok(Bits(s.bytes().map(|b| b - b'0').collect()))
    }
}

impl std::fmt::Display for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Session configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    /// Number of EPR pairs, N.
    pub n_pairs: usize,
    /// Fraction of positions receiving the Hadamard layer, strictly in (0,1).
    pub hadamard_fraction: f64,
    /// Fraction of positions sacrificed for the eavesdropping check,
    /// strictly in (0,1).
    pub check_fraction: f64,
    /// Abort when the observed check error rate exceeds this value.
    pub abort_threshold: f64,
    /// Seed for all session randomness.
    pub master_seed: u64,
    /// The secret message; must fit in the non-checking positions.
    pub message: Bits,
}

impl ProtocolParams {
    /// Defaults: half the positions Hadamard-flagged, half sacrificed for
    /// checking, zero-tolerance abort (the channel is ideal, so any check
    /// error signals eavesdropping).
    pub fn new(n_pairs: usize, message: Bits, master_seed: u64) -> Self {
        ProtocolParams {
            n_pairs,
            hadamard_fraction: 0.5,
            check_fraction: 0.5,
            abort_threshold: 0.0,
            master_seed,
            message,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.n_pairs == 0 {
            return Err(Error::InvalidParams("n_pairs must be positive".into()));
        }
        for (name, v) in [
            ("hadamard_fraction", self.hadamard_fraction),
            ("check_fraction", self.check_fraction),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must lie strictly inside (0, 1), got {v}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.abort_threshold) {
            return Err(Error::InvalidParams(format!(
                "abort_threshold must lie in [0, 1], got {}",
                self.abort_threshold
            )));
        }
        if self.message.len() > self.message_capacity() {
            return Err(Error::InvalidParams(format!(
                "message of {} bits does not fit in {} message positions",
                self.message.len(),
                self.message_capacity()
            )));
        }
        Ok(())
    }

    /// Number of checking positions: ceil(N * check_fraction).
    pub fn check_count(&self) -> usize {
        (self.n_pairs as f64 * self.check_fraction).ceil() as usize
    }

    /// Number of Hadamard-flagged positions: round(N * hadamard_fraction).
    pub fn hadamard_count(&self) -> usize {
        (self.n_pairs as f64 * self.hadamard_fraction).round() as usize
    }

    /// Message positions available: floor(N * (1 - check_fraction)).
    pub fn message_capacity(&self) -> usize {
        self.n_pairs - self.check_count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeRole {
    /// Sacrificed to detect eavesdropping; carries a random bit.
    Check,
    /// Carries one message bit.
    Message,
}

/// Plan for one EPR pair's lifecycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Episode {
    /// Position in the pair sequence, 1-based.
    pub index: usize,
    pub hadamard_applied: bool,
    pub role: EpisodeRole,
    /// The bit Alice encodes: random for Check, a message bit for Message.
    pub alice_bit: u8,
}

/// Measured outcomes of one executed episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub episode: Episode,
    /// Alice's Z outcome on the encode particle `a`; this is the bit she
    /// announces in step 9.
    pub alice_encode_bit: u8,
    /// Alice's Z outcome on her EPR half `A`. Measured per the protocol but
    /// never announced; it is uniform and independent of everything else.
    pub alice_epr_bit: u8,
    /// Bob's X outcome on `B` (0 for `|+>`, 1 for `|->`).
    pub bob_x_bit: u8,
    /// Present exactly when Eve acted on this episode.
    pub eve: Option<EveRecord>,
}

/// One classical announcement. Positions are 1-based episode indices.
#[derive(Debug, Clone, PartialEq)]
pub enum TranscriptEntry {
    /// Step 2: Bob names the positions that received his Hadamard.
    BobHadamardPositions(Vec<usize>),
    /// Step 8: Alice names the checking positions.
    AliceCheckPositions(Vec<usize>),
    /// Step 8: Bob announces his X outcomes at the checking positions.
    BobCheckResults(Vec<(usize, u8)>),
    /// Step 8: Alice's continue/abort decision with the observed error rate.
    AliceAbortDecision { abort: bool, error_rate: f64 },
    /// Step 9: Alice's `a` outcomes at the message positions; only on
    /// sessions that passed the check.
    AliceMessageResults(Vec<(usize, u8)>),
}

impl TranscriptEntry {
    /// Protocol step this announcement belongs to.
    pub fn step(&self) -> u8 {
        match self {
            TranscriptEntry::BobHadamardPositions(_) => 2,
            TranscriptEntry::AliceCheckPositions(_)
            | TranscriptEntry::BobCheckResults(_)
            | TranscriptEntry::AliceAbortDecision { .. } => 8,
            TranscriptEntry::AliceMessageResults(_) => 9,
        }
    }

    pub fn actor(&self) -> &'static str {
        match self {
            TranscriptEntry::BobHadamardPositions(_) | TranscriptEntry::BobCheckResults(_) => "bob",
            _ => "alice",
        }
    }
}

impl std::fmt::Display for TranscriptEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TranscriptEntry::BobHadamardPositions(p) => {
                write!(f, "step 2 bob hadamard_positions n={}", p.len())
            }
            TranscriptEntry::AliceCheckPositions(p) => {
                write!(f, "step 8 alice check_positions n={}", p.len())
            }
            TranscriptEntry::BobCheckResults(r) => {
                write!(f, "step 8 bob check_results n={}", r.len())
            }
            TranscriptEntry::AliceAbortDecision { abort, error_rate } => {
                write!(f, "step 8 alice abort={abort} error_rate={error_rate}")
            }
            TranscriptEntry::AliceMessageResults(r) => {
                write!(f, "step 9 alice message_results n={}", r.len())
            }
        }
    }
}

/// Ordered record of every classical announcement in a session.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    /// Check the mandatory announcement order: Hadamard positions, check
    /// positions, check results, abort decision, then message results only
    /// on sessions that continued.
    pub fn order_is_valid(&self) -> bool {
        use TranscriptEntry as E;
        match self.entries.as_slice() {
            [E::BobHadamardPositions(_), E::AliceCheckPositions(_), E::BobCheckResults(_), E::AliceAbortDecision { abort, .. }, rest @ ..] =>
            {
                matches!(
                    (abort, rest),
                    (true, []) | (false, [E::AliceMessageResults(_)])
                )
            }
            _ => false,
        }
    }
}

/// Everything a finished session produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    pub aborted: bool,
    /// Fraction of checking episodes whose reconstruction disagreed with
    /// Alice's random bit.
    pub check_error_rate: f64,
    /// The message Bob reconstructed; absent on aborted sessions.
    pub recovered_message: Option<Bits>,
    pub transcript: Transcript,
    pub records: Vec<EpisodeRecord>,
}

/// Stream used for session-level planning randomness.
pub fn planning_rng(master_seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(0);
    rng
}

/// Independent stream for one episode, derived from the master seed and the
/// 1-based episode index. Episodes can therefore run in any order, or in
/// parallel, without changing the results.
pub fn episode_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng
}

/// Draw the session plan: which positions get the Hadamard layer, which are
/// sacrificed for checking, and the bit each position encodes. Both subsets
/// are drawn uniformly without replacement and independently of each other.
pub fn plan_episodes<R: Rng + ?Sized>(
    params: &ProtocolParams,
    rng: &mut R,
) -> Result<Vec<Episode>, Error> {
    params.validate()?;
    let n = params.n_pairs;

    let mut is_check = vec![false; n];
    for i in rand::seq::index::sample(rng, n, params.check_count()) {
        is_check[i] = true;
    }
    let mut has_hadamard = vec![false; n];
    for i in rand::seq::index::sample(rng, n, params.hadamard_count()) {
        has_hadamard[i] = true;
    }

    let message = params.message.as_slice();
    let mut next_message_bit = 0usize;
    let episodes = (0..n)
        .map(|i| {
            let role = if is_check[i] {
                EpisodeRole::Check
            } else {
                EpisodeRole::Message
            };
            let alice_bit = match role {
                EpisodeRole::Check => u8::from(rng.random_bool(0.5)),
                EpisodeRole::Message => {
                    let bit = message.get(next_message_bit).copied();
                    next_message_bit += 1;
                    // Message positions beyond the message length carry
                    // random filler bits.
                    bit.unwrap_or_else(|| u8::from(rng.random_bool(0.5)))
                }
            };
            Episode {
                index: i + 1,
                hadamard_applied: has_hadamard[i],
                role,
                alice_bit,
            }
        })
        .collect();
    Ok(episodes)
}

/// Assemble the pre-measurement register for one episode, starting from the
/// post-transmission channel state over (A, B[, ancilla]): the Hadamard
/// layer (Bob's, then Alice's), the encode-particle preparation, the CNOT
/// with `a` as control and `A` as target, and the final Hadamard on `a`.
pub(crate) fn encode_pipeline_state(
    channel_state: QuantumState,
    hadamard_applied: bool,
    alice_bit: u8,
) -> Result<QuantumState, Error> {
    let mut state = channel_state;
    if hadamard_applied {
        state = state.hadamard(1)?; // Bob, on B
        state = state.hadamard(0)?; // Alice, on A
    }
    let mut full = QuantumState::x_eigenstate(alice_bit).tensor(&state)?;
    full = full.cnot(QUBIT_ENCODE, QUBIT_ALICE)?;
    full.hadamard(QUBIT_ENCODE)
}

/// Execute one episode: EPR creation, Eve's in-transit action, the encoding
/// pipeline, and all measurements.
pub fn run_episode<R: Rng + ?Sized>(
    episode: &Episode,
    action: AttackAction,
    rng: &mut R,
) -> EpisodeRecord {
    let pair = QuantumState::epr_pair(); // qubits (A, B)
    let (channel, mut eve) = match action {
        AttackAction::None => (pair, None),
        AttackAction::InterceptResend { basis } => {
            let (state, record) =
                adversary::intercept_resend(&pair, 1, basis, rng).expect("valid pair state");
            (state, Some(record))
        }
        AttackAction::CollectiveCnot { pre_hadamard } => {
            let (state, record) =
                adversary::collective_cnot(&pair, 1, pre_hadamard).expect("qubit budget holds");
            (state, Some(record))
        }
    };

    let state = encode_pipeline_state(channel, episode.hadamard_applied, episode.alice_bit)
        .expect("episode register stays within budget");

    let (m_encode, state) = state
        .measure(QUBIT_ENCODE, Basis::Z, rng)
        .expect("normalized state");
    let (m_alice, state) = state
        .measure(QUBIT_ALICE, Basis::Z, rng)
        .expect("normalized state");
    let (m_bob, state) = state
        .measure(QUBIT_BOB, Basis::X, rng)
        .expect("normalized state");

    if matches!(action, AttackAction::CollectiveCnot { .. }) {
        let (_, bit) = adversary::measure_ancilla_x(&state, QUBIT_ANCILLA, rng)
            .expect("ancilla present on collective episodes");
        if let Some(record) = eve.as_mut() {
            record.ancilla_x_bit = Some(bit);
        }
    }

    EpisodeRecord {
        episode: *episode,
        alice_encode_bit: m_encode.bit,
        alice_epr_bit: m_alice.bit,
        bob_x_bit: m_bob.bit,
        eve,
    }
}

/// Reconstruct one bit from Alice's announced `a` outcome and Bob's X
/// outcome. The four rows of the recovery table collapse to an XOR:
/// (0, |+>) -> 0, (0, |->) -> 1, (1, |+>) -> 1, (1, |->) -> 0.
pub fn recover_bit(alice_encode_bit: u8, bob_x_bit: u8) -> u8 {
    alice_encode_bit ^ bob_x_bit
}

/// Outcome of the step-8 eavesdropping check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckPhase {
    pub error_rate: f64,
    pub abort: bool,
    /// The three step-8 announcements, in order.
    pub entries: [TranscriptEntry; 3],
}

/// Compare reconstructions against Alice's random bits on every checking
/// episode and decide whether to abort.
pub fn check_phase(records: &[EpisodeRecord], params: &ProtocolParams) -> CheckPhase {
    let mut positions = Vec::new();
    let mut results = Vec::new();
    let mut errors = 0usize;
    for r in records {
        if r.episode.role == EpisodeRole::Check {
            positions.push(r.episode.index);
            results.push((r.episode.index, r.bob_x_bit));
            if recover_bit(r.alice_encode_bit, r.bob_x_bit) != r.episode.alice_bit {
                errors += 1;
            }
        }
    }
    let error_rate = if positions.is_empty() {
        0.0
    } else {
        errors as f64 / positions.len() as f64
    };
    let abort = error_rate > params.abort_threshold;
    CheckPhase {
        error_rate,
        abort,
        entries: [
            TranscriptEntry::AliceCheckPositions(positions),
            TranscriptEntry::BobCheckResults(results),
            TranscriptEntry::AliceAbortDecision { abort, error_rate },
        ],
    }
}

/// Run a full session under the given attack model. `attack_probability` is
/// the per-episode chance that Eve acts (1.0 reproduces the all-or-nothing
/// attacker).
pub fn run_session(
    params: &ProtocolParams,
    attack: &AttackModel,
    attack_probability: f64,
) -> Result<SessionResult, Error> {
    params.validate()?;
    if !(0.0..=1.0).contains(&attack_probability) {
        return Err(Error::InvalidParams(format!(
            "attack_probability must lie in [0, 1], got {attack_probability}"
        )));
    }

    let episodes = plan_episodes(params, &mut planning_rng(params.master_seed))?;
    let records: Vec<EpisodeRecord> = episodes
        .iter()
        .map(|ep| {
            let mut rng = episode_rng(params.master_seed, ep.index);
            let action = attack.resolve(attack_probability, &mut rng);
            run_episode(ep, action, &mut rng)
        })
        .collect();

    let mut transcript = Transcript::default();
    transcript
        .entries
        .push(TranscriptEntry::BobHadamardPositions(
            episodes
                .iter()
                .filter(|e| e.hadamard_applied)
                .map(|e| e.index)
                .collect(),
        ));

    let check = check_phase(&records, params);
    transcript.entries.extend(check.entries.iter().cloned());

    let recovered_message = if check.abort {
        None
    } else {
        let message_records: Vec<&EpisodeRecord> = records
            .iter()
            .filter(|r| r.episode.role == EpisodeRole::Message)
            .collect();
        transcript
            .entries
            .push(TranscriptEntry::AliceMessageResults(
                message_records
                    .iter()
                    .map(|r| (r.episode.index, r.alice_encode_bit))
                    .collect(),
            ));
        let bits = message_records
            .iter()
            .take(params.message.len())
            .map(|r| recover_bit(r.alice_encode_bit, r.bob_x_bit))
            .collect();
        Some(Bits(bits))
    };

    debug_assert!(transcript.order_is_valid());
    Ok(SessionResult {
        aborted: check.abort,
        check_error_rate: check.error_rate,
        recovered_message,
        transcript,
        records,
    })
}
