//! Statistics over sessions and episodes.
//!
//! Two routes exist for every quantitative claim: an exact route that
//! enumerates episode outcome distributions by sequential projection, and a
//! sampled Monte Carlo route through [`crate::protocol::run_episode`]. The
//! sampled route is never its own reference; it is always compared against
//! the exact tables.

use std::collections::BTreeMap;

use rand::Rng;

use crate::adversary::{AttackAction, AttackModel};
use crate::error::Error;
use crate::protocol::{
    self, Bits, Episode, EpisodeRecord, EpisodeRole, ProtocolParams, SessionResult,
};
use crate::statevec::{bit_label, Basis, QuantumState};

use crate::protocol::{QUBIT_ALICE, QUBIT_ANCILLA, QUBIT_BOB, QUBIT_ENCODE};

/// 97.5% normal quantile, for two-sided 95% intervals.
const Z_95: f64 = 1.959963984540054;

/// A binomial rate with its 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub rate: f64,
    pub ci95: (f64, f64),
    pub trials: usize,
}

/// 95% Wilson score interval for `successes` out of `trials`. Well-behaved
/// at rates 0 and 1, unlike the normal approximation.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn rate_estimate(successes: usize, trials: usize) -> RateEstimate {
    RateEstimate {
        rate: if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        },
        ci95: wilson_interval(successes, trials),
        trials,
    }
}

/// Session-level rates derived from a completed record set.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionStats {
    /// Reconstruction errors over checking episodes.
    pub check_errors: RateEstimate,
    /// Reconstruction errors over message episodes; `None` when the session
    /// has no message episodes.
    pub message_errors: Option<RateEstimate>,
    /// Whether the check error rate exceeded the abort threshold.
    pub detected: bool,
    /// Check error rate restricted to Hadamard-flagged episodes.
    pub check_error_rate_hadamard: Option<f64>,
    /// Check error rate restricted to unflagged episodes.
    pub check_error_rate_no_hadamard: Option<f64>,
}

/// Estimate check and message error rates with Wilson intervals.
pub fn estimate_rates(
    records: &[EpisodeRecord],
    params: &ProtocolParams,
) -> Result<SessionStats, Error> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut check = (0usize, 0usize); // (errors, trials)
    let mut message = (0usize, 0usize);
    let mut check_by_flag = [(0usize, 0usize); 2];
    for r in records {
        let error = protocol::recover_bit(r.alice_encode_bit, r.bob_x_bit) != r.episode.alice_bit;
        match r.episode.role {
            EpisodeRole::Check => {
                check.1 += 1;
                check.0 += usize::from(error);
                let flag = &mut check_by_flag[usize::from(r.episode.hadamard_applied)];
                flag.1 += 1;
                flag.0 += usize::from(error);
            }
            EpisodeRole::Message => {
                message.1 += 1;
                message.0 += usize::from(error);
            }
        }
    }
    let check_errors = rate_estimate(check.0, check.1);
    Ok(SessionStats {
        detected: check_errors.rate > params.abort_threshold,
        check_errors,
        message_errors: (message.1 > 0).then(|| rate_estimate(message.0, message.1)),
        check_error_rate_hadamard: (check_by_flag[1].1 > 0)
            .then(|| check_by_flag[1].0 as f64 / check_by_flag[1].1 as f64),
        check_error_rate_no_hadamard: (check_by_flag[0].1 > 0)
            .then(|| check_by_flag[0].0 as f64 / check_by_flag[0].1 as f64),
    })
}

/// Plug-in mutual information, in bits, from an empirical sample of symbol
/// pairs. No bias correction is applied; with `k` by `m` support the bias is
/// bounded by roughly `(k*m - 1) / (2 n ln 2)`.
pub fn empirical_mutual_information(pairs: &[(u8, u8)]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let mut joint: BTreeMap<(u8, u8), f64> = BTreeMap::new();
    let weight = 1.0 / pairs.len() as f64;
    for &p in pairs {
        *joint.entry(p).or_insert(0.0) += weight;
    }
    mutual_information_from_joint(&joint)
}

/// Mutual information, in bits, of a joint distribution over symbol pairs.
pub fn mutual_information_from_joint(joint: &BTreeMap<(u8, u8), f64>) -> f64 {
    let mut px: BTreeMap<u8, f64> = BTreeMap::new();
    let mut py: BTreeMap<u8, f64> = BTreeMap::new();
    for (&(x, y), &p) in joint {
        *px.entry(x).or_insert(0.0) += p;
        *py.entry(y).or_insert(0.0) += p;
    }
    let mut mi = 0.0;
    for (&(x, y), &p) in joint {
        if p > 0.0 {
            mi += p * (p / (px[&x] * py[&y])).log2();
        }
    }
    // Floating wobble can push an independent distribution a hair negative.
    mi.max(0.0)
}

/// Shannon entropy, in bits, of the marginal over the chosen side.
pub fn marginal_entropy(pairs: &[(u8, u8)], side: usize) -> f64 {
    let mut counts: BTreeMap<u8, usize> = BTreeMap::new();
    for &(x, y) in pairs {
        *counts.entry(if side == 0 { x } else { y }).or_insert(0) += 1;
    }
    let n = pairs.len() as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Total-variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Exact joint outcome distribution for one episode configuration, computed
/// analytically by sequential projection — never sampled.
///
/// Outcome variables, in index order (first variable is the most significant
/// bit of the outcome index):
///
/// * no attack: `a`, `A`, `B`
/// * intercept-resend: `eve`, `a`, `A`, `B` (Eve's intercept outcome first,
///   since it happens mid-episode and shapes the rest)
/// * collective: `a`, `A`, `B`, `E` (Eve's ancilla X outcome)
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub alice_bit: u8,
    pub hadamard: bool,
    pub action: AttackAction,
    pub variables: Vec<&'static str>,
    probs: Vec<f64>,
}

impl ExactDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, outcome: usize) -> f64 {
        self.probs[outcome]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn label(&self, outcome: usize) -> String {
        bit_label(outcome, self.variables.len())
    }

    /// Map from outcome bit-string to probability, in lexicographic order.
    pub fn table(&self) -> BTreeMap<String, f64> {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (self.label(i), p))
            .collect()
    }

    fn var_index(&self, name: &str) -> usize {
        self.variables
            .iter()
            .position(|&v| v == name)
            .unwrap_or_else(|| panic!("variable {name} not in {:?}", self.variables))
    }

    fn bit_of(&self, outcome: usize, var: usize) -> u8 {
        ((outcome >> (self.variables.len() - 1 - var)) & 1) as u8
    }

    /// Marginal distribution of one outcome variable.
    pub fn marginal(&self, name: &str) -> [f64; 2] {
        let var = self.var_index(name);
        let mut m = [0.0; 2];
        for (outcome, &p) in self.probs.iter().enumerate() {
            m[self.bit_of(outcome, var) as usize] += p;
        }
        m
    }

    /// Exact probability that the reconstruction (Alice's announced `a` bit
    /// XOR Bob's X bit) disagrees with the encoded bit.
    pub fn check_error_rate(&self) -> f64 {
        let a = self.var_index("a");
        let b = self.var_index("B");
        self.probs
            .iter()
            .enumerate()
            .filter(|(outcome, _)| {
                self.bit_of(*outcome, a) ^ self.bit_of(*outcome, b) != self.alice_bit
            })
            .map(|(_, &p)| p)
            .sum()
    }
}

/// Enumerate the exact outcome distribution of one episode configuration.
pub fn exact_episode_distribution(
    alice_bit: u8,
    hadamard: bool,
    action: AttackAction,
) -> Result<ExactDistribution, Error> {
    let pair = QuantumState::epr_pair();
    let plan3 = [
        (QUBIT_ENCODE, Basis::Z),
        (QUBIT_ALICE, Basis::Z),
        (QUBIT_BOB, Basis::X),
    ];
    let (variables, probs): (Vec<&'static str>, Vec<f64>) = match action {
        AttackAction::None => {
            let state = protocol::encode_pipeline_state(pair, hadamard, alice_bit)?;
            let dist = state.outcome_distribution(&plan3)?;
            (vec!["a", "A", "B"], dist.probabilities().to_vec())
        }
        AttackAction::CollectiveCnot { pre_hadamard } => {
            let (entangled, _) = crate::adversary::collective_cnot(&pair, 1, pre_hadamard)?;
            let state = protocol::encode_pipeline_state(entangled, hadamard, alice_bit)?;
            let plan4 = [
                (QUBIT_ENCODE, Basis::Z),
                (QUBIT_ALICE, Basis::Z),
                (QUBIT_BOB, Basis::X),
                (QUBIT_ANCILLA, Basis::X),
            ];
            let dist = state.outcome_distribution(&plan4)?;
            (vec!["a", "A", "B", "E"], dist.probabilities().to_vec())
        }
        AttackAction::InterceptResend { basis } => {
            // Branch over Eve's intercept outcome, then enumerate the rest
            // of the pipeline within each branch.
            let mut probs = vec![0.0; 16];
            for eve_bit in 0..2u8 {
                let (p_eve, collapsed) = pair.project(1, basis, eve_bit)?;
                let Some(collapsed) = collapsed else { continue };
                let resent = match basis {
                    Basis::Z => collapsed.hadamard(1)?,
                    Basis::X => collapsed,
                };
                let state = protocol::encode_pipeline_state(resent, hadamard, alice_bit)?;
                let dist = state.outcome_distribution(&plan3)?;
                for (i, &p) in dist.probabilities().iter().enumerate() {
                    probs[((eve_bit as usize) << 3) | i] += p_eve * p;
                }
            }
            (vec!["eve", "a", "A", "B"], probs)
        }
    };
    Ok(ExactDistribution {
        alice_bit,
        hadamard,
        action,
        variables,
        probs,
    })
}

/// Outcome index of a sampled episode record, aligned with the indexing of
/// [`exact_episode_distribution`] for the same action.
pub fn record_outcome_index(record: &EpisodeRecord, action: AttackAction) -> usize {
    let a = record.alice_encode_bit as usize;
    let alice = record.alice_epr_bit as usize;
    let b = record.bob_x_bit as usize;
    match action {
        AttackAction::None => (a << 2) | (alice << 1) | b,
        AttackAction::InterceptResend { .. } => {
            let eve = record
                .eve
                .and_then(|e| e.intercept_bit)
                .expect("intercept record present") as usize;
            (eve << 3) | (a << 2) | (alice << 1) | b
        }
        AttackAction::CollectiveCnot { .. } => {
            let anc = record
                .eve
                .and_then(|e| e.ancilla_x_bit)
                .expect("ancilla record present") as usize;
            (a << 3) | (alice << 2) | (b << 1) | anc
        }
    }
}

/// Empirical outcome frequencies over `samples` runs of one episode
/// configuration, aligned with the exact table's indexing.
pub fn sample_episode_distribution<R: Rng + ?Sized>(
    alice_bit: u8,
    hadamard: bool,
    action: AttackAction,
    samples: usize,
    rng: &mut R,
) -> Vec<f64> {
    let episode = Episode {
        index: 1,
        hadamard_applied: hadamard,
        role: EpisodeRole::Check,
        alice_bit,
    };
    let size = if action.is_none() { 8 } else { 16 };
    let mut counts = vec![0usize; size];
    for _ in 0..samples {
        let record = protocol::run_episode(&episode, action, rng);
        counts[record_outcome_index(&record, action)] += 1;
    }
    counts
        .into_iter()
        .map(|c| c as f64 / samples as f64)
        .collect()
}

/// Minimum sample count accepted by [`oracle_vs_monte_carlo`].
pub const MIN_ORACLE_SAMPLES: usize = 1000;

/// Total-variation distance between `samples` Monte Carlo episodes and the
/// exact distribution for the same configuration.
pub fn oracle_vs_monte_carlo<R: Rng + ?Sized>(
    alice_bit: u8,
    hadamard: bool,
    action: AttackAction,
    samples: usize,
    rng: &mut R,
) -> Result<f64, Error> {
    if samples < MIN_ORACLE_SAMPLES {
        return Err(Error::TooFewSamples(samples, MIN_ORACLE_SAMPLES));
    }
    let exact = exact_episode_distribution(alice_bit, hadamard, action)?;
    let empirical = sample_episode_distribution(alice_bit, hadamard, action, samples, rng);
    Ok(total_variation(exact.probabilities(), &empirical))
}

/// Stable label for an episode configuration, used as a report map key.
pub fn cell_label(alice_bit: u8, hadamard: bool, action: AttackAction) -> String {
    format!(
        "attack={} alice_bit={} hadamard={}",
        action.kind(),
        alice_bit,
        hadamard
    )
}

/// Aggregated statistics of one session, ready for serialization by a
/// front-end.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub params: ProtocolParams,
    pub attack: AttackModel,
    pub attack_probability: f64,
    pub check_error_rate: f64,
    pub ci95: (f64, f64),
    pub detected: bool,
    pub recovered_message: Option<Bits>,
    /// Fraction of message episodes whose reconstruction disagrees with the
    /// encoded bit; absent on aborted sessions.
    pub message_bit_error_rate: Option<f64>,
    /// Plug-in mutual information between Eve's per-episode symbol and the
    /// encoded message bit, over attacked message episodes.
    pub eve_mi_bits: f64,
    /// Message positions over total positions.
    pub throughput: f64,
    pub check_error_rate_hadamard: Option<f64>,
    pub check_error_rate_no_hadamard: Option<f64>,
    /// Optional exact-vs-sampled agreement results, keyed by configuration.
    pub oracle_tv_distances: BTreeMap<String, f64>,
    pub episodes_per_second: f64,
}

/// Eve's per-episode symbol paired with the bit that episode encoded,
/// restricted to message episodes (the actual secrets).
pub fn eve_secret_pairs(records: &[EpisodeRecord]) -> Vec<(u8, u8)> {
    records
        .iter()
        .filter(|r| r.episode.role == EpisodeRole::Message)
        .filter_map(|r| {
            let eve = r.eve?;
            let symbol = eve.ancilla_x_bit.or(eve.intercept_bit)?;
            Some((symbol, r.episode.alice_bit))
        })
        .collect()
}

/// Assemble the report for a finished session.
pub fn build_report(
    params: &ProtocolParams,
    attack: &AttackModel,
    attack_probability: f64,
    result: &SessionResult,
    episodes_per_second: f64,
) -> Result<SimulationReport, Error> {
    let stats = estimate_rates(&result.records, params)?;
    Ok(SimulationReport {
        params: params.clone(),
        attack: *attack,
        attack_probability,
        check_error_rate: result.check_error_rate,
        ci95: stats.check_errors.ci95,
        detected: result.aborted,
        recovered_message: result.recovered_message.clone(),
        message_bit_error_rate: if result.aborted {
            None
        } else {
            stats.message_errors.map(|m| m.rate)
        },
        eve_mi_bits: empirical_mutual_information(&eve_secret_pairs(&result.records)),
        throughput: params.message_capacity() as f64 / params.n_pairs as f64,
        check_error_rate_hadamard: stats.check_error_rate_hadamard,
        check_error_rate_no_hadamard: stats.check_error_rate_no_hadamard,
        oracle_tv_distances: BTreeMap::new(),
        episodes_per_second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const EXACT_TOL: f64 = 1e-12;

    #[test]
    fn wilson_at_zero_successes() {
        let (lo, hi) = wilson_interval(0, 5000);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0007 && hi < 0.0008, "upper bound {hi}");
    }

    #[test]
    fn wilson_single_trial_is_wide() {
        let (lo, hi) = wilson_interval(0, 1);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.7, "upper bound {hi}");
    }

    #[test]
    fn wilson_handles_empty() {
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    #[test]
    fn mi_of_identity_channel_is_one_bit() {
        let pairs: Vec<(u8, u8)> = (0..10_000)
            .map(|i| ((i % 2) as u8, (i % 2) as u8))
            .collect();
        let mi = empirical_mutual_information(&pairs);
        assert!((mi - 1.0).abs() < 1e-12, "mi {mi}");
    }

    #[test]
    fn mi_of_independent_pairs_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let pairs: Vec<(u8, u8)> = (0..10_000)
            .map(|_| {
                (
                    u8::from(rng.random_bool(0.5)),
                    u8::from(rng.random_bool(0.5)),
                )
            })
            .collect();
        let mi = empirical_mutual_information(&pairs);
        assert!(mi < 0.01, "mi {mi}");
    }

    #[test]
    fn mi_is_bounded_by_marginal_entropies() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..50 {
            let correlation = (trial as f64) / 50.0;
            let pairs: Vec<(u8, u8)> = (0..500)
                .map(|_| {
                    let x = u8::from(rng.random_bool(0.5));
                    let y = if rng.random_bool(correlation) {
                        x
                    } else {
                        u8::from(rng.random_bool(0.5))
                    };
                    (x, y)
                })
                .collect();
            let mi = empirical_mutual_information(&pairs);
            let bound = marginal_entropy(&pairs, 0).min(marginal_entropy(&pairs, 1));
            assert!(mi >= 0.0);
            assert!(mi <= bound + 1e-9, "mi {mi} bound {bound}");
        }
    }

    #[test]
    fn mi_degenerate_inputs_are_zero() {
        assert_eq!(empirical_mutual_information(&[]), 0.0);
        assert_eq!(empirical_mutual_information(&[(1, 0), (1, 1)]), 0.0);
    }

    #[test]
    fn exact_no_attack_tables() {
        // Without an attack the (a, A) pair is uniform and Bob's X bit is
        // pinned to a XOR alice_bit, for either Hadamard flag.
        for hadamard in [false, true] {
            for alice_bit in 0..2u8 {
                let d =
                    exact_episode_distribution(alice_bit, hadamard, AttackAction::None).unwrap();
                assert_eq!(d.len(), 8);
                for outcome in 0..8usize {
                    let a = ((outcome >> 2) & 1) as u8;
                    let b = (outcome & 1) as u8;
                    let expected = if a ^ b == alice_bit { 0.25 } else { 0.0 };
                    assert!(
                        (d.probability(outcome) - expected).abs() < EXACT_TOL,
                        "bit {alice_bit} hadamard {hadamard} outcome {outcome}"
                    );
                }
                assert!(d.check_error_rate().abs() < EXACT_TOL);
            }
        }
    }

    #[test]
    fn exact_no_attack_bit_flip_mirrors_bob_outcome() {
        // The bit-0 and bit-1 tables are related by flipping Bob's X bit.
        let d0 = exact_episode_distribution(0, false, AttackAction::None).unwrap();
        let d1 = exact_episode_distribution(1, false, AttackAction::None).unwrap();
        for outcome in 0..8usize {
            let flipped = outcome ^ 1;
            assert!((d0.probability(outcome) - d1.probability(flipped)).abs() < EXACT_TOL);
        }
    }

    #[test]
    fn exact_collective_table_matches_hand_expansion() {
        // Plain collective attack on an unflagged position, bit 0: eight
        // equiprobable outcomes with Eve's ancilla X bit tied to Bob's X bit
        // inside each (a, A) branch.
        let d = exact_episode_distribution(
            0,
            false,
            AttackAction::CollectiveCnot {
                pre_hadamard: false,
            },
        )
        .unwrap();
        assert_eq!(d.len(), 16);
        let expected: &[usize] = &[
            0b0000, 0b0011, 0b1001, 0b1010, 0b0100, 0b0111, 0b1101, 0b1110,
        ];
        for outcome in 0..16usize {
            let p = d.probability(outcome);
            let want = if expected.contains(&outcome) {
                0.125
            } else {
                0.0
            };
            assert!(
                (p - want).abs() < EXACT_TOL,
                "outcome {}: {p}",
                d.label(outcome)
            );
        }
        assert!((d.check_error_rate() - 0.5).abs() < EXACT_TOL);
    }

    #[test]
    fn exact_collective_ancilla_marginal_is_uniform() {
        for alice_bit in 0..2u8 {
            for hadamard in [false, true] {
                for pre_hadamard in [false, true] {
                    let d = exact_episode_distribution(
                        alice_bit,
                        hadamard,
                        AttackAction::CollectiveCnot { pre_hadamard },
                    )
                    .unwrap();
                    let m = d.marginal("E");
                    assert!((m[0] - 0.5).abs() < EXACT_TOL, "marginal {m:?}");
                    assert!((m[1] - 0.5).abs() < EXACT_TOL);
                }
            }
        }
    }

    /// The exact per-episode check error for every attack cell. The paper's
    /// analyzed pairings (Z intercept on unflagged positions, X intercept on
    /// flagged ones, each collective variant on its matching position type)
    /// all sit at exactly 1/2; the mismatched pairings are exactly
    /// invisible.
    #[test]
    fn exact_check_error_rate_by_cell() {
        let cases: &[(AttackAction, f64, f64)] = &[
            // (action, rate on unflagged, rate on flagged)
            (AttackAction::None, 0.0, 0.0),
            (AttackAction::InterceptResend { basis: Basis::Z }, 0.5, 0.5),
            (AttackAction::InterceptResend { basis: Basis::X }, 0.0, 0.5),
            (
                AttackAction::CollectiveCnot {
                    pre_hadamard: false,
                },
                0.5,
                0.0,
            ),
            (
                AttackAction::CollectiveCnot { pre_hadamard: true },
                0.0,
                0.5,
            ),
        ];
        for &(action, plain, flagged) in cases {
            for alice_bit in 0..2u8 {
                let d = exact_episode_distribution(alice_bit, false, action).unwrap();
                assert!(
                    (d.check_error_rate() - plain).abs() < EXACT_TOL,
                    "{} bit {alice_bit} unflagged: {}",
                    action.kind(),
                    d.check_error_rate()
                );
                let d = exact_episode_distribution(alice_bit, true, action).unwrap();
                assert!(
                    (d.check_error_rate() - flagged).abs() < EXACT_TOL,
                    "{} bit {alice_bit} flagged: {}",
                    action.kind(),
                    d.check_error_rate()
                );
            }
        }
    }

    #[test]
    fn exact_intercept_x_on_flagged_position_is_fully_uniform() {
        // X intercept on a Hadamard-flagged position leaves Bob's qubit in a
        // Z eigenstate before his X measurement, so every outcome tuple
        // (eve, a, A, B) is equiprobable and the check error is exactly 1/2.
        for alice_bit in 0..2u8 {
            let d = exact_episode_distribution(
                alice_bit,
                true,
                AttackAction::InterceptResend { basis: Basis::X },
            )
            .unwrap();
            for outcome in 0..16usize {
                assert!(
                    (d.probability(outcome) - 1.0 / 16.0).abs() < EXACT_TOL,
                    "outcome {}",
                    d.label(outcome)
                );
            }
            assert!((d.check_error_rate() - 0.5).abs() < EXACT_TOL);
        }
    }

    #[test]
    fn exact_intercept_z_eve_bit_shapes_bob_outcome() {
        // Z intercept on an unflagged position: Bob's X outcome equals Eve's
        // intercept bit exactly (she re-sends the matching X eigenstate), and
        // (a, A) is uniform within each branch.
        let d =
            exact_episode_distribution(0, false, AttackAction::InterceptResend { basis: Basis::Z })
                .unwrap();
        for outcome in 0..16usize {
            let eve = (outcome >> 3) & 1;
            let b = outcome & 1;
            let expected = if eve == b { 0.125 } else { 0.0 };
            assert!(
                (d.probability(outcome) - expected).abs() < EXACT_TOL,
                "outcome {}",
                d.label(outcome)
            );
        }
    }

    #[test]
    fn sampled_distribution_tracks_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for action in [
            AttackAction::None,
            AttackAction::InterceptResend { basis: Basis::Z },
            AttackAction::CollectiveCnot {
                pre_hadamard: false,
            },
        ] {
            let tv = oracle_vs_monte_carlo(0, false, action, 20_000, &mut rng).unwrap();
            assert!(tv < 0.02, "{}: tv {tv}", action.kind());
        }
    }

    #[test]
    fn oracle_exact_vs_itself_is_zero() {
        let d = exact_episode_distribution(0, false, AttackAction::None).unwrap();
        assert_eq!(total_variation(d.probabilities(), d.probabilities()), 0.0);
    }

    #[test]
    fn oracle_enforces_sample_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            oracle_vs_monte_carlo(0, false, AttackAction::None, 999, &mut rng),
            Err(Error::TooFewSamples(999, _))
        ));
    }

    #[test]
    fn estimate_rates_rejects_empty() {
        let p = ProtocolParams::new(4, Bits::empty(), 0);
        assert!(matches!(estimate_rates(&[], &p), Err(Error::EmptyRecords)));
    }

    #[test]
    fn report_for_clean_session() {
        let p = ProtocolParams::new(64, "1010".parse().unwrap(), 5);
        let result = protocol::run_session(&p, &AttackModel::None, 1.0).unwrap();
        let report = build_report(&p, &AttackModel::None, 1.0, &result, 0.0).unwrap();
        assert_eq!(report.check_error_rate, 0.0);
        assert!(!report.detected);
        assert_eq!(report.message_bit_error_rate, Some(0.0));
        assert_eq!(report.eve_mi_bits, 0.0);
        assert!((report.throughput - 0.5).abs() < EXACT_TOL);
        assert_eq!(report.recovered_message, Some("1010".parse().unwrap()));
    }
}
