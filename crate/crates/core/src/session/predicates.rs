//! The security properties as reusable test predicates.

use std::collections::HashMap;

use super::{SessionError, SessionResult};

/// Static protocol metadata. The output domains are part of the published
/// definition so both parties know the full description and possible outputs
/// of f before any secret-dependent message flows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolSpec {
    pub id: &'static str,
    pub name: &'static str,
    /// Stage labels mirrored from the general schemes.
    pub stages: &'static [&'static str],
    pub output_domain_a: &'static str,
    pub output_domain_b: &'static str,
    /// Whether the definition publishes the domains up front. True for every
    /// shipped protocol; a protocol that reveals its output space only
    /// mid-run would fail the fairness predicate.
    pub domains_published_first: bool,
}

/// Correctness: both private outputs equal the functional definition
/// evaluated on the true inputs and randomness.
pub fn check_correctness(result: &SessionResult, expected_a: &[u8], expected_b: &[u8]) -> bool {
    result.outcome_a.output == expected_a && result.outcome_b.output == expected_b
}

/// Fairness: the protocol definition publishes its output domains to both
/// parties before any secret-dependent message.
pub fn check_fairness(spec: &ProtocolSpec) -> bool {
    spec.domains_published_first
        && !spec.output_domain_a.is_empty()
        && !spec.output_domain_b.is_empty()
}

/// Empirical distribution over byte-serialized views across fresh seeds.
/// `sample` maps a trial index to a serialized view (or transcript). Rejects
/// fewer than 1000 trials: the chi-square consumers need mass per bin.
pub fn transcript_distribution(
    trials: u64,
    sample: impl Fn(u64) -> Vec<u8> + Sync + Send,
) -> Result<HashMap<Vec<u8>, u64>, SessionError> {
    if trials < 1000 {
        return Err(SessionError::TooFewTrials(trials));
    }
    let samples = crate::stats::run_trials(trials, |i| sample(i));
    let mut table = HashMap::new();
    for s in samples {
        *table.entry(s).or_insert(0u64) += 1;
    }
    Ok(table)
}
