//! Contract signing by successive square-root oblivious transfers.
//!
//! Each party's signature is the factorization of its own modulus, bound to
//! the contract by carrying SHA-256(contract) in every message. Cycles of
//! two interleaved transfers run until each side has pulled the other's
//! factors (each direction succeeds per cycle with probability 1/2) or the
//! round budget runs out. The asymmetric window between one side succeeding
//! and the other catching up is inherent to the construction and is
//! reported faithfully rather than papered over.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::numtheory::{self, big, factor_from_roots, BlumModulus, NumTheoryError};
use crate::session::{
    run_session, Action, Message, PartyMachine, ProtocolError, ProtocolSpec, Role, SessionError,
    SessionResult, SessionRng, Transport,
};
use crate::wire::{expect_tag, require_message, Reader, Writer};

pub const CONTRACT_SIGN_SPEC: ProtocolSpec = ProtocolSpec {
    id: "contract-sign",
    name: "contract signing by successive oblivious transfers",
    stages: &["Offer", "Pull", "Deliver", "Counter-offer", "Counter-pull", "Counter-deliver"],
    output_domain_a: "{signed with B's factors, aborted}",
    output_domain_b: "{signed with A's factors, aborted}",
    domains_published_first: true,
};

const TAG_OFFER_A: u8 = 0xa0;
const TAG_CHAL_A: u8 = 0xa1;
const TAG_ROOT_A: u8 = 0xa2;
const TAG_OFFER_B: u8 = 0xa3;
const TAG_CHAL_B: u8 = 0xa4;
const TAG_ROOT_B: u8 = 0xa5;
const TAG_DONE: u8 = 0xa6;
const TAG_ABORT: u8 = 0xa7;

const UNIT_DRAW_BUDGET: usize = 64;

fn contract_hash(contract: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(contract);
    h.finalize().into()
}

fn check_hash(r: &mut Reader, expected: &[u8; 32]) -> Result<(), ProtocolError> {
    let got = r.raw(32)?;
    if got != expected {
        return Err(ProtocolError::CheckFailed("contract hash mismatch".into()));
    }
    Ok(())
}

/// Where a signing session ended up for one party.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractOutcome {
    pub signed: bool,
    pub rounds_used: u32,
    /// The counterpart's factors, if this party obtained them. An aborted
    /// session can leave this asymmetrically populated.
    pub peer_factors: Option<(BigUint, BigUint)>,
}

impl ContractOutcome {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new()
            .byte(self.signed as u8)
            .byte(self.rounds_used as u8);
        w = match &self.peer_factors {
            None => w.byte(0),
            Some((p, q)) => w.byte(1).int(p).int(q),
        };
        w.finish()
    }

    pub fn decode(buf: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader::new(buf);
        let signed = r.byte()? == 1;
        let rounds_used = r.byte()? as u32;
        let peer_factors = match r.byte()? {
            0 => None,
            1 => Some((r.int()?, r.int()?)),
            _ => return Err(ProtocolError::Malformed("unknown factor marker".into())),
        };
        r.done()?;
        Ok(ContractOutcome {
            signed,
            rounds_used,
            peer_factors,
        })
    }
}

/// Sample a unit challenge x ≥ 2 for the embedded square-root transfer.
fn sample_challenge(n: &BigUint, rng: &mut SessionRng) -> Result<BigUint, ProtocolError> {
    for _ in 0..UNIT_DRAW_BUDGET {
        let c = numtheory::random_below(rng, n);
        if c < big(2) || !c.gcd(n).is_one() {
            continue;
        }
        return Ok(c);
    }
    Err(ProtocolError::CheckFailed(
        "could not sample a unit challenge".into(),
    ))
}

/// Answer a pulled square with a uniformly chosen root of it.
fn answer_challenge(
    modulus: &BlumModulus,
    square: &BigUint,
    rng: &mut SessionRng,
) -> Result<BigUint, ProtocolError> {
    let roots = modulus.four_square_roots(square).map_err(|e| match e {
        NumTheoryError::NotAResidue | NumTheoryError::NotCoprime => {
            ProtocolError::CheckFailed("challenge is not a unit square".into())
        }
        other => ProtocolError::Malformed(other.to_string()),
    })?;
    Ok(roots[rng.gen_range(0..4)].clone())
}

/// Try to factor the peer modulus from our challenge and the returned root.
fn digest_root(
    n: &BigUint,
    x: &BigUint,
    root: &BigUint,
) -> Result<Option<(BigUint, BigUint)>, ProtocolError> {
    if (root * root) % n != (x * x) % n {
        return Err(ProtocolError::CheckFailed(
            "returned value is not a root of the challenge".into(),
        ));
    }
    match factor_from_roots(x, root, n) {
        Ok(pq) => Ok(Some(pq)),
        Err(NumTheoryError::TrivialRoots) => Ok(None),
        Err(e) => Err(ProtocolError::CheckFailed(e.to_string())),
    }
}

enum AState {
    Top { cycle: u32 },
    AwaitChal { cycle: u32 },
    AwaitOfferB { cycle: u32 },
    AwaitRootB { cycle: u32, x: BigUint },
    Finished(ContractOutcome),
}

/// Party A: initiates each cycle, decides on completion or abort.
pub struct ContractSignerA {
    hash: [u8; 32],
    own: BlumModulus,
    peer_n: BigUint,
    max_rounds: u32,
    peer_factors: Option<(BigUint, BigUint)>,
    /// B's latest report of whether it holds our factors.
    peer_acked: bool,
    state: AState,
}

impl ContractSignerA {
    pub fn new(contract: &[u8], own: BlumModulus, peer_n: BigUint, max_rounds: u32) -> Self {
        ContractSignerA {
            hash: contract_hash(contract),
            own,
            peer_n,
            max_rounds,
            peer_factors: None,
            peer_acked: false,
            state: AState::Top { cycle: 0 },
        }
    }
}

impl PartyMachine for ContractSignerA {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, AState::Top { cycle: 0 }) {
            AState::Top { cycle } => {
                if self.peer_factors.is_some() && self.peer_acked {
                    let outcome = ContractOutcome {
                        signed: true,
                        rounds_used: cycle,
                        peer_factors: self.peer_factors.clone(),
                    };
                    self.state = AState::Finished(outcome);
                    let payload = Writer::new().raw(&self.hash).finish();
                    return Ok(Action::Send {
                        label: "Done",
                        message: Message::new(TAG_DONE, payload),
                    });
                }
                if cycle >= self.max_rounds {
                    let outcome = ContractOutcome {
                        signed: false,
                        rounds_used: cycle,
                        peer_factors: self.peer_factors.clone(),
                    };
                    self.state = AState::Finished(outcome);
                    let payload = Writer::new().raw(&self.hash).finish();
                    return Ok(Action::Send {
                        label: "Abort",
                        message: Message::new(TAG_ABORT, payload),
                    });
                }
                let got = self.peer_factors.is_some();
                let payload = Writer::new()
                    .raw(&self.hash)
                    .byte(got as u8)
                    .int(self.own.n())
                    .finish();
                self.state = AState::AwaitChal { cycle };
                Ok(Action::Send {
                    label: "Offer",
                    message: Message::new(TAG_OFFER_A, payload),
                })
            }
            AState::AwaitChal { cycle } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_CHAL_A)?;
                check_hash(&mut r, &self.hash)?;
                let square = r.int()?;
                r.done()?;
                let root = answer_challenge(&self.own, &square, rng)?;
                let payload = Writer::new().raw(&self.hash).int(&root).finish();
                self.state = AState::AwaitOfferB { cycle };
                Ok(Action::Send {
                    label: "Deliver",
                    message: Message::new(TAG_ROOT_A, payload),
                })
            }
            AState::AwaitOfferB { cycle } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_OFFER_B)?;
                check_hash(&mut r, &self.hash)?;
                self.peer_acked = r.byte()? == 1;
                let n = r.int()?;
                r.done()?;
                if n != self.peer_n {
                    return Err(ProtocolError::CheckFailed(
                        "counter-offer names a different modulus".into(),
                    ));
                }
                let x = sample_challenge(&self.peer_n, rng)?;
                let square = (&x * &x) % &self.peer_n;
                let payload = Writer::new().raw(&self.hash).int(&square).finish();
                self.state = AState::AwaitRootB { cycle, x };
                Ok(Action::Send {
                    label: "Counter-pull",
                    message: Message::new(TAG_CHAL_B, payload),
                })
            }
            AState::AwaitRootB { cycle, x } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_ROOT_B)?;
                check_hash(&mut r, &self.hash)?;
                let root = r.int()?;
                r.done()?;
                if let Some(pq) = digest_root(&self.peer_n, &x, &root)? {
                    if self.peer_factors.is_none() {
                        self.peer_factors = Some(pq);
                    }
                }
                self.state = AState::Top { cycle: cycle + 1 };
                self.advance(None, rng)
            }
            AState::Finished(outcome) => {
                self.state = AState::Finished(outcome);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            AState::Finished(outcome) => Some(outcome.encode()),
            _ => None,
        }
    }

    fn input_description(&self) -> Vec<u8> {
        Writer::new()
            .raw(&self.hash)
            .int(self.own.p())
            .int(self.own.q())
            .finish()
    }
}

enum BState {
    AwaitOfferA { cycle: u32 },
    AwaitRootA { cycle: u32, x: BigUint },
    AwaitChal { cycle: u32 },
    Finished(ContractOutcome),
}

/// Party B: responds within each cycle.
pub struct ContractSignerB {
    hash: [u8; 32],
    own: BlumModulus,
    peer_n: BigUint,
    peer_factors: Option<(BigUint, BigUint)>,
    state: BState,
}

impl ContractSignerB {
    pub fn new(contract: &[u8], own: BlumModulus, peer_n: BigUint) -> Self {
        ContractSignerB {
            hash: contract_hash(contract),
            own,
            peer_n,
            peer_factors: None,
            state: BState::AwaitOfferA { cycle: 0 },
        }
    }

    fn finish_with(&self, signed: bool, cycle: u32) -> ContractOutcome {
        ContractOutcome {
            signed,
            rounds_used: cycle,
            peer_factors: self.peer_factors.clone(),
        }
    }
}

impl PartyMachine for ContractSignerB {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, BState::AwaitOfferA { cycle: 0 }) {
            BState::AwaitOfferA { cycle } => {
                let msg = require_message(incoming)?;
                match msg.tag {
                    TAG_DONE => {
                        let mut r = Reader::new(&msg.payload);
                        check_hash(&mut r, &self.hash)?;
                        r.done()?;
                        // A claims both directions succeeded; only our own
                        // direction is checkable from here
                        if self.peer_factors.is_none() {
                            return Err(ProtocolError::CheckFailed(
                                "completion claimed before this side obtained the peer factors"
                                    .into(),
                            ));
                        }
                        self.state = BState::Finished(self.finish_with(true, cycle));
                        return Ok(Action::Finish);
                    }
                    TAG_ABORT => {
                        let mut r = Reader::new(&msg.payload);
                        check_hash(&mut r, &self.hash)?;
                        r.done()?;
                        self.state = BState::Finished(self.finish_with(false, cycle));
                        return Ok(Action::Finish);
                    }
                    _ => {}
                }
                let mut r = expect_tag(&msg, TAG_OFFER_A)?;
                check_hash(&mut r, &self.hash)?;
                if r.byte()? > 1 {
                    return Err(ProtocolError::Malformed("unknown progress flag".into()));
                }
                let n = r.int()?;
                r.done()?;
                if n != self.peer_n {
                    return Err(ProtocolError::CheckFailed(
                        "offer names a different modulus".into(),
                    ));
                }
                let x = sample_challenge(&self.peer_n, rng)?;
                let square = (&x * &x) % &self.peer_n;
                let payload = Writer::new().raw(&self.hash).int(&square).finish();
                self.state = BState::AwaitRootA { cycle, x };
                Ok(Action::Send {
                    label: "Pull",
                    message: Message::new(TAG_CHAL_A, payload),
                })
            }
            BState::AwaitRootA { cycle, x } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_ROOT_A)?;
                check_hash(&mut r, &self.hash)?;
                let root = r.int()?;
                r.done()?;
                if let Some(pq) = digest_root(&self.peer_n, &x, &root)? {
                    if self.peer_factors.is_none() {
                        self.peer_factors = Some(pq);
                    }
                }
                let got = self.peer_factors.is_some();
                let payload = Writer::new()
                    .raw(&self.hash)
                    .byte(got as u8)
                    .int(self.own.n())
                    .finish();
                self.state = BState::AwaitChal { cycle };
                Ok(Action::Send {
                    label: "Counter-offer",
                    message: Message::new(TAG_OFFER_B, payload),
                })
            }
            BState::AwaitChal { cycle } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_CHAL_B)?;
                check_hash(&mut r, &self.hash)?;
                let square = r.int()?;
                r.done()?;
                let root = answer_challenge(&self.own, &square, rng)?;
                let payload = Writer::new().raw(&self.hash).int(&root).finish();
                self.state = BState::AwaitOfferA { cycle: cycle + 1 };
                Ok(Action::Send {
                    label: "Counter-deliver",
                    message: Message::new(TAG_ROOT_B, payload),
                })
            }
            BState::Finished(outcome) => {
                self.state = BState::Finished(outcome);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            BState::Finished(outcome) => Some(outcome.encode()),
            _ => None,
        }
    }

    fn input_description(&self) -> Vec<u8> {
        Writer::new()
            .raw(&self.hash)
            .int(self.own.p())
            .int(self.own.q())
            .finish()
    }
}

/// One signing attempt; returns both decoded outcomes (A's, then B's).
pub fn run_contract_sign(
    contract: &[u8],
    a_mod: BlumModulus,
    b_mod: BlumModulus,
    max_rounds: u32,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, ContractOutcome, ContractOutcome), SessionError> {
    let params = Writer::new()
        .raw(&contract_hash(contract))
        .int(a_mod.n())
        .int(b_mod.n())
        .byte(max_rounds as u8)
        .finish();
    let mut a = ContractSignerA::new(contract, a_mod.clone(), b_mod.n().clone(), max_rounds);
    let mut b = ContractSignerB::new(contract, b_mod, a_mod.n().clone());
    let result = run_session(
        CONTRACT_SIGN_SPEC.id,
        params,
        &mut a,
        &mut b,
        Role::A,
        seed_a,
        seed_b,
        transport,
    )?;
    let out_a = ContractOutcome::decode(&result.outcome_a.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    let out_b = ContractOutcome::decode(&result.outcome_b.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    Ok((result, out_a, out_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::gen_modulus;
    use crate::session::InProcTransport;
    use rand::SeedableRng;

    fn moduli(seed: u64) -> (BlumModulus, BlumModulus) {
        let mut rng = SessionRng::seed_from_u64(seed);
        let a = gen_modulus(28, false, &mut rng);
        let b = gen_modulus(28, false, &mut rng);
        (a, b)
    }

    /// Independent oracle for the expected number of cycles: both directions
    /// succeed per cycle with probability 1/2 and the session runs until the
    /// slower one lands, so the mean is E[max(G₁,G₂)] = 8/3 for geometric
    /// G with p = 1/2.
    #[test]
    fn cycle_count_oracle() {
        use rand::Rng;
        let mut rng = SessionRng::seed_from_u64(99);
        let trials = 200_000u64;
        let mut total = 0u64;
        for _ in 0..trials {
            let mut cycles = 0u64;
            let (mut got_a, mut got_b) = (false, false);
            while !(got_a && got_b) {
                cycles += 1;
                got_a |= rng.gen_bool(0.5);
                got_b |= rng.gen_bool(0.5);
            }
            total += cycles;
        }
        let mean = total as f64 / trials as f64;
        assert!((mean - 8.0 / 3.0).abs() < 0.02, "oracle mean {mean}");
    }

    #[test]
    fn signed_outcome_has_true_factors() {
        let (ma, mb) = moduli(1);
        let mut signed_seen = 0;
        for i in 0..60u64 {
            let mut t = InProcTransport::new();
            let (_, out_a, out_b) =
                run_contract_sign(b"sale of one bridge", ma.clone(), mb.clone(), 30, 2 * i, 2 * i + 1, &mut t)
                    .unwrap();
            assert_eq!(out_a.signed, out_b.signed);
            assert_eq!(out_a.rounds_used, out_b.rounds_used);
            if out_a.signed {
                signed_seen += 1;
                let (p, q) = out_a.peer_factors.clone().unwrap();
                let mut got = [p, q];
                got.sort();
                let mut want = [mb.p().clone(), mb.q().clone()];
                want.sort();
                assert_eq!(got, want, "A holds B's true factors");
                let (p, q) = out_b.peer_factors.clone().unwrap();
                let mut got = [p, q];
                got.sort();
                let mut want = [ma.p().clone(), ma.q().clone()];
                want.sort();
                assert_eq!(got, want, "B holds A's true factors");
            }
        }
        assert!(signed_seen >= 55, "virtually every run signs at 30 rounds");
    }

    #[test]
    fn mean_cycles_matches_the_oracle() {
        let (ma, mb) = moduli(2);
        let trials = 10_000u64;
        let counts: Vec<u64> = crate::stats::run_trials(trials, |i| {
            let mut t = InProcTransport::new();
            let (_, out_a, _) =
                run_contract_sign(b"c", ma.clone(), mb.clone(), 60, 2 * i, 2 * i + 1, &mut t)
                    .unwrap();
            assert!(out_a.signed);
            out_a.rounds_used as u64
        });
        let mean = counts.iter().sum::<u64>() as f64 / trials as f64;
        // E[max of two geometrics at p=1/2] = 8/3 ≈ 2.67
        assert!((mean - 8.0 / 3.0).abs() < 0.1, "mean cycles {mean}");
    }

    #[test]
    fn zero_rounds_aborts_unsigned() {
        let (ma, mb) = moduli(3);
        let mut t = InProcTransport::new();
        let (result, out_a, out_b) =
            run_contract_sign(b"c", ma, mb, 0, 1, 2, &mut t).unwrap();
        assert!(!out_a.signed && !out_b.signed);
        assert_eq!(out_a.rounds_used, 0);
        assert_eq!(result.transcript.entries.len(), 1, "a lone abort notice");
    }

    #[test]
    fn differing_contracts_abort_immediately() {
        let (ma, mb) = moduli(4);
        let mut a = ContractSignerA::new(b"contract one", ma.clone(), mb.n().clone(), 5);
        let mut b = ContractSignerB::new(b"contract two", mb, ma.n().clone());
        let mut t = InProcTransport::new();
        let err = run_session(
            CONTRACT_SIGN_SPEC.id,
            Vec::new(),
            &mut a,
            &mut b,
            Role::A,
            1,
            2,
            &mut t,
        )
        .unwrap_err();
        match err {
            SessionError::Abort { role, reason, .. } => {
                assert_eq!(role, Role::B);
                assert!(reason.contains("hash mismatch"), "{reason}");
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }
}
