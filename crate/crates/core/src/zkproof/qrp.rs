//! The m-round quadratic-residue identification protocol.
//!
//! A holds a secret s with v ≡ s² (mod N) and convinces B she knows a square
//! root of v without revealing it. Each round: A commits a = x² for fresh x,
//! B challenges with a bit r, A answers y = x·s^r, B checks y ≠ 0 and
//! y² ≡ a·v^r. A prover without s survives a round with probability 1/2.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, RngCore};

use crate::numtheory::{mod_inverse, random_in_zn_star, NumTheoryError};
use crate::session::{
    run_session, Action, Message, PartyMachine, ProtocolError, ProtocolSpec, Role, SessionError,
    SessionResult, SessionRng, Transport,
};
use crate::wire::{expect_tag, require_message, Writer};

use super::{ZkVerdict, SIM_RETRY_BUDGET};

pub const QRP_ZKP_SPEC: ProtocolSpec = ProtocolSpec {
    id: "zkp-qrp",
    name: "quadratic-residue identification proof",
    stages: &["Commitment", "Challenge", "Response", "Verification"],
    output_domain_a: "{accept, reject}",
    output_domain_b: "{accept, reject}",
    domains_published_first: true,
};

const TAG_COMMIT: u8 = 0x60;
const TAG_CHALLENGE: u8 = 0x61;
const TAG_RESPONSE: u8 = 0x62;
const TAG_VERDICT: u8 = 0x63;

pub(super) const VERDICT_CONTINUE: u8 = 0;
pub(super) const VERDICT_REJECT: u8 = 1;
pub(super) const VERDICT_ACCEPT: u8 = 2;

/// The prover's identity: public (N, v), private square root s.
///
/// The modulus comes from a set-up step whose factor knowledge is discarded;
/// neither session party ever holds the factors.
#[derive(Debug, Clone)]
pub struct QrpIdentity {
    n: BigUint,
    s: BigUint,
    v: BigUint,
}

impl QrpIdentity {
    /// Requires 0 < s < N and gcd(s, N) = 1. The coprimality requirement is
    /// deliberate: a shared factor in s would leak through every response.
    pub fn new(n: BigUint, s: BigUint) -> Result<Self, NumTheoryError> {
        if s.is_zero() || s >= n || !s.gcd(&n).is_one() {
            return Err(NumTheoryError::NotCoprime);
        }
        let v = (&s * &s) % &n;
        Ok(QrpIdentity { n, s, v })
    }

    /// Trusted set-up: generate a fresh modulus, discard its factors, keep a
    /// random unit as the secret.
    pub fn setup<R: RngCore>(bit_length: u64, rng: &mut R) -> Self {
        let modulus = crate::numtheory::gen_modulus(bit_length, false, rng);
        let n = modulus.n().clone();
        let s = random_in_zn_star(rng, &n);
        let v = (&s * &s) % &n;
        QrpIdentity { n, s, v }
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn v(&self) -> &BigUint {
        &self.v
    }

    pub fn secret(&self) -> &BigUint {
        &self.s
    }
}

pub(super) fn decode_round(r: u8, expected: u32) -> Result<(), ProtocolError> {
    if r as u32 != expected {
        return Err(ProtocolError::Malformed(format!(
            "round index {r} out of order, expected {expected}"
        )));
    }
    Ok(())
}

pub(super) fn decode_verdict(
    code: u8,
    round: u32,
    m: u32,
) -> Result<Option<ZkVerdict>, ProtocolError> {
    match code {
        VERDICT_CONTINUE if round + 1 < m => Ok(None),
        VERDICT_REJECT => Ok(Some(ZkVerdict::reject(m, round))),
        VERDICT_ACCEPT if round + 1 == m => Ok(Some(ZkVerdict::accept(m))),
        _ => Err(ProtocolError::Malformed(format!(
            "verdict code {code} invalid at round {round} of {m}"
        ))),
    }
}

enum ProverState {
    SendCommit { round: u32 },
    AwaitChallenge { round: u32, x: BigUint },
    AwaitVerdict { round: u32 },
    Finished(ZkVerdict),
}

/// Party A with the secret root.
pub struct QrpProver {
    identity: QrpIdentity,
    m: u32,
    state: ProverState,
}

impl QrpProver {
    pub fn new(identity: QrpIdentity, m: u32) -> Self {
        assert!(m >= 1);
        QrpProver {
            identity,
            m,
            state: ProverState::SendCommit { round: 0 },
        }
    }

    fn commit(&mut self, round: u32, rng: &mut SessionRng) -> Action {
        let n = &self.identity.n;
        let x = random_in_zn_star(rng, n);
        let a = (&x * &x) % n;
        let payload = Writer::new().byte(round as u8).int(&a).finish();
        self.state = ProverState::AwaitChallenge { round, x };
        Action::Send {
            label: "Commitment",
            message: Message::new(TAG_COMMIT, payload),
        }
    }
}

impl PartyMachine for QrpProver {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, ProverState::SendCommit { round: 0 }) {
            ProverState::SendCommit { round } => Ok(self.commit(round, rng)),
            ProverState::AwaitChallenge { round, x } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_CHALLENGE)?;
                decode_round(r.byte()?, round)?;
                let challenge = r.byte()?;
                r.done()?;
                if challenge > 1 {
                    return Err(ProtocolError::Malformed("challenge is not a bit".into()));
                }
                let n = &self.identity.n;
                let y = if challenge == 1 {
                    (&x * &self.identity.s) % n
                } else {
                    x
                };
                let payload = Writer::new().byte(round as u8).int(&y).finish();
                self.state = ProverState::AwaitVerdict { round };
                Ok(Action::Send {
                    label: "Response",
                    message: Message::new(TAG_RESPONSE, payload),
                })
            }
            ProverState::AwaitVerdict { round } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_VERDICT)?;
                decode_round(r.byte()?, round)?;
                let code = r.byte()?;
                r.done()?;
                match decode_verdict(code, round, self.m)? {
                    Some(verdict) => {
                        self.state = ProverState::Finished(verdict);
                        Ok(Action::Finish)
                    }
                    None => Ok(self.commit(round + 1, rng)),
                }
            }
            ProverState::Finished(v) => {
                self.state = ProverState::Finished(v);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            ProverState::Finished(v) => Some(v.encode()),
            _ => None,
        }
    }

    fn input_description(&self) -> Vec<u8> {
        Writer::new().int(&self.identity.s).finish()
    }
}

enum VerifierState {
    AwaitCommit { round: u32 },
    AwaitResponse { round: u32, a: BigUint, challenge: u8 },
    Finished(ZkVerdict),
}

/// Party B checking the proof for public (N, v).
pub struct QrpVerifier {
    n: BigUint,
    v: BigUint,
    m: u32,
    state: VerifierState,
}

impl QrpVerifier {
    pub fn new(n: BigUint, v: BigUint, m: u32) -> Self {
        assert!(m >= 1);
        QrpVerifier {
            n,
            v,
            m,
            state: VerifierState::AwaitCommit { round: 0 },
        }
    }
}

impl PartyMachine for QrpVerifier {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, VerifierState::AwaitCommit { round: 0 }) {
            VerifierState::AwaitCommit { round } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_COMMIT)?;
                decode_round(r.byte()?, round)?;
                let a = r.int()?;
                r.done()?;
                if a.is_zero() || a >= self.n {
                    return Err(ProtocolError::Malformed(
                        "commitment outside the residue ring".into(),
                    ));
                }
                let challenge: u8 = rng.gen_range(0..2);
                let payload = Writer::new().byte(round as u8).byte(challenge).finish();
                self.state = VerifierState::AwaitResponse { round, a, challenge };
                Ok(Action::Send {
                    label: "Challenge",
                    message: Message::new(TAG_CHALLENGE, payload),
                })
            }
            VerifierState::AwaitResponse { round, a, challenge } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_RESPONSE)?;
                decode_round(r.byte()?, round)?;
                let y = r.int()?;
                r.done()?;
                if y >= self.n {
                    return Err(ProtocolError::Malformed("response out of range".into()));
                }
                let lhs = (&y * &y) % &self.n;
                let rhs = if challenge == 1 {
                    (&a * &self.v) % &self.n
                } else {
                    a
                };
                let round_ok = !y.is_zero() && lhs == rhs;
                let (code, verdict) = if !round_ok {
                    (VERDICT_REJECT, Some(ZkVerdict::reject(self.m, round)))
                } else if round + 1 == self.m {
                    (VERDICT_ACCEPT, Some(ZkVerdict::accept(self.m)))
                } else {
                    (VERDICT_CONTINUE, None)
                };
                let payload = Writer::new().byte(round as u8).byte(code).finish();
                self.state = match verdict {
                    Some(v) => VerifierState::Finished(v),
                    None => VerifierState::AwaitCommit { round: round + 1 },
                };
                Ok(Action::Send {
                    label: "Verification",
                    message: Message::new(TAG_VERDICT, payload),
                })
            }
            VerifierState::Finished(v) => {
                self.state = VerifierState::Finished(v);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            VerifierState::Finished(v) => Some(v.encode()),
            _ => None,
        }
    }
}

/// The cheating prover: holds no root of v. Per round it guesses the
/// challenge ĝ, commits a = x²·v^{−ĝ}, and answers y = x, which verifies
/// exactly when the guess was right.
pub struct QrpCheatProver {
    n: BigUint,
    v_inv: BigUint,
    m: u32,
    state: ProverState,
}

impl QrpCheatProver {
    pub fn new(n: BigUint, v: BigUint, m: u32) -> Result<Self, NumTheoryError> {
        assert!(m >= 1);
        let v_inv = mod_inverse(&v, &n)?;
        Ok(QrpCheatProver {
            n,
            v_inv,
            m,
            state: ProverState::SendCommit { round: 0 },
        })
    }

    fn commit(&mut self, round: u32, rng: &mut SessionRng) -> Action {
        let x = random_in_zn_star(rng, &self.n);
        let guess: u8 = rng.gen_range(0..2);
        let mut a = (&x * &x) % &self.n;
        if guess == 1 {
            a = (a * &self.v_inv) % &self.n;
        }
        let payload = Writer::new().byte(round as u8).int(&a).finish();
        self.state = ProverState::AwaitChallenge { round, x };
        Action::Send {
            label: "Commitment",
            message: Message::new(TAG_COMMIT, payload),
        }
    }
}

impl PartyMachine for QrpCheatProver {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, ProverState::SendCommit { round: 0 }) {
            ProverState::SendCommit { round } => Ok(self.commit(round, rng)),
            ProverState::AwaitChallenge { round, x } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_CHALLENGE)?;
                decode_round(r.byte()?, round)?;
                let _challenge = r.byte()?;
                r.done()?;
                // best effort: the pre-committed x works only for the guess
                let payload = Writer::new().byte(round as u8).int(&x).finish();
                self.state = ProverState::AwaitVerdict { round };
                Ok(Action::Send {
                    label: "Response",
                    message: Message::new(TAG_RESPONSE, payload),
                })
            }
            ProverState::AwaitVerdict { round } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_VERDICT)?;
                decode_round(r.byte()?, round)?;
                let code = r.byte()?;
                r.done()?;
                match decode_verdict(code, round, self.m)? {
                    Some(verdict) => {
                        self.state = ProverState::Finished(verdict);
                        Ok(Action::Finish)
                    }
                    None => Ok(self.commit(round + 1, rng)),
                }
            }
            ProverState::Finished(v) => {
                self.state = ProverState::Finished(v);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            ProverState::Finished(v) => Some(v.encode()),
            _ => None,
        }
    }
}

fn params_blob(n: &BigUint, v: &BigUint, m: u32) -> Vec<u8> {
    Writer::new().int(n).int(v).byte(m as u8).finish()
}

/// One honest proof session; returns the session plus the shared verdict.
pub fn run_qrp_zkp(
    identity: QrpIdentity,
    m: u32,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, ZkVerdict), SessionError> {
    let params = params_blob(&identity.n, &identity.v, m);
    let mut verifier = QrpVerifier::new(identity.n.clone(), identity.v.clone(), m);
    let mut prover = QrpProver::new(identity, m);
    let result = run_session(
        QRP_ZKP_SPEC.id,
        params,
        &mut prover,
        &mut verifier,
        Role::A,
        seed_a,
        seed_b,
        transport,
    )?;
    let verdict = ZkVerdict::decode(&result.outcome_b.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    Ok((result, verdict))
}

/// A cheating-prover session against an honest verifier.
pub fn run_qrp_zkp_cheat(
    n: &BigUint,
    v: &BigUint,
    m: u32,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, ZkVerdict), SessionError> {
    let mut prover = QrpCheatProver::new(n.clone(), v.clone(), m)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    let mut verifier = QrpVerifier::new(n.clone(), v.clone(), m);
    let result = run_session(
        QRP_ZKP_SPEC.id,
        params_blob(n, v, m),
        &mut prover,
        &mut verifier,
        Role::A,
        seed_a,
        seed_b,
        transport,
    )?;
    let verdict = ZkVerdict::decode(&result.outcome_b.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    Ok((result, verdict))
}

/// One simulated round: the accepting triple plus the number of attempts the
/// rewinding took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrpSimRound {
    pub a: BigUint,
    pub challenge: u8,
    pub y: BigUint,
    pub attempts: u32,
}

/// Produce an accepting m-round transcript from public data only. Per round:
/// guess r̂, pick y uniform unit, set a = y²·v^{−r̂}; keep the attempt only
/// if the verifier's fresh challenge equals the guess, rewinding otherwise.
pub fn qrp_zkp_simulate(
    n: &BigUint,
    v: &BigUint,
    m: u32,
    sim_seed: u64,
    verifier_seed: u64,
) -> Result<Vec<QrpSimRound>, ProtocolError> {
    use rand::SeedableRng;
    let v_inv = mod_inverse(v, n)
        .map_err(|_| ProtocolError::Malformed("public value v is not a unit".into()))?;
    let mut sim_rng = SessionRng::seed_from_u64(sim_seed);
    let mut ver_rng = SessionRng::seed_from_u64(verifier_seed);
    let mut rounds = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            if attempts > SIM_RETRY_BUDGET {
                return Err(ProtocolError::CheckFailed(
                    "simulator retry budget exhausted".into(),
                ));
            }
            let guess: u8 = sim_rng.gen_range(0..2);
            let y = random_in_zn_star(&mut sim_rng, n);
            let mut a = (&y * &y) % n;
            if guess == 1 {
                a = (a * &v_inv) % n;
            }
            let challenge: u8 = ver_rng.gen_range(0..2);
            if challenge == guess {
                rounds.push(QrpSimRound {
                    a,
                    challenge,
                    y,
                    attempts,
                });
                break;
            }
            // wrong guess: rewind the verifier and try again
        }
    }
    Ok(rounds)
}

/// Knowledge extraction: two accepting responses for the same commitment at
/// both challenge values yield a square root of v, namely y1·y0⁻¹.
pub fn extract_root(
    n: &BigUint,
    y0: &BigUint,
    y1: &BigUint,
) -> Result<BigUint, NumTheoryError> {
    let inv = mod_inverse(y0, n)?;
    Ok((y1 * inv) % n)
}
