//! Square-root oblivious transfer over a composite modulus.
//!
//! A publishes N = pq; B challenges with x^2 for a secret unit x; A answers
//! with a uniformly chosen square root r of the challenge. B factors N via
//! gcd(x + r, N) exactly when r is not trivially related to x, which happens
//! with probability 1/2, and A cannot tell which case occurred.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use rand::Rng;

use crate::numtheory::{self, big, factor_from_roots, BlumModulus, NumTheoryError};
use crate::session::{
    run_session, Action, Message, PartyMachine, ProtocolError, ProtocolSpec, Role, SessionError,
    SessionResult, SessionRng, Transport,
};
use crate::wire::{expect_tag, require_message, Writer};

use super::OtSecretFactorization;

pub const RABIN_SPEC: ProtocolSpec = ProtocolSpec {
    id: "rabin-ot",
    name: "square-root oblivious transfer",
    stages: &["Set-up", "Challenge", "Response"],
    output_domain_a: "{}",
    output_domain_b: "{factors (p, q), nothing}",
    domains_published_first: true,
};

const TAG_SETUP: u8 = 0x10;
const TAG_CHALLENGE: u8 = 0x11;
const TAG_RESPONSE: u8 = 0x12;

/// Draw budget for B's unit sampling; at any realistic modulus the first draw
/// is already a unit.
const UNIT_DRAW_BUDGET: usize = 64;

enum SenderState {
    Start,
    AwaitChallenge,
    Finished,
}

/// Party A: holds the factorization, answers with a uniform square root.
pub struct RabinSender {
    secret: OtSecretFactorization,
    state: SenderState,
}

impl RabinSender {
    pub fn new(secret: OtSecretFactorization) -> Self {
        RabinSender {
            secret,
            state: SenderState::Start,
        }
    }
}

impl PartyMachine for RabinSender {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match self.state {
            SenderState::Start => {
                let payload = Writer::new().int(self.secret.0.n()).finish();
                self.state = SenderState::AwaitChallenge;
                Ok(Action::Send {
                    label: "Set-up",
                    message: Message::new(TAG_SETUP, payload),
                })
            }
            SenderState::AwaitChallenge => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_CHALLENGE)?;
                let square = r.int()?;
                r.done()?;
                let roots = self.secret.0.four_square_roots(&square).map_err(|e| match e {
                    NumTheoryError::NotAResidue | NumTheoryError::NotCoprime => {
                        ProtocolError::CheckFailed("challenge is not a unit square".into())
                    }
                    other => ProtocolError::Malformed(other.to_string()),
                })?;
                let root = roots[rng.gen_range(0..4)].clone();
                self.state = SenderState::Finished;
                Ok(Action::Send {
                    label: "Response",
                    message: Message::new(TAG_RESPONSE, Writer::new().int(&root).finish()),
                })
            }
            SenderState::Finished => Ok(Action::Finish),
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match self.state {
            SenderState::Finished => Some(Vec::new()),
            _ => None,
        }
    }

    fn input_description(&self) -> Vec<u8> {
        Writer::new()
            .int(self.secret.0.p())
            .int(self.secret.0.q())
            .finish()
    }
}

/// What B walked away with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RabinOutcome {
    Factors(BigUint, BigUint),
    Nothing,
}

impl RabinOutcome {
    pub fn encode(&self) -> Vec<u8> {
        match self {
            RabinOutcome::Nothing => vec![0],
            RabinOutcome::Factors(p, q) => Writer::new().byte(1).int(p).int(q).finish(),
        }
    }

    pub fn decode(buf: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = crate::wire::Reader::new(buf);
        match r.byte()? {
            0 => {
                r.done()?;
                Ok(RabinOutcome::Nothing)
            }
            1 => {
                let p = r.int()?;
                let q = r.int()?;
                r.done()?;
                Ok(RabinOutcome::Factors(p, q))
            }
            _ => Err(ProtocolError::Malformed("unknown outcome marker".into())),
        }
    }
}

enum ReceiverState {
    Start,
    AwaitRoot { n: BigUint, x: BigUint },
    Finished(RabinOutcome),
}

/// Party B: challenges with a random unit square, factors on a lucky root.
pub struct RabinReceiver {
    state: ReceiverState,
}

impl RabinReceiver {
    pub fn new() -> Self {
        RabinReceiver {
            state: ReceiverState::Start,
        }
    }
}

impl Default for RabinReceiver {
    fn default() -> Self {
        Self::new()
    }
}

impl PartyMachine for RabinReceiver {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match &self.state {
            ReceiverState::Start => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_SETUP)?;
                let n = r.int()?;
                r.done()?;
                if n.is_even() || n < big(15) {
                    return Err(ProtocolError::CheckFailed(
                        "published modulus is not an odd composite".into(),
                    ));
                }
                let mut x = None;
                for _ in 0..UNIT_DRAW_BUDGET {
                    let c = numtheory::random_below(rng, &n);
                    if c < big(2) || !c.gcd(&n).is_one() {
                        continue;
                    }
                    x = Some(c);
                    break;
                }
                let x = x.ok_or_else(|| {
                    ProtocolError::CheckFailed("could not sample a unit challenge".into())
                })?;
                let square = (&x * &x) % &n;
                let payload = Writer::new().int(&square).finish();
                self.state = ReceiverState::AwaitRoot { n, x };
                Ok(Action::Send {
                    label: "Challenge",
                    message: Message::new(TAG_CHALLENGE, payload),
                })
            }
            ReceiverState::AwaitRoot { n, x } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_RESPONSE)?;
                let root = r.int()?;
                r.done()?;
                if (&root * &root) % n != (x * x) % n {
                    return Err(ProtocolError::CheckFailed(
                        "returned value is not a root of the challenge".into(),
                    ));
                }
                let outcome = match factor_from_roots(x, &root, n) {
                    Ok((p, q)) => RabinOutcome::Factors(p, q),
                    Err(NumTheoryError::TrivialRoots) => RabinOutcome::Nothing,
                    Err(e) => return Err(ProtocolError::CheckFailed(e.to_string())),
                };
                self.state = ReceiverState::Finished(outcome);
                Ok(Action::Finish)
            }
            ReceiverState::Finished(_) => Ok(Action::Finish),
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            ReceiverState::Finished(outcome) => Some(outcome.encode()),
            _ => None,
        }
    }
}

/// One honest session; returns the full result plus B's decoded outcome.
pub fn run_rabin(
    modulus: BlumModulus,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, RabinOutcome), SessionError> {
    let params = Writer::new().int(modulus.n()).finish();
    let mut sender = RabinSender::new(OtSecretFactorization(modulus));
    let mut receiver = RabinReceiver::new();
    let result = run_session(
        RABIN_SPEC.id,
        params,
        &mut sender,
        &mut receiver,
        Role::A,
        seed_a,
        seed_b,
        transport,
    )?;
    let outcome = RabinOutcome::decode(&result.outcome_b.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    Ok((result, outcome))
}
