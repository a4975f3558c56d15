//! The two-sided comparison protocol family.
//!
//! Both parties hold n-bit secrets and 2n fresh k-bit mask strings. For each
//! position, each party receives — through the choice-hiding one-of-two
//! transfer — the counterpart's mask selected by its own secret bit, then
//! publishes the XOR-accumulation of everything it received and everything
//! it kept. The two published sums coincide exactly when the secrets are
//! equal, up to a false-equal probability of 2^{-k}; a difference proves the
//! secrets differ without locating more than that.
//!
//! Byzantine agreement is the n = 1, k = 1 instance; string verification is
//! the general instance at large k (default 32).

use num_bigint::BigUint;
use rand::RngCore;

use crate::bits::Bits;
use crate::oblivious::{build_betas, mask_secrets, unmask_chosen, DlpOtParams, TwoSecrets};
use crate::session::{
    run_session, Action, Message, PartyMachine, ProtocolError, ProtocolSpec, Role, SessionError,
    SessionResult, SessionRng, Transport,
};
use crate::wire::{expect_tag, require_message, Writer};

pub const TSCP_SPEC: ProtocolSpec = ProtocolSpec {
    id: "tscp",
    name: "two-sided comparison",
    stages: &["Transfer", "Publication"],
    output_domain_a: "{possibly equal, definitely different}",
    output_domain_b: "{possibly equal, definitely different}",
    domains_published_first: true,
};

pub const BYZANTINE_AGREEMENT_SPEC: ProtocolSpec = ProtocolSpec {
    id: "byzantine-agreement",
    name: "bit agreement",
    stages: &["Transfer", "Publication"],
    output_domain_a: "{possibly equal, definitely different}",
    output_domain_b: "{possibly equal, definitely different}",
    domains_published_first: true,
};

pub const STRING_VERIFICATION_SPEC: ProtocolSpec = ProtocolSpec {
    id: "string-verification",
    name: "string equality verification",
    stages: &["Transfer", "Publication"],
    output_domain_a: "{possibly equal, definitely different}",
    output_domain_b: "{possibly equal, definitely different}",
    domains_published_first: true,
};

pub const VERDICT_POSSIBLY_EQUAL: u8 = 0;
pub const VERDICT_DIFFERENT: u8 = 1;

const TAG_B_BETAS: u8 = 0xb0;
const TAG_A_STEP: u8 = 0xb1;
const TAG_B_STEP: u8 = 0xb2;
const TAG_A_SUM: u8 = 0xb3;
const TAG_B_SUM: u8 = 0xb4;

/// One party's private comparison input: the secret and the 2n mask strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonInput {
    secret: Bits,
    masks: Vec<[Bits; 2]>,
}

impl ComparisonInput {
    /// Requires exactly 2n masks of exactly k bits.
    pub fn new(secret: Bits, masks: Vec<[Bits; 2]>, k: usize) -> Result<Self, ProtocolError> {
        if masks.len() != secret.len() {
            return Err(ProtocolError::Malformed(
                "one mask pair per secret bit required".into(),
            ));
        }
        if masks.iter().any(|pair| pair[0].len() != k || pair[1].len() != k) {
            return Err(ProtocolError::Malformed(
                "every mask must be exactly k bits".into(),
            ));
        }
        Ok(ComparisonInput { secret, masks })
    }

    /// Fresh uniform masks for the given secret.
    pub fn random<R: RngCore>(secret: Bits, k: usize, rng: &mut R) -> Self {
        let masks = (0..secret.len())
            .map(|_| [Bits::random(k, rng), Bits::random(k, rng)])
            .collect();
        ComparisonInput { secret, masks }
    }

    pub fn secret(&self) -> &Bits {
        &self.secret
    }

    pub fn n(&self) -> usize {
        self.secret.len()
    }

    fn pair(&self, i: usize) -> TwoSecrets {
        TwoSecrets::new(self.masks[i][0].clone(), self.masks[i][1].clone())
            .expect("mask pairs share k")
    }

    /// XOR of this party's own masks selected by its own secret bits.
    fn own_selected_sum(&self, k: usize) -> Bits {
        let mut acc = Bits::zero(k);
        for i in 0..self.n() {
            let chosen = &self.masks[i][self.secret.get(i) as usize];
            acc = acc.xor(chosen).expect("lengths match");
        }
        acc
    }
}

fn verdict_of(sum_a: &Bits, sum_b: &Bits) -> u8 {
    if sum_a == sum_b {
        VERDICT_POSSIBLY_EQUAL
    } else {
        VERDICT_DIFFERENT
    }
}

enum AState {
    AwaitOpen,
    AwaitStep { pos: usize, x: BigUint, received: Bits },
    AwaitSumB { sum_a: Bits },
    Finished(u8),
}

/// Party A of the comparison.
pub struct TscpA {
    params: DlpOtParams,
    input: ComparisonInput,
    state: AState,
}

impl TscpA {
    pub fn new(params: DlpOtParams, input: ComparisonInput) -> Self {
        TscpA {
            params,
            input,
            state: AState::AwaitOpen,
        }
    }

    /// Respond to B's betas for position `pos` and attach our betas for the
    /// same position's reverse transfer.
    fn step_payload(
        &self,
        pos: usize,
        beta0: &BigUint,
        beta1: &BigUint,
        rng: &mut SessionRng,
    ) -> Result<(BigUint, Writer), ProtocolError> {
        let w = mask_secrets(&self.params, &self.input.pair(pos), beta0, beta1, rng)?;
        let (x, betas) = build_betas(&self.params, self.input.secret.get(pos), rng);
        Ok((x, w.int(&betas[0]).int(&betas[1])))
    }
}

impl PartyMachine for TscpA {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        let k = self.params.k;
        match std::mem::replace(&mut self.state, AState::AwaitOpen) {
            AState::AwaitOpen => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_B_BETAS)?;
                let peer_n = r.byte()? as usize * 256 + r.byte()? as usize;
                if peer_n != self.input.n() {
                    return Err(ProtocolError::CheckFailed(
                        "secret lengths differ".into(),
                    ));
                }
                let beta0 = r.int()?;
                let beta1 = r.int()?;
                r.done()?;
                let (x, w) = self.step_payload(0, &beta0, &beta1, rng)?;
                self.state = AState::AwaitStep {
                    pos: 0,
                    x,
                    received: Bits::zero(k),
                };
                Ok(Action::Send {
                    label: "Transfer",
                    message: Message::new(TAG_A_STEP, w.finish()),
                })
            }
            AState::AwaitStep { pos, x, received } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_B_STEP)?;
                let mine = unmask_chosen(&self.params, self.input.secret.get(pos), &x, &mut r)?;
                let received = received.xor(&mine).expect("k matches");
                if pos + 1 < self.input.n() {
                    let beta0 = r.int()?;
                    let beta1 = r.int()?;
                    r.done()?;
                    let (x, w) = self.step_payload(pos + 1, &beta0, &beta1, rng)?;
                    self.state = AState::AwaitStep {
                        pos: pos + 1,
                        x,
                        received,
                    };
                    Ok(Action::Send {
                        label: "Transfer",
                        message: Message::new(TAG_A_STEP, w.finish()),
                    })
                } else {
                    r.done()?;
                    let sum_a = received.xor(&self.input.own_selected_sum(k)).expect("k");
                    let payload = Writer::new().bits(&sum_a).finish();
                    self.state = AState::AwaitSumB { sum_a };
                    Ok(Action::Send {
                        label: "Publication",
                        message: Message::new(TAG_A_SUM, payload),
                    })
                }
            }
            AState::AwaitSumB { sum_a } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_B_SUM)?;
                let sum_b = r.bits()?;
                r.done()?;
                if sum_b.len() != k {
                    return Err(ProtocolError::Malformed("published sum length".into()));
                }
                self.state = AState::Finished(verdict_of(&sum_a, &sum_b));
                Ok(Action::Finish)
            }
            AState::Finished(v) => {
                self.state = AState::Finished(v);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match self.state {
            AState::Finished(v) => Some(vec![v]),
            _ => None,
        }
    }

    fn input_description(&self) -> Vec<u8> {
        Writer::new().bits(&self.input.secret).finish()
    }
}

enum BState {
    Start,
    AwaitStep { pos: usize, x: BigUint, received: Bits },
    AwaitSumA,
    Finished(u8),
}

/// Party B of the comparison; opens the session.
pub struct TscpB {
    params: DlpOtParams,
    input: ComparisonInput,
    received: Bits,
    state: BState,
}

impl TscpB {
    pub fn new(params: DlpOtParams, input: ComparisonInput) -> Self {
        let k = params.k;
        TscpB {
            params,
            input,
            received: Bits::zero(k),
            state: BState::Start,
        }
    }
}

impl PartyMachine for TscpB {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        let k = self.params.k;
        match std::mem::replace(&mut self.state, BState::Start) {
            BState::Start => {
                let n = self.input.n();
                let (x, betas) = build_betas(&self.params, self.input.secret.get(0), rng);
                let payload = Writer::new()
                    .byte((n / 256) as u8)
                    .byte((n % 256) as u8)
                    .int(&betas[0])
                    .int(&betas[1])
                    .finish();
                self.state = BState::AwaitStep {
                    pos: 0,
                    x,
                    received: Bits::zero(k),
                };
                Ok(Action::Send {
                    label: "Transfer",
                    message: Message::new(TAG_B_BETAS, payload),
                })
            }
            BState::AwaitStep { pos, x, received } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_A_STEP)?;
                let mine = unmask_chosen(&self.params, self.input.secret.get(pos), &x, &mut r)?;
                let received = received.xor(&mine).expect("k matches");
                let beta0 = r.int()?;
                let beta1 = r.int()?;
                r.done()?;
                let w = mask_secrets(&self.params, &self.input.pair(pos), &beta0, &beta1, rng)?;
                if pos + 1 < self.input.n() {
                    let (x, betas) = build_betas(&self.params, self.input.secret.get(pos + 1), rng);
                    let payload = w.int(&betas[0]).int(&betas[1]).finish();
                    self.state = BState::AwaitStep {
                        pos: pos + 1,
                        x,
                        received,
                    };
                    Ok(Action::Send {
                        label: "Transfer",
                        message: Message::new(TAG_B_STEP, payload),
                    })
                } else {
                    self.received = received;
                    self.state = BState::AwaitSumA;
                    Ok(Action::Send {
                        label: "Transfer",
                        message: Message::new(TAG_B_STEP, w.finish()),
                    })
                }
            }
            BState::AwaitSumA => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_A_SUM)?;
                let sum_a = r.bits()?;
                r.done()?;
                if sum_a.len() != k {
                    return Err(ProtocolError::Malformed("published sum length".into()));
                }
                let sum_b = self
                    .received
                    .xor(&self.input.own_selected_sum(k))
                    .expect("k");
                let payload = Writer::new().bits(&sum_b).finish();
                self.state = BState::Finished(verdict_of(&sum_a, &sum_b));
                Ok(Action::Send {
                    label: "Publication",
                    message: Message::new(TAG_B_SUM, payload),
                })
            }
            BState::Finished(v) => {
                self.state = BState::Finished(v);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match self.state {
            BState::Finished(v) => Some(vec![v]),
            _ => None,
        }
    }

    fn input_description(&self) -> Vec<u8> {
        Writer::new().bits(&self.input.secret).finish()
    }
}

/// One comparison; returns the session and both verdicts (A's, B's).
pub fn run_tscp(
    params: &DlpOtParams,
    a_input: ComparisonInput,
    b_input: ComparisonInput,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, u8, u8), SessionError> {
    run_with_spec(TSCP_SPEC.id, params, a_input, b_input, seed_a, seed_b, transport)
}

fn run_with_spec(
    id: &str,
    params: &DlpOtParams,
    a_input: ComparisonInput,
    b_input: ComparisonInput,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, u8, u8), SessionError> {
    let mut a = TscpA::new(params.clone(), a_input);
    let mut b = TscpB::new(params.clone(), b_input);
    let result = run_session(
        id,
        params.encode(),
        &mut a,
        &mut b,
        Role::B,
        seed_a,
        seed_b,
        transport,
    )?;
    let va = result.outcome_a.output[0];
    let vb = result.outcome_b.output[0];
    Ok((result, va, vb))
}

/// Bit agreement: the n = 1, k = 1 comparison. Masks are drawn from the
/// party seeds.
pub fn run_byzantine_agreement(
    params: &DlpOtParams,
    bit_a: bool,
    bit_b: bool,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, u8, u8), SessionError> {
    use rand::SeedableRng;
    assert_eq!(params.k, 1, "bit agreement uses single-bit masks");
    let mut mask_rng_a = SessionRng::seed_from_u64(seed_a ^ 0x6d61736b);
    let mut mask_rng_b = SessionRng::seed_from_u64(seed_b ^ 0x6d61736b);
    let mut sa = Bits::zero(1);
    sa.set(0, bit_a);
    let mut sb = Bits::zero(1);
    sb.set(0, bit_b);
    let a_input = ComparisonInput::random(sa, 1, &mut mask_rng_a);
    let b_input = ComparisonInput::random(sb, 1, &mut mask_rng_b);
    run_with_spec(
        BYZANTINE_AGREEMENT_SPEC.id,
        params,
        a_input,
        b_input,
        seed_a,
        seed_b,
        transport,
    )
}

/// String equality at mask width k (use 32 unless measuring failure rates).
pub fn run_string_verification(
    params: &DlpOtParams,
    s_a: &Bits,
    s_b: &Bits,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, u8, u8), SessionError> {
    use rand::SeedableRng;
    let mut mask_rng_a = SessionRng::seed_from_u64(seed_a ^ 0x6d61736b);
    let mut mask_rng_b = SessionRng::seed_from_u64(seed_b ^ 0x6d61736b);
    let a_input = ComparisonInput::random(s_a.clone(), params.k, &mut mask_rng_a);
    let b_input = ComparisonInput::random(s_b.clone(), params.k, &mut mask_rng_b);
    run_with_spec(
        STRING_VERIFICATION_SPEC.id,
        params,
        a_input,
        b_input,
        seed_a,
        seed_b,
        transport,
    )
}
