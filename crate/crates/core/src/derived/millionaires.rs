//! The millionaires' problem: who is richer, and nothing else beyond what
//! the comparison order inherently gives away.
//!
//! The wealths are compared bit by bit from the most significant position
//! down, each position running a single-bit comparison round (the bit
//! agreement construction). The first position whose published sums differ
//! decides: there the bits provably differ, so the party holding a 1 is the
//! richer one. Positions below the deciding one are never touched, which is
//! exactly the leak bound the construction admits — the index of the most
//! significant differing bit.

use num_bigint::BigUint;

use crate::bits::Bits;
use crate::oblivious::{build_betas, mask_secrets, unmask_chosen, DlpOtParams, TwoSecrets};
use crate::session::{
    run_session, Action, Message, PartyMachine, ProtocolError, ProtocolSpec, Role, SessionError,
    SessionResult, SessionRng, Transport,
};
use crate::wire::{expect_tag, require_message, Reader, Writer};

pub const MILLIONAIRES_SPEC: ProtocolSpec = ProtocolSpec {
    id: "millionaires",
    name: "millionaires' comparison",
    stages: &["Transfer", "Publication", "Continuation"],
    output_domain_a: "{A richer (0), not richer (1)}",
    output_domain_b: "{A richer (0), not richer (1)}",
    domains_published_first: true,
};

const TAG_B_OPEN: u8 = 0xb8;
const TAG_A_STEP: u8 = 0xb9;
const TAG_B_STEP: u8 = 0xba;
const TAG_A_SUM: u8 = 0xbb;
const TAG_B_SUM: u8 = 0xbc;

const MARK_STOP: u8 = 0;
const MARK_CONT: u8 = 1;
const MARK_END: u8 = 2;

/// A mask pair for one position, drawn lazily so untouched positions never
/// consume randomness.
fn draw_pair(k: usize, rng: &mut SessionRng) -> TwoSecrets {
    TwoSecrets::random(k, rng)
}

enum AState {
    AwaitOpen,
    AwaitResp { pos: usize, x: BigUint, pair: TwoSecrets },
    AwaitMarker { pos: usize, sum_a: Bits },
    Finished(u8),
}

/// Party A of the comparison.
pub struct MillionaireA {
    params: DlpOtParams,
    bits: Bits,
    state: AState,
}

impl MillionaireA {
    pub fn new(params: DlpOtParams, wealth: u64, bit_width: usize) -> Self {
        assert!(bit_width >= 1);
        assert!(bit_width >= 64 || wealth < (1 << bit_width));
        MillionaireA {
            params,
            bits: Bits::from_u64(wealth, bit_width),
            state: AState::AwaitOpen,
        }
    }

    /// Shared step: answer B's betas for `pos` and attach our own.
    fn respond(
        &mut self,
        pos: usize,
        r: &mut Reader,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        let beta0 = r.int()?;
        let beta1 = r.int()?;
        r.done()?;
        let pair = draw_pair(self.params.k, rng);
        let w = mask_secrets(&self.params, &pair, &beta0, &beta1, rng)?;
        let (x, betas) = build_betas(&self.params, self.bits.get(pos), rng);
        let payload = w.int(&betas[0]).int(&betas[1]).finish();
        self.state = AState::AwaitResp { pos, x, pair };
        Ok(Action::Send {
            label: "Transfer",
            message: Message::new(TAG_A_STEP, payload),
        })
    }
}

impl PartyMachine for MillionaireA {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, AState::AwaitOpen) {
            AState::AwaitOpen => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_B_OPEN)?;
                let width = r.byte()? as usize;
                if width != self.bits.len() {
                    return Err(ProtocolError::CheckFailed("bit widths differ".into()));
                }
                self.respond(0, &mut r, rng)
            }
            AState::AwaitResp { pos, x, pair } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_B_STEP)?;
                let received = unmask_chosen(&self.params, self.bits.get(pos), &x, &mut r)?;
                r.done()?;
                let own = pair.get(self.bits.get(pos));
                let sum_a = received.xor(own).expect("k matches");
                let payload = Writer::new().bits(&sum_a).finish();
                self.state = AState::AwaitMarker { pos, sum_a };
                Ok(Action::Send {
                    label: "Publication",
                    message: Message::new(TAG_A_SUM, payload),
                })
            }
            AState::AwaitMarker { pos, sum_a } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_B_SUM)?;
                let sum_b = r.bits()?;
                let marker = r.byte()?;
                let differ = sum_a != sum_b;
                match marker {
                    MARK_STOP => {
                        r.done()?;
                        if !differ {
                            return Err(ProtocolError::Malformed(
                                "stop marker without a sum difference".into(),
                            ));
                        }
                        // bits differ here; ours tells who is richer
                        let verdict = if self.bits.get(pos) { 0 } else { 1 };
                        self.state = AState::Finished(verdict);
                        Ok(Action::Finish)
                    }
                    MARK_END => {
                        r.done()?;
                        if differ {
                            return Err(ProtocolError::Malformed(
                                "end marker despite a sum difference".into(),
                            ));
                        }
                        if pos + 1 != self.bits.len() {
                            return Err(ProtocolError::Malformed(
                                "end marker before the last position".into(),
                            ));
                        }
                        self.state = AState::Finished(1);
                        Ok(Action::Finish)
                    }
                    MARK_CONT => {
                        if differ {
                            return Err(ProtocolError::Malformed(
                                "continuation despite a sum difference".into(),
                            ));
                        }
                        if pos + 1 >= self.bits.len() {
                            return Err(ProtocolError::Malformed(
                                "continuation past the last position".into(),
                            ));
                        }
                        self.respond(pos + 1, &mut r, rng)
                    }
                    _ => Err(ProtocolError::Malformed("unknown marker".into())),
                }
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
        Writer::new().bits(&self.bits).finish()
    }
}

enum BState {
    Start,
    AwaitStep { pos: usize, x: BigUint },
    AwaitSum { pos: usize, received: Bits, pair: TwoSecrets },
    Finished(u8),
}

/// Party B of the comparison; opens the session.
pub struct MillionaireB {
    params: DlpOtParams,
    bits: Bits,
    state: BState,
}

impl MillionaireB {
    pub fn new(params: DlpOtParams, wealth: u64, bit_width: usize) -> Self {
        assert!(bit_width >= 1);
        assert!(bit_width >= 64 || wealth < (1 << bit_width));
        MillionaireB {
            params,
            bits: Bits::from_u64(wealth, bit_width),
            state: BState::Start,
        }
    }
}

impl PartyMachine for MillionaireB {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, BState::Start) {
            BState::Start => {
                let (x, betas) = build_betas(&self.params, self.bits.get(0), rng);
                let payload = Writer::new()
                    .byte(self.bits.len() as u8)
                    .int(&betas[0])
                    .int(&betas[1])
                    .finish();
                self.state = BState::AwaitStep { pos: 0, x };
                Ok(Action::Send {
                    label: "Transfer",
                    message: Message::new(TAG_B_OPEN, payload),
                })
            }
            BState::AwaitStep { pos, x } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_A_STEP)?;
                let received = unmask_chosen(&self.params, self.bits.get(pos), &x, &mut r)?;
                let beta0 = r.int()?;
                let beta1 = r.int()?;
                r.done()?;
                let pair = draw_pair(self.params.k, rng);
                let w = mask_secrets(&self.params, &pair, &beta0, &beta1, rng)?;
                self.state = BState::AwaitSum { pos, received, pair };
                Ok(Action::Send {
                    label: "Transfer",
                    message: Message::new(TAG_B_STEP, w.finish()),
                })
            }
            BState::AwaitSum { pos, received, pair } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_A_SUM)?;
                let sum_a = r.bits()?;
                r.done()?;
                if sum_a.len() != self.params.k {
                    return Err(ProtocolError::Malformed("published sum length".into()));
                }
                let own = pair.get(self.bits.get(pos));
                let sum_b = received.xor(own).expect("k matches");
                let mut w = Writer::new().bits(&sum_b);
                if sum_a != sum_b {
                    // bits differ here; theirs is the complement of ours
                    let verdict = if self.bits.get(pos) { 1 } else { 0 };
                    w = w.byte(MARK_STOP);
                    self.state = BState::Finished(verdict);
                } else if pos + 1 == self.bits.len() {
                    w = w.byte(MARK_END);
                    self.state = BState::Finished(1);
                } else {
                    let (x, betas) = build_betas(&self.params, self.bits.get(pos + 1), rng);
                    w = w.byte(MARK_CONT).int(&betas[0]).int(&betas[1]);
                    self.state = BState::AwaitStep { pos: pos + 1, x };
                }
                Ok(Action::Send {
                    label: "Continuation",
                    message: Message::new(TAG_B_SUM, w.finish()),
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
        Writer::new().bits(&self.bits).finish()
    }
}

/// One comparison; returns the session and both verdicts (A's, B's).
/// Verdict 0 means A is richer; 1 covers w_a ≤ w_b.
pub fn run_millionaires(
    params: &DlpOtParams,
    w_a: u64,
    w_b: u64,
    bit_width: usize,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, u8, u8), SessionError> {
    let mut a = MillionaireA::new(params.clone(), w_a, bit_width);
    let mut b = MillionaireB::new(params.clone(), w_b, bit_width);
    let session_params = Writer::new()
        .raw(&params.encode())
        .byte(bit_width as u8)
        .finish();
    let result = run_session(
        MILLIONAIRES_SPEC.id,
        session_params,
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
