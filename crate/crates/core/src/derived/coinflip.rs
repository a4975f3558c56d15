//! Coin flipping by telephone, in two flavors.
//!
//! QRP flavor: A publishes N and z ≡ y² where y ≡ x² for secret x; B bets on
//! the parity of y; A reveals x, y and the factors, and B audits everything
//! including the Blum condition. General flavor: the one-way function is
//! exponentiation with a certified generator, y = g^x, and B bets on the
//! parity of x; the exponent domain {0,…,p−2} has as many even as odd
//! members, and injectivity makes the commitment binding.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::numtheory::{big, gen_blum, is_prime, BlumModulus, FieldContext};
use crate::session::{
    run_session, Action, Message, PartyMachine, ProtocolError, ProtocolSpec, Role, SessionError,
    SessionResult, SessionRng, Transport,
};
use crate::wire::{expect_tag, require_message, Reader, Writer};

pub const COIN_FLIP_QRP_SPEC: ProtocolSpec = ProtocolSpec {
    id: "coin-flip-qrp",
    name: "coin flipping over quadratic residues",
    stages: &["Set-up", "Bet", "Reveal"],
    output_domain_a: "{heads (even), tails (odd)} with winner",
    output_domain_b: "{heads (even), tails (odd)} with winner",
    domains_published_first: true,
};

pub const COIN_FLIP_GENERAL_SPEC: ProtocolSpec = ProtocolSpec {
    id: "coin-flip-general",
    name: "coin flipping over a one-way commitment",
    stages: &["Commit", "Bet", "Reveal"],
    output_domain_a: "{heads (even), tails (odd)} with winner",
    output_domain_b: "{heads (even), tails (odd)} with winner",
    domains_published_first: true,
};

const TAG_SETUP: u8 = 0x80;
const TAG_BET: u8 = 0x81;
const TAG_REVEAL: u8 = 0x82;

/// The agreed toss: the bit, who won it, and the opening data either party
/// (or an auditor) can recheck.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoinResult {
    /// false = even, true = odd.
    pub outcome: bool,
    pub winner: Role,
    pub proof_data: Vec<u8>,
}

impl CoinResult {
    pub fn encode(&self) -> Vec<u8> {
        Writer::new()
            .byte(self.outcome as u8)
            .byte(match self.winner {
                Role::A => 0,
                Role::B => 1,
            })
            .raw(&self.proof_data)
            .finish()
    }

    pub fn decode(buf: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader::new(buf);
        let outcome = r.byte()? == 1;
        let winner = if r.byte()? == 0 { Role::A } else { Role::B };
        let proof_data = r.raw(buf.len() - 2)?.to_vec();
        Ok(CoinResult {
            outcome,
            winner,
            proof_data,
        })
    }
}

fn is_odd(v: &BigUint) -> bool {
    v.bit(0)
}

/// Re-derive the QRP toss from its proof data, running every check B runs.
/// Proof data: N, z, bet, x, y, p, q.
pub fn recompute_qrp_coin(proof_data: &[u8]) -> Result<CoinResult, ProtocolError> {
    let mut r = Reader::new(proof_data);
    let n = r.int()?;
    let z = r.int()?;
    let bet = r.byte()?;
    let x = r.int()?;
    let y = r.int()?;
    let p = r.int()?;
    let q = r.int()?;
    r.done()?;
    if bet > 1 {
        return Err(ProtocolError::Malformed("bet is not a bit".into()));
    }
    if &p * &q != n {
        return Err(ProtocolError::CheckFailed(
            "revealed factors do not multiply to the modulus".into(),
        ));
    }
    if !is_prime(&p) || !is_prime(&q) {
        return Err(ProtocolError::CheckFailed(
            "revealed factor is not prime".into(),
        ));
    }
    if &p % big(4) != big(3) || &q % big(4) != big(3) {
        return Err(ProtocolError::CheckFailed(
            "modulus is not of Blum form".into(),
        ));
    }
    if x >= n || !x.gcd(&n).is_one() {
        return Err(ProtocolError::CheckFailed(
            "revealed x is not a unit of the ring".into(),
        ));
    }
    if (&x * &x) % &n != y || (&y * &y) % &n != z {
        return Err(ProtocolError::CheckFailed(
            "revealed values do not match the published square".into(),
        ));
    }
    let outcome = is_odd(&y);
    let winner = if (bet == 1) == outcome { Role::B } else { Role::A };
    Ok(CoinResult {
        outcome,
        winner,
        proof_data: proof_data.to_vec(),
    })
}

enum QrpAState {
    Start,
    AwaitBet {
        modulus: BlumModulus,
        x: BigUint,
        y: BigUint,
        z: BigUint,
    },
    Finished(CoinResult),
}

/// Party A: squares twice, reveals everything after the bet.
pub struct CoinFlipQrpA {
    bits: u64,
    /// Fixed modulus instead of fresh generation; used by tests and cheats.
    fixed: Option<BlumModulus>,
    state: QrpAState,
}

impl CoinFlipQrpA {
    pub fn new(bits: u64) -> Self {
        CoinFlipQrpA {
            bits,
            fixed: None,
            state: QrpAState::Start,
        }
    }

    pub fn with_modulus(modulus: BlumModulus) -> Self {
        CoinFlipQrpA {
            bits: 0,
            fixed: Some(modulus),
            state: QrpAState::Start,
        }
    }
}

impl PartyMachine for CoinFlipQrpA {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, QrpAState::Start) {
            QrpAState::Start => {
                let modulus = match self.fixed.take() {
                    Some(m) => m,
                    None => gen_blum(self.bits, rng),
                };
                let x = modulus.sample_unit(rng);
                let y = (&x * &x) % modulus.n();
                let z = (&y * &y) % modulus.n();
                let payload = Writer::new().int(modulus.n()).int(&z).finish();
                self.state = QrpAState::AwaitBet { modulus, x, y, z };
                Ok(Action::Send {
                    label: "Set-up",
                    message: Message::new(TAG_SETUP, payload),
                })
            }
            QrpAState::AwaitBet { modulus, x, y, z } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_BET)?;
                let bet = r.byte()?;
                r.done()?;
                if bet > 1 {
                    return Err(ProtocolError::Malformed("bet is not a bit".into()));
                }
                let proof_data = Writer::new()
                    .int(modulus.n())
                    .int(&z)
                    .byte(bet)
                    .int(&x)
                    .int(&y)
                    .int(modulus.p())
                    .int(modulus.q())
                    .finish();
                let reveal = Writer::new()
                    .int(&x)
                    .int(&y)
                    .int(modulus.p())
                    .int(modulus.q())
                    .finish();
                let outcome = is_odd(&y);
                let winner = if (bet == 1) == outcome { Role::B } else { Role::A };
                self.state = QrpAState::Finished(CoinResult {
                    outcome,
                    winner,
                    proof_data,
                });
                Ok(Action::Send {
                    label: "Reveal",
                    message: Message::new(TAG_REVEAL, reveal),
                })
            }
            QrpAState::Finished(result) => {
                self.state = QrpAState::Finished(result);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            QrpAState::Finished(result) => Some(result.encode()),
            _ => None,
        }
    }
}

enum QrpBState {
    AwaitSetup,
    AwaitReveal { n: BigUint, z: BigUint, bet: u8 },
    Finished(CoinResult),
}

/// Party B: bets on the parity of the hidden y, audits the reveal.
pub struct CoinFlipQrpB {
    state: QrpBState,
}

impl CoinFlipQrpB {
    pub fn new() -> Self {
        CoinFlipQrpB {
            state: QrpBState::AwaitSetup,
        }
    }
}

impl Default for CoinFlipQrpB {
    fn default() -> Self {
        Self::new()
    }
}

impl PartyMachine for CoinFlipQrpB {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, QrpBState::AwaitSetup) {
            QrpBState::AwaitSetup => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_SETUP)?;
                let n = r.int()?;
                let z = r.int()?;
                r.done()?;
                if n.is_even() || n < big(15) || z >= n {
                    return Err(ProtocolError::CheckFailed(
                        "published modulus or square is out of range".into(),
                    ));
                }
                let bet: u8 = rng.gen_range(0..2);
                self.state = QrpBState::AwaitReveal { n, z, bet };
                Ok(Action::Send {
                    label: "Bet",
                    message: Message::new(TAG_BET, Writer::new().byte(bet).finish()),
                })
            }
            QrpBState::AwaitReveal { n, z, bet } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_REVEAL)?;
                let x = r.int()?;
                let y = r.int()?;
                let p = r.int()?;
                let q = r.int()?;
                r.done()?;
                let proof_data = Writer::new()
                    .int(&n)
                    .int(&z)
                    .byte(bet)
                    .int(&x)
                    .int(&y)
                    .int(&p)
                    .int(&q)
                    .finish();
                let result = recompute_qrp_coin(&proof_data)?;
                self.state = QrpBState::Finished(result);
                Ok(Action::Finish)
            }
            QrpBState::Finished(result) => {
                self.state = QrpBState::Finished(result);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            QrpBState::Finished(result) => Some(result.encode()),
            _ => None,
        }
    }
}

/// One honest QRP toss with a fresh modulus of the given size.
pub fn run_coin_flip_qrp(
    bits: u64,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, CoinResult), SessionError> {
    let mut a = CoinFlipQrpA::new(bits);
    let mut b = CoinFlipQrpB::new();
    let result = run_session(
        COIN_FLIP_QRP_SPEC.id,
        Writer::new().byte(bits as u8).finish(),
        &mut a,
        &mut b,
        Role::A,
        seed_a,
        seed_b,
        transport,
    )?;
    let coin = CoinResult::decode(&result.outcome_b.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    Ok((result, coin))
}

// ---------------------------------------------------------------------------
// general flavor: y = g^x with a certified generator

/// Re-derive the general toss from its proof data: p, g, y, bet, x.
pub fn recompute_general_coin(proof_data: &[u8]) -> Result<CoinResult, ProtocolError> {
    let mut r = Reader::new(proof_data);
    let p = r.int()?;
    let g = r.int()?;
    let y = r.int()?;
    let bet = r.byte()?;
    let x = r.int()?;
    r.done()?;
    if bet > 1 {
        return Err(ProtocolError::Malformed("bet is not a bit".into()));
    }
    if x > &p - big(2) {
        return Err(ProtocolError::CheckFailed(
            "revealed exponent is outside the committed domain".into(),
        ));
    }
    if g.modpow(&x, &p) != y {
        return Err(ProtocolError::CheckFailed(
            "revealed exponent does not open the commitment".into(),
        ));
    }
    let outcome = is_odd(&x);
    let winner = if (bet == 1) == outcome { Role::B } else { Role::A };
    Ok(CoinResult {
        outcome,
        winner,
        proof_data: proof_data.to_vec(),
    })
}

enum GeneralAState {
    Start,
    AwaitBet { x: BigUint, y: BigUint },
    Finished(CoinResult),
}

/// Party A: commits to x through the certified one-way exponentiation.
pub struct CoinFlipGeneralA {
    field: FieldContext,
    state: GeneralAState,
}

impl CoinFlipGeneralA {
    pub fn new(field: FieldContext) -> Self {
        CoinFlipGeneralA {
            field,
            state: GeneralAState::Start,
        }
    }
}

impl PartyMachine for CoinFlipGeneralA {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, GeneralAState::Start) {
            GeneralAState::Start => {
                let x = self.field.sample_exponent(rng);
                let y = self.field.pow(&x);
                let payload = Writer::new().int(&y).finish();
                self.state = GeneralAState::AwaitBet { x, y };
                Ok(Action::Send {
                    label: "Commit",
                    message: Message::new(TAG_SETUP, payload),
                })
            }
            GeneralAState::AwaitBet { x, y } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_BET)?;
                let bet = r.byte()?;
                r.done()?;
                if bet > 1 {
                    return Err(ProtocolError::Malformed("bet is not a bit".into()));
                }
                let proof_data = Writer::new()
                    .int(self.field.p())
                    .int(self.field.g())
                    .int(&y)
                    .byte(bet)
                    .int(&x)
                    .finish();
                let outcome = is_odd(&x);
                let winner = if (bet == 1) == outcome { Role::B } else { Role::A };
                self.state = GeneralAState::Finished(CoinResult {
                    outcome,
                    winner,
                    proof_data,
                });
                Ok(Action::Send {
                    label: "Reveal",
                    message: Message::new(TAG_REVEAL, Writer::new().int(&x).finish()),
                })
            }
            GeneralAState::Finished(result) => {
                self.state = GeneralAState::Finished(result);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            GeneralAState::Finished(result) => Some(result.encode()),
            _ => None,
        }
    }
}

enum GeneralBState {
    AwaitCommit,
    AwaitReveal { y: BigUint, bet: u8 },
    Finished(CoinResult),
}

/// Party B: bets on the parity of the committed exponent.
pub struct CoinFlipGeneralB {
    field: FieldContext,
    state: GeneralBState,
}

impl CoinFlipGeneralB {
    pub fn new(field: FieldContext) -> Self {
        CoinFlipGeneralB {
            field,
            state: GeneralBState::AwaitCommit,
        }
    }
}

impl PartyMachine for CoinFlipGeneralB {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, GeneralBState::AwaitCommit) {
            GeneralBState::AwaitCommit => {
                if !self.field.generator_certified() {
                    return Err(ProtocolError::CheckFailed(
                        "field generator is not certified".into(),
                    ));
                }
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_SETUP)?;
                let y = r.int()?;
                r.done()?;
                if y.is_zero() || y >= *self.field.p() {
                    return Err(ProtocolError::CheckFailed(
                        "commitment is not a group element".into(),
                    ));
                }
                let bet: u8 = rng.gen_range(0..2);
                self.state = GeneralBState::AwaitReveal { y, bet };
                Ok(Action::Send {
                    label: "Bet",
                    message: Message::new(TAG_BET, Writer::new().byte(bet).finish()),
                })
            }
            GeneralBState::AwaitReveal { y, bet } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_REVEAL)?;
                let x = r.int()?;
                r.done()?;
                let proof_data = Writer::new()
                    .int(self.field.p())
                    .int(self.field.g())
                    .int(&y)
                    .byte(bet)
                    .int(&x)
                    .finish();
                let result = recompute_general_coin(&proof_data)?;
                self.state = GeneralBState::Finished(result);
                Ok(Action::Finish)
            }
            GeneralBState::Finished(result) => {
                self.state = GeneralBState::Finished(result);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            GeneralBState::Finished(result) => Some(result.encode()),
            _ => None,
        }
    }
}

/// One honest general toss over the given field.
pub fn run_coin_flip_general(
    field: &FieldContext,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, CoinResult), SessionError> {
    let mut a = CoinFlipGeneralA::new(field.clone());
    let mut b = CoinFlipGeneralB::new(field.clone());
    let params = Writer::new().int(field.p()).int(field.g()).finish();
    let result = run_session(
        COIN_FLIP_GENERAL_SPEC.id,
        params,
        &mut a,
        &mut b,
        Role::A,
        seed_a,
        seed_b,
        transport,
    )?;
    let coin = CoinResult::decode(&result.outcome_b.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    Ok((result, coin))
}
