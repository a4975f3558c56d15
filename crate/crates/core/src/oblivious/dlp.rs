//! One-of-two oblivious transfer over a prime field.
//!
//! Public parameters are (p, g, c) where nobody is supposed to know the
//! discrete log of c. B commits to his choice i by sending beta_i = g^x and
//! beta_{1-i} = c * (g^x)^{-1}; A checks beta_0 * beta_1 = c, then masks each
//! secret with the low bits of gamma_j = beta_j^{y_j} while revealing
//! alpha_j = g^{y_j}. B can unmask only the chosen branch.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use sha2::{Digest, Sha256};

use crate::bits::Bits;
use crate::numtheory::{mod_inverse, FieldContext};
use crate::session::{
    run_session, Action, Message, PartyMachine, ProtocolError, ProtocolSpec, Role, SessionError,
    SessionResult, SessionRng, Transport,
};
use crate::wire::{expect_tag, require_message, Reader, Writer};

use super::TwoSecrets;

pub const DLP_1OF2_SPEC: ProtocolSpec = ProtocolSpec {
    id: "dlp-1of2-ot",
    name: "discrete-log one-of-two oblivious transfer",
    stages: &["Challenge", "Response"],
    output_domain_a: "{}",
    output_domain_b: "{s_0, s_1} (exactly the chosen one)",
    domains_published_first: true,
};

const TAG_BETAS: u8 = 0x30;
const TAG_MASKED: u8 = 0x31;

/// Public parameters of the transfer. The choice-hiding element c is derived
/// by hashing a public label together with p, so neither party picked it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DlpOtParams {
    pub field: FieldContext,
    pub c: BigUint,
    pub k: usize,
}

impl DlpOtParams {
    pub fn new(field: FieldContext, k: usize) -> Self {
        Self::with_label(field, b"ot-choice-hiding-element", k)
    }

    pub fn with_label(field: FieldContext, label: &[u8], k: usize) -> Self {
        let mut h = Sha256::new();
        h.update(label);
        h.update(field.p().to_bytes_be());
        let digest = BigUint::from_bytes_be(&h.finalize());
        let c = digest % (field.p() - BigUint::one()) + BigUint::one();
        DlpOtParams { field, c, k }
    }

    pub fn encode(&self) -> Vec<u8> {
        Writer::new()
            .int(self.field.p())
            .int(self.field.g())
            .int(&self.c)
            .byte(self.k as u8)
            .finish()
    }
}

enum SenderState {
    Start,
    Finished,
}

/// Party A: holds both secrets; never learns which branch B can unmask.
pub struct DlpSender {
    params: DlpOtParams,
    secrets: TwoSecrets,
    state: SenderState,
}

impl DlpSender {
    pub fn new(params: DlpOtParams, secrets: TwoSecrets) -> Self {
        assert_eq!(params.k, secrets.len(), "secret length must match k");
        DlpSender {
            params,
            secrets,
            state: SenderState::Start,
        }
    }
}

/// A's side of the masking step, shared with the composed transfer and the
/// comparison protocols: check the betas, draw fresh exponents, emit
/// (alpha_0, alpha_1, masked_0, masked_1).
pub(crate) fn mask_secrets(
    params: &DlpOtParams,
    secrets: &TwoSecrets,
    beta0: &BigUint,
    beta1: &BigUint,
    rng: &mut SessionRng,
) -> Result<Writer, ProtocolError> {
    let p = params.field.p();
    for beta in [beta0, beta1] {
        if beta.is_zero() || beta >= p {
            return Err(ProtocolError::Malformed("beta out of range".into()));
        }
    }
    if (beta0 * beta1) % p != params.c {
        return Err(ProtocolError::CheckFailed(
            "beta product does not match c".into(),
        ));
    }
    let mut w = Writer::new();
    for (j, beta) in [beta0, beta1].into_iter().enumerate() {
        let y = params.field.sample_exponent(rng);
        let alpha = params.field.pow(&y);
        let gamma = beta.modpow(&y, p);
        let mask = Bits::low_bits(&gamma, params.k);
        let masked = secrets
            .get(j == 1)
            .xor(&mask)
            .expect("secret length equals k");
        w = w.int(&alpha).bits(&masked);
    }
    Ok(w)
}

/// B's side of the betas: beta_i = g^x, beta_{1-i} = c * (g^x)^{-1}.
pub(crate) fn build_betas(
    params: &DlpOtParams,
    choice: bool,
    rng: &mut SessionRng,
) -> (BigUint, [BigUint; 2]) {
    let p = params.field.p();
    let x = params.field.sample_exponent(rng);
    let mine = params.field.pow(&x);
    let other = (&params.c * mod_inverse(&mine, p).expect("group element is a unit")) % p;
    let betas = if choice {
        [other, mine]
    } else {
        [mine, other]
    };
    (x, betas)
}

/// B's unmasking of the chosen branch from A's response fields.
pub(crate) fn unmask_chosen(
    params: &DlpOtParams,
    choice: bool,
    x: &BigUint,
    r: &mut Reader<'_>,
) -> Result<Bits, ProtocolError> {
    let mut secret = None;
    for j in 0..2 {
        let alpha = r.int()?;
        let masked = r.bits()?;
        if masked.len() != params.k {
            return Err(ProtocolError::Malformed("masked string length".into()));
        }
        if j == choice as usize {
            let gamma = alpha.modpow(x, params.field.p());
            let mask = Bits::low_bits(&gamma, params.k);
            secret = Some(masked.xor(&mask).expect("lengths checked"));
        }
    }
    Ok(secret.expect("one branch is chosen"))
}

impl PartyMachine for DlpSender {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match self.state {
            SenderState::Start => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_BETAS)?;
                let beta0 = r.int()?;
                let beta1 = r.int()?;
                r.done()?;
                let w = mask_secrets(&self.params, &self.secrets, &beta0, &beta1, rng)?;
                self.state = SenderState::Finished;
                Ok(Action::Send {
                    label: "Response",
                    message: Message::new(TAG_MASKED, w.finish()),
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
            .bits(self.secrets.get(false))
            .bits(self.secrets.get(true))
            .finish()
    }
}

enum ReceiverState {
    Start,
    AwaitMasked { x: BigUint },
    Finished(Bits),
}

/// Party B: chooses a branch, hidden from A inside the beta pair.
pub struct DlpReceiver {
    params: DlpOtParams,
    choice: bool,
    state: ReceiverState,
}

impl DlpReceiver {
    pub fn new(params: DlpOtParams, choice: bool) -> Self {
        DlpReceiver {
            params,
            choice,
            state: ReceiverState::Start,
        }
    }
}

impl PartyMachine for DlpReceiver {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match &self.state {
            ReceiverState::Start => {
                if incoming.is_some() {
                    return Err(ProtocolError::Malformed("receiver starts the session".into()));
                }
                let (x, betas) = build_betas(&self.params, self.choice, rng);
                let payload = Writer::new().int(&betas[0]).int(&betas[1]).finish();
                self.state = ReceiverState::AwaitMasked { x };
                Ok(Action::Send {
                    label: "Challenge",
                    message: Message::new(TAG_BETAS, payload),
                })
            }
            ReceiverState::AwaitMasked { x } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_MASKED)?;
                let secret = unmask_chosen(&self.params, self.choice, x, &mut r)?;
                r.done()?;
                self.state = ReceiverState::Finished(secret);
                Ok(Action::Finish)
            }
            ReceiverState::Finished(_) => Ok(Action::Finish),
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            ReceiverState::Finished(s) => Some(s.encode()),
            _ => None,
        }
    }

    fn input_description(&self) -> Vec<u8> {
        vec![self.choice as u8]
    }
}

/// One honest session; returns the result plus B's recovered secret.
pub fn run_dlp_1of2(
    params: &DlpOtParams,
    secrets: TwoSecrets,
    choice: bool,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, Bits), SessionError> {
    let mut sender = DlpSender::new(params.clone(), secrets);
    let mut receiver = DlpReceiver::new(params.clone(), choice);
    let result = run_session(
        DLP_1OF2_SPEC.id,
        params.encode(),
        &mut sender,
        &mut receiver,
        Role::B,
        seed_a,
        seed_b,
        transport,
    )?;
    let (secret, _) = Bits::decode(&result.outcome_b.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    Ok((result, secret))
}
