//! Oblivious transfer composed from two one-of-two transfers.
//!
//! B publishes an isomorphic graph pair (G1, G2). A builds an intermediate
//! copy H = f1(G1) and splits her secret into f1: G1 -> H and f2: H -> G2.
//! Each half rides one embedded discrete-log one-of-two transfer: A places
//! the real share at a random slot and a fresh uniform dummy permutation at
//! the other, B picks a random slot per transfer. B recovers the full
//! isomorphism f2 . f1 exactly when both slot choices coincide, a 1/4-rate
//! event; undelivered shares are uniform noise so the message shapes never
//! betray the outcome.

use rand::Rng;

use crate::bits::Bits;
use crate::graphs::{
    apply_perm, find_isomorphism, gen_rigid_graph, random_perm, Graph, GraphError, Permutation,
};
use crate::session::{
    run_session, Action, Message, PartyMachine, ProtocolError, ProtocolSpec, Role, SessionError,
    SessionResult, SessionRng, Transport,
};
use crate::wire::{expect_tag, require_message, Reader, Writer};

use super::dlp::{build_betas, mask_secrets, unmask_chosen, DlpOtParams};
use super::TwoSecrets;

pub const COMPOSED_OT_SPEC: ProtocolSpec = ProtocolSpec {
    id: "composed-ot",
    name: "oblivious transfer from two one-of-two transfers",
    stages: &["Challenge", "Response"],
    output_domain_a: "slot choices (d1, d2)",
    output_domain_b: "{isomorphism G1 -> G2, nothing}",
    domains_published_first: true,
};

const TAG_CHALLENGE: u8 = 0x50;
const TAG_RESPONSE: u8 = 0x51;

fn graph_error(e: GraphError) -> ProtocolError {
    match e {
        GraphError::TooLarge(n) => {
            ProtocolError::CheckFailed(format!("instance too large for the oracle: {n} vertices"))
        }
        other => ProtocolError::Malformed(other.to_string()),
    }
}

/// Bits needed to carry any permutation rank below n!.
pub fn rank_bits(n: usize) -> usize {
    let fact: u64 = (1..=n as u64).product();
    (64 - (fact - 1).leading_zeros() as usize).max(1)
}

/// B's published pair with his own copy of the relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposedOtPair {
    pub g1: Graph,
    pub g2: Graph,
}

impl ComposedOtPair {
    /// Rigid base graph plus a uniform relabeling.
    pub fn generate<R: rand::RngCore>(n: usize, rng: &mut R) -> Result<Self, GraphError> {
        let g1 = gen_rigid_graph(n, 0.5, rng)?;
        let tau = random_perm(n, rng);
        let g2 = apply_perm(&g1, &tau)?;
        Ok(ComposedOtPair { g1, g2 })
    }
}

enum SenderState {
    Start,
    Finished { d1: bool, d2: bool },
}

/// Party A: finds the isomorphism, splits it, and feeds both halves through
/// embedded one-of-two transfers at random slots.
pub struct ComposedSender {
    params: DlpOtParams,
    state: SenderState,
}

impl ComposedSender {
    pub fn new(params: DlpOtParams) -> Self {
        ComposedSender {
            params,
            state: SenderState::Start,
        }
    }
}

impl PartyMachine for ComposedSender {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match self.state {
            SenderState::Start => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_CHALLENGE)?;
                let g1 = r.graph()?;
                let g2 = r.graph()?;
                let betas1 = [r.int()?, r.int()?];
                let betas2 = [r.int()?, r.int()?];
                r.done()?;
                if g1.n() != g2.n() {
                    return Err(ProtocolError::CheckFailed(
                        "published graphs differ in size".into(),
                    ));
                }
                let k = rank_bits(g1.n());
                if k != self.params.k {
                    return Err(ProtocolError::Malformed(
                        "share width does not match the graph size".into(),
                    ));
                }
                let psi = find_isomorphism(&g1, &g2)
                    .map_err(graph_error)?
                    .ok_or_else(|| {
                        ProtocolError::CheckFailed("published graphs are not isomorphic".into())
                    })?;
                let n = g1.n();
                let f1 = random_perm(n, rng);
                let f2 = psi.compose(&f1.invert()).map_err(graph_error)?;
                let d1: bool = rng.gen();
                let d2: bool = rng.gen();
                let mut w = Writer::new();
                for (share, d, betas) in [(f1, d1, betas1), (f2, d2, betas2)] {
                    let real = Bits::from_u64(share.rank(), k);
                    let dummy = Bits::from_u64(random_perm(n, rng).rank(), k);
                    let secrets = if d {
                        TwoSecrets::new(dummy, real)
                    } else {
                        TwoSecrets::new(real, dummy)
                    }
                    .expect("equal widths");
                    let part = mask_secrets(&self.params, &secrets, &betas[0], &betas[1], rng)?;
                    w = w.raw(&part.finish());
                }
                self.state = SenderState::Finished { d1, d2 };
                Ok(Action::Send {
                    label: "Response",
                    message: Message::new(TAG_RESPONSE, w.finish()),
                })
            }
            SenderState::Finished { .. } => Ok(Action::Finish),
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match self.state {
            SenderState::Finished { d1, d2 } => Some(vec![d1 as u8, d2 as u8]),
            _ => None,
        }
    }
}

/// B's private output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposedOtOutcome {
    pub c1: bool,
    pub c2: bool,
    pub delivered: Option<Permutation>,
}

impl ComposedOtOutcome {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new().byte(self.c1 as u8).byte(self.c2 as u8);
        match &self.delivered {
            None => w = w.byte(0),
            Some(p) => w = w.byte(1).perm(p),
        }
        w.finish()
    }

    pub fn decode(buf: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader::new(buf);
        let c1 = r.byte()? == 1;
        let c2 = r.byte()? == 1;
        let delivered = match r.byte()? {
            0 => None,
            1 => Some(r.perm()?),
            _ => return Err(ProtocolError::Malformed("unknown outcome marker".into())),
        };
        r.done()?;
        Ok(ComposedOtOutcome { c1, c2, delivered })
    }
}

enum ReceiverState {
    Start,
    AwaitResponse {
        x1: num_bigint::BigUint,
        x2: num_bigint::BigUint,
        c1: bool,
        c2: bool,
    },
    Finished(ComposedOtOutcome),
}

/// Party B: publishes the pair and draws a random slot per transfer.
pub struct ComposedReceiver {
    params: DlpOtParams,
    pair: ComposedOtPair,
    state: ReceiverState,
}

impl ComposedReceiver {
    pub fn new(params: DlpOtParams, pair: ComposedOtPair) -> Self {
        ComposedReceiver {
            params,
            pair,
            state: ReceiverState::Start,
        }
    }
}

impl PartyMachine for ComposedReceiver {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, ReceiverState::Start) {
            ReceiverState::Start => {
                if incoming.is_some() {
                    return Err(ProtocolError::Malformed("receiver starts the session".into()));
                }
                let c1: bool = rng.gen();
                let c2: bool = rng.gen();
                let (x1, betas1) = build_betas(&self.params, c1, rng);
                let (x2, betas2) = build_betas(&self.params, c2, rng);
                let payload = Writer::new()
                    .graph(&self.pair.g1)
                    .graph(&self.pair.g2)
                    .int(&betas1[0])
                    .int(&betas1[1])
                    .int(&betas2[0])
                    .int(&betas2[1])
                    .finish();
                self.state = ReceiverState::AwaitResponse { x1, x2, c1, c2 };
                Ok(Action::Send {
                    label: "Challenge",
                    message: Message::new(TAG_CHALLENGE, payload),
                })
            }
            ReceiverState::AwaitResponse { x1, x2, c1, c2 } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_RESPONSE)?;
                let share1 = unmask_chosen(&self.params, c1, &x1, &mut r)?;
                let share2 = unmask_chosen(&self.params, c2, &x2, &mut r)?;
                r.done()?;
                let n = self.pair.g1.n();
                let q1 = Permutation::from_rank(n, share1.to_u64());
                let q2 = Permutation::from_rank(n, share2.to_u64());
                let delivered = match (q1, q2) {
                    (Some(q1), Some(q2)) => {
                        let comp = q2.compose(&q1).map_err(graph_error)?;
                        match apply_perm(&self.pair.g1, &comp) {
                            Ok(image) if image == self.pair.g2 => Some(comp),
                            _ => None,
                        }
                    }
                    _ => None,
                };
                self.state = ReceiverState::Finished(ComposedOtOutcome { c1, c2, delivered });
                Ok(Action::Finish)
            }
            done @ ReceiverState::Finished(_) => {
                self.state = done;
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            ReceiverState::Finished(outcome) => Some(outcome.encode()),
            _ => None,
        }
    }
}

/// One honest session; returns the result plus both decoded outcomes.
pub fn run_composed_ot(
    params: &DlpOtParams,
    pair: ComposedOtPair,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, ComposedOtOutcome), SessionError> {
    let session_params = Writer::new()
        .graph(&pair.g1)
        .graph(&pair.g2)
        .raw(&params.encode())
        .finish();
    let mut sender = ComposedSender::new(params.clone());
    let mut receiver = ComposedReceiver::new(params.clone(), pair);
    let result = run_session(
        COMPOSED_OT_SPEC.id,
        session_params,
        &mut sender,
        &mut receiver,
        Role::B,
        seed_a,
        seed_b,
        transport,
    )?;
    let outcome = ComposedOtOutcome::decode(&result.outcome_b.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    Ok((result, outcome))
}
