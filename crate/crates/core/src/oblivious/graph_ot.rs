//! Graph-isomorphism oblivious transfer.
//!
//! A publishes two isomorphic rigid graphs whose isomorphism is the secret.
//! B relabels a randomly chosen one into H and sends it; A picks her own
//! random index j, brute-forces an isomorphism phi: H -> G_j, and reveals
//! (j, phi). When j differs from B's index, composing phi with B's private
//! relabeling yields the secret; when they coincide, the composition is the
//! identity and B learns nothing. Either way A cannot tell.

use rand::Rng;

use crate::graphs::{apply_perm, find_isomorphism, random_perm, Graph, GraphError, Permutation};
use crate::session::{
    run_session, Action, Message, PartyMachine, ProtocolError, ProtocolSpec, Role, SessionError,
    SessionResult, SessionRng, Transport,
};
use crate::wire::{expect_tag, require_message, Reader, Writer};

use super::OtSecretIsomorphism;

pub const GRAPH_OT_SPEC: ProtocolSpec = ProtocolSpec {
    id: "graph-ot",
    name: "graph-isomorphism oblivious transfer",
    stages: &["Set-up", "Challenge", "Response"],
    output_domain_a: "{}",
    output_domain_b: "{isomorphism G1 -> G2, nothing}",
    domains_published_first: true,
};

const TAG_SETUP: u8 = 0x20;
const TAG_CHALLENGE: u8 = 0x21;
const TAG_RESPONSE: u8 = 0x22;

fn graph_error(e: GraphError) -> ProtocolError {
    match e {
        GraphError::TooLarge(n) => {
            ProtocolError::CheckFailed(format!("instance too large for the oracle: {n} vertices"))
        }
        other => ProtocolError::Malformed(other.to_string()),
    }
}

enum SenderState {
    Start,
    AwaitChallenge,
    Finished { j: u8 },
}

/// Party A: publishes the pair, answers the challenge copy with an
/// isomorphism to a random one of her graphs.
pub struct GraphOtSender {
    secret: OtSecretIsomorphism,
    state: SenderState,
}

impl GraphOtSender {
    pub fn new(secret: OtSecretIsomorphism) -> Self {
        GraphOtSender {
            secret,
            state: SenderState::Start,
        }
    }
}

impl PartyMachine for GraphOtSender {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match self.state {
            SenderState::Start => {
                let payload = Writer::new()
                    .graph(self.secret.g1())
                    .graph(self.secret.g2())
                    .finish();
                self.state = SenderState::AwaitChallenge;
                Ok(Action::Send {
                    label: "Set-up",
                    message: Message::new(TAG_SETUP, payload),
                })
            }
            SenderState::AwaitChallenge => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_CHALLENGE)?;
                let h = r.graph()?;
                r.done()?;
                let j: u8 = rng.gen_range(0..2);
                let target = if j == 0 {
                    self.secret.g1()
                } else {
                    self.secret.g2()
                };
                let phi = find_isomorphism(&h, target)
                    .map_err(graph_error)?
                    .ok_or_else(|| {
                        ProtocolError::CheckFailed(
                            "challenge graph is not isomorphic to the published pair".into(),
                        )
                    })?;
                self.state = SenderState::Finished { j };
                Ok(Action::Send {
                    label: "Response",
                    message: Message::new(
                        TAG_RESPONSE,
                        Writer::new().byte(j).perm(&phi).finish(),
                    ),
                })
            }
            SenderState::Finished { .. } => Ok(Action::Finish),
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match self.state {
            SenderState::Finished { j } => Some(vec![j]),
            _ => None,
        }
    }

    fn input_description(&self) -> Vec<u8> {
        Writer::new().perm(self.secret.iso()).finish()
    }
}

/// B's private output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphOtOutcome {
    Isomorphism(Permutation),
    Nothing,
}

impl GraphOtOutcome {
    pub fn encode(&self) -> Vec<u8> {
        match self {
            GraphOtOutcome::Nothing => vec![0],
            GraphOtOutcome::Isomorphism(p) => Writer::new().byte(1).perm(p).finish(),
        }
    }

    pub fn decode(buf: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader::new(buf);
        match r.byte()? {
            0 => Ok(GraphOtOutcome::Nothing),
            1 => {
                let p = r.perm()?;
                r.done()?;
                Ok(GraphOtOutcome::Isomorphism(p))
            }
            _ => Err(ProtocolError::Malformed("unknown outcome marker".into())),
        }
    }
}

enum ReceiverState {
    Start,
    AwaitResponse {
        g1: Graph,
        g2: Graph,
        i: u8,
        sigma: Permutation,
        h: Graph,
    },
    Finished(GraphOtOutcome),
}

/// Party B: challenges with a relabeled copy of one of the published graphs.
pub struct GraphOtReceiver {
    state: ReceiverState,
}

impl GraphOtReceiver {
    pub fn new() -> Self {
        GraphOtReceiver {
            state: ReceiverState::Start,
        }
    }
}

impl Default for GraphOtReceiver {
    fn default() -> Self {
        Self::new()
    }
}

impl PartyMachine for GraphOtReceiver {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, ReceiverState::Start) {
            ReceiverState::Start => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_SETUP)?;
                let g1 = r.graph()?;
                let g2 = r.graph()?;
                r.done()?;
                if g1.n() != g2.n() {
                    return Err(ProtocolError::CheckFailed(
                        "published graphs differ in size".into(),
                    ));
                }
                let i: u8 = rng.gen_range(0..2);
                let sigma = random_perm(g1.n(), rng);
                let src = if i == 0 { &g1 } else { &g2 };
                let h = apply_perm(src, &sigma).map_err(graph_error)?;
                let payload = Writer::new().graph(&h).finish();
                self.state = ReceiverState::AwaitResponse { g1, g2, i, sigma, h };
                Ok(Action::Send {
                    label: "Challenge",
                    message: Message::new(TAG_CHALLENGE, payload),
                })
            }
            ReceiverState::AwaitResponse { g1, g2, i, sigma, h } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_RESPONSE)?;
                let j = r.byte()?;
                let phi = r.perm()?;
                r.done()?;
                if j > 1 {
                    return Err(ProtocolError::Malformed("graph index out of range".into()));
                }
                let target = if j == 0 { &g1 } else { &g2 };
                if apply_perm(&h, &phi).map_err(graph_error)? != *target {
                    return Err(ProtocolError::CheckFailed(
                        "revealed map does not carry the challenge onto the named graph".into(),
                    ));
                }
                let outcome = if j == i {
                    GraphOtOutcome::Nothing
                } else {
                    // psi: G_i -> G_j through the challenge copy
                    let psi = phi.compose(&sigma).map_err(graph_error)?;
                    let candidate = if i == 0 { psi } else { psi.invert() };
                    if apply_perm(&g1, &candidate).map_err(graph_error)? != g2 {
                        return Err(ProtocolError::CheckFailed(
                            "composed map does not carry G1 onto G2".into(),
                        ));
                    }
                    GraphOtOutcome::Isomorphism(candidate)
                };
                self.state = ReceiverState::Finished(outcome);
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

/// One honest session; returns the result plus B's decoded outcome.
pub fn run_graph_ot(
    secret: OtSecretIsomorphism,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, GraphOtOutcome), SessionError> {
    let params = Writer::new()
        .graph(secret.g1())
        .graph(secret.g2())
        .finish();
    let mut sender = GraphOtSender::new(secret);
    let mut receiver = GraphOtReceiver::new();
    let result = run_session(
        GRAPH_OT_SPEC.id,
        params,
        &mut sender,
        &mut receiver,
        Role::A,
        seed_a,
        seed_b,
        transport,
    )?;
    let outcome = GraphOtOutcome::decode(&result.outcome_b.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    Ok((result, outcome))
}
