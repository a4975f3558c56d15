//! Mutual secret exchange over graph isomorphisms.
//!
//! Each party publishes a rigid graph pair whose connecting isomorphism is
//! its secret. Per round, each sends the other a disguised copy of one of
//! the other's graphs and answers the counterpart's challenge with an
//! isomorphism onto a randomly chosen graph of its own pair — the transfer
//! branch of the graph OT, run in both directions. A round delivers a
//! secret in each direction independently with probability 1/2, so after m
//! rounds the chance a direction is still open is 2^{−m}.

use rand::Rng;

use crate::graphs::{apply_perm, find_isomorphism, random_perm, Graph, GraphError, Permutation};
use crate::oblivious::OtSecretIsomorphism;
use crate::session::{
    run_session, Action, Message, PartyMachine, ProtocolError, ProtocolSpec, Role, SessionError,
    SessionResult, SessionRng, Transport,
};
use crate::wire::{expect_tag, require_message, Reader, Writer};

pub const SECRET_EXCHANGE_SPEC: ProtocolSpec = ProtocolSpec {
    id: "secret-exchange-graph",
    name: "mutual secret exchange over graph isomorphisms",
    stages: &["Challenge", "Counter-challenge", "Response", "Counter-response"],
    output_domain_a: "{isomorphism of B's pair, nothing}",
    output_domain_b: "{isomorphism of A's pair, nothing}",
    domains_published_first: true,
};

const TAG_CHALLENGE: u8 = 0x90;
const TAG_RESPONSE: u8 = 0x91;

fn graph_error(e: GraphError) -> ProtocolError {
    match e {
        GraphError::TooLarge(_) => {
            ProtocolError::CheckFailed("instance too large for the oracle".into())
        }
        other => ProtocolError::Malformed(other.to_string()),
    }
}

/// What one direction of the exchange produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExchangeOutcome {
    Obtained(Permutation),
    Nothing,
}

impl ExchangeOutcome {
    pub fn encode(&self) -> Vec<u8> {
        match self {
            ExchangeOutcome::Nothing => vec![0],
            ExchangeOutcome::Obtained(p) => Writer::new().byte(1).perm(p).finish(),
        }
    }

    pub fn decode(buf: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader::new(buf);
        match r.byte()? {
            0 => {
                r.done()?;
                Ok(ExchangeOutcome::Nothing)
            }
            1 => {
                let p = r.perm()?;
                r.done()?;
                Ok(ExchangeOutcome::Obtained(p))
            }
            _ => Err(ProtocolError::Malformed("unknown outcome marker".into())),
        }
    }
}

/// A pending challenge this party issued: which peer graph it disguised and
/// with what relabeling.
struct IssuedChallenge {
    source: bool,
    relabel: Permutation,
    copy: Graph,
}

enum PartyState {
    /// Initiator only: open a round.
    SendChallenge { round: u32 },
    /// Responder: wait for the initiator's challenge.
    AwaitChallenge { round: u32 },
    /// Initiator: wait for the responder's counter-challenge.
    AwaitCounterChallenge { round: u32, issued: IssuedChallenge },
    /// Responder: wait for the initiator's answer to our counter-challenge.
    AwaitResponse { round: u32, issued: IssuedChallenge, peer_copy: Graph },
    /// Initiator: wait for the responder's answer to our challenge.
    AwaitCounterResponse { round: u32, issued: IssuedChallenge },
    Finished,
}

/// One side of the exchange; `initiator` selects the message order.
pub struct SecretExchangeParty {
    own: OtSecretIsomorphism,
    peer: (Graph, Graph),
    m: u32,
    initiator: bool,
    obtained: Option<Permutation>,
    state: PartyState,
}

impl SecretExchangeParty {
    pub fn new(
        own: OtSecretIsomorphism,
        peer: (Graph, Graph),
        m: u32,
        initiator: bool,
    ) -> Self {
        let state = if initiator {
            PartyState::SendChallenge { round: 0 }
        } else {
            PartyState::AwaitChallenge { round: 0 }
        };
        SecretExchangeParty {
            own,
            peer,
            m,
            initiator,
            obtained: None,
            state,
        }
    }

    fn peer_graph(&self, i: bool) -> &Graph {
        if i {
            &self.peer.1
        } else {
            &self.peer.0
        }
    }

    fn own_graph(&self, i: bool) -> &Graph {
        if i {
            self.own.g2()
        } else {
            self.own.g1()
        }
    }

    /// Disguise a random one of the peer's graphs.
    fn issue_challenge(&self, rng: &mut SessionRng) -> Result<(IssuedChallenge, Message), ProtocolError> {
        let source = rng.gen_range(0..2u8) == 1;
        let relabel = random_perm(self.peer.0.n(), rng);
        let copy = apply_perm(self.peer_graph(source), &relabel).map_err(graph_error)?;
        let payload = Writer::new().graph(&copy).finish();
        Ok((
            IssuedChallenge {
                source,
                relabel,
                copy,
            },
            Message::new(TAG_CHALLENGE, payload),
        ))
    }

    /// Answer a challenge copy of one of our own graphs: point it at a
    /// randomly chosen graph of our pair via the isomorphism oracle.
    fn answer_challenge(&self, copy: &Graph, rng: &mut SessionRng) -> Result<Message, ProtocolError> {
        let target = rng.gen_range(0..2u8) == 1;
        let iso = find_isomorphism(copy, self.own_graph(target))
            .map_err(graph_error)?
            .ok_or_else(|| {
                ProtocolError::CheckFailed(
                    "challenge graph is not isomorphic to the published pair".into(),
                )
            })?;
        let payload = Writer::new().byte(target as u8).perm(&iso).finish();
        Ok(Message::new(TAG_RESPONSE, payload))
    }

    /// Verify the peer's answer to our issued challenge; compose the secret
    /// when the named graph differs from the disguised source.
    fn absorb_answer(&mut self, issued: &IssuedChallenge, msg: &Message) -> Result<(), ProtocolError> {
        let mut r = expect_tag(msg, TAG_RESPONSE)?;
        let named = r.byte()?;
        let iso = r.perm()?;
        r.done()?;
        if named > 1 {
            return Err(ProtocolError::Malformed("named graph is not a bit".into()));
        }
        let named = named == 1;
        let mapped = apply_perm(&issued.copy, &iso).map_err(graph_error)?;
        if mapped != *self.peer_graph(named) {
            return Err(ProtocolError::CheckFailed(
                "revealed map does not carry the challenge onto the named graph".into(),
            ));
        }
        if named == issued.source || self.obtained.is_some() {
            return Ok(());
        }
        // relabel: G_source -> copy, iso: copy -> G_named
        let through = iso.compose(&issued.relabel).map_err(graph_error)?;
        let candidate = if issued.source {
            through.invert()
        } else {
            through
        };
        if apply_perm(&self.peer.0, &candidate).map_err(graph_error)? != self.peer.1 {
            return Err(ProtocolError::CheckFailed(
                "composed map does not carry the first peer graph onto the second".into(),
            ));
        }
        self.obtained = Some(candidate);
        Ok(())
    }

    fn outcome(&self) -> ExchangeOutcome {
        match &self.obtained {
            Some(p) => ExchangeOutcome::Obtained(p.clone()),
            None => ExchangeOutcome::Nothing,
        }
    }
}

impl PartyMachine for SecretExchangeParty {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, PartyState::Finished) {
            PartyState::SendChallenge { round } => {
                if round >= self.m {
                    self.state = PartyState::Finished;
                    return Ok(Action::Finish);
                }
                let (issued, message) = self.issue_challenge(rng)?;
                self.state = PartyState::AwaitCounterChallenge { round, issued };
                Ok(Action::Send {
                    label: "Challenge",
                    message,
                })
            }
            PartyState::AwaitChallenge { round } => {
                if round >= self.m {
                    self.state = PartyState::Finished;
                    return Ok(Action::Finish);
                }
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_CHALLENGE)?;
                let peer_copy = r.graph()?;
                r.done()?;
                let (issued, message) = self.issue_challenge(rng)?;
                self.state = PartyState::AwaitResponse {
                    round,
                    issued,
                    peer_copy,
                };
                Ok(Action::Send {
                    label: "Counter-challenge",
                    message,
                })
            }
            PartyState::AwaitCounterChallenge { round, issued } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_CHALLENGE)?;
                let peer_copy = r.graph()?;
                r.done()?;
                let message = self.answer_challenge(&peer_copy, rng)?;
                self.state = PartyState::AwaitCounterResponse { round, issued };
                Ok(Action::Send {
                    label: "Response",
                    message,
                })
            }
            PartyState::AwaitResponse {
                round,
                issued,
                peer_copy,
            } => {
                let msg = require_message(incoming)?;
                self.absorb_answer(&issued, &msg)?;
                let message = self.answer_challenge(&peer_copy, rng)?;
                self.state = PartyState::AwaitChallenge { round: round + 1 };
                Ok(Action::Send {
                    label: "Counter-response",
                    message,
                })
            }
            PartyState::AwaitCounterResponse { round, issued } => {
                let msg = require_message(incoming)?;
                self.absorb_answer(&issued, &msg)?;
                self.state = PartyState::SendChallenge { round: round + 1 };
                self.advance(None, rng)
            }
            PartyState::Finished => Ok(Action::Finish),
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match self.state {
            PartyState::Finished => Some(self.outcome().encode()),
            _ => None,
        }
    }

    fn input_description(&self) -> Vec<u8> {
        Writer::new()
            .byte(self.initiator as u8)
            .perm(self.own.iso())
            .finish()
    }
}

/// One honest exchange; returns both decoded outcomes (A's haul of B's
/// secret, then B's haul of A's).
pub fn run_secret_exchange(
    a_secret: OtSecretIsomorphism,
    b_secret: OtSecretIsomorphism,
    m: u32,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, ExchangeOutcome, ExchangeOutcome), SessionError> {
    let params = Writer::new()
        .graph(a_secret.g1())
        .graph(a_secret.g2())
        .graph(b_secret.g1())
        .graph(b_secret.g2())
        .byte(m as u8)
        .finish();
    let mut a = SecretExchangeParty::new(
        a_secret.clone(),
        (b_secret.g1().clone(), b_secret.g2().clone()),
        m,
        true,
    );
    let mut b = SecretExchangeParty::new(
        b_secret,
        (a_secret.g1().clone(), a_secret.g2().clone()),
        m,
        false,
    );
    let result = run_session(
        SECRET_EXCHANGE_SPEC.id,
        params,
        &mut a,
        &mut b,
        Role::A,
        seed_a,
        seed_b,
        transport,
    )?;
    let got_a = ExchangeOutcome::decode(&result.outcome_a.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    let got_b = ExchangeOutcome::decode(&result.outcome_b.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    Ok((result, got_a, got_b))
}
