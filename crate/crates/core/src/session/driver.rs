//! The two-party session driver: strict alternation, transcript recording,
//! per-party views, deadlock and abort detection.

use rand::SeedableRng;
use sha2::{Digest, Sha256};

use super::message::{decode_message, encode_message, Message};
use super::transport::Transport;
use super::{
    Action, Direction, PartyMachine, ProtocolError, Role, SessionError, SessionRng, Transcript,
    TranscriptEntry,
};

const STEP_BUDGET: usize = 100_000;

/// Everything one party saw: its role, seed, input description, and the
/// exact sequence of `advance` arguments the driver fed it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalView {
    pub role: Role,
    pub seed: u64,
    pub input: Vec<u8>,
    pub steps: Vec<Option<Message>>,
}

impl LocalView {
    /// Canonical serialization for distribution tallies and leak tests.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.push(match self.role {
            Role::A => 0,
            Role::B => 1,
        });
        out.extend_from_slice(&self.seed.to_be_bytes());
        out.extend_from_slice(&(self.input.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.input);
        for s in &self.steps {
            match s {
                None => out.push(0),
                Some(m) => {
                    out.push(1);
                    out.extend_from_slice(&encode_message(m));
                }
            }
        }
        out
    }
}

/// A party's private output together with its local view. The view must be
/// sufficient to recompute the output; see [`replay_view`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyOutcome {
    pub output: Vec<u8>,
    pub view: LocalView,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionResult {
    pub outcome_a: PartyOutcome,
    pub outcome_b: PartyOutcome,
    pub transcript: Transcript,
}

fn session_id(protocol: &str, params: &[u8], seed_a: u64, seed_b: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(protocol.as_bytes());
    h.update(params);
    h.update(seed_a.to_be_bytes());
    h.update(seed_b.to_be_bytes());
    let d = h.finalize();
    u64::from_be_bytes(d[..8].try_into().expect("digest is long enough"))
}

/// Drive both machines to completion, alternating strictly. Deterministic
/// given seeds. Every sent frame travels through `transport` and is decoded
/// back, so transport and in-memory views cannot diverge.
#[allow(clippy::too_many_arguments)]
pub fn run_session<'m>(
    protocol: &str,
    params: Vec<u8>,
    machine_a: &'m mut dyn PartyMachine,
    machine_b: &'m mut dyn PartyMachine,
    starter: Role,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<SessionResult, SessionError> {
    let mut rng_a = SessionRng::seed_from_u64(seed_a);
    let mut rng_b = SessionRng::seed_from_u64(seed_b);
    let mut view_a = LocalView {
        role: Role::A,
        seed: seed_a,
        input: machine_a.input_description(),
        steps: Vec::new(),
    };
    let mut view_b = LocalView {
        role: Role::B,
        seed: seed_b,
        input: machine_b.input_description(),
        steps: Vec::new(),
    };
    let mut transcript = Transcript {
        session_id: session_id(protocol, &params, seed_a, seed_b),
        protocol: protocol.to_string(),
        params,
        entries: Vec::new(),
    };
    let mut done_a = false;
    let mut done_b = false;
    let mut turn = starter;
    let mut pending: Option<Message> = None;
    let mut steps = 0usize;

    while !(done_a && done_b) {
        steps += 1;
        if steps > STEP_BUDGET {
            return Err(SessionError::StepBudget);
        }
        let done_now = match turn {
            Role::A => done_a,
            Role::B => done_b,
        };
        if done_now {
            if pending.is_some() {
                return Err(SessionError::MessageToFinished(turn));
            }
            turn = turn.other();
            continue;
        }
        let incoming = pending.take();
        let (machine, rng, view) = match turn {
            Role::A => (&mut *machine_a, &mut rng_a, &mut view_a),
            Role::B => (&mut *machine_b, &mut rng_b, &mut view_b),
        };
        view.steps.push(incoming.clone());
        match machine.advance(incoming, rng) {
            Err(ProtocolError::NeedInput) => {
                return Err(SessionError::Deadlock { step: steps });
            }
            Err(e) => {
                return Err(SessionError::Abort {
                    role: turn,
                    step: transcript.entries.len(),
                    reason: e.to_string(),
                });
            }
            Ok(Action::Send { label, message }) => {
                let frame = encode_message(&message);
                transport.send_frame(&frame)?;
                let rx = transport.recv_frame()?;
                let delivered = decode_message(&rx)?;
                transcript.entries.push(TranscriptEntry {
                    direction: Direction::from_sender(turn),
                    label: label.to_string(),
                    message: delivered.clone(),
                });
                pending = Some(delivered);
                turn = turn.other();
            }
            Ok(Action::Finish) => {
                match turn {
                    Role::A => done_a = true,
                    Role::B => done_b = true,
                }
                if machine.output().is_none() {
                    return Err(SessionError::Abort {
                        role: turn,
                        step: transcript.entries.len(),
                        reason: "machine finished without an output".into(),
                    });
                }
                turn = turn.other();
            }
        }
    }

    let output_a = machine_a.output().expect("A finished");
    let output_b = machine_b.output().expect("B finished");
    Ok(SessionResult {
        outcome_a: PartyOutcome {
            output: output_a,
            view: view_a,
        },
        outcome_b: PartyOutcome {
            output: output_b,
            view: view_b,
        },
        transcript,
    })
}

/// Re-run a fresh machine against a recorded view. If views are sufficient
/// (the testable core of the privacy clause), the returned output equals the
/// one from the live session.
pub fn replay_view(
    machine: &mut dyn PartyMachine,
    view: &LocalView,
) -> Result<Vec<u8>, ProtocolError> {
    let mut rng = SessionRng::seed_from_u64(view.seed);
    for step in &view.steps {
        machine.advance(step.clone(), &mut rng)?;
        if let Some(out) = machine.output() {
            return Ok(out);
        }
    }
    machine.output().ok_or(ProtocolError::NeedInput)
}

/// Malicious-party wrapper: runs an honest machine but substitutes outgoing
/// messages at chosen steps. The tamper closure sees the zero-based index of
/// the outgoing message and the honest message, and returns what actually
/// goes on the wire.
pub struct Scripted<M> {
    inner: M,
    tamper: Box<dyn FnMut(usize, Message) -> Message + Send>,
    sent: usize,
}

impl<M: PartyMachine> Scripted<M> {
    pub fn new(
        inner: M,
        tamper: impl FnMut(usize, Message) -> Message + Send + 'static,
    ) -> Self {
        Scripted {
            inner,
            tamper: Box::new(tamper),
            sent: 0,
        }
    }
}

impl<M: PartyMachine> PartyMachine for Scripted<M> {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match self.inner.advance(incoming, rng)? {
            Action::Send { label, message } => {
                let message = (self.tamper)(self.sent, message);
                self.sent += 1;
                Ok(Action::Send { label, message })
            }
            other => Ok(other),
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        self.inner.output()
    }

    fn input_description(&self) -> Vec<u8> {
        self.inner.input_description()
    }
}
