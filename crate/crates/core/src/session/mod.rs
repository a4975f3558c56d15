//! Protocol execution framework: wire format, transports, the two-party
//! session driver, transcript recording, and the security-property test
//! predicates.
//!
//! A session pairs two [`PartyMachine`]s over a [`Transport`]. Each machine
//! only ever sees its own seeded randomness stream and the messages delivered
//! to it; the driver enforces strict alternation and records everything.

mod driver;
mod log;
mod message;
mod predicates;
mod transport;

pub use driver::{
    replay_view, run_session, LocalView, PartyOutcome, SessionResult, Scripted,
};
pub use log::{parse_log, write_log, LogError};
pub use message::{decode_message, encode_message, FramingError, Message, MAX_PAYLOAD};
pub use predicates::{check_correctness, check_fairness, transcript_distribution, ProtocolSpec};
pub use transport::{InProcTransport, LoopbackTransport, Transport};

use thiserror::Error;

/// Deterministic per-party randomness stream.
pub type SessionRng = rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    A,
    B,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::A => Role::B,
            Role::B => Role::A,
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Role::A => write!(f, "A"),
            Role::B => write!(f, "B"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    AToB,
    BToA,
}

impl Direction {
    pub fn from_sender(r: Role) -> Direction {
        match r {
            Role::A => Direction::AToB,
            Role::B => Direction::BToA,
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::AToB => write!(f, "A->B"),
            Direction::BToA => write!(f, "B->A"),
        }
    }
}

/// One recorded message of a session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub direction: Direction,
    pub label: String,
    pub message: Message,
}

/// Append-only ordered record of a session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub session_id: u64,
    pub protocol: String,
    /// Public parameter blob agreed before the session; carried in the log
    /// header so offline verification can replay the checks.
    pub params: Vec<u8>,
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    /// Canonical byte serialization, used for determinism comparisons and
    /// distribution tallies.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.session_id.to_be_bytes());
        for e in &self.entries {
            out.push(match e.direction {
                Direction::AToB => 0,
                Direction::BToA => 1,
            });
            out.extend_from_slice(&(e.label.len() as u16).to_be_bytes());
            out.extend_from_slice(e.label.as_bytes());
            out.extend_from_slice(&encode_message(&e.message));
        }
        out
    }
}

/// Error raised inside a party state machine.
#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ProtocolError {
    /// The machine expected a message but was advanced without one.
    #[error("machine needs input")]
    NeedInput,
    /// Incoming message could not be decoded for this step.
    #[error("malformed message: {0}")]
    Malformed(String),
    /// A protocol verification step failed; the session must abort.
    #[error("verification failed: {0}")]
    CheckFailed(String),
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum SessionError {
    #[error("framing error: {0}")]
    Framing(#[from] FramingError),
    #[error("party {role} aborted at step {step}: {reason}")]
    Abort {
        role: Role,
        step: usize,
        reason: String,
    },
    #[error("deadlock detected at step {step}: both parties waiting")]
    Deadlock { step: usize },
    #[error("message delivered to finished party {0}")]
    MessageToFinished(Role),
    #[error("session exceeded the step budget")]
    StepBudget,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("not enough trials: {0} (minimum 1000)")]
    TooFewTrials(u64),
}

/// What a machine wants to do after consuming its input.
#[derive(Debug, Clone)]
pub enum Action {
    Send {
        label: &'static str,
        message: Message,
    },
    Finish,
}

/// One party of a two-party protocol, driven message by message.
///
/// Machines must be deterministic given their construction inputs, their
/// randomness stream, and the incoming messages; this is what makes
/// transcripts reproducible and local views sufficient.
pub trait PartyMachine {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError>;

    /// The private output, available once the machine has finished.
    fn output(&self) -> Option<Vec<u8>>;

    /// Byte description of the machine's private input, recorded in its view.
    fn input_description(&self) -> Vec<u8> {
        Vec::new()
    }
}
