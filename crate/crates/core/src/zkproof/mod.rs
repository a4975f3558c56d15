//! Interactive zero-knowledge proofs with their transcript simulators.
//!
//! Two concrete protocols share the Commitment/Challenge/Response/
//! Verification round interface: the quadratic-residue identification
//! protocol (prove knowledge of a square root) and the graph protocol
//! (prove knowledge of a planted Hamiltonian cycle). Each ships an honest
//! prover, a cheating prover without the secret, and an expected-polynomial
//! time simulator whose accepted transcripts are measured against honest
//! ones. A cut-and-choose proof of quadratic non-residuosity rounds out the
//! module so the QR commitment can be opened without burning the modulus.

mod graph;
mod nonresidue;
mod qrp;

pub use graph::{
    graph_zkp_simulate, run_graph_zkp, run_graph_zkp_cheat, GraphCheatProver, GraphProver,
    GraphSimRound, GraphVerifier, GRAPH_ZKP_SPEC,
};
pub use nonresidue::{
    run_nonresidue_proof, NonResidueProver, NonResidueVerifier, NONRESIDUE_SPEC,
};
pub use qrp::{
    extract_root, qrp_zkp_simulate, run_qrp_zkp, run_qrp_zkp_cheat, QrpCheatProver, QrpIdentity,
    QrpProver, QrpSimRound, QrpVerifier, QRP_ZKP_SPEC,
};

use crate::wire::{Reader, Writer};

/// Outcome of an interactive proof, shared by both parties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZkVerdict {
    pub accepted: bool,
    pub rounds: u32,
    pub failure_round: Option<u32>,
}

impl ZkVerdict {
    pub fn accept(rounds: u32) -> Self {
        ZkVerdict {
            accepted: true,
            rounds,
            failure_round: None,
        }
    }

    pub fn reject(rounds: u32, failed_at: u32) -> Self {
        ZkVerdict {
            accepted: false,
            rounds,
            failure_round: Some(failed_at),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new().byte(self.accepted as u8).byte(self.rounds as u8);
        w = match self.failure_round {
            None => w.byte(0xff),
            Some(r) => w.byte(r as u8),
        };
        w.finish()
    }

    pub fn decode(buf: &[u8]) -> Result<Self, crate::session::ProtocolError> {
        let mut r = Reader::new(buf);
        let accepted = r.byte()? == 1;
        let rounds = r.byte()? as u32;
        let failure = r.byte()?;
        r.done()?;
        Ok(ZkVerdict {
            accepted,
            rounds,
            failure_round: if failure == 0xff { None } else { Some(failure as u32) },
        })
    }
}

/// Default rewind budget per simulated round.
pub const SIM_RETRY_BUDGET: u32 = 128;
