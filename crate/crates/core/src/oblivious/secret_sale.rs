//! Secret sale: the one-of-two graph transfer generalized to n graphs.
//!
//! A holds solutions for n public isomorphic graphs. B sends fresh relabeled
//! copies of all of them in shuffled positional order plus a pointer to the
//! position holding his chosen graph's copy; A solves that copy and returns
//! the solution; B maps it back and verifies. B learns exactly one solution,
//! A cannot tell which.

use rand::RngCore;

use crate::graphs::{apply_perm, random_perm, Graph, GraphError, Permutation, PlantedSolution};
use crate::session::{
    run_session, Action, Message, PartyMachine, ProtocolError, ProtocolSpec, Role, SessionError,
    SessionResult, SessionRng, Transport,
};
use crate::wire::{expect_tag, require_message, Reader, Writer};

use super::graph_1of2::solve_pointed;

pub const SECRET_SALE_SPEC: ProtocolSpec = ProtocolSpec {
    id: "secret-sale",
    name: "secret sale of one of n solutions",
    stages: &["Challenge", "Response"],
    output_domain_a: "{}",
    output_domain_b: "{solution in the chosen graph}",
    domains_published_first: true,
};

const TAG_COPIES: u8 = 0x48;
const TAG_SOLUTION: u8 = 0x49;

fn graph_error(e: GraphError) -> ProtocolError {
    match e {
        GraphError::TooLarge(n) => {
            ProtocolError::CheckFailed(format!("instance too large for the oracle: {n} vertices"))
        }
        other => ProtocolError::Malformed(other.to_string()),
    }
}

/// Generate n planted solutions over one isomorphism class: a base planted
/// graph and n - 1 fresh relabelings of it.
pub fn generate_stock<R: RngCore>(
    count: usize,
    n: usize,
    noise_edges: usize,
    rng: &mut R,
) -> Vec<PlantedSolution> {
    assert!(count >= 2);
    let base = crate::graphs::gen_hamiltonian_graph(n, noise_edges, rng);
    let mut stock = vec![base.clone()];
    for _ in 1..count {
        let tau = random_perm(n, rng);
        stock.push(base.permute(&tau).expect("same vertex count"));
    }
    stock
}

enum SenderState {
    Start,
    Finished,
}

/// Party A: the seller; answers the pointed copy with its solution.
pub struct SecretSaleSender {
    stock: Vec<PlantedSolution>,
    state: SenderState,
}

impl SecretSaleSender {
    pub fn new(stock: Vec<PlantedSolution>) -> Self {
        assert!(stock.len() >= 2);
        SecretSaleSender {
            stock,
            state: SenderState::Start,
        }
    }
}

impl PartyMachine for SecretSaleSender {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        _rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match self.state {
            SenderState::Start => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_COPIES)?;
                let count = r.byte()? as usize;
                let pointer = r.byte()? as usize;
                if count != self.stock.len() {
                    return Err(ProtocolError::Malformed("copy count mismatch".into()));
                }
                if pointer >= count {
                    return Err(ProtocolError::Malformed("pointer out of range".into()));
                }
                let mut copies = Vec::with_capacity(count);
                for _ in 0..count {
                    copies.push(r.graph()?);
                }
                r.done()?;
                let witness = solve_pointed(&self.stock, &copies[pointer])?;
                self.state = SenderState::Finished;
                Ok(Action::Send {
                    label: "Response",
                    message: Message::new(TAG_SOLUTION, Writer::new().witness(&witness).finish()),
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
}

/// B's private output: the chosen index and a valid witness in that graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretSaleOutcome {
    pub choice: usize,
    pub witness: Vec<usize>,
}

impl SecretSaleOutcome {
    pub fn encode(&self) -> Vec<u8> {
        Writer::new()
            .byte(self.choice as u8)
            .witness(&self.witness)
            .finish()
    }

    pub fn decode(buf: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader::new(buf);
        let choice = r.byte()? as usize;
        let witness = r.witness()?;
        r.done()?;
        Ok(SecretSaleOutcome { choice, witness })
    }
}

enum ReceiverState {
    Start,
    AwaitSolution { rho: Permutation },
    Finished(SecretSaleOutcome),
}

/// Party B: the buyer; shuffles relabeled copies and points at his choice.
pub struct SecretSaleReceiver {
    graphs: Vec<Graph>,
    choice: usize,
    state: ReceiverState,
}

impl SecretSaleReceiver {
    pub fn new(graphs: Vec<Graph>, choice: usize) -> Self {
        assert!(choice < graphs.len());
        SecretSaleReceiver {
            graphs,
            choice,
            state: ReceiverState::Start,
        }
    }
}

impl PartyMachine for SecretSaleReceiver {
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
                let count = self.graphs.len();
                let n = self.graphs[0].n();
                let relabelings: Vec<Permutation> =
                    (0..count).map(|_| random_perm(n, rng)).collect();
                // shuffle: original i goes to position tau(i)
                let tau = random_perm(count, rng);
                let mut slots: Vec<Option<Graph>> = vec![None; count];
                for (i, g) in self.graphs.iter().enumerate() {
                    slots[tau.apply(i)] =
                        Some(apply_perm(g, &relabelings[i]).map_err(graph_error)?);
                }
                let pointer = tau.apply(self.choice) as u8;
                let mut w = Writer::new().byte(count as u8).byte(pointer);
                for slot in &slots {
                    w = w.graph(slot.as_ref().expect("every slot filled"));
                }
                let rho = relabelings[self.choice].clone();
                self.state = ReceiverState::AwaitSolution { rho };
                Ok(Action::Send {
                    label: "Challenge",
                    message: Message::new(TAG_COPIES, w.finish()),
                })
            }
            ReceiverState::AwaitSolution { rho } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_SOLUTION)?;
                let copy_witness = r.witness()?;
                r.done()?;
                let back = rho.invert();
                if copy_witness.iter().any(|&v| v >= back.n()) {
                    return Err(ProtocolError::Malformed("witness vertex out of range".into()));
                }
                let witness: Vec<usize> =
                    copy_witness.iter().map(|&v| back.apply(v)).collect();
                PlantedSolution::validate(&self.graphs[self.choice], &witness).map_err(|_| {
                    ProtocolError::CheckFailed(
                        "returned solution is invalid in the chosen graph".into(),
                    )
                })?;
                self.state = ReceiverState::Finished(SecretSaleOutcome {
                    choice: self.choice,
                    witness,
                });
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

    fn input_description(&self) -> Vec<u8> {
        vec![self.choice as u8]
    }
}

/// One honest session; returns the result plus B's decoded outcome.
pub fn run_secret_sale(
    stock: Vec<PlantedSolution>,
    choice: usize,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, SecretSaleOutcome), SessionError> {
    let graphs: Vec<Graph> = stock.iter().map(|s| s.graph.clone()).collect();
    let mut params = Writer::new().byte(graphs.len() as u8);
    for g in &graphs {
        params = params.graph(g);
    }
    let mut sender = SecretSaleSender::new(stock);
    let mut receiver = SecretSaleReceiver::new(graphs, choice);
    let result = run_session(
        SECRET_SALE_SPEC.id,
        params.finish(),
        &mut sender,
        &mut receiver,
        Role::B,
        seed_a,
        seed_b,
        transport,
    )?;
    let outcome = SecretSaleOutcome::decode(&result.outcome_b.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    Ok((result, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::InProcTransport;
    use rand::SeedableRng;

    fn stock(count: usize, n: usize, seed: u64) -> Vec<PlantedSolution> {
        let mut rng = SessionRng::seed_from_u64(seed);
        generate_stock(count, n, 0, &mut rng)
    }

    #[test]
    fn buyer_gets_exactly_the_chosen_solution() {
        let stock = stock(3, 7, 1);
        for i in 0..100u64 {
            let choice = (i % 3) as usize;
            let mut t = InProcTransport::new();
            let (_, outcome) =
                run_secret_sale(stock.clone(), choice, 2 * i, 2 * i + 1, &mut t).unwrap();
            assert_eq!(outcome.choice, choice);
            PlantedSolution::validate(&stock[choice].graph, &outcome.witness).unwrap();
            for (idx, other) in stock.iter().enumerate() {
                if idx != choice {
                    assert!(
                        PlantedSolution::validate(&other.graph, &outcome.witness).is_err(),
                        "witness valid in non-chosen graph {idx}"
                    );
                }
            }
        }
    }

    /// With two graphs the message shape degenerates to the one-of-two
    /// transfer: one pointer, two copies, one returned witness.
    #[test]
    fn two_graph_sale_has_the_1of2_shape() {
        let stock = stock(2, 6, 2);
        let mut t = InProcTransport::new();
        let (result, _) = run_secret_sale(stock, 1, 5, 6, &mut t).unwrap();
        assert_eq!(result.transcript.entries.len(), 2);
        let mut r = Reader::new(&result.transcript.entries[0].message.payload);
        assert_eq!(r.byte().unwrap(), 2); // count
        let pointer = r.byte().unwrap();
        assert!(pointer < 2);
        r.graph().unwrap();
        r.graph().unwrap();
        r.done().unwrap();
        let mut r = Reader::new(&result.transcript.entries[1].message.payload);
        r.witness().unwrap();
        r.done().unwrap();
    }
}
