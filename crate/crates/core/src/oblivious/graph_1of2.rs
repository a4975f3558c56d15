//! Graph-based one-of-two transfer.
//!
//! A holds Hamiltonian-cycle witnesses for two public isomorphic graphs. B
//! sends fresh uniformly relabeled copies of both, in random positional
//! order, plus a pointer to the position holding the copy of his chosen
//! graph. A solves the pointed copy (via her witness and the brute-force
//! relabeling oracle) and returns the solution; B maps it back through his
//! private relabeling and verifies it in the original graph. Since both
//! public graphs are isomorphic copies of each other, the pointed copy A
//! sees is a uniform member of the same isomorphism class either way.

use rand::Rng;

use crate::graphs::{
    apply_perm, find_isomorphism, random_perm, Graph, GraphError, Permutation, PlantedSolution,
};
use crate::session::{
    run_session, Action, Message, PartyMachine, ProtocolError, ProtocolSpec, Role, SessionError,
    SessionResult, SessionRng, Transport,
};
use crate::wire::{expect_tag, require_message, Reader, Writer};

pub const GRAPH_1OF2_SPEC: ProtocolSpec = ProtocolSpec {
    id: "graph-1of2-ot",
    name: "graph-based one-of-two transfer",
    stages: &["Challenge", "Response"],
    output_domain_a: "{}",
    output_domain_b: "{solution in the chosen graph}",
    domains_published_first: true,
};

const TAG_COPIES: u8 = 0x40;
const TAG_SOLUTION: u8 = 0x41;

fn graph_error(e: GraphError) -> ProtocolError {
    match e {
        GraphError::TooLarge(n) => {
            ProtocolError::CheckFailed(format!("instance too large for the oracle: {n} vertices"))
        }
        other => ProtocolError::Malformed(other.to_string()),
    }
}

/// The sender's input: planted solutions in two public isomorphic graphs.
/// The second graph is a relabeled copy of the first, so the pair shares
/// every polynomially testable property exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedPair {
    pub first: PlantedSolution,
    pub second: PlantedSolution,
}

impl PlantedPair {
    pub fn generate<R: rand::RngCore>(n: usize, noise_edges: usize, rng: &mut R) -> Self {
        let first = crate::graphs::gen_hamiltonian_graph(n, noise_edges, rng);
        let tau = random_perm(n, rng);
        let second = first.permute(&tau).expect("same vertex count");
        PlantedPair { first, second }
    }

    pub fn graphs(&self) -> (Graph, Graph) {
        (self.first.graph.clone(), self.second.graph.clone())
    }

    pub fn get(&self, i: bool) -> &PlantedSolution {
        if i {
            &self.second
        } else {
            &self.first
        }
    }
}

/// Solve a uniformly relabeled copy of one of the source graphs: find which
/// original it matches and carry that witness through the relabeling.
pub(crate) fn solve_pointed(
    sources: &[PlantedSolution],
    copy: &Graph,
) -> Result<Vec<usize>, ProtocolError> {
    for source in sources {
        if let Some(phi) = find_isomorphism(&source.graph, copy).map_err(graph_error)? {
            let witness: Vec<usize> = source.witness.iter().map(|&v| phi.apply(v)).collect();
            PlantedSolution::validate(copy, &witness).map_err(graph_error)?;
            return Ok(witness);
        }
    }
    Err(ProtocolError::CheckFailed(
        "pointed copy matches no published graph".into(),
    ))
}

enum SenderState {
    Start,
    Finished,
}

/// Party A: answers the pointer with a solution in the pointed copy.
pub struct Graph1of2Sender {
    pair: PlantedPair,
    state: SenderState,
}

impl Graph1of2Sender {
    pub fn new(pair: PlantedPair) -> Self {
        Graph1of2Sender {
            pair,
            state: SenderState::Start,
        }
    }
}

impl PartyMachine for Graph1of2Sender {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        _rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match self.state {
            SenderState::Start => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_COPIES)?;
                let pointer = r.byte()?;
                let copies = [r.graph()?, r.graph()?];
                r.done()?;
                if pointer > 1 {
                    return Err(ProtocolError::Malformed("pointer out of range".into()));
                }
                let sources = [self.pair.first.clone(), self.pair.second.clone()];
                let witness = solve_pointed(&sources, &copies[pointer as usize])?;
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

    fn input_description(&self) -> Vec<u8> {
        Writer::new()
            .witness(&self.pair.first.witness)
            .witness(&self.pair.second.witness)
            .finish()
    }
}

/// B's private output: which graph he chose and a valid witness in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph1of2Outcome {
    pub choice: bool,
    pub witness: Vec<usize>,
}

impl Graph1of2Outcome {
    pub fn encode(&self) -> Vec<u8> {
        Writer::new()
            .byte(self.choice as u8)
            .witness(&self.witness)
            .finish()
    }

    pub fn decode(buf: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader::new(buf);
        let choice = r.byte()? == 1;
        let witness = r.witness()?;
        r.done()?;
        Ok(Graph1of2Outcome { choice, witness })
    }
}

enum ReceiverState {
    Start,
    AwaitSolution { rho: Permutation },
    Finished(Graph1of2Outcome),
}

/// Party B: relabels both graphs, shuffles their order, points at his choice.
pub struct Graph1of2Receiver {
    graphs: (Graph, Graph),
    choice: bool,
    state: ReceiverState,
}

impl Graph1of2Receiver {
    pub fn new(graphs: (Graph, Graph), choice: bool) -> Self {
        Graph1of2Receiver {
            graphs,
            choice,
            state: ReceiverState::Start,
        }
    }
}

impl PartyMachine for Graph1of2Receiver {
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
                let n = self.graphs.0.n();
                let rho0 = random_perm(n, rng);
                let rho1 = random_perm(n, rng);
                let copy0 = apply_perm(&self.graphs.0, &rho0).map_err(graph_error)?;
                let copy1 = apply_perm(&self.graphs.1, &rho1).map_err(graph_error)?;
                // random positional order hides which copy came from which graph
                let swap: bool = rng.gen();
                let (slots, pointer) = if swap {
                    ([copy1, copy0], !self.choice as u8)
                } else {
                    ([copy0, copy1], self.choice as u8)
                };
                let rho = if self.choice { rho1 } else { rho0 };
                let payload = Writer::new()
                    .byte(pointer)
                    .graph(&slots[0])
                    .graph(&slots[1])
                    .finish();
                self.state = ReceiverState::AwaitSolution { rho };
                Ok(Action::Send {
                    label: "Challenge",
                    message: Message::new(TAG_COPIES, payload),
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
                let original = if self.choice {
                    &self.graphs.1
                } else {
                    &self.graphs.0
                };
                PlantedSolution::validate(original, &witness).map_err(|_| {
                    ProtocolError::CheckFailed(
                        "returned solution is invalid in the chosen graph".into(),
                    )
                })?;
                self.state = ReceiverState::Finished(Graph1of2Outcome {
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
pub fn run_graph_1of2(
    pair: PlantedPair,
    choice: bool,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, Graph1of2Outcome), SessionError> {
    let (g, h) = pair.graphs();
    let params = Writer::new().graph(&g).graph(&h).finish();
    let mut sender = Graph1of2Sender::new(pair);
    let mut receiver = Graph1of2Receiver::new((g, h), choice);
    let result = run_session(
        GRAPH_1OF2_SPEC.id,
        params,
        &mut sender,
        &mut receiver,
        Role::B,
        seed_a,
        seed_b,
        transport,
    )?;
    let outcome = Graph1of2Outcome::decode(&result.outcome_b.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    Ok((result, outcome))
}
