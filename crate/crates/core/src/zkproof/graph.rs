//! The graph zero-knowledge proof: knowledge of a planted Hamiltonian cycle.
//!
//! A publishes a graph G and proves she knows a Hamiltonian cycle in it.
//! Each round she commits an isomorphic copy G' under a fresh relabeling;
//! B challenges either for the relabeling (0) or for the cycle inside G' (1).
//! Either answer alone reveals nothing about the cycle in G.

use rand::Rng;

use crate::graphs::{apply_perm, gen_hamiltonian_graph, random_perm, Graph, Permutation,
    PlantedSolution};
use crate::session::{
    run_session, Action, Message, PartyMachine, ProtocolError, ProtocolSpec, Role, SessionError,
    SessionResult, SessionRng, Transport,
};
use crate::wire::{expect_tag, require_message, Writer};

use super::qrp::{decode_round, decode_verdict, VERDICT_ACCEPT, VERDICT_CONTINUE, VERDICT_REJECT};
use super::{ZkVerdict, SIM_RETRY_BUDGET};

pub const GRAPH_ZKP_SPEC: ProtocolSpec = ProtocolSpec {
    id: "zkp-graph",
    name: "Hamiltonian-cycle zero-knowledge proof",
    stages: &["Commitment", "Challenge", "Response", "Verification"],
    output_domain_a: "{accept, reject}",
    output_domain_b: "{accept, reject}",
    domains_published_first: true,
};

const TAG_COMMIT: u8 = 0x68;
const TAG_CHALLENGE: u8 = 0x69;
const TAG_RESPONSE: u8 = 0x6a;
const TAG_VERDICT: u8 = 0x6b;

enum ProverState {
    SendCommit { round: u32 },
    AwaitChallenge { round: u32, perm: Permutation },
    AwaitVerdict { round: u32 },
    Finished(ZkVerdict),
}

/// Party A holding the planted cycle.
pub struct GraphProver {
    planted: PlantedSolution,
    m: u32,
    state: ProverState,
}

impl GraphProver {
    pub fn new(planted: PlantedSolution, m: u32) -> Self {
        assert!(m >= 1);
        GraphProver {
            planted,
            m,
            state: ProverState::SendCommit { round: 0 },
        }
    }

    fn commit(&mut self, round: u32, rng: &mut SessionRng) -> Result<Action, ProtocolError> {
        let perm = random_perm(self.planted.graph.n(), rng);
        let copy = apply_perm(&self.planted.graph, &perm)
            .map_err(|e| ProtocolError::Malformed(e.to_string()))?;
        let payload = Writer::new().byte(round as u8).graph(&copy).finish();
        self.state = ProverState::AwaitChallenge { round, perm };
        Ok(Action::Send {
            label: "Commitment",
            message: Message::new(TAG_COMMIT, payload),
        })
    }
}

impl PartyMachine for GraphProver {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, ProverState::SendCommit { round: 0 }) {
            ProverState::SendCommit { round } => self.commit(round, rng),
            ProverState::AwaitChallenge { round, perm } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_CHALLENGE)?;
                decode_round(r.byte()?, round)?;
                let challenge = r.byte()?;
                r.done()?;
                let mut w = Writer::new().byte(round as u8).byte(challenge);
                w = match challenge {
                    0 => w.perm(&perm),
                    1 => {
                        let mapped: Vec<usize> =
                            self.planted.witness.iter().map(|&v| perm.apply(v)).collect();
                        w.witness(&mapped)
                    }
                    _ => return Err(ProtocolError::Malformed("challenge is not a bit".into())),
                };
                self.state = ProverState::AwaitVerdict { round };
                Ok(Action::Send {
                    label: "Response",
                    message: Message::new(TAG_RESPONSE, w.finish()),
                })
            }
            ProverState::AwaitVerdict { round } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_VERDICT)?;
                decode_round(r.byte()?, round)?;
                let code = r.byte()?;
                r.done()?;
                match decode_verdict(code, round, self.m)? {
                    Some(verdict) => {
                        self.state = ProverState::Finished(verdict);
                        Ok(Action::Finish)
                    }
                    None => self.commit(round + 1, rng),
                }
            }
            ProverState::Finished(v) => {
                self.state = ProverState::Finished(v);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            ProverState::Finished(v) => Some(v.encode()),
            _ => None,
        }
    }

    fn input_description(&self) -> Vec<u8> {
        Writer::new().witness(&self.planted.witness).finish()
    }
}

enum VerifierState {
    AwaitCommit { round: u32 },
    AwaitResponse { round: u32, copy: Graph, challenge: u8 },
    Finished(ZkVerdict),
}

/// Party B checking the proof for the public graph G.
pub struct GraphVerifier {
    g: Graph,
    m: u32,
    state: VerifierState,
}

impl GraphVerifier {
    pub fn new(g: Graph, m: u32) -> Self {
        assert!(m >= 1);
        GraphVerifier {
            g,
            m,
            state: VerifierState::AwaitCommit { round: 0 },
        }
    }

    fn response_checks(&self, copy: &Graph, challenge: u8, r: &mut crate::wire::Reader)
        -> Result<bool, ProtocolError>
    {
        match challenge {
            0 => {
                let perm = r.perm()?;
                if perm.n() != self.g.n() {
                    return Ok(false);
                }
                let rebuilt = apply_perm(&self.g, &perm)
                    .map_err(|e| ProtocolError::Malformed(e.to_string()))?;
                Ok(rebuilt == *copy)
            }
            1 => {
                let witness = r.witness()?;
                Ok(PlantedSolution::validate(copy, &witness).is_ok())
            }
            _ => unreachable!("verifier only issues bit challenges"),
        }
    }
}

impl PartyMachine for GraphVerifier {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, VerifierState::AwaitCommit { round: 0 }) {
            VerifierState::AwaitCommit { round } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_COMMIT)?;
                decode_round(r.byte()?, round)?;
                let copy = r.graph()?;
                r.done()?;
                if copy.n() != self.g.n() {
                    return Err(ProtocolError::Malformed(
                        "committed copy has the wrong vertex count".into(),
                    ));
                }
                let challenge: u8 = rng.gen_range(0..2);
                let payload = Writer::new().byte(round as u8).byte(challenge).finish();
                self.state = VerifierState::AwaitResponse { round, copy, challenge };
                Ok(Action::Send {
                    label: "Challenge",
                    message: Message::new(TAG_CHALLENGE, payload),
                })
            }
            VerifierState::AwaitResponse { round, copy, challenge } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_RESPONSE)?;
                decode_round(r.byte()?, round)?;
                let echoed = r.byte()?;
                if echoed != challenge {
                    return Err(ProtocolError::Malformed(
                        "response answers a different challenge".into(),
                    ));
                }
                let round_ok = self.response_checks(&copy, challenge, &mut r)?;
                r.done()?;
                let (code, verdict) = if !round_ok {
                    (VERDICT_REJECT, Some(ZkVerdict::reject(self.m, round)))
                } else if round + 1 == self.m {
                    (VERDICT_ACCEPT, Some(ZkVerdict::accept(self.m)))
                } else {
                    (VERDICT_CONTINUE, None)
                };
                let payload = Writer::new().byte(round as u8).byte(code).finish();
                self.state = match verdict {
                    Some(v) => VerifierState::Finished(v),
                    None => VerifierState::AwaitCommit { round: round + 1 },
                };
                Ok(Action::Send {
                    label: "Verification",
                    message: Message::new(TAG_VERDICT, payload),
                })
            }
            VerifierState::Finished(v) => {
                self.state = VerifierState::Finished(v);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            VerifierState::Finished(v) => Some(v.encode()),
            _ => None,
        }
    }
}

/// Noise edges that make a fresh planted graph match G's edge count.
fn matching_noise(g: &Graph) -> usize {
    g.edge_count().saturating_sub(g.n())
}

enum CheatRound {
    /// Committed a true copy; can only answer challenge 0.
    TrueCopy(Permutation),
    /// Committed a fresh fake with its own planted cycle; can only answer 1.
    FakeCycle(Vec<usize>),
}

/// A prover holding the public graph but no witness. Guesses the challenge
/// and commits accordingly; a wrong guess is unanswerable.
pub struct GraphCheatProver {
    g: Graph,
    m: u32,
    state: CheatState,
}

enum CheatState {
    SendCommit { round: u32 },
    AwaitChallenge { round: u32, prepared: CheatRound },
    AwaitVerdict { round: u32 },
    Finished(ZkVerdict),
}

impl GraphCheatProver {
    pub fn new(g: Graph, m: u32) -> Self {
        assert!(m >= 1);
        GraphCheatProver {
            g,
            m,
            state: CheatState::SendCommit { round: 0 },
        }
    }

    fn commit(&mut self, round: u32, rng: &mut SessionRng) -> Result<Action, ProtocolError> {
        let guess: u8 = rng.gen_range(0..2);
        let (copy, prepared) = if guess == 0 {
            let perm = random_perm(self.g.n(), rng);
            let copy = apply_perm(&self.g, &perm)
                .map_err(|e| ProtocolError::Malformed(e.to_string()))?;
            (copy, CheatRound::TrueCopy(perm))
        } else {
            let fake = gen_hamiltonian_graph(self.g.n(), matching_noise(&self.g), rng);
            (fake.graph, CheatRound::FakeCycle(fake.witness))
        };
        let payload = Writer::new().byte(round as u8).graph(&copy).finish();
        self.state = CheatState::AwaitChallenge { round, prepared };
        Ok(Action::Send {
            label: "Commitment",
            message: Message::new(TAG_COMMIT, payload),
        })
    }
}

impl PartyMachine for GraphCheatProver {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, CheatState::SendCommit { round: 0 }) {
            CheatState::SendCommit { round } => self.commit(round, rng),
            CheatState::AwaitChallenge { round, prepared } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_CHALLENGE)?;
                decode_round(r.byte()?, round)?;
                let challenge = r.byte()?;
                r.done()?;
                let w = Writer::new().byte(round as u8).byte(challenge);
                let w = match (challenge, &prepared) {
                    (0, CheatRound::TrueCopy(perm)) => w.perm(perm),
                    (1, CheatRound::FakeCycle(witness)) => w.witness(witness),
                    // wrong guess: nothing answers; send an unfillable blank
                    (0, _) => w.perm(&Permutation::identity(self.g.n())),
                    (1, _) => w.witness(&[]),
                    _ => return Err(ProtocolError::Malformed("challenge is not a bit".into())),
                };
                self.state = CheatState::AwaitVerdict { round };
                Ok(Action::Send {
                    label: "Response",
                    message: Message::new(TAG_RESPONSE, w.finish()),
                })
            }
            CheatState::AwaitVerdict { round } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_VERDICT)?;
                decode_round(r.byte()?, round)?;
                let code = r.byte()?;
                r.done()?;
                match decode_verdict(code, round, self.m)? {
                    Some(verdict) => {
                        self.state = CheatState::Finished(verdict);
                        Ok(Action::Finish)
                    }
                    None => self.commit(round + 1, rng),
                }
            }
            CheatState::Finished(v) => {
                self.state = CheatState::Finished(v);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match &self.state {
            CheatState::Finished(v) => Some(v.encode()),
            _ => None,
        }
    }
}

fn params_blob(g: &Graph, m: u32) -> Vec<u8> {
    Writer::new().graph(g).byte(m as u8).finish()
}

/// One honest proof session.
pub fn run_graph_zkp(
    planted: PlantedSolution,
    m: u32,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, ZkVerdict), SessionError> {
    let params = params_blob(&planted.graph, m);
    let mut verifier = GraphVerifier::new(planted.graph.clone(), m);
    let mut prover = GraphProver::new(planted, m);
    let result = run_session(
        GRAPH_ZKP_SPEC.id,
        params,
        &mut prover,
        &mut verifier,
        Role::A,
        seed_a,
        seed_b,
        transport,
    )?;
    let verdict = ZkVerdict::decode(&result.outcome_b.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    Ok((result, verdict))
}

/// A witness-less prover against an honest verifier.
pub fn run_graph_zkp_cheat(
    g: &Graph,
    m: u32,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, ZkVerdict), SessionError> {
    let mut prover = GraphCheatProver::new(g.clone(), m);
    let mut verifier = GraphVerifier::new(g.clone(), m);
    let result = run_session(
        GRAPH_ZKP_SPEC.id,
        params_blob(g, m),
        &mut prover,
        &mut verifier,
        Role::A,
        seed_a,
        seed_b,
        transport,
    )?;
    let verdict = ZkVerdict::decode(&result.outcome_b.output)
        .map_err(|e| SessionError::Transport(e.to_string()))?;
    Ok((result, verdict))
}

/// What a simulated round revealed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSimResponse {
    Relabeling(Permutation),
    Cycle(Vec<usize>),
}

/// One accepted simulated round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSimRound {
    pub commitment: Graph,
    pub challenge: u8,
    pub response: GraphSimResponse,
    pub attempts: u32,
}

/// Accepting transcripts from the public graph alone. Guess 0 prepares a
/// genuine relabeled copy; guess 1 prepares a fresh graph with a planted
/// cycle of matching size; wrong guesses rewind the verifier.
pub fn graph_zkp_simulate(
    g: &Graph,
    m: u32,
    sim_seed: u64,
    verifier_seed: u64,
) -> Result<Vec<GraphSimRound>, ProtocolError> {
    use rand::SeedableRng;
    let mut sim_rng = SessionRng::seed_from_u64(sim_seed);
    let mut ver_rng = SessionRng::seed_from_u64(verifier_seed);
    let noise = matching_noise(g);
    let mut rounds = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            if attempts > SIM_RETRY_BUDGET {
                return Err(ProtocolError::CheckFailed(
                    "simulator retry budget exhausted".into(),
                ));
            }
            let guess: u8 = sim_rng.gen_range(0..2);
            let (commitment, response) = if guess == 0 {
                let perm = random_perm(g.n(), &mut sim_rng);
                let copy = apply_perm(g, &perm)
                    .map_err(|e| ProtocolError::Malformed(e.to_string()))?;
                (copy, GraphSimResponse::Relabeling(perm))
            } else {
                let fake = gen_hamiltonian_graph(g.n(), noise, &mut sim_rng);
                (fake.graph, GraphSimResponse::Cycle(fake.witness))
            };
            let challenge: u8 = ver_rng.gen_range(0..2);
            if challenge == guess {
                rounds.push(GraphSimRound {
                    commitment,
                    challenge,
                    response,
                    attempts,
                });
                break;
            }
        }
    }
    Ok(rounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::InProcTransport;
    use crate::stats::{run_trials, success_rate};
    use rand::SeedableRng;
    use std::collections::HashMap;

    fn planted(n: usize, noise: usize, seed: u64) -> PlantedSolution {
        let mut rng = SessionRng::seed_from_u64(seed);
        gen_hamiltonian_graph(n, noise, &mut rng)
    }

    #[test]
    fn honest_prover_always_accepted() {
        let p = planted(8, 6, 1);
        for m in [1u32, 5, 20] {
            for i in 0..20u64 {
                let mut t = InProcTransport::new();
                let (result, verdict) =
                    run_graph_zkp(p.clone(), m, 2 * i, 2 * i + 1, &mut t).unwrap();
                assert!(verdict.accepted, "m={m} seed={i}");
                assert_eq!(result.outcome_a.output, result.outcome_b.output);
            }
        }
    }

    /// Smallest instance: the triangle, challenge-1 branch. The revealed
    /// 3-cycle must validate in the committed copy.
    #[test]
    fn triangle_cycle_validates() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]);
        let p = PlantedSolution::new(g, vec![0, 1, 2]).unwrap();
        // hunt a verifier seed whose first challenge is 1
        for seed in 0..50u64 {
            let mut t = InProcTransport::new();
            let (result, verdict) = run_graph_zkp(p.clone(), 1, 9, seed, &mut t).unwrap();
            let mut cr = crate::wire::Reader::new(&result.transcript.entries[1].message.payload);
            cr.byte().unwrap();
            if cr.byte().unwrap() == 1 {
                assert!(verdict.accepted);
                let mut rr =
                    crate::wire::Reader::new(&result.transcript.entries[2].message.payload);
                rr.byte().unwrap();
                rr.byte().unwrap();
                let revealed = rr.witness().unwrap();
                assert_eq!(revealed.len(), 3);
                return;
            }
        }
        panic!("no seed produced challenge 1");
    }

    #[test]
    fn cheat_prover_survives_single_round_half_the_time() {
        let p = planted(7, 5, 2);
        let trials = 10_000u64;
        let est = success_rate(trials, |i| {
            let mut t = InProcTransport::new();
            let (_, verdict) =
                run_graph_zkp_cheat(&p.graph, 1, 3 * i + 1, 3 * i + 2, &mut t).unwrap();
            verdict.accepted
        });
        assert!((est.rate - 0.5).abs() < 0.02, "cheat rate {}", est.rate);
    }

    #[test]
    fn cheat_prover_multi_round_rate_halves() {
        let p = planted(6, 4, 3);
        let m = 3u32;
        let trials = 4_000u64;
        let hits: u64 = run_trials(trials, |i| {
            let mut t = InProcTransport::new();
            let (_, verdict) =
                run_graph_zkp_cheat(&p.graph, m, 2 * i, 2 * i + 1, &mut t).unwrap();
            verdict.accepted as u64
        })
        .iter()
        .sum();
        let expect = 0.125;
        let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
        let rate = hits as f64 / trials as f64;
        assert!((rate - expect).abs() < 4.0 * sigma, "rate {rate}");
    }

    #[test]
    fn simulated_rounds_pass_verification() {
        let p = planted(7, 4, 4);
        for seed in 0..100u64 {
            let rounds = graph_zkp_simulate(&p.graph, 3, seed, seed + 500).unwrap();
            assert_eq!(rounds.len(), 3);
            for r in &rounds {
                match (&r.response, r.challenge) {
                    (GraphSimResponse::Relabeling(perm), 0) => {
                        assert_eq!(apply_perm(&p.graph, perm).unwrap(), r.commitment);
                    }
                    (GraphSimResponse::Cycle(w), 1) => {
                        PlantedSolution::validate(&r.commitment, w).unwrap();
                    }
                    other => panic!("response/challenge mismatch: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn simulator_rewind_mean_is_two() {
        let p = planted(6, 3, 5);
        let trials = 20_000u64;
        let attempts: u64 = run_trials(trials, |i| {
            let rounds = graph_zkp_simulate(&p.graph, 1, 2 * i, 2 * i + 1).unwrap();
            rounds[0].attempts as u64
        })
        .iter()
        .sum();
        let mean = attempts as f64 / trials as f64;
        assert!((mean - 2.0).abs() < 0.1, "mean attempts {mean}");
    }

    /// The challenge-0 branch commits a uniformly relabeled copy in both the
    /// honest protocol and the simulator; the two committed-graph
    /// distributions at n=4 are statistically identical.
    #[test]
    fn challenge_zero_commitments_match_honest_distribution() {
        let p = planted(4, 1, 6);
        let trials = 8_000u64;
        let honest_rounds = run_trials(trials, |i| {
            let mut t = InProcTransport::new();
            let (result, _) = run_graph_zkp(p.clone(), 1, 2 * i + 1, 2 * i + 2, &mut t).unwrap();
            let mut cr = crate::wire::Reader::new(&result.transcript.entries[1].message.payload);
            cr.byte().unwrap();
            let challenge = cr.byte().unwrap();
            let mut gr = crate::wire::Reader::new(&result.transcript.entries[0].message.payload);
            gr.byte().unwrap();
            (challenge, gr.graph().unwrap().encode())
        });
        let sim_rounds = run_trials(trials, |i| {
            let rounds = graph_zkp_simulate(&p.graph, 1, 7 * i + 1, 7 * i + 2).unwrap();
            (rounds[0].challenge, rounds[0].commitment.encode())
        });
        let mut honest: HashMap<Vec<u8>, u64> = HashMap::new();
        for (c, g) in honest_rounds {
            if c == 0 {
                *honest.entry(g).or_insert(0) += 1;
            }
        }
        let mut simulated: HashMap<Vec<u8>, u64> = HashMap::new();
        for (c, g) in sim_rounds {
            if c == 0 {
                *simulated.entry(g).or_insert(0) += 1;
            }
        }
        assert!(honest.values().sum::<u64>() > 1000);
        assert!(simulated.values().sum::<u64>() > 1000);
        let result = crate::stats::chi_square_homogeneity(&honest, &simulated);
        assert!(result.p_value > 0.01, "p = {}", result.p_value);
    }

    #[test]
    fn rejected_round_is_reported() {
        let p = planted(6, 4, 7);
        for i in 0..40u64 {
            let mut t = InProcTransport::new();
            let (_, verdict) =
                run_graph_zkp_cheat(&p.graph, 2, 5 * i, 5 * i + 1, &mut t).unwrap();
            if !verdict.accepted {
                assert!(verdict.failure_round.unwrap() < 2);
                return;
            }
        }
        panic!("every cheat session accepted");
    }
}
