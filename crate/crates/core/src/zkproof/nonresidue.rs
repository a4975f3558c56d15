//! Cut-and-choose proof of quadratic non-residuosity.
//!
//! A holds the factorization of N and proves that a public y (of Jacobi
//! symbol 1) is not a square mod N. B sends t challenges z_i = r_i²·y^{b_i}
//! for secret coin flips b_i; with the factors A can tell squares from
//! non-squares and recover every b_i. If y were actually a square, every
//! challenge would be a square and A could only guess, surviving with
//! probability 2^{-t}.
//!
//! This is the opening companion of the quadratic-residue commitment: once y
//! is proved a non-residue, a commitment can be opened from (b, r) alone,
//! without surrendering the modulus factors.

use num_bigint::BigUint;
use rand::Rng;

use crate::bits::Bits;
use crate::numtheory::{BlumModulus, NumTheoryError};
use crate::session::{
    run_session, Action, Message, PartyMachine, ProtocolError, ProtocolSpec, Role, SessionError,
    SessionResult, SessionRng, Transport,
};
use crate::wire::{expect_tag, require_message, Writer};

pub const NONRESIDUE_SPEC: ProtocolSpec = ProtocolSpec {
    id: "zkp-nonresidue",
    name: "quadratic non-residuosity proof",
    stages: &["Challenge", "Response", "Verification"],
    output_domain_a: "{accept, reject}",
    output_domain_b: "{accept, reject}",
    domains_published_first: true,
};

const TAG_CHALLENGE: u8 = 0x70;
const TAG_RESPONSE: u8 = 0x71;
const TAG_VERDICT: u8 = 0x72;

enum ProverState {
    AwaitChallenge,
    AwaitVerdict,
    Finished(bool),
}

/// Party A: holds the factorization, classifies each challenge.
pub struct NonResidueProver {
    modulus: BlumModulus,
    state: ProverState,
}

impl NonResidueProver {
    pub fn new(modulus: BlumModulus) -> Self {
        NonResidueProver {
            modulus,
            state: ProverState::AwaitChallenge,
        }
    }
}

impl PartyMachine for NonResidueProver {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        _rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match self.state {
            ProverState::AwaitChallenge => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_CHALLENGE)?;
                let t = r.byte()? as usize;
                if t == 0 {
                    return Err(ProtocolError::Malformed("no challenges".into()));
                }
                let mut answers = Bits::zero(t);
                for i in 0..t {
                    let z = r.int()?;
                    let square = self.modulus.is_qr(&z).map_err(|e| match e {
                        NumTheoryError::NotCoprime => {
                            ProtocolError::CheckFailed("challenge is not a unit".into())
                        }
                        other => ProtocolError::Malformed(other.to_string()),
                    })?;
                    // z = r²·y^b is a square exactly when b = 0
                    answers.set(i, !square);
                }
                r.done()?;
                self.state = ProverState::AwaitVerdict;
                Ok(Action::Send {
                    label: "Response",
                    message: Message::new(TAG_RESPONSE, Writer::new().bits(&answers).finish()),
                })
            }
            ProverState::AwaitVerdict => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_VERDICT)?;
                let accepted = r.byte()? == 1;
                r.done()?;
                self.state = ProverState::Finished(accepted);
                Ok(Action::Finish)
            }
            ProverState::Finished(_) => Ok(Action::Finish),
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match self.state {
            ProverState::Finished(accepted) => Some(vec![accepted as u8]),
            _ => None,
        }
    }

    fn input_description(&self) -> Vec<u8> {
        Writer::new()
            .int(self.modulus.p())
            .int(self.modulus.q())
            .finish()
    }
}

enum VerifierState {
    Start,
    AwaitResponse { coins: Bits },
    Finished(bool),
}

/// Party B: challenges with disguised coin flips and compares the answers.
pub struct NonResidueVerifier {
    n: BigUint,
    y: BigUint,
    t: usize,
    state: VerifierState,
}

impl NonResidueVerifier {
    pub fn new(n: BigUint, y: BigUint, t: usize) -> Self {
        assert!(t >= 1 && t <= 255);
        NonResidueVerifier {
            n,
            y,
            t,
            state: VerifierState::Start,
        }
    }
}

impl PartyMachine for NonResidueVerifier {
    fn advance(
        &mut self,
        incoming: Option<Message>,
        rng: &mut SessionRng,
    ) -> Result<Action, ProtocolError> {
        match std::mem::replace(&mut self.state, VerifierState::Start) {
            VerifierState::Start => {
                let mut coins = Bits::zero(self.t);
                let mut w = Writer::new().byte(self.t as u8);
                for i in 0..self.t {
                    let b: bool = rng.gen_range(0..2) == 1;
                    coins.set(i, b);
                    let r = crate::numtheory::random_in_zn_star(rng, &self.n);
                    let mut z = (&r * &r) % &self.n;
                    if b {
                        z = (z * &self.y) % &self.n;
                    }
                    w = w.int(&z);
                }
                self.state = VerifierState::AwaitResponse { coins };
                Ok(Action::Send {
                    label: "Challenge",
                    message: Message::new(TAG_CHALLENGE, w.finish()),
                })
            }
            VerifierState::AwaitResponse { coins } => {
                let msg = require_message(incoming)?;
                let mut r = expect_tag(&msg, TAG_RESPONSE)?;
                let answers = r.bits()?;
                r.done()?;
                if answers.len() != self.t {
                    return Err(ProtocolError::Malformed(
                        "answer count does not match the challenge count".into(),
                    ));
                }
                let accepted = answers == coins;
                self.state = VerifierState::Finished(accepted);
                Ok(Action::Send {
                    label: "Verification",
                    message: Message::new(
                        TAG_VERDICT,
                        Writer::new().byte(accepted as u8).finish(),
                    ),
                })
            }
            VerifierState::Finished(accepted) => {
                self.state = VerifierState::Finished(accepted);
                Ok(Action::Finish)
            }
        }
    }

    fn output(&self) -> Option<Vec<u8>> {
        match self.state {
            VerifierState::Finished(accepted) => Some(vec![accepted as u8]),
            _ => None,
        }
    }
}

/// One proof session; returns the result and whether B accepted.
pub fn run_nonresidue_proof(
    modulus: BlumModulus,
    y: BigUint,
    t: usize,
    seed_a: u64,
    seed_b: u64,
    transport: &mut dyn Transport,
) -> Result<(SessionResult, bool), SessionError> {
    let params = Writer::new()
        .int(modulus.n())
        .int(&y)
        .byte(t as u8)
        .finish();
    let mut verifier = NonResidueVerifier::new(modulus.n().clone(), y, t);
    let mut prover = NonResidueProver::new(modulus);
    let result = run_session(
        NONRESIDUE_SPEC.id,
        params,
        &mut prover,
        &mut verifier,
        Role::B,
        seed_a,
        seed_b,
        transport,
    )?;
    let accepted = result.outcome_b.output == [1];
    Ok((result, accepted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::{big, gen_blum};
    use crate::session::InProcTransport;
    use crate::stats::success_rate;
    use rand::SeedableRng;

    fn setup(seed: u64) -> (BlumModulus, BigUint) {
        let mut rng = SessionRng::seed_from_u64(seed);
        let modulus = gen_blum(24, &mut rng);
        let y = modulus.sample_nonresidue_jacobi1(&mut rng);
        (modulus, y)
    }

    #[test]
    fn true_nonresidue_always_accepted() {
        let (modulus, y) = setup(1);
        for t in [1usize, 8, 40] {
            for i in 0..10u64 {
                let mut tr = InProcTransport::new();
                let (result, accepted) =
                    run_nonresidue_proof(modulus.clone(), y.clone(), t, 2 * i, 2 * i + 1, &mut tr)
                        .unwrap();
                assert!(accepted, "t={t} seed={i}");
                assert_eq!(result.outcome_a.output, result.outcome_b.output);
            }
        }
    }

    /// If y is secretly a square, every challenge is a square and the honest
    /// classifier answers all-zero: acceptance means every verifier coin was
    /// 0, which at t=1 happens half the time and at t=4 in one run of 16.
    #[test]
    fn square_y_survives_at_two_to_minus_t() {
        let mut rng = SessionRng::seed_from_u64(2);
        let modulus = gen_blum(24, &mut rng);
        let r = modulus.sample_unit(&mut rng);
        let square_y = (&r * &r) % modulus.n();
        for (t, expect) in [(1usize, 0.5f64), (4, 0.0625)] {
            let est = success_rate(4_000, |i| {
                let mut tr = InProcTransport::new();
                let (_, accepted) = run_nonresidue_proof(
                    modulus.clone(),
                    square_y.clone(),
                    t,
                    2 * i,
                    2 * i + 1,
                    &mut tr,
                )
                .unwrap();
                accepted
            });
            assert!(
                (est.rate - expect).abs() < 0.03,
                "t={t} rate {} expected {expect}",
                est.rate
            );
        }
    }

    #[test]
    fn worked_example_n21() {
        // N=21, y=5 has Jacobi symbol 1 but is not a square; z=4·5=20
        // disguises b=1, z=16 disguises b=0
        let modulus = BlumModulus::new(big(3), big(7), false).unwrap();
        assert!(!modulus.is_qr(&big(5)).unwrap());
        assert!(!modulus.is_qr(&big(20)).unwrap());
        assert!(modulus.is_qr(&big(16)).unwrap());
    }

    /// Non-unit challenge aborts the prover rather than leaking factor
    /// information through the classification.
    #[test]
    fn non_unit_challenge_rejected() {
        let (modulus, y) = setup(3);
        let n = modulus.n().clone();
        let mut prover = NonResidueProver::new(modulus);
        let mut verifier = crate::session::Scripted::new(
            NonResidueVerifier::new(n.clone(), y, 2),
            move |idx, msg| {
                if idx == 0 {
                    let payload = Writer::new().byte(2).int(&big(0)).int(&big(1)).finish();
                    Message::new(TAG_CHALLENGE, payload)
                } else {
                    msg
                }
            },
        );
        let mut t = InProcTransport::new();
        let err = run_session(
            NONRESIDUE_SPEC.id,
            Vec::new(),
            &mut prover,
            &mut verifier,
            Role::B,
            5,
            6,
            &mut t,
        )
        .unwrap_err();
        match err {
            SessionError::Abort { role, reason, .. } => {
                assert_eq!(role, Role::A);
                assert!(reason.contains("not a unit"), "{reason}");
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }

    /// The commitment tie-in: after this proof, a quadratic-residue
    /// commitment opens from (b, r) alone via the factor-free verifier.
    #[test]
    fn enables_factor_free_commitment_opening() {
        let mut rng = SessionRng::seed_from_u64(9);
        let modulus = gen_blum(24, &mut rng);
        let y = modulus.sample_nonresidue_jacobi1(&mut rng);

        let mut t = InProcTransport::new();
        let (_, accepted) =
            run_nonresidue_proof(modulus.clone(), y.clone(), 16, 10, 11, &mut t).unwrap();
        assert!(accepted);

        let params =
            crate::commitment::QrpParams::from_parts(modulus.clone(), y.clone()).unwrap();
        for b in [false, true] {
            let (commitment, opening) = crate::commitment::qrp_commit(b, params.clone(), &mut rng);
            assert!(crate::commitment::qrp_verify_zk(&commitment, opening.b, &opening.r).is_ok());
            assert_eq!(opening.b, b);
        }
    }
}
