//! Bit-commitment schemes with a commit/open/verify lifecycle.
//!
//! Three instantiations of the same envelope idea: a quadratic-residue
//! commitment (c = r^2 y^b mod N for a certified non-square y), a
//! discrete-log commitment (y = g^x mod p), and a graph commitment (a
//! relabeled copy of one of two certifiably non-isomorphic graphs). Each
//! scheme ships the full lifecycle plus the checks the receiving party runs
//! on opening.

use num_bigint::BigUint;
use num_traits::One;
use rand::RngCore;
use thiserror::Error;

use crate::graphs::{apply_perm, gen_noniso_pair, random_perm, Graph, Permutation};
use crate::numtheory::{is_prime, jacobi, legendre, BlumModulus, FieldContext};
use crate::wire::{Reader, Writer};

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum CommitError {
    #[error("verification failed: {0}")]
    Rejected(&'static str),
    #[error("malformed commitment data")]
    Malformed,
}

/// Named result of a failed predicate, so tests can pin which check fired.
pub type VerifyResult = Result<(), CommitError>;

// ---------------------------------------------------------------------------
// quadratic-residue commitment

/// Public parameters of one QR commitment: the modulus and a non-square y
/// with Jacobi symbol 1. Opening reveals the factors, so a parameter set is
/// single-use: committing consumes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrpParams {
    modulus: BlumModulus,
    y: BigUint,
}

impl QrpParams {
    pub fn generate<R: RngCore>(bit_length: u64, rng: &mut R) -> Self {
        let modulus = crate::numtheory::gen_blum(bit_length, rng);
        let y = modulus.sample_nonresidue_jacobi1(rng);
        QrpParams { modulus, y }
    }

    pub fn from_parts(modulus: BlumModulus, y: BigUint) -> Result<Self, CommitError> {
        if jacobi(&y, modulus.n()).map_err(|_| CommitError::Malformed)? != 1 {
            return Err(CommitError::Rejected("jacobi symbol of y is not 1"));
        }
        if modulus.is_qr(&y).map_err(|_| CommitError::Malformed)? {
            return Err(CommitError::Rejected("y is a quadratic residue"));
        }
        Ok(QrpParams { modulus, y })
    }

    pub fn n(&self) -> &BigUint {
        self.modulus.n()
    }

    pub fn y(&self) -> &BigUint {
        &self.y
    }
}

/// The published envelope: c = r^2 y^b (mod N).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrpCommitment {
    pub n: BigUint,
    pub y: BigUint,
    pub c: BigUint,
}

/// The opening: the committed bit, the blinding r, and the factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrpOpening {
    pub b: bool,
    pub r: BigUint,
    pub p: BigUint,
    pub q: BigUint,
}

/// Commit to a bit. Consumes the parameter set: opening reveals the factors,
/// so a (N, y) pair must never back two commitments.
pub fn qrp_commit<R: RngCore>(
    b: bool,
    params: QrpParams,
    rng: &mut R,
) -> (QrpCommitment, QrpOpening) {
    let r = params.modulus.sample_unit(rng);
    let mut c = (&r * &r) % params.modulus.n();
    if b {
        c = (c * &params.y) % params.modulus.n();
    }
    let commitment = QrpCommitment {
        n: params.modulus.n().clone(),
        y: params.y,
        c,
    };
    let opening = QrpOpening {
        b,
        r,
        p: params.modulus.p().clone(),
        q: params.modulus.q().clone(),
    };
    (commitment, opening)
}

/// Full verification with the revealed factors: the algebra, the factor
/// product, and the non-residuosity certificate for y.
pub fn qrp_verify(commitment: &QrpCommitment, opening: &QrpOpening) -> VerifyResult {
    if !is_prime(&opening.p) || !is_prime(&opening.q) {
        return Err(CommitError::Rejected("revealed factor is not prime"));
    }
    if &opening.p * &opening.q != commitment.n {
        return Err(CommitError::Rejected("revealed factors do not produce N"));
    }
    if jacobi(&commitment.y, &commitment.n).map_err(|_| CommitError::Malformed)? != 1 {
        return Err(CommitError::Rejected("jacobi symbol of y is not 1"));
    }
    if legendre(&commitment.y, &opening.p) != -1 || legendre(&commitment.y, &opening.q) != -1 {
        return Err(CommitError::Rejected("y is not a certified non-square"));
    }
    qrp_verify_algebra(commitment, opening.b, &opening.r)
}

/// The algebraic core shared by both verification styles.
fn qrp_verify_algebra(commitment: &QrpCommitment, b: bool, r: &BigUint) -> VerifyResult {
    if r >= &commitment.n || !r.gcd_check(&commitment.n) {
        return Err(CommitError::Rejected("blinding value is not a unit"));
    }
    let mut expect = (r * r) % &commitment.n;
    if b {
        expect = (expect * &commitment.y) % &commitment.n;
    }
    if expect != commitment.c {
        return Err(CommitError::Rejected("commitment algebra does not hold"));
    }
    Ok(())
}

trait GcdCheck {
    fn gcd_check(&self, n: &BigUint) -> bool;
}

impl GcdCheck for BigUint {
    fn gcd_check(&self, n: &BigUint) -> bool {
        use num_integer::Integer;
        self.gcd(n).is_one()
    }
}

/// Factor-free verification for use together with a prior zero-knowledge
/// proof that y is a non-square (see the non-residuosity proof in the proof
/// module): checks only the public algebra and the Jacobi symbol.
pub fn qrp_verify_zk(commitment: &QrpCommitment, b: bool, r: &BigUint) -> VerifyResult {
    if jacobi(&commitment.y, &commitment.n).map_err(|_| CommitError::Malformed)? != 1 {
        return Err(CommitError::Rejected("jacobi symbol of y is not 1"));
    }
    qrp_verify_algebra(commitment, b, r)
}

// ---------------------------------------------------------------------------
// discrete-log commitment

/// The envelope y = g^x (mod p) with 1 < x < p - 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DlpCommitment {
    pub field: FieldContext,
    pub y: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DlpOpening {
    pub x: BigUint,
}

pub fn dlp_commit(x: &BigUint, field: &FieldContext) -> Result<(DlpCommitment, DlpOpening), CommitError> {
    if x <= &BigUint::one() || x >= &(field.p() - BigUint::one()) {
        return Err(CommitError::Rejected("exponent out of range"));
    }
    Ok((
        DlpCommitment {
            field: field.clone(),
            y: field.pow(x),
        },
        DlpOpening { x: x.clone() },
    ))
}

pub fn dlp_verify(commitment: &DlpCommitment, opening: &DlpOpening) -> VerifyResult {
    if !commitment.field.generator_certified() {
        return Err(CommitError::Rejected("g is not a certified generator"));
    }
    if opening.x <= BigUint::one() || opening.x >= commitment.field.p() - BigUint::one() {
        return Err(CommitError::Rejected("exponent out of range"));
    }
    if commitment.field.pow(&opening.x) != commitment.y {
        return Err(CommitError::Rejected("commitment algebra does not hold"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// graph commitment

/// Public parameters: two graphs certified non-isomorphic by their differing
/// degree sequences, checkable without any search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphParams {
    pub g: Graph,
    pub h: Graph,
}

impl GraphParams {
    pub fn generate<R: RngCore>(n: usize, rng: &mut R) -> Self {
        let (g, h) = gen_noniso_pair(n, rng);
        GraphParams { g, h }
    }

    pub fn certified(&self) -> bool {
        self.g.n() == self.h.n() && self.g.degree_sequence() != self.h.degree_sequence()
    }
}

/// The envelope: a relabeled copy of the graph selected by the bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphCommitment {
    pub params: GraphParams,
    pub witness: Graph,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphOpening {
    pub b: bool,
    pub relabeling: Permutation,
}

pub fn graph_commit<R: RngCore>(
    b: bool,
    params: &GraphParams,
    rng: &mut R,
) -> Result<(GraphCommitment, GraphOpening), CommitError> {
    if !params.certified() {
        return Err(CommitError::Rejected("pair is not certified non-isomorphic"));
    }
    let source = if b { &params.h } else { &params.g };
    let relabeling = random_perm(source.n(), rng);
    let witness = apply_perm(source, &relabeling).map_err(|_| CommitError::Malformed)?;
    Ok((
        GraphCommitment {
            params: params.clone(),
            witness,
        },
        GraphOpening { b, relabeling },
    ))
}

pub fn graph_verify(commitment: &GraphCommitment, opening: &GraphOpening) -> VerifyResult {
    if !commitment.params.certified() {
        return Err(CommitError::Rejected("pair is not certified non-isomorphic"));
    }
    let source = if opening.b {
        &commitment.params.h
    } else {
        &commitment.params.g
    };
    if source.n() != opening.relabeling.n() {
        return Err(CommitError::Rejected("relabeling size mismatch"));
    }
    let expect = apply_perm(source, &opening.relabeling).map_err(|_| CommitError::Malformed)?;
    if expect != commitment.witness {
        return Err(CommitError::Rejected(
            "relabeling does not map the claimed graph onto the witness",
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// serialization for embedding commitments in messages

impl QrpCommitment {
    pub fn encode(&self) -> Vec<u8> {
        Writer::new().int(&self.n).int(&self.y).int(&self.c).finish()
    }

    pub fn decode(buf: &[u8]) -> Result<Self, CommitError> {
        let mut r = Reader::new(buf);
        let out = QrpCommitment {
            n: r.int().map_err(|_| CommitError::Malformed)?,
            y: r.int().map_err(|_| CommitError::Malformed)?,
            c: r.int().map_err(|_| CommitError::Malformed)?,
        };
        r.done().map_err(|_| CommitError::Malformed)?;
        Ok(out)
    }
}

impl GraphCommitment {
    pub fn encode(&self) -> Vec<u8> {
        Writer::new()
            .graph(&self.params.g)
            .graph(&self.params.h)
            .graph(&self.witness)
            .finish()
    }

    pub fn decode(buf: &[u8]) -> Result<Self, CommitError> {
        let mut r = Reader::new(buf);
        let g = r.graph().map_err(|_| CommitError::Malformed)?;
        let h = r.graph().map_err(|_| CommitError::Malformed)?;
        let witness = r.graph().map_err(|_| CommitError::Malformed)?;
        r.done().map_err(|_| CommitError::Malformed)?;
        Ok(GraphCommitment {
            params: GraphParams { g, h },
            witness,
        })
    }
}

/// Helper for binding fuzz tests: flip one bit of a byte buffer.
pub fn flip_bit(buf: &mut [u8], bit: usize) {
    buf[bit / 8] ^= 0x80 >> (bit % 8);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::{big, mod_pow};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn n21_params(y: u64) -> QrpParams {
        let m = BlumModulus::new(big(3), big(7), true).unwrap();
        QrpParams::from_parts(m, big(y)).unwrap()
    }

    #[test]
    fn qrp_worked_example() {
        // N=21, y=5, b=1, r=2: c = 4 * 5 mod 21 = 20
        let commitment = QrpCommitment {
            n: big(21),
            y: big(5),
            c: big(20),
        };
        let opening = QrpOpening {
            b: true,
            r: big(2),
            p: big(3),
            q: big(7),
        };
        qrp_verify(&commitment, &opening).unwrap();
        // the same parameters also pass the public-parameter checks
        n21_params(5);
    }

    #[test]
    fn qrp_residuosity_tracks_the_bit() {
        // b=0 gives a square, b=1 does not, for every unit r at N=21, y=5
        let m = BlumModulus::new(big(3), big(7), true).unwrap();
        for r in 1u64..21 {
            if big(r).gcd_check(&big(21)) {
                let c0 = (r * r) % 21;
                let c1 = (r * r * 5) % 21;
                assert!(m.is_qr(&big(c0)).unwrap());
                assert!(!m.is_qr(&big(c1)).unwrap());
            }
        }
    }

    #[test]
    fn qrp_binding_exhaustive_at_21() {
        // no unit r' opens c to the other bit
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for b in [false, true] {
            let (commitment, opening) = qrp_commit(b, n21_params(5), &mut rng);
            for r2 in 1u64..21 {
                if !big(r2).gcd_check(&big(21)) {
                    continue;
                }
                let fake = QrpOpening {
                    b: !b,
                    r: big(r2),
                    p: opening.p.clone(),
                    q: opening.q.clone(),
                };
                assert!(qrp_verify(&commitment, &fake).is_err());
            }
            qrp_verify(&commitment, &opening).unwrap();
        }
    }

    #[test]
    fn qrp_hiding_support_structure() {
        // over all units r, the two conditional supports have equal size
        let mut support = [std::collections::BTreeSet::new(), std::collections::BTreeSet::new()];
        for r in 1u64..21 {
            if !big(r).gcd_check(&big(21)) {
                continue;
            }
            support[0].insert((r * r) % 21);
            support[1].insert((r * r * 5) % 21);
        }
        assert_eq!(support[0].len(), support[1].len());
        assert!(support[0].is_disjoint(&support[1]));
        for c in support.iter().flatten() {
            assert_eq!(jacobi(&big(*c), &big(21)).unwrap(), 1);
        }
    }

    #[test]
    fn qrp_rejects_bad_parameters() {
        let m = BlumModulus::new(big(3), big(7), true).unwrap();
        // 4 is a square; 2 has Jacobi symbol -1
        assert!(QrpParams::from_parts(m.clone(), big(4)).is_err());
        assert!(QrpParams::from_parts(m, big(2)).is_err());
    }

    #[test]
    fn qrp_completeness_randomized() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for i in 0..300u64 {
            let params = QrpParams::generate(16, &mut rng);
            let (commitment, opening) = qrp_commit(i % 2 == 0, params, &mut rng);
            qrp_verify(&commitment, &opening).unwrap();
            qrp_verify_zk(&commitment, opening.b, &opening.r).unwrap();
        }
    }

    #[test]
    fn dlp_worked_example() {
        // p=7, g=3, x=4: y = 81 mod 7 = 4
        let field = FieldContext::new(big(7), big(3)).unwrap();
        let (commitment, opening) = dlp_commit(&big(4), &field).unwrap();
        assert_eq!(commitment.y, big(4));
        dlp_verify(&commitment, &opening).unwrap();
    }

    #[test]
    fn dlp_binding_exhaustive_small_primes() {
        // distinct in-range exponents give distinct envelopes
        for (p, g) in [(7u64, 3u64), (11, 2), (23, 5), (59, 2), (107, 2)] {
            let field = FieldContext::new(big(p), big(g)).unwrap();
            let mut seen = std::collections::BTreeSet::new();
            for x in 2..p - 1 {
                let y = mod_pow(&big(g), &big(x), &big(p));
                assert!(seen.insert(y), "collision at p={p} x={x}");
            }
            let _ = field;
        }
    }

    #[test]
    fn dlp_range_rule() {
        let field = FieldContext::new(big(7), big(3)).unwrap();
        assert!(dlp_commit(&big(1), &field).is_err());
        assert!(dlp_commit(&big(6), &field).is_err());
        let (commitment, _) = dlp_commit(&big(4), &field).unwrap();
        // opening shifted by the group order is out of range, not accepted
        let shifted = DlpOpening { x: big(4 + 6) };
        assert!(dlp_verify(&commitment, &shifted).is_err());
    }

    #[test]
    fn graph_lifecycle_and_binding() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for i in 0..100u64 {
            let params = GraphParams::generate(3 + (i % 6) as usize, &mut rng);
            let b = i % 2 == 0;
            let (commitment, opening) = graph_commit(b, &params, &mut rng).unwrap();
            graph_verify(&commitment, &opening).unwrap();
            // binding: no relabeling maps the other graph onto the witness
            if commitment.witness.n() <= 10 {
                let other = if b { &params.g } else { &params.h };
                let iso = crate::graphs::find_isomorphism(other, &commitment.witness).unwrap();
                assert!(iso.is_none(), "unchosen graph maps onto the witness");
            }
        }
    }

    #[test]
    fn graph_identity_relabeling_case() {
        let params = GraphParams {
            g: Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]),
            h: Graph::from_edges(3, &[(0, 1), (1, 2)]),
        };
        let commitment = GraphCommitment {
            params: params.clone(),
            witness: params.g.clone(),
        };
        let opening = GraphOpening {
            b: false,
            relabeling: Permutation::identity(3),
        };
        graph_verify(&commitment, &opening).unwrap();
    }

    #[test]
    fn witness_tamper_rejected_all_schemes() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for i in 0..200u64 {
            // qrp: flip a bit of the envelope value c
            let params = QrpParams::generate(16, &mut rng);
            let (mut commitment, opening) = qrp_commit(i % 2 == 0, params, &mut rng);
            let mut bytes = commitment.c.to_bytes_be();
            let bit = (rng.gen::<usize>()) % (bytes.len() * 8);
            flip_bit(&mut bytes, bit);
            let tampered = BigUint::from_bytes_be(&bytes) % &commitment.n;
            if tampered != commitment.c {
                commitment.c = tampered;
                assert!(qrp_verify(&commitment, &opening).is_err());
            }

            // dlp: flip a bit of y
            let field = crate::numtheory::gen_field(12, &mut rng);
            let x = big(2 + (i % 3));
            let (mut commitment, opening) = dlp_commit(&x, &field).unwrap();
            let mut bytes = commitment.y.to_bytes_be();
            let bit = (rng.gen::<usize>()) % (bytes.len() * 8);
            flip_bit(&mut bytes, bit);
            let tampered = BigUint::from_bytes_be(&bytes) % field.p();
            if tampered != commitment.y {
                commitment.y = tampered;
                assert!(dlp_verify(&commitment, &opening).is_err());
            }

            // graph: toggle one adjacency pair of the witness
            let params = GraphParams::generate(6, &mut rng);
            let (mut commitment, opening) = graph_commit(i % 2 == 1, &params, &mut rng).unwrap();
            let u = rng.gen_range(0..6);
            let v = (u + 1 + rng.gen_range(0..5)) % 6;
            if commitment.witness.has_edge(u, v) {
                commitment.witness.remove_edge(u, v);
            } else {
                commitment.witness.add_edge(u, v);
            }
            assert!(graph_verify(&commitment, &opening).is_err());
        }
    }

    #[test]
    fn qrp_codec_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let params = QrpParams::generate(16, &mut rng);
        let (commitment, _) = qrp_commit(true, params, &mut rng);
        let enc = commitment.encode();
        assert_eq!(QrpCommitment::decode(&enc).unwrap(), commitment);
    }
}
