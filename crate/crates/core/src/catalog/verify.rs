//! Offline transcript verification: parse a stored log, confirm its
//! integrity line, and replay every publicly checkable verification step of
//! the recorded protocol against the parameters in the header.
//!
//! Checks that depend on a party's private state (an OT receiver's trapdoor,
//! a comparison secret) cannot be replayed from the outside; for those
//! messages the verifier confirms the wire structure and every relation that
//! is public: beta products, root equations, revealed openings, verdict
//! consistency.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::graphs::{apply_perm, Graph, PlantedSolution};
use crate::session::{
    parse_log, Direction, LogError, Message, ProtocolError, Transcript, TranscriptEntry,
};
use crate::wire::{expect_tag, Reader};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("unknown protocol {0:?}")]
    UnknownProtocol(String),
    #[error("bad parameter header: {0}")]
    BadParams(String),
    #[error("step {step}: malformed message: {reason}")]
    Malformed { step: usize, reason: String },
    #[error("step {step}: verification failed: {reason}")]
    Check { step: usize, reason: String },
}

fn perr(step: usize, e: ProtocolError) -> VerifyError {
    match e {
        ProtocolError::CheckFailed(reason) => VerifyError::Check { step, reason },
        other => VerifyError::Malformed {
            step,
            reason: other.to_string(),
        },
    }
}

fn fail(step: usize, reason: &str) -> VerifyError {
    VerifyError::Check {
        step,
        reason: reason.to_string(),
    }
}

/// Parse a stored log (including its integrity line) and replay its checks.
pub fn verify_transcript_text(text: &str) -> Result<(), VerifyError> {
    let t = parse_log(text)?;
    verify_transcript(&t)
}

/// Replay the publicly checkable steps of an already parsed transcript.
pub fn verify_transcript(t: &Transcript) -> Result<(), VerifyError> {
    // messages must strictly alternate
    for (i, pair) in t.entries.windows(2).enumerate() {
        if pair[0].direction == pair[1].direction {
            return Err(VerifyError::Malformed {
                step: i + 1,
                reason: "two consecutive messages from the same party".into(),
            });
        }
    }
    match t.protocol.as_str() {
        "rabin-ot" => verify_rabin(t),
        "graph-ot" => verify_graph_ot(t),
        "dlp-1of2-ot" => verify_dlp(t),
        "graph-1of2-ot" => verify_graph_1of2(t),
        "secret-sale" => verify_secret_sale(t),
        "composed-ot" => verify_composed(t),
        "zkp-qrp" => verify_zkp_qrp(t),
        "zkp-graph" => verify_zkp_graph(t),
        "zkp-nonresidue" => verify_nonresidue(t),
        "coin-flip-qrp" => verify_coin_qrp(t),
        "coin-flip-general" => verify_coin_general(t),
        "secret-exchange-graph" => verify_secret_exchange(t),
        "contract-sign" => verify_contract(t),
        "tscp" | "byzantine-agreement" | "string-verification" => verify_comparison(t),
        "millionaires" => verify_millionaires(t),
        other => Err(VerifyError::UnknownProtocol(other.to_string())),
    }
}

fn params_reader(t: &Transcript) -> Reader<'_> {
    Reader::new(&t.params)
}

fn bad_params(e: ProtocolError) -> VerifyError {
    VerifyError::BadParams(e.to_string())
}

fn entry<'a>(t: &'a Transcript, i: usize) -> Result<&'a TranscriptEntry, VerifyError> {
    t.entries.get(i).ok_or(VerifyError::Malformed {
        step: i,
        reason: "transcript ends before the protocol does".into(),
    })
}

fn open<'a>(
    t: &'a Transcript,
    i: usize,
    tag: u8,
    dir: Direction,
) -> Result<Reader<'a>, VerifyError> {
    let e = entry(t, i)?;
    if e.direction != dir {
        return Err(VerifyError::Malformed {
            step: i,
            reason: format!("message sent in the wrong direction ({})", e.direction),
        });
    }
    open_message(&e.message, i, tag)
}

fn open_message<'a>(msg: &'a Message, i: usize, tag: u8) -> Result<Reader<'a>, VerifyError> {
    expect_tag(msg, tag).map_err(|e| perr(i, e))
}

fn expect_len(t: &Transcript, n: usize) -> Result<(), VerifyError> {
    if t.entries.len() != n {
        return Err(VerifyError::Malformed {
            step: t.entries.len().min(n),
            reason: format!("expected {n} messages, found {}", t.entries.len()),
        });
    }
    Ok(())
}

/// Publicly replayable part of the discrete-log parameter set.
struct DlpPublic {
    p: BigUint,
    c: BigUint,
    k: usize,
}

fn read_dlp_public(r: &mut Reader) -> Result<DlpPublic, ProtocolError> {
    let p = r.int()?;
    let _g = r.int()?;
    let c = r.int()?;
    let k = r.byte()? as usize;
    Ok(DlpPublic { p, c, k })
}

/// Check a transfer-request pair: both betas are nonzero residues whose
/// product is the public constant c.
fn check_betas(r: &mut Reader, pp: &DlpPublic, step: usize) -> Result<(), VerifyError> {
    let beta0 = r.int().map_err(|e| perr(step, e))?;
    let beta1 = r.int().map_err(|e| perr(step, e))?;
    if beta0.is_zero() || beta1.is_zero() || beta0 >= pp.p || beta1 >= pp.p {
        return Err(fail(step, "beta out of range"));
    }
    if (&beta0 * &beta1) % &pp.p != pp.c {
        return Err(fail(step, "beta product does not match c"));
    }
    Ok(())
}

/// Check a masked-delivery pair: two (alpha, masked-secret) blocks of the
/// declared width.
fn check_masked(r: &mut Reader, pp: &DlpPublic, step: usize) -> Result<(), VerifyError> {
    for _ in 0..2 {
        let alpha = r.int().map_err(|e| perr(step, e))?;
        if alpha.is_zero() || alpha >= pp.p {
            return Err(fail(step, "alpha out of range"));
        }
        let masked = r.bits().map_err(|e| perr(step, e))?;
        if masked.len() != pp.k {
            return Err(fail(step, "masked secret has the wrong width"));
        }
    }
    Ok(())
}

fn verify_rabin(t: &Transcript) -> Result<(), VerifyError> {
    let mut pr = params_reader(t);
    let n = pr.int().map_err(bad_params)?;
    pr.done().map_err(bad_params)?;
    expect_len(t, 3)?;

    let mut r = open(t, 0, 0x10, Direction::AToB)?;
    let published = r.int().map_err(|e| perr(0, e))?;
    r.done().map_err(|e| perr(0, e))?;
    if published != n {
        return Err(fail(0, "published modulus differs from the agreed one"));
    }

    let mut r = open(t, 1, 0x11, Direction::BToA)?;
    let square = r.int().map_err(|e| perr(1, e))?;
    r.done().map_err(|e| perr(1, e))?;
    if square.is_zero() || square >= n {
        return Err(fail(1, "challenge out of range"));
    }

    let mut r = open(t, 2, 0x12, Direction::AToB)?;
    let root = r.int().map_err(|e| perr(2, e))?;
    r.done().map_err(|e| perr(2, e))?;
    if root >= n || (&root * &root) % &n != square {
        return Err(fail(2, "returned value is not a root of the challenge"));
    }
    Ok(())
}

fn verify_graph_ot(t: &Transcript) -> Result<(), VerifyError> {
    let mut pr = params_reader(t);
    let g1 = pr.graph().map_err(bad_params)?;
    let g2 = pr.graph().map_err(bad_params)?;
    pr.done().map_err(bad_params)?;
    expect_len(t, 3)?;

    let mut r = open(t, 0, 0x20, Direction::AToB)?;
    let p1 = r.graph().map_err(|e| perr(0, e))?;
    let p2 = r.graph().map_err(|e| perr(0, e))?;
    r.done().map_err(|e| perr(0, e))?;
    if p1 != g1 || p2 != g2 {
        return Err(fail(0, "published pair differs from the agreed one"));
    }

    let mut r = open(t, 1, 0x21, Direction::BToA)?;
    let h = r.graph().map_err(|e| perr(1, e))?;
    r.done().map_err(|e| perr(1, e))?;
    if h.n() != g1.n() {
        return Err(fail(1, "challenge graph has the wrong order"));
    }

    let mut r = open(t, 2, 0x22, Direction::AToB)?;
    let j = r.byte().map_err(|e| perr(2, e))?;
    let phi = r.perm().map_err(|e| perr(2, e))?;
    r.done().map_err(|e| perr(2, e))?;
    if j > 1 {
        return Err(fail(2, "pair index is not a bit"));
    }
    let target = if j == 0 { &g1 } else { &g2 };
    let mapped = apply_perm(&h, &phi).map_err(|e| fail(2, &e.to_string()))?;
    if &mapped != target {
        return Err(fail(2, "revealed map does not carry the challenge onto the named graph"));
    }
    Ok(())
}

fn verify_dlp(t: &Transcript) -> Result<(), VerifyError> {
    let mut pr = params_reader(t);
    let pp = read_dlp_public(&mut pr).map_err(bad_params)?;
    pr.done().map_err(bad_params)?;
    expect_len(t, 2)?;

    let mut r = open(t, 0, 0x30, Direction::BToA)?;
    check_betas(&mut r, &pp, 0)?;
    r.done().map_err(|e| perr(0, e))?;

    let mut r = open(t, 1, 0x31, Direction::AToB)?;
    check_masked(&mut r, &pp, 1)?;
    r.done().map_err(|e| perr(1, e))?;
    Ok(())
}

fn verify_graph_1of2(t: &Transcript) -> Result<(), VerifyError> {
    let mut pr = params_reader(t);
    let g = pr.graph().map_err(bad_params)?;
    let h = pr.graph().map_err(bad_params)?;
    pr.done().map_err(bad_params)?;
    expect_len(t, 2)?;

    let mut r = open(t, 0, 0x40, Direction::BToA)?;
    let pointer = r.byte().map_err(|e| perr(0, e))?;
    let copies = [
        r.graph().map_err(|e| perr(0, e))?,
        r.graph().map_err(|e| perr(0, e))?,
    ];
    r.done().map_err(|e| perr(0, e))?;
    if pointer > 1 {
        return Err(fail(0, "pointer is not a bit"));
    }
    if copies[0].n() != g.n() || copies[1].n() != h.n() {
        return Err(fail(0, "disguised copy has the wrong order"));
    }

    let mut r = open(t, 1, 0x41, Direction::AToB)?;
    let witness = r.witness().map_err(|e| perr(1, e))?;
    r.done().map_err(|e| perr(1, e))?;
    if !copies
        .iter()
        .any(|c| PlantedSolution::validate(c, &witness).is_ok())
    {
        return Err(fail(1, "returned solution is invalid in both copies"));
    }
    Ok(())
}

fn verify_secret_sale(t: &Transcript) -> Result<(), VerifyError> {
    let mut pr = params_reader(t);
    let count = pr.byte().map_err(bad_params)? as usize;
    let mut stock = Vec::with_capacity(count);
    for _ in 0..count {
        stock.push(pr.graph().map_err(bad_params)?);
    }
    pr.done().map_err(bad_params)?;
    expect_len(t, 2)?;

    let mut r = open(t, 0, 0x48, Direction::BToA)?;
    let sent_count = r.byte().map_err(|e| perr(0, e))? as usize;
    let pointer = r.byte().map_err(|e| perr(0, e))? as usize;
    if sent_count != count {
        return Err(fail(0, "stock size differs from the agreed one"));
    }
    if pointer >= count {
        return Err(fail(0, "pointer beyond the stock"));
    }
    let mut copies = Vec::with_capacity(count);
    for _ in 0..count {
        copies.push(r.graph().map_err(|e| perr(0, e))?);
    }
    r.done().map_err(|e| perr(0, e))?;
    if copies.iter().zip(&stock).any(|(c, s)| c.n() != s.n()) {
        return Err(fail(0, "disguised copy has the wrong order"));
    }

    let mut r = open(t, 1, 0x49, Direction::AToB)?;
    let witness = r.witness().map_err(|e| perr(1, e))?;
    r.done().map_err(|e| perr(1, e))?;
    if !copies
        .iter()
        .any(|c| PlantedSolution::validate(c, &witness).is_ok())
    {
        return Err(fail(1, "returned solution is invalid in every copy"));
    }
    Ok(())
}

fn verify_composed(t: &Transcript) -> Result<(), VerifyError> {
    let mut pr = params_reader(t);
    let g1 = pr.graph().map_err(bad_params)?;
    let g2 = pr.graph().map_err(bad_params)?;
    let pp = read_dlp_public(&mut pr).map_err(bad_params)?;
    pr.done().map_err(bad_params)?;
    expect_len(t, 2)?;

    let mut r = open(t, 0, 0x50, Direction::BToA)?;
    let c1 = r.graph().map_err(|e| perr(0, e))?;
    let c2 = r.graph().map_err(|e| perr(0, e))?;
    if c1 != g1 || c2 != g2 {
        return Err(fail(0, "published pair differs from the agreed one"));
    }
    check_betas(&mut r, &pp, 0)?;
    check_betas(&mut r, &pp, 0)?;
    r.done().map_err(|e| perr(0, e))?;

    let mut r = open(t, 1, 0x51, Direction::AToB)?;
    check_masked(&mut r, &pp, 1)?;
    check_masked(&mut r, &pp, 1)?;
    r.done().map_err(|e| perr(1, e))?;
    Ok(())
}

const VERDICT_CONTINUE: u8 = 0;
const VERDICT_REJECT: u8 = 1;
const VERDICT_ACCEPT: u8 = 2;

/// Shared skeleton for the two four-message proof protocols: per round, a
/// commitment, a one-bit challenge, a response checked by `check`, and a
/// verdict that must reflect the check and the round count.
fn verify_proof_rounds<F>(
    t: &Transcript,
    m: u32,
    challenge_tag: u8,
    verdict_tag: u8,
    mut check: F,
) -> Result<(), VerifyError>
where
    F: FnMut(usize, &Transcript, u8) -> Result<bool, VerifyError>,
{
    if m == 0 {
        return Err(VerifyError::BadParams("round count is zero".into()));
    }
    let mut i = 0;
    for round in 0..m {
        // commitment round-index prefix is validated inside `check`
        let mut r = open(t, i + 1, challenge_tag, Direction::BToA)?;
        let sent_round = r.byte().map_err(|e| perr(i + 1, e))?;
        let challenge = r.byte().map_err(|e| perr(i + 1, e))?;
        r.done().map_err(|e| perr(i + 1, e))?;
        if sent_round as u32 != round {
            return Err(fail(i + 1, "round index out of sequence"));
        }
        if challenge > 1 {
            return Err(fail(i + 1, "challenge is not a bit"));
        }

        let ok = check(i, t, challenge)?;

        let mut r = open(t, i + 3, verdict_tag, Direction::BToA)?;
        let verdict_round = r.byte().map_err(|e| perr(i + 3, e))?;
        let code = r.byte().map_err(|e| perr(i + 3, e))?;
        r.done().map_err(|e| perr(i + 3, e))?;
        if verdict_round as u32 != round {
            return Err(fail(i + 3, "round index out of sequence"));
        }
        let expected = if !ok {
            VERDICT_REJECT
        } else if round + 1 < m {
            VERDICT_CONTINUE
        } else {
            VERDICT_ACCEPT
        };
        if code != expected {
            return Err(fail(i + 3, "verdict does not match the recorded round"));
        }
        if code == VERDICT_REJECT || code == VERDICT_ACCEPT {
            return expect_len(t, i + 4);
        }
        i += 4;
    }
    unreachable!("loop always returns at the accepting or rejecting round");
}

fn verify_zkp_qrp(t: &Transcript) -> Result<(), VerifyError> {
    let mut pr = params_reader(t);
    let n = pr.int().map_err(bad_params)?;
    let v = pr.int().map_err(bad_params)?;
    let m = pr.byte().map_err(bad_params)? as u32;
    pr.done().map_err(bad_params)?;
    if v.is_zero() || v >= n {
        return Err(VerifyError::BadParams("public square out of range".into()));
    }

    verify_proof_rounds(t, m, 0x61, 0x63, |i, t, challenge| {
        let mut r = open(t, i, 0x60, Direction::AToB)?;
        let round = r.byte().map_err(|e| perr(i, e))?;
        let a = r.int().map_err(|e| perr(i, e))?;
        r.done().map_err(|e| perr(i, e))?;
        if round as usize != i / 4 {
            return Err(fail(i, "round index out of sequence"));
        }
        if a.is_zero() || a >= n {
            return Err(fail(i, "commitment out of range"));
        }

        let mut r = open(t, i + 2, 0x62, Direction::AToB)?;
        let round = r.byte().map_err(|e| perr(i + 2, e))?;
        let y = r.int().map_err(|e| perr(i + 2, e))?;
        r.done().map_err(|e| perr(i + 2, e))?;
        if round as usize != i / 4 {
            return Err(fail(i + 2, "round index out of sequence"));
        }
        if y >= n {
            return Err(fail(i + 2, "response out of range"));
        }
        let mut rhs = a.clone();
        if challenge == 1 {
            rhs = (rhs * &v) % &n;
        }
        Ok(!y.is_zero() && (&y * &y) % &n == rhs)
    })
}

fn verify_zkp_graph(t: &Transcript) -> Result<(), VerifyError> {
    let mut pr = params_reader(t);
    let g = pr.graph().map_err(bad_params)?;
    let m = pr.byte().map_err(bad_params)? as u32;
    pr.done().map_err(bad_params)?;

    verify_proof_rounds(t, m, 0x69, 0x6b, |i, t, challenge| {
        let mut r = open(t, i, 0x68, Direction::AToB)?;
        let round = r.byte().map_err(|e| perr(i, e))?;
        let copy = r.graph().map_err(|e| perr(i, e))?;
        r.done().map_err(|e| perr(i, e))?;
        if round as usize != i / 4 {
            return Err(fail(i, "round index out of sequence"));
        }
        if copy.n() != g.n() {
            return Err(fail(i, "committed copy has the wrong order"));
        }

        let mut r = open(t, i + 2, 0x6a, Direction::AToB)?;
        let round = r.byte().map_err(|e| perr(i + 2, e))?;
        let echoed = r.byte().map_err(|e| perr(i + 2, e))?;
        if round as usize != i / 4 {
            return Err(fail(i + 2, "round index out of sequence"));
        }
        if echoed != challenge {
            return Err(fail(i + 2, "response answers a different challenge"));
        }
        let ok = if challenge == 0 {
            let perm = r.perm().map_err(|e| perr(i + 2, e))?;
            r.done().map_err(|e| perr(i + 2, e))?;
            perm.n() == g.n() && apply_perm(&g, &perm).map(|p| p == copy).unwrap_or(false)
        } else {
            let witness = r.witness().map_err(|e| perr(i + 2, e))?;
            r.done().map_err(|e| perr(i + 2, e))?;
            PlantedSolution::validate(&copy, &witness).is_ok()
        };
        Ok(ok)
    })
}

fn verify_nonresidue(t: &Transcript) -> Result<(), VerifyError> {
    let mut pr = params_reader(t);
    let n = pr.int().map_err(bad_params)?;
    let y = pr.int().map_err(bad_params)?;
    let tt = pr.byte().map_err(bad_params)? as usize;
    pr.done().map_err(bad_params)?;
    if y.is_zero() || y >= n {
        return Err(VerifyError::BadParams("claimed non-residue out of range".into()));
    }
    expect_len(t, 3)?;

    let mut r = open(t, 0, 0x70, Direction::BToA)?;
    let sent_t = r.byte().map_err(|e| perr(0, e))? as usize;
    if sent_t != tt {
        return Err(fail(0, "challenge count differs from the agreed one"));
    }
    for _ in 0..tt {
        let z = r.int().map_err(|e| perr(0, e))?;
        if z.is_zero() || z >= n || !z.gcd(&n).is_one() {
            return Err(fail(0, "challenge is not a unit"));
        }
    }
    r.done().map_err(|e| perr(0, e))?;

    let mut r = open(t, 1, 0x71, Direction::AToB)?;
    let answers = r.bits().map_err(|e| perr(1, e))?;
    r.done().map_err(|e| perr(1, e))?;
    if answers.len() != tt {
        return Err(fail(1, "answer string has the wrong length"));
    }

    let mut r = open(t, 2, 0x72, Direction::BToA)?;
    let verdict = r.byte().map_err(|e| perr(2, e))?;
    r.done().map_err(|e| perr(2, e))?;
    if verdict > 1 {
        return Err(fail(2, "verdict is not a bit"));
    }
    Ok(())
}

fn verify_coin_qrp(t: &Transcript) -> Result<(), VerifyError> {
    expect_len(t, 3)?;
    let mut r = open(t, 0, 0x80, Direction::AToB)?;
    let n = r.int().map_err(|e| perr(0, e))?;
    let z = r.int().map_err(|e| perr(0, e))?;
    r.done().map_err(|e| perr(0, e))?;

    let mut r = open(t, 1, 0x81, Direction::BToA)?;
    let bet = r.byte().map_err(|e| perr(1, e))?;
    r.done().map_err(|e| perr(1, e))?;

    let mut r = open(t, 2, 0x82, Direction::AToB)?;
    let x = r.int().map_err(|e| perr(2, e))?;
    let y = r.int().map_err(|e| perr(2, e))?;
    let p = r.int().map_err(|e| perr(2, e))?;
    let q = r.int().map_err(|e| perr(2, e))?;
    r.done().map_err(|e| perr(2, e))?;

    let proof_data = crate::wire::Writer::new()
        .int(&n)
        .int(&z)
        .byte(bet)
        .int(&x)
        .int(&y)
        .int(&p)
        .int(&q)
        .finish();
    crate::derived::recompute_qrp_coin(&proof_data)
        .map(|_| ())
        .map_err(|e| perr(2, e))
}

fn verify_coin_general(t: &Transcript) -> Result<(), VerifyError> {
    let mut pr = params_reader(t);
    let p = pr.int().map_err(bad_params)?;
    let g = pr.int().map_err(bad_params)?;
    pr.done().map_err(bad_params)?;
    expect_len(t, 3)?;

    let mut r = open(t, 0, 0x80, Direction::AToB)?;
    let y = r.int().map_err(|e| perr(0, e))?;
    r.done().map_err(|e| perr(0, e))?;

    let mut r = open(t, 1, 0x81, Direction::BToA)?;
    let bet = r.byte().map_err(|e| perr(1, e))?;
    r.done().map_err(|e| perr(1, e))?;

    let mut r = open(t, 2, 0x82, Direction::AToB)?;
    let x = r.int().map_err(|e| perr(2, e))?;
    r.done().map_err(|e| perr(2, e))?;

    let proof_data = crate::wire::Writer::new()
        .int(&p)
        .int(&g)
        .int(&y)
        .byte(bet)
        .int(&x)
        .finish();
    crate::derived::recompute_general_coin(&proof_data)
        .map(|_| ())
        .map_err(|e| perr(2, e))
}

fn verify_secret_exchange(t: &Transcript) -> Result<(), VerifyError> {
    let mut pr = params_reader(t);
    let a_pair = [pr.graph().map_err(bad_params)?, pr.graph().map_err(bad_params)?];
    let b_pair = [pr.graph().map_err(bad_params)?, pr.graph().map_err(bad_params)?];
    let m = pr.byte().map_err(bad_params)? as usize;
    pr.done().map_err(bad_params)?;
    expect_len(t, 4 * m)?;

    let read_challenge = |i: usize, dir: Direction| -> Result<Graph, VerifyError> {
        let mut r = open(t, i, 0x90, dir)?;
        let copy = r.graph().map_err(|e| perr(i, e))?;
        r.done().map_err(|e| perr(i, e))?;
        Ok(copy)
    };
    let check_answer = |i: usize,
                        dir: Direction,
                        copy: &Graph,
                        pair: &[Graph; 2]|
     -> Result<(), VerifyError> {
        let mut r = open(t, i, 0x91, dir)?;
        let named = r.byte().map_err(|e| perr(i, e))?;
        let iso = r.perm().map_err(|e| perr(i, e))?;
        r.done().map_err(|e| perr(i, e))?;
        if named > 1 {
            return Err(fail(i, "named index is not a bit"));
        }
        let target = &pair[named as usize];
        let carried = iso.n() == copy.n()
            && apply_perm(copy, &iso).map(|g| &g == target).unwrap_or(false);
        if !carried {
            return Err(fail(
                i,
                "revealed map does not carry the challenge onto the named graph",
            ));
        }
        Ok(())
    };

    for round in 0..m {
        let i = 4 * round;
        // A challenges with a disguised copy of one of B's graphs, B with
        // one of A's; each response must map the copy onto a named original
        let a_chal = read_challenge(i, Direction::AToB)?;
        let b_chal = read_challenge(i + 1, Direction::BToA)?;
        check_answer(i + 2, Direction::AToB, &b_chal, &a_pair)?;
        check_answer(i + 3, Direction::BToA, &a_chal, &b_pair)?;
    }
    Ok(())
}

fn verify_contract(t: &Transcript) -> Result<(), VerifyError> {
    let mut pr = params_reader(t);
    let hash = pr.raw(32).map_err(bad_params)?.to_vec();
    let n_a = pr.int().map_err(bad_params)?;
    let n_b = pr.int().map_err(bad_params)?;
    let max_rounds = pr.byte().map_err(bad_params)? as usize;
    pr.done().map_err(bad_params)?;

    let check_hash = |r: &mut Reader, i: usize| -> Result<(), VerifyError> {
        let got = r.raw(32).map_err(|e| perr(i, e))?;
        if got != hash.as_slice() {
            return Err(fail(i, "contract hash mismatch"));
        }
        Ok(())
    };

    let mut i = 0;
    let mut cycles = 0usize;
    loop {
        let e = entry(t, i)?;
        match e.message.tag {
            0xa6 | 0xa7 => {
                let mut r = open(t, i, e.message.tag, Direction::AToB)?;
                check_hash(&mut r, i)?;
                r.done().map_err(|e| perr(i, e))?;
                return expect_len(t, i + 1);
            }
            _ => {}
        }
        cycles += 1;
        if cycles > max_rounds {
            return Err(fail(i, "more signing cycles than the agreed budget"));
        }
        // one full cycle: two interleaved root transfers, A's then B's
        for (offset, (offer_tag, chal_tag, root_tag, n, offer_dir)) in [
            (0, (0xa0u8, 0xa1u8, 0xa2u8, &n_a, Direction::AToB)),
            (3, (0xa3, 0xa4, 0xa5, &n_b, Direction::BToA)),
        ] {
            let base = i + offset;
            let chal_dir = match offer_dir {
                Direction::AToB => Direction::BToA,
                Direction::BToA => Direction::AToB,
            };
            let mut r = open(t, base, offer_tag, offer_dir)?;
            check_hash(&mut r, base)?;
            let got = r.byte().map_err(|e| perr(base, e))?;
            let named = r.int().map_err(|e| perr(base, e))?;
            r.done().map_err(|e| perr(base, e))?;
            if got > 1 {
                return Err(fail(base, "progress flag is not a bit"));
            }
            if &named != n {
                return Err(fail(base, "offer names a different modulus"));
            }

            let mut r = open(t, base + 1, chal_tag, chal_dir)?;
            check_hash(&mut r, base + 1)?;
            let square = r.int().map_err(|e| perr(base + 1, e))?;
            r.done().map_err(|e| perr(base + 1, e))?;
            if square.is_zero() || &square >= n {
                return Err(fail(base + 1, "challenge out of range"));
            }

            let mut r = open(t, base + 2, root_tag, offer_dir)?;
            check_hash(&mut r, base + 2)?;
            let root = r.int().map_err(|e| perr(base + 2, e))?;
            r.done().map_err(|e| perr(base + 2, e))?;
            if &root >= n || (&root * &root) % n != square {
                return Err(fail(base + 2, "returned value is not a root of the challenge"));
            }
        }
        i += 6;
    }
}

fn verify_comparison(t: &Transcript) -> Result<(), VerifyError> {
    let mut pr = params_reader(t);
    let pp = read_dlp_public(&mut pr).map_err(bad_params)?;
    pr.done().map_err(bad_params)?;

    let mut r = open(t, 0, 0xb0, Direction::BToA)?;
    let hi = r.byte().map_err(|e| perr(0, e))? as usize;
    let lo = r.byte().map_err(|e| perr(0, e))? as usize;
    let n = hi * 256 + lo;
    if n == 0 {
        return Err(fail(0, "empty comparison"));
    }
    check_betas(&mut r, &pp, 0)?;
    r.done().map_err(|e| perr(0, e))?;
    expect_len(t, 1 + 2 * n + 2)?;

    for pos in 0..n {
        let ia = 1 + 2 * pos;
        let mut r = open(t, ia, 0xb1, Direction::AToB)?;
        check_masked(&mut r, &pp, ia)?;
        check_betas(&mut r, &pp, ia)?;
        r.done().map_err(|e| perr(ia, e))?;

        let ib = ia + 1;
        let mut r = open(t, ib, 0xb2, Direction::BToA)?;
        check_masked(&mut r, &pp, ib)?;
        if pos + 1 < n {
            check_betas(&mut r, &pp, ib)?;
        }
        r.done().map_err(|e| perr(ib, e))?;
    }

    for (i, tag, dir) in [
        (1 + 2 * n, 0xb3, Direction::AToB),
        (2 + 2 * n, 0xb4, Direction::BToA),
    ] {
        let mut r = open(t, i, tag, dir)?;
        let sum = r.bits().map_err(|e| perr(i, e))?;
        r.done().map_err(|e| perr(i, e))?;
        if sum.len() != pp.k {
            return Err(fail(i, "published sum has the wrong width"));
        }
    }
    Ok(())
}

fn verify_millionaires(t: &Transcript) -> Result<(), VerifyError> {
    let mut pr = params_reader(t);
    let pp = read_dlp_public(&mut pr).map_err(bad_params)?;
    let width = pr.byte().map_err(bad_params)? as usize;
    pr.done().map_err(bad_params)?;
    if width == 0 {
        return Err(VerifyError::BadParams("zero bit width".into()));
    }

    let mut r = open(t, 0, 0xb8, Direction::BToA)?;
    let sent_width = r.byte().map_err(|e| perr(0, e))? as usize;
    if sent_width != width {
        return Err(fail(0, "bit width differs from the agreed one"));
    }
    check_betas(&mut r, &pp, 0)?;
    r.done().map_err(|e| perr(0, e))?;

    let mut i = 1;
    for pos in 0..width {
        let mut r = open(t, i, 0xb9, Direction::AToB)?;
        check_masked(&mut r, &pp, i)?;
        check_betas(&mut r, &pp, i)?;
        r.done().map_err(|e| perr(i, e))?;

        let mut r = open(t, i + 1, 0xba, Direction::BToA)?;
        check_masked(&mut r, &pp, i + 1)?;
        r.done().map_err(|e| perr(i + 1, e))?;

        let mut r = open(t, i + 2, 0xbb, Direction::AToB)?;
        let sum_a = r.bits().map_err(|e| perr(i + 2, e))?;
        r.done().map_err(|e| perr(i + 2, e))?;
        if sum_a.len() != pp.k {
            return Err(fail(i + 2, "published sum has the wrong width"));
        }

        let mut r = open(t, i + 3, 0xbc, Direction::BToA)?;
        let sum_b = r.bits().map_err(|e| perr(i + 3, e))?;
        let marker = r.byte().map_err(|e| perr(i + 3, e))?;
        if sum_b.len() != pp.k {
            return Err(fail(i + 3, "published sum has the wrong width"));
        }
        let differ = sum_a != sum_b;
        match marker {
            0 => {
                r.done().map_err(|e| perr(i + 3, e))?;
                if !differ {
                    return Err(fail(i + 3, "stop marker without a sum difference"));
                }
                return expect_len(t, i + 4);
            }
            2 => {
                r.done().map_err(|e| perr(i + 3, e))?;
                if differ {
                    return Err(fail(i + 3, "end marker despite a sum difference"));
                }
                if pos + 1 != width {
                    return Err(fail(i + 3, "end marker before the last position"));
                }
                return expect_len(t, i + 4);
            }
            1 => {
                if differ {
                    return Err(fail(i + 3, "continuation despite a sum difference"));
                }
                if pos + 1 >= width {
                    return Err(fail(i + 3, "continuation past the last position"));
                }
                check_betas(&mut r, &pp, i + 3)?;
                r.done().map_err(|e| perr(i + 3, e))?;
            }
            _ => return Err(fail(i + 3, "unknown marker")),
        }
        i += 4;
    }
    unreachable!("loop always returns at a stop or end marker");
}

#[cfg(test)]
mod tests {
    use super::super::{all_specs, run_configured, RunConfig};
    use super::*;
    use crate::session::{write_log, InProcTransport};

    /// Every honest run of every shipped protocol verifies from its stored
    /// log alone.
    #[test]
    fn honest_logs_verify() {
        for spec in all_specs() {
            let cfg = RunConfig::new(spec.id, 21, 22);
            let mut t = InProcTransport::new();
            let out = run_configured(&cfg, &mut t).unwrap();
            let text = write_log(&out.result.transcript);
            verify_transcript_text(&text)
                .unwrap_or_else(|e| panic!("{} failed offline verification: {e}", spec.id));
        }
    }

    /// Cheating prover runs still produce valid logs: the recorded verdicts
    /// match the recorded rounds.
    #[test]
    fn cheat_logs_verify() {
        for id in ["zkp-qrp-cheat", "zkp-graph-cheat"] {
            for seed in 0..6u64 {
                let cfg = RunConfig::new(id, seed, seed + 100);
                let mut t = InProcTransport::new();
                let out = run_configured(&cfg, &mut t).unwrap();
                let text = write_log(&out.result.transcript);
                verify_transcript_text(&text).unwrap_or_else(|e| panic!("{id}: {e}"));
            }
        }
    }

    /// Single-bit tampering anywhere in the log must be caught, either by
    /// the integrity line or by a replayed check.
    #[test]
    fn single_bit_tampering_is_always_detected() {
        let cfg = RunConfig::new("coin-flip-qrp", 7, 9);
        let mut t = InProcTransport::new();
        let out = run_configured(&cfg, &mut t).unwrap();
        let text = write_log(&out.result.transcript);
        assert!(verify_transcript_text(&text).is_ok());
        let bytes = text.as_bytes();
        let mut caught = 0;
        let mut total = 0;
        for pos in 0..bytes.len() {
            for bit in 0..8 {
                total += 1;
                let mut tampered = bytes.to_vec();
                tampered[pos] ^= 1 << bit;
                let ok = match String::from_utf8(tampered) {
                    Ok(s) => verify_transcript_text(&s).is_ok(),
                    Err(_) => false,
                };
                if !ok {
                    caught += 1;
                }
            }
        }
        assert_eq!(caught, total, "some tampered logs went undetected");
    }

    /// A forged verdict in a cheat transcript (flipping a recorded REJECT to
    /// ACCEPT, with the checksum recomputed) is caught by the replay.
    #[test]
    fn rewritten_verdict_is_caught_by_replay() {
        let mut found = false;
        for seed in 0..40u64 {
            let mut cfg = RunConfig::new("zkp-qrp-cheat", seed, seed + 1);
            cfg.m = 1;
            let mut t = InProcTransport::new();
            let out = run_configured(&cfg, &mut t).unwrap();
            let mut transcript = out.result.transcript;
            let last = transcript.entries.last().unwrap();
            if last.message.payload == vec![0, VERDICT_REJECT] {
                found = true;
                transcript.entries.last_mut().unwrap().message.payload =
                    vec![0, VERDICT_ACCEPT];
                let text = write_log(&transcript);
                match verify_transcript_text(&text) {
                    Err(VerifyError::Check { reason, .. }) => {
                        assert!(reason.contains("verdict"), "{reason}")
                    }
                    other => panic!("forged verdict slipped through: {other:?}"),
                }
                break;
            }
        }
        assert!(found, "no rejected cheat round found in 40 seeds");
    }

    #[test]
    fn truncated_log_is_a_framing_error() {
        let cfg = RunConfig::new("rabin-ot", 1, 2);
        let mut t = InProcTransport::new();
        let out = run_configured(&cfg, &mut t).unwrap();
        let text = write_log(&out.result.transcript);
        let cut = &text[..text.len() / 2];
        assert!(matches!(
            verify_transcript_text(cut),
            Err(VerifyError::Log(_))
        ));
    }
}
