//! The release gate: ten end-to-end checks of the library's headline
//! probability and correctness claims, each printing one pass line. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::HashMap;
use std::time::Instant;

use num_bigint::BigUint;

use twoparty::bits::Bits;
use twoparty::catalog::{run_configured, verify_transcript_text, RunConfig};
use twoparty::commitment::{
    dlp_commit, dlp_verify, flip_bit, graph_commit, graph_verify, qrp_commit, qrp_verify,
    DlpOpening, GraphParams, QrpOpening, QrpParams,
};
use twoparty::derived::{
    run_coin_flip_qrp, run_millionaires, run_string_verification, run_tscp, CoinFlipQrpA,
    CoinFlipQrpB, ComparisonInput, COIN_FLIP_QRP_SPEC, VERDICT_POSSIBLY_EQUAL,
};
use twoparty::graphs::{find_isomorphism, gen_hamiltonian_graph};
use twoparty::numtheory::{
    big, factor_from_roots, gen_blum, gen_field, jacobi, BlumModulus,
};
use twoparty::oblivious::{
    run_dlp_1of2, run_rabin, DlpOtParams, DlpReceiver, DlpSender, RabinOutcome, TwoSecrets,
    DLP_1OF2_SPEC,
};
use twoparty::session::{
    run_session, write_log, InProcTransport, LoopbackTransport, Message, Role, Scripted,
    SessionError, SessionRng,
};
use twoparty::stats::{chi_square_homogeneity, success_rate, run_trials};
use twoparty::wire::Reader;
use twoparty::zkproof::{
    qrp_zkp_simulate, run_graph_zkp, run_graph_zkp_cheat, run_qrp_zkp, run_qrp_zkp_cheat,
    QrpIdentity,
};

use rand::{Rng, SeedableRng};

fn pass(n: u32, what: &str) {
    println!("criterion {n}: pass - {what}");
}

// -------------------------------------------------------------------------
// 1. The square-root transfer delivers the factorization half the time.

#[test]
fn criterion_01_rabin_transfer_rate() {
    let started = Instant::now();
    let mut rng = SessionRng::seed_from_u64(0x0101);
    let modulus = gen_blum(64, &mut rng);
    let est = success_rate(10_000, |i| {
        let mut t = InProcTransport::new();
        let (_, outcome) = run_rabin(modulus.clone(), 2 * i, 2 * i + 1, &mut t).unwrap();
        matches!(outcome, RabinOutcome::Factors(_, _))
    });
    assert!(
        (est.rate - 0.5).abs() <= 0.02,
        "factorization rate {} outside 0.50 +- 0.02",
        est.rate
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    pass(
        1,
        &format!(
            "10^4 transfers at 64 bits: receiver factored N at rate {:.4} in {elapsed:?}",
            est.rate
        ),
    );
}

// -------------------------------------------------------------------------
// 2. The sender learns nothing: B's published square is distributed
//    identically whether or not the transfer succeeded.

#[test]
fn criterion_02_rabin_obliviousness() {
    let modulus = BlumModulus::new(big(3), big(7), false).unwrap();
    let samples: Vec<(bool, String)> = run_trials(4_000, |i| {
        let mut t = InProcTransport::new();
        let (result, outcome) =
            run_rabin(modulus.clone(), 2 * i, 2 * i + 1, &mut t).unwrap();
        let mut r = Reader::new(&result.transcript.entries[1].message.payload);
        let x_squared = r.int().unwrap();
        (
            matches!(outcome, RabinOutcome::Factors(_, _)),
            x_squared.to_string(),
        )
    });
    let mut on_success: HashMap<String, u64> = HashMap::new();
    let mut on_failure: HashMap<String, u64> = HashMap::new();
    for (succeeded, key) in samples {
        let map = if succeeded { &mut on_success } else { &mut on_failure };
        *map.entry(key).or_insert(0) += 1;
    }
    let test = chi_square_homogeneity(&on_success, &on_failure);
    assert!(
        test.p_value > 0.01,
        "published squares depend on the outcome: p = {}",
        test.p_value
    );
    pass(
        2,
        &format!(
            "sender's view of x^2 at N=21 is outcome-independent (chi-square p = {:.3})",
            test.p_value
        ),
    );
}

// -------------------------------------------------------------------------
// 3. Number-theory kernels agree with exhaustive enumeration.

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Legendre symbol by enumerating every square modulo the prime.
fn oracle_legendre(a: u64, p: u64) -> i8 {
    if a % p == 0 {
        return 0;
    }
    for x in 1..p {
        if (x * x) % p == a % p {
            return 1;
        }
    }
    -1
}

#[test]
fn criterion_03_numtheory_against_enumeration() {
    let mut mismatches = 0u64;
    for (p, q) in [(3u64, 7u64), (3, 11), (7, 11)] {
        let n = p * q;
        let modulus = BlumModulus::new(big(p), big(q), false).unwrap();
        for a in 1..n {
            if gcd(a, n) != 1 {
                continue;
            }
            let want_jacobi = oracle_legendre(a, p) * oracle_legendre(a, q);
            if jacobi(&big(a), &big(n)).unwrap() != want_jacobi {
                mismatches += 1;
            }

            let roots: Vec<u64> = (1..n)
                .filter(|x| gcd(*x, n) == 1 && (x * x) % n == a)
                .collect();
            let want_qr = !roots.is_empty();
            if modulus.is_qr(&big(a)).unwrap() != want_qr {
                mismatches += 1;
            }
            if !want_qr {
                continue;
            }

            let mut got: Vec<BigUint> =
                modulus.four_square_roots(&big(a)).unwrap().to_vec();
            got.sort();
            let want: Vec<BigUint> = roots.iter().map(|&x| big(x)).collect();
            if got != want {
                mismatches += 1;
            }

            // any non-negated pair of roots recovers the factorization
            let r1 = roots[0];
            let r2 = *roots
                .iter()
                .find(|&&r| r != r1 && r1 + r != n)
                .expect("a residue has four roots");
            let (f1, f2) = factor_from_roots(&big(r1), &big(r2), &big(n)).unwrap();
            if !(f1 == big(p) && f2 == big(q)) && !(f1 == big(q) && f2 == big(p)) {
                mismatches += 1;
            }
        }
    }
    assert_eq!(mismatches, 0);
    pass(
        3,
        "jacobi, residuosity, roots and factoring match enumeration at N in {21, 33, 77}",
    );
}

// -------------------------------------------------------------------------
// 4. The discrete-log one-of-two transfer: exact recovery, and a receiver
//    whose betas break the published product is always caught.

#[test]
fn criterion_04_dlp_one_of_two() {
    let mut setup = SessionRng::seed_from_u64(0x0404);
    let params = DlpOtParams::new(gen_field(16, &mut setup), 8);

    let wrong: u64 = run_trials(1_000, |i| {
        let mut rng = SessionRng::seed_from_u64(i);
        let secrets = TwoSecrets::random(8, &mut rng);
        let choice = rng.gen::<bool>();
        let mut t = InProcTransport::new();
        let (_, got) =
            run_dlp_1of2(&params, secrets.clone(), choice, 2 * i, 2 * i + 1, &mut t).unwrap();
        (&got != secrets.get(choice)) as u64
    })
    .iter()
    .sum();
    assert_eq!(wrong, 0, "a receiver recovered something else");

    let g = params.field.g().clone();
    let p = params.field.p().clone();
    let mut rejected = 0u32;
    for i in 0..100u64 {
        let mut rng = SessionRng::seed_from_u64(i);
        let secrets = TwoSecrets::random(8, &mut rng);
        let mut sender = DlpSender::new(params.clone(), secrets);
        // multiply beta_1 by g: the product misses c, for any honest beta_0
        let (g, p) = (g.clone(), p.clone());
        let mut receiver =
            Scripted::new(DlpReceiver::new(params.clone(), false), move |idx, msg| {
                if idx == 0 {
                    let mut r = Reader::new(&msg.payload);
                    let beta0 = r.int().unwrap();
                    let beta1 = r.int().unwrap();
                    let forged = (beta1 * &g) % &p;
                    Message::new(
                        msg.tag,
                        twoparty::wire::Writer::new().int(&beta0).int(&forged).finish(),
                    )
                } else {
                    msg
                }
            });
        let mut t = InProcTransport::new();
        let err = run_session(
            DLP_1OF2_SPEC.id,
            Vec::new(),
            &mut sender,
            &mut receiver,
            Role::B,
            3 * i,
            3 * i + 1,
            &mut t,
        )
        .unwrap_err();
        if let SessionError::Abort { role: Role::A, reason, .. } = err {
            assert!(reason.contains("beta product"), "{reason}");
            rejected += 1;
        }
    }
    assert_eq!(rejected, 100, "a forged beta pair slipped through");
    pass(
        4,
        "10^3 transfers recovered the chosen secret exactly; 100/100 beta forgeries rejected",
    );
}

// -------------------------------------------------------------------------
// 5. The residuosity coin flip is fair, and a modulus outside Blum form is
//    always refused.

#[test]
fn criterion_05_coin_flip_fairness_and_modulus_check() {
    let est = success_rate(10_000, |i| {
        let mut t = InProcTransport::new();
        let (_, coin) = run_coin_flip_qrp(16, 2 * i, 2 * i + 1, &mut t).unwrap();
        coin.winner == Role::B
    });
    assert!(
        (est.rate - 0.5).abs() <= 0.02,
        "B-win rate {} outside 0.50 +- 0.02",
        est.rate
    );

    // moduli with a factor congruent to 1 mod 4 admit root pairs that let
    // the flipper pick the parity after seeing the bet
    let mut rejections = 0u32;
    let mut attempts = 0u32;
    for (p, q) in [(13u64, 7u64), (5, 7), (13, 3), (17, 7), (5, 11)] {
        let bad = BlumModulus::new(big(p), big(q), false).unwrap();
        for s in 0..20u64 {
            attempts += 1;
            let mut a = CoinFlipQrpA::with_modulus(bad.clone());
            let mut b = CoinFlipQrpB::new();
            let mut t = InProcTransport::new();
            let err = run_session(
                COIN_FLIP_QRP_SPEC.id,
                Vec::new(),
                &mut a,
                &mut b,
                Role::A,
                2 * s,
                2 * s + 1,
                &mut t,
            )
            .unwrap_err();
            if let SessionError::Abort { role: Role::B, reason, .. } = err {
                assert!(reason.contains("Blum"), "{reason}");
                rejections += 1;
            }
        }
    }
    assert_eq!(rejections, attempts, "a non-Blum modulus was accepted");
    pass(
        5,
        &format!(
            "10^4 flips: B won at rate {:.4}; {attempts}/{attempts} non-Blum moduli refused",
            est.rate
        ),
    );
}

// -------------------------------------------------------------------------
// 6. The comparison family: equal inputs always compare equal, unequal ones
//    escape at the advertised mask rates, and the wealth comparison agrees
//    with direct comparison.

#[test]
fn criterion_06_comparison_family() {
    let mut setup = SessionRng::seed_from_u64(0x0606);
    let params3 = DlpOtParams::new(gen_field(16, &mut setup), 3);

    let unequal_verdicts: u64 = run_trials(500, |i| {
        let mut rng = SessionRng::seed_from_u64(i);
        let secret = Bits::random(8, &mut rng);
        let a_input = ComparisonInput::random(secret.clone(), params3.k, &mut rng);
        let b_input = ComparisonInput::random(secret, params3.k, &mut rng);
        let mut t = InProcTransport::new();
        let (_, va, vb) =
            run_tscp(&params3, a_input, b_input, 2 * i, 2 * i + 1, &mut t).unwrap();
        (va != VERDICT_POSSIBLY_EQUAL || vb != VERDICT_POSSIBLY_EQUAL) as u64
    })
    .iter()
    .sum();
    assert_eq!(unequal_verdicts, 0, "equal inputs compared unequal");

    // strings differing in one position escape with probability 2^-k
    let s_a = Bits::parse("10101010").unwrap();
    let s_b = Bits::parse("10101011").unwrap();
    let mut rates = Vec::new();
    for (k, expected) in [(1usize, 0.5f64), (2, 0.25), (4, 0.0625)] {
        let mut setup_k = SessionRng::seed_from_u64(0x0660 + k as u64);
        let params = DlpOtParams::new(gen_field(16, &mut setup_k), k);
        let est = success_rate(10_000, |i| {
            let mut t = InProcTransport::new();
            let (_, va, _) =
                run_string_verification(&params, &s_a, &s_b, 2 * i, 2 * i + 1, &mut t).unwrap();
            va == VERDICT_POSSIBLY_EQUAL
        });
        assert!(
            (est.rate - expected).abs() <= 0.02,
            "k={k}: false-equal rate {} outside {expected} +- 0.02",
            est.rate
        );
        rates.push(format!("k={k}: {:.4}", est.rate));
    }

    // 32 mask bits: a masked-sum collision at a differing position is a
    // 2^-32 event, so the verdict always matches direct comparison
    let wealth_params = DlpOtParams::new(gen_field(32, &mut setup), 32);
    let wrong: u64 = run_trials(10_000, |i| {
        let mut rng = SessionRng::seed_from_u64(i);
        let w_a = rng.gen::<u32>() as u64;
        let w_b = rng.gen::<u32>() as u64;
        let mut t = InProcTransport::new();
        let (_, va, vb) =
            run_millionaires(&wealth_params, w_a, w_b, 32, 2 * i, 2 * i + 1, &mut t).unwrap();
        let want = if w_a > w_b { 0u8 } else { 1 };
        (va != want || vb != want) as u64
    })
    .iter()
    .sum();
    assert_eq!(wrong, 0, "a wealth comparison disagreed with direct comparison");
    pass(
        6,
        &format!(
            "equal inputs 500/500 equal; false-equal rates {}; 10^4 wealth comparisons exact",
            rates.join(", ")
        ),
    );
}

// -------------------------------------------------------------------------
// 7. Commitments: complete, binding, and tamper-evident.

#[test]
fn criterion_07_commitments() {
    let mut rng = SessionRng::seed_from_u64(0x0707);

    // completeness: 1000 commit/open cycles per scheme
    for i in 0..1000u64 {
        let b = i % 2 == 0;
        let params = QrpParams::generate(16, &mut rng);
        let (commitment, opening) = qrp_commit(b, params, &mut rng);
        qrp_verify(&commitment, &opening).unwrap();

        let field = gen_field(12, &mut rng);
        let p: u64 = field.p().try_into().unwrap();
        let x = big(rng.gen_range(2..p - 1));
        let (commitment, opening) = dlp_commit(&x, &field).unwrap();
        dlp_verify(&commitment, &opening).unwrap();

        let params = GraphParams::generate(3 + (i % 6) as usize, &mut rng);
        let (commitment, opening) = graph_commit(b, &params, &mut rng).unwrap();
        graph_verify(&commitment, &opening).unwrap();
    }

    // binding, exhaustively at desk scale:
    // residuosity at N=21: no unit opens the envelope to the other bit
    let n21 = || {
        QrpParams::from_parts(BlumModulus::new(big(3), big(7), true).unwrap(), big(5)).unwrap()
    };
    for b in [false, true] {
        let (commitment, opening) = qrp_commit(b, n21(), &mut rng);
        for r2 in 1u64..21 {
            if gcd(r2, 21) != 1 {
                continue;
            }
            let fake = QrpOpening {
                b: !b,
                r: big(r2),
                p: opening.p.clone(),
                q: opening.q.clone(),
            };
            assert!(qrp_verify(&commitment, &fake).is_err(), "bound broke at r={r2}");
        }
    }

    // discrete log: injective over the full exponent range for every prime
    // up to 1000 (so no envelope has a second opening)
    let primes: Vec<u64> = (3u64..=1000).filter(|&p| (2..p).all(|d| d * d > p || p % d != 0)).collect();
    for &p in &primes {
        let g = (2..p)
            .find(|&g| {
                let mut seen = 1u64;
                let mut acc = 1u64;
                for _ in 0..p - 2 {
                    acc = acc * g % p;
                    if acc == 1 {
                        break;
                    }
                    seen += 1;
                }
                seen == p - 1
            })
            .expect("every prime has a primitive root");
        let mut seen = vec![false; p as usize];
        for x in 2..p - 1 {
            let y = mod_pow_u64(g, x, p) as usize;
            assert!(!seen[y], "collision at p={p} x={x}");
            seen[y] = true;
        }
    }

    // graphs: no relabeling of the unchosen graph reaches the witness
    for n in 3..=10usize {
        for b in [false, true] {
            let params = GraphParams::generate(n, &mut rng);
            let (commitment, _) = graph_commit(b, &params, &mut rng).unwrap();
            let other = if b { &params.g } else { &params.h };
            assert!(
                find_isomorphism(other, &commitment.witness).unwrap().is_none(),
                "unchosen graph reaches the witness at n={n}"
            );
        }
    }

    // tamper evidence: every envelope bit flip that changes the value is
    // rejected on opening
    let mut flipped = 0u32;
    for i in 0..400u64 {
        let params = QrpParams::generate(16, &mut rng);
        let (mut commitment, opening) = qrp_commit(i % 2 == 0, params, &mut rng);
        let mut bytes = commitment.c.to_bytes_be();
        let bit = rng.gen::<usize>() % (bytes.len() * 8);
        flip_bit(&mut bytes, bit);
        let tampered = BigUint::from_bytes_be(&bytes) % &commitment.n;
        if tampered != commitment.c {
            commitment.c = tampered;
            assert!(qrp_verify(&commitment, &opening).is_err());
            flipped += 1;
        }

        let field = gen_field(12, &mut rng);
        let (mut commitment, opening) = dlp_commit(&big(5), &field).unwrap();
        let mut bytes = commitment.y.to_bytes_be();
        let bit = rng.gen::<usize>() % (bytes.len() * 8);
        flip_bit(&mut bytes, bit);
        let tampered = BigUint::from_bytes_be(&bytes) % field.p();
        if tampered != commitment.y {
            commitment.y = tampered;
            assert!(dlp_verify(&commitment, &DlpOpening { x: opening.x.clone() }).is_err());
            flipped += 1;
        }

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
        flipped += 1;
    }
    pass(
        7,
        &format!(
            "3000 cycles complete; binding exhaustive (N=21, primes <= 1000, n <= 10); {flipped} tampered envelopes rejected"
        ),
    );
}

fn mod_pow_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

// -------------------------------------------------------------------------
// 8. Proof soundness: honest provers always convince; a prover without the
//    secret survives each round with probability one half.

#[test]
fn criterion_08_proof_soundness() {
    // honest completeness, exactly
    let honest_qrp: u64 = run_trials(1_000, |i| {
        let mut rng = SessionRng::seed_from_u64(i);
        let identity = QrpIdentity::setup(16, &mut rng);
        let mut t = InProcTransport::new();
        let (_, verdict) = run_qrp_zkp(identity, 3, 2 * i, 2 * i + 1, &mut t).unwrap();
        verdict.accepted as u64
    })
    .iter()
    .sum();
    assert_eq!(honest_qrp, 1_000);
    let honest_graph: u64 = run_trials(1_000, |i| {
        let mut rng = SessionRng::seed_from_u64(i);
        let planted = gen_hamiltonian_graph(8, 4, &mut rng);
        let mut t = InProcTransport::new();
        let (_, verdict) = run_graph_zkp(planted, 3, 2 * i, 2 * i + 1, &mut t).unwrap();
        verdict.accepted as u64
    })
    .iter()
    .sum();
    assert_eq!(honest_graph, 1_000);

    // per-round cheating success, both protocols
    let mut rng = SessionRng::seed_from_u64(0x0808);
    let modulus = gen_blum(16, &mut rng);
    let v = modulus.sample_nonresidue_jacobi1(&mut rng);
    let n = modulus.n().clone();
    let qrp_round = success_rate(10_000, |i| {
        let mut t = InProcTransport::new();
        let (_, verdict) = run_qrp_zkp_cheat(&n, &v, 1, 2 * i, 2 * i + 1, &mut t).unwrap();
        verdict.accepted
    });
    assert!((qrp_round.rate - 0.5).abs() <= 0.02, "qrp cheat round rate {}", qrp_round.rate);
    let g = gen_hamiltonian_graph(8, 4, &mut rng).graph;
    let graph_round = success_rate(10_000, |i| {
        let mut t = InProcTransport::new();
        let (_, verdict) = run_graph_zkp_cheat(&g, 1, 2 * i, 2 * i + 1, &mut t).unwrap();
        verdict.accepted
    });
    assert!(
        (graph_round.rate - 0.5).abs() <= 0.02,
        "graph cheat round rate {}",
        graph_round.rate
    );

    // six rounds: full-proof cheating success within 3 sigma of 2^-6
    let qrp_full = success_rate(10_000, |i| {
        let mut t = InProcTransport::new();
        let (_, verdict) = run_qrp_zkp_cheat(&n, &v, 6, 2 * i, 2 * i + 1, &mut t).unwrap();
        verdict.accepted
    });
    assert!(qrp_full.sigmas_from(1.0 / 64.0) <= 3.0, "qrp full-cheat rate {}", qrp_full.rate);
    let graph_full = success_rate(10_000, |i| {
        let mut t = InProcTransport::new();
        let (_, verdict) = run_graph_zkp_cheat(&g, 6, 2 * i, 2 * i + 1, &mut t).unwrap();
        verdict.accepted
    });
    assert!(
        graph_full.sigmas_from(1.0 / 64.0) <= 3.0,
        "graph full-cheat rate {}",
        graph_full.rate
    );
    pass(
        8,
        &format!(
            "honest 2000/2000 accepted; cheat rounds {:.4}/{:.4}; six-round cheats {:.4}/{:.4} near 2^-6",
            qrp_round.rate, graph_round.rate, qrp_full.rate, graph_full.rate
        ),
    );
}

// -------------------------------------------------------------------------
// 9. Zero knowledge: simulated transcripts are indistinguishable from honest
//    ones, and the rewinding simulator averages two attempts per round.

#[test]
fn criterion_09_simulation_indistinguishability() {
    const TRIALS: u64 = 100_000;
    let identity = QrpIdentity::new(big(21), big(2)).unwrap();
    let honest: Vec<String> = run_trials(TRIALS, |i| {
        let mut t = InProcTransport::new();
        let (result, verdict) =
            run_qrp_zkp(identity.clone(), 1, 2 * i, 2 * i + 1, &mut t).unwrap();
        assert!(verdict.accepted);
        let entries = &result.transcript.entries;
        let mut r = Reader::new(&entries[0].message.payload);
        r.byte().unwrap();
        let a = r.int().unwrap();
        let mut r = Reader::new(&entries[1].message.payload);
        r.byte().unwrap();
        let challenge = r.byte().unwrap();
        let mut r = Reader::new(&entries[2].message.payload);
        r.byte().unwrap();
        let y = r.int().unwrap();
        format!("a={a} r={challenge} y={y}")
    });
    let simulated: Vec<(String, u32)> = run_trials(TRIALS, |i| {
        let rounds = qrp_zkp_simulate(&big(21), &big(4), 1, i, TRIALS + i).unwrap();
        let round = &rounds[0];
        (
            format!("a={} r={} y={}", round.a, round.challenge, round.y),
            round.attempts,
        )
    });

    let mut honest_counts: HashMap<String, u64> = HashMap::new();
    for key in honest {
        *honest_counts.entry(key).or_insert(0) += 1;
    }
    let mut sim_counts: HashMap<String, u64> = HashMap::new();
    let mut attempts_total = 0u64;
    for (key, attempts) in simulated {
        *sim_counts.entry(key).or_insert(0) += 1;
        attempts_total += attempts as u64;
    }
    let test = chi_square_homogeneity(&honest_counts, &sim_counts);
    assert!(
        test.p_value > 0.01,
        "simulated transcripts are distinguishable: p = {}",
        test.p_value
    );
    let mean_attempts = attempts_total as f64 / TRIALS as f64;
    assert!(
        (mean_attempts - 2.0).abs() <= 0.1,
        "mean rewinds {mean_attempts} outside 2.0 +- 0.1"
    );
    pass(
        9,
        &format!(
            "10^5 simulated vs honest transcripts: chi-square p = {:.3}, mean rewinds {:.3}",
            test.p_value, mean_attempts
        ),
    );
}

// -------------------------------------------------------------------------
// 10. Transcripts are reproducible and tamper-evident.

#[test]
fn criterion_10_transcript_integrity() {
    for id in ["rabin-ot", "coin-flip-qrp", "millionaires"] {
        let mut cfg = RunConfig::new(id, 101, 202);
        cfg.bits = 24;
        let mut first = InProcTransport::new();
        let a = run_configured(&cfg, &mut first).unwrap();
        let mut second = InProcTransport::new();
        let b = run_configured(&cfg, &mut second).unwrap();
        let mut loopback = LoopbackTransport::new().unwrap();
        let c = run_configured(&cfg, &mut loopback).unwrap();
        let log = write_log(&a.result.transcript);
        assert_eq!(log, write_log(&b.result.transcript), "{id}: repeat differs");
        assert_eq!(log, write_log(&c.result.transcript), "{id}: transport differs");
    }

    let mut cfg = RunConfig::new("coin-flip-qrp", 11, 12);
    cfg.bits = 24;
    let mut t = InProcTransport::new();
    let out = run_configured(&cfg, &mut t).unwrap();
    let log = write_log(&out.result.transcript);
    verify_transcript_text(&log).unwrap();

    let mut rng = SessionRng::seed_from_u64(0x1010);
    let mut undetected = 0u32;
    for _ in 0..1000 {
        let mut bytes = log.clone().into_bytes();
        let bit = rng.gen::<usize>() % (bytes.len() * 8);
        flip_bit(&mut bytes, bit);
        let tampered = String::from_utf8_lossy(&bytes).into_owned();
        if verify_transcript_text(&tampered).is_ok() {
            undetected += 1;
        }
    }
    assert_eq!(undetected, 0, "{undetected} single-bit flips went unnoticed");
    pass(
        10,
        "transcripts byte-identical across repeats and transports; 1000/1000 bit flips detected",
    );
}
