//! Modular arithmetic and finite-field primitives: primality testing, Jacobi
//! and Legendre symbols, square roots modulo composites with known
//! factorization, and parameter generation for the QRP and DLP settings.
//!
//! Everything is arbitrary precision and works from 6-bit toy parameters (so
//! oracles can enumerate) up to 512-bit moduli. All randomness comes from an
//! injected stream; nothing here touches ambient entropy.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum NumTheoryError {
    #[error("modulus must be odd and at least 3")]
    EvenOrSmallModulus,
    #[error("value shares a nontrivial factor with the modulus")]
    NotCoprime,
    #[error("value is not a quadratic residue")]
    NotAResidue,
    #[error("square roots are trivially related, no factor")]
    TrivialRoots,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

/// An integer reduced modulo `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residue {
    value: BigUint,
    modulus: BigUint,
}

impl Residue {
    pub fn new(value: BigUint, modulus: BigUint) -> Result<Self, NumTheoryError> {
        if modulus < big(2) {
            return Err(NumTheoryError::InvalidParameter(
                "modulus must be at least 2".into(),
            ));
        }
        Ok(Residue {
            value: value % &modulus,
            modulus,
        })
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    /// `self^exp mod m` by square and multiply.
    pub fn pow(&self, exp: &BigUint) -> Residue {
        Residue {
            value: self.value.modpow(exp, &self.modulus),
            modulus: self.modulus.clone(),
        }
    }

    pub fn mul(&self, other: &BigUint) -> Residue {
        Residue {
            value: (&self.value * (other % &self.modulus)) % &self.modulus,
            modulus: self.modulus.clone(),
        }
    }

    pub fn square(&self) -> Residue {
        self.mul(&self.value.clone())
    }

    pub fn invert(&self) -> Result<Residue, NumTheoryError> {
        Ok(Residue {
            value: mod_inverse(&self.value, &self.modulus)?,
            modulus: self.modulus.clone(),
        })
    }
}

/// `base^exp mod m`, the workhorse behind every g^x and s^2 in the protocols.
pub fn mod_pow(base: &BigUint, exp: &BigUint, modulus: &BigUint) -> BigUint {
    base.modpow(exp, modulus)
}

/// Inverse of `a` modulo `m` via the extended Euclidean algorithm.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Result<BigUint, NumTheoryError> {
    let e = a.to_bigint().extended_gcd(&m.to_bigint());
    if !e.gcd.is_one() {
        return Err(NumTheoryError::NotCoprime);
    }
    let m_signed = m.to_bigint();
    let mut x = e.x % &m_signed;
    if x.sign() == num_bigint::Sign::Minus {
        x += &m_signed;
    }
    Ok(x.to_biguint().expect("reduced to nonnegative"))
}

trait ToBigint {
    fn to_bigint(&self) -> num_bigint::BigInt;
}

impl ToBigint for BigUint {
    fn to_bigint(&self) -> num_bigint::BigInt {
        num_bigint::BigInt::from(self.clone())
    }
}

const SMALL_PRIMES: [u64; 40] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173,
];

/// Miller-Rabin over the first 40 primes as bases, after trial division.
/// The first 13 bases are a deterministic witness set far past 3.3e14, so the
/// test is exact for every desk-scale input.
pub fn is_prime(n: &BigUint) -> bool {
    if *n < big(2) {
        return false;
    }
    for &p in SMALL_PRIMES.iter() {
        let bp = big(p);
        if *n == bp {
            return true;
        }
        if (n % &bp).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in SMALL_PRIMES.iter() {
        let mut x = big(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 0..s.saturating_sub(1) {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Jacobi symbol (a/n) by quadratic reciprocity; never factors n.
pub fn jacobi(a: &BigUint, n: &BigUint) -> Result<i8, NumTheoryError> {
    if n.is_even() || *n < big(3) {
        return Err(NumTheoryError::EvenOrSmallModulus);
    }
    let mut a = a % n;
    let mut n = n.clone();
    let mut t: i8 = 1;
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        a >>= tz;
        if tz % 2 == 1 {
            let r = (&n % big(8)).to_u64_digits();
            let r = r.first().copied().unwrap_or(0);
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if (&a % big(4)) == big(3) && (&n % big(4)) == big(3) {
            t = -t;
        }
        a %= &n;
    }
    if n.is_one() {
        Ok(t)
    } else {
        Ok(0)
    }
}

/// Legendre symbol (a/p) for an odd prime p, via Euler's criterion.
pub fn legendre(a: &BigUint, p: &BigUint) -> i8 {
    let e = (p - BigUint::one()) >> 1;
    let r = a.modpow(&e, p);
    if r.is_zero() {
        0
    } else if r.is_one() {
        1
    } else {
        -1
    }
}

/// A square root of `a` modulo an odd prime `p`, or None if `a` is a
/// non-residue. Uses the (p+1)/4 exponent when p = 3 (mod 4) and
/// Tonelli-Shanks otherwise, so any distinct odd prime pair works.
pub fn sqrt_mod_prime(a: &BigUint, p: &BigUint) -> Option<BigUint> {
    let a = a % p;
    if a.is_zero() {
        return Some(BigUint::zero());
    }
    if legendre(&a, p) != 1 {
        return None;
    }
    if (p % big(4)) == big(3) {
        let e = (p + BigUint::one()) >> 2;
        return Some(a.modpow(&e, p));
    }
    // Tonelli-Shanks: write p-1 = q 2^s with q odd.
    let one = BigUint::one();
    let p_minus_1 = p - &one;
    let s = p_minus_1.trailing_zeros().unwrap_or(0);
    let q = &p_minus_1 >> s;
    // Any quadratic non-residue serves as the group generator z.
    let mut z = big(2);
    while legendre(&z, p) != -1 {
        z += &one;
    }
    let mut m = s;
    let mut c = z.modpow(&q, p);
    let mut t = a.modpow(&q, p);
    let mut r = a.modpow(&((&q + &one) >> 1), p);
    while !t.is_one() {
        let mut i = 0u64;
        let mut t2 = t.clone();
        while !t2.is_one() {
            t2 = (&t2 * &t2) % p;
            i += 1;
        }
        let b = c.modpow(&(one.clone() << (m - i - 1)), p);
        m = i;
        c = (&b * &b) % p;
        t = (&t * &c) % p;
        r = (&r * &b) % p;
    }
    Some(r)
}

/// Composite N = pq with the secret factorization. The QRP setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlumModulus {
    p: BigUint,
    q: BigUint,
    n: BigUint,
    blum: bool,
}

impl BlumModulus {
    /// Build from two distinct odd primes. `require_blum` additionally
    /// demands p = q = 3 (mod 4).
    pub fn new(p: BigUint, q: BigUint, require_blum: bool) -> Result<Self, NumTheoryError> {
        if p == q {
            return Err(NumTheoryError::InvalidParameter(
                "factors must be distinct".into(),
            ));
        }
        if !is_prime(&p) || !is_prime(&q) {
            return Err(NumTheoryError::InvalidParameter(
                "both factors must be prime".into(),
            ));
        }
        if p.is_even() || q.is_even() {
            return Err(NumTheoryError::InvalidParameter(
                "factors must be odd".into(),
            ));
        }
        let blum = (&p % big(4)) == big(3) && (&q % big(4)) == big(3);
        if require_blum && !blum {
            return Err(NumTheoryError::InvalidParameter(
                "factors must be congruent to 3 modulo 4".into(),
            ));
        }
        let n = &p * &q;
        Ok(BlumModulus { p, q, n, blum })
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn is_blum(&self) -> bool {
        self.blum
    }

    /// Quadratic residuosity of `y` modulo N, decided through the Legendre
    /// symbols at both primes. Errors if gcd(y, N) != 1: that gcd is a prime
    /// factor the caller just leaked.
    pub fn is_qr(&self, y: &BigUint) -> Result<bool, NumTheoryError> {
        if !y.gcd(&self.n).is_one() {
            return Err(NumTheoryError::NotCoprime);
        }
        Ok(legendre(y, &self.p) == 1 && legendre(y, &self.q) == 1)
    }

    /// The four square roots {r1, N-r1, r2, N-r2} of a residue `y`, combined
    /// from roots mod p and mod q by the Chinese Remainder construction.
    pub fn four_square_roots(&self, y: &BigUint) -> Result<[BigUint; 4], NumTheoryError> {
        if !y.gcd(&self.n).is_one() {
            return Err(NumTheoryError::NotCoprime);
        }
        let rp = sqrt_mod_prime(y, &self.p).ok_or(NumTheoryError::NotAResidue)?;
        let rq = sqrt_mod_prime(y, &self.q).ok_or(NumTheoryError::NotAResidue)?;
        let r1 = self.crt(&rp, &rq)?;
        let r2 = self.crt(&(&self.p - &rp), &rq)?;
        Ok([
            r1.clone(),
            &self.n - &r1,
            r2.clone(),
            &self.n - &r2,
        ])
    }

    fn crt(&self, rp: &BigUint, rq: &BigUint) -> Result<BigUint, NumTheoryError> {
        // x = rp + p * ((rq - rp) * p^-1 mod q)
        let p_inv = mod_inverse(&self.p, &self.q)?;
        let diff = ((rq + &self.q) - (rp % &self.q)) % &self.q;
        let k = (&diff * &p_inv) % &self.q;
        Ok((rp + &self.p * k) % &self.n)
    }

    /// Sample y with Jacobi symbol (y/N) = 1 that is not a square: Legendre
    /// -1 at both primes.
    pub fn sample_nonresidue_jacobi1<R: RngCore>(&self, rng: &mut R) -> BigUint {
        loop {
            let y = random_in_zn_star(rng, &self.n);
            if legendre(&y, &self.p) == -1 && legendre(&y, &self.q) == -1 {
                return y;
            }
        }
    }

    /// Sample a uniform element of Z_N*.
    pub fn sample_unit<R: RngCore>(&self, rng: &mut R) -> BigUint {
        random_in_zn_star(rng, &self.n)
    }
}

/// Two distinct roots of the same square expose a factor of N through
/// gcd(x + y, N). Errors if the roots are trivially related (x = +-y mod N).
pub fn factor_from_roots(
    x: &BigUint,
    y: &BigUint,
    n: &BigUint,
) -> Result<(BigUint, BigUint), NumTheoryError> {
    let x = x % n;
    let y = y % n;
    if (&x * &x) % n != (&y * &y) % n {
        return Err(NumTheoryError::InvalidParameter(
            "inputs are not roots of the same square".into(),
        ));
    }
    if x == y || &x + &y == *n {
        return Err(NumTheoryError::TrivialRoots);
    }
    let g = (&x + &y).gcd(n);
    if g.is_one() || g == *n {
        return Err(NumTheoryError::TrivialRoots);
    }
    let other = n / &g;
    Ok((g, other))
}

/// Generate a modulus from two fresh primes of about `bit_length / 2` bits
/// each, both congruent to 3 mod 4 when `blum` is set.
pub fn gen_modulus<R: RngCore>(bit_length: u64, blum: bool, rng: &mut R) -> BlumModulus {
    assert!(bit_length >= 6, "bit_length must be at least 6");
    let half = bit_length / 2;
    loop {
        let p = gen_prime(half, blum, rng);
        let q = gen_prime(bit_length - half, blum, rng);
        if p == q {
            continue;
        }
        return BlumModulus::new(p, q, blum).expect("generated primes satisfy the invariants");
    }
}

/// Generate a Blum modulus: both primes congruent to 3 mod 4.
pub fn gen_blum<R: RngCore>(bit_length: u64, rng: &mut R) -> BlumModulus {
    gen_modulus(bit_length, true, rng)
}

fn gen_prime<R: RngCore>(bits: u64, three_mod_four: bool, rng: &mut R) -> BigUint {
    assert!(bits >= 2);
    loop {
        let mut c = random_bits(rng, bits);
        c.set_bit(bits - 1, true);
        c.set_bit(0, true);
        if three_mod_four && bits >= 2 {
            c.set_bit(1, true);
        }
        if is_prime(&c) {
            return c;
        }
    }
}

/// Prime p with a verified generator g of the full multiplicative group.
/// The DLP setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldContext {
    p: BigUint,
    g: BigUint,
    // prime factors of p - 1, needed to certify the generator
    factors: Vec<BigUint>,
}

impl FieldContext {
    /// Build from explicit p and g. Factors p - 1 by trial division, so this
    /// constructor is meant for small parameters; use [`gen_field`] for
    /// larger ones.
    pub fn new(p: BigUint, g: BigUint) -> Result<Self, NumTheoryError> {
        if !is_prime(&p) {
            return Err(NumTheoryError::InvalidParameter("p must be prime".into()));
        }
        let factors = factorize_small(&(&p - BigUint::one()))?;
        let ctx = FieldContext { p, g, factors };
        if !ctx.generator_certified() {
            return Err(NumTheoryError::InvalidParameter(
                "g does not generate the multiplicative group".into(),
            ));
        }
        Ok(ctx)
    }

    fn from_parts(p: BigUint, g: BigUint, factors: Vec<BigUint>) -> Self {
        FieldContext { p, g, factors }
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    /// g^((p-1)/r) != 1 for every prime r dividing p - 1.
    pub fn generator_certified(&self) -> bool {
        if self.g < big(2) || self.g >= self.p {
            return false;
        }
        let order = &self.p - BigUint::one();
        self.factors
            .iter()
            .all(|r| !self.g.modpow(&(&order / r), &self.p).is_one())
    }

    pub fn pow(&self, exp: &BigUint) -> BigUint {
        self.g.modpow(exp, &self.p)
    }

    /// Uniform exponent in [0, p-2].
    pub fn sample_exponent<R: RngCore>(&self, rng: &mut R) -> BigUint {
        random_below(rng, &(&self.p - BigUint::one()))
    }
}

fn factorize_small(n: &BigUint) -> Result<Vec<BigUint>, NumTheoryError> {
    let mut n = n.clone();
    let mut factors = Vec::new();
    let mut d = big(2);
    let limit = big(1u64 << 20);
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            factors.push(d.clone());
            while (&n % &d).is_zero() {
                n /= &d;
            }
        }
        d += BigUint::one();
        if d > limit {
            break;
        }
    }
    if n > BigUint::one() {
        if !is_prime(&n) {
            return Err(NumTheoryError::InvalidParameter(
                "p - 1 has a large composite cofactor; use gen_field instead".into(),
            ));
        }
        factors.push(n);
    }
    Ok(factors)
}

/// Generate a safe prime p = 2q' + 1 and a certified generator of Z_p*.
pub fn gen_field<R: RngCore>(bit_length: u64, rng: &mut R) -> FieldContext {
    assert!(bit_length >= 4, "bit_length must be at least 4");
    loop {
        let q = gen_prime(bit_length - 1, false, rng);
        let p = (&q << 1) + BigUint::one();
        if !is_prime(&p) {
            continue;
        }
        let factors = vec![big(2), q];
        loop {
            let g = random_below(rng, &(&p - big(3))) + big(2);
            let cand = FieldContext::from_parts(p.clone(), g, factors.clone());
            if cand.generator_certified() {
                return cand;
            }
        }
    }
}

/// Uniform integer with at most `bits` bits.
pub fn random_bits<R: RngCore>(rng: &mut R, bits: u64) -> BigUint {
    let nbytes = ((bits + 7) / 8) as usize;
    let mut buf = vec![0u8; nbytes];
    rng.fill_bytes(&mut buf);
    let excess = (nbytes as u64) * 8 - bits;
    if excess > 0 {
        buf[0] &= 0xffu8 >> excess;
    }
    BigUint::from_bytes_be(&buf)
}

/// Uniform integer in [0, bound) by rejection sampling.
pub fn random_below<R: RngCore>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero());
    let bits = bound.bits();
    loop {
        let c = random_bits(rng, bits);
        if &c < bound {
            return c;
        }
    }
}

/// Uniform element of Z_n*.
pub fn random_in_zn_star<R: RngCore>(rng: &mut R, n: &BigUint) -> BigUint {
    loop {
        let c = random_below(rng, n);
        if !c.is_zero() && c.gcd(n).is_one() {
            return c;
        }
    }
}

/// Shared integer wire encoding: 2-byte big-endian length prefix, then the
/// big-endian magnitude. All values are nonnegative.
pub fn encode_int(v: &BigUint) -> Vec<u8> {
    let mag = v.to_bytes_be();
    let mag = if v.is_zero() { Vec::new() } else { mag };
    let mut out = Vec::with_capacity(2 + mag.len());
    out.extend_from_slice(&(mag.len() as u16).to_be_bytes());
    out.extend_from_slice(&mag);
    out
}

/// Decode one length-prefixed integer from the front of `buf`, returning the
/// value and the number of bytes consumed.
pub fn decode_int(buf: &[u8]) -> Result<(BigUint, usize), NumTheoryError> {
    if buf.len() < 2 {
        return Err(NumTheoryError::InvalidParameter(
            "truncated integer length prefix".into(),
        ));
    }
    let len = u16::from_be_bytes([buf[0], buf[1]]) as usize;
    if buf.len() < 2 + len {
        return Err(NumTheoryError::InvalidParameter(
            "truncated integer magnitude".into(),
        ));
    }
    Ok((BigUint::from_bytes_be(&buf[2..2 + len]), 2 + len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn n21() -> BlumModulus {
        BlumModulus::new(big(3), big(7), true).unwrap()
    }

    /// Brute-force oracle: the set of nonzero squares modulo n.
    fn square_set(n: u64) -> std::collections::BTreeSet<u64> {
        (1..n).filter(|x| gcd(*x, n) == 1).map(|x| x * x % n).collect()
    }

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn mod_pow_examples() {
        // Fermat little theorem case
        assert_eq!(mod_pow(&big(3), &big(6), &big(7)), big(1));
        // zero exponent
        assert_eq!(mod_pow(&big(5), &big(0), &big(21)), big(1));
        // derived by repeated multiplication: 2^5 mod 21 = 32 mod 21 = 11
        assert_eq!(mod_pow(&big(2), &big(5), &big(21)), big(11));
    }

    #[test]
    fn mod_pow_matches_naive_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let m = (rng.next_u64() % (1 << 16)).max(2);
            let b = rng.next_u64() % m;
            let e = rng.next_u64() % 32;
            let mut naive = 1u64;
            for _ in 0..e {
                naive = naive * b % m;
            }
            assert_eq!(mod_pow(&big(b), &big(e), &big(m)), big(naive));
        }
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi(&big(1), &big(21)).unwrap(), 1);
        assert_eq!(jacobi(&big(3), &big(21)).unwrap(), 0);
        // 5 has Jacobi symbol 1 mod 21 yet is not a square there
        assert_eq!(jacobi(&big(5), &big(21)).unwrap(), 1);
        assert!(!square_set(21).contains(&5));
        assert_eq!(jacobi(&big(2), &big(21)).unwrap(), -1);
        assert_eq!(jacobi(&big(4), &big(20)), Err(NumTheoryError::EvenOrSmallModulus));
    }

    #[test]
    fn jacobi_is_product_of_legendres() {
        // exhaustive over semiprimes below 10^3
        for (p, q) in [(3u64, 7u64), (3, 11), (5, 7), (7, 11), (11, 13), (13, 17), (17, 19), (19, 23)] {
            let n = p * q;
            for a in 0..n {
                let expect = legendre(&big(a), &big(p)) * legendre(&big(a), &big(q));
                assert_eq!(jacobi(&big(a), &big(n)).unwrap(), expect, "a={a} n={n}");
            }
        }
    }

    #[test]
    fn is_qr_examples() {
        let m = n21();
        assert!(m.is_qr(&big(4)).unwrap());
        assert!(!m.is_qr(&big(5)).unwrap());
        assert!(m.is_qr(&big(16)).unwrap());
        assert_eq!(m.is_qr(&big(3)), Err(NumTheoryError::NotCoprime));
    }

    #[test]
    fn four_square_roots_examples() {
        let m = n21();
        let mut roots: Vec<u64> = m
            .four_square_roots(&big(4))
            .unwrap()
            .iter()
            .map(|r| r.to_u64_digits()[0])
            .collect();
        roots.sort_unstable();
        // oracle: enumerate r in [1, 20] with r^2 = 4 (mod 21)
        let expect: Vec<u64> = (1..21).filter(|r| r * r % 21 == 4).collect();
        assert_eq!(roots, expect);
        assert_eq!(roots, vec![2, 5, 16, 19]);

        let mut roots1: Vec<u64> = m
            .four_square_roots(&big(1))
            .unwrap()
            .iter()
            .map(|r| r.to_u64_digits()[0])
            .collect();
        roots1.sort_unstable();
        assert_eq!(roots1, vec![1, 8, 13, 20]);

        assert_eq!(m.four_square_roots(&big(5)), Err(NumTheoryError::NotAResidue));
        assert_eq!(m.four_square_roots(&big(6)), Err(NumTheoryError::NotCoprime));
    }

    #[test]
    fn roots_and_residues_agree_with_enumeration() {
        // For every y coprime to N: four_square_roots succeeds exactly when
        // is_qr is true, and the root set has size exactly 4.
        for (p, q) in [(3u64, 7u64), (3, 11), (7, 11), (11, 23), (19, 31), (43, 47)] {
            let m = BlumModulus::new(big(p), big(q), false).unwrap();
            let n = p * q;
            let squares = square_set(n);
            for y in 1..n {
                if gcd(y, n) != 1 {
                    continue;
                }
                let qr = m.is_qr(&big(y)).unwrap();
                assert_eq!(qr, squares.contains(&y), "y={y} n={n}");
                match m.four_square_roots(&big(y)) {
                    Ok(roots) => {
                        assert!(qr);
                        let set: std::collections::BTreeSet<_> = roots.iter().collect();
                        assert_eq!(set.len(), 4);
                        for r in roots.iter() {
                            assert_eq!((r * r) % big(n), big(y));
                        }
                    }
                    Err(NumTheoryError::NotAResidue) => assert!(!qr),
                    Err(e) => panic!("unexpected error {e:?}"),
                }
            }
        }
    }

    #[test]
    fn factor_from_roots_examples() {
        let (f1, f2) = factor_from_roots(&big(2), &big(16), &big(21)).unwrap();
        assert_eq!((f1, f2), (big(3), big(7)));
        assert_eq!(
            factor_from_roots(&big(2), &big(19), &big(21)),
            Err(NumTheoryError::TrivialRoots)
        );
        let (f1, f2) = factor_from_roots(&big(5), &big(2), &big(21)).unwrap();
        assert_eq!((f1, f2), (big(7), big(3)));
    }

    #[test]
    fn factor_from_roots_exhaustive() {
        // every unordered pair of non-trivially-related roots recovers {p, q}
        for (p, q) in [(3u64, 7u64), (3, 11)] {
            let m = BlumModulus::new(big(p), big(q), false).unwrap();
            let n = p * q;
            for y in square_set(n) {
                let roots = m.four_square_roots(&big(y)).unwrap();
                for a in roots.iter() {
                    for b in roots.iter() {
                        let trivially_related = a == b || a + b == big(n);
                        match factor_from_roots(a, b, &big(n)) {
                            Ok((f1, f2)) => {
                                assert!(!trivially_related);
                                let mut fs = [f1, f2];
                                fs.sort();
                                assert_eq!(fs, [big(p.min(q)), big(p.max(q))]);
                            }
                            Err(NumTheoryError::TrivialRoots) => assert!(trivially_related),
                            Err(e) => panic!("unexpected error {e:?}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn blum_generation() {
        // p=3, q=7 is a valid Blum modulus; p=5 is rejected as a Blum factor
        assert!(BlumModulus::new(big(3), big(7), true).unwrap().is_blum());
        assert_eq!(
            BlumModulus::new(big(5), big(7), true).unwrap_err(),
            NumTheoryError::InvalidParameter("factors must be congruent to 3 modulo 4".into())
        );
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..5 {
            let m = gen_blum(24, &mut rng);
            assert!(m.is_blum());
            assert!(m.n().is_odd());
            assert_eq!(m.p() % big(4), big(3));
            assert_eq!(m.q() % big(4), big(3));
        }
    }

    #[test]
    fn squaring_bijective_on_squares_of_blum_modulus() {
        // exhaustive at N = 21: squaring maps the square set onto itself 1:1
        let squares = square_set(21);
        let image: std::collections::BTreeSet<u64> =
            squares.iter().map(|y| y * y % 21).collect();
        assert_eq!(squares, image);
    }

    #[test]
    fn field_generation_and_generator_check() {
        // p=7: 3 generates (powers 3, 2, 6, 4, 5, 1), 2 does not (2^3 = 1)
        let f = FieldContext::new(big(7), big(3)).unwrap();
        assert!(f.generator_certified());
        assert!(FieldContext::new(big(7), big(2)).is_err());
        assert!(FieldContext::new(big(7), big(1)).is_err());

        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let f = gen_field(16, &mut rng);
        assert!(is_prime(f.p()));
        assert!(f.generator_certified());
    }

    #[test]
    fn nonresidue_sampling() {
        let m = n21();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let squares = square_set(21);
        for _ in 0..50 {
            let y = m.sample_nonresidue_jacobi1(&mut rng);
            assert_eq!(jacobi(&y, m.n()).unwrap(), 1);
            assert!(!squares.contains(&y.to_u64_digits()[0]));
        }
    }

    #[test]
    fn sqrt_mod_prime_one_mod_four() {
        // Tonelli-Shanks path: p = 13 and p = 17 are 1 mod 4
        for p in [13u64, 17, 29, 41] {
            for a in 1..p {
                let r = sqrt_mod_prime(&big(a), &big(p));
                match r {
                    Some(r) => {
                        let r = r.to_u64_digits().first().copied().unwrap_or(0);
                        assert_eq!(r * r % p, a);
                    }
                    None => assert_eq!(legendre(&big(a), &big(p)), -1),
                }
            }
        }
    }

    #[test]
    fn int_codec_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..200 {
            let bits = 1 + rng.next_u64() % 200;
            let v = random_bits(&mut rng, bits);
            let enc = encode_int(&v);
            let (dec, used) = decode_int(&enc).unwrap();
            assert_eq!(dec, v);
            assert_eq!(used, enc.len());
        }
        assert!(decode_int(&[0x00]).is_err());
        assert!(decode_int(&[0x00, 0x05, 0x01]).is_err());
    }
}
