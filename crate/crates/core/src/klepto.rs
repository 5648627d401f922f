//! Subverted RSA key generation with a kleptographic backdoor and the
//! attacker's factoring procedure.
//!
//! The public exponent is not random but `e = p^E_adv mod N_adv`, bumped
//! until it is a unit mod `Φ(n)`. Whoever holds `D_adv` decrypts `e - i` for
//! a few small `i` and tests the result as a factor of `n`.
//!
//! Desk-scale only: no constant-time arithmetic, no padding.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{CheckedSub, One, Zero};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MILLER_RABIN_ROUNDS: usize = 40;
pub const DEFAULT_I_MAX: u64 = 64;
pub const MIN_LAMBDA: u32 = 32;
pub const MAX_LAMBDA: u32 = 2048;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KleptoError {
    #[error("modulus size {0} must be even and within {MIN_LAMBDA}..={MAX_LAMBDA}")]
    InvalidLambda(u32),
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),
}

/// `(n, e)` public, `d` private; `p` and `q` are kept for verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsaKeyPair {
    pub n: BigUint,
    pub e: BigUint,
    pub d: BigUint,
    pub p: BigUint,
    pub q: BigUint,
}

impl RsaKeyPair {
    pub fn phi(&self) -> BigUint {
        (&self.p - 1u32) * (&self.q - 1u32)
    }

    pub fn encrypt(&self, m: &BigUint) -> BigUint {
        m.modpow(&self.e, &self.n)
    }

    pub fn decrypt(&self, c: &BigUint) -> BigUint {
        c.modpow(&self.d, &self.n)
    }
}

/// The backdoor owner's public key, embedded in the subverted device.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryPublic {
    pub n: BigUint,
    pub e: BigUint,
}

impl AdversaryPublic {
    /// `N_adv` and `E_adv` as bit strings, most significant bit first and
    /// padded to `N_adv`'s length. These are the constants a designer would
    /// hide behind an opaque predicate.
    pub fn constant_bits(&self) -> (String, String) {
        let width = self.n.bits();
        (bit_string(&self.n, width), bit_string(&self.e, width))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryKey {
    pub n: BigUint,
    pub e: BigUint,
    pub d: BigUint,
}

impl AdversaryKey {
    /// An RSA key whose modulus has exactly `bits` bits (`bits ≥ 8`).
    pub fn generate<R: Rng + ?Sized>(bits: u32, rng: &mut R) -> Result<Self, KleptoError> {
        if bits < 8 {
            return Err(KleptoError::ParameterMismatch(format!("adversary modulus of {bits} bits is too small")));
        }
        let half = bits / 2;
        loop {
            let p = random_prime(bits - half, rng);
            let q = random_prime(half, rng);
            if p == q {
                continue;
            }
            let n = &p * &q;
            if n.bits() != bits as u64 {
                continue;
            }
            let phi = (&p - 1u32) * (&q - 1u32);
            // 65537 unless the modulus is too small for it
            let mut e = BigUint::from(65537u32);
            if e >= phi {
                e = BigUint::from(3u32);
                while !e.gcd(&phi).is_one() {
                    e += 2u32;
                }
            }
            if !e.gcd(&phi).is_one() {
                continue;
            }
            let d = e.modinv(&phi).expect("gcd is 1");
            return Ok(Self { n, e, d });
        }
    }

    /// Smallest adversary key that lets `subverted_keygen(lambda, ..)` embed
    /// every possible `p`: `N_adv ≥ 2^(λ/2)`.
    pub fn for_lambda<R: Rng + ?Sized>(lambda: u32, rng: &mut R) -> Result<Self, KleptoError> {
        check_lambda(lambda)?;
        Self::generate((lambda / 2 + 2).max(16), rng)
    }

    pub fn public(&self) -> AdversaryPublic {
        AdversaryPublic { n: self.n.clone(), e: self.e.clone() }
    }
}

/// A subverted key and how often `e` had to be incremented.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubvertedKey {
    pub keypair: RsaKeyPair,
    pub increments: u64,
}

fn check_lambda(lambda: u32) -> Result<(), KleptoError> {
    if !lambda.is_multiple_of(2) || !(MIN_LAMBDA..=MAX_LAMBDA).contains(&lambda) {
        Err(KleptoError::InvalidLambda(lambda))
    } else {
        Ok(())
    }
}

/// Both factors, drawn so their product has exactly `lambda` bits.
fn prime_pair<R: Rng + ?Sized>(lambda: u32, rng: &mut R, p_bound: Option<&BigUint>) -> (BigUint, BigUint) {
    let half = lambda / 2;
    loop {
        let p = random_prime(half, rng);
        if p_bound.is_some_and(|b| &p >= b) {
            continue;
        }
        let q = random_prime(half, rng);
        if p != q {
            return (p, q);
        }
    }
}

/// The backdoored key generation.
pub fn subverted_keygen<R: Rng + ?Sized>(
    lambda: u32,
    adv: &AdversaryPublic,
    rng: &mut R,
) -> Result<SubvertedKey, KleptoError> {
    check_lambda(lambda)?;
    let half = lambda / 2;
    // p has its two top bits set, so p ≥ 3·2^(half-2); anything at or below
    // that cannot hold p injectively
    let smallest_p = BigUint::from(3u32) << (half - 2);
    if adv.n.bits() < half as u64 || adv.n <= smallest_p {
        return Err(KleptoError::ParameterMismatch(format!(
            "N_adv has {} bits, too small to encode {half}-bit primes",
            adv.n.bits()
        )));
    }
    let (p, q) = prime_pair(lambda, rng, Some(&adv.n));
    let n = &p * &q;
    let phi = (&p - 1u32) * (&q - 1u32);
    let mut e = p.modpow(&adv.e, &adv.n);
    let mut increments = 0u64;
    while !e.gcd(&phi).is_one() {
        e += 1u32;
        increments += 1;
    }
    let d = e.modinv(&phi).expect("gcd is 1");
    Ok(SubvertedKey { keypair: RsaKeyPair { n, e, d, p, q }, increments })
}

/// Textbook key generation with a uniformly random unit `e` in `[3, Φ)`.
pub fn honest_keygen<R: Rng + ?Sized>(lambda: u32, rng: &mut R) -> Result<RsaKeyPair, KleptoError> {
    check_lambda(lambda)?;
    let (p, q) = prime_pair(lambda, rng, None);
    let n = &p * &q;
    let phi = (&p - 1u32) * (&q - 1u32);
    let e = loop {
        let e = rng.gen_biguint_range(&BigUint::from(3u32), &phi);
        if e.gcd(&phi).is_one() {
            break e;
        }
    };
    let d = e.modinv(&phi).expect("gcd is 1");
    Ok(RsaKeyPair { n, e, d, p, q })
}

/// A successful factorization of a victim's modulus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recovery {
    pub p: BigUint,
    pub q: BigUint,
    /// The offset at which `e - i` decrypted to a factor.
    pub i: u64,
}

/// Tries `p' = (e - i)^D_adv mod N_adv` for `i < i_max`.
pub fn attacker_recover(n: &BigUint, e: &BigUint, adv: &AdversaryKey, i_max: u64) -> Option<Recovery> {
    let one = BigUint::one();
    for i in 0..i_max {
        let Some(c) = e.checked_sub(&BigUint::from(i)) else { break };
        let p = c.modpow(&adv.d, &adv.n);
        if p > one && &p < n && (n % &p).is_zero() {
            let q = n / &p;
            return Some(Recovery { p, q, i });
        }
    }
    None
}

/// Checks `n = pq` with both prime, `gcd(e, Φ) = 1` and `ed ≡ 1 mod Φ`.
pub fn verify_keypair(kp: &RsaKeyPair) -> bool {
    // fixed witnesses keep the check reproducible
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6b6c_6570_746f);
    if kp.p < BigUint::from(2u32) || kp.q < BigUint::from(2u32) || &kp.p * &kp.q != kp.n {
        return false;
    }
    if !is_probable_prime(&kp.p, &mut rng) || !is_probable_prime(&kp.q, &mut rng) {
        return false;
    }
    let phi = kp.phi();
    kp.e.gcd(&phi).is_one() && (&kp.e * &kp.d % &phi).is_one()
}

const SMALL_PRIMES: [u32; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];

/// Trial division by small primes, then Miller-Rabin with
/// [`MILLER_RABIN_ROUNDS`] random bases.
pub fn is_probable_prime<R: Rng + ?Sized>(n: &BigUint, rng: &mut R) -> bool {
    for &sp in &SMALL_PRIMES {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    if *n < BigUint::from(2u32) {
        return false;
    }
    let one = BigUint::one();
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().expect("n > 1");
    let d = &n_minus_1 >> s;
    let two = BigUint::from(2u32);
    'witness: for _ in 0..MILLER_RABIN_ROUNDS {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A prime with exactly `bits` bits and its second-highest bit set, so the
/// product of two of them has exactly `2·bits` bits.
pub fn random_prime<R: Rng + ?Sized>(bits: u32, rng: &mut R) -> BigUint {
    assert!(bits >= 3, "primes need at least 3 bits here");
    let top = (BigUint::from(3u32)) << (bits - 2);
    loop {
        let mut c = rng.gen_biguint(bits as u64) | &top;
        c.set_bit(0, true);
        if is_probable_prime(&c, rng) {
            return c;
        }
    }
}

fn bit_string(v: &BigUint, width: u64) -> String {
    (0..width).rev().map(|i| if v.bit(i) { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn primality_agrees_with_trial_division() {
        let mut r = rng(1);
        for n in 0u32..3000 {
            let trial = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_probable_prime(&BigUint::from(n), &mut r), trial, "{n}");
        }
        // Carmichael numbers
        for c in [561u32, 1105, 1729, 2465, 2821, 6601, 8911, 41041, 825265] {
            assert!(!is_probable_prime(&BigUint::from(c), &mut r));
        }
    }

    #[test]
    fn random_primes_have_requested_size() {
        let mut r = rng(2);
        for bits in [8u32, 16, 32, 33] {
            let p = random_prime(bits, &mut r);
            assert_eq!(p.bits(), bits as u64);
            assert!(p.bit(bits as u64 - 2));
        }
    }

    #[test]
    fn subverted_key_is_valid_and_recoverable() {
        let mut r = rng(3);
        let adv = AdversaryKey::for_lambda(64, &mut r).unwrap();
        let key = subverted_keygen(64, &adv.public(), &mut r).unwrap();
        let kp = &key.keypair;
        assert!(verify_keypair(kp));
        assert_eq!(kp.n.bits(), 64);
        let rec = attacker_recover(&kp.n, &kp.e, &adv, DEFAULT_I_MAX).unwrap();
        assert_eq!(rec.i, key.increments);
        assert_eq!(rec.p, kp.p);
        assert_eq!(rec.q, kp.q);
        for m in 0u32..100 {
            let m = BigUint::from(m * 7919 + 2);
            assert_eq!(kp.decrypt(&kp.encrypt(&m)), m);
        }
    }

    #[test]
    fn honest_key_is_not_recovered() {
        let mut r = rng(4);
        let adv = AdversaryKey::for_lambda(64, &mut r).unwrap();
        let kp = honest_keygen(64, &mut r).unwrap();
        assert!(verify_keypair(&kp));
        assert_eq!(attacker_recover(&kp.n, &kp.e, &adv, DEFAULT_I_MAX), None);
    }

    #[test]
    fn zero_attempts_recover_nothing() {
        let mut r = rng(5);
        let adv = AdversaryKey::for_lambda(64, &mut r).unwrap();
        let key = subverted_keygen(64, &adv.public(), &mut r).unwrap();
        assert_eq!(attacker_recover(&key.keypair.n, &key.keypair.e, &adv, 0), None);
    }

    #[test]
    fn perturbed_keys_fail_verification() {
        let mut r = rng(6);
        let kp = honest_keygen(64, &mut r).unwrap();
        let mut bad_d = kp.clone();
        bad_d.d += 1u32;
        assert!(!verify_keypair(&bad_d));
        let mut even_e = kp.clone();
        even_e.e = BigUint::from(65536u32);
        assert!(!verify_keypair(&even_e));
        let mut composite = kp.clone();
        composite.p = BigUint::from(4u32);
        assert!(!verify_keypair(&composite));
    }

    #[test]
    fn lambda_and_adversary_checks() {
        let mut r = rng(7);
        let adv = AdversaryKey::for_lambda(64, &mut r).unwrap();
        for bad in [31, 63, 30, 2050] {
            assert_eq!(subverted_keygen(bad, &adv.public(), &mut r).unwrap_err(), KleptoError::InvalidLambda(bad));
        }
        let small = AdversaryKey::generate(16, &mut r).unwrap();
        assert!(matches!(subverted_keygen(64, &small.public(), &mut r), Err(KleptoError::ParameterMismatch(_))));
    }

    #[test]
    fn constant_export_is_msb_first() {
        let adv = AdversaryPublic { n: BigUint::from(0b1011_0001u32), e: BigUint::from(3u32) };
        assert_eq!(adv.constant_bits(), ("10110001".to_string(), "00000011".to_string()));
    }
}
