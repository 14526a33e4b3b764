//! Integer helpers: sieving, trial division, modular inverses.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// All primes `<= bound`.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Factor `n` completely by trial division, provided every composite cofactor
/// can be resolved with divisors up to `limit`. Returns `None` when the
/// remaining cofactor exceeds `limit^2`.
pub fn trial_factor(n: &BigUint, limit: u64) -> Option<Vec<(BigUint, u32)>> {
    let mut rest = n.clone();
    let mut out = Vec::new();
    if rest.is_zero() {
        return None;
    }
    let mut d = 2u64;
    while d <= limit {
        let dd = BigUint::from(d);
        if &dd * &dd > rest {
            break;
        }
        let mut e = 0u32;
        while (&rest % &dd).is_zero() {
            rest /= &dd;
            e += 1;
        }
        if e > 0 {
            out.push((dd, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > BigUint::one() {
        let lim = BigUint::from(limit);
        if rest > &lim * &lim {
            return None;
        }
        out.push((rest, 1));
    }
    Some(out)
}

pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    trial_factor(&BigUint::from(n), u32::MAX as u64)
        .expect("u64 always factors")
        .into_iter()
        .map(|(p, e)| (p.to_u64().unwrap(), e))
        .collect()
}

/// Inverse of `a` modulo `m`, if it exists. `m = 1` yields `Some(0)`.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    if m.is_one() {
        return Some(BigUint::zero());
    }
    let a = BigInt::from_biguint(Sign::Plus, a % m);
    let mi = BigInt::from_biguint(Sign::Plus, m.clone());
    let eg = a.extended_gcd(&mi);
    if !eg.gcd.is_one() {
        return None;
    }
    Some(eg.x.mod_floor(&mi).to_biguint().unwrap())
}

/// Reduce a signed integer into `[0, m)`.
pub fn reduce_signed(x: &BigInt, m: &BigUint) -> BigUint {
    let mi = BigInt::from_biguint(Sign::Plus, m.clone());
    x.mod_floor(&mi).to_biguint().unwrap()
}

pub fn factorization_product(f: &[(BigUint, u32)]) -> BigUint {
    f.iter()
        .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e))
}

/// Idempotent projecting a cyclic group of order `order` onto its
/// `part`-torsion: the integer that is 1 mod `part` and 0 mod `order/part`.
/// Requires `gcd(part, order/part) = 1`.
pub fn torsion_idempotent(order: &BigUint, part: &BigUint) -> Option<BigUint> {
    if !(order % part).is_zero() {
        return None;
    }
    let co = order / part;
    let inv = mod_inverse(&co, part)?;
    Some((co * inv) % order)
}
