//! Arithmetic in `F_p ⊂ F_{q^2}` with `q = p^e`.
//!
//! `F_{q^2}` is realised as `F_p[u]/(f(u))` where `f` is the lexicographically
//! first monic irreducible of degree `2e`. An element is stored as the integer
//! `c_0 + c_1 p + ... + c_{2e-1} p^{2e-1}` of its coordinates; that integer
//! order is the coordinate order used for every deterministic search.
//! Multiplication goes through exp/log tables with respect to the generator
//! `λ` (the first element of full order), addition through a dense table.

use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::intmath::{factor_u64, is_prime_u64};

/// Largest supported `q^2`; the addition table has `q^4` entries.
pub const MAX_FIELD_SIZE: u64 = 1024;

/// An element of `F_{q^2}`, by coordinate index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fq2(u16);

impl Fq2 {
    pub const ZERO: Fq2 = Fq2(0);
    pub const ONE: Fq2 = Fq2(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// No range check; callers iterate `0..field_size`.
    pub fn from_index(i: usize) -> Fq2 {
        Fq2(i as u16)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Fq2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Tower parameters together with the arithmetic tables of `F_{q^2}`.
#[derive(Clone)]
pub struct TowerParams {
    pub p: u32,
    pub e: u32,
    pub q: u32,
    pub m: usize,
    /// Monic defining polynomial of `F_{q^2}` over `F_p`, ascending.
    pub modulus: Vec<u32>,
    pub lambda: Fq2,
    size: usize,
    add: Vec<u16>,
    neg: Vec<u16>,
    exp: Vec<u16>,
    log: Vec<u32>,
    subfield: Vec<Fq2>,
}

impl fmt::Debug for TowerParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TowerParams")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("q", &self.q)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .field("lambda", &self.lambda)
            .finish()
    }
}

impl PartialEq for TowerParams {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.m == other.m && self.modulus == other.modulus
    }
}

impl Eq for TowerParams {}

/// Build the embedding tower for `F_{p^n}`: `q = p^ceil(log_p n)` and `m` the
/// largest multiple of `n` with `q/2 < m <= q`.
pub fn build_tower(p: u32, n: u32) -> Result<TowerParams> {
    if !is_prime_u64(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    if n < 2 {
        return Err(Error::InvalidParams(format!("extension degree n = {n} must be at least 2")));
    }
    let mut q = 1u64;
    let mut e = 0u32;
    while q < n as u64 {
        q *= p as u64;
        e += 1;
    }
    let m = (q / n as u64) * n as u64;
    if 2 * m <= q {
        return Err(Error::Internal(format!("no multiple of {n} in ({}/2, {q}]", q)));
    }
    if m <= 2 {
        return Err(Error::InvalidParams(format!(
            "embedding gives m = {m} but 2 < m is required; use standalone mode"
        )));
    }
    build_standalone(p, e, m as usize)
}

/// Build `F_{q^2}` for `q = p^e` with an arbitrary `2 < m <= q`.
pub fn build_standalone(p: u32, e: u32, m: usize) -> Result<TowerParams> {
    if !is_prime_u64(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    if e == 0 {
        return Err(Error::InvalidParams("exponent e must be positive".into()));
    }
    let q = (p as u64).checked_pow(e).ok_or_else(|| Error::InvalidParams("q overflows".into()))?;
    let size = q.checked_mul(q).ok_or_else(|| Error::InvalidParams("q^2 overflows".into()))?;
    if size > MAX_FIELD_SIZE {
        return Err(Error::SizeBound(format!("q^2 = {size} exceeds {MAX_FIELD_SIZE}")));
    }
    if m <= 2 || m as u64 > q {
        return Err(Error::InvalidParams(format!("need 2 < m <= q, got m = {m}, q = {q}")));
    }
    build_tables(p, e, q, size, m)
}

/// Build `F_{q^2}` arithmetic only, with no target degree (`m = 0`).
/// Useful for small fields such as `F_4` where no valid `m` exists.
pub fn build_field(p: u32, e: u32) -> Result<TowerParams> {
    if !is_prime_u64(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    if e == 0 {
        return Err(Error::InvalidParams("exponent e must be positive".into()));
    }
    let q = (p as u64).checked_pow(e).ok_or_else(|| Error::InvalidParams("q overflows".into()))?;
    let size = q.saturating_mul(q);
    if size > MAX_FIELD_SIZE {
        return Err(Error::SizeBound(format!("q^2 = {size} exceeds {MAX_FIELD_SIZE}")));
    }
    build_tables(p, e, q, size, 0)
}

fn build_tables(p: u32, e: u32, q: u64, size: u64, m: usize) -> Result<TowerParams> {
    let k = 2 * e as usize;
    let modulus = first_irreducible(p, k);
    let size = size as usize;
    let slow = SlowField { p, k, modulus: &modulus };

    let mut add = vec![0u16; size * size];
    let mut neg = vec![0u16; size];
    for a in 0..size {
        for b in 0..size {
            add[a * size + b] = slow.add(a, b) as u16;
        }
        neg[a] = slow.neg(a) as u16;
    }

    let order = (size - 1) as u64;
    let primes: Vec<u64> = factor_u64(order).into_iter().map(|(r, _)| r).collect();
    let lambda = (1..size)
        .find(|&a| a != 1 && primes.iter().all(|r| slow.pow(a, order / r) != 1))
        .or(if size == 2 { Some(1) } else { None })
        .ok_or_else(|| Error::Internal("no generator of F_{q^2}^*".into()))?;

    let mut exp = vec![0u16; 2 * (size - 1)];
    let mut log = vec![0u32; size];
    let mut cur = 1usize;
    for i in 0..size - 1 {
        exp[i] = cur as u16;
        exp[i + size - 1] = cur as u16;
        log[cur] = i as u32;
        cur = slow.mul(cur, lambda);
    }
    if cur != 1 {
        return Err(Error::Internal("generator order check failed".into()));
    }

    let mut tower = TowerParams {
        p,
        e,
        q: q as u32,
        m,
        modulus,
        lambda: Fq2(lambda as u16),
        size,
        add,
        neg,
        exp,
        log,
        subfield: Vec::new(),
    };
    tower.subfield = (0..size)
        .map(Fq2::from_index)
        .filter(|&a| tower.frobenius(a) == a)
        .collect();
    debug_assert_eq!(tower.subfield.len(), q as usize);
    Ok(tower)
}

impl TowerParams {
    /// `q^2`.
    pub fn field_size(&self) -> usize {
        self.size
    }

    /// `q^2 - 1`.
    pub fn unit_order(&self) -> u64 {
        (self.size - 1) as u64
    }

    /// Degree `2e` of `F_{q^2}` over `F_p`.
    pub fn ext_degree(&self) -> usize {
        2 * self.e as usize
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq2> + '_ {
        (0..self.size).map(Fq2::from_index)
    }

    pub fn units(&self) -> impl Iterator<Item = Fq2> + '_ {
        (1..self.size).map(Fq2::from_index)
    }

    /// The subfield `F_q` in coordinate order.
    pub fn subfield(&self) -> &[Fq2] {
        &self.subfield
    }

    pub fn coords(&self, a: Fq2) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.ext_degree());
        let mut x = a.0 as u32;
        for _ in 0..self.ext_degree() {
            v.push(x % self.p);
            x /= self.p;
        }
        v
    }

    pub fn from_coords(&self, c: &[u32]) -> Result<Fq2> {
        if c.len() != self.ext_degree() || c.iter().any(|&x| x >= self.p) {
            return Err(Error::Parse(format!("bad coordinate vector {c:?}")));
        }
        let idx = c.iter().rev().fold(0u32, |acc, &x| acc * self.p + x);
        Ok(Fq2(idx as u16))
    }

    /// Embed an integer of `F_p`.
    pub fn from_int(&self, n: i64) -> Fq2 {
        Fq2(n.rem_euclid(self.p as i64) as u16)
    }

    #[inline]
    pub fn add(&self, a: Fq2, b: Fq2) -> Fq2 {
        Fq2(self.add[a.index() * self.size + b.index()])
    }

    #[inline]
    pub fn neg(&self, a: Fq2) -> Fq2 {
        Fq2(self.neg[a.index()])
    }

    #[inline]
    pub fn sub(&self, a: Fq2, b: Fq2) -> Fq2 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq2, b: Fq2) -> Fq2 {
        if a.0 == 0 || b.0 == 0 {
            return Fq2::ZERO;
        }
        Fq2(self.exp[(self.log[a.index()] + self.log[b.index()]) as usize])
    }

    pub fn inv(&self, a: Fq2) -> Result<Fq2> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let n = self.size - 1;
        Ok(Fq2(self.exp[(n - self.log[a.index()] as usize) % n]))
    }

    pub fn div(&self, a: Fq2, b: Fq2) -> Result<Fq2> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `λ^k`.
    pub fn lambda_pow(&self, k: u64) -> Fq2 {
        Fq2(self.exp[(k % self.unit_order()) as usize])
    }

    pub fn pow(&self, a: Fq2, k: u64) -> Fq2 {
        if a.is_zero() {
            return if k == 0 { Fq2::ONE } else { Fq2::ZERO };
        }
        let n = self.unit_order();
        let l = (self.log[a.index()] as u64 * (k % n)) % n;
        Fq2(self.exp[l as usize])
    }

    /// Power with an arbitrary-precision exponent, reduced mod `q^2 - 1`.
    pub fn pow_big(&self, a: Fq2, k: &BigUint) -> Fq2 {
        if a.is_zero() {
            return if k.bits() == 0 { Fq2::ONE } else { Fq2::ZERO };
        }
        let r = (k % self.unit_order()).to_u64().unwrap();
        self.pow(a, r)
    }

    /// `a^q`.
    pub fn frobenius(&self, a: Fq2) -> Fq2 {
        self.pow(a, self.q as u64)
    }

    /// `a^(1/p)`, the inverse of the absolute Frobenius.
    pub fn pth_root(&self, a: Fq2) -> Fq2 {
        self.pow(a, (self.size / self.p as usize) as u64)
    }

    /// Exhaustive-table discrete logarithm to base `λ`.
    pub fn small_dlog(&self, a: Fq2) -> Result<u64> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(self.log[a.index()] as u64)
    }

    /// Base-`p` digit token `c_0 c_1 ... c_{2e-1}` of an element.
    pub fn elem_token(&self, a: Fq2) -> String {
        self.coords(a)
            .into_iter()
            .map(|d| std::char::from_digit(d, 36).unwrap())
            .collect()
    }

    pub fn parse_elem(&self, tok: &str) -> Result<Fq2> {
        let digits: Option<Vec<u32>> = tok.chars().map(|c| c.to_digit(36)).collect();
        let digits = digits.ok_or_else(|| Error::Parse(format!("bad element token {tok:?}")))?;
        self.from_coords(&digits)
    }

    /// Text form: `p e m` then the defining polynomial's coefficients.
    pub fn to_text(&self) -> String {
        let coeffs: Vec<String> = self.modulus.iter().map(|c| c.to_string()).collect();
        format!("{} {} {}\n{}\n", self.p, self.e, self.m, coeffs.join(" "))
    }

    /// Parse the two-line text form, rebuilding the tables and checking that
    /// the recorded defining polynomial is the canonical one.
    pub fn from_text(text: &str) -> Result<TowerParams> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().ok_or_else(|| Error::Parse("empty tower block".into()))?;
        let nums: Vec<u64> = head
            .split_whitespace()
            .map(|t| t.parse::<u64>().map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<_>>()?;
        if nums.len() != 3 {
            return Err(Error::Parse(format!("expected `p e m`, got {head:?}")));
        }
        let tower = match nums[2] {
            0 => build_field(nums[0] as u32, nums[1] as u32)?,
            m => build_standalone(nums[0] as u32, nums[1] as u32, m as usize)?,
        };
        let coeff_line = lines.next().ok_or_else(|| Error::Parse("missing defining polynomial".into()))?;
        let coeffs: Vec<u32> = coeff_line
            .split_whitespace()
            .map(|t| t.parse::<u32>().map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<_>>()?;
        if coeffs != tower.modulus {
            return Err(Error::Parse("defining polynomial does not match the canonical choice".into()));
        }
        Ok(tower)
    }
}

/// Coordinate-level arithmetic used only while building the tables.
struct SlowField<'a> {
    p: u32,
    k: usize,
    modulus: &'a [u32],
}

impl SlowField<'_> {
    fn digits(&self, mut a: usize) -> Vec<u32> {
        let mut v = vec![0; self.k];
        for d in v.iter_mut() {
            *d = (a % self.p as usize) as u32;
            a /= self.p as usize;
        }
        v
    }

    fn undigits(&self, v: &[u32]) -> usize {
        v.iter().rev().fold(0usize, |acc, &x| acc * self.p as usize + x as usize)
    }

    fn add(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.digits(a), self.digits(b));
        let s: Vec<u32> = x.iter().zip(&y).map(|(u, v)| (u + v) % self.p).collect();
        self.undigits(&s)
    }

    fn neg(&self, a: usize) -> usize {
        let s: Vec<u32> = self.digits(a).iter().map(|&u| (self.p - u) % self.p).collect();
        self.undigits(&s)
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.digits(a), self.digits(b));
        let p = self.p as u64;
        let mut prod = vec![0u64; 2 * self.k];
        for (i, &u) in x.iter().enumerate() {
            for (j, &v) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u as u64 * v as u64) % p;
            }
        }
        for d in (self.k..2 * self.k).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for (i, &mc) in self.modulus[..self.k].iter().enumerate() {
                let t = d - self.k + i;
                prod[t] = (prod[t] + (p - c) * mc as u64) % p;
            }
        }
        let r: Vec<u32> = prod[..self.k].iter().map(|&c| c as u32).collect();
        self.undigits(&r)
    }

    fn pow(&self, a: usize, mut k: u64) -> usize {
        let mut base = a;
        let mut acc = 1usize;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }
}

/// Lexicographically first monic irreducible of degree `k` over `F_p`
/// (lower coefficients read as an integer with `c_0` least significant).
fn first_irreducible(p: u32, k: usize) -> Vec<u32> {
    let count = (p as u64).pow(k as u32);
    for code in 0..count {
        let mut c = Vec::with_capacity(k + 1);
        let mut x = code;
        for _ in 0..k {
            c.push((x % p as u64) as u32);
            x /= p as u64;
        }
        c.push(1);
        if is_irreducible_fp(&c, p) {
            return c;
        }
    }
    unreachable!("irreducible polynomials of every degree exist")
}

/// Exhaustive check: no monic divisor of degree `1..=deg/2`.
pub(crate) fn is_irreducible_fp(f: &[u32], p: u32) -> bool {
    let n = f.len() - 1;
    if n <= 1 {
        return n == 1;
    }
    for d in 1..=n / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut x = code;
            for _ in 0..d {
                g.push((x % p as u64) as u32);
                x /= p as u64;
            }
            g.push(1);
            if fp_divides(&g, f, p) {
                return false;
            }
        }
    }
    true
}

fn fp_divides(g: &[u32], f: &[u32], p: u32) -> bool {
    let mut r: Vec<u64> = f.iter().map(|&c| c as u64).collect();
    let dg = g.len() - 1;
    let p = p as u64;
    for d in (dg..r.len()).rev() {
        let c = r[d] % p;
        if c == 0 {
            continue;
        }
        for (i, &gc) in g.iter().enumerate() {
            let t = d - dg + i;
            r[t] = (r[t] + (p - c) * gc as u64) % p;
        }
    }
    r[..dg].iter().all(|&c| c % p == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f4() -> TowerParams {
        build_field(2, 1).unwrap()
    }

    fn f16() -> TowerParams {
        build_standalone(2, 2, 3).unwrap()
    }

    #[test]
    fn embedding_parameters() {
        let t = build_tower(2, 3).unwrap();
        assert_eq!((t.q, t.m), (4, 3));
        let t = build_tower(2, 5).unwrap();
        assert_eq!((t.q, t.m), (8, 5));
        assert!(matches!(build_tower(3, 2), Err(Error::InvalidParams(_))));
        assert!(matches!(build_tower(4, 3), Err(Error::NotPrime(4))));
    }

    #[test]
    fn standalone_parameters() {
        let t = build_standalone(2, 2, 3).unwrap();
        assert_eq!((t.q, t.m), (4, 3));
        let t = build_standalone(5, 1, 4).unwrap();
        assert_eq!((t.q, t.m), (5, 4));
        assert!(build_standalone(2, 2, 5).is_err());
        assert!(build_standalone(2, 2, 2).is_err());
    }

    #[test]
    fn f16_modulus_and_subfield() {
        let t = f16();
        assert_eq!(t.field_size(), 16);
        assert_eq!(t.modulus, vec![1, 1, 0, 0, 1]);
        assert_eq!(t.subfield().len(), 4);
    }

    #[test]
    fn defining_polynomial_irreducible() {
        for (p, e) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1), (7, 1)] {
            let t = build_field(p, e).unwrap();
            assert!(is_irreducible_fp(&t.modulus, p), "p={p} e={e}");
        }
    }

    #[test]
    fn generator_is_first_of_full_order() {
        // Exhaustive order computation over F_9^* (p = 3, e = 1).
        let t = build_standalone(3, 1, 3).unwrap();
        let order = |a: Fq2| (1..=8u64).find(|&k| t.pow(a, k) == Fq2::ONE).unwrap();
        let first = t.units().find(|&a| order(a) == 8).unwrap();
        assert_eq!(t.lambda, first);
        assert_ne!(t.pow(t.lambda, 4), Fq2::ONE);
        assert_eq!(t.pow(t.lambda, 8), Fq2::ONE);
        assert_ne!(t.lambda, Fq2::ONE);
    }

    #[test]
    fn f4_arithmetic() {
        let t = f4();
        assert_eq!(t.modulus, vec![1, 1, 1]);
        let u = t.from_coords(&[0, 1]).unwrap();
        let u1 = t.add(u, Fq2::ONE);
        assert_eq!(t.mul(u, u1), Fq2::ONE);
        assert_eq!(t.inv(u).unwrap(), u1);
        assert_eq!(t.frobenius(u), u1);
        // Both u and u + 1 have order 3; the first in coordinate order wins.
        assert_eq!(t.lambda, u);
    }

    #[test]
    fn f4_identities_in_subfield() {
        // In F_16 ⊃ F_4 the subfield is {0, 1, w, w+1} with w^2 = w + 1.
        let t = f16();
        let w = t.subfield().iter().copied().find(|&a| a.index() > 1).unwrap();
        let w1 = t.add(w, Fq2::ONE);
        assert_eq!(t.mul(w, w1), Fq2::ONE);
        assert_eq!(t.inv(w).unwrap(), w1);
        assert_eq!(t.mul(w, w), w1);
    }

    #[test]
    fn frobenius_fixes_subfield_and_is_involution() {
        let t = build_standalone(3, 1, 3).unwrap();
        for a in t.elements() {
            assert_eq!(t.frobenius(t.frobenius(a)), a);
        }
        for &a in t.subfield() {
            assert_eq!(t.frobenius(a), a);
        }
    }

    #[test]
    fn small_dlog_roundtrip() {
        let t = f16();
        let n = t.unit_order();
        assert_eq!(t.small_dlog(Fq2::ONE).unwrap(), 0);
        assert_eq!(t.small_dlog(t.lambda).unwrap(), 1);
        for k in 0..2 * n {
            assert_eq!(t.small_dlog(t.lambda_pow(k)).unwrap(), k % n);
        }
        assert!(t.small_dlog(Fq2::ZERO).is_err());
        assert!(t.inv(Fq2::ZERO).is_err());
    }

    #[test]
    fn zero_power_is_one() {
        let t = f4();
        for a in t.units() {
            assert_eq!(t.pow(a, 0), Fq2::ONE);
            assert_eq!(t.pow_big(a, &BigUint::from(0u32)), Fq2::ONE);
        }
    }

    #[test]
    fn text_roundtrip() {
        let t = build_standalone(3, 2, 5).unwrap();
        let back = TowerParams::from_text(&t.to_text()).unwrap();
        assert_eq!(back, t);
        for a in t.elements() {
            assert_eq!(t.parse_elem(&t.elem_token(a)).unwrap(), a);
        }
    }

    proptest! {
        #[test]
        fn field_axioms(a in 1usize..81, b in 1usize..81) {
            let t = build_standalone(3, 2, 5).unwrap();
            let (a, b) = (Fq2::from_index(a), Fq2::from_index(b));
            let ab = t.mul(a, b);
            prop_assert_eq!(t.inv(ab).unwrap(), t.mul(t.inv(a).unwrap(), t.inv(b).unwrap()));
            prop_assert_eq!(t.frobenius(ab), t.mul(t.frobenius(a), t.frobenius(b)));
            prop_assert_eq!(t.sub(t.add(a, b), b), a);
            prop_assert_eq!(t.pth_root(t.pow(a, 3)), a);
        }
    }
}
