//! Dense univariate polynomials over `F_{q^2}`.

use std::cmp::Ordering;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::field::{Fq2, TowerParams};

/// Coefficients in ascending degree with no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    c: Vec<Fq2>,
}

/// Degree first, then coefficients lexicographically from the constant term.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.c.len().cmp(&other.c.len()).then_with(|| self.c.cmp(&other.c))
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `unit * prod f_i^{a_i}` with monic irreducible, pairwise distinct `f_i`
/// in canonical order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Factorization {
    pub unit: Fq2,
    pub factors: Vec<(Poly, u32)>,
}

impl Factorization {
    pub fn expand(&self, t: &TowerParams) -> Poly {
        let mut acc = Poly::constant(self.unit);
        for (f, a) in &self.factors {
            for _ in 0..*a {
                acc = acc.mul(t, f);
            }
        }
        acc
    }

    pub fn multiplicity_of(&self, f: &Poly) -> u32 {
        self.factors.iter().find(|(g, _)| g == f).map_or(0, |(_, a)| *a)
    }
}

/// A product of linear factors `unit * prod (x + θ)^{a}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearSplit {
    pub unit: Fq2,
    /// `(θ, multiplicity)` sorted by `θ`.
    pub shifts: Vec<(Fq2, u32)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { c: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly { c: vec![Fq2::ONE] }
    }

    pub fn x() -> Poly {
        Poly { c: vec![Fq2::ZERO, Fq2::ONE] }
    }

    pub fn constant(a: Fq2) -> Poly {
        Poly::from_coeffs(vec![a])
    }

    /// `a x^k`.
    pub fn monomial(a: Fq2, k: usize) -> Poly {
        let mut c = vec![Fq2::ZERO; k + 1];
        c[k] = a;
        Poly::from_coeffs(c)
    }

    /// `x + θ`.
    pub fn linear(theta: Fq2) -> Poly {
        Poly { c: vec![theta, Fq2::ONE] }
    }

    pub fn from_coeffs(mut c: Vec<Fq2>) -> Poly {
        while c.last().is_some_and(|a| a.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn coeffs(&self) -> &[Fq2] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> Fq2 {
        self.c.get(i).copied().unwrap_or(Fq2::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0] == Fq2::ONE
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0.
    pub fn deg(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn is_monic(&self) -> bool {
        self.c.last() == Some(&Fq2::ONE)
    }

    pub fn lc(&self) -> Fq2 {
        self.c.last().copied().unwrap_or(Fq2::ZERO)
    }

    pub fn add(&self, t: &TowerParams, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::from_coeffs((0..n).map(|i| t.add(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn sub(&self, t: &TowerParams, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::from_coeffs((0..n).map(|i| t.sub(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn neg(&self, t: &TowerParams) -> Poly {
        Poly { c: self.c.iter().map(|&a| t.neg(a)).collect() }
    }

    pub fn scale(&self, t: &TowerParams, a: Fq2) -> Poly {
        if a.is_zero() {
            return Poly::zero();
        }
        Poly { c: self.c.iter().map(|&b| t.mul(a, b)).collect() }
    }

    /// `self * x^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Fq2::ZERO; k];
        c.extend_from_slice(&self.c);
        Poly { c }
    }

    pub fn mul(&self, t: &TowerParams, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Fq2::ZERO; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] = t.add(c[i + j], t.mul(a, b));
            }
        }
        Poly::from_coeffs(c)
    }

    pub fn pow(&self, t: &TowerParams, k: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = acc.mul(t, self);
        }
        acc
    }

    pub fn divrem(&self, t: &TowerParams, d: &Poly) -> Result<(Poly, Poly)> {
        if d.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        if self.c.len() < d.c.len() {
            return Ok((Poly::zero(), self.clone()));
        }
        let inv = t.inv(d.lc())?;
        let dd = d.c.len() - 1;
        let mut r = self.c.clone();
        let mut quo = vec![Fq2::ZERO; r.len() - dd];
        for k in (0..quo.len()).rev() {
            let coef = t.mul(r[k + dd], inv);
            quo[k] = coef;
            if coef.is_zero() {
                continue;
            }
            for (i, &b) in d.c.iter().enumerate() {
                r[k + i] = t.sub(r[k + i], t.mul(coef, b));
            }
        }
        r.truncate(dd);
        Ok((Poly::from_coeffs(quo), Poly::from_coeffs(r)))
    }

    pub fn rem(&self, t: &TowerParams, d: &Poly) -> Result<Poly> {
        Ok(self.divrem(t, d)?.1)
    }

    /// Quotient, failing unless `d` divides `self`.
    pub fn div_exact(&self, t: &TowerParams, d: &Poly) -> Result<Poly> {
        let (q, r) = self.divrem(t, d)?;
        if !r.is_zero() {
            return Err(Error::Internal("inexact polynomial division".into()));
        }
        Ok(q)
    }

    pub fn divides(&self, t: &TowerParams, f: &Poly) -> bool {
        !self.is_zero() && f.rem(t, self).is_ok_and(|r| r.is_zero())
    }

    pub fn eval(&self, t: &TowerParams, a: Fq2) -> Fq2 {
        self.c.iter().rev().fold(Fq2::ZERO, |acc, &b| t.add(t.mul(acc, a), b))
    }

    /// `(lc, self / lc)`; the zero polynomial maps to `(0, 0)`.
    pub fn monic(&self, t: &TowerParams) -> (Fq2, Poly) {
        if self.is_zero() {
            return (Fq2::ZERO, Poly::zero());
        }
        let lc = self.lc();
        let inv = t.inv(lc).expect("nonzero leading coefficient");
        (lc, self.scale(t, inv))
    }

    pub fn derivative(&self, t: &TowerParams) -> Poly {
        Poly::from_coeffs(
            self.c.iter().enumerate().skip(1).map(|(i, &a)| t.mul(t.from_int(i as i64), a)).collect(),
        )
    }

    /// Apply `a -> a^q` to every coefficient.
    pub fn frobenius_coeffs(&self, t: &TowerParams) -> Poly {
        Poly { c: self.c.iter().map(|&a| t.frobenius(a)).collect() }
    }

    pub fn mulmod(&self, t: &TowerParams, o: &Poly, m: &Poly) -> Result<Poly> {
        self.mul(t, o).rem(t, m)
    }

    /// `self^k mod m`.
    pub fn powmod(&self, t: &TowerParams, k: &BigUint, m: &Poly) -> Result<Poly> {
        let base = self.rem(t, m)?;
        let mut acc = Poly::one().rem(t, m)?;
        for i in (0..k.bits()).rev() {
            acc = acc.mulmod(t, &acc, m)?;
            if k.bit(i) {
                acc = acc.mulmod(t, &base, m)?;
            }
        }
        Ok(acc)
    }

    /// Monic gcd.
    pub fn gcd(&self, t: &TowerParams, o: &Poly) -> Result<Poly> {
        if self.is_zero() && o.is_zero() {
            return Err(Error::InvalidParams("gcd of two zero polynomials".into()));
        }
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(t, &b)?;
            a = b;
            b = r;
        }
        Ok(a.monic(t).1)
    }

    /// `(g, s, u)` with `s·self + u·o = g`, `g` monic.
    pub fn xgcd(&self, t: &TowerParams, o: &Poly) -> Result<(Poly, Poly, Poly)> {
        if self.is_zero() && o.is_zero() {
            return Err(Error::InvalidParams("gcd of two zero polynomials".into()));
        }
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::zero());
        let (mut u0, mut u1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(t, &r1)?;
            let s = s0.sub(t, &q.mul(t, &s1));
            let u = u0.sub(t, &q.mul(t, &u1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
            u0 = std::mem::replace(&mut u1, u);
        }
        let inv = t.inv(r0.lc())?;
        Ok((r0.scale(t, inv), s0.scale(t, inv), u0.scale(t, inv)))
    }

    /// Monic lcm.
    pub fn lcm(&self, t: &TowerParams, o: &Poly) -> Result<Poly> {
        if self.is_zero() || o.is_zero() {
            return Ok(Poly::zero());
        }
        let g = self.gcd(t, o)?;
        Ok(self.mul(t, o).div_exact(t, &g)?.monic(t).1)
    }

    /// Inverse modulo `m`; fails when not coprime.
    pub fn invmod(&self, t: &TowerParams, m: &Poly) -> Result<Poly> {
        let (g, s, _) = self.xgcd(t, m)?;
        if !g.is_one() {
            return Err(Error::ZeroInverse);
        }
        s.rem(t, m)
    }

    /// Squarefree decomposition of a monic polynomial: `(s_i, i)` with
    /// `self = prod s_i^i` and the `s_i` squarefree, pairwise coprime.
    pub fn squarefree(&self, t: &TowerParams) -> Result<Vec<(Poly, u32)>> {
        if self.is_constant() {
            return Ok(Vec::new());
        }
        let f = self.monic(t).1;
        let mut out = Vec::new();
        let df = f.derivative(t);
        if df.is_zero() {
            for (s, a) in f.pth_root(t).squarefree(t)? {
                out.push((s, a * t.p));
            }
            return Ok(out);
        }
        let mut c = f.gcd(t, &df)?;
        let mut w = f.div_exact(t, &c)?;
        let mut i = 1;
        while !w.is_one() {
            let y = w.gcd(t, &c)?;
            let z = w.div_exact(t, &y)?;
            if !z.is_one() {
                out.push((z, i));
            }
            i += 1;
            c = c.div_exact(t, &y)?;
            w = y;
        }
        if !c.is_one() {
            for (s, a) in c.pth_root(t).squarefree(t)? {
                out.push((s, a * t.p));
            }
        }
        Ok(out)
    }

    /// For `self = G(x^p)`, returns the `p`-th root `G^{1/p}`.
    fn pth_root(&self, t: &TowerParams) -> Poly {
        let p = t.p as usize;
        Poly::from_coeffs(self.c.iter().step_by(p).map(|&a| t.pth_root(a)).collect())
    }

    pub fn factor(&self, t: &TowerParams) -> Result<Factorization> {
        if self.is_constant() {
            return Err(Error::ConstantPoly);
        }
        let (unit, f) = self.monic(t);
        let mut factors = Vec::new();
        for (s, a) in f.squarefree(t)? {
            for g in berlekamp(t, &s)? {
                factors.push((g, a));
            }
        }
        factors.sort();
        Ok(Factorization { unit, factors })
    }

    pub fn is_irreducible(&self, t: &TowerParams) -> Result<bool> {
        match self.degree() {
            None | Some(0) => Err(Error::ConstantPoly),
            Some(1) => Ok(true),
            Some(_) => {
                let f = self.monic(t).1;
                let df = f.derivative(t);
                if df.is_zero() || !f.gcd(t, &df)?.is_one() {
                    return Ok(false);
                }
                Ok(berlekamp_kernel(t, &f)?.len() == 1)
            }
        }
    }

    /// Factor into linears by exhaustive root search, or `None` if some
    /// irreducible factor has degree above one.
    pub fn splits_into_linears(&self, t: &TowerParams) -> Option<LinearSplit> {
        if self.is_zero() {
            return None;
        }
        let (unit, mut f) = self.monic(t);
        let mut shifts = Vec::new();
        for a in t.elements() {
            if f.is_one() {
                break;
            }
            let mut mult = 0;
            while f.eval(t, a).is_zero() {
                f = synthetic_div(t, &f, a);
                mult += 1;
            }
            if mult > 0 {
                shifts.push((t.neg(a), mult));
            }
        }
        if !f.is_one() {
            return None;
        }
        shifts.sort();
        Some(LinearSplit { unit, shifts })
    }

    /// Whether `self` has a root in `F_{q^2}`, via `gcd(self, x^{q^2} - x)`.
    pub fn has_root(&self, t: &TowerParams) -> Result<bool> {
        if self.deg() < 1 {
            return Ok(false);
        }
        let xq = Poly::x().powmod(t, &BigUint::from(t.field_size()), self)?;
        let g = xq.sub(t, &Poly::x()).gcd(t, self)?;
        Ok(!g.is_one())
    }

    /// Space-separated coefficient tokens; zero is a single all-zero token.
    pub fn to_text(&self, t: &TowerParams) -> String {
        if self.is_zero() {
            return t.elem_token(Fq2::ZERO);
        }
        self.c.iter().map(|&a| t.elem_token(a)).collect::<Vec<_>>().join(" ")
    }

    pub fn parse(t: &TowerParams, s: &str) -> Result<Poly> {
        let c = s.split_whitespace().map(|tok| t.parse_elem(tok)).collect::<Result<Vec<_>>>()?;
        if c.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        Ok(Poly::from_coeffs(c))
    }
}

/// Divide by `x - a`, assuming `a` is a root.
fn synthetic_div(t: &TowerParams, f: &Poly, a: Fq2) -> Poly {
    let n = f.c.len();
    let mut q = vec![Fq2::ZERO; n - 1];
    let mut carry = Fq2::ZERO;
    for i in (1..n).rev() {
        carry = t.add(t.mul(carry, a), f.c[i]);
        q[i - 1] = carry;
    }
    Poly::from_coeffs(q)
}

/// Basis of `{v : v^{q^2} = v mod f}` for squarefree monic `f`, in reduced
/// echelon form; the constant `1` is always the first vector.
fn berlekamp_kernel(t: &TowerParams, f: &Poly) -> Result<Vec<Poly>> {
    let n = f.deg();
    let xq = Poly::x().powmod(t, &BigUint::from(t.field_size()), f)?;
    // Row i of m holds x^{q^2 i} mod f.
    let mut rows = Vec::with_capacity(n);
    let mut cur = Poly::one();
    for _ in 0..n {
        rows.push((0..n).map(|j| cur.coeff(j)).collect::<Vec<_>>());
        cur = cur.mulmod(t, &xq, f)?;
    }
    // v is a solution iff sum_i v_i (M - I)[i][j] = 0 for every j, i.e. v is
    // in the kernel of (M - I)^T.
    let mut a: Vec<Vec<Fq2>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { t.sub(rows[i][j], Fq2::ONE) } else { rows[i][j] })
                .collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(pr) = (r..n).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(r, pr);
        let inv = t.inv(a[r][col])?;
        for x in a[r].iter_mut() {
            *x = t.mul(*x, inv);
        }
        for i in 0..n {
            if i != r && !a[i][col].is_zero() {
                let k = a[i][col];
                for j in 0..n {
                    let v = t.mul(k, a[r][j]);
                    a[i][j] = t.sub(a[i][j], v);
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &fc in &free {
        let mut v = vec![Fq2::ZERO; n];
        v[fc] = Fq2::ONE;
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = t.neg(a[row][fc]);
        }
        basis.push(Poly::from_coeffs(v));
    }
    basis.sort();
    Ok(basis)
}

/// Split a squarefree monic polynomial into its monic irreducible factors.
fn berlekamp(t: &TowerParams, f: &Poly) -> Result<Vec<Poly>> {
    if f.deg() <= 1 {
        return Ok(vec![f.clone()]);
    }
    let basis = berlekamp_kernel(t, f)?;
    let r = basis.len();
    let mut parts = vec![f.clone()];
    for v in basis.iter().filter(|v| !v.is_constant()) {
        if parts.len() == r {
            break;
        }
        let mut next = Vec::with_capacity(r);
        for u in parts {
            if u.deg() == 1 {
                next.push(u);
                continue;
            }
            for s in t.elements() {
                let g = u.gcd(t, &v.sub(t, &Poly::constant(s)))?;
                if !g.is_one() {
                    next.push(g);
                }
            }
        }
        parts = next;
    }
    if parts.len() != r {
        return Err(Error::Internal("Berlekamp splitting incomplete".into()));
    }
    parts.sort();
    Ok(parts)
}
