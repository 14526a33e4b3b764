//! Selection of a good `h = h_1 x^q - h_0` and the smooth split of
//! `q^{2m} - 1`.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{Fq2, TowerParams};
use crate::intmath::primes_up_to;
use crate::poly::{Factorization, Poly};

pub const DEFAULT_C: u32 = 2;
pub const DEFAULT_D: u32 = 3;

/// A validated good configuration.
#[derive(Clone, Debug)]
pub struct FieldSetup {
    pub tower: TowerParams,
    pub c: u32,
    pub d: u32,
    pub h0: Poly,
    pub h1: Poly,
    pub h: Poly,
    pub g: Poly,
    pub h_factorization: Factorization,
    pub v: BigUint,
    pub l: BigUint,
    pub v_factors: Vec<(BigUint, u32)>,
}

/// The condition that rejected a candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// No irreducible factor of degree `m`.
    DegreeMFactor,
    /// Every degree-`m` factor divides `h` more than once.
    Squarefree,
    /// `h` has a linear factor.
    NoLinear,
    /// `gcd(|F_{h/g}^x|, q^{2m} - 1)` is not smooth.
    SmoothGcd,
    /// `gcd(h_0, h_1) != 1`.
    Coprime,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::DegreeMFactor => "condition 1: no irreducible factor of degree m",
            Condition::Squarefree => "condition 2: g^2 divides h",
            Condition::NoLinear => "condition 3: h has a linear factor",
            Condition::SmoothGcd => "condition 4: gcd(|F_(h/g)^x|, q^2m - 1) is not smooth",
            Condition::Coprime => "extra condition: gcd(h0, h1) != 1",
        };
        f.write_str(s)
    }
}

/// Outcome of [`is_good`] with witnesses.
#[derive(Clone, Debug)]
pub struct GoodReport {
    pub failed: Option<Condition>,
    pub factorization: Option<Factorization>,
    pub g: Option<Poly>,
}

impl GoodReport {
    pub fn is_good(&self) -> bool {
        self.failed.is_none()
    }
}

/// `q^{2C}`.
pub fn smooth_bound(t: &TowerParams, c: u32) -> u64 {
    (t.field_size() as u64).pow(c)
}

/// `q^{2m} - 1`.
pub fn group_order(t: &TowerParams) -> BigUint {
    BigUint::from(t.field_size()).pow(t.m as u32) - 1u32
}

/// `|(F_{q^2}[x]/(f))^x|` from a factorization of `f`.
pub fn unit_group_order(t: &TowerParams, f: &Factorization) -> Result<BigUint> {
    if f.factors.is_empty() {
        return Err(Error::ConstantPoly);
    }
    let qq = BigUint::from(t.field_size());
    let mut acc = BigUint::one();
    for (g, a) in &f.factors {
        let d = g.deg() as u32;
        acc *= qq.pow(d) - 1u32;
        acc *= qq.pow(d * (a - 1));
    }
    Ok(acc)
}

/// Largest `B`-smooth divisor `v` of `n`, the cofactor `L`, and the
/// factorization of `v`.
pub fn smooth_split(n: &BigUint, bound: u64) -> (BigUint, BigUint, Vec<(BigUint, u32)>) {
    let mut l = n.clone();
    let mut fac = Vec::new();
    if l.is_zero() {
        return (BigUint::one(), l, fac);
    }
    for r in primes_up_to(bound) {
        let rb = BigUint::from(r);
        let mut e = 0;
        while (&l % &rb).is_zero() {
            l /= &rb;
            e += 1;
        }
        if e > 0 {
            fac.push((rb, e));
        }
    }
    let v = n / &l;
    (v, l, fac)
}

/// `gcd(q^{2d} - 1, q^{2m} - 1) = q^{2 gcd(d, m)} - 1`.
pub fn gcd_subfield_identity(t: &TowerParams, d: u32, m: u32) -> BigUint {
    BigUint::from(t.field_size()).pow(d.gcd(&m)) - 1u32
}

fn is_smooth(n: &BigUint, bound: u64) -> bool {
    smooth_split(n, bound).1.is_one()
}

/// Check the four conditions on `h` (plus `gcd(h_0, h_1) = 1` when the pair
/// is given). When several degree-`m` factors exist, `g` is the first in
/// canonical order that satisfies conditions 2 and 4.
pub fn is_good(
    t: &TowerParams,
    h: &Poly,
    pair: Option<(&Poly, &Poly)>,
    c: u32,
) -> Result<GoodReport> {
    let fail = |cond, fac: Option<Factorization>| GoodReport { failed: Some(cond), factorization: fac, g: None };
    if h.deg() < t.m {
        return Err(Error::InvalidParams(format!("deg h = {} < m = {}", h.deg(), t.m)));
    }
    let fac = h.factor(t)?;
    let cands: Vec<&(Poly, u32)> = fac.factors.iter().filter(|(g, _)| g.deg() == t.m).collect();
    if cands.is_empty() {
        return Ok(fail(Condition::DegreeMFactor, Some(fac)));
    }
    if cands.iter().all(|(_, a)| *a > 1) {
        return Ok(fail(Condition::Squarefree, Some(fac)));
    }
    if fac.factors.iter().any(|(g, _)| g.deg() == 1) {
        return Ok(fail(Condition::NoLinear, Some(fac)));
    }
    let bound = smooth_bound(t, c);
    let m = t.m as u32;
    let g = cands.iter().filter(|(_, a)| *a == 1).map(|(g, _)| g).find(|g| {
        fac.factors
            .iter()
            .filter(|(f, _)| f != *g)
            .all(|(f, _)| is_smooth(&gcd_subfield_identity(t, f.deg() as u32, m), bound))
    });
    let Some(g) = g.cloned() else {
        return Ok(fail(Condition::SmoothGcd, Some(fac)));
    };
    if let Some((h0, h1)) = pair {
        if h0.is_zero() || !h0.gcd(t, h1)?.is_one() {
            return Ok(fail(Condition::Coprime, Some(fac)));
        }
    }
    Ok(GoodReport { failed: None, factorization: Some(fac), g: Some(g) })
}

/// `h_1 x^q - h_0`.
pub fn assemble_h(t: &TowerParams, h0: &Poly, h1: &Poly) -> Poly {
    h1.shift(t.q as usize).sub(t, h0)
}

/// Number of polynomials of degree at most `d` (including zero).
fn count_upto(qq: u64, d: u32) -> u64 {
    qq.pow(d + 1)
}

/// The `k`-th polynomial of degree `<= d` in canonical order (zero first,
/// then by degree, then coefficient-lex from the constant term).
pub fn nth_poly(qq: u64, mut k: u64) -> Poly {
    if k == 0 {
        return Poly::zero();
    }
    k -= 1;
    let mut deg = 0u32;
    loop {
        let block = (qq - 1) * qq.pow(deg);
        if k < block {
            break;
        }
        k -= block;
        deg += 1;
    }
    // Digits c_0..c_{deg-1} in 0..qq, most significant first, then the
    // leading coefficient in 1..qq.
    let lead = k % (qq - 1) + 1;
    k /= qq - 1;
    let mut c = vec![Fq2::ZERO; deg as usize + 1];
    for i in (0..deg as usize).rev() {
        c[i] = Fq2::from_index((k % qq) as usize);
        k /= qq;
    }
    c[deg as usize] = Fq2::from_index(lead as usize);
    Poly::from_coeffs(c)
}

/// The `k`-th monic polynomial in canonical order.
pub fn nth_monic(qq: u64, mut k: u64) -> Poly {
    let mut deg = 0u32;
    while k >= qq.pow(deg) {
        k -= qq.pow(deg);
        deg += 1;
    }
    let mut c = vec![Fq2::ZERO; deg as usize + 1];
    for i in (0..deg as usize).rev() {
        c[i] = Fq2::from_index((k % qq) as usize);
        k /= qq;
    }
    c[deg as usize] = Fq2::ONE;
    Poly::from_coeffs(c)
}

/// Enumerate monic `h_1` (outer) and `h_0` (inner), each of degree at most
/// `D` in canonical order, and return the first good pair.
pub fn search_good(t: &TowerParams, c: u32, d: u32) -> Result<FieldSetup> {
    search_good_filtered(t, c, d, |_| true)
}

/// As [`search_good`], skipping good pairs rejected by `accept` (e.g. pairs
/// whose relation lattice is too thin to use).
pub fn search_good_filtered<F>(t: &TowerParams, c: u32, d: u32, accept: F) -> Result<FieldSetup>
where
    F: Fn(&FieldSetup) -> bool + Sync,
{
    if c == 0 {
        return Err(Error::InvalidParams("C must be positive".into()));
    }
    if t.m < 3 {
        return Err(Error::InvalidParams("tower has no target degree m".into()));
    }
    let q = t.q as usize;
    if t.m == q && d < 2 {
        return Err(Error::InvalidParams("m = q requires D >= 2".into()));
    }
    if t.m + 1 == q && d < 1 {
        return Err(Error::InvalidParams("m = q - 1 requires D >= 1".into()));
    }
    let qq = t.field_size() as u64;
    let n_h1: u64 = (0..=d).map(|i| qq.pow(i)).sum();
    let n_h0 = count_upto(qq, d);
    for i1 in 0..n_h1 {
        let h1 = nth_monic(qq, i1);
        let hit = (0..n_h0).into_par_iter().find_map_first(|i0| {
            let h0 = nth_poly(qq, i0);
            if h0.is_zero() || !h0.gcd(t, &h1).ok()?.is_one() {
                return None;
            }
            let h = assemble_h(t, &h0, &h1);
            if h.has_root(t).ok()? {
                return None;
            }
            let rep = is_good(t, &h, Some((&h0, &h1)), c).ok()?;
            if !rep.is_good() {
                return None;
            }
            let setup = FieldSetup::from_parts(t.clone(), c, d, h0, h1.clone(), rep).ok()?;
            accept(&setup).then_some(setup)
        });
        if let Some(setup) = hit {
            return Ok(setup);
        }
    }
    Err(Error::SearchExhausted(n_h1.saturating_mul(n_h0)))
}

impl FieldSetup {
    fn from_parts(tower: TowerParams, c: u32, d: u32, h0: Poly, h1: Poly, rep: GoodReport) -> Result<FieldSetup> {
        let h = assemble_h(&tower, &h0, &h1);
        let (v, l, v_factors) = smooth_split(&group_order(&tower), smooth_bound(&tower, c));
        Ok(FieldSetup {
            c,
            d,
            h0,
            h1,
            h,
            g: rep.g.ok_or_else(|| Error::Internal("good report without g".into()))?,
            h_factorization: rep.factorization.ok_or_else(|| Error::Internal("missing factorization".into()))?,
            v,
            l,
            v_factors,
            tower,
        })
    }

    /// A setup for `h_1 x^q - h_0` with a designated degree-`m` factor `g`,
    /// skipping the goodness conditions. Used to probe bad polynomials.
    pub fn unchecked(tower: TowerParams, c: u32, d: u32, h0: Poly, h1: Poly, g: Poly) -> Result<FieldSetup> {
        let h = assemble_h(&tower, &h0, &h1);
        if g.deg() != tower.m || !g.is_irreducible(&tower)? || !g.divides(&tower, &h) {
            return Err(Error::InvalidParams("g is not a degree-m irreducible factor of h".into()));
        }
        let h_factorization = h.factor(&tower)?;
        let (v, l, v_factors) = smooth_split(&group_order(&tower), smooth_bound(&tower, c));
        Ok(FieldSetup { tower, c, d, h0, h1, h, g, h_factorization, v, l, v_factors })
    }

    /// As [`FieldSetup::unchecked`] for an arbitrary `h`; `h_0` is left zero.
    pub fn unchecked_parts(tower: TowerParams, c: u32, h: Poly, g: Poly, h1: Poly) -> Result<FieldSetup> {
        if g.deg() != tower.m || !g.is_irreducible(&tower)? || !g.divides(&tower, &h) {
            return Err(Error::InvalidParams("g is not a degree-m irreducible factor of h".into()));
        }
        let h_factorization = h.factor(&tower)?;
        let (v, l, v_factors) = smooth_split(&group_order(&tower), smooth_bound(&tower, c));
        Ok(FieldSetup { tower, c, d: 0, h0: Poly::zero(), h1, h, g, h_factorization, v, l, v_factors })
    }

    /// Validate an explicit pair, e.g. from a setup file.
    pub fn from_pair(tower: TowerParams, c: u32, d: u32, h0: Poly, h1: Poly) -> Result<FieldSetup> {
        if h0.deg() > d as usize || h1.deg() > d as usize {
            return Err(Error::InvalidParams("deg h0 or deg h1 exceeds D".into()));
        }
        let h = assemble_h(&tower, &h0, &h1);
        let rep = is_good(&tower, &h, Some((&h0, &h1)), c)?;
        if let Some(cond) = rep.failed {
            return Err(Error::InvalidParams(format!("h is not good: {cond}")));
        }
        FieldSetup::from_parts(tower, c, d, h0, h1, rep)
    }

    /// `q^{2m} - 1`.
    pub fn group_order(&self) -> BigUint {
        group_order(&self.tower)
    }

    pub fn smooth_bound(&self) -> u64 {
        smooth_bound(&self.tower, self.c)
    }

    /// `max(deg h_0, deg h_1)`.
    pub fn effective_degree(&self) -> usize {
        self.h0.deg().max(self.h1.deg())
    }

    /// `h / g`.
    pub fn cofactor(&self) -> Poly {
        self.h.div_exact(&self.tower, &self.g).expect("g divides h")
    }

    /// `|F_{h/g}^x|`.
    pub fn cofactor_unit_order(&self) -> BigUint {
        let rest = Factorization {
            unit: Fq2::ONE,
            factors: self.h_factorization.factors.iter().filter(|(f, _)| *f != self.g).cloned().collect(),
        };
        if rest.factors.is_empty() {
            return BigUint::one();
        }
        unit_group_order(&self.tower, &rest).expect("nonempty")
    }

    pub fn to_text(&self) -> String {
        let t = &self.tower;
        let vf: Vec<String> = self.v_factors.iter().map(|(r, e)| format!("{r}^{e}")).collect();
        format!(
            "{}{} {}\n{}\n{}\n{}\n{}\n{}\n{}\n",
            t.to_text(),
            self.c,
            self.d,
            self.h0.to_text(t),
            self.h1.to_text(t),
            self.g.to_text(t),
            self.v,
            self.l,
            vf.join(" ")
        )
    }

    /// Parse and re-validate every condition from scratch.
    pub fn from_text(text: &str) -> Result<FieldSetup> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() < 8 {
            return Err(Error::Parse("setup file is truncated".into()));
        }
        let tower = TowerParams::from_text(&lines[..2].join("\n"))?;
        let cd: Vec<u32> = lines[2]
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad `C D` line {:?}", lines[2]))))
            .collect::<Result<_>>()?;
        if cd.len() != 2 {
            return Err(Error::Parse("expected `C D`".into()));
        }
        let h0 = Poly::parse(&tower, lines[3])?;
        let h1 = Poly::parse(&tower, lines[4])?;
        let g = Poly::parse(&tower, lines[5])?;
        let setup = FieldSetup::from_pair(tower, cd[0], cd[1], h0, h1)?;
        if setup.g != g {
            return Err(Error::Parse("recorded g differs from the canonical choice".into()));
        }
        if lines[6].trim() != setup.v.to_string() || lines[7].trim() != setup.l.to_string() {
            return Err(Error::Parse("recorded v, L do not match".into()));
        }
        Ok(setup)
    }

    /// SHA-256 of the text form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    /// Recheck all invariants independently of how the setup was built.
    pub fn validate(&self) -> Result<()> {
        let t = &self.tower;
        let err = |s: &str| Err(Error::Verification(s.into()));
        if assemble_h(t, &self.h0, &self.h1) != self.h {
            return err("h != h1 x^q - h0");
        }
        if self.h_factorization.expand(t) != self.h {
            return err("stored factorization does not expand to h");
        }
        if self.h_factorization.multiplicity_of(&self.g) != 1 || self.g.deg() != t.m || !self.g.is_irreducible(t)? {
            return err("g is not a simple irreducible degree-m factor");
        }
        if self.h_factorization.factors.iter().any(|(f, _)| f.deg() == 1) {
            return err("h has a linear factor");
        }
        if !self.h0.gcd(t, &self.h1)?.is_one() {
            return err("gcd(h0, h1) != 1");
        }
        let n = self.group_order();
        if &self.v * &self.l != n || !self.v.gcd(&self.l).is_one() {
            return err("v L != q^2m - 1 or gcd(v, L) != 1");
        }
        let bound = self.smooth_bound();
        if !is_smooth(&self.v, bound) || primes_up_to(bound).into_iter().any(|r| (&self.l % r).is_zero()) {
            return err("smooth split is wrong");
        }
        if !is_smooth(&self.cofactor_unit_order().gcd(&n), bound) {
            return err("gcd(|F_(h/g)^x|, q^2m - 1) is not smooth");
        }
        Ok(())
    }
}
