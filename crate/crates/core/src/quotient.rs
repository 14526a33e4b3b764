//! Residue rings `F_{q^2}[x]/(f)`, used for `F_g` and `F_h`.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::field::{Fq2, TowerParams};
use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientRing {
    modulus: Poly,
}

impl QuotientRing {
    /// The modulus is made monic; it must have positive degree.
    pub fn new(t: &TowerParams, f: &Poly) -> Result<QuotientRing> {
        if f.deg() < 1 {
            return Err(Error::ConstantPoly);
        }
        Ok(QuotientRing { modulus: f.monic(t).1 })
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn degree(&self) -> usize {
        self.modulus.deg()
    }

    /// Number of residues, `q^{2 deg f}`.
    pub fn cardinality(&self, t: &TowerParams) -> BigUint {
        BigUint::from(t.field_size()).pow(self.degree() as u32)
    }

    pub fn reduce(&self, t: &TowerParams, a: &Poly) -> Poly {
        a.rem(t, &self.modulus).expect("modulus is nonzero")
    }

    pub fn mul(&self, t: &TowerParams, a: &Poly, b: &Poly) -> Poly {
        self.reduce(t, &a.mul(t, b))
    }

    pub fn pow(&self, t: &TowerParams, a: &Poly, k: &BigUint) -> Poly {
        a.powmod(t, k, &self.modulus).expect("modulus is nonzero")
    }

    /// `a^k` for signed `k`; negative exponents need a unit.
    pub fn pow_signed(&self, t: &TowerParams, a: &Poly, k: &num_bigint::BigInt) -> Result<Poly> {
        use num_bigint::Sign;
        match k.sign() {
            Sign::Minus => Ok(self.pow(t, &self.inv(t, a)?, k.magnitude())),
            _ => Ok(self.pow(t, a, k.magnitude())),
        }
    }

    pub fn inv(&self, t: &TowerParams, a: &Poly) -> Result<Poly> {
        a.invmod(t, &self.modulus)
    }

    pub fn is_unit(&self, t: &TowerParams, a: &Poly) -> bool {
        !a.is_zero() && a.gcd(t, &self.modulus).is_ok_and(|g| g.is_one())
    }

    /// Product `prod base_i^{e_i}` over signed exponents.
    pub fn product(
        &self,
        t: &TowerParams,
        terms: &[(Poly, num_bigint::BigInt)],
    ) -> Result<Poly> {
        let mut acc = Poly::one();
        for (b, e) in terms {
            let x = self.pow_signed(t, &self.reduce(t, b), e)?;
            acc = self.mul(t, &acc, &x);
        }
        Ok(self.reduce(t, &acc))
    }

    /// Base-`q^2` integer encoding of a reduced residue.
    pub fn encode(&self, t: &TowerParams, a: &Poly) -> u64 {
        let qq = t.field_size() as u64;
        a.coeffs().iter().rev().fold(0u64, |acc, c| acc * qq + c.index() as u64)
    }

    pub fn decode(&self, t: &TowerParams, mut code: u64) -> Poly {
        let qq = t.field_size() as u64;
        let mut c = Vec::with_capacity(self.degree());
        for _ in 0..self.degree() {
            c.push(Fq2::from_index((code % qq) as usize));
            code /= qq;
        }
        Poly::from_coeffs(c)
    }
}
