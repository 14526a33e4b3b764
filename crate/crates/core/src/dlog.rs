//! Factorbase discrete logarithms from the relation lattice.
//!
//! The Smith solver works over the Smith decomposition of `Z^{|F|}/Γ_R`: the
//! `L`-part of a log is read off the last invariant coordinate, the smooth
//! `v`-part comes from Pohlig–Hellman. The mod-`L` solver triangularizes `R`
//! modulo `L` with gcd splitting and reads logs in `F_h^x[L]` directly.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::TowerParams;
use crate::intmath::{mod_inverse, reduce_signed, torsion_idempotent};
use crate::lattice::{self, crt, pohlig_hellman, GroupOps, IntMatrix, InvariantDecomposition, ModSplitResult};
use crate::poly::Poly;
use crate::quotient::QuotientRing;
use crate::relations::{FactorBase, RelationMatrix};
use crate::select::{smooth_split, unit_group_order, FieldSetup};

/// Multiplicative group of a residue ring, for Pohlig–Hellman.
pub struct UnitGroup<'a> {
    pub tower: &'a TowerParams,
    pub ring: QuotientRing,
}

impl<'a> UnitGroup<'a> {
    pub fn new(tower: &'a TowerParams, modulus: &Poly) -> Result<UnitGroup<'a>> {
        Ok(UnitGroup { tower, ring: QuotientRing::new(tower, modulus)? })
    }
}

impl GroupOps for UnitGroup<'_> {
    type Elem = Poly;
    fn one(&self) -> Poly {
        Poly::one()
    }
    fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        self.ring.mul(self.tower, a, b)
    }
    fn pow(&self, a: &Poly, k: &BigUint) -> Poly {
        self.ring.pow(self.tower, a, k)
    }
}

/// `F_g^x`.
pub fn fg_group(setup: &FieldSetup) -> UnitGroup<'_> {
    UnitGroup::new(&setup.tower, &setup.g).expect("g has positive degree")
}

/// Factorbase elements as polynomials, in column order.
pub fn column_elements(setup: &FieldSetup) -> Vec<Poly> {
    FactorBase::new(&setup.tower).columns.iter().map(|&c| FactorBase::element(setup, c)).collect()
}

/// `prod β^{κ_β}` in the ring, exponents reduced mod `order`.
pub fn evaluate_vector(group: &UnitGroup, elems: &[Poly], kappa: &[BigInt], order: &BigUint) -> Poly {
    let mut acc = Poly::one();
    for (b, k) in elems.iter().zip(kappa) {
        let e = reduce_signed(k, order);
        if e.is_zero() {
            continue;
        }
        acc = group.mul(&acc, &group.pow(&group.ring.reduce(group.tower, b), &e));
    }
    acc
}

fn unit_vector(n: usize, i: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); n];
    v[i] = BigInt::one();
    v
}

/// `gcd(d_{|F|-1}, q^{2m} - 1)` is `q^{2C}`-smooth.
pub fn check_snf_condition(dec: &InvariantDecomposition, setup: &FieldSetup) -> bool {
    let n = BigInt::from_biguint(Sign::Plus, setup.group_order());
    let g = dec.second_last().gcd(&n).to_biguint().unwrap();
    smooth_split(&g, setup.smooth_bound()).1.is_one()
}

/// A generator of `F_g^x` with an exponent vector over the factorbase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub elem: Poly,
    pub exps: Vec<BigInt>,
}

/// Build a generator: the `L`-part from `φ(e(|F|))`, the `v`-part one prime
/// at a time from the first column with full `ℓ`-order.
pub fn find_generator(dec: &InvariantDecomposition, setup: &FieldSetup) -> Result<Generator> {
    if !check_snf_condition(dec, setup) {
        return Err(Error::Obstruction("gcd(d_(|F|-1), q^2m - 1) is not smooth".into()));
    }
    let grp = fg_group(setup);
    let elems = column_elements(setup);
    let n = setup.group_order();
    let ncols = elems.len();
    let mut exps = vec![BigInt::zero(); ncols];
    if !setup.l.is_one() {
        let eps = torsion_idempotent(&n, &setup.l).ok_or_else(|| Error::Internal("v and L not coprime".into()))?;
        let e_last = dec.basis_vector(ncols - 1);
        let epsi = BigInt::from_biguint(Sign::Plus, eps);
        for (x, e) in exps.iter_mut().zip(&e_last) {
            *x += &epsi * e;
        }
    }
    for (r, a) in &setup.v_factors {
        let part = r.pow(*a);
        let cof = &n / r;
        let col = (0..ncols)
            .find(|&i| !grp.pow(&grp.ring.reduce(&setup.tower, &elems[i]), &cof).is_one())
            .ok_or_else(|| Error::Heuristic(format!("no factorbase element has full {r}-order")))?;
        let eps = torsion_idempotent(&n, &part).ok_or_else(|| Error::Internal("bad prime power".into()))?;
        exps[col] += BigInt::from_biguint(Sign::Plus, eps);
    }
    let nb = BigInt::from_biguint(Sign::Plus, n.clone());
    for x in exps.iter_mut() {
        *x = x.mod_floor(&nb);
    }
    let elem = evaluate_vector(&grp, &elems, &exps, &n);
    if !grp.pow(&elem, &n).is_one() {
        return Err(Error::Verification("generator order does not divide q^2m - 1".into()));
    }
    for (r, _) in &setup.v_factors {
        if grp.pow(&elem, &(&n / r)).is_one() {
            return Err(Error::Verification(format!("generator has deficient {r}-part")));
        }
    }
    if !setup.l.is_one() && grp.pow(&elem, &setup.v).is_one() {
        return Err(Error::Verification("generator has trivial L-part".into()));
    }
    Ok(Generator { elem, exps })
}

/// `j` with `prod β^{a_β} = (prod β^{b_β})^j` in `F_g^x`, or `None` when the
/// first element is outside the subgroup generated by the second.
pub fn subgroup_dlog(a: &[BigInt], b: &[BigInt], dec: &InvariantDecomposition, setup: &FieldSetup) -> Result<Option<BigUint>> {
    if !check_snf_condition(dec, setup) {
        return Err(Error::Obstruction("gcd(d_(|F|-1), q^2m - 1) is not smooth".into()));
    }
    let grp = fg_group(setup);
    let elems = column_elements(setup);
    let n = setup.group_order();
    let l = &setup.l;
    let lb = BigInt::from_biguint(Sign::Plus, l.clone());
    let mut residues = Vec::new();
    if !l.is_one() {
        let t1 = lattice::project_theta(a, dec).mod_floor(&lb).to_biguint().unwrap();
        let t2 = lattice::project_theta(b, dec).mod_floor(&lb).to_biguint().unwrap();
        let g = t2.gcd(l);
        if !(&t1 % &g).is_zero() {
            return Ok(None);
        }
        let m = l / &g;
        let j = if m.is_one() {
            BigUint::zero()
        } else {
            let inv = mod_inverse(&((&t2 / &g) % &m), &m).expect("coprime after dividing by gcd");
            ((&t1 / &g) * inv) % &m
        };
        residues.push((j, m));
    }
    let pa = evaluate_vector(&grp, &elems, a, &n);
    let pb = evaluate_vector(&grp, &elems, b, &n);
    let va = grp.pow(&pa, l);
    let vb = grp.pow(&pb, l);
    match pohlig_hellman(&grp, &vb, &va, &setup.v_factors) {
        Ok(jv) => {
            let ord = lattice::element_order(&grp, &vb, &setup.v_factors)?;
            residues.push((jv, ord));
        }
        Err(Error::NotInSubgroup) => return Ok(None),
        Err(e) => return Err(e),
    }
    let (j, _) = crt(&residues)?;
    if grp.pow(&pb, &j) != pa {
        return Err(Error::Verification("subgroup log fails re-evaluation".into()));
    }
    Ok(Some(j))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Snf,
    ModSplit,
}

/// `μ^{θ_β} = β` in `F_g^x` for every column.
#[derive(Clone, Debug)]
pub struct FactorbaseLogs {
    pub generator: Generator,
    pub theta: Vec<BigUint>,
    pub method: Method,
}

impl FactorbaseLogs {
    pub fn to_text(&self, t: &TowerParams) -> String {
        let fb = FactorBase::new(t);
        let mut s = format!("{}\n", self.generator.elem.to_text(t));
        for (c, th) in fb.columns.iter().zip(&self.theta) {
            s.push_str(&format!("{} {}\n", FactorBase::label(t, *c), th));
        }
        s
    }

    /// Parse and re-verify every column against the generator.
    pub fn from_text(setup: &FieldSetup, text: &str) -> Result<FactorbaseLogs> {
        let t = &setup.tower;
        let mut lines = text.lines();
        let gen = Poly::parse(t, lines.next().ok_or_else(|| Error::Parse("empty logs file".into()))?)?;
        let fb = FactorBase::new(t);
        let mut theta = Vec::with_capacity(fb.len());
        for &col in &fb.columns {
            let l = lines.next().ok_or_else(|| Error::Parse("missing log line".into()))?;
            let (lab, val) = l.rsplit_once(' ').ok_or_else(|| Error::Parse(format!("bad log line {l:?}")))?;
            if FactorBase::parse_label(t, lab)? != col {
                return Err(Error::Parse(format!("unexpected label {lab:?}")));
            }
            theta.push(val.parse::<BigUint>().map_err(|_| Error::Parse(format!("bad log value {val:?}")))?);
        }
        let logs = FactorbaseLogs { generator: Generator { elem: gen, exps: Vec::new() }, theta, method: Method::Snf };
        logs.verify(setup)?;
        Ok(logs)
    }

    /// Check `μ^{θ_β} = β` for all columns; returns the first failing column.
    pub fn verify(&self, setup: &FieldSetup) -> Result<()> {
        let grp = fg_group(setup);
        let elems = column_elements(setup);
        for (i, (b, th)) in elems.iter().zip(&self.theta).enumerate() {
            if grp.pow(&self.generator.elem, th) != grp.ring.reduce(&setup.tower, b) {
                let label = FactorBase::label(&setup.tower, FactorBase::new(&setup.tower).columns[i]);
                return Err(Error::Verification(format!("log of column {label} fails")));
            }
        }
        Ok(())
    }
}

/// Smith solver: logs of every factorbase column to a constructed generator.
pub fn factorbase_logs(dec: &InvariantDecomposition, setup: &FieldSetup) -> Result<FactorbaseLogs> {
    let gen = find_generator(dec, setup)?;
    let n = dec.ncols();
    let theta = (0..n)
        .into_par_iter()
        .map(|i| {
            subgroup_dlog(&unit_vector(n, i), &gen.exps, dec, setup)?
                .ok_or_else(|| Error::Verification(format!("column {i} not in the generator's subgroup")))
        })
        .collect::<Result<Vec<_>>>()?;
    let logs = FactorbaseLogs { generator: gen, theta, method: Method::Snf };
    logs.verify(setup)?;
    Ok(logs)
}

/// Convenience: SNF of the relation matrix.
pub fn decompose(matrix: &RelationMatrix) -> InvariantDecomposition {
    lattice::snf(&IntMatrix::from_i64_rows(&matrix.dense_rows()))
}

/// Output of the mod-`L` solver.
#[derive(Clone, Debug)]
pub struct AlgIIResult {
    /// Generator of `F_h^x[L]`, reduced mod `h`.
    pub alpha: Poly,
    /// `log_α` of the `L`-torsion projection of each column, mod `L`.
    pub logs: Vec<BigUint>,
    pub split: ModSplitResult,
    /// Per block `L_i`, the original column left without a pivot; its
    /// projection generates `F_h^x[L_i]`.
    pub generator_columns: Vec<usize>,
    /// Per block, each column's log relative to that block's generator column.
    pub block_logs: Vec<Vec<BigUint>>,
}

/// Mod-`L` solver: triangularize `R` mod `L` with gcd splitting, then read
/// the logs in `F_h^x[L]` off the triangular systems.
pub fn alg2_solve(matrix: &RelationMatrix, setup: &FieldSetup) -> Result<AlgIIResult> {
    let t = &setup.tower;
    let r = IntMatrix::from_i64_rows(&matrix.dense_rows());
    let ncols = matrix.ncols;
    let l = &setup.l;
    let fh = UnitGroup::new(t, &setup.h)?;
    let nh = unit_group_order(t, &setup.h_factorization)?;
    let elems = column_elements(setup);
    if l.is_one() {
        return Ok(AlgIIResult {
            alpha: Poly::one(),
            logs: vec![BigUint::zero(); ncols],
            split: ModSplitResult { modulus: l.clone(), blocks: Vec::new() },
            generator_columns: Vec::new(),
            block_logs: Vec::new(),
        });
    }
    let split = lattice::gcd_split_reduce(&r, l)?;
    let mut alpha = Poly::one();
    let mut residues: Vec<Vec<(BigUint, BigUint)>> = vec![Vec::new(); ncols];
    let mut generator_columns = Vec::new();
    let mut block_logs = Vec::new();
    for block in &split.blocks {
        if !block.trailing_zero() {
            return Err(Error::Heuristic(format!("trailing entries nonzero modulo {}", block.modulus)));
        }
        let li = &block.modulus;
        let exprs = block.pivot_expressions();
        let free = block.col_perm[ncols - 1];
        let mut t_col = vec![BigUint::zero(); ncols];
        t_col[free] = BigUint::one();
        for (j, e) in exprs.iter().enumerate() {
            t_col[block.col_perm[j]] = e[0].clone();
        }
        let eps = torsion_idempotent(&nh, li)
            .ok_or_else(|| Error::Obstruction(format!("{li} shares primes with |F_h^x|/{li}")))?;
        let ai = fh.pow(&fh.ring.reduce(t, &elems[free]), &eps);
        alpha = fh.mul(&alpha, &ai);
        for (c, tc) in t_col.iter().enumerate() {
            residues[c].push((tc.clone(), li.clone()));
        }
        generator_columns.push(free);
        block_logs.push(t_col);
    }
    let logs = residues.iter().map(|res| crt(res).map(|(x, _)| x)).collect::<Result<Vec<_>>>()?;
    let eps_l = torsion_idempotent(&nh, l).ok_or_else(|| Error::Obstruction("L shares primes with |F_(h/g)^x|".into()))?;
    if !fh.pow(&alpha, l).is_one() {
        return Err(Error::Verification("alpha_L^L != 1".into()));
    }
    for (c, x) in logs.iter().enumerate() {
        let proj = fh.pow(&fh.ring.reduce(t, &elems[c]), &eps_l);
        if fh.pow(&alpha, x) != proj {
            return Err(Error::Verification(format!("mod-L log of column {c} fails")));
        }
    }
    Ok(AlgIIResult { alpha, logs, split, generator_columns, block_logs })
}

/// Smith-solver logs reduced mod `L` agree with mod-`L` solver logs after the
/// change of generator: `θ_β ≡ t_β θ_{c_i} (mod L_i)` for every block.
pub fn algorithms_agree(logs: &FactorbaseLogs, alg2: &AlgIIResult) -> bool {
    alg2.split.blocks.iter().zip(&alg2.generator_columns).zip(&alg2.block_logs).all(|((b, &c), tl)| {
        let li = &b.modulus;
        let base = &logs.theta[c] % li;
        logs.theta.iter().zip(tl).all(|(th, t)| th % li == (t * &base) % li)
    })
}
