//! Factorbase, coset representatives of `PGL(2, q)` in `PGL(2, q^2)`, and
//! relation generation.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Fq2, TowerParams};
use crate::poly::Poly;
use crate::quotient::QuotientRing;
use crate::select::FieldSetup;

/// Largest `q^2` for which cosets are enumerated exhaustively by default.
pub const EXHAUSTIVE_LIMIT: usize = 128;

/// Factorbase column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Column {
    Lambda,
    H1,
    /// `x + θ`.
    Linear(Fq2),
}

/// Columns `λ`, `h_1`, then `x + θ` in coordinate order of `θ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorBase {
    pub columns: Vec<Column>,
}

impl FactorBase {
    pub fn new(t: &TowerParams) -> FactorBase {
        let mut columns = vec![Column::Lambda, Column::H1];
        columns.extend(t.elements().map(Column::Linear));
        FactorBase { columns }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn linear_index(theta: Fq2) -> usize {
        2 + theta.index()
    }

    pub fn index_of(col: Column) -> usize {
        match col {
            Column::Lambda => 0,
            Column::H1 => 1,
            Column::Linear(th) => Self::linear_index(th),
        }
    }

    pub fn label(t: &TowerParams, col: Column) -> String {
        match col {
            Column::Lambda => "lambda".into(),
            Column::H1 => "h1".into(),
            Column::Linear(th) => format!("x+{}", t.elem_token(th)),
        }
    }

    pub fn parse_label(t: &TowerParams, s: &str) -> Result<Column> {
        match s {
            "lambda" => Ok(Column::Lambda),
            "h1" => Ok(Column::H1),
            _ => {
                let tok = s.strip_prefix("x+").ok_or_else(|| Error::Parse(format!("bad column label {s:?}")))?;
                Ok(Column::Linear(t.parse_elem(tok)?))
            }
        }
    }

    /// The column's polynomial (for `λ`, the constant `λ`).
    pub fn element(setup: &FieldSetup, col: Column) -> Poly {
        match col {
            Column::Lambda => Poly::constant(setup.tower.lambda),
            Column::H1 => setup.h1.clone(),
            Column::Linear(th) => Poly::linear(th),
        }
    }
}

/// Point of `P^1(F_{q^2})`, encoded as the element index or `q^2` for `∞`.
pub type P1Code = u16;

/// A Möbius matrix with its coset invariant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CosetRep {
    pub a: Fq2,
    pub b: Fq2,
    pub c: Fq2,
    pub d: Fq2,
    /// Sorted image of `P^1(F_q)` under the inverse map
    /// `z -> (dz - b)/(-cz + a)`. Rows depend only on the class of `m`
    /// modulo left multiplication by `PGL(2, q)`, which fixes this set.
    pub invariant: Vec<P1Code>,
}

impl CosetRep {
    pub fn new(t: &TowerParams, a: Fq2, b: Fq2, c: Fq2, d: Fq2) -> Option<CosetRep> {
        if t.sub(t.mul(a, d), t.mul(b, c)).is_zero() {
            return None;
        }
        let invariant = coset_invariant(t, d, t.neg(b), t.neg(c), a);
        Some(CosetRep { a, b, c, d, invariant })
    }

    /// Rescale so the first nonzero entry of `(a, b, c, d)` is 1.
    pub fn normalized(&self, t: &TowerParams) -> CosetRep {
        let lead = [self.a, self.b, self.c, self.d].into_iter().find(|x| !x.is_zero()).unwrap();
        let s = t.inv(lead).unwrap();
        CosetRep {
            a: t.mul(self.a, s),
            b: t.mul(self.b, s),
            c: t.mul(self.c, s),
            d: t.mul(self.d, s),
            invariant: self.invariant.clone(),
        }
    }
}

fn coset_invariant(t: &TowerParams, a: Fq2, b: Fq2, c: Fq2, d: Fq2) -> Vec<P1Code> {
    let inf = t.field_size() as P1Code;
    let apply = |num: Fq2, den: Fq2| -> P1Code {
        if den.is_zero() {
            inf
        } else {
            t.div(num, den).unwrap().index() as P1Code
        }
    };
    let mut img: Vec<P1Code> = t
        .subfield()
        .iter()
        .map(|&z| apply(t.add(t.mul(a, z), b), t.add(t.mul(c, z), d)))
        .collect();
    img.push(apply(a, c));
    img.sort_unstable();
    img
}

/// How cosets are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CosetMode {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

impl CosetMode {
    /// Exhaustive when `q^2 <= EXHAUSTIVE_LIMIT`, otherwise sampled.
    pub fn auto(t: &TowerParams, samples: usize, seed: u64) -> CosetMode {
        if t.field_size() <= EXHAUSTIVE_LIMIT {
            CosetMode::Exhaustive
        } else {
            CosetMode::Sampled { count: samples, seed }
        }
    }
}

impl fmt::Display for CosetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CosetMode::Exhaustive => f.write_str("exhaustive"),
            CosetMode::Sampled { count, seed } => write!(f, "sampled({count}, seed={seed})"),
        }
    }
}

/// Cosets sorted by invariant.
pub fn enumerate_cosets(t: &TowerParams, mode: CosetMode) -> Vec<CosetRep> {
    let mut out = match mode {
        CosetMode::Exhaustive => exhaustive_cosets(t),
        CosetMode::Sampled { count, seed } => sampled_cosets(t, count, seed),
    };
    out.sort_by(|x, y| x.invariant.cmp(&y.invariant));
    out
}

/// Every normalized matrix, keeping the first per invariant.
fn exhaustive_cosets(t: &TowerParams) -> Vec<CosetRep> {
    let n = t.field_size();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut visit = |a: usize, b: usize, c: usize, d: usize| {
        let (a, b, c, d) = (Fq2::from_index(a), Fq2::from_index(b), Fq2::from_index(c), Fq2::from_index(d));
        if let Some(m) = CosetRep::new(t, a, b, c, d) {
            if seen.insert(m.invariant.clone()) {
                out.push(m);
            }
        }
    };
    for b in 0..n {
        for c in 0..n {
            for d in 0..n {
                visit(1, b, c, d);
            }
        }
    }
    for c in 0..n {
        for d in 0..n {
            visit(0, 1, c, d);
        }
    }
    out
}

fn sampled_cosets(t: &TowerParams, count: usize, seed: u64) -> Vec<CosetRep> {
    let q = t.q as usize;
    let total = q * (q * q + 1);
    let target = count.min(total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(target);
    let n = t.field_size();
    let mut draw = || Fq2::from_index(rng.gen_range(0..n));
    while out.len() < target {
        let (a, b, c, d) = (draw(), draw(), draw(), draw());
        if let Some(m) = CosetRep::new(t, a, b, c, d) {
            if seen.insert(m.invariant.clone()) {
                out.push(m.normalized(t));
            }
        }
    }
    out
}

/// `N_m(x)` for the relation identity.
pub fn numerator(setup: &FieldSetup, m: &CosetRep) -> Poly {
    let t = &setup.tower;
    let (a, b, c, d) = (m.a, m.b, m.c, m.d);
    let (aq, bq, cq, dq) = (t.frobenius(a), t.frobenius(b), t.frobenius(c), t.frobenius(d));
    let k1 = t.sub(t.mul(c, aq), t.mul(a, cq));
    let k2 = t.sub(t.mul(d, aq), t.mul(b, cq));
    let k3 = t.sub(t.mul(c, bq), t.mul(a, dq));
    let k4 = t.sub(t.mul(d, bq), t.mul(b, dq));
    let xh0 = setup.h0.shift(1);
    let xh1 = setup.h1.shift(1);
    xh0.scale(t, k1)
        .add(t, &setup.h0.scale(t, k2))
        .add(t, &xh1.scale(t, k3))
        .add(t, &setup.h1.scale(t, k4))
}

/// Where a row came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Coset(CosetRep),
    LambdaOrder,
    /// Read back from a file.
    Loaded,
}

/// Sparse integer row over factorbase columns, sorted by column index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationRow {
    pub entries: Vec<(usize, i64)>,
    pub provenance: Provenance,
}

impl RelationRow {
    pub fn dense(&self, ncols: usize) -> Vec<i64> {
        let mut v = vec![0; ncols];
        for &(i, e) in &self.entries {
            v[i] += e;
        }
        v
    }

    pub fn from_dense(v: &[i64], provenance: Provenance) -> RelationRow {
        let entries = v.iter().enumerate().filter(|(_, &e)| e != 0).map(|(i, &e)| (i, e)).collect();
        RelationRow { entries, provenance }
    }

    pub fn get(&self, col: usize) -> i64 {
        self.entries.iter().find(|(i, _)| *i == col).map_or(0, |(_, e)| *e)
    }
}

/// The row for `λ^{q^2 - 1} = 1`.
pub fn lambda_order_row(t: &TowerParams) -> RelationRow {
    RelationRow { entries: vec![(0, t.unit_order() as i64)], provenance: Provenance::LambdaOrder }
}

/// Monic-normalize `A ζ + B`: returns the constant and optionally the shift `θ`
/// of the monic linear factor `ζ + θ`.
fn normalize_linear(t: &TowerParams, a: Fq2, b: Fq2) -> (Fq2, Option<Fq2>) {
    if a.is_zero() {
        (b, None)
    } else {
        (a, Some(t.div(b, a).unwrap()))
    }
}

/// The row produced by `m` when `N_m` splits into linear factors.
pub fn try_relation(setup: &FieldSetup, m: &CosetRep) -> Option<RelationRow> {
    let t = &setup.tower;
    let n = numerator(setup, m);
    let split = n.splits_into_linears(t)?;
    let mut exps: BTreeMap<usize, i64> = BTreeMap::new();
    let mut konst = Fq2::ONE;
    let mut lhs = |a: Fq2, b: Fq2, konst: &mut Fq2| {
        let (k, th) = normalize_linear(t, a, b);
        *konst = t.mul(*konst, k);
        if let Some(th) = th {
            *exps.entry(FactorBase::linear_index(th)).or_default() += 1;
        }
    };
    for &alpha in t.subfield() {
        lhs(t.sub(m.a, t.mul(alpha, m.c)), t.sub(m.b, t.mul(alpha, m.d)), &mut konst);
    }
    lhs(m.c, m.d, &mut konst);
    *exps.entry(1).or_default() += 1;
    for &(th, mult) in &split.shifts {
        *exps.entry(FactorBase::linear_index(th)).or_default() -= mult as i64;
    }
    let ratio = t.div(konst, split.unit).ok()?;
    let lam = t.small_dlog(ratio).ok()? as i64;
    *exps.entry(0).or_default() += lam;
    let entries = exps.into_iter().filter(|&(_, e)| e != 0).collect();
    Some(RelationRow { entries, provenance: Provenance::Coset(m.clone()) })
}

/// Evaluate `prod β^{e_β} = 1` modulo `f`, comparing the positive and
/// negative parts so that no inverse is needed.
pub fn verify_row_mod(setup: &FieldSetup, row: &RelationRow, f: &Poly) -> bool {
    let t = &setup.tower;
    let Ok(ring) = QuotientRing::new(t, f) else { return false };
    let mut num = Poly::one();
    let mut den = Poly::one();
    let fb = FactorBase::new(t);
    let mut lam_exp: i64 = 0;
    for &(i, e) in &row.entries {
        if i >= fb.len() {
            return false;
        }
        let col = fb.columns[i];
        if col == Column::Lambda {
            lam_exp += e;
            continue;
        }
        let base = ring.reduce(t, &FactorBase::element(setup, col));
        let k = num_bigint::BigUint::from(e.unsigned_abs());
        let x = ring.pow(t, &base, &k);
        if e > 0 {
            num = ring.mul(t, &num, &x);
        } else {
            den = ring.mul(t, &den, &x);
        }
    }
    let n = t.unit_order() as i64;
    num = ring.mul(t, &num, &Poly::constant(t.lambda_pow(lam_exp.rem_euclid(n) as u64)));
    ring.reduce(t, &num) == ring.reduce(t, &den) && !ring.reduce(t, &den).is_zero()
}

/// The row holds in `F_h^x`.
pub fn verify_row(setup: &FieldSetup, row: &RelationRow) -> bool {
    verify_row_mod(setup, row, &setup.h)
}

/// Relation matrix with its column map and setup digest.
#[derive(Clone, Debug)]
pub struct RelationMatrix {
    pub ncols: usize,
    pub rows: Vec<RelationRow>,
    pub digest: String,
    /// Cosets examined during generation (0 when loaded).
    pub cosets_tried: usize,
}

impl RelationMatrix {
    pub fn dense_rows(&self) -> Vec<Vec<i64>> {
        self.rows.iter().map(|r| r.dense(self.ncols)).collect()
    }

    /// Number of rows equal to an earlier row.
    pub fn duplicate_count(&self) -> usize {
        let mut seen = HashSet::new();
        self.rows.iter().filter(|r| !seen.insert(r.entries.clone())).count()
    }

    /// Rows from cosets, excluding the `λ`-order row.
    pub fn coset_row_count(&self) -> usize {
        self.rows.iter().filter(|r| matches!(r.provenance, Provenance::Coset(_))).count()
    }

    pub fn to_text(&self, t: &TowerParams) -> String {
        let fb = FactorBase::new(t);
        let mut s = format!("{} {} {}\n", self.ncols, self.rows.len(), self.digest);
        for &col in &fb.columns {
            s.push_str(&FactorBase::label(t, col));
            s.push('\n');
        }
        for row in self.dense_rows() {
            let line: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(t: &TowerParams, text: &str) -> Result<RelationMatrix> {
        let mut lines = text.lines();
        let head: Vec<&str> = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?.split_whitespace().collect();
        if head.len() != 3 {
            return Err(Error::Parse("matrix header must be `|F| rowcount digest`".into()));
        }
        let ncols: usize = head[0].parse().map_err(|_| Error::Parse("bad column count".into()))?;
        let nrows: usize = head[1].parse().map_err(|_| Error::Parse("bad row count".into()))?;
        let fb = FactorBase::new(t);
        if ncols != fb.len() {
            return Err(Error::Parse(format!("matrix has {ncols} columns, factorbase has {}", fb.len())));
        }
        for &col in &fb.columns {
            let l = lines.next().ok_or_else(|| Error::Parse("missing column label".into()))?;
            if FactorBase::parse_label(t, l.trim())? != col {
                return Err(Error::Parse(format!("unexpected column label {l:?}")));
            }
        }
        let mut rows = Vec::with_capacity(nrows);
        for _ in 0..nrows {
            let l = lines.next().ok_or_else(|| Error::Parse("missing row".into()))?;
            let v: Vec<i64> = l
                .split_whitespace()
                .map(|x| x.parse().map_err(|_| Error::Parse(format!("bad entry {x:?}"))))
                .collect::<Result<_>>()?;
            if v.len() != ncols {
                return Err(Error::Parse("row length mismatch".into()));
            }
            let prov = if v[0] == t.unit_order() as i64 && v[1..].iter().all(|&e| e == 0) {
                Provenance::LambdaOrder
            } else {
                Provenance::Loaded
            };
            rows.push(RelationRow::from_dense(&v, prov));
        }
        Ok(RelationMatrix { ncols, rows, digest: head[2].to_string(), cosets_tried: 0 })
    }
}

/// Try every coset; verified rows in invariant order, then the `λ`-order row.
pub fn generate_all(setup: &FieldSetup, mode: CosetMode) -> Result<RelationMatrix> {
    let t = &setup.tower;
    let cosets = enumerate_cosets(t, mode);
    let found: Vec<Option<RelationRow>> = cosets.par_iter().map(|m| try_relation(setup, m)).collect();
    let mut rows = Vec::new();
    for row in found.into_iter().flatten() {
        if !verify_row(setup, &row) {
            return Err(Error::Verification(format!("relation from {:?} fails in F_h", row.provenance)));
        }
        rows.push(row);
    }
    rows.push(lambda_order_row(t));
    Ok(RelationMatrix { ncols: FactorBase::new(t).len(), rows, digest: setup.digest(), cosets_tried: cosets.len() })
}

/// `q (q^2 + 1)`.
pub fn coset_count(q: u64) -> u64 {
    q * (q * q + 1)
}

/// Random invertible matrix, for tests and sampling helpers.
pub fn random_coset(t: &TowerParams, rng: &mut impl Rng) -> CosetRep {
    let n = t.field_size();
    loop {
        let mut draw = || Fq2::from_index(rng.gen_range(0..n));
        if let Some(m) = CosetRep::new(t, draw(), draw(), draw(), draw()) {
            return m;
        }
    }
}
