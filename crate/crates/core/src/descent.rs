//! Descent from an arbitrary element of `F_g` to the factorbase.
//!
//! A degree-`w` target `P` is rewritten through the translates `P + θ`:
//! every coset `m` gives `(cP+d) prod_α ((a-αc)P + (b-αd)) · h_1^w ≡ N_{m,P}`
//! modulo `h`. Rows whose numerator splits into factors of degree at most
//! `⌊w/2⌋` (or factors of `h/g`) are kept; factors of `h/g` become extra
//! unknowns instead of being discarded. Solving modulo `L` expresses the
//! `L`-torsion projection of `P` over smaller polynomials, and the recursion
//! bottoms out at the linear factorbase elements.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dlog::{column_elements, fg_group, FactorbaseLogs, UnitGroup};
use crate::error::{Error, Result};
use crate::field::{Fq2, TowerParams};
use crate::intmath::mod_inverse;
use crate::lattice::{crt, gcd_split_reduce_general, pohlig_hellman, GroupOps, IntMatrix};
use crate::poly::Poly;
use crate::relations::{enumerate_cosets, CosetMode, CosetRep, FactorBase};
use crate::select::FieldSetup;

pub const DEFAULT_RETRY_BUDGET: usize = 5;

/// `N_{m,P}` and the exponent `w` of the `h_1` denominator.
pub fn descent_numerator(setup: &FieldSetup, m: &CosetRep, p: &Poly) -> (Poly, u32) {
    let t = &setup.tower;
    let w = p.deg();
    let pt = p.frobenius_coeffs(t);
    let mut q = Poly::zero();
    let mut h0i = Poly::one();
    for i in 0..=w {
        let term = h0i.mul(t, &setup.h1.pow(t, (w - i) as u32)).scale(t, pt.coeff(i));
        q = q.add(t, &term);
        h0i = h0i.mul(t, &setup.h0);
    }
    let hw = setup.h1.pow(t, w as u32);
    let (a, b, c, d) = (m.a, m.b, m.c, m.d);
    let f = |u: Fq2, v: Fq2| q.scale(t, t.frobenius(u)).add(t, &hw.scale(t, t.frobenius(v)));
    let lin = |u: Fq2, v: Fq2| p.scale(t, u).add(t, &Poly::constant(v));
    let n = lin(c, d).mul(t, &f(a, b)).sub(t, &lin(a, b).mul(t, &f(c, d)));
    (n, w as u32)
}

/// An accepted descent row:
/// `prod_θ T_θ^{r_θ} · prod_i g_i^{s_i} = λ^{c_λ} h_1^{c_h1} prod_u u^{c_u}` in `F_g`,
/// where `T_θ` is `P + θ` with all factors of `h/g` removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentRelation {
    pub coset: CosetRep,
    /// Shifts `θ` with `r_θ = 1`.
    pub translates: Vec<Fq2>,
    /// Index into the setup's factors of `h/g`, and the exponent `s_i`.
    pub traps: Vec<(usize, i64)>,
    pub rhs: Vec<(Poly, i64)>,
    pub c_lambda: i64,
    pub c_h1: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationOutcome {
    Accepted(DescentRelation),
    /// `g` divides `N_{m,P}`; the congruence is useless modulo `g`.
    RejectedByG,
    Rejected,
}

/// The irreducible factors of `h` other than `g`.
pub fn cofactor_factors(setup: &FieldSetup) -> Vec<Poly> {
    setup.h_factorization.factors.iter().filter(|(f, _)| *f != setup.g).map(|(f, _)| f.clone()).collect()
}

fn valuation(t: &TowerParams, f: &Poly, p: &Poly) -> (u32, Poly) {
    let mut k = 0;
    let mut cur = f.clone();
    while !cur.is_zero() {
        let (q, r) = cur.divrem(t, p).expect("nonzero divisor");
        if !r.is_zero() {
            break;
        }
        cur = q;
        k += 1;
    }
    (k, cur)
}

/// Strip all factors of `h/g` from `f`, returning the stripped part and valuations.
pub fn strip(t: &TowerParams, f: &Poly, traps: &[Poly]) -> (Poly, Vec<u32>) {
    let mut cur = f.clone();
    let vals = traps
        .iter()
        .map(|gi| {
            let (k, rest) = valuation(t, &cur, gi);
            cur = rest;
            k
        })
        .collect();
    (cur, vals)
}

/// Classify the row produced by `m` for target `p` (monic, coprime to `h`).
pub fn try_descent_relation(setup: &FieldSetup, m: &CosetRep, p: &Poly) -> RelationOutcome {
    let t = &setup.tower;
    let traps = cofactor_factors(setup);
    let (n, w) = descent_numerator(setup, m, p);
    if n.is_zero() {
        return RelationOutcome::Rejected;
    }
    let bound = p.deg() / 2;
    let Ok(fac) = n.factor(t) else { return RelationOutcome::Rejected };
    let mut s = vec![0i64; traps.len()];
    let mut rhs = Vec::new();
    for (f, e) in &fac.factors {
        if *f == setup.g {
            return RelationOutcome::RejectedByG;
        }
        if let Some(i) = traps.iter().position(|gi| gi == f) {
            s[i] -= *e as i64;
        } else if f.deg() <= bound {
            rhs.push((f.clone(), *e as i64));
        } else {
            return RelationOutcome::Rejected;
        }
    }
    let mut konst = Fq2::ONE;
    let mut translates = Vec::new();
    let mut push = |u: Fq2, v: Fq2, konst: &mut Fq2| {
        if u.is_zero() {
            *konst = t.mul(*konst, v);
        } else {
            *konst = t.mul(*konst, u);
            translates.push(t.div(v, u).unwrap());
        }
    };
    for &alpha in t.subfield() {
        push(t.sub(m.a, t.mul(alpha, m.c)), t.sub(m.b, t.mul(alpha, m.d)), &mut konst);
    }
    push(m.c, m.d, &mut konst);
    for th in &translates {
        let (_, vals) = strip(t, &p.add(t, &Poly::constant(*th)), &traps);
        for (si, v) in s.iter_mut().zip(vals) {
            *si += v as i64;
        }
    }
    translates.sort();
    let Ok(ratio) = t.div(fac.unit, konst) else { return RelationOutcome::Rejected };
    let Ok(c_lambda) = t.small_dlog(ratio) else { return RelationOutcome::Rejected };
    let traps = s.into_iter().enumerate().filter(|&(_, e)| e != 0).collect();
    RelationOutcome::Accepted(DescentRelation {
        coset: m.clone(),
        translates,
        traps,
        rhs,
        c_lambda: c_lambda as i64,
        c_h1: -(w as i64),
    })
}

impl DescentRelation {
    /// Evaluate both sides in `F_g` for target `p`.
    pub fn verify(&self, setup: &FieldSetup, p: &Poly) -> bool {
        let t = &setup.tower;
        let grp = fg_group(setup);
        let traps = cofactor_factors(setup);
        let lambda = Poly::constant(t.lambda);
        let mut lhs: Vec<(Poly, BigInt)> = self
            .translates
            .iter()
            .map(|th| (strip(t, &p.add(t, &Poly::constant(*th)), &traps).0, BigInt::one()))
            .collect();
        lhs.extend(self.traps.iter().map(|&(i, e)| (traps[i].clone(), BigInt::from(e))));
        let mut rhs: Vec<(Poly, BigInt)> = self.rhs.iter().map(|(u, e)| (u.clone(), BigInt::from(*e))).collect();
        rhs.push((lambda, BigInt::from(self.c_lambda)));
        rhs.push((setup.h1.clone(), BigInt::from(self.c_h1)));
        match (grp.ring.product(t, &lhs), grp.ring.product(t, &rhs)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }
}

/// One descent step's linear system.
#[derive(Clone, Debug)]
pub struct DescentNode {
    pub target: Poly,
    pub relations: Vec<DescentRelation>,
    /// Indices (into [`cofactor_factors`]) of the trap columns `G_P`.
    pub g_p: Vec<usize>,
    /// `V_P`, sorted.
    pub v_p: Vec<Poly>,
    pub rejected_by_g: usize,
    pub cosets_tried: usize,
}

impl DescentNode {
    pub fn ncols(&self, t: &TowerParams) -> usize {
        t.field_size() + self.g_p.len()
    }

    /// `M_P` and the right-hand ledger over `[λ, h_1, V_P...]`.
    pub fn system(&self, t: &TowerParams) -> (IntMatrix, IntMatrix) {
        let q2 = t.field_size();
        let nc = self.ncols(t);
        let nr = 2 + self.v_p.len();
        let mut m = vec![vec![0i64; nc]; self.relations.len()];
        let mut b = vec![vec![0i64; nr]; self.relations.len()];
        for (k, rel) in self.relations.iter().enumerate() {
            for th in &rel.translates {
                m[k][th.index()] += 1;
            }
            for &(i, e) in &rel.traps {
                m[k][q2 + self.g_p.iter().position(|&j| j == i).unwrap()] += e;
            }
            b[k][0] = rel.c_lambda;
            b[k][1] = rel.c_h1;
            for (u, e) in &rel.rhs {
                b[k][2 + self.v_p.binary_search_by(|x| x.cmp(u)).unwrap()] += e;
            }
        }
        (IntMatrix::from_i64_rows(&m), IntMatrix::from_i64_rows(&b))
    }
}

/// Collect all accepted rows for target `p` (monic, `gcd(p, h) = 1`).
pub fn build_system(setup: &FieldSetup, p: &Poly, mode: CosetMode) -> Result<DescentNode> {
    let t = &setup.tower;
    if !p.gcd(t, &setup.h)?.is_one() {
        return Err(Error::InvalidParams("descent target shares a factor with h".into()));
    }
    let cosets = enumerate_cosets(t, mode);
    let outcomes: Vec<RelationOutcome> = cosets.par_iter().map(|m| try_descent_relation(setup, m, p)).collect();
    let mut relations = Vec::new();
    let mut rejected_by_g = 0;
    for o in outcomes {
        match o {
            RelationOutcome::Accepted(r) => relations.push(r),
            RelationOutcome::RejectedByG => rejected_by_g += 1,
            RelationOutcome::Rejected => {}
        }
    }
    if relations.is_empty() {
        return Err(Error::Heuristic(format!("no descent relations for {}", p.to_text(t))));
    }
    let mut g_p: Vec<usize> = relations.iter().flat_map(|r| r.traps.iter().map(|&(i, _)| i)).collect();
    g_p.sort_unstable();
    g_p.dedup();
    let mut v_p: Vec<Poly> = relations.iter().flat_map(|r| r.rhs.iter().map(|(u, _)| u.clone())).collect();
    v_p.sort();
    v_p.dedup();
    Ok(DescentNode { target: p.clone(), relations, g_p, v_p, rejected_by_g, cosets_tried: cosets.len() })
}

/// Per column of `M_P` (translates by shift index, then `G_P`), exponents
/// mod `L` over `[λ, h_1, V_P...]` valid in `F_g^x[L]`.
pub fn solve_step(setup: &FieldSetup, node: &DescentNode) -> Result<Vec<Vec<BigUint>>> {
    let t = &setup.tower;
    let (m, b) = node.system(t);
    let nc = m.cols();
    let nr = b.cols();
    let l = &setup.l;
    if l.is_one() {
        return Ok(vec![vec![BigUint::zero(); nr]; nc]);
    }
    let rows: Vec<Vec<BigInt>> =
        (0..m.rows()).map(|i| m.row(i).iter().cloned().chain(b.row(i).iter().map(|x| -x)).collect()).collect();
    let aug = IntMatrix::from_rows(rows, nc + nr);
    let split = gcd_split_reduce_general(&aug, l, nc, nc).map_err(|e| match e {
        Error::RankDeficient { modulus, pivots, required } => Error::Heuristic(format!(
            "descent system for {} has rank {pivots} < {required} modulo {modulus}",
            node.target.to_text(t)
        )),
        e => e,
    })?;
    let mut residues: Vec<Vec<Vec<(BigUint, BigUint)>>> = vec![vec![Vec::new(); nr]; nc];
    for block in &split.blocks {
        let exprs = block.pivot_expressions();
        for (j, e) in exprs.iter().enumerate() {
            let col = block.col_perm[j];
            for (f, c) in e.iter().enumerate() {
                let rc = block.col_perm[block.pivots + f] - nc;
                residues[col][rc].push((c.clone(), block.modulus.clone()));
            }
        }
    }
    let out = residues
        .iter()
        .map(|per| per.iter().map(|r| crt(r).map(|(x, _)| x)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    verify_step(setup, node, &out)?;
    Ok(out)
}

fn verify_step(setup: &FieldSetup, node: &DescentNode, sol: &[Vec<BigUint>]) -> Result<()> {
    let t = &setup.tower;
    let grp = fg_group(setup);
    let traps = cofactor_factors(setup);
    let mut basis = vec![Poly::constant(t.lambda), setup.h1.clone()];
    basis.extend(node.v_p.iter().cloned());
    let basis: Vec<Poly> = basis.iter().map(|u| grp.pow(&grp.ring.reduce(t, u), &setup.v)).collect();
    for (col, ex) in sol.iter().enumerate() {
        let elem = if col < t.field_size() {
            strip(t, &node.target.add(t, &Poly::constant(Fq2::from_index(col))), &traps).0
        } else {
            traps[node.g_p[col - t.field_size()]].clone()
        };
        let lhs = grp.pow(&grp.ring.reduce(t, &elem), &setup.v);
        let rhs = basis.iter().zip(ex).fold(Poly::one(), |acc, (u, e)| grp.mul(&acc, &grp.pow(u, e)));
        if lhs != rhs {
            return Err(Error::Verification(format!("descent expression for column {col} fails")));
        }
    }
    Ok(())
}

/// `P` itself if coprime to `h`, else `P^k mod g` for random `k` coprime
/// to `q^{2m} - 1` until coprime. Returns the exponent used.
pub fn randomize_if_shared(setup: &FieldSetup, p: &Poly, rng: &mut impl Rng, budget: usize) -> Result<(Poly, BigUint)> {
    let t = &setup.tower;
    let grp = fg_group(setup);
    let p = grp.ring.reduce(t, p);
    if p.is_zero() {
        return Err(Error::InvalidParams("element is zero modulo g".into()));
    }
    if p.gcd(t, &setup.h)?.is_one() {
        return Ok((p, BigUint::one()));
    }
    for _ in 0..budget {
        let k = random_unit_exponent(setup, rng);
        let r = grp.pow(&p, &k);
        if r.gcd(t, &setup.h)?.is_one() {
            return Ok((r, k));
        }
    }
    Err(Error::Heuristic(format!("no randomized power of {} is coprime to h", p.to_text(t))))
}

fn random_unit_exponent(setup: &FieldSetup, rng: &mut impl Rng) -> BigUint {
    let n = setup.group_order();
    let nu = n.to_u64_digits();
    loop {
        let lo = if nu.len() == 1 { rng.gen_range(2..nu[0].max(3)) } else { rng.gen::<u64>() };
        let k = BigUint::from(lo) % &n;
        if k > BigUint::one() && k.gcd(&n).is_one() {
            return k;
        }
    }
}

/// One resolved node of the descent tree.
#[derive(Clone, Debug)]
pub struct NodeReport {
    pub target: Poly,
    pub depth: usize,
    pub g_p: usize,
    pub v_p: usize,
    pub accepted: usize,
    pub rejected_by_g: usize,
    pub children: Vec<Poly>,
    pub expression: Vec<BigUint>,
}

#[derive(Clone, Debug)]
pub struct DescentConfig {
    pub retry_budget: usize,
    pub seed: u64,
    pub coset_mode: CosetMode,
    /// Hard cap on nested re-randomizations per top-level call.
    pub max_randomizations: usize,
}

impl DescentConfig {
    pub fn new(setup: &FieldSetup, seed: u64) -> DescentConfig {
        DescentConfig {
            retry_budget: DEFAULT_RETRY_BUDGET,
            seed,
            coset_mode: CosetMode::auto(&setup.tower, 4096, seed),
            max_randomizations: 10_000,
        }
    }
}

/// Expression of an element's `F_g^x[L]` projection over the factorbase.
#[derive(Clone, Debug)]
pub struct DescentResult {
    pub expression: Vec<BigUint>,
    pub depth: usize,
    pub randomizations: usize,
}

/// Stateful descent with a memo table shared across calls.
pub struct Descender<'a> {
    pub setup: &'a FieldSetup,
    pub config: DescentConfig,
    grp: UnitGroup<'a>,
    traps: Vec<Poly>,
    memo: HashMap<Poly, Vec<BigUint>>,
    rng: ChaCha8Rng,
    pub nodes: Vec<NodeReport>,
    pub heuristic_failures: usize,
    randomizations: usize,
    max_depth: usize,
}

impl<'a> Descender<'a> {
    pub fn new(setup: &'a FieldSetup, config: DescentConfig) -> Descender<'a> {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Descender {
            setup,
            config,
            grp: fg_group(setup),
            traps: cofactor_factors(setup),
            memo: HashMap::new(),
            rng,
            nodes: Vec::new(),
            heuristic_failures: 0,
            randomizations: 0,
            max_depth: 0,
        }
    }

    fn zero(&self) -> Vec<BigUint> {
        vec![BigUint::zero(); FactorBase::new(&self.setup.tower).len()]
    }

    fn axpy(&self, acc: &mut [BigUint], k: &BigUint, x: &[BigUint]) {
        let l = &self.setup.l;
        for (a, b) in acc.iter_mut().zip(x) {
            *a = (&*a + k * b) % l;
        }
    }

    /// Descend `p` (any element nonzero mod `g`).
    pub fn full_descent(&mut self, p: &Poly) -> Result<DescentResult> {
        let t = &self.setup.tower;
        let p = self.grp.ring.reduce(t, p);
        if p.is_zero() {
            return Err(Error::InvalidParams("element is zero modulo g".into()));
        }
        self.randomizations = 0;
        self.max_depth = 0;
        let expression = self.express(&p, 0)?;
        self.verify_expression(&p, &expression)?;
        Ok(DescentResult { expression, depth: self.max_depth, randomizations: self.randomizations })
    }

    fn verify_expression(&self, p: &Poly, ex: &[BigUint]) -> Result<()> {
        let s = self.setup;
        let t = &s.tower;
        let elems = column_elements(s);
        let lhs = self.grp.pow(&self.grp.ring.reduce(t, p), &s.v);
        let rhs = elems.iter().zip(ex).fold(Poly::one(), |acc, (b, e)| {
            let bv = self.grp.pow(&self.grp.ring.reduce(t, b), &s.v);
            self.grp.mul(&acc, &self.grp.pow(&bv, e))
        });
        if lhs != rhs {
            return Err(Error::Verification(format!("descent expression for {} fails", p.to_text(t))));
        }
        Ok(())
    }

    fn express(&mut self, p: &Poly, depth: usize) -> Result<Vec<BigUint>> {
        let t = &self.setup.tower;
        let fac = p.factor(t)?;
        let mut acc = self.zero();
        acc[0] = BigUint::from(t.small_dlog(fac.unit)?) % &self.setup.l;
        for (u, e) in &fac.factors {
            let x = self.express_irreducible(u, depth)?;
            self.axpy(&mut acc, &BigUint::from(*e), &x);
        }
        Ok(acc)
    }

    fn express_irreducible(&mut self, u: &Poly, depth: usize) -> Result<Vec<BigUint>> {
        if let Some(x) = self.memo.get(u) {
            return Ok(x.clone());
        }
        self.max_depth = self.max_depth.max(depth);
        let x = if u.deg() == 1 {
            let mut x = self.zero();
            x[FactorBase::linear_index(u.coeff(0))] = BigUint::one() % &self.setup.l;
            x
        } else {
            let direct = if self.traps.contains(u) {
                Err(Error::Heuristic("target divides h/g".into()))
            } else {
                self.step(u, depth)
            };
            match direct {
                Ok(x) => x,
                Err(e) if e.is_heuristic_failure() => {
                    self.heuristic_failures += 1;
                    self.retry(u, depth, e)?
                }
                Err(e) => return Err(e),
            }
        };
        self.memo.insert(u.clone(), x.clone());
        Ok(x)
    }

    fn retry(&mut self, u: &Poly, depth: usize, first: Error) -> Result<Vec<BigUint>> {
        let l = self.setup.l.clone();
        let mut last = first;
        for _ in 0..self.config.retry_budget {
            if self.randomizations >= self.config.max_randomizations {
                break;
            }
            self.randomizations += 1;
            let k = random_unit_exponent(self.setup, &mut self.rng);
            let r = self.grp.pow(&self.grp.ring.reduce(&self.setup.tower, u), &k);
            match self.express(&r, depth) {
                Ok(x) => {
                    let kinv = if l.is_one() { BigUint::zero() } else { mod_inverse(&(&k % &l), &l).expect("k is a unit") };
                    let mut out = self.zero();
                    self.axpy(&mut out, &kinv, &x);
                    return Ok(out);
                }
                Err(e) if e.is_heuristic_failure() => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(Error::Heuristic(format!("retry budget exhausted for {}: {last}", u.to_text(&self.setup.tower))))
    }

    fn step(&mut self, u: &Poly, depth: usize) -> Result<Vec<BigUint>> {
        let s = self.setup;
        let node = build_system(s, u, self.config.coset_mode)?;
        for rel in &node.relations {
            if !rel.verify(s, u) {
                return Err(Error::Verification("descent relation fails in F_g".into()));
            }
        }
        let sol = solve_step(s, &node)?;
        let target = &sol[0];
        let mut acc = self.zero();
        let n = acc.len();
        self.axpy(&mut acc, &target[0], &unit(n, 0));
        self.axpy(&mut acc, &target[1], &unit(n, 1));
        let mut children = Vec::new();
        for (v, c) in node.v_p.iter().zip(&target[2..]) {
            if c.is_zero() {
                continue;
            }
            if v.deg() > 1 {
                children.push(v.clone());
            }
            let x = self.express_irreducible(v, depth + 1)?;
            self.axpy(&mut acc, c, &x);
        }
        self.nodes.push(NodeReport {
            target: u.clone(),
            depth,
            g_p: node.g_p.len(),
            v_p: node.v_p.len(),
            accepted: node.relations.len(),
            rejected_by_g: node.rejected_by_g,
            children,
            expression: acc.clone(),
        });
        Ok(acc)
    }

    /// One block per resolved node.
    pub fn trace_text(&self) -> String {
        let t = &self.setup.tower;
        let mut s = String::new();
        for n in &self.nodes {
            let _ = writeln!(s, "node {}", n.target.to_text(t));
            let _ = writeln!(s, "depth {}", n.depth);
            let _ = writeln!(s, "g_p {}", n.g_p);
            let _ = writeln!(s, "v_p {}", n.v_p);
            let _ = writeln!(s, "relations {}", n.accepted);
            let _ = writeln!(s, "rejected_by_g {}", n.rejected_by_g);
            let kids: Vec<String> = n.children.iter().map(|c| c.to_text(t)).collect();
            let _ = writeln!(s, "children [{}]", kids.join(", "));
            let ex: Vec<String> = n.expression.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "expression {}", ex.join(" "));
            s.push('\n');
        }
        s
    }
}

fn unit(n: usize, i: usize) -> Vec<BigUint> {
    let mut v = vec![BigUint::zero(); n];
    v[i] = BigUint::one();
    v
}

/// `x` with `η^x = γ` in `F_g`, or `None` if `γ ∉ ⟨η⟩`.
pub fn dlog(
    gamma: &Poly,
    eta: &Poly,
    setup: &FieldSetup,
    logs: &FactorbaseLogs,
    descender: &mut Descender,
) -> Result<Option<BigUint>> {
    let t = &setup.tower;
    let grp = fg_group(setup);
    let g = grp.ring.reduce(t, gamma);
    let e = grp.ring.reduce(t, eta);
    if g.is_zero() || e.is_zero() {
        return Err(Error::InvalidParams("dlog arguments must be nonzero modulo g".into()));
    }
    let l = &setup.l;
    let mut residues = Vec::new();
    if !l.is_one() {
        let a = descender.full_descent(&g)?.expression;
        let b = descender.full_descent(&e)?.expression;
        let dot = |x: &[BigUint]| x.iter().zip(&logs.theta).fold(BigUint::zero(), |acc, (u, th)| (acc + u * th) % l);
        let (t1, t2) = (dot(&a), dot(&b));
        let gg = t2.gcd(l);
        if !(&t1 % &gg).is_zero() {
            return Ok(None);
        }
        let m = l / &gg;
        let j = if m.is_one() {
            BigUint::zero()
        } else {
            ((&t1 / &gg) * mod_inverse(&((&t2 / &gg) % &m), &m).unwrap()) % &m
        };
        residues.push((j, m));
    }
    let gv = grp.pow(&g, l);
    let ev = grp.pow(&e, l);
    match pohlig_hellman(&grp, &ev, &gv, &setup.v_factors) {
        Ok(j) => {
            let ord = crate::lattice::element_order(&grp, &ev, &setup.v_factors)?;
            residues.push((j, ord));
        }
        Err(Error::NotInSubgroup) => return Ok(None),
        Err(err) => return Err(err),
    }
    let (x, _) = crt(&residues)?;
    if grp.pow(&e, &x) != g {
        return Err(Error::Verification(format!(
            "dlog({}, {}) = {x} fails re-verification",
            gamma.to_text(t),
            eta.to_text(t)
        )));
    }
    Ok(Some(x))
}

/// Per-node statistics, for reporting.
pub fn summarize(nodes: &[NodeReport]) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    m.insert("nodes", nodes.len());
    m.insert("max_depth", nodes.iter().map(|n| n.depth).max().unwrap_or(0));
    m.insert("max_v_p", nodes.iter().map(|n| n.v_p).max().unwrap_or(0));
    m.insert("max_g_p", nodes.iter().map(|n| n.g_p).max().unwrap_or(0));
    m
}
