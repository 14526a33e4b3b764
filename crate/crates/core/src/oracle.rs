//! Brute-force ground truth on tiny fields.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::descent::{dlog, DescentConfig, Descender};
use crate::dlog::{column_elements, decompose, factorbase_logs, fg_group, FactorbaseLogs, UnitGroup};
use crate::error::{Error, Result};
use crate::field::{Fq2, TowerParams};
use crate::intmath::trial_factor;
use crate::lattice::{rank_mod_prime, GroupOps, IntMatrix};
use crate::poly::Poly;
use crate::relations::{generate_all, CosetMode, FactorBase, RelationMatrix};
use crate::select::{assemble_h, nth_monic, nth_poly, unit_group_order, FieldSetup};

pub const DEFAULT_TABLE_BOUND: u64 = 1 << 25;
pub const DEFAULT_CLOSURE_BOUND: usize = 1 << 25;

/// Exhaustive discrete-log table of `F_g^x`, indexed by base-`q^2` encoding.
pub struct LogTable {
    pub generator: Poly,
    pub order: u64,
    qq: u64,
    m: usize,
    table: Vec<u32>,
}

impl LogTable {
    pub fn len(&self) -> usize {
        self.table.iter().filter(|&&x| x != u32::MAX).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn encode(&self, a: &Poly) -> Option<usize> {
        if a.deg() >= self.m && !a.is_zero() {
            return None;
        }
        let mut code = 0u64;
        for i in (0..self.m).rev() {
            code = code * self.qq + a.coeff(i).index() as u64;
        }
        Some(code as usize)
    }

    /// Log of a reduced residue; `None` for zero or unreduced input.
    pub fn log(&self, a: &Poly) -> Option<u64> {
        let x = *self.table.get(self.encode(a)?)?;
        (x != u32::MAX).then_some(x as u64)
    }
}

/// Multiply by a fixed element modulo monic `g`, on coefficient arrays.
struct MulBy<'a> {
    t: &'a TowerParams,
    g: Vec<Fq2>,
    y: Vec<Fq2>,
    buf: Vec<Fq2>,
}

impl MulBy<'_> {
    fn apply(&mut self, x: &mut [Fq2]) {
        let (t, m) = (self.t, self.g.len() - 1);
        self.buf.iter_mut().for_each(|c| *c = Fq2::ZERO);
        for (i, &a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in self.y.iter().enumerate() {
                self.buf[i + j] = t.add(self.buf[i + j], t.mul(a, b));
            }
        }
        for k in (m..self.buf.len()).rev() {
            let c = self.buf[k];
            if c.is_zero() {
                continue;
            }
            for i in 0..=m {
                self.buf[k - m + i] = t.sub(self.buf[k - m + i], t.mul(c, self.g[i]));
            }
        }
        x.copy_from_slice(&self.buf[..m]);
    }
}

fn is_primitive(grp: &UnitGroup, x: &Poly, n: &BigUint, primes: &[(BigUint, u32)]) -> bool {
    !x.is_zero() && grp.pow(x, n).is_one() && primes.iter().all(|(r, _)| !grp.pow(x, &(n / r)).is_one())
}

/// Exhaustive log table for `F_g^x`, generated by the first primitive
/// element in encoding order.
pub fn brute_logs(setup: &FieldSetup, bound: u64) -> Result<LogTable> {
    let t = &setup.tower;
    let n = setup.group_order();
    let nu = n.to_u64().filter(|&x| x < bound && x < u32::MAX as u64).ok_or(Error::SizeBound("log table too large".into()))?;
    let grp = fg_group(setup);
    let primes = trial_factor(&n, u32::MAX as u64).expect("nonzero");
    let qq = t.field_size() as u64;
    let m = t.m;
    let gen = (1..=nu)
        .map(|code| grp.ring.decode(t, code))
        .find(|x| is_primitive(&grp, x, &n, &primes))
        .ok_or_else(|| Error::Internal("F_g has no primitive element".into()))?;
    let mut g = setup.g.coeffs().to_vec();
    g.resize(m + 1, Fq2::ZERO);
    let mut y = gen.coeffs().to_vec();
    y.resize(m, Fq2::ZERO);
    let mut mul = MulBy { t, g, y, buf: vec![Fq2::ZERO; 2 * m - 1] };
    let mut table = vec![u32::MAX; (nu + 1) as usize];
    let mut x = vec![Fq2::ZERO; m];
    x[0] = Fq2::ONE;
    for k in 0..nu {
        let code = x.iter().rev().fold(0u64, |acc, c| acc * qq + c.index() as u64) as usize;
        if table[code] != u32::MAX {
            return Err(Error::Verification("generator order below q^2m - 1".into()));
        }
        table[code] = k as u32;
        mul.apply(&mut x);
    }
    if x.iter().enumerate().any(|(i, c)| *c != if i == 0 { Fq2::ONE } else { Fq2::ZERO }) {
        return Err(Error::Verification("generator power cycle does not close".into()));
    }
    Ok(LogTable { generator: gen, order: nu, qq, m, table })
}

/// Structure of the `ℓ`-primary part for one prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeReport {
    pub ell: BigUint,
    /// Exponents `e_i` of the cyclic factors `Z/ℓ^{e_i}`, descending.
    pub exponents: Vec<u32>,
    pub cyclic: bool,
    /// `rank(R mod ℓ)`, when a relation matrix was supplied.
    pub rank: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct GroupStructureReport {
    pub order: BigUint,
    pub ambient_order: BigUint,
    /// `d_1 | d_2 | ...` of the generated group.
    pub invariant_factors: Vec<BigUint>,
    /// One entry per prime dividing the ambient order.
    pub primes: Vec<PrimeReport>,
    pub ncols: usize,
}

impl GroupStructureReport {
    pub fn prime(&self, ell: &BigUint) -> Option<&PrimeReport> {
        self.primes.iter().find(|p| &p.ell == ell)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "order {}", self.order);
        let _ = writeln!(s, "ambient_order {}", self.ambient_order);
        let inv: Vec<String> = self.invariant_factors.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "invariant_factors [{}]", inv.join(", "));
        let _ = writeln!(s, "ncols {}", self.ncols);
        for p in &self.primes {
            let ex: Vec<String> = p.exponents.iter().map(|x| x.to_string()).collect();
            let rank = p.rank.map_or("-".to_string(), |r| r.to_string());
            let _ = writeln!(s, "prime {} exponents [{}] cyclic {} rank {}", p.ell, ex.join(", "), p.cyclic, rank);
        }
        s
    }
}

/// Breadth-first closure of `gens` under multiplication.
pub fn closure(grp: &UnitGroup, gens: &[Poly], bound: usize) -> Result<Vec<Poly>> {
    let mut gens: Vec<Poly> = gens.iter().filter(|g| !g.is_one()).cloned().collect();
    gens.sort();
    gens.dedup();
    let mut seen: HashSet<Poly> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(Poly::one());
    queue.push_back(Poly::one());
    let mut out = Vec::new();
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            let y = grp.mul(&x, g);
            if seen.insert(y.clone()) {
                if seen.len() > bound {
                    return Err(Error::SizeBound(format!("subgroup exceeds {bound} elements")));
                }
                queue.push_back(y);
            }
        }
        out.push(x);
    }
    Ok(out)
}

fn primary_exponents(grp: &UnitGroup, elems: &[Poly], ell: &BigUint) -> Vec<u32> {
    let mut counts: Vec<usize> = Vec::new();
    for x in elems {
        let mut k = 0usize;
        let mut y = x.clone();
        while !y.is_one() {
            y = grp.pow(&y, ell);
            k += 1;
        }
        if counts.len() <= k {
            counts.resize(k + 1, 0);
        }
        counts[k] += 1;
    }
    for k in 1..counts.len() {
        counts[k] += counts[k - 1];
    }
    let l = ell.to_f64().unwrap();
    let at_least: Vec<u32> = (1..counts.len())
        .map(|k| ((counts[k] as f64 / counts[k - 1] as f64).ln() / l.ln()).round() as u32)
        .collect();
    let mut out = Vec::new();
    for (k, &n) in at_least.iter().enumerate() {
        let next = at_least.get(k + 1).copied().unwrap_or(0);
        for _ in 0..n - next {
            out.push(k as u32 + 1);
        }
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// Structure of the subgroup of `(F[x]/f)^x` generated by `gens`, one
/// prime at a time via the `ℓ`-primary projections.
pub fn group_structure_of(
    t: &TowerParams,
    f: &Poly,
    gens: &[Poly],
    relations: Option<&IntMatrix>,
    bound: usize,
) -> Result<GroupStructureReport> {
    let grp = UnitGroup::new(t, f)?;
    let fac = f.factor(t)?;
    let ambient = unit_group_order(t, &fac)?;
    let mut ambient_primes: Vec<(BigUint, u32)> = Vec::new();
    let qq = BigUint::from(t.field_size());
    for (g, a) in &fac.factors {
        let d = g.deg() as u32;
        let mut pieces = vec![qq.pow(d) - 1u32];
        if *a > 1 {
            pieces.push(qq.pow(d * (a - 1)));
        }
        for piece in pieces {
            for (r, e) in trial_factor(&piece, u32::MAX as u64).ok_or(Error::Internal("zero order".into()))? {
                match ambient_primes.iter_mut().find(|(x, _)| *x == r) {
                    Some(slot) => slot.1 += e,
                    None => ambient_primes.push((r, e)),
                }
            }
        }
    }
    ambient_primes.sort();
    let reduced: Vec<Poly> = gens.iter().map(|g| grp.ring.reduce(t, g)).collect();
    let mut primes = Vec::new();
    let mut order = BigUint::one();
    for (ell, a) in &ambient_primes {
        let cof = &ambient / ell.pow(*a);
        let proj: Vec<Poly> = reduced.iter().map(|g| grp.pow(g, &cof)).collect();
        let sub = closure(&grp, &proj, bound)?;
        order *= BigUint::from(sub.len());
        let exponents = primary_exponents(&grp, &sub, ell);
        let rank = relations.map(|r| rank_mod_prime(r, ell));
        primes.push(PrimeReport { ell: ell.clone(), cyclic: exponents.len() <= 1, exponents, rank });
    }
    let depth = primes.iter().map(|p| p.exponents.len()).max().unwrap_or(0);
    let mut invariant_factors: Vec<BigUint> = (0..depth)
        .map(|i| primes.iter().filter_map(|p| p.exponents.get(i).map(|&e| p.ell.pow(e))).product())
        .collect();
    invariant_factors.reverse();
    Ok(GroupStructureReport { order, ambient_order: ambient, invariant_factors, primes, ncols: gens.len() })
}

/// Structure of `⟨F_h⟩ ⊆ F_h^x`, with ranks of `R` modulo each prime.
pub fn group_structure(setup: &FieldSetup, matrix: Option<&RelationMatrix>) -> Result<GroupStructureReport> {
    let r = matrix.map(|m| IntMatrix::from_i64_rows(&m.dense_rows()));
    group_structure_of(&setup.tower, &setup.h, &column_elements(setup), r.as_ref(), DEFAULT_CLOSURE_BOUND)
}

/// Primes `ℓ > q^{2C}` dividing `q^{2m} - 1`.
pub fn large_primes(setup: &FieldSetup) -> Vec<BigUint> {
    if setup.l.is_one() {
        return Vec::new();
    }
    trial_factor(&setup.l, u32::MAX as u64).expect("L > 0").into_iter().map(|(p, _)| p).collect()
}

#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub structure: GroupStructureReport,
    /// Large primes that also divide `|F_{h/g}^x|`; the obstruction needs one.
    pub qualifying: Vec<BigUint>,
    /// Some large `ℓ` has a non-cyclic `ℓ`-primary part of `⟨F_h⟩`.
    pub obstructed: bool,
    /// Some large `ℓ` has `rank(R mod ℓ) < |F| - 1`.
    pub rank_deficient: bool,
    /// Per large prime, the cyclicity and rank criteria agree.
    pub consistent: bool,
    pub relations: usize,
}

impl ObstructionReport {
    pub fn to_text(&self) -> String {
        let q: Vec<String> = self.qualifying.iter().map(|x| x.to_string()).collect();
        format!(
            "{}qualifying [{}]\nrelations {}\nobstructed {}\nrank_deficient {}\nconsistent {}\n",
            self.structure.to_text(),
            q.join(", "),
            self.relations,
            self.obstructed,
            self.rank_deficient,
            self.consistent
        )
    }
}

/// Generate relations for `setup` (goodness not required) and compare the
/// group-theoretic and rank criteria at every large prime.
pub fn obstruction_probe(setup: &FieldSetup, mode: CosetMode) -> Result<ObstructionReport> {
    let matrix = generate_all(setup, mode)?;
    let report = group_structure(setup, Some(&matrix))?;
    Ok(classify(setup, report, Some(matrix.rows.len())))
}

/// The group-theoretic predicate alone, for an `h` not of the
/// `h_1 x^q - h_0` shape (no relations, so no `h_1` column).
pub fn obstruction_probe_direct(t: &TowerParams, h: &Poly, g: &Poly, c: u32) -> Result<ObstructionReport> {
    let h1 = Poly::one();
    let fake = FieldSetup::unchecked_parts(t.clone(), c, h.clone(), g.clone(), h1)?;
    let mut gens = vec![Poly::constant(t.lambda)];
    gens.extend(t.elements().map(Poly::linear));
    let report = group_structure_of(t, h, &gens, None, DEFAULT_CLOSURE_BOUND)?;
    Ok(classify(&fake, report, None))
}

fn classify(setup: &FieldSetup, structure: GroupStructureReport, relations: Option<usize>) -> ObstructionReport {
    let t = &setup.tower;
    let cof = setup.h.div_exact(t, &setup.g).expect("g divides h");
    let cof_order = if cof.is_one() {
        BigUint::one()
    } else {
        unit_group_order(t, &cof.factor(t).expect("nonconstant")).expect("nonconstant")
    };
    let large = large_primes(setup);
    let qualifying: Vec<BigUint> = large.iter().filter(|l| (&cof_order % *l).is_zero()).cloned().collect();
    let full = FactorBase::new(t).len();
    let mut obstructed = false;
    let mut rank_deficient = false;
    let mut consistent = true;
    for ell in &large {
        let p = structure.prime(ell);
        let noncyclic = p.is_some_and(|p| !p.cyclic);
        let deficient = p.and_then(|p| p.rank).is_some_and(|r| r + 1 < full);
        obstructed |= noncyclic;
        rank_deficient |= deficient;
        if relations.is_some() && noncyclic != deficient {
            consistent = false;
        }
    }
    ObstructionReport {
        structure,
        qualifying,
        obstructed,
        rank_deficient,
        consistent,
        relations: relations.unwrap_or(0),
    }
}

/// First `h = h_1 x^q - h_0` (over `q = 3, 4` in turn) that is a product
/// of two distinct degree-`m` irreducibles with a shared prime `ℓ > q^{2C}`.
pub fn find_obstruction_instance(c: u32) -> Option<FieldSetup> {
    for (p, e, m) in [(3u32, 1u32, 3usize), (2, 2, 3), (2, 2, 4)] {
        let Ok(t) = crate::field::build_standalone(p, e, m) else { continue };
        let q = t.q as usize;
        let Some(d) = (2 * m).checked_sub(q).map(|d| d as u32) else { continue };
        let qq = t.field_size() as u64;
        let n_h1 = qq.pow(d);
        let first_h1: u64 = (0..d).map(|i| qq.pow(i)).sum();
        for i1 in first_h1..first_h1 + n_h1 {
            let h1 = nth_monic(qq, i1);
            for i0 in 1..qq.pow(d + 1) {
                let h0 = nth_poly(qq, i0);
                if !h0.gcd(&t, &h1).is_ok_and(|g| g.is_one()) {
                    continue;
                }
                let h = assemble_h(&t, &h0, &h1);
                let Ok(f) = h.factor(&t) else { continue };
                if f.factors.len() != 2 || f.factors.iter().any(|(g, a)| g.deg() != m || *a != 1) {
                    continue;
                }
                let g = f.factors[0].0.clone();
                let Ok(s) = FieldSetup::unchecked(t.clone(), c, d, h0, h1.clone(), g) else { continue };
                if !s.l.is_one() {
                    return Some(s);
                }
            }
        }
    }
    None
}

/// Counts from [`verify_pipeline`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PipelineReport {
    pub columns_checked: usize,
    pub dlogs_checked: usize,
    pub non_members: usize,
}

/// Compare the factorbase logs with the table (up to the change of
/// generator), then run `samples` random descent logs against it.
pub fn verify_pipeline(
    setup: &FieldSetup,
    matrix: &RelationMatrix,
    table: &LogTable,
    samples: usize,
    seed: u64,
) -> Result<PipelineReport> {
    let logs = factorbase_logs(&decompose(matrix), setup)?;
    let mut rep = PipelineReport { columns_checked: check_logs(setup, &logs, table)?, ..Default::default() };
    let mut desc = Descender::new(setup, DescentConfig::new(setup, seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let gamma = random_target(setup, &mut rng);
        let eta = random_target(setup, &mut rng);
        let got = dlog(&gamma, &eta, setup, &logs, &mut desc)?;
        check_dlog(setup, table, &gamma, &eta, got.as_ref())?;
        rep.dlogs_checked += 1;
        if got.is_none() {
            rep.non_members += 1;
        }
    }
    Ok(rep)
}

/// `θ_β · log(μ) ≡ table[β]` for every column; returns the column count.
pub fn check_logs(setup: &FieldSetup, logs: &FactorbaseLogs, table: &LogTable) -> Result<usize> {
    let t = &setup.tower;
    let grp = fg_group(setup);
    let n = BigUint::from(table.order);
    let tmu = BigUint::from(table.log(&logs.generator.elem).ok_or(Error::Verification("generator not in table".into()))?);
    if !tmu.gcd(&n).is_one() {
        return Err(Error::Verification("generator is not primitive".into()));
    }
    let fb = FactorBase::new(t);
    for ((col, b), th) in fb.columns.iter().zip(column_elements(setup)).zip(&logs.theta) {
        let want = BigUint::from(table.log(&grp.ring.reduce(t, &b)).expect("nonzero"));
        if (th * &tmu) % &n != want {
            return Err(Error::Verification(format!(
                "column {}: theta {} * log(mu) {} != table {}",
                FactorBase::label(t, *col),
                th,
                tmu,
                want
            )));
        }
    }
    Ok(fb.len())
}

/// Check one descent answer against the table, including non-membership.
pub fn check_dlog(setup: &FieldSetup, table: &LogTable, gamma: &Poly, eta: &Poly, got: Option<&BigUint>) -> Result<()> {
    let t = &setup.tower;
    let grp = fg_group(setup);
    let n = table.order;
    let tg = table.log(&grp.ring.reduce(t, gamma)).ok_or(Error::InvalidParams("gamma is zero mod g".into()))?;
    let te = table.log(&grp.ring.reduce(t, eta)).ok_or(Error::InvalidParams("eta is zero mod g".into()))?;
    let member = tg % te.gcd(&n) == 0;
    let ok = match got {
        Some(x) => member && (BigUint::from(te) * x) % n == BigUint::from(tg),
        None => !member,
    };
    if !ok {
        return Err(Error::Verification(format!(
            "dlog({}, {}) = {:?} disagrees with table ({tg}, {te})",
            gamma.to_text(t),
            eta.to_text(t),
            got
        )));
    }
    Ok(())
}

/// Random monic target of degree 2 or 3 (capped below `m`), nonzero mod `g`.
pub fn random_target(setup: &FieldSetup, rng: &mut impl Rng) -> Poly {
    let t = &setup.tower;
    let hi = 3.min(t.m - 1);
    loop {
        let deg = rng.gen_range(2.min(hi)..=hi);
        let mut c: Vec<Fq2> = (0..deg).map(|_| Fq2::from_index(rng.gen_range(0..t.field_size()))).collect();
        c.push(Fq2::ONE);
        let p = Poly::from_coeffs(c);
        if !p.rem(t, &setup.g).map(|r| r.is_zero()).unwrap_or(true) {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::build_standalone;
    use crate::select::search_good;

    fn q4() -> FieldSetup {
        search_good(&build_standalone(2, 2, 3).unwrap(), 1, 2).unwrap()
    }

    #[test]
    fn table_basics() {
        let s = q4();
        let tab = brute_logs(&s, DEFAULT_TABLE_BOUND).unwrap();
        assert_eq!(tab.len(), 4095);
        assert_eq!(tab.log(&Poly::one()), Some(0));
        assert_eq!(tab.log(&tab.generator), Some(1));
        assert_eq!(tab.log(&Poly::zero()), None);
    }

    #[test]
    fn table_bound_enforced() {
        assert!(matches!(brute_logs(&q4(), 1000), Err(Error::SizeBound(_))));
    }

    #[test]
    fn good_setup_structure_divides_ambient() {
        let s = q4();
        let m = generate_all(&s, CosetMode::Exhaustive).unwrap();
        let rep = group_structure(&s, Some(&m)).unwrap();
        assert!((&rep.ambient_order % &rep.order).is_zero());
        let prod: BigUint = rep.invariant_factors.iter().product();
        assert_eq!(prod, rep.order);
        assert!(rep.invariant_factors.windows(2).all(|w| (&w[1] % &w[0]).is_zero()));
    }

    #[test]
    fn primary_parts_of_split_modulus() {
        // F_16[x]/(x(x+1)) has unit group C15 x C15.
        let t = build_standalone(2, 2, 3).unwrap();
        let f = Poly::linear(Fq2::ONE).mul(&t, &Poly::x());
        let grp = UnitGroup::new(&t, &f).unwrap();
        let consts: Vec<Poly> = t.units().map(|a| grp.pow(&Poly::constant(a), &BigUint::from(5u32))).collect();
        let diag = closure(&grp, &consts, 1000).unwrap();
        assert_eq!(diag.len(), 3);
        assert_eq!(primary_exponents(&grp, &diag, &BigUint::from(3u32)), vec![1]);
        let mut all = Vec::new();
        for a in t.elements() {
            for b in t.elements() {
                let p = Poly::from_coeffs(vec![b, a]);
                if p.gcd(&t, &f).unwrap().is_one() {
                    all.push(grp.pow(&p, &BigUint::from(5u32)));
                }
            }
        }
        let full = closure(&grp, &all, 1000).unwrap();
        assert_eq!(full.len(), 9);
        assert_eq!(primary_exponents(&grp, &full, &BigUint::from(3u32)), vec![1, 1]);
        let rep = group_structure_of(&t, &f, &all, None, 1000).unwrap();
        assert_eq!(rep.order, BigUint::from(9u32));
        assert_eq!(rep.invariant_factors, vec![BigUint::from(3u32), BigUint::from(3u32)]);
    }

    #[test]
    fn pipeline_passes_at_q4() {
        let s = q4();
        let m = generate_all(&s, CosetMode::Exhaustive).unwrap();
        let tab = brute_logs(&s, DEFAULT_TABLE_BOUND).unwrap();
        let rep = verify_pipeline(&s, &m, &tab, 10, 3).unwrap();
        assert_eq!(rep.columns_checked, 18);
        assert_eq!(rep.dlogs_checked, 10);
    }
}
