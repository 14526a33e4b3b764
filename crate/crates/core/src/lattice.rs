//! Exact integer linear algebra: Smith normal form with transforms,
//! elimination modulo a composite of unknown factorization by gcd
//! splitting, Pohlig–Hellman and CRT.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::intmath::mod_inverse;

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> IntMatrix {
        let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let cols = big.first().map_or(0, |r| r.len());
        IntMatrix::from_rows(big, cols)
    }

    /// `cols` is needed when there are no rows.
    pub fn from_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> IntMatrix {
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        let n = rows.len();
        IntMatrix { rows: n, cols, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: BigInt) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul(&self, o: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        out.data[i * o.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![BigInt::zero(); self.cols];
        for (i, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += x * self.get(i, j);
            }
        }
        out
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// `row_dst += k * row_src`.
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        for j in 0..self.cols {
            let s = &self.data[src * self.cols + j] * k;
            self.data[dst * self.cols + j] += s;
        }
    }

    /// `col_dst += k * col_src`.
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        for i in 0..self.rows {
            let s = &self.data[i * self.cols + src] * k;
            self.data[i * self.cols + dst] += s;
        }
    }

    pub fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let x = std::mem::take(&mut self.data[i * self.cols + j]);
            self.data[i * self.cols + j] = -x;
        }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// Determinant by fraction-free elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a.get(i, k).is_zero()) else { return BigInt::zero() };
            if p != k {
                a.swap_rows(p, k);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
                a.set(i, k, BigInt::zero());
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Smith data: `U M V = diag`, with `e(i)` the rows of `V^{-1}`.
#[derive(Clone, Debug)]
pub struct InvariantDecomposition {
    /// One entry per column; `0` encodes an infinite cyclic factor.
    pub diag: Vec<BigInt>,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl InvariantDecomposition {
    pub fn ncols(&self) -> usize {
        self.diag.len()
    }

    /// `e(i)`, 0-based.
    pub fn basis_vector(&self, i: usize) -> Vec<BigInt> {
        self.v_inv.row(i).to_vec()
    }

    /// Coordinates of `κ` in the basis `e(1..n)`.
    pub fn coordinates(&self, kappa: &[BigInt]) -> Vec<BigInt> {
        self.v.left_mul_vec(kappa)
    }

    /// The last invariant factor `d_{|F|}`.
    pub fn last(&self) -> &BigInt {
        self.diag.last().expect("nonempty decomposition")
    }

    /// `d_{|F| - 1}` (0 when fewer than two columns).
    pub fn second_last(&self) -> BigInt {
        let n = self.diag.len();
        if n < 2 {
            BigInt::one()
        } else {
            self.diag[n - 2].clone()
        }
    }

    pub fn to_text(&self) -> String {
        let d: Vec<String> = self.diag.iter().map(|x| x.to_string()).collect();
        format!("diag {}\nU {}V {}", d.join(" "), self.u.to_text(), self.v.to_text())
    }
}

/// Smith normal form with unimodular transforms.
pub fn snf(m: &IntMatrix) -> InvariantDecomposition {
    let (r, c) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);
    let mut vi = IntMatrix::identity(c);
    let kmax = r.min(c);
    'outer: for k in 0..kmax {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in k..r {
                for j in k..c {
                    let x = a.get(i, j);
                    if !x.is_zero() && best.is_none_or(|(bi, bj)| x.magnitude() < a.get(bi, bj).magnitude()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break 'outer };
            a.swap_rows(k, pi);
            u.swap_rows(k, pi);
            a.swap_cols(k, pj);
            v.swap_cols(k, pj);
            vi.swap_rows(k, pj);
            let mut clean = true;
            for i in k + 1..r {
                if a.get(i, k).is_zero() {
                    continue;
                }
                let q = -(a.get(i, k) / a.get(k, k));
                a.add_row_multiple(i, k, &q);
                u.add_row_multiple(i, k, &q);
                clean &= a.get(i, k).is_zero();
            }
            for j in k + 1..c {
                if a.get(k, j).is_zero() {
                    continue;
                }
                let q = -(a.get(k, j) / a.get(k, k));
                a.add_col_multiple(j, k, &q);
                v.add_col_multiple(j, k, &q);
                vi.add_row_multiple(k, j, &-&q);
                clean &= a.get(k, j).is_zero();
            }
            if !clean {
                continue;
            }
            let p = a.get(k, k).clone();
            let bad = (k + 1..r).find(|&i| (k + 1..c).any(|j| !a.get(i, j).is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    a.add_row_multiple(k, i, &BigInt::one());
                    u.add_row_multiple(k, i, &BigInt::one());
                }
                None => break,
            }
        }
        if a.get(k, k).is_negative() {
            a.negate_row(k);
            u.negate_row(k);
        }
    }
    let diag = (0..c).map(|k| if k < kmax { a.get(k, k).clone() } else { BigInt::zero() }).collect();
    InvariantDecomposition { diag, u, v, v_inv: vi }
}

/// `θ(κ)`: the coordinate of `κ` on `e(|F|)`, reduced mod `d_{|F|}`.
pub fn project_theta(kappa: &[BigInt], dec: &InvariantDecomposition) -> BigInt {
    let c = dec.coordinates(kappa);
    let last = c.last().cloned().unwrap_or_default();
    let d = dec.last();
    if d.is_zero() {
        last
    } else {
        last.mod_floor(d)
    }
}

/// A recorded elimination step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScriptOp {
    SwapRows(usize, usize),
    SwapCols(usize, usize),
    /// `row_dst += k * row_src`.
    AddMul { dst: usize, src: usize, k: BigUint },
}

/// One coprime factor `L_i` of the modulus with its triangular form.
#[derive(Clone, Debug)]
pub struct SplitBlock {
    pub modulus: BigUint,
    /// Entries reduced into `[0, L_i)`.
    pub matrix: Vec<Vec<BigUint>>,
    /// `col_perm[j]` is the original column at position `j`.
    pub col_perm: Vec<usize>,
    pub pivots: usize,
    /// Operations from the original matrix to `matrix`, in order.
    pub script: Vec<ScriptOp>,
}

#[derive(Clone, Debug)]
pub struct ModSplitResult {
    pub modulus: BigUint,
    pub blocks: Vec<SplitBlock>,
}

fn reduce_big(x: &BigInt, m: &BigUint) -> BigUint {
    let mi = BigInt::from_biguint(Sign::Plus, m.clone());
    x.mod_floor(&mi).to_biguint().unwrap()
}

/// `L / (M_1 M_2 ... M_i)` with `M_1 = gcd(r, L)`, `M_{k+1} = gcd(r, L/(M_1..M_k))`.
pub fn split_off(r: &BigUint, l: &BigUint) -> BigUint {
    let mut rest = l.clone();
    loop {
        let mk = r.gcd(&rest);
        if mk.is_one() {
            return rest;
        }
        rest /= mk;
    }
}

struct SplitState {
    modulus: BigUint,
    a: Vec<Vec<BigUint>>,
    perm: Vec<usize>,
    k: usize,
    script: Vec<ScriptOp>,
}

/// Triangularize modulo `L`, splitting `L` whenever a non-unit pivot
/// candidate exposes a factor. Needs `cols - 1` pivots in every block.
pub fn gcd_split_reduce(m: &IntMatrix, l: &BigUint) -> Result<ModSplitResult> {
    gcd_split_reduce_general(m, l, m.cols(), m.cols().saturating_sub(1))
}

/// As [`gcd_split_reduce`] but pivots only in the first `region` columns
/// (later columns are carried along) and requires `required` pivots.
pub fn gcd_split_reduce_general(m: &IntMatrix, l: &BigUint, region: usize, required: usize) -> Result<ModSplitResult> {
    assert!(region <= m.cols() && required <= region);
    let mut blocks = Vec::new();
    if l.is_one() {
        return Ok(ModSplitResult { modulus: l.clone(), blocks });
    }
    if l.is_zero() {
        return Err(Error::InvalidParams("modulus must be positive".into()));
    }
    let a: Vec<Vec<BigUint>> = m.to_rows().iter().map(|r| r.iter().map(|x| reduce_big(x, l)).collect()).collect();
    let mut stack = vec![SplitState { modulus: l.clone(), a, perm: (0..m.cols()).collect(), k: 0, script: Vec::new() }];
    while let Some(mut st) = stack.pop() {
        let rows = st.a.len();
        let lm = st.modulus.clone();
        let split = loop {
            if st.k == required || st.k == rows {
                break None;
            }
            let k = st.k;
            let mut unit = None;
            let mut splitter = None;
            'scan: for i in k..rows {
                for j in k..region {
                    let x = &st.a[i][j];
                    if x.is_zero() {
                        continue;
                    }
                    let g = x.gcd(&lm);
                    if g.is_one() {
                        unit = Some((i, j));
                        break 'scan;
                    }
                    if splitter.is_none() {
                        let lhat = split_off(x, &lm);
                        if !lhat.is_one() {
                            splitter = Some(lhat);
                        }
                    }
                }
            }
            let Some((pi, pj)) = unit else { break splitter };
            if pi != k {
                st.a.swap(pi, k);
                st.script.push(ScriptOp::SwapRows(k, pi));
            }
            if pj != k {
                for row in st.a.iter_mut() {
                    row.swap(pj, k);
                }
                st.perm.swap(pj, k);
                st.script.push(ScriptOp::SwapCols(k, pj));
            }
            let inv = mod_inverse(&st.a[k][k], &lm).expect("unit pivot");
            for i in k + 1..rows {
                if st.a[i][k].is_zero() {
                    continue;
                }
                let f = (&st.a[i][k] * &inv) % &lm;
                let coef = (&lm - f) % &lm;
                let (head, tail) = st.a.split_at_mut(i);
                let src = &head[k];
                for (x, s) in tail[0].iter_mut().zip(src) {
                    *x = (&*x + &coef * s) % &lm;
                }
                st.script.push(ScriptOp::AddMul { dst: i, src: k, k: coef });
            }
            st.k += 1;
        };
        match split {
            Some(lhat) => {
                let other = &lm / &lhat;
                for modulus in [other, lhat] {
                    let a = st.a.iter().map(|r| r.iter().map(|x| x % &modulus).collect()).collect();
                    let script = st
                        .script
                        .iter()
                        .map(|op| match op {
                            ScriptOp::AddMul { dst, src, k } => ScriptOp::AddMul { dst: *dst, src: *src, k: k % &modulus },
                            o => o.clone(),
                        })
                        .collect();
                    stack.push(SplitState { modulus, a, perm: st.perm.clone(), k: st.k, script });
                }
            }
            None => {
                if st.k < required {
                    return Err(Error::RankDeficient { modulus: lm, pivots: st.k, required });
                }
                blocks.push(SplitBlock { modulus: lm, matrix: st.a, col_perm: st.perm, pivots: st.k, script: st.script });
            }
        }
    }
    Ok(ModSplitResult { modulus: l.clone(), blocks })
}

impl ModSplitResult {
    pub fn moduli(&self) -> Vec<BigUint> {
        self.blocks.iter().map(|b| b.modulus.clone()).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("modulus {}\nblocks {}\n", self.modulus, self.blocks.len());
        for b in &self.blocks {
            let perm: Vec<String> = b.col_perm.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "block {} pivots {}", b.modulus, b.pivots);
            let _ = writeln!(s, "perm {}", perm.join(" "));
            for op in &b.script {
                let _ = match op {
                    ScriptOp::SwapRows(i, j) => writeln!(s, "swap_rows {i} {j}"),
                    ScriptOp::SwapCols(i, j) => writeln!(s, "swap_cols {i} {j}"),
                    ScriptOp::AddMul { dst, src, k } => writeln!(s, "addmul {dst} {src} {k}"),
                };
            }
        }
        s
    }
}

impl SplitBlock {
    /// Apply the recorded script to `m`, reducing mod `L_i`.
    pub fn replay(&self, m: &IntMatrix) -> Vec<Vec<BigUint>> {
        let mut a: Vec<Vec<BigUint>> =
            m.to_rows().iter().map(|r| r.iter().map(|x| reduce_big(x, &self.modulus)).collect()).collect();
        for op in &self.script {
            match op {
                ScriptOp::SwapRows(i, j) => a.swap(*i, *j),
                ScriptOp::SwapCols(i, j) => {
                    for row in a.iter_mut() {
                        row.swap(*i, *j);
                    }
                }
                ScriptOp::AddMul { dst, src, k } => {
                    let src_row = a[*src].clone();
                    for (x, s) in a[*dst].iter_mut().zip(&src_row) {
                        *x = (&*x + k * s) % &self.modulus;
                    }
                }
            }
        }
        a
    }

    /// Entries of rows `pivots..` in columns `pivots..` all vanish mod `L_i`.
    pub fn trailing_zero(&self) -> bool {
        self.matrix[self.pivots..].iter().all(|r| r[self.pivots..].iter().all(|x| x.is_zero()))
    }

    /// Solve the homogeneous system `A x = 0` on the pivot rows: for each
    /// pivot position `j`, the coefficients `c_{j,f}` with
    /// `x_j = sum_f c_{j,f} x_f` over free positions `f = pivots..cols`.
    pub fn pivot_expressions(&self) -> Vec<Vec<BigUint>> {
        let lm = &self.modulus;
        let p = self.pivots;
        let ncols = self.col_perm.len();
        let nfree = ncols - p;
        let mut x: Vec<Vec<BigUint>> = vec![vec![BigUint::zero(); nfree]; p];
        for j in (0..p).rev() {
            let row = &self.matrix[j];
            let mut acc: Vec<BigUint> = row[p..].to_vec();
            for (jj, xj) in x.iter().enumerate().skip(j + 1) {
                let c = &row[jj];
                if c.is_zero() {
                    continue;
                }
                for (a, e) in acc.iter_mut().zip(xj) {
                    *a = (&*a + c * e) % lm;
                }
            }
            let inv = mod_inverse(&row[j], lm).expect("unit pivot");
            x[j] = acc.into_iter().map(|a| (lm - (a * &inv) % lm) % lm).collect();
        }
        x
    }
}

/// Solve `x ≡ r_i (mod m_i)` for pairwise coprime moduli; returns
/// `(x, prod m_i)`.
pub fn crt(residues: &[(BigUint, BigUint)]) -> Result<(BigUint, BigUint)> {
    let mut x = BigUint::zero();
    let mut m = BigUint::one();
    for (r, mi) in residues {
        if mi.is_zero() {
            return Err(Error::InvalidParams("zero modulus".into()));
        }
        if !m.gcd(mi).is_one() {
            return Err(Error::NonCoprimeModuli);
        }
        let r = r % mi;
        let inv = mod_inverse(&(&m % mi), mi).ok_or(Error::NonCoprimeModuli)?;
        let diff = (&r + mi - (&x % mi)) % mi;
        let t = (diff * inv) % mi;
        x += &m * t;
        m *= mi;
        x %= &m;
    }
    Ok((x, m))
}

/// A finite abelian group presented by its operations.
pub trait GroupOps {
    type Elem: Clone + PartialEq;
    fn one(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn pow(&self, a: &Self::Elem, k: &BigUint) -> Self::Elem;
}

/// Order of `x` given a multiple `prod r^e` of it.
pub fn element_order<G: GroupOps>(g: &G, x: &G::Elem, multiple: &[(BigUint, u32)]) -> Result<BigUint> {
    let mut n: BigUint = multiple.iter().map(|(r, e)| r.pow(*e)).product();
    if g.pow(x, &n) != g.one() {
        return Err(Error::InvalidParams("given order is not a multiple of the element order".into()));
    }
    for (r, e) in multiple {
        for _ in 0..*e {
            let cand = &n / r;
            if g.pow(x, &cand) == g.one() {
                n = cand;
            } else {
                break;
            }
        }
    }
    Ok(n)
}

/// `x` with `base^x = target`, reduced mod the order of `base`. Digits are
/// found by exhaustive search in each prime-order subgroup.
pub fn pohlig_hellman<G: GroupOps>(
    g: &G,
    base: &G::Elem,
    target: &G::Elem,
    order_factorization: &[(BigUint, u32)],
) -> Result<BigUint> {
    let ord = element_order(g, base, order_factorization)?;
    if g.pow(target, &ord) != g.one() {
        return Err(Error::NotInSubgroup);
    }
    let mut residues = Vec::new();
    for (r, _) in order_factorization {
        let mut e = 0u32;
        let mut rest = ord.clone();
        while (&rest % r).is_zero() {
            rest /= r;
            e += 1;
        }
        if e == 0 {
            continue;
        }
        let re = r.pow(e);
        let cof = &ord / &re;
        let b = g.pow(base, &cof);
        let t = g.pow(target, &cof);
        let gamma = g.pow(&b, &r.pow(e - 1));
        let b_inv = g.pow(&b, &(&re - 1u32));
        let mut x = BigUint::zero();
        for k in 0..e {
            let shifted = g.mul(&t, &g.pow(&b_inv, &x));
            let h = g.pow(&shifted, &r.pow(e - 1 - k));
            let mut acc = g.one();
            let mut digit = None;
            let mut d = BigUint::zero();
            while &d < r {
                if acc == h {
                    digit = Some(d.clone());
                    break;
                }
                acc = g.mul(&acc, &gamma);
                d += 1u32;
            }
            let d = digit.ok_or(Error::NotInSubgroup)?;
            x += d * r.pow(k);
        }
        residues.push((x, re));
    }
    let (x, _) = crt(&residues)?;
    if g.pow(base, &x) != *target {
        return Err(Error::NotInSubgroup);
    }
    Ok(x)
}

/// Rank of `m` reduced modulo a prime.
pub fn rank_mod_prime(m: &IntMatrix, ell: &BigUint) -> usize {
    let mut a: Vec<Vec<BigUint>> = m.to_rows().iter().map(|r| r.iter().map(|x| reduce_big(x, ell)).collect()).collect();
    let (rows, cols) = (m.rows(), m.cols());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(rank, p);
        let inv = mod_inverse(&a[rank][c], ell).expect("prime modulus");
        for i in rank + 1..rows {
            if a[i][c].is_zero() {
                continue;
            }
            let f = (&a[i][c] * &inv) % ell;
            let (head, tail) = a.split_at_mut(i);
            for (x, s) in tail[0].iter_mut().zip(&head[rank]) {
                *x = (&*x + ell * ell - (&f * s) % ell) % ell;
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intmath::factor_u64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn bu(x: u64) -> BigUint {
        BigUint::from(x)
    }

    /// Invariant factors from determinantal divisors, an independent route
    /// for tiny matrices: d_k = D_k / D_{k-1} with D_k the gcd of all k×k
    /// minors.
    fn invariants_by_minors(m: &IntMatrix) -> Vec<BigInt> {
        let (r, c) = (m.rows(), m.cols());
        let mut out = Vec::new();
        let mut prev = BigInt::one();
        for k in 1..=r.min(c) {
            let mut g = BigInt::zero();
            for rs in subsets(r, k) {
                for cs in subsets(c, k) {
                    let sub = IntMatrix::from_rows(
                        rs.iter().map(|&i| cs.iter().map(|&j| m.get(i, j).clone()).collect()).collect(),
                        k,
                    );
                    g = g.gcd(&sub.det());
                }
            }
            if g.is_zero() {
                break;
            }
            out.push(&g / &prev);
            prev = g;
        }
        while out.len() < c {
            out.push(BigInt::zero());
        }
        out
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut out = subsets(n - 1, k);
        for mut s in subsets(n - 1, k - 1) {
            s.push(n - 1);
            out.push(s);
        }
        out
    }

    fn check_snf(m: &IntMatrix) -> InvariantDecomposition {
        let dec = snf(m);
        let d = dec.u.mul(m).mul(&dec.v);
        assert!(d.is_diagonal());
        for k in 0..m.rows().min(m.cols()) {
            assert_eq!(d.get(k, k), &dec.diag[k]);
        }
        for w in dec.diag.windows(2) {
            assert!(w[1].is_multiple_of(&w[0]) || w[0].is_zero() && w[1].is_zero());
        }
        assert_eq!(dec.u.det().abs(), BigInt::one());
        assert_eq!(dec.v.det().abs(), BigInt::one());
        assert_eq!(dec.v.mul(&dec.v_inv), IntMatrix::identity(m.cols()));
        dec
    }

    #[test]
    fn snf_examples() {
        let d = check_snf(&IntMatrix::from_i64_rows(&[vec![2, 0], vec![0, 3]]));
        assert_eq!(d.diag, vec![bi(1), bi(6)]);
        let d = check_snf(&IntMatrix::identity(4));
        assert!(d.diag.iter().all(|x| x.is_one()));
        let d = check_snf(&IntMatrix::from_i64_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]));
        assert_eq!(d.diag, vec![bi(2), bi(6), bi(12)]);
        let d = check_snf(&IntMatrix::from_i64_rows(&[vec![0, 0, 0]]));
        assert_eq!(d.diag, vec![bi(0), bi(0), bi(0)]);
    }

    #[test]
    fn snf_matches_minor_gcds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let r = rng.gen_range(1..5);
            let c = rng.gen_range(1..5);
            let rows: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(-9..=9)).collect()).collect();
            let m = IntMatrix::from_i64_rows(&rows);
            assert_eq!(check_snf(&m).diag, invariants_by_minors(&m), "{rows:?}");
        }
    }

    #[test]
    fn theta_examples() {
        let m = IntMatrix::from_i64_rows(&[vec![2, 0, 0], vec![0, 4, 0], vec![1, 1, 0], vec![0, 0, 6]]);
        let dec = snf(&m);
        let n = m.cols();
        let e_last = dec.basis_vector(n - 1);
        let d = dec.last().clone();
        assert_eq!(project_theta(&e_last, &dec), BigInt::one().mod_floor(&d));
        for i in 0..m.rows() {
            assert!(project_theta(m.row(i), &dec).is_zero());
        }
        let e0 = dec.basis_vector(0);
        let kappa: Vec<BigInt> = e_last.iter().zip(&e0).map(|(a, b)| 3 * a + b).collect();
        assert_eq!(project_theta(&kappa, &dec), bi(3).mod_floor(&d));
    }

    #[test]
    fn split_worked_example() {
        // M_1 = gcd(9, 12) = 3, M_2 = gcd(9, 4) = 1, so L^ = 4.
        assert_eq!(split_off(&bu(9), &bu(12)), bu(4));
        // Neither 9 nor 4 is a unit mod 12; 9 comes first and splits.
        let m = IntMatrix::from_i64_rows(&[vec![9], vec![4]]);
        let res = gcd_split_reduce_general(&m, &bu(12), 1, 1).unwrap();
        assert_eq!(res.moduli(), vec![bu(4), bu(3)]);
        assert_eq!(res.blocks[0].matrix[0][0], bu(1));
        assert_eq!(res.blocks[1].matrix[0][0], bu(1));
    }

    #[test]
    fn identity_needs_no_split() {
        let m = IntMatrix::identity(4);
        let res = gcd_split_reduce(&m, &bu(1001)).unwrap();
        assert_eq!(res.moduli(), vec![bu(1001)]);
        assert_eq!(res.blocks[0].pivots, 3);
        for i in 0..3 {
            assert!(res.blocks[0].matrix[i][i].is_one());
        }
    }

    #[test]
    fn rank_deficiency_reported() {
        let m = IntMatrix::from_i64_rows(&[vec![1, 1, 1], vec![2, 2, 2]]);
        let err = gcd_split_reduce(&m, &bu(7)).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { pivots: 1, required: 2, .. }));
        assert!(err.is_heuristic_failure());
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt(&[(bu(1), bu(2)), (bu(2), bu(3))]).unwrap(), (bu(5), bu(6)));
        assert_eq!(crt(&[(bu(4), bu(9))]).unwrap(), (bu(4), bu(9)));
        assert!(matches!(crt(&[(bu(1), bu(4)), (bu(1), bu(6))]), Err(Error::NonCoprimeModuli)));
    }

    #[test]
    fn crt_matches_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pool = [2u64, 3, 5, 7, 11, 13, 4, 9, 25];
        let mut done = 0;
        while done < 50 {
            let ms: Vec<u64> = (0..4).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
            let prod: u64 = ms.iter().product();
            if prod > 10_000 || ms.iter().enumerate().any(|(i, a)| ms[..i].iter().any(|b| num_integer::gcd(*a, *b) != 1)) {
                continue;
            }
            let rs: Vec<u64> = ms.iter().map(|&m| rng.gen_range(0..m)).collect();
            let want = (0..prod).find(|x| ms.iter().zip(&rs).all(|(m, r)| x % m == *r)).unwrap();
            let input: Vec<_> = rs.iter().zip(&ms).map(|(&r, &m)| (bu(r), bu(m))).collect();
            assert_eq!(crt(&input).unwrap(), (bu(want), bu(prod)));
            done += 1;
        }
    }

    /// Additive group Z/nZ.
    struct Zn(u64);

    impl GroupOps for Zn {
        type Elem = u64;
        fn one(&self) -> u64 {
            0
        }
        fn mul(&self, a: &u64, b: &u64) -> u64 {
            (a + b) % self.0
        }
        fn pow(&self, a: &u64, k: &BigUint) -> u64 {
            ((BigUint::from(*a) * k) % self.0).iter_u64_digits().next().unwrap_or(0)
        }
    }

    #[test]
    fn pohlig_hellman_examples() {
        let g = Zn(8);
        let fac = vec![(bu(2), 3)];
        assert_eq!(pohlig_hellman(&g, &1, &0, &fac).unwrap(), bu(0));
        assert_eq!(pohlig_hellman(&g, &1, &5, &fac).unwrap(), bu(5));
        // ⟨2⟩ has index 2; 3 is outside it.
        assert!(matches!(pohlig_hellman(&g, &2, &3, &fac), Err(Error::NotInSubgroup)));
        assert_eq!(pohlig_hellman(&g, &2, &6, &fac).unwrap(), bu(3));
    }

    #[test]
    fn pohlig_hellman_brute_force() {
        let n = 360u64;
        let g = Zn(n);
        let fac: Vec<(BigUint, u32)> = factor_u64(n).into_iter().map(|(r, e)| (bu(r), e)).collect();
        for base in [1u64, 7, 12, 90] {
            for target in 0..n {
                let brute = (0..n).find(|x| (base * x) % n == target);
                match (brute, pohlig_hellman(&g, &base, &target, &fac)) {
                    (Some(x), Ok(y)) => assert_eq!(bu(x), y),
                    (None, Err(Error::NotInSubgroup)) => {}
                    (b, r) => panic!("base {base} target {target}: {b:?} vs {r:?}"),
                }
            }
        }
    }

    fn arb_matrix(max: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1..=max, 1..=max).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(-50i64..=50, c), r)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn snf_reconstructs(rows in arb_matrix(8)) {
            let m = IntMatrix::from_i64_rows(&rows);
            let dec = check_snf(&m);
            let mut d = IntMatrix::zeros(m.rows(), m.cols());
            for k in 0..m.rows().min(m.cols()) {
                d.set(k, k, dec.diag[k].clone());
            }
            // U^{-1} D V^{-1} = M; check U M V = D and V V^{-1} = I instead
            // of inverting U.
            prop_assert_eq!(dec.u.mul(&m).mul(&dec.v), d);
        }

        #[test]
        fn theta_is_additive(rows in arb_matrix(6), a in proptest::collection::vec(-20i64..20, 6), b in proptest::collection::vec(-20i64..20, 6)) {
            let m = IntMatrix::from_i64_rows(&rows);
            let dec = snf(&m);
            let n = m.cols();
            let ka: Vec<BigInt> = a[..n].iter().map(|&x| bi(x)).collect();
            let kb: Vec<BigInt> = b[..n].iter().map(|&x| bi(x)).collect();
            let ks: Vec<BigInt> = ka.iter().zip(&kb).map(|(x, y)| x + y).collect();
            let d = dec.last().clone();
            let sum = project_theta(&ka, &dec) + project_theta(&kb, &dec);
            let lhs = project_theta(&ks, &dec);
            if d.is_zero() {
                prop_assert_eq!(lhs, sum);
            } else {
                prop_assert_eq!(lhs, sum.mod_floor(&d));
            }
        }

        #[test]
        fn split_blocks_are_coprime_and_replayable(rows in arb_matrix(6), l in 2u64..5000) {
            let m = IntMatrix::from_i64_rows(&rows);
            let lb = bu(l);
            let Ok(res) = gcd_split_reduce_general(&m, &lb, m.cols(), 0) else { return Ok(()) };
            let prod: BigUint = res.moduli().iter().product();
            prop_assert_eq!(prod, lb);
            let ms = res.moduli();
            for i in 0..ms.len() {
                for j in 0..i {
                    prop_assert!(ms[i].gcd(&ms[j]).is_one());
                }
            }
            for b in &res.blocks {
                prop_assert_eq!(&b.replay(&m), &b.matrix);
                for j in 0..b.pivots {
                    prop_assert!(b.matrix[j][j].gcd(&b.modulus).is_one());
                    for i in j + 1..m.rows() {
                        prop_assert!(b.matrix[i][j].is_zero());
                    }
                }
            }
        }
    }
}
