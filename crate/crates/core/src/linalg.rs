//! Exact linear algebra over `BigRational`: dense matrices, echelon forms,
//! characteristic polynomials, rational eigenvalues and Jordan block sizes,
//! plus a sparse echelon span over Fock basis vectors.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fock::{FockBasisVector, FockElement};
use crate::rational::{fmt_big, rint, Q64, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let data: Vec<Rational> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), r * c, "ragged rows");
        Matrix { rows: r, cols: c, data }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    /// `self − c·I`.
    pub fn shift(&self, c: &Rational) -> Matrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= c;
        }
        m
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else { continue };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for j in c..m.cols {
                    let v = &m[(r, j)] * &f;
                    m[(i, j)] -= v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space, as column vectors.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let (m, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = -m[(r, f)].clone();
                }
                v
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Characteristic polynomial `det(xI − M)`, coefficients lowest degree
    /// first, via reduction to upper Hessenberg form.
    pub fn charpoly(&self) -> Poly {
        assert!(self.is_square(), "charpoly of a non-square matrix");
        let n = self.rows;
        let mut h = self.clone();
        for col in 0..n.saturating_sub(2) {
            let Some(p) = (col + 1..n).find(|&i| !h[(i, col)].is_zero()) else { continue };
            if p != col + 1 {
                h.swap_rows(p, col + 1);
                for i in 0..n {
                    h.data.swap(i * n + p, i * n + col + 1);
                }
            }
            let piv = h[(col + 1, col)].clone();
            for i in col + 2..n {
                if h[(i, col)].is_zero() {
                    continue;
                }
                let f = &h[(i, col)] / &piv;
                for j in 0..n {
                    let v = &h[(col + 1, j)] * &f;
                    h[(i, j)] -= v;
                }
                for j in 0..n {
                    let v = &h[(j, i)] * &f;
                    h[(j, col + 1)] += v;
                }
            }
        }
        // p_k = charpoly of the leading k×k block
        let mut ps: Vec<Poly> = vec![Poly::one()];
        for k in 0..n {
            let mut pk = Poly::x().sub(&Poly::constant(h[(k, k)].clone())).mul(&ps[k]);
            let mut prod = Rational::one();
            for i in (0..k).rev() {
                prod *= &h[(i + 1, i)];
                if prod.is_zero() {
                    break;
                }
                let c = &prod * &h[(i, k)];
                pk = pk.sub(&ps[i].scale(&c));
            }
            ps.push(pk);
        }
        ps.pop().unwrap()
    }

    /// Rational eigenvalues with Jordan block sizes (descending).
    /// Fails if the characteristic polynomial has an irrational root.
    pub fn jordan(&self) -> Result<Vec<JordanData>> {
        let cp = self.charpoly();
        let roots = cp.rational_roots()?;
        let n = self.rows;
        let mut out = Vec::new();
        for (lambda, mult) in roots {
            let a = self.shift(&lambda);
            let mut ranks = vec![n];
            let mut pw = Matrix::identity(n);
            for _ in 0..mult {
                pw = pw.mul(&a);
                ranks.push(pw.rank());
                if ranks[ranks.len() - 1] == ranks[ranks.len() - 2] {
                    break;
                }
            }
            // ge[k] = number of blocks of size ≥ k+1
            let ge: Vec<usize> = ranks.windows(2).map(|w| w[0] - w[1]).collect();
            let mut blocks = Vec::new();
            for k in 0..ge.len() {
                let next = ge.get(k + 1).copied().unwrap_or(0);
                for _ in 0..(ge[k] - next) {
                    blocks.push(k + 1);
                }
            }
            blocks.sort_unstable_by(|a, b| b.cmp(a));
            out.push(JordanData { eigenvalue: lambda, blocks });
        }
        Ok(out)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            let row: Vec<String> = (0..self.cols).map(|j| fmt_big(&self[(i, j)])).collect();
            write!(f, "[{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JordanData {
    pub eigenvalue: Rational,
    pub blocks: Vec<usize>,
}

/// Dense univariate polynomial, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(pub Vec<Rational>);

impl Poly {
    fn norm(mut v: Vec<Rational>) -> Poly {
        while v.last().is_some_and(Zero::is_zero) {
            v.pop();
        }
        Poly(v)
    }

    pub fn one() -> Poly {
        Poly(vec![Rational::one()])
    }

    pub fn x() -> Poly {
        Poly(vec![Rational::zero(), Rational::one()])
    }

    pub fn constant(c: Rational) -> Poly {
        Self::norm(vec![c])
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Self::norm(self.0.iter().map(|a| a * c).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let z = Rational::zero();
        Self::norm((0..n).map(|i| self.0.get(i).unwrap_or(&z) - o.0.get(i).unwrap_or(&z)).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly(Vec::new());
        }
        let mut v = vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Self::norm(v)
    }

    pub fn derivative(&self) -> Poly {
        Self::norm(self.0.iter().enumerate().skip(1).map(|(i, c)| c * rint(i as i64)).collect())
    }

    /// Quotient and remainder.
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.0[dd].clone();
        let mut r = self.0.clone();
        let mut qv = vec![Rational::zero(); self.0.len().saturating_sub(dd).max(1)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let c = &r[r.len() - 1] / &lead;
            for (i, a) in d.0.iter().enumerate() {
                r[k + i] -= &c * a;
            }
            qv[k] = c;
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        (Self::norm(qv), Self::norm(r))
    }

    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        match a.degree() {
            Some(d) => {
                let l = a.0[d].recip();
                a.scale(&l)
            }
            None => a,
        }
    }

    /// All roots with multiplicity, or `IrrationalEigenvalue` when some
    /// irreducible factor has degree > 1.
    pub fn rational_roots(&self) -> Result<Vec<(Rational, usize)>> {
        let mut rest = self.clone();
        let mut out = Vec::new();
        loop {
            let Some(deg) = rest.degree() else { break };
            if deg == 0 {
                break;
            }
            let sqf = rest.divrem(&rest.gcd(&rest.derivative())).0;
            let candidates = sqf.candidate_roots();
            let root = candidates.into_iter().find(|c| sqf.eval(c).is_zero());
            let Some(r) = root else {
                return Err(Error::IrrationalEigenvalue(rest.to_string()));
            };
            let lin = Poly(vec![-r.clone(), Rational::one()]);
            let mut m = 0;
            loop {
                let (qt, rem) = rest.divrem(&lin);
                if !rem.is_zero() {
                    break;
                }
                rest = qt;
                m += 1;
            }
            out.push((r, m));
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    fn candidate_roots(&self) -> Vec<Rational> {
        let lcm = self.0.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.0.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
        let low = ints.iter().position(|c| !c.is_zero()).unwrap_or(0);
        let mut out = Vec::new();
        if low > 0 {
            out.push(Rational::zero());
        }
        let a0 = ints[low].abs();
        let an = ints[ints.len() - 1].abs();
        for num in divisors(&a0) {
            for den in divisors(&an) {
                let r = Rational::new(num.clone(), den.clone());
                out.push(r.clone());
                out.push(-r);
            }
        }
        out
    }
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            let e = n / &d;
            if e != d {
                large.push(e);
            }
            small.push(d.clone());
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({})x^{i}", fmt_big(c)))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// An operator restricted to one graded component.
#[derive(Clone, Debug)]
pub struct GradedMatrix {
    pub weight: Q64,
    pub domain: Vec<FockBasisVector>,
    pub codomain: Vec<FockBasisVector>,
    /// Column `j` holds the image of `domain[j]` in the `codomain` basis.
    pub matrix: Matrix,
}

impl GradedMatrix {
    /// Builds the matrix of `op` on `domain`. If `codomain` is `None` the
    /// operator must preserve the span of `domain`.
    pub fn build(
        weight: Q64,
        domain: Vec<FockBasisVector>,
        codomain: Option<Vec<FockBasisVector>>,
        mut op: impl FnMut(&FockElement) -> Result<FockElement>,
    ) -> Result<Self> {
        let codomain = codomain.unwrap_or_else(|| domain.clone());
        let index: BTreeMap<&FockBasisVector, usize> = codomain.iter().enumerate().map(|(i, b)| (b, i)).collect();
        let mut m = Matrix::zeros(codomain.len(), domain.len());
        for (j, b) in domain.iter().enumerate() {
            let img = op(&FockElement::basis(b.clone()))?;
            for (t, c) in img.iter() {
                let i = index.get(t).ok_or_else(|| {
                    Error::Config(format!("image term {t} lies outside the codomain component"))
                })?;
                m[(*i, j)] = c.clone();
            }
        }
        Ok(GradedMatrix { weight, domain, codomain, matrix: m })
    }

    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }

    pub fn nullity(&self) -> usize {
        self.domain.len() - self.rank()
    }

    /// Kernel vectors as Fock elements.
    pub fn kernel(&self) -> Vec<FockElement> {
        self.matrix
            .kernel()
            .into_iter()
            .map(|v| self.domain.iter().cloned().zip(v).collect())
            .collect()
    }

    pub fn charpoly(&self) -> Option<Poly> {
        self.matrix.is_square().then(|| self.matrix.charpoly())
    }
}

/// Span of Fock elements kept in fully reduced echelon form; the pivot of a
/// row is its largest basis vector.
#[derive(Clone, Debug, Default)]
pub struct SparseSpan {
    rows: BTreeMap<FockBasisVector, FockElement>,
}

impl SparseSpan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn reduce(&self, v: &FockElement) -> FockElement {
        let mut v = v.clone();
        loop {
            let hit = v.iter().rev().find_map(|(b, c)| self.rows.get(b).map(|r| (r, c.clone())));
            match hit {
                Some((row, c)) => v.add_scaled(row, &-c),
                None => return v,
            }
        }
    }

    pub fn contains(&self, v: &FockElement) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v`; returns the new (normalized) row if `v` was independent.
    pub fn insert(&mut self, v: &FockElement) -> Option<FockElement> {
        let r = self.reduce(v);
        let (pivot, lead) = r.iter().next_back().map(|(b, c)| (b.clone(), c.clone()))?;
        let row = r.scaled(&lead.recip());
        for existing in self.rows.values_mut() {
            let c = existing.coeff(&pivot);
            if !c.is_zero() {
                existing.add_scaled(&row, &-c);
            }
        }
        self.rows.insert(pivot, row.clone());
        Some(row)
    }

    pub fn basis(&self) -> impl Iterator<Item = &FockElement> {
        self.rows.values()
    }

    /// Span from rows already in reduced echelon form: each row's largest
    /// term has coefficient one and no other row touches it.
    pub fn from_reduced_rows(rows: Vec<FockElement>) -> Option<SparseSpan> {
        let mut out = BTreeMap::new();
        for r in rows {
            let (p, c) = r.iter().next_back()?;
            if !c.is_one() {
                return None;
            }
            out.insert(p.clone(), r.clone());
        }
        for (p, _) in out.iter() {
            if out.iter().filter(|(q, _)| *q != p).any(|(_, r)| !r.coeff(p).is_zero()) {
                return None;
            }
        }
        Some(SparseSpan { rows: out })
    }

    /// Rows with their pivots, in pivot order.
    pub fn pivots(&self) -> impl Iterator<Item = (&FockBasisVector, &FockElement)> {
        self.rows.iter()
    }

    /// Coordinates of `v` in the row basis, or `None` if `v` is outside the span.
    pub fn coords(&self, v: &FockElement) -> Option<Vec<Rational>> {
        self.contains(v).then(|| self.rows.keys().map(|b| v.coeff(b)).collect())
    }

    /// Span of `self` and `other`.
    pub fn sum(&self, other: &SparseSpan) -> SparseSpan {
        let mut out = self.clone();
        for r in other.basis() {
            out.insert(r);
        }
        out
    }

    /// `dim(self ∩ other)`.
    pub fn intersection_dim(&self, other: &SparseSpan) -> usize {
        self.dim() + other.dim() - self.sum(other).dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| rint(x)).collect()).collect())
    }

    #[test]
    fn rank_and_kernel() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let k = a.kernel();
        assert_eq!(k.len(), 1);
        let col = Matrix::from_rows(k[0].iter().map(|x| vec![x.clone()]).collect());
        assert!(a.mul(&col).is_zero());
    }

    #[test]
    fn charpoly_matches_trace_and_det() {
        let a = m(&[&[2, 1, 0], &[0, 2, 0], &[1, 3, 5]]);
        let p = a.charpoly();
        // (x-2)^2 (x-5) = x^3 - 9x^2 + 24x - 20
        assert_eq!(p, Poly(vec![rint(-20), rint(24), rint(-9), rint(1)]));
        let j = a.jordan().unwrap();
        assert_eq!(j[0], JordanData { eigenvalue: rint(2), blocks: vec![2] });
        assert_eq!(j[1], JordanData { eigenvalue: rint(5), blocks: vec![1] });
    }

    #[test]
    fn jordan_of_logarithmic_block() {
        let w = rat(-1, 4);
        let a = Matrix::from_rows(vec![vec![w.clone(), rint(1)], vec![rint(0), w.clone()]]);
        let j = a.jordan().unwrap();
        assert_eq!(j, vec![JordanData { eigenvalue: w, blocks: vec![2] }]);
    }

    #[test]
    fn irrational_roots_are_reported() {
        let a = m(&[&[0, 2], &[1, 0]]);
        assert!(matches!(a.jordan(), Err(Error::IrrationalEigenvalue(_))));
    }

    #[test]
    fn sparse_span_reduces() {
        use crate::lattice::LatticeVector;
        use crate::rational::qi;
        let e = |k: i64| FockElement::exp(LatticeVector::rank1(qi(k)));
        let mut s = SparseSpan::new();
        assert!(s.insert(&(e(1) + e(2))).is_some());
        assert!(s.insert(&(e(2) - e(3))).is_some());
        assert!(s.contains(&(e(1) + e(3))));
        assert!(s.insert(&(e(1) + e(3))).is_none());
        assert_eq!(s.dim(), 2);
    }
}
