//! Echelon forms modulo word-sized primes, used to decide linear
//! independence quickly, and recovery of exact reduced rows from two primes.
//!
//! Independence modulo `p` implies independence over `ℚ`, so a basis chosen
//! modulo `p` is always a genuine basis candidate. Exact rows are recovered
//! by Chinese remaindering and rational reconstruction and then checked
//! over `ℚ`; callers fall back to exact elimination when the check fails.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::fock::{FockBasisVector, FockElement};
use crate::linalg::SparseSpan;
use crate::rational::Rational;

pub const PRIMES: [u64; 2] = [2_305_843_009_213_693_951, 2_305_843_009_213_693_921];

fn mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a, p);
        }
        a = mul(a, a, p);
        e >>= 1;
    }
    r
}

fn inv(a: u64, p: u64) -> u64 {
    pow(a, p - 2, p)
}

fn big_mod(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    let (_, digits) = r.to_u64_digits();
    digits.first().copied().unwrap_or(0)
}

/// Image of a rational in `𝔽_p`, or `None` if `p` divides the denominator.
pub fn reduce_mod(x: &Rational, p: u64) -> Option<u64> {
    let d = big_mod(x.denom(), p);
    (d != 0).then(|| mul(big_mod(x.numer(), p), inv(d, p), p))
}

/// Columns of one graded piece, ordered like the basis vectors themselves.
#[derive(Clone, Debug, Default)]
pub struct Columns {
    index: HashMap<FockBasisVector, usize>,
    keys: Vec<FockBasisVector>,
}

impl Columns {
    fn id(&mut self, b: &FockBasisVector) -> usize {
        if let Some(&i) = self.index.get(b) {
            return i;
        }
        self.keys.push(b.clone());
        self.index.insert(b.clone(), self.keys.len() - 1);
        self.keys.len() - 1
    }
}

/// Fully reduced echelon form over `𝔽_p` on dynamically numbered columns.
#[derive(Clone, Debug)]
pub struct ModEchelon {
    p: u64,
    cols: Columns,
    /// pivot column → row (dense; entries beyond its length are zero)
    rows: HashMap<usize, Vec<u64>>,
}

impl ModEchelon {
    pub fn new(p: u64) -> Self {
        ModEchelon { p, cols: Columns::default(), rows: HashMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn dense(&mut self, v: &FockElement) -> Option<Vec<u64>> {
        let mut out = Vec::new();
        for (b, c) in v.iter() {
            let i = self.cols.id(b);
            if out.len() <= i {
                out.resize(i + 1, 0);
            }
            out[i] = reduce_mod(c, self.p)?;
        }
        Some(out)
    }

    fn reduce_dense(&self, v: &mut Vec<u64>) {
        let p = self.p;
        for (&c, row) in &self.rows {
            let f = v.get(c).copied().unwrap_or(0);
            if f == 0 {
                continue;
            }
            if v.len() < row.len() {
                v.resize(row.len(), 0);
            }
            for (x, r) in v.iter_mut().zip(row) {
                if *r != 0 {
                    *x = (*x + p - mul(f, *r, p)) % p;
                }
            }
        }
    }

    /// Whether `v` lies in the span modulo `p`.
    pub fn contains(&self, v: &FockElement) -> Option<bool> {
        let mut d = Vec::new();
        for (b, c) in v.iter() {
            let Some(&i) = self.cols.index.get(b) else { return Some(false) };
            if d.len() <= i {
                d.resize(i + 1, 0);
            }
            d[i] = reduce_mod(c, self.p)?;
        }
        self.reduce_dense(&mut d);
        Some(d.iter().all(|x| *x == 0))
    }

    /// Adds `v` if it is independent modulo `p`. `None` when a denominator
    /// vanishes modulo `p`.
    pub fn insert(&mut self, v: &FockElement) -> Option<bool> {
        let mut d = self.dense(v)?;
        self.reduce_dense(&mut d);
        let Some(c) = d.iter().position(|x| *x != 0) else { return Some(false) };
        let p = self.p;
        let s = inv(d[c], p);
        for x in d.iter_mut() {
            *x = mul(*x, s, p);
        }
        for row in self.rows.values_mut() {
            let f = row.get(c).copied().unwrap_or(0);
            if f == 0 {
                continue;
            }
            if row.len() < d.len() {
                row.resize(d.len(), 0);
            }
            for (x, r) in row.iter_mut().zip(&d) {
                if *r != 0 {
                    *x = (*x + p - mul(f, *r, p)) % p;
                }
            }
        }
        self.rows.insert(c, d);
        Some(true)
    }
}

/// Reduced echelon rows of `vs` over `𝔽_p` with pivots at the largest basis
/// vectors, keyed by pivot. `None` when a denominator vanishes modulo `p`.
fn canonical_rows(vs: &[FockElement], keys: &[FockBasisVector], p: u64) -> Option<BTreeMap<usize, Vec<u64>>> {
    // column j is the j-th largest basis vector
    let pos: HashMap<&FockBasisVector, usize> = keys.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let n = keys.len();
    let mut m: Vec<Vec<u64>> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut row = vec![0u64; n];
        for (b, c) in v.iter() {
            row[pos[b]] = reduce_mod(c, p)?;
        }
        m.push(row);
    }
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(k) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, k);
        let s = inv(m[r][c], p);
        for x in m[r].iter_mut() {
            *x = mul(*x, s, p);
        }
        let pr = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for (x, y) in row.iter_mut().zip(&pr) {
                if *y != 0 {
                    *x = (*x + p - mul(f, *y, p)) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    Some(pivots.into_iter().zip(m).collect())
}

/// Rational `a/b ≡ x (mod m)` with `|a|, b ≤ √(m/2)`, if one exists.
pub fn rational_reconstruction(x: &BigInt, m: &BigInt) -> Option<Rational> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), x.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        (r0, r1, t0, t1) = (r1, r2, t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    let (num, den) = if t1.sign() == Sign::Minus { (-r1, -t1) } else { (r1, t1) };
    Some(Rational::new(num, den))
}

fn crt(residues: &[u64]) -> (BigInt, BigInt) {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (&r, &p) in residues.iter().zip(&PRIMES) {
        let pb = BigInt::from(p);
        // x' ≡ x (mod m), x' ≡ r (mod p)
        let xm = big_mod(&x, p);
        let minv = inv(big_mod(&m, p), p);
        let t = mul((r + p - xm) % p, minv, p);
        x += &m * BigInt::from(t);
        m *= pb;
    }
    (x, m)
}

/// Exact reduced echelon span of vectors that are independent modulo the
/// first prime, recovered modularly and verified over `ℚ`. `None` if the
/// recovery or the check fails.
pub fn exact_span(vs: &[FockElement]) -> Option<SparseSpan> {
    let mut keys: Vec<FockBasisVector> = vs.iter().flat_map(|v| v.iter().map(|(b, _)| b.clone())).collect();
    keys.sort();
    keys.dedup();
    keys.reverse();
    let per_prime: Vec<BTreeMap<usize, Vec<u64>>> =
        PRIMES.iter().map(|&p| canonical_rows(vs, &keys, p)).collect::<Option<_>>()?;
    if per_prime[0].len() != vs.len() || per_prime.iter().any(|r| r.keys().ne(per_prime[0].keys())) {
        return None;
    }
    let mut rows = Vec::with_capacity(vs.len());
    for (c, row0) in &per_prime[0] {
        let row1 = &per_prime[1][c];
        let mut el = FockElement::zero();
        for j in 0..keys.len() {
            if row0[j] == 0 && row1[j] == 0 {
                continue;
            }
            let (x, m) = crt(&[row0[j], row1[j]]);
            el.add_term(keys[j].clone(), rational_reconstruction(&x, &m)?);
        }
        rows.push(el);
    }
    let span = SparseSpan::from_reduced_rows(rows)?;
    vs.iter().all(|v| span.contains(v)).then_some(span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeVector;
    use crate::rational::{q, rat};

    fn b(k: i64) -> FockBasisVector {
        FockBasisVector::exp(LatticeVector::rank1(q(k, 1)))
    }

    #[test]
    fn reconstruction_round_trip() {
        for (n, d) in [(3, 7), (-22, 9), (0, 1), (123456789, 1000003)] {
            let x = rat(n, d);
            let res: Vec<u64> = PRIMES.iter().map(|&p| reduce_mod(&x, p).unwrap()).collect();
            let (r, m) = crt(&res);
            assert_eq!(rational_reconstruction(&r, &m), Some(x));
        }
    }

    #[test]
    fn echelon_detects_dependence() {
        let v1 = FockElement::term(b(0), rat(1, 2)) + FockElement::term(b(1), rat(3, 1));
        let v2 = FockElement::term(b(1), rat(1, 1)) + FockElement::term(b(2), rat(-1, 5));
        let v3 = v1.scaled(&rat(2, 3)) + v2.scaled(&rat(7, 1));
        let mut e = ModEchelon::new(PRIMES[0]);
        assert_eq!(e.insert(&v1), Some(true));
        assert_eq!(e.insert(&v2), Some(true));
        assert_eq!(e.insert(&v3), Some(false));
        assert_eq!(e.dim(), 2);
        let s = exact_span(&[v1.clone(), v2.clone()]).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&v3));
        let mut direct = SparseSpan::new();
        direct.insert(&v1);
        direct.insert(&v2);
        assert_eq!(s.basis().cloned().collect::<Vec<_>>(), direct.basis().cloned().collect::<Vec<_>>());
    }
}
