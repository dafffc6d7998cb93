//! Fock-space basis atoms, exact linear combinations of them, and the
//! enumeration of graded components.

use std::collections::BTreeMap;
use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::LatticeVector;
use crate::rational::{fmt_big, fmt_q, parse_big, parse_q, q, qi, Q64, Rational};

/// `α_{g1}(−n1) ⋯ φ(−r1) ⋯ e^λ`.
///
/// `bosons` is a sorted multiset of `(generator, n)` with `n ≥ 1`.
/// `fermions` holds `2r` for each creator `φ(−r)`, strictly decreasing; the
/// state is `φ(−r1) φ(−r2) ⋯ e^λ` in that order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FockBasisVector {
    pub bosons: Vec<(u8, u32)>,
    pub point: LatticeVector,
    pub fermions: Vec<u32>,
}

impl FockBasisVector {
    pub fn exp(point: LatticeVector) -> Self {
        FockBasisVector { bosons: Vec::new(), point, fermions: Vec::new() }
    }

    pub fn vacuum() -> Self {
        Self::exp(LatticeVector::ZERO)
    }

    pub fn new(mut bosons: Vec<(u8, u32)>, point: LatticeVector, mut fermions: Vec<u32>) -> Self {
        bosons.sort_unstable();
        fermions.sort_unstable_by(|a, b| b.cmp(a));
        FockBasisVector { bosons, point, fermions }
    }

    pub fn boson_degree(&self) -> u32 {
        self.bosons.iter().map(|b| b.1).sum()
    }

    /// Total fermion mode degree `Σ r`.
    pub fn fermion_degree(&self) -> Q64 {
        q(self.fermions.iter().map(|&t| t as i64).sum(), 2)
    }

    /// Oscillator part of the weight (everything except `e^λ`).
    pub fn oscillator_degree(&self) -> Q64 {
        qi(self.boson_degree() as i64) + self.fermion_degree()
    }

    pub fn fermion_parity(&self) -> bool {
        self.fermions.len() % 2 == 1
    }

    pub fn to_json(&self) -> Value {
        json!({
            "bosons": self.bosons.iter().map(|&(g, n)| json!([g, n])).collect::<Vec<_>>(),
            "point": self.point.0.iter().map(|c| fmt_q(*c)).collect::<Vec<_>>(),
            "fermions": self.fermions.iter().map(|&t| fmt_q(q(t as i64, 2))).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Config(format!("malformed basis vector: {what}"));
        let mut bosons = Vec::new();
        for b in v.get("bosons").and_then(Value::as_array).ok_or_else(|| bad("bosons"))? {
            let pair = b.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("boson pair"))?;
            let g = pair[0].as_u64().ok_or_else(|| bad("generator"))?;
            let n = pair[1].as_u64().filter(|&n| n >= 1).ok_or_else(|| bad("boson mode"))?;
            bosons.push((g as u8, n as u32));
        }
        let mut point = [qi(0), qi(0)];
        let coords = v.get("point").and_then(Value::as_array).ok_or_else(|| bad("point"))?;
        if coords.is_empty() || coords.len() > 2 {
            return Err(bad("point length"));
        }
        for (i, c) in coords.iter().enumerate() {
            point[i] = value_q(c).ok_or_else(|| bad("point coordinate"))?;
        }
        let mut fermions = Vec::new();
        if let Some(fs) = v.get("fermions") {
            for f in fs.as_array().ok_or_else(|| bad("fermions"))? {
                let r = value_q(f).ok_or_else(|| bad("fermion mode"))?;
                let t = r * 2;
                if *t.denom() != 1 || t.to_integer() <= 0 || t.to_integer() % 2 == 0 {
                    return Err(bad("fermion modes must be positive half-odd integers"));
                }
                fermions.push(t.to_integer() as u32);
            }
        }
        let b = FockBasisVector::new(bosons, LatticeVector(point), fermions);
        if b.fermions.windows(2).any(|w| w[0] == w[1]) {
            return Err(bad("repeated fermion mode"));
        }
        Ok(b)
    }
}

fn value_q(v: &Value) -> Option<Q64> {
    match v {
        Value::String(s) => parse_q(s),
        Value::Number(n) => n.as_i64().map(qi),
        _ => None,
    }
}

impl Ord for FockBasisVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.boson_degree()
            .cmp(&other.boson_degree())
            .then_with(|| self.bosons.cmp(&other.bosons))
            .then_with(|| self.point.cmp(&other.point))
            .then_with(|| self.fermions.cmp(&other.fermions))
    }
}

impl PartialOrd for FockBasisVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FockBasisVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (g, n) in &self.bosons {
            write!(f, "a{g}(-{n}) ")?;
        }
        for t in &self.fermions {
            write!(f, "phi(-{t}/2) ")?;
        }
        write!(f, "e^{}", self.point)
    }
}

/// Finite exact linear combination of basis vectors; zero coefficients are
/// never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FockElement {
    terms: BTreeMap<FockBasisVector, Rational>,
}

impl FockElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(b: FockBasisVector) -> Self {
        Self::term(b, Rational::one())
    }

    pub fn term(b: FockBasisVector, c: Rational) -> Self {
        let mut e = Self::zero();
        e.add_term(b, c);
        e
    }

    pub fn vacuum() -> Self {
        Self::basis(FockBasisVector::vacuum())
    }

    pub fn exp(point: LatticeVector) -> Self {
        Self::basis(FockBasisVector::exp(point))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (&FockBasisVector, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, b: &FockBasisVector) -> Rational {
        self.terms.get(b).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, b: FockBasisVector, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(b) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &FockElement, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (b, x) in &other.terms {
            self.add_term(b.clone(), x * c);
        }
    }

    pub fn scaled(&self, c: &Rational) -> FockElement {
        if c.is_zero() {
            return Self::zero();
        }
        FockElement { terms: self.terms.iter().map(|(b, x)| (b.clone(), x * c)).collect() }
    }

    /// Keeps only the terms satisfying `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&FockBasisVector) -> bool) -> FockElement {
        FockElement {
            terms: self.terms.iter().filter(|(b, _)| keep(b)).map(|(b, c)| (b.clone(), c.clone())).collect(),
        }
    }

    pub fn into_terms(self) -> BTreeMap<FockBasisVector, Rational> {
        self.terms
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(b, c)| json!({"coeff": fmt_big(c), "basis": b.to_json()}))
                .collect(),
        )
    }

    /// Accepts the array form produced by [`FockElement::to_json`], or a
    /// single basis-vector object (coefficient one).
    pub fn from_json(v: &Value) -> Result<Self> {
        let mut e = FockElement::zero();
        match v {
            Value::Array(items) => {
                for it in items {
                    let c = match it.get("coeff") {
                        Some(Value::String(s)) => parse_big(s),
                        Some(Value::Number(n)) => n.as_i64().map(crate::rational::rint),
                        None => Some(Rational::one()),
                        _ => None,
                    }
                    .ok_or_else(|| Error::Config("malformed coefficient".into()))?;
                    let b = it.get("basis").ok_or_else(|| Error::Config("missing basis".into()))?;
                    e.add_term(FockBasisVector::from_json(b)?, c);
                }
            }
            Value::Object(_) => e.add_term(FockBasisVector::from_json(v)?, Rational::one()),
            _ => return Err(Error::Config("element must be an array or object".into())),
        }
        Ok(e)
    }
}

impl FromIterator<(FockBasisVector, Rational)> for FockElement {
    fn from_iter<I: IntoIterator<Item = (FockBasisVector, Rational)>>(iter: I) -> Self {
        let mut e = FockElement::zero();
        for (b, c) in iter {
            e.add_term(b, c);
        }
        e
    }
}

impl std::ops::Add for FockElement {
    type Output = FockElement;
    fn add(mut self, rhs: FockElement) -> FockElement {
        self += &rhs;
        self
    }
}

impl std::ops::AddAssign<&FockElement> for FockElement {
    fn add_assign(&mut self, rhs: &FockElement) {
        for (b, c) in &rhs.terms {
            self.add_term(b.clone(), c.clone());
        }
    }
}

impl std::ops::Sub for FockElement {
    type Output = FockElement;
    fn sub(mut self, rhs: FockElement) -> FockElement {
        self.add_scaled(&rhs, &-Rational::one());
        self
    }
}

impl std::ops::Neg for FockElement {
    type Output = FockElement;
    fn neg(self) -> FockElement {
        self.scaled(&-Rational::one())
    }
}

impl fmt::Display for FockElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (b, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}) {}", fmt_big(c), b)?;
        }
        Ok(())
    }
}

/// All multisets of `(generator, n)` with `generator < rank` and total mode
/// degree `degree`, each sorted.
pub fn boson_monomials(rank: usize, degree: u32) -> Vec<Vec<(u8, u32)>> {
    let parts: Vec<(u8, u32)> = (1..=degree).flat_map(|n| (0..rank as u8).map(move |g| (g, n))).collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(parts: &[(u8, u32)], start: usize, left: u32, cur: &mut Vec<(u8, u32)>, out: &mut Vec<Vec<(u8, u32)>>) {
        if left == 0 {
            let mut m = cur.clone();
            m.sort_unstable();
            out.push(m);
            return;
        }
        for i in start..parts.len() {
            if parts[i].1 > left {
                continue;
            }
            cur.push(parts[i]);
            rec(parts, i, left - parts[i].1, cur, out);
            cur.pop();
        }
    }
    rec(&parts, 0, degree, &mut cur, &mut out);
    out.sort();
    out
}

/// Fermion words with `Σ 2r = twice_degree`: strictly decreasing sequences of
/// distinct positive odd integers.
pub fn fermion_words(twice_degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    fn rec(max: u32, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        let mut t = max.min(left);
        if t % 2 == 0 {
            t = t.saturating_sub(1);
        }
        while t >= 1 {
            cur.push(t);
            rec(t.saturating_sub(2), left - t, cur, out);
            cur.pop();
            if t < 2 {
                break;
            }
            t -= 2;
        }
    }
    rec(twice_degree, twice_degree, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// All oscillator states `(bosons, fermions)` of degree `degree`; fermion
/// words are included only when `with_fermions` is set.
pub fn oscillators(rank: usize, degree: Q64, with_fermions: bool) -> Vec<(Vec<(u8, u32)>, Vec<u32>)> {
    let twice = degree * 2;
    if degree < qi(0) || *twice.denom() != 1 {
        return Vec::new();
    }
    let twice = twice.to_integer() as u32;
    let mut out = Vec::new();
    if !with_fermions {
        if twice % 2 == 1 {
            return out;
        }
        for m in boson_monomials(rank, twice / 2) {
            out.push((m, Vec::new()));
        }
        return out;
    }
    let mut tf = twice % 2;
    while tf <= twice {
        let bos = (twice - tf) / 2;
        let words = fermion_words(tf);
        for m in boson_monomials(rank, bos) {
            for w in &words {
                out.push((m.clone(), w.clone()));
            }
        }
        tf += 2;
    }
    out
}

/// Basis of the weight-`weight` component given the lattice points available
/// (each with its conformal weight). Canonically ordered.
pub fn graded_component(
    rank: usize,
    points: &[(LatticeVector, Q64)],
    weight: Q64,
    with_fermions: bool,
) -> Vec<FockBasisVector> {
    let mut out = Vec::new();
    for (pt, w) in points {
        for (b, f) in oscillators(rank, weight - *w, with_fermions) {
            out.push(FockBasisVector { bosons: b, point: *pt, fermions: f });
        }
    }
    out.sort();
    out
}
