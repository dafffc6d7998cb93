//! Submodules generated under a finite alphabet of modes, Jordan structure
//! of an operator on graded pieces, and dimension tables of filtrations.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::case::Case;
use crate::deformation::{DeformedField, Deformation};
use crate::error::{Error, Result};
use crate::fock::{FockBasisVector, FockElement};
use crate::linalg::{JordanData, Matrix, SparseSpan};
use crate::modular::{exact_span, ModEchelon, PRIMES};
use crate::modes::ExtendedSector;
use crate::rational::{fmt_big, fmt_q, qi, Q64, Rational};
use crate::screening::triplet_generators;

type FamilyFn = dyn Fn(&FockElement, Q64) -> Result<Vec<(Q64, FockElement)>> + Send + Sync;

/// A family of homogeneous operators applied together: given `w` and a
/// bound `s`, returns the images of every member raising weight by at most
/// `s`, each tagged with its weight shift.
/// Members must have distinct shifts; the shift identifies the member.
#[derive(Clone)]
pub struct ModeFamily {
    pub label: String,
    f: Arc<FamilyFn>,
}

impl ModeFamily {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&FockElement, Q64) -> Result<Vec<(Q64, FockElement)>> + Send + Sync + 'static,
    ) -> Self {
        ModeFamily { label: label.into(), f: Arc::new(f) }
    }

    /// Every mode of a field of weight `wt` acting on the module `es`.
    pub fn field(case: &Case, label: impl Into<String>, field: DeformedField, wt: Q64, es: Option<ExtendedSector>) -> Self {
        let case = case.clone();
        ModeFamily::new(label, move |w, smax| {
            let nmin = qi((wt - qi(1) - smax).ceil().to_integer());
            let modes = field.modes_from(&case, nmin, w, es.as_ref())?;
            Ok(modes.into_iter().map(|(n, v)| (wt - n - qi(1), v)).collect())
        })
    }

    /// A single operator of weight `shift`.
    pub fn single(
        label: impl Into<String>,
        shift: Q64,
        f: impl Fn(&FockElement) -> Result<FockElement> + Send + Sync + 'static,
    ) -> Self {
        ModeFamily::new(label, move |w, smax| if shift <= smax { Ok(vec![(shift, f(w)?)]) } else { Ok(vec![]) })
    }

    pub fn apply(&self, w: &FockElement, smax: Q64) -> Result<Vec<(Q64, FockElement)>> {
        (self.f)(w, smax)
    }
}

impl std::fmt::Debug for ModeFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ModeFamily({})", self.label)
    }
}

/// Modes of `ω, F, H, E` (deformed unless `deformed = false`) acting on the
/// module `es` of the triplet extended algebra.
pub fn triplet_alphabet(case: &Case, es: ExtendedSector, deformed: bool) -> Result<Vec<ModeFamily>> {
    let g = triplet_generators(case)?;
    let d = Deformation::standard(case);
    let mut out = Vec::new();
    for (name, a) in [("L", &g.omega), ("F", &g.f), ("H", &g.h), ("E", &g.e)] {
        let wt = case.homogeneous_weight(a).ok_or_else(|| Error::Config(format!("{name} is not homogeneous")))?;
        let field = if deformed { d.field(case, a)? } else { DeformedField::plain(a) };
        out.push(ModeFamily::field(case, name, field, wt, Some(es)));
    }
    Ok(out)
}

/// A graded subspace, one echelon span per weight.
#[derive(Clone, Debug, Default)]
pub struct SubmoduleSpan {
    pub cutoff: Q64,
    pub components: BTreeMap<Q64, SparseSpan>,
}

impl SubmoduleSpan {
    pub fn dim(&self, w: Q64) -> usize {
        self.components.get(&w).map_or(0, SparseSpan::dim)
    }

    /// Dimensions at weights `≤ cutoff`.
    pub fn dims(&self) -> BTreeMap<Q64, usize> {
        self.components.iter().filter(|(w, _)| **w <= self.cutoff).map(|(w, s)| (*w, s.dim())).collect()
    }

    pub fn component(&self, w: Q64) -> SparseSpan {
        self.components.get(&w).cloned().unwrap_or_default()
    }

    /// Lowest weight carrying a nonzero component.
    pub fn lowest_weight(&self) -> Option<Q64> {
        self.components.iter().find(|(_, s)| s.dim() > 0).map(|(w, _)| *w)
    }

    pub fn contains(&self, case: &Case, v: &FockElement) -> bool {
        split_by_weight(case, v).iter().all(|(w, part)| self.components.get(w).is_some_and(|s| s.contains(part)))
    }

    /// Span of the homogeneous elements `gens`, without closing.
    pub fn from_elements(case: &Case, gens: &[FockElement], cutoff: Q64) -> SubmoduleSpan {
        let mut out = SubmoduleSpan { cutoff, components: BTreeMap::new() };
        for g in gens {
            for (w, part) in split_by_weight(case, g) {
                out.components.entry(w).or_default().insert(&part);
            }
        }
        out
    }

    pub fn sum(&self, other: &SubmoduleSpan) -> SubmoduleSpan {
        let mut components = self.components.clone();
        for (w, s) in &other.components {
            let merged = components.get(w).map_or_else(|| s.clone(), |mine| mine.sum(s));
            components.insert(*w, merged);
        }
        SubmoduleSpan { cutoff: self.cutoff.min(other.cutoff), components }
    }

    pub fn to_json(&self) -> Value {
        let dims: Vec<Value> = self.dims().into_iter().map(|(w, d)| json!({"weight": fmt_q(w), "dim": d})).collect();
        json!({"cutoff": fmt_q(self.cutoff), "dims": dims})
    }
}

/// Homogeneous parts of `v`.
pub fn split_by_weight(case: &Case, v: &FockElement) -> BTreeMap<Q64, FockElement> {
    let mut out: BTreeMap<Q64, FockElement> = BTreeMap::new();
    for (b, c) in v.iter() {
        out.entry(case.weight_of(b)).or_default().add_term(b.clone(), c.clone());
    }
    out
}

/// Closure of `gens` under `alphabet`. Vectors are kept up to weight
/// `cutoff + margin`, so components near the cutoff see paths that leave
/// and come back within the margin. With `stop` set, returns as soon as
/// that vector lies in the span.
pub fn generate_submodule(
    case: &Case,
    gens: &[FockElement],
    alphabet: &[ModeFamily],
    cutoff: Q64,
    margin: Q64,
    stop: Option<&FockElement>,
) -> Result<SubmoduleSpan> {
    generate_submodule_in(case, gens, alphabet, cutoff, margin, stop, &|_| true)
}

/// As [`generate_submodule`], keeping only images whose terms satisfy
/// `within` (used for charge windows on the rank-two lattice).
///
/// Independence is decided modulo a prime and the resulting spans are then
/// recovered and checked exactly; if that check fails the closure is redone
/// with exact elimination throughout.
pub fn generate_submodule_in(
    case: &Case,
    gens: &[FockElement],
    alphabet: &[ModeFamily],
    cutoff: Q64,
    margin: Q64,
    stop: Option<&FockElement>,
    within: &(dyn Fn(&FockBasisVector) -> bool + Sync),
) -> Result<SubmoduleSpan> {
    let mut imager = Imager { case, alphabet, top: cutoff + margin, within, cache: HashMap::new() };
    match closure_modular(&mut imager, gens, cutoff, stop)? {
        Some(span) => Ok(span),
        None => closure_exact(&mut imager, gens, cutoff, stop),
    }
}

/// Images of vectors under an alphabet, memoized on basis vectors.
struct Imager<'a> {
    case: &'a Case,
    alphabet: &'a [ModeFamily],
    top: Q64,
    within: &'a (dyn Fn(&FockBasisVector) -> bool + Sync),
    /// Images of a basis vector, keyed by family index and weight shift.
    cache: HashMap<FockBasisVector, Vec<(usize, Q64, FockElement)>>,
}

impl Imager<'_> {
    /// Nonzero images of every vector of `batch`, tagged with their weight.
    fn images(&mut self, batch: &[(Q64, FockElement)]) -> Result<Vec<(Q64, FockElement)>> {
        let mut fresh: Vec<FockBasisVector> =
            batch.iter().flat_map(|(_, v)| v.iter().map(|(b, _)| b)).filter(|b| !self.cache.contains_key(*b)).cloned().collect();
        fresh.sort();
        fresh.dedup();
        let (case, alphabet, top) = (self.case, self.alphabet, self.top);
        let computed: Vec<Vec<(usize, Q64, FockElement)>> = fresh
            .par_iter()
            .map(|b| {
                let w = case.weight_of(b);
                let v = FockElement::basis(b.clone());
                let mut out = Vec::new();
                for (i, fam) in alphabet.iter().enumerate() {
                    out.extend(fam.apply(&v, top - w)?.into_iter().map(|(s, img)| (i, s, img)));
                }
                Ok::<_, Error>(out)
            })
            .collect::<Result<Vec<_>>>()?;
        self.cache.extend(fresh.into_iter().zip(computed));
        let mut out = Vec::new();
        for (w, v) in batch {
            // one image per operator: a family member is fixed by its shift
            let mut by_op: BTreeMap<(usize, Q64), FockElement> = BTreeMap::new();
            for (b, c) in v.iter() {
                for (i, s, img) in &self.cache[b] {
                    by_op.entry((*i, *s)).or_default().add_scaled(img, c);
                }
            }
            for ((_, s), img) in by_op {
                let img = img.filter(|b| (self.within)(b));
                if !img.is_zero() {
                    out.push((*w + s, img));
                }
            }
        }
        Ok(out)
    }
}

fn seeds(case: &Case, gens: &[FockElement], cutoff: Q64) -> Result<Vec<(Q64, FockElement)>> {
    let mut out = Vec::new();
    for g in gens {
        for (w, part) in split_by_weight(case, g) {
            if w > cutoff {
                return Err(Error::CutoffTooSmall { cutoff, weight: w });
            }
            out.push((w, part));
        }
    }
    Ok(out)
}

#[derive(Debug)]
struct ModPiece {
    echelon: ModEchelon,
    raw: Vec<FockElement>,
    rejected: Vec<FockElement>,
}

impl ModPiece {
    fn new() -> Self {
        ModPiece { echelon: ModEchelon::new(PRIMES[0]), raw: Vec::new(), rejected: Vec::new() }
    }

    /// `Some(true)` for a new direction; `None` if the prime is unusable.
    fn add(&mut self, v: FockElement) -> Option<bool> {
        let fresh = self.echelon.insert(&v)?;
        if fresh {
            self.raw.push(v);
        } else {
            self.rejected.push(v);
        }
        Some(fresh)
    }
}

fn closure_modular(im: &mut Imager, gens: &[FockElement], cutoff: Q64, stop: Option<&FockElement>) -> Result<Option<SubmoduleSpan>> {
    let mut pieces: BTreeMap<Q64, ModPiece> = BTreeMap::new();
    let mut queue: VecDeque<(Q64, FockElement)> = VecDeque::new();
    for (w, part) in seeds(im.case, gens, cutoff)? {
        let Some(fresh) = pieces.entry(w).or_insert_with(ModPiece::new).add(part.clone()) else { return Ok(None) };
        if fresh {
            queue.push_back((w, part));
        }
    }
    let stop_parts = stop.map(|s| split_by_weight(im.case, s));
    let reached = |pieces: &BTreeMap<Q64, ModPiece>| -> Option<bool> {
        let Some(parts) = &stop_parts else { return Some(false) };
        for (w, part) in parts {
            let Some(piece) = pieces.get(w) else { return Some(false) };
            if !piece.echelon.contains(part)? {
                return Some(false);
            }
        }
        Some(true)
    };
    while !queue.is_empty() {
        match reached(&pieces) {
            None => return Ok(None),
            Some(true) => break,
            Some(false) => {}
        }
        let batch: Vec<(Q64, FockElement)> = queue.drain(..).collect();
        for (w, img) in im.images(&batch)? {
            let Some(fresh) = pieces.entry(w).or_insert_with(ModPiece::new).add(img.clone()) else { return Ok(None) };
            if fresh {
                queue.push_back((w, img));
            }
        }
    }
    let mut span = SubmoduleSpan { cutoff, components: BTreeMap::new() };
    for (w, piece) in pieces {
        let Some(exact) = exact_span(&piece.raw) else { return Ok(None) };
        if !piece.rejected.iter().all(|v| exact.contains(v)) {
            return Ok(None);
        }
        span.components.insert(w, exact);
    }
    if stop.is_some_and(|s| !queue.is_empty() && !span.contains(im.case, s)) {
        return Ok(None);
    }
    Ok(Some(span))
}

fn closure_exact(im: &mut Imager, gens: &[FockElement], cutoff: Q64, stop: Option<&FockElement>) -> Result<SubmoduleSpan> {
    let mut span = SubmoduleSpan { cutoff, components: BTreeMap::new() };
    let mut queue: VecDeque<(Q64, FockElement)> = VecDeque::new();
    for (w, part) in seeds(im.case, gens, cutoff)? {
        if span.components.entry(w).or_default().insert(&part).is_some() {
            queue.push_back((w, part));
        }
    }
    while !queue.is_empty() {
        if stop.is_some_and(|s| span.contains(im.case, s)) {
            break;
        }
        let batch: Vec<(Q64, FockElement)> = queue.drain(..).collect();
        for (w, img) in im.images(&batch)? {
            // the raw image adds the same direction as the reduced row and
            // keeps smaller coefficients
            if span.components.entry(w).or_default().insert(&img).is_some() {
                queue.push_back((w, img));
            }
        }
    }
    Ok(span)
}

/// Jordan data of an operator on one graded piece, with witnesses
/// `(v, (M − λ)v)` for every eigenvalue carrying a block of size `≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JordanReport {
    pub weight: Q64,
    pub dim: usize,
    pub blocks: Vec<JordanData>,
    pub witnesses: Vec<(FockElement, FockElement)>,
}

impl JordanReport {
    pub fn max_block(&self) -> usize {
        self.blocks.iter().flat_map(|j| j.blocks.iter().copied()).max().unwrap_or(0)
    }

    pub fn is_semisimple(&self) -> bool {
        self.max_block() <= 1
    }

    pub fn block_sum(&self) -> usize {
        self.blocks.iter().flat_map(|j| j.blocks.iter()).sum()
    }

    pub fn to_json(&self) -> Value {
        let blocks: Vec<Value> = self
            .blocks
            .iter()
            .map(|j| json!({"eigenvalue": fmt_big(&j.eigenvalue), "blocks": j.blocks}))
            .collect();
        let wit: Vec<Value> = self.witnesses.iter().map(|(v, n)| json!({"v": v.to_json(), "nilpotent_image": n.to_json()})).collect();
        json!({"weight": fmt_q(self.weight), "dim": self.dim, "blocks": blocks, "witnesses": wit})
    }
}

/// Jordan structure of `op` restricted to the span `s` (which it must preserve).
pub fn jordan_structure(weight: Q64, s: &SparseSpan, op: impl Fn(&FockElement) -> Result<FockElement>) -> Result<JordanReport> {
    let rows: Vec<&FockElement> = s.basis().collect();
    let n = rows.len();
    let mut m = Matrix::zeros(n, n);
    for (j, r) in rows.iter().enumerate() {
        let img = op(r)?;
        let c = s.coords(&img).ok_or_else(|| Error::Config(format!("operator leaves the span at weight {weight}")))?;
        for (i, x) in c.into_iter().enumerate() {
            m[(i, j)] = x;
        }
    }
    let blocks = if n == 0 { vec![] } else { m.jordan()? };
    let mut witnesses = Vec::new();
    for jd in &blocks {
        let size = jd.blocks.iter().copied().max().unwrap_or(1);
        if size < 2 {
            continue;
        }
        let a = m.shift(&jd.eigenvalue);
        let mut pow = Matrix::identity(n);
        for _ in 0..size - 1 {
            pow = a.mul(&pow);
        }
        // a column of (M − λ)^{size−1} that is nonzero marks a top vector
        if let Some(j) = (0..n).find(|&j| (0..n).any(|i| !pow[(i, j)].is_zero())) {
            let v = rows[j].clone();
            let img = op(&v)? - v.scaled(&jd.eigenvalue);
            witnesses.push((v, img));
        }
    }
    Ok(JordanReport { weight, dim: n, blocks, witnesses })
}

/// Coefficients of `target` in the span of `cols`, if it lies there.
fn solve_combination(cols: &[&FockElement], target: &FockElement) -> Option<Vec<Rational>> {
    let mut keys: Vec<&FockBasisVector> = cols.iter().flat_map(|c| c.iter().map(|(b, _)| b)).chain(target.iter().map(|(b, _)| b)).collect();
    keys.sort();
    keys.dedup();
    let n = cols.len();
    let mut m = Matrix::zeros(keys.len(), n + 1);
    for (i, k) in keys.iter().enumerate() {
        for (j, c) in cols.iter().enumerate() {
            m[(i, j)] = c.coeff(k);
        }
        m[(i, n)] = target.coeff(k);
    }
    let (r, pivots) = m.rref();
    if pivots.contains(&n) {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = r[(row, n)].clone();
    }
    Some(x)
}

/// Jordan structure of `op` on the quotient `s / sub` (both preserved by `op`).
pub fn quotient_jordan(
    weight: Q64,
    s: &SparseSpan,
    sub: &SparseSpan,
    op: impl Fn(&FockElement) -> Result<FockElement>,
) -> Result<JordanReport> {
    let mut acc = sub.clone();
    let reps: Vec<FockElement> = s.basis().filter(|v| acc.insert(v).is_some()).cloned().collect();
    let mut cols: Vec<&FockElement> = reps.iter().collect();
    cols.extend(sub.basis());
    let n = reps.len();
    let mut m = Matrix::zeros(n, n);
    for (j, r) in reps.iter().enumerate() {
        let img = op(r)?;
        let c = solve_combination(&cols, &img).ok_or_else(|| Error::Config(format!("operator leaves the span at weight {weight}")))?;
        for (i, x) in c.into_iter().take(n).enumerate() {
            m[(i, j)] = x;
        }
    }
    let blocks = if n == 0 { vec![] } else { m.jordan()? };
    Ok(JordanReport { weight, dim: n, blocks, witnesses: vec![] })
}

/// Full span of a list of basis vectors.
pub fn basis_span(basis: &[FockBasisVector]) -> SparseSpan {
    let mut s = SparseSpan::new();
    for b in basis {
        s.insert(&FockElement::basis(b.clone()));
    }
    s
}

/// Per-weight dimensions of `A`, `B`, `A ∩ B`, `A + B` and `A/(A ∩ B)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiltrationRow {
    pub weight: Q64,
    pub dim_a: usize,
    pub dim_b: usize,
    pub dim_meet: usize,
    pub dim_join: usize,
}

impl FiltrationRow {
    pub fn quotient(&self) -> usize {
        self.dim_a - self.dim_meet
    }

    pub fn to_json(&self) -> Value {
        json!({
            "weight": fmt_q(self.weight),
            "a": self.dim_a,
            "b": self.dim_b,
            "meet": self.dim_meet,
            "join": self.dim_join,
        })
    }
}

pub fn filtration_probe(a: &SubmoduleSpan, b: &SubmoduleSpan, cutoff: Q64) -> Vec<FiltrationRow> {
    let mut weights: Vec<Q64> = a.components.keys().chain(b.components.keys()).copied().filter(|w| *w <= cutoff).collect();
    weights.sort();
    weights.dedup();
    weights
        .into_iter()
        .map(|w| {
            let (sa, sb) = (a.component(w), b.component(w));
            let join = sa.sum(&sb).dim();
            FiltrationRow { weight: w, dim_a: sa.dim(), dim_b: sb.dim(), dim_meet: sa.dim() + sb.dim() - join, dim_join: join }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeVector;
    use crate::rational::{big, q};
    use crate::screening::twisted_sector;

    fn pt(x: Q64) -> FockElement {
        FockElement::exp(LatticeVector::rank1(x))
    }

    #[test]
    fn vacuum_closure_at_weight_zero() {
        let c = Case::triplet(2, 1).unwrap();
        let es = c.algebra_sector();
        let alpha = triplet_alphabet(&c, es, true).unwrap();
        let s = generate_submodule(&c, &[FockElement::vacuum()], &alpha, qi(3), qi(0), None).unwrap();
        assert_eq!(s.dim(qi(0)), 1);
        assert!(s.contains(&c, &c.omega));
    }

    #[test]
    fn top_of_the_logarithmic_module() {
        for p in 2..=3 {
            let c = Case::triplet(p, 1).unwrap();
            let es = twisted_sector(&c);
            let w0 = q(2 - p, 4);
            let alpha = triplet_alphabet(&c, es, true).unwrap();
            let s = generate_submodule(&c, &[pt(q(1, 2))], &alpha, w0 + qi(1), qi(1), None).unwrap();
            let top = s.component(w0);
            assert_eq!(top.dim(), 2);
            assert!(top.contains(&pt(q(1, 2) - q(1, p))));
            let d = Deformation::standard(&c);
            let rep = jordan_structure(w0, &top, |v| d.virasoro(&c, 0, v, Some(&es))).unwrap();
            assert_eq!(rep.blocks, vec![JordanData { eigenvalue: big(w0), blocks: vec![2] }]);
            assert_eq!(rep.witnesses.len(), 1);
            assert_eq!(rep.block_sum(), rep.dim);
        }
    }

    #[test]
    fn cutoff_below_generator_weight() {
        let c = Case::triplet(2, 1).unwrap();
        let r = generate_submodule(&c, &[pt(q(-1, 2))], &[], qi(0), qi(0), None);
        assert!(matches!(r, Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn self_intersection() {
        let c = Case::triplet(2, 1).unwrap();
        let a = SubmoduleSpan::from_elements(&c, &[pt(qi(1)), c.omega.clone(), FockElement::vacuum()], qi(4));
        for row in filtration_probe(&a, &a, qi(4)) {
            assert_eq!(row.dim_meet, row.dim_a);
            assert_eq!(row.quotient(), 0);
        }
    }
}
