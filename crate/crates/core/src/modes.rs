//! Mode evaluation `u_n w` for arbitrary Fock states `u`, by direct
//! coefficient extraction from the normal-ordered vertex operator
//!
//! `Y(α(−k)⋯ φ(−r)⋯ e^μ, x) = :∂^{(k−1)}α(x) ⋯ ∂^{(r−1/2)}φ(x) ⋯ Y(e^μ, x):`,
//! `Y(e^μ, x) = E⁻(−μ, x) E⁺(−μ, x) e_μ x^{μ(0)}`.
//!
//! Each application touches finitely many terms, so no series is ever
//! materialized beyond the exponent window actually needed.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{FockBasisVector, FockElement};
use crate::lattice::{LatticeConfig, LatticeVector};
use crate::rational::{binomial, floor_q, q, qi, Q64, Rational};

/// Sum of `(bosons, point)` states indexed by an integer exponent offset.
type Series = BTreeMap<i64, FockElement>;
/// Fermion words with coefficients, indexed by integer exponent.
type FSeries = BTreeMap<i64, BTreeMap<Vec<u32>, Rational>>;

/// A module `V_{b+L} ⊕ V_{b+s+L}` over the extended algebra `V_L ⊕ V_{s+L}`.
/// Modes of vectors in `V_{s+L}` annihilate the summand `V_{b+s+L}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExtendedSector {
    pub base: LatticeVector,
    pub shift: LatticeVector,
}

impl ExtendedSector {
    pub fn new(base: LatticeVector, shift: LatticeVector) -> Self {
        ExtendedSector { base, shift }
    }

    pub fn algebra_shifted(&self, cfg: &LatticeConfig, u: &LatticeVector) -> bool {
        cfg.in_base_lattice(&(*u - self.shift))
    }

    pub fn module_shifted(&self, cfg: &LatticeConfig, w: &LatticeVector) -> bool {
        cfg.in_base_lattice(&(*w - self.base - self.shift))
    }

    pub fn in_module(&self, cfg: &LatticeConfig, w: &LatticeVector) -> bool {
        cfg.in_base_lattice(&(*w - self.base)) || self.module_shifted(cfg, w)
    }
}

/// `h(m)` for `h = Σ h_g α_g` acting on one basis vector.
fn heis_basis(cfg: &LatticeConfig, h: &LatticeVector, m: i64, b: &FockBasisVector, out: &mut FockElement, c: &Rational) {
    if m == 0 {
        let s = cfg.pairing(h, &b.point);
        if !s.is_zero() {
            out.add_term(b.clone(), c * big(s));
        }
    } else if m < 0 {
        for g in 0..cfg.rank {
            let hg = h.0[g];
            if hg.is_zero() {
                continue;
            }
            let mut nb = b.clone();
            let pos = nb.bosons.partition_point(|x| *x < (g as u8, (-m) as u32));
            nb.bosons.insert(pos, (g as u8, (-m) as u32));
            out.add_term(nb, c * big(hg));
        }
    } else {
        let mut i = 0;
        while i < b.bosons.len() {
            let (g, n) = b.bosons[i];
            let mut j = i;
            while j < b.bosons.len() && b.bosons[j] == (g, n) {
                j += 1;
            }
            if n as i64 == m {
                let s = cfg.pairing_gen(g as usize, h) * qi(m * (j - i) as i64);
                if !s.is_zero() {
                    let mut nb = b.clone();
                    nb.bosons.remove(i);
                    out.add_term(nb, c * big(s));
                }
            }
            i = j;
        }
    }
}

fn big(x: Q64) -> Rational {
    crate::rational::big(x)
}

/// `h(m) w` for a Cartan vector `h = Σ h_g α_g`.
pub fn heis_vec(cfg: &LatticeConfig, h: &LatticeVector, m: i64, w: &FockElement) -> FockElement {
    let mut out = FockElement::zero();
    for (b, c) in w.iter() {
        heis_basis(cfg, h, m, b, &mut out, c);
    }
    out
}

/// `α_g(n) w`.
pub fn heisenberg(cfg: &LatticeConfig, g: usize, n: i64, w: &FockElement) -> FockElement {
    heis_vec(cfg, &cfg.generator(g), n, w)
}

/// Applies `φ(s)` (`t2 = 2s`) to a fermion word; returns the new word and
/// the sign, or `None` if the result vanishes.
fn fermion_word_apply(t2: i64, word: &[u32]) -> Option<(Vec<u32>, bool)> {
    if t2 < 0 {
        let q2 = (-t2) as u32;
        if word.contains(&q2) {
            return None;
        }
        let before = word.iter().filter(|&&x| x > q2).count();
        let mut nw = word.to_vec();
        nw.insert(before, q2);
        Some((nw, before % 2 == 1))
    } else {
        let pos = word.iter().position(|&x| x as i64 == t2)?;
        let mut nw = word.to_vec();
        nw.remove(pos);
        Some((nw, pos % 2 == 1))
    }
}

/// `φ(r) w` for half-odd `r`, including the sign from passing the lattice
/// factor of `w`.
pub fn fermion_mode(cfg: &LatticeConfig, r: Q64, w: &FockElement) -> Result<FockElement> {
    let t2 = r * 2;
    if *t2.denom() != 1 || t2.to_integer() % 2 == 0 {
        return Err(Error::Config(format!("fermion mode {r} is not half-odd")));
    }
    let mut out = FockElement::zero();
    for (b, c) in w.iter() {
        if let Some((nw, neg)) = fermion_word_apply(t2.to_integer(), &b.fermions) {
            let neg = neg ^ cfg.parity(&b.point)?;
            let nb = FockBasisVector { bosons: b.bosons.clone(), point: b.point, fermions: nw };
            out.add_term(nb, if neg { -c.clone() } else { c.clone() });
        }
    }
    Ok(out)
}

/// Boson monomial with coefficient.
type Poly = Vec<(Vec<(u8, u32)>, Rational)>;

/// Homogeneous parts of `E⁻(−μ, x) = exp(Σ_{m≥1} μ(−m) x^m / m)` as
/// polynomials in the creators, degrees `0..=deg`, cached per `μ`.
fn creation_polys(cfg: &LatticeConfig, mu: &LatticeVector, deg: usize) -> Arc<Vec<Poly>> {
    static CACHE: OnceLock<Mutex<HashMap<(LatticeVector, usize), Arc<Vec<Poly>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (*mu, cfg.rank);
    if let Some(v) = cache.lock().expect("cache lock").get(&key) {
        if v.len() > deg {
            return v.clone();
        }
    }
    let mut polys: Vec<BTreeMap<Vec<(u8, u32)>, Rational>> = vec![BTreeMap::from([(vec![], Rational::one())])];
    for e in 1..=deg {
        let mut pe: BTreeMap<Vec<(u8, u32)>, Rational> = BTreeMap::new();
        for m in 1..=e {
            for (mono, c) in &polys[e - m] {
                for g in 0..cfg.rank {
                    let mg = mu.0[g];
                    if mg.is_zero() {
                        continue;
                    }
                    let mut nm = mono.clone();
                    nm.push((g as u8, m as u32));
                    nm.sort_unstable();
                    *pe.entry(nm).or_insert_with(Rational::zero) += c * big(mg);
                }
            }
        }
        let inv = Rational::new(1.into(), (e as i64).into());
        polys.push(pe.into_iter().filter(|(_, c)| !c.is_zero()).map(|(m, c)| (m, c * &inv)).collect());
    }
    let out: Arc<Vec<Poly>> = Arc::new(polys.into_iter().map(|p| p.into_iter().collect()).collect());
    cache.lock().expect("cache lock").insert(key, out.clone());
    out
}

/// Lattice factor of `Y(u, x)` on the bosonic part of `w`; keys are exponent
/// offsets relative to `x^{⟨μ, λ⟩}`, up to `jmax`.
fn lattice_series(
    cfg: &LatticeConfig,
    ub: &[(u8, u32)],
    mu: &LatticeVector,
    wb: &FockBasisVector,
    jmax: i64,
) -> Result<Series> {
    let mut result = Series::new();
    let sign = cfg.cocycle_sign(mu, &wb.point)?;
    let nf = ub.len();
    for mask in 0u32..(1 << nf) {
        let mut series: Series = BTreeMap::from([(0, FockElement::basis(wb.clone()))]);
        // annihilator parts, including the zero mode
        for (i, &(g, k)) in ub.iter().enumerate() {
            if mask & (1 << i) != 0 {
                continue;
            }
            let gv = cfg.generator(g as usize);
            let mut next = Series::new();
            for (a, el) in &series {
                let deg = el.iter().map(|(b, _)| b.boson_degree()).max().unwrap_or(0) as i64;
                for m in 0..=deg {
                    let coef = binomial(qi(-m - 1), k - 1);
                    if coef.is_zero() {
                        continue;
                    }
                    let img = heis_vec(cfg, &gv, m, el);
                    if !img.is_zero() {
                        next.entry(a - m - k as i64).or_default().add_scaled(&img, &coef);
                    }
                }
            }
            series = next;
        }
        // E⁺(−μ, x)
        if !mu.is_zero() {
            let mut next = Series::new();
            for (a, el) in &series {
                let deg = el.iter().map(|(b, _)| b.boson_degree()).max().unwrap_or(0) as usize;
                let mut fs: Vec<FockElement> = vec![el.clone()];
                for e in 1..=deg {
                    let mut fe = FockElement::zero();
                    for m in 1..=e {
                        let img = heis_vec(cfg, mu, m as i64, &fs[e - m]);
                        fe += &img;
                    }
                    fs.push(fe.scaled(&-Rational::new(1.into(), (e as i64).into())));
                }
                for (e, fe) in fs.into_iter().enumerate() {
                    if !fe.is_zero() {
                        *next.entry(a - e as i64).or_default() += &fe;
                    }
                }
            }
            series = next;
        }
        // e_μ
        let mut next = Series::new();
        for (a, el) in series {
            if a > jmax {
                continue;
            }
            let mut moved = FockElement::zero();
            for (b, c) in el.iter() {
                let nb = FockBasisVector { bosons: b.bosons.clone(), point: b.point + *mu, fermions: Vec::new() };
                moved.add_term(nb, if sign < 0 { -c.clone() } else { c.clone() });
            }
            next.insert(a, moved);
        }
        series = next;
        // E⁻(−μ, x)
        if !mu.is_zero() {
            let mut next = Series::new();
            for (a, el) in &series {
                let budget = (jmax - a) as usize;
                let polys = creation_polys(cfg, mu, budget);
                for (e, poly) in polys.iter().enumerate().take(budget + 1) {
                    let slot = next.entry(a + e as i64).or_default();
                    for (b, c) in el.iter() {
                        for (mono, d) in poly {
                            let mut bosons = b.bosons.clone();
                            bosons.extend_from_slice(mono);
                            bosons.sort_unstable();
                            slot.add_term(FockBasisVector { bosons, point: b.point, fermions: Vec::new() }, c * d);
                        }
                    }
                }
            }
            next.retain(|_, v| !v.is_zero());
            series = next;
        }
        // creator parts
        for (i, &(g, k)) in ub.iter().enumerate() {
            if mask & (1 << i) == 0 {
                continue;
            }
            let gv = cfg.generator(g as usize);
            let mut next = Series::new();
            for (a, el) in &series {
                for t in 0..=(jmax - a) {
                    let coef = binomial(qi(t + k as i64 - 1), k - 1);
                    let img = heis_vec(cfg, &gv, -(t + k as i64), el);
                    next.entry(a + t).or_default().add_scaled(&img, &coef);
                }
            }
            series = next;
        }
        for (a, el) in series {
            if a <= jmax && !el.is_zero() {
                *result.entry(a).or_default() += &el;
            }
        }
    }
    Ok(result)
}

fn add_word(map: &mut BTreeMap<Vec<u32>, Rational>, w: Vec<u32>, c: Rational) {
    if c.is_zero() {
        return;
    }
    let e = map.entry(w).or_insert_with(Rational::zero);
    *e += c;
}

/// Fermion factor of `Y(u, x)` on a fermion word, exponents up to `jmax`.
fn fermion_series(uf: &[u32], word: &[u32], jmax: i64) -> FSeries {
    let nf = uf.len();
    let mut result = FSeries::new();
    for mask in 0u32..(1 << nf) {
        let order: Vec<usize> = (0..nf).filter(|i| mask & (1 << i) != 0).chain((0..nf).filter(|i| mask & (1 << i) == 0)).collect();
        let mut inversions = 0;
        for a in 0..nf {
            for b in a + 1..nf {
                if order[a] > order[b] {
                    inversions += 1;
                }
            }
        }
        let start = if inversions % 2 == 0 { Rational::one() } else { -Rational::one() };
        let mut series: FSeries = BTreeMap::from([(0, BTreeMap::from([(word.to_vec(), start)]))]);
        // annihilators act right to left
        for i in (0..nf).rev() {
            if mask & (1 << i) != 0 {
                continue;
            }
            let k = (uf[i] as i64 - 1) / 2;
            let mut next = FSeries::new();
            for (a, words) in &series {
                for (wd, c) in words {
                    for &s2 in wd {
                        let s = q(s2 as i64, 2);
                        let coef = binomial(-s - q(1, 2), k as u32);
                        if coef.is_zero() {
                            continue;
                        }
                        if let Some((nw, neg)) = fermion_word_apply(s2 as i64, wd) {
                            let exp = a - (s + q(1, 2)).to_integer() - k;
                            let v = c * coef.clone();
                            add_word(next.entry(exp).or_default(), nw, if neg { -v } else { v });
                        }
                    }
                }
            }
            series = next;
        }
        for i in (0..nf).rev() {
            if mask & (1 << i) == 0 {
                continue;
            }
            let k = (uf[i] as i64 - 1) / 2;
            let mut next = FSeries::new();
            for (a, words) in &series {
                for t in 0..=(jmax - a) {
                    let coef = binomial(qi(t + k), k as u32);
                    let mode2 = 2 * t + uf[i] as i64;
                    for (wd, c) in words {
                        if let Some((nw, neg)) = fermion_word_apply(-mode2, wd) {
                            let v = c * coef.clone();
                            add_word(next.entry(a + t).or_default(), nw, if neg { -v } else { v });
                        }
                    }
                }
            }
            series = next;
        }
        for (a, words) in series {
            if a > jmax {
                continue;
            }
            let slot = result.entry(a).or_default();
            for (wd, c) in words {
                add_word(slot, wd, c);
            }
        }
    }
    for words in result.values_mut() {
        words.retain(|_, c| !c.is_zero());
    }
    result
}

/// Smallest power of `x` that can occur in `Y(u, x) w` for basis terms `u`, `w`.
fn min_exponent(cfg: &LatticeConfig, u: &FockBasisVector, w: &FockBasisVector) -> Q64 {
    let kb: i64 = u.bosons.iter().map(|b| b.1 as i64).sum();
    let kf: Q64 = u.fermion_degree();
    cfg.pairing(&u.point, &w.point) - qi(w.boson_degree() as i64) - qi(kb) - w.fermion_degree() - kf
}

/// Largest mode index `n` for which `u_n w` can be nonzero.
pub fn max_mode(cfg: &LatticeConfig, u: &FockElement, w: &FockElement) -> Option<Q64> {
    let mut best: Option<Q64> = None;
    for (ub, _) in u.iter() {
        for (wb, _) in w.iter() {
            let n = -qi(1) - min_exponent(cfg, ub, wb);
            best = Some(best.map_or(n, |b: Q64| b.max(n)));
        }
    }
    best
}

fn non_integral(u: &FockBasisVector, w: &FockBasisVector, n: Q64) -> Error {
    Error::NonIntegralExponent { vector: u.to_string(), state: w.to_string(), mode: n }
}

/// Coefficients of `Y(u, x) w` for basis vectors, keyed by the offset `J`
/// of the power `x^{⟨μ, λ⟩ + J}`, for `J ≤ jmax`.
fn basis_series(cfg: &LatticeConfig, u: &FockBasisVector, w: &FockBasisVector, jmax: i64) -> Result<Series> {
    let min_l = -(w.boson_degree() as i64) - u.bosons.iter().map(|b| b.1 as i64).sum::<i64>();
    let wb = FockBasisVector { bosons: w.bosons.clone(), point: w.point, fermions: Vec::new() };
    let mut out = Series::new();
    if u.fermions.is_empty() {
        if jmax < min_l {
            return Ok(out);
        }
        for (a, el) in lattice_series(cfg, &u.bosons, &u.point, &wb, jmax)? {
            let mut v = FockElement::zero();
            for (b, c) in el.iter() {
                v.add_term(FockBasisVector { bosons: b.bosons.clone(), point: b.point, fermions: w.fermions.clone() }, c.clone());
            }
            if !v.is_zero() {
                out.insert(a, v);
            }
        }
        return Ok(out);
    }
    let min_f = floor_q(-w.fermion_degree() - u.fermion_degree());
    if jmax < min_l + min_f {
        return Ok(out);
    }
    let ls = lattice_series(cfg, &u.bosons, &u.point, &wb, jmax - min_f)?;
    let fs = fermion_series(&u.fermions, &w.fermions, jmax - min_l);
    let koszul = u.fermion_parity() && cfg.parity(&w.point)?;
    for (jl, el) in &ls {
        for (jf, words) in &fs {
            if jl + jf > jmax {
                break;
            }
            let slot = out.entry(jl + jf).or_default();
            for (b, c) in el.iter() {
                for (wd, d) in words {
                    let v = c * d;
                    slot.add_term(
                        FockBasisVector { bosons: b.bosons.clone(), point: b.point, fermions: wd.clone() },
                        if koszul { -v } else { v },
                    );
                }
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// Offset `J = −n − 1 − ⟨μ, λ⟩` of the mode `n`, if integral.
fn mode_offset(cfg: &LatticeConfig, u: &FockBasisVector, n: Q64, w: &FockBasisVector) -> Result<i64> {
    let j = -n - qi(1) - cfg.pairing(&u.point, &w.point);
    if *j.denom() != 1 {
        return Err(non_integral(u, w, n));
    }
    Ok(j.to_integer())
}

/// `u_n w` for basis vectors.
fn basis_mode(cfg: &LatticeConfig, u: &FockBasisVector, n: Q64, w: &FockBasisVector) -> Result<FockElement> {
    let j = mode_offset(cfg, u, n, w)?;
    Ok(basis_series(cfg, u, w, j)?.remove(&j).unwrap_or_default())
}

/// `u_n w` for all `n ≥ nmin` at once, keyed by `n`; `nmin` fixes the
/// coset of mode indices.
pub fn modes_from(
    cfg: &LatticeConfig,
    u: &FockElement,
    nmin: Q64,
    w: &FockElement,
    ext: Option<&ExtendedSector>,
) -> Result<BTreeMap<Q64, FockElement>> {
    let mut out: BTreeMap<Q64, FockElement> = BTreeMap::new();
    for (ub, uc) in u.iter() {
        for (wb, wc) in w.iter() {
            if ext.is_some_and(|es| es.algebra_shifted(cfg, &ub.point) && es.module_shifted(cfg, &wb.point)) {
                continue;
            }
            let jmax = mode_offset(cfg, ub, nmin, wb)?;
            let shift = cfg.pairing(&ub.point, &wb.point);
            let c = uc * wc;
            for (j, v) in basis_series(cfg, ub, wb, jmax)? {
                let n = -qi(j + 1) - shift;
                out.entry(n).or_default().add_scaled(&v, &c);
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// `u_n w`; with `ext`, modes of algebra-shifted terms of `u` annihilate
/// module-shifted terms of `w`.
pub fn mode_ext(
    cfg: &LatticeConfig,
    u: &FockElement,
    n: Q64,
    w: &FockElement,
    ext: Option<&ExtendedSector>,
) -> Result<FockElement> {
    let pairs: Vec<(&FockBasisVector, &Rational, &FockBasisVector, &Rational)> = u
        .iter()
        .flat_map(|(ub, uc)| w.iter().map(move |(wb, wc)| (ub, uc, wb, wc)))
        .filter(|(ub, _, wb, _)| match ext {
            Some(es) => !(es.algebra_shifted(cfg, &ub.point) && es.module_shifted(cfg, &wb.point)),
            None => true,
        })
        .collect();
    let eval = |(ub, uc, wb, wc): &(&FockBasisVector, &Rational, &FockBasisVector, &Rational)| -> Result<FockElement> {
        Ok(basis_mode(cfg, ub, n, wb)?.scaled(&(*uc * *wc)))
    };
    let parts: Vec<FockElement> = if pairs.len() >= 16 {
        pairs.par_iter().map(eval).collect::<Result<_>>()?
    } else {
        pairs.iter().map(eval).collect::<Result<_>>()?
    };
    let mut out = FockElement::zero();
    for p in &parts {
        out += p;
    }
    Ok(out)
}

pub fn mode(cfg: &LatticeConfig, u: &FockElement, n: Q64, w: &FockElement) -> Result<FockElement> {
    mode_ext(cfg, u, n, w, None)
}

/// `e^μ_r w`.
pub fn exp_mode(cfg: &LatticeConfig, mu: &LatticeVector, r: Q64, w: &FockElement) -> Result<FockElement> {
    mode(cfg, &FockElement::exp(*mu), r, w)
}

/// `u_n w` as a formal coefficient list: `Y(u, x) w` restricted to powers
/// `x^{e}` with `e ≤ emax`, as `(e, coefficient)` pairs. Powers are those
/// allowed by the lattice pairing.
pub fn series_upto(
    cfg: &LatticeConfig,
    u: &FockElement,
    w: &FockElement,
    emax: Q64,
    ext: Option<&ExtendedSector>,
) -> Result<BTreeMap<Q64, FockElement>> {
    let mut out: BTreeMap<Q64, FockElement> = BTreeMap::new();
    for (ub, uc) in u.iter() {
        for (wb, wc) in w.iter() {
            if ext.is_some_and(|es| es.algebra_shifted(cfg, &ub.point) && es.module_shifted(cfg, &wb.point)) {
                continue;
            }
            let shift = cfg.pairing(&ub.point, &wb.point);
            let jmax = (emax - shift).floor().to_integer();
            let c = uc * wc;
            for (j, v) in basis_series(cfg, ub, wb, jmax)? {
                out.entry(shift + qi(j)).or_default().add_scaled(&v, &c);
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// `L(−1)`-type helper: the translation `D u = u_{−2} 1`.
pub fn translate(cfg: &LatticeConfig, u: &FockElement) -> Result<FockElement> {
    mode(cfg, u, qi(-2), &FockElement::vacuum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{binomial_int, rat, rint};

    fn a1(c: Q64) -> LatticeVector {
        LatticeVector::rank1(c)
    }

    fn alpha_m1() -> FockElement {
        FockElement::basis(FockBasisVector::new(vec![(0, 1)], LatticeVector::ZERO, vec![]))
    }

    #[test]
    fn heisenberg_basics() {
        let cfg = LatticeConfig::triplet(2, 1).unwrap();
        let v = heisenberg(&cfg, 0, -1, &FockElement::vacuum());
        assert_eq!(heisenberg(&cfg, 0, 1, &v), FockElement::vacuum().scaled(&rint(4)));
        let e = FockElement::exp(a1(q(1, 2)));
        assert_eq!(heisenberg(&cfg, 0, 0, &e), e.scaled(&rint(2)));
        assert!(heisenberg(&cfg, 0, 2, &FockElement::vacuum()).is_zero());
    }

    #[test]
    fn creation_property() {
        let cfg = LatticeConfig::triplet(3, 1).unwrap();
        let mu = a1(q(-1, 3));
        assert_eq!(exp_mode(&cfg, &mu, qi(-1), &FockElement::vacuum()).unwrap(), FockElement::exp(mu));
        let aff = LatticeConfig::affine();
        let mu = LatticeVector::new(qi(3), qi(-3));
        assert_eq!(exp_mode(&aff, &mu, qi(-1), &FockElement::vacuum()).unwrap(), FockElement::exp(mu));
        // a general state is recovered from its −1 mode on the vacuum
        let u = FockElement::basis(FockBasisVector::new(vec![(0, 1), (0, 3), (0, 3)], a1(qi(1)), vec![]));
        assert_eq!(mode(&cfg, &u, qi(-1), &FockElement::vacuum()).unwrap(), u);
    }

    #[test]
    fn screening_on_half_point() {
        for p in 2..5 {
            let cfg = LatticeConfig::triplet(p, 1).unwrap();
            let r = exp_mode(&cfg, &a1(q(-1, p)), qi(0), &FockElement::exp(a1(q(1, 2)))).unwrap();
            assert_eq!(r, FockElement::exp(a1(q(1, 2) - q(1, p))));
        }
        let aff = LatticeConfig::affine();
        let r = exp_mode(&aff, &LatticeVector::new(qi(2), qi(0)), qi(0), &FockElement::exp(LatticeVector::new(qi(-3), qi(1)))).unwrap();
        assert_eq!(r, FockElement::exp(LatticeVector::new(qi(-1), qi(1))));
    }

    #[test]
    fn misaligned_mode_is_rejected() {
        let cfg = LatticeConfig::triplet(3, 1).unwrap();
        let r = exp_mode(&cfg, &a1(q(-1, 3)), qi(0), &FockElement::exp(a1(q(1, 6))));
        assert!(matches!(r, Err(Error::NonIntegralExponent { .. })));
    }

    #[test]
    fn alpha_field_matches_heisenberg() {
        let cfg = LatticeConfig::triplet(2, 1).unwrap();
        let w = FockElement::basis(FockBasisVector::new(vec![(0, 1), (0, 2)], a1(q(1, 2)), vec![]));
        for n in -3..4 {
            assert_eq!(mode(&cfg, &alpha_m1(), qi(n), &w).unwrap(), heisenberg(&cfg, 0, n, &w));
        }
    }

    #[test]
    fn leading_exponential_product() {
        // e^{−α}_{2p−1} e^{α} = vacuum: leading term x^{−2p}
        for p in 2..5 {
            let cfg = LatticeConfig::triplet(p, 1).unwrap();
            let r = exp_mode(&cfg, &a1(qi(-1)), qi(2 * p - 1), &FockElement::exp(a1(qi(1)))).unwrap();
            assert_eq!(r, FockElement::vacuum());
            // next coefficient is −α(−1) vacuum
            let r = exp_mode(&cfg, &a1(qi(-1)), qi(2 * p - 2), &FockElement::exp(a1(qi(1)))).unwrap();
            assert_eq!(r, alpha_m1().scaled(&rint(-1)));
        }
    }

    #[test]
    fn exponential_second_order_coefficient() {
        // e^{α}_{−3} vacuum = coefficient of x^2 in E⁻(−α, x) = (α(−1)²/2 + α(−2)/2) e^α
        let cfg = LatticeConfig::triplet(2, 1).unwrap();
        let r = exp_mode(&cfg, &a1(qi(1)), qi(-3), &FockElement::vacuum()).unwrap();
        let mut want = FockElement::zero();
        want.add_term(FockBasisVector::new(vec![(0, 1), (0, 1)], a1(qi(1)), vec![]), rat(1, 2));
        want.add_term(FockBasisVector::new(vec![(0, 2)], a1(qi(1)), vec![]), rat(1, 2));
        assert_eq!(r, want);
        assert_eq!(binomial_int(2, 1), rint(2));
    }

    #[test]
    fn fermion_modes() {
        let cfg = LatticeConfig::super_ns(3, 1).unwrap();
        let vac = FockElement::vacuum();
        let f = fermion_mode(&cfg, q(-1, 2), &vac).unwrap();
        assert_eq!(fermion_mode(&cfg, q(1, 2), &f).unwrap(), vac);
        assert!(fermion_mode(&cfg, q(-1, 2), &f).unwrap().is_zero());
        let g = fermion_mode(&cfg, q(-3, 2), &vac).unwrap();
        assert_eq!(fermion_mode(&cfg, q(3, 2), &g).unwrap(), vac);
        // φ(x) as the field of φ(−1/2)1
        let phi = FockElement::basis(FockBasisVector::new(vec![], LatticeVector::ZERO, vec![1]));
        let w = FockElement::basis(FockBasisVector::new(vec![(0, 1)], a1(qi(1)), vec![5, 1]));
        for k in -3..3 {
            let r = q(2 * k + 1, 2);
            let n = r - q(1, 2);
            assert_eq!(mode(&cfg, &phi, n, &w).unwrap(), fermion_mode(&cfg, r, &w).unwrap());
        }
    }

    #[test]
    fn extended_truncation() {
        let cfg = LatticeConfig::triplet(3, 1).unwrap();
        let es = ExtendedSector::new(a1(q(1, 2)), a1(q(-1, 3)));
        let v = FockElement::exp(a1(q(-1, 3)));
        let top = FockElement::exp(a1(q(1, 2)));
        let img = mode_ext(&cfg, &v, qi(0), &top, Some(&es)).unwrap();
        assert_eq!(img, FockElement::exp(a1(q(1, 2) - q(1, 3))));
        assert!(mode_ext(&cfg, &v, qi(0), &img, Some(&es)).unwrap().is_zero());
    }
}
