//! Free-field realization of affine `sl₂` at level `−4/3` on the rank-two
//! lattice, its deformation by `e^{2γ}` and the logarithmic module generated
//! by `e^{−3γ+δ}`.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde_json::{json, Value};

use crate::case::Case;
use crate::deformation::{Deformation, DeformedField, LogSeries};
use crate::error::{Error, Result};
use crate::fock::{FockBasisVector, FockElement};
use crate::lattice::LatticeVector;
use crate::modes::ExtendedSector;
use crate::rational::{fmt_big, fmt_q, q, qi, rat, Q64, Rational};
use crate::structure::{
    generate_submodule_in, jordan_structure, quotient_jordan, JordanReport, ModeFamily, SubmoduleSpan,
};

pub const CURRENTS: [&str; 3] = ["e", "h", "f"];

fn lv(a: i64, b: i64) -> LatticeVector {
    LatticeVector::new(qi(a), qi(b))
}

#[derive(Clone, Debug)]
pub struct AffineRealization {
    pub case: Case,
    pub e: FockElement,
    pub h: FockElement,
    pub f: FockElement,
    pub level: Rational,
    pub deformation: Deformation,
    /// `𝒱 = V_D ⊕ V_{D+2γ}`.
    pub algebra: ExtendedSector,
    /// `ℳ = V_{D−3γ+δ} ⊕ V_{D−γ+δ}`.
    pub module: ExtendedSector,
}

impl Default for AffineRealization {
    fn default() -> Self {
        Self::new()
    }
}

impl AffineRealization {
    pub fn new() -> Self {
        let case = Case::affine();
        let e = FockElement::exp(lv(3, -3));
        let h = FockElement::basis(FockBasisVector::new(vec![(1, 1)], LatticeVector::ZERO, vec![]))
            .scaled(&rat(4, 1));
        let pt = lv(-3, 3);
        let f = FockElement::term(FockBasisVector::new(vec![(0, 1), (0, 1)], pt, vec![]), rat(-4, 1))
            + FockElement::term(FockBasisVector::new(vec![(0, 2)], pt, vec![]), rat(2, 3));
        let deformation = Deformation::standard(&case);
        let algebra = case.algebra_sector();
        let module = ExtendedSector::new(lv(-3, 1), case.shift);
        AffineRealization { case, e, h, f, level: rat(-4, 3), deformation, algebra, module }
    }

    /// `f` recomputed as `−(2/9) Q e^{3γ+3δ}`.
    pub fn f_from_screening(&self) -> Result<FockElement> {
        Ok(self.case.screening(&FockElement::exp(lv(3, 3)), None)?.scaled(&rat(-2, 9)))
    }

    pub fn current(&self, name: &str) -> Option<&FockElement> {
        match name {
            "e" => Some(&self.e),
            "h" => Some(&self.h),
            "f" => Some(&self.f),
            _ => None,
        }
    }

    fn current_or_err(&self, name: &str) -> Result<&FockElement> {
        self.current(name).ok_or_else(|| Error::Config(format!("unknown current {name}")))
    }

    /// The field `x̃(z)` as a deformed field.
    pub fn field(&self, name: &str, deformed: bool) -> Result<DeformedField> {
        let x = self.current_or_err(name)?;
        if deformed {
            self.deformation.field(&self.case, x)
        } else {
            Ok(DeformedField::plain(x))
        }
    }

    /// `x(n) w = x_n w` (deformed with `deformed = true`).
    pub fn mode(&self, name: &str, n: i64, w: &FockElement, deformed: bool, es: Option<&ExtendedSector>) -> Result<FockElement> {
        self.field(name, deformed)?.mode(&self.case, qi(n), w, es)
    }

    /// `L(n)` or `L̃(n)`.
    pub fn virasoro(&self, n: i64, w: &FockElement, deformed: bool, es: Option<&ExtendedSector>) -> Result<FockElement> {
        if deformed {
            self.deformation.virasoro(&self.case, n, w, es)
        } else {
            self.case.virasoro(n, w)
        }
    }

    /// Checks the four current relations at `(m, n)` on `w`. Returns the
    /// first failing relation with the difference of both sides.
    pub fn bracket_check(
        &self,
        m: i64,
        n: i64,
        w: &FockElement,
        deformed: bool,
        es: Option<&ExtendedSector>,
    ) -> Result<Option<(String, FockElement)>> {
        ModeTable::new(self, deformed, es, m.min(n).min(m + n))?.bracket_check(m, n, w)
    }

    /// Basis of `es` up to weight `wmax`, restricted to the given charges.
    pub fn basis(&self, es: &ExtendedSector, wmax: Q64, charges: &[i64]) -> Result<Vec<FockBasisVector>> {
        let mut out = Vec::new();
        for &c in charges {
            for rep in [es.base, es.base + es.shift] {
                out.extend(self.case.basis_upto(&rep, wmax, Some(qi(c)))?);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// The deformed modes `x(−1), x(0), x(1)` on `es`. Every other mode is a
    /// bracket with `h(±1)`, reached through states of the same charge whose
    /// weight lies between start and end, so closures under these need no
    /// margin and respect charge windows.
    pub fn generators(&self, es: ExtendedSector) -> Result<Vec<ModeFamily>> {
        let mut out = Vec::new();
        for (x, n) in [("e", -1), ("e", 0), ("e", 1), ("f", -1), ("f", 0), ("f", 1), ("h", -1), ("h", 1)] {
            let field = self.field(x, true)?;
            let case = self.case.clone();
            out.push(ModeFamily::single(format!("{x}({n})"), qi(-n), move |w| field.mode(&case, qi(n), w, Some(&es))));
        }
        Ok(out)
    }

    /// `U(ŝl₂)·gens` in `ℳ̃` under the deformed action, inside a charge window.
    pub fn closure(&self, gens: &[FockElement], charges: &[i64], cutoff: Q64) -> Result<SubmoduleSpan> {
        let alphabet = self.generators(self.module)?;
        self.closure_with(gens, &alphabet, charges, cutoff, qi(0))
    }

    pub fn closure_with(
        &self,
        gens: &[FockElement],
        alphabet: &[ModeFamily],
        charges: &[i64],
        cutoff: Q64,
        margin: Q64,
    ) -> Result<SubmoduleSpan> {
        let cfg = self.case.cfg.clone();
        let window: Vec<Q64> = charges.iter().map(|c| qi(*c)).collect();
        let within = move |b: &FockBasisVector| window.contains(&cfg.charge(&b.point));
        generate_submodule_in(&self.case, gens, alphabet, cutoff, margin, None, &within)
    }

    /// Coefficient `ν` in `f̃(1) e^{−3γ+δ} = ν e^{−4γ+4δ}`, if the image has that shape.
    pub fn nu(&self) -> Result<Option<Rational>> {
        let img = self.mode("f", 1, &FockElement::exp(lv(-3, 1)), true, Some(&self.module))?;
        let target = FockBasisVector::exp(lv(-4, 4));
        let c = img.coeff(&target);
        Ok((img == FockElement::term(target, c.clone()) && !c.is_zero()).then_some(c))
    }

    /// `Ỹ(e^{−γ+δ}, x) e^{−2γ}`, powers up to `emax`.
    pub fn intertwiner(&self, emax: Q64) -> Result<LogSeries> {
        self.deformation.log_intertwiner(
            &self.case,
            &FockElement::exp(lv(-1, 1)),
            &FockElement::exp(lv(-2, 0)),
            emax,
            Some(&self.module),
            None,
        )
    }
}

/// Current modes on one space. For each basis vector every mode from
/// `nmin` upwards is computed in one pass and kept.
pub struct ModeTable<'a> {
    a: &'a AffineRealization,
    fields: Vec<DeformedField>,
    es: Option<ExtendedSector>,
    nmin: i64,
    memo: HashMap<(usize, FockBasisVector), BTreeMap<Q64, FockElement>>,
}

impl<'a> ModeTable<'a> {
    /// Table for modes `x(n)` with `n ≥ nmin`.
    pub fn new(a: &'a AffineRealization, deformed: bool, es: Option<&ExtendedSector>, nmin: i64) -> Result<Self> {
        let fields = CURRENTS.iter().map(|x| a.field(x, deformed)).collect::<Result<_>>()?;
        Ok(ModeTable { a, fields, es: es.copied(), nmin, memo: HashMap::new() })
    }

    pub fn mode(&mut self, name: &str, n: i64, w: &FockElement) -> Result<FockElement> {
        let i = CURRENTS.iter().position(|x| *x == name).ok_or_else(|| Error::Config(format!("unknown current {name}")))?;
        if n < self.nmin {
            return self.fields[i].mode(&self.a.case, qi(n), w, self.es.as_ref());
        }
        let mut out = FockElement::zero();
        for (b, c) in w.iter() {
            let key = (i, b.clone());
            if !self.memo.contains_key(&key) {
                let all = self.fields[i].modes_from(&self.a.case, qi(self.nmin), &FockElement::basis(b.clone()), self.es.as_ref())?;
                self.memo.insert(key.clone(), all);
            }
            if let Some(img) = self.memo[&key].get(&qi(n)) {
                out.add_scaled(img, c);
            }
        }
        Ok(out)
    }

    /// The four current relations at `(m, n)` on `w`; the first failing one
    /// with the difference of both sides.
    pub fn bracket_check(&mut self, m: i64, n: i64, w: &FockElement) -> Result<Option<(String, FockElement)>> {
        let k = self.a.level.clone();
        let br = |t: &mut Self, x: &str, y: &str| -> Result<FockElement> {
            let xy = t.mode(y, n, w)?;
            let yx = t.mode(x, m, w)?;
            Ok(t.mode(x, m, &xy)? - t.mode(y, n, &yx)?)
        };
        let central = |c: Rational| if m + n == 0 { w.scaled(&c) } else { FockElement::zero() };
        let checks = [
            ("[e(m),f(n)] = h(m+n) + m k", br(self, "e", "f")?, self.mode("h", m + n, w)? + central(&k * rat(m, 1))),
            ("[h(m),e(n)] = 2 e(m+n)", br(self, "h", "e")?, self.mode("e", m + n, w)?.scaled(&rat(2, 1))),
            ("[h(m),f(n)] = -2 f(m+n)", br(self, "h", "f")?, self.mode("f", m + n, w)?.scaled(&rat(-2, 1))),
            ("[h(m),h(n)] = 2 k m", br(self, "h", "h")?, central(&k * rat(2 * m, 1))),
        ];
        for (name, lhs, rhs) in checks {
            let diff = lhs - rhs;
            if !diff.is_zero() {
                return Ok(Some((name.to_string(), diff)));
            }
        }
        Ok(None)
    }
}

/// The module generated by `e^{−3γ+δ}` and its submodule generated by
/// `e^{−4γ+4δ}`, within a charge window.
#[derive(Clone, Debug)]
pub struct RProbe {
    pub cutoff: Q64,
    pub charges: Vec<i64>,
    pub r: SubmoduleSpan,
    pub e1: SubmoduleSpan,
    /// `L̃(0)` on the weight `−1/3` component of `R`.
    pub top: JordanReport,
    pub contains_sub_top: bool,
    pub contains_lowest: bool,
    /// `L̃(0)` on `R/E₁`, one report per weight `≤ cutoff`.
    pub quotient: Vec<JordanReport>,
    /// Weights `< −4/3` where `E₁` is nonzero, in the window [`DEEP_CHARGES`].
    pub e1_below: Vec<Q64>,
}

impl RProbe {
    pub fn quotient_semisimple(&self) -> bool {
        self.quotient.iter().all(JordanReport::is_semisimple)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "cutoff": fmt_q(self.cutoff),
            "charges": self.charges,
            "r": self.r.to_json(),
            "e1": self.e1.to_json(),
            "top": self.top.to_json(),
            "contains_e^{-gamma+delta}": self.contains_sub_top,
            "contains_e^{-4gamma+4delta}": self.contains_lowest,
            "quotient_semisimple": self.quotient_semisimple(),
            "e1_weights_below_generator": self.e1_below.iter().map(|w| fmt_q(*w)).collect::<Vec<_>>(),
        })
    }
}

/// Charges of the generator, of `ẽ(0)` applied to it and of `e^{−4γ+4δ}`.
pub const DEFAULT_CHARGES: [i64; 3] = [-2, 1, 4];

/// Window used to follow the submodule of `e^{−4γ+4δ}` downwards.
pub const DEEP_CHARGES: [i64; 4] = [4, 7, 10, 13];

pub fn rminusthird_probe(a: &AffineRealization, cutoff: Q64, charges: &[i64]) -> Result<RProbe> {
    let gen = FockElement::exp(lv(-3, 1));
    let low = FockElement::exp(lv(-4, 4));
    let top_w = q(-1, 3);
    if cutoff < top_w {
        return Err(Error::CutoffTooSmall { cutoff, weight: top_w });
    }
    let r = a.closure(&[gen], charges, cutoff)?;
    let e1 = a.closure(&[low.clone()], charges, cutoff)?;
    let l0 = |v: &FockElement| a.virasoro(0, v, true, Some(&a.module));
    let top = jordan_structure(top_w, &r.component(top_w), l0)?;
    let mut quotient = Vec::new();
    for (w, s) in &r.components {
        if *w > cutoff {
            continue;
        }
        quotient.push(quotient_jordan(*w, s, &e1.component(*w), l0)?);
    }
    // lowering runs through ever higher charge, so look in a window above
    let low_w = a.case.point_weight(&lv(-4, 4));
    let deep = a.closure(&[low.clone()], &DEEP_CHARGES, low_w)?;
    let e1_below = deep.dims().into_iter().filter(|(w, d)| *w < low_w && *d > 0).map(|(w, _)| w).collect();
    Ok(RProbe {
        cutoff,
        charges: charges.to_vec(),
        contains_sub_top: r.contains(&a.case, &FockElement::exp(lv(-1, 1))),
        contains_lowest: r.contains(&a.case, &low),
        r,
        e1,
        top,
        quotient,
        e1_below,
    })
}

/// `{exponent: coefficient}` of a deformed field, rendered for reports.
pub fn field_to_json(f: &DeformedField) -> Value {
    let parts: BTreeMap<String, Value> = f.parts.iter().map(|(e, v)| (fmt_q(*e), v.to_json())).collect();
    json!(parts)
}

pub fn rational_json(c: &Rational) -> Value {
    json!(fmt_big(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(a: i64, b: i64) -> FockElement {
        FockElement::exp(lv(a, b))
    }

    #[test]
    fn currents_have_weight_one() {
        let a = AffineRealization::new();
        for x in CURRENTS {
            assert_eq!(a.case.homogeneous_weight(a.current(x).unwrap()), Some(qi(1)), "{x}");
            assert!(a.case.screening_tilde(a.current(x).unwrap(), None).unwrap().is_zero(), "{x}");
        }
        assert_eq!(a.f_from_screening().unwrap(), a.f);
    }

    #[test]
    fn deformed_f_has_two_corrections() {
        let a = AffineRealization::new();
        let fd = a.field("f", true).unwrap();
        let pt = lv(-1, 3);
        let g1 = FockElement::term(FockBasisVector::new(vec![(0, 1)], pt, vec![]), rat(4, 3));
        assert_eq!(fd.parts.len(), 3);
        assert_eq!(fd.parts[&qi(0)], a.f);
        assert_eq!(fd.parts[&qi(-1)], g1);
        assert_eq!(fd.parts[&qi(-2)], ex(-1, 3).scaled(&rat(1, 3)));
        assert!(a.field("e", true).unwrap().is_plain());
        assert!(a.field("h", true).unwrap().is_plain());
    }

    #[test]
    fn highest_weight_relations() {
        let a = AffineRealization::new();
        let m = Some(&a.module);
        let g = ex(-3, 1);
        for n in 0..3 {
            assert!(a.mode("e", n + 1, &g, true, m).unwrap().is_zero());
            assert!(a.mode("f", n + 2, &g, true, m).unwrap().is_zero());
        }
        assert_eq!(a.mode("e", 0, &g, true, m).unwrap(), ex(0, -2).scaled(&rat(-1, 1)));
        assert!(a.nu().unwrap().is_some());
    }

    #[test]
    fn deformed_zero_mode_on_the_generator() {
        let a = AffineRealization::new();
        let m = Some(&a.module);
        let got = a.virasoro(0, &ex(-3, 1), true, m).unwrap();
        assert_eq!(got, ex(-3, 1).scaled(&rat(-1, 3)) + ex(-1, 1));
        assert_eq!(a.virasoro(0, &ex(-1, 1), true, m).unwrap(), ex(-1, 1).scaled(&rat(-1, 3)));
    }

    #[test]
    fn level_and_zero_mode_samples() {
        let a = AffineRealization::new();
        let vac = FockElement::vacuum();
        let hh = a.mode("h", 1, &a.mode("h", -1, &vac, false, None).unwrap(), false, None).unwrap();
        assert_eq!(hh, vac.scaled(&rat(-8, 3)));
        assert_eq!(a.mode("e", 0, &a.f, false, None).unwrap(), a.h);
        assert_eq!(a.mode("h", 0, &a.e, false, None).unwrap(), a.e.scaled(&rat(2, 1)));
    }

    #[test]
    fn logarithmic_module_at_low_weight() {
        let a = AffineRealization::new();
        let p = rminusthird_probe(&a, qi(1), &DEFAULT_CHARGES).unwrap();
        assert_eq!(p.top.max_block(), 2);
        assert!(p.top.blocks.iter().all(|j| j.eigenvalue == rat(-1, 3)));
        assert!(p.contains_sub_top && p.contains_lowest);
        assert!(p.quotient_semisimple());
        assert!(!p.e1_below.is_empty());
        assert!(p.r.lowest_weight().unwrap() <= q(-4, 3));
    }

    #[test]
    fn cutoff_below_the_generator() {
        let a = AffineRealization::new();
        assert!(matches!(rminusthird_probe(&a, qi(-1), &DEFAULT_CHARGES), Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn intertwiner_is_nonzero() {
        let a = AffineRealization::new();
        let s = a.intertwiner(qi(2)).unwrap();
        assert!(!s.is_zero());
        assert!(s.terms.keys().all(|(e, _)| (*e - q(1, 3)).is_integer()));
    }

    #[test]
    fn brackets_on_low_states() {
        let a = AffineRealization::new();
        for (es, deformed) in [(a.algebra, false), (a.algebra, true), (a.module, true)] {
            let basis = a.basis(&es, qi(1), &[-3, 0, 1, 3]).unwrap();
            for b in basis {
                let w = FockElement::basis(b);
                for m in -1..=1 {
                    for n in -1..=1 {
                        let r = a.bracket_check(m, n, &w, deformed, Some(&es)).unwrap();
                        assert!(r.is_none(), "{r:?} at {m},{n} on {w}");
                    }
                }
            }
        }
    }
}
