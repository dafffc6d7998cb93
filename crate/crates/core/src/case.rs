//! Per-case data: lattice, conformal vector, screening vectors, the shift of
//! the extended algebra, and graded bases of lattice sectors.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::{graded_component, FockBasisVector, FockElement};
use crate::lattice::{CaseKind, LatticeConfig, LatticeVector};
use crate::modes::{self, ExtendedSector};
use crate::rational::{big, q, qi, rat, Q64, Rational};

#[derive(Clone, Debug)]
pub struct Case {
    pub cfg: LatticeConfig,
    pub omega: FockElement,
    /// `ω = ½ Σ h(−1)h′(−1) + β(−2)` (+ fermion part), so `wt(e^λ) = ½⟨λ,λ⟩ − ⟨β,λ⟩`.
    pub beta: LatticeVector,
    pub central_charge: Rational,
    /// `Q` is the zero mode of this vector.
    pub q_vec: FockElement,
    /// `Q̃` is the zero mode of this vector; it is also the deformation vector.
    pub qt_vec: FockElement,
    /// Lattice point of `qt_vec`: the algebra `V ⊕ V_{shift+L}` is the extended algebra.
    pub shift: LatticeVector,
}

fn boson_term(bosons: Vec<(u8, u32)>, c: Rational) -> FockElement {
    FockElement::term(FockBasisVector::new(bosons, LatticeVector::ZERO, vec![]), c)
}

impl Case {
    pub fn triplet(p: i64, pprime: i64) -> Result<Case> {
        let cfg = LatticeConfig::triplet(p, pprime)?;
        let ppp = p * pprime;
        let omega = boson_term(vec![(0, 1), (0, 1)], rat(1, 4 * ppp)) + boson_term(vec![(0, 2)], rat(p - pprime, 2 * ppp));
        Ok(Case {
            cfg,
            omega,
            beta: LatticeVector::rank1(q(p - pprime, 2 * ppp)),
            central_charge: rat(1, 1) - rat(6 * (p - pprime) * (p - pprime), ppp),
            q_vec: FockElement::exp(LatticeVector::rank1(q(1, pprime))),
            qt_vec: FockElement::exp(LatticeVector::rank1(q(-1, p))),
            shift: LatticeVector::rank1(q(-1, p)),
        })
    }

    pub fn super_ns(p: i64, pprime: i64) -> Result<Case> {
        let cfg = LatticeConfig::super_ns(p, pprime)?;
        let ppp = p * pprime;
        let fermi = FockElement::term(FockBasisVector::new(vec![], LatticeVector::ZERO, vec![3, 1]), rat(1, 2));
        let omega = boson_term(vec![(0, 1), (0, 1)], rat(1, 2 * ppp)) + boson_term(vec![(0, 2)], rat(p - pprime, 2 * ppp)) + fermi;
        let d = p - pprime;
        Ok(Case {
            cfg,
            omega,
            beta: LatticeVector::rank1(q(d, 2 * ppp)),
            central_charge: rat(3, 2) * (rat(1, 1) - rat(2 * d * d, ppp)),
            q_vec: FockElement::basis(FockBasisVector::new(vec![], LatticeVector::rank1(q(1, pprime)), vec![1])),
            qt_vec: FockElement::basis(FockBasisVector::new(vec![], LatticeVector::rank1(q(-1, p)), vec![1])),
            shift: LatticeVector::rank1(q(-1, p)),
        })
    }

    pub fn affine() -> Case {
        let cfg = LatticeConfig::affine();
        let omega = boson_term(vec![(0, 1), (0, 1)], rat(3, 1))
            + boson_term(vec![(0, 2)], rat(-2, 1))
            + boson_term(vec![(1, 1), (1, 1)], rat(-3, 1));
        Case {
            cfg,
            omega,
            beta: LatticeVector::new(qi(-2), qi(0)),
            central_charge: rat(-6, 1),
            q_vec: FockElement::exp(LatticeVector::new(qi(-6), qi(0))),
            qt_vec: FockElement::exp(LatticeVector::new(qi(2), qi(0))),
            shift: LatticeVector::new(qi(2), qi(0)),
        }
    }

    pub fn kind(&self) -> CaseKind {
        self.cfg.kind
    }

    pub fn name(&self) -> String {
        match self.cfg.kind {
            CaseKind::Triplet { p, pprime } => format!("triplet(p={p}, p'={pprime})"),
            CaseKind::Super { p, pprime } => format!("super(p={p}, p'={pprime})"),
            CaseKind::Affine => "affine".into(),
        }
    }

    /// Conformal weight of `e^λ`.
    pub fn point_weight(&self, l: &LatticeVector) -> Q64 {
        self.cfg.pairing(l, l) / 2 - self.cfg.pairing(&self.beta, l)
    }

    pub fn weight_of(&self, b: &FockBasisVector) -> Q64 {
        b.oscillator_degree() + self.point_weight(&b.point)
    }

    /// Weight if `e` is homogeneous.
    pub fn homogeneous_weight(&self, e: &FockElement) -> Option<Q64> {
        let mut ws = e.iter().map(|(b, _)| self.weight_of(b));
        let w = ws.next()?;
        ws.all(|x| x == w).then_some(w)
    }

    /// Step between weights in one sector.
    pub fn weight_step(&self) -> Q64 {
        if self.cfg.is_super() {
            q(1, 2)
        } else {
            qi(1)
        }
    }

    pub fn mode(&self, u: &FockElement, n: Q64, w: &FockElement) -> Result<FockElement> {
        modes::mode(&self.cfg, u, n, w)
    }

    pub fn mode_ext(&self, u: &FockElement, n: Q64, w: &FockElement, es: Option<&ExtendedSector>) -> Result<FockElement> {
        modes::mode_ext(&self.cfg, u, n, w, es)
    }

    /// `L(n) = ω_{n+1}`.
    pub fn virasoro(&self, n: i64, w: &FockElement) -> Result<FockElement> {
        self.mode(&self.omega, qi(n + 1), w)
    }

    pub fn screening(&self, w: &FockElement, es: Option<&ExtendedSector>) -> Result<FockElement> {
        self.mode_ext(&self.q_vec, qi(0), w, es)
    }

    pub fn screening_tilde(&self, w: &FockElement, es: Option<&ExtendedSector>) -> Result<FockElement> {
        self.mode_ext(&self.qt_vec, qi(0), w, es)
    }

    /// The extended algebra itself, as a module over itself.
    pub fn algebra_sector(&self) -> ExtendedSector {
        ExtendedSector::new(LatticeVector::ZERO, self.shift)
    }

    /// Lattice points of the coset `rep + base` of weight `≤ wmax`; on the
    /// affine lattice only those with `δ`-coordinate `charge`.
    pub fn lattice_points(&self, rep: &LatticeVector, wmax: Q64, charge: Option<Q64>) -> Result<Vec<(LatticeVector, Q64)>> {
        let mut out = Vec::new();
        match self.cfg.kind {
            CaseKind::Affine => {
                let b = charge.ok_or_else(|| Error::Config("affine sectors need a charge".into()))?;
                let y = b - rep.0[1];
                if *y.denom() != 1 || y.to_integer().rem_euclid(3) != 0 {
                    return Ok(out);
                }
                let x0 = (-y.to_integer()).rem_euclid(6);
                // wt is convex in the γ-coordinate with minimum at −2
                let start = rep.0[0] + qi(x0);
                let k0 = ((qi(-2) - start) / 6).floor().to_integer();
                let at = |k: i64| LatticeVector::new(start + qi(6 * k), b);
                self.walk(k0, at, wmax, &mut out);
            }
            _ => {
                let g = self.cfg.gram[0][0];
                let bb = self.cfg.pairing(&self.beta, &self.cfg.generator(0));
                let c0 = rep.0[0];
                let k0 = (bb / g - c0).floor().to_integer();
                let at = |k: i64| LatticeVector::rank1(c0 + qi(k));
                self.walk(k0, at, wmax, &mut out);
            }
        }
        out.sort();
        Ok(out)
    }

    fn walk(&self, k0: i64, at: impl Fn(i64) -> LatticeVector, wmax: Q64, out: &mut Vec<(LatticeVector, Q64)>) {
        // the minimum lies between k0 and k0 + 1
        let mut k = k0;
        loop {
            let l = at(k);
            let w = self.point_weight(&l);
            if w > wmax {
                if k > k0 {
                    break;
                }
            } else {
                out.push((l, w));
            }
            k += 1;
        }
        k = k0 - 1;
        loop {
            let l = at(k);
            let w = self.point_weight(&l);
            if w > wmax {
                break;
            }
            out.push((l, w));
            k -= 1;
        }
    }

    /// Basis of the weight-`weight` component of the lattice sector through
    /// `rep` (restricted to `charge` on the affine lattice).
    pub fn graded_basis(&self, rep: &LatticeVector, weight: Q64, charge: Option<Q64>) -> Result<Vec<FockBasisVector>> {
        let pts = self.lattice_points(rep, weight, charge)?;
        Ok(graded_component(self.cfg.rank, &pts, weight, self.cfg.is_super()))
    }

    /// Basis of an extended sector `V_{b+L} ⊕ V_{b+s+L}` at one weight.
    pub fn extended_basis(&self, es: &ExtendedSector, weight: Q64, charge: Option<Q64>) -> Result<Vec<FockBasisVector>> {
        let mut v = self.graded_basis(&es.base, weight, charge)?;
        v.extend(self.graded_basis(&(es.base + es.shift), weight, charge)?);
        v.sort();
        v.dedup();
        Ok(v)
    }

    /// Weights `≤ wmax` carrying a nonzero component of the sector.
    pub fn weights_upto(&self, rep: &LatticeVector, wmax: Q64, charge: Option<Q64>) -> Result<Vec<Q64>> {
        let step = self.weight_step();
        let mut ws = Vec::new();
        for (_, w0) in self.lattice_points(rep, wmax, charge)? {
            let mut w = w0;
            while w <= wmax {
                ws.push(w);
                w += step;
            }
        }
        ws.sort();
        ws.dedup();
        Ok(ws)
    }

    /// Every basis vector of the sector with weight `≤ wmax`.
    pub fn basis_upto(&self, rep: &LatticeVector, wmax: Q64, charge: Option<Q64>) -> Result<Vec<FockBasisVector>> {
        let mut out = Vec::new();
        for w in self.weights_upto(rep, wmax, charge)? {
            out.extend(self.graded_basis(rep, w, charge)?);
        }
        Ok(out)
    }

    /// `true` when `v` acts through integral exponents on the sector of `rep`.
    pub fn aligned(&self, u: &LatticeVector, rep: &LatticeVector) -> bool {
        *self.cfg.pairing(u, rep).denom() == 1
    }

    pub fn weight_rational(&self, b: &FockBasisVector) -> Rational {
        big(self.weight_of(b))
    }

    pub fn is_zero_charge(&self, b: &FockBasisVector) -> bool {
        self.cfg.charge(&b.point).is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rint;

    fn a1(c: Q64) -> LatticeVector {
        LatticeVector::rank1(c)
    }

    #[test]
    fn point_weights() {
        for p in 2..6 {
            let c = Case::triplet(p, 1).unwrap();
            assert_eq!(c.point_weight(&a1(q(1, 2))), q(2 - p, 4));
            assert_eq!(c.point_weight(&a1(q(-1, 2))), q(3 * p - 2, 4));
            assert_eq!(c.point_weight(&a1(qi(-1))), qi(2 * p - 1));
            assert_eq!(c.point_weight(&a1(q(-1, p))), qi(1));
        }
        let a = Case::affine();
        assert_eq!(a.point_weight(&LatticeVector::new(qi(-3), qi(1))), q(-1, 3));
        let s = Case::super_ns(3, 1).unwrap();
        assert_eq!(s.point_weight(&a1(qi(1))), q(3 - 2, 2));
        assert_eq!(s.central_charge, rat(-5, 2));
    }

    #[test]
    fn l0_agrees_with_weight_formula() {
        let cases = [Case::triplet(2, 1).unwrap(), Case::triplet(3, 2).unwrap(), Case::affine(), Case::super_ns(3, 1).unwrap()];
        for c in &cases {
            let reps: Vec<LatticeVector> = match c.kind() {
                CaseKind::Affine => vec![LatticeVector::new(qi(-3), qi(1)), LatticeVector::ZERO],
                _ => vec![LatticeVector::ZERO, a1(q(1, 2)), c.shift],
            };
            for rep in reps {
                let charge = matches!(c.kind(), CaseKind::Affine).then_some(rep.0[1]);
                for b in c.basis_upto(&rep, qi(2), charge).unwrap() {
                    let e = FockElement::basis(b.clone());
                    assert_eq!(c.virasoro(0, &e).unwrap(), e.scaled(&c.weight_rational(&b)), "{} on {b}", c.name());
                }
            }
        }
    }

    #[test]
    fn virasoro_vacuum_data() {
        let c = Case::triplet(2, 1).unwrap();
        let vac = FockElement::vacuum();
        assert!(c.virasoro(0, &vac).unwrap().is_zero());
        assert_eq!(c.virasoro(-2, &vac).unwrap(), c.omega);
        assert_eq!(c.virasoro(2, &c.omega).unwrap(), vac.scaled(&rint(-1)));
        let a = Case::affine();
        assert_eq!(a.virasoro(2, &a.omega).unwrap(), vac.scaled(&rint(-3)));
    }

    #[test]
    fn top_component_of_twisted_sector() {
        let c = Case::triplet(2, 1).unwrap();
        let es = ExtendedSector::new(a1(q(1, 2)), c.shift);
        assert_eq!(c.extended_basis(&es, qi(0), None).unwrap().len(), 2);
        assert_eq!(c.graded_basis(&LatticeVector::ZERO, qi(0), None).unwrap(), vec![FockBasisVector::vacuum()]);
    }
}
