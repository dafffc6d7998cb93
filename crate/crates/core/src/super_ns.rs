//! Neveu–Schwarz sector of the super case.
//!
//! The odd generator carries an irrational normalisation, so the engine works
//! with `τ′ = α(−1)φ(−1/2) + (p − p′)φ(−3/2)`, i.e. `√(pp′)` times the
//! superconformal vector. Its modes `G′(r) = τ′_{r+1/2}` satisfy the NS
//! relations with every bracket constant multiplied by `pp′`.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::case::Case;
use crate::deformation::Deformation;
use crate::error::{Error, Result};
use crate::fock::{FockBasisVector, FockElement};
use crate::lattice::{CaseKind, LatticeVector};
use crate::modes::ExtendedSector;
use crate::rational::{big, fmt_q, q, qi, rat, Q64, Rational};
use crate::structure::{basis_span, jordan_structure, JordanReport};

/// Half-odd mode labels sampled by the bracket checks.
pub const SAMPLE_R: [(i64, i64); 4] = [(-3, 2), (-1, 2), (1, 2), (3, 2)];

#[derive(Clone, Debug)]
pub struct NsRealization {
    pub case: Case,
    /// `τ′ = √(pp′) τ`.
    pub tau: FockElement,
    /// `pp′`, the square of the rescaling.
    pub scale: Rational,
}

fn half_odd(r: Q64) -> bool {
    *r.denom() == 2
}

impl NsRealization {
    pub fn new(p: i64, pprime: i64) -> Result<Self> {
        let case = Case::super_ns(p, pprime)?;
        let tau = FockElement::basis(FockBasisVector::new(vec![(0, 1)], LatticeVector::ZERO, vec![1]))
            + FockElement::term(FockBasisVector::new(vec![], LatticeVector::ZERO, vec![3]), rat(p - pprime, 1));
        Ok(NsRealization { case, tau, scale: rat(p * pprime, 1) })
    }

    pub fn p_pprime(&self) -> (i64, i64) {
        match self.case.kind() {
            CaseKind::Super { p, pprime } => (p, pprime),
            _ => unreachable!(),
        }
    }

    pub fn central_charge(&self) -> &Rational {
        &self.case.central_charge
    }

    /// `G′(r) w`, `r` half-odd.
    pub fn g(&self, r: Q64, w: &FockElement) -> Result<FockElement> {
        if !half_odd(r) {
            return Err(Error::Config(format!("G mode {} is not half-odd", fmt_q(r))));
        }
        self.case.mode(&self.tau, r + q(1, 2), w)
    }

    pub fn l(&self, m: i64, w: &FockElement) -> Result<FockElement> {
        self.case.virasoro(m, w)
    }

    /// Weight of `e^{lα}`.
    pub fn lattice_weight(&self, l: i64) -> Q64 {
        self.case.point_weight(&LatticeVector::rank1(qi(l)))
    }

    /// Basis of the lattice sector up to weight `wmax`.
    pub fn basis(&self, wmax: Q64) -> Result<Vec<FockElement>> {
        Ok(self.case.basis_upto(&LatticeVector::ZERO, wmax, None)?.into_iter().map(FockElement::basis).collect())
    }

    /// `{G′(r), G′(s)}w = pp′(2L(r+s) + (c/3)(r² − 1/4)δ_{r+s,0})w` and
    /// `[L(m), G′(r)]w = (m/2 − r)G′(m+r)w` on `w`. Returns the first failing
    /// relation with the difference of both sides.
    pub fn bracket_check(&self, w: &FockElement, rs: &[Q64], ms: &[i64]) -> Result<Option<(String, FockElement)>> {
        let c = self.central_charge();
        for &r in rs {
            let gw = self.g(r, w)?;
            for &s in rs {
                let mut d = self.g(r, &self.g(s, w)?)? + self.g(s, &gw)?;
                let n = r + s;
                if n.is_integer() {
                    d.add_scaled(&self.l(n.to_integer(), w)?, &(rat(-2, 1) * &self.scale));
                    if n.is_zero() {
                        let rr = big(r);
                        let k = c / rat(3, 1) * (&rr * &rr - rat(1, 4)) * &self.scale;
                        d.add_scaled(w, &-k);
                    }
                }
                if !d.is_zero() {
                    return Ok(Some((format!("{{G({}), G({})}}", fmt_q(r), fmt_q(s)), d)));
                }
            }
            for &m in ms {
                let mut d = self.l(m, &gw)? - self.g(r, &self.l(m, w)?)?;
                let k = rat(m, 2) - big(r);
                d.add_scaled(&self.g(qi(m) + r, w)?, &-k);
                if !d.is_zero() {
                    return Ok(Some((format!("[L({m}), G({})]", fmt_q(r)), d)));
                }
            }
        }
        Ok(None)
    }

    /// Screening `Q` (`tilde = false`) or `Q̃` on `w`.
    pub fn screening(&self, tilde: bool, w: &FockElement) -> Result<FockElement> {
        if tilde {
            self.case.screening_tilde(w, None)
        } else {
            self.case.screening(w, None)
        }
    }

    /// `[S, G′(r)]w` and `[S, L(m)]w` for both screenings `S`. Returns the
    /// first nonzero commutator.
    pub fn screening_commutes(&self, w: &FockElement, rs: &[Q64], ms: &[i64]) -> Result<Option<(String, FockElement)>> {
        for tilde in [false, true] {
            let name = if tilde { "Q~" } else { "Q" };
            let sw = self.screening(tilde, w)?;
            for &r in rs {
                let d = self.screening(tilde, &self.g(r, w)?)? - self.g(r, &sw)?;
                if !d.is_zero() {
                    return Ok(Some((format!("[{name}, G({})]", fmt_q(r)), d)));
                }
            }
            for &m in ms {
                let d = self.screening(tilde, &self.l(m, w)?)? - self.l(m, &sw)?;
                if !d.is_zero() {
                    return Ok(Some((format!("[{name}, L({m})]"), d)));
                }
            }
        }
        Ok(None)
    }

    /// Sector `{0, −α/p}` of the extended algebra.
    pub fn sector(&self) -> ExtendedSector {
        self.case.algebra_sector()
    }

    /// Weights of the extended sector up to `wmax`.
    pub fn sector_weights(&self, wmax: Q64) -> Result<Vec<Q64>> {
        let es = self.sector();
        let mut ws = BTreeSet::new();
        for rep in [es.base, es.base + es.shift] {
            ws.extend(self.case.weights_upto(&rep, wmax, None)?);
        }
        Ok(ws.into_iter().collect())
    }

    /// Jordan structure of `L̃(0) = L(0) + v₀` (or of `L(0)` when
    /// `deformed` is false) on each weight space of the extended sector.
    pub fn deformation_scan(&self, wmax: Q64, deformed: bool) -> Result<DeformationScan> {
        let es = self.sector();
        let d = Deformation::standard(&self.case);
        let mut reports = Vec::new();
        let mut v0_square_zero = true;
        for w in self.sector_weights(wmax)? {
            let basis = self.case.extended_basis(&es, w, None)?;
            for b in &basis {
                let e = FockElement::basis(b.clone());
                let once = d.v_mode(&self.case, 0, &e, Some(&es))?;
                v0_square_zero &= d.v_mode(&self.case, 0, &once, Some(&es))?.is_zero();
            }
            let span = basis_span(&basis);
            let rep = jordan_structure(w, &span, |x| {
                if deformed {
                    d.virasoro(&self.case, 0, x, Some(&es))
                } else {
                    self.l(0, x)
                }
            })?;
            reports.push(rep);
        }
        Ok(DeformationScan { reports, v0_square_zero })
    }
}

#[derive(Clone, Debug)]
pub struct DeformationScan {
    pub reports: Vec<JordanReport>,
    pub v0_square_zero: bool,
}

impl DeformationScan {
    /// Lowest weight carrying a Jordan block of size at least two.
    pub fn first_block(&self) -> Option<&JordanReport> {
        self.reports.iter().find(|r| r.max_block() >= 2)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "v0_square_zero": self.v0_square_zero,
            "first_block": self.first_block().map(|r| r.to_json()),
            "dims": self.reports.iter().map(|r| json!([fmt_q(r.weight), r.dim])).collect::<Vec<_>>(),
        })
    }
}

/// Closed formula `(3/2)(1 − 2(p − p′)²/(pp′))`.
pub fn ns_central_charge(p: i64, pprime: i64) -> Rational {
    let d = p - pprime;
    rat(3, 2) * (Rational::one() - rat(2 * d * d, p * pprime))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::fermion_mode;

    fn rs() -> Vec<Q64> {
        SAMPLE_R.iter().map(|&(a, b)| q(a, b)).collect()
    }

    #[test]
    fn central_charges() {
        assert_eq!(ns_central_charge(3, 1), rat(-5, 2));
        for (p, pp) in [(3, 1), (5, 1), (5, 3)] {
            let ns = NsRealization::new(p, pp).unwrap();
            assert_eq!(ns.central_charge(), &ns_central_charge(p, pp));
        }
    }

    #[test]
    fn fermion_anticommutators() {
        let ns = NsRealization::new(3, 1).unwrap();
        let vac = FockElement::vacuum();
        for a in [-5, -3, -1, 1, 3, 5] {
            for b in [-5, -3, -1, 1, 3, 5] {
                let (r, s) = (q(a, 2), q(b, 2));
                let ab = fermion_mode(&ns.case.cfg, r, &fermion_mode(&ns.case.cfg, s, &vac).unwrap()).unwrap();
                let ba = fermion_mode(&ns.case.cfg, s, &fermion_mode(&ns.case.cfg, r, &vac).unwrap()).unwrap();
                let want = if a + b == 0 { vac.clone() } else { FockElement::zero() };
                assert_eq!(ab + ba, want);
            }
        }
    }

    #[test]
    fn lattice_weight_formula() {
        for (p, pp) in [(3, 1), (5, 1), (5, 3)] {
            let ns = NsRealization::new(p, pp).unwrap();
            for l in -2..=2 {
                assert_eq!(ns.lattice_weight(l), q(l * l * p * pp - l * (p - pp), 2));
            }
        }
    }

    #[test]
    fn g_three_halves_on_vacuum() {
        let ns = NsRealization::new(3, 1).unwrap();
        let vac = FockElement::vacuum();
        let v = ns.g(q(3, 2), &ns.g(q(-3, 2), &vac).unwrap()).unwrap();
        // pp′ · 2c/3
        let want = ns.scale.clone() * ns.central_charge() * rat(2, 3);
        assert_eq!(v, vac.scaled(&want));
    }

    #[test]
    fn brackets_low_weight() {
        let ns = NsRealization::new(3, 1).unwrap();
        for w in ns.basis(qi(2)).unwrap() {
            assert_eq!(ns.bracket_check(&w, &rs(), &[-2, -1, 0, 1, 2]).unwrap(), None);
        }
    }

    #[test]
    fn screenings_kill_generators() {
        let ns = NsRealization::new(3, 1).unwrap();
        for tilde in [false, true] {
            assert!(ns.screening(tilde, &ns.tau).unwrap().is_zero());
            assert!(ns.screening(tilde, &ns.case.omega).unwrap().is_zero());
            assert!(ns.screening(tilde, &FockElement::vacuum()).unwrap().is_zero());
        }
        for w in ns.basis(q(3, 2)).unwrap() {
            assert_eq!(ns.screening_commutes(&w, &rs(), &[-1, 0, 1]).unwrap(), None);
        }
    }

    #[test]
    fn deformation_vector_is_valid() {
        let ns = NsRealization::new(3, 1).unwrap();
        let d = Deformation::standard(&ns.case);
        let es = ns.sector();
        let ws: Vec<FockElement> = ns.case.extended_basis(&es, qi(1), None).unwrap().into_iter().map(FockElement::basis).collect();
        assert_eq!(d.validate(&ns.case, &ws, &[-1, 0, 1, 2], Some(&es)).unwrap(), None);
    }

    #[test]
    fn deformed_zero_mode_has_a_block() {
        let ns = NsRealization::new(3, 1).unwrap();
        let plain = ns.deformation_scan(qi(2), false).unwrap();
        assert!(plain.first_block().is_none());
        let scan = ns.deformation_scan(qi(2), true).unwrap();
        assert!(scan.v0_square_zero);
        let first = scan.first_block().expect("no Jordan block up to weight 2");
        assert_eq!(first.max_block(), 2);
        assert_eq!(first.weight, q(1, 2));
        let (v, n) = &first.witnesses[0];
        assert!(!n.is_zero());
        let es = ns.sector();
        assert_eq!(n, &ns.case.screening_tilde(v, Some(&es)).unwrap());
    }
}
