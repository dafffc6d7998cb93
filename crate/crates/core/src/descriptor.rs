//! Serializable recipes for operator modes, evaluated against a [`Case`].
//!
//! Rationals are written as `"num/den"` strings, lattice points as lists of
//! such strings and states in the JSON form of [`FockElement`].

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::case::Case;
use crate::deformation::Deformation;
use crate::error::{Error, Result};
use crate::fock::{FockBasisVector, FockElement};
use crate::lattice::LatticeVector;
use crate::linalg::GradedMatrix;
use crate::modes::{self, ExtendedSector};
use crate::rational::{parse_q, q, qi, Q64};
use crate::screening;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeDescriptor {
    /// `α_gen(n)`.
    Heisenberg { gen: u8, n: i64 },
    /// `e^μ_r`.
    Exponential { point: Vec<String>, r: String },
    /// `u_n` for an arbitrary state `u`.
    General { u: Value, n: String },
    /// `L(n)`.
    Virasoro { n: i64 },
    /// `inner` inside the module `V_{base+L} ⊕ V_{base+shift+L}` of the
    /// case's extended algebra.
    Extended { inner: Box<ModeDescriptor>, base: Vec<String> },
    /// `ã_n` for the case's standard deformation.
    Deformed { a: Value, n: String },
    /// `L̃(n) = L(n) + v_n`.
    DeformedVirasoro { n: i64 },
    /// `Q` or `Q̃`.
    Screening { tilde: bool },
    /// The triplet operator `G`.
    GOp,
    /// `G′(r)` of the NS sector.
    NsG { r: String },
}

fn rational(s: &str) -> Result<Q64> {
    parse_q(s).ok_or_else(|| Error::Config(format!("not a rational: {s:?}")))
}

/// Lattice point from one or two coordinate strings.
pub fn parse_point(coords: &[String]) -> Result<LatticeVector> {
    match coords {
        [a] => Ok(LatticeVector::rank1(rational(a)?)),
        [a, b] => Ok(LatticeVector::new(rational(a)?, rational(b)?)),
        _ => Err(Error::Config(format!("a lattice point has one or two coordinates, got {}", coords.len()))),
    }
}

impl ModeDescriptor {
    pub fn from_json(v: &Value) -> Result<Self> {
        serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("bad mode descriptor: {e}")))
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("descriptor serializes")
    }

    /// Weight change of the mode on homogeneous states, when it is fixed.
    pub fn degree(&self, case: &Case) -> Result<Option<Q64>> {
        Ok(match self {
            ModeDescriptor::Heisenberg { n, .. } | ModeDescriptor::Virasoro { n } | ModeDescriptor::DeformedVirasoro { n } => Some(qi(-n)),
            ModeDescriptor::Exponential { point, r } => {
                let mu = parse_point(point)?;
                Some(case.point_weight(&mu) - rational(r)? - qi(1))
            }
            ModeDescriptor::General { u, n } | ModeDescriptor::Deformed { a: u, n } => {
                let n = rational(n)?;
                case.homogeneous_weight(&FockElement::from_json(u)?).map(|w| w - n - qi(1))
            }
            ModeDescriptor::Extended { inner, .. } => inner.degree(case)?,
            ModeDescriptor::Screening { tilde } => {
                let v = if *tilde { &case.qt_vec } else { &case.q_vec };
                case.homogeneous_weight(v).map(|w| w - qi(1))
            }
            ModeDescriptor::GOp => None,
            ModeDescriptor::NsG { r } => Some(-rational(r)?),
        })
    }

    pub fn apply(&self, case: &Case, w: &FockElement) -> Result<FockElement> {
        self.apply_in(case, w, None)
    }

    fn apply_in(&self, case: &Case, w: &FockElement, es: Option<&ExtendedSector>) -> Result<FockElement> {
        match self {
            ModeDescriptor::Heisenberg { gen, n } => {
                if *gen as usize >= case.cfg.rank {
                    return Err(Error::Config(format!("generator {gen} out of range")));
                }
                Ok(modes::heisenberg(&case.cfg, *gen as usize, *n, w))
            }
            ModeDescriptor::Exponential { point, r } => {
                case.mode_ext(&FockElement::exp(parse_point(point)?), rational(r)?, w, es)
            }
            ModeDescriptor::General { u, n } => case.mode_ext(&FockElement::from_json(u)?, rational(n)?, w, es),
            ModeDescriptor::Virasoro { n } => case.virasoro(*n, w),
            ModeDescriptor::Extended { inner, base } => {
                let es = ExtendedSector::new(parse_point(base)?, case.shift);
                inner.apply_in(case, w, Some(&es))
            }
            ModeDescriptor::Deformed { a, n } => {
                Deformation::standard(case).deformed_mode(case, &FockElement::from_json(a)?, rational(n)?, w, es)
            }
            ModeDescriptor::DeformedVirasoro { n } => Deformation::standard(case).virasoro(case, *n, w, es),
            ModeDescriptor::Screening { tilde: false } => case.screening(w, es),
            ModeDescriptor::Screening { tilde: true } => case.screening_tilde(w, es),
            ModeDescriptor::GOp => screening::g_apply(case, w, es),
            ModeDescriptor::NsG { r } => {
                let r = rational(r)?;
                if *r.denom() != 2 || !case.cfg.is_super() {
                    return Err(Error::Config("G′(r) needs the super case and a half-odd r".into()));
                }
                let (p, pp) = case.cfg.p_pprime().expect("super case has p, p′");
                let tau = FockElement::basis(FockBasisVector::new(vec![(0, 1)], LatticeVector::ZERO, vec![1]))
                    + FockElement::term(FockBasisVector::new(vec![], LatticeVector::ZERO, vec![3]), crate::rational::rat(p - pp, 1));
                case.mode(&tau, r + q(1, 2), w)
            }
        }
    }

    /// Matrix of the mode on the weight-`weight` component of the sector with
    /// representative `rep` (or of the extended sector `es`). The codomain is
    /// the component the mode lands in when its degree is fixed, and the span
    /// of the image terms otherwise.
    pub fn matrix(&self, case: &Case, rep: &LatticeVector, weight: Q64, charge: Option<Q64>) -> Result<GradedMatrix> {
        let domain = case.graded_basis(rep, weight, charge)?;
        self.matrix_on(case, weight, domain, |w| case.graded_basis(rep, w, charge))
    }

    pub fn matrix_ext(&self, case: &Case, es: &ExtendedSector, weight: Q64, charge: Option<Q64>) -> Result<GradedMatrix> {
        let domain = case.extended_basis(es, weight, charge)?;
        self.matrix_on(case, weight, domain, |w| case.extended_basis(es, w, charge))
    }

    fn matrix_on(
        &self,
        case: &Case,
        weight: Q64,
        domain: Vec<FockBasisVector>,
        component: impl Fn(Q64) -> Result<Vec<FockBasisVector>>,
    ) -> Result<GradedMatrix> {
        // the target component of a fixed-degree mode, padded with image
        // terms that leave it (e.g. into the shifted summand)
        let mut cod = match self.degree(case)? {
            Some(d) => component(weight + d).unwrap_or_default(),
            None => Vec::new(),
        };
        let fixed = cod.len();
        for b in &domain {
            for (t, _) in self.apply(case, &FockElement::basis(b.clone()))?.iter() {
                if !cod.contains(t) {
                    cod.push(t.clone());
                }
            }
        }
        cod[fixed..].sort();
        let codomain = cod;
        GradedMatrix::build(weight, domain, Some(codomain), |w| self.apply(case, w))
    }
}
