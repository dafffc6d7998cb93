//! Screening charges, the triplet generators `F, H, E`, the operator
//! `G = e^α_0 + ν_p e^{α−α/p}_{−1}` and kernels of screenings.

use crate::case::Case;
use crate::deformation::Deformation;
use crate::error::{Error, Result};
use crate::fock::{FockBasisVector, FockElement};
use crate::lattice::{CaseKind, LatticeVector};
use crate::linalg::{GradedMatrix, Matrix};
use crate::modes::ExtendedSector;
use crate::rational::{q, qi, rat, Q64, Rational};

/// `ω`, `F = e^{−α}`, `H = QF`, `E = Q²F` and `ν_p = p/(p−1)`.
#[derive(Clone, Debug)]
pub struct TripletGenerators {
    pub p: i64,
    pub omega: FockElement,
    pub f: FockElement,
    pub h: FockElement,
    pub e: FockElement,
    pub nu_p: Rational,
}

impl TripletGenerators {
    pub fn by_name(&self, name: &str) -> Option<&FockElement> {
        match name {
            "omega" => Some(&self.omega),
            "F" => Some(&self.f),
            "H" => Some(&self.h),
            "E" => Some(&self.e),
            _ => None,
        }
    }
}

fn triplet_p(case: &Case) -> Result<i64> {
    match case.kind() {
        CaseKind::Triplet { p, pprime: 1 } => Ok(p),
        _ => Err(Error::InvalidParameters(format!("{} is not a triplet case with p' = 1", case.name()))),
    }
}

pub fn triplet_generators(case: &Case) -> Result<TripletGenerators> {
    let p = triplet_p(case)?;
    let f = FockElement::exp(LatticeVector::rank1(qi(-1)));
    let h = case.screening(&f, None)?;
    let e = case.screening(&h, None)?;
    Ok(TripletGenerators { p, omega: case.omega.clone(), f, h, e, nu_p: rat(p, p - 1) })
}

/// `[Q, Q̃] w`.
pub fn screening_commutator(case: &Case, w: &FockElement, es: Option<&ExtendedSector>) -> Result<FockElement> {
    let a = case.screening(&case.screening_tilde(w, es)?, es)?;
    let b = case.screening_tilde(&case.screening(w, es)?, es)?;
    Ok(a - b)
}

/// The module `𝒱_1 = V_{L+α/2} ⊕ V_{L+α/2−α/p}` of the triplet extended algebra.
pub fn twisted_sector(case: &Case) -> ExtendedSector {
    ExtendedSector::new(LatticeVector::rank1(q(1, 2)), case.shift)
}

/// `G w = e^α_0 w + ν_p e^{α−α/p}_{−1} w`.
pub fn g_apply(case: &Case, w: &FockElement, es: Option<&ExtendedSector>) -> Result<FockElement> {
    let p = triplet_p(case)?;
    let ea = FockElement::exp(LatticeVector::rank1(qi(1)));
    let eb = FockElement::exp(LatticeVector::rank1(qi(1) - q(1, p)));
    let mut out = case.mode_ext(&ea, qi(0), w, es)?;
    out.add_scaled(&case.mode_ext(&eb, qi(-1), w, es)?, &rat(p, p - 1));
    Ok(out)
}

/// `X̃(n) w = X̃_{n+2p−2} w`, the deformed mode in degree convention.
pub fn shifted_generator(case: &Case, x: &FockElement, n: i64, w: &FockElement, es: Option<&ExtendedSector>) -> Result<FockElement> {
    let p = triplet_p(case)?;
    Deformation::standard(case).deformed_mode(case, x, qi(n + 2 * p - 2), w, es)
}

/// Matrix of `op` from one component to the span of the image terms.
pub fn image_matrix(
    weight: Q64,
    domain: Vec<FockBasisVector>,
    mut op: impl FnMut(&FockElement) -> Result<FockElement>,
) -> Result<GradedMatrix> {
    let mut images = Vec::with_capacity(domain.len());
    let mut codomain = std::collections::BTreeSet::new();
    for b in &domain {
        let img = op(&FockElement::basis(b.clone()))?;
        codomain.extend(img.iter().map(|(t, _)| t.clone()));
        images.push(img);
    }
    let mut it = images.into_iter();
    GradedMatrix::build(weight, domain, Some(codomain.into_iter().collect()), |_| Ok(it.next().unwrap_or_default()))
}

/// Kernel of `op` on one component.
pub fn kernel_filter(
    weight: Q64,
    domain: Vec<FockBasisVector>,
    op: impl FnMut(&FockElement) -> Result<FockElement>,
) -> Result<Vec<FockElement>> {
    Ok(image_matrix(weight, domain, op)?.kernel())
}

/// Common kernel of several operators on one component.
pub fn common_kernel(
    weight: Q64,
    domain: Vec<FockBasisVector>,
    ops: &mut [&mut dyn FnMut(&FockElement) -> Result<FockElement>],
) -> Result<Vec<FockElement>> {
    let mut rows = Vec::new();
    for op in ops.iter_mut() {
        let m = image_matrix(weight, domain.clone(), |w| op(w))?.matrix;
        rows.extend((0..m.rows).map(|i| (0..m.cols).map(|j| m[(i, j)].clone()).collect::<Vec<_>>()));
    }
    if rows.is_empty() {
        return Ok(domain.into_iter().map(FockElement::basis).collect());
    }
    let ker = Matrix::from_rows(rows).kernel();
    Ok(ker.into_iter().map(|v| domain.iter().cloned().zip(v).collect()).collect())
}

/// `Ker Q ∩ Ker Q̃` on the weight component of the vacuum sector.
pub fn double_kernel(case: &Case, weight: Q64) -> Result<Vec<FockElement>> {
    let dom = case.graded_basis(&LatticeVector::ZERO, weight, None)?;
    common_kernel(weight, dom, &mut [&mut |w| case.screening(w, None), &mut |w| case.screening_tilde(w, None)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{binomial_int, rint};

    fn pt(x: Q64) -> FockElement {
        FockElement::exp(LatticeVector::rank1(x))
    }

    #[test]
    fn generators_live_in_the_kernel() {
        for p in 2..=3 {
            let c = Case::triplet(p, 1).unwrap();
            let g = triplet_generators(&c).unwrap();
            for x in [&g.f, &g.h, &g.e] {
                assert!(!x.is_zero());
                assert_eq!(c.homogeneous_weight(x), Some(qi(2 * p - 1)));
                assert!(c.screening_tilde(x, None).unwrap().is_zero());
            }
            assert!(c.screening(&g.e, None).unwrap().is_zero());
            assert!(c.screening(&FockElement::vacuum(), None).unwrap().is_zero());
        }
    }

    #[test]
    fn g_on_vacuum() {
        for p in 2..=4 {
            let c = Case::triplet(p, 1).unwrap();
            let g = g_apply(&c, &FockElement::vacuum(), Some(&c.algebra_sector())).unwrap();
            assert_eq!(g, pt(qi(1) - q(1, p)).scaled(&rat(p, p - 1)));
        }
    }

    #[test]
    fn deformed_h_zero_mode_constant() {
        for p in 2..=3 {
            let c = Case::triplet(p, 1).unwrap();
            let es = twisted_sector(&c);
            let g = triplet_generators(&c).unwrap();
            let w = pt(q(-1, 2));
            let got = shifted_generator(&c, &g.h, 0, &w, Some(&es)).unwrap();
            let k = binomial_int(3 * p - 2, 2 * p - 1);
            assert_eq!(got, w.scaled(&-k));
        }
    }

    #[test]
    fn screening_kernel_contains_omega() {
        let c = Case::triplet(2, 1).unwrap();
        let ker = double_kernel(&c, qi(2)).unwrap();
        let mut span = crate::linalg::SparseSpan::new();
        for k in &ker {
            span.insert(k);
        }
        assert!(span.contains(&c.omega));
        let dom = c.graded_basis(&LatticeVector::ZERO, qi(2), None).unwrap();
        let m = image_matrix(qi(2), dom, |w| c.screening(w, None)).unwrap();
        let col: Vec<_> = m.domain.iter().map(|b| c.omega.coeff(b)).collect();
        for i in 0..m.codomain.len() {
            let s: Rational = (0..m.domain.len()).map(|j| &m.matrix[(i, j)] * &col[j]).sum();
            assert_eq!(s, rint(0));
        }
    }
}
