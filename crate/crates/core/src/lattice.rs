//! Lattice data: generators, the rational Gram form, cosets of the base
//! lattice and the sign cocycle used by every exponential vertex operator.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, gcd, is_integer, q, qi, Q64};

/// Rational coordinates over the configured generators (`α`, or `γ, δ`).
/// Rank-one configurations keep the second slot at zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVector(pub [Q64; 2]);

impl LatticeVector {
    pub const ZERO: LatticeVector = LatticeVector([Q64::new_raw(0, 1), Q64::new_raw(0, 1)]);

    pub fn new(a: Q64, b: Q64) -> Self {
        LatticeVector([a, b])
    }

    /// `c · α` in a rank-one configuration.
    pub fn rank1(c: Q64) -> Self {
        LatticeVector([c, qi(0)])
    }

    pub fn coeffs(&self) -> &[Q64; 2] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0[0] == qi(0) && self.0[1] == qi(0)
    }

    pub fn scale(&self, c: Q64) -> Self {
        LatticeVector([self.0[0] * c, self.0[1] * c])
    }
}

impl std::ops::Add for LatticeVector {
    type Output = LatticeVector;
    fn add(self, o: Self) -> Self {
        LatticeVector([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl std::ops::Sub for LatticeVector {
    type Output = LatticeVector;
    fn sub(self, o: Self) -> Self {
        LatticeVector([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

impl std::ops::Neg for LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> Self {
        LatticeVector([-self.0[0], -self.0[1]])
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", fmt_q(self.0[0]), fmt_q(self.0[1]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum CaseKind {
    /// `⟨α, α⟩ = 2pp′`; `p′ = 1` is the triplet algebra proper.
    Triplet { p: i64, pprime: i64 },
    /// `⟨α, α⟩ = pp′`, tensored with one free fermion.
    Super { p: i64, pprime: i64 },
    /// `⟨γ, γ⟩ = −⟨δ, δ⟩ = 1/6`.
    Affine,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeConfig {
    pub kind: CaseKind,
    pub rank: usize,
    pub gram: [[Q64; 2]; 2],
    pub names: Vec<&'static str>,
    /// Basis of the base lattice (`L = ℤα`, or `D`).
    pub base: Vec<LatticeVector>,
}

impl LatticeConfig {
    pub fn triplet(p: i64, pprime: i64) -> Result<Self> {
        if p < 2 || pprime < 1 || p == pprime || gcd(p, pprime) != 1 {
            return Err(Error::InvalidParameters(format!(
                "need p >= 2, p' >= 1 coprime and distinct (got p={p}, p'={pprime})"
            )));
        }
        Ok(LatticeConfig {
            kind: CaseKind::Triplet { p, pprime },
            rank: 1,
            gram: [[qi(2 * p * pprime), qi(0)], [qi(0), qi(0)]],
            names: vec!["alpha"],
            base: vec![LatticeVector::rank1(qi(1))],
        })
    }

    pub fn super_ns(p: i64, pprime: i64) -> Result<Self> {
        if p < 2 || pprime < 1 || p <= pprime || (p - pprime) % 2 != 0 {
            return Err(Error::InvalidParameters(format!(
                "need p > p' >= 1 with p - p' even (got p={p}, p'={pprime})"
            )));
        }
        if gcd(p, (p - pprime) / 2) != 1 {
            return Err(Error::InvalidParameters(format!(
                "need gcd(p, (p-p')/2) = 1 (got p={p}, p'={pprime})"
            )));
        }
        if p % 2 == 0 {
            return Err(Error::InvalidParameters(format!(
                "the odd-lattice parity assignment needs p, p' odd (got p={p}, p'={pprime})"
            )));
        }
        Ok(LatticeConfig {
            kind: CaseKind::Super { p, pprime },
            rank: 1,
            gram: [[qi(p * pprime), qi(0)], [qi(0), qi(0)]],
            names: vec!["alpha"],
            base: vec![LatticeVector::rank1(qi(1))],
        })
    }

    pub fn affine() -> Self {
        LatticeConfig {
            kind: CaseKind::Affine,
            rank: 2,
            gram: [[q(1, 6), qi(0)], [qi(0), q(-1, 6)]],
            names: vec!["gamma", "delta"],
            base: vec![
                LatticeVector::new(qi(3), qi(3)),
                LatticeVector::new(qi(3), qi(-3)),
            ],
        }
    }

    pub fn is_super(&self) -> bool {
        matches!(self.kind, CaseKind::Super { .. })
    }

    /// `(p, p′)` for the rank-one cases.
    pub fn p_pprime(&self) -> Option<(i64, i64)> {
        match self.kind {
            CaseKind::Triplet { p, pprime } | CaseKind::Super { p, pprime } => Some((p, pprime)),
            CaseKind::Affine => None,
        }
    }

    /// Generator vector with index `g` (`α`, or `γ`/`δ`).
    pub fn generator(&self, g: usize) -> LatticeVector {
        let mut c = [qi(0), qi(0)];
        c[g] = qi(1);
        LatticeVector(c)
    }

    pub fn pairing(&self, a: &LatticeVector, b: &LatticeVector) -> Q64 {
        let mut acc = qi(0);
        for i in 0..self.rank {
            for j in 0..self.rank {
                acc += a.0[i] * self.gram[i][j] * b.0[j];
            }
        }
        acc
    }

    /// `⟨g, λ⟩` for the generator with index `g`.
    pub fn pairing_gen(&self, g: usize, b: &LatticeVector) -> Q64 {
        (0..self.rank).map(|j| self.gram[g][j] * b.0[j]).sum()
    }

    /// Sign `ε(λ, μ)` multiplying `e^λ_r e^μ`.
    ///
    /// Rank one: identically `+1`. Affine: bimultiplicative on the group
    /// `ℤ(γ+δ) + ℤ(γ−δ)`, `ε(aγ+bδ, cγ+dδ) = (−1)^{a(c+d)/2}`. On the ordered
    /// basis `(3γ+3δ, 3γ−3δ)` of `D` this is `+1` in order and `(−1)^3` out
    /// of order, and `ε(λ, μ)/ε(μ, λ) = (−1)^{⟨λ, μ⟩}` whenever the pairing is
    /// an integer.
    pub fn cocycle_sign(&self, lambda: &LatticeVector, mu: &LatticeVector) -> Result<i8> {
        match self.kind {
            CaseKind::Triplet { .. } | CaseKind::Super { .. } => Ok(1),
            CaseKind::Affine => {
                let (a, b) = self.registered_coords(lambda)?;
                let (c, d) = self.registered_coords(mu)?;
                let _ = b;
                let e = a * ((c + d) / 2);
                Ok(if e.rem_euclid(2) == 0 { 1 } else { -1 })
            }
        }
    }

    fn registered_coords(&self, v: &LatticeVector) -> Result<(i64, i64)> {
        let [a, b] = v.0;
        if !is_integer(a) || !is_integer(b) || (a.to_integer() + b.to_integer()).rem_euclid(2) != 0 {
            return Err(Error::UnregisteredVector(v.to_string()));
        }
        Ok((a.to_integer(), b.to_integer()))
    }

    /// Coordinates of `v` in the base-lattice basis.
    pub fn base_coords(&self, v: &LatticeVector) -> [Q64; 2] {
        match self.rank {
            1 => [v.0[0] / self.base[0].0[0], qi(0)],
            _ => {
                let [b0, b1] = [self.base[0].0, self.base[1].0];
                let det = b0[0] * b1[1] - b1[0] * b0[1];
                let x = (v.0[0] * b1[1] - b1[0] * v.0[1]) / det;
                let y = (b0[0] * v.0[1] - v.0[0] * b0[1]) / det;
                [x, y]
            }
        }
    }

    pub fn in_base_lattice(&self, v: &LatticeVector) -> bool {
        self.base_coords(v)[..self.rank].iter().all(|c| is_integer(*c))
    }

    pub fn sector(&self, v: &LatticeVector) -> Sector {
        let c = self.base_coords(v);
        let mut rep = LatticeVector::ZERO;
        for i in 0..self.rank {
            let frac = c[i] - c[i].floor();
            rep = rep + self.base[i].scale(frac);
        }
        Sector { rep }
    }

    /// Parity of `e^λ`: always even except in the super case, where it is
    /// `⟨λ, α⟩ mod 2` (this makes `e^{α/p′}` and `e^{−α/p}` odd).
    pub fn parity(&self, v: &LatticeVector) -> Result<bool> {
        match self.kind {
            CaseKind::Super { .. } => {
                let x = self.pairing(v, &self.generator(0));
                if !is_integer(x) {
                    return Err(Error::InvalidParameters(format!(
                        "parity undefined for {v}: <v, alpha> = {} is not integral",
                        fmt_q(x)
                    )));
                }
                Ok(x.to_integer().rem_euclid(2) == 1)
            }
            _ => Ok(false),
        }
    }

    /// Extra grading label used to keep components finite on the indefinite
    /// affine lattice: the `δ`-coordinate of the lattice point. Zero otherwise.
    pub fn charge(&self, v: &LatticeVector) -> Q64 {
        match self.kind {
            CaseKind::Affine => v.0[1],
            _ => qi(0),
        }
    }
}

/// Coset of the base lattice, stored by its canonical representative
/// (fractional base coordinates in `[0, 1)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sector {
    pub rep: LatticeVector,
}

impl Sector {
    pub fn contains(&self, cfg: &LatticeConfig, v: &LatticeVector) -> bool {
        cfg.in_base_lattice(&(*v - self.rep))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(c: Q64) -> LatticeVector {
        LatticeVector::rank1(c)
    }

    #[test]
    fn triplet_pairings() {
        let cfg = LatticeConfig::triplet(2, 1).unwrap();
        assert_eq!(cfg.pairing(&a(qi(1)), &a(qi(1))), qi(4));
        for p in 2..6 {
            let cfg = LatticeConfig::triplet(p, 1).unwrap();
            assert_eq!(cfg.pairing(&a(q(1, 2)), &a(q(-1, p))), qi(-1));
        }
        assert_eq!(cfg.cocycle_sign(&a(q(1, 2)), &a(qi(-1))).unwrap(), 1);
    }

    #[test]
    fn affine_form_and_cocycle() {
        let cfg = LatticeConfig::affine();
        let g = cfg.generator(0);
        let d = cfg.generator(1);
        assert_eq!(cfg.pairing(&g, &d), qi(0));
        assert_eq!(cfg.pairing(&g, &g), q(1, 6));
        let d1 = LatticeVector::new(qi(3), qi(3));
        let d2 = LatticeVector::new(qi(3), qi(-3));
        assert_eq!(cfg.cocycle_sign(&d1, &d2).unwrap(), 1);
        assert_eq!(cfg.cocycle_sign(&d2, &d1).unwrap(), -1);
        assert_eq!(cfg.cocycle_sign(&LatticeVector::ZERO, &d1).unwrap(), 1);
        assert!(matches!(
            cfg.cocycle_sign(&g, &d1),
            Err(Error::UnregisteredVector(_))
        ));
    }

    #[test]
    fn bad_parameters() {
        assert!(LatticeConfig::triplet(1, 1).is_err());
        assert!(LatticeConfig::triplet(3, 3).is_err());
        assert!(LatticeConfig::super_ns(3, 2).is_err());
        assert!(LatticeConfig::super_ns(4, 2).is_err());
        assert!(LatticeConfig::super_ns(5, 3).is_ok());
    }

    #[test]
    fn sectors() {
        let cfg = LatticeConfig::affine();
        let v = LatticeVector::new(qi(-3), qi(1));
        let s = cfg.sector(&v);
        assert!(s.contains(&cfg, &(v + cfg.base[0].scale(qi(-2)))));
        assert!(!s.contains(&cfg, &LatticeVector::new(qi(-1), qi(1))));
        let t = LatticeConfig::triplet(3, 1).unwrap();
        assert_eq!(t.sector(&a(q(-1, 2))).rep, a(q(1, 2)));
    }
}
