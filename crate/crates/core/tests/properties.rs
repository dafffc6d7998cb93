use proptest::prelude::*;

use voalog_core::modes::heisenberg;
use voalog_core::rational::{big, q, qi, rat};
use voalog_core::{Case, FockBasisVector, FockElement, LatticeConfig, LatticeVector, Q64};

fn small_q() -> impl Strategy<Value = Q64> {
    (-12i64..=12, 1i64..=6).prop_map(|(n, d)| q(n, d))
}

fn vec2() -> impl Strategy<Value = LatticeVector> {
    (small_q(), small_q()).prop_map(|(a, b)| LatticeVector::new(a, b))
}

/// `3iγ + 3jδ` with `i ≡ j (mod 2)`.
fn root_point() -> impl Strategy<Value = LatticeVector> {
    (-4i64..=4, -4i64..=4).prop_map(|(i, j)| {
        let j = if (i - j).rem_euclid(2) == 0 { j } else { j + 1 };
        LatticeVector::new(qi(3 * i), qi(3 * j))
    })
}

/// Points with `a + b` even, where the cocycle is defined.
fn registered_point() -> impl Strategy<Value = LatticeVector> {
    (-9i64..=9, -9i64..=9).prop_map(|(a, b)| LatticeVector::new(qi(a), qi(b + (a + b).rem_euclid(2))))
}

fn affine_state() -> impl Strategy<Value = FockBasisVector> {
    (prop::collection::vec((0u8..2, 1u32..4), 0..4), root_point()).prop_map(|(bs, p)| FockBasisVector::new(bs, p, vec![]))
}

fn triplet_state() -> impl Strategy<Value = FockBasisVector> {
    (prop::collection::vec((Just(0u8), 1u32..4), 0..4), -3i64..=3, 0i64..2)
        .prop_map(|(bs, k, half)| FockBasisVector::new(bs, LatticeVector::rank1(qi(k) + q(half, 2)), vec![]))
}

proptest! {
    #[test]
    fn pairing_is_symmetric_and_bilinear(a in vec2(), b in vec2(), c in vec2(), s in small_q()) {
        let cfg = LatticeConfig::affine();
        prop_assert_eq!(cfg.pairing(&a, &b), cfg.pairing(&b, &a));
        prop_assert_eq!(cfg.pairing(&(a + c), &b), cfg.pairing(&a, &b) + cfg.pairing(&c, &b));
        prop_assert_eq!(cfg.pairing(&a.scale(s), &b), s * cfg.pairing(&a, &b));
        let t = LatticeConfig::triplet(3, 2).unwrap();
        let (x, y) = (LatticeVector::rank1(a.0[0]), LatticeVector::rank1(b.0[0]));
        prop_assert_eq!(t.pairing(&x, &y), a.0[0] * b.0[0] * qi(12));
    }

    #[test]
    fn cocycle_is_bimultiplicative(l in registered_point(), m in registered_point(), n in registered_point()) {
        let cfg = LatticeConfig::affine();
        let e = |x: &LatticeVector, y: &LatticeVector| cfg.cocycle_sign(x, y).unwrap();
        prop_assert_eq!(e(&(l + m), &n), e(&l, &n) * e(&m, &n));
        prop_assert_eq!(e(&l, &(m + n)), e(&l, &m) * e(&l, &n));
    }

    #[test]
    fn cocycle_commutator_is_the_pairing_sign(l in root_point(), m in root_point()) {
        let cfg = LatticeConfig::affine();
        let pair = cfg.pairing(&l, &m);
        prop_assert!(pair.is_integer());
        let sign = if pair.to_integer().rem_euclid(2) == 0 { 1 } else { -1 };
        prop_assert_eq!(cfg.cocycle_sign(&l, &m).unwrap() * cfg.cocycle_sign(&m, &l).unwrap(), sign);
    }

    #[test]
    fn heisenberg_modes_commute_to_the_pairing(w in affine_state(), g in 0usize..2, h in 0usize..2, m in -3i64..=3, n in -3i64..=3) {
        let cfg = LatticeConfig::affine();
        let w = FockElement::basis(w);
        let lhs = heisenberg(&cfg, g, m, &heisenberg(&cfg, h, n, &w)) - heisenberg(&cfg, h, n, &heisenberg(&cfg, g, m, &w));
        let want = if m + n == 0 {
            w.scaled(&(big(cfg.pairing(&cfg.generator(g), &cfg.generator(h))) * rat(m, 1)))
        } else {
            FockElement::zero()
        };
        prop_assert_eq!(lhs, want);
    }

    #[test]
    fn l0_is_the_weight(b in triplet_state(), a in affine_state()) {
        for (case, b) in [(Case::triplet(2, 1).unwrap(), b), (Case::affine(), a)] {
            let w = FockElement::basis(b.clone());
            prop_assert_eq!(case.virasoro(0, &w).unwrap(), w.scaled(&big(case.weight_of(&b))));
        }
    }

    #[test]
    fn elements_survive_json(terms in prop::collection::vec((triplet_state(), -20i64..20, 1i64..7), 0..5)) {
        let e: FockElement = terms.into_iter().map(|(b, n, d)| (b, rat(n, d))).collect();
        prop_assert_eq!(FockElement::from_json(&e.to_json()).unwrap(), e);
    }
}
