//! Randomized properties of the normal-ordered arithmetic: ring axioms,
//! commutation relations, action compatibility (the master oracle tying the
//! product to its semantics), degree additivity, and the two-sidedness
//! identities of the Rabinowitsch generator.

mod common;

use std::sync::Arc;

use rand::Rng;

use common::{random_operator, random_polyx, rng};
use wclose_core::poly::MultiPoly;
use wclose_core::ratfun::RatFun;
use wclose_core::scalar::BaseField;
use wclose_core::weyl::{
    apply_scalar, multiply, AlgebraSignature, DerivTarget, PolyX, WeylElement,
};

fn sig_xy() -> Arc<AlgebraSignature> {
    AlgebraSignature::weyl_poly(BaseField::Rationals, &["x", "y"], 1).unwrap()
}

fn sig_xy_localized(seed: u64) -> Arc<AlgebraSignature> {
    let sig = sig_xy();
    let f = random_polyx(&sig, &mut rng(seed), 3, 2);
    sig.with_localization("T", f).unwrap()
}

#[test]
fn associativity_without_t() {
    let sig = sig_xy();
    let mut r = rng(11);
    for _ in 0..500 {
        let a = random_operator(&sig, &mut r, 2, 2);
        let b = random_operator(&sig, &mut r, 2, 2);
        let c = random_operator(&sig, &mut r, 2, 2);
        let left = multiply(&multiply(&a, &b).unwrap(), &c).unwrap();
        let right = multiply(&a, &multiply(&b, &c).unwrap()).unwrap();
        assert_eq!(left, right);
    }
}

#[test]
fn associativity_with_t() {
    let mut r = rng(12);
    for round in 0..25 {
        let sig = sig_xy_localized(1000 + round);
        for _ in 0..20 {
            let a = random_operator(&sig, &mut r, 2, 2);
            let b = random_operator(&sig, &mut r, 2, 2);
            let c = random_operator(&sig, &mut r, 2, 2);
            let left = multiply(&multiply(&a, &b).unwrap(), &c).unwrap();
            let right = multiply(&a, &multiply(&b, &c).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }
}

#[test]
fn distributivity_and_bilinearity() {
    let sig = sig_xy();
    let mut r = rng(13);
    for _ in 0..300 {
        let a = random_operator(&sig, &mut r, 2, 2);
        let b = random_operator(&sig, &mut r, 2, 2);
        let c = random_operator(&sig, &mut r, 2, 2);
        let left = multiply(&a, &b.add(&c)).unwrap();
        let right = multiply(&a, &b).unwrap().add(&multiply(&a, &c).unwrap());
        assert_eq!(left, right);
        let k = sig.coef_field().from_i64(r.gen_range(-3i64..=3));
        let ls = multiply(&a.scale(&k), &b).unwrap();
        let rs = multiply(&a, &b).unwrap().scale(&k);
        assert_eq!(ls, rs);
    }
}

#[test]
fn canonical_commutators() {
    // [Dv, v] = 1 and [Dv, w] = 0 for w != v, for every applicable pair
    let sig = AlgebraSignature::mixed(
        BaseField::Rationals,
        vec!["s".into(), "t".into()],
        vec!["x".into(), "y".into()],
        1,
    )
    .unwrap();
    let one = WeylElement::one(&sig);
    let vars: Vec<WeylElement> = vec![
        WeylElement::rational_var(&sig, 0),
        WeylElement::rational_var(&sig, 1),
        WeylElement::poly_var(&sig, 0),
        WeylElement::poly_var(&sig, 1),
    ];
    let derivs: Vec<WeylElement> = vec![
        WeylElement::deriv(&sig, DerivTarget::Rational(0)).unwrap(),
        WeylElement::deriv(&sig, DerivTarget::Rational(1)).unwrap(),
        WeylElement::deriv(&sig, DerivTarget::Poly(0)).unwrap(),
        WeylElement::deriv(&sig, DerivTarget::Poly(1)).unwrap(),
    ];
    for (i, d) in derivs.iter().enumerate() {
        for (j, v) in vars.iter().enumerate() {
            let comm = multiply(d, v).unwrap().sub(&multiply(v, d).unwrap());
            if i == j {
                assert_eq!(comm, one);
            } else {
                assert!(comm.is_zero());
            }
        }
    }
}

#[test]
fn action_compatibility_master_oracle() {
    // act(P*Q, g) = act(P, act(Q, g)) ties the product to its semantics
    let sig = sig_xy();
    let full = sig.full_function_ring();
    let mut r = rng(14);
    let denominators = [
        {
            let x = MultiPoly::var(&full, 0);
            let y = MultiPoly::var(&full, 1);
            x.add(&y).add(&MultiPoly::from_i64(&full, 1))
        },
        {
            let x = MultiPoly::var(&full, 0);
            let y = MultiPoly::var(&full, 1);
            x.pow(2).sub(&y.pow(3))
        },
    ];
    for round in 0..120 {
        let p = random_operator(&sig, &mut r, 2, 2);
        let q = random_operator(&sig, &mut r, 2, 2);
        let den = &denominators[round % denominators.len()];
        let num = MultiPoly::var(&full, round % 2).add(&MultiPoly::from_i64(&full, 2));
        let g = RatFun::new(num, den.clone()).unwrap();
        let lhs = apply_scalar(&multiply(&p, &q).unwrap(), &g).unwrap();
        let rhs = apply_scalar(&p, &apply_scalar(&q, &g).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn action_compatibility_with_t() {
    // with T acting as multiplication by 1/f
    let mut r = rng(15);
    for round in 0..40 {
        let sig = sig_xy_localized(2000 + round);
        let full = sig.full_function_ring();
        let f_rf = {
            // reconstruct f as a rational function to build a pole-free g
            let fw = sig.localization().unwrap().f.to_weyl(&sig);
            apply_scalar(&fw, &RatFun::one(&full)).unwrap()
        };
        let g = RatFun::one(&full)
            .div(&f_rf)
            .unwrap_or_else(|_| RatFun::one(&full));
        let p = random_operator(&sig, &mut r, 2, 1);
        let q = random_operator(&sig, &mut r, 2, 1);
        let lhs = apply_scalar(&multiply(&p, &q).unwrap(), &g).unwrap();
        let rhs = apply_scalar(&p, &apply_scalar(&q, &g).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn commutation_rule_replay_through_action() {
    // Dv T = T Dv - f_v T^2, checked as operators and on test functions
    let mut r = rng(16);
    for round in 0..100 {
        let sig = sig_xy();
        let f = random_polyx(&sig, &mut r, 3, 2);
        let sig_t = sig.with_localization("T", f.clone()).unwrap();
        let full = sig_t.full_function_ring();
        let t = WeylElement::t_var(&sig_t).unwrap();
        for (slot, target) in [(0usize, DerivTarget::Poly(0)), (1, DerivTarget::Poly(1))] {
            let d = WeylElement::deriv(&sig_t, target).unwrap();
            let lhs = multiply(&d, &t).unwrap();
            let f_deriv = sig_t.localization().unwrap().f_derivs[slot].clone();
            let rhs = multiply(&t, &d).unwrap().sub(&multiply(
                &f_deriv.to_weyl(&sig_t),
                &multiply(&t, &t).unwrap(),
            )
            .unwrap());
            assert_eq!(lhs, rhs);
            // replay on a test function with poles only along f
            let num = MultiPoly::var(&full, round % 2).add(&MultiPoly::from_i64(&full, 1));
            let g = RatFun::new(num, MultiPoly::one(&full)).unwrap();
            let a = apply_scalar(&lhs, &g).unwrap();
            let b = apply_scalar(&rhs, &g).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn degree_additivity_t_free() {
    let sig = sig_xy();
    let mut r = rng(17);
    for _ in 0..300 {
        let p = random_operator(&sig, &mut r, 2, 2);
        let q = random_operator(&sig, &mut r, 2, 2);
        if p.is_zero() || q.is_zero() {
            continue;
        }
        let prod = multiply(&p, &q).unwrap();
        assert_eq!(
            prod.total_degree().unwrap(),
            p.total_degree().unwrap() + q.total_degree().unwrap()
        );
    }
}

#[test]
fn rabinowitsch_two_sidedness_identities() {
    // Dv (fT - 1) = (fT - 1)(Dv - T f_v) and
    // (fT - 1) Dv = (Dv + T f_v)(fT - 1), for 20 random f and each variable
    let mut r = rng(18);
    for round in 0..20 {
        let base = sig_xy();
        let f = random_polyx(&base, &mut r, 3, 2);
        let sig = base.with_localization("T", f.clone()).unwrap();
        let t = WeylElement::t_var(&sig).unwrap();
        let fw = f.to_weyl(&sig);
        let ft1 = multiply(&fw, &t).unwrap().sub(&WeylElement::one(&sig));
        for (slot, target) in [(0usize, DerivTarget::Poly(0)), (1, DerivTarget::Poly(1))] {
            let d = WeylElement::deriv(&sig, target).unwrap();
            let tfv = multiply(
                &t,
                &sig.localization().unwrap().f_derivs[slot].to_weyl(&sig),
            )
            .unwrap();
            let lhs1 = multiply(&d, &ft1).unwrap();
            let rhs1 = multiply(&ft1, &d.sub(&tfv)).unwrap();
            assert_eq!(lhs1, rhs1, "left identity failed in round {round}");
            let lhs2 = multiply(&ft1, &d).unwrap();
            let rhs2 = multiply(&d.add(&tfv), &ft1).unwrap();
            assert_eq!(lhs2, rhs2, "right identity failed in round {round}");
        }
    }
}

#[test]
fn mixed_signature_two_sidedness() {
    // same identities with a rational variable present
    let base = AlgebraSignature::mixed(
        BaseField::Rationals,
        vec!["t".into()],
        vec!["x".into()],
        1,
    )
    .unwrap();
    let mut r = rng(19);
    for _ in 0..5 {
        let f = random_polyx(&base, &mut r, 2, 2);
        let sig = base.with_localization("Tloc", f.clone()).unwrap();
        let tv = WeylElement::t_var(&sig).unwrap();
        let fw = f.to_weyl(&sig);
        let ft1 = multiply(&fw, &tv).unwrap().sub(&WeylElement::one(&sig));
        for (k, target) in [(0usize, DerivTarget::Poly(0)), (1, DerivTarget::Rational(0))] {
            let d = WeylElement::deriv(&sig, target).unwrap();
            let tfv = multiply(
                &tv,
                &sig.localization().unwrap().f_derivs[k].to_weyl(&sig),
            )
            .unwrap();
            assert_eq!(
                multiply(&d, &ft1).unwrap(),
                multiply(&ft1, &d.sub(&tfv)).unwrap()
            );
            assert_eq!(
                multiply(&ft1, &d).unwrap(),
                multiply(&d.add(&tfv), &ft1).unwrap()
            );
        }
    }
}

#[test]
fn exp_conjugation_oracle() {
    // Dv - g_v annihilates e^g; Dv alone does not (for g with g_v != 0)
    let sig = sig_xy();
    let full = sig.full_function_ring();
    let g = {
        let x = MultiPoly::var(&full, 0);
        let y = MultiPoly::var(&full, 1);
        x.pow(3).add(&x.mul(&y))
    };
    for target in [DerivTarget::Poly(0), DerivTarget::Poly(1)] {
        let d = WeylElement::deriv(&sig, target).unwrap();
        let idx = match target {
            DerivTarget::Poly(i) => i,
            _ => unreachable!(),
        };
        let gv = WeylElement::from_full_poly(&sig, &g.derivative(idx)).unwrap();
        let ann = d.sub(&gv);
        assert!(wclose_core::weyl::annihilates_exp(&ann, &g).unwrap());
        assert!(!wclose_core::weyl::annihilates_exp(&d, &g).unwrap());
    }
}

#[test]
fn polyx_derivative_leibniz() {
    let sig = sig_xy();
    let field = sig.coef_field();
    let mut r = rng(20);
    for _ in 0..200 {
        let a = random_polyx(&sig, &mut r, 3, 3);
        let b = random_polyx(&sig, &mut r, 3, 3);
        for idx in 0..2 {
            let lhs = a.mul(field, &b).derivative_poly(field, idx);
            let rhs = a
                .derivative_poly(field, idx)
                .mul(field, &b)
                .add(field, &a.mul(field, &b.derivative_poly(field, idx)));
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn polyx_matches_weyl_embedding() {
    let sig = sig_xy();
    let field = sig.coef_field();
    let mut r = rng(21);
    for _ in 0..100 {
        let a = random_polyx(&sig, &mut r, 3, 2);
        let b = random_polyx(&sig, &mut r, 3, 2);
        let sum = a.add(field, &b).to_weyl(&sig);
        assert_eq!(sum, a.to_weyl(&sig).add(&b.to_weyl(&sig)));
        let prod = a.mul(field, &b).to_weyl(&sig);
        assert_eq!(
            prod,
            multiply(&a.to_weyl(&sig), &b.to_weyl(&sig)).unwrap()
        );
    }
    let _ = PolyX::zero(2);
}
