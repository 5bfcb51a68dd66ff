use proptest::prelude::*;

use yangw::current::{AlgElement, Ambient, Gen};
use yangw::modesum::{self, SumExpr};
use yangw::oracle::VacuumModule;
use yangw::scalar::ParamScalar;

fn scalar() -> impl Strategy<Value = ParamScalar> {
    (-4i64..=4, -3i64..=3, -2i64..=2, 0u32..=2).prop_map(|(a, b, c, e)| {
        ParamScalar::int(a).add(&ParamScalar::hbar().mul_int(b)).add(&ParamScalar::eps().pow(e).mul_int(c))
    })
}

fn gen3() -> impl Strategy<Value = Gen> {
    (1usize..=3, 1usize..=3, -2i64..=2).prop_map(|(i, j, m)| Gen::e(1, i, j, m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_field_axioms(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
        if !b.is_zero() {
            prop_assert_eq!(a.div(&b).unwrap().mul(&b), a.clone());
        }
    }

    #[test]
    fn scalar_display_parses_back(a in scalar(), b in scalar()) {
        let x = a.mul(&b);
        prop_assert_eq!(ParamScalar::parse(&x.to_string()).unwrap(), x);
    }

    #[test]
    fn bracket_is_antisymmetric_and_jacobi(x in gen3(), y in gen3(), z in gen3()) {
        let amb = Ambient::plain(&[3]);
        prop_assert!(amb.bracket(x, y).add(&amb.bracket(y, x)).is_zero());
        let (ex, ey, ez) = (AlgElement::gen(x), AlgElement::gen(y), AlgElement::gen(z));
        let j = amb.commutator(&ex, &amb.commutator(&ey, &ez))
            .add(&amb.commutator(&ey, &amb.commutator(&ez, &ex)))
            .add(&amb.commutator(&ez, &amb.commutator(&ex, &ey)));
        prop_assert!(j.is_zero());
    }

    #[test]
    fn normal_ordering_is_associative(x in gen3(), y in gen3(), z in gen3()) {
        let amb = Ambient::plain(&[3]);
        let (ex, ey, ez) = (AlgElement::gen(x), AlgElement::gen(y), AlgElement::gen(z));
        prop_assert_eq!(amb.mul(&amb.mul(&ex, &ey), &ez), amb.mul(&ex, &amb.mul(&ey, &ez)));
    }

    #[test]
    fn words_act_like_their_normal_form(x in gen3(), y in gen3()) {
        let amb = Ambient::plain(&[3]);
        let module = VacuumModule::new(&amb, 2).unwrap();
        let e = SumExpr::from(amb.normal_order(&[x, y]));
        for d in 0..=2 {
            for i in 0..module.graded_dims()[d] {
                let v = module.basis_vector(d, i);
                prop_assert_eq!(module.act(&e, &v).unwrap(), module.act_word(&[x, y], &v).unwrap());
            }
        }
    }

    #[test]
    fn symbolic_equality_sees_scaled_generators(g in gen3(), k in scalar()) {
        let amb = Ambient::plain(&[3]);
        let a = SumExpr::gen(g);
        let b = a.scale(&k);
        prop_assert_eq!(modesum::equals(&amb, &a, &b).unwrap().equal, k.is_one());
    }
}
