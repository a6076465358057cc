use kummer_modules::group_ring::{canonical_form, from_canonical, phi_d, GroupRingElement, RingParams};
use kummer_modules::rmg_modules::{annihilator_element, ideal};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = RingParams> {
    (prop_oneof![Just(2u64), Just(3)], 1u32..=2, 1u32..=3)
        .prop_flat_map(|(p, n, m)| (Just(p), Just(n), Just(m), 0..=n))
        .prop_map(|(p, n, m, i)| RingParams::new(p, n, m, i).unwrap())
}

fn element(r: RingParams) -> impl Strategy<Value = GroupRingElement> {
    let modulus = r.p.pow(r.m) as i64;
    proptest::collection::vec(0..modulus, r.width()).prop_map(move |c| GroupRingElement::from_i64(r, &c))
}

fn triple() -> impl Strategy<Value = (GroupRingElement, GroupRingElement, GroupRingElement)> {
    params().prop_flat_map(|r| (element(r), element(r), element(r)))
}

proptest! {
    #[test]
    fn canonical_round_trip(f in params().prop_flat_map(element)) {
        let form = canonical_form(&f);
        prop_assert!(form.digits.iter().flatten().all(|&a| a < f.params.p));
        prop_assert_eq!(from_canonical(&form), f);
    }

    #[test]
    fn ring_laws((f, g, h) in triple()) {
        let fg = f.mul(&g).unwrap();
        prop_assert_eq!(&fg, &g.mul(&f).unwrap());
        prop_assert_eq!(fg.mul(&h).unwrap(), f.mul(&g.mul(&h).unwrap()).unwrap());
        let lhs = f.mul(&g.add(&h).unwrap()).unwrap();
        prop_assert_eq!(lhs, fg.add(&f.mul(&h).unwrap()).unwrap());
        prop_assert_eq!(f.mul(&GroupRingElement::one(f.params)).unwrap(), f);
    }

    #[test]
    fn evaluation_is_multiplicative((f, g, _) in triple(), k in 0i64..20) {
        let r = f.params;
        let d = 1 + r.p as i64 * k;
        let mp = r.m.min(r.i + 1);
        let modulus = r.p.pow(mp);
        let prod = phi_d(&f, d, mp) * phi_d(&g, d, mp) % modulus;
        prop_assert_eq!(phi_d(&f.mul(&g).unwrap(), d, mp), prod);
    }

    #[test]
    fn ideal_times_annihilator_is_ring_order(f in params().prop_flat_map(element)) {
        let r = f.params;
        let total = r.m * r.width() as u32;
        let id = ideal(r, std::slice::from_ref(&f)).log_order();
        prop_assert_eq!(id + annihilator_element(&f).log_order(), total);
    }
}
