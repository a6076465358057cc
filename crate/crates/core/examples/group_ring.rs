//! Arithmetic in R_mG_i = (Z/p^m)[Z/p^i]: products, canonical forms,
//! the operators P(i,j), evaluation maps φ_d and twist classes.

use kummer_modules::group_ring::{
    canonical_form, check_upower, classify_twist, from_canonical, p_operator, phi_d,
    GroupRingElement, RingParams,
};

fn main() -> kummer_modules::Result<()> {
    let r = RingParams::new(2, 1, 2, 1)?;
    let one_plus_sigma = GroupRingElement::from_i64(r, &[1, 1]);
    let sq = one_plus_sigma.mul(&one_plus_sigma)?;
    println!("(1+σ)^2 in R_2G_1 = {:?}", sq.coeffs);

    let form = canonical_form(&sq);
    println!("canonical digits a_(l,j) of 2+2σ: {:?}", form.digits);
    assert_eq!(from_canonical(&form), sq);

    let r3 = RingParams::new(3, 2, 2, 2)?;
    for (i, j) in [(1, 0), (2, 0), (2, 1)] {
        let pij = p_operator(r3, i, j)?;
        println!(
            "P({i},{j}) = {:?}, φ_4 mod 9 = {}",
            pij.coeffs,
            phi_d(&pij, 4, 2)
        );
    }

    for (p, d) in [(3u64, 7i64), (3, 10), (2, 7), (2, 3)] {
        let c = classify_twist(p, d, 8)?;
        println!(
            "p={p}: d={d} is {:?}; d^p is predicted in {:?}",
            c.level,
            check_upower(p, c.level, 1)
        );
    }
    Ok(())
}
