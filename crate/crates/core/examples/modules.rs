//! Finite R_mG-modules: the exceptional modules X_{a,d,m}, annihilators,
//! the submodule M^* and the indecomposability checks.

use kummer_modules::group_ring::{GroupRingElement, RingParams};
use kummer_modules::rmg_modules::{
    annihilator_element, construct_x, indecomp_conditions, FinModule, NormVector,
    DEFAULT_END_GUARD_LOG2,
};

fn main() -> kummer_modules::Result<()> {
    let r = RingParams::new(2, 1, 2, 1)?;
    let x = GroupRingElement::from_i64(r, &[-2, 2]);
    let ann = annihilator_element(&x);
    println!("ann 2(σ−1) in R_2G_1 has order 2^{}", ann.log_order());

    let free = FinModule::group_ring(r);
    println!("(R_2G_1)^* has order 2^{}", free.star().log_order());

    for (p, n, m, a, d) in [
        (3u64, 2u32, 2u32, "(0,2)", 1i64),
        (3, 2, 2, "(0,1)", 1),
        (2, 1, 2, "(-inf,1)", 5),
        (3, 1, 2, "(-inf,-inf)", 4),
    ] {
        let a: NormVector = a.parse()?;
        let cond = indecomp_conditions(p, n, &a, d, m);
        let xm = construct_x(p, n, &a, d, m)?;
        let oracle = xm
            .presentation
            .module()
            .brute_indecomposable(DEFAULT_END_GUARD_LOG2);
        println!(
            "X_{{{a},{d},{m}}} (p={p}, n={n}): |X| = {p}^{}, I–V {}, oracle {:?}",
            xm.presentation.log_order(),
            if cond.all() { "hold" } else { "fail" },
            oracle
        );
    }
    Ok(())
}
