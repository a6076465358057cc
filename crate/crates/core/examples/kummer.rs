//! The Kummer module J_m = K^×/K^{×p^m} as a finite R_mG-module, with
//! discrete logarithms of field elements.

use kummer_modules::local_field::{FieldSpec, Tower};

fn main() -> kummer_modules::Result<()> {
    let t = Tower::build(FieldSpec::Cyclotomic { p: 3, n: 1 }, 2, 0)?;
    for m in 1..=2 {
        let j = t.kummer(t.n, m)?;
        let module = j.module();
        println!(
            "J_{m}: |J| = 3^{}, invariant orders {:?}, {} generators",
            j.log_order(),
            module.orders,
            j.gens.len()
        );
    }
    let j = t.kummer(t.n, 2)?;
    let xi = t.root_of_unity(1).expect("ξ_3 ∈ F");
    let x = j.dlog(&t, &xi)?;
    println!("[ξ_3]_2 = {x:?}");
    println!("σ fixes it: {}", j.module().sigma_apply(&x) == x);
    let z9 = t.root_of_unity(2).expect("ξ_9 ∈ K");
    let y = j.dlog(&t, &z9)?;
    let three_y = j.module().scale(3, &y);
    println!("[ξ_9^3]_2 = 3·[ξ_9]_2: {}", three_y == x);
    Ok(())
}
