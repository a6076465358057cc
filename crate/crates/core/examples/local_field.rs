//! Towers K/F of local fields: roots of unity, Galois action, norms and
//! the invariants e_i(K/F).

use kummer_modules::local_field::{FieldSpec, Tower};

fn main() -> kummer_modules::Result<()> {
    for spec in [
        "unramified p=3 n=1",
        "quadratic2 a=-1",
        "quadratic2 a=2",
        "cyclotomic p=3 n=1",
        "cyclotomic p=3 n=2",
    ] {
        let spec: FieldSpec = spec.parse()?;
        let t = Tower::build(spec, 2, 0)?;
        let e: Vec<u32> = (0..=t.n).map(|i| t.level(i).e).collect();
        println!(
            "{spec}: [K:Q_p] = {}, ramification {:?}, ν = {}, e_i(K/F) = {:?}",
            t.degree(),
            e,
            t.nu(),
            t.norm_indices()?
        );
        if t.p == 2 && t.n == 1 {
            println!("  −1 is a norm from K: {}", t.minus_one_is_norm()?);
        }
    }

    let t = Tower::build(FieldSpec::Quadratic2 { a: -1 }, 2, 0)?;
    let i = t.quadratic_root().expect("quadratic tower");
    let minus_four = t.from_i64(-4)?;
    let r = t.pth_root(&minus_four)?;
    println!("√−4 = ±2i: {}", t.approx_eq(&t.pow(&r, 2), &minus_four));
    println!("σ(i) = −i: {}", t.approx_eq(&t.sigma(&i), &t.neg(&i)));
    println!(
        "N(1+i) = 2: {}",
        t.approx_eq(
            &t.norm_to_base(&t.add(&t.one(), &i).unwrap())?,
            &t.from_i64(2)?
        )
    );
    Ok(())
}
