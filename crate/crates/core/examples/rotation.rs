// Rotations: convergent denominators, return-time syndeticity, sparse rigidity sequences.

use num_bigint::BigUint;
use num_rational::BigRational;
use rigidity::rotation::{
    bounded_growth_rigidity_sequence, check_lac2, syndeticity_constant, ContinuedFraction, Expansion, GrowthParams,
    GrowthRule,
};

fn main() {
    let golden = ContinuedFraction::golden_mean();
    let mut e = Expansion::new(golden.clone());
    for n in [5usize, 10, 20, 40] {
        let q = e.q(n).unwrap();
        let (lo, hi) = e.norm_bracket(&q, 32).unwrap();
        let qr = BigRational::from_integer(q.clone().into());
        println!(
            "q_{n} = {q}: q ||q alpha|| in [{:.6}, {:.6}], <= 1: {}",
            rigidity::arith::rat_to_f64(&(&qr * lo)),
            rigidity::arith::rat_to_f64(&(&qr * hi)),
            check_lac2(&mut e, n).unwrap()
        );
    }
    let c = syndeticity_constant(&golden, &BigRational::new(1.into(), 3.into())).unwrap();
    println!("returns to ||n alpha|| < 1/6 have gaps <= {} (first hits {:?})", c.n, c.first_hits);

    let g = bounded_growth_rigidity_sequence(
        &golden,
        &GrowthRule::MLog2,
        &GrowthParams { max_terms: 20, ..Default::default() },
    )
    .unwrap();
    println!("n_m <= {} m ceil(log2(m+1)): {:?}", g.c, g.terms);
    assert!(g.terms.iter().all(|&n| BigUint::from(n) > BigUint::from(0u32)));
}
