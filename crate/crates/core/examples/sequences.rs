// Sequence generators, densities and finite sums.

use num_bigint::BigUint;
use rigidity::sequences::{density, finite_sums, growth_report, IntSequence};

fn main() {
    let seqs = [
        ("2^m", IntSequence::powers(2)),
        ("m!", IntSequence::factorial()),
        ("m^2", IntSequence::Polynomial { coeffs: vec![0, 0, 1] }),
        ("2^m + 1", IntSequence::shifted(IntSequence::powers(2), 1)),
    ];
    for (name, s) in &seqs {
        let terms: Vec<String> = s.terms(8).unwrap().iter().map(|t| t.to_string()).collect();
        let d = density(s, &BigUint::from(1000u32)).unwrap();
        println!("{name:>8}: {}  D(1000) = {d}", terms.join(", "));
    }

    let r = growth_report(&IntSequence::factorial(), &[BigUint::from(10_000u32)], 30, 2.0).unwrap();
    println!("m!: ratio inf over the tail = {}", r.ratio_stats.liminf_estimate);

    // sums of distinct powers 2^3..2^5 are the multiples of 8 up to 56
    let cap = BigUint::from(1000u32);
    let fs = finite_sums(&IntSequence::powers(2), 3, 5, &cap, 1000).unwrap();
    println!("FS(2^3..2^5) = {:?}", fs.iter().map(|x| x.to_string()).collect::<Vec<_>>());
}
