// Fourier gaps 1 - Re nu^(n_m) of a Riesz product along 2^m and 2^m + 1.

use rigidity::measures::{rigidity_gap_profile, CircleMeasure, RieszMeasure, Truncation};
use rigidity::sequences::IntSequence;

fn main() {
    let riesz = RieszMeasure::dyadic_harmonic();
    let nu = CircleMeasure::Riesz(riesz.clone());
    let t = Truncation::IndexPlus { offset: 60 };
    let along = rigidity_gap_profile(&nu, &IntSequence::powers(2), 5, 12, t).unwrap();
    let shifted = rigidity_gap_profile(&nu, &IntSequence::shifted(IntSequence::powers(2), 1), 5, 12, t).unwrap();
    println!("{:>3} {:>24} {:>24}", "m", "gap at 2^m", "gap at 2^m + 1");
    for (a, b) in along.iter().zip(&shifted) {
        println!("{:>3} [{:.9}, {:.9}] [{:.9}, {:.9}]", a.m, a.gap_lower, a.gap_upper, b.gap_lower, b.gap_upper);
    }
    for k in [10, 50, 200] {
        let b = riesz.atom_bound(k).unwrap();
        println!("atom mass bound after {k} factors: {:.6}", b.value);
    }
}
