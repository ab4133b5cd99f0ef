// Linear-form witnesses that rule a sequence out as a rigidity sequence.

use rigidity::obstruct::{differencing_obstruction, gap_divergence, sumset_density_probe, SearchParams};
use rigidity::sequences::IntSequence;

fn main() {
    let p = SearchParams::default();
    let cases = [
        ("2^m + 1", IntSequence::shifted(IntSequence::powers(2), 1)),
        ("2^m + m", IntSequence::PerturbedPowers { base: 2, coeffs: vec![0, 1] }),
        ("m^2", IntSequence::Polynomial { coeffs: vec![0, 0, 1] }),
        ("3^m", IntSequence::powers(3)),
    ];
    for (name, s) in &cases {
        match differencing_obstruction(s, &p).unwrap() {
            Some(w) => println!("{name:>8}: {:?} . (n_m, ..) = {} on the whole window", w.coefficients, w.d),
            None => println!("{name:>8}: no constant form with K <= {}, |c| <= {}", p.k_max, p.c_max),
        }
    }

    let squares = IntSequence::Polynomial { coeffs: vec![0, 0, 1] };
    let g = gap_divergence(&squares, 200).unwrap();
    println!("squares: gaps diverging = {} (tail minimum {})", g.diverging, g.min_tail_gap);
    let probe = sumset_density_probe(&squares, &[1, -1], 99, 100_000).unwrap();
    println!("squares: {}", serde_json::to_string(&probe).unwrap());
}
