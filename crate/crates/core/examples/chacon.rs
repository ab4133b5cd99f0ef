// Chacon's transformation: symbolic words, non-recurrence and partial rigidity.

use num_bigint::BigUint;
use num_rational::BigRational;
use rigidity::rankone::{build, chacon_height, chacon_nonrecurrence_check, chacon_word, delta_mass, preset_chacon};

fn main() {
    let w = chacon_word(2).unwrap();
    println!("B_2 = {} ({})", w.to_string01(), w.rle());
    for k in 2..=6 {
        let ok: Vec<bool> = (1..k).map(|m| chacon_nonrecurrence_check(k, m).unwrap()).collect();
        println!("k = {k}: first spacer level misses itself after h_m - 1 for m < k: {ok:?}");
    }

    let tower = build(&preset_chacon(12), 12).unwrap();
    let m = 5;
    let h = tower.height_at(m).unwrap();
    assert_eq!(h, chacon_height(m));
    let tol = BigRational::new(1.into(), 100.into()) * tower.width_at(m).unwrap();
    let b = delta_mass(&tower, m, &[0], &BigUint::from(h), &tol).unwrap();
    let (lo, hi) = b.return_ratio();
    println!(
        "base E of tower {m}, n = h_{m} = {h}: mu(T^n E ∩ E)/mu(E) in [{lo}, {hi}] (refined to stage {})",
        b.stage
    );
}
