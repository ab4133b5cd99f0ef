// The (2, 3, 4, ...) odometer: cocycle bounds, coboundary test, a non-recurrent set.

use rigidity::analysis::{odometer_nonrec, NonrecQuery};
use rigidity::arith::{rat, serde_big::Rat};
use rigidity::odometer::{coboundary_test, cocycle_norm_bound, CocycleSpec, OdometerSystem};

fn main() {
    let sys = OdometerSystem::factorial(40);
    println!("heights: {:?}", (1..=6).map(|t| sys.height(t).unwrap().to_string()).collect::<Vec<_>>());
    let f = CocycleSpec::good_function(&sys, 40).unwrap();
    for m0 in [0usize, 3, 10, 30] {
        let b = cocycle_norm_bound(&sys, &f, m0, 40).unwrap();
        println!("m0 = {m0:>2}: ||f^(n_m0)||^2 bound holds: {} ({} bits)", b.holds, b.precision_bits);
    }
    let r = coboundary_test(&sys, &CocycleSpec::good_function(&sys, 38).unwrap()).unwrap();
    println!("{}", r.verdict);

    let q = NonrecQuery { depth: 6, base_depth: 2, budget: Rat(rat(1, 100)), max_selected: 10 };
    let c = odometer_nonrec(&sys, &q).unwrap();
    println!("non-recurrent set: mass {} verified {}", c["mass"], c["verified"]);
}
