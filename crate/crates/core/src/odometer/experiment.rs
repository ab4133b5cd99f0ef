use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{self, serde_big};
use crate::error::{invalid, Result};
use crate::obstruct::{differencing_obstruction, LinearFormWitness, SearchParams};
use crate::sequences::IntSequence;

/// Bounded non-integer ratios: `n_{t+1} = floor(rho_t n_t)` with `rho_t` cycling
/// through the given rationals. Reports what breaks relative to the
/// integer-ratio case; it does not decide rigidity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioExperiment {
    #[serde(with = "serde_big::nat_vec")]
    pub terms: Vec<BigUint>,
    /// `n_{t+1}/n_t - rho_t`.
    #[serde(with = "serde_big::rat_vec")]
    pub ratio_defects: Vec<BigRational>,
    /// Number of `t` with `n_t | n_{t+1}` (the odometer tower structure needs all).
    pub divisible_steps: usize,
    /// Smallest constant linear form on consecutive terms, if the search found one.
    pub linear_form: Option<LinearFormWitness>,
    pub linear_form_note: String,
}

pub fn ratio_experiment(first: &BigUint, ratios: &[BigRational], count: usize) -> Result<RatioExperiment> {
    if first.is_zero() || ratios.is_empty() || count < 2 {
        return invalid("experiment needs n_1 >= 1, at least one ratio and at least two terms");
    }
    if ratios.iter().any(|r| *r <= BigRational::one()) {
        return invalid("ratios must exceed 1");
    }
    let mut terms = vec![first.clone()];
    while terms.len() < count {
        let t = terms.len() - 1;
        let next = arith::floor_nat(&(&ratios[t % ratios.len()] * arith::rat_big(&terms[t], &BigUint::one())));
        if next <= terms[t] {
            return invalid(format!("term {} does not increase; start larger", t + 2));
        }
        terms.push(next);
    }
    let ratio_defects =
        terms.windows(2).enumerate().map(|(t, w)| arith::rat_big(&w[1], &w[0]) - &ratios[t % ratios.len()]).collect();
    let divisible_steps = terms.windows(2).filter(|w| w[1].is_multiple_of(&w[0])).count();
    let params = SearchParams::default();
    let need = params.start as usize - 1 + 3 * params.window as usize + params.k_max;
    let (linear_form, linear_form_note) = if count < need {
        (None, format!("not searched: needs {need} terms"))
    } else {
        let seq = IntSequence::Explicit { terms: terms.clone() };
        match differencing_obstruction(&seq, &params) {
            Ok(Some(w)) => (Some(w), "constant linear form found".into()),
            Ok(None) => (None, "no constant linear form within the search box".into()),
            Err(e) => (None, e.to_string()),
        }
    };
    Ok(RatioExperiment { terms, ratio_defects, divisible_steps, linear_form, linear_form_note })
}
