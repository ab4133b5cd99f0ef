use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{phase, sin_pi, u64_threshold, FourierValue};
use crate::arith;
use crate::error::{invalid, Error, Result};
use crate::sequences::IntSequence;

/// Arc schedule `h_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum HSchedule {
    /// `h_m = sum_i coeffs[i] m^i`.
    Polynomial {
        coeffs: Vec<u64>,
    },
    Constant {
        h: u64,
    },
}

impl HSchedule {
    pub fn h(&self, m: u64) -> Result<u64> {
        let v = match self {
            HSchedule::Constant { h } => Some(*h),
            HSchedule::Polynomial { coeffs } => {
                coeffs.iter().rev().try_fold(0u64, |acc, &c| acc.checked_mul(m)?.checked_add(c))
            }
        };
        match v {
            Some(0) => invalid(format!("h_{m} must be positive")),
            Some(h) => Ok(h),
            None => Err(Error::Budget(format!("h_{m} overflows"))),
        }
    }

    /// Whether `sum 1/h_m` converges.
    pub fn summable(&self) -> bool {
        match self {
            HSchedule::Constant { .. } => false,
            HSchedule::Polynomial { coeffs } => coeffs.iter().rposition(|&c| c != 0).is_some_and(|d| d >= 2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CantorParams {
    /// Number of levels `m = M, ..., M + depth - 1`.
    pub depth: usize,
    /// First level `M`; by default the least `M >= 1` from which the schedule is feasible.
    pub start: Option<u64>,
    /// Residues kept inside each arc (evenly spaced among the admissible ones).
    pub per_arc: usize,
    pub max_leaves: usize,
}

impl Default for CantorParams {
    fn default() -> Self {
        CantorParams { depth: 3, start: None, per_arc: 2, max_leaves: 1 << 20 }
    }
}

#[derive(Clone, Debug, Serialize)]
struct Level {
    m: u64,
    #[serde(with = "crate::arith::serde_big::nat")]
    n: BigUint,
    h: u64,
    #[serde(with = "crate::arith::serde_big::nat_vec")]
    residues: Vec<BigUint>,
    parent: Vec<usize>,
    /// Fewest admissible next-level residues in any arc of this level.
    #[serde(with = "crate::arith::serde_big::nat")]
    min_admissible: BigUint,
}

/// Uniform measure on nested arcs `|x - j/n_m| <= 1/(2 n_m h_m)`: each kept arc at
/// level `m` contains the arcs of its kept children at level `m + 1`.
#[derive(Clone, Debug, Serialize)]
pub struct CantorArc {
    start: u64,
    summable: bool,
    levels: Vec<Level>,
    #[serde(with = "crate::arith::serde_big::rat_vec")]
    leaf_mass: Vec<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArcLevelCheck {
    pub m: u64,
    #[serde(with = "crate::arith::serde_big::nat")]
    pub n_m: BigUint,
    pub h_m: u64,
    /// Largest `||n_m x||` over the support, exact.
    #[serde(with = "crate::arith::serde_big::rat")]
    pub max_norm: BigRational,
    /// `max_norm <= 1/(2 h_m)`.
    pub within_arc: bool,
    pub gap_lower: f64,
    pub gap_upper: f64,
    /// `pi^2 / (2 h_m^2)`, implied by `max_norm <= 1/(2 h_m)`.
    pub gap_bound: f64,
    pub gap_ok: bool,
    #[serde(with = "crate::arith::serde_big::nat")]
    pub min_admissible: BigUint,
}

fn feasible_at(terms: &[BigUint], h: &HSchedule, m: u64) -> Result<bool> {
    let i = m as usize - 1;
    Ok(terms[i + 1] >= &terms[i] * 10u32 * h.h(m)?)
}

/// Build the nested arc system for `seq` and `h`.
pub fn cantor_support(seq: &IntSequence, h: &HSchedule, p: &CantorParams) -> Result<CantorArc> {
    if p.depth < 2 {
        return invalid("cantor support needs depth >= 2");
    }
    if p.per_arc < 2 {
        return invalid("keep at least 2 residues per arc");
    }
    let last_start = p.start.unwrap_or(64);
    let terms = seq.terms((last_start as usize) + p.depth)?;
    let start = match p.start {
        Some(0) => return invalid("levels are indexed from 1"),
        Some(s) => {
            for m in s..s + p.depth as u64 - 1 {
                if !feasible_at(&terms, h, m)? {
                    return Err(Error::Infeasible(format!(
                        "level m = {m}: n_(m+1) < 10 n_m h_m, arcs hold too few next-level roots"
                    )));
                }
            }
            s
        }
        None => {
            let mut found = None;
            'outer: for s in 1..=last_start {
                for m in s..s + p.depth as u64 - 1 {
                    if !feasible_at(&terms, h, m)? {
                        continue 'outer;
                    }
                }
                found = Some(s);
                break;
            }
            found.ok_or_else(|| {
                Error::Infeasible(format!("no start level M <= {last_start} with n_(m+1) >= 10 n_m h_m"))
            })?
        }
    };

    let n0 = terms[start as usize - 1].clone();
    if n0 < BigUint::from(p.per_arc) {
        return Err(Error::Infeasible(format!("level m = {start}: fewer than {} residues", p.per_arc)));
    }
    let roots: Vec<BigUint> = (0..p.per_arc).map(|i| &n0 * i / p.per_arc).collect();
    let mut levels = vec![Level {
        m: start,
        n: n0,
        h: h.h(start)?,
        parent: vec![0; roots.len()],
        residues: roots,
        min_admissible: BigUint::zero(),
    }];
    let mut mass: Vec<BigRational> = vec![BigRational::new(BigInt::one(), BigInt::from(p.per_arc)); p.per_arc];
    for m in start + 1..start + p.depth as u64 {
        let prev = levels.last_mut().unwrap();
        let n = terms[m as usize - 1].clone();
        let hm = h.h(m)?;
        let big_n = BigInt::from(n.clone());
        let r = BigRational::new(BigInt::one(), BigInt::from(&prev.n * 2u32 * prev.h))
            - BigRational::new(BigInt::one(), BigInt::from(&n * 2u32 * hm));
        let mut residues = Vec::new();
        let mut parent = Vec::new();
        let mut next_mass = Vec::new();
        let mut min_adm: Option<BigUint> = None;
        for (i, j) in prev.residues.iter().enumerate() {
            let c = arith::rat_big(j, &prev.n);
            let nn = BigRational::from_integer(big_n.clone());
            let lo = ((&c - &r) * &nn).ceil().to_integer();
            let hi = ((&c + &r) * &nn).floor().to_integer();
            let cnt = BigUint::try_from(&hi - &lo + 1).unwrap_or_default();
            if cnt < BigUint::from(2u32) {
                return Err(Error::Infeasible(format!(
                    "level m = {}: arc around {}/{} holds {} next-level roots",
                    prev.m, j, prev.n, cnt
                )));
            }
            if min_adm.as_ref().is_none_or(|x| &cnt < x) {
                min_adm = Some(cnt.clone());
            }
            let keep = cnt.to_usize().map_or(p.per_arc, |c| c.min(p.per_arc));
            let span = BigInt::from(cnt - 1u32);
            for t in 0..keep {
                let off = &span * t / (keep - 1);
                residues.push((&lo + off).mod_floor(&big_n).to_biguint().expect("reduced"));
                parent.push(i);
                next_mass.push(&mass[i] / BigRational::from_integer(BigInt::from(keep)));
            }
            if residues.len() > p.max_leaves {
                return Err(Error::Budget(format!("more than {} arcs at level {m}", p.max_leaves)));
            }
        }
        prev.min_admissible = min_adm.unwrap_or_default();
        levels.push(Level { m, n, h: hm, residues, parent, min_admissible: BigUint::zero() });
        mass = next_mass;
    }
    Ok(CantorArc { start, summable: h.summable(), levels, leaf_mass: mass })
}

impl CantorArc {
    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn leaves(&self) -> usize {
        self.leaf_mass.len()
    }

    /// Whether `sum 1/h_m` converges for the schedule.
    pub fn schedule_summable(&self) -> bool {
        self.summable
    }

    /// Smallest number of admissible next-level residues over the arcs of each
    /// level but the last.
    pub fn min_admissible(&self) -> Vec<(u64, BigUint)> {
        self.levels[..self.levels.len() - 1].iter().map(|l| (l.m, l.min_admissible.clone())).collect()
    }

    fn leaf(&self) -> &Level {
        self.levels.last().unwrap()
    }

    /// Exact for the depth-limited measure: uniform on each leaf arc.
    pub fn fourier(&self, n: &BigInt) -> FourierValue {
        if n.is_zero() {
            return FourierValue::one();
        }
        let leaf = self.leaf();
        let nl = BigInt::from(leaf.n.clone());
        let t = BigRational::new(n.clone(), &nl * leaf.h);
        let sinc = if t.is_zero() { 1.0 } else { sin_pi(&t) / (std::f64::consts::PI * arith::rat_to_f64(&t)) };
        let mut z = Complex64::new(0.0, 0.0);
        for (j, w) in leaf.residues.iter().zip(&self.leaf_mass) {
            let ph = BigRational::new((n * BigInt::from(j.clone())).mod_floor(&nl), nl.clone());
            z += phase(&ph) * arith::rat_to_f64(w);
        }
        FourierValue::with_error(z * sinc, (self.leaves() as f64 + 4.0) * 8.0 * f64::EPSILON)
    }

    /// Per-level verification of `||n_m x|| <= 1/(2 h_m)` on the support and of
    /// `1 - Re nu^(n_m) <= pi^2 / (2 h_m^2)`.
    pub fn level_checks(&self) -> Vec<ArcLevelCheck> {
        let leaf = self.leaf();
        let half_w = BigRational::new(BigInt::one(), BigInt::from(&leaf.n * 2u32 * leaf.h));
        let half = arith::rat(1, 2);
        self.levels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let nm = BigRational::from_integer(BigInt::from(l.n.clone()));
                let rho = &nm * &half_w;
                let mut max_norm = BigRational::zero();
                for j in &leaf.residues {
                    let c = arith::rat_big(j, &leaf.n) * &nm;
                    let v = arith::dist_to_int(&c) + &rho;
                    let v = if v > half { half.clone() } else { v };
                    if v > max_norm {
                        max_norm = v;
                    }
                }
                let within_arc = max_norm <= BigRational::new(BigInt::one(), BigInt::from(2 * l.h));
                let f = self.fourier(&BigInt::from(l.n.clone()));
                let (gap_lower, gap_upper) = f.gap();
                let gap_bound = std::f64::consts::PI.powi(2) / (2.0 * (l.h as f64).powi(2));
                ArcLevelCheck {
                    m: l.m,
                    n_m: l.n.clone(),
                    h_m: l.h,
                    max_norm,
                    within_arc,
                    gap_lower,
                    gap_upper,
                    gap_bound,
                    gap_ok: gap_upper <= gap_bound + 1e-12,
                    min_admissible: if i + 1 < self.levels.len() { l.min_admissible.clone() } else { BigUint::zero() },
                }
            })
            .collect()
    }

    /// Uniform point of a leaf arc, leaf chosen by mass.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<BigRational> {
        let leaf = self.leaf();
        let mut cum = BigRational::zero();
        let cuts: Vec<u64> = self
            .leaf_mass
            .iter()
            .map(|w| {
                cum += w;
                u64_threshold(&cum).unwrap_or(u64::MAX)
            })
            .collect();
        let width = BigRational::new(BigInt::one(), BigInt::from(&leaf.n * leaf.h));
        let two64 = BigRational::from_integer(BigInt::from(1u128 << 64));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let u: u64 = rng.gen();
                let i = cuts.iter().position(|&c| u < c).unwrap_or(cuts.len() - 1);
                let v: u64 = rng.gen();
                let off = (BigRational::from_integer(v.into()) / &two64 - arith::rat(1, 2)) * &width;
                arith::frac(&(arith::rat_big(&leaf.residues[i], &leaf.n) + off))
            })
            .collect()
    }
}
