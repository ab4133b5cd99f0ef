use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, serde_big, Bits};
use crate::error::{invalid, Error, Result};
use crate::sequences::IntSequence;

/// Default cap on the height of a materialized tower.
pub const MAX_LEVELS: usize = 10_000_000;

/// `count` spacer levels placed on top of the first `after` columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpacerGroup {
    #[serde(with = "serde_big::nat")]
    pub after: BigUint,
    #[serde(with = "serde_big::nat")]
    pub count: BigUint,
}

/// One cutting-and-stacking step: `cuts` columns of equal width stacked in
/// order, with spacer groups interleaved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    #[serde(with = "serde_big::nat")]
    pub cuts: BigUint,
    #[serde(default)]
    pub spacers: Vec<SpacerGroup>,
}

impl Stage {
    pub fn concatenate(cuts: u64) -> Self {
        Stage { cuts: cuts.into(), spacers: Vec::new() }
    }

    pub fn spacer_total(&self) -> BigUint {
        self.spacers.iter().map(|g| &g.count).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOneSpec {
    /// Index of the initial tower (0 for Chacon, 1 for the sequence presets).
    #[serde(default)]
    pub first_stage: usize,
    #[serde(with = "serde_big::nat")]
    pub initial_height: BigUint,
    pub stages: Vec<Stage>,
    /// Stages where a preset had to cap its spacer count.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub capped_stages: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureEvidence {
    /// `eps_m`: fraction of `tau_{m+1}` made of spacers added at stage `m`.
    #[serde(with = "serde_big::rat_vec")]
    pub spacer_fractions: Vec<BigRational>,
    pub eps_sum: f64,
    /// Sum over the second half of the stages.
    pub eps_tail: f64,
    /// `mu(X_M) / mu(X_first)` at the last stage.
    pub mass_growth: f64,
    pub finite: bool,
}

impl RankOneSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: RankOneSpec = serde_json::from_str(s).map_err(|e| Error::Config(format!("tower spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_height.is_zero() {
            return invalid("initial height must be positive");
        }
        for (i, st) in self.stages.iter().enumerate() {
            let m = self.first_stage + i;
            if st.cuts.is_zero() {
                return invalid(format!("stage {m}: at least one column is required"));
            }
            if st.spacers.windows(2).any(|w| w[0].after >= w[1].after) {
                return invalid(format!("stage {m}: spacer groups must have increasing positions"));
            }
            if st.spacers.iter().any(|g| g.after > st.cuts || g.count.is_zero()) {
                return invalid(format!("stage {m}: spacer group outside 0..=cuts or empty"));
            }
            if st.cuts.is_one() && st.spacers.is_empty() {
                return invalid(format!("stage {m}: a single column without spacers does not refine"));
            }
        }
        Ok(())
    }

    pub fn last_stage(&self) -> usize {
        self.first_stage + self.stages.len()
    }

    fn stage(&self, m: usize) -> Result<&Stage> {
        m.checked_sub(self.first_stage)
            .and_then(|i| self.stages.get(i))
            .ok_or_else(|| Error::Budget(format!("stage {m} is not in the spec")))
    }

    /// `h_m = q h_{m-1} + spacers`.
    pub fn heights(&self) -> Vec<BigUint> {
        let mut h = vec![self.initial_height.clone()];
        for st in &self.stages {
            let next = h.last().unwrap() * &st.cuts + st.spacer_total();
            h.push(next);
        }
        h
    }

    pub fn height(&self, m: usize) -> Result<BigUint> {
        m.checked_sub(self.first_stage)
            .and_then(|i| self.heights().get(i).cloned())
            .ok_or_else(|| Error::Budget(format!("stage {m} is not in the spec")))
    }

    /// Copies of `tau_m` stacked at stage `m` (`s_m`), i.e. the cut count.
    pub fn copies(&self, m: usize) -> Result<BigUint> {
        Ok(self.stage(m)?.cuts.clone())
    }

    pub fn measure_evidence(&self) -> MeasureEvidence {
        let h = self.heights();
        let spacer_fractions: Vec<BigRational> =
            self.stages.iter().enumerate().map(|(i, st)| arith::rat_big(&st.spacer_total(), &h[i + 1])).collect();
        let f: Vec<f64> = spacer_fractions.iter().map(arith::rat_to_f64).collect();
        let eps_sum = f.iter().sum();
        let eps_tail: f64 = f[f.len() / 2..].iter().sum();
        // mu(X_{m+1}) = mu(X_m) / (1 - eps_m)
        let mass_growth = f.iter().map(|e| 1.0 / (1.0 - e)).product();
        MeasureEvidence { spacer_fractions, eps_sum, eps_tail, mass_growth, finite: eps_tail < 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Segment {
    /// Column `c` of the previous tower starts at `start`.
    Copy { start: usize, c: usize },
    /// Spacer levels `first..first + len` of this stage start at `start`.
    Spacers { start: usize, len: usize, first: usize },
}

impl Segment {
    fn start(&self) -> usize {
        match self {
            Segment::Copy { start, .. } | Segment::Spacers { start, .. } => *start,
        }
    }
}

/// The towers `tau_first, ..., tau_M` of a spec, with exact level geometry:
/// `X_first = [0, 1)` cut into `h_first` levels, spacers appended to the right.
/// Masses are normalized by `mu(X_first) = 1`.
#[derive(Clone, Debug)]
pub struct TowerState {
    first: usize,
    heights: Vec<usize>,
    widths: Vec<BigRational>,
    /// `mu(X_m)`, also the right end of `X_m`.
    lengths: Vec<BigRational>,
    layouts: Vec<Vec<Segment>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerSummary {
    pub stage: usize,
    pub height: usize,
    #[serde(with = "serde_big::rat")]
    pub width: BigRational,
    #[serde(with = "serde_big::rat")]
    pub total_mass: BigRational,
    pub heights: Vec<usize>,
}

/// Build through stage `m`, refusing towers taller than [`MAX_LEVELS`].
pub fn build(spec: &RankOneSpec, m: usize) -> Result<TowerState> {
    build_with_budget(spec, m, MAX_LEVELS)
}

pub fn build_with_budget(spec: &RankOneSpec, m: usize, max_levels: usize) -> Result<TowerState> {
    spec.validate()?;
    if m < spec.first_stage || m > spec.last_stage() {
        return invalid(format!("stage {m} outside {}..={}", spec.first_stage, spec.last_stage()));
    }
    let too_tall = |h: &BigUint| Error::Budget(format!("tower height {h} exceeds the budget of {max_levels} levels"));
    let h0 =
        spec.initial_height.to_usize().filter(|&h| h <= max_levels).ok_or_else(|| too_tall(&spec.initial_height))?;
    let mut t = TowerState {
        first: spec.first_stage,
        heights: vec![h0],
        widths: vec![arith::rat(1, h0 as i64)],
        lengths: vec![BigRational::one()],
        layouts: Vec::new(),
    };
    for st in &spec.stages[..m - spec.first_stage] {
        let prev = *t.heights.last().unwrap();
        let next = BigUint::from(prev) * &st.cuts + st.spacer_total();
        let h = next.to_usize().filter(|&h| h <= max_levels).ok_or_else(|| too_tall(&next))?;
        let cuts = st.cuts.to_usize().unwrap();
        let mut layout = Vec::with_capacity(cuts + st.spacers.len());
        let mut pos = 0;
        let mut spacer_index = 0;
        let mut groups = st.spacers.iter().peekable();
        for c in 0..=cuts {
            while let Some(g) = groups.next_if(|g| g.after == BigUint::from(c)) {
                let len = g.count.to_usize().unwrap();
                layout.push(Segment::Spacers { start: pos, len, first: spacer_index });
                pos += len;
                spacer_index += len;
            }
            if c < cuts {
                layout.push(Segment::Copy { start: pos, c });
                pos += prev;
            }
        }
        debug_assert_eq!(pos, h);
        let w = t.widths.last().unwrap() / BigRational::from_integer(BigInt::from(cuts));
        let len = t.lengths.last().unwrap() + &w * BigRational::from_integer(BigInt::from(spacer_index));
        t.heights.push(h);
        t.widths.push(w);
        t.lengths.push(len);
        t.layouts.push(layout);
    }
    Ok(t)
}

impl TowerState {
    pub fn stage(&self) -> usize {
        self.first + self.heights.len() - 1
    }

    fn idx(&self, m: usize) -> Result<usize> {
        m.checked_sub(self.first)
            .filter(|&i| i < self.heights.len())
            .ok_or_else(|| Error::InvalidParameter(format!("stage {m} was not built")))
    }

    pub fn height_at(&self, m: usize) -> Result<usize> {
        Ok(self.heights[self.idx(m)?])
    }

    pub fn height(&self) -> usize {
        *self.heights.last().unwrap()
    }

    pub fn heights(&self) -> &[usize] {
        &self.heights
    }

    pub fn width_at(&self, m: usize) -> Result<BigRational> {
        Ok(self.widths[self.idx(m)?].clone())
    }

    pub fn width(&self) -> &BigRational {
        self.widths.last().unwrap()
    }

    pub fn total_mass(&self) -> &BigRational {
        self.lengths.last().unwrap()
    }

    pub fn summary(&self) -> TowerSummary {
        TowerSummary {
            stage: self.stage(),
            height: self.height(),
            width: self.width().clone(),
            total_mass: self.total_mass().clone(),
            heights: self.heights.clone(),
        }
    }

    /// Exact interval `[lo, hi)` of level `j` of `tau_m`.
    pub fn level_interval(&self, m: usize, j: usize) -> Result<(BigRational, BigRational)> {
        let mut i = self.idx(m)?;
        if j >= self.heights[i] {
            return invalid(format!("level {j} is not below h_{m} = {}", self.heights[i]));
        }
        let w = self.widths[i].clone();
        let mut offset = BigRational::zero();
        let mut j = j;
        while i > 0 {
            let layout = &self.layouts[i - 1];
            let s = layout.partition_point(|seg| seg.start() <= j) - 1;
            match &layout[s] {
                Segment::Copy { start, c } => {
                    offset += &self.widths[i] * BigRational::from_integer(BigInt::from(*c));
                    j -= start;
                    i -= 1;
                }
                Segment::Spacers { start, first, .. } => {
                    let t = first + (j - start);
                    let lo =
                        &self.lengths[i - 1] + &self.widths[i] * BigRational::from_integer(BigInt::from(t)) + offset;
                    return Ok((lo.clone(), lo + w));
                }
            }
        }
        let lo = &self.widths[0] * BigRational::from_integer(BigInt::from(j)) + offset;
        Ok((lo.clone(), lo + w))
    }

    /// Bottom positions of the copies of `tau_k` inside `tau_m`, increasing.
    pub fn occurrences(&self, k: usize, m: usize) -> Result<Vec<usize>> {
        let (ik, im) = (self.idx(k)?, self.idx(m)?);
        if ik > im {
            return invalid("occurrences need k <= m");
        }
        let mut occ = vec![0usize];
        for layout in &self.layouts[ik..im] {
            let mut next = Vec::new();
            for seg in layout {
                if let Segment::Copy { start, .. } = seg {
                    next.extend(occ.iter().map(|o| start + o));
                }
            }
            occ = next;
        }
        Ok(occ)
    }

    /// The stage-`m` levels making up a union of stage-`k` levels.
    pub fn refine(&self, k: usize, levels: &[usize], m: usize) -> Result<Bits> {
        let hk = self.height_at(k)?;
        if let Some(&j) = levels.iter().find(|&&j| j >= hk) {
            return invalid(format!("level {j} is not below h_{k} = {hk}"));
        }
        let mut base = Bits::new(hk);
        for &j in levels {
            base.set(j, true);
        }
        let mut out = Bits::new(self.height_at(m)?);
        for o in self.occurrences(k, m)? {
            out.or_at(&base, o);
        }
        Ok(out)
    }

    pub fn mass(&self, m: usize, set: &Bits) -> Result<BigRational> {
        Ok(self.width_at(m)? * BigRational::from_integer(BigInt::from(set.count_ones())))
    }
}

/// Exact bracket on `mu(T^n E Δ E)` from stage `stage`: `hits` pieces of `E`
/// land in `E`, `unknown` pieces cross the top of the tower.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaBracket {
    pub stage: usize,
    #[serde(with = "serde_big::nat")]
    pub n: BigUint,
    #[serde(with = "serde_big::rat")]
    pub mu_e: BigRational,
    #[serde(with = "serde_big::rat")]
    pub lower: BigRational,
    #[serde(with = "serde_big::rat")]
    pub upper: BigRational,
    /// Bracket on `mu(T^n E \ E)`.
    #[serde(with = "serde_big::rat")]
    pub out_lower: BigRational,
    #[serde(with = "serde_big::rat")]
    pub out_upper: BigRational,
    pub hits: usize,
    pub unknown: usize,
}

impl DeltaBracket {
    pub fn width(&self) -> BigRational {
        &self.upper - &self.lower
    }

    /// Bracket on `mu(T^n E ∩ E) / mu(E)`.
    pub fn return_ratio(&self) -> (BigRational, BigRational) {
        let half = arith::rat(1, 2);
        let lo = BigRational::one() - &self.upper * &half / &self.mu_e;
        let hi = BigRational::one() - &self.lower * &half / &self.mu_e;
        (lo, hi)
    }
}

/// `T^n` as the index shift on `tau_m`.
pub fn delta_at(tower: &TowerState, e: &Bits, m: usize, n: &BigUint) -> Result<DeltaBracket> {
    let h = tower.height_at(m)?;
    if e.len() != h {
        return invalid("set does not live on the requested stage");
    }
    let w = tower.width_at(m)?;
    let size = e.count_ones();
    let (hits, unknown) = match n.to_usize().filter(|&n| n < h) {
        Some(s) => (e.shifted_and_count(e, s), e.count_ones_from(h - s)),
        None => (0, size),
    };
    let r = |k: usize| BigRational::from_integer(BigInt::from(k));
    let mu_e = &w * r(size);
    let lo_inter = &w * r(hits);
    let hi_inter = &w * r(hits + unknown);
    let two = r(2);
    Ok(DeltaBracket {
        stage: m,
        n: n.clone(),
        lower: &two * (&mu_e - &hi_inter),
        upper: &two * (&mu_e - &lo_inter),
        out_lower: &mu_e - &hi_inter,
        out_upper: &mu_e - &lo_inter,
        mu_e,
        hits,
        unknown,
    })
}

/// `mu(T^n E Δ E)` for `E` a union of levels of `tau_k`, refined until the
/// bracket is narrower than `tol` (or the spec or budget runs out).
pub fn delta_mass(
    tower: &TowerState,
    k: usize,
    levels: &[usize],
    n: &BigUint,
    tol: &BigRational,
) -> Result<DeltaBracket> {
    if *tol <= BigRational::zero() {
        return invalid("tolerance must be positive");
    }
    let mut last = None;
    for m in k..=tower.stage() {
        let e = tower.refine(k, levels, m)?;
        let b = if n.is_zero() {
            let mu_e = tower.mass(m, &e)?;
            DeltaBracket {
                stage: m,
                n: n.clone(),
                lower: BigRational::zero(),
                upper: BigRational::zero(),
                out_lower: BigRational::zero(),
                out_upper: BigRational::zero(),
                mu_e,
                hits: e.count_ones(),
                unknown: 0,
            }
        } else {
            delta_at(tower, &e, m, n)?
        };
        if b.width() < *tol {
            return Ok(b);
        }
        last = Some(b);
    }
    let b = last.expect("at least one stage");
    Err(Error::Budget(format!(
        "bracket [{}, {}] at stage {} is still wider than the tolerance",
        arith::fmt_rational(&b.lower),
        arith::fmt_rational(&b.upper),
        b.stage
    )))
}

/// Cut-and-stack with `cuts = 3` and one spacer over the middle column; `h_0 = 1`.
pub fn preset_chacon(stages: usize) -> RankOneSpec {
    RankOneSpec {
        first_stage: 0,
        initial_height: BigUint::one(),
        stages: vec![
            Stage {
                cuts: 3u32.into(),
                spacers: vec![SpacerGroup { after: 2u32.into(), count: BigUint::one() }],
            };
            stages
        ],
        capped_stages: Vec::new(),
    }
}

/// `q = 2` and no spacers: `h_m = 2^{m-1} h_1`.
pub fn preset_concatenation(initial_height: u64, stages: usize) -> RankOneSpec {
    RankOneSpec {
        first_stage: 1,
        initial_height: initial_height.into(),
        stages: vec![Stage::concatenate(2); stages],
        capped_stages: Vec::new(),
    }
}

/// `n_{m+1} = q_m n_m + r_m` for `m = 1..=stages`, with evidence that `q_m`
/// grows: every quotient in the second half exceeds every one in the first.
type Quotients = (Vec<BigUint>, Vec<(BigUint, BigUint)>);

fn quotients(seq: &IntSequence, stages: usize) -> Result<Quotients> {
    if stages < 2 {
        return invalid("presets need at least two stages of evidence");
    }
    let n = seq.prefix(stages + 1)?;
    if n.len() < stages + 1 || n[0].is_zero() {
        return invalid("sequence too short or starting at 0");
    }
    let qr: Vec<(BigUint, BigUint)> = n.windows(2).map(|w| w[1].div_rem(&w[0])).collect();
    let (a, b) = qr.split_at(stages / 2);
    let first_max = a.iter().map(|x| &x.0).max().unwrap();
    let second_min = b.iter().map(|x| &x.0).min().unwrap();
    if second_min <= first_max || qr.iter().any(|x| x.0.is_zero()) {
        return Err(Error::Infeasible(format!(
            "ratios n_(m+1)/n_m show no growth over {stages} stages (max {first_max} then min {second_min})"
        )));
    }
    Ok((n, qr))
}

/// Heights `h_m = n_m`; `s_m = q_m - p_m` copies, then `r_m + p_m h_m` spacers,
/// with `p_m` the least `l >= 0` such that `(r_m + l h_m)/h_{m+1} > 1/m`.
/// `p_m` is capped at `q_m - 1` (recorded in `capped_stages`).
pub fn preset_infrankone(seq: &IntSequence, stages: usize) -> Result<RankOneSpec> {
    let (n, qr) = quotients(seq, stages)?;
    let mut out = Vec::with_capacity(stages);
    let mut capped = Vec::new();
    for (i, (q, r)) in qr.iter().enumerate() {
        let m = i + 1;
        let (h, h1) = (&n[i], &n[i + 1]);
        // l > (h_{m+1} - m r) / (m h)
        let x = BigRational::new(BigInt::from(h1.clone()) - BigInt::from(r * m), BigInt::from(h * m));
        let mut p = if x < BigRational::zero() { BigUint::zero() } else { arith::floor_nat(&x) + 1u32 };
        if &p >= q {
            p = q - 1u32;
            capped.push(m);
        }
        let s = q - &p;
        let spacers = r + &p * h;
        let groups = if spacers.is_zero() { vec![] } else { vec![SpacerGroup { after: s.clone(), count: spacers }] };
        out.push(Stage { cuts: s, spacers: groups });
    }
    Ok(RankOneSpec { first_stage: 1, initial_height: n[0].clone(), stages: out, capped_stages: capped })
}

/// Heights `h_m = n_m`. `r_m = 0`: `q_m` copies. Otherwise `a_m = floor(q_m/3)`
/// copies, one spacer, `q_m - a_m` copies, `r_m - 1` spacers.
pub fn preset_specialinfrankone(seq: &IntSequence, stages: usize) -> Result<RankOneSpec> {
    let (n, qr) = quotients(seq, stages)?;
    let tail: f64 = qr[stages / 2..]
        .iter()
        .zip(&n[stages / 2 + 1..])
        .map(|((_, r), h1)| arith::rat_to_f64(&arith::rat_big(r, h1)))
        .sum();
    if tail >= 0.05 {
        return Err(Error::Infeasible(format!(
            "sum r_m/n_(m+1) over the second half is {tail:.4}, no summability evidence"
        )));
    }
    if qr[stages / 2..].iter().all(|(_, r)| r.is_zero()) {
        return Err(Error::Infeasible("r_m = 0 throughout the second half".into()));
    }
    let stages = qr
        .iter()
        .map(|(q, r)| {
            if r.is_zero() {
                return Stage { cuts: q.clone(), spacers: vec![] };
            }
            let a: BigUint = q / 3u32;
            let mut spacers = vec![SpacerGroup { after: a.clone(), count: BigUint::one() }];
            if r > &BigUint::one() {
                spacers.push(SpacerGroup { after: q.clone(), count: r - 1u32 });
            }
            if a == *q {
                spacers.truncate(1);
                spacers[0].count = r.clone();
            }
            Stage { cuts: q.clone(), spacers }
        })
        .collect();
    Ok(RankOneSpec { first_stage: 1, initial_height: n[0].clone(), stages, capped_stages: Vec::new() })
}

/// For every level `E` of `tau_m`, the exact `mu(T^{h_m} E \ E) / mu(E)`
/// against `1/s_m`, read on `tau_{m+1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RigidityBoundCheck {
    pub m: usize,
    pub s_m: usize,
    pub levels: usize,
    #[serde(with = "serde_big::rat")]
    pub max_ratio: BigRational,
    #[serde(with = "serde_big::rat")]
    pub min_ratio: BigRational,
    pub strict: bool,
    pub non_strict: bool,
}

pub fn rigidity_bound_check(spec: &RankOneSpec, m: usize) -> Result<RigidityBoundCheck> {
    let tower = build(spec, m + 1)?;
    let s = spec.copies(m)?.to_usize().unwrap();
    let hm = tower.height_at(m)?;
    let bound = arith::rat(1, s as i64);
    let mut max_ratio = BigRational::zero();
    let mut min_ratio: Option<BigRational> = None;
    for j in 0..hm {
        let e = tower.refine(m, &[j], m + 1)?;
        let b = delta_at(&tower, &e, m + 1, &hm.into())?;
        if b.unknown != 0 {
            return Err(Error::Invariant(format!("level {j}: T^(h_m) leaves tau_(m+1)")));
        }
        let ratio = &b.out_lower / &b.mu_e;
        if ratio > max_ratio {
            max_ratio = ratio.clone();
        }
        if min_ratio.as_ref().is_none_or(|r| ratio < *r) {
            min_ratio = Some(ratio);
        }
    }
    Ok(RigidityBoundCheck {
        m,
        s_m: s,
        levels: hm,
        strict: max_ratio < bound,
        non_strict: max_ratio <= bound,
        max_ratio,
        min_ratio: min_ratio.unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{big, pow_big, rat};
    use proptest::prelude::*;

    #[test]
    fn chacon_heights() {
        let t = build(&preset_chacon(9), 9).unwrap();
        for (m, &h) in t.heights().iter().enumerate() {
            assert_eq!(h as u64, (3u64.pow(m as u32 + 1) - 1) / 2);
        }
        assert_eq!(&t.heights()[..4], &[1, 4, 13, 40]);
    }

    #[test]
    fn concatenation_keeps_mass() {
        let spec = preset_concatenation(3, 6);
        let t = build(&spec, 7).unwrap();
        assert_eq!(t.heights(), &[3, 6, 12, 24, 48, 96, 192]);
        assert_eq!(t.total_mass(), &rat(1, 1));
        assert!(spec.measure_evidence().finite);
    }

    #[test]
    fn levels_are_disjoint_and_stacked() {
        let spec = preset_chacon(3);
        let t = build(&spec, 3).unwrap();
        let mut iv: Vec<_> = (0..t.height()).map(|j| t.level_interval(3, j).unwrap()).collect();
        for (lo, hi) in &iv {
            assert_eq!(hi - lo, *t.width());
        }
        iv.sort();
        for w in iv.windows(2) {
            assert!(w[0].1 <= w[1].0);
        }
        let total: BigRational = iv.iter().map(|(lo, hi)| hi - lo).sum();
        assert_eq!(&total, t.total_mass());
        assert_eq!(t.total_mass(), &rat(40, 27));
        // each stage-1 level is the union of its refined pieces
        for j in 0..4 {
            let (lo, hi) = t.level_interval(1, j).unwrap();
            let pieces = t.refine(1, &[j], 3).unwrap();
            let mut got: Vec<_> = pieces.ones().map(|p| t.level_interval(3, p).unwrap()).collect();
            got.sort();
            assert_eq!(got.first().unwrap().0, lo);
            assert_eq!(got.last().unwrap().1, hi);
            assert!(got.windows(2).all(|w| w[0].1 == w[1].0));
        }
    }

    #[test]
    fn budget_and_validation() {
        assert!(matches!(build_with_budget(&preset_chacon(9), 9, 1000), Err(Error::Budget(_))));
        let mut bad = preset_chacon(2);
        bad.stages[0].spacers[0].after = big(4);
        assert!(build(&bad, 1).is_err());
        assert!(RankOneSpec::from_json(r#"{"initial_height": 1, "stages": [{"cuts": 3}]}"#).is_ok());
        assert!(matches!(RankOneSpec::from_json("{"), Err(Error::Config(_))));
    }

    #[test]
    fn zero_shift_is_exact() {
        let t = build(&preset_chacon(6), 6).unwrap();
        let b = delta_mass(&t, 2, &[0, 3], &big(0), &rat(1, 1000)).unwrap();
        assert!(b.lower.is_zero() && b.upper.is_zero());
    }

    /// Positions of the base of tau_m inside tau_K from the Chacon recursion
    /// B_{k+1} = B_k B_k 1 B_k, kept separate from the tower code.
    fn chacon_base_positions(m: usize, big_k: usize) -> (Vec<usize>, usize) {
        let mut pos = vec![0usize];
        let mut h = (3usize.pow(m as u32 + 1) - 1) / 2;
        for _ in m..big_k {
            let mut next = pos.clone();
            next.extend(pos.iter().map(|p| p + h));
            next.extend(pos.iter().map(|p| p + 2 * h + 1));
            pos = next;
            h = 3 * h + 1;
        }
        (pos, h)
    }

    #[test]
    fn chacon_partial_rigidity() {
        let t = build(&preset_chacon(14), 14).unwrap();
        for m in 6..=9 {
            let hm = t.height_at(m).unwrap();
            let tol = rat(1, 50);
            // absolute width tol * mu(E) gives a ratio bracket narrower than tol / 2
            let b = delta_mass(&t, m, &[0], &big(hm as u64), &(&tol * t.width_at(m).unwrap())).unwrap();
            // oracle: same count from the word recursion
            let (pos, h) = chacon_base_positions(m, b.stage);
            let set: std::collections::HashSet<usize> = pos.iter().copied().collect();
            let hits = pos.iter().filter(|&&p| p + hm < h && set.contains(&(p + hm))).count();
            let unknown = pos.iter().filter(|&&p| p + hm >= h).count();
            assert_eq!((b.hits, b.unknown), (hits, unknown));
            let (lo, hi) = b.return_ratio();
            assert!(lo >= rat(1, 2) - &tol && hi <= rat(1, 2) + &tol, "m={m}: [{lo}, {hi}]");
        }
    }

    #[test]
    fn infrankone_on_factorials() {
        let spec = preset_infrankone(&IntSequence::factorial(), 7).unwrap();
        let h: Vec<u64> = spec.heights().iter().map(|x| x.to_u64().unwrap()).collect();
        assert_eq!(h, vec![1, 2, 6, 24, 120, 720, 5040, 40320]);
        assert_eq!(spec.capped_stages, vec![1]);
        for m in 2..=6 {
            assert_eq!(spec.copies(m).unwrap(), big(m as u64 - 1));
        }
        assert!(!spec.measure_evidence().finite);
    }

    #[test]
    fn infrankone_bound_is_an_equality() {
        // all of T^{h_m} E \ E is the top piece, which lands in the spacers
        let spec = preset_infrankone(&IntSequence::factorial(), 7).unwrap();
        for m in 2..=6 {
            let c = rigidity_bound_check(&spec, m).unwrap();
            assert_eq!(c.max_ratio, rat(1, c.s_m as i64));
            assert_eq!(c.min_ratio, c.max_ratio);
            assert!(c.non_strict && !c.strict);
        }
    }

    #[test]
    fn infrankone_exp_square() {
        let seq = IntSequence::ExpPoly { base: 2, exponent: vec![0, 0, 1] };
        let spec = preset_infrankone(&seq, 5).unwrap();
        for m in 1..=5 {
            assert_eq!(spec.height(m).unwrap(), pow_big(2, (m * m) as u64));
            let q = &spec.stages[m - 1].cuts + 0u32;
            let p_h: BigUint = spec.stages[m - 1].spacers.iter().map(|g| &g.count).sum();
            assert_eq!(q + p_h / spec.height(m).unwrap(), pow_big(2, 2 * m as u64 + 1));
        }
        assert!(matches!(preset_infrankone(&IntSequence::powers(2), 8), Err(Error::Infeasible(_))));
    }

    #[test]
    fn special_preset() {
        // n_{m+1} = (m+1) n_m + [m odd], so r_m = 1 on odd stages
        let mut n = vec![big(1)];
        for m in 1..12u64 {
            let next = n.last().unwrap() * (m + 1) + (m % 2);
            n.push(next);
        }
        let seq = IntSequence::explicit(n.clone()).unwrap();
        let spec = preset_specialinfrankone(&seq, 11).unwrap();
        assert_eq!(spec.heights(), n);
        assert!(spec.stages[1].spacers.is_empty());
        assert_eq!(spec.stages[1].cuts, big(3));
        assert_eq!(spec.stages[2].spacers, vec![SpacerGroup { after: big(1), count: big(1) }]);
        assert!(spec.measure_evidence().finite);
        assert!(preset_specialinfrankone(&IntSequence::factorial(), 11).is_err());
    }

    proptest! {
        #[test]
        fn brackets_nest_and_preserve_mass(level in 0usize..13, n in 0u64..2000) {
            let t = build(&preset_chacon(8), 8).unwrap();
            let mut prev: Option<DeltaBracket> = None;
            for m in 2..=8 {
                let e = t.refine(2, &[level], m).unwrap();
                let b = delta_at(&t, &e, m, &big(n)).unwrap();
                prop_assert_eq!(&b.mu_e, &rat(1, 9));
                prop_assert!(b.lower <= b.upper && b.lower >= BigRational::zero());
                // mu(T^n E Δ E) = 2 mu(T^n E \ E)
                prop_assert_eq!(&b.lower, &(&b.out_lower * rat(2, 1)));
                if let Some(p) = &prev {
                    prop_assert!(p.lower <= b.lower && b.upper <= p.upper);
                }
                prev = Some(b);
            }
        }

        #[test]
        fn rigid_times_stay_rigid_on_coarser_towers(m in 3usize..8, k in 1usize..3) {
            // h_m is eps-rigid for tau_m, hence for the coarser tau_k
            let spec = preset_infrankone(&IntSequence::factorial(), 8).unwrap();
            let t = build(&spec, m + 1).unwrap();
            let hm = big(t.height_at(m).unwrap() as u64);
            let worst = |stage: usize| -> BigRational {
                (0..t.height_at(stage).unwrap())
                    .map(|j| {
                        let e = t.refine(stage, &[j], m + 1).unwrap();
                        let b = delta_at(&t, &e, m + 1, &hm).unwrap();
                        &b.upper / &b.mu_e
                    })
                    .max()
                    .unwrap()
            };
            prop_assert!(worst(k) <= worst(m));
        }
    }
}
