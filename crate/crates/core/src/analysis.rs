//! Config-driven runs: parse an [`AnalysisConfig`], execute each analysis,
//! collect a keyed [`Report`] and write it as JSON, CSV tables or plot data.
//!
//! Data files never contain timings; those go to a separate metadata file so
//! that identical configs give byte-identical data.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{self, serde_big::Nat, serde_big::Rat, Bits};
use crate::error::{Error, Result};
use crate::measures::{self, CircleMeasure, MeasureSpec, Truncation};
use crate::obstruct::{self, SearchParams};
use crate::odometer::{self, CocycleSpec, OdometerSystem};
use crate::rankone::{self, RankOneSpec};
use crate::rotation::{self, ContinuedFraction, DensityRule, Expansion, GrowthParams, GrowthRule};
use crate::sequences::{self, IntSequence, RatioRule};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    /// Fixed-point bits for sampled reals; `None` picks the required minimum.
    #[serde(default)]
    pub precision_bits: Option<u64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: Rat,
}

fn default_horizon() -> u64 {
    40
}

fn default_tolerance() -> Rat {
    Rat(arith::rat(1, 1_000_000))
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { horizon: default_horizon(), precision_bits: None, tolerance: default_tolerance() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub sequence: Option<IntSequence>,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub seed: u64,
    /// Output directory used by the command-line front end.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumsetQuery {
    pub coeffs: Vec<i64>,
    pub n: u64,
    #[serde(default = "default_sumset_budget")]
    pub budget: u64,
}

fn default_sumset_budget() -> u64 {
    100_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaQuery {
    pub k: usize,
    pub levels: Vec<usize>,
    pub n: Nat,
    pub tol: Rat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum TowerChoice {
    Chacon {
        stages: usize,
    },
    Concatenation {
        initial_height: u64,
        stages: usize,
    },
    /// Uses the config sequence.
    Infrankone {
        stages: usize,
    },
    /// Uses the config sequence.
    Specialinfrankone {
        stages: usize,
    },
    Custom {
        spec: RankOneSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlowQuery {
    pub rule: DensityRule,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    #[serde(default = "default_doublings")]
    pub max_doublings: u32,
}

fn default_k_max() -> u32 {
    6
}

fn default_doublings() -> u32 {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthQuery {
    pub psi: GrowthRule,
    #[serde(default = "default_l_max")]
    pub l_max: u32,
    #[serde(default = "default_max_terms")]
    pub max_terms: usize,
}

fn default_l_max() -> u32 {
    4
}

fn default_max_terms() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonrecQuery {
    /// Cylinders of this depth form the cyclic system.
    pub depth: usize,
    /// `A` is the base cylinder of this depth.
    pub base_depth: usize,
    #[serde(default = "default_budget")]
    pub budget: Rat,
    #[serde(default = "default_selected")]
    pub max_selected: usize,
}

fn default_budget() -> Rat {
    Rat(arith::rat(1, 100))
}

fn default_selected() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentQuery {
    pub first: Nat,
    pub ratios: Vec<Rat>,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "analysis", rename_all = "snake_case", deny_unknown_fields)]
pub enum Analysis {
    Growth {
        #[serde(default)]
        samples: Vec<Nat>,
        #[serde(default = "default_sidon")]
        sidon_c: f64,
    },
    Obstruct {
        #[serde(default = "default_obstruct_k")]
        k_max: usize,
        #[serde(default = "default_obstruct_c")]
        c_max: i64,
        #[serde(default = "default_window")]
        window: u64,
        #[serde(default = "default_start")]
        start: u64,
        #[serde(default)]
        sumset: Option<SumsetQuery>,
        #[serde(default)]
        weyl_samples: Option<usize>,
    },
    Measure {
        measure: MeasureSpec,
        #[serde(default = "default_start")]
        from: u64,
        #[serde(default)]
        to: Option<u64>,
        #[serde(default)]
        truncation: Truncation,
        #[serde(default)]
        wiener: Option<u64>,
        #[serde(default = "default_atom_ks")]
        atom_bounds: Vec<usize>,
    },
    Rankone {
        tower: TowerChoice,
        #[serde(default)]
        stage: Option<usize>,
        #[serde(default)]
        delta: Vec<DeltaQuery>,
        #[serde(default)]
        rigidity_bound: Vec<usize>,
        #[serde(default)]
        chacon: Option<usize>,
    },
    Rotation {
        alpha: ContinuedFraction,
        #[serde(default = "default_convergents")]
        convergents: usize,
        #[serde(default)]
        syndetic_eps: Option<Rat>,
        #[serde(default)]
        slow: Option<SlowQuery>,
        #[serde(default)]
        bounded_growth: Option<GrowthQuery>,
    },
    Odometer {
        #[serde(default = "default_ratios")]
        ratios: RatioRule,
        #[serde(default = "default_levels")]
        levels: usize,
        #[serde(default = "default_m0")]
        m0_max: usize,
        #[serde(default = "default_cobound")]
        cobound_terms: usize,
        #[serde(default)]
        nonrec: Option<NonrecQuery>,
        #[serde(default)]
        experiment: Option<ExperimentQuery>,
    },
}

fn default_sidon() -> f64 {
    2.0
}
fn default_obstruct_k() -> usize {
    4
}
fn default_obstruct_c() -> i64 {
    8
}
fn default_window() -> u64 {
    16
}
fn default_start() -> u64 {
    1
}
fn default_atom_ks() -> Vec<usize> {
    vec![10, 50, 100, 200]
}
fn default_convergents() -> usize {
    40
}
fn default_ratios() -> RatioRule {
    RatioRule::Arithmetic { start: 2, step: 1 }
}
fn default_levels() -> usize {
    40
}
fn default_m0() -> usize {
    30
}
fn default_cobound() -> usize {
    1000
}

impl Analysis {
    pub fn kind(&self) -> &'static str {
        match self {
            Analysis::Growth { .. } => "growth",
            Analysis::Obstruct { .. } => "obstruct",
            Analysis::Measure { .. } => "measure",
            Analysis::Rankone { .. } => "rankone",
            Analysis::Rotation { .. } => "rotation",
            Analysis::Odometer { .. } => "odometer",
        }
    }

    /// What the entry checks, in words.
    pub fn checks(&self) -> &'static str {
        match self {
            Analysis::Growth { .. } => "densities, tail gaps and ratio growth of the sequence",
            Analysis::Obstruct { .. } => {
                "constant linear forms on consecutive terms, divergence of gaps, sumset density, Weyl averages"
            }
            Analysis::Measure { .. } => {
                "spectral criterion: 1 - Re nu^(n_m) along the sequence, Wiener averages, atom mass bounds"
            }
            Analysis::Rankone { .. } => {
                "cutting-and-stacking towers: heights, spacer mass, T^n E Δ E brackets, Chacon non-recurrence"
            }
            Analysis::Rotation { .. } => {
                "continued fraction denominators as rigidity times, syndeticity, constructive rates"
            }
            Analysis::Odometer { .. } => {
                "odometer rigidity along heights, cocycle norm bound, coboundary test, non-recurrent set"
            }
        }
    }
}

impl AnalysisConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: AnalysisConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.budgets.horizon == 0 {
            return Err(Error::Config("budgets.horizon must be positive".into()));
        }
        if self.budgets.precision_bits == Some(0) {
            return Err(Error::Config("budgets.precision_bits must be positive".into()));
        }
        if self.budgets.tolerance.0 <= BigRational::from_integer(0.into()) {
            return Err(Error::Config("budgets.tolerance must be positive".into()));
        }
        if let Some(seq) = &self.sequence {
            seq.validate().map_err(|e| Error::Config(format!("sequence: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Emitted by the plot-csv format.
    #[serde(default)]
    pub plot: bool,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), plot: false }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryError {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub analysis: String,
    pub checks: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<EntryError>,
    pub result: Value,
    #[serde(default)]
    pub tables: BTreeMap<String, Table>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub seed: u64,
    pub budgets: Budgets,
    pub entries: BTreeMap<String, Entry>,
}

impl Report {
    /// Worst exit code over failed entries (0 when all succeeded).
    pub fn exit_code(&self) -> i32 {
        self.entries.values().filter_map(|e| e.error.as_ref().map(|x| x.exit_code)).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub schema_version: u32,
    pub wall_time_ms: BTreeMap<String, f64>,
    pub total_ms: f64,
    pub threads: usize,
}

struct Output {
    result: Value,
    tables: BTreeMap<String, Table>,
}

impl Output {
    fn new(result: Value) -> Self {
        Output { result, tables: BTreeMap::new() }
    }

    fn table(mut self, name: &str, t: Table) -> Self {
        self.tables.insert(name.to_string(), t);
        self
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn need_seq(cfg: &AnalysisConfig) -> Result<&IntSequence> {
    cfg.sequence.as_ref().ok_or_else(|| Error::Config("this analysis needs a top-level sequence".into()))
}

/// Run every analysis (concurrently), keyed `NN-kind` in config order.
/// Failures are recorded per entry.
pub fn run(cfg: &AnalysisConfig) -> (Report, RunMetadata) {
    let start = Instant::now();
    let outcomes: Vec<(Result<Output>, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg
            .analyses
            .iter()
            .map(|a| {
                s.spawn(move || {
                    let t = Instant::now();
                    let r = run_one(cfg, a);
                    (r, t.elapsed().as_secs_f64() * 1000.0)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| (Err(Error::Invariant("analysis panicked".into())), 0.0)))
            .collect()
    });
    let mut entries = BTreeMap::new();
    let mut wall = BTreeMap::new();
    for (i, (a, (out, ms))) in cfg.analyses.iter().zip(outcomes).enumerate() {
        let key = format!("{:02}-{}", i + 1, a.kind());
        wall.insert(key.clone(), ms);
        let entry = match out {
            Ok(o) => Entry {
                analysis: a.kind().into(),
                checks: a.checks().into(),
                status: "ok".into(),
                error: None,
                result: o.result,
                tables: o.tables,
            },
            Err(e) => Entry {
                analysis: a.kind().into(),
                checks: a.checks().into(),
                status: "error".into(),
                error: Some(EntryError { kind: e.kind().into(), message: e.to_string(), exit_code: e.exit_code() }),
                result: Value::Null,
                tables: BTreeMap::new(),
            },
        };
        entries.insert(key, entry);
    }
    let report = Report { schema_version: SCHEMA_VERSION, seed: cfg.seed, budgets: cfg.budgets.clone(), entries };
    let meta = RunMetadata {
        schema_version: SCHEMA_VERSION,
        wall_time_ms: wall,
        total_ms: start.elapsed().as_secs_f64() * 1000.0,
        threads: cfg.analyses.len(),
    };
    (report, meta)
}

fn run_one(cfg: &AnalysisConfig, a: &Analysis) -> Result<Output> {
    let horizon = cfg.budgets.horizon;
    match a {
        Analysis::Growth { samples, sidon_c } => {
            let seq = need_seq(cfg)?;
            let samples: Vec<BigUint> = samples.iter().map(|n| n.0.clone()).collect();
            let g = sequences::growth_report(seq, &samples, horizon, *sidon_c)?;
            let mut t = Table::new(&["m", "n_m"]);
            for (i, n) in seq.prefix(horizon as usize)?.iter().enumerate() {
                t.push(vec![(i + 1).to_string(), n.to_string()]);
            }
            Ok(Output::new(to_json(&g)).table("terms", t))
        }
        Analysis::Obstruct { k_max, c_max, window, start, sumset, weyl_samples } => {
            let seq = need_seq(cfg)?;
            let p = SearchParams { k_max: *k_max, c_max: *c_max, window: *window, start: *start, ..Default::default() };
            let witness = obstruct::differencing_obstruction(seq, &p)?;
            let gaps = obstruct::gap_divergence(seq, horizon)?;
            let sumset =
                sumset.as_ref().map(|q| obstruct::sumset_density_probe(seq, &q.coeffs, q.n, q.budget)).transpose()?;
            let weyl = weyl_samples
                .map(|n| obstruct::weyl_profile(seq, n, cfg.seed, horizon, 0.5, cfg.budgets.precision_bits))
                .transpose()?;
            let mut t = Table::new(&["M", "min_tail_gap"]);
            for (m, g) in &gaps.checkpoints {
                t.push(vec![m.to_string(), g.0.to_string()]);
            }
            Ok(Output::new(json!({
                "linear_form": witness,
                "gap_divergence": gaps,
                "sumset": sumset,
                "weyl": weyl,
            }))
            .table("gap_checkpoints", t))
        }
        Analysis::Measure { measure, from, to, truncation, wiener, atom_bounds } => {
            let seq = need_seq(cfg)?;
            let nu = CircleMeasure::from_spec(measure)?;
            let to = to.unwrap_or(horizon);
            let profile = measures::rigidity_gap_profile(&nu, seq, *from, to, *truncation)?;
            let mut gaps = Table::new(&["m", "n_m", "gap_lower", "gap_upper"]);
            gaps.plot = true;
            for g in &profile {
                gaps.push(vec![g.m.to_string(), g.n_m.to_string(), fmt_f64(g.gap_lower), fmt_f64(g.gap_upper)]);
            }
            let wiener = wiener.map(|n| measures::wiener_average(&nu, n, None)).transpose()?;
            let mut out = json!({ "kind": nu.kind(), "gap_profile": profile, "wiener_average": wiener });
            let mut o_tables = BTreeMap::new();
            o_tables.insert("gaps".to_string(), gaps);
            match &nu {
                CircleMeasure::Riesz(r) => {
                    let bounds = atom_bounds.iter().map(|&k| r.atom_bound(k)).collect::<Result<Vec<_>>>()?;
                    let mut t = Table::new(&["K", "eps_K", "eps_K_f64"]);
                    for b in &bounds {
                        t.push(vec![b.k.to_string(), arith::fmt_rational(&b.exact), fmt_f64(b.value)]);
                    }
                    let decreasing = bounds.windows(2).all(|w| w[1].exact < w[0].exact);
                    out["atom_bounds"] = to_json(&bounds);
                    out["atom_bounds_decreasing"] = json!(decreasing);
                    o_tables.insert("atom_bounds".to_string(), t);
                }
                CircleMeasure::CantorArc(c) => {
                    out["level_checks"] = to_json(&c.level_checks());
                    out["start"] = json!(c.start());
                }
                CircleMeasure::OdometerBlock(b) => {
                    let nu_d = (0..b.blocks().min(6)).map(|k| b.nu_d(k).map(Rat)).collect::<Result<Vec<_>>>()?;
                    out["nu_d"] = to_json(&nu_d);
                }
                CircleMeasure::Atomic(_) => {}
            }
            Ok(Output { result: out, tables: o_tables })
        }
        Analysis::Rankone { tower, stage, delta, rigidity_bound, chacon } => {
            let spec = match tower {
                TowerChoice::Chacon { stages } => rankone::preset_chacon(*stages),
                TowerChoice::Concatenation { initial_height, stages } => {
                    rankone::preset_concatenation(*initial_height, *stages)
                }
                TowerChoice::Infrankone { stages } => rankone::preset_infrankone(need_seq(cfg)?, *stages)?,
                TowerChoice::Specialinfrankone { stages } => {
                    rankone::preset_specialinfrankone(need_seq(cfg)?, *stages)?
                }
                TowerChoice::Custom { spec } => spec.clone(),
            };
            spec.validate()?;
            let heights = spec.heights();
            let m = match stage {
                Some(m) => *m,
                None => {
                    let fit = heights.iter().take_while(|h| **h <= BigUint::from(rankone::MAX_LEVELS)).count();
                    if fit == 0 {
                        return Err(Error::Budget("initial tower exceeds the level budget".into()));
                    }
                    spec.first_stage + fit - 1
                }
            };
            let t = rankone::build(&spec, m)?;
            let mut ht = Table::new(&["m", "h_m"]);
            for (i, h) in heights.iter().enumerate() {
                ht.push(vec![(spec.first_stage + i).to_string(), h.to_string()]);
            }
            let deltas = delta
                .iter()
                .map(|q| rankone::delta_mass(&t, q.k, &q.levels, &q.n.0, &q.tol.0))
                .collect::<Result<Vec<_>>>()?;
            let bounds =
                rigidity_bound.iter().map(|&m| rankone::rigidity_bound_check(&spec, m)).collect::<Result<Vec<_>>>()?;
            let mut out = json!({
                "spec": spec,
                "tower": t.summary(),
                "measure": spec.measure_evidence(),
                "delta": deltas,
                "rigidity_bound": bounds,
            });
            let mut o = Output::new(Value::Null).table("heights", ht);
            if let Some(k_max) = chacon {
                let mut ct = Table::new(&["k", "m", "shift", "disjoint"]);
                for k in 2..=*k_max {
                    for m in 1..k {
                        let ok = rankone::chacon_nonrecurrence_check(k, m)?;
                        ct.push(vec![
                            k.to_string(),
                            m.to_string(),
                            (rankone::chacon_height(m) - 1).to_string(),
                            ok.to_string(),
                        ]);
                    }
                }
                let w = rankone::chacon_word(2.min(*k_max))?;
                out["chacon_word"] = to_json(&rankone::ChaconSummary::from(&w));
                out["chacon_control_h1_k3"] = json!(rankone::chacon_shift_check(3, rankone::chacon_height(1))?);
                o = o.table("chacon", ct);
            }
            o.result = out;
            Ok(o)
        }
        Analysis::Rotation { alpha, convergents, syndetic_eps, slow, bounded_growth } => {
            let mut e = Expansion::new(alpha.clone());
            let mut t = Table::new(&["n", "p_n", "q_n", "q_n_norm_ok", "determinant_ok", "q_ratio_ok"]);
            let mut all = true;
            for n in 0..=*convergents {
                let lac2 = rotation::check_lac2(&mut e, n)?;
                let det = rotation::determinant_holds(&mut e, n)?;
                let ratio = if n + 2 <= *convergents { e.q(n + 2)? >= e.q(n)? * 2u32 } else { true };
                all &= lac2 && det && ratio;
                t.push(vec![
                    n.to_string(),
                    e.p(n)?.to_string(),
                    e.q(n)?.to_string(),
                    lac2.to_string(),
                    det.to_string(),
                    ratio.to_string(),
                ]);
            }
            let synd = syndetic_eps.as_ref().map(|eps| rotation::syndeticity_constant(alpha, &eps.0)).transpose()?;
            let slow = slow
                .as_ref()
                .map(|q| rotation::slow_rigidity_sequence(alpha, &q.rule, q.k_max, q.max_doublings))
                .transpose()?;
            let growth = bounded_growth
                .as_ref()
                .map(|q| {
                    let p = GrowthParams { l_max: q.l_max, max_terms: q.max_terms, ..Default::default() };
                    rotation::bounded_growth_rigidity_sequence(alpha, &q.psi, &p)
                })
                .transpose()?;
            Ok(Output::new(json!({
                "alpha": alpha,
                "convergent_checks_hold": all,
                "syndeticity": synd,
                "slow": slow,
                "bounded_growth": growth,
            }))
            .table("convergents", t))
        }
        Analysis::Odometer { ratios, levels, m0_max, cobound_terms, nonrec, experiment } => {
            let sys = OdometerSystem::from_rule(ratios, (*levels).max(cobound_terms + 1))?;
            let f = CocycleSpec::good_function(&sys, *levels)?;
            let trunc = f.terms.last().map(|t| t.m).unwrap_or(0);
            let mut nt = Table::new(&["m0", "norm_lower", "norm_upper", "bound", "holds"]);
            let mut norms = Vec::new();
            for m0 in 0..=(*m0_max).min(trunc.saturating_sub(1)) {
                let b = odometer::cocycle_norm_bound(&sys, &f, m0, trunc)?;
                nt.push(vec![
                    m0.to_string(),
                    fmt_f64(arith::rat_to_f64(&b.norm_lower)),
                    fmt_f64(arith::rat_to_f64(&b.norm_upper)),
                    fmt_f64(arith::rat_to_f64(&b.bound)),
                    b.holds.to_string(),
                ]);
                norms.push(json!({ "m0": m0, "holds": b.holds, "precision_bits": b.precision_bits }));
            }
            let cob = odometer::coboundary_test(&sys, &CocycleSpec::good_function(&sys, *cobound_terms)?)?;
            let mut dt = Table::new(&["t", "m", "r", "delta"]);
            for t0 in 0..4.min(sys.levels() - 1) {
                for m in 1..=8.min(sys.levels()) {
                    let r = sys.height(m)?;
                    dt.push(vec![
                        t0.to_string(),
                        m.to_string(),
                        r.to_string(),
                        arith::fmt_rational(&sys.cylinder_delta(&r, t0)?),
                    ]);
                }
            }
            let nonrec = nonrec.as_ref().map(|q| odometer_nonrec(&sys, q)).transpose()?;
            let exp = experiment
                .as_ref()
                .map(|q| {
                    let r: Vec<BigRational> = q.ratios.iter().map(|x| x.0.clone()).collect();
                    odometer::ratio_experiment(&q.first.0, &r, q.count)
                })
                .transpose()?;
            Ok(Output::new(json!({
                "ratios": &sys.ratios()[..(*levels).min(sys.levels())],
                "norm_bounds": norms,
                "norm_bound_holds": norms.iter().all(|v| v["holds"] == json!(true)),
                "coboundary": cob,
                "nonrecurrent_set": nonrec,
                "experiment": exp,
            }))
            .table("norm_bounds", nt)
            .table("cylinder_delta", dt))
        }
    }
}

/// The non-recurrent set construction on cylinders of depth `q.depth`, with
/// `A` the base cylinder of depth `q.base_depth` and the heights as sequence.
pub fn odometer_nonrec(sys: &OdometerSystem, q: &NonrecQuery) -> Result<Value> {
    if q.base_depth == 0 || q.base_depth >= q.depth {
        return Err(Error::InvalidParameter("need 1 <= base_depth < depth".into()));
    }
    let (cyc, _) = sys.cylinder_system(q.depth)?;
    let step = sys.height(q.base_depth)?.to_usize().expect("fits below n_depth");
    let a = Bits::from_positions(cyc.size(), (0..cyc.size()).step_by(step));
    let horizon = sys.levels();
    let heights = (1..=horizon).map(|t| sys.height(t)).collect::<Result<Vec<_>>>()?;
    let seq = IntSequence::explicit(heights)?;
    let c = rankone::nonrecurrent_set_from_rigidity(&cyc, &a, &seq, &q.budget.0, horizon, q.max_selected)?;
    Ok(json!({
        "depth": q.depth,
        "base_depth": q.base_depth,
        "mass": Rat(c.mass.clone()),
        "a_mass": Rat(c.a_mass.clone()),
        "delta_sum": Rat(c.delta_sum.clone()),
        "selected": c.selected,
        "positions": c.positions.len(),
        "verified": c.verified,
    }))
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.17e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    PlotCsv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" | "csv-tables" => Ok(Format::Csv),
            "plot-csv" => Ok(Format::PlotCsv),
            _ => Err(Error::Config(format!("unknown format '{s}' (json, csv, plot-csv)"))),
        }
    }
}

fn write_table(path: &Path, t: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(&t.columns).map_err(csv_err)?;
    for r in &t.rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Invariant(format!("csv: {other:?}")),
    }
}

/// Write the report's data files into `dir`; returns the paths written.
pub fn emit(report: &Report, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    match format {
        Format::Json => {
            let p = dir.join("report.json");
            std::fs::write(&p, to_json_string(report) + "\n")?;
            written.push(p);
        }
        Format::Csv => {
            let mut summary = Table::new(&["key", "analysis", "status", "error"]);
            for (key, e) in &report.entries {
                let msg = e.error.as_ref().map(|x| x.message.clone()).unwrap_or_default();
                summary.push(vec![key.clone(), e.analysis.clone(), e.status.clone(), msg]);
                for (name, t) in &e.tables {
                    let p = dir.join(format!("{key}.{name}.csv"));
                    write_table(&p, t)?;
                    written.push(p);
                }
            }
            let p = dir.join("summary.csv");
            write_table(&p, &summary)?;
            written.push(p);
        }
        Format::PlotCsv => {
            for (key, e) in &report.entries {
                for (name, t) in e.tables.iter().filter(|(_, t)| t.plot) {
                    let p = dir.join(format!("{key}.{name}.plot.csv"));
                    write_table(&p, t)?;
                    written.push(p);
                }
            }
        }
    }
    written.sort();
    Ok(written)
}

pub fn to_json_string(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn write_metadata(meta: &RunMetadata, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let p = dir.join("metadata.json");
    std::fs::write(&p, serde_json::to_string_pretty(meta).expect("metadata serializes") + "\n")?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(s: &str) -> AnalysisConfig {
        AnalysisConfig::from_json(s).unwrap()
    }

    #[test]
    fn empty_config_gives_empty_report() {
        let (r, _) = run(&cfg("{}"));
        assert!(r.entries.is_empty());
        assert_eq!(r.exit_code(), 0);
        assert_eq!(r.schema_version, SCHEMA_VERSION);
    }

    #[test]
    fn config_errors_name_the_place() {
        let e = AnalysisConfig::from_json("{\n  \"budgets\": {\"horizon\": 10, \"bogus\": 1}\n}").unwrap_err();
        let msg = e.to_string();
        assert!(matches!(e, Error::Config(_)));
        assert!(msg.contains("bogus") && msg.contains("line 2"), "{msg}");
        assert!(AnalysisConfig::from_json(r#"{"budgets": {"horizon": 0}}"#).is_err());
        assert!(AnalysisConfig::from_json(r#"{"analyses": [{"analysis": "nope"}]}"#).is_err());
    }

    #[test]
    fn riesz_config_reports_profile_and_atom_bounds() {
        let c = cfg(r#"{
            "sequence": {"kind": "powers", "base": 2},
            "budgets": {"horizon": 12},
            "analyses": [{"analysis": "measure",
                          "measure": {"kind": "riesz", "factors": {"family": "geometric", "base": 2, "weights": {"rule": "harmonic"}}},
                          "from": 5, "truncation": {"rule": "index_plus", "offset": 60}}]
        }"#);
        let (r, _) = run(&c);
        let e = &r.entries["01-measure"];
        assert_eq!(e.status, "ok", "{:?}", e.error);
        assert_eq!(e.tables["gaps"].columns, vec!["m", "n_m", "gap_lower", "gap_upper"]);
        assert_eq!(e.tables["gaps"].rows.len(), 8);
        assert_eq!(e.result["atom_bounds_decreasing"], json!(true));
        assert_eq!(e.tables["atom_bounds"].rows.len(), 4);
    }

    #[test]
    fn shifted_powers_obstruction() {
        let c = cfg(r#"{
            "sequence": {"kind": "shifted", "base": {"kind": "powers", "base": 2}, "offset": 1},
            "analyses": [{"analysis": "obstruct"}]
        }"#);
        let (r, _) = run(&c);
        let w = &r.entries["01-obstruct"].result["linear_form"];
        let coeffs: Vec<i64> = serde_json::from_value(w["coefficients"].clone()).unwrap();
        let d: String = serde_json::from_value(w["d"].clone()).unwrap();
        assert_eq!(d, "1");
        assert!(coeffs == vec![2, -1] || coeffs == vec![-2, 1]);
    }

    #[test]
    fn failures_are_per_entry() {
        let c = cfg(
            r#"{"analyses": [{"analysis": "growth"}, {"analysis": "rankone", "tower": {"preset": "chacon", "stages": 3}}]}"#,
        );
        let (r, _) = run(&c);
        assert_eq!(r.entries["01-growth"].status, "error");
        assert_eq!(r.entries["02-rankone"].status, "ok");
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn emit_formats_are_stable() {
        let c = cfg(r#"{
            "sequence": {"kind": "powers", "base": 2},
            "budgets": {"horizon": 8},
            "analyses": [
                {"analysis": "growth"},
                {"analysis": "measure", "measure": {"kind": "atomic", "atoms": [{"angle": "1/3", "mass": "1/2"}, {"angle": "0", "mass": "1/2"}]}},
                {"analysis": "odometer", "levels": 12, "m0_max": 5, "cobound_terms": 50,
                 "nonrec": {"depth": 5, "base_depth": 2}}
            ]
        }"#);
        let dir = tempfile::tempdir().unwrap();
        let (a, meta) = run(&c);
        let (b, _) = run(&c);
        assert_eq!(to_json_string(&a), to_json_string(&b));
        for f in [Format::Json, Format::Csv, Format::PlotCsv] {
            let d1 = dir.path().join("a");
            let d2 = dir.path().join("b");
            let p1 = emit(&a, f, &d1).unwrap();
            let p2 = emit(&b, f, &d2).unwrap();
            assert_eq!(p1.len(), p2.len());
            for (x, y) in p1.iter().zip(&p2) {
                assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
            }
        }
        let plot = std::fs::read_to_string(dir.path().join("a/02-measure.gaps.plot.csv")).unwrap();
        assert!(plot.starts_with("m,n_m,gap_lower,gap_upper\n"));
        let back: Report =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/report.json")).unwrap()).unwrap();
        assert_eq!(back, a);
        let odo = &a.entries["03-odometer"];
        assert_eq!(odo.status, "ok", "{:?}", odo.error);
        assert_eq!(odo.result["nonrecurrent_set"]["verified"], json!(true));
        assert!(odo.tables["cylinder_delta"].rows.iter().any(|r| r[3].contains('/')));
        assert!(write_metadata(&meta, dir.path()).unwrap().exists());
        assert!("svg".parse::<Format>().is_err());
    }
}
