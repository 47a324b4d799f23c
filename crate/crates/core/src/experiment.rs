//! Experiment specs, seeded demand generation, replicated runs and report
//! files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_solve, optimality_gap, ExactLimits, ExactResult};
use crate::net::{demands_to_documents, load_demands, Demand, DemandDocument, DemandId, NodeId, Topology};
use crate::order::DemandOrder;
use crate::phys::ImpairmentParams;
use crate::planner::{run_plan, DemandOutcome, PlanResult, PlanSettings, Policy};
use crate::validate::StateDump;

pub const REPORT_SCHEMA: &str = "eon-rsa/report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoSpec {
    Fixed(usize),
    Uniform { min: usize, max: usize },
}

impl RhoSpec {
    /// Parses `"5"` or `"1-5"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Experiment(format!("bad rho spec {s:?} (expected N or MIN-MAX)"));
        let spec = match s.split_once('-') {
            Some((a, b)) => RhoSpec::Uniform {
                min: a.trim().parse().map_err(|_| bad())?,
                max: b.trim().parse().map_err(|_| bad())?,
            },
            None => RhoSpec::Fixed(s.trim().parse().map_err(|_| bad())?),
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        match *self {
            RhoSpec::Fixed(0) => Err(Error::Experiment("rho must be at least 1".into())),
            RhoSpec::Uniform { min, max } if min == 0 || min > max => {
                Err(Error::Experiment(format!("bad rho range {min}-{max}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub count: usize,
    pub rho: RhoSpec,
    pub seed: u64,
}

/// Uniform ordered (source, destination) pairs with `source != destination`,
/// ids `0..count`. Each demand consumes the same random draws whatever
/// `count` is, so a smaller set is always a prefix of a larger one.
pub fn generate_demands(topology: &Topology, count: usize, rho: RhoSpec, seed: u64) -> Result<Vec<Demand>> {
    rho.check()?;
    let n = topology.node_count();
    if n < 2 {
        return Err(Error::Experiment("demand generation needs at least two nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let s = rng.gen_range(0..n);
            let mut d = rng.gen_range(0..n - 1);
            if d >= s {
                d += 1;
            }
            let r = match rho {
                RhoSpec::Fixed(r) => r,
                RhoSpec::Uniform { min, max } => rng.gen_range(min..=max),
            };
            Demand::new(i as DemandId, NodeId(s), NodeId(d), r)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Plan,
    Exact,
    GapStudy,
    Sweep,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Plan => "plan",
            Mode::Exact => "exact",
            Mode::GapStudy => "gap-study",
            Mode::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_orderings() -> Vec<DemandOrder> {
    vec![DemandOrder::Mcdf]
}
fn default_policies() -> Vec<Policy> {
    vec![Policy::Proposed]
}
fn default_impairments() -> Vec<bool> {
    vec![true]
}
fn one() -> usize {
    1
}
fn default_slots() -> usize {
    40
}
fn default_k() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// File path or `builtin:six-node` / `builtin:nsfnet`.
    pub topology: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demands: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    pub mode: Mode,
    #[serde(default = "default_orderings")]
    pub orderings: Vec<DemandOrder>,
    #[serde(default = "default_policies")]
    pub policies: Vec<Policy>,
    #[serde(default = "default_impairments")]
    pub impairments: Vec<bool>,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default = "default_slots")]
    pub slots: usize,
    #[serde(default = "default_k")]
    pub k_paths: usize,
    /// Demand counts for sweep mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep_counts: Vec<usize>,
    #[serde(default)]
    pub exact_limits: ExactLimits,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentSpec {
    pub fn new(topology: impl Into<String>, mode: Mode) -> Self {
        ExperimentSpec {
            topology: topology.into(),
            params: None,
            demands: None,
            generator: None,
            mode,
            orderings: default_orderings(),
            policies: default_policies(),
            impairments: default_impairments(),
            replications: 1,
            slots: default_slots(),
            k_paths: default_k(),
            sweep_counts: Vec::new(),
            exact_limits: ExactLimits::default(),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Experiment(format!("bad experiment spec: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Experiment(m.into()));
        match (&self.demands, &self.generator) {
            (Some(_), Some(_)) => return err("give either a demands file or a generator, not both"),
            (None, None) => return err("no demand source: give a demands file or a generator"),
            _ => {}
        }
        if self.replications == 0 {
            return err("replications must be at least 1");
        }
        if self.slots == 0 || self.k_paths == 0 {
            return err("slots and k_paths must be positive");
        }
        if self.orderings.is_empty() || self.policies.is_empty() || self.impairments.is_empty() {
            return err("orderings, policies and impairments must be non-empty");
        }
        if let Some(g) = &self.generator {
            g.rho.check()?;
            if g.count == 0 && self.mode != Mode::Sweep {
                return err("generator count must be at least 1");
            }
        }
        if self.mode == Mode::Sweep {
            if self.generator.is_none() {
                return err("sweep mode needs a generator");
            }
            if self.sweep_counts.is_empty() {
                return err("sweep mode needs sweep_counts");
            }
        }
        Ok(())
    }

    /// Loads topology, parameters and any demand file, resolving relative
    /// paths against `base`.
    pub fn load_inputs(&self, base: &Path) -> Result<Inputs> {
        self.validate()?;
        let resolve = |p: &str| -> PathBuf {
            let path = Path::new(p);
            if p.starts_with("builtin:") || path.is_absolute() {
                path.to_path_buf()
            } else {
                base.join(path)
            }
        };
        let topology = Topology::load(&resolve(&self.topology))?;
        let params = match &self.params {
            Some(p) => ImpairmentParams::load(&resolve(p))?,
            None => ImpairmentParams::default(),
        };
        let demands = match &self.demands {
            Some(p) => Some(load_demands(&topology, &resolve(p))?),
            None => None,
        };
        Ok(Inputs { topology, params, demands })
    }
}

#[derive(Debug, Clone)]
pub struct Inputs {
    pub topology: Topology,
    pub params: ImpairmentParams,
    pub demands: Option<Vec<Demand>>,
}

/// Identifies one run within an experiment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RunKey {
    pub demand_count: usize,
    pub replication: usize,
    pub seed: u64,
    pub ordering: String,
    pub policy: String,
    pub impairments: bool,
}

impl RunKey {
    fn file_stem(&self) -> String {
        format!(
            "d{}-r{}-{}-{}-{}",
            self.demand_count,
            self.replication,
            self.ordering,
            self.policy,
            if self.impairments { "imp" } else { "noimp" }
        )
    }
}

/// One plan run. Serializes flat, key columns first.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub key: RunKey,
    pub assigned: usize,
    pub blocked: usize,
    pub blocking_probability: f64,
    pub f_avg: f64,
    pub dbp: f64,
    pub dbp_slot_weighted: f64,
    pub ms: usize,
    pub objective: f64,
    pub final_sinr_violations: usize,
    pub violation_fraction: f64,
}

// The csv writer cannot flatten nested structs, so both row types spell
// out their columns.
fn key_fields<S: SerializeStruct>(st: &mut S, k: &RunKey) -> std::result::Result<(), S::Error> {
    st.serialize_field("demand_count", &k.demand_count)?;
    st.serialize_field("replication", &k.replication)?;
    st.serialize_field("seed", &k.seed)?;
    st.serialize_field("ordering", &k.ordering)?;
    st.serialize_field("policy", &k.policy)?;
    st.serialize_field("impairments", &k.impairments)
}

impl Serialize for RunRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("RunRow", 16)?;
        key_fields(&mut st, &self.key)?;
        st.serialize_field("assigned", &self.assigned)?;
        st.serialize_field("blocked", &self.blocked)?;
        st.serialize_field("blocking_probability", &self.blocking_probability)?;
        st.serialize_field("f_avg", &self.f_avg)?;
        st.serialize_field("dbp", &self.dbp)?;
        st.serialize_field("dbp_slot_weighted", &self.dbp_slot_weighted)?;
        st.serialize_field("ms", &self.ms)?;
        st.serialize_field("objective", &self.objective)?;
        st.serialize_field("final_sinr_violations", &self.final_sinr_violations)?;
        st.serialize_field("violation_fraction", &self.violation_fraction)?;
        st.end()
    }
}

impl Serialize for GapRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("GapRow", 10)?;
        key_fields(&mut st, &self.key)?;
        st.serialize_field("heuristic_objective", &self.heuristic_objective)?;
        st.serialize_field("exact_objective", &self.exact_objective)?;
        st.serialize_field("gap_percent", &self.gap_percent)?;
        st.serialize_field("note", &self.note)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub job: String,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub demand_count: usize,
    pub ordering: String,
    pub policy: String,
    pub impairments: bool,
    pub runs: usize,
    pub blocking_mean: f64,
    pub blocking_std: f64,
    pub f_avg_mean: f64,
    pub f_avg_std: f64,
    pub dbp_mean: f64,
    pub dbp_std: f64,
    pub ms_mean: f64,
    pub ms_std: f64,
    pub objective_mean: f64,
    pub objective_std: f64,
    pub violation_fraction_mean: f64,
    pub violation_fraction_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRow {
    pub demand_count: usize,
    pub replication: usize,
    pub seed: u64,
    pub impairments: bool,
    pub objective: Option<f64>,
    pub proven_optimal: bool,
    pub infeasible: bool,
    pub nodes_explored: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub key: RunKey,
    pub heuristic_objective: f64,
    pub exact_objective: Option<f64>,
    pub gap_percent: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummaryRow {
    pub demand_count: usize,
    pub ordering: String,
    pub policy: String,
    pub impairments: bool,
    pub defined: usize,
    pub not_applicable: usize,
    pub gap_mean: f64,
    pub gap_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRow {
    pub job: String,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcomes {
    pub key: RunKey,
    pub processing_order: Vec<DemandId>,
    pub outcomes: Vec<DemandOutcome>,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub runs: Vec<RunRow>,
    pub timings: Vec<TimingRow>,
    pub aggregates: Vec<AggregateRow>,
    pub exact: Vec<ExactRow>,
    pub gaps: Vec<GapRow>,
    pub gap_summary: Vec<GapSummaryRow>,
    pub failures: Vec<FailureRow>,
    pub outcomes: Vec<RunOutcomes>,
    /// Per-run state dumps (plan mode only), keyed by file stem.
    pub states: BTreeMap<String, StateDump>,
    /// Demand sets actually used, keyed by (demand count, replication).
    pub demand_sets: BTreeMap<(usize, usize), Vec<DemandDocument>>,
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

enum JobKind {
    Plan { ordering: DemandOrder, policy: Policy, impairments: bool },
    Exact { impairments: bool },
    Gap { impairments: bool },
}

struct Job {
    demand_count: usize,
    replication: usize,
    seed: u64,
    demands: Vec<Demand>,
    kind: JobKind,
}

enum JobOutput {
    Plans(Vec<(RunKey, PlanResult)>),
    Exact(ExactRow),
    Gap(ExactRow, Vec<(RunKey, PlanResult, Option<f64>, String)>),
}

fn plan_key(job: &Job, ordering: DemandOrder, policy: Policy, impairments: bool) -> RunKey {
    RunKey {
        demand_count: job.demand_count,
        replication: job.replication,
        seed: job.seed,
        ordering: ordering.to_string(),
        policy: policy.to_string(),
        impairments,
    }
}

fn job_name(job: &Job) -> String {
    let tail = match &job.kind {
        JobKind::Plan { ordering, policy, impairments } => format!("plan-{ordering}-{policy}-{impairments}"),
        JobKind::Exact { impairments } => format!("exact-{impairments}"),
        JobKind::Gap { impairments } => format!("gap-{impairments}"),
    };
    format!("d{}-r{}-{tail}", job.demand_count, job.replication)
}

fn settings(spec: &ExperimentSpec, ordering: DemandOrder, policy: Policy, impairments: bool) -> PlanSettings {
    PlanSettings {
        slots: spec.slots,
        k_paths: spec.k_paths,
        ordering,
        policy,
        impairments,
        ..PlanSettings::default()
    }
}

fn exact_row(job: &Job, impairments: bool, r: &ExactResult) -> ExactRow {
    ExactRow {
        demand_count: job.demand_count,
        replication: job.replication,
        seed: job.seed,
        impairments,
        objective: r.objective,
        proven_optimal: r.proven_optimal,
        infeasible: r.infeasible,
        nodes_explored: r.nodes_explored,
    }
}

fn run_job(spec: &ExperimentSpec, inputs: &Inputs, job: &Job) -> Result<JobOutput> {
    let (topo, params) = (&inputs.topology, &inputs.params);
    match job.kind {
        JobKind::Plan { ordering, policy, impairments } => {
            let mut r = run_plan(topo, &job.demands, params, &settings(spec, ordering, policy, impairments))?;
            r.seed = Some(job.seed);
            Ok(JobOutput::Plans(vec![(plan_key(job, ordering, policy, impairments), r)]))
        }
        JobKind::Exact { impairments } => {
            let r = exact_solve(topo, &job.demands, params, spec.slots, spec.k_paths, impairments, &spec.exact_limits)?;
            Ok(JobOutput::Exact(exact_row(job, impairments, &r)))
        }
        JobKind::Gap { impairments } => {
            let ex = exact_solve(topo, &job.demands, params, spec.slots, spec.k_paths, impairments, &spec.exact_limits)?;
            let mut plans = Vec::new();
            for &ordering in &spec.orderings {
                for &policy in &spec.policies {
                    let mut r = run_plan(topo, &job.demands, params, &settings(spec, ordering, policy, impairments))?;
                    r.seed = Some(job.seed);
                    let gap = optimality_gap(&r, &ex)?;
                    let note = match &gap {
                        crate::exact::Gap::Percent { .. } => String::new(),
                        crate::exact::Gap::NotApplicable { reason } => reason.clone(),
                    };
                    plans.push((plan_key(job, ordering, policy, impairments), r, gap.percent(), note));
                }
            }
            Ok(JobOutput::Gap(exact_row(job, impairments, &ex), plans))
        }
    }
}

fn build_jobs(spec: &ExperimentSpec, inputs: &Inputs) -> Result<(Vec<Job>, ExperimentReport)> {
    let mut report = ExperimentReport::default();
    let counts: Vec<Option<usize>> = if spec.mode == Mode::Sweep {
        spec.sweep_counts.iter().map(|&c| Some(c)).collect()
    } else {
        vec![None]
    };
    let mut jobs = Vec::new();
    for count in counts {
        for rep in 0..spec.replications {
            let (seed, demands) = match (&spec.generator, &inputs.demands) {
                (Some(g), _) => {
                    let seed = g.seed + rep as u64;
                    (seed, generate_demands(&inputs.topology, count.unwrap_or(g.count), g.rho, seed)?)
                }
                (None, Some(d)) => (rep as u64, d.clone()),
                (None, None) => return Err(Error::Experiment("no demand source".into())),
            };
            let demand_count = demands.len();
            report.demand_sets.insert((demand_count, rep), demands_to_documents(&inputs.topology, &demands));
            let mut push = |kind| jobs.push(Job { demand_count, replication: rep, seed, demands: demands.clone(), kind });
            match spec.mode {
                Mode::Plan | Mode::Sweep => {
                    for &ordering in &spec.orderings {
                        for &policy in &spec.policies {
                            for &impairments in &spec.impairments {
                                push(JobKind::Plan { ordering, policy, impairments });
                            }
                        }
                    }
                }
                Mode::Exact => spec.impairments.iter().for_each(|&i| push(JobKind::Exact { impairments: i })),
                Mode::GapStudy => spec.impairments.iter().for_each(|&i| push(JobKind::Gap { impairments: i })),
            }
        }
    }
    Ok((jobs, report))
}

fn run_row(key: &RunKey, r: &PlanResult) -> RunRow {
    let assigned = r.assigned_count();
    RunRow {
        key: key.clone(),
        assigned,
        blocked: r.metrics.blocked_count,
        blocking_probability: r.metrics.blocking_probability,
        f_avg: r.metrics.f_avg,
        dbp: r.metrics.dbp,
        dbp_slot_weighted: r.metrics.dbp_slot_weighted,
        ms: r.metrics.ms,
        objective: r.objective,
        final_sinr_violations: r.final_sinr_violations,
        violation_fraction: if assigned == 0 { 0.0 } else { r.final_sinr_violations as f64 / assigned as f64 },
    }
}

/// Runs every job of the experiment, in parallel when the `parallel`
/// feature is enabled.
pub fn run_experiment(spec: &ExperimentSpec, inputs: &Inputs) -> Result<ExperimentReport> {
    run_experiment_with(spec, inputs, crate::par::is_parallel())
}

/// Same as [`run_experiment`] with an explicit choice of execution.
pub fn run_experiment_with(spec: &ExperimentSpec, inputs: &Inputs, parallel: bool) -> Result<ExperimentReport> {
    spec.validate()?;
    inputs.params.validate()?;
    let (jobs, mut report) = build_jobs(spec, inputs)?;
    let work = |job: Job| {
        let t = Instant::now();
        let out = run_job(spec, inputs, &job);
        (job, out, t.elapsed().as_secs_f64() * 1e3)
    };
    let results = if parallel { crate::par::map(jobs, work) } else { crate::par::map_sequential(jobs, work) };

    for (job, out, ms) in results {
        let name = job_name(&job);
        report.timings.push(TimingRow { job: name.clone(), runtime_ms: ms });
        match out {
            Err(e) => report.failures.push(FailureRow { job: name, kind: e.kind().into(), message: e.to_string() }),
            Ok(JobOutput::Plans(plans)) => {
                for (key, r) in plans {
                    report.runs.push(run_row(&key, &r));
                    if spec.mode == Mode::Plan {
                        report.states.insert(key.file_stem(), StateDump::from_state(&inputs.topology, &r.state));
                    }
                    report.outcomes.push(RunOutcomes {
                        key,
                        processing_order: r.processing_order,
                        outcomes: r.outcomes,
                    });
                }
            }
            Ok(JobOutput::Exact(row)) => report.exact.push(row),
            Ok(JobOutput::Gap(row, plans)) => {
                let exact_objective = row.objective;
                report.exact.push(row);
                for (key, r, gap, note) in plans {
                    report.runs.push(run_row(&key, &r));
                    report.gaps.push(GapRow {
                        key,
                        heuristic_objective: r.objective,
                        exact_objective,
                        gap_percent: gap,
                        note,
                    });
                }
            }
        }
    }
    report.runs.sort_by(|a, b| a.key.cmp(&b.key));
    report.gaps.sort_by(|a, b| a.key.cmp(&b.key));
    report.outcomes.sort_by(|a, b| a.key.cmp(&b.key));
    report.aggregates = aggregate(&report.runs);
    report.gap_summary = summarize_gaps(&report.gaps);
    Ok(report)
}

type GroupKey = (usize, String, String, bool);

fn group_key(k: &RunKey) -> GroupKey {
    (k.demand_count, k.ordering.clone(), k.policy.clone(), k.impairments)
}

/// Mean ± sample std per (demand count, ordering, policy, impairments).
pub fn aggregate(runs: &[RunRow]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<GroupKey, Vec<&RunRow>> = BTreeMap::new();
    for r in runs {
        groups.entry(group_key(&r.key)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((demand_count, ordering, policy, impairments), rows)| {
            let col = |f: fn(&RunRow) -> f64| mean_std(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (blocking_mean, blocking_std) = col(|r| r.blocking_probability);
            let (f_avg_mean, f_avg_std) = col(|r| r.f_avg);
            let (dbp_mean, dbp_std) = col(|r| r.dbp);
            let (ms_mean, ms_std) = col(|r| r.ms as f64);
            let (objective_mean, objective_std) = col(|r| r.objective);
            let (violation_fraction_mean, violation_fraction_std) = col(|r| r.violation_fraction);
            AggregateRow {
                demand_count,
                ordering,
                policy,
                impairments,
                runs: rows.len(),
                blocking_mean,
                blocking_std,
                f_avg_mean,
                f_avg_std,
                dbp_mean,
                dbp_std,
                ms_mean,
                ms_std,
                objective_mean,
                objective_std,
                violation_fraction_mean,
                violation_fraction_std,
            }
        })
        .collect()
}

pub fn summarize_gaps(gaps: &[GapRow]) -> Vec<GapSummaryRow> {
    let mut groups: BTreeMap<GroupKey, Vec<&GapRow>> = BTreeMap::new();
    for g in gaps {
        groups.entry(group_key(&g.key)).or_default().push(g);
    }
    groups
        .into_iter()
        .map(|((demand_count, ordering, policy, impairments), rows)| {
            let defined: Vec<f64> = rows.iter().filter_map(|g| g.gap_percent).collect();
            let (gap_mean, gap_std) = mean_std(&defined);
            GapSummaryRow {
                demand_count,
                ordering,
                policy,
                impairments,
                defined: defined.len(),
                not_applicable: rows.len() - defined.len(),
                gap_mean,
                gap_std,
            }
        })
        .collect()
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct Meta<'a> {
    schema: &'static str,
    generated_unix_s: u64,
    parallel: bool,
    spec: &'a ExperimentSpec,
}

impl ExperimentReport {
    /// The deterministic report bodies, by file name. Timing and metadata
    /// files are written separately.
    pub fn bodies(&self, mode: Mode) -> Result<BTreeMap<String, String>> {
        let mut out = BTreeMap::new();
        match mode {
            Mode::Plan | Mode::Sweep => {
                out.insert("runs.csv".into(), to_csv(&self.runs)?);
                out.insert("aggregate.csv".into(), to_csv(&self.aggregates)?);
                out.insert("outcomes.json".into(), serde_json::to_string_pretty(&self.outcomes)? + "\n");
            }
            Mode::Exact => {
                out.insert("exact.csv".into(), to_csv(&self.exact)?);
            }
            Mode::GapStudy => {
                out.insert("runs.csv".into(), to_csv(&self.runs)?);
                out.insert("exact.csv".into(), to_csv(&self.exact)?);
                out.insert("gaps.csv".into(), to_csv(&self.gaps)?);
                out.insert("gap_summary.csv".into(), to_csv(&self.gap_summary)?);
            }
        }
        out.insert("failures.csv".into(), to_csv(&self.failures)?);
        let sets: Vec<_> = self
            .demand_sets
            .iter()
            .map(|((count, rep), d)| serde_json::json!({"demand_count": count, "replication": rep, "demands": d}))
            .collect();
        out.insert("demands.json".into(), serde_json::to_string_pretty(&sets)? + "\n");
        for (stem, dump) in &self.states {
            out.insert(format!("states/{stem}.json"), serde_json::to_string_pretty(dump)? + "\n");
        }
        Ok(out)
    }

    /// Writes every report file under `dir`.
    pub fn write(&self, dir: &Path, spec: &ExperimentSpec) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, body) in self.bodies(spec.mode)? {
            let path = dir.join(&name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, body)?;
        }
        std::fs::write(dir.join("timing.csv"), to_csv(&self.timings)?)?;
        let meta = Meta {
            schema: REPORT_SCHEMA,
            generated_unix_s: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            parallel: crate::par::is_parallel(),
            spec,
        };
        std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
        Ok(())
    }
}
