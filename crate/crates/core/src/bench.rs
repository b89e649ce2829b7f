//! Benchmark plumbing: the two generated datasets, per-run summaries, the
//! factor speed-up tables, and a quick self-check against the brute-force
//! references.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cg::{self, CgConfig, CgOutcome, CgStatus};
use crate::dssr::{price_elementary, DssrConfig};
use crate::error::{Error, Result};
use crate::instance::{generate_instance, CostMatrix, DemandMode, Instance};
use crate::la_arcs::ComponentPathTable;
use crate::neighbors::NeighborSets;
use crate::oracle::{brute_pricing, enumerate_routes, lp_over_routes, random_duals, RouteClass};
use crate::pricing::{price_la, PricingConfig};

/// Speed-up thresholds reported in the proportion table.
pub const FACTORS: [f64; 7] = [1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 60.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetRow {
    pub capacity: u32,
    pub n: usize,
    pub count: usize,
}

const fn row(capacity: u32, n: usize, count: usize) -> DatasetRow {
    DatasetRow { capacity, n, count }
}

/// Unit demand.
pub const DATASET_1: [DatasetRow; 9] = [
    row(4, 20, 10),
    row(4, 30, 10),
    row(4, 40, 10),
    row(8, 20, 10),
    row(8, 30, 10),
    row(8, 40, 7),
    row(8, 60, 1),
    row(10, 20, 10),
    row(10, 30, 7),
];

/// Demands uniform on 1..=10.
pub const DATASET_2: [DatasetRow; 8] = [
    row(20, 20, 10),
    row(20, 30, 10),
    row(20, 40, 10),
    row(30, 20, 10),
    row(30, 30, 10),
    row(30, 40, 5),
    row(40, 20, 10),
    row(40, 30, 10),
];

pub fn dataset(id: u32) -> Result<(&'static [DatasetRow], DemandMode)> {
    match id {
        1 => Ok((&DATASET_1, DemandMode::Unit)),
        2 => Ok((&DATASET_2, DemandMode::Uniform1To10)),
        _ => Err(Error::Validation(format!("unknown dataset {id}; expected 1 or 2"))),
    }
}

/// All instances of a dataset. Seeds run 1, 2, ... across the rows in order,
/// offset by 1000 for dataset 2 so the two never share a seed.
pub fn dataset_instances(id: u32) -> Result<Vec<Instance>> {
    let (rows, mode) = dataset(id)?;
    let mut seed = if id == 1 { 1 } else { 1001 };
    let mut out = Vec::new();
    for r in rows {
        for _ in 0..r.count {
            out.push(generate_instance(seed, r.n, r.capacity, mode)?);
            seed += 1;
        }
    }
    Ok(out)
}

/// Writes every instance of a dataset as `<name>.txt` into `dir`.
pub fn write_dataset(id: u32, dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    for inst in dataset_instances(id)? {
        inst.write(dir.join(format!("{}.txt", inst.name())))?;
        names.push(inst.name().to_string());
    }
    Ok(names)
}

/// One line per (instance, arm) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub instance: String,
    pub arm: String,
    pub status: String,
    pub objective: f64,
    pub iterations: usize,
    pub total_secs: f64,
    pub pricing_secs: f64,
    pub rmp_secs: f64,
    pub table_secs: f64,
}

impl RunSummary {
    pub fn new(inst: &Instance, cfg: &CgConfig, out: &CgOutcome) -> Self {
        RunSummary {
            instance: inst.name().to_string(),
            arm: cfg.arm(),
            status: match out.status {
                CgStatus::Converged => "converged",
                CgStatus::TimeLimit => "time_limit",
                CgStatus::IterationLimit => "iteration_limit",
            }
            .to_string(),
            objective: out.objective,
            iterations: out.iterations(),
            total_secs: out.total_secs,
            pricing_secs: out.pricing_secs,
            rmp_secs: out.rmp_secs,
            table_secs: out.table_secs,
        }
    }

    pub fn converged(&self) -> bool {
        self.status == "converged"
    }
}

/// Solves and writes `trace_`, `timing_`, `dssr_`, `columns_` and `summary_`
/// files for the run into `dir`.
pub fn run_and_record(inst: &Instance, cfg: &CgConfig, dir: &Path) -> Result<RunSummary> {
    let out = cg::solve(inst, cfg)?;
    let arm = cfg.arm();
    cg::write_run(dir, inst.name(), &arm, &out)?;
    let summary = RunSummary::new(inst, cfg, &out);
    let f = std::fs::File::create(dir.join(format!("summary_{}_{}.csv", inst.name(), arm)))?;
    let mut w = csv::Writer::from_writer(f);
    w.serialize(&summary)?;
    w.flush()?;
    Ok(summary)
}

/// Reads every `summary_*.csv` under `dir`.
pub fn read_summaries(dir: &Path) -> Result<Vec<RunSummary>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("summary_") && n.ends_with(".csv"))
        })
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let mut r = csv::Reader::from_path(&p)?;
        for rec in r.deserialize() {
            out.push(rec?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSpeedup {
    pub instance: String,
    pub arm: String,
    pub baseline_total_secs: f64,
    pub baseline_pricing_secs: f64,
    pub total_factor: f64,
    pub pricing_factor: f64,
}

/// Rows of the cumulative table: for each factor, the share of instances
/// (baseline time at least `min_baseline_secs`) reaching it, per arm.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupTable {
    pub arms: Vec<String>,
    pub factors: Vec<f64>,
    /// `total[f][a]`, `pricing[f][a]`.
    pub total: Vec<Vec<f64>>,
    pub pricing: Vec<Vec<f64>>,
    pub counted: usize,
}

pub fn baseline_over(time: f64, candidate: f64) -> f64 {
    if candidate <= 0.0 {
        f64::INFINITY
    } else {
        time / candidate
    }
}

/// Per-instance factors of every arm against `baseline`.
pub fn instance_speedups(runs: &[RunSummary], baseline: &str) -> Result<Vec<InstanceSpeedup>> {
    let mut by_arm: BTreeMap<&str, BTreeMap<&str, &RunSummary>> = BTreeMap::new();
    for r in runs {
        by_arm.entry(&r.arm).or_default().insert(&r.instance, r);
    }
    let base = by_arm
        .get(baseline)
        .ok_or_else(|| Error::Validation(format!("no runs for baseline arm {baseline}")))?;
    if by_arm.len() < 2 {
        return Err(Error::Validation("need at least one arm besides the baseline".into()));
    }
    let base_set: BTreeSet<&str> = base.keys().copied().collect();
    let mut out = Vec::new();
    for (arm, runs) in &by_arm {
        if *arm == baseline {
            continue;
        }
        let set: BTreeSet<&str> = runs.keys().copied().collect();
        if set != base_set {
            return Err(Error::Validation(format!(
                "arm {arm} covers different instances than {baseline}"
            )));
        }
        for (inst, r) in runs {
            let b = base[inst];
            out.push(InstanceSpeedup {
                instance: inst.to_string(),
                arm: arm.to_string(),
                baseline_total_secs: b.total_secs,
                baseline_pricing_secs: b.pricing_secs,
                total_factor: baseline_over(b.total_secs, r.total_secs),
                pricing_factor: baseline_over(b.pricing_secs, r.pricing_secs),
            });
        }
    }
    Ok(out)
}

pub fn speedup_table(speedups: &[InstanceSpeedup], min_baseline_secs: f64) -> SpeedupTable {
    let arms: Vec<String> = speedups
        .iter()
        .map(|s| s.arm.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let kept: Vec<&InstanceSpeedup> = speedups
        .iter()
        .filter(|s| s.baseline_total_secs >= min_baseline_secs)
        .collect();
    let share = |arm: &str, f: f64, pick: fn(&InstanceSpeedup) -> f64| {
        let of_arm: Vec<&&InstanceSpeedup> = kept.iter().filter(|s| s.arm == arm).collect();
        if of_arm.is_empty() {
            0.0
        } else {
            of_arm.iter().filter(|s| pick(s) >= f).count() as f64 / of_arm.len() as f64
        }
    };
    let total = FACTORS
        .iter()
        .map(|&f| arms.iter().map(|a| share(a, f, |s| s.total_factor)).collect())
        .collect();
    let pricing = FACTORS
        .iter()
        .map(|&f| arms.iter().map(|a| share(a, f, |s| s.pricing_factor)).collect())
        .collect();
    let counted = kept.iter().map(|s| &s.instance).collect::<BTreeSet<_>>().len();
    SpeedupTable {
        arms,
        factors: FACTORS.to_vec(),
        total,
        pricing,
        counted,
    }
}

pub fn write_speedup_table<W: Write>(out: W, t: &SpeedupTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["factor".to_string()];
    for a in &t.arms {
        header.push(format!("{a}_total"));
    }
    for a in &t.arms {
        header.push(format!("{a}_pricing"));
    }
    w.write_record(&header)?;
    for (i, f) in t.factors.iter().enumerate() {
        let mut rec = vec![f.to_string()];
        rec.extend(t.total[i].iter().map(|v| format!("{v:.4}")));
        rec.extend(t.pricing[i].iter().map(|v| format!("{v:.4}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_instance_speedups<W: Write>(out: W, rows: &[InstanceSpeedup]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    }
}

/// Result of one self-check family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub check: String,
    pub cases: usize,
    pub failures: usize,
    pub max_error: f64,
}

/// Compares the solver against the brute-force references on random
/// instances with up to `max_n` customers.
pub fn oracle_suite(max_n: usize, seed: u64) -> Result<Vec<SuiteRow>> {
    if !(1..=8).contains(&max_n) {
        return Err(Error::Validation("--max-n must be between 1 and 8".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut elem = SuiteRow::new("elementary_pricing");
    let mut la = SuiteRow::new("la_pricing");
    let mut lp = SuiteRow::new("cg_vs_route_lp");
    for i in 0..12u64 {
        let n = 1 + (i as usize % max_n);
        let (mode, cap) = if i % 2 == 0 { (DemandMode::Unit, 4) } else { (DemandMode::Uniform1To10, 15) };
        let inst = generate_instance(seed.wrapping_add(i), n, cap, mode)?;
        let c = CostMatrix::new(&inst);
        let k = 3.min(n - 1);
        let mut sets = NeighborSets::build(&inst, k);
        let table = ComponentPathTable::build(&inst, &sets)?;
        let el_routes = enumerate_routes(&inst, RouteClass::Elementary, &sets)?;
        let la_routes = enumerate_routes(&inst, RouteClass::La, &sets)?;
        for _ in 0..4 {
            let duals = random_duals(&inst, &mut rng);
            let (_, want) = brute_pricing(&el_routes, &duals, &c)?;
            let got = price_elementary(&inst, &mut sets, &table, &c, &duals, &DssrConfig::default())?;
            elem.record(got.reduced_cost - want, 1e-6);
            sets.reset_ng();
            let (_, want) = brute_pricing(&la_routes, &duals, &c)?;
            let got = price_la(&inst, &sets, &table, &duals, &PricingConfig::default())?;
            la.record(got.reduced_cost - want, 1e-6);
        }
        let want = lp_over_routes(&el_routes, &inst)?;
        let got = cg::solve(&inst, &CgConfig { la_k: k, ..Default::default() })?;
        lp.record(got.objective - want, 1e-6);
    }
    rows.push(elem);
    rows.push(la);
    rows.push(lp);
    Ok(rows)
}

impl SuiteRow {
    fn new(check: &str) -> Self {
        SuiteRow {
            check: check.to_string(),
            cases: 0,
            failures: 0,
            max_error: 0.0,
        }
    }

    fn record(&mut self, err: f64, tol: f64) {
        self.cases += 1;
        let e = err.abs();
        if e > tol || e.is_nan() {
            self.failures += 1;
        }
        self.max_error = self.max_error.max(e);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_sizes() {
        let one: usize = DATASET_1.iter().map(|r| r.count).sum();
        let two: usize = DATASET_2.iter().map(|r| r.count).sum();
        assert_eq!((one, DATASET_1.len()), (75, 9));
        assert_eq!((two, DATASET_2.len()), (75, 8));
        let insts = dataset_instances(1).unwrap();
        assert_eq!(insts.len(), 75);
        assert!(insts.iter().all(|i| (0..=i.n()).skip(1).all(|u| i.demand(u) == 1)));
        let names: BTreeSet<&str> = insts.iter().map(|i| i.name()).collect();
        assert_eq!(names.len(), 75);
    }

    #[test]
    fn regeneration_is_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let names = write_dataset(2, a.path()).unwrap();
        write_dataset(2, b.path()).unwrap();
        assert_eq!(names.len(), 75);
        for n in names {
            let f = format!("{n}.txt");
            assert_eq!(std::fs::read(a.path().join(&f)).unwrap(), std::fs::read(b.path().join(&f)).unwrap());
        }
    }

    fn summary(instance: &str, arm: &str, total: f64, pricing: f64) -> RunSummary {
        RunSummary {
            instance: instance.into(),
            arm: arm.into(),
            status: "converged".into(),
            objective: 1.0,
            iterations: 1,
            total_secs: total,
            pricing_secs: pricing,
            rmp_secs: 0.0,
            table_secs: 0.0,
        }
    }

    #[test]
    fn factor_counting() {
        let runs = vec![
            summary("a", "la0", 100.0, 90.0),
            summary("a", "la10", 10.0, 9.0),
            summary("b", "la0", 50.0, 40.0),
            summary("b", "la10", 50.0, 40.0),
            summary("c", "la0", 1.0, 1.0),
            summary("c", "la10", 0.1, 0.1),
        ];
        let sp = instance_speedups(&runs, "la0").unwrap();
        let a = sp.iter().find(|s| s.instance == "a").unwrap();
        assert_eq!(a.total_factor, 10.0);
        let t = speedup_table(&sp, 5.0);
        assert_eq!(t.counted, 2);
        // a reaches 1, 2, 5, 10; b reaches 1 only
        let col: Vec<f64> = t.total.iter().map(|r| r[0]).collect();
        assert_eq!(col, vec![1.0, 0.5, 0.5, 0.5, 0.0, 0.0, 0.0]);
        for w in t.pricing.windows(2) {
            assert!(w[1][0] <= w[0][0]);
        }
    }

    #[test]
    fn mismatched_instances_rejected() {
        let runs = vec![
            summary("a", "la0", 1.0, 1.0),
            summary("b", "la10", 1.0, 1.0),
        ];
        assert!(instance_speedups(&runs, "la0").is_err());
        assert!(instance_speedups(&runs[..1], "la0").is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn small_suite_passes() {
        let rows = oracle_suite(5, 3).unwrap();
        for r in rows {
            assert_eq!(r.failures, 0, "{r:?}");
        }
    }
}
