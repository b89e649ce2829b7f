use lacg::cg::{self, CgConfig, CgStatus};
use lacg::dssr::{price_elementary, CycleRule, DssrConfig};
use lacg::instance::{generate_instance, CostMatrix, DemandMode, Instance};
use lacg::la_arcs::ComponentPathTable;
use lacg::neighbors::NeighborSets;
use lacg::oracle::random_duals;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_instance(seed: u64, n: usize, cap: u32, unit: bool) -> Instance {
    let mode = if unit { DemandMode::Unit } else { DemandMode::Uniform1To10 };
    // mixed demands need room for a 10
    let cap = if unit { cap } else { cap.max(10) };
    generate_instance(seed, n, cap, mode).unwrap()
}

#[test]
fn instance_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate_instance(7, 12, 10, DemandMode::Uniform1To10).unwrap();
    let path = dir.path().join("x.txt");
    inst.write(&path).unwrap();
    let back = Instance::read(&path).unwrap();
    assert_eq!(back.to_text(), inst.to_text());
    for a in 0..=inst.n() {
        for b in 0..=inst.n() {
            assert_eq!(back.distance(a, b), inst.distance(a, b));
        }
    }
}

#[test]
fn run_files_written() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate_instance(3, 10, 4, DemandMode::Unit).unwrap();
    let cfg = CgConfig { la_k: 5, ..Default::default() };
    let out = cg::solve(&inst, &cfg).unwrap();
    cg::write_run(dir.path(), inst.name(), &cfg.arm(), &out).unwrap();
    for kind in ["trace", "timing", "dssr", "columns"] {
        let p = dir.path().join(format!("{kind}_{}_{}.csv", inst.name(), cfg.arm()));
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.lines().count() > 1, "{kind} is empty");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // every arm and cycle rule lands on the same LP bound
    #[test]
    fn arms_agree(seed in 0u64..10_000, n in 4usize..12, cap in 2u32..6, unit: bool) {
        let inst = small_instance(seed, n, cap, unit);
        let mut objs = Vec::new();
        for (k, rule) in [(0, CycleRule::MinNodesAdded), (3, CycleRule::ShortestCycle), (5, CycleRule::MinNodesAdded)] {
            let cfg = CgConfig { la_k: k, cycle_rule: rule, ..Default::default() };
            let out = cg::solve(&inst, &cfg).unwrap();
            prop_assert_eq!(out.status, CgStatus::Converged);
            objs.push(out.objective);
        }
        for o in &objs[1..] {
            prop_assert!((o - objs[0]).abs() <= 1e-6 * objs[0].max(1.0));
        }
    }

    // the final primal covers every customer and prices out at the objective
    #[test]
    fn final_solution_consistent(seed in 0u64..10_000, n in 4usize..12, cap in 2u32..6) {
        let inst = small_instance(seed, n, cap, true);
        let out = cg::solve(&inst, &CgConfig::default()).unwrap();
        let mut covered = vec![0.0; inst.n() + 1];
        let mut total = 0.0;
        for (col, &t) in out.columns.iter().zip(&out.theta) {
            prop_assert!(t >= -1e-9);
            total += t * col.cost;
            for &(u, a) in &col.cover {
                covered[u] += t * a as f64;
            }
        }
        prop_assert!((total - out.objective).abs() <= 1e-6 * total.max(1.0));
        for u in inst.customers() {
            prop_assert!(covered[u] >= 1.0 - 1e-7, "customer {} covered {}", u, covered[u]);
        }
        for col in &out.columns {
            prop_assert!(col.route.is_elementary());
            prop_assert!(col.route.is_resource_feasible(&inst));
        }
    }

    #[test]
    fn priced_route_is_elementary(seed in 0u64..10_000, n in 4usize..10, k in 0usize..4, dual_seed: u64) {
        let inst = small_instance(seed, n, 4, true);
        let c = CostMatrix::new(&inst);
        let mut sets = NeighborSets::build(&inst, k.min(inst.n() - 1));
        let table = ComponentPathTable::build(&inst, &sets).unwrap();
        let duals = random_duals(&inst, &mut ChaCha8Rng::seed_from_u64(dual_seed));
        let res = price_elementary(&inst, &mut sets, &table, &c, &duals, &DssrConfig::default()).unwrap();
        prop_assert!(res.exact);
        prop_assert!(res.route.is_elementary());
        prop_assert!(res.route.is_resource_feasible(&inst));
        prop_assert!((res.route.reduced_cost(&duals, &c) - res.reduced_cost).abs() <= 1e-6);
        for (r, rc) in &res.early_columns {
            prop_assert!(r.is_elementary());
            prop_assert!(*rc < 0.0);
        }
    }
}
