use rumor_source::experiment::{
    distance_histogram, run_sweep, standard_p_grid, tree_sweep, ExperimentSpec, ReplicateTarget, TreeMode,
    TreeSweepSpec,
};
use rumor_source::graph::GraphModel;
use rumor_source::inference::Classification;
use rumor_source::tree_sim::TreeKind;

fn small(model: GraphModel, fixed_graph: bool) -> ExperimentSpec {
    ExperimentSpec {
        model,
        p_grid: vec![0.0, 0.3, 0.6, 1.0],
        rounds: vec![3, 5],
        runs: 40,
        master_seed: 12,
        fixed_graph,
    }
}

fn models() -> [GraphModel; 3] {
    [
        GraphModel::ErdosRenyi { n: 2000, avg_degree: 4.0 },
        GraphModel::ConfigRegular { n: 2000, d: 4 },
        GraphModel::Geometric {
            n: 2000,
            expected_degree: 16.0,
        },
    ]
}

#[test]
fn rows_conserve_runs_and_replay_exactly() {
    for model in models() {
        for fixed in [false, true] {
            let spec = small(model, fixed);
            let a = run_sweep(&spec).unwrap();
            assert_eq!(a.tables.len(), 2);
            for table in &a.tables {
                for (row, hist) in table.rows.iter().zip(&table.histograms) {
                    assert_eq!(row.successes + row.wrong + row.empty, spec.runs);
                    let cell: Vec<_> = a.runs.iter().filter(|r| r.rounds == table.rounds && r.p == row.p).collect();
                    assert_eq!(cell.len(), spec.runs as usize);
                    let pooled: usize = cell.iter().map(|r| r.distances.len()).sum();
                    assert_eq!(hist.total() as usize, pooled);
                    assert_eq!(hist.max_distance(), row.max_distance);
                    assert!(cell
                        .iter()
                        .all(|r| (r.classification == Classification::Empty) == (r.active_size == 0)));
                }
                assert_eq!(table.row(0.0).unwrap().empty, spec.runs);
            }
            let b = run_sweep(&spec).unwrap();
            assert_eq!(a, b);
            for (x, y) in a.tables.iter().zip(&b.tables) {
                assert_eq!(x.to_csv(), y.to_csv());
            }
        }
    }
}

#[test]
fn subset_sweeps_reproduce_full_rows() {
    let spec = small(models()[0], false);
    let full = run_sweep(&spec).unwrap();
    let subset = ExperimentSpec {
        p_grid: vec![0.6],
        rounds: vec![5],
        ..spec.clone()
    };
    let part = run_sweep(&subset).unwrap();
    assert_eq!(part.tables[0].rows[0], full.table(5).unwrap().row(0.6).unwrap().clone());

    let hist = distance_histogram(&spec, &[0.3, 1.0]).unwrap();
    assert_eq!(hist.len(), 4);
    for (t, p, h) in hist {
        assert_eq!(&h, full.table(t).unwrap().histogram(p).unwrap());
    }
    assert!(distance_histogram(&spec, &[0.45]).is_err());
}

#[test]
fn csv_schema() {
    let result = run_sweep(&small(models()[1], false)).unwrap();
    let csv = result.tables[0].to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p,successes,wrong,empty,avg_distance,max_distance"));
    assert_eq!(lines.next().unwrap(), "0.00,0,0,40,-,-");
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn invalid_specs_are_rejected() {
    let base = small(models()[0], false);
    for bad in [
        ExperimentSpec { runs: 0, ..base.clone() },
        ExperimentSpec { p_grid: vec![], ..base.clone() },
        ExperimentSpec { p_grid: vec![1.2], ..base.clone() },
        ExperimentSpec { rounds: vec![], ..base.clone() },
    ] {
        assert!(run_sweep(&bad).is_err());
    }
}

#[test]
fn replicate_targets() {
    assert_eq!(standard_p_grid().len(), 21);
    for target in ReplicateTarget::ALL {
        assert_eq!(ReplicateTarget::parse(target.name()), Some(target));
        let spec = target.spec(1);
        assert_eq!((spec.runs, spec.model.node_count()), (100, 100_000));
        spec.validate().unwrap();
    }
    assert_eq!(ReplicateTarget::Fig3.histogram_ps(), &[0.45, 0.50, 0.55]);
    assert_eq!(ReplicateTarget::Fig4.spec(1).rounds, vec![8, 16, 32]);
    assert!(ReplicateTarget::parse("table9").is_none());
}

#[test]
fn tree_sweep_outputs() {
    let spec = TreeSweepSpec {
        kind: TreeKind::GwPoisson { lambda: 3.0 },
        p_grid: vec![0.2, 0.7],
        rounds: 6,
        runs: 300,
        master_seed: 4,
        mode: TreeMode::Aggregated,
    };
    let result = tree_sweep(&spec).unwrap();
    for row in &result.rows {
        let candidates: u32 = row.depth_counts.iter().sum();
        assert_eq!(candidates + row.failures + row.died_out + row.aborted, row.runs);
        assert_eq!(row.successes, row.depth_counts.first().copied().unwrap_or(0));
    }
    assert_eq!(result, tree_sweep(&spec).unwrap());
    let runs_csv = result.runs_csv();
    assert!(runs_csv.starts_with("kind,d_or_lambda,p,t,seed,status,frontier_size,heuristic_depth,success\n"));
    assert_eq!(runs_csv.lines().count(), 601);

    let materialized = tree_sweep(&TreeSweepSpec {
        mode: TreeMode::materialized(),
        ..spec.clone()
    })
    .unwrap();
    assert_eq!(materialized.rows.iter().map(|r| r.runs).sum::<u32>(), 600);

    let tight = tree_sweep(&TreeSweepSpec {
        kind: TreeKind::DRegular { d: 4 },
        p_grid: vec![1.0],
        rounds: 12,
        runs: 3,
        mode: TreeMode::Materialized { node_budget: 1000 },
        ..spec
    })
    .unwrap();
    assert_eq!(tight.rows[0].aborted, 3);
}
