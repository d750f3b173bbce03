use gboost::sweep::{run_cell, CellOutcome};
use gboost::{sweep, SweepError};
use gboost_core::{
    build_g, enhance, parse_arpa, run_ranking, EnhanceConfig, GraphScorer, RankingCase,
    SimilarPairGroup, Wfst,
};
use gboost_testkit::{ool_fixture, OolFixture};

fn setup() -> (OolFixture, Wfst, EnhanceConfig, Vec<RankingCase>) {
    let f = ool_fixture(3);
    let (g, _) = build_g(&parse_arpa(&f.arpa).unwrap()).unwrap();
    let groups = f
        .groups
        .iter()
        .map(|(preds, targets)| {
            let mut grp = SimilarPairGroup::new(preds, targets);
            for p in preds {
                grp.frequencies.insert(p.clone(), f.frequencies[p]);
            }
            grp.new_words = targets.iter().cloned().collect();
            grp
        })
        .collect();
    let cfg = EnhanceConfig {
        theta: 0.0,
        max_predictors: 5,
        groups,
    };
    let cases = f
        .cases
        .iter()
        .map(|c| RankingCase {
            reference: c.reference.clone(),
            focus: c.focus.clone(),
            competitors: c.competitors.clone(),
        })
        .collect();
    (f, g, cfg, cases)
}

const THETAS: [f64; 5] = [-4.0, -2.0, 0.0, 2.0, 4.0];

#[test]
fn grid_has_one_cell_per_pair_in_row_order() {
    let (_, g, cfg, cases) = setup();
    let grid = sweep(&g, &cfg, &THETAS, &[1, 2, 3, 4, 5], &cases).unwrap();
    assert_eq!(grid.cells.len(), 25);
    assert_eq!((grid.cell(1, 3).theta, grid.cell(1, 3).chnum), (-2.0, 4));
    let again = sweep(&g, &cfg, &THETAS, &[1, 2, 3, 4, 5], &cases).unwrap();
    assert_eq!(grid.to_tsv(), again.to_tsv());
    assert_eq!(grid.to_json(), again.to_json());
}

#[test]
fn single_cell_equals_direct_run() {
    let (_, g, cfg, cases) = setup();
    let grid = sweep(&g, &cfg, &[-2.0], &[3], &cases).unwrap();
    let direct_cfg = EnhanceConfig {
        theta: -2.0,
        max_predictors: 3,
        ..cfg
    };
    let (enhanced, _) = enhance(&g, &direct_cfg).unwrap();
    let direct = run_ranking(&enhanced, &cases).unwrap();
    assert_eq!(grid.cells[0].outcome, CellOutcome::Report(direct));
}

#[test]
fn reference_scores_rise_with_theta() {
    let (_, g, cfg, cases) = setup();
    let mut last: Option<Vec<f64>> = None;
    for theta in THETAS {
        let (e, _) = enhance(
            &g,
            &EnhanceConfig {
                theta,
                ..cfg.clone()
            },
        )
        .unwrap();
        let scorer = GraphScorer::new(&e);
        let scores: Vec<f64> = cases
            .iter()
            .map(|c| {
                let w: Vec<&str> = c.reference.iter().map(String::as_str).collect();
                scorer.score(&w).unwrap()
            })
            .collect();
        if let Some(prev) = &last {
            for (a, b) in prev.iter().zip(&scores) {
                // one new word per reference: exactly +2 per step
                assert!(b > a);
                assert!((b - a - 2.0).abs() < 1e-9);
            }
        }
        last = Some(scores);
    }
}

#[test]
fn failing_cells_are_marked_not_fatal() {
    let (_, g, mut cfg, cases) = setup();
    cfg.groups[0].predictors.push("walrus".into());
    let cell = run_cell(&g, &cfg, 0.0, 1, &cases);
    assert!(matches!(cell.outcome, CellOutcome::Failed(ref m) if m.contains("walrus")));
    let grid = sweep(&g, &cfg, &[0.0], &[1], &cases).unwrap();
    assert!(grid.to_tsv().ends_with("0\tFAILED\n"));
    assert!(matches!(
        sweep(&g, &cfg, &[], &[1], &cases),
        Err(SweepError::NoThetas)
    ));
    assert!(matches!(
        sweep(&g, &cfg, &[0.0], &[], &cases),
        Err(SweepError::NoChNums)
    ));
}

#[test]
fn error_rate_falls_as_theta_rises() {
    let (_, g, cfg, cases) = setup();
    assert_eq!(run_ranking(&g, &cases).unwrap().error_rate(), 100.0);
    let chnums = [1, 2, 3, 4, 5];
    let grid = sweep(&g, &cfg, &THETAS, &chnums, &cases).unwrap();
    let rate = |i, j| match &grid.cell(i, j).outcome {
        CellOutcome::Report(r) => r.error_rate(),
        CellOutcome::Failed(m) => panic!("{m}"),
    };
    for (j, chnum) in chnums.iter().enumerate() {
        for (i, theta) in THETAS.iter().enumerate().skip(1) {
            assert!(rate(i, j) <= rate(i - 1, j), "ChNum={chnum} theta={theta}");
        }
    }
    // the fixture is not degenerate: both ends of the range are reached
    assert_eq!(rate(0, 0), 100.0);
    assert_eq!(rate(THETAS.len() - 1, 0), 0.0);
}
