mod common;

use common::{
    explicit_standardize, folded_from_rows, normal, ols, random_dataset, reference_pipeline, rng, rowwise_mse, Rows,
};
use penreg::{
    back_transform, cross_validate, fold_complement, standardize, test_mse_from_stats, train, CvOptions,
    FoldedStats, LinearModel, PenaltySpec, SolveControl, StandardizeOptions, SufficientStats,
};
use proptest::prelude::*;
use rand::Rng;

fn stats_of(rows: &Rows) -> SufficientStats {
    SufficientStats::from_rows(rows[0].0.len(), rows.iter().map(|(x, y)| (&x[..], *y))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn test_mse_matches_rowwise(seed in any::<u64>(), n in 1usize..150, p in 1usize..10) {
        let mut r = rng(seed);
        let rows = random_dataset(&mut r, n, p);
        let model = LinearModel {
            intercept: r.random_range(-5.0..5.0),
            coefficients: (0..p).map(|_| r.random_range(-3.0..3.0)).collect(),
        };
        let fast = test_mse_from_stats(&stats_of(&rows), &model).unwrap();
        let slow = rowwise_mse(&rows, &model);
        prop_assert!((fast - slow).abs() <= 1e-10 * slow.max(1.0), "{} vs {}", fast, slow);
    }

    #[test]
    fn back_transform_matches_explicit_scaling(seed in any::<u64>(), n in 5usize..100, p in 1usize..8, intercept in any::<bool>()) {
        let mut r = rng(seed);
        let rows = random_dataset(&mut r, n, p);
        let opts = StandardizeOptions { intercept, ..Default::default() };
        let problem = standardize(&stats_of(&rows), opts).unwrap();
        let beta: Vec<f64> = (0..problem.p_active()).map(|_| normal(&mut r)).collect();
        let model = back_transform(&beta, &problem).unwrap();
        let explicit = explicit_standardize(&rows, intercept, 1e-12);
        // Predictions of the standardized model on each row equal the raw
        // model's predictions.
        for (row, (x, _)) in rows.iter().enumerate() {
            let std_pred = explicit.y_mean
                + explicit.columns.iter().zip(&beta).map(|(c, b)| c[row] * b).sum::<f64>();
            let raw = model.predict(x);
            prop_assert!((std_pred - raw).abs() <= 1e-8 * (1.0 + raw.abs()), "{} vs {}", std_pred, raw);
        }
    }
}

#[test]
fn back_transform_single_column() {
    // x = [1, 2, 3], y = 2x + 1: centered norm sqrt(2), beta_std = 2 sqrt(2).
    let rows: Rows = vec![(vec![1.0], 3.0), (vec![2.0], 5.0), (vec![3.0], 7.0)];
    let problem = standardize(&stats_of(&rows), StandardizeOptions::default()).unwrap();
    let model = back_transform(&[2.0 * 2f64.sqrt()], &problem).unwrap();
    assert!((model.coefficients[0] - 2.0).abs() < 1e-12);
    assert!((model.intercept - 1.0).abs() < 1e-12);
}

#[test]
fn null_model_when_no_column_varies() {
    let rows: Rows = (0..20).map(|i| (vec![4.0, -1.0], i as f64)).collect();
    let folds = folded_from_rows(&rows, 3, 1);
    let fit = train(&folds, &PenaltySpec::lasso(), &CvOptions::default()).unwrap();
    assert_eq!(fit.model.coefficients, vec![0.0, 0.0]);
    assert!((fit.model.intercept - 9.5).abs() < 1e-12);
    assert_eq!(fit.cv.lambdas(), &[0.0]);
    assert_eq!(fit.standardization.dropped.len(), 2);
}

#[test]
fn two_folds_are_mirror_images() {
    let rows = random_dataset(&mut rng(3), 80, 3);
    let folds = folded_from_rows(&rows, 2, 11);
    assert_eq!(fold_complement(&folds, 0).unwrap(), folds.folds[1]);
    assert_eq!(fold_complement(&folds, 1).unwrap(), folds.folds[0]);
}

#[test]
fn finer_grid_never_raises_the_minimum() {
    let rows = random_dataset(&mut rng(4), 150, 6);
    let folds = folded_from_rows(&rows, 5, 2);
    let coarse = cross_validate(&folds, &PenaltySpec::lasso().with_grid(penreg::LambdaGrid::Auto { n_lambdas: 10, min_ratio: None }), &CvOptions::default()).unwrap();
    let mut fine_grid = coarse.lambdas().to_vec();
    let extra: Vec<f64> = coarse.lambdas().windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();
    fine_grid.extend(extra);
    fine_grid.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let fine = cross_validate(&folds, &PenaltySpec::lasso().with_lambdas(fine_grid), &CvOptions::default()).unwrap();
    let min = |r: &penreg::CvReport| r.mean_mse.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
    assert!(min(&fine) <= min(&coarse) + 1e-12);
}

#[test]
fn recovers_a_line_and_agrees_with_least_squares() {
    let mut r = rng(12);
    let rows: Rows = (0..1000)
        .map(|_| {
            let x = 3.0 * normal(&mut r);
            (vec![x], 2.0 * x + 1.0 + 0.1 * normal(&mut r))
        })
        .collect();
    let folds = folded_from_rows(&rows, 5, 0);
    let spec = PenaltySpec::lasso();
    let report = cross_validate(&folds, &spec, &CvOptions::default()).unwrap();
    let smallest = *report.lambdas().last().unwrap();
    let fit = train(&folds, &spec.clone().with_lambdas(vec![smallest]), &CvOptions::default()).unwrap();
    assert!((fit.model.coefficients[0] - 2.0).abs() <= 0.05);
    let exact = ols(&rows);
    assert!((fit.model.coefficients[0] - exact.coefficients[0]).abs() <= 0.05);
    assert!((fit.in_sample_mse - rowwise_mse(&rows, &fit.model)).abs() <= 1e-9);
}

#[test]
fn literal_fold_indexing_drops_the_last_fold() {
    let rows = random_dataset(&mut rng(6), 120, 4);
    let folds = folded_from_rows(&rows, 4, 9);
    let options = CvOptions {
        literal_fold_indices: true,
        ..Default::default()
    };
    let fit = train(&folds, &PenaltySpec::lasso(), &options).unwrap();
    assert_eq!(fit.cv.scored_folds, vec![0, 1, 2]);
    assert!(fit.cv.fold_mse[3].iter().all(Option::is_none));
    assert_eq!(fit.n, folds.accepted_records() - folds.folds[3].n);
}

#[test]
fn report_is_self_consistent() {
    let rows = random_dataset(&mut rng(7), 200, 5);
    let folds = folded_from_rows(&rows, 5, 5);
    let spec = PenaltySpec::elastic_net(0.4).unwrap();
    let report = cross_validate(&folds, &spec, &CvOptions::default()).unwrap();
    for (l, m) in report.mean_mse.iter().enumerate() {
        let cells: Vec<f64> = report.scored_folds.iter().map(|&i| report.fold_mse[i][l].unwrap()).collect();
        let mean = cells.iter().sum::<f64>() / cells.len() as f64;
        assert!((m.unwrap() - mean).abs() <= 1e-12 * mean);
        assert!(m.unwrap() >= report.mean_mse[report.lambda_opt_index].unwrap());
    }
    assert_eq!(report.lambda_opt, report.lambdas()[report.lambda_opt_index]);
    assert!(report.lambdas().windows(2).all(|w| w[0] > w[1]));
    assert_eq!(report.fold_sizes.iter().sum::<u64>(), 200);
}

#[test]
fn fewer_than_two_nonempty_folds_is_an_error() {
    let rows = random_dataset(&mut rng(2), 10, 2);
    let mut folds = FoldedStats::zero(3, 2);
    for (x, y) in &rows {
        folds.folds[1].push(x, *y).unwrap();
    }
    assert!(cross_validate(&folds, &PenaltySpec::lasso(), &CvOptions::default()).is_err());
}

#[test]
fn matches_row_level_reference() {
    let control = SolveControl::default();
    for (seed, spec) in [
        (1, PenaltySpec::lasso()),
        (2, PenaltySpec::ridge()),
        (3, PenaltySpec::elastic_net(0.3).unwrap()),
    ] {
        let rows = random_dataset(&mut rng(seed), 120, 5);
        let reference = reference_pipeline(&rows, 4, seed, &spec, &control);
        let fit = train(&folded_from_rows(&rows, 4, seed), &spec, &CvOptions::default()).unwrap();
        for (a, b) in fit.cv.mean_mse.iter().zip(&reference.mean_mse) {
            assert!((a.unwrap() - b).abs() <= 1e-9 * b);
        }
        assert_eq!(fit.cv.lambda_opt_index, reference.lambdas.iter().position(|&l| l == reference.lambda_opt).unwrap());
        for (a, b) in fit.model.coefficients.iter().zip(&reference.model.coefficients) {
            assert!((a - b).abs() <= 1e-7, "{a} vs {b}");
        }
    }
}
