use vqeg_core::game::{gen_dominant_row, gen_matching_pennies};
use vqeg_core::{run, EgConfig, ShotMode, PASS_TOLERANCE};

#[test]
fn dominant_4x4_two_layers_best_of_five() {
    let a = gen_dominant_row(4, 0).unwrap().matrix;
    let best = (0..5)
        .map(|seed| {
            let cfg =
                EgConfig { steps: 2000, seed, layers_row: 2, layers_col: 2, record_every: 10, ..EgConfig::default() };
            run(&a, &cfg).unwrap().0.best_gap()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best <= PASS_TOLERANCE, "best gap {best}");
}

#[test]
fn pennies_2x2_exact() {
    let a = gen_matching_pennies(2).unwrap().matrix;
    let (res, trace) = run(&a, &EgConfig { steps: 2000, ..EgConfig::default() }).unwrap();
    assert!(res.passed, "gaps {} / {}", res.final_gap_last, res.final_gap_avg);
    assert!(trace.records.iter().all(|r| r.gap >= 0.0));
}

#[test]
fn shot_mode_iterates_stay_in_the_box() {
    let a = gen_dominant_row(4, 2).unwrap().matrix;
    let cfg = EgConfig {
        steps: 200,
        shots: ShotMode::shots(32).unwrap(),
        eta: 2.0,
        box_halfwidth: 0.5,
        ..EgConfig::default()
    };
    let (res, _) = run(&a, &cfg).unwrap();
    assert!(res.final_params.as_slice().iter().all(|v| v.abs() <= 0.5));
}
