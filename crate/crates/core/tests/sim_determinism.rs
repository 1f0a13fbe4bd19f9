use ipod::sim::{self, Method, SimDesign};

fn design() -> SimDesign {
    let mut d = SimDesign::new(120, 4, 12, Some(15.0), 5.0);
    d.intercept = true;
    d.seed = 77;
    d
}

fn study_in_pool(threads: usize) -> sim::StudyReport {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| sim::run_study(&design(), Method::HardTuned, 6).unwrap())
}

#[test]
fn study_is_identical_across_thread_counts() {
    let a = study_in_pool(1);
    let b = study_in_pool(4);
    assert_eq!(a.replicates, b.replicates);
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.beta_mse.to_bits(), b.beta_mse.to_bits());
}

#[test]
fn designs_and_responses_repeat_bit_for_bit() {
    let d = sim::replicate_design(&design(), 5, 3);
    assert_eq!(sim::gen_design(&d).unwrap(), sim::gen_design(&d).unwrap());
    assert_eq!(sim::gen_response(&d).unwrap(), sim::gen_response(&d).unwrap());
    let other = sim::replicate_design(&design(), 5, 4);
    assert_ne!(sim::gen_response(&d).unwrap(), sim::gen_response(&other).unwrap());
}

#[test]
fn shift_of_eight_is_visible_in_the_first_rows() {
    let mut d = SimDesign::new(200, 3, 10, None, 8.0);
    d.seed = 1;
    let y = sim::gen_response(&d).unwrap();
    assert!(y.rows(0, 10).iter().all(|v| (v - 8.0).abs() <= 4.5));
    assert!(y.rows(10, 190).mean().abs() < 0.3);
}

#[test]
fn invalid_designs_are_rejected() {
    assert!(sim::gen_design(&SimDesign::new(10, 10, 2, None, 1.0)).is_err());
    assert!(sim::gen_design(&SimDesign::new(10, 3, 10, None, 1.0)).is_err());
    assert!(sim::run_study(&design(), Method::Oracle, 0).is_err());
}
