use graphtest::calibrate::PermutationPlan;
use graphtest::kernels::PooledSample;
use graphtest::rng::Stream;
use graphtest::simgen::{
    generate, power_study, power_study_with, Decision, Grid, PowerTable, Scenario, ScenarioId, POWER_HEADER,
};
use graphtest::stats::StatKind;
use graphtest::twosample::{Dissimilarity, TestSpec};

fn column_variances(z: &PooledSample, range: std::ops::Range<usize>) -> Vec<f64> {
    let pts = &z.points()[range];
    let n = pts.len() as f64;
    (0..z.dim())
        .map(|q| {
            let mean = pts.iter().map(|p| p.coords()[q]).sum::<f64>() / n;
            pts.iter().map(|p| (p.coords()[q] - mean).powi(2)).sum::<f64>() / (n - 1.0)
        })
        .collect()
}

#[test]
fn ex3_variances_near_one() {
    let (z, _) = generate(&Scenario::new(ScenarioId::Ex3, 500), 50, 50, 1).unwrap();
    for range in [0..50, 50..100] {
        let v = column_variances(&z, range);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 1.0).abs() < 0.1, "{mean}");
    }
}

#[test]
fn ex1_coordinate_variances() {
    let (z, _) = generate(&Scenario::new(ScenarioId::Ex1, 4), 10_000, 10_000, 2).unwrap();
    let f = column_variances(&z, 0..10_000);
    let g = column_variances(&z, 10_000..20_000);
    for (got, want) in f.iter().zip([1.0, 1.0, 2.0, 2.0]).chain(g.iter().zip([2.0, 2.0, 1.0, 1.0])) {
        assert!((got / want - 1.0).abs() < 0.05, "{got} vs {want}");
    }
}

#[test]
fn ex2_second_sample_variance() {
    // √3 · t5 has variance 3 · 5/3 = 5, matching N(0, 5).
    let (z, _) = generate(&Scenario::new(ScenarioId::Ex2, 20), 4000, 4000, 3).unwrap();
    for range in [0..4000, 4000..8000] {
        let v = column_variances(&z, range);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean / 5.0 - 1.0).abs() < 0.05, "{mean}");
    }
}

#[test]
fn ex5_support() {
    let (z, _) = generate(&Scenario::new(ScenarioId::Ex5, 30), 500, 500, 4).unwrap();
    for (i, p) in z.points().iter().enumerate() {
        let bound = if i < 500 { 0.5 } else { 0.55 };
        assert!(p.coords().iter().all(|x| x.abs() <= bound));
    }
}

#[test]
fn mixture_fractions() {
    let n = 10_000;
    let (z, _) = generate(&Scenario::new(ScenarioId::Ex4, 1024), 1, n, 5).unwrap();
    let positive = z.points()[1..]
        .iter()
        .filter(|p| {
            // Second sample components are centred at ±0.3·α with α = (1, -1, ...).
            let proj: f64 = p.coords().iter().enumerate().map(|(q, x)| if q % 2 == 0 { *x } else { -x }).sum();
            proj > 0.0
        })
        .count();
    let frac = positive as f64 / n as f64;
    assert!((0.48..=0.52).contains(&frac), "{frac}");

    let (z, _) = generate(&Scenario::new(ScenarioId::Ex5, 200), 1, n, 6).unwrap();
    let wide = z.points()[1..].iter().filter(|p| p.coords().iter().any(|x| x.abs() > 0.5)).count();
    let frac = wide as f64 / n as f64;
    // With d = 200 a draw from the wider cube leaves [-0.5, 0.5] almost surely.
    assert!((0.48..=0.52).contains(&frac), "{frac}");
}

#[test]
fn sparse_scenarios_leave_tail_coordinates_standard() {
    let sc = Scenario::new(ScenarioId::Ex7, 1000);
    assert_eq!(sc.signal_coordinates(), 100);
    let (z, _) = generate(&sc, 2000, 2000, 7).unwrap();
    let g = column_variances(&z, 2000..4000);
    let tail = g[100..].iter().sum::<f64>() / 900.0;
    assert!((tail - 1.0).abs() < 0.03, "{tail}");
    let head = g[..100].iter().sum::<f64>() / 100.0;
    // t3 scaled by √(1/3) has unit variance but heavy tails; the sample mean is noisy.
    assert!((head - 1.0).abs() < 0.25, "{head}");
}

#[test]
fn generation_is_reproducible() {
    for id in ScenarioId::ALL {
        let sc = Scenario::new(id, 16);
        assert_eq!(generate(&sc, 5, 6, 99).unwrap(), generate(&sc, 5, 6, 99).unwrap());
        assert_ne!(generate(&sc, 5, 6, 99).unwrap().0, generate(&sc, 5, 6, 100).unwrap().0);
    }
}

#[test]
fn invalid_scenarios() {
    assert!(generate(&Scenario::new(ScenarioId::Ex1, 5), 3, 3, 0).is_err());
    assert!(generate(&Scenario::new(ScenarioId::Ex3, 5).with_gamma(0.0), 3, 3, 0).is_err());
    assert!(generate(&Scenario::new(ScenarioId::Ex3, 0), 3, 3, 0).is_err());
}

#[test]
fn always_rejecting_test_has_power_one() {
    let names = vec![("always".to_string(), "none".to_string())];
    let table = power_study_with(
        &Scenario::new(ScenarioId::Ex2, 8),
        4,
        4,
        &Grid::Dimensions(vec![2, 4, 8]),
        7,
        1,
        &names,
        |_, _, _| Ok(vec![Decision { reject: true, seconds: 0.0 }]),
    )
    .unwrap();
    assert_eq!(table.rows.len(), 3);
    assert!(table.rows.iter().all(|r| r.power == 1.0 && r.se == 0.0));
}

fn small_study(reps: usize, grid: Grid, null: bool) -> PowerTable {
    let tests = [
        TestSpec::new(StatKind::Nn, Dissimilarity::parse("rho1").unwrap()),
        TestSpec::new(StatKind::MstRun, Dissimilarity::parse("euclid").unwrap()),
    ];
    let plan = PermutationPlan { b: 99, seed: 11, ..Default::default() };
    power_study(&Scenario::new(ScenarioId::Ex3, 10).null_mode(null).with_gamma(2.0), 8, 8, &grid, &tests, &plan, reps)
        .unwrap()
}

#[test]
fn single_replication_gives_zero_or_one() {
    let table = small_study(1, Grid::Dimensions(vec![4, 8]), false);
    assert_eq!(table.rows.len(), 4);
    assert!(table.rows.iter().all(|r| r.power == 0.0 || r.power == 1.0));
}

#[test]
fn gamma_grid_rows_carry_gamma() {
    let table = small_study(3, Grid::Gammas { d: 6, gammas: vec![1.0, 4.0] }, false);
    assert_eq!(table.rows.len(), 4);
    assert_eq!(table.rows[0].gamma, Some(1.0));
    assert_eq!(table.rows[3].gamma, Some(4.0));
    assert!(table.rows.iter().all(|r| r.d == 6));
}

#[test]
fn csv_layout() {
    let table = small_study(2, Grid::Dimensions(vec![4]), false);
    let mut out = Vec::new();
    table.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.ends_with('\n'));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), POWER_HEADER.to_vec());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][0], "ex3");
    assert_eq!(rows[0][6].parse::<f64>().unwrap(), table.rows[0].power);
}

#[test]
fn study_is_thread_count_independent() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| small_study(6, Grid::Dimensions(vec![4, 8]), true))
    };
    let strip = |mut t: PowerTable| {
        t.rows.iter_mut().for_each(|r| r.seconds = 0.0);
        t
    };
    assert_eq!(strip(run(1)), strip(run(4)));
}

#[test]
fn streams_are_independent_of_draw_order() {
    let mut a = Stream::new(5, &[1, 2]);
    let mut b = Stream::new(5, &[1, 3]);
    assert_ne!(a.next_u64(), b.next_u64());
}
