use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::args::*;
use super::dataset::{load_delimited, subsample, DelimitedFormat, SubsampleSpec};
use super::svg::{PowerChart, Series};
use super::{usage, CliError};
use crate::calibrate::{Method, PermutationPlan, TieMode};
use crate::graphs::ShpMode;
use crate::kernels::KernelFamily;
use crate::rng::derive_seed;
use crate::simgen::{battery, fmt_float, generate, power_study, Grid, PowerTable, Scenario, ScenarioId};
use crate::stats::StatKind;
use crate::twosample::{run_test, Calibration, Dissimilarity, TestSpec};

type CliResult<T> = std::result::Result<T, CliError>;

pub(super) fn dispatch(cmd: Command, out: &mut Vec<u8>) -> CliResult<()> {
    match cmd {
        Command::Test(a) => test_command(&a, out),
        Command::Power(a) => power_command(&a, out),
        Command::Bench(a) => bench_command(&a, out),
        Command::Subsample(a) => subsample_command(&a, out),
    }
}

fn parse_delimiter(s: &str) -> CliResult<u8> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => usage(format!("delimiter {s:?} must be a single ASCII character or `tab`")),
    }
}

fn plan_from(cal: &CalibrationArgs) -> CliResult<PermutationPlan> {
    let ties = match cal.ties {
        TiesArg::Conservative => TieMode::Conservative,
        TiesArg::Randomized => TieMode::Randomized,
    };
    PermutationPlan::new(cal.perms, cal.seed, cal.alpha)
        .map(|p| p.with_ties(ties))
        .or_else(|e| usage(e.to_string()))
}

fn shp_mode(a: ShpArg) -> ShpMode {
    match a {
        ShpArg::Auto => ShpMode::Auto,
        ShpArg::Exact => ShpMode::Exact,
        ShpArg::TwoOpt => ShpMode::TwoOpt,
    }
}

fn stat_kind(t: TestArg) -> StatKind {
    match t {
        TestArg::Nn => StatKind::Nn,
        TestArg::Mst => StatKind::MstRun,
        TestArg::Shp => StatKind::ShpRun,
        TestArg::Nbp => StatKind::Nbp,
        TestArg::CfNn => StatKind::CfNn,
        TestArg::CfMst => StatKind::CfMst,
    }
}

fn kernel_family(k: KernelArg) -> KernelFamily {
    match k {
        KernelArg::Euclid => KernelFamily::EuclidScaled,
        KernelArg::Lin => KernelFamily::Lin,
        KernelArg::Log => KernelFamily::Log1p,
        KernelArg::Exp => KernelFamily::ExpNeg,
    }
}

/// Writes `bytes` to a temporary file beside `path`, then renames it.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::from(e.error))?;
    Ok(())
}

/// Expands `a,b,...,c` into a geometric progression when `b / a` is an
/// integer of at least 2 whose powers reach `c` exactly, and into an
/// arithmetic one with step `b - a` otherwise. Plain lists pass through.
pub fn expand_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let tokens: Vec<&str> = s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    let mut out: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i] == "..." {
            let (a, b) = match out.len() {
                n if n >= 2 => (out[n - 2], out[n - 1]),
                _ => return Err(format!("`...` in {s:?} needs two values before it")),
            };
            let c: f64 = match tokens.get(i + 1) {
                Some(t) => t.parse().map_err(|_| format!("{t:?} is not a number"))?,
                None => return Err(format!("`...` in {s:?} needs an end value")),
            };
            let ratio = b / a;
            let geometric = a > 0.0 && ratio >= 2.0 && ratio == ratio.round() && {
                let mut x = b;
                while x < c {
                    x *= ratio;
                }
                x == c
            };
            if geometric {
                let mut x = b * ratio;
                while x <= c {
                    out.push(x);
                    x *= ratio;
                }
            } else {
                let step = b - a;
                if !(step > 0.0) || c < b {
                    return Err(format!("cannot expand {a}, {b}, ..., {c}"));
                }
                let count = ((c - b) / step + 1e-9).floor() as usize;
                for j in 1..=count {
                    out.push(b + step * j as f64);
                }
                if (out.last().copied().unwrap_or(b) - c).abs() > 1e-9 * c.abs().max(1.0) {
                    out.push(c);
                }
            }
            i += 2;
            continue;
        }
        out.push(tokens[i].parse().map_err(|_| format!("{:?} is not a number", tokens[i]))?);
        i += 1;
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    if out.iter().any(|x| !x.is_finite()) {
        return Err(format!("{s:?} contains a non-finite value"));
    }
    Ok(out)
}

fn expand_counts(s: &str, what: &str) -> CliResult<Vec<usize>> {
    let values = expand_list(s).or_else(|e| usage(format!("{what}: {e}")))?;
    values
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v == v.round() && v < usize::MAX as f64 {
                Ok(v as usize)
            } else {
                usage(format!("{what}: {v} is not a whole number"))
            }
        })
        .collect()
}

fn parse_tests(list: &str, cal: &CalibrationArgs, mode: PowerCalibrationArg) -> CliResult<Vec<TestSpec>> {
    let mut specs = Vec::new();
    for item in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let Some((stat, dis)) = item.split_once(':') else {
            return usage(format!("test {item:?} must look like `nn:euclid`"));
        };
        let Some(stat) = StatKind::parse(stat) else {
            return usage(format!("unknown test {stat:?}"));
        };
        let Some(dis) = Dissimilarity::parse(dis) else {
            return usage(format!("unknown dissimilarity {dis:?}"));
        };
        let calibration = match mode {
            PowerCalibrationArg::Perm => Calibration::Permutation,
            PowerCalibrationArg::Exact => Calibration::Exact,
            PowerCalibrationArg::Auto if stat.is_distribution_free() => Calibration::Exact,
            PowerCalibrationArg::Auto => Calibration::Permutation,
        };
        let mut spec = TestSpec::new(stat, dis).with_k(cal.k).with_calibration(calibration);
        spec.shp_mode = shp_mode(cal.shp);
        spec.validate().or_else(|e| usage(e.to_string()))?;
        specs.push(spec);
    }
    if specs.is_empty() {
        return usage("no tests given");
    }
    Ok(specs)
}

#[derive(Serialize)]
struct TestOutput {
    test: &'static str,
    dissimilarity: String,
    statistic: f64,
    p: f64,
    reject: bool,
    seed: u64,
    method: Method,
    perms: usize,
    alpha: f64,
    k: usize,
    m: usize,
    n: usize,
}

fn test_command(a: &TestArgs, out: &mut dyn Write) -> CliResult<()> {
    let format = DelimitedFormat {
        delimiter: parse_delimiter(&a.input.delimiter)?,
        label_column: a.input.label_column,
    };
    let kernel = kernel_family(a.kernel);
    let dis = if a.madd.is_on() { Dissimilarity::madd(kernel) } else { Dissimilarity::base(kernel) };
    let calibration = match a.calibration {
        CalibrationArg::Perm => Calibration::Permutation,
        CalibrationArg::Exact => Calibration::Exact,
    };
    let mut spec = TestSpec::new(stat_kind(a.test), dis).with_k(a.cal.k).with_calibration(calibration);
    spec.shp_mode = shp_mode(a.cal.shp);
    spec.validate().or_else(|e| usage(e.to_string()))?;
    let plan = plan_from(&a.cal)?;

    let ds = load_delimited(&a.input.data, format)?;
    let report = run_test(&ds.pooled, &spec, &ds.labels, &plan)?;
    let record = TestOutput {
        test: spec.stat.token(),
        dissimilarity: dis.label(),
        statistic: report.stat.value,
        p: report.p_value,
        reject: report.reject,
        seed: report.seed,
        method: report.method,
        perms: report.b_used,
        alpha: plan.alpha,
        k: spec.k,
        m: ds.m(),
        n: ds.n(),
    };
    let json = serde_json::to_string(&record).map_err(|e| CliError::Data(crate::Error::InvalidArgument(e.to_string())))?;
    writeln!(out, "{json}")?;
    writeln!(
        out,
        "{} with {} on {} ({} = {}, {} = {}): statistic {}, p = {:.4}, {} at alpha = {}",
        spec.stat.name(),
        dis.label(),
        ds.source.display(),
        ds.class_map[0],
        ds.m(),
        ds.class_map[1],
        ds.n(),
        report.stat.value,
        report.p_value,
        if report.reject { "reject" } else { "do not reject" },
        plan.alpha
    )?;
    Ok(())
}

fn zero_seconds(table: &mut PowerTable, timing: OnOff) {
    if !timing.is_on() {
        for r in &mut table.rows {
            r.seconds = 0.0;
        }
    }
}

fn families(tests: &[TestSpec]) -> Vec<StatKind> {
    let mut fam: Vec<StatKind> = Vec::new();
    for t in tests {
        if !fam.contains(&t.stat) {
            fam.push(t.stat);
        }
    }
    fam
}

fn power_command(a: &PowerArgs, out: &mut dyn Write) -> CliResult<()> {
    let tests = parse_tests(&a.tests, &a.cal, a.calibration)?;
    let plan = plan_from(&a.cal)?;
    if a.reps == 0 {
        return usage("--reps must be at least 1");
    }
    if a.data.is_some() {
        return data_power(a, &tests, &plan, out);
    }
    let Some(name) = a.scenario.as_deref() else {
        return usage("power needs --scenario or --data");
    };
    let Some(id) = ScenarioId::parse(name) else {
        return usage(format!("unknown scenario {name:?}; expected ex1 to ex7"));
    };
    let base = Scenario::new(id, a.d.unwrap_or(1)).with_gamma(a.gamma).null_mode(a.null);
    let (grid, log2_x, x_label) = match (&a.d_grid, &a.gamma_grid) {
        (Some(list), None) => (Grid::Dimensions(expand_counts(list, "--d-grid")?), true, "dimension d"),
        (None, Some(list)) => {
            if id != ScenarioId::Ex3 {
                return usage("--gamma-grid only applies to ex3");
            }
            let Some(d) = a.d else {
                return usage("--gamma-grid needs --d");
            };
            let gammas = expand_list(list).or_else(|e| usage(format!("--gamma-grid: {e}")))?;
            (Grid::Gammas { d, gammas }, false, "gamma")
        }
        _ => return usage("power needs exactly one of --d-grid or --gamma-grid"),
    };
    let points: Vec<Scenario> = match &grid {
        Grid::Dimensions(ds) => ds.iter().map(|&d| Scenario { d, ..base }).collect(),
        Grid::Gammas { d, gammas } => gammas.iter().map(|&g| Scenario { d: *d, gamma: g, ..base }).collect(),
    };
    for sc in &points {
        sc.validate().or_else(|e| usage(e.to_string()))?;
    }
    if a.m == 0 || a.n == 0 {
        return usage("--m and --n must be positive");
    }

    let mut table = power_study(&base, a.m, a.n, &grid, &tests, &plan, a.reps)?;
    zero_seconds(&mut table, a.timing);
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    std::fs::create_dir_all(&a.out)?;
    let csv_path = a.out.join("power.csv");
    write_atomic(&csv_path, &csv)?;
    writeln!(out, "wrote {} rows to {}", table.rows.len(), csv_path.display())?;

    if a.plot.is_on() {
        for fam in families(&tests) {
            let mut series: Vec<Series> = Vec::new();
            for t in tests.iter().filter(|t| t.stat == fam) {
                let label = t.dissimilarity.label();
                if series.iter().any(|s| s.label == label) {
                    continue;
                }
                let pts = table
                    .rows
                    .iter()
                    .filter(|r| r.test == fam.token() && r.kernel == label)
                    .map(|r| (if log2_x { r.d as f64 } else { r.gamma.unwrap_or(f64::NAN) }, r.power))
                    .collect();
                series.push(Series { label, points: pts });
            }
            let chart = PowerChart {
                title: format!("{} power, {}", fam.name(), id.token()),
                x_label: x_label.to_string(),
                log2_x,
                series,
            };
            let path = a.out.join(format!("power_{}.svg", fam.token()));
            write_atomic(&path, chart.render().as_bytes())?;
            writeln!(out, "wrote {}", path.display())?;
        }
    }
    Ok(())
}

pub const DATA_POWER_HEADER: [&str; 10] =
    ["source", "size", "m", "n", "test", "kernel", "reps", "power", "se", "seconds"];

fn data_power(a: &PowerArgs, tests: &[TestSpec], plan: &PermutationPlan, out: &mut dyn Write) -> CliResult<()> {
    let path = a.data.as_ref().expect("checked by caller");
    let format = DelimitedFormat { delimiter: parse_delimiter(&a.delimiter)?, label_column: a.label_column };
    let sizes = expand_counts(a.size_grid.as_deref().unwrap_or(""), "--size-grid")?;
    let ds = load_delimited(path, format)?;
    for &s in &sizes {
        if s < 2 || s > ds.pooled.len() {
            return usage(format!("subsample size {s} must lie in 2..={}", ds.pooled.len()));
        }
    }
    let source = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(DATA_POWER_HEADER).map_err(crate::Error::from)?;
    let mut curves: Vec<(StatKind, String, Vec<(f64, f64)>)> = Vec::new();
    for (gi, &size) in sizes.iter().enumerate() {
        let per_rep: Vec<(usize, usize, Vec<crate::simgen::Decision>)> = (0..a.reps)
            .into_par_iter()
            .map(|r| {
                let rep_seed = derive_seed(plan.seed, &[gi as u64, r as u64]);
                let sub = subsample(&ds, SubsampleSpec { total_size: size, seed: rep_seed })?;
                let d = battery(&sub.pooled, &sub.labels, tests, plan, rep_seed)?;
                Ok((sub.m(), sub.n(), d))
            })
            .collect::<crate::Result<_>>()?;
        let (m, n) = (per_rep[0].0, per_rep[0].1);
        for (ti, t) in tests.iter().enumerate() {
            let rejections = per_rep.iter().filter(|d| d.2[ti].reject).count();
            let power = rejections as f64 / a.reps as f64;
            let se = (power * (1.0 - power) / a.reps as f64).sqrt();
            let seconds = if a.timing.is_on() { per_rep.iter().map(|d| d.2[ti].seconds).sum() } else { 0.0 };
            w.write_record([
                source.clone(),
                size.to_string(),
                m.to_string(),
                n.to_string(),
                t.stat.token().to_string(),
                t.dissimilarity.label(),
                a.reps.to_string(),
                fmt_float(power),
                fmt_float(se),
                fmt_float(seconds),
            ])
            .map_err(crate::Error::from)?;
            let label = t.dissimilarity.label();
            match curves.iter_mut().find(|c| c.0 == t.stat && c.1 == label) {
                Some(c) => c.2.push((size as f64, power)),
                None => curves.push((t.stat, label, vec![(size as f64, power)])),
            }
        }
    }
    let csv = w.into_inner().map_err(|e| CliError::from(e.into_error()))?;
    std::fs::create_dir_all(&a.out)?;
    let csv_path = a.out.join("power.csv");
    write_atomic(&csv_path, &csv)?;
    writeln!(out, "wrote {} rows to {}", sizes.len() * tests.len(), csv_path.display())?;
    if a.plot.is_on() {
        for fam in families(tests) {
            let series = curves
                .iter()
                .filter(|c| c.0 == fam)
                .map(|c| Series { label: c.1.clone(), points: c.2.clone() })
                .collect();
            let chart = PowerChart {
                title: format!("{} power, {source}", fam.name()),
                x_label: "subsample size".into(),
                log2_x: false,
                series,
            };
            let svg_path = a.out.join(format!("power_{}.svg", fam.token()));
            write_atomic(&svg_path, chart.render().as_bytes())?;
            writeln!(out, "wrote {}", svg_path.display())?;
        }
    }
    Ok(())
}

pub const BENCH_HEADER: [&str; 7] = ["test", "kernel", "m", "n", "d", "trials", "mean_seconds"];

fn bench_command(a: &BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    let ms = expand_counts(&a.m, "--m")?;
    let ns = expand_counts(&a.n, "--n")?;
    let ds = expand_counts(&a.d, "--d")?;
    let sizes: Vec<(usize, usize)> = match (ms.len(), ns.len()) {
        (x, y) if x == y => ms.iter().copied().zip(ns.iter().copied()).collect(),
        (1, _) => ns.iter().map(|&n| (ms[0], n)).collect(),
        (_, 1) => ms.iter().map(|&m| (m, ns[0])).collect(),
        _ => return usage("--m and --n need the same length, or one of them a single value"),
    };
    if sizes.iter().any(|&(m, n)| m == 0 || n == 0) || ds.contains(&0) {
        return usage("sizes and dimensions must be positive");
    }
    if a.trials == 0 {
        return usage("--trials must be at least 1");
    }
    let mut stats = Vec::new();
    for t in a.tests.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        stats.push(StatKind::parse(t).map_or_else(|| usage(format!("unknown test {t:?}")), Ok)?);
    }
    let mut kernels = Vec::new();
    for k in a.kernels.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        kernels.push(Dissimilarity::parse(k).map_or_else(|| usage(format!("unknown dissimilarity {k:?}")), Ok)?);
    }
    if stats.is_empty() || kernels.is_empty() {
        return usage("--tests and --kernels must not be empty");
    }
    let plan = plan_from(&a.cal)?;

    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(BENCH_HEADER).map_err(crate::Error::from)?;
    // Each trial draws one data set and times every kernel on it back to back,
    // so drift in machine load hits all kernels alike.
    let index = |ki: usize, si: usize, di: usize, ti: usize| ((ki * sizes.len() + si) * ds.len() + di) * stats.len() + ti;
    let mut totals = vec![0.0; kernels.len() * sizes.len() * ds.len() * stats.len()];
    for (si, &(m, n)) in sizes.iter().enumerate() {
        for (di, &d) in ds.iter().enumerate() {
            let sc = Scenario::new(ScenarioId::Ex3, d).null_mode(true);
            for trial in 0..a.trials {
                let seed = derive_seed(plan.seed, &[si as u64, di as u64, trial as u64]);
                let (z, lab) = generate(&sc, m, n, seed)?;
                let trial_plan = PermutationPlan { seed, ..plan };
                for (ti, &stat) in stats.iter().enumerate() {
                    for step in 0..kernels.len() {
                        let ki = (step + trial) % kernels.len();
                        let mut spec = TestSpec::new(stat, kernels[ki]).with_k(a.cal.k);
                        spec.shp_mode = shp_mode(a.cal.shp);
                        let start = Instant::now();
                        run_test(&z, &spec, &lab, &trial_plan)?;
                        totals[index(ki, si, di, ti)] += start.elapsed().as_secs_f64();
                    }
                }
            }
        }
    }
    for (ki, dis) in kernels.iter().enumerate() {
        for (si, &(m, n)) in sizes.iter().enumerate() {
            for (di, &d) in ds.iter().enumerate() {
                for (ti, &stat) in stats.iter().enumerate() {
                    let total = totals[index(ki, si, di, ti)];
                    let mean = if a.timing.is_on() { total / a.trials as f64 } else { 0.0 };
                    w.write_record([
                        stat.token().to_string(),
                        dis.label(),
                        m.to_string(),
                        n.to_string(),
                        d.to_string(),
                        a.trials.to_string(),
                        fmt_float(mean),
                    ])
                    .map_err(crate::Error::from)?;
                }
            }
        }
    }
    let csv = w.into_inner().map_err(|e| CliError::from(e.into_error()))?;
    match &a.out {
        Some(path) => {
            write_atomic(path, &csv)?;
            writeln!(out, "wrote {}", path.display())?;
        }
        None => out.write_all(&csv)?,
    }
    Ok(())
}

fn subsample_command(a: &SubsampleArgs, out: &mut dyn Write) -> CliResult<()> {
    let format = DelimitedFormat {
        delimiter: parse_delimiter(&a.input.delimiter)?,
        label_column: a.input.label_column,
    };
    let ds = load_delimited(&a.input.data, format)?;
    if a.size < 2 || a.size > ds.pooled.len() {
        return usage(format!("--size {} must lie in 2..={}", a.size, ds.pooled.len()));
    }
    let sub = subsample(&ds, SubsampleSpec { total_size: a.size, seed: a.seed })?;
    let mut bytes = Vec::new();
    sub.write_delimited(&mut bytes, format)?;
    write_atomic(&a.out, &bytes)?;
    writeln!(
        out,
        "wrote {} rows ({} = {}, {} = {}) to {}",
        sub.pooled.len(),
        sub.class_map[0],
        sub.m(),
        sub.class_map[1],
        sub.n(),
        a.out.display()
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::expand_list;

    #[test]
    fn list_expansion() {
        assert_eq!(expand_list("2,4,...,1024").unwrap().len(), 10);
        assert_eq!(expand_list("2,4,...,10").unwrap(), vec![2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(expand_list("10,20,...,45").unwrap(), vec![10.0, 20.0, 30.0, 40.0, 45.0]);
        assert_eq!(expand_list("1, 3,5").unwrap(), vec![1.0, 3.0, 5.0]);
        assert_eq!(expand_list("0.5,1,...,2.5").unwrap(), vec![0.5, 1.0, 1.5, 2.0, 2.5]);
        assert!(expand_list("").is_err());
        assert!(expand_list("2,...,8").is_err());
        assert!(expand_list("x").is_err());
    }
}
