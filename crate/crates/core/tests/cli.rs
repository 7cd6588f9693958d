use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use graphtest::rng::Stream;

fn graphtest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphtest")).args(args).env("GRAPHTEST_THREADS", "2").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_two_class(path: &Path, m: usize, n: usize, d: usize, shift: f64, seed: u64) {
    let mut s = Stream::new(seed, &[]);
    let mut text = String::new();
    for i in 0..m + n {
        let (label, mu) = if i < m { ("ctrl", 0.0) } else { ("case", shift) };
        text.push_str(label);
        for _ in 0..d {
            text.push_str(&format!(",{}", mu + s.standard_normal()));
        }
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

fn json(o: &Output) -> serde_json::Value {
    let text = stdout(o);
    let line = text.lines().next().unwrap();
    serde_json::from_str(line).unwrap()
}

fn p_value(o: &Output) -> f64 {
    json(o)["p"].as_f64().unwrap()
}

fn tmp() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    (dir, path)
}

#[test]
fn help_and_version() {
    let o = graphtest(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for sub in ["test", "power", "bench", "subsample"] {
        assert!(stdout(&o).contains(sub));
    }
    assert_eq!(graphtest(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(graphtest(&[]).status.code(), Some(2));
    assert_eq!(graphtest(&["test"]).status.code(), Some(2));
    assert_eq!(graphtest(&["test", "--test", "nn"]).status.code(), Some(2));
    assert_eq!(graphtest(&["frobnicate"]).status.code(), Some(2));
    let (_d, dir) = tmp();
    let data = dir.join("x.csv");
    write_two_class(&data, 5, 5, 3, 0.0, 1);
    let data = data.to_str().unwrap();
    assert_eq!(graphtest(&["test", "--data", data, "--test", "nn", "--kernel", "cosine"]).status.code(), Some(2));
    assert_eq!(graphtest(&["test", "--data", data, "--test", "nn", "--alpha", "1.5"]).status.code(), Some(2));
    assert_eq!(graphtest(&["test", "--data", data, "--test", "nn", "--perms", "0"]).status.code(), Some(2));
    let out = dir.join("p");
    let out = out.to_str().unwrap();
    assert_eq!(graphtest(&["power", "--scenario", "ex9", "--d-grid", "4", "--out", out]).status.code(), Some(2));
}

#[test]
fn data_errors_exit_one() {
    let (_d, dir) = tmp();
    let missing = dir.join("missing.csv");
    let o = graphtest(&["test", "--data", missing.to_str().unwrap(), "--test", "nn"]);
    assert_eq!(o.status.code(), Some(1));

    let three = dir.join("three.csv");
    fs::write(&three, "a,1\na,2\nb,3\nb,4\nc,5\n").unwrap();
    let o = graphtest(&["test", "--data", three.to_str().unwrap(), "--test", "nn"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains('a') && e.contains('b') && e.contains('c'), "{e}");

    let ragged = dir.join("ragged.csv");
    fs::write(&ragged, "a,1,2\na,2\nb,3,1\nb,4,0\n").unwrap();
    let o = graphtest(&["test", "--data", ragged.to_str().unwrap(), "--test", "nn"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ragged.csv:2:"), "{}", stderr(&o));

    let bad = dir.join("bad.csv");
    fs::write(&bad, "a,1\na,oops\nb,3\nb,4\n").unwrap();
    assert_eq!(graphtest(&["test", "--data", bad.to_str().unwrap(), "--test", "nn"]).status.code(), Some(1));
}

#[test]
fn test_output_fields() {
    let (_d, dir) = tmp();
    let data = dir.join("x.csv");
    write_two_class(&data, 12, 10, 30, 0.0, 2);
    let o = graphtest(&["test", "--data", data.to_str().unwrap(), "--test", "mst", "--kernel", "lin", "--perms", "199"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["test"], "mst");
    assert_eq!(v["dissimilarity"], "lin");
    assert_eq!(v["perms"], 199);
    assert_eq!(v["m"].as_u64().unwrap() + v["n"].as_u64().unwrap(), 22);
    let p = v["p"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
    assert_eq!(v["reject"].as_bool().unwrap(), p <= 0.05);
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn exact_calibration_for_path_tests() {
    let (_d, dir) = tmp();
    let data = dir.join("x.csv");
    write_two_class(&data, 4, 4, 3, 0.0, 3);
    let data = data.to_str().unwrap();
    for t in ["shp", "nbp"] {
        let o = graphtest(&["test", "--data", data, "--test", t, "--calibration", "exact"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert_eq!(json(&o)["method"], "exact_null");
    }
    let o = graphtest(&["test", "--data", data, "--test", "nn", "--calibration", "exact"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shifted_samples_are_rejected() {
    let (_d, dir) = tmp();
    let data = dir.join("x.csv");
    write_two_class(&data, 20, 20, 50, 1.0, 4);
    for t in ["nn", "mst", "shp", "nbp", "cf-nn", "cf-mst"] {
        let o = graphtest(&["test", "--data", data.to_str().unwrap(), "--test", t, "--seed", "1"]);
        assert_eq!(o.status.code(), Some(0), "{t}: {}", stderr(&o));
        assert!(p_value(&o) < 0.01, "{t}: {}", stdout(&o));
    }
}

#[test]
fn identical_samples_are_not_rejected() {
    let (_d, dir) = tmp();
    let data = dir.join("x.csv");
    let mut s = Stream::new(5, &[]);
    let rows: Vec<String> = (0..15)
        .map(|_| (0..20).map(|_| s.standard_normal().to_string()).collect::<Vec<_>>().join(","))
        .collect();
    let mut text = String::new();
    for label in ["left", "right"] {
        for r in &rows {
            text.push_str(&format!("{label},{r}\n"));
        }
    }
    fs::write(&data, text).unwrap();
    let kept = (0..20)
        .filter(|seed| {
            let seed = seed.to_string();
            let o = graphtest(&["test", "--data", data.to_str().unwrap(), "--test", "nn", "--perms", "199", "--seed", &seed]);
            p_value(&o) > 0.05
        })
        .count();
    assert!(kept >= 18, "{kept}/20");
}

#[test]
fn delimiter_and_label_column() {
    let (_d, dir) = tmp();
    let data = dir.join("x.tsv");
    fs::write(&data, "1.0\t2.0\tx\n1.5\t2.5\tx\n0.5\t2.5\tx\n9.0\t9.5\ty\n9.5\t8.0\ty\n8.5\t9.0\ty\n").unwrap();
    let o = graphtest(&["test", "--data", data.to_str().unwrap(), "--delimiter", "tab", "--label-column", "2", "--test", "mst"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["statistic"].as_f64().unwrap(), 2.0);
}

#[test]
fn subsample_round_trip() {
    let (_d, dir) = tmp();
    let data = dir.join("x.csv");
    write_two_class(&data, 48, 73, 4, 0.0, 6);
    let out = dir.join("sub.csv");
    let args = ["subsample", "--data", data.to_str().unwrap(), "--size", "40", "--seed", "3", "--out", out.to_str().unwrap()];
    let o = graphtest(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines.len(), 40);
    assert_eq!(lines.iter().filter(|l| l.starts_with("ctrl,")).count(), 16);
    let source = fs::read_to_string(&data).unwrap();
    let source: Vec<Vec<f64>> = source.lines().map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect()).collect();
    for l in &lines {
        let row: Vec<f64> = l.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert!(source.contains(&row));
    }
    graphtest(&args);
    assert_eq!(fs::read_to_string(&out).unwrap(), first);
    let o = graphtest(&["test", "--data", out.to_str().unwrap(), "--test", "nn", "--perms", "99"]);
    assert_eq!(json(&o)["m"], 24);
    let too_big = ["subsample", "--data", data.to_str().unwrap(), "--size", "500", "--out", out.to_str().unwrap()];
    assert_eq!(graphtest(&too_big).status.code(), Some(2));
}

#[test]
fn power_writes_csv_and_plots() {
    let (_d, dir) = tmp();
    let out = dir.join("power");
    let o = graphtest(&[
        "power", "--scenario", "ex3", "--d-grid", "4,8", "--m", "6", "--n", "6", "--reps", "3", "--perms", "49",
        "--tests", "nn:euclid,mst:rho2", "--out", out.to_str().unwrap(), "--timing", "off",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("power.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "scenario,d,gamma,test,kernel,reps,power,se,seconds");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with(",0.0000000000000000e0")));
    let svgs = fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"))
        .count();
    assert!(svgs >= 1);
}

#[test]
fn data_power_over_sizes() {
    let (_d, dir) = tmp();
    let data = dir.join("x.csv");
    write_two_class(&data, 30, 30, 5, 1.5, 7);
    let out = dir.join("dp");
    let o = graphtest(&[
        "power", "--data", data.to_str().unwrap(), "--size-grid", "10,20", "--reps", "4", "--perms", "49",
        "--tests", "nn:euclid", "--out", out.to_str().unwrap(), "--plot", "off",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("power.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "source,size,m,n,test,kernel,reps,power,se,seconds");
    assert_eq!(lines.count(), 2);
}

#[test]
fn bench_single_trial() {
    let (_d, dir) = tmp();
    let out = dir.join("bench.csv");
    let o = graphtest(&[
        "bench", "--m", "5", "--n", "6", "--d", "4,8", "--trials", "1", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["test", "kernel", "m", "n", "d", "trials", "mean_seconds"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 2 * 2);
    assert!(rows.iter().all(|r| r[5] == *"1" && r[6].parse::<f64>().unwrap() >= 0.0));
}
