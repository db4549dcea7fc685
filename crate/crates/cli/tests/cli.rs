use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_wost-implicit");
const TOL: f64 = 1e-4;
const SHRINK: f64 = 1e-3;

fn scene(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "scenes", name].iter().collect();
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Runs and requires exit code 0.
fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}\nstdout:\n{}\nstderr:\n{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

/// `key: value` lines of the report.
fn fields(text: &str) -> HashMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once(": "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn num(f: &HashMap<String, String>, key: &str) -> f64 {
    f.get(key).unwrap_or_else(|| panic!("missing {key}")).parse().unwrap_or_else(|_| panic!("{key} is not a number"))
}

/// Parses `[a, b]` or `(a, b, ...)`.
fn tuple(f: &HashMap<String, String>, key: &str) -> Vec<f64> {
    let s = f.get(key).unwrap_or_else(|| panic!("missing {key}"));
    s.trim_matches(|c| matches!(c, '[' | ']' | '(' | ')')).split(", ").map(|t| t.parse().unwrap()).collect()
}

fn write_scene(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn pgm_pixels(bytes: &[u8]) -> (usize, usize, Vec<u8>) {
    let text = String::from_utf8_lossy(&bytes[..20]).into_owned();
    let mut it = text.split_whitespace();
    assert_eq!(it.next(), Some("P5"));
    let w: usize = it.next().unwrap().parse().unwrap();
    let h: usize = it.next().unwrap().parse().unwrap();
    assert_eq!(it.next(), Some("255"));
    let pixels = bytes[bytes.len() - w * h..].to_vec();
    (w, h, pixels)
}

#[test]
fn cpq_from_outside_the_circle() {
    let out = ok(&["query", "cpq", "--scene", &scene("circle_robin.scene"), "--point", "2,0"]);
    let f = fields(&out);
    let r = tuple(&f, "R_D");
    assert!(r[0] <= 1.0 + 1e-12 && r[1] >= 1.0 - 1e-12, "{out}");
    assert!(r[0] > 1.0 - 2.0 * TOL && r[1] < 1.0 + 2.0 * TOL, "{out}");
    assert_eq!(f["boundary"], "reflecting");
    let c = tuple(&f, "closest");
    assert!((c[0] - 1.0).abs() < 2.0 * TOL && c[1].abs() < 0.02, "{out}");
}

#[test]
fn silhouette_from_distance_two() {
    let out = ok(&["query", "silhouette", "--scene", &scene("circle_robin.scene"), "--point", "2,0"]);
    let f = fields(&out);
    let expected = 3f64.sqrt();
    assert!((num(&f, "R_S") - expected * (1.0 - SHRINK)).abs() < 10.0 * TOL, "{out}");
    assert!((num(&f, "R_S_unshrunk") - expected).abs() < 10.0 * TOL, "{out}");
    let w = tuple(&f, "witness");
    assert!((w[0] - 0.5).abs() < 0.01 && (w[1].abs() - 0.75f64.sqrt()).abs() < 0.01, "{out}");
    assert_eq!(f["certified"], "true");
}

#[test]
fn robin_radius_at_the_circle_centre() {
    let out = ok(&["query", "robin-radius", "--scene", &scene("circle_robin.scene"), "--point", "0,0", "--mu", "1"]);
    let f = fields(&out);
    assert!((num(&f, "R_R") - std::f64::consts::E).abs() < 10.0 * TOL, "{out}");
    assert_eq!(f["unbounded"], "false");
}

#[test]
fn oracles_agree_with_closed_forms() {
    let s = scene("circle_robin.scene");
    let f = fields(&ok(&["oracle", "robin-radius", "--scene", &s, "--point", "0,0"]));
    assert!((num(&f, "R_R") - std::f64::consts::E).abs() < 1e-3, "{f:?}");
    let f = fields(&ok(&["oracle", "silhouette", "--scene", &s, "--point", "2,0"]));
    assert!((num(&f, "R_S") - 3f64.sqrt()).abs() < 1e-3, "{f:?}");
    let f = fields(&ok(&["oracle", "cpq", "--scene", &s, "--point", "2,0"]));
    assert!((num(&f, "R_D") - 1.0).abs() < 1e-3, "{f:?}");
}

#[test]
fn oracle_rejects_low_density() {
    let o = run(&["oracle", "cpq", "--scene", &scene("circle_robin.scene"), "--point", "2,0", "--density", "999"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trace_counts_match_reported_stats() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("trace.csv");
    for kind in ["cpq", "silhouette", "robin-radius"] {
        let out = ok(&["query", kind, "--scene", &scene("circle_robin.scene"), "--point", "0.3,0.2", "--trace", trace.to_str().unwrap()]);
        let f = fields(&out);
        let csv = std::fs::read_to_string(&trace).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("event,x_lo,x_hi,y_lo,y_hi"));
        let mut counts: HashMap<String, usize> = HashMap::new();
        for l in lines {
            assert_eq!(l.split(',').count(), 5);
            *counts.entry(l.split(',').next().unwrap().to_string()).or_default() += 1;
        }
        let count = |e: &str| counts.get(e).copied().unwrap_or(0) as f64;
        assert_eq!(count("explored"), num(&f, "boxes_explored"), "{kind}: {counts:?}");
        assert_eq!(count("pruned_constraint"), num(&f, "boxes_pruned_constraint"), "{kind}");
        assert_eq!(count("pruned_bound"), num(&f, "boxes_pruned_bound"), "{kind}");
        assert_eq!(count("accepted"), num(&f, "boxes_accepted"), "{kind}");
        assert!(count("explored") > 0.0);
        assert_eq!(counts.len(), counts.keys().filter(|k| ["explored", "pruned_constraint", "pruned_bound", "accepted"].contains(&k.as_str())).count());
    }
}

#[test]
fn query_output_dir_has_manifest() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("q");
    ok(&["query", "star", "--scene", &scene("annulus_robin.scene"), "--point", "0.75,0", "--out", out.to_str().unwrap()]);
    let m = manifest(&out);
    assert_eq!(m["subcommand"], "query");
    assert_eq!(m["parameters"]["kind"], "star");
    let files = m["outputs"].as_array().unwrap();
    assert_eq!(files.len(), 1);
    let text = std::fs::read(out.join("query.txt")).unwrap();
    let digest = files[0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    let f = fields(&String::from_utf8(text).unwrap());
    assert!(num(&f, "R_R") <= num(&f, "R_S") && num(&f, "R_S") <= tuple(&f, "R_D")[1]);
}

#[test]
fn sampled_boundary_points_are_members() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g");
    let s = scene("blobs_robin.scene");
    ok(&["query", "sample-gamma", "--scene", &s, "--point", "0,0.6", "--radius", "0.5", "--seed", "3", "--out", out.to_str().unwrap()]);
    let csv = std::fs::read_to_string(out.join("samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), 101);
    let f = fields(&ok(&["oracle", "gamma-membership", "--scene", &s, "--point", "0,0.6", "--radius", "0.5", "--seed", "3", "--density", "4000"]));
    assert_eq!(f["all_members"], "true", "{f:?}");
    assert_eq!(num(&f, "members"), 100.0);
}

#[test]
fn constant_dirichlet_gives_constant_gray() {
    let dir = TempDir::new().unwrap();
    let s = write_scene(
        dir.path(),
        "const.scene",
        "dimension 2\ndomain [-1.2, 1.2] [-1.2, 1.2]\nepsilon 1e-3\n\
         dirichlet inside circle(0, 0, 1)\nreflecting outside circle(0.2, 0, 0.3)\ndirichlet_value 0.7\n",
    );
    let out = dir.path().join("run");
    ok(&["solve", "--scene", &s, "--grid", "12x12", "--walks", "20", "--out", out.to_str().unwrap()]);
    let m = manifest(&out);
    let (lo, hi) = (m["image_min"].as_f64().unwrap(), m["image_max"].as_f64().unwrap());
    assert_eq!(lo, hi);
    assert!((lo - 0.7).abs() < 1e-12);
    let (w, h, px) = pgm_pixels(&std::fs::read(out.join("solution.pgm")).unwrap());
    assert_eq!((w, h), (12, 12));
    assert!(px.iter().all(|&p| p == 0 || p == 128), "{px:?}");
    assert!(px.iter().filter(|&&p| p == 128).count() > 40);
    let csv = std::fs::read_to_string(out.join("solution.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y,estimate,std_error,n"));
    for l in lines {
        let v: Vec<&str> = l.split(',').collect();
        if v[2] != "nan" {
            assert_eq!(v[2].parse::<f64>().unwrap(), lo);
            assert_eq!(v[3].parse::<f64>().unwrap(), 0.0);
            assert_eq!(v[4], "20");
        }
    }
}

#[test]
fn disk_grid_matches_linear_solution() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("disk");
    let summary = fields(&ok(&["solve", "--scene", &scene("disk.scene"), "--grid", "64x64", "--walks", "8", "--out", out.to_str().unwrap()]));
    assert_eq!(num(&summary, "truncated_walks"), 0.0);
    let csv = std::fs::read_to_string(out.join("solution.csv")).unwrap();
    let mut inside = 0;
    let mut abs_err = 0.0;
    let mut signed = 0.0;
    let mut var_sum = 0.0;
    let mut xs = Vec::new();
    for l in csv.lines().skip(1) {
        let v: Vec<f64> = l.split(',').map(|t| t.parse().unwrap()).collect();
        let (x, y, est) = (v[0], v[1], v[2]);
        if x * x + y * y < 1.0 - 1e-3 {
            assert!(est.is_finite(), "{l}");
            inside += 1;
            abs_err += (est - x).abs();
            signed += est - x;
            var_sum += v[3] * v[3];
            xs.push((x, est));
        } else if x * x + y * y > 1.0 + 1e-3 {
            assert!(est.is_nan(), "{l}");
        }
    }
    // The disk covers pi/9 of the domain square.
    assert!(inside > 1350, "{inside}");
    let n = inside as f64;
    // Eight walks per node leave a per-node standard error near 0.2.
    assert!(abs_err / n < 0.25, "mean abs error {}", abs_err / n);
    let z = signed / var_sum.sqrt();
    assert!(z.abs() < 4.0, "summed error is {z} standard errors");
    // Least-squares slope of the estimate against x.
    let (mx, me) = (xs.iter().map(|p| p.0).sum::<f64>() / n, xs.iter().map(|p| p.1).sum::<f64>() / n);
    let cov: f64 = xs.iter().map(|p| (p.0 - mx) * (p.1 - me)).sum();
    let var: f64 = xs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    assert!((cov / var - 1.0).abs() < 0.05, "slope {}", cov / var);
    let m = manifest(&out);
    assert!(m["image_min"].as_f64().unwrap() < -0.8 && m["image_max"].as_f64().unwrap() > 0.8);
}

#[test]
fn outputs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let mut hashes = Vec::new();
    for run_name in ["a", "b"] {
        let out = dir.path().join(run_name);
        ok(&["solve", "--scene", &scene("annulus_robin.scene"), "--grid", "6x6", "--walks", "10", "--seed", "11", "--out", out.to_str().unwrap()]);
        let m = manifest(&out);
        let files: Vec<(String, String)> = m["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|o| {
                let p = PathBuf::from(o["path"].as_str().unwrap());
                (p.file_name().unwrap().to_str().unwrap().to_string(), o["sha256"].as_str().unwrap().to_string())
            })
            .collect();
        for (name, _) in &files {
            assert!(out.join(name).exists());
        }
        assert_eq!(files.len(), 3);
        assert_eq!(m["seed"], 11);
        hashes.push(files);
    }
    assert_eq!(hashes[0], hashes[1]);
}

#[test]
fn different_seeds_differ() {
    let dir = TempDir::new().unwrap();
    let mut csvs = Vec::new();
    for seed in ["1", "2"] {
        let out = dir.path().join(seed);
        ok(&["solve", "--scene", &scene("disk.scene"), "--grid", "3x3", "--walks", "10", "--seed", seed, "--out", out.to_str().unwrap()]);
        csvs.push(std::fs::read(out.join("solution.csv")).unwrap());
    }
    assert_ne!(csvs[0], csvs[1]);
}

#[test]
fn input_errors_exit_with_two() {
    let s = scene("circle_robin.scene");
    let disk = scene("disk.scene");
    let cases: Vec<Vec<&str>> = vec![
        vec!["query", "cpq", "--scene", "/nonexistent.scene", "--point", "0,0"],
        vec!["query", "cpq", "--scene", &s, "--point", "0,0,0"],
        vec!["query", "cpq", "--scene", &s, "--point", "a,b"],
        vec!["query", "ray", "--scene", &s, "--point", "0,0"],
        vec!["query", "ray", "--scene", &s, "--point", "0,0", "--dir", "0,0"],
        vec!["query", "cpq", "--scene", &s, "--point", "0,0", "--tol-override", "-1"],
        vec!["query", "cpq", "--scene", &s, "--point", "0,0", "--boundary", "dirichlet"],
        vec!["query", "robin-radius", "--scene", &s, "--point", "0,0", "--mu", "-2"],
        vec!["solve", "--scene", &s, "--grid", "4x4"],
        vec!["solve", "--scene", &disk, "--grid", "4x4x4"],
        vec!["solve", "--scene", &disk, "--grid", "4x4", "--walks", "0"],
        vec!["validate", "--scene", "/nonexistent.scene"],
    ];
    for c in &cases {
        let o = run(c);
        assert_eq!(o.status.code(), Some(2), "{c:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
}

#[test]
fn truncated_walks_exit_with_three_and_partial_output() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("partial");
    let o = run(&["solve", "--scene", &scene("annulus_robin.scene"), "--grid", "5x5", "--walks", "5", "--max-steps", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("solution.csv").exists() && out.join("solution.pgm").exists());
    assert!(manifest(&out)["outputs"].as_array().unwrap().len() == 3);
    assert!(num(&fields(&stdout(&o)), "truncated_walks") > 0.0);
}

#[test]
fn nonconverged_query_exits_with_three() {
    // A torus seen from its centre has a whole circle of closest points.
    let o = run(&["query", "cpq", "--scene", &scene("torus.scene"), "--point", "0,0,0", "--boundary", "reflecting", "--tol-override", "1e-7"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    let f = fields(&stdout(&o));
    assert_eq!(f["converged"], "false");
    let r = tuple(&f, "R_D");
    assert!(r[0] <= r[1]);
}

#[test]
fn validate_reports_scene_facts() {
    let f = fields(&ok(&["validate", "--scene", &scene("annulus_robin.scene")]));
    assert_eq!(f["dimension"], "2");
    assert_eq!(f["robin"], "true");
    assert_eq!(f["valid"], "true");
    assert!(num(&f, "dirichlet_samples") > 0.0 && num(&f, "reflecting_samples") > 0.0);
    assert_eq!(num(&f, "min_robin_coefficient"), 1.0);

    let dir = TempDir::new().unwrap();
    let bad = write_scene(dir.path(), "bad.scene", "dimension 2\ndomain [-1, 1] [-1, 1]\ndirichlet inside circle(0, 0, 0.5)\n");
    let o = run(&["validate", "--scene", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon"));
}
