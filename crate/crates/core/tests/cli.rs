use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pvqubo::pipeline::{encoding_matrix, load_input, Manifest, RunConfig};
use pvqubo::profiles::distance_matrix;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn pvqubo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvqubo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn build(out: &Path, extra: &[&str]) -> Output {
    let input = fixtures().join("pv80.csv");
    let mut args = vec![
        "build",
        "--input",
        input.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    pvqubo(&args)
}

fn manifest(out: &Path) -> Manifest {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn build_reports_case_sizes_and_policy_lambda() {
    let dir = tempfile::tempdir().unwrap();
    for (n, g, want) in [("50", "2", 100), ("60", "3", 180), ("70", "4", 280), ("80", "5", 400)] {
        let out = dir.path().join(format!("n{n}"));
        let o = build(&out, &["--profiles", n, "--groups", g]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let m = manifest(&out);
        assert_eq!(m.n_vars, want);

        // recompute the penalty from the manifest's own settings
        let cfg = RunConfig {
            input: Some(fixtures().join("pv80.csv")),
            n_profiles: Some(m.n_profiles),
            sigma: m.sigma,
            ..RunConfig::default()
        };
        let d = distance_matrix(&load_input(&cfg).unwrap());
        let encoded = encoding_matrix(&cfg, &d, m.sigma).unwrap();
        let want = m.lambda_policy.resolve(&encoded, m.n_groups).unwrap();
        assert!((m.lambda - want).abs() <= 1e-12 * want.abs(), "{} vs {want}", m.lambda);
    }
}

#[test]
fn single_group_puts_everyone_together() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    // row balance sits exactly on the tie for leaving one profile out at G = 1
    assert!(build(out, &["--profiles", "10", "--groups", "1", "--lambda", "20"]).status.success());
    assert_eq!(manifest(out).n_vars, 10);
    let o = pvqubo(&["solve", "-o", out.to_str().unwrap(), "--groups", "1", "--solver", "brute-force"]);
    assert!(o.status.success());
    let r: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(r["bits"], "1111111111");
}

#[test]
fn brute_force_matches_golden_energy() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixtures().join("model12.txt");
    let golden: f64 = fs::read_to_string(fixtures().join("model12.golden"))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    let o = pvqubo(&[
        "solve",
        "--model",
        model.to_str().unwrap(),
        "--solver",
        "brute-force",
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let r: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert!((r["energy"].as_f64().unwrap() - golden).abs() < 1e-9);
}

#[test]
fn annealer_result_is_byte_identical() {
    let model = fixtures().join("model12.txt");
    let texts: Vec<String> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let o = pvqubo(&[
                "solve",
                "--model",
                model.to_str().unwrap(),
                "--seed",
                "42",
                "-o",
                dir.path().to_str().unwrap(),
            ]);
            assert!(o.status.success());
            assert!(dir.path().join("timing.json").exists());
            fs::read_to_string(dir.path().join("result.json")).unwrap()
        })
        .collect();
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();

    // 15 profiles x 2 groups = 30 variables, over the brute-force cap
    assert!(build(out, &["--profiles", "15", "--groups", "2"]).status.success());
    let o = pvqubo(&["solve", "-o", out.to_str().unwrap(), "--solver", "brute-force"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));

    // a negligible penalty lets profiles leave their groups
    assert!(build(out, &["--profiles", "15", "--groups", "2", "--lambda", "1e-6"]).status.success());
    let o = pvqubo(&["solve", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(out.join("result.json").exists());

    assert_eq!(pvqubo(&["solve", "--model", "/no/such/model.txt"]).status.code(), Some(1));
    assert_eq!(pvqubo(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(pvqubo(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "input = {:?}\nn_profiles = 20\nn_groups = 4\nsigma = 0.5\noutput = {:?}\n",
            fixtures().join("pv80.csv"),
            dir.path().join("out")
        ),
    )
    .unwrap();
    let o = pvqubo(&["build", "--config", cfg.to_str().unwrap(), "--groups", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&dir.path().join("out"));
    assert_eq!((m.n_profiles, m.n_groups, m.sigma), (20, 3, 0.5));
}

#[test]
fn ingest_solve_evaluate_chain() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let input = fixtures().join("pv80.csv");
    let input = input.to_str().unwrap();
    let common = ["--input", input, "--profiles", "30", "--groups", "3", "-o", out];

    assert!(pvqubo(&[&["ingest"][..], &common].concat()).status.success());
    let ingested = fs::read_to_string(dir.path().join("profiles.csv")).unwrap();
    assert_eq!(ingested.lines().count(), 30);

    assert!(pvqubo(&[&["build"][..], &common].concat()).status.success());
    assert!(pvqubo(&[&["solve"][..], &common].concat()).status.success());
    assert!(pvqubo(&[&["evaluate"][..], &common].concat()).status.success());
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("evaluation.json")).unwrap()).unwrap();
    assert_eq!(rep["feasible"], true);
    let s = rep["silhouette"].as_f64().unwrap();
    assert!((-1.0..=1.0).contains(&s));
}

#[test]
fn benchmark_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixtures().join("pv80.csv");
    let out = dir.path().to_str().unwrap();
    let o = pvqubo(&[
        "benchmark",
        "--input",
        input.to_str().unwrap(),
        "--cases",
        "",
        "-o",
        out,
    ]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("benchmark.csv")).unwrap();
    assert_eq!(
        csv,
        "case,n_profiles,n_groups,n_vars,solver,seed,wall_time_s,energy,silhouette,feasible,gap_pct\n"
    );

    let o = pvqubo(&[
        "benchmark",
        "--input",
        input.to_str().unwrap(),
        "--cases",
        "10x2,12x3",
        "--solvers",
        "anneal,k-means",
        "-o",
        out,
    ]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("benchmark.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("n10g2,10,2,20,anneal,"));
    // 20 variables is within the oracle cap, 36 is not
    assert!(!rows[0].ends_with(','));
    assert!(rows[2].ends_with(','));
    let plot = fs::read_to_string(dir.path().join("plot_data.csv")).unwrap();
    assert_eq!(plot.lines().next().unwrap(), "case,solver,n_vars,sigma,silhouette,wall_time_s");
}

#[test]
fn synth_writes_fixture_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pv.csv");
    let o = pvqubo(&["synth", "--count", "80", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    // the committed fixture is exactly this output
    assert_eq!(
        fs::read_to_string(&out).unwrap(),
        fs::read_to_string(fixtures().join("pv80.csv")).unwrap()
    );
}
