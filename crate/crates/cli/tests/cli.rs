use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qlid::{Condition, SampleSupport};
use qlid_cli::ingest;

const QUICK_OPTIMIZER: &str = "[optimizer]\npopulation = 24\ngenerations = 40\nrestarts = 1\n";

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn qlid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlid"))
        .args(args)
        .output()
        .expect("run qlid")
}

fn quick_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, format!("{extra}\n{QUICK_OPTIMIZER}")).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ingest_skips_and_counts() {
    let d = ingest::parse("1.0\n# c\n\n2.5\nNA\n");
    assert_eq!(d.values, vec![1.0, 2.5]);
    assert_eq!(d.skipped.total(), 3);
    assert_eq!(d.values.len() + d.skipped.total(), d.total_lines);
}

#[test]
fn ingest_conserves_lines() {
    let text = "x,y\n3,4\n-,1\n\n#\n 7.5 \nnan\n1e3,\n\"2\",z\ninf\n";
    let d = ingest::parse(text);
    assert_eq!(d.values, vec![3.0, 7.5, 1e3, 2.0]);
    assert_eq!(d.values.len() + d.skipped.total(), d.total_lines);
    assert_eq!(d.total_lines, 10);
}

#[test]
fn empty_file_is_an_ingest_error() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    assert!(ingest::read(&empty).is_err());
    let out = qlid(&["fit", "--data", s(&empty), "--family0", "gamma", "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fixtures_have_documented_shape() {
    let half = ingest::read(&fixture("half_line_n90.txt")).unwrap();
    assert_eq!(half.values.len(), 90);
    assert_eq!(half.inferred_support(), SampleSupport::HalfLine);
    let full = ingest::read(&fixture("full_line_n162.txt")).unwrap();
    assert_eq!(full.values.len(), 162);
    assert_eq!(full.values.iter().filter(|&&v| v < 0.0).count(), 62);
    assert_eq!(full.values.iter().filter(|&&v| v > 0.0).count(), 100);
}

#[test]
fn bad_configuration_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("half_line_n90.txt");
    let out = qlid(&["fit", "--data", s(&data), "--family0", "nosuch", "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = qlid(&["fit", "--data", s(&data), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = qlid(&["fit", "--data", s(&data), "--family0", "gamma", "--q", "0.1,0.2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qlid(&["bins", "--data", s(&data), "--edges", "2,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outlier_toggle_pairs_clean_and_contaminated_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(
        dir.path(),
        "[[estimator]]\nkind = \"mle\"\nfamily0 = \"gamma\"\n\n[[estimator]]\nkind = \"mqle\"\nfamily0 = \"gamma\"\nq = 0.53\n",
    );
    let out = qlid(&[
        "fit",
        "--config",
        s(&cfg),
        "--data",
        s(&fixture("half_line_n90.txt")),
        "--outliers",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let fits = report["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 4);
    for spec in 0..2 {
        let conds: Vec<&str> = fits
            .iter()
            .filter(|f| f["spec_index"] == spec)
            .map(|f| f["condition"].as_str().unwrap())
            .collect();
        assert_eq!(conds, vec!["clean", "contaminated"]);
    }
    let ns: Vec<u64> = fits.iter().map(|f| f["result"]["n"].as_u64().unwrap()).collect();
    assert_eq!(ns, vec![90, 91, 90, 91]);
    let text = fs::read_to_string(dir.path().join("comparison.txt")).unwrap();
    assert!(text.contains("contaminated"));
    for f in ["comparison.csv", "metadata.json", "plot/overlay.svg", "plot/histogram.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn identical_families_flag_a_degenerate_objective() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path(), "");
    let out = qlid(&[
        "fit",
        "--config",
        s(&cfg),
        "--data",
        s(&fixture("half_line_n90.txt")),
        "--kind",
        "lid-logq",
        "--family0",
        "gamma",
        "--family1",
        "gamma",
        "--q",
        "0.5",
        "--out-dir",
        s(dir.path()),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("degenerate"), "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let fit = &report["fits"][0]["result"];
    assert_eq!(fit["degenerate"], true);
    assert_eq!(fit["objective"].as_f64(), Some(0.0));
}

#[test]
fn sweep_single_q_gives_one_labelled_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path(), "");
    let out = qlid(&[
        "sweep",
        "--config",
        s(&cfg),
        "--data",
        s(&fixture("half_line_n90.txt")),
        "--kind",
        "lid-logq",
        "--family0",
        "gamma",
        "--family1",
        "weibull",
        "--q",
        "0.007",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].contains("psi_log_q=0.007(f0=gamma,f1=weibull)"), "{}", rows[0]);
}

#[test]
fn sweep_grid_is_a_cartesian_product() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path(), "");
    let out = qlid(&[
        "sweep",
        "--config",
        s(&cfg),
        "--data",
        s(&fixture("full_line_n162.txt")),
        "--kind",
        "mqle",
        "--family0",
        "ep",
        "--q",
        "0.3,0.6,0.9",
        "--p0",
        "1.5,2,2.5",
        "--edges",
        "-6,-1,0,1,6",
        "--replications",
        "300",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    let mut pairs: Vec<(String, String)> = rows
        .iter()
        .map(|r| {
            // the quoted label can contain commas
            let rest = r.split_once("\",").unwrap().1;
            let f: Vec<&str> = rest.split(',').collect();
            (f[1].to_string(), f[2].to_string())
        })
        .collect();
    pairs.sort();
    pairs.dedup();
    assert_eq!(pairs.len(), 9);
    for r in rows {
        let bins = r.rsplit(',').next().unwrap().trim_matches('"');
        assert_eq!(bins.split(' ').count(), 5, "{r}");
    }
}

#[test]
fn sweep_marks_q_zero_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path(), "");
    let out = qlid(&[
        "sweep",
        "--config",
        s(&cfg),
        "--data",
        s(&fixture("half_line_n90.txt")),
        "--kind",
        "mqle",
        "--family0",
        "gamma",
        "--q",
        "0,0.5",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let invalid: Vec<&str> = csv.lines().filter(|l| l.contains("invalid")).collect();
    assert_eq!(invalid.len(), 1);
    assert!(invalid[0].contains(",0,"), "{}", invalid[0]);
}

#[test]
fn plot_writes_histogram_curve_and_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let out = qlid(&[
        "plot",
        "--data",
        s(&fixture("half_line_n90.txt")),
        "--density",
        "gamma:a=1,b=1",
        "--edges",
        "0,1,2",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let plot = dir.path().join("plot");
    let mut files: Vec<String> = fs::read_dir(&plot)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(files, vec!["curve_0.csv", "histogram.csv", "overlay.svg"]);
    let curve = fs::read_to_string(plot.join("curve_0.csv")).unwrap();
    assert_eq!(curve.lines().nth(1), Some("0,1"));
    assert_eq!(curve.lines().count(), 1 + qlid_cli::plot::CURVE_POINTS);
    let svg = fs::read_to_string(plot.join("overlay.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
}

#[test]
fn inject_and_bins_commands() {
    let dir = tempfile::tempdir().unwrap();
    let injected = dir.path().join("injected.txt");
    let out = qlid(&["inject", "--data", s(&fixture("half_line_n90.txt")), "--out", s(&injected)]);
    assert_eq!(out.status.code(), Some(0));
    let d = ingest::read(&injected).unwrap();
    assert_eq!(d.values.len(), 91);
    let max = d.values[..90].iter().copied().fold(f64::MIN, f64::max);
    assert_eq!(d.values[90], 2.0 * max);

    let out = qlid(&[
        "bins",
        "--data",
        s(&fixture("half_line_n90.txt")),
        "--edges",
        "0,0.5,1.5,2.5,20",
        "--outliers",
    ]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let counts: Vec<usize> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(counts.len(), 6);
    assert_eq!(counts.iter().sum::<usize>(), 91);
}

#[test]
fn simulate_is_sorted_and_seeded() {
    let run = |workers: &str| {
        let out = qlid(&[
            "simulate",
            "--family0",
            "gamma",
            "--params0",
            "a=3,b=0.25",
            "--n",
            "20",
            "--replications",
            "600",
            "--seed",
            "5",
            "--workers",
            workers,
        ]);
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout).unwrap()
    };
    let a = run("1");
    assert_eq!(a, run("3"));
    let v: Vec<f64> = a.lines().skip(1).map(|l| l.parse().unwrap()).collect();
    assert_eq!(v.len(), 20);
    assert!(v.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn fit_report_is_byte_identical_across_runs() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let reports: Vec<String> = dirs
        .iter()
        .map(|d| {
            let cfg = quick_config(d.path(), "seed = 11\n[[estimator]]\nkind = \"mle\"\nfamily0 = \"weibull\"\n");
            let out = qlid(&[
                "fit",
                "--config",
                s(&cfg),
                "--data",
                s(&fixture("half_line_n90.txt")),
                "--outliers",
                "--out-dir",
                s(d.path()),
            ]);
            assert_eq!(out.status.code(), Some(0));
            fs::read_to_string(d.path().join("report.json")).unwrap()
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn library_pipeline_orders_records_by_spec_then_condition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(
        dir.path(),
        "[[estimator]]\nkind = \"mle\"\nfamily0 = \"laplace\"\n\n[[estimator]]\nkind = \"huber\"\nu = 1.345\n",
    );
    let file = qlid_cli::config::FileConfig::load(&cfg).unwrap();
    let flags = qlid_cli::config::Overrides {
        data: Some(fixture("full_line_n162.txt")),
        outliers: Some(true),
        out_dir: Some(dir.path().to_path_buf()),
        ..Default::default()
    };
    let run = qlid_cli::config::RunConfig::resolve(file, flags, false).unwrap();
    let (records, _) = qlid_cli::app::fit_with(&run).unwrap();
    let order: Vec<(usize, Condition)> = records.iter().map(|r| (r.spec_index, r.condition)).collect();
    assert_eq!(
        order,
        vec![
            (0, Condition::Clean),
            (0, Condition::Contaminated),
            (1, Condition::Clean),
            (1, Condition::Contaminated)
        ]
    );
    assert!(records.iter().all(|r| r.is_ok()));
}

#[test]
fn bundled_example_config_resolves() {
    let file = qlid_cli::config::FileConfig::load(&fixture("example.toml")).unwrap();
    let run = qlid_cli::config::RunConfig::resolve(file, Default::default(), true).unwrap();
    assert_eq!(run.estimators.len(), 4);
    assert!(run.data.ends_with("half_line_n90.txt") && run.data.exists());
    assert_eq!(run.sweep.unwrap().q, Some(vec![0.3, 0.53, 0.8]));
}
