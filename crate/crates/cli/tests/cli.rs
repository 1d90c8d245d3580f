use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn labelrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_labelrank"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = labelrank(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = labelrank(&["--out-dir", s(dir.path()), "generate", "--rows", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--cols"));
    let out = labelrank(&["factor", "--rank", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_values_fail_without_writing_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = s(dir.path());
    let out = labelrank(&["--out-dir", d, "table1", "--rows", "10", "--cols", "20", "--rank", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = labelrank(&["--out-dir", d, "generate", "--rows", "5", "--cols", "5", "--output", "../x.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("generate.manifest.toml").exists());
}

#[test]
fn generate_is_reproducible_and_recorded() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        ok(&["--seed", "7", "--out-dir", s(d.path()), "generate", "--rows", "120", "--cols", "150"]);
    }
    let ma = fs::read(a.path().join("matrix.txt")).unwrap();
    assert_eq!(ma, fs::read(b.path().join("matrix.txt")).unwrap());
    let manifest: toml::Table = fs::read_to_string(a.path().join("generate.manifest.toml")).unwrap().parse().unwrap();
    assert_eq!(manifest["command"].as_str(), Some("generate"));
    assert_eq!(manifest["seed"].as_integer(), Some(7));
    assert_eq!(manifest["config"]["profile"].as_str(), Some("table1-even"));
    let out = manifest["outputs"].as_array().unwrap();
    assert_eq!(out[0]["path"].as_str(), Some("matrix.txt"));
    assert_eq!(out[0]["sha256"].as_str().unwrap().len(), 64);

    let c = tempfile::tempdir().unwrap();
    ok(&["--seed", "8", "--out-dir", s(c.path()), "generate", "--rows", "120", "--cols", "150"]);
    assert_ne!(ma, fs::read(c.path().join("matrix.txt")).unwrap());
}

#[test]
fn config_file_is_layered_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 11\n[generate]\nrows = 30\ncols = 40\noutput = \"from_file.txt\"\n").unwrap();
    let d = s(dir.path());
    ok(&["--config", s(&cfg), "--out-dir", d, "generate", "--cols", "50"]);
    let manifest: toml::Table = fs::read_to_string(dir.path().join("generate.manifest.toml")).unwrap().parse().unwrap();
    assert_eq!(manifest["seed"].as_integer(), Some(11));
    assert_eq!(manifest["config"]["rows"].as_integer(), Some(30));
    assert_eq!(manifest["config"]["cols"].as_integer(), Some(50));
    let text = fs::read_to_string(dir.path().join("from_file.txt")).unwrap();
    assert!(text.starts_with("labelmatrix v1 30 50"), "{}", &text[..40]);

    fs::write(&cfg, "[generate]\nrows = 3\ncols = 4\ncolour = 1\n").unwrap();
    let out = labelrank(&["--config", s(&cfg), "--out-dir", d, "generate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_headers() {
    let dir = tempfile::tempdir().unwrap();
    let d = s(dir.path());
    ok(&["--out-dir", d, "generate", "--rows", "40", "--cols", "60", "--density", "0.1"]);
    let m = dir.path().join("matrix.txt");
    ok(&["--out-dir", d, "spectrum", s(&m), "--k", "3"]);
    ok(&["--out-dir", d, "sts", s(&m)]);
    ok(&["--out-dir", d, "table1", "--rows", "60", "--cols", "80", "--rank", "5", "--seeds", "1", "--spectrum-len", "4"]);
    ok(&["--out-dir", d, "transfer", "--rows", "200", "--cols", "300", "--density", "0.5", "--rep", "svd", "--dim", "20", "--dataset", "a:40:2"]);
    let header = |name: &str| fs::read_to_string(dir.path().join(name)).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header("spectrum.csv"), "index,sigma,cumulative_energy");
    assert_eq!(header("sts.csv"), "row_a,row_b,cosine");
    assert_eq!(header("table1.csv"), "density,coverage,mean_loss,std_loss,n_rows,seed");
    assert_eq!(
        header("table1_summary.csv"),
        "profile,density,coverage,mean_loss,std_loss,seed_std,n_rows,n_seeds"
    );
    assert_eq!(header("transfer.csv"), "dataset,rep,dim,density,seed,accuracy,coverage_pct,n_classes");
    assert_eq!(header("transfer_baselines.csv"), "dataset,seed,n_train,n_test,majority_baseline");
    let rows: Vec<String> = fs::read_to_string(dir.path().join("transfer.csv")).unwrap().lines().skip(1).map(String::from).collect();
    assert_eq!(rows.len(), 1);
}

#[test]
fn binary_direct_with_class_columns_is_near_perfect() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "--out-dir", s(dir.path()), "transfer", "--rows", "600", "--cols", "900", "--density", "0.5",
        "--rep", "binary", "--dim", "40", "--dataset", "a:200:2", "--dataset", "b:150:2",
    ]);
    let text = fs::read_to_string(dir.path().join("transfer.csv")).unwrap();
    for line in text.lines().skip(1) {
        let acc: f64 = line.split(',').nth(5).unwrap().parse().unwrap();
        assert!(acc >= 0.99, "{line}");
    }
}

#[test]
fn external_vectors_are_scored() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vecs.csv");
    let mut csv = String::from("id,label,v0,v1\n");
    for i in 0..60 {
        let label = i % 2;
        csv += &format!("s{i},{label},{},{}\n", label as f64 * 3.0 + (i % 7) as f64 * 0.1, (i % 5) as f64);
    }
    fs::write(&path, csv).unwrap();
    ok(&["--out-dir", s(dir.path()), "transfer", "--external", s(&path), "--external-name", "toy"]);
    let text = fs::read_to_string(dir.path().join("transfer.csv")).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("toy,external,2,,"), "{row}");
}

#[test]
fn rerun_reproduces_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let d = s(dir.path());
    ok(&["--threads", "1", "--out-dir", d, "generate", "--rows", "50", "--cols", "70", "--density", "0.1"]);
    let m = dir.path().join("matrix.txt");
    ok(&["--threads", "1", "--out-dir", d, "sts", s(&m)]);
    let before = fs::read(dir.path().join("sts.csv")).unwrap();
    let manifest = dir.path().join("sts.manifest.toml");
    let stdout = ok(&["--threads", "3", "rerun", s(&manifest)]);
    assert!(stdout.contains("byte-identically"));
    assert_eq!(before, fs::read(dir.path().join("sts.csv")).unwrap());

    // a changed input is refused
    let mut text = fs::read_to_string(&m).unwrap();
    text.push('\n');
    fs::write(&m, text).unwrap();
    let out = labelrank(&["rerun", s(&manifest)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("changed"));
}

#[test]
fn table1_small_grid_runs() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&[
        "--out-dir", s(dir.path()), "table1", "--rows", "100", "--cols", "120", "--rank", "10", "--seeds", "2",
        "--profiles", "table1-even", "--spectrum-len", "5",
    ]);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("table1-even")).count(), 3);
    let rows = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 2 * 3);
    let spectra = fs::read_dir(dir.path()).unwrap().filter(|e| {
        e.as_ref().unwrap().file_name().to_string_lossy().starts_with("spectrum_table1-even_")
    });
    assert_eq!(spectra.count(), 2);
}
