use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::tempdir;
use vdselect_cli::matrix::{matrix_write, FLAG_STANDARDIZED};
use vdselect_cli::sim::{EQUIVALENCE_HEADER, FDR_HEADER, INFLATION_HEADER, RATIO_HEADER, UNIVERSALITY_HEADER};

fn vdselect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vdselect"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = vdselect(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn tiny() -> (PathBuf, PathBuf) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/tiny");
    (dir.join("x.vdmx"), dir.join("y.csv"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn select_is_deterministic_without_timestamp() {
    let (x, y) = tiny();
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    for out in [&a, &b] {
        ok(&["--no-timestamp", "select", "--x", p(&x), "--y", p(&y), "--alpha", "0.2", "--seed", "4", "--out", p(out)]);
    }
    ok(&["--no-timestamp", "select", "--x", p(&x), "--y", p(&y), "--alpha", "0.2", "--seed", "4", "--mmap", "--out", p(&c)]);
    let ja = std::fs::read(&a).unwrap();
    assert_eq!(ja, std::fs::read(&b).unwrap());
    let doc: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    for key in ["manifest", "selected", "v_star", "t_star", "fdp_estimate", "phi", "feasible"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert!(doc["manifest"]["timestamp"].is_null());
    // The mapped reader decodes the same bytes, so only the echoed flag
    // differs.
    let mut jc: serde_json::Value = serde_json::from_slice(&std::fs::read(&c).unwrap()).unwrap();
    jc["manifest"]["parameters"]["mmap"] = serde_json::Value::Bool(false);
    assert_eq!(doc, jc);
}

#[test]
fn timestamp_is_the_only_difference() {
    let (x, y) = tiny();
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    ok(&["select", "--x", p(&x), "--y", p(&y), "--seed", "2", "--out", p(&a)]);
    ok(&["--no-timestamp", "select", "--x", p(&x), "--y", p(&y), "--seed", "2", "--out", p(&b)]);
    let mut ja: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    let jb: serde_json::Value = serde_json::from_slice(&std::fs::read(&b).unwrap()).unwrap();
    assert!(ja["manifest"]["timestamp"].is_u64());
    ja["manifest"]["timestamp"] = serde_json::Value::Null;
    assert_eq!(ja, jb);
}

#[test]
fn exit_codes() {
    let (x, y) = tiny();
    let dir = tempdir().unwrap();
    let out = dir.path().join("o.json");
    let r = vdselect(&["select", "--x", p(&x), "--y", p(&y), "--l-factor", "0", "--out", p(&out)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(r.stdout.is_empty());
    assert!(!r.stderr.is_empty());

    assert_eq!(vdselect(&["select", "--x", p(&x)]).status.code(), Some(2));
    assert_eq!(vdselect(&["select", "--x", p(&x), "--y", p(&y), "--alpha", "1.5", "--out", p(&out)]).status.code(), Some(2));

    let bad = dir.path().join("bad.vdmx");
    std::fs::write(&bad, b"NOPE and then some bytes that are not a matrix").unwrap();
    assert_eq!(vdselect(&["select", "--x", p(&bad), "--y", p(&y), "--out", p(&out)]).status.code(), Some(3));
    let missing = dir.path().join("missing.vdmx");
    assert_eq!(vdselect(&["select", "--x", p(&missing), "--y", p(&y), "--out", p(&out)]).status.code(), Some(3));

    // A constant response has no direction in the centered subspace.
    let flat = dir.path().join("flat.csv");
    std::fs::write(&flat, "y\n".to_string() + &"3.0\n".repeat(50)).unwrap();
    assert_eq!(vdselect(&["select", "--x", p(&x), "--y", p(&flat), "--out", p(&out)]).status.code(), Some(4));

    let csv = dir.path().join("b.csv");
    let r = vdselect(&["bench", "--n", "500000", "--p", "10", "--l-factor", "100000", "--mode", "ad", "--out", p(&csv)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("budget"));
    assert!(!csv.exists());

    let params = dir.path().join("params.txt");
    std::fs::write(&params, "replicates = 2\nbogus = 1\n").unwrap();
    let r = vdselect(&["sim-fdr", "--params", p(&params), "--out", p(dir.path())]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn response_as_single_column_matrix() {
    let (x, y) = tiny();
    let dir = tempdir().unwrap();
    let values: Vec<f64> = std::fs::read_to_string(&y)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.parse().unwrap())
        .collect();
    let ym = dir.path().join("y.vdmx");
    matrix_write(&ym, values.len(), 1, &values, 0).unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    ok(&["--no-timestamp", "select", "--x", p(&x), "--y", p(&y), "--out", p(&a)]);
    ok(&["--no-timestamp", "select", "--x", p(&x), "--y", p(&ym), "--out", p(&b)]);
    let ja: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    let jb: serde_json::Value = serde_json::from_slice(&std::fs::read(&b).unwrap()).unwrap();
    assert_eq!(ja["selected"], jb["selected"]);
    assert_eq!(ja["phi"], jb["phi"]);
}

#[test]
fn raw_designs_are_standardized_on_read() {
    let dir = tempdir().unwrap();
    let (n, p_) = (40, 6);
    let raw: Vec<f64> = (0..n * p_).map(|i| ((i * 7919) % 101) as f64 * 0.37 + (i / n) as f64 * 5.0).collect();
    let beta_col = 2;
    let y: Vec<f64> = (0..n).map(|i| raw[beta_col * n + i] * 3.0 + ((i * 31) % 7) as f64 * 0.1).collect();
    let xr = dir.path().join("raw.vdmx");
    matrix_write(&xr, n, p_, &raw, 0).unwrap();
    let ycsv = dir.path().join("y.csv");
    std::fs::write(&ycsv, y.iter().map(|v| format!("{v}\n")).collect::<String>()).unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    ok(&["--no-timestamp", "select", "--x", p(&xr), "--y", p(&ycsv), "--t-max", "3", "--out", p(&a)]);
    ok(&["--no-timestamp", "select", "--x", p(&xr), "--y", p(&ycsv), "--t-max", "3", "--mmap", "--out", p(&b)]);
    let ja: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    let jb: serde_json::Value = serde_json::from_slice(&std::fs::read(&b).unwrap()).unwrap();
    assert_eq!(ja["selected"], jb["selected"]);
    assert!(ja["selected"].as_array().unwrap().contains(&serde_json::json!(beta_col)));
}

#[test]
fn gen_model_round_trips_through_select() {
    let dir = tempdir().unwrap();
    let m = dir.path().join("m");
    let stdout = ok(&["--no-timestamp", "gen-model", "--n", "60", "--p", "15", "--s", "2", "--snr", "8", "--seed", "3", "--out", p(&m)]);
    assert_eq!(stdout.lines().count(), 3);
    let bytes = std::fs::read(m.join("x.vdmx")).unwrap();
    assert_eq!(&bytes[..4], b"VDMX");
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()) & FLAG_STANDARDIZED, FLAG_STANDARDIZED);
    assert_eq!(first_line(&m.join("y.csv")), "y");
    let truth: serde_json::Value = serde_json::from_slice(&std::fs::read(m.join("truth.json")).unwrap()).unwrap();
    assert_eq!(truth["active"].as_array().unwrap().len(), 2);
}

fn write_params(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn simulation_headers_are_exact() {
    let dir = tempdir().unwrap();
    let d = dir.path();

    let eq = write_params(d, "eq.txt", "n = 20\np = 10\ns = 2\nl = 30\nts = 1,2\nranks = 0,1\nreplicates = 4\n");
    ok(&["--no-timestamp", "sim-equivalence", "--params", p(&eq), "--out", p(&d.join("eq"))]);
    assert_eq!(first_line(&d.join("eq/equivalence.csv")), EQUIVALENCE_HEADER);
    assert_eq!(EQUIVALENCE_HEADER, "method,T,rank,replicate,value");

    let fdr = write_params(d, "fdr.txt", "n = 30\np = 20\ns = 2\nsnrs = 4\nalphas = 0.1,0.2\nl_factors = 1\nb = 4\nt_max = 2\nreplicates = 3\n");
    ok(&["--no-timestamp", "sim-fdr", "--params", p(&fdr), "--out", p(&d.join("fdr"))]);
    assert_eq!(first_line(&d.join("fdr/fdr.csv")), FDR_HEADER);
    assert_eq!(FDR_HEADER, "alpha,L_factor,snr,replicate,fdp,tpp");

    let uni = write_params(d, "uni.txt", "laws = gaussian,rademacher\nns = 20,40\np = 10\ns = 2\nl = 50\nensembles = 3\n");
    ok(&["--no-timestamp", "sim-universality", "--params", p(&uni), "--out", p(&d.join("uni"))]);
    assert_eq!(first_line(&d.join("uni/universality.csv")), UNIVERSALITY_HEADER);
    assert_eq!(UNIVERSALITY_HEADER, "law,n,k,replicate,ks,w1,deloc");

    let ni = write_params(
        d,
        "ni.txt",
        "n = 30\np = 20\ns = 2\nalphas = 0.2\nts = 1\nl_factors = 1\nb = 4\nreplicates = 2\nratio_trials = 5\nratio_m = 20\nratio_l = 30\n",
    );
    ok(&["--no-timestamp", "sim-norm-inflation", "--params", p(&ni), "--out", p(&d.join("ni"))]);
    assert_eq!(first_line(&d.join("ni/norm_inflation.csv")), INFLATION_HEADER);
    assert_eq!(INFLATION_HEADER, "law,alpha,T,L_factor,replicate,fdp,tpp");
    assert_eq!(first_line(&d.join("ni/norm_inflation_ratio.csv")), RATIO_HEADER);
    assert_eq!(RATIO_HEADER, "replicate,ratio,eta");

    for sub in ["eq", "fdr", "uni", "ni"] {
        let m: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join(sub).join("manifest.json")).unwrap()).unwrap();
        assert!(m["timestamp"].is_null());
        assert!(m["parameters"].is_object());
    }
}

#[test]
fn shadow_equivalence_rows_pair_up() {
    let dir = tempdir().unwrap();
    let eq = write_params(dir.path(), "eq.txt", "n = 25\np = 12\ns = 2\nl = 40\nts = 1,3\nranks = 0,1,4\nreplicates = 6\nseed = 5\n");
    let out = dir.path().join("eq");
    ok(&["--no-timestamp", "sim-equivalence", "--shadow", "--params", p(&eq), "--out", p(&out)]);
    let text = std::fs::read_to_string(out.join("equivalence.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let vd: Vec<_> = rows.iter().filter(|r| r[0] == "vd").collect();
    let ad: Vec<_> = rows.iter().filter(|r| r[0] == "ad").collect();
    assert!(!vd.is_empty());
    assert_eq!(vd.len(), ad.len());
    for (a, b) in vd.iter().zip(&ad) {
        assert_eq!(a[1..4], b[1..4]);
        let (x, y): (f64, f64) = (a[4].parse().unwrap(), b[4].parse().unwrap());
        assert!((x - y).abs() <= 1e-10 * (1.0 + y), "{a:?} {b:?}");
    }
}

#[test]
fn simulations_reproduce_byte_for_byte() {
    let dir = tempdir().unwrap();
    let fdr = write_params(dir.path(), "fdr.txt", "n = 30\np = 20\ns = 2\nsnrs = 4\nl_factors = 1\nb = 4\nt_max = 2\nreplicates = 3\nseed = 9\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["--no-timestamp", "sim-fdr", "--params", p(&fdr), "--out", p(&a)]);
    ok(&["--no-timestamp", "--threads", "1", "sim-fdr", "--params", p(&fdr), "--out", p(&b)]);
    for f in ["fdr.csv", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn bench_writes_csv_and_sidecar() {
    let dir = tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let stdout = ok(&["--no-timestamp", "bench", "--n", "60", "--p", "20", "--l-factor", "1,2", "--t", "3", "--reps", "1", "--out", p(&csv)]);
    assert!(stdout.starts_with(p(&csv)));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(
        header == "mode,n,p,L,median_ms,peak_rss_bytes" || header == "mode,n,p,L,median_ms,peak_alloc_bytes",
        "{header}"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("vd,60,20,20,"));
    assert!(rows[1].starts_with("vd,60,20,40,"));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(csv.with_extension("json")).unwrap()).unwrap();
    assert_eq!(doc["records"].as_array().unwrap().len(), 2);
}
