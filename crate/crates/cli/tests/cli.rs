use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sobmuck")).args(args).arg("--out").arg(out).output().unwrap()
}

fn run_ok(args: &[&str], out: &Path) {
    let o = run(args, out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn d(name: &str) -> String {
    data(name).display().to_string()
}

#[test]
fn malformed_spec_exits_2() {
    let t = tempfile::tempdir().unwrap();
    let o = run(&["lambda", "--nu1", &d("malformed.json"), "--nu2", &d("lebesgue01.json")], t.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["lambda", "--nu1", &d("missing.json"), "--nu2", &d("lebesgue01.json")], t.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_exponent_exits_3() {
    let t = tempfile::tempdir().unwrap();
    let o = run(&["lambda", "--nu1", &d("lebesgue01.json"), "--nu2", &d("lebesgue01.json"), "--p", "1"], t.path());
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["sop", "--mu0", &d("legendre.json"), "--mu1", &d("zero_pm1.json"), "--degree", "31"], t.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn lebesgue_lambda() {
    let t = tempfile::tempdir().unwrap();
    run_ok(&["lambda", "--nu1", &d("lebesgue01.json"), "--nu2", &d("lebesgue01.json")], t.path());
    let v = json(t.path().join("lambda.json"));
    assert_eq!(v["finite"], "yes");
    let (lo, hi) = (v["enclosure"]["lo"].as_f64().unwrap(), v["enclosure"]["hi"].as_f64().unwrap());
    assert!(lo <= 0.25 && 0.25 <= hi && hi - lo <= 1e-4);
    assert!(t.path().join("manifest.json").exists());
}

#[test]
fn zero_nu2_is_infinite_not_an_error() {
    let t = tempfile::tempdir().unwrap();
    run_ok(&["lambda", "--nu1", &d("lebesgue01.json"), "--nu2", &d("zero01.json")], t.path());
    assert_eq!(json(t.path().join("lambda.json"))["finite"], "no");
}

#[test]
fn decide_atom_at_zero_is_bounded() {
    let t = tempfile::tempdir().unwrap();
    run_ok(&["decide", "--mu0", &d("atom0_mu0.json"), "--mu1", &d("atom0_mu1.json")], t.path());
    let v = json(t.path().join("verdict.json"));
    assert_eq!(v["outcome"], "Bounded");
    assert_eq!(v["replay_verified"], true);
}

#[test]
fn classify_product_weight_is_strong() {
    let t = tempfile::tempdir().unwrap();
    run_ok(&["classify", "--mu1", &d("jacobi_product.json"), "--p", "2"], t.path());
    let v = json(t.path().join("classify.json"));
    assert_eq!(v["decomposition"]["strongly"], true);
}

#[test]
fn sop_legendre_rows() {
    let t = tempfile::tempdir().unwrap();
    run_ok(&["sop", "--mu0", &d("legendre.json"), "--mu1", &d("zero_pm1.json"), "--degree", "2"], t.path());
    let text = std::fs::read_to_string(t.path().join("sop.csv")).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    // x^2 - 1/3
    let c0 = rows.iter().find(|r| r[0] == 2.0 && r[1] == 0.0).unwrap()[2];
    assert!((c0 + 1.0 / 3.0).abs() < 1e-12);
    assert!(t.path().join("zeros.csv").exists());
}

#[test]
fn counterexample_ratio_grows() {
    let t = tempfile::tempdir().unwrap();
    run_ok(
        &["counterexample", "--nu1", &d("niff_nu1.json"), "--nu2", &d("lebesgue01.json"), "--nu3", &d("niff_nu3.json"), "--nmax", "64"],
        t.path(),
    );
    let text = std::fs::read_to_string(t.path().join("counterexample.csv")).unwrap();
    let r: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(r.len(), 7);
    assert!(r.windows(2).all(|w| w[1] > w[0]));
    assert!(r[6] / r[3] >= 2.0);
}

#[test]
fn replay_reproduces_bytes() {
    let t = tempfile::tempdir().unwrap();
    run_ok(&["mnorm", "--mu0", &d("legendre.json"), "--mu1", &d("zero_pm1.json"), "--nmax", "8"], t.path());
    let first = std::fs::read(t.path().join("mnorm.csv")).unwrap();
    let t2 = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sobmuck"))
        .args(["replay", "--manifest"])
        .arg(t.path().join("manifest.json"))
        .arg("--out")
        .arg(t2.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(t2.path().join("mnorm.csv")).unwrap(), first);
    assert_eq!(std::fs::read(t2.path().join("manifest.json")).unwrap(), std::fs::read(t.path().join("manifest.json")).unwrap());
}

#[test]
fn tampered_manifest_exits_2() {
    let t = tempfile::tempdir().unwrap();
    run_ok(&["mnorm", "--mu0", &d("legendre.json"), "--mu1", &d("zero_pm1.json"), "--nmax", "4"], t.path());
    let path = t.path().join("manifest.json");
    let text = std::fs::read_to_string(&path).unwrap().replace("\"nmax\": 4", "\"nmax\": 5");
    std::fs::write(&path, text).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sobmuck")).args(["replay", "--manifest"]).arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_artifacts() {
    let mut outs = Vec::new();
    for threads in ["1", "3"] {
        let t = tempfile::tempdir().unwrap();
        let o = Command::new(env!("CARGO_BIN_EXE_sobmuck"))
            .env("SOBMUCK_THREADS", threads)
            .args(["mnorm", "--mu0", &d("atom0_mu0.json"), "--mu1", &d("atom0_mu1.json"), "--p", "3", "--nmax", "4", "--out"])
            .arg(t.path())
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        outs.push(std::fs::read(t.path().join("mnorm.csv")).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}
