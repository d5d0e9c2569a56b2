use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("finsler-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn passing_suite_exits_zero() {
    let o = bin()
        .arg("run")
        .arg(configs().join("euclidean.toml"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: toml::Table = toml::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["header"]["result"].as_str(), Some("PASS"));
    assert_eq!(report["checks"].as_array().unwrap().len(), 8);
}

#[test]
fn failing_check_exits_one() {
    let p = scratch(
        "randers_t.toml",
        "family = \"randers\"\nchecks = [\"t\"]\n[samples]\ncount = 2\ndirections = 4\n",
    );
    let o = bin()
        .args(["run", "--format", "csv"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL (t)"));
    let mut rows = csv::Reader::from_reader(o.stdout.as_slice());
    let first = rows.records().next().unwrap().unwrap();
    assert_eq!(&first[0], "t");
    assert_eq!(&first[2], "false");
}

#[test]
fn configuration_errors_exit_two() {
    let unknown = scratch(
        "unknown.toml",
        "family = \"euclidean\"\nchecks = [\"t\"]\nbogus = 1\n",
    );
    let o = bin().arg("run").arg(&unknown).output().unwrap();
    assert_eq!(code(&o), 2);
    let o = bin()
        .args(["run", "--tol-override", "nope=1"])
        .arg(configs().join("euclidean.toml"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    let o = bin()
        .arg("run")
        .arg(configs().join("missing.toml"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn sampling_errors_exit_three() {
    let p = scratch(
        "margin.toml",
        "family = \"euclidean\"\nchecks = [\"t\"]\n[samples]\ndomain_margin = 5.0\n",
    );
    let o = bin().arg("run").arg(&p).output().unwrap();
    assert_eq!(code(&o), 3);
}

#[test]
fn list_shows_every_family() {
    let o = bin()
        .args(["list", "--format", "json-lines"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let keys: Vec<String> = stdout(&o)
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["key"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    for k in [
        "euclidean",
        "quadratic",
        "randers",
        "class1",
        "class2",
        "example1",
        "example2",
        "ab_t_class",
        "ab_sigma_t_class",
    ] {
        assert!(keys.iter().any(|x| x == k), "{k} missing from {keys:?}");
    }
    let o = bin().arg("list").output().unwrap();
    let catalog: toml::Table = toml::from_str(&stdout(&o)).unwrap();
    assert_eq!(catalog["family"].as_array().unwrap().len(), keys.len());
}

#[test]
fn seeded_runs_are_deterministic() {
    let run = |seed: &str| {
        let o = bin()
            .args(["run", "--format", "json-lines", "--seed", seed])
            .arg(configs().join("class2.toml"))
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        finsler::harness::strip_timing(&stdout(&o))
    };
    let a = run("7");
    assert_eq!(a, run("7"));
    assert_ne!(a, run("8"));
    assert!(a.contains("\"seed\":7"));
}

#[test]
fn output_path_and_multiple_configs() {
    let out = std::env::temp_dir().join(format!("finsler-cli-{}-multi.txt", std::process::id()));
    let o = bin()
        .arg("run")
        .arg(configs().join("euclidean.toml"))
        .arg(configs().join("randers.toml"))
        .arg("-o")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.matches("[header]").count(), 2);
}

#[test]
fn scan_covers_the_grid() {
    let o = bin()
        .args(["scan", "--grid", "a=1:2:2,b=0:2:3"])
        .arg(configs().join("class2_scan.toml"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    let quadrature = rows
        .iter()
        .find(|row| &row[0] == "1" && &row[1] == "2")
        .unwrap();
    assert_eq!(&quadrature[3], "quadrature");
    for row in &rows {
        assert_eq!(&row[2], "ok");
        assert_eq!(&row[5], "true");
    }
    let o = bin()
        .args(["scan", "--grid", "zz=1"])
        .arg(configs().join("class2_scan.toml"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
