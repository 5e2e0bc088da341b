use std::process::{Command, Output};

use serde_json::Value;

fn kolyrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kolyrec"))
        .args(args)
        .output()
        .expect("run kolyrec")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn full_pool_verifies() {
    let o = kolyrec(&["verify", "--M", "3", "--primes", "7,13,19", "--max-omega", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["config", "context", "reports", "summary"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let reports = v["reports"].as_array().unwrap();
    assert!(reports.len() > 100);
    for r in reports {
        for key in ["name", "anchor", "params", "verdict", "details", "millis"] {
            assert!(r.get(key).is_some(), "report missing {key}");
        }
        assert_eq!(r["verdict"], "pass");
        assert!(!r["anchor"].as_str().unwrap().is_empty());
    }
    assert_eq!(v["summary"]["exit_code"], 0);
}

#[test]
fn output_is_byte_identical() {
    let args = ["verify", "--M", "5", "--primes", "11,31", "--format", "json"];
    let a = kolyrec(&args);
    let b = kolyrec(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn inadmissible_pool_is_a_config_error() {
    let o = kolyrec(&["verify", "--M", "3", "--primes", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("admissibility"));
    let o = kolyrec(&["verify", "--primes", "7", "--checks", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    let o = kolyrec(&["verify", "--primes", "7", "--max-omega", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = kolyrec(&["verify", "--primes", "7", "--roots", "7=2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn basis_csv_for_91() {
    let o = kolyrec(&["basis", "--M", "3", "--primes", "7,13", "--r", "91", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0], vec!["g", "cbar_1", "cbar_7", "cbar_13", "cbar_91"]);
    let divisors = [1u64, 7, 13, 91];
    for (i, row) in rows[1..].iter().enumerate() {
        assert_eq!(row[0], divisors[i].to_string());
        for (j, v) in row[1..].iter().enumerate() {
            let v: u64 = v.parse().unwrap();
            if i == j {
                assert_eq!(v, 1);
            } else if v != 0 {
                assert_eq!(divisors[i] % divisors[j], 0);
            }
        }
    }
}

#[test]
fn class_output() {
    let o = kolyrec(&["class", "--primes", "7,13", "--kind", "universal", "--r", "1"]);
    assert_eq!(stdout(&o).lines().next(), Some("[0] : 1"));
    let o = kolyrec(&["class", "--primes", "7,13", "--kind", "universal", "--r", "7"]);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(&lines[..4], ["[2/7] : 2", "[3/7] : 1", "[4/7] : 1", "[5/7] : 2"]);
    let o = kolyrec(&["class", "--primes", "7,13", "--kind", "canonical", "--r", "7", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["basis"], serde_json::json!([1, 7]));
    assert_eq!(v["canonical_coordinates"], serde_json::json!([0, 1]));
    let o = kolyrec(&["class", "--primes", "7,13", "--r", "11"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_and_report_rerender() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pool.toml");
    std::fs::write(&cfg, "M = 3\nprimes = [7, 13]\nchecks = [\"h0_dimension\", \"recursion\"]\nformat = \"json\"\n[roots]\n7 = 5\n").unwrap();
    let out = dir.path().join("report.json");
    let o = kolyrec(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--max-omega",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["context"]["roots"]["7"], 5);
    assert_eq!(v["config"]["max_omega"], 1);
    let names: Vec<&str> = v["reports"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert!(names.iter().all(|n| *n == "h0_dimension" || *n == "recursion"));
    assert_eq!(names.len(), 6);

    let o = kolyrec(&["report", "--input", out.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("name,anchor,M,r,l,g,verdict,millis,failures"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn timings_only_on_request() {
    let o = kolyrec(&["verify", "--primes", "7", "--checks", "norm_identity", "--format", "json", "--timings"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["reports"][0]["millis"].is_u64());
    let o = kolyrec(&["verify", "--primes", "7", "--checks", "norm_identity", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["reports"][0]["millis"].is_null());
}
