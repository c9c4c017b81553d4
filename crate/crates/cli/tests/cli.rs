use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clbic::bench::parse_bench_report;
use clbic::io::parse_selection_report;
use tempfile::TempDir;

fn clbic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clbic"))
        .args(args)
        .env_remove("CLBIC_SEED")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn cliques(sizes: &[usize]) -> String {
    let mut out = String::new();
    let mut base = 0;
    for &m in sizes {
        for i in 0..m {
            for j in i + 1..m {
                let _ = writeln!(out, "n{} n{}", base + i, base + j);
            }
        }
        base += m;
    }
    out
}

const TINY_BENCH: &str = r#"
[[setting]]
id = "tiny"
k_max = 4
model = "sbm"
sizes = [20, 25]
theta = [[0.6, 0.05], [0.05, 0.6]]
corr = { scope = "global", within = { kind = "equal", rho = 0.1 } }
reps = 3
seed = 11
"#;

#[test]
fn disjoint_cliques_select_two() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", &cliques(&[6, 6]));
    let out = dir.path().join("r.tsv");
    let o = clbic(&["select", s(&input), "--k-max", "5", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let report = parse_selection_report(&text, &out).unwrap();
    assert_eq!(report.result.chosen_clbic, 2);
    assert_eq!(report.result.n, 12);
    assert_eq!(report.names[0], "n0");
    assert_eq!(report.result.records.len(), 5);
}

#[test]
fn report_goes_to_stdout_without_out() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", &cliques(&[4, 5]));
    let o = clbic(&["select", s(&input), "--k-max", "3"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(parse_selection_report(&text, Path::new("stdout")).is_ok());
}

#[test]
fn seed_comes_from_environment() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", &cliques(&[4, 5]));
    let o = Command::new(env!("CARGO_BIN_EXE_clbic"))
        .args(["select", s(&input), "--k-max", "3"])
        .env("CLBIC_SEED", "77")
        .output()
        .unwrap();
    assert!(o.status.success());
    let r = parse_selection_report(&String::from_utf8(o.stdout).unwrap(), Path::new("stdout")).unwrap();
    assert_eq!(r.result.seed, 77);
    let o = clbic(&["select", s(&input), "--k-max", "3", "--seed", "5"]);
    let r = parse_selection_report(&String::from_utf8(o.stdout).unwrap(), Path::new("stdout")).unwrap();
    assert_eq!(r.result.seed, 5);
}

#[test]
fn weight_matrix_input() {
    let dir = TempDir::new().unwrap();
    // two groups of three with heavy trade inside each group
    let mut text = String::from("\ta\tb\tc\td\te\tf\n");
    let names = ["a", "b", "c", "d", "e", "f"];
    for (i, name) in names.iter().enumerate() {
        text.push_str(name);
        for j in 0..6 {
            let w = if i == j { 0 } else if (i < 3) == (j < 3) { 10 } else { i + j };
            let _ = write!(text, "\t{w}");
        }
        text.push('\n');
    }
    let input = write(&dir, "w.tsv", &text);
    let o = clbic(&["select", s(&input), "--weights", "--alpha", "0.5", "--k-max", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = parse_selection_report(&String::from_utf8(o.stdout).unwrap(), Path::new("stdout")).unwrap();
    assert_eq!(r.names, names);
    assert!(r.meta.iter().any(|(k, v)| k == "quantile_convention" && v == "lower"));
}

#[test]
fn self_loop_is_a_data_error_with_line() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", "a b\nb c\nc c\n");
    let o = clbic(&["select", s(&input)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":3:"), "{err}");
}

#[test]
fn missing_file_is_a_data_error() {
    let o = clbic(&["select", "/definitely/not/here.txt"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(clbic(&["select"]).status.code(), Some(1));
    assert_eq!(clbic(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(clbic(&["select", "x", "--model", "mmb"]).status.code(), Some(1));
    assert_eq!(clbic(&["select", "x", "--k-min", "5", "--k-max", "2"]).status.code(), Some(1));
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "w.tsv", "a\tb\na\t0\t1\nb\t1\t0\n");
    assert_eq!(
        clbic(&["select", s(&input), "--weights", "--alpha", "1.5"]).status.code(),
        Some(1)
    );
}

#[test]
fn help_exits_zero() {
    let o = clbic(&["--help"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("select"));
}

#[test]
fn degenerate_eigenvector_ratio_is_numerical_failure() {
    // the leading adjacency eigenvector vanishes on the smaller clique
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", &cliques(&[5, 7]));
    let o = clbic(&["select", s(&input), "--model", "dcbm", "--k-max", "3"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn largest_component_drops_small_pieces() {
    let dir = TempDir::new().unwrap();
    let mut text = cliques(&[6]);
    text.push_str("x y\n");
    let input = write(&dir, "g.txt", &text);
    let o = clbic(&["select", s(&input), "--k-max", "2", "--largest-component"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = parse_selection_report(&String::from_utf8(o.stdout).unwrap(), Path::new("stdout")).unwrap();
    assert_eq!(r.result.n, 6);
    assert!(r.meta.contains(&("dropped_nodes".to_string(), "2".to_string())));
}

#[test]
fn bench_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "b.toml", TINY_BENCH);
    let (a, b) = (dir.path().join("a.tsv"), dir.path().join("b.tsv"));
    for out in [&a, &b] {
        let o = clbic(&["bench", s(&spec), "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let report = parse_bench_report(&String::from_utf8(ta).unwrap(), &a).unwrap();
    assert_eq!(report.settings.len(), 1);
    assert_eq!(report.settings[0].replicates.len(), 3);
}

#[test]
fn bench_reps_override() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "b.toml", TINY_BENCH);
    let o = clbic(&["bench", s(&spec), "--reps", "1"]);
    assert!(o.status.success());
    let r = parse_bench_report(&String::from_utf8(o.stdout).unwrap(), Path::new("stdout")).unwrap();
    assert_eq!(r.settings[0].replicates.len(), 1);
}

#[test]
fn invalid_spec_is_rejected_before_running() {
    let dir = TempDir::new().unwrap();
    let bad = TINY_BENCH.replace("0.6, 0.05], [0.05, 0.6", "1.6, 0.05], [0.05, 0.6");
    let spec = write(&dir, "b.toml", &format!("{TINY_BENCH}{}", bad.replace("\"tiny\"", "\"bad\"")));
    let out = dir.path().join("r.tsv");
    let o = clbic(&["bench", s(&spec), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad"));
    assert!(!out.exists());
}

#[test]
fn simulate_writes_a_parseable_edge_list() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "b.toml", TINY_BENCH);
    let out = dir.path().join("g.txt");
    let o = clbic(&["simulate", s(&spec), "--setting", "tiny", "--rep", "2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = clbic::io::read_edge_list(&out).unwrap();
    assert!(g.adjacency.edge_count() > 0);
    assert_eq!(clbic(&["simulate", s(&spec), "--setting", "nope"]).status.code(), Some(1));
}

#[test]
fn shipped_specs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("specs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let f = clbic::io::read_bench_file(&p).unwrap();
            assert!(!f.setting.is_empty(), "{}", p.display());
            for st in &f.setting {
                st.spec.validate().unwrap();
                assert_eq!(st.spec.reps, 50, "{}", st.id);
            }
            seen += 1;
        }
    }
    assert_eq!(seen, 6);
}
