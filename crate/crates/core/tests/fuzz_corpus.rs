//! Replays the checked-in fuzz seeds through the same checks the fuzz
//! targets make, so a plain `cargo test` exercises them.

use std::fs;
use std::path::{Path, PathBuf};

use clbic::bench::{format_bench_report, parse_bench_report};
use clbic::io::{
    format_bench_file, format_edge_list, format_selection_report, memory_path, parse_bench_file, parse_edge_list,
    parse_selection_report, parse_weight_matrix, weights_to_adjacency, QuantileConvention,
};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn edge_list_seeds() {
    let mut ok = 0;
    for (_, text) in seeds("edge_list") {
        if let Ok(g) = parse_edge_list(&text, &memory_path()) {
            let again = parse_edge_list(&format_edge_list(&g), &memory_path()).unwrap();
            assert_eq!(again.adjacency.edge_count(), g.adjacency.edge_count());
            ok += 1;
        }
    }
    assert!(ok >= 2);
}

#[test]
fn weight_matrix_seeds() {
    let mut ok = 0;
    for (_, text) in seeds("weight_matrix") {
        if let Ok(w) = parse_weight_matrix(&text, &memory_path()) {
            assert_eq!(w.names.len(), w.n());
            for conv in [QuantileConvention::Lower, QuantileConvention::Linear, QuantileConvention::Higher] {
                if w.n() >= 2 {
                    assert_eq!(weights_to_adjacency(&w, 0.5, conv).unwrap().n(), w.n());
                }
            }
            ok += 1;
        }
    }
    assert!(ok >= 3);
}

#[test]
fn bench_file_seeds() {
    for (p, text) in seeds("bench_file") {
        let f = parse_bench_file(&text, &p).unwrap();
        assert_eq!(parse_bench_file(&format_bench_file(&f).unwrap(), &p).unwrap(), f);
    }
}

#[test]
fn selection_report_seeds() {
    for (p, text) in seeds("selection_report") {
        let r = parse_selection_report(&text, &p).unwrap();
        let out = format_selection_report(&r).unwrap();
        assert_eq!(out, text, "{}", p.display());
    }
}

#[test]
fn bench_report_seeds() {
    for (p, text) in seeds("bench_report") {
        let r = parse_bench_report(&text, &p).unwrap();
        assert_eq!(format_bench_report(&r).unwrap(), text, "{}", p.display());
    }
}
