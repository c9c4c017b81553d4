//! Text formats: edge lists, weight matrices, simulation settings and
//! selection reports.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::blockmodel::Model;
use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::labeling::Labeling;
use crate::netgen::SimSpec;
use crate::selection::{Flag, SelectionRecord, SelectionResult};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A graph whose nodes carry names from the input file.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedGraph {
    pub adjacency: AdjacencyMatrix,
    pub names: Vec<String>,
}

impl NamedGraph {
    /// Keeps the largest connected component. Returns the names that were
    /// dropped.
    pub fn into_largest_component(self) -> (NamedGraph, Vec<String>) {
        let (adjacency, keep) = self.adjacency.largest_connected_component();
        let mut kept = vec![false; self.names.len()];
        for &i in &keep {
            kept[i] = true;
        }
        let dropped = self
            .names
            .iter()
            .zip(&kept)
            .filter(|(_, &k)| !k)
            .map(|(s, _)| s.clone())
            .collect();
        let names = keep.iter().map(|&i| self.names[i].clone()).collect();
        (NamedGraph { adjacency, names }, dropped)
    }
}

/// Parses whitespace-separated `u v` lines. Blank lines and lines starting
/// with `#` are skipped; node names are numbered in order of appearance.
pub fn parse_edge_list<'a>(text: &'a str, path: &Path) -> Result<NamedGraph> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tok = line.split_whitespace();
        let (Some(u), Some(v), None) = (tok.next(), tok.next(), tok.next()) else {
            return Err(Error::parse(path, lineno + 1, "expected exactly two node names"));
        };
        if u == v {
            return Err(Error::parse(path, lineno + 1, format!("self-loop on {u:?}")));
        }
        let mut id = |s: &'a str| -> usize {
            let next = names.len();
            *index.entry(s).or_insert_with(|| {
                names.push(s.to_string());
                next
            })
        };
        let (iu, iv) = (id(u), id(v));
        edges.push((iu, iv));
    }
    let adjacency = AdjacencyMatrix::from_edges(names.len(), edges)?;
    Ok(NamedGraph { adjacency, names })
}

pub fn read_edge_list(path: &Path) -> Result<NamedGraph> {
    parse_edge_list(&read_text(path)?, path)
}

/// Writes the graph back as an edge list, one `u v` line per edge.
pub fn format_edge_list(g: &NamedGraph) -> String {
    let mut out = String::new();
    for (i, j) in g.adjacency.edges() {
        let _ = writeln!(out, "{} {}", g.names[i], g.names[j]);
    }
    out
}

/// Symmetrized nonnegative weights `W = X + Xᵀ` with node names.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub names: Vec<String>,
    n: usize,
    values: Vec<f64>,
}

impl WeightMatrix {
    /// Symmetrizes a square row-major matrix.
    pub fn from_raw(names: Vec<String>, raw: &[f64]) -> Result<Self> {
        let n = names.len();
        if raw.len() != n * n {
            return Err(Error::Dimension(format!(
                "{} weights for {n} named nodes",
                raw.len()
            )));
        }
        if let Some(x) = raw.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "weights must be finite and nonnegative, found {x}"
            )));
        }
        let values = (0..n * n)
            .map(|p| {
                let (i, j) = (p / n, p % n);
                if i == j {
                    0.0
                } else {
                    raw[i * n + j] + raw[j * n + i]
                }
            })
            .collect();
        Ok(WeightMatrix { names, n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Weights `W_ij`, `i < j`, row by row.
    pub fn upper(&self) -> Vec<f64> {
        (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect()
    }
}

fn split_fields<'a>(line: &'a str, delim: Option<char>) -> Vec<&'a str> {
    match delim {
        Some(d) => line.split(d).map(str::trim).collect(),
        None => line.split_whitespace().collect(),
    }
}

/// Parses a delimiter-separated square matrix with a header row of node
/// names. Rows may start with their own name. Tab, comma and semicolon
/// delimiters are detected from the header; otherwise fields split on
/// whitespace. The result is symmetrized.
pub fn parse_weight_matrix(text: &str, path: &Path) -> Result<WeightMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing header row"))?;
    let delim = ['\t', ',', ';'].into_iter().find(|&d| header.contains(d));
    let header: Vec<&str> = split_fields(header, delim);
    let rows: Vec<(usize, Vec<&str>)> = lines.map(|(i, l)| (i, split_fields(l, delim))).collect();
    let first_is_number = rows
        .first()
        .is_some_and(|(_, r)| r.first().is_some_and(|f| f.parse::<f64>().is_ok()));
    let width = rows.first().map_or(header.len(), |(_, r)| r.len());
    // header may carry a corner cell above the row-name column
    let (names, row_names) = if width == header.len() + 1 {
        (header.clone(), true)
    } else if width == header.len() && !first_is_number {
        (header[1..].to_vec(), true)
    } else if width == header.len() {
        (header.clone(), false)
    } else {
        return Err(Error::parse(
            path,
            rows[0].0 + 1,
            format!("row has {width} fields but the header names {} nodes", header.len()),
        ));
    };
    let n = names.len();
    if n == 0 {
        return Err(Error::parse(path, hline + 1, "header names no nodes"));
    }
    if rows.len() != n {
        return Err(Error::parse(
            path,
            rows.last().map_or(hline, |r| r.0) + 1,
            format!("expected {n} rows, found {}", rows.len()),
        ));
    }
    let mut raw = Vec::with_capacity(n * n);
    for (r, (lineno, fields)) in rows.iter().enumerate() {
        let values = if row_names {
            if fields.len() != n + 1 {
                return Err(Error::parse(path, lineno + 1, format!("expected {} fields", n + 1)));
            }
            if fields[0] != names[r] {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    format!("row name {:?} does not match column {:?}", fields[0], names[r]),
                ));
            }
            &fields[1..]
        } else {
            if fields.len() != n {
                return Err(Error::parse(path, lineno + 1, format!("expected {n} fields")));
            }
            &fields[..]
        };
        for v in values {
            let x: f64 = v
                .parse()
                .map_err(|_| Error::parse(path, lineno + 1, format!("not a number: {v:?}")))?;
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::parse(path, lineno + 1, format!("weight {v} is negative or not finite")));
            }
            raw.push(x);
        }
    }
    WeightMatrix::from_raw(names.into_iter().map(String::from).collect(), &raw)
}

pub fn read_weight_matrix(path: &Path) -> Result<WeightMatrix> {
    parse_weight_matrix(&read_text(path)?, path)
}

/// How the `α`-quantile of the weights is read off the sorted sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileConvention {
    /// Largest value whose empirical CDF is at most `α` (the minimum if none).
    #[default]
    Lower,
    /// Linear interpolation at position `(m - 1)α` of the sorted sample.
    Linear,
    /// Smallest value whose empirical CDF is at least `α`.
    Higher,
}

impl FromStr for QuantileConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" => Ok(QuantileConvention::Lower),
            "linear" => Ok(QuantileConvention::Linear),
            "higher" => Ok(QuantileConvention::Higher),
            _ => Err(Error::InvalidArgument(format!(
                "unknown quantile convention {s:?} (lower, linear, higher)"
            ))),
        }
    }
}

impl std::fmt::Display for QuantileConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            QuantileConvention::Lower => "lower",
            QuantileConvention::Linear => "linear",
            QuantileConvention::Higher => "higher",
        })
    }
}

/// `α`-quantile of a sample under `conv`.
pub fn quantile(xs: &[f64], alpha: f64, conv: QuantileConvention) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::InvalidArgument("quantile of an empty sample".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    Ok(match conv {
        QuantileConvention::Lower => {
            // count of values with rank/m <= alpha, with a small guard for rounding
            let c = ((alpha * m as f64) + 1e-9).floor() as usize;
            v[c.clamp(1, m) - 1]
        }
        QuantileConvention::Higher => {
            let c = ((alpha * m as f64) - 1e-9).ceil() as usize;
            v[c.clamp(1, m) - 1]
        }
        QuantileConvention::Linear => {
            let pos = alpha * (m - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(m - 1);
            v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
        }
    })
}

/// `A_ij = 1{W_ij >= W_α}` over the off-diagonal weights.
pub fn weights_to_adjacency(w: &WeightMatrix, alpha: f64, conv: QuantileConvention) -> Result<AdjacencyMatrix> {
    let upper = w.upper();
    let t = quantile(&upper, alpha, conv)?;
    let n = w.n();
    AdjacencyMatrix::from_edges(
        n,
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| w.get(i, j) >= t),
    )
}

/// A named list of simulation settings, each with its candidate range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSetting {
    pub id: String,
    #[serde(default = "default_k_min")]
    pub k_min: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(flatten)]
    pub spec: SimSpec,
}

fn default_k_min() -> usize {
    crate::selection::DEFAULT_K_RANGE.0
}

fn default_k_max() -> usize {
    crate::selection::DEFAULT_K_RANGE.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchFile {
    pub setting: Vec<BenchSetting>,
}

/// Parses a TOML file of `[[setting]]` tables and validates each spec.
pub fn parse_bench_file(text: &str, path: &Path) -> Result<BenchFile> {
    let file: BenchFile = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map_or(0, |s| text[..s.start.min(text.len())].lines().count().max(1));
        Error::parse(path, line, e.message().to_string())
    })?;
    if file.setting.is_empty() {
        return Err(Error::InvalidSpec("no [[setting]] tables".into()));
    }
    for s in &file.setting {
        s.spec
            .validate()
            .map_err(|e| Error::InvalidSpec(format!("setting {:?}: {e}", s.id)))?;
        if s.k_min == 0 || s.k_min > s.k_max {
            return Err(Error::InvalidSpec(format!(
                "setting {:?}: candidate range {}..={} is empty",
                s.id, s.k_min, s.k_max
            )));
        }
    }
    Ok(file)
}

pub fn read_bench_file(path: &Path) -> Result<BenchFile> {
    parse_bench_file(&read_text(path)?, path)
}

pub fn format_bench_file(file: &BenchFile) -> Result<String> {
    toml::to_string(file).map_err(|e| Error::InvalidSpec(e.to_string()))
}

/// Everything `select` writes: the selection result plus node names and
/// provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub result: SelectionResult,
    pub names: Vec<String>,
    /// Free-form `key value` metadata emitted as `#` lines.
    pub meta: Vec<(String, String)>,
}

const REPORT_MAGIC: &str = "# clbic selection report";
const RECORD_HEADER: &str = "k\tloglik\td_hat\tdimension\tclbic\tbic\tflags";

fn check_token(s: &str, what: &str) -> Result<()> {
    if s.is_empty() || s.contains(['\t', '\n', '\r']) {
        return Err(Error::InvalidArgument(format!("{what} {s:?} cannot be written as a field")));
    }
    Ok(())
}

/// Tab-separated report. Floats use the shortest representation that
/// parses back to the same value, so the format is lossless.
pub fn format_selection_report(r: &SelectionReport) -> Result<String> {
    let res = &r.result;
    if r.names.len() != res.n {
        return Err(Error::Dimension(format!("{} names for {} nodes", r.names.len(), res.n)));
    }
    for name in &r.names {
        check_token(name, "node name")?;
    }
    let mut out = String::new();
    let _ = writeln!(out, "{REPORT_MAGIC}");
    for (key, val) in &r.meta {
        check_token(key, "metadata key")?;
        if val.contains(['\n', '\r']) || key.contains(' ') {
            return Err(Error::InvalidArgument(format!("metadata {key:?} must be one line")));
        }
        let _ = writeln!(out, "# {key}\t{val}");
    }
    let _ = writeln!(out, "#! n\t{}", res.n);
    let _ = writeln!(out, "#! model\t{}", res.model);
    let _ = writeln!(out, "#! seed\t{}", res.seed);
    let _ = writeln!(out, "#! chosen_clbic\t{}", res.chosen_clbic);
    let _ = writeln!(out, "#! chosen_bic\t{}", res.chosen_bic);
    let _ = writeln!(out, "{RECORD_HEADER}");
    for rec in &res.records {
        let flags = if rec.flags.is_empty() {
            "-".to_string()
        } else {
            rec.flags.iter().map(Flag::to_string).collect::<Vec<_>>().join(";")
        };
        let _ = writeln!(
            out,
            "{}\t{:?}\t{:?}\t{}\t{:?}\t{:?}\t{}",
            rec.k, rec.loglik, rec.d_hat, rec.dimension, rec.clbic, rec.bic, flags
        );
    }
    let _ = writeln!(out);
    let _ = write!(out, "node");
    for rec in &res.records {
        let _ = write!(out, "\tk={}", rec.k);
    }
    let _ = writeln!(out);
    for (i, name) in r.names.iter().enumerate() {
        let _ = write!(out, "{name}");
        for rec in &res.records {
            let _ = write!(out, "\t{}", rec.labeling.get(i) + 1);
        }
        let _ = writeln!(out);
    }
    Ok(out)
}

fn field<T: FromStr>(s: &str, path: &Path, line: usize, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(path, line, format!("bad {what}: {s:?}")))
}

fn number(s: &str, path: &Path, line: usize, what: &str) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(x) if !x.is_nan() => Ok(x),
        _ => Err(Error::parse(path, line, format!("bad {what}: {s:?}"))),
    }
}

/// Inverse of [`format_selection_report`].
pub fn parse_selection_report(text: &str, path: &Path) -> Result<SelectionReport> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.first() != Some(&REPORT_MAGIC) {
        return Err(Error::parse(path, 1, "not a selection report"));
    }
    let mut meta = Vec::new();
    let mut fixed: HashMap<&str, (usize, &str)> = HashMap::new();
    let mut i = 1;
    while i < lines.len() && lines[i].starts_with('#') {
        let line = lines[i];
        if let Some(rest) = line.strip_prefix("#! ") {
            let (k, v) = rest
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "malformed field line"))?;
            fixed.insert(k, (i + 1, v));
        } else if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "malformed metadata line"))?;
            meta.push((k.to_string(), v.to_string()));
        } else {
            return Err(Error::parse(path, i + 1, "malformed comment line"));
        }
        i += 1;
    }
    let get = |k: &str| -> Result<(usize, &str)> {
        fixed
            .get(k)
            .copied()
            .ok_or_else(|| Error::parse(path, i + 1, format!("missing field {k:?}")))
    };
    let (l, v) = get("n")?;
    let n: usize = field(v, path, l, "node count")?;
    let (l, v) = get("model")?;
    let model: Model = field(v, path, l, "model")?;
    let (l, v) = get("seed")?;
    let seed: u64 = field(v, path, l, "seed")?;
    let (l, v) = get("chosen_clbic")?;
    let chosen_clbic: usize = field(v, path, l, "chosen k")?;
    let (l, v) = get("chosen_bic")?;
    let chosen_bic: usize = field(v, path, l, "chosen k")?;

    if lines.get(i) != Some(&RECORD_HEADER) {
        return Err(Error::parse(path, i + 1, "expected the record header"));
    }
    i += 1;
    let mut partial = Vec::new();
    while i < lines.len() && !lines[i].is_empty() {
        let f: Vec<&str> = lines[i].split('\t').collect();
        let l = i + 1;
        if f.len() != 7 {
            return Err(Error::parse(path, l, format!("expected 7 fields, found {}", f.len())));
        }
        let flags = if f[6] == "-" {
            Vec::new()
        } else {
            f[6].split(';')
                .map(|t| t.parse::<Flag>().map_err(|e| Error::parse(path, l, e.to_string())))
                .collect::<Result<Vec<_>>>()?
        };
        partial.push((
            field::<usize>(f[0], path, l, "k")?,
            number(f[1], path, l, "loglik")?,
            number(f[2], path, l, "d_hat")?,
            field::<usize>(f[3], path, l, "dimension")?,
            number(f[4], path, l, "clbic")?,
            number(f[5], path, l, "bic")?,
            flags,
        ));
        i += 1;
    }
    i += 1;
    let header: Vec<&str> = lines
        .get(i)
        .ok_or_else(|| Error::parse(path, i + 1, "missing label table"))?
        .split('\t')
        .collect();
    let expect: Vec<String> = std::iter::once("node".to_string())
        .chain(partial.iter().map(|p| format!("k={}", p.0)))
        .collect();
    if header != expect {
        return Err(Error::parse(path, i + 1, "label table header does not match the records"));
    }
    i += 1;
    let mut names = Vec::with_capacity(n);
    let mut labels: Vec<Vec<usize>> = vec![Vec::with_capacity(n); partial.len()];
    while i < lines.len() {
        let f: Vec<&str> = lines[i].split('\t').collect();
        let l = i + 1;
        if f.len() != partial.len() + 1 {
            return Err(Error::parse(path, l, "wrong number of label fields"));
        }
        names.push(f[0].to_string());
        for (c, t) in f[1..].iter().enumerate() {
            let lab: usize = field(t, path, l, "label")?;
            if lab == 0 || lab > partial[c].0 {
                return Err(Error::parse(path, l, format!("label {lab} outside 1..={}", partial[c].0)));
            }
            labels[c].push(lab - 1);
        }
        i += 1;
    }
    if names.len() != n {
        return Err(Error::parse(path, lines.len(), format!("expected {n} label rows, found {}", names.len())));
    }
    let records = partial
        .into_iter()
        .zip(labels)
        .map(|((k, loglik, d_hat, dimension, clbic, bic, flags), z)| {
            Ok(SelectionRecord {
                k,
                loglik,
                d_hat,
                dimension,
                clbic,
                bic,
                labeling: Labeling::new(k, z).map_err(|e| Error::parse(path, 0, e.to_string()))?,
                flags,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectionReport {
        result: SelectionResult {
            n,
            model,
            seed,
            records,
            chosen_clbic,
            chosen_bic,
        },
        names,
        meta,
    })
}

pub fn read_selection_report(path: &Path) -> Result<SelectionReport> {
    parse_selection_report(&read_text(path)?, path)
}

/// Placeholder path used when parsing in-memory text.
pub fn memory_path() -> PathBuf {
    PathBuf::from("<memory>")
}
