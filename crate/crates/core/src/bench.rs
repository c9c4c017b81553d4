//! Simulation sweeps: generate replicates, select `k`, tabulate how often
//! each criterion finds the planted number of communities.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::blockmodel::{dcbm_expected_adjacency, dcbm_mle, Model};
use crate::error::{Error, Result};
use crate::io::{BenchFile, BenchSetting};
use crate::labeling::Labeling;
use crate::metrics::{frobenius_rel_err, median, median_ratio_mr, misclustering_rate, rand_gf};
use crate::netgen::generate;
use crate::selection::{select_k, SelectionConfig};

/// Scale turning a median absolute deviation into a normal-consistent
/// standard deviation.
pub const MAD_SCALE: f64 = 1.4826;

/// Outcome of one simulated network.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub rep: u64,
    /// Nodes outside the largest connected component, which selection skips.
    pub dropped: usize,
    pub chosen_clbic: usize,
    pub chosen_bic: usize,
    /// Estimated complexity at the planted `k`.
    pub d_hat_true: Option<f64>,
    /// Misclustering of the clustering at the planted `k`.
    pub misclustering_true: Option<f64>,
    pub gf_clbic: f64,
    pub mr_clbic: Option<f64>,
    pub gf_bic: f64,
    pub mr_bic: Option<f64>,
    /// DCBM only: relative error of the expected adjacency fitted with the
    /// planted labels.
    pub oracle_err: Option<f64>,
    /// DCBM only: same with the clustering labels at the planted `k`.
    pub est_err: Option<f64>,
}

/// Proportion correct and spread of the misses for one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSummary {
    pub prop: f64,
    /// Median of `chosen - true` over incorrect replicates only.
    pub median_dev: Option<f64>,
    /// `1.4826 * MAD` of the same deviations.
    pub rsd: Option<f64>,
}

impl CriterionSummary {
    pub fn from_choices(chosen: &[usize], k_true: usize) -> Self {
        let n = chosen.len().max(1) as f64;
        let correct = chosen.iter().filter(|&&c| c == k_true).count();
        let devs: Vec<f64> = chosen
            .iter()
            .filter(|&&c| c != k_true)
            .map(|&c| c as f64 - k_true as f64)
            .collect();
        let median_dev = median(&devs);
        let rsd = median_dev.map(|m| {
            let abs: Vec<f64> = devs.iter().map(|d| (d - m).abs()).collect();
            MAD_SCALE * median(&abs).unwrap_or(0.0)
        });
        CriterionSummary {
            prop: correct as f64 / n,
            median_dev,
            rsd,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SettingSummary {
    pub id: String,
    pub model: Model,
    pub k_true: usize,
    pub reps: usize,
    pub clbic: CriterionSummary,
    pub bic: CriterionSummary,
    pub gf_clbic: Option<f64>,
    pub mr_clbic: Option<f64>,
    pub gf_bic: Option<f64>,
    pub mr_bic: Option<f64>,
    pub d_hat_true: Option<f64>,
    pub misclustering_true: Option<f64>,
    pub oracle_err: Option<f64>,
    pub est_err: Option<f64>,
    pub replicates: Vec<ReplicateOutcome>,
}

fn mean_of(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = xs.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

impl SettingSummary {
    pub fn from_replicates(id: &str, model: Model, k_true: usize, replicates: Vec<ReplicateOutcome>) -> Self {
        let c: Vec<usize> = replicates.iter().map(|r| r.chosen_clbic).collect();
        let b: Vec<usize> = replicates.iter().map(|r| r.chosen_bic).collect();
        let r = &replicates;
        SettingSummary {
            id: id.to_string(),
            model,
            k_true,
            reps: r.len(),
            clbic: CriterionSummary::from_choices(&c, k_true),
            bic: CriterionSummary::from_choices(&b, k_true),
            gf_clbic: mean_of(r.iter().map(|x| Some(x.gf_clbic))),
            mr_clbic: mean_of(r.iter().map(|x| x.mr_clbic)),
            gf_bic: mean_of(r.iter().map(|x| Some(x.gf_bic))),
            mr_bic: mean_of(r.iter().map(|x| x.mr_bic)),
            d_hat_true: mean_of(r.iter().map(|x| x.d_hat_true)),
            misclustering_true: mean_of(r.iter().map(|x| x.misclustering_true)),
            oracle_err: mean_of(r.iter().map(|x| x.oracle_err)),
            est_err: mean_of(r.iter().map(|x| x.est_err)),
            replicates,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub meta: Vec<(String, String)>,
    pub settings: Vec<SettingSummary>,
}

/// Runs one replicate of a setting.
pub fn run_replicate(setting: &BenchSetting, rep: u64) -> Result<ReplicateOutcome> {
    let spec = &setting.spec;
    let sim = generate(spec, rep)?;
    let (a, keep) = sim.adjacency.largest_connected_component();
    let truth = sim.labels.restrict(&keep);
    let k_true = spec.k();
    let k_max = setting.k_max.min(a.n());
    let cfg = SelectionConfig::new(spec.model, setting.k_min.min(k_max), k_max, spec.seed);
    let res = select_k(&a, &cfg)?;
    let labels_at = |k: usize| -> Labeling {
        res.record(k)
            .map(|r| r.labeling.clone())
            .unwrap_or_else(|| Labeling::single(a.n()))
    };
    let z_clbic = labels_at(res.chosen_clbic);
    let z_bic = labels_at(res.chosen_bic);
    let at_true = res.record(k_true);

    let (oracle_err, est_err) = match (&sim.planted, at_true) {
        (Some(planted), Some(rec)) => {
            let omega: Vec<f64> = keep.iter().map(|&i| planted.omega[i]).collect();
            let truth_omega = dcbm_expected_adjacency(&truth, &planted.theta, &omega);
            let fitted = |z: &Labeling| -> Result<f64> {
                let p = dcbm_mle(&a, z)?;
                frobenius_rel_err(&dcbm_expected_adjacency(z, &p.theta, &p.omega), &truth_omega)
            };
            (Some(fitted(&truth)?), Some(fitted(&rec.labeling)?))
        }
        _ => (None, None),
    };
    Ok(ReplicateOutcome {
        rep,
        dropped: sim.adjacency.n() - a.n(),
        chosen_clbic: res.chosen_clbic,
        chosen_bic: res.chosen_bic,
        d_hat_true: at_true.map(|r| r.d_hat),
        misclustering_true: at_true.map(|r| misclustering_rate(&truth, &r.labeling)).transpose()?,
        gf_clbic: rand_gf(&truth, &z_clbic)?,
        mr_clbic: median_ratio_mr(&a, &z_clbic)?,
        gf_bic: rand_gf(&truth, &z_bic)?,
        mr_bic: median_ratio_mr(&a, &z_bic)?,
        oracle_err,
        est_err,
    })
}

/// All replicates of one setting. Replicates run in parallel; results are
/// collected in replicate order, so the summary does not depend on scheduling.
pub fn run_setting(setting: &BenchSetting) -> Result<SettingSummary> {
    setting.spec.validate()?;
    let outcomes = (0..setting.spec.reps as u64)
        .into_par_iter()
        .map(|rep| run_replicate(setting, rep))
        .collect::<Result<Vec<_>>>()?;
    Ok(SettingSummary::from_replicates(
        &setting.id,
        setting.spec.model,
        setting.spec.k(),
        outcomes,
    ))
}

/// Validates every setting before running any of them.
pub fn run_bench(file: &BenchFile) -> Result<BenchReport> {
    for s in &file.setting {
        s.spec
            .validate()
            .map_err(|e| {
                let msg = match e {
                    Error::InvalidSpec(m) => m,
                    other => other.to_string(),
                };
                Error::InvalidSpec(format!("setting {:?}: {msg}", s.id))
            })?;
    }
    let settings = file.setting.iter().map(run_setting).collect::<Result<Vec<_>>>()?;
    let mut meta = vec![
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("median_dev".to_string(), "median of chosen-true over incorrect replicates".to_string()),
        ("rsd".to_string(), format!("{MAD_SCALE} * MAD over incorrect replicates")),
        ("component".to_string(), "selection runs on the largest connected component".to_string()),
    ];
    for s in &file.setting {
        meta.push((format!("seed.{}", s.id), s.spec.seed.to_string()));
    }
    Ok(BenchReport { meta, settings })
}

const BENCH_MAGIC: &str = "# clbic bench report";
const SUMMARY_HEADER: &str = "setting\tmodel\tk_true\treps\tprop_clbic\tprop_bic\tmd_clbic\trsd_clbic\tmd_bic\trsd_bic\tgf_clbic\tmr_clbic\tgf_bic\tmr_bic\td_hat_true\tmisclustering_true\toracle_err\test_err";
const REPLICATE_HEADER: &str = "setting\trep\tdropped\tchosen_clbic\tchosen_bic\td_hat_true\tmisclustering_true\tgf_clbic\tmr_clbic\tgf_bic\tmr_bic\toracle_err\test_err";

fn cell(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:?}"))
}

/// Summary table, a blank line, then one row per replicate. Missing values
/// are empty cells.
pub fn format_bench_report(r: &BenchReport) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "{BENCH_MAGIC}");
    for (k, v) in &r.meta {
        if k.contains(['\t', '\n', ' ']) || v.contains(['\n', '\r']) {
            return Err(Error::InvalidArgument(format!("metadata {k:?} cannot be written")));
        }
        let _ = writeln!(out, "# {k}\t{v}");
    }
    for s in &r.settings {
        if s.id.is_empty() || s.id.contains(['\t', '\n', '\r']) {
            return Err(Error::InvalidArgument(format!("setting id {:?} cannot be written", s.id)));
        }
    }
    let _ = writeln!(out, "{SUMMARY_HEADER}");
    for s in &r.settings {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:?}\t{:?}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.id,
            s.model,
            s.k_true,
            s.reps,
            s.clbic.prop,
            s.bic.prop,
            cell(s.clbic.median_dev),
            cell(s.clbic.rsd),
            cell(s.bic.median_dev),
            cell(s.bic.rsd),
            cell(s.gf_clbic),
            cell(s.mr_clbic),
            cell(s.gf_bic),
            cell(s.mr_bic),
            cell(s.d_hat_true),
            cell(s.misclustering_true),
            cell(s.oracle_err),
            cell(s.est_err),
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{REPLICATE_HEADER}");
    for s in &r.settings {
        for x in &s.replicates {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:?}\t{}\t{:?}\t{}\t{}\t{}",
                s.id,
                x.rep,
                x.dropped,
                x.chosen_clbic,
                x.chosen_bic,
                cell(x.d_hat_true),
                cell(x.misclustering_true),
                x.gf_clbic,
                cell(x.mr_clbic),
                x.gf_bic,
                cell(x.mr_bic),
                cell(x.oracle_err),
                cell(x.est_err),
            );
        }
    }
    Ok(out)
}

fn opt(s: &str, path: &Path, line: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    num(s, path, line).map(Some)
}

/// A float field; NaN is refused so that parsed reports compare equal to
/// themselves.
fn num(s: &str, path: &Path, line: usize) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(x) if !x.is_nan() => Ok(x),
        _ => Err(Error::parse(path, line, format!("not a number: {s:?}"))),
    }
}

fn req<T: std::str::FromStr>(s: &str, path: &Path, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(path, line, format!("bad field {s:?}")))
}

/// Inverse of [`format_bench_report`].
pub fn parse_bench_report(text: &str, path: &Path) -> Result<BenchReport> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.first() != Some(&BENCH_MAGIC) {
        return Err(Error::parse(path, 1, "not a bench report"));
    }
    let mut i = 1;
    let mut meta = Vec::new();
    while i < lines.len() && lines[i].starts_with('#') {
        let (k, v) = lines[i]
            .strip_prefix("# ")
            .and_then(|r| r.split_once('\t'))
            .ok_or_else(|| Error::parse(path, i + 1, "malformed metadata line"))?;
        meta.push((k.to_string(), v.to_string()));
        i += 1;
    }
    if lines.get(i) != Some(&SUMMARY_HEADER) {
        return Err(Error::parse(path, i + 1, "expected the summary header"));
    }
    i += 1;
    let mut settings: Vec<SettingSummary> = Vec::new();
    while i < lines.len() && !lines[i].is_empty() {
        let f: Vec<&str> = lines[i].split('\t').collect();
        let l = i + 1;
        if f.len() != 18 {
            return Err(Error::parse(path, l, format!("expected 18 fields, found {}", f.len())));
        }
        settings.push(SettingSummary {
            id: f[0].to_string(),
            model: req(f[1], path, l)?,
            k_true: req(f[2], path, l)?,
            reps: req(f[3], path, l)?,
            clbic: CriterionSummary {
                prop: num(f[4], path, l)?,
                median_dev: opt(f[6], path, l)?,
                rsd: opt(f[7], path, l)?,
            },
            bic: CriterionSummary {
                prop: num(f[5], path, l)?,
                median_dev: opt(f[8], path, l)?,
                rsd: opt(f[9], path, l)?,
            },
            gf_clbic: opt(f[10], path, l)?,
            mr_clbic: opt(f[11], path, l)?,
            gf_bic: opt(f[12], path, l)?,
            mr_bic: opt(f[13], path, l)?,
            d_hat_true: opt(f[14], path, l)?,
            misclustering_true: opt(f[15], path, l)?,
            oracle_err: opt(f[16], path, l)?,
            est_err: opt(f[17], path, l)?,
            replicates: Vec::new(),
        });
        i += 1;
    }
    i += 1;
    if lines.get(i) != Some(&REPLICATE_HEADER) {
        return Err(Error::parse(path, i + 1, "expected the replicate header"));
    }
    i += 1;
    while i < lines.len() {
        let f: Vec<&str> = lines[i].split('\t').collect();
        let l = i + 1;
        if f.len() != 13 {
            return Err(Error::parse(path, l, format!("expected 13 fields, found {}", f.len())));
        }
        let s = settings
            .iter_mut()
            .find(|s| s.id == f[0])
            .ok_or_else(|| Error::parse(path, l, format!("unknown setting {:?}", f[0])))?;
        s.replicates.push(ReplicateOutcome {
            rep: req(f[1], path, l)?,
            dropped: req(f[2], path, l)?,
            chosen_clbic: req(f[3], path, l)?,
            chosen_bic: req(f[4], path, l)?,
            d_hat_true: opt(f[5], path, l)?,
            misclustering_true: opt(f[6], path, l)?,
            gf_clbic: num(f[7], path, l)?,
            mr_clbic: opt(f[8], path, l)?,
            gf_bic: num(f[9], path, l)?,
            mr_bic: opt(f[10], path, l)?,
            oracle_err: opt(f[11], path, l)?,
            est_err: opt(f[12], path, l)?,
        });
        i += 1;
    }
    for s in &settings {
        if s.replicates.len() != s.reps {
            return Err(Error::parse(
                path,
                lines.len(),
                format!("setting {:?} lists {} of {} replicates", s.id, s.replicates.len(), s.reps),
            ));
        }
    }
    Ok(BenchReport { meta, settings })
}
