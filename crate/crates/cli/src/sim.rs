//! Simulation subcommands: parameter files in, CSV and manifest out.

use std::path::{Path, PathBuf};

use vdselect_simlab::experiments::{
    equivalence_experiment, equivalence_ks, fdr_cells, fdr_experiment, inflation_deltas, norm_inflation_experiment,
    path_length_experiment, universality_experiment, universality_medians, EquivalenceParams, FdrParams,
    NormInflationParams, PathLengthParams, UniversalityParams,
};
use vdselect_simlab::metrics::mean_se;

use crate::error::CliError;
use crate::manifest::{s, write_csv, write_json, RunManifest};
use crate::params::ParamFile;

pub const EQUIVALENCE_HEADER: &str = "method,T,rank,replicate,value";
pub const FDR_HEADER: &str = "alpha,L_factor,snr,replicate,fdp,tpp";
pub const UNIVERSALITY_HEADER: &str = "law,n,k,replicate,ks,w1,deloc";
pub const INFLATION_HEADER: &str = "law,alpha,T,L_factor,replicate,fdp,tpp";
pub const RATIO_HEADER: &str = "replicate,ratio,eta";
pub const PATH_LENGTH_HEADER: &str = "replicate,kappa,true_positives,nulls,dummies";

/// Files written by one simulation and a short human-readable summary.
#[derive(Debug, Clone, Default)]
pub struct SimReport {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

fn load(path: Option<&Path>) -> Result<ParamFile, CliError> {
    match path {
        Some(p) => ParamFile::load(p),
        None => Ok(ParamFile::default()),
    }
}

fn prepare(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

fn finish_report(
    out: &Path,
    command: &str,
    seed: u64,
    params: &impl serde::Serialize,
    stamp: bool,
    mut report: SimReport,
) -> Result<SimReport, CliError> {
    let path = out.join("manifest.json");
    write_json(&path, &RunManifest::new(command, seed, params, stamp)?)?;
    report.files.push(path);
    Ok(report)
}

pub fn equivalence_params(file: Option<&Path>, shadow: bool) -> Result<EquivalenceParams, CliError> {
    let f = load(file)?;
    let d = EquivalenceParams::default();
    let params = EquivalenceParams {
        n: f.get("n", d.n)?,
        p: f.get("p", d.p)?,
        s: f.get("s", d.s)?,
        snr: f.get("snr", d.snr)?,
        l: f.get("l", d.l)?,
        ts: f.list("ts", d.ts)?,
        ranks: f.list("ranks", d.ranks)?,
        replicates: f.get("replicates", d.replicates)?,
        law: f.get("law", d.law)?,
        shadow: f.get("shadow", d.shadow)? || shadow,
        seed: f.get("seed", d.seed)?,
    };
    f.finish()?;
    Ok(params)
}

pub fn sim_equivalence(params: &EquivalenceParams, out: &Path, stamp: bool) -> Result<SimReport, CliError> {
    prepare(out)?;
    let rows = equivalence_experiment(params)?;
    let csv = out.join("equivalence.csv");
    write_csv(&csv, EQUIVALENCE_HEADER, &rows, |r| {
        vec![s(r.method.name()), s(r.t), s(r.rank), s(r.replicate), s(r.value)]
    })?;
    let summary = equivalence_ks(&rows)?
        .into_iter()
        .map(|(t, rank, d)| format!("T={t} rank={rank} ks={d:.4}"))
        .collect();
    let report = SimReport { files: vec![csv], summary };
    finish_report(out, "sim-equivalence", params.seed, params, stamp, report)
}

pub fn fdr_params(file: Option<&Path>) -> Result<FdrParams, CliError> {
    let f = load(file)?;
    let d = FdrParams::default();
    let params = FdrParams {
        n: f.get("n", d.n)?,
        p: f.get("p", d.p)?,
        s: f.get("s", d.s)?,
        snrs: f.list("snrs", d.snrs)?,
        alphas: f.list("alphas", d.alphas)?,
        l_factors: f.list("l_factors", d.l_factors)?,
        b: f.get("b", d.b)?,
        t_max: f.get("t_max", d.t_max)?,
        replicates: f.get("replicates", d.replicates)?,
        law: f.get("law", d.law)?,
        selector: f.get("selector", d.selector)?,
        seed: f.get("seed", d.seed)?,
    };
    f.finish()?;
    Ok(params)
}

pub fn sim_fdr(params: &FdrParams, out: &Path, stamp: bool) -> Result<SimReport, CliError> {
    prepare(out)?;
    let rows = fdr_experiment(params)?;
    let csv = out.join("fdr.csv");
    write_csv(&csv, FDR_HEADER, &rows, |r| {
        vec![s(r.alpha), s(r.l_factor), s(r.snr), s(r.replicate), s(r.fdp), s(r.tpp)]
    })?;
    let summary = fdr_cells(&rows)?
        .into_iter()
        .map(|c| {
            format!(
                "alpha={} L_factor={} snr={} mean_fdp={:.4} (se {:.4}) mean_tpp={:.4}",
                c.alpha, c.l_factor, c.snr, c.mean_fdp, c.se_fdp, c.mean_tpp
            )
        })
        .collect();
    let report = SimReport { files: vec![csv], summary };
    finish_report(out, "sim-fdr", params.seed, params, stamp, report)
}

pub fn universality_params(file: Option<&Path>) -> Result<UniversalityParams, CliError> {
    let f = load(file)?;
    let d = UniversalityParams::default();
    let params = UniversalityParams {
        laws: f.list("laws", d.laws)?,
        ns: f.list("ns", d.ns)?,
        ks: f.list("ks", d.ks)?,
        p: f.get("p", d.p)?,
        s: f.get("s", d.s)?,
        snr: f.get("snr", d.snr)?,
        l: f.get("l", d.l)?,
        ensembles: f.get("ensembles", d.ensembles)?,
        seed: f.get("seed", d.seed)?,
    };
    f.finish()?;
    Ok(params)
}

pub fn sim_universality(params: &UniversalityParams, out: &Path, stamp: bool) -> Result<SimReport, CliError> {
    prepare(out)?;
    let rows = universality_experiment(params)?;
    let csv = out.join("universality.csv");
    write_csv(&csv, UNIVERSALITY_HEADER, &rows, |r| {
        vec![r.law.clone(), s(r.n), s(r.k), s(r.replicate), s(r.ks), s(r.w1), s(r.deloc)]
    })?;
    let summary = universality_medians(&rows)?
        .into_iter()
        .map(|c| {
            format!(
                "law={} n={} k={} median_ks={:.5} (se {:.5}) median_w1={:.5} median_deloc={:.4}",
                c.law, c.n, c.k, c.median_ks, c.se_median_ks, c.median_w1, c.median_deloc
            )
        })
        .collect();
    let report = SimReport { files: vec![csv], summary };
    finish_report(out, "sim-universality", params.seed, params, stamp, report)
}

pub fn norm_inflation_params(file: Option<&Path>) -> Result<NormInflationParams, CliError> {
    let f = load(file)?;
    let d = NormInflationParams::default();
    let params = NormInflationParams {
        n: f.get("n", d.n)?,
        p: f.get("p", d.p)?,
        s: f.get("s", d.s)?,
        snr: f.get("snr", d.snr)?,
        alphas: f.list("alphas", d.alphas)?,
        ts: f.list("ts", d.ts)?,
        l_factors: f.list("l_factors", d.l_factors)?,
        b: f.get("b", d.b)?,
        replicates: f.get("replicates", d.replicates)?,
        selector: f.get("selector", d.selector)?,
        seed: f.get("seed", d.seed)?,
        ratio_trials: f.get("ratio_trials", d.ratio_trials)?,
        ratio_m: f.get("ratio_m", d.ratio_m)?,
        ratio_l: f.get("ratio_l", d.ratio_l)?,
        delta: f.get("delta", d.delta)?,
    };
    f.finish()?;
    Ok(params)
}

pub fn sim_norm_inflation(params: &NormInflationParams, out: &Path, stamp: bool) -> Result<SimReport, CliError> {
    prepare(out)?;
    let res = norm_inflation_experiment(params)?;
    let csv = out.join("norm_inflation.csv");
    write_csv(&csv, INFLATION_HEADER, &res.rows, |r| {
        vec![s(r.law.name()), s(r.alpha), s(r.t), s(r.l_factor), s(r.replicate), s(r.fdp), s(r.tpp)]
    })?;
    let ratio_csv = out.join("norm_inflation_ratio.csv");
    write_csv(&ratio_csv, RATIO_HEADER, &res.ratios, |r| vec![s(r.replicate), s(r.ratio), s(r.eta)])?;
    let mut summary: Vec<String> = inflation_deltas(&res.rows)?
        .into_iter()
        .map(|d| {
            format!(
                "alpha={} T={} L_factor={} delta_fdp={:+.4} delta_tpp={:+.4}",
                d.alpha, d.t, d.l_factor, d.delta_fdp, d.delta_tpp
            )
        })
        .collect();
    if !res.ratios.is_empty() {
        let held = res.ratios.iter().filter(|r| r.ratio <= 1.0 + r.eta).count();
        summary.push(format!("ratio <= 1 + eta in {held} of {} trials", res.ratios.len()));
    }
    let report = SimReport { files: vec![csv, ratio_csv], summary };
    finish_report(out, "sim-norm-inflation", params.seed, params, stamp, report)
}

pub fn path_length_params(file: Option<&Path>) -> Result<PathLengthParams, CliError> {
    let f = load(file)?;
    let d = PathLengthParams::default();
    let params = PathLengthParams {
        n: f.get("n", d.n)?,
        p: f.get("p", d.p)?,
        s: f.get("s", d.s)?,
        snr: f.get("snr", d.snr)?,
        l: f.get("l", d.l)?,
        t: f.get("t", d.t)?,
        runs: f.get("runs", d.runs)?,
        law: f.get("law", d.law)?,
        selector: f.get("selector", d.selector)?,
        seed: f.get("seed", d.seed)?,
    };
    f.finish()?;
    Ok(params)
}

pub fn sim_path_length(params: &PathLengthParams, out: &Path, stamp: bool) -> Result<SimReport, CliError> {
    prepare(out)?;
    let rows = path_length_experiment(params)?;
    let csv = out.join("path_length.csv");
    write_csv(&csv, PATH_LENGTH_HEADER, &rows, |r| {
        vec![s(r.replicate), s(r.kappa), s(r.true_positives), s(r.nulls), s(r.dummies)]
    })?;
    let kappa: Vec<f64> = rows.iter().map(|r| r.kappa as f64).collect();
    let (mean, se) = mean_se(&kappa)?;
    let summary = vec![format!("T={} mean_kappa={mean:.3} (se {se:.3})", params.t)];
    let report = SimReport { files: vec![csv], summary };
    finish_report(out, "sim-path-length", params.seed, params, stamp, report)
}
