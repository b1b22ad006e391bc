//! End-to-end T-Rex selection on a design stored as VDMX.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use vdselect_core::ambient::center_project;
use vdselect_core::trex::{trex_select, TrexConfig, TrexResult};
use vdselect_core::{AmbientSpace, ColumnProvider, DenseColumns, DummyLaw, SelectorKind};

use crate::error::CliError;
use crate::manifest::{write_json, RunManifest};
use crate::matrix::{has_magic, matrix_open, matrix_read, Standardized};

#[derive(Debug, Clone, Serialize)]
pub struct SelectParams {
    pub x: PathBuf,
    pub y: PathBuf,
    pub alpha: f64,
    pub l_factor: usize,
    pub t_max: usize,
    pub b: usize,
    pub law: DummyLaw,
    pub selector: SelectorKind,
    pub seed: u64,
    pub mmap: bool,
}

/// The JSON result document. Indices are 0-based column positions.
#[derive(Debug, Clone, Serialize)]
pub struct SelectOutput {
    pub manifest: RunManifest,
    pub selected: Vec<usize>,
    pub v_star: Option<f64>,
    pub t_star: Option<usize>,
    pub fdp_estimate: Option<f64>,
    pub feasible: bool,
    /// Dummies per experiment.
    pub l: usize,
    /// Nonzero relative occurrences at `t_star`, or at `t_max` when no
    /// calibration point is feasible.
    pub phi: BTreeMap<usize, f64>,
    pub exhausted_experiments: usize,
}

/// Reads a response stored as a one-column VDMX file or as a single-column
/// text file with an optional header line.
pub fn read_response(path: &Path) -> Result<Vec<f64>, CliError> {
    if has_magic(path)? {
        let m = matrix_read(path)?;
        if m.header.p != 1 {
            return Err(CliError::format(path, format!("response matrix has {} columns, expected 1", m.header.p)));
        }
        return Ok(m.data);
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.contains(',') {
            return Err(CliError::format(path, format!("line {}: expected a single column", no + 1)));
        }
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => return Err(CliError::format(path, format!("line {}: non-finite value", no + 1))),
            Err(_) if no == 0 => {}
            Err(_) => return Err(CliError::format(path, format!("line {}: cannot parse '{line}'", no + 1))),
        }
    }
    Ok(out)
}

fn config_of(params: &SelectParams, p: usize) -> Result<TrexConfig, CliError> {
    if params.l_factor == 0 {
        return Err(CliError::Usage(
            "L-factor 0 leaves the dummy pool empty; T-Rex needs L >= t_max".into(),
        ));
    }
    let config = TrexConfig {
        l: params.l_factor * p,
        b: params.b,
        t_max: params.t_max,
        alpha: params.alpha,
        law: params.law,
        selector: params.selector,
        master_seed: params.seed,
    };
    config.validate()?;
    Ok(config)
}

fn run_on<P: ColumnProvider>(x: &P, y: &[f64], params: &SelectParams) -> Result<(TrexConfig, TrexResult), CliError> {
    if y.len() != x.n() {
        return Err(CliError::format(
            &params.y,
            format!("response has {} entries, design has {} rows", y.len(), x.n()),
        ));
    }
    let config = config_of(params, x.p())?;
    let space = AmbientSpace::new(x.n())?;
    let y = center_project(y, &space)?.into_vec();
    Ok((config, trex_select(x, &y, &config)?))
}

pub fn select(params: &SelectParams, stamp: bool) -> Result<SelectOutput, CliError> {
    let y = read_response(&params.y)?;
    let (config, result) = if params.mmap {
        let m = matrix_open(&params.x)?;
        if m.header.is_standardized() {
            run_on(&m, &y, params)?
        } else {
            run_on(&Standardized::new(m)?, &y, params)?
        }
    } else {
        let m = matrix_read(&params.x)?;
        let (n, p) = (m.header.n, m.header.p);
        let x = if m.header.is_standardized() {
            DenseColumns::new(n, p, m.data)?
        } else {
            DenseColumns::standardized(AmbientSpace::new(n)?, p, &m.data)?
        };
        run_on(&x, &y, params)?
    };
    let cal = &result.calibration;
    let t = cal.t_star.unwrap_or(config.t_max);
    let phi = (0..result.table.p())
        .filter(|&j| result.table.count(j, t) > 0)
        .map(|j| (j, result.table.phi(j, t)))
        .collect();
    Ok(SelectOutput {
        manifest: RunManifest::new("select", params.seed, params, stamp)?,
        selected: cal.selected.clone(),
        v_star: cal.v_star,
        t_star: cal.t_star,
        fdp_estimate: cal.fdp_estimate,
        feasible: cal.feasible,
        l: config.l,
        phi,
        exhausted_experiments: result.records.iter().filter(|r| r.exhausted).count(),
    })
}

/// Runs `select` and writes the JSON document to `out`.
pub fn select_to_file(params: &SelectParams, out: &Path, stamp: bool) -> Result<SelectOutput, CliError> {
    let output = select(params, stamp)?;
    write_json(out, &output)?;
    Ok(output)
}
