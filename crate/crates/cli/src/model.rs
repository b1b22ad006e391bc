//! Writes a synthetic instance as VDMX design, response column and truth.

use std::path::Path;

use serde::Serialize;
use vdselect_simlab::generate::gen_linear_model;

use crate::error::CliError;
use crate::manifest::{write_csv, write_json, RunManifest, SNR_CONVENTION};
use crate::matrix::{matrix_write, FLAG_STANDARDIZED};

#[derive(Debug, Clone, Serialize)]
pub struct ModelParams {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub snr: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
struct Truth<'a> {
    manifest: RunManifest,
    active: &'a [usize],
    beta: &'a [f64],
    sigma: f64,
    snr_convention: &'static str,
}

/// Writes `x.vdmx`, `y.csv` and `truth.json` into `dir`.
pub fn gen_model(params: &ModelParams, dir: &Path, stamp: bool) -> Result<Vec<std::path::PathBuf>, CliError> {
    let m = gen_linear_model(params.n, params.p, params.s, params.snr, params.seed)?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let x_path = dir.join("x.vdmx");
    matrix_write(&x_path, params.n, params.p, m.x.as_slice(), FLAG_STANDARDIZED)?;
    let y_path = dir.join("y.csv");
    write_csv(&y_path, "y", m.y.iter(), |v| vec![v.to_string()])?;
    let truth_path = dir.join("truth.json");
    write_json(
        &truth_path,
        &Truth {
            manifest: RunManifest::new("gen-model", params.seed, params, stamp)?,
            active: &m.active,
            beta: &m.beta,
            sigma: m.sigma,
            snr_convention: SNR_CONVENTION,
        },
    )?;
    Ok(vec![x_path, y_path, truth_path])
}
