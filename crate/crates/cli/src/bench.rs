//! Memory and runtime benchmark of virtual against explicit dummies.

use std::path::Path;
use std::time::{Duration, Instant};

use serde::Serialize;
use vdselect_core::ambient::dot;
use vdselect_core::selectors::{ad_lars_run, LarsState, Step};
use vdselect_core::{AmbientSpace, ColumnProvider, DummyLaw, DummyPool, StoppingRule};
use vdselect_simlab::generate::{gen_law_dummies, gen_linear_model};

use crate::error::CliError;
use crate::manifest::{s, write_csv, write_json, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BenchMode {
    Vd,
    Ad,
}

impl BenchMode {
    pub fn name(&self) -> &'static str {
        match self {
            BenchMode::Vd => "vd",
            BenchMode::Ad => "ad",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchParams {
    pub n: usize,
    pub p: usize,
    pub l_factors: Vec<usize>,
    pub mode: BenchMode,
    pub t: usize,
    pub reps: usize,
    pub budget_bytes: u64,
    pub seed: u64,
}

/// Bytes of the explicit `n x L` float64 dummy block.
pub fn ad_preflight_bytes(n: usize, l: usize) -> u64 {
    8 * n as u64 * l as u64
}

/// Analytic virtual-dummy footprint: a `k x L` projection table plus `T`
/// realized columns of length `n`.
pub fn vd_estimate_bytes(n: usize, k: usize, l: usize, t: usize) -> u64 {
    8 * (k as u64 * l as u64 + n as u64 * t as u64)
}

/// Peak resident set size of the process, from `/proc/self/status`.
pub fn peak_rss_bytes() -> Option<u64> {
    let text = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = text.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunProbe {
    pub wall: Duration,
    /// Time spent on dummy projections, realizations and explicit dummy
    /// inner products.
    pub dummy_time: Duration,
    pub steps: usize,
    /// Revealed basis size `k` at the end of the run.
    pub basis_size: usize,
    /// Heap bytes of the dummy state (virtual) or of the dummy block
    /// (explicit).
    pub dummy_bytes: usize,
    /// Heap bytes of the revealed basis.
    pub basis_bytes: usize,
}

impl RunProbe {
    pub fn dummy_time_per_step(&self) -> Duration {
        self.dummy_time / self.steps.max(1) as u32
    }
}

/// One virtual-dummy LARS run up to the `t`-th dummy.
pub fn vd_probe<P: ColumnProvider>(x: &P, y: &[f64], l: usize, law: DummyLaw, t: usize, seed: u64) -> Result<RunProbe, CliError> {
    let space = AmbientSpace::new(x.n())?;
    let start = Instant::now();
    let mut st = LarsState::new(x, y, DummyPool::sampled(l, law, space, seed))?;
    let mut exhausted = false;
    while st.dummies_selected() < t {
        if let Step::Finished = st.step()? {
            exhausted = true;
            break;
        }
    }
    let wall = start.elapsed();
    let dummy_bytes = st.pool().state_bytes();
    let basis_size = st.basis().len();
    let basis_bytes = st.basis().heap_bytes();
    let path = st.finish(exhausted);
    Ok(RunProbe {
        wall,
        dummy_time: path.dummy_time,
        steps: path.events.len(),
        basis_size,
        dummy_bytes,
        basis_bytes,
    })
}

/// One explicit LARS run on `(X D)` up to the `t`-th dummy. The block is
/// generated before the clock starts.
pub fn ad_probe<P: ColumnProvider>(x: &P, y: &[f64], l: usize, law: DummyLaw, t: usize, seed: u64) -> Result<RunProbe, CliError> {
    let d = gen_law_dummies(x.n(), l, law, seed)?;
    let start = Instant::now();
    let path = ad_lars_run(x, y, &d, StoppingRule::DummyCount(t))?;
    let wall = start.elapsed();
    let basis_size = path.events.last().map_or(1, |e| e.basis_size_after);
    Ok(RunProbe {
        wall,
        dummy_time: path.dummy_time,
        steps: path.events.len(),
        basis_size,
        dummy_bytes: d.capacity() * 8,
        basis_bytes: basis_size * x.n() * 8,
    })
}

/// Time of one explicit dummy sweep, the inner products of a residual with
/// all `l` dummy columns, measured on a reusable block of `chunk` columns so
/// the full `n x L` block is never held.
pub fn ad_sweep_time(n: usize, l: usize, chunk: usize, seed: u64) -> Result<Duration, CliError> {
    let chunk = chunk.clamp(1, l.max(1));
    let block = gen_law_dummies(n, chunk, DummyLaw::Spherical, seed)?;
    let r = gen_law_dummies(n, 1, DummyLaw::Spherical, seed ^ 0x5eed)?;
    let mut scores = vec![0.0; chunk];
    let start = Instant::now();
    let mut done = 0;
    while done < l {
        let take = chunk.min(l - done);
        for (s, col) in scores.iter_mut().zip(block.chunks_exact(n)).take(take) {
            *s = dot(col, &r);
        }
        std::hint::black_box(&scores);
        done += take;
    }
    Ok(start.elapsed())
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord {
    pub mode: BenchMode,
    pub n: usize,
    pub p: usize,
    pub l: usize,
    pub median_ms: f64,
    pub dummy_ms_per_step: f64,
    pub dummy_bytes: usize,
    pub vd_estimate_bytes: Option<u64>,
    pub peak_bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
struct BenchDocument<'a> {
    manifest: RunManifest,
    /// `peak_rss` when read from the operating system, `peak_alloc`
    /// when reconstructed from the engine's own allocation accounting.
    peak_source: &'static str,
    records: &'a [BenchRecord],
}

fn median_ms(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Runs the benchmark grid. Explicit runs whose dummy block exceeds the
/// budget are refused before anything is allocated.
pub fn bench(params: &BenchParams) -> Result<(Vec<BenchRecord>, &'static str), CliError> {
    if params.reps == 0 || params.t == 0 || params.l_factors.is_empty() {
        return Err(CliError::Usage("bench needs reps >= 1, t >= 1 and at least one L-factor".into()));
    }
    if let Some(&lf) = params.l_factors.iter().find(|&&lf| lf * params.p < params.t) {
        return Err(CliError::Usage(format!("L-factor {lf} gives fewer than t = {} dummies", params.t)));
    }
    if params.mode == BenchMode::Ad {
        for &lf in &params.l_factors {
            let estimate = ad_preflight_bytes(params.n, lf * params.p);
            if estimate > params.budget_bytes {
                return Err(CliError::MemoryBudgetExceeded {
                    estimate,
                    budget: params.budget_bytes,
                });
            }
        }
    }
    let model = gen_linear_model(params.n, params.p, params.s(), 1.0, params.seed)?;
    let design_bytes = model.x.as_slice().len() * 8;
    let mut records = Vec::new();
    let mut from_os = true;
    for &lf in &params.l_factors {
        let l = lf * params.p;
        let mut walls = Vec::new();
        let mut per_step = Vec::new();
        let mut last = None;
        for rep in 0..params.reps {
            let seed = params.seed.wrapping_add(1 + rep as u64);
            let probe = match params.mode {
                BenchMode::Vd => vd_probe(&model.x, &model.y, l, DummyLaw::Spherical, params.t, seed)?,
                BenchMode::Ad => ad_probe(&model.x, &model.y, l, DummyLaw::Spherical, params.t, seed)?,
            };
            walls.push(ms(probe.wall));
            per_step.push(ms(probe.dummy_time_per_step()));
            last = Some(probe);
        }
        let probe = last.expect("reps >= 1");
        let accounted = (design_bytes + probe.dummy_bytes + probe.basis_bytes) as u64;
        let peak = match peak_rss_bytes() {
            Some(b) => b,
            None => {
                from_os = false;
                accounted
            }
        };
        records.push(BenchRecord {
            mode: params.mode,
            n: params.n,
            p: params.p,
            l,
            median_ms: median_ms(walls),
            dummy_ms_per_step: median_ms(per_step),
            dummy_bytes: probe.dummy_bytes,
            vd_estimate_bytes: (params.mode == BenchMode::Vd)
                .then(|| vd_estimate_bytes(params.n, probe.basis_size, l, params.t)),
            peak_bytes: peak,
        });
    }
    Ok((records, if from_os { "peak_rss" } else { "peak_alloc" }))
}

impl BenchParams {
    fn s(&self) -> usize {
        self.p.min(10)
    }
}

/// Runs the grid and writes the CSV plus a `.json` sidecar holding the
/// manifest and per-step dummy timings.
pub fn bench_to_file(params: &BenchParams, out: &Path, stamp: bool) -> Result<Vec<BenchRecord>, CliError> {
    let (records, source) = bench(params)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let header = format!("mode,n,p,L,median_ms,{source}_bytes");
    write_csv(out, &header, &records, |r| {
        vec![s(r.mode.name()), s(r.n), s(r.p), s(r.l), format!("{:.3}", r.median_ms), s(r.peak_bytes)]
    })?;
    let doc = BenchDocument {
        manifest: RunManifest::new("bench", params.seed, params, stamp)?,
        peak_source: source,
        records: &records,
    };
    write_json(&out.with_extension("json"), &doc)?;
    Ok(records)
}
