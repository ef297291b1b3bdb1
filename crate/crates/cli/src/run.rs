//! Subcommand implementations.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use log::{info, warn};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use stabfield::analysis::pearson;
use stabfield::code::ModelSpec;
use stabfield::linalg::eigh;
use stabfield::oracle::{
    cluster2_eigs, cluster2_ground, cluster2_hamiltonian, cluster2_squared_levels, exact_propagate, surface2_eigs,
    surface2_ground, TwoQubitFields,
};
use stabfield::output::{write_defects, write_sweep, write_traces};
use stabfield::{
    builtin, defect_sweep, delta_sweep_windows, fit_nmax, run_ensemble, threshold_delta, Evolver, EvolutionConfig,
    FieldSample, LinearFit, MaskPolicy, PauliString, StabilizerModel, StateVector,
};

use crate::config::{ExperimentConfig, DEFECT_DELTA};
use crate::error::CliError;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn print_json(value: &Value) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn write_manifest(dir: &Path, command: &str, config: &ExperimentConfig, files: &[String]) -> Result<(), CliError> {
    let mut stored = config.clone();
    stored.out = None;
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": config.hash(),
        "seed": config.seed,
        "config": stored,
        "files": files,
    });
    write_json(dir, "manifest.json", &manifest)
}

/// Noise for commands whose field scale comes from the δ grid: only
/// `n_samples` may be set.
fn sweep_template(config: &ExperimentConfig) -> Result<stabfield::NoiseParams, CliError> {
    if let Some(n) = &config.noise {
        if n.delta.is_some() || n.g_ave.is_some() || n.h_ave.is_some() || n.wx_ave.is_some() || n.wz_ave.is_some() {
            return Err(CliError::Config(
                "noise: the field scale comes from analysis.delta_grid; only n_samples may be given".into(),
            ));
        }
    }
    config.noise(Some(0.0))
}

pub fn trace(config: &ExperimentConfig) -> Result<(), CliError> {
    let out = config.out_dir()?;
    let model = config.model()?;
    let params = config.noise(None)?;
    let evo = config.evolution()?;
    info!("trace: {} with {} samples", model.name(), params.n_samples);
    let traces = run_ensemble(&model, &params, &MaskPolicy::All, &evo)?;
    for t in &traces {
        info!("sample {}: min F = {:.6}", t.sample_index, t.min_fidelity());
    }
    let mut w = create(out, "trace.csv")?;
    write_traces(&mut w, &traces)?;
    write_manifest(out, "trace", config, &["trace.csv".into()])
}

fn threshold_json(window: &str, level: f64, sweep: &[stabfield::SweepPoint]) -> Value {
    match threshold_delta(sweep, level) {
        Ok(t) => json!({ "window": window, "threshold": t }),
        Err(e) => {
            warn!("window {window}: {e}");
            json!({ "window": window, "level": level, "diagnostic": e.to_string() })
        }
    }
}

pub fn sweep(config: &ExperimentConfig) -> Result<(), CliError> {
    let out = config.out_dir()?;
    let model = config.model()?;
    let template = sweep_template(config)?;
    let evo = config.evolution()?;
    let windows = config.windows()?;
    let grid = config.delta_grid()?;
    let level = config.threshold_level()?;
    info!("sweep: {} over {} values of delta", model.name(), grid.len());
    let sweeps = delta_sweep_windows(&model, &template, &grid, &windows, &evo)?;
    let mut files = Vec::new();
    for (w, sweep) in windows.iter().zip(&sweeps) {
        let csv = format!("sweep_{}.csv", w.name);
        write_sweep(create(out, &csv)?, sweep)?;
        let js = format!("threshold_{}.json", w.name);
        write_json(out, &js, &threshold_json(&w.name, level, sweep))?;
        files.extend([csv, js]);
    }
    write_manifest(out, "sweep", config, &files)
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn family(config: &ExperimentConfig) -> Result<&'static str, CliError> {
    let kinds: BTreeSet<&'static str> = config
        .models
        .iter()
        .flatten()
        .filter_map(|m| match m {
            crate::config::ModelRef::Inline(ModelSpec::Cluster { .. }) => Some("cluster"),
            crate::config::ModelRef::Inline(ModelSpec::Surface { .. }) => Some("surface"),
            crate::config::ModelRef::Name(_) => None,
        })
        .collect();
    match kinds.len() {
        1 => Ok(kinds.into_iter().next().unwrap()),
        0 => Err(CliError::Config("models: required for scaling".into())),
        _ => Err(CliError::Config("models: mixes cluster and surface models; fit one family at a time".into())),
    }
}

#[derive(Serialize)]
struct ScalingEntry {
    model: String,
    n_qubits: usize,
    #[serde(flatten)]
    result: Value,
}

#[derive(Serialize)]
struct ScalingFit {
    family: &'static str,
    window: String,
    level: f64,
    #[serde(flatten)]
    fit: LinearFit,
    n_max: Option<f64>,
    thresholds: Vec<ScalingEntry>,
}

pub fn scaling(config: &ExperimentConfig) -> Result<(), CliError> {
    let out = config.out_dir()?;
    let family = family(config)?;
    let models = config.models()?;
    let distinct: BTreeSet<usize> = models.iter().map(|m| m.n_qubits()).collect();
    if distinct.len() < 2 {
        return Err(CliError::Config("models: need at least two different qubit counts".into()));
    }
    let names: Vec<String> = models.iter().map(|m| file_safe(m.name())).collect();
    if names.iter().collect::<BTreeSet<_>>().len() != names.len() {
        return Err(CliError::Config("models: model names must be distinct".into()));
    }
    let template = sweep_template(config)?;
    let evo = config.evolution()?;
    let windows = config.windows()?;
    let grid = config.delta_grid()?;
    let level = config.threshold_level()?;

    let mut files = Vec::new();
    let mut per_model = Vec::new();
    for (model, name) in models.iter().zip(&names) {
        info!("scaling: sweeping {name}");
        let sweeps = delta_sweep_windows(model, &template, &grid, &windows, &evo)?;
        for (w, sweep) in windows.iter().zip(&sweeps) {
            let csv = format!("sweep_{name}_{}.csv", w.name);
            write_sweep(create(out, &csv)?, sweep)?;
            files.push(csv);
        }
        per_model.push(sweeps);
    }

    let mut failure = None;
    for (wi, w) in windows.iter().enumerate() {
        let mut points = Vec::new();
        let mut thresholds = Vec::new();
        for ((model, name), sweeps) in models.iter().zip(&names).zip(&per_model) {
            let result = match threshold_delta(&sweeps[wi], level) {
                Ok(t) => {
                    points.push((model.n_qubits() as f64, t.delta_star));
                    serde_json::to_value(t).expect("threshold serializes")
                }
                Err(e) => {
                    warn!("window {}: {name} excluded from the fit: {e}", w.name);
                    json!({ "diagnostic": e.to_string() })
                }
            };
            thresholds.push(ScalingEntry {
                model: name.clone(),
                n_qubits: model.n_qubits(),
                result,
            });
        }
        let js = format!("fit_{}.json", w.name);
        match fit_nmax(&points) {
            Ok(fit) => {
                info!("window {}: slope {:.5}, N_max {:?}", w.name, fit.slope, fit.x_intercept);
                let record = ScalingFit {
                    family,
                    window: w.name.clone(),
                    level,
                    n_max: fit.x_intercept,
                    fit,
                    thresholds,
                };
                write_json(out, &js, &record)?;
            }
            Err(e) => {
                let record = json!({
                    "family": family,
                    "window": w.name,
                    "level": level,
                    "diagnostic": format!("fewer than two usable thresholds: {e}"),
                    "thresholds": thresholds,
                });
                write_json(out, &js, &record)?;
                failure.get_or_insert_with(|| format!("window {}: {e}", w.name));
            }
        }
        files.push(js);
    }
    write_manifest(out, "scaling", config, &files)?;
    match failure {
        Some(msg) => Err(CliError::Numeric(msg)),
        None => Ok(()),
    }
}

pub fn defects(config: &ExperimentConfig) -> Result<(), CliError> {
    let out = config.out_dir()?;
    let model = config.model()?;
    let params = config.noise(Some(DEFECT_DELTA))?;
    let evo = config.evolution()?;
    let windows = config.windows()?;
    let grid = config.defect_grid(model.n_qubits())?;
    let mut files = Vec::new();
    for w in &windows {
        info!("defects: {} window {}", model.name(), w.name);
        let points = defect_sweep(&model, &params, w, &grid, &evo)?;
        let xs: Vec<f64> = points.iter().map(|p| p.n_defect as f64).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.mean_infidelity).collect();
        let r = pearson(&xs, &ys);
        let csv = format!("defects_{}.csv", w.name);
        write_defects(create(out, &csv)?, &points)?;
        let js = format!("defects_{}.json", w.name);
        write_json(
            out,
            &js,
            &json!({ "window": w, "noise": params, "points": points, "pearson_r": r }),
        )?;
        files.extend([csv, js]);
    }
    write_manifest(out, "defects", config, &files)
}

fn load_model(name: &str) -> Result<StabilizerModel, CliError> {
    let path = Path::new(name);
    let spec = if path.is_file() {
        ModelSpec::load(path).map_err(|e| CliError::Config(format!("model: {e}")))?
    } else {
        builtin(name).map_err(|e| CliError::Config(format!("model: {e}")))?
    };
    spec.build().map_err(|e| CliError::Config(format!("model: {e}")))
}

pub fn spectrum(model: &str, out: Option<&Path>) -> Result<(), CliError> {
    let model = load_model(model)?;
    let levels = model.spectrum()?;
    let report = json!({
        "model": model.name(),
        "n_qubits": model.n_qubits(),
        "delta": model.delta(),
        "ground_energy": model.ground_energy(),
        "levels": levels,
    });
    print_json(&report)?;
    if let Some(dir) = out {
        write_json(dir, "spectrum.json", &report)?;
    }
    Ok(())
}

fn dense(model: &StabilizerModel, f: &TwoQubitFields) -> Result<DMatrix<Complex64>, CliError> {
    let mut h = model.hamiltonian();
    h.extend(&f.field_operator())?;
    Ok(h.to_dense()?)
}

fn fidelity(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    a.dotc(b).norm_sqr() / (a.norm_squared() * b.norm_squared())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Tolerance of the integrator check: RK4 at `dt = 1e-3` up to `t = 6`.
const RK4_TOL: f64 = 1e-8;

/// Compares every two-qubit closed form against dense diagonalization (to
/// `tol`), and the integrator against exact propagation, on `draws` random
/// field sets.
pub fn oracle_check(draws: usize, seed: u64, tol: f64) -> Result<(), CliError> {
    let cluster = load_model("cluster-2")?;
    let surface = load_model("surface-2")?;
    let phi0 = cluster.ground_state()?;
    let basis = [
        phi0.clone(),
        PauliString::z_on(2, &[1])?.apply(&phi0)?,
        PauliString::z_on(2, &[2])?.apply(&phi0)?,
        PauliString::z_on(2, &[1, 2])?.apply(&phi0)?,
    ];
    let u = DMatrix::from_fn(4, 4, |i, j| basis[j].amplitudes()[i]);
    let evolver = Evolver::new(&cluster)?;
    let evo = EvolutionConfig {
        dt: 1e-3,
        t_max: 6.0,
        alpha: 0.0,
        record_stride: 1000,
    };

    let names = [
        "cluster2_hamiltonian",
        "cluster2_eigs",
        "cluster2_squared_levels",
        "cluster2_ground",
        "surface2_eigs",
        "surface2_ground",
        "rk4_vs_exact_propagate",
    ];
    let mut worst = [0.0f64; 7];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..draws {
        let [h1, h2, g1, g2]: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
        let full = TwoQubitFields {
            h1,
            h2,
            g1,
            g2,
            delta: 1.0,
        };
        let h = dense(&cluster, &full)?;
        let rotated = u.adjoint() * &h * &u;
        worst[0] = worst[0].max((rotated - cluster2_hamiltonian(&full)).iter().map(|z| z.norm()).fold(0.0, f64::max));

        let sample = FieldSample {
            g: vec![g1, g2],
            h: vec![h1, h2],
            wx: vec![0.0; 2],
            wz: vec![0.0; 2],
        };
        let (_, end) = evolver.run(&sample, &evo, 0)?;
        let exact = exact_propagate(&h, &phi0, evo.t_max)?;
        worst[6] = worst[6].max(end.distance(&exact)?);

        let f = TwoQubitFields::z_only(h1, h2, 1.0);
        let hc = dense(&cluster, &f)?;
        let (values, vectors) = eigh(&hc)?;
        worst[1] = worst[1].max(max_diff(&values, &cluster2_eigs(&f)?));
        let mut squares: Vec<f64> = values.iter().map(|e| e * e).collect();
        squares.sort_by(f64::total_cmp);
        let sq = cluster2_squared_levels(&f);
        worst[2] = worst[2].max(max_diff(&[squares[0], squares[3]], &sq));
        let ground = &u * cluster2_ground(&f)?.normalized().to_vector();
        worst[3] = worst[3].max(1.0 - fidelity(&ground, &vectors.column(0).into_owned()));

        let hs = dense(&surface, &f)?;
        let (values, vectors) = eigh(&hs)?;
        worst[4] = worst[4].max(max_diff(&values, &surface2_eigs(&f)?));
        let s: StateVector = surface2_ground(&f)?.to_state();
        let v = DVector::from_column_slice(s.amplitudes());
        worst[5] = worst[5].max(1.0 - fidelity(&v, &vectors.column(0).into_owned()));
    }
    let tols = [tol, tol, tol, tol, tol, tol, RK4_TOL];
    let checks: Vec<Value> = names
        .iter()
        .zip(worst)
        .zip(tols)
        .map(|((name, e), t)| json!({ "check": name, "max_error": e, "tolerance": t, "pass": e <= t }))
        .collect();
    let pass = worst.iter().zip(tols).all(|(&e, t)| e <= t);
    let report = json!({ "draws": draws, "seed": seed, "tolerance": tol, "pass": pass, "checks": checks });
    print_json(&report)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Numeric("oracle check failed; see report".into()))
    }
}
