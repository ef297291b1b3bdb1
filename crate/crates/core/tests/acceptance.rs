//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPoolBuilder;
use stabfield::analysis::pearson;
use stabfield::linalg::{eigh, eigvalsh};
use stabfield::oracle::{
    cluster2_eigs, cluster2_ground, cluster2_hamiltonian, cluster2_squared_levels, exact_propagate, surface2_eigs,
    surface2_ground, TwoQubitFields,
};
use stabfield::output::{write_defects, write_sweep, write_traces};
use stabfield::{
    builtin, code::BUILTIN_MODELS, defect_sweep, delta_sweep, fit_nmax, run_ensemble, sample_fields, time_average,
    DefectMask, EvolutionConfig, Evolver, MaskPolicy, NoiseParams, OperatorSum, PauliString, StabilizerModel,
    StateVector, Window,
};

const SEED: u64 = 1;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn model(name: &str) -> Result<StabilizerModel, String> {
    builtin(name).and_then(|s| s.build()).map_err(|e| e.to_string())
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Groups sorted eigenvalues by their nearest integer and fails if any is
/// further than `tol` from it.
fn integer_levels(values: &[f64], tol: f64) -> Result<Vec<(i64, usize)>, String> {
    let mut levels: Vec<(i64, usize)> = Vec::new();
    for &v in values {
        let k = v.round();
        if (v - k).abs() > tol {
            return Err(format!("eigenvalue {v} is not an integer multiple of the gap"));
        }
        match levels.last_mut() {
            Some((e, m)) if *e == k as i64 => *m += 1,
            _ => levels.push((k as i64, 1)),
        }
    }
    Ok(levels)
}

fn spectra() -> Outcome {
    let mut notes = Vec::new();
    for n in [2usize, 4, 6, 8, 9] {
        let m = model(&format!("cluster-{n}"))?;
        let h = m.hamiltonian().to_dense().map_err(|e| e.to_string())?;
        let ev = eigvalsh(&h).map_err(|e| e.to_string())?;
        let got = integer_levels(&ev, 1e-8)?;
        let want: Vec<(i64, usize)> = (0..=n).map(|k| (-(n as i64 - 2 * k as i64), binomial(n, k))).collect();
        if got != want {
            return Ok((false, format!("cluster N={n}: {got:?} != {want:?}")));
        }
        notes.push(format!("N={n}"));
    }
    let m = model("surface-5")?;
    let ev = eigvalsh(&m.hamiltonian().to_dense().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let got = integer_levels(&ev, 1e-8)?;
    let want = vec![(-4, 2), (-2, 8), (0, 12), (2, 8), (4, 2)];
    let ok = got == want;
    Ok((ok, format!("cluster {} exact; surface N=5 levels {got:?}", notes.join(","))))
}

fn ground_states() -> Outcome {
    let mut worst = 0.0f64;
    for name in BUILTIN_MODELS {
        let m = model(name)?;
        let psi = m.ground_state().map_err(|e| e.to_string())?;
        for k in m.generators() {
            let kpsi = k.apply(&psi).map_err(|e| e.to_string())?;
            worst = worst.max(kpsi.distance(&psi).map_err(|e| e.to_string())?);
        }
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // (|0>|+> + |1>|->)/sqrt2 and (|01> - |10>)/sqrt2, basis order 00,01,10,11.
    let cluster = StateVector::from_amplitudes(2, vec![c(0.5), c(0.5), c(0.5), c(-0.5)]).unwrap();
    let singlet = StateVector::from_amplitudes(2, vec![c(0.0), c(s), c(-s), c(0.0)]).unwrap();
    let oc = model("cluster-2")?.ground_state().unwrap().overlap_sqr(&cluster).unwrap();
    let os = model("surface-2")?.ground_state().unwrap().overlap_sqr(&singlet).unwrap();
    let ok = worst <= 1e-10 && oc >= 1.0 - 1e-12 && os >= 1.0 - 1e-12;
    Ok((
        ok,
        format!("max |K psi - psi| = {worst:.2e}; N=2 overlaps cluster 1-{:.1e}, surface 1-{:.1e}", 1.0 - oc, 1.0 - os),
    ))
}

fn dense_with_fields(m: &StabilizerModel, f: &TwoQubitFields) -> DMatrix<Complex64> {
    let mut h = m.hamiltonian();
    h.extend(&f.field_operator()).unwrap();
    h.to_dense().unwrap()
}

fn ground_vector(h: &DMatrix<Complex64>) -> DVector<Complex64> {
    let (_, vecs) = eigh(h).unwrap();
    vecs.column(0).into_owned()
}

fn overlap_sqr(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    a.dotc(b).norm_sqr() / (a.norm_squared() * b.norm_squared())
}

fn oracle_agreement() -> Outcome {
    let cl = model("cluster-2")?;
    let su = model("surface-2")?;
    let phi0 = cl.ground_state().unwrap();
    let z = |q| PauliString::z_on(2, &[q]).unwrap();
    let basis: Vec<StateVector> = vec![
        phi0.clone(),
        z(1).apply(&phi0).unwrap(),
        z(2).apply(&phi0).unwrap(),
        PauliString::z_on(2, &[1, 2]).unwrap().apply(&phi0).unwrap(),
    ];
    let u = DMatrix::from_fn(4, 4, |i, j| basis[j].amplitudes()[i]);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut err = [0.0f64; 6];
    for _ in 0..100 {
        let (h1, h2, g1, g2) = (
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        );
        let full = TwoQubitFields {
            h1,
            h2,
            g1,
            g2,
            delta: 1.0,
        };
        let rotated = u.adjoint() * dense_with_fields(&cl, &full) * &u;
        err[0] = err[0].max((rotated - cluster2_hamiltonian(&full)).iter().map(|z| z.norm()).fold(0.0, f64::max));

        let f = TwoQubitFields::z_only(h1, h2, 1.0);
        let hc = dense_with_fields(&cl, &f);
        let dense = eigvalsh(&hc).unwrap();
        let closed = cluster2_eigs(&f).unwrap();
        err[1] = err[1].max(dense.iter().zip(closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let sq = cluster2_squared_levels(&f);
        let mut e2: Vec<f64> = dense.iter().map(|e| e * e).collect();
        e2.sort_by(f64::total_cmp);
        err[2] = err[2].max((e2[0] - sq[0]).abs().max((e2[3] - sq[1]).abs()));
        let coeffs = cluster2_ground(&f).unwrap().normalized().to_vector();
        err[3] = err[3].max(1.0 - overlap_sqr(&(&u * coeffs), &ground_vector(&hc)));

        let hs = dense_with_fields(&su, &f);
        let dense = eigvalsh(&hs).unwrap();
        let closed = surface2_eigs(&f).unwrap();
        err[4] = err[4].max(dense.iter().zip(closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let s = surface2_ground(&f).unwrap().to_state();
        let v = DVector::from_column_slice(s.amplitudes());
        err[5] = err[5].max(1.0 - overlap_sqr(&v, &ground_vector(&hs)));
    }
    let ok = err.iter().all(|&e| e <= 1e-10);
    Ok((
        ok,
        format!(
            "100 draws: cluster matrix {:.1e}, eigs {:.1e}, E^2 {:.1e}, ground {:.1e}; surface eigs {:.1e}, ground {:.1e}",
            err[0], err[1], err[2], err[3], err[4], err[5]
        ),
    ))
}

fn static_instance() -> Result<(StabilizerModel, stabfield::FieldSample, DMatrix<Complex64>), String> {
    let m = model("cluster-4")?;
    let params = NoiseParams::static_fields(0.5, 1, SEED);
    let sample = sample_fields(&params, &DefectMask::all(4), 0).map_err(|e| e.to_string())?;
    let mut h: OperatorSum = m.hamiltonian();
    h.extend(&sample.field_hamiltonian(0.0).unwrap()).unwrap();
    let dense = h.to_dense().unwrap();
    Ok((m, sample, dense))
}

fn rk4_error(ev: &Evolver, sample: &stabfield::FieldSample, exact: &StateVector, dt: f64) -> Result<f64, String> {
    let config = EvolutionConfig {
        dt,
        t_max: 6.0,
        alpha: 0.0,
        record_stride: 1000,
    };
    let (_, psi) = ev.run(sample, &config, 0).map_err(|e| e.to_string())?;
    psi.distance(exact).map_err(|e| e.to_string())
}

fn integrator() -> Outcome {
    let (m, sample, dense) = static_instance()?;
    let ev = Evolver::new(&m).map_err(|e| e.to_string())?;
    let exact = exact_propagate(&dense, ev.ground_state(), 6.0).map_err(|e| e.to_string())?;
    let err = rk4_error(&ev, &sample, &exact, 1e-3)?;
    let coarse = rk4_error(&ev, &sample, &exact, 0.02)?;
    let fine = rk4_error(&ev, &sample, &exact, 0.01)?;
    let ratio = coarse / fine;

    let noisy = NoiseParams::from_delta(0.1, 1, SEED);
    let s = sample_fields(&noisy, &DefectMask::all(4), 0).unwrap();
    let trace = ev.trace(&s, &EvolutionConfig::default(), 0).map_err(|e| e.to_string())?;
    let drift = trace.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);

    let ok = err <= 1e-8 && (12.0..=20.0).contains(&ratio) && drift <= 1e-8;
    Ok((
        ok,
        format!("N=4 t=6 dt=1e-3 error {err:.2e}; order ratio {ratio:.2}; norm drift {drift:.2e}"),
    ))
}

fn dissipation() -> Outcome {
    let mut worst = 0.0f64;
    for name in ["cluster-4", "surface-5"] {
        let m = model(name)?;
        let ev = Evolver::new(&m).unwrap();
        let params = NoiseParams::from_delta(0.1, 1, SEED);
        let s = sample_fields(&params, &DefectMask::all(m.n_qubits()), 0).unwrap();
        let base = ev.trace(&s, &EvolutionConfig::default(), 0).map_err(|e| e.to_string())?;
        for alpha in [0.05, 0.1, 0.2] {
            let config = EvolutionConfig {
                alpha,
                ..EvolutionConfig::default()
            };
            let damped = ev.trace(&s, &config, 0).map_err(|e| e.to_string())?;
            for i in 0..base.len() {
                let want = (-2.0 * alpha * base.times[i]).exp() * base.fidelity[i];
                worst = worst.max((damped.fidelity[i] - want).abs());
            }
        }
    }
    Ok((worst <= 1e-9, format!("max |F_a - exp(-2 a t) F_0| = {worst:.2e}")))
}

fn small_noise() -> Outcome {
    let short = Window::short();
    let config = EvolutionConfig {
        t_max: 2.0,
        ..EvolutionConfig::default()
    };
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["cluster-4", "surface-5"] {
        let m = model(name)?;
        for (kind, params) in [
            ("static", NoiseParams::static_fields(0.1, 10, SEED)),
            ("oscillating", NoiseParams::from_delta(0.1, 10, SEED)),
        ] {
            let traces = run_ensemble(&m, &params, &MaskPolicy::All, &config).map_err(|e| e.to_string())?;
            let avgs: Vec<f64> = traces.iter().map(|t| time_average(t, &short).unwrap()).collect();
            let min = avgs.iter().copied().fold(f64::INFINITY, f64::min);
            let below = avgs.iter().filter(|&&a| a < 0.98).count();
            ok &= below == 0;
            notes.push(format!("{name} {kind} min {min:.4} ({below}/10 below)"));
        }
    }
    Ok((ok, notes.join("; ")))
}

fn large_noise() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in BUILTIN_MODELS {
        let m = model(name)?;
        let params = NoiseParams::from_delta(1.0, 10, SEED);
        let traces =
            run_ensemble(&m, &params, &MaskPolicy::All, &EvolutionConfig::default()).map_err(|e| e.to_string())?;
        let min = traces.iter().map(|t| t.min_fidelity()).fold(f64::INFINITY, f64::min);
        ok &= min < 0.8;
        notes.push(format!("{name} {min:.3}"));
    }
    Ok((ok, format!("min F over 10 samples: {}", notes.join(", "))))
}

fn sig3(x: f64) -> f64 {
    let scale = 10f64.powi(2 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

fn fit_arithmetic() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (label, slope, intercept, expected) in [
        ("cluster short", -0.0061, 0.1676, 27.46),
        ("surface short", -0.0049, 0.1405, 28.67),
        ("surface long", -0.005, 0.1535, 30.70),
    ] {
        let points: Vec<(f64, f64)> = [2.0, 4.0, 5.0, 6.0, 8.0, 9.0].map(|n| (n, slope * n + intercept)).to_vec();
        let fit = fit_nmax(&points).map_err(|e| e.to_string())?;
        let nmax = fit.x_intercept.ok_or("no x intercept")?;
        ok &= sig3(nmax) == sig3(expected);
        notes.push(format!("{label} {nmax:.3}"));
    }
    Ok((ok, format!("N_max {}", notes.join(", "))))
}

fn defect_linearity() -> Outcome {
    let m = model("surface-8")?;
    let params = NoiseParams::from_delta(0.5, 10, SEED);
    let grid = [0usize, 2, 4, 6, 8];
    let points =
        defect_sweep(&m, &params, &Window::short(), &grid, &EvolutionConfig::default()).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = points.iter().map(|p| p.n_defect as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_infidelity).collect();
    let r = pearson(&xs, &ys).ok_or("constant infidelity")?;
    let zero = points[0].mean_infidelity.abs();
    Ok((
        r >= 0.9 && zero <= 1e-10,
        format!("N=8 surface, window [0,2]: r = {r:.4}, infidelity at 0 = {zero:.1e}, means {ys:.4?}"),
    ))
}

fn csv_bytes(threads: usize) -> Result<Vec<u8>, String> {
    let pool = ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
    pool.install(|| {
        let m = model("cluster-4")?;
        let config = EvolutionConfig {
            t_max: 2.0,
            ..EvolutionConfig::default()
        };
        let mut out = Vec::new();
        let params = NoiseParams::from_delta(0.1, 10, SEED);
        let traces = run_ensemble(&m, &params, &MaskPolicy::All, &config).map_err(|e| e.to_string())?;
        write_traces(&mut out, &traces).unwrap();
        let sweep = delta_sweep(&m, &params, &[0.05, 0.1, 0.2], &Window::short(), &config).map_err(|e| e.to_string())?;
        write_sweep(&mut out, &sweep).unwrap();
        let defects = defect_sweep(&m, &params, &Window::short(), &[0, 2, 4], &config).map_err(|e| e.to_string())?;
        write_defects(&mut out, &defects).unwrap();
        Ok(out)
    })
}

fn determinism() -> Outcome {
    let a = csv_bytes(1)?;
    let b = csv_bytes(1)?;
    let c4 = csv_bytes(4)?;
    Ok((
        a == b && a == c4,
        format!("{} bytes of trace, sweep and defect CSV; repeat and 1 vs 4 threads identical", a.len()),
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("spectra", spectra),
        ("ground states", ground_states),
        ("oracle agreement", oracle_agreement),
        ("integrator", integrator),
        ("dissipation", dissipation),
        ("small-noise stability", small_noise),
        ("large-noise degradation", large_noise),
        ("fit arithmetic", fit_arithmetic),
        ("defect linearity", defect_linearity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
