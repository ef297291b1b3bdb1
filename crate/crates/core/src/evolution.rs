//! Fixed-step RK4 integration of `i d|psi>/dt = H(t)|psi>` (hbar = 1) and
//! fidelity traces against the ideal reference evolution.
//!
//! Dissipation enters as the global optical potential `-i * alpha * I`, so a
//! state decays as `exp(-alpha t)` and the fidelity, computed against the
//! unnormalized state, as `exp(-2 alpha t)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::code::StabilizerModel;
use crate::error::{Error, Result};
use crate::noise::FieldSample;
use crate::pauli::{apply_masks_add, OperatorSum};
use crate::state::{qubit_mask, StateVector};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A possibly time-dependent, possibly non-Hermitian generator.
pub trait TimeDependent {
    fn n_qubits(&self) -> usize;

    /// Overwrites `out` with `H(t) psi`.
    fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]);
}

impl TimeDependent for OperatorSum {
    fn n_qubits(&self) -> usize {
        OperatorSum::n_qubits(self)
    }

    fn apply(&self, _t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        self.apply_add(Complex64::new(1.0, 0.0), psi, out);
    }
}

/// `H0 + H1(t) - i alpha I`.
#[derive(Debug, Clone)]
pub struct NoisyHamiltonian<'a> {
    h0: &'a OperatorSum,
    fields: &'a FieldSample,
    alpha: f64,
    x_masks: Vec<u64>,
    z_masks: Vec<u64>,
}

impl<'a> NoisyHamiltonian<'a> {
    pub fn new(h0: &'a OperatorSum, fields: &'a FieldSample, alpha: f64) -> Result<Self> {
        let n = h0.n_qubits();
        if fields.n_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: fields.n_qubits(),
            });
        }
        let masks: Vec<u64> = (1..=n).map(|q| qubit_mask(n, q)).collect();
        Ok(Self {
            h0,
            fields,
            alpha,
            x_masks: masks.clone(),
            z_masks: masks,
        })
    }
}

impl TimeDependent for NoisyHamiltonian<'_> {
    fn n_qubits(&self) -> usize {
        self.h0.n_qubits()
    }

    fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        let one = Complex64::new(1.0, 0.0);
        self.h0.apply_add(one, psi, out);
        for i in 0..self.fields.n_qubits() {
            let (gx, hz) = self.fields.coefficients_at(i, t);
            if self.fields.g[i] != 0.0 {
                apply_masks_add(self.x_masks[i], 0, Complex64::new(gx, 0.0), psi, out);
            }
            if self.fields.h[i] != 0.0 {
                apply_masks_add(0, self.z_masks[i], Complex64::new(hz, 0.0), psi, out);
            }
        }
        if self.alpha != 0.0 {
            let c = -I * self.alpha;
            out.iter_mut().zip(psi).for_each(|(o, &a)| *o += c * a);
        }
    }
}

/// Scratch buffers for repeated steps on one register size.
#[derive(Debug, Clone)]
pub struct Rk4Workspace {
    k: Vec<Complex64>,
    stage: Vec<Complex64>,
    acc: Vec<Complex64>,
}

impl Rk4Workspace {
    pub fn new(dim: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            k: vec![zero; dim],
            stage: vec![zero; dim],
            acc: vec![zero; dim],
        }
    }

    /// Advances `psi` in place from `t` to `t + dt`, evaluating `H` at
    /// `t`, `t + dt/2` and `t + dt`.
    pub fn step<H: TimeDependent + ?Sized>(&mut self, h: &H, psi: &mut [Complex64], t: f64, dt: f64) {
        let Self { k, stage, acc } = self;
        let half = 0.5 * dt;
        let mi = -I;

        // k1
        h.apply(t, psi, k);
        for ((a, s), (&p, &kv)) in acc.iter_mut().zip(stage.iter_mut()).zip(psi.iter().zip(k.iter())) {
            let kv = mi * kv;
            *a = kv;
            *s = p + half * kv;
        }
        // k2
        h.apply(t + half, stage, k);
        for ((a, s), (&p, &kv)) in acc.iter_mut().zip(stage.iter_mut()).zip(psi.iter().zip(k.iter())) {
            let kv = mi * kv;
            *a += 2.0 * kv;
            *s = p + half * kv;
        }
        // k3
        h.apply(t + half, stage, k);
        for ((a, s), (&p, &kv)) in acc.iter_mut().zip(stage.iter_mut()).zip(psi.iter().zip(k.iter())) {
            let kv = mi * kv;
            *a += 2.0 * kv;
            *s = p + dt * kv;
        }
        // k4
        h.apply(t + dt, stage, k);
        let sixth = dt / 6.0;
        for ((p, &a), &kv) in psi.iter_mut().zip(acc.iter()).zip(k.iter()) {
            *p += sixth * (a + mi * kv);
        }
    }
}

/// One classical RK4 step of `psi' = -i H(t) psi`.
pub fn rk4_step<H: TimeDependent + ?Sized>(h: &H, psi: &StateVector, t: f64, dt: f64) -> Result<StateVector> {
    psi.check_qubits(h.n_qubits())?;
    let mut out = psi.clone();
    Rk4Workspace::new(psi.dim()).step(h, out.amplitudes_mut(), t, dt);
    if !out.is_finite() {
        return Err(Error::NonFinite { t: t + dt });
    }
    Ok(out)
}

/// Integrates from `t = 0` to `n_steps * dt`, calling `observe(step, t, psi)`
/// at step 0 and after every step.
pub fn integrate<H, F>(h: &H, psi: &mut StateVector, dt: f64, n_steps: usize, mut observe: F) -> Result<()>
where
    H: TimeDependent + ?Sized,
    F: FnMut(usize, f64, &StateVector) -> Result<()>,
{
    psi.check_qubits(h.n_qubits())?;
    let mut ws = Rk4Workspace::new(psi.dim());
    observe(0, 0.0, psi)?;
    for k in 0..n_steps {
        let t = k as f64 * dt;
        ws.step(h, psi.amplitudes_mut(), t, dt);
        observe(k + 1, (k + 1) as f64 * dt, psi)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    #[serde(default = "defaults::dt")]
    pub dt: f64,
    #[serde(default = "defaults::t_max")]
    pub t_max: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "defaults::record_stride")]
    pub record_stride: usize,
}

mod defaults {
    pub fn dt() -> f64 {
        1e-3
    }
    pub fn t_max() -> f64 {
        6.0
    }
    pub fn record_stride() -> usize {
        10
    }
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            dt: defaults::dt(),
            t_max: defaults::t_max(),
            alpha: 0.0,
            record_stride: defaults::record_stride(),
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max >= self.dt) {
            return Err(Error::InvalidParameter(format!(
                "t_max must be at least dt, got {}",
                self.t_max
            )));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

/// Fidelity and norm on the recorded time grid of one noise sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityTrace {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub norm: Vec<f64>,
    pub sample_index: usize,
}

impl FidelityTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn min_fidelity(&self) -> f64 {
        self.fidelity.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `exp(-i E0 t) |Phi0>`.
pub fn reference_state(model: &StabilizerModel, t: f64) -> Result<StateVector> {
    let mut psi = model.ground_state()?;
    psi.scale(Complex64::from_polar(1.0, -model.ground_energy() * t));
    Ok(psi)
}

/// The reference state obtained by integrating `H0` alone; a cross-check
/// for [`reference_state`].
pub fn reference_state_numeric(model: &StabilizerModel, t: f64, dt: f64) -> Result<StateVector> {
    let h0 = model.hamiltonian();
    let mut psi = model.ground_state()?;
    let n_steps = (t / dt).round() as usize;
    let dt = if n_steps == 0 { 0.0 } else { t / n_steps as f64 };
    integrate(&h0, &mut psi, dt, n_steps, |_, _, _| Ok(()))?;
    Ok(psi)
}

/// Holds what is shared by every trace of one model.
#[derive(Debug, Clone)]
pub struct Evolver {
    h0: OperatorSum,
    ground: StateVector,
    ground_energy: f64,
}

impl Evolver {
    pub fn new(model: &StabilizerModel) -> Result<Self> {
        Ok(Self {
            h0: model.hamiltonian(),
            ground: model.ground_state()?,
            ground_energy: model.ground_energy(),
        })
    }

    pub fn ground_state(&self) -> &StateVector {
        &self.ground
    }

    /// Evolves `|Phi0>` under `H0 + H1(t) - i alpha` and records
    /// `F(t) = |<Phi0(t)|Phi(t)>|^2` and `||Phi(t)||`.
    pub fn trace(&self, sample: &FieldSample, config: &EvolutionConfig, sample_index: usize) -> Result<FidelityTrace> {
        self.run(sample, config, sample_index).map(|(trace, _)| trace)
    }

    /// Like [`Evolver::trace`] but also returns the final state.
    pub fn run(
        &self,
        sample: &FieldSample,
        config: &EvolutionConfig,
        sample_index: usize,
    ) -> Result<(FidelityTrace, StateVector)> {
        config.validate()?;
        let h = NoisyHamiltonian::new(&self.h0, sample, config.alpha)?;
        let n_steps = config.n_steps();
        let cap = n_steps / config.record_stride + 2;
        let mut trace = FidelityTrace {
            times: Vec::with_capacity(cap),
            fidelity: Vec::with_capacity(cap),
            norm: Vec::with_capacity(cap),
            sample_index,
        };
        let mut psi = self.ground.clone();
        let ground = self.ground.amplitudes();
        let e0 = self.ground_energy;
        integrate(&h, &mut psi, config.dt, n_steps, |k, t, psi| {
            if k % config.record_stride != 0 && k != n_steps {
                return Ok(());
            }
            if !psi.is_finite() {
                return Err(Error::NonFinite { t });
            }
            let phase = Complex64::from_polar(1.0, e0 * t);
            let overlap: Complex64 = ground.iter().zip(psi.amplitudes()).map(|(g, p)| g.conj() * p).sum();
            trace.times.push(t);
            trace.fidelity.push((phase * overlap).norm_sqr());
            trace.norm.push(psi.norm());
            Ok(())
        })?;
        Ok((trace, psi))
    }
}

/// Convenience wrapper building an [`Evolver`] for a single trace.
pub fn evolve_trace(model: &StabilizerModel, sample: &FieldSample, config: &EvolutionConfig) -> Result<FidelityTrace> {
    Evolver::new(model)?.trace(sample, config, 0)
}
