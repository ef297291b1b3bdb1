//! Random local fields `H1(t) = sum_i g_i cos(wx_i t) X_i + h_i cos(wz_i t) Z_i`.
//!
//! Every draw is addressed by `(seed, sample_index, qubit, kind)` through a
//! ChaCha stream, so a sample does not depend on the order in which samples
//! are generated or on which other qubits are active.

use std::collections::BTreeSet;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{OperatorSum, Pauli, PauliString};

const DOMAIN_FIELDS: u64 = 0x6669_656c_6473; // "fields"
const DOMAIN_MASKS: u64 = 0x006d_6173_6b73; // "masks"

/// Bounds of the four field kinds, in units of the gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub g_ave: f64,
    pub h_ave: f64,
    pub wx_ave: f64,
    pub wz_ave: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            g_ave: 0.0,
            h_ave: 0.0,
            wx_ave: 0.0,
            wz_ave: 0.0,
            n_samples: 10,
            seed: 0,
        }
    }
}

impl NoiseParams {
    /// All four bounds set to the common scale `delta`.
    pub fn from_delta(delta: f64, n_samples: usize, seed: u64) -> Self {
        Self {
            g_ave: delta,
            h_ave: delta,
            wx_ave: delta,
            wz_ave: delta,
            n_samples,
            seed,
        }
    }

    /// Amplitude bound `amplitude` on both axes with zero frequencies.
    pub fn static_fields(amplitude: f64, n_samples: usize, seed: u64) -> Self {
        Self {
            g_ave: amplitude,
            h_ave: amplitude,
            wx_ave: 0.0,
            wz_ave: 0.0,
            n_samples,
            seed,
        }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self::from_delta(delta, self.n_samples, self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("g_ave", self.g_ave),
            ("h_ave", self.h_ave),
            ("wx_ave", self.wx_ave),
            ("wz_ave", self.wz_ave),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Qubits (1-based) that carry fluctuating fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectMask {
    n_qubits: usize,
    active: BTreeSet<usize>,
}

impl DefectMask {
    pub fn new(n_qubits: usize, active: impl IntoIterator<Item = usize>) -> Result<Self> {
        let active: BTreeSet<usize> = active.into_iter().collect();
        if let Some(&q) = active.iter().find(|&&q| q == 0 || q > n_qubits) {
            return Err(Error::IndexOutOfRange { index: q, n: n_qubits });
        }
        Ok(Self { n_qubits, active })
    }

    pub fn all(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            active: (1..=n_qubits).collect(),
        }
    }

    pub fn none(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            active: BTreeSet::new(),
        }
    }

    /// A uniformly random subset of `n_defect` qubits, determined by
    /// `(seed, sample_index, n_defect)`.
    pub fn random(n_qubits: usize, n_defect: usize, seed: u64, sample_index: usize) -> Result<Self> {
        if n_defect > n_qubits {
            return Err(Error::InvalidParameter(format!(
                "cannot place {n_defect} defects on {n_qubits} qubits"
            )));
        }
        let mut rng = stream(seed, DOMAIN_MASKS, sample_index);
        rng.set_word_pos((n_defect as u128) << 40);
        let picked = rand::seq::index::sample(&mut rng, n_qubits, n_defect);
        Self::new(n_qubits, picked.into_iter().map(|i| i + 1))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_defect(&self) -> usize {
        self.active.len()
    }

    pub fn contains(&self, q: usize) -> bool {
        self.active.contains(&q)
    }

    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().copied()
    }
}

/// One random draw of per-qubit amplitudes and angular frequencies.
/// Index `i` holds qubit `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub wx: Vec<f64>,
    pub wz: Vec<f64>,
}

impl FieldSample {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            g: vec![0.0; n_qubits],
            h: vec![0.0; n_qubits],
            wx: vec![0.0; n_qubits],
            wz: vec![0.0; n_qubits],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.g.len()
    }

    pub fn is_zero(&self) -> bool {
        self.g.iter().chain(&self.h).all(|&a| a == 0.0)
    }

    /// X and Z coefficients of qubit `i + 1` at time `t`.
    #[inline]
    pub(crate) fn coefficients_at(&self, i: usize, t: f64) -> (f64, f64) {
        (self.g[i] * (self.wx[i] * t).cos(), self.h[i] * (self.wz[i] * t).cos())
    }

    /// `H1(t)` as a Pauli sum; qubits with zero amplitude contribute no term.
    pub fn field_hamiltonian(&self, t: f64) -> Result<OperatorSum> {
        let n = self.n_qubits();
        let mut op = OperatorSum::new(n)?;
        for i in 0..n {
            let (gx, hz) = self.coefficients_at(i, t);
            if self.g[i] != 0.0 {
                op.push(PauliString::single(n, i + 1, Pauli::X)?.with_coefficient(gx))?;
            }
            if self.h[i] != 0.0 {
                op.push(PauliString::single(n, i + 1, Pauli::Z)?.with_coefficient(hz))?;
            }
        }
        Ok(op)
    }
}

fn stream(seed: u64, domain: u64, sample_index: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(sample_index as u64);
    rng
}

/// Draws sample `sample_index`: each active qubit gets four independent
/// uniform values in `[-1, 1]` scaled by `g_ave`, `h_ave`, `wx_ave`, `wz_ave`.
/// Inactive qubits are exactly zero.
pub fn sample_fields(params: &NoiseParams, mask: &DefectMask, sample_index: usize) -> Result<FieldSample> {
    params.validate()?;
    if sample_index >= params.n_samples {
        return Err(Error::InvalidParameter(format!(
            "sample index {sample_index} outside 0..{}",
            params.n_samples
        )));
    }
    let n = mask.n_qubits();
    let unit = Uniform::new_inclusive(-1.0, 1.0);
    let mut rng = stream(params.seed, DOMAIN_FIELDS, sample_index);
    let mut draw = |q: usize, kind: usize| {
        rng.set_word_pos(((q as u128) * 4 + kind as u128) * 16);
        unit.sample(&mut rng)
    };
    let mut s = FieldSample::zero(n);
    for q in mask.active() {
        let i = q - 1;
        s.g[i] = params.g_ave * draw(i, 0);
        s.h[i] = params.h_ave * draw(i, 1);
        s.wx[i] = params.wx_ave * draw(i, 2);
        s.wz[i] = params.wz_ave * draw(i, 3);
    }
    Ok(s)
}
