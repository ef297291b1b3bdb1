//! Dense state vectors in the computational basis.
//!
//! Qubit 1 is the most significant bit of the basis index, so for three
//! qubits `|q1 q2 q3>` lives at index `4*q1 + 2*q2 + q3`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register a state vector may hold.
pub const MAX_QUBITS: usize = 30;

/// Bit mask of qubit `q` (1-based) in an `n`-qubit register.
#[inline]
pub fn qubit_mask(n_qubits: usize, q: usize) -> u64 {
    debug_assert!(q >= 1 && q <= n_qubits);
    1u64 << (n_qubits - q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(n_qubits: usize) -> Result<Self> {
        check_size(n_qubits)?;
        Ok(Self {
            n_qubits,
            amps: vec![Complex64::new(0.0, 0.0); 1usize << n_qubits],
        })
    }

    /// The basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::zeros(n_qubits)?;
        if index >= s.amps.len() {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        s.amps[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_size(n_qubits)?;
        if amps.len() != 1usize << n_qubits {
            return Err(Error::InvalidParameter(format!(
                "{} amplitudes do not describe {n_qubits} qubits",
                amps.len()
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm. Returns the norm before rescaling.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
        n
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.amps.iter_mut().for_each(|a| *a *= factor);
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2` without normalizing either side.
    pub fn overlap_sqr(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    pub(crate) fn check_qubits(&self, expected: usize) -> Result<()> {
        if self.n_qubits != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.n_qubits,
            });
        }
        Ok(())
    }

    fn check_same(&self, other: &StateVector) -> Result<()> {
        other.check_qubits(self.n_qubits)
    }
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::InvalidParameter("a register needs at least one qubit".into()));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::TooLarge {
            what: "state vector",
            n: n_qubits,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}
