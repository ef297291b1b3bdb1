//! Pauli strings and weighted sums of them.
//!
//! A string is stored as a pair of bit masks (x-part, z-part) over the
//! register plus a real coefficient. A qubit with both bits set is `Y`,
//! using `Y = i X Z`, so the string acts on a basis state as
//!
//! ```text
//! P |b> = c * i^{#Y} * (-1)^{popcount(b & z)} |b ^ x>
//! ```
//!
//! Application is matrix free and costs one pass over the amplitudes.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{qubit_mask, StateVector, MAX_QUBITS};

/// Largest register for which dense matrices are built.
pub const DENSE_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
    coefficient: f64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        Ok(Self {
            n_qubits,
            x: 0,
            z: 0,
            coefficient: 1.0,
        })
    }

    /// Builds a string from one letter per qubit, qubit 1 first.
    pub fn from_letters(letters: &[Pauli], coefficient: f64) -> Result<Self> {
        let n = letters.len();
        let mut ps = Self::identity(n)?;
        for (k, &p) in letters.iter().enumerate() {
            ps.set(k + 1, p);
        }
        ps.coefficient = coefficient;
        Ok(ps)
    }

    /// A single letter on qubit `q` (1-based).
    pub fn single(n_qubits: usize, q: usize, p: Pauli) -> Result<Self> {
        let mut ps = Self::identity(n_qubits)?;
        check_index(n_qubits, q)?;
        ps.set(q, p);
        Ok(ps)
    }

    /// `X` on every listed qubit.
    pub fn x_on(n_qubits: usize, qubits: &[usize]) -> Result<Self> {
        Self::uniform(n_qubits, qubits, Pauli::X)
    }

    /// `Z` on every listed qubit.
    pub fn z_on(n_qubits: usize, qubits: &[usize]) -> Result<Self> {
        Self::uniform(n_qubits, qubits, Pauli::Z)
    }

    fn uniform(n_qubits: usize, qubits: &[usize], p: Pauli) -> Result<Self> {
        let mut ps = Self::identity(n_qubits)?;
        for &q in qubits {
            check_index(n_qubits, q)?;
            if ps.letter(q) != Pauli::I {
                return Err(Error::InvalidModel(format!("qubit {q} listed twice")));
            }
            ps.set(q, p);
        }
        Ok(ps)
    }

    pub fn with_coefficient(mut self, coefficient: f64) -> Self {
        self.coefficient = coefficient;
        self
    }

    pub(crate) fn set(&mut self, q: usize, p: Pauli) {
        let m = qubit_mask(self.n_qubits, q);
        let (xb, zb) = p.bits();
        self.x = if xb { self.x | m } else { self.x & !m };
        self.z = if zb { self.z | m } else { self.z & !m };
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Letter on qubit `q` (1-based).
    pub fn letter(&self, q: usize) -> Pauli {
        let m = qubit_mask(self.n_qubits, q);
        Pauli::from_bits(self.x & m != 0, self.z & m != 0)
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (1..=self.n_qubits).map(|q| self.letter(q)).collect()
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// The letter content as a string such as `XZIZ`, ignoring the coefficient.
    pub fn label(&self) -> String {
        self.letters().into_iter().map(Pauli::symbol).collect()
    }

    /// True iff the two strings commute, i.e. they anticommute on an even
    /// number of qubits.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        let clashes = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        Ok(clashes.is_multiple_of(2))
    }

    /// `i^{#Y}` times the coefficient.
    fn phase(&self) -> Complex64 {
        let c = self.coefficient;
        match (self.x & self.z).count_ones() % 4 {
            0 => Complex64::new(c, 0.0),
            1 => Complex64::new(0.0, c),
            2 => Complex64::new(-c, 0.0),
            _ => Complex64::new(0.0, -c),
        }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        psi.check_qubits(self.n_qubits)?;
        let mut out = StateVector::zeros(self.n_qubits)?;
        self.apply_add(Complex64::new(1.0, 0.0), psi.amplitudes(), out.amplitudes_mut());
        Ok(out)
    }

    /// `out += scale * P psi` on raw amplitude slices of matching length.
    pub(crate) fn apply_add(&self, scale: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
        apply_masks_add(self.x, self.z, scale * self.phase(), psi, out);
    }
}

/// `out += c * X^x Z^z psi`, where `c` already carries any `i^{#Y}` phase.
#[inline]
pub(crate) fn apply_masks_add(x: u64, z: u64, c: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
    debug_assert_eq!(psi.len(), out.len());
    let x = x as usize;
    let z = z as usize;
    if z == 0 {
        for (b, &a) in psi.iter().enumerate() {
            out[b ^ x] += c * a;
        }
    } else {
        for (b, &a) in psi.iter().enumerate() {
            let v = c * a;
            if (b & z).count_ones() & 1 == 0 {
                out[b ^ x] += v;
            } else {
                out[b ^ x] -= v;
            }
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficient != 1.0 {
            write!(f, "{}*", self.coefficient)?;
        }
        let mut any = false;
        for q in 1..=self.n_qubits {
            let p = self.letter(q);
            if p != Pauli::I {
                write!(f, "{}{}", p.symbol(), q)?;
                any = true;
            }
        }
        if !any {
            write!(f, "I")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses a dense label such as `XZIZ` (qubit 1 first), optionally
    /// prefixed with `-`.
    fn from_str(s: &str) -> Result<Self> {
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1.0, rest),
            None => (1.0, s.strip_prefix('+').unwrap_or(s)),
        };
        let letters = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidParameter(format!("bad Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_letters(&letters, sign)
    }
}

/// A real-weighted sum of Pauli strings on a common register.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSum {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

impl OperatorSum {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        Ok(Self {
            n_qubits,
            terms: Vec::new(),
        })
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<PauliString>) -> Result<Self> {
        let mut op = Self::new(n_qubits)?;
        for t in terms {
            op.push(t)?;
        }
        Ok(op)
    }

    pub fn push(&mut self, term: PauliString) -> Result<()> {
        if term.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: term.n_qubits,
            });
        }
        self.terms.push(term);
        Ok(())
    }

    /// Appends every term of `other`.
    pub fn extend(&mut self, other: &OperatorSum) -> Result<()> {
        for t in &other.terms {
            self.push(t.clone())?;
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        psi.check_qubits(self.n_qubits)?;
        let mut out = StateVector::zeros(self.n_qubits)?;
        self.apply_add(Complex64::new(1.0, 0.0), psi.amplitudes(), out.amplitudes_mut());
        Ok(out)
    }

    /// `out += scale * H psi` on raw slices.
    pub(crate) fn apply_add(&self, scale: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
        for t in &self.terms {
            t.apply_add(scale, psi, out);
        }
    }

    /// `<psi|H|psi>`; real for Hermitian sums.
    pub fn expectation(&self, psi: &StateVector) -> Result<Complex64> {
        psi.inner(&self.apply(psi)?)
    }

    /// Dense `2^N x 2^N` matrix of the sum.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > DENSE_LIMIT {
            return Err(Error::TooLarge {
                what: "dense operator",
                n: self.n_qubits,
                limit: DENSE_LIMIT,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for t in &self.terms {
            let c = t.phase();
            let (x, z) = (t.x as usize, t.z as usize);
            for col in 0..dim {
                let sign = if (col & z).count_ones() & 1 == 0 { 1.0 } else { -1.0 };
                m[(col ^ x, col)] += c * sign;
            }
        }
        Ok(m)
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::InvalidParameter("a register needs at least one qubit".into()));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::TooLarge {
            what: "Pauli string",
            n: n_qubits,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

fn check_index(n_qubits: usize, q: usize) -> Result<()> {
    if q == 0 || q > n_qubits {
        return Err(Error::IndexOutOfRange { index: q, n: n_qubits });
    }
    Ok(())
}
