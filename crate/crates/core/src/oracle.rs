//! Closed forms for the two-qubit systems and an exact propagator, used to
//! validate the numerical paths.
//!
//! Two-qubit cluster: `H0 = -delta (X1 Z2 + Z1 X2)`. In the excitation basis
//! `{Phi0, Z1 Phi0, Z2 Phi0, Z1 Z2 Phi0}` with `g = 0` the problem separates
//! into two independent spins `-delta s_z + h_i s_x`, so the levels are
//! `+-q1 +- q2` with `q_i = sqrt(delta^2 + h_i^2)`.
//!
//! Two-qubit surface code: both checks carry sign `-1`, so
//! `H0 = delta (X1 X2 + Z1 Z2)` whose ground state is the singlet. In the
//! computational basis `{|00>, |01>, |10>, |11>}` the fields only mix
//! `{|00>, |11>}` (offset `h1 + h2`) and `{|01>, |10>}` (offset `h1 - h2`).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::eigh;
use crate::pauli::{OperatorSum, Pauli, PauliString, DENSE_LIMIT};
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitFields {
    pub h1: f64,
    pub h2: f64,
    pub g1: f64,
    pub g2: f64,
    pub delta: f64,
}

impl TwoQubitFields {
    pub fn z_only(h1: f64, h2: f64, delta: f64) -> Self {
        Self {
            h1,
            h2,
            g1: 0.0,
            g2: 0.0,
            delta,
        }
    }

    /// `sqrt(delta^2 + h1^2)`, `sqrt(delta^2 + h2^2)`.
    pub fn q(&self) -> (f64, f64) {
        (self.delta.hypot(self.h1), self.delta.hypot(self.h2))
    }

    pub fn h_plus(&self) -> f64 {
        self.h1 + self.h2
    }

    pub fn h_minus(&self) -> f64 {
        self.h1 - self.h2
    }

    fn require_z_only(&self) -> Result<()> {
        if self.g1 != 0.0 || self.g2 != 0.0 {
            return Err(Error::InvalidParameter("closed form requires g1 = g2 = 0".into()));
        }
        Ok(())
    }

    /// `sum_i h_i Z_i + g_i X_i` on the two-qubit register.
    pub fn field_operator(&self) -> OperatorSum {
        let mut terms = Vec::new();
        for (q, h, g) in [(1, self.h1, self.g1), (2, self.h2, self.g2)] {
            terms.push(PauliString::single(2, q, Pauli::Z).unwrap().with_coefficient(h));
            terms.push(PauliString::single(2, q, Pauli::X).unwrap().with_coefficient(g));
        }
        OperatorSum::from_terms(2, terms).unwrap()
    }
}

fn real_matrix(rows: [[f64; 4]; 4]) -> DMatrix<Complex64> {
    DMatrix::from_fn(4, 4, |i, j| Complex64::new(rows[i][j], 0.0))
}

/// Full cluster Hamiltonian in the excitation basis
/// `{Phi0, Z1 Phi0, Z2 Phi0, Z1 Z2 Phi0}`.
pub fn cluster2_hamiltonian(f: &TwoQubitFields) -> DMatrix<Complex64> {
    let TwoQubitFields { h1, h2, g1, g2, delta } = *f;
    real_matrix([
        [-2.0 * delta, h1 + g2, h2 + g1, 0.0],
        [h1 + g2, 0.0, 0.0, h2 - g1],
        [h2 + g1, 0.0, 0.0, h1 - g2],
        [0.0, h2 - g1, h1 - g2, 2.0 * delta],
    ])
}

/// Cluster levels for `g = 0`: `-(q1+q2), -|q1-q2|, |q1-q2|, q1+q2`.
pub fn cluster2_eigs(f: &TwoQubitFields) -> Result<[f64; 4]> {
    f.require_z_only()?;
    let (q1, q2) = f.q();
    let d = (q1 - q2).abs();
    Ok([-(q1 + q2), -d, d, q1 + q2])
}

/// The two values `2 delta^2 + h1^2 + h2^2 -+ 2 sqrt((delta^2+h1^2)(delta^2+h2^2))`.
/// They are the squared cluster levels, not the levels themselves.
pub fn cluster2_squared_levels(f: &TwoQubitFields) -> [f64; 2] {
    let d2 = f.delta * f.delta;
    let base = 2.0 * d2 + f.h1 * f.h1 + f.h2 * f.h2;
    let root = 2.0 * ((d2 + f.h1 * f.h1) * (d2 + f.h2 * f.h2)).sqrt();
    [base - root, base + root]
}

/// Cluster ground-state coefficients in the excitation basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cluster2Ground {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Cluster2Ground {
    pub fn norm(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            a: self.a / n,
            b: self.b / n,
            c: self.c / n,
            d: self.d / n,
        }
    }

    pub fn to_vector(&self) -> DVector<Complex64> {
        DVector::from_iterator(4, [self.a, self.b, self.c, self.d].map(|x| Complex64::new(x, 0.0)))
    }
}

/// Ground coefficients `a = (q1+delta)(q2+delta)`, `b = -h1 (q2+delta)`,
/// `c = -h2 (q1+delta)`, `d = h1 h2`, each divided by
/// `sqrt((q1+delta)^2 (q2+delta)^2 + h1^2 h2^2)`.
///
/// That divisor only normalizes the vector when `h1 h2 = 0` or both fields
/// vanish; the direction is exact. Use [`Cluster2Ground::normalized`] before
/// comparing with eigenvectors, and [`Cluster2Ground::norm`] to see the
/// deviation.
pub fn cluster2_ground(f: &TwoQubitFields) -> Result<Cluster2Ground> {
    f.require_z_only()?;
    let (q1, q2) = f.q();
    let (p1, p2) = (q1 + f.delta, q2 + f.delta);
    let dc = (p1 * p2).powi(2) + (f.h1 * f.h2).powi(2);
    let s = dc.sqrt();
    Ok(Cluster2Ground {
        a: p1 * p2 / s,
        b: -f.h1 * p2 / s,
        c: -f.h2 * p1 / s,
        d: f.h1 * f.h2 / s,
    })
}

/// Surface Hamiltonian `delta (X1 X2 + Z1 Z2) + sum_i h_i Z_i + g_i X_i` in
/// the computational basis.
pub fn surface2_hamiltonian(f: &TwoQubitFields) -> DMatrix<Complex64> {
    let TwoQubitFields { g1, g2, delta, .. } = *f;
    let (hp, hm) = (f.h_plus(), f.h_minus());
    real_matrix([
        [delta + hp, g2, g1, delta],
        [g2, -delta + hm, delta, g1],
        [g1, delta, -delta - hm, g2],
        [delta, g1, g2, delta - hp],
    ])
}

/// Surface levels for `g = 0`, ascending:
/// `-delta +- sqrt(delta^2 + h_m^2)` and `delta +- sqrt(delta^2 + h_p^2)`.
pub fn surface2_eigs(f: &TwoQubitFields) -> Result<[f64; 4]> {
    f.require_z_only()?;
    let rm = f.delta.hypot(f.h_minus());
    let rp = f.delta.hypot(f.h_plus());
    let mut e = [-f.delta - rm, -f.delta + rm, f.delta - rp, f.delta + rp];
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Surface ground state `b |01> - c |10>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Surface2Ground {
    pub b: f64,
    pub c: f64,
}

impl Surface2Ground {
    pub fn to_state(&self) -> StateVector {
        let z = Complex64::new(0.0, 0.0);
        StateVector::from_amplitudes(2, vec![z, Complex64::new(self.b, 0.0), Complex64::new(-self.c, 0.0), z])
            .expect("four amplitudes")
    }
}

/// `b = delta / N`, `c = (h_m + sqrt(D)) / N` with `D = delta^2 + h_m^2` and
/// `N = sqrt(2 sqrt(D) (sqrt(D) + h_m))`.
pub fn surface2_ground(f: &TwoQubitFields) -> Result<Surface2Ground> {
    f.require_z_only()?;
    let hm = f.h_minus();
    let root = f.delta.hypot(hm);
    // sqrt(D) + h_m loses precision when h_m is large and negative; use the
    // equivalent delta^2 / (sqrt(D) - h_m) there.
    let sum = if hm >= 0.0 { root + hm } else { f.delta * f.delta / (root - hm) };
    let n = (2.0 * root * sum).sqrt();
    Ok(Surface2Ground {
        b: f.delta / n,
        c: sum / n,
    })
}

/// `exp(-i H t) psi0` for Hermitian `H`, via eigendecomposition.
pub fn exact_propagate(h: &DMatrix<Complex64>, psi0: &StateVector, t: f64) -> Result<StateVector> {
    exact_propagate_damped(h, 0.0, psi0, t)
}

/// `exp(-i (H - i alpha) t) psi0 = exp(-alpha t) exp(-i H t) psi0`; `H` must
/// be Hermitian, the optical potential is passed separately as `alpha`.
pub fn exact_propagate_damped(
    h: &DMatrix<Complex64>,
    alpha: f64,
    psi0: &StateVector,
    t: f64,
) -> Result<StateVector> {
    if psi0.n_qubits() > DENSE_LIMIT {
        return Err(Error::TooLarge {
            what: "exact propagation",
            n: psi0.n_qubits(),
            limit: DENSE_LIMIT,
        });
    }
    if h.nrows() != psi0.dim() {
        return Err(Error::InvalidParameter(format!(
            "matrix dimension {} does not match state dimension {}",
            h.nrows(),
            psi0.dim()
        )));
    }
    let (values, vectors) = eigh(h)?;
    let v = DVector::from_column_slice(psi0.amplitudes());
    let mut coeffs = vectors.adjoint() * v;
    let damp = (-alpha * t).exp();
    for (c, e) in coeffs.iter_mut().zip(&values) {
        *c *= Complex64::from_polar(damp, -e * t);
    }
    let out = vectors * coeffs;
    StateVector::from_amplitudes(psi0.n_qubits(), out.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::builtin;
    use crate::linalg::eigvalsh;
    use rand::{Rng, SeedableRng};

    fn random_fields(rng: &mut impl Rng) -> TwoQubitFields {
        TwoQubitFields::z_only(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.3..2.0))
    }

    /// Columns `Phi0, Z1 Phi0, Z2 Phi0, Z1 Z2 Phi0` of the two-qubit cluster.
    fn excitation_basis() -> DMatrix<Complex64> {
        let m = builtin("cluster-2").unwrap().build().unwrap();
        let g = m.ground_state().unwrap();
        let z1 = PauliString::single(2, 1, Pauli::Z).unwrap();
        let z2 = PauliString::single(2, 2, Pauli::Z).unwrap();
        let cols = [g.clone(), z1.apply(&g).unwrap(), z2.apply(&g).unwrap(), z1.apply(&z2.apply(&g).unwrap()).unwrap()];
        DMatrix::from_fn(4, 4, |i, j| cols[j].amplitudes()[i])
    }

    fn full_cluster(f: &TwoQubitFields) -> DMatrix<Complex64> {
        let m = builtin("cluster-2").unwrap().with_delta(f.delta).build().unwrap();
        let mut h = m.hamiltonian();
        h.extend(&f.field_operator()).unwrap();
        h.to_dense().unwrap()
    }

    fn full_surface(f: &TwoQubitFields) -> DMatrix<Complex64> {
        let m = builtin("surface-2").unwrap().with_delta(f.delta).build().unwrap();
        let mut h = m.hamiltonian();
        h.extend(&f.field_operator()).unwrap();
        h.to_dense().unwrap()
    }

    #[test]
    fn unperturbed_cluster_matrix() {
        let h = cluster2_hamiltonian(&TwoQubitFields::z_only(0.0, 0.0, 1.0));
        assert_eq!(h, real_matrix([[-2.0, 0.0, 0.0, 0.0], [0.0; 4], [0.0; 4], [0.0, 0.0, 0.0, 2.0]]));
    }

    #[test]
    fn cluster_matrix_is_basis_change_of_full_operator() {
        let u = excitation_basis();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = TwoQubitFields {
                g1: rng.gen_range(-1.0..1.0),
                g2: rng.gen_range(-1.0..1.0),
                ..random_fields(&mut rng)
            };
            let projected = u.adjoint() * full_cluster(&f) * &u;
            assert!((projected - cluster2_hamiltonian(&f)).norm() < 1e-12);
        }
    }

    #[test]
    fn equal_fields_cluster_levels() {
        let f = TwoQubitFields::z_only(0.4, 0.4, 1.0);
        let e = cluster2_eigs(&f).unwrap();
        let q = 1.0f64.hypot(0.4);
        assert_eq!(e, [-2.0 * q, 0.0, 0.0, 2.0 * q]);
        let dense = eigvalsh(&cluster2_hamiltonian(&f)).unwrap();
        for (a, b) in e.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cluster_ground_cases() {
        assert_eq!(
            cluster2_ground(&TwoQubitFields::z_only(0.0, 0.0, 1.0)).unwrap(),
            Cluster2Ground { a: 1.0, b: 0.0, c: 0.0, d: 0.0 }
        );
        let f = TwoQubitFields::z_only(1.0, 0.0, 1.0);
        let g = cluster2_ground(&f).unwrap();
        assert!(g.b != 0.0 && g.c == 0.0 && g.d == 0.0);
        let (_, vecs) = eigh(&cluster2_hamiltonian(&f)).unwrap();
        let overlap = (vecs.column(0).adjoint() * g.normalized().to_vector())[(0, 0)].norm_sqr();
        assert!(overlap >= 1.0 - 1e-10);

        let a = cluster2_ground(&TwoQubitFields::z_only(0.3, -0.8, 1.0)).unwrap();
        let b = cluster2_ground(&TwoQubitFields::z_only(-0.8, 0.3, 1.0)).unwrap();
        assert_eq!((a.b, a.c), (b.c, b.b));
        assert!(cluster2_ground(&TwoQubitFields { g1: 0.1, ..f }).is_err());
    }

    #[test]
    fn cluster_divisor_is_not_a_normalizer_for_two_fields() {
        let g = cluster2_ground(&TwoQubitFields::z_only(0.5, 0.5, 1.0)).unwrap();
        assert!(g.norm() > 1.0 + 1e-3);
        let g = cluster2_ground(&TwoQubitFields::z_only(0.5, 0.0, 1.0)).unwrap();
        assert!((g.norm() - 1.0).abs() > 1e-3);
    }

    #[test]
    fn surface_cases() {
        assert_eq!(surface2_eigs(&TwoQubitFields::z_only(0.0, 0.0, 1.0)).unwrap(), [-2.0, 0.0, 0.0, 2.0]);
        let r2 = 2.0f64.sqrt();
        let e = surface2_eigs(&TwoQubitFields::z_only(1.0, 0.0, 1.0)).unwrap();
        let want = [-1.0 - r2, -1.0 + r2, 1.0 - r2, 1.0 + r2];
        let mut want = want;
        want.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let g = surface2_ground(&TwoQubitFields::z_only(0.3, 0.3, 1.0)).unwrap();
        assert!((g.b - s).abs() < 1e-15 && (g.c - s).abs() < 1e-15);

        let f = TwoQubitFields::z_only(1.0, 0.0, 1.0);
        let g = surface2_ground(&f).unwrap();
        let (_, vecs) = eigh(&full_surface(&f)).unwrap();
        let dense = StateVector::from_amplitudes(2, vecs.column(0).iter().copied().collect()).unwrap();
        assert!(dense.overlap_sqr(&g.to_state()).unwrap() >= 1.0 - 1e-10);
    }

    #[test]
    fn surface_matrix_matches_model() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let f = TwoQubitFields {
                g1: rng.gen_range(-1.0..1.0),
                g2: rng.gen_range(-1.0..1.0),
                ..random_fields(&mut rng)
            };
            assert!((surface2_hamiltonian(&f) - full_surface(&f)).norm() < 1e-12);
        }
    }

    #[test]
    fn random_draws_match_dense() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let f = random_fields(&mut rng);
            let c = cluster2_eigs(&f).unwrap();
            let dc = eigvalsh(&cluster2_hamiltonian(&f)).unwrap();
            let s = surface2_eigs(&f).unwrap();
            let ds = eigvalsh(&full_surface(&f)).unwrap();
            for k in 0..4 {
                assert!((c[k] - dc[k]).abs() < 1e-10);
                assert!((s[k] - ds[k]).abs() < 1e-10);
            }
            let sq = cluster2_squared_levels(&f);
            let lo = c[2] * c[2];
            let hi = c[3] * c[3];
            assert!((sq[0] - lo).abs() < 1e-10 && (sq[1] - hi).abs() < 1e-10);
            let g = surface2_ground(&f).unwrap();
            assert!((g.b * g.b + g.c * g.c - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn propagator_basics() {
        let h = cluster2_hamiltonian(&TwoQubitFields::z_only(0.0, 0.0, 1.0));
        let psi = StateVector::basis(2, 0).unwrap();
        assert!(exact_propagate(&h, &psi, 0.0).unwrap().distance(&psi).unwrap() < 1e-14);
        let out = exact_propagate(&h, &psi, 0.7).unwrap();
        let want = Complex64::from_polar(1.0, 2.0 * 0.7);
        assert!((out.amplitudes()[0] - want).norm() < 1e-13);
        let damped = exact_propagate_damped(&h, 0.5, &psi, 2.0).unwrap();
        assert!((damped.norm() - (-1.0f64).exp()).abs() < 1e-13);

        let mut bad = h.clone();
        bad[(0, 1)] = Complex64::new(0.0, 1.0);
        assert!(matches!(exact_propagate(&bad, &psi, 1.0), Err(Error::NonHermitian(_))));
        assert!(exact_propagate(&h, &StateVector::basis(1, 0).unwrap(), 1.0).is_err());
    }
}
