//! Stabilizer models: cluster graphs, planar surface-code layouts, their
//! Hamiltonians `H0 = -delta * sum_k K_k`, and the reference ground state.

use std::collections::BTreeSet;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, group_levels, Level};
use crate::pauli::{OperatorSum, PauliString, DENSE_LIMIT};
use crate::state::StateVector;

/// Tolerance used when grouping eigenvalues into degenerate levels.
pub const LEVEL_TOL: f64 = 1e-8;

/// Undirected simple graph on vertices `1..=n_qubits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitGraph {
    n_qubits: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl QubitGraph {
    pub fn new(n_qubits: usize, edges: &[[usize; 2]]) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidModel("graph needs at least one vertex".into()));
        }
        let mut set = BTreeSet::new();
        for &[a, b] in edges {
            for v in [a, b] {
                if v == 0 || v > n_qubits {
                    return Err(Error::IndexOutOfRange { index: v, n: n_qubits });
                }
            }
            if a == b {
                return Err(Error::InvalidModel(format!("self-loop on vertex {a}")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidModel(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(Self { n_qubits, edges: set })
    }

    pub fn chain(n_qubits: usize) -> Result<Self> {
        let edges: Vec<[usize; 2]> = (1..n_qubits).map(|i| [i, i + 1]).collect();
        Self::new(n_qubits, &edges)
    }

    pub fn ring(n_qubits: usize) -> Result<Self> {
        let mut edges: Vec<[usize; 2]> = (1..n_qubits).map(|i| [i, i + 1]).collect();
        if n_qubits > 2 {
            edges.push([n_qubits, 1]);
        }
        Self::new(n_qubits, &edges)
    }

    /// Row-major `rows x cols` square lattice.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        let idx = |r: usize, c: usize| r * cols + c + 1;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push([idx(r, c), idx(r, c + 1)]);
                }
                if r + 1 < rows {
                    edges.push([idx(r, c), idx(r + 1, c)]);
                }
            }
        }
        Self::new(rows * cols, &edges)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n_qubits + 1];
        let mut stack = vec![1];
        seen[1] = true;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen[1..].iter().all(|&s| s)
    }
}

/// A planar code given by its X-type and Z-type checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceLayout {
    pub n_qubits: usize,
    pub x_checks: Vec<Vec<usize>>,
    pub z_checks: Vec<Vec<usize>>,
    /// Optional `+1`/`-1` sign per X check, default all `+1`.
    pub x_signs: Vec<i8>,
    /// Optional `+1`/`-1` sign per Z check, default all `+1`.
    pub z_signs: Vec<i8>,
}

impl SurfaceLayout {
    pub fn new(n_qubits: usize, x_checks: Vec<Vec<usize>>, z_checks: Vec<Vec<usize>>) -> Self {
        let x_signs = vec![1; x_checks.len()];
        let z_signs = vec![1; z_checks.len()];
        Self {
            n_qubits,
            x_checks,
            z_checks,
            x_signs,
            z_signs,
        }
    }
}

/// A stabilizer code instance: generators and the gap `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerModel {
    name: String,
    n_qubits: usize,
    generators: Vec<PauliString>,
    logical_z: Option<PauliString>,
    delta: f64,
}

impl StabilizerModel {
    /// Validates and assembles a model. Generators must carry coefficient
    /// `+1` or `-1`, commute pairwise, and be independent.
    pub fn new(
        name: impl Into<String>,
        generators: Vec<PauliString>,
        logical_z: Option<PauliString>,
        delta: f64,
    ) -> Result<Self> {
        let n_qubits = generators
            .first()
            .map(PauliString::n_qubits)
            .ok_or_else(|| Error::InvalidModel("no generators".into()))?;
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidModel(format!("gap must be positive, got {delta}")));
        }
        for g in generators.iter().chain(logical_z.iter()) {
            if g.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: n_qubits,
                    found: g.n_qubits(),
                });
            }
            if g.coefficient().abs() != 1.0 {
                return Err(Error::InvalidModel(format!("generator {g} does not square to identity")));
            }
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if !a.commutes(b)? {
                    return Err(Error::NonCommuting {
                        a: a.to_string(),
                        b: b.to_string(),
                    });
                }
            }
        }
        if symplectic_rank(&generators) != generators.len() {
            return Err(Error::InvalidModel("generators are not independent".into()));
        }
        if let Some(l) = &logical_z {
            for g in &generators {
                if !l.commutes(g)? {
                    return Err(Error::NonCommuting {
                        a: l.to_string(),
                        b: g.to_string(),
                    });
                }
            }
            let mut all = generators.clone();
            all.push(l.clone());
            if symplectic_rank(&all) != all.len() {
                return Err(Error::InvalidModel(
                    "logical operator lies in the stabilizer group".into(),
                ));
            }
        }
        Ok(Self {
            name: name.into(),
            n_qubits,
            generators,
            logical_z,
            delta,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn logical_z(&self) -> Option<&PauliString> {
        self.logical_z.as_ref()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Dimension of the joint `+1` eigenspace of the generators.
    pub fn code_space_dim(&self) -> usize {
        1usize << (self.n_qubits - self.generators.len())
    }

    /// `-delta * K` for every generator.
    pub fn hamiltonian(&self) -> OperatorSum {
        let terms = self
            .generators
            .iter()
            .map(|g| g.clone().with_coefficient(-self.delta * g.coefficient()))
            .collect();
        OperatorSum::from_terms(self.n_qubits, terms).expect("generators share the register")
    }

    /// Ground energy `-delta * (number of generators)`.
    pub fn ground_energy(&self) -> f64 {
        -self.delta * self.generators.len() as f64
    }

    /// The joint `+1` eigenstate of every generator (and of the logical
    /// operator, when one is configured), built by projecting basis states
    /// `|0..0>, |0..1>, ...` in turn and keeping the first survivor. The
    /// global phase is fixed so the first non-negligible amplitude is real
    /// and positive.
    pub fn ground_state(&self) -> Result<StateVector> {
        if self.n_qubits > DENSE_LIMIT {
            return Err(Error::TooLarge {
                what: "ground state",
                n: self.n_qubits,
                limit: DENSE_LIMIT,
            });
        }
        let projectors: Vec<&PauliString> =
            self.generators.iter().chain(self.logical_z.iter()).collect();
        let half = Complex64::new(0.5, 0.0);
        for seed in 0..(1usize << self.n_qubits) {
            let mut psi = StateVector::basis(self.n_qubits, seed)?;
            for k in &projectors {
                let mut next = psi.clone();
                next.scale(half);
                k.apply_add(half, psi.amplitudes(), next.amplitudes_mut());
                psi = next;
            }
            if psi.norm() > 1e-6 {
                psi.normalize();
                if let Some(lead) = psi.amplitudes().iter().copied().find(|a| a.norm() > 1e-9) {
                    psi.scale(lead.conj() / lead.norm());
                }
                return Ok(psi);
            }
        }
        Err(Error::ProjectionFailed)
    }

    /// Degenerate levels of `H0`, ascending, from dense diagonalization.
    pub fn spectrum(&self) -> Result<Vec<Level>> {
        let values = eigvalsh(&self.hamiltonian().to_dense()?)?;
        Ok(group_levels(&values, LEVEL_TOL * self.delta.max(1.0)))
    }
}

/// One generator per vertex: `X` on the vertex and `Z` on each neighbour.
pub fn cluster_stabilizers(graph: &QubitGraph, delta: f64) -> Result<StabilizerModel> {
    if !graph.is_connected() {
        log::warn!("cluster graph on {} vertices is disconnected", graph.n_qubits());
    }
    let n = graph.n_qubits();
    let generators = (1..=n)
        .map(|v| {
            let mut k = PauliString::z_on(n, &graph.neighbors(v))?;
            k.set(v, crate::pauli::Pauli::X);
            Ok(k)
        })
        .collect::<Result<Vec<_>>>()?;
    StabilizerModel::new(format!("cluster-{n}"), generators, None, delta)
}

/// One all-X generator per X check and one all-Z generator per Z check.
pub fn surface_stabilizers(
    layout: &SurfaceLayout,
    logical_z: &[usize],
    delta: f64,
) -> Result<StabilizerModel> {
    let n = layout.n_qubits;
    if layout.x_signs.len() != layout.x_checks.len() || layout.z_signs.len() != layout.z_checks.len() {
        return Err(Error::InvalidModel("one sign per check is required".into()));
    }
    let signed = |ps: PauliString, s: i8| -> Result<PauliString> {
        match s {
            1 | -1 => Ok(ps.with_coefficient(f64::from(s))),
            other => Err(Error::InvalidModel(format!("check sign must be +1 or -1, got {other}"))),
        }
    };
    let mut generators = Vec::new();
    for (check, &s) in layout.x_checks.iter().zip(&layout.x_signs) {
        generators.push(signed(PauliString::x_on(n, check)?, s)?);
    }
    for (check, &s) in layout.z_checks.iter().zip(&layout.z_signs) {
        generators.push(signed(PauliString::z_on(n, check)?, s)?);
    }
    let logical = if logical_z.is_empty() {
        None
    } else {
        Some(PauliString::z_on(n, logical_z)?)
    };
    StabilizerModel::new(format!("surface-{n}"), generators, logical, delta)
}

/// GF(2) rank of the strings' symplectic vectors.
fn symplectic_rank(strings: &[PauliString]) -> usize {
    let mut rows: Vec<u128> = strings
        .iter()
        .map(|p| (u128::from(p.x_mask()) << 64) | u128::from(p.z_mask()))
        .collect();
    let mut rank = 0;
    for bit in (0..128).rev() {
        let mask = 1u128 << bit;
        if let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] & mask != 0) {
            rows.swap(rank, pivot);
            let p = rows[rank];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && *row & mask != 0 {
                    *row ^= p;
                }
            }
            rank += 1;
        }
    }
    rank
}

/// On-disk model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Cluster {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        n_qubits: usize,
        edges: Vec<[usize; 2]>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        logical_z: Vec<usize>,
        delta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        description: Option<String>,
    },
    Surface {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        n_qubits: usize,
        x_checks: Vec<Vec<usize>>,
        z_checks: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_signs: Option<Vec<i8>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z_signs: Option<Vec<i8>>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        logical_z: Vec<usize>,
        delta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        description: Option<String>,
    },
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn with_delta(mut self, value: f64) -> Self {
        match &mut self {
            ModelSpec::Cluster { delta, .. } | ModelSpec::Surface { delta, .. } => *delta = value,
        }
        self
    }

    pub fn build(&self) -> Result<StabilizerModel> {
        match self {
            ModelSpec::Cluster {
                name,
                n_qubits,
                edges,
                logical_z,
                delta,
                ..
            } => {
                let graph = QubitGraph::new(*n_qubits, edges)?;
                let mut model = cluster_stabilizers(&graph, *delta)?;
                if !logical_z.is_empty() {
                    model = StabilizerModel::new(
                        model.name.clone(),
                        model.generators.clone(),
                        Some(PauliString::z_on(*n_qubits, logical_z)?),
                        *delta,
                    )?;
                }
                if let Some(name) = name {
                    model.name = name.clone();
                }
                Ok(model)
            }
            ModelSpec::Surface {
                name,
                n_qubits,
                x_checks,
                z_checks,
                x_signs,
                z_signs,
                logical_z,
                delta,
                ..
            } => {
                let mut layout = SurfaceLayout::new(*n_qubits, x_checks.clone(), z_checks.clone());
                if let Some(s) = x_signs {
                    layout.x_signs = s.clone();
                }
                if let Some(s) = z_signs {
                    layout.z_signs = s.clone();
                }
                let mut model = surface_stabilizers(&layout, logical_z, *delta)?;
                if let Some(name) = name {
                    model.name = name.clone();
                }
                Ok(model)
            }
        }
    }
}

macro_rules! builtin_models {
    ($($name:literal),* $(,)?) => {
        /// Names of the shipped model files.
        pub const BUILTIN_MODELS: &[&str] = &[$($name),*];

        fn builtin_text(name: &str) -> Option<&'static str> {
            match name {
                $($name => Some(include_str!(concat!("../models/", $name, ".json"))),)*
                _ => None,
            }
        }
    };
}

builtin_models!(
    "cluster-2",
    "cluster-4",
    "cluster-5",
    "cluster-6",
    "cluster-8",
    "cluster-9",
    "surface-2",
    "surface-5",
    "surface-6",
    "surface-8",
);

/// Looks up a shipped model by name, e.g. `"surface-5"`.
pub fn builtin(name: &str) -> Result<ModelSpec> {
    let text = builtin_text(name).ok_or_else(|| {
        Error::InvalidModel(format!(
            "unknown built-in model {name:?}; known: {}",
            BUILTIN_MODELS.join(", ")
        ))
    })?;
    ModelSpec::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;

    fn labels(model: &StabilizerModel) -> Vec<String> {
        model.generators().iter().map(|g| g.to_string()).collect()
    }

    #[test]
    fn two_vertex_cluster() {
        let m = cluster_stabilizers(&QubitGraph::chain(2).unwrap(), 1.0).unwrap();
        assert_eq!(labels(&m), ["X1Z2", "Z1X2"]);
    }

    #[test]
    fn ring_generator_at_vertex_one() {
        let m = cluster_stabilizers(&QubitGraph::ring(4).unwrap(), 1.0).unwrap();
        assert_eq!(m.generators()[0].to_string(), "X1Z2Z4");
        assert_eq!(m.generators().len(), 4);
    }

    #[test]
    fn single_vertex_cluster() {
        let m = cluster_stabilizers(&QubitGraph::new(1, &[]).unwrap(), 1.0).unwrap();
        assert_eq!(labels(&m), ["X1"]);
    }

    #[test]
    fn disconnected_graph_still_builds() {
        let g = QubitGraph::new(3, &[[1, 2]]).unwrap();
        assert!(!g.is_connected());
        assert_eq!(cluster_stabilizers(&g, 1.0).unwrap().generators().len(), 3);
    }

    #[test]
    fn graph_validation() {
        assert!(matches!(QubitGraph::new(2, &[[1, 3]]), Err(Error::IndexOutOfRange { index: 3, .. })));
        assert!(QubitGraph::new(2, &[[1, 1]]).is_err());
        assert!(QubitGraph::new(2, &[[1, 2], [2, 1]]).is_err());
        assert_eq!(QubitGraph::grid(3, 3).unwrap().edges().count(), 12);
    }

    #[test]
    fn five_qubit_surface() {
        let layout = SurfaceLayout::new(
            5,
            vec![vec![1, 3, 4], vec![2, 3, 5]],
            vec![vec![1, 2, 3], vec![3, 4, 5]],
        );
        let m = surface_stabilizers(&layout, &[1, 3, 5], 1.0).unwrap();
        assert_eq!(labels(&m), ["X1X3X4", "X2X3X5", "Z1Z2Z3", "Z3Z4Z5"]);
        assert_eq!(m.code_space_dim(), 2);
    }

    #[test]
    fn minimal_surface_checks() {
        let layout = SurfaceLayout::new(2, vec![vec![1, 2]], vec![vec![1, 2]]);
        let m = surface_stabilizers(&layout, &[], 1.0).unwrap();
        assert_eq!(labels(&m), ["X1X2", "Z1Z2"]);
    }

    #[test]
    fn anticommuting_checks_are_named() {
        let layout = SurfaceLayout::new(3, vec![vec![1, 2]], vec![vec![1, 3]]);
        match surface_stabilizers(&layout, &[], 1.0) {
            Err(Error::NonCommuting { a, b }) => {
                assert_eq!(a, "X1X2");
                assert_eq!(b, "Z1Z3");
            }
            other => panic!("expected rejection, got {other:?}"),
        }
        // Dense cross-check: the commutator really is nonzero.
        let x = OperatorSum::from_terms(3, vec![PauliString::x_on(3, &[1, 2]).unwrap()]).unwrap();
        let z = OperatorSum::from_terms(3, vec![PauliString::z_on(3, &[1, 3]).unwrap()]).unwrap();
        let (dx, dz) = (x.to_dense().unwrap(), z.to_dense().unwrap());
        assert!((&dx * &dz - &dz * &dx).norm() > 1.0);
    }

    #[test]
    fn logical_in_group_is_rejected() {
        let layout = SurfaceLayout::new(2, vec![vec![1, 2]], vec![vec![1, 2]]);
        assert!(surface_stabilizers(&layout, &[1, 2], 1.0).is_err());
        assert!(surface_stabilizers(&layout, &[1], 1.0).is_err());
    }

    #[test]
    fn small_spectra() {
        let c2 = cluster_stabilizers(&QubitGraph::chain(2).unwrap(), 1.0).unwrap();
        let lv = c2.spectrum().unwrap();
        let got: Vec<(i64, usize)> = lv.iter().map(|l| (l.energy.round() as i64, l.multiplicity)).collect();
        assert_eq!(got, [(-2, 1), (0, 2), (2, 1)]);

        let ring = cluster_stabilizers(&QubitGraph::ring(4).unwrap(), 1.0).unwrap();
        let lv = ring.spectrum().unwrap();
        assert!((lv[0].energy + 4.0).abs() < 1e-10);
        assert!((lv.last().unwrap().energy - 4.0).abs() < 1e-10);
    }

    #[test]
    fn ground_state_is_stabilized() {
        for name in BUILTIN_MODELS {
            let m = builtin(name).unwrap().build().unwrap();
            let psi = m.ground_state().unwrap();
            assert!((psi.norm() - 1.0).abs() < 1e-12);
            for k in m.generators() {
                assert!(k.apply(&psi).unwrap().distance(&psi).unwrap() <= 1e-10, "{name}: {k}");
            }
            let e = m.hamiltonian().expectation(&psi).unwrap();
            assert!((e.re - m.ground_energy()).abs() < 1e-10);
            assert_eq!(m.generators().len() + usize::from(m.logical_z().is_some()), m.n_qubits());
        }
    }

    #[test]
    fn two_qubit_ground_states_match_closed_forms() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c2 = builtin("cluster-2").unwrap().build().unwrap();
        // (|0>|+> + |1>|->)/sqrt2 = (|00> + |01> + |10> - |11>)/2
        let want = StateVector::from_amplitudes(
            2,
            [0.5, 0.5, 0.5, -0.5].iter().map(|&r| Complex64::new(r, 0.0)).collect(),
        )
        .unwrap();
        assert!(want.overlap_sqr(&c2.ground_state().unwrap()).unwrap() >= 1.0 - 1e-12);

        let s2 = builtin("surface-2").unwrap().build().unwrap();
        let singlet = StateVector::from_amplitudes(
            2,
            [0.0, s, -s, 0.0].iter().map(|&r| Complex64::new(r, 0.0)).collect(),
        )
        .unwrap();
        assert!(singlet.overlap_sqr(&s2.ground_state().unwrap()).unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn spec_round_trips_through_json() {
        for name in BUILTIN_MODELS {
            let spec = builtin(name).unwrap();
            let text = serde_json::to_string(&spec).unwrap();
            assert_eq!(ModelSpec::from_json(&text).unwrap(), spec);
            assert_eq!(spec.build().unwrap().name(), *name);
        }
        assert!(builtin("torus-3").is_err());
        assert!(ModelSpec::from_json(r#"{"kind":"cluster","n_qubits":2,"edges":[[1,2]],"delta":1,"bogus":1}"#).is_err());
    }

    #[test]
    fn generators_must_be_involutions() {
        let g = PauliString::from_letters(&[Pauli::X], 2.0).unwrap();
        assert!(StabilizerModel::new("bad", vec![g], None, 1.0).is_err());
        let g = PauliString::from_letters(&[Pauli::X], 1.0).unwrap();
        assert!(StabilizerModel::new("bad", vec![g], None, 0.0).is_err());
    }
}
