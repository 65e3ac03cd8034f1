//! Chain geometries, orbital bookkeeping and Hamiltonian assembly.
//!
//! Two bipartite one-dimensional families are supported:
//!
//! * **Stub** chains: an alternating A–C backbone (A at integer multiples of
//!   `a`, C interleaved at half-integer positions) with a pendant B orbital
//!   attached to A by the weaker hopping `-alpha*t`. Backbone hoppings are
//!   `-t`.
//! * **Diamond** chains: an A spine with B (above) and C (below) orbitals at
//!   half-integer positions forming plaquettes; every hopping is `-t`.
//!
//! The diluted variant with index `n` keeps one B orbital out of every `n`,
//! giving `2n+1` orbitals per cell of length `a_n = n*a` (n A's, one B, n C's).
//! A and (B ∪ C) form a bipartition; B and C carry the localized spins, which
//! in the ferromagnetic background add `±JS/2` to their on-site energy
//! depending on the carrier spin.
//!
//! Bloch Hamiltonians are assembled in the periodic gauge: each hopping
//! carries the phase `exp(i k Δx)` with `Δx` the true axis-coordinate
//! difference of the two orbitals. For `n = 1` this reproduces the familiar
//! real 3×3 matrices with off-diagonal `-2t cos(ka/2)`; for `n ≥ 2` the
//! matrices are genuinely complex Hermitian.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chain family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Stub,
    Diamond,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Stub => write!(f, "stub"),
            Family::Diamond => write!(f, "diamond"),
        }
    }
}

/// Sublattice label. A is non-magnetic; B and C carry localized spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
    C,
}

impl Sublattice {
    pub fn is_magnetic(self) -> bool {
        !matches!(self, Sublattice::A)
    }
}

impl std::fmt::Display for Sublattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sublattice::A => write!(f, "A"),
            Sublattice::B => write!(f, "B"),
            Sublattice::C => write!(f, "C"),
        }
    }
}

/// Carrier spin sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinSector {
    Up,
    Down,
}

impl SpinSector {
    /// `z_sigma`: +1 for up, -1 for down. The on-site magnetic energy on
    /// B/C orbitals is `z_sigma * JS / 2`.
    pub fn z(self) -> f64 {
        match self {
            SpinSector::Up => 1.0,
            SpinSector::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            SpinSector::Up => SpinSector::Down,
            SpinSector::Down => SpinSector::Up,
        }
    }
}

impl std::fmt::Display for SpinSector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpinSector::Up => write!(f, "up"),
            SpinSector::Down => write!(f, "down"),
        }
    }
}

/// Full parameterization of a chain.
///
/// Serializes to the flat record `{family, n, alpha, t, JS, a}` with
/// defaults `t = 1`, `a = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub family: Family,
    /// Dilution index; the unit cell holds `2n+1` orbitals and spans `n*a`.
    pub n: usize,
    /// Perpendicular hopping ratio (stub only; the A–B hopping is `-alpha*t`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Hopping energy unit.
    #[serde(default = "default_one")]
    pub t: f64,
    /// Local exchange energy in units of `t`; its sign swaps the spin sectors.
    #[serde(rename = "JS")]
    pub js: f64,
    /// Lattice constant.
    #[serde(default = "default_one")]
    pub a: f64,
}

fn default_one() -> f64 {
    1.0
}

/// Non-fatal validation diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecWarning {
    /// `alpha` supplied for a diamond chain, where it is ignored.
    AlphaIgnoredForDiamond,
}

impl std::fmt::Display for SpecWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpecWarning::AlphaIgnoredForDiamond => {
                write!(f, "alpha is ignored for diamond chains (all hoppings are -t)")
            }
        }
    }
}

impl ChainSpec {
    pub fn stub(n: usize, alpha: f64) -> Self {
        ChainSpec { family: Family::Stub, n, alpha: Some(alpha), t: 1.0, js: 0.0, a: 1.0 }
    }

    pub fn diamond(n: usize) -> Self {
        ChainSpec { family: Family::Diamond, n, alpha: None, t: 1.0, js: 0.0, a: 1.0 }
    }

    pub fn with_js(mut self, js: f64) -> Self {
        self.js = js;
        self
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    /// Number of orbitals per unit cell, `2n+1`.
    pub fn orbitals_per_cell(&self) -> usize {
        2 * self.n + 1
    }

    /// Unit-cell length `a_n = n*a`.
    pub fn cell_len(&self) -> f64 {
        self.n as f64 * self.a
    }

    /// Effective perpendicular hopping ratio (1 for diamond).
    pub fn alpha_eff(&self) -> f64 {
        match self.family {
            Family::Stub => self.alpha.unwrap_or(1.0),
            Family::Diamond => 1.0,
        }
    }

    /// Checks invariants; returns warning-level diagnostics on success.
    pub fn validate(&self) -> Result<Vec<SpecWarning>> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("dilution index n must be >= 1".into()));
        }
        if !(self.t > 0.0) {
            return Err(Error::InvalidSpec(format!("t must be > 0, got {}", self.t)));
        }
        if !(self.a > 0.0) {
            return Err(Error::InvalidSpec(format!("a must be > 0, got {}", self.a)));
        }
        if !self.js.is_finite() {
            return Err(Error::InvalidSpec("JS must be finite".into()));
        }
        let mut warnings = Vec::new();
        match self.family {
            Family::Stub => {
                let alpha = self
                    .alpha
                    .ok_or_else(|| Error::InvalidSpec("stub chains require alpha".into()))?;
                if !alpha.is_finite() {
                    return Err(Error::InvalidSpec("alpha must be finite".into()));
                }
            }
            Family::Diamond => {
                if self.alpha.is_some() {
                    warnings.push(SpecWarning::AlphaIgnoredForDiamond);
                }
            }
        }
        Ok(warnings)
    }
}

/// A single orbital with its cell index and axis coordinate (units of length).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orbital {
    pub sublattice: Sublattice,
    pub cell: i64,
    /// Intra-cell index within its sublattice (A and C: 0..n, B: 0).
    pub slot: usize,
    /// Chain-axis coordinate. Perpendicular offsets never enter distances.
    pub position: f64,
}

/// Hopping between orbital `i` of the home cell and orbital `j` of the cell
/// shifted by `cell_offset` (0 or 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hop {
    pub i: usize,
    pub j: usize,
    pub cell_offset: u8,
    pub amplitude: f64,
}

/// One unit cell: orbitals (cell index 0) plus intra-cell and cell-boundary
/// hoppings.
#[derive(Debug, Clone)]
pub struct UnitCell {
    pub orbitals: Vec<Orbital>,
    pub hops: Vec<Hop>,
}

impl UnitCell {
    /// Index of the orbital with the given sublattice and slot.
    pub fn orbital_index(&self, sub: Sublattice, slot: usize) -> Option<usize> {
        self.orbitals
            .iter()
            .position(|o| o.sublattice == sub && o.slot == slot)
    }
}

/// Builds the unit cell of `spec`: orbital list (basis order: A_0..A_{n-1},
/// B, C_0..C_{n-1}) and the hopping list.
///
/// Stub: A_m at `m*a`, C_m at `(m+1/2)*a`, B pendant at the cell origin;
/// backbone hops A_m–C_m and C_m–A_{m+1} are `-t`, the pendant hop B–A_0 is
/// `-alpha*t`. Diamond: same backbone, B sits on the first plaquette at
/// `a/2` with hops A_0–B and B–A_1 equal to `-t`.
pub fn build_unit_cell(spec: &ChainSpec) -> Result<UnitCell> {
    spec.validate()?;
    let n = spec.n;
    let a = spec.a;
    let t = spec.t;

    let mut orbitals = Vec::with_capacity(2 * n + 1);
    for m in 0..n {
        orbitals.push(Orbital { sublattice: Sublattice::A, cell: 0, slot: m, position: m as f64 * a });
    }
    let b_position = match spec.family {
        Family::Stub => 0.0,
        Family::Diamond => 0.5 * a,
    };
    orbitals.push(Orbital { sublattice: Sublattice::B, cell: 0, slot: 0, position: b_position });
    for m in 0..n {
        orbitals.push(Orbital { sublattice: Sublattice::C, cell: 0, slot: m, position: (m as f64 + 0.5) * a });
    }

    let ia = |m: usize| m;
    let ib = n;
    let ic = |m: usize| n + 1 + m;

    let mut hops = Vec::with_capacity(2 * n + 2);
    for m in 0..n {
        hops.push(Hop { i: ia(m), j: ic(m), cell_offset: 0, amplitude: -t });
        if m + 1 < n {
            hops.push(Hop { i: ic(m), j: ia(m + 1), cell_offset: 0, amplitude: -t });
        } else {
            hops.push(Hop { i: ic(m), j: ia(0), cell_offset: 1, amplitude: -t });
        }
    }
    match spec.family {
        Family::Stub => {
            hops.push(Hop { i: ib, j: ia(0), cell_offset: 0, amplitude: -spec.alpha_eff() * t });
        }
        Family::Diamond => {
            hops.push(Hop { i: ia(0), j: ib, cell_offset: 0, amplitude: -t });
            if n > 1 {
                hops.push(Hop { i: ib, j: ia(1), cell_offset: 0, amplitude: -t });
            } else {
                hops.push(Hop { i: ib, j: ia(0), cell_offset: 1, amplitude: -t });
            }
        }
    }

    Ok(UnitCell { orbitals, hops })
}

/// Spin-resolved Bloch Hamiltonian at momentum `k` (inverse length units) in
/// the periodic gauge. Hermitian by construction; real for `n = 1`.
pub fn bloch_hamiltonian(spec: &ChainSpec, k: f64, sector: SpinSector) -> Result<DMatrix<Complex64>> {
    let cell = build_unit_cell(spec)?;
    Ok(bloch_from_cell(spec, &cell, k, sector))
}

/// Same as [`bloch_hamiltonian`] but reuses a prebuilt unit cell.
pub fn bloch_from_cell(
    spec: &ChainSpec,
    cell: &UnitCell,
    k: f64,
    sector: SpinSector,
) -> DMatrix<Complex64> {
    let dim = cell.orbitals.len();
    let span = spec.cell_len();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for hop in &cell.hops {
        let dx = cell.orbitals[hop.j].position + hop.cell_offset as f64 * span
            - cell.orbitals[hop.i].position;
        let phase = Complex64::new(0.0, k * dx).exp() * hop.amplitude;
        h[(hop.i, hop.j)] += phase;
        h[(hop.j, hop.i)] += phase.conj();
    }
    let onsite = sector.z() * spec.js * 0.5;
    for (idx, orb) in cell.orbitals.iter().enumerate() {
        if orb.sublattice.is_magnetic() {
            h[(idx, idx)] += Complex64::new(onsite, 0.0);
        }
    }
    h
}

/// Boundary condition for finite real-space chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Sparse symmetric real matrix stored as upper-triangle coordinates.
#[derive(Debug, Clone)]
pub struct SparseSym {
    dim: usize,
    /// (row, col, value) with row <= col, unique keys, sorted.
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
        m
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        y
    }

    /// Maximum |i - j| over stored couplings.
    pub fn bandwidth(&self) -> usize {
        self.entries.iter().map(|&(i, j, _)| j - i).max().unwrap_or(0)
    }

    fn from_map(dim: usize, map: std::collections::BTreeMap<(usize, usize), f64>) -> Self {
        let entries = map
            .into_iter()
            .filter(|&(_, v)| v != 0.0)
            .map(|((i, j), v)| (i, j, v))
            .collect();
        SparseSym { dim, entries }
    }
}

/// Orbitals of a finite chain of `num_cells` cells, in cell-major order
/// matching [`real_space_hamiltonian`] row indices.
pub fn real_space_orbitals(spec: &ChainSpec, num_cells: usize) -> Result<Vec<Orbital>> {
    let cell = build_unit_cell(spec)?;
    let span = spec.cell_len();
    let mut out = Vec::with_capacity(num_cells * cell.orbitals.len());
    for c in 0..num_cells {
        for orb in &cell.orbitals {
            out.push(Orbital {
                cell: c as i64,
                position: orb.position + c as f64 * span,
                ..*orb
            });
        }
    }
    Ok(out)
}

/// Real-space Hamiltonian of `num_cells` cells with the given boundary
/// condition. With `Periodic` its spectrum equals the union of Bloch
/// eigenvalues over the commensurate k-mesh.
pub fn real_space_hamiltonian(
    spec: &ChainSpec,
    num_cells: usize,
    boundary: Boundary,
    sector: SpinSector,
) -> Result<SparseSym> {
    if num_cells < 2 {
        return Err(Error::InvalidSpec(format!(
            "num_cells must be >= 2, got {num_cells}"
        )));
    }
    let cell = build_unit_cell(spec)?;
    let per = cell.orbitals.len();
    let dim = num_cells * per;
    let mut map = std::collections::BTreeMap::new();
    let mut add = |i: usize, j: usize, v: f64| {
        let key = if i <= j { (i, j) } else { (j, i) };
        *map.entry(key).or_insert(0.0) += v;
    };
    for c in 0..num_cells {
        for hop in &cell.hops {
            let c2 = c + hop.cell_offset as usize;
            let c2 = if c2 < num_cells {
                c2
            } else if boundary == Boundary::Periodic {
                c2 % num_cells
            } else {
                continue;
            };
            add(c * per + hop.i, c2 * per + hop.j, hop.amplitude);
        }
        let onsite = sector.z() * spec.js * 0.5;
        for (idx, orb) in cell.orbitals.iter().enumerate() {
            if orb.sublattice.is_magnetic() {
                add(c * per + idx, c * per + idx, onsite);
            }
        }
    }
    Ok(SparseSym::from_map(dim, map))
}

/// Uniform k-mesh of `num_k` points `k_m = 2π m / (num_k a_n)`, m = 0..num_k.
/// Contains k = 0 always and k = π/a_n when `num_k` is even.
pub fn kmesh(spec: &ChainSpec, num_k: usize) -> Vec<f64> {
    let step = 2.0 * std::f64::consts::PI / (num_k as f64 * spec.cell_len());
    (0..num_k).map(|m| m as f64 * step).collect()
}
