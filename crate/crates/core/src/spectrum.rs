//! Band structures, flat-band identification, compact localized states and
//! the half-filling gap.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::chain::{
    build_unit_cell, bloch_from_cell, kmesh, ChainSpec, Family, Orbital, SpinSector, Sublattice,
};
use crate::eigen::{fix_phase, hermitian_eigen};
use crate::error::{Error, Result};

/// Energy-degeneracy threshold (units of t) used when clustering bands for
/// the continuity tie-break.
const TIE_EPS: f64 = 1e-8;

/// Spin-resolved band structure on a uniform k-mesh.
///
/// Bands are sorted ascending at each k; within degenerate clusters the
/// eigenvectors are rotated for maximal overlap with the previous k-point,
/// keeping band indices stable through crossings and touchings. Eigenvectors
/// are stored in the periodic gauge (orbital positions inside the Bloch
/// phases), so they double as the cell-periodic states entering the quantum
/// metric.
#[derive(Debug, Clone)]
pub struct BandStructure {
    pub spec: ChainSpec,
    pub sector: SpinSector,
    /// k-points `2π m / (num_k a_n)`, m = 0..num_k.
    pub kmesh: Vec<f64>,
    /// energies[band][k] in units of t.
    pub energies: Vec<Vec<f64>>,
    /// Per k-point: eigenvectors as columns, matching the band order.
    pub states: Vec<DMatrix<Complex64>>,
}

impl BandStructure {
    pub fn num_bands(&self) -> usize {
        self.energies.len()
    }

    pub fn num_k(&self) -> usize {
        self.kmesh.len()
    }

    pub fn energy(&self, band: usize, ki: usize) -> f64 {
        self.energies[band][ki]
    }

    /// Component of the band eigenvector on an orbital basis index.
    pub fn amplitude(&self, ki: usize, orbital: usize, band: usize) -> Complex64 {
        self.states[ki][(orbital, band)]
    }

    /// Index of the flat band: the band nearest to `z_sigma JS/2` that is
    /// actually flat. Identification is by value, not index arithmetic.
    pub fn flat_band_index(&self) -> Result<usize> {
        let target = self.sector.z() * self.spec.js * 0.5;
        let mut best: Option<(usize, f64)> = None;
        for (b, row) in self.energies.iter().enumerate() {
            let dev = row.iter().map(|e| (e - target).abs()).fold(0.0, f64::max);
            if best.map_or(true, |(_, d)| dev < d) {
                best = Some((b, dev));
            }
        }
        let (band, dev) = best.ok_or_else(|| Error::Numerical("empty band structure".into()))?;
        if dev > 1e-9 * self.spec.t {
            return Err(Error::Numerical(format!(
                "no flat band at {target}: nearest band deviates by {dev}"
            )));
        }
        Ok(band)
    }

    /// Max-minus-min spread of a band over the mesh.
    pub fn band_spread(&self, band: usize) -> f64 {
        let row = &self.energies[band];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// Diagonalizes the Bloch Hamiltonians of `spec`/`sector` on a `num_k`-point
/// mesh (`num_k` even, ≥ 4, so k = 0 and k = π/a_n are on-mesh).
pub fn diagonalize_bands(spec: &ChainSpec, sector: SpinSector, num_k: usize) -> Result<BandStructure> {
    spec.validate()?;
    if num_k < 4 || num_k % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "num_k must be even and >= 4, got {num_k}"
        )));
    }
    let cell = build_unit_cell(spec)?;
    let ks = kmesh(spec, num_k);

    let solved: Vec<_> = ks
        .par_iter()
        .map(|&k| {
            let h = bloch_from_cell(spec, &cell, k, sector);
            hermitian_eigen(&h).map_err(|f| Error::EigensolverStalled {
                k,
                off: f.off_norm,
                sweeps: f.sweeps,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let nb = cell.orbitals.len();
    let mut energies = vec![vec![0.0; num_k]; nb];
    let mut states: Vec<DMatrix<Complex64>> = Vec::with_capacity(num_k);
    let tie = TIE_EPS * spec.t;

    for (ki, eig) in solved.into_iter().enumerate() {
        for b in 0..nb {
            energies[b][ki] = eig.values[b];
        }
        let mut vecs = eig.vectors;
        if ki > 0 {
            align_degenerate_clusters(&eig.values, &mut vecs, &states[ki - 1], tie);
        }
        states.push(vecs);
    }

    // The first k-point had no neighbor to seed its degenerate clusters
    // (band touchings can sit exactly at k = 0); align it backward now.
    if num_k >= 2 {
        let vals0: Vec<f64> = (0..nb).map(|b| energies[b][0]).collect();
        let (first, rest) = states.split_at_mut(1);
        align_degenerate_clusters(&vals0, &mut first[0], &rest[0], tie);
    }

    Ok(BandStructure { spec: spec.clone(), sector, kmesh: ks, energies, states })
}

/// Rotates each degenerate cluster of columns so they maximally overlap the
/// previous k-point's columns at the same band slots. Non-degenerate bands
/// are left as the eigensolver produced them.
fn align_degenerate_clusters(
    values: &[f64],
    vecs: &mut DMatrix<Complex64>,
    prev: &DMatrix<Complex64>,
    tie: f64,
) {
    let nb = values.len();
    let mut start = 0;
    while start < nb {
        let mut end = start;
        while end + 1 < nb && (values[end + 1] - values[end]).abs() <= tie {
            end += 1;
        }
        if end > start {
            let m = end - start + 1;
            let cluster = vecs.columns(start, m).clone_owned();
            let mut chosen: Vec<DVector<Complex64>> = Vec::with_capacity(m);
            for slot in start..=end {
                let target = prev.column(slot);
                // project the previous vector onto the cluster span
                let coeffs = cluster.adjoint() * target;
                let mut cand = &cluster * coeffs;
                // orthogonalize against already-chosen columns
                for c in &chosen {
                    let ov = c.dotc(&cand);
                    cand -= c * ov;
                }
                let norm = cand.norm();
                if norm > 1e-6 {
                    cand /= Complex64::new(norm, 0.0);
                } else {
                    // continuity target lies outside the remaining span; fall
                    // back to the original eigenvector, re-orthogonalized
                    cand = cluster.column(slot - start).clone_owned();
                    for c in &chosen {
                        let ov = c.dotc(&cand);
                        cand -= c * ov;
                    }
                    let n2 = cand.norm();
                    if n2 > 1e-9 {
                        cand /= Complex64::new(n2, 0.0);
                    }
                }
                fix_phase(cand.as_mut_slice());
                chosen.push(cand);
            }
            for (offset, c) in chosen.into_iter().enumerate() {
                vecs.set_column(start + offset, &c);
            }
        }
        start = end + 1;
    }
}

/// A compact localized state: normalized amplitudes on a finite orbital
/// support window (cells 0 and 1).
#[derive(Debug, Clone)]
pub struct CLSVector {
    pub amplitudes: Vec<(Orbital, f64)>,
    /// Overall normalization factor (1/sqrt(n alpha^2 + 2) for stub,
    /// 1/sqrt(2) for diamond).
    pub normalization: f64,
}

impl CLSVector {
    pub fn support_size(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|(_, a)| a * a).sum::<f64>().sqrt()
    }

    /// Embeds the state in a periodic chain of `num_cells` cells with the
    /// support starting at `base_cell`, in the row ordering of
    /// [`crate::chain::real_space_hamiltonian`].
    pub fn embed(&self, spec: &ChainSpec, num_cells: usize, base_cell: usize) -> Result<Vec<f64>> {
        let cell = build_unit_cell(spec)?;
        let per = cell.orbitals.len();
        let mut v = vec![0.0; num_cells * per];
        for (orb, amp) in &self.amplitudes {
            let c = (base_cell + orb.cell as usize) % num_cells;
            let idx = cell
                .orbital_index(orb.sublattice, orb.slot)
                .ok_or_else(|| Error::Numerical("orbital missing from cell".into()))?;
            v[c * per + idx] += *amp;
        }
        Ok(v)
    }
}

/// Builds the flat-band compact localized state of `spec` (defined at
/// JS = 0, where it is annihilated by the Hamiltonian; at JS ≠ 0 it remains
/// an exact eigenstate at `z_sigma JS/2` because its support is purely
/// magnetic).
///
/// Stub: weight 1 on the B orbitals of two consecutive cells (relative sign
/// `(-1)^(n+1)`) and alternating `-alpha, +alpha, ...` on the n C orbitals
/// between them; support n+2, norm factor `1/sqrt(n alpha^2 + 2)`.
/// Diamond: `(|B> - |C>)/sqrt(2)` on one plaquette; support 2.
pub fn construct_cls(spec: &ChainSpec) -> Result<CLSVector> {
    spec.validate()?;
    let n = spec.n;
    let a = spec.a;
    match spec.family {
        Family::Stub => {
            let alpha = spec.alpha_eff();
            let norm = 1.0 / (n as f64 * alpha * alpha + 2.0).sqrt();
            let mut amplitudes = Vec::with_capacity(n + 2);
            amplitudes.push((
                Orbital { sublattice: Sublattice::B, cell: 0, slot: 0, position: 0.0 },
                norm,
            ));
            let second_sign = if n % 2 == 0 { -1.0 } else { 1.0 };
            amplitudes.push((
                Orbital {
                    sublattice: Sublattice::B,
                    cell: 1,
                    slot: 0,
                    position: spec.cell_len(),
                },
                second_sign * norm,
            ));
            for m in 0..n {
                let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
                amplitudes.push((
                    Orbital {
                        sublattice: Sublattice::C,
                        cell: 0,
                        slot: m,
                        position: (m as f64 + 0.5) * a,
                    },
                    sign * alpha * norm,
                ));
            }
            Ok(CLSVector { amplitudes, normalization: norm })
        }
        Family::Diamond => {
            let norm = std::f64::consts::FRAC_1_SQRT_2;
            let amplitudes = vec![
                (
                    Orbital { sublattice: Sublattice::B, cell: 0, slot: 0, position: 0.5 * a },
                    norm,
                ),
                (
                    Orbital { sublattice: Sublattice::C, cell: 0, slot: 0, position: 0.5 * a },
                    -norm,
                ),
            ];
            Ok(CLSVector { amplitudes, normalization: norm })
        }
    }
}

/// Half-filling spectral gap between the last filled and first empty band.
#[derive(Debug, Clone, Copy)]
pub struct GapInfo {
    /// Gap in units of t (0 for gapless systems).
    pub delta: f64,
    /// True when bands touch the chemical potential.
    pub gapless: bool,
    /// Closed form, available for stub n = 1.
    pub closed_form: Option<f64>,
}

/// Closed-form gap for the stub n = 1 chain:
/// `JS` when `alpha >= JS/(sqrt(2) t)`, else
/// `sqrt(J^2S^2/4 + 4 alpha^2 t^2) - JS/2` (continuous at the crossover).
pub fn stub1_gap_closed_form(alpha: f64, js: f64, t: f64) -> f64 {
    let js = js.abs();
    if alpha * t >= js / std::f64::consts::SQRT_2 {
        js
    } else {
        (js * js / 4.0 + 4.0 * alpha * alpha * t * t).sqrt() - js / 2.0
    }
}

/// Computes the gap around mu = 0 from both spin sectors on a `num_k` mesh.
pub fn gap_delta_numerical(spec: &ChainSpec, num_k: usize) -> Result<GapInfo> {
    let eps = 1e-12 * spec.t;
    let mut highest_filled = f64::NEG_INFINITY;
    let mut lowest_empty = f64::INFINITY;
    let mut at_mu = false;
    for sector in [SpinSector::Up, SpinSector::Down] {
        let bands = diagonalize_bands(spec, sector, num_k)?;
        for row in &bands.energies {
            for &e in row {
                if e.abs() <= eps {
                    at_mu = true;
                } else if e < 0.0 {
                    highest_filled = highest_filled.max(e);
                } else {
                    lowest_empty = lowest_empty.min(e);
                }
            }
        }
    }
    if at_mu {
        return Ok(GapInfo { delta: 0.0, gapless: true, closed_form: None });
    }
    let delta = (lowest_empty - highest_filled).max(0.0);
    Ok(GapInfo { delta, gapless: delta <= eps, closed_form: None })
}

/// Gap `delta` of `spec`: closed form for the stub n = 1 chain, numerical
/// (4096-point mesh, scaled down with n) otherwise. Diamond chains are
/// flagged gapless (the filled and empty dispersive bands touch
/// quadratically at k = 0 or π depending on n's parity).
pub fn gap_delta(spec: &ChainSpec) -> Result<GapInfo> {
    spec.validate()?;
    if spec.family == Family::Stub && spec.n == 1 {
        let cf = stub1_gap_closed_form(spec.alpha_eff(), spec.js, spec.t);
        let gapless = cf <= 1e-12 * spec.t;
        return Ok(GapInfo { delta: cf, gapless, closed_form: Some(cf) });
    }
    let num_k = (4096 / spec.n).max(64);
    let num_k = if num_k % 2 == 0 { num_k } else { num_k + 1 };
    gap_delta_numerical(spec, num_k)
}

/// Dimension of the span of the `num_cells` translated CLS copies on a
/// periodic chain (numerical rank; equals the flat-band degeneracy).
pub fn cls_span_rank(spec: &ChainSpec, num_cells: usize) -> Result<usize> {
    let cls = construct_cls(spec)?;
    let cell = build_unit_cell(spec)?;
    let per = cell.orbitals.len();
    let dim = num_cells * per;
    let mut m = DMatrix::<f64>::zeros(dim, num_cells);
    for c in 0..num_cells {
        let v = cls.embed(spec, num_cells, c)?;
        for (i, x) in v.iter().enumerate() {
            m[(i, c)] = *x;
        }
    }
    let svd = m.svd(false, false);
    let tol = 1e-10 * svd.singular_values.max();
    Ok(svd.singular_values.iter().filter(|&&s| s > tol).count())
}

/// Closed-form stub n = 1 eigenvalues (flat band and the two dispersive
/// bands) used as test oracles.
pub fn stub1_closed_form_energies(alpha: f64, js: f64, t: f64, z: f64, k: f64, a: f64) -> [f64; 3] {
    let cos = (k * a / 2.0).cos();
    let delta = js * js / 4.0 + 4.0 * alpha * alpha * t * t + 16.0 * t * t * cos * cos;
    let fb = z * js / 2.0;
    let em = 0.5 * (fb - delta.sqrt());
    let ep = 0.5 * (fb + delta.sqrt());
    [em, fb, ep]
}

/// Closed-form diamond n = 1 eigenvalues.
pub fn diamond1_closed_form_energies(js: f64, t: f64, z: f64, k: f64, a: f64) -> [f64; 3] {
    let eps0 = -2.0 * t * (k * a / 2.0).cos();
    let delta = js * js / 4.0 + 8.0 * eps0 * eps0;
    let fb = z * js / 2.0;
    let em = 0.5 * (fb - delta.sqrt());
    let ep = 0.5 * (fb + delta.sqrt());
    [em, fb, ep]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{real_space_hamiltonian, Boundary};
    use approx::assert_abs_diff_eq;

    #[test]
    fn stub1_bands_match_closed_form_pointwise() {
        let spec = ChainSpec::stub(1, 1.0).with_js(1.0);
        let bands = diagonalize_bands(&spec, SpinSector::Up, 64).unwrap();
        for (ki, &k) in bands.kmesh.iter().enumerate() {
            let mut expect = stub1_closed_form_energies(1.0, 1.0, 1.0, 1.0, k, 1.0);
            expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for b in 0..3 {
                assert_abs_diff_eq!(bands.energy(b, ki), expect[b], epsilon = 1e-11);
            }
        }
        // k = 0 explicitly: {-2, 0.5, 2.5}
        assert_abs_diff_eq!(bands.energy(0, 0), -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bands.energy(1, 0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(bands.energy(2, 0), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn diamond1_bands_match_closed_form_pointwise() {
        let spec = ChainSpec::diamond(1).with_js(1.0);
        let bands = diagonalize_bands(&spec, SpinSector::Up, 64).unwrap();
        for (ki, &k) in bands.kmesh.iter().enumerate() {
            let mut expect = diamond1_closed_form_energies(1.0, 1.0, 1.0, k, 1.0);
            expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for b in 0..3 {
                assert_abs_diff_eq!(bands.energy(b, ki), expect[b], epsilon = 1e-11);
            }
        }
        // zone boundary: bands touch, energies {0, 0.5, 0.5}
        let ki = 32; // k = pi/a on the 64-point mesh
        assert_abs_diff_eq!(bands.kmesh[ki], std::f64::consts::PI, epsilon = 1e-12);
        assert_abs_diff_eq!(bands.energy(0, ki), 0.0, epsilon = 1e-11);
        assert_abs_diff_eq!(bands.energy(1, ki), 0.5, epsilon = 1e-11);
        assert_abs_diff_eq!(bands.energy(2, ki), 0.5, epsilon = 1e-11);
    }

    #[test]
    fn flat_band_pinned_at_half_js() {
        for spec in [
            ChainSpec::stub(1, 1.0).with_js(1.0),
            ChainSpec::stub(4, 1.0).with_js(1.0),
            ChainSpec::diamond(1).with_js(1.0),
            ChainSpec::diamond(4).with_js(1.0),
        ] {
            for sector in [SpinSector::Up, SpinSector::Down] {
                let bands = diagonalize_bands(&spec, sector, 64).unwrap();
                let fb = bands.flat_band_index().unwrap();
                let target = sector.z() * 0.5;
                let dev = bands.energies[fb]
                    .iter()
                    .map(|e| (e - target).abs())
                    .fold(0.0, f64::max);
                assert!(dev <= 1e-9, "{spec:?} {sector}: flat-band deviation {dev}");
                assert!(bands.band_spread(fb) <= 1e-10, "flatness");
            }
        }
    }

    #[test]
    fn zero_js_flat_band_at_zero() {
        for spec in [ChainSpec::stub(2, 0.3), ChainSpec::diamond(3)] {
            let bands = diagonalize_bands(&spec, SpinSector::Up, 32).unwrap();
            let fb = bands.flat_band_index().unwrap();
            for &e in &bands.energies[fb] {
                assert!(e.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let spec = ChainSpec::stub(3, 0.4).with_js(0.6);
        let bands = diagonalize_bands(&spec, SpinSector::Down, 16).unwrap();
        for st in &bands.states {
            let gram = st.adjoint() * st;
            let eye = DMatrix::<Complex64>::identity(st.nrows(), st.ncols());
            assert!((gram - eye).norm() < 1e-10);
        }
    }

    #[test]
    fn sector_mirror_energies() {
        let spec = ChainSpec::stub(2, 0.5).with_js(0.7);
        let down = diagonalize_bands(&spec, SpinSector::Down, 16).unwrap();
        let up_flipped =
            diagonalize_bands(&ChainSpec::stub(2, 0.5).with_js(-0.7), SpinSector::Up, 16).unwrap();
        for b in 0..down.num_bands() {
            for ki in 0..16 {
                assert_abs_diff_eq!(
                    down.energy(b, ki),
                    up_flipped.energy(b, ki),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn deterministic_band_structure() {
        let spec = ChainSpec::diamond(2).with_js(0.9);
        let a = diagonalize_bands(&spec, SpinSector::Up, 32).unwrap();
        let b = diagonalize_bands(&spec, SpinSector::Up, 32).unwrap();
        assert_eq!(a.energies, b.energies);
        for (x, y) in a.states.iter().zip(b.states.iter()) {
            assert_eq!(x.as_slice(), y.as_slice());
        }
    }

    #[test]
    fn periodic_real_space_spectrum_equals_bloch_union() {
        let spec = ChainSpec::stub(1, 0.8); // JS = 0
        let h = real_space_hamiltonian(&spec, 4, Boundary::Periodic, SpinSector::Up)
            .unwrap()
            .to_dense();
        let mut rs: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let bands = diagonalize_bands(&spec, SpinSector::Up, 4).unwrap();
        let mut bloch: Vec<f64> = bands.energies.iter().flatten().copied().collect();
        bloch.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(rs.len(), bloch.len());
        for (x, y) in rs.iter().zip(bloch.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn cls_annihilated_and_minimal() {
        for spec in [
            ChainSpec::stub(1, 0.7),
            ChainSpec::stub(4, 0.3),
            ChainSpec::diamond(1),
            ChainSpec::diamond(5),
        ] {
            let cls = construct_cls(&spec).unwrap();
            let expected_support = match spec.family {
                Family::Stub => spec.n + 2,
                Family::Diamond => 2,
            };
            assert_eq!(cls.support_size(), expected_support);
            assert_abs_diff_eq!(cls.norm(), 1.0, epsilon = 1e-12);
            let cells = spec.n.max(4) + 2;
            let h = real_space_hamiltonian(&spec, cells, Boundary::Periodic, SpinSector::Up).unwrap();
            let v = cls.embed(&spec, cells, 1).unwrap();
            let hv = h.matvec(&v);
            let res = hv.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(res <= 1e-10, "{spec:?}: CLS residual {res}");
        }
    }

    #[test]
    fn cls_is_exact_eigenstate_at_nonzero_js() {
        let spec = ChainSpec::stub(3, 0.4).with_js(0.8);
        let cls = construct_cls(&spec).unwrap();
        let cells = 6;
        let h = real_space_hamiltonian(&spec, cells, Boundary::Periodic, SpinSector::Up).unwrap();
        let v = cls.embed(&spec, cells, 1).unwrap();
        let hv = h.matvec(&v);
        let res: f64 = hv
            .iter()
            .zip(v.iter())
            .map(|(y, x)| (y - 0.4 * x) * (y - 0.4 * x))
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-12, "CLS should sit at z JS/2 = 0.4, residual {res}");
    }

    #[test]
    fn cls_span_has_full_flat_band_degeneracy() {
        for spec in [ChainSpec::stub(1, 0.5), ChainSpec::stub(3, 0.5), ChainSpec::diamond(2)] {
            for cells in [4usize, 8] {
                assert_eq!(cls_span_rank(&spec, cells).unwrap(), cells);
            }
        }
    }

    #[test]
    fn gap_closed_form_examples() {
        // alpha >= JS/sqrt(2): delta = JS
        let g = gap_delta(&ChainSpec::stub(1, 1.0).with_js(0.1)).unwrap();
        assert_abs_diff_eq!(g.delta, 0.1, epsilon = 1e-12);
        // alpha << JS: delta = sqrt(JS^2/4 + 4 alpha^2) - JS/2
        let g = gap_delta(&ChainSpec::stub(1, 0.01).with_js(1.0)).unwrap();
        let expect = (0.25f64 + 4.0 * 0.0001).sqrt() - 0.5;
        assert_abs_diff_eq!(g.delta, expect, epsilon = 1e-12);
        assert_abs_diff_eq!(g.delta, 3.9984e-4, epsilon = 1e-8);
        // diamond: gapless with delta = 0
        let g = gap_delta(&ChainSpec::diamond(1).with_js(0.7)).unwrap();
        assert_eq!(g.delta, 0.0);
        assert!(g.gapless);
        let g = gap_delta(&ChainSpec::diamond(2).with_js(0.7)).unwrap();
        assert!(g.gapless, "diamond n=2 touches at k=0");
    }

    #[test]
    fn gap_closed_form_matches_numerical_for_stub1() {
        for (alpha, js) in [(1.0, 0.1), (0.3, 0.5), (0.05, 1.0), (0.8, 1.2)] {
            let spec = ChainSpec::stub(1, alpha).with_js(js);
            let cf = stub1_gap_closed_form(alpha, js, 1.0);
            let num = gap_delta_numerical(&spec, 4096).unwrap().delta;
            assert!(
                (cf - num).abs() <= 1e-8,
                "alpha={alpha} JS={js}: closed {cf} vs numerical {num}"
            );
        }
    }

    #[test]
    fn rejects_odd_or_tiny_mesh() {
        let spec = ChainSpec::stub(1, 1.0);
        assert!(diagonalize_bands(&spec, SpinSector::Up, 5).is_err());
        assert!(diagonalize_bands(&spec, SpinSector::Up, 2).is_err());
    }
}
