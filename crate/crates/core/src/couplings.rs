//! Carrier-mediated exchange couplings between localized spins at half
//! filling and T = 0.
//!
//! The production path is a k-space double sum over band pairs,
//!
//! ```text
//! J_ab(R) = sum_pq I_ab^pq(R),
//! I_ab^pq(R) = (JS)^2 / (2 N^2) * sum_{k,k'} e^{i(k-k')R} A^pq
//!              * (f(E^p_up(k)) - f(E^q_dn(k'))) / (E^p_up(k) - E^q_dn(k')),
//! ```
//!
//! with `A^pq = <a|u^p_k><u^p_k|b> <b|u^q_k'><u^q_k'|a>` built from the
//! periodic-gauge eigenvectors and `R` the true axis separation of the two
//! spins. Because the mesh is uniform, the phase factor depends on k and k'
//! only through the index offset `d = m - m'`; the engine therefore folds
//! the occupation/energy kernel into offset bins `c_d` once per band pair
//! (O(N^2)) and evaluates every requested distance from the bins (O(N) each).
//!
//! A real-space oracle cross-checks the engine: full diagonalization of the
//! finite chain and the exact T = 0 Lehmann double sum over eigenpairs,
//! which is the analytic frequency integral of the Green's-function
//! susceptibility in the limit of vanishing broadening.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::chain::{
    build_unit_cell, real_space_hamiltonian, Boundary, ChainSpec, SpinSector, Sublattice, UnitCell,
};
use crate::error::{Error, Result};
use crate::spectrum::{diagonalize_bands, BandStructure};

/// Numerical parameters of a coupling run.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ComputeConfig {
    /// k-mesh size N_c.
    pub num_k: usize,
    /// Chemical potential; the theory is evaluated at half filling, mu = 0.
    pub mu: f64,
    /// Temperature; fixed at 0.
    pub temperature: f64,
    /// Resolvent broadening knob. The Lehmann oracle is the analytic
    /// eta -> 0+ limit, so eta only documents the intended limit.
    pub eta: f64,
    /// Two energies closer than this are treated as degenerate.
    pub degenerate_eps: f64,
    /// |J| below this is flagged numerically unresolved.
    pub coupling_floor: f64,
}

impl Default for ComputeConfig {
    fn default() -> Self {
        ComputeConfig {
            num_k: 1024,
            mu: 0.0,
            temperature: 0.0,
            eta: 1e-3,
            degenerate_eps: 1e-9,
            coupling_floor: 1e-14,
        }
    }
}

impl ComputeConfig {
    pub fn with_num_k(mut self, num_k: usize) -> Self {
        self.num_k = num_k;
        self
    }

    pub fn validate(&self, spec: &ChainSpec) -> Result<()> {
        if self.mu != 0.0 {
            return Err(Error::InvalidConfig("only half filling (mu = 0) is supported".into()));
        }
        if self.temperature != 0.0 {
            return Err(Error::InvalidConfig("only T = 0 is supported".into()));
        }
        if !(self.eta > 0.0) {
            return Err(Error::InvalidConfig("eta must be > 0".into()));
        }
        let lo = 1e-12 * spec.t;
        let hi = 1e-6 * spec.t;
        if !(self.degenerate_eps >= lo && self.degenerate_eps <= hi) {
            return Err(Error::InvalidConfig(format!(
                "degenerate_eps must lie in [{lo:e}, {hi:e}], got {:e}",
                self.degenerate_eps
            )));
        }
        if !(self.coupling_floor > 0.0) {
            return Err(Error::InvalidConfig("coupling_floor must be > 0".into()));
        }
        Ok(())
    }
}

/// Pair of magnetic sublattices whose spins are coupled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OrbitalPair {
    pub first: Sublattice,
    pub second: Sublattice,
}

impl OrbitalPair {
    pub const BB: OrbitalPair = OrbitalPair { first: Sublattice::B, second: Sublattice::B };
    pub const BC: OrbitalPair = OrbitalPair { first: Sublattice::B, second: Sublattice::C };
    pub const CC: OrbitalPair = OrbitalPair { first: Sublattice::C, second: Sublattice::C };

    pub fn new(first: Sublattice, second: Sublattice) -> Result<Self> {
        if !first.is_magnetic() || !second.is_magnetic() {
            return Err(Error::InvalidSpec(
                "couplings are defined between magnetic (B/C) orbitals only".into(),
            ));
        }
        Ok(OrbitalPair { first, second })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let sub = |c: char| match c {
            'B' | 'b' => Ok(Sublattice::B),
            'C' | 'c' => Ok(Sublattice::C),
            other => Err(Error::InvalidSpec(format!("unknown sublattice '{other}' in pair"))),
        };
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 2 {
            return Err(Error::InvalidSpec(format!("pair must be two letters, got '{s}'")));
        }
        OrbitalPair::new(sub(chars[0])?, sub(chars[1])?)
    }

    pub fn swapped(self) -> Self {
        OrbitalPair { first: self.second, second: self.first }
    }
}

impl std::fmt::Display for OrbitalPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.first, self.second)
    }
}

/// One computed coupling.
#[derive(Debug, Clone)]
pub struct CouplingValue {
    /// Spin separation along the chain axis (length units).
    pub r: f64,
    /// Coupling in units of t; negative = ferromagnetic.
    pub j: f64,
    /// Band-resolved contributions I^pq, when requested.
    pub contributions: Option<Vec<((usize, usize), f64)>>,
    /// (k,k') pairs excluded by the degenerate-denominator rule.
    pub excluded_pairs: u64,
    /// |Im J| discarded after the reality check.
    pub imag_residue: f64,
    /// False when |J| sits below the numerical floor.
    pub resolved: bool,
    /// Stability under mesh halving (None when not assessed).
    pub converged: Option<bool>,
}

/// Couplings of one pair over a set of distances.
#[derive(Debug, Clone)]
pub struct CouplingTable {
    pub spec: ChainSpec,
    pub pair: OrbitalPair,
    pub num_k: usize,
    pub entries: Vec<CouplingValue>,
}

impl CouplingTable {
    /// Entries usable for fitting: resolved and (when assessed) converged.
    pub fn usable(&self) -> impl Iterator<Item = &CouplingValue> {
        self.entries
            .iter()
            .filter(|e| e.resolved && e.converged.unwrap_or(true))
    }
}

/// T = 0 occupation with the degenerate-at-mu convention: 1 below, 0 above,
/// 1/2 within `eps` of mu (band touchings sit exactly at mu on even meshes;
/// their measure-zero weight drops out as the mesh grows).
fn occupation(e: f64, mu: f64, eps: f64) -> f64 {
    if (e - mu).abs() <= eps {
        0.5
    } else if e < mu {
        1.0
    } else {
        0.0
    }
}

fn occupations(bands: &BandStructure, mu: f64, eps: f64) -> Vec<Vec<f64>> {
    bands
        .energies
        .iter()
        .map(|row| row.iter().map(|&e| occupation(e, mu, eps)).collect())
        .collect()
}

/// All separations r >= 0 realizable between `pair.first` (slot 0) and any
/// `pair.second` orbital, up to `r_max`. Self-pairs (same sublattice, r = 0)
/// are excluded; distinct orbitals at the same axis position (diamond B/C)
/// give a legitimate r = 0.
pub fn allowed_separations(spec: &ChainSpec, pair: OrbitalPair, r_max: f64) -> Result<Vec<f64>> {
    let cell = build_unit_cell(spec)?;
    let span = spec.cell_len();
    let pos_a = anchor_position(&cell, pair.first)?;
    let mut out = Vec::new();
    for orb in cell.orbitals.iter().filter(|o| o.sublattice == pair.second) {
        let base = orb.position - pos_a;
        let mut c = ((-base) / span).ceil() as i64 - 1;
        loop {
            let r = base + c as f64 * span;
            if r > r_max + 1e-9 {
                break;
            }
            if r >= -1e-9 {
                let is_self = pair.first == pair.second && r.abs() < 1e-9;
                if !is_self {
                    out.push(r.max(0.0));
                }
            }
            c += 1;
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(out)
}

fn anchor_position(cell: &UnitCell, sub: Sublattice) -> Result<f64> {
    cell.orbitals
        .iter()
        .find(|o| o.sublattice == sub && o.slot == 0)
        .map(|o| o.position)
        .ok_or_else(|| Error::InvalidSpec(format!("no {sub} orbital in cell")))
}

/// Orbital basis indices realizing separation `r` for `pair`: the slot-0
/// anchor of `pair.first` and the matching `pair.second` orbital, plus the
/// cell offset between them.
fn resolve_pair(spec: &ChainSpec, pair: OrbitalPair, r: f64) -> Result<(usize, usize, i64)> {
    let cell = build_unit_cell(spec)?;
    let span = spec.cell_len();
    let ia = cell
        .orbitals
        .iter()
        .position(|o| o.sublattice == pair.first && o.slot == 0)
        .ok_or_else(|| Error::InvalidSpec(format!("no {} orbital", pair.first)))?;
    let pos_a = cell.orbitals[ia].position;
    for (ib, orb) in cell.orbitals.iter().enumerate() {
        if orb.sublattice != pair.second {
            continue;
        }
        let frac = (r - (orb.position - pos_a)) / span;
        let rounded = frac.round();
        if (frac - rounded).abs() < 1e-9 {
            if pair.first == pair.second && r.abs() < 1e-9 {
                return Err(Error::SeparationNotAllowed { r, pair: pair.to_string() });
            }
            return Ok((ia, ib, rounded as i64));
        }
    }
    Err(Error::SeparationNotAllowed { r, pair: pair.to_string() })
}

/// The offset-binned double-k kernel for one band pair: returns
/// `c_d = sum_{m-m'=d} w1[m] w2[m'] g(E1[m], E2[m'])` for d in
/// -(N-1)..=(N-1), plus the exclusion count.
fn offset_bins(
    w1: &[Complex64],
    w2: &[Complex64],
    e1: &[f64],
    e2: &[f64],
    f1: &[f64],
    f2: &[f64],
    eps: f64,
) -> (Vec<Complex64>, u64) {
    let n = w1.len();
    let mut bins = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
    let mut excluded = 0u64;
    for (d_idx, bin) in bins.iter_mut().enumerate() {
        let d = d_idx as i64 - (n as i64 - 1);
        let m_lo = d.max(0) as usize;
        let m_hi = ((n as i64 + d).min(n as i64)) as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in m_lo..m_hi {
            let mp = (m as i64 - d) as usize;
            let df = f1[m] - f2[mp];
            if df == 0.0 {
                continue;
            }
            let de = e1[m] - e2[mp];
            if de.abs() < eps {
                excluded += 1;
                continue;
            }
            acc += w1[m] * w2[mp] * (df / de);
        }
        *bin = acc;
    }
    (bins, excluded)
}

struct PairKernelOutput {
    band_pair: (usize, usize),
    /// I^pq per requested r, complex before the reality check.
    values: Vec<Complex64>,
    excluded: u64,
}

/// Evaluates J for every `r` in `rs` from prebuilt band structures on a
/// common mesh. Set `with_contributions` to keep the I^pq decomposition.
pub fn band_sum_batch(
    up: &BandStructure,
    dn: &BandStructure,
    pair: OrbitalPair,
    rs: &[f64],
    config: &ComputeConfig,
    with_contributions: bool,
) -> Result<Vec<CouplingValue>> {
    let spec = &up.spec;
    config.validate(spec)?;
    if up.num_k() != dn.num_k() {
        return Err(Error::InvalidConfig("sector meshes differ".into()));
    }
    let n = up.num_k();
    let nb = up.num_bands();
    let span = spec.cell_len();
    let eps = config.degenerate_eps;
    let pref = spec.js * spec.js / (2.0 * (n as f64) * (n as f64));

    // group target distances by the orbital slot that realizes them
    let mut groups: Vec<((usize, usize), Vec<(usize, f64)>)> = Vec::new();
    for (ri, &r) in rs.iter().enumerate() {
        let (ia, ib, _cell) = resolve_pair(spec, pair, r)?;
        match groups.iter_mut().find(|(key, _)| *key == (ia, ib)) {
            Some((_, list)) => list.push((ri, r)),
            None => groups.push(((ia, ib), vec![(ri, r)])),
        }
    }

    let f_up = occupations(up, config.mu, eps);
    let f_dn = occupations(dn, config.mu, eps);

    let mut totals = vec![Complex64::new(0.0, 0.0); rs.len()];
    let mut excluded_total = 0u64;
    let mut contribs: Vec<Vec<((usize, usize), f64)>> = vec![Vec::new(); rs.len()];

    for ((ia, ib), targets) in groups {
        // phase tables e^{i k_d r} with k_d = 2 pi d / (N a_n)
        let phase_step = 2.0 * std::f64::consts::PI / (n as f64 * span);
        let phases: Vec<Vec<Complex64>> = targets
            .iter()
            .map(|&(_, r)| {
                (0..2 * n - 1)
                    .map(|d_idx| {
                        let d = d_idx as i64 - (n as i64 - 1);
                        Complex64::new(0.0, phase_step * d as f64 * r).exp()
                    })
                    .collect()
            })
            .collect();

        // skip band pairs whose occupations are identical everywhere
        let constant = |f: &Vec<f64>| {
            let first = f[0];
            f.iter().all(|&x| x == first).then_some(first)
        };
        let active: Vec<(usize, usize)> = (0..nb)
            .flat_map(|p| (0..nb).map(move |q| (p, q)))
            .filter(|&(p, q)| match (constant(&f_up[p]), constant(&f_dn[q])) {
                (Some(a), Some(b)) => a != b,
                _ => true,
            })
            .collect();

        let outputs: Vec<PairKernelOutput> = active
            .par_iter()
            .map(|&(p, q)| {
                let w1: Vec<Complex64> = (0..n)
                    .map(|m| up.amplitude(m, ia, p) * up.amplitude(m, ib, p).conj())
                    .collect();
                let w2: Vec<Complex64> = (0..n)
                    .map(|m| dn.amplitude(m, ib, q) * dn.amplitude(m, ia, q).conj())
                    .collect();
                let (bins, excluded) =
                    offset_bins(&w1, &w2, &up.energies[p], &dn.energies[q], &f_up[p], &f_dn[q], eps);
                let values: Vec<Complex64> = phases
                    .iter()
                    .map(|ph| {
                        bins.iter().zip(ph.iter()).map(|(c, e)| c * e).sum::<Complex64>() * pref
                    })
                    .collect();
                PairKernelOutput { band_pair: (p, q), values, excluded }
            })
            .collect();

        // fixed-order reduction keeps results identical across worker counts
        for out in &outputs {
            excluded_total += out.excluded;
            for (ti, &(ri, _)) in targets.iter().enumerate() {
                totals[ri] += out.values[ti];
                if with_contributions {
                    contribs[ri].push((out.band_pair, out.values[ti].re));
                }
            }
        }
    }

    let floor = config.coupling_floor * spec.t;
    rs.iter()
        .enumerate()
        .map(|(ri, &r)| {
            let z = totals[ri];
            let resolved = z.re.abs() >= floor;
            if resolved && z.im.abs() > 1e-12 * z.re.abs().max(100.0 * floor) {
                return Err(Error::Numerical(format!(
                    "imaginary residue {:e} exceeds 1e-12 |J| = {:e} at r = {r}",
                    z.im.abs(),
                    z.re.abs()
                )));
            }
            let mut c = std::mem::take(&mut contribs[ri]);
            c.sort_by_key(|&(pq, _)| pq);
            Ok(CouplingValue {
                r,
                j: z.re,
                contributions: with_contributions.then_some(c),
                excluded_pairs: excluded_total,
                imag_residue: z.im.abs(),
                resolved,
                converged: None,
            })
        })
        .collect()
}

/// Couples `pair` at separation `r` by the k-space band decomposition,
/// returning the full I^pq contribution map.
pub fn coupling_band_sum(
    spec: &ChainSpec,
    pair: OrbitalPair,
    r: f64,
    config: &ComputeConfig,
) -> Result<CouplingValue> {
    spec.validate()?;
    config.validate(spec)?;
    let up = diagonalize_bands(spec, SpinSector::Up, config.num_k)?;
    let dn = diagonalize_bands(spec, SpinSector::Down, config.num_k)?;
    let mut v = band_sum_batch(&up, &dn, pair, &[r], config, true)?;
    Ok(v.remove(0))
}

/// Coupling curve for `pair` over every allowed separation up to `r_max`,
/// with a per-distance convergence flag from a mesh-halving comparison.
pub fn coupling_curve(
    spec: &ChainSpec,
    pair: OrbitalPair,
    r_max: f64,
    config: &ComputeConfig,
) -> Result<CouplingTable> {
    spec.validate()?;
    config.validate(spec)?;
    if r_max < 3.0 * spec.cell_len() {
        return Err(Error::InvalidConfig(format!(
            "r_max must cover at least 3 unit cells ({})",
            3.0 * spec.cell_len()
        )));
    }
    if config.num_k % 4 != 0 || config.num_k < 8 {
        return Err(Error::InvalidConfig(
            "curve evaluation needs num_k divisible by 4 (mesh-halving check)".into(),
        ));
    }
    let rs = allowed_separations(spec, pair, r_max)?;
    if rs.is_empty() {
        return Err(Error::InsufficientData("no allowed separations below r_max".into()));
    }
    let up = diagonalize_bands(spec, SpinSector::Up, config.num_k)?;
    let dn = diagonalize_bands(spec, SpinSector::Down, config.num_k)?;
    let mut full = band_sum_batch(&up, &dn, pair, &rs, config, false)?;

    let half_cfg = ComputeConfig { num_k: config.num_k / 2, ..config.clone() };
    let up_h = diagonalize_bands(spec, SpinSector::Up, half_cfg.num_k)?;
    let dn_h = diagonalize_bands(spec, SpinSector::Down, half_cfg.num_k)?;
    let half = band_sum_batch(&up_h, &dn_h, pair, &rs, &half_cfg, false)?;

    let floor = config.coupling_floor * spec.t;
    for (entry, coarse) in full.iter_mut().zip(half.iter()) {
        let scale = entry.j.abs().max(floor);
        entry.converged = Some((entry.j - coarse.j).abs() <= 5e-3 * scale);
    }

    Ok(CouplingTable { spec: spec.clone(), pair, num_k: config.num_k, entries: full })
}

/// Real-space oracle: builds the finite chain, diagonalizes both spin
/// sectors in full, and evaluates the exact T = 0 Lehmann double sum
/// (occupied-up x unoccupied-down plus the conjugate block) -- the analytic
/// frequency integral of the susceptibility as the broadening vanishes.
///
/// With `Periodic` boundary and `num_cells = N_c` this matches the band sum
/// on the same mesh to near machine precision. With `Open` boundary the
/// result is additionally checked for boundary sensitivity by doubling
/// `num_cells`; a shift above 1% fails with [`Error::InsufficientSize`].
pub fn coupling_oracle_realspace(
    spec: &ChainSpec,
    pair: OrbitalPair,
    r: f64,
    num_cells: usize,
    boundary: Boundary,
    config: &ComputeConfig,
) -> Result<f64> {
    spec.validate()?;
    config.validate(spec)?;
    let j = oracle_once(spec, pair, r, num_cells, boundary, config, None)?;
    if boundary == Boundary::Open {
        let j2 = oracle_once(spec, pair, r, num_cells * 2, boundary, config, None)?;
        let scale = j.abs().max(config.coupling_floor * spec.t);
        if (j - j2).abs() > 0.01 * scale {
            return Err(Error::InsufficientSize(format!(
                "doubling num_cells moves J from {j:e} to {j2:e} (> 1%)"
            )));
        }
    }
    Ok(j)
}

/// Single oracle evaluation; `base_cell` pins the absolute cell of the first
/// spin (used to probe translational invariance).
pub fn oracle_once(
    spec: &ChainSpec,
    pair: OrbitalPair,
    r: f64,
    num_cells: usize,
    boundary: Boundary,
    config: &ComputeConfig,
    base_cell: Option<usize>,
) -> Result<f64> {
    let (ia, ib, cell_off) = resolve_pair(spec, pair, r)?;
    if cell_off < 0 {
        return Err(Error::SeparationNotAllowed { r, pair: pair.to_string() });
    }
    let per = spec.orbitals_per_cell();
    let cell_off = cell_off as usize;
    if cell_off + 1 > num_cells {
        return Err(Error::InsufficientSize(format!(
            "separation {r} spans {cell_off} cells but the chain has {num_cells}"
        )));
    }
    let base = match (base_cell, boundary) {
        (Some(b), _) => b,
        (None, Boundary::Periodic) => 0,
        // center the pair away from the open edges
        (None, Boundary::Open) => (num_cells - cell_off - 1) / 2,
    };
    if boundary == Boundary::Open && base + cell_off >= num_cells {
        return Err(Error::InsufficientSize("pair does not fit at the requested base cell".into()));
    }
    let site_a = base * per + ia;
    let site_b = (base + cell_off) % num_cells * per + ib;

    let eps = config.degenerate_eps;
    let mut sector_data = Vec::with_capacity(2);
    for sector in [SpinSector::Up, SpinSector::Down] {
        let h = real_space_hamiltonian(spec, num_cells, boundary, sector)?.to_dense();
        let eig = h.symmetric_eigen();
        let dim = eig.eigenvalues.len();
        let mut rows: Vec<(f64, f64, f64)> = Vec::with_capacity(dim); // (E, f, w)
        for m in 0..dim {
            let e = eig.eigenvalues[m];
            let f = occupation(e, config.mu, eps);
            let col = eig.eigenvectors.column(m);
            rows.push((e, f, col[site_a] * col[site_b]));
        }
        sector_data.push(rows);
    }
    let (up, dn) = (&sector_data[0], &sector_data[1]);
    let mut j = 0.0;
    for &(e1, f1, w1) in up {
        if w1 == 0.0 {
            continue;
        }
        for &(e2, f2, w2) in dn {
            let df = f1 - f2;
            if df == 0.0 {
                continue;
            }
            let de = e1 - e2;
            if de.abs() < eps {
                continue;
            }
            j += w1 * w2 * (df / de);
        }
    }
    Ok(0.5 * spec.js * spec.js * j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics;
    use approx::assert_abs_diff_eq;

    fn cfg(num_k: usize) -> ComputeConfig {
        ComputeConfig::default().with_num_k(num_k)
    }

    #[test]
    fn allowed_separations_by_family() {
        // stub BB: multiples of a_n
        let spec = ChainSpec::stub(2, 0.3).with_js(0.1);
        let rs = allowed_separations(&spec, OrbitalPair::BB, 6.0).unwrap();
        assert_eq!(rs, vec![2.0, 4.0, 6.0]);
        // stub BC: half-integer offsets
        let rs = allowed_separations(&spec, OrbitalPair::BC, 3.0).unwrap();
        assert_eq!(rs, vec![0.5, 1.5, 2.5]);
        // diamond BC: includes r = 0 (same axis position)
        let d = ChainSpec::diamond(1).with_js(0.5);
        let rs = allowed_separations(&d, OrbitalPair::BC, 2.0).unwrap();
        assert_eq!(rs, vec![0.0, 1.0, 2.0]);
        // self-pair at r = 0 excluded
        let rs = allowed_separations(&d, OrbitalPair::BB, 2.0).unwrap();
        assert_eq!(rs, vec![1.0, 2.0]);
    }

    #[test]
    fn zero_js_gives_zero_coupling() {
        let spec = ChainSpec::stub(1, 0.3);
        let v = coupling_band_sum(&spec, OrbitalPair::BB, 2.0, &cfg(64)).unwrap();
        assert_eq!(v.j, 0.0);
        assert!(!v.resolved);
    }

    #[test]
    fn fbfb_contribution_matches_exact_pole_form() {
        // I^00 must reproduce -(JS/2) |F00(R)|^2 with the exact pole
        let spec = ChainSpec::stub(1, 0.3).with_js(0.1);
        for r in [1.0, 2.0, 5.0] {
            let v = coupling_band_sum(&spec, OrbitalPair::BB, r, &cfg(1024)).unwrap();
            let contribs = v.contributions.as_ref().unwrap();
            // flat bands are band index 1 in both sectors (middle of three)
            let i00 = contribs.iter().find(|&&((p, q), _)| p == 1 && q == 1).unwrap().1;
            let expect = asymptotics::stub_fbfb(0.3, 0.1, r).value;
            let rel = (i00 - expect).abs() / expect.abs();
            assert!(rel < 2e-3, "r={r}: I00={i00:e} vs closed form {expect:e} ({rel:e})");
            // and the total is dominated by it at alpha >> JS
            assert!((v.j - expect).abs() / expect.abs() < 0.35);
            assert!(v.j < 0.0, "ferromagnetic");
        }
    }

    #[test]
    fn contributions_sum_to_total() {
        let spec = ChainSpec::diamond(1).with_js(0.5);
        let v = coupling_band_sum(&spec, OrbitalPair::BB, 3.0, &cfg(256)).unwrap();
        let contribs = v.contributions.as_ref().unwrap();
        let sum: f64 = contribs.iter().map(|(_, x)| x).sum();
        let scale = contribs.iter().map(|(_, x)| x.abs()).fold(0.0, f64::max);
        assert!((sum - v.j).abs() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn diamond_flat_band_pairs_vanish_beyond_onsite() {
        // k-independent flat-band states only contribute at r = 0
        let spec = ChainSpec::diamond(1).with_js(0.5);
        let v = coupling_band_sum(&spec, OrbitalPair::BB, 2.0, &cfg(256)).unwrap();
        let contribs = v.contributions.as_ref().unwrap();
        for &((p, q), i) in contribs {
            if p == 1 || q == 1 {
                assert!(i.abs() < 1e-16, "FB-involving I^{p}{q} = {i:e} should vanish at r >= a");
            }
        }
        // while the BC pair at r = 0 is dominated by the FB-FB term
        let v0 = coupling_band_sum(&spec, OrbitalPair::BC, 0.0, &cfg(256)).unwrap();
        let contribs = v0.contributions.as_ref().unwrap();
        let i00 = contribs.iter().find(|&&((p, q), _)| p == 1 && q == 1).unwrap().1;
        assert!(i00.abs() > 0.5 * v0.j.abs(), "FB-FB dominates the on-plaquette BC coupling");
        assert!(v0.j.abs() > v.j.abs() * 10.0);
    }

    #[test]
    fn band_sum_matches_realspace_oracle_on_matched_mesh() {
        for (spec, r) in [
            (ChainSpec::stub(1, 1.0).with_js(1.0), 2.0),
            (ChainSpec::stub(2, 0.5).with_js(0.3), 4.0),
            (ChainSpec::diamond(1).with_js(0.8), 3.0),
        ] {
            let n_cells = 64;
            let v = coupling_band_sum(&spec, OrbitalPair::BB, r, &cfg(n_cells)).unwrap();
            let oracle = coupling_oracle_realspace(
                &spec,
                OrbitalPair::BB,
                r,
                n_cells,
                Boundary::Periodic,
                &cfg(n_cells),
            )
            .unwrap();
            let rel = (v.j - oracle).abs() / oracle.abs().max(1e-14);
            assert!(rel <= 1e-8, "{spec:?} r={r}: band {:e} vs oracle {oracle:e} rel={rel:e}", v.j);
        }
    }

    #[test]
    fn oracle_translational_invariance() {
        let spec = ChainSpec::stub(1, 0.7).with_js(0.6);
        let a = oracle_once(&spec, OrbitalPair::BB, 3.0, 32, Boundary::Periodic, &cfg(32), Some(0))
            .unwrap();
        let b = oracle_once(&spec, OrbitalPair::BB, 3.0, 32, Boundary::Periodic, &cfg(32), Some(7))
            .unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12 * a.abs());
    }

    #[test]
    fn pair_exchange_and_reflection_symmetry() {
        let spec = ChainSpec::stub(1, 0.5).with_js(0.4);
        let ab = coupling_band_sum(&spec, OrbitalPair::BC, 1.5, &cfg(128)).unwrap();
        let ba = coupling_band_sum(&spec, OrbitalPair::BC.swapped(), 1.5, &cfg(128)).unwrap();
        assert_abs_diff_eq!(ab.j, ba.j, epsilon = 1e-12 * ab.j.abs());
        // J(R) = J(-R): the CB pair at +2 is the BC pair at -2
        let spec_d = ChainSpec::diamond(1).with_js(0.4);
        let fwd = coupling_band_sum(&spec_d, OrbitalPair::BC, 2.0, &cfg(128)).unwrap();
        let rev = coupling_band_sum(&spec_d, OrbitalPair::BC.swapped(), 2.0, &cfg(128)).unwrap();
        assert_abs_diff_eq!(fwd.j, rev.j, epsilon = 1e-12 * fwd.j.abs());
    }

    #[test]
    fn fbfb_regime_is_linear_in_js() {
        let j1 = coupling_band_sum(&ChainSpec::stub(1, 0.3).with_js(0.01), OrbitalPair::BB, 2.0, &cfg(512))
            .unwrap()
            .j;
        let j2 = coupling_band_sum(&ChainSpec::stub(1, 0.3).with_js(0.02), OrbitalPair::BB, 2.0, &cfg(512))
            .unwrap()
            .j;
        assert!((j2 / j1 - 2.0).abs() <= 0.05, "ratio {}", j2 / j1);
    }

    #[test]
    fn curve_flags_unresolved_tail_and_converges() {
        let spec = ChainSpec::stub(1, 0.3).with_js(0.01);
        let table = coupling_curve(&spec, OrbitalPair::BB, 60.0, &cfg(256)).unwrap();
        assert_eq!(table.entries.len(), 60);
        // deep tail falls below the floor and must be flagged, not zeroed
        let tail = table.entries.last().unwrap();
        assert!(!tail.resolved);
        // early entries converged
        assert_eq!(table.entries[1].converged, Some(true));
        assert!(table.entries[1].j < 0.0);
    }

    #[test]
    fn rejects_disallowed_separation_and_bad_config() {
        let spec = ChainSpec::stub(1, 0.5).with_js(0.2);
        assert!(coupling_band_sum(&spec, OrbitalPair::BB, 1.3, &cfg(64)).is_err());
        assert!(coupling_band_sum(&spec, OrbitalPair::BB, 0.0, &cfg(64)).is_err());
        let mut bad = cfg(64);
        bad.mu = 0.1;
        assert!(coupling_band_sum(&spec, OrbitalPair::BB, 1.0, &bad).is_err());
        let mut bad = cfg(64);
        bad.degenerate_eps = 1.0;
        assert!(coupling_band_sum(&spec, OrbitalPair::BB, 1.0, &bad).is_err());
    }

    #[test]
    fn deterministic_across_runs() {
        let spec = ChainSpec::diamond(1).with_js(0.5);
        let a = coupling_band_sum(&spec, OrbitalPair::BB, 5.0, &cfg(128)).unwrap();
        let b = coupling_band_sum(&spec, OrbitalPair::BB, 5.0, &cfg(128)).unwrap();
        assert_eq!(a.j.to_bits(), b.j.to_bits());
    }
}
