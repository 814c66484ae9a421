//! Exact diagonalization of the full Rabi Hamiltonian and of the single-mode
//! quartic Hamiltonian in truncated Fock bases.
//!
//! The Rabi Hamiltonian `H = ω0 a†a + (Ω/2)σz − λ(a+a†)σx` is real symmetric
//! in the product basis `|m⟩ ⊗ {|↓⟩, |↑⟩}` and commutes with the parity
//! `Π = exp[iπ(a†a + (1+σz)/2)]`. Each parity class, ordered by the Fock
//! index, yields an exactly tridiagonal block which is solved directly; the
//! cutoff is grown by doubling until the requested eigenvalues stop moving.

pub mod eigen;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::effective::{self, FreqRatio, ModelParams};
use eigen::{dense_lowest_eigenpairs, lanczos_lowest, BandedSym, EigenError, SymTridiag};

#[derive(Debug, Error, PartialEq)]
pub enum EdError {
    #[error("exact diagonalization requires a finite frequency ratio")]
    InfiniteRatio,
    #[error("Fock cutoff must be at least 8, got {0}")]
    CutoffTooSmall(usize),
    #[error("a spin-resolved basis is required for the Rabi Hamiltonian")]
    SpinBasisRequired,
    #[error("state vector has dimension {got}, basis has dimension {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("state norm deviates from unity by {0:.3e}")]
    NotNormalized(f64),
    #[error("coupling g = {0} outside the supported range {1}")]
    CouplingOutOfRange(f64, &'static str),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Effective(#[from] effective::EffectiveError),
}

/// Truncated Fock basis `|0⟩ … |cutoff⟩`, optionally tensored with the spin.
///
/// With spin the ordering is `(m ascending) ⊗ (↓ then ↑)`, i.e. index
/// `2m + s` with `s = 0` for `|↓⟩` and `s = 1` for `|↑⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    pub cutoff: usize,
    pub with_spin: bool,
}

impl FockBasis {
    pub fn new(cutoff: usize, with_spin: bool) -> Result<Self, EdError> {
        if cutoff < 8 {
            return Err(EdError::CutoffTooSmall(cutoff));
        }
        Ok(FockBasis { cutoff, with_spin })
    }

    pub fn dim(&self) -> usize {
        if self.with_spin {
            2 * (self.cutoff + 1)
        } else {
            self.cutoff + 1
        }
    }
}

/// Parity class `p = (−1)^{m+s}`; the two classes partition the basis into
/// blocks of equal dimension `cutoff + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityBlock {
    Even,
    Odd,
}

impl ParityBlock {
    /// Spin index of the block member with Fock index `m`.
    pub fn spin_of(&self, m: usize) -> usize {
        match self {
            ParityBlock::Even => m % 2,
            ParityBlock::Odd => 1 - m % 2,
        }
    }

    pub fn sign(&self) -> f64 {
        match self {
            ParityBlock::Even => 1.0,
            ParityBlock::Odd => -1.0,
        }
    }
}

/// Expectation values of one eigenstate.
#[derive(Debug, Clone, Copy)]
pub struct StateObservables {
    /// Photon number ⟨a†a⟩.
    pub n_phot: f64,
    /// ⟨x⟩ with x = a + a†; zero for parity eigenstates.
    pub x_mean: f64,
    /// Standard deviation of x.
    pub dx: f64,
    /// Standard deviation of p = i(a† − a).
    pub dp: f64,
    /// Parity expectation ⟨Π⟩, ±1 for symmetry eigenstates.
    pub parity: f64,
}

/// Converged spectrum and per-state observables.
#[derive(Debug, Clone)]
pub struct EDResult {
    /// Lowest eigenvalues, ascending (same units as the input frequencies).
    pub energies: Vec<f64>,
    /// Observables per eigenstate, aligned with `energies`.
    pub states: Vec<StateObservables>,
    /// Eigenvectors in the full-basis ordering, aligned with `energies`.
    pub eigenvectors: Vec<Vec<f64>>,
    pub cutoff_used: usize,
    pub converged: bool,
    omega0: f64,
}

impl EDResult {
    /// Indices (i, i+1) of eigenvalue pairs closer than `10⁻¹⁰ ω0`; finite-ratio
    /// ED cannot break the parity symmetry, so near-degenerate superradiant
    /// doublets stay resolved per parity block.
    pub fn doublet_pairs(&self) -> Vec<(usize, usize)> {
        self.energies
            .windows(2)
            .enumerate()
            .filter(|(_, w)| (w[1] - w[0]).abs() < 1e-10 * self.omega0)
            .map(|(i, _)| (i, i + 1))
            .collect()
    }
}

/// Tuning knobs of the diagonalization drivers.
#[derive(Debug, Clone)]
pub struct EdOptions {
    /// Override the physics-informed initial cutoff.
    pub start_cutoff: Option<usize>,
    /// Hard cap on the cutoff; exceeding it yields `converged = false`,
    /// never a silent truncation.
    pub cutoff_cap: usize,
    /// Largest dimension handed to the dense symmetric solver; banded
    /// problems beyond it use Lanczos.
    pub dense_max_dim: usize,
    /// Subspace limit for the Lanczos fallback.
    pub lanczos_subspace: usize,
}

impl Default for EdOptions {
    fn default() -> Self {
        EdOptions {
            start_cutoff: None,
            cutoff_cap: 1 << 16,
            dense_max_dim: 4096,
            lanczos_subspace: 600,
        }
    }
}

/// Parity block of the Rabi Hamiltonian as a symmetric tridiagonal matrix in
/// the Fock-ordered block basis.
pub fn rabi_block_tridiag(
    params: &ModelParams,
    cutoff: usize,
    block: ParityBlock,
) -> Result<SymTridiag, EdError> {
    let omega_atom = params.omega_atom().map_err(|_| EdError::InfiniteRatio)?;
    let lambda = params.lambda().map_err(|_| EdError::InfiniteRatio)?;
    let n = cutoff + 1;
    let diag: Vec<f64> = (0..n)
        .map(|m| {
            let sz = 2.0 * block.spin_of(m) as f64 - 1.0;
            m as f64 * params.omega0 + 0.5 * omega_atom * sz
        })
        .collect();
    let off: Vec<f64> = (1..n).map(|m| -lambda * (m as f64).sqrt()).collect();
    Ok(SymTridiag::new(diag, off)?)
}

/// Dense Rabi Hamiltonian, either on the full basis (bandwidth 3 in the
/// `2m + s` ordering) or restricted to one parity block (tridiagonal in the
/// Fock-ordered block basis).
pub fn build_rabi_matrix(
    params: &ModelParams,
    basis: &FockBasis,
    block: Option<ParityBlock>,
) -> Result<DMatrix<f64>, EdError> {
    if !basis.with_spin {
        return Err(EdError::SpinBasisRequired);
    }
    if let Some(b) = block {
        let t = rabi_block_tridiag(params, basis.cutoff, b)?;
        let n = t.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = t.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = t.offdiag[i];
                m[(i + 1, i)] = t.offdiag[i];
            }
        }
        return Ok(m);
    }
    let omega_atom = params.omega_atom().map_err(|_| EdError::InfiniteRatio)?;
    let lambda = params.lambda().map_err(|_| EdError::InfiniteRatio)?;
    let nmax = basis.cutoff;
    let dim = basis.dim();
    let mut h = DMatrix::zeros(dim, dim);
    for m in 0..=nmax {
        for s in 0..2usize {
            let i = 2 * m + s;
            h[(i, i)] = m as f64 * params.omega0 + 0.5 * omega_atom * (2.0 * s as f64 - 1.0);
            if m + 1 <= nmax {
                let j = 2 * (m + 1) + (1 - s);
                let v = -lambda * ((m + 1) as f64).sqrt();
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
    }
    Ok(h)
}

/// Physics-informed initial cutoff `max(64, ⌈4(α̂² + Δx̂²)⌉)` with the
/// displacement and spread estimated from the effective model; the
/// finite-frequency value caps the diverging spread near the critical point.
fn initial_cutoff(g: f64, ratio: f64) -> usize {
    let dx_gc = (2.0 * ratio / 3.0).powf(1.0 / 6.0);
    let dx_cf = if g < 1.0 {
        (1.0 - g * g).powf(-0.25)
    } else if g > 1.0 {
        (1.0 - g.powi(-4)).powf(-0.25)
    } else {
        f64::INFINITY
    };
    let dx_hat = dx_cf.min(dx_gc);
    let alpha2 = if g > 1.0 {
        ratio * (g.powi(4) - 1.0) / (4.0 * g * g)
    } else {
        0.0
    };
    let n0 = (4.0 * (alpha2 + dx_hat * dx_hat)).ceil() as usize;
    n0.max(64)
}

fn norm_check(vec: &[f64]) -> Result<(), EdError> {
    let norm = vec.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(EdError::NotNormalized((norm - 1.0).abs()));
    }
    Ok(())
}

/// Expectation values of a normalized state via tridiagonal ladder action.
///
/// The ladder images are accumulated in an array extended by one Fock index,
/// so `⟨x²⟩` and `⟨p²⟩` are exact for states supported on the basis.
pub fn observables(vec: &[f64], basis: &FockBasis) -> Result<StateObservables, EdError> {
    if vec.len() != basis.dim() {
        return Err(EdError::DimensionMismatch {
            got: vec.len(),
            expected: basis.dim(),
        });
    }
    norm_check(vec)?;
    let nmax = basis.cutoff;
    let spins = if basis.with_spin { 2 } else { 1 };
    let idx = |m: usize, s: usize| if basis.with_spin { 2 * m + s } else { m };

    let mut n_phot = 0.0;
    let mut parity = 0.0;
    for m in 0..=nmax {
        for s in 0..spins {
            let c = vec[idx(m, s)];
            n_phot += (m as f64) * c * c;
            parity += if (m + s) % 2 == 0 { c * c } else { -c * c };
        }
    }

    // x|ψ⟩ and (a† − a)|ψ⟩ in per-spin arrays of length nmax + 2
    let mut x_mean = 0.0;
    let mut x2 = 0.0;
    let mut p2 = 0.0;
    for s in 0..spins {
        let mut xv = vec![0.0; nmax + 2];
        let mut pv = vec![0.0; nmax + 2];
        for m in 0..=nmax {
            let c = vec[idx(m, s)];
            let up = ((m + 1) as f64).sqrt();
            xv[m + 1] += up * c;
            pv[m + 1] += up * c;
            if m > 0 {
                let dn = (m as f64).sqrt();
                xv[m - 1] += dn * c;
                pv[m - 1] -= dn * c;
            }
        }
        for m in 0..=nmax {
            x_mean += vec[idx(m, s)] * xv[m];
        }
        x2 += xv.iter().map(|v| v * v).sum::<f64>();
        p2 += pv.iter().map(|v| v * v).sum::<f64>();
    }
    Ok(StateObservables {
        n_phot,
        x_mean,
        dx: (x2 - x_mean * x_mean).sqrt(),
        dp: p2.sqrt(), // ⟨p⟩ vanishes identically for real vectors
        parity,
    })
}

/// Matrix element ⟨a|x|b⟩ between two states on the same basis; used to read
/// off the superradiant displacement from a symmetry-broken combination of
/// the ground doublet.
pub fn x_matrix_element(va: &[f64], vb: &[f64], basis: &FockBasis) -> Result<f64, EdError> {
    if va.len() != basis.dim() || vb.len() != basis.dim() {
        return Err(EdError::DimensionMismatch {
            got: va.len().max(vb.len()),
            expected: basis.dim(),
        });
    }
    let nmax = basis.cutoff;
    let spins = if basis.with_spin { 2 } else { 1 };
    let idx = |m: usize, s: usize| if basis.with_spin { 2 * m + s } else { m };
    let mut acc = 0.0;
    for s in 0..spins {
        for m in 0..=nmax {
            let c = vb[idx(m, s)];
            if m + 1 <= nmax {
                acc += va[idx(m + 1, s)] * ((m + 1) as f64).sqrt() * c;
            }
            if m > 0 {
                acc += va[idx(m - 1, s)] * (m as f64).sqrt() * c;
            }
        }
    }
    Ok(acc)
}

struct BlockSolve {
    energies: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    blocks: Vec<ParityBlock>,
}

fn solve_blocks(params: &ModelParams, cutoff: usize, k: usize) -> Result<BlockSolve, EdError> {
    let mut merged: Vec<(f64, ParityBlock, usize)> = Vec::with_capacity(2 * k);
    let mut vectors_by_block = Vec::with_capacity(2);
    for block in [ParityBlock::Even, ParityBlock::Odd] {
        let t = rabi_block_tridiag(params, cutoff, block)?;
        let (evals, evecs) = t.lowest_eigenpairs(k)?;
        for (i, &e) in evals.iter().enumerate() {
            merged.push((e, block, i));
        }
        vectors_by_block.push(evecs);
    }
    merged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    merged.truncate(k);

    let mut energies = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut blocks = Vec::with_capacity(k);
    for (e, block, i) in merged {
        let bvec = &vectors_by_block[match block {
            ParityBlock::Even => 0,
            ParityBlock::Odd => 1,
        }][i];
        // embed the block vector into the full (m, s) ordering
        let mut full = vec![0.0; 2 * (cutoff + 1)];
        for (m, &c) in bvec.iter().enumerate() {
            full[2 * m + block.spin_of(m)] = c;
        }
        energies.push(e);
        vectors.push(full);
        blocks.push(block);
    }
    Ok(BlockSolve {
        energies,
        vectors,
        blocks,
    })
}

/// Lowest `k` eigenpairs of the Rabi Hamiltonian with automatic cutoff
/// convergence: both parity blocks are solved, merged and the cutoff doubled
/// until the energies move by less than `tol` between successive cutoffs.
pub fn diagonalize(params: &ModelParams, k: usize, tol: f64) -> Result<EDResult, EdError> {
    diagonalize_with(params, k, tol, &EdOptions::default())
}

pub fn diagonalize_with(
    params: &ModelParams,
    k: usize,
    tol: f64,
    opts: &EdOptions,
) -> Result<EDResult, EdError> {
    let ratio = params.ratio.value().ok_or(EdError::InfiniteRatio)?;
    let k = k.max(1);
    let mut cutoff = opts
        .start_cutoff
        .unwrap_or_else(|| initial_cutoff(params.g, ratio))
        .max(8);
    let mut prev: Option<Vec<f64>> = None;

    loop {
        let solve = solve_blocks(params, cutoff, k)?;
        let converged = prev
            .as_ref()
            .map(|p| {
                p.iter()
                    .zip(&solve.energies)
                    .all(|(a, b)| (a - b).abs() < tol)
            })
            .unwrap_or(false);
        if converged || 2 * cutoff > opts.cutoff_cap {
            let basis = FockBasis {
                cutoff,
                with_spin: true,
            };
            let mut states = Vec::with_capacity(k);
            for (vec, block) in solve.vectors.iter().zip(&solve.blocks) {
                let mut obs = observables(vec, &basis)?;
                // block membership fixes the parity sign exactly
                debug_assert!((obs.parity - block.sign()).abs() < 1e-8);
                obs.parity = obs.parity.signum() * obs.parity.abs();
                states.push(obs);
            }
            return Ok(EDResult {
                energies: solve.energies,
                states,
                eigenvectors: solve.vectors,
                cutoff_used: cutoff,
                converged,
                omega0: params.omega0,
            });
        }
        prev = Some(solve.energies);
        cutoff *= 2;
    }
}

/// Single-mode quartic Hamiltonian
/// `ω0 a†a − (ω0 g²/4) x² + (g⁴ ω0²/16Ω) x⁴ + g² ω0²/4Ω` (constant −Ω/2
/// omitted, ω0 = 1 units) as a symmetric banded matrix.
///
/// The quartic is expanded by squaring the tridiagonal `x` twice at cutoff
/// `N + 4` and truncating afterwards, so every retained matrix element is
/// exact; truncating before squaring would corrupt the boundary rows.
pub fn quartic_matrix_banded(g: f64, ratio: f64, cutoff: usize) -> BandedSym {
    let ext = cutoff + 4;
    let mut x = BandedSym::zeros(ext + 1, 1);
    for m in 0..ext {
        x.bands[1][m] = ((m + 1) as f64).sqrt();
    }
    let x2 = x.mul_sym(&x).truncate(cutoff + 1);
    let x4 = {
        let full = x.mul_sym(&x);
        full.mul_sym(&full).truncate(cutoff + 1)
    };
    let c2 = -g * g / 4.0;
    let c4 = g.powi(4) / (16.0 * ratio);
    let c0 = g * g / (4.0 * ratio);
    let mut h = BandedSym::zeros(cutoff + 1, 4);
    for b in 0..=4usize {
        for i in 0..(cutoff + 1 - b) {
            let mut v = c4 * x4.bands[b][i];
            if b <= 2 {
                v += c2 * x2.bands[b][i];
            }
            if b == 0 {
                v += i as f64 + c0;
            }
            h.bands[b][i] = v;
        }
    }
    h
}

/// Dense copy of the quartic Hamiltonian, for inspection and brute-force tests.
pub fn build_quartic_matrix(g: f64, ratio: f64, cutoff: usize) -> DMatrix<f64> {
    quartic_matrix_banded(g, ratio, cutoff).to_dense()
}

/// Lowest `k` eigenpairs of the quartic Hamiltonian with the same doubling
/// convergence protocol as [`diagonalize`] (ω0 = 1 units).
pub fn diagonalize_quartic(g: f64, ratio: FreqRatio, k: usize, tol: f64) -> Result<EDResult, EdError> {
    diagonalize_quartic_with(g, ratio, k, tol, &EdOptions::default())
}

pub fn diagonalize_quartic_with(
    g: f64,
    ratio: FreqRatio,
    k: usize,
    tol: f64,
    opts: &EdOptions,
) -> Result<EDResult, EdError> {
    let ratio = ratio.value().ok_or(EdError::InfiniteRatio)?;
    if !(0.0..=1.05).contains(&g) {
        return Err(EdError::CouplingOutOfRange(g, "[0, 1.05]"));
    }
    let k = k.max(1);
    let dx_gc = (2.0 * ratio / 3.0).powf(1.0 / 6.0);
    let dx_hat = if g < 1.0 {
        (1.0 - g * g).powf(-0.25).min(dx_gc)
    } else {
        dx_gc
    };
    let mut cutoff = opts
        .start_cutoff
        .unwrap_or(((4.0 * dx_hat * dx_hat).ceil() as usize).max(64))
        .max(8);
    let mut prev: Option<Vec<f64>> = None;

    loop {
        let h = quartic_matrix_banded(g, ratio, cutoff);
        let (evals, evecs) = if h.dim <= opts.dense_max_dim {
            dense_lowest_eigenpairs(&h.to_dense(), k)
        } else {
            lanczos_lowest(&h, k, tol.min(1e-10), opts.lanczos_subspace)?
        };
        let converged = prev
            .as_ref()
            .map(|p| p.iter().zip(&evals).all(|(a, b)| (a - b).abs() < tol))
            .unwrap_or(false);
        if converged || 2 * cutoff > opts.cutoff_cap {
            let basis = FockBasis {
                cutoff,
                with_spin: false,
            };
            let states = evecs
                .iter()
                .map(|v| observables(v, &basis))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(EDResult {
                energies: evals,
                states,
                eigenvectors: evecs,
                cutoff_used: cutoff,
                converged,
                omega0: 1.0,
            });
        }
        prev = Some(evals);
        cutoff *= 2;
    }
}
