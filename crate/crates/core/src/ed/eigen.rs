//! Symmetric eigensolvers used by the exact diagonalization layer.
//!
//! Parity blocks of the Rabi Hamiltonian are exactly tridiagonal, so they are
//! solved directly: implicit-shift QL for the eigenvalues followed by inverse
//! iteration for the selected eigenvectors. General banded matrices (the
//! quartic Hamiltonian) go through a dense symmetric solve up to a policy
//! threshold and a Lanczos iteration with full reorthogonalization above it.

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EigenError {
    #[error("QL iteration failed to converge for eigenvalue index {0}")]
    QlNoConvergence(usize),
    #[error("Lanczos failed to converge {0} eigenpairs within the subspace limit")]
    LanczosNoConvergence(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
}

/// Symmetric tridiagonal matrix: `diag` has length n, `offdiag` length n−1.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self, EigenError> {
        if offdiag.len() + 1 != diag.len() {
            return Err(EigenError::Dimension("offdiag length must be diag length - 1"));
        }
        Ok(SymTridiag { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// All eigenvalues in ascending order, by implicit-shift QL.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, EigenError> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = self.offdiag.clone();
        e.push(0.0);

        for l in 0..n {
            let mut iter = 0;
            'restart: loop {
                // locate a negligible off-diagonal element
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 50 {
                    return Err(EigenError::QlNoConvergence(l));
                }
                // Wilkinson-style shift from the leading 2x2
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c) = (1.0_f64, 1.0_f64);
                let mut p = 0.0_f64;
                for i in (l..m).rev() {
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        // deflate and restart this eigenvalue
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        continue 'restart;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(d)
    }

    /// Eigenvector for a computed eigenvalue by inverse iteration.
    ///
    /// `ortho` holds previously computed vectors of (nearly) coincident
    /// eigenvalues to orthogonalize against; for a tridiagonal matrix with
    /// nonzero off-diagonals every eigenvalue is simple and the list is empty.
    pub fn eigenvector(&self, lambda: f64, ortho: &[Vec<f64>]) -> Vec<f64> {
        let n = self.dim();
        if n == 1 {
            return vec![1.0];
        }
        let anorm = self
            .diag
            .iter()
            .chain(self.offdiag.iter())
            .fold(0.0_f64, |a, &x| a.max(x.abs()))
            .max(1.0);
        let eps = f64::EPSILON * anorm;

        // LU of (T - lambda I) with partial pivoting; upper factor has three bands
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut lmul = vec![0.0; n];
        let mut swapped = vec![false; n];
        {
            let mut du = self.diag[0] - lambda;
            let mut eu = if n > 1 { self.offdiag[0] } else { 0.0 };
            for i in 0..n - 1 {
                let el = self.offdiag[i];
                let dn = self.diag[i + 1] - lambda;
                let en = if i + 2 < n { self.offdiag[i + 1] } else { 0.0 };
                if el.abs() > du.abs() {
                    swapped[i] = true;
                    u0[i] = el;
                    u1[i] = dn;
                    u2[i] = en;
                    let m = du / el;
                    lmul[i] = m;
                    du = eu - m * dn;
                    eu = -m * en;
                } else {
                    let piv = if du.abs() < eps { eps.copysign(du) } else { du };
                    u0[i] = piv;
                    u1[i] = eu;
                    u2[i] = 0.0;
                    let m = el / piv;
                    lmul[i] = m;
                    du = dn - m * eu;
                    eu = en;
                }
            }
            u0[n - 1] = if du.abs() < eps { eps.copysign(du) } else { du };
        }

        let solve = |b: &mut [f64]| {
            for i in 0..n - 1 {
                if swapped[i] {
                    b.swap(i, i + 1);
                }
                let m = lmul[i];
                b[i + 1] -= m * b[i];
            }
            for i in (0..n).rev() {
                let mut x = b[i];
                if i + 1 < n {
                    x -= u1[i] * b[i + 1];
                }
                if i + 2 < n {
                    x -= u2[i] * b[i + 2];
                }
                b[i] = x / u0[i];
            }
        };

        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        for _ in 0..3 {
            solve(&mut v);
            for o in ortho {
                let dot: f64 = v.iter().zip(o).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(o).for_each(|(a, b)| *a -= dot * b);
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
        }
        // fix an overall sign: first significant component positive
        if let Some(&lead) = v.iter().find(|x| x.abs() > 1e-8) {
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        v
    }

    /// The `k` lowest eigenpairs.
    pub fn lowest_eigenpairs(&self, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>), EigenError> {
        let k = k.min(self.dim());
        let evals = self.eigenvalues()?;
        let anorm = self
            .diag
            .iter()
            .chain(self.offdiag.iter())
            .fold(0.0_f64, |a, &x| a.max(x.abs()))
            .max(1.0);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        for i in 0..k {
            let close: Vec<Vec<f64>> = (0..i)
                .filter(|&j| (evals[j] - evals[i]).abs() < 1e-10 * anorm)
                .map(|j| vectors[j].clone())
                .collect();
            vectors.push(self.eigenvector(evals[i], &close));
        }
        Ok((evals[..k].to_vec(), vectors))
    }
}

/// Symmetric banded matrix in upper-band storage: `bands[b][i] = A[i, i+b]`.
#[derive(Debug, Clone)]
pub struct BandedSym {
    pub dim: usize,
    pub bands: Vec<Vec<f64>>,
}

impl BandedSym {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        BandedSym {
            dim,
            bands: (0..=bandwidth).map(|b| vec![0.0; dim.saturating_sub(b)]).collect(),
        }
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let b = hi - lo;
        if b < self.bands.len() {
            self.bands[b][lo]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        self.bands[hi - lo][lo] = v;
    }

    /// Product with another symmetric banded matrix, assuming the result is
    /// symmetric (true for powers of a common matrix, the only use here).
    pub fn mul_sym(&self, other: &BandedSym) -> BandedSym {
        assert_eq!(self.dim, other.dim);
        let bw = self.bandwidth() + other.bandwidth();
        let mut out = BandedSym::zeros(self.dim, bw);
        for i in 0..self.dim {
            for b in 0..=bw.min(self.dim - 1 - i) {
                let j = i + b;
                let lo = i.saturating_sub(self.bandwidth()).max(j.saturating_sub(other.bandwidth()));
                let hi = (i + self.bandwidth()).min(j + other.bandwidth()).min(self.dim - 1);
                let mut acc = 0.0;
                for l in lo..=hi {
                    acc += self.get(i, l) * other.get(l, j);
                }
                out.bands[b][i] = acc;
            }
        }
        out
    }

    /// Restriction to the leading `n × n` block.
    pub fn truncate(&self, n: usize) -> BandedSym {
        let mut out = BandedSym::zeros(n, self.bandwidth());
        for (b, band) in self.bands.iter().enumerate() {
            let len = n.saturating_sub(b);
            out.bands[b][..len].copy_from_slice(&band[..len]);
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (b, band) in self.bands.iter().enumerate() {
            for (i, &v) in band.iter().enumerate() {
                m[(i, i + b)] = v;
                m[(i + b, i)] = v;
            }
        }
        m
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let bw = self.bandwidth();
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.dim {
            let mut acc = self.bands[0][i] * x[i];
            for b in 1..=bw.min(self.dim - 1 - i) {
                let v = self.bands[b][i];
                acc += v * x[i + b];
                y[i + b] += v * x[i];
            }
            y[i] += acc;
        }
    }
}

/// The `k` lowest eigenpairs of a dense symmetric matrix.
pub fn dense_lowest_eigenpairs(mat: &DMatrix<f64>, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = mat.nrows();
    let k = k.min(n);
    let se = mat.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let evals = idx.iter().take(k).map(|&i| se.eigenvalues[i]).collect();
    let evecs = idx
        .iter()
        .take(k)
        .map(|&i| se.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (evals, evecs)
}

/// The `k` lowest eigenpairs of a large symmetric operator by Lanczos with
/// full reorthogonalization and a deterministic starting vector.
pub fn lanczos_lowest(
    a: &BandedSym,
    k: usize,
    tol: f64,
    max_subspace: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), EigenError> {
    let n = a.dim;
    let k = k.min(n);
    let m_max = max_subspace.min(n);

    // fixed LCG so runs are bit-identical
    let mut seed: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    };
    let mut v: Vec<f64> = (0..n).map(|_| next()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];

    for m in 1..=m_max {
        let vj = basis.last().unwrap().clone();
        a.matvec(&vj, &mut w);
        if let Some(b) = beta.last() {
            let prev = &basis[basis.len() - 2];
            w.iter_mut().zip(prev).for_each(|(x, p)| *x -= b * p);
        }
        let aj: f64 = w.iter().zip(&vj).map(|(x, y)| x * y).sum();
        w.iter_mut().zip(&vj).for_each(|(x, y)| *x -= aj * y);
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for q in &basis {
                let d: f64 = w.iter().zip(q).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= d * y);
            }
        }
        alpha.push(aj);
        let bj = w.iter().map(|x| x * x).sum::<f64>().sqrt();

        let enough = m >= (3 * k).max(20) || bj < 1e-14 || m == m_max;
        if enough {
            let t = SymTridiag::new(alpha.clone(), beta.clone())?;
            let (theta, s) = t.lowest_eigenpairs(k)?;
            // residual bound |beta_m * s[last]| per Ritz pair
            let converged = bj < 1e-14
                || (0..k.min(theta.len())).all(|i| {
                    let tail = s[i].last().copied().unwrap_or(0.0);
                    (bj * tail).abs() <= tol.max(1e-14) * theta[i].abs().max(1.0)
                });
            if converged || m == m_max || bj < 1e-14 {
                if !(converged || bj < 1e-14) {
                    return Err(EigenError::LanczosNoConvergence(k));
                }
                let mut vecs = Vec::with_capacity(k);
                for si in s.iter().take(k) {
                    let mut rv = vec![0.0; n];
                    for (c, q) in si.iter().zip(&basis) {
                        rv.iter_mut().zip(q).for_each(|(x, y)| *x += c * y);
                    }
                    let nr = rv.iter().map(|x| x * x).sum::<f64>().sqrt();
                    rv.iter_mut().for_each(|x| *x /= nr);
                    vecs.push(rv);
                }
                return Ok((theta, vecs));
            }
        }
        beta.push(bj);
        let mut vnext = w.clone();
        vnext.iter_mut().for_each(|x| *x /= bj);
        basis.push(vnext);
    }
    Err(EigenError::LanczosNoConvergence(k))
}
