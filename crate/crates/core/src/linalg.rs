//! Dense complex matrix kernel: products, tensor products, partial traces,
//! Hermitian spectral decomposition, trace norm.
//!
//! Everything is plain row-major `Vec<Complex64>` storage. The eigensolver is
//! a cyclic Jacobi iteration for Hermitian matrices; intended scale is
//! dimensions up to a few hundred.

use num_complex::Complex64;

use crate::{Error, Result};

/// Tolerance below which a matrix is accepted as Hermitian (max-entry norm).
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self { rows, cols, entries }
    }

    /// Diagonal matrix from real entries.
    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(*v, 0.0);
        }
        m
    }

    /// Outer product `v v†` of a column vector.
    pub fn projector(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |r, c| v[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| self[(r, c)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        Ok(out)
    }

    /// `self · v` for a column vector.
    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.cols != v.len() {
            return Err(Error::DimMismatch(format!(
                "matrix is {}x{}, vector has length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..self.cols {
                acc += self[(r, c)] * v[c];
            }
            out[r] = acc;
        }
        Ok(out)
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_entry_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_entry_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-entry deviation from the adjoint; 0 for exactly Hermitian input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                let d = (self[(r, c)] - self[(c, r)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(M + M†)/2`.
    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.entries[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[r * self.cols + c]
    }
}

/// Kronecker product `a ⊗ b` in the lexicographic basis (left factor most
/// significant).
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ar in 0..a.rows() {
        for ac in 0..a.cols() {
            let x = a[(ar, ac)];
            if x.norm_sqr() == 0.0 {
                continue;
            }
            for br in 0..b.rows() {
                for bc in 0..b.cols() {
                    out[(ar * b.rows() + br, ac * b.cols() + bc)] = x * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Ordered list of labeled subsystems with dimensions.
///
/// Basis ordering is lexicographic with the first label most significant:
/// the flat index of multi-index `(i₀, i₁, …)` is `Σ iₛ · stride(s)` with
/// `stride(s) = Π_{t>s} dim(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemLayout {
    labels: Vec<String>,
    dims: Vec<usize>,
}

impl SubsystemLayout {
    pub fn new(parts: &[(&str, usize)]) -> Result<Self> {
        let labels: Vec<String> = parts.iter().map(|(l, _)| l.to_string()).collect();
        let dims: Vec<usize> = parts.iter().map(|(_, d)| *d).collect();
        Self::from_vecs(labels, dims)
    }

    pub fn from_vecs(labels: Vec<String>, dims: Vec<usize>) -> Result<Self> {
        if labels.len() != dims.len() {
            return Err(Error::DimMismatch("labels/dims length mismatch".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidArgument(format!("duplicate label `{l}`")));
            }
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument("subsystem dimensions must be >= 1".into()));
        }
        Ok(Self { labels, dims })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    /// Positions of `labels`, in layout order.
    pub fn positions_of(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut pos: Vec<usize> = labels.iter().map(|l| self.position(l)).collect::<Result<_>>()?;
        pos.sort_unstable();
        pos.dedup();
        Ok(pos)
    }

    pub fn strides(&self) -> Vec<usize> {
        let n = self.dims.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    pub fn ravel(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dims.len());
        let strides = self.strides();
        multi.iter().zip(&strides).map(|(i, s)| i * s).sum()
    }

    pub fn unravel(&self, mut index: usize) -> Vec<usize> {
        let strides = self.strides();
        let mut multi = Vec::with_capacity(self.dims.len());
        for s in &strides {
            multi.push(index / s);
            index %= s;
        }
        multi
    }

    /// Sub-layout of the subsystems at `positions` (kept in the given order).
    pub fn sublayout(&self, positions: &[usize]) -> Self {
        Self {
            labels: positions.iter().map(|&p| self.labels[p].clone()).collect(),
            dims: positions.iter().map(|&p| self.dims[p]).collect(),
        }
    }

    /// A label not yet present, derived from `base`.
    pub fn fresh_label(&self, base: &str) -> String {
        if !self.contains(base) {
            return base.to_string();
        }
        for k in 0.. {
            let cand = format!("{base}{k}");
            if !self.contains(&cand) {
                return cand;
            }
        }
        unreachable!()
    }
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are real and sorted descending; `eigenvectors` holds the
/// matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenSystem {
    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(n, n, |r, c| {
            (0..n).map(|k| v[(r, k)] * self.eigenvalues[k] * v[(c, k)].conj()).sum()
        })
    }
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// The input must be Hermitian within [`HERMITIAN_TOL`] (max-entry); it is
/// symmetrized before iterating.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigenSystem> {
    if !m.is_square() {
        return Err(Error::DimMismatch(format!("eig of non-square {}x{}", m.rows(), m.cols())));
    }
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.rows();
    let mut a = m.symmetrized();
    let mut v = ComplexMatrix::identity(n);
    if n <= 1 {
        return Ok(HermitianEigenSystem {
            eigenvalues: (0..n).map(|i| a[(i, i)].re).collect(),
            eigenvectors: v,
        });
    }

    let scale = a.frobenius_norm().max(1e-300);
    let stop = 1e-14 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigenSystem { eigenvalues, eigenvectors })
}

/// One Jacobi rotation zeroing `a[p][q]` (and `a[q][p]`), accumulating into `v`.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag < 1e-300 {
        return;
    }
    // Factor out the phase so the 2x2 block becomes real symmetric, then apply
    // the classical symmetric Jacobi rotation.
    let w = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (tau - (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // G[p,p]=c, G[p,q]=s, G[q,p]=-s·conj(w), G[q,q]=c·conj(w); A <- G† A G.
    let n = a.rows();
    let gpp = Complex64::new(c, 0.0);
    let gpq = Complex64::new(s, 0.0);
    let gqp = -s * w.conj();
    let gqq = c * w.conj();

    // Column update: B = A·G touches columns p and q.
    for r in 0..n {
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        a[(r, p)] = arp * gpp + arq * gqp;
        a[(r, q)] = arp * gpq + arq * gqq;
    }
    // Row update: A' = G†·B touches rows p and q.
    for cidx in 0..n {
        let apc = a[(p, cidx)];
        let aqc = a[(q, cidx)];
        a[(p, cidx)] = gpp.conj() * apc + gqp.conj() * aqc;
        a[(q, cidx)] = gpq.conj() * apc + gqq.conj() * aqc;
    }
    // Clean the pivot pair and enforce real diagonal.
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = vrp * gpp + vrq * gqp;
        v[(r, q)] = vrp * gpq + vrq * gqq;
    }
}

/// Partial trace over the subsystems of `layout` *not* listed in `keep`.
///
/// The result lives on the kept subsystems in their original layout order.
pub fn partial_trace(
    m: &ComplexMatrix,
    layout: &SubsystemLayout,
    keep: &[&str],
) -> Result<ComplexMatrix> {
    if !m.is_square() || m.rows() != layout.total_dim() {
        return Err(Error::DimMismatch(format!(
            "matrix is {}x{}, layout dimension {}",
            m.rows(),
            m.cols(),
            layout.total_dim()
        )));
    }
    let keep_pos = layout.positions_of(keep)?;
    let trace_pos: Vec<usize> = (0..layout.len()).filter(|p| !keep_pos.contains(p)).collect();
    let strides = layout.strides();
    let keep_layout = layout.sublayout(&keep_pos);
    let trace_layout = layout.sublayout(&trace_pos);
    let dk = keep_layout.total_dim();
    let dt = trace_layout.total_dim();

    // Flat offsets of every kept (resp. traced) multi-index in the full space.
    let keep_offsets: Vec<usize> = (0..dk)
        .map(|i| {
            let multi = keep_layout.unravel(i);
            multi.iter().zip(&keep_pos).map(|(ix, &p)| ix * strides[p]).sum()
        })
        .collect();
    let trace_offsets: Vec<usize> = (0..dt)
        .map(|i| {
            let multi = trace_layout.unravel(i);
            multi.iter().zip(&trace_pos).map(|(ix, &p)| ix * strides[p]).sum()
        })
        .collect();

    let mut out = ComplexMatrix::zeros(dk, dk);
    for (r, ro) in keep_offsets.iter().enumerate() {
        for (c, co) in keep_offsets.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for to in &trace_offsets {
                acc += m[(ro + to, co + to)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Trace distance `½ Tr |ρ − σ|` between Hermitian matrices of equal shape.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.rows() != sigma.rows() || rho.cols() != sigma.cols() {
        return Err(Error::DimMismatch(format!(
            "{}x{} vs {}x{}",
            rho.rows(),
            rho.cols(),
            sigma.rows(),
            sigma.cols()
        )));
    }
    let diff = rho.sub(sigma)?;
    let eig = hermitian_eig(&diff)?;
    Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// `½ Tr |ρ|` of a single Hermitian matrix.
pub fn trace_norm_half(m: &ComplexMatrix) -> Result<f64> {
    let eig = hermitian_eig(m)?;
    Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        random_matrix(rng, n).symmetrized()
    }

    /// Random density matrix via a Gram matrix.
    fn random_state(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let g = random_matrix(rng, n);
        let gram = g.matmul(&g.adjoint()).unwrap();
        let tr = gram.trace().re;
        gram.scale(c(1.0 / tr, 0.0))
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));

        // |0><0| ⊗ |1><1| = |01><01|
        let p0 = ComplexMatrix::projector(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let p1 = ComplexMatrix::projector(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let k = kron(&p0, &p1);
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(1, 1)] = c(1.0, 0.0);
        assert!(k.max_entry_diff(&expected) < 1e-15);
    }

    #[test]
    fn kron_matches_index_formula() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 2);
        let b = random_matrix(&mut rng, 2);
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    for m in 0..2 {
                        let got = k[(i * 2 + l, j * 2 + m)];
                        let want = a[(i, j)] * b[(l, m)];
                        assert!((got - want).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_associativity() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 2);
            let b = random_matrix(&mut rng, 3);
            let cm = random_matrix(&mut rng, 2);
            let left = kron(&kron(&a, &b), &cm);
            let right = kron(&a, &kron(&b, &cm));
            assert!(left.max_entry_diff(&right) < 1e-12);
        }
    }

    #[test]
    fn eig_identity_and_pauli_x() {
        let eig = hermitian_eig(&ComplexMatrix::identity(4)).unwrap();
        for l in &eig.eigenvalues {
            assert!((l - 1.0).abs() < 1e-12);
        }

        let x = ComplexMatrix::from_entries(
            2,
            2,
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let eig = hermitian_eig(&x).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((eig.eigenvalues[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_reconstruction_random() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for n in [2usize, 3, 5, 8] {
            let m = random_hermitian(&mut rng, n);
            let eig = hermitian_eig(&m).unwrap();
            assert!(eig.reconstruct().max_entry_diff(&m) < 1e-10, "n={n}");
            // V†V = I
            let vtv = eig.eigenvectors.adjoint().matmul(&eig.eigenvectors).unwrap();
            assert!(vtv.max_entry_diff(&ComplexMatrix::identity(n)) < 1e-10);
            // descending order
            for w in eig.eigenvalues.windows(2) {
                assert!(w[0] >= w[1] - 1e-12);
            }
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_entries(
            2,
            2,
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn partial_trace_bell_state() {
        let s = 1.0 / 2.0_f64.sqrt();
        let bell = ComplexMatrix::projector(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
        let layout = SubsystemLayout::new(&[("A", 2), ("B", 2)]).unwrap();
        let reduced = partial_trace(&bell, &layout, &["A"]).unwrap();
        let expected = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        assert!(reduced.max_entry_diff(&expected) < 1e-14);
    }

    #[test]
    fn partial_trace_product_factorizes() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let a = random_state(&mut rng, 2);
        let b = random_hermitian(&mut rng, 3);
        let prod = kron(&a, &b);
        let layout = SubsystemLayout::new(&[("A", 2), ("B", 3)]).unwrap();
        let got = partial_trace(&prod, &layout, &["A"]).unwrap();
        let expected = a.scale(b.trace());
        assert!(got.max_entry_diff(&expected) < 1e-13);
    }

    #[test]
    fn partial_trace_matches_double_sum_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(37);
        let m = random_state(&mut rng, 6);
        let layout = SubsystemLayout::new(&[("A", 2), ("B", 3)]).unwrap();
        let got = partial_trace(&m, &layout, &["A"]).unwrap();
        // rho_A[i,j] = sum_k m[(i,k),(j,k)]
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = c(0.0, 0.0);
                for k in 0..3 {
                    acc += m[(i * 3 + k, j * 3 + k)];
                }
                assert!((got[(i, j)] - acc).norm() < 1e-14);
            }
        }
        // keeping B sums over the A index
        let got_b = partial_trace(&m, &layout, &["B"]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = c(0.0, 0.0);
                for k in 0..2 {
                    acc += m[(k * 3 + i, k * 3 + j)];
                }
                assert!((got_b[(i, j)] - acc).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn partial_trace_over_everything_is_trace() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let m = random_state(&mut rng, 12);
        let layout = SubsystemLayout::new(&[("A", 2), ("B", 2), ("C", 3)]).unwrap();
        let scalar = partial_trace(&m, &layout, &[]).unwrap();
        assert_eq!(scalar.rows(), 1);
        assert!((scalar[(0, 0)] - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_unknown_label_errors() {
        let m = ComplexMatrix::identity(4).scale(c(0.25, 0.0));
        let layout = SubsystemLayout::new(&[("A", 2), ("B", 2)]).unwrap();
        assert!(matches!(partial_trace(&m, &layout, &["Z"]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn trace_distance_basics() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        let rho = random_state(&mut rng, 4);
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-14);

        let p0 = ComplexMatrix::projector(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let p1 = ComplexMatrix::projector(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((trace_distance(&p0, &p1).unwrap() - 1.0).abs() < 1e-14);

        // |0><0| vs |+><+| : eigenvalues of the difference are ±1/√2
        let s = 1.0 / 2.0_f64.sqrt();
        let plus = ComplexMatrix::projector(&[c(s, 0.0), c(s, 0.0)]);
        assert!((trace_distance(&p0, &plus).unwrap() - s).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_contractive_under_partial_trace() {
        let mut rng = ChaCha12Rng::seed_from_u64(47);
        let layout = SubsystemLayout::new(&[("A", 2), ("B", 3)]).unwrap();
        for _ in 0..100 {
            let rho = random_state(&mut rng, 6);
            let sigma = random_state(&mut rng, 6);
            let full = trace_distance(&rho, &sigma).unwrap();
            let ra = partial_trace(&rho, &layout, &["A"]).unwrap();
            let sa = partial_trace(&sigma, &layout, &["A"]).unwrap();
            let reduced = trace_distance(&ra, &sa).unwrap();
            assert!(reduced <= full + 1e-10);
        }
    }

    #[test]
    fn layout_ordering_is_first_label_most_significant() {
        let layout = SubsystemLayout::new(&[("A", 2), ("B", 3), ("C", 2)]).unwrap();
        assert_eq!(layout.strides(), vec![6, 2, 1]);
        assert_eq!(layout.ravel(&[1, 2, 1]), 11);
        assert_eq!(layout.unravel(11), vec![1, 2, 1]);
    }
}
