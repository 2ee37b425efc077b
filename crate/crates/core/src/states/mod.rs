//! Domain state types: density operators on labeled subsystems, classical
//! distributions, POVMs, channels, and the party assignment used by the
//! bound and protocol machinery.

mod build;
mod pure;
pub mod random;

pub use build::*;
pub use pure::{purify, PureState};

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::linalg::{
    hermitian_eig, kron, partial_trace, trace_distance, ComplexMatrix, SubsystemLayout,
    HERMITIAN_TOL,
};
use crate::{Error, Result};

/// Probabilities below this are treated as exact zeros.
pub const PROB_TOL: f64 = 1e-15;

/// Hermitian, positive, trace-one operator on a labeled tensor product of
/// subsystems. Labels flagged classical are guaranteed block-diagonal in that
/// subsystem's computational basis.
#[derive(Debug, Clone)]
pub struct DensityState {
    layout: SubsystemLayout,
    matrix: ComplexMatrix,
    classical: BTreeSet<String>,
}

impl DensityState {
    /// Validating constructor: checks Hermiticity (1e-10), positivity
    /// (eigenvalues ≥ −1e-10), unit trace (±1e-10), and block-diagonality on
    /// every classical label.
    pub fn new(
        layout: SubsystemLayout,
        matrix: ComplexMatrix,
        classical_labels: &[&str],
    ) -> Result<Self> {
        let state = Self::from_parts_unchecked(layout, matrix, classical_labels)?;
        state.validate()?;
        Ok(state)
    }

    /// Constructor for states valid by construction; only shape and label
    /// existence are checked.
    pub(crate) fn from_parts_unchecked(
        layout: SubsystemLayout,
        matrix: ComplexMatrix,
        classical_labels: &[&str],
    ) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != layout.total_dim() {
            return Err(Error::DimMismatch(format!(
                "matrix is {}x{} but layout dimension is {}",
                matrix.rows(),
                matrix.cols(),
                layout.total_dim()
            )));
        }
        let mut classical = BTreeSet::new();
        for l in classical_labels {
            layout.position(l)?;
            classical.insert(l.to_string());
        }
        Ok(Self { layout, matrix, classical })
    }

    /// Re-checks all invariants.
    pub fn validate(&self) -> Result<()> {
        let defect = self.matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvariantViolation(format!(
                "state is not Hermitian (defect {defect:.3e})"
            )));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvariantViolation(format!(
                "trace is {:.12} + {:.3e}i, expected 1",
                tr.re, tr.im
            )));
        }
        let eig = hermitian_eig(&self.matrix)?;
        if let Some(min) = eig.eigenvalues.last() {
            if *min < -1e-10 {
                return Err(Error::InvariantViolation(format!(
                    "negative eigenvalue {min:.3e}"
                )));
            }
        }
        for label in &self.classical {
            let defect = self.classical_defect(label)?;
            if defect > HERMITIAN_TOL {
                return Err(Error::InvariantViolation(format!(
                    "label `{label}` is flagged classical but has off-diagonal blocks \
                     of size {defect:.3e}"
                )));
            }
        }
        Ok(())
    }

    /// Largest off-diagonal block entry with respect to `label`'s basis.
    fn classical_defect(&self, label: &str) -> Result<f64> {
        let pos = self.layout.position(label)?;
        let d = self.layout.total_dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            let rm = self.layout.unravel(r);
            for c in 0..d {
                if self.layout.unravel(c)[pos] != rm[pos] {
                    worst = worst.max(self.matrix[(r, c)].norm());
                }
            }
        }
        Ok(worst)
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn classical_labels(&self) -> Vec<String> {
        self.classical.iter().cloned().collect()
    }

    pub fn is_classical(&self, label: &str) -> bool {
        self.classical.contains(label)
    }

    /// All labels are classical (a fully classical state).
    pub fn is_fully_classical(&self) -> bool {
        self.layout.labels().iter().all(|l| self.classical.contains(l))
    }

    /// Reduced state on `keep` (layout order preserved).
    pub fn marginal(&self, keep: &[&str]) -> Result<DensityState> {
        let matrix = partial_trace(&self.matrix, &self.layout, keep)?;
        let keep_pos = self.layout.positions_of(keep)?;
        let sub = self.layout.sublayout(&keep_pos);
        let classical: Vec<String> =
            sub.labels().iter().filter(|l| self.classical.contains(*l)).cloned().collect();
        let refs: Vec<&str> = classical.iter().map(|s| s.as_str()).collect();
        Self::from_parts_unchecked(sub, matrix, &refs)
    }

    /// Tensor product; labels must be disjoint.
    pub fn tensor(&self, other: &DensityState) -> Result<DensityState> {
        let mut labels: Vec<String> = self.layout.labels().to_vec();
        let mut dims: Vec<usize> = self.layout.dims().to_vec();
        for (l, d) in other.layout.labels().iter().zip(other.layout.dims()) {
            labels.push(l.clone());
            dims.push(*d);
        }
        let layout = SubsystemLayout::from_vecs(labels, dims)?;
        let matrix = kron(&self.matrix, &other.matrix);
        let classical: Vec<String> =
            self.classical.iter().chain(other.classical.iter()).cloned().collect();
        let refs: Vec<&str> = classical.iter().map(|s| s.as_str()).collect();
        Self::from_parts_unchecked(layout, matrix, &refs)
    }

    /// Permute subsystems into `new_order` (a permutation of the labels).
    pub fn reorder(&self, new_order: &[&str]) -> Result<DensityState> {
        if new_order.len() != self.layout.len() {
            return Err(Error::InvalidArgument("reorder must list every label".into()));
        }
        let positions: Vec<usize> =
            new_order.iter().map(|l| self.layout.position(l)).collect::<Result<_>>()?;
        {
            let mut seen = positions.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != positions.len() {
                return Err(Error::InvalidArgument("reorder repeats a label".into()));
            }
        }
        let new_layout = self.layout.sublayout(&positions);
        let d = self.dim();
        let mut map = vec![0usize; d];
        for idx in 0..d {
            let multi = new_layout.unravel(idx);
            let mut old = vec![0usize; self.layout.len()];
            for (k, &p) in positions.iter().enumerate() {
                old[p] = multi[k];
            }
            map[idx] = self.layout.ravel(&old);
        }
        let matrix = ComplexMatrix::from_fn(d, d, |r, c| self.matrix[(map[r], map[c])]);
        let classical: Vec<String> = self.classical.iter().cloned().collect();
        let refs: Vec<&str> = classical.iter().map(|s| s.as_str()).collect();
        Self::from_parts_unchecked(new_layout, matrix, &refs)
    }

    /// Rename a subsystem.
    pub fn relabel(&self, from: &str, to: &str) -> Result<DensityState> {
        let pos = self.layout.position(from)?;
        if self.layout.contains(to) && to != from {
            return Err(Error::InvalidArgument(format!("label `{to}` already exists")));
        }
        let mut labels = self.layout.labels().to_vec();
        labels[pos] = to.to_string();
        let layout = SubsystemLayout::from_vecs(labels, self.layout.dims().to_vec())?;
        let mut classical = self.classical.clone();
        if classical.remove(from) {
            classical.insert(to.to_string());
        }
        Ok(DensityState { layout, matrix: self.matrix.clone(), classical })
    }

    /// Zero all blocks off-diagonal in the computational bases of `labels`
    /// (a projective measurement whose outcome is kept in place), and flag
    /// those labels classical.
    pub fn dephase(&self, labels: &[&str]) -> Result<DensityState> {
        let positions = self.layout.positions_of(labels)?;
        let d = self.dim();
        let mut matrix = self.matrix.clone();
        for r in 0..d {
            let rm = self.layout.unravel(r);
            for c in 0..d {
                let cm = self.layout.unravel(c);
                if positions.iter().any(|&p| rm[p] != cm[p]) {
                    matrix[(r, c)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        let mut classical = self.classical.clone();
        for l in labels {
            classical.insert(l.to_string());
        }
        let names: Vec<String> = classical.iter().cloned().collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        Self::from_parts_unchecked(self.layout.clone(), matrix, &refs)
    }

    /// Trace distance to another state on the same layout. Blocks shared by
    /// both states' classical flags are diagonalized separately, which keeps
    /// the eigenproblems small for ccq-style states.
    pub fn trace_distance_to(&self, other: &DensityState) -> Result<f64> {
        if self.layout != other.layout {
            return Err(Error::DimMismatch("trace distance needs identical layouts".into()));
        }
        let shared: Vec<String> =
            self.classical.intersection(&other.classical).cloned().collect();
        if shared.is_empty() {
            return trace_distance(&self.matrix, &other.matrix);
        }
        let refs: Vec<&str> = shared.iter().map(|s| s.as_str()).collect();
        let diff = DensityStateDiff {
            layout: &self.layout,
            a: &self.matrix,
            b: &other.matrix,
        };
        diff.blockwise_trace_norm(&refs)
    }

    /// Weights and normalized conditional operators on `state_labels`, one per
    /// joint computational index of `index_labels` (which must be classical).
    /// Cells with weight below [`PROB_TOL`] are skipped.
    pub fn classical_ensemble(
        &self,
        index_labels: &[&str],
        state_labels: &[&str],
    ) -> Result<Vec<(f64, ComplexMatrix)>> {
        for l in index_labels {
            if !self.classical.contains(*l) {
                return Err(Error::InvalidArgument(format!(
                    "label `{l}` is not flagged classical"
                )));
            }
        }
        let keep: Vec<&str> = index_labels.iter().chain(state_labels.iter()).copied().collect();
        let joint = self.marginal(&keep)?;
        let idx_pos = joint.layout.positions_of(index_labels)?;
        let st_pos = joint.layout.positions_of(state_labels)?;
        let idx_layout = joint.layout.sublayout(&idx_pos);
        let st_layout = joint.layout.sublayout(&st_pos);
        let strides = joint.layout.strides();
        let ds = st_layout.total_dim();

        let mut out = Vec::new();
        for cell in 0..idx_layout.total_dim() {
            let cell_multi = idx_layout.unravel(cell);
            let base: usize =
                cell_multi.iter().zip(&idx_pos).map(|(i, &p)| i * strides[p]).sum();
            let mut block = ComplexMatrix::zeros(ds, ds);
            for r in 0..ds {
                let rm = st_layout.unravel(r);
                let ro: usize = rm.iter().zip(&st_pos).map(|(i, &p)| i * strides[p]).sum();
                for c in 0..ds {
                    let cm = st_layout.unravel(c);
                    let co: usize = cm.iter().zip(&st_pos).map(|(i, &p)| i * strides[p]).sum();
                    block[(r, c)] = joint.matrix[(base + ro, base + co)];
                }
            }
            let w = block.trace().re;
            if w > PROB_TOL {
                out.push((w, block.scale(Complex64::new(1.0 / w, 0.0))));
            }
        }
        Ok(out)
    }

    /// Decomposition along all classical labels: weights and normalized blocks
    /// on the quantum labels (in layout order). Zero-weight cells are skipped.
    /// For a fully classical state the blocks are 1x1.
    pub fn classical_blocks(&self) -> Result<Vec<(f64, ComplexMatrix)>> {
        let classical: Vec<String> = self
            .layout
            .labels()
            .iter()
            .filter(|l| self.classical.contains(*l))
            .cloned()
            .collect();
        let quantum: Vec<&str> = self
            .layout
            .labels()
            .iter()
            .filter(|l| !self.classical.contains(*l))
            .map(|s| s.as_str())
            .collect();
        let idx: Vec<&str> = classical.iter().map(|s| s.as_str()).collect();
        if idx.is_empty() {
            return Ok(vec![(1.0, self.matrix.clone())]);
        }
        self.classical_ensemble(&idx, &quantum)
    }

    /// Joint distribution over the computational indices of `labels`
    /// (diagonal weights of the corresponding marginal).
    pub fn diagonal_distribution(&self, labels: &[&str]) -> Result<ClassicalDistribution> {
        let m = self.marginal(labels)?;
        let d = m.dim();
        let probs: Vec<f64> = (0..d).map(|i| m.matrix[(i, i)].re.max(0.0)).collect();
        ClassicalDistribution::new(m.layout.dims().to_vec(), probs)
    }
}

struct DensityStateDiff<'a> {
    layout: &'a SubsystemLayout,
    a: &'a ComplexMatrix,
    b: &'a ComplexMatrix,
}

impl DensityStateDiff<'_> {
    /// `½ Tr |a − b|` summed over the blocks selected by the shared classical
    /// labels; equals the full trace distance because both operators are
    /// block-diagonal there.
    fn blockwise_trace_norm(&self, shared: &[&str]) -> Result<f64> {
        let pos = self.layout.positions_of(shared)?;
        let rest: Vec<usize> = (0..self.layout.len()).filter(|p| !pos.contains(p)).collect();
        let cell_layout = self.layout.sublayout(&pos);
        let rest_layout = self.layout.sublayout(&rest);
        let strides = self.layout.strides();
        let dr = rest_layout.total_dim();
        let mut total = 0.0;
        for cell in 0..cell_layout.total_dim() {
            let cm = cell_layout.unravel(cell);
            let base: usize = cm.iter().zip(&pos).map(|(i, &p)| i * strides[p]).sum();
            let mut block = ComplexMatrix::zeros(dr, dr);
            for r in 0..dr {
                let rm = rest_layout.unravel(r);
                let ro: usize = rm.iter().zip(&rest).map(|(i, &p)| i * strides[p]).sum();
                for c in 0..dr {
                    let ccm = rest_layout.unravel(c);
                    let co: usize = ccm.iter().zip(&rest).map(|(i, &p)| i * strides[p]).sum();
                    block[(r, c)] = self.a[(base + ro, base + co)] - self.b[(base + ro, base + co)];
                }
            }
            total += crate::linalg::trace_norm_half(&block)?;
        }
        Ok(total)
    }
}

/// Nonnegative dense tensor over finite per-party alphabets, summing to one.
/// The flat index is lexicographic with the first party most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDistribution {
    alphabet_sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(alphabet_sizes: Vec<usize>, mut probs: Vec<f64>) -> Result<Self> {
        let total: usize = alphabet_sizes.iter().product();
        if alphabet_sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidArgument("alphabet sizes must be >= 1".into()));
        }
        if probs.len() != total {
            return Err(Error::DimMismatch(format!(
                "distribution needs {} entries, got {}",
                total,
                probs.len()
            )));
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -1e-12 {
                return Err(Error::InvariantViolation(format!("negative probability {p}")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvariantViolation(format!(
                "probabilities sum to {sum:.15}, expected 1"
            )));
        }
        Ok(Self { alphabet_sizes, probs })
    }

    pub fn alphabet_sizes(&self) -> &[usize] {
        &self.alphabet_sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn parties(&self) -> usize {
        self.alphabet_sizes.len()
    }

    pub fn prob(&self, multi: &[usize]) -> f64 {
        self.probs[self.ravel(multi)]
    }

    pub fn ravel(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.alphabet_sizes.len());
        let mut idx = 0;
        for (i, &s) in multi.iter().zip(&self.alphabet_sizes) {
            idx = idx * s + i;
        }
        idx
    }

    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut multi = vec![0usize; self.alphabet_sizes.len()];
        for (k, &s) in self.alphabet_sizes.iter().enumerate().rev() {
            multi[k] = idx % s;
            idx /= s;
        }
        multi
    }

    /// Regroup parties: each group of source parties becomes one party with a
    /// merged (lexicographic) alphabet; source parties not listed are summed
    /// out. Groups must not repeat a party.
    pub fn regroup(&self, groups: &[Vec<usize>]) -> Result<ClassicalDistribution> {
        let mut seen = BTreeSet::new();
        for g in groups {
            for &p in g {
                if p >= self.parties() {
                    return Err(Error::InvalidArgument(format!("no party {p}")));
                }
                if !seen.insert(p) {
                    return Err(Error::InvalidArgument(format!("party {p} listed twice")));
                }
            }
        }
        let new_sizes: Vec<usize> = groups
            .iter()
            .map(|g| g.iter().map(|&p| self.alphabet_sizes[p]).product())
            .collect();
        let total: usize = new_sizes.iter().product();
        let mut out = vec![0.0f64; total];
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let multi = self.unravel(idx);
            let mut target = 0usize;
            for (gi, g) in groups.iter().enumerate() {
                let mut within = 0usize;
                for &src in g {
                    within = within * self.alphabet_sizes[src] + multi[src];
                }
                target = target * new_sizes[gi] + within;
            }
            out[target] += p;
        }
        ClassicalDistribution::new(new_sizes, out)
    }

    /// Marginal on the listed parties (kept in the given order).
    pub fn marginal(&self, parties: &[usize]) -> Result<ClassicalDistribution> {
        let groups: Vec<Vec<usize>> = parties.iter().map(|&p| vec![p]).collect();
        self.regroup(&groups)
    }

    /// Shannon entropy (bits) of the whole tensor.
    pub fn shannon(&self) -> f64 {
        shannon_entropy(&self.probs)
    }

    /// Shannon entropy (bits) of the marginal on `parties`.
    pub fn entropy_of(&self, parties: &[usize]) -> Result<f64> {
        Ok(self.marginal(parties)?.shannon())
    }

    /// `I(0:1|2)` of a tripartite distribution, in bits.
    pub fn cmi(&self) -> Result<f64> {
        if self.parties() != 3 {
            return Err(Error::InvalidArgument(format!(
                "conditional mutual information needs 3 parties, got {}",
                self.parties()
            )));
        }
        let sae = self.entropy_of(&[0, 2])?;
        let sbe = self.entropy_of(&[1, 2])?;
        let sabe = self.shannon();
        let se = self.entropy_of(&[2])?;
        Ok(sae + sbe - sabe - se)
    }

    /// `I(0:1)` of a bipartite (or wider, via marginal) distribution, in bits.
    pub fn mutual_information(&self, a: usize, b: usize) -> Result<f64> {
        let sa = self.entropy_of(&[a])?;
        let sb = self.entropy_of(&[b])?;
        let sab = self.entropy_of(&[a, b])?;
        Ok(sa + sb - sab)
    }

    /// Push the alphabet of `party` through a row-stochastic matrix
    /// (`rows = old alphabet`, `cols = new alphabet`, row-major).
    pub fn apply_stochastic(
        &self,
        party: usize,
        q: &[f64],
        new_size: usize,
    ) -> Result<ClassicalDistribution> {
        if party >= self.parties() {
            return Err(Error::InvalidArgument(format!("no party {party}")));
        }
        let old = self.alphabet_sizes[party];
        if q.len() != old * new_size {
            return Err(Error::DimMismatch(format!(
                "stochastic matrix needs {} entries, got {}",
                old * new_size,
                q.len()
            )));
        }
        let mut sizes = self.alphabet_sizes.clone();
        sizes[party] = new_size;
        let total: usize = sizes.iter().product();
        let mut out = vec![0.0f64; total];
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut multi = self.unravel(idx);
            let src = multi[party];
            for dst in 0..new_size {
                let w = q[src * new_size + dst];
                if w == 0.0 {
                    continue;
                }
                multi[party] = dst;
                out[ravel_in(&sizes, &multi)] += p * w;
            }
        }
        // renormalize away accumulated rounding
        let sum: f64 = out.iter().sum();
        if sum > 0.0 {
            for v in out.iter_mut() {
                *v /= sum;
            }
        }
        ClassicalDistribution::new(sizes, out)
    }

    /// Flat indices of cells with probability above [`PROB_TOL`].
    pub fn support(&self) -> Vec<usize> {
        (0..self.probs.len()).filter(|&i| self.probs[i] > PROB_TOL).collect()
    }
}

fn ravel_in(sizes: &[usize], multi: &[usize]) -> usize {
    let mut idx = 0;
    for (i, &s) in multi.iter().zip(sizes) {
        idx = idx * s + i;
    }
    idx
}

/// `−Σ p log₂ p` with `0·log 0 = 0`.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
}

/// Finite list of positive operators summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let povm = Self::from_elements_unchecked(elements)?;
        povm.validate()?;
        Ok(povm)
    }

    pub(crate) fn from_elements_unchecked(elements: Vec<ComplexMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidArgument("POVM needs at least one element".into()));
        }
        let d = elements[0].rows();
        for e in &elements {
            if !e.is_square() || e.rows() != d {
                return Err(Error::DimMismatch("POVM elements must share one dimension".into()));
            }
        }
        Ok(Self { elements })
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for e in &self.elements {
            if !e.is_hermitian(HERMITIAN_TOL) {
                return Err(Error::InvariantViolation("POVM element not Hermitian".into()));
            }
            let eig = hermitian_eig(e)?;
            if let Some(min) = eig.eigenvalues.last() {
                if *min < -1e-10 {
                    return Err(Error::InvariantViolation(format!(
                        "POVM element has negative eigenvalue {min:.3e}"
                    )));
                }
            }
            sum = sum.add(e)?;
        }
        if sum.max_entry_diff(&ComplexMatrix::identity(d)) > 1e-9 {
            return Err(Error::InvariantViolation("POVM elements do not sum to identity".into()));
        }
        Ok(())
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    /// Projective measurement in the computational basis.
    pub fn computational(d: usize) -> Self {
        let elements = (0..d)
            .map(|i| {
                let mut v = vec![Complex64::new(0.0, 0.0); d];
                v[i] = Complex64::new(1.0, 0.0);
                ComplexMatrix::projector(&v)
            })
            .collect();
        Self { elements }
    }

    /// Projective measurement in the basis given by the columns of `u`.
    pub fn from_basis(u: &ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::DimMismatch("basis matrix must be square".into()));
        }
        let d = u.rows();
        let elements = (0..d)
            .map(|k| {
                let col: Vec<Complex64> = (0..d).map(|r| u[(r, k)]).collect();
                ComplexMatrix::projector(&col)
            })
            .collect();
        Povm::new(elements)
    }
}

/// Completely positive trace-preserving map in Stinespring form: an isometry
/// from the input into `output ⊗ environment`, followed by tracing out the
/// environment.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    pub in_dim: usize,
    pub out_dim: usize,
    pub env_dim: usize,
    isometry: ComplexMatrix,
}

impl QuantumChannel {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        env_dim: usize,
        isometry: ComplexMatrix,
    ) -> Result<Self> {
        if isometry.rows() != out_dim * env_dim || isometry.cols() != in_dim {
            return Err(Error::DimMismatch(format!(
                "isometry must be {}x{}, got {}x{}",
                out_dim * env_dim,
                in_dim,
                isometry.rows(),
                isometry.cols()
            )));
        }
        let gram = isometry.adjoint().matmul(&isometry)?;
        if gram.max_entry_diff(&ComplexMatrix::identity(in_dim)) > 1e-9 {
            return Err(Error::InvariantViolation("V†V differs from identity".into()));
        }
        Ok(Self { in_dim, out_dim, env_dim, isometry })
    }

    pub fn isometry(&self) -> &ComplexMatrix {
        &self.isometry
    }

    pub fn identity(d: usize) -> Self {
        Self { in_dim: d, out_dim: d, env_dim: 1, isometry: ComplexMatrix::identity(d) }
    }

    /// Channel discarding its input (one-dimensional output).
    pub fn trace_out(d: usize) -> Self {
        Self { in_dim: d, out_dim: 1, env_dim: d, isometry: ComplexMatrix::identity(d) }
    }

    /// Measurement in the computational basis, outcome kept as the output.
    pub fn dephasing(d: usize) -> Self {
        let mut v = ComplexMatrix::zeros(d * d, d);
        for s in 0..d {
            v[(s * d + s, s)] = Complex64::new(1.0, 0.0);
        }
        Self { in_dim: d, out_dim: d, env_dim: d, isometry: v }
    }

    /// Channel mapping every input to `|0><0|` on a `d_out`-dimensional output.
    pub fn forget(d: usize, d_out: usize) -> Self {
        let mut v = ComplexMatrix::zeros(d_out * d, d);
        for s in 0..d {
            v[(s, s)] = Complex64::new(1.0, 0.0);
        }
        Self { in_dim: d, out_dim: d_out, env_dim: d, isometry: v }
    }

    /// Channel replacing every input by the maximally mixed state.
    pub fn depolarizing(d: usize) -> Self {
        let mut v = ComplexMatrix::zeros(d * d * d, d);
        let w = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        for s in 0..d {
            for k in 0..d {
                v[(k * d * d + k * d + s, s)] = w;
            }
        }
        Self { in_dim: d, out_dim: d, env_dim: d * d, isometry: v }
    }

    /// Apply to a bare matrix on the input space.
    pub fn apply_matrix(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.in_dim || rho.cols() != self.in_dim {
            return Err(Error::DimMismatch(format!(
                "channel input is {}-dimensional, state is {}x{}",
                self.in_dim,
                rho.rows(),
                rho.cols()
            )));
        }
        let big = self.isometry.matmul(rho)?.matmul(&self.isometry.adjoint())?;
        let layout = SubsystemLayout::new(&[("out", self.out_dim), ("env", self.env_dim)])?;
        partial_trace(&big, &layout, &["out"])
    }
}

/// Assignment of layout labels to Alice, Bob, and Eve.
#[derive(Debug, Clone, PartialEq)]
pub struct Parties {
    pub alice: Vec<String>,
    pub bob: Vec<String>,
    pub eve: Vec<String>,
}

impl Parties {
    pub fn new<S: AsRef<str>>(alice: &[S], bob: &[S], eve: &[S]) -> Self {
        Self {
            alice: alice.iter().map(|s| s.as_ref().to_string()).collect(),
            bob: bob.iter().map(|s| s.as_ref().to_string()).collect(),
            eve: eve.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    /// Labels starting with `A` go to Alice, labels starting with `B` to Bob,
    /// everything else to Eve.
    pub fn infer(layout: &SubsystemLayout) -> Self {
        let mut alice = Vec::new();
        let mut bob = Vec::new();
        let mut eve = Vec::new();
        for l in layout.labels() {
            if l.starts_with('A') {
                alice.push(l.clone());
            } else if l.starts_with('B') {
                bob.push(l.clone());
            } else {
                eve.push(l.clone());
            }
        }
        Self { alice, bob, eve }
    }

    /// Checks the three sets exactly cover the layout's labels.
    pub fn check_cover(&self, layout: &SubsystemLayout) -> Result<()> {
        let mut all: Vec<&String> =
            self.alice.iter().chain(&self.bob).chain(&self.eve).collect();
        all.sort_unstable();
        for w in all.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidArgument(format!(
                    "label `{}` assigned to two parties",
                    w[0]
                )));
            }
        }
        for l in &all {
            layout.position(l)?;
        }
        if all.len() != layout.len() {
            return Err(Error::InvalidArgument(
                "party assignment must cover every subsystem".into(),
            ));
        }
        Ok(())
    }

    pub fn alice_refs(&self) -> Vec<&str> {
        self.alice.iter().map(|s| s.as_str()).collect()
    }

    pub fn bob_refs(&self) -> Vec<&str> {
        self.bob.iter().map(|s| s.as_str()).collect()
    }

    pub fn eve_refs(&self) -> Vec<&str> {
        self.eve.iter().map(|s| s.as_str()).collect()
    }

    pub fn labels_of(&self, party: PartyId) -> &[String] {
        match party {
            PartyId::Alice => &self.alice,
            PartyId::Bob => &self.bob,
        }
    }

    pub fn labels_of_mut(&mut self, party: PartyId) -> &mut Vec<String> {
        match party {
            PartyId::Alice => &mut self.alice,
            PartyId::Bob => &mut self.bob,
        }
    }

    pub fn owner(&self, label: &str) -> Option<&'static str> {
        if self.alice.iter().any(|l| l == label) {
            Some("A")
        } else if self.bob.iter().any(|l| l == label) {
            Some("B")
        } else if self.eve.iter().any(|l| l == label) {
            Some("E")
        } else {
            None
        }
    }
}

/// One of the two protocol-running parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartyId {
    Alice,
    Bob,
}

impl std::fmt::Display for PartyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PartyId::Alice => write!(f, "A"),
            PartyId::Bob => write!(f, "B"),
        }
    }
}
