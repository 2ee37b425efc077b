//! Pure states on labeled subsystems.
//!
//! Optimization objectives run on purifications: applying a Stinespring
//! isometry to one register of a pure state is a cheap tensor contraction,
//! and the entropy of any marginal equals the entropy of its complement, so
//! every eigenproblem can be taken on the smaller side.

use num_complex::Complex64;

use crate::linalg::{hermitian_eig, ComplexMatrix, SubsystemLayout};
use crate::states::{shannon_entropy, DensityState};
use crate::{Error, Result};

/// Normalized state vector on a labeled tensor product of subsystems.
#[derive(Debug, Clone)]
pub struct PureState {
    layout: SubsystemLayout,
    amps: Vec<Complex64>,
}

impl PureState {
    pub fn new(layout: SubsystemLayout, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::DimMismatch(format!(
                "layout dimension {} but {} amplitudes",
                layout.total_dim(),
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvariantViolation(format!(
                "state vector has norm² {norm:.12}, expected 1"
            )));
        }
        Ok(Self { layout, amps })
    }

    /// Normalizes the amplitudes; errors on the zero vector.
    pub fn normalized(layout: SubsystemLayout, amps: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-150 {
            return Err(Error::InvalidArgument("cannot normalize the zero vector".into()));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(Self { layout, amps })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Tensor product with another pure state (disjoint labels).
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let mut labels = self.layout.labels().to_vec();
        labels.extend(other.layout.labels().iter().cloned());
        let mut dims = self.layout.dims().to_vec();
        dims.extend(other.layout.dims());
        let layout = SubsystemLayout::from_vecs(labels, dims)?;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(PureState { layout, amps })
    }

    /// Attach a fresh subsystem in the given (normalized) vector state.
    pub fn attach(&self, label: &str, vector: &[Complex64]) -> Result<PureState> {
        let layout = SubsystemLayout::new(&[(label, vector.len())])?;
        let other = PureState::normalized(layout, vector.to_vec())?;
        self.tensor(&other)
    }

    /// Permute subsystems into the given label order.
    pub fn reorder(&self, new_order: &[&str]) -> Result<PureState> {
        if new_order.len() != self.layout.len() {
            return Err(Error::InvalidArgument("reorder must list every label".into()));
        }
        let positions: Vec<usize> =
            new_order.iter().map(|l| self.layout.position(l)).collect::<Result<_>>()?;
        let new_layout = self.layout.sublayout(&positions);
        let d = self.dim();
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        for (idx, amp) in amps.iter_mut().enumerate() {
            let multi = new_layout.unravel(idx);
            let mut old = vec![0usize; self.layout.len()];
            for (k, &p) in positions.iter().enumerate() {
                old[p] = multi[k];
            }
            *amp = self.amps[self.layout.ravel(&old)];
        }
        Ok(PureState { layout: new_layout, amps })
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<PureState> {
        let pos = self.layout.position(from)?;
        if self.layout.contains(to) && to != from {
            return Err(Error::InvalidArgument(format!("label `{to}` already exists")));
        }
        let mut labels = self.layout.labels().to_vec();
        labels[pos] = to.to_string();
        let layout = SubsystemLayout::from_vecs(labels, self.layout.dims().to_vec())?;
        Ok(PureState { layout, amps: self.amps.clone() })
    }

    /// Fuse adjacent-in-layout `labels` (given in layout order) into a single
    /// subsystem named `new_label`. Labels need not be adjacent: the state is
    /// reordered so they are, preserving the relative order of the rest.
    pub fn merge_labels(&self, labels: &[&str], new_label: &str) -> Result<PureState> {
        let merge_pos = self.layout.positions_of(labels)?;
        if merge_pos.len() != labels.len() {
            return Err(Error::InvalidArgument("merge_labels repeats a label".into()));
        }
        // order: merged labels first (layout order), then the rest
        let mut order: Vec<&str> = merge_pos
            .iter()
            .map(|&p| self.layout.labels()[p].as_str())
            .collect();
        for (i, l) in self.layout.labels().iter().enumerate() {
            if !merge_pos.contains(&i) {
                order.push(l.as_str());
            }
        }
        let reordered = self.reorder(&order)?;
        let merged_dim: usize = merge_pos.iter().map(|&p| self.layout.dims()[p]).product();
        let mut labels_new = vec![new_label.to_string()];
        let mut dims_new = vec![merged_dim];
        for (l, d) in reordered
            .layout
            .labels()
            .iter()
            .zip(reordered.layout.dims())
            .skip(merge_pos.len())
        {
            labels_new.push(l.clone());
            dims_new.push(*d);
        }
        let layout = SubsystemLayout::from_vecs(labels_new, dims_new)?;
        Ok(PureState { layout, amps: reordered.amps })
    }

    /// Apply an isometry `v` (rows = out_dim·env_dim, cols = label dim) to one
    /// subsystem, replacing it by two subsystems `out_label` and `env_label`.
    pub fn apply_isometry(
        &self,
        label: &str,
        v: &ComplexMatrix,
        out_dim: usize,
        env_dim: usize,
        out_label: &str,
        env_label: &str,
    ) -> Result<PureState> {
        let pos = self.layout.position(label)?;
        let d_in = self.layout.dims()[pos];
        if v.cols() != d_in || v.rows() != out_dim * env_dim {
            return Err(Error::DimMismatch(format!(
                "isometry is {}x{}, expected {}x{}",
                v.rows(),
                v.cols(),
                out_dim * env_dim,
                d_in
            )));
        }
        // strides with `label` factored out: idx = left*d_in*right + s*right + r
        let dims = self.layout.dims();
        let right: usize = dims[pos + 1..].iter().product();
        let left: usize = dims[..pos].iter().product();

        let mut labels_new: Vec<String> = Vec::with_capacity(self.layout.len() + 1);
        let mut dims_new: Vec<usize> = Vec::with_capacity(self.layout.len() + 1);
        for (i, (l, d)) in self.layout.labels().iter().zip(dims).enumerate() {
            if i == pos {
                labels_new.push(out_label.to_string());
                dims_new.push(out_dim);
                labels_new.push(env_label.to_string());
                dims_new.push(env_dim);
            } else {
                labels_new.push(l.clone());
                dims_new.push(*d);
            }
        }
        let layout = SubsystemLayout::from_vecs(labels_new, dims_new)?;
        let d_out = out_dim * env_dim;
        let mut amps = vec![Complex64::new(0.0, 0.0); left * d_out * right];
        for lft in 0..left {
            for s in 0..d_in {
                let base_in = (lft * d_in + s) * right;
                for o in 0..d_out {
                    let w = v[(o, s)];
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    let base_out = (lft * d_out + o) * right;
                    for r in 0..right {
                        amps[base_out + r] += w * self.amps[base_in + r];
                    }
                }
            }
        }
        Ok(PureState { layout, amps })
    }

    /// Apply a unitary to one subsystem in place of `apply_isometry` with a
    /// trivial environment.
    pub fn apply_unitary(&self, label: &str, u: &ComplexMatrix) -> Result<PureState> {
        let d = self.layout.dim_of(label)?;
        let merged = self.apply_isometry(label, u, d, 1, label, "_env_unit")?;
        // drop the trivial environment label
        let mut labels = Vec::new();
        let mut dims = Vec::new();
        for (l, dd) in merged.layout.labels().iter().zip(merged.layout.dims()) {
            if l != "_env_unit" {
                labels.push(l.clone());
                dims.push(*dd);
            }
        }
        let layout = SubsystemLayout::from_vecs(labels, dims)?;
        Ok(PureState { layout, amps: merged.amps })
    }

    /// Reduced density matrix on `labels` (layout order preserved).
    pub fn marginal_matrix(&self, labels: &[&str]) -> Result<ComplexMatrix> {
        let keep_pos = self.layout.positions_of(labels)?;
        let rest_pos: Vec<usize> =
            (0..self.layout.len()).filter(|p| !keep_pos.contains(p)).collect();
        let keep_layout = self.layout.sublayout(&keep_pos);
        let rest_layout = self.layout.sublayout(&rest_pos);
        let strides = self.layout.strides();
        let dk = keep_layout.total_dim();
        let dr = rest_layout.total_dim();

        let keep_offsets: Vec<usize> = (0..dk)
            .map(|i| {
                let m = keep_layout.unravel(i);
                m.iter().zip(&keep_pos).map(|(ix, &p)| ix * strides[p]).sum()
            })
            .collect();
        let rest_offsets: Vec<usize> = (0..dr)
            .map(|i| {
                let m = rest_layout.unravel(i);
                m.iter().zip(&rest_pos).map(|(ix, &p)| ix * strides[p]).sum()
            })
            .collect();

        let mut out = ComplexMatrix::zeros(dk, dk);
        for (r, ro) in keep_offsets.iter().enumerate() {
            for (c, co) in keep_offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in &rest_offsets {
                    acc += self.amps[ro + t] * self.amps[co + t].conj();
                }
                out[(r, c)] = acc;
            }
        }
        Ok(out)
    }

    /// Von Neumann entropy (bits) of the reduced state on `labels`, computed
    /// on the smaller of the subset and its complement.
    pub fn entropy_of(&self, labels: &[&str]) -> Result<f64> {
        let keep_pos = self.layout.positions_of(labels)?;
        let dk: usize = keep_pos.iter().map(|&p| self.layout.dims()[p]).product();
        let dr = self.dim() / dk;
        let side: Vec<&str> = if dk <= dr {
            labels.to_vec()
        } else {
            self.layout
                .labels()
                .iter()
                .enumerate()
                .filter(|(i, _)| !keep_pos.contains(i))
                .map(|(_, l)| l.as_str())
                .collect()
        };
        let m = self.marginal_matrix(&side)?;
        let eig = hermitian_eig(&m)?;
        let probs: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        Ok(shannon_entropy(&probs))
    }

    /// Full density operator `|ψ⟩⟨ψ|` (no classical flags).
    pub fn to_density(&self) -> DensityState {
        let d = self.dim();
        let m = ComplexMatrix::from_fn(d, d, |r, c| self.amps[r] * self.amps[c].conj());
        DensityState::from_parts_unchecked(self.layout.clone(), m, &[]).expect("shape is valid")
    }

    /// Measure `labels` in their computational bases, keeping the outcome: the
    /// projective mixture `Σ_c (Π_c ψ)(Π_c ψ)†` with those labels flagged
    /// classical.
    pub fn measure(&self, labels: &[&str]) -> Result<DensityState> {
        let positions = self.layout.positions_of(labels)?;
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        let multis: Vec<Vec<usize>> = (0..d).map(|i| self.layout.unravel(i)).collect();
        for r in 0..d {
            if self.amps[r].norm_sqr() == 0.0 {
                continue;
            }
            for c in 0..d {
                if positions.iter().all(|&p| multis[r][p] == multis[c][p]) {
                    m[(r, c)] = self.amps[r] * self.amps[c].conj();
                }
            }
        }
        let all_classical: Vec<&str> = labels.to_vec();
        DensityState::from_parts_unchecked(self.layout.clone(), m, &all_classical)
    }

    /// Reduced density state on `labels` as a [`DensityState`] (no flags).
    pub fn marginal_state(&self, labels: &[&str]) -> Result<DensityState> {
        let m = self.marginal_matrix(labels)?;
        let keep_pos = self.layout.positions_of(labels)?;
        let sub = self.layout.sublayout(&keep_pos);
        DensityState::from_parts_unchecked(sub, m, &[])
    }
}

/// Purify a density state: eigendecompose and entangle with a fresh register
/// `pur_label` whose dimension is the numerical rank (eigenvalues above
/// 1e-14; at least one).
pub fn purify(rho: &DensityState, pur_label: &str) -> Result<PureState> {
    if rho.layout().contains(pur_label) {
        return Err(Error::InvalidArgument(format!("label `{pur_label}` already exists")));
    }
    let eig = hermitian_eig(rho.matrix())?;
    let kept: Vec<usize> =
        (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > 1e-14).collect();
    let rank = kept.len().max(1);
    let d = rho.dim();
    let mut labels = rho.layout().labels().to_vec();
    labels.push(pur_label.to_string());
    let mut dims = rho.layout().dims().to_vec();
    dims.push(rank);
    let layout = SubsystemLayout::from_vecs(labels, dims)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); d * rank];
    for (slot, &k) in kept.iter().enumerate() {
        let w = eig.eigenvalues[k].max(0.0).sqrt();
        for r in 0..d {
            amps[r * rank + slot] = eig.eigenvectors[(r, k)] * w;
        }
    }
    PureState::normalized(layout, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::random::random_density;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn purify_reproduces_marginal() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let rho = random_density(&mut rng, &[("A", 2), ("B", 3)]);
        let psi = purify(&rho, "P").unwrap();
        let back = psi.marginal_matrix(&["A", "B"]).unwrap();
        assert!(back.max_entry_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn entropy_subset_equals_complement() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let rho = random_density(&mut rng, &[("A", 2), ("B", 2)]);
        let psi = purify(&rho, "P").unwrap();
        let s_ab = psi.entropy_of(&["A", "B"]).unwrap();
        let s_p = psi.entropy_of(&["P"]).unwrap();
        assert!((s_ab - s_p).abs() < 1e-9);
    }

    #[test]
    fn isometry_application_matches_channel_on_density() {
        use crate::optimize::{channel_from_isometry, IsometryParam};
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let rho = random_density(&mut rng, &[("A", 2), ("E", 2)]);
        let param = IsometryParam::random(&mut rng, 2, 4);
        let ch = channel_from_isometry(&param, 2, 2).unwrap();

        // via DensityState
        let direct = crate::states::apply_channel(&rho, &ch, "E").unwrap();

        // via purification
        let psi = purify(&rho, "P").unwrap();
        let phi = psi.apply_isometry("E", ch.isometry(), 2, 2, "E", "nv").unwrap();
        let back = phi.marginal_matrix(&["A", "E"]).unwrap();
        assert!(back.max_entry_diff(direct.matrix()) < 1e-9);
    }
}
