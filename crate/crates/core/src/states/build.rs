//! Builders: classical-to-quantum embeddings, ideal and twisted key states,
//! and the named example states (gap distribution, flower state, Bell-locking
//! state, embedding counterexample).

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::linalg::{hermitian_eig, kron, partial_trace, ComplexMatrix, SubsystemLayout};
use crate::states::{
    ClassicalDistribution, DensityState, Povm, PureState, QuantumChannel, PROB_TOL,
};
use crate::{Error, Result};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Diagonal (fully classical) state carrying a probability distribution, one
/// labeled register per party.
pub fn from_distribution(p: &ClassicalDistribution, labels: &[&str]) -> Result<DensityState> {
    if labels.len() != p.parties() {
        return Err(Error::InvalidArgument(format!(
            "distribution has {} parties but {} labels given",
            p.parties(),
            labels.len()
        )));
    }
    let parts: Vec<(&str, usize)> =
        labels.iter().zip(p.alphabet_sizes()).map(|(l, d)| (*l, *d)).collect();
    let layout = SubsystemLayout::new(&parts)?;
    let matrix = ComplexMatrix::diag(p.probs());
    DensityState::from_parts_unchecked(layout, matrix, labels)
}

/// Ideal key state `τ^ℓ`: uniform perfectly correlated ℓ-bit registers for
/// Alice and Bob, in tensor product with an arbitrary Eve state.
pub fn ideal_key_state(ell: u32, eve_state: Option<&DensityState>) -> Result<DensityState> {
    if ell == 0 {
        return Err(Error::InvalidArgument("key length must be >= 1".into()));
    }
    let d = 1usize << ell;
    let layout = SubsystemLayout::new(&[("A", d), ("B", d)])?;
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    let w = 1.0 / d as f64;
    for i in 0..d {
        m[(i * d + i, i * d + i)] = c(w, 0.0);
    }
    let key = DensityState::from_parts_unchecked(layout, m, &["A", "B"])?;
    match eve_state {
        None => Ok(key),
        Some(eve) => key.tensor(eve),
    }
}

/// Twisted key state `γ^ℓ = U (|ψ⟩⟨ψ|^{⊗ℓ} ⊗ ρ_shield) U†` with the
/// controlled twist `U = Σ_i |ii⟩⟨ii| ⊗ U^{(i)}` (identity off the key
/// diagonal). Measuring A and B in the computational basis yields perfectly
/// correlated uniform ℓ-bit outcomes regardless of the twists.
pub fn twisted_key_state(
    ell: u32,
    twist_unitaries: &[ComplexMatrix],
    shield: &DensityState,
) -> Result<DensityState> {
    if ell == 0 {
        return Err(Error::InvalidArgument("key length must be >= 1".into()));
    }
    let d = 1usize << ell;
    if twist_unitaries.len() != d {
        return Err(Error::DimMismatch(format!(
            "need {} twist unitaries, got {}",
            d,
            twist_unitaries.len()
        )));
    }
    let ds = shield.dim();
    for u in twist_unitaries {
        if u.rows() != ds || u.cols() != ds {
            return Err(Error::DimMismatch(format!(
                "twist unitary is {}x{}, shield dimension is {}",
                u.rows(),
                u.cols(),
                ds
            )));
        }
        let gram = u.adjoint().matmul(u)?;
        if gram.max_entry_diff(&ComplexMatrix::identity(ds)) > 1e-9 {
            return Err(Error::InvariantViolation("twist is not unitary".into()));
        }
    }
    if shield.layout().contains("A") || shield.layout().contains("B") {
        return Err(Error::InvalidArgument("shield labels `A`/`B` collide with the key".into()));
    }

    // |Φ⟩ = 2^{-ℓ/2} Σ_i |ii⟩ on A,B
    let amp = 1.0 / (d as f64).sqrt();
    let mut phi = vec![c(0.0, 0.0); d * d];
    for i in 0..d {
        phi[i * d + i] = c(amp, 0.0);
    }
    let base = ComplexMatrix::projector(&phi);
    let full = kron(&base, shield.matrix());

    let total = d * d * ds;
    let mut u_full = ComplexMatrix::zeros(total, total);
    for a in 0..d {
        for b in 0..d {
            for s_out in 0..ds {
                for s_in in 0..ds {
                    let w = if a == b {
                        twist_unitaries[a][(s_out, s_in)]
                    } else if s_out == s_in {
                        c(1.0, 0.0)
                    } else {
                        continue;
                    };
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    u_full[((a * d + b) * ds + s_out, (a * d + b) * ds + s_in)] = w;
                }
            }
        }
    }
    let twisted = u_full.matmul(&full)?.matmul(&u_full.adjoint())?;

    let mut labels = vec!["A".to_string(), "B".to_string()];
    let mut dims = vec![d, d];
    for (l, dd) in shield.layout().labels().iter().zip(shield.layout().dims()) {
        labels.push(l.clone());
        dims.push(*dd);
    }
    let layout = SubsystemLayout::from_vecs(labels, dims)?;
    DensityState::from_parts_unchecked(layout, twisted, &[])
}

/// Coherent amplitude embedding `|ψ⟩ = Σ √p |i…⟩` of a distribution, as a
/// state vector.
pub fn qqq_embed_vector(p: &ClassicalDistribution, labels: &[&str]) -> Result<PureState> {
    if labels.len() != p.parties() {
        return Err(Error::InvalidArgument(format!(
            "distribution has {} parties but {} labels given",
            p.parties(),
            labels.len()
        )));
    }
    let parts: Vec<(&str, usize)> =
        labels.iter().zip(p.alphabet_sizes()).map(|(l, d)| (*l, *d)).collect();
    let layout = SubsystemLayout::new(&parts)?;
    let amps: Vec<Complex64> = p.probs().iter().map(|&q| c(q.max(0.0).sqrt(), 0.0)).collect();
    PureState::normalized(layout, amps)
}

/// Coherent amplitude embedding as a density state.
pub fn qqq_embed(p: &ClassicalDistribution, labels: &[&str]) -> Result<DensityState> {
    Ok(qqq_embed_vector(p, labels)?.to_density())
}

/// Measured embedding of a tripartite distribution: classical registers for
/// Alice and Bob, Eve keeping the conditional amplitude vector
/// `|ψ^{ij}⟩ = Σ_k √(p_{ijk}/p_{ij}) |k⟩`.
pub fn ccq_embed(p: &ClassicalDistribution, labels: &[&str]) -> Result<DensityState> {
    if p.parties() != 3 || labels.len() != 3 {
        return Err(Error::InvalidArgument("ccq embedding needs a tripartite distribution".into()));
    }
    let sizes = p.alphabet_sizes();
    let (da, db, de) = (sizes[0], sizes[1], sizes[2]);
    let layout =
        SubsystemLayout::new(&[(labels[0], da), (labels[1], db), (labels[2], de)])?;
    let d = da * db * de;
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..da {
        for j in 0..db {
            let pij: f64 = (0..de).map(|k| p.prob(&[i, j, k])).sum();
            if pij <= PROB_TOL {
                continue;
            }
            let psi: Vec<Complex64> =
                (0..de).map(|k| c((p.prob(&[i, j, k]) / pij).max(0.0).sqrt(), 0.0)).collect();
            let base = (i * db + j) * de;
            for r in 0..de {
                for cc in 0..de {
                    m[(base + r, base + cc)] = psi[r] * psi[cc].conj() * pij;
                }
            }
        }
    }
    DensityState::from_parts_unchecked(layout, m, &[labels[0], labels[1]])
}

/// True iff every Alice–Bob pair `(i,j)` determines at most one Eve symbol
/// `k` with probability above [`PROB_TOL`].
pub fn check_unique_k(p: &ClassicalDistribution) -> Result<bool> {
    if p.parties() != 3 {
        return Err(Error::InvalidArgument("unique-k check needs a tripartite distribution".into()));
    }
    let sizes = p.alphabet_sizes();
    for i in 0..sizes[0] {
        for j in 0..sizes[1] {
            let support = (0..sizes[2]).filter(|&k| p.prob(&[i, j, k]) > PROB_TOL).count();
            if support > 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Discrete Fourier transform matrix `U[j,k] = ω^{jk}/√d`.
pub fn fourier_matrix(d: usize) -> ComplexMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    ComplexMatrix::from_fn(d, d, |j, k| {
        let angle = 2.0 * PI * (j * k) as f64 / d as f64;
        c(angle.cos() * norm, angle.sin() * norm)
    })
}

/// Maximally entangled pair `(1/√d) Σ |ii⟩` on two labeled registers.
pub fn maximally_entangled(label_a: &str, label_b: &str, d: usize) -> Result<PureState> {
    let layout = SubsystemLayout::new(&[(label_a, d), (label_b, d)])?;
    let amp = 1.0 / (d as f64).sqrt();
    let mut amps = vec![c(0.0, 0.0); d * d];
    for i in 0..d {
        amps[i * d + i] = c(amp, 0.0);
    }
    PureState::new(layout, amps)
}

/// The four Bell states on a pair of qubit registers, in the order
/// `Φ+, Φ−, Ψ+, Ψ−`.
pub fn bell_states() -> Vec<Vec<Complex64>> {
    let s = 1.0 / 2.0_f64.sqrt();
    vec![
        vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)],
        vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-s, 0.0)],
        vec![c(0.0, 0.0), c(s, 0.0), c(s, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)],
    ]
}

/// The locking distribution on parties `(i, j, k, l)` with alphabet sizes
/// `4, 4, 2, 2`: Alice–Bob weight 1/8 on the four cells of `{0,1}²` and 1/4
/// on `(2,2)` and `(3,3)`; `k = i+j mod 2` on the first block, `k = i mod 2`
/// on the second; `l = ⌊i/2⌋`.
pub fn gap_distribution() -> ClassicalDistribution {
    let sizes = vec![4usize, 4, 2, 2];
    let mut probs = vec![0.0f64; 4 * 4 * 2 * 2];
    let mut set = |i: usize, j: usize, p: f64| {
        let k = if i < 2 { (i + j) % 2 } else { i % 2 };
        let l = i / 2;
        probs[((i * 4 + j) * 2 + k) * 2 + l] = p;
    };
    for i in 0..2 {
        for j in 0..2 {
            set(i, j, 0.125);
        }
    }
    set(2, 2, 0.25);
    set(3, 3, 0.25);
    ClassicalDistribution::new(sizes, probs).expect("gap distribution is valid")
}

/// Labels for [`gap_distribution`] registers, in party order.
pub const GAP_LABELS: [&str; 4] = ["A", "B", "E", "F"];

/// The flower state on `A, A′, B, B′, E`: a secret correlated bit in `AB`,
/// maximally correlated registers `A′B′`, and Eve holding `|k⟩` or `U|k⟩`
/// depending on the bit, with `U` the `d`-dimensional Fourier transform.
pub fn flower(d: usize) -> Result<DensityState> {
    if d < 2 {
        return Err(Error::InvalidArgument("flower needs d >= 2".into()));
    }
    let layout =
        SubsystemLayout::new(&[("A", 2), ("Ap", d), ("B", 2), ("Bp", d), ("E", d)])?;
    let u = fourier_matrix(d);
    let total = 4 * d * d * d;
    let mut m = ComplexMatrix::zeros(total, total);
    let w = 1.0 / (2 * d) as f64;
    // index((a, ap, b, bp), e) = (((a*d + ap)*2 + b)*d + bp)*d + e
    for k in 0..d {
        let base0 = ((k * 2) * d + k) * d; // a=0, ap=k, b=0, bp=k
        m[(base0 + k, base0 + k)] += c(w, 0.0);
        let base1 = (((d + k) * 2 + 1) * d + k) * d; // a=1, ap=k, b=1, bp=k
        for e in 0..d {
            for f in 0..d {
                let amp = u[(e, k)] * u[(f, k)].conj() * w;
                m[(base1 + e, base1 + f)] += amp;
            }
        }
    }
    DensityState::from_parts_unchecked(layout, m, &["A", "Ap", "B", "Bp"])
}

/// The Bell-locking state: four perfectly correlated symbols in `AB`, Eve
/// holding the matching Bell state on `E E′`.
pub fn bell_lock() -> Result<DensityState> {
    let layout = SubsystemLayout::new(&[("A", 4), ("B", 4), ("E", 2), ("Ep", 2)])?;
    let total = 4 * 4 * 4;
    let mut m = ComplexMatrix::zeros(total, total);
    for (i, bell) in bell_states().iter().enumerate() {
        let base = (i * 4 + i) * 4;
        for r in 0..4 {
            for cc in 0..4 {
                m[(base + r, base + cc)] += bell[r] * bell[cc].conj() * 0.25;
            }
        }
    }
    DensityState::from_parts_unchecked(layout, m, &["A", "B"])
}

/// The pure state `(|00⟩_{AB}|+⟩_{A′}|+⟩_E + |11⟩_{AB}|ψ⁺⟩_{A′E})/√2` whose
/// measured distribution has positive coefficients but violates the unique-k
/// condition once `A′` is discarded.
pub fn embed_counterexample() -> Result<PureState> {
    let layout = SubsystemLayout::new(&[("A", 2), ("B", 2), ("Ap", 2), ("E", 2)])?;
    let mut amps = vec![c(0.0, 0.0); 16];
    let q = 1.0 / (2.0 * 2.0_f64.sqrt()); // 1/(2√2)
    // index((a,b,ap,e)) = ((a·2 + b)·2 + ap)·2 + e; AB=00 block at offset 0,
    // AB=11 block at offset 12.
    for ap in 0..2 {
        for e in 0..2 {
            amps[ap * 2 + e] = c(q, 0.0);
        }
    }
    for ap in 0..2 {
        amps[12 + ap * 2 + ap] = c(0.5, 0.0);
    }
    PureState::new(layout, amps)
}

/// Distribution obtained by measuring [`embed_counterexample`] everywhere,
/// party order `(A, B, A′, E)`.
pub fn counterexample_distribution() -> ClassicalDistribution {
    let psi = embed_counterexample().expect("builder is valid");
    let probs: Vec<f64> = psi.amps().iter().map(|a| a.norm_sqr()).collect();
    ClassicalDistribution::new(vec![2, 2, 2, 2], probs).expect("squared amplitudes sum to 1")
}

/// Named example states; layouts documented on the individual builders.
pub fn named_example(name: &str, d: usize) -> Result<DensityState> {
    match name {
        "gap" => {
            let p = gap_distribution();
            from_distribution(&p, &GAP_LABELS)
        }
        "flower" => flower(d),
        "bell_lock" | "bell-lock" => bell_lock(),
        "embed_counterexample" | "embed-counterexample" => {
            Ok(embed_counterexample()?.to_density())
        }
        _ => Err(Error::InvalidArgument(format!("unknown example `{name}`"))),
    }
}

/// Apply a channel to the `target` subsystem of a state. The output register
/// keeps the target's label (with the channel's output dimension); any
/// classical flag on the target is dropped.
pub fn apply_channel(
    rho: &DensityState,
    ch: &QuantumChannel,
    target: &str,
) -> Result<DensityState> {
    let d_t = rho.layout().dim_of(target)?;
    if d_t != ch.in_dim {
        return Err(Error::DimMismatch(format!(
            "channel input is {}-dimensional, `{target}` has dimension {}",
            ch.in_dim, d_t
        )));
    }
    // Move the target register to the front, conjugate by V ⊗ I, trace env.
    let mut order: Vec<&str> = vec![target];
    for l in rho.layout().labels() {
        if l != target {
            order.push(l.as_str());
        }
    }
    let front = rho.reorder(&order)?;
    let d_rest = front.dim() / d_t;
    let w = kron(ch.isometry(), &ComplexMatrix::identity(d_rest));
    let big = w.matmul(front.matrix())?.matmul(&w.adjoint())?;

    let env_label = front.layout().fresh_label("_env");
    let mut labels = vec![target.to_string(), env_label.clone()];
    let mut dims = vec![ch.out_dim, ch.env_dim];
    for (l, dd) in front.layout().labels().iter().zip(front.layout().dims()).skip(1) {
        labels.push(l.clone());
        dims.push(*dd);
    }
    let big_layout = SubsystemLayout::from_vecs(labels, dims)?;
    let keep: Vec<&str> =
        big_layout.labels().iter().filter(|l| *l != &env_label).map(|s| s.as_str()).collect();
    let reduced = partial_trace(&big, &big_layout, &keep)?;
    let out_layout = big_layout.sublayout(
        &(0..big_layout.len()).filter(|&i| big_layout.labels()[i] != env_label).collect::<Vec<_>>(),
    );
    let classical: Vec<String> = rho
        .classical_labels()
        .into_iter()
        .filter(|l| l != target)
        .collect();
    let refs: Vec<&str> = classical.iter().map(|s| s.as_str()).collect();
    let state = DensityState::from_parts_unchecked(out_layout, reduced, &refs)?;
    // restore original label order, with the transformed register in place
    let final_order: Vec<&str> = rho.layout().labels().iter().map(|s| s.as_str()).collect();
    state.reorder(&final_order)
}

/// Outcome probabilities `Tr[(E_m ⊗ I) ρ]` of measuring `target` with a POVM.
pub fn measure_povm(rho: &DensityState, povm: &Povm, target: &str) -> Result<Vec<f64>> {
    let d_t = rho.layout().dim_of(target)?;
    if povm.dim() != d_t {
        return Err(Error::DimMismatch(format!(
            "POVM acts on dimension {}, `{target}` has dimension {}",
            povm.dim(),
            d_t
        )));
    }
    povm.validate()?;
    let reduced = rho.marginal(&[target])?;
    Ok(povm
        .elements()
        .iter()
        .map(|e| e.matmul(reduced.matrix()).map(|m| m.trace().re))
        .collect::<Result<Vec<_>>>()?)
}

/// Destructively measure `target` with a POVM, replacing it by a classical
/// outcome register of the same name (Kraus operators `√E_m`).
pub fn measured_state(rho: &DensityState, povm: &Povm, target: &str) -> Result<DensityState> {
    let d_t = rho.layout().dim_of(target)?;
    if povm.dim() != d_t {
        return Err(Error::DimMismatch("POVM dimension mismatch".into()));
    }
    let mut order: Vec<&str> = vec![target];
    for l in rho.layout().labels() {
        if l != target {
            order.push(l.as_str());
        }
    }
    let front = rho.reorder(&order)?;
    let d_rest = front.dim() / d_t;
    let n_out = povm.outcomes();

    let mut blocks: Vec<ComplexMatrix> = Vec::with_capacity(n_out);
    for e in povm.elements() {
        let sqrt_e = matrix_sqrt_psd(e)?;
        let k_full = kron(&sqrt_e, &ComplexMatrix::identity(d_rest));
        let moved = k_full.matmul(front.matrix())?.matmul(&k_full.adjoint())?;
        // trace out the measured register (first factor)
        let mut b = ComplexMatrix::zeros(d_rest, d_rest);
        for s in 0..d_t {
            for r in 0..d_rest {
                for cc in 0..d_rest {
                    b[(r, cc)] += moved[(s * d_rest + r, s * d_rest + cc)];
                }
            }
        }
        blocks.push(b);
    }

    let total = n_out * d_rest;
    let mut m = ComplexMatrix::zeros(total, total);
    for (i, b) in blocks.iter().enumerate() {
        for r in 0..d_rest {
            for cc in 0..d_rest {
                m[(i * d_rest + r, i * d_rest + cc)] = b[(r, cc)];
            }
        }
    }
    let mut labels = vec![target.to_string()];
    let mut dims = vec![n_out];
    for (l, dd) in front.layout().labels().iter().zip(front.layout().dims()).skip(1) {
        labels.push(l.clone());
        dims.push(*dd);
    }
    let layout = SubsystemLayout::from_vecs(labels, dims)?;
    let mut classical: Vec<String> = rho.classical_labels();
    if !classical.iter().any(|l| l == target) {
        classical.push(target.to_string());
    }
    let refs: Vec<&str> = classical.iter().map(|s| s.as_str()).collect();
    let state = DensityState::from_parts_unchecked(layout, m, &refs)?;
    let final_order: Vec<&str> = rho.layout().labels().iter().map(|s| s.as_str()).collect();
    state.reorder(&final_order)
}

/// Positive-semidefinite square root via spectral decomposition.
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    let n = m.rows();
    let v = &eig.eigenvectors;
    Ok(ComplexMatrix::from_fn(n, n, |r, cc| {
        (0..n)
            .map(|k| v[(r, k)] * eig.eigenvalues[k].max(0.0).sqrt() * v[(cc, k)].conj())
            .sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::Parties;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn dist(sizes: Vec<usize>, entries: &[(usize, f64)]) -> ClassicalDistribution {
        let total: usize = sizes.iter().product();
        let mut probs = vec![0.0; total];
        for &(i, p) in entries {
            probs[i] = p;
        }
        ClassicalDistribution::new(sizes, probs).unwrap()
    }

    #[test]
    fn from_distribution_examples() {
        // uniform correlated bit
        let p = dist(vec![2, 2], &[(0, 0.5), (3, 0.5)]);
        let rho = from_distribution(&p, &["A", "B"]).unwrap();
        rho.validate().unwrap();
        assert_eq!(rho.matrix()[(0, 0)].re, 0.5);
        assert_eq!(rho.matrix()[(3, 3)].re, 0.5);
        assert_eq!(rho.matrix()[(1, 1)].re, 0.0);

        // delta distribution is a pure basis state
        let delta = dist(vec![2, 2, 2], &[(0, 1.0)]);
        let rho = from_distribution(&delta, &["A", "B", "E"]).unwrap();
        assert_eq!(rho.matrix()[(0, 0)].re, 1.0);

        // gap distribution diagonal: four cells of 1/8 and two of 1/4
        let gap = gap_distribution();
        let rho = from_distribution(&gap, &GAP_LABELS).unwrap();
        rho.validate().unwrap();
        let diag: Vec<f64> = (0..64).map(|i| rho.matrix()[(i, i)].re).collect();
        let eighth = diag.iter().filter(|&&x| (x - 0.125).abs() < 1e-15).count();
        let quarter = diag.iter().filter(|&&x| (x - 0.25).abs() < 1e-15).count();
        let zero = diag.iter().filter(|&&x| x == 0.0).count();
        assert_eq!((eighth, quarter, zero), (4, 2, 58));
    }

    #[test]
    fn gap_distribution_matches_table() {
        let gap = gap_distribution();
        assert_eq!(gap.prob(&[0, 0, 0, 0]), 0.125);
        assert_eq!(gap.prob(&[0, 1, 1, 0]), 0.125);
        assert_eq!(gap.prob(&[1, 0, 1, 0]), 0.125);
        assert_eq!(gap.prob(&[1, 1, 0, 0]), 0.125);
        assert_eq!(gap.prob(&[2, 2, 0, 1]), 0.25);
        assert_eq!(gap.prob(&[3, 3, 1, 1]), 0.25);
        // k and l are uniquely determined by (i,j)
        let merged = gap.regroup(&[vec![0], vec![1], vec![2, 3]]).unwrap();
        assert!(check_unique_k(&merged).unwrap());
    }

    #[test]
    fn ideal_key_state_examples() {
        let tau1 = ideal_key_state(1, None).unwrap();
        tau1.validate().unwrap();
        let expected = [0.5, 0.0, 0.0, 0.5];
        for i in 0..4 {
            assert!((tau1.matrix()[(i, i)].re - expected[i]).abs() < 1e-15);
        }

        let tau2 = ideal_key_state(2, None).unwrap();
        for i in 0..4 {
            assert!((tau2.matrix()[(i * 4 + i, i * 4 + i)].re - 0.25).abs() < 1e-15);
        }
        assert!((tau2.matrix().trace().re - 1.0).abs() < 1e-12);

        let eve = {
            let p = dist(vec![2], &[(0, 0.5), (1, 0.5)]);
            from_distribution(&p, &["E"]).unwrap()
        };
        let tau1e = ideal_key_state(1, Some(&eve)).unwrap();
        assert_eq!(tau1e.layout().labels(), &["A", "B", "E"]);
        assert!((tau1e.matrix()[(0, 0)].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn twisted_key_state_with_identity_twists_is_bell_power() {
        let shield = {
            let p = dist(vec![1], &[(0, 1.0)]);
            from_distribution(&p, &["S"]).unwrap()
        };
        let twists = vec![ComplexMatrix::identity(1), ComplexMatrix::identity(1)];
        let gamma = twisted_key_state(1, &twists, &shield).unwrap();
        let bell = maximally_entangled("A", "B", 2).unwrap().to_density();
        // same state up to the trivial shield register
        assert!(gamma.marginal(&["A", "B"]).unwrap().matrix().max_entry_diff(bell.matrix()) < 1e-12);
    }

    #[test]
    fn twisted_key_state_swap_twist_matches_hand_construction() {
        let shield = {
            let p = dist(vec![2, 2], &[(0, 0.25), (1, 0.25), (2, 0.25), (3, 0.25)]);
            from_distribution(&p, &["Ap", "Bp"]).unwrap()
        };
        let mut swap = ComplexMatrix::zeros(4, 4);
        for s1 in 0..2 {
            for s2 in 0..2 {
                swap[(s1 * 2 + s2, s2 * 2 + s1)] = Complex64::new(1.0, 0.0);
            }
        }
        let twists = vec![ComplexMatrix::identity(4), swap.clone()];
        let gamma = twisted_key_state(1, &twists, &shield).unwrap();
        gamma.validate().unwrap();

        // oracle: gamma = (1/2) sum_ij |ii><jj| ⊗ U_i (I/4) U_j†
        let mut oracle = ComplexMatrix::zeros(16, 16);
        let u = [ComplexMatrix::identity(4), swap];
        for i in 0..2 {
            for j in 0..2 {
                let block = u[i].matmul(&u[j].adjoint()).unwrap();
                for s in 0..4 {
                    for t in 0..4 {
                        oracle[((i * 2 + i) * 4 + s, (j * 2 + j) * 4 + t)] =
                            block[(s, t)] * 0.125;
                    }
                }
            }
        }
        assert!(gamma.matrix().max_entry_diff(&oracle) < 1e-12);

        // measurement oracle: AB computational outcomes are uniform correlated
        let measured = gamma.dephase(&["A", "B"]).unwrap();
        let ab = measured.diagonal_distribution(&["A", "B"]).unwrap();
        assert!((ab.prob(&[0, 0]) - 0.5).abs() < 1e-12);
        assert!((ab.prob(&[1, 1]) - 0.5).abs() < 1e-12);
        assert!(ab.prob(&[0, 1]).abs() < 1e-13 && ab.prob(&[1, 0]).abs() < 1e-13);
    }

    #[test]
    fn twisted_key_state_always_yields_correlated_keys() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for ell in [1u32, 2] {
            let shield = {
                let p = dist(vec![2], &[(0, 0.5), (1, 0.5)]);
                from_distribution(&p, &["Sh"]).unwrap()
            };
            let twists: Vec<ComplexMatrix> =
                (0..1usize << ell).map(|_| crate::states::random::random_unitary(&mut rng, 2)).collect();
            let gamma = twisted_key_state(ell, &twists, &shield).unwrap();
            let ab = gamma.dephase(&["A", "B"]).unwrap().diagonal_distribution(&["A", "B"]).unwrap();
            let d = 1usize << ell;
            for a in 0..d {
                for b in 0..d {
                    if a == b {
                        assert!((ab.prob(&[a, b]) - 1.0 / d as f64).abs() < 1e-10);
                    } else {
                        assert!(ab.prob(&[a, b]) < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn qqq_embed_examples() {
        // GHZ from the perfectly correlated bit
        let p = dist(vec![2, 2, 2], &[(0, 0.5), (7, 0.5)]);
        let psi = qqq_embed_vector(&p, &["A", "B", "E"]).unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((psi.amps()[0].re - s).abs() < 1e-15);
        assert!((psi.amps()[7].re - s).abs() < 1e-15);

        // gap distribution: pure state on 4x4x2x2 whose diagonal is p
        let gap = gap_distribution();
        let rho = qqq_embed(&gap, &GAP_LABELS).unwrap();
        assert_eq!(rho.dim(), 64);
        for (i, &q) in gap.probs().iter().enumerate() {
            assert!((rho.matrix()[(i, i)].re - q).abs() < 1e-12);
        }

        // measuring all parties reproduces p
        let measured = rho.dephase(&["A", "B", "E", "F"]).unwrap();
        let back = measured.diagonal_distribution(&["A", "B", "E", "F"]).unwrap();
        for (a, b) in back.probs().iter().zip(gap.probs()) {
            assert!((a - b).abs() < 1e-12);
        }

        // the embedding counterexample has positive coefficients
        let ce = counterexample_distribution();
        let psi_ce = qqq_embed_vector(&ce, &["A", "B", "Ap", "E"]).unwrap();
        let direct = embed_counterexample().unwrap();
        for (a, b) in psi_ce.amps().iter().zip(direct.amps()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn ccq_embed_equals_ccc_state_under_unique_k() {
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        for _ in 0..20 {
            let p = crate::states::random::random_unique_k(&mut rng, 3, 2, 3);
            assert!(check_unique_k(&p).unwrap());
            let ccq = ccq_embed(&p, &["A", "B", "E"]).unwrap();
            let ccc = from_distribution(&p, &["A", "B", "E"]).unwrap();
            assert!(ccq.matrix().max_entry_diff(ccc.matrix()) < 1e-12);
        }
    }

    #[test]
    fn ccq_embed_delta_distribution() {
        let p = dist(vec![2, 2, 2], &[(0, 1.0)]);
        let rho = ccq_embed(&p, &["A", "B", "E"]).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn counterexample_ccq_after_discarding_shield() {
        // discard A' from the pure state, then measure A and B
        let psi = embed_counterexample().unwrap();
        let rho = psi.to_density();
        let no_shield = rho.marginal(&["A", "B", "E"]).unwrap();
        let ccq = no_shield.dephase(&["A", "B"]).unwrap();

        // displayed form: (|00><00| ⊗ |+><+| + |11><11| ⊗ I/2)/2
        let s = 1.0 / 2.0_f64.sqrt();
        let plus = ComplexMatrix::projector(&[c(s, 0.0), c(s, 0.0)]);
        let mut expected = ComplexMatrix::zeros(8, 8);
        for r in 0..2 {
            for cc in 0..2 {
                expected[(r, cc)] = plus[(r, cc)] * 0.5;
            }
        }
        expected[(6, 6)] = c(0.25, 0.0);
        expected[(7, 7)] = c(0.25, 0.0);
        assert!(ccq.matrix().max_entry_diff(&expected) < 1e-12);

        // the underlying distribution (with A' kept by Alice) is not unique-k
        let ce = counterexample_distribution();
        let merged = ce.regroup(&[vec![0, 2], vec![1], vec![3]]).unwrap();
        assert!(!check_unique_k(&merged).unwrap());
    }

    #[test]
    fn check_unique_k_basics() {
        let p = dist(vec![1, 1, 2], &[(0, 0.5), (1, 0.5)]);
        assert!(!check_unique_k(&p).unwrap());
        let delta = dist(vec![2, 2, 2], &[(0, 1.0)]);
        assert!(check_unique_k(&delta).unwrap());
    }

    #[test]
    fn flower_structure() {
        let rho = flower(2).unwrap();
        rho.validate().unwrap();
        assert_eq!(rho.layout().labels(), &["A", "Ap", "B", "Bp", "E"]);
        let parties = Parties::infer(rho.layout());
        assert_eq!(parties.alice, vec!["A", "Ap"]);
        assert_eq!(parties.eve, vec!["E"]);

        // Eve's conditional states: |k> for bit 0, H|k> for bit 1
        let ensemble = rho.classical_ensemble(&["A", "Ap"], &["E"]).unwrap();
        assert_eq!(ensemble.len(), 4);
        let h = fourier_matrix(2);
        for (idx, (w, st)) in ensemble.iter().enumerate() {
            assert!((w - 0.25).abs() < 1e-12);
            let bit = idx / 2;
            let k = idx % 2;
            let expected = if bit == 0 {
                let mut v = vec![c(0.0, 0.0); 2];
                v[k] = c(1.0, 0.0);
                ComplexMatrix::projector(&v)
            } else {
                let col: Vec<Complex64> = (0..2).map(|r| h[(r, k)]).collect();
                ComplexMatrix::projector(&col)
            };
            assert!(st.max_entry_diff(&expected) < 1e-12, "cell {idx}");
        }
    }

    #[test]
    fn bell_lock_structure() {
        let rho = bell_lock().unwrap();
        rho.validate().unwrap();
        // Eve's joint states are the four orthogonal Bell states
        let ensemble = rho.classical_ensemble(&["A", "B"], &["E", "Ep"]).unwrap();
        assert_eq!(ensemble.len(), 4);
        for (i, (w, st)) in ensemble.iter().enumerate() {
            assert!((w - 0.25).abs() < 1e-12);
            let expected = ComplexMatrix::projector(&bell_states()[i]);
            assert!(st.max_entry_diff(&expected) < 1e-12);
        }
        // tracing E' leaves Eve maximally mixed regardless of the key symbol
        let no_ep = rho.marginal(&["A", "B", "E"]).unwrap();
        let ens = no_ep.classical_ensemble(&["A", "B"], &["E"]).unwrap();
        for (_, st) in ens {
            assert!(st.max_entry_diff(&ComplexMatrix::identity(2).scale(c(0.5, 0.0))) < 1e-12);
        }
    }

    #[test]
    fn named_example_dispatch() {
        assert!(named_example("gap", 0).is_ok());
        assert!(named_example("flower", 4).is_ok());
        assert!(named_example("bell_lock", 0).is_ok());
        assert!(named_example("embed_counterexample", 0).is_ok());
        assert!(named_example("nonsense", 0).is_err());
    }

    #[test]
    fn apply_channel_identity_and_depolarizing() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let rho = crate::states::random::random_density(&mut rng, &[("A", 2), ("B", 2), ("E", 2)]);
        let id = QuantumChannel::identity(2);
        let same = apply_channel(&rho, &id, "E").unwrap();
        assert!(same.matrix().max_entry_diff(rho.matrix()) < 1e-12);

        let dep = QuantumChannel::depolarizing(2);
        let out = apply_channel(&rho, &dep, "E").unwrap();
        let expected = rho
            .marginal(&["A", "B"])
            .unwrap()
            .tensor(&DensityState::from_parts_unchecked(
                crate::linalg::SubsystemLayout::new(&[("E", 2)]).unwrap(),
                ComplexMatrix::identity(2).scale(c(0.5, 0.0)),
                &[],
            ).unwrap())
            .unwrap();
        assert!(out.matrix().max_entry_diff(expected.matrix()) < 1e-12);
    }

    #[test]
    fn apply_random_channel_preserves_state_validity() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        for _ in 0..10 {
            let rho = crate::states::random::random_density(&mut rng, &[("A", 2), ("E", 3)]);
            let param = crate::optimize::IsometryParam::random(&mut rng, 3, 6);
            let ch = crate::optimize::channel_from_isometry(&param, 2, 3).unwrap();
            let out = apply_channel(&rho, &ch, "E").unwrap();
            out.validate().unwrap();
            assert_eq!(out.layout().dims(), &[2, 2]);
        }
    }

    #[test]
    fn measure_povm_examples() {
        let tau = ideal_key_state(1, None).unwrap();
        let probs = measure_povm(&tau, &Povm::computational(2), "A").unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-12 && (probs[1] - 0.5).abs() < 1e-12);

        // {|+><+|, |-><-|} on |0><0|
        let p = dist(vec![2], &[(0, 1.0)]);
        let zero = from_distribution(&p, &["Q"]).unwrap();
        let hadamard = fourier_matrix(2);
        let pm = Povm::from_basis(&hadamard).unwrap();
        let probs = measure_povm(&zero, &pm, "Q").unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-12 && (probs[1] - 0.5).abs() < 1e-12);

        // flower(2) Eve register in an intermediate (rotated) basis, against a
        // direct trace oracle
        let rho = flower(2).unwrap();
        let theta = std::f64::consts::PI / 8.0;
        let basis = ComplexMatrix::from_entries(
            2,
            2,
            vec![
                c(theta.cos(), 0.0),
                c(-theta.sin(), 0.0),
                c(theta.sin(), 0.0),
                c(theta.cos(), 0.0),
            ],
        )
        .unwrap();
        let povm = Povm::from_basis(&basis).unwrap();
        let probs = measure_povm(&rho, &povm, "E").unwrap();
        let eve = rho.marginal(&["E"]).unwrap();
        for (m, e) in povm.elements().iter().enumerate() {
            let direct = e.matmul(eve.matrix()).unwrap().trace().re;
            assert!((probs[m] - direct).abs() < 1e-12);
        }
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn measured_state_turns_eve_classical() {
        let rho = flower(2).unwrap();
        let sigma = measured_state(&rho, &Povm::computational(2), "E").unwrap();
        sigma.validate().unwrap();
        assert!(sigma.is_classical("E"));
        assert!((sigma.matrix().trace().re - 1.0).abs() < 1e-10);
    }
}
