//! Exact entropic functionals on density states, in bits.
//!
//! Marginal entropies decompose along classical labels, so ccq-style states
//! only ever need eigensolves on their quantum blocks.

use crate::linalg::hermitian_eig;
use crate::states::{shannon_entropy, DensityState};
use crate::{Error, Result};

/// Eigenvalues this far below zero are treated as numerical noise and
/// clamped; anything lower is an error.
const EIG_CLAMP: f64 = 1e-10;

fn entropy_of_eigenvalues(eigenvalues: &[f64]) -> Result<f64> {
    let mut probs = Vec::with_capacity(eigenvalues.len());
    for &l in eigenvalues {
        if l < -EIG_CLAMP {
            return Err(Error::NumericFailure(format!(
                "eigenvalue {l:.3e} below the clamping tolerance"
            )));
        }
        probs.push(l.max(0.0));
    }
    Ok(shannon_entropy(&probs))
}

/// Von Neumann entropy `S(ρ_S) = −Tr ρ_S log₂ ρ_S` of the reduced state on
/// `subsystems` (the whole state if all labels are listed).
pub fn von_neumann_entropy(rho: &DensityState, subsystems: &[&str]) -> Result<f64> {
    let reduced = rho.marginal(subsystems)?;
    let mut total = 0.0;
    let mut weights = Vec::new();
    for (w, block) in reduced.classical_blocks()? {
        weights.push(w);
        if block.rows() > 1 {
            let eig = hermitian_eig(&block)?;
            total += w * entropy_of_eigenvalues(&eig.eigenvalues)?;
        }
    }
    Ok(total + shannon_entropy(&weights))
}

/// Mutual information `I(A:B) = S(A) + S(B) − S(AB)`.
pub fn mutual_information(rho: &DensityState, a: &[&str], b: &[&str]) -> Result<f64> {
    check_disjoint(&[a, b])?;
    let sa = von_neumann_entropy(rho, a)?;
    let sb = von_neumann_entropy(rho, b)?;
    let sab = von_neumann_entropy(rho, &concat(&[a, b]))?;
    Ok(sa + sb - sab)
}

/// Conditional mutual information
/// `I(A:B|E) = S(AE) + S(BE) − S(ABE) − S(E)`.
pub fn conditional_mutual_information(
    rho: &DensityState,
    a: &[&str],
    b: &[&str],
    e: &[&str],
) -> Result<f64> {
    check_disjoint(&[a, b, e])?;
    let sae = von_neumann_entropy(rho, &concat(&[a, e]))?;
    let sbe = von_neumann_entropy(rho, &concat(&[b, e]))?;
    let sabe = von_neumann_entropy(rho, &concat(&[a, b, e]))?;
    let se = if e.is_empty() { 0.0 } else { von_neumann_entropy(rho, e)? };
    Ok(sae + sbe - sabe - se)
}

/// Relative entropy `S(ρ‖σ) = Tr ρ(log₂ ρ − log₂ σ)`, `+∞` when the support
/// of `ρ` is not contained in the support of `σ` (σ-eigenvalue below 1e-12
/// carrying ρ-weight above 1e-9).
pub fn relative_entropy(rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch(format!(
            "relative entropy of a {}-dim and a {}-dim state",
            rho.dim(),
            sigma.dim()
        )));
    }
    let er = hermitian_eig(rho.matrix())?;
    let es = hermitian_eig(sigma.matrix())?;
    let tr_rho_log_rho: f64 = er
        .eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * l.log2())
        .sum();

    // Tr ρ log σ = Σ_k log(μ_k) ⟨v_k|ρ|v_k⟩ over σ's eigenbasis
    let n = rho.dim();
    let mut tr_rho_log_sigma = 0.0;
    for k in 0..n {
        let mu = es.eigenvalues[k];
        let col: Vec<_> = (0..n).map(|r| es.eigenvectors[(r, k)]).collect();
        let weight = {
            let mv = rho.matrix().matvec(&col)?;
            col.iter().zip(&mv).map(|(c, x)| (c.conj() * x).re).sum::<f64>()
        };
        if mu < 1e-12 {
            if weight > 1e-9 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        tr_rho_log_sigma += weight.max(0.0) * mu.log2();
    }
    Ok((tr_rho_log_rho - tr_rho_log_sigma).max(0.0))
}

/// Binary entropy `H(ε) = −ε log₂ ε − (1−ε) log₂(1−ε)`.
pub fn binary_entropy(eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("binary entropy needs ε ∈ [0,1], got {eps}")));
    }
    Ok(shannon_entropy(&[eps, 1.0 - eps]))
}

/// Continuity bound `8ε log₂ d_A + 4H(ε)` on the change of `I(A:B|E)` between
/// states at trace distance ε.
pub fn fannes_cmi_bound(eps: f64, d_a: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("bound needs ε ∈ [0,1], got {eps}")));
    }
    Ok(8.0 * eps * (d_a as f64).log2() + 4.0 * binary_entropy(eps)?)
}

fn concat<'a>(sets: &[&[&'a str]]) -> Vec<&'a str> {
    sets.iter().flat_map(|s| s.iter().copied()).collect()
}

fn check_disjoint(sets: &[&[&str]]) -> Result<()> {
    let mut all: Vec<&str> = concat(sets);
    all.sort_unstable();
    for w in all.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidArgument(format!(
                "label `{}` appears in two subsystem sets",
                w[0]
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::random::{random_ccq, random_density};
    use crate::states::{ideal_key_state, maximally_entangled};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn pure_state_has_zero_entropy() {
        let bell = maximally_entangled("A", "B", 2).unwrap().to_density();
        assert!(von_neumann_entropy(&bell, &["A", "B"]).unwrap().abs() < 1e-10);
        // reduced Bell state is maximally mixed
        assert!((von_neumann_entropy(&bell, &["A"]).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn block_decomposition_matches_direct_eigensolve() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let ccq = random_ccq(&mut rng, 2, 2, 3);
        let direct = {
            let eig = hermitian_eig(ccq.matrix()).unwrap();
            entropy_of_eigenvalues(&eig.eigenvalues).unwrap()
        };
        let blocked = von_neumann_entropy(&ccq, &["A", "B", "E"]).unwrap();
        assert!((direct - blocked).abs() < 1e-9);
    }

    #[test]
    fn mutual_information_examples() {
        let bell = maximally_entangled("A", "B", 2).unwrap().to_density();
        assert!((mutual_information(&bell, &["A"], &["B"]).unwrap() - 2.0).abs() < 1e-10);

        let tau = ideal_key_state(1, None).unwrap();
        assert!((mutual_information(&tau, &["A"], &["B"]).unwrap() - 1.0).abs() < 1e-10);

        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let a = random_density(&mut rng, &[("A", 2)]);
        let b = random_density(&mut rng, &[("B", 3)]);
        let prod = a.tensor(&b).unwrap();
        assert!(mutual_information(&prod, &["A"], &["B"]).unwrap().abs() < 1e-9);
    }

    #[test]
    fn mutual_information_rejects_overlap() {
        let tau = ideal_key_state(1, None).unwrap();
        assert!(mutual_information(&tau, &["A"], &["A"]).is_err());
    }

    #[test]
    fn cmi_of_key_states_is_key_length() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for ell in [1u32, 2] {
            let eve = random_density(&mut rng, &[("E", 2)]);
            let tau = ideal_key_state(ell, Some(&eve)).unwrap();
            let cmi = conditional_mutual_information(&tau, &["A"], &["B"], &["E"]).unwrap();
            assert!((cmi - ell as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn cmi_of_fully_correlated_ccc_is_zero() {
        // k = i = j uniform
        let p = crate::states::ClassicalDistribution::new(
            vec![2, 2, 2],
            vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5],
        )
        .unwrap();
        let rho = crate::states::from_distribution(&p, &["A", "B", "E"]).unwrap();
        let cmi = conditional_mutual_information(&rho, &["A"], &["B"], &["E"]).unwrap();
        assert!(cmi.abs() < 1e-10);
    }

    #[test]
    fn strong_subadditivity_on_random_states() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..60 {
            let rho = random_density(&mut rng, &[("A", 2), ("B", 2), ("E", 2)]);
            let cmi = conditional_mutual_information(&rho, &["A"], &["B"], &["E"]).unwrap();
            assert!(cmi >= -1e-9, "violated SSA: {cmi}");
        }
    }

    #[test]
    fn relative_entropy_examples() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let rho = random_density(&mut rng, &[("A", 3)]);
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-9);

        // S(|0><0| || I/2) = 1
        let zero = crate::states::ClassicalDistribution::new(vec![2], vec![1.0, 0.0]).unwrap();
        let zero_state = crate::states::from_distribution(&zero, &["A"]).unwrap();
        let mixed = crate::states::ClassicalDistribution::new(vec![2], vec![0.5, 0.5]).unwrap();
        let mixed_state = crate::states::from_distribution(&mixed, &["A"]).unwrap();
        assert!((relative_entropy(&zero_state, &mixed_state).unwrap() - 1.0).abs() < 1e-10);

        // disjoint support
        let one = crate::states::ClassicalDistribution::new(vec![2], vec![0.0, 1.0]).unwrap();
        let one_state = crate::states::from_distribution(&one, &["A"]).unwrap();
        assert!(relative_entropy(&zero_state, &one_state).unwrap().is_infinite());
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((binary_entropy(0.25).unwrap() - 0.811278124459).abs() < 1e-9);
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn fannes_bound_values() {
        assert_eq!(fannes_cmi_bound(0.0, 2).unwrap(), 0.0);
        assert!((fannes_cmi_bound(0.5, 2).unwrap() - 8.0).abs() < 1e-12);
    }
}
