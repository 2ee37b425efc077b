//! Entanglement-monotone bounds: squashed entanglement, relative entropy of
//! entanglement, and the measurement-induced entanglement-of-formation bound
//! for embedded classical distributions.

use num_complex::Complex64;

use crate::bounds::{canonical_channel_isometries, BoundEstimate, ChannelSearch, Direction};
use crate::linalg::{hermitian_eig, ComplexMatrix};
use crate::optimize::{multi_restart_minimize_seeded, IsometryParam, OptimizerConfig};
use crate::states::{
    check_unique_k, purify, qqq_embed_vector, shannon_entropy, ClassicalDistribution,
    DensityState,
};
use crate::{Error, Result};

/// Penalty returned by the relative-entropy objective when the candidate
/// separable state fails to cover the support of `ρ`; large enough to lose
/// against every legitimate value at desk-scale dimensions.
const SUPPORT_PENALTY: f64 = 1e4;

/// Squashed entanglement `E_sq = ½ inf I(A:B|E)` over extensions of the
/// bipartite state, realized as parameterized channels on a purifying
/// register (every extension arises this way). The discarding channel is a
/// fixed restart, so the estimate never exceeds `½ I(A:B)`.
pub fn squashed_entanglement(
    rho: &DensityState,
    alice: &[&str],
    bob: &[&str],
    ext_dim: usize,
    cfg: &OptimizerConfig,
) -> Result<BoundEstimate> {
    if ext_dim < 1 {
        return Err(Error::InvalidArgument("extension dimension must be >= 1".into()));
    }
    if alice.len() + bob.len() != rho.layout().len() {
        return Err(Error::InvalidArgument(
            "squashed entanglement needs a bipartite split covering every register".into(),
        ));
    }
    let pur = rho.layout().fresh_label("_Sq");
    let psi = purify(rho, &pur)?;
    let d_p = psi.layout().dim_of(&pur)?;
    let env_dim = d_p;
    let rows = ext_dim * env_dim;
    let alice_owned: Vec<String> = alice.iter().map(|s| s.to_string()).collect();
    let bob_owned: Vec<String> = bob.iter().map(|s| s.to_string()).collect();
    let search =
        ChannelSearch::from_pure(psi, &alice_owned, &bob_owned, &[pur.clone()], &[])?;

    let dim = IsometryParam::raw_len(d_p, rows);
    let candidates: Vec<Vec<f64>> = canonical_channel_isometries(d_p, ext_dim, env_dim)
        .into_iter()
        .map(|v| IsometryParam::encode(&v).raw)
        .collect();
    let objective = |raw: &[f64]| -> f64 {
        let param = IsometryParam { in_dim: d_p, out_dim: rows, raw: raw.to_vec() };
        match search.cmi_after(&param.decode(), ext_dim, env_dim) {
            Ok(v) => 0.5 * v,
            Err(_) => f64::NAN,
        }
    };
    let outcome = multi_restart_minimize_seeded(objective, dim, cfg, &candidates)?;
    Ok(BoundEstimate {
        name: "squashed-entanglement".into(),
        value: outcome.best_value,
        direction: Direction::UpperEstimateOfInfimum,
        optimizer: Some(outcome),
        parameters: Default::default(),
    }
    .with_param("ext_dim", ext_dim))
}

/// Relative entropy of entanglement `inf S(ρ‖σ)` over separable states,
/// parameterized as ensembles `σ = Σ_t q_t |a_t⟩⟨a_t| ⊗ |b_t⟩⟨b_t|` with at
/// most `ensemble_size` members (raised to `d_A·d_B` when smaller, so the
/// maximally mixed fallback is representable). Dephasings of `ρ` in the
/// computational and marginal eigenbases and the product of its marginals
/// are fixed restarts.
pub fn relative_entropy_of_entanglement(
    rho: &DensityState,
    alice: &[&str],
    bob: &[&str],
    ensemble_size: usize,
    cfg: &OptimizerConfig,
) -> Result<BoundEstimate> {
    if alice.len() + bob.len() != rho.layout().len() {
        return Err(Error::InvalidArgument(
            "relative entropy of entanglement needs a bipartite split covering every register"
                .into(),
        ));
    }
    let order: Vec<&str> = alice.iter().chain(bob.iter()).copied().collect();
    let rho_ab = rho.reorder(&order)?;
    let d_a: usize = alice.iter().map(|l| rho_ab.layout().dim_of(l).unwrap()).product();
    let d_b: usize = bob.iter().map(|l| rho_ab.layout().dim_of(l).unwrap()).product();
    let d = d_a * d_b;
    let t = ensemble_size.max(d);

    let eig_rho = hermitian_eig(rho_ab.matrix())?;
    let tr_rho_log_rho: f64 =
        eig_rho.eigenvalues.iter().filter(|&&l| l > 0.0).map(|&l| l * l.log2()).sum();

    let stride = 1 + 2 * d_a + 2 * d_b;
    let dim = t * stride;
    let decode = |raw: &[f64]| -> ComplexMatrix {
        decode_separable(raw, t, d_a, d_b)
    };
    let objective = |raw: &[f64]| -> f64 {
        let sigma = decode(raw);
        relative_entropy_to(rho_ab.matrix(), &sigma, tr_rho_log_rho).unwrap_or(f64::NAN)
    };

    let candidates = separable_candidates(&rho_ab, d_a, d_b, t)?;
    let outcome = multi_restart_minimize_seeded(objective, dim, cfg, &candidates)?;
    Ok(BoundEstimate {
        name: "relative-entropy-of-entanglement".into(),
        value: outcome.best_value,
        direction: Direction::UpperEstimateOfInfimum,
        optimizer: Some(outcome),
        parameters: Default::default(),
    }
    .with_param("ensemble_size", t))
}

fn decode_separable(raw: &[f64], t: usize, d_a: usize, d_b: usize) -> ComplexMatrix {
    let stride = 1 + 2 * d_a + 2 * d_b;
    let d = d_a * d_b;
    // softmax weights
    let max_logit =
        (0..t).map(|m| raw[m * stride]).fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = (0..t).map(|m| (raw[m * stride] - max_logit).exp()).collect();
    let z: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= z;
    }
    let mut sigma = ComplexMatrix::zeros(d, d);
    for m in 0..t {
        if weights[m] < 1e-300 {
            continue;
        }
        let base = m * stride + 1;
        let a = unit_vector(&raw[base..base + 2 * d_a], d_a, m);
        let b = unit_vector(&raw[base + 2 * d_a..base + 2 * d_a + 2 * d_b], d_b, m);
        for ia in 0..d_a {
            for ib in 0..d_b {
                let left = a[ia] * b[ib];
                if left.norm_sqr() < 1e-300 {
                    continue;
                }
                for ja in 0..d_a {
                    for jb in 0..d_b {
                        let right = (a[ja] * b[jb]).conj();
                        sigma[(ia * d_b + ib, ja * d_b + jb)] += left * right * weights[m];
                    }
                }
            }
        }
    }
    sigma
}

fn unit_vector(raw: &[f64], d: usize, member: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> =
        (0..d).map(|i| Complex64::new(raw[2 * i], raw[2 * i + 1])).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        let mut e = vec![Complex64::new(0.0, 0.0); d];
        e[member % d] = Complex64::new(1.0, 0.0);
        return e;
    }
    for z in v.iter_mut() {
        *z /= norm;
    }
    v
}

/// `S(ρ‖σ)` with a precomputed `Tr ρ log ρ`; support violations return a
/// finite penalty so the simplex search can steer away from them.
fn relative_entropy_to(
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    tr_rho_log_rho: f64,
) -> Result<f64> {
    let es = hermitian_eig(sigma)?;
    let n = rho.rows();
    let mut tr_rho_log_sigma = 0.0;
    let mut kernel_weight = 0.0;
    for k in 0..n {
        let mu = es.eigenvalues[k];
        let col: Vec<Complex64> = (0..n).map(|r| es.eigenvectors[(r, k)]).collect();
        let mv = rho.matvec(&col)?;
        let weight: f64 = col.iter().zip(&mv).map(|(c, x)| (c.conj() * x).re).sum();
        if mu < 1e-12 {
            kernel_weight += weight.max(0.0);
            continue;
        }
        tr_rho_log_sigma += weight.max(0.0) * mu.log2();
    }
    if kernel_weight > 1e-9 {
        return Ok(SUPPORT_PENALTY * (1.0 + kernel_weight));
    }
    Ok((tr_rho_log_rho - tr_rho_log_sigma).max(0.0))
}

/// Fixed separable candidates: maximally mixed, computational dephasing,
/// marginal-eigenbasis dephasing, and the product of the marginals.
fn separable_candidates(
    rho_ab: &DensityState,
    d_a: usize,
    d_b: usize,
    t: usize,
) -> Result<Vec<Vec<f64>>> {
    let d = d_a * d_b;
    let mut cands = Vec::new();

    let basis_a: Vec<Vec<Complex64>> = (0..d_a)
        .map(|i| {
            let mut v = vec![Complex64::new(0.0, 0.0); d_a];
            v[i] = Complex64::new(1.0, 0.0);
            v
        })
        .collect();
    let basis_b: Vec<Vec<Complex64>> = (0..d_b)
        .map(|i| {
            let mut v = vec![Complex64::new(0.0, 0.0); d_b];
            v[i] = Complex64::new(1.0, 0.0);
            v
        })
        .collect();

    // maximally mixed
    let uniform: Vec<(f64, usize, usize)> =
        (0..d).map(|x| (1.0 / d as f64, x / d_b, x % d_b)).collect();
    cands.push(encode_product_ensemble(
        &uniform.iter().map(|&(q, i, j)| (q, basis_a[i].clone(), basis_b[j].clone())).collect::<Vec<_>>(),
        t,
        d_a,
        d_b,
    ));

    // computational dephasing of rho
    let deph: Vec<(f64, Vec<Complex64>, Vec<Complex64>)> = (0..d)
        .map(|x| {
            (rho_ab.matrix()[(x, x)].re.max(0.0), basis_a[x / d_b].clone(), basis_b[x % d_b].clone())
        })
        .collect();
    cands.push(encode_product_ensemble(&deph, t, d_a, d_b));

    // marginal eigenbases, via index arithmetic on the bipartite matrix
    let ra = {
        let mut m = ComplexMatrix::zeros(d_a, d_a);
        for ia in 0..d_a {
            for ja in 0..d_a {
                let mut acc = Complex64::new(0.0, 0.0);
                for ib in 0..d_b {
                    acc += rho_ab.matrix()[(ia * d_b + ib, ja * d_b + ib)];
                }
                m[(ia, ja)] = acc;
            }
        }
        m
    };
    let rb = {
        let mut m = ComplexMatrix::zeros(d_b, d_b);
        for ib in 0..d_b {
            for jb in 0..d_b {
                let mut acc = Complex64::new(0.0, 0.0);
                for ia in 0..d_a {
                    acc += rho_ab.matrix()[(ia * d_b + ib, ia * d_b + jb)];
                }
                m[(ib, jb)] = acc;
            }
        }
        m
    };
    let ea = hermitian_eig(&ra)?;
    let eb = hermitian_eig(&rb)?;
    let alpha: Vec<Vec<Complex64>> = (0..d_a)
        .map(|k| (0..d_a).map(|r| ea.eigenvectors[(r, k)]).collect())
        .collect();
    let beta: Vec<Vec<Complex64>> = (0..d_b)
        .map(|k| (0..d_b).map(|r| eb.eigenvectors[(r, k)]).collect())
        .collect();

    // dephasing in the product eigenbasis
    let mut eig_deph = Vec::new();
    for i in 0..d_a {
        for j in 0..d_b {
            let mut prod = vec![Complex64::new(0.0, 0.0); d];
            for ia in 0..d_a {
                for ib in 0..d_b {
                    prod[ia * d_b + ib] = alpha[i][ia] * beta[j][ib];
                }
            }
            let mv = rho_ab.matrix().matvec(&prod)?;
            let w: f64 = prod.iter().zip(&mv).map(|(c, x)| (c.conj() * x).re).sum();
            eig_deph.push((w.max(0.0), alpha[i].clone(), beta[j].clone()));
        }
    }
    cands.push(encode_product_ensemble(&eig_deph, t, d_a, d_b));

    // product of the marginals
    let mut prod_marg = Vec::new();
    for i in 0..d_a {
        for j in 0..d_b {
            prod_marg.push((
                (ea.eigenvalues[i].max(0.0)) * (eb.eigenvalues[j].max(0.0)),
                alpha[i].clone(),
                beta[j].clone(),
            ));
        }
    }
    cands.push(encode_product_ensemble(&prod_marg, t, d_a, d_b));

    Ok(cands)
}

/// Encode an explicit product ensemble into the optimizer's raw layout,
/// truncating to the `t` heaviest members if needed.
fn encode_product_ensemble(
    members: &[(f64, Vec<Complex64>, Vec<Complex64>)],
    t: usize,
    d_a: usize,
    d_b: usize,
) -> Vec<f64> {
    let stride = 1 + 2 * d_a + 2 * d_b;
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&x, &y| members[y].0.partial_cmp(&members[x].0).unwrap());
    let mut raw = vec![0.0f64; t * stride];
    for slot in 0..t {
        let base = slot * stride;
        if slot < order.len() {
            let (q, a, b) = &members[order[slot]];
            raw[base] = q.max(1e-30).ln();
            for (i, z) in a.iter().enumerate() {
                raw[base + 1 + 2 * i] = z.re;
                raw[base + 1 + 2 * i + 1] = z.im;
            }
            for (i, z) in b.iter().enumerate() {
                raw[base + 1 + 2 * d_a + 2 * i] = z.re;
                raw[base + 1 + 2 * d_a + 2 * i + 1] = z.im;
            }
        } else {
            raw[base] = -80.0; // effectively zero weight
            raw[base + 1] = 1.0;
            raw[base + 1 + 2 * d_a] = 1.0;
        }
    }
    raw
}

/// Entanglement of formation of `Tr_E |ψ⟩⟨ψ|` for the coherent embedding of
/// a unique-k distribution, via the induced-decomposition form: minimize
/// `Σ p_k̄ S(A)` over rank-one measurement families on Eve's register.
pub fn eof_induced(
    p: &ClassicalDistribution,
    ensemble_size: Option<usize>,
    cfg: &OptimizerConfig,
) -> Result<BoundEstimate> {
    if !check_unique_k(p)? {
        return Err(Error::InvalidArgument(
            "the induced entanglement-of-formation bound needs a unique-k distribution".into(),
        ));
    }
    let sizes = p.alphabet_sizes();
    let (d_a, d_b, d_e) = (sizes[0], sizes[1], sizes[2]);
    let m_out = ensemble_size.unwrap_or(d_e * d_e).max(d_e);
    let psi = qqq_embed_vector(p, &["A", "B", "E"])?;
    let amps = psi.amps().to_vec();

    let dim = IsometryParam::raw_len(d_e, m_out);
    let objective = move |raw: &[f64]| -> f64 {
        let param = IsometryParam { in_dim: d_e, out_dim: m_out, raw: raw.to_vec() };
        let k = param.decode();
        let mut total = 0.0;
        for m in 0..m_out {
            // chi[a,b] = sum_k K[m,k] psi[a,b,k]
            let mut chi = vec![Complex64::new(0.0, 0.0); d_a * d_b];
            for (ab, slot) in chi.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for kk in 0..d_e {
                    acc += k[(m, kk)] * amps[ab * d_e + kk];
                }
                *slot = acc;
            }
            let pm: f64 = chi.iter().map(|z| z.norm_sqr()).sum();
            if pm < 1e-14 {
                continue;
            }
            // S(A) of the normalized post-measurement vector
            let x = ComplexMatrix::from_fn(d_a, d_b, |r, c| chi[r * d_b + c]);
            let gram = match x.matmul(&x.adjoint()) {
                Ok(g) => g.scale(Complex64::new(1.0 / pm, 0.0)),
                Err(_) => return f64::NAN,
            };
            match hermitian_eig(&gram) {
                Ok(eig) => {
                    let probs: Vec<f64> =
                        eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
                    total += pm * shannon_entropy(&probs);
                }
                Err(_) => return f64::NAN,
            }
        }
        total
    };

    // computational measurement on Eve
    let comp = {
        let mut v = ComplexMatrix::zeros(m_out, d_e);
        for s in 0..d_e {
            v[(s, s)] = Complex64::new(1.0, 0.0);
        }
        IsometryParam::encode(&v).raw
    };
    let outcome = multi_restart_minimize_seeded(objective, dim, cfg, &[comp])?;
    Ok(BoundEstimate {
        name: "eof-induced".into(),
        value: outcome.best_value,
        direction: Direction::UpperEstimateOfInfimum,
        optimizer: Some(outcome),
        parameters: Default::default(),
    }
    .with_param("ensemble_size", m_out))
}
