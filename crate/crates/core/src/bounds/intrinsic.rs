//! Intrinsic information and its reduced variants on quantum states.

use num_complex::Complex64;

use crate::bounds::{
    canonical_channel_isometries, BoundEstimate, ChannelSearch, Direction,
};
use crate::linalg::ComplexMatrix;
use crate::optimize::{
    multi_restart_minimize_seeded, IsometryParam, OptimizerConfig,
};
use crate::states::{shannon_entropy, DensityState, Parties, PROB_TOL};
use crate::{Error, Result};

/// `I(A:B↓E)`: infimum of `I(A:B|E′)` over channels applied to Eve's side,
/// reported as the minimum over seeded restarts. The identity channel (when
/// the output dimension permits), the computational measurement, and the
/// discarding channel are fixed restarts, so the estimate never exceeds
/// `I(A:B|E)`.
pub fn intrinsic_information(
    rho: &DensityState,
    parties: &Parties,
    eprime_dim: Option<usize>,
    cfg: &OptimizerConfig,
) -> Result<BoundEstimate> {
    let search = ChannelSearch::new(rho, parties)?;
    intrinsic_from_search(&search, eprime_dim, cfg)
}

pub(crate) fn intrinsic_from_search(
    search: &ChannelSearch,
    eprime_dim: Option<usize>,
    cfg: &OptimizerConfig,
) -> Result<BoundEstimate> {
    let d_e = search.d_e;
    let out_dim = eprime_dim.unwrap_or(d_e);
    let env_dim = d_e;
    if out_dim == 0 {
        return Err(Error::InvalidArgument("E' dimension must be >= 1".into()));
    }
    let rows = out_dim * env_dim;
    if rows < d_e {
        return Err(Error::InvalidArgument(
            "E' and environment dimensions too small for an isometry".into(),
        ));
    }
    let dim = IsometryParam::raw_len(d_e, rows);
    let candidates: Vec<Vec<f64>> = canonical_channel_isometries(d_e, out_dim, env_dim)
        .into_iter()
        .map(|v| IsometryParam::encode(&v).raw)
        .collect();

    let objective = |raw: &[f64]| -> f64 {
        let param = IsometryParam { in_dim: d_e, out_dim: rows, raw: raw.to_vec() };
        let v = param.decode();
        search.cmi_after(&v, out_dim, env_dim).unwrap_or(f64::NAN)
    };
    let outcome = multi_restart_minimize_seeded(objective, dim, cfg, &candidates)?;
    let value = outcome.best_value;
    Ok(BoundEstimate {
        name: "intrinsic-information".into(),
        value,
        direction: Direction::UpperEstimateOfInfimum,
        optimizer: Some(outcome),
        parameters: Default::default(),
    }
    .with_param("eprime_dim", out_dim)
    .with_param("env_dim", env_dim))
}

/// Which reduced intrinsic information is being computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducedParam {
    /// Classical extensions, penalty `S(E')`.
    One,
    /// Arbitrary (parameterized quantum) extensions, penalty `2·S(E')`.
    Two,
}

/// Reduced intrinsic information `inf { I(A:B↓EE′) + a·S(E′) }`.
///
/// For `a = 1` the extensions are classical registers correlated with the
/// state's classical cells: all block-coarsenings (functions of the joint
/// classical index) up to `cap` symbols are enumerated when the support has
/// at most 8 cells. For `a = 2` the extension is a parameterized channel
/// applied to a purifying register, with output dimension `cap`. The empty
/// extension is always included, so the estimate never exceeds the intrinsic
/// information.
pub fn reduced_intrinsic_information(
    rho: &DensityState,
    parties: &Parties,
    a: ReducedParam,
    cap: usize,
    cfg: &OptimizerConfig,
) -> Result<BoundEstimate> {
    match a {
        ReducedParam::One => reduced_classical_extensions(rho, parties, cap, cfg),
        ReducedParam::Two => reduced_quantum_extensions(rho, parties, cap, cfg),
    }
}

fn reduced_classical_extensions(
    rho: &DensityState,
    parties: &Parties,
    alphabet_cap: usize,
    cfg: &OptimizerConfig,
) -> Result<BoundEstimate> {
    parties.check_cover(rho.layout())?;
    if alphabet_cap < 1 {
        return Err(Error::InvalidArgument("alphabet cap must be >= 1".into()));
    }

    // fully classical states go through the probability-space machinery
    if rho.is_fully_classical() {
        let all: Vec<&str> = rho.layout().labels().iter().map(|s| s.as_str()).collect();
        let p_full = rho.diagonal_distribution(&all)?;
        let pos_of = |labels: &[String]| -> Result<Vec<usize>> {
            labels.iter().map(|l| rho.layout().position(l)).collect()
        };
        let groups =
            vec![pos_of(&parties.alice)?, pos_of(&parties.bob)?, pos_of(&parties.eve)?];
        let p3 = p_full.regroup(&groups)?;
        return crate::bounds::classical::reduced_intrinsic_classical(&p3, alphabet_cap, cfg);
    }
    let inner_cfg = cfg.inner(cfg.restarts.clamp(1, 4), cfg.max_iters.min(250));

    // classical cells with weight above the probability floor
    let classical: Vec<String> = rho
        .layout()
        .labels()
        .iter()
        .filter(|l| rho.is_classical(l))
        .cloned()
        .collect();
    let cells = classical_cells(rho, &classical)?;
    let enumerable = !cells.is_empty() && cells.len() <= 8;

    // empty extension first: plain intrinsic information
    let empty = intrinsic_information(rho, parties, None, &inner_cfg)?;
    let mut best_value = empty.value;
    let mut best_entropy = 0.0f64;
    let mut best_partition: Option<Vec<usize>> = None;
    let mut best_outcome = empty.optimizer;
    let mut enumerated = 0usize;

    if enumerable {
        let ext_label = rho.layout().fresh_label("_Ext");
        for partition in partitions_up_to(cells.len(), alphabet_cap) {
            let blocks = 1 + *partition.iter().max().unwrap_or(&0);
            if blocks == 1 {
                continue; // the empty extension is already in
            }
            enumerated += 1;
            let weights = partition_weights(&cells, &partition, blocks);
            let s_ext = shannon_entropy(&weights);
            if s_ext >= best_value {
                continue; // the penalty alone already loses
            }
            let extended =
                extend_with_cell_function(rho, &classical, &cells, &partition, blocks, &ext_label)?;
            let mut eve = parties.eve.clone();
            eve.push(ext_label.clone());
            let sub_parties =
                Parties { alice: parties.alice.clone(), bob: parties.bob.clone(), eve };
            let inner = intrinsic_information(&extended, &sub_parties, None, &inner_cfg)?;
            let total = inner.value + s_ext;
            if total < best_value {
                best_value = total;
                best_entropy = s_ext;
                best_partition = Some(partition.clone());
                best_outcome = inner.optimizer;
            }
        }
    }

    let mut est = BoundEstimate {
        name: "reduced-intrinsic-information".into(),
        value: best_value,
        direction: Direction::UpperEstimateOfInfimum,
        optimizer: best_outcome,
        parameters: Default::default(),
    }
    .with_param("a", 1)
    .with_param("alphabet_cap", alphabet_cap)
    .with_param("extensions_enumerated", enumerated)
    .with_param("extension_entropy", format!("{best_entropy:.12}"));
    if let Some(p) = best_partition {
        let tags: Vec<String> = p.iter().map(|b| b.to_string()).collect();
        est = est.with_param("best_extension", tags.join(","));
    } else {
        est = est.with_param("best_extension", "empty");
    }
    if !enumerable && !cells.is_empty() {
        est = est.with_param("extension_enumeration", "skipped (support larger than 8 cells)");
    }
    Ok(est)
}

/// Joint classical-index cells (flat index, weight) with weight > PROB_TOL.
fn classical_cells(rho: &DensityState, classical: &[String]) -> Result<Vec<(usize, f64)>> {
    if classical.is_empty() {
        return Ok(Vec::new());
    }
    let refs: Vec<&str> = classical.iter().map(|s| s.as_str()).collect();
    let p = rho.diagonal_distribution(&refs)?;
    Ok(p.probs()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > PROB_TOL)
        .map(|(i, &w)| (i, w))
        .collect())
}

/// Restricted-growth strings over `n` items with at most `cap` blocks
/// (set partitions up to relabeling of the blocks).
pub(crate) fn partitions_up_to(n: usize, cap: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    fn rec(current: &mut Vec<usize>, pos: usize, max_used: usize, cap: usize, out: &mut Vec<Vec<usize>>) {
        let n = current.len();
        if pos == n {
            out.push(current.clone());
            return;
        }
        let limit = (max_used + 1).min(cap - 1);
        for b in 0..=limit {
            current[pos] = b;
            rec(current, pos + 1, max_used.max(b), cap, out);
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    rec(&mut current, 1, 0, cap, &mut out);
    out
}

fn partition_weights(cells: &[(usize, f64)], partition: &[usize], blocks: usize) -> Vec<f64> {
    let mut weights = vec![0.0f64; blocks];
    for ((_, w), &b) in cells.iter().zip(partition) {
        weights[b] += w;
    }
    weights
}

/// Append a classical register holding `f(cell)` where `f` is the partition's
/// block index; valid because the state is block-diagonal over its classical
/// cells.
fn extend_with_cell_function(
    rho: &DensityState,
    classical: &[String],
    cells: &[(usize, f64)],
    partition: &[usize],
    blocks: usize,
    ext_label: &str,
) -> Result<DensityState> {
    let refs: Vec<&str> = classical.iter().map(|s| s.as_str()).collect();
    let positions = rho.layout().positions_of(&refs)?;
    let cell_layout = rho.layout().sublayout(&positions);
    // map from the joint classical index to the block tag
    let mut block_of = vec![usize::MAX; cell_layout.total_dim()];
    for ((cell, _), &b) in cells.iter().zip(partition) {
        block_of[*cell] = b;
    }

    let d = rho.dim();
    let full = rho.layout();
    let cell_of_full: Vec<usize> = (0..d)
        .map(|idx| {
            let multi = full.unravel(idx);
            let cell_multi: Vec<usize> = positions.iter().map(|&p| multi[p]).collect();
            cell_layout.ravel(&cell_multi)
        })
        .collect();

    let mut m = ComplexMatrix::zeros(d * blocks, d * blocks);
    for r in 0..d {
        let br = block_of[cell_of_full[r]];
        if br == usize::MAX {
            continue;
        }
        for c in 0..d {
            let bc = block_of[cell_of_full[c]];
            if bc != br {
                continue; // off-block entries vanish by classicality
            }
            let v = rho.matrix()[(r, c)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            m[(r * blocks + br, c * blocks + bc)] = v;
        }
    }
    let mut labels = full.labels().to_vec();
    labels.push(ext_label.to_string());
    let mut dims = full.dims().to_vec();
    dims.push(blocks);
    let layout = crate::linalg::SubsystemLayout::from_vecs(labels, dims)?;
    let mut cls = rho.classical_labels();
    cls.push(ext_label.to_string());
    let cls_refs: Vec<&str> = cls.iter().map(|s| s.as_str()).collect();
    DensityState::from_parts_unchecked(layout, m, &cls_refs)
}

fn reduced_quantum_extensions(
    rho: &DensityState,
    parties: &Parties,
    ext_dim: usize,
    cfg: &OptimizerConfig,
) -> Result<BoundEstimate> {
    parties.check_cover(rho.layout())?;
    if ext_dim < 1 {
        return Err(Error::InvalidArgument("extension dimension must be >= 1".into()));
    }
    let pur = rho.layout().fresh_label("_P");
    let psi = crate::states::purify(rho, &pur)?;
    let d_p = psi.layout().dim_of(&pur)?;
    let env_dim = d_p;
    let rows = ext_dim * env_dim;
    if rows < d_p {
        return Err(Error::InvalidArgument(
            "extension dimension too small for an isometry on the purifying register".into(),
        ));
    }
    let inner_cfg = cfg.inner(2, cfg.max_iters.min(200));
    let outer_cfg = cfg.inner(cfg.restarts.clamp(1, 6), cfg.max_iters.min(200));

    let ext_label = psi.layout().fresh_label("_Ext");
    let env_label = psi.layout().fresh_label("_Xenv");
    let objective = |raw: &[f64]| -> f64 {
        let param = IsometryParam { in_dim: d_p, out_dim: rows, raw: raw.to_vec() };
        let v = param.decode();
        let phi = match psi.apply_isometry(&pur, &v, ext_dim, env_dim, &ext_label, &env_label) {
            Ok(p) => p,
            Err(_) => return f64::NAN,
        };
        let s_ext = match phi.entropy_of(&[ext_label.as_str()]) {
            Ok(s) => s,
            Err(_) => return f64::NAN,
        };
        let mut eve = parties.eve.clone();
        eve.push(ext_label.clone());
        let search = match ChannelSearch::from_pure(
            phi,
            &parties.alice,
            &parties.bob,
            &eve,
            &[env_label.clone()],
        ) {
            Ok(s) => s,
            Err(_) => return f64::NAN,
        };
        match intrinsic_from_search(&search, None, &inner_cfg) {
            Ok(est) => est.value + 2.0 * s_ext,
            Err(_) => f64::NAN,
        }
    };

    // trivial extension |0><0|: inner intrinsic of rho itself, zero penalty
    let trivial = {
        let mut v = ComplexMatrix::zeros(rows, d_p);
        for s in 0..d_p {
            v[(s, s)] = Complex64::new(1.0, 0.0);
        }
        IsometryParam::encode(&v).raw
    };
    let dim = IsometryParam::raw_len(d_p, rows);
    let outcome = multi_restart_minimize_seeded(objective, dim, &outer_cfg, &[trivial])?;
    Ok(BoundEstimate {
        name: "reduced-intrinsic-information".into(),
        value: outcome.best_value,
        direction: Direction::UpperEstimateOfInfimum,
        optimizer: Some(outcome),
        parameters: Default::default(),
    }
    .with_param("a", 2)
    .with_param("ext_dim", ext_dim))
}
