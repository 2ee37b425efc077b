//! Seeded random generators for states, distributions, and unitaries.
//!
//! Everything takes a caller-provided RNG so property suites stay
//! reproducible.

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{ComplexMatrix, SubsystemLayout};
use crate::states::{ClassicalDistribution, DensityState, PureState};

/// Standard-normal sample via Box–Muller.
pub fn normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(normal(rng), normal(rng))
}

/// Ginibre matrix (i.i.d. complex normal entries).
pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-ish random unitary via Gram–Schmidt of a Ginibre matrix.
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    crate::optimize::orthonormalize_columns(&ginibre(rng, d, d))
}

/// Random full-rank density state (normalized Gram matrix of a Ginibre draw).
pub fn random_density(rng: &mut impl Rng, parts: &[(&str, usize)]) -> DensityState {
    let layout = SubsystemLayout::new(parts).expect("valid layout");
    let d = layout.total_dim();
    let g = ginibre(rng, d, d);
    let gram = g.matmul(&g.adjoint()).expect("square");
    let tr = gram.trace().re;
    let m = gram.scale(Complex64::new(1.0 / tr, 0.0));
    DensityState::from_parts_unchecked(layout, m, &[]).expect("valid by construction")
}

/// Random pure state with i.i.d. normal amplitudes.
pub fn random_pure(rng: &mut impl Rng, parts: &[(&str, usize)]) -> PureState {
    let layout = SubsystemLayout::new(parts).expect("valid layout");
    let amps: Vec<Complex64> = (0..layout.total_dim()).map(|_| complex_normal(rng)).collect();
    PureState::normalized(layout, amps).expect("nonzero with probability 1")
}

/// Random probability vector (uniform draws, normalized).
pub fn random_probs(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-6).collect();
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
    v
}

/// Random dense classical distribution.
pub fn random_distribution(rng: &mut impl Rng, sizes: &[usize]) -> ClassicalDistribution {
    let total: usize = sizes.iter().product();
    ClassicalDistribution::new(sizes.to_vec(), random_probs(rng, total))
        .expect("normalized by construction")
}

/// Random tripartite distribution in which each `(i,j)` cell determines Eve's
/// symbol.
pub fn random_unique_k(
    rng: &mut impl Rng,
    da: usize,
    db: usize,
    de: usize,
) -> ClassicalDistribution {
    let pij = random_probs(rng, da * db);
    let mut probs = vec![0.0f64; da * db * de];
    for i in 0..da {
        for j in 0..db {
            let k = rng.random_range(0..de);
            probs[(i * db + j) * de + k] = pij[i * db + j];
        }
    }
    ClassicalDistribution::new(vec![da, db, de], probs).expect("normalized by construction")
}

/// Random ccq state `Σ p_ij |ij⟩⟨ij| ⊗ ρ_E^{ij}` on labels `A, B, E`.
pub fn random_ccq(rng: &mut impl Rng, da: usize, db: usize, de: usize) -> DensityState {
    let layout = SubsystemLayout::new(&[("A", da), ("B", db), ("E", de)]).expect("valid layout");
    let pij = random_probs(rng, da * db);
    let mut m = ComplexMatrix::zeros(da * db * de, da * db * de);
    for cell in 0..da * db {
        let g = ginibre(rng, de, de);
        let gram = g.matmul(&g.adjoint()).expect("square");
        let tr = gram.trace().re;
        let block = gram.scale(Complex64::new(pij[cell] / tr, 0.0));
        for r in 0..de {
            for c in 0..de {
                m[(cell * de + r, cell * de + c)] = block[(r, c)];
            }
        }
    }
    DensityState::from_parts_unchecked(layout, m, &["A", "B"]).expect("valid by construction")
}
