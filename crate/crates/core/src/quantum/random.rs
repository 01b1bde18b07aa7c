//! Seeded random generators for states, measurements and operations.

use super::{DensityMatrix, LosrOperation, Povm, SeparableCertificate};
use crate::error::{Error, Result};
use crate::mat::{psd_inv_sqrt, ComplexMatrix, DimList, HermitianMatrix, C_ONE};
use crate::quantum::channel::{choi_from_kraus, ChoiState};
use crate::rng::{complex_gaussian, rng_from_seed, split_seed, SeededRng};
use num_complex::Complex64;
use rand::Rng;

/// Square matrix of i.i.d. standard complex Gaussians.
pub fn random_ginibre(rows: usize, cols: usize, rng: &mut SeededRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-style random density matrix of the given rank: G G† / tr with G a
/// d x rank Ginibre block.
pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if rank == 0 || rank > d {
        return Err(Error::InvalidArgument(format!(
            "rank {} must lie in 1..={}",
            rank, d
        )));
    }
    let mut rng = rng_from_seed(seed);
    let g = random_ginibre(d, rank, &mut rng);
    let gram = g.matmul(&g.adjoint());
    let tr = gram.trace();
    Ok(DensityMatrix::new_unchecked(
        DimList::single(d),
        gram.scale(C_ONE / tr),
    ))
}

/// Random multipartite density matrix (full rank) with the given dims.
pub fn random_density_multi(dims: &DimList, seed: u64) -> DensityMatrix {
    let n = dims.total();
    let mut rng = rng_from_seed(seed);
    let g = random_ginibre(n, n, &mut rng);
    let gram = g.matmul(&g.adjoint());
    let tr = gram.trace();
    DensityMatrix::new_unchecked(dims.clone(), gram.scale(C_ONE / tr))
}

/// Random pure state of dimension d.
pub fn random_pure_density(d: usize, seed: u64) -> DensityMatrix {
    let mut rng = rng_from_seed(seed);
    let v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(&mut rng)).collect();
    DensityMatrix::from_ket(DimList::single(d), &v).expect("Gaussian ket is nonzero")
}

/// Random pure product state across the given dims.
pub fn random_product_pure(dims: &DimList, seed: u64) -> (DensityMatrix, Vec<DensityMatrix>) {
    let factors: Vec<DensityMatrix> = dims
        .dims()
        .iter()
        .enumerate()
        .map(|(p, &d)| random_pure_density(d, split_seed(seed, p as u64)))
        .collect();
    let mut joint = factors[0].clone();
    for f in &factors[1..] {
        joint = joint.tensor(f);
    }
    (joint, factors)
}

/// Random Haar unitary (QR of a Ginibre matrix with phase fixing).
pub fn random_unitary(d: usize, rng: &mut SeededRng) -> ComplexMatrix {
    // Gram-Schmidt on Ginibre columns is equivalent to QR for this purpose.
    let g = random_ginibre(d, d, rng);
    let mut cols: Vec<Vec<Complex64>> = (0..d)
        .map(|c| (0..d).map(|r| g[(r, c)]).collect())
        .collect();
    for c in 0..d {
        for prev in 0..c {
            let inner: Complex64 = cols[prev]
                .iter()
                .zip(cols[c].iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            let prev_col = cols[prev].clone();
            for (x, p) in cols[c].iter_mut().zip(prev_col.iter()) {
                *x -= inner * p;
            }
        }
        let norm: f64 = cols[c].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[c].iter_mut() {
            *x /= norm;
        }
    }
    ComplexMatrix::from_fn(d, d, |r, c| cols[c][r])
}

/// Random separable state: a convex mixture of `terms` random pure product
/// states with uniform-Dirichlet weights. Returns the state together with
/// the explicit certificate (finest partition, one block per party).
pub fn random_separable(
    dims: &DimList,
    terms: usize,
    seed: u64,
) -> Result<(DensityMatrix, SeparableCertificate)> {
    if terms == 0 {
        return Err(Error::InvalidArgument("need at least one mixture term".into()));
    }
    let mut rng = rng_from_seed(split_seed(seed, 0xD1B1));
    // Dirichlet(1,...,1) via normalized exponentials.
    let mut weights: Vec<f64> = (0..terms)
        .map(|_| -(rng.gen::<f64>().max(1e-12)).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }

    let mut mixture = Vec::with_capacity(terms);
    for (t, &w) in weights.iter().enumerate() {
        let (_, factors) = random_product_pure(dims, split_seed(seed, 1000 + t as u64));
        mixture.push((w, factors));
    }
    let cert = SeparableCertificate {
        partition: (0..dims.len()).map(|p| vec![p]).collect(),
        mixture,
    };
    let state = cert.assemble()?;
    Ok((state, cert))
}

/// Random POVM with `outcomes` elements: raw PSD blocks G G† symmetrically
/// normalized by the inverse square root of their sum.
pub fn random_povm(dims: &DimList, outcomes: usize, seed: u64) -> Result<Povm> {
    if outcomes == 0 {
        return Err(Error::InvalidArgument("POVM needs at least one outcome".into()));
    }
    let n = dims.total();
    let mut rng = rng_from_seed(seed);
    let raw: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let g = random_ginibre(n, n, &mut rng);
            g.matmul(&g.adjoint())
        })
        .collect();
    let mut sum = ComplexMatrix::zeros(n, n);
    for r in &raw {
        sum.add_assign_scaled(r, C_ONE);
    }
    let s_inv_sqrt = psd_inv_sqrt(&HermitianMatrix::new_unchecked(sum), 1e-12);
    let elements: Vec<ComplexMatrix> = raw
        .iter()
        .map(|e| s_inv_sqrt.matrix().matmul(e).matmul(s_inv_sqrt.matrix()))
        .collect();
    Povm::new(dims.clone(), elements)
}

/// Random LOSR operation: a mixture of products of random unital-ish
/// channels built from renormalized Kraus sets.
pub fn random_losr(dims: &DimList, components: usize, seed: u64) -> Result<LosrOperation> {
    if components == 0 {
        return Err(Error::InvalidArgument("LOSR needs at least one component".into()));
    }
    let mut rng = rng_from_seed(split_seed(seed, 0x105A));
    let mut weights: Vec<f64> = (0..components)
        .map(|_| -(rng.gen::<f64>().max(1e-12)).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let mut comps = Vec::with_capacity(components);
    for (c, &w) in weights.iter().enumerate() {
        let mut channels = Vec::with_capacity(dims.len());
        for (p, &d) in dims.dims().iter().enumerate() {
            let ch_seed = split_seed(seed, (c * dims.len() + p) as u64 + 7);
            channels.push(random_channel(d, 2, ch_seed)?);
        }
        comps.push((w, channels));
    }
    Ok(LosrOperation { components: comps })
}

/// Random channel on dimension d with the given Kraus count.
pub fn random_channel(d: usize, kraus_count: usize, seed: u64) -> Result<ChoiState> {
    let mut rng = rng_from_seed(seed);
    let raw: Vec<ComplexMatrix> = (0..kraus_count.max(1))
        .map(|_| random_ginibre(d, d, &mut rng))
        .collect();
    let mut s = ComplexMatrix::zeros(d, d);
    for k in &raw {
        s.add_assign_scaled(&k.adjoint().matmul(k), C_ONE);
    }
    let s_inv_sqrt = psd_inv_sqrt(&HermitianMatrix::new_unchecked(s), 1e-12);
    let kraus: Vec<ComplexMatrix> = raw.iter().map(|k| k.matmul(s_inv_sqrt.matrix())).collect();
    choi_from_kraus(&kraus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_density_is_pure() {
        let rho = random_density(4, 1, 9).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let a = random_density(3, 2, 1234).unwrap();
        let b = random_density(3, 2, 1234).unwrap();
        assert_eq!(a.matrix().data(), b.matrix().data());
        let (s1, _) = random_separable(&DimList::pair(2, 2), 3, 77).unwrap();
        let (s2, _) = random_separable(&DimList::pair(2, 2), 3, 77).unwrap();
        assert_eq!(s1.matrix().data(), s2.matrix().data());
    }

    #[test]
    fn random_separable_is_ppt_and_certified() {
        for seed in 0..12u64 {
            let (state, cert) = random_separable(&DimList::pair(2, 2), 4, seed).unwrap();
            cert.verify(&state, 1e-9).unwrap();
            assert!(state.ppt_min_eigenvalue(&[1]).unwrap() > -1e-10);
        }
    }

    #[test]
    fn random_povm_is_complete() {
        let dims = DimList::pair(2, 2);
        let povm = random_povm(&dims, 4, 3).unwrap();
        assert_eq!(povm.len(), 4);
        // Povm::new already verifies completeness; spot check positivity.
        for e in povm.elements() {
            assert!(e.min_eigenvalue() > -1e-10);
        }
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = rng_from_seed(4);
        for d in [2usize, 3, 4] {
            let u = random_unitary(d, &mut rng);
            let prod = u.adjoint().matmul(&u);
            assert!(prod.max_abs_diff(&ComplexMatrix::identity(d)) < 1e-10);
        }
    }

    #[test]
    fn random_losr_components_sum_to_one() {
        let losr = random_losr(&DimList::pair(2, 2), 3, 5).unwrap();
        let total: f64 = losr.components.iter().map(|(w, _)| *w).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
