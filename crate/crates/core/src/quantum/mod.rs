//! Quantum objects: density matrices, separability certificates, POVMs,
//! channels as Choi states, and seeded random generators.

mod channel;
mod random;

pub use channel::{
    apply_channel, apply_channel_on_party, choi_from_kraus, constant_channel, depolarizing_channel,
    bit_flip_channel, eb_channel, identity_channel, kraus_from_choi, z_measure_prepare_channel,
    ChoiState,
};
pub use random::{
    random_channel, random_density, random_density_multi, random_ginibre, random_losr,
    random_povm, random_product_pure, random_pure_density, random_separable, random_unitary,
};

use crate::error::{Error, Result};
use crate::mat::{
    kron, kron_list, partial_trace, partial_transpose_multi, ComplexMatrix, DimList,
    HermitianMatrix, C_ONE,
};
use num_complex::Complex64;

/// Positive unit-trace operator with its tensor-factor dimensions.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    dims: DimList,
    matrix: HermitianMatrix,
}

pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;

impl DensityMatrix {
    pub fn new(dims: DimList, matrix: ComplexMatrix) -> Result<Self> {
        dims.check_matches(matrix.rows())?;
        let h = HermitianMatrix::new(matrix)?;
        let tr = h.trace_re();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace {} deviates from 1",
                tr
            )));
        }
        let min_eig = h.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(Error::NotPsd { min_eig });
        }
        Ok(DensityMatrix { dims, matrix: h })
    }

    /// For matrices PSD and normalized by construction.
    pub fn new_unchecked(dims: DimList, matrix: ComplexMatrix) -> Self {
        DensityMatrix {
            dims,
            matrix: HermitianMatrix::new_unchecked(matrix),
        }
    }

    pub fn from_ket(dims: DimList, ket: &[Complex64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let normalized: Vec<Complex64> = ket.iter().map(|z| z / norm).collect();
        DensityMatrix::new(dims, ComplexMatrix::outer(&normalized))
    }

    pub fn maximally_mixed(dims: DimList) -> Self {
        let n = dims.total();
        DensityMatrix::new_unchecked(dims, ComplexMatrix::identity(n).scale_re(1.0 / n as f64))
    }

    pub fn dims(&self) -> &DimList {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.matrix().trace_product(self.matrix()).re
    }

    /// Expectation tr(O rho) of a Hermitian observable.
    pub fn expectation(&self, obs: &HermitianMatrix) -> f64 {
        obs.matrix().trace_product(self.matrix()).re
    }

    /// Reduced state on the kept parties.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = partial_trace(self.matrix(), &self.dims, keep)?;
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let dims = DimList::new(sorted.iter().map(|&p| self.dims.dim(p)).collect())?;
        Ok(DensityMatrix::new_unchecked(dims, m))
    }

    /// Global transpose (still a density matrix).
    pub fn transpose(&self) -> DensityMatrix {
        DensityMatrix::new_unchecked(self.dims.clone(), self.matrix().transpose())
    }

    /// Partial transpose over a party set; Hermitian but possibly not PSD.
    pub fn partial_transpose(&self, parties: &[usize]) -> Result<HermitianMatrix> {
        let pt = partial_transpose_multi(self.matrix(), &self.dims, parties)?;
        Ok(HermitianMatrix::new_unchecked(pt))
    }

    /// Tensor product of two states; dims concatenate.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.dims().to_vec();
        dims.extend_from_slice(other.dims.dims());
        DensityMatrix::new_unchecked(
            DimList::new(dims).expect("valid dims"),
            kron(self.matrix(), other.matrix()),
        )
    }

    /// Minimum eigenvalue of the partial transpose over `parties` (the PPT
    /// necessary-condition check).
    pub fn ppt_min_eigenvalue(&self, parties: &[usize]) -> Result<f64> {
        Ok(self.partial_transpose(parties)?.min_eigenvalue())
    }
}

/// Maximally entangled state Phi+ on d ⊗ d.
pub fn max_entangled(d: usize) -> DensityMatrix {
    let ket = crate::bases::phi_plus_ket(d);
    DensityMatrix::new_unchecked(DimList::pair(d, d), ComplexMatrix::outer(&ket))
}

/// Isotropic mixture p·Phi+ + (1-p)·I/d² on d ⊗ d.
pub fn werner_phi_plus(d: usize, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "mixing weight {} not in [0,1]",
            p
        )));
    }
    let phi = max_entangled(d);
    let n = d * d;
    let mut m = phi.matrix().scale_re(p);
    m.add_assign_scaled(
        &ComplexMatrix::identity(n),
        Complex64::new((1.0 - p) / n as f64, 0.0),
    );
    Ok(DensityMatrix::new_unchecked(DimList::pair(d, d), m))
}

/// Explicit convex decomposition over a party grouping witnessing
/// separability relative to that partition.
#[derive(Clone, Debug)]
pub struct SeparableCertificate {
    /// Grouping of party indices into blocks.
    pub partition: Vec<Vec<usize>>,
    /// Mixture terms: weight plus one density matrix per block.
    pub mixture: Vec<(f64, Vec<DensityMatrix>)>,
}

impl SeparableCertificate {
    /// Reassembles the certified state (blocks are tensored in partition
    /// order, which must match the state's party order).
    pub fn assemble(&self) -> Result<DensityMatrix> {
        if self.mixture.is_empty() {
            return Err(Error::InvalidArgument("empty certificate mixture".into()));
        }
        let mut dims: Vec<usize> = Vec::new();
        for (_, blocks) in self.mixture.iter().take(1) {
            for b in blocks {
                dims.extend_from_slice(b.dims().dims());
            }
        }
        let dims = DimList::new(dims)?;
        let total = dims.total();
        let mut acc = ComplexMatrix::zeros(total, total);
        for (w, blocks) in &self.mixture {
            let mats: Vec<&ComplexMatrix> = blocks.iter().map(|b| b.matrix()).collect();
            let term = kron_list(&mats);
            acc.add_assign_scaled(&term, Complex64::new(*w, 0.0));
        }
        Ok(DensityMatrix::new_unchecked(dims, acc))
    }

    /// Checks weights and reassembly against a target state.
    pub fn verify(&self, target: &DensityMatrix, tol: f64) -> Result<()> {
        let wsum: f64 = self.mixture.iter().map(|(w, _)| *w).sum();
        if (wsum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "certificate weights sum to {}",
                wsum
            )));
        }
        if self.mixture.iter().any(|(w, _)| *w < -1e-12) {
            return Err(Error::InvalidArgument("negative certificate weight".into()));
        }
        let assembled = self.assemble()?;
        let diff = (assembled.matrix() - target.matrix()).frobenius_norm();
        if diff > tol {
            return Err(Error::InvalidArgument(format!(
                "certificate reassembly residual {:.3e} exceeds {:.1e}",
                diff, tol
            )));
        }
        Ok(())
    }
}

/// Positive operator-valued measure on a (possibly multipartite) space.
#[derive(Clone, Debug)]
pub struct Povm {
    dims: DimList,
    elements: Vec<HermitianMatrix>,
}

pub const POVM_SUM_TOL: f64 = 1e-9;

impl Povm {
    pub fn new(dims: DimList, elements: Vec<ComplexMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidArgument(
                "POVM needs at least one element".into(),
            ));
        }
        let n = dims.total();
        let mut sum = ComplexMatrix::zeros(n, n);
        let mut herm = Vec::with_capacity(elements.len());
        for e in elements {
            dims.check_matches(e.rows())?;
            let h = HermitianMatrix::new(e)?;
            let min_eig = h.min_eigenvalue();
            if min_eig < -PSD_TOL {
                return Err(Error::NotPsd { min_eig });
            }
            sum.add_assign_scaled(h.matrix(), C_ONE);
            herm.push(h);
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(n));
        if deviation > POVM_SUM_TOL {
            return Err(Error::IncompletePovm { deviation });
        }
        Ok(Povm {
            dims,
            elements: herm,
        })
    }

    /// For element lists complete by construction.
    pub fn new_unchecked(dims: DimList, elements: Vec<HermitianMatrix>) -> Self {
        Povm { dims, elements }
    }

    pub fn dims(&self) -> &DimList {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &HermitianMatrix {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    /// Born-rule outcome distribution on a state.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| e.matrix().trace_product(rho.matrix()).re)
            .collect()
    }
}

/// Local operation with shared randomness: a mixture of products of
/// per-party channels.
#[derive(Clone, Debug)]
pub struct LosrOperation {
    /// Mixture terms: weight plus one channel per party.
    pub components: Vec<(f64, Vec<ChoiState>)>,
}

impl LosrOperation {
    /// Identity LOSR on the given party dimensions.
    pub fn identity(dims: &DimList) -> Self {
        let channels = dims.dims().iter().map(|&d| identity_channel(d)).collect();
        LosrOperation {
            components: vec![(1.0, channels)],
        }
    }
}

/// Applies an LOSR operation to a state and transports its separability
/// certificate through the construction: each mixture term of the
/// certificate is hit blockwise by each product channel, and the two
/// randomness indices merge into one.
pub fn apply_losr(
    state: &DensityMatrix,
    certificate: Option<&SeparableCertificate>,
    losr: &LosrOperation,
) -> Result<(DensityMatrix, Option<SeparableCertificate>)> {
    let dims = state.dims().clone();
    if losr.components.is_empty() {
        return Err(Error::InvalidArgument("empty LOSR mixture".into()));
    }
    for (_, channels) in &losr.components {
        if channels.len() != dims.len() {
            return Err(Error::DimMismatch(format!(
                "LOSR has {} per-party channels for {} parties",
                channels.len(),
                dims.len()
            )));
        }
        for (p, ch) in channels.iter().enumerate() {
            if ch.input_dim() != dims.dim(p) || ch.output_dim() != dims.dim(p) {
                return Err(Error::DimMismatch(format!(
                    "channel on party {} maps {}->{} but the party has dimension {}",
                    p,
                    ch.input_dim(),
                    ch.output_dim(),
                    dims.dim(p)
                )));
            }
        }
    }
    let wsum: f64 = losr.components.iter().map(|(w, _)| *w).sum();
    if (wsum - 1.0).abs() > 1e-9 || losr.components.iter().any(|(w, _)| *w < -1e-12) {
        return Err(Error::InvalidArgument(
            "LOSR weights must be a probability distribution".into(),
        ));
    }

    let total = dims.total();
    let mut out = ComplexMatrix::zeros(total, total);
    for (w, channels) in &losr.components {
        let mut acc = state.matrix().clone();
        for (p, ch) in channels.iter().enumerate() {
            acc = apply_channel_on_party(&acc, &dims, p, ch)?;
        }
        out.add_assign_scaled(&acc, Complex64::new(*w, 0.0));
    }
    let new_state = DensityMatrix::new_unchecked(dims.clone(), out);

    let new_cert = match certificate {
        None => None,
        Some(cert) => {
            let mut mixture = Vec::with_capacity(cert.mixture.len() * losr.components.len());
            for (wl, channels) in &losr.components {
                for (wc, blocks) in &cert.mixture {
                    let mut new_blocks = Vec::with_capacity(blocks.len());
                    for (block, parties) in blocks.iter().zip(cert.partition.iter()) {
                        let bdims = block.dims().clone();
                        let mut m = block.matrix().clone();
                        for (local, &party) in parties.iter().enumerate() {
                            m = apply_channel_on_party(&m, &bdims, local, &channels[party])?;
                        }
                        new_blocks.push(DensityMatrix::new_unchecked(bdims, m));
                    }
                    mixture.push((wl * wc, new_blocks));
                }
            }
            Some(SeparableCertificate {
                partition: cert.partition.clone(),
                mixture,
            })
        }
    };
    Ok((new_state, new_cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::C_ZERO;

    #[test]
    fn max_entangled_entries_and_purity() {
        let phi = max_entangled(2);
        let m = phi.matrix();
        for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((m[(r, c)] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
        assert!((m[(1, 1)]).norm() < 1e-15);

        let phi3 = max_entangled(3);
        assert!((phi3.matrix().trace().re - 1.0).abs() < 1e-14);
        assert!((phi3.purity() - 1.0).abs() < 1e-12);

        let red = phi3.reduce(&[0]).unwrap();
        let expected = ComplexMatrix::identity(3).scale_re(1.0 / 3.0);
        assert!(red.matrix().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn density_constructor_validates() {
        let dims = DimList::single(2);
        let bad_trace = ComplexMatrix::identity(2);
        assert!(DensityMatrix::new(dims.clone(), bad_trace).is_err());
        let not_psd = ComplexMatrix::from_real(2, 2, &[1.5, 0.0, 0.0, -0.5]);
        assert!(DensityMatrix::new(dims, not_psd).is_err());
    }

    #[test]
    fn certificate_verifies_and_catches_mismatch() {
        let ket0 = [C_ONE, C_ZERO];
        let ket1 = [C_ZERO, C_ONE];
        let d0 = DensityMatrix::from_ket(DimList::single(2), &ket0).unwrap();
        let d1 = DensityMatrix::from_ket(DimList::single(2), &ket1).unwrap();
        let cert = SeparableCertificate {
            partition: vec![vec![0], vec![1]],
            mixture: vec![
                (0.5, vec![d0.clone(), d0.clone()]),
                (0.5, vec![d1.clone(), d1.clone()]),
            ],
        };
        let target = cert.assemble().unwrap();
        cert.verify(&target, 1e-12).unwrap();
        assert!(cert.verify(&max_entangled(2), 1e-9).is_err());
    }

    #[test]
    fn werner_endpoints() {
        let w0 = werner_phi_plus(2, 0.0).unwrap();
        assert!(
            w0.matrix()
                .max_abs_diff(&ComplexMatrix::identity(4).scale_re(0.25))
                < 1e-15
        );
        let w1 = werner_phi_plus(2, 1.0).unwrap();
        assert!(w1.matrix().max_abs_diff(max_entangled(2).matrix()) < 1e-15);
    }

    #[test]
    fn povm_rejects_incomplete() {
        let dims = DimList::single(2);
        let half = ComplexMatrix::identity(2).scale_re(0.5);
        assert!(Povm::new(dims.clone(), vec![half.clone()]).is_err());
        assert!(Povm::new(dims, vec![half.clone(), half]).is_ok());
    }

    #[test]
    fn identity_losr_preserves_state_and_certificate() {
        let ket0 = [C_ONE, C_ZERO];
        let d0 = DensityMatrix::from_ket(DimList::single(2), &ket0).unwrap();
        let cert = SeparableCertificate {
            partition: vec![vec![0], vec![1]],
            mixture: vec![(1.0, vec![d0.clone(), d0.clone()])],
        };
        let state = cert.assemble().unwrap();
        let losr = LosrOperation::identity(state.dims());
        let (out, new_cert) = apply_losr(&state, Some(&cert), &losr).unwrap();
        assert!(out.matrix().max_abs_diff(state.matrix()) < 1e-12);
        new_cert.unwrap().verify(&out, 1e-9).unwrap();
    }
}
