//! Channels in Choi form.
//!
//! The canonical internal representation of a channel N: A -> B is its
//! normalized Choi state J = (id ⊗ N)(Phi+) on A' ⊗ B; Kraus input is
//! converted on load. Application uses the contraction
//! N(tau) = d_A · tr_A[ J (tau^T ⊗ I) ].

use super::{DensityMatrix, Povm};
use crate::error::{Error, Result};
use crate::mat::{
    hermitian_eig_raw, kron, partial_trace, permute_systems, ComplexMatrix, DimList,
    HermitianMatrix, C_ZERO,
};
use num_complex::Complex64;

/// Bipartite state encoding a trace-preserving channel; the marginal over
/// the output factor equals I/d_A.
#[derive(Clone, Debug)]
pub struct ChoiState {
    input_dim: usize,
    output_dim: usize,
    state: DensityMatrix,
}

pub const CHOI_MARGINAL_TOL: f64 = 1e-9;

impl ChoiState {
    pub fn new(input_dim: usize, output_dim: usize, state: DensityMatrix) -> Result<Self> {
        if state.dims().dims() != [input_dim, output_dim] {
            return Err(Error::DimMismatch(format!(
                "Choi state dims {:?} do not match ({}, {})",
                state.dims().dims(),
                input_dim,
                output_dim
            )));
        }
        let marginal = partial_trace(state.matrix(), state.dims(), &[0])?;
        let expected = ComplexMatrix::identity(input_dim).scale_re(1.0 / input_dim as f64);
        let dev = marginal.max_abs_diff(&expected);
        if dev > CHOI_MARGINAL_TOL {
            return Err(Error::NotTracePreserving { deviation: dev });
        }
        Ok(ChoiState {
            input_dim,
            output_dim,
            state,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.state.matrix()
    }

    /// Minimum eigenvalue of the partial transpose of the Choi state; a
    /// nonnegative value is necessary for the channel to be
    /// entanglement breaking.
    pub fn ppt_min_eigenvalue(&self) -> f64 {
        self.state
            .ppt_min_eigenvalue(&[1])
            .expect("party 1 exists on a Choi state")
    }
}

/// Builds the Choi state of a channel given by Kraus operators (each
/// `output_dim x input_dim`).
pub fn choi_from_kraus(kraus: &[ComplexMatrix]) -> Result<ChoiState> {
    if kraus.is_empty() {
        return Err(Error::InvalidArgument("empty Kraus list".into()));
    }
    let d_out = kraus[0].rows();
    let d_in = kraus[0].cols();
    let mut completeness = ComplexMatrix::zeros(d_in, d_in);
    for k in kraus {
        if k.rows() != d_out || k.cols() != d_in {
            return Err(Error::DimMismatch("inconsistent Kraus shapes".into()));
        }
        completeness.add_assign_scaled(&k.adjoint().matmul(k), crate::mat::C_ONE);
    }
    let deviation = completeness.max_abs_diff(&ComplexMatrix::identity(d_in));
    if deviation > 1e-9 {
        return Err(Error::NotTracePreserving { deviation });
    }

    let phi = crate::bases::phi_plus_ket(d_in);
    let eye = ComplexMatrix::identity(d_in);
    let n = d_in * d_out;
    let mut acc = ComplexMatrix::zeros(n, n);
    for k in kraus {
        let ik = kron(&eye, k);
        let v = ik.matvec(&phi);
        acc.add_assign_scaled(&ComplexMatrix::outer(&v), crate::mat::C_ONE);
    }
    let dims = DimList::pair(d_in, d_out);
    ChoiState::new(d_in, d_out, DensityMatrix::new_unchecked(dims, acc))
}

/// Extracts a Kraus list from a Choi state via its spectral decomposition.
pub fn kraus_from_choi(choi: &ChoiState) -> Vec<ComplexMatrix> {
    let (d_in, d_out) = (choi.input_dim, choi.output_dim);
    let (vals, vecs) = hermitian_eig_raw(choi.matrix());
    let mut kraus = Vec::new();
    for (idx, &v) in vals.iter().enumerate() {
        if v < 1e-12 {
            continue;
        }
        let scale = (d_in as f64 * v).sqrt();
        let mut k = ComplexMatrix::zeros(d_out, d_in);
        for a in 0..d_in {
            for b in 0..d_out {
                k[(b, a)] = vecs[(a * d_out + b, idx)] * scale;
            }
        }
        kraus.push(k);
    }
    kraus
}

/// Applies the channel to a state on its input space.
pub fn apply_channel(choi: &ChoiState, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != choi.input_dim {
        return Err(Error::DimMismatch(format!(
            "state dimension {} does not match channel input {}",
            rho.dim(),
            choi.input_dim
        )));
    }
    let out = apply_to_matrix(choi, rho.matrix())?;
    Ok(DensityMatrix::new_unchecked(
        DimList::single(choi.output_dim),
        out,
    ))
}

fn apply_to_matrix(choi: &ChoiState, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d_in = choi.input_dim;
    let sandwich = kron(&m.transpose(), &ComplexMatrix::identity(choi.output_dim));
    let prod = choi.matrix().matmul(&sandwich);
    let dims = DimList::pair(d_in, choi.output_dim);
    let traced = partial_trace(&prod, &dims, &[1])?;
    Ok(traced.scale_re(d_in as f64))
}

/// Applies a channel to one party of a multipartite operator. Requires
/// matching input/output dimension on that party.
pub fn apply_channel_on_party(
    m: &ComplexMatrix,
    dims: &DimList,
    party: usize,
    choi: &ChoiState,
) -> Result<ComplexMatrix> {
    if party >= dims.len() {
        return Err(Error::IndexOutOfRange(format!(
            "party {} out of range for {} parties",
            party,
            dims.len()
        )));
    }
    let d = dims.dim(party);
    if choi.input_dim != d || choi.output_dim != d {
        return Err(Error::DimMismatch(format!(
            "in-place channel application needs a {}->{} channel on party {}",
            d, d, party
        )));
    }
    let kraus = kraus_from_choi(choi);
    let n = dims.len();

    // Move the party to the front, apply K ⊗ I, move back.
    let mut perm_front = vec![0usize; n];
    perm_front[0] = party;
    let mut pos = 1;
    for p in 0..n {
        if p != party {
            perm_front[pos] = p;
            pos += 1;
        }
    }
    let fronted = permute_systems(m, dims, &perm_front)?;
    let rest: usize = dims.total() / d;
    let eye_rest = ComplexMatrix::identity(rest);
    let mut acc = ComplexMatrix::zeros(dims.total(), dims.total());
    for k in &kraus {
        let big = kron(k, &eye_rest);
        acc.add_assign_scaled(&big.matmul(&fronted).matmul(&big.adjoint()), crate::mat::C_ONE);
    }
    // Invert the permutation.
    let mut inv = vec![0usize; n];
    for (new_pos, &old_party) in perm_front.iter().enumerate() {
        inv[old_party] = new_pos;
    }
    let mut fronted_dims = vec![d];
    fronted_dims.extend((0..n).filter(|&p| p != party).map(|p| dims.dim(p)));
    let inv_perm: Vec<usize> = (0..n).map(|p| inv[p]).collect();
    permute_systems(&acc, &DimList::new(fronted_dims)?, &inv_perm)
}

/// Measure-and-prepare channel: N(rho) = sum_i tr(Pi_i rho) sigma_i.
/// The Choi state is separable by construction; it is returned together
/// with nothing extra because the certificate is recoverable from the
/// definition (Pi_i^T / tr ⊗ sigma_i with weights tr(Pi_i)/d_A).
pub fn eb_channel(measure: &Povm, prepare: &[DensityMatrix]) -> Result<ChoiState> {
    if measure.len() != prepare.len() {
        return Err(Error::InvalidArgument(format!(
            "{} POVM elements but {} prepared states",
            measure.len(),
            prepare.len()
        )));
    }
    let d_in = measure.dims().total();
    let d_out = prepare[0].dim();
    for p in prepare {
        if p.dim() != d_out {
            return Err(Error::DimMismatch(
                "prepared states must share one dimension".into(),
            ));
        }
    }
    let n = d_in * d_out;
    let mut acc = ComplexMatrix::zeros(n, n);
    for (e, sigma) in measure.elements().iter().zip(prepare.iter()) {
        let term = kron(&e.matrix().transpose(), sigma.matrix());
        acc.add_assign_scaled(&term, Complex64::new(1.0 / d_in as f64, 0.0));
    }
    ChoiState::new(
        d_in,
        d_out,
        DensityMatrix::new_unchecked(DimList::pair(d_in, d_out), acc),
    )
}

/// Identity channel on dimension d (Choi state Phi+).
pub fn identity_channel(d: usize) -> ChoiState {
    ChoiState::new(d, d, super::max_entangled(d)).expect("identity Choi is valid")
}

/// Depolarizing channel N(rho) = (1-p) rho + p I/d.
pub fn depolarizing_channel(d: usize, p: f64) -> Result<ChoiState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "depolarizing strength {} not in [0,1]",
            p
        )));
    }
    let phi = super::max_entangled(d);
    let n = d * d;
    let mut m = phi.matrix().scale_re(1.0 - p);
    m.add_assign_scaled(
        &ComplexMatrix::identity(n),
        Complex64::new(p / (n as f64), 0.0),
    );
    ChoiState::new(d, d, DensityMatrix::new_unchecked(DimList::pair(d, d), m))
}

/// Computational-basis measure-and-reprepare qubit channel.
pub fn z_measure_prepare_channel() -> ChoiState {
    let dims = DimList::single(2);
    let mut e0 = ComplexMatrix::zeros(2, 2);
    e0[(0, 0)] = crate::mat::C_ONE;
    let mut e1 = ComplexMatrix::zeros(2, 2);
    e1[(1, 1)] = crate::mat::C_ONE;
    let povm = Povm::new(dims.clone(), vec![e0.clone(), e1.clone()]).expect("valid POVM");
    let s0 = DensityMatrix::new_unchecked(dims.clone(), e0);
    let s1 = DensityMatrix::new_unchecked(dims, e1);
    eb_channel(&povm, &[s0, s1]).expect("valid EB channel")
}

/// Constant channel mapping everything to sigma.
pub fn constant_channel(d_in: usize, sigma: &DensityMatrix) -> ChoiState {
    let dims = DimList::single(d_in);
    let povm = Povm::new_unchecked(dims, vec![HermitianMatrix::identity(d_in)]);
    eb_channel(&povm, std::slice::from_ref(sigma)).expect("constant channel is EB")
}

/// Bit-flip concatenation X ∘ id on a qubit.
pub fn bit_flip_channel() -> ChoiState {
    let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    choi_from_kraus(&[x]).expect("unitary Kraus set")
}

#[allow(dead_code)]
fn unused(_: Complex64) -> Complex64 {
    C_ZERO
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::C_ONE;
    use crate::quantum::max_entangled;

    #[test]
    fn identity_choi_is_phi_plus_and_acts_trivially() {
        let id = identity_channel(2);
        assert!(id.matrix().max_abs_diff(max_entangled(2).matrix()) < 1e-14);
        let ket0 = [C_ONE, C_ZERO];
        let rho = DensityMatrix::from_ket(DimList::single(2), &ket0).unwrap();
        let out = apply_channel(&id, &rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn fully_depolarizing_maps_to_maximally_mixed() {
        let ch = depolarizing_channel(2, 1.0).unwrap();
        let ket0 = [C_ONE, C_ZERO];
        let rho = DensityMatrix::from_ket(DimList::single(2), &ket0).unwrap();
        let out = apply_channel(&ch, &rho).unwrap();
        let expected = ComplexMatrix::identity(2).scale_re(0.5);
        assert!(out.matrix().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn z_measure_prepare_choi_matches_closed_form() {
        let ch = z_measure_prepare_channel();
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 0)] = Complex64::new(0.5, 0.0);
        expected[(3, 3)] = Complex64::new(0.5, 0.0);
        assert!(ch.matrix().max_abs_diff(&expected) < 1e-14);
        assert!(ch.ppt_min_eigenvalue() > -1e-10);
    }

    #[test]
    fn constant_channel_choi_is_product() {
        let sigma = DensityMatrix::from_ket(DimList::single(2), &[C_ZERO, C_ONE]).unwrap();
        let ch = constant_channel(2, &sigma);
        let expected = kron(
            &ComplexMatrix::identity(2).scale_re(0.5),
            sigma.matrix(),
        );
        assert!(ch.matrix().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn kraus_choi_roundtrip_on_random_channels() {
        use crate::rng::{complex_gaussian, rng_from_seed};
        for seed in 0..10u64 {
            let mut rng = rng_from_seed(seed);
            // Random channel from a Stinespring-like construction: random
            // Kraus then renormalize with the inverse square root of the sum.
            let d = 2 + (seed % 2) as usize;
            let raw: Vec<ComplexMatrix> = (0..3)
                .map(|_| ComplexMatrix::from_fn(d, d, |_, _| complex_gaussian(&mut rng)))
                .collect();
            let mut s = ComplexMatrix::zeros(d, d);
            for k in &raw {
                s.add_assign_scaled(&k.adjoint().matmul(k), C_ONE);
            }
            let s_inv_sqrt =
                crate::mat::psd_inv_sqrt(&HermitianMatrix::new_unchecked(s), 1e-12);
            let kraus: Vec<ComplexMatrix> = raw
                .iter()
                .map(|k| k.matmul(s_inv_sqrt.matrix()))
                .collect();
            let choi = choi_from_kraus(&kraus).unwrap();

            for trial in 0..5u64 {
                let rho = crate::quantum::random_density(d, d, seed * 100 + trial + 1).unwrap();
                // Route 1: Choi contraction.
                let via_choi = apply_channel(&choi, &rho).unwrap();
                // Route 2: direct Kraus application.
                let mut direct = ComplexMatrix::zeros(d, d);
                for k in &kraus {
                    direct.add_assign_scaled(
                        &k.matmul(rho.matrix()).matmul(&k.adjoint()),
                        C_ONE,
                    );
                }
                assert!(via_choi.matrix().max_abs_diff(&direct) < 1e-10);
            }
        }
    }

    #[test]
    fn eb_channels_have_ppt_choi() {
        for seed in 0..8u64 {
            let povm = crate::quantum::random_povm(&DimList::single(2), 3, seed).unwrap();
            let prepare: Vec<DensityMatrix> = (0..3)
                .map(|i| crate::quantum::random_density(2, 2, seed * 31 + i).unwrap())
                .collect();
            let choi = eb_channel(&povm, &prepare).unwrap();
            assert!(choi.ppt_min_eigenvalue() > -1e-10, "seed {}", seed);
        }
    }

    #[test]
    fn non_trace_preserving_kraus_rejected() {
        let half = ComplexMatrix::identity(2).scale_re(0.5);
        assert!(choi_from_kraus(&[half]).is_err());
    }

    #[test]
    fn apply_on_party_matches_kron_application() {
        let ch = depolarizing_channel(2, 0.3).unwrap();
        let rho = crate::quantum::random_density(2, 2, 5).unwrap();
        let sigma = crate::quantum::random_density(3, 3, 6).unwrap();
        let joint = kron(rho.matrix(), sigma.matrix());
        let dims = DimList::pair(2, 3);
        let out = apply_channel_on_party(&joint, &dims, 0, &ch).unwrap();
        let rho_out = apply_channel(&ch, &rho).unwrap();
        let expected = kron(rho_out.matrix(), sigma.matrix());
        assert!(out.max_abs_diff(&expected) < 1e-11);
    }
}
