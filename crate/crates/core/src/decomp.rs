//! Local state decompositions and MDI-value evaluation.
//!
//! An observable W on parties with dimensions (d_1, ..., d_n) is expanded as
//! W = sum_k beta_k ⊗_j tau_{k_j} over products of the trusted local states.
//! For a measurement setting i = (i_1, ..., i_n) the alternative expansion
//! over the rotated states U_{i_j} tau_{k_j} U_{i_j}† has coefficients
//! obtained by contracting the base tensor with the inverse state-to-state
//! transforms, one mode per party.
//!
//! Coefficient tensors are flattened row-major with party 0 as the most
//! significant index, matching the rest of the crate.
//!
//! The MDI value averages the per-setting contractions over all settings:
//! with S the number of settings (the product of the d_j²),
//! I = (1/S) sum_{i,k} beta^i_k P(i|k), which under a faithful strategy
//! equals tr(W rho) / Omega with Omega the product of the d_j. A literal
//! sum over settings of the per-setting expansions would count W once per
//! setting; the 1/S average restores the single-count identity.

use crate::bases::PartyBasis;
use crate::error::{Error, Result};
use crate::mat::linalg::{cholesky, RealMatrix};
use crate::mat::{
    flatten_index, kron_list, unflatten_index, ComplexMatrix, DimList, HermitianMatrix,
};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// Tolerance for the reconstruction invariant, relative to max(1, ||W||_F).
pub const RECONSTRUCTION_TOL: f64 = 1e-9;

/// Local state decomposition of a Hermitian observable, with lazily cached
/// per-setting coefficient tensors.
#[derive(Debug)]
pub struct LocalDecomposition {
    dims: DimList,
    operator: HermitianMatrix,
    bases: Vec<Arc<PartyBasis>>,
    /// Inverse state-to-state transforms per party and setting. The forward
    /// transform expands U_i tau_k U_i† in the tau set; it is the composition
    /// of the basis-convention transform with the basis-to-state change, and
    /// the per-setting coefficients contract against its inverse.
    inverse_transforms: Vec<Vec<RealMatrix>>,
    base_coefficients: Vec<f64>,
    setting_cache: RwLock<HashMap<usize, Arc<Vec<f64>>>>,
}

impl Clone for LocalDecomposition {
    fn clone(&self) -> Self {
        let cache = self.setting_cache.read().expect("cache lock").clone();
        LocalDecomposition {
            dims: self.dims.clone(),
            operator: self.operator.clone(),
            bases: self.bases.clone(),
            inverse_transforms: self.inverse_transforms.clone(),
            base_coefficients: self.base_coefficients.clone(),
            setting_cache: RwLock::new(cache),
        }
    }
}

/// Expands B_k in the tau basis: B_0 = d tau_0 and
/// B_k = a_k d (tau_k - tau_0) for k >= 1.
fn basis_to_states(pb: &PartyBasis) -> RealMatrix {
    let d = pb.dim();
    let n = d * d;
    let mut s = RealMatrix::zeros(n, n);
    s[(0, 0)] = d as f64;
    for k in 1..n {
        let a = pb.basis.shift(k);
        s[(k, k)] = a * d as f64;
        s[(k, 0)] = -a * d as f64;
    }
    s
}

impl LocalDecomposition {
    /// Decomposes a Hermitian observable over the trusted local state sets.
    ///
    /// Base coefficients come from two routes: the operator-basis expansion
    /// with the positivity-shift substitution, and a direct linear solve
    /// against the Gram matrix of the product states. On disagreement beyond
    /// the reconstruction tolerance the solve wins and a diagnostic is
    /// logged.
    pub fn decompose(w: &HermitianMatrix, dims: &DimList) -> Result<Self> {
        dims.check_matches(w.dim())?;
        let bases: Vec<Arc<PartyBasis>> = dims
            .dims()
            .iter()
            .map(|&d| PartyBasis::new(d).map(Arc::new))
            .collect::<Result<_>>()?;

        // Route 1: expand in the product operator basis, then substitute.
        let side_counts: Vec<usize> = dims.dims().iter().map(|&d| d * d).collect();
        let coeff_count: usize = side_counts.iter().product();
        let mut gamma = vec![0.0f64; coeff_count];
        for (flat, g) in gamma.iter_mut().enumerate() {
            let idx = unflatten_index(flat, &side_counts);
            let factors: Vec<&ComplexMatrix> = idx
                .iter()
                .enumerate()
                .map(|(p, &k)| bases[p].basis.element(k).matrix())
                .collect();
            let prod = kron_list(&factors);
            let norm: f64 = idx
                .iter()
                .enumerate()
                .map(|(p, &k)| bases[p].basis.hs_norm(k))
                .product();
            *g = prod.trace_product(w.matrix()).re / norm;
        }
        // Substitute B = S tau per party: beta_l = sum_k gamma_k prod_j S_{k_j l_j}.
        let subs: Vec<RealMatrix> = bases.iter().map(|pb| basis_to_states(pb)).collect();
        let beta_subst = contract_modes(&gamma, &side_counts, &subs, false);

        // Route 2: Gram solve. The Gram of the product states factorizes per
        // party, so each party contributes one small Cholesky solve.
        let grams: Vec<_> = bases
            .iter()
            .map(|pb| cholesky(&pb.states.gram(), 0.0))
            .collect::<Result<Vec<_>>>()?;
        let mut rhs = vec![0.0f64; coeff_count];
        for (flat, r) in rhs.iter_mut().enumerate() {
            let idx = unflatten_index(flat, &side_counts);
            let factors: Vec<&ComplexMatrix> = idx
                .iter()
                .enumerate()
                .map(|(p, &k)| bases[p].states.state(k).matrix())
                .collect();
            *r = kron_list(&factors).trace_product(w.matrix()).re;
        }
        let beta_solve = solve_factorized_gram(&rhs, &side_counts, &grams);

        let max_dev = beta_subst
            .iter()
            .zip(beta_solve.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if max_dev > RECONSTRUCTION_TOL * w.matrix().frobenius_norm().max(1.0) {
            log::warn!(
                "shift-substitution and Gram-solve coefficients disagree by {:.3e}; using the solve",
                max_dev
            );
        }

        // Inverse state-to-state transforms: inv(T_i · S) = S^{-1} · T_i^{-1}.
        let inverse_transforms: Vec<Vec<RealMatrix>> = bases
            .iter()
            .map(|pb| {
                let s = basis_to_states(pb);
                let s_inv = crate::mat::linalg::invert(&s)?;
                Ok(pb
                    .transforms
                    .iter()
                    .map(|t| s_inv.matmul(&t.inverse))
                    .collect())
            })
            .collect::<Result<_>>()?;

        let dec = LocalDecomposition {
            dims: dims.clone(),
            operator: w.clone(),
            bases,
            inverse_transforms,
            base_coefficients: beta_solve,
            setting_cache: RwLock::new(HashMap::new()),
        };
        dec.verify_reconstruction(&dec.base_coefficients, None)?;
        Ok(dec)
    }

    pub fn dims(&self) -> &DimList {
        &self.dims
    }

    pub fn operator(&self) -> &HermitianMatrix {
        &self.operator
    }

    pub fn party_basis(&self, party: usize) -> &PartyBasis {
        &self.bases[party]
    }

    pub fn party_bases(&self) -> &[Arc<PartyBasis>] {
        &self.bases
    }

    /// Omega, the product of the party dimensions.
    pub fn omega(&self) -> f64 {
        self.dims.omega()
    }

    /// Number of coefficients per tensor (and of measurement settings).
    pub fn setting_count(&self) -> usize {
        self.dims.setting_count()
    }

    pub fn base_coefficients(&self) -> &[f64] {
        &self.base_coefficients
    }

    /// Per-party coefficient index sizes (d_j²).
    pub fn side_counts(&self) -> Vec<usize> {
        self.dims.dims().iter().map(|&d| d * d).collect()
    }

    /// Coefficients of the alternative decomposition for one setting
    /// multi-index, cached after first use.
    pub fn setting_coefficients(&self, setting: &[usize]) -> Result<Arc<Vec<f64>>> {
        let side = self.side_counts();
        if setting.len() != side.len() {
            return Err(Error::DimMismatch(format!(
                "setting {:?} has wrong arity for {} parties",
                setting,
                side.len()
            )));
        }
        for (j, (&i, &s)) in setting.iter().zip(side.iter()).enumerate() {
            if i >= s {
                return Err(Error::IndexOutOfRange(format!(
                    "setting index {} out of range {} on party {}",
                    i, s, j
                )));
            }
        }
        let flat = flatten_index(setting, &side);
        if let Some(hit) = self.setting_cache.read().expect("cache lock").get(&flat) {
            return Ok(hit.clone());
        }
        let tensor = if setting.iter().all(|&i| i == 0) {
            // Identity setting: the base decomposition itself.
            self.base_coefficients.clone()
        } else {
            let inverses: Vec<&RealMatrix> = setting
                .iter()
                .enumerate()
                .map(|(p, &i)| &self.inverse_transforms[p][i])
                .collect();
            contract_setting(&self.base_coefficients, &side, &inverses)
        };
        let arc = Arc::new(tensor);
        self.setting_cache
            .write()
            .expect("cache lock")
            .entry(flat)
            .or_insert_with(|| arc.clone());
        Ok(arc)
    }

    /// Rebuilds W from the coefficients of one setting (base when `None`)
    /// and checks the residual against the reconstruction tolerance.
    pub fn verify_reconstruction(&self, coeffs: &[f64], setting: Option<&[usize]>) -> Result<f64> {
        let side = self.side_counts();
        let total = self.dims.total();
        let mut acc = ComplexMatrix::zeros(total, total);
        for (flat, &b) in coeffs.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            let idx = unflatten_index(flat, &side);
            let factors: Vec<ComplexMatrix> = idx
                .iter()
                .enumerate()
                .map(|(p, &k)| {
                    let tau = self.bases[p].states.state(k).matrix();
                    match setting {
                        None => tau.clone(),
                        Some(s) => {
                            let u = self.bases[p].hw.unitary(s[p]);
                            u.matmul(tau).matmul(&u.adjoint())
                        }
                    }
                })
                .collect();
            let refs: Vec<&ComplexMatrix> = factors.iter().collect();
            acc.add_assign_scaled(&kron_list(&refs), Complex64::new(b, 0.0));
        }
        let resid = (&acc - self.operator.matrix()).frobenius_norm();
        let budget = RECONSTRUCTION_TOL * self.operator.matrix().frobenius_norm().max(1.0);
        if resid > budget {
            return Err(Error::InvalidArgument(format!(
                "reconstruction residual {:.3e} exceeds {:.3e}",
                resid, budget
            )));
        }
        Ok(resid)
    }

    /// MDI value: averaged contraction of the per-setting coefficients with
    /// a probability table.
    pub fn mdi_value(&self, table: &ProbabilityTable) -> Result<f64> {
        if table.dims != self.dims {
            return Err(Error::DimMismatch(format!(
                "table dims {:?} do not match decomposition dims {:?}",
                table.dims.dims(),
                self.dims.dims()
            )));
        }
        let side = self.side_counts();
        if table.outcome_sizes != side {
            return Err(Error::DimMismatch(format!(
                "table outcome sizes {:?} do not match d_j² = {:?}",
                table.outcome_sizes, side
            )));
        }
        let settings = self.setting_count();
        let mut total = 0.0;
        for i_flat in 0..settings {
            let idx = unflatten_index(i_flat, &side);
            let coeffs = self.setting_coefficients(&idx)?;
            let mut slice = 0.0;
            for k_flat in 0..settings {
                slice += coeffs[k_flat] * table.entry_flat(k_flat, i_flat);
            }
            total += slice;
        }
        Ok(total / settings as f64)
    }

    /// Per-outcome contraction slices; under a faithful exact table every
    /// slice equals the MDI value.
    pub fn mdi_value_slices(&self, table: &ProbabilityTable) -> Result<Vec<f64>> {
        let side = self.side_counts();
        let settings = self.setting_count();
        let mut out = Vec::with_capacity(settings);
        for i_flat in 0..settings {
            let idx = unflatten_index(i_flat, &side);
            let coeffs = self.setting_coefficients(&idx)?;
            let mut slice = 0.0;
            for k_flat in 0..settings {
                slice += coeffs[k_flat] * table.entry_flat(k_flat, i_flat);
            }
            out.push(slice);
        }
        Ok(out)
    }
}

/// Contracts each mode of `tensor` with a per-party matrix. With
/// `transpose_matrices` false the matrices act as new_l = sum_k M_{k l} t_k
/// per mode (row-index summed).
fn contract_modes(
    tensor: &[f64],
    side: &[usize],
    matrices: &[RealMatrix],
    transpose_matrices: bool,
) -> Vec<f64> {
    let mut current = tensor.to_vec();
    let n_modes = side.len();
    for mode in 0..n_modes {
        let m = &matrices[mode];
        let dim = side[mode];
        let stride_after: usize = side[mode + 1..].iter().product();
        let stride_before: usize = side[..mode].iter().product();
        let mut next = vec![0.0f64; current.len()];
        for b in 0..stride_before {
            for a in 0..stride_after {
                let base = b * dim * stride_after + a;
                for l in 0..dim {
                    let mut acc = 0.0;
                    for k in 0..dim {
                        let coeff = if transpose_matrices { m[(l, k)] } else { m[(k, l)] };
                        acc += coeff * current[base + k * stride_after];
                    }
                    next[base + l * stride_after] = acc;
                }
            }
        }
        current = next;
    }
    current
}

/// Per-setting coefficients: beta^i_l = sum_k prod_j (T_{i_j}^{-1})_{k_j l_j} beta_k.
fn contract_setting(base: &[f64], side: &[usize], inverses: &[&RealMatrix]) -> Vec<f64> {
    let mats: Vec<RealMatrix> = inverses.iter().map(|m| (*m).clone()).collect();
    contract_modes(base, side, &mats, false)
}

/// Solves the factorized Gram system: beta = (⊗_j G_j)^{-1} rhs.
fn solve_factorized_gram(
    rhs: &[f64],
    side: &[usize],
    grams: &[crate::mat::linalg::CholeskyFactor],
) -> Vec<f64> {
    // Mode-wise application of each G_j^{-1}.
    let mut current = rhs.to_vec();
    for (mode, g) in grams.iter().enumerate() {
        let dim = side[mode];
        let stride_after: usize = side[mode + 1..].iter().product();
        let stride_before: usize = side[..mode].iter().product();
        let mut next = vec![0.0f64; current.len()];
        let mut fiber = vec![0.0f64; dim];
        for b in 0..stride_before {
            for a in 0..stride_after {
                let base = b * dim * stride_after + a;
                for (k, f) in fiber.iter_mut().enumerate() {
                    *f = current[base + k * stride_after];
                }
                let solved = g.solve(&fiber);
                for (k, v) in solved.iter().enumerate() {
                    next[base + k * stride_after] = *v;
                }
            }
        }
        current = next;
    }
    current
}

/// Conditional probability table P(outcome | input) over multi-indices.
/// Rows are input settings k, columns outcome tuples i, both flattened
/// row-major with party 0 most significant.
#[derive(Clone, Debug)]
pub struct ProbabilityTable {
    dims: DimList,
    outcome_sizes: Vec<usize>,
    /// entries[k_flat * n_outcomes + i_flat]
    entries: Vec<f64>,
}

pub const TABLE_ENTRY_TOL: f64 = 1e-12;
pub const TABLE_ROW_TOL: f64 = 1e-9;

impl ProbabilityTable {
    pub fn new(dims: DimList, outcome_sizes: Vec<usize>, entries: Vec<f64>) -> Result<Self> {
        let inputs: usize = dims.setting_count();
        let outcomes: usize = outcome_sizes.iter().product();
        if entries.len() != inputs * outcomes {
            return Err(Error::InvalidTable(format!(
                "{} entries for {} inputs x {} outcomes",
                entries.len(),
                inputs,
                outcomes
            )));
        }
        for (pos, &p) in entries.iter().enumerate() {
            if !(-TABLE_ENTRY_TOL..=1.0 + TABLE_ENTRY_TOL).contains(&p) {
                return Err(Error::InvalidTable(format!(
                    "entry {} at position {} outside [0, 1]",
                    p, pos
                )));
            }
        }
        for k in 0..inputs {
            let row_sum: f64 = entries[k * outcomes..(k + 1) * outcomes].iter().sum();
            if (row_sum - 1.0).abs() > TABLE_ROW_TOL {
                return Err(Error::InvalidTable(format!(
                    "row {} sums to {}",
                    k, row_sum
                )));
            }
        }
        Ok(ProbabilityTable {
            dims,
            outcome_sizes,
            entries,
        })
    }

    /// The uniform table 1 / (number of outcomes).
    pub fn uniform(dims: DimList) -> Self {
        let outcome_sizes: Vec<usize> = dims.dims().iter().map(|&d| d * d).collect();
        let outcomes: usize = outcome_sizes.iter().product();
        let inputs = dims.setting_count();
        ProbabilityTable {
            dims,
            outcome_sizes,
            entries: vec![1.0 / outcomes as f64; inputs * outcomes],
        }
    }

    pub fn dims(&self) -> &DimList {
        &self.dims
    }

    pub fn outcome_sizes(&self) -> &[usize] {
        &self.outcome_sizes
    }

    pub fn input_count(&self) -> usize {
        self.dims.setting_count()
    }

    pub fn outcome_count(&self) -> usize {
        self.outcome_sizes.iter().product()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn entry_flat(&self, k_flat: usize, i_flat: usize) -> f64 {
        self.entries[k_flat * self.outcome_count() + i_flat]
    }

    pub fn entry(&self, inputs: &[usize], outcomes: &[usize]) -> f64 {
        let side = self.dims.dims().iter().map(|&d| d * d).collect::<Vec<_>>();
        let k = flatten_index(inputs, &side);
        let i = flatten_index(outcomes, &self.outcome_sizes);
        self.entry_flat(k, i)
    }

    /// Row view for one input setting.
    pub fn row(&self, k_flat: usize) -> &[f64] {
        let n = self.outcome_count();
        &self.entries[k_flat * n..(k_flat + 1) * n]
    }

    /// Product table of two runs on independent copies: inputs and outcomes
    /// concatenate, probabilities multiply.
    pub fn product(&self, other: &ProbabilityTable) -> Result<ProbabilityTable> {
        let mut dims = self.dims.dims().to_vec();
        dims.extend_from_slice(other.dims.dims());
        let dims = DimList::new(dims)?;
        let mut outcome_sizes = self.outcome_sizes.clone();
        outcome_sizes.extend_from_slice(&other.outcome_sizes);
        let (ni1, no1) = (self.input_count(), self.outcome_count());
        let (ni2, no2) = (other.input_count(), other.outcome_count());
        let mut entries = vec![0.0f64; ni1 * ni2 * no1 * no2];
        for k1 in 0..ni1 {
            for k2 in 0..ni2 {
                let k = k1 * ni2 + k2;
                for i1 in 0..no1 {
                    let p1 = self.entry_flat(k1, i1);
                    for i2 in 0..no2 {
                        entries[k * no1 * no2 + i1 * no2 + i2] = p1 * other.entry_flat(k2, i2);
                    }
                }
            }
        }
        ProbabilityTable::new(dims, outcome_sizes, entries)
    }

    /// CSV serialization with header k1..kn,i1..in,p.
    pub fn to_csv(&self) -> String {
        let n = self.dims.len();
        let side: Vec<usize> = self.dims.dims().iter().map(|&d| d * d).collect();
        let mut out = String::new();
        for j in 1..=n {
            out.push_str(&format!("k{},", j));
        }
        for j in 1..=n {
            out.push_str(&format!("i{},", j));
        }
        out.push_str("p\n");
        for k in 0..self.input_count() {
            let k_idx = unflatten_index(k, &side);
            for i in 0..self.outcome_count() {
                let i_idx = unflatten_index(i, &self.outcome_sizes);
                for v in &k_idx {
                    out.push_str(&format!("{},", v));
                }
                for v in &i_idx {
                    out.push_str(&format!("{},", v));
                }
                out.push_str(&format!("{:.16e}\n", self.entry_flat(k, i)));
            }
        }
        out
    }
}

/// Named combiner presets for composite MDI functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combiner {
    /// f(x) = x_0.
    Linear,
    /// f(x) = x_0 - sum over subsequent (H, J) pairs of (x_{2m+1}² + x_{2m+2}²).
    NonlinearSumOfSquares,
    /// f(x) = prod_m x_m.
    MulticopyProduct,
}

impl Combiner {
    pub fn apply(&self, args: &[f64]) -> f64 {
        match self {
            Combiner::Linear => args[0],
            Combiner::NonlinearSumOfSquares => {
                let mut acc = args[0];
                for pair in args[1..].chunks(2) {
                    let h = pair[0];
                    let j = pair.get(1).copied().unwrap_or(0.0);
                    acc -= h * h + j * j;
                }
                acc
            }
            Combiner::MulticopyProduct => args.iter().product(),
        }
    }
}

/// Composite MDI function: applies the combiner to Omega^{N_m} * I_m and
/// reports the accept verdict (accept when the value is negative).
pub fn mdi_composite(
    values: &[f64],
    copy_counts: &[usize],
    omega: f64,
    combiner: impl Fn(&[f64]) -> f64,
) -> (f64, bool) {
    assert_eq!(values.len(), copy_counts.len());
    let scaled: Vec<f64> = values
        .iter()
        .zip(copy_counts.iter())
        .map(|(v, &n)| omega.powi(n as i32) * v)
        .collect();
    let c = combiner(&scaled);
    (c, c < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::kron;
    use crate::quantum::max_entangled;

    fn bell_overlap_witness() -> HermitianMatrix {
        // I/2 - Phi+ on two qubits.
        let mut m = ComplexMatrix::identity(4).scale_re(0.5);
        m.add_assign_scaled(max_entangled(2).matrix(), Complex64::new(-1.0, 0.0));
        HermitianMatrix::new_unchecked(m)
    }

    #[test]
    fn identity_decomposes_onto_tau0() {
        let dims = DimList::pair(2, 2);
        let w = HermitianMatrix::identity(4);
        let dec = LocalDecomposition::decompose(&w, &dims).unwrap();
        let beta = dec.base_coefficients();
        assert!((beta[0] - 4.0).abs() < 1e-10);
        for &b in &beta[1..] {
            assert!(b.abs() < 1e-10);
        }
    }

    #[test]
    fn gell_mann_coefficients_of_bell_witness() {
        // Direct oracle tr(w (B_a ⊗ B_b)) / 4 before the shift substitution.
        let w = bell_overlap_witness();
        let pb = crate::bases::PartyBasis::new(2).unwrap();
        let coeff = |a: usize, b: usize| {
            kron(pb.basis.element(a).matrix(), pb.basis.element(b).matrix())
                .trace_product(w.matrix())
                .re
                / 4.0
        };
        assert!((coeff(0, 0) - 0.25).abs() < 1e-12);
        // Basis order: 1 = Z, 2 = X, 3 = Y.
        assert!((coeff(2, 2) + 0.25).abs() < 1e-12);
        assert!((coeff(3, 3) - 0.25).abs() < 1e-12);
        assert!((coeff(1, 1) + 0.25).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_on_3x3() {
        let dims = DimList::pair(3, 3);
        let w = HermitianMatrix::new_unchecked(
            crate::quantum::random_ginibre(9, 9, &mut crate::rng::rng_from_seed(2)),
        );
        let dec = LocalDecomposition::decompose(&w, &dims).unwrap();
        assert_eq!(dec.base_coefficients().len(), 81);
        let resid = dec.verify_reconstruction(dec.base_coefficients(), None).unwrap();
        assert!(resid <= 1e-9 * w.matrix().frobenius_norm().max(1.0));
    }

    #[test]
    fn setting_zero_equals_base() {
        let dims = DimList::pair(2, 2);
        let dec = LocalDecomposition::decompose(&bell_overlap_witness(), &dims).unwrap();
        let c = dec.setting_coefficients(&[0, 0]).unwrap();
        for (a, b) in c.iter().zip(dec.base_coefficients().iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn per_setting_reconstruction() {
        let dims = DimList::pair(2, 2);
        let dec = LocalDecomposition::decompose(&bell_overlap_witness(), &dims).unwrap();
        for i1 in 0..4 {
            for i2 in 0..4 {
                let c = dec.setting_coefficients(&[i1, i2]).unwrap();
                let resid = dec.verify_reconstruction(&c, Some(&[i1, i2])).unwrap();
                assert!(resid < 1e-10, "setting ({}, {})", i1, i2);
            }
        }

        let dims3 = DimList::pair(3, 3);
        let w3 = HermitianMatrix::new_unchecked(
            crate::quantum::random_ginibre(9, 9, &mut crate::rng::rng_from_seed(8)),
        );
        let dec3 = LocalDecomposition::decompose(&w3, &dims3).unwrap();
        let c = dec3.setting_coefficients(&[4, 7]).unwrap();
        let resid = dec3.verify_reconstruction(&c, Some(&[4, 7])).unwrap();
        assert!(resid <= 1e-9 * w3.matrix().frobenius_norm().max(1.0));
    }

    #[test]
    fn uniform_table_contraction() {
        let dims = DimList::pair(2, 2);
        let dec = LocalDecomposition::decompose(&bell_overlap_witness(), &dims).unwrap();
        let table = ProbabilityTable::uniform(dims);
        let v = dec.mdi_value(&table).unwrap();
        // tr(W)/16 with tr(W) = 1.
        assert!((v - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn zero_witness_gives_zero() {
        let dims = DimList::pair(2, 2);
        let dec = LocalDecomposition::decompose(&HermitianMatrix::zeros(4), &dims).unwrap();
        let table = ProbabilityTable::uniform(dims);
        assert!(dec.mdi_value(&table).unwrap().abs() < 1e-15);
    }

    #[test]
    fn table_validation() {
        let dims = DimList::pair(2, 2);
        let bad = vec![0.5; 16 * 16];
        assert!(ProbabilityTable::new(dims.clone(), vec![4, 4], bad).is_err());
        let uniform = ProbabilityTable::uniform(dims);
        assert!((uniform.row(3).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn composite_sign_convention() {
        let (c, accept) = mdi_composite(&[-0.125], &[1], 4.0, |x| x[0]);
        assert!((c + 0.5).abs() < 1e-12);
        assert!(accept);
        let (c0, accept0) = mdi_composite(&[0.0, 0.0], &[1, 1], 4.0, |x| x[0] + x[1]);
        assert_eq!(c0, 0.0);
        assert!(!accept0);
    }

    #[test]
    fn mdi_value_linear_in_table() {
        let dims = DimList::pair(2, 2);
        let dec = LocalDecomposition::decompose(&bell_overlap_witness(), &dims).unwrap();
        let t1 = ProbabilityTable::uniform(dims.clone());
        // Mix uniform with a deterministic table; the value must interpolate.
        let mut entries = vec![0.0; 16 * 16];
        for k in 0..16 {
            entries[k * 16 + (k % 16)] = 1.0;
        }
        let t2 = ProbabilityTable::new(dims.clone(), vec![4, 4], entries).unwrap();
        let lam = 0.3;
        let mixed: Vec<f64> = t1
            .entries()
            .iter()
            .zip(t2.entries().iter())
            .map(|(a, b)| lam * a + (1.0 - lam) * b)
            .collect();
        let tm = ProbabilityTable::new(dims, vec![4, 4], mixed).unwrap();
        let v1 = dec.mdi_value(&t1).unwrap();
        let v2 = dec.mdi_value(&t2).unwrap();
        let vm = dec.mdi_value(&tm).unwrap();
        assert!((vm - (lam * v1 + (1.0 - lam) * v2)).abs() < 1e-12);
    }
}
