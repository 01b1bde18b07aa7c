//! Linear, nonlinear and multicopy MDI witnesses, and the witness-based
//! entanglement lower bounds.

use crate::decomp::{LocalDecomposition, ProbabilityTable};
use crate::error::{Error, Result};
use crate::game::{run_protocol_with, EveStrategy};
use crate::mat::{
    partial_transpose, permutation_operator, ComplexMatrix, DimList, HermitianMatrix,
};
use crate::par::Parallelism;
use crate::quantum::DensityMatrix;
use crate::sdp::{legendre_hat, SolveOptions};
use num_complex::Complex64;
use std::sync::Arc;

/// Hermitian observable together with its per-copy party dimensions and the
/// number of identical state copies it acts on.
#[derive(Clone, Debug)]
pub struct Witness {
    operator: HermitianMatrix,
    dims: DimList,
    copies: usize,
}

impl Witness {
    pub fn new(operator: HermitianMatrix, dims: DimList, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidArgument("copy count must be >= 1".into()));
        }
        let expected: usize = dims.total().pow(copies as u32);
        if operator.dim() != expected {
            return Err(Error::DimMismatch(format!(
                "operator dimension {} does not match {} copies of {:?}",
                operator.dim(),
                copies,
                dims.dims()
            )));
        }
        Ok(Witness {
            operator,
            dims,
            copies,
        })
    }

    pub fn operator(&self) -> &HermitianMatrix {
        &self.operator
    }

    pub fn dims(&self) -> &DimList {
        &self.dims
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    /// Party dimensions of the full multicopy operator.
    pub fn full_dims(&self) -> DimList {
        self.dims.repeat(self.copies)
    }

    /// Largest and smallest eigenvalues.
    pub fn spectral_range(&self) -> (f64, f64) {
        let vals = self.operator.eigenvalues();
        (vals[vals.len() - 1], vals[0])
    }
}

/// The overlap witness I/d - Phi+ on d ⊗ d: nonnegative on separable states,
/// negative on states with maximally-entangled fidelity above 1/d.
pub fn bell_overlap_witness(d: usize) -> Witness {
    let n = d * d;
    let mut m = ComplexMatrix::identity(n).scale_re(1.0 / d as f64);
    m.add_assign_scaled(
        crate::quantum::max_entangled(d).matrix(),
        Complex64::new(-1.0, 0.0),
    );
    Witness::new(
        HermitianMatrix::new_unchecked(m),
        DimList::pair(d, d),
        1,
    )
    .expect("overlap witness dims consistent")
}

/// Linear MDI witness value C = Omega * I(rho); equal to tr(W rho) under a
/// faithful strategy and nonnegative on separable states for every allowed
/// strategy.
pub fn linear_mdi(
    witness: &Witness,
    rho: &DensityMatrix,
    strategy: &EveStrategy,
    mode: Parallelism,
) -> Result<f64> {
    if witness.copies() != 1 {
        return Err(Error::InvalidArgument(
            "linear evaluation takes a single-copy witness".into(),
        ));
    }
    if rho.dims() != witness.dims() {
        return Err(Error::DimMismatch(format!(
            "state dims {:?} vs witness dims {:?}",
            rho.dims().dims(),
            witness.dims().dims()
        )));
    }
    let dec = LocalDecomposition::decompose(witness.operator(), witness.dims())?;
    let inputs = dec.party_bases().to_vec();
    let table = run_protocol_with(rho, &inputs, strategy, mode)?;
    Ok(dec.omega() * dec.mdi_value(&table)?)
}

/// Nonlinear correction data: the base witness plus the Hermitian pairs
/// (H_k, J_k) splitting the correction operators X_k = H_k + i J_k.
#[derive(Clone, Debug)]
pub struct NonlinearWitnessSpec {
    pub base: Witness,
    pub pairs: Vec<(HermitianMatrix, HermitianMatrix)>,
}

/// Splits arbitrary square correction operators into Hermitian pairs:
/// H = (X + X†)/2, J = (X - X†)/(2i).
pub fn build_nonlinear(correction_ops: &[ComplexMatrix], base: Witness) -> Result<NonlinearWitnessSpec> {
    let n = base.operator().dim();
    let mut pairs = Vec::with_capacity(correction_ops.len());
    for x in correction_ops {
        if x.rows() != n || x.cols() != n {
            return Err(Error::DimMismatch(format!(
                "correction operator is {}x{}, witness dimension is {}",
                x.rows(),
                x.cols(),
                n
            )));
        }
        let h = x.symmetrize();
        // (X - X†)/(2i) = -i (X - X†)/2.
        let anti = (x - &x.adjoint()).scale(Complex64::new(0.0, -0.5));
        pairs.push((
            HermitianMatrix::new_unchecked(h),
            HermitianMatrix::new_unchecked(anti),
        ));
    }
    Ok(NonlinearWitnessSpec { base, pairs })
}

/// The transposition-map nonlinear witness on d ⊗ d: base operator
/// phi^Gamma for phi the singlet-like projector, corrections
/// (|phi><psi_k|)^Gamma over the computational product basis. The trusted
/// value is <phi| rho^Gamma (1 - rho^Gamma) |phi>, strictly stronger than
/// the linear witness alone.
pub fn transpose_map_nonlinear(d: usize) -> Result<NonlinearWitnessSpec> {
    let dims = DimList::pair(d, d);
    let phi = singlet_like_ket(d);
    let w_mat = partial_transpose(&ComplexMatrix::outer(&phi), &dims, 0)?;
    let base = Witness::new(HermitianMatrix::new_unchecked(w_mat), dims.clone(), 1)?;
    let n = d * d;
    let mut corrections = Vec::with_capacity(n);
    for k in 0..n {
        let mut psi = vec![crate::mat::C_ZERO; n];
        psi[k] = crate::mat::C_ONE;
        let x = partial_transpose(&ComplexMatrix::ket_bra(&phi, &psi), &dims, 0)?;
        corrections.push(x);
    }
    build_nonlinear(&corrections, base)
}

fn singlet_like_ket(d: usize) -> Vec<Complex64> {
    // (|01> - |10>)/sqrt(2) embedded in d ⊗ d.
    let mut v = vec![crate::mat::C_ZERO; d * d];
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    v[1] = Complex64::new(amp, 0.0);
    v[d] = Complex64::new(-amp, 0.0);
    v
}

/// Trusted-device value of the nonlinear witness:
/// C(rho) = <W> - sum_k (<H_k>² + <J_k>²).
pub fn nonlinear_trusted_value(spec: &NonlinearWitnessSpec, rho: &DensityMatrix) -> f64 {
    let mut c = rho.expectation(spec.base.operator());
    for (h, j) in &spec.pairs {
        let eh = rho.expectation(h);
        let ej = rho.expectation(j);
        c -= eh * eh + ej * ej;
    }
    c
}

/// Nonlinear MDI value from one probability table:
/// C = Omega I_W - Omega² sum_k (I_{H_k}² + I_{J_k}²).
pub fn nonlinear_mdi(
    spec: &NonlinearWitnessSpec,
    rho: &DensityMatrix,
    strategy: &EveStrategy,
    mode: Parallelism,
) -> Result<f64> {
    let dims = spec.base.dims().clone();
    if rho.dims() != &dims {
        return Err(Error::DimMismatch("state dims do not match the witness".into()));
    }
    let dec_w = LocalDecomposition::decompose(spec.base.operator(), &dims)?;
    let inputs = dec_w.party_bases().to_vec();
    let table = run_protocol_with(rho, &inputs, strategy, mode)?;
    nonlinear_mdi_from_table(spec, &dec_w, &table)
}

/// As [`nonlinear_mdi`] with a precomputed base decomposition and table.
pub fn nonlinear_mdi_from_table(
    spec: &NonlinearWitnessSpec,
    dec_w: &LocalDecomposition,
    table: &ProbabilityTable,
) -> Result<f64> {
    let dims = spec.base.dims().clone();
    let omega = dims.omega();
    let mut c = omega * dec_w.mdi_value(table)?;
    for (h, j) in &spec.pairs {
        let dec_h = LocalDecomposition::decompose(h, &dims)?;
        let dec_j = LocalDecomposition::decompose(j, &dims)?;
        let vh = omega * dec_h.mdi_value(table)?;
        let vj = omega * dec_j.mdi_value(table)?;
        c -= vh * vh + vj * vj;
    }
    Ok(c)
}

/// Fully decomposed nonlinear witness, reusable across many tables.
pub struct NonlinearDecomposed {
    pub spec: NonlinearWitnessSpec,
    pub dec_w: LocalDecomposition,
    pub dec_pairs: Vec<(LocalDecomposition, LocalDecomposition)>,
}

impl NonlinearDecomposed {
    pub fn new(spec: NonlinearWitnessSpec) -> Result<Self> {
        let dims = spec.base.dims().clone();
        let dec_w = LocalDecomposition::decompose(spec.base.operator(), &dims)?;
        let dec_pairs = spec
            .pairs
            .iter()
            .map(|(h, j)| {
                Ok((
                    LocalDecomposition::decompose(h, &dims)?,
                    LocalDecomposition::decompose(j, &dims)?,
                ))
            })
            .collect::<Result<_>>()?;
        Ok(NonlinearDecomposed {
            spec,
            dec_w,
            dec_pairs,
        })
    }

    pub fn inputs(&self) -> Vec<Arc<crate::bases::PartyBasis>> {
        self.dec_w.party_bases().to_vec()
    }

    pub fn evaluate_table(&self, table: &ProbabilityTable) -> Result<f64> {
        let omega = self.spec.base.dims().omega();
        let mut c = omega * self.dec_w.mdi_value(table)?;
        for (dec_h, dec_j) in &self.dec_pairs {
            let vh = omega * dec_h.mdi_value(table)?;
            let vj = omega * dec_j.mdi_value(table)?;
            c -= vh * vh + vj * vj;
        }
        Ok(c)
    }
}

/// Two-copy purity witness S^A ⊗ I^B - S^{AB} on (A1 B1 A2 B2):
/// tr(W (rho ⊗ rho)) = tr(rho_A²) - tr(rho²), nonnegative on separable
/// states by the majorization criterion.
pub fn swap_witness(d_a: usize, d_b: usize) -> Witness {
    let dims = DimList::new(vec![d_a, d_b, d_a, d_b]).expect("valid dims");
    // Swap the two A copies (parties 0 and 2).
    let swap_a = permutation_operator(&dims, &[2, 1, 0, 3]).expect("swap A");
    // Swap both copies wholesale: (A1, B1) <-> (A2, B2).
    let swap_ab = permutation_operator(&dims, &[2, 3, 0, 1]).expect("swap AB");
    let w = &swap_a - &swap_ab;
    Witness::new(
        HermitianMatrix::new_unchecked(w),
        DimList::pair(d_a, d_b),
        2,
    )
    .expect("two-copy dims consistent")
}

/// Multicopy MDI value: builds per-copy tables under independent
/// strategies, forms the product table by the factorization identity, and
/// contracts it against the multicopy decomposition. Returns
/// C = Omega^N * I.
pub fn multicopy_mdi(
    witness: &Witness,
    rho: &DensityMatrix,
    strategies: &[EveStrategy],
    mode: Parallelism,
) -> Result<f64> {
    multicopy_mdi_with_decomposition(
        &LocalDecomposition::decompose(witness.operator(), &witness.full_dims())?,
        witness,
        rho,
        strategies,
        mode,
    )
}

/// As [`multicopy_mdi`] with a reusable decomposition of the full operator.
pub fn multicopy_mdi_with_decomposition(
    dec: &LocalDecomposition,
    witness: &Witness,
    rho: &DensityMatrix,
    strategies: &[EveStrategy],
    mode: Parallelism,
) -> Result<f64> {
    if strategies.len() != witness.copies() {
        return Err(Error::InvalidArgument(format!(
            "{} strategies for {} copies",
            strategies.len(),
            witness.copies()
        )));
    }
    if rho.dims() != witness.dims() {
        return Err(Error::DimMismatch("state dims do not match the witness".into()));
    }
    let per_copy_inputs: Vec<Arc<crate::bases::PartyBasis>> = dec.party_bases()
        [..witness.dims().len()]
        .to_vec();
    let mut product: Option<ProbabilityTable> = None;
    for strategy in strategies {
        let table = run_protocol_with(rho, &per_copy_inputs, strategy, mode)?;
        product = Some(match product {
            None => table,
            Some(acc) => acc.product(&table)?,
        });
    }
    let table = product.expect("at least one copy");
    let omega_n = witness.dims().omega().powi(witness.copies() as i32);
    Ok(omega_n * dec.mdi_value(&table)?)
}

/// Trace-distance style lower bound: max(0, -value / (lambda+ - lambda-)).
pub fn bound_ftr(witness: &Witness, value: f64) -> Result<f64> {
    let (hi, lo) = witness.spectral_range();
    let gap = hi - lo;
    if gap < 1e-12 {
        return Err(Error::InvalidArgument(
            "degenerate witness: spectral range collapses".into(),
        ));
    }
    Ok((-value / gap).max(0.0))
}

/// Step bound from a separating witness at level m: m when the value is
/// negative, 0 otherwise.
pub fn bound_fm(value: f64, m: f64) -> f64 {
    if value < 0.0 {
        m
    } else {
        0.0
    }
}

/// Legendre-transform lower bound on negativity: the best
/// alpha * value - mu_hat(alpha W) over a symmetric geometric grid with one
/// round of factor-2 refinement around the grid argmax. Every alpha yields a
/// valid bound, so any grid is sound; the refined grid tightens it.
pub fn bound_fopt(
    witness: &Witness,
    value: f64,
    opts: &SolveOptions,
) -> Result<f64> {
    let dims = witness.dims().clone();
    let mut grid: Vec<f64> = Vec::new();
    for t in -6..=6 {
        let a = 2f64.powi(t);
        grid.push(a);
        grid.push(-a);
    }
    let eval = |alpha: f64| -> Result<f64> {
        Ok(alpha * value - legendre_hat(witness.operator(), &dims, alpha, opts)?)
    };
    let mut best = 0.0f64; // alpha = 0 gives the trivial bound 0
    let mut best_alpha = 0.0f64;
    for &a in &grid {
        let v = eval(a)?;
        if v > best {
            best = v;
            best_alpha = a;
        }
    }
    if best_alpha != 0.0 {
        // Three rounds of factor-2 bisection around the argmax.
        let mut lo = best_alpha / 2.0;
        let mut hi = best_alpha * 2.0;
        for _ in 0..3 {
            let mid_lo = (lo + best_alpha) / 2.0;
            let mid_hi = (best_alpha + hi) / 2.0;
            let v_lo = eval(mid_lo)?;
            let v_hi = eval(mid_hi)?;
            if v_lo > best && v_lo >= v_hi {
                hi = best_alpha;
                best_alpha = mid_lo;
                best = v_lo;
            } else if v_hi > best {
                lo = best_alpha;
                best_alpha = mid_hi;
                best = v_hi;
            } else {
                lo = mid_lo;
                hi = mid_hi;
            }
        }
    }
    Ok(best.max(0.0))
}
