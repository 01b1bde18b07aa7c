//! Operator bases, trusted local states, Heisenberg-Weyl unitaries,
//! generalized Bell projectors, and per-setting transform matrices.
//!
//! Conventions, shared crate-wide:
//! - Gell-Mann ordering: element 0 is the identity; elements 1..d-1 are the
//!   diagonal matrices (lambda = 0..d-2); then the symmetric off-diagonal
//!   matrices in lexicographic (mu, nu) order; then the antisymmetric ones.
//! - Heisenberg-Weyl unitaries are indexed i = n*d + m.
//! - A Bell projector acts on a doubled space ordered (ancilla, state); the
//!   unitary sits on the second (state) factor.
//! - The transform `T_i` expands conjugated states in the operator basis:
//!   U_i tau_k U_i† = sum_k' (T_i)_{k k'} B_{k'}. Projections use the
//!   per-element Hilbert-Schmidt normalization tr(B_k²), which is d for the
//!   identity element and 2 for every traceless element.

use crate::error::{Error, Result};
use crate::mat::linalg::{invert, RealMatrix};
use crate::mat::{kron, ComplexMatrix, HermitianMatrix, C_ONE, C_ZERO};
use num_complex::Complex64;

/// Hermitian operator basis with identity first and the minimal positivity
/// shifts a_k (the smallest a with B_k + a_k B_0 positive semi-definite).
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<HermitianMatrix>,
    shifts: Vec<f64>,
}

impl OperatorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, k: usize) -> &HermitianMatrix {
        &self.elements[k]
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    pub fn shift(&self, k: usize) -> f64 {
        self.shifts[k]
    }

    /// tr(B_k²): d for the identity element, 2 for the traceless ones.
    pub fn hs_norm(&self, k: usize) -> f64 {
        if k == 0 {
            self.dim as f64
        } else {
            2.0
        }
    }
}

/// Generalized Gell-Mann basis of dimension d.
pub fn gell_mann_basis(d: usize) -> Result<OperatorBasis> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "operator basis needs dimension >= 2, got {}",
            d
        )));
    }
    let mut elements = Vec::with_capacity(d * d);
    let mut shifts = Vec::with_capacity(d * d);

    elements.push(HermitianMatrix::identity(d));
    shifts.push(0.0);

    // Diagonal matrices, lambda = 0..d-2.
    for lambda in 0..d - 1 {
        let norm = (2.0 / ((lambda + 1) as f64 * (lambda + 2) as f64)).sqrt();
        let mut m = ComplexMatrix::zeros(d, d);
        for j in 0..=lambda {
            m[(j, j)] = Complex64::new(norm, 0.0);
        }
        m[(lambda + 1, lambda + 1)] = Complex64::new(-norm * (lambda + 1) as f64, 0.0);
        elements.push(HermitianMatrix::new_unchecked(m));
        let k = lambda + 1;
        shifts.push((2.0 * k as f64 / (k as f64 + 1.0)).sqrt());
    }

    // Symmetric off-diagonal, lexicographic (mu, nu).
    for mu in 0..d {
        for nu in mu + 1..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(mu, nu)] = C_ONE;
            m[(nu, mu)] = C_ONE;
            elements.push(HermitianMatrix::new_unchecked(m));
            shifts.push(1.0);
        }
    }

    // Antisymmetric off-diagonal, lexicographic (mu, nu).
    for mu in 0..d {
        for nu in mu + 1..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(mu, nu)] = Complex64::new(0.0, -1.0);
            m[(nu, mu)] = Complex64::new(0.0, 1.0);
            elements.push(HermitianMatrix::new_unchecked(m));
            shifts.push(1.0);
        }
    }

    Ok(OperatorBasis {
        dim: d,
        elements,
        shifts,
    })
}

/// Trusted local input states tau_k associated with an operator basis:
/// tau_0 = B_0/d and tau_k = (B_0 + B_k/a_k)/d for k >= 1. The set spans the
/// operator space and every member is a density matrix.
#[derive(Clone, Debug)]
pub struct LocalStateSet {
    dim: usize,
    states: Vec<HermitianMatrix>,
}

impl LocalStateSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, k: usize) -> &HermitianMatrix {
        &self.states[k]
    }

    pub fn states(&self) -> &[HermitianMatrix] {
        &self.states
    }

    /// Gram matrix of Hilbert-Schmidt inner products tr(tau_j tau_k).
    pub fn gram(&self) -> RealMatrix {
        let n = self.len();
        let mut g = RealMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                g[(j, k)] = self.states[j]
                    .matrix()
                    .trace_product(self.states[k].matrix())
                    .re;
            }
        }
        g
    }
}

pub fn local_states(basis: &OperatorBasis) -> Result<LocalStateSet> {
    let d = basis.dim() as f64;
    let mut states = Vec::with_capacity(basis.len());
    for k in 0..basis.len() {
        let m = if k == 0 {
            basis.element(0).matrix().scale_re(1.0 / d)
        } else {
            let a = basis.shift(k);
            if a <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "zero positivity shift for basis element {}",
                    k
                )));
            }
            let mut m = basis.element(0).matrix().clone();
            m.add_assign_scaled(basis.element(k).matrix(), Complex64::new(1.0 / a, 0.0));
            m.scale_re(1.0 / d)
        };
        states.push(HermitianMatrix::new_unchecked(m));
    }
    Ok(LocalStateSet {
        dim: basis.dim(),
        states,
    })
}

/// Heisenberg-Weyl unitaries U_{nm} = sum_k exp(2 pi i k n / d) |k><(k+m) mod d|,
/// flattened as i = n*d + m.
#[derive(Clone, Debug)]
pub struct HeisenbergWeylSet {
    dim: usize,
    unitaries: Vec<ComplexMatrix>,
}

impl HeisenbergWeylSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn unitary(&self, i: usize) -> &ComplexMatrix {
        &self.unitaries[i]
    }
}

pub fn heisenberg_weyl(d: usize) -> Result<HeisenbergWeylSet> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "Heisenberg-Weyl set needs dimension >= 2, got {}",
            d
        )));
    }
    let mut unitaries = Vec::with_capacity(d * d);
    for n in 0..d {
        for m in 0..d {
            let mut u = ComplexMatrix::zeros(d, d);
            for k in 0..d {
                let phase = 2.0 * std::f64::consts::PI * (k * n) as f64 / d as f64;
                u[(k, (k + m) % d)] = Complex64::new(phase.cos(), phase.sin());
            }
            unitaries.push(u);
        }
    }
    Ok(HeisenbergWeylSet { dim: d, unitaries })
}

/// Rank-1 projectors onto the generalized Bell states (I ⊗ U_i)|Phi+> on the
/// doubled space; the unitary acts on the second factor.
#[derive(Clone, Debug)]
pub struct BellProjectorSet {
    dim: usize,
    projectors: Vec<HermitianMatrix>,
}

impl BellProjectorSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projector(&self, i: usize) -> &HermitianMatrix {
        &self.projectors[i]
    }

    pub fn projectors(&self) -> &[HermitianMatrix] {
        &self.projectors
    }
}

/// The maximally entangled ket on d ⊗ d.
pub fn phi_plus_ket(d: usize) -> Vec<Complex64> {
    let mut v = vec![C_ZERO; d * d];
    let amp = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        v[j * d + j] = Complex64::new(amp, 0.0);
    }
    v
}

pub fn bell_projectors(hw: &HeisenbergWeylSet) -> BellProjectorSet {
    let d = hw.dim();
    let phi = phi_plus_ket(d);
    let eye = ComplexMatrix::identity(d);
    let mut projectors = Vec::with_capacity(hw.len());
    for i in 0..hw.len() {
        let iu = kron(&eye, hw.unitary(i));
        let ket = iu.matvec(&phi);
        projectors.push(HermitianMatrix::new_unchecked(ComplexMatrix::outer(&ket)));
    }
    BellProjectorSet { dim: d, projectors }
}

/// Transform matrix for one measurement setting: row k expands
/// U_i tau_k U_i† in the operator basis.
#[derive(Clone, Debug)]
pub struct SettingTransform {
    pub dim: usize,
    pub setting: usize,
    pub matrix: RealMatrix,
    pub inverse: RealMatrix,
}

pub fn setting_transform(
    basis: &OperatorBasis,
    states: &LocalStateSet,
    hw: &HeisenbergWeylSet,
    setting: usize,
) -> Result<SettingTransform> {
    let d = basis.dim();
    if states.dim() != d || hw.dim() != d {
        return Err(Error::DimMismatch(
            "basis, states and unitaries must share one dimension".into(),
        ));
    }
    if setting >= hw.len() {
        return Err(Error::IndexOutOfRange(format!(
            "setting {} out of range for {} unitaries",
            setting,
            hw.len()
        )));
    }
    let n = d * d;
    let u = hw.unitary(setting);
    let u_dag = u.adjoint();
    let mut t = RealMatrix::zeros(n, n);
    for k in 0..n {
        let rotated = u.matmul(states.state(k).matrix()).matmul(&u_dag);
        for kp in 0..n {
            let coeff = basis.element(kp).matrix().trace_product(&rotated).re / basis.hs_norm(kp);
            t[(k, kp)] = coeff;
        }
    }
    let inverse = invert(&t).map_err(|_| {
        Error::Singular(format!(
            "setting transform {} is singular; the state set does not span",
            setting
        ))
    })?;
    let check = t.matmul(&inverse);
    if check.max_abs_diff(&RealMatrix::identity(n)) > 1e-10 {
        return Err(Error::Singular(format!(
            "setting transform {} inverse verification failed",
            setting
        )));
    }
    Ok(SettingTransform {
        dim: d,
        setting,
        matrix: t,
        inverse,
    })
}

/// All d² setting transforms for one local dimension.
pub fn all_setting_transforms(
    basis: &OperatorBasis,
    states: &LocalStateSet,
    hw: &HeisenbergWeylSet,
) -> Result<Vec<SettingTransform>> {
    (0..hw.len())
        .map(|i| setting_transform(basis, states, hw, i))
        .collect()
}

/// Everything the protocol needs for one party dimension.
#[derive(Clone, Debug)]
pub struct PartyBasis {
    pub basis: OperatorBasis,
    pub states: LocalStateSet,
    pub hw: HeisenbergWeylSet,
    pub bell: BellProjectorSet,
    pub transforms: Vec<SettingTransform>,
}

impl PartyBasis {
    pub fn new(d: usize) -> Result<Self> {
        let basis = gell_mann_basis(d)?;
        let states = local_states(&basis)?;
        let hw = heisenberg_weyl(d)?;
        let bell = bell_projectors(&hw);
        let transforms = all_setting_transforms(&basis, &states, &hw)?;
        Ok(PartyBasis {
            basis,
            states,
            hw,
            bell,
            transforms,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

/// Closed-form qutrit transform matrices and inverses, kept as self-test
/// fixtures. Entries depend on the shift index only through cos/sin of
/// 2*pi*n/3 and 4*pi*n/3; prefactors are 1/3 for the forward matrices and 3
/// for the inverses.
pub mod qutrit_reference {
    use super::PartyBasis;
    use crate::mat::linalg::RealMatrix;

    struct Phases {
        c1: f64,
        s1: f64,
        c2: f64,
        s2: f64,
    }

    impl Phases {
        fn new(n: usize) -> Self {
            let a = 2.0 * std::f64::consts::PI * n as f64 / 3.0;
            Phases {
                c1: a.cos(),
                s1: a.sin(),
                c2: (2.0 * a).cos(),
                s2: (2.0 * a).sin(),
            }
        }
    }

    fn mat9(scale: f64, rows: [[f64; 9]; 9]) -> RealMatrix {
        let mut data = Vec::with_capacity(81);
        for row in rows.iter() {
            for &x in row.iter() {
                data.push(scale * x);
            }
        }
        RealMatrix::from_rows(9, 9, data)
    }

    /// Forward transform for shift n and cyclic step m (m in 0..3).
    pub fn transform(n: usize, m: usize) -> RealMatrix {
        let g = Phases::new(n);
        let r3 = 3.0f64.sqrt();
        let third = 1.0 / 3.0;
        match m {
            0 => mat9(
                third,
                [
                    [1., 0., 0., 0., 0., 0., 0., 0., 0.],
                    [1., 1., 0., 0., 0., 0., 0., 0., 0.],
                    [1., 0., r3 / 2., 0., 0., 0., 0., 0., 0.],
                    [1., 0., 0., g.c1, 0., 0., g.s1, 0., 0.],
                    [1., 0., 0., 0., g.c2, 0., 0., g.s2, 0.],
                    [1., 0., 0., 0., 0., g.c1, 0., 0., g.s1],
                    [1., 0., 0., -g.s1, 0., 0., g.c1, 0., 0.],
                    [1., 0., 0., 0., -g.s2, 0., 0., g.c2, 0.],
                    [1., 0., 0., 0., 0., -g.s1, 0., 0., g.c1],
                ],
            ),
            1 => mat9(
                third,
                [
                    [1., 0., 0., 0., 0., 0., 0., 0., 0.],
                    [1., -0.5, -r3 / 2., 0., 0., 0., 0., 0., 0.],
                    [1., 0.75, -r3 / 4., 0., 0., 0., 0., 0., 0.],
                    [1., 0., 0., 0., g.c1, 0., 0., -g.s1, 0.],
                    [1., 0., 0., 0., 0., g.c2, 0., 0., -g.s2],
                    [1., 0., 0., g.c1, 0., 0., g.s1, 0., 0.],
                    [1., 0., 0., 0., -g.s1, 0., 0., -g.c1, 0.],
                    [1., 0., 0., 0., 0., -g.s2, 0., 0., -g.c2],
                    [1., 0., 0., -g.s1, 0., 0., g.c1, 0., 0.],
                ],
            ),
            2 => mat9(
                third,
                [
                    [1., 0., 0., 0., 0., 0., 0., 0., 0.],
                    [1., -0.5, r3 / 2., 0., 0., 0., 0., 0., 0.],
                    [1., -0.75, -r3 / 4., 0., 0., 0., 0., 0., 0.],
                    [1., 0., 0., 0., 0., g.c1, 0., 0., g.s1],
                    [1., 0., 0., g.c2, 0., 0., -g.s2, 0., 0.],
                    [1., 0., 0., 0., g.c1, 0., 0., -g.s1, 0.],
                    [1., 0., 0., 0., 0., -g.s1, 0., 0., g.c1],
                    [1., 0., 0., -g.s2, 0., 0., -g.c2, 0., 0.],
                    [1., 0., 0., 0., -g.s1, 0., 0., -g.c1, 0.],
                ],
            ),
            _ => panic!("cyclic step must be 0, 1, or 2"),
        }
    }

    /// Inverse transform for shift n and cyclic step m.
    pub fn inverse(n: usize, m: usize) -> RealMatrix {
        let g = Phases::new(n);
        let r3 = 3.0f64.sqrt();
        match m {
            0 => mat9(
                3.0,
                [
                    [1., 0., 0., 0., 0., 0., 0., 0., 0.],
                    [-1., 1., 0., 0., 0., 0., 0., 0., 0.],
                    [-2. / r3, 0., 2. / r3, 0., 0., 0., 0., 0., 0.],
                    [-g.c1 + g.s1, 0., 0., g.c1, 0., 0., -g.s1, 0., 0.],
                    [-g.c2 + g.s2, 0., 0., 0., g.c2, 0., 0., -g.s2, 0.],
                    [-g.c1 + g.s1, 0., 0., 0., 0., g.c1, 0., 0., -g.s1],
                    [-g.c1 - g.s1, 0., 0., g.s1, 0., 0., g.c1, 0., 0.],
                    [-g.c2 - g.s2, 0., 0., 0., g.s2, 0., 0., g.c2, 0.],
                    [-g.c1 - g.s1, 0., 0., 0., 0., g.s1, 0., 0., g.c1],
                ],
            ),
            1 => mat9(
                3.0,
                [
                    [1., 0., 0., 0., 0., 0., 0., 0., 0.],
                    [-0.5, -0.5, 1., 0., 0., 0., 0., 0., 0.],
                    [5. / (2. * r3), -r3 / 2., -1. / r3, 0., 0., 0., 0., 0., 0.],
                    [-g.c1 + g.s1, 0., 0., 0., 0., g.c1, 0., 0., -g.s1],
                    [-g.c1 + g.s1, 0., 0., g.c1, 0., 0., -g.s1, 0., 0.],
                    [-g.c2 + g.s2, 0., 0., 0., g.c2, 0., 0., -g.s2, 0.],
                    [-g.c1 - g.s1, 0., 0., 0., 0., g.s1, 0., 0., g.c1],
                    [g.c1 + g.s1, 0., 0., -g.s1, 0., 0., -g.c1, 0., 0.],
                    [g.c2 + g.s2, 0., 0., 0., -g.s2, 0., 0., -g.c2, 0.],
                ],
            ),
            2 => mat9(
                3.0,
                [
                    [1., 0., 0., 0., 0., 0., 0., 0., 0.],
                    [1.5, -0.5, -1., 0., 0., 0., 0., 0., 0.],
                    [-1. / (2. * r3), r3 / 2., -1. / r3, 0., 0., 0., 0., 0., 0.],
                    [-g.c2 + g.s2, 0., 0., 0., g.c2, 0., 0., -g.s2, 0.],
                    [-g.c1 + g.s1, 0., 0., 0., 0., g.c1, 0., 0., -g.s1],
                    [-g.c1 + g.s1, 0., 0., g.c1, 0., 0., -g.s1, 0., 0.],
                    [g.c2 + g.s2, 0., 0., 0., -g.s2, 0., 0., -g.c2, 0.],
                    [g.c1 + g.s1, 0., 0., 0., 0., -g.s1, 0., 0., -g.c1],
                    [-g.c1 - g.s1, 0., 0., g.s1, 0., 0., g.c1, 0., 0.],
                ],
            ),
            _ => panic!("cyclic step must be 0, 1, or 2"),
        }
    }

    /// Worst entrywise deviation between the computed qutrit transforms
    /// (all 9 settings, forward and inverse) and the closed forms.
    pub fn max_deviation() -> crate::error::Result<f64> {
        let pb = PartyBasis::new(3)?;
        let mut worst: f64 = 0.0;
        for n in 0..3usize {
            for m in 0..3usize {
                let computed = &pb.transforms[n * 3 + m];
                worst = worst.max(computed.matrix.max_abs_diff(&transform(n, m)));
                worst = worst.max(computed.inverse.max_abs_diff(&inverse(n, m)));
            }
        }
        Ok(worst)
    }
}
