//! Dense semidefinite programming by ADMM splitting, plus the
//! optimization-based MDI quantifiers built on it.
//!
//! Problems are block-diagonal: a list of Hermitian PSD variables, a linear
//! objective per block, and real equality constraints. Inequalities enter
//! through explicit slack blocks. The solver alternates an affine projection
//! (KKT solve against a cached Cholesky factor of the constraint Gram
//! matrix) with per-block PSD projections, with over-relaxation and a fixed
//! penalty; iterations are deterministic.

mod quant;

pub use quant::{
    legendre_hat, mdi_quantify_memory, mdi_quantify_state, mdi_quantify_state_masked,
    mdi_quantify_state_trace_only, negativity, negativity_of, robustness_ppt, MemoryQuantifyInput,
};

use crate::error::{Error, Result};
use crate::mat::linalg::cholesky;
use crate::mat::{psd_project, ComplexMatrix, HermitianMatrix};
use crate::par::{map_indexed, Parallelism};
use num_complex::Complex64;

/// One linear term ⟨coeff, X_block⟩ of a constraint.
#[derive(Clone, Debug)]
pub struct LinearTerm {
    pub block: usize,
    pub coeff: HermitianMatrix,
}

/// Real equality constraint sum_terms ⟨coeff, X⟩ = rhs.
#[derive(Clone, Debug)]
pub struct SdpConstraint {
    pub terms: Vec<LinearTerm>,
    pub rhs: f64,
}

/// Block-structured SDP in standard (minimization) form.
#[derive(Clone, Debug, Default)]
pub struct SdpProblem {
    /// Square dimension of each PSD block.
    pub blocks: Vec<usize>,
    /// Objective coefficient per block (zero matrices allowed).
    pub objective: Vec<HermitianMatrix>,
    pub constraints: Vec<SdpConstraint>,
    /// Indices of blocks introduced as slack for inequality constraints;
    /// informational, recorded in reports.
    pub slack_blocks: Vec<usize>,
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>) -> Self {
        let objective = blocks.iter().map(|&n| HermitianMatrix::zeros(n)).collect();
        SdpProblem {
            blocks,
            objective,
            constraints: Vec::new(),
            slack_blocks: Vec::new(),
        }
    }

    pub fn set_objective(&mut self, block: usize, coeff: HermitianMatrix) {
        assert_eq!(coeff.dim(), self.blocks[block]);
        self.objective[block] = coeff;
    }

    pub fn add_constraint(&mut self, terms: Vec<LinearTerm>, rhs: f64) {
        for t in &terms {
            assert_eq!(t.coeff.dim(), self.blocks[t.block]);
        }
        self.constraints.push(SdpConstraint { terms, rhs });
    }

    /// Adds a fresh PSD slack block and returns its index.
    pub fn add_slack_block(&mut self, dim: usize) -> usize {
        self.blocks.push(dim);
        self.objective.push(HermitianMatrix::zeros(dim));
        let idx = self.blocks.len() - 1;
        self.slack_blocks.push(idx);
        idx
    }

    /// Adds the matrix equality sum_b M_b(X_b) = RHS entrywise, expanded on
    /// an orthonormal Hermitian basis of the target space.
    pub fn add_matrix_equality(
        &mut self,
        terms: Vec<(usize, MatrixCoeffMap)>,
        rhs: &HermitianMatrix,
    ) {
        let n = rhs.dim();
        for r in 0..n * n {
            let e = hermitian_basis_element(n, r);
            let mut lin_terms = Vec::with_capacity(terms.len());
            for (block, map) in &terms {
                lin_terms.push(LinearTerm {
                    block: *block,
                    coeff: map.pullback(&e),
                });
            }
            let rhs_val = e.matrix().trace_product(rhs.matrix()).re;
            self.add_constraint(lin_terms, rhs_val);
        }
    }
}

/// How a block enters a matrix equality: directly, negated, or through a
/// partial transpose (which is self-adjoint for the Hilbert-Schmidt
/// pairing, so the pullback of a basis element is its partial transpose).
#[derive(Clone, Debug)]
pub enum MatrixCoeffMap {
    Identity,
    Negate,
    PartialTranspose { dims: Vec<usize>, party: usize },
}

impl MatrixCoeffMap {
    fn pullback(&self, e: &HermitianMatrix) -> HermitianMatrix {
        match self {
            MatrixCoeffMap::Identity => e.clone(),
            MatrixCoeffMap::Negate => {
                HermitianMatrix::new_unchecked(e.matrix().scale_re(-1.0))
            }
            MatrixCoeffMap::PartialTranspose { dims, party } => {
                let dl = crate::mat::DimList::new(dims.clone()).expect("valid dims");
                HermitianMatrix::new_unchecked(
                    crate::mat::partial_transpose(e.matrix(), &dl, *party)
                        .expect("partial transpose dims match"),
                )
            }
        }
    }
}

/// r-th element of the orthonormal Hermitian basis of n x n matrices:
/// first n diagonal units, then (|i><j| + |j><i|)/sqrt(2), then the
/// antisymmetric counterparts.
pub fn hermitian_basis_element(n: usize, r: usize) -> HermitianMatrix {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = ComplexMatrix::zeros(n, n);
    if r < n {
        m[(r, r)] = crate::mat::C_ONE;
    } else {
        let off = r - n;
        let pairs = n * (n - 1) / 2;
        let (pair_idx, imag) = if off < pairs {
            (off, false)
        } else {
            (off - pairs, true)
        };
        let (i, j) = pair_from_index(n, pair_idx);
        if imag {
            m[(i, j)] = Complex64::new(0.0, -inv_sqrt2);
            m[(j, i)] = Complex64::new(0.0, inv_sqrt2);
        } else {
            m[(i, j)] = Complex64::new(inv_sqrt2, 0.0);
            m[(j, i)] = Complex64::new(inv_sqrt2, 0.0);
        }
    }
    HermitianMatrix::new_unchecked(m)
}

fn pair_from_index(n: usize, mut idx: usize) -> (usize, usize) {
    for i in 0..n {
        let row = n - 1 - i;
        if idx < row {
            return (i, i + 1 + idx);
        }
        idx -= row;
    }
    unreachable!("pair index out of range")
}

/// svec embedding: diagonal, then sqrt(2)·Re(upper), then sqrt(2)·Im(upper).
/// Preserves the Hilbert-Schmidt inner product of Hermitian matrices.
fn svec_into(h: &ComplexMatrix, out: &mut [f64]) {
    let n = h.rows();
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut pos = 0;
    for i in 0..n {
        out[pos] = h[(i, i)].re;
        pos += 1;
    }
    for i in 0..n {
        for j in i + 1..n {
            out[pos] = sqrt2 * h[(i, j)].re;
            pos += 1;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            out[pos] = sqrt2 * h[(i, j)].im;
            pos += 1;
        }
    }
}

fn unsvec(v: &[f64], n: usize) -> ComplexMatrix {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = ComplexMatrix::zeros(n, n);
    let mut pos = 0;
    for i in 0..n {
        m[(i, i)] = Complex64::new(v[pos], 0.0);
        pos += 1;
    }
    let re_base = pos;
    let pairs = n * (n - 1) / 2;
    let mut pair = 0;
    for i in 0..n {
        for j in i + 1..n {
            let re = v[re_base + pair] * inv_sqrt2;
            let im = v[re_base + pairs + pair] * inv_sqrt2;
            m[(i, j)] = Complex64::new(re, im);
            m[(j, i)] = Complex64::new(re, -im);
            pair += 1;
        }
    }
    m
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Fixed ADMM penalty. Zero selects a deterministic default derived
    /// from the objective norm.
    pub penalty: f64,
    pub parallelism: Parallelism,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-7,
            max_iter: 50_000,
            penalty: 0.0,
            parallelism: Parallelism::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    Unconverged,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub value: f64,
    pub blocks: Vec<ComplexMatrix>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

struct BlockLayout {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl BlockLayout {
    fn new(blocks: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut total = 0;
        for &n in blocks {
            offsets.push(total);
            total += n * n;
        }
        BlockLayout {
            dims: blocks.to_vec(),
            offsets,
            total,
        }
    }
}

/// Solves the SDP; converged solutions satisfy block positivity and the
/// constraints to within the tolerance, and the reported value is the
/// objective at the PSD-feasible iterate.
pub fn solve(problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    if problem.blocks.is_empty() {
        return Err(Error::InvalidArgument("problem has no blocks".into()));
    }
    let layout = BlockLayout::new(&problem.blocks);
    let n_vars = layout.total;
    let m = problem.constraints.len();
    if m == 0 {
        return Err(Error::InvalidArgument("problem has no constraints".into()));
    }

    // Assemble the dense constraint matrix with row normalization.
    let mut a = vec![0.0f64; m * n_vars];
    let mut b = vec![0.0f64; m];
    let mut scratch = vec![0.0f64; n_vars];
    for (c, cons) in problem.constraints.iter().enumerate() {
        let row = &mut a[c * n_vars..(c + 1) * n_vars];
        for term in &cons.terms {
            let nb = layout.dims[term.block];
            let seg =
                &mut scratch[layout.offsets[term.block]..layout.offsets[term.block] + nb * nb];
            svec_into(term.coeff.matrix(), seg);
            for (dst, src) in row[layout.offsets[term.block]..layout.offsets[term.block] + nb * nb]
                .iter_mut()
                .zip(seg.iter())
            {
                *dst += *src;
            }
        }
        let norm: f64 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-14 {
            if cons.rhs.abs() > 1e-11 {
                return Err(Error::Infeasible(format!(
                    "constraint {} has zero coefficients and rhs {}",
                    c, cons.rhs
                )));
            }
            b[c] = 0.0;
            continue;
        }
        for x in row.iter_mut() {
            *x /= norm;
        }
        b[c] = cons.rhs / norm;
    }

    // Objective in svec coordinates.
    let mut cvec = vec![0.0f64; n_vars];
    for (blk, coeff) in problem.objective.iter().enumerate() {
        let nb = layout.dims[blk];
        svec_into(
            coeff.matrix(),
            &mut cvec[layout.offsets[blk]..layout.offsets[blk] + nb * nb],
        );
    }
    let c_norm: f64 = cvec.iter().map(|x| x * x).sum::<f64>().sqrt();
    let penalty = if opts.penalty > 0.0 {
        opts.penalty
    } else {
        c_norm.max(1.0)
    };

    // Gram matrix AA^T with a small ridge against redundant rows.
    let gram = gram_matrix(&a, m, n_vars, opts.parallelism);
    let ridge = 1e-11;
    let chol = cholesky(&gram, ridge)?;

    let matvec_a = |x: &[f64]| -> Vec<f64> {
        map_indexed(opts.parallelism, m, |r| {
            let row = &a[r * n_vars..(r + 1) * n_vars];
            row.iter().zip(x.iter()).map(|(ar, xr)| ar * xr).sum()
        })
    };
    let matvec_at = |y: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0f64; n_vars];
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            let row = &a[r * n_vars..(r + 1) * n_vars];
            for (o, ar) in out.iter_mut().zip(row.iter()) {
                *o += yr * ar;
            }
        }
        out
    };

    let alpha = 1.6; // over-relaxation
    let mut x = vec![0.0f64; n_vars];
    let mut z = vec![0.0f64; n_vars];
    let mut u = vec![0.0f64; n_vars];
    let mut z_prev;
    let mut primal_resid = f64::INFINITY;
    let mut dual_resid = f64::INFINITY;
    let mut iterations = 0;

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        // x-update: projection of (z - u - c/penalty) onto Ax = b.
        let mut v = vec![0.0f64; n_vars];
        for i in 0..n_vars {
            v[i] = z[i] - u[i] - cvec[i] / penalty;
        }
        let av = matvec_a(&v);
        let mut resid_rhs = vec![0.0f64; m];
        for r in 0..m {
            resid_rhs[r] = b[r] - av[r];
        }
        let w = chol.solve(&resid_rhs);
        let corr = matvec_at(&w);
        for i in 0..n_vars {
            x[i] = v[i] + corr[i];
        }

        // Over-relaxed PSD projection per block.
        z_prev = z.clone();
        let hatx: Vec<f64> = (0..n_vars)
            .map(|i| alpha * x[i] + (1.0 - alpha) * z_prev[i])
            .collect();
        let projected: Vec<Vec<f64>> = map_indexed(opts.parallelism, layout.dims.len(), |blk| {
            let nb = layout.dims[blk];
            let seg_start = layout.offsets[blk];
            let seg: Vec<f64> = (0..nb * nb)
                .map(|i| hatx[seg_start + i] + u[seg_start + i])
                .collect();
            let h = HermitianMatrix::new_unchecked(unsvec(&seg, nb));
            let proj = psd_project(&h);
            let mut out = vec![0.0f64; nb * nb];
            svec_into(proj.matrix(), &mut out);
            out
        });
        for (blk, seg) in projected.iter().enumerate() {
            let start = layout.offsets[blk];
            z[start..start + seg.len()].copy_from_slice(seg);
        }

        for i in 0..n_vars {
            u[i] += hatx[i] - z[i];
        }

        if iter % 10 == 9 || iter + 1 == opts.max_iter {
            let xnorm: f64 = x.iter().map(|t| t * t).sum::<f64>().sqrt();
            let znorm: f64 = z.iter().map(|t| t * t).sum::<f64>().sqrt();
            let scale = xnorm.max(znorm).max(1.0);
            primal_resid = x
                .iter()
                .zip(z.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                / scale;
            let unorm: f64 = u.iter().map(|t| t * t).sum::<f64>().sqrt() * penalty;
            dual_resid = z
                .iter()
                .zip(z_prev.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                * penalty
                / unorm.max(1.0);
            if primal_resid <= opts.tol && dual_resid <= opts.tol {
                break;
            }
        }
    }

    let blocks: Vec<ComplexMatrix> = layout
        .dims
        .iter()
        .enumerate()
        .map(|(blk, &nb)| {
            unsvec(
                &z[layout.offsets[blk]..layout.offsets[blk] + nb * nb],
                nb,
            )
        })
        .collect();
    let value: f64 = cvec.iter().zip(z.iter()).map(|(c, z)| c * z).sum();
    let status = if primal_resid <= opts.tol && dual_resid <= opts.tol {
        SolveStatus::Converged
    } else {
        SolveStatus::Unconverged
    };
    Ok(SdpSolution {
        value,
        blocks,
        primal_residual: primal_resid,
        dual_residual: dual_resid,
        iterations,
        status,
    })
}

fn gram_matrix(
    a: &[f64],
    m: usize,
    n_vars: usize,
    mode: Parallelism,
) -> crate::mat::linalg::RealMatrix {
    let rows: Vec<Vec<f64>> = map_indexed(mode, m, |r| {
        let row_r = &a[r * n_vars..(r + 1) * n_vars];
        (0..m)
            .map(|c| {
                let row_c = &a[c * n_vars..(c + 1) * n_vars];
                row_r
                    .iter()
                    .zip(row_c.iter())
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
            })
            .collect()
    });
    let mut g = crate::mat::linalg::RealMatrix::zeros(m, m);
    for (r, row) in rows.into_iter().enumerate() {
        for (c, v) in row.into_iter().enumerate() {
            g[(r, c)] = v;
        }
    }
    g
}
