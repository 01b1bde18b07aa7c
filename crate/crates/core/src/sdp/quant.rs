//! Negativity and the optimization-based MDI quantifiers.
//!
//! Negativity is the default monotone throughout: computable, convex, and
//! invariant under transposition. Trace-norm splits ρ^Γ = P − Q encode it
//! linearly, so every quantifier below is a genuine SDP.

use super::{
    hermitian_basis_element, solve, LinearTerm, MatrixCoeffMap, SdpProblem, SdpSolution,
    SolveOptions, SolveStatus,
};
use crate::bases::PartyBasis;
use crate::decomp::ProbabilityTable;
use crate::error::{Error, Result};
use crate::mat::{kron, kron_list, unflatten_index, ComplexMatrix, DimList, HermitianMatrix};
use crate::quantum::{ChoiState, DensityMatrix};
use std::sync::Arc;

/// Negativity of a state across the bipartition given by the transposed
/// party set: (||rho^Gamma||_1 - tr rho)/2. The trace subtraction extends
/// the definition to unnormalized inputs homogeneously.
pub fn negativity(rho: &DensityMatrix, transposed_parties: &[usize]) -> Result<f64> {
    let pt = rho.partial_transpose(transposed_parties)?;
    Ok(negativity_of(&pt, rho.matrix().trace().re))
}

/// Negativity from an already-transposed Hermitian matrix and the trace of
/// the original operator.
pub fn negativity_of(partial_transposed: &HermitianMatrix, trace: f64) -> f64 {
    let vals = partial_transposed.eigenvalues();
    let l1: f64 = vals.iter().map(|v| v.abs()).sum();
    (l1 - trace) / 2.0
}

fn scaled_identity(n: usize, s: f64) -> HermitianMatrix {
    HermitianMatrix::new_unchecked(ComplexMatrix::identity(n).scale_re(s))
}

/// Builds the trace-norm split constraints rho^Gamma = P - Q for one triple
/// of consecutive blocks (rho at `base`, P at `base+1`, Q at `base+2`).
fn add_split_constraints(problem: &mut SdpProblem, base: usize, dims: &[usize], party: usize) {
    problem.add_matrix_equality(
        vec![
            (
                base,
                MatrixCoeffMap::PartialTranspose {
                    dims: dims.to_vec(),
                    party,
                },
            ),
            (base + 1, MatrixCoeffMap::Negate),
            (base + 2, MatrixCoeffMap::Identity),
        ],
        &HermitianMatrix::zeros(dims.iter().product()),
    );
}

/// Shared core of the state quantifier; `input_mask` selects which input
/// settings contribute data constraints (all when empty).
pub fn mdi_quantify_state_masked(
    table: &ProbabilityTable,
    inputs: &[Arc<PartyBasis>],
    input_mask: &[usize],
    opts: &SolveOptions,
) -> Result<(f64, SdpSolution)> {
    let dims = table.dims().clone();
    if inputs.len() != dims.len() {
        return Err(Error::DimMismatch(format!(
            "{} input sets for {} parties",
            inputs.len(),
            dims.len()
        )));
    }
    let side: Vec<usize> = dims.dims().iter().map(|&d| d * d).collect();
    let n_outcomes: usize = table.outcome_count();
    let d_total = dims.total();
    let omega = dims.omega();

    // Blocks: per outcome (rho~, P, Q).
    let mut blocks = Vec::with_capacity(3 * n_outcomes);
    for _ in 0..n_outcomes {
        blocks.extend_from_slice(&[d_total, d_total, d_total]);
    }
    let mut problem = SdpProblem::new(blocks);

    // Objective (tr P + tr Q - tr rho~) / (2 Omega) summed over outcomes.
    for i in 0..n_outcomes {
        problem.set_objective(3 * i, scaled_identity(d_total, -0.5 / omega));
        problem.set_objective(3 * i + 1, scaled_identity(d_total, 0.5 / omega));
        problem.set_objective(3 * i + 2, scaled_identity(d_total, 0.5 / omega));
    }

    // Data constraints tr[rho~_i (⊗ omega_k)] = P(i|k).
    let use_all = input_mask.is_empty();
    let mask: Vec<bool> = if use_all {
        vec![true; table.input_count()]
    } else {
        let mut m = vec![false; table.input_count()];
        for &k in input_mask {
            if k >= m.len() {
                return Err(Error::IndexOutOfRange(format!(
                    "input index {} out of range",
                    k
                )));
            }
            m[k] = true;
        }
        m
    };
    for k_flat in 0..table.input_count() {
        if !mask[k_flat] {
            continue;
        }
        let k_idx = unflatten_index(k_flat, &side);
        let factors: Vec<ComplexMatrix> = k_idx
            .iter()
            .enumerate()
            .map(|(p, &k)| inputs[p].states.state(k).matrix().transpose())
            .collect();
        let refs: Vec<&ComplexMatrix> = factors.iter().collect();
        let omega_k = HermitianMatrix::new_unchecked(kron_list(&refs));
        for i in 0..n_outcomes {
            problem.add_constraint(
                vec![LinearTerm {
                    block: 3 * i,
                    coeff: omega_k.clone(),
                }],
                table.entry_flat(k_flat, i),
            );
        }
    }

    // Completeness: sum_i rho~_i = identity.
    {
        let n = d_total;
        for r in 0..n * n {
            let e = hermitian_basis_element(n, r);
            let terms: Vec<LinearTerm> = (0..n_outcomes)
                .map(|i| LinearTerm {
                    block: 3 * i,
                    coeff: e.clone(),
                })
                .collect();
            let rhs = e.trace_re();
            problem.add_constraint(terms, rhs);
        }
    }

    // Trace-norm splits across the first-party bipartition.
    for i in 0..n_outcomes {
        add_split_constraints(&mut problem, 3 * i, dims.dims(), 0);
    }

    let sol = solve(&problem, opts)?;
    Ok((sol.value, sol))
}

/// Certified lower bound on the negativity of every state consistent with
/// the table, across the first-party bipartition.
pub fn mdi_quantify_state(
    table: &ProbabilityTable,
    inputs: &[Arc<PartyBasis>],
    opts: &SolveOptions,
) -> Result<(f64, SdpSolution)> {
    mdi_quantify_state_masked(table, inputs, &[], opts)
}

/// Degenerate single-joint-measurement variant: only the per-outcome traces
/// are constrained, so the free-state solution is always admissible and the
/// bound collapses to zero. Kept as a regression guard.
pub fn mdi_quantify_state_trace_only(
    table: &ProbabilityTable,
    opts: &SolveOptions,
) -> Result<f64> {
    let dims = table.dims().clone();
    let n_outcomes = table.outcome_count();
    let d_total = dims.total();
    let omega = dims.omega();
    let mut blocks = Vec::with_capacity(3 * n_outcomes);
    for _ in 0..n_outcomes {
        blocks.extend_from_slice(&[d_total, d_total, d_total]);
    }
    let mut problem = SdpProblem::new(blocks);
    for i in 0..n_outcomes {
        problem.set_objective(3 * i, scaled_identity(d_total, -0.5 / omega));
        problem.set_objective(3 * i + 1, scaled_identity(d_total, 0.5 / omega));
        problem.set_objective(3 * i + 2, scaled_identity(d_total, 0.5 / omega));
    }
    // Aggregated outcome probabilities only: tr rho~_i = Omega * mean_k P(i|k).
    for i in 0..n_outcomes {
        let mean: f64 = (0..table.input_count())
            .map(|k| table.entry_flat(k, i))
            .sum::<f64>()
            / table.input_count() as f64;
        problem.add_constraint(
            vec![LinearTerm {
                block: 3 * i,
                coeff: HermitianMatrix::identity(d_total),
            }],
            omega * mean,
        );
    }
    for i in 0..n_outcomes {
        add_split_constraints(&mut problem, 3 * i, dims.dims(), 0);
    }
    let sol = solve(&problem, opts)?;
    Ok(sol.value)
}

/// Input for the memory quantifier: the table P(i|s,t) with its index
/// sizes, and the input/ancilla state sets actually used by the run.
pub struct MemoryQuantifyInput<'a> {
    pub d_a: usize,
    pub d_b: usize,
    /// entries[(s * d_b² + t) * d_b² + i]
    pub probabilities: &'a [f64],
    pub tau_a: &'a PartyBasis,
    pub omega_b: &'a PartyBasis,
}

/// Lower bound on the Choi-state negativity of the channel behind a memory
/// protocol run. Post-selected blocks satisfy sum_i rho~_i <= I (slack
/// block); data constraints probe each block with tau_s ⊗ omega_t, the
/// input state itself against the prepared ancilla omega_t = tau_t^T. The
/// effective-state family realizing the data is positive for exactly this
/// probe pairing (the maximally-entangled projection transposes the input
/// factor once).
pub fn mdi_quantify_memory(
    input: &MemoryQuantifyInput<'_>,
    opts: &SolveOptions,
) -> Result<(f64, SdpSolution)> {
    let (d_a, d_b) = (input.d_a, input.d_b);
    let n_outcomes = d_b * d_b;
    let n_s = d_a * d_a;
    let n_t = d_b * d_b;
    if input.probabilities.len() != n_s * n_t * n_outcomes {
        return Err(Error::DimMismatch(format!(
            "{} probabilities for {}x{}x{} table",
            input.probabilities.len(),
            n_s,
            n_t,
            n_outcomes
        )));
    }
    let d_total = d_a * d_b;
    let mut blocks = Vec::with_capacity(3 * n_outcomes + 1);
    for _ in 0..n_outcomes {
        blocks.extend_from_slice(&[d_total, d_total, d_total]);
    }
    let mut problem = SdpProblem::new(blocks);
    let slack = problem.add_slack_block(d_total);

    let scale = 1.0 / (d_a * d_b) as f64;
    for i in 0..n_outcomes {
        problem.set_objective(3 * i, scaled_identity(d_total, -0.5 * scale));
        problem.set_objective(3 * i + 1, scaled_identity(d_total, 0.5 * scale));
        problem.set_objective(3 * i + 2, scaled_identity(d_total, 0.5 * scale));
    }

    // Data: tr[rho~_i (tau_s ⊗ omega_t)] = P(i|s,t).
    for s in 0..n_s {
        let tau = input.tau_a.states.state(s).matrix();
        for t in 0..n_t {
            let omega = input.omega_b.states.state(t).matrix().transpose();
            let coeff = HermitianMatrix::new_unchecked(kron(tau, &omega));
            for i in 0..n_outcomes {
                problem.add_constraint(
                    vec![LinearTerm {
                        block: 3 * i,
                        coeff: coeff.clone(),
                    }],
                    input.probabilities[(s * n_t + t) * n_outcomes + i],
                );
            }
        }
    }

    // sum_i rho~_i + slack = I ⊗ I.
    {
        let n = d_total;
        for r in 0..n * n {
            let e = hermitian_basis_element(n, r);
            let mut terms: Vec<LinearTerm> = (0..n_outcomes)
                .map(|i| LinearTerm {
                    block: 3 * i,
                    coeff: e.clone(),
                })
                .collect();
            terms.push(LinearTerm {
                block: slack,
                coeff: e.clone(),
            });
            let rhs = e.trace_re();
            problem.add_constraint(terms, rhs);
        }
    }

    for i in 0..n_outcomes {
        add_split_constraints(&mut problem, 3 * i, &[d_a, d_b], 0);
    }

    let sol = solve(&problem, opts)?;
    Ok((sol.value, sol))
}

/// PPT-relaxed robustness of a Choi state: the least trace of a PPT-cone
/// correction K >= 0 with J^Gamma + K >= 0, found by SDP. Cross-checkable by
/// a one-dimensional brute force over maximally-entangled-direction mixers;
/// lower-bounds the separability-based robustness, and is exact for the
/// 2x2 and 2x3 systems where PPT coincides with separability.
pub fn robustness_ppt(choi: &ChoiState, opts: &SolveOptions) -> Result<(f64, SdpSolution)> {
    let d_a = choi.input_dim();
    let d_b = choi.output_dim();
    let d_total = d_a * d_b;
    let gamma = choi.state().partial_transpose(&[1])?;

    let mut problem = SdpProblem::new(vec![d_total]);
    let slack = problem.add_slack_block(d_total);
    problem.set_objective(0, HermitianMatrix::identity(d_total));
    // slack - K = J^Gamma, with slack >= 0 enforcing J^Gamma + K >= 0.
    problem.add_matrix_equality(
        vec![
            (slack, MatrixCoeffMap::Identity),
            (0, MatrixCoeffMap::Negate),
        ],
        &gamma,
    );
    let sol = solve(&problem, opts)?;
    Ok((sol.value, sol))
}

/// Legendre transform of the negativity against a witness direction:
/// sup_rho { tr(alpha W rho) - N(rho) }, solved exactly as an SDP over the
/// split rho^Gamma = P - Q.
pub fn legendre_hat(
    w: &HermitianMatrix,
    dims: &DimList,
    alpha: f64,
    opts: &SolveOptions,
) -> Result<f64> {
    dims.check_matches(w.dim())?;
    let d_total = dims.total();
    let mut problem = SdpProblem::new(vec![d_total, d_total, d_total]);
    // min -alpha tr(W rho) + (tr P + tr Q)/2; afterwards add back the +1/2.
    problem.set_objective(
        0,
        HermitianMatrix::new_unchecked(w.matrix().scale_re(-alpha)),
    );
    problem.set_objective(1, scaled_identity(d_total, 0.5));
    problem.set_objective(2, scaled_identity(d_total, 0.5));
    problem.add_constraint(
        vec![LinearTerm {
            block: 0,
            coeff: HermitianMatrix::identity(d_total),
        }],
        1.0,
    );
    add_split_constraints(&mut problem, 0, dims.dims(), 0);
    let sol = solve(&problem, opts)?;
    if sol.status != SolveStatus::Converged {
        return Err(Error::Unconverged {
            iterations: sol.iterations,
            primal: sol.primal_residual,
            dual: sol.dual_residual,
        });
    }
    Ok(-sol.value + 0.5)
}
