//! MDI characterization of quantum memories: one generalized Bell
//! measurement on the channel output and a trusted local ancilla.
//!
//! The run prepares tau_s on the input side, sends it through the channel,
//! prepares omega_t = tau_t^T on the ancilla B', and measures the pair
//! ordered (B', B) with an untrusted 4-outcome POVM. The A-side ancilla of
//! the Choi picture is never simulated; the projection identity
//! N(tau) = d_A tr_A[J (tau^T ⊗ I)] replaces it analytically, which fixes
//! the value normalization: under a faithful measurement the raw contraction
//! equals d_A d_B · tr(W J_N).

use crate::bases::PartyBasis;
use crate::error::{Error, Result};
use crate::game::{EveStrategy, ProductComponent};
use crate::mat::linalg::cholesky;
use crate::mat::{kron, partial_trace, ComplexMatrix, DimList, HermitianMatrix};
use crate::par::{map_indexed, Parallelism};
use crate::quantum::{apply_channel, ChoiState, DensityMatrix};
use crate::sdp::{mdi_quantify_memory, MemoryQuantifyInput, SdpSolution, SolveOptions};
use crate::witness::Witness;
use std::sync::Arc;

/// A completed memory-protocol run: the channel, the state sets, the
/// single-party strategy, and the exact table P(i | tau_s, omega_t).
#[derive(Clone, Debug)]
pub struct MemoryProtocolRun {
    pub channel: ChoiState,
    pub tau_a: Arc<PartyBasis>,
    pub omega_b: Arc<PartyBasis>,
    /// probabilities[(s * t_count + t) * outcome_count + i]
    pub probabilities: Vec<f64>,
}

impl MemoryProtocolRun {
    pub fn d_a(&self) -> usize {
        self.channel.input_dim()
    }

    pub fn d_b(&self) -> usize {
        self.channel.output_dim()
    }

    pub fn s_count(&self) -> usize {
        self.d_a() * self.d_a()
    }

    pub fn t_count(&self) -> usize {
        self.d_b() * self.d_b()
    }

    pub fn outcome_count(&self) -> usize {
        self.d_b() * self.d_b()
    }

    pub fn probability(&self, s: usize, t: usize, i: usize) -> f64 {
        self.probabilities[(s * self.t_count() + t) * self.outcome_count() + i]
    }
}

/// POVM elements of a single-party strategy on the (B', B) pair space.
fn memory_strategy_elements(
    strategy: &EveStrategy,
    d_b: usize,
    omega_b: &PartyBasis,
) -> Result<Vec<ComplexMatrix>> {
    let n = d_b * d_b;
    let pair_dims = DimList::single(d_b).clone();
    match strategy {
        EveStrategy::Faithful => Ok(omega_b
            .bell
            .projectors()
            .iter()
            .map(|p| p.matrix().clone())
            .collect()),
        EveStrategy::Trivial => Ok(vec![
            ComplexMatrix::identity(n).scale_re(1.0 / n as f64);
            n
        ]),
        EveStrategy::ProductLosr(components) => {
            strategy.validate(&pair_dims)?;
            let mut elements = vec![ComplexMatrix::zeros(n, n); n];
            for ProductComponent { weight, povms } in components {
                for (i, el) in elements.iter_mut().enumerate() {
                    el.add_assign_scaled(
                        povms[0].element(i).matrix(),
                        num_complex::Complex64::new(*weight, 0.0),
                    );
                }
            }
            Ok(elements)
        }
        EveStrategy::Separable(_) => Err(Error::InvalidArgument(
            "memory runs take single-party strategies (Faithful, Trivial, ProductLosr)".into(),
        )),
    }
}

/// Runs the Box-style memory protocol exactly.
pub fn run_memory_protocol(
    channel: &ChoiState,
    strategy: &EveStrategy,
    mode: Parallelism,
) -> Result<MemoryProtocolRun> {
    let d_a = channel.input_dim();
    let d_b = channel.output_dim();
    let tau_a = Arc::new(PartyBasis::new(d_a)?);
    let omega_b = Arc::new(PartyBasis::new(d_b)?);
    let elements = memory_strategy_elements(strategy, d_b, &omega_b)?;

    let s_count = d_a * d_a;
    let t_count = d_b * d_b;
    let outcome_count = d_b * d_b;

    // Channel outputs once per s.
    let outputs: Vec<DensityMatrix> = (0..s_count)
        .map(|s| {
            let tau = DensityMatrix::new_unchecked(
                DimList::single(d_a),
                tau_a.states.state(s).matrix().clone(),
            );
            apply_channel(channel, &tau)
        })
        .collect::<Result<_>>()?;

    let rows = map_indexed(mode, s_count * t_count, |st| {
        let s = st / t_count;
        let t = st % t_count;
        let omega = omega_b.states.state(t).matrix().transpose();
        let joint = kron(&omega, outputs[s].matrix());
        let mut row: Vec<f64> = elements
            .iter()
            .map(|e| e.trace_product(&joint).re.clamp(0.0, 1.0))
            .collect();
        let partial: f64 = row[..outcome_count - 1].iter().sum();
        row[outcome_count - 1] = (1.0 - partial).max(0.0);
        row
    });
    let mut probabilities = Vec::with_capacity(s_count * t_count * outcome_count);
    for row in rows {
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidTable(format!(
                "memory row sums to {}",
                sum
            )));
        }
        probabilities.extend(row);
    }
    Ok(MemoryProtocolRun {
        channel: channel.clone(),
        tau_a,
        omega_b,
        probabilities,
    })
}

/// Raw memory MDI value and its normalized form. Under a faithful
/// measurement `raw` equals d_A d_B tr(W J_N), so `normalized` reproduces
/// the trusted Choi-state expectation tr(W J_N).
#[derive(Clone, Copy, Debug)]
pub struct MemoryMdiValue {
    pub raw: f64,
    pub normalized: f64,
}

/// Evaluates the MDI value of a witness on A ⊗ B' against a memory run:
/// the witness is expanded per outcome i as
/// W = sum_st beta^i_st (tau_s^T ⊗ V_i tau_t V_i†) and contracted with the
/// table.
pub fn memory_mdi_value(witness: &Witness, run: &MemoryProtocolRun) -> Result<MemoryMdiValue> {
    let d_a = run.d_a();
    let d_b = run.d_b();
    if witness.copies() != 1 || witness.dims().dims() != [d_a, d_b] {
        return Err(Error::DimMismatch(format!(
            "witness dims {:?} do not match channel ({}, {})",
            witness.dims().dims(),
            d_a,
            d_b
        )));
    }
    let n_s = run.s_count();
    let n_t = run.t_count();
    let n_i = run.outcome_count();

    // Gram factors: both sides share tr(tau_j tau_k) because transposition
    // and unitary conjugation preserve the pairwise inner products.
    let gram_a = cholesky(&run.tau_a.states.gram(), 0.0)?;
    let gram_b = cholesky(&run.omega_b.states.gram(), 0.0)?;

    let mut raw = 0.0;
    for i in 0..n_i {
        let v = run.omega_b.hw.unitary(i);
        let v_dag = v.adjoint();
        // rhs[s][t] = tr[W (tau_s^T ⊗ V_i tau_t V_i†)]
        let mut rhs = vec![0.0f64; n_s * n_t];
        for s in 0..n_s {
            let tau_t = run.tau_a.states.state(s).matrix().transpose();
            for t in 0..n_t {
                let rot = v
                    .matmul(run.omega_b.states.state(t).matrix())
                    .matmul(&v_dag);
                rhs[s * n_t + t] = kron(&tau_t, &rot)
                    .trace_product(witness.operator().matrix())
                    .re;
            }
        }
        // beta^i = (G_A ⊗ G_B)^{-1} rhs, factorized.
        let mut beta = vec![0.0f64; n_s * n_t];
        let mut fiber = vec![0.0f64; n_s];
        for t in 0..n_t {
            for s in 0..n_s {
                fiber[s] = rhs[s * n_t + t];
            }
            let solved = gram_a.solve(&fiber);
            for s in 0..n_s {
                beta[s * n_t + t] = solved[s];
            }
        }
        let mut fiber_t = vec![0.0f64; n_t];
        for s in 0..n_s {
            fiber_t.copy_from_slice(&beta[s * n_t..(s + 1) * n_t]);
            let solved = gram_b.solve(&fiber_t);
            beta[s * n_t..(s + 1) * n_t].copy_from_slice(&solved);
        }

        for s in 0..n_s {
            for t in 0..n_t {
                raw += beta[s * n_t + t] * run.probability(s, t, i);
            }
        }
    }
    Ok(MemoryMdiValue {
        raw,
        normalized: raw / (d_a as f64 * d_b as f64),
    })
}

/// SDP lower bound on the Choi-state negativity from the run's table.
pub fn quantify_memory(run: &MemoryProtocolRun, opts: &SolveOptions) -> Result<(f64, SdpSolution)> {
    mdi_quantify_memory(
        &MemoryQuantifyInput {
            d_a: run.d_a(),
            d_b: run.d_b(),
            probabilities: &run.probabilities,
            tau_a: &run.tau_a,
            omega_b: &run.omega_b,
        },
        opts,
    )
}

/// Post-selected unnormalized states rho~_i on (A', B') realized by an
/// explicit strategy:
/// rho~_i = d_A² tr_{AB}[(Phi+^{A'A} ⊗ Xi_i)(I^{A'} ⊗ J^{AB} ⊗ I^{B'})].
/// Positive because the channel factor is identity on both kept systems;
/// sums to I ⊗ I over a complete strategy; satisfies
/// tr[rho~_i (tau_s ⊗ omega_t)] = P(i|s,t).
pub fn post_selected_states(
    channel: &ChoiState,
    strategy: &EveStrategy,
) -> Result<Vec<HermitianMatrix>> {
    let d_a = channel.input_dim();
    let d_b = channel.output_dim();
    let omega_b = PartyBasis::new(d_b)?;
    let elements = memory_strategy_elements(strategy, d_b, &omega_b)?;

    // Space ordering (A', A, B, B').
    let dims_full = DimList::new(vec![d_a, d_a, d_b, d_b])?;
    let phi = crate::quantum::max_entangled(d_a);
    let background = kron(
        &ComplexMatrix::identity(d_a),
        &kron(channel.matrix(), &ComplexMatrix::identity(d_b)),
    );
    let pair_dims = DimList::pair(d_b, d_b);
    let mut out = Vec::with_capacity(elements.len());
    for e in &elements {
        // Measurement element lives on (B', B); reorder to (B, B').
        let e_bb = crate::mat::permute_systems(e, &pair_dims, &[1, 0])?;
        let x = kron(phi.matrix(), &e_bb);
        let prod = x.matmul(&background);
        let reduced = partial_trace(&prod, &dims_full, &[0, 3])?;
        out.push(HermitianMatrix::new_unchecked(
            reduced.scale_re((d_a * d_a) as f64),
        ));
    }
    Ok(out)
}

/// Named channel presets for the CLI-facing zoo.
pub fn channel_preset(name: &str, d: usize, parameter: Option<f64>) -> Result<ChoiState> {
    match name {
        "identity" => Ok(crate::quantum::identity_channel(d)),
        "depolarizing" => {
            let p = parameter.ok_or_else(|| {
                Error::InvalidArgument("depolarizing needs a strength parameter".into())
            })?;
            crate::quantum::depolarizing_channel(d, p)
        }
        "z-measure-prepare" => {
            if d != 2 {
                return Err(Error::InvalidArgument(
                    "z-measure-prepare is a qubit preset".into(),
                ));
            }
            Ok(crate::quantum::z_measure_prepare_channel())
        }
        "constant" => {
            let sigma = DensityMatrix::maximally_mixed(DimList::single(d));
            Ok(crate::quantum::constant_channel(d, &sigma))
        }
        "bit-flip" => {
            if d != 2 {
                return Err(Error::InvalidArgument("bit-flip is a qubit preset".into()));
            }
            Ok(crate::quantum::bit_flip_channel())
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown channel preset '{}'",
            other
        ))),
    }
}

/// Entanglement-breaking presets used by the acceptance sweeps.
pub fn eb_presets(seed: u64) -> Result<Vec<(String, ChoiState)>> {
    let mut out = Vec::new();
    out.push((
        "z-measure-prepare".to_string(),
        crate::quantum::z_measure_prepare_channel(),
    ));
    out.push((
        "constant-mixed".to_string(),
        crate::quantum::constant_channel(2, &DensityMatrix::maximally_mixed(DimList::single(2))),
    ));
    out.push((
        "constant-random".to_string(),
        crate::quantum::constant_channel(2, &crate::quantum::random_density(2, 2, seed)?),
    ));
    out.push((
        "fully-depolarizing".to_string(),
        crate::quantum::depolarizing_channel(2, 1.0)?,
    ));
    // Random measure-and-prepare channel.
    let povm = crate::quantum::random_povm(&DimList::single(2), 3, seed.wrapping_add(1))?;
    let prepare: Vec<DensityMatrix> = (0..3)
        .map(|i| crate::quantum::random_density(2, 2, seed.wrapping_add(2 + i)))
        .collect::<Result<_>>()?;
    out.push((
        "random-measure-prepare".to_string(),
        crate::quantum::eb_channel(&povm, &prepare)?,
    ));
    Ok(out)
}
