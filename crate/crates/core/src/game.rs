//! The Alice-vs-Eve measurement game.
//!
//! Alice holds the state rho on parties A_1..A_n and prepares trusted
//! ancilla inputs omega_k = tau_k^T on A'_1..A'_n. The joint measurement on
//! each pair is under Eve's control. Internally the measured pair is ordered
//! (ancilla, state) and the full space interleaves pairs:
//! (A'_1, A_1, A'_2, A_2, ...). A faithful generalized Bell measurement on
//! that ordering produces the identity
//! P(i|k) = (1/Omega) tr[(⊗_j U_{i_j} tau_{k_j} U_{i_j}†) rho].

use crate::bases::PartyBasis;
use crate::decomp::ProbabilityTable;
use crate::error::{Error, Result};
use crate::mat::{
    kron_list, partial_trace, permute_systems, unflatten_index, ComplexMatrix, DimList,
    HermitianMatrix, C_ONE,
};
use crate::par::{map_indexed, Parallelism};
use crate::quantum::{random_povm, DensityMatrix, Povm, PSD_TOL};
use crate::rng::{rng_from_seed, split_seed};
use num_complex::Complex64;
use rand::Rng;
use std::sync::Arc;

/// One shared-randomness component of a product strategy: a POVM per party,
/// each on the doubled pair space with d² outcomes.
#[derive(Clone, Debug)]
pub struct ProductComponent {
    pub weight: f64,
    pub povms: Vec<Povm>,
}

/// A POVM element on the joint doubled space with an explicit
/// sum-of-products certificate (one list of per-party factors per term).
#[derive(Clone, Debug)]
pub struct SeparableElement {
    pub matrix: HermitianMatrix,
    pub terms: Vec<Vec<ComplexMatrix>>,
}

impl SeparableElement {
    /// Residual of the certificate reassembly.
    pub fn reassembly_residual(&self) -> f64 {
        let n = self.matrix.dim();
        let mut acc = ComplexMatrix::zeros(n, n);
        for term in &self.terms {
            let refs: Vec<&ComplexMatrix> = term.iter().collect();
            acc.add_assign_scaled(&kron_list(&refs), C_ONE);
        }
        (&acc - self.matrix.matrix()).frobenius_norm()
    }
}

/// Eve's measurement model.
#[derive(Clone, Debug)]
pub enum EveStrategy {
    /// The generalized Bell measurements Alice intends.
    Faithful,
    /// Trivial POVMs: outcomes drawn uniformly, state discarded.
    Trivial,
    /// Mixture of per-party POVMs coordinated by shared randomness.
    ProductLosr(Vec<ProductComponent>),
    /// A single separable POVM on the joint doubled space; every element
    /// carries a sum-of-products certificate.
    Separable(Vec<SeparableElement>),
}

pub const CERT_REASSEMBLY_TOL: f64 = 1e-9;

impl EveStrategy {
    /// Validates the strategy against party dimensions.
    pub fn validate(&self, dims: &DimList) -> Result<()> {
        match self {
            EveStrategy::Faithful | EveStrategy::Trivial => Ok(()),
            EveStrategy::ProductLosr(components) => {
                if components.is_empty() {
                    return Err(Error::InvalidArgument("empty strategy mixture".into()));
                }
                let wsum: f64 = components.iter().map(|c| c.weight).sum();
                if (wsum - 1.0).abs() > 1e-9 || components.iter().any(|c| c.weight < -1e-12) {
                    return Err(Error::InvalidArgument(
                        "strategy weights must form a probability distribution".into(),
                    ));
                }
                for comp in components {
                    if comp.povms.len() != dims.len() {
                        return Err(Error::DimMismatch(format!(
                            "component has {} POVMs for {} parties",
                            comp.povms.len(),
                            dims.len()
                        )));
                    }
                    for (p, povm) in comp.povms.iter().enumerate() {
                        let d = dims.dim(p);
                        if povm.dims().total() != d * d {
                            return Err(Error::DimMismatch(format!(
                                "party {} POVM acts on dimension {} but the pair space has {}",
                                p,
                                povm.dims().total(),
                                d * d
                            )));
                        }
                        if povm.len() != d * d {
                            return Err(Error::DimMismatch(format!(
                                "party {} POVM has {} outcomes, expected {}",
                                p,
                                povm.len(),
                                d * d
                            )));
                        }
                    }
                }
                Ok(())
            }
            EveStrategy::Separable(elements) => {
                let expected: usize = dims.setting_count();
                if elements.len() != expected {
                    return Err(Error::DimMismatch(format!(
                        "separable strategy has {} elements, expected {}",
                        elements.len(),
                        expected
                    )));
                }
                let total: usize = dims.dims().iter().map(|&d| d * d).product();
                let mut sum = ComplexMatrix::zeros(total, total);
                for el in elements {
                    if el.matrix.dim() != total {
                        return Err(Error::DimMismatch(
                            "separable element has wrong dimension".into(),
                        ));
                    }
                    if el.matrix.min_eigenvalue() < -PSD_TOL {
                        return Err(Error::NotPsd {
                            min_eig: el.matrix.min_eigenvalue(),
                        });
                    }
                    if el.reassembly_residual() > CERT_REASSEMBLY_TOL {
                        return Err(Error::InvalidArgument(format!(
                            "separable certificate residual {:.3e}",
                            el.reassembly_residual()
                        )));
                    }
                    sum.add_assign_scaled(el.matrix.matrix(), C_ONE);
                }
                let dev = sum.max_abs_diff(&ComplexMatrix::identity(total));
                if dev > 1e-9 {
                    return Err(Error::IncompletePovm { deviation: dev });
                }
                Ok(())
            }
        }
    }
}

pub fn faithful_strategy() -> EveStrategy {
    EveStrategy::Faithful
}

pub fn trivial_strategy() -> EveStrategy {
    EveStrategy::Trivial
}

/// The faithful Bell measurements written out as a single-component
/// ProductLosr strategy (useful for identity checks on sigma_Eve).
pub fn faithful_as_product(dims: &DimList) -> Result<EveStrategy> {
    let mut povms = Vec::with_capacity(dims.len());
    for &d in dims.dims() {
        let pb = PartyBasis::new(d)?;
        let elements = pb.bell.projectors().to_vec();
        povms.push(Povm::new_unchecked(DimList::pair(d, d), elements));
    }
    Ok(EveStrategy::ProductLosr(vec![ProductComponent {
        weight: 1.0,
        povms,
    }]))
}

/// Trivial strategy as explicit product POVMs with elements I/d².
pub fn trivial_as_product(dims: &DimList) -> EveStrategy {
    let povms = dims
        .dims()
        .iter()
        .map(|&d| {
            let n = d * d;
            let element = HermitianMatrix::new_unchecked(
                ComplexMatrix::identity(n).scale_re(1.0 / n as f64),
            );
            Povm::new_unchecked(DimList::pair(d, d), vec![element; n])
        })
        .collect();
    EveStrategy::ProductLosr(vec![ProductComponent {
        weight: 1.0,
        povms,
    }])
}

/// Random mixture of per-party random POVMs.
pub fn random_losr_strategy(dims: &DimList, n_components: usize, seed: u64) -> Result<EveStrategy> {
    if n_components == 0 {
        return Err(Error::InvalidArgument("need at least one component".into()));
    }
    let mut rng = rng_from_seed(split_seed(seed, 0xE0E));
    let mut weights: Vec<f64> = (0..n_components)
        .map(|_| -(rng.gen::<f64>().max(1e-12)).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let mut components = Vec::with_capacity(n_components);
    for (c, &weight) in weights.iter().enumerate() {
        let mut povms = Vec::with_capacity(dims.len());
        for (p, &d) in dims.dims().iter().enumerate() {
            let povm_seed = split_seed(seed, (c * dims.len() + p) as u64 + 31);
            povms.push(random_povm(&DimList::pair(d, d), d * d, povm_seed)?);
        }
        components.push(ProductComponent { weight, povms });
    }
    let strategy = EveStrategy::ProductLosr(components);
    strategy.validate(dims)?;
    Ok(strategy)
}

/// Random separable strategy: shared randomness selects per-party POVMs and
/// a joint outcome relabeling. Collecting local outcomes and reporting a
/// jointly relabeled tuple requires classical communication, which is
/// exactly the extra power separable measurements model; each element keeps
/// its sum-of-products certificate.
pub fn random_separable_strategy(dims: &DimList, components: usize, seed: u64) -> Result<EveStrategy> {
    if components == 0 {
        return Err(Error::InvalidArgument("need at least one component".into()));
    }
    let n_outcomes: usize = dims.setting_count();
    let side: Vec<usize> = dims.dims().iter().map(|&d| d * d).collect();
    let mut rng = rng_from_seed(split_seed(seed, 0x5EB));
    let mut weights: Vec<f64> = (0..components)
        .map(|_| -(rng.gen::<f64>().max(1e-12)).ln())
        .collect();
    let total_w: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total_w;
    }

    let joint_dim: usize = side.iter().product();
    let mut term_lists: Vec<Vec<Vec<ComplexMatrix>>> = vec![Vec::new(); n_outcomes];
    for (c, &weight) in weights.iter().enumerate() {
        let povms: Vec<Povm> = dims
            .dims()
            .iter()
            .enumerate()
            .map(|(p, &d)| {
                random_povm(
                    &DimList::pair(d, d),
                    d * d,
                    split_seed(seed, (c * dims.len() + p) as u64 + 101),
                )
            })
            .collect::<Result<_>>()?;
        // Random joint relabeling of outcome tuples.
        let relabel: Vec<usize> = (0..n_outcomes)
            .map(|_| rng.gen_range(0..n_outcomes))
            .collect();
        for o_flat in 0..n_outcomes {
            let o_idx = unflatten_index(o_flat, &side);
            let reported = relabel[o_flat];
            let factors: Vec<ComplexMatrix> = o_idx
                .iter()
                .enumerate()
                .map(|(p, &o)| povms[p].element(o).matrix().scale_re(1.0))
                .collect();
            // Fold the component weight into the first factor.
            let mut factors = factors;
            factors[0] = factors[0].scale_re(weight);
            term_lists[reported].push(factors);
        }
    }

    let elements: Vec<SeparableElement> = term_lists
        .into_iter()
        .map(|terms| {
            let mut acc = ComplexMatrix::zeros(joint_dim, joint_dim);
            for term in &terms {
                let refs: Vec<&ComplexMatrix> = term.iter().collect();
                acc.add_assign_scaled(&kron_list(&refs), C_ONE);
            }
            SeparableElement {
                matrix: HermitianMatrix::new_unchecked(acc),
                terms,
            }
        })
        .collect();
    let strategy = EveStrategy::Separable(elements);
    strategy.validate(dims)?;
    Ok(strategy)
}

/// Permutation sending the build order (A'_1..A'_n, A_1..A_n) to the
/// interleaved order (A'_1, A_1, A'_2, A_2, ...).
fn interleave_perm(n: usize) -> Vec<usize> {
    let mut perm = Vec::with_capacity(2 * n);
    for j in 0..n {
        perm.push(j); // ancilla A'_j
        perm.push(n + j); // state party A_j
    }
    perm
}

/// Dimensions of the full doubled space in build order.
fn doubled_dims(dims: &DimList) -> DimList {
    let mut v: Vec<usize> = dims.dims().to_vec();
    v.extend_from_slice(dims.dims());
    DimList::new(v).expect("doubled dims valid")
}

/// Assembles the POVM elements of a strategy on the interleaved doubled
/// space, indexed by the flat outcome tuple.
fn strategy_elements(
    strategy: &EveStrategy,
    dims: &DimList,
    bases: &[Arc<PartyBasis>],
) -> Result<Option<Vec<ComplexMatrix>>> {
    let side: Vec<usize> = dims.dims().iter().map(|&d| d * d).collect();
    let n_outcomes: usize = side.iter().product();
    match strategy {
        EveStrategy::Trivial => Ok(None),
        EveStrategy::Faithful => {
            let mut elements = Vec::with_capacity(n_outcomes);
            for i_flat in 0..n_outcomes {
                let idx = unflatten_index(i_flat, &side);
                let factors: Vec<&ComplexMatrix> = idx
                    .iter()
                    .enumerate()
                    .map(|(p, &i)| bases[p].bell.projector(i).matrix())
                    .collect();
                elements.push(kron_list(&factors));
            }
            Ok(Some(elements))
        }
        EveStrategy::ProductLosr(components) => {
            let mut elements = vec![
                ComplexMatrix::zeros(
                    side.iter().product::<usize>(),
                    side.iter().product::<usize>()
                );
                n_outcomes
            ];
            for comp in components {
                for (i_flat, element) in elements.iter_mut().enumerate() {
                    let idx = unflatten_index(i_flat, &side);
                    let factors: Vec<&ComplexMatrix> = idx
                        .iter()
                        .enumerate()
                        .map(|(p, &i)| comp.povms[p].element(i).matrix())
                        .collect();
                    element.add_assign_scaled(
                        &kron_list(&factors),
                        Complex64::new(comp.weight, 0.0),
                    );
                }
            }
            Ok(Some(elements))
        }
        EveStrategy::Separable(els) => {
            Ok(Some(els.iter().map(|e| e.matrix.matrix().clone()).collect()))
        }
    }
}

/// Runs the protocol and returns the exact Born-rule table P(i|k).
pub fn run_protocol(
    rho: &DensityMatrix,
    inputs: &[Arc<PartyBasis>],
    strategy: &EveStrategy,
) -> Result<ProbabilityTable> {
    run_protocol_with(rho, inputs, strategy, Parallelism::default())
}

/// As [`run_protocol`] with an explicit execution mode.
pub fn run_protocol_with(
    rho: &DensityMatrix,
    inputs: &[Arc<PartyBasis>],
    strategy: &EveStrategy,
    mode: Parallelism,
) -> Result<ProbabilityTable> {
    let dims = rho.dims().clone();
    if inputs.len() != dims.len() {
        return Err(Error::DimMismatch(format!(
            "{} input sets for {} parties",
            inputs.len(),
            dims.len()
        )));
    }
    for (p, pb) in inputs.iter().enumerate() {
        if pb.dim() != dims.dim(p) {
            return Err(Error::DimMismatch(format!(
                "input set on party {} has dimension {}, state has {}",
                p,
                pb.dim(),
                dims.dim(p)
            )));
        }
    }
    strategy.validate(&dims)?;

    let side: Vec<usize> = dims.dims().iter().map(|&d| d * d).collect();
    let n_inputs: usize = side.iter().product();
    let n_outcomes = n_inputs;

    if matches!(strategy, EveStrategy::Trivial) {
        return Ok(ProbabilityTable::uniform(dims));
    }

    let elements = strategy_elements(strategy, &dims, inputs)?
        .expect("non-trivial strategies produce explicit elements");

    let n = dims.len();
    let perm = interleave_perm(n);
    let build_dims = doubled_dims(&dims);

    let rows = map_indexed(mode, n_inputs, |k_flat| -> Result<Vec<f64>> {
        let k_idx = unflatten_index(k_flat, &side);
        // omega_k = tau_k^T on each ancilla, build order (ancillas, state).
        let omegas: Vec<ComplexMatrix> = k_idx
            .iter()
            .enumerate()
            .map(|(p, &k)| inputs[p].states.state(k).matrix().transpose())
            .collect();
        let mut refs: Vec<&ComplexMatrix> = omegas.iter().collect();
        refs.push(rho.matrix());
        let assembled = kron_list(&refs);
        let interleaved = permute_systems(&assembled, &build_dims, &perm)?;
        let mut row: Vec<f64> = elements
            .iter()
            .map(|e| e.trace_product(&interleaved).re.clamp(0.0, 1.0))
            .collect();
        // Renormalize away round-off so rows sum to exactly one.
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > crate::decomp::TABLE_ROW_TOL {
            return Err(Error::InvalidTable(format!(
                "row {} sums to {} before normalization",
                k_flat, sum
            )));
        }
        let last = row.len() - 1;
        let partial: f64 = row[..last].iter().sum();
        row[last] = (1.0 - partial).max(0.0);
        Ok(row)
    });

    let mut entries = Vec::with_capacity(n_inputs * n_outcomes);
    for row in rows {
        entries.extend(row?);
    }
    ProbabilityTable::new(dims, side, entries)
}

/// The equivalent state sigma_Eve realized by a product strategy: the MDI
/// value of any decomposed observable W against the strategy's table equals
/// tr(W sigma_Eve^T) / Omega. sigma_Eve is reachable from rho by LOSR.
pub fn eve_equivalent_state(rho: &DensityMatrix, strategy: &EveStrategy) -> Result<DensityMatrix> {
    let dims = rho.dims().clone();
    let components: Vec<ProductComponent> = match strategy {
        EveStrategy::ProductLosr(c) => c.clone(),
        EveStrategy::Faithful => match faithful_as_product(&dims)? {
            EveStrategy::ProductLosr(c) => c,
            _ => unreachable!(),
        },
        EveStrategy::Trivial => match trivial_as_product(&dims) {
            EveStrategy::ProductLosr(c) => c,
            _ => unreachable!(),
        },
        EveStrategy::Separable(_) => {
            return Err(Error::InvalidArgument(
                "sigma_Eve construction requires a product strategy".into(),
            ))
        }
    };
    strategy.validate(&dims)?;

    let bases: Vec<Arc<PartyBasis>> = dims
        .dims()
        .iter()
        .map(|&d| PartyBasis::new(d).map(Arc::new))
        .collect::<Result<_>>()?;

    let n = dims.len();
    let side: Vec<usize> = dims.dims().iter().map(|&d| d * d).collect();
    let n_outcomes: usize = side.iter().product();
    let total = dims.total();
    let perm = interleave_perm(n);
    let build_dims = doubled_dims(&dims);

    // (⊗ I^{A'}) ⊗ rho in build order, then interleaved.
    let eye_ancillas: Vec<ComplexMatrix> = dims
        .dims()
        .iter()
        .map(|&d| ComplexMatrix::identity(d))
        .collect();
    let mut refs: Vec<&ComplexMatrix> = eye_ancillas.iter().collect();
    refs.push(rho.matrix());
    let background = permute_systems(&kron_list(&refs), &build_dims, &perm)?;

    // Interleaved dims and the ancilla positions to keep after tracing.
    let inter_dims = DimList::new(
        dims.dims()
            .iter()
            .flat_map(|&d| [d, d])
            .collect::<Vec<usize>>(),
    )?;
    let ancilla_slots: Vec<usize> = (0..n).map(|j| 2 * j).collect();

    let mut sigma = ComplexMatrix::zeros(total, total);
    for comp in &components {
        for i_flat in 0..n_outcomes {
            let idx = unflatten_index(i_flat, &side);
            // Pair blocks kron in interleaved order already.
            let factors: Vec<&ComplexMatrix> = idx
                .iter()
                .enumerate()
                .map(|(p, &i)| comp.povms[p].element(i).matrix())
                .collect();
            let assembled = kron_list(&factors);
            let product = assembled.matmul(&background);
            let reduced = partial_trace(&product, &inter_dims, &ancilla_slots)?;
            // Conjugate by ⊗ U_i^* on the ancilla side.
            let conj_factors: Vec<ComplexMatrix> = idx
                .iter()
                .enumerate()
                .map(|(p, &i)| bases[p].hw.unitary(i).conjugate())
                .collect();
            let conj_refs: Vec<&ComplexMatrix> = conj_factors.iter().collect();
            let u_conj = kron_list(&conj_refs);
            let rotated = u_conj.matmul(&reduced).matmul(&u_conj.adjoint());
            sigma.add_assign_scaled(&rotated, Complex64::new(comp.weight, 0.0));
        }
    }
    // Normalize by Omega so sigma_Eve is a density matrix.
    let sigma = sigma.scale_re(1.0 / dims.omega());
    DensityMatrix::new(dims, sigma)
}

/// Post-selected unnormalized states on the ancilla systems for a
/// deterministic product POVM: rho~_i = tr_A[(⊗ Pi_i)(⊗ I ⊗ rho)]. Their
/// traces sum to Omega, and the post-selection inequality bounds the
/// negativity of rho from below by (1/Omega) sum_i N(rho~_i).
pub fn lemma3_post_selected_states(
    rho: &DensityMatrix,
    povms: &[Povm],
) -> Result<Vec<HermitianMatrix>> {
    let dims = rho.dims().clone();
    if povms.len() != dims.len() {
        return Err(Error::DimMismatch(format!(
            "{} POVMs for {} parties",
            povms.len(),
            dims.len()
        )));
    }
    let n = dims.len();
    let side: Vec<usize> = dims.dims().iter().map(|&d| d * d).collect();
    let n_outcomes: usize = side.iter().product();
    let perm = interleave_perm(n);
    let build_dims = doubled_dims(&dims);

    let eye_ancillas: Vec<ComplexMatrix> = dims
        .dims()
        .iter()
        .map(|&d| ComplexMatrix::identity(d))
        .collect();
    let mut refs: Vec<&ComplexMatrix> = eye_ancillas.iter().collect();
    refs.push(rho.matrix());
    let background = permute_systems(&kron_list(&refs), &build_dims, &perm)?;

    let inter_dims = DimList::new(
        dims.dims()
            .iter()
            .flat_map(|&d| [d, d])
            .collect::<Vec<usize>>(),
    )?;
    let ancilla_slots: Vec<usize> = (0..n).map(|j| 2 * j).collect();

    let mut out = Vec::with_capacity(n_outcomes);
    for i_flat in 0..n_outcomes {
        let idx = unflatten_index(i_flat, &side);
        let factors: Vec<&ComplexMatrix> = idx
            .iter()
            .enumerate()
            .map(|(p, &i)| povms[p].element(i).matrix())
            .collect();
        let assembled = kron_list(&factors);
        let product = assembled.matmul(&background);
        let reduced = partial_trace(&product, &inter_dims, &ancilla_slots)?;
        out.push(HermitianMatrix::new_unchecked(reduced));
    }
    Ok(out)
}

/// Draws an empirical table: `shots_per_setting` multinomial samples per
/// input row. Rows sum to one exactly.
pub fn sample_table(
    table: &ProbabilityTable,
    shots_per_setting: usize,
    seed: u64,
) -> Result<ProbabilityTable> {
    if shots_per_setting == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    let n_outcomes = table.outcome_count();
    let mut entries = Vec::with_capacity(table.entries().len());
    for k in 0..table.input_count() {
        let mut rng = rng_from_seed(split_seed(seed, k as u64));
        let row = table.row(k);
        let mut counts = vec![0usize; n_outcomes];
        for _ in 0..shots_per_setting {
            let x: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = n_outcomes - 1;
            for (i, &p) in row.iter().enumerate() {
                acc += p;
                if x < acc {
                    chosen = i;
                    break;
                }
            }
            counts[chosen] += 1;
        }
        let mut freq: Vec<f64> = counts
            .iter()
            .map(|&c| c as f64 / shots_per_setting as f64)
            .collect();
        let partial: f64 = freq[..n_outcomes - 1].iter().sum();
        freq[n_outcomes - 1] = (1.0 - partial).max(0.0);
        entries.extend(freq);
    }
    ProbabilityTable::new(
        table.dims().clone(),
        table.outcome_sizes().to_vec(),
        entries,
    )
}

/// Faithful-table oracle: P(i|k) = (1/Omega) tr[(⊗ U tau U†) rho]. Used by
/// tests as the independent route against the Born-rule simulator.
pub fn faithful_table_oracle(
    rho: &DensityMatrix,
    inputs: &[Arc<PartyBasis>],
) -> Result<ProbabilityTable> {
    let dims = rho.dims().clone();
    let side: Vec<usize> = dims.dims().iter().map(|&d| d * d).collect();
    let n_settings: usize = side.iter().product();
    let omega = dims.omega();
    let mut entries = vec![0.0f64; n_settings * n_settings];
    for k_flat in 0..n_settings {
        let k_idx = unflatten_index(k_flat, &side);
        for i_flat in 0..n_settings {
            let i_idx = unflatten_index(i_flat, &side);
            let factors: Vec<ComplexMatrix> = k_idx
                .iter()
                .zip(i_idx.iter())
                .enumerate()
                .map(|(p, (&k, &i))| {
                    let u = inputs[p].hw.unitary(i);
                    u.matmul(inputs[p].states.state(k).matrix()).matmul(&u.adjoint())
                })
                .collect();
            let refs: Vec<&ComplexMatrix> = factors.iter().collect();
            let obs = kron_list(&refs);
            entries[k_flat * n_settings + i_flat] =
                (obs.trace_product(rho.matrix()).re / omega).clamp(0.0, 1.0);
        }
        let base = k_flat * n_settings;
        let partial: f64 = entries[base..base + n_settings - 1].iter().sum();
        entries[base + n_settings - 1] = (1.0 - partial).max(0.0);
    }
    ProbabilityTable::new(dims, side, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::LocalDecomposition;
    use crate::quantum::{max_entangled, random_density_multi, random_separable};

    fn qubit_inputs(n: usize) -> Vec<Arc<PartyBasis>> {
        (0..n)
            .map(|_| Arc::new(PartyBasis::new(2).unwrap()))
            .collect()
    }

    fn bell_witness() -> HermitianMatrix {
        let mut m = ComplexMatrix::identity(4).scale_re(0.5);
        m.add_assign_scaled(max_entangled(2).matrix(), Complex64::new(-1.0, 0.0));
        HermitianMatrix::new_unchecked(m)
    }

    #[test]
    fn faithful_first_entry_matches_hand_value() {
        let rho = max_entangled(2);
        let table = run_protocol(&rho, &qubit_inputs(2), &EveStrategy::Faithful).unwrap();
        // P((0,0)|(0,0)) = tr[(Pi0 ⊗ Pi0)(Phi+ ⊗ tau0 ⊗ tau0)] = 1/16.
        assert!((table.entry(&[0, 0], &[0, 0]) - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_strategy_gives_uniform_table() {
        let rho = random_density_multi(&DimList::pair(2, 2), 3);
        let table = run_protocol(&rho, &qubit_inputs(2), &EveStrategy::Trivial).unwrap();
        for &e in table.entries() {
            assert!((e - 1.0 / 16.0).abs() < 1e-15);
        }
        // The explicit product form reproduces it exactly.
        let explicit = trivial_as_product(rho.dims());
        let table2 = run_protocol(&rho, &qubit_inputs(2), &explicit).unwrap();
        for &e in table2.entries() {
            assert!((e - 1.0 / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn faithful_table_matches_rotation_identity() {
        let rho = random_density_multi(&DimList::pair(2, 2), 9);
        let inputs = qubit_inputs(2);
        let table = run_protocol(&rho, &inputs, &EveStrategy::Faithful).unwrap();
        let oracle = faithful_table_oracle(&rho, &inputs).unwrap();
        for (a, b) in table.entries().iter().zip(oracle.entries().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn completeness_on_faithful_table() {
        let dims = DimList::pair(2, 2);
        let inputs = qubit_inputs(2);
        let w = bell_witness();
        let dec = LocalDecomposition::decompose(&w, &dims).unwrap();
        let rho = max_entangled(2);
        let table = run_protocol(&rho, &inputs, &EveStrategy::Faithful).unwrap();
        let value = dec.mdi_value(&table).unwrap();
        // tr(W Phi+) / Omega = (-1/2)/4.
        assert!((value + 0.125).abs() < 1e-11);
    }

    #[test]
    fn slices_agree_under_faithfulness() {
        let dims = DimList::pair(2, 2);
        let inputs = qubit_inputs(2);
        let dec = LocalDecomposition::decompose(&bell_witness(), &dims).unwrap();
        let rho = random_density_multi(&dims, 4);
        let table = run_protocol(&rho, &inputs, &EveStrategy::Faithful).unwrap();
        let value = dec.mdi_value(&table).unwrap();
        for slice in dec.mdi_value_slices(&table).unwrap() {
            assert!((slice - value).abs() < 1e-9);
        }
    }

    #[test]
    fn random_strategies_validate() {
        let dims = DimList::pair(2, 2);
        let losr = random_losr_strategy(&dims, 3, 5).unwrap();
        losr.validate(&dims).unwrap();
        let sep = random_separable_strategy(&dims, 2, 6).unwrap();
        sep.validate(&dims).unwrap();
        if let EveStrategy::Separable(els) = &sep {
            for el in els {
                assert!(el.reassembly_residual() < 1e-9);
            }
        }
    }

    #[test]
    fn sigma_eve_faithful_reproduces_rho() {
        let rho = random_density_multi(&DimList::pair(2, 2), 12);
        let sigma = eve_equivalent_state(&rho, &EveStrategy::Faithful).unwrap();
        // For the faithful strategy sigma_Eve = rho^T.
        assert!(sigma.matrix().max_abs_diff(&rho.matrix().transpose()) < 1e-10);
    }

    #[test]
    fn sigma_eve_trivial_is_maximally_mixed() {
        let rho = random_density_multi(&DimList::pair(2, 2), 13);
        let sigma = eve_equivalent_state(&rho, &EveStrategy::Trivial).unwrap();
        let expected = ComplexMatrix::identity(4).scale_re(0.25);
        assert!(sigma.matrix().max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn sigma_eve_identity_links_table_and_state() {
        let dims = DimList::pair(2, 2);
        let inputs = qubit_inputs(2);
        let dec = LocalDecomposition::decompose(&bell_witness(), &dims).unwrap();
        let rho = random_density_multi(&dims, 21);
        let strategy = random_losr_strategy(&dims, 2, 22).unwrap();
        let table = run_protocol(&rho, &inputs, &strategy).unwrap();
        let value = dec.mdi_value(&table).unwrap();
        let sigma = eve_equivalent_state(&rho, &strategy).unwrap();
        let direct = dec.operator().expectation(&sigma.matrix().transpose());
        assert!((dims.omega() * value - direct).abs() < 1e-9);
    }

    #[test]
    fn sigma_eve_ppt_for_separable_input() {
        let dims = DimList::pair(2, 2);
        let (rho, _cert) = random_separable(&dims, 3, 31).unwrap();
        let strategy = random_losr_strategy(&dims, 2, 32).unwrap();
        let sigma = eve_equivalent_state(&rho, &strategy).unwrap();
        assert!(sigma.ppt_min_eigenvalue(&[1]).unwrap() > -1e-10);
    }

    #[test]
    fn sampling_behaviour() {
        let rho = max_entangled(2);
        let inputs = qubit_inputs(2);
        let table = run_protocol(&rho, &inputs, &EveStrategy::Faithful).unwrap();
        // shots = 1: every row is an indicator.
        let one = sample_table(&table, 1, 3).unwrap();
        for k in 0..one.input_count() {
            let row = one.row(k);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert_eq!(row.iter().filter(|&&p| p > 0.0).count(), 1);
        }
        // Fixed seed reproduces bit-identically.
        let a = sample_table(&table, 100, 7).unwrap();
        let b = sample_table(&table, 100, 7).unwrap();
        assert_eq!(a.entries(), b.entries());
        // Large shot counts concentrate.
        let big = sample_table(&table, 1_000_000, 11).unwrap();
        let max_dev = big
            .entries()
            .iter()
            .zip(table.entries().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_dev < 5e-3, "max deviation {}", max_dev);
    }
}
