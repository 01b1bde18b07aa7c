//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `--nocapture` to see them all).

use mdi_core::bases::PartyBasis;
use mdi_core::decomp::{LocalDecomposition, ProbabilityTable};
use mdi_core::game::{
    eve_equivalent_state, lemma3_post_selected_states, run_protocol, random_losr_strategy,
    random_separable_strategy, EveStrategy,
};
use mdi_core::mat::{ComplexMatrix, DimList, HermitianMatrix};
use mdi_core::memory::{
    eb_presets, memory_mdi_value, quantify_memory, run_memory_protocol,
};
use mdi_core::par::Parallelism;
use mdi_core::qkd::{error_rates, key_rate, quantumness_bound, run_qkd};
use mdi_core::quantum::{
    apply_channel, identity_channel, kraus_from_choi, max_entangled, random_channel,
    random_density, random_density_multi, random_ginibre, random_separable, random_unitary,
    werner_phi_plus, ChoiState, DensityMatrix,
};
use mdi_core::rng::{rng_from_seed, split_seed};
use mdi_core::sdp::{
    mdi_quantify_state, negativity, robustness_ppt, SolveOptions, SolveStatus,
};
use mdi_core::witness::{
    bell_overlap_witness, bound_fopt, bound_ftr, multicopy_mdi_with_decomposition, swap_witness,
    transpose_map_nonlinear, NonlinearDecomposed, Witness,
};
use num_complex::Complex64;
use std::sync::Arc;

fn verdict(name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {:<2} {}: {}",
        name,
        if pass { "PASS" } else { "FAIL" },
        detail
    );
    assert!(pass, "criterion {} failed: {}", name, detail);
}

fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
    HermitianMatrix::new_unchecked(random_ginibre(n, n, &mut rng_from_seed(seed)))
}

fn party_inputs(dims: &DimList) -> Vec<Arc<PartyBasis>> {
    dims.dims()
        .iter()
        .map(|&d| Arc::new(PartyBasis::new(d).unwrap()))
        .collect()
}

// ----- criterion 1: golden qutrit transform fixtures ---------------------

#[test]
fn criterion_01_golden_qutrit_transforms() {
    let worst = mdi_core::bases::qutrit_reference::max_deviation().unwrap();
    verdict(
        "1",
        worst <= 1e-12,
        &format!(
            "18 golden transform matrices, worst entry deviation {:.3e}",
            worst
        ),
    );
}

// ----- criterion 2: decomposition reconstruction --------------------------

#[test]
fn criterion_02_reconstruction() {
    let configs = [vec![2usize, 2], vec![3, 3], vec![2, 2, 2]];
    let mut worst_rel: f64 = 0.0;
    for (ci, cfg) in configs.iter().enumerate() {
        let dims = DimList::new(cfg.clone()).unwrap();
        let total = dims.total();
        let side: Vec<usize> = cfg.iter().map(|&d| d * d).collect();
        for trial in 0..100u64 {
            let seed = split_seed(1000 + ci as u64, trial);
            let w = random_hermitian(total, seed);
            let dec = LocalDecomposition::decompose(&w, &dims).unwrap();
            let scale = w.matrix().frobenius_norm().max(1.0);
            let r = dec
                .verify_reconstruction(dec.base_coefficients(), None)
                .unwrap();
            worst_rel = worst_rel.max(r / scale);
            let mut rng = rng_from_seed(split_seed(seed, 77));
            for _ in 0..10 {
                use rand::Rng;
                let setting: Vec<usize> =
                    side.iter().map(|&s| rng.gen_range(0..s)).collect();
                let coeffs = dec.setting_coefficients(&setting).unwrap();
                let r = dec.verify_reconstruction(&coeffs, Some(&setting)).unwrap();
                worst_rel = worst_rel.max(r / scale);
            }
        }
    }
    verdict(
        "2",
        worst_rel <= 1e-9,
        &format!(
            "300 observables x (base + 10 settings), worst relative residual {:.3e}",
            worst_rel
        ),
    );
}

// ----- criterion 3: completeness ------------------------------------------

#[test]
fn criterion_03_completeness() {
    let configs = [vec![2usize, 2], vec![3, 3], vec![2, 2, 2]];
    let mut worst: f64 = 0.0;
    for (ci, cfg) in configs.iter().enumerate() {
        let dims = DimList::new(cfg.clone()).unwrap();
        let inputs = party_inputs(&dims);
        let deviations = mdi_core::par::map_indexed(Parallelism::default(), 100, |trial| {
            let seed = split_seed(2000 + ci as u64, trial as u64);
            let w = random_hermitian(dims.total(), seed);
            let rho = random_density_multi(&dims, split_seed(seed, 1));
            let dec = LocalDecomposition::decompose(&w, &dims).unwrap();
            let table = run_protocol(&rho, &inputs, &EveStrategy::Faithful).unwrap();
            let value = dims.omega() * dec.mdi_value(&table).unwrap();
            (value - rho.expectation(&w)).abs()
        });
        for d in deviations {
            worst = worst.max(d);
        }
    }
    verdict(
        "3",
        worst <= 1e-9,
        &format!("300 faithful (W, rho) pairs, worst |Omega I - tr(W rho)| = {:.3e}", worst),
    );
}

// ----- criterion 4: soundness ---------------------------------------------

#[test]
fn criterion_04_soundness() {
    let mut min_value = f64::INFINITY;

    // 2 ⊗ 2: 1000 trials alternating ProductLosr and Separable.
    {
        let dims = DimList::pair(2, 2);
        let inputs = party_inputs(&dims);
        let w = bell_overlap_witness(2);
        let dec = LocalDecomposition::decompose(w.operator(), &dims).unwrap();
        let values = mdi_core::par::map_indexed(Parallelism::default(), 1000, |trial| {
            let seed = split_seed(3000, trial as u64);
            let (rho, cert) = random_separable(&dims, 1 + trial % 4, seed).unwrap();
            cert.verify(&rho, 1e-9).unwrap();
            let strategy = if trial % 2 == 0 {
                random_losr_strategy(&dims, 1 + trial % 3, split_seed(seed, 5)).unwrap()
            } else {
                random_separable_strategy(&dims, 1 + trial % 3, split_seed(seed, 6)).unwrap()
            };
            let table = run_protocol(&rho, &inputs, &strategy).unwrap();
            dims.omega() * dec.mdi_value(&table).unwrap()
        });
        for v in values {
            min_value = min_value.min(v);
        }
    }

    // 3 ⊗ 3: 100 trials.
    {
        let dims = DimList::pair(3, 3);
        let inputs = party_inputs(&dims);
        let w = bell_overlap_witness(3);
        let dec = LocalDecomposition::decompose(w.operator(), &dims).unwrap();
        let values = mdi_core::par::map_indexed(Parallelism::default(), 100, |trial| {
            let seed = split_seed(3100, trial as u64);
            let (rho, _) = random_separable(&dims, 1 + trial % 4, seed).unwrap();
            let strategy = if trial % 2 == 0 {
                random_losr_strategy(&dims, 1 + trial % 2, split_seed(seed, 5)).unwrap()
            } else {
                random_separable_strategy(&dims, 1 + trial % 2, split_seed(seed, 6)).unwrap()
            };
            let table = run_protocol(&rho, &inputs, &strategy).unwrap();
            dims.omega() * dec.mdi_value(&table).unwrap()
        });
        for v in values {
            min_value = min_value.min(v);
        }
    }

    verdict(
        "4",
        min_value >= -1e-8,
        &format!("1100 adversarial separable trials, min C_MDI = {:.3e}", min_value),
    );
}

// ----- criterion 5: sigma_Eve identity -------------------------------------

#[test]
fn criterion_05_sigma_eve_identity() {
    let dims = DimList::pair(2, 2);
    let inputs = party_inputs(&dims);
    let mut worst: f64 = 0.0;
    for trial in 0..100u64 {
        let seed = split_seed(4000, trial);
        let rho = random_density_multi(&dims, seed);
        let strategy = random_losr_strategy(&dims, 1 + (trial % 3) as usize, split_seed(seed, 2))
            .unwrap();
        let w = random_hermitian(4, split_seed(seed, 3));
        let dec = LocalDecomposition::decompose(&w, &dims).unwrap();
        let table = run_protocol(&rho, &inputs, &strategy).unwrap();
        let value = dims.omega() * dec.mdi_value(&table).unwrap();
        let sigma = eve_equivalent_state(&rho, &strategy).unwrap();
        let direct = w.expectation(&sigma.matrix().transpose());
        worst = worst.max((value - direct).abs());
    }
    verdict(
        "5",
        worst <= 1e-9,
        &format!("100 (rho, strategy, W) triples, worst |Omega I - tr(W sigma^T)| = {:.3e}", worst),
    );
}

// ----- criterion 6: post-selection inequality -------------------------------

#[test]
fn criterion_06_post_selection_inequality() {
    let dims = DimList::pair(2, 2);
    let mut worst_violation: f64 = f64::NEG_INFINITY;
    for trial in 0..200u64 {
        let seed = split_seed(5000, trial);
        let rho = random_density_multi(&dims, seed);
        let povms: Vec<_> = (0..2)
            .map(|p| {
                mdi_core::quantum::random_povm(
                    &DimList::pair(2, 2),
                    4,
                    split_seed(seed, 10 + p as u64),
                )
                .unwrap()
            })
            .collect();
        let states = lemma3_post_selected_states(&rho, &povms).unwrap();
        let n_rho = negativity(&rho, &[1]).unwrap();
        let mut sum = 0.0;
        for s in &states {
            let pt = mdi_core::mat::partial_transpose(s.matrix(), &dims, 1).unwrap();
            sum += mdi_core::sdp::negativity_of(
                &HermitianMatrix::new_unchecked(pt),
                s.trace_re(),
            );
        }
        let violation = sum / dims.omega() - n_rho;
        worst_violation = worst_violation.max(violation);
    }
    verdict(
        "6",
        worst_violation <= 1e-8,
        &format!(
            "200 instances, max [(1/Omega) sum N(rho~) - N(rho)] = {:.3e}",
            worst_violation
        ),
    );
}

// ----- criterion 7: multicopy witness ---------------------------------------

#[test]
fn criterion_07_multicopy() {
    let w = swap_witness(2, 2);
    let dec = LocalDecomposition::decompose(w.operator(), &w.full_dims()).unwrap();
    let faithful = vec![EveStrategy::Faithful, EveStrategy::Faithful];

    // Faithful value on Phi+.
    let phi = max_entangled(2);
    let v_phi =
        multicopy_mdi_with_decomposition(&dec, &w, &phi, &faithful, Parallelism::default())
            .unwrap();
    let phi_ok = (v_phi + 0.5).abs() <= 1e-9;

    // Zero crossing of the Werner family by bisection on exact tables.
    let eval = |p: f64| -> f64 {
        let rho = werner_phi_plus(2, p).unwrap();
        multicopy_mdi_with_decomposition(&dec, &w, &rho, &faithful, Parallelism::default())
            .unwrap()
    };
    let (mut lo, mut hi) = (0.3f64, 0.9f64);
    assert!(eval(lo) > 0.0 && eval(hi) < 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let crossing = 0.5 * (lo + hi);
    let target = 1.0 / 3.0f64.sqrt();
    let crossing_ok = (crossing - target).abs() <= 1e-6;

    // Adversarial sweep on certified separable states.
    let dims = DimList::pair(2, 2);
    let values = mdi_core::par::map_indexed(Parallelism::default(), 200, |trial| {
        let seed = split_seed(6000, trial as u64);
        let (rho, _) = random_separable(&dims, 1 + trial % 3, seed).unwrap();
        let strategies = vec![
            random_losr_strategy(&dims, 1 + trial % 2, split_seed(seed, 1)).unwrap(),
            random_losr_strategy(&dims, 1 + (trial + 1) % 2, split_seed(seed, 2)).unwrap(),
        ];
        multicopy_mdi_with_decomposition(&dec, &w, &rho, &strategies, Parallelism::Sequential)
            .unwrap()
    });
    let min_adv = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let sweep_ok = min_adv >= -1e-8;

    verdict(
        "7",
        phi_ok && crossing_ok && sweep_ok,
        &format!(
            "phi value {:.3e}+1/2, crossing |{:.9} - 3^(-1/2)| = {:.3e}, adversarial min {:.3e}",
            v_phi + 0.5,
            crossing,
            (crossing - target).abs(),
            min_adv
        ),
    );
}

// ----- criterion 8: nonlinear strict improvement ----------------------------

#[test]
fn criterion_08_nonlinear_improvement() {
    let dims = DimList::pair(2, 2);
    let nd = NonlinearDecomposed::new(transpose_map_nonlinear(2).unwrap()).unwrap();
    let inputs = nd.inputs();

    // Randomized search: mixtures of a rotated maximally entangled state and
    // a random product state.
    let mut found: Option<(DensityMatrix, f64, f64)> = None;
    let mut rng = rng_from_seed(7001);
    for trial in 0..10_000u64 {
        use rand::Rng;
        let u = rng.gen::<f64>();
        let seed = split_seed(7000, trial);
        let ua = random_unitary(2, &mut rng);
        let ub = random_unitary(2, &mut rng);
        let local = mdi_core::mat::kron(&ua, &ub);
        let rot = local
            .matmul(max_entangled(2).matrix())
            .matmul(&local.adjoint());
        let (prod, _) = mdi_core::quantum::random_product_pure(&dims, seed);
        let mut m = rot.scale_re(u);
        m.add_assign_scaled(prod.matrix(), Complex64::new(1.0 - u, 0.0));
        let rho = DensityMatrix::new(dims.clone(), m).unwrap();
        let linear = rho.expectation(nd.spec.base.operator());
        if linear < 0.0 {
            continue;
        }
        let trusted = mdi_core::witness::nonlinear_trusted_value(&nd.spec, &rho);
        if trusted < -1e-4 {
            found = Some((rho, linear, trusted));
            break;
        }
    }
    let (rho, linear, _) = found.expect("randomized search found no improvement state");
    // Confirm through the full MDI pipeline.
    let table = run_protocol(&rho, &inputs, &EveStrategy::Faithful).unwrap();
    let c_mdi = nd.evaluate_table(&table).unwrap();
    let improvement_ok = linear >= 0.0 && c_mdi < -1e-6;

    // Separable soundness sweep under faithful and adversarial strategies.
    let values = mdi_core::par::map_indexed(Parallelism::default(), 1000, |trial| {
        let seed = split_seed(7500, trial as u64);
        let (rho, _) = random_separable(&dims, 1 + trial % 4, seed).unwrap();
        let strategy = match trial % 3 {
            0 => EveStrategy::Faithful,
            1 => random_losr_strategy(&dims, 1 + trial % 2, split_seed(seed, 1)).unwrap(),
            _ => random_separable_strategy(&dims, 1 + trial % 2, split_seed(seed, 2)).unwrap(),
        };
        let table = run_protocol(&rho, &inputs, &strategy).unwrap();
        nd.evaluate_table(&table).unwrap()
    });
    let min_sep = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let soundness_ok = min_sep >= -1e-8;

    verdict(
        "8",
        improvement_ok && soundness_ok,
        &format!(
            "found state with tr(W rho) = {:.3e} >= 0 and C_MDI = {:.3e} < 0; separable min {:.3e}",
            linear, c_mdi, min_sep
        ),
    );
}

// ----- criterion 9: SDP quantifier ------------------------------------------

#[test]
fn criterion_09_sdp_quantifier() {
    let dims = DimList::pair(2, 2);
    let inputs = party_inputs(&dims);
    let opts = SolveOptions::default();

    let phi_table = run_protocol(&max_entangled(2), &inputs, &EveStrategy::Faithful).unwrap();
    let (phi_bound, phi_sol) = mdi_quantify_state(&phi_table, &inputs, &opts).unwrap();
    let phi_ok = phi_bound > 0.4
        && phi_bound <= 0.5 + 1e-6
        && phi_sol.status == SolveStatus::Converged
        && phi_sol.primal_residual <= 1e-7
        && phi_sol.dual_residual <= 1e-7;

    let uniform = ProbabilityTable::uniform(dims.clone());
    let (uniform_bound, uniform_sol) = mdi_quantify_state(&uniform, &inputs, &opts).unwrap();
    let uniform_ok = uniform_bound.abs() <= 1e-6 && uniform_sol.primal_residual <= 1e-7;

    let mut sep_ok = true;
    let mut max_sep_bound: f64 = 0.0;
    for trial in 0..3u64 {
        let (rho, _) = random_separable(&dims, 2 + trial as usize, split_seed(8000, trial)).unwrap();
        let table = run_protocol(&rho, &inputs, &EveStrategy::Faithful).unwrap();
        let (bound, sol) = mdi_quantify_state(&table, &inputs, &opts).unwrap();
        max_sep_bound = max_sep_bound.max(bound);
        sep_ok &= bound <= 1e-6 && sol.primal_residual <= 1e-7 && sol.dual_residual <= 1e-7;
    }

    verdict(
        "9",
        phi_ok && uniform_ok && sep_ok,
        &format!(
            "phi+ bound {:.6} in (0.4, 0.5]; uniform {:.2e}; max separable bound {:.2e}",
            phi_bound, uniform_bound, max_sep_bound
        ),
    );
}

// ----- criterion 10: memory --------------------------------------------------

#[test]
fn criterion_10_memory() {
    let opts = SolveOptions::default();
    let w = bell_overlap_witness(2);

    // Identity channel quantification.
    let run_id =
        run_memory_protocol(&identity_channel(2), &EveStrategy::Faithful, Parallelism::default())
            .unwrap();
    let (id_bound, _) = quantify_memory(&run_id, &opts).unwrap();
    let id_ok = id_bound > 0.4;

    // EB presets: bound vanishes and the witness value stays nonnegative
    // under 50 adversarial strategies each.
    let mut eb_ok = true;
    let mut min_witness = f64::INFINITY;
    let mut max_eb_bound: f64 = 0.0;
    for (name, choi) in eb_presets(42).unwrap() {
        let run = run_memory_protocol(&choi, &EveStrategy::Faithful, Parallelism::default())
            .unwrap();
        let (bound, _) = quantify_memory(&run, &opts).unwrap();
        max_eb_bound = max_eb_bound.max(bound);
        if bound > 1e-6 {
            eb_ok = false;
            println!("  EB preset {} bound {:.3e}", name, bound);
        }
        let values = mdi_core::par::map_indexed(Parallelism::default(), 50, |trial| {
            let strategy = random_losr_strategy(
                &DimList::single(2),
                1 + trial % 3,
                split_seed(9000, trial as u64),
            )
            .unwrap();
            let run = run_memory_protocol(&choi, &strategy, Parallelism::Sequential).unwrap();
            memory_mdi_value(&w, &run).unwrap().normalized
        });
        for v in values {
            min_witness = min_witness.min(v);
        }
    }
    let witness_ok = min_witness >= -1e-8;

    // Choi projection identity on 50 random channels.
    let mut worst_choi: f64 = 0.0;
    for trial in 0..50u64 {
        let choi = random_channel(2, 2 + (trial % 3) as usize, split_seed(9100, trial)).unwrap();
        let kraus = kraus_from_choi(&choi);
        let rho = random_density(2, 2, split_seed(9200, trial)).unwrap();
        let via_choi = apply_channel(&choi, &rho).unwrap();
        let mut direct = ComplexMatrix::zeros(2, 2);
        for k in &kraus {
            direct.add_assign_scaled(
                &k.matmul(rho.matrix()).matmul(&k.adjoint()),
                mdi_core::mat::C_ONE,
            );
        }
        worst_choi = worst_choi.max(via_choi.matrix().max_abs_diff(&direct));
    }
    let choi_ok = worst_choi <= 1e-10;

    verdict(
        "10",
        id_ok && eb_ok && witness_ok && choi_ok,
        &format!(
            "identity bound {:.4}; max EB bound {:.2e}; min witness value {:.3e}; Choi identity {:.3e}",
            id_bound, max_eb_bound, min_witness, worst_choi
        ),
    );
}

// ----- criterion 11: robustness ----------------------------------------------

/// One-dimensional brute force: mixing the partial transpose with
/// Werner-direction states M(lambda) = lambda psi- + (1-lambda)(I-psi-)/3,
/// the smallest s with J^Gamma + s M(lambda) >= 0, minimized over lambda.
fn robustness_brute_force(choi: &ChoiState) -> f64 {
    let gamma = choi.state().partial_transpose(&[1]).unwrap();
    let psi_minus = {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ket = [
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        ComplexMatrix::outer(&ket)
    };
    let eye = ComplexMatrix::identity(4);
    let mut best = f64::INFINITY;
    for step in 0..=400 {
        let lambda = step as f64 / 400.0;
        let mut mixer = psi_minus.scale_re(lambda);
        let mut rest = eye.clone();
        rest.add_assign_scaled(&psi_minus, Complex64::new(-1.0, 0.0));
        mixer.add_assign_scaled(&rest, Complex64::new((1.0 - lambda) / 3.0, 0.0));
        // Smallest s with gamma + s * mixer >= 0, by bisection.
        let feasible = |s: f64| -> bool {
            let mut m = gamma.matrix().clone();
            m.add_assign_scaled(&mixer, Complex64::new(s, 0.0));
            HermitianMatrix::new_unchecked(m).min_eigenvalue() >= -1e-12
        };
        if !feasible(10.0) {
            continue;
        }
        let (mut lo, mut hi) = (0.0f64, 10.0f64);
        if feasible(0.0) {
            best = 0.0;
            break;
        }
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        best = best.min(hi);
    }
    best
}

#[test]
fn criterion_11_robustness() {
    let opts = SolveOptions::default();
    let phi_choi = ChoiState::new(2, 2, max_entangled(2)).unwrap();
    let (phi_rob, sol) = robustness_ppt(&phi_choi, &opts).unwrap();
    let brute = robustness_brute_force(&phi_choi);
    let phi_ok = (phi_rob - 0.5).abs() <= 1e-4
        && (brute - 0.5).abs() <= 1e-6
        && sol.status == SolveStatus::Converged;

    let mut eb_ok = true;
    let mut max_eb: f64 = 0.0;
    for (_, choi) in eb_presets(11).unwrap() {
        let (rob, _) = robustness_ppt(&choi, &opts).unwrap();
        max_eb = max_eb.max(rob.abs());
        eb_ok &= rob.abs() <= 1e-6;
    }

    verdict(
        "11",
        phi_ok && eb_ok,
        &format!(
            "phi+ robustness {:.6} (brute force {:.6}); max EB robustness {:.2e}",
            phi_rob, brute, max_eb
        ),
    );
}

// ----- criterion 12: key distribution -----------------------------------------

#[test]
fn criterion_12_qkd() {
    // Identity channel.
    let id_table = run_qkd(&identity_channel(2), &EveStrategy::Faithful).unwrap();
    let (e_b, e_p) = error_rates(&id_table, 0).unwrap();
    let k = key_rate(e_b, e_p);
    let bound = quantumness_bound(&id_table, 0, k);
    let id_ok = e_b.abs() <= 1e-12
        && e_p.abs() <= 1e-12
        && (k - 1.0).abs() <= 1e-12
        && (bound - 0.25).abs() <= 1e-9;

    // Z measure-and-reprepare: zero bound for every outcome.
    let z_table = run_qkd(
        &mdi_core::quantum::z_measure_prepare_channel(),
        &EveStrategy::Faithful,
    )
    .unwrap();
    let (z_reports, _) = mdi_core::qkd::evaluate_qkd(&z_table);
    let z_ok = z_reports.iter().all(|r| r.bound.abs() <= 1e-12);

    // Bit-flip channel errors.
    let flip = mdi_core::memory::channel_preset("bit-flip", 2, None).unwrap();
    let flip_table = run_qkd(&flip, &EveStrategy::Faithful).unwrap();
    let (fe_b, fe_p) = error_rates(&flip_table, 0).unwrap();
    let flip_ok = (fe_b - 1.0).abs() <= 1e-12 && fe_p.abs() <= 1e-12;

    // X/Z denominator identity across presets and 20 random strategies.
    let mut gap_worst: f64 = 0.0;
    let mut channels = vec![identity_channel(2), flip];
    for (_, c) in eb_presets(21).unwrap() {
        channels.push(c);
    }
    for (ci, ch) in channels.iter().enumerate() {
        for trial in 0..20u64 {
            let strategy = random_losr_strategy(
                &DimList::single(2),
                1 + (trial % 3) as usize,
                split_seed(12_000 + ci as u64, trial),
            )
            .unwrap();
            let table = run_qkd(ch, &strategy).unwrap();
            for a in 0..4 {
                gap_worst = gap_worst.max(mdi_core::qkd::basis_mass_gap(&table, a));
            }
        }
    }
    let gap_ok = gap_worst <= 1e-9;

    verdict(
        "12",
        id_ok && z_ok && flip_ok && gap_ok,
        &format!(
            "identity bound {:.9}; EB bounds zero: {}; bit-flip (e_b, e_p) = ({:.1}, {:.1}); X/Z gap {:.2e}",
            bound, z_ok, fe_b, fe_p, gap_worst
        ),
    );
}

// ----- criterion 13: monotone checks ------------------------------------------

#[test]
fn criterion_13_monotone_checks() {
    // Transposition invariance over 200 random states.
    let dims = DimList::pair(2, 2);
    let mut worst_inv: f64 = 0.0;
    for trial in 0..200u64 {
        let rho = random_density_multi(&dims, split_seed(13_000, trial));
        let a = negativity(&rho, &[1]).unwrap();
        let b = negativity(&rho.transpose(), &[1]).unwrap();
        worst_inv = worst_inv.max((a - b).abs());
    }
    let inv_ok = worst_inv <= 1e-10;

    // f_opt dominance over 50 (W, value) pairs drawn from locally rotated
    // overlap witnesses and faithful values on random states.
    let opts = SolveOptions::default();
    let base = bell_overlap_witness(2);
    let results = mdi_core::par::map_indexed(Parallelism::default(), 50, |trial| {
        let seed = split_seed(13_500, trial as u64);
        let mut rng = rng_from_seed(seed);
        let ua = random_unitary(2, &mut rng);
        let ub = random_unitary(2, &mut rng);
        let local = mdi_core::mat::kron(&ua, &ub);
        let w_mat = local
            .matmul(base.operator().matrix())
            .matmul(&local.adjoint());
        let w = Witness::new(
            HermitianMatrix::new_unchecked(w_mat),
            DimList::pair(2, 2),
            1,
        )
        .unwrap();
        // Mix toward the rotated maximally entangled state so negative
        // values actually occur.
        let rho = {
            let p = 0.2 + 0.8 * (trial as f64 / 50.0);
            let rot = local
                .matmul(max_entangled(2).matrix())
                .matmul(&local.adjoint());
            let mut m = rot.scale_re(p);
            m.add_assign_scaled(
                &ComplexMatrix::identity(4),
                Complex64::new((1.0 - p) / 4.0, 0.0),
            );
            DensityMatrix::new(dims.clone(), m).unwrap()
        };
        let value = rho.expectation(w.operator());
        let ftr = bound_ftr(&w, value).unwrap();
        let fopt = bound_fopt(&w, value, &opts).unwrap();
        (fopt, ftr)
    });
    let mut dominance_ok = true;
    let mut worst_gap: f64 = f64::INFINITY;
    for (fopt, ftr) in results {
        worst_gap = worst_gap.min(fopt - ftr);
        dominance_ok &= fopt >= ftr - 1e-8;
    }

    verdict(
        "13",
        inv_ok && dominance_ok,
        &format!(
            "transposition invariance worst {:.3e}; min (f_opt - f_tr) = {:.3e}",
            worst_inv, worst_gap
        ),
    );
}
