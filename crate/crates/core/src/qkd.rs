//! MDI key distribution as a quantumness quantification protocol.
//!
//! Alice prepares one of |0>, |1>, |+>, |-> and sends it through a qubit
//! channel; Bob prepares one of the same four states and measures the
//! transmitted-plus-local pair with an untrusted 4-outcome POVM. Bit and
//! phase error rates conditioned on each outcome feed the Shor-Preskill
//! rate 1 - h(e_b) - h(e_p), which lower-bounds the distillable key rate,
//! and Lemma-style post-selection converts the per-outcome rate into a
//! lower bound on the quantumness of the channel.

use crate::error::{Error, Result};
use crate::game::{EveStrategy, ProductComponent};
use crate::mat::{kron, ComplexMatrix, DimList, C_ONE, C_ZERO};
use crate::quantum::{apply_channel, ChoiState, DensityMatrix};
use num_complex::Complex64;

/// Preparation basis states in table order: z0, z1, x+, x-.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrepState {
    Z0,
    Z1,
    XPlus,
    XMinus,
}

pub const PREP_STATES: [PrepState; 4] = [
    PrepState::Z0,
    PrepState::Z1,
    PrepState::XPlus,
    PrepState::XMinus,
];

impl PrepState {
    pub fn ket(self) -> Vec<Complex64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            PrepState::Z0 => vec![C_ONE, C_ZERO],
            PrepState::Z1 => vec![C_ZERO, C_ONE],
            PrepState::XPlus => vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            PrepState::XMinus => vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        }
    }

    pub fn density(self) -> DensityMatrix {
        DensityMatrix::from_ket(DimList::single(2), &self.ket()).expect("unit kets")
    }

    pub fn label(self) -> &'static str {
        match self {
            PrepState::Z0 => "z0",
            PrepState::Z1 => "z1",
            PrepState::XPlus => "x+",
            PrepState::XMinus => "x-",
        }
    }
}

/// The 4 x 4 x 4 table p(a | psi, phi).
#[derive(Clone, Debug)]
pub struct QkdTable {
    /// entries[(psi * 4 + phi) * 4 + a]
    entries: Vec<f64>,
}

impl QkdTable {
    pub fn probability(&self, a: usize, psi: usize, phi: usize) -> f64 {
        self.entries[(psi * 4 + phi) * 4 + a]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// CSV with header a,psi,phi,p.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,psi,phi,p\n");
        for a in 0..4 {
            for (pi, psi) in PREP_STATES.iter().enumerate() {
                for (fi, phi) in PREP_STATES.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{:.16e}\n",
                        a,
                        psi.label(),
                        phi.label(),
                        self.probability(a, pi, fi)
                    ));
                }
            }
        }
        out
    }
}

/// Strategy POVM elements on the (B, B') pair: transmitted qubit first,
/// Bob's local preparation second.
fn qkd_strategy_elements(strategy: &EveStrategy) -> Result<Vec<ComplexMatrix>> {
    match strategy {
        EveStrategy::Faithful => {
            let pb = crate::bases::PartyBasis::new(2)?;
            Ok(pb
                .bell
                .projectors()
                .iter()
                .map(|p| p.matrix().clone())
                .collect())
        }
        EveStrategy::Trivial => Ok(vec![ComplexMatrix::identity(4).scale_re(0.25); 4]),
        EveStrategy::ProductLosr(components) => {
            strategy.validate(&DimList::single(2))?;
            let mut elements = vec![ComplexMatrix::zeros(4, 4); 4];
            for ProductComponent { weight, povms } in components {
                for (a, el) in elements.iter_mut().enumerate() {
                    el.add_assign_scaled(
                        povms[0].element(a).matrix(),
                        Complex64::new(*weight, 0.0),
                    );
                }
            }
            Ok(elements)
        }
        EveStrategy::Separable(_) => Err(Error::InvalidArgument(
            "the key protocol takes single-party strategies".into(),
        )),
    }
}

/// Runs the protocol exactly: p(a|psi,phi) = tr[Xi_a (N(psi) ⊗ phi)].
pub fn run_qkd(channel: &ChoiState, strategy: &EveStrategy) -> Result<QkdTable> {
    if channel.input_dim() != 2 || channel.output_dim() != 2 {
        return Err(Error::InvalidArgument(
            "the key protocol runs on qubit-to-qubit channels".into(),
        ));
    }
    let elements = qkd_strategy_elements(strategy)?;
    let mut entries = vec![0.0f64; 64];
    for (pi, psi) in PREP_STATES.iter().enumerate() {
        let sent = apply_channel(channel, &psi.density())?;
        for (fi, phi) in PREP_STATES.iter().enumerate() {
            let joint = kron(sent.matrix(), phi.density().matrix());
            let mut row: Vec<f64> = elements
                .iter()
                .map(|e| e.trace_product(&joint).re.clamp(0.0, 1.0))
                .collect();
            let partial: f64 = row[..3].iter().sum();
            row[3] = (1.0 - partial).max(0.0);
            for (a, &p) in row.iter().enumerate() {
                entries[(pi * 4 + fi) * 4 + a] = p;
            }
        }
    }
    Ok(QkdTable { entries })
}

/// Bit and phase error rates for one announced outcome.
pub fn error_rates(table: &QkdTable, a: usize) -> Result<(f64, f64)> {
    let z = [
        table.probability(a, 0, 0),
        table.probability(a, 0, 1),
        table.probability(a, 1, 0),
        table.probability(a, 1, 1),
    ];
    let x = [
        table.probability(a, 2, 2),
        table.probability(a, 2, 3),
        table.probability(a, 3, 2),
        table.probability(a, 3, 3),
    ];
    let z_denom: f64 = z.iter().sum();
    let x_denom: f64 = x.iter().sum();
    if z_denom <= 1e-12 {
        return Err(Error::UndefinedErrorRate { outcome: a, basis: "Z" });
    }
    if x_denom <= 1e-12 {
        return Err(Error::UndefinedErrorRate { outcome: a, basis: "X" });
    }
    let e_b = (z[1] + z[2]) / z_denom;
    let e_p = (x[1] + x[2]) / x_denom;
    Ok((e_b.clamp(0.0, 1.0), e_p.clamp(0.0, 1.0)))
}

/// Binary entropy in bits, continuous at the endpoints.
pub fn binary_entropy(e: f64) -> f64 {
    if e <= 0.0 || e >= 1.0 {
        return 0.0;
    }
    -e * e.log2() - (1.0 - e) * (1.0 - e).log2()
}

/// Shor-Preskill rate, clamped at zero. A lower bound on the distillable
/// key rate, which keeps the final quantumness inequality valid.
pub fn key_rate(e_b: f64, e_p: f64) -> f64 {
    (1.0 - binary_entropy(e_b) - binary_entropy(e_p)).max(0.0)
}

/// Per-outcome quantumness bound: K_a/4 times the Z-pair success mass.
pub fn quantumness_bound(table: &QkdTable, a: usize, k_a: f64) -> f64 {
    let mass: f64 = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| table.probability(a, i, j))
        .sum();
    0.25 * k_a * mass
}

/// Full per-outcome report.
#[derive(Clone, Debug)]
pub struct KeyReport {
    pub outcome: usize,
    pub e_b: Option<f64>,
    pub e_p: Option<f64>,
    pub key_rate: f64,
    pub bound: f64,
}

/// Evaluates every outcome; outcomes with undefined rates abort with a zero
/// bound. Also returns the summed per-outcome bounds (the aggregate form of
/// the post-selection inequality).
pub fn evaluate_qkd(table: &QkdTable) -> (Vec<KeyReport>, f64) {
    let mut reports = Vec::with_capacity(4);
    let mut aggregate = 0.0;
    for a in 0..4 {
        match error_rates(table, a) {
            Ok((e_b, e_p)) => {
                let k = key_rate(e_b, e_p);
                let bound = quantumness_bound(table, a, k);
                aggregate += bound;
                reports.push(KeyReport {
                    outcome: a,
                    e_b: Some(e_b),
                    e_p: Some(e_p),
                    key_rate: k,
                    bound,
                });
            }
            Err(_) => reports.push(KeyReport {
                outcome: a,
                e_b: None,
                e_p: None,
                key_rate: 0.0,
                bound: 0.0,
            }),
        }
    }
    (reports, aggregate)
}

/// |Sum over Z-basis pairs - sum over X-basis pairs| for one outcome; both
/// sums equal the trace of the post-selected state, so the difference
/// vanishes for every channel and strategy.
pub fn basis_mass_gap(table: &QkdTable, a: usize) -> f64 {
    let z: f64 = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| table.probability(a, i, j))
        .sum();
    let x: f64 = (2..4)
        .flat_map(|i| (2..4).map(move |j| (i, j)))
        .map(|(i, j)| table.probability(a, i, j))
        .sum();
    (z - x).abs()
}
