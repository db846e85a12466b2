//! Single-qubit teleportation through a two-qubit resource, with and without
//! virtual distillation of the resource.
//!
//! Qubits are ordered (C, A, B): C carries the input, A and B share the
//! resource, and the Bell-state measurement acts on (C, A).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::channels::{QuasiChannel, Sign};
use crate::error::{Result, VrdError};
use crate::estimator::{PreparedBranch, PreparedEnsemble};
use crate::metrics::fidelity_to_pure;
use crate::numcore::{partial_trace_matrix, pauli, ComplexMatrix, DensityOperator, PureState};
use crate::protocols::entanglement_vrd;
use crate::states::{bell, werner_xi, BellLabel};

/// Average fidelity reachable without shared entanglement.
pub const CLASSICAL_LIMIT: f64 = 2.0 / 3.0;

/// Bell-state outcome with its two-bit code and Bob's correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BsmOutcome {
    pub label: BellLabel,
    pub bits: u8,
}

impl BsmOutcome {
    /// 00 → Φ⁺, 01 → Φ⁻, 10 → Ψ⁺, 11 → Ψ⁻
    pub const ALL: [BsmOutcome; 4] = [
        BsmOutcome { label: BellLabel::PhiPlus, bits: 0b00 },
        BsmOutcome { label: BellLabel::PhiMinus, bits: 0b01 },
        BsmOutcome { label: BellLabel::PsiPlus, bits: 0b10 },
        BsmOutcome { label: BellLabel::PsiMinus, bits: 0b11 },
    ];

    /// 00 → ZX, 01 → X, 10 → Z, 11 → I
    pub fn correction(self) -> ComplexMatrix {
        let (x, z) = (pauli(1), pauli(3));
        match self.bits {
            0b00 => &z * &x,
            0b01 => x,
            0b10 => z,
            _ => ComplexMatrix::identity(2),
        }
    }
}

/// Bob's corrected state averaged over all four outcomes.
pub fn teleport_exact(resource: &DensityOperator, input: &PureState) -> Result<DensityOperator> {
    if resource.dim() != 4 {
        return Err(VrdError::DimensionMismatch {
            expected: 4,
            actual: resource.dim(),
        });
    }
    if input.dim() != 2 {
        return Err(VrdError::DimensionMismatch {
            expected: 2,
            actual: input.dim(),
        });
    }
    let joint = input.projector().kron(resource.matrix());
    let id = ComplexMatrix::identity(2);
    let mut out = ComplexMatrix::zeros(2, 2);
    for outcome in BsmOutcome::ALL {
        let effect = bell(outcome.label).projector().kron(&id);
        let branch = &(&effect * &joint) * &effect;
        let (bob, _) = partial_trace_matrix(&branch, &[2, 2, 2], &[2])?;
        out = &out + &bob.conjugate_by(&outcome.correction());
    }
    Ok(DensityOperator::new_unchecked(out.hermitian_part(), vec![2]))
}

/// Branch outputs of teleportation through the distilled resource.
pub fn teleport_vrd_ensemble(xi: f64, input: &PureState) -> Result<PreparedEnsemble> {
    teleport_vrd_ensemble_from(&entanglement_vrd(xi)?, &werner_xi(xi)?, input)
}

/// Same, for an arbitrary (for example noisy) resource fed to `qc`.
pub fn teleport_vrd_ensemble_from(
    qc: &QuasiChannel,
    resource: &DensityOperator,
    input: &PureState,
) -> Result<PreparedEnsemble> {
    let branches = qc
        .branches()
        .iter()
        .map(|b| {
            Ok(PreparedBranch {
                sign: b.sign,
                probability: b.probability,
                state: teleport_exact(&b.channel.apply(resource)?, input)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PreparedEnsemble::new(branches, qc.cost())
}

/// C·Σ sign·p·T(Γ_b(ρ_w,ξ)); equals the input projector.
pub fn teleport_vrd(xi: f64, input: &PureState) -> Result<ComplexMatrix> {
    let ens = teleport_vrd_ensemble(xi, input)?;
    let mut acc = ComplexMatrix::zeros(2, 2);
    for b in ens.branches() {
        let w = ens.cost() * b.sign.value() * b.probability;
        acc = &acc + &b.state.matrix().scale_real(w);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TeleportInput {
    H,
    V,
    Plus,
    R,
}

impl TeleportInput {
    pub const ALL: [TeleportInput; 4] = [TeleportInput::H, TeleportInput::V, TeleportInput::Plus, TeleportInput::R];

    pub fn state(self) -> PureState {
        let k = std::f64::consts::FRAC_1_SQRT_2;
        let amps = match self {
            TeleportInput::H => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            TeleportInput::V => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            TeleportInput::Plus => [C64::new(k, 0.0), C64::new(k, 0.0)],
            TeleportInput::R => [C64::new(k, 0.0), C64::new(0.0, k)],
        };
        PureState::new(amps.to_vec(), vec![2]).expect("normalized")
    }
}

impl fmt::Display for TeleportInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TeleportInput::H => "H",
            TeleportInput::V => "V",
            TeleportInput::Plus => "+",
            TeleportInput::R => "R",
        })
    }
}

impl FromStr for TeleportInput {
    type Err = VrdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" => Ok(TeleportInput::H),
            "V" => Ok(TeleportInput::V),
            "+" | "D" => Ok(TeleportInput::Plus),
            "R" => Ok(TeleportInput::R),
            other => Err(VrdError::InvalidLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TeleportOutcome {
    pub input: TeleportInput,
    pub output: DensityOperator,
    pub fidelity: f64,
}

pub fn teleport_outcomes(resource: &DensityOperator) -> Result<Vec<TeleportOutcome>> {
    TeleportInput::ALL
        .iter()
        .map(|&input| {
            let psi = input.state();
            let output = teleport_exact(resource, &psi)?;
            let fidelity = fidelity_to_pure(&output, &psi)?;
            Ok(TeleportOutcome { input, output, fidelity })
        })
        .collect()
}

pub fn teleport_vrd_outcomes(xi: f64) -> Result<Vec<TeleportOutcome>> {
    TeleportInput::ALL
        .iter()
        .map(|&input| {
            let psi = input.state();
            let output = DensityOperator::new(teleport_vrd(xi, &psi)?, vec![2])?;
            let fidelity = fidelity_to_pure(&output, &psi)?;
            Ok(TeleportOutcome { input, output, fidelity })
        })
        .collect()
}

pub fn average_fidelity(outcomes: &[TeleportOutcome]) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(VrdError::Empty("no teleportation outcomes"));
    }
    Ok(outcomes.iter().map(|o| o.fidelity).sum::<f64>() / outcomes.len() as f64)
}

/// Whether the negative branch is present for this ξ.
pub fn uses_negative_branch(xi: f64) -> Result<bool> {
    Ok(entanglement_vrd(xi)?.branches().iter().any(|b| b.sign == Sign::Minus))
}
