//! Physical channels and signed quasi-channels.
//!
//! A [`QuasiChannel`] stores the probabilistic form C·(p₊Γ₊ − p₋Γ₋) as a flat
//! list of signed branches so that it can be sampled one branch per shot.

use std::fmt;

use crate::error::{Result, VrdError};
use crate::numcore::{ComplexMatrix, DensityOperator, STRUCTURE_TOL};

const QUASI_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Unitary(ComplexMatrix),
    /// Discards the input and prepares a fixed state.
    Replacement(DensityOperator),
    /// ρ ↦ (1 − p)ρ + p·I/d
    Depolarizing { p: f64, dim: usize },
    /// Applied left to right.
    Composition(Vec<Channel>),
}

impl Channel {
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        u.require_square()?;
        let deviation = u.unitarity_defect();
        if deviation > STRUCTURE_TOL {
            return Err(VrdError::NotUnitary { deviation });
        }
        Ok(Channel::Unitary(u))
    }

    pub fn identity(dim: usize) -> Self {
        Channel::Unitary(ComplexMatrix::identity(dim))
    }

    pub fn replacement(sigma: DensityOperator) -> Self {
        Channel::Replacement(sigma)
    }

    pub fn depolarizing(p: f64, dim: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(VrdError::OutOfRange {
                name: "p",
                value: p,
                range: "[0, 1]",
            });
        }
        Ok(Channel::Depolarizing { p, dim })
    }

    pub fn compose(channels: Vec<Channel>) -> Self {
        Channel::Composition(channels)
    }

    /// Input dimension, if the channel constrains it.
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            Channel::Unitary(u) => Some(u.cols()),
            Channel::Replacement(_) => None,
            Channel::Depolarizing { dim, .. } => Some(*dim),
            Channel::Composition(list) => list.first().and_then(Channel::input_dim),
        }
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if let Some(d) = self.input_dim() {
            if d != rho.dim() {
                return Err(VrdError::DimensionMismatch {
                    expected: d,
                    actual: rho.dim(),
                });
            }
        }
        match self {
            Channel::Unitary(u) => {
                let out = rho.matrix().conjugate_by(u).hermitian_part();
                Ok(DensityOperator::new_unchecked(out, rho.dims().to_vec()))
            }
            Channel::Replacement(sigma) => Ok(sigma.clone()),
            Channel::Depolarizing { p, dim } => {
                let mixed = ComplexMatrix::identity(*dim).scale_real(p / *dim as f64);
                let out = &rho.matrix().scale_real(1.0 - p) + &mixed;
                Ok(DensityOperator::new_unchecked(out, rho.dims().to_vec()))
            }
            Channel::Composition(list) => list
                .iter()
                .try_fold(rho.clone(), |state, ch| ch.apply(&state)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub sign: Sign,
    pub probability: f64,
    pub channel: Channel,
}

/// C·Σ_b sign_b·p_b·Γ_b with Σ p_b = 1 and C·Σ sign_b·p_b = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiChannel {
    branches: Vec<Branch>,
    cost: f64,
}

impl QuasiChannel {
    pub fn new(branches: Vec<Branch>, cost: f64) -> Result<Self> {
        if branches.is_empty() {
            return Err(VrdError::InvalidQuasiChannel("no branches".into()));
        }
        if branches.iter().any(|b| !(0.0..=1.0).contains(&b.probability)) {
            return Err(VrdError::InvalidQuasiChannel(
                "branch probability outside [0, 1]".into(),
            ));
        }
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        if (total - 1.0).abs() > QUASI_TOL {
            return Err(VrdError::InvalidQuasiChannel(format!(
                "probabilities sum to {total}"
            )));
        }
        if !(cost >= 1.0 - QUASI_TOL) {
            return Err(VrdError::InvalidQuasiChannel(format!("cost {cost} < 1")));
        }
        let signed: f64 = branches.iter().map(|b| b.sign.value() * b.probability).sum();
        if (cost * signed - 1.0).abs() > QUASI_TOL {
            return Err(VrdError::InvalidQuasiChannel(format!(
                "C·(p+ − p−) = {} ≠ 1",
                cost * signed
            )));
        }
        Ok(Self { branches, cost })
    }

    /// Builds Σ_j γ_j Γ_j (Σ γ_j = 1) in probabilistic form; zero coefficients are dropped.
    pub fn from_coefficients(terms: Vec<(f64, Channel)>) -> Result<Self> {
        let cost: f64 = terms.iter().map(|(g, _)| g.abs()).sum();
        if cost == 0.0 {
            return Err(VrdError::InvalidQuasiChannel("all coefficients zero".into()));
        }
        let branches = terms
            .into_iter()
            .filter(|(g, _)| *g != 0.0)
            .map(|(g, channel)| Branch {
                sign: if g > 0.0 { Sign::Plus } else { Sign::Minus },
                probability: g.abs() / cost,
                channel,
            })
            .collect();
        Self::new(branches, cost)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            branches: vec![Branch {
                sign: Sign::Plus,
                probability: 1.0,
                channel: Channel::identity(dim),
            }],
            cost: 1.0,
        }
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// (p₊, p₋)
    pub fn sign_split(&self) -> (f64, f64) {
        self.branches.iter().fold((0.0, 0.0), |(p, m), b| match b.sign {
            Sign::Plus => (p + b.probability, m),
            Sign::Minus => (p, m + b.probability),
        })
    }

    /// Each branch output with its signed weight C·sign·p.
    pub fn branch_outputs(&self, rho: &DensityOperator) -> Result<Vec<(f64, DensityOperator)>> {
        self.branches
            .iter()
            .map(|b| {
                Ok((
                    self.cost * b.sign.value() * b.probability,
                    b.channel.apply(rho)?,
                ))
            })
            .collect()
    }

    /// The virtual output C·Σ sign·p·Γ(ρ); Hermitian with unit trace, not necessarily PSD.
    pub fn apply_exact(&self, rho: &DensityOperator) -> Result<ComplexMatrix> {
        let n = rho.dim();
        let mut acc = ComplexMatrix::zeros(n, n);
        for (w, out) in self.branch_outputs(rho)? {
            acc = &acc + &out.matrix().scale_real(w);
        }
        Ok(acc)
    }
}

pub fn quasi_apply_exact(qc: &QuasiChannel, rho: &DensityOperator) -> Result<ComplexMatrix> {
    qc.apply_exact(rho)
}

/// X_jk on four levels: swaps |j⟩ and |k⟩, identity elsewhere.
pub fn swap_levels(j: usize, k: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(4);
    m[(j, j)] = crate::numcore::ZERO;
    m[(k, k)] = crate::numcore::ZERO;
    m[(j, k)] = crate::numcore::ONE;
    m[(k, j)] = crate::numcore::ONE;
    m
}

/// Z_jk on four levels: −1 on |k⟩, +1 elsewhere.
pub fn phase_flip(j: usize, k: usize) -> ComplexMatrix {
    debug_assert_ne!(j, k);
    let mut m = ComplexMatrix::identity(4);
    m[(k, k)] = -crate::numcore::ONE;
    m
}

/// The incoherent unitary of the coherence protocol for branch `k` (1..=6).
pub fn incoherent_unitary(k: usize, sign: Sign) -> Result<ComplexMatrix> {
    let x = |j, k| swap_levels(j, k);
    let z = |j, k| phase_flip(j, k);
    let double = || &x(0, 2) * &x(1, 3);
    let u = match (k, sign) {
        (1, Sign::Plus) => ComplexMatrix::identity(4),
        (2, Sign::Plus) => x(1, 2),
        (3, Sign::Plus) => x(1, 3),
        (4, Sign::Plus) => x(0, 2),
        (5, Sign::Plus) => x(0, 3),
        (6, Sign::Plus) => double(),
        (1, Sign::Minus) => z(0, 1),
        (2, Sign::Minus) => &z(0, 2) * &x(1, 2),
        (3, Sign::Minus) => &z(0, 3) * &x(1, 3),
        (4, Sign::Minus) => &z(1, 2) * &x(0, 2),
        (5, Sign::Minus) => &z(1, 3) * &x(0, 3),
        (6, Sign::Minus) => &z(2, 3) * &double(),
        _ => {
            return Err(VrdError::OutOfRange {
                name: "k",
                value: k as f64,
                range: "1..=6",
            })
        }
    };
    Ok(u)
}

pub fn incoherent_op(k: usize, sign: Sign) -> Result<Channel> {
    Ok(Channel::Unitary(incoherent_unitary(k, sign)?))
}
