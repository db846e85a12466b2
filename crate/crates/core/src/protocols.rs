//! The two distillation protocols as quasi-channel factories, plus their costs.

use crate::channels::{incoherent_op, Branch, Channel, QuasiChannel, Sign};
use crate::error::{Result, VrdError};
use crate::numcore::PureState;
use crate::states::{bell, eta_state, mcs, werner, BellLabel, WernerParams};

/// Werner parameter below which the input is swapped for ρ_w,1/3.
pub const SEPARABLE_THRESHOLD: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolName {
    Coherence2To4,
    EntanglementWerner,
}

#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    pub name: ProtocolName,
    pub xi: Option<f64>,
    pub cost: f64,
    pub target: PureState,
    pub channel: QuasiChannel,
}

/// Maps (|0⟩+|1⟩)/√2 to the four-level uniform superposition at cost 3.
///
/// Twelve branches: Γ₊ᵏ with probability 1/9 each and Γ₋ᵏ with 1/18 each.
pub fn coherence_vrd() -> QuasiChannel {
    const COST: f64 = 3.0;
    const P_PLUS: f64 = 2.0 / 3.0;
    const P_MINUS: f64 = 1.0 / 3.0;
    let mut branches = Vec::with_capacity(12);
    for sign in [Sign::Plus, Sign::Minus] {
        let p = if sign == Sign::Plus { P_PLUS } else { P_MINUS };
        for k in 1..=6 {
            branches.push(Branch {
                sign,
                probability: p / 6.0,
                channel: incoherent_op(k, sign).expect("k in 1..=6"),
            });
        }
    }
    QuasiChannel::new(branches, COST).expect("coherence protocol is a valid quasi-channel")
}

pub fn coherence_spec() -> ProtocolSpec {
    let channel = coherence_vrd();
    ProtocolSpec {
        name: ProtocolName::Coherence2To4,
        xi: None,
        cost: channel.cost(),
        target: mcs(4).expect("d = 4"),
        channel,
    }
}

fn effective_xi(xi: f64) -> f64 {
    xi.max(SEPARABLE_THRESHOLD)
}

/// Distills Ψ⁻ from a Werner state with parameter `xi`.
///
/// The positive branch is the identity for ξ ≥ 1/3 and a preparation of
/// ρ_w,1/3 below that; the negative branch always replaces the input by ρ_η.
pub fn entanglement_vrd(xi: f64) -> Result<QuasiChannel> {
    let params = WernerParams::new(xi)?;
    let x = effective_xi(params.xi());
    let positive = if params.xi() < SEPARABLE_THRESHOLD {
        Channel::replacement(werner(WernerParams::new(SEPARABLE_THRESHOLD)?))
    } else {
        Channel::identity(4)
    };
    let cost = (7.0 - 3.0 * x) / (1.0 + 3.0 * x);
    let p_plus = 4.0 / (7.0 - 3.0 * x);
    let p_minus = (3.0 - 3.0 * x) / (7.0 - 3.0 * x);
    let mut branches = vec![Branch {
        sign: Sign::Plus,
        probability: p_plus,
        channel: positive,
    }];
    if p_minus > 0.0 {
        branches.push(Branch {
            sign: Sign::Minus,
            probability: p_minus,
            channel: Channel::replacement(eta_state()),
        });
    }
    QuasiChannel::new(branches, cost)
}

pub fn entanglement_spec(xi: f64) -> Result<ProtocolSpec> {
    let channel = entanglement_vrd(xi)?;
    Ok(ProtocolSpec {
        name: ProtocolName::EntanglementWerner,
        xi: Some(xi),
        cost: channel.cost(),
        target: bell(BellLabel::PsiMinus),
        channel,
    })
}

/// min{(7 − 3ξ)/(1 + 3ξ), 3}
pub fn vrd_cost(xi: f64) -> f64 {
    ((7.0 - 3.0 * xi) / (1.0 + 3.0 * xi)).min(3.0)
}

/// m / C²
pub fn one_shot_rate(cost: f64, m: u32) -> Result<f64> {
    if !(cost >= 1.0) {
        return Err(VrdError::OutOfRange {
            name: "cost",
            value: cost,
            range: "[1, inf)",
        });
    }
    if m == 0 {
        return Err(VrdError::OutOfRange {
            name: "m",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    Ok(m as f64 / (cost * cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{hermitian_eig, DensityOperator};
    use crate::states::{psi_plus_one, singlet, werner_xi};

    #[test]
    fn coherence_structure() {
        let qc = coherence_vrd();
        assert_eq!(qc.branches().len(), 12);
        assert_eq!(qc.cost(), 3.0);
        let (p, m) = qc.sign_split();
        assert!((p - 2.0 / 3.0).abs() < 1e-15);
        assert!((m - 1.0 / 3.0).abs() < 1e-15);
        for b in qc.branches() {
            let expected = if b.sign == Sign::Plus { 1.0 / 9.0 } else { 1.0 / 18.0 };
            assert!((b.probability - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn coherence_output_is_mcs_and_psd() {
        let rho = DensityOperator::from_pure(&psi_plus_one());
        let out = coherence_vrd().apply_exact(&rho).unwrap();
        let target = mcs(4).unwrap().projector();
        assert!(out.max_abs_diff(&target) < 1e-12);
        let e = hermitian_eig(&out).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-10);
        assert!(e.values[1..].iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn entanglement_edge_costs() {
        let one = entanglement_vrd(1.0).unwrap();
        assert_eq!(one.cost(), 1.0);
        assert_eq!(one.branches().len(), 1);
        assert_eq!(one.branches()[0].channel, Channel::identity(4));

        let third = entanglement_vrd(1.0 / 3.0).unwrap();
        assert!((third.cost() - 3.0).abs() < 1e-12);
        let (p, m) = third.sign_split();
        assert!((p - 2.0 / 3.0).abs() < 1e-12 && (m - 1.0 / 3.0).abs() < 1e-12);

        let zero = entanglement_vrd(0.0).unwrap();
        assert!((zero.cost() - 3.0).abs() < 1e-12);
        assert!(matches!(zero.branches()[0].channel, Channel::Replacement(_)));
        assert!(entanglement_vrd(1.01).is_err());
    }

    #[test]
    fn entanglement_output_is_singlet_on_grid() {
        for k in 0..=20 {
            let xi = k as f64 / 20.0;
            let qc = entanglement_vrd(xi).unwrap();
            let input = werner_xi(xi.max(SEPARABLE_THRESHOLD)).unwrap();
            let out = qc.apply_exact(&input).unwrap();
            assert!(out.max_abs_diff(singlet().matrix()) < 1e-12, "xi={xi}");
            // The caller's actual state works too below threshold.
            let actual = qc.apply_exact(&werner_xi(xi).unwrap()).unwrap();
            assert!(actual.max_abs_diff(singlet().matrix()) < 1e-12, "xi={xi}");
        }
    }

    #[test]
    fn cost_examples() {
        assert_eq!(vrd_cost(1.0), 1.0);
        assert!((vrd_cost(0.6) - 5.2 / 2.8).abs() < 1e-12);
        assert_eq!(vrd_cost(0.2), 3.0);
        for k in 0..20 {
            let a = 1.0 / 3.0 + k as f64 / 30.0;
            let b = a + 1.0 / 30.0;
            assert!(vrd_cost(b) <= vrd_cost(a) + 1e-15);
        }
    }

    #[test]
    fn rate_examples() {
        assert_eq!(one_shot_rate(1.0, 1).unwrap(), 1.0);
        assert!((one_shot_rate(3.0, 1).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(one_shot_rate(vrd_cost(1.0), 1).unwrap(), 1.0);
        assert!(one_shot_rate(0.5, 1).is_err());
        assert!(one_shot_rate(2.0, 0).is_err());
    }
}
