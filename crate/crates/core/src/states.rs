//! Constructors for the states used by the protocols.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Result, VrdError};
use crate::numcore::{ComplexMatrix, DensityOperator, PureState, ZERO};

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Polarization of a photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    H = 0,
    V = 1,
}

/// Spatial mode after the beam displacer: `V` is the transmitted mode, `H` the displaced one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    V = 0,
    H = 1,
}

/// Ququart encoding in polarization ⊗ path:
/// |0⟩=|H,v⟩, |1⟩=|V,v⟩, |2⟩=|H,h⟩, |3⟩=|V,h⟩.
///
/// As a two-qubit register the path is the most significant digit.
pub struct QuquartEncoding;

impl QuquartEncoding {
    pub const DIMS: [usize; 2] = [2, 2];

    pub fn index(pol: Polarization, path: Path) -> usize {
        2 * path as usize + pol as usize
    }

    pub fn decode(index: usize) -> Option<(Polarization, Path)> {
        let pol = match index % 2 {
            0 => Polarization::H,
            _ => Polarization::V,
        };
        let path = match index / 2 {
            0 => Path::V,
            1 => Path::H,
            _ => return None,
        };
        Some((pol, path))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerParams {
    xi: f64,
}

impl WernerParams {
    pub fn new(xi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(VrdError::OutOfRange {
                name: "xi",
                value: xi,
                range: "[0, 1]",
            });
        }
        Ok(Self { xi })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];
}

impl FromStr for BellLabel {
    type Err = VrdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Φ+" | "phi+" | "PhiPlus" => Ok(BellLabel::PhiPlus),
            "Φ-" | "Φ−" | "phi-" | "PhiMinus" => Ok(BellLabel::PhiMinus),
            "Ψ+" | "psi+" | "PsiPlus" => Ok(BellLabel::PsiPlus),
            "Ψ-" | "Ψ−" | "psi-" | "PsiMinus" => Ok(BellLabel::PsiMinus),
            other => Err(VrdError::InvalidLabel(other.to_string())),
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        };
        f.write_str(s)
    }
}

fn real_state(amps: &[f64], dims: Vec<usize>) -> PureState {
    PureState::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect(), dims)
        .expect("analytic state is normalized")
}

/// Uniform superposition over `d` basis states.
pub fn mcs(d: usize) -> Result<PureState> {
    if d == 0 {
        return Err(VrdError::OutOfRange {
            name: "dimension",
            value: 0.0,
            range: "[1, 16]",
        });
    }
    let a = 1.0 / (d as f64).sqrt();
    PureState::normalized(vec![C64::new(a, 0.0); d], vec![d])
}

/// (|0⟩ + |1⟩)/√2 embedded in the ququart.
pub fn psi_plus_one() -> PureState {
    real_state(&[H, H, 0.0, 0.0], vec![4])
}

pub fn bell(label: BellLabel) -> PureState {
    let amps = match label {
        BellLabel::PhiPlus => [H, 0.0, 0.0, H],
        BellLabel::PhiMinus => [H, 0.0, 0.0, -H],
        BellLabel::PsiPlus => [0.0, H, H, 0.0],
        BellLabel::PsiMinus => [0.0, H, -H, 0.0],
    };
    real_state(&amps, vec![2, 2])
}

pub fn singlet() -> DensityOperator {
    DensityOperator::from_pure(&bell(BellLabel::PsiMinus))
}

/// Two-qubit computational basis state |ab⟩.
pub fn product_basis(a: usize, b: usize) -> PureState {
    let mut amps = vec![ZERO; 4];
    amps[2 * a + b] = C64::new(1.0, 0.0);
    PureState::new(amps, vec![2, 2]).expect("basis state")
}

/// ξ Ψ⁻ + (1 − ξ) I/4
pub fn werner(p: WernerParams) -> DensityOperator {
    let xi = p.xi();
    let m = &singlet().into_matrix().scale_real(xi)
        + &ComplexMatrix::identity(4).scale_real((1.0 - xi) / 4.0);
    DensityOperator::new_unchecked(m, vec![2, 2])
}

pub fn werner_xi(xi: f64) -> Result<DensityOperator> {
    Ok(werner(WernerParams::new(xi)?))
}

/// Werner state as a mixture of Ψ⁻, Ψ⁺, |HH⟩ and |VV⟩; zero-weight terms are omitted.
pub fn werner_mixture(p: WernerParams) -> Vec<(f64, PureState)> {
    let xi = p.xi();
    let rest = (1.0 - xi) / 4.0;
    [
        ((1.0 + 3.0 * xi) / 4.0, bell(BellLabel::PsiMinus)),
        (rest, bell(BellLabel::PsiPlus)),
        (rest, product_basis(0, 0)),
        (rest, product_basis(1, 1)),
    ]
    .into_iter()
    .filter(|(w, _)| *w > 0.0)
    .collect()
}

/// ξ Φ⁺ + (1 − ξ) I/4, the probe state of the phase-estimation analysis.
pub fn isotropic_phi_plus(xi: f64) -> Result<DensityOperator> {
    let xi = WernerParams::new(xi)?.xi();
    let phi = DensityOperator::from_pure(&bell(BellLabel::PhiPlus));
    let m = &phi.matrix().scale_real(xi) + &ComplexMatrix::identity(4).scale_real((1.0 - xi) / 4.0);
    Ok(DensityOperator::new_unchecked(m, vec![2, 2]))
}

/// (I − Ψ⁻)/3, the output of the negative-branch replacement channel.
pub fn eta_state() -> DensityOperator {
    let m = (&ComplexMatrix::identity(4) - singlet().matrix()).scale_real(1.0 / 3.0);
    DensityOperator::new_unchecked(m, vec![2, 2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{hermitian_eig, partial_transpose};

    #[test]
    fn mcs_examples() {
        assert!(mcs(0).is_err());
        assert_eq!(mcs(1).unwrap().amplitudes(), &[C64::new(1.0, 0.0)]);
        let two = mcs(2).unwrap();
        assert!((two.amplitudes()[1].re - H).abs() < 1e-15);
        let four = mcs(4).unwrap();
        assert!(four.amplitudes().iter().all(|a| (a.re - 0.5).abs() < 1e-15));
    }

    #[test]
    fn bell_sign_conventions() {
        let m = bell(BellLabel::PsiMinus);
        assert!((m.amplitudes()[1].re - H).abs() < 1e-15);
        assert!((m.amplitudes()[2].re + H).abs() < 1e-15);
        let p = bell(BellLabel::PsiPlus);
        assert!((p.amplitudes()[2].re - H).abs() < 1e-15);
        let phi = bell(BellLabel::PhiPlus);
        assert!((phi.amplitudes()[3].re - H).abs() < 1e-15);
        assert!("chi+".parse::<BellLabel>().is_err());
        assert_eq!("psi-".parse::<BellLabel>().unwrap(), BellLabel::PsiMinus);
    }

    #[test]
    fn werner_endpoints() {
        let w0 = werner_xi(0.0).unwrap();
        assert!(w0.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-15);
        let w1 = werner_xi(1.0).unwrap();
        assert!(w1.matrix().max_abs_diff(singlet().matrix()) < 1e-15);
        assert!(werner_xi(1.5).is_err());
        assert!(werner_xi(-0.1).is_err());
    }

    #[test]
    fn werner_fidelity_at_06() {
        let w = werner_xi(0.6).unwrap();
        let f = w.matrix().expectation(bell(BellLabel::PsiMinus).amplitudes()).re;
        assert!((f - 0.7).abs() < 1e-12);
    }

    #[test]
    fn werner_mixture_weights_and_sum() {
        let one_third = werner_mixture(WernerParams::new(1.0 / 3.0).unwrap());
        let weights: Vec<f64> = one_third.iter().map(|(w, _)| *w).collect();
        for (w, e) in weights.iter().zip([0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]) {
            assert!((w - e).abs() < 1e-15);
        }
        assert_eq!(werner_mixture(WernerParams::new(1.0).unwrap()).len(), 1);
        let zero = werner_mixture(WernerParams::new(0.0).unwrap());
        assert!(zero.iter().all(|(w, _)| (*w - 0.25).abs() < 1e-15));

        for k in 0..=10 {
            let p = WernerParams::new(k as f64 / 10.0).unwrap();
            let mut acc = ComplexMatrix::zeros(4, 4);
            let mut total = 0.0;
            for (w, psi) in werner_mixture(p) {
                acc = &acc + &psi.projector().scale_real(w);
                total += w;
            }
            assert!((total - 1.0).abs() < 1e-12);
            assert!(acc.max_abs_diff(werner(p).matrix()) < 1e-12);
        }
    }

    #[test]
    fn eta_state_forms_agree() {
        let eta = eta_state();
        let f = eta.matrix().expectation(bell(BellLabel::PsiMinus).amplitudes()).re;
        assert!(f.abs() < 1e-15);
        assert!((eta.matrix().trace().re - 1.0).abs() < 1e-15);
        let mixture = (&(&bell(BellLabel::PsiPlus).projector() + &product_basis(0, 0).projector())
            + &product_basis(1, 1).projector())
            .scale_real(1.0 / 3.0);
        assert!(eta.matrix().max_abs_diff(&mixture) < 1e-12);
    }

    #[test]
    fn constructors_pass_validation() {
        for xi in [0.0, 0.2, 1.0 / 3.0, 0.7, 1.0] {
            let w = werner_xi(xi).unwrap();
            DensityOperator::new(w.matrix().clone(), vec![2, 2]).unwrap();
        }
        DensityOperator::new(eta_state().into_matrix(), vec![2, 2]).unwrap();
    }

    #[test]
    fn werner_ppt_threshold() {
        for k in 0..=20 {
            let xi = k as f64 / 20.0;
            let pt = partial_transpose(&werner_xi(xi).unwrap(), 0).unwrap();
            let min = hermitian_eig(&pt).unwrap().min_value();
            let expected = ((1.0 - 3.0 * xi) / 4.0).min((1.0 + xi) / 4.0);
            assert!((min - expected).abs() < 1e-12, "xi={xi}");
            assert_eq!(min >= -1e-12, xi <= 1.0 / 3.0 + 1e-12);
        }
    }

    #[test]
    fn ququart_encoding_bijective() {
        use Path as P;
        use Polarization as Pol;
        assert_eq!(QuquartEncoding::index(Pol::H, P::V), 0);
        assert_eq!(QuquartEncoding::index(Pol::V, P::V), 1);
        assert_eq!(QuquartEncoding::index(Pol::H, P::H), 2);
        assert_eq!(QuquartEncoding::index(Pol::V, P::H), 3);
        for i in 0..4 {
            let (pol, path) = QuquartEncoding::decode(i).unwrap();
            assert_eq!(QuquartEncoding::index(pol, path), i);
        }
        assert!(QuquartEncoding::decode(4).is_none());
    }
}
