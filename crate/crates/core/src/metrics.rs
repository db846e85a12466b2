//! Figures of merit: fidelity, coherence, negativity, quantum Fisher information.

use std::fmt;

use crate::error::{Result, VrdError};
use crate::estimator::Observable;
use crate::numcore::{hermitian_eig, partial_transpose, DensityOperator, PureState};
use crate::protocols::vrd_cost;
use crate::states::WernerParams;

/// Eigenvalue pairs with λk + λl below this are skipped in the QFI sum.
pub const QFI_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub name: String,
    pub value: f64,
    pub convention: String,
}

impl MetricReport {
    pub fn new(name: impl Into<String>, value: f64, convention: impl Into<String>) -> Result<Self> {
        if !value.is_finite() {
            return Err(VrdError::InvalidState(format!("metric value {value} is not finite")));
        }
        Ok(Self {
            name: name.into(),
            value,
            convention: convention.into(),
        })
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {:.6} ({})", self.name, self.value, self.convention)
    }
}

/// ⟨t|ρ|t⟩
pub fn fidelity_to_pure(rho: &DensityOperator, target: &PureState) -> Result<f64> {
    if rho.dim() != target.dim() {
        return Err(VrdError::DimensionMismatch {
            expected: rho.dim(),
            actual: target.dim(),
        });
    }
    Ok(rho.matrix().expectation(target.amplitudes()).re)
}

fn entropy_bits(p: impl IntoIterator<Item = f64>) -> f64 {
    p.into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.log2())
        .sum()
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    entropy_bits(rho.eigen().values)
}

/// S(diag ρ) − S(ρ), in bits.
pub fn rel_entropy_coherence(rho: &DensityOperator) -> f64 {
    let m = rho.matrix();
    let diag = (0..m.rows()).map(|i| m[(i, i)].re);
    entropy_bits(diag) - von_neumann_entropy(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativityConvention {
    /// (‖ρ^{T_A}‖₁ − 1)/2, nonnegative.
    TraceNorm,
    /// Sum of the negative eigenvalues of ρ^{T_A}, nonpositive.
    Signed,
}

impl NegativityConvention {
    pub fn label(self) -> &'static str {
        match self {
            NegativityConvention::TraceNorm => "trace_norm",
            NegativityConvention::Signed => "signed",
        }
    }
}

pub fn negativity(rho: &DensityOperator, convention: NegativityConvention) -> Result<f64> {
    if rho.dims().len() != 2 {
        return Err(VrdError::InvalidDims {
            dims: rho.dims().to_vec(),
            dim: rho.dim(),
        });
    }
    let spectrum = hermitian_eig(&partial_transpose(rho, 0)?)?.values;
    // Below this magnitude a PT eigenvalue is treated as zero.
    const TOL: f64 = 1e-14;
    let negative: f64 = spectrum.iter().filter(|&&v| v < -TOL).sum();
    Ok(match convention {
        NegativityConvention::Signed => negative + 0.0,
        NegativityConvention::TraceNorm => {
            let norm: f64 = spectrum.iter().map(|v| v.abs()).sum();
            ((norm - 1.0) / 2.0).max(0.0)
        }
    })
}

/// F_Q = 2 Σ (λk − λl)²/(λk + λl) |⟨k|A|l⟩|²
pub fn qfi(rho: &DensityOperator, generator: &Observable) -> Result<f64> {
    if generator.dim() != rho.dim() {
        return Err(VrdError::DimensionMismatch {
            expected: rho.dim(),
            actual: generator.dim(),
        });
    }
    let e = rho.eigen();
    let n = rho.dim();
    let vecs: Vec<_> = (0..n).map(|k| e.vector(k)).collect();
    let a = generator.matrix();
    let mut total = 0.0;
    for k in 0..n {
        let av = a.mul_vec(&vecs[k]);
        for l in 0..n {
            let (lk, ll) = (e.values[k].max(0.0), e.values[l].max(0.0));
            let s = lk + ll;
            if s <= QFI_THRESHOLD {
                continue;
            }
            let elem: num_complex::Complex64 = vecs[l].iter().zip(&av).map(|(x, y)| x.conj() * y).sum();
            total += (lk - ll).powi(2) / s * elem.norm_sqr();
        }
    }
    Ok(2.0 * total)
}

/// Z⊗I + I⊗Z
pub fn collective_z() -> Observable {
    let z = crate::numcore::pauli(3);
    let id = crate::numcore::ComplexMatrix::identity(2);
    Observable::new("ZI+IZ", &z.kron(&id) + &id.kron(&z)).expect("Hermitian")
}

/// 32ξ²/(1 + ξ): QFI of ξΦ⁺ + (1 − ξ)I/4 under Z⊗I + I⊗Z.
pub fn qfi_isotropic(xi: f64) -> f64 {
    32.0 * xi * xi / (1.0 + xi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrbCoefficients {
    /// √((1 + ξ)/(32ξ²)); +∞ at ξ = 0.
    pub noisy: f64,
    /// C(ξ)/4 with C the distillation cost.
    pub distilled: f64,
}

pub fn crb_coefficients(xi: f64) -> Result<CrbCoefficients> {
    let xi = WernerParams::new(xi)?.xi();
    let noisy = if xi == 0.0 {
        f64::INFINITY
    } else {
        ((1.0 + xi) / (32.0 * xi * xi)).sqrt()
    };
    Ok(CrbCoefficients {
        noisy,
        distilled: vrd_cost(xi) / 4.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::ComplexMatrix;
    use crate::states::{bell, mcs, psi_plus_one, singlet, werner_xi, BellLabel};

    fn zz_generator() -> Observable {
        collective_z()
    }

    fn isotropic(xi: f64) -> DensityOperator {
        crate::states::isotropic_phi_plus(xi).unwrap()
    }

    #[test]
    fn fidelity_examples() {
        let t = mcs(4).unwrap();
        assert!((fidelity_to_pure(&DensityOperator::from_pure(&t), &t).unwrap() - 1.0).abs() < 1e-12);
        let f = fidelity_to_pure(&DensityOperator::from_pure(&psi_plus_one()), &t).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
        for xi in [0.0, 0.3, 0.6, 1.0] {
            let f = fidelity_to_pure(&werner_xi(xi).unwrap(), &bell(BellLabel::PsiMinus)).unwrap();
            assert!((f - (1.0 + 3.0 * xi) / 4.0).abs() < 1e-12);
        }
        assert!(fidelity_to_pure(&singlet(), &mcs(2).unwrap()).is_err());
    }

    #[test]
    fn coherence_examples() {
        let diag = DensityOperator::new(ComplexMatrix::from_real_diagonal(&[0.5, 0.3, 0.2]), vec![3]).unwrap();
        assert!(rel_entropy_coherence(&diag).abs() < 1e-12);
        let c = rel_entropy_coherence(&DensityOperator::from_pure(&psi_plus_one()));
        assert!((c - 1.0).abs() < 1e-10);
        let c = rel_entropy_coherence(&DensityOperator::from_pure(&mcs(4).unwrap()));
        assert!((c - 2.0).abs() < 1e-10);
    }

    #[test]
    fn negativity_examples() {
        let mixed = DensityOperator::maximally_mixed(vec![2, 2]);
        for c in [NegativityConvention::Signed, NegativityConvention::TraceNorm] {
            assert_eq!(negativity(&mixed, c).unwrap(), 0.0);
        }
        assert!((negativity(&singlet(), NegativityConvention::Signed).unwrap() + 0.5).abs() < 1e-12);
        assert!((negativity(&singlet(), NegativityConvention::TraceNorm).unwrap() - 0.5).abs() < 1e-12);
        for k in 0..=10 {
            let xi = k as f64 / 10.0;
            let n = negativity(&werner_xi(xi).unwrap(), NegativityConvention::Signed).unwrap();
            assert!((n - ((1.0 - 3.0 * xi) / 4.0).min(0.0)).abs() < 1e-12, "xi={xi}");
        }
        let flat = DensityOperator::maximally_mixed(vec![4]);
        assert!(negativity(&flat, NegativityConvention::Signed).is_err());
    }

    #[test]
    fn qfi_examples() {
        let phi = DensityOperator::from_pure(&bell(BellLabel::PhiPlus));
        assert!((qfi(&phi, &zz_generator()).unwrap() - 16.0).abs() < 1e-10);
        let diag = DensityOperator::new(ComplexMatrix::from_real_diagonal(&[0.4, 0.3, 0.2, 0.1]), vec![2, 2])
            .unwrap();
        assert!(qfi(&diag, &zz_generator()).unwrap().abs() < 1e-12);
        for k in 1..=10 {
            let xi = k as f64 / 10.0;
            let q = qfi(&isotropic(xi), &zz_generator()).unwrap();
            assert!((q - qfi_isotropic(xi)).abs() < 1e-9, "xi={xi}");
        }
    }

    #[test]
    fn crb_examples() {
        let one = crb_coefficients(1.0).unwrap();
        assert!((one.noisy - 0.25).abs() < 1e-12 && (one.distilled - 0.25).abs() < 1e-12);
        let half = crb_coefficients(0.5).unwrap();
        assert!((half.noisy - (1.5f64 / 8.0).sqrt()).abs() < 1e-12);
        assert!((half.distilled - 0.55).abs() < 1e-12);
        assert!(crb_coefficients(0.0).unwrap().noisy.is_infinite());
        assert!(crb_coefficients(1.2).is_err());
        for k in 4..10 {
            let c = crb_coefficients(k as f64 / 10.0).unwrap();
            assert!(c.distilled > c.noisy);
        }
    }

    #[test]
    fn report_rejects_nonfinite() {
        assert!(MetricReport::new("x", f64::NAN, "").is_err());
        assert!(MetricReport::new("x", 1.0, "bits").is_ok());
    }
}
