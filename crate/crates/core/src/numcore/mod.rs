//! Dense complex linear algebra for Hilbert spaces up to dimension 16.
//!
//! Composite systems use a single index convention throughout the crate:
//! subsystem 0 is the most significant digit of the composite basis index,
//! so for dims `[2, 2]` the basis is ordered |00⟩, |01⟩, |10⟩, |11⟩.

mod eigen;
mod matrix;

pub use eigen::{hermitian_eig, HermitianEigen, HERMITIAN_TOL};
pub use matrix::{pauli, ComplexMatrix};
pub(crate) use matrix::{ONE, ZERO};

use num_complex::Complex64 as C64;

use crate::error::{Result, VrdError};

/// Structural tolerance for Hermiticity and unit trace.
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted for a density operator.
pub const PSD_TOL: f64 = 1e-9;
pub const MAX_DIM: usize = 16;

pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    m.require_square()?;
    if m.is_hermitian(STRUCTURE_TOL) {
        let e = hermitian_eig(m)?;
        return Ok(e.values.iter().map(|x| x.abs()).sum());
    }
    let gram = &m.adjoint() * m;
    let e = hermitian_eig(&gram)?;
    Ok(e.values.iter().map(|x| x.max(0.0).sqrt()).sum())
}

fn check_dims(dims: &[usize], dim: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != dim {
        return Err(VrdError::InvalidDims {
            dims: dims.to_vec(),
            dim,
        });
    }
    Ok(())
}

/// Splits a composite index into per-subsystem digits.
fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Transposes the chosen tensor factor of `m`, leaving the others untouched.
pub fn partial_transpose_matrix(
    m: &ComplexMatrix,
    dims: &[usize],
    subsystem: usize,
) -> Result<ComplexMatrix> {
    let n = m.require_square()?;
    check_dims(dims, n)?;
    if subsystem >= dims.len() {
        return Err(VrdError::SubsystemOutOfRange {
            index: subsystem,
            count: dims.len(),
        });
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let di = digits(i, dims);
        for j in 0..n {
            let dj = digits(j, dims);
            let mut ri = di.clone();
            let mut rj = dj.clone();
            ri[subsystem] = dj[subsystem];
            rj[subsystem] = di[subsystem];
            out[(compose(&ri, dims), compose(&rj, dims))] = m[(i, j)];
        }
    }
    Ok(out)
}

pub fn partial_transpose(rho: &DensityOperator, subsystem: usize) -> Result<ComplexMatrix> {
    partial_transpose_matrix(rho.matrix(), rho.dims(), subsystem)
}

/// Traces out every subsystem not listed in `keep`.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    dims: &[usize],
    keep: &[usize],
) -> Result<(ComplexMatrix, Vec<usize>)> {
    let n = m.require_square()?;
    check_dims(dims, n)?;
    if keep.is_empty() {
        return Err(VrdError::Empty("partial trace needs a nonempty keep set"));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(VrdError::SubsystemOutOfRange {
            index: bad,
            count: dims.len(),
        });
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for i in 0..n {
        let di = digits(i, dims);
        for j in 0..n {
            let dj = digits(j, dims);
            let traced_match = (0..dims.len())
                .filter(|s| !keep.contains(s))
                .all(|s| di[s] == dj[s]);
            if !traced_match {
                continue;
            }
            let ki: Vec<usize> = keep.iter().map(|&s| di[s]).collect();
            let kj: Vec<usize> = keep.iter().map(|&s| dj[s]).collect();
            out[(compose(&ki, &kept_dims), compose(&kj, &kept_dims))] += m[(i, j)];
        }
    }
    Ok((out, kept_dims))
}

pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let (m, dims) = partial_trace_matrix(rho.matrix(), rho.dims(), keep)?;
    DensityOperator::new(m, dims)
}

/// Hermitian, unit-trace, positive semidefinite matrix over labeled subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let n = matrix.require_square()?;
        check_dims(&dims, n)?;
        if n > MAX_DIM {
            return Err(VrdError::InvalidState(format!(
                "dimension {n} exceeds {MAX_DIM}"
            )));
        }
        let asymmetry = matrix.hermitian_asymmetry();
        if asymmetry > STRUCTURE_TOL {
            return Err(VrdError::NotHermitian { asymmetry });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STRUCTURE_TOL || tr.im.abs() > STRUCTURE_TOL {
            return Err(VrdError::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eig(&matrix)?.min_value();
        if min < -PSD_TOL {
            return Err(VrdError::InvalidState(format!(
                "minimum eigenvalue {min:.3e} is negative"
            )));
        }
        Ok(Self { matrix, dims })
    }

    /// Skips validation; callers guarantee the invariants analytically.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert!(matrix.is_hermitian(1e-8));
        debug_assert!((matrix.trace().re - 1.0).abs() < 1e-8);
        Self { matrix, dims }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            matrix: psi.projector(),
            dims: psi.dims().to_vec(),
        }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        Self {
            matrix: ComplexMatrix::identity(n).scale_real(1.0 / n as f64),
            dims,
        }
    }

    /// Convex combination Σ w_i ρ_i; weights must be nonnegative and sum to 1.
    pub fn mixture(terms: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or(VrdError::Empty("mixture needs at least one term"))?;
        let n = first.1.dim();
        let mut acc = ComplexMatrix::zeros(n, n);
        for (w, rho) in terms {
            if rho.dim() != n {
                return Err(VrdError::DimensionMismatch {
                    expected: n,
                    actual: rho.dim(),
                });
            }
            if *w < 0.0 {
                return Err(VrdError::OutOfRange {
                    name: "mixture weight",
                    value: *w,
                    range: "[0, inf)",
                });
            }
            acc = &acc + &rho.matrix.scale_real(*w);
        }
        Self::new(acc, first.1.dims.clone())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Relabels the subsystem structure without touching the matrix.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, self.dim())?;
        Ok(Self {
            matrix: self.matrix,
            dims,
        })
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            matrix: self.matrix.kron(&other.matrix),
            dims,
        }
    }

    /// tr(ρ O) for Hermitian O.
    pub fn expectation(&self, observable: &ComplexMatrix) -> f64 {
        self.matrix.trace_product_re(observable)
    }

    pub fn eigen(&self) -> HermitianEigen {
        hermitian_eig(&self.matrix).expect("density operators are Hermitian")
    }
}

/// Normalized state vector over labeled subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    dims: Vec<usize>,
}

impl PureState {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(VrdError::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalizes and fixes the global phase so the first nonzero amplitude is real positive.
    pub fn normalized(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(VrdError::InvalidState("cannot normalize a zero vector".into()));
        }
        let lead = amplitudes
            .iter()
            .find(|z| z.norm() > 1e-12)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(ONE);
        let amplitudes = amplitudes.iter().map(|z| z * lead / norm).collect();
        Ok(Self { amplitudes, dims })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(VrdError::SubsystemOutOfRange {
                index,
                count: dim,
            });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(amps, vec![dim])
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, self.dim())?;
        Ok(Self {
            amplitudes: self.amplitudes,
            dims,
        })
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨self|other⟩|², insensitive to global phase.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState {
            amplitudes: amps,
            dims,
        }
    }

    pub fn evolve(&self, u: &ComplexMatrix) -> Result<PureState> {
        if u.cols() != self.dim() || u.rows() != self.dim() {
            return Err(VrdError::DimensionMismatch {
                expected: self.dim(),
                actual: u.cols(),
            });
        }
        let out = u.mul_vec(&self.amplitudes);
        PureState::new(out, self.dims.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_singlet() -> DensityOperator {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = PureState::new(
            vec![ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO],
            vec![2, 2],
        )
        .unwrap();
        DensityOperator::from_pure(&psi)
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&ComplexMatrix::identity(4)).unwrap() - 4.0).abs() < 1e-14);
        let d = ComplexMatrix::from_real_diagonal(&[0.5, -0.5]);
        assert!((trace_norm(&d).unwrap() - 1.0).abs() < 1e-14);
        let pt = partial_transpose(&bell_singlet(), 0).unwrap();
        assert!((trace_norm(&pt).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_non_hermitian_uses_singular_values() {
        // [[0, 2], [0, 0]] has singular values {2, 0}.
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]).unwrap();
        assert!((trace_norm(&m).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singlet_partial_transpose_spectrum() {
        let pt = partial_transpose(&bell_singlet(), 0).unwrap();
        let e = hermitian_eig(&pt).unwrap();
        let expected = [0.5, 0.5, 0.5, -0.5];
        for (a, b) in e.values.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{:?}", e.values);
        }
    }

    #[test]
    fn partial_transpose_of_product_factorizes() {
        let a = ComplexMatrix::from_vec(
            2,
            2,
            vec![
                C64::new(0.7, 0.0),
                C64::new(0.1, 0.2),
                C64::new(0.1, -0.2),
                C64::new(0.3, 0.0),
            ],
        )
        .unwrap();
        let b = ComplexMatrix::from_real_diagonal(&[0.4, 0.6]);
        let rho = DensityOperator::new(a.kron(&b), vec![2, 2]).unwrap();
        let pt = partial_transpose(&rho, 0).unwrap();
        assert!(pt.max_abs_diff(&a.transpose().kron(&b)) < 1e-15);
    }

    #[test]
    fn partial_transpose_diagonal_unchanged_and_bad_index() {
        let rho = DensityOperator::new(
            ComplexMatrix::from_real_diagonal(&[0.1, 0.2, 0.3, 0.4]),
            vec![2, 2],
        )
        .unwrap();
        assert_eq!(&partial_transpose(&rho, 1).unwrap(), rho.matrix());
        assert!(matches!(
            partial_transpose(&rho, 2),
            Err(VrdError::SubsystemOutOfRange { .. })
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let marginal = partial_trace(&bell_singlet(), &[0]).unwrap();
        assert!(marginal
            .matrix()
            .max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5))
            < 1e-15);
        assert_eq!(marginal.dims(), &[2]);
        assert!(partial_trace(&bell_singlet(), &[]).is_err());
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let a = ComplexMatrix::from_real(2, 2, &[0.8, 0.1, 0.1, 0.2]).unwrap();
        let b = ComplexMatrix::from_real(3, 3, &[0.5, 0.0, 0.1, 0.0, 0.25, 0.0, 0.1, 0.0, 0.25]).unwrap();
        let rho = DensityOperator::new(a.kron(&b), vec![2, 3]).unwrap();
        let ra = partial_trace(&rho, &[0]).unwrap();
        let rb = partial_trace(&rho, &[1]).unwrap();
        assert!(ra.matrix().max_abs_diff(&a) < 1e-15);
        assert!(rb.matrix().max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn density_operator_validation() {
        let not_psd = ComplexMatrix::from_real_diagonal(&[1.2, -0.2]);
        assert!(DensityOperator::new(not_psd, vec![2]).is_err());
        let bad_trace = ComplexMatrix::from_real_diagonal(&[0.5, 0.4]);
        assert!(DensityOperator::new(bad_trace, vec![2]).is_err());
        let ok = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        assert!(DensityOperator::new(ok.clone(), vec![3]).is_err());
        assert!(DensityOperator::new(ok, vec![2]).is_ok());
    }

    #[test]
    fn normalized_fixes_phase() {
        let i = C64::new(0.0, 1.0);
        let psi = PureState::normalized(vec![i * 3.0, C64::new(4.0, 0.0)], vec![2]).unwrap();
        assert!((psi.amplitudes()[0] - C64::new(0.6, 0.0)).norm() < 1e-15);
        assert!((psi.amplitudes()[1] - C64::new(0.0, -0.8)).norm() < 1e-15);
    }
}
