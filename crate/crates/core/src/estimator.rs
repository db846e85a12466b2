//! Monte-Carlo evaluation of Tr[O Γ̃(ρ)] for a quasi-channel Γ̃.
//!
//! Each shot draws a branch with its probability, obtains a single value for
//! the observable on that branch's output and contributes C·sign·value. Shot
//! `i` always uses RNG stream `i` of the plan's seed, so any partition of the
//! shot range into shards produces the same values in the same order.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::channels::{QuasiChannel, Sign};
use crate::error::{Result, VrdError};
use crate::numcore::{hermitian_eig, pauli, ComplexMatrix, DensityOperator, PureState, STRUCTURE_TOL};
use crate::rng;

/// Hermitian observable with its spectral decomposition cached.
#[derive(Debug, Clone)]
pub struct Observable {
    name: String,
    matrix: ComplexMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<num_complex::Complex64>>,
    bound: f64,
}

impl Observable {
    pub fn new(name: impl Into<String>, matrix: ComplexMatrix) -> Result<Self> {
        let asymmetry = matrix.hermitian_asymmetry();
        if asymmetry > STRUCTURE_TOL {
            return Err(VrdError::NotHermitian { asymmetry });
        }
        let e = hermitian_eig(&matrix)?;
        let bound = e.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let eigenvectors = (0..e.values.len()).map(|k| e.vector(k)).collect();
        Ok(Self {
            name: name.into(),
            matrix,
            eigenvalues: e.values,
            eigenvectors,
            bound,
        })
    }

    pub fn projector(name: impl Into<String>, psi: &PureState) -> Self {
        Self::new(name, psi.projector()).expect("projectors are Hermitian")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Spectral norm ‖O‖∞.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Born probabilities of each eigenvalue on `rho`.
    pub fn born_probabilities(&self, rho: &DensityOperator) -> Vec<f64> {
        let raw: Vec<f64> = self
            .eigenvectors
            .iter()
            .map(|v| rho.matrix().expectation(v).re.max(0.0))
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|p| p / total).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Uses the exact branch expectation: only the branch choice is random.
    ExpectationOracle,
    /// Samples an eigenvalue with Born probability: models a projective measurement.
    ProjectiveSampling,
}

impl FromStr for SamplingMode {
    type Err = VrdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expectation_oracle" | "oracle" => Ok(Self::ExpectationOracle),
            "projective_sampling" | "projective" => Ok(Self::ProjectiveSampling),
            other => Err(VrdError::InvalidLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingPlan {
    pub shots: u64,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl SamplingPlan {
    pub fn new(shots: u64, seed: u64, mode: SamplingMode) -> Result<Self> {
        if shots == 0 {
            return Err(VrdError::OutOfRange {
                name: "shots",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        Ok(Self { shots, seed, mode })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    pub mean: f64,
    /// Sample standard deviation over √shots (unbiased variance).
    pub stderr: f64,
    pub shots: u64,
    pub cost: f64,
    pub seed: u64,
}

impl fmt::Display for EstimateResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.6} ± {:.6} ({} shots, C = {:.4})",
            self.mean, self.stderr, self.shots, self.cost
        )
    }
}

/// Mean and standard error of a sequence of shot values.
pub fn summarize(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// A branch output prepared once and reused by every shot.
#[derive(Debug, Clone)]
pub struct PreparedBranch {
    pub sign: Sign,
    pub probability: f64,
    pub state: DensityOperator,
}

/// Quasi-probability ensemble of prepared branch outputs with its cost.
#[derive(Debug, Clone)]
pub struct PreparedEnsemble {
    branches: Vec<PreparedBranch>,
    cumulative: Vec<f64>,
    cost: f64,
}

impl PreparedEnsemble {
    pub fn new(branches: Vec<PreparedBranch>, cost: f64) -> Result<Self> {
        if branches.is_empty() {
            return Err(VrdError::Empty("ensemble needs at least one branch"));
        }
        let mut acc = 0.0;
        let cumulative = branches
            .iter()
            .map(|b| {
                acc += b.probability;
                acc
            })
            .collect();
        Ok(Self {
            branches,
            cumulative,
            cost,
        })
    }

    pub fn from_quasi(qc: &QuasiChannel, rho: &DensityOperator) -> Result<Self> {
        let branches = qc
            .branches()
            .iter()
            .map(|b| {
                Ok(PreparedBranch {
                    sign: b.sign,
                    probability: b.probability,
                    state: b.channel.apply(rho)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(branches, qc.cost())
    }

    pub fn branches(&self) -> &[PreparedBranch] {
        &self.branches
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn dim(&self) -> usize {
        self.branches[0].state.dim()
    }

    /// Index of the branch selected by a uniform draw `u` in [0, 1).
    pub fn pick(&self, u: f64) -> usize {
        let total = *self.cumulative.last().expect("nonempty");
        let target = u * total;
        self.cumulative
            .iter()
            .position(|&c| target < c)
            .unwrap_or(self.branches.len() - 1)
    }

    /// Shot values for the shots in `range`, in index order.
    pub fn shot_values(
        &self,
        obs: &Observable,
        plan: &SamplingPlan,
        range: Range<u64>,
    ) -> Result<Vec<f64>> {
        if obs.dim() != self.dim() {
            return Err(VrdError::DimensionMismatch {
                expected: self.dim(),
                actual: obs.dim(),
            });
        }
        let per_branch: Vec<Vec<f64>> = match plan.mode {
            SamplingMode::ExpectationOracle => self
                .branches
                .iter()
                .map(|b| vec![b.state.expectation(obs.matrix())])
                .collect(),
            SamplingMode::ProjectiveSampling => self
                .branches
                .iter()
                .map(|b| {
                    let mut acc = 0.0;
                    obs.born_probabilities(&b.state)
                        .into_iter()
                        .map(|p| {
                            acc += p;
                            acc
                        })
                        .collect()
                })
                .collect(),
        };
        let values = range
            .map(|shot| {
                let mut r = rng::stream(plan.seed, shot);
                let b = self.pick(r.random::<f64>());
                let value = match plan.mode {
                    SamplingMode::ExpectationOracle => per_branch[b][0],
                    SamplingMode::ProjectiveSampling => {
                        let cdf = &per_branch[b];
                        let u: f64 = r.random::<f64>() * cdf[cdf.len() - 1];
                        let k = cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1);
                        obs.eigenvalues()[k]
                    }
                };
                self.cost * self.branches[b].sign.value() * value
            })
            .collect();
        Ok(values)
    }

    pub fn estimate(&self, obs: &Observable, plan: &SamplingPlan) -> Result<EstimateResult> {
        if plan.shots == 0 {
            return Err(VrdError::OutOfRange {
                name: "shots",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        let values = self.shot_values(obs, plan, 0..plan.shots)?;
        Ok(result_from_values(&values, self.cost, plan.seed))
    }

    /// Exact value C·Σ sign·p·Tr[O ρ_b].
    pub fn exact(&self, obs: &Observable) -> f64 {
        self.branches
            .iter()
            .map(|b| self.cost * b.sign.value() * b.probability * b.state.expectation(obs.matrix()))
            .sum()
    }
}

pub fn result_from_values(values: &[f64], cost: f64, seed: u64) -> EstimateResult {
    let (mean, stderr) = summarize(values);
    EstimateResult {
        mean,
        stderr,
        shots: values.len() as u64,
        cost,
        seed,
    }
}

pub fn estimate(
    qc: &QuasiChannel,
    rho: &DensityOperator,
    obs: &Observable,
    plan: &SamplingPlan,
) -> Result<EstimateResult> {
    PreparedEnsemble::from_quasi(qc, rho)?.estimate(obs, plan)
}

/// Smallest N with 2·exp(−N ε² / (2 (C‖O‖)²)) ≤ δ, before rounding.
pub fn hoeffding_sample_complexity(cost: f64, obs_bound: f64, epsilon: f64, delta: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(VrdError::OutOfRange {
            name: "epsilon",
            value: epsilon,
            range: "(0, inf)",
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(VrdError::OutOfRange {
            name: "delta",
            value: delta,
            range: "(0, 1)",
        });
    }
    let range = cost * obs_bound;
    Ok(2.0 * range * range * (2.0 / delta).ln() / (epsilon * epsilon))
}

/// ceil(2 (C‖O‖)² ln(2/δ) / ε²), at least one shot.
pub fn shots_for_accuracy(cost: f64, obs_bound: f64, epsilon: f64, delta: f64) -> Result<u64> {
    let n = hoeffding_sample_complexity(cost, obs_bound, epsilon, delta)?;
    Ok((n.ceil() as u64).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const MEASURABLE: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> ComplexMatrix {
        pauli(self as usize)
    }

    fn require_measurable(self) -> Result<()> {
        if self == Pauli::I {
            Err(VrdError::InvalidLabel("I is not a measurement basis".into()))
        } else {
            Ok(())
        }
    }
}

impl FromStr for Pauli {
    type Err = VrdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" => Ok(Pauli::I),
            "X" => Ok(Pauli::X),
            "Y" => Ok(Pauli::Y),
            "Z" => Ok(Pauli::Z),
            other => Err(VrdError::InvalidLabel(other.to_string())),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

/// Two-qubit measurement setting (basis on qubit 0, basis on qubit 1).
pub type PauliSetting = (Pauli, Pauli);

/// Outcome bins are ordered (+,+), (+,−), (−,+), (−,−).
pub fn setting_probabilities(rho: &DensityOperator, setting: PauliSetting) -> Result<[f64; 4]> {
    setting.0.require_measurable()?;
    setting.1.require_measurable()?;
    if rho.dim() != 4 {
        return Err(VrdError::DimensionMismatch {
            expected: 4,
            actual: rho.dim(),
        });
    }
    let id = ComplexMatrix::identity(2);
    let proj = |p: Pauli, s: f64| (&id + &p.matrix().scale_real(s)).scale_real(0.5);
    let mut probs = [0.0; 4];
    for (a, sa) in [1.0, -1.0].into_iter().enumerate() {
        for (b, sb) in [1.0, -1.0].into_iter().enumerate() {
            let effect = proj(setting.0, sa).kron(&proj(setting.1, sb));
            probs[2 * a + b] = rho.expectation(&effect).max(0.0);
        }
    }
    let total: f64 = probs.iter().sum();
    Ok(probs.map(|p| p / total))
}

/// Multinomial draw via sequential conditional binomials.
pub(crate) fn multinomial<R: Rng>(probs: &[f64; 4], shots: u64, r: &mut R) -> [u64; 4] {
    let mut counts = [0u64; 4];
    let mut remaining = shots;
    let mut mass = 1.0;
    for i in 0..3 {
        if remaining == 0 {
            break;
        }
        let p = if mass > 0.0 { (probs[i] / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, p).expect("p in [0, 1]").sample(r);
        counts[i] = k;
        remaining -= k;
        mass -= probs[i];
    }
    counts[3] = remaining;
    counts
}

pub(crate) fn sample_setting_with<R: Rng>(
    rho: &DensityOperator,
    setting: PauliSetting,
    shots: u64,
    r: &mut R,
) -> Result<[u64; 4]> {
    let probs = setting_probabilities(rho, setting)?;
    Ok(multinomial(&probs, shots, r))
}

pub fn measure_pauli_setting(
    rho: &DensityOperator,
    setting: PauliSetting,
    shots: u64,
    seed: u64,
) -> Result<[u64; 4]> {
    let mut r = rng::stream(seed, 0);
    sample_setting_with(rho, setting, shots, &mut r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{coherence_vrd, entanglement_vrd};
    use crate::states::{mcs, product_basis, psi_plus_one, singlet, werner_xi, bell, BellLabel};

    #[test]
    fn identity_oracle_is_exact() {
        let obs = Observable::projector("psi-", &bell(BellLabel::PsiMinus));
        let plan = SamplingPlan::new(1000, 1, SamplingMode::ExpectationOracle).unwrap();
        let r = estimate(&QuasiChannel::identity(4), &singlet(), &obs, &plan).unwrap();
        assert!((r.mean - 1.0).abs() < 1e-12);
        assert!(r.stderr < 1e-12);
    }

    #[test]
    fn coherence_estimate_within_five_sigma_bound() {
        let obs = Observable::projector("mcs", &mcs(4).unwrap());
        let rho = DensityOperator::from_pure(&psi_plus_one());
        let shots = 100_000;
        let plan = SamplingPlan::new(shots, 11, SamplingMode::ProjectiveSampling).unwrap();
        let r = estimate(&coherence_vrd(), &rho, &obs, &plan).unwrap();
        assert!((r.mean - 1.0).abs() <= 5.0 * 3.0 / (shots as f64).sqrt(), "{r}");
    }

    #[test]
    fn entanglement_estimate_within_bound() {
        let obs = Observable::projector("psi-", &bell(BellLabel::PsiMinus));
        let qc = entanglement_vrd(0.6).unwrap();
        let shots = 100_000;
        let plan = SamplingPlan::new(shots, 5, SamplingMode::ProjectiveSampling).unwrap();
        let r = estimate(&qc, &werner_xi(0.6).unwrap(), &obs, &plan).unwrap();
        assert!((r.mean - 1.0).abs() <= 5.0 * qc.cost() / (shots as f64).sqrt(), "{r}");
    }

    #[test]
    fn zero_shots_and_dimension_errors() {
        assert!(SamplingPlan::new(0, 1, SamplingMode::ProjectiveSampling).is_err());
        let obs = Observable::projector("0", &crate::numcore::PureState::basis(2, 0).unwrap());
        let plan = SamplingPlan::new(10, 1, SamplingMode::ProjectiveSampling).unwrap();
        assert!(matches!(
            estimate(&QuasiChannel::identity(4), &singlet(), &obs, &plan),
            Err(VrdError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sharding_does_not_change_values() {
        let obs = Observable::projector("psi-", &bell(BellLabel::PsiMinus));
        let ens = PreparedEnsemble::from_quasi(&entanglement_vrd(0.4).unwrap(), &werner_xi(0.4).unwrap())
            .unwrap();
        let plan = SamplingPlan::new(1000, 99, SamplingMode::ProjectiveSampling).unwrap();
        let whole = ens.shot_values(&obs, &plan, 0..1000).unwrap();
        let mut sharded = ens.shot_values(&obs, &plan, 0..337).unwrap();
        sharded.extend(ens.shot_values(&obs, &plan, 337..1000).unwrap());
        assert_eq!(whole, sharded);
    }

    #[test]
    fn hoeffding_examples() {
        assert_eq!(shots_for_accuracy(1.0, 1.0, 0.1, 0.05).unwrap(), 738);
        assert_eq!(shots_for_accuracy(1.0, 1.0, 1e9, 0.05).unwrap(), 1);
        let n1 = hoeffding_sample_complexity(1.0, 1.0, 0.1, 0.05).unwrap();
        let n3 = hoeffding_sample_complexity(3.0, 1.0, 0.1, 0.05).unwrap();
        assert!((n3 / n1 - 9.0).abs() < 1e-12);
        assert!(shots_for_accuracy(1.0, 1.0, 0.0, 0.05).is_err());
        assert!(shots_for_accuracy(1.0, 1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn pauli_setting_examples() {
        let zz = DensityOperator::from_pure(&product_basis(0, 0));
        assert_eq!(
            measure_pauli_setting(&zz, (Pauli::Z, Pauli::Z), 500, 3).unwrap(),
            [500, 0, 0, 0]
        );
        let counts = measure_pauli_setting(&singlet(), (Pauli::X, Pauli::X), 10_000, 3).unwrap();
        assert_eq!(counts[0] + counts[3], 0);
        assert_eq!(counts.iter().sum::<u64>(), 10_000);
        assert!((counts[1] as f64 - 5000.0).abs() < 5.0 * 50.0);

        let mixed = DensityOperator::maximally_mixed(vec![2, 2]);
        let counts = measure_pauli_setting(&mixed, (Pauli::Y, Pauli::X), 40_000, 8).unwrap();
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 5.0 * 86.7, "{counts:?}");
        }
        assert!(measure_pauli_setting(&mixed, (Pauli::I, Pauli::X), 10, 0).is_err());
        assert!("W".parse::<Pauli>().is_err());
    }
}
