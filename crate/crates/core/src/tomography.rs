//! Two-qubit Pauli tomography: linear inversion, projection onto the
//! physical set and reconstruction of virtual states branch by branch.
//!
//! Ququart data is handled through the path ⊗ polarization factorization, so
//! the 4-level coherence protocol uses the same nine settings.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::channels::QuasiChannel;
use crate::error::{Result, VrdError};
use crate::estimator::{sample_setting_with, setting_probabilities, Pauli, PauliSetting};
use crate::numcore::{hermitian_eig, ComplexMatrix, DensityOperator, HERMITIAN_TOL};
use crate::rng;

pub const CSV_HEADER: [&str; 7] = ["setting", "n_pp", "n_pm", "n_mp", "n_mm", "shots", "seed"];

/// The nine settings in X, Y, Z order on each qubit.
pub fn all_settings() -> Vec<PauliSetting> {
    let mut out = Vec::with_capacity(9);
    for a in Pauli::MEASURABLE {
        for b in Pauli::MEASURABLE {
            out.push((a, b));
        }
    }
    out
}

fn setting_label(s: PauliSetting) -> String {
    format!("{}{}", s.0, s.1)
}

fn parse_setting(label: &str) -> Result<PauliSetting> {
    let mut chars = label.chars();
    let (Some(a), Some(b), None) = (chars.next(), chars.next(), chars.next()) else {
        return Err(VrdError::InvalidLabel(label.to_string()));
    };
    Ok((a.to_string().parse()?, b.to_string().parse()?))
}

/// Outcome counts per two-qubit Pauli setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliDataset {
    counts: BTreeMap<PauliSetting, [u64; 4]>,
    shots: u64,
    seed: u64,
}

impl PauliDataset {
    pub fn new(shots: u64, seed: u64) -> Self {
        Self {
            counts: BTreeMap::new(),
            shots,
            seed,
        }
    }

    pub fn insert(&mut self, setting: PauliSetting, counts: [u64; 4]) -> Result<()> {
        if setting.0 == Pauli::I || setting.1 == Pauli::I {
            return Err(VrdError::InvalidLabel(setting_label(setting)));
        }
        let total: u64 = counts.iter().sum();
        if total != self.shots {
            return Err(VrdError::IncompleteDataset(format!(
                "setting {} has {total} counts, expected {}",
                setting_label(setting),
                self.shots
            )));
        }
        self.counts.insert(setting, counts);
        Ok(())
    }

    /// Samples all nine settings; setting `s` uses stream `s` of `seed`.
    pub fn sample(rho: &DensityOperator, shots: u64, seed: u64) -> Result<Self> {
        Self::sample_block(rho, shots, seed, 0)
    }

    pub(crate) fn sample_block(rho: &DensityOperator, shots: u64, seed: u64, block: u32) -> Result<Self> {
        let mut data = Self::new(shots, seed);
        for (i, s) in all_settings().into_iter().enumerate() {
            let mut r = rng::stream(seed, rng::block_stream_id(block, i as u32));
            data.insert(s, sample_setting_with(rho, s, shots, &mut r)?)?;
        }
        Ok(data)
    }

    pub fn counts(&self, setting: PauliSetting) -> Option<[u64; 4]> {
        self.counts.get(&setting).copied()
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_complete(&self) -> bool {
        all_settings().iter().all(|s| self.counts.contains_key(s))
    }

    /// The 16 expectation values ⟨σ_a ⊗ σ_b⟩ indexed by 4a + b.
    ///
    /// Single-qubit marginals are averaged over every setting that measures them.
    pub fn expectations(&self) -> Result<[f64; 16]> {
        if !self.is_complete() {
            let missing: Vec<String> = all_settings()
                .into_iter()
                .filter(|s| !self.counts.contains_key(s))
                .map(setting_label)
                .collect();
            return Err(VrdError::IncompleteDataset(format!(
                "missing settings {}",
                missing.join(", ")
            )));
        }
        if self.shots == 0 {
            return Err(VrdError::IncompleteDataset("zero shots per setting".into()));
        }
        let n = self.shots as f64;
        let mut f = [0.0; 16];
        f[0] = 1.0;
        for (&(a, b), c) in &self.counts {
            let [pp, pm, mp, mm] = c.map(|x| x as f64);
            let (ia, ib) = (a as usize, b as usize);
            f[4 * ia + ib] = (pp - pm - mp + mm) / n;
            f[4 * ia] += (pp + pm - mp - mm) / (3.0 * n);
            f[ib] += (pp - pm + mp - mm) / (3.0 * n);
        }
        Ok(f)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| VrdError::Parse {
            line: 0,
            message: e.to_string(),
        };
        w.write_record(CSV_HEADER).map_err(io)?;
        for (&s, c) in &self.counts {
            let mut row = vec![setting_label(s)];
            row.extend(c.iter().map(u64::to_string));
            row.push(self.shots.to_string());
            row.push(self.seed.to_string());
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| VrdError::Parse {
            line: 0,
            message: e.to_string(),
        })
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut data: Option<Self> = None;
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let err = |message: String| VrdError::Parse { line, message };
            let rec = rec.map_err(|e| err(e.to_string()))?;
            if rec.len() != CSV_HEADER.len() {
                return Err(err(format!("expected {} fields, got {}", CSV_HEADER.len(), rec.len())));
            }
            let num = |k: usize| rec[k].trim().parse::<u64>().map_err(|e| err(e.to_string()));
            let setting = parse_setting(rec[0].trim())?;
            let counts = [num(1)?, num(2)?, num(3)?, num(4)?];
            let (shots, seed) = (num(5)?, num(6)?);
            let d = data.get_or_insert_with(|| Self::new(shots, seed));
            if d.shots != shots || d.seed != seed {
                return Err(err("shots and seed must agree across rows".into()));
            }
            d.insert(setting, counts)?;
        }
        data.ok_or(VrdError::Empty("dataset has no rows"))
    }
}

/// Exact ⟨σ_a ⊗ σ_b⟩ for a two-qubit (or ququart) state, indexed by 4a + b.
pub fn exact_expectations(rho: &DensityOperator) -> Result<[f64; 16]> {
    if rho.dim() != 4 {
        return Err(VrdError::DimensionMismatch {
            expected: 4,
            actual: rho.dim(),
        });
    }
    let mut f = [0.0; 16];
    for a in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
        for b in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
            f[4 * a as usize + b as usize] = rho.expectation(&a.matrix().kron(&b.matrix()));
        }
    }
    Ok(f)
}

/// ρ = ¼ Σ f_ab σ_a ⊗ σ_b
pub fn linear_inversion_from_expectations(f: &[f64; 16]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    for a in 0..4 {
        for b in 0..4 {
            let term = crate::numcore::pauli(a).kron(&crate::numcore::pauli(b));
            m = &m + &term.scale_real(f[4 * a + b] / 4.0);
        }
    }
    m
}

pub fn linear_inversion(dataset: &PauliDataset) -> Result<ComplexMatrix> {
    Ok(linear_inversion_from_expectations(&dataset.expectations()?))
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_onto_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        acc += u;
        let t = (acc - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Nearest density matrix in Frobenius norm.
pub fn project_physical(m: &ComplexMatrix) -> Result<DensityOperator> {
    let asymmetry = m.hermitian_asymmetry();
    if asymmetry > HERMITIAN_TOL {
        return Err(VrdError::NotHermitian { asymmetry });
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
        return Err(VrdError::InvalidState(format!("trace {tr} is not 1")));
    }
    let e = hermitian_eig(&m.hermitian_part())?;
    let p = project_onto_simplex(&e.values);
    let n = m.rows();
    let mut acc = ComplexMatrix::zeros(n, n);
    for (k, &w) in p.iter().enumerate() {
        if w > 0.0 {
            let v = e.vector(k);
            acc = &acc + &ComplexMatrix::outer(&v, &v).scale_real(w);
        }
    }
    let dims = if n == 4 { vec![2, 2] } else { vec![m.rows()] };
    Ok(DensityOperator::new_unchecked(acc.hermitian_part(), dims))
}

/// How shots of one setting are split among the branches of a quasi-channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchAllocation {
    /// Every branch is measured with the full shot budget; weights are exact.
    #[default]
    Fixed,
    /// The shot budget is split by sampling branches; weights are empirical frequencies.
    Sampled,
}

#[derive(Debug, Clone)]
pub struct TomographyResult {
    pub lin: ComplexMatrix,
    pub physical: DensityOperator,
    pub branch_data: Vec<PauliDataset>,
}

fn combine(
    qc: &QuasiChannel,
    branch_lin: &[ComplexMatrix],
    weights: &[f64],
) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(4, 4);
    for ((b, lin), w) in qc.branches().iter().zip(branch_lin).zip(weights) {
        acc = &acc + &lin.scale_real(qc.cost() * b.sign.value() * w);
    }
    acc
}

fn require_two_qubit(qc: &QuasiChannel, rho: &DensityOperator) -> Result<Vec<DensityOperator>> {
    if rho.dim() != 4 {
        return Err(VrdError::DimensionMismatch {
            expected: 4,
            actual: rho.dim(),
        });
    }
    qc.branches().iter().map(|b| b.channel.apply(rho)).collect()
}

/// Reconstruction from exact expectations (infinite-shot limit).
pub fn virtual_tomography_exact(qc: &QuasiChannel, rho: &DensityOperator) -> Result<TomographyResult> {
    let outputs = require_two_qubit(qc, rho)?;
    let lins = outputs
        .iter()
        .map(|o| Ok(linear_inversion_from_expectations(&exact_expectations(o)?)))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = qc.branches().iter().map(|b| b.probability).collect();
    let lin = combine(qc, &lins, &weights);
    let physical = project_physical(&lin)?;
    Ok(TomographyResult {
        lin,
        physical,
        branch_data: Vec::new(),
    })
}

pub fn virtual_tomography(
    qc: &QuasiChannel,
    rho: &DensityOperator,
    shots_per_setting: u64,
    seed: u64,
) -> Result<TomographyResult> {
    virtual_tomography_with(qc, rho, shots_per_setting, seed, BranchAllocation::Fixed)
}

/// Samples Pauli data for every branch output, inverts each, recombines with
/// the quasi-probability weights and projects.
pub fn virtual_tomography_with(
    qc: &QuasiChannel,
    rho: &DensityOperator,
    shots_per_setting: u64,
    seed: u64,
    allocation: BranchAllocation,
) -> Result<TomographyResult> {
    if shots_per_setting == 0 {
        return Err(VrdError::OutOfRange {
            name: "shots_per_setting",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    let outputs = require_two_qubit(qc, rho)?;
    let (data, weights) = match allocation {
        BranchAllocation::Fixed => {
            let data = outputs
                .iter()
                .enumerate()
                .map(|(b, o)| PauliDataset::sample_block(o, shots_per_setting, seed, b as u32))
                .collect::<Result<Vec<_>>>()?;
            let weights = qc.branches().iter().map(|b| b.probability).collect();
            (data, weights)
        }
        BranchAllocation::Sampled => sampled_allocation(qc, &outputs, shots_per_setting, seed)?,
    };
    let mut lins = Vec::with_capacity(data.len());
    for d in &data {
        lins.push(if d.shots() == 0 {
            ComplexMatrix::zeros(4, 4)
        } else {
            linear_inversion(d)?
        });
    }
    let mut lin = combine(qc, &lins, &weights);
    if allocation == BranchAllocation::Sampled {
        // Empirical weights only sum to 1/C in expectation.
        lin = lin.scale_real(1.0 / lin.trace().re);
    }
    let physical = project_physical(&lin)?;
    Ok(TomographyResult {
        lin,
        physical,
        branch_data: data,
    })
}

/// Each shot of a setting picks a branch; a branch's estimate is weighted
/// by the fraction of shots it received. Branch shot counts are drawn once
/// and reused for every setting so each branch dataset is complete.
fn sampled_allocation(
    qc: &QuasiChannel,
    outputs: &[DensityOperator],
    shots: u64,
    seed: u64,
) -> Result<(Vec<PauliDataset>, Vec<f64>)> {
    use rand_distr::{Binomial, Distribution};
    let mut r = rng::stream(seed, rng::block_stream_id(u32::MAX, 0));
    let mut remaining = shots;
    let mut mass = 1.0;
    let n = qc.branches().len();
    let mut per_branch = vec![0u64; n];
    for (i, b) in qc.branches().iter().enumerate() {
        if i + 1 == n {
            per_branch[i] = remaining;
            break;
        }
        let p = if mass > 0.0 { (b.probability / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, p).expect("p in [0, 1]").sample(&mut r);
        per_branch[i] = k;
        remaining -= k;
        mass -= b.probability;
    }
    let mut data = Vec::with_capacity(n);
    for (b, (o, &k)) in outputs.iter().zip(&per_branch).enumerate() {
        data.push(if k == 0 {
            let mut d = PauliDataset::new(0, seed);
            for s in all_settings() {
                d.insert(s, [0; 4])?;
            }
            d
        } else {
            PauliDataset::sample_block(o, k, seed, b as u32)?
        });
    }
    let weights = per_branch.iter().map(|&k| k as f64 / shots as f64).collect();
    Ok((data, weights))
}

/// Born probabilities of each setting, for callers that want to bypass sampling.
pub fn setting_distribution(rho: &DensityOperator) -> Result<Vec<(PauliSetting, [f64; 4])>> {
    all_settings()
        .into_iter()
        .map(|s| Ok((s, setting_probabilities(rho, s)?)))
        .collect()
}
