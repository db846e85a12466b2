//! The four experiments. Exact rows evaluate the closed-form pipeline; sampled
//! rows run the Monte-Carlo estimator or replicated virtual tomography.

use vrd_core::channels::{Channel, QuasiChannel};
use vrd_core::estimator::{
    estimate, summarize, Observable, PreparedBranch, PreparedEnsemble, SamplingMode, SamplingPlan,
};
use vrd_core::metrics::{
    collective_z, crb_coefficients, fidelity_to_pure, negativity, qfi, qfi_isotropic, rel_entropy_coherence,
    NegativityConvention,
};
use vrd_core::numcore::{DensityOperator, PureState};
use vrd_core::protocols::{coherence_vrd, entanglement_vrd, SEPARABLE_THRESHOLD};
use vrd_core::rng::derive_seed;
use vrd_core::states::{bell, isotropic_phi_plus, mcs, psi_plus_one, werner_xi, BellLabel};
use vrd_core::teleport::{teleport_exact, teleport_vrd_ensemble_from, TeleportInput, CLASSICAL_LIMIT};
use vrd_core::tomography::{project_physical, virtual_tomography};
use vrd_core::Result as CoreResult;

use crate::{CliError, ExperimentConfig, Mode, ResultRecord, SCHEMA_VERSION};

/// Independent tomography runs behind each sampled tomography metric.
pub const TOMOGRAPHY_REPLICATES: u64 = 16;

const SIGNED: &str = "signed negativity (sum of negative partial-transpose eigenvalues)";

struct Rows<'a> {
    cfg: &'a ExperimentConfig,
    xi: Option<f64>,
    out: Vec<ResultRecord>,
}

impl<'a> Rows<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Self {
        Self { cfg, xi: None, out: Vec::new() }
    }

    fn exact(&mut self, metric: &str, value: f64, cost: f64, reference: Option<f64>, note: &str) {
        self.out.push(ResultRecord {
            schema_version: SCHEMA_VERSION,
            experiment: self.cfg.experiment,
            mode: Mode::Exact,
            xi: self.xi,
            noise_p: self.cfg.noise_p.unwrap_or(0.0),
            metric: metric.to_string(),
            estimate: value,
            stderr: 0.0,
            exact: Some(value),
            cost,
            shots: 0,
            seed: self.cfg.seed,
            reference,
            note: note.to_string(),
        });
    }

    #[allow(clippy::too_many_arguments)]
    fn sampled(
        &mut self,
        metric: &str,
        (mean, stderr): (f64, f64),
        exact: Option<f64>,
        cost: f64,
        shots: u64,
        reference: Option<f64>,
        note: &str,
    ) {
        self.out.push(ResultRecord {
            schema_version: SCHEMA_VERSION,
            experiment: self.cfg.experiment,
            mode: Mode::Sampled,
            xi: self.xi,
            noise_p: self.cfg.noise_p.unwrap_or(0.0),
            metric: metric.to_string(),
            estimate: mean,
            stderr,
            exact,
            cost,
            shots,
            seed: self.cfg.seed,
            reference,
            note: note.to_string(),
        });
    }
}

fn noisy(cfg: &ExperimentConfig, rho: DensityOperator) -> CoreResult<DensityOperator> {
    match cfg.noise_p {
        Some(p) if p > 0.0 => Channel::depolarizing(p, rho.dim())?.apply(&rho),
        _ => Ok(rho),
    }
}

fn plan(cfg: &ExperimentConfig, stream: u64) -> CoreResult<SamplingPlan> {
    SamplingPlan::new(cfg.shots, derive_seed(cfg.seed, stream), SamplingMode::ProjectiveSampling)
}

/// Mean and standard error of `metric` over replicated virtual tomography.
fn tomography_metric(
    cfg: &ExperimentConfig,
    qc: &QuasiChannel,
    rho: &DensityOperator,
    stream: u64,
    metric: impl Fn(&DensityOperator) -> CoreResult<f64>,
) -> CoreResult<(f64, f64)> {
    let values = (0..TOMOGRAPHY_REPLICATES)
        .map(|r| {
            let seed = derive_seed(derive_seed(cfg.seed, stream), r);
            let result = virtual_tomography(qc, rho, cfg.shots, seed)?;
            metric(&result.physical)
        })
        .collect::<CoreResult<Vec<_>>>()?;
    Ok(summarize(&values))
}

fn tomography_note(what: &str) -> String {
    format!(
        "{what}; mean over {TOMOGRAPHY_REPLICATES} virtual-tomography replicates, shots per Pauli setting per branch"
    )
}

pub fn run_coherence(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, CliError> {
    let mut rows = Rows::new(cfg);
    let target = mcs(4)?;
    let input = noisy(cfg, DensityOperator::from_pure(&psi_plus_one()))?;
    let qc = coherence_vrd();
    let virtual_out = qc.apply_exact(&input)?;
    let distilled = project_physical(&virtual_out)?;
    let identity = QuasiChannel::identity(4);

    let f_in = fidelity_to_pure(&input, &target)?;
    let f_out = fidelity_to_pure(&distilled, &target)?;
    let c_in = rel_entropy_coherence(&input);
    let c_out = rel_entropy_coherence(&distilled);
    let proj_note = "distilled state projected onto the physical set";
    match cfg.mode {
        Mode::Exact => {
            rows.exact("fidelity_input", f_in, 1.0, Some(0.426), "F(input, MCS)");
            rows.exact("fidelity_distilled", f_out, qc.cost(), Some(0.932), proj_note);
            rows.exact("coherence_input", c_in, 1.0, Some(0.958), "relative entropy of coherence, bits");
            rows.exact("coherence_distilled", c_out, qc.cost(), Some(1.769), "relative entropy of coherence, bits");
        }
        Mode::Sampled => {
            let obs = Observable::projector("MCS", &target);
            let r = estimate(&identity, &input, &obs, &plan(cfg, 0)?)?;
            rows.sampled("fidelity_input", (r.mean, r.stderr), Some(f_in), 1.0, cfg.shots, Some(0.426), "F(input, MCS)");
            let r = estimate(&qc, &input, &obs, &plan(cfg, 1)?)?;
            let exact = DensityOperator::from_pure(&target).matrix().trace_product_re(&virtual_out);
            rows.sampled(
                "fidelity_distilled",
                (r.mean, r.stderr),
                Some(exact),
                qc.cost(),
                cfg.shots,
                Some(0.932),
                "quasi-probability estimate of Tr[MCS Γ̃(ρ)]",
            );
            let m = tomography_metric(cfg, &identity, &input, 2, |s| Ok(rel_entropy_coherence(s)))?;
            rows.sampled("coherence_input", m, Some(c_in), 1.0, cfg.shots, Some(0.958), &tomography_note("bits"));
            let m = tomography_metric(cfg, &qc, &input, 3, |s| Ok(rel_entropy_coherence(s)))?;
            rows.sampled(
                "coherence_distilled",
                m,
                Some(c_out),
                qc.cost(),
                cfg.shots,
                Some(1.769),
                &tomography_note("bits"),
            );
        }
    }
    rows.exact("cost", qc.cost(), qc.cost(), None, "sampling overhead C");
    Ok(rows.out)
}

pub fn run_entangle(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, CliError> {
    let mut rows = Rows::new(cfg);
    let target = bell(BellLabel::PsiMinus);
    let obs = Observable::projector("psi-", &target);
    let identity = QuasiChannel::identity(4);
    for (i, &xi) in cfg.xi.iter().enumerate() {
        rows.xi = Some(xi);
        let input = noisy(cfg, werner_xi(xi)?)?;
        let qc = entanglement_vrd(xi)?;
        let virtual_out = qc.apply_exact(&input)?;
        let distilled = project_physical(&virtual_out)?;
        let f_in = fidelity_to_pure(&input, &target)?;
        let f_out = fidelity_to_pure(&distilled, &target)?;
        let n_in = negativity(&input, NegativityConvention::Signed)?;
        let n_out = negativity(&distilled, NegativityConvention::Signed)?;
        let clamp = if xi < SEPARABLE_THRESHOLD {
            "; below 1/3 the input is replaced by a ρ_w,1/3 preparation"
        } else {
            ""
        };
        let base = 10 * i as u64;
        match cfg.mode {
            Mode::Exact => {
                rows.exact("fidelity_input", f_in, 1.0, None, "F(input, Ψ⁻)");
                rows.exact("fidelity_distilled", f_out, qc.cost(), None, &format!("F(distilled, Ψ⁻){clamp}"));
                rows.exact("negativity_input", n_in, 1.0, None, SIGNED);
                rows.exact("negativity_distilled", n_out, qc.cost(), None, SIGNED);
            }
            Mode::Sampled => {
                let r = estimate(&identity, &input, &obs, &plan(cfg, base)?)?;
                rows.sampled("fidelity_input", (r.mean, r.stderr), Some(f_in), 1.0, cfg.shots, None, "F(input, Ψ⁻)");
                let r = estimate(&qc, &input, &obs, &plan(cfg, base + 1)?)?;
                let exact = DensityOperator::from_pure(&target).matrix().trace_product_re(&virtual_out);
                rows.sampled(
                    "fidelity_distilled",
                    (r.mean, r.stderr),
                    Some(exact),
                    qc.cost(),
                    cfg.shots,
                    None,
                    &format!("quasi-probability estimate of Tr[Ψ⁻ Γ̃(ρ)]{clamp}"),
                );
                let neg = |s: &DensityOperator| negativity(s, NegativityConvention::Signed);
                let m = tomography_metric(cfg, &identity, &input, base + 2, neg)?;
                rows.sampled("negativity_input", m, Some(n_in), 1.0, cfg.shots, None, &tomography_note(SIGNED));
                let m = tomography_metric(cfg, &qc, &input, base + 3, neg)?;
                rows.sampled(
                    "negativity_distilled",
                    m,
                    Some(n_out),
                    qc.cost(),
                    cfg.shots,
                    None,
                    &tomography_note(SIGNED),
                );
            }
        }
        rows.exact("cost", qc.cost(), qc.cost(), None, "min{(7−3ξ)/(1+3ξ), 3}");
    }
    Ok(rows.out)
}

fn average(values: &[(f64, f64)]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().map(|v| v.0).sum::<f64>() / n;
    let se = values.iter().map(|v| v.1 * v.1).sum::<f64>().sqrt() / n;
    (mean, se)
}

pub fn run_teleport(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, CliError> {
    let mut rows = Rows::new(cfg);
    for (i, &xi) in cfg.xi.iter().enumerate() {
        rows.xi = Some(xi);
        let resource = noisy(cfg, werner_xi(xi)?)?;
        let qc = entanglement_vrd(xi)?;
        let mut before = Vec::new();
        let mut after = Vec::new();
        for (j, input) in TeleportInput::ALL.iter().enumerate() {
            let psi: PureState = input.state();
            let obs = Observable::projector(input.to_string(), &psi);
            let plain = PreparedEnsemble::new(
                vec![PreparedBranch {
                    sign: vrd_core::channels::Sign::Plus,
                    probability: 1.0,
                    state: teleport_exact(&resource, &psi)?,
                }],
                1.0,
            )?;
            let distilled = teleport_vrd_ensemble_from(&qc, &resource, &psi)?;
            let stream = 10 * i as u64 + 2 * j as u64;
            match cfg.mode {
                Mode::Exact => {
                    before.push((plain.exact(&obs), 0.0));
                    after.push((distilled.exact(&obs), 0.0));
                }
                Mode::Sampled => {
                    let r = plain.estimate(&obs, &plan(cfg, stream)?)?;
                    before.push((r.mean, r.stderr));
                    let r = distilled.estimate(&obs, &plan(cfg, stream + 1)?)?;
                    after.push((r.mean, r.stderr));
                }
            }
        }
        let exact_before = (1.0 + xi * (1.0 - cfg.noise_p.unwrap_or(0.0))) / 2.0;
        let (b, a) = (average(&before), average(&after));
        let flag = if b.0 < CLASSICAL_LIMIT {
            "average over H, V, +, R; below_classical_limit (2/3)"
        } else {
            "average over H, V, +, R; above_classical_limit (2/3)"
        };
        let exact_after = if cfg.noise_p.unwrap_or(0.0) > 0.0 { None } else { Some(1.0) };
        match cfg.mode {
            Mode::Exact => {
                rows.exact("avg_fidelity_before", b.0, 1.0, None, flag);
                rows.exact("avg_fidelity_after", a.0, qc.cost(), None, "average over H, V, +, R with distilled resource");
            }
            Mode::Sampled => {
                rows.sampled("avg_fidelity_before", b, Some(exact_before), 1.0, cfg.shots, None, flag);
                rows.sampled(
                    "avg_fidelity_after",
                    a,
                    exact_after,
                    qc.cost(),
                    cfg.shots,
                    None,
                    "average over H, V, +, R with distilled resource; shots per input",
                );
            }
        }
        rows.exact("cost", qc.cost(), qc.cost(), None, "min{(7−3ξ)/(1+3ξ), 3}");
    }
    Ok(rows.out)
}

pub fn run_qfi(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, CliError> {
    let mut rows = Rows::new(cfg);
    let generator = collective_z();
    let note = match cfg.mode {
        Mode::Exact => "",
        Mode::Sampled => "; no sampling stage, exact value reported",
    };
    for &xi in &cfg.xi {
        rows.xi = Some(xi);
        let effective = xi * (1.0 - cfg.noise_p.unwrap_or(0.0));
        let rho = noisy(cfg, isotropic_phi_plus(xi)?)?;
        let value = qfi(&rho, &generator)?;
        let closed = qfi_isotropic(effective);
        rows.exact("qfi", value, 1.0, None, &format!("eigendecomposition; generator Z⊗I + I⊗Z{note}"));
        rows.out.last_mut().expect("pushed").exact = Some(closed);
        let crb = crb_coefficients(effective)?;
        let domain = if effective < SEPARABLE_THRESHOLD {
            "; ξ below 1/3 is outside the formula's domain, clamped cost used"
        } else {
            ""
        };
        rows.exact("crb_noisy", crb.noisy, 1.0, None, &format!("√((1+ξ)/(32ξ²)){note}"));
        rows.exact(
            "crb_distilled",
            crb.distilled,
            4.0 * crb.distilled,
            None,
            &format!("C(ξ)/4{domain}{note}"),
        );
    }
    Ok(rows.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Experiment, Format};

    fn cfg(experiment: Experiment, xi: Vec<f64>, mode: Mode) -> ExperimentConfig {
        ExperimentConfig {
            experiment,
            xi,
            shots: 20_000,
            seed: 42,
            noise_p: None,
            mode,
            format: Format::Json,
            out: None,
        }
    }

    fn value(rows: &[ResultRecord], xi: Option<f64>, metric: &str) -> f64 {
        rows.iter()
            .find(|r| r.metric == metric && r.xi == xi)
            .unwrap_or_else(|| panic!("{metric}"))
            .estimate
    }

    #[test]
    fn coherence_exact_values() {
        let rows = run_coherence(&cfg(Experiment::Coherence, vec![], Mode::Exact)).unwrap();
        assert!((value(&rows, None, "fidelity_distilled") - 1.0).abs() < 1e-10);
        assert!((value(&rows, None, "coherence_distilled") - 2.0).abs() < 1e-9);
        assert!((value(&rows, None, "fidelity_input") - 0.5).abs() < 1e-12);
        assert!((value(&rows, None, "coherence_input") - 1.0).abs() < 1e-9);
        assert_eq!(value(&rows, None, "cost"), 3.0);
        assert!(rows.iter().all(|r| r.stderr == 0.0));
    }

    #[test]
    fn entangle_exact_values() {
        let rows = run_entangle(&cfg(Experiment::Entangle, vec![0.2, 1.0], Mode::Exact)).unwrap();
        assert!((value(&rows, Some(1.0), "fidelity_distilled") - 1.0).abs() < 1e-12);
        assert!((value(&rows, Some(1.0), "negativity_distilled") + 0.5).abs() < 1e-12);
        assert_eq!(value(&rows, Some(0.2), "negativity_input"), 0.0);
        assert!((value(&rows, Some(0.2), "negativity_distilled") + 0.5).abs() < 1e-12);
    }

    #[test]
    fn teleport_exact_values() {
        let rows = run_teleport(&cfg(Experiment::Teleport, vec![0.0], Mode::Exact)).unwrap();
        assert!((value(&rows, Some(0.0), "avg_fidelity_before") - 0.5).abs() < 1e-12);
        assert!((value(&rows, Some(0.0), "avg_fidelity_after") - 1.0).abs() < 1e-12);
        let before = rows.iter().find(|r| r.metric == "avg_fidelity_before").unwrap();
        assert!(before.note.contains("below_classical_limit"));
    }

    #[test]
    fn qfi_values() {
        let rows = run_qfi(&cfg(Experiment::Qfi, vec![0.5, 1.0], Mode::Exact)).unwrap();
        assert!((value(&rows, Some(1.0), "crb_noisy") - 0.25).abs() < 1e-12);
        assert!((value(&rows, Some(1.0), "crb_distilled") - 0.25).abs() < 1e-12);
        assert!((value(&rows, Some(0.5), "crb_distilled") - 0.55).abs() < 1e-12);
        assert!((value(&rows, Some(0.5), "crb_noisy") - 0.4330127).abs() < 1e-6);
        let q = rows.iter().find(|r| r.metric == "qfi" && r.xi == Some(1.0)).unwrap();
        assert!((q.estimate - 16.0).abs() < 1e-9 && q.exact == Some(16.0));
    }

    #[test]
    fn sampled_rows_carry_stderr_and_cost() {
        let mut c = cfg(Experiment::Entangle, vec![0.6], Mode::Sampled);
        c.shots = 5_000;
        let rows = run_entangle(&c).unwrap();
        for r in rows.iter().filter(|r| r.mode == Mode::Sampled) {
            assert!(r.stderr > 0.0 && r.cost >= 1.0 && r.shots == 5_000, "{r:?}");
            let exact = r.exact.unwrap();
            assert!((r.estimate - exact).abs() < 6.0 * r.stderr + 0.02, "{r:?}");
        }
    }

    #[test]
    fn noise_lowers_input_fidelity() {
        let mut c = cfg(Experiment::Coherence, vec![], Mode::Exact);
        c.noise_p = Some(0.2);
        let rows = run_coherence(&c).unwrap();
        assert!((value(&rows, None, "fidelity_input") - (0.8 * 0.5 + 0.2 * 0.25)).abs() < 1e-12);
        assert!(value(&rows, None, "fidelity_distilled") < 1.0);
    }
}
