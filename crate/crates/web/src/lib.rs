//! wasm-bindgen entry points for the static demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the field order is listed on
//! each function.

use wasm_bindgen::prelude::*;

use vrd_core::channels::Sign;
use vrd_core::estimator::{estimate, Observable, SamplingMode, SamplingPlan};
use vrd_core::metrics::{crb_coefficients, fidelity_to_pure, negativity, NegativityConvention};
use vrd_core::optics::{phase_free_fidelity, prepare_ququart, target_state, QuquartLayout};
use vrd_core::protocols::entanglement_vrd;
use vrd_core::states::{bell, werner_xi, BellLabel};
use vrd_core::teleport::{average_fidelity, teleport_outcomes, teleport_vrd_outcomes};

type Out = Result<Vec<f64>, String>;

fn core<T>(r: vrd_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Exact figures for a Werner input and its virtually distilled counterpart.
pub fn werner_summary(xi: f64) -> Out {
    let rho = core(werner_xi(xi))?;
    let qc = core(entanglement_vrd(xi))?;
    let singlet = bell(BellLabel::PsiMinus);
    let (plus, minus) = qc.sign_split();
    let crb = core(crb_coefficients(xi))?;
    Ok(vec![
        core(fidelity_to_pure(&rho, &singlet))?,
        core(negativity(&rho, NegativityConvention::Signed))?,
        qc.cost(),
        qc.cost() * plus,
        qc.cost() * minus,
        core(average_fidelity(&core(teleport_outcomes(&rho))?))?,
        core(average_fidelity(&core(teleport_vrd_outcomes(xi))?))?,
        crb.noisy,
        crb.distilled,
    ])
}

/// Monte-Carlo estimate of the Ψ⁻ fidelity of the distilled state.
pub fn sampled_fidelity(xi: f64, shots: u32, seed: u32) -> Out {
    let qc = core(entanglement_vrd(xi))?;
    let obs = Observable::projector("psi-", &bell(BellLabel::PsiMinus));
    let plan = core(SamplingPlan::new(shots as u64, seed as u64, SamplingMode::ProjectiveSampling))?;
    let r = core(estimate(&qc, &core(werner_xi(xi))?, &obs, &plan))?;
    Ok(vec![r.mean, r.stderr, 1.0, r.cost])
}

/// Ququart prepared by four half-wave plate angles (degrees) in the default layout.
pub fn ququart(angles: [f64; 4]) -> Out {
    let psi = core(prepare_ququart(angles, &QuquartLayout::default()))?;
    let mut out: Vec<f64> = psi.amplitudes().iter().flat_map(|a| [a.re, a.im]).collect();
    let mut best = (0.0, 0.0, 0.0);
    for k in 1..=6 {
        for (s, sign) in [(1.0, Sign::Plus), (-1.0, Sign::Minus)] {
            let f = phase_free_fidelity(&psi, &core(target_state(k, sign))?);
            if f > best.2 {
                best = (k as f64, s, f);
            }
        }
    }
    out.extend([best.0, best.1, best.2]);
    Ok(out)
}

fn js(r: Out) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// `[input fidelity, signed negativity, cost, γ₊, γ₋, teleport before, teleport after, CRB noisy, CRB distilled]`
#[wasm_bindgen(js_name = wernerSummary)]
pub fn werner_summary_js(xi: f64) -> Result<Vec<f64>, JsError> {
    js(werner_summary(xi))
}

/// `[mean, stderr, exact, cost]`
#[wasm_bindgen(js_name = sampledFidelity)]
pub fn sampled_fidelity_js(xi: f64, shots: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    js(sampled_fidelity(xi, shots, seed))
}

/// `[re₀, im₀, …, re₃, im₃, k, sign, fidelity]` with (k, sign) the closest ψ±ᵏ.
#[wasm_bindgen(js_name = prepareQuquart)]
pub fn prepare_ququart_js(a1: f64, a2: f64, a3: f64, a4: f64) -> Result<Vec<f64>, JsError> {
    js(ququart([a1, a2, a3, a4]))
}
