//! Jones-calculus model of the ququart and Werner-state setups.
//!
//! Angles are in degrees, measured between the fast axis and the vertical.
//! The 4-dim space is path ⊗ polarization with index 2·path + pol
//! (see [`QuquartEncoding`]).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::channels::{incoherent_unitary, Sign};
use crate::error::{Result, VrdError};
use crate::numcore::{ComplexMatrix, DensityOperator, PureState, ONE, ZERO};
use crate::states::{bell, product_basis, psi_plus_one, BellLabel, Path, Polarization, QuquartEncoding};

/// −[[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]]
pub fn hwp(theta_deg: f64) -> ComplexMatrix {
    let t = (2.0 * theta_deg).to_radians();
    let (s, c) = t.sin_cos();
    ComplexMatrix::from_real(2, 2, &[-c, -s, -s, c]).expect("2x2")
}

/// (1/√2)[[1 + i cos 2ζ, i sin 2ζ], [i sin 2ζ, 1 − i cos 2ζ]]
pub fn qwp(zeta_deg: f64) -> ComplexMatrix {
    let z = (2.0 * zeta_deg).to_radians();
    let (s, c) = z.sin_cos();
    let k = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_vec(
        2,
        2,
        vec![
            C64::new(k, k * c),
            C64::new(0.0, k * s),
            C64::new(0.0, k * s),
            C64::new(k, -k * c),
        ],
    )
    .expect("2x2")
}

/// Transmits V on path v, displaces H from v to h; completed to a permutation.
pub fn beam_displacer() -> ComplexMatrix {
    let hv = QuquartEncoding::index(Polarization::H, Path::V);
    let hh = QuquartEncoding::index(Polarization::H, Path::H);
    let mut m = ComplexMatrix::identity(4);
    m[(hv, hv)] = ZERO;
    m[(hh, hh)] = ZERO;
    m[(hv, hh)] = ONE;
    m[(hh, hv)] = ONE;
    m
}

/// Polarization operator applied on one path only.
pub fn on_path(u: &ComplexMatrix, path: Path) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(4);
    let base = 2 * path as usize;
    for i in 0..2 {
        for j in 0..2 {
            m[(base + i, base + j)] = u[(i, j)];
        }
    }
    m
}

/// Polarization operator applied on both paths.
pub fn on_both_paths(u: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::identity(2).kron(u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JonesElement {
    Hwp { theta: f64 },
    Qwp { zeta: f64 },
    BeamDisplacer,
    /// Keeps the given polarization on both paths; not unitary.
    PbsTransmit { port: Polarization },
    HwpOnPath { theta: f64, path: Path },
    QwpOnPath { zeta: f64, path: Path },
}

impl JonesElement {
    pub fn matrix(&self) -> ComplexMatrix {
        match *self {
            JonesElement::Hwp { theta } => on_both_paths(&hwp(theta)),
            JonesElement::Qwp { zeta } => on_both_paths(&qwp(zeta)),
            JonesElement::BeamDisplacer => beam_displacer(),
            JonesElement::PbsTransmit { port } => {
                let mut p = ComplexMatrix::zeros(2, 2);
                p[(port as usize, port as usize)] = ONE;
                on_both_paths(&p)
            }
            JonesElement::HwpOnPath { theta, path } => on_path(&hwp(theta), path),
            JonesElement::QwpOnPath { zeta, path } => on_path(&qwp(zeta), path),
        }
    }

    pub fn is_lossless(&self) -> bool {
        !matches!(self, JonesElement::PbsTransmit { .. })
    }
}

/// Elements in propagation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpticalPipeline {
    elements: Vec<JonesElement>,
}

impl OpticalPipeline {
    pub fn new(elements: Vec<JonesElement>) -> Self {
        Self { elements }
    }

    pub fn push(&mut self, e: JonesElement) {
        self.elements.push(e);
    }

    pub fn elements(&self) -> &[JonesElement] {
        &self.elements
    }

    pub fn is_lossless(&self) -> bool {
        self.elements.iter().all(JonesElement::is_lossless)
    }

    /// E_n ⋯ E_1
    pub fn operator(&self) -> ComplexMatrix {
        self.elements
            .iter()
            .fold(ComplexMatrix::identity(4), |acc, e| &e.matrix() * &acc)
    }

    pub fn apply(&self, amplitudes: &[C64]) -> Result<Vec<C64>> {
        if amplitudes.len() != 4 {
            return Err(VrdError::DimensionMismatch {
                expected: 4,
                actual: amplitudes.len(),
            });
        }
        Ok(self
            .elements
            .iter()
            .fold(amplitudes.to_vec(), |v, e| e.matrix().mul_vec(&v)))
    }
}

/// Where a preparation HWP sits relative to the beam displacer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HwpPosition {
    PreBd,
    BothPaths,
    OnPath(Path),
}

impl FromStr for HwpPosition {
    type Err = VrdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pre_bd" => Ok(HwpPosition::PreBd),
            "both" => Ok(HwpPosition::BothPaths),
            "h" => Ok(HwpPosition::OnPath(Path::H)),
            "v" => Ok(HwpPosition::OnPath(Path::V)),
            other => Err(VrdError::InvalidLayout(format!("unknown position {other:?}"))),
        }
    }
}

impl fmt::Display for HwpPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HwpPosition::PreBd => "pre_bd",
            HwpPosition::BothPaths => "both",
            HwpPosition::OnPath(Path::H) => "h",
            HwpPosition::OnPath(Path::V) => "v",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutSlot {
    pub position: HwpPosition,
    /// A parked plate at 0° is removed from the beam instead of acting as −Z.
    pub parked: bool,
}

/// Placement of the four preparation HWPs H1..H4.
///
/// H1 acts before the beam displacer, H2..H4 after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuquartLayout {
    slots: [LayoutSlot; 4],
}

impl Default for QuquartLayout {
    fn default() -> Self {
        let slot = |position, parked| LayoutSlot { position, parked };
        Self {
            slots: [
                slot(HwpPosition::PreBd, false),
                slot(HwpPosition::OnPath(Path::V), true),
                slot(HwpPosition::OnPath(Path::H), true),
                slot(HwpPosition::OnPath(Path::V), true),
            ],
        }
    }
}

impl QuquartLayout {
    pub fn new(slots: [LayoutSlot; 4]) -> Result<Self> {
        if slots[0].position != HwpPosition::PreBd {
            return Err(VrdError::InvalidLayout("H1 must sit before the beam displacer".into()));
        }
        if let Some(i) = slots[1..].iter().position(|s| s.position == HwpPosition::PreBd) {
            return Err(VrdError::InvalidLayout(format!("H{} must sit after the beam displacer", i + 2)));
        }
        Ok(Self { slots })
    }

    /// Same placement with every plate taken literally.
    pub fn literal(mut self) -> Self {
        for s in &mut self.slots {
            s.parked = false;
        }
        self
    }

    pub fn slots(&self) -> &[LayoutSlot; 4] {
        &self.slots
    }

    pub fn pipeline(&self, angles: [f64; 4]) -> OpticalPipeline {
        let mut p = OpticalPipeline::default();
        for (i, (slot, &theta)) in self.slots.iter().zip(&angles).enumerate() {
            if i == 1 {
                p.push(JonesElement::BeamDisplacer);
            }
            if slot.parked && theta == 0.0 {
                continue;
            }
            p.push(match slot.position {
                HwpPosition::PreBd | HwpPosition::BothPaths => JonesElement::Hwp { theta },
                HwpPosition::OnPath(path) => JonesElement::HwpOnPath { theta, path },
            });
        }
        p
    }
}

/// Runs (|H⟩+|V⟩)/√2 on path v through the layout's pipeline.
pub fn prepare_ququart(angles: [f64; 4], layout: &QuquartLayout) -> Result<PureState> {
    let out = layout.pipeline(angles).apply(psi_plus_one().amplitudes())?;
    PureState::new(out, vec![4])
}

/// |⟨a|b⟩|², insensitive to global phase.
pub fn phase_free_fidelity(a: &PureState, b: &PureState) -> f64 {
    a.overlap(b)
}

/// Ground truth ψ±ᵏ: the k-th incoherent operation applied to ψ₊¹.
pub fn target_state(k: usize, sign: Sign) -> Result<PureState> {
    psi_plus_one().evolve(&incoherent_unitary(k, sign)?)
}

/// Listed HWP settings (θ₁..θ₄) for each ψ±ᵏ.
pub const TABLE_III: [(usize, Sign, [f64; 4]); 12] = [
    (1, Sign::Plus, [67.5, 0.0, 0.0, 22.5]),
    (2, Sign::Plus, [45.0, 45.0, 0.0, 0.0]),
    (3, Sign::Plus, [45.0, 45.0, 45.0, 0.0]),
    (4, Sign::Plus, [45.0, 0.0, 0.0, 0.0]),
    (5, Sign::Plus, [45.0, 0.0, 45.0, 0.0]),
    (6, Sign::Plus, [22.5, 0.0, 22.5, 0.0]),
    (1, Sign::Minus, [67.5, 0.0, 0.0, 67.5]),
    (2, Sign::Minus, [0.0, 45.0, 0.0, 0.0]),
    (3, Sign::Minus, [0.0, 45.0, 45.0, 0.0]),
    (4, Sign::Minus, [0.0, 0.0, 0.0, 0.0]),
    (5, Sign::Minus, [0.0, 0.0, 45.0, 0.0]),
    (6, Sign::Minus, [22.5, 0.0, 67.5, 0.0]),
];

/// Fidelity at or above which a prepared state counts as the target.
pub const MATCH_FIDELITY: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TableRowCheck {
    pub k: usize,
    pub sign: Sign,
    pub angles: [f64; 4],
    pub fidelity: f64,
}

impl TableRowCheck {
    pub fn reproduced(&self) -> bool {
        self.fidelity >= MATCH_FIDELITY
    }
}

/// Fidelity of every listed setting with its target under `layout`.
pub fn table_report(layout: &QuquartLayout) -> Result<Vec<TableRowCheck>> {
    TABLE_III
        .iter()
        .map(|&(k, sign, angles)| {
            let prepared = prepare_ququart(angles, layout)?;
            Ok(TableRowCheck {
                k,
                sign,
                angles,
                fidelity: phase_free_fidelity(&prepared, &target_state(k, sign)?),
            })
        })
        .collect()
}

pub const ANGLE_GRID: [f64; 6] = [0.0, 22.5, -22.5, 45.0, 67.5, 90.0];

/// First grid setting (lexicographic over [`ANGLE_GRID`]) that prepares `target`.
pub fn grid_search(target: &PureState, layout: &QuquartLayout) -> Result<Option<([f64; 4], f64)>> {
    for &a in &ANGLE_GRID {
        for &b in &ANGLE_GRID {
            for &c in &ANGLE_GRID {
                for &d in &ANGLE_GRID {
                    let angles = [a, b, c, d];
                    let f = phase_free_fidelity(&prepare_ququart(angles, layout)?, target);
                    if f >= MATCH_FIDELITY {
                        return Ok(Some((angles, f)));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Effective projector of the ququart analyzer for wave-plate settings
/// (θ₁, ζ₁) on polarization and (θ₂, ζ₂) on path.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementProjector {
    /// Acceptance amplitude of input a is ⟨w|a⟩.
    pub vector: Vec<C64>,
}

impl MeasurementProjector {
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.vector, &self.vector)
    }

    pub fn acceptance(&self, psi: &PureState) -> f64 {
        let amp: C64 = self.vector.iter().zip(psi.amplitudes()).map(|(w, a)| w.conj() * a).sum();
        amp.norm_sqr()
    }
}

fn chain_amplitude(a: &[C64], pol: (f64, f64), path: (f64, f64)) -> C64 {
    let stage1 = OpticalPipeline::new(vec![
        JonesElement::Hwp { theta: pol.0 },
        JonesElement::Qwp { zeta: pol.1 },
        JonesElement::HwpOnPath {
            theta: 45.0,
            path: Path::H,
        },
    ]);
    let a = stage1.apply(a).expect("4 amplitudes");
    // The recombining displacer keeps H from path v and V from path h.
    let c = [
        a[QuquartEncoding::index(Polarization::H, Path::V)],
        a[QuquartEncoding::index(Polarization::V, Path::H)],
    ];
    let u2 = &(&qwp(path.1) * &hwp(path.0)) * &hwp(45.0);
    u2.mul_vec(&c)[Polarization::H as usize]
}

pub fn measurement_chain(pol: (f64, f64), path: (f64, f64)) -> MeasurementProjector {
    let vector = (0..4)
        .map(|i| {
            let mut e = vec![ZERO; 4];
            e[i] = ONE;
            chain_amplitude(&e, pol, path).conj()
        })
        .collect();
    MeasurementProjector { vector }
}

/// Single-qubit analyzer states on either degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyzerState {
    Zero,
    One,
    Plus,
    Minus,
    R,
    L,
}

impl AnalyzerState {
    pub const ALL: [AnalyzerState; 6] = [
        AnalyzerState::Zero,
        AnalyzerState::One,
        AnalyzerState::Plus,
        AnalyzerState::Minus,
        AnalyzerState::R,
        AnalyzerState::L,
    ];

    /// (|0⟩, |1⟩) amplitudes; |0⟩ is H for polarization and h for path.
    pub fn amplitudes(self) -> [C64; 2] {
        let k = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            AnalyzerState::Zero => [ONE, ZERO],
            AnalyzerState::One => [ZERO, ONE],
            AnalyzerState::Plus => [C64::new(k, 0.0), C64::new(k, 0.0)],
            AnalyzerState::Minus => [C64::new(k, 0.0), C64::new(-k, 0.0)],
            AnalyzerState::R => [C64::new(k, 0.0), C64::new(0.0, k)],
            AnalyzerState::L => [C64::new(k, 0.0), C64::new(0.0, -k)],
        }
    }

    /// (HWP, QWP) angles selecting this state on polarization.
    pub fn polarization_angles(self) -> (f64, f64) {
        match self {
            AnalyzerState::Zero => (0.0, 0.0),
            AnalyzerState::One => (45.0, 0.0),
            AnalyzerState::Plus => (22.5, 0.0),
            AnalyzerState::Minus => (-22.5, 0.0),
            AnalyzerState::R => (0.0, 45.0),
            AnalyzerState::L => (0.0, -45.0),
        }
    }

    /// (HWP, QWP) angles selecting this state on path.
    ///
    /// The HWP@45° on path h flips the relative path phase, so the
    /// diagonal and circular path settings are mirrored.
    pub fn path_angles(self) -> (f64, f64) {
        match self {
            AnalyzerState::Plus => (-22.5, 0.0),
            AnalyzerState::Minus => (22.5, 0.0),
            AnalyzerState::R => (0.0, -45.0),
            AnalyzerState::L => (0.0, 45.0),
            other => other.polarization_angles(),
        }
    }

    /// The analyzed 4-dim vector: path state ⊗ polarization state.
    pub fn joint(pol: AnalyzerState, path: AnalyzerState) -> Vec<C64> {
        let p = pol.amplitudes();
        let q = path.amplitudes();
        // path amplitudes are (h, v); the register orders v before h
        let q = [q[1], q[0]];
        q.iter().flat_map(|x| p.iter().map(move |y| x * y)).collect()
    }
}

/// Listed analyzer settings: (label, θ₁, ζ₁) for polarization and the same
/// angles reused as (θ₂, ζ₂) for path.
pub const TABLE_IV: [(&str, f64, f64); 4] = [
    ("H", 0.0, 0.0),
    ("V", 45.0, 0.0),
    ("+", 22.5, 0.0),
    ("R", 0.0, 45.0),
];

/// Attenuator transmittances t₁..t₄ of the Werner-state source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerPrepConfig {
    t: [f64; 4],
}

impl WernerPrepConfig {
    pub fn new(t: [f64; 4]) -> Result<Self> {
        for &x in &t {
            if !(0.0..=1.0).contains(&x) {
                return Err(VrdError::OutOfRange {
                    name: "transmittance",
                    value: x,
                    range: "[0, 1]",
                });
            }
        }
        Ok(Self { t })
    }

    pub fn transmittances(&self) -> [f64; 4] {
        self.t
    }
}

pub fn t_xi(xi: f64) -> Result<WernerPrepConfig> {
    crate::states::WernerParams::new(xi)?;
    WernerPrepConfig::new([
        (1.0 - xi) / (2.0 + 2.0 * xi),
        (1.0 + 3.0 * xi) / (2.0 + 2.0 * xi),
        (1.0 - xi) / 2.0,
        (1.0 + xi) / 2.0,
    ])
}

pub fn t_eta() -> WernerPrepConfig {
    WernerPrepConfig::new([1.0, 0.0, 2.0 / 3.0, 1.0 / 3.0]).expect("in range")
}

/// [t₂t₄Ψ⁻ + t₁t₄Ψ⁺ + ((t₁+t₂)t₃/2)(HH + VV)] / ((t₁+t₂)(t₃+t₄))
pub fn werner_from_transmittances(cfg: &WernerPrepConfig) -> Result<DensityOperator> {
    let [t1, t2, t3, t4] = cfg.t;
    let norm = (t1 + t2) * (t3 + t4);
    if norm <= 0.0 {
        return Err(VrdError::InvalidState("all transmitted weights vanish".into()));
    }
    let terms = [
        (t2 * t4, bell(BellLabel::PsiMinus)),
        (t1 * t4, bell(BellLabel::PsiPlus)),
        ((t1 + t2) * t3 / 2.0, product_basis(0, 0)),
        ((t1 + t2) * t3 / 2.0, product_basis(1, 1)),
    ];
    let mut m = ComplexMatrix::zeros(4, 4);
    for (w, psi) in terms {
        m = &m + &psi.projector().scale_real(w / norm);
    }
    DensityOperator::new(m, vec![2, 2])
}

/// Contents of a plain-text optics configuration.
///
/// One directive per line, `#` starts a comment:
///
/// ```text
/// element hwp 22.5 both      # kinds: hwp, qwp, bd, pbs; positions: both, h, v
/// element pbs H
/// slot 2 v parked            # preparation HWP placement (1..4)
/// angles psi+4 45 0 0 0      # named θ₁..θ₄ row
/// ```
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpticsConfig {
    pub pipeline: OpticalPipeline,
    pub layout: Option<QuquartLayout>,
    pub angles: Vec<(String, [f64; 4])>,
}

impl FromStr for OpticsConfig {
    type Err = VrdError;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = OpticsConfig::default();
        let mut slots: [Option<LayoutSlot>; 4] = [None; 4];
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| VrdError::Parse { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let words: Vec<&str> = content.split_whitespace().collect();
            let angle = |w: Option<&&str>| -> Result<f64> {
                let w = w.ok_or_else(|| err("missing angle".into()))?;
                w.parse::<f64>().map_err(|e| err(format!("bad angle {w:?}: {e}")))
            };
            match words[0] {
                "element" => {
                    let kind = words.get(1).ok_or_else(|| err("missing element kind".into()))?;
                    let position = |w: Option<&&str>| -> Result<HwpPosition> {
                        match w {
                            None => Ok(HwpPosition::BothPaths),
                            Some(w) => w.parse().map_err(|e: VrdError| err(e.to_string())),
                        }
                    };
                    let e = match *kind {
                        "bd" => JonesElement::BeamDisplacer,
                        "pbs" => {
                            let port = match words.get(2).copied().unwrap_or("H") {
                                "H" => Polarization::H,
                                "V" => Polarization::V,
                                other => return Err(err(format!("bad PBS port {other:?}"))),
                            };
                            JonesElement::PbsTransmit { port }
                        }
                        "hwp" | "qwp" => {
                            let a = angle(words.get(2))?;
                            let hw = *kind == "hwp";
                            match position(words.get(3))? {
                                HwpPosition::OnPath(path) if hw => JonesElement::HwpOnPath { theta: a, path },
                                HwpPosition::OnPath(path) => JonesElement::QwpOnPath { zeta: a, path },
                                _ if hw => JonesElement::Hwp { theta: a },
                                _ => JonesElement::Qwp { zeta: a },
                            }
                        }
                        other => return Err(err(format!("unknown element kind {other:?}"))),
                    };
                    cfg.pipeline.push(e);
                }
                "slot" => {
                    let n: usize = words
                        .get(1)
                        .and_then(|w| w.parse().ok())
                        .filter(|n| (1..=4).contains(n))
                        .ok_or_else(|| err("slot index must be 1..4".into()))?;
                    let position: HwpPosition = words
                        .get(2)
                        .ok_or_else(|| err("missing slot position".into()))?
                        .parse()
                        .map_err(|e: VrdError| err(e.to_string()))?;
                    let parked = match words.get(3) {
                        None => false,
                        Some(&"parked") => true,
                        Some(other) => return Err(err(format!("unexpected {other:?}"))),
                    };
                    slots[n - 1] = Some(LayoutSlot { position, parked });
                }
                "angles" => {
                    let label = words.get(1).ok_or_else(|| err("missing label".into()))?;
                    if words.len() != 6 {
                        return Err(err("angles needs a label and four values".into()));
                    }
                    let mut a = [0.0; 4];
                    for (k, slot) in a.iter_mut().enumerate() {
                        *slot = angle(words.get(k + 2))?;
                    }
                    cfg.angles.push((label.to_string(), a));
                }
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }
        if slots.iter().any(Option::is_some) {
            let filled: Option<Vec<LayoutSlot>> = slots.iter().copied().collect();
            let filled = filled.ok_or_else(|| VrdError::InvalidLayout("all four slots must be given".into()))?;
            cfg.layout = Some(QuquartLayout::new([filled[0], filled[1], filled[2], filled[3]])?);
        }
        Ok(cfg)
    }
}
