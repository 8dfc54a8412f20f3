//! The U/V box: three 50:50 beam splitters and four bucket detectors.
//!
//! Spatial paths are numbered `c = 0, m = 1, n = 2, d = 3`. The signal photons
//! enter in `m` and `n`; `c` and `d` carry vacuum. The outer splitters mix
//! `m` with `c` and `n` with `d`; the central splitter mixes the two inner
//! paths. After the network, path `s` feeds detector `D_{s+1}`.

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fock::{spatial_counts, Mode, Occupation, Polarization, PolarizedFockState};
use crate::error::{Error, Result};
use crate::linalg::{pauli, Mat2, Mat4, C64};
use crate::state::TwoQubitState;

pub const PATH_C: usize = 0;
pub const PATH_M: usize = 1;
pub const PATH_N: usize = 2;
pub const PATH_D: usize = 3;
const N_PATHS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    eta: f64,
}

impl DetectorModel {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidConfig(format!("detector efficiency must lie in [0, 1], got {eta}")));
        }
        Ok(Self { eta })
    }

    pub fn ideal() -> Self {
        Self { eta: 1.0 }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Success factor `r = η²/4` of each coincidence channel.
    pub fn r(&self) -> f64 {
        self.eta * self.eta / 4.0
    }

    /// Probability that a bucket detector hit by `photons` photons clicks.
    /// Each photon is registered independently with probability `η`; there are
    /// no dark counts.
    pub fn click_probability(&self, photons: usize) -> f64 {
        1.0 - (1.0 - self.eta).powi(photons as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoxOutcome {
    /// Coincidence at the outer detectors `D₁`, `D₄` (identity channel).
    C14,
    /// Coincidence at the central detectors `D₂`, `D₃` (singlet channel).
    C23,
    /// Any other click pattern, including no clicks.
    Other,
}

impl BoxOutcome {
    pub const ALL: [BoxOutcome; 3] = [BoxOutcome::C14, BoxOutcome::C23, BoxOutcome::Other];
}

/// Whether the box is read out as `U = I − 4P⁻` or `V = 2I − 4P⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoxKind {
    U,
    V,
}

impl BoxKind {
    /// Number assigned to an outcome: `C₂₃ → −4`, `C₁₄ → 1` (U) or `2` (V), else 0.
    pub fn value(self, outcome: BoxOutcome) -> i64 {
        match (self, outcome) {
            (_, BoxOutcome::C23) => -4,
            (BoxKind::U, BoxOutcome::C14) => 1,
            (BoxKind::V, BoxOutcome::C14) => 2,
            (_, BoxOutcome::Other) => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxOutcomeDistribution {
    pub p14: f64,
    pub p23: f64,
    pub p_other: f64,
}

impl BoxOutcomeDistribution {
    pub fn probability(&self, outcome: BoxOutcome) -> f64 {
        match outcome {
            BoxOutcome::C14 => self.p14,
            BoxOutcome::C23 => self.p23,
            BoxOutcome::Other => self.p_other,
        }
    }
}

/// Effective two-qubit POVM of the box: one element per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxPovm {
    pub c14: Mat4,
    pub c23: Mat4,
    pub other: Mat4,
}

impl BoxPovm {
    pub fn element(&self, outcome: BoxOutcome) -> &Mat4 {
        match outcome {
            BoxOutcome::C14 => &self.c14,
            BoxOutcome::C23 => &self.c23,
            BoxOutcome::Other => &self.other,
        }
    }
}

fn polarization(bit: usize) -> Polarization {
    if bit == 0 {
        Polarization::H
    } else {
        Polarization::V
    }
}

/// Runs `|p⟩_m |q⟩_n` (vacuum in `c`, `d`) through the three beam splitters.
fn propagate(p: Polarization, q: Polarization) -> Result<PolarizedFockState> {
    let input = PolarizedFockState::from_creations(
        N_PATHS,
        &[(C64::new(1.0, 0.0), &[Mode::new(PATH_M, p), Mode::new(PATH_N, q)])],
    )?;
    for (occ, _) in input.iter() {
        let counts = spatial_counts(occ);
        assert!(counts[PATH_C] == 0 && counts[PATH_D] == 0, "vacuum ports must be empty");
    }
    input.apply_beam_splitter(PATH_M, PATH_C)?.apply_beam_splitter(PATH_N, PATH_D)?.apply_beam_splitter(PATH_M, PATH_N)
}

/// Output states for the four polarization basis inputs `|HH⟩, |HV⟩, |VH⟩, |VV⟩`.
pub fn basis_outputs() -> &'static [PolarizedFockState; 4] {
    static OUTPUTS: OnceLock<[PolarizedFockState; 4]> = OnceLock::new();
    OUTPUTS.get_or_init(|| {
        std::array::from_fn(|k| {
            propagate(polarization(k >> 1), polarization(k & 1)).expect("box network uses known modes")
        })
    })
}

/// Outcome probabilities `[C₁₄, C₂₃, other]` for one output photon configuration.
fn outcome_weights(occ: &Occupation, det: &DetectorModel) -> [f64; 3] {
    let counts = spatial_counts(occ);
    let click: Vec<f64> = counts.iter().map(|&k| det.click_probability(k)).collect();
    let exactly = |set: [usize; 2]| {
        (0..N_PATHS).map(|s| if set.contains(&s) { click[s] } else { 1.0 - click[s] }).product::<f64>()
    };
    let p14 = exactly([0, 3]);
    let p23 = exactly([1, 2]);
    [p14, p23, 1.0 - p14 - p23]
}

/// Every output occupation reachable from any basis input.
fn output_occupations() -> Vec<Occupation> {
    let mut all: Vec<Occupation> = basis_outputs().iter().flat_map(|s| s.iter().map(|(o, _)| o.clone())).collect();
    all.sort();
    all.dedup();
    all
}

/// Outcome distribution for a polarization state of the photons in `m` and `n`,
/// evaluated by propagating the density matrix through the Fock network.
pub fn uv_box_distribution(rho_mn: &TwoQubitState, det: &DetectorModel) -> BoxOutcomeDistribution {
    let outputs = basis_outputs();
    let rho = rho_mn.matrix();
    let mut p = [0.0; 3];
    for occ in output_occupations() {
        let amps: [C64; 4] = std::array::from_fn(|k| outputs[k].amplitude(&occ));
        let mut prob = C64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                prob += rho[(i, j)] * amps[i] * amps[j].conj();
            }
        }
        for (acc, w) in p.iter_mut().zip(outcome_weights(&occ, det)) {
            *acc += prob.re * w;
        }
    }
    let p14 = p[0].clamp(0.0, 1.0);
    let p23 = p[1].clamp(0.0, 1.0);
    BoxOutcomeDistribution { p14, p23, p_other: (1.0 - p14 - p23).max(0.0) }
}

/// POVM elements of the box read directly off the Fock amplitudes:
/// `E_o[j, i] = Σ_occ w_o(occ) ψ_i(occ) ψ_j(occ)*`.
pub fn box_povm(det: &DetectorModel) -> BoxPovm {
    let outputs = basis_outputs();
    let mut elements = [Mat4::zeros(); 3];
    for occ in output_occupations() {
        let amps: [C64; 4] = std::array::from_fn(|k| outputs[k].amplitude(&occ));
        let weights = outcome_weights(&occ, det);
        for (element, w) in elements.iter_mut().zip(weights) {
            *element += Mat4::from_fn(|j, i| amps[i] * amps[j].conj()).scale(w);
        }
    }
    let [c14, c23, other] = elements;
    BoxPovm { c14, c23, other }
}

/// The 16 product states `{H, V, D, R}⊗²`, which span the two-qubit operators.
pub fn tomographic_inputs() -> Vec<TwoQubitState> {
    let h = 0.5;
    let singles: [Mat2; 4] = [
        (pauli(0) + pauli(3)).scale(h),
        (pauli(0) - pauli(3)).scale(h),
        (pauli(0) + pauli(1)).scale(h),
        (pauli(0) + pauli(2)).scale(h),
    ];
    singles
        .iter()
        .flat_map(|a| singles.iter().map(move |b| TwoQubitState::product(a, b).expect("product of pure qubits")))
        .collect()
}

/// Effective POVM elements for `C₁₄` and `C₂₃`, reconstructed by linear
/// inversion of the box statistics on a tomographically complete input set.
pub fn reconstruct_coincidence_operators(det: &DetectorModel) -> (Mat4, Mat4) {
    let inputs = tomographic_inputs();
    // p_k = Tr(E ρ_k) = Σ_{μν} e_{μν} Tr[(σ_μ⊗σ_ν) ρ_k] / 4 with e_{μν} = Tr[E σ_μ⊗σ_ν].
    let basis: Vec<Mat4> = (0..16).map(|k| crate::linalg::pauli_product(k / 4, k % 4)).collect();
    let design = nalgebra::DMatrix::<f64>::from_fn(16, 16, |k, b| inputs[k].expectation(&basis[b]).re / 4.0);
    let lu = design.lu();
    let solve = |outcome: BoxOutcome| {
        let probs = nalgebra::DVector::from_iterator(
            16,
            inputs.iter().map(|s| uv_box_distribution(s, det).probability(outcome)),
        );
        let coeffs = lu.solve(&probs).expect("tomographic inputs are complete");
        basis.iter().zip(coeffs.iter()).fold(Mat4::zeros(), |acc, (b, c)| acc + b.scale(*c / 4.0))
    };
    (solve(BoxOutcome::C14), solve(BoxOutcome::C23))
}

pub fn sample_outcome<R: Rng + ?Sized>(rng: &mut R, dist: &BoxOutcomeDistribution) -> BoxOutcome {
    let u: f64 = rng.random();
    if u < dist.p23 {
        BoxOutcome::C23
    } else if u < dist.p23 + dist.p14 {
        BoxOutcome::C14
    } else {
        BoxOutcome::Other
    }
}

/// One shot of a single box: `−4` for `C₂₃`, `1`/`2` for `C₁₄`, `0` otherwise.
pub fn sample_uv_outcome<R: Rng + ?Sized>(
    rng: &mut R,
    rho_mn: &TwoQubitState,
    det: &DetectorModel,
    kind: BoxKind,
) -> i64 {
    kind.value(sample_outcome(rng, &uv_box_distribution(rho_mn, det)))
}
