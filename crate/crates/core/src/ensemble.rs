//! Random two-qubit states: Hilbert–Schmidt and Haar-pure ensembles, fidelity
//! constrained pairs, and constructed zero-discord states.

use nalgebra::{Vector3, Vector4};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discord::side_indicators;
use crate::error::{Error, Result};
use crate::linalg::{kron, Mat2, Mat4, C64};
use crate::rng::{domain, substream, Stream};
use crate::state::{bloch_decompose, fidelity, qubit_from_bloch, Side, TwoQubitState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    /// `G G† / Tr(G G†)` with `G` a 4×4 complex Ginibre matrix.
    HilbertSchmidt,
    /// `|ψ⟩⟨ψ|` with `ψ` uniform on the unit sphere of `C⁴`.
    PureHaar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomEnsembleSpec {
    pub measure: Measure,
    pub seed: u64,
    pub count: usize,
}

/// Maximum number of redraws in [`random_state_pair_with_fidelity`].
pub const PAIR_ATTEMPT_CAP: usize = 64;
const BISECTION_STEPS: usize = 48;

fn gaussian(rng: &mut Stream) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_state(measure: Measure, rng: &mut Stream) -> TwoQubitState {
    match measure {
        Measure::HilbertSchmidt => {
            let g = Mat4::from_fn(|_, _| gaussian(rng));
            let w = g * g.adjoint();
            let trace = w.trace().re;
            TwoQubitState::new_unchecked(w.unscale(trace))
        }
        Measure::PureHaar => {
            let psi = Vector4::from_fn(|_, _| gaussian(rng));
            TwoQubitState::from_pure(&psi).expect("Gaussian vector is nonzero almost surely")
        }
    }
}

/// State number `index` of the ensemble with the given seed.
pub fn random_state_at(measure: Measure, seed: u64, index: u64) -> TwoQubitState {
    random_state(measure, &mut substream(seed, domain::ENSEMBLE, index))
}

/// `spec.count` states, each drawn from its own substream.
pub fn random_states(spec: &RandomEnsembleSpec) -> Result<Vec<TwoQubitState>> {
    if spec.count == 0 {
        return Err(Error::InvalidConfig("ensemble count must be at least 1".into()));
    }
    Ok((0..spec.count as u64).into_par_iter().map(|i| random_state_at(spec.measure, spec.seed, i)).collect())
}

/// Haar-random single-qubit unitary.
pub fn random_unitary_2(rng: &mut Stream) -> Mat2 {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let a = C64::new(q[0], q[1]) / n;
    let b = C64::new(q[2], q[3]) / n;
    Mat2::new(a, -b.conj(), b, a.conj())
}

/// Uniformly random point of the unit ball in R³ (a single-qubit Bloch vector).
pub fn random_bloch_vector(rng: &mut Stream) -> Vector3<f64> {
    let v = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    let radius: f64 = rng.random::<f64>().cbrt();
    v.normalize() * radius
}

/// `Σ_k p_k |k⟩⟨k| ⊗ ρ_k` with a random orthonormal basis `{|k⟩}` on A.
/// Such states have zero discord with respect to A.
pub fn random_classical_quantum(rng: &mut Stream) -> TwoQubitState {
    let u = random_unitary_2(rng);
    let p: f64 = rng.random();
    let mut rho = Mat4::zeros();
    for (k, weight) in [(0, p), (1, 1.0 - p)] {
        let ket = u.column(k).into_owned();
        let projector: Mat2 = ket * ket.adjoint();
        let rho_b = qubit_from_bloch(&random_bloch_vector(rng));
        rho += kron(&projector, &rho_b).scale(weight);
    }
    TwoQubitState::new_unchecked(rho)
}

/// Random convex mixture of `terms` product states (always separable).
pub fn random_separable(rng: &mut Stream, terms: usize) -> TwoQubitState {
    let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let mut rho = Mat4::zeros();
    for w in weights {
        let a = qubit_from_bloch(&random_bloch_vector(rng));
        let b = qubit_from_bloch(&random_bloch_vector(rng));
        rho += kron(&a, &b).scale(w / total);
    }
    TwoQubitState::new_unchecked(rho)
}

/// Pair `(ρᴸ, ρᴿ)` with `f_min ≤ F(ρᴸ, ρᴿ) < 1`, using the first substream of `seed`.
pub fn random_state_pair_with_fidelity(seed: u64, f_min: f64) -> Result<(TwoQubitState, TwoQubitState)> {
    fidelity_pair_at(seed, 0, f_min)
}

/// Pair number `index` of the fidelity-constrained family.
///
/// `ρᴸ` is Hilbert–Schmidt distributed. A target fidelity is drawn uniformly
/// from `[f_min, 1)`, a second HS state `σ` is drawn, and
/// `ρᴿ = (1 − ε) ρᴸ + ε σ` with `ε ∈ [0, 1]` found by bisection so that the
/// fidelity sits at the target from above. The draw is repeated if the
/// result does not land in `[f_min, 1)`.
pub fn fidelity_pair_at(seed: u64, index: u64, f_min: f64) -> Result<(TwoQubitState, TwoQubitState)> {
    if !(f_min > 0.0 && f_min < 1.0) {
        return Err(Error::InvalidConfig(format!("f_min must lie in (0, 1), got {f_min}")));
    }
    let mut rng = substream(seed, domain::PAIRS, index);
    for _ in 0..PAIR_ATTEMPT_CAP {
        let left = random_state(Measure::HilbertSchmidt, &mut rng);
        let direction = random_state(Measure::HilbertSchmidt, &mut rng);
        let u: f64 = rng.random();
        let target = f_min + u * (1.0 - f_min);
        let blend =
            |eps: f64| TwoQubitState::new_unchecked(left.matrix().scale(1.0 - eps) + direction.matrix().scale(eps));
        let right = if fidelity(&left, &direction) >= target {
            direction
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if fidelity(&left, &blend(mid)) >= target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            blend(lo)
        };
        let f = fidelity(&left, &right);
        if f >= f_min && f < 1.0 {
            return Ok((left, right));
        }
    }
    Err(Error::SamplingExhausted { attempts: PAIR_ATTEMPT_CAP })
}

/// Indicators of one sampled state, as written by the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d_a: f64,
    pub q_a: f64,
    pub v_a: Option<f64>,
    pub d_b: f64,
    pub q_b: f64,
    pub purity: f64,
    /// `6 M₂ − 2 M₁²` for sides A and B.
    pub radicand_a: f64,
    pub radicand_b: f64,
}

/// Spectral indicators of every state of the ensemble.
pub fn discord_sweep(spec: &RandomEnsembleSpec) -> Result<Vec<SweepRow>> {
    if spec.count == 0 {
        return Err(Error::InvalidConfig("ensemble count must be at least 1".into()));
    }
    Ok((0..spec.count as u64)
        .into_par_iter()
        .map(|i| {
            let state = random_state_at(spec.measure, spec.seed, i);
            let b = bloch_decompose(&state);
            let a = side_indicators(&b, Side::A);
            let bb = side_indicators(&b, Side::B);
            SweepRow {
                d_a: a.d,
                q_a: a.q,
                v_a: a.v,
                d_b: bb.d,
                q_b: bb.q,
                purity: state.purity(),
                radicand_a: a.moments.q_radicand(),
                radicand_b: bb.moments.q_radicand(),
            }
        })
        .collect())
}
