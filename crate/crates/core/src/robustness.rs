//! Mismatched sources: the multi-copy moments when alternate copies come from
//! two different states `ρᴸ`, `ρᴿ`, and how far the resulting `Q′` drifts
//! from `Q` of the average state.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discord::{q_clamped, side_indicators, Moments};
use crate::ensemble::fidelity_pair_at;
use crate::error::{Error, Result};
use crate::multicopy::{m1_from_copies, m2_from_copies};
use crate::state::{bloch_decompose, fidelity, Side, TwoQubitState};

/// Upper edge of the regular part of the delta histogram.
pub const HISTOGRAM_RANGE: f64 = 0.05;
pub const HISTOGRAM_BINS: usize = 20;

/// `M′₁` over `ρᴸ ⊗ ρᴿ` and `M′₂` over `ρᴸ ⊗ ρᴿ ⊗ ρᴸ ⊗ ρᴿ`.
///
/// The result need not satisfy the spectral relations of [`Moments`].
pub fn mismatch_moments(rho_l: &TwoQubitState, rho_r: &TwoQubitState, side: Side) -> Moments {
    Moments { m1: m1_from_copies(rho_l, rho_r, side), m2: m2_from_copies([rho_l, rho_r, rho_l, rho_r], side), side }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MismatchResult {
    pub q_prime: f64,
    /// `Q_A` of `(ρᴸ + ρᴿ)/2`.
    pub q_exact: f64,
    pub fidelity: f64,
    pub delta: f64,
    /// The radicand of `Q′` was negative and clamped to zero.
    pub clamped: bool,
}

pub fn mismatch_q(rho_l: &TwoQubitState, rho_r: &TwoQubitState) -> MismatchResult {
    let m = mismatch_moments(rho_l, rho_r, Side::A);
    let (q_prime, clamped) = q_clamped(m.m1, m.m2);
    let average = TwoQubitState::average(rho_l, rho_r);
    let q_exact = side_indicators(&bloch_decompose(&average), Side::A).q;
    MismatchResult { q_prime, q_exact, fidelity: fidelity(rho_l, rho_r), delta: (q_prime - q_exact).abs(), clamped }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaHistogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
    /// Deltas at or above `HISTOGRAM_RANGE`.
    pub overflow: u64,
}

impl DeltaHistogram {
    fn from_deltas(deltas: impl Iterator<Item = f64>) -> Self {
        let bin_width = HISTOGRAM_RANGE / HISTOGRAM_BINS as f64;
        let mut counts = vec![0; HISTOGRAM_BINS];
        let mut overflow = 0;
        for d in deltas {
            let bin = (d / bin_width) as usize;
            if bin < HISTOGRAM_BINS {
                counts[bin] += 1;
            } else {
                overflow += 1;
            }
        }
        Self { bin_width, counts, overflow }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessSummary {
    pub n_pairs: u64,
    pub f_min: f64,
    pub seed: u64,
    pub max_delta: f64,
    pub clamped_count: u64,
    pub histogram: DeltaHistogram,
    #[serde(skip)]
    pub rows: Vec<MismatchResult>,
}

/// `n_pairs` fidelity-constrained pairs, pair `k` drawn from substream `k` of `seed`.
pub fn robustness_sweep(n_pairs: u64, f_min: f64, seed: u64) -> Result<RobustnessSummary> {
    if n_pairs == 0 {
        return Err(Error::InvalidConfig("n_pairs must be at least 1".into()));
    }
    if !(f_min > 0.0 && f_min < 1.0) {
        return Err(Error::InvalidConfig(format!("f_min must lie in (0, 1), got {f_min}")));
    }
    let rows: Vec<MismatchResult> = (0..n_pairs)
        .into_par_iter()
        .map(|k| fidelity_pair_at(seed, k, f_min).map(|(l, r)| mismatch_q(&l, &r)))
        .collect::<Result<_>>()?;
    let max_delta = rows.iter().map(|r| r.delta).fold(0.0, f64::max);
    let clamped_count = rows.iter().filter(|r| r.clamped).count() as u64;
    let histogram = DeltaHistogram::from_deltas(rows.iter().map(|r| r.delta));
    Ok(RobustnessSummary { n_pairs, f_min, seed, max_delta, clamped_count, histogram, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{random_state_at, Measure};
    use crate::linalg::{kron, Mat4, C64};
    use crate::multicopy::{build_multicopy_operators, m1_multicopy, m2_multicopy};

    /// Dense `Tr[O (ρ₁ ⊗ … ⊗ ρₖ)]` with copies in `A₁B₁A₂B₂…` order,
    /// built without the sparse embedding.
    fn dense_trace(op_on_copies: &nalgebra::DMatrix<C64>, copies: &[&Mat4]) -> f64 {
        let mut rho = nalgebra::DMatrix::<C64>::from_element(1, 1, C64::new(1.0, 0.0));
        for c in copies {
            let c = nalgebra::DMatrix::from_fn(4, 4, |i, j| c[(i, j)]);
            rho = rho.kronecker(&c);
        }
        (op_on_copies * rho).trace().re
    }

    /// Operator on `n` qubits with `op` acting on qubits `(q1, q2)`, identity elsewhere.
    fn two_qubit_dense(op: &Mat4, q1: usize, q2: usize, n: usize) -> nalgebra::DMatrix<C64> {
        let dim = 1 << n;
        let bit = |q: usize| n - 1 - q;
        nalgebra::DMatrix::from_fn(dim, dim, |r, c| {
            let rest = !((1 << bit(q1)) | (1 << bit(q2)));
            if r & rest != c & rest {
                return C64::new(0.0, 0.0);
            }
            let local = |x: usize| (((x >> bit(q1)) & 1) << 1) | ((x >> bit(q2)) & 1);
            op[(local(r), local(c))]
        })
    }

    #[test]
    fn reduces_to_matched_moments() {
        for k in 0..200 {
            let s = random_state_at(Measure::HilbertSchmidt, 21, k);
            for side in [Side::A, Side::B] {
                let m = mismatch_moments(&s, &s, side);
                assert!((m.m1 - m1_multicopy(&s, side)).abs() < 1e-10);
                assert!((m.m2 - m2_multicopy(&s, side)).abs() < 1e-10);
            }
        }
        let m = mismatch_moments(&TwoQubitState::singlet(), &TwoQubitState::singlet(), Side::A);
        assert!((m.m1 - 3.0).abs() < 1e-12 && (m.m2 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn hh_vv_oracle_by_dense_trace() {
        let ops = build_multicopy_operators();
        let hh = TwoQubitState::product_basis(false, false);
        let vv = TwoQubitState::product_basis(true, true);

        let m1_op = two_qubit_dense(&ops.u_op, 0, 2, 4) * two_qubit_dense(&ops.v_op, 1, 3, 4);
        let m1 = dense_trace(&m1_op, &[hh.matrix(), vv.matrix()]);
        let m2_op = two_qubit_dense(&ops.u_op, 0, 6, 8)
            * two_qubit_dense(&ops.u_op, 2, 4, 8)
            * two_qubit_dense(&ops.v_op, 1, 3, 8)
            * two_qubit_dense(&ops.v_op, 5, 7, 8);
        let m2 = dense_trace(&m2_op, &[hh.matrix(), vv.matrix(), hh.matrix(), vv.matrix()]);

        // Each box sees |HV⟩, for which ⟨U⟩ = −1 and ⟨V⟩ = 0.
        assert!(m1.abs() < 1e-12);
        assert!(m2.abs() < 1e-12);
        let m = mismatch_moments(&hh, &vv, Side::A);
        assert!((m.m1 - m1).abs() < 1e-12);
        assert!((m.m2 - m2).abs() < 1e-12);

        let r = mismatch_q(&hh, &vv);
        assert_eq!(r.fidelity, 0.0);
        // The average (|HH⟩⟨HH| + |VV⟩⟨VV|)/2 is classical.
        assert!(r.q_exact.abs() < 1e-12);
        assert!(r.delta.abs() < 1e-12);
    }

    #[test]
    fn identical_sources_have_zero_delta() {
        for k in 0..50 {
            let s = random_state_at(Measure::HilbertSchmidt, 5, k);
            let r = mismatch_q(&s, &s);
            assert!(r.delta < 1e-10, "{r:?}");
            assert!((r.fidelity - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn symmetric_for_common_product_basis_diagonal_states() {
        let diag = |w: [f64; 4]| {
            let total: f64 = w.iter().sum();
            TwoQubitState::new(Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|i, _| C64::new(w[i] / total, 0.0))))
                .unwrap()
        };
        let l = diag([0.4, 0.1, 0.2, 0.3]);
        let r = diag([0.05, 0.5, 0.25, 0.2]);
        let a = mismatch_moments(&l, &r, Side::A);
        let b = mismatch_moments(&r, &l, Side::A);
        assert!((a.m1 - b.m1).abs() < 1e-10);
    }

    #[test]
    fn product_operator_order_matches_kron() {
        let ops = build_multicopy_operators();
        let dense = two_qubit_dense(&ops.u_op, 0, 1, 2);
        let want = kron(&crate::linalg::pauli(0), &crate::linalg::pauli(0)) - ops.singlet_projector.scale(4.0);
        for i in 0..4 {
            for j in 0..4 {
                assert!((dense[(i, j)] - want[(i, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn sweep_is_reproducible_and_bounded() {
        let a = robustness_sweep(300, 0.9, 17).unwrap();
        let b = robustness_sweep(300, 0.9, 17).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 300);
        assert_eq!(a.histogram.counts.iter().sum::<u64>() + a.histogram.overflow, 300);
        for r in &a.rows {
            assert!(r.fidelity >= 0.9 && r.fidelity <= 1.0);
        }
        assert!(a.max_delta < 0.05, "{}", a.max_delta);

        let tight = robustness_sweep(300, 0.999, 17).unwrap();
        assert!(tight.max_delta <= a.max_delta);
    }

    #[test]
    fn sweep_rejects_bad_parameters() {
        assert!(robustness_sweep(0, 0.9, 1).is_err());
        assert!(robustness_sweep(10, 1.0, 1).is_err());
        assert!(robustness_sweep(10, 0.0, 1).is_err());
    }
}
