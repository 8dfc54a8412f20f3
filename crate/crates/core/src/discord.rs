//! Spectral route: geometric discord `D` and the indicators `Q`, `V` from the
//! correlation matrix `K`.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues_3, Mat3};
use crate::state::{bloch_decompose, BlochForm, Side, TwoQubitState};

/// Radicands down to this value are treated as rounding noise around zero.
pub const RADICAND_TOLERANCE: f64 = 1e-10;

/// `K_A = x xᵀ + T Tᵀ` or `K_B = y yᵀ + Tᵀ T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationMatrixK {
    pub k: Mat3,
    pub side: Side,
}

impl CorrelationMatrixK {
    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        symmetric_eigenvalues_3(&self.k)
    }
}

pub fn k_matrix(b: &BlochForm, side: Side) -> CorrelationMatrixK {
    let k: Matrix3<f64> = match side {
        Side::A => b.x * b.x.transpose() + b.t * b.t.transpose(),
        Side::B => b.y * b.y.transpose() + b.t.transpose() * b.t,
    };
    CorrelationMatrixK { k, side }
}

/// `D = ¼ (Σλ − λ_max)`.
pub fn geometric_discord(k: &CorrelationMatrixK) -> f64 {
    let [max, mid, min] = k.eigenvalues();
    (0.25 * ((max + mid + min) - max)).max(0.0)
}

/// First two spectral moments of `K`: `m1 = Σλ`, `m2 = Σλ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub m1: f64,
    pub m2: f64,
    pub side: Side,
}

impl Moments {
    /// `6 m2 − 2 m1²`, the radicand of the `Q` indicator.
    pub fn q_radicand(&self) -> f64 {
        6.0 * self.m2 - 2.0 * self.m1 * self.m1
    }

    /// Whether the moments are consistent with some nonnegative spectrum of
    /// three eigenvalues (`m1²/3 ≤ m2 ≤ m1²`).
    pub fn is_spectral(&self) -> bool {
        self.m1 >= -RADICAND_TOLERANCE
            && self.m2 >= -RADICAND_TOLERANCE
            && self.m2 <= self.m1 * self.m1 + RADICAND_TOLERANCE
            && 3.0 * self.m2 >= self.m1 * self.m1 - RADICAND_TOLERANCE
    }
}

pub fn moments_from_k(k: &CorrelationMatrixK) -> Moments {
    Moments { m1: k.k.trace(), m2: (k.k * k.k).trace(), side: k.side }
}

/// `Q = (2 m1 − √(6 m2 − 2 m1²)) / 12`, a faithful lower bound on `D`.
pub fn q_indicator(m: &Moments) -> Result<f64> {
    let radicand = m.q_radicand();
    if radicand < -RADICAND_TOLERANCE {
        return Err(Error::InvalidMoments { radicand });
    }
    Ok(q_formula(m.m1, radicand.max(0.0)).max(0.0))
}

/// `Q` for moments that need not be spectral (estimated or mismatched).
/// A negative radicand is clamped to zero; the flag reports whether that happened.
pub fn q_clamped(m1: f64, m2: f64) -> (f64, bool) {
    let radicand = 6.0 * m2 - 2.0 * m1 * m1;
    if radicand < 0.0 {
        (q_formula(m1, 0.0), true)
    } else {
        (q_formula(m1, radicand), false)
    }
}

/// `Q` straight from `K`. The radicand is evaluated as
/// `6 ‖K − (Tr K / 3) I‖²_F`, which equals `6 m2 − 2 m1²` without the
/// cancellation near a degenerate spectrum.
pub fn q_from_k(k: &CorrelationMatrixK) -> f64 {
    let m1 = k.k.trace();
    let traceless = k.k - Mat3::identity() * (m1 / 3.0);
    q_formula(m1, 6.0 * traceless.norm_squared()).max(0.0)
}

fn q_formula(m1: f64, radicand: f64) -> f64 {
    (2.0 * m1 - radicand.sqrt()) / 12.0
}

/// `V = √(m2 − m1²)`, or `None` when the radicand is negative beyond rounding.
///
/// For any nonnegative spectrum `m2 ≤ m1²`, so the value is defined only when
/// `K` has rank at most one.
pub fn v_indicator(m: &Moments) -> Option<f64> {
    let radicand = m.m2 - m.m1 * m.m1;
    (radicand >= -RADICAND_TOLERANCE).then(|| radicand.max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscordReport {
    pub d_a: f64,
    pub d_b: f64,
    pub q_a: f64,
    pub q_b: f64,
    pub v_a: Option<f64>,
    pub v_b: Option<f64>,
    pub q_s: f64,
}

/// Per-side spectral quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideIndicators {
    pub d: f64,
    pub q: f64,
    pub v: Option<f64>,
    pub moments: Moments,
}

pub fn side_indicators(b: &BlochForm, side: Side) -> SideIndicators {
    let k = k_matrix(b, side);
    let moments = moments_from_k(&k);
    let d = geometric_discord(&k);
    SideIndicators { d, q: q_from_k(&k), v: v_indicator(&moments), moments }
}

pub fn discord_report(state: &TwoQubitState) -> DiscordReport {
    let b = bloch_decompose(state);
    let a = side_indicators(&b, Side::A);
    let bb = side_indicators(&b, Side::B);
    DiscordReport { d_a: a.d, d_b: bb.d, q_a: a.q, q_b: bb.q, v_a: a.v, v_b: bb.v, q_s: a.q + bb.q }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn k_diag(a: f64, b: f64, c: f64) -> CorrelationMatrixK {
        CorrelationMatrixK { k: Mat3::from_diagonal(&Vector3::new(a, b, c)), side: Side::A }
    }

    fn moments(m1: f64, m2: f64) -> Moments {
        Moments { m1, m2, side: Side::A }
    }

    #[test]
    fn k_matrix_examples() {
        let singlet = bloch_decompose(&TwoQubitState::singlet());
        assert!((k_matrix(&singlet, Side::A).k - Mat3::identity()).norm() < 1e-15);
        let hh = bloch_decompose(&TwoQubitState::product_basis(false, false));
        let expected = Mat3::from_diagonal(&Vector3::new(0.0, 0.0, 2.0));
        assert!((k_matrix(&hh, Side::A).k - expected).norm() < 1e-15);
        let mixed = bloch_decompose(&TwoQubitState::maximally_mixed());
        assert_eq!(k_matrix(&mixed, Side::A).k, Mat3::zeros());
    }

    #[test]
    fn side_b_uses_column_correlations() {
        let mut b = BlochForm::zero();
        b.t = Mat3::new(0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        b.y = Vector3::new(0.0, 0.3, 0.0);
        let kb = k_matrix(&b, Side::B).k;
        assert!((kb[(1, 1)] - (0.09 + 0.25)).abs() < 1e-15);
        assert_eq!(kb[(0, 0)], 0.0);
    }

    #[test]
    fn geometric_discord_examples() {
        assert!((geometric_discord(&k_diag(1.0, 1.0, 1.0)) - 0.5).abs() < 1e-15);
        assert_eq!(geometric_discord(&k_diag(0.0, 0.0, 2.0)), 0.0);
        let p: f64 = 0.5;
        let w = p * p;
        assert!((geometric_discord(&k_diag(w, w, w)) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn moments_examples() {
        let m = moments_from_k(&k_diag(1.0, 1.0, 1.0));
        assert_eq!((m.m1, m.m2), (3.0, 3.0));
        let m = moments_from_k(&k_diag(0.0, 0.0, 2.0));
        assert_eq!((m.m1, m.m2), (2.0, 4.0));
        let m = moments_from_k(&k_diag(0.0, 0.0, 0.0));
        assert_eq!((m.m1, m.m2), (0.0, 0.0));
    }

    #[test]
    fn q_examples() {
        assert!((q_indicator(&moments(3.0, 3.0)).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(q_indicator(&moments(2.0, 4.0)).unwrap(), 0.0);
        assert!((q_indicator(&moments(0.75, 0.1875)).unwrap() - 0.125).abs() < 1e-15);
        assert!(matches!(q_indicator(&moments(3.0, 1.0)), Err(Error::InvalidMoments { .. })));
    }

    #[test]
    fn q_from_k_matches_moments() {
        for (a, b, c) in [(1.0, 1.0, 1.0), (0.0, 0.0, 2.0), (0.25, 0.25, 0.25), (0.3, 0.1, 0.05)] {
            let k = k_diag(a, b, c);
            let from_moments = q_indicator(&moments_from_k(&k)).unwrap();
            assert!((q_from_k(&k) - from_moments).abs() < 1e-12);
        }
        let p: f64 = 0.35;
        let w = p * p;
        assert_eq!(q_from_k(&k_diag(w, w, w)), 6.0 * w / 12.0);
    }

    #[test]
    fn v_examples() {
        assert_eq!(v_indicator(&moments(0.0, 0.0)), Some(0.0));
        assert_eq!(v_indicator(&moments(3.0, 3.0)), None);
        assert_eq!(v_indicator(&moments(1.0, 1.0)), Some(0.0));
    }

    #[test]
    fn report_examples() {
        let r = discord_report(&TwoQubitState::singlet());
        for v in [r.d_a, r.d_b, r.q_a, r.q_b] {
            assert!((v - 0.5).abs() < 1e-12);
        }
        assert!((r.q_s - 1.0).abs() < 1e-12);

        let r = discord_report(&TwoQubitState::maximally_mixed());
        assert_eq!((r.d_a, r.d_b, r.q_a, r.q_b, r.q_s), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!((r.v_a, r.v_b), (Some(0.0), Some(0.0)));
    }

    #[test]
    fn classical_quantum_has_zero_a_discord() {
        use crate::state::qubit_from_bloch;
        let h = TwoQubitState::product(
            &qubit_from_bloch(&Vector3::new(0.0, 0.0, 1.0)),
            &qubit_from_bloch(&Vector3::new(0.3, 0.1, 0.2)),
        )
        .unwrap();
        let v = TwoQubitState::product(
            &qubit_from_bloch(&Vector3::new(0.0, 0.0, -1.0)),
            &qubit_from_bloch(&Vector3::new(-0.4, 0.0, 0.5)),
        )
        .unwrap();
        let cq = TwoQubitState::average(&h, &v);
        let r = discord_report(&cq);
        assert!(r.d_a.abs() < 1e-12);
        assert!(r.q_a.abs() < 1e-10);
        assert!(r.d_b > 1e-3, "B side is discordant: {}", r.d_b);
    }
}
