//! Two-qubit density matrices and their Bloch representation.
//!
//! Basis order is fixed as `|HH⟩, |HV⟩, |VH⟩, |VV⟩` (`|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`),
//! with subsystem A as the high bit.

use nalgebra::{Matrix3, Vector3, Vector4, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_part, kron, max_abs, min_eigenvalue, pauli, pauli_product, psd_sqrt, Mat2, Mat4, C64, ONE, ZERO,
};

pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const TRACE_TOLERANCE: f64 = 1e-12;
pub const PSD_TOLERANCE: f64 = 1e-10;
const IMAGINARY_RESIDUE_TOLERANCE: f64 = 1e-12;
/// Eigenvalues at or below this are zeroed before taking square roots.
const SQRT_EIGEN_FLOOR: f64 = 1e-14;

/// Which half of the bipartite system an asymmetric quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// A validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: Mat4,
}

impl TwoQubitState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: Mat4) -> Result<Self> {
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("matrix has non-finite entries".into()));
        }
        let skew = max_abs(&(rho - rho.adjoint()));
        if skew > HERMITIAN_TOLERANCE {
            return Err(Error::InvalidState(format!("not Hermitian: max |rho - rho^dagger| = {skew:.3e}")));
        }
        let trace = rho.trace();
        if (trace - ONE).norm() > TRACE_TOLERANCE {
            return Err(Error::InvalidState(format!("trace is {} + {}i, expected 1", trace.re, trace.im)));
        }
        let rho = hermitian_part(&rho);
        let min_eig = min_eigenvalue(&rho);
        if min_eig.is_nan() || min_eig < -PSD_TOLERANCE {
            return Err(Error::InvalidState(format!("not positive semidefinite: minimum eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { rho })
    }

    /// Wraps a matrix already known to be a density matrix up to rounding.
    pub(crate) fn new_unchecked(rho: Mat4) -> Self {
        Self { rho: hermitian_part(&rho) }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) nonzero vector.
    pub fn from_pure(psi: &Vector4<C64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("pure-state vector has zero norm".into()));
        }
        let psi = psi.unscale(norm);
        Ok(Self::new_unchecked(psi * psi.adjoint()))
    }

    /// Convex combination `Σ wᵢ ρᵢ`; weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(f64, &TwoQubitState)]) -> Result<Self> {
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidState("mixture weights must be a probability vector".into()));
        }
        let rho = parts.iter().fold(Mat4::zeros(), |acc, (w, s)| acc + s.rho.scale(*w));
        Ok(Self::new_unchecked(rho))
    }

    /// Equal-weight average `(a + b) / 2`.
    pub fn average(a: &TwoQubitState, b: &TwoQubitState) -> Self {
        Self::new_unchecked((a.rho + b.rho).scale(0.5))
    }

    /// The singlet `|Ψ⁻⟩ = (|HV⟩ − |VH⟩)/√2`.
    pub fn singlet() -> Self {
        Self::from_pure(&singlet_vector()).expect("singlet is normalizable")
    }

    pub fn maximally_mixed() -> Self {
        Self::new_unchecked(Mat4::identity().scale(0.25))
    }

    /// Werner state `p |Ψ⁻⟩⟨Ψ⁻| + (1 − p) I/4`, valid for `p ∈ [−1/3, 1]`.
    pub fn werner(p: f64) -> Result<Self> {
        let rho = Self::singlet().rho.scale(p) + Mat4::identity().scale((1.0 - p) / 4.0);
        Self::new(rho)
    }

    /// Computational-basis product state; `false` is `H`/`↑`, `true` is `V`/`↓`.
    pub fn product_basis(a_is_v: bool, b_is_v: bool) -> Self {
        let mut psi = Vector4::zeros();
        psi[((a_is_v as usize) << 1) | b_is_v as usize] = ONE;
        Self::new_unchecked(psi * psi.adjoint())
    }

    /// `ρ_A ⊗ ρ_B` from two single-qubit density matrices.
    pub fn product(rho_a: &Mat2, rho_b: &Mat2) -> Result<Self> {
        Self::new(kron(rho_a, rho_b))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.rho
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// `(U₁ ⊗ U₂) ρ (U₁ ⊗ U₂)†`.
    pub fn conjugate_local(&self, u_a: &Mat2, u_b: &Mat2) -> Self {
        let u = kron(u_a, u_b);
        Self::new_unchecked(u * self.rho * u.adjoint())
    }

    /// Expectation value `Tr(ρ O)`.
    pub fn expectation(&self, op: &Mat4) -> C64 {
        (self.rho * op).trace()
    }
}

pub fn singlet_vector() -> Vector4<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Vector4::new(ZERO, C64::from(h), C64::from(-h), ZERO)
}

/// Local Bloch vectors `x`, `y` and correlation matrix `T` of a two-qubit operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochForm {
    pub x: Vector3<f64>,
    pub y: Vector3<f64>,
    pub t: Matrix3<f64>,
}

impl BlochForm {
    pub fn zero() -> Self {
        Self { x: Vector3::zeros(), y: Vector3::zeros(), t: Matrix3::zeros() }
    }

    /// The 4×4 real matrix `R_{μν} = Tr[ρ σ_μ ⊗ σ_ν]` with `R₀₀ = 1`.
    pub fn extended(&self) -> nalgebra::Matrix4<f64> {
        nalgebra::Matrix4::from_fn(|r, c| match (r, c) {
            (0, 0) => 1.0,
            (0, c) => self.y[c - 1],
            (r, 0) => self.x[r - 1],
            (r, c) => self.t[(r - 1, c - 1)],
        })
    }
}

/// `x_i = Tr[ρ(σ_i⊗I)]`, `y_i = Tr[ρ(I⊗σ_i)]`, `T_ij = Tr[ρ(σ_i⊗σ_j)]`.
pub fn bloch_decompose(state: &TwoQubitState) -> BlochForm {
    let coefficient = |i: usize, j: usize| {
        let value = state.expectation(&pauli_product(i, j));
        debug_assert!(value.im.abs() <= IMAGINARY_RESIDUE_TOLERANCE, "imaginary residue {}", value.im);
        value.re
    };
    BlochForm {
        x: Vector3::from_fn(|i, _| coefficient(i + 1, 0)),
        y: Vector3::from_fn(|i, _| coefficient(0, i + 1)),
        t: Matrix3::from_fn(|i, j| coefficient(i + 1, j + 1)),
    }
}

/// Inverse of [`bloch_decompose`]. The result is Hermitian with unit trace by
/// construction; positivity is checked.
pub fn bloch_compose(b: &BlochForm) -> Result<TwoQubitState> {
    let finite = b.x.iter().chain(b.y.iter()).chain(b.t.iter()).all(|v| v.is_finite());
    if !finite {
        return Err(Error::InvalidState("Bloch form has non-finite entries".into()));
    }
    let r = b.extended();
    let mut rho = Mat4::zeros();
    for mu in 0..4 {
        for nu in 0..4 {
            if r[(mu, nu)] != 0.0 {
                rho += pauli_product(mu, nu).scale(r[(mu, nu)]);
            }
        }
    }
    let rho = rho.scale(0.25);
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidState("Bloch form overflows".into()));
    }
    let min_eigenvalue = min_eigenvalue(&rho);
    if min_eigenvalue.is_nan() || min_eigenvalue < -PSD_TOLERANCE {
        return Err(Error::NotAState { min_eigenvalue });
    }
    Ok(TwoQubitState::new_unchecked(rho))
}

/// Uhlmann–Jozsa fidelity `(Tr √(√a b √a))²`, clamped to `[0, 1]`.
///
/// The trace is evaluated as the nuclear norm of `√a √b`: its singular values
/// are the square roots of the eigenvalues of `√a b √a`.
pub fn fidelity(a: &TwoQubitState, b: &TwoQubitState) -> f64 {
    let root_a = psd_sqrt(&a.rho, SQRT_EIGEN_FLOOR);
    let root_b = psd_sqrt(&b.rho, SQRT_EIGEN_FLOOR);
    let trace_norm: f64 = SVD::new(root_a * root_b, false, false).singular_values.sum();
    (trace_norm * trace_norm).clamp(0.0, 1.0)
}

/// Partial transpose over subsystem B.
pub fn partial_transpose_b(rho: &Mat4) -> Mat4 {
    Mat4::from_fn(|r, c| {
        let (a, b) = (r >> 1, r & 1);
        let (a2, b2) = (c >> 1, c & 1);
        rho[((a << 1) | b2, (a2 << 1) | b)]
    })
}

/// Smallest eigenvalue of `ρ^{T_B}`; nonnegative exactly for separable two-qubit states.
pub fn ppt_min_eigenvalue(state: &TwoQubitState) -> f64 {
    min_eigenvalue(&partial_transpose_b(&state.rho))
}

/// Single-qubit density matrix from a Bloch vector (not validated).
pub fn qubit_from_bloch(r: &Vector3<f64>) -> Mat2 {
    (pauli(0) + pauli(1).scale(r[0]) + pauli(2).scale(r[1]) + pauli(3).scale(r[2])).scale(0.5)
}
