//! Multi-copy route: the moments `M₁`, `M₂` as expectation values of products
//! of singlet-projection operators over two or four copies of a state.
//!
//! Copies are laid out as `A₁B₁A₂B₂…`, qubit 0 being the most significant bit
//! of the product-space index. Two-qubit factors are placed on arbitrary qubit
//! pairs by explicit index permutation, and the resulting operator is stored
//! sparsely (U has 6 nonzero entries and V has 4, so the 256-dimensional
//! operator for `M₂` has only 576).

use std::sync::OnceLock;

use crate::linalg::{Mat4, C64, ONE, ZERO};
use crate::state::{Side, TwoQubitState};

#[derive(Debug, Clone, PartialEq)]
pub struct MultiCopyOperators {
    /// `P⁻ = |Ψ⁻⟩⟨Ψ⁻|`
    pub singlet_projector: Mat4,
    /// `U = I − 4P⁻`
    pub u_op: Mat4,
    /// `V = U + I`
    pub v_op: Mat4,
}

pub fn build_multicopy_operators() -> MultiCopyOperators {
    // P⁻ = (I − SWAP)/2 has exactly representable entries.
    let swap = Mat4::from_fn(|r, c| if c == ((r & 1) << 1 | r >> 1) { ONE } else { ZERO });
    let singlet_projector = (Mat4::identity() - swap).scale(0.5);
    let u_op = Mat4::identity() - singlet_projector.scale(4.0);
    let v_op = u_op + Mat4::identity();
    MultiCopyOperators { singlet_projector, u_op, v_op }
}

/// Sparse operator on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    pub n_qubits: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseOperator {
    pub fn dimension(&self) -> usize {
        1 << self.n_qubits
    }

    /// Tensor product of two-qubit factors, factor `f` acting on the ordered
    /// qubit pair `pairs[f]`. The pairs must partition `0..n_qubits`.
    pub fn embed(factors: &[(&Mat4, [usize; 2])]) -> Self {
        let n_qubits = 2 * factors.len();
        let mut seen = vec![false; n_qubits];
        for (_, pair) in factors {
            for &q in pair {
                assert!(q < n_qubits && !seen[q], "qubit pairs must partition 0..{n_qubits}");
                seen[q] = true;
            }
        }
        let bit = |q: usize| n_qubits - 1 - q;

        let mut entries = vec![(0usize, 0usize, C64::new(1.0, 0.0))];
        for (op, [q1, q2]) in factors {
            let nonzero: Vec<(usize, usize, C64)> = (0..4)
                .flat_map(|r| (0..4).map(move |c| (r, c)))
                .filter(|&(r, c)| op[(r, c)] != ZERO)
                .map(|(r, c)| (r, c, op[(r, c)]))
                .collect();
            let place = |local: usize| ((local >> 1) << bit(*q1)) | ((local & 1) << bit(*q2));
            entries = entries
                .iter()
                .flat_map(|&(row, col, v)| {
                    nonzero.iter().map(move |&(r, c, w)| (row | place(r), col | place(c), v * w))
                })
                .collect();
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        Self { n_qubits, entries }
    }

    /// `Tr[O (ρ₁ ⊗ ρ₂ ⊗ … ⊗ ρₖ)]` for two-qubit states laid out copy by copy.
    pub fn trace_with_product(&self, copies: &[&Mat4]) -> C64 {
        assert_eq!(2 * copies.len(), self.n_qubits, "one two-qubit state per copy");
        let k = copies.len();
        self.entries
            .iter()
            .map(|&(row, col, v)| {
                // Tr(Oρ) = Σ O_rc ρ_cr, and ρ_cr factorizes over copies.
                copies.iter().enumerate().fold(v, |acc, (c, rho)| {
                    let shift = 2 * (k - 1 - c);
                    acc * rho[((col >> shift) & 3, (row >> shift) & 3)]
                })
            })
            .sum()
    }

    /// Dense matrix, for tests and diagnostics.
    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let d = self.dimension();
        let mut m = vec![vec![ZERO; d]; d];
        for &(r, c, v) in &self.entries {
            m[r][c] += v;
        }
        m
    }
}

/// Qubit index of `A_copy` (`copy` counted from 1).
pub const fn a_qubit(copy: usize) -> usize {
    2 * (copy - 1)
}

/// Qubit index of `B_copy` (`copy` counted from 1).
pub const fn b_qubit(copy: usize) -> usize {
    2 * (copy - 1) + 1
}

/// Two-copy operator for `M₁`: `U_{A₁A₂} ⊗ V_{B₁B₂}` on side A; on side B
/// the roles of U and V are exchanged.
pub fn m1_operator(side: Side) -> &'static SparseOperator {
    static OPS: OnceLock<[SparseOperator; 2]> = OnceLock::new();
    let ops = OPS.get_or_init(|| {
        let MultiCopyOperators { u_op, v_op, .. } = build_multicopy_operators();
        let build = |a_op: &Mat4, b_op: &Mat4| {
            SparseOperator::embed(&[(a_op, [a_qubit(1), a_qubit(2)]), (b_op, [b_qubit(1), b_qubit(2)])])
        };
        [build(&u_op, &v_op), build(&v_op, &u_op)]
    });
    &ops[side_index(side)]
}

/// Four-copy operator for `M₂`:
/// `U_{A₁A₄} ⊗ U_{A₂A₃} ⊗ V_{B₁B₂} ⊗ V_{B₃B₄}` on side A; on side B
/// `V_{A₁A₂} ⊗ V_{A₃A₄} ⊗ U_{B₁B₄} ⊗ U_{B₂B₃}`.
pub fn m2_operator(side: Side) -> &'static SparseOperator {
    static OPS: OnceLock<[SparseOperator; 2]> = OnceLock::new();
    let ops = OPS.get_or_init(|| {
        let MultiCopyOperators { u_op, v_op, .. } = build_multicopy_operators();
        let side_a = SparseOperator::embed(&[
            (&u_op, [a_qubit(1), a_qubit(4)]),
            (&u_op, [a_qubit(2), a_qubit(3)]),
            (&v_op, [b_qubit(1), b_qubit(2)]),
            (&v_op, [b_qubit(3), b_qubit(4)]),
        ]);
        let side_b = SparseOperator::embed(&[
            (&v_op, [a_qubit(1), a_qubit(2)]),
            (&v_op, [a_qubit(3), a_qubit(4)]),
            (&u_op, [b_qubit(1), b_qubit(4)]),
            (&u_op, [b_qubit(2), b_qubit(3)]),
        ]);
        [side_a, side_b]
    });
    &ops[side_index(side)]
}

fn side_index(side: Side) -> usize {
    match side {
        Side::A => 0,
        Side::B => 1,
    }
}

/// `M₁` from two copies, possibly of different states (`ρ₁ ⊗ ρ₂`).
pub fn m1_from_copies(first: &TwoQubitState, second: &TwoQubitState, side: Side) -> f64 {
    m1_operator(side).trace_with_product(&[first.matrix(), second.matrix()]).re
}

/// `M₂` from four copies laid out as `ρ₁ ⊗ ρ₂ ⊗ ρ₃ ⊗ ρ₄`.
pub fn m2_from_copies(copies: [&TwoQubitState; 4], side: Side) -> f64 {
    let mats = copies.map(|s| s.matrix());
    m2_operator(side).trace_with_product(&mats).re
}

pub fn m1_multicopy(state: &TwoQubitState, side: Side) -> f64 {
    m1_from_copies(state, state, side)
}

pub fn m2_multicopy(state: &TwoQubitState, side: Side) -> f64 {
    m2_from_copies([state; 4], side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigen, kron, max_abs, pauli, Mat2};
    use crate::state::singlet_vector;

    #[test]
    fn operator_invariants() {
        let ops = build_multicopy_operators();
        let p = ops.singlet_projector;
        assert!(max_abs(&(p * p - p)) < 1e-12);
        assert!((p.trace().re - 1.0).abs() < 1e-12);

        let mut u_spec: Vec<f64> = hermitian_eigen(&ops.u_op).0.iter().copied().collect();
        u_spec.sort_by(f64::total_cmp);
        let mut v_spec: Vec<f64> = hermitian_eigen(&ops.v_op).0.iter().copied().collect();
        v_spec.sort_by(f64::total_cmp);
        for (got, want) in u_spec.iter().zip([-3.0, 1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in v_spec.iter().zip([-2.0, 2.0, 2.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(ops.u_op.trace().norm() < 1e-12);
        assert!((ops.v_op.trace().re - 4.0).abs() < 1e-12);
        assert_eq!(ops.v_op, ops.u_op + Mat4::identity());
    }

    #[test]
    fn projector_matches_singlet_ket() {
        let psi = singlet_vector();
        let ops = build_multicopy_operators();
        assert!(max_abs(&(ops.singlet_projector - psi * psi.adjoint())) < 1e-15);
    }

    #[test]
    fn u_eigenvector_is_singlet() {
        let ops = build_multicopy_operators();
        let psi = singlet_vector();
        assert!((ops.u_op * psi + psi.scale(3.0)).norm() < 1e-12);
    }

    #[test]
    fn u_is_sum_of_pauli_correlators() {
        // U = Σ_k σ_k ⊗ σ_k, which is what makes the multi-copy traces reproduce K.
        let ops = build_multicopy_operators();
        let sum = (1..4).fold(Mat4::zeros(), |acc, k| acc + kron(&pauli(k), &pauli(k)));
        assert!(max_abs(&(ops.u_op - sum)) < 1e-12);
    }

    fn dense_kron(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let (n, m) = (a.len(), b.len());
        let mut out = vec![vec![ZERO; n * m]; n * m];
        for i in 0..n * m {
            for j in 0..n * m {
                out[i][j] = a[i / m][j / m] * b[i % m][j % m];
            }
        }
        out
    }

    fn to_rows(m: &Mat4) -> Vec<Vec<C64>> {
        (0..4).map(|r| (0..4).map(|c| m[(r, c)]).collect()).collect()
    }

    #[test]
    fn two_copy_embedding_matches_hand_permutation() {
        // U_{A1A2} ⊗ V_{B1B2} in operator order (A1 A2 B1 B2) conjugated by the
        // swap of the middle two qubits gives the layout A1 B1 A2 B2.
        let ops = build_multicopy_operators();
        let natural = dense_kron(&to_rows(&ops.u_op), &to_rows(&ops.v_op));
        let swap_middle = |i: usize| {
            let (a1, a2, b1, b2) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
            (a1 << 3) | (b1 << 2) | (a2 << 1) | b2
        };
        let mut expected = vec![vec![ZERO; 16]; 16];
        for i in 0..16 {
            for j in 0..16 {
                expected[swap_middle(i)][swap_middle(j)] = natural[i][j];
            }
        }
        assert_eq!(m1_operator(Side::A).to_dense(), expected);
    }

    #[test]
    fn embedding_on_adjacent_pair_is_plain_kron() {
        let z: Mat2 = pauli(3);
        let x: Mat2 = pauli(1);
        let a = kron(&z, &x);
        let id = Mat4::identity();
        let op = SparseOperator::embed(&[(&a, [0, 1]), (&id, [2, 3])]);
        assert_eq!(op.to_dense(), dense_kron(&to_rows(&a), &to_rows(&id)));
        let op = SparseOperator::embed(&[(&a, [1, 0]), (&id, [2, 3])]);
        assert_eq!(op.to_dense(), dense_kron(&to_rows(&kron(&x, &z)), &to_rows(&id)));
    }

    #[test]
    fn operator_sparsity() {
        assert_eq!(m1_operator(Side::A).entries.len(), 24);
        assert_eq!(m2_operator(Side::A).entries.len(), 576);
        assert_eq!(m2_operator(Side::B).entries.len(), 576);
    }

    #[test]
    fn reference_moments() {
        let singlet = TwoQubitState::singlet();
        let hh = TwoQubitState::product_basis(false, false);
        let mixed = TwoQubitState::maximally_mixed();
        for side in [Side::A, Side::B] {
            assert!((m1_multicopy(&singlet, side) - 3.0).abs() < 1e-12);
            assert!((m2_multicopy(&singlet, side) - 3.0).abs() < 1e-12);
            assert!((m1_multicopy(&hh, side) - 2.0).abs() < 1e-12);
            assert!((m2_multicopy(&hh, side) - 4.0).abs() < 1e-12);
            assert!(m1_multicopy(&mixed, side).abs() < 1e-12);
            assert!(m2_multicopy(&mixed, side).abs() < 1e-12);
        }
    }
}
