//! Small dense linear-algebra helpers for 2-, 3- and 4-dimensional matrices.

use nalgebra::{Matrix2, Matrix3, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Mat3 = Matrix3<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Off-diagonal Frobenius norm at which the cyclic Jacobi sweep stops.
pub const JACOBI_TOLERANCE: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Pauli matrix `σ_index`, with `σ_0 = I`.
pub fn pauli(index: usize) -> Mat2 {
    match index {
        0 => Mat2::new(ONE, ZERO, ZERO, ONE),
        1 => Mat2::new(ZERO, ONE, ONE, ZERO),
        2 => Mat2::new(ZERO, -I, I, ZERO),
        3 => Mat2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("pauli index {index} out of range"),
    }
}

/// Kronecker product `a ⊗ b`; the first factor indexes the most significant bit.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r >> 1, c >> 1)] * b[(r & 1, c & 1)])
}

/// `σ_i ⊗ σ_j` for `i, j ∈ 0..4`.
pub fn pauli_product(i: usize, j: usize) -> Mat4 {
    kron(&pauli(i), &pauli(j))
}

pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_part(m: &Mat4) -> Mat4 {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian 4×4 matrix. Eigenvalues are unsorted.
pub fn hermitian_eigen(m: &Mat4) -> (Vector4<f64>, Mat4) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    (eig.eigenvalues, eig.eigenvectors)
}

pub fn min_eigenvalue(m: &Mat4) -> f64 {
    hermitian_eigen(m).0.min()
}

/// Square root of a positive semidefinite Hermitian matrix. Eigenvalues at or
/// below `floor` are treated as zero.
pub fn psd_sqrt(m: &Mat4, floor: f64) -> Mat4 {
    let (values, vectors) = hermitian_eigen(m);
    let roots = values.map(|v| if v <= floor { 0.0 } else { v.sqrt() });
    let mut scaled = vectors;
    for (mut col, root) in scaled.column_iter_mut().zip(roots.iter()) {
        col *= C64::from(*root);
    }
    scaled * vectors.adjoint()
}

/// Eigenvalues of a real symmetric 3×3 matrix by cyclic Jacobi rotations,
/// sorted in descending order.
pub fn symmetric_eigenvalues_3(k: &Mat3) -> [f64; 3] {
    let mut a = (k + k.transpose()) * 0.5;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= JACOBI_TOLERANCE {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[(p, q)];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut g = Mat3::identity();
            g[(p, p)] = c;
            g[(q, q)] = c;
            g[(p, q)] = s;
            g[(q, p)] = -s;
            a = g.transpose() * a * g;
            a[(p, q)] = 0.0;
            a[(q, p)] = 0.0;
        }
    }
    let mut values = [a[(0, 0)], a[(1, 1)], a[(2, 2)]];
    values.sort_by(|x, y| y.total_cmp(x));
    values
}

fn off_diagonal_norm(a: &Mat3) -> f64 {
    (2.0 * (a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2))).sqrt()
}
