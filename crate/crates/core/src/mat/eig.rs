//! Cyclic Jacobi eigendecomposition for complex Hermitian matrices.
//!
//! Deterministic sweep order, no external linear-algebra backend. Accuracy is
//! near machine precision for the desk-scale dimensions handled here.

use super::ComplexMatrix;
use num_complex::Complex64;

/// Eigendecomposition of a Hermitian matrix (assumed symmetrized by the
/// caller). Returns eigenvalues ascending and the unitary whose columns are
/// the matching eigenvectors.
pub fn hermitian_eig_raw(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = h.rows();
    debug_assert_eq!(n, h.cols());
    if n == 0 {
        return (Vec::new(), ComplexMatrix::zeros(0, 0));
    }
    if n == 1 {
        return (vec![h[(0, 0)].re], ComplexMatrix::identity(1));
    }

    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = off_diagonal_norm(&a).max(a.frobenius_norm()).max(1e-300);

    const MAX_SWEEPS: usize = 60;
    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());

    let vals: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vecs = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vecs[(r, new_col)] = v[(r, old_col)];
        }
    }
    (vals, vecs)
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for r in 0..n {
        for c in r + 1..n {
            s += a[(r, c)].norm_sqr();
        }
    }
    (2.0 * s).sqrt()
}

/// One complex Jacobi rotation zeroing a[(p, q)].
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let norm = apq.norm();
    if norm < 1e-300 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    // Phase that makes the pivot real, then a real Jacobi rotation.
    let phase = apq / norm;
    let tau = (aqq - app) / (2.0 * norm);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // Column update coefficients: new_p = c*p - s*conj(phase)*q ; new_q = s*phase*p + c*q.
    let sp = phase.conj() * s;
    let spc = phase * s;

    let n = a.rows();
    // Update A = J† A J by rows and columns.
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * sp;
        a[(k, q)] = akp * spc + akq * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * sp.conj();
        a[(q, k)] = apk * spc.conj() + aqk * c;
    }
    // Clean the pivot pair against round-off.
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * sp;
        v[(k, q)] = vkp * spc + vkq * c;
    }
}
