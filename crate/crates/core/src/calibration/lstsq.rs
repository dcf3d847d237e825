//! 3×3 symmetric positive-definite helpers for the normal equations.

use crate::scalar::Scalar;
use crate::sensitivity::Matrix3;

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Cholesky3<T> {
    l: [[T; 3]; 3],
}

impl<T: Scalar> Cholesky3<T> {
    /// Fails when a pivot falls below `rel_tol` times the largest diagonal
    /// entry, i.e. when the matrix is numerically rank deficient.
    pub(crate) fn factor(m: &Matrix3<T>, rel_tol: T) -> Option<Self> {
        let scale = (0..3).fold(T::zero(), |acc, i| acc.max(m.get(i, i)));
        if !(scale > T::zero()) || !scale.is_finite() {
            return None;
        }
        let mut l = [[T::zero(); 3]; 3];
        for j in 0..3 {
            let mut d = m.get(j, j);
            for k in 0..j {
                d = d - l[j][k] * l[j][k];
            }
            if !(d > rel_tol * scale) {
                return None;
            }
            let root = d.sqrt();
            l[j][j] = root;
            for i in (j + 1)..3 {
                let mut v = m.get(i, j);
                for k in 0..j {
                    v = v - l[i][k] * l[j][k];
                }
                l[i][j] = v / root;
            }
        }
        Some(Cholesky3 { l })
    }

    pub(crate) fn solve(&self, b: [T; 3]) -> [T; 3] {
        let l = &self.l;
        let mut y = [T::zero(); 3];
        for i in 0..3 {
            let mut v = b[i];
            for k in 0..i {
                v = v - l[i][k] * y[k];
            }
            y[i] = v / l[i][i];
        }
        let mut x = [T::zero(); 3];
        for i in (0..3).rev() {
            let mut v = y[i];
            for k in (i + 1)..3 {
                v = v - l[k][i] * x[k];
            }
            x[i] = v / l[i][i];
        }
        x
    }
}

/// Eigenvalues of a symmetric 3×3 matrix, largest first.
pub(crate) fn symmetric_eigenvalues<T: Scalar>(m: &Matrix3<T>) -> [T; 3] {
    let off = m.get(0, 1).powi(2) + m.get(0, 2).powi(2) + m.get(1, 2).powi(2);
    let diag = [m.get(0, 0), m.get(1, 1), m.get(2, 2)];
    if off == T::zero() {
        let mut e = diag;
        e.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        return e;
    }
    let three = T::lit(3.0);
    let q = (diag[0] + diag[1] + diag[2]) / three;
    let p2 = diag.iter().fold(T::zero(), |acc, &d| acc + (d - q).powi(2)) + T::lit(2.0) * off;
    let p = (p2 / T::lit(6.0)).sqrt();
    let mut shifted = *m;
    for (i, row) in shifted.rows.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let d = if i == j { q } else { T::zero() };
            *v = (*v - d) / p;
        }
    }
    let r = (shifted.determinant() / T::lit(2.0))
        .max(-T::one())
        .min(T::one());
    let phi = r.acos() / three;
    let two_p = T::lit(2.0) * p;
    let largest = q + two_p * phi.cos();
    let smallest = q + two_p * (phi + T::lit(2.0) * T::PI() / three).cos();
    let middle = three * q - largest - smallest;
    [largest, middle, smallest]
}

/// Ratio of extreme eigenvalues of a symmetric positive semi-definite matrix.
pub(crate) fn condition_number<T: Scalar>(m: &Matrix3<T>) -> T {
    let e = symmetric_eigenvalues(m);
    if e[2] <= T::zero() {
        T::infinity()
    } else {
        e[0] / e[2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let m = Matrix3::from_rows([[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]]);
        let x: [f64; 3] = [1.0, -2.0, 0.5];
        let b = m.mul_vec(crate::kinematics::Vec3::from_array(x)).to_array();
        let got = Cholesky3::factor(&m, 1e-12).unwrap().solve(b);
        for i in 0..3 {
            assert!((got[i] - x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn cholesky_rejects_rank_deficiency() {
        let m = Matrix3::from_rows([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(Cholesky3::factor(&m, 1e-12).is_none());
        assert!(Cholesky3::factor(&Matrix3::<f64>::from_rows([[0.0; 3]; 3]), 1e-12).is_none());
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let d = Matrix3::from_rows([[2.0, 0.0, 0.0], [0.0, 5.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_eq!(symmetric_eigenvalues(&d), [5.0, 2.0, 1.0]);
        // [[2,1,0],[1,2,1],[0,1,2]] has eigenvalues 2 + sqrt2, 2, 2 - sqrt2.
        let m = Matrix3::from_rows([[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]]);
        let e = symmetric_eigenvalues(&m);
        let s = 2f64.sqrt();
        assert!((e[0] - (2.0 + s)).abs() < 1e-14);
        assert!((e[1] - 2.0).abs() < 1e-14);
        assert!((e[2] - (2.0 - s)).abs() < 1e-14);
        assert!((condition_number(&m) - (2.0 + s) / (2.0 - s)).abs() < 1e-12);
    }
}
