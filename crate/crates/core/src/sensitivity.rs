//! Differential kinematics and the first-order leg-deviation model.
//!
//! Results for the Y and Z legs follow from the X-leg expressions by
//! relabelling axes: for a leg `k` observed along a transverse axis `j`,
//! the deviation between an extreme posture and the zero posture is
//! `c * d_k + b * d_j`, and the TCP displacement at the extreme posture of
//! `k` is `d_k` along `k` and `tan(alpha) * d_k + d_j` along each `j`.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{Geometry, JointOffsets, LegId, Posture, Vec3};
use crate::scalar::Scalar;

/// Dense 3×3 matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix3<T> {
    pub rows: [[T; 3]; 3],
}

impl<T: Scalar> Matrix3<T> {
    pub fn from_rows(rows: [[T; 3]; 3]) -> Self {
        Matrix3 { rows }
    }

    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Matrix3::from_rows([[o, z, z], [z, o, z], [z, z, o]])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.rows[i][j]
    }

    pub fn transpose(&self) -> Self {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.rows[i][j] = self.rows[j][i];
            }
        }
        out
    }

    pub fn determinant(&self) -> T {
        let m = &self.rows;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse by the adjugate; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.determinant();
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let m = &self.rows;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        let mut out = Matrix3::from_rows(adj);
        for row in out.rows.iter_mut() {
            for v in row.iter_mut() {
                *v = *v / det;
            }
        }
        Some(out)
    }

    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        let a = v.to_array();
        let row = |r: &[T; 3]| r[0] * a[0] + r[1] * a[1] + r[2] * a[2];
        Vec3::new(row(&self.rows[0]), row(&self.rows[1]), row(&self.rows[2]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.rows[i][j] - other.rows[i][j]).abs());
            }
        }
        worst
    }
}

impl<T: Scalar> Mul for Matrix3<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut out = Matrix3::from_rows([[T::zero(); 3]; 3]);
        for i in 0..3 {
            for j in 0..3 {
                out.rows[i][j] =
                    (0..3).fold(T::zero(), |acc, k| acc + self.rows[i][k] * rhs.rows[k][j]);
            }
        }
        out
    }
}

/// Which side of the workspace an extreme test posture sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extreme {
    Max,
    Min,
}

/// The test postures used by the measurement protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PostureTag {
    Zero,
    Max(LegId),
    Min(LegId),
}

impl PostureTag {
    pub fn extreme(leg: LegId, e: Extreme) -> Self {
        match e {
            Extreme::Max => PostureTag::Max(leg),
            Extreme::Min => PostureTag::Min(leg),
        }
    }

    /// Angle between the two transverse legs and their axes at this posture.
    pub fn alpha<T: Scalar>(&self, g: &Geometry<T>) -> T {
        match self {
            PostureTag::Zero => T::zero(),
            PostureTag::Max(_) => g.alpha_max(),
            PostureTag::Min(_) => g.alpha_min(),
        }
    }
}

impl fmt::Display for PostureTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PostureTag::Zero => f.write_str("zero"),
            PostureTag::Max(leg) => write!(f, "{leg}-max"),
            PostureTag::Min(leg) => write!(f, "{leg}-min"),
        }
    }
}

/// Coefficients of the linear deviation model for one test angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviationCoeffs<T> {
    /// `sin(alpha)`
    pub b: T,
    /// `(0.5 + sin(alpha)) * tan(alpha)`
    pub c: T,
}

pub fn deviation_coeffs<T: Scalar>(alpha: T) -> DeviationCoeffs<T> {
    let s = alpha.sin();
    DeviationCoeffs {
        b: s,
        c: (T::lit(0.5) + s) * alpha.tan(),
    }
}

/// Nominal (offset-free) posture for a test tag.
///
/// For an extreme of leg `k`: `p_k = L sin(alpha)`, `rho_k = L + L sin(alpha)`,
/// and `rho_j = L cos(alpha)` on the two other axes.
pub fn nominal_posture<T: Scalar>(tag: PostureTag, g: &Geometry<T>) -> Posture<T> {
    let l = g.leg_length();
    match tag {
        PostureTag::Zero => Posture {
            p: Vec3::zero(),
            rho: Vec3::splat(l),
        },
        PostureTag::Max(leg) | PostureTag::Min(leg) => {
            let alpha = tag.alpha(g);
            let (s, c) = alpha.sin_cos();
            let mut rho = Vec3::splat(l * c);
            rho[leg] = l + l * s;
            Posture {
                p: Vec3::along(leg, l * s),
                rho,
            }
        }
    }
}

/// Maps TCP velocity to offset-corrected joint velocity.
///
/// `eta` is the offset-corrected joint vector `rho + offsets`.
pub fn inverse_jacobian<T: Scalar>(p: Vec3<T>, eta: Vec3<T>) -> Result<Matrix3<T>> {
    let mut m = Matrix3::identity();
    for leg in LegId::ALL {
        let i = leg.index();
        let denom = p[i] - eta[i];
        if denom == T::zero() {
            return Err(Error::SingularPosture(leg));
        }
        for j in leg.others() {
            m.rows[i][j.index()] = p[j] / denom;
        }
    }
    Ok(m)
}

/// Maps joint velocity to TCP velocity; the inverse of [`inverse_jacobian`].
pub fn jacobian<T: Scalar>(p: Vec3<T>, eta: Vec3<T>) -> Result<Matrix3<T>> {
    let inv = inverse_jacobian(p, eta)?;
    inv.inverse().ok_or_else(|| {
        // Rank loss of the inverse Jacobian: the three legs are coplanar.
        let worst = LegId::ALL
            .into_iter()
            .min_by(|a, b| {
                let da = (p[*a] - eta[*a]).abs();
                let db = (p[*b] - eta[*b]).abs();
                da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(LegId::X);
        Error::SingularPosture(worst)
    })
}

/// First-order TCP displacement caused by `off` at a test posture.
pub fn tcp_displacement<T: Scalar>(
    tag: PostureTag,
    g: &Geometry<T>,
    off: &JointOffsets<T>,
) -> Vec3<T> {
    let d = off.as_vec3();
    match tag {
        PostureTag::Zero => d,
        PostureTag::Max(leg) | PostureTag::Min(leg) => {
            let t = tag.alpha(g).tan();
            let mut out = d;
            for j in leg.others() {
                out[j] = t * d[leg] + d[j];
            }
            out
        }
    }
}

/// Linear prediction of the gauge-reading change of `leg` between the zero
/// posture and its `extreme` posture, along the two transverse axes
/// (`x, y, z` order).
pub fn predicted_leg_deviation<T: Scalar>(
    leg: LegId,
    extreme: Extreme,
    off: &JointOffsets<T>,
    g: &Geometry<T>,
) -> [T; 2] {
    let alpha = PostureTag::extreme(leg, extreme).alpha(g);
    let DeviationCoeffs { b, c } = deviation_coeffs(alpha);
    let d = off.as_vec3();
    leg.others().map(|j| c * d[leg] + b * d[j])
}
