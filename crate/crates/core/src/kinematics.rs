//! Offset-aware kinematics of the simplified Orthoglide model.
//!
//! The mechanism is modelled as three rods of length `L`, each joining the
//! tool centre point `p` to a joint that slides along one of the mutually
//! orthogonal base axes. With encoder readings `rho` and encoder offsets
//! `d`, the joint of leg `i` sits at `eta_i = rho_i + d_i` on axis `i` and
//!
//! ```text
//! (p_i - eta_i)^2 + p_j^2 + p_k^2 = L^2      for i in {x, y, z}
//! ```
//!
//! Only the assembly with `sign(eta_i - p_i) = +1` on every axis is supported.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One of the three legs, identified with the base axis of its actuator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LegId {
    X,
    Y,
    Z,
}

impl LegId {
    pub const ALL: [LegId; 3] = [LegId::X, LegId::Y, LegId::Z];

    pub fn index(self) -> usize {
        match self {
            LegId::X => 0,
            LegId::Y => 1,
            LegId::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<LegId> {
        LegId::ALL.get(i).copied()
    }

    /// The two transverse axes of this leg, in `x, y, z` order.
    pub fn others(self) -> [LegId; 2] {
        match self {
            LegId::X => [LegId::Y, LegId::Z],
            LegId::Y => [LegId::X, LegId::Z],
            LegId::Z => [LegId::X, LegId::Y],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LegId::X => "x",
            LegId::Y => "y",
            LegId::Z => "z",
        }
    }
}

impl fmt::Display for LegId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LegId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(LegId::X),
            "y" => Ok(LegId::Y),
            "z" => Ok(LegId::Z),
            other => Err(Error::InvalidArgument(format!("unknown axis {other:?}"))),
        }
    }
}

/// Cartesian triple in millimetres.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Vec3 { x, y, z }
    }

    pub fn zero() -> Self {
        Vec3::splat(T::zero())
    }

    pub fn splat(v: T) -> Self {
        Vec3 { x: v, y: v, z: v }
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    /// Vector with `v` on `axis` and zeros elsewhere.
    pub fn along(axis: LegId, v: T) -> Self {
        let mut out = Vec3::zero();
        out[axis] = v;
        out
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn max_abs(self) -> T {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn map(self, f: impl Fn(T) -> T) -> Self {
        Vec3::new(f(self.x), f(self.y), f(self.z))
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl<T> IndexMut<usize> for Vec3<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        match i {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl<T> Index<LegId> for Vec3<T> {
    type Output = T;

    fn index(&self, leg: LegId) -> &T {
        &self[leg.index()]
    }
}

impl<T> IndexMut<LegId> for Vec3<T> {
    fn index_mut(&mut self, leg: LegId) -> &mut T {
        &mut self[leg.index()]
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;

    fn mul(self, k: T) -> Self {
        self.map(|v| v * k)
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;

    fn neg(self) -> Self {
        self.map(|v| -v)
    }
}

/// Leg length and the two test-posture angles that define a manipulator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometry<T> {
    leg_length: T,
    alpha_max: T,
    alpha_min: T,
}

impl<T: Scalar> Geometry<T> {
    /// Validates and builds a geometry.
    ///
    /// Requires `L > 0` and `-pi/2 < alpha_min < alpha_max < pi/2` with
    /// `alpha_max > 0`. Equal angles are reported as
    /// [`Error::DegenerateGeometry`] since no calibration system can be built
    /// from them; any other violation is [`Error::InvalidGeometry`].
    pub fn new(leg_length: T, alpha_max: T, alpha_min: T) -> Result<Self> {
        if !(leg_length.is_finite() && alpha_max.is_finite() && alpha_min.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite parameter".into()));
        }
        if leg_length <= T::zero() {
            return Err(Error::InvalidGeometry(format!(
                "leg length must be positive, got {leg_length}"
            )));
        }
        let half_pi = T::FRAC_PI_2();
        if alpha_max <= T::zero() || alpha_max >= half_pi {
            return Err(Error::InvalidGeometry(format!(
                "alpha_max must lie in (0, pi/2), got {alpha_max}"
            )));
        }
        if alpha_min <= -half_pi {
            return Err(Error::InvalidGeometry(format!(
                "alpha_min must exceed -pi/2, got {alpha_min}"
            )));
        }
        if alpha_min == alpha_max {
            return Err(Error::DegenerateGeometry(format!(
                "alpha_max equals alpha_min ({alpha_max}); max and min postures coincide"
            )));
        }
        if alpha_min > alpha_max {
            return Err(Error::InvalidGeometry(format!(
                "alpha_min ({alpha_min}) must be below alpha_max ({alpha_max})"
            )));
        }
        Ok(Geometry {
            leg_length,
            alpha_max,
            alpha_min,
        })
    }

    pub fn leg_length(&self) -> T {
        self.leg_length
    }

    pub fn alpha_max(&self) -> T {
        self.alpha_max
    }

    pub fn alpha_min(&self) -> T {
        self.alpha_min
    }

    /// Radicands within this distance below zero are treated as zero.
    pub(crate) fn reach_tolerance(&self) -> T {
        let rel = T::lit(1e-9).max(T::epsilon() * T::lit(16.0));
        rel * self.leg_length * self.leg_length
    }
}

/// Encoder zero-position errors, in millimetres.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JointOffsets<T> {
    pub dx: T,
    pub dy: T,
    pub dz: T,
}

impl<T: Scalar> JointOffsets<T> {
    pub fn new(dx: T, dy: T, dz: T) -> Self {
        JointOffsets { dx, dy, dz }
    }

    pub fn zero() -> Self {
        JointOffsets::new(T::zero(), T::zero(), T::zero())
    }

    pub fn from_vec3(v: Vec3<T>) -> Self {
        JointOffsets::new(v.x, v.y, v.z)
    }

    pub fn as_vec3(&self) -> Vec3<T> {
        Vec3::new(self.dx, self.dy, self.dz)
    }

    pub fn get(&self, leg: LegId) -> T {
        self.as_vec3()[leg]
    }

    /// Checks finiteness and `|offset| < L` on every axis.
    pub fn validate_for(&self, g: &Geometry<T>) -> Result<()> {
        for leg in LegId::ALL {
            let v = self.get(leg);
            if !v.is_finite() {
                return Err(Error::InvalidOffsets(format!("{leg} offset is not finite")));
            }
            if v.abs() >= g.leg_length() {
                return Err(Error::InvalidOffsets(format!(
                    "{leg} offset {v} is not smaller than the leg length {}",
                    g.leg_length()
                )));
            }
        }
        Ok(())
    }
}

/// Inverse-kinematics branch signs `(sx, sy, sz)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConfigurationIndices {
    sx: i8,
    sy: i8,
    sz: i8,
}

impl ConfigurationIndices {
    /// Only `(+1, +1, +1)` is accepted.
    pub fn new(sx: i8, sy: i8, sz: i8) -> Result<Self> {
        if (sx, sy, sz) != (1, 1, 1) {
            return Err(Error::UnsupportedAssembly { sx, sy, sz });
        }
        Ok(ConfigurationIndices { sx, sy, sz })
    }

    pub fn sign(&self, leg: LegId) -> i8 {
        match leg {
            LegId::X => self.sx,
            LegId::Y => self.sy,
            LegId::Z => self.sz,
        }
    }
}

impl Default for ConfigurationIndices {
    fn default() -> Self {
        ConfigurationIndices {
            sx: 1,
            sy: 1,
            sz: 1,
        }
    }
}

/// A TCP position paired with the encoder readings that realise it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Posture<T> {
    pub p: Vec3<T>,
    pub rho: Vec3<T>,
}

impl<T: Scalar> Posture<T> {
    pub fn from_tcp(p: Vec3<T>, off: &JointOffsets<T>, g: &Geometry<T>) -> Result<Self> {
        let rho = inverse_kinematics(p, off, g)?;
        Ok(Posture { p, rho })
    }

    pub fn from_joints(rho: Vec3<T>, off: &JointOffsets<T>, g: &Geometry<T>) -> Result<Self> {
        let p = direct_kinematics(rho, off, g)?;
        Ok(Posture { p, rho })
    }

    /// Offset-corrected joint positions `rho + offsets`.
    pub fn actuated(&self, off: &JointOffsets<T>) -> Vec3<T> {
        self.rho + off.as_vec3()
    }
}

/// Signed residuals of the three sphere constraints, in mm².
pub fn constraint_residuals<T: Scalar>(
    p: Vec3<T>,
    rho: Vec3<T>,
    off: &JointOffsets<T>,
    g: &Geometry<T>,
) -> Vec3<T> {
    let eta = rho + off.as_vec3();
    let l2 = g.leg_length() * g.leg_length();
    let mut r = Vec3::zero();
    for leg in LegId::ALL {
        let [j, k] = leg.others();
        let along = p[leg] - eta[leg];
        r[leg] = along * along + p[j] * p[j] + p[k] * p[k] - l2;
    }
    r
}

/// Encoder readings that place the TCP at `p`.
pub fn inverse_kinematics<T: Scalar>(
    p: Vec3<T>,
    off: &JointOffsets<T>,
    g: &Geometry<T>,
) -> Result<Vec3<T>> {
    let conf = ConfigurationIndices::default();
    let l2 = g.leg_length() * g.leg_length();
    let tol = g.reach_tolerance();
    let mut rho = Vec3::zero();
    for leg in LegId::ALL {
        let [j, k] = leg.others();
        let mut radicand = l2 - p[j] * p[j] - p[k] * p[k];
        if radicand < T::zero() {
            if radicand >= -tol {
                radicand = T::zero();
            } else {
                return Err(Error::Unreachable {
                    axis: leg,
                    radicand: radicand.as_f64(),
                });
            }
        }
        let s = T::lit(conf.sign(leg) as f64);
        rho[leg] = p[leg] + s * radicand.sqrt() - off.get(leg);
    }
    Ok(rho)
}

/// Both roots of the auxiliary quadratic of the direct kinematics.
///
/// With `eta = rho + offsets`, every solution has the form
/// `p_i = eta_i / 2 + t / eta_i`, and `t` solves
/// `A t^2 + t + C = 0` with `A = sum 1/eta_i^2`, `C = sum eta_i^2 / 4 - L^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuxiliaryRoots<T> {
    /// Smaller root; the TCP lies on the base side of the plane through the joints.
    pub selected: T,
    /// Mirror solution on the far side of that plane.
    pub alternate: T,
}

pub fn auxiliary_roots<T: Scalar>(eta: Vec3<T>, g: &Geometry<T>) -> Result<AuxiliaryRoots<T>> {
    for leg in LegId::ALL {
        if eta[leg] == T::zero() {
            return Err(Error::SingularAxis(leg));
        }
    }
    let quarter = T::lit(0.25);
    let l2 = g.leg_length() * g.leg_length();
    let a = LegId::ALL
        .iter()
        .fold(T::zero(), |acc, &i| acc + (eta[i] * eta[i]).recip());
    let c = LegId::ALL
        .iter()
        .fold(T::zero(), |acc, &i| acc + eta[i] * eta[i] * quarter)
        - l2;
    let four = T::lit(4.0);
    let mut disc = T::one() - four * a * c;
    if disc < T::zero() {
        if disc >= -(T::epsilon() * T::lit(64.0)) {
            disc = T::zero();
        } else {
            return Err(Error::Unassemblable {
                discriminant: disc.as_f64(),
            });
        }
    }
    let two = T::lit(2.0);
    let selected = (-T::one() - disc.sqrt()) / (two * a);
    // Product of roots is C / A; avoids cancellation in the other root.
    let alternate = c / (a * selected);
    Ok(AuxiliaryRoots {
        selected,
        alternate,
    })
}

/// TCP position for offset-corrected joints `eta` and auxiliary value `t`.
pub fn tcp_from_auxiliary<T: Scalar>(eta: Vec3<T>, t: T) -> Vec3<T> {
    let half = T::lit(0.5);
    eta.map(|e| e * half + t / e)
}

/// TCP position reached for encoder readings `rho`.
pub fn direct_kinematics<T: Scalar>(
    rho: Vec3<T>,
    off: &JointOffsets<T>,
    g: &Geometry<T>,
) -> Result<Vec3<T>> {
    let eta = rho + off.as_vec3();
    let roots = auxiliary_roots(eta, g)?;
    Ok(tcp_from_auxiliary(eta, roots.selected))
}

/// Centre of the prismatic joint of `leg`.
pub fn joint_center<T: Scalar>(leg: LegId, posture: &Posture<T>, off: &JointOffsets<T>) -> Vec3<T> {
    Vec3::along(leg, posture.rho[leg] + off.get(leg))
}

/// Rod of `leg` as `(tcp, joint_center)`.
pub fn leg_segment<T: Scalar>(
    leg: LegId,
    posture: &Posture<T>,
    off: &JointOffsets<T>,
) -> (Vec3<T>, Vec3<T>) {
    (posture.p, joint_center(leg, posture, off))
}

#[cfg(test)]
mod tests {
    use super::*;

    const L: f64 = 310.0;

    fn geometry() -> Geometry<f64> {
        Geometry::new(L, 0.5, -0.5).unwrap()
    }

    #[test]
    fn zero_posture_has_zero_residuals() {
        let g = geometry();
        let r = constraint_residuals(Vec3::zero(), Vec3::splat(L), &JointOffsets::zero(), &g);
        assert_eq!(r, Vec3::zero());
    }

    #[test]
    fn offset_residual_is_direct_substitution() {
        let g = geometry();
        let d = 1.5;
        let r = constraint_residuals(
            Vec3::zero(),
            Vec3::splat(L),
            &JointOffsets::new(d, 0.0, 0.0),
            &g,
        );
        assert_eq!(r, Vec3::new((L + d) * (L + d) - L * L, 0.0, 0.0));
    }

    #[test]
    fn inverse_kinematics_reference_postures() {
        let g = geometry();
        let zero = inverse_kinematics(Vec3::zero(), &JointOffsets::zero(), &g).unwrap();
        assert_eq!(zero, Vec3::splat(L));

        let a: f64 = 0.5;
        let rho = inverse_kinematics(Vec3::new(L * a.sin(), 0.0, 0.0), &JointOffsets::zero(), &g)
            .unwrap();
        assert!((rho.x - (L + L * a.sin())).abs() < 1e-12 * L);
        assert!((rho.y - L * a.cos()).abs() < 1e-12 * L);
        assert!((rho.z - L * a.cos()).abs() < 1e-12 * L);

        let off = JointOffsets::new(0.3, -0.2, 0.1);
        let rho = inverse_kinematics(Vec3::zero(), &off, &g).unwrap();
        assert_eq!(rho, Vec3::new(L - 0.3, L + 0.2, L - 0.1));
    }

    #[test]
    fn unreachable_reports_axis_and_radicand() {
        let g = geometry();
        let err = inverse_kinematics(Vec3::new(0.0, 300.0, 100.0), &JointOffsets::zero(), &g)
            .unwrap_err();
        match err {
            Error::Unreachable { axis, radicand } => {
                assert_eq!(axis, LegId::X);
                assert!((radicand - (L * L - 300.0 * 300.0 - 100.0 * 100.0)).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn boundary_radicand_is_clamped() {
        let g = geometry();
        // y^2 + z^2 exceeds L^2 by far less than the tolerance.
        let y = L * (0.5f64).sqrt();
        let z = (L * L - y * y).sqrt() * (1.0 + 1e-13);
        let rho = inverse_kinematics(Vec3::new(0.0, y, z), &JointOffsets::zero(), &g).unwrap();
        assert_eq!(rho.x, 0.0);
    }

    #[test]
    fn mechanical_zero_roots() {
        let g = geometry();
        let roots = auxiliary_roots(Vec3::splat(L), &g).unwrap();
        assert!((roots.selected + L * L / 2.0).abs() < 1e-9 * L * L);
        assert!((roots.alternate - L * L / 6.0).abs() < 1e-9 * L * L);
        let p = direct_kinematics(Vec3::splat(L), &JointOffsets::zero(), &g).unwrap();
        assert!(p.max_abs() < 1e-12 * L);
    }

    #[test]
    fn max_posture_direct_kinematics() {
        let g = geometry();
        let a: f64 = 0.5;
        let rho = Vec3::new(L + L * a.sin(), L * a.cos(), L * a.cos());
        let p = direct_kinematics(rho, &JointOffsets::zero(), &g).unwrap();
        assert!((p - Vec3::new(L * a.sin(), 0.0, 0.0)).max_abs() < 1e-10 * L);
    }

    #[test]
    fn direct_kinematics_errors() {
        let g = geometry();
        let off = JointOffsets::zero();
        assert!(matches!(
            direct_kinematics(Vec3::new(L, 0.0, L), &off, &g),
            Err(Error::SingularAxis(LegId::Y))
        ));
        // Joints too far apart for rods of length L.
        assert!(matches!(
            direct_kinematics(Vec3::splat(3.0 * L), &off, &g),
            Err(Error::Unassemblable { .. })
        ));
    }

    #[test]
    fn joint_centers_and_segments() {
        let g = geometry();
        let zero = Posture {
            p: Vec3::zero(),
            rho: Vec3::splat(L),
        };
        let d = 0.7;
        let off = JointOffsets::new(d, 0.0, 0.0);
        assert_eq!(
            joint_center(LegId::X, &zero, &off),
            Vec3::new(L + d, 0.0, 0.0)
        );
        assert_eq!(
            joint_center(LegId::Y, &zero, &JointOffsets::zero()),
            Vec3::new(0.0, L, 0.0)
        );

        let a: f64 = 0.4;
        let zmax =
            Posture::from_tcp(Vec3::new(0.0, 0.0, L * a.sin()), &JointOffsets::zero(), &g).unwrap();
        let jc = joint_center(LegId::Z, &zmax, &JointOffsets::zero());
        assert!((jc - Vec3::new(0.0, 0.0, L * (1.0 + a.sin()))).max_abs() < 1e-12 * L);

        let xmax =
            Posture::from_tcp(Vec3::new(L * a.sin(), 0.0, 0.0), &JointOffsets::zero(), &g).unwrap();
        let (tcp, joint) = leg_segment(LegId::X, &xmax, &JointOffsets::zero());
        assert_eq!(tcp, Vec3::new(L * a.sin(), 0.0, 0.0));
        assert!((joint - Vec3::new(L + L * a.sin(), 0.0, 0.0)).max_abs() < 1e-12 * L);
    }

    #[test]
    fn x_leg_midpoint_at_zero_posture_to_first_order() {
        let g = geometry();
        let off = JointOffsets::new(0.03, -0.02, 0.05);
        let zero = Posture::from_joints(Vec3::splat(L), &off, &g).unwrap();
        let (tcp, joint) = leg_segment(LegId::X, &zero, &off);
        let mid = (tcp + joint) * 0.5;
        let expected = Vec3::new(L / 2.0 + off.dx, off.dy / 2.0, off.dz / 2.0);
        // Second-order terms scale as |off|^2 / L.
        assert!((mid - expected).max_abs() < 1e-4);
        assert!(((tcp - joint).norm() - L).abs() < 1e-9 * L);
    }

    #[test]
    fn geometry_validation() {
        assert!(matches!(
            Geometry::new(0.0, 0.5, -0.5),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            Geometry::new(L, -0.1, -0.5),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            Geometry::new(L, 0.5, 0.6),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            Geometry::new(L, 0.5, -1.6),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            Geometry::new(L, 0.5, 0.5),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(Geometry::new(L, 0.5, 0.1).is_ok());
    }

    #[test]
    fn offsets_must_stay_below_leg_length() {
        let g = geometry();
        assert!(JointOffsets::new(1.0, 2.0, 3.0).validate_for(&g).is_ok());
        assert!(JointOffsets::new(L, 0.0, 0.0).validate_for(&g).is_err());
        assert!(JointOffsets::new(0.0, f64::NAN, 0.0)
            .validate_for(&g)
            .is_err());
    }

    #[test]
    fn only_positive_assembly_is_supported() {
        assert!(ConfigurationIndices::new(1, 1, 1).is_ok());
        assert!(matches!(
            ConfigurationIndices::new(1, -1, 1),
            Err(Error::UnsupportedAssembly { .. })
        ));
    }

    #[test]
    fn single_precision_round_trip() {
        let g = Geometry::new(310.0f32, 0.5, -0.5).unwrap();
        let off = JointOffsets::new(0.5f32, -0.25, 0.125);
        let p = Vec3::new(20.0f32, -35.0, 12.5);
        let rho = inverse_kinematics(p, &off, &g).unwrap();
        let back = direct_kinematics(rho, &off, &g).unwrap();
        assert!((back - p).max_abs() < 1e-3);
    }
}
