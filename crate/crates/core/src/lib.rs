//! Joint-offset calibration for Orthoglide-type translational parallel
//! manipulators.
//!
//! Comparator gauges observe how far each leg drifts from parallel while the
//! tool moves between the mechanical-zero posture and the max/min postures
//! along each Cartesian axis. The drifts are linear in the three encoder
//! offsets to first order, so the offsets follow from a small least-squares
//! problem.
//!
//! * [`kinematics`]: offset-aware inverse/direct kinematics and rod geometry.
//! * [`sensitivity`]: Jacobians and the linear deviation model.
//! * [`measurement`]: session simulation, ingestion and deviation extraction.
//! * [`calibration`]: identification, prediction and validation.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` / `*F32` aliases below name the common instantiations. Lengths are
//! millimetres and angles radians throughout.

pub mod calibration;
pub mod error;
pub mod kinematics;
pub mod measurement;
pub mod scalar;
pub mod sensitivity;

pub use calibration::{
    build_design_matrix, identify_offsets, predict_improvement, rms, validate, CalibrationResult,
    DesignMatrix, ValidationReport,
};
pub use error::{Error, Result};
pub use kinematics::{
    constraint_residuals, direct_kinematics, inverse_kinematics, joint_center, leg_segment,
    Geometry, JointOffsets, LegId, Posture, Vec3,
};
pub use measurement::{
    session_to_deviations, simulate_session, DeviationForm, DeviationSet, MeasurementSession,
    NoiseModel,
};
pub use scalar::Scalar;
pub use sensitivity::{
    deviation_coeffs, inverse_jacobian, jacobian, predicted_leg_deviation, tcp_displacement,
    Extreme, Matrix3, PostureTag,
};

pub type Vec3F64 = Vec3<f64>;
pub type Vec3F32 = Vec3<f32>;
pub type Matrix3F64 = Matrix3<f64>;
pub type Matrix3F32 = Matrix3<f32>;
pub type GeometryF64 = Geometry<f64>;
pub type GeometryF32 = Geometry<f32>;
pub type JointOffsetsF64 = JointOffsets<f64>;
pub type JointOffsetsF32 = JointOffsets<f32>;
pub type PostureF64 = Posture<f64>;
pub type PostureF32 = Posture<f32>;
pub type SessionF64 = MeasurementSession<f64>;
pub type SessionF32 = MeasurementSession<f32>;
pub type DeviationSetF64 = DeviationSet<f64>;
pub type DeviationSetF32 = DeviationSet<f32>;
pub type CalibrationResultF64 = CalibrationResult<f64>;
pub type CalibrationResultF32 = CalibrationResult<f32>;
