//! Joint-offset identification from leg-parallelism deviations.
//!
//! Each deviation is linear in the offsets: a leg `k` observed along axis `j`
//! contributes the row `c * d_k + b * d_j`, with `(b, c)` taken from the test
//! angle of the posture (or the difference of the max and min coefficients in
//! the reduced form). The stacked system is solved in the least-squares sense
//! through its 3×3 normal equations.

mod lstsq;
pub mod report;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinematics::{Geometry, JointOffsets};
use crate::measurement::{DeviationForm, DeviationSet};
use crate::scalar::Scalar;
use crate::sensitivity::{deviation_coeffs, Extreme, Matrix3};

use lstsq::{condition_number, Cholesky3};

/// Coefficient matrix of the identification system, one row per deviation.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix<T> {
    pub form: DeviationForm,
    pub rows: Vec<[T; 3]>,
}

impl<T: Scalar> DesignMatrix<T> {
    pub fn apply(&self, off: &JointOffsets<T>) -> Vec<T> {
        let x = off.as_vec3().to_array();
        self.rows
            .iter()
            .map(|r| r[0] * x[0] + r[1] * x[1] + r[2] * x[2])
            .collect()
    }

    /// `Aᵀ v`
    pub fn transpose_apply(&self, v: &[T]) -> [T; 3] {
        let mut out = [T::zero(); 3];
        for (row, &vi) in self.rows.iter().zip(v) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o = *o + a * vi;
            }
        }
        out
    }

    /// `AᵀA`
    pub fn gram(&self) -> Matrix3<T> {
        let mut m = Matrix3::from_rows([[T::zero(); 3]; 3]);
        for row in &self.rows {
            for i in 0..3 {
                for j in 0..3 {
                    m.rows[i][j] = m.rows[i][j] + row[i] * row[j];
                }
            }
        }
        m
    }

    fn factor(&self) -> Option<Cholesky3<T>> {
        Cholesky3::factor(&self.gram(), T::epsilon().sqrt())
    }
}

/// Builds the identification matrix for `form`, rejecting rank-deficient
/// geometries.
pub fn build_design_matrix<T: Scalar>(
    g: &Geometry<T>,
    form: DeviationForm,
) -> Result<DesignMatrix<T>> {
    let hi = deviation_coeffs(g.alpha_max());
    let lo = deviation_coeffs(g.alpha_min());
    let rows = form
        .keys()
        .iter()
        .map(|k| {
            let (b, c) = match k.extreme {
                Some(Extreme::Max) => (hi.b, hi.c),
                Some(Extreme::Min) => (lo.b, lo.c),
                None => (hi.b - lo.b, hi.c - lo.c),
            };
            let mut row = [T::zero(); 3];
            row[k.leg.index()] = c;
            row[k.axis.index()] = b;
            row
        })
        .collect();
    let a = DesignMatrix { form, rows };
    if a.factor().is_none() {
        return Err(Error::DegenerateGeometry(format!(
            "{form} design matrix is rank deficient for alpha_max={}, alpha_min={}",
            g.alpha_max(),
            g.alpha_min()
        )));
    }
    Ok(a)
}

/// Root mean square of `values`.
pub fn rms<T: Scalar>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sum = values.iter().fold(T::zero(), |acc, &v| acc + v * v);
    Ok((sum / T::lit(values.len() as f64)).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationResult<T> {
    pub geometry: Geometry<T>,
    pub form: DeviationForm,
    pub offsets: JointOffsets<T>,
    /// `d - A * offsets`, in deviation order.
    pub residuals: Vec<T>,
    /// `|residuals| / sqrt(dof)`.
    pub sigma_hat: T,
    pub rms_before: T,
    pub rms_predicted: T,
    pub dof: usize,
    /// Condition number of `AᵀA`.
    pub condition_number: T,
}

/// Least-squares joint offsets for the deviations `d`.
pub fn identify_offsets<T: Scalar>(
    d: &DeviationSet<T>,
    g: &Geometry<T>,
) -> Result<CalibrationResult<T>> {
    let a = build_design_matrix(g, d.form)?;
    if d.values.len() != a.rows.len() {
        return Err(Error::FormMismatch {
            expected: format!("{} values", a.rows.len()),
            found: format!("{} values", d.values.len()),
        });
    }
    let chol = a.factor().ok_or_else(|| {
        Error::DegenerateGeometry("normal matrix is not positive definite".into())
    })?;
    let x = chol.solve(a.transpose_apply(&d.values));
    let offsets = JointOffsets::new(x[0], x[1], x[2]);
    let residuals: Vec<T> = d
        .values
        .iter()
        .zip(a.apply(&offsets))
        .map(|(&di, fi)| di - fi)
        .collect();
    let dof = residuals.len() - 3;
    let ss = residuals.iter().fold(T::zero(), |acc, &r| acc + r * r);
    Ok(CalibrationResult {
        geometry: *g,
        form: d.form,
        offsets,
        sigma_hat: (ss / T::lit(dof as f64)).sqrt(),
        rms_before: rms(&d.values)?,
        rms_predicted: rms(&residuals)?,
        residuals,
        dof,
        condition_number: condition_number(&a.gram()),
    })
}

/// Deviations the model expects to remain after compensating the offsets.
pub fn predict_improvement<T: Scalar>(
    d: &DeviationSet<T>,
    r: &CalibrationResult<T>,
) -> Result<DeviationSet<T>> {
    d.expect_form(r.form)?;
    let a = build_design_matrix(&r.geometry, r.form)?;
    let values = d
        .values
        .iter()
        .zip(a.apply(&r.offsets))
        .map(|(&di, fi)| di - fi)
        .collect();
    DeviationSet::new(d.form, values)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryComparison<T> {
    pub label: String,
    pub measured: T,
    pub predicted: T,
    /// `measured - predicted`
    pub error: T,
}

/// Comparison of post-calibration measurements with the model prediction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport<T> {
    pub form: DeviationForm,
    pub entries: Vec<EntryComparison<T>>,
    pub rms_measured: T,
    pub rms_predicted: T,
    pub rms_error: T,
    pub max_abs_error: T,
}

impl<T: Scalar> ValidationReport<T> {
    /// `rms_before / rms_measured`: how many times calibration shrank the r.m.s.
    pub fn improvement_ratio(&self, rms_before: T) -> T {
        rms_before / self.rms_measured
    }

    /// `rms_measured - rms_predicted`
    pub fn rms_gap(&self) -> T {
        self.rms_measured - self.rms_predicted
    }
}

pub fn validate<T: Scalar>(
    measured: &DeviationSet<T>,
    predicted: &DeviationSet<T>,
) -> Result<ValidationReport<T>> {
    measured.expect_form(predicted.form)?;
    let entries: Vec<_> = measured
        .labels()
        .into_iter()
        .zip(measured.values.iter().zip(&predicted.values))
        .map(|(label, (&m, &p))| EntryComparison {
            label,
            measured: m,
            predicted: p,
            error: m - p,
        })
        .collect();
    let errors: Vec<T> = entries.iter().map(|e| e.error).collect();
    Ok(ValidationReport {
        form: measured.form,
        rms_measured: rms(&measured.values)?,
        rms_predicted: rms(&predicted.values)?,
        rms_error: rms(&errors)?,
        max_abs_error: errors.iter().fold(T::zero(), |acc, e| acc.max(e.abs())),
        entries,
    })
}
