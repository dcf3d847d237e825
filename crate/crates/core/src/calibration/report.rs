//! Structured and human-readable calibration and validation reports.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::JointOffsets;
use crate::measurement::io::GeometryRecord;
use crate::measurement::{DeviationForm, DeviationSet};

use super::{CalibrationResult, ValidationReport};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const SIGMA_HAT_DEFINITION: &str = "sigma_hat = |residuals|_2 / sqrt(m - 3)";

pub const COMPENSATION_NOTE: &str =
    "identified offsets are added to the encoder readings; command rho - offset to reach a nominal joint position";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledValue {
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetsRecord {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl From<&JointOffsets<f64>> for OffsetsRecord {
    fn from(o: &JointOffsets<f64>) -> Self {
        OffsetsRecord {
            dx: o.dx,
            dy: o.dy,
            dz: o.dz,
        }
    }
}

/// File form of a [`CalibrationResult`] together with its input deviations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub schema_version: u32,
    pub units: String,
    pub geometry: GeometryRecord,
    pub form: DeviationForm,
    pub offsets_mm: OffsetsRecord,
    pub sigma_hat_mm: f64,
    pub sigma_hat_definition: String,
    pub dof: usize,
    pub rms_before_mm: f64,
    pub rms_predicted_mm: f64,
    pub condition_number: f64,
    pub deviations_mm: Vec<LabeledValue>,
    /// Model-predicted deviations after compensation.
    pub residuals_mm: Vec<LabeledValue>,
    pub compensation: String,
}

fn labeled(labels: Vec<String>, values: &[f64]) -> Vec<LabeledValue> {
    labels
        .into_iter()
        .zip(values)
        .map(|(label, &value)| LabeledValue { label, value })
        .collect()
}

impl CalibrationReport {
    pub fn new(d: &DeviationSet<f64>, r: &CalibrationResult<f64>) -> Result<Self> {
        d.expect_form(r.form)?;
        Ok(CalibrationReport {
            schema_version: REPORT_SCHEMA_VERSION,
            units: "mm".into(),
            geometry: GeometryRecord::from(&r.geometry),
            form: r.form,
            offsets_mm: OffsetsRecord::from(&r.offsets),
            sigma_hat_mm: r.sigma_hat,
            sigma_hat_definition: SIGMA_HAT_DEFINITION.into(),
            dof: r.dof,
            rms_before_mm: r.rms_before,
            rms_predicted_mm: r.rms_predicted,
            condition_number: r.condition_number,
            deviations_mm: labeled(d.labels(), &d.values),
            residuals_mm: labeled(d.labels(), &r.residuals),
            compensation: COMPENSATION_NOTE.into(),
        })
    }

    pub fn offsets(&self) -> JointOffsets<f64> {
        JointOffsets::new(self.offsets_mm.dx, self.offsets_mm.dy, self.offsets_mm.dz)
    }

    /// The predicted post-calibration deviations stored in the report.
    pub fn predicted(&self) -> Result<DeviationSet<f64>> {
        let labels: Vec<String> = self.residuals_mm.iter().map(|v| v.label.clone()).collect();
        let expected: Vec<String> = self.form.keys().iter().map(|k| k.label()).collect();
        if labels != expected {
            return Err(Error::schema(
                None,
                format!(
                    "report residual labels {labels:?} do not match {} order",
                    self.form
                ),
            ));
        }
        DeviationSet::new(
            self.form,
            self.residuals_mm.iter().map(|v| v.value).collect(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::schema(None, format!("cannot encode report: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: CalibrationReport =
            serde_json::from_str(text).map_err(|e| Error::schema(Some(e.line()), e.to_string()))?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::schema(
                None,
                format!(
                    "unsupported report schema_version {}",
                    report.schema_version
                ),
            ));
        }
        if report.units != "mm" {
            return Err(Error::Unit(report.units));
        }
        Ok(report)
    }
}

impl fmt::Display for CalibrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.geometry;
        writeln!(f, "Joint-offset calibration ({})", self.form)?;
        writeln!(
            f,
            "  geometry: L = {} mm, alpha_max = {} rad, alpha_min = {} rad",
            g.leg_length_mm, g.alpha_max_rad, g.alpha_min_rad
        )?;
        writeln!(f, "  identified offsets [mm]:")?;
        writeln!(f, "    dx = {:+.4}", self.offsets_mm.dx)?;
        writeln!(f, "    dy = {:+.4}", self.offsets_mm.dy)?;
        writeln!(f, "    dz = {:+.4}", self.offsets_mm.dz)?;
        writeln!(f, "  {:<8} {:>10} {:>10}", "entry", "measured", "predicted")?;
        for (d, r) in self.deviations_mm.iter().zip(&self.residuals_mm) {
            writeln!(f, "  {:<8} {:>+10.4} {:>+10.4}", d.label, d.value, r.value)?;
        }
        writeln!(f, "  r.m.s. before:    {:.4} mm", self.rms_before_mm)?;
        writeln!(f, "  r.m.s. predicted: {:.4} mm", self.rms_predicted_mm)?;
        writeln!(
            f,
            "  sigma_hat:        {:.4} mm ({}, dof = {})",
            self.sigma_hat_mm, self.sigma_hat_definition, self.dof
        )?;
        writeln!(f, "  cond(AtA):        {:.3}", self.condition_number)?;
        write!(f, "  note: {}", self.compensation)
    }
}

/// File form of a validation run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationDocument {
    pub schema_version: u32,
    pub units: String,
    pub form: DeviationForm,
    pub entries: Vec<super::EntryComparison<f64>>,
    pub rms_before_mm: f64,
    pub rms_measured_mm: f64,
    pub rms_predicted_mm: f64,
    pub rms_error_mm: f64,
    pub max_abs_error_mm: f64,
    /// `rms_before / rms_measured`
    pub rms_ratio: f64,
}

impl ValidationDocument {
    pub fn new(v: &ValidationReport<f64>, rms_before: f64) -> Self {
        ValidationDocument {
            schema_version: REPORT_SCHEMA_VERSION,
            units: "mm".into(),
            form: v.form,
            entries: v.entries.clone(),
            rms_before_mm: rms_before,
            rms_measured_mm: v.rms_measured,
            rms_predicted_mm: v.rms_predicted,
            rms_error_mm: v.rms_error,
            max_abs_error_mm: v.max_abs_error,
            rms_ratio: v.improvement_ratio(rms_before),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::schema(None, format!("cannot encode validation: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Validation against predicted deviations ({})",
            self.form
        );
        let _ = writeln!(
            out,
            "  {:<8} {:>10} {:>10} {:>10}",
            "entry", "measured", "predicted", "error"
        );
        for e in &self.entries {
            let _ = writeln!(
                out,
                "  {:<8} {:>+10.4} {:>+10.4} {:>+10.4}",
                e.label, e.measured, e.predicted, e.error
            );
        }
        let _ = writeln!(out, "  r.m.s. measured:  {:.2} mm", self.rms_measured_mm);
        let _ = writeln!(out, "  r.m.s. predicted: {:.2} mm", self.rms_predicted_mm);
        let _ = writeln!(out, "  r.m.s. error:     {:.2} mm", self.rms_error_mm);
        let _ = writeln!(out, "  max |error|:      {:.2} mm", self.max_abs_error_mm);
        let _ = write!(
            out,
            "  r.m.s. before/after: {:.2} / {:.2} = {:.2}",
            self.rms_before_mm, self.rms_measured_mm, self.rms_ratio
        );
        out
    }
}
