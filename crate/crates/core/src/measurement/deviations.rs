use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::LegId;
use crate::scalar::Scalar;
use crate::sensitivity::Extreme;

use super::{MeasurementSession, PostureKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviationForm {
    /// Max-minus-zero and min-minus-zero differences, twelve equations.
    Full12,
    /// Max-minus-min differences, six equations.
    Reduced6,
}

impl DeviationForm {
    pub fn len(self) -> usize {
        self.keys().len()
    }

    pub fn keys(self) -> &'static [DeviationKey] {
        match self {
            DeviationForm::Full12 => &DeviationKey::FULL12,
            DeviationForm::Reduced6 => &DeviationKey::REDUCED6,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DeviationForm::Full12 => "full12",
            DeviationForm::Reduced6 => "reduced6",
        }
    }
}

impl fmt::Display for DeviationForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DeviationForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full12" => Ok(DeviationForm::Full12),
            "reduced6" => Ok(DeviationForm::Reduced6),
            other => Err(Error::InvalidArgument(format!(
                "unknown deviation form {other:?} (expected full12 or reduced6)"
            ))),
        }
    }
}

/// Identifies one deviation: the leg, the measured axis, and for the full
/// form which extreme posture is compared against zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DeviationKey {
    pub leg: LegId,
    pub axis: LegId,
    pub extreme: Option<Extreme>,
}

const fn key(leg: LegId, axis: LegId, extreme: Option<Extreme>) -> DeviationKey {
    DeviationKey { leg, axis, extreme }
}

impl DeviationKey {
    pub const FULL12: [DeviationKey; 12] = [
        key(LegId::Y, LegId::X, Some(Extreme::Max)),
        key(LegId::X, LegId::Y, Some(Extreme::Max)),
        key(LegId::Y, LegId::X, Some(Extreme::Min)),
        key(LegId::X, LegId::Y, Some(Extreme::Min)),
        key(LegId::Z, LegId::Y, Some(Extreme::Max)),
        key(LegId::Y, LegId::Z, Some(Extreme::Max)),
        key(LegId::Z, LegId::Y, Some(Extreme::Min)),
        key(LegId::Y, LegId::Z, Some(Extreme::Min)),
        key(LegId::Z, LegId::X, Some(Extreme::Max)),
        key(LegId::X, LegId::Z, Some(Extreme::Max)),
        key(LegId::Z, LegId::X, Some(Extreme::Min)),
        key(LegId::X, LegId::Z, Some(Extreme::Min)),
    ];

    pub const REDUCED6: [DeviationKey; 6] = [
        key(LegId::Y, LegId::X, None),
        key(LegId::X, LegId::Y, None),
        key(LegId::Z, LegId::Y, None),
        key(LegId::Y, LegId::Z, None),
        key(LegId::Z, LegId::X, None),
        key(LegId::X, LegId::Z, None),
    ];

    /// Column layout of the published experiment table:
    /// `dx_y, dx_z, dy_x, dy_z, dz_x, dz_y`.
    pub const TABLE_COLUMNS: [DeviationKey; 6] = [
        key(LegId::Y, LegId::X, None),
        key(LegId::Z, LegId::X, None),
        key(LegId::X, LegId::Y, None),
        key(LegId::Z, LegId::Y, None),
        key(LegId::X, LegId::Z, None),
        key(LegId::Y, LegId::Z, None),
    ];

    /// Label such as `dy_x+` (full form) or `dy_x` (reduced form).
    pub fn label(&self) -> String {
        let suffix = match self.extreme {
            Some(Extreme::Max) => "+",
            Some(Extreme::Min) => "-",
            None => "",
        };
        format!("d{}_{}{}", self.axis, self.leg, suffix)
    }
}

/// Deviation vector in design-matrix row order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationSet<T> {
    pub form: DeviationForm,
    pub values: Vec<T>,
}

impl<T: Scalar> DeviationSet<T> {
    pub fn new(form: DeviationForm, values: Vec<T>) -> Result<Self> {
        if values.len() != form.len() {
            return Err(Error::InvalidArgument(format!(
                "{form} deviation set needs {} values, got {}",
                form.len(),
                values.len()
            )));
        }
        Ok(DeviationSet { form, values })
    }

    /// Reduced set from experiment-table columns `dx_y, dx_z, dy_x, dy_z, dz_x, dz_y`.
    pub fn from_table_columns(columns: [T; 6]) -> Self {
        let mut values = vec![T::zero(); 6];
        for (key, v) in DeviationKey::TABLE_COLUMNS.iter().zip(columns) {
            let pos = DeviationKey::REDUCED6
                .iter()
                .position(|k| k == key)
                .expect("table column maps onto a reduced row");
            values[pos] = v;
        }
        DeviationSet {
            form: DeviationForm::Reduced6,
            values,
        }
    }

    /// Inverse of [`DeviationSet::from_table_columns`]; reduced form only.
    pub fn to_table_columns(&self) -> Result<[T; 6]> {
        self.expect_form(DeviationForm::Reduced6)?;
        Ok(DeviationKey::TABLE_COLUMNS.map(|key| {
            let pos = DeviationKey::REDUCED6
                .iter()
                .position(|k| *k == key)
                .expect("table column maps onto a reduced row");
            self.values[pos]
        }))
    }

    /// Max-minus-min reduction of a full set.
    pub fn reduce(&self) -> Result<Self> {
        self.expect_form(DeviationForm::Full12)?;
        let values = self
            .values
            .chunks_exact(4)
            .flat_map(|c| [c[0] - c[2], c[1] - c[3]])
            .collect();
        Ok(DeviationSet {
            form: DeviationForm::Reduced6,
            values,
        })
    }

    pub fn keys(&self) -> &'static [DeviationKey] {
        self.form.keys()
    }

    pub fn labels(&self) -> Vec<String> {
        self.keys().iter().map(DeviationKey::label).collect()
    }

    pub(crate) fn expect_form(&self, form: DeviationForm) -> Result<()> {
        if self.form != form {
            return Err(Error::FormMismatch {
                expected: form.to_string(),
                found: self.form.to_string(),
            });
        }
        Ok(())
    }
}

/// Averages repeats and forms the deviation vector of a session.
pub fn session_to_deviations<T: Scalar>(
    s: &MeasurementSession<T>,
    form: DeviationForm,
) -> Result<DeviationSet<T>> {
    let mut groups: BTreeMap<(LegId, LegId, PostureKind), Vec<T>> = BTreeMap::new();
    for r in &s.readings {
        groups
            .entry((r.leg, r.axis, r.posture))
            .or_default()
            .push(r.value);
    }

    let mut problems = Vec::new();
    let mut averages = BTreeMap::new();
    for leg in LegId::ALL {
        for axis in leg.others() {
            let counts = PostureKind::ALL.map(|k| groups.get(&(leg, axis, k)).map_or(0, Vec::len));
            for (kind, n) in PostureKind::ALL.iter().zip(counts) {
                if n == 0 {
                    problems.push(format!("{leg}/{axis}/{kind}"));
                }
            }
            if counts.iter().all(|&n| n > 0) && counts.iter().any(|&n| n != counts[0]) {
                problems.push(format!(
                    "{leg}/{axis} repeats zero={} max={} min={}",
                    counts[0], counts[1], counts[2]
                ));
            }
            let sign = T::lit(s.gauge_signs.get(leg, axis) as f64);
            for kind in PostureKind::ALL {
                if let Some(vals) = groups.get(&(leg, axis, kind)) {
                    let sum = vals.iter().fold(T::zero(), |acc, &v| acc + v);
                    let n = T::lit(vals.len() as f64);
                    averages.insert((leg, axis, kind), sign * sum / n);
                }
            }
        }
    }
    if !problems.is_empty() {
        return Err(Error::IncompleteSession { missing: problems });
    }

    let avg = |leg, axis, kind| averages[&(leg, axis, kind)];
    let values = form
        .keys()
        .iter()
        .map(|k| match k.extreme {
            Some(e) => avg(k.leg, k.axis, e.into()) - avg(k.leg, k.axis, PostureKind::Zero),
            None => avg(k.leg, k.axis, PostureKind::Max) - avg(k.leg, k.axis, PostureKind::Min),
        })
        .collect();
    Ok(DeviationSet { form, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::Geometry;
    use crate::measurement::GaugeReading;

    fn geometry() -> Geometry<f64> {
        Geometry::new(310.0, 0.5, -0.5).unwrap()
    }

    #[test]
    fn labels_follow_row_order() {
        let labels: Vec<_> = DeviationKey::FULL12
            .iter()
            .map(DeviationKey::label)
            .collect();
        assert_eq!(
            labels,
            [
                "dx_y+", "dy_x+", "dx_y-", "dy_x-", "dy_z+", "dz_y+", "dy_z-", "dz_y-", "dx_z+",
                "dz_x+", "dx_z-", "dz_x-"
            ]
        );
        let labels: Vec<_> = DeviationKey::REDUCED6
            .iter()
            .map(DeviationKey::label)
            .collect();
        assert_eq!(labels, ["dx_y", "dy_x", "dy_z", "dz_y", "dx_z", "dz_x"]);
    }

    #[test]
    fn table_columns_remap_to_row_order() {
        let d = DeviationSet::from_table_columns([-0.43, -0.37, 0.42, -0.18, -1.14, -0.70]);
        assert_eq!(d.values, vec![-0.43, 0.42, -0.18, -0.70, -0.37, -1.14]);
        assert_eq!(
            d.to_table_columns().unwrap(),
            [-0.43, -0.37, 0.42, -0.18, -1.14, -0.70]
        );
    }

    #[test]
    fn reduce_subtracts_min_from_max() {
        let full = DeviationSet::new(
            DeviationForm::Full12,
            (1..=12).map(|v| (v * v) as f64).collect(),
        )
        .unwrap();
        let red = full.reduce().unwrap();
        assert_eq!(
            red.values,
            vec![
                1.0 - 9.0,
                4.0 - 16.0,
                25.0 - 49.0,
                36.0 - 64.0,
                81.0 - 121.0,
                100.0 - 144.0
            ]
        );
        assert!(matches!(red.reduce(), Err(Error::FormMismatch { .. })));
    }

    #[test]
    fn averages_repeats_and_applies_signs() {
        let mut readings = Vec::new();
        for leg in LegId::ALL {
            for axis in leg.others() {
                for (rep, (z, mx, mn)) in [(0.0, 0.10, -0.02), (0.02, 0.14, 0.0)].iter().enumerate()
                {
                    let rep = rep as u32 + 1;
                    readings
                        .push(GaugeReading::new(leg, axis, PostureKind::Zero, rep, *z).unwrap());
                    readings
                        .push(GaugeReading::new(leg, axis, PostureKind::Max, rep, *mx).unwrap());
                    readings
                        .push(GaugeReading::new(leg, axis, PostureKind::Min, rep, *mn).unwrap());
                }
            }
        }
        let mut s = MeasurementSession::new(geometry(), readings);
        s.gauge_signs.set(LegId::X, LegId::Y, -1).unwrap();
        let full = session_to_deviations(&s, DeviationForm::Full12).unwrap();
        // max avg 0.12, min avg -0.01, zero avg 0.01
        assert!((full.values[0] - 0.11).abs() < 1e-15);
        assert!((full.values[2] + 0.02).abs() < 1e-15);
        assert!((full.values[1] + 0.11).abs() < 1e-15);
        let red = session_to_deviations(&s, DeviationForm::Reduced6).unwrap();
        assert_eq!(red, full.reduce().unwrap());
    }

    #[test]
    fn incomplete_session_lists_missing_triples() {
        let s =
            MeasurementSession::from_table_row(geometry(), [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let mut trimmed = s.clone();
        trimmed
            .readings
            .retain(|r| !(r.leg == LegId::Z && r.posture == PostureKind::Min));
        match session_to_deviations(&trimmed, DeviationForm::Reduced6) {
            Err(Error::IncompleteSession { missing }) => {
                assert_eq!(missing, vec!["z/x/min".to_string(), "z/y/min".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut unbalanced = s.clone();
        unbalanced
            .readings
            .push(GaugeReading::new(LegId::X, LegId::Y, PostureKind::Max, 2, 0.3).unwrap());
        match session_to_deviations(&unbalanced, DeviationForm::Full12) {
            Err(Error::IncompleteSession { missing }) => {
                assert_eq!(missing, vec!["x/y repeats zero=1 max=2 min=1".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn table_row_session_reproduces_columns() {
        let cols = [-0.43, -0.37, 0.42, -0.18, -1.14, -0.70];
        let s = MeasurementSession::from_table_row(geometry(), cols).unwrap();
        assert_eq!(s.readings.len(), 18);
        let d = session_to_deviations(&s, DeviationForm::Reduced6).unwrap();
        assert_eq!(d, DeviationSet::from_table_columns(cols));
    }
}
