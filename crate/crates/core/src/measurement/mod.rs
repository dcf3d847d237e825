//! Gauge readings, calibration sessions and the deviations derived from them.
//!
//! A session holds absolute comparator readings taken at the zero posture and
//! at the max/min postures of each leg. Deviations are differences of
//! repeat-averaged readings, ordered to match the rows of the design matrix:
//!
//! ```text
//! full12:   dx_y+ dy_x+ dx_y- dy_x- dy_z+ dz_y+ dy_z- dz_y- dx_z+ dz_x+ dx_z- dz_x-
//! reduced6: dx_y  dy_x  dy_z  dz_y  dx_z  dz_x
//! ```
//!
//! `dA_B` is the change of leg `B` along base axis `A`.

mod deviations;
pub mod io;
mod simulate;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{Geometry, LegId};
use crate::scalar::Scalar;
use crate::sensitivity::{Extreme, PostureTag};

pub use deviations::{session_to_deviations, DeviationForm, DeviationKey, DeviationSet};
pub use simulate::{gauge_station, leg_line_reading, nonlinear_leg_deviation, simulate_session};

/// Posture of a reading relative to the leg being observed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostureKind {
    Zero,
    Max,
    Min,
}

impl PostureKind {
    pub const ALL: [PostureKind; 3] = [PostureKind::Zero, PostureKind::Max, PostureKind::Min];

    pub fn as_str(self) -> &'static str {
        match self {
            PostureKind::Zero => "zero",
            PostureKind::Max => "max",
            PostureKind::Min => "min",
        }
    }

    pub fn tag(self, leg: LegId) -> PostureTag {
        match self {
            PostureKind::Zero => PostureTag::Zero,
            PostureKind::Max => PostureTag::Max(leg),
            PostureKind::Min => PostureTag::Min(leg),
        }
    }
}

impl From<Extreme> for PostureKind {
    fn from(e: Extreme) -> Self {
        match e {
            Extreme::Max => PostureKind::Max,
            Extreme::Min => PostureKind::Min,
        }
    }
}

impl fmt::Display for PostureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PostureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" => Ok(PostureKind::Zero),
            "max" => Ok(PostureKind::Max),
            "min" => Ok(PostureKind::Min),
            other => Err(Error::InvalidArgument(format!("unknown posture {other:?}"))),
        }
    }
}

/// One comparator reading, in millimetres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugeReading<T> {
    pub leg: LegId,
    /// Base axis along which the gauge measures; never the leg's own axis.
    pub axis: LegId,
    pub posture: PostureKind,
    /// 1-based repeat ordinal.
    pub repeat: u32,
    pub value: T,
}

impl<T: Scalar> GaugeReading<T> {
    pub fn new(
        leg: LegId,
        axis: LegId,
        posture: PostureKind,
        repeat: u32,
        value: T,
    ) -> Result<Self> {
        if axis == leg {
            return Err(Error::InvalidArgument(format!(
                "gauge axis must be transverse to the {leg} leg"
            )));
        }
        if !value.is_finite() {
            return Err(Error::InvalidArgument("reading is not finite".into()));
        }
        Ok(GaugeReading {
            leg,
            axis,
            posture,
            repeat,
            value,
        })
    }

    pub fn tag(&self) -> PostureTag {
        self.posture.tag(self.leg)
    }
}

/// Additive Gaussian gauge noise followed by quantisation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel<T> {
    pub sigma: T,
    /// Gauge resolution; zero disables quantisation.
    pub resolution: T,
    pub seed: u64,
}

impl<T: Scalar> NoiseModel<T> {
    /// Dial-gauge defaults: sigma 0.01 mm, resolution 0.01 mm.
    pub fn gauge_default(seed: u64) -> Self {
        NoiseModel {
            sigma: T::lit(0.01),
            resolution: T::lit(0.01),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "noise sigma {} is invalid",
                self.sigma
            )));
        }
        if !(self.resolution.is_finite() && self.resolution >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "gauge resolution {} is invalid",
                self.resolution
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Simulated,
    #[default]
    Ingested,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Simulated => "simulated",
            Provenance::Ingested => "ingested",
        })
    }
}

/// Mounting orientation of each gauge; a reading is multiplied by its sign
/// to express it along the positive base axis. Unlisted gauges are `+1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GaugeSigns {
    signs: BTreeMap<(LegId, LegId), i8>,
}

impl GaugeSigns {
    pub fn set(&mut self, leg: LegId, axis: LegId, sign: i8) -> Result<()> {
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidArgument(format!(
                "gauge sign must be +1 or -1, got {sign}"
            )));
        }
        if leg == axis {
            return Err(Error::InvalidArgument(format!(
                "gauge axis must be transverse to the {leg} leg"
            )));
        }
        if sign == 1 {
            self.signs.remove(&(leg, axis));
        } else {
            self.signs.insert((leg, axis), sign);
        }
        Ok(())
    }

    pub fn get(&self, leg: LegId, axis: LegId) -> i8 {
        self.signs.get(&(leg, axis)).copied().unwrap_or(1)
    }

    /// Gauges with a non-default sign.
    pub fn flipped(&self) -> impl Iterator<Item = (LegId, LegId)> + '_ {
        self.signs.keys().copied()
    }
}

/// Complete input of one calibration run.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSession<T> {
    pub geometry: Geometry<T>,
    pub readings: Vec<GaugeReading<T>>,
    pub noise_model: Option<NoiseModel<T>>,
    pub provenance: Provenance,
    pub gauge_signs: GaugeSigns,
}

impl<T: Scalar> MeasurementSession<T> {
    pub fn new(geometry: Geometry<T>, readings: Vec<GaugeReading<T>>) -> Self {
        MeasurementSession {
            geometry,
            readings,
            noise_model: None,
            provenance: Provenance::Ingested,
            gauge_signs: GaugeSigns::default(),
        }
    }

    /// Session whose single-repeat readings reproduce the given max-minus-min
    /// deviations (zero and min readings are 0, max readings carry the value).
    ///
    /// Columns follow the experiment-table layout
    /// `dx_y, dx_z, dy_x, dy_z, dz_x, dz_y`.
    pub fn from_table_row(geometry: Geometry<T>, columns: [T; 6]) -> Result<Self> {
        let mut readings = Vec::with_capacity(18);
        for (key, value) in DeviationKey::TABLE_COLUMNS.iter().zip(columns) {
            for posture in PostureKind::ALL {
                let v = if posture == PostureKind::Max {
                    value
                } else {
                    T::zero()
                };
                readings.push(GaugeReading::new(key.leg, key.axis, posture, 1, v)?);
            }
        }
        Ok(MeasurementSession::new(geometry, readings))
    }
}
