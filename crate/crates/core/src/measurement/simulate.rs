use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::kinematics::{joint_center, Geometry, JointOffsets, LegId, Posture};
use crate::scalar::Scalar;
use crate::sensitivity::{nominal_posture, Extreme, PostureTag};

use super::{GaugeReading, GaugeSigns, MeasurementSession, NoiseModel, PostureKind, Provenance};

/// Posture actually reached when the controller commands the nominal
/// encoder values of `tag` on a machine with offsets `off`.
fn reached_posture<T: Scalar>(
    tag: PostureTag,
    off: &JointOffsets<T>,
    g: &Geometry<T>,
) -> Result<Posture<T>> {
    let commanded = nominal_posture(tag, g).rho;
    Posture::from_joints(commanded, off, g)
}

/// Axial coordinate of the gauge for `leg`: the midpoint of the rod at the
/// zero posture, offsets included. The gauge stays there for all postures.
pub fn gauge_station<T: Scalar>(leg: LegId, off: &JointOffsets<T>, g: &Geometry<T>) -> Result<T> {
    let zero = reached_posture(PostureTag::Zero, off, g)?;
    let joint = joint_center(leg, &zero, off);
    Ok((zero.p[leg] + joint[leg]) * T::lit(0.5))
}

/// Transverse coordinates of the rod centreline of `leg`, extended to a
/// line, where it crosses the plane `leg-axis = station`.
pub fn leg_line_reading<T: Scalar>(
    leg: LegId,
    posture: &Posture<T>,
    off: &JointOffsets<T>,
    station: T,
) -> Result<[T; 2]> {
    let joint = joint_center(leg, posture, off);
    let span = posture.p[leg] - joint[leg];
    if span == T::zero() {
        return Err(Error::SingularPosture(leg));
    }
    let s = (station - joint[leg]) / span;
    let point = joint + (posture.p - joint) * s;
    Ok(leg.others().map(|axis| point[axis]))
}

fn leg_readings<T: Scalar>(
    leg: LegId,
    off: &JointOffsets<T>,
    g: &Geometry<T>,
) -> Result<[[T; 2]; 3]> {
    let station = gauge_station(leg, off, g)?;
    let mut out = [[T::zero(); 2]; 3];
    for (slot, kind) in out.iter_mut().zip(PostureKind::ALL) {
        let posture = reached_posture(kind.tag(leg), off, g)?;
        *slot = leg_line_reading(leg, &posture, off, station)?;
    }
    Ok(out)
}

/// Exact change of the gauge readings of `leg` between the zero posture and
/// its `extreme` posture, along the two transverse axes.
pub fn nonlinear_leg_deviation<T: Scalar>(
    leg: LegId,
    extreme: Extreme,
    off: &JointOffsets<T>,
    g: &Geometry<T>,
) -> Result<[T; 2]> {
    let station = gauge_station(leg, off, g)?;
    let zero = reached_posture(PostureTag::Zero, off, g)?;
    let ext = reached_posture(PostureTag::extreme(leg, extreme), off, g)?;
    let a = leg_line_reading(leg, &zero, off, station)?;
    let b = leg_line_reading(leg, &ext, off, station)?;
    Ok([b[0] - a[0], b[1] - a[1]])
}

fn quantize<T: Scalar>(v: T, resolution: T) -> T {
    if resolution > T::zero() {
        (v / resolution).round() * resolution
    } else {
        v
    }
}

/// Simulates a complete measurement session on a machine with `true_off`.
///
/// For every leg and repeat the machine visits zero, max and min in that
/// order and both transverse gauges are read at each stop. Noise draws follow
/// that order, so a seed fixes the whole session.
pub fn simulate_session<T: Scalar>(
    g: &Geometry<T>,
    true_off: &JointOffsets<T>,
    repeats: u32,
    noise: Option<NoiseModel<T>>,
) -> Result<MeasurementSession<T>> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    true_off.validate_for(g)?;
    let mut sampler = match &noise {
        Some(n) => {
            n.validate()?;
            let normal = Normal::new(0.0, n.sigma.as_f64())
                .map_err(|e| Error::InvalidArgument(format!("noise model: {e}")))?;
            Some((ChaCha8Rng::seed_from_u64(n.seed), normal))
        }
        None => None,
    };

    let mut readings = Vec::with_capacity(18 * repeats as usize);
    for leg in LegId::ALL {
        let exact = leg_readings(leg, true_off, g)?;
        for repeat in 1..=repeats {
            for (kind, values) in PostureKind::ALL.iter().zip(exact) {
                for (axis, clean) in leg.others().into_iter().zip(values) {
                    let value = match (&mut sampler, &noise) {
                        (Some((rng, normal)), Some(n)) => {
                            let noisy = clean + T::lit(normal.sample(rng));
                            quantize(noisy, n.resolution)
                        }
                        _ => clean,
                    };
                    readings.push(GaugeReading::new(leg, axis, *kind, repeat, value)?);
                }
            }
        }
    }

    Ok(MeasurementSession {
        geometry: *g,
        readings,
        noise_model: noise,
        provenance: Provenance::Simulated,
        gauge_signs: GaugeSigns::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{session_to_deviations, DeviationForm};
    use crate::sensitivity::predicted_leg_deviation;

    const L: f64 = 310.0;

    fn geometry() -> Geometry<f64> {
        Geometry::new(L, 0.5, -0.5).unwrap()
    }

    #[test]
    fn perfect_mechanism_reads_perfect_parallelism() {
        let s = simulate_session(&geometry(), &JointOffsets::zero(), 2, None).unwrap();
        assert_eq!(s.readings.len(), 36);
        for form in [DeviationForm::Full12, DeviationForm::Reduced6] {
            let d = session_to_deviations(&s, form).unwrap();
            assert!(d.values.iter().all(|v| v.abs() < 1e-12), "{d:?}");
        }
    }

    #[test]
    fn station_is_offset_midpoint() {
        let g = geometry();
        let off = JointOffsets::new(0.2, -0.1, 0.05);
        let st = gauge_station(LegId::X, &off, &g).unwrap();
        assert!((st - (L / 2.0 + off.dx)).abs() < 1e-4);
        let st = gauge_station(LegId::Z, &off, &g).unwrap();
        assert!((st - (L / 2.0 + off.dz)).abs() < 1e-4);
    }

    #[test]
    fn single_x_offset_matches_linear_model_to_first_order() {
        let g = geometry();
        let d = 0.05;
        let off = JointOffsets::new(d, 0.0, 0.0);
        let exact = nonlinear_leg_deviation(LegId::X, Extreme::Max, &off, &g).unwrap();
        let a: f64 = 0.5;
        let lin = (0.5 + a.sin()) * a.tan() * d;
        assert!((exact[0] - lin).abs() < 10.0 * d * d / L);
        assert!((exact[1] - lin).abs() < 10.0 * d * d / L);
        assert_eq!(
            predicted_leg_deviation(LegId::X, Extreme::Max, &off, &g),
            [lin, lin]
        );
    }

    #[test]
    fn noiseless_session_equals_direct_nonlinear_deviations() {
        let g = geometry();
        let off = JointOffsets::new(0.3, -0.15, 0.22);
        let s = simulate_session(&g, &off, 1, None).unwrap();
        let d = session_to_deviations(&s, DeviationForm::Full12).unwrap();
        for (k, v) in d.keys().iter().zip(&d.values) {
            let dev = nonlinear_leg_deviation(k.leg, k.extreme.unwrap(), &off, &g).unwrap();
            let pos = k.leg.others().iter().position(|a| *a == k.axis).unwrap();
            assert!((dev[pos] - v).abs() < 1e-12);
        }
    }

    #[test]
    fn readings_are_quantized() {
        let g = geometry();
        let noise = NoiseModel::gauge_default(11);
        let s = simulate_session(&g, &JointOffsets::new(0.4, 0.1, -0.3), 3, Some(noise)).unwrap();
        assert_eq!(s.readings.len(), 54);
        for r in &s.readings {
            let q = r.value / 0.01;
            assert!((q - q.round()).abs() < 1e-6, "{}", r.value);
        }
    }

    #[test]
    fn seed_fixes_the_session() {
        let g = geometry();
        let off = JointOffsets::new(0.4, 0.1, -0.3);
        let a = simulate_session(&g, &off, 3, Some(NoiseModel::gauge_default(5))).unwrap();
        let b = simulate_session(&g, &off, 3, Some(NoiseModel::gauge_default(5))).unwrap();
        let c = simulate_session(&g, &off, 3, Some(NoiseModel::gauge_default(6))).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.readings, c.readings);
    }

    #[test]
    fn rejects_bad_requests() {
        let g = geometry();
        assert!(simulate_session(&g, &JointOffsets::zero(), 0, None).is_err());
        assert!(simulate_session(&g, &JointOffsets::new(L, 0.0, 0.0), 1, None).is_err());
        let bad = NoiseModel {
            sigma: -1.0,
            resolution: 0.01,
            seed: 1,
        };
        assert!(simulate_session(&g, &JointOffsets::zero(), 1, Some(bad)).is_err());
    }
}
