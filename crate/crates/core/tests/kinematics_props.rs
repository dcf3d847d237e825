mod common;

use orthocal::kinematics::{auxiliary_roots, tcp_from_auxiliary};
use orthocal::{
    constraint_residuals, direct_kinematics, inverse_kinematics, leg_segment, Geometry,
    JointOffsets, LegId, Posture, Vec3,
};
use proptest::prelude::*;

use common::L;

fn unit_ball() -> impl Strategy<Value = Vec3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_map(|(x, y, z)| Vec3::new(x, y, z))
        .prop_filter("inside unit ball", |v| v.norm() <= 1.0)
}

fn workspace_point() -> impl Strategy<Value = Vec3<f64>> {
    unit_ball().prop_map(|v| v * (0.5 * L))
}

fn offsets() -> impl Strategy<Value = JointOffsets<f64>> {
    unit_ball().prop_map(|v| JointOffsets::from_vec3(v * (0.05 * L)))
}

fn geometry() -> impl Strategy<Value = Geometry<f64>> {
    (0.05..1.2f64, -1.0..1.0f64, 50.0..1000.0f64).prop_filter_map(
        "distinct alphas",
        |(amax, frac, l)| {
            let amin = amax * frac;
            Geometry::new(l, amax, amin)
                .ok()
                .filter(|_| (amax - amin).abs() > 1e-3)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn round_trip_through_direct_kinematics(p in workspace_point(), off in offsets()) {
        let g = Geometry::new(L, 0.5, -0.5).unwrap();
        let rho = inverse_kinematics(p, &off, &g).unwrap();
        let back = direct_kinematics(rho, &off, &g).unwrap();
        prop_assert!((back - p).norm() <= 1e-9 * L, "{back:?} vs {p:?}");
    }

    #[test]
    fn inverse_solution_satisfies_constraints(p in workspace_point(), off in offsets(), g in geometry()) {
        let l = g.leg_length();
        let p = p * (l / L);
        let off = JointOffsets::from_vec3(off.as_vec3() * (l / L));
        let rho = inverse_kinematics(p, &off, &g).unwrap();
        let res = constraint_residuals(p, rho, &off, &g);
        prop_assert!(res.max_abs() <= 1e-9 * l * l);
    }

    #[test]
    fn offsets_shift_encoder_readings_only(p in workspace_point(), off in offsets()) {
        let g = Geometry::new(L, 0.5, -0.5).unwrap();
        let nominal = inverse_kinematics(p, &JointOffsets::zero(), &g).unwrap();
        let biased = inverse_kinematics(p, &off, &g).unwrap();
        prop_assert!((nominal - biased - off.as_vec3()).max_abs() <= 1e-12 * L);
    }

    #[test]
    fn every_rod_keeps_its_length(p in workspace_point(), off in offsets()) {
        let g = Geometry::new(L, 0.5, -0.5).unwrap();
        let posture = Posture::from_tcp(p, &off, &g).unwrap();
        for leg in LegId::ALL {
            let (tcp, joint) = leg_segment(leg, &posture, &off);
            prop_assert!(((tcp - joint).norm() - L).abs() <= 1e-9 * L);
        }
    }

    #[test]
    fn both_auxiliary_roots_assemble_on_opposite_sides(p in workspace_point(), off in offsets()) {
        let g = Geometry::new(L, 0.5, -0.5).unwrap();
        let rho = inverse_kinematics(p, &off, &g).unwrap();
        let eta = rho + off.as_vec3();
        let roots = auxiliary_roots(eta, &g).unwrap();
        // Side of the plane through the three joint centres: sum p_i / eta_i vs 1.
        let side = |q: Vec3<f64>| q.x / eta.x + q.y / eta.y + q.z / eta.z - 1.0;
        for (t, base_side) in [(roots.selected, true), (roots.alternate, false)] {
            let q = tcp_from_auxiliary(eta, t);
            let res = constraint_residuals(q, rho, &off, &g);
            prop_assert!(res.max_abs() <= 1e-9 * L * L);
            prop_assert_eq!(side(q) < 0.0, base_side);
        }
    }
}

#[test]
fn f32_instantiation_round_trips() {
    let g = Geometry::<f32>::new(310.0, 0.5, -0.5).unwrap();
    let off = JointOffsets::new(0.3f32, -0.2, 0.1);
    let p = Vec3::new(40.0f32, -25.0, 60.0);
    let rho = inverse_kinematics(p, &off, &g).unwrap();
    let back = direct_kinematics(rho, &off, &g).unwrap();
    assert!((back - p).norm() < 1e-3);
}
