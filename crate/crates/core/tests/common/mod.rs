//! Generators shared by the integration suites.
#![allow(dead_code)]

use ccdegen::cc::fixtures;
use ccdegen::families::rhombus_mass;
use ccdegen::{Configuration, Masses};
use proptest::prelude::*;

/// A known central configuration with a random rigid motion and scale.
#[derive(Debug, Clone)]
pub struct CcCase {
    pub label: &'static str,
    pub q: Configuration,
    pub m: Masses,
}

fn base_case() -> impl Strategy<Value = (&'static str, Configuration, Masses)> {
    prop_oneof![
        (0.1f64..10.0, 0.1f64..10.0, 0.1f64..10.0).prop_map(|(a, b, c)| (
            "lagrange",
            fixtures::equilateral(),
            Masses::new(vec![a, b, c]).unwrap()
        )),
        Just(("square", fixtures::square(), Masses::equal(4).unwrap())),
        (0.05f64..5.0).prop_map(|m4| (
            "triangle-center",
            fixtures::triangle_center(),
            Masses::new(vec![1.0, 1.0, 1.0, m4]).unwrap()
        )),
        (0.62f64..1.65).prop_map(|a| {
            let m1 = rhombus_mass(a).unwrap();
            (
                "rhombus",
                fixtures::rhombus(a),
                Masses::new(vec![m1, 1.0, m1, 1.0]).unwrap(),
            )
        }),
    ]
}

/// Central configurations with their center of mass at the origin, so that
/// they are central under every form.
pub fn cc_case() -> impl Strategy<Value = CcCase> {
    (base_case(), 0.0f64..std::f64::consts::TAU, 0.3f64..3.0).prop_map(
        |((label, q, m), theta, t)| {
            let q = q.recentered(&m).unwrap().rotated(theta).scaled(t).unwrap();
            CcCase { label, q, m }
        },
    )
}

/// Arbitrary collision-free configurations of 3 to 8 bodies.
pub fn config_and_masses() -> impl Strategy<Value = (Configuration, Masses)> {
    (3usize..=8)
        .prop_flat_map(|n| {
            (
                prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), n),
                prop::collection::vec(0.2f64..5.0, n),
            )
        })
        .prop_filter_map("bodies too close", |(pts, ms)| {
            let coords: Vec<f64> = pts.iter().flat_map(|&(x, y)| [x, y]).collect();
            let q = Configuration::new(coords).ok()?;
            (q.min_distance() > 0.2).then(|| (q, Masses::new(ms).unwrap()))
        })
}

pub fn max_rel_diff(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1e-300)
}
