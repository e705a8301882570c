use ccdegen::certifier::{rhombus_det_j2, rhombus_det_j2_interval};
use ccdegen::interval::{iv_add, iv_div, iv_mul, iv_powi, iv_sqrt, iv_sub};
use ccdegen::{Interval, IntervalPoly};
use num::{BigRational, FromPrimitive};
use proptest::prelude::*;

fn interval() -> impl Strategy<Value = Interval> {
    (-50.0f64..50.0, 0.0f64..10.0).prop_map(|(lo, w)| Interval::new(lo, lo + w))
}

fn sample(x: Interval, t: f64) -> f64 {
    (x.lo() + t * (x.hi() - x.lo())).clamp(x.lo(), x.hi())
}

fn rat(x: f64) -> BigRational {
    BigRational::from_f64(x).unwrap()
}

fn rational_inside(v: &BigRational, x: Interval) -> bool {
    rat(x.lo()) <= *v && *v <= rat(x.hi())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn arithmetic_encloses_samples(x in interval(), y in interval(), ts in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 5)) {
        let (s, d, p) = (iv_add(x, y), iv_sub(x, y), iv_mul(x, y));
        let q = iv_div(x, y);
        let sq = iv_sqrt(Interval::new(x.lo().abs(), x.lo().abs() + x.width()));
        for (tx, ty) in ts {
            let (a, b) = (sample(x, tx), sample(y, ty));
            prop_assert!(s.contains(a + b));
            prop_assert!(d.contains(a - b));
            prop_assert!(p.contains(a * b));
            for n in 0..6 {
                prop_assert!(iv_powi(x, n).contains(a.powi(n as i32)));
            }
            if let Ok(q) = q {
                prop_assert!(q.contains(a / b));
            }
            let r = x.lo().abs() + tx * x.width();
            prop_assert!(sq.as_ref().unwrap().contains(r.sqrt()));
        }
    }

    #[test]
    fn division_by_zero_straddle_is_error(x in interval(), w in 0.0f64..5.0) {
        prop_assert!(iv_div(x, Interval::new(-w, w + 1e-3)).is_err());
    }

    #[test]
    fn outward_rounding_encloses_exact(a in -1e6f64..1e6, b in -1e6f64..1e6) {
        let (x, y) = (Interval::point(a), Interval::point(b));
        prop_assert!(rational_inside(&(rat(a) + rat(b)), x + y));
        prop_assert!(rational_inside(&(rat(a) - rat(b)), x - y));
        prop_assert!(rational_inside(&(rat(a) * rat(b)), x * y));
        if b != 0.0 {
            prop_assert!(rational_inside(&(rat(a) / rat(b)), x.div(y).unwrap()));
        }
        if a > 0.0 {
            let r = x.sqrt().unwrap();
            prop_assert!(rat(r.lo()) * rat(r.lo()) <= rat(a) && rat(a) <= rat(r.hi()) * rat(r.hi()));
        }
    }

    #[test]
    fn enclosure_is_monotone(x in interval(), y in interval(), t in 0.0f64..=1.0) {
        // shrinking the inputs never widens the result
        let (x1, _) = x.bisect();
        let y1 = Interval::new(sample(y, t * 0.5), sample(y, 0.5 + t * 0.5));
        prop_assert!(iv_mul(x, y).encloses(iv_mul(x1, y1)));
        prop_assert!(iv_add(x, y).encloses(iv_add(x1, y1)));
        prop_assert!(iv_sub(x, y).encloses(iv_sub(x1, y1)));
    }

    #[test]
    fn polynomial_horner_encloses(cs in prop::collection::vec(-5.0f64..5.0, 1..9), x in interval(), t in 0.0f64..=1.0) {
        let p = IntervalPoly::new(cs.iter().map(|&c| Interval::point(c)).collect());
        let v = sample(x, t);
        let exact = cs.iter().rev().fold(0.0, |acc, c| acc * v + c);
        let e = p.eval(x);
        prop_assert!(e.lo() <= exact + 1e-9 * exact.abs().max(1.0) && exact - 1e-9 * exact.abs().max(1.0) <= e.hi());
    }

    #[test]
    fn rhombus_det_enclosure_contains_samples(a in 0.6f64..1.72, w in 1e-5f64..5e-3, t in 0.0f64..=1.0) {
        let b = Interval::new(a, a + w);
        let e = rhombus_det_j2_interval(b).unwrap();
        let v = rhombus_det_j2(sample(b, t)).unwrap();
        prop_assert!(e.lo() <= v && v <= e.hi(), "{v} not in {e}");
    }
}

#[test]
fn thousand_samples_inside_rhombus_box() {
    let b = Interval::new(0.9, 1.1);
    let e = rhombus_det_j2_interval(b).unwrap();
    for k in 0..=1000 {
        let v = rhombus_det_j2(sample(b, k as f64 / 1000.0)).unwrap();
        assert!(e.contains(v), "{v} not in {e}");
    }
}

#[test]
fn point_intervals_stay_tight() {
    for x in [0.1, 1.0 / 3.0, 2.0, 1e10] {
        let p = Interval::point(x);
        assert_eq!((p.lo(), p.hi()), (x, x));
        let s = p + Interval::point(0.0);
        assert!(s.lo() <= x && x <= s.hi());
        assert!(s.width() <= 2.0 * f64::EPSILON * x);
    }
}
