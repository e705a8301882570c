//! Interval-certified positivity of `det J2` along the rhombus family.
//!
//! For the rhombus `[0, a, -1, 0, 0, -a, 1, 0]` with masses `[m1, 1, m1, 1]`,
//! Form III and the per-unit-mass normalization, conjugating by the basis with
//! the leading four rows as pivots gives
//!
//! ```text
//! J2(a, m1) = B(a) + m1 C(a) + lambda(a, m1) Id,
//! lambda = (m1^2 / (2a) + 4 m1 / s + 1/2) / (2 (a^2 m1 + 1)),   s = sqrt(a^2 + 1).
//! ```
//!
//! The proof has two regimes. Away from the pole of `m1(a)` at `sqrt(3)/3`,
//! adaptive bisection encloses `det J2` with `m1` replaced by its interval
//! enclosure. Next to the pole, `m1` is treated as a free parameter: every
//! entry of `(a^2 m1 + 1) J2` is a quadratic in `m1`, so
//! `G = (a^2 m1 + 1)^4 det J2` is a degree-8 polynomial in `m1` whose interval
//! coefficients are positive except the linear one, and a grouping argument
//! shows `G > 0` for `m1` beyond a threshold that `m1(a)` provably exceeds.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::interval::{Arith, Interval, IntervalError, IntervalPoly, Ring};
use crate::parallel_enabled;

pub const DEFAULT_MAX_DEPTH: u32 = 42;
pub const DEFAULT_MASS_THRESHOLD: f64 = 2072.0;
/// Width of the regime-B interval to the right of `sqrt(3)/3`.
pub const REGIME_B_WIDTH: f64 = 1e-4;
/// Distance from `sqrt(3)` at which regime A stops.
pub const RIGHT_MARGIN: f64 = 1e-3;

type Mat4<T> = [[T; 4]; 4];

/// `B(a)`, `C(a)` and `s = sqrt(a^2 + 1)`.
pub fn rhombus_terms<T: Arith>(a: T) -> std::result::Result<(Mat4<T>, Mat4<T>, T), IntervalError> {
    let k = T::constant;
    let zero = k(0.0);
    let a2 = a.pow_n(2);
    let a3 = a.pow_n(3);
    let a5 = a.pow_n(5);
    let a7 = a.pow_n(7);
    let r = a2 + k(1.0);
    let s = r.try_sqrt()?;
    let s5 = r.pow_n(2) * s;
    let s7 = r.pow_n(3) * s;

    let b00 = (k(2.0) * (k(2.0) - a2)).try_div(s5)?;
    let b11 = (k(2.0) * (k(2.0) * a2 - k(1.0))).try_div(s5)?;
    let b02 = (a2 * (s5 + k(4.0) * a2 - k(20.0))).try_div(k(2.0) * s7)?;
    let b03 = (a * (s5 + k(16.0) * a2 - k(32.0))).try_div(k(4.0) * s7)?;
    let b12 = (a * (s5 + k(4.0) * a2 - k(20.0))).try_div(k(2.0) * s7)?;
    let b13 = -(a2 * (s5 + k(16.0) * a2 - k(32.0))).try_div(k(4.0) * s7)?;
    let b22 = (a2 * s5 - k(16.0) * a2 + k(8.0)).try_div(k(2.0) * s7)?;
    let b33 = (-(a2 * s5) + k(40.0) * a2 - k(8.0)).try_div(k(4.0) * s7)?;

    let p20 = s5 - k(20.0) * a5 + k(4.0) * a3;
    let p32 = s5 - k(32.0) * a5 + k(16.0) * a3;
    let c00 = (-(k(8.0) * a7) + k(40.0) * a5 - s5).try_div(k(4.0) * a3 * s7)?;
    let c01 = p20.try_div(k(2.0) * a2 * s7)?;
    let c10 = p32.try_div(k(4.0) * a2 * s7)?;
    let c11 = (k(8.0) * a7 - k(16.0) * a5 + s5).try_div(k(2.0) * a3 * s7)?;
    let c20 = -p32.try_div(k(4.0) * a3 * s7)?;
    let c22 = b00;
    let c31 = p20.try_div(k(2.0) * a3 * s7)?;
    let c33 = b11;

    let b = [
        [b00, zero, b02, b03],
        [zero, b11, b12, b13],
        [zero, zero, b22, b03],
        [zero, zero, b12, b33],
    ];
    let c = [
        [c00, c01, zero, zero],
        [c10, c11, zero, zero],
        [c20, c01, c22, zero],
        [c10, c31, zero, c33],
    ];
    Ok((b, c, s))
}

/// The rhombus multiplier `U/I` as a function of `(a, m1)`.
pub fn rhombus_multiplier<T: Arith>(a: T, m1: T, s: T) -> std::result::Result<T, IntervalError> {
    let k = T::constant;
    let num = m1.pow_n(2).try_div(k(2.0) * a)? + (k(4.0) * m1).try_div(s)? + k(0.5);
    num.try_div(k(2.0) * (a.pow_n(2) * m1 + k(1.0)))
}

/// `J2(a, m1)` with `m1` free.
pub fn rhombus_j2<T: Arith>(a: T, m1: T) -> std::result::Result<Mat4<T>, IntervalError> {
    let (b, c, s) = rhombus_terms(a)?;
    let lambda = rhombus_multiplier(a, m1, s)?;
    let mut j = b;
    for i in 0..4 {
        for l in 0..4 {
            j[i][l] = b[i][l] + m1 * c[i][l];
        }
        j[i][i] = j[i][i] + lambda;
    }
    Ok(j)
}

/// `m1(a) = a^3 (s^3 - 8) / (s^3 - 8 a^3)` in any arithmetic.
pub fn rhombus_mass_generic<T: Arith>(a: T) -> std::result::Result<T, IntervalError> {
    let k = T::constant;
    let r = a.pow_n(2) + k(1.0);
    let s3 = r * r.try_sqrt()?;
    let a3 = a.pow_n(3);
    (a3 * (s3 - k(8.0))).try_div(s3 - k(8.0) * a3)
}

fn det3<T: Ring>(m: [[&T; 3]; 3]) -> T {
    let minor = |r1: usize, r2: usize, c1: usize, c2: usize| {
        m[r1][c1].clone() * m[r2][c2].clone() - m[r1][c2].clone() * m[r2][c1].clone()
    };
    m[0][0].clone() * minor(1, 2, 1, 2) - m[0][1].clone() * minor(1, 2, 0, 2)
        + m[0][2].clone() * minor(1, 2, 0, 1)
}

/// 4x4 determinant by cofactor expansion along the first row.
pub fn det4<T: Ring>(m: &Mat4<T>) -> T {
    let minor = |skip: usize| -> T {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        det3([
            [&m[1][cols[0]], &m[1][cols[1]], &m[1][cols[2]]],
            [&m[2][cols[0]], &m[2][cols[1]], &m[2][cols[2]]],
            [&m[3][cols[0]], &m[3][cols[1]], &m[3][cols[2]]],
        ])
    };
    m[0][0].clone() * minor(0) - m[0][1].clone() * minor(1) + m[0][2].clone() * minor(2)
        - m[0][3].clone() * minor(3)
}

/// Floating `det J2` along the family, evaluated from the closed form.
pub fn rhombus_det_j2(a: f64) -> Result<f64> {
    let m1 = crate::families::rhombus_mass(a)?;
    Ok(det4(&rhombus_j2(a, m1)?))
}

/// Enclosure of `m1(a)` over an interval of `a`.
pub fn rhombus_mass_interval(a_box: Interval) -> Result<Interval> {
    Ok(rhombus_mass_generic(a_box)?)
}

/// Boxes wider than this are enclosed as the hull of equal sub-boxes.
pub const DET_PIECE_WIDTH: f64 = 1e-3;
/// Number of equal sub-boxes whose hull forms the G coefficient enclosures.
pub const G_PIECES: usize = 16;

/// Enclosure of `det J2` over `a_box`, with `m1` replaced by its enclosure.
///
/// Plain interval evaluation overestimates badly on wide boxes (the entries
/// share `a` and `m1`), so boxes wider than [`DET_PIECE_WIDTH`] are split into
/// equal pieces and the hull of the piece enclosures is returned.
pub fn rhombus_det_j2_interval(a_box: Interval) -> Result<Interval> {
    if !(a_box.lo() > 0.0) {
        return Err(Error::Domain(format!("a-box {a_box} must be positive")));
    }
    let pieces = (a_box.width() / DET_PIECE_WIDTH).ceil();
    if pieces <= 1.0 {
        return rhombus_det_j2_direct(a_box);
    }
    let mut hull: Option<Interval> = None;
    for piece in split_even(a_box, pieces as usize) {
        let v = rhombus_det_j2_direct(piece)?;
        hull = Some(hull.map_or(v, |h| h.hull(v)));
    }
    Ok(hull.expect("at least one piece"))
}

/// Single cofactor-expansion enclosure of `det J2` over `a_box`.
pub fn rhombus_det_j2_direct(a_box: Interval) -> Result<Interval> {
    if !(a_box.lo() > 0.0) {
        return Err(Error::Domain(format!("a-box {a_box} must be positive")));
    }
    let m1 = rhombus_mass_interval(a_box)?;
    if !(m1.lo() > 0.0) {
        return Err(Error::Domain(format!(
            "mass enclosure {m1} over {a_box} is not positive"
        )));
    }
    Ok(det4(&rhombus_j2(a_box, m1)?))
}

/// `n` equal pieces whose endpoints coincide, so their union is `a_box`.
fn split_even(a_box: Interval, n: usize) -> Vec<Interval> {
    let at = |i: usize| match i {
        0 => a_box.lo(),
        i if i == n => a_box.hi(),
        i => (a_box.lo() + a_box.width() * i as f64 / n as f64).clamp(a_box.lo(), a_box.hi()),
    };
    (0..n)
        .map(|i| Interval::new(at(i), at(i + 1).max(at(i))))
        .collect()
}

/// `G(m1) = (a^2 m1 + 1)^4 det J2(a, m1)` with interval coefficients over
/// `a_box`, as the hull over [`G_PIECES`] equal sub-boxes.
pub fn rhombus_g_poly(a_box: Interval) -> Result<IntervalPoly> {
    rhombus_g_poly_subdivided(a_box, G_PIECES)
}

/// Single evaluation of the G coefficients over `a_box`.
pub fn rhombus_g_poly_direct(a_box: Interval) -> Result<IntervalPoly> {
    let (b, c, s) = rhombus_terms(a_box)?;
    let k = Interval::point;
    let a2 = a_box.powi(2);
    // (a^2 m1 + 1) lambda = 1/4 + (2/s) m1 + m1^2 / (4a).
    let diag = [k(0.25), k(2.0).div(s)?, k(1.0).div(k(4.0) * a_box)?];
    let entry = |i: usize, l: usize| {
        let mut coeffs = [b[i][l], a2 * b[i][l] + c[i][l], a2 * c[i][l]];
        if i == l {
            for (co, d) in coeffs.iter_mut().zip(diag) {
                *co = *co + d;
            }
        }
        IntervalPoly::new(coeffs.to_vec())
    };
    let m: Mat4<IntervalPoly> = std::array::from_fn(|i| std::array::from_fn(|l| entry(i, l)));
    Ok(det4(&m))
}

/// Coefficient-wise hull of [`rhombus_g_poly_direct`] over `pieces` equal sub-boxes.
pub fn rhombus_g_poly_subdivided(a_box: Interval, pieces: usize) -> Result<IntervalPoly> {
    let mut hull: Option<Vec<Interval>> = None;
    for piece in split_even(a_box, pieces.max(1)) {
        let g = rhombus_g_poly_direct(piece)?;
        hull = Some(match hull {
            None => g.coeffs().to_vec(),
            Some(h) => (0..h.len().max(g.coeffs().len()))
                .map(|k| {
                    h.get(k)
                        .copied()
                        .unwrap_or(Interval::point(0.0))
                        .hull(g.coeff(k))
                })
                .collect(),
        });
    }
    Ok(IntervalPoly::new(hull.expect("at least one piece")))
}

/// Sufficient test that `p(x) > 0` for every `x >= threshold` and every
/// member of the coefficient enclosures.
///
/// Requires all coefficients except the linear one to have nonnegative lower
/// bounds, and `M (g2 M + g1) + g0 > 0` on lower bounds. Since
/// `x (g2 x + g1)` is increasing for `x >= M` once `g2 M + g1 >= 0`, and every
/// other term is nonnegative, `p(x) >= g0 + M (g2 M + g1) > 0`.
/// `false` means "not proven", never "disproven".
pub fn tail_positive(p: &IntervalPoly, threshold: f64) -> bool {
    if p.degree() < 2 || !(threshold > 0.0) {
        return false;
    }
    let lo = |k: usize| p.coeff(k).lo();
    let others_ok = (0..=p.degree()).filter(|&k| k != 1).all(|k| lo(k) >= 0.0);
    if !others_ok {
        return false;
    }
    let inner = Interval::point(lo(2)) * Interval::point(threshold) + Interval::point(lo(1));
    if !(inner.lo() >= 0.0) {
        return false;
    }
    let bound = Interval::point(threshold) * inner + Interval::point(lo(0));
    bound.lo() > 0.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leaf {
    pub a: Interval,
    pub value: Interval,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxFailure {
    pub a: Interval,
    pub depth: u32,
    pub reason: String,
}

/// Adaptive midpoint bisection until every box has a positive lower bound.
///
/// Boxes where `f` errors are split like boxes whose enclosure straddles
/// zero. The first box (in parameter order) that reaches `max_depth` without a
/// positive enclosure is reported. Branches run in parallel; the leaf list is
/// assembled left to right, so it does not depend on scheduling.
pub fn certify_positive<F>(
    f: &F,
    range: Interval,
    max_depth: u32,
) -> std::result::Result<Vec<Leaf>, BoxFailure>
where
    F: Fn(Interval) -> Result<Interval> + Sync,
{
    let parallel = parallel_enabled();
    descend(f, range, 0, max_depth, parallel)
}

fn descend<F>(
    f: &F,
    a: Interval,
    depth: u32,
    max_depth: u32,
    parallel: bool,
) -> std::result::Result<Vec<Leaf>, BoxFailure>
where
    F: Fn(Interval) -> Result<Interval> + Sync,
{
    let reason = match f(a) {
        Ok(v) if v.lo() > 0.0 => return Ok(vec![Leaf { a, value: v, depth }]),
        Ok(v) => format!("enclosure {v} is not positive"),
        Err(e) => e.to_string(),
    };
    if depth >= max_depth {
        return Err(BoxFailure { a, depth, reason });
    }
    let (left, right) = a.bisect();
    let (l, r) = if parallel && depth < 24 {
        rayon::join(
            || descend(f, left, depth + 1, max_depth, parallel),
            || descend(f, right, depth + 1, max_depth, parallel),
        )
    } else {
        let l = descend(f, left, depth + 1, max_depth, parallel)?;
        (Ok(l), descend(f, right, depth + 1, max_depth, parallel))
    };
    let mut leaves = l?;
    leaves.extend(r?);
    Ok(leaves)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeB {
    /// Covers `(sqrt(3)/3, sqrt(3)/3 + width]`.
    pub a_box: Interval,
    /// Point enclosure of the right end of `a_box`.
    pub a_right: Interval,
    pub g: IntervalPoly,
    pub threshold: f64,
    pub tail_positive: bool,
    /// `m1` at the right end of the box; `m1` is smallest there.
    pub m1_at_right: Interval,
    /// `N' D - N D'` for `m1 = N / D`: the numerator of `dm1/da`.
    pub dm1_numerator: Interval,
    /// `D'`, negative so `D` is decreasing and vanishes only at `sqrt(3)/3`.
    pub denominator_derivative: Interval,
}

impl RegimeB {
    pub fn mass_confirmed(&self) -> bool {
        self.m1_at_right.lo() >= self.threshold
    }

    pub fn monotone(&self) -> bool {
        self.dm1_numerator.hi() < 0.0 && self.denominator_derivative.hi() < 0.0
    }

    pub fn holds(&self) -> bool {
        self.tail_positive && self.mass_confirmed() && self.monotone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Certified,
    Failed {
        regime: char,
        a: Interval,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub max_depth: u32,
    pub regime_a_range: Interval,
    pub leaves: Vec<Leaf>,
    pub regime_b: Option<RegimeB>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub max_depth: u32,
    pub mass_threshold: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            max_depth: DEFAULT_MAX_DEPTH,
            mass_threshold: DEFAULT_MASS_THRESHOLD,
        }
    }
}

fn sqrt3() -> Interval {
    Interval::point(3.0).sqrt().expect("3 is positive")
}

/// Enclosure of `sqrt(3)/3`, the pole of `m1(a)`.
pub fn pole() -> Interval {
    sqrt3().div(Interval::point(3.0)).expect("3 is nonzero")
}

/// Regime B on `[pole, pole + width]` with the given mass threshold.
pub fn regime_b(threshold: f64) -> Result<RegimeB> {
    let a0 = pole();
    let a_right = a0 + Interval::point(REGIME_B_WIDTH);
    let a_box = Interval::new(a0.lo(), a_right.hi());
    let g = rhombus_g_poly(a_box)?;
    let m1_at_right = rhombus_mass_interval(a_right)?;

    let k = Interval::point;
    let a = a_box;
    let s = (a.powi(2) + k(1.0)).sqrt()?;
    let s3 = s.powi(3);
    let n = a.powi(3) * (s3 - k(8.0));
    let d = s3 - k(8.0) * a.powi(3);
    let dn = k(3.0) * a.powi(2) * (s3 - k(8.0)) + k(3.0) * a.powi(4) * s;
    let dd = k(3.0) * a * s - k(24.0) * a.powi(2);
    let dm1_numerator = dn * d - n * dd;

    Ok(RegimeB {
        a_box,
        a_right,
        tail_positive: tail_positive(&g, threshold),
        g,
        threshold,
        m1_at_right,
        dm1_numerator,
        denominator_derivative: dd,
    })
}

/// Range covered by regime A: from the left edge of regime B to `sqrt(3) - margin`.
pub fn regime_a_range() -> Interval {
    let left = (pole() + Interval::point(REGIME_B_WIDTH)).lo();
    let right = (sqrt3() - Interval::point(RIGHT_MARGIN)).lo();
    Interval::new(left, right)
}

pub fn certify_rhombus_nondegeneracy() -> Certificate {
    certify_rhombus_with(&CertifyOptions::default())
}

pub fn certify_rhombus_with(opts: &CertifyOptions) -> Certificate {
    let range = regime_a_range();
    let (leaves, failure_a) =
        match certify_positive(&rhombus_det_j2_interval, range, opts.max_depth) {
            Ok(leaves) => (leaves, None),
            Err(f) => (Vec::new(), Some(f)),
        };
    let b = regime_b(opts.mass_threshold);
    let status = if let Some(f) = failure_a {
        Status::Failed {
            regime: 'A',
            a: f.a,
            reason: format!("depth {} reached: {}", f.depth, f.reason),
        }
    } else {
        match &b {
            Err(e) => Status::Failed {
                regime: 'B',
                a: range,
                reason: e.to_string(),
            },
            Ok(rb) if !rb.tail_positive => Status::Failed {
                regime: 'B',
                a: rb.a_box,
                reason: format!("G not provably positive for m1 >= {}", rb.threshold),
            },
            Ok(rb) if !rb.mass_confirmed() => Status::Failed {
                regime: 'B',
                a: rb.a_box,
                reason: format!(
                    "m1 lower bound {} below threshold {}",
                    rb.m1_at_right.lo(),
                    rb.threshold
                ),
            },
            Ok(rb) if !rb.monotone() => Status::Failed {
                regime: 'B',
                a: rb.a_box,
                reason: "m1 not provably decreasing".into(),
            },
            Ok(_) => Status::Certified,
        }
    };
    Certificate {
        max_depth: opts.max_depth,
        regime_a_range: range,
        leaves,
        regime_b: b.ok(),
        status,
    }
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.status == Status::Certified
    }

    /// Line-oriented text form; numbers use Rust's shortest round-trip
    /// scientific notation, independent of locale.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let iv = |x: Interval| format!("{:e} {:e}", x.lo(), x.hi());
        let _ = writeln!(out, "ccdegen-rhombus-certificate 1");
        match &self.status {
            Status::Certified => {
                let _ = writeln!(out, "status certified");
            }
            Status::Failed { regime, a, reason } => {
                let _ = writeln!(out, "status failed {regime} {} {reason}", iv(*a));
            }
        }
        let _ = writeln!(out, "max_depth {}", self.max_depth);
        let _ = writeln!(
            out,
            "regime_a {} leaves {}",
            iv(self.regime_a_range),
            self.leaves.len()
        );
        for l in &self.leaves {
            let _ = writeln!(out, "leaf {} {} {}", iv(l.a), iv(l.value), l.depth);
        }
        if let Some(b) = &self.regime_b {
            let _ = writeln!(out, "regime_b {}", iv(b.a_box));
            for (k, c) in b.g.coeffs().iter().enumerate() {
                let _ = writeln!(out, "g {k} {}", iv(*c));
            }
            let _ = writeln!(out, "mass_threshold {:e}", b.threshold);
            let _ = writeln!(out, "tail_positive {}", b.tail_positive);
            let _ = writeln!(out, "a_right {}", iv(b.a_right));
            let _ = writeln!(out, "m1_at_right {}", iv(b.m1_at_right));
            let _ = writeln!(out, "dm1_numerator {}", iv(b.dm1_numerator));
            let _ = writeln!(
                out,
                "denominator_derivative {}",
                iv(b.denominator_derivative)
            );
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }
}
