//! Newton solver and one-parameter families of central configurations.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::cc::{
    check_collisions, check_dims, fixtures, form_center_lambda, raw_residual, Configuration, Form,
    Masses,
};
use crate::error::{Error, Result};
use crate::jacobian::raw_jacobian;
use crate::parallel_enabled;
use crate::reduction::{build_p, reduce, symmetry_generators, Verdict};

/// Normalization applied to Newton iterates after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gauge {
    None,
    /// Translate the center of mass to the origin.
    Recenter,
    /// Recenter, then rescale so the moment of inertia equals the target.
    /// Scaling is skipped for Form II, whose fixed multiplier breaks scale invariance.
    RecenterScale(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Absolute bound on the max-norm of the residual.
    pub tolerance: f64,
    /// Initial step fraction; halved up to 30 times while the residual does not decrease.
    pub damping: f64,
    pub gauge: Gauge,
    /// Form II multiplier; defaults to `U/I` at the initial iterate.
    pub lambda: Option<f64>,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iterations: 60,
            tolerance: 1e-12,
            damping: 1.0,
            gauge: Gauge::Recenter,
            lambda: None,
        }
    }
}

const MAX_HALVINGS: usize = 30;

/// Damped Newton iteration with steps restricted to the complement of the
/// symmetry generators.
///
/// At each iterate the step is `E z`, where `E` holds the non-generator
/// columns of the reduction basis and `z` minimizes `|F + J E z|`. At a
/// nondegenerate solution `J E` has full column rank, so this is Gauss-Newton
/// on a zero-residual problem and converges quadratically.
pub fn newton_solve(
    form: Form,
    m: &Masses,
    q_init: &Configuration,
    opts: &NewtonOptions,
) -> Result<Configuration> {
    check_dims(q_init, m)?;
    if opts.max_iterations < 1 || !(opts.tolerance > 0.0) || !(opts.damping > 0.0) {
        return Err(Error::Precondition("invalid Newton options".into()));
    }
    let w = m.as_slice();
    let lambda = match form {
        Form::II => Some(
            opts.lambda
                .unwrap_or_else(|| form_center_lambda(Form::III, q_init.coords(), w, None).1),
        ),
        _ => None,
    };
    let mut q = q_init.clone();
    let mut f = DVector::from_vec(raw_residual(form, q.coords(), w, lambda));
    for _ in 0..opts.max_iterations {
        if f.amax() <= opts.tolerance {
            return Ok(q);
        }
        let basis = symmetry_generators(form, &q)?;
        let p = build_p(&basis)?.p;
        let k = basis.k();
        let e = p.columns(k, p.ncols() - k).into_owned();
        let j = raw_jacobian(form, q.coords(), w, lambda);
        let a = &j * &e;
        let eps = 1e-14 * a.amax();
        let z = a
            .svd(true, true)
            .solve(&(-&f), eps)
            .map_err(|msg| Error::Internal(msg.into()))?;
        let delta = &e * z;

        let fnorm = f.norm();
        let mut t = opts.damping;
        let mut accepted = None;
        let mut last_err = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = q
                .coords()
                .iter()
                .zip(delta.iter())
                .map(|(x, d)| x + t * d)
                .collect();
            match check_collisions(&trial) {
                Ok(()) => {
                    let ft = DVector::from_vec(raw_residual(form, &trial, w, lambda));
                    if ft.norm() < fnorm {
                        accepted = Some(trial);
                        break;
                    }
                }
                Err(e) => last_err = Some(e),
            }
            t *= 0.5;
        }
        let Some(trial) = accepted else {
            return Err(last_err.unwrap_or(Error::NonConvergence {
                iterations: opts.max_iterations,
                residual: f.amax(),
            }));
        };
        q = apply_gauge(form, Configuration::new(trial)?, m, opts.gauge)?;
        f = DVector::from_vec(raw_residual(form, q.coords(), w, lambda));
    }
    if f.amax() <= opts.tolerance {
        Ok(q)
    } else {
        Err(Error::NonConvergence {
            iterations: opts.max_iterations,
            residual: f.amax(),
        })
    }
}

fn apply_gauge(form: Form, q: Configuration, m: &Masses, gauge: Gauge) -> Result<Configuration> {
    match gauge {
        Gauge::None => Ok(q),
        Gauge::Recenter => q.recentered(m),
        Gauge::RecenterScale(target) => {
            let q = q.recentered(m)?;
            if form == Form::II {
                return Ok(q);
            }
            let i = crate::cc::moment_of_inertia(&q, m)?;
            q.scaled((target / i).sqrt())
        }
    }
}

/// Rhombus mass `m1(a) = a^3 (s^3 - 8) / (s^3 - 8 a^3)` with `s = sqrt(a^2 + 1)`.
///
/// Positive exactly for `a` in `(sqrt(3)/3, sqrt(3))`; the denominator vanishes
/// at `sqrt(3)/3`.
pub fn rhombus_mass(a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!(
            "rhombus parameter a = {a} must be positive"
        )));
    }
    let s3 = (a * a + 1.0).powf(1.5);
    let den = s3 - 8.0 * a * a * a;
    if den.abs() < 1e-14 {
        return Err(Error::Domain(format!("rhombus mass has a pole at a = {a}")));
    }
    Ok(a * a * a * (s3 - 8.0) / den)
}

/// `|a f_y1 - f_x2 / m1|` where `f` is the per-unit-mass Form III residual of
/// the rhombus with masses `[m1, 1, m1, 1]`. It vanishes for every `(a, m1)`,
/// which is why one equation suffices to determine `m1(a)`.
pub fn residual_identity_check(a: f64, m1: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!(
            "rhombus parameter a = {a} must be positive"
        )));
    }
    let m = Masses::new(vec![m1, 1.0, m1, 1.0])?;
    let f = crate::cc::residual(Form::III, &fixtures::rhombus(a), &m)?;
    let fy1 = f[1] / m1;
    let fx2 = f[2];
    Ok((a * fy1 - fx2 / m1).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Equilateral triangle of unit masses plus a central body of mass `m4`.
    TriangleCenter,
    /// Rhombus `[0, a, -1, 0, 0, -a, 1, 0]` with masses `[m1(a), 1, m1(a), 1]`.
    Rhombus,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::TriangleCenter => "triangle-center",
            Family::Rhombus => "rhombus",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangle-center" | "triangle_center" => Ok(Family::TriangleCenter),
            "rhombus" => Ok(Family::Rhombus),
            other => Err(Error::Precondition(format!(
                "unknown family {other:?}, expected rhombus or triangle-center"
            ))),
        }
    }
}

/// The closed-form family member at parameter `p`.
pub fn family_member(family: Family, p: f64) -> Result<(Configuration, Masses)> {
    match family {
        Family::TriangleCenter => {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::Domain(format!(
                    "central mass m4 = {p} must be positive"
                )));
            }
            Ok((
                fixtures::triangle_center(),
                Masses::new(vec![1.0, 1.0, 1.0, p])?,
            ))
        }
        Family::Rhombus => {
            let m1 = rhombus_mass(p)?;
            if !(m1 > 0.0) {
                return Err(Error::Domain(format!(
                    "rhombus mass m1({p}) = {m1} is not positive; a must lie in (sqrt(3)/3, sqrt(3))"
                )));
            }
            Ok((fixtures::rhombus(p), Masses::new(vec![m1, 1.0, m1, 1.0])?))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilySample {
    pub configuration: Configuration,
    pub masses: Masses,
    pub det_j2: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyPoint {
    pub param: f64,
    pub form: Form,
    /// Errors at individual points (outside the domain, say) are kept here and
    /// do not abort the scan.
    pub sample: Result<FamilySample>,
}

pub fn family_det(family: Family, form: Form, p: f64) -> Result<f64> {
    let (q, m) = family_member(family, p)?;
    Ok(reduce(form, &q, &m)?.det_j2)
}

fn sample(family: Family, form: Form, p: f64) -> Result<FamilySample> {
    let (q, m) = family_member(family, p)?;
    let r = reduce(form, &q, &m)?;
    Ok(FamilySample {
        configuration: q,
        masses: m,
        det_j2: r.det_j2,
        verdict: r.verdict,
    })
}

/// `steps` uniformly spaced samples from `from` to `to`, both included.
pub fn family_scan(
    family: Family,
    form: Form,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<Vec<FamilyPoint>> {
    if steps < 2 {
        return Err(Error::Precondition(format!(
            "scan needs at least 2 steps, got {steps}"
        )));
    }
    if !(from.is_finite() && to.is_finite() && from < to) {
        return Err(Error::Precondition(format!(
            "invalid scan range [{from}, {to}]"
        )));
    }
    let param = |i: usize| {
        if i + 1 == steps {
            to
        } else {
            from + (to - from) * (i as f64) / ((steps - 1) as f64)
        }
    };
    let point = |i: usize| {
        let p = param(i);
        FamilyPoint {
            param: p,
            form,
            sample: sample(family, form, p),
        }
    };
    Ok(if parallel_enabled() {
        (0..steps).into_par_iter().map(point).collect()
    } else {
        (0..steps).map(point).collect()
    })
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Root of `det J2` along a family inside `[lo, hi]`.
///
/// With a sign change the bracket is bisected to width `1e-12`. Otherwise the
/// root may be of even multiplicity: `|det J2|` is minimized by golden-section
/// search and the minimizer is refined by bisecting the sign change of a
/// fourth-order central difference of `det J2`. The minimizer counts as a
/// root when `|det J2| <= 1e-14 * scale` with `scale` the product of the row
/// norms of `J2`.
pub fn find_critical_mass(family: Family, form: Form, lo: f64, hi: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::Precondition(format!("invalid bracket [{lo}, {hi}]")));
    }
    let f = |p: f64| family_det(family, form, p);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() != fhi.signum() {
        let (mut a, mut b, mut fa) = (lo, hi, flo);
        while b - a > 1e-13 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = f(mid)?;
            if fm == 0.0 {
                return Ok(mid);
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        return Ok(0.5 * (a + b));
    }

    // Golden-section search for the minimum of |det J2|.
    let g = |p: f64| f(p).map(f64::abs);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    while b - a > 1e-9 * (hi - lo) {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - GOLDEN * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + GOLDEN * (b - a);
            gd = g(d)?;
        }
    }
    let mut best = 0.5 * (a + b);
    for cand in [lo, hi] {
        if g(cand)? < g(best)? {
            best = cand;
        }
    }

    // Refine on the derivative, whose sign changes at a double root.
    let h = 1e-3 * (hi - lo);
    let deriv = |p: f64| -> Result<f64> {
        Ok((-f(p + 2.0 * h)? + 8.0 * f(p + h)? - 8.0 * f(p - h)? + f(p - 2.0 * h)?) / (12.0 * h))
    };
    let inner = (lo + 2.0 * h, hi - 2.0 * h);
    if best > inner.0 && best < inner.1 {
        let mut width = 1e-7 * (hi - lo);
        while width < hi - lo {
            let (a0, b0) = ((best - width).max(inner.0), (best + width).min(inner.1));
            let (da, db) = (deriv(a0)?, deriv(b0)?);
            if da.signum() != db.signum() {
                let (mut a, mut b, mut fa) = (a0, b0, da);
                while b - a > 1e-14 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    let dm = deriv(mid)?;
                    if dm.signum() == fa.signum() {
                        a = mid;
                        fa = dm;
                    } else {
                        b = mid;
                    }
                }
                best = 0.5 * (a + b);
                break;
            }
            width *= 4.0;
        }
    }

    let (q, m) = family_member(family, best)?;
    let r = reduce(form, &q, &m)?;
    if r.det_j2.abs() <= 1e-14 * r.det_scale {
        Ok(best)
    } else {
        Err(Error::NoSignChange {
            lo,
            hi,
            min_abs: r.det_j2.abs(),
        })
    }
}
