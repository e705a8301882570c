//! Domain types and the central-configuration residual.
//!
//! Coordinates are stored flat as `(x1, y1, x2, y2, ..., xN, yN)`, the order
//! used by every matrix in this crate.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Relative collision threshold: two bodies closer than this fraction of the
/// configuration diameter are treated as coincident.
pub const COLLISION_REL_TOL: f64 = 1e-12;

/// Positive masses, at least two of them.
#[derive(Debug, Clone, PartialEq)]
pub struct Masses(Vec<f64>);

impl Masses {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.len() < 2 {
            return Err(Error::InvalidMasses(format!(
                "need at least 2 bodies, got {}",
                masses.len()
            )));
        }
        if let Some((i, m)) = masses
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && **m > 0.0))
        {
            return Err(Error::InvalidMasses(format!(
                "mass {} of body {} is not a positive finite number",
                m,
                i + 1
            )));
        }
        Ok(Masses(masses))
    }

    pub fn equal(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

/// Collision-free planar positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    coords: Vec<f64>,
}

impl Configuration {
    /// Builds a configuration from flat coordinates `(x1, y1, ..., xN, yN)`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if !coords.len().is_multiple_of(2) {
            return Err(Error::InvalidConfiguration(format!(
                "odd coordinate count {}",
                coords.len()
            )));
        }
        if coords.len() < 4 {
            return Err(Error::InvalidConfiguration("need at least 2 bodies".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfiguration("non-finite coordinate".into()));
        }
        check_collisions(&coords)?;
        Ok(Configuration { coords })
    }

    pub fn from_points(points: &[[f64; 2]]) -> Result<Self> {
        Self::new(points.iter().flat_map(|p| [p[0], p[1]]).collect())
    }

    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        [self.coords[2 * i], self.coords[2 * i + 1]]
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.n()).map(|i| self.point(i)).collect()
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coords)
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.coords)
    }

    pub fn min_distance(&self) -> f64 {
        let n = self.n();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                best = best.min(dist(&self.coords, i, j));
            }
        }
        best
    }

    /// Rigid rotation about the origin by `theta` radians.
    pub fn rotated(&self, theta: f64) -> Configuration {
        let (s, c) = theta.sin_cos();
        let coords = self
            .coords
            .chunks_exact(2)
            .flat_map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]])
            .collect();
        Configuration { coords }
    }

    pub fn translated(&self, t: [f64; 2]) -> Configuration {
        let coords = self
            .coords
            .chunks_exact(2)
            .flat_map(|p| [p[0] + t[0], p[1] + t[1]])
            .collect();
        Configuration { coords }
    }

    /// Homothety about the origin; `t` must be positive.
    pub fn scaled(&self, t: f64) -> Result<Configuration> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Precondition(format!(
                "scale factor {t} must be positive"
            )));
        }
        Ok(Configuration {
            coords: self.coords.iter().map(|c| c * t).collect(),
        })
    }

    /// Same configuration translated so the center of mass is the origin.
    pub fn recentered(&self, m: &Masses) -> Result<Configuration> {
        let c = center_of_mass(self, m)?;
        Ok(self.translated([-c[0], -c[1]]))
    }
}

fn dist(q: &[f64], i: usize, j: usize) -> f64 {
    (q[2 * j] - q[2 * i]).hypot(q[2 * j + 1] - q[2 * i + 1])
}

fn diameter(q: &[f64]) -> f64 {
    let n = q.len() / 2;
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            d = d.max(dist(q, i, j));
        }
    }
    d
}

pub(crate) fn check_collisions(q: &[f64]) -> Result<()> {
    let n = q.len() / 2;
    let threshold = COLLISION_REL_TOL * diameter(q);
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(q, i, j);
            if d <= threshold {
                return Err(Error::Collision {
                    i: i + 1,
                    j: j + 1,
                    distance: d,
                });
            }
        }
    }
    Ok(())
}

/// Residual formulation. The tag fixes the number of trivial symmetry zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    /// Fixed center of mass at the origin, `lambda = U/I`: rotation and scaling.
    I,
    /// Constant multiplier: two translations and rotation.
    II,
    /// Centered multiplier term, `lambda = U/I`: translations, rotation, scaling.
    III,
}

impl Form {
    pub const ALL: [Form; 3] = [Form::I, Form::II, Form::III];

    pub fn symmetry_count(self) -> usize {
        match self {
            Form::I => 2,
            Form::II => 3,
            Form::III => 4,
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::I => "I",
            Form::II => "II",
            Form::III => "III",
        })
    }
}

impl FromStr for Form {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "1" => Ok(Form::I),
            "II" | "2" => Ok(Form::II),
            "III" | "3" => Ok(Form::III),
            other => Err(Error::Precondition(format!(
                "unknown form {other:?}, expected I, II or III"
            ))),
        }
    }
}

/// Potential, inertia about the center of mass, the center itself and `U/I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalars {
    pub u: f64,
    pub i: f64,
    pub c: [f64; 2],
    pub lambda: f64,
}

pub(crate) fn check_dims(q: &Configuration, m: &Masses) -> Result<()> {
    if q.n() != m.len() {
        return Err(Error::Precondition(format!(
            "{} positions but {} masses",
            q.n(),
            m.len()
        )));
    }
    Ok(())
}

pub fn pairwise_distance(q: &Configuration, i: usize, j: usize) -> Result<f64> {
    let n = q.n();
    if i >= n || j >= n || i == j {
        return Err(Error::Precondition(format!(
            "body indices ({i}, {j}) invalid for {n} bodies"
        )));
    }
    let d = dist(q.coords(), i, j);
    if d <= COLLISION_REL_TOL * q.diameter() {
        return Err(Error::Collision {
            i: i + 1,
            j: j + 1,
            distance: d,
        });
    }
    Ok(d)
}

pub fn center_of_mass(q: &Configuration, m: &Masses) -> Result<[f64; 2]> {
    check_dims(q, m)?;
    Ok(raw_center(q.coords(), m.as_slice()))
}

pub fn potential(q: &Configuration, m: &Masses) -> Result<f64> {
    check_dims(q, m)?;
    Ok(raw_potential(q.coords(), m.as_slice()))
}

/// Moment of inertia about the center of mass.
pub fn moment_of_inertia(q: &Configuration, m: &Masses) -> Result<f64> {
    check_dims(q, m)?;
    let c = raw_center(q.coords(), m.as_slice());
    Ok(raw_inertia(q.coords(), m.as_slice(), c))
}

/// Moment of inertia about the origin, the quantity Form I divides by.
pub fn moment_of_inertia_origin(q: &Configuration, m: &Masses) -> Result<f64> {
    check_dims(q, m)?;
    Ok(raw_inertia(q.coords(), m.as_slice(), [0.0, 0.0]))
}

/// The multiplier `U/I` with `I` about the center of mass.
pub fn multiplier(q: &Configuration, m: &Masses) -> Result<f64> {
    Ok(scalars(q, m)?.lambda)
}

pub fn scalars(q: &Configuration, m: &Masses) -> Result<Scalars> {
    check_dims(q, m)?;
    let (x, w) = (q.coords(), m.as_slice());
    let c = raw_center(x, w);
    let u = raw_potential(x, w);
    let i = raw_inertia(x, w, c);
    Ok(Scalars {
        u,
        i,
        c,
        lambda: u / i,
    })
}

/// Weighted residual `F_i = sum_j m_i m_j (q_j - q_i)/r^3 + lambda m_i (q_i - c)`.
///
/// Form I takes `c = 0` and `lambda = U/I` with `I` about the origin, so it is
/// only zero at configurations already centered there. Form II uses the
/// multiplier `U/I` at the evaluated point; see [`residual_fixed_lambda`] for a
/// caller-chosen constant.
pub fn residual(form: Form, q: &Configuration, m: &Masses) -> Result<DVector<f64>> {
    check_dims(q, m)?;
    Ok(DVector::from_vec(raw_residual(
        form,
        q.coords(),
        m.as_slice(),
        None,
    )))
}

/// Form II residual with a fixed multiplier.
pub fn residual_fixed_lambda(q: &Configuration, m: &Masses, lambda: f64) -> Result<DVector<f64>> {
    check_dims(q, m)?;
    Ok(DVector::from_vec(raw_residual(
        Form::II,
        q.coords(),
        m.as_slice(),
        Some(lambda),
    )))
}

/// Threshold used by [`is_central_configuration`]: residual entries scale like
/// `m^2 / r^2`, so `tol` is multiplied by `max(1, max(m)^2 / min(r)^2)`.
pub fn cc_threshold(q: &Configuration, m: &Masses, tol: f64) -> f64 {
    let r = q.min_distance();
    let mm = m.max();
    tol * (mm * mm / (r * r)).max(1.0)
}

pub fn is_central_configuration(
    form: Form,
    q: &Configuration,
    m: &Masses,
    tol: f64,
) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let f = residual(form, q, m)?;
    Ok(f.amax() <= cc_threshold(q, m, tol))
}

pub(crate) fn raw_center(q: &[f64], m: &[f64]) -> [f64; 2] {
    let total: f64 = m.iter().sum();
    let (mut cx, mut cy) = (0.0, 0.0);
    for (i, mi) in m.iter().enumerate() {
        cx += mi * q[2 * i];
        cy += mi * q[2 * i + 1];
    }
    [cx / total, cy / total]
}

pub(crate) fn raw_potential(q: &[f64], m: &[f64]) -> f64 {
    let n = m.len();
    let mut u = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            u += m[i] * m[j] / dist(q, i, j);
        }
    }
    u
}

pub(crate) fn raw_inertia(q: &[f64], m: &[f64], c: [f64; 2]) -> f64 {
    m.iter()
        .enumerate()
        .map(|(i, mi)| {
            let dx = q[2 * i] - c[0];
            let dy = q[2 * i + 1] - c[1];
            mi * (dx * dx + dy * dy)
        })
        .sum()
}

/// Center and multiplier as the given form defines them.
pub(crate) fn form_center_lambda(
    form: Form,
    q: &[f64],
    m: &[f64],
    lambda: Option<f64>,
) -> ([f64; 2], f64) {
    let c = match form {
        Form::I => [0.0, 0.0],
        Form::II | Form::III => raw_center(q, m),
    };
    let lambda = match (form, lambda) {
        (Form::II, Some(l)) => l,
        (Form::I, _) => raw_potential(q, m) / raw_inertia(q, m, c),
        _ => raw_potential(q, m) / raw_inertia(q, m, raw_center(q, m)),
    };
    (c, lambda)
}

pub(crate) fn raw_residual(form: Form, q: &[f64], m: &[f64], lambda: Option<f64>) -> Vec<f64> {
    let n = m.len();
    let (c, lambda) = form_center_lambda(form, q, m, lambda);
    let mut f = vec![0.0; 2 * n];
    for i in 0..n {
        for j in i + 1..n {
            let dx = q[2 * j] - q[2 * i];
            let dy = q[2 * j + 1] - q[2 * i + 1];
            let r2 = dx * dx + dy * dy;
            let w = m[i] * m[j] / (r2 * r2.sqrt());
            f[2 * i] += w * dx;
            f[2 * i + 1] += w * dy;
            f[2 * j] -= w * dx;
            f[2 * j + 1] -= w * dy;
        }
    }
    for i in 0..n {
        f[2 * i] += lambda * m[i] * (q[2 * i] - c[0]);
        f[2 * i + 1] += lambda * m[i] * (q[2 * i + 1] - c[1]);
    }
    f
}

/// Closed-form configurations used throughout the tests and the CLI.
pub mod fixtures {
    use super::Configuration;

    /// Unit-circumradius square centered at the origin.
    pub fn square() -> Configuration {
        Configuration::new(vec![1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    /// Unit square with a corner at the origin.
    pub fn unit_square() -> Configuration {
        Configuration::new(vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0]).unwrap()
    }

    /// Equilateral triangle inscribed in the unit circle.
    pub fn equilateral() -> Configuration {
        let h = 3f64.sqrt() / 2.0;
        Configuration::new(vec![1.0, 0.0, -0.5, h, -0.5, -h]).unwrap()
    }

    /// Equilateral triangle plus a fourth body at its center.
    pub fn triangle_center() -> Configuration {
        let h = 3f64.sqrt() / 2.0;
        Configuration::new(vec![1.0, 0.0, -0.5, h, -0.5, -h, 0.0, 0.0]).unwrap()
    }

    /// Rhombus with vertices `(0, a), (-1, 0), (0, -a), (1, 0)`.
    pub fn rhombus(a: f64) -> Configuration {
        Configuration::new(vec![0.0, a, -1.0, 0.0, 0.0, -a, 1.0, 0.0]).unwrap()
    }
}
