//! Symmetry reduction of the Jacobian and the degeneracy verdict.
//!
//! `P = [generators | e_r for every non-pivot row r]` is invertible when the
//! generator rows at the pivots form an invertible block. At a central
//! configuration the generators are null vectors of the Jacobian, so the first
//! `k` columns of `P^-1 J P` vanish and the bottom-right block `J2` is the
//! operator induced on the quotient by the symmetry directions. Another choice
//! of pivots changes `J2` by a similarity, leaving `det J2` unchanged.

use std::fmt;

use nalgebra::{Complex, DMatrix, DVector};

use crate::cc::{self, check_dims, Configuration, Form, Masses};
use crate::error::{Error, Result};
use crate::jacobian::jacobian_analytic;

pub const DEFAULT_CC_TOL: f64 = 1e-9;
pub const DEFAULT_DET_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    TranslationX,
    TranslationY,
    Rotation,
    Scaling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryBasis {
    pub kinds: Vec<GeneratorKind>,
    pub generators: Vec<DVector<f64>>,
}

impl SymmetryBasis {
    pub fn k(&self) -> usize {
        self.generators.len()
    }

    pub fn dim(&self) -> usize {
        self.generators.first().map_or(0, |g| g.len())
    }

    pub fn as_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.generators)
    }
}

/// Generators in the order translations, rotation, scaling, restricted to the form.
pub fn symmetry_generators(form: Form, q: &Configuration) -> Result<SymmetryBasis> {
    let n = q.n();
    let x = q.coords();
    let mut kinds = Vec::new();
    let mut generators = Vec::new();
    if form != Form::I {
        kinds.push(GeneratorKind::TranslationX);
        generators.push(DVector::from_fn(
            2 * n,
            |r, _| if r % 2 == 0 { 1.0 } else { 0.0 },
        ));
        kinds.push(GeneratorKind::TranslationY);
        generators.push(DVector::from_fn(
            2 * n,
            |r, _| if r % 2 == 1 { 1.0 } else { 0.0 },
        ));
    }
    kinds.push(GeneratorKind::Rotation);
    generators.push(DVector::from_fn(2 * n, |r, _| {
        if r % 2 == 0 {
            -x[r + 1]
        } else {
            x[r - 1]
        }
    }));
    if form != Form::II {
        kinds.push(GeneratorKind::Scaling);
        generators.push(DVector::from_column_slice(x));
    }
    let basis = SymmetryBasis { kinds, generators };
    let k = basis.k();
    let rank = basis.as_matrix().rank(1e-12 * (1.0 + q.diameter()));
    if rank < k {
        return Err(Error::DegenerateBasis { rank, expected: k });
    }
    Ok(basis)
}

/// `P`, its inverse and the rows carrying the invertible generator block.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub p: DMatrix<f64>,
    pub p_inverse: DMatrix<f64>,
    pub pivot_rows: Vec<usize>,
}

/// Completion with pivot rows chosen by partial-pivoted elimination on the
/// generator columns.
pub fn build_p(basis: &SymmetryBasis) -> Result<Completion> {
    let pivots = greedy_pivots(basis)?;
    build_p_with_pivots(basis, &pivots)
}

/// Completion with caller-chosen pivot rows (the leading `k` rows, for example).
pub fn build_p_with_pivots(basis: &SymmetryBasis, pivot_rows: &[usize]) -> Result<Completion> {
    let (dim, k) = (basis.dim(), basis.k());
    let mut pivots = pivot_rows.to_vec();
    pivots.sort_unstable();
    pivots.dedup();
    if pivots.len() != k || pivots.iter().any(|&r| r >= dim) {
        return Err(Error::Precondition(format!(
            "need {k} distinct pivot rows below {dim}, got {pivot_rows:?}"
        )));
    }
    let mut p = DMatrix::zeros(dim, dim);
    for (c, g) in basis.generators.iter().enumerate() {
        p.set_column(c, g);
    }
    let free = (0..dim).filter(|r| !pivots.contains(r));
    for (c, r) in (k..dim).zip(free) {
        p[(r, c)] = 1.0;
    }
    let p_inverse = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Internal(format!("P is singular for pivot rows {pivots:?}")))?;
    Ok(Completion {
        p,
        p_inverse,
        pivot_rows: pivots,
    })
}

fn greedy_pivots(basis: &SymmetryBasis) -> Result<Vec<usize>> {
    let mut g = basis.as_matrix();
    let (dim, k) = g.shape();
    let scale = g.amax().max(f64::MIN_POSITIVE);
    let mut used = vec![false; dim];
    let mut pivots = Vec::with_capacity(k);
    for c in 0..k {
        let (row, val) = (0..dim)
            .filter(|&r| !used[r])
            .map(|r| (r, g[(r, c)].abs()))
            .fold(
                (usize::MAX, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if row == usize::MAX || val <= 1e-12 * scale {
            return Err(Error::DegenerateBasis {
                rank: c,
                expected: k,
            });
        }
        used[row] = true;
        pivots.push(row);
        let pivot = g[(row, c)];
        for r in 0..dim {
            if r != row {
                let f = g[(r, c)] / pivot;
                if f != 0.0 {
                    for cc in c..k {
                        let v = g[(row, cc)];
                        g[(r, cc)] -= f * v;
                    }
                }
            }
        }
    }
    Ok(pivots)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Nondegenerate,
    Degenerate,
    /// Only produced by interval-certified code paths.
    Uncertain,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Nondegenerate => "nondegenerate",
            Verdict::Degenerate => "degenerate",
            Verdict::Uncertain => "uncertain",
        })
    }
}

/// Which matrix is conjugated by `P`.
///
/// The verdict only depends on whether `det J2` vanishes, which is the same
/// for every choice here. The magnitudes differ by positive factors:
/// `Normalized` multiplies the Form I Jacobian by `sqrt(I0/2)` (with `I0` the
/// inertia about the origin) and divides each Form II/III row by its body's
/// mass (the Jacobian of the acceleration field). These are the conventions
/// under which the classical closed-form values hold, e.g. `det J2 =
/// (m1 m2 + m1 m3 + m2 m3)/4` for the Lagrange triangle. `Weighted` uses the
/// residual's own Jacobian unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    Normalized,
    Weighted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReduceOptions {
    pub cc_tol: f64,
    pub det_tol: f64,
    pub normalization: Normalization,
    /// Explicit pivot rows; `None` selects them by elimination.
    pub pivot_rows: Option<Vec<usize>>,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            cc_tol: DEFAULT_CC_TOL,
            det_tol: DEFAULT_DET_TOL,
            normalization: Normalization::default(),
            pivot_rows: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub form: Form,
    pub p: DMatrix<f64>,
    pub p_inverse: DMatrix<f64>,
    pub pivot_rows: Vec<usize>,
    /// The matrix that was conjugated (see [`Normalization`]).
    pub jacobian: DMatrix<f64>,
    pub conjugated: DMatrix<f64>,
    pub j2: DMatrix<f64>,
    pub det_j2: f64,
    /// Product of the row norms of `J2`, an upper bound for `|det J2|`.
    pub det_scale: f64,
    /// Max-norm of the first `k` columns of `P^-1 J P`.
    pub zero_column_residual: f64,
    pub verdict: Verdict,
}

/// The Jacobian under the given normalization.
pub fn degeneracy_operator(
    form: Form,
    q: &Configuration,
    m: &Masses,
    normalization: Normalization,
) -> Result<DMatrix<f64>> {
    let mut j = jacobian_analytic(form, q, m)?;
    if normalization == Normalization::Normalized {
        match form {
            Form::I => {
                let i0 = cc::moment_of_inertia_origin(q, m)?;
                j *= (0.5 * i0).sqrt();
            }
            Form::II | Form::III => {
                for (i, mi) in m.as_slice().iter().enumerate() {
                    for a in 0..2 {
                        j.row_mut(2 * i + a).scale_mut(1.0 / mi);
                    }
                }
            }
        }
    }
    Ok(j)
}

pub fn reduce(form: Form, q: &Configuration, m: &Masses) -> Result<ReductionReport> {
    reduce_with(form, q, m, &ReduceOptions::default())
}

pub fn reduce_with(
    form: Form,
    q: &Configuration,
    m: &Masses,
    opts: &ReduceOptions,
) -> Result<ReductionReport> {
    check_dims(q, m)?;
    let f = cc::residual(form, q, m)?;
    let threshold = cc::cc_threshold(q, m, opts.cc_tol);
    if !(f.amax() <= threshold) {
        return Err(Error::NotCentral {
            residual: f.amax(),
            threshold,
        });
    }
    let basis = symmetry_generators(form, q)?;
    let completion = match &opts.pivot_rows {
        Some(rows) => build_p_with_pivots(&basis, rows)?,
        None => build_p(&basis)?,
    };
    let jacobian = degeneracy_operator(form, q, m, opts.normalization)?;
    Ok(finish(form, basis.k(), completion, jacobian, opts.det_tol))
}

fn finish(
    form: Form,
    k: usize,
    completion: Completion,
    jacobian: DMatrix<f64>,
    det_tol: f64,
) -> ReductionReport {
    let dim = jacobian.nrows();
    let conjugated = &completion.p_inverse * &jacobian * &completion.p;
    let j2 = conjugated.view((k, k), (dim - k, dim - k)).into_owned();
    let det_j2 = j2.determinant();
    let det_scale: f64 = j2.row_iter().map(|r| r.norm()).product();
    let zero_column_residual = conjugated.columns(0, k).amax();
    let verdict = if det_j2.abs() > det_tol * det_scale {
        Verdict::Nondegenerate
    } else {
        Verdict::Degenerate
    };
    ReductionReport {
        form,
        p: completion.p,
        p_inverse: completion.p_inverse,
        pivot_rows: completion.pivot_rows,
        jacobian,
        conjugated,
        j2,
        det_j2,
        det_scale,
        zero_column_residual,
        verdict,
    }
}

pub fn degeneracy_verdict(
    form: Form,
    q: &Configuration,
    m: &Masses,
    det_tol: f64,
) -> Result<(Verdict, f64)> {
    let opts = ReduceOptions {
        det_tol,
        ..ReduceOptions::default()
    };
    let r = reduce_with(form, q, m, &opts)?;
    Ok((r.verdict, r.det_j2))
}

/// Eigenvalues of the normalized Jacobian, for inspection only.
pub fn spectrum(form: Form, q: &Configuration, m: &Masses) -> Result<Vec<Complex<f64>>> {
    let j = degeneracy_operator(form, q, m, Normalization::Normalized)?;
    let mut eigs: Vec<Complex<f64>> = j.complex_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.re.total_cmp(&b.re)));
    Ok(eigs)
}

/// Number of eigenvalues with modulus at most `rel` times the spectral radius.
pub fn count_near_zero(eigs: &[Complex<f64>], rel: f64) -> usize {
    let radius = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    eigs.iter().filter(|z| z.norm() <= rel * radius).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cc::fixtures::*;
    use approx::assert_relative_eq;

    fn sqrt2() -> f64 {
        2f64.sqrt()
    }

    #[test]
    fn square_generators() {
        let b = symmetry_generators(Form::I, &square()).unwrap();
        assert_eq!(
            b.kinds,
            vec![GeneratorKind::Rotation, GeneratorKind::Scaling]
        );
        assert_eq!(
            b.generators[0].as_slice(),
            &[-0.0, 1.0, -1.0, 0.0, -0.0, -1.0, 1.0, 0.0]
        );
        assert_eq!(b.generators[1].as_slice(), square().coords());
        let b2 = symmetry_generators(Form::II, &square()).unwrap();
        assert_eq!(b2.k(), 3);
        assert_eq!(
            b2.generators[0].as_slice(),
            &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]
        );
        assert_eq!(
            b2.generators[1].as_slice(),
            &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]
        );
    }

    #[test]
    fn rhombus_leading_pivots_inverse() {
        let a = 0.8;
        let b = symmetry_generators(Form::III, &rhombus(a)).unwrap();
        let c = build_p_with_pivots(&b, &[0, 1, 2, 3]).unwrap();
        let r = a * a + 1.0;
        assert_eq!(
            c.p.column(2).as_slice(),
            &[-a, 0.0, 0.0, -1.0, a, 0.0, 0.0, 1.0]
        );
        assert_relative_eq!(c.p_inverse[(0, 0)], 1.0 / r, epsilon = 1e-14);
        assert_relative_eq!(
            (&c.p * &c.p_inverse - DMatrix::identity(8, 8)).amax(),
            0.0,
            epsilon = 1e-12
        );
        assert!(c.p_inverse.iter().any(|v| (v.abs() - a / r).abs() < 1e-14));
    }

    #[test]
    fn unit_square_form_three_p() {
        let b = symmetry_generators(Form::III, &unit_square()).unwrap();
        let c = build_p_with_pivots(&b, &[0, 1, 2, 3]).unwrap();
        let expected = [
            [1, 0, 0, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 0, 0, 0],
            [0, -1, 0, 1, 0, 0, 0, 0],
            [-1, 0, 1, 0, 0, 0, 0, 0],
            [0, -1, -1, 1, 1, 0, 0, 0],
            [1, 0, -1, -1, 0, 1, 0, 0],
            [-1, -1, 0, 1, 0, 0, 1, 0],
            [1, -1, -1, 0, 0, 0, 0, 1],
        ];
        for (r, row) in expected.iter().enumerate() {
            for (col, v) in row.iter().enumerate() {
                assert_relative_eq!(c.p_inverse[(r, col)], *v as f64, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn square_determinants() {
        let m = Masses::equal(4).unwrap();
        let d1 = reduce(Form::I, &square(), &m).unwrap();
        assert_relative_eq!(
            d1.det_j2,
            459.0 / 32.0 + 3249.0 * sqrt2() / 256.0,
            max_relative = 1e-12
        );
        let d2 = reduce(Form::II, &square(), &m).unwrap();
        assert_relative_eq!(
            d2.det_j2,
            999.0 / 128.0 + 1755.0 * sqrt2() / 512.0,
            max_relative = 1e-12
        );
        let d3 = reduce(Form::III, &unit_square(), &m).unwrap();
        assert_relative_eq!(
            d3.det_j2,
            72.0 + 297.0 * sqrt2() / 2.0,
            max_relative = 1e-12
        );
        for r in [d1, d2, d3] {
            assert_eq!(r.verdict, Verdict::Nondegenerate);
            assert!(r.zero_column_residual < 1e-12);
        }
    }

    #[test]
    fn weighted_square_form_one_differs_by_inertia_factor() {
        let m = Masses::equal(4).unwrap();
        let opts = ReduceOptions {
            normalization: Normalization::Weighted,
            ..Default::default()
        };
        let w = reduce_with(Form::I, &square(), &m, &opts).unwrap();
        let n = reduce(Form::I, &square(), &m).unwrap();
        assert_relative_eq!(n.det_j2 / w.det_j2, 8.0, max_relative = 1e-12);
    }

    #[test]
    fn lagrange_determinant() {
        let m = Masses::new(vec![2.0, 3.0, 5.0]).unwrap();
        let (v, d) = degeneracy_verdict(Form::III, &equilateral(), &m, DEFAULT_DET_TOL).unwrap();
        assert_eq!(v, Verdict::Nondegenerate);
        assert_relative_eq!(d, 31.0 / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn triangle_center_critical_mass_is_degenerate() {
        let s3 = 3f64.sqrt();
        let m4 = (81.0 + 64.0 * s3) / 249.0;
        let m = Masses::new(vec![1.0, 1.0, 1.0, m4]).unwrap();
        let (v, _) = degeneracy_verdict(Form::II, &triangle_center(), &m, DEFAULT_DET_TOL).unwrap();
        assert_eq!(v, Verdict::Degenerate);
    }

    #[test]
    fn triangle_center_form_one_value() {
        let s3 = 3f64.sqrt();
        let m = Masses::equal(4).unwrap();
        let r = reduce(Form::I, &triangle_center(), &m).unwrap();
        let expected =
            (133.0 - 60.0 * s3) * (s3 + 3.0).powi(2) * (-249.0 + 81.0 + 64.0 * s3).powi(2)
                / 881792.0;
        assert_eq!(r.verdict, Verdict::Nondegenerate);
        assert_relative_eq!(r.det_j2, expected, max_relative = 1e-10);
    }

    #[test]
    fn not_central_rejected() {
        let q = Configuration::new(vec![1.1, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0]).unwrap();
        let err = reduce(Form::I, &q, &Masses::equal(4).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NotCentral { .. }));
    }

    #[test]
    fn two_body_basis_spans_everything() {
        let two = Configuration::new(vec![-1.0, 0.0, 1.0, 0.0]).unwrap();
        let b = symmetry_generators(Form::III, &two).unwrap();
        assert_eq!(b.k(), 4);
        let c = build_p(&b).unwrap();
        assert_relative_eq!(
            (&c.p * &c.p_inverse - DMatrix::identity(4, 4)).amax(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn bad_pivots_rejected() {
        let b = symmetry_generators(Form::II, &square()).unwrap();
        assert!(build_p_with_pivots(&b, &[0, 1]).is_err());
        assert!(build_p_with_pivots(&b, &[0, 1, 9]).is_err());
        // Rows 0 and 2 are both x-coordinates with equal translation entries
        // and rotation entries 0 and 0: the block is singular.
        assert!(matches!(
            build_p_with_pivots(&b, &[0, 2, 4]),
            Err(Error::Internal(_))
        ));
    }

    #[test]
    fn square_trivial_zero_counts() {
        let m = Masses::equal(4).unwrap();
        let expected = [
            (Form::I, square(), 2),
            (Form::II, square(), 3),
            (Form::III, unit_square(), 4),
        ];
        for (form, q, k) in expected {
            let eigs = spectrum(form, &q, &m).unwrap();
            assert_eq!(count_near_zero(&eigs, 1e-9), k, "{form}");
        }
    }
}
