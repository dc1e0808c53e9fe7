//! Weighted algebraic fitting of implicit quadrics to point-normal
//! neighborhoods, and orthogonal projection of points onto the fitted
//! quadric.
//!
//! The objective is
//!
//! ```text
//! f(a) = sum_i  w_pos_i * q(V_i)^2  +  w_nrm_i * |n_i - grad q(V_i)|^2
//! ```
//!
//! which is quadratic in the 10 quadric coefficients, so its minimizer is the
//! solution of a 10x10 symmetric positive (semi-)definite linear system. The
//! system is solved by Cholesky factorization with a Tikhonov fallback ladder
//! for the semi-definite cases that flat or razor-thin neighborhoods produce.

use nalgebra::{Matrix3, Matrix4, Point3, SMatrix, SVector, Vector3, Vector4};
use thiserror::Error;

use crate::mesh::Neighborhood;

/// Coefficient vector length of an implicit quadric.
pub const QUADRIC_COEFFS: usize = 10;

/// Errors from solving the fit system or projecting onto a quadric.
#[derive(Debug, Error)]
pub enum FitError {
    #[error("normal-equation system could not be factorized, even with regularization")]
    SolveFailed,
    #[error("quadric gradient vanished (norm {norm:.3e}); projection undefined")]
    GradientVanished { norm: f64 },
}

/// Implicit quadric `q(x,y,z) = a11 x^2 + a22 y^2 + a33 z^2 + a12 xy + a13 xz
/// + a23 yz + a14 x + a24 y + a34 z + a44`.
///
/// Coefficients are stored in exactly that order: (x^2, y^2, z^2, xy, xz, yz,
/// x, y, z, 1). The same ordering is used in every file dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadric {
    coeffs: [f64; QUADRIC_COEFFS],
}

impl Quadric {
    pub fn new(coeffs: [f64; QUADRIC_COEFFS]) -> Self {
        Self { coeffs }
    }

    pub fn coefficients(&self) -> &[f64; QUADRIC_COEFFS] {
        &self.coeffs
    }

    /// Evaluate the quadric polynomial at a point.
    pub fn evaluate(&self, p: &Point3<f64>) -> f64 {
        let c = &self.coeffs;
        let (x, y, z) = (p.x, p.y, p.z);
        c[0] * x * x
            + c[1] * y * y
            + c[2] * z * z
            + c[3] * x * y
            + c[4] * x * z
            + c[5] * y * z
            + c[6] * x
            + c[7] * y
            + c[8] * z
            + c[9]
    }

    /// Analytic gradient of the quadric at a point.
    pub fn gradient(&self, p: &Point3<f64>) -> Vector3<f64> {
        let c = &self.coeffs;
        let (x, y, z) = (p.x, p.y, p.z);
        Vector3::new(
            2.0 * c[0] * x + c[3] * y + c[4] * z + c[6],
            2.0 * c[1] * y + c[3] * x + c[5] * z + c[7],
            2.0 * c[2] * z + c[4] * x + c[5] * y + c[8],
        )
    }

    /// Hessian of the quadric (constant over space).
    pub fn hessian(&self) -> Matrix3<f64> {
        let c = &self.coeffs;
        Matrix3::new(
            2.0 * c[0],
            c[3],
            c[4],
            c[3],
            2.0 * c[1],
            c[5],
            c[4],
            c[5],
            2.0 * c[2],
        )
    }

    /// The quadric `q'` with `q'(x) = q(x - t)`, i.e. this quadric's zero set
    /// translated by `+t`. The transport is exact: the quadratic block is
    /// unchanged, the linear block is the gradient at `-t`, the constant is
    /// the value at `-t`.
    pub fn translated(&self, t: &Vector3<f64>) -> Quadric {
        let at = Point3::from(-t);
        let lin = self.gradient(&at);
        let cst = self.evaluate(&at);
        let c = &self.coeffs;
        Quadric::new([c[0], c[1], c[2], c[3], c[4], c[5], lin.x, lin.y, lin.z, cst])
    }
}

/// Per-sample fitting weights, parallel to `Neighborhood::samples`.
///
/// For the center sample the position weight is 1 and the normal weight 1e-4.
#[derive(Debug, Clone)]
pub struct FitWeights {
    pub position: Vec<f64>,
    pub normal: Vec<f64>,
}

/// The stationarity system `matrix * a = rhs` of the fitting objective.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    pub matrix: SMatrix<f64, 10, 10>,
    pub rhs: SVector<f64, 10>,
}

/// A solved fit with its diagnostic flags.
#[derive(Debug, Clone, Copy)]
pub struct QuadricFit {
    pub quadric: Quadric,
    /// The Tikhonov fallback fired.
    pub regularized: bool,
    /// The quadratic coefficients are negligible against the linear ones.
    pub degenerate_to_plane: bool,
}

/// Distance- and normal-deviation weights:
/// `w_pos = exp(-|V - V_i|^4)`, `w_nrm = 1e-4 * exp(-|n - n_i|^2)`.
///
/// Stored normals are unit, so the normalization the weight formula applies
/// to the normals is the identity. Weights are floored at the smallest
/// positive float so they stay strictly positive even when the exponent
/// underflows.
pub fn compute_weights(neighborhood: &Neighborhood) -> FitWeights {
    let center = &neighborhood.center;
    let mut position = Vec::with_capacity(neighborhood.len());
    let mut normal = Vec::with_capacity(neighborhood.len());
    for s in &neighborhood.samples {
        let d2 = (center.position - s.position).norm_squared();
        position.push((-(d2 * d2)).exp().max(f64::MIN_POSITIVE));
        let dn2 = (center.normal - s.normal).norm_squared();
        normal.push((1e-4 * (-dn2).exp()).max(f64::MIN_POSITIVE));
    }
    FitWeights { position, normal }
}

/// Monomial vector (x^2, y^2, z^2, xy, xz, yz, x, y, z, 1) at a point.
pub fn monomials(p: &Point3<f64>) -> SVector<f64, 10> {
    let (x, y, z) = (p.x, p.y, p.z);
    SVector::<f64, 10>::from_column_slice(&[x * x, y * y, z * z, x * y, x * z, y * z, x, y, z, 1.0])
}

/// Jacobian of the quadric gradient with respect to the coefficients: a 3x10
/// matrix `J` with `grad q(p) = J(p) * a`.
pub fn gradient_jacobian(p: &Point3<f64>) -> SMatrix<f64, 3, 10> {
    let (x, y, z) = (p.x, p.y, p.z);
    SMatrix::<f64, 3, 10>::from_row_slice(&[
        2.0 * x,
        0.0,
        0.0,
        y,
        z,
        0.0,
        1.0,
        0.0,
        0.0,
        0.0,
        0.0,
        2.0 * y,
        0.0,
        x,
        0.0,
        z,
        0.0,
        1.0,
        0.0,
        0.0,
        0.0,
        0.0,
        2.0 * z,
        0.0,
        x,
        y,
        0.0,
        0.0,
        1.0,
        0.0,
    ])
}

/// Assemble the stationarity system of the objective over a neighborhood.
///
/// Each sample contributes `w_pos * b b^T` from the position term (`b` the
/// monomial vector) and `w_nrm * J^T J` plus right-hand side `w_nrm * J^T n`
/// from the normal term. The matrix is symmetric positive semi-definite by
/// construction.
pub fn assemble_normal_equations(
    neighborhood: &Neighborhood,
    weights: &FitWeights,
) -> NormalEquations {
    assert_eq!(neighborhood.len(), weights.position.len());
    assert_eq!(neighborhood.len(), weights.normal.len());
    let mut matrix = SMatrix::<f64, 10, 10>::zeros();
    let mut rhs = SVector::<f64, 10>::zeros();
    for (i, s) in neighborhood.samples.iter().enumerate() {
        let b = monomials(&s.position);
        let j = gradient_jacobian(&s.position);
        matrix += weights.position[i] * b * b.transpose();
        matrix += weights.normal[i] * j.transpose() * j;
        rhs += weights.normal[i] * j.transpose() * s.normal;
    }
    NormalEquations { matrix, rhs }
}

/// Value of the fitting objective for a candidate quadric.
pub fn objective_value(neighborhood: &Neighborhood, weights: &FitWeights, q: &Quadric) -> f64 {
    let mut f = 0.0;
    for (i, s) in neighborhood.samples.iter().enumerate() {
        let r = q.evaluate(&s.position);
        f += weights.position[i] * r * r;
        f += weights.normal[i] * (s.normal - q.gradient(&s.position)).norm_squared();
    }
    f
}

fn refined_solve(
    chol: &nalgebra::Cholesky<f64, nalgebra::Const<10>>,
    matrix: &SMatrix<f64, 10, 10>,
    rhs: &SVector<f64, 10>,
) -> SVector<f64, 10> {
    let mut a = chol.solve(rhs);
    // Two rounds of iterative refinement; cheap and recovers the digits the
    // factorization loses on ill-conditioned neighborhoods.
    for _ in 0..2 {
        let residual = rhs - matrix * a;
        a += chol.solve(&residual);
    }
    a
}

fn fit_from_solution(a: SVector<f64, 10>, regularized: bool) -> QuadricFit {
    let mut coeffs = [0.0; QUADRIC_COEFFS];
    coeffs.copy_from_slice(a.as_slice());
    let max_quadratic = coeffs[..6].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let max_linear = coeffs[6..9].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    QuadricFit {
        quadric: Quadric::new(coeffs),
        regularized,
        degenerate_to_plane: max_quadratic <= 1e-10 * max_linear,
    }
}

/// Solve the stationarity system for the minimizing coefficient vector.
///
/// Tries a plain Cholesky factorization first; if the matrix is not
/// numerically positive definite, retries with a Tikhonov term `lambda * I`,
/// `lambda = 1e-9 * trace / 10`, doubling `lambda` up to 8 times. The
/// returned fit carries a `regularized` flag when the fallback fired and
/// `degenerate_to_plane` when the quadratic coefficients are negligible
/// against the linear ones.
pub fn solve_quadric(system: &NormalEquations) -> Result<QuadricFit, FitError> {
    if let Some(chol) = system.matrix.cholesky() {
        let a = refined_solve(&chol, &system.matrix, &system.rhs);
        return Ok(fit_from_solution(a, false));
    }
    let mut lambda = 1e-9 * system.matrix.trace() / 10.0;
    for _ in 0..=8 {
        let reg = system.matrix + SMatrix::<f64, 10, 10>::identity() * lambda;
        if let Some(chol) = reg.cholesky() {
            let a = refined_solve(&chol, &reg, &system.rhs);
            return Ok(fit_from_solution(a, true));
        }
        lambda *= 2.0;
    }
    Err(FitError::SolveFailed)
}

/// Tolerances and iteration limits for the foot-point projection.
#[derive(Debug, Clone, Copy)]
pub struct ProjectionParams {
    pub max_iterations: usize,
    pub max_step_halvings: usize,
    /// Scales the on-surface tolerance: `eps_q = value_tolerance * (1 + |q(V)|)`.
    pub value_tolerance: f64,
    /// Maximum allowed angle (radians) between `V - p(V)` and the gradient.
    pub angle_tolerance: f64,
    pub fallback_iterations: usize,
    pub gradient_floor: f64,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            max_step_halvings: 20,
            value_tolerance: 1e-10,
            angle_tolerance: 1e-8,
            fallback_iterations: 100,
            gradient_floor: 1e-12,
        }
    }
}

/// Result of projecting a point onto a quadric.
#[derive(Debug, Clone, Copy)]
pub struct Projection {
    pub point: Point3<f64>,
    /// Newton did not converge; this is the last first-order foot-point
    /// iterate instead.
    pub first_order: bool,
}

fn projection_residual(q: &Quadric, v: &Point3<f64>, w: &Point3<f64>, lambda: f64) -> Vector4<f64> {
    let g = q.gradient(w);
    let pos = v - w - g * lambda;
    Vector4::new(pos.x, pos.y, pos.z, q.evaluate(w))
}

/// Orthogonal projection of `v` onto the zero set of `q`.
///
/// Solves the Lagrange system `{ q(W) = 0, V - W = lambda * grad q(W) }` by
/// damped Newton iteration, initialized at the first-order foot point. On
/// non-convergence it falls back to repeated first-order foot-point steps and
/// flags the result. A vanishing gradient anywhere along the path is an
/// error.
pub fn project_point(
    q: &Quadric,
    v: &Point3<f64>,
    params: &ProjectionParams,
) -> Result<Projection, FitError> {
    let qv = q.evaluate(v);
    let g0 = q.gradient(v);
    let g0_norm2 = g0.norm_squared();
    if g0_norm2.sqrt() <= params.gradient_floor {
        return Err(FitError::GradientVanished { norm: g0_norm2.sqrt() });
    }
    let eps_q = params.value_tolerance * (1.0 + qv.abs());

    let converged = |w: &Point3<f64>| -> Option<bool> {
        if q.evaluate(w).abs() > eps_q {
            return Some(false);
        }
        let u = v - w;
        let u_norm = u.norm();
        if u_norm <= eps_q {
            return Some(true);
        }
        let g = q.gradient(w);
        let g_norm = g.norm();
        if g_norm <= params.gradient_floor {
            return None; // singular point on the surface
        }
        let sin_angle = ((u / u_norm).cross(&(g / g_norm))).norm().min(1.0);
        Some(sin_angle.asin() <= params.angle_tolerance)
    };

    let mut lambda = qv / g0_norm2;
    let mut w = v - g0 * lambda;
    let mut newton_ok = true;

    for _ in 0..params.max_iterations {
        match converged(&w) {
            Some(true) => return Ok(Projection { point: w, first_order: false }),
            Some(false) => {}
            None => {
                return Err(FitError::GradientVanished { norm: q.gradient(&w).norm() });
            }
        }

        let g = q.gradient(&w);
        let g_norm = g.norm();
        if g_norm <= params.gradient_floor {
            return Err(FitError::GradientVanished { norm: g_norm });
        }
        let residual = projection_residual(q, v, &w, lambda);
        let h = q.hessian();
        let mut jac = Matrix4::zeros();
        jac.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&(-Matrix3::identity() - h * lambda));
        jac.fixed_view_mut::<3, 1>(0, 3).copy_from(&(-g));
        jac.fixed_view_mut::<1, 3>(3, 0).copy_from(&g.transpose());

        let delta = match jac.lu().solve(&(-residual)) {
            Some(d) => d,
            None => {
                newton_ok = false;
                break;
            }
        };

        let base_norm = residual.norm();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=params.max_step_halvings {
            let w_trial = w + Vector3::new(delta.x, delta.y, delta.z) * alpha;
            let lambda_trial = lambda + delta.w * alpha;
            if projection_residual(q, v, &w_trial, lambda_trial).norm() < base_norm {
                w = w_trial;
                lambda = lambda_trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            newton_ok = false;
            break;
        }
    }

    if newton_ok {
        match converged(&w) {
            Some(true) => return Ok(Projection { point: w, first_order: false }),
            Some(false) => {}
            None => {
                return Err(FitError::GradientVanished { norm: q.gradient(&w).norm() });
            }
        }
    }

    // First-order foot-point fallback.
    let mut w = *v;
    for _ in 0..params.fallback_iterations {
        let g = q.gradient(&w);
        let n2 = g.norm_squared();
        if n2.sqrt() <= params.gradient_floor {
            return Err(FitError::GradientVanished { norm: n2.sqrt() });
        }
        w -= g * (q.evaluate(&w) / n2);
    }
    Ok(Projection { point: w, first_order: true })
}
