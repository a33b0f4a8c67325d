//! Problem data and the extremal operator toolkit.
//!
//! The model problem lives on an annulus `rho < |x| < R` in dimension `N`.
//! Second order terms are measured through the Pucci extremal operators

//! `M+(X) = Lambda * (sum of positive eigenvalues) + lambda * (sum of negative
//! eigenvalues)` and `M-(X)` with the weights swapped. First order terms carry
//! a quadratic growth weight `B` and a linear weight `b`, the zeroth order
//! term a coercivity weight `c0`, and the forcing is an inverse power
//! `M (r - rho)^mu u^{-alpha}` that blows up at the inner boundary.
//!
//! Everything downstream (transforms, barriers, the solver) consumes the
//! [`ProblemSpec`] assembled here and the derived constants `l1 = B / Lambda`,
//! `l2 = B / lambda` of the exponential substitutions, together with the
//! dimension-like exponents `N+` and `N-` of the radial comparison weights.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform ellipticity bounds `0 < lambda <= Lambda`.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipticity {
    pub lambda: f64,
    pub Lambda: f64,
}

impl Ellipticity {
    pub fn new(lambda: f64, lambda_up: f64) -> Self {
        Ellipticity {
            lambda,
            Lambda: lambda_up,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Validation(format!(
                "lambda must be positive and finite (key lambda, got {})",
                self.lambda
            )));
        }
        if !(self.Lambda >= self.lambda && self.Lambda.is_finite()) {
            return Err(Error::Validation(format!(
                "Lambda must satisfy Lambda >= lambda (key Lambda, got {})",
                self.Lambda
            )));
        }
        Ok(())
    }
}

/// First and zeroth order growth weights of the structure condition.
///
/// `B` weighs the quadratic gradient term, `b` the linear one, `d` the
/// zeroth order Lipschitz envelope and `c0` the coercive zeroth order term
/// `-c0 u` of the model equation. All are nonnegative; `c0 = 0` is admitted
/// so the degenerate harmonic sanity case can run, but the singular solver
/// demands `c0 > 0` whenever the forcing amplitude is positive.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    pub B: f64,
    pub b: f64,
    pub d: f64,
    pub c0: f64,
}

impl GrowthParams {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [("B", self.B), ("b", self.b), ("d", self.d), ("c0", self.c0)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!(
                    "{key} must be nonnegative and finite (key {key}, got {v})"
                )));
            }
        }
        Ok(())
    }
}

/// Inverse power forcing `M (r - rho)^mu u^{-alpha}`.
///
/// `C1 <= C2` bracket the forcing coefficient in the comparison arguments;
/// `C1` feeds the lower barrier inequalities and `C2` the upper ones. `M` is
/// the amplitude actually placed in the equation; `M = 0` switches the
/// forcing off entirely.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularForcing {
    pub mu: f64,
    pub alpha: f64,
    pub M: f64,
    pub C1: f64,
    pub C2: f64,
}

impl SingularForcing {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::Validation(format!(
                "mu must be nonnegative (key mu, got {})",
                self.mu
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Validation(format!(
                "alpha must be positive (key alpha, got {})",
                self.alpha
            )));
        }
        if !(self.M >= 0.0 && self.M.is_finite()) {
            return Err(Error::Validation(format!(
                "M must be nonnegative (key M, got {})",
                self.M
            )));
        }
        if !(self.C1 > 0.0 && self.C1.is_finite()) {
            return Err(Error::Validation(format!(
                "C1 must be positive (key C1, got {})",
                self.C1
            )));
        }
        if !(self.C2 >= self.C1 && self.C2.is_finite()) {
            return Err(Error::Validation(format!(
                "C2 must satisfy C1 <= C2 (key C2, got {})",
                self.C2
            )));
        }
        Ok(())
    }
}

/// Annulus `rho < r < R` with outer Dirichlet datum `L` (the inner datum is
/// zero).
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusGeometry {
    pub rho: f64,
    pub R: f64,
    pub L: f64,
}

impl AnnulusGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Validation(format!(
                "rho must be positive (key rho, got {})",
                self.rho
            )));
        }
        if !(self.R > self.rho && self.R.is_finite()) {
            return Err(Error::Validation(format!(
                "R must exceed rho (key R, got {})",
                self.R
            )));
        }
        if !(self.L >= 0.0 && self.L.is_finite()) {
            return Err(Error::Validation(format!(
                "L must be nonnegative (key L, got {})",
                self.L
            )));
        }
        Ok(())
    }

    /// Annulus width `R - rho`.
    pub fn width(&self) -> f64 {
        self.R - self.rho
    }
}

/// Complete description of one model problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub ell: Ellipticity,
    pub growth: GrowthParams,
    pub forcing: SingularForcing,
    pub geometry: AnnulusGeometry,
    pub dim: usize,
}

impl Default for ProblemSpec {
    /// Baseline configuration used across the regression suite: unit
    /// ellipticity, `B = 0.1`, no linear gradient term, `c0 = 0.1`, unit
    /// forcing amplitude on the annulus `(1, 2)` with outer datum `1`.
    fn default() -> Self {
        ProblemSpec {
            ell: Ellipticity::new(1.0, 1.0),
            growth: GrowthParams {
                B: 0.1,
                b: 0.0,
                d: 0.0,
                c0: 0.1,
            },
            forcing: SingularForcing {
                mu: 0.0,
                alpha: 1.0,
                M: 1.0,
                C1: 1.0,
                C2: 1.0,
            },
            geometry: AnnulusGeometry {
                rho: 1.0,
                R: 2.0,
                L: 1.0,
            },
            dim: 2,
        }
    }
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        self.ell.validate()?;
        self.growth.validate()?;
        self.forcing.validate()?;
        self.geometry.validate()?;
        if self.dim < 1 {
            return Err(Error::Validation(format!(
                "dim must be at least 1 (key dim, got {})",
                self.dim
            )));
        }
        Ok(())
    }
}

/// Constants derived from the ellipticity and the quadratic growth weight.
///
/// `l1 = B / Lambda` and `l2 = B / lambda` are the rates of the exponential
/// substitutions that absorb the quadratic gradient term. `n_plus` and
/// `n_minus` are the effective dimensions `(lambda/Lambda)(N-1) + 1` and
/// `(Lambda/lambda)(N-1) + 1` bounding the radial comparison weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub l1: f64,
    pub l2: f64,
    pub n_plus: f64,
    pub n_minus: f64,
}

/// `l1`, `l2`, `N+` and `N-` for a problem description.
pub fn derived_constants(spec: &ProblemSpec) -> DerivedConstants {
    let ell = &spec.ell;
    let nm1 = (spec.dim - 1) as f64;
    DerivedConstants {
        l1: spec.growth.B / ell.Lambda,
        l2: spec.growth.B / ell.lambda,
        n_plus: ell.lambda / ell.Lambda * nm1 + 1.0,
        n_minus: ell.Lambda / ell.lambda * nm1 + 1.0,
    }
}

/// Which extremal operator to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PucciSign {
    Plus,
    Minus,
}

/// Pucci extremal operator of a symmetric matrix.
///
/// Eigenvalues are weighted by `Lambda` and `lambda`: the plus operator puts
/// `Lambda` on the positive ones, the minus operator puts `lambda` there.
/// Equivalently `M+(X)` is the supremum of `tr(A X)` over symmetric `A` with
/// spectrum in `[lambda, Lambda]` and `M-(X)` the infimum; the test suite
/// checks the eigenvalue form against that envelope definition by sampling.
///
/// Returns an error when the matrix is not square or not symmetric.
pub fn pucci(m: &DMatrix<f64>, ell: &Ellipticity, sign: PucciSign) -> Result<f64> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Validation(format!(
            "pucci needs a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut defect = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            defect = defect.max((m[(i, j)] - m[(j, i)]).abs());
            scale = scale.max(m[(i, j)].abs());
        }
    }
    if defect > 1e-10 * (1.0 + scale) {
        return Err(Error::NotSymmetric { defect });
    }
    let eigs = m.symmetric_eigenvalues();
    let (w_pos, w_neg) = match sign {
        PucciSign::Plus => (ell.Lambda, ell.lambda),
        PucciSign::Minus => (ell.lambda, ell.Lambda),
    };
    Ok(eigs
        .iter()
        .map(|&e| if e >= 0.0 { w_pos * e } else { w_neg * e })
        .sum())
}

/// The four model operators built from the extremal operators and the
/// gradient growth weights.
///
/// `F1Plus = M+ + B|Du|^2 + b|Du|` and `F1Minus = M- - B|Du|^2 - b|Du|` are
/// the outer envelope pair; `F2Plus = M+ + b|Du|` and `F2Minus = M- - b|Du|`
/// drop the quadratic term and are the pair the exponential substitutions
/// land on. For any argument `F1Minus <= F2Minus <= F2Plus <= F1Plus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelOperator {
    F1Plus,
    F1Minus,
    F2Plus,
    F2Minus,
}

/// Evaluate a model operator on a gradient magnitude and a symmetric Hessian.
pub fn eval_model(
    op: ModelOperator,
    grad_norm: f64,
    hessian: &DMatrix<f64>,
    ell: &Ellipticity,
    growth: &GrowthParams,
) -> Result<f64> {
    if !(grad_norm >= 0.0 && grad_norm.is_finite()) {
        return Err(Error::Validation(format!(
            "grad_norm must be nonnegative (got {grad_norm})"
        )));
    }
    let g = grad_norm;
    Ok(match op {
        ModelOperator::F1Plus => {
            pucci(hessian, ell, PucciSign::Plus)? + growth.B * g * g + growth.b * g
        }
        ModelOperator::F1Minus => {
            pucci(hessian, ell, PucciSign::Minus)? - growth.B * g * g - growth.b * g
        }
        ModelOperator::F2Plus => pucci(hessian, ell, PucciSign::Plus)? + growth.b * g,
        ModelOperator::F2Minus => pucci(hessian, ell, PucciSign::Minus)? - growth.b * g,
    })
}

/// Structure condition envelope for an operator difference.
///
/// For Hessian difference `dM = X1 - X2`, gradients `p1`, `p2` and zeroth
/// order arguments `r1`, `r2` the admissible spread of
/// `F(X1, p1, r1) - F(X2, p2, r2)` is
///
/// ```text
/// lower = M-(dM) - B (|p1| + |p2|) |p1 - p2| - b |p1 - p2| - d (r1 - r2)+
/// upper = M+(dM) + B (|p1| + |p2|) |p1 - p2| + b |p1 - p2| + d (r2 - r1)+
/// ```
///
/// Returns `(lower, upper)`.
pub fn sc_envelope(
    d_m: &DMatrix<f64>,
    p1: &[f64],
    p2: &[f64],
    r1: f64,
    r2: f64,
    ell: &Ellipticity,
    growth: &GrowthParams,
) -> Result<(f64, f64)> {
    if p1.len() != p2.len() {
        return Err(Error::Validation(format!(
            "gradient arguments must share a dimension ({} vs {})",
            p1.len(),
            p2.len()
        )));
    }
    let norm = |p: &[f64]| p.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = p1.iter().zip(p2).map(|(a, b)| a - b).collect();
    let sum_norm = norm(p1) + norm(p2);
    let diff_norm = norm(&diff);
    let grad_spread = growth.B * sum_norm * diff_norm + growth.b * diff_norm;
    let lower =
        pucci(d_m, ell, PucciSign::Minus)? - grad_spread - growth.d * (r1 - r2).max(0.0);
    let upper =
        pucci(d_m, ell, PucciSign::Plus)? + grad_spread + growth.d * (r2 - r1).max(0.0);
    Ok((lower, upper))
}
