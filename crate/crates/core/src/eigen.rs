//! Principal half eigenpairs of the radial extremal operator.
//!
//! The pair `(lambda_hat, psi)` solves, on the annulus `(rho, R)` with zero
//! boundary values and `psi > 0` inside,
//!
//! ```text
//! M-(D^2 psi) - b |D psi| + lambda_hat m(r) psi = 0,
//! m(r) = (r - rho)^mu  (or 1 without a weight),
//! ```
//!
//! written radially with the minus operator weights. Because the operator is
//! positively homogeneous the eigenfunction is determined up to scale; it is
//! normalized to maximum one.
//!
//! The solver is inverse power iteration with policy refresh: each sweep
//! freezes the extremal weights and the gradient sign at the current
//! iterate, solves the resulting linear two point problem with the weighted
//! iterate as source, reads the eigenvalue off the maximum of the solution
//! and renormalizes. The frozen system is an M matrix with zero order term
//! absent, so the sweep output of a positive source is positive and
//! positivity of the iterate is preserved up to rounding; it is checked
//! every sweep. Iteration stops once the eigenvalue is stable to `1e-12`
//! relative over three consecutive sweeps and no extremal weight switched.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, RadialGrid};
use crate::params::{AnnulusGeometry, Ellipticity, PucciSign};
use crate::radial::theta;

/// Converged principal pair together with the data defining its operator,
/// so the residual can be recomputed from the pair alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda_hat: f64,
    pub psi: GridFunction,
    pub ell: Ellipticity,
    pub b: f64,
    pub dim: usize,
    pub weight_mu: Option<f64>,
    pub sweeps: usize,
}

impl EigenPair {
    /// Weight `m(r)` of the eigenvalue term.
    pub fn weight(&self, r: f64) -> f64 {
        match self.weight_mu {
            Some(mu) => (r - self.psi.grid().a()).max(0.0).powf(mu),
            None => 1.0,
        }
    }

    /// Maximum interior defect of the eigenequation, evaluated with the
    /// grid stencils.
    pub fn residual(&self) -> f64 {
        let d1 = self.psi.derivative();
        let d2 = self.psi.second_derivative();
        let g = self.psi.grid();
        let mut worst = 0.0f64;
        for i in 1..g.len() - 1 {
            let r = g.node(i);
            let pp = d1.value(i);
            let ppp = d2.value(i);
            let tangential = if self.dim > 1 {
                theta(pp, &self.ell, PucciSign::Minus) * (self.dim - 1) as f64 * pp / r
            } else {
                0.0
            };
            let res = theta(ppp, &self.ell, PucciSign::Minus) * ppp + tangential
                - self.b * pp.abs()
                + self.lambda_hat * self.weight(r) * self.psi.value(i);
            worst = worst.max(res.abs());
        }
        worst
    }
}

fn weight_at(weight_mu: Option<f64>, rho: f64, r: f64) -> f64 {
    match weight_mu {
        Some(mu) => (r - rho).max(0.0).powf(mu),
        None => 1.0,
    }
}

struct FrozenRows {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

fn freeze_rows(
    psi: &GridFunction,
    ell: &Ellipticity,
    b: f64,
    dim: usize,
) -> Result<FrozenRows> {
    let grid = psi.grid();
    let n = grid.len();
    let d1 = psi.derivative();
    let d2 = psi.second_derivative();
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    diag[0] = 1.0;
    diag[n - 1] = 1.0;
    for i in 1..n - 1 {
        let r = grid.node(i);
        let hm = r - grid.node(i - 1);
        let hp = grid.node(i + 1) - r;
        let pp = d1.value(i);
        let ppp = d2.value(i);
        let t2 = theta(ppp, ell, PucciSign::Minus);
        let t1 = theta(pp, ell, PucciSign::Minus);
        let s = if pp >= 0.0 { 1.0 } else { -1.0 };
        let advect = if dim > 1 { t1 * (dim - 1) as f64 / r } else { 0.0 } - b * s;
        let lo = (2.0 * t2 - advect * hp) / (hm * (hm + hp));
        let hi = (2.0 * t2 + advect * hm) / (hp * (hm + hp));
        if lo < 0.0 || hi < 0.0 {
            return Err(Error::Validation(format!(
                "first order terms dominate the eigen stencil at node {i} (r = {r}); refine the grid"
            )));
        }
        sub[i] = lo;
        diag[i] = -2.0 * t2 / (hm * hp) + advect * (hp - hm) / (hm * hp);
        sup[i] = hi;
    }
    Ok(FrozenRows { sub, diag, sup })
}

fn solve_rows(rows: &FrozenRows, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rows.diag.len();
    let mut c = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut piv = rows.diag[0];
    if piv == 0.0 {
        return Err(Error::Validation("singular eigen system".into()));
    }
    c[0] = rows.sup[0] / piv;
    z[0] = rhs[0] / piv;
    for i in 1..n {
        piv = rows.diag[i] - rows.sub[i] * c[i - 1];
        if piv == 0.0 {
            return Err(Error::Validation("singular eigen system".into()));
        }
        if i < n - 1 {
            c[i] = rows.sup[i] / piv;
        }
        z[i] = (rhs[i] - rows.sub[i] * z[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        let next = z[i + 1];
        z[i] -= c[i] * next;
    }
    Ok(z)
}

fn policy_flips(old: &GridFunction, new: &GridFunction, tol: f64) -> usize {
    let pairs = [
        (old.derivative(), new.derivative()),
        (old.second_derivative(), new.second_derivative()),
    ];
    let mut flips = 0;
    for (a, b) in &pairs {
        for i in 1..a.len() - 1 {
            let (x, y) = (a.value(i), b.value(i));
            if (x >= 0.0) != (y >= 0.0) && x.abs() > tol && y.abs() > tol {
                flips += 1;
            }
        }
    }
    flips
}

fn iterate_eigen(
    start: GridFunction,
    ell: &Ellipticity,
    b: f64,
    dim: usize,
    weight_mu: Option<f64>,
) -> Result<EigenPair> {
    if start.len() < 5 {
        return Err(Error::Validation(format!(
            "eigen iteration needs at least 5 nodes, got {}",
            start.len()
        )));
    }
    let grid = start.grid().clone();
    let rho = grid.a();
    let n = grid.len();
    let mut psi = start;
    let mut lambda = f64::NAN;
    let mut stable = 0usize;
    let max_sweeps = 500;
    for sweep in 1..=max_sweeps {
        let rows = freeze_rows(&psi, ell, b, dim)?;
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let r = grid.node(i);
            rhs[i] = -weight_at(weight_mu, rho, r) * psi.value(i);
        }
        let z = solve_rows(&rows, &rhs)?;
        let mut peak = f64::NEG_INFINITY;
        for (i, &v) in z.iter().enumerate() {
            if i > 0 && i < n - 1 && v <= 0.0 {
                return Err(Error::PositivityLoss { sweep });
            }
            peak = peak.max(v);
        }
        let lambda_new = 1.0 / peak;
        let z_fn = GridFunction::new(grid.clone(), z.iter().map(|&v| v / peak).collect())?;
        let flips = policy_flips(&psi, &z_fn, 1e-9);
        let settled = lambda.is_finite()
            && (lambda_new - lambda).abs() <= 1e-12 * lambda_new.abs()
            && flips == 0;
        lambda = lambda_new;
        psi = z_fn;
        stable = if settled { stable + 1 } else { 0 };
        if stable >= 3 {
            return Ok(EigenPair {
                lambda_hat: lambda,
                psi,
                ell: *ell,
                b,
                dim,
                weight_mu,
                sweeps: sweep,
            });
        }
    }
    Err(Error::NonConvergence {
        sweeps: max_sweeps,
        last_update: f64::NAN,
    })
}

/// Principal half eigenpair on the annulus described by `geometry`.
///
/// `weight_mu` turns on the boundary degenerate weight `(r - rho)^mu`;
/// `grid` overrides the default uniform grid with 2049 nodes. The start is
/// the half sine vanishing at both edges.
pub fn principal_eig(
    ell: &Ellipticity,
    b: f64,
    dim: usize,
    geometry: &AnnulusGeometry,
    weight_mu: Option<f64>,
    grid: Option<&RadialGrid>,
) -> Result<EigenPair> {
    ell.validate()?;
    geometry.validate()?;
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::Validation(format!(
            "b must be nonnegative (key b, got {b})"
        )));
    }
    if dim < 1 {
        return Err(Error::Validation(format!(
            "dim must be at least 1 (key dim, got {dim})"
        )));
    }
    if let Some(mu) = weight_mu {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::Validation(format!(
                "mu must be nonnegative (key mu, got {mu})"
            )));
        }
    }
    let owned;
    let grid = match grid {
        Some(g) => {
            if (g.a() - geometry.rho).abs() > 1e-12 * (1.0 + geometry.rho)
                || (g.b() - geometry.R).abs() > 1e-12 * (1.0 + geometry.R)
            {
                return Err(Error::Validation(format!(
                    "grid [{}, {}] does not span the annulus [{}, {}]",
                    g.a(),
                    g.b(),
                    geometry.rho,
                    geometry.R
                )));
            }
            g
        }
        None => {
            owned = RadialGrid::uniform(geometry.rho, geometry.R, 2049)?;
            &owned
        }
    };
    let width = geometry.width();
    let start = GridFunction::from_fn(grid.clone(), |r| {
        (std::f64::consts::PI * (r - geometry.rho) / width).sin()
    });
    iterate_eigen(start, ell, b, dim, weight_mu)
}
