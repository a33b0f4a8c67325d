//! Radial reduction of the extremal operators.
//!
//! A radial function `u(|x|)` has Hessian eigenvalues `u''` (once, along the
//! ray) and `u'/r` (with multiplicity `N - 1`, across it), so the Pucci
//! operators collapse to
//!
//! ```text
//! M+-(D^2 u) = theta(u'') u'' + theta(u') (N - 1) u' / r
//! ```
//!
//! with the weight `theta` picking `Lambda` or `lambda` by the sign of its
//! argument. The module also evaluates the full model residual
//!
//! ```text
//! theta(w'') w'' + theta(w') (N-1) w'/r + B |w'|^2 + b |w'| - c0 w
//!     + M (r - rho)^mu (w + delta)^(-alpha)
//! ```
//!
//! on grid functions, builds the integrating factors that turn the frozen
//! policy operator into divergence form, and locates the first radius where
//! a profile stops increasing.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::params::{Ellipticity, ProblemSpec, PucciSign};

/// Extremal weight attached to a curvature of sign `s`.
///
/// The plus operator rewards positive curvature with `Lambda`, the minus
/// operator with `lambda`; zero counts as positive for both, which matches
/// the eigenvalue form since a zero eigenvalue contributes nothing.
pub fn theta(s: f64, ell: &Ellipticity, sign: PucciSign) -> f64 {
    match (sign, s >= 0.0) {
        (PucciSign::Plus, true) | (PucciSign::Minus, false) => ell.Lambda,
        (PucciSign::Plus, false) | (PucciSign::Minus, true) => ell.lambda,
    }
}

/// Pucci extremal operator of a radial jet at radius `r > 0`.
pub fn radial_pucci(
    d1: f64,
    d2: f64,
    r: f64,
    dim: usize,
    ell: &Ellipticity,
    sign: PucciSign,
) -> f64 {
    let tangential = if dim > 1 {
        theta(d1, ell, sign) * (dim - 1) as f64 * d1 / r
    } else {
        0.0
    };
    theta(d2, ell, sign) * d2 + tangential
}

/// Inverse power forcing `M (r - rho)^mu (w + delta)^(-alpha)`.
///
/// Errors when the regularized argument `w + delta` is not positive while
/// the amplitude is, since the model only makes sense on positive arguments.
pub fn forcing_term(spec: &ProblemSpec, r: f64, w: f64, delta: f64) -> Result<f64> {
    let f = &spec.forcing;
    if f.M == 0.0 {
        return Ok(0.0);
    }
    let base = w + delta;
    if base <= 0.0 {
        return Err(Error::Singularity { node: usize::MAX, r });
    }
    let dist = (r - spec.geometry.rho).max(0.0);
    Ok(f.M * dist.powf(f.mu) * base.powf(-f.alpha))
}

/// Residual of the regularized model equation on the interior nodes.
///
/// Derivatives come from the grid stencils; the two boundary slots are set
/// to zero because the Dirichlet data is imposed there, not the equation.
pub fn sabu_residual(w: &GridFunction, spec: &ProblemSpec, delta: f64) -> Result<GridFunction> {
    let d1 = w.derivative();
    let d2 = w.second_derivative();
    let g = &spec.growth;
    let mut out = vec![0.0; w.len()];
    for i in 1..w.len() - 1 {
        let r = w.grid().node(i);
        let wp = d1.value(i);
        let wpp = d2.value(i);
        let wi = w.value(i);
        let force = forcing_term(spec, r, wi, delta).map_err(|e| match e {
            Error::Singularity { r, .. } => Error::Singularity { node: i, r },
            other => other,
        })?;
        out[i] = radial_pucci(wp, wpp, r, spec.dim, &spec.ell, PucciSign::Plus)
            + g.B * wp * wp
            + g.b * wp.abs()
            - g.c0 * wi
            + force;
    }
    GridFunction::new(w.grid().clone(), out)
}

/// Integrating factors of the frozen policy operator.
///
/// With the policy weights `theta1 = theta(w')` and `theta2 = theta(w'')`
/// read off a profile, the second order part
/// `theta2 w'' + theta1 (N-1) w'/r` equals
/// `(theta2 / xi) (xi w')'` for `xi = exp(int chi)` with
/// `chi = theta1 (N-1) / (theta2 r)`. Returns `(xi, xi_tilde)` with
/// `xi_tilde = xi / theta2`, both as grid functions.
///
/// The integral is anchored at `r = 1` when the grid contains it, so that
/// `chi` between `(N+ - 1)/r` and `(N- - 1)/r` pinches `xi` between the
/// comparison weights `r^(N+ - 1)` and `r^(N- - 1)` on `r >= 1`; otherwise
/// the anchor falls back to the inner edge.
pub fn integrating_factors(
    w: &GridFunction,
    dim: usize,
    ell: &Ellipticity,
    sign: PucciSign,
) -> (GridFunction, GridFunction) {
    let d1 = w.derivative();
    let d2 = w.second_derivative();
    let grid = w.grid().clone();
    let n = grid.len();
    let chi: Vec<f64> = (0..n)
        .map(|i| {
            let t1 = theta(d1.value(i), ell, sign);
            let t2 = theta(d2.value(i), ell, sign);
            if dim > 1 {
                t1 * (dim - 1) as f64 / (t2 * grid.node(i))
            } else {
                0.0
            }
        })
        .collect();
    let mut cumulative = vec![0.0; n];
    for i in 1..n {
        let h = grid.node(i) - grid.node(i - 1);
        cumulative[i] = cumulative[i - 1] + 0.5 * h * (chi[i] + chi[i - 1]);
    }
    let anchor = if grid.a() <= 1.0 && 1.0 <= grid.b() {
        1.0
    } else {
        grid.a()
    };
    let c = grid.cell_of(anchor);
    let t = (anchor - grid.node(c)) / (grid.node(c + 1) - grid.node(c));
    let offset = cumulative[c] * (1.0 - t) + cumulative[c + 1] * t;
    let xi: Vec<f64> = cumulative.iter().map(|&s| (s - offset).exp()).collect();
    let xi_tilde: Vec<f64> = xi
        .iter()
        .zip(d2.values())
        .map(|(&x, &wpp)| x / theta(wpp, ell, sign))
        .collect();
    (
        GridFunction::new(grid.clone(), xi).unwrap(),
        GridFunction::new(grid, xi_tilde).unwrap(),
    )
}

/// First radius at which the forward difference slope of `w` drops to zero
/// or below; the outer edge if `w` increases across every cell.
pub fn hopf_point(w: &GridFunction) -> f64 {
    let g = w.grid();
    for i in 0..w.len() - 1 {
        if w.value(i + 1) - w.value(i) <= 0.0 {
            return g.node(i);
        }
    }
    g.b()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::params::pucci;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ell12() -> Ellipticity {
        Ellipticity::new(1.0, 2.0)
    }

    #[test]
    fn theta_picks_the_extremal_weight() {
        let ell = ell12();
        assert_eq!(theta(1.0, &ell, PucciSign::Plus), 2.0);
        assert_eq!(theta(-1.0, &ell, PucciSign::Plus), 1.0);
        assert_eq!(theta(1.0, &ell, PucciSign::Minus), 1.0);
        assert_eq!(theta(-1.0, &ell, PucciSign::Minus), 2.0);
    }

    #[test]
    fn radial_pucci_worked_example() {
        // w = r^2 at r = 1 in dimension 2: both curvatures positive, so the
        // plus operator weighs w'' = 2 and w'/r = 2 by Lambda = 2.
        let v = radial_pucci(2.0, 2.0, 1.0, 2, &ell12(), PucciSign::Plus);
        assert_relative_eq!(v, 8.0, max_relative = 1e-15);
        let v = radial_pucci(2.0, 2.0, 1.0, 2, &ell12(), PucciSign::Minus);
        assert_relative_eq!(v, 4.0, max_relative = 1e-15);
    }

    /// Full matrix oracle: the radial formula must agree with the Pucci
    /// operator of the actual Hessian `diag(w'', w'/r, ..., w'/r)`.
    #[test]
    fn radial_pucci_matches_matrix_pucci() {
        let ell = ell12();
        let mut rng = StdRng::seed_from_u64(31);
        for dim in 1..=4usize {
            for _ in 0..200 {
                let d1: f64 = rng.random_range(-3.0..3.0);
                let d2: f64 = rng.random_range(-3.0..3.0);
                let r: f64 = rng.random_range(0.5..2.5);
                let mut eigs = vec![d2];
                eigs.extend(std::iter::repeat(d1 / r).take(dim - 1));
                let m = DMatrix::from_diagonal(&DVector::from_vec(eigs));
                for sign in [PucciSign::Plus, PucciSign::Minus] {
                    let fast = radial_pucci(d1, d2, r, dim, &ell, sign);
                    let slow = pucci(&m, &ell, sign).unwrap();
                    assert_relative_eq!(fast, slow, max_relative = 1e-12, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn forcing_term_examples_and_guards() {
        let mut spec = ProblemSpec::default();
        spec.forcing.mu = 1.0;
        spec.forcing.alpha = 2.0;
        spec.forcing.M = 3.0;
        let v = forcing_term(&spec, 1.5, 1.0, 0.0).unwrap();
        assert_relative_eq!(v, 3.0 * 0.5 / 1.0, max_relative = 1e-15);
        let v = forcing_term(&spec, 1.5, 0.5, 0.5).unwrap();
        assert_relative_eq!(v, 1.5, max_relative = 1e-15);
        assert!(forcing_term(&spec, 1.5, 0.0, 0.0).is_err());
        spec.forcing.M = 0.0;
        assert_eq!(forcing_term(&spec, 1.5, 0.0, 0.0).unwrap(), 0.0);
    }

    /// Residual oracle on a closed form solution: with unit ellipticity, no
    /// gradient weights, no zeroth order term and no forcing the equation is
    /// the Laplace equation, solved in dimension 2 by `log(r/rho)`.
    #[test]
    fn sabu_residual_vanishes_on_harmonic_profile() {
        let mut spec = ProblemSpec::default();
        spec.ell = Ellipticity::new(1.0, 1.0);
        spec.growth.B = 0.0;
        spec.growth.c0 = 0.0;
        spec.forcing.M = 0.0;
        let g = RadialGrid::uniform(1.0, 2.0, 801).unwrap();
        let w = GridFunction::from_fn(g, |r| (r / 1.0f64).ln() / 2.0f64.ln());
        let res = sabu_residual(&w, &spec, 0.0).unwrap();
        assert_eq!(res.value(0), 0.0);
        assert_eq!(res.value(res.len() - 1), 0.0);
        assert!(res.max_norm() < 1e-6, "residual {}", res.max_norm());
    }

    /// Analytic jet oracle on an arbitrary smooth profile: the grid residual
    /// must approach the pointwise residual built from exact derivatives.
    #[test]
    fn sabu_residual_matches_analytic_jets() {
        let mut spec = ProblemSpec::default();
        spec.ell = ell12();
        spec.growth = crate::params::GrowthParams {
            B: 0.3,
            b: 0.2,
            d: 0.0,
            c0: 0.4,
        };
        spec.forcing.mu = 1.0;
        spec.forcing.alpha = 0.5;
        spec.dim = 3;
        let delta = 0.1;
        let u = |r: f64| (2.0 * r).sin() + 1.5;
        let up = |r: f64| 2.0 * (2.0 * r).cos();
        let upp = |r: f64| -4.0 * (2.0 * r).sin();
        let g = RadialGrid::uniform(1.0, 2.0, 2001).unwrap();
        let w = GridFunction::from_fn(g, u);
        let res = sabu_residual(&w, &spec, delta).unwrap();
        for i in (1..w.len() - 1).step_by(97) {
            let r = w.grid().node(i);
            let exact = radial_pucci(up(r), upp(r), r, 3, &spec.ell, PucciSign::Plus)
                + 0.3 * up(r) * up(r)
                + 0.2 * up(r).abs()
                - 0.4 * u(r)
                + forcing_term(&spec, r, u(r), delta).unwrap();
            assert!(
                (res.value(i) - exact).abs() < 1e-5,
                "node {i}: {} vs {exact}",
                res.value(i)
            );
        }
    }

    /// Quadrature oracle: for `w = r^2` every curvature is positive, the
    /// weights cancel and `xi = r^(N-1)` exactly.
    #[test]
    fn integrating_factor_reproduces_power_weight() {
        let g = RadialGrid::uniform(1.0, 2.0, 8193).unwrap();
        let w = GridFunction::from_fn(g, |r| r * r);
        for dim in [2usize, 3] {
            let (xi, xi_tilde) = integrating_factors(&w, dim, &ell12(), PucciSign::Plus);
            for i in (0..xi.len()).step_by(512) {
                let r = xi.grid().node(i);
                let exact = r.powi(dim as i32 - 1);
                assert!(
                    (xi.value(i) - exact).abs() <= 1e-8 * exact,
                    "dim {dim}, r {r}: {} vs {exact}",
                    xi.value(i)
                );
                assert_relative_eq!(
                    xi_tilde.value(i),
                    xi.value(i) / 2.0,
                    max_relative = 1e-14
                );
            }
        }
    }

    /// With the anchor at 1, any policy keeps `xi` between the comparison
    /// weights `r^(N+ - 1)` and `r^(N- - 1)` on `r >= 1`.
    #[test]
    fn integrating_factor_respects_comparison_weights() {
        let g = RadialGrid::uniform(1.0, 2.0, 4097).unwrap();
        let w = GridFunction::from_fn(g, |r| (8.0 * r).sin());
        let ell = ell12();
        let dim = 3usize;
        let n_plus = ell.lambda / ell.Lambda * 2.0 + 1.0;
        let n_minus = ell.Lambda / ell.lambda * 2.0 + 1.0;
        for sign in [PucciSign::Plus, PucciSign::Minus] {
            let (xi, _) = integrating_factors(&w, dim, &ell, sign);
            for i in 0..xi.len() {
                let r = xi.grid().node(i);
                let lo = r.powf(n_plus - 1.0);
                let hi = r.powf(n_minus - 1.0);
                assert!(
                    xi.value(i) >= lo * (1.0 - 1e-6) && xi.value(i) <= hi * (1.0 + 1e-6),
                    "r {r}: xi {} outside [{lo}, {hi}]",
                    xi.value(i)
                );
            }
        }
    }

    #[test]
    fn integrating_factor_anchor_falls_back_to_inner_edge() {
        let g = RadialGrid::uniform(2.0, 3.0, 101).unwrap();
        let w = GridFunction::from_fn(g, |r| r * r);
        let (xi, _) = integrating_factors(&w, 2, &ell12(), PucciSign::Plus);
        assert_relative_eq!(xi.value(0), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn hopf_point_finds_the_first_flat_cell() {
        let g = RadialGrid::uniform(1.0, 2.0, 101).unwrap();
        let increasing = GridFunction::from_fn(g.clone(), |r| r);
        assert_eq!(hopf_point(&increasing), 2.0);
        let bump = GridFunction::from_fn(g, |r| -(r - 1.5) * (r - 1.5));
        let p = hopf_point(&bump);
        assert!((p - 1.5).abs() <= 0.011, "peak reported at {p}");
    }
}
