//! Exponential substitutions absorbing quadratic gradient growth.
//!
//! The upward transform `v = (e^{l u} - 1) / l` turns a subsolution of the
//! operator with `+B|Du|^2` into a subsolution of a pure extremal operator,
//! and the downward transform `w = (1 - e^{-l u}) / l` does the same on the
//! supersolution side, with rates `l1 = B / Lambda` and `l2 = B / lambda`.
//! Both fix the origin, are increasing, and degenerate to the identity as
//! `l -> 0`; the implementations use `exp_m1` and `ln_1p` so that limit is
//! reached smoothly.
//!
//! The chain actually used downstream is the sandwich
//!
//! ```text
//! l lambda |Du|^2 + M+-(D^2 u) <= M+-(D^2 v) / (1 + l v)
//!                              <= l Lambda |Du|^2 + M+-(D^2 u)
//! ```
//!
//! for the upward transform, and its mirror image with `-l Lambda` and
//! `-l lambda` for the downward one. [`check_sandwich`] verifies all four
//! inequalities numerically by differentiating the transformed profile with
//! centered differences, which is how the transform is exercised before the
//! comparison machinery is allowed to rely on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::params::{DerivedConstants, Ellipticity, PucciSign};
use crate::radial::radial_pucci;

/// Upward transform `(e^{l u} - 1) / l`, the identity when `l = 0`.
pub fn up(l: f64, u: f64) -> f64 {
    if l == 0.0 {
        u
    } else {
        (l * u).exp_m1() / l
    }
}

/// Downward transform `(1 - e^{-l u}) / l`, the identity when `l = 0`.
pub fn down(l: f64, u: f64) -> f64 {
    if l == 0.0 {
        u
    } else {
        -(-l * u).exp_m1() / l
    }
}

/// Inverse of [`up`]: `log(1 + l v) / l`. Errors when `1 + l v <= 0`.
pub fn up_inv(l: f64, v: f64) -> Result<f64> {
    if l == 0.0 {
        return Ok(v);
    }
    if 1.0 + l * v <= 0.0 {
        return Err(Error::Domain(format!(
            "up_inv needs 1 + l v > 0, got l = {l}, v = {v}"
        )));
    }
    Ok((l * v).ln_1p() / l)
}

/// Inverse of [`down`]: `-log(1 - l w) / l`. Errors when `1 - l w <= 0`.
pub fn down_inv(l: f64, w: f64) -> Result<f64> {
    if l == 0.0 {
        return Ok(w);
    }
    if 1.0 - l * w <= 0.0 {
        return Err(Error::Domain(format!(
            "down_inv needs 1 - l w > 0, got l = {l}, w = {w}"
        )));
    }
    Ok(-(-l * w).ln_1p() / l)
}

/// Which substitution to apply to a grid function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformKind {
    Up,
    Down,
    UpInv,
    DownInv,
}

/// Apply a substitution nodewise to a grid function.
pub fn apply_transform(u: &GridFunction, kind: TransformKind, l: f64) -> Result<GridFunction> {
    let mut out = u.clone();
    for v in out.values_mut() {
        *v = match kind {
            TransformKind::Up => up(l, *v),
            TransformKind::Down => down(l, *v),
            TransformKind::UpInv => up_inv(l, *v)?,
            TransformKind::DownInv => down_inv(l, *v)?,
        };
    }
    Ok(out)
}

/// Inflation and deflation margins of the inverse substitutions at level `r`.
///
/// Returns `(down_margin, up_margin)` where
///
/// ```text
/// down_margin = -log(1 - l2 r) / l2 - r    (how much down_inv inflates)
/// up_margin   = r - log(1 + l1 r) / l1     (how much up_inv deflates)
/// ```
///
/// Both are nonnegative for `r >= 0`; they quantify the loss taken when a
/// bound on a transformed profile is pulled back to the original one. Errors
/// when `r >= 1 / l2`, where the downward pullback blows up.
pub fn calc_bounds(r: f64, dc: &DerivedConstants) -> Result<(f64, f64)> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Validation(format!(
            "calc_bounds needs a nonnegative finite level, got {r}"
        )));
    }
    let down_margin = down_inv(dc.l2, r)? - r;
    let up_margin = r - up_inv(dc.l1, r)?;
    Ok((down_margin, up_margin))
}

/// Minimal slacks of the four sandwich inequalities over the sample radii.
///
/// Nonnegative slacks mean the chain holds there; [`check_sandwich`] errors
/// as soon as one drops below the finite difference tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichSlacks {
    pub up_lower: f64,
    pub up_upper: f64,
    pub down_lower: f64,
    pub down_upper: f64,
}

/// Verify the transform sandwich on a radial profile by finite differences.
///
/// The profile `u` is transformed pointwise, both `u` and its transforms are
/// differentiated with centered steps `h`, and the four slacks (lower and
/// upper inequality, upward and downward transform) are evaluated at every
/// sample radius for the requested extremal operator. A slack below
/// `-10 h^2` is reported as a [`Error::SandwichViolation`] naming the chain
/// and the offending sample; otherwise the minimal slacks are returned.
pub fn check_sandwich(
    u: impl Fn(f64) -> f64,
    radii: &[f64],
    l: f64,
    ell: &Ellipticity,
    dim: usize,
    sign: PucciSign,
    h: f64,
) -> Result<SandwichSlacks> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Validation(format!(
            "finite difference step must be positive, got {h}"
        )));
    }
    if radii.is_empty() {
        return Err(Error::Validation(
            "check_sandwich needs at least one sample radius".into(),
        ));
    }
    let tol = 10.0 * h * h;
    let fd = |f: &dyn Fn(f64) -> f64, r: f64| {
        let fm = f(r - h);
        let f0 = f(r);
        let fp = f(r + h);
        (f0, (fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h))
    };
    let mut slacks = SandwichSlacks {
        up_lower: f64::INFINITY,
        up_upper: f64::INFINITY,
        down_lower: f64::INFINITY,
        down_upper: f64::INFINITY,
    };
    let v_fn = |r: f64| up(l, u(r));
    let w_fn = |r: f64| down(l, u(r));
    for (node, &r) in radii.iter().enumerate() {
        if !(r - h > 0.0) {
            return Err(Error::Validation(format!(
                "sample radius {r} leaves the positive axis at step {h}"
            )));
        }
        let (_, u1, u2) = fd(&u, r);
        let base = radial_pucci(u1, u2, r, dim, ell, sign);
        let grad_sq = u1 * u1;

        let (v0, v1, v2) = fd(&v_fn, r);
        let mid_up = radial_pucci(v1, v2, r, dim, ell, sign) / (1.0 + l * v0);
        let up_lower = mid_up - (l * ell.lambda * grad_sq + base);
        let up_upper = (l * ell.Lambda * grad_sq + base) - mid_up;

        let (w0, w1, w2) = fd(&w_fn, r);
        let mid_down = radial_pucci(w1, w2, r, dim, ell, sign) / (1.0 - l * w0);
        let down_lower = mid_down - (-l * ell.Lambda * grad_sq + base);
        let down_upper = (-l * ell.lambda * grad_sq + base) - mid_down;

        for (chain, slack) in [
            ("up_lower", up_lower),
            ("up_upper", up_upper),
            ("down_lower", down_lower),
            ("down_upper", down_upper),
        ] {
            if slack < -tol {
                return Err(Error::SandwichViolation {
                    chain,
                    node,
                    slack,
                    tol,
                });
            }
        }
        slacks.up_lower = slacks.up_lower.min(up_lower);
        slacks.up_upper = slacks.up_upper.min(up_upper);
        slacks.down_lower = slacks.down_lower.min(down_lower);
        slacks.down_upper = slacks.down_upper.min(down_upper);
    }
    Ok(slacks)
}
