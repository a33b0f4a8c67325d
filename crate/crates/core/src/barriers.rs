//! Barrier families and the certified boundary inequalities `I1` .. `I7`.
//!
//! Each inequality states that an explicit comparison function is a sub- or
//! supersolution of the model equation (possibly after the exponential
//! change of variables), so it transfers a bound onto the solution by the
//! comparison principle. The certifier evaluates the margin of the
//! inequality on a sampling grid clustered geometrically toward the
//! boundary and reports the worst sample; `search_constants` adjusts the
//! free constants of the barrier by factor-two moves until every sampled
//! margin clears zero, then confirms on a four times denser grid.
//!
//! The families, written in the boundary distance `d`:
//!
//! * `U1 = m1 psi^{3/2}` with `psi` the weighted principal eigenfunction;
//!   subsolution of the untransformed equation (`I1`).
//! * `U2 = (1 + m2) psi^{1/2} + m2 psi + L (r - rho)/(R - rho)`;
//!   supersolution in the upper transformed variable on the whole annulus
//!   (`I2`).
//! * `U4 = Cbar d (D - log d)^{1/(1+alpha)}`, the log-corrected upper
//!   barrier near the boundary (`I3`), and its power counterpart
//!   `U6 = Cbar d^{(2+mu)/(1+alpha)}` (`I5`).
//! * `U5 = cbar d (D - log d)^{1/(1+alpha)}` and
//!   `U7 = cbar d^{(2+mu)/(1+alpha)}` on the inner annulus
//!   `(rho/2, rho)` with `d = rho - r`; lower barriers in the lower
//!   transformed variable (`I4`, `I6`).
//! * The slab pair `W = L t G` with
//!   `G = 1 - s^2/R^2 + (t^{1-nu} - (R delta)^{1-nu})/S`,
//!   `S = (R delta)^{(1-nu)/2}`, and `Z = (1 - e^{-l1 W})/l1`; `I7` asks
//!   for a strict margin of `M-(D^2 Z) - b |DZ|` over `2 C2 t^{-nu}` on
//!   the slab `0 < t <= R delta`, `0 <= s <= R`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eigen::{principal_eig, EigenPair};
use crate::error::{Error, Result};
use crate::grid::Jet;
use crate::params::{derived_constants, ProblemSpec, PucciSign};
use crate::radial::radial_pucci;

/// The seven certified inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Inequality {
    I1,
    I2,
    I3,
    I4,
    I5,
    I6,
    I7,
}

impl Inequality {
    pub fn all() -> [Inequality; 7] {
        [
            Inequality::I1,
            Inequality::I2,
            Inequality::I3,
            Inequality::I4,
            Inequality::I5,
            Inequality::I6,
            Inequality::I7,
        ]
    }

    fn index(self) -> usize {
        match self {
            Inequality::I1 => 1,
            Inequality::I2 => 2,
            Inequality::I3 => 3,
            Inequality::I4 => 4,
            Inequality::I5 => 5,
            Inequality::I6 => 6,
            Inequality::I7 => 7,
        }
    }

    /// Constant names this inequality reads.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Inequality::I1 => &["m1", "delta"],
            Inequality::I2 => &["m2"],
            Inequality::I3 => &["Cbar", "theta_ann", "D"],
            Inequality::I4 => &["cbar", "D"],
            Inequality::I5 => &["Cbar", "theta_ann"],
            Inequality::I6 => &["cbar"],
            Inequality::I7 => &["delta_slab", "nu"],
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I{}", self.index())
    }
}

impl FromStr for Inequality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s.trim().trim_start_matches(['I', 'i']);
        match digits {
            "1" => Ok(Inequality::I1),
            "2" => Ok(Inequality::I2),
            "3" => Ok(Inequality::I3),
            "4" => Ok(Inequality::I4),
            "5" => Ok(Inequality::I5),
            "6" => Ok(Inequality::I6),
            "7" => Ok(Inequality::I7),
            _ => Err(Error::Validation(format!(
                "unknown inequality {s:?}, expected I1 .. I7"
            ))),
        }
    }
}

/// Worst sampled margin of one inequality at fixed constants.
///
/// `argmin_d` is the boundary distance of the worst sample (the normal
/// coordinate `t` for `I7`); `argmin_aux` is the radius of the worst sample
/// for the radial inequalities and the tangential coordinate for `I7`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub inequality: Inequality,
    pub min_margin: f64,
    pub argmin_d: f64,
    pub argmin_aux: f64,
    pub samples: usize,
    pub ok: bool,
}

/// Successful outcome of `search_constants`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub inequality: Inequality,
    pub constants: BTreeMap<String, f64>,
    pub report: MarginReport,
    pub steps: usize,
}

/// Starting constants for the search, keyed as in `Inequality::keys`.
pub fn default_constants(ineq: Inequality, spec: &ProblemSpec) -> BTreeMap<String, f64> {
    let mut map = BTreeMap::new();
    let width = spec.geometry.width();
    match ineq {
        Inequality::I1 => {
            map.insert("m1".into(), 0.5);
            map.insert("delta".into(), 0.0);
        }
        Inequality::I2 => {
            map.insert("m2".into(), 1.0);
        }
        Inequality::I3 => {
            map.insert("Cbar".into(), 1.0);
            map.insert("theta_ann".into(), 0.5);
            map.insert("D".into(), width.ln() + 2.0);
        }
        Inequality::I4 => {
            map.insert("cbar".into(), 0.5);
            map.insert("D".into(), (spec.geometry.rho / 2.0).ln() + 2.0);
        }
        Inequality::I5 => {
            map.insert("Cbar".into(), 1.0);
            map.insert("theta_ann".into(), 0.5);
        }
        Inequality::I6 => {
            map.insert("cbar".into(), 0.5);
        }
        Inequality::I7 => {
            map.insert("delta_slab".into(), 0.25);
            let gap = (spec.forcing.alpha - spec.forcing.mu).max(0.0);
            map.insert("nu".into(), (gap + 1.0) / 2.0);
        }
    }
    map
}

/// Defaults overlaid with `overrides`; unknown override keys are rejected.
pub fn merged_constants(
    ineq: Inequality,
    spec: &ProblemSpec,
    overrides: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>> {
    let mut map = default_constants(ineq, spec);
    for (key, value) in overrides {
        if !ineq.keys().contains(&key.as_str()) {
            return Err(Error::Validation(format!(
                "unknown constant {key:?} for {ineq}, expected one of {:?}",
                ineq.keys()
            )));
        }
        map.insert(key.clone(), *value);
    }
    Ok(map)
}

fn constant(consts: &BTreeMap<String, f64>, key: &str, ineq: Inequality) -> Result<f64> {
    consts.get(key).copied().ok_or_else(|| {
        Error::Validation(format!("missing constant {key:?} for {ineq}"))
    })
}

/// `(1/l) ln(1 + l u)`, continuous through `l = 0`.
fn scaled_log1p(l: f64, u: f64) -> f64 {
    if l == 0.0 {
        u
    } else {
        (l * u).ln_1p() / l
    }
}

/// `-(1/l) ln(1 - l u)`, continuous through `l = 0`; needs `l u < 1`.
fn scaled_neg_log1m(l: f64, u: f64) -> f64 {
    if l == 0.0 {
        u
    } else {
        -(-l * u).ln_1p() / l
    }
}

fn geometric_samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = hi / lo;
    (0..n)
        .map(|k| lo * ratio.powf(k as f64 / (n - 1) as f64))
        .collect()
}

/// `v^e` jet from the jet of `v > 0`.
fn pow_jet(p: Jet, e: f64, r: f64) -> Result<Jet> {
    if !(p.value > 0.0) {
        return Err(Error::Validation(format!(
            "eigenfunction sample is not positive at r = {r}"
        )));
    }
    let v = p.value;
    Ok(Jet {
        value: v.powf(e),
        d1: e * v.powf(e - 1.0) * p.d1,
        d2: e * (e - 1.0) * v.powf(e - 2.0) * p.d1 * p.d1 + e * v.powf(e - 1.0) * p.d2,
    })
}

fn u1_jet(pair: &EigenPair, m1: f64, r: f64) -> Result<Jet> {
    let p = pow_jet(pair.psi.sample_jet(r)?, 1.5, r)?;
    Ok(Jet {
        value: m1 * p.value,
        d1: m1 * p.d1,
        d2: m1 * p.d2,
    })
}

fn u2_jet(pair: &EigenPair, m2: f64, spec: &ProblemSpec, r: f64) -> Result<Jet> {
    let psi = pair.psi.sample_jet(r)?;
    let root = pow_jet(psi, 0.5, r)?;
    let slope = spec.geometry.L / spec.geometry.width();
    Ok(Jet {
        value: (1.0 + m2) * root.value + m2 * psi.value + slope * (r - spec.geometry.rho),
        d1: (1.0 + m2) * root.d1 + m2 * psi.d1 + slope,
        d2: (1.0 + m2) * root.d2 + m2 * psi.d2,
    })
}

/// Jet of `amp * d * (bigd - log d)^{1/(1+alpha)}` in the distance
/// coordinate `d`.
fn log_jet(amp: f64, bigd: f64, alpha: f64, d: f64) -> Result<Jet> {
    let beta = 1.0 / (1.0 + alpha);
    let g = bigd - d.ln();
    if g <= beta {
        return Err(Error::Validation(format!(
            "log barrier offset D = {bigd} leaves g = {g} <= {beta} at distance {d}; raise D"
        )));
    }
    let h = g.powf(beta - 1.0);
    Ok(Jet {
        value: amp * d * g.powf(beta),
        d1: amp * h * (g - beta),
        d2: -(amp * h / d) * beta * (1.0 + (1.0 - beta) / g),
    })
}

/// Jet of `amp * d^kappa` in the distance coordinate `d`.
fn power_jet(amp: f64, kappa: f64, d: f64) -> Jet {
    Jet {
        value: amp * d.powf(kappa),
        d1: amp * kappa * d.powf(kappa - 1.0),
        d2: amp * kappa * (kappa - 1.0) * d.powf(kappa - 2.0),
    }
}

/// Reorient a jet in the distance coordinate to the radius coordinate.
/// Outward means `d = r - rho`; inward means `d = rho - r`.
fn orient(jet: Jet, inward: bool) -> Jet {
    if inward {
        Jet {
            value: jet.value,
            d1: -jet.d1,
            d2: jet.d2,
        }
    } else {
        jet
    }
}

/// `F2+-` of a radial jet: extremal second order part plus the signed
/// first order modulus.
fn f2(jet: &Jet, r: f64, spec: &ProblemSpec, sign: PucciSign) -> f64 {
    let principal = radial_pucci(jet.d1, jet.d2, r, spec.dim, &spec.ell, sign);
    match sign {
        PucciSign::Plus => principal + spec.growth.b * jet.d1.abs(),
        PucciSign::Minus => principal - spec.growth.b * jet.d1.abs(),
    }
}

fn margin_i1(jet: &Jet, r: f64, d: f64, delta: f64, spec: &ProblemSpec) -> Result<f64> {
    let base = jet.value + delta;
    let forcing = if spec.forcing.M > 0.0 {
        if !(base > 0.0) {
            return Err(Error::Validation(format!(
                "barrier plus delta is not positive at r = {r}"
            )));
        }
        spec.forcing.M * d.powf(spec.forcing.mu) * base.powf(-spec.forcing.alpha)
    } else {
        0.0
    };
    Ok(f2(jet, r, spec, PucciSign::Plus) - spec.growth.c0 * jet.value + forcing)
}

fn margin_upper_transformed(
    jet: &Jet,
    r: f64,
    d: f64,
    spec: &ProblemSpec,
    amplitude: f64,
    with_zero_order: bool,
) -> f64 {
    let l1 = derived_constants(spec).l1;
    let u = jet.value;
    let ls = scaled_log1p(l1, u);
    let mut bracket = f2(jet, r, spec, PucciSign::Plus);
    if with_zero_order {
        bracket -= spec.growth.c0 * (1.0 + l1 * u) * ls;
    }
    if amplitude > 0.0 {
        bracket +=
            amplitude * d.powf(spec.forcing.mu) * (1.0 + l1 * u) * ls.powf(-spec.forcing.alpha);
    }
    -bracket
}

fn margin_lower_transformed(jet: &Jet, r: f64, d: f64, spec: &ProblemSpec) -> f64 {
    let l2 = derived_constants(spec).l2;
    let u = jet.value;
    if l2 * u >= 1.0 {
        return f64::NEG_INFINITY;
    }
    let nls = scaled_neg_log1m(l2, u);
    f2(jet, r, spec, PucciSign::Minus) - spec.growth.c0 * (1.0 - l2 * u) * nls
        + spec.forcing.C1
            * d.powf(spec.forcing.mu)
            * (1.0 - l2 * u)
            * nls.powf(-spec.forcing.alpha)
}

/// Entries of the slab barrier data at `(s, t)`: the `Z` Hessian restricted
/// to the plane spanned by the tangential ray and the normal, the repeated
/// tangential eigenvalue, the gradient norm, and the value of `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SlabJet {
    w: f64,
    ss: f64,
    st: f64,
    tt: f64,
    tang: f64,
    grad: f64,
}

fn slab_jet(spec: &ProblemSpec, nu: f64, delta: f64, s: f64, t: f64) -> SlabJet {
    let l1 = derived_constants(spec).l1;
    let big_l = spec.geometry.L;
    let big_r = spec.geometry.R;
    let cap = big_r * delta;
    let scale = cap.powf((1.0 - nu) / 2.0);
    let g = 1.0 - s * s / (big_r * big_r) + (t.powf(1.0 - nu) - cap.powf(1.0 - nu)) / scale;
    let w = big_l * t * g;
    let wt = big_l * (g + (1.0 - nu) * t.powf(1.0 - nu) / scale);
    let ws = -2.0 * big_l * t * s / (big_r * big_r);
    let wtt = big_l * (1.0 - nu) * (2.0 - nu) * t.powf(-nu) / scale;
    let wst = -2.0 * big_l * s / (big_r * big_r);
    let wss = -2.0 * big_l * t / (big_r * big_r);
    let ew = (-l1 * w).exp();
    SlabJet {
        w,
        ss: ew * (wss - l1 * ws * ws),
        st: ew * (wst - l1 * ws * wt),
        tt: ew * (wtt - l1 * wt * wt),
        tang: ew * wss,
        grad: ew * (ws * ws + wt * wt).sqrt(),
    }
}

/// `M-` of the slab Hessian from its closed eigenstructure: the symmetric
/// two by two block in the ray-normal plane plus `dim - 2` copies of the
/// tangential eigenvalue.
fn slab_minus(jet: &SlabJet, spec: &ProblemSpec) -> f64 {
    let weight = |e: f64| {
        if e >= 0.0 {
            spec.ell.lambda * e
        } else {
            spec.ell.Lambda * e
        }
    };
    let mean = 0.5 * (jet.ss + jet.tt);
    let disc = (0.25 * (jet.ss - jet.tt) * (jet.ss - jet.tt) + jet.st * jet.st).sqrt();
    weight(mean + disc) + weight(mean - disc) + (spec.dim - 2) as f64 * weight(jet.tang)
}

fn margin_i7(spec: &ProblemSpec, nu: f64, delta: f64, s: f64, t: f64) -> f64 {
    let jet = slab_jet(spec, nu, delta, s, t);
    slab_minus(&jet, spec) - spec.growth.b * jet.grad
        - 2.0 * spec.forcing.C2 * t.powf(-nu)
}

fn validate_i7(spec: &ProblemSpec, nu: f64, delta: f64) -> Result<()> {
    let gap = spec.forcing.alpha - spec.forcing.mu;
    if !(nu > gap && nu < 1.0) {
        return Err(Error::Validation(format!(
            "nu = {nu} must lie strictly between alpha - mu = {gap} and 1"
        )));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Validation(format!(
            "delta_slab must be positive (got {delta})"
        )));
    }
    Ok(())
}

struct Scan {
    min_margin: f64,
    argmin_d: f64,
    argmin_aux: f64,
    samples: usize,
}

impl Scan {
    fn new() -> Scan {
        Scan {
            min_margin: f64::INFINITY,
            argmin_d: f64::NAN,
            argmin_aux: f64::NAN,
            samples: 0,
        }
    }

    fn put(&mut self, margin: f64, d: f64, aux: f64) {
        self.samples += 1;
        if margin < self.min_margin {
            self.min_margin = margin;
            self.argmin_d = d;
            self.argmin_aux = aux;
        }
    }

    fn report(self, inequality: Inequality, strict: bool) -> MarginReport {
        let ok = if strict {
            self.min_margin > 0.0
        } else {
            self.min_margin >= 0.0
        };
        MarginReport {
            inequality,
            min_margin: self.min_margin,
            argmin_d: self.argmin_d,
            argmin_aux: self.argmin_aux,
            samples: self.samples,
            ok,
        }
    }
}

const INNER_FRACTION: f64 = 1e-8;
const RADIAL_SAMPLES_PER_SIDE: usize = 160;
const SLAB_SAMPLES_PER_AXIS: usize = 256;

/// Evaluate the margins of one inequality at the given constants.
///
/// `refine` multiplies the sampling density linearly in each direction; the
/// confirmation pass of the acceptance suite uses `refine = 4`. Strictness:
/// `I7` demands a strictly positive worst margin, the radial inequalities a
/// nonnegative one.
pub fn certify(
    ineq: Inequality,
    spec: &ProblemSpec,
    constants: &BTreeMap<String, f64>,
    refine: usize,
) -> Result<MarginReport> {
    spec.validate()?;
    if refine == 0 {
        return Err(Error::Validation("refine must be at least 1".into()));
    }
    let width = spec.geometry.width();
    let rho = spec.geometry.rho;
    let n = RADIAL_SAMPLES_PER_SIDE * refine + 1;
    let mut scan = Scan::new();
    match ineq {
        Inequality::I1 => {
            let m1 = constant(constants, "m1", ineq)?;
            let delta = constant(constants, "delta", ineq)?;
            if !(m1 > 0.0) || !(delta >= 0.0) {
                return Err(Error::Validation(format!(
                    "I1 needs m1 > 0 and delta >= 0 (got m1 = {m1}, delta = {delta})"
                )));
            }
            let pair = principal_eig(
                &spec.ell,
                spec.growth.b,
                spec.dim,
                &spec.geometry,
                Some(spec.forcing.mu),
                None,
            )?;
            for &d in &geometric_samples(INNER_FRACTION * width, width / 2.0, n) {
                for r in [rho + d, spec.geometry.R - d] {
                    let jet = u1_jet(&pair, m1, r)?;
                    let margin = margin_i1(&jet, r, r - rho, delta, spec)?;
                    scan.put(margin, d, r);
                }
            }
        }
        Inequality::I2 => {
            let m2 = constant(constants, "m2", ineq)?;
            if !(m2 > 0.0) {
                return Err(Error::Validation(format!(
                    "I2 needs m2 > 0 (got {m2})"
                )));
            }
            let pair = principal_eig(
                &spec.ell,
                spec.growth.b,
                spec.dim,
                &spec.geometry,
                None,
                None,
            )?;
            for &d in &geometric_samples(INNER_FRACTION * width, width / 2.0, n) {
                for r in [rho + d, spec.geometry.R - d] {
                    let jet = u2_jet(&pair, m2, spec, r)?;
                    let margin = margin_upper_transformed(
                        &jet,
                        r,
                        r - rho,
                        spec,
                        spec.forcing.M,
                        true,
                    );
                    scan.put(margin, d, r);
                }
            }
        }
        Inequality::I3 | Inequality::I5 => {
            let amp = constant(constants, "Cbar", ineq)?;
            let theta = constant(constants, "theta_ann", ineq)?;
            if !(amp > 0.0) || !(theta > 0.0 && theta <= 1.0) {
                return Err(Error::Validation(format!(
                    "{ineq} needs Cbar > 0 and theta_ann in (0, 1] (got Cbar = {amp}, theta_ann = {theta})"
                )));
            }
            let window = theta * width;
            for &d in &geometric_samples(INNER_FRACTION * window, window, n) {
                let r = rho + d;
                let jet = match ineq {
                    Inequality::I3 => {
                        let bigd = constant(constants, "D", ineq)?;
                        log_jet(amp, bigd, spec.forcing.alpha, d)?
                    }
                    _ => {
                        let kappa =
                            (2.0 + spec.forcing.mu) / (1.0 + spec.forcing.alpha);
                        power_jet(amp, kappa, d)
                    }
                };
                let jet = orient(jet, false);
                let margin =
                    margin_upper_transformed(&jet, r, d, spec, spec.forcing.C2, false);
                scan.put(margin, d, r);
            }
        }
        Inequality::I4 | Inequality::I6 => {
            let amp = constant(constants, "cbar", ineq)?;
            if !(amp > 0.0) {
                return Err(Error::Validation(format!(
                    "{ineq} needs cbar > 0 (got {amp})"
                )));
            }
            let depth = rho / 2.0;
            for &d in &geometric_samples(INNER_FRACTION * depth, depth, n) {
                let r = rho - d;
                let jet = match ineq {
                    Inequality::I4 => {
                        let bigd = constant(constants, "D", ineq)?;
                        log_jet(amp, bigd, spec.forcing.alpha, d)?
                    }
                    _ => {
                        let kappa =
                            (2.0 + spec.forcing.mu) / (1.0 + spec.forcing.alpha);
                        power_jet(amp, kappa, d)
                    }
                };
                let jet = orient(jet, true);
                let margin = margin_lower_transformed(&jet, r, d, spec);
                scan.put(margin, d, r);
            }
        }
        Inequality::I7 => {
            let delta = constant(constants, "delta_slab", ineq)?;
            let nu = constant(constants, "nu", ineq)?;
            validate_i7(spec, nu, delta)?;
            let cap = spec.geometry.R * delta;
            let scale = cap.powf((1.0 - nu) / 2.0);
            if scale > 0.25 {
                let mut failed = Scan::new();
                failed.put(f64::NEG_INFINITY, cap, 0.0);
                return Ok(failed.report(ineq, true));
            }
            let per_axis = SLAB_SAMPLES_PER_AXIS * refine;
            let ts = geometric_samples(INNER_FRACTION * cap, cap, per_axis);
            for j in 0..per_axis {
                let s = spec.geometry.R * j as f64 / (per_axis - 1) as f64;
                for &t in &ts {
                    scan.put(margin_i7(spec, nu, delta, s, t), t, s);
                }
            }
        }
    }
    Ok(scan.report(ineq, matches!(ineq, Inequality::I7)))
}

const MAX_SEARCH_STEPS: usize = 60;

/// Factor-two constant search: `m1` and `cbar` shrink, `m2` and `Cbar`
/// grow, `theta_ann` shrinks when the worst sample sits at the outer edge
/// of its window, `delta_slab` shrinks. Every pass that clears the base
/// grid is confirmed on a four times denser one before it is accepted.
pub fn search_constants(
    ineq: Inequality,
    spec: &ProblemSpec,
    overrides: &BTreeMap<String, f64>,
) -> Result<Certificate> {
    let mut consts = merged_constants(ineq, spec, overrides)?;
    let mut best = f64::NEG_INFINITY;
    for step in 0..=MAX_SEARCH_STEPS {
        let report = certify(ineq, spec, &consts, 1)?;
        best = best.max(report.min_margin);
        if report.ok {
            let confirmed = certify(ineq, spec, &consts, 4)?;
            best = best.max(confirmed.min_margin);
            if confirmed.ok {
                return Ok(Certificate {
                    inequality: ineq,
                    constants: consts,
                    report: confirmed,
                    steps: step,
                });
            }
        }
        if step == MAX_SEARCH_STEPS {
            break;
        }
        match ineq {
            Inequality::I1 => {
                let m1 = constant(&consts, "m1", ineq)?;
                consts.insert("m1".into(), m1 / 2.0);
            }
            Inequality::I2 => {
                let m2 = constant(&consts, "m2", ineq)?;
                consts.insert("m2".into(), m2 * 2.0);
            }
            Inequality::I3 | Inequality::I5 => {
                let theta = constant(&consts, "theta_ann", ineq)?;
                let window = theta * spec.geometry.width();
                if report.argmin_d > 0.9 * window && theta > 1e-4 {
                    consts.insert("theta_ann".into(), theta / 2.0);
                } else {
                    let amp = constant(&consts, "Cbar", ineq)?;
                    consts.insert("Cbar".into(), amp * 2.0);
                }
            }
            Inequality::I4 | Inequality::I6 => {
                let amp = constant(&consts, "cbar", ineq)?;
                consts.insert("cbar".into(), amp / 2.0);
            }
            Inequality::I7 => {
                let delta = constant(&consts, "delta_slab", ineq)?;
                consts.insert("delta_slab".into(), delta / 2.0);
            }
        }
    }
    Err(Error::SearchExhausted {
        inequality: ineq.to_string(),
        steps: MAX_SEARCH_STEPS,
        best_margin: best,
    })
}
