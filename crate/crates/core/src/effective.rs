//! Closed-form solutions of the exact low-energy effective Hamiltonians in the
//! normal (`g < 1`) and superradiant (`g > 1`) phases, plus the leading
//! finite-frequency corrections at the critical point obtained from a squeezed
//! vacuum variational ansatz for the quartic Hamiltonian.
//!
//! All energies are returned in units of `ω0`; `g` is the dimensionless
//! coupling with critical value `g_c = 1`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Errors produced by the closed-form layer.
#[derive(Debug, Error, PartialEq)]
pub enum EffectiveError {
    #[error("coupling g must be nonnegative, got {0}")]
    NegativeCoupling(f64),
    #[error("cavity frequency omega0 must be strictly positive, got {0}")]
    NonpositiveFrequency(f64),
    #[error("frequency ratio must be strictly positive, got {0}")]
    NonpositiveRatio(f64),
    #[error("squeezing parameter diverges at the critical point g = 1")]
    DivergentSqueezing,
    #[error("quadrature variance diverges at the critical point g = 1")]
    DivergentVariance,
    #[error("{0} is undefined at the critical point g = 1")]
    UndefinedAtCritical(&'static str),
    #[error("operation requires a finite frequency ratio")]
    InfiniteRatio,
    #[error("coupling g = {0} outside the valid range {1}")]
    CouplingOutOfRange(f64, &'static str),
    #[error("scalar minimizer failed to bracket a minimum in [0, {0}]")]
    BracketFailure(f64),
    #[error("tolerance must be strictly positive, got {0}")]
    NonpositiveTolerance(f64),
}

/// The ratio `Ω/ω0`, either finite or the `Ω → ∞` limit.
///
/// The infinite limit is a first-class value so that limit formulas are
/// reachable without magic numbers; parse it from the literal `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FreqRatio {
    Finite(f64),
    Infinite,
}

impl FreqRatio {
    pub fn finite(value: f64) -> Result<Self, EffectiveError> {
        if value.is_finite() && value > 0.0 {
            Ok(FreqRatio::Finite(value))
        } else {
            Err(EffectiveError::NonpositiveRatio(value))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, FreqRatio::Finite(_))
    }

    /// The finite value, if any.
    pub fn value(&self) -> Option<f64> {
        match self {
            FreqRatio::Finite(r) => Some(*r),
            FreqRatio::Infinite => None,
        }
    }
}

impl fmt::Display for FreqRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FreqRatio::Finite(r) => write!(f, "{r}"),
            FreqRatio::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for FreqRatio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinite") {
            return Ok(FreqRatio::Infinite);
        }
        let v: f64 = t.parse().map_err(|_| format!("invalid ratio `{s}`"))?;
        FreqRatio::finite(v).map_err(|e| e.to_string())
    }
}

/// Frequencies and dimensionless coupling defining one Hamiltonian instance.
///
/// `g = 2λ/√(ω0 Ω)` is canonical; the bare coupling `λ` is derived on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega0: f64,
    pub ratio: FreqRatio,
    pub g: f64,
}

impl ModelParams {
    pub fn new(omega0: f64, ratio: FreqRatio, g: f64) -> Result<Self, EffectiveError> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(EffectiveError::NonpositiveFrequency(omega0));
        }
        if !(g.is_finite() && g >= 0.0) {
            return Err(EffectiveError::NegativeCoupling(g));
        }
        Ok(ModelParams { omega0, ratio, g })
    }

    /// Atomic transition frequency `Ω = ratio·ω0`; requires a finite ratio.
    pub fn omega_atom(&self) -> Result<f64, EffectiveError> {
        self.ratio
            .value()
            .map(|r| r * self.omega0)
            .ok_or(EffectiveError::InfiniteRatio)
    }

    /// Bare coupling `λ = g·√(ω0 Ω)/2`; rejects the infinite-ratio limit.
    pub fn lambda(&self) -> Result<f64, EffectiveError> {
        let r = self.ratio.value().ok_or(EffectiveError::InfiniteRatio)?;
        Ok(self.g * (self.omega0 * self.omega0 * r).sqrt() / 2.0)
    }
}

/// Phase of the model at a given coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Normal,
    Critical,
    Superradiant,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Normal => write!(f, "normal"),
            Phase::Critical => write!(f, "critical"),
            Phase::Superradiant => write!(f, "superradiant"),
        }
    }
}

/// Equilibrium critical exponents; only the product `zν` enters any
/// computation, `z` and `ν` are stored for reference.
#[derive(Debug, Clone, Copy)]
pub struct CriticalExponents {
    pub z: f64,
    pub nu: f64,
    pub znu: f64,
}

impl Default for CriticalExponents {
    fn default() -> Self {
        let (z, nu) = (2.0, 0.25);
        CriticalExponents { z, nu, znu: z * nu }
    }
}

impl CriticalExponents {
    /// `z·ν` must equal the stored product.
    pub fn consistent(&self) -> bool {
        (self.z * self.nu - self.znu).abs() < 1e-15
    }
}

/// Displacement of the cavity field in the superradiant phase.
///
/// In the `Ω → ∞` limit the displacement itself diverges like `√Ω`; the
/// rescaled value `α·√(ω0/Ω)` stays finite and is reported instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Displacement {
    Alpha(f64),
    AlphaRescaled(f64),
}

impl Displacement {
    pub fn value(&self) -> f64 {
        match self {
            Displacement::Alpha(a) | Displacement::AlphaRescaled(a) => *a,
        }
    }

    pub fn is_rescaled(&self) -> bool {
        matches!(self, Displacement::AlphaRescaled(_))
    }
}

/// Closed-form equilibrium quantities for one phase at one coupling.
#[derive(Debug, Clone, Copy)]
pub struct EffectiveObservables {
    /// Excitation energy (units of ω0).
    pub epsilon: f64,
    /// Squeezing parameter of the ground state.
    pub r_squeeze: f64,
    /// Field displacement; zero in the normal phase, positive branch in the
    /// superradiant phase (the ± degeneracy gives an identical spectrum).
    pub alpha: Displacement,
    /// Rescaled ground energy `(ω0/Ω) E_G` (units of ω0).
    pub e_g: f64,
    /// Rescaled photon number, the order parameter.
    pub n_c: f64,
    /// Standard deviation of `x = a + a†`.
    pub dx: f64,
    /// Standard deviation of `p = i(a† − a)`.
    pub dp: f64,
}

impl EffectiveObservables {
    /// Evaluate every closed form at once; fails at `g = 1` where the
    /// squeezing and the position variance diverge.
    pub fn evaluate(params: &ModelParams) -> Result<Self, EffectiveError> {
        let (r_squeeze, alpha) = squeeze_and_displacement(params)?;
        let (dx, dp) = quadrature_variances(params.g)?;
        Ok(EffectiveObservables {
            epsilon: excitation_energy(params),
            r_squeeze,
            alpha,
            e_g: ground_energy_rescaled(params.g) * params.omega0,
            n_c: order_parameter(params.g),
            dx,
            dp,
        })
    }
}

/// Finite-frequency values of the critical observables at `g = g_c`.
#[derive(Debug, Clone, Copy)]
pub struct FiniteFreqPredictions {
    /// Excitation energy `(2Ω/3ω0)^{-1/3}` (units ω0).
    pub eps_gc: f64,
    /// Position spread `(2Ω/3ω0)^{1/6}`.
    pub dx_gc: f64,
    /// Correction to the rescaled ground energy, `(1/4)(2Ω/3ω0)^{-4/3}` (units ω0).
    pub eg_corr: f64,
    /// Rescaled photon number `(1/6)(2Ω/3ω0)^{-2/3}`.
    pub nc_corr: f64,
}

/// Result of the variational minimization of the quartic Hamiltonian over
/// squeezed vacua.
#[derive(Debug, Clone, Copy)]
pub struct VariationalResult {
    /// Optimal squeezing parameter.
    pub s_opt: f64,
    /// Minimized energy with the constant −Ω/2 subtracted (units ω0).
    pub energy: f64,
    /// Position spread `e^{s*}` of the optimal state.
    pub dx: f64,
    /// Photon number `sinh² s*` of the optimal state.
    pub n_phot: f64,
}

/// Classify the phase at coupling `g`; exact comparison against `g_c = 1`.
pub fn classify_phase(g: f64) -> Result<Phase, EffectiveError> {
    if !(g.is_finite() && g >= 0.0) {
        return Err(EffectiveError::NegativeCoupling(g));
    }
    Ok(if g < 1.0 {
        Phase::Normal
    } else if g == 1.0 {
        Phase::Critical
    } else {
        Phase::Superradiant
    })
}

/// Excitation energy in units of ω0: `√(1−g²)` below, `√(1−g⁻⁴)` above the
/// transition; both branches vanish at `g = 1`.
pub fn excitation_energy(params: &ModelParams) -> f64 {
    params.omega0 * excitation_energy_unit(params.g)
}

/// Excitation energy with ω0 = 1.
pub fn excitation_energy_unit(g: f64) -> f64 {
    if g <= 1.0 {
        (1.0 - g * g).sqrt()
    } else {
        (1.0 - g.powi(-4)).sqrt()
    }
}

/// Rescaled ground energy `e_G = (ω0/Ω) E_G` with ω0 = 1: `−1/2` in the
/// normal phase, `−(g² + g⁻²)/4` in the superradiant phase; continuous at `g = 1`.
pub fn ground_energy_rescaled(g: f64) -> f64 {
    if g <= 1.0 {
        -0.5
    } else {
        -(g * g + g.powi(-2)) / 4.0
    }
}

/// Second derivative of `e_G` with respect to `g` (ω0 = 1); discontinuous at
/// the transition, undefined exactly at `g = 1`.
pub fn d2_ground_energy(g: f64) -> Result<f64, EffectiveError> {
    if g == 1.0 {
        return Err(EffectiveError::UndefinedAtCritical("d²e_G/dg²"));
    }
    Ok(if g < 1.0 {
        0.0
    } else {
        -(2.0 + 6.0 * g.powi(-4)) / 4.0
    })
}

/// Order parameter `n_c`: zero through the transition, `(g⁴−1)/(4g²)` above it.
pub fn order_parameter(g: f64) -> f64 {
    if g <= 1.0 {
        0.0
    } else {
        (g.powi(4) - 1.0) / (4.0 * g * g)
    }
}

/// Ground-state squeezing parameter and field displacement.
///
/// The squeezing diverges at `g = 1`. For `g > 1` the displacement
/// `α_g = √(Ω(g⁴−1)/(4g²ω0))` requires a finite ratio; in the `Ω → ∞` limit
/// the finite rescaled value `α·√(ω0/Ω)` is reported instead.
pub fn squeeze_and_displacement(
    params: &ModelParams,
) -> Result<(f64, Displacement), EffectiveError> {
    let g = params.g;
    if g == 1.0 {
        return Err(EffectiveError::DivergentSqueezing);
    }
    if g < 1.0 {
        let r = -0.25 * (1.0 - g * g).ln();
        Ok((r, Displacement::Alpha(0.0)))
    } else {
        let r = -0.25 * (1.0 - g.powi(-4)).ln();
        let rescaled = ((g.powi(4) - 1.0) / (4.0 * g * g)).sqrt();
        let alpha = match params.ratio {
            FreqRatio::Finite(ratio) => Displacement::Alpha(ratio.sqrt() * rescaled),
            FreqRatio::Infinite => Displacement::AlphaRescaled(rescaled),
        };
        Ok((r, alpha))
    }
}

/// Quadrature standard deviations `(Δx, Δp)` of the ground state.
///
/// `Δx·Δp = 1` for every `g ≠ 1` (minimum-uncertainty state); both diverge
/// respectively vanish at the critical point.
pub fn quadrature_variances(g: f64) -> Result<(f64, f64), EffectiveError> {
    if g == 1.0 {
        return Err(EffectiveError::DivergentVariance);
    }
    if !(g.is_finite() && g >= 0.0) {
        return Err(EffectiveError::NegativeCoupling(g));
    }
    let dx = if g < 1.0 {
        (1.0 - g * g).powf(-0.25)
    } else {
        (1.0 - g.powi(-4)).powf(-0.25)
    };
    Ok((dx, 1.0 / dx))
}

/// Closed-form finite-frequency values at the critical point, all expressed
/// through `q = 2Ω/3ω0` (ω0 = 1 units).
pub fn finite_freq_predictions(ratio: FreqRatio) -> Result<FiniteFreqPredictions, EffectiveError> {
    let r = ratio.value().ok_or(EffectiveError::InfiniteRatio)?;
    let q = 2.0 * r / 3.0;
    Ok(FiniteFreqPredictions {
        eps_gc: q.powf(-1.0 / 3.0),
        dx_gc: q.powf(1.0 / 6.0),
        eg_corr: 0.25 * q.powf(-4.0 / 3.0),
        nc_corr: q.powf(-2.0 / 3.0) / 6.0,
    })
}

/// Variational energy of the squeezed vacuum `S[s]|0⟩` under the quartic
/// Hamiltonian, constant −Ω/2 subtracted (ω0 = 1 units).
pub fn variational_energy(s: f64, g: f64, ratio: f64) -> f64 {
    let e2s = (2.0 * s).exp();
    let sh = s.sinh();
    sh * sh - g * g / 4.0 * e2s + 3.0 * g.powi(4) / (16.0 * ratio) * e2s * e2s
        + g * g / (4.0 * ratio)
}

/// Minimize the variational energy over the squeezing parameter
/// `s ∈ [0, s_max]` with `s_max = max(5, ln(ratio)/3 + 2)`; the quartic term
/// guarantees `E → ∞` as `s → ∞` so the minimum is interior.
pub fn variational_minimize(
    g: f64,
    ratio: FreqRatio,
    tol: f64,
) -> Result<VariationalResult, EffectiveError> {
    let r = ratio.value().ok_or(EffectiveError::InfiniteRatio)?;
    if !(0.0..=1.0).contains(&g) {
        return Err(EffectiveError::CouplingOutOfRange(g, "[0, 1]"));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(EffectiveError::NonpositiveTolerance(tol));
    }
    let s_max = (r.ln() / 3.0 + 2.0).max(5.0);
    let (s_opt, energy) = brent_minimize(|s| variational_energy(s, g, r), 0.0, s_max, tol, 200);
    if s_opt > s_max - 10.0 * tol {
        return Err(EffectiveError::BracketFailure(s_max));
    }
    let s_opt = s_opt.max(0.0);
    let sh = s_opt.sinh();
    Ok(VariationalResult {
        s_opt,
        energy,
        dx: s_opt.exp(),
        n_phot: sh * sh,
    })
}

/// Bounded scalar minimization by Brent's method (golden section with
/// parabolic interpolation), tolerance on the abscissa.
pub(crate) fn brent_minimize<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    const GOLD: f64 = 0.381_966_011_250_105_2; // (3 - sqrt 5)/2
    let (mut a, mut b) = if a < b { (a, b) } else { (b, a) };
    let mut x = a + GOLD * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d = 0.0_f64;
    let mut e = 0.0_f64;

    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-300;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut take_golden = true;
        if e.abs() > tol1 {
            // trial parabolic step through (v, w, x)
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                take_golden = false;
            }
        }
        if take_golden {
            e = if x < m { b - x } else { a - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(g: f64, ratio: FreqRatio) -> ModelParams {
        ModelParams::new(1.0, ratio, g).unwrap()
    }

    #[test]
    fn phase_classification() {
        assert_eq!(classify_phase(0.5).unwrap(), Phase::Normal);
        assert_eq!(classify_phase(1.0).unwrap(), Phase::Critical);
        assert_eq!(classify_phase(1.5).unwrap(), Phase::Superradiant);
        assert!(classify_phase(-0.1).is_err());
    }

    #[test]
    fn lambda_accessor() {
        let p = params(0.8, FreqRatio::finite(100.0).unwrap());
        // g sqrt(omega0^2 ratio)/2 = 0.8*10/2
        assert!((p.lambda().unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(
            params(0.8, FreqRatio::Infinite).lambda(),
            Err(EffectiveError::InfiniteRatio)
        );
    }

    #[test]
    fn excitation_energy_branches() {
        assert_eq!(excitation_energy(&params(0.0, FreqRatio::Infinite)), 1.0);
        assert!((excitation_energy(&params(0.6, FreqRatio::Infinite)) - 0.8).abs() < 1e-15);
        assert_eq!(excitation_energy(&params(1.0, FreqRatio::Infinite)), 0.0);
        let e = excitation_energy(&params(2f64.sqrt(), FreqRatio::Infinite));
        assert!((e - 0.866_025_403_784_438_6).abs() < 1e-15);
    }

    #[test]
    fn ground_energy_and_curvature() {
        assert_eq!(ground_energy_rescaled(0.3), -0.5);
        assert_eq!(ground_energy_rescaled(1.0), -0.5);
        assert!((ground_energy_rescaled(2.0) + 1.0625).abs() < 1e-15);
        assert_eq!(d2_ground_energy(0.5).unwrap(), 0.0);
        assert!((d2_ground_energy(2.0).unwrap() + 0.59375).abs() < 1e-15);
        assert!(d2_ground_energy(1.0).is_err());
        // right limit of the curvature is -2
        assert!((d2_ground_energy(1.0 + 1e-9).unwrap() + 2.0).abs() < 1e-7);
    }

    #[test]
    fn d2_matches_finite_differences() {
        // central second difference of e_G just above the transition
        let g = 1.0 + 1e-4;
        let h = 1e-5;
        let fd = (ground_energy_rescaled(g + h) - 2.0 * ground_energy_rescaled(g)
            + ground_energy_rescaled(g - h))
            / (h * h);
        assert!((fd - d2_ground_energy(g).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn order_parameter_onset() {
        assert_eq!(order_parameter(0.9), 0.0);
        assert_eq!(order_parameter(1.0), 0.0);
        assert!((order_parameter(2f64.sqrt()) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn squeezing_and_alpha() {
        let (r, a) = squeeze_and_displacement(&params(0.0, FreqRatio::Infinite)).unwrap();
        assert_eq!((r, a.value()), (0.0, 0.0));
        let (r, _) = squeeze_and_displacement(&params(0.6, FreqRatio::Infinite)).unwrap();
        assert!((r - 0.111_571_775_657_104_87).abs() < 1e-15);
        assert_eq!(
            squeeze_and_displacement(&params(1.0, FreqRatio::Infinite)),
            Err(EffectiveError::DivergentSqueezing)
        );
        // alpha at g = sqrt2, ratio 100: sqrt(100*3/8)
        let (_, a) =
            squeeze_and_displacement(&params(2f64.sqrt(), FreqRatio::finite(100.0).unwrap()))
                .unwrap();
        assert!(!a.is_rescaled());
        assert!((a.value() - 6.123_724_356_957_945).abs() < 1e-12);
        // infinite ratio reports the rescaled value alpha*sqrt(omega0/Omega)
        let (_, a) = squeeze_and_displacement(&params(2f64.sqrt(), FreqRatio::Infinite)).unwrap();
        assert!(a.is_rescaled());
        assert!((a.value() - 0.612_372_435_695_794_5).abs() < 1e-12);
    }

    #[test]
    fn quadratures() {
        assert_eq!(quadrature_variances(0.0).unwrap(), (1.0, 1.0));
        let (dx, dp) = quadrature_variances(0.6).unwrap();
        assert!((dx - 1.118_033_988_749_894_9).abs() < 1e-15);
        assert!((dp - 0.894_427_190_999_915_9).abs() < 1e-15);
        assert!(quadrature_variances(1.0).is_err());
    }

    #[test]
    fn minimum_uncertainty_everywhere() {
        for i in 0..200 {
            let g = 2.0 * (i as f64) / 199.0;
            if g == 1.0 {
                continue;
            }
            let (dx, dp) = quadrature_variances(g).unwrap();
            assert!((dx * dp - 1.0).abs() < 1e-12, "g={g}");
        }
    }

    #[test]
    fn divergence_exponent_of_dx() {
        let (dx1, _) = quadrature_variances(0.99).unwrap();
        let (dx2, _) = quadrature_variances(0.999).unwrap();
        let ratio = dx2 / dx1;
        assert!((ratio - 10f64.powf(0.25)).abs() < 0.002 * 10f64.powf(0.25));
    }

    #[test]
    fn branch_continuity_at_critical() {
        // e_G is continuous through g = 1
        let d = 1e-6;
        assert!((ground_energy_rescaled(1.0 - d) - ground_energy_rescaled(1.0 + d)).abs() < 1e-8);
        // both excitation branches return exactly zero at g = 1
        assert_eq!((1.0f64 - 1.0).sqrt(), 0.0);
        assert_eq!(excitation_energy_unit(1.0), 0.0);
        // and vanish from either side
        assert!(excitation_energy_unit(1.0 - d) < 2.1e-3);
        assert!(excitation_energy_unit(1.0 + d) < 2.1e-3);
    }

    #[test]
    fn exponent_recovery_near_critical() {
        // least-squares slope of log eps vs log(1-g) over 1-g in [1e-4, 1e-2]
        let n = 50;
        let mut pts_eps = Vec::new();
        let mut pts_dx = Vec::new();
        for i in 0..n {
            let lo = -4.0 + 2.0 * (i as f64) / ((n - 1) as f64);
            let omg = 10f64.powf(lo);
            let g = 1.0 - omg;
            pts_eps.push((omg, excitation_energy_unit(g)));
            pts_dx.push((omg, quadrature_variances(g).unwrap().0));
        }
        let slope = |pts: &[(f64, f64)]| {
            let n = pts.len() as f64;
            let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
            for &(x, y) in pts {
                let (lx, ly) = (x.log10(), y.log10());
                sx += lx;
                sy += ly;
                sxx += lx * lx;
                sxy += lx * ly;
            }
            (n * sxy - sx * sy) / (n * sxx - sx * sx)
        };
        assert!((slope(&pts_eps) - 0.5).abs() < 1e-3);
        assert!((slope(&pts_dx) + 0.25).abs() < 1e-3);
    }

    #[test]
    fn finite_freq_closed_forms() {
        let p = finite_freq_predictions(FreqRatio::finite(1e3).unwrap()).unwrap();
        assert!((p.eps_gc - 1.144_714_242_553_332e-1).abs() < 1e-15);
        assert!((p.dx_gc - 2.955_639_465_050_327_7).abs() < 1e-14);
        assert!((p.eg_corr - 4.292_678_409_574_996_6e-5).abs() < 1e-18);
        assert!((p.nc_corr - 2.183_951_161_840_747_8e-3).abs() < 1e-16);
        assert!(finite_freq_predictions(FreqRatio::Infinite).is_err());
    }

    #[test]
    fn finite_freq_exact_exponents() {
        // closed forms must scale exactly; slopes to machine precision
        let ratios = [1e2, 1e3, 1e4];
        let slope = |f: &dyn Fn(&FiniteFreqPredictions) -> f64| {
            let y: Vec<f64> = ratios
                .iter()
                .map(|&r| f(&finite_freq_predictions(FreqRatio::finite(r).unwrap()).unwrap()))
                .collect();
            (y[2].log10() - y[0].log10()) / 2.0
        };
        assert!((slope(&|p| p.eps_gc) + 1.0 / 3.0).abs() < 1e-12);
        assert!((slope(&|p| p.dx_gc) - 1.0 / 6.0).abs() < 1e-12);
        assert!((slope(&|p| p.nc_corr) + 2.0 / 3.0).abs() < 1e-12);
        assert!((slope(&|p| p.eg_corr) + 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn variational_uncoupled() {
        let v = variational_minimize(0.0, FreqRatio::finite(1e3).unwrap(), 1e-12).unwrap();
        assert!(v.s_opt.abs() < 1e-6);
        assert!(v.energy.abs() < 1e-12);
    }

    #[test]
    fn variational_matches_closed_form_minimizer() {
        // at g = 1 the optimum satisfies y^3 = 2 ratio / 3 with y = e^{2s}
        for &r in &[1e2, 1e3, 1e4] {
            let v = variational_minimize(1.0, FreqRatio::finite(r).unwrap(), 1e-10).unwrap();
            let y = (2.0 * r / 3.0).powf(1.0 / 3.0);
            assert!((v.dx - y.sqrt()).abs() < 1e-6, "ratio {r}: dx {}", v.dx);
            let e_expect = 3.0 / (8.0 * y) - 0.5 + 1.0 / (4.0 * r);
            assert!((v.energy - e_expect).abs() < 1e-9, "ratio {r}");
        }
        // energy above the Omega->infinity critical value, ratio = 1e3
        let v = variational_minimize(1.0, FreqRatio::finite(1e3).unwrap(), 1e-10).unwrap();
        assert!((v.energy + 0.5 - 4.317_678_409_574_995e-2).abs() < 1e-9);
    }

    #[test]
    fn exponents_consistent() {
        let ce = CriticalExponents::default();
        assert!(ce.consistent());
        assert_eq!(ce.znu, 0.5);
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!("inf".parse::<FreqRatio>().unwrap(), FreqRatio::Infinite);
        assert_eq!(
            "1e3".parse::<FreqRatio>().unwrap(),
            FreqRatio::Finite(1000.0)
        );
        assert!("-2".parse::<FreqRatio>().is_err());
        assert!("xyz".parse::<FreqRatio>().is_err());
    }

    #[test]
    fn brent_finds_quadratic_minimum() {
        let (x, fx) = brent_minimize(|x| (x - 0.3).powi(2) + 1.0, 0.0, 5.0, 1e-12, 200);
        assert!((x - 0.3).abs() < 1e-8);
        assert!((fx - 1.0).abs() < 1e-15);
    }
}
