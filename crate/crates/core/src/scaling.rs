//! Power-law exponent extraction and Kibble-Zurek freeze-out analysis.
//!
//! Exponents are read off by ordinary least squares on `(log10 x, log10 y)`,
//! either over one window, or over a sliding log-window of fixed half-width
//! which approximates the local slope. The freeze-out coupling `ĝ` divides a
//! linear quench into adiabatic and impulsive stages via `η²(t̂) = |η̇(t̂)|`
//! for the accessible gap `η = 2ω0√(1−g²)`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScalingError {
    #[error("fit window must satisfy lo < hi, got ({0}, {1})")]
    BadWindow(f64, f64),
    #[error("need at least 3 points strictly inside the window, found {0}")]
    InsufficientPoints(usize),
    #[error("log-log fit requires strictly positive data, found ({0}, {1})")]
    NonpositiveData(f64, f64),
    #[error("window half-width must be strictly positive, got {0}")]
    BadHalfWidth(f64),
    #[error("quench time must be strictly positive, got {0}")]
    NonpositiveQuenchTime(f64),
    #[error("cavity frequency must be strictly positive, got {0}")]
    NonpositiveFrequency(f64),
}

/// Exponent, amplitude, window and goodness of a log-log least-squares fit.
#[derive(Debug, Clone, Copy)]
pub struct PowerLawFit {
    /// Fitted exponent (slope in log10-log10 space).
    pub mu: f64,
    /// Standard error of the slope.
    pub mu_stderr: f64,
    /// Intercept in log10 space.
    pub log_amplitude: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub n_points: usize,
}

/// Default half-width of the sliding log-window.
pub const DEFAULT_SLIDING_HALF_WIDTH: f64 = 6.25e-2;

/// Ordinary least squares on `(log10 x, log10 y)` over the points strictly
/// inside `window`.
pub fn fit_loglog(points: &[(f64, f64)], window: (f64, f64)) -> Result<PowerLawFit, ScalingError> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(ScalingError::BadWindow(lo, hi));
    }
    let inside: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, _)| x > lo && x < hi)
        .collect();
    if inside.len() < 3 {
        return Err(ScalingError::InsufficientPoints(inside.len()));
    }
    for &(x, y) in &inside {
        if !(x > 0.0 && y > 0.0) {
            return Err(ScalingError::NonpositiveData(x, y));
        }
    }
    let n = inside.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(x, y) in &inside {
        sx += x.log10();
        sy += y.log10();
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in &inside {
        let dx = x.log10() - mx;
        sxx += dx * dx;
        sxy += dx * (y.log10() - my);
    }
    if sxx == 0.0 {
        return Err(ScalingError::BadWindow(lo, hi));
    }
    let mu = sxy / sxx;
    let intercept = my - mu * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for &(x, y) in &inside {
        let r = y.log10() - (intercept + mu * x.log10());
        ss_res += r * r;
        ss_tot += (y.log10() - my).powi(2);
    }
    let dof = (inside.len() as f64 - 2.0).max(1.0);
    Ok(PowerLawFit {
        mu,
        mu_stderr: (ss_res / dof / sxx).sqrt(),
        log_amplitude: intercept,
        window,
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
        n_points: inside.len(),
    })
}

/// Local exponents from symmetric log-windows `[x/Δ, x·Δ]` of half-width
/// `delta_log` (log10) around each sample; centers with fewer than three
/// usable points are skipped, as are nonpositive samples.
pub fn sliding_window_exponents(
    points: &[(f64, f64)],
    delta_log: f64,
) -> Result<Vec<(f64, PowerLawFit)>, ScalingError> {
    if !(delta_log.is_finite() && delta_log > 0.0) {
        return Err(ScalingError::BadHalfWidth(delta_log));
    }
    let usable: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, y)| x > 0.0 && y > 0.0)
        .collect();
    let factor = 10f64.powf(delta_log);
    let mut out = Vec::new();
    for &(xc, _) in &usable {
        // widen by an ulp so samples exactly on the rim stay inside
        let window = (xc / factor * (1.0 - 1e-12), xc * factor * (1.0 + 1e-12));
        match fit_loglog(&usable, window) {
            Ok(fit) => out.push((xc, fit)),
            Err(ScalingError::InsufficientPoints(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Freeze-out analysis of a linear quench ending at the critical point.
#[derive(Debug, Clone, Copy)]
pub struct FreezeOut {
    /// Root of `η²(t̂) = |η̇(t̂)|` expressed as a coupling.
    pub g_hat_numeric: f64,
    /// Large-τ_q asymptotic form `g_c − (4√2 ω0 τ_q)^{-2/3}`.
    pub g_hat_asymptotic: f64,
    pub tau_q: f64,
    /// Set when no freeze-out point exists inside the ramp.
    pub impulsive_from_start: bool,
}

/// Solve the freeze-out condition for `g(t) = t/τ_q`.
///
/// With `η = 2ω0√(1−g²)` the condition `η² = |η̇|` reduces to
/// `2ω0 τ_q (1−g²)^{3/2} = g`, monotone on (0, 1), solved by bisection to
/// 10⁻¹² in `g`.
pub fn freeze_out(tau_q: f64, omega0: f64) -> Result<FreezeOut, ScalingError> {
    if !(tau_q.is_finite() && tau_q > 0.0) {
        return Err(ScalingError::NonpositiveQuenchTime(tau_q));
    }
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(ScalingError::NonpositiveFrequency(omega0));
    }
    let wt = omega0 * tau_q;
    let g_hat_asymptotic = 1.0 - (4.0 * 2f64.sqrt() * wt).powf(-2.0 / 3.0);
    let f = |g: f64| 2.0 * wt * (1.0 - g * g).max(0.0).powf(1.5) - g;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if f(lo) <= 0.0 || f(hi) >= 0.0 {
        return Ok(FreezeOut {
            g_hat_numeric: f64::NAN,
            g_hat_asymptotic,
            tau_q,
            impulsive_from_start: true,
        });
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FreezeOut {
        g_hat_numeric: 0.5 * (lo + hi),
        g_hat_asymptotic,
        tau_q,
        impulsive_from_start: false,
    })
}

/// Universal Kibble-Zurek prediction `E_r ∝ τ_q^{-zν/(zν+1)}`.
pub fn kzm_predicted_exponent(znu: f64) -> f64 {
    assert!(znu > 0.0, "znu must be positive");
    -znu / (znu + 1.0)
}
