//! Simulation and analysis of the superradiant quantum phase transition of the
//! quantum Rabi model.
//!
//! The crate is organized around four building blocks:
//!
//! * [`effective`] — closed-form observables of the exact low-energy effective
//!   Hamiltonians in the normal and superradiant phases, together with the
//!   finite-frequency (variational) corrections at the critical point.
//! * [`ed`] — exact diagonalization of the full Rabi Hamiltonian and of the
//!   single-mode quartic Hamiltonian in truncated Fock bases, with parity-block
//!   reduction and automatic cutoff convergence.
//! * [`quench`] — slow-quench Bogoliubov dynamics `g(t) = g_f t / τ_q` integrated
//!   with an adaptive embedded Runge-Kutta scheme, plus residual-energy
//!   evaluation with the finite-frequency correction at the critical point.
//! * [`scaling`] — power-law exponent extraction (global, windowed and
//!   sliding-window log-log fits) and the Kibble-Zurek freeze-out analysis.
//!
//! All energies are expressed in units of the cavity frequency `ω0` and times in
//! units of `1/ω0` unless stated otherwise. The dimensionless coupling
//! `g = 2λ/√(ω0 Ω)` is the canonical control parameter; the critical point sits
//! at `g_c = 1`.

pub mod ed;
pub mod effective;
pub mod quench;
pub mod scaling;

pub use effective::{FreqRatio, ModelParams, Phase};

/// Critical coupling of the superradiant transition.
pub const G_CRITICAL: f64 = 1.0;
