//! The nonlinear system of one spatial cell and its Newton solver.
//!
//! Unknowns are the corrector row `eta_j` and the Hamiltonian `H`. With
//! `E_j = e^{eta_j/eps}` and `R = e^{(dt (H + r) - phi^n)/eps} = e^{-phi^{n+1}/eps}`
//! the residual is
//!
//! ```text
//! F_j     = 1 + H + r - (eta_j - eta^n_j)/dt - T_j + r R - (1 + r) E_j
//! F_{N+1} = <M e^{-eta/eps}> - 1
//! ```
//!
//! where `T_j` is the explicit upwind transport at level `n`.

use std::fmt;

use super::arrowhead::ArrowheadSystem;
use crate::error::{Error, Result};
use crate::scalar::{clamped_exp, max_abs, Real};

/// Outcome of one Newton solve.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Max-norm of the residual at the returned iterate.
    pub residual: f64,
    pub converged: bool,
}

impl fmt::Display for NewtonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} iterations, residual {:e}, {}",
            self.iterations,
            self.residual,
            if self.converged { "converged" } else { "not converged" }
        )
    }
}

/// Newton controls shared by every cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Halve the step (up to 10 times) when it would increase the residual.
    pub damping: bool,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            tol: 1e-10,
            max_iter: 50,
            damping: true,
        }
    }
}

const MAX_HALVINGS: usize = 10;

/// Level-`n` data that defines the system of one cell.
#[derive(Clone, Copy, Debug)]
pub struct CellProblem<'a, T> {
    pub cell: usize,
    pub eta_prev: &'a [T],
    pub phi_prev: T,
    /// Upwind transport `[v d/dx (phi + eta)]^n_j`.
    pub transport: &'a [T],
    pub maxwellian: &'a [T],
    pub dv: T,
    pub dt: T,
    pub eps: T,
    pub r: T,
}

/// Converged values for one cell.
#[derive(Clone, Debug)]
pub struct CellSolution<T> {
    pub eta: Vec<T>,
    pub h: T,
    pub report: NewtonReport,
}

impl<'a, T: Real> CellProblem<'a, T> {
    fn n_v(&self) -> usize {
        self.eta_prev.len()
    }

    /// `e^{-phi^{n+1}/eps}` with `phi^{n+1} = phi^n - dt (H + r)`.
    fn reaction_factor(&self, h: T) -> T {
        clamped_exp((self.dt * (h + self.r) - self.phi_prev) / self.eps)
    }

    /// Largest `H` keeping `phi^{n+1} >= 0`. Only enforced when `r > 0`, where
    /// it bounds the stiff reaction exponential by one.
    fn h_ceiling(&self) -> Option<T> {
        (self.r > T::zero()).then(|| self.phi_prev / self.dt - self.r)
    }

    fn project(&self, h: T) -> T {
        match self.h_ceiling() {
            Some(c) if h > c => c,
            _ => h,
        }
    }

    /// Writes the `N + 1` residual components into `out`.
    pub fn residual_into(&self, eta: &[T], h: T, out: &mut [T]) -> Result<()> {
        let mut exps = vec![T::zero(); self.n_v()];
        self.evaluate(eta, h, out, &mut exps)
    }

    /// Residual into `out`, keeping `e^{eta_j/eps}` in `exps` for the Jacobian.
    fn evaluate(&self, eta: &[T], h: T, out: &mut [T], exps: &mut [T]) -> Result<()> {
        let n = self.n_v();
        let one = T::one();
        let reaction = if self.r > T::zero() {
            self.r * self.reaction_factor(h)
        } else {
            T::zero()
        };
        let base = one + h + self.r + reaction;
        let mut moment = T::zero();
        for j in 0..n {
            let e = clamped_exp(eta[j] / self.eps);
            exps[j] = e;
            out[j] = base - (eta[j] - self.eta_prev[j]) / self.dt - self.transport[j] - (one + self.r) * e;
            moment = moment + self.maxwellian[j] / e;
        }
        out[n] = self.dv * moment - one;
        if let Some(k) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::Overflow {
                cell: self.cell,
                detail: format!("residual component {k} is not finite"),
            });
        }
        Ok(())
    }

    pub fn residual(&self, eta: &[T], h: T) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.n_v() + 1];
        self.residual_into(eta, h, &mut out)?;
        Ok(out)
    }

    /// Jacobian at `(eta, H)` in ratio form. With `D_j = eps + (1 + r) dt E_j`:
    /// `1/alpha_j = -eps dt / D_j`, `gamma_j/alpha_j = dt dv M_j e^{-eta_j/eps} / D_j`,
    /// `delta_j/alpha_j = -(eps dt + r dt^2 R) / D_j`. None of these blow up as
    /// `eps -> 0` while the exponentials stay bounded.
    pub fn jacobian(&self, eta: &[T], h: T) -> Result<ArrowheadSystem<T>> {
        let exps: Vec<T> = eta.iter().map(|&e| clamped_exp(e / self.eps)).collect();
        self.jacobian_from(&exps, h)
    }

    fn jacobian_from(&self, exps: &[T], h: T) -> Result<ArrowheadSystem<T>> {
        let n = self.n_v();
        let (eps, dt, r) = (self.eps, self.dt, self.r);
        let reaction = if r > T::zero() {
            self.reaction_factor(h)
        } else {
            T::zero()
        };
        let numerator_delta = eps * dt + r * dt * dt * reaction;
        let delta = T::one() + r * dt * reaction / eps;
        let mut inv_alpha = Vec::with_capacity(n);
        let mut gamma_over_alpha = Vec::with_capacity(n);
        let mut delta_over_alpha = Vec::with_capacity(n);
        let mut s = T::zero();
        for j in 0..n {
            let e = exps[j];
            let denom = eps + (T::one() + r) * dt * e;
            let ga = dt * self.dv * self.maxwellian[j] / (e * denom);
            inv_alpha.push(-eps * dt / denom);
            gamma_over_alpha.push(ga);
            delta_over_alpha.push(-numerator_delta / denom);
            s = s + ga * delta;
        }
        ArrowheadSystem::from_ratios(inv_alpha, gamma_over_alpha, delta_over_alpha, s, self.cell)
    }

    /// Damped Newton from `(eta_guess, h_guess)`.
    pub fn solve(&self, eta_guess: &[T], h_guess: T, settings: &NewtonSettings) -> Result<CellSolution<T>> {
        let n = self.n_v();
        let tol = T::lit(settings.tol);
        let mut eta = eta_guess.to_vec();
        let mut h = self.project(h_guess);
        let mut f = vec![T::zero(); n + 1];
        let mut step = vec![T::zero(); n + 1];
        let mut trial_eta = vec![T::zero(); n];
        let mut trial_f = vec![T::zero(); n + 1];
        let mut exps = vec![T::zero(); n];
        let mut trial_exps = vec![T::zero(); n];
        self.evaluate(&eta, h, &mut f, &mut exps)?;
        let mut norm = max_abs(&f);
        let mut iterations = 0;
        while !(norm <= tol) {
            if iterations == settings.max_iter {
                return Err(Error::NewtonDiverged {
                    cell: self.cell,
                    report: NewtonReport {
                        iterations,
                        residual: norm.as_f64(),
                        converged: false,
                    },
                });
            }
            let jac = self.jacobian_from(&exps, h)?;
            jac.apply_inverse_into(&f, &mut step);
            let mut lambda = T::one();
            let mut trial_h;
            let mut trial_norm;
            let mut halvings = 0;
            loop {
                for j in 0..n {
                    trial_eta[j] = eta[j] - lambda * step[j];
                }
                trial_h = self.project(h - lambda * step[n]);
                trial_norm = match self.evaluate(&trial_eta, trial_h, &mut trial_f, &mut trial_exps) {
                    Ok(()) => max_abs(&trial_f),
                    Err(e) if !settings.damping || halvings == MAX_HALVINGS => return Err(e),
                    Err(_) => T::infinity(),
                };
                if !settings.damping || trial_norm <= norm || halvings == MAX_HALVINGS {
                    break;
                }
                lambda = lambda / T::lit(2.0);
                halvings += 1;
            }
            if !trial_norm.is_finite() {
                return Err(Error::Overflow {
                    cell: self.cell,
                    detail: "Newton iterate left the representable range".into(),
                });
            }
            std::mem::swap(&mut eta, &mut trial_eta);
            std::mem::swap(&mut f, &mut trial_f);
            std::mem::swap(&mut exps, &mut trial_exps);
            h = trial_h;
            norm = trial_norm;
            iterations += 1;
        }
        Ok(CellSolution {
            eta,
            h,
            report: NewtonReport {
                iterations,
                residual: norm.as_f64(),
                converged: true,
            },
        })
    }
}
