//! Explicit upwind solver for the kinetic equation in the original variables
//! `f(t, x, v)`, used as a reference at moderate `eps`, and the Hopf-Cole
//! change of variables between `f` and `(phi, eta)`.

use rayon::prelude::*;

use crate::discretization::{quadrature, Equilibrium, Grid};
use crate::error::{Error, Result};
use crate::micromacro::cap_initial_phase;
use crate::scalar::{clamped_exp, Real};

/// Phase-space density at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionField<T> {
    /// Row-major `f[i * n_v + j]`.
    pub f: Vec<T>,
    /// `rho_i = <f_{i,.}>`.
    pub rho: Vec<T>,
    pub eps: T,
    pub r: T,
    pub n: usize,
    pub n_v: usize,
}

impl<T: Real> DistributionField<T> {
    pub fn row(&self, i: usize) -> &[T] {
        &self.f[i * self.n_v..(i + 1) * self.n_v]
    }

    /// Builds a field from densities and recomputes `rho` by quadrature.
    pub fn from_values(f: Vec<T>, n_v: usize, dv: T, eps: T, r: T, n: usize) -> Self {
        let rho = f.chunks(n_v).map(|row| quadrature(dv, row)).collect();
        DistributionField { f, rho, eps, r, n, n_v }
    }
}

/// Advisory step bound `0.9 min(dx / v_max, eps / (1 + 2 r))`.
pub fn stable_dt<T: Real>(grid: &Grid<T>, eps: T, r: T) -> T {
    let transport = grid.dx / grid.v_max;
    let relaxation = eps / (T::one() + T::lit(2.0) * r);
    T::lit(0.9) * transport.min(relaxation)
}

/// Warns when the time step exceeds [`stable_dt`]. Returns whether it did.
pub fn check_stability<T: Real>(grid: &Grid<T>, eps: T, r: T) -> bool {
    let limit = stable_dt(grid, eps, r);
    if grid.dt > limit {
        log::warn!(
            "explicit scheme: dt = {} exceeds the advisory bound {}; the run may be unstable",
            grid.dt,
            limit
        );
        return true;
    }
    false
}

/// `f^{n+1} = f - dt [v df/dx] + (dt/eps)(rho M - f + r rho (M - f))`
/// with upwind transport and the grid's boundary rule.
pub fn explicit_step<T: Real>(field: &DistributionField<T>, grid: &Grid<T>, eq: &Equilibrium<T>) -> Result<DistributionField<T>> {
    let n_v = grid.n_v;
    let (dt, dx, eps, r) = (grid.dt, grid.dx, field.eps, field.r);
    let next_n = field.n + 1;
    let rows: Vec<Vec<T>> = (0..grid.n_x)
        .into_par_iter()
        .map(|i| {
            let (l, rt) = (grid.left(i), grid.right(i));
            let rho = field.rho[i];
            let mut row = Vec::with_capacity(n_v);
            for j in 0..n_v {
                let v = grid.v[j];
                let f = field.f[i * n_v + j];
                let transport = if v > T::zero() {
                    v * (f - field.f[l * n_v + j]) / dx
                } else {
                    v * (field.f[rt * n_v + j] - f) / dx
                };
                let m = eq.values()[j];
                let source = rho * m - f + r * rho * (m - f);
                let value = f - dt * transport + dt / eps * source;
                if !value.is_finite() {
                    return Err(Error::Overflow {
                        cell: i,
                        detail: format!("explicit update at velocity {j} is not finite"),
                    }
                    .at_step(next_n));
                }
                if value < T::zero() {
                    return Err(Error::NegativeDensity {
                        step: next_n,
                        i,
                        j,
                        value: value.as_f64(),
                    });
                }
                row.push(value);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let f: Vec<T> = rows.into_iter().flatten().collect();
    Ok(DistributionField::from_values(f, n_v, grid.dv, eps, r, next_n))
}

/// Hopf-Cole variables of a distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct HopfCole<T> {
    pub phi: Vec<T>,
    /// Row-major; entries with `mask == false` are set to zero.
    pub eta: Vec<T>,
    /// `false` where `M_j = 0`, where `eta` is undefined.
    pub mask: Vec<bool>,
    /// Some logarithm argument was below [`LOG_FLOOR`] and was raised to it.
    pub capped: bool,
}

pub const LOG_FLOOR: f64 = 1e-300;

/// `phi = -eps ln rho`, `eta = -eps ln(f / (rho M))`.
pub fn to_hopf_cole<T: Real>(field: &DistributionField<T>, eq: &Equilibrium<T>) -> HopfCole<T> {
    let floor = T::lit(LOG_FLOOR).max(T::min_positive_value());
    let mut capped = false;
    let mut log_of = |a: T| -> T {
        if !(a >= floor) {
            capped = true;
            floor.ln()
        } else {
            a.ln()
        }
    };
    let eps = field.eps;
    let n_v = field.n_v;
    let mut phi = Vec::with_capacity(field.rho.len());
    let mut eta = Vec::with_capacity(field.f.len());
    let mut mask = Vec::with_capacity(field.f.len());
    for (i, &rho) in field.rho.iter().enumerate() {
        let log_rho = log_of(rho);
        phi.push(-eps * log_rho);
        for j in 0..n_v {
            let m = eq.values()[j];
            if m == T::zero() {
                eta.push(T::zero());
                mask.push(false);
                continue;
            }
            // ln(f / (rho M)) = ln f - ln rho - ln M keeps tiny densities representable.
            let value = -eps * (log_of(field.f[i * n_v + j]) - log_rho - m.ln());
            eta.push(value);
            mask.push(true);
        }
    }
    HopfCole { phi, eta, mask, capped }
}

/// `f = M e^{-(phi + eta)/eps}`, `rho` by quadrature.
pub fn from_hopf_cole<T: Real>(phi: &[T], eta: &[T], eps: T, r: T, eq: &Equilibrium<T>) -> Result<DistributionField<T>> {
    let n_v = eq.len();
    if eta.len() != phi.len() * n_v {
        return Err(Error::Config(format!(
            "eta has {} values, expected {}",
            eta.len(),
            phi.len() * n_v
        )));
    }
    let mut f = Vec::with_capacity(eta.len());
    for (i, &p) in phi.iter().enumerate() {
        for j in 0..n_v {
            let value = eq.values()[j] * clamped_exp(-(p + eta[i * n_v + j]) / eps);
            if !value.is_finite() {
                return Err(Error::Overflow {
                    cell: i,
                    detail: format!("Hopf-Cole inverse at velocity {j} is not finite"),
                });
            }
            f.push(value);
        }
    }
    Ok(DistributionField::from_values(f, n_v, eq.dv(), eps, r, 0))
}

#[derive(Clone, Debug)]
pub struct ExplicitSnapshot<T> {
    pub time: T,
    pub field: DistributionField<T>,
}

#[derive(Clone, Debug)]
pub struct ExplicitTrajectory<T> {
    pub snapshots: Vec<ExplicitSnapshot<T>>,
    /// The time step exceeded the advisory stability bound.
    pub stability_warning: bool,
}

impl<T: Real> ExplicitTrajectory<T> {
    pub fn last(&self) -> &DistributionField<T> {
        &self.snapshots.last().expect("trajectory is never empty").field
    }

    pub fn at_time(&self, t: T) -> &DistributionField<T> {
        &self
            .snapshots
            .iter()
            .min_by(|a, b| (a.time - t).abs().partial_cmp(&(b.time - t).abs()).unwrap())
            .expect("trajectory is never empty")
            .field
    }
}

/// Runs from the equilibrium initial data `f = M e^{-phi_in/eps}`.
#[allow(clippy::too_many_arguments)]
pub fn run_explicit<T: Real>(
    phi_in: &[T],
    grid: &Grid<T>,
    eq: &Equilibrium<T>,
    eps: T,
    r: T,
    phi_cap: T,
    times: &[T],
) -> Result<ExplicitTrajectory<T>> {
    if !(eps > T::zero()) {
        return Err(Error::Config(format!("epsilon must be positive, got {eps}")));
    }
    if phi_in.len() != grid.n_x {
        return Err(Error::Config(format!(
            "initial phase has {} values for {} cells",
            phi_in.len(),
            grid.n_x
        )));
    }
    let stability_warning = check_stability(grid, eps, r);
    let phi = cap_initial_phase(phi_in, phi_cap)?;
    let eta = vec![T::zero(); grid.n_x * grid.n_v];
    let mut field = from_hopf_cole(&phi, &eta, eps, r, eq)?;
    let wanted = crate::micromacro::snapshot_steps(grid, times);
    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut next_wanted = wanted.iter().peekable();
    loop {
        if next_wanted.peek() == Some(&&field.n) {
            snapshots.push(ExplicitSnapshot {
                time: grid.time(field.n),
                field: field.clone(),
            });
            next_wanted.next();
        }
        if field.n >= grid.n_t {
            break;
        }
        field = explicit_step(&field, grid, eq)?;
    }
    Ok(ExplicitTrajectory {
        snapshots,
        stability_warning,
    })
}
