//! Asymptotic-preserving micro-macro scheme in Hopf-Cole variables.
//!
//! The density is written `rho = e^{-phi/eps}` and the distribution
//! `f = M e^{-(phi + eta)/eps}`. Each step solves, cell by cell, a nonlinear
//! system for the corrector row `eta_{i,.}` and the Hamiltonian `H_i`, then
//! updates `phi_i <- phi_i - dt (H_i + r)`.

mod arrowhead;
mod cell;
mod transport;

pub use arrowhead::{arrowhead_apply_inverse, ArrowheadSystem, SINGULARITY_FLOOR};
pub use cell::{CellProblem, CellSolution, NewtonReport, NewtonSettings};
pub use transport::{slopes, transport_row, upwind_transport};

use rayon::prelude::*;

use crate::discretization::{Equilibrium, Grid};
use crate::error::{Error, Result};
use crate::hj_limit;
use crate::scalar::{clamped_exp, Real};

/// Macro phase, corrector and Hamiltonian at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct KineticField<T> {
    pub phi: Vec<T>,
    /// Row-major `eta[i * n_v + j]`.
    pub eta: Vec<T>,
    pub h: Vec<T>,
    pub eps: T,
    pub r: T,
    /// Time index.
    pub n: usize,
    pub n_v: usize,
}

impl<T: Real> KineticField<T> {
    pub fn eta_row(&self, i: usize) -> &[T] {
        &self.eta[i * self.n_v..(i + 1) * self.n_v]
    }

    pub fn n_x(&self) -> usize {
        self.phi.len()
    }

    /// Density `rho_i = e^{-phi_i/eps}`.
    pub fn density(&self) -> Vec<T> {
        self.phi.iter().map(|&p| clamped_exp(-p / self.eps)).collect()
    }

    /// `<M e^{-eta_{i,.}/eps}>` for every cell; equals one at solved levels.
    pub fn corrector_moments(&self, eq: &Equilibrium<T>) -> Vec<T> {
        (0..self.n_x())
            .map(|i| {
                let s: T = self
                    .eta_row(i)
                    .iter()
                    .zip(eq.values())
                    .map(|(&e, &m)| m * clamped_exp(-e / self.eps))
                    .sum();
                eq.dv() * s
            })
            .collect()
    }
}

/// How `H` is initialised for the first Newton solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HInit {
    /// Solve the limit Hamiltonian relation on the initial phase.
    #[default]
    Limit,
    Zero,
}

impl std::str::FromStr for HInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "limit" => Ok(HInit::Limit),
            "zero" => Ok(HInit::Zero),
            other => Err(Error::Config(format!("unknown h_init `{other}` (expected limit or zero)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MicroMacroConfig {
    pub eps: f64,
    pub r: f64,
    pub newton: NewtonSettings,
    pub h_init: HInit,
    /// Tolerance of the Hamiltonian root used for `HInit::Limit`.
    pub ham_tol: f64,
    /// Check the discrete maximum principle after every step.
    pub check_invariants: bool,
    /// Allowed violation of each maximum-principle bound, scaled by `max(1, m)`.
    pub invariant_tol: f64,
    /// Infinite initial phases are replaced by this value.
    pub phi_cap: f64,
}

impl MicroMacroConfig {
    pub fn new(eps: f64, r: f64) -> Self {
        MicroMacroConfig {
            eps,
            r,
            newton: NewtonSettings::default(),
            h_init: HInit::Limit,
            ham_tol: 1e-12,
            check_invariants: true,
            invariant_tol: 1e-10,
            phi_cap: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.eps)));
        }
        if !(self.r >= 0.0) || !self.r.is_finite() {
            return Err(Error::Config(format!("r must be nonnegative, got {}", self.r)));
        }
        if !(self.newton.tol > 0.0) || self.newton.max_iter == 0 {
            return Err(Error::Config("newton_tol must be positive and newton_max_iter nonzero".into()));
        }
        if !(self.phi_cap > 0.0) || !self.phi_cap.is_finite() {
            return Err(Error::Config(format!("phi_cap must be positive and finite, got {}", self.phi_cap)));
        }
        Ok(())
    }
}

/// Per-step diagnostics.
#[derive(Clone, Debug, Default)]
pub struct StepStats {
    /// Newton iterations of every cell.
    pub iterations: Vec<usize>,
    /// `max e^{eta/eps}` over the new level.
    pub max_exp_eta: f64,
    /// `max e^{-eta/eps}` over nodes with `M_j > 0`.
    pub max_exp_neg_eta: f64,
}

/// Diagnostics accumulated over a run.
#[derive(Clone, Debug, Default)]
pub struct RunStats {
    /// `histogram[k]` counts cell solves that took `k` Newton iterations.
    pub histogram: Vec<u64>,
    pub step_median: Vec<f64>,
    pub step_max: Vec<usize>,
    pub max_exp_eta: f64,
    pub max_exp_neg_eta: f64,
    /// Largest violation seen of each maximum-principle bound (0 when satisfied).
    pub max_principle_violation: [f64; 3],
}

impl RunStats {
    fn record(&mut self, s: &StepStats) {
        for &k in &s.iterations {
            if self.histogram.len() <= k {
                self.histogram.resize(k + 1, 0);
            }
            self.histogram[k] += 1;
        }
        self.step_median.push(median_usize(&s.iterations));
        self.step_max.push(s.iterations.iter().copied().max().unwrap_or(0));
        self.max_exp_eta = self.max_exp_eta.max(s.max_exp_eta);
        self.max_exp_neg_eta = self.max_exp_neg_eta.max(s.max_exp_neg_eta);
    }

    pub fn solves(&self) -> u64 {
        self.histogram.iter().sum()
    }

    /// Median Newton iterations per cell solve over the whole run.
    pub fn median_iterations(&self) -> f64 {
        let total = self.solves();
        if total == 0 {
            return 0.0;
        }
        let at = |rank: u64| {
            let mut seen = 0;
            for (k, &c) in self.histogram.iter().enumerate() {
                seen += c;
                if seen > rank {
                    return k as f64;
                }
            }
            (self.histogram.len() - 1) as f64
        };
        if total % 2 == 1 {
            at(total / 2)
        } else {
            0.5 * (at(total / 2 - 1) + at(total / 2))
        }
    }

    pub fn max_iterations(&self) -> usize {
        self.histogram.iter().rposition(|&c| c > 0).unwrap_or(0)
    }
}

fn median_usize(v: &[usize]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = v.to_vec();
    s.sort_unstable();
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2] as f64
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2]) as f64
    }
}

/// Initial level: `phi^0 = phi_in` (infinite values capped), `eta^0 = 0`, and
/// `H^0` chosen by `cfg.h_init`.
pub fn initial_field<T: Real>(
    phi_in: &[T],
    grid: &Grid<T>,
    eq: &Equilibrium<T>,
    cfg: &MicroMacroConfig,
) -> Result<KineticField<T>> {
    cfg.validate()?;
    if phi_in.len() != grid.n_x {
        return Err(Error::Config(format!(
            "initial phase has {} values for {} cells",
            phi_in.len(),
            grid.n_x
        )));
    }
    let phi = cap_initial_phase(phi_in, T::lit(cfg.phi_cap))?;
    let r = T::lit(cfg.r);
    let h = match cfg.h_init {
        HInit::Zero => vec![T::zero(); grid.n_x],
        HInit::Limit => match hj_limit::hamiltonian_field(&phi, grid, eq, r, cfg.ham_tol) {
            Ok(h) => h,
            Err(e) => {
                log::warn!("limit initialisation of H failed ({e}); starting from H = 0");
                vec![T::zero(); grid.n_x]
            }
        },
    };
    Ok(KineticField {
        phi,
        eta: vec![T::zero(); grid.n_x * grid.n_v],
        h,
        eps: T::lit(cfg.eps),
        r,
        n: 0,
        n_v: grid.n_v,
    })
}

/// Replaces `+inf` by `cap`; rejects NaN and `-inf`.
pub fn cap_initial_phase<T: Real>(phi_in: &[T], cap: T) -> Result<Vec<T>> {
    phi_in
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if p.is_nan() || p == T::neg_infinity() {
                Err(Error::Config(format!("initial phase at cell {i} is {p}")))
            } else {
                Ok(p.min(cap))
            }
        })
        .collect()
}

/// Solves the system of cell `i` from level `n`.
pub fn solve_cell<T: Real>(
    i: usize,
    field: &KineticField<T>,
    grid: &Grid<T>,
    eq: &Equilibrium<T>,
    newton: &NewtonSettings,
) -> Result<CellSolution<T>> {
    let mut transport = vec![T::zero(); grid.n_v];
    transport_row(&field.phi, &field.eta, i, grid, &mut transport);
    let problem = CellProblem {
        cell: i,
        eta_prev: field.eta_row(i),
        phi_prev: field.phi[i],
        transport: &transport,
        maxwellian: eq.values(),
        dv: eq.dv(),
        dt: grid.dt,
        eps: field.eps,
        r: field.r,
    };
    problem.solve(field.eta_row(i), field.h[i], newton)
}

/// Residual of cell `i` at `(eta_row, h)` for the system built from `field`.
pub fn cell_residual<T: Real>(
    i: usize,
    eta_row: &[T],
    h: T,
    field: &KineticField<T>,
    grid: &Grid<T>,
    eq: &Equilibrium<T>,
) -> Result<Vec<T>> {
    let mut transport = vec![T::zero(); grid.n_v];
    transport_row(&field.phi, &field.eta, i, grid, &mut transport);
    CellProblem {
        cell: i,
        eta_prev: field.eta_row(i),
        phi_prev: field.phi[i],
        transport: &transport,
        maxwellian: eq.values(),
        dv: eq.dv(),
        dt: grid.dt,
        eps: field.eps,
        r: field.r,
    }
    .residual(eta_row, h)
}

/// Advances one time step. Errors carry the index of the step being computed.
pub fn step<T: Real>(
    field: &KineticField<T>,
    grid: &Grid<T>,
    eq: &Equilibrium<T>,
    newton: &NewtonSettings,
) -> Result<(KineticField<T>, StepStats)> {
    let next_n = field.n + 1;
    let solutions: Vec<CellSolution<T>> = (0..grid.n_x)
        .into_par_iter()
        .map(|i| solve_cell(i, field, grid, eq, newton))
        .collect::<Result<_>>()
        .map_err(|e| e.at_step(next_n))?;
    let mut next = KineticField {
        phi: Vec::with_capacity(grid.n_x),
        eta: Vec::with_capacity(field.eta.len()),
        h: Vec::with_capacity(grid.n_x),
        eps: field.eps,
        r: field.r,
        n: next_n,
        n_v: field.n_v,
    };
    let mut stats = StepStats {
        iterations: Vec::with_capacity(grid.n_x),
        ..StepStats::default()
    };
    for (i, sol) in solutions.into_iter().enumerate() {
        next.phi.push(field.phi[i] - grid.dt * (sol.h + field.r));
        next.h.push(sol.h);
        for (&e, &m) in sol.eta.iter().zip(eq.values()) {
            let y = (e / field.eps).as_f64();
            stats.max_exp_eta = stats.max_exp_eta.max(y.exp());
            if m > T::zero() {
                stats.max_exp_neg_eta = stats.max_exp_neg_eta.max((-y).exp());
            }
        }
        next.eta.extend_from_slice(&sol.eta);
        stats.iterations.push(sol.report.iterations);
    }
    Ok((next, stats))
}

/// Violation of the three maximum-principle bounds at one level, each as
/// `max(0, lower - value, value - upper)` maximised over the grid:
/// `0 <= phi <= m`, `0 <= phi + eta <= m`, and
/// `0 <= phi + eta - dt (1 - e^{eta/eps}) + r dt e^{eta/eps} (1 - e^{-(phi+eta)/eps}) <= m`.
pub fn maximum_principle_violation<T: Real>(field: &KineticField<T>, dt: T, bound: T) -> [f64; 3] {
    let over = |v: T| -> f64 { (T::zero() - v).max(v - bound).max(T::zero()).as_f64() };
    let mut worst = [0.0f64; 3];
    let (eps, r) = (field.eps, field.r);
    for i in 0..field.n_x() {
        let phi = field.phi[i];
        worst[0] = worst[0].max(over(phi));
        for &eta in field.eta_row(i) {
            let psi = phi + eta;
            worst[1] = worst[1].max(over(psi));
            let e = clamped_exp(eta / eps);
            let third = psi - dt * (T::one() - e) + r * dt * e * (T::one() - clamped_exp(-psi / eps));
            worst[2] = worst[2].max(over(third));
        }
    }
    worst
}

/// Stateful driver: owns the current level and accumulates statistics.
#[derive(Clone, Debug)]
pub struct MicroMacroSolver<'a, T> {
    grid: &'a Grid<T>,
    eq: &'a Equilibrium<T>,
    cfg: MicroMacroConfig,
    field: KineticField<T>,
    bound: T,
    stats: RunStats,
}

impl<'a, T: Real> MicroMacroSolver<'a, T> {
    pub fn new(phi_in: &[T], grid: &'a Grid<T>, eq: &'a Equilibrium<T>, cfg: MicroMacroConfig) -> Result<Self> {
        let field = initial_field(phi_in, grid, eq, &cfg)?;
        let bound = field.phi.iter().fold(T::zero(), |a, &b| a.max(b));
        Ok(MicroMacroSolver {
            grid,
            eq,
            cfg,
            field,
            bound,
            stats: RunStats::default(),
        })
    }

    pub fn field(&self) -> &KineticField<T> {
        &self.field
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    /// `m = max_i phi^0_i`, the upper bound of the maximum principle.
    pub fn bound(&self) -> T {
        self.bound
    }

    pub fn time(&self) -> T {
        self.grid.time(self.field.n)
    }

    pub fn is_finished(&self) -> bool {
        self.field.n >= self.grid.n_t
    }

    pub fn advance(&mut self) -> Result<()> {
        let (next, step_stats) = step(&self.field, self.grid, self.eq, &self.cfg.newton)?;
        if self.cfg.check_invariants {
            let v = maximum_principle_violation(&next, self.grid.dt, self.bound);
            let tol = self.cfg.invariant_tol * self.bound.as_f64().max(1.0);
            for (k, (&val, worst)) in v.iter().zip(self.stats.max_principle_violation.iter_mut()).enumerate() {
                *worst = worst.max(val);
                if val > tol {
                    return Err(Error::MaxPrinciple {
                        step: next.n,
                        cell: worst_cell(&next, self.grid.dt, self.bound, k),
                        detail: format!("bound {} exceeded by {val:e}", k + 1),
                    });
                }
            }
        }
        self.stats.record(&step_stats);
        self.field = next;
        Ok(())
    }

    pub fn into_parts(self) -> (KineticField<T>, RunStats) {
        (self.field, self.stats)
    }
}

fn worst_cell<T: Real>(field: &KineticField<T>, dt: T, bound: T, which: usize) -> usize {
    (0..field.n_x())
        .map(|i| {
            let single = KineticField {
                phi: vec![field.phi[i]],
                eta: field.eta_row(i).to_vec(),
                h: vec![field.h[i]],
                ..field.clone()
            };
            (i, maximum_principle_violation(&single, dt, bound)[which])
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// A stored time level.
#[derive(Clone, Debug)]
pub struct Snapshot<T> {
    pub time: T,
    pub field: KineticField<T>,
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    /// Always contains the initial and the final level, plus requested times.
    pub snapshots: Vec<Snapshot<T>>,
    pub stats: RunStats,
    pub bound: T,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &KineticField<T> {
        &self.snapshots.last().expect("trajectory is never empty").field
    }

    /// Snapshot closest to time `t`.
    pub fn at_time(&self, t: T) -> &KineticField<T> {
        &self
            .snapshots
            .iter()
            .min_by(|a, b| (a.time - t).abs().partial_cmp(&(b.time - t).abs()).unwrap())
            .expect("trajectory is never empty")
            .field
    }
}

/// Step indices to retain: the initial level, the final level and the steps
/// closest to each requested time.
pub(crate) fn snapshot_steps<T: Real>(grid: &Grid<T>, times: &[T]) -> Vec<usize> {
    let mut steps: Vec<usize> = times.iter().map(|&t| grid.step_index(t)).collect();
    steps.push(0);
    steps.push(grid.n_t);
    steps.sort_unstable();
    steps.dedup();
    steps
}

/// Runs the scheme to `grid.t_final`, keeping snapshots near `times`.
pub fn run<T: Real>(
    phi_in: &[T],
    grid: &Grid<T>,
    eq: &Equilibrium<T>,
    cfg: &MicroMacroConfig,
    times: &[T],
) -> Result<Trajectory<T>> {
    let mut solver = MicroMacroSolver::new(phi_in, grid, eq, *cfg)?;
    let wanted = snapshot_steps(grid, times);
    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut next_wanted = wanted.iter().peekable();
    loop {
        if next_wanted.peek() == Some(&&solver.field().n) {
            snapshots.push(Snapshot {
                time: solver.time(),
                field: solver.field().clone(),
            });
            next_wanted.next();
        }
        if solver.is_finished() {
            break;
        }
        solver.advance()?;
    }
    let bound = solver.bound();
    let (_, stats) = solver.into_parts();
    Ok(Trajectory {
        snapshots,
        stats,
        bound,
    })
}
