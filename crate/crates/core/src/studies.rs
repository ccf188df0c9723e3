//! Drivers for the standard numerical studies: comparisons between solvers,
//! spatial convergence sweeps and front tracking. Shared by the command-line
//! experiments and the acceptance tests.

use rayon::prelude::*;

use crate::analysis::{self, ConvergenceTable, FrontTrack, LineFit};
use crate::discretization::{Boundary, Equilibrium, EquilibriumSpec, Grid};
use crate::error::Result;
use crate::explicit_ref::{run_explicit, to_hopf_cole};
use crate::hj_limit::{run_limit, LimitConfig};
use crate::initial::InitialData;
use crate::micromacro::{run, MicroMacroConfig, MicroMacroSolver, RunStats};

/// Domain and velocity grid shared by a study.
#[derive(Clone, Debug, PartialEq)]
pub struct Setup {
    pub x_max: f64,
    pub v_max: f64,
    pub dv: f64,
    pub t_final: f64,
    pub boundary: Boundary,
    pub equilibrium: EquilibriumSpec<f64>,
    pub initial: InitialData,
}

impl Default for Setup {
    /// Periodic `[-1, 1]`, velocities in `[-1, 1]` with `dv = 1.25e-2`,
    /// uniform equilibrium, `phi_in = x^2`, final time 1.
    fn default() -> Self {
        Setup {
            x_max: 1.0,
            v_max: 1.0,
            dv: 1.25e-2,
            t_final: 1.0,
            boundary: Boundary::Periodic,
            equilibrium: EquilibriumSpec::Uniform,
            initial: InitialData::Quadratic,
        }
    }
}

impl Setup {
    pub fn grid(&self, dx: f64, dt: f64) -> Result<Grid<f64>> {
        Grid::from_steps(self.x_max, dx, self.v_max, self.dv, self.t_final, dt, self.boundary)
    }

    pub fn build(&self, dx: f64, dt: f64) -> Result<(Grid<f64>, Equilibrium<f64>, Vec<f64>)> {
        let grid = self.grid(dx, dt)?;
        let eq = Equilibrium::build(&self.equilibrium, &grid)?;
        let phi = self.initial.sample(&grid.x)?;
        Ok((grid, eq, phi))
    }
}

/// Final phases of two solvers on one grid.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub x: Vec<f64>,
    pub micro_macro: Vec<f64>,
    pub other: Vec<f64>,
    /// `max_i |phi_mm - phi_other|`.
    pub gap: f64,
    pub stats: RunStats,
}

/// Micro-macro against the explicit kinetic solver, both at `setup.t_final`.
pub fn compare_with_explicit(setup: &Setup, cfg: &MicroMacroConfig, dx: f64, dt: f64) -> Result<Comparison> {
    let (grid, eq, phi) = setup.build(dx, dt)?;
    let (mm, ex) = rayon::join(
        || run(&phi, &grid, &eq, cfg, &[]),
        || run_explicit(&phi, &grid, &eq, cfg.eps, cfg.r, cfg.phi_cap, &[]),
    );
    let (mm, ex) = (mm?, ex?);
    let other = to_hopf_cole(ex.last(), &eq).phi;
    let micro_macro = mm.last().phi.clone();
    Ok(Comparison {
        gap: analysis::sup_gap(&micro_macro, &other),
        x: grid.x,
        micro_macro,
        other,
        stats: mm.stats,
    })
}

/// Micro-macro against the limit Hamilton-Jacobi scheme, both at `setup.t_final`.
pub fn compare_with_limit(setup: &Setup, cfg: &MicroMacroConfig, dx: f64, dt: f64) -> Result<Comparison> {
    let (grid, eq, phi) = setup.build(dx, dt)?;
    let limit_cfg = LimitConfig {
        r: cfg.r,
        ham_tol: cfg.ham_tol,
        phi_cap: cfg.phi_cap,
    };
    let (mm, lim) = rayon::join(
        || run(&phi, &grid, &eq, cfg, &[]),
        || run_limit(&phi, &grid, &eq, &limit_cfg, &[]),
    );
    let (mm, lim) = (mm?, lim?);
    let micro_macro = mm.last().phi.clone();
    let other = lim.last().phi.clone();
    Ok(Comparison {
        gap: analysis::sup_gap(&micro_macro, &other),
        x: grid.x,
        micro_macro,
        other,
        stats: mm.stats,
    })
}

/// Final micro-macro phase and its cell centers.
pub fn final_phase(setup: &Setup, cfg: &MicroMacroConfig, dx: f64, dt: f64) -> Result<(Vec<f64>, Vec<f64>, RunStats)> {
    let (grid, eq, phi) = setup.build(dx, dt)?;
    let traj = run(&phi, &grid, &eq, cfg, &[])?;
    Ok((grid.x, traj.last().phi.clone(), traj.stats))
}

/// `E(eps, dx)` against a self-refined reference at `reference_dx`, with `dt`
/// and `dv` held fixed across the sweep.
pub fn convergence_study(
    setup: &Setup,
    epsilons: &[f64],
    r: f64,
    dxs: &[f64],
    reference_dx: f64,
    dt: f64,
) -> Result<ConvergenceTable> {
    let per_eps: Vec<Vec<(f64, f64, f64)>> = epsilons
        .par_iter()
        .map(|&eps| {
            let cfg = MicroMacroConfig::new(eps, r);
            let (x_ref, phi_ref, _) = final_phase(setup, &cfg, reference_dx, dt)?;
            dxs.par_iter()
                .map(|&dx| {
                    let (x, phi, _) = final_phase(setup, &cfg, dx, dt)?;
                    let e = analysis::relative_error_on_coarse(&x_ref, &phi_ref, &x, &phi)?;
                    Ok((eps, dx, e))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(ConvergenceTable {
        rows: per_eps.into_iter().flatten().collect(),
    })
}

/// Parameters of a front-propagation run from left-step data.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontSetup {
    pub eps: f64,
    pub r: f64,
    pub dx: f64,
    pub dt: f64,
    pub dv: f64,
    pub x_max: f64,
    pub t_final: f64,
    /// Density is one left of this point initially.
    pub step_position: f64,
    pub phi_cap: f64,
    /// Density level whose first crossing defines the front.
    pub threshold: f64,
    /// Record the front every this many steps.
    pub sample_every: usize,
}

impl Default for FrontSetup {
    fn default() -> Self {
        FrontSetup {
            eps: 1e-4,
            r: 1.0,
            dx: 1.25e-3,
            dt: 3.125e-4,
            dv: 1.25e-2,
            x_max: 1.0,
            t_final: 1.0,
            step_position: -0.75,
            phi_cap: 10.0,
            threshold: 0.5,
            sample_every: 16,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FrontRun {
    pub track: FrontTrack<f64>,
    pub fit: LineFit<f64>,
    pub stats: RunStats,
    /// Density snapshots `(t, rho)` at quarter times.
    pub profiles: Vec<(f64, Vec<f64>)>,
    pub x: Vec<f64>,
}

pub fn track_front(fs: &FrontSetup) -> Result<FrontRun> {
    let grid = Grid::from_steps(fs.x_max, fs.dx, 1.0, fs.dv, fs.t_final, fs.dt, Boundary::Neumann)?;
    let eq = Equilibrium::uniform(&grid);
    let phi = InitialData::LeftStep {
        position: fs.step_position,
    }
    .sample(&grid.x)?;
    let mut cfg = MicroMacroConfig::new(fs.eps, fs.r);
    cfg.phi_cap = fs.phi_cap;
    let mut solver = MicroMacroSolver::new(&phi, &grid, &eq, cfg)?;
    let quarter = (grid.n_t / 4).max(1);
    let mut track = FrontTrack::default();
    let mut profiles = Vec::new();
    let every = fs.sample_every.max(1);
    loop {
        let n = solver.field().n;
        let sample = n % every == 0 || n == grid.n_t;
        let profile = n % quarter == 0 || n == grid.n_t;
        if sample || profile {
            let rho = solver.field().density();
            if sample {
                track.times.push(solver.time());
                track.positions.push(analysis::front_position(&grid.x, &rho, fs.threshold)?);
            }
            if profile {
                profiles.push((solver.time(), rho));
            }
        }
        if solver.is_finished() {
            break;
        }
        solver.advance()?;
    }
    let fit = analysis::fit_front_speed(&track, analysis::TRANSIENT_FRACTION)?;
    let (_, stats) = solver.into_parts();
    Ok(FrontRun {
        track,
        fit,
        stats,
        profiles,
        x: grid.x,
    })
}
