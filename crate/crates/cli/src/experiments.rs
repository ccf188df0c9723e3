//! Named numerical experiments and the plain `run` driver.
//!
//! Every experiment starts from a base [`RunConfig`], applies `--set`
//! overrides, writes its CSV tables into `<output>/<name>/` and finishes with
//! a manifest holding every parameter, the wall time and Newton statistics.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use ap_kinetic::analysis::{self, fit_line, speed_of_slope, speed_oracle, SlopeGrid};
use ap_kinetic::explicit_ref::{run_explicit, to_hopf_cole};
use ap_kinetic::hj_limit::{hamiltonian, in_sing_set, mu, run_limit};
use ap_kinetic::micromacro::{self, Trajectory};
use ap_kinetic::scalar::clamped_exp;
use ap_kinetic::studies::{self, track_front, FrontSetup, Setup};
use ap_kinetic::{Branch, InitialData};

use crate::config::{preset, RunConfig, SolverKind};
use crate::output::{num, snapshot_name, write_table, Manifest};

pub const EXPERIMENTS: &[&str] = &[
    "consistency_eps1",
    "consistency_eps1e-1",
    "ap_vs_limit",
    "two_minima",
    "order_study",
    "ua_study",
    "front_speed",
    "speed_error_slope",
    "singular_hamiltonian",
    "singular_dirac",
];

/// Spatial steps of the convergence sweeps and their reference run.
const SWEEP_DX: [f64; 4] = [4e-3, 8e-3, 16e-3, 32e-3];
const SWEEP_REFERENCE_DX: f64 = 2e-3;
const SWEEP_DT: f64 = 5e-4;
/// Half-width for which every sweep grid has an even number of cells.
const SWEEP_X_MAX: f64 = 1.024;
const UA_EPS: [f64; 5] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4];
const DIRAC_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

pub struct Outcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

fn base_config(name: &str) -> Result<RunConfig> {
    Ok(match name {
        "consistency_eps1" => preset("fig_phi_reg_ep1")?,
        "consistency_eps1e-1" => preset("fig_phi_reg_ep1e-1")?,
        "ap_vs_limit" => preset("fig_phi_reg_ep1e-2")?,
        "two_minima" => preset("two_minima")?,
        "order_study" | "ua_study" => RunConfig {
            x_max: SWEEP_X_MAX,
            dt: SWEEP_DT,
            ..RunConfig::default()
        },
        "front_speed" | "speed_error_slope" => preset("front")?,
        "singular_hamiltonian" | "singular_dirac" => preset("singular")?,
        other => bail!("unknown experiment `{other}`; valid names: {}", EXPERIMENTS.join(", ")),
    })
}

/// Runs experiment `name` with `overrides`, writing into `<output>/<name>/`.
pub fn run_experiment(name: &str, overrides: &[(String, String)]) -> Result<Outcome> {
    let cfg = base_config(name)?
        .with_overrides(overrides)
        .with_context(|| format!("configuring experiment `{name}`"))?;
    let dir = cfg.output.join(name);
    let start = Instant::now();
    let mut manifest = Manifest::new(name);
    manifest.extend("", cfg.entries());
    let result = match name {
        "consistency_eps1" | "consistency_eps1e-1" => compare(&cfg, Other::Explicit, &dir, &mut manifest),
        "ap_vs_limit" | "two_minima" => compare(&cfg, Other::Limit, &dir, &mut manifest),
        "order_study" => convergence(&cfg, &[cfg.eps], &dir, &mut manifest),
        "ua_study" => convergence(&cfg, &UA_EPS, &dir, &mut manifest),
        "front_speed" => front_speed(&cfg, &dir, &mut manifest),
        "speed_error_slope" => speed_error_slope(&cfg, &dir, &mut manifest),
        "singular_hamiltonian" => singular_hamiltonian(&cfg, &dir, &mut manifest),
        "singular_dirac" => singular_dirac(&cfg, &dir, &mut manifest),
        _ => unreachable!("checked by base_config"),
    };
    result.with_context(|| format!("experiment `{name}` failed"))?;
    manifest.push("wall_time_s", start.elapsed().as_secs_f64());
    manifest.write(&dir)?;
    Ok(Outcome { dir, manifest })
}

#[derive(Clone, Copy)]
enum Other {
    Explicit,
    Limit,
}

/// Micro-macro against the explicit or limit solver at the configured times.
fn compare(cfg: &RunConfig, other: Other, dir: &Path, manifest: &mut Manifest) -> Result<()> {
    let grid = cfg.grid()?;
    let eq = cfg.equilibrium(&grid)?;
    let phi = cfg.initial_phase(&grid)?;
    let mm = micromacro::run(&phi, &grid, &eq, &cfg.micro_macro(), &cfg.snapshots)?;
    let (label, others): (&str, Vec<Vec<f64>>) = match other {
        Other::Explicit => {
            let ex = run_explicit(&phi, &grid, &eq, cfg.eps, cfg.r, cfg.phi_cap, &cfg.snapshots)?;
            manifest.push("explicit.stability_warning", ex.stability_warning);
            let phases = ex.snapshots.iter().map(|s| to_hopf_cole(&s.field, &eq).phi).collect();
            ("phi_explicit", phases)
        }
        Other::Limit => {
            let lim = run_limit(&phi, &grid, &eq, &cfg.limit(), &cfg.snapshots)?;
            ("phi_limit", lim.snapshots.into_iter().map(|s| s.field.phi).collect())
        }
    };
    let header = ["x", "phi_micro_macro", label];
    let mut long = Vec::new();
    for (snap, other_phi) in mm.snapshots.iter().zip(&others) {
        let t = snap.time;
        let rows: Vec<Vec<f64>> = (0..grid.n_x)
            .map(|i| vec![grid.x[i], snap.field.phi[i], other_phi[i]])
            .collect();
        write_table(&dir.join(snapshot_name("phi", t)), &header, rows.clone())?;
        long.extend(rows.into_iter().map(|row| [vec![t], row].concat()));
        manifest.push(format!("gap_t{t}"), analysis::sup_gap(&snap.field.phi, other_phi));
    }
    write_table(&dir.join("phi_long.csv"), &["t", "x", "phi_micro_macro", label], long)?;
    let last = others.last().expect("trajectory is never empty");
    manifest.push("gap_final", analysis::sup_gap(&mm.last().phi, last));
    manifest.newton("micro_macro", &mm.stats);
    Ok(())
}

fn setup_of(cfg: &RunConfig) -> Setup {
    Setup {
        x_max: cfg.x_max,
        v_max: cfg.v_max,
        dv: cfg.dv,
        t_final: cfg.t_final,
        boundary: cfg.boundary,
        equilibrium: cfg.equilibrium.clone(),
        initial: cfg.initial.clone(),
    }
}

/// `E(eps, dx)` against a refined reference, with `dt` and `dv` fixed.
fn convergence(cfg: &RunConfig, epsilons: &[f64], dir: &Path, manifest: &mut Manifest) -> Result<()> {
    let table = studies::convergence_study(&setup_of(cfg), epsilons, cfg.r, &SWEEP_DX, SWEEP_REFERENCE_DX, cfg.dt)?;
    manifest.push("reference_dx", SWEEP_REFERENCE_DX);
    manifest.push(
        "sweep_dx",
        SWEEP_DX.iter().map(|&d| num(d)).collect::<Vec<_>>().join(","),
    );
    for (eps, slope) in table.slopes() {
        match slope {
            Ok(s) => manifest.push(format!("order_eps{eps}"), s),
            Err(e) => manifest.push(format!("order_eps{eps}"), format!("unavailable ({e})")),
        }
    }
    write_table(
        &dir.join("convergence.csv"),
        &["eps", "dx", "error"],
        table.rows.iter().map(|&(e, h, err)| vec![e, h, err]),
    )
}

fn front_setup(cfg: &RunConfig) -> Result<FrontSetup> {
    let InitialData::LeftStep { position } = cfg.initial else {
        bail!("front experiments need `initial = left_step`");
    };
    Ok(FrontSetup {
        eps: cfg.eps,
        r: cfg.r,
        dx: cfg.dx,
        dt: cfg.dt,
        dv: cfg.dv,
        x_max: cfg.x_max,
        t_final: cfg.t_final,
        step_position: position,
        phi_cap: cfg.phi_cap,
        ..FrontSetup::default()
    })
}

fn front_speed(cfg: &RunConfig, dir: &Path, manifest: &mut Manifest) -> Result<()> {
    let fs = front_setup(cfg)?;
    let grid = cfg.grid()?;
    let eq = cfg.equilibrium(&grid)?;
    let oracle = speed_oracle(cfg.r, &eq, SlopeGrid::default(), cfg.ham_tol)?;
    let run = track_front(&fs)?;
    write_table(
        &dir.join("front_track.csv"),
        &["t", "x_front"],
        run.track.times.iter().zip(&run.track.positions).map(|(&t, &x)| vec![t, x]),
    )?;
    let curve = SlopeGrid::default()
        .points()
        .into_iter()
        .map(|p| Ok(vec![p, speed_of_slope(p, cfg.r, &eq, cfg.ham_tol)?]))
        .collect::<Result<Vec<_>>>()?;
    write_table(&dir.join("speed_curve.csv"), &["p", "c"], curve)?;
    let mut profiles = Vec::new();
    for (t, rho) in &run.profiles {
        profiles.extend(run.x.iter().zip(rho).map(|(&x, &d)| vec![*t, x, d]));
    }
    write_table(&dir.join("rho_long.csv"), &["t", "x", "rho"], profiles)?;
    manifest.push("threshold", fs.threshold);
    manifest.push("c_star", oracle.c_star);
    manifest.push("p_star", oracle.p_star);
    manifest.push("fitted_speed", run.fit.slope);
    manifest.push("fit_residual", run.fit.residual);
    manifest.push("relative_error", (run.fit.slope - oracle.c_star).abs() / oracle.c_star);
    manifest.newton("micro_macro", &run.stats);
    Ok(())
}

/// Relative speed error at `dx`, `2 dx` and `4 dx` with `dt` fixed.
fn speed_error_slope(cfg: &RunConfig, dir: &Path, manifest: &mut Manifest) -> Result<()> {
    let fs = front_setup(cfg)?;
    let grid = cfg.grid()?;
    let eq = cfg.equilibrium(&grid)?;
    let oracle = speed_oracle(cfg.r, &eq, SlopeGrid::default(), cfg.ham_tol)?;
    let dxs = [4.0 * cfg.dx, 2.0 * cfg.dx, cfg.dx];
    let mut rows = Vec::new();
    for dx in dxs {
        let run = track_front(&FrontSetup { dx, ..fs.clone() })?;
        let err = (run.fit.slope - oracle.c_star).abs() / oracle.c_star;
        manifest.push(format!("fitted_speed_dx{dx}"), run.fit.slope);
        manifest.newton(&format!("dx{dx}"), &run.stats);
        rows.push(vec![dx, err]);
    }
    let lx: Vec<f64> = rows.iter().map(|r| r[0].ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r[1].ln()).collect();
    manifest.push("c_star", oracle.c_star);
    manifest.push("error_slope", fit_line(&lx, &ly)?.slope);
    write_table(&dir.join("speed_error.csv"), &["dx", "relative_error"], rows)
}

fn singular_hamiltonian(cfg: &RunConfig, dir: &Path, manifest: &mut Manifest) -> Result<()> {
    let grid = cfg.grid()?;
    let eq = cfg.equilibrium(&grid)?;
    let n = 401;
    let rows = (0..n)
        .map(|k| {
            let p = -5.0 + 10.0 * k as f64 / (n - 1) as f64;
            let h = hamiltonian(p, cfg.r, &eq, cfg.ham_tol)?;
            let singular = if h.branch == Branch::SingularBoundary { 1.0 } else { 0.0 };
            Ok(vec![p, h.value, singular, mu(p, p, &eq) - 1.0])
        })
        .collect::<Result<Vec<_>>>()?;
    let crossover = rows.iter().find(|r| r[0] > 0.0 && in_sing_set(r[0], &eq)).map(|r| r[0]);
    match crossover {
        Some(p) => manifest.push("first_singular_slope", p),
        None => manifest.push("first_singular_slope", "none"),
    }
    write_table(&dir.join("hamiltonian.csv"), &["p", "H", "singular_branch", "mu_minus_one"], rows)
}

/// Corrector concentration: `max_x e^{-eta/eps}` per velocity for several
/// `eps`, plus the micro-macro/limit comparison at the configured `eps`.
fn singular_dirac(cfg: &RunConfig, dir: &Path, manifest: &mut Manifest) -> Result<()> {
    compare(cfg, Other::Limit, dir, manifest)?;
    let grid = cfg.grid()?;
    let eq = cfg.equilibrium(&grid)?;
    let phi = cfg.initial_phase(&grid)?;
    let runs: Vec<Trajectory<f64>> = DIRAC_EPS
        .iter()
        .map(|&eps| {
            let mm = RunConfig { eps, ..cfg.clone() }.micro_macro();
            micromacro::run(&phi, &grid, &eq, &mm, &[])
        })
        .collect::<ap_kinetic::Result<_>>()?;
    let weights: Vec<Vec<f64>> = runs
        .iter()
        .zip(DIRAC_EPS)
        .map(|(traj, eps)| {
            let field = traj.last();
            (0..grid.n_v)
                .map(|j| {
                    (0..grid.n_x)
                        .map(|i| clamped_exp(-field.eta_row(i)[j] / eps))
                        .fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();
    for (w, eps) in weights.iter().zip(DIRAC_EPS) {
        manifest.push(format!("extreme_weight_eps{eps}"), w[0].max(w[grid.n_v - 1]));
    }
    let header: Vec<String> = std::iter::once("v".to_string())
        .chain(DIRAC_EPS.iter().map(|e| format!("exp_neg_eta_eps{e}")))
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(
        &dir.join("corrector.csv"),
        &header,
        (0..grid.n_v).map(|j| std::iter::once(grid.v[j]).chain(weights.iter().map(|w| w[j])).collect()),
    )
}

/// `(time, [(field name, values)])` of one stored level.
type Level = (f64, Vec<(&'static str, Vec<f64>)>);

/// Runs the solver selected by `cfg`, writing one file per field and
/// snapshot, one long-format file and the manifest into `cfg.output`.
pub fn run_config(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let start = Instant::now();
    let grid = cfg.grid()?;
    let eq = cfg.equilibrium(&grid)?;
    let phi = cfg.initial_phase(&grid)?;
    let mut manifest = Manifest::new("run");
    manifest.extend("", cfg.entries());
    let mut levels: Vec<Level> = Vec::new();
    match cfg.solver {
        SolverKind::MicroMacro => {
            let traj = micromacro::run(&phi, &grid, &eq, &cfg.micro_macro(), &cfg.snapshots)?;
            for s in &traj.snapshots {
                levels.push((
                    s.time,
                    vec![("phi", s.field.phi.clone()), ("rho", s.field.density()), ("h", s.field.h.clone())],
                ));
            }
            manifest.newton("micro_macro", &traj.stats);
        }
        SolverKind::ExplicitRef => {
            let traj = run_explicit(&phi, &grid, &eq, cfg.eps, cfg.r, cfg.phi_cap, &cfg.snapshots)?;
            manifest.push("explicit.stability_warning", traj.stability_warning);
            for s in &traj.snapshots {
                let hc = to_hopf_cole(&s.field, &eq);
                levels.push((s.time, vec![("phi", hc.phi), ("rho", s.field.rho.clone())]));
            }
        }
        SolverKind::HJLimit => {
            let traj = run_limit(&phi, &grid, &eq, &cfg.limit(), &cfg.snapshots)?;
            for s in &traj.snapshots {
                levels.push((s.time, vec![("phi", s.field.phi.clone()), ("h", s.field.h.clone())]));
            }
        }
    }
    let dir = cfg.output.clone();
    let names: Vec<&str> = levels[0].1.iter().map(|(n, _)| *n).collect();
    let mut long = Vec::new();
    for (t, fields) in &levels {
        for (name, values) in fields {
            write_table(
                &dir.join(snapshot_name(name, *t)),
                &["x", name],
                grid.x.iter().zip(values).map(|(&x, &v)| vec![x, v]),
            )?;
        }
        for i in 0..grid.n_x {
            long.push(std::iter::once(*t).chain([grid.x[i]]).chain(fields.iter().map(|(_, v)| v[i])).collect());
        }
    }
    let header: Vec<&str> = ["t", "x"].into_iter().chain(names).collect();
    write_table(&dir.join("fields_long.csv"), &header, long)?;
    manifest.push("snapshot_times", levels.iter().map(|(t, _)| num(*t)).collect::<Vec<_>>().join(","));
    manifest.push("wall_time_s", start.elapsed().as_secs_f64());
    manifest.write(&dir)?;
    Ok(Outcome { dir, manifest })
}
