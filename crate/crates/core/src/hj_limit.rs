//! Limit Hamilton-Jacobi solver.
//!
//! The numerical Hamiltonian `h(p, q)` is the root of
//! `<M / (1 + r + h - v+ p - v- q)> = 1/(1 + r)` with every denominator
//! positive. When the equilibrium vanishes at the velocities that maximise
//! `v+ p + v- q`, the average stays bounded as the denominator closes and the
//! relation can lose its root. For `r = 0` the Hamiltonian is then the
//! boundary value `mu - 1`, with `mu = max_j (v_j+ p + v_j- q)`.

use rayon::prelude::*;

use crate::discretization::{Equilibrium, Grid};
use crate::error::{Error, Result};
use crate::micromacro::{cap_initial_phase, slopes};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Root of the implicit relation.
    Implicit,
    /// Boundary value `mu - 1` of a singular equilibrium.
    SingularBoundary,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Implicit => f.write_str("implicit"),
            Branch::SingularBoundary => f.write_str("singular_boundary"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianEval<T> {
    pub value: T,
    pub branch: Branch,
    pub iterations: usize,
    pub p: T,
    pub q: T,
}

const MAX_ROOT_ITER: usize = 200;

/// `max_j (v_j+ p + v_j- q)`.
pub fn mu<T: Real>(p: T, q: T, eq: &Equilibrium<T>) -> T {
    eq.velocities()
        .iter()
        .map(|&v| slope_term(v, p, q))
        .fold(T::neg_infinity(), |a, b| a.max(b))
}

#[inline]
fn slope_term<T: Real>(v: T, p: T, q: T) -> T {
    if v > T::zero() {
        v * p
    } else {
        v * q
    }
}

/// Average `<M / (gap_j + u)>` where `gap_j = mu - (v_j+ p + v_j- q) >= 0`.
/// Nodes with a zero denominator contribute zero if `M_j = 0` and `+inf` otherwise.
fn average<T: Real>(gaps: &[T], eq: &Equilibrium<T>, u: T) -> (T, T) {
    let mut g = T::zero();
    let mut dg = T::zero();
    for (&gap, &m) in gaps.iter().zip(eq.values()) {
        if m == T::zero() {
            continue;
        }
        let d = gap + u;
        if d <= T::zero() {
            return (T::infinity(), T::neg_infinity());
        }
        g = g + m / d;
        dg = dg - m / (d * d);
    }
    (eq.dv() * g, eq.dv() * dg)
}

/// Solves the two-sided relation for `h(p, q)` to absolute tolerance `tol`
/// on the velocity average.
pub fn eval_hamiltonian<T: Real>(p: T, q: T, r: T, eq: &Equilibrium<T>, tol: f64) -> Result<HamiltonianEval<T>> {
    if !p.is_finite() || !q.is_finite() {
        return Err(Error::Hamiltonian {
            p: p.as_f64(),
            q: q.as_f64(),
            detail: "non-finite slope".into(),
        });
    }
    let one_r = T::one() + r;
    let target = T::one() / one_r;
    let top = mu(p, q, eq);
    let gaps: Vec<T> = eq
        .velocities()
        .iter()
        .map(|&v| top - slope_term(v, p, q))
        .collect();
    // h = top - (1 + r) + u with u in (0, 1 + r]: at u = 1 + r every
    // denominator is at least 1 + r, so the average is at most the target.
    let (at_zero, _) = average(&gaps, eq, T::zero());
    if at_zero <= target {
        if r > T::zero() {
            return Err(Error::Unsupported(format!(
                "singular equilibrium with r = {r} has no Hamiltonian root at p = {p}, q = {q}"
            )));
        }
        return Ok(HamiltonianEval {
            value: top - T::one(),
            branch: Branch::SingularBoundary,
            iterations: 0,
            p,
            q,
        });
    }
    let tol_t = T::lit(tol);
    let (mut lo, mut hi) = (T::zero(), one_r);
    // Newton on k(u) = 1/g(u) - (1 + r), which is increasing and nearly
    // linear close to u = 0 where g blows up.
    let mut u = one_r;
    for it in 1..=MAX_ROOT_ITER {
        let (g, dg) = average(&gaps, eq, u);
        if (g - target).abs() <= tol_t {
            return Ok(HamiltonianEval {
                value: top - one_r + u,
                branch: Branch::Implicit,
                iterations: it,
                p,
                q,
            });
        }
        if g > target {
            lo = u;
        } else {
            hi = u;
        }
        let k = T::one() / g - one_r;
        let dk = -dg / (g * g);
        let newton = u - k / dk;
        u = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            (lo + hi) / T::lit(2.0)
        };
        if hi - lo <= T::epsilon() * T::lit(4.0) * hi.abs().max(T::one()) {
            let (g, _) = average(&gaps, eq, u);
            if (g - target).abs() <= tol_t * T::lit(1e3) {
                return Ok(HamiltonianEval {
                    value: top - one_r + u,
                    branch: Branch::Implicit,
                    iterations: it,
                    p,
                    q,
                });
            }
            break;
        }
    }
    Err(Error::Hamiltonian {
        p: p.as_f64(),
        q: q.as_f64(),
        detail: format!("root not resolved to {tol:e} in {MAX_ROOT_ITER} iterations"),
    })
}

/// One-sided Hamiltonian `H(p) = h(p, p)`.
pub fn hamiltonian<T: Real>(p: T, r: T, eq: &Equilibrium<T>, tol: f64) -> Result<HamiltonianEval<T>> {
    eval_hamiltonian(p, p, r, eq, tol)
}

/// Discrete membership of `p` in the set where the implicit relation (with
/// `r = 0`) has no admissible root: `<M / (mu(p) - v p)> <= 1`, with
/// `mu(p) = v_ext |p|` and `v_ext` the largest velocity node. `p = 0` is never
/// a member.
pub fn in_sing_set<T: Real>(p: T, eq: &Equilibrium<T>) -> bool {
    if p == T::zero() {
        return false;
    }
    let top = eq.v_extreme() * p.abs();
    let mut sum = T::zero();
    for (&v, &m) in eq.velocities().iter().zip(eq.values()) {
        let d = top - v * p;
        if d <= T::zero() {
            if m == T::zero() {
                continue;
            }
            return false;
        }
        sum = sum + m / d;
    }
    eq.dv() * sum <= T::one()
}

/// `H_i` from the upwind slopes of `phi` at every cell.
pub fn hamiltonian_field<T: Real>(phi: &[T], grid: &Grid<T>, eq: &Equilibrium<T>, r: T, tol: f64) -> Result<Vec<T>> {
    (0..grid.n_x)
        .into_par_iter()
        .map(|i| {
            let (p, q) = slopes(phi, i, grid);
            eval_hamiltonian(p, q, r, eq, tol).map(|e| e.value)
        })
        .collect()
}

/// Phase of the limit problem at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct HJField<T> {
    pub phi: Vec<T>,
    /// Hamiltonian used to reach this level (zero at the initial level).
    pub h: Vec<T>,
    pub r: T,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitConfig {
    pub r: f64,
    pub ham_tol: f64,
    pub phi_cap: f64,
}

impl LimitConfig {
    pub fn new(r: f64) -> Self {
        LimitConfig {
            r,
            ham_tol: 1e-12,
            phi_cap: 10.0,
        }
    }
}

/// Scheme map of one cell from its three-point stencil: `phi_i - dt (h + r)`,
/// clipped at zero when `r > 0`.
pub fn limit_update<T: Real>(
    left: T,
    centre: T,
    right: T,
    r: T,
    eq: &Equilibrium<T>,
    grid: &Grid<T>,
    tol: f64,
) -> Result<(T, T)> {
    let p = (centre - left) / grid.dx;
    let q = (right - centre) / grid.dx;
    let h = eval_hamiltonian(p, q, r, eq, tol)?.value;
    let raw = centre - grid.dt * (h + r);
    let next = if r > T::zero() { raw.max(T::zero()) } else { raw };
    Ok((next, h))
}

pub fn limit_step<T: Real>(field: &HJField<T>, grid: &Grid<T>, eq: &Equilibrium<T>, tol: f64) -> Result<HJField<T>> {
    let next_n = field.n + 1;
    let updates: Vec<(T, T)> = (0..grid.n_x)
        .into_par_iter()
        .map(|i| {
            let phi = &field.phi;
            limit_update(phi[grid.left(i)], phi[i], phi[grid.right(i)], field.r, eq, grid, tol)
                .map_err(|e| match e {
                    Error::Hamiltonian { p, q, detail } => Error::Hamiltonian {
                        p,
                        q,
                        detail: format!("cell {i}: {detail}"),
                    },
                    other => other,
                })
        })
        .collect::<Result<_>>()
        .map_err(|e| e.at_step(next_n))?;
    let (phi, h) = updates.into_iter().unzip();
    Ok(HJField {
        phi,
        h,
        r: field.r,
        n: next_n,
    })
}

#[derive(Clone, Debug)]
pub struct LimitSnapshot<T> {
    pub time: T,
    pub field: HJField<T>,
}

#[derive(Clone, Debug)]
pub struct LimitTrajectory<T> {
    /// Initial level, final level and levels closest to requested times.
    pub snapshots: Vec<LimitSnapshot<T>>,
}

impl<T: Real> LimitTrajectory<T> {
    pub fn last(&self) -> &HJField<T> {
        &self.snapshots.last().expect("trajectory is never empty").field
    }

    pub fn at_time(&self, t: T) -> &HJField<T> {
        &self
            .snapshots
            .iter()
            .min_by(|a, b| (a.time - t).abs().partial_cmp(&(b.time - t).abs()).unwrap())
            .expect("trajectory is never empty")
            .field
    }
}

pub fn run_limit<T: Real>(
    phi_in: &[T],
    grid: &Grid<T>,
    eq: &Equilibrium<T>,
    cfg: &LimitConfig,
    times: &[T],
) -> Result<LimitTrajectory<T>> {
    if phi_in.len() != grid.n_x {
        return Err(Error::Config(format!(
            "initial phase has {} values for {} cells",
            phi_in.len(),
            grid.n_x
        )));
    }
    if !(cfg.r >= 0.0) {
        return Err(Error::Config(format!("r must be nonnegative, got {}", cfg.r)));
    }
    let mut field = HJField {
        phi: cap_initial_phase(phi_in, T::lit(cfg.phi_cap))?,
        h: vec![T::zero(); grid.n_x],
        r: T::lit(cfg.r),
        n: 0,
    };
    let wanted = crate::micromacro::snapshot_steps(grid, times);
    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut next_wanted = wanted.iter().peekable();
    loop {
        if next_wanted.peek() == Some(&&field.n) {
            snapshots.push(LimitSnapshot {
                time: grid.time(field.n),
                field: field.clone(),
            });
            next_wanted.next();
        }
        if field.n >= grid.n_t {
            break;
        }
        field = limit_step(&field, grid, eq, cfg.ham_tol)?;
    }
    Ok(LimitTrajectory { snapshots })
}

/// Finite-difference step used by [`monotonicity_check`].
pub const FD_STEP: f64 = 1e-6;

/// Central finite-difference estimates of the partial derivatives of the
/// scheme map `phi_i - dt (h(p, q) + r)` with respect to `phi_{i-1}`,
/// `phi_i`, `phi_{i+1}`.
pub fn monotonicity_check<T: Real>(
    triplet: [T; 3],
    r: T,
    eq: &Equilibrium<T>,
    grid: &Grid<T>,
    tol: f64,
) -> Result<[T; 3]> {
    let map = |s: [T; 3]| -> Result<T> {
        let p = (s[1] - s[0]) / grid.dx;
        let q = (s[2] - s[1]) / grid.dx;
        let h = eval_hamiltonian(p, q, r, eq, tol)?.value;
        Ok(s[1] - grid.dt * (h + r))
    };
    let step = T::lit(FD_STEP);
    let mut out = [T::zero(); 3];
    for k in 0..3 {
        let mut plus = triplet;
        let mut minus = triplet;
        plus[k] = plus[k] + step;
        minus[k] = minus[k] - step;
        out[k] = (map(plus)? - map(minus)?) / (T::lit(2.0) * step);
    }
    Ok(out)
}

/// Whether estimates from [`monotonicity_check`] satisfy
/// `0 <= d/d(phi_{i+-1}) <= v_max dt/dx` and `1 - v_max dt/dx <= d/d(phi_i) <= 1`
/// up to `slack`.
pub fn monotone_within<T: Real>(d: &[T; 3], grid: &Grid<T>, slack: T) -> bool {
    let c = grid.cfl_number();
    let side_ok = |x: T| x >= -slack && x <= c + slack;
    side_ok(d[0]) && side_ok(d[2]) && d[1] >= T::one() - c - slack && d[1] <= T::one() + slack
}

/// `H(p)` on `n` evenly spaced slopes in `[p_min, p_max]`.
pub fn hamiltonian_table<T: Real>(
    p_min: T,
    p_max: T,
    n: usize,
    r: T,
    eq: &Equilibrium<T>,
    tol: f64,
) -> Result<Vec<HamiltonianEval<T>>> {
    if n < 2 {
        return Err(Error::Config("hamiltonian table needs at least two points".into()));
    }
    (0..n)
        .map(|k| {
            let p = p_min + (p_max - p_min) * T::from_usize_lossy(k) / T::from_usize_lossy(n - 1);
            hamiltonian(p, r, eq, tol)
        })
        .collect()
}
