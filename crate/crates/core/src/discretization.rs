//! Space, velocity and time grids, the velocity quadrature and equilibrium
//! distributions.
//!
//! Space and velocity use cell-centered symmetric grids: for `n` cells on
//! `[-L, L]` the centers are `-L + d/2 + k d` with `d = 2L/n`. No node sits at
//! zero and the grid is mirrored exactly (`x[n-1-k] == -x[k]` bit for bit), so
//! velocity averages of odd functions of an even equilibrium vanish to
//! round-off.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Spatial boundary treatment, applied through one ghost cell per side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Indices wrap around.
    #[default]
    Periodic,
    /// Zero-gradient: the ghost cell copies the nearest interior value.
    Neumann,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Boundary::Periodic => f.write_str("periodic"),
            Boundary::Neumann => f.write_str("neumann"),
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" => Ok(Boundary::Periodic),
            "neumann" => Ok(Boundary::Neumann),
            other => Err(Error::Config(format!(
                "unknown boundary `{other}` (expected periodic or neumann)"
            ))),
        }
    }
}

/// Phase-space-time discretization.
#[derive(Clone, Debug)]
pub struct Grid<T> {
    pub x_max: T,
    pub n_x: usize,
    pub dx: T,
    pub x: Vec<T>,
    pub v_max: T,
    pub n_v: usize,
    pub dv: T,
    pub v: Vec<T>,
    pub t_final: T,
    pub n_t: usize,
    /// `t_final / n_t`, or zero when `n_t == 0` (no steps are taken).
    pub dt: T,
    pub boundary: Boundary,
}

fn symmetric_centers<T: Real>(half_width: T, n: usize) -> (T, Vec<T>) {
    let d = T::lit(2.0) * half_width / T::from_usize_lossy(n);
    let mut centers = vec![T::zero(); n];
    for k in 0..n / 2 {
        let c = -half_width + d / T::lit(2.0) + T::from_usize_lossy(k) * d;
        centers[k] = c;
        centers[n - 1 - k] = -c;
    }
    (d, centers)
}

fn even_count(name: &'static str, value: usize) -> Result<()> {
    if value == 0 || !value.is_multiple_of(2) {
        return Err(Error::OddCount { name, value });
    }
    Ok(())
}

fn positive<T: Real>(name: &str, value: T) -> Result<()> {
    if !(value > T::zero()) || !value.is_finite() {
        return Err(Error::Config(format!("{name} must be positive and finite, got {value}")));
    }
    Ok(())
}

impl<T: Real> Grid<T> {
    /// Builds the grids and checks the transport CFL condition `v_max dt/dx < 1`.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        x_max: T,
        n_x: usize,
        v_max: T,
        n_v: usize,
        t_final: T,
        n_t: usize,
        boundary: Boundary,
    ) -> Result<Self> {
        positive("x_max", x_max)?;
        positive("v_max", v_max)?;
        even_count("n_x", n_x)?;
        even_count("n_v", n_v)?;
        if !(t_final >= T::zero()) || !t_final.is_finite() {
            return Err(Error::Config(format!("t_final must be nonnegative, got {t_final}")));
        }
        let (dx, x) = symmetric_centers(x_max, n_x);
        let (dv, v) = symmetric_centers(v_max, n_v);
        let dt = if n_t == 0 {
            T::zero()
        } else {
            t_final / T::from_usize_lossy(n_t)
        };
        let grid = Grid {
            x_max,
            n_x,
            dx,
            x,
            v_max,
            n_v,
            dv,
            v,
            t_final,
            n_t,
            dt,
            boundary,
        };
        let ratio = grid.cfl_number();
        if !(ratio < T::one()) {
            return Err(Error::Cfl { ratio: ratio.as_f64() });
        }
        Ok(grid)
    }

    /// Builds a grid from step sizes instead of counts. Each step must divide
    /// its interval into an integer number of cells (to relative precision 1e-9).
    #[allow(clippy::too_many_arguments)]
    pub fn from_steps(
        x_max: T,
        dx: T,
        v_max: T,
        dv: T,
        t_final: T,
        dt: T,
        boundary: Boundary,
    ) -> Result<Self> {
        positive("dx", dx)?;
        positive("dv", dv)?;
        positive("dt", dt)?;
        let n_x = count_for("dx", T::lit(2.0) * x_max, dx)?;
        let n_v = count_for("dv", T::lit(2.0) * v_max, dv)?;
        let n_t = if t_final == T::zero() {
            0
        } else {
            count_for("dt", t_final, dt)?
        };
        Self::build(x_max, n_x, v_max, n_v, t_final, n_t, boundary)
    }

    pub fn cfl_number(&self) -> T {
        self.v_max * self.dt / self.dx
    }

    /// `max(v_j, 0)`.
    #[inline]
    pub fn v_plus(&self, j: usize) -> T {
        self.v[j].max(T::zero())
    }

    /// `min(v_j, 0)`.
    #[inline]
    pub fn v_minus(&self, j: usize) -> T {
        self.v[j].min(T::zero())
    }

    /// Largest velocity node, `v_max - dv/2`.
    pub fn v_extreme(&self) -> T {
        self.v[self.n_v - 1]
    }

    /// Index supplying the value at `i - 1` (ghost cell resolved by the boundary rule).
    #[inline]
    pub fn left(&self, i: usize) -> usize {
        match (i, self.boundary) {
            (0, Boundary::Periodic) => self.n_x - 1,
            (0, Boundary::Neumann) => 0,
            _ => i - 1,
        }
    }

    /// Index supplying the value at `i + 1`.
    #[inline]
    pub fn right(&self, i: usize) -> usize {
        if i + 1 < self.n_x {
            i + 1
        } else {
            match self.boundary {
                Boundary::Periodic => 0,
                Boundary::Neumann => self.n_x - 1,
            }
        }
    }

    /// Step index closest to time `t`, clipped to `[0, n_t]`.
    pub fn step_index(&self, t: T) -> usize {
        if self.n_t == 0 || self.dt == T::zero() {
            return 0;
        }
        let k = (t / self.dt).round().to_usize().unwrap_or(0);
        k.min(self.n_t)
    }

    pub fn time(&self, n: usize) -> T {
        T::from_usize_lossy(n) * self.dt
    }

    /// `<f>_{N_v}` on this grid's velocity nodes.
    pub fn quadrature(&self, f: &[T]) -> T {
        quadrature(self.dv, f)
    }
}

fn count_for<T: Real>(name: &str, length: T, step: T) -> Result<usize> {
    let ratio = length / step;
    let n = ratio.round();
    if n < T::one() || ((ratio - n) / n).abs() > T::lit(1e-9) {
        return Err(Error::Config(format!(
            "{name} = {step} does not divide the interval of length {length}"
        )));
    }
    Ok(n.to_usize().unwrap_or(0))
}

/// Midpoint quadrature in velocity: `dv * sum_j f_j`.
pub fn quadrature<T: Real>(dv: T, f: &[T]) -> T {
    dv * f.iter().copied().sum::<T>()
}

/// Which equilibrium profile to build.
#[derive(Clone, Debug, PartialEq)]
pub enum EquilibriumSpec<T> {
    /// Constant on the velocity grid.
    Uniform,
    /// `m ((v_max - dv/2)^2 - v^2)`, vanishing at the two extreme nodes.
    SingularParabolic,
    /// Nodal values, renormalized to unit mass.
    Custom(Vec<T>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquilibriumKind {
    Uniform,
    SingularParabolic,
    Custom,
}

impl std::fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EquilibriumKind::Uniform => f.write_str("uniform"),
            EquilibriumKind::SingularParabolic => f.write_str("singular_parabolic"),
            EquilibriumKind::Custom => f.write_str("custom"),
        }
    }
}

/// Equilibrium velocity distribution sampled on the velocity grid.
///
/// Carries a copy of the velocity nodes so Hamiltonian evaluations do not need
/// the full grid.
#[derive(Clone, Debug)]
pub struct Equilibrium<T> {
    values: Vec<T>,
    kind: EquilibriumKind,
    normalization: T,
    v: Vec<T>,
    dv: T,
}

impl<T: Real> Equilibrium<T> {
    pub fn build(spec: &EquilibriumSpec<T>, grid: &Grid<T>) -> Result<Self> {
        let (raw, kind) = match spec {
            EquilibriumSpec::Uniform => (vec![T::one(); grid.n_v], EquilibriumKind::Uniform),
            EquilibriumSpec::SingularParabolic => {
                // The extreme node itself is used as the root so M vanishes
                // exactly there.
                let a = grid.v_extreme();
                let raw = grid
                    .v
                    .iter()
                    .map(|&v| (a - v.abs()) * (a + v.abs()))
                    .collect();
                (raw, EquilibriumKind::SingularParabolic)
            }
            EquilibriumSpec::Custom(values) => {
                if values.len() != grid.n_v {
                    return Err(Error::Equilibrium(format!(
                        "expected {} nodal values, got {}",
                        grid.n_v,
                        values.len()
                    )));
                }
                (values.clone(), EquilibriumKind::Custom)
            }
        };
        Self::from_raw(raw, kind, grid)
    }

    pub fn uniform(grid: &Grid<T>) -> Self {
        Self::build(&EquilibriumSpec::Uniform, grid).expect("uniform equilibrium is always valid")
    }

    pub fn singular_parabolic(grid: &Grid<T>) -> Result<Self> {
        Self::build(&EquilibriumSpec::SingularParabolic, grid)
    }

    fn from_raw(raw: Vec<T>, kind: EquilibriumKind, grid: &Grid<T>) -> Result<Self> {
        if let Some((j, v)) = raw
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < T::zero())
        {
            return Err(Error::Equilibrium(format!(
                "value at node {j} must be finite and nonnegative, got {v}"
            )));
        }
        let positive = raw.iter().filter(|v| **v > T::zero()).count();
        if positive < 2 {
            return Err(Error::Equilibrium(format!(
                "at least two nodes must carry positive mass, found {positive}"
            )));
        }
        let scale = raw.iter().fold(T::zero(), |a, &b| a.max(b));
        let n = raw.len();
        for j in 0..n / 2 {
            if (raw[j] - raw[n - 1 - j]).abs() > T::lit(1e-12) * scale {
                return Err(Error::Equilibrium(format!(
                    "values must be even in v: node {j} has {} but its mirror has {}",
                    raw[j],
                    raw[n - 1 - j]
                )));
            }
        }
        let mass = quadrature(grid.dv, &raw);
        let normalization = T::one() / mass;
        let mut values: Vec<T> = raw.iter().map(|&m| m * normalization).collect();
        // Exact mirror so <vM> cancels pairwise.
        for j in 0..n / 2 {
            values[n - 1 - j] = values[j];
        }
        Ok(Equilibrium {
            values,
            kind,
            normalization,
            v: grid.v.clone(),
            dv: grid.dv,
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn kind(&self) -> EquilibriumKind {
        self.kind
    }

    /// Factor applied to the raw samples to reach unit mass.
    pub fn normalization(&self) -> T {
        self.normalization
    }

    pub fn velocities(&self) -> &[T] {
        &self.v
    }

    pub fn dv(&self) -> T {
        self.dv
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `true` when some node carries zero mass.
    pub fn is_singular(&self) -> bool {
        self.values.iter().any(|&m| m == T::zero())
    }

    /// Largest velocity node magnitude.
    pub fn v_extreme(&self) -> T {
        self.v.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
    }

    /// `<M>_{N_v}`.
    pub fn mass(&self) -> T {
        quadrature(self.dv, &self.values)
    }

    /// `<v M>_{N_v}`.
    pub fn first_moment(&self) -> T {
        let vm: Vec<T> = self.v.iter().zip(&self.values).map(|(&v, &m)| v * m).collect();
        quadrature(self.dv, &vm)
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn quadrature_is_linear(
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
            f in proptest::collection::vec(-10.0f64..10.0, 16),
            g in proptest::collection::vec(-10.0f64..10.0, 16),
        ) {
            let dv = 0.125;
            let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
            let lhs = quadrature(dv, &combo);
            let rhs = a * quadrature(dv, &f) + b * quadrature(dv, &g);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn built_equilibria_are_normalized(half_nv in 1usize..100, parabolic in any::<bool>()) {
            let n_v = 2 * half_nv.max(2);
            let g = Grid::<f64>::build(1.0, 8, 1.0, n_v, 1.0, 100, Boundary::Periodic).unwrap();
            let spec = if parabolic { EquilibriumSpec::SingularParabolic } else { EquilibriumSpec::Uniform };
            let m = Equilibrium::build(&spec, &g).unwrap();
            prop_assert!((m.mass() - 1.0).abs() <= 1e-14);
            prop_assert!(m.first_moment().abs() <= 1e-14);
        }
    }
}
