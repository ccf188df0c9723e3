//! Error norms, convergence fits, front tracking and the front speed oracle.

use crate::discretization::Equilibrium;
use crate::error::{Error, Result};
use crate::hj_limit::hamiltonian;
use crate::scalar::{max_abs, Real};

/// `||a - b||_inf / ||a||_inf`. The first argument is the normaliser.
pub fn sup_error<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    assert_eq!(a.len(), b.len(), "sup_error needs fields on the same nodes");
    let norm = max_abs(a);
    if norm == T::zero() {
        return Err(Error::DivisionByZero("sup_error: reference field is identically zero"));
    }
    let diff = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs())
        .fold(T::zero(), |m, d| if d.is_nan() { d } else { m.max(d) });
    Ok(diff / norm)
}

/// `||a - b||_inf` without normalisation.
pub fn sup_gap<T: Real>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs())
        .fold(T::zero(), |m, d| if d.is_nan() { d } else { m.max(d) })
}

/// Piecewise-linear interpolation of `(xs, ys)` at `targets`; constant
/// extrapolation outside `[xs[0], xs[last]]`. `xs` must be increasing.
pub fn interpolate<T: Real>(xs: &[T], ys: &[T], targets: &[T]) -> Vec<T> {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    let last = xs.len() - 1;
    targets
        .iter()
        .map(|&t| {
            if t <= xs[0] {
                return ys[0];
            }
            if t >= xs[last] {
                return ys[last];
            }
            let k = xs.partition_point(|&x| x <= t);
            let (x0, x1) = (xs[k - 1], xs[k]);
            let w = (t - x0) / (x1 - x0);
            ys[k - 1] + w * (ys[k] - ys[k - 1])
        })
        .collect()
}

/// Relative error of a coarse field against a finer reference: the reference is
/// interpolated onto the coarse centers, then normalised as in [`sup_error`].
/// Cell-centered grids do not nest, so linear interpolation replaces
/// nodewise restriction.
pub fn relative_error_on_coarse<T: Real>(reference_x: &[T], reference: &[T], coarse_x: &[T], coarse: &[T]) -> Result<T> {
    let restricted = interpolate(reference_x, reference, coarse_x);
    sup_error(&restricted, coarse)
}

/// Least-squares line through `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Root-mean-square residual.
    pub residual: T,
}

pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> Result<LineFit<T>> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let nt = T::from_usize_lossy(n);
    let mx = x.iter().copied().sum::<T>() / nt;
    let my = y.iter().copied().sum::<T>() / nt;
    let sxx = x.iter().map(|&a| (a - mx) * (a - mx)).sum::<T>();
    if sxx == T::zero() {
        return Err(Error::DivisionByZero("fit_line: abscissae are all equal"));
    }
    let sxy = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum::<T>();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let e = b - (intercept + slope * a);
            e * e
        })
        .sum::<T>();
    Ok(LineFit {
        slope,
        intercept,
        residual: (ss / nt).sqrt(),
    })
}

/// Position where `rho` first drops below `threshold` scanning from the left,
/// linearly interpolated between the bracketing centers.
pub fn front_position<T: Real>(x: &[T], rho: &[T], threshold: T) -> Result<T> {
    assert_eq!(x.len(), rho.len());
    if rho.is_empty() {
        return Err(Error::NoCrossing("empty profile"));
    }
    if rho[0] < threshold {
        return Err(Error::NoCrossing("profile starts below the threshold"));
    }
    for i in 1..rho.len() {
        if rho[i] < threshold {
            let (a, b) = (rho[i - 1], rho[i]);
            let w = (a - threshold) / (a - b);
            return Ok(x[i - 1] + w * (x[i] - x[i - 1]));
        }
    }
    Err(Error::NoCrossing("front left the domain"))
}

/// Front positions over time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrontTrack<T> {
    pub times: Vec<T>,
    pub positions: Vec<T>,
}

/// Fraction of the earliest samples discarded before fitting the speed.
pub const TRANSIENT_FRACTION: f64 = 0.1;

/// Least-squares slope of position against time after dropping the first
/// `skip_fraction` of samples. Needs at least five samples in the window.
pub fn fit_front_speed<T: Real>(track: &FrontTrack<T>, skip_fraction: f64) -> Result<LineFit<T>> {
    let n = track.times.len();
    let skip = (n as f64 * skip_fraction).ceil() as usize;
    let window = n.saturating_sub(skip);
    if window < 5 {
        return Err(Error::InsufficientSamples { needed: 5, got: window });
    }
    fit_line(&track.times[skip..], &track.positions[skip..])
}

/// `c(p) = (H(p) + r) / p`.
pub fn speed_of_slope<T: Real>(p: T, r: T, eq: &Equilibrium<T>, tol: f64) -> Result<T> {
    Ok((hamiltonian(p, r, eq, tol)?.value + r) / p)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpeedOracle<T> {
    pub c_star: T,
    pub p_star: T,
}

/// Log-spaced search grid for [`speed_oracle`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeGrid {
    pub p_min: f64,
    pub p_max: f64,
    pub n: usize,
}

impl Default for SlopeGrid {
    fn default() -> Self {
        SlopeGrid {
            p_min: 1e-2,
            p_max: 1e2,
            n: 200,
        }
    }
}

impl SlopeGrid {
    pub fn points(&self) -> Vec<f64> {
        let (a, b) = (self.p_min.ln(), self.p_max.ln());
        (0..self.n)
            .map(|k| (a + (b - a) * k as f64 / (self.n - 1) as f64).exp())
            .collect()
    }
}

/// `c* = inf_{p > 0} c(p)`: coarse scan on a log grid, then golden-section
/// refinement in `p` to 1e-10 around the best grid point.
pub fn speed_oracle<T: Real>(r: T, eq: &Equilibrium<T>, grid: SlopeGrid, tol: f64) -> Result<SpeedOracle<T>> {
    if !(r > T::zero()) {
        return Err(Error::Config(format!("the front speed needs r > 0, got {r}")));
    }
    if grid.n < 3 || !(grid.p_min > 0.0) || !(grid.p_max > grid.p_min) {
        return Err(Error::Config("slope grid needs 0 < p_min < p_max and at least 3 points".into()));
    }
    let ps = grid.points();
    let cs = ps
        .iter()
        .map(|&p| speed_of_slope(T::lit(p), r, eq, tol))
        .collect::<Result<Vec<T>>>()?;
    let k = cs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(k, _)| k)
        .unwrap_or(0);
    if k == 0 || k == ps.len() - 1 {
        return Err(Error::MinimumOnBoundary { p: ps[k] });
    }
    let f = |p: T| speed_of_slope(p, r, eq, tol);
    let (mut a, mut b) = (T::lit(ps[k - 1]), T::lit(ps[k + 1]));
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let p_tol = T::lit(1e-10);
    while (b - a).abs() > p_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let p_star = (a + b) / T::lit(2.0);
    Ok(SpeedOracle {
        c_star: f(p_star)?,
        p_star,
    })
}

/// Errors `E(eps, dx)` of a spatial convergence study.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTable {
    /// `(eps, dx, E)`.
    pub rows: Vec<(f64, f64, f64)>,
}

impl ConvergenceTable {
    pub fn epsilons(&self) -> Vec<f64> {
        let mut e: Vec<f64> = Vec::new();
        for &(eps, _, _) in &self.rows {
            if !e.contains(&eps) {
                e.push(eps);
            }
        }
        e
    }

    pub fn for_eps(&self, eps: f64) -> (Vec<f64>, Vec<f64>) {
        self.rows
            .iter()
            .filter(|row| row.0 == eps)
            .map(|&(_, dx, err)| (dx, err))
            .unzip()
    }

    /// Fitted log-log slope for every `eps`, in order of first appearance.
    pub fn slopes(&self) -> Vec<(f64, Result<f64>)> {
        self.epsilons()
            .into_iter()
            .map(|eps| {
                let (dx, err) = self.for_eps(eps);
                (eps, order_fit(&dx, &err))
            })
            .collect()
    }
}

/// Slope of `ln E` against `ln dx`. Nonpositive errors are skipped with a
/// warning; at least three usable points are required.
pub fn order_fit(dx: &[f64], err: &[f64]) -> Result<f64> {
    assert_eq!(dx.len(), err.len());
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&h, &e) in dx.iter().zip(err) {
        if e > 0.0 && h > 0.0 {
            lx.push(h.ln());
            ly.push(e.ln());
        } else {
            log::warn!("order fit: skipping dx = {h}, E = {e}");
        }
    }
    if lx.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: lx.len() });
    }
    Ok(fit_line(&lx, &ly)?.slope)
}
