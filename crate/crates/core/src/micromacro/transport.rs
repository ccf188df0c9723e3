//! First-order upwind transport of the phase `phi + eta`.

use crate::discretization::Grid;
use crate::scalar::Real;

/// Upwind approximation of `v d/dx (phi + eta)` at cell `i`, velocity `j`.
///
/// Positive velocities use the backward difference and negative ones the
/// forward difference; ghost values come from the grid's boundary rule.
/// `eta` is stored row-major: `eta[i * n_v + j]`.
pub fn upwind_transport<T: Real>(phi: &[T], eta: &[T], i: usize, j: usize, grid: &Grid<T>) -> T {
    let n_v = grid.n_v;
    let v = grid.v[j];
    if v > T::zero() {
        let l = grid.left(i);
        let diff = (phi[i] - phi[l]) + (eta[i * n_v + j] - eta[l * n_v + j]);
        v * diff / grid.dx
    } else {
        let rgt = grid.right(i);
        let diff = (phi[rgt] - phi[i]) + (eta[rgt * n_v + j] - eta[i * n_v + j]);
        v * diff / grid.dx
    }
}

/// Fills `out[j]` with the transport term of every velocity at cell `i`.
pub fn transport_row<T: Real>(phi: &[T], eta: &[T], i: usize, grid: &Grid<T>, out: &mut [T]) {
    for (j, o) in out.iter_mut().enumerate() {
        *o = upwind_transport(phi, eta, i, j, grid);
    }
}

/// Transport of `phi` alone, as used by the limit Hamiltonian: the upwind
/// backward and forward slopes at cell `i`.
pub fn slopes<T: Real>(phi: &[T], i: usize, grid: &Grid<T>) -> (T, T) {
    let back = (phi[i] - phi[grid.left(i)]) / grid.dx;
    let fwd = (phi[grid.right(i)] - phi[i]) / grid.dx;
    (back, fwd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Boundary;

    fn grid() -> Grid<f64> {
        Grid::build(1.0, 200, 1.0, 4, 1.0, 400, Boundary::Periodic).unwrap()
    }

    #[test]
    fn constant_data_has_no_transport() {
        let g = grid();
        let phi = vec![0.3; g.n_x];
        let eta = vec![-0.1; g.n_x * g.n_v];
        for i in [0, 57, 199] {
            for j in 0..g.n_v {
                assert_eq!(upwind_transport(&phi, &eta, i, j, &g), 0.0);
            }
        }
    }

    #[test]
    fn exact_on_linear_data() {
        let mut g = grid();
        g.v[2] = 0.5;
        g.boundary = Boundary::Neumann;
        let phi = g.x.clone();
        let eta = vec![0.0; g.n_x * g.n_v];
        let t = upwind_transport(&phi, &eta, 100, 2, &g);
        assert!((t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn forward_difference_for_negative_velocity() {
        let mut g = grid();
        g.v[0] = -0.5;
        let phi: Vec<f64> = g.x.iter().map(|x| x * x).collect();
        let eta = vec![0.0; g.n_x * g.n_v];
        // x_i = 0.255 is the first center above 0.25; hand evaluation:
        // -0.5 * ((0.265)^2 - (0.255)^2) / 0.01 = -0.5 * 0.52 = -0.26.
        let i = g.x.iter().position(|&x| (x - 0.255).abs() < 1e-9).unwrap();
        let t = upwind_transport(&phi, &eta, i, 0, &g);
        assert!((t + 0.26).abs() < 1e-12, "{t}");
    }

    #[test]
    fn periodic_wrap_uses_last_cell() {
        let g = Grid::<f64>::build(1.0, 8, 1.0, 4, 1.0, 8, Boundary::Periodic).unwrap();
        let phi: Vec<f64> = (0..8).map(|k| k as f64).collect();
        let eta = vec![0.0; 32];
        // v_3 > 0 at cell 0 looks back at cell 7.
        let t = upwind_transport(&phi, &eta, 0, 3, &g);
        assert!((t - g.v[3] * (0.0 - 7.0) / g.dx).abs() < 1e-12);
    }
}
