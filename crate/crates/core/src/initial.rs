//! Initial phases `phi_in(x)`.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    /// `phi_in(x) = x^2`.
    Quadratic,
    /// `min((x + 0.5)^2, 0.5 (x - 0.5)^2 + 0.05)`: two wells of different
    /// depth whose competition produces a kink.
    TwoMinima,
    /// Density one left of `position` and zero to the right, i.e. `phi_in = 0`
    /// for `x < position` and `+inf` otherwise.
    LeftStep { position: f64 },
    /// Values given cell by cell.
    Table(Vec<f64>),
}

impl InitialData {
    pub fn name(&self) -> &'static str {
        match self {
            InitialData::Quadratic => "quadratic",
            InitialData::TwoMinima => "two_minima",
            InitialData::LeftStep { .. } => "left_step",
            InitialData::Table(_) => "table",
        }
    }

    /// Samples the phase at the cell centers `x`.
    pub fn sample<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        match self {
            InitialData::Quadratic => Ok(x.iter().map(|&x| x * x).collect()),
            InitialData::TwoMinima => Ok(x
                .iter()
                .map(|&x| {
                    let half = T::lit(0.5);
                    let left = (x + half) * (x + half);
                    let right = half * (x - half) * (x - half) + T::lit(0.05);
                    left.min(right)
                })
                .collect()),
            InitialData::LeftStep { position } => {
                let s = T::lit(*position);
                Ok(x
                    .iter()
                    .map(|&x| if x < s { T::zero() } else { T::infinity() })
                    .collect())
            }
            InitialData::Table(values) => {
                if values.len() != x.len() {
                    return Err(Error::Config(format!(
                        "initial table has {} values for {} cells",
                        values.len(),
                        x.len()
                    )));
                }
                Ok(values.iter().map(|&v| T::lit(v)).collect())
            }
        }
    }
}
