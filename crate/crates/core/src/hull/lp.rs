//! Chebyshev-centre LP for a strictly interior point.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use super::ReducedSystem;
use crate::error::{GvdError, Result};

/// Systems whose largest inscribed ball has a smaller radius are treated as empty.
pub const EPS_FEAS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct FeasiblePoint {
    pub point: Vec<f64>,
    /// Radius of the inscribed ball around `point` (distance to the nearest hyperplane).
    pub slack: f64,
}

pub fn chebyshev_center(sys: &ReducedSystem) -> Result<FeasiblePoint> {
    let dim = sys.slice.reduced_dim();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..dim)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let scale = sys
        .rows
        .iter()
        .map(|r| r.bound.abs())
        .fold(1.0f64, f64::max);
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, scale));
    for row in &sys.rows {
        let norm = row.coeffs.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            if row.bound < 0.0 {
                return Err(GvdError::Infeasible("constant inequality violated".into()));
            }
            continue;
        }
        let mut expr: Vec<_> = vars
            .iter()
            .zip(&row.coeffs)
            .filter(|(_, &c)| c != 0.0)
            .map(|(&v, &c)| (v, c / norm))
            .collect();
        expr.push((t, 1.0));
        lp.add_constraint(expr.as_slice(), ComparisonOp::Le, row.bound / norm);
    }
    let sol = lp
        .solve()
        .map_err(|e| GvdError::Infeasible(format!("interior point LP failed: {e}")))?;
    let point: Vec<f64> = vars.iter().map(|&v| sol[v]).collect();
    // recompute the slack from the point itself rather than trusting the LP objective
    let slack = sys
        .rows
        .iter()
        .filter_map(|row| {
            let norm = row.coeffs.iter().map(|v| v * v).sum::<f64>().sqrt();
            (norm > 0.0).then(|| (row.bound - dot(&row.coeffs, &point)) / norm)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(FeasiblePoint { point, slack })
}

/// A strictly interior point, or an infeasibility error when the interior is empty.
pub fn feasible_point(sys: &ReducedSystem) -> Result<FeasiblePoint> {
    let fp = chebyshev_center(sys)?;
    if !(fp.slack > EPS_FEAS) {
        return Err(GvdError::Infeasible(format!(
            "no strictly feasible sphere (largest slack {:.3e})",
            fp.slack
        )));
    }
    Ok(fp)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
