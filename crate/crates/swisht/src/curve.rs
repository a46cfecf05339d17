use serde::{Deserialize, Serialize};
use swisht_core::gradcheck::uniform_grid;
use swisht_core::{ActParams, Activation, ActivationKind};

use crate::error::{Error, Result};

/// One row of a curve dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub x: f64,
    pub f: f64,
    pub df_dx: f64,
    pub df_dbeta: f64,
}

pub fn curve(
    kind: ActivationKind,
    params: ActParams,
    xmin: f64,
    xmax: f64,
    points: usize,
) -> Result<Vec<CurveRow>> {
    if points < 2 {
        return Err(Error::Usage(format!(
            "--points must be at least 2, got {points}"
        )));
    }
    if !(xmin < xmax && xmin.is_finite() && xmax.is_finite()) {
        return Err(Error::Usage(format!(
            "need finite xmin < xmax, got [{xmin}, {xmax}]"
        )));
    }
    let act = Activation::new(kind, params)?;
    Ok(uniform_grid(xmin, xmax, points)
        .into_iter()
        .map(|x| {
            let t = act.fused(x);
            CurveRow {
                x,
                f: t.y,
                df_dx: t.dy_dx,
                df_dbeta: t.dy_dbeta,
            }
        })
        .collect())
}

/// First grid `x` from which `|df/dx - target| < tol` holds for every later
/// row, or `None` if the last row is already outside.
pub fn plateau_entry(rows: &[CurveRow], target: f64, tol: f64) -> Option<f64> {
    let inside = |r: &CurveRow| (r.df_dx - target).abs() < tol;
    let outside_from_end = rows.iter().rev().take_while(|r| inside(r)).count();
    (outside_from_end > 0).then(|| rows[rows.len() - outside_from_end].x)
}
