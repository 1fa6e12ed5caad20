use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::error::HhoError;

/// Errors at or below this value on two consecutive levels mark the rate as
/// exact instead of computing a meaningless log ratio of roundoff.
pub const EXACT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rate {
    Undefined,
    Exact,
    Order(f64),
}

impl Rate {
    pub fn value(&self) -> Option<f64> {
        match self {
            Rate::Order(v) => Some(*v),
            _ => None,
        }
    }

    fn cell(&self) -> String {
        match self {
            Rate::Undefined => String::new(),
            Rate::Exact => "exact".into(),
            Rate::Order(v) => format!("{v:.4}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub energy_error: f64,
    pub energy_ocv: Rate,
    pub l2_error: f64,
    pub l2_ocv: Rate,
}

/// Observed order between two levels.
pub fn ocv(h_prev: f64, e_prev: f64, h: f64, e: f64) -> Rate {
    if e_prev <= EXACT_FLOOR && e <= EXACT_FLOOR {
        Rate::Exact
    } else {
        Rate::Order((e_prev / e).ln() / (h_prev / h).ln())
    }
}

/// Build the table from `(h, energy_error, l2_error)` triples; `h` must be
/// strictly decreasing.
pub fn convergence_table(rows: &[(f64, f64, f64)]) -> Result<Vec<ConvergenceRow>, HhoError> {
    if rows.is_empty() {
        return Err(HhoError::Table("no rows".into()));
    }
    if rows.windows(2).any(|w| !(w[1].0 < w[0].0)) {
        return Err(HhoError::Table("mesh sizes must be strictly decreasing".into()));
    }
    Ok(rows
        .iter()
        .enumerate()
        .map(|(i, &(h, ee, le))| {
            let (energy_ocv, l2_ocv) = if i == 0 {
                (Rate::Undefined, Rate::Undefined)
            } else {
                let (hp, ep, lp) = rows[i - 1];
                (ocv(hp, ep, h, ee), ocv(hp, lp, h, le))
            };
            ConvergenceRow { h, energy_error: ee, energy_ocv, l2_error: le, l2_ocv }
        })
        .collect())
}

impl ConvergenceRow {
    /// CSV with columns `h, energy_err, energy_ocv, l2_err, l2_ocv`.
    pub fn write_csv<W: Write>(rows: &[ConvergenceRow], w: W) -> Result<(), HhoError> {
        let mut wr = csv::Writer::from_writer(w);
        let err = |e: csv::Error| HhoError::Table(e.to_string());
        wr.write_record(["h", "energy_err", "energy_ocv", "l2_err", "l2_ocv"]).map_err(err)?;
        for r in rows {
            wr.write_record([
                format!("{:.6e}", r.h),
                format!("{:.6e}", r.energy_error),
                r.energy_ocv.cell(),
                format!("{:.6e}", r.l2_error),
                r.l2_ocv.cell(),
            ])
            .map_err(err)?;
        }
        wr.flush().map_err(|e| HhoError::Table(e.to_string()))
    }

    pub fn to_text(rows: &[ConvergenceRow]) -> String {
        let mut s = format!("{:>10}  {:>11}  {:>6}  {:>11}  {:>6}\n", "h", "energy_err", "OCV", "l2_err", "OCV");
        for r in rows {
            let short = |rate: &Rate| match rate {
                Rate::Order(v) => format!("{v:.2}"),
                other => other.cell(),
            };
            let _ = writeln!(
                s,
                "{:>10.2e}  {:>11.2e}  {:>6}  {:>11.2e}  {:>6}",
                r.h,
                r.energy_error,
                short(&r.energy_ocv),
                r.l2_error,
                short(&r.l2_ocv)
            );
        }
        s
    }
}
