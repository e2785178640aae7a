//! Error norms and observed convergence orders.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nodes::NodeSet;

/// How nodal errors are reduced to one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorNorm {
    /// `sqrt(sum_interior e^2 / n_interior)`.
    #[default]
    Interior,
    /// `sqrt(sum_interior e^2 / n_total) / (max U - min U)`, extrema over all nodes.
    /// This is the normalization behind the published tables.
    Normalized,
}

impl fmt::Display for ErrorNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorNorm::Interior => "interior",
            ErrorNorm::Normalized => "normalized",
        })
    }
}

impl FromStr for ErrorNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "interior" => Ok(ErrorNorm::Interior),
            "normalized" => Ok(ErrorNorm::Normalized),
            other => Err(Error::Parse(format!("unknown error norm `{other}`"))),
        }
    }
}

fn check_lengths(nodes: &NodeSet, numeric: &[f64], exact: &[f64]) -> Result<()> {
    if numeric.len() != nodes.len() || exact.len() != nodes.len() {
        return Err(Error::invalid("field length does not match the node set"));
    }
    if nodes.interior_count() == 0 {
        return Err(Error::invalid("error norms need at least one interior node"));
    }
    Ok(())
}

fn interior_sum_sq(nodes: &NodeSet, numeric: &[f64], exact: &[f64]) -> f64 {
    nodes.nodes().iter().filter(|p| p.is_interior()).map(|p| (numeric[p.index] - exact[p.index]).powi(2)).sum()
}

/// Root-mean-square error over interior nodes.
pub fn rms_error(nodes: &NodeSet, numeric: &[f64], exact: &[f64]) -> Result<f64> {
    check_lengths(nodes, numeric, exact)?;
    Ok((interior_sum_sq(nodes, numeric, exact) / nodes.interior_count() as f64).sqrt())
}

pub fn error_norm(norm: ErrorNorm, nodes: &NodeSet, numeric: &[f64], exact: &[f64]) -> Result<f64> {
    match norm {
        ErrorNorm::Interior => rms_error(nodes, numeric, exact),
        ErrorNorm::Normalized => {
            check_lengths(nodes, numeric, exact)?;
            let (lo, hi) = exact.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
            let range = hi - lo;
            if !(range > 0.0) {
                return Err(Error::invalid("normalized error needs a non-constant exact solution"));
            }
            Ok((interior_sum_sq(nodes, numeric, exact) / nodes.len() as f64).sqrt() / range)
        }
    }
}

/// `log(e_old / e_new) / log(h_old / h_new)`; inputs must decrease strictly.
pub fn convergence_order(e_old: f64, e_new: f64, h_old: f64, h_new: f64) -> Result<f64> {
    let all_positive = [e_old, e_new, h_old, h_new].iter().all(|v| *v > 0.0 && v.is_finite());
    if !all_positive || h_old <= h_new || e_old <= e_new {
        return Err(Error::invalid(format!(
            "order needs positive, strictly decreasing errors and spacings (e {e_old} -> {e_new}, h {h_old} -> {h_new})"
        )));
    }
    Ok((e_old / e_new).ln() / (h_old / h_new).ln())
}

/// Same formula, but defined (possibly negative) whenever errors are positive and `h` shrinks.
pub fn observed_order(e_old: f64, e_new: f64, h_old: f64, h_new: f64) -> Option<f64> {
    let ok = [e_old, e_new, h_old, h_new].iter().all(|v| *v > 0.0 && v.is_finite()) && h_old > h_new;
    ok.then(|| (e_old / e_new).ln() / (h_old / h_new).ln())
}
