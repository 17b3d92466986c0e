//! Artifact writers: norm/decay CSV series and the JSON verdict document.

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::HybridNormSample;
use crate::Result;

/// One row of `norms.csv`.
#[derive(Debug, Clone, Copy)]
pub struct NormRow {
    pub sample: HybridNormSample,
    pub mass_drift: f64,
    pub gas_drift: f64,
    pub c_maxnorm: f64,
}

pub const NORMS_HEADER: &str =
    "t,P_low,u_low,c_low,high,int_P,int_u,int_high,mass_drift,gas_drift,c_maxnorm";

pub fn write_norms_csv(path: &Path, rows: &[NormRow]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{NORMS_HEADER}")?;
    for r in rows {
        let s = &r.sample;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            s.t,
            s.p_low,
            s.u_low,
            s.c_low,
            s.high,
            s.int_p,
            s.int_u,
            s.int_high,
            r.mass_drift,
            r.gas_drift,
            r.c_maxnorm
        )?;
    }
    w.flush()?;
    Ok(())
}

/// One row of `decay.csv`.
#[derive(Debug, Clone)]
pub struct DecayRow {
    pub t: f64,
    pub quantity: String,
    pub sigma: f64,
    pub lp_norm: f64,
}

pub const DECAY_HEADER: &str = "t,quantity,sigma,lp_norm";

pub fn write_decay_csv(path: &Path, rows: &[DecayRow]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{DECAY_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.t, r.quantity, r.sigma, r.lp_norm)?;
    }
    w.flush()?;
    Ok(())
}

/// How a fitted value is compared against its prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// |fitted - predicted| <= tolerance
    TwoSided,
    /// fitted <= predicted + tolerance (the prediction is an upper bound on
    /// the decay exponent; faster decay passes)
    UpperBound,
    /// a plain boundedness check; predicted/fitted carry the bound and the
    /// observed supremum ratio
    Bound,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub claim: String,
    /// `None` for checks with no finite predicted value (e.g. "any finite
    /// constant passes" benches).
    pub predicted: Option<f64>,
    pub fitted: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn decay(
        claim: impl Into<String>,
        predicted: f64,
        fitted: f64,
        tolerance: f64,
        comparison: Comparison,
        detail: impl Into<String>,
    ) -> Self {
        let pass = match comparison {
            Comparison::TwoSided => (fitted - predicted).abs() <= tolerance,
            Comparison::UpperBound => fitted <= predicted + tolerance,
            Comparison::Bound => fitted <= predicted,
        };
        Verdict {
            claim: claim.into(),
            predicted: Some(predicted),
            fitted,
            tolerance,
            comparison,
            pass,
            detail: detail.into(),
        }
    }
}

pub fn write_verdicts(path: &Path, verdicts: &[Verdict]) -> Result<()> {
    let json = serde_json::to_string_pretty(verdicts)?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn read_verdicts(path: &Path) -> Result<Vec<Verdict>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
