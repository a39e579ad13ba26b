//! Result rows and their CSV encoding.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::error::Result;
use crate::processing::Processing;
use crate::se::{Method, SeReport};

pub const RESULT_HEADER: &str =
    "experiment,M,K,mode,method,case,drop,sum_se,se_min,se_max,ci_halfwidth,seed,trials";

pub const ORACLE_HEADER: &str =
    "oracle,class,M,K,empirical,analytic,rel_error,mc_std_error,tolerance,trials,pass";

pub const CDF_HEADER: &str = "case,mode,method,rank,sum_se,cdf";

/// One spectral-efficiency result, self-describing enough to be replayed.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub antennas: usize,
    pub users: usize,
    pub mode: Processing,
    pub method: Method,
    /// 1-based Figure 2 case.
    pub case: Option<usize>,
    pub drop: Option<usize>,
    pub sum_se: f64,
    pub se_min: f64,
    pub se_max: f64,
    pub ci_halfwidth: Option<f64>,
    /// Root seed of the run.
    pub seed: u64,
    pub trials: usize,
}

impl ResultRow {
    pub fn from_report(
        experiment: &str,
        antennas: usize,
        report: &SeReport,
        case: Option<usize>,
        drop: Option<usize>,
        seed: u64,
    ) -> Self {
        Self {
            experiment: experiment.to_string(),
            antennas,
            users: report.per_user.len(),
            mode: report.mode,
            method: report.method,
            case,
            drop,
            sum_se: report.sum,
            se_min: report.min(),
            se_max: report.max(),
            ci_halfwidth: report.sum_ci_halfwidth,
            seed,
            trials: report.trials,
        }
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.antennas,
            self.users,
            self.mode,
            self.method,
            opt(self.case.map(|c| format!("case{c}"))),
            opt(self.drop.map(|d| d.to_string())),
            format_sig(self.sum_se),
            format_sig(self.se_min),
            format_sig(self.se_max),
            opt(self.ci_halfwidth.map(format_sig)),
            self.seed,
            self.trials
        )
    }
}

/// Formats `x` with 9 significant digits like C's `%.9g`.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULT_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
