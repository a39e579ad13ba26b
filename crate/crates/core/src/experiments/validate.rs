//! The oracle suite behind `mwr-sim validate`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{derive_seed, sample_circular_gaussian, ComplexMatrix, RngStream};
use crate::oracles::{
    inverse_wishart_trace_check, q_asymptotic_check, quadratic_form_check, variance_terms_check,
    OracleResult, ToleranceClass,
};

use super::fig1::fig1_point;
use super::output::{format_sig, ORACLE_HEADER};
use super::spec::ExperimentSpec;

/// An oracle outcome with the `(M, K)` it ran at.
#[derive(Clone, Debug)]
pub struct ValidationRow {
    pub antennas: usize,
    /// `None` for checks without a user dimension.
    pub users: Option<usize>,
    pub result: OracleResult,
}

/// Runs every oracle. Wishart checks use `wishart_trials`; the relay checks use
/// `trials` at the configured `(M, K)` with Figure 1 statistics.
pub fn run_validate(spec: &ExperimentSpec) -> Result<Vec<ValidationRow>> {
    let v = &spec.validate;
    let seed = |tag: &str| derive_seed(spec.seed, tag, &[]);
    let row = |antennas, users, result| ValidationRow {
        antennas,
        users,
        result,
    };
    let mut rows = vec![
        row(
            6,
            Some(2),
            inverse_wishart_trace_check(
                6,
                2,
                &[1.0, 2.0],
                &[2.0, 2.0],
                v.wishart_trials,
                seed("wishart-trace"),
            )?,
        ),
        row(
            3,
            Some(2),
            inverse_wishart_trace_check(
                3,
                2,
                &[1.0, 2.0],
                &[2.0, 2.0],
                v.wishart_trials,
                seed("wishart-trace-edge"),
            )?,
        ),
        row(
            6,
            None,
            quadratic_form_check(
                &ComplexMatrix::identity(6),
                v.wishart_trials,
                seed("quadratic-form"),
            )?,
        ),
    ];
    let a = sample_circular_gaussian(6, 6, &mut RngStream::new(seed("quadratic-form-matrix"), 0));
    let mut general = quadratic_form_check(&a, v.wishart_trials, seed("quadratic-form-general"))?;
    general.name = "quadratic_form general M=6".into();
    rows.push(row(6, None, general));

    let (cfg, profile) = fig1_point(&spec.fig1, v.antennas, v.users)?;
    let (m, k) = (cfg.antennas, cfg.users);
    for r in q_asymptotic_check(&cfg, &profile, spec.trials, seed("q-terms"))? {
        rows.push(row(m, Some(k), r));
    }
    if k >= 3 {
        for r in variance_terms_check(&cfg, &profile, 0, spec.trials, seed("variance-terms"))? {
            rows.push(row(m, Some(k), r));
        }
    }
    Ok(rows)
}

/// `OracleFailure` naming every failed exact identity, if any.
pub fn exact_failures(rows: &[ValidationRow]) -> Result<()> {
    let failed: Vec<&str> = rows
        .iter()
        .filter(|r| r.result.class == ToleranceClass::Exact && !r.result.pass)
        .map(|r| r.result.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::OracleFailure(failed.join(", ")))
    }
}

pub fn validation_csv(rows: &[ValidationRow]) -> String {
    let mut out = String::from(ORACLE_HEADER);
    out.push('\n');
    for ValidationRow {
        antennas,
        users,
        result: r,
    } in rows
    {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.name,
            r.class.label(),
            antennas,
            users.map(|k| k.to_string()).unwrap_or_default(),
            format_sig(r.empirical),
            format_sig(r.analytic),
            format_sig(r.rel_error),
            format_sig(r.mc_std_error),
            format_sig(r.tolerance),
            r.trials,
            if r.pass { "pass" } else { "fail" }
        )
        .expect("writing to a String");
    }
    out
}
