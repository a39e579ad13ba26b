//! Reproducible experiment runners behind the `mwr-sim` binary.
//!
//! Every run is a pure function of its [`ExperimentSpec`]: sub-seeds derive
//! from the root seed and the grid coordinates, trials reduce in order, and
//! rows are buffered and written by one writer. Output bytes therefore do not
//! depend on the worker count.

mod fig1;
mod fig2;
mod output;
mod spec;
mod validate;

use std::path::{Path, PathBuf};

pub use fig1::{fig1_point, fig1_rows, fig1_seed, run_fig1};
pub use fig2::{cdf_csv, drop_betas, fig2_rows, fig2_seed, quantile, run_fig2, sorted_sum_se};
pub use output::{
    format_sig, rows_to_csv, write_output, ResultRow, CDF_HEADER, ORACLE_HEADER, RESULT_HEADER,
};
pub use spec::{
    parse_config, parse_modes, read_config, ExperimentKind, ExperimentSpec, Fig1Grid, Fig2Setup,
    Placement, PowerCase, ReplayTarget, ValidateSetup, DEFAULT_SEED,
};
pub use validate::{exact_failures, run_validate, validation_csv, ValidationRow};

use crate::error::{Error, Result};

/// Recomputes the single row described by `spec.replay`.
pub fn run_single(spec: &ExperimentSpec) -> Result<ResultRow> {
    spec.validate()?;
    let r = &spec.replay;
    let rows = match r.experiment {
        ExperimentKind::Fig1 => fig1_rows(spec, r.antennas, r.users, &spec.modes, Some(r.method))?,
        ExperimentKind::Fig2 => {
            let mut s = spec.clone();
            s.fig2.antennas = r.antennas;
            s.fig2.users = r.users;
            fig2_rows(&s, r.drop, r.case, &spec.modes)?
        }
        other => {
            return Err(Error::InvalidConfig(format!("cannot replay {other} rows")));
        }
    };
    rows.into_iter()
        .next()
        .ok_or_else(|| Error::InvalidConfig("replay produced no row".into()))
}

/// Path of the CDF summary written next to the Figure 2 CSV.
pub fn cdf_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("fig2");
    out.with_file_name(format!("{stem}_cdf.csv"))
}

/// Outputs of a run, before writing.
#[derive(Clone, Debug)]
pub enum RunOutput {
    Rows(Vec<ResultRow>),
    Validation(Vec<ValidationRow>),
}

/// Runs `spec` on the current rayon pool.
pub fn run(spec: &ExperimentSpec) -> Result<RunOutput> {
    spec.validate()?;
    Ok(match spec.kind {
        ExperimentKind::Fig1 => RunOutput::Rows(run_fig1(spec)?),
        ExperimentKind::Fig2 => RunOutput::Rows(run_fig2(spec)?),
        ExperimentKind::Single => RunOutput::Rows(vec![run_single(spec)?]),
        ExperimentKind::Validate => RunOutput::Validation(run_validate(spec)?),
    })
}

/// Runs `spec` on a pool of `spec.threads` workers (rayon's default when
/// unset) and writes its files. A validation run writes its CSV before
/// reporting failed exact identities as [`Error::OracleFailure`].
pub fn execute(spec: &ExperimentSpec) -> Result<RunOutput> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = spec.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let output = pool.install(|| run(spec))?;
    let out = spec.out.as_deref();
    match &output {
        RunOutput::Rows(rows) => {
            write_output(out, &rows_to_csv(rows))?;
            if let (ExperimentKind::Fig2, Some(path)) = (spec.kind, out) {
                write_output(Some(&cdf_path(path)), &cdf_csv(spec, rows))?;
            }
        }
        RunOutput::Validation(rows) => {
            write_output(out, &validation_csv(rows))?;
            exact_failures(rows)?;
        }
    }
    Ok(output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processing::Processing;
    use crate::se::Method;

    fn small_fig1() -> ExperimentSpec {
        let mut spec = ExperimentSpec::defaults(ExperimentKind::Fig1);
        spec.fig1.k_values = vec![4, 6];
        spec.fig1.ratios = vec![5];
        spec.trials = 120;
        spec
    }

    #[test]
    fn fig1_row_layout() {
        let rows = run_fig1(&small_fig1()).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!((rows[0].antennas, rows[0].users), (20, 4));
        assert_eq!(rows[0].method, Method::ClosedForm);
        assert_eq!(rows[0].trials, 0);
        assert!(rows[0].ci_halfwidth.is_none());
        assert_eq!(
            (rows[1].mode, rows[1].method),
            (Processing::ZeroForcing, Method::MonteCarlo)
        );
        assert_eq!(rows[2].mode, Processing::MaximumRatio);
        assert!(rows[2].ci_halfwidth.unwrap() > 0.0);
        assert_eq!((rows[3].antennas, rows[3].users), (30, 6));
    }

    #[test]
    fn single_replays_fig1_rows() {
        let spec = small_fig1();
        let rows = run_fig1(&spec).unwrap();
        for row in &rows {
            let mut s = spec.clone();
            s.kind = ExperimentKind::Single;
            s.modes = vec![row.mode];
            s.replay = ReplayTarget {
                experiment: ExperimentKind::Fig1,
                antennas: row.antennas,
                users: row.users,
                method: row.method,
                case: 1,
                drop: 0,
            };
            assert_eq!(run_single(&s).unwrap().to_csv(), row.to_csv());
        }
    }

    #[test]
    fn center_placement_is_unit_gain() {
        let mut spec = ExperimentSpec::defaults(ExperimentKind::Fig2);
        spec.fig2.placement = Placement::Center;
        assert_eq!(drop_betas(&spec, 3), vec![1.0; 20]);
        spec.fig2.placement = Placement::Random;
        let b = drop_betas(&spec, 3);
        assert_eq!(b, drop_betas(&spec, 3));
        assert_ne!(b, drop_betas(&spec, 4));
    }

    #[test]
    fn cdf_file_name() {
        assert_eq!(
            cdf_path(Path::new("out/fig2.csv")),
            PathBuf::from("out/fig2_cdf.csv")
        );
    }
}
