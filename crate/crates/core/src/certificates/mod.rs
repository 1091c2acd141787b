//! Trajectory-based checks of certificate hypotheses and decay envelopes.

mod constants;
mod envelopes;
mod krasovskii;
mod razumikhin;
mod report;
mod spec;

pub use constants::check_constants;

pub use envelopes::{
    check_decay_bound, check_growth_bound, check_iss_envelope, check_weighted_bound, KllBound,
};
pub use krasovskii::check_krasovskii;
pub use razumikhin::{check_razumikhin_flow, check_razumikhin_jump, check_sandwich, check_vbar_monotone};
pub use report::{combine, CheckReport, ReportBuilder, Tolerance, TraceRow, Violation, TRACE_LIMIT};
pub use spec::{CertificateSpec, Gauge, Variant};

use crate::error::Result;
use crate::hybrid_time::HybridTimeDomain;
use crate::system::Solution;

/// A jump of a stored solution: last sample of piece `pre` to the first
/// sample of piece `pre + 1`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct JumpPair {
    pub pre: usize,
    pub pre_i: usize,
    pub t: f64,
    pub j: i64,
}

pub(crate) fn jump_pairs(sol: &Solution) -> Vec<JumpPair> {
    let pieces = sol.x.pieces();
    (sol.x.n_memory()..pieces.len().saturating_sub(1))
        .filter(|&p| pieces[p + 1].j == pieces[p].j + 1)
        .map(|p| JumpPair {
            pre: p,
            pre_i: pieces[p].len() - 1,
            t: pieces[p].t_hi(),
            j: pieces[p].j,
        })
        .collect()
}

/// Forward samples that lie on a flow interval of positive length.
pub(crate) fn on_flow(sol: &Solution, p: usize) -> bool {
    sol.x.pieces()[p].len() >= 2
}

/// Hypothesis checks, constant conditions and the sandwich bound for one
/// certificate, in a fixed order, at the default tolerances.
pub fn run_suite(
    spec: &CertificateSpec,
    sol: &Solution,
    domain: Option<&HybridTimeDomain>,
) -> Result<Vec<CheckReport>> {
    run_suite_with(spec, sol, domain, Tolerance::default(), Tolerance::derivative())
}

/// [`run_suite`] with `tol` for jump checks and `dtol` for derivative checks.
pub fn run_suite_with(
    spec: &CertificateSpec,
    sol: &Solution,
    domain: Option<&HybridTimeDomain>,
    tol: Tolerance,
    dtol: Tolerance,
) -> Result<Vec<CheckReport>> {
    spec.validate()?;
    let mut out = vec![check_sandwich(spec, sol)?];
    if spec.variant.is_razumikhin() {
        out.push(check_razumikhin_flow(spec, sol, dtol)?);
        out.push(check_razumikhin_jump(spec, sol, tol)?);
    } else {
        out.push(check_krasovskii(spec, sol, dtol)?);
    }
    out.push(check_constants(spec, sol.delta, domain)?);
    Ok(out)
}
