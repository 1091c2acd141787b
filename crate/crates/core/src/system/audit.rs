use serde::Serialize;

use super::sim::{EventKind, Solution};
use super::SystemDef;
use crate::error::Result;
use crate::hybrid_time::Memory;

/// One failed solution-pair condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditIssue {
    pub t: f64,
    pub j: i64,
    pub what: String,
}

/// Replay a solution against the system data: every jump must start in `D`
/// and land on a member of the `G` list; every retained flow sample must lie
/// in `C`, except within `event_tol` of a located exit.
pub fn audit_solution(sys: &SystemDef, sol: &Solution) -> Result<Vec<AuditIssue>> {
    let mut issues = Vec::new();
    let n = sys.state_dim;
    let x = &sol.x;
    let exits: Vec<f64> = sol
        .events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::FlowExit | EventKind::DeadEnd))
        .map(|e| e.t)
        .collect();

    for ev in sol.jumps() {
        let m = Memory::new(x, ev.t, ev.j, sol.delta)?;
        let u = sol.u.eval(ev.t, ev.j)?;
        if !(sys.jump_set)(&m, &u) {
            issues.push(AuditIssue {
                t: ev.t,
                j: ev.j,
                what: "jump from outside D".into(),
            });
        }
        let post = x.eval(ev.t, ev.j + 1)?;
        let list = (sys.jump_map)(&m, &u);
        if !list.iter().any(|g| g.as_slice() == post.as_slice()) {
            issues.push(AuditIssue {
                t: ev.t,
                j: ev.j,
                what: "post-jump state not in G".into(),
            });
        }
    }

    let fwd = x.n_memory();
    for (p, piece) in x.pieces().iter().enumerate().skip(fwd) {
        if piece.len() < 2 {
            continue;
        }
        for i in 0..piece.len() {
            let t = piece.t[i];
            // The last sample before a jump is audited as a jump point.
            if i + 1 == piece.len() && p + 1 < x.pieces().len() {
                continue;
            }
            let m = Memory::new(x, t, piece.j, sol.delta)?;
            let u = sol.input_at(p, i);
            debug_assert_eq!(m.now(), piece.state(i, n));
            if !(sys.flow_set)(&m, u) && !exits.iter().any(|&e| (e - t).abs() <= sol.event_tol) {
                issues.push(AuditIssue {
                    t,
                    j: piece.j,
                    what: "flow sample outside C".into(),
                });
            }
        }
    }
    Ok(issues)
}
