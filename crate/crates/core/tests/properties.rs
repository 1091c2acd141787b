use std::path::Path;

use hymem_core::case_studies::{
    build_example1, classify_example2, example1_history, example1_phi, example1_v,
    example2_preset, Example1Params,
};
use hymem_core::certificates::{check_vbar_monotone, CheckReport, Tolerance, Violation};
use hymem_core::hybrid_time::io::arc_to_csv_string;
use hymem_core::hybrid_time::{
    memory_operator, memory_sup_distance, sup_norm_input, validate_domain, HybridArc, HybridTime,
    InputSignal, Memory, MemoryArc,
};
use hymem_core::lyapunov::{
    adt_margin, directional_deriv, lambda_bar_residual, radt_margin, solve_lambda_bar, vbar,
    vhat, FunctionalSeries, LyapunovState, VbarSeries,
};
use hymem_core::scenario::{exit_code, run_scenario, ScenarioConfig, Verdict};
use hymem_core::system::{
    audit_solution, simulate, EventKind, Priority, Selection, SimConfig, Solution, SystemDef,
};
use proptest::prelude::*;

/// Timer-driven scalar delay system: `ẋ = a x + b x(t-r) + u`, `τ̇ = 1`,
/// and at `τ = T` either `x⁺ = c x` or `x⁺ = -c x`, with `τ⁺ = 0`.
#[derive(Debug, Clone)]
struct Timer {
    a: f64,
    b: f64,
    c: f64,
    period: f64,
    r: f64,
    delta: f64,
    extra: f64,
    amp: f64,
}

impl Timer {
    fn system(&self) -> SystemDef {
        let Timer { a, b, c, period, r, .. } = self.clone();
        SystemDef::new("timer", self.delta, 2, 1)
            .with_flow(move |m, u| {
                let z = m.now();
                vec![a * z[0] + b * m.delayed(r)[0] + u[0], 1.0]
            })
            .with_flow_set(move |m, _| m.now()[1] <= period)
            .with_jump_set(move |m, _| m.now()[1] >= period)
            .with_jump_set_valued(move |m, _| {
                let x = m.now()[0];
                vec![vec![c * x, 0.0], vec![-c * x, 0.0]]
            })
            .with_dist_w(|z| z[0].abs())
            .with_max_delay(r)
    }

    fn history(&self) -> MemoryArc {
        let arc = HybridArc::history_from_fn(2, self.delta + self.extra, 40, |s| {
            vec![(3.0 * s).cos() + 0.2 * s, 0.0]
        })
        .unwrap();
        MemoryArc::new(arc).unwrap()
    }

    fn input(&self) -> InputSignal {
        let amp = self.amp;
        InputSignal::from_fn(1, move |t, j| vec![amp * (2.0 * t).sin() + 0.1 * amp * j as f64])
    }

    fn cfg(&self, seed: u64) -> SimConfig {
        SimConfig {
            h: 0.01,
            horizon_t: 3.0,
            horizon_j: 50,
            priority: Priority::JumpFirst,
            selection: Selection::Random,
            seed,
            ..SimConfig::default()
        }
    }

    fn run(&self, seed: u64) -> Solution {
        simulate(&self.system(), &self.history(), &self.input(), &self.cfg(seed)).unwrap()
    }
}

fn timer() -> impl Strategy<Value = Timer> {
    (
        -2.0..0.5f64,
        -0.5..0.5f64,
        0.2..1.2f64,
        0.15..0.8f64,
        0.05..0.5f64,
        0.0..1.5f64,
        0.0..1.0f64,
        0.0..1.0f64,
    )
        .prop_map(|(a, b, c, period, r, dd, extra, amp)| Timer {
            a,
            b,
            c,
            period,
            r,
            delta: r + dd,
            extra,
            amp,
        })
}

fn forward_points(sol: &Solution) -> Vec<(f64, i64)> {
    sol.x.forward_samples().map(|(_, _, t, j, _)| (t, j)).collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn truncation_revalidates(sys in timer(), seed in 0u64..1000, ft in 0.0..1.0f64, fj in 0.0..1.0f64) {
        let sol = sys.run(seed);
        let d = sol.x.domain();
        let (t_end, j_end) = sol.end();
        let (tm, jm) = (ft * t_end, (fj * j_end as f64).floor() as i64);
        let cut = d.truncate(tm, jm).unwrap();
        prop_assert!(validate_domain(cut.segments()).is_ok());
        prop_assert_eq!(cut.memory_part(), d.memory_part());
        for s in cut.forward_part() {
            prop_assert!(s.t_hi <= tm + 1e-12 && s.j <= jm);
            prop_assert!(d.contains(s.t_lo, s.j) && d.contains(s.t_hi, s.j));
        }
    }

    #[test]
    fn memory_operator_is_a_shift(sys in timer(), seed in 0u64..1000, pick in 0.0..1.0f64, dfrac in 0.0..1.0f64) {
        let sol = sys.run(seed);
        let pts = forward_points(&sol);
        let (t, j) = pts[((pts.len() - 1) as f64 * pick) as usize];
        let delta = dfrac * sys.delta;
        let phi = memory_operator(&sol.x, t, j, delta).unwrap();
        for (_, _, s, k, v) in phi.arc().all_samples() {
            let direct = sol.x.eval(t + s, j + k).unwrap();
            prop_assert!(close(v, &direct, 1e-12), "({s}, {k}): {v:?} vs {direct:?}");
            prop_assert!(close(&phi.eval(s, k).unwrap(), &direct, 1e-12));
        }
        let now = sol.x.eval(t, j).unwrap();
        prop_assert_eq!(phi.head(), now.as_slice());
    }

    #[test]
    fn window_depth_in_band(sys in timer(), seed in 0u64..1000, pick in 0.0..1.0f64) {
        let sol = sys.run(seed);
        let pts = forward_points(&sol);
        let (t, j) = pts[((pts.len() - 1) as f64 * pick) as usize];
        let m = Memory::new(&sol.x, t, j, sys.delta).unwrap();
        // the history is at least Δ deep; require Δ + 1 of total history
        let total = t + j as f64 + sys.delta + sys.extra;
        if total >= sys.delta + 1.0 {
            prop_assert!(m.depth() >= -sys.delta - 1.0 - 1e-9 && m.depth() <= -sys.delta + 1e-9,
                "depth {} at ({t}, {j}), Δ = {}", m.depth(), sys.delta);
        }
        let phi = m.to_arc();
        prop_assert!((phi.depth() - m.depth()).abs() < 1e-9);
    }

    #[test]
    fn input_norm_monotone_in_window(sys in timer(), seed in 0u64..1000, mut idx in prop::collection::vec(0.0..1.0f64, 4)) {
        let sol = sys.run(seed);
        let pts: Vec<(f64, i64)> = sol.u.forward_samples().map(|(_, _, t, j, _)| (t, j)).collect();
        idx.sort_by(f64::total_cmp);
        let at = |f: f64| {
            let (t, j) = pts[((pts.len() - 1) as f64 * f) as usize];
            HybridTime::new(t, j)
        };
        let (a, b, c, d) = (at(idx[0]), at(idx[1]), at(idx[2]), at(idx[3]));
        let inner = sup_norm_input(&sol.u, b, c).unwrap();
        let outer = sup_norm_input(&sol.u, a, d).unwrap();
        prop_assert!(inner <= outer, "{inner} > {outer}");
    }

    #[test]
    fn memory_distance_dominates_head(sys in timer(), seed in 0u64..1000, pick in 0.0..1.0f64) {
        let sol = sys.run(seed);
        let pts = forward_points(&sol);
        let (t, j) = pts[((pts.len() - 1) as f64 * pick) as usize];
        let phi = memory_operator(&sol.x, t, j, sys.delta).unwrap();
        let w = |z: &[f64]| z[0].abs();
        prop_assert!(memory_sup_distance(&phi, sys.delta, w) >= w(phi.head()));
    }

    #[test]
    fn simulation_is_deterministic(sys in timer(), seed in 0u64..1000) {
        let a = sys.run(seed);
        let b = sys.run(seed);
        prop_assert_eq!(&a.x, &b.x);
        prop_assert_eq!(&a.u, &b.u);
        prop_assert_eq!(&a.events, &b.events);
        prop_assert_eq!(arc_to_csv_string(&a.x, true).unwrap(), arc_to_csv_string(&b.x, true).unwrap());
    }

    #[test]
    fn solutions_pass_the_audit(sys in timer(), seed in 0u64..1000, flow_first in any::<bool>()) {
        let mut cfg = sys.cfg(seed);
        if flow_first {
            cfg.priority = Priority::FlowFirst;
        }
        let sol = simulate(&sys.system(), &sys.history(), &sys.input(), &cfg).unwrap();
        prop_assert!(sol.jumps().count() > 0);
        let issues = audit_solution(&sys.system(), &sol).unwrap();
        prop_assert!(issues.is_empty(), "{issues:?}");
        prop_assert!(validate_domain(sol.x.domain().segments()).is_ok());
        prop_assert_eq!(sol.x.domain().memory_part()[0].t_lo, -(sys.delta + sys.extra));
    }

    #[test]
    fn vbar_monotone_in_delta(sys in timer(), seed in 0u64..1000, pick in 0.0..1.0f64, d1 in 0.0..2.0f64, d2 in 0.0..2.0f64) {
        let sol = sys.run(seed);
        let pts = forward_points(&sol);
        let (t, j) = pts[((pts.len() - 1) as f64 * pick) as usize];
        let phi = memory_operator(&sol.x, t, j, sys.delta).unwrap();
        let v = |z: &[f64]| z[0] * z[0];
        let (lo, hi) = (d1.min(d2), d1.max(d2));
        prop_assert!(vbar(v, &phi, lo) <= vbar(v, &phi, hi));
    }

    #[test]
    fn vhat_dominates_v(sys in timer(), seed in 0u64..1000) {
        let sol = sys.run(seed);
        let v = |m: &Memory<'_>| m.now()[0].powi(2) + 0.1 * m.sup_over(|z| z[0].abs());
        let series = FunctionalSeries::new(&sol, v).unwrap();
        for k in 0..series.len() {
            prop_assert!(series.vhat(k) >= series.value(k));
        }
        for (t, j) in forward_points(&sol).into_iter().step_by(17) {
            let here = v(&sol.memory_at(t, j).unwrap());
            let hat = vhat(v, &sol, t, j).unwrap();
            prop_assert!(hat >= here);
            if t + j as f64 - sol.delta - 1.0 < -1e-12 {
                prop_assert_eq!(hat, here);
            }
        }
    }

    #[test]
    fn vbar_monotone_pass_implies_jump_subsequence(sys in timer(), seed in 0u64..1000) {
        let sol = sys.run(seed);
        let v = LyapunovState::new(|z: &[f64]| z[0] * z[0]);
        let rep = check_vbar_monotone(&v, &sol, sys.delta, 1e-9).unwrap();
        if rep.passed {
            let vf = |z: &[f64]| z[0] * z[0];
            let series = VbarSeries::new(&sol.x, vf);
            let mut at_jumps = Vec::new();
            for (p, i, t, j, _) in sol.x.forward_samples() {
                if sol.jumps().any(|e| e.t == t && e.j == j) {
                    at_jumps.push(series.at(&sol.x, p, i, sys.delta, vf).unwrap());
                }
            }
            for w in at_jumps.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
        }
    }
}

/// `V(x) = Σ c_i x_i² + d x_0⁴ + e x_0 x_1³` and its gradient.
fn poly(c: &[f64; 2], d: f64, e: f64) -> (impl Fn(&[f64]) -> f64, impl Fn(&[f64]) -> [f64; 2]) {
    let (c0, c1) = (c[0], c[1]);
    let v = move |x: &[f64]| c0 * x[0] * x[0] + c1 * x[1] * x[1] + d * x[0].powi(4) + e * x[0] * x[1].powi(3);
    let g = move |x: &[f64]| {
        [
            2.0 * c0 * x[0] + 4.0 * d * x[0].powi(3) + e * x[1].powi(3),
            2.0 * c1 * x[1] + 3.0 * e * x[0] * x[1] * x[1],
        ]
    };
    (v, g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn directional_derivative_matches_gradient(
        c in prop::array::uniform2(-2.0..2.0f64),
        d in -1.0..1.0f64,
        e in -1.0..1.0f64,
        x in prop::array::uniform2(-10.0..10.0f64),
        f in prop::array::uniform2(-1.0..1.0f64),
    ) {
        let (v, g) = poly(&c, d, e);
        let grad = g(&x);
        let exact = grad[0] * f[0] + grad[1] * f[1];
        let got = directional_deriv(&v, &x, &f).unwrap();
        let scale = (grad[0].powi(2) + grad[1].powi(2)).sqrt() * (f[0].hypot(f[1])) + 1.0;
        prop_assert!((got - exact).abs() <= 1e-4 * scale, "{got} vs {exact}");
    }

    #[test]
    fn lambda_bar_brackets_root(l1 in 0.01..5.0f64, frac in 0.0..0.99f64, delta in 0.0..3.0f64) {
        let l2 = frac * l1;
        let lam = solve_lambda_bar(l1, l2, delta).unwrap();
        prop_assert!(lam > 0.0 && lam <= l1);
        if l2 > 0.0 {
            prop_assert!(lambda_bar_residual(lam - 1e-8, l1, l2, delta) < 0.0);
            prop_assert!(lambda_bar_residual(lam + 1e-8, l1, l2, delta) > 0.0);
        }
    }

    #[test]
    fn dwell_margins_monotone(l1 in 0.01..5.0f64, eps in 0.01..2.0f64, mu_up in 1.0..5.0f64, mu_dn in 0.01..0.98f64, step in 0.001..0.5f64) {
        let adt = adt_margin(l1, mu_up, eps).unwrap();
        prop_assert!(adt_margin(l1 + step, mu_up, eps).unwrap() > adt);
        prop_assert!(adt_margin(l1, mu_up, eps + step).unwrap() > adt);
        prop_assert!(adt_margin(l1, mu_up + step, eps).unwrap() < adt);
        let radt = radt_margin(l1, mu_dn, eps).unwrap();
        prop_assert!(radt_margin(l1 + step, mu_dn, eps).unwrap() > radt);
        prop_assert!(radt_margin(l1, mu_dn, eps + step).unwrap() > radt);
        let mu2 = (mu_dn + step).min(0.999);
        if mu2 > mu_dn {
            prop_assert!(radt_margin(l1, mu2, eps).unwrap() > radt);
        }
    }

    #[test]
    fn classification_scales_with_sigma(case in 1u8..=3, k in 0.05..20.0f64) {
        let p = example2_preset(case).unwrap();
        let mut q = p.clone();
        for m in q.modes.iter_mut() {
            m.sigma *= k;
            m.mu *= k;
        }
        let a = classify_example2(&p, 1.0).unwrap();
        let b = classify_example2(&q, 1.0).unwrap();
        for (ma, mb) in a.modes.iter().zip(&b.modes) {
            prop_assert!((mb.big_lambda - k * ma.big_lambda).abs() <= 1e-9 * (1.0 + (k * ma.big_lambda).abs()));
            prop_assert!((mb.omega - k * ma.omega).abs() <= 1e-9 * (1.0 + (k * ma.omega).abs()));
            prop_assert_eq!(ma.d2, mb.d2);
            prop_assert_eq!(ma.big_lambda > 0.0, mb.big_lambda > 0.0);
            prop_assert_eq!(ma.omega < 0.0, mb.omega < 0.0);
            prop_assert_eq!(ma.omega >= 0.0, mb.omega >= 0.0);
            prop_assert_eq!(ma.omega < -ma.big_lambda, mb.omega < -mb.big_lambda);
        }
    }

    #[test]
    fn exit_code_is_total(
        rows in prop::collection::vec((any::<bool>(), any::<bool>(), prop::option::of(0usize..3), 0usize..50), 0..6),
        term in prop::sample::select(vec![EventKind::Horizon, EventKind::DeadEnd, EventKind::Zeno, EventKind::FlowExit]),
        noise in any::<u64>(),
    ) {
        let make = |salt: u64| -> Vec<CheckReport> {
            rows.iter()
                .enumerate()
                .map(|(i, &(passed, vac, hits, n))| CheckReport {
                    variant: format!("v{}", salt.wrapping_add(i as u64)),
                    check: format!("c{salt}"),
                    passed,
                    samples_checked: n + salt as usize % 7,
                    trigger_hits: hits,
                    vacuous: passed && (vac || hits == Some(0)),
                    violations: if passed {
                        vec![]
                    } else {
                        vec![Violation { t: salt as f64, j: 0, cond: "c".into(), lhs: 1.0, rhs: 0.0, margin: -1.0 }]
                    },
                    tolerances: Tolerance::new(salt as f64 * 1e-9, 0.0),
                    worst_margin: None,
                    notes: vec![],
                    trace: vec![],
                })
                .collect()
        };
        let a = exit_code(term, &make(0));
        let b = exit_code(term, &make(noise % 1000));
        prop_assert_eq!(a, b);
        let reports = make(0);
        let expect = if reports.iter().any(|r| !r.passed) {
            Verdict::Violations
        } else if term == EventKind::Zeno {
            Verdict::Zeno
        } else {
            let gated: Vec<&CheckReport> = reports.iter().filter(|r| r.trigger_hits.is_some()).collect();
            if !gated.is_empty() && gated.iter().all(|r| r.vacuous) {
                Verdict::Vacuous
            } else {
                Verdict::Pass
            }
        };
        prop_assert_eq!(a, expect);
        prop_assert_eq!(a.code(), match expect {
            Verdict::Pass => 0,
            Verdict::Violations => 1,
            Verdict::Zeno => 3,
            Verdict::Vacuous => 4,
        });
    }
}

fn scalar_config(a: f64, lambda1: f64, tol: f64) -> ScenarioConfig {
    let text = format!(
        r#"{{
  "name": "prop",
  "system": {{ "preset": "scalar-linear", "a": {a:?} }},
  "sim": {{ "h": 0.01, "horizon_t": 1.5 }},
  "initial": {{ "type": "constant", "value": [1.0] }},
  "certificate": {{
    "variant": "ThmB",
    "v": {{ "type": "quadratic", "weights": [1.0] }},
    "alpha1": {{ "type": "power", "p": 2 }},
    "alpha2": {{ "type": "power", "p": 2 }},
    "decrease": {{ "type": "power", "p": 2 }},
    "gamma1": {{ "type": "linear", "k": 0.5 }},
    "gamma2": {{ "type": "power", "p": 2 }},
    "tolerance": {{ "abs": {tol:?}, "rel": 0.0 }},
    "derivative_tolerance": {{ "abs": {tol:?}, "rel": 0.0 }},
    "vbar_tol": {tol:?}
  }},
  "envelopes": [
    {{ "type": "decay", "mu": 1.0, "lambda1": {lambda1:?}, "alpha2": {{ "type": "power", "p": 2 }}, "tol": {tol:?} }}
  ]
}}"#
    );
    ScenarioConfig::from_json(&text).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decay_violations_recompute(a in -2.0..0.5f64, lambda1 in 0.5..4.0f64, tol in 1e-9..1e-2f64) {
        let out = run_scenario(&scalar_config(a, lambda1, tol), Path::new("."), true).unwrap();
        let rep = out.reports.iter().find(|r| r.check == "decay bound").unwrap();
        let mut expected = 0;
        for (_, _, t, j, _) in out.solution.x.forward_samples() {
            let x = out.solution.x.eval(t, j).unwrap()[0];
            let (lhs, rhs) = (x * x, (-lambda1 * t).exp());
            let fails = lhs > rhs + tol * (1.0 + rhs.abs());
            expected += usize::from(fails);
            let row = rep.violations.iter().find(|v| v.t == t && v.j == j);
            prop_assert_eq!(fails, row.is_some(), "at ({}, {})", t, j);
            if let Some(v) = row {
                prop_assert!((v.lhs - lhs).abs() <= 1e-12 * (1.0 + lhs));
                prop_assert!((v.rhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
                prop_assert_eq!(v.margin, v.rhs - v.lhs);
            }
        }
        prop_assert_eq!(rep.violations.len(), expected);
        for r in &out.reports {
            for v in &r.violations {
                prop_assert!(!r.tolerances.allows(v.lhs, v.rhs) || v.lhs.is_nan() || v.rhs.is_nan()
                    || r.tolerances.abs == 0.0, "{}: {v:?}", r.check);
            }
        }
    }

    #[test]
    fn larger_tolerance_never_flips_a_pass(a in -2.0..0.5f64, lambda1 in 0.5..4.0f64, t1 in 1e-9..1e-3f64, k in 1.0..1e4f64) {
        let small = run_scenario(&scalar_config(a, lambda1, t1), Path::new("."), true).unwrap();
        let large = run_scenario(&scalar_config(a, lambda1, t1 * k), Path::new("."), true).unwrap();
        prop_assert_eq!(small.reports.len(), large.reports.len());
        for (s, l) in small.reports.iter().zip(&large.reports) {
            prop_assert_eq!(&s.check, &l.check);
            prop_assert!(l.violations.len() <= s.violations.len(), "{}", s.check);
            if s.passed {
                prop_assert!(l.passed, "{} passes at {} but not at {}", s.check, t1, t1 * k);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn example1_jump_from_transmission_zeroes_timer_term(seed in 0u64..10_000) {
        let p = Example1Params::default();
        let ex = build_example1(&p).unwrap();
        let phi0 = example1_history(&p, seed, 1.0).unwrap();
        let cfg = SimConfig { h: 1e-3, horizon_t: 0.3, horizon_j: 1000, ..SimConfig::default() };
        let sol = simulate(&ex.system, &phi0, &InputSignal::zero(1), &cfg).unwrap();
        let mut seen = 0;
        for ev in sol.jumps() {
            let pre = sol.x.eval(ev.t, ev.j).unwrap();
            if pre[4] > 0.5 {
                let post = sol.x.eval(ev.t, ev.j + 1).unwrap();
                prop_assert_eq!(example1_v(&post), post[0] * post[0]);
                prop_assert_eq!(post[0], pre[0]);
                seen += 1;
            }
        }
        prop_assert!(seen > 0);
    }
}

#[test]
fn example1_phi_decreasing_in_range() {
    let p = Example1Params::default();
    for l in 0..2u8 {
        let n = 4000;
        let mut prev = f64::INFINITY;
        for k in 0..=n {
            let tau = p.tau_mati * k as f64 / n as f64;
            let v = example1_phi(l, tau).unwrap();
            assert!(v < prev, "phi_{l} not decreasing at {tau}");
            assert!((0.5..=2.2).contains(&v), "phi_{l}({tau}) = {v}");
            prev = v;
        }
    }
}
