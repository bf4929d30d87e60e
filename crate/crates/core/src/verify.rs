//! Named verification suites that compare each closed form against its
//! independent numerical route.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::a_operator::{
    build_a, cross_norm_numeric_seeded, operator_norm_adaptive, operator_norm_numeric,
    partial_transpose, trace_power_numeric, AOperatorSpec, DEFAULT_RESTARTS,
};
use crate::channels::{
    apply_squeezer_report, average_fidelity_quadrature, filter_fidelity_exact, noiseless_filter_bound,
    squeezer_fidelity_pointwise, verify_mp_attenuated_equivalence, LAGUERRE_ORDER,
};
use crate::closed_forms::{
    cft, f_prob, f_squeeze_opt, f_squeeze_r, norm_a_closed, optimal_sigma_x, trace_power_closed,
};
use crate::error::{Error, Result};
use crate::fock::{coherent_state, FockDim};
use crate::montecarlo::{mc_cft, mc_squeezer};

/// Relative stopping tolerance of the cross-norm ascent.
const CROSS_TOL: f64 = 1e-10;

/// Seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ClosedForms,
    Squeezer,
    AOperator,
    Filters,
    MpEquivalence,
    Montecarlo,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = [
        "closed-forms",
        "squeezer",
        "a-operator",
        "filters",
        "mp-equivalence",
        "montecarlo",
        "all",
    ];

    fn name(self) -> &'static str {
        match self {
            Suite::ClosedForms => "closed-forms",
            Suite::Squeezer => "squeezer",
            Suite::AOperator => "a-operator",
            Suite::Filters => "filters",
            Suite::MpEquivalence => "mp-equivalence",
            Suite::Montecarlo => "montecarlo",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "closed-forms" => Suite::ClosedForms,
            "squeezer" => Suite::Squeezer,
            "a-operator" => Suite::AOperator,
            "filters" => Suite::Filters,
            "mp-equivalence" => Suite::MpEquivalence,
            "montecarlo" => Suite::Montecarlo,
            "all" => Suite::All,
            other => {
                return Err(format!(
                    "unknown suite '{other}', expected one of {}",
                    Suite::NAMES.join(", ")
                ))
            }
        })
    }
}

/// How `computed` is compared with `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// `|computed - target| <= tolerance`.
    Absolute,
    /// `|computed - target| <= tolerance * |target|`.
    Relative,
    /// `computed <= target + tolerance`.
    AtMost,
    /// `computed >= target - tolerance`.
    AtLeast,
    /// `|computed - target| <= tolerance` standard errors; `computed` is the mean.
    StdErrBands,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub check: String,
    pub target: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub kind: CheckKind,
    pub pass: bool,
    pub runtime_s: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Replaces the tolerance of every non-statistical check.
    pub tol: Option<f64>,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tol: None,
            seed: DEFAULT_SEED,
        }
    }
}

struct Recorder<'a> {
    suite: Suite,
    opts: &'a VerifyOptions,
    out: Vec<VerifyReport>,
}

impl Recorder<'_> {
    fn check<F>(&mut self, name: String, target: f64, tolerance: f64, kind: CheckKind, compute: F)
    where
        F: FnOnce() -> Result<(f64, String)>,
    {
        let tolerance = match (kind, self.opts.tol) {
            (CheckKind::StdErrBands, _) | (_, None) => tolerance,
            (_, Some(t)) => t,
        };
        let start = Instant::now();
        let outcome = compute();
        let runtime_s = start.elapsed().as_secs_f64();
        let (computed, detail, pass) = match outcome {
            Ok((computed, detail)) => {
                let pass = passes(kind, computed, target, tolerance, &detail);
                (computed, detail, pass)
            }
            Err(e) => (f64::NAN, format!("error: {e}"), false),
        };
        self.out.push(VerifyReport {
            suite: self.suite.to_string(),
            check: name,
            target,
            computed,
            tolerance,
            kind,
            pass,
            runtime_s,
            detail,
        });
    }
}

fn passes(kind: CheckKind, computed: f64, target: f64, tol: f64, detail: &str) -> bool {
    if !computed.is_finite() {
        return false;
    }
    match kind {
        CheckKind::Absolute => (computed - target).abs() <= tol,
        CheckKind::Relative => (computed - target).abs() <= tol * target.abs(),
        CheckKind::AtMost => computed <= target + tol,
        CheckKind::AtLeast => computed >= target - tol,
        CheckKind::StdErrBands => {
            let stderr: f64 = detail
                .strip_prefix("stderr=")
                .and_then(|s| s.split_whitespace().next())
                .and_then(|s| s.parse().ok())
                .unwrap_or(f64::NAN);
            let diff = (computed - target).abs();
            diff == 0.0 || diff <= tol * stderr
        }
    }
}

/// Run one suite (or all of them) and return one report per check.
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Vec<VerifyReport> {
    if suite == Suite::All {
        return [
            Suite::ClosedForms,
            Suite::Squeezer,
            Suite::AOperator,
            Suite::Filters,
            Suite::MpEquivalence,
            Suite::Montecarlo,
        ]
        .iter()
        .flat_map(|&s| run_suite(s, opts))
        .collect();
    }
    let mut rec = Recorder {
        suite,
        opts,
        out: Vec::new(),
    };
    match suite {
        Suite::ClosedForms => closed_forms_suite(&mut rec),
        Suite::Squeezer => squeezer_suite(&mut rec),
        Suite::AOperator => a_operator_suite(&mut rec),
        Suite::Filters => filters_suite(&mut rec),
        Suite::MpEquivalence => mp_suite(&mut rec),
        Suite::Montecarlo => montecarlo_suite(&mut rec),
        Suite::All => unreachable!(),
    }
    rec.out
}

fn plain(v: Result<f64>) -> Result<(f64, String)> {
    v.map(|v| (v, String::new()))
}

fn closed_forms_suite(rec: &mut Recorder<'_>) {
    use CheckKind::*;
    rec.check("cft(2,3)".into(), 0.5, 1e-12, Absolute, || plain(cft(2.0, 3.0)));
    rec.check("f_prob(2,3)".into(), 1.0, 1e-12, Absolute, || plain(f_prob(2.0, 3.0)));
    rec.check("f_squeeze_opt(2,3)".into(), 0.75, 1e-12, Absolute, || {
        plain(f_squeeze_opt(2.0, 3.0).map(|o| o.fidelity))
    });
    rec.check("cft(1,0)".into(), 0.5, 1e-12, Absolute, || plain(cft(1.0, 0.0)));

    for g in [1.5, 2.0, 4.0] {
        let lam: f64 = g - 1.0;
        rec.check(format!("f_det continuity at lambda=g-1, g={g}"), 0.0, 1e-9, Absolute, || {
            let lo = f_squeeze_opt(g, lam)?.fidelity;
            let hi = f_squeeze_opt(g, lam + 1e-10)?.fidelity;
            Ok(((lo - hi).abs(), String::new()))
        });
        let lam: f64 = g * g - 1.0;
        rec.check(format!("f_prob continuity at lambda=g^2-1, g={g}"), 0.0, 1e-9, Absolute, || {
            let lo = f_prob(g, lam)?;
            let hi = f_prob(g, lam + 1e-10)?;
            Ok(((lo - hi).abs(), String::new()))
        });
    }

    rec.check("ordering f_prob >= f_det >= cft on 20x20 grid".into(), 0.0, 0.0, Absolute, || {
        let mut violations = 0;
        for (g, lambda) in ordering_grid() {
            let (fp, fd, c) = (f_prob(g, lambda)?, f_squeeze_opt(g, lambda)?.fidelity, cft(g, lambda)?);
            if !(fp >= fd - 1e-15 && fd >= c - 1e-15) {
                violations += 1;
            }
        }
        Ok((violations as f64, "violations".into()))
    });

    for (g, lambda) in [(2.0, 1.0), (2.0, 3.0), (3.0, 2.0)] {
        rec.check(format!("norm at optimal x equals f_det, g={g} lambda={lambda}"), 0.0, 1e-12, Absolute, || {
            let x = optimal_sigma_x(g, lambda)?.x;
            let diff = norm_a_closed(g, lambda, x)? - f_squeeze_opt(g, lambda)?.fidelity;
            Ok((diff, format!("x={x}")))
        });
        rec.check(format!("norm at x=1/(lambda+1) equals f_prob, g={g} lambda={lambda}"), 0.0, 1e-12, Absolute, || {
            let diff = norm_a_closed(g, lambda, 1.0 / (lambda + 1.0))? - f_prob(g, lambda)?;
            Ok((diff, String::new()))
        });
    }

    rec.check("norm_gap decreasing over g in {2,4,8,16}".into(), 0.0, 0.0, Absolute, || {
        let gaps: Vec<f64> = [2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&g| Ok(f_prob(g, 3.0)? - cft(g, 3.0)?))
            .collect::<Result<_>>()?;
        let rises = gaps.windows(2).filter(|w| w[1] >= w[0]).count();
        Ok((rises as f64, format!("gaps={gaps:?}")))
    });
}

/// `g ∈ [1, 10]`, `λ ∈ [0, 10]`, 20 points each.
pub fn ordering_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(400);
    for i in 0..20 {
        for j in 0..20 {
            out.push((1.0 + 9.0 * i as f64 / 19.0, 10.0 * j as f64 / 19.0));
        }
    }
    out
}

fn squeezer_suite(rec: &mut Recorder<'_>) {
    use CheckKind::*;
    for g in [1.5, 2.0, 3.0] {
        for lambda in [0.5, 1.0, 2.0, 3.0, 5.0] {
            let r_opt = f_squeeze_opt(g, lambda).map(|o| o.r_opt).unwrap_or(0.0);
            for (label, r) in [("0", 0.0), ("0.3", 0.3), ("opt", r_opt)] {
                let target = f_squeeze_r(g, lambda, r).unwrap_or(f64::NAN);
                rec.check(
                    format!("quadrature vs formula g={g} lambda={lambda} r={label}"),
                    target,
                    1e-10,
                    Absolute,
                    || {
                        let q = average_fidelity_quadrature(
                            |u| {
                                squeezer_fidelity_pointwise(g, r, Complex64::from(u.sqrt()))
                                    .unwrap_or(f64::NAN)
                            },
                            lambda,
                            LAGUERRE_ORDER,
                        )?;
                        Ok((q.value, format!("doubling estimate {:.2e}", q.error_estimate)))
                    },
                );
            }
        }
    }
    let dim = FockDim::new(60).expect("positive");
    for cosh_r in [1.0f64, 1.5, 2.0] {
        let r = cosh_r.acosh();
        for amp in [0.0, 0.6, 1.2] {
            let alpha = Complex64::from_polar(amp, 0.7);
            let g = 2.0;
            let target = squeezer_fidelity_pointwise(g, r, alpha).unwrap_or(f64::NAN);
            rec.check(
                format!("simulated squeezer cosh r={cosh_r} |alpha|={amp}"),
                target,
                1e-6,
                Absolute,
                || {
                    let rho = coherent_state(alpha, dim).projector();
                    let sim = apply_squeezer_report(&rho, r, dim, f64::INFINITY)?;
                    let f = sim.state.expectation(&coherent_state(alpha * g, dim))?.re;
                    Ok((f, format!("edge population {:.1e}", sim.deficit)))
                },
            );
        }
    }
}

fn a_operator_suite(rec: &mut Recorder<'_>) {
    use CheckKind::*;
    let tol = rec.opts.tol.unwrap_or(1e-3);
    for (g, lambda) in [(2.0, 1.0), (2.0, 3.0), (3.0, 2.0)] {
        let x = optimal_sigma_x(g, lambda).map(|o| o.x).unwrap_or(f64::NAN);
        let target = norm_a_closed(g, lambda, x).unwrap_or(f64::NAN);
        rec.check(format!("adaptive norm g={g} lambda={lambda}"), target, 1e-3, Relative, || {
            let n = operator_norm_adaptive(g, lambda, x, tol)?;
            Ok((n.value, format!("dim={} warning={}", n.dim, n.truncation_warning)))
        });
    }
    let (g, lambda, x) = (2.0, 3.0, 1.0 / 3.0);
    for p in 1..=5u32 {
        let target = trace_power_closed(p, g, lambda, x).unwrap_or(f64::NAN);
        rec.check(format!("Tr A^{p} at (2,3,1/3)"), target, 1e-6, Relative, || {
            let spec = AOperatorSpec::new(g, lambda, x, 80, 80)?;
            Ok((trace_power_numeric(&spec, p)?, "dims=80".into()))
        });
    }
    let seed = rec.opts.seed;
    for transposed in [false, true] {
        let label = if transposed { "A^T2" } else { "A" };
        let mut cached: Option<(f64, f64)> = None;
        rec.check(format!("cross norm of {label} at (2,3,1/4)"), 0.5, 2e-3, Absolute, || {
            let spec = AOperatorSpec::new(2.0, 3.0, 0.25, 30, 30)?;
            let a = build_a(&spec);
            let a = if transposed { partial_transpose(&a) } else { a };
            let c = cross_norm_numeric_seeded(&a, DEFAULT_RESTARTS, CROSS_TOL, seed)?;
            let norm = operator_norm_numeric(&spec, 1e-13)?;
            cached = Some((c.value, norm));
            Ok((c.value, format!("restarts={} dims=30 lower bound", c.restarts_used)))
        });
        rec.check(format!("cross norm of {label} below operator norm"), 0.0, 1e-10, AtMost, || match cached {
            Some((value, norm)) => Ok((value - norm, format!("norm={norm}"))),
            None => Err(Error::DivergentIntegral("cross norm unavailable")),
        });
    }
}

fn filters_suite(rec: &mut Recorder<'_>) {
    use CheckKind::*;
    rec.check("bound 1-F(N) <= 2(g^2/(lambda+1))^(N+1), N<=25".into(), 0.0, 0.0, Absolute, || {
        let mut violations = 0;
        for n in 0..=25 {
            let f = filter_fidelity_exact(2.0, 5.0, 2.0, n)?.conditional_fidelity;
            if f < noiseless_filter_bound(2.0, 5.0, n) {
                violations += 1;
            }
        }
        Ok((violations as f64, "violations".into()))
    });
    rec.check("F(25) at (2,5,x=2)".into(), 1.0 - 1e-3, 0.0, AtLeast, || {
        plain(filter_fidelity_exact(2.0, 5.0, 2.0, 25).map(|f| f.conditional_fidelity))
    });
    rec.check("F(40) at (2,2,x=1.5)".into(), 0.75, 1e-4, Absolute, || {
        plain(filter_fidelity_exact(2.0, 2.0, 1.5, 40).map(|f| f.conditional_fidelity))
    });
    for (g, lambda, x) in [(2.0, 3.0, 0.5), (2.0, 5.0, 2.0), (3.0, 1.0, 1.3)] {
        let target = cft(g, lambda).unwrap_or(f64::NAN);
        rec.check(format!("F(0) equals cft, g={g} lambda={lambda} x={x}"), target, 1e-12, Absolute, || {
            plain(filter_fidelity_exact(g, lambda, x, 0).map(|f| f.conditional_fidelity))
        });
    }
}

fn mp_suite(rec: &mut Recorder<'_>) {
    let dims = FockDim::new(50).expect("positive");
    for (g, lambda, beta) in [(2.0, 1.0, 0.0), (2.0, 0.0, 0.5), (2.0, 1.0, 0.8)] {
        rec.check(
            format!("measure-prepare vs attenuated amplifier g={g} lambda={lambda} beta={beta}"),
            0.0,
            1e-3,
            CheckKind::Absolute,
            || plain(verify_mp_attenuated_equivalence(g, lambda, Complex64::from(beta), dims)),
        );
    }
}

fn montecarlo_suite(rec: &mut Recorder<'_>) {
    use CheckKind::*;
    let seed = rec.opts.seed;
    let n = 1_000_000;
    let cases: [(&str, f64, Box<dyn FnOnce() -> Result<crate::montecarlo::Estimate>>); 3] = [
        ("mc_cft(2,3)", 0.5, Box::new(move || mc_cft(2.0, 3.0, n, seed))),
        (
            "mc_squeezer(2,3,r=0)",
            0.75,
            Box::new(move || mc_squeezer(2.0, 3.0, 0.0, n, seed)),
        ),
        (
            "mc_squeezer(2,0.5,r_opt)",
            0.375,
            Box::new(move || mc_squeezer(2.0, 0.5, (4.0f64 / 3.0).acosh(), n, seed)),
        ),
    ];
    for (name, target, run) in cases {
        let mut est = None;
        rec.check(name.into(), target, 4.0, StdErrBands, || {
            let e = run()?;
            est = Some(e);
            Ok((e.mean, format!("stderr={} n={} seed={}", e.stderr, e.n_samples, e.seed)))
        });
        rec.check(format!("{name} stderr"), 5e-4, 0.0, AtMost, || match est {
            Some(e) => Ok((e.stderr, String::new())),
            None => Err(Error::DivergentIntegral("estimate unavailable")),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().to_string(), name);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn closed_forms_suite_passes() {
        let r = run_suite(Suite::ClosedForms, &VerifyOptions::default());
        assert!(r.len() > 10);
        for rep in &r {
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn filters_suite_passes() {
        for rep in run_suite(Suite::Filters, &VerifyOptions::default()) {
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn tolerance_override_applies() {
        let opts = VerifyOptions {
            tol: Some(0.0),
            seed: 1,
        };
        let r = run_suite(Suite::ClosedForms, &opts);
        assert!(r.iter().all(|rep| rep.tolerance == 0.0));
    }

    #[test]
    fn pass_rules() {
        assert!(passes(CheckKind::Relative, 1.0005, 1.0, 1e-3, ""));
        assert!(!passes(CheckKind::Relative, 1.002, 1.0, 1e-3, ""));
        assert!(passes(CheckKind::AtMost, 0.5, 0.5, 0.0, ""));
        assert!(!passes(CheckKind::AtLeast, 0.4, 0.5, 0.0, ""));
        assert!(passes(CheckKind::StdErrBands, 0.501, 0.5, 4.0, "stderr=0.001"));
        assert!(!passes(CheckKind::StdErrBands, 0.51, 0.5, 4.0, "stderr=0.001"));
        assert!(!passes(CheckKind::Absolute, f64::NAN, 0.0, 1.0, ""));
    }
}
