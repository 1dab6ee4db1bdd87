use cachepir::bounds::{corner_points, outer_curve, worst_case_gap, Bounds};
use cachepir::plan::plan_corner;
use cachepir::sim::{run_session, SessionReport};
use cachepir::verify::{
    verify_consumption, verify_no_local_leak, verify_reliability, verify_statistical_privacy,
    verify_structural_privacy, DbDetail, Mode, PrivacyReport, StatisticalOptions, View,
};
use cachepir::{PirParams, Rational};
use serde_json::{json, Value};

use crate::output::{parts, OutputSpec, Rendered};
use crate::{CliError, VerifyMode, ViewArg};

fn grid(points: u32) -> Result<Vec<Rational>, CliError> {
    if points < 2 {
        return Err(CliError::Usage(format!("--points must be at least 2, got {points}")));
    }
    let d = points as i64 - 1;
    Ok((0..=d).map(|j| Rational::new(j, d)).collect())
}

pub fn bounds(k: u32, n: u32, points: u32, ratios: Option<Vec<Rational>>, out: &OutputSpec) -> Result<(), CliError> {
    let b = Bounds::new(k, n)?;
    let mut xs = match ratios {
        Some(rs) => rs,
        None => {
            let mut xs = grid(points)?;
            xs.extend(b.breakpoints());
            xs
        }
    };
    xs.sort();
    xs.dedup();

    let mut rows = Vec::with_capacity(xs.len());
    let mut items = Vec::with_capacity(xs.len());
    for r in &xs {
        let outer = b.outer(r)?;
        let inner = b.inner(r)?;
        let gap = &outer - &inner;
        let fully = b.fully_known(r)?;
        let [rn, rd] = parts(r);
        rows.push(vec![rn, rd, out.decimal(&outer), out.decimal(&inner), out.decimal(&gap), out.decimal(&fully)]);
        items.push(json!({
            "r": r,
            "outer": outer,
            "inner": inner,
            "gap": gap,
            "fully_known": fully,
            "decimal": {
                "r": out.decimal(r),
                "outer": out.decimal(&outer),
                "inner": out.decimal(&inner),
                "gap": out.decimal(&gap),
                "fully_known": out.decimal(&fully),
            },
        }));
    }
    out.emit(Rendered {
        header: vec!["r_num", "r_den", "outer", "inner", "gap", "fully_known"],
        rows,
        json: json!({ "k": k, "n": n, "precision": out.precision, "rows": items }),
    })
}

pub fn corners(k: u32, n: u32, out: &OutputSpec) -> Result<(), CliError> {
    let pts = corner_points(k, n)?;
    let rows = pts
        .iter()
        .map(|p| {
            let [rn, rd] = parts(&p.ratio);
            let [cn, cd] = parts(&p.cost);
            vec![p.s.to_string(), rn, rd, cn, cd, p.message_length.to_string(), p.download_count.to_string()]
        })
        .collect();
    let items: Vec<Value> = pts
        .iter()
        .map(|p| {
            json!({
                "s": p.s,
                "r": p.ratio,
                "cost": p.cost,
                "message_length": p.message_length.to_string(),
                "download_count": p.download_count.to_string(),
            })
        })
        .collect();
    out.emit(Rendered {
        header: vec!["s", "r_num", "r_den", "cost_num", "cost_den", "message_length", "download_count"],
        rows,
        json: json!({ "k": k, "n": n, "corners": items }),
    })
}

pub fn gap(n: u32, max_messages: u32, out: &OutputSpec) -> Result<(), CliError> {
    if max_messages < 2 {
        return Err(CliError::Usage(format!("--max-messages must be at least 2, got {max_messages}")));
    }
    let mut rows = Vec::new();
    let mut items = Vec::new();
    let mut best: Option<(u32, Rational, Rational)> = None;
    for k in 2..=max_messages {
        let (g, r) = worst_case_gap(n, k)?;
        let [gn, gd] = parts(&g);
        let [rn, rd] = parts(&r);
        rows.push(vec![k.to_string(), gn, gd, rn, rd]);
        items.push(json!({ "k": k, "max_gap": g, "argmax_r": r, "max_gap_decimal": out.decimal(&g) }));
        if best.as_ref().is_none_or(|(_, bg, _)| &g > bg) {
            best = Some((k, g, r));
        }
    }
    let (bk, bg, br) = best.expect("at least one K");
    let [gn, gd] = parts(&bg);
    let [rn, rd] = parts(&br);
    rows.push(vec!["max".into(), gn, gd, rn, rd]);
    out.emit(Rendered {
        header: vec!["k", "max_gap_num", "max_gap_den", "argmax_r_num", "argmax_r_den"],
        rows,
        json: json!({
            "n": n,
            "rows": items,
            "max": { "k": bk, "max_gap": bg, "argmax_r": br, "max_gap_decimal": out.decimal(&bg) },
        }),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn simulate(
    k: u32,
    n: u32,
    corner: Option<u32>,
    ratio: Option<Rational>,
    target: u32,
    seed: u64,
    trials: u64,
    out: &OutputSpec,
) -> Result<(), CliError> {
    let params = match (corner, ratio) {
        (Some(s), _) => PirParams::with_corner(k, n, s)?,
        (None, Some(r)) => PirParams::with_ratio(k, n, r)?,
        (None, None) => return Err(CliError::Usage("one of --corner or --ratio is required".into())),
    };
    if trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let (resolved, _) = params.resolve()?;
    let r = resolved.caching_ratio.clone().expect("resolved");
    let expected = outer_curve(k, n)?.eval(&r)?;

    let reports: Vec<SessionReport> =
        (0..trials).map(|i| run_session(&params, target, seed.wrapping_add(i))).collect::<Result<_, _>>()?;
    let failures = reports.iter().filter(|s| !s.decode_ok || s.normalized_cost != expected).count();

    let rows = reports
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let [cn, cd] = parts(&s.normalized_cost);
            vec![
                i.to_string(),
                s.seed.to_string(),
                s.theta.to_string(),
                s.total_downloaded_bits.to_string(),
                cn,
                cd,
                out.decimal(&s.normalized_cost),
                s.decode_ok.to_string(),
            ]
        })
        .collect();
    let json = json!({
        "sessions": reports,
        "aggregate": {
            "trials": trials,
            "r": r,
            "expected_cost": expected,
            "decode_failures": reports.iter().filter(|s| !s.decode_ok).count(),
            "cost_mismatches": reports.iter().filter(|s| s.normalized_cost != expected).count(),
            "pass": failures == 0,
        },
    });
    out.emit(Rendered {
        header: vec!["trial", "seed", "theta", "downloaded", "cost_num", "cost_den", "cost", "decode_ok"],
        rows,
        json,
    })?;
    if failures > 0 {
        eprintln!("{failures} of {trials} sessions failed to decode or missed cost {expected}");
        return Err(CliError::Failed);
    }
    Ok(())
}

pub struct VerifyOpts {
    pub mode: VerifyMode,
    pub samples: u64,
    pub trials: u64,
    pub tv_threshold: f64,
    pub view: ViewArg,
    pub seed: u64,
}

/// Folds per-target reports into one, summing violations per database.
fn merge(mode: Mode, reports: Vec<PrivacyReport>) -> PrivacyReport {
    let mut details: Vec<DbDetail> = Vec::new();
    let mut notes = Vec::new();
    for rep in &reports {
        for d in &rep.details {
            match details.iter_mut().find(|x| x.database == d.database) {
                Some(x) => {
                    x.violations += d.violations;
                    x.pass &= d.pass;
                }
                None => details.push(d.clone()),
            }
        }
        notes.extend(rep.notes.iter().cloned());
    }
    PrivacyReport {
        mode,
        pass: reports.iter().all(|r| r.pass),
        details,
        tv_distance: None,
        samples: reports.iter().map(|r| r.samples).sum(),
        notes,
    }
}

pub fn verify(k: u32, n: u32, s: u32, opts: VerifyOpts, out: &OutputSpec) -> Result<(), CliError> {
    PirParams::with_corner(k, n, s)?;
    let per_target = |f: &dyn Fn(u32) -> Result<PrivacyReport, cachepir::Error>| -> Result<Vec<_>, CliError> {
        Ok((1..=k).map(f).collect::<Result<Vec<_>, _>>()?)
    };
    let report = match opts.mode {
        VerifyMode::Reliability => verify_reliability(k, n, s, opts.trials, opts.seed)?,
        VerifyMode::Leak => merge(
            Mode::Leak,
            per_target(&|theta| Ok(verify_no_local_leak(&plan_corner(k, n, s, theta, opts.seed)?)))?,
        ),
        VerifyMode::Consumption => merge(
            Mode::Consumption,
            per_target(&|theta| verify_consumption(&plan_corner(k, n, s, theta, opts.seed)?))?,
        ),
        VerifyMode::Structural => verify_structural_privacy(k, n, s)?,
        VerifyMode::Statistical => {
            if !(opts.tv_threshold > 0.0 && opts.tv_threshold < 1.0) {
                return Err(CliError::Usage(format!("--tv-threshold must lie in (0, 1), got {}", opts.tv_threshold)));
            }
            let view = match opts.view {
                ViewArg::Auto => View::Auto,
                ViewArg::Full => View::Full,
                ViewArg::Equation => View::Equation,
            };
            let options = StatisticalOptions { view, threshold: opts.tv_threshold, ..Default::default() };
            verify_statistical_privacy(k, n, s, opts.samples, None, opts.seed, options)?
        }
    };

    let fmt_tv = |tv: Option<f64>| tv.map(|v| format!("{v:.6}")).unwrap_or_default();
    let mut rows = vec![vec![
        report.mode.to_string(),
        "all".into(),
        report.pass.to_string(),
        report.details.iter().map(|d| d.violations).sum::<u64>().to_string(),
        fmt_tv(report.tv_distance),
        report.samples.to_string(),
    ]];
    for d in &report.details {
        rows.push(vec![
            report.mode.to_string(),
            d.database.to_string(),
            d.pass.to_string(),
            d.violations.to_string(),
            fmt_tv(d.tv_distance),
            String::new(),
        ]);
    }
    let json = serde_json::to_value(&report).map_err(|e| CliError::Io(e.to_string()))?;
    out.emit(Rendered {
        header: vec!["mode", "database", "pass", "violations", "tv_distance", "samples"],
        rows,
        json,
    })?;
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_both_ends() {
        let g = grid(5).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], Rational::zero());
        assert_eq!(g[4], Rational::one());
        assert!(grid(1).is_err());
    }

    #[test]
    fn merge_sums_violations() {
        let a = PrivacyReport {
            mode: Mode::Leak,
            pass: true,
            details: vec![DbDetail { database: 1, pass: true, violations: 0, tv_distance: None }],
            tv_distance: None,
            samples: 1,
            notes: vec![],
        };
        let mut b = a.clone();
        b.pass = false;
        b.details[0] = DbDetail { database: 1, pass: false, violations: 2, tv_distance: None };
        let m = merge(Mode::Leak, vec![a, b]);
        assert!(!m.pass);
        assert_eq!(m.details.len(), 1);
        assert_eq!(m.details[0].violations, 2);
        assert_eq!(m.samples, 2);
    }

    #[test]
    fn threshold_constant_is_used_by_default() {
        assert_eq!(StatisticalOptions::default().threshold, cachepir::verify::DEFAULT_TV_THRESHOLD);
    }
}
