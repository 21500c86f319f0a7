use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use coded_inference::config::{parse_config, parse_gamma_grid, Overrides};
use coded_inference::latency::mc_latency_closed;
use coded_inference::montecarlo::{
    result_row, simulate as simulate_scheme, TrialSamples, RESULT_HEADER,
};
use coded_inference::optimizer::{candidate_table_csv, enumerate_candidates, optimize};
use coded_inference::oracle::verify::{Verifier, VerifyReport};
use coded_inference::placement::{cyclic_schedule, validate_hybrid};
use coded_inference::{
    Error, HybridParams, LatencyBreakdown, Schedule, SchemeSpec, SystemConfig, TrialReport,
};

use crate::args::{
    AnalyzeArgs, HybridArgs, OptimizeArgs, Scheme, SimulateArgs, SweepArgs, SystemArgs, VerifyArgs,
};
use crate::{CliError, Outcome};

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

struct Inputs {
    config: SystemConfig,
    grid: Vec<f64>,
    hybrid: Option<HybridParams>,
}

/// Validates the system parameters, the grid and the hybrid flags together so
/// that every problem is reported at once.
fn prepare(
    system: &SystemArgs,
    grid: Option<&str>,
    hybrid: &HybridArgs,
) -> Result<Inputs, CliError> {
    let text = system.config.as_deref().map(read_file).transpose()?;
    let overrides = Overrides {
        nodes: system.nodes,
        users: system.users,
        rows: system.rows,
        mu: system.mu,
        tau: system.tau,
        eta: system.eta,
        gamma: system.gamma,
        field_bits: system.field_bits,
    };
    let mut problems = Vec::new();
    let mut note = |e: Error| match CliError::from(e) {
        CliError::Config(p) => problems.extend(p),
        other => problems.push(other.to_string()),
    };

    let config = parse_config(text.as_deref(), &overrides)
        .map_err(&mut note)
        .ok();
    let grid = match grid {
        Some(g) => parse_gamma_grid(g).map_err(&mut note).ok(),
        None => config.as_ref().map(|c| vec![c.gamma()]),
    };
    let hybrid = match (hybrid.q, hybrid.mprime, hybrid.rho2) {
        (None, None, None) => Some(None),
        (Some(q), Some(mprime), Some(rho2)) => Some(Some(HybridParams::new(q, mprime, rho2))),
        _ => {
            problems.push("--q, --mprime and --rho2 must be given together".into());
            None
        }
    };
    if let (Some(c), Some(Some(p))) = (&config, &hybrid) {
        if let Err(v) = validate_hybrid(c, p) {
            problems.extend(v.iter().map(|v| format!("hybrid design {p}: {v}")));
        }
    }
    match (config, grid, hybrid) {
        (Some(config), Some(grid), Some(hybrid)) if problems.is_empty() => Ok(Inputs {
            config,
            grid,
            hybrid,
        }),
        _ => Err(CliError::Config(problems)),
    }
}

/// Report for a closed-form value: no trials, seed 0, zero-width interval.
fn closed_report(scheme: SchemeSpec, b: &LatencyBreakdown, gamma: f64) -> TrialReport {
    TrialReport {
        scheme,
        gamma,
        trials: 0,
        base_seed: 0,
        mean_delta_c: b.delta_c,
        mean_delta_d: b.delta_d,
        mean_delta: b.with_gamma(gamma).delta,
        ci95_delta: 0.0,
    }
}

/// Result CSV, header included.
pub fn results_csv(config: &SystemConfig, reports: &[TrialReport]) -> String {
    let mut out = String::from(RESULT_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&result_row(config, r));
        out.push('\n');
    }
    out
}

/// Hybrid design at each grid point: the fixed one, or the closed-form
/// optimum at that `γ`.
fn hybrid_designs(
    config: &SystemConfig,
    grid: &[f64],
    fixed: Option<HybridParams>,
) -> Result<Vec<HybridParams>, CliError> {
    grid.iter()
        .map(|&g| match fixed {
            Some(p) => Ok(p),
            None => Ok(optimize(&config.with_gamma(g)?)?.best.params),
        })
        .collect()
}

/// Reports ordered by `γ`, then by scheme as requested. All schemes share the
/// same straggler realisations. The MDS scheme uses its closed form when
/// `mc_closed` is set.
pub fn scheme_reports(
    config: &SystemConfig,
    schemes: &[Scheme],
    grid: &[f64],
    fixed: Option<HybridParams>,
    trials: usize,
    seed: u64,
    mc_closed: bool,
) -> Result<Vec<TrialReport>, CliError> {
    let mut schemes = schemes.to_vec();
    let mut seen = Vec::new();
    schemes.retain(|s| {
        let fresh = !seen.contains(s);
        seen.push(*s);
        fresh
    });

    let designs = if schemes.contains(&Scheme::Hs) {
        hybrid_designs(config, grid, fixed)?
    } else {
        Vec::new()
    };
    let mut runs: BTreeMap<HybridParams, TrialSamples> = BTreeMap::new();
    for p in &designs {
        if !runs.contains_key(p) {
            runs.insert(
                *p,
                simulate_scheme(config, &SchemeSpec::Hybrid(*p), trials, seed)?,
            );
        }
    }
    let uc = if schemes.contains(&Scheme::Uc) {
        Some(simulate_scheme(config, &SchemeSpec::Uncoded, trials, seed)?)
    } else {
        None
    };
    let mc = if schemes.contains(&Scheme::Mc) && !mc_closed {
        Some(simulate_scheme(config, &SchemeSpec::Mds, trials, seed)?)
    } else {
        None
    };
    let mc_form = mc_latency_closed(config);

    let mut reports = Vec::with_capacity(grid.len() * schemes.len());
    for (i, &gamma) in grid.iter().enumerate() {
        for s in &schemes {
            reports.push(match s {
                Scheme::Uc => uc.as_ref().expect("simulated above").report(gamma),
                Scheme::Mc => match &mc {
                    Some(samples) => samples.report(gamma),
                    None => closed_report(SchemeSpec::Mds, &mc_form, gamma),
                },
                Scheme::Hs => runs[&designs[i]].report(gamma),
            });
        }
    }
    Ok(reports)
}

pub fn analyze(a: &AnalyzeArgs) -> Result<Outcome, CliError> {
    let Inputs { config, grid, .. } =
        prepare(&a.system, a.gamma_grid.as_deref(), &HybridArgs::default())?;
    let mc = mc_latency_closed(&config);
    let mut summary = vec![format!(
        "mc closed form: delta = {:.3} + {} * gamma",
        mc.delta_c, mc.delta_d
    )];
    let mut reports = Vec::new();
    for &gamma in &grid {
        reports.push(closed_report(SchemeSpec::Mds, &mc, gamma));
        match optimize(&config.with_gamma(gamma)?) {
            Ok(opt) => {
                let b = &opt.best;
                summary.push(format!(
                    "hs optimum at gamma={gamma}: {} rho1={} delta_C={:.3} delta_D={} delta={:.3}",
                    b.params, b.rho1, b.breakdown.delta_c, b.breakdown.delta_d, b.breakdown.delta
                ));
                reports.push(closed_report(
                    SchemeSpec::Hybrid(b.params),
                    &b.breakdown,
                    gamma,
                ));
            }
            Err(Error::NoCandidates) => {
                summary.push(format!("hs: no valid design at gamma={gamma}"))
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Outcome {
        output: results_csv(&config, &reports),
        summary,
        failed: false,
    })
}

pub fn simulate(a: &SimulateArgs) -> Result<Outcome, CliError> {
    let Inputs {
        config,
        grid,
        hybrid,
    } = prepare(&a.system, a.gamma_grid.as_deref(), &a.hybrid)?;
    let reports = scheme_reports(&config, &a.scheme, &grid, hybrid, a.trials, a.seed, false)?;
    Ok(Outcome {
        output: results_csv(&config, &reports),
        summary: vec![format!(
            "{} rows, {} trials each, seed {}",
            reports.len(),
            a.trials,
            a.seed
        )],
        failed: false,
    })
}

pub fn optimize_hybrid(a: &OptimizeArgs) -> Result<Outcome, CliError> {
    let Inputs { config, .. } = prepare(&a.system, None, &HybridArgs::default())?;
    let opt = optimize(&config)?;
    let b = &opt.best;
    let mut summary = vec![format!(
        "{} candidates; best at gamma={}: {} rho1={} b={} r_q={} delta_C={:.3} delta_D={} delta={:.3}",
        opt.table.len(),
        config.gamma(),
        b.params,
        b.rho1,
        b.b,
        b.r_q,
        b.breakdown.delta_c,
        b.breakdown.delta_d,
        b.breakdown.delta
    )];
    if b.stored_rows < b.storage_budget {
        summary.push(format!(
            "note: the best design stores {} rows per node, below the budget of {}; the compute term uses the stored count",
            b.stored_rows, b.storage_budget
        ));
    }
    Ok(Outcome {
        output: candidate_table_csv(&opt.table),
        summary,
        failed: false,
    })
}

/// Where two latency curves swap order.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossover {
    pub lower_before: &'static str,
    pub lower_after: &'static str,
    pub gamma: f64,
    /// False when the crossing lies beyond the swept grid.
    pub on_grid: bool,
}

/// Pairwise crossovers between the schemes in `reports`, as produced by
/// [`scheme_reports`]. Curves with constant `(δ_C, δ_D)` are straight lines
/// in `γ` and are intersected exactly, also beyond the grid. Other pairs are
/// located by sign changes between neighbouring grid points.
pub fn crossovers(reports: &[TrialReport]) -> Vec<Crossover> {
    let mut series: Vec<(&'static str, Vec<&TrialReport>)> = Vec::new();
    for r in reports {
        let label = r.scheme.label();
        match series.iter_mut().find(|(l, _)| *l == label) {
            Some((_, v)) => v.push(r),
            None => series.push((label, vec![r])),
        }
    }
    let straight = |v: &[&TrialReport]| {
        v.windows(2).all(|w| {
            w[0].mean_delta_c == w[1].mean_delta_c && w[0].mean_delta_d == w[1].mean_delta_d
        })
    };

    let mut out = Vec::new();
    for (i, (la, a)) in series.iter().enumerate() {
        for (lb, b) in &series[i + 1..] {
            if a.len() != b.len() {
                continue;
            }
            let (lo, hi) = (a[0].gamma, a[a.len() - 1].gamma);
            if straight(a) && straight(b) {
                let (ca, da) = (a[0].mean_delta_c, a[0].mean_delta_d);
                let (cb, db) = (b[0].mean_delta_c, b[0].mean_delta_d);
                if da == db {
                    continue;
                }
                let gamma = (cb - ca) / (da - db);
                if gamma > 0.0 {
                    // the steeper curve is the lower one before the crossing
                    let (lower_before, lower_after) = if da > db { (*la, *lb) } else { (*lb, *la) };
                    out.push(Crossover {
                        lower_before,
                        lower_after,
                        gamma,
                        on_grid: (lo..=hi).contains(&gamma),
                    });
                }
                continue;
            }
            for k in 0..a.len() - 1 {
                let d0 = a[k].mean_delta - b[k].mean_delta;
                let d1 = a[k + 1].mean_delta - b[k + 1].mean_delta;
                if d0 != 0.0 && d1 != 0.0 && d0.signum() != d1.signum() {
                    let (g0, g1) = (a[k].gamma, a[k + 1].gamma);
                    let (lower_before, lower_after) =
                        if d0 < 0.0 { (*la, *lb) } else { (*lb, *la) };
                    out.push(Crossover {
                        lower_before,
                        lower_after,
                        gamma: g0 + (g1 - g0) * d0 / (d0 - d1),
                        on_grid: true,
                    });
                }
            }
        }
    }
    out
}

pub fn sweep(a: &SweepArgs) -> Result<Outcome, CliError> {
    let Inputs {
        config,
        grid,
        hybrid,
    } = prepare(&a.system, Some(&a.gamma_grid), &a.hybrid)?;
    let reports = scheme_reports(
        &config,
        &a.scheme,
        &grid,
        hybrid,
        a.trials,
        a.seed,
        !a.simulate_mc,
    )?;
    let mut summary = vec![format!(
        "{} gamma points, {} trials, seed {}, eta {}",
        grid.len(),
        a.trials,
        a.seed,
        config.eta()
    )];
    let found = crossovers(&reports);
    if found.is_empty() {
        summary.push("no crossovers: the scheme ordering never changes".into());
    }
    for c in found {
        summary.push(format!(
            "crossover at gamma ~ {:.4}{}: {} lower before, {} lower after",
            c.gamma,
            if c.on_grid { "" } else { " (beyond the grid)" },
            c.lower_before,
            c.lower_after
        ));
    }
    Ok(Outcome {
        output: results_csv(&config, &reports),
        summary,
        failed: false,
    })
}

fn render(report: &VerifyReport, label: &str, out: &mut String) {
    writeln!(out, "{label}: {}/{} passed", report.passed, report.total).expect("String write");
    for f in &report.failures {
        let seed = f.seed.map_or_else(
            || "-".to_string(),
            |(base, trial)| format!("{base}/{trial}"),
        );
        writeln!(
            out,
            "  FAIL scheme={} case={:?} seed={seed} computed={:?}: {}",
            report.scheme, f.case, f.computed, f.reason
        )
        .expect("String write");
    }
}

pub fn verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let Inputs { config, hybrid, .. } = prepare(&a.system, None, &a.hybrid)?;
    let schedule = match &a.schedule {
        Some(path) => Some(Schedule::from_json(&read_file(path)?)?),
        None => None,
    };
    let verifier = Verifier::new(&config)?;
    let mut out = String::new();
    let mut reports = Vec::new();
    let mut done = Vec::new();
    for &s in &a.scheme {
        if done.contains(&s) {
            continue;
        }
        done.push(s);
        match s {
            Scheme::Uc => {
                let sched = schedule.clone().unwrap_or_else(|| cyclic_schedule(&config));
                let r = verifier.uncoded(&sched, a.samples, a.seed)?;
                render(&r, "uc minimal stopping sets", &mut out);
                reports.push(r);
            }
            Scheme::Mc => {
                let r = verifier.mds(a.samples, a.seed)?;
                render(&r, "mc fastest nodes", &mut out);
                reports.push(r);
                let r = verifier.mds_subsets()?;
                render(&r, "mc every finisher subset", &mut out);
                reports.push(r);
            }
            Scheme::Hs => {
                let designs = match hybrid {
                    Some(p) => vec![p],
                    None => enumerate_candidates(&config),
                };
                if designs.is_empty() {
                    writeln!(out, "hs: no valid design for this configuration")
                        .expect("String write");
                }
                for p in designs {
                    let r = verifier.hybrid(&p, a.samples, a.seed)?;
                    render(&r, &format!("hs {p} fastest nodes"), &mut out);
                    reports.push(r);
                    let r = verifier.hybrid_subsets(&p)?;
                    render(&r, &format!("hs {p} every finisher subset"), &mut out);
                    reports.push(r);
                }
            }
        }
    }
    let failed = reports.iter().any(|r| !r.all_passed());
    let passed: usize = reports.iter().map(|r| r.passed).sum();
    let total: usize = reports.iter().map(|r| r.total).sum();
    Ok(Outcome {
        output: out,
        summary: vec![format!(
            "{passed}/{total} checks passed{}",
            if failed { "; see FAIL lines" } else { "" }
        )],
        failed,
    })
}
