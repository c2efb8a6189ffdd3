use std::io::{self, BufWriter, Write};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::json;

use adp_core::bounds::{betas_over_optima, rollout_myopic_improvement_with, verify_thm3_with, VerifyOptions};
use adp_core::control::{brute_force_optimal_within, evaluate_trajectory};
use adp_core::generate::{builtin_tiny, corpus_instance, gen_random_instance, CORPUS_REWARD_RANGE};
use adp_core::greedy::{brute_force_optima, verify_greedy_bounds, BoundStatus};
use adp_core::instance::load_instance_file;
use adp_core::report::{fmt_actions, CheckSummary, RunReport, SweepSummary, CSV_HEADER};
use adp_core::scheme::{BaseSpec, SchemeSpec};
use adp_core::{induced_f, run_adp, solve_exact_dp, ControlInstance, Error};

use crate::args::{Cli, Command, Format, SchemeArgs, SweepArgs};
use crate::{functions, Outcome};

struct Loaded {
    id: String,
    inst: ControlInstance,
    table: Option<Vec<Vec<Vec<f64>>>>,
}

fn load(name: &str) -> Result<Loaded> {
    if name.eq_ignore_ascii_case("tiny") {
        return Ok(Loaded { id: "TINY".into(), inst: builtin_tiny(), table: None });
    }
    let file = load_instance_file(name).with_context(|| format!("loading {name}"))?;
    let inst = file.to_instance()?;
    Ok(Loaded { id: file.id.clone().unwrap_or_else(|| name.to_string()), inst, table: file.vtg_table })
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let opts = VerifyOptions { budget: cli.budget, ..Default::default() };
    let outcome = match &cli.command {
        Command::Solve { instance } => solve(&mut out, cli.format, &load(instance)?, opts),
        Command::Adp(args) => adp(&mut out, cli.format, args, cli.seed),
        Command::Curvature { scheme, all_optima } => curvature(&mut out, cli.format, scheme, *all_optima, cli.seed, opts),
        Command::Verify(args) => verify(&mut out, cli.format, args, cli.seed, opts),
        Command::BoundsSweep(args) => sweep(&mut out, cli.format, args, opts),
        Command::Submodular { spec, horizon, cap } => submodular(&mut out, cli.format, spec, *horizon, *cap, cli.seed),
    }?;
    out.flush()?;
    Ok(outcome)
}

fn solve(out: &mut impl Write, format: Format, l: &Loaded, opts: VerifyOptions) -> Result<Outcome> {
    let table = solve_exact_dp(&l.inst);
    let (actions, value) = table.optimal_string(&l.inst);
    let oracle = match brute_force_optimal_within(&l.inst, opts.budget) {
        Ok(o) => Some(o),
        Err(Error::EnumerationBudgetExceeded { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let holds = oracle.as_ref().is_none_or(|(_, v)| *v == value);
    match format {
        Format::Json => {
            let oracle_json = oracle.as_ref().map(|(a, v)| json!({ "actions": a, "value": v }));
            writeln!(
                out,
                "{}",
                json!({ "instance_id": l.id, "optimal_actions": actions, "optimal_value": value, "oracle": oracle_json, "holds": holds })
            )?;
        }
        Format::Csv => {
            writeln!(out, "instance_id,optimal_actions,optimal_value,oracle_value,holds")?;
            let ov = oracle.as_ref().map(|(_, v)| v.to_string()).unwrap_or_else(|| "skipped".into());
            writeln!(out, "{},{},{},{},{}", l.id, fmt_actions(&actions).replace(',', " "), value, ov, holds)?;
        }
        Format::Text => {
            writeln!(out, "instance      {}", l.id)?;
            writeln!(out, "optimal       {actions} = {value}")?;
            match &oracle {
                Some((a, v)) => writeln!(out, "brute force   {a} = {v}  {}", if holds { "PASS" } else { "FAIL" })?,
                None => writeln!(out, "brute force   SKIPPED (enumeration budget exceeded)")?,
            }
        }
    }
    Ok(Outcome::from_holds(holds))
}

fn scheme_of(s: &str) -> Result<SchemeSpec> {
    s.parse::<SchemeSpec>().map_err(anyhow::Error::from)
}

fn adp(out: &mut impl Write, format: Format, args: &SchemeArgs, seed: u64) -> Result<Outcome> {
    let l = load(&args.instance)?;
    let spec = scheme_of(&args.scheme)?;
    let vtg = spec.build(&l.inst, l.table.as_deref(), seed)?;
    let trace = run_adp(&l.inst, &vtg);
    let traj = evaluate_trajectory(&l.inst, &trace.actions)?;
    match format {
        Format::Json => writeln!(
            out,
            "{}",
            json!({
                "instance_id": l.id,
                "scheme": spec.to_string(),
                "actions": trace.actions,
                "states": traj.states,
                "stage_rewards": traj.stage_rewards,
                "objective": trace.values,
                "ties": trace.ties,
                "value": traj.total,
            })
        )?,
        Format::Csv => {
            writeln!(out, "stage,state,action,reward,objective,ties")?;
            for k in 0..trace.len() {
                writeln!(out, "{},{},{},{},{},{}", k + 1, traj.states[k], trace.actions[k], traj.stage_rewards[k], trace.values[k], trace.ties[k])?;
            }
        }
        Format::Text => {
            writeln!(out, "instance {}  scheme {}", l.id, spec)?;
            writeln!(out, "{:>5} {:>5} {:>6} {:>12} {:>12} {:>4}", "stage", "state", "action", "reward", "objective", "ties")?;
            for k in 0..trace.len() {
                writeln!(
                    out,
                    "{:>5} {:>5} {:>6} {:>12} {:>12} {:>4}",
                    k + 1,
                    traj.states[k],
                    trace.actions[k],
                    traj.stage_rewards[k],
                    trace.values[k],
                    trace.ties[k]
                )?;
            }
            writeln!(out, "actions {}  value {}", trace.actions, traj.total)?;
        }
    }
    Ok(Outcome::Clean)
}

fn curvature(out: &mut impl Write, format: Format, args: &SchemeArgs, all_optima: bool, seed: u64, opts: VerifyOptions) -> Result<Outcome> {
    let l = load(&args.instance)?;
    let spec = scheme_of(&args.scheme)?;
    let vtg = spec.build(&l.inst, l.table.as_deref(), seed)?;
    let r = verify_thm3_with(&l.inst, &vtg, opts)?;
    let betas = if all_optima {
        let f = induced_f(&l.inst, &vtg);
        let (optima, _) = brute_force_optima(&f, l.inst.horizon(), opts.budget)?;
        Some(betas_over_optima(&f, &r.greedy, &optima)?)
    } else {
        None
    };
    match format {
        Format::Json => writeln!(
            out,
            "{}",
            json!({
                "instance_id": l.id,
                "scheme": spec.to_string(),
                "epsilons": r.epsilons,
                "etas": r.etas,
                "beta": r.beta,
                "shift": r.shift_applied,
                "betas_over_optima": betas,
            })
        )?,
        Format::Csv => {
            writeln!(out, "k,epsilon,eta")?;
            for k in 0..r.epsilons.len() {
                writeln!(out, "{k},{},{}", r.epsilons[k], r.etas[k])?;
            }
        }
        Format::Text => {
            writeln!(out, "instance {}  scheme {}", l.id, spec)?;
            writeln!(out, "{:>3} {:>22} {:>22}", "k", "epsilon", "eta")?;
            for k in 0..r.epsilons.len() {
                writeln!(out, "{k:>3} {:>22} {:>22}", r.epsilons[k], r.etas[k])?;
            }
            writeln!(out, "beta {}", r.beta)?;
            if r.shift_applied != 0.0 {
                writeln!(out, "shift {}", r.shift_applied)?;
            }
            if let Some(b) = &betas {
                writeln!(out, "beta over all optima {b:?}")?;
            }
        }
    }
    Ok(Outcome::Clean)
}

/// Runs every check for one scheme on one instance. Rollout of the myopic
/// policy also gets the improvement checks.
fn verify_run(id: &str, l: &Loaded, spec: &SchemeSpec, seed: u64, opts: VerifyOptions) -> Result<RunReport> {
    let vtg = spec.build(&l.inst, l.table.as_deref(), seed)?;
    let r = verify_thm3_with(&l.inst, &vtg, opts)?;
    let mut report = RunReport::new(id, spec.to_string(), &r);
    if matches!(spec, SchemeSpec::Rollout(BaseSpec::Myopic)) {
        let imp = rollout_myopic_improvement_with(&l.inst, opts)?;
        report.checks.extend(imp.checks.iter().map(CheckSummary::from));
    }
    Ok(report)
}

fn verify(out: &mut impl Write, format: Format, args: &SchemeArgs, seed: u64, opts: VerifyOptions) -> Result<Outcome> {
    let l = load(&args.instance)?;
    let spec = scheme_of(&args.scheme)?;
    let report = verify_run(&l.id, &l, &spec, seed, opts)?;
    match format {
        Format::Json => writeln!(out, "{}", report.to_json_line())?,
        Format::Csv => writeln!(out, "{CSV_HEADER}\n{}", report.csv_row())?,
        Format::Text => {
            write!(out, "{}", report.to_text())?;
            let bound = report.check("performance_bound").is_some_and(|c| c.holds);
            writeln!(out, "bound {}", if bound { "holds" } else { "VIOLATED" })?;
        }
    }
    Ok(Outcome::from_holds(report.holds()))
}

fn sweep(out: &mut impl Write, format: Format, args: &SweepArgs, opts: VerifyOptions) -> Result<Outcome> {
    let specs: Vec<SchemeSpec> = args.schemes.iter().map(|s| scheme_of(s)).collect::<Result<_>>()?;
    let fixed = match (args.states, args.actions, args.horizon) {
        (Some(s), Some(a), Some(k)) => Some((s, a, k)),
        (None, None, None) => None,
        _ => bail!("give all of --states, --actions and --horizon, or none"),
    };
    if let Some((s, a, k)) = fixed {
        gen_random_instance(0, s, a, k, CORPUS_REWARD_RANGE)?;
    }

    let results: Vec<(u64, Vec<Result<RunReport, String>>)> = args
        .seeds
        .clone()
        .into_par_iter()
        .map(|seed| {
            let inst = match fixed {
                Some((s, a, k)) => gen_random_instance(seed, s, a, k, CORPUS_REWARD_RANGE).expect("checked above"),
                None => corpus_instance(seed),
            };
            let l = Loaded { id: format!("seed{seed}"), inst, table: None };
            let runs = specs.iter().map(|spec| verify_run(&l.id, &l, spec, seed, opts).map_err(|e| format!("{spec}: {e:#}"))).collect();
            (seed, runs)
        })
        .collect();

    let mut summary = SweepSummary::default();
    if format == Format::Csv {
        writeln!(out, "{CSV_HEADER}")?;
    }
    for (seed, runs) in &results {
        for run in runs {
            match run {
                Ok(report) => {
                    summary.add(report);
                    match format {
                        Format::Json => writeln!(out, "{}", report.to_json_line())?,
                        Format::Csv => writeln!(out, "{}", report.csv_row())?,
                        Format::Text => {}
                    }
                }
                Err(e) => {
                    summary.errors += 1;
                    eprintln!("seed {seed}: {e}");
                }
            }
        }
    }
    match format {
        Format::Json => writeln!(out, "{}", json!({ "summary": summary }))?,
        Format::Csv => {}
        Format::Text => {
            writeln!(out, "{} instances, seeds {}..{}", results.len(), args.seeds.start, args.seeds.end)?;
            write!(out, "{}", summary.to_text())?;
            writeln!(out, "bound violations: {}", summary.bound_violations())?;
        }
    }
    Ok(Outcome::from_holds(summary.failed_runs() == 0 && summary.errors == 0))
}

fn submodular(out: &mut impl Write, format: Format, spec: &str, horizon: usize, cap: usize, seed: u64) -> Result<Outcome> {
    if horizon == 0 {
        bail!("--horizon must be at least 1");
    }
    let f = functions::build(spec, 2 * horizon.max(cap + 1), seed)?;
    let cert = verify_greedy_bounds(&f, horizon, cap)?;
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(&cert)?)?,
        Format::Csv => {
            writeln!(out, "bound,status,floor,margin")?;
            for b in &cert.bounds {
                match &b.status {
                    BoundStatus::Holds { floor, margin } => writeln!(out, "{},holds,{floor},{margin}", b.name)?,
                    BoundStatus::Violated { floor, margin } => writeln!(out, "{},violated,{floor},{margin}", b.name)?,
                    BoundStatus::NotApplicable { .. } => writeln!(out, "{},not_applicable,,", b.name)?,
                }
            }
        }
        Format::Text => {
            let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| v.to_string());
            writeln!(out, "function      {}", f.name())?;
            writeln!(out, "greedy        {} = {}", cert.greedy.actions, cert.greedy_value)?;
            writeln!(out, "optimal       {} = {}", cert.optimum, cert.optimal_value)?;
            writeln!(out, "ratio         {}", cert.ratio)?;
            writeln!(
                out,
                "submodular    {} (forward monotone {}, diminishing returns {}), backward monotone {}",
                cert.submodularity.is_string_submodular(),
                cert.submodularity.forward_monotone,
                cert.submodularity.diminishing_returns,
                cert.backward_monotone
            )?;
            writeln!(out, "sigma {}  epsilon {}  eta {}  sigma(O) {}", opt(cert.sigma), opt(cert.epsilon), opt(cert.eta), opt(cert.sigma_o))?;
            for b in &cert.bounds {
                match &b.status {
                    BoundStatus::Holds { floor, margin } => writeln!(out, "  PASS     {:<13} floor {floor:.6}  margin {margin:.3e}", b.name)?,
                    BoundStatus::Violated { floor, margin } => writeln!(out, "  FAIL     {:<13} floor {floor:.6}  margin {margin:.3e}", b.name)?,
                    BoundStatus::NotApplicable { reason } => writeln!(out, "  N/A      {:<13} {reason}", b.name)?,
                }
            }
        }
    }
    Ok(Outcome::from_holds(cert.holds()))
}
