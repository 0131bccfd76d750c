use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::*;
use crate::analysis::{
    failure_curves, linear_fit, linear_residuals, post_failure_distribution, powerlaw_fit,
    sweep_first_iteration, LinearFit, PowerLawFit,
};
use crate::error::{invalid, Result};
use crate::protocol::{run_iterative_protocol, LogicalPayload, OutcomeSource, ProtocolConfig};
use crate::report::{read_table_csv, write_csv, write_json};
use crate::sector::SectorDynamics;
use crate::spin::solve_swap_coefficients;
use crate::validation::cross_validate;
use crate::C64;

/// Runs one parsed command line and returns the process exit code.
pub fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Sweep(args) => sweep(&args),
        Command::Fit(args) => fit(&args),
        Command::OracleCheck(args) => oracle_check(&args),
        Command::SwapCoefficients(args) => swap_coefficients(&args),
        Command::Propagator(args) => propagator(&args),
        Command::Distribution(args) => distribution(&args),
    }
}

fn config_of<T: Serialize>(subcommand: &str, args: &T) -> Result<Value> {
    Ok(json!({ "subcommand": subcommand, "args": serde_json::to_value(args)? }))
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn protocol_config(
    mode: ModeArg,
    strategy: StrategyArg,
    max_iter: usize,
    timing: &TimingArgs,
) -> Result<ProtocolConfig> {
    let mut config = ProtocolConfig::new(mode.into(), strategy.into(), max_iter);
    config.grid_step = positive("grid_step", timing.grid_step)?;
    config.first_window = timing
        .first_window
        .map(|t| positive("first_window", t).map(|t| (0.0, t)))
        .transpose()?;
    config.later_window = (0.0, positive("later_window", timing.later_window)?);
    Ok(config)
}

fn parse_payload(text: &str, d: usize) -> Result<LogicalPayload> {
    let coeffs = text
        .split(';')
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
            let number = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| invalid("payload", format!("`{s}` is not a number")))
            };
            match parts.as_slice() {
                [re] => Ok(C64::new(number(re)?, 0.0)),
                [re, im] => Ok(C64::new(number(re)?, number(im)?)),
                _ => Err(invalid("payload", format!("`{pair}` is not `re,im`"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    LogicalPayload::normalized(d, coeffs)
}

fn simulate(args: &SimulateArgs) -> Result<i32> {
    let spec = args.chain.spec()?;
    let payload = match &args.payload {
        Some(text) => parse_payload(text, spec.d)?,
        None => LogicalPayload::uniform(spec.d),
    };
    let config = protocol_config(args.mode, args.strategy, args.max_iter, &args.timing)?;
    let mut source = match &args.force {
        Some(script) => OutcomeSource::scripted(script, args.seed)?,
        None => OutcomeSource::seeded(args.seed),
    };
    let result = run_iterative_protocol(&spec, &payload, &config, &mut source)?;
    let run_config = config_of("simulate", args)?;

    if let Some(path) = &args.csv {
        let rows = result
            .records
            .iter()
            .zip(&result.p_fail_cumulative)
            .map(|(r, f)| {
                vec![
                    r.index.to_string(),
                    fmt(r.t),
                    fmt(r.p),
                    r.outcome.symbol().to_string(),
                    r.forced.to_string(),
                    fmt(*f),
                ]
            });
        write_csv(
            BufWriter::new(File::create(path)?),
            &run_config,
            &["k", "jt", "p", "outcome", "forced", "p_fail"],
            rows,
        )?;
    }
    write_json(sink(args.out.as_ref())?, &run_config, &result)?;
    Ok(0)
}

#[derive(Serialize)]
struct SweepSummary {
    files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p1_power_law: Option<PowerLawFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    jt1_linear: Option<LinearFit>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    final_p_fail: Vec<(usize, f64)>,
}

fn sweep(args: &SweepArgs) -> Result<i32> {
    if args.n_step == 0 {
        return Err(invalid("n_step", "must be positive"));
    }
    if args.n_min < 2 || args.n_max < args.n_min {
        return Err(invalid("n_min", "need 2 <= n_min <= n_max"));
    }
    let config = protocol_config(args.mode, args.strategy, args.k_max.max(1), &args.timing)?;
    let mode = crate::sector::PropagatorMode::from(args.mode).to_string();
    let run_config = config_of("sweep", args)?;
    let wants = |f: Figure| args.figure == Figure::All || args.figure == f;
    fs::create_dir_all(&args.out_dir)?;
    let path = |name: &str| args.out_dir.join(name);
    let open = |p: &Path| -> Result<BufWriter<File>> { Ok(BufWriter::new(File::create(p)?)) };

    let mut summary = SweepSummary {
        files: Vec::new(),
        p1_power_law: None,
        jt1_linear: None,
        final_p_fail: Vec::new(),
    };

    if wants(Figure::P1) || wants(Figure::T1) {
        let lengths: Vec<usize> = (args.n_min..=args.n_max).step_by(args.n_step).collect();
        let sweep = sweep_first_iteration(&lengths, args.d, &config)?;
        if wants(Figure::P1) {
            let p = path("fig2b.csv");
            let rows = sweep
                .p1
                .rows
                .iter()
                .map(|&(n, v)| vec![fmt(n), fmt(v), mode.clone()]);
            write_csv(open(&p)?, &run_config, &["n", "p1", "mode"], rows)?;
            summary.files.push(p.display().to_string());
            summary.p1_power_law = powerlaw_fit(&sweep.p1).ok();
        }
        if wants(Figure::T1) {
            let p = path("fig2c.csv");
            let rows = sweep
                .t1
                .rows
                .iter()
                .map(|&(n, v)| vec![fmt(n), fmt(v), mode.clone()]);
            write_csv(open(&p)?, &run_config, &["n", "jt1", "mode"], rows)?;
            summary.files.push(p.display().to_string());
            summary.jt1_linear = linear_fit(&sweep.t1).ok();
        }
    }

    if wants(Figure::Distribution) {
        let mut rows = Vec::new();
        for &n in &args.distribution_n {
            let dist = post_failure_distribution(n, args.d, &config)?;
            for (site, p) in dist.iter().enumerate() {
                rows.push(vec![n.to_string(), (site + 1).to_string(), fmt(*p), mode.clone()]);
            }
        }
        let p = path("fig3.csv");
        write_csv(
            open(&p)?,
            &run_config,
            &["n", "site", "probability", "mode"],
            rows,
        )?;
        summary.files.push(p.display().to_string());
    }

    if wants(Figure::Iterations) {
        let curves = failure_curves(&args.iteration_n, args.d, args.k_max, &config)?;
        let rows = curves.iter().flat_map(|c| {
            c.p_k.rows.iter().zip(&c.t_k.rows).map(move |(&(k, p), &(_, t))| {
                vec![
                    c.n_sites.to_string(),
                    fmt(k),
                    fmt(t),
                    fmt(p),
                    c.p_k.mode.to_string(),
                ]
            })
        });
        let p = path("fig4.csv");
        write_csv(open(&p)?, &run_config, &["n", "k", "jt_k", "p_k", "mode"], rows)?;
        summary.files.push(p.display().to_string());
    }

    if wants(Figure::Failure) {
        let curves = failure_curves(&args.failure_n, args.d, args.k_max, &config)?;
        summary.final_p_fail = curves
            .iter()
            .map(|c| (c.n_sites, c.p_fail.rows.last().map_or(1.0, |r| r.1)))
            .collect();
        let rows = curves.iter().flat_map(|c| {
            c.p_fail
                .rows
                .iter()
                .map(move |&(k, f)| vec![c.n_sites.to_string(), fmt(k), fmt(f), c.p_fail.mode.to_string()])
        });
        let p = path("fig5.csv");
        write_csv(open(&p)?, &run_config, &["n", "k", "p_fail", "mode"], rows)?;
        summary.files.push(p.display().to_string());
    }

    write_json(io::stdout().lock(), &run_config, &summary)?;
    Ok(0)
}

fn fit(args: &FitArgs) -> Result<i32> {
    let table = read_table_csv(
        File::open(&args.input)?,
        args.x.as_deref(),
        args.y.as_deref(),
        args.mode.into(),
    )?;
    let run_config = config_of("fit", args)?;
    let results = match args.model {
        FitModel::Powerlaw => json!({
            "model": "powerlaw",
            "x": table.parameter,
            "y": table.value,
            "mode": table.mode,
            "points": table.rows.len(),
            "fit": powerlaw_fit(&table)?,
        }),
        FitModel::Linear => {
            let line = linear_fit(&table)?;
            json!({
                "model": "linear",
                "x": table.parameter,
                "y": table.value,
                "mode": table.mode,
                "points": table.rows.len(),
                "fit": line,
                "residuals": linear_residuals(&table, &line),
            })
        }
    };
    write_json(sink(args.out.as_ref())?, &run_config, &results)?;
    Ok(0)
}

fn oracle_check(args: &OracleArgs) -> Result<i32> {
    let seeds: Vec<u64> = (0..args.seeds).collect();
    let report = cross_validate(args.d, args.n, &seeds)?;
    write_json(
        sink(args.out.as_ref())?,
        &config_of("oracle-check", args)?,
        &report,
    )?;
    Ok(if report.passed { 0 } else { 1 })
}

fn swap_coefficients(args: &SwapArgs) -> Result<i32> {
    let decomposition = solve_swap_coefficients(args.d)?;
    write_json(
        sink(args.out.as_ref())?,
        &config_of("swap-coefficients", args)?,
        &decomposition,
    )?;
    Ok(0)
}

fn propagator(args: &PropagatorArgs) -> Result<i32> {
    let spec = args.chain.spec()?;
    let step = positive("step", args.step)?;
    let t_max = positive("t_max", args.t_max.unwrap_or(2.0 * spec.n_sites as f64))?;
    let dynamics = SectorDynamics::new(&spec, args.mode.into())?;
    let state = crate::protocol::initialize(&spec, &LogicalPayload::uniform(spec.d))?;
    let probability = dynamics.receiver_probability(&state.spatial);
    let count = (t_max / step + 1e-9).floor() as usize;
    let rows = (0..=count).map(|i| {
        let t = i as f64 * step;
        vec![fmt(t), fmt(probability(t))]
    });
    write_csv(
        sink(args.out.as_ref())?,
        &config_of("propagator", args)?,
        &["jt", "probability"],
        rows,
    )?;
    Ok(0)
}

fn distribution(args: &DistributionArgs) -> Result<i32> {
    let config = protocol_config(args.mode, StrategyArg::Optimized, 1, &args.timing)?;
    let dist = post_failure_distribution(args.n, args.d, &config)?;
    let rows = dist
        .iter()
        .enumerate()
        .map(|(site, p)| vec![(site + 1).to_string(), fmt(*p)]);
    write_csv(
        sink(args.out.as_ref())?,
        &config_of("distribution", args)?,
        &["site", "probability"],
        rows,
    )?;
    Ok(0)
}
