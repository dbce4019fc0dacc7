//! Validation and execution of a parsed command line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use cavity_decay::evolution::{check_route, spectral_coefficient, EvolutionGrid};
use cavity_decay::observables::{
    check_crossover, check_pole_competition, check_times, component_norms, crossover_time,
    pole_competition, survival_probability,
};
use cavity_decay::poles::find_pole_with;
use cavity_decay::spectral::{continuum_normalization, denominator, eigen_coefficients};
use cavity_decay::{
    bound_state, Coupling, DecayError, InitialState, Propagator, Route, Tolerances,
};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::args::{Cli, Command, Format, RouteArg};
use crate::grid::parse_points;
use crate::plot;
use crate::table::{Cell, Manifest, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Output(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<DecayError> for CliError {
    fn from(e: DecayError) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn points(flag: &str, spec: &str) -> Result<Vec<f64>, CliError> {
    parse_points(spec).map_err(|e| invalid(format!("--{flag}: {e}")))
}

/// Route used for a norm or wavefunction at time `t`.
fn resolve_route(route: RouteArg, t: f64, tol: &Tolerances) -> Route {
    match route {
        RouteArg::Auto if t <= tol.t_direct_max => Route::Direct,
        RouteArg::Auto | RouteArg::Decomposed => Route::DecomposedTotal,
        RouteArg::Direct => Route::Direct,
        RouteArg::Power => Route::PowerPart,
        RouteArg::Exponential => Route::ExponentialPart,
        RouteArg::Asymptotic => Route::Asymptotic,
    }
}

fn route_name(route: RouteArg) -> &'static str {
    match route {
        RouteArg::Auto => "auto",
        other => resolve_route(other, 0.0, &Tolerances::default()).name(),
    }
}

/// A command whose inputs have all been checked against the library's
/// preconditions.
enum Job {
    Spectrum {
        g: Coupling,
        l: usize,
        ks: Vec<f64>,
    },
    BoundState {
        g: Coupling,
        l: usize,
    },
    Poles {
        g: Coupling,
        n_max: usize,
        tol: Tolerances,
    },
    Evolve {
        prop: Propagator,
        grid: EvolutionGrid,
        route: RouteArg,
        order: u8,
        n_poles: usize,
    },
    Survival {
        prop: Propagator,
        ts: Vec<f64>,
        route: RouteArg,
    },
    Crossover {
        prop: Propagator,
    },
    Figure2 {
        prop: Propagator,
        ts: Vec<f64>,
    },
    Figure3 {
        prop: Propagator,
        ts: Vec<f64>,
    },
}

struct Plan {
    job: Job,
    manifest: Manifest,
    title: String,
}

fn tolerances(overrides: &[String]) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    for item in overrides {
        let Some((key, value)) = item.split_once('=') else {
            return Err(invalid(format!("--tol expects KEY=VALUE, got '{item}'")));
        };
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| invalid(format!("--tol {key}: '{value}' is not a number")))?;
        tol.set(key.trim(), value)?;
    }
    Ok(tol)
}

fn propagator(l: usize, g: Coupling, tol: &Tolerances) -> Result<Propagator, CliError> {
    Ok(Propagator::with_tolerances(
        InitialState::new(l)?,
        g,
        tol.clone(),
    ))
}

fn plan(cli: &Cli) -> Result<Plan, CliError> {
    let tol = tolerances(&cli.output.tol)?;
    let mut params: Vec<(&'static str, String)> = Vec::new();
    let format = match cli.output.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let job = match cli.command {
        Command::Spectrum { g, l, ref k } => {
            let ks = points("k", k)?;
            if ks[0] <= 0.0 {
                return Err(invalid("--k: wavenumbers must be > 0"));
            }
            InitialState::new(l)?;
            params.extend([("g", g.to_string()), ("l", l.to_string()), ("k", k.clone())]);
            Job::Spectrum {
                g: Coupling::new(g)?,
                l,
                ks,
            }
        }
        Command::BoundState { g, l } => {
            InitialState::new(l)?;
            params.extend([("g", g.to_string()), ("l", l.to_string())]);
            Job::BoundState {
                g: Coupling::new(g)?,
                l,
            }
        }
        Command::Poles { g, n_max } => {
            if n_max == 0 || n_max > tol.max_poles {
                return Err(invalid(format!(
                    "--n-max must lie in 1..={}, got {n_max}",
                    tol.max_poles
                )));
            }
            params.extend([("g", g.to_string()), ("n_max", n_max.to_string())]);
            Job::Poles {
                g: Coupling::new(g)?,
                n_max,
                tol: tol.clone(),
            }
        }
        Command::Evolve {
            g,
            l,
            x_grid,
            ref t,
            route,
            order,
            n_poles,
        } => {
            let gc = Coupling::new(g)?;
            let ts = points("t", t)?;
            let grid = EvolutionGrid::new(InitialState::new(l)?, gc, x_grid, ts)?;
            for &t in &grid.ts {
                check_route(resolve_route(route, t, &tol), gc, t, order, &tol)?;
            }
            if n_poles == 0 || n_poles > tol.max_poles {
                return Err(invalid(format!(
                    "--n-poles must lie in 1..={}, got {n_poles}",
                    tol.max_poles
                )));
            }
            params.extend([
                ("g", g.to_string()),
                ("l", l.to_string()),
                ("x_grid", x_grid.to_string()),
                ("t", t.clone()),
                ("route", route_name(route).to_string()),
                ("order", order.to_string()),
                ("n_poles", n_poles.to_string()),
            ]);
            Job::Evolve {
                prop: propagator(l, gc, &tol)?,
                grid,
                route,
                order,
                n_poles,
            }
        }
        Command::Survival { g, l, ref t, route } => {
            let gc = Coupling::new(g)?;
            let ts = points("t", t)?;
            check_times(&ts)?;
            for &t in &ts {
                check_route(resolve_route(route, t, &tol), gc, t, 2, &tol)?;
            }
            params.extend([
                ("g", g.to_string()),
                ("l", l.to_string()),
                ("t", t.clone()),
                ("route", route_name(route).to_string()),
            ]);
            Job::Survival {
                prop: propagator(l, gc, &tol)?,
                ts,
                route,
            }
        }
        Command::Crossover { g, l } => {
            let gc = Coupling::new(g)?;
            check_crossover(gc)?;
            params.extend([("g", g.to_string()), ("l", l.to_string())]);
            Job::Crossover {
                prop: propagator(l, gc, &tol)?,
            }
        }
        Command::Figure2 { g, l, ref t } => {
            let gc = Coupling::new(g)?;
            let ts = points("t", t)?;
            check_times(&ts)?;
            for &t in &ts {
                check_route(Route::DecomposedTotal, gc, t, 2, &tol)?;
            }
            params.extend([("g", g.to_string()), ("l", l.to_string()), ("t", t.clone())]);
            Job::Figure2 {
                prop: propagator(l, gc, &tol)?,
                ts,
            }
        }
        Command::Figure3 { g, l, ref t } => {
            let gc = Coupling::new(g)?;
            let ts = points("t", t)?;
            let state = InitialState::new(l)?;
            check_pole_competition(state, gc, &ts, &tol)?;
            params.extend([("g", g.to_string()), ("l", l.to_string()), ("t", t.clone())]);
            Job::Figure3 {
                prop: propagator(l, gc, &tol)?,
                ts,
            }
        }
    };
    params.push(("format", format.to_string()));
    let plottable = matches!(
        job,
        Job::Spectrum { .. } | Job::Survival { .. } | Job::Figure2 { .. } | Job::Figure3 { .. }
    );
    if cli.output.plot.is_some() && !plottable {
        return Err(invalid(
            "--plot is available for spectrum, survival, figure2 and figure3",
        ));
    }
    let summary: Vec<String> = params
        .iter()
        .filter(|(k, _)| matches!(*k, "g" | "l"))
        .map(|(k, v)| format!("{k} = {v}"))
        .collect();
    Ok(Plan {
        title: format!("{}: {}", cli.command.name(), summary.join(", ")),
        manifest: Manifest {
            command: cli.command.name(),
            parameters: params,
            tolerances: tol,
        },
        job,
    })
}

fn execute(job: &Job) -> Result<Table, CliError> {
    let table = match job {
        Job::Spectrum { g, l, ks } => {
            let mut table =
                Table::new(vec!["k", "four_ab", "n_squared", "inside_amplitude", "phi"]);
            let rows = ks
                .par_iter()
                .map(|&k| -> Result<Vec<Cell>, CliError> {
                    let kc = Complex64::new(k, 0.0);
                    Ok(vec![
                        k.into(),
                        denominator(kc, g.value()).re.into(),
                        continuum_normalization(k, *g)?.reduced_squared().into(),
                        eigen_coefficients(kc, *g)?.inside_amplitude().into(),
                        spectral_coefficient(k, *l, *g)?.into(),
                    ])
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.into_iter().for_each(|r| table.push(r));
            table
        }
        Job::BoundState { g, l } => {
            let mut table = Table::new(vec!["g", "k2", "energy", "norm", "residual", "overlap"]);
            if let Some(b) = bound_state(*g) {
                table.push(vec![
                    g.value().into(),
                    b.k2.into(),
                    b.energy().into(),
                    b.norm.into(),
                    b.residual.into(),
                    b.overlap_with_mode(*l).into(),
                ]);
            }
            table
        }
        Job::Poles { g, n_max, tol } => {
            let mut table = Table::new(vec!["n", "re_k", "im_k", "omega", "gamma", "residual"]);
            let poles = (1..=*n_max)
                .into_par_iter()
                .map(|n| find_pole_with(n, *g, tol))
                .collect::<Result<Vec<_>, _>>()?;
            for p in poles {
                table.push(vec![
                    Cell::Int(p.n as u64),
                    p.k.re.into(),
                    p.k.im.into(),
                    p.omega.into(),
                    p.gamma.into(),
                    p.residual.into(),
                ]);
            }
            table
        }
        Job::Evolve {
            prop,
            grid,
            route,
            order,
            n_poles,
        } => {
            let mut table = Table::new(vec!["t", "x", "re_psi", "im_psi", "abs_psi_sq"]);
            let tol = prop.tolerances();
            let blocks = grid
                .ts
                .par_iter()
                .map(|&t| {
                    let r = resolve_route(*route, t, tol);
                    prop.samples(r, &grid.xs, t, *n_poles, *order)
                })
                .collect::<Result<Vec<_>, _>>()?;
            for s in blocks.into_iter().flatten() {
                table.push(vec![
                    s.t.into(),
                    s.x.into(),
                    s.psi.re.into(),
                    s.psi.im.into(),
                    s.psi.norm_sqr().into(),
                ]);
            }
            table
        }
        Job::Survival { prop, ts, route } => {
            let mut table = Table::new(vec!["t", "survival"]);
            let tol = prop.tolerances();
            let values = ts
                .par_iter()
                .map(|&t| survival_probability(prop, t, resolve_route(*route, t, tol)))
                .collect::<Result<Vec<_>, _>>()?;
            for (&t, v) in ts.iter().zip(values) {
                table.push(vec![t.into(), v.into()]);
            }
            table
        }
        Job::Crossover { prop } => {
            let mut table = Table::new(vec!["l", "g", "time", "estimate", "ratio"]);
            let c = crossover_time(prop)?;
            table.push(vec![
                Cell::Int(prop.state().l() as u64),
                prop.coupling().value().into(),
                c.time.into(),
                c.estimate.into(),
                c.ratio().into(),
            ]);
            table
        }
        Job::Figure2 { prop, ts } => {
            let mut table = Table::new(vec!["t", "norm_exp", "norm_pow"]);
            let values = ts
                .par_iter()
                .map(|&t| component_norms(prop, t))
                .collect::<Result<Vec<_>, _>>()?;
            for (&t, (pow, exp)) in ts.iter().zip(values) {
                table.push(vec![t.into(), exp.into(), pow.into()]);
            }
            table
        }
        Job::Figure3 { prop, ts } => {
            let mut table = Table::new(vec!["t", "pole1_scaled", "pole2", "power"]);
            let values = ts
                .par_iter()
                .map(|&t| pole_competition(prop, &[t]))
                .collect::<Result<Vec<_>, _>>()?;
            for (&t, c) in ts.iter().zip(values) {
                table.push(vec![
                    t.into(),
                    c.first_pole_scaled[0].into(),
                    c.second_pole[0].into(),
                    c.power[0].into(),
                ]);
            }
            table
        }
    };
    Ok(table)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

/// Sidecar path `name.manifest.json` next to `name.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn emit(cli: &Cli, plan: &Plan, table: &Table) -> Result<(), CliError> {
    let mut body = Vec::new();
    match cli.output.format {
        Format::Csv => table
            .write_csv(&plan.manifest, &mut body)
            .expect("writing to memory"),
        Format::Json => {
            body = serde_json::to_vec_pretty(&table.to_json()).expect("serializable");
            body.push(b'\n');
        }
    }
    match &cli.output.out {
        Some(path) => {
            write_file(path, &body)?;
            if cli.output.format == Format::Json {
                let mut meta =
                    serde_json::to_vec_pretty(&plan.manifest.to_json()).expect("serializable");
                meta.push(b'\n');
                write_file(&sidecar_path(path), &meta)?;
            }
        }
        None => io::stdout()
            .write_all(&body)
            .map_err(|e| CliError::Output(e.to_string()))?,
    }
    if let Some(svg) = &cli.output.plot {
        let log = matches!(plan.job, Job::Figure2 { .. } | Job::Figure3 { .. });
        plot::write_svg(table, &plan.title, log, svg).map_err(CliError::Output)?;
    }
    Ok(())
}

/// Validates everything up front, then computes on a pool of `--threads` workers.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let plan = plan(cli)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.output.threads {
        if n == 0 {
            return Err(invalid("--threads must be >= 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Output(format!("cannot start worker pool: {e}")))?;
    let table = pool.install(|| execute(&plan.job))?;
    emit(cli, &plan, &table)
}
