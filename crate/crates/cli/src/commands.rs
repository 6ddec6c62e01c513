use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use ernet_core::flows::{cycle_basis, min_dissipation_flow, project_to_induced};
use ernet_core::lattice::{
    lattice_monopole, lattice_resistance, lattice_rinf, lattice_vx, QuadratureGrid, QuadratureValue,
};
use ernet_core::operators::dissipation;
use ernet_core::reduce::{reduce_to, replay, ReductionLog};
use ernet_core::resistance::{free_resistance, resistance_report, trace_resistance, wired_resistance};
use ernet_core::solvers::{royden_split, solve_dipole, solve_monopole_wired, MonopoleSign};
use ernet_core::walk::{escape_probability, hit_before_exact, martingale_check, Mode, WalkConfig};
use ernet_core::{
    generate, parse_network, resistance_finite, Current, Error, ExhaustionOptions, ExhaustionPlan, Network,
    VertexFunction,
};

use crate::{
    Command, FlowsCommand, Grid, Input, LatticeCommand, Loaded, ResistanceMode, Sampling, SolveCommand,
    WalkCommand, WalkMode, EXIT_INPUT, EXIT_NONCONVERGENCE,
};

pub struct Output {
    pub json: Value,
    pub notes: Vec<String>,
    /// False when a requested limit did not settle; the process exits 4.
    pub converged: bool,
}

impl Output {
    fn new(json: Value) -> Self {
        Output {
            json,
            notes: Vec::new(),
            converged: true,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn json(&self) -> Value {
        let kind = if self.code == EXIT_NONCONVERGENCE {
            "nonconvergence"
        } else {
            "input"
        };
        json!({ "error": { "kind": kind, "message": self.message } })
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } => EXIT_NONCONVERGENCE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<Output, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialize")
}

impl Input {
    fn load(&self) -> Result<Loaded, Failure> {
        let (net, mut plan) = match (&self.gen, &self.net) {
            (Some(spec), _) => {
                let g = generate(spec)?;
                (g.net, g.plan)
            }
            (None, Some(path)) => {
                let net = parse_network(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
                (net, ExhaustionPlan::balls(0))
            }
            (None, None) => return Err(Failure::input("give --gen or --net")),
        };
        if let Some(o) = self.origin {
            if o >= net.vertex_count() {
                return Err(Error::VertexOutOfRange {
                    vertex: o,
                    count: net.vertex_count(),
                }
                .into());
            }
            plan.origin = o;
        }
        Ok(Loaded { net, plan })
    }
}

/// `[[u, v, I(u, v)], ...]` over edges carrying a nonzero current.
fn current_json(net: &Network, i: &Current) -> Value {
    net.edges()
        .iter()
        .zip(i.values())
        .filter(|(_, &val)| val != 0.0)
        .map(|(e, &val)| json!([e.u, e.v, val]))
        .collect()
}

fn edges_json(net: &Network, ids: &[usize]) -> Value {
    net.edges()
        .iter()
        .map(|e| json!([ids[e.u], ids[e.v], e.conductance]))
        .collect()
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Gen { spec, out } => {
            let g = generate(&spec)?;
            let netx = g.net.to_netx();
            if let Some(path) = out {
                write(&path, &netx)?;
            }
            Ok(Output::new(json!({
                "spec": spec.to_string(),
                "vertices": g.net.vertex_count(),
                "edges": g.net.edge_count(),
                "origin": g.origin(),
                "max_level": g.plan.max_level,
                "netx": netx,
            })))
        }
        Command::Validate { input } => {
            let Loaded { net, .. } = input.load()?;
            Ok(Output::new(json!({
                "valid": true,
                "vertices": net.vertex_count(),
                "edges": net.edge_count(),
                "degree_weight_defect": net.degree_weight_defect(),
                "total_conductance": net.edges().iter().map(|e| e.conductance).sum::<f64>(),
            })))
        }
        Command::Resistance {
            input,
            pair,
            mode,
            tol,
            kmax,
            detail,
        } => resistance(&input.load()?, pair, mode, ExhaustionOptions { tol, k_max: kmax }, detail),
        Command::Solve { what } => solve(what),
        Command::Reduce { input, keep, log } => {
            let Loaded { net, .. } = input.load()?;
            let r = reduce_to(&net, &keep)?;
            if let Some(path) = log {
                write(&path, &r.log().to_json_lines())?;
            }
            let (small, ids) = r.to_network()?;
            let mut out = json!({
                "keep": ids,
                "edges": edges_json(&small, &ids),
                "steps": r.log().steps.len(),
            });
            if let [x, y] = ids[..] {
                let c = r.conductance(x, y).unwrap_or(0.0);
                out["conductance"] = json!(c);
                out["resistance"] = json!(1.0 / c);
            }
            Ok(Output::new(out))
        }
        Command::Replay { log, input } => {
            let Loaded { net, .. } = input.load()?;
            let log = ReductionLog::from_json_lines(&read(&log)?)?;
            let (small, ids) = replay(&net, &log)?;
            Ok(Output::new(json!({
                "keep": ids,
                "edges": edges_json(&small, &ids),
                "steps": log.steps.len(),
            })))
        }
        Command::Flows { what } => flows(what),
        Command::Walk { what } => walk(what),
        Command::Lattice { what } => lattice(what),
        Command::Decompose { input, vertex, depth } => {
            let Loaded { net, plan } = input.load()?;
            let o = plan.origin;
            let n = net.vertex_count();
            let kernel = if vertex == o {
                VertexFunction::grounded(vec![0.0; n], o)
            } else {
                solve_dipole(&net, vertex, o, o)?
            };
            let s = royden_split(&net, &kernel, o, &plan, depth)?;
            Ok(Output::new(json!({
                "vertex": vertex,
                "ground": o,
                "depth": depth,
                "energy": s.energy,
                "energy_fin": s.energy_fin,
                "energy_harm": s.energy_harm,
                "cross": s.cross,
                "fin": s.fin.values(),
                "harm": s.harm.values(),
            })))
        }
    }
}

fn resistance(
    loaded: &Loaded,
    (x, y): (usize, usize),
    mode: ResistanceMode,
    opts: ExhaustionOptions,
    detail: bool,
) -> Outcome {
    let Loaded { net, plan } = loaded;
    let limit = |name: &str, est: ernet_core::resistance::LimitEstimate| {
        let mut out = Output::new(json!({
            name: est.value,
            "traces": { name: est.trace },
            "converged": { name: est.converged },
        }));
        if !est.converged {
            out.converged = false;
            out.notes.push(format!("{name} resistance did not settle to {:e} by k = {}", opts.tol, opts.k_max));
        }
        out
    };
    match mode {
        ResistanceMode::Finite => {
            let fr = resistance_finite(net, x, y)?;
            let mut out = json!({ "finite": fr.value });
            if detail {
                out["six"] = to_json(&fr.six);
            }
            Ok(Output::new(out))
        }
        ResistanceMode::Trace => Ok(Output::new(json!({ "trace": trace_resistance(net, x, y)? }))),
        ResistanceMode::Free => Ok(limit("free", free_resistance(net, x, y, plan, opts)?)),
        ResistanceMode::Wired => Ok(limit("wired", wired_resistance(net, x, y, plan, opts)?)),
        ResistanceMode::All => {
            let report = resistance_report(net, x, y, plan, opts)?;
            let mut out = Output::new(to_json(&report));
            for (name, ok) in &report.converged {
                if !ok {
                    out.converged = false;
                    out.notes.push(format!("{name} resistance did not settle to {:e} by k = {}", opts.tol, opts.k_max));
                }
            }
            Ok(out)
        }
    }
}

fn solve(what: SolveCommand) -> Outcome {
    match what {
        SolveCommand::Dipole { input, pair, ground } => {
            let Loaded { net, .. } = input.load()?;
            let o = ground.unwrap_or(pair.1);
            let v = solve_dipole(&net, pair.0, pair.1, o)?;
            Ok(Output::new(json!({
                "pair": [pair.0, pair.1],
                "ground": o,
                "values": v.values(),
            })))
        }
        SolveCommand::Monopole {
            input,
            vertex,
            level,
            negative,
        } => {
            let Loaded { net, plan } = input.load()?;
            let sign = if negative {
                MonopoleSign::Negative
            } else {
                MonopoleSign::Positive
            };
            let m = solve_monopole_wired(&net, vertex, &plan, level, sign)?;
            Ok(Output::new(json!({
                "vertex": vertex,
                "level": m.level,
                "sign": to_json(&sign),
                "vertices": m.vertices,
                "values": m.values,
                "energy": m.energy,
            })))
        }
    }
}

fn flows(what: FlowsCommand) -> Outcome {
    match what {
        FlowsCommand::Minflow { input, pair } => {
            let Loaded { net, .. } = input.load()?;
            let i = min_dissipation_flow(&net, pair.0, pair.1, pair.1)?;
            Ok(Output::new(json!({
                "pair": [pair.0, pair.1],
                "current": current_json(&net, &i),
                "dissipation": dissipation(&net, &i, &i),
            })))
        }
        FlowsCommand::Project { input, current, ground } => {
            let Loaded { net, .. } = input.load()?;
            let i = Current::parse(&net, &read(&current)?)?;
            let (v, p) = project_to_induced(&net, &i, ground)?;
            let rest = i.sub(&p);
            Ok(Output::new(json!({
                "ground": ground,
                "potential": v.values(),
                "projected": current_json(&net, &p),
                "dissipation": {
                    "input": dissipation(&net, &i, &i),
                    "projected": dissipation(&net, &p, &p),
                    "remainder": dissipation(&net, &rest, &rest),
                },
            })))
        }
        FlowsCommand::Cyclebasis { input } => {
            let Loaded { net, .. } = input.load()?;
            let b = cycle_basis(&net);
            let edge = |idx: usize| {
                let e = net.edge(idx);
                json!([e.u, e.v])
            };
            Ok(Output::new(json!({
                "dimension": b.len(),
                "tree": b.tree.iter().map(|&i| edge(i)).collect::<Vec<_>>(),
                "chords": b.chords.iter().map(|&i| edge(i)).collect::<Vec<_>>(),
                "cycles": b.cycles.iter().map(|c| current_json(&net, c)).collect::<Vec<_>>(),
            })))
        }
    }
}

fn walk(what: WalkCommand) -> Outcome {
    match what {
        WalkCommand::Escape { input, pair, sampling } => {
            let Loaded { net, .. } = input.load()?;
            let Sampling {
                mode,
                seed,
                samples,
                max_steps,
            } = sampling;
            let mode = match mode {
                WalkMode::Exact => Mode::Exact,
                WalkMode::Mc => Mode::MonteCarlo(WalkConfig {
                    seed,
                    samples,
                    max_steps,
                }),
            };
            let est = escape_probability(&net, pair.0, pair.1, mode)?;
            let mut out = Output::new(to_json(&est));
            if est.truncation_warning {
                out.notes.push(format!(
                    "{} of {} walks hit the step cap and were excluded",
                    est.truncated,
                    est.truncated + est.samples
                ));
            }
            Ok(out)
        }
        WalkCommand::Hitprob { input, pair, avoid } => {
            let Loaded { net, .. } = input.load()?;
            let p = hit_before_exact(&net, pair.0, pair.1, &avoid)?;
            Ok(Output::new(json!({
                "start": pair.0,
                "target": pair.1,
                "avoid": avoid,
                "probability": p,
            })))
        }
        WalkCommand::Martingale {
            input,
            pair,
            vertex,
            steps,
            seed,
            samples,
        } => {
            let Loaded { net, plan } = input.load()?;
            let h = solve_dipole(&net, pair.0, pair.1, pair.1)?;
            // vertices beyond the truncation's faithful range
            let frontier: Vec<usize> = match plan.max_level {
                Some(m) => {
                    let valid = plan.level(&net, m)?;
                    (0..net.vertex_count()).filter(|x| valid.binary_search(x).is_err()).collect()
                }
                None => Vec::new(),
            };
            let cfg = WalkConfig {
                seed,
                samples,
                ..WalkConfig::default()
            };
            let rep = martingale_check(&net, &h, vertex, steps, &frontier, &cfg)?;
            Ok(Output::new(to_json(&rep)))
        }
    }
}

impl Grid {
    fn build(&self) -> QuadratureGrid {
        let mut g = QuadratureGrid::new(self.d);
        if let Some(n) = self.grid {
            g = g.with_n(n);
        }
        if let Some(l) = self.levels {
            g = g.with_levels(l);
        }
        g
    }
}

fn quadrature(grid: &QuadratureGrid, q: QuadratureValue, extra: Value) -> Output {
    let mut out = json!({
        "d": grid.dim,
        "grid": grid.n,
        "value": q.value,
        "error": q.error,
    });
    if let (Value::Object(map), Value::Object(more)) = (&mut out, extra) {
        map.extend(more);
    }
    Output::new(out)
}

fn lattice(what: LatticeCommand) -> Outcome {
    match what {
        LatticeCommand::Resistance { grid, x, y } => {
            let g = grid.build();
            let y = if y.is_empty() { vec![0; x.len()] } else { y };
            let q = lattice_resistance(&g, &x, &y)?;
            Ok(quadrature(&g, q, json!({ "x": x, "y": y })))
        }
        LatticeCommand::Rinf { grid } => {
            let g = grid.build();
            Ok(quadrature(&g, lattice_rinf(&g)?, json!({})))
        }
        LatticeCommand::Vx { grid, x, y } => {
            let g = grid.build();
            let q = lattice_vx(&g, &x, &y)?;
            Ok(quadrature(&g, q, json!({ "x": x, "y": y })))
        }
        LatticeCommand::Monopole { grid, x } => {
            let g = grid.build();
            let q = lattice_monopole(&g, &x)?;
            Ok(quadrature(&g, q, json!({ "x": x })))
        }
    }
}
