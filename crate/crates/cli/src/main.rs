//! Experiment driver. Every experiment writes CSV to `--out` or stdout.
//!
//! ```text
//! shor-resources  N,n,variant,cnot,clifford1q,t,rz,depth,width
//! map             source,arch,rows,cols,positions,pre_cnot,post_cnot,pre_depth,post_depth,swaps
//! route-bench     arch,rows,cols,positions,trials,max_layers,mean_layers,bound,all_correct
//! simulate        index,bits,re,im,probability
//! ```

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use serde::Serialize;

use qcflow::backends::serialize::{circuit_width, from_json, to_json};
use qcflow::backends::{ResourceRow, Simulator};
use qcflow::experiments::{
    compile_shor_iteration, grid_for_width, lowered_report, map_circuit, route_bench, shor_resources, MapResult,
    ShorConfig,
};
use qcflow::mapping::HardwareGraph;
use qcflow::optimize::DEFAULT_WINDOW;
use qcflow::qmath::ShorParams;
use qcflow::{Command, GateKind, QubitId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Experiment {
    ShorResources,
    Map,
    RouteBench,
    Simulate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
    Both,
}

impl Toggle {
    fn values(self) -> &'static [bool] {
        match self {
            Toggle::On => &[true],
            Toggle::Off => &[false],
            Toggle::Both => &[true, false],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Arch {
    /// All-to-all connectivity: no routing.
    All,
    Linear,
    Grid,
}

#[derive(Debug, Parser)]
#[command(name = "qcflow", version, about = "Quantum circuit compilation experiments")]
struct Args {
    #[arg(long, value_enum)]
    experiment: Experiment,

    /// Moduli, comma separated; `a..b` expands to the odd composites in `[a, b]`.
    #[arg(long, default_value = "15")]
    n_list: String,

    /// Leave compute/uncompute sections uncontrolled inside control contexts.
    #[arg(long, value_enum, default_value = "both")]
    cuc: Toggle,

    /// Optimize in the intermediate gate set before lowering.
    #[arg(long, value_enum, default_value = "off")]
    igs: Toggle,

    /// Target connectivity; both linear and grid when omitted.
    #[arg(long, value_enum)]
    arch: Option<Arch>,

    #[arg(long)]
    rows: Option<usize>,

    #[arg(long)]
    cols: Option<usize>,

    /// Line length for `route-bench` and `map` on a linear architecture.
    #[arg(long)]
    size: Option<usize>,

    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,

    #[arg(long, env = "QCFLOW_SEED", default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 1000)]
    trials: usize,

    /// Circuit JSON input for `map` and `simulate`.
    #[arg(long = "in")]
    input: Option<PathBuf>,

    #[arg(long)]
    out: Option<PathBuf>,

    /// Where `map` writes the mapped circuit JSON; the final placement goes
    /// next to it with a `.placement.json` suffix.
    #[arg(long)]
    mapped_out: Option<PathBuf>,
}

/// Rows plus the failed checks of an experiment.
struct Report<R> {
    rows: Vec<R>,
    failures: Vec<String>,
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(args: Args) -> Result<bool> {
    if args.window < 2 {
        bail!("--window must be at least 2");
    }
    let failures = match args.experiment {
        Experiment::ShorResources => emit(&args, shor_experiment(&args)?)?,
        Experiment::Map => emit(&args, map_experiment(&args)?)?,
        Experiment::RouteBench => emit(&args, route_experiment(&args)?)?,
        Experiment::Simulate => emit(&args, simulate_experiment(&args)?)?,
    };
    for f in &failures {
        eprintln!("check failed: {f}");
    }
    Ok(failures.is_empty())
}

fn emit<R: Serialize>(args: &Args, report: Report<R>) -> Result<Vec<String>> {
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for row in &report.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(report.failures)
}

fn is_odd_composite(n: u64) -> bool {
    n >= 9 && !n.is_multiple_of(2) && (3..).step_by(2).take_while(|d| d * d <= n).any(|d| n.is_multiple_of(d))
}

fn parse_n_list(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
            out.extend((a..=b).filter(|&n| is_odd_composite(n)));
        } else {
            out.push(part.parse().with_context(|| format!("bad modulus {part:?}"))?);
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        bail!("--n-list selects no moduli");
    }
    Ok(out)
}

fn shor_experiment(args: &Args) -> Result<Report<ResourceRow>> {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for modulus in parse_n_list(&args.n_list)? {
        let params = ShorParams::with_default_base(modulus)?;
        for &cuc in args.cuc.values() {
            for &igs in args.igs.values() {
                let config = ShorConfig {
                    cuc,
                    igs,
                    window: args.window,
                };
                let res = shor_resources(&params, &config)?;
                if res.total.max_width != params.width() {
                    failures.push(format!(
                        "N={modulus} {}: width {} != {}",
                        res.variant,
                        res.total.max_width,
                        params.width()
                    ));
                }
                rows.push(res.total.row(modulus, params.n, &res.variant));
            }
        }
    }
    rows.sort_by(|a, b| (a.modulus, &a.variant).cmp(&(b.modulus, &b.variant)));
    Ok(Report { rows, failures })
}

#[derive(Debug, Serialize)]
struct MapRow {
    source: String,
    arch: &'static str,
    rows: usize,
    cols: usize,
    positions: usize,
    pre_cnot: u64,
    post_cnot: u64,
    pre_depth: u64,
    post_depth: u64,
    swaps: usize,
}

fn map_row(source: &str, r: &MapResult) -> MapRow {
    let (arch, rows, cols) = match r.graph {
        HardwareGraph::Linear(n) => ("linear", 1, n),
        HardwareGraph::Grid { rows, cols } => ("grid", rows, cols),
    };
    MapRow {
        source: source.to_string(),
        arch,
        rows,
        cols,
        positions: r.graph.size(),
        pre_cnot: r.pre.cnot(),
        post_cnot: r.post.cnot(),
        pre_depth: r.pre.depth,
        post_depth: r.post.depth,
        swaps: r.swaps,
    }
}

fn wants(args: &Args, arch: Arch) -> bool {
    args.arch.is_none_or(|a| a == arch)
}

fn graphs(args: &Args, width: usize) -> Result<Vec<HardwareGraph>> {
    let mut out = Vec::new();
    if wants(args, Arch::Linear) {
        out.push(HardwareGraph::Linear(args.size.unwrap_or(width)));
    }
    if wants(args, Arch::Grid) {
        out.push(match (args.rows, args.cols) {
            (Some(rows), Some(cols)) => HardwareGraph::Grid { rows, cols },
            (None, None) => grid_for_width(width),
            _ => bail!("--rows and --cols go together"),
        });
    }
    for g in &out {
        if g.size() < width {
            bail!(qcflow::Error::CircuitTooWide {
                qubits: width,
                positions: g.size()
            });
        }
    }
    Ok(out)
}

fn write_mapped(path: &Path, r: &MapResult, several: bool) -> Result<()> {
    let path = if several {
        let name = match r.graph {
            HardwareGraph::Linear(_) => "linear",
            HardwareGraph::Grid { .. } => "grid",
        };
        path.with_extension(format!("{name}.json"))
    } else {
        path.to_path_buf()
    };
    fs::write(&path, to_json(&r.mapped)).with_context(|| format!("writing {}", path.display()))?;
    let placement: Vec<(u32, usize)> = r.placement.iter().map(|(q, p)| (q.0, p)).collect();
    let placement_path = path.with_extension("placement.json");
    fs::write(&placement_path, serde_json::to_string_pretty(&placement)?)
        .with_context(|| format!("writing {}", placement_path.display()))?;
    Ok(())
}

fn map_experiment(args: &Args) -> Result<Report<MapRow>> {
    let mut jobs: Vec<(String, Vec<Command>, usize)> = Vec::new();
    if let Some(path) = &args.input {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let circuit = from_json(&text)?;
        let width = circuit_width(&circuit) as usize;
        jobs.push((path.display().to_string(), circuit, width));
    } else {
        for modulus in parse_n_list(&args.n_list)? {
            let params = ShorParams::with_default_base(modulus)?;
            let &cuc = args.cuc.values().first().expect("toggle");
            let &igs = args.igs.values().first().expect("toggle");
            let config = ShorConfig {
                cuc,
                igs,
                window: args.window,
            };
            let circuit = compile_shor_iteration(&params, 0, &config)?;
            jobs.push((format!("shor-{modulus}"), circuit, params.width()));
        }
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (source, circuit, width) in jobs {
        if args.arch == Some(Arch::All) {
            let report = lowered_report(circuit)?;
            rows.push(MapRow {
                source,
                arch: "all-to-all",
                rows: 1,
                cols: width,
                positions: width,
                pre_cnot: report.cnot(),
                post_cnot: report.cnot(),
                pre_depth: report.depth,
                post_depth: report.depth,
                swaps: 0,
            });
            continue;
        }
        let gs = graphs(args, width)?;
        for &g in &gs {
            let r = map_circuit(circuit.clone(), g)?;
            for c in &r.mapped {
                let qs: Vec<usize> = c.qubits().map(QubitId::index).collect();
                if qs.len() == 2 && !g.are_adjacent(qs[0], qs[1]) {
                    failures.push(format!("{source} on {g:?}: non-adjacent {c}"));
                }
            }
            if let Some(path) = &args.mapped_out {
                write_mapped(path, &r, gs.len() > 1)?;
            }
            rows.push(map_row(&source, &r));
        }
    }
    Ok(Report { rows, failures })
}

#[derive(Debug, Serialize)]
struct RouteRow {
    arch: &'static str,
    rows: usize,
    cols: usize,
    positions: usize,
    trials: usize,
    max_layers: usize,
    mean_layers: f64,
    bound: usize,
    all_correct: bool,
}

fn route_experiment(args: &Args) -> Result<Report<RouteRow>> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    if args.arch == Some(Arch::All) {
        bail!("route-bench needs --arch linear or grid");
    }
    let mut gs = Vec::new();
    if wants(args, Arch::Linear) {
        gs.push(HardwareGraph::Linear(args.size.unwrap_or(16)));
    }
    if wants(args, Arch::Grid) {
        gs.push(HardwareGraph::Grid {
            rows: args.rows.unwrap_or(5),
            cols: args.cols.unwrap_or(5),
        });
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for g in gs {
        let b = route_bench(g, args.trials, args.seed)?;
        let (arch, r, c) = match g {
            HardwareGraph::Linear(n) => ("linear", 1, n),
            HardwareGraph::Grid { rows, cols } => ("grid", rows, cols),
        };
        if b.max_layers > b.bound {
            failures.push(format!("{g:?}: {} layers exceed bound {}", b.max_layers, b.bound));
        }
        if !b.all_correct {
            failures.push(format!("{g:?}: a schedule did not realize its permutation"));
        }
        rows.push(RouteRow {
            arch,
            rows: r,
            cols: c,
            positions: g.size(),
            trials: b.trials,
            max_layers: b.max_layers,
            mean_layers: b.mean_layers,
            bound: b.bound,
            all_correct: b.all_correct,
        });
    }
    Ok(Report { rows, failures })
}

#[derive(Debug, Serialize)]
struct AmplitudeRow {
    index: usize,
    bits: String,
    re: f64,
    im: f64,
    probability: f64,
}

fn simulate_experiment(args: &Args) -> Result<Report<AmplitudeRow>> {
    let path = args.input.as_ref().context("simulate needs --in")?;
    let circuit = from_json(&fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?;
    let width = circuit_width(&circuit) as usize;
    let mut sim = Simulator::new(args.seed);
    sim.ensure_width(width)?;
    sim.run(&circuit)?;
    for c in circuit.iter().filter(|c| matches!(c.gate(), GateKind::Measure)) {
        let q = c.targets()[0];
        if let Some(v) = sim.outcome(q) {
            eprintln!("measured {q} = {}", u8::from(v));
        }
    }
    let rows = sim
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 1e-24)
        .map(|(index, a)| AmplitudeRow {
            index,
            // qubit 0 is the rightmost character
            bits: format!("{index:0width$b}"),
            re: a.re,
            im: a.im,
            probability: a.norm_sqr(),
        })
        .collect();
    let mut failures = Vec::new();
    if (sim.norm() - 1.0).abs() > 1e-10 {
        failures.push(format!("state norm {}", sim.norm()));
    }
    Ok(Report { rows, failures })
}
