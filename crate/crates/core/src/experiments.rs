//! Experiment drivers: Shor resource estimates, mapping overhead and routing
//! benchmarks.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::backends::{CommandCollector, ResourceCounter, ResourceReport};
use crate::decompose::{DecomposeStage, GateSet};
use crate::engine::{run_stages, Backend, Pipeline, Stage};
use crate::error::Result;
use crate::gate::Command;
use crate::mapping::{grid_route, oets_route, HardwareGraph, MapperStage, Placement};
use crate::optimize::compile_stages;
use crate::qmath::{shor_iteration, ShorParams};

/// Compiler toggles of a Shor run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShorConfig {
    /// Leave compute/uncompute sections uncontrolled inside control contexts.
    pub cuc: bool,
    /// Optimize in the intermediate gate set before final lowering.
    pub igs: bool,
    pub window: usize,
}

impl ShorConfig {
    pub fn variant(&self) -> String {
        let flag = |b: bool| if b { "on" } else { "off" };
        format!("cuc-{}_igs-{}", flag(self.cuc), flag(self.igs))
    }
}

fn build_pipeline<B: Backend>(backend: B, config: &ShorConfig) -> Pipeline<B> {
    let mut eng = Pipeline::new(backend);
    eng.set_naive_control(!config.cuc);
    for stage in compile_stages(config.igs, config.window) {
        eng.add_boxed_stage(stage);
    }
    eng
}

/// Compiles iteration `k` into the target gate set.
pub fn compile_shor_iteration(params: &ShorParams, k: usize, config: &ShorConfig) -> Result<Vec<Command>> {
    let mut eng = build_pipeline(CommandCollector::default(), config);
    shor_iteration(&mut eng, params, k)?;
    eng.flush()?;
    Ok(eng.into_backend().into_commands())
}

/// Resource estimate of a full run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShorResources {
    pub params: ShorParams,
    pub variant: String,
    /// Counts of the first iteration alone.
    pub iteration: ResourceReport,
    /// First-iteration counts times `2⌈log₂ N⌉`.
    pub total: ResourceReport,
}

/// Counts the first iteration and extrapolates to all iterations.
pub fn shor_resources(params: &ShorParams, config: &ShorConfig) -> Result<ShorResources> {
    let mut eng = build_pipeline(ResourceCounter::default(), config);
    shor_iteration(&mut eng, params, 0)?;
    eng.flush()?;
    let iteration = eng.into_backend().into_report();
    let total = iteration.scaled(params.iterations() as u64);
    Ok(ShorResources {
        params: *params,
        variant: config.variant(),
        iteration,
        total,
    })
}

/// Near-square grid with at least `width` cells: `rows = ⌈√w⌉`,
/// `cols = ⌈w / rows⌉`.
pub fn grid_for_width(width: usize) -> HardwareGraph {
    let rows = (width as f64).sqrt().ceil().max(1.0) as usize;
    let cols = width.div_ceil(rows).max(1);
    HardwareGraph::Grid { rows, cols }
}

/// Result of mapping a circuit onto a hardware graph.
#[derive(Clone, Debug)]
pub struct MapResult {
    pub graph: HardwareGraph,
    pub pre: ResourceReport,
    pub post: ResourceReport,
    /// Mapped circuit on physical positions, swaps lowered to CNOTs.
    pub mapped: Vec<Command>,
    pub placement: Placement,
    pub swaps: usize,
}

/// Lowers `circuit` to the target gate set and counts it without mapping.
pub fn lowered_report(circuit: Vec<Command>) -> Result<ResourceReport> {
    count(&run_stages(
        &mut [Box::new(DecomposeStage::new(GateSet::Target)) as Box<dyn Stage>],
        circuit,
    )?)
}

fn count(cmds: &[Command]) -> Result<ResourceReport> {
    let mut counter = ResourceCounter::default();
    counter.receive(cmds)?;
    Ok(counter.into_report())
}

/// Lowers `circuit` to the target gate set, maps it onto `graph` and lowers
/// the inserted swaps.
pub fn map_circuit(circuit: Vec<Command>, graph: HardwareGraph) -> Result<MapResult> {
    let lowered = run_stages(
        &mut [Box::new(DecomposeStage::new(GateSet::Target)) as Box<dyn Stage>],
        circuit,
    )?;
    let pre = count(&lowered)?;
    let mut mapper = MapperStage::new(graph);
    let mut routed = Vec::new();
    mapper.receive(lowered, &mut routed)?;
    mapper.flush(&mut routed)?;
    let mapped = run_stages(
        &mut [Box::new(DecomposeStage::new(GateSet::Target)) as Box<dyn Stage>],
        routed,
    )?;
    let post = count(&mapped)?;
    Ok(MapResult {
        graph,
        pre,
        post,
        mapped,
        placement: mapper.placement().clone(),
        swaps: mapper.swaps_inserted(),
    })
}

/// Routing depth statistics over random permutations.
#[derive(Clone, Debug, PartialEq)]
pub struct RouteBench {
    pub graph: HardwareGraph,
    pub trials: usize,
    pub max_layers: usize,
    pub mean_layers: f64,
    /// Proven depth bound: `n` on a line, `2r + c` on a grid.
    pub bound: usize,
    /// Every schedule realized its permutation with valid layers.
    pub all_correct: bool,
}

/// Routes `trials` random permutations (seeded) on `graph`.
pub fn route_bench(graph: HardwareGraph, trials: usize, seed: u64) -> Result<RouteBench> {
    let n = graph.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    let (mut max_layers, mut sum, mut all_correct) = (0usize, 0usize, true);
    for _ in 0..trials {
        perm.shuffle(&mut rng);
        let schedule = match graph {
            HardwareGraph::Linear(_) => oets_route(&perm)?,
            HardwareGraph::Grid { rows, cols } => grid_route(&perm, rows, cols)?,
        };
        all_correct &= schedule.realized_permutation(n) == perm && schedule.is_valid_for(&graph);
        max_layers = max_layers.max(schedule.depth());
        sum += schedule.depth();
    }
    let bound = match graph {
        HardwareGraph::Linear(n) => n,
        HardwareGraph::Grid { rows, cols } => 2 * rows + cols,
    };
    Ok(RouteBench {
        graph,
        trials,
        max_layers,
        mean_layers: if trials == 0 { 0.0 } else { sum as f64 / trials as f64 },
        bound,
        all_correct,
    })
}
