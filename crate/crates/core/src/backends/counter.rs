use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::engine::Backend;
use crate::error::Result;
use crate::gate::{Command, GateClass, GateKind, QubitId};

/// Gate counts, depth and peak width of a circuit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResourceReport {
    pub counts: BTreeMap<GateClass, u64>,
    /// Counts keyed by gate name, prefixed with `C<k>-` for `k` controls.
    pub by_name: BTreeMap<String, u64>,
    /// Number of non-bookkeeping commands.
    pub total: u64,
    /// Longest dependency chain; bookkeeping costs 0, everything else 1.
    pub depth: u64,
    pub max_width: usize,
}

impl ResourceReport {
    pub fn count(&self, class: GateClass) -> u64 {
        self.counts.get(&class).copied().unwrap_or(0)
    }

    pub fn cnot(&self) -> u64 {
        self.count(GateClass::Cnot)
    }

    pub fn clifford1q(&self) -> u64 {
        self.count(GateClass::Clifford1q)
    }

    pub fn t(&self) -> u64 {
        self.count(GateClass::TClass)
    }

    pub fn rz(&self) -> u64 {
        self.count(GateClass::RzClass)
    }

    pub fn measurements(&self) -> u64 {
        self.count(GateClass::MeasureClass)
    }

    pub fn other(&self) -> u64 {
        self.count(GateClass::Other)
    }

    /// Gate counts and depth multiplied by `factor`; width unchanged.
    pub fn scaled(&self, factor: u64) -> Self {
        Self {
            counts: self.counts.iter().map(|(k, v)| (*k, v * factor)).collect(),
            by_name: self.by_name.iter().map(|(k, v)| (k.clone(), v * factor)).collect(),
            total: self.total * factor,
            depth: self.depth * factor,
            max_width: self.max_width,
        }
    }

    pub fn row(&self, modulus: u64, n: usize, variant: &str) -> ResourceRow {
        ResourceRow {
            modulus,
            n,
            variant: variant.to_string(),
            cnot: self.cnot(),
            clifford1q: self.clifford1q(),
            t: self.t(),
            rz: self.rz(),
            depth: self.depth,
            width: self.max_width,
        }
    }
}

/// CSV row `N,n,variant,cnot,clifford1q,t,rz,depth,width`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResourceRow {
    #[serde(rename = "N")]
    pub modulus: u64,
    pub n: usize,
    pub variant: String,
    pub cnot: u64,
    pub clifford1q: u64,
    pub t: u64,
    pub rz: u64,
    pub depth: u64,
    pub width: usize,
}

/// Backend accumulating a [`ResourceReport`]. `Loop(k)` tags count `k` times.
#[derive(Clone, Debug, Default)]
pub struct ResourceCounter {
    report: ResourceReport,
    levels: HashMap<QubitId, u64>,
    live: HashSet<QubitId>,
    loops: bool,
}

impl ResourceCounter {
    /// A counter that keeps loops folded and multiplies by their counts.
    pub fn with_loop_support() -> Self {
        Self {
            loops: true,
            ..Self::default()
        }
    }

    pub fn report(&self) -> &ResourceReport {
        &self.report
    }

    pub fn into_report(self) -> ResourceReport {
        self.report
    }

    pub fn add(&mut self, cmd: &Command) {
        let r = &mut self.report;
        let mult = cmd.multiplicity();
        let class = cmd.classify();
        *r.counts.entry(class).or_default() += mult;
        match cmd.gate() {
            GateKind::Allocate => {
                self.live.insert(cmd.targets()[0]);
            }
            GateKind::Deallocate => {
                self.live.remove(&cmd.targets()[0]);
            }
            _ => {
                let name = if cmd.controls().is_empty() {
                    cmd.gate().name().to_string()
                } else {
                    format!("C{}-{}", cmd.controls().len(), cmd.gate().name())
                };
                *r.by_name.entry(name).or_default() += mult;
                r.total += mult;
                // qubits used without an explicit allocation count as live
                self.live.extend(cmd.all_qubits());
                let start = cmd
                    .all_qubits()
                    .map(|q| self.levels.get(&q).copied().unwrap_or(0))
                    .max()
                    .unwrap_or(0);
                let level = start + mult;
                for q in cmd.all_qubits() {
                    self.levels.insert(q, level);
                }
                r.depth = r.depth.max(level);
            }
        }
        r.max_width = r.max_width.max(self.live.len());
    }
}

impl Backend for ResourceCounter {
    fn receive(&mut self, cmds: &[Command]) -> Result<()> {
        cmds.iter().for_each(|c| self.add(c));
        Ok(())
    }

    fn supports_loops(&self) -> bool {
        self.loops
    }
}
