//! JSON circuit files.
//!
//! ```json
//! {"version": 1, "qubits": 2, "commands": [
//!   {"gate": "H", "params": [], "targets": [0], "controls": [], "tags": []},
//!   {"gate": "Rz", "params": [0.3], "targets": [1], "controls": [0], "tags": ["Compute", {"Loop": 3}]}
//! ]}
//! ```
//!
//! `QFT` commands carry `"inverse": true` when inverted. Composites use
//! `"gate": "Composite"` with `"name"` and integer `params`. Classically
//! controlled commands list the measured qubits under `"classical"`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{Command, Composite, GateKind, QubitId, Tag};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CircuitFile {
    version: u32,
    qubits: u32,
    commands: Vec<WireCommand>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WireTag {
    Name(String),
    Loop {
        #[serde(rename = "Loop")]
        count: u32,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCommand {
    gate: String,
    #[serde(default)]
    params: Vec<f64>,
    targets: Vec<u32>,
    #[serde(default)]
    controls: Vec<u32>,
    #[serde(default)]
    tags: Vec<WireTag>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    inverse: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    classical: Vec<u32>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "RawCommand", into = "RawCommand")]
struct WireCommand(Command);

fn ids(qs: &[QubitId]) -> Vec<u32> {
    qs.iter().map(|q| q.0).collect()
}

fn qubits(ids: &[u32]) -> Vec<QubitId> {
    ids.iter().map(|&i| QubitId(i)).collect()
}

impl From<WireCommand> for RawCommand {
    fn from(WireCommand(cmd): WireCommand) -> Self {
        let (params, inverse, name) = match cmd.gate() {
            GateKind::Qft { inverse, .. } => (Vec::new(), *inverse, None),
            GateKind::Composite(c) => (
                c.params.iter().map(|&p| p as f64).collect(),
                c.inverse,
                Some(c.name.clone()),
            ),
            g => (g.angle().into_iter().collect(), false, None),
        };
        let gate = match cmd.gate() {
            GateKind::Composite(_) => "Composite".to_string(),
            g => g.name().to_string(),
        };
        let tags = cmd
            .tags()
            .iter()
            .map(|t| match t {
                Tag::Compute => WireTag::Name("Compute".into()),
                Tag::Uncompute => WireTag::Name("Uncompute".into()),
                Tag::Loop(k) => WireTag::Loop { count: *k },
            })
            .collect();
        RawCommand {
            gate,
            params,
            targets: ids(cmd.targets()),
            controls: ids(cmd.controls()),
            tags,
            inverse,
            name,
            classical: ids(cmd.classical_controls()),
        }
    }
}

impl TryFrom<RawCommand> for WireCommand {
    type Error = String;

    fn try_from(raw: RawCommand) -> std::result::Result<Self, String> {
        let angle = || -> std::result::Result<f64, String> {
            match raw.params.as_slice() {
                [t] => Ok(*t),
                p => Err(format!("gate {} expects 1 parameter, got {}", raw.gate, p.len())),
            }
        };
        let no_params = || -> std::result::Result<(), String> {
            if raw.params.is_empty() {
                Ok(())
            } else {
                Err(format!("gate {} takes no parameters", raw.gate))
            }
        };
        let gate = match raw.gate.as_str() {
            "Rx" => GateKind::Rx(angle()?),
            "Ry" => GateKind::Ry(angle()?),
            "Rz" => GateKind::Rz(angle()?),
            "Phase" => GateKind::Phase(angle()?),
            "QFT" => {
                no_params()?;
                GateKind::Qft {
                    width: raw.targets.len(),
                    inverse: raw.inverse,
                }
            }
            "Composite" => {
                let name = raw.name.clone().ok_or("composite without a name")?;
                let params = raw
                    .params
                    .iter()
                    .map(|&p| {
                        if p.fract() == 0.0 && p.abs() < 9.0e15 {
                            Ok(p as i64)
                        } else {
                            Err(format!("composite parameter {p} is not an integer"))
                        }
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                GateKind::Composite(Composite {
                    name,
                    params,
                    inverse: raw.inverse,
                })
            }
            other => {
                no_params()?;
                match other {
                    "X" => GateKind::X,
                    "Y" => GateKind::Y,
                    "Z" => GateKind::Z,
                    "H" => GateKind::H,
                    "S" => GateKind::S,
                    "Sdg" => GateKind::Sdg,
                    "T" => GateKind::T,
                    "Tdg" => GateKind::Tdg,
                    "Swap" => GateKind::Swap,
                    "Measure" => GateKind::Measure,
                    "Allocate" => GateKind::Allocate,
                    "Deallocate" => GateKind::Deallocate,
                    _ => return Err(format!("unknown gate {other:?}")),
                }
            }
        };
        let tags = raw
            .tags
            .iter()
            .map(|t| match t {
                WireTag::Name(s) if s == "Compute" => Ok(Tag::Compute),
                WireTag::Name(s) if s == "Uncompute" => Ok(Tag::Uncompute),
                WireTag::Name(s) => Err(format!("unknown tag {s:?}")),
                WireTag::Loop { count } => Ok(Tag::Loop(*count)),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let cmd = Command::raw(gate, qubits(&raw.targets), qubits(&raw.controls))
            .with_tags(&tags)
            .with_classical_controls(&qubits(&raw.classical));
        cmd.validate().map_err(|e| e.to_string())?;
        Ok(WireCommand(cmd))
    }
}

/// Number of qubit wires a circuit needs: largest id plus one.
pub fn circuit_width(cmds: &[Command]) -> u32 {
    cmds.iter()
        .flat_map(|c| c.all_qubits())
        .map(|q| q.0 + 1)
        .max()
        .unwrap_or(0)
}

pub fn to_json(cmds: &[Command]) -> String {
    let file = CircuitFile {
        version: FORMAT_VERSION,
        qubits: circuit_width(cmds),
        commands: cmds.iter().cloned().map(WireCommand).collect(),
    };
    serde_json::to_string_pretty(&file).expect("circuit serialization cannot fail")
}

pub fn from_json(text: &str) -> Result<Vec<Command>> {
    let file: CircuitFile = serde_json::from_str(text).map_err(|e| Error::ParseError {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.version != FORMAT_VERSION {
        return Err(Error::ParseError {
            line: 1,
            column: 1,
            message: format!("unsupported version {}", file.version),
        });
    }
    Ok(file.commands.into_iter().map(|w| w.0).collect())
}
