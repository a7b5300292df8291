//! A streaming quantum circuit compiler.
//!
//! Programs are written against a [`Pipeline`], which is the front end of a
//! chain of compiler stages ending in a backend. Meta-instructions (compute /
//! uncompute sections, control contexts and loops) annotate the command stream
//! so that later stages can optimize across subroutine boundaries.
//!
//! ```
//! use qcflow::backends::ResourceCounter;
//! use qcflow::decompose::{DecomposeStage, GateSet};
//! use qcflow::gate::{Command, GateKind};
//! use qcflow::optimize::OptimizerStage;
//! use qcflow::Pipeline;
//!
//! let mut eng = Pipeline::new(ResourceCounter::default());
//! eng.add_stage(DecomposeStage::new(GateSet::Target));
//! eng.add_stage(OptimizerStage::new(20));
//! let q = eng.allocate_qureg(3);
//! eng.send(vec![Command::toffoli(q[0], q[1], q[2])]).unwrap();
//! eng.flush().unwrap();
//! assert_eq!(eng.backend().report().cnot(), 6);
//! ```

pub mod backends;
pub mod decompose;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod gate;
pub mod linalg;
pub mod mapping;
pub mod meta;
pub mod optimize;
pub mod qmath;

pub use engine::{Backend, Pipeline, Stage};
pub use error::{Error, Result};
pub use gate::{Command, GateClass, GateKind, QubitId, Tag};
