//! Reverse-mode algorithmic differentiation of programs in a small VEX-style
//! IR, by propagating variable indices through shadow memory and writing a
//! Jacobian tape that a separate evaluator sweeps backwards or forwards.
//!
//! The pieces:
//! - [`ir`]: values, opcodes, programs, the text format and an interpreter.
//! - [`shadow`]: two-layer shadow storage for 8-byte indices.
//! - [`tape`]: the 32-byte block tape file and index files.
//! - [`recorder`]: the recording instrumentation.
//! - [`evaluator`]: reverse and forward sweeps over a tape.
//! - [`bench`]: the Burgers' benchmark, finite differences, random programs.

pub mod bench;
pub mod evaluator;
pub mod ir;
pub mod par;
pub mod recorder;
pub mod shadow;
pub mod tape;

pub use evaluator::{evaluate_dir, forward_evaluate, reverse_evaluate, EvalError, Mode};
pub use ir::{interpret, parse_program, MachineState, Program};
pub use par::Exec;
pub use recorder::{record_into, run_recording, Recorder, RecordingSession};
pub use shadow::Index;
pub use tape::{TapeBlock, TapeReader, TapeWriter};
