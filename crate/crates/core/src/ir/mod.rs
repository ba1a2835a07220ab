//! The miniature VEX-style IR: kinds, opcodes, programs, text format and the
//! native interpreter.

mod exec;
mod opcode;
mod parse;
mod print;
mod program;
mod validate;
mod value;

pub use exec::{
    interpret, interpret_with, ExecConfig, ExecError, MachineState, MemPreset, Space,
    DEFAULT_MAX_STEPS,
};
pub(crate) use exec::{Executor, Instrument};
pub use opcode::{FloatWidth, OpClass, Opcode, Operand};
pub use parse::{parse_program, ParseError};
pub use print::{print_expr, print_program, print_stmt};
pub use program::{Expr, Program, Stmt, TempId, DEFAULT_MEMORY_SIZE, DEFAULT_REGISTER_SIZE};
pub use validate::{validate_program, Diagnostic, DiagnosticKind};
pub use value::{Value, ValueKind, MAX_VALUE_BYTES};
