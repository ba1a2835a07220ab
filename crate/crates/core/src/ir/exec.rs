//! Statement executor shared by the plain interpreter and the recorder.
//!
//! The data path lives here once; instrumentations only observe values and
//! carry a per-value shadow alongside them, so a recorded run cannot compute
//! different values than a plain one.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::opcode::Opcode;
use super::parse::parse_const_literal;
use super::program::{Expr, Program, Stmt, TempId};
use super::validate::{validate_program, Diagnostic};
use super::value::{Value, ValueKind};
use crate::shadow::ShadowError;
use crate::tape::TapeError;

/// Default bound on executed statements.
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Memory,
    Register,
    Temp,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Memory => "memory",
            Space::Register => "register",
            Space::Temp => "temporary",
        })
    }
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("program is invalid: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("stmt {stmt}: {space} access [{offset:#x}, +{size}) out of range")]
    OutOfRange {
        stmt: usize,
        space: Space,
        offset: u64,
        size: usize,
    },
    #[error("step limit of {0} statements exceeded")]
    StepLimit(u64),
    #[error(transparent)]
    Shadow(#[from] ShadowError),
    #[error(transparent)]
    Tape(#[from] TapeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecConfig {
    pub max_steps: u64,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

/// Temporaries, register file and memory, all as raw bits.
#[derive(Clone, Debug, PartialEq)]
pub struct MachineState {
    pub temps: Vec<Value>,
    pub registers: Vec<u8>,
    pub memory: Vec<u8>,
    pub pc: usize,
}

fn range(len: usize, offset: u64, size: usize) -> Option<std::ops::Range<usize>> {
    let start = usize::try_from(offset).ok()?;
    let end = start.checked_add(size)?;
    (end <= len).then_some(start..end)
}

impl MachineState {
    /// Zeroed state sized for `program`.
    pub fn for_program(program: &Program) -> Self {
        MachineState {
            temps: vec![Value::zero(ValueKind::I64); program.temp_count()],
            registers: vec![0; program.register_size as usize],
            memory: vec![0; program.memory_size as usize],
            pc: 0,
        }
    }

    pub fn load(&self, addr: u64, kind: ValueKind) -> Option<Value> {
        let r = range(self.memory.len(), addr, kind.size())?;
        Some(Value::from_le_bytes(kind, &self.memory[r]))
    }

    pub fn store(&mut self, addr: u64, value: &Value) -> Option<()> {
        let r = range(self.memory.len(), addr, value.size())?;
        self.memory[r].copy_from_slice(value.bytes());
        Some(())
    }

    pub fn load_f64(&self, addr: u64) -> Option<f64> {
        self.load(addr, ValueKind::F64).map(|v| v.as_f64())
    }

    pub fn store_f64(&mut self, addr: u64, x: f64) -> Option<()> {
        self.store(addr, &Value::f64(x))
    }

    pub fn apply_preset(&mut self, preset: &MemPreset) -> Option<()> {
        self.store(preset.addr, &preset.value)
    }
}

/// A `addr=value` memory initializer, e.g. `0=3.0`, `0x10=f32:1.5`,
/// `24=i64:7`. Values without a kind prefix are F64.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemPreset {
    pub addr: u64,
    pub value: Value,
}

impl FromStr for MemPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (addr, value) = s
            .split_once('=')
            .ok_or_else(|| format!("memory preset `{s}` must look like addr=value"))?;
        let addr = match addr.trim().strip_prefix("0x") {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => addr.trim().parse(),
        }
        .map_err(|_| format!("invalid address `{addr}`"))?;
        let value = value.trim();
        let (kind, literal) = match value.split_once(':') {
            Some((k, lit)) => (k.to_ascii_uppercase().parse::<ValueKind>()?, lit),
            None => (ValueKind::F64, value),
        };
        Ok(MemPreset {
            addr,
            value: parse_const_literal(kind, literal)?,
        })
    }
}

/// Hooks an executor calls while running a program. `Shadow` is the
/// per-value metadata an instrumentation carries next to every value.
pub(crate) trait Instrument {
    type Shadow: Copy;

    fn passive(&mut self) -> Self::Shadow;

    fn read_temp(&mut self, t: TempId) -> Result<Self::Shadow, ExecError>;
    fn write_temp(&mut self, t: TempId, size: usize, s: &Self::Shadow) -> Result<(), ExecError>;
    fn read_reg(&mut self, offset: u64, size: usize) -> Result<Self::Shadow, ExecError>;
    fn write_reg(&mut self, offset: u64, size: usize, s: &Self::Shadow) -> Result<(), ExecError>;
    fn read_mem(&mut self, addr: u64, size: usize) -> Result<Self::Shadow, ExecError>;
    fn write_mem(&mut self, addr: u64, size: usize, s: &Self::Shadow) -> Result<(), ExecError>;

    /// Shadow of `op`'s result, given the operands and the computed result.
    fn op(
        &mut self,
        stmt: usize,
        op: Opcode,
        args: &[(Value, Self::Shadow)],
        result: &Value,
    ) -> Result<Self::Shadow, ExecError>;

    fn input(
        &mut self,
        stmt: usize,
        memory: &mut [u8],
        addr: u64,
        kind: ValueKind,
    ) -> Result<(), ExecError>;
    fn output(
        &mut self,
        stmt: usize,
        memory: &[u8],
        addr: u64,
        kind: ValueKind,
    ) -> Result<(), ExecError>;
}

/// No instrumentation at all: native execution.
pub(crate) struct Plain;

impl Instrument for Plain {
    type Shadow = ();

    #[inline]
    fn passive(&mut self) {}
    #[inline]
    fn read_temp(&mut self, _: TempId) -> Result<(), ExecError> {
        Ok(())
    }
    #[inline]
    fn write_temp(&mut self, _: TempId, _: usize, _: &()) -> Result<(), ExecError> {
        Ok(())
    }
    #[inline]
    fn read_reg(&mut self, _: u64, _: usize) -> Result<(), ExecError> {
        Ok(())
    }
    #[inline]
    fn write_reg(&mut self, _: u64, _: usize, _: &()) -> Result<(), ExecError> {
        Ok(())
    }
    #[inline]
    fn read_mem(&mut self, _: u64, _: usize) -> Result<(), ExecError> {
        Ok(())
    }
    #[inline]
    fn write_mem(&mut self, _: u64, _: usize, _: &()) -> Result<(), ExecError> {
        Ok(())
    }
    #[inline]
    fn op(&mut self, _: usize, _: Opcode, _: &[(Value, ())], _: &Value) -> Result<(), ExecError> {
        Ok(())
    }
    #[inline]
    fn input(&mut self, _: usize, _: &mut [u8], _: u64, _: ValueKind) -> Result<(), ExecError> {
        Ok(())
    }
    #[inline]
    fn output(&mut self, _: usize, _: &[u8], _: u64, _: ValueKind) -> Result<(), ExecError> {
        Ok(())
    }
}

/// Compares memory at `addr` with `expected` bitwise and, on a match, stores
/// `new`. Returns whether the swap happened.
pub(crate) fn compare_and_swap(
    memory: &mut [u8],
    addr: u64,
    expected: &Value,
    new: &Value,
) -> Option<bool> {
    let r = range(memory.len(), addr, expected.size())?;
    if &memory[r.clone()] == expected.bytes() {
        memory[r].copy_from_slice(new.bytes());
        Some(true)
    } else {
        Some(false)
    }
}

/// A validated program with resolved jump targets.
pub(crate) struct Executor<'p> {
    program: &'p Program,
    targets: Vec<usize>,
    temp_count: usize,
    config: ExecConfig,
}

impl<'p> Executor<'p> {
    pub fn new(program: &'p Program, config: ExecConfig) -> Result<Self, ExecError> {
        let diagnostics = validate_program(program);
        if !diagnostics.is_empty() {
            return Err(ExecError::Invalid(diagnostics));
        }
        let targets = program
            .statements
            .iter()
            .map(|s| match s {
                Stmt::Exit { label, .. } => program
                    .label_position(label)
                    .expect("validated programs resolve every label"),
                _ => usize::MAX,
            })
            .collect();
        Ok(Executor {
            program,
            targets,
            temp_count: program.temp_count(),
            config,
        })
    }

    /// Runs from `state.pc` until `halt` or the end of the statement list.
    /// Returns the number of executed statements.
    pub fn run<I: Instrument>(
        &self,
        state: &mut MachineState,
        instr: &mut I,
    ) -> Result<u64, ExecError> {
        if state.temps.len() < self.temp_count {
            state
                .temps
                .resize(self.temp_count, Value::zero(ValueKind::I64));
        }
        let stmts = &self.program.statements;
        let mut steps = 0u64;
        while state.pc < stmts.len() {
            if steps >= self.config.max_steps {
                return Err(ExecError::StepLimit(self.config.max_steps));
            }
            steps += 1;
            let pc = state.pc;
            state.pc += 1;
            match &stmts[pc] {
                Stmt::WrTmp(t, e) => {
                    let (v, s) = self.eval(e, state, instr, pc)?;
                    instr.write_temp(*t, v.size(), &s)?;
                    state.temps[*t as usize] = v;
                }
                Stmt::Put { offset, data } => {
                    let (v, s) = self.eval(data, state, instr, pc)?;
                    let r = range(state.registers.len(), *offset, v.size()).ok_or_else(|| {
                        ExecError::OutOfRange {
                            stmt: pc,
                            space: Space::Register,
                            offset: *offset,
                            size: v.size(),
                        }
                    })?;
                    state.registers[r].copy_from_slice(v.bytes());
                    instr.write_reg(*offset, v.size(), &s)?;
                }
                Stmt::Store { addr, data } => {
                    let (a, _) = self.eval(addr, state, instr, pc)?;
                    let (v, s) = self.eval(data, state, instr, pc)?;
                    let addr = a.bits();
                    state
                        .store(addr, &v)
                        .ok_or_else(|| mem_error(pc, addr, v.size()))?;
                    instr.write_mem(addr, v.size(), &s)?;
                }
                Stmt::Cas {
                    addr,
                    expected,
                    new,
                    success,
                } => {
                    let (a, _) = self.eval(addr, state, instr, pc)?;
                    let (e, _) = self.eval(expected, state, instr, pc)?;
                    let (n, ns) = self.eval(new, state, instr, pc)?;
                    let addr = a.bits();
                    let ok = compare_and_swap(&mut state.memory, addr, &e, &n)
                        .ok_or_else(|| mem_error(pc, addr, e.size()))?;
                    if ok {
                        instr.write_mem(addr, n.size(), &ns)?;
                    }
                    let flag = Value::flag(ok);
                    let passive = instr.passive();
                    instr.write_temp(*success, 1, &passive)?;
                    state.temps[*success as usize] = flag;
                }
                Stmt::Exit { guard, .. } => {
                    let (g, _) = self.eval(guard, state, instr, pc)?;
                    if g.bits() != 0 {
                        state.pc = self.targets[pc];
                    }
                }
                Stmt::Label(_) => {}
                Stmt::InputRequest { addr, kind } => {
                    let (a, _) = self.eval(addr, state, instr, pc)?;
                    let addr = a.bits();
                    range(state.memory.len(), addr, kind.size())
                        .ok_or_else(|| mem_error(pc, addr, kind.size()))?;
                    instr.input(pc, &mut state.memory, addr, *kind)?;
                }
                Stmt::OutputRequest { addr, kind } => {
                    let (a, _) = self.eval(addr, state, instr, pc)?;
                    let addr = a.bits();
                    range(state.memory.len(), addr, kind.size())
                        .ok_or_else(|| mem_error(pc, addr, kind.size()))?;
                    instr.output(pc, &state.memory, addr, *kind)?;
                }
                Stmt::Halt => break,
            }
        }
        Ok(steps)
    }

    fn eval<I: Instrument>(
        &self,
        e: &Expr,
        state: &MachineState,
        instr: &mut I,
        stmt: usize,
    ) -> Result<(Value, I::Shadow), ExecError> {
        Ok(match e {
            Expr::Const(v) => (*v, instr.passive()),
            Expr::RdTmp(t) => {
                let v = *state.temps.get(*t as usize).ok_or(ExecError::OutOfRange {
                    stmt,
                    space: Space::Temp,
                    offset: *t as u64,
                    size: 1,
                })?;
                (v, instr.read_temp(*t)?)
            }
            Expr::Get { offset, kind } => {
                let r = range(state.registers.len(), *offset, kind.size()).ok_or_else(|| {
                    ExecError::OutOfRange {
                        stmt,
                        space: Space::Register,
                        offset: *offset,
                        size: kind.size(),
                    }
                })?;
                let v = Value::from_le_bytes(*kind, &state.registers[r]);
                (v, instr.read_reg(*offset, kind.size())?)
            }
            Expr::Load { kind, addr } => {
                let (a, _) = self.eval(addr, state, instr, stmt)?;
                let addr = a.bits();
                let v = state
                    .load(addr, *kind)
                    .ok_or_else(|| mem_error(stmt, addr, kind.size()))?;
                (v, instr.read_mem(addr, kind.size())?)
            }
            Expr::Unop(op, a) => {
                let a = self.eval(a, state, instr, stmt)?;
                let r = op.eval(&[a.0]);
                let s = instr.op(stmt, *op, &[a], &r)?;
                (r, s)
            }
            Expr::Binop(op, a, b) => {
                let a = self.eval(a, state, instr, stmt)?;
                let b = self.eval(b, state, instr, stmt)?;
                let r = op.eval(&[a.0, b.0]);
                let s = instr.op(stmt, *op, &[a, b], &r)?;
                (r, s)
            }
            Expr::Triop(op, a, b, c) => {
                let a = self.eval(a, state, instr, stmt)?;
                let b = self.eval(b, state, instr, stmt)?;
                let c = self.eval(c, state, instr, stmt)?;
                let r = op.eval(&[a.0, b.0, c.0]);
                let s = instr.op(stmt, *op, &[a, b, c], &r)?;
                (r, s)
            }
            Expr::Ite(c, t, f) => {
                let (cv, _) = self.eval(c, state, instr, stmt)?;
                let t = self.eval(t, state, instr, stmt)?;
                let f = self.eval(f, state, instr, stmt)?;
                select(cv.bits() as u8, t, f)
            }
        })
    }
}

/// If-then-else: value and shadow travel together, like any data move.
pub(crate) fn select<T>(cond: u8, then: T, other: T) -> T {
    if cond != 0 {
        then
    } else {
        other
    }
}

fn mem_error(stmt: usize, addr: u64, size: usize) -> ExecError {
    ExecError::OutOfRange {
        stmt,
        space: Space::Memory,
        offset: addr,
        size,
    }
}

/// Runs `program` natively from `initial` with the default step limit.
pub fn interpret(program: &Program, initial: MachineState) -> Result<MachineState, ExecError> {
    interpret_with(program, initial, ExecConfig::default())
}

pub fn interpret_with(
    program: &Program,
    initial: MachineState,
    config: ExecConfig,
) -> Result<MachineState, ExecError> {
    let exec = Executor::new(program, config)?;
    let mut state = initial;
    exec.run(&mut state, &mut Plain)?;
    Ok(state)
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    fn run(src: &str, presets: &[(u64, f64)]) -> MachineState {
        let p = parse_program(src).unwrap();
        let mut st = MachineState::for_program(&p);
        for (a, x) in presets {
            st.store_f64(*a, *x).unwrap();
        }
        interpret(&p, st).unwrap()
    }

    #[test]
    fn two_input_multiply() {
        let st = run(
            ".memory 24\n\
             input Const I64 0x0 F64\n\
             input Const I64 0x8 F64\n\
             t0 = load F64 Const I64 0x0\n\
             t1 = load F64 Const I64 0x8\n\
             t2 = Binop MulF64 t0 t1\n\
             store Const I64 0x10 t2\n\
             output Const I64 0x10 F64\n\
             halt",
            &[(0, 3.0), (8, -4.0)],
        );
        assert_eq!(st.load_f64(16), Some(-12.0));
    }

    #[test]
    fn halt_only_leaves_state_unchanged() {
        let p = parse_program(".memory 16\nhalt").unwrap();
        let mut st = MachineState::for_program(&p);
        st.store_f64(8, 2.5).unwrap();
        let out = interpret(&p, st.clone()).unwrap();
        assert_eq!(out.memory, st.memory);
        assert_eq!(out.temps, st.temps);
    }

    #[test]
    fn library_function_body() {
        let st = run(
            ".memory 32\n\
             t0 = load F64 Const I64 0x0\n\
             t1 = load F64 Const I64 0x8\n\
             t2 = load F64 Const I64 0x10\n\
             t3 = Binop AddF64 (Binop AddF64 (Binop MulF64 Const F64 3.14 t0) Const F64 5.0) (Binop MulF64 t1 t2)\n\
             store Const I64 0x18 t3\n\
             halt",
            &[(0, 4.0), (8, -2.0), (16, 6.5)],
        );
        let expected = 3.14 * 4.0 + 5.0 + (-2.0) * 6.5;
        assert_eq!(st.load_f64(24), Some(expected));
        assert!((expected - 4.56).abs() < 1e-12);
    }

    #[test]
    fn loop_with_exit() {
        // x^5 by repeated multiplication.
        let st = run(
            ".memory 16\n\
             t0 = Const I64 0x0\n\
             put 0 = t0\n\
             store Const I64 0x8 Const F64 1.0\n\
             label top\n\
             t1 = Binop MulF64 (load F64 Const I64 0x8) (load F64 Const I64 0x0)\n\
             store Const I64 0x8 t1\n\
             t2 = Binop Add64 (get 0 I64) Const I64 0x1\n\
             put 0 = t2\n\
             exit (Binop CmpEQ64 t2 Const I64 0x5) done\n\
             exit Const I8 0x1 top\n\
             label done\n\
             halt",
            &[(0, 2.0)],
        );
        assert_eq!(st.load_f64(8), Some(32.0));
    }

    #[test]
    fn step_limit() {
        let p = parse_program("label l\nexit Const I8 0x1 l").unwrap();
        let err = interpret_with(
            &p,
            MachineState::for_program(&p),
            ExecConfig { max_steps: 100 },
        )
        .unwrap_err();
        assert!(matches!(err, ExecError::StepLimit(100)));
    }

    #[test]
    fn dynamic_out_of_range() {
        let p = parse_program(".memory 8\nt0 = Const I64 0x10\nt1 = load F64 t0\nhalt").unwrap();
        let err = interpret(&p, MachineState::for_program(&p)).unwrap_err();
        assert!(matches!(
            err,
            ExecError::OutOfRange {
                space: Space::Memory,
                ..
            }
        ));
    }

    #[test]
    fn invalid_program_is_rejected() {
        let p = parse_program("exit Const I8 0x1 nowhere").unwrap();
        assert!(matches!(
            interpret(&p, MachineState::for_program(&p)),
            Err(ExecError::Invalid(_))
        ));
    }

    #[test]
    fn cas_success_and_failure() {
        let st = run(
            ".memory 16\n\
             cas Const I64 0x0 Const F64 1.0 Const F64 2.0 -> t0\n\
             cas Const I64 0x8 Const F64 3.0 Const F64 9.0 -> t1\n\
             store Const I64 0x8 (ITE t1 Const F64 7.0 (load F64 Const I64 0x8))\n\
             halt",
            &[(0, 1.0), (8, 1.0)],
        );
        assert_eq!(st.load_f64(0), Some(2.0));
        assert_eq!(st.load_f64(8), Some(1.0));
        assert_eq!(st.temps[0], Value::flag(true));
        assert_eq!(st.temps[1], Value::flag(false));
    }

    #[test]
    fn presets() {
        let p: MemPreset = "0x10=f32:1.5".parse().unwrap();
        assert_eq!(p.addr, 16);
        assert_eq!(p.value, Value::f32(1.5));
        let p: MemPreset = "8=-4".parse().unwrap();
        assert_eq!(p.value, Value::f64(-4.0));
        assert!("8".parse::<MemPreset>().is_err());
    }
}
