//! Central finite differences through the plain interpreter, used as an
//! independent oracle for recorded gradients.

use crate::ir::{
    ExecConfig, ExecError, Executor, Instrument, MachineState, Opcode, Program, TempId, Value,
    ValueKind,
};
use crate::par::Exec;

/// Relative step for binary64 inputs.
pub const STEP_F64: f64 = 1e-6;
/// Relative step for binary32 inputs; a binary64-sized step would be lost
/// to rounding.
pub const STEP_F32: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdConfig {
    pub step_f64: f64,
    pub step_f32: f64,
    pub exec: Exec,
    pub exec_config: ExecConfig,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            step_f64: STEP_F64,
            step_f32: STEP_F32,
            exec: Exec::default(),
            exec_config: ExecConfig::default(),
        }
    }
}

impl FdConfig {
    /// `rel * max(1, |x|)` with `rel` chosen by the input's precision.
    pub fn step(&self, x: f64, kind: ValueKind) -> f64 {
        let rel = match kind {
            ValueKind::F32 => self.step_f32,
            _ => self.step_f64,
        };
        rel * x.abs().max(1.0)
    }
}

/// Observes input and output requests and optionally shifts one input.
struct Probe {
    target: Option<usize>,
    delta: f64,
    seen: usize,
    inputs: Vec<(f64, ValueKind)>,
    /// Actual change applied to the target after rounding to its kind.
    applied: f64,
    outputs: Vec<f64>,
}

impl Probe {
    fn new(target: Option<usize>, delta: f64) -> Self {
        Probe {
            target,
            delta,
            seen: 0,
            inputs: Vec::new(),
            applied: 0.0,
            outputs: Vec::new(),
        }
    }
}

fn read(memory: &[u8], addr: u64, kind: ValueKind) -> f64 {
    let a = addr as usize;
    let v = Value::from_le_bytes(kind, &memory[a..a + kind.size()]);
    match kind {
        ValueKind::F32 => v.as_f32() as f64,
        _ => v.as_f64(),
    }
}

impl Instrument for Probe {
    type Shadow = ();

    fn passive(&mut self) {}
    fn read_temp(&mut self, _: TempId) -> Result<(), ExecError> {
        Ok(())
    }
    fn write_temp(&mut self, _: TempId, _: usize, _: &()) -> Result<(), ExecError> {
        Ok(())
    }
    fn read_reg(&mut self, _: u64, _: usize) -> Result<(), ExecError> {
        Ok(())
    }
    fn write_reg(&mut self, _: u64, _: usize, _: &()) -> Result<(), ExecError> {
        Ok(())
    }
    fn read_mem(&mut self, _: u64, _: usize) -> Result<(), ExecError> {
        Ok(())
    }
    fn write_mem(&mut self, _: u64, _: usize, _: &()) -> Result<(), ExecError> {
        Ok(())
    }
    fn op(&mut self, _: usize, _: Opcode, _: &[(Value, ())], _: &Value) -> Result<(), ExecError> {
        Ok(())
    }

    fn input(
        &mut self,
        _: usize,
        memory: &mut [u8],
        addr: u64,
        kind: ValueKind,
    ) -> Result<(), ExecError> {
        let x = read(memory, addr, kind);
        self.inputs.push((x, kind));
        if self.target == Some(self.seen) {
            let shifted = match kind {
                ValueKind::F32 => Value::f32((x + self.delta) as f32),
                _ => Value::f64(x + self.delta),
            };
            let a = addr as usize;
            memory[a..a + kind.size()].copy_from_slice(shifted.bytes());
            self.applied = read(memory, addr, kind) - x;
        }
        self.seen += 1;
        Ok(())
    }

    fn output(
        &mut self,
        _: usize,
        memory: &[u8],
        addr: u64,
        kind: ValueKind,
    ) -> Result<(), ExecError> {
        self.outputs.push(read(memory, addr, kind));
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdResult {
    /// Input values in declaration order, as seen by the unperturbed run.
    pub inputs: Vec<f64>,
    /// Output values of the unperturbed run.
    pub outputs: Vec<f64>,
    /// `jacobian[o][k]`: derivative of output `o` w.r.t. input `columns[k]`.
    pub jacobian: Vec<Vec<f64>>,
    pub columns: Vec<usize>,
}

fn run_probe(
    exec: &Executor<'_>,
    initial: &MachineState,
    probe: &mut Probe,
) -> Result<(), ExecError> {
    let mut st = initial.clone();
    exec.run(&mut st, probe).map(|_| ())
}

/// Central-difference Jacobian w.r.t. the inputs listed in `columns`
/// (positions in dynamic input-request order), or all inputs.
pub fn finite_difference_jacobian(
    program: &Program,
    initial: &MachineState,
    columns: Option<&[usize]>,
    cfg: &FdConfig,
) -> Result<FdResult, ExecError> {
    let exec = Executor::new(program, cfg.exec_config)?;
    let mut base = Probe::new(None, 0.0);
    run_probe(&exec, initial, &mut base)?;
    let columns: Vec<usize> = match columns {
        Some(c) => c
            .iter()
            .copied()
            .filter(|k| *k < base.inputs.len())
            .collect(),
        None => (0..base.inputs.len()).collect(),
    };
    let outputs = base.outputs.len();
    let per_column = cfg.exec.try_map(columns.len(), |c| {
        let k = columns[c];
        let (x, kind) = base.inputs[k];
        let h = cfg.step(x, kind);
        let mut plus = Probe::new(Some(k), h);
        run_probe(&exec, initial, &mut plus)?;
        let mut minus = Probe::new(Some(k), -h);
        run_probe(&exec, initial, &mut minus)?;
        let denom = plus.applied - minus.applied;
        Ok::<_, ExecError>(
            (0..outputs)
                .map(|o| {
                    let (yp, ym) = (plus.outputs.get(o), minus.outputs.get(o));
                    match (yp, ym) {
                        (Some(p), Some(m)) => (p - m) / denom,
                        _ => f64::NAN,
                    }
                })
                .collect::<Vec<f64>>(),
        )
    })?;
    let jacobian = (0..outputs)
        .map(|o| per_column.iter().map(|col| col[o]).collect())
        .collect();
    Ok(FdResult {
        inputs: base.inputs.iter().map(|(x, _)| *x).collect(),
        outputs: base.outputs,
        jacobian,
        columns,
    })
}

/// Gradient of the sum of all outputs w.r.t. every input.
pub fn finite_difference_gradient(
    program: &Program,
    initial: &MachineState,
    cfg: &FdConfig,
) -> Result<Vec<f64>, ExecError> {
    let r = finite_difference_jacobian(program, initial, None, cfg)?;
    Ok((0..r.columns.len())
        .map(|k| r.jacobian.iter().map(|row| row[k]).sum())
        .collect())
}

/// `|a - b| / max(|a|, |b|)`, zero when both are zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Largest elementwise relative error; NaN anywhere makes it NaN.
pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m: f64, (x, y)| {
        let e = rel_err(*x, *y);
        if e.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(e)
        }
    })
}
