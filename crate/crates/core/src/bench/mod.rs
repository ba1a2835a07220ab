//! Burgers' benchmark pipeline and the test oracles it relies on.

pub mod burgers;
pub mod fd;
pub mod random;

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::evaluator::{duality_residual, jacobian_forward, reverse_evaluate, EvalError};
use crate::ir::{interpret_with, ExecConfig, ExecError, Expr, OpClass, Program, Stmt};
use crate::par::Exec;
use crate::recorder::{run_recording_with, RecordStats};
use crate::tape::{tape_stats, TapeError, TapeReader, TAPE_FILE};

pub use burgers::{gen_burgers, initial_state, BurgersConfig, BurgersProgram};
pub use fd::{
    finite_difference_gradient, finite_difference_jacobian, max_rel_err, rel_err, FdConfig,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("generated program exceeds the statement budget of {0}")]
    Budget(usize),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Tape(#[from] TapeError),
}

/// Blocks a straight-line program records if every floating-point
/// operation in it has an active operand.
pub fn count_fp_ops(program: &Program) -> u64 {
    fn walk(e: &Expr) -> u64 {
        let own = |op: &crate::ir::Opcode| match op.class() {
            OpClass::FpUnary { .. } | OpClass::FpBinary(_) => 1,
            OpClass::FpTernary(_) => 2,
            OpClass::Simd { lanes, .. } => lanes as u64,
            OpClass::Bitwise { .. } | OpClass::Passive => 0,
        };
        match e {
            Expr::Const(_) | Expr::RdTmp(_) | Expr::Get { .. } => 0,
            Expr::Load { addr, .. } => walk(addr),
            Expr::Unop(op, a) => own(op) + walk(a),
            Expr::Binop(op, a, b) => own(op) + walk(a) + walk(b),
            Expr::Triop(op, a, b, c) => own(op) + walk(a) + walk(b) + walk(c),
            Expr::Ite(c, a, b) => walk(c) + walk(a) + walk(b),
        }
    }
    program
        .statements
        .iter()
        .map(|s| match s {
            Stmt::WrTmp(_, e) | Stmt::Put { data: e, .. } => walk(e),
            Stmt::Store { addr, data } => walk(addr) + walk(data),
            Stmt::Cas {
                addr,
                expected,
                new,
                ..
            } => walk(addr) + walk(expected) + walk(new),
            Stmt::Exit { guard, .. } => walk(guard),
            Stmt::InputRequest { addr, .. } | Stmt::OutputRequest { addr, .. } => walk(addr),
            Stmt::Label(_) | Stmt::Halt => 0,
        })
        .sum()
}

/// Report fields, serialised under these names.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub native_s: f64,
    pub record_s: f64,
    pub eval_s: f64,
    pub tape_blocks: u64,
    pub tape_bytes: u64,
    pub nonzero_pairs: u64,
    pub max_rel_grad_err: f64,
    pub duality_residual: f64,
}

/// Block accounting: `blocks = 1 + inputs + op_blocks + outputs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Accounting {
    pub blocks: u64,
    pub inputs: u64,
    pub outputs: u64,
    /// Floating-point operations counted in the generated program.
    pub program_ops: u64,
    /// Operation blocks the recorder reports having written.
    pub recorded_ops: u64,
}

impl Accounting {
    pub fn holds(&self) -> bool {
        self.blocks == 1 + self.inputs + self.program_ops + self.outputs
            && self.program_ops == self.recorded_ops
    }
}

#[derive(Clone, Debug)]
pub struct BenchOutcome {
    pub report: BenchReport,
    pub accounting: Accounting,
    pub stats: RecordStats,
    pub warnings: usize,
    pub output: f64,
    pub ad_gradient: Vec<f64>,
    pub fd_gradient: Vec<f64>,
    /// Inputs (by position) compared against finite differences.
    pub fd_columns: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub exec: Exec,
    /// Compare only this many evenly spaced inputs against finite
    /// differences; `None` compares all of them.
    pub fd_inputs: Option<usize>,
    pub exec_config: ExecConfig,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            exec: Exec::default(),
            fd_inputs: None,
            exec_config: ExecConfig {
                max_steps: u64::MAX,
            },
        }
    }
}

/// Native run, recording into `dir`, reverse sweep from the tape file,
/// finite-difference check and duality check.
pub fn run_burgers(
    cfg: &BurgersConfig,
    dir: impl AsRef<Path>,
    opts: &BenchOptions,
) -> Result<BenchOutcome, BenchError> {
    let dir = dir.as_ref();
    let bp = gen_burgers(cfg)?;
    let init = initial_state(cfg, &bp);

    let t = Instant::now();
    let native = interpret_with(&bp.program, init.clone(), opts.exec_config)?;
    let native_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let session = run_recording_with(&bp.program, init.clone(), dir, opts.exec_config)?;
    let record_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let tape = TapeReader::open(dir.join(TAPE_FILE))?;
    let seeds: Vec<_> = session.output_indices.iter().map(|o| (*o, 1.0)).collect();
    let bars = reverse_evaluate(&tape, &seeds)?;
    let eval_s = t.elapsed().as_secs_f64();
    let ad_gradient: Vec<f64> = session
        .input_indices
        .iter()
        .map(|i| bars[i.0 as usize])
        .collect();

    let stats = tape_stats(&tape)?;
    let n = ad_gradient.len();
    let columns: Vec<usize> = match opts.fd_inputs {
        Some(k) if k < n => (0..k).map(|c| c * n / k.max(1)).collect(),
        _ => (0..n).collect(),
    };
    let fd_cfg = FdConfig {
        exec: opts.exec,
        exec_config: opts.exec_config,
        ..FdConfig::default()
    };
    let fd = finite_difference_jacobian(&bp.program, &init, Some(&columns), &fd_cfg)?;
    let fd_gradient: Vec<f64> = (0..fd.columns.len())
        .map(|k| fd.jacobian.iter().map(|row| row[k]).sum())
        .collect();
    let ad_subset: Vec<f64> = columns.iter().map(|c| ad_gradient[*c]).collect();
    let max_rel_grad_err = max_rel_err(&ad_subset, &fd_gradient);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let x_hat: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let y_hat: Vec<f64> = session
        .output_indices
        .iter()
        .map(|_| rng.gen_range(0.5..1.5))
        .collect();
    let duality = duality_residual(
        &tape,
        &session.input_indices,
        &session.output_indices,
        &x_hat,
        &y_hat,
    )?;

    let accounting = Accounting {
        blocks: session.block_count,
        inputs: session.input_indices.len() as u64,
        outputs: session.output_indices.len() as u64,
        program_ops: count_fp_ops(&bp.program),
        recorded_ops: session.stats.op_blocks(),
    };
    debug_assert_eq!(accounting.program_ops, bp.fp_ops);
    let output = native.load_f64(bp.layout.norm).unwrap_or(f64::NAN);

    Ok(BenchOutcome {
        report: BenchReport {
            native_s,
            record_s,
            eval_s,
            tape_blocks: stats.blocks,
            tape_bytes: stats.bytes,
            nonzero_pairs: stats.nonzero_pairs,
            max_rel_grad_err,
            duality_residual: duality,
        },
        accounting,
        stats: session.stats,
        warnings: session.warnings.len(),
        output,
        ad_gradient,
        fd_gradient,
        fd_columns: columns,
    })
}

/// Largest elementwise relative difference between the gradient from one
/// reverse sweep and the one assembled from a forward sweep per input.
pub fn forward_reverse_agreement(
    tape: &TapeReader,
    session_inputs: &[crate::shadow::Index],
    outputs: &[crate::shadow::Index],
    exec: Exec,
) -> Result<f64, BenchError> {
    let blocks = tape.to_vec();
    let seeds: Vec<_> = outputs.iter().map(|o| (*o, 1.0)).collect();
    let bars = reverse_evaluate(blocks.as_slice(), &seeds)?;
    let reverse: Vec<f64> = session_inputs.iter().map(|i| bars[i.0 as usize]).collect();
    let jac = jacobian_forward(&blocks, session_inputs, outputs, exec)?;
    let forward: Vec<f64> = (0..session_inputs.len())
        .map(|k| jac.iter().map(|row| row[k]).sum())
        .collect();
    Ok(max_rel_err(&reverse, &forward))
}

pub fn render_text(cfg: &BurgersConfig, outcome: &BenchOutcome) -> String {
    let r = &outcome.report;
    let a = &outcome.accounting;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "burgers nx={} nt={} dt={} dx={} viscosity={}",
        cfg.nx, cfg.nt, cfg.dt, cfg.dx, cfg.viscosity
    );
    let _ = writeln!(s, "output norm        {}", outcome.output);
    let _ = writeln!(s, "native_s           {:.6}", r.native_s);
    let _ = writeln!(s, "record_s           {:.6}", r.record_s);
    let _ = writeln!(s, "eval_s             {:.6}", r.eval_s);
    let _ = writeln!(s, "tape_blocks        {}", r.tape_blocks);
    let _ = writeln!(s, "tape_bytes         {}", r.tape_bytes);
    let _ = writeln!(s, "nonzero_pairs      {}", r.nonzero_pairs);
    let _ = writeln!(
        s,
        "max_rel_grad_err   {:e} ({} inputs checked)",
        r.max_rel_grad_err,
        outcome.fd_columns.len()
    );
    let _ = writeln!(s, "duality_residual   {:e}", r.duality_residual);
    let _ = writeln!(
        s,
        "accounting         {} = 1 + {} inputs + {} ops + {} outputs ({})",
        a.blocks,
        a.inputs,
        a.program_ops,
        a.outputs,
        if a.holds() { "ok" } else { "MISMATCH" }
    );
    if outcome.warnings > 0 {
        let _ = writeln!(s, "warnings           {}", outcome.warnings);
    }
    s
}
