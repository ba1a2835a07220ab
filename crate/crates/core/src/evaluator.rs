//! Tape evaluation: the reverse (adjoint) sweep and a forward (tangent) sweep
//! over a recorded tape.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::par::Exec;
use crate::shadow::Index;
use crate::tape::{
    read_index_file, BlockSource, TapeBlock, TapeError, TapeReader, INPUTS_FILE, OUTPUTS_FILE,
    TAPE_FILE,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Tape(#[from] TapeError),
    #[error("cannot seed the passive index 0")]
    SeedPassive,
    #[error("seed index {index} out of range (tape has {count} blocks)")]
    SeedOutOfRange { index: u64, count: u64 },
    #[error("invalid seed `{0}`, expected idx=value")]
    BadSeed(String),
}

/// `(index, value)` pairs; a later pair for the same index replaces an
/// earlier one.
pub type Seeds = [(Index, f64)];

pub fn parse_seed(s: &str) -> Result<(Index, f64), EvalError> {
    let bad = || EvalError::BadSeed(s.to_string());
    let (i, v) = s.split_once('=').ok_or_else(bad)?;
    let i = i.trim().parse::<u64>().map_err(|_| bad())?;
    let v = v.trim().parse::<f64>().map_err(|_| bad())?;
    Ok((Index(i), v))
}

fn seeded(count: u64, seeds: &Seeds) -> Result<Vec<f64>, EvalError> {
    let mut v = vec![0.0; count as usize];
    for &(idx, x) in seeds {
        if idx.is_passive() {
            return Err(EvalError::SeedPassive);
        }
        let slot = v.get_mut(idx.0 as usize).ok_or(EvalError::SeedOutOfRange {
            index: idx.0,
            count,
        })?;
        *slot = x;
    }
    Ok(v)
}

fn check_block(i: u64, b: &TapeBlock) -> Result<(), TapeError> {
    for operand in [b.idx1, b.idx2] {
        if operand.0 >= i {
            return Err(TapeError::ForwardReference {
                block: i,
                operand: operand.0,
            });
        }
    }
    Ok(())
}

/// Reverse sweep. Returns the bar value of every index.
pub fn reverse_evaluate<S: BlockSource + ?Sized>(
    tape: &S,
    seeds: &Seeds,
) -> Result<Vec<f64>, EvalError> {
    let count = tape.block_count();
    let mut bars = seeded(count, seeds)?;
    for i in (1..count).rev() {
        let b = tape.block(i)?;
        check_block(i, &b)?;
        let bar = bars[i as usize];
        if b.idx1.is_active() {
            bars[b.idx1.0 as usize] += b.d1 * bar;
        }
        if b.idx2.is_active() {
            bars[b.idx2.0 as usize] += b.d2 * bar;
        }
    }
    Ok(bars)
}

/// Forward sweep. Seeded entries keep their seed; every other entry is
/// computed from its block.
pub fn forward_evaluate<S: BlockSource + ?Sized>(
    tape: &S,
    seeds: &Seeds,
) -> Result<Vec<f64>, EvalError> {
    let count = tape.block_count();
    let mut dots = seeded(count, seeds)?;
    let mut is_seed = vec![false; count as usize];
    for &(idx, _) in seeds {
        is_seed[idx.0 as usize] = true;
    }
    for i in 1..count {
        let b = tape.block(i)?;
        check_block(i, &b)?;
        if is_seed[i as usize] {
            continue;
        }
        let mut dot = 0.0;
        if b.idx1.is_active() {
            dot += b.d1 * dots[b.idx1.0 as usize];
        }
        if b.idx2.is_active() {
            dot += b.d2 * dots[b.idx2.0 as usize];
        }
        dots[i as usize] = dot;
    }
    Ok(dots)
}

/// Jacobian `J[o][i]` = d outputs[o] / d inputs[i], one reverse sweep per output.
pub fn jacobian_reverse(
    tape: &[TapeBlock],
    inputs: &[Index],
    outputs: &[Index],
    exec: Exec,
) -> Result<Vec<Vec<f64>>, EvalError> {
    exec.try_map(outputs.len(), |o| {
        let bars = reverse_evaluate(tape, &[(outputs[o], 1.0)])?;
        Ok(inputs.iter().map(|i| bars[i.0 as usize]).collect())
    })
}

/// Same Jacobian from one forward sweep per input.
pub fn jacobian_forward(
    tape: &[TapeBlock],
    inputs: &[Index],
    outputs: &[Index],
    exec: Exec,
) -> Result<Vec<Vec<f64>>, EvalError> {
    let columns: Vec<Vec<f64>> = exec.try_map(inputs.len(), |i| {
        let dots = forward_evaluate(tape, &[(inputs[i], 1.0)])?;
        Ok::<_, EvalError>(outputs.iter().map(|o| dots[o.0 as usize]).collect())
    })?;
    Ok((0..outputs.len())
        .map(|o| columns.iter().map(|c| c[o]).collect())
        .collect())
}

/// Relative mismatch between `ŷ · (J x̂)` from a forward sweep and
/// `(Jᵀ ŷ) · x̂` from a reverse sweep.
pub fn duality_residual<S: BlockSource + ?Sized>(
    tape: &S,
    inputs: &[Index],
    outputs: &[Index],
    x_hat: &[f64],
    y_hat: &[f64],
) -> Result<f64, EvalError> {
    let fwd_seeds: Vec<_> = inputs.iter().copied().zip(x_hat.iter().copied()).collect();
    let rev_seeds: Vec<_> = outputs.iter().copied().zip(y_hat.iter().copied()).collect();
    let dots = forward_evaluate(tape, &fwd_seeds)?;
    let bars = reverse_evaluate(tape, &rev_seeds)?;
    let lhs: f64 = outputs
        .iter()
        .zip(y_hat)
        .map(|(o, y)| y * dots[o.0 as usize])
        .sum();
    let rhs: f64 = inputs
        .iter()
        .zip(x_hat)
        .map(|(i, x)| x * bars[i.0 as usize])
        .sum();
    let scale = lhs.abs().max(rhs.abs());
    Ok(if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    Reverse,
    Forward,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reverse" => Ok(Mode::Reverse),
            "forward" => Ok(Mode::Forward),
            _ => Err(format!("unknown mode `{s}` (expected reverse or forward)")),
        }
    }
}

/// Evaluates the recording in `dir`. Reverse mode seeds every output with
/// 1.0 and prints `<index> <bar>` per input; forward mode seeds every input
/// and prints `<index> <dot>` per output. Explicit seeds replace the
/// defaults.
pub fn evaluate_dir(dir: impl AsRef<Path>, mode: Mode, seeds: &Seeds) -> Result<String, EvalError> {
    let dir = dir.as_ref();
    let tape = TapeReader::open(dir.join(TAPE_FILE))?;
    let inputs = read_index_file(dir.join(INPUTS_FILE))?;
    let outputs = read_index_file(dir.join(OUTPUTS_FILE))?;
    let (seed_side, report_side) = match mode {
        Mode::Reverse => (&outputs, &inputs),
        Mode::Forward => (&inputs, &outputs),
    };
    let defaults: Vec<(Index, f64)>;
    let seeds = if seeds.is_empty() {
        defaults = seed_side.iter().map(|i| (*i, 1.0)).collect();
        &defaults[..]
    } else {
        seeds
    };
    let values = match mode {
        Mode::Reverse => reverse_evaluate(&tape, seeds)?,
        Mode::Forward => forward_evaluate(&tape, seeds)?,
    };
    Ok(format_values(report_side, &values))
}

/// `<index> <value>` lines, shortest round-trip decimal.
pub fn format_values(indices: &[Index], values: &[f64]) -> String {
    let mut out = String::new();
    for i in indices {
        let _ = writeln!(out, "{} {}", i, values[i.0 as usize]);
    }
    out
}
