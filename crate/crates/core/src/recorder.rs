//! Recording instrumentation: runs a program through the shared executor,
//! propagates indices through the shadow layers and appends one tape block
//! per active elementary operation.

use std::fmt;
use std::path::Path;

use crate::ir::{
    ExecConfig, ExecError, Executor, FloatWidth, Instrument, MachineState, OpClass, Opcode,
    Program, TempId, Value, ValueKind, MAX_VALUE_BYTES,
};
use crate::shadow::{Index, Location, ShadowBytes, ShadowStore};
use crate::tape::{
    write_index_file, TapeBlock, TapeError, TapeSink, TapeWriter, INPUTS_FILE, OUTPUTS_FILE,
    TAPE_FILE,
};

/// Partial derivatives of a scalar binary operation w.r.t. both operands.
pub fn binary_partials(op: Opcode, a1: f64, a2: f64) -> (f64, f64) {
    use Opcode::*;
    match op {
        AddF64 | AddF32 => (1.0, 1.0),
        SubF64 | SubF32 => (1.0, -1.0),
        MulF64 | MulF32 => (a2, a1),
        DivF64 | DivF32 => (1.0 / a2, -a1 / (a2 * a2)),
        PowF64 => (a2 * a1.powf(a2 - 1.0), a1.powf(a2) * a1.ln()),
        _ => unreachable!("{op} has no binary partial rule"),
    }
}

/// Derivative of a unary operation (math intrinsics and F32/F64 conversions).
pub fn unary_partial(op: Opcode, a: f64) -> f64 {
    use Opcode::*;
    match op {
        SqrtF64 | SqrtF32 => 0.5 / a.sqrt(),
        SinF64 => a.cos(),
        CosF64 => -a.sin(),
        ExpF64 => a.exp(),
        LogF64 => 1.0 / a,
        FabsF64 => sign_partial(a.is_sign_negative()),
        F32toF64 | F64toF32 => 1.0,
        _ => unreachable!("{op} has no unary partial rule"),
    }
}

/// Partials of `a1 * a2 + a3`.
pub fn ternary_partials(op: Opcode, a1: f64, a2: f64, _a3: f64) -> (f64, f64, f64) {
    match op {
        Opcode::MAddF64 => (a2, a1, 1.0),
        _ => unreachable!("{op} has no ternary partial rule"),
    }
}

fn sign_partial(negative: bool) -> f64 {
    if negative {
        -1.0
    } else {
        1.0
    }
}

/// A bitwise operation on an active operand that matched no known pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Warning {
    pub stmt: usize,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unhandled bit-trick at stmt {}", self.stmt)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitwiseOutcome {
    Passive,
    Recorded(Index),
    Unhandled,
}

impl BitwiseOutcome {
    pub fn index(self) -> Index {
        match self {
            BitwiseOutcome::Recorded(i) => i,
            _ => Index::PASSIVE,
        }
    }
}

/// Blocks appended so far, by origin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RecordStats {
    pub unary: u64,
    pub binary: u64,
    /// Blocks from ternary operations (two per active operation).
    pub ternary: u64,
    pub simd_lanes: u64,
    pub bit_tricks: u64,
    pub inputs: u64,
    pub outputs: u64,
}

impl RecordStats {
    /// Blocks produced by floating-point and bit-trick operations.
    pub fn op_blocks(&self) -> u64 {
        self.unary + self.binary + self.ternary + self.simd_lanes + self.bit_tricks
    }

    pub fn total_blocks(&self) -> u64 {
        self.op_blocks() + self.inputs + self.outputs
    }
}

/// The recording instrumentation over any tape sink.
pub struct Recorder<T: TapeSink> {
    sink: T,
    shadow: ShadowStore,
    inputs: Vec<Index>,
    outputs: Vec<Index>,
    output_values: Vec<f64>,
    warnings: Vec<Warning>,
    stats: RecordStats,
}

impl<T: TapeSink> Recorder<T> {
    pub fn new(sink: T, program: &Program) -> Self {
        Recorder {
            sink,
            shadow: ShadowStore::new(
                program.memory_size,
                program.register_size,
                program.temp_count(),
            ),
            inputs: Vec::new(),
            outputs: Vec::new(),
            output_values: Vec::new(),
            warnings: Vec::new(),
            stats: RecordStats::default(),
        }
    }

    pub fn shadow(&self) -> &ShadowStore {
        &self.shadow
    }

    pub fn shadow_mut(&mut self) -> &mut ShadowStore {
        &mut self.shadow
    }

    pub fn sink(&self) -> &T {
        &self.sink
    }

    pub fn inputs(&self) -> &[Index] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Index] {
        &self.outputs
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn stats(&self) -> RecordStats {
        self.stats
    }

    /// Executes `program` from `state.pc`, recording as it goes.
    pub fn run(
        &mut self,
        program: &Program,
        state: &mut MachineState,
        config: ExecConfig,
    ) -> Result<u64, ExecError> {
        let exec = Executor::new(program, config)?;
        self.shadow.ensure_temps(program.temp_count());
        exec.run(state, self)
    }

    fn append(&mut self, i1: Index, i2: Index, d1: f64, d2: f64) -> Result<Index, TapeError> {
        self.sink.append(TapeBlock::new(i1, i2, d1, d2))
    }

    fn record_binary(
        &mut self,
        op: Opcode,
        a1: f64,
        a2: f64,
        i1: Index,
        i2: Index,
    ) -> Result<Index, TapeError> {
        if i1.is_passive() && i2.is_passive() {
            return Ok(Index::PASSIVE);
        }
        let (d1, d2) = binary_partials(op, a1, a2);
        self.append(i1, i2, d1, d2)
    }

    fn record_unary(&mut self, op: Opcode, a: f64, i: Index) -> Result<Index, TapeError> {
        if i.is_passive() {
            return Ok(Index::PASSIVE);
        }
        self.stats.unary += 1;
        self.append(i, Index::PASSIVE, unary_partial(op, a), 0.0)
    }

    fn record_ternary(
        &mut self,
        op: Opcode,
        a: [f64; 3],
        i: [Index; 3],
    ) -> Result<Index, TapeError> {
        if i.iter().all(|x| x.is_passive()) {
            return Ok(Index::PASSIVE);
        }
        let (d1, d2, d3) = ternary_partials(op, a[0], a[1], a[2]);
        let m = self.append(i[0], i[1], d1, d2)?;
        let r = self.append(m, i[2], 1.0, d3)?;
        self.stats.ternary += 2;
        Ok(r)
    }

    fn record_bitwise(
        &mut self,
        op: Opcode,
        width: FloatWidth,
        v: [u64; 2],
        i: [Index; 2],
    ) -> Result<BitwiseOutcome, TapeError> {
        let bits = 8 * width.bytes() as u32;
        let sign = 1u64 << (bits - 1);
        let all = if bits == 64 {
            u64::MAX
        } else {
            (1u64 << bits) - 1
        };
        let (x, ix, mask) = match (i[0].is_active(), i[1].is_active()) {
            (false, false) => return Ok(BitwiseOutcome::Passive),
            (true, false) => (v[0], i[0], v[1]),
            (false, true) => (v[1], i[1], v[0]),
            (true, true) => return Ok(BitwiseOutcome::Unhandled),
        };
        let partial = match op {
            Opcode::Xor32 | Opcode::Xor64 if mask == sign => -1.0,
            Opcode::And32 | Opcode::And64 if mask == all & !sign => sign_partial(x & sign != 0),
            _ => return Ok(BitwiseOutcome::Unhandled),
        };
        self.stats.bit_tricks += 1;
        Ok(BitwiseOutcome::Recorded(self.append(
            ix,
            Index::PASSIVE,
            partial,
            0.0,
        )?))
    }

    /// Scalar binary floating-point operation on values with indices `i1`, `i2`.
    pub fn handle_binary_fp(
        &mut self,
        op: Opcode,
        v1: Value,
        v2: Value,
        i1: Index,
        i2: Index,
    ) -> Result<(Value, Index), TapeError> {
        let OpClass::FpBinary(w) = op.class() else {
            panic!("{op} is not a scalar binary floating-point operation");
        };
        let value = op.eval(&[v1, v2]);
        let idx = self.record_binary(op, widen(&v1, w), widen(&v2, w), i1, i2)?;
        if idx.is_active() {
            self.stats.binary += 1;
        }
        Ok((value, idx))
    }

    pub fn handle_unary_fp(
        &mut self,
        op: Opcode,
        v: Value,
        i: Index,
    ) -> Result<(Value, Index), TapeError> {
        let OpClass::FpUnary { input, .. } = op.class() else {
            panic!("{op} is not a unary floating-point operation");
        };
        let value = op.eval(&[v]);
        Ok((value, self.record_unary(op, widen(&v, input), i)?))
    }

    pub fn handle_ternary_fp(
        &mut self,
        op: Opcode,
        v: [Value; 3],
        i: [Index; 3],
    ) -> Result<(Value, Index), TapeError> {
        let OpClass::FpTernary(w) = op.class() else {
            panic!("{op} is not a ternary floating-point operation");
        };
        let value = op.eval(&v);
        let a = [widen(&v[0], w), widen(&v[1], w), widen(&v[2], w)];
        Ok((value, self.record_ternary(op, a, i)?))
    }

    /// Lane-wise operation; `i1`/`i2` hold one index per lane.
    pub fn handle_simd(
        &mut self,
        op: Opcode,
        v1: Value,
        v2: Value,
        i1: &[Index],
        i2: &[Index],
    ) -> Result<(Value, Vec<Index>), TapeError> {
        let OpClass::Simd { lane, lanes } = op.class() else {
            panic!("{op} is not a SIMD operation");
        };
        let lane_op = op.lane_op().expect("SIMD opcodes have a lane opcode");
        let value = op.eval(&[v1, v2]);
        let mut out = Vec::with_capacity(lanes);
        for l in 0..lanes {
            let idx = self.record_binary(
                lane_op,
                lane_value(&v1, lane, l),
                lane_value(&v2, lane, l),
                i1[l],
                i2[l],
            )?;
            if idx.is_active() {
                self.stats.simd_lanes += 1;
            }
            out.push(idx);
        }
        Ok((value, out))
    }

    /// Bitwise operation on 32/64-bit operands. Sign-flip and sign-clear
    /// masks applied to an active operand record negation and absolute
    /// value; any other use of an active operand is reported as unhandled.
    pub fn handle_bitwise(
        &mut self,
        op: Opcode,
        v1: Value,
        v2: Value,
        i1: Index,
        i2: Index,
    ) -> Result<(Value, BitwiseOutcome), TapeError> {
        let OpClass::Bitwise { width } = op.class() else {
            panic!("{op} is not a bitwise operation");
        };
        let value = op.eval(&[v1, v2]);
        Ok((
            value,
            self.record_bitwise(op, width, [v1.bits(), v2.bits()], [i1, i2])?,
        ))
    }

    /// Declares the `kind` value at `addr` an input and returns its index.
    pub fn declare_input(&mut self, addr: u64, kind: ValueKind) -> Result<Index, ExecError> {
        let k = self.append(Index::PASSIVE, Index::PASSIVE, 0.0, 0.0)?;
        self.shadow
            .write_index(Location::Memory(addr), kind.size(), k)?;
        self.inputs.push(k);
        self.stats.inputs += 1;
        Ok(k)
    }

    /// Declares the `kind` value at `addr` an output; records a copy of it
    /// and returns the copy's index. The shadow at `addr` is left unchanged.
    pub fn declare_output(&mut self, addr: u64, kind: ValueKind) -> Result<Index, ExecError> {
        let i = self
            .shadow
            .read_index(Location::Memory(addr), kind.size())?;
        let k = self.append(i, Index::PASSIVE, 1.0, 0.0)?;
        self.outputs.push(k);
        self.stats.outputs += 1;
        Ok(k)
    }

    fn into_parts(self) -> (T, RecordParts) {
        (
            self.sink,
            RecordParts {
                shadow: self.shadow,
                inputs: self.inputs,
                outputs: self.outputs,
                output_values: self.output_values,
                warnings: self.warnings,
                stats: self.stats,
            },
        )
    }
}

struct RecordParts {
    shadow: ShadowStore,
    inputs: Vec<Index>,
    outputs: Vec<Index>,
    output_values: Vec<f64>,
    warnings: Vec<Warning>,
    stats: RecordStats,
}

fn widen(v: &Value, w: FloatWidth) -> f64 {
    match w {
        FloatWidth::F64 => v.as_f64(),
        FloatWidth::F32 => v.as_f32() as f64,
    }
}

fn lane_value(v: &Value, w: FloatWidth, lane: usize) -> f64 {
    match w {
        FloatWidth::F64 => v.f64_lane(lane),
        FloatWidth::F32 => v.f32_lane(lane) as f64,
    }
}

impl<T: TapeSink> Instrument for Recorder<T> {
    type Shadow = ShadowBytes;

    #[inline]
    fn passive(&mut self) -> ShadowBytes {
        ShadowBytes::ZERO
    }

    fn read_temp(&mut self, t: TempId) -> Result<ShadowBytes, ExecError> {
        Ok(self
            .shadow
            .read_bytes(Location::Temp { id: t, offset: 0 }, MAX_VALUE_BYTES)?)
    }

    fn write_temp(&mut self, t: TempId, _size: usize, s: &ShadowBytes) -> Result<(), ExecError> {
        // Whole slot: clears shadow left behind by an earlier, wider value.
        Ok(self
            .shadow
            .write_bytes(Location::Temp { id: t, offset: 0 }, s, MAX_VALUE_BYTES)?)
    }

    fn read_reg(&mut self, offset: u64, size: usize) -> Result<ShadowBytes, ExecError> {
        Ok(self.shadow.read_bytes(Location::Register(offset), size)?)
    }

    fn write_reg(&mut self, offset: u64, size: usize, s: &ShadowBytes) -> Result<(), ExecError> {
        Ok(self
            .shadow
            .write_bytes(Location::Register(offset), s, size)?)
    }

    fn read_mem(&mut self, addr: u64, size: usize) -> Result<ShadowBytes, ExecError> {
        Ok(self.shadow.read_bytes(Location::Memory(addr), size)?)
    }

    fn write_mem(&mut self, addr: u64, size: usize, s: &ShadowBytes) -> Result<(), ExecError> {
        Ok(self.shadow.write_bytes(Location::Memory(addr), s, size)?)
    }

    fn op(
        &mut self,
        stmt: usize,
        op: Opcode,
        args: &[(Value, ShadowBytes)],
        result: &Value,
    ) -> Result<ShadowBytes, ExecError> {
        let idx = |k: usize, w: FloatWidth| args[k].1.index_at(0, w.bytes());
        let out = match op.class() {
            OpClass::FpBinary(w) => {
                let i = self.record_binary(
                    op,
                    widen(&args[0].0, w),
                    widen(&args[1].0, w),
                    idx(0, w),
                    idx(1, w),
                )?;
                if i.is_active() {
                    self.stats.binary += 1;
                }
                ShadowBytes::with_index(result.size(), i)
            }
            OpClass::FpUnary { input, .. } => {
                let i = self.record_unary(op, widen(&args[0].0, input), idx(0, input))?;
                ShadowBytes::with_index(result.size(), i)
            }
            OpClass::FpTernary(w) => {
                let a = [0, 1, 2].map(|k| widen(&args[k].0, w));
                let i = self.record_ternary(op, a, [idx(0, w), idx(1, w), idx(2, w)])?;
                ShadowBytes::with_index(result.size(), i)
            }
            OpClass::Simd { lane, lanes } => {
                let lane_op = op.lane_op().expect("SIMD opcodes have a lane opcode");
                let size = lane.bytes();
                let mut s = ShadowBytes::ZERO;
                for l in 0..lanes {
                    let i = self.record_binary(
                        lane_op,
                        lane_value(&args[0].0, lane, l),
                        lane_value(&args[1].0, lane, l),
                        args[0].1.index_at(l * size, size),
                        args[1].1.index_at(l * size, size),
                    )?;
                    if i.is_active() {
                        self.stats.simd_lanes += 1;
                    }
                    s.set_index(l * size, size, i);
                }
                s
            }
            OpClass::Bitwise { width } => {
                let outcome = self.record_bitwise(
                    op,
                    width,
                    [args[0].0.bits(), args[1].0.bits()],
                    [idx(0, width), idx(1, width)],
                )?;
                if outcome == BitwiseOutcome::Unhandled {
                    self.warnings.push(Warning { stmt });
                }
                ShadowBytes::with_index(result.size(), outcome.index())
            }
            OpClass::Passive => ShadowBytes::ZERO,
        };
        Ok(out)
    }

    fn input(
        &mut self,
        _stmt: usize,
        _memory: &mut [u8],
        addr: u64,
        kind: ValueKind,
    ) -> Result<(), ExecError> {
        self.declare_input(addr, kind).map(|_| ())
    }

    fn output(
        &mut self,
        _stmt: usize,
        memory: &[u8],
        addr: u64,
        kind: ValueKind,
    ) -> Result<(), ExecError> {
        let a = addr as usize;
        let v = Value::from_le_bytes(kind, &memory[a..a + kind.size()]);
        self.output_values.push(match kind {
            ValueKind::F32 => v.as_f32() as f64,
            _ => v.as_f64(),
        });
        self.declare_output(addr, kind).map(|_| ())
    }
}

/// Everything a finished recording leaves behind besides the tape itself.
#[derive(Debug)]
pub struct RecordingSession {
    pub machine: MachineState,
    pub shadow: ShadowStore,
    pub input_indices: Vec<Index>,
    pub output_indices: Vec<Index>,
    /// Value of each output at the time it was declared.
    pub output_values: Vec<f64>,
    pub warnings: Vec<Warning>,
    pub stats: RecordStats,
    /// Blocks on the tape, including the dummy block.
    pub block_count: u64,
    pub steps: u64,
}

/// Records `program` into `sink`, returning the session and the sink.
pub fn record_into<T: TapeSink>(
    program: &Program,
    initial: MachineState,
    sink: T,
    config: ExecConfig,
) -> Result<(RecordingSession, T), ExecError> {
    let mut recorder = Recorder::new(sink, program);
    let mut machine = initial;
    let steps = recorder.run(program, &mut machine, config)?;
    let block_count = recorder.sink.block_count();
    let (sink, parts) = recorder.into_parts();
    Ok((
        RecordingSession {
            machine,
            shadow: parts.shadow,
            input_indices: parts.inputs,
            output_indices: parts.outputs,
            output_values: parts.output_values,
            warnings: parts.warnings,
            stats: parts.stats,
            block_count,
            steps,
        },
        sink,
    ))
}

/// Records `program` and writes `tape.bin`, `inputs.idx` and `outputs.idx`
/// into `out_dir`, creating the directory if needed.
pub fn run_recording(
    program: &Program,
    initial: MachineState,
    out_dir: impl AsRef<Path>,
) -> Result<RecordingSession, ExecError> {
    run_recording_with(program, initial, out_dir, ExecConfig::default())
}

pub fn run_recording_with(
    program: &Program,
    initial: MachineState,
    out_dir: impl AsRef<Path>,
    config: ExecConfig,
) -> Result<RecordingSession, ExecError> {
    let dir = out_dir.as_ref();
    // Reject invalid programs before touching the file system.
    Executor::new(program, config)?;
    std::fs::create_dir_all(dir)?;
    let writer = TapeWriter::open(dir.join(TAPE_FILE))?;
    let (session, writer) = record_into(program, initial, writer, config)?;
    writer.close()?;
    write_index_file(dir.join(INPUTS_FILE), &session.input_indices)?;
    write_index_file(dir.join(OUTPUTS_FILE), &session.output_indices)?;
    Ok(session)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{interpret, parse_program};
    use crate::tape::{MemoryTape, TapeReader};

    const FIG1: &str = ".memory 24\n\
        input Const I64 0x0 F64\n\
        input Const I64 0x8 F64\n\
        t0 = load F64 Const I64 0x0\n\
        t1 = load F64 Const I64 0x8\n\
        t2 = Binop MulF64 t0 t1\n\
        store Const I64 0x10 t2\n\
        output Const I64 0x10 F64\n\
        halt";

    fn record(src: &str, presets: &[(u64, f64)]) -> (RecordingSession, MemoryTape) {
        let p = parse_program(src).unwrap();
        let mut st = MachineState::for_program(&p);
        for (a, x) in presets {
            st.store_f64(*a, *x).unwrap();
        }
        record_into(&p, st, MemoryTape::new(), ExecConfig::default()).unwrap()
    }

    fn blk(i1: u64, i2: u64, d1: f64, d2: f64) -> TapeBlock {
        TapeBlock::new(Index(i1), Index(i2), d1, d2)
    }

    fn assert_blocks(tape: &MemoryTape, expected: &[TapeBlock]) {
        assert_eq!(tape.blocks().len(), expected.len(), "{:?}", tape.blocks());
        for (got, want) in tape.blocks().iter().zip(expected) {
            assert!(got.bit_eq(want), "{got:?} != {want:?}");
        }
    }

    fn rec() -> Recorder<MemoryTape> {
        Recorder::new(MemoryTape::with_base(16), &Program::default())
    }

    #[test]
    fn two_input_product_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = parse_program(FIG1).unwrap();
        let mut st = MachineState::for_program(&p);
        st.store_f64(0, 3.0).unwrap();
        st.store_f64(8, -4.0).unwrap();
        let s = run_recording(&p, st, dir.path()).unwrap();
        assert_eq!(s.machine.load_f64(16), Some(-12.0));
        let tape = TapeReader::open(dir.path().join(TAPE_FILE)).unwrap();
        let blocks = tape.to_vec();
        let expected = [
            TapeBlock::ZERO,
            TapeBlock::ZERO,
            TapeBlock::ZERO,
            blk(1, 2, -4.0, 3.0),
            blk(3, 0, 1.0, 0.0),
        ];
        assert_eq!(blocks.len(), 5);
        for (g, w) in blocks.iter().zip(&expected) {
            assert!(g.bit_eq(w));
        }
        assert_eq!(
            std::fs::read_to_string(dir.path().join(INPUTS_FILE)).unwrap(),
            "1\n2\n"
        );
        assert_eq!(
            std::fs::read_to_string(dir.path().join(OUTPUTS_FILE)).unwrap(),
            "4\n"
        );
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn no_inputs_lone_output() {
        let (s, t) = record(".memory 8\noutput Const I64 0x0 F64\nhalt", &[(0, 2.0)]);
        assert_blocks(&t, &[TapeBlock::ZERO, blk(0, 0, 1.0, 0.0)]);
        assert_eq!(s.output_indices, vec![Index(1)]);
        assert!(s.input_indices.is_empty());
    }

    #[test]
    fn empty_program_dummy_only() {
        let (s, t) = record(".memory 8\nhalt", &[]);
        assert_blocks(&t, &[TapeBlock::ZERO]);
        assert_eq!(s.block_count, 1);
    }

    #[test]
    fn passive_binary_records_nothing() {
        let mut r = rec();
        let (v, i) = r
            .handle_binary_fp(
                Opcode::MulF64,
                Value::f64(2.0),
                Value::f64(6.3),
                Index(0),
                Index(0),
            )
            .unwrap();
        assert_eq!(v.as_f64(), 12.6);
        assert_eq!(i, Index(0));
        assert!(r.sink().blocks().is_empty());
    }

    #[test]
    fn binary_partials_stored_for_passive_operand() {
        let mut r = rec();
        let (_, i) = r
            .handle_binary_fp(
                Opcode::MulF64,
                Value::f64(1.0),
                Value::f64(2.5),
                Index(0),
                Index(9),
            )
            .unwrap();
        assert_eq!(i, Index(16));
        assert_blocks(r.sink(), &[blk(0, 9, 2.5, 1.0)]);
    }

    #[test]
    fn division_partials() {
        let mut r = rec();
        r.handle_binary_fp(
            Opcode::DivF64,
            Value::f64(1.0),
            Value::f64(4.0),
            Index(5),
            Index(0),
        )
        .unwrap();
        assert_blocks(r.sink(), &[blk(5, 0, 0.25, -0.0625)]);
    }

    #[test]
    fn unary_rules() {
        let mut r = rec();
        r.handle_unary_fp(Opcode::SqrtF64, Value::f64(4.0), Index(7))
            .unwrap();
        r.handle_unary_fp(Opcode::SinF64, Value::f64(0.0), Index(3))
            .unwrap();
        let (_, i) = r
            .handle_unary_fp(Opcode::ExpF64, Value::f64(1.0), Index(0))
            .unwrap();
        assert_eq!(i, Index(0));
        r.handle_unary_fp(Opcode::FabsF64, Value::f64(0.0), Index(2))
            .unwrap();
        r.handle_unary_fp(Opcode::FabsF64, Value::f64(-0.0), Index(2))
            .unwrap();
        r.handle_unary_fp(Opcode::F32toF64, Value::f32(1.5), Index(4))
            .unwrap();
        assert_blocks(
            r.sink(),
            &[
                blk(7, 0, 0.25, 0.0),
                blk(3, 0, 1.0, 0.0),
                blk(2, 0, 1.0, 0.0),
                blk(2, 0, -1.0, 0.0),
                blk(4, 0, 1.0, 0.0),
            ],
        );
    }

    #[test]
    fn sqrt_at_zero_is_infinite_partial() {
        assert_eq!(unary_partial(Opcode::SqrtF64, 0.0), f64::INFINITY);
    }

    #[test]
    fn pow_partials() {
        let (d1, d2) = binary_partials(Opcode::PowF64, 2.0, 3.0);
        assert_eq!(d1, 12.0);
        assert!((d2 - 8.0 * 2f64.ln()).abs() < 1e-15);
        assert!(binary_partials(Opcode::PowF64, -2.0, 3.0).1.is_nan());
    }

    #[test]
    fn ternary_two_blocks() {
        let mut r = rec();
        let (v, i) = r
            .handle_ternary_fp(
                Opcode::MAddF64,
                [Value::f64(2.0), Value::f64(5.0), Value::f64(1.0)],
                [Index(1), Index(2), Index(0)],
            )
            .unwrap();
        assert_eq!(v.as_f64(), 11.0);
        assert_eq!(i, Index(17));
        assert_blocks(r.sink(), &[blk(1, 2, 5.0, 2.0), blk(16, 0, 1.0, 1.0)]);
    }

    #[test]
    fn ternary_inert_first_block() {
        let mut r = rec();
        r.handle_ternary_fp(
            Opcode::MAddF64,
            [Value::f64(2.0), Value::f64(5.0), Value::f64(1.0)],
            [Index(0), Index(0), Index(3)],
        )
        .unwrap();
        assert_blocks(r.sink(), &[blk(0, 0, 5.0, 2.0), blk(16, 3, 1.0, 1.0)]);
        let mut r = rec();
        let (_, i) = r
            .handle_ternary_fp(Opcode::MAddF64, [Value::f64(1.0); 3], [Index(0); 3])
            .unwrap();
        assert_eq!(i, Index(0));
        assert!(r.sink().blocks().is_empty());
    }

    #[test]
    fn simd_lanes_in_order() {
        let mut r = rec();
        let (v, idx) = r
            .handle_simd(
                Opcode::Add64Fx2,
                Value::f64x(&[1.0, 2.0]),
                Value::f64x(&[3.0, 4.0]),
                &[Index(1), Index(2)],
                &[Index(3), Index(4)],
            )
            .unwrap();
        assert_eq!((v.f64_lane(0), v.f64_lane(1)), (4.0, 6.0));
        assert_eq!(idx, vec![Index(16), Index(17)]);
        assert_blocks(r.sink(), &[blk(1, 3, 1.0, 1.0), blk(2, 4, 1.0, 1.0)]);
        let (_, idx) = r
            .handle_simd(
                Opcode::Mul64Fx2,
                Value::f64x(&[1.0, 2.0]),
                Value::f64x(&[3.0, 4.0]),
                &[Index(0); 2],
                &[Index(0); 2],
            )
            .unwrap();
        assert_eq!(idx, vec![Index(0); 2]);
        assert_eq!(r.sink().blocks().len(), 2);
    }

    #[test]
    fn bit_trick_rules() {
        let mut r = rec();
        let neg12 = Value::f64(-12.0);
        let (v, o) = r
            .handle_bitwise(
                Opcode::Xor64,
                neg12,
                Value::i64(1 << 63),
                Index(3),
                Index(0),
            )
            .unwrap();
        assert_eq!(v.as_f64(), 12.0);
        assert_eq!(o, BitwiseOutcome::Recorded(Index(16)));
        let (v, _) = r
            .handle_bitwise(
                Opcode::And64,
                neg12,
                Value::i64(!(1 << 63)),
                Index(3),
                Index(0),
            )
            .unwrap();
        assert_eq!(v.as_f64(), 12.0);
        let (_, o) = r
            .handle_bitwise(Opcode::Xor64, neg12, Value::f64(1.0), Index(3), Index(4))
            .unwrap();
        assert_eq!(o, BitwiseOutcome::Unhandled);
        let (_, o) = r
            .handle_bitwise(Opcode::Or64, neg12, Value::i64(1 << 63), Index(3), Index(0))
            .unwrap();
        assert_eq!(o, BitwiseOutcome::Unhandled);
        let (_, o) = r
            .handle_bitwise(
                Opcode::Xor64,
                neg12,
                Value::i64(1 << 63),
                Index(0),
                Index(0),
            )
            .unwrap();
        assert_eq!(o, BitwiseOutcome::Passive);
        let (v, _) = r
            .handle_bitwise(
                Opcode::Xor32,
                Value::i32(0x8000_0000),
                Value::f32(2.0),
                Index(0),
                Index(5),
            )
            .unwrap();
        assert_eq!(v.as_f32(), -2.0);
        assert_blocks(
            r.sink(),
            &[
                blk(3, 0, -1.0, 0.0),
                blk(3, 0, -1.0, 0.0),
                blk(5, 0, -1.0, 0.0),
            ],
        );
    }

    #[test]
    fn unhandled_bit_trick_warns_once() {
        let (s, t) = record(
            ".memory 16\n\
             input Const I64 0x0 F64\n\
             t0 = load F64 Const I64 0x0\n\
             t1 = Binop Or64 t0 Const I64 0x8000000000000000\n\
             store Const I64 0x8 t1\n\
             output Const I64 0x8 F64\n\
             halt",
            &[(0, 1.5)],
        );
        assert_eq!(s.warnings, vec![Warning { stmt: 2 }]);
        assert_eq!(s.warnings[0].to_string(), "unhandled bit-trick at stmt 2");
        assert_blocks(&t, &[TapeBlock::ZERO, TapeBlock::ZERO, blk(0, 0, 1.0, 0.0)]);
    }

    #[test]
    fn ite_selects_index() {
        let (_, t) = record(
            ".memory 32\n\
             input Const I64 0x0 F64\n\
             input Const I64 0x8 F64\n\
             t0 = ITE Const I8 0x1 (load F64 Const I64 0x0) (load F64 Const I64 0x8)\n\
             t1 = ITE Const I8 0x0 (load F64 Const I64 0x0) (load F64 Const I64 0x8)\n\
             store Const I64 0x10 t0\n\
             store Const I64 0x18 t1\n\
             output Const I64 0x10 F64\n\
             output Const I64 0x18 F64\n\
             halt",
            &[(0, 5.0), (8, 7.0)],
        );
        assert_blocks(
            &t,
            &[
                TapeBlock::ZERO,
                TapeBlock::ZERO,
                TapeBlock::ZERO,
                blk(1, 0, 1.0, 0.0),
                blk(2, 0, 1.0, 0.0),
            ],
        );
    }

    #[test]
    fn cas_moves_shadow_on_success_only() {
        let (s, _) = record(
            ".memory 24\n\
             input Const I64 0x10 F64\n\
             input Const I64 0x0 F64\n\
             input Const I64 0x8 F64\n\
             cas Const I64 0x0 Const F64 1.0 (load F64 Const I64 0x10) -> t0\n\
             cas Const I64 0x8 Const F64 3.0 (load F64 Const I64 0x10) -> t1\n\
             halt",
            &[(0, 1.0), (8, 1.0), (16, 2.0)],
        );
        let at = |a| s.shadow.read_index(Location::Memory(a), 8).unwrap();
        assert_eq!(at(0), Index(1));
        assert_eq!(at(8), Index(3));
        assert_eq!(s.machine.load_f64(0), Some(2.0));
    }

    #[test]
    fn cas_with_passive_new_clears_index() {
        let (s, _) = record(
            ".memory 8\n\
             input Const I64 0x0 F64\n\
             cas Const I64 0x0 Const F64 1.0 Const F64 2.0 -> t0\n\
             halt",
            &[(0, 1.0)],
        );
        assert_eq!(
            s.shadow.read_index(Location::Memory(0), 8).unwrap(),
            Index(0)
        );
    }

    #[test]
    fn duplicate_declarations() {
        let (s, t) = record(
            ".memory 8\n\
             input Const I64 0x0 F64\n\
             input Const I64 0x0 F64\n\
             output Const I64 0x0 F64\n\
             output Const I64 0x0 F64\n\
             halt",
            &[(0, 1.0)],
        );
        assert_eq!(s.input_indices, vec![Index(1), Index(2)]);
        assert_eq!(s.output_indices, vec![Index(3), Index(4)]);
        assert_eq!(
            s.shadow.read_index(Location::Memory(0), 8).unwrap(),
            Index(2)
        );
        assert_eq!(t.blocks()[3].idx1, Index(2));
        assert_eq!(t.blocks()[4].idx1, Index(2));
    }

    #[test]
    fn conversions_and_passive_ops() {
        let (s, t) = record(
            ".memory 32\n\
             input Const I64 0x0 F64\n\
             t0 = Unop F64toF32 (load F64 Const I64 0x0)\n\
             t1 = Unop F32toF64 t0\n\
             t2 = Unop I64toF64 (Unop F64toI64 t1)\n\
             t3 = Binop AddF64 t1 t2\n\
             store Const I64 0x8 t3\n\
             output Const I64 0x8 F64\n\
             halt",
            &[(0, 2.5)],
        );
        assert_eq!(s.stats.unary, 2);
        assert_blocks(
            &t,
            &[
                TapeBlock::ZERO,
                TapeBlock::ZERO,
                blk(1, 0, 1.0, 0.0),
                blk(2, 0, 1.0, 0.0),
                blk(3, 0, 1.0, 1.0),
                blk(4, 0, 1.0, 0.0),
            ],
        );
    }

    #[test]
    fn recording_preserves_values() {
        let p = parse_program(FIG1).unwrap();
        let mut st = MachineState::for_program(&p);
        st.store_f64(0, 3.0).unwrap();
        st.store_f64(8, -4.0).unwrap();
        let plain = interpret(&p, st.clone()).unwrap();
        let (s, _) = record_into(&p, st, MemoryTape::new(), ExecConfig::default()).unwrap();
        assert_eq!(s.machine, plain);
    }

    #[test]
    fn stats_account_for_all_blocks() {
        let (s, t) = record(FIG1, &[(0, 3.0), (8, -4.0)]);
        assert_eq!(s.stats.total_blocks() + 1, t.blocks().len() as u64);
        assert_eq!(s.block_count, 5);
    }
}
