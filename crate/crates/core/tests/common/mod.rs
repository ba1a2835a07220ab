//! Shared fixtures for the integration tests: the worked examples and the
//! regression program suite with its finite-difference check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use tapevm::bench::fd::{finite_difference_jacobian, rel_err, FdConfig};
use tapevm::evaluator::{jacobian_forward, jacobian_reverse};
use tapevm::ir::{parse_program, ExecConfig, Expr, MachineState, Opcode, Program, Stmt, Value};
use tapevm::par::Exec;
use tapevm::record_into;
use tapevm::tape::MemoryTape;

/// Two inputs, one product, one output.
pub const TWO_INPUT_PRODUCT: &str = "\
.memory 24
input Const I64 0x0 F64
input Const I64 0x8 F64
t0 = load F64 Const I64 0x0
t1 = load F64 Const I64 0x8
t2 = Binop MulF64 t0 t1
store Const I64 0x10 t2
output Const I64 0x10 F64
halt
";

/// `3.14*x0 + 5.0 + x1*x2` with the inputs at 0x0, 0x8 and 0x10.
pub const AFFINE_PLUS_PRODUCT: &str = "\
.memory 32
input Const I64 0x0 F64
input Const I64 0x8 F64
input Const I64 0x10 F64
t0 = load F64 Const I64 0x0
t1 = load F64 Const I64 0x8
t2 = load F64 Const I64 0x10
t3 = Binop MulF64 Const F64 3.14 t0
t4 = Binop AddF64 t3 Const F64 5.0
t5 = Binop MulF64 t1 t2
t6 = Binop AddF64 t4 t5
store Const I64 0x18 t6
output Const I64 0x18 F64
halt
";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    F64,
    F32,
}

impl Precision {
    pub fn tolerance(self) -> f64 {
        match self {
            Precision::F64 => 1e-5,
            Precision::F32 => 1e-2,
        }
    }
}

pub struct Case {
    pub name: &'static str,
    pub precision: Precision,
    /// Statements after the input header, which declares three inputs and
    /// loads them into t0, t1, t2.
    pub body: &'static str,
    /// Extra passive memory contents as (address, F64 value).
    pub extra: &'static [(u64, f64)],
}

pub const INPUTS: [f64; 3] = [1.3, -0.7, 2.1];

const F64_HEADER: &str = "\
.memory 512
.registers 64
input Const I64 0x0 F64
input Const I64 0x8 F64
input Const I64 0x10 F64
t0 = load F64 Const I64 0x0
t1 = load F64 Const I64 0x8
t2 = load F64 Const I64 0x10
";

const F32_HEADER: &str = "\
.memory 512
.registers 64
input Const I64 0x0 F32
input Const I64 0x4 F32
input Const I64 0x8 F32
t0 = load F32 Const I64 0x0
t1 = load F32 Const I64 0x4
t2 = load F32 Const I64 0x8
";

impl Case {
    pub fn source(&self) -> String {
        let header = match self.precision {
            Precision::F64 => F64_HEADER,
            Precision::F32 => F32_HEADER,
        };
        format!("{header}{}", self.body)
    }

    pub fn program(&self) -> Program {
        parse_program(&self.source()).unwrap_or_else(|e| panic!("{}: {e}", self.name))
    }

    pub fn initial_state(&self, p: &Program) -> MachineState {
        let mut st = MachineState::for_program(p);
        for (k, x) in INPUTS.iter().enumerate() {
            match self.precision {
                Precision::F64 => st.store(8 * k as u64, &Value::f64(*x)),
                Precision::F32 => st.store(4 * k as u64, &Value::f32(*x as f32)),
            }
            .expect("input slot in range");
        }
        for (a, x) in self.extra {
            st.store_f64(*a, *x).expect("preset in range");
        }
        st
    }
}

pub const SUITE: &[Case] = &[
    Case {
        name: "add_sub_f64",
        precision: Precision::F64,
        body: "\
t3 = Binop AddF64 t0 t1
t4 = Binop SubF64 t3 t2
t5 = Binop MulF64 t4 t0
store Const I64 0x80 t5
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "mul_div_f64",
        precision: Precision::F64,
        body: "\
t3 = Binop MulF64 t0 t1
t4 = Binop DivF64 t3 t2
t5 = Binop DivF64 t2 t0
store Const I64 0x80 t4
store Const I64 0x88 t5
output Const I64 0x80 F64
output Const I64 0x88 F64
halt
",
        extra: &[],
    },
    Case {
        name: "pow_f64",
        precision: Precision::F64,
        body: "\
t3 = Binop PowF64 t2 t0
t4 = Binop PowF64 t0 Const F64 3.0
t5 = Binop MulF64 t3 t1
store Const I64 0x80 t5
store Const I64 0x88 t4
output Const I64 0x80 F64
output Const I64 0x88 F64
halt
",
        extra: &[],
    },
    Case {
        name: "sqrt_f64",
        precision: Precision::F64,
        body: "\
t3 = Unop SqrtF64 t2
t4 = Binop MulF64 t3 t0
t5 = Unop SqrtF64 (Binop MulF64 t4 t4)
store Const I64 0x80 t5
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "sin_cos",
        precision: Precision::F64,
        body: "\
t3 = Unop SinF64 t0
t4 = Unop CosF64 t1
t5 = Binop MulF64 t3 t4
t6 = Binop AddF64 t5 t2
store Const I64 0x80 t6
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "exp_log",
        precision: Precision::F64,
        body: "\
t3 = Unop ExpF64 t1
t4 = Unop LogF64 t2
t5 = Binop AddF64 t3 (Binop MulF64 t4 t0)
store Const I64 0x80 t5
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "fabs_f64",
        precision: Precision::F64,
        body: "\
t3 = Unop FabsF64 t1
t4 = Unop FabsF64 t0
t5 = Binop MulF64 t3 t2
t6 = Binop SubF64 t5 t4
store Const I64 0x80 t6
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "madd_all_active",
        precision: Precision::F64,
        body: "\
t3 = Triop MAddF64 t0 t1 t2
store Const I64 0x80 t3
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "madd_addend_only",
        precision: Precision::F64,
        body: "\
t3 = Triop MAddF64 Const F64 2.0 Const F64 5.0 t2
t4 = Binop MulF64 t3 t0
store Const I64 0x80 t4
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "madd_mixed",
        precision: Precision::F64,
        body: "\
t3 = load F64 Const I64 0x100
t4 = Triop MAddF64 t0 t3 t1
t5 = Triop MAddF64 t4 t4 t2
store Const I64 0x80 t5
output Const I64 0x80 F64
halt
",
        extra: &[(0x100, 1.5)],
    },
    Case {
        name: "add64fx4",
        precision: Precision::F64,
        body: "\
store Const I64 0x40 t0
store Const I64 0x48 t1
store Const I64 0x50 t2
store Const I64 0x58 (Binop MulF64 t0 t2)
store Const I64 0x60 t2
store Const I64 0x68 t0
store Const I64 0x78 t1
t3 = load V256 Const I64 0x40
t4 = load V256 Const I64 0x60
t5 = Binop Add64Fx4 t3 t4
store Const I64 0x80 t5
output Const I64 0x80 F64
output Const I64 0x88 F64
output Const I64 0x90 F64
output Const I64 0x98 F64
halt
",
        extra: &[(0x70, 0.25)],
    },
    Case {
        name: "mul64fx4",
        precision: Precision::F64,
        body: "\
store Const I64 0x40 t0
store Const I64 0x48 t1
store Const I64 0x58 t2
store Const I64 0x60 t1
store Const I64 0x68 t2
store Const I64 0x78 t0
t3 = load V256 Const I64 0x40
t4 = load V256 Const I64 0x60
t5 = Binop Mul64Fx4 t3 t4
store Const I64 0x80 t5
output Const I64 0x80 F64
output Const I64 0x88 F64
output Const I64 0x90 F64
output Const I64 0x98 F64
halt
",
        extra: &[(0x50, 2.0), (0x70, 6.3)],
    },
    Case {
        name: "add64fx2",
        precision: Precision::F64,
        body: "\
store Const I64 0x40 t0
store Const I64 0x48 t1
store Const I64 0x50 t2
t3 = load V128 Const I64 0x40
t4 = load V128 Const I64 0x50
t5 = Binop Add64Fx2 t3 t4
store Const I64 0x80 t5
t6 = load F64 Const I64 0x80
t7 = load F64 Const I64 0x88
t8 = Binop MulF64 t6 t7
store Const I64 0x90 t8
output Const I64 0x90 F64
halt
",
        extra: &[(0x58, -3.5)],
    },
    Case {
        name: "mul64fx2",
        precision: Precision::F64,
        body: "\
store Const I64 0x40 t0
store Const I64 0x48 t1
store Const I64 0x50 t2
store Const I64 0x58 t0
t3 = load V128 Const I64 0x40
t4 = load V128 Const I64 0x50
t5 = Binop Mul64Fx2 t3 t4
store Const I64 0x80 t5
output Const I64 0x80 F64
output Const I64 0x88 F64
halt
",
        extra: &[],
    },
    Case {
        name: "add32fx4",
        precision: Precision::F32,
        body: "\
store Const I64 0x40 t0
store Const I64 0x44 t1
store Const I64 0x48 t2
store Const I64 0x50 t2
store Const I64 0x54 t0
store Const I64 0x5c t1
t3 = load V128 Const I64 0x40
t4 = load V128 Const I64 0x50
t5 = Binop Add32Fx4 t3 t4
store Const I64 0x80 t5
output Const I64 0x80 F32
output Const I64 0x84 F32
output Const I64 0x88 F32
output Const I64 0x8c F32
halt
",
        extra: &[],
    },
    Case {
        name: "mul32fx4",
        precision: Precision::F32,
        body: "\
store Const I64 0x40 t0
store Const I64 0x44 t1
store Const I64 0x48 t2
store Const I64 0x4c t0
store Const I64 0x50 t1
store Const I64 0x54 t2
store Const I64 0x58 t0
store Const I64 0x5c t1
t3 = load V128 Const I64 0x40
t4 = load V128 Const I64 0x50
t5 = Binop Mul32Fx4 t3 t4
store Const I64 0x80 t5
output Const I64 0x80 F32
output Const I64 0x84 F32
output Const I64 0x88 F32
output Const I64 0x8c F32
halt
",
        extra: &[],
    },
    Case {
        name: "xor64_negation",
        precision: Precision::F64,
        body: "\
t3 = Binop Xor64 t0 Const I64 0x8000000000000000
t4 = Binop MulF64 t3 t1
t5 = Binop Xor64 Const I64 0x8000000000000000 t2
t6 = Binop AddF64 t4 t5
store Const I64 0x80 t6
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "and64_abs",
        precision: Precision::F64,
        body: "\
t3 = Binop And64 t1 Const I64 0x7fffffffffffffff
t4 = Binop And64 Const I64 0x7fffffffffffffff t0
t5 = Binop MulF64 t3 t2
t6 = Binop SubF64 t5 t4
store Const I64 0x80 t6
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "xor32_negation",
        precision: Precision::F32,
        body: "\
t3 = Binop Xor32 t0 Const I32 0x80000000
t4 = Binop MulF32 t3 t2
t5 = Binop Xor32 Const I32 0x80000000 t1
t6 = Binop AddF32 t4 t5
store Const I64 0x80 t6
output Const I64 0x80 F32
halt
",
        extra: &[],
    },
    Case {
        name: "and32_abs",
        precision: Precision::F32,
        body: "\
t3 = Binop And32 t1 Const I32 0x7fffffff
t4 = Binop MulF32 t3 t0
t5 = Binop And32 Const I32 0x7fffffff t2
t6 = Binop DivF32 t4 t5
store Const I64 0x80 t6
output Const I64 0x80 F32
halt
",
        extra: &[],
    },
    Case {
        name: "binary_f32",
        precision: Precision::F32,
        body: "\
t3 = Binop AddF32 t0 t1
t4 = Binop SubF32 t2 t1
t5 = Binop MulF32 t3 t4
t6 = Binop DivF32 t5 t2
store Const I64 0x80 t6
output Const I64 0x80 F32
halt
",
        extra: &[],
    },
    Case {
        name: "sqrt_f32",
        precision: Precision::F32,
        body: "\
t3 = Unop SqrtF32 t2
t4 = Binop MulF32 t3 t1
t5 = Unop SqrtF32 (Binop MulF32 t0 t2)
store Const I64 0x80 t4
store Const I64 0x84 t5
output Const I64 0x80 F32
output Const I64 0x84 F32
halt
",
        extra: &[],
    },
    Case {
        name: "widen_narrow",
        precision: Precision::F32,
        body: "\
t3 = Unop F32toF64 t0
t4 = Unop F32toF64 t1
t5 = Unop ExpF64 (Binop MulF64 t3 t4)
t6 = Unop F64toF32 t5
t7 = Binop MulF32 t6 t2
store Const I64 0x80 t7
store Const I64 0x88 t5
output Const I64 0x80 F32
output Const I64 0x88 F64
halt
",
        extra: &[],
    },
    Case {
        name: "integer_conversions",
        precision: Precision::F64,
        body: "\
t3 = Unop F64toI64 t2
t4 = Unop I64toF64 t3
t5 = Binop MulF64 t4 t0
t6 = Binop Shl64 t3 Const I8 2
t7 = Unop I64toF64 (Binop Add64 t6 Const I64 1)
t8 = Binop MulF64 t7 t1
t9 = Binop AddF64 t5 t8
store Const I64 0x80 t9
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "cas_success",
        precision: Precision::F64,
        body: "\
cas Const I64 0x0 t0 t1 -> t3
t4 = load F64 Const I64 0x0
t5 = Binop MulF64 t4 t2
store Const I64 0x80 t5
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "cas_failure",
        precision: Precision::F64,
        body: "\
cas Const I64 0x0 Const F64 99.0 t1 -> t3
t4 = load F64 Const I64 0x0
t5 = Binop MulF64 t4 t2
store Const I64 0x80 t5
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "ite_then",
        precision: Precision::F64,
        body: "\
t3 = Binop CmpLTF64 t1 t0
t4 = ITE t3 (Binop MulF64 t0 t2) (Binop AddF64 t1 t2)
store Const I64 0x80 t4
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "ite_else",
        precision: Precision::F64,
        body: "\
t3 = Binop CmpLTF64 t0 t1
t4 = ITE t3 (Binop MulF64 t0 t2) (Binop DivF64 t1 t2)
store Const I64 0x80 t4
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "registers",
        precision: Precision::F64,
        body: "\
put 0 = t0
put 8 = Binop MulF64 t1 t2
t3 = get 0 F64
t4 = get 8 F64
t5 = Binop DivF64 t4 t3
store Const I64 0x80 t5
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "counted_loop",
        precision: Precision::F64,
        body: "\
store Const I64 0x80 t0
label top
t10 = load F64 Const I64 0x80
t11 = load F64 Const I64 0x8
t12 = Triop MAddF64 t10 t11 Const F64 0.5
store Const I64 0x80 t12
t13 = load I64 Const I64 0x100
t14 = Binop Add64 t13 Const I64 1
store Const I64 0x100 t14
t15 = Binop CmpEQ64 t14 Const I64 4
exit t15 done
exit Const I8 1 top
label done
t16 = load F64 Const I64 0x80
t17 = Binop MulF64 t16 t2
store Const I64 0x88 t17
output Const I64 0x88 F64
halt
",
        extra: &[],
    },
    Case {
        name: "vector_reload_lanes",
        precision: Precision::F64,
        body: "\
store Const I64 0x40 t0
store Const I64 0x48 t1
t3 = load V128 Const I64 0x40
store Const I64 0x60 t3
t4 = load F64 Const I64 0x68
t5 = load F64 Const I64 0x60
t6 = Binop MulF64 t4 t2
t7 = Binop DivF64 t6 t5
store Const I64 0x80 t7
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "intermediate_outputs",
        precision: Precision::F64,
        body: "\
t3 = Binop MulF64 t0 t1
store Const I64 0x80 t3
output Const I64 0x80 F64
t4 = Unop SinF64 t3
t5 = Binop MulF64 t4 t2
store Const I64 0x88 t5
output Const I64 0x88 F64
output Const I64 0x88 F64
halt
",
        extra: &[],
    },
    Case {
        name: "composite_chain",
        precision: Precision::F64,
        body: "\
t3 = Unop ExpF64 (Binop MulF64 t0 t1)
t4 = Unop SinF64 t3
t5 = Unop LogF64 (Unop SqrtF64 t2)
t6 = Binop PowF64 (Binop AddF64 t5 Const F64 1.0) t0
t7 = Binop AddF64 t4 t6
t8 = Binop DivF64 t7 (Unop CosF64 t1)
store Const I64 0x80 t8
output Const I64 0x80 F64
halt
",
        extra: &[],
    },
    Case {
        name: "passive_region",
        precision: Precision::F64,
        body: "\
t3 = load F64 Const I64 0x100
t4 = Binop MulF64 t3 t3
t5 = Unop SinF64 t4
t6 = Binop MulF64 t5 t0
t7 = Binop AddF64 t6 t4
t8 = Binop AddF64 t7 (Binop MulF64 t1 t2)
store Const I64 0x80 t8
output Const I64 0x80 F64
halt
",
        extra: &[(0x100, 0.9)],
    },
];

#[derive(Debug)]
pub struct CaseReport {
    pub name: &'static str,
    pub reverse_err: f64,
    pub forward_err: f64,
    pub tolerance: f64,
    pub warnings: usize,
    pub entries: usize,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.warnings == 0
            && self.entries > 0
            && self.reverse_err <= self.tolerance
            && self.forward_err <= self.tolerance
    }
}

fn max_matrix_err(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::NAN;
    }
    let mut m: f64 = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        if ra.len() != rb.len() {
            return f64::NAN;
        }
        for (x, y) in ra.iter().zip(rb) {
            let e = rel_err(*x, *y);
            if e.is_nan() {
                return f64::NAN;
            }
            m = m.max(e);
        }
    }
    m
}

/// Records the case, builds its Jacobian by reverse and by forward sweeps,
/// and compares both against central differences through the interpreter.
pub fn check_case(case: &Case) -> CaseReport {
    let p = case.program();
    let st = case.initial_state(&p);
    let (session, tape) =
        record_into(&p, st.clone(), MemoryTape::new(), ExecConfig::default()).expect("records");
    let inputs = &session.input_indices;
    let outputs = &session.output_indices;
    let rev = jacobian_reverse(tape.blocks(), inputs, outputs, Exec::Sequential).expect("reverse");
    let fwd = jacobian_forward(tape.blocks(), inputs, outputs, Exec::Sequential).expect("forward");
    let cfg = FdConfig {
        exec: Exec::Sequential,
        ..FdConfig::default()
    };
    let fd = finite_difference_jacobian(&p, &st, None, &cfg).expect("finite differences");
    CaseReport {
        name: case.name,
        reverse_err: max_matrix_err(&rev, &fd.jacobian),
        forward_err: max_matrix_err(&fwd, &fd.jacobian),
        tolerance: case.precision.tolerance(),
        warnings: session.warnings.len(),
        entries: rev.iter().map(Vec::len).sum(),
    }
}

fn collect_ops(e: &Expr, ops: &mut BTreeSet<Opcode>) {
    match e {
        Expr::Const(_) | Expr::RdTmp(_) | Expr::Get { .. } => {}
        Expr::Load { addr, .. } => collect_ops(addr, ops),
        Expr::Unop(op, a) => {
            ops.insert(*op);
            collect_ops(a, ops);
        }
        Expr::Binop(op, a, b) => {
            ops.insert(*op);
            collect_ops(a, ops);
            collect_ops(b, ops);
        }
        Expr::Triop(op, a, b, c) => {
            ops.insert(*op);
            collect_ops(a, ops);
            collect_ops(b, ops);
            collect_ops(c, ops);
        }
        Expr::Ite(c, t, f) => {
            collect_ops(c, ops);
            collect_ops(t, ops);
            collect_ops(f, ops);
        }
    }
}

/// Opcodes used anywhere in the program.
pub fn opcodes_used(p: &Program) -> BTreeSet<Opcode> {
    let mut ops = BTreeSet::new();
    for s in &p.statements {
        match s {
            Stmt::WrTmp(_, e) | Stmt::Put { data: e, .. } => collect_ops(e, &mut ops),
            Stmt::Store { addr, data } => {
                collect_ops(addr, &mut ops);
                collect_ops(data, &mut ops);
            }
            Stmt::Cas {
                addr,
                expected,
                new,
                ..
            } => {
                collect_ops(addr, &mut ops);
                collect_ops(expected, &mut ops);
                collect_ops(new, &mut ops);
            }
            Stmt::Exit { guard, .. } => collect_ops(guard, &mut ops),
            Stmt::InputRequest { addr, .. } | Stmt::OutputRequest { addr, .. } => {
                collect_ops(addr, &mut ops)
            }
            Stmt::Label(_) | Stmt::Halt => {}
        }
    }
    ops
}

fn has_ite(e: &Expr) -> bool {
    match e {
        Expr::Ite(..) => true,
        Expr::Load { addr, .. } => has_ite(addr),
        Expr::Unop(_, a) => has_ite(a),
        Expr::Binop(_, a, b) => has_ite(a) || has_ite(b),
        Expr::Triop(_, a, b, c) => has_ite(a) || has_ite(b) || has_ite(c),
        _ => false,
    }
}

/// Everything the suite must exercise that is not already named by an
/// opcode. Returns the missing features, empty when complete.
pub fn suite_coverage_gaps() -> Vec<String> {
    let mut ops = BTreeSet::new();
    let (mut cas, mut ite, mut regs, mut exits) = (false, false, false, false);
    for case in SUITE {
        let p = case.program();
        ops.extend(opcodes_used(&p));
        for s in &p.statements {
            match s {
                Stmt::Cas { .. } => cas = true,
                Stmt::Put { .. } => regs = true,
                Stmt::Exit { .. } => exits = true,
                Stmt::WrTmp(_, e) if has_ite(e) => ite = true,
                _ => {}
            }
        }
    }
    let required = [
        Opcode::AddF64,
        Opcode::SubF64,
        Opcode::MulF64,
        Opcode::DivF64,
        Opcode::AddF32,
        Opcode::SubF32,
        Opcode::MulF32,
        Opcode::DivF32,
        Opcode::SqrtF64,
        Opcode::SqrtF32,
        Opcode::MAddF64,
        Opcode::SinF64,
        Opcode::CosF64,
        Opcode::ExpF64,
        Opcode::LogF64,
        Opcode::PowF64,
        Opcode::FabsF64,
        Opcode::F32toF64,
        Opcode::F64toF32,
        Opcode::F64toI64,
        Opcode::I64toF64,
        Opcode::Add64Fx4,
        Opcode::Mul64Fx4,
        Opcode::Add64Fx2,
        Opcode::Mul64Fx2,
        Opcode::Add32Fx4,
        Opcode::Mul32Fx4,
        Opcode::And32,
        Opcode::Xor32,
        Opcode::And64,
        Opcode::Xor64,
        Opcode::CmpLTF64,
    ];
    let mut gaps: Vec<String> = required
        .iter()
        .filter(|op| !ops.contains(op))
        .map(|op| op.to_string())
        .collect();
    for (present, what) in [
        (cas, "cas"),
        (ite, "ITE"),
        (regs, "registers"),
        (exits, "exit"),
        (SUITE.len() >= 30, "30 programs"),
    ] {
        if !present {
            gaps.push(what.to_string());
        }
    }
    gaps
}
