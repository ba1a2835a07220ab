use std::fmt;
use std::str::FromStr;

use super::value::{Value, ValueKind};

macro_rules! opcodes {
    ($($name:ident),* $(,)?) => {
        /// Operations available in `Unop`/`Binop`/`Triop` expressions.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Opcode {
            $($name),*
        }

        impl Opcode {
            pub const ALL: &'static [Opcode] = &[$(Opcode::$name),*];

            pub const fn name(self) -> &'static str {
                match self {
                    $(Opcode::$name => stringify!($name)),*
                }
            }
        }
    };
}

opcodes! {
    AddF64, SubF64, MulF64, DivF64,
    AddF32, SubF32, MulF32, DivF32,
    SqrtF64, SqrtF32,
    MAddF64,
    SinF64, CosF64, ExpF64, LogF64, PowF64, FabsF64,
    F32toF64, F64toF32, F64toI64, I64toF64,
    Add64Fx4, Mul64Fx4, Add64Fx2, Mul64Fx2, Add32Fx4, Mul32Fx4,
    And32, Or32, Xor32, And64, Or64, Xor64,
    Shl64, Shr64,
    Add64, Sub64, Mul64,
    CmpLTF64, CmpEQ64,
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Opcode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Opcode::ALL
            .iter()
            .copied()
            .find(|op| op.name() == s)
            .ok_or_else(|| format!("unknown opcode `{s}`"))
    }
}

/// Floating-point lane width.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FloatWidth {
    F32,
    F64,
}

impl FloatWidth {
    pub const fn bytes(self) -> usize {
        match self {
            FloatWidth::F32 => 4,
            FloatWidth::F64 => 8,
        }
    }
}

/// How the recorder treats an opcode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpClass {
    /// Differentiable scalar operation with one operand (includes F32<->F64
    /// conversions). `input`/`output` are the operand and result widths.
    FpUnary {
        input: FloatWidth,
        output: FloatWidth,
    },
    FpBinary(FloatWidth),
    FpTernary(FloatWidth),
    /// Lane-wise binary floating-point operation.
    Simd {
        lane: FloatWidth,
        lanes: usize,
    },
    /// And/Or/Xor at 32 or 64 bits; may hide sign manipulation of floats.
    Bitwise {
        width: FloatWidth,
    },
    /// Integer arithmetic, comparisons, float<->integer conversions.
    Passive,
}

/// Operand constraint in an opcode signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operand {
    Exact(ValueKind),
    /// Any 4-byte scalar (I32 or F32).
    Bits32,
    /// Any 8-byte scalar (I64 or F64).
    Bits64,
}

impl Operand {
    fn accepts(self, kind: ValueKind) -> bool {
        match self {
            Operand::Exact(k) => k == kind,
            Operand::Bits32 => matches!(kind, ValueKind::I32 | ValueKind::F32),
            Operand::Bits64 => matches!(kind, ValueKind::I64 | ValueKind::F64),
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Exact(k) => write!(f, "{k}"),
            Operand::Bits32 => f.write_str("I32|F32"),
            Operand::Bits64 => f.write_str("I64|F64"),
        }
    }
}

use FloatWidth::{F32 as W32, F64 as W64};
use Operand::{Bits32, Bits64, Exact};
use ValueKind::*;

impl Opcode {
    pub const fn arity(self) -> usize {
        self.operands().len()
    }

    pub const fn operands(self) -> &'static [Operand] {
        use Opcode::*;
        match self {
            AddF64 | SubF64 | MulF64 | DivF64 | PowF64 | CmpLTF64 => &[Exact(F64), Exact(F64)],
            AddF32 | SubF32 | MulF32 | DivF32 => &[Exact(F32), Exact(F32)],
            SqrtF64 | SinF64 | CosF64 | ExpF64 | LogF64 | FabsF64 | F64toF32 | F64toI64 => {
                &[Exact(F64)]
            }
            SqrtF32 | F32toF64 => &[Exact(F32)],
            I64toF64 => &[Exact(I64)],
            MAddF64 => &[Exact(F64), Exact(F64), Exact(F64)],
            Add64Fx4 | Mul64Fx4 => &[Exact(V256), Exact(V256)],
            Add64Fx2 | Mul64Fx2 | Add32Fx4 | Mul32Fx4 => &[Exact(V128), Exact(V128)],
            And32 | Or32 | Xor32 => &[Bits32, Bits32],
            And64 | Or64 | Xor64 => &[Bits64, Bits64],
            Shl64 | Shr64 => &[Exact(I64), Exact(I8)],
            Add64 | Sub64 | Mul64 | CmpEQ64 => &[Exact(I64), Exact(I64)],
        }
    }

    /// Checks operand kinds and returns the result kind.
    ///
    /// Bitwise operations are width-polymorphic so they can act on float bit
    /// patterns: the result is a float kind if either operand is one.
    pub fn result_kind(self, kinds: &[ValueKind]) -> Result<ValueKind, String> {
        let expected = self.operands();
        if kinds.len() != expected.len() {
            return Err(format!(
                "{self} takes {} operand(s), got {}",
                expected.len(),
                kinds.len()
            ));
        }
        for (pos, (want, got)) in expected.iter().zip(kinds).enumerate() {
            if !want.accepts(*got) {
                return Err(format!(
                    "{self} operand {} must be {want}, got {got}",
                    pos + 1
                ));
            }
        }
        use Opcode::*;
        Ok(match self {
            AddF64 | SubF64 | MulF64 | DivF64 | PowF64 | SqrtF64 | SinF64 | CosF64 | ExpF64
            | LogF64 | FabsF64 | MAddF64 | F32toF64 | I64toF64 => F64,
            AddF32 | SubF32 | MulF32 | DivF32 | SqrtF32 | F64toF32 => F32,
            F64toI64 | Shl64 | Shr64 | Add64 | Sub64 | Mul64 => I64,
            CmpLTF64 | CmpEQ64 => I8,
            Add64Fx4 | Mul64Fx4 => V256,
            Add64Fx2 | Mul64Fx2 | Add32Fx4 | Mul32Fx4 => V128,
            And32 | Or32 | Xor32 => {
                if kinds.contains(&F32) {
                    F32
                } else {
                    I32
                }
            }
            And64 | Or64 | Xor64 => {
                if kinds.contains(&F64) {
                    F64
                } else {
                    I64
                }
            }
        })
    }

    pub const fn class(self) -> OpClass {
        use Opcode::*;
        match self {
            AddF64 | SubF64 | MulF64 | DivF64 | PowF64 => OpClass::FpBinary(W64),
            AddF32 | SubF32 | MulF32 | DivF32 => OpClass::FpBinary(W32),
            SqrtF64 | SinF64 | CosF64 | ExpF64 | LogF64 | FabsF64 => OpClass::FpUnary {
                input: W64,
                output: W64,
            },
            SqrtF32 => OpClass::FpUnary {
                input: W32,
                output: W32,
            },
            F32toF64 => OpClass::FpUnary {
                input: W32,
                output: W64,
            },
            F64toF32 => OpClass::FpUnary {
                input: W64,
                output: W32,
            },
            MAddF64 => OpClass::FpTernary(W64),
            Add64Fx4 | Mul64Fx4 => OpClass::Simd {
                lane: W64,
                lanes: 4,
            },
            Add64Fx2 | Mul64Fx2 => OpClass::Simd {
                lane: W64,
                lanes: 2,
            },
            Add32Fx4 | Mul32Fx4 => OpClass::Simd {
                lane: W32,
                lanes: 4,
            },
            And32 | Or32 | Xor32 => OpClass::Bitwise { width: W32 },
            And64 | Or64 | Xor64 => OpClass::Bitwise { width: W64 },
            F64toI64 | I64toF64 | Shl64 | Shr64 | Add64 | Sub64 | Mul64 | CmpLTF64 | CmpEQ64 => {
                OpClass::Passive
            }
        }
    }

    /// The scalar opcode a SIMD opcode applies to each lane.
    pub const fn lane_op(self) -> Option<Opcode> {
        use Opcode::*;
        match self {
            Add64Fx4 | Add64Fx2 => Some(AddF64),
            Mul64Fx4 | Mul64Fx2 => Some(MulF64),
            Add32Fx4 => Some(AddF32),
            Mul32Fx4 => Some(MulF32),
            _ => None,
        }
    }

    /// Evaluates the operation on raw values. Operand kinds must already
    /// satisfy [`Opcode::result_kind`].
    pub fn eval(self, args: &[Value]) -> Value {
        use Opcode::*;
        match self.class() {
            OpClass::FpBinary(W64) => {
                Value::f64(binary_f64(self, args[0].as_f64(), args[1].as_f64()))
            }
            OpClass::FpBinary(W32) => {
                Value::f32(binary_f32(self, args[0].as_f32(), args[1].as_f32()))
            }
            OpClass::FpUnary { .. } => match self {
                F32toF64 => Value::f64(args[0].as_f32() as f64),
                F64toF32 => Value::f32(args[0].as_f64() as f32),
                SqrtF32 => Value::f32(args[0].as_f32().sqrt()),
                _ => Value::f64(unary_f64(self, args[0].as_f64())),
            },
            OpClass::FpTernary(_) => Value::f64(madd_f64(
                args[0].as_f64(),
                args[1].as_f64(),
                args[2].as_f64(),
            )),
            OpClass::Simd { lane, lanes } => {
                let scalar = self.lane_op().expect("SIMD opcode has a lane op");
                let mut out = Value::zero(args[0].kind());
                for l in 0..lanes {
                    match lane {
                        W64 => out.set_f64_lane(
                            l,
                            binary_f64(scalar, args[0].f64_lane(l), args[1].f64_lane(l)),
                        ),
                        W32 => out.set_f32_lane(
                            l,
                            binary_f32(scalar, args[0].f32_lane(l), args[1].f32_lane(l)),
                        ),
                    }
                }
                out
            }
            OpClass::Bitwise { .. } => {
                let kind = self
                    .result_kind(&[args[0].kind(), args[1].kind()])
                    .unwrap_or(args[0].kind());
                Value::from_bits(kind, bitwise(self, args[0].bits(), args[1].bits()))
            }
            OpClass::Passive => match self {
                F64toI64 => Value::i64(args[0].as_f64() as i64 as u64),
                I64toF64 => Value::f64(args[0].bits() as i64 as f64),
                Shl64 => Value::i64(
                    args[0]
                        .bits()
                        .checked_shl(args[1].bits() as u32)
                        .unwrap_or(0),
                ),
                Shr64 => Value::i64(
                    args[0]
                        .bits()
                        .checked_shr(args[1].bits() as u32)
                        .unwrap_or(0),
                ),
                Add64 => Value::i64(args[0].bits().wrapping_add(args[1].bits())),
                Sub64 => Value::i64(args[0].bits().wrapping_sub(args[1].bits())),
                Mul64 => Value::i64(args[0].bits().wrapping_mul(args[1].bits())),
                CmpLTF64 => Value::flag(args[0].as_f64() < args[1].as_f64()),
                CmpEQ64 => Value::flag(args[0].bits() == args[1].bits()),
                _ => unreachable!("{self} is not passive"),
            },
        }
    }
}

pub(crate) fn binary_f64(op: Opcode, a: f64, b: f64) -> f64 {
    match op {
        Opcode::AddF64 => a + b,
        Opcode::SubF64 => a - b,
        Opcode::MulF64 => a * b,
        Opcode::DivF64 => a / b,
        Opcode::PowF64 => a.powf(b),
        _ => unreachable!("{op} is not a binary64 operation"),
    }
}

pub(crate) fn binary_f32(op: Opcode, a: f32, b: f32) -> f32 {
    match op {
        Opcode::AddF32 => a + b,
        Opcode::SubF32 => a - b,
        Opcode::MulF32 => a * b,
        Opcode::DivF32 => a / b,
        _ => unreachable!("{op} is not a binary32 operation"),
    }
}

pub(crate) fn unary_f64(op: Opcode, a: f64) -> f64 {
    match op {
        Opcode::SqrtF64 => a.sqrt(),
        Opcode::SinF64 => a.sin(),
        Opcode::CosF64 => a.cos(),
        Opcode::ExpF64 => a.exp(),
        Opcode::LogF64 => a.ln(),
        Opcode::FabsF64 => a.abs(),
        _ => unreachable!("{op} is not a unary binary64 operation"),
    }
}

/// Fused multiply-add, a1·a2 + a3 with a single rounding.
pub(crate) fn madd_f64(a: f64, b: f64, c: f64) -> f64 {
    a.mul_add(b, c)
}

pub(crate) fn bitwise(op: Opcode, a: u64, b: u64) -> u64 {
    match op {
        Opcode::And32 | Opcode::And64 => a & b,
        Opcode::Or32 | Opcode::Or64 => a | b,
        Opcode::Xor32 | Opcode::Xor64 => a ^ b,
        _ => unreachable!("{op} is not bitwise"),
    }
}
