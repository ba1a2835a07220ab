//! Random valid programs for property tests: every opcode class, memory and
//! register traffic, SIMD packs, CAS and forward exits.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ir::{Expr, MachineState, Opcode, Program, Stmt, TempId, Value, ValueKind};

const F64_SLOTS: u64 = 16;
const F32_BASE: u64 = F64_SLOTS * 8;
const F32_SLOTS: u64 = 8;
const PACK_BASE: u64 = F32_BASE + F32_SLOTS * 4;
const MEMORY: u64 = PACK_BASE + 32;
const REGISTERS: u64 = 64;
const SIGN64: u64 = 1 << 63;

#[derive(Clone, Copy, Debug)]
pub struct RandomConfig {
    /// Approximate number of body statements.
    pub statements: usize,
    pub f64_inputs: usize,
    pub f32_inputs: usize,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            statements: 40,
            f64_inputs: 4,
            f32_inputs: 2,
        }
    }
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    stmts: Vec<Stmt>,
    next_temp: TempId,
    f64s: Vec<TempId>,
    f32s: Vec<TempId>,
    labels: usize,
}

fn f64_slot(k: u64) -> Expr {
    Expr::addr(8 * k)
}

fn f32_slot(k: u64) -> Expr {
    Expr::addr(F32_BASE + 4 * k)
}

impl<R: Rng> Gen<'_, R> {
    fn fresh(&mut self) -> TempId {
        self.next_temp += 1;
        self.next_temp - 1
    }

    fn def(&mut self, e: Expr) -> TempId {
        let t = self.fresh();
        self.stmts.push(Stmt::WrTmp(t, e));
        t
    }

    fn def_f64(&mut self, e: Expr) -> TempId {
        let t = self.def(e);
        self.f64s.push(t);
        t
    }

    fn def_f32(&mut self, e: Expr) -> TempId {
        let t = self.def(e);
        self.f32s.push(t);
        t
    }

    fn f64_operand(&mut self) -> Expr {
        match self.rng.gen_range(0..6) {
            0 => Expr::f64(self.rng.gen_range(-2.0..2.0)),
            1 => Expr::load(ValueKind::F64, f64_slot(self.rng.gen_range(0..F64_SLOTS))),
            _ => match self.f64s.choose(self.rng) {
                Some(t) => Expr::tmp(*t),
                None => Expr::load(ValueKind::F64, f64_slot(0)),
            },
        }
    }

    fn f32_operand(&mut self) -> Expr {
        match self.rng.gen_range(0..4) {
            0 => Expr::Const(Value::f32(self.rng.gen_range(-2.0..2.0))),
            1 => Expr::load(ValueKind::F32, f32_slot(self.rng.gen_range(0..F32_SLOTS))),
            _ => match self.f32s.choose(self.rng) {
                Some(t) => Expr::tmp(*t),
                None => Expr::load(ValueKind::F32, f32_slot(0)),
            },
        }
    }

    fn statement(&mut self) {
        use Opcode::*;
        match self.rng.gen_range(0..20) {
            0..=3 => {
                let op = *[AddF64, SubF64, MulF64, DivF64, PowF64]
                    .choose(self.rng)
                    .unwrap();
                let (a, b) = (self.f64_operand(), self.f64_operand());
                self.def_f64(Expr::binop(op, a, b));
            }
            4 | 5 => {
                let op = *[SqrtF64, SinF64, CosF64, ExpF64, LogF64, FabsF64]
                    .choose(self.rng)
                    .unwrap();
                let a = self.f64_operand();
                self.def_f64(Expr::unop(op, a));
            }
            6 => {
                let (a, b, c) = (self.f64_operand(), self.f64_operand(), self.f64_operand());
                self.def_f64(Expr::triop(MAddF64, a, b, c));
            }
            7 => {
                let op = *[AddF32, SubF32, MulF32, DivF32].choose(self.rng).unwrap();
                let (a, b) = (self.f32_operand(), self.f32_operand());
                self.def_f32(Expr::binop(op, a, b));
            }
            8 => {
                if self.rng.gen() {
                    let a = self.f64_operand();
                    self.def_f32(Expr::unop(F64toF32, a));
                } else {
                    let a = self.f32_operand();
                    let op = if self.rng.gen() { F32toF64 } else { SqrtF32 };
                    if op == SqrtF32 {
                        self.def_f32(Expr::unop(op, a));
                    } else {
                        self.def_f64(Expr::unop(op, a));
                    }
                }
            }
            9 => {
                // Bit-tricks: recognised masks most of the time, otherwise
                // patterns that must be reported.
                let a = self.f64_operand();
                let (op, mask) = match self.rng.gen_range(0..4) {
                    0 => (Xor64, Expr::Const(Value::i64(SIGN64))),
                    1 => (And64, Expr::Const(Value::i64(!SIGN64))),
                    2 => (Or64, Expr::Const(Value::i64(SIGN64))),
                    _ => (Xor64, self.f64_operand()),
                };
                let (a, b) = if self.rng.gen() { (a, mask) } else { (mask, a) };
                // One operand is always F64, so the result is too.
                self.def_f64(Expr::binop(op, a, b));
            }
            10 => {
                let a = self.f32_operand();
                let op = *[Xor32, And32].choose(self.rng).unwrap();
                let mask = if op == Xor32 {
                    0x8000_0000
                } else {
                    0x7fff_ffff
                };
                self.def_f32(Expr::binop(op, a, Expr::Const(Value::i32(mask))));
            }
            11 => {
                // Pack four scalars, run a SIMD op, unpack.
                for lane in 0..4 {
                    let x = self.f64_operand();
                    self.stmts.push(Stmt::Store {
                        addr: Expr::addr(PACK_BASE + 8 * lane),
                        data: x,
                    });
                }
                let (kind, op) = match self.rng.gen_range(0..4) {
                    0 => (ValueKind::V256, Add64Fx4),
                    1 => (ValueKind::V256, Mul64Fx4),
                    2 => (
                        ValueKind::V128,
                        *[Add64Fx2, Mul64Fx2].choose(self.rng).unwrap(),
                    ),
                    _ => (
                        ValueKind::V128,
                        *[Add32Fx4, Mul32Fx4].choose(self.rng).unwrap(),
                    ),
                };
                let a = self.def(Expr::load(kind, Expr::addr(PACK_BASE)));
                let b = self.def(Expr::load(kind, Expr::addr(PACK_BASE)));
                let r = self.def(Expr::binop(op, Expr::tmp(a), Expr::tmp(b)));
                self.stmts.push(Stmt::Store {
                    addr: Expr::addr(PACK_BASE),
                    data: Expr::tmp(r),
                });
                if matches!(op, Add32Fx4 | Mul32Fx4) {
                    let lane = self.rng.gen_range(0..4);
                    self.def_f32(Expr::load(ValueKind::F32, Expr::addr(PACK_BASE + 4 * lane)));
                } else {
                    let lanes = if kind == ValueKind::V256 { 4 } else { 2 };
                    let lane = self.rng.gen_range(0..lanes);
                    self.def_f64(Expr::load(ValueKind::F64, Expr::addr(PACK_BASE + 8 * lane)));
                }
            }
            12 => {
                let (a, b) = (self.f64_operand(), self.f64_operand());
                let c = self.def(Expr::binop(CmpLTF64, a, b));
                let (x, y) = (self.f64_operand(), self.f64_operand());
                self.def_f64(Expr::ite(Expr::tmp(c), x, y));
            }
            13 => {
                let slot = self.rng.gen_range(0..F64_SLOTS);
                let expected = if self.rng.gen() {
                    Expr::load(ValueKind::F64, f64_slot(slot))
                } else {
                    Expr::f64(0.25)
                };
                let new = self.f64_operand();
                let ok = self.fresh();
                self.stmts.push(Stmt::Cas {
                    addr: f64_slot(slot),
                    expected,
                    new,
                    success: ok,
                });
            }
            14 => {
                let off = 8 * self.rng.gen_range(0..REGISTERS / 8);
                let x = self.f64_operand();
                self.stmts.push(Stmt::Put {
                    offset: off,
                    data: x,
                });
                self.def_f64(Expr::Get {
                    offset: off,
                    kind: ValueKind::F64,
                });
            }
            15 => {
                let x = self.f64_operand();
                let i = self.def(Expr::unop(F64toI64, x));
                let j = self.def(Expr::binop(Add64, Expr::tmp(i), Expr::Const(Value::i64(3))));
                self.def_f64(Expr::unop(I64toF64, Expr::tmp(j)));
            }
            16 | 17 => {
                let x = self.f64_operand();
                let slot = self.rng.gen_range(0..F64_SLOTS);
                self.stmts.push(Stmt::Store {
                    addr: f64_slot(slot),
                    data: x,
                });
            }
            18 => {
                let x = self.f32_operand();
                let slot = self.rng.gen_range(0..F32_SLOTS);
                self.stmts.push(Stmt::Store {
                    addr: f32_slot(slot),
                    data: x,
                });
            }
            _ => self.skip_region(),
        }
    }

    /// A conditional forward exit over a few statements. Temporaries made in
    /// the skipped region are not used after the label.
    fn skip_region(&mut self) {
        let (a, b) = (self.f64_operand(), self.f64_operand());
        let c = self.def(Expr::binop(Opcode::CmpLTF64, a, b));
        let label = format!("L{}", self.labels);
        self.labels += 1;
        self.stmts.push(Stmt::Exit {
            guard: Expr::tmp(c),
            label: label.clone(),
        });
        let (f64s, f32s) = (self.f64s.clone(), self.f32s.clone());
        for _ in 0..self.rng.gen_range(1..4) {
            self.statement();
        }
        self.f64s = f64s;
        self.f32s = f32s;
        self.stmts.push(Stmt::Label(label));
    }
}

/// A random valid program and an initial state for it.
pub fn random_program<R: Rng>(rng: &mut R, cfg: &RandomConfig) -> (Program, MachineState) {
    let mut g = Gen {
        rng,
        stmts: Vec::new(),
        next_temp: 0,
        f64s: Vec::new(),
        f32s: Vec::new(),
        labels: 0,
    };
    for k in 0..cfg.f64_inputs as u64 {
        g.stmts.push(Stmt::InputRequest {
            addr: f64_slot(k % F64_SLOTS),
            kind: ValueKind::F64,
        });
    }
    for k in 0..cfg.f32_inputs as u64 {
        g.stmts.push(Stmt::InputRequest {
            addr: f32_slot(k % F32_SLOTS),
            kind: ValueKind::F32,
        });
    }
    while g.stmts.len() < cfg.statements {
        g.statement();
    }
    for k in 0..3 {
        g.stmts.push(Stmt::OutputRequest {
            addr: f64_slot(k),
            kind: ValueKind::F64,
        });
    }
    g.stmts.push(Stmt::OutputRequest {
        addr: f32_slot(0),
        kind: ValueKind::F32,
    });
    g.stmts.push(Stmt::Halt);
    let program = Program::new(g.stmts, MEMORY, REGISTERS);
    let mut st = MachineState::for_program(&program);
    for k in 0..F64_SLOTS {
        st.store_f64(8 * k, g.rng.gen_range(0.5..2.0))
            .expect("slot in memory");
    }
    for k in 0..F32_SLOTS {
        st.store(F32_BASE + 4 * k, &Value::f32(g.rng.gen_range(0.5..2.0)))
            .expect("slot in memory");
    }
    (program, st)
}
