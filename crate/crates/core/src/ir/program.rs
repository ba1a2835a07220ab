use super::opcode::Opcode;
use super::value::{Value, ValueKind};

pub type TempId = u32;

/// Default memory size when a program text has no `.memory` directive.
pub const DEFAULT_MEMORY_SIZE: u64 = 64 * 1024;
/// Default register-file size when a program text has no `.registers` directive.
pub const DEFAULT_REGISTER_SIZE: u64 = 1024;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Value),
    RdTmp(TempId),
    Get { offset: u64, kind: ValueKind },
    Load { kind: ValueKind, addr: Box<Expr> },
    Unop(Opcode, Box<Expr>),
    Binop(Opcode, Box<Expr>, Box<Expr>),
    Triop(Opcode, Box<Expr>, Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn constant(v: Value) -> Expr {
        Expr::Const(v)
    }

    pub fn f64(x: f64) -> Expr {
        Expr::Const(Value::f64(x))
    }

    pub fn addr(a: u64) -> Expr {
        Expr::Const(Value::i64(a))
    }

    pub fn tmp(t: TempId) -> Expr {
        Expr::RdTmp(t)
    }

    pub fn load(kind: ValueKind, addr: Expr) -> Expr {
        Expr::Load {
            kind,
            addr: Box::new(addr),
        }
    }

    pub fn unop(op: Opcode, a: Expr) -> Expr {
        Expr::Unop(op, Box::new(a))
    }

    pub fn binop(op: Opcode, a: Expr, b: Expr) -> Expr {
        Expr::Binop(op, Box::new(a), Box::new(b))
    }

    pub fn triop(op: Opcode, a: Expr, b: Expr, c: Expr) -> Expr {
        Expr::Triop(op, Box::new(a), Box::new(b), Box::new(c))
    }

    pub fn ite(cond: Expr, then: Expr, other: Expr) -> Expr {
        Expr::Ite(Box::new(cond), Box::new(then), Box::new(other))
    }

    /// True for constants and temporaries, which print without parentheses.
    pub fn is_atom(&self) -> bool {
        matches!(self, Expr::Const(_) | Expr::RdTmp(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    WrTmp(TempId, Expr),
    Put {
        offset: u64,
        data: Expr,
    },
    Store {
        addr: Expr,
        data: Expr,
    },
    /// Compare-and-swap on memory; writes 1 or 0 to `success`.
    Cas {
        addr: Expr,
        expected: Expr,
        new: Expr,
        success: TempId,
    },
    /// Jump to `label` when `guard` is non-zero.
    Exit {
        guard: Expr,
        label: String,
    },
    Label(String),
    /// Declares the value at `addr` an AD input.
    InputRequest {
        addr: Expr,
        kind: ValueKind,
    },
    /// Declares the value at `addr` an AD output.
    OutputRequest {
        addr: Expr,
        kind: ValueKind,
    },
    Halt,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub statements: Vec<Stmt>,
    pub memory_size: u64,
    pub register_size: u64,
}

impl Default for Program {
    fn default() -> Self {
        Program {
            statements: Vec::new(),
            memory_size: DEFAULT_MEMORY_SIZE,
            register_size: DEFAULT_REGISTER_SIZE,
        }
    }
}

impl Program {
    pub fn new(statements: Vec<Stmt>, memory_size: u64, register_size: u64) -> Self {
        Program {
            statements,
            memory_size,
            register_size,
        }
    }

    /// One more than the largest temporary id mentioned anywhere.
    pub fn temp_count(&self) -> usize {
        fn expr_max(e: &Expr) -> Option<TempId> {
            match e {
                Expr::Const(_) | Expr::Get { .. } => None,
                Expr::RdTmp(t) => Some(*t),
                Expr::Load { addr, .. } => expr_max(addr),
                Expr::Unop(_, a) => expr_max(a),
                Expr::Binop(_, a, b) => expr_max(a).max(expr_max(b)),
                Expr::Triop(_, a, b, c) | Expr::Ite(a, b, c) => {
                    expr_max(a).max(expr_max(b)).max(expr_max(c))
                }
            }
        }
        let mut max: Option<TempId> = None;
        for s in &self.statements {
            let m = match s {
                Stmt::WrTmp(t, e) => Some(*t).max(expr_max(e)),
                Stmt::Put { data, .. } => expr_max(data),
                Stmt::Store { addr, data } => expr_max(addr).max(expr_max(data)),
                Stmt::Cas {
                    addr,
                    expected,
                    new,
                    success,
                } => Some(*success)
                    .max(expr_max(addr))
                    .max(expr_max(expected))
                    .max(expr_max(new)),
                Stmt::Exit { guard, .. } => expr_max(guard),
                Stmt::InputRequest { addr, .. } | Stmt::OutputRequest { addr, .. } => {
                    expr_max(addr)
                }
                Stmt::Label(_) | Stmt::Halt => None,
            };
            max = max.max(m);
        }
        max.map_or(0, |t| t as usize + 1)
    }

    /// Statement index of the label named `name`.
    pub fn label_position(&self, name: &str) -> Option<usize> {
        self.statements
            .iter()
            .position(|s| matches!(s, Stmt::Label(l) if l == name))
    }
}
