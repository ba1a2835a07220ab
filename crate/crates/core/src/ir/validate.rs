use std::collections::{HashMap, HashSet};
use std::fmt;

use super::program::{Expr, Program, Stmt, TempId};
use super::value::ValueKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    Kind,
    Label,
    SingleAssignment,
    Range,
    UndefinedTemp,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// Statement index.
    pub stmt: usize,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stmt {}: {}", self.stmt, self.message)
    }
}

struct Checker<'p> {
    program: &'p Program,
    temp_kinds: HashMap<TempId, ValueKind>,
    out: Vec<Diagnostic>,
    stmt: usize,
}

impl Checker<'_> {
    fn report(&mut self, kind: DiagnosticKind, message: String) {
        self.out.push(Diagnostic {
            stmt: self.stmt,
            kind,
            message,
        });
    }

    fn check_mem_range(&mut self, addr: &Expr, size: usize) {
        if let Expr::Const(v) = addr {
            if v.kind() == ValueKind::I64 {
                let a = v.bits();
                if a.checked_add(size as u64)
                    .is_none_or(|end| end > self.program.memory_size)
                {
                    self.report(
                        DiagnosticKind::Range,
                        format!(
                            "memory access [{a:#x}, +{size}) outside {} bytes",
                            self.program.memory_size
                        ),
                    );
                }
            }
        }
    }

    fn check_reg_range(&mut self, offset: u64, size: usize) {
        if offset
            .checked_add(size as u64)
            .is_none_or(|end| end > self.program.register_size)
        {
            self.report(
                DiagnosticKind::Range,
                format!(
                    "register access [{offset}, +{size}) outside {} bytes",
                    self.program.register_size
                ),
            );
        }
    }

    fn expect_kind(&mut self, what: &str, got: Option<ValueKind>, want: ValueKind) {
        if let Some(k) = got {
            if k != want {
                self.report(
                    DiagnosticKind::Kind,
                    format!("{what} must be {want}, got {k}"),
                );
            }
        }
    }

    /// Kind of `e`, or `None` if an error below it was already reported.
    fn expr(&mut self, e: &Expr) -> Option<ValueKind> {
        match e {
            Expr::Const(v) => Some(v.kind()),
            Expr::RdTmp(t) => match self.temp_kinds.get(t) {
                Some(k) => Some(*k),
                None => {
                    self.report(
                        DiagnosticKind::UndefinedTemp,
                        format!("t{t} is read but never written before this point"),
                    );
                    None
                }
            },
            Expr::Get { offset, kind } => {
                self.check_reg_range(*offset, kind.size());
                Some(*kind)
            }
            Expr::Load { kind, addr } => {
                let ak = self.expr(addr);
                self.expect_kind("load address", ak, ValueKind::I64);
                self.check_mem_range(addr, kind.size());
                Some(*kind)
            }
            Expr::Unop(op, a) => {
                let ka = self.expr(a)?;
                self.op_kind(*op, &[ka])
            }
            Expr::Binop(op, a, b) => {
                let ka = self.expr(a);
                let kb = self.expr(b);
                self.op_kind(*op, &[ka?, kb?])
            }
            Expr::Triop(op, a, b, c) => {
                let ka = self.expr(a);
                let kb = self.expr(b);
                let kc = self.expr(c);
                self.op_kind(*op, &[ka?, kb?, kc?])
            }
            Expr::Ite(c, t, e) => {
                let kc = self.expr(c);
                self.expect_kind("ITE condition", kc, ValueKind::I8);
                let kt = self.expr(t)?;
                let ke = self.expr(e)?;
                if kt != ke {
                    self.report(
                        DiagnosticKind::Kind,
                        format!("ITE branches differ in kind: {kt} vs {ke}"),
                    );
                    return None;
                }
                Some(kt)
            }
        }
    }

    fn op_kind(&mut self, op: super::opcode::Opcode, kinds: &[ValueKind]) -> Option<ValueKind> {
        match op.result_kind(kinds) {
            Ok(k) => Some(k),
            Err(msg) => {
                self.report(DiagnosticKind::Kind, msg);
                None
            }
        }
    }

    fn write_temp(&mut self, t: TempId, kind: Option<ValueKind>, block: &mut HashSet<TempId>) {
        if !block.insert(t) {
            self.report(
                DiagnosticKind::SingleAssignment,
                format!("t{t} written twice in one block"),
            );
        }
        let Some(kind) = kind else { return };
        match self.temp_kinds.get(&t) {
            Some(prev) if *prev != kind => self.report(
                DiagnosticKind::Kind,
                format!("t{t} previously {prev}, now written as {kind}"),
            ),
            _ => {
                self.temp_kinds.insert(t, kind);
            }
        }
    }
}

/// Checks kinds, labels, single assignment per block and statically known
/// access ranges. An empty result means the program may be executed.
pub fn validate_program(program: &Program) -> Vec<Diagnostic> {
    let mut ck = Checker {
        program,
        temp_kinds: HashMap::new(),
        out: Vec::new(),
        stmt: 0,
    };
    let mut labels = HashSet::new();
    for (i, s) in program.statements.iter().enumerate() {
        if let Stmt::Label(l) = s {
            if !labels.insert(l.as_str()) {
                ck.stmt = i;
                ck.report(DiagnosticKind::Label, format!("label `{l}` defined twice"));
            }
        }
    }

    let mut block: HashSet<TempId> = HashSet::new();
    for (i, s) in program.statements.iter().enumerate() {
        ck.stmt = i;
        match s {
            Stmt::WrTmp(t, e) => {
                let k = ck.expr(e);
                ck.write_temp(*t, k, &mut block);
            }
            Stmt::Put { offset, data } => {
                if let Some(k) = ck.expr(data) {
                    ck.check_reg_range(*offset, k.size());
                }
            }
            Stmt::Store { addr, data } => {
                let ka = ck.expr(addr);
                ck.expect_kind("store address", ka, ValueKind::I64);
                if let Some(k) = ck.expr(data) {
                    ck.check_mem_range(addr, k.size());
                }
            }
            Stmt::Cas {
                addr,
                expected,
                new,
                success,
            } => {
                let ka = ck.expr(addr);
                ck.expect_kind("cas address", ka, ValueKind::I64);
                let ke = ck.expr(expected);
                let kn = ck.expr(new);
                if let (Some(ke), Some(kn)) = (ke, kn) {
                    if ke != kn {
                        ck.report(
                            DiagnosticKind::Kind,
                            format!("cas expected/new differ in kind: {ke} vs {kn}"),
                        );
                    } else if !matches!(ke.size(), 4 | 8)
                        || !matches!(
                            ke,
                            ValueKind::I32 | ValueKind::I64 | ValueKind::F32 | ValueKind::F64
                        )
                    {
                        ck.report(
                            DiagnosticKind::Kind,
                            format!("cas operands must be 4- or 8-byte scalars, got {ke}"),
                        );
                    } else {
                        ck.check_mem_range(addr, ke.size());
                    }
                }
                ck.write_temp(*success, Some(ValueKind::I8), &mut block);
            }
            Stmt::Exit { guard, label } => {
                let kg = ck.expr(guard);
                ck.expect_kind("exit guard", kg, ValueKind::I8);
                if !labels.contains(label.as_str()) {
                    ck.report(
                        DiagnosticKind::Label,
                        format!("exit to undefined label `{label}`"),
                    );
                }
            }
            Stmt::Label(_) => block.clear(),
            Stmt::InputRequest { addr, kind } | Stmt::OutputRequest { addr, kind } => {
                let ka = ck.expr(addr);
                ck.expect_kind("request address", ka, ValueKind::I64);
                if !kind.is_float() {
                    ck.report(
                        DiagnosticKind::Kind,
                        format!("AD variables must be F32 or F64, got {kind}"),
                    );
                } else {
                    ck.check_mem_range(addr, kind.size());
                }
            }
            Stmt::Halt => {}
        }
    }
    ck.out
}
