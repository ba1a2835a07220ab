use std::fmt::{self, Write};

use super::program::{Expr, Program, Stmt};

fn write_operand(out: &mut String, e: &Expr) {
    if e.is_atom() {
        write_expr(out, e);
    } else {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Const(v) => {
            let _ = write!(out, "Const {} 0x{}", v.kind(), v.to_hex());
        }
        Expr::RdTmp(t) => {
            let _ = write!(out, "t{t}");
        }
        Expr::Get { offset, kind } => {
            let _ = write!(out, "get {offset} {kind}");
        }
        Expr::Load { kind, addr } => {
            let _ = write!(out, "load {kind} ");
            write_operand(out, addr);
        }
        Expr::Unop(op, a) => {
            let _ = write!(out, "Unop {op} ");
            write_operand(out, a);
        }
        Expr::Binop(op, a, b) => {
            let _ = write!(out, "Binop {op} ");
            write_operand(out, a);
            out.push(' ');
            write_operand(out, b);
        }
        Expr::Triop(op, a, b, c) => {
            let _ = write!(out, "Triop {op} ");
            write_operand(out, a);
            out.push(' ');
            write_operand(out, b);
            out.push(' ');
            write_operand(out, c);
        }
        Expr::Ite(c, t, e) => {
            out.push_str("ITE ");
            write_operand(out, c);
            out.push(' ');
            write_operand(out, t);
            out.push(' ');
            write_operand(out, e);
        }
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

pub fn print_stmt(s: &Stmt) -> String {
    let mut out = String::new();
    match s {
        Stmt::WrTmp(t, e) => {
            let _ = write!(out, "t{t} = ");
            write_expr(&mut out, e);
        }
        Stmt::Put { offset, data } => {
            let _ = write!(out, "put {offset} = ");
            write_expr(&mut out, data);
        }
        Stmt::Store { addr, data } => {
            out.push_str("store ");
            write_operand(&mut out, addr);
            out.push(' ');
            write_operand(&mut out, data);
        }
        Stmt::Cas {
            addr,
            expected,
            new,
            success,
        } => {
            out.push_str("cas ");
            write_operand(&mut out, addr);
            out.push(' ');
            write_operand(&mut out, expected);
            out.push(' ');
            write_operand(&mut out, new);
            let _ = write!(out, " -> t{success}");
        }
        Stmt::Exit { guard, label } => {
            out.push_str("exit ");
            write_operand(&mut out, guard);
            let _ = write!(out, " {label}");
        }
        Stmt::Label(l) => {
            let _ = write!(out, "label {l}");
        }
        Stmt::InputRequest { addr, kind } | Stmt::OutputRequest { addr, kind } => {
            out.push_str(if matches!(s, Stmt::InputRequest { .. }) {
                "input "
            } else {
                "output "
            });
            write_operand(&mut out, addr);
            let _ = write!(out, " {kind}");
        }
        Stmt::Halt => out.push_str("halt"),
    }
    out
}

/// Canonical text: directives first, one statement per line, constants as hex.
pub fn print_program(p: &Program) -> String {
    p.to_string()
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, ".memory {}", self.memory_size)?;
        writeln!(f, ".registers {}", self.register_size)?;
        for s in &self.statements {
            writeln!(f, "{}", print_stmt(s))?;
        }
        Ok(())
    }
}
