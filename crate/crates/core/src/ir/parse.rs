//! Line-oriented text format.
//!
//! ```text
//! .memory 24
//! input Const I64 0x0 F64
//! t0 = load F64 Const I64 0x0
//! t1 = Binop MulF64 t0 t0
//! store Const I64 0x8 t1
//! output Const I64 0x8 F64
//! halt
//! ```
//!
//! Expressions are prefix forms with fixed arity; parentheses may wrap any
//! expression. `#` starts a comment. Besides hex raw bits, `Const` accepts
//! decimal literals for scalar kinds (`Const F64 -4.0`, `Const I64 16`).

use thiserror::Error;

use super::opcode::Opcode;
use super::program::{Expr, Program, Stmt, TempId};
use super::validate::{validate_program, DiagnosticKind};
use super::value::{Value, ValueKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

struct Cursor<'a> {
    tokens: Vec<&'a str>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: &'a str) -> Self {
        let mut tokens = Vec::new();
        let mut start = None;
        for (i, c) in line.char_indices() {
            if c.is_whitespace() || c == '(' || c == ')' {
                if let Some(s) = start.take() {
                    tokens.push(&line[s..i]);
                }
                if c == '(' || c == ')' {
                    tokens.push(&line[i..i + 1]);
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            tokens.push(&line[s..]);
        }
        Cursor { tokens, pos: 0 }
    }

    fn next(&mut self) -> Result<&'a str, String> {
        let t = self
            .tokens
            .get(self.pos)
            .copied()
            .ok_or_else(|| "unexpected end of line".to_string())?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).copied()
    }

    fn expect(&mut self, want: &str) -> Result<(), String> {
        let got = self.next()?;
        if got == want {
            Ok(())
        } else {
            Err(format!("expected `{want}`, found `{got}`"))
        }
    }

    fn finish(&self) -> Result<(), String> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(format!("unexpected trailing token `{t}`")),
        }
    }
}

fn parse_temp(tok: &str) -> Option<TempId> {
    tok.strip_prefix('t')?.parse().ok()
}

fn parse_uint(tok: &str) -> Result<u64, String> {
    let parsed = match tok.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => tok.parse(),
    };
    parsed.map_err(|_| format!("invalid number `{tok}`"))
}

fn parse_kind(tok: &str) -> Result<ValueKind, String> {
    tok.parse()
}

pub(crate) fn parse_const_literal(kind: ValueKind, tok: &str) -> Result<Value, String> {
    if let Some(hex) = tok.strip_prefix("0x") {
        return Value::from_hex(kind, hex);
    }
    match kind {
        ValueKind::F64 => tok
            .parse::<f64>()
            .map(Value::f64)
            .map_err(|_| format!("invalid F64 literal `{tok}`")),
        ValueKind::F32 => tok
            .parse::<f32>()
            .map(Value::f32)
            .map_err(|_| format!("invalid F32 literal `{tok}`")),
        ValueKind::I8 | ValueKind::I32 | ValueKind::I64 => {
            let bits = if let Some(neg) = tok.strip_prefix('-') {
                neg.parse::<u64>()
                    .map(|x| x.wrapping_neg())
                    .map_err(|_| format!("invalid integer literal `{tok}`"))?
            } else {
                tok.parse::<u64>()
                    .map_err(|_| format!("invalid integer literal `{tok}`"))?
            };
            let mask = match kind.size() {
                8 => u64::MAX,
                n => (1u64 << (8 * n)) - 1,
            };
            let truncated = bits & mask;
            let sign_extended_ok = tok.starts_with('-') && (bits | mask) == u64::MAX;
            if truncated != bits && !sign_extended_ok {
                return Err(format!("literal `{tok}` does not fit {kind}"));
            }
            Ok(Value::from_bits(kind, truncated))
        }
        ValueKind::V128 | ValueKind::V256 => Err(format!("{kind} constants must be hex (`0x...`)")),
    }
}

fn parse_expr(c: &mut Cursor<'_>) -> Result<Expr, String> {
    let tok = c.next()?;
    if tok == "(" {
        let e = parse_expr(c)?;
        c.expect(")")?;
        return Ok(e);
    }
    if let Some(t) = parse_temp(tok) {
        return Ok(Expr::RdTmp(t));
    }
    match tok {
        "Const" => {
            let kind = parse_kind(c.next()?)?;
            Ok(Expr::Const(parse_const_literal(kind, c.next()?)?))
        }
        "get" => {
            let offset = parse_uint(c.next()?)?;
            let kind = parse_kind(c.next()?)?;
            Ok(Expr::Get { offset, kind })
        }
        "load" => {
            let kind = parse_kind(c.next()?)?;
            Ok(Expr::load(kind, parse_expr(c)?))
        }
        "Unop" | "Binop" | "Triop" => {
            let op: Opcode = c.next()?.parse()?;
            let arity = match tok {
                "Unop" => 1,
                "Binop" => 2,
                _ => 3,
            };
            if op.arity() != arity {
                return Err(format!(
                    "arity error: {op} takes {} operand(s), used with {tok}",
                    op.arity()
                ));
            }
            let mut args = Vec::with_capacity(arity);
            for i in 0..arity {
                match c.peek() {
                    None | Some(")") => {
                        return Err(format!(
                            "arity error: {tok} {op} expects {arity} operand(s), found {i}"
                        ))
                    }
                    _ => args.push(parse_expr(c)?),
                }
            }
            let mut it = args.into_iter();
            let mut next = || it.next().expect("arity checked");
            Ok(match arity {
                1 => Expr::unop(op, next()),
                2 => Expr::binop(op, next(), next()),
                _ => Expr::triop(op, next(), next(), next()),
            })
        }
        "ITE" => {
            let cond = parse_expr(c)?;
            let then = parse_expr(c)?;
            let other = parse_expr(c)?;
            Ok(Expr::ite(cond, then, other))
        }
        other => Err(format!("expected expression, found `{other}`")),
    }
}

fn parse_stmt(c: &mut Cursor<'_>, first: &str) -> Result<Stmt, String> {
    if let Some(t) = parse_temp(first) {
        c.expect("=")?;
        return Ok(Stmt::WrTmp(t, parse_expr(c)?));
    }
    match first {
        "put" => {
            let offset = parse_uint(c.next()?)?;
            c.expect("=")?;
            Ok(Stmt::Put {
                offset,
                data: parse_expr(c)?,
            })
        }
        "store" => {
            let addr = parse_expr(c)?;
            let data = parse_expr(c)?;
            Ok(Stmt::Store { addr, data })
        }
        "cas" => {
            let addr = parse_expr(c)?;
            let expected = parse_expr(c)?;
            let new = parse_expr(c)?;
            c.expect("->")?;
            let tok = c.next()?;
            let success =
                parse_temp(tok).ok_or_else(|| format!("expected temporary, found `{tok}`"))?;
            Ok(Stmt::Cas {
                addr,
                expected,
                new,
                success,
            })
        }
        "exit" => {
            let guard = parse_expr(c)?;
            let label = c.next()?.to_string();
            Ok(Stmt::Exit { guard, label })
        }
        "label" => Ok(Stmt::Label(c.next()?.to_string())),
        "input" | "output" => {
            let addr = parse_expr(c)?;
            let kind = parse_kind(c.next()?)?;
            Ok(if first == "input" {
                Stmt::InputRequest { addr, kind }
            } else {
                Stmt::OutputRequest { addr, kind }
            })
        }
        "halt" => Ok(Stmt::Halt),
        other => Err(format!("unknown statement `{other}`")),
    }
}

/// Parses program text. Kind errors are reported as parse errors; label and
/// single-assignment problems are left to [`validate_program`].
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut program = Program::default();
    let mut lines = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut c = Cursor::new(content);
        let Some(first) = c.peek() else { continue };
        c.pos += 1;
        let err = |message: String| ParseError { line, message };
        match first {
            ".memory" | ".registers" => {
                let n = parse_uint(c.next().map_err(err)?).map_err(err)?;
                if first == ".memory" {
                    program.memory_size = n;
                } else {
                    program.register_size = n;
                }
            }
            _ => {
                let stmt = parse_stmt(&mut c, first).map_err(err)?;
                program.statements.push(stmt);
                lines.push(line);
            }
        }
        c.finish().map_err(err)?;
    }
    if let Some(d) = validate_program(&program)
        .into_iter()
        .find(|d| d.kind == DiagnosticKind::Kind)
    {
        return Err(ParseError {
            line: lines.get(d.stmt).copied().unwrap_or(0),
            message: format!("kind mismatch: {}", d.message),
        });
    }
    Ok(program)
}
