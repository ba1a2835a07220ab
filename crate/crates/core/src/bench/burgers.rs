//! Two-dimensional viscous Burgers' equation on the unit square, unrolled
//! into straight-line IR.
//!
//! Explicit Euler in time, first-order upwind convection, central
//! diffusion. Boundary nodes keep their initial values. Every initial
//! value is an input; the Euclidean norm of the final state is the output.

use crate::ir::{Expr, MachineState, Opcode, Program, Stmt, TempId, ValueKind};

use super::BenchError;

/// Default bound on generated statements.
pub const DEFAULT_STATEMENT_BUDGET: usize = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BurgersConfig {
    pub nx: usize,
    pub nt: usize,
    pub dt: f64,
    pub dx: f64,
    pub viscosity: f64,
    pub max_statements: usize,
}

impl BurgersConfig {
    /// Grid spacing `1/(nx-1)` and a time step inside the convective and
    /// diffusive stability limits.
    pub fn new(nx: usize, nt: usize) -> Self {
        let viscosity = 0.01;
        let dx = 1.0 / (nx.max(2) - 1) as f64;
        let dt = (0.2 * dx).min(0.2 * dx * dx / viscosity);
        BurgersConfig {
            nx,
            nt,
            dt,
            dx,
            viscosity,
            max_statements: DEFAULT_STATEMENT_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.nx < 3 {
            return Err(BenchError::Config(format!(
                "nx must be at least 3, got {}",
                self.nx
            )));
        }
        if self.nt < 1 {
            return Err(BenchError::Config("nt must be at least 1".into()));
        }
        if !(self.dt > 0.0 && self.dx > 0.0 && self.viscosity >= 0.0) {
            return Err(BenchError::Config(
                "dt, dx must be positive and viscosity non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Courant number `dt * max_speed / dx`.
    pub fn courant(&self, max_speed: f64) -> f64 {
        self.dt * max_speed / self.dx
    }

    pub fn inputs(&self) -> usize {
        2 * self.nx * self.nx
    }
}

/// Byte addresses of the four fields and the norm accumulator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub nx: usize,
    pub u: u64,
    pub v: u64,
    pub u_next: u64,
    pub v_next: u64,
    pub norm: u64,
    pub memory_size: u64,
}

impl Layout {
    pub fn new(nx: usize) -> Self {
        let field = (nx * nx * 8) as u64;
        Layout {
            nx,
            u: 0,
            v: field,
            u_next: 2 * field,
            v_next: 3 * field,
            norm: 4 * field,
            memory_size: 4 * field + 8,
        }
    }

    pub fn at(&self, base: u64, i: usize, j: usize) -> u64 {
        base + ((j * self.nx + i) * 8) as u64
    }

    /// Field pair holding the state after `step` steps.
    pub fn fields_after(&self, step: usize) -> (u64, u64) {
        if step.is_multiple_of(2) {
            (self.u, self.v)
        } else {
            (self.u_next, self.v_next)
        }
    }
}

#[derive(Clone, Debug)]
pub struct BurgersProgram {
    pub program: Program,
    pub layout: Layout,
    pub inputs: usize,
    pub outputs: usize,
    /// Floating-point operations emitted; each one has an active operand.
    pub fp_ops: u64,
}

/// Initial velocity at grid point `(x, y)`: a positive background plus a
/// Gaussian bump for `u`, the mirror image with negative sign for `v`.
pub fn initial_velocity(x: f64, y: f64) -> (f64, f64) {
    let bump = |cx: f64, cy: f64| {
        let r2 = (x - cx).powi(2) + (y - cy).powi(2);
        (-r2 / (2.0 * 0.1 * 0.1)).exp()
    };
    (0.5 + bump(0.5, 0.5), -(0.4 + 0.6 * bump(0.4, 0.6)))
}

struct Emitter {
    stmts: Vec<Stmt>,
    budget: usize,
    fp_ops: u64,
}

impl Emitter {
    fn push(&mut self, s: Stmt) -> Result<(), BenchError> {
        if self.stmts.len() >= self.budget {
            return Err(BenchError::Budget(self.budget));
        }
        self.stmts.push(s);
        Ok(())
    }

    fn load(&mut self, t: TempId, addr: u64) -> Result<(), BenchError> {
        self.push(Stmt::WrTmp(t, Expr::load(ValueKind::F64, Expr::addr(addr))))
    }

    fn bin(&mut self, t: TempId, op: Opcode, a: Expr, b: Expr) -> Result<(), BenchError> {
        if matches!(op.class(), crate::ir::OpClass::FpBinary(_)) {
            self.fp_ops += 1;
        }
        self.push(Stmt::WrTmp(t, Expr::binop(op, a, b)))
    }
}

fn tmp(t: TempId) -> Expr {
    Expr::tmp(t)
}

/// Generates the unrolled program for `cfg`.
pub fn gen_burgers(cfg: &BurgersConfig) -> Result<BurgersProgram, BenchError> {
    use Opcode::*;
    cfg.validate()?;
    let nx = cfg.nx;
    let lay = Layout::new(nx);
    let mut e = Emitter {
        stmts: Vec::new(),
        budget: cfg.max_statements,
        fp_ops: 0,
    };

    for base in [lay.u, lay.v] {
        for j in 0..nx {
            for i in 0..nx {
                e.push(Stmt::InputRequest {
                    addr: Expr::addr(lay.at(base, i, j)),
                    kind: ValueKind::F64,
                })?;
            }
        }
    }
    for (src, dst) in [(lay.u, lay.u_next), (lay.v, lay.v_next)] {
        for j in 0..nx {
            for i in 0..nx {
                if i == 0 || j == 0 || i == nx - 1 || j == nx - 1 {
                    e.push(Stmt::Store {
                        addr: Expr::addr(lay.at(dst, i, j)),
                        data: Expr::load(ValueKind::F64, Expr::addr(lay.at(src, i, j))),
                    })?;
                }
            }
        }
    }

    let inv_dx = 1.0 / cfg.dx;
    let diff = cfg.viscosity / (cfg.dx * cfg.dx);
    let zero = || Expr::f64(0.0);
    for step in 0..cfg.nt {
        let (su, sv) = lay.fields_after(step);
        let (du, dv) = lay.fields_after(step + 1);
        for (f, (src, dst)) in [(su, du), (sv, dv)].into_iter().enumerate() {
            for j in 1..nx - 1 {
                for i in 1..nx - 1 {
                    e.push(Stmt::Label(format!("s{step}f{f}i{i}j{j}")))?;
                    e.load(0, lay.at(su, i, j))?;
                    e.load(1, lay.at(sv, i, j))?;
                    e.load(2, lay.at(src, i, j))?;
                    e.load(3, lay.at(src, i + 1, j))?;
                    e.load(4, lay.at(src, i - 1, j))?;
                    e.load(5, lay.at(src, i, j + 1))?;
                    e.load(6, lay.at(src, i, j - 1))?;
                    // Upwind differences: backward for positive velocity,
                    // forward otherwise, as (f_c - f_nb) * (+-1/dx).
                    e.push(Stmt::WrTmp(7, Expr::binop(CmpLTF64, zero(), tmp(0))))?;
                    e.push(Stmt::WrTmp(8, Expr::ite(tmp(7), tmp(4), tmp(3))))?;
                    e.push(Stmt::WrTmp(
                        9,
                        Expr::ite(tmp(7), Expr::f64(inv_dx), Expr::f64(-inv_dx)),
                    ))?;
                    e.bin(10, SubF64, tmp(2), tmp(8))?;
                    e.bin(11, MulF64, tmp(10), tmp(9))?;
                    e.push(Stmt::WrTmp(12, Expr::binop(CmpLTF64, zero(), tmp(1))))?;
                    e.push(Stmt::WrTmp(13, Expr::ite(tmp(12), tmp(6), tmp(5))))?;
                    e.push(Stmt::WrTmp(
                        14,
                        Expr::ite(tmp(12), Expr::f64(inv_dx), Expr::f64(-inv_dx)),
                    ))?;
                    e.bin(15, SubF64, tmp(2), tmp(13))?;
                    e.bin(16, MulF64, tmp(15), tmp(14))?;
                    e.bin(17, MulF64, tmp(0), tmp(11))?;
                    e.bin(18, MulF64, tmp(1), tmp(16))?;
                    e.bin(19, AddF64, tmp(17), tmp(18))?;
                    e.bin(20, AddF64, tmp(3), tmp(4))?;
                    e.bin(21, AddF64, tmp(20), tmp(5))?;
                    e.bin(22, AddF64, tmp(21), tmp(6))?;
                    e.bin(23, MulF64, Expr::f64(4.0), tmp(2))?;
                    e.bin(24, SubF64, tmp(22), tmp(23))?;
                    e.bin(25, MulF64, tmp(24), Expr::f64(diff))?;
                    e.bin(26, SubF64, tmp(25), tmp(19))?;
                    e.bin(27, MulF64, tmp(26), Expr::f64(cfg.dt))?;
                    e.bin(28, AddF64, tmp(2), tmp(27))?;
                    e.push(Stmt::Store {
                        addr: Expr::addr(lay.at(dst, i, j)),
                        data: tmp(28),
                    })?;
                }
            }
        }
    }

    let (fu, fv) = lay.fields_after(cfg.nt);
    e.push(Stmt::Label("norm".into()))?;
    e.push(Stmt::Store {
        addr: Expr::addr(lay.norm),
        data: Expr::f64(0.0),
    })?;
    for base in [fu, fv] {
        for j in 0..nx {
            for i in 0..nx {
                e.push(Stmt::Label(format!("n{base}i{i}j{j}")))?;
                e.load(0, lay.at(base, i, j))?;
                e.bin(1, MulF64, tmp(0), tmp(0))?;
                e.load(2, lay.norm)?;
                e.bin(3, AddF64, tmp(2), tmp(1))?;
                e.push(Stmt::Store {
                    addr: Expr::addr(lay.norm),
                    data: tmp(3),
                })?;
            }
        }
    }
    e.push(Stmt::Label("out".into()))?;
    e.push(Stmt::WrTmp(
        0,
        Expr::unop(SqrtF64, Expr::load(ValueKind::F64, Expr::addr(lay.norm))),
    ))?;
    e.fp_ops += 1;
    e.push(Stmt::Store {
        addr: Expr::addr(lay.norm),
        data: tmp(0),
    })?;
    e.push(Stmt::OutputRequest {
        addr: Expr::addr(lay.norm),
        kind: ValueKind::F64,
    })?;
    e.push(Stmt::Halt)?;

    Ok(BurgersProgram {
        program: Program::new(e.stmts, lay.memory_size, 0),
        layout: lay,
        inputs: cfg.inputs(),
        outputs: 1,
        fp_ops: e.fp_ops,
    })
}

/// Memory preloaded with the initial velocity field.
pub fn initial_state(cfg: &BurgersConfig, bp: &BurgersProgram) -> MachineState {
    let mut st = MachineState::for_program(&bp.program);
    let lay = bp.layout;
    for j in 0..cfg.nx {
        for i in 0..cfg.nx {
            let (u, v) = initial_velocity(i as f64 * cfg.dx, j as f64 * cfg.dx);
            st.store_f64(lay.at(lay.u, i, j), u)
                .expect("layout fits memory");
            st.store_f64(lay.at(lay.v, i, j), v)
                .expect("layout fits memory");
        }
    }
    st
}

/// Reference solution computed directly in Rust, for checking the
/// generated program's output value.
pub fn reference_norm(cfg: &BurgersConfig) -> f64 {
    let nx = cfg.nx;
    let idx = |i: usize, j: usize| j * nx + i;
    let mut u = vec![0.0; nx * nx];
    let mut v = vec![0.0; nx * nx];
    for j in 0..nx {
        for i in 0..nx {
            let (a, b) = initial_velocity(i as f64 * cfg.dx, j as f64 * cfg.dx);
            u[idx(i, j)] = a;
            v[idx(i, j)] = b;
        }
    }
    let inv_dx = 1.0 / cfg.dx;
    let diff = cfg.viscosity / (cfg.dx * cfg.dx);
    for _ in 0..cfg.nt {
        let (mut un, mut vn) = (u.clone(), v.clone());
        for (src, dst) in [(&u, &mut un), (&v, &mut vn)] {
            for j in 1..nx - 1 {
                for i in 1..nx - 1 {
                    let (uc, vc) = (u[idx(i, j)], v[idx(i, j)]);
                    let c = src[idx(i, j)];
                    let (e, w, n, s) = (
                        src[idx(i + 1, j)],
                        src[idx(i - 1, j)],
                        src[idx(i, j + 1)],
                        src[idx(i, j - 1)],
                    );
                    let dfx = if 0.0 < uc {
                        (c - w) * inv_dx
                    } else {
                        (c - e) * -inv_dx
                    };
                    let dfy = if 0.0 < vc {
                        (c - s) * inv_dx
                    } else {
                        (c - n) * -inv_dx
                    };
                    let conv = uc * dfx + vc * dfy;
                    let lap = (e + w + n + s - 4.0 * c) * diff;
                    dst[idx(i, j)] = c + (lap - conv) * cfg.dt;
                }
            }
        }
        u = un;
        v = vn;
    }
    u.iter().chain(&v).fold(0.0, |acc, x| acc + x * x).sqrt()
}
