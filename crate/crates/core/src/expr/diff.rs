use super::{BinaryOp, Expr, UnaryOp, Var};

impl Expr {
    /// Exact symbolic derivative with respect to `v`.
    ///
    /// Only constant folding and the identities `0 ± e`, `1 · e`, `e^1`
    /// are applied; the result is otherwise unsimplified.
    pub fn differentiate(&self, v: Var) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(w) => Expr::Const(if *w == v { 1.0 } else { 0.0 }),
            Expr::Unary(op, a) => {
                let da = a.differentiate(v);
                match op {
                    UnaryOp::Neg => neg(da),
                    UnaryOp::Sin => mul(unary(UnaryOp::Cos, (**a).clone()), da),
                    UnaryOp::Cos => mul(neg(unary(UnaryOp::Sin, (**a).clone())), da),
                    UnaryOp::Exp => mul(unary(UnaryOp::Exp, (**a).clone()), da),
                }
            }
            Expr::Binary(op, a, b) => {
                let da = a.differentiate(v);
                let db = b.differentiate(v);
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinaryOp::Add => add(da, db),
                    BinaryOp::Sub => sub(da, db),
                    BinaryOp::Mul => add(mul(da, b), mul(a, db)),
                    BinaryOp::Div => {
                        if db.is_zero() {
                            div(da, b)
                        } else {
                            div(sub(mul(da, b.clone()), mul(a, db)), pow(b, 2))
                        }
                    }
                }
            }
            Expr::Pow(a, k) => match k {
                0 => Expr::Const(0.0),
                _ => {
                    let da = a.differentiate(v);
                    mul(mul(Expr::Const(f64::from(*k)), pow((**a).clone(), k - 1)), da)
                }
            },
        }
    }
}

fn folded(c: f64, fallback: impl FnOnce() -> Expr) -> Expr {
    if c.is_finite() {
        Expr::Const(c)
    } else {
        fallback()
    }
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => folded(x + y, || {
            Expr::Binary(BinaryOp::Add, Box::new(a.clone()), Box::new(b.clone()))
        }),
        _ if a.is_zero() => b,
        _ if b.is_zero() => a,
        _ => Expr::Binary(BinaryOp::Add, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => folded(x - y, || {
            Expr::Binary(BinaryOp::Sub, Box::new(a.clone()), Box::new(b.clone()))
        }),
        _ if b.is_zero() => a,
        _ if a.is_zero() => neg(b),
        _ => Expr::Binary(BinaryOp::Sub, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => folded(x * y, || {
            Expr::Binary(BinaryOp::Mul, Box::new(a.clone()), Box::new(b.clone()))
        }),
        _ if a.is_zero() || b.is_zero() => Expr::Const(0.0),
        _ if a.is_one() => b,
        _ if b.is_one() => a,
        _ => Expr::Binary(BinaryOp::Mul, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) if *y != 0.0 => folded(x / y, || {
            Expr::Binary(BinaryOp::Div, Box::new(a.clone()), Box::new(b.clone()))
        }),
        _ if b.is_one() => a,
        _ => Expr::Binary(BinaryOp::Div, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Unary(UnaryOp::Neg, inner) => *inner,
        other => Expr::Unary(UnaryOp::Neg, Box::new(other)),
    }
}

fn unary(op: UnaryOp, a: Expr) -> Expr {
    if let Expr::Const(c) = a {
        let v = match op {
            UnaryOp::Neg => -c,
            UnaryOp::Sin => c.sin(),
            UnaryOp::Cos => c.cos(),
            UnaryOp::Exp => c.exp(),
        };
        return folded(v, || Expr::Unary(op, Box::new(Expr::Const(c))));
    }
    Expr::Unary(op, Box::new(a))
}

fn pow(a: Expr, k: u32) -> Expr {
    match (k, &a) {
        (0, _) => Expr::Const(1.0),
        (1, _) => a,
        (_, Expr::Const(c)) => {
            let v = c.powi(k as i32);
            folded(v, || Expr::Pow(Box::new(a.clone()), k))
        }
        _ => Expr::Pow(Box::new(a), k),
    }
}
