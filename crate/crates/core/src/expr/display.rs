use std::fmt;

use super::{BinaryOp, Expr, UnaryOp, Var};

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Y(j) => write!(f, "y{}", j + 1),
        }
    }
}

// Binding strength used to decide where parentheses are required.
const ADDITIVE: u8 = 1;
const MULTIPLICATIVE: u8 = 2;
const PREFIX: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) if c.is_sign_negative() => PREFIX,
        Expr::Const(_) | Expr::Var(_) => ATOM,
        Expr::Unary(UnaryOp::Neg, _) => PREFIX,
        Expr::Unary(..) => ATOM,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => ADDITIVE,
        Expr::Binary(..) => MULTIPLICATIVE,
        Expr::Pow(..) => POWER,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints with the minimal parentheses that reparse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                // `-(2)` keeps a negated literal from folding into a constant.
                let parens = precedence(a) < PREFIX || matches!(**a, Expr::Const(_));
                write_operand(f, a, parens)
            }
            Expr::Unary(op, a) => {
                let name = match op {
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}({a})")
            }
            Expr::Binary(op, a, b) => {
                let p = precedence(self);
                let sym = match op {
                    BinaryOp::Add => " + ",
                    BinaryOp::Sub => " - ",
                    BinaryOp::Mul => " * ",
                    BinaryOp::Div => " / ",
                };
                write_operand(f, a, precedence(a) < p)?;
                f.write_str(sym)?;
                write_operand(f, b, precedence(b) <= p)
            }
            Expr::Pow(a, k) => {
                write_operand(f, a, precedence(a) < POWER)?;
                write!(f, "^{k}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    fn roundtrip(src: &str, n: usize, m: usize) -> String {
        let e = parse(src, n, m).unwrap();
        let printed = e.to_string();
        let again = parse(&printed, n, m).unwrap();
        assert_eq!(e, again, "{src} -> {printed}");
        printed
    }

    #[test]
    fn minimal_parentheses() {
        assert_eq!(roundtrip("x1^2 + y1*y2", 1, 2), "x1^2 + y1 * y2");
        assert_eq!(roundtrip("(x1 + y1) * y2", 1, 2), "(x1 + y1) * y2");
        assert_eq!(roundtrip("x1 - (y1 - y2)", 1, 2), "x1 - (y1 - y2)");
        assert_eq!(roundtrip("(y1 - x1)^2 / 2", 1, 1), "(y1 - x1)^2 / 2");
        assert_eq!(roundtrip("-x1^2", 1, 0), "-x1^2");
        assert_eq!(roundtrip("(-x1)^2", 1, 0), "(-x1)^2");
        assert_eq!(roundtrip("(-2)^2", 0, 0), "(-2)^2");
        assert_eq!(roundtrip("x1 * -2", 1, 0), "x1 * -2");
        assert_eq!(roundtrip("x1^2^3", 1, 0), "x1^2^3");
        assert_eq!(roundtrip("exp(-(x1 + 1))", 1, 0), "exp(-(x1 + 1))");
    }

    #[test]
    fn tiny_and_huge_literals_survive() {
        roundtrip("1e-300 * x1 + 1e300", 1, 0);
        roundtrip("0.1 + 0.2", 0, 0);
    }
}
