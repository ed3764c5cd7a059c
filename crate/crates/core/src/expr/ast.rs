use std::collections::BTreeSet;
use std::fmt;

/// Field arithmetic over named random variables.
///
/// Constants are non-negative integers and are reduced modulo the field
/// characteristic at evaluation time. A quotient whose denominator evaluates
/// to zero yields the sentinel [`FieldValue::Infinity`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldExpr {
    Var(String),
    Const(u64),
    Neg(Box<FieldExpr>),
    Add(Box<FieldExpr>, Box<FieldExpr>),
    Sub(Box<FieldExpr>, Box<FieldExpr>),
    Mul(Box<FieldExpr>, Box<FieldExpr>),
    Div(Box<FieldExpr>, Box<FieldExpr>),
}

/// Node kind, independent of children.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Variable,
    Constant,
    Sum,
    Difference,
    Product,
    Quotient,
    Negation,
}

impl FieldExpr {
    pub fn var(name: impl Into<String>) -> Self {
        FieldExpr::Var(name.into())
    }

    pub fn kind(&self) -> NodeKind {
        match self {
            FieldExpr::Var(_) => NodeKind::Variable,
            FieldExpr::Const(_) => NodeKind::Constant,
            FieldExpr::Neg(_) => NodeKind::Negation,
            FieldExpr::Add(..) => NodeKind::Sum,
            FieldExpr::Sub(..) => NodeKind::Difference,
            FieldExpr::Mul(..) => NodeKind::Product,
            FieldExpr::Div(..) => NodeKind::Quotient,
        }
    }

    pub fn children(&self) -> Vec<&FieldExpr> {
        match self {
            FieldExpr::Var(_) | FieldExpr::Const(_) => vec![],
            FieldExpr::Neg(a) => vec![a],
            FieldExpr::Add(a, b)
            | FieldExpr::Sub(a, b)
            | FieldExpr::Mul(a, b)
            | FieldExpr::Div(a, b) => vec![a, b],
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, FieldExpr::Var(_) | FieldExpr::Const(_))
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Leaf variable names.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            FieldExpr::Var(v) => {
                out.insert(v.clone());
            }
            FieldExpr::Const(_) => {}
            _ => self.children().into_iter().for_each(|c| c.collect_vars(out)),
        }
    }

    /// Replace variables by expressions; unmapped variables are kept.
    pub fn substitute(&self, map: &dyn Fn(&str) -> Option<FieldExpr>) -> FieldExpr {
        use FieldExpr::*;
        match self {
            Var(v) => map(v).unwrap_or_else(|| self.clone()),
            Const(c) => Const(*c),
            Neg(a) => Neg(Box::new(a.substitute(map))),
            Add(a, b) => Add(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            Sub(a, b) => Sub(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            Mul(a, b) => Mul(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            Div(a, b) => Div(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
        }
    }

    /// Normal form modulo commutativity and associativity of `+` and `*`.
    ///
    /// Two expressions with equal canonical forms compute the same value on
    /// every assignment, including the `∞` cases.
    pub fn canonical(&self) -> FieldExpr {
        use FieldExpr::*;
        match self {
            Var(_) | Const(_) => self.clone(),
            Neg(a) => Neg(Box::new(a.canonical())),
            Sub(a, b) => Sub(Box::new(a.canonical()), Box::new(b.canonical())),
            Div(a, b) => Div(Box::new(a.canonical()), Box::new(b.canonical())),
            Add(..) | Mul(..) => {
                let is_add = matches!(self, Add(..));
                let mut operands = Vec::new();
                self.flatten(is_add, &mut operands);
                let mut operands: Vec<FieldExpr> =
                    operands.into_iter().map(|e| e.canonical()).collect();
                operands.sort_by_cached_key(|e| e.to_string());
                let mut iter = operands.into_iter();
                let first = iter.next().expect("chain has at least two operands");
                iter.fold(first, |acc, e| {
                    if is_add {
                        Add(Box::new(acc), Box::new(e))
                    } else {
                        Mul(Box::new(acc), Box::new(e))
                    }
                })
            }
        }
    }

    fn flatten<'a>(&'a self, is_add: bool, out: &mut Vec<&'a FieldExpr>) {
        match (self, is_add) {
            (FieldExpr::Add(a, b), true) | (FieldExpr::Mul(a, b), false) => {
                a.flatten(is_add, out);
                b.flatten(is_add, out);
            }
            _ => out.push(self),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            FieldExpr::Add(..) | FieldExpr::Sub(..) => 1,
            FieldExpr::Mul(..) | FieldExpr::Div(..) => 2,
            FieldExpr::Neg(_) => 3,
            FieldExpr::Var(_) | FieldExpr::Const(_) => 4,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &FieldExpr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldExpr::Var(v) => write!(f, "{v}"),
            FieldExpr::Const(c) => write!(f, "{c}"),
            FieldExpr::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, a.precedence() < 3)
            }
            FieldExpr::Add(a, b)
            | FieldExpr::Sub(a, b)
            | FieldExpr::Mul(a, b)
            | FieldExpr::Div(a, b) => {
                let prec = self.precedence();
                let op = match self {
                    FieldExpr::Add(..) => "+",
                    FieldExpr::Sub(..) => "-",
                    FieldExpr::Mul(..) => "*",
                    _ => "/",
                };
                write_child(f, a, a.precedence() < prec)?;
                write!(f, "{op}")?;
                // left-associative: an equal-precedence right operand keeps its parentheses
                write_child(f, b, b.precedence() <= prec)
            }
        }
    }
}
