//! A small predicate language over coordinate variables, compiled to event
//! truth tables by exact rational evaluation.
//!
//! ```text
//! expr   := or ;  or := and { "or" and } ;  and := not { "and" not } ;
//! not    := "not" not | atom ;  atom := cmp | "(" expr ")" ;
//! cmp    := sum [ ("<"|"<="|">"|">="|"=="|"!=") sum ] ;
//! sum    := term { ("+"|"-") term } ;  term := factor { "*" factor } ;
//! factor := INT | INT "/" INT | "x" "[" INT "]" | "-" factor | "(" sum ")" .
//! ```
//!
//! Coordinates are 1-based. Division only appears in rational literals.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::model::{Atom, Event, ProductSpace};
use crate::rational::{format_rational, Rational};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    fn apply(self, l: &Rational, r: &Rational) -> bool {
        match self {
            CmpOp::Lt => l < r,
            CmpOp::Le => l <= r,
            CmpOp::Gt => l > r,
            CmpOp::Ge => l >= r,
            CmpOp::Eq => l == r,
            CmpOp::Ne => l != r,
        }
    }
}

/// Parsed predicate. `Var` holds the 1-based coordinate index as written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Predicate {
    Num(Rational),
    Var(usize),
    Neg(Box<Predicate>),
    Arith(ArithOp, Box<Predicate>, Box<Predicate>),
    Cmp(CmpOp, Box<Predicate>, Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn is_boolean(&self) -> bool {
        matches!(
            self,
            Predicate::Cmp(..) | Predicate::And(..) | Predicate::Or(..) | Predicate::Not(_)
        )
    }

    /// Referenced coordinates, 1-based.
    pub fn variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Predicate::Num(_) => {}
            Predicate::Var(j) => {
                out.insert(*j);
            }
            Predicate::Neg(e) | Predicate::Not(e) => e.collect_vars(out),
            Predicate::Arith(_, l, r)
            | Predicate::Cmp(_, l, r)
            | Predicate::And(l, r)
            | Predicate::Or(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    /// Evaluates an arithmetic node; `value(j)` gives coordinate `j` (1-based).
    pub fn eval_number(&self, value: &dyn Fn(usize) -> Rational) -> Rational {
        match self {
            Predicate::Num(q) => q.clone(),
            Predicate::Var(j) => value(*j),
            Predicate::Neg(e) => -e.eval_number(value),
            Predicate::Arith(op, l, r) => {
                let (l, r) = (l.eval_number(value), r.eval_number(value));
                match op {
                    ArithOp::Add => l + r,
                    ArithOp::Sub => l - r,
                    ArithOp::Mul => l * r,
                }
            }
            _ => panic!("boolean node evaluated as a number"),
        }
    }

    pub fn eval_bool(&self, value: &dyn Fn(usize) -> Rational) -> bool {
        match self {
            Predicate::Cmp(op, l, r) => op.apply(&l.eval_number(value), &r.eval_number(value)),
            Predicate::And(l, r) => l.eval_bool(value) && r.eval_bool(value),
            Predicate::Or(l, r) => l.eval_bool(value) || r.eval_bool(value),
            Predicate::Not(e) => !e.eval_bool(value),
            _ => panic!("arithmetic node evaluated as a boolean"),
        }
    }

    fn is_leaf(&self) -> bool {
        matches!(
            self,
            Predicate::Num(_) | Predicate::Var(_) | Predicate::Neg(_)
        )
    }
}

/// Prints with explicit parentheses around every compound operand, so the
/// output parses back to the same tree.
impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        struct Operand<'a>(&'a Predicate);
        impl fmt::Display for Operand<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                if self.0.is_leaf() {
                    write!(f, "{}", self.0)
                } else {
                    write!(f, "({})", self.0)
                }
            }
        }
        match self {
            Predicate::Num(q) => f.write_str(&format_rational(q)),
            Predicate::Var(j) => write!(f, "x[{j}]"),
            Predicate::Neg(e) => write!(f, "-{}", Operand(e)),
            Predicate::Arith(op, l, r) => {
                let sym = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                };
                write!(f, "{} {sym} {}", Operand(l), Operand(r))
            }
            Predicate::Cmp(op, l, r) => write!(f, "{} {} {}", Operand(l), op.symbol(), Operand(r)),
            Predicate::And(l, r) => write!(f, "{} and {}", Operand(l), Operand(r)),
            Predicate::Or(l, r) => write!(f, "{} or {}", Operand(l), Operand(r)),
            Predicate::Not(e) => write!(f, "not {}", Operand(e)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    X,
    And,
    Or,
    Not,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Cmp(CmpOp),
    End,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Int(v) => format!("integer {v}"),
        Tok::X => "'x'".into(),
        Tok::And => "'and'".into(),
        Tok::Or => "'or'".into(),
        Tok::Not => "'not'".into(),
        Tok::LBracket => "'['".into(),
        Tok::RBracket => "']'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Cmp(op) => format!("'{}'", op.symbol()),
        Tok::End => "end of input".into(),
    }
}

fn syntax(column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        column,
        message: message.into(),
    }
}

/// Tokens paired with their 1-based starting column.
fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let v = BigInt::from_str(&digits).expect("decimal digits");
            out.push((Tok::Int(v), col));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "x" => Tok::X,
                "and" => Tok::And,
                "or" => Tok::Or,
                "not" => Tok::Not,
                _ => return Err(syntax(col, format!("unknown identifier {word:?}"))),
            };
            out.push((tok, col));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('<', Some('=')) => (Tok::Cmp(CmpOp::Le), 2),
            ('>', Some('=')) => (Tok::Cmp(CmpOp::Ge), 2),
            ('=', Some('=')) => (Tok::Cmp(CmpOp::Eq), 2),
            ('!', Some('=')) => (Tok::Cmp(CmpOp::Ne), 2),
            ('<', _) => (Tok::Cmp(CmpOp::Lt), 1),
            ('>', _) => (Tok::Cmp(CmpOp::Gt), 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            _ => return Err(syntax(col, format!("unexpected character {c:?}"))),
        };
        out.push((tok, col));
        i += len;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn column(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.tokens[self.pos].clone();
        if t.0 != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.column(),
                format!(
                    "expected {}, found {}",
                    describe(&want),
                    describe(self.peek())
                ),
            ))
        }
    }

    fn boolean(e: Predicate, col: usize, what: &str) -> Result<Predicate> {
        if e.is_boolean() {
            Ok(e)
        } else {
            Err(syntax(col, format!("{what} needs a boolean operand")))
        }
    }

    fn arith(e: Predicate, col: usize, what: &str) -> Result<Predicate> {
        if e.is_boolean() {
            Err(syntax(col, format!("{what} needs an arithmetic operand")))
        } else {
            Ok(e)
        }
    }

    fn or(&mut self) -> Result<Predicate> {
        let col = self.column();
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            lhs = Self::boolean(lhs, col, "'or'")?;
            self.bump();
            let rcol = self.column();
            let rhs = Self::boolean(self.and()?, rcol, "'or'")?;
            lhs = Predicate::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Predicate> {
        let col = self.column();
        let mut lhs = self.not()?;
        while *self.peek() == Tok::And {
            lhs = Self::boolean(lhs, col, "'and'")?;
            self.bump();
            let rcol = self.column();
            let rhs = Self::boolean(self.not()?, rcol, "'and'")?;
            lhs = Predicate::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Predicate> {
        if *self.peek() == Tok::Not {
            self.bump();
            let col = self.column();
            let inner = Self::boolean(self.not()?, col, "'not'")?;
            return Ok(Predicate::Not(Box::new(inner)));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> Result<Predicate> {
        let col = self.column();
        let lhs = self.sum()?;
        let Tok::Cmp(op) = *self.peek() else {
            return Ok(lhs);
        };
        let lhs = Self::arith(lhs, col, "comparison")?;
        self.bump();
        let rcol = self.column();
        let rhs = Self::arith(self.sum()?, rcol, "comparison")?;
        if let Tok::Cmp(_) = self.peek() {
            return Err(syntax(self.column(), "comparison chains are not supported"));
        }
        Ok(Predicate::Cmp(op, Box::new(lhs), Box::new(rhs)))
    }

    fn sum(&mut self) -> Result<Predicate> {
        let col = self.column();
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            lhs = Self::arith(lhs, col, "'+'/'-'")?;
            self.bump();
            let rcol = self.column();
            let rhs = Self::arith(self.term()?, rcol, "'+'/'-'")?;
            lhs = Predicate::Arith(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Predicate> {
        let col = self.column();
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            lhs = Self::arith(lhs, col, "'*'")?;
            self.bump();
            let rcol = self.column();
            let rhs = Self::arith(self.factor()?, rcol, "'*'")?;
            lhs = Predicate::Arith(ArithOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        if *self.peek() == Tok::Slash {
            return Err(syntax(
                self.column(),
                "division is only allowed inside a rational literal",
            ));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Predicate> {
        let (tok, col) = self.bump();
        match tok {
            Tok::Int(n) => {
                if *self.peek() != Tok::Slash {
                    return Ok(Predicate::Num(Rational::from_integer(n)));
                }
                self.bump();
                match self.bump() {
                    (Tok::Int(d), dcol) => {
                        if d.is_zero() {
                            return Err(syntax(dcol, "zero denominator"));
                        }
                        Ok(Predicate::Num(Rational::new(n, d)))
                    }
                    (other, c) => Err(syntax(
                        c,
                        format!("expected integer denominator, found {}", describe(&other)),
                    )),
                }
            }
            Tok::X => {
                self.expect(Tok::LBracket)?;
                let (idx, icol) = self.bump();
                let Tok::Int(idx) = idx else {
                    return Err(syntax(
                        icol,
                        format!("expected coordinate index, found {}", describe(&idx)),
                    ));
                };
                let idx: usize = idx
                    .try_into()
                    .map_err(|_| syntax(icol, "coordinate index too large"))?;
                self.expect(Tok::RBracket)?;
                Ok(Predicate::Var(idx))
            }
            Tok::Minus => {
                let fcol = self.column();
                let inner = Self::arith(self.factor()?, fcol, "unary '-'")?;
                Ok(Predicate::Neg(Box::new(inner)))
            }
            Tok::LParen => {
                let inner = self.or()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => Err(syntax(
                col,
                format!("expected an expression, found {}", describe(&other)),
            )),
        }
    }
}

/// Parses a boolean predicate.
pub fn parse_predicate(text: &str) -> Result<Predicate> {
    if text.trim().is_empty() {
        return Err(syntax(1, "empty predicate"));
    }
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let expr = parser.or()?;
    if *parser.peek() != Tok::End {
        return Err(syntax(
            parser.column(),
            format!("unexpected {}", describe(parser.peek())),
        ));
    }
    if !expr.is_boolean() {
        return Err(syntax(
            1,
            "predicate must be a comparison or a boolean combination",
        ));
    }
    Ok(expr)
}

/// Builds the event `{x : predicate(x)}` with minimal support.
pub fn compile_predicate(
    space: &ProductSpace,
    name: impl Into<String>,
    predicate: &Predicate,
) -> Result<Event> {
    let name = name.into();
    if !predicate.is_boolean() {
        return Err(Error::input(format!(
            "predicate for {name:?} is not boolean"
        )));
    }
    let vars = predicate.variables();
    let mut values: Vec<Vec<Rational>> = Vec::with_capacity(vars.len());
    for &j in &vars {
        if j == 0 || j > space.dim() {
            return Err(Error::input(format!(
                "predicate for {name:?} references undeclared coordinate x[{j}] (m = {})",
                space.dim()
            )));
        }
        let coord = space.coord(j - 1);
        let numeric: Option<Vec<Rational>> = coord
            .atoms()
            .iter()
            .map(|a| match a {
                Atom::Int(v) => Some(Rational::from_integer((*v).into())),
                Atom::Label(_) => None,
            })
            .collect();
        values.push(numeric.ok_or_else(|| {
            Error::input(format!(
                "predicate for {name:?} uses x[{j}] arithmetically but coordinate {:?} has non-numeric atoms",
                coord.name()
            ))
        })?);
    }
    let support: Vec<usize> = vars.iter().map(|j| j - 1).collect();
    let size = space.tuple_count(&support);
    if size > (1u128 << 26) {
        return Err(Error::input(format!(
            "predicate for {name:?} spans {size} tuples, too many to tabulate"
        )));
    }
    let var_list: Vec<usize> = vars.iter().copied().collect();
    let mut local = vec![0usize; support.len()];
    let mut table = Vec::with_capacity(size as usize);
    for _ in 0..size {
        let lookup = |j: usize| {
            let t = var_list.binary_search(&j).expect("collected variable");
            values[t][local[t]].clone()
        };
        table.push(predicate.eval_bool(&lookup));
        for t in (0..support.len()).rev() {
            local[t] += 1;
            if local[t] < values[t].len() {
                break;
            }
            local[t] = 0;
        }
    }
    Event::new(space, name, support, table)
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_predicate(s)
    }
}

impl Predicate {
    pub fn to_source(&self) -> String {
        self.to_string()
    }
}
