use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::ast::FieldExpr;
use super::lexer::{tokenize, Tok, Token};
use super::statement::{one, DeclGroup, EntropyTerm, Hypothesis, InequalityStatement, Relation, Side, Term};
use super::{is_reserved, ParseError};

const FLAGS: &[&str] = &["iid", "indep", "nonzero"];
const CLAUSES: &[&str] = &["using", "given", "identity", "assuming"];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    src_len: usize,
    /// First use of each variable, for undeclared-variable diagnostics.
    uses: BTreeMap<String, usize>,
}

/// Parse a single field expression.
pub fn parse_expression(text: &str) -> Result<FieldExpr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Parse an entropy statement with its `where` declarations and clauses.
pub fn parse_statement(text: &str) -> Result<InequalityStatement, ParseError> {
    let mut p = Parser::new(text)?;
    let left = p.side()?;
    let relation = p.relation()?;
    let right = p.side()?;
    p.keyword("where")?;
    let groups = p.declarations()?;
    let mut stmt = InequalityStatement {
        left,
        relation,
        right,
        groups,
        auxiliary: Vec::new(),
        nonzero_exprs: Vec::new(),
        identities: Vec::new(),
        hypotheses: Vec::new(),
    };
    p.clauses(&mut stmt)?;
    p.expect_end()?;
    check_declared(&stmt, &p.uses)?;
    Ok(stmt)
}

fn check_declared(
    stmt: &InequalityStatement,
    uses: &BTreeMap<String, usize>,
) -> Result<(), ParseError> {
    let declared: BTreeSet<String> = stmt.declared_variables().into_iter().collect();
    // report the earliest offending use
    let mut missing: Vec<(usize, &String)> = uses
        .iter()
        .filter(|(name, _)| !declared.contains(*name))
        .map(|(name, off)| (*off, name))
        .collect();
    missing.sort();
    if let Some((offset, name)) = missing.first() {
        return Err(ParseError::Undeclared {
            name: (*name).clone(),
            offset: *offset,
        });
    }
    Ok(())
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        let tokens = tokenize(src)?;
        if tokens.is_empty() {
            return Err(ParseError::Empty);
        }
        Ok(Parser {
            tokens,
            pos: 0,
            src_len: src.len(),
            uses: BTreeMap::new(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + k).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map_or(self.src_len, |t| t.offset)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Ident(s)) => Some(s),
            _ => None,
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        match self.tokens.get(self.pos) {
            Some(Token {
                tok: Tok::RParen,
                offset,
            }) if expected != "`)`" => ParseError::UnmatchedParen { offset: *offset },
            Some(t) => ParseError::Unexpected {
                expected: expected.to_string(),
                found: t.tok.describe(),
                offset: t.offset,
            },
            None => ParseError::UnexpectedEnd {
                expected: expected.to_string(),
                offset: self.src_len,
            },
        }
    }

    fn expect(&mut self, tok: &Tok, expected: &str) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.tokens.get(self.pos) {
            None => Ok(()),
            Some(Token {
                tok: Tok::RParen,
                offset,
            }) => Err(ParseError::UnmatchedParen { offset: *offset }),
            Some(_) => Err(self.error("end of input")),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        if self.peek_ident() == Some(word) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("`{word}`")))
        }
    }

    // expr := mul (("+" | "-") mul)*
    fn expr(&mut self) -> Result<FieldExpr, ParseError> {
        let mut acc = self.mul()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = FieldExpr::Add(Box::new(acc), Box::new(self.mul()?));
            } else if self.eat(&Tok::Minus) {
                acc = FieldExpr::Sub(Box::new(acc), Box::new(self.mul()?));
            } else {
                return Ok(acc);
            }
        }
    }

    // mul := unary (("*" | "/") unary)*
    fn mul(&mut self) -> Result<FieldExpr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(&Tok::Star) {
                acc = FieldExpr::Mul(Box::new(acc), Box::new(self.unary()?));
            } else if self.eat(&Tok::Slash) {
                acc = FieldExpr::Div(Box::new(acc), Box::new(self.unary()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<FieldExpr, ParseError> {
        if self.eat(&Tok::Minus) {
            Ok(FieldExpr::Neg(Box::new(self.unary()?)))
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> Result<FieldExpr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                let t = self.bump();
                if is_reserved(&name) {
                    return Err(ParseError::Reserved {
                        word: name,
                        offset: t.offset,
                    });
                }
                self.uses.entry(name.clone()).or_insert(t.offset);
                Ok(FieldExpr::Var(name))
            }
            Some(Tok::Int(n)) => {
                self.bump();
                Ok(FieldExpr::Const(n))
            }
            Some(Tok::LParen) => {
                let open = self.bump().offset;
                let e = self.expr()?;
                if self.eat(&Tok::RParen) {
                    Ok(e)
                } else if self.peek().is_none() {
                    Err(ParseError::UnclosedParen { offset: open })
                } else {
                    Err(self.error("`)`"))
                }
            }
            _ => Err(self.error("an expression")),
        }
    }

    fn expr_list(&mut self) -> Result<Vec<FieldExpr>, ParseError> {
        let mut out = vec![self.expr()?];
        while self.eat(&Tok::Comma) {
            out.push(self.expr()?);
        }
        Ok(out)
    }

    fn relation(&mut self) -> Result<Relation, ParseError> {
        let r = match self.peek() {
            Some(Tok::Le) => Relation::Le,
            Some(Tok::Ge) => Relation::Ge,
            Some(Tok::Eq) => Relation::Eq,
            _ => return Err(self.error("`<=`, `>=` or `=`")),
        };
        self.pos += 1;
        Ok(r)
    }

    fn rational(&mut self) -> Result<Option<BigRational>, ParseError> {
        let Some(Tok::Int(n)) = self.peek().cloned() else {
            return Ok(None);
        };
        self.bump();
        // `p/q` only when followed by an integer; `/` never appears between terms otherwise
        if self.peek() == Some(&Tok::Slash) {
            if let Some(Tok::Int(d)) = self.peek_at(1).cloned() {
                let off = self.tokens[self.pos + 1].offset;
                self.pos += 2;
                if d == 0 {
                    return Err(ParseError::ZeroDenominator { offset: off });
                }
                return Ok(Some(BigRational::new(BigInt::from(n), BigInt::from(d))));
            }
        }
        Ok(Some(BigRational::from_integer(BigInt::from(n))))
    }

    // term := [rational ["*"]] ("H" "(" exprlist ["|" exprlist] ")" | "log" IDENT) | rational
    fn term(&mut self, negate: bool) -> Result<Term, ParseError> {
        let coef = self.rational()?;
        if coef.is_some()
            && self.peek() == Some(&Tok::Star)
            && matches!(self.peek_at(1), Some(Tok::Ident(s)) if s == "H" || s == "log")
        {
            self.pos += 1;
        }
        let is_head = matches!(self.peek_ident(), Some("H") | Some("log"));
        if let (Some(c), false) = (&coef, is_head) {
            let c = if negate { -c.clone() } else { c.clone() };
            return Ok(Term::Constant(c));
        }
        let mut c = coef.unwrap_or_else(one);
        if negate {
            c = -c;
        }
        match self.peek_ident() {
            Some("H") => {
                self.pos += 1;
                self.expect(&Tok::LParen, "`(`")?;
                let arguments = self.expr_list()?;
                let conditions = if self.eat(&Tok::Pipe) {
                    self.expr_list()?
                } else {
                    Vec::new()
                };
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Term::Entropy(EntropyTerm {
                    coefficient: c,
                    arguments,
                    conditions,
                }))
            }
            Some("log") => {
                self.pos += 1;
                match self.peek().cloned() {
                    Some(Tok::Ident(name)) if !is_reserved(&name) => {
                        self.pos += 1;
                        Ok(Term::Log {
                            coefficient: c,
                            name,
                        })
                    }
                    _ => Err(self.error("a quantity name after `log`")),
                }
            }
            _ => Err(self.error("`H(` or `log`")),
        }
    }

    // side := ["-"] term (("+" | "-") term)*
    fn side(&mut self) -> Result<Side, ParseError> {
        let mut terms = vec![];
        let neg = self.eat(&Tok::Minus);
        terms.push(self.term(neg)?);
        loop {
            if self.eat(&Tok::Plus) {
                terms.push(self.term(false)?);
            } else if self.eat(&Tok::Minus) {
                terms.push(self.term(true)?);
            } else {
                break;
            }
        }
        if let [Term::Constant(c)] = terms.as_slice() {
            if c.is_zero() {
                terms.clear();
            }
        }
        Ok(Side { terms })
    }

    fn declarations(&mut self) -> Result<Vec<DeclGroup>, ParseError> {
        let mut groups: Vec<DeclGroup> = Vec::new();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        loop {
            let mut group = DeclGroup {
                names: Vec::new(),
                iid: false,
                independent: false,
                nonzero: false,
            };
            loop {
                let off = self.offset();
                match self.peek().cloned() {
                    Some(Tok::Ident(name)) if !is_reserved(&name) => {
                        self.pos += 1;
                        if !seen.insert(name.clone()) {
                            return Err(ParseError::DuplicateDeclaration { name, offset: off });
                        }
                        group.names.push(name);
                    }
                    Some(Tok::Ident(name)) => {
                        return Err(ParseError::Reserved {
                            word: name,
                            offset: off,
                        })
                    }
                    _ => return Err(self.error("a variable name")),
                }
                // a comma continues the name list unless flags follow
                if self.peek() == Some(&Tok::Comma)
                    && matches!(self.peek_at(1), Some(Tok::Ident(s)) if !is_reserved(s))
                {
                    self.pos += 1;
                    continue;
                }
                break;
            }
            while let Some(Tok::Ident(word)) = self.peek().cloned() {
                let off = self.offset();
                match word.as_str() {
                    "iid" => group.iid = true,
                    "indep" => group.independent = true,
                    "nonzero" => group.nonzero = true,
                    w if CLAUSES.contains(&w) => break,
                    _ => return Err(ParseError::UnknownFlag { flag: word, offset: off }),
                }
                self.pos += 1;
            }
            groups.push(group);
            let sep = matches!(self.peek(), Some(Tok::Comma) | Some(Tok::Semi));
            let next_is_name = matches!(self.peek_at(1), Some(Tok::Ident(s)) if !CLAUSES.contains(&s.as_str()) && !FLAGS.contains(&s.as_str()));
            if sep && next_is_name {
                self.pos += 1;
                continue;
            }
            return Ok(groups);
        }
    }

    fn clauses(&mut self, stmt: &mut InequalityStatement) -> Result<(), ParseError> {
        loop {
            self.eat(&Tok::Semi);
            match self.peek_ident() {
                Some("using") => {
                    self.pos += 1;
                    stmt.auxiliary.extend(self.expr_list()?);
                }
                Some("given") => {
                    self.pos += 1;
                    loop {
                        let e = self.expr()?;
                        self.expect(&Tok::Ne, "`!=`")?;
                        match self.peek() {
                            Some(Tok::Int(0)) => self.pos += 1,
                            _ => return Err(self.error("`0`")),
                        }
                        stmt.nonzero_exprs.push(e);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                Some("identity") => {
                    self.pos += 1;
                    let l = self.expr()?;
                    self.expect(&Tok::Eq, "`=`")?;
                    let r = self.expr()?;
                    stmt.identities.push((l, r));
                }
                Some("assuming") => {
                    self.pos += 1;
                    loop {
                        let left = self.side()?;
                        let relation = self.relation()?;
                        let right = self.side()?;
                        stmt.hypotheses.push(Hypothesis {
                            left,
                            relation,
                            right,
                        });
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }
}
