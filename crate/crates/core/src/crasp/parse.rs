//! Line-oriented parser for program text.
//!
//! ```text
//! # comment
//! alphabet {'a','b'}
//! bool PRED_a := LE(ONE, COUNT[dist={1}](Q('a')))
//! count C := COUNT[all](TRUE)
//! next 'a' := PRED_a
//! ```

use std::collections::BTreeSet;

use super::ast::{Definition, Expr, NextDirective, Source, ValueKind, Window};
use super::error::ParseError;
use crate::symbol::Symbol;

const RESERVED: &[&str] = &[
    "bool", "count", "next", "alphabet", "TRUE", "ONE", "Q", "NOT", "AND", "OR", "POS", "LE",
    "COUNT", "EXISTS", "IF", "ADD", "SUB", "all", "dist", "period", "residues",
];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(String),
    Punct(&'static str),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    column: usize,
}

fn lex(line: &str, line_no: usize) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let err = |column: usize, msg: String| ParseError::syntax(line_no, column, msg);
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            break;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), column });
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let value = text
                .parse::<i64>()
                .map_err(|_| err(column, format!("integer literal '{text}' out of range")))?;
            toks.push(Spanned { tok: Tok::Int(value), column });
        } else if c == '\'' {
            i += 1;
            let mut text = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(err(column, "unterminated symbol literal".into())),
                    Some('\\') => {
                        let escaped = chars
                            .get(i + 1)
                            .ok_or_else(|| err(i + 1, "dangling escape in symbol literal".into()))?;
                        text.push(*escaped);
                        i += 2;
                    }
                    Some('\'') => {
                        i += 1;
                        break;
                    }
                    Some(&ch) => {
                        text.push(ch);
                        i += 1;
                    }
                }
            }
            if text.is_empty() {
                return Err(err(column, "empty symbol literal".into()));
            }
            toks.push(Spanned { tok: Tok::Sym(text), column });
        } else if c == ':' && chars.get(i + 1) == Some(&'=') {
            toks.push(Spanned { tok: Tok::Punct(":="), column });
            i += 2;
        } else {
            let p = match c {
                '(' => "(",
                ')' => ")",
                '[' => "[",
                ']' => "]",
                '{' => "{",
                '}' => "}",
                ',' => ",",
                '=' => "=",
                _ => return Err(err(column, format!("unexpected character '{c}'"))),
            };
            toks.push(Spanned { tok: Tok::Punct(p), column });
            i += 1;
        }
    }
    Ok(toks)
}

struct LineParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_column: usize,
}

impl<'a> LineParser<'a> {
    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |t| t.column)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::syntax(self.line, self.column(), msg.into())
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, p: &'static str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Punct(q)) if *q == p => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected '{p}'"))),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected '{kw}'"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn name(&mut self) -> Result<(String, usize), ParseError> {
        let column = self.column();
        match self.bump() {
            Some(Tok::Ident(s)) if !RESERVED.contains(&s.as_str()) => Ok((s, column)),
            Some(Tok::Ident(s)) => {
                Err(ParseError::syntax(self.line, column, format!("'{s}' is a reserved word")))
            }
            _ => Err(ParseError::syntax(self.line, column, "expected a name".into())),
        }
    }

    fn symbol(&mut self) -> Result<Symbol, ParseError> {
        let column = self.column();
        match self.bump() {
            Some(Tok::Sym(s)) => Ok(Symbol::new(s)),
            _ => Err(ParseError::syntax(self.line, column, "expected a quoted symbol".into())),
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let column = self.column();
        match self.bump() {
            Some(Tok::Int(v)) => Ok(v),
            _ => Err(ParseError::syntax(self.line, column, "expected an integer".into())),
        }
    }

    fn int_set(&mut self) -> Result<BTreeSet<i64>, ParseError> {
        self.expect("{")?;
        let mut set = BTreeSet::new();
        if self.peek() == Some(&Tok::Punct("}")) {
            self.pos += 1;
            return Ok(set);
        }
        loop {
            set.insert(self.int()?);
            match self.bump() {
                Some(Tok::Punct(",")) => continue,
                Some(Tok::Punct("}")) => return Ok(set),
                _ => {
                    self.pos -= 1;
                    return Err(self.error("expected ',' or '}'"));
                }
            }
        }
    }

    fn window(&mut self) -> Result<Window, ParseError> {
        self.expect("[")?;
        let column = self.column();
        let window = match self.bump() {
            Some(Tok::Ident(s)) if s == "all" => Window::All,
            Some(Tok::Ident(s)) if s == "dist" => {
                self.expect("=")?;
                Window::Dist(self.int_set()?)
            }
            _ => {
                return Err(ParseError::syntax(self.line, column, "expected 'all' or 'dist='".into()))
            }
        };
        self.expect("]")?;
        Ok(window)
    }

    fn args<const N: usize>(&mut self) -> Result<[Box<Expr>; N], ParseError> {
        self.expect("(")?;
        let mut out: Vec<Box<Expr>> = Vec::with_capacity(N);
        for i in 0..N {
            if i > 0 {
                self.expect(",")?;
            }
            out.push(Box::new(self.expr()?));
        }
        self.expect(")")?;
        Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let column = self.column();
        let head = match self.bump() {
            Some(Tok::Ident(s)) => s,
            _ => return Err(ParseError::syntax(self.line, column, "expected an expression".into())),
        };
        Ok(match head.as_str() {
            "TRUE" => Expr::True,
            "ONE" => Expr::One,
            "Q" => {
                self.expect("(")?;
                let s = self.symbol()?;
                self.expect(")")?;
                Expr::Initial(s)
            }
            "NOT" => {
                let [x] = self.args::<1>()?;
                Expr::Not(x)
            }
            "AND" => {
                let [x, y] = self.args::<2>()?;
                Expr::And(x, y)
            }
            "OR" => {
                let [x, y] = self.args::<2>()?;
                Expr::Or(x, y)
            }
            "LE" => {
                let [x, y] = self.args::<2>()?;
                Expr::Le(x, y)
            }
            "ADD" => {
                let [x, y] = self.args::<2>()?;
                Expr::Add(x, y)
            }
            "SUB" => {
                let [x, y] = self.args::<2>()?;
                Expr::Sub(x, y)
            }
            "IF" => {
                let [c, x, y] = self.args::<3>()?;
                Expr::If(c, x, y)
            }
            "COUNT" | "EXISTS" => {
                let window = self.window()?;
                let [arg] = self.args::<1>()?;
                if head == "COUNT" {
                    Expr::Count { window, arg }
                } else {
                    Expr::Exists { window, arg }
                }
            }
            "POS" => {
                self.expect("(")?;
                self.expect_keyword("period")?;
                self.expect("=")?;
                let period = self.int()?;
                self.expect(",")?;
                self.expect_keyword("residues")?;
                self.expect("=")?;
                let residues = self.int_set()?;
                self.expect(")")?;
                Expr::Pos { period, residues }
            }
            other if RESERVED.contains(&other) => {
                return Err(ParseError::syntax(
                    self.line,
                    column,
                    format!("'{other}' cannot start an expression"),
                ))
            }
            _ => Expr::Ref { name: head, column },
        })
    }
}

/// Parses program text into its syntax tree.
///
/// Only syntax is checked here; name resolution happens when the tree is
/// lowered into a [`super::Program`].
pub fn parse_source(text: &str) -> Result<Source, ParseError> {
    let mut source = Source::default();
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let toks = lex(line, line_no)?;
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser { toks: &toks, pos: 0, line: line_no, end_column: line.chars().count() + 1 };
        let Some(Tok::Ident(head)) = p.peek().cloned() else {
            return Err(p.error("expected 'bool', 'count', 'next' or 'alphabet'"));
        };
        match head.as_str() {
            "alphabet" => {
                p.pos += 1;
                if source.alphabet.is_some() {
                    return Err(ParseError::syntax(line_no, 1, "alphabet declared twice".into()));
                }
                if !source.definitions.is_empty() || !source.nexts.is_empty() {
                    return Err(ParseError::syntax(
                        line_no,
                        1,
                        "alphabet must be declared before any operation".into(),
                    ));
                }
                p.expect("{")?;
                let mut symbols = Vec::new();
                if p.peek() != Some(&Tok::Punct("}")) {
                    loop {
                        symbols.push(p.symbol()?);
                        match p.bump() {
                            Some(Tok::Punct(",")) => continue,
                            Some(Tok::Punct("}")) => break,
                            _ => {
                                p.pos -= 1;
                                return Err(p.error("expected ',' or '}'"));
                            }
                        }
                    }
                } else {
                    p.pos += 1;
                }
                p.finish()?;
                source.alphabet = Some(symbols);
            }
            "bool" | "count" => {
                p.pos += 1;
                if !source.nexts.is_empty() {
                    return Err(ParseError::syntax(
                        line_no,
                        1,
                        "operations must precede the trailing 'next' block".into(),
                    ));
                }
                let kind = if head == "bool" { ValueKind::Bool } else { ValueKind::Count };
                let (name, _) = p.name()?;
                p.expect(":=")?;
                let column = p.column();
                let expr = p.expr()?;
                if let Expr::Ref { .. } = expr {
                    return Err(ParseError::syntax(
                        line_no,
                        column,
                        "a definition must be an operation, not a bare name".into(),
                    ));
                }
                p.finish()?;
                source.definitions.push(Definition { kind, name, expr, line: line_no });
            }
            "next" => {
                p.pos += 1;
                let symbol = p.symbol()?;
                p.expect(":=")?;
                let (target, column) = p.name()?;
                p.finish()?;
                source.nexts.push(NextDirective { symbol, target, line: line_no, column });
            }
            _ => return Err(p.error("expected 'bool', 'count', 'next' or 'alphabet'")),
        }
    }
    Ok(source)
}
