use std::fmt;

use thiserror::Error;

use super::{Name, Process, Stack, SyntaxError, Term, RESERVED};
use crate::combinators::church;

/// Largest numeral accepted by the `#n` sugar.
const MAX_NUMERAL: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        match self.expected.as_slice() {
            [] => write!(f, "unexpected {}", self.found),
            [one] => write!(f, "expected {one}, found {}", self.found),
            many => write!(f, "expected one of {}, found {}", many.join(", "), self.found),
        }
    }
}

/// Named closed terms substituted for free identifiers while parsing.
#[derive(Clone, Default)]
pub struct Definitions {
    entries: Vec<(Name, Term)>,
}

impl Definitions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.entries.iter().find(|(n, _)| n.as_str() == name).map(|(_, t)| t)
    }

    /// Adds or replaces a definition. The term must be closed.
    pub fn insert(&mut self, name: &str, term: Term) -> Result<(), SyntaxError> {
        if !term.is_closed() {
            return Err(SyntaxError::not_closed("definition", &term));
        }
        match self.entries.iter_mut().find(|(n, _)| n.as_str() == name) {
            Some(slot) => slot.1 = term,
            None => self.entries.push((Name::new(name), term)),
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.entries.iter().map(|(n, t)| (n, t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn extend(&mut self, other: &Definitions) {
        for (n, t) in other.iter() {
            match self.entries.iter_mut().find(|(m, _)| m == n) {
                Some(slot) => slot.1 = t.clone(),
                None => self.entries.push((n.clone(), t.clone())),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Lambda,
    Dot,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Star,
    Cons,
    Define,
    Semi,
    Numeral(u64),
    Ident(String),
    Keyword(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Lambda => f.write_str("`\\`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Cons => f.write_str("`::`"),
            Tok::Define => f.write_str("`:=`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Numeral(n) => write!(f, "`#{n}`"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Keyword(k) => write!(f, "keyword `{k}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, found: String, expected: &[&str]| ParseError {
        line,
        column,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found,
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '-' if chars.get(i + 1) == Some(&'-') => {
                while i < chars.len() && chars[i] != '\n' {
                    advance(1, &mut i, &mut col);
                }
            }
            '\\' | 'λ' => {
                out.push(Spanned { tok: Tok::Lambda, line: l0, column: c0 });
                advance(1, &mut i, &mut col);
            }
            '.' | '(' | ')' | '{' | '}' | '*' | ';' => {
                let tok = match c {
                    '.' => Tok::Dot,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '*' => Tok::Star,
                    _ => Tok::Semi,
                };
                out.push(Spanned { tok, line: l0, column: c0 });
                advance(1, &mut i, &mut col);
            }
            ':' => match chars.get(i + 1) {
                Some(':') => {
                    out.push(Spanned { tok: Tok::Cons, line: l0, column: c0 });
                    advance(2, &mut i, &mut col);
                }
                Some('=') => {
                    out.push(Spanned { tok: Tok::Define, line: l0, column: c0 });
                    advance(2, &mut i, &mut col);
                }
                _ => return Err(err(l0, c0, "`:`".into(), &["`::`", "`:=`"])),
            },
            '#' => {
                advance(1, &mut i, &mut col);
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(1, &mut i, &mut col);
                }
                let digits: String = chars[start..i].iter().collect();
                if digits.is_empty() {
                    let found = chars.get(i).map_or("end of input".to_string(), |c| format!("`{c}`"));
                    return Err(err(line, col, found, &["decimal digits"]));
                }
                match digits.parse::<u64>() {
                    Ok(n) if n <= MAX_NUMERAL => out.push(Spanned { tok: Tok::Numeral(n), line: l0, column: c0 }),
                    _ => {
                        return Err(err(l0, c0, format!("`#{digits}`"), &[&format!("numeral at most {MAX_NUMERAL}")]));
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    advance(1, &mut i, &mut col);
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match RESERVED.iter().find(|k| **k == word) {
                    Some(k) => Tok::Keyword(k),
                    None => Tok::Ident(word),
                };
                out.push(Spanned { tok, line: l0, column: c0 });
            }
            other => return Err(err(l0, c0, format!("character `{other}`"), &[])),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

const ATOM_START: &[&str] = &["identifier", "cc", "read", "write0", "write1", "end", "kont", "#numeral", "`(`"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    defs: Definitions,
    bound: Vec<Name>,
}

impl Parser {
    fn new(text: &str, defs: Option<&Definitions>) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0, defs: defs.cloned().unwrap_or_default(), bound: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError {
            line: s.line,
            column: s.column,
            expected: expected.iter().map(|e| e.to_string()).collect(),
            found: s.tok.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn eof(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.error(&["end of input"])),
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::Numeral(_) | Tok::LParen | Tok::Keyword("cc" | "read" | "write0" | "write1" | "end" | "kont")
        )
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if *self.peek() == Tok::Lambda {
            self.lambda()
        } else {
            self.application()
        }
    }

    fn lambda(&mut self) -> Result<Term, ParseError> {
        self.bump();
        let mut names = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Ident(x) => {
                    self.bump();
                    names.push(Name::new(&x));
                }
                Tok::Dot if !names.is_empty() => {
                    self.bump();
                    break;
                }
                _ if names.is_empty() => return Err(self.error(&["identifier"])),
                _ => return Err(self.error(&["identifier", "`.`"])),
            }
        }
        let depth = self.bound.len();
        self.bound.extend(names.iter().cloned());
        let body = self.term();
        self.bound.truncate(depth);
        let body = body?;
        Ok(names.into_iter().rev().fold(body, |acc, n| Term::Lam(n, acc.into())))
    }

    fn application(&mut self) -> Result<Term, ParseError> {
        if !self.starts_atom() {
            let mut expected = ATOM_START.to_vec();
            expected.push("`\\`");
            return Err(self.error(&expected));
        }
        let mut acc = self.atom()?;
        loop {
            if self.starts_atom() {
                let arg = self.atom()?;
                acc = Term::app(acc, arg);
            } else if *self.peek() == Tok::Lambda {
                // A trailing abstraction extends to the right as its own argument.
                let arg = self.lambda()?;
                return Ok(Term::app(acc, arg));
            } else {
                return Ok(acc);
            }
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        if !self.starts_atom() {
            return Err(self.error(ATOM_START));
        }
        match self.bump() {
            Tok::Ident(x) => {
                let name = Name::new(&x);
                if !self.bound.contains(&name) {
                    if let Some(def) = self.defs.get(&x) {
                        return Ok(def.clone());
                    }
                }
                Ok(Term::Var(name))
            }
            Tok::Keyword("cc") => Ok(Term::CallCC),
            Tok::Keyword("read") => Ok(Term::Read),
            Tok::Keyword("write0") => Ok(Term::Write0),
            Tok::Keyword("write1") => Ok(Term::Write1),
            Tok::Keyword("end") => Ok(Term::End),
            Tok::Keyword("kont") => {
                self.expect(Tok::LBrace, "`{`")?;
                let at = self.pos;
                let entries = self.stack_entries()?;
                if entries.iter().any(|t| !t.is_closed()) {
                    let s = &self.toks[at];
                    return Err(ParseError {
                        line: s.line,
                        column: s.column,
                        expected: vec!["closed stack entries".into()],
                        found: "an open term in a continuation stack".into(),
                    });
                }
                self.expect(Tok::RBrace, "`}`")?;
                Ok(Term::Cont(Stack::from_closed(entries)))
            }
            Tok::Numeral(n) => Ok(church(n)),
            Tok::LParen => {
                let depth = self.bound.len();
                let t = self.term()?;
                debug_assert_eq!(depth, self.bound.len());
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => unreachable!("checked by starts_atom"),
        }
    }

    fn stack_entries(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut entries = Vec::new();
        loop {
            if *self.peek() == Tok::Keyword("nil") {
                self.bump();
                return Ok(entries);
            }
            if !self.starts_atom() && *self.peek() != Tok::Lambda {
                let mut expected = vec!["nil"];
                expected.extend_from_slice(ATOM_START);
                return Err(self.error(&expected));
            }
            entries.push(self.term()?);
            self.expect(Tok::Cons, "`::`")?;
        }
    }

    fn stack(&mut self) -> Result<Stack, SyntaxError> {
        let entries = self.stack_entries()?;
        Stack::from_terms(entries)
    }

    fn process(&mut self) -> Result<Process, SyntaxError> {
        if *self.peek() == Tok::Keyword("TOP") {
            self.bump();
            return Ok(Process::Top);
        }
        let head = self.term()?;
        self.expect(Tok::Star, "`*`")?;
        let stack = self.stack()?;
        Process::new(head, stack)
    }
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, None)?;
    let t = p.term()?;
    p.eof()?;
    Ok(t)
}

/// Parses a term, resolving free identifiers that name a definition.
pub fn parse_term_in(text: &str, defs: &Definitions) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, Some(defs))?;
    let t = p.term()?;
    p.eof()?;
    Ok(t)
}

pub fn parse_stack(text: &str) -> Result<Stack, SyntaxError> {
    parse_stack_with(text, None)
}

pub fn parse_stack_in(text: &str, defs: &Definitions) -> Result<Stack, SyntaxError> {
    parse_stack_with(text, Some(defs))
}

fn parse_stack_with(text: &str, defs: Option<&Definitions>) -> Result<Stack, SyntaxError> {
    let mut p = Parser::new(text, defs)?;
    let s = p.stack()?;
    p.eof()?;
    Ok(s)
}

/// Parses `term * stack` or `TOP`.
pub fn parse_process(text: &str) -> Result<Process, SyntaxError> {
    parse_process_with(text, None)
}

pub fn parse_process_in(text: &str, defs: &Definitions) -> Result<Process, SyntaxError> {
    parse_process_with(text, Some(defs))
}

fn parse_process_with(text: &str, defs: Option<&Definitions>) -> Result<Process, SyntaxError> {
    let mut p = Parser::new(text, defs)?;
    let proc = p.process()?;
    p.eof()?;
    Ok(proc)
}

/// Parses a definition file: a sequence of `NAME := term ;`. Each body may
/// refer to the definitions before it and to those in `base`.
pub fn parse_definitions(text: &str, base: Option<&Definitions>) -> Result<Definitions, SyntaxError> {
    let mut own = Definitions::new();
    let mut p = Parser::new(text, base)?;
    while *p.peek() != Tok::Eof {
        let name = match p.peek().clone() {
            Tok::Ident(x) => {
                p.bump();
                x
            }
            _ => return Err(p.error(&["identifier", "end of input"]).into()),
        };
        p.expect(Tok::Define, "`:=`")?;
        let body = p.term()?;
        p.expect(Tok::Semi, "`;`")?;
        p.defs.insert(&name, body.clone())?;
        own.insert(&name, body)?;
    }
    Ok(own)
}
