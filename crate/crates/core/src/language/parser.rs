//! Concrete syntax for programs, data files and queries.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::ast::*;
use crate::temporal::{Interval, Range, TemporalError, TimePoint};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

const KEYWORDS: &[&str] = &["ALWAYS", "SOMETIME", "SINCE", "UNTIL", "TOP", "BOT", "inf"];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Number(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Implies,
    Neq,
    At,
    AlwaysPlus,
    AlwaysMinus,
    SometimePlus,
    SometimeMinus,
    Since,
    Until,
    Top,
    Bot,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{}`", s),
            Tok::Quoted(s) => format!("string \"{}\"", s),
            Tok::Number(s) => format!("number `{}`", s),
            Tok::Eof => "end of input".to_string(),
            t => format!("`{}`", tok_text(t)),
        }
    }
}

fn tok_text(t: &Tok) -> &'static str {
    match t {
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBrack => "[",
        Tok::RBrack => "]",
        Tok::Comma => ",",
        Tok::Dot => ".",
        Tok::Implies => ":-",
        Tok::Neq => "!=",
        Tok::At => "@",
        Tok::AlwaysPlus => "ALWAYS+",
        Tok::AlwaysMinus => "ALWAYS-",
        Tok::SometimePlus => "SOMETIME+",
        Tok::SometimeMinus => "SOMETIME-",
        Tok::Since => "SINCE",
        Tok::Until => "UNTIL",
        Tok::Top => "TOP",
        Tok::Bot => "BOT",
        _ => "?",
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| ParseError { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (sl, sc) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
            continue;
        }
        let peek = chars.get(i + 1).copied();
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ',' => Some(Tok::Comma),
            '@' => Some(Tok::At),
            '.' if !peek.is_some_and(|p| p.is_ascii_digit()) => Some(Tok::Dot),
            _ => None,
        };
        if let Some(t) = simple {
            out.push(Spanned { tok: t, line: sl, col: sc });
            advance(1, &mut i);
            continue;
        }
        if c == ':' && peek == Some('-') {
            out.push(Spanned { tok: Tok::Implies, line: sl, col: sc });
            advance(2, &mut i);
            continue;
        }
        if c == '!' && peek == Some('=') {
            out.push(Spanned { tok: Tok::Neq, line: sl, col: sc });
            advance(2, &mut i);
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            let mut j = i + 1;
            loop {
                match chars.get(j) {
                    None | Some('\n') => return Err(err(sl, sc, "unterminated string".into())),
                    Some('"') => break,
                    Some('\\') => {
                        if let Some(&n) = chars.get(j + 1) {
                            s.push(n);
                        }
                        j += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        j += 1;
                    }
                }
            }
            out.push(Spanned { tok: Tok::Quoted(s), line: sl, col: sc });
            advance(j + 1 - i, &mut i);
            continue;
        }
        let starts_number = c.is_ascii_digit()
            || ((c == '-' || c == '+') && (peek.is_some_and(|p| p.is_ascii_digit() || p == '.' || p == 'i')))
            || (c == '.' && peek.is_some_and(|p| p.is_ascii_digit()));
        if starts_number {
            let mut j = i + 1;
            if (c == '-' || c == '+') && chars[j..].starts_with(&['i', 'n', 'f']) {
                j += 3;
            } else {
                while j < chars.len() {
                    let ch = chars[j];
                    let next_digit = chars.get(j + 1).is_some_and(|p| p.is_ascii_digit());
                    if ch.is_ascii_digit() || ((ch == '.' || ch == ':') && next_digit) {
                        j += 1;
                    } else {
                        break;
                    }
                }
                if j < chars.len() && matches!(chars[j], 's' | 'm' | 'h' | 'd') && !chars.get(j + 1).is_some_and(|p| p.is_ascii_alphanumeric() || *p == '_') {
                    j += 1;
                }
            }
            let s: String = chars[i..j].iter().collect();
            out.push(Spanned { tok: Tok::Number(s), line: sl, col: sc });
            advance(j - i, &mut i);
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let sign = chars.get(j).copied();
            let tok = match (word.as_str(), sign) {
                ("ALWAYS", Some('+')) => {
                    j += 1;
                    Tok::AlwaysPlus
                }
                ("ALWAYS", Some('-')) => {
                    j += 1;
                    Tok::AlwaysMinus
                }
                ("SOMETIME", Some('+')) => {
                    j += 1;
                    Tok::SometimePlus
                }
                ("SOMETIME", Some('-')) => {
                    j += 1;
                    Tok::SometimeMinus
                }
                ("ALWAYS", _) | ("SOMETIME", _) => {
                    return Err(err(sl, sc, format!("`{}` must be followed by `+` or `-`", word)))
                }
                ("SINCE", _) => Tok::Since,
                ("UNTIL", _) => Tok::Until,
                ("TOP", _) => Tok::Top,
                ("BOT", _) => Tok::Bot,
                ("inf", _) => Tok::Number("inf".into()),
                _ => Tok::Ident(word),
            };
            out.push(Spanned { tok, line: sl, col: sc });
            advance(j - i, &mut i);
            continue;
        }
        return Err(err(sl, sc, format!("unexpected character `{}`", c)));
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Program,
    Data,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    mode: Mode,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str, mode: Mode) -> PResult<Parser> {
        Ok(Parser { toks: lex(text)?, pos: 0, mode })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let s = &self.toks[self.pos];
        Err(ParseError { line: s.line, col: s.col, msg: msg.into() })
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            let found = self.peek().describe();
            self.err_here(format!("expected `{}`, found {}", tok_text(&t), found))
        }
    }

    fn time_point(&mut self) -> PResult<TimePoint> {
        match self.peek().clone() {
            Tok::Number(s) => {
                let r = TimePoint::parse(&s);
                match r {
                    Ok(p) => {
                        self.next();
                        Ok(p)
                    }
                    Err(TemporalError::NotDyadic(_)) => {
                        self.err_here(format!("time literal `{}` is not a dyadic number (finite binary fraction)", s))
                    }
                    Err(e) => self.err_here(e.to_string()),
                }
            }
            t => self.err_here(format!("expected a time value, found {}", t.describe())),
        }
    }

    fn interval(&mut self) -> PResult<Interval> {
        let lo_closed = match self.next() {
            Tok::LBrack => true,
            Tok::LParen => false,
            _ => {
                self.pos -= 1;
                return self.err_here("expected `[` or `(` to open an interval");
            }
        };
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        let lo = self.time_point()?;
        self.expect(Tok::Comma)?;
        let hi = self.time_point()?;
        let hi_closed = match self.next() {
            Tok::RBrack => true,
            Tok::RParen => false,
            _ => {
                self.pos -= 1;
                return self.err_here("expected `]` or `)` to close an interval");
            }
        };
        if lo > hi {
            return Err(ParseError { line, col, msg: format!("interval lower end {} exceeds upper end {}", lo, hi) });
        }
        Interval::new(lo, lo_closed, hi, hi_closed).map_err(|e| ParseError { line, col, msg: e.to_string() })
    }

    fn range(&mut self) -> PResult<Range> {
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        let i = self.interval()?;
        Range::new(i).map_err(|e| ParseError { line, col, msg: e.to_string() })
    }

    fn pred_name(&mut self) -> PResult<String> {
        match self.next() {
            Tok::Ident(s) => {
                if s.starts_with('_') && !is_fresh_name(&s) {
                    self.pos -= 1;
                    return self.err_here(format!("names starting with `_` are reserved: `{}`", s));
                }
                Ok(s)
            }
            t => {
                self.pos -= 1;
                self.err_here(format!("expected a predicate name, found {}", t.describe()))
            }
        }
    }

    fn term(&mut self) -> PResult<Term> {
        match self.next() {
            Tok::Ident(s) => {
                if s.starts_with('_') {
                    self.pos -= 1;
                    return self.err_here(format!("names starting with `_` are reserved: `{}`", s));
                }
                let first = s.chars().next().unwrap_or('a');
                if self.mode == Mode::Program && first.is_ascii_lowercase() {
                    Ok(Term::Var(s))
                } else {
                    Ok(Term::Const(Constant::new(&s)))
                }
            }
            Tok::Quoted(s) => Ok(Term::Const(Constant::new(&s))),
            Tok::Number(s) if s.chars().all(|c| c.is_ascii_digit()) => Ok(Term::Const(Constant::new(&s))),
            t => {
                self.pos -= 1;
                self.err_here(format!("expected a term, found {}", t.describe()))
            }
        }
    }

    fn atom(&mut self) -> PResult<Atom> {
        let pred = self.pred_name()?;
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            if *self.peek() != Tok::RParen {
                loop {
                    args.push(self.term()?);
                    if *self.peek() == Tok::Comma {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(Atom { pred, args })
    }

    fn conj(&mut self, top_level: bool) -> PResult<Vec<BodyLiteral>> {
        let mut out = vec![self.binary(top_level)?];
        while *self.peek() == Tok::Comma {
            self.next();
            out.push(self.binary(top_level)?);
        }
        Ok(out)
    }

    fn binary(&mut self, top_level: bool) -> PResult<BodyLiteral> {
        let mut left = self.unary(top_level)?;
        loop {
            let is_since = match self.peek() {
                Tok::Since => true,
                Tok::Until => false,
                _ => break,
            };
            self.next();
            let r = self.range()?;
            let right = self.unary(false)?;
            if matches!(left, BodyLiteral::Neq(..)) {
                return self.err_here("an inequality cannot be an operand of SINCE/UNTIL");
            }
            left = if is_since {
                BodyLiteral::Since(Box::new(left), r, Box::new(right))
            } else {
                BodyLiteral::Until(Box::new(left), r, Box::new(right))
            };
        }
        Ok(left)
    }

    fn unary(&mut self, top_level: bool) -> PResult<BodyLiteral> {
        match self.peek().clone() {
            Tok::AlwaysPlus | Tok::AlwaysMinus | Tok::SometimePlus | Tok::SometimeMinus => {
                let op = self.next();
                let r = self.range()?;
                let inner = Box::new(self.unary(false)?);
                Ok(match op {
                    Tok::AlwaysPlus => BodyLiteral::BoxPlus(r, inner),
                    Tok::AlwaysMinus => BodyLiteral::BoxMinus(r, inner),
                    Tok::SometimePlus => BodyLiteral::DiamondPlus(r, inner),
                    _ => BodyLiteral::DiamondMinus(r, inner),
                })
            }
            Tok::LParen => {
                self.next();
                let mut inner = self.conj(false)?;
                self.expect(Tok::RParen)?;
                Ok(if inner.len() == 1 { inner.pop().expect("one literal") } else { BodyLiteral::And(inner) })
            }
            Tok::Top => {
                self.next();
                Ok(BodyLiteral::Top)
            }
            Tok::Bot => self.err_here("BOT may not occur in a rule body"),
            Tok::Ident(_) | Tok::Quoted(_) | Tok::Number(_) if *self.peek2() == Tok::Neq => {
                let a = self.term()?;
                self.next();
                let b = self.term()?;
                if !top_level {
                    return self.err_here("inequalities are only allowed as top-level body conjuncts");
                }
                Ok(BodyLiteral::Neq(a, b))
            }
            Tok::Ident(_) => Ok(BodyLiteral::Atom(self.atom()?)),
            t => self.err_here(format!("expected a body literal, found {}", t.describe())),
        }
    }

    fn rule(&mut self) -> PResult<Rule> {
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        let mut head_ops = Vec::new();
        loop {
            match self.peek() {
                Tok::AlwaysPlus => {
                    self.next();
                    head_ops.push(HeadOp::BoxPlus(self.range()?));
                }
                Tok::AlwaysMinus => {
                    self.next();
                    head_ops.push(HeadOp::BoxMinus(self.range()?));
                }
                Tok::SometimePlus | Tok::SometimeMinus => {
                    return self.err_here("diamond operators are not allowed in rule heads");
                }
                _ => break,
            }
        }
        let head = match self.peek() {
            Tok::Bot => {
                self.next();
                HeadAtom::Bot
            }
            Tok::Top => {
                self.next();
                HeadAtom::Top
            }
            _ => HeadAtom::Atom(self.atom()?),
        };
        if matches!(self.peek(), Tok::Since | Tok::Until) {
            return self.err_here("SINCE/UNTIL are not allowed in rule heads");
        }
        self.expect(Tok::Implies)?;
        let body = self.conj(true)?;
        self.expect(Tok::Dot)?;
        let rule = Rule { head_ops, head, body };
        check_safety(&rule).map_err(|msg| ParseError { line, col, msg })?;
        Ok(rule)
    }

    fn fact(&mut self) -> PResult<Fact> {
        if *self.peek() == Tok::Bot {
            return self.err_here("BOT facts are not allowed in data");
        }
        let atom = self.atom()?;
        self.expect(Tok::At)?;
        let interval = self.interval()?;
        self.expect(Tok::Dot)?;
        let args = atom
            .args
            .into_iter()
            .map(|t| match t {
                Term::Const(c) => c,
                Term::Var(v) => Constant::new(&v),
            })
            .collect();
        Ok(Fact { pred: atom.pred, args, interval })
    }
}

/// `_nf<digits>` names produced by normalization.
pub fn is_fresh_name(s: &str) -> bool {
    s.strip_prefix("_nf").is_some_and(|r| !r.is_empty() && r.chars().all(|c| c.is_ascii_digit()))
}

fn check_safety(rule: &Rule) -> Result<(), String> {
    let mut bound = BTreeSet::new();
    for l in &rule.body {
        l.bound_vars_into(&mut bound);
    }
    if let HeadAtom::Atom(a) = &rule.head {
        for v in a.vars() {
            if !bound.contains(&v) {
                return Err(format!("head variable `{}` does not occur in the body", v));
            }
        }
    }
    for l in &rule.body {
        if let BodyLiteral::Neq(a, b) = l {
            for t in [a, b] {
                if let Term::Var(v) = t {
                    if !bound.contains(v) {
                        return Err(format!("inequality variable `{}` does not occur in a body atom", v));
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_arities<'a, I: IntoIterator<Item = (&'a str, usize)>>(
    sig: &mut BTreeMap<String, usize>,
    items: I,
) -> Result<(), String> {
    for (p, n) in items {
        match sig.get(p) {
            Some(&m) if m != n => return Err(format!("predicate `{}` used with arities {} and {}", p, m, n)),
            Some(_) => {}
            None => {
                sig.insert(p.to_string(), n);
            }
        }
    }
    Ok(())
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text, Mode::Program)?;
    let mut rules = Vec::new();
    let mut sig = BTreeMap::new();
    while *p.peek() != Tok::Eof {
        let (line, col) = (p.toks[p.pos].line, p.toks[p.pos].col);
        let r = p.rule()?;
        let mut items: Vec<(&str, usize)> = r.body_atoms().iter().map(|a| (a.pred.as_str(), a.arity())).collect();
        if let HeadAtom::Atom(a) = &r.head {
            items.push((a.pred.as_str(), a.arity()));
        }
        check_arities(&mut sig, items).map_err(|msg| ParseError { line, col, msg })?;
        rules.push(r);
    }
    Ok(Program { rules })
}

pub fn parse_data(text: &str) -> Result<DataInstance, ParseError> {
    let mut p = Parser::new(text, Mode::Data)?;
    let mut facts = Vec::new();
    let mut sig = BTreeMap::new();
    while *p.peek() != Tok::Eof {
        let (line, col) = (p.toks[p.pos].line, p.toks[p.pos].col);
        let f = p.fact()?;
        check_arities(&mut sig, [(f.pred.as_str(), f.args.len())]).map_err(|msg| ParseError { line, col, msg })?;
        facts.push(f);
    }
    Ok(DataInstance { facts })
}

/// Parses a goal atom such as `ActivePowerTrip(v)` or `HurricaneAffectedState(NY)`.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let mut p = Parser::new(text, Mode::Program)?;
    let goal = p.atom()?;
    if *p.peek() == Tok::At {
        p.next();
        match p.next() {
            Tok::Ident(_) => {}
            _ => return p.err_here("expected an interval variable after `@`"),
        }
    }
    if *p.peek() == Tok::Dot {
        p.next();
    }
    if *p.peek() != Tok::Eof {
        return p.err_here("trailing input after query");
    }
    Ok(Query { goal })
}

/// Parses a single interval such as `[13:01:17,13:01:18)`.
pub fn parse_interval(text: &str) -> Result<Interval, ParseError> {
    let mut p = Parser::new(text, Mode::Data)?;
    let i = p.interval()?;
    if *p.peek() != Tok::Eof {
        return p.err_here("trailing input after interval");
    }
    Ok(i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_one() {
        let p = parse_program(
            "ActivePowerTrip(v) :- Turbine(v), ALWAYS-[0,1m] Below015(v), SOMETIME-[60s,63s] ALWAYS-[0s,10s] Above15(v).",
        )
        .unwrap();
        assert_eq!(p.rules.len(), 1);
        assert_eq!(p.rules[0].body.len(), 3);
        let again = parse_program(&p.to_string()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn rejects_diamond_head() {
        let e = parse_program("SOMETIME+[0,3s] Q(v) :- P(v).").unwrap_err();
        assert!(e.msg.contains("diamond"), "{}", e);
    }

    #[test]
    fn rejects_unsafe_head() {
        let e = parse_program("Q(u,v) :- P(u), u != v.").unwrap_err();
        assert!(e.msg.contains("head variable `v`"), "{}", e);
    }

    #[test]
    fn rejects_non_dyadic() {
        let e = parse_program("P(v) :- ALWAYS-[0,0.1] Q(v).").unwrap_err();
        assert!(e.msg.contains("dyadic"), "{}", e);
        assert_eq!((e.line, e.col), (1, 19));
    }

    #[test]
    fn rejects_arity_clash_and_reserved() {
        assert!(parse_program("P(v) :- Q(v).\nR :- Q.").is_err());
        assert!(parse_program("_x(v) :- Q(v).").is_err());
        assert!(parse_program("_nf3(v) :- Q(v).").is_ok());
    }

    #[test]
    fn data_examples() {
        let d = parse_data("Turbine(tb0)@(-inf,inf).").unwrap();
        assert_eq!(d.facts.len(), 1);
        assert_eq!(d.facts[0].interval, Interval::everything());
        let d = parse_data("Above15(tb0)@[13:00:00,13:00:15).").unwrap();
        assert_eq!(d.facts[0].interval, Interval::parse("[46800,46815)").unwrap());
        assert!(parse_data("P(a)@[2,1].").is_err());
        assert!(parse_data("BOT@[2,3].").is_err());
    }

    #[test]
    fn since_and_nesting() {
        let p = parse_program("SupportBending :- LowPlace SINCE[0,inf) SOMETIME-[0,3s] MiddlePlace.").unwrap();
        assert!(matches!(p.rules[0].body[0], BodyLiteral::Since(..)));
        let p = parse_program("T :- SOMETIME-[0,1] (I0, T).").unwrap();
        assert!(matches!(&p.rules[0].body[0], BodyLiteral::DiamondMinus(_, b) if matches!(**b, BodyLiteral::And(_))));
        assert_eq!(parse_program(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn queries() {
        let q = parse_query("ActivePowerTrip(tb0)").unwrap();
        assert_eq!(q.vars(), vec!["tb0".to_string()]);
        let q = parse_query("HurricaneAffectedState(NY)@x").unwrap();
        assert!(q.vars().is_empty());
    }
}
