//! Marking predicates for forbidden-state specifications.
//!
//! ```text
//! expr   := term ("or" term)*
//! term   := factor ("and" factor)*
//! factor := "(" expr ")" | atom
//! atom   := "mark" "(" PLACE ")" ">=" INTEGER
//! ```
//!
//! `PLACE` is matched against place labels first, then place ids. `and`
//! binds tighter than `or`. Newlines are whitespace; `#` starts a comment.

use std::fmt;

use thiserror::Error;

use crate::pn::{Marking, PetriNet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct PredicateError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    AtLeast { place: String, tokens: u32 },
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Int(u32),
    LParen,
    RParen,
    Ge,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, PredicateError> {
    let mut out = Vec::new();
    let mut last = (1, 1);
    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        let body = raw.split('#').next().unwrap_or("");
        let chars: Vec<char> = body.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let column = i + 1;
            let c = chars[i];
            let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, column });
            if c.is_whitespace() {
                i += 1;
            } else if c == '(' {
                push(&mut out, Tok::LParen);
                i += 1;
            } else if c == ')' {
                push(&mut out, Tok::RParen);
                i += 1;
            } else if c == '>' && chars.get(i + 1) == Some(&'=') {
                push(&mut out, Tok::Ge);
                i += 2;
            } else if c.is_ascii_digit() {
                let s: String = chars[i..].iter().take_while(|c| c.is_ascii_digit()).collect();
                i += s.len();
                let n = s.parse().map_err(|_| PredicateError {
                    line,
                    column,
                    message: format!("integer {s} out of range"),
                })?;
                push(&mut out, Tok::Int(n));
            } else if c.is_ascii_graphic() {
                let s: String = chars[i..]
                    .iter()
                    .take_while(|c| c.is_ascii_graphic() && !matches!(c, '(' | ')' | '>'))
                    .collect();
                if s.is_empty() {
                    return Err(PredicateError {
                        line,
                        column,
                        message: format!("unexpected character {c:?}"),
                    });
                }
                i += s.len();
                push(&mut out, Tok::Word(s));
            } else {
                return Err(PredicateError {
                    line,
                    column,
                    message: format!("unexpected character {c:?}"),
                });
            }
        }
        last = (line, chars.len() + 1);
    }
    out.push(Token {
        tok: Tok::End,
        line: last.0,
        column: last.1,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, t: &Token, message: impl Into<String>) -> Result<T, PredicateError> {
        Err(PredicateError {
            line: t.line,
            column: t.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, PredicateError> {
        let t = self.bump();
        if t.tok == want {
            Ok(t)
        } else {
            self.fail(&t, format!("expected {what}"))
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(s) if s == w)
    }

    fn expr(&mut self) -> Result<Predicate, PredicateError> {
        let mut lhs = self.term()?;
        while self.is_word("or") {
            self.bump();
            lhs = Predicate::Or(Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Predicate, PredicateError> {
        let mut lhs = self.factor()?;
        while self.is_word("and") {
            self.bump();
            lhs = Predicate::And(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Predicate, PredicateError> {
        if self.peek().tok == Tok::LParen {
            self.bump();
            let inner = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(inner);
        }
        if !self.is_word("mark") {
            let t = self.peek().clone();
            return self.fail(&t, "expected `mark(...)` or `(`");
        }
        self.bump();
        self.expect(Tok::LParen, "`(` after mark")?;
        let t = self.bump();
        let place = match t.tok {
            Tok::Word(s) => s,
            Tok::Int(n) => n.to_string(),
            _ => return self.fail(&t, "expected a place name"),
        };
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::Ge, "`>=`")?;
        let t = self.bump();
        let tokens = match t.tok {
            Tok::Int(n) => n,
            _ => return self.fail(&t, "expected an integer"),
        };
        Ok(Predicate::AtLeast { place, tokens })
    }
}

impl Predicate {
    pub fn parse(text: &str) -> Result<Predicate, PredicateError> {
        let mut p = Parser {
            toks: tokenize(text)?,
            pos: 0,
        };
        let pred = p.expr()?;
        let t = p.peek().clone();
        if t.tok != Tok::End {
            return p.fail(&t, "unexpected trailing input");
        }
        Ok(pred)
    }

    /// Resolves place names against `net`.
    pub fn bind(&self, net: &PetriNet) -> Result<BoundPredicate, PredicateError> {
        Ok(BoundPredicate(self.bind_inner(net)?))
    }

    fn bind_inner(&self, net: &PetriNet) -> Result<Bound, PredicateError> {
        Ok(match self {
            Predicate::AtLeast { place, tokens } => {
                let idx = net
                    .place_by_label(place)
                    .or_else(|| net.place_index(place))
                    .ok_or_else(|| PredicateError {
                        line: 0,
                        column: 0,
                        message: format!("unknown place {place}"),
                    })?;
                Bound::AtLeast(idx, *tokens)
            }
            Predicate::And(a, b) => Bound::And(Box::new(a.bind_inner(net)?), Box::new(b.bind_inner(net)?)),
            Predicate::Or(a, b) => Bound::Or(Box::new(a.bind_inner(net)?), Box::new(b.bind_inner(net)?)),
        })
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::AtLeast { place, tokens } => write!(f, "mark({place}) >= {tokens}"),
            Predicate::And(a, b) => write!(f, "({a} and {b})"),
            Predicate::Or(a, b) => write!(f, "({a} or {b})"),
        }
    }
}

#[derive(Debug, Clone)]
enum Bound {
    AtLeast(usize, u32),
    And(Box<Bound>, Box<Bound>),
    Or(Box<Bound>, Box<Bound>),
}

impl Bound {
    fn eval(&self, m: &Marking) -> bool {
        match self {
            Bound::AtLeast(p, n) => m.get(*p) >= *n,
            Bound::And(a, b) => a.eval(m) && b.eval(m),
            Bound::Or(a, b) => a.eval(m) || b.eval(m),
        }
    }
}

/// A predicate with place names resolved to indices of one net.
#[derive(Debug, Clone)]
pub struct BoundPredicate(Bound);

impl BoundPredicate {
    pub fn eval(&self, m: &Marking) -> bool {
        self.0.eval(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pn::NetBuilder;

    fn net() -> PetriNet {
        NetBuilder::new()
            .place("a", "A", 0)
            .place("b", "", 0)
            .place("c", "C", 0)
            .build()
            .unwrap()
    }

    #[test]
    fn precedence_and_evaluation() {
        let p = Predicate::parse("mark(A) >= 1 or mark(b) >= 2 and mark(C) >= 1").unwrap();
        assert_eq!(p.to_string(), "(mark(A) >= 1 or (mark(b) >= 2 and mark(C) >= 1))");
        let net = net();
        let b = p.bind(&net).unwrap();
        let m = |x, y, z| Marking::from_counts(vec![x, y, z]);
        assert!(b.eval(&m(1, 0, 0)));
        assert!(!b.eval(&m(0, 2, 0)));
        assert!(b.eval(&m(0, 2, 1)));
    }

    #[test]
    fn parentheses_and_comments() {
        let p = Predicate::parse("# forbid\n(mark(A) >= 1 or mark(b) >= 1)\n and mark(C)>=1\n").unwrap();
        let b = p.bind(&net()).unwrap();
        assert!(!b.eval(&Marking::from_counts(vec![1, 0, 0])));
        assert!(b.eval(&Marking::from_counts(vec![1, 0, 1])));
    }

    #[test]
    fn errors_have_positions() {
        let e = Predicate::parse("mark(A) > 1").unwrap_err();
        assert_eq!((e.line, e.column), (1, 9));
        let e = Predicate::parse("mark(A) >= 1 and\n  mark(B) >=").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("integer"));
        let e = Predicate::parse("mark(A) >= 1 mark").unwrap_err();
        assert_eq!((e.line, e.column), (1, 14));
        assert!(Predicate::parse("").is_err());
        let e = Predicate::parse("mark(zz) >= 1").unwrap().bind(&net()).unwrap_err();
        assert!(e.message.contains("unknown place"));
    }
}
