//! Recursive-descent parser for the textual formula syntax.
//!
//! ```text
//! formula  := conj ('|' conj)*
//! conj     := unary ('&' unary)*
//! unary    := '!' unary | primary
//! primary  := 'true' | 'false' | '(' formula ')' | atom
//!           | 'exists' var+ '.' '(' atom '&' formula ')'
//!           | 'forall' var+ '.' '(' atom '->' formula ')'
//!           | '[' ('lfp'|'gfp') Name '(' vars ')' '.' formula ']' '(' vars ')'
//! atom     := Name '(' vars ')'
//! ```
//!
//! Relation and fixpoint names start with an uppercase letter, variables with a
//! lowercase one. `#` starts a comment that runs to the end of the line.

use std::collections::BTreeSet;

use thiserror::Error;

use super::formula::{Atom, FixKind, Fixpoint, Formula, Predicate, Quantifier};
use super::signature::Signature;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unknown relation `{name}`")]
    UnknownRelation { line: usize, col: usize, name: String },
    #[error("{line}:{col}: `{name}` has arity {expected} but is applied to {found} argument(s)")]
    ArityMismatch {
        line: usize,
        col: usize,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("{line}:{col}: fixpoint variable `{name}` is not bound here")]
    UnboundFixpoint { line: usize, col: usize, name: String },
    #[error("{line}:{col}: equality is not available; only relation atoms may be used")]
    Equality { line: usize, col: usize },
    #[error("{line}:{col}: fixpoint variable `{name}` clashes with a relation of the signature")]
    ShadowedRelation { line: usize, col: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Upper(String),
    Lower(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Amp,
    Bar,
    Bang,
    Arrow,
    Eq,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_text = raw.split('#').next().unwrap_or("");
        let chars: Vec<char> = line_text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, col) = (ln + 1, i + 1);
            let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line, col });
            match c {
                c if c.is_whitespace() => {}
                '(' => push(&mut out, Tok::LParen),
                ')' => push(&mut out, Tok::RParen),
                '[' => push(&mut out, Tok::LBrack),
                ']' => push(&mut out, Tok::RBrack),
                ',' => push(&mut out, Tok::Comma),
                '.' => push(&mut out, Tok::Dot),
                '&' => push(&mut out, Tok::Amp),
                '|' => push(&mut out, Tok::Bar),
                '!' => push(&mut out, Tok::Bang),
                '=' => push(&mut out, Tok::Eq),
                '-' if chars.get(i + 1) == Some(&'>') => {
                    push(&mut out, Tok::Arrow);
                    i += 1;
                }
                c if c.is_alphabetic() || c == '_' => {
                    let start = i;
                    while i + 1 < chars.len() && (chars[i + 1].is_alphanumeric() || chars[i + 1] == '_') {
                        i += 1;
                    }
                    let word: String = chars[start..=i].iter().collect();
                    let tok = if c.is_uppercase() { Tok::Upper(word) } else { Tok::Lower(word) };
                    push(&mut out, tok);
                }
                other => {
                    return Err(ParseError::Syntax {
                        line,
                        col,
                        msg: format!("unexpected character `{other}`"),
                    })
                }
            }
            i += 1;
        }
    }
    Ok(out)
}

const KEYWORDS: [&str; 6] = ["exists", "forall", "lfp", "gfp", "true", "false"];

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    sig: &'a Signature,
    // (name, parameter count)
    scope: Vec<(String, usize)>,
    declared_fixvars: BTreeSet<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or_else(|| self.toks.last()) {
            Some(s) => (s.line, s.col),
            None => (1, 1),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, msg: msg.into() })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&Tok::Eq) {
            let (line, col) = self.here();
            return Err(ParseError::Equality { line, col });
        }
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Lower(w)) if w == kw)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conj()?;
        while self.peek() == Some(&Tok::Bar) {
            self.pos += 1;
            let rhs = self.conj()?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.unary()?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.peek() == Some(&Tok::Bang) {
            self.pos += 1;
            return Ok(Formula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Lower(w)) if w == "true" || w == "false" => {
                self.pos += 1;
                Ok(Formula::Const(w == "true"))
            }
            Some(Tok::Lower(w)) if w == "exists" || w == "forall" => self.quantifier(w == "exists"),
            Some(Tok::LBrack) => self.fixpoint(),
            Some(Tok::Upper(_)) => Ok(Formula::Atom(self.atom()?)),
            Some(Tok::Eq) => {
                let (line, col) = self.here();
                Err(ParseError::Equality { line, col })
            }
            Some(Tok::Lower(w)) => {
                if self.toks.get(self.pos + 1).map(|s| &s.tok) == Some(&Tok::Eq) {
                    self.pos += 1;
                    let (line, col) = self.here();
                    return Err(ParseError::Equality { line, col });
                }
                self.err(format!("unexpected variable `{w}` where a formula was expected"))
            }
            Some(_) => self.err("expected a formula"),
            None => self.err("unexpected end of input"),
        }
    }

    fn variable(&mut self) -> Result<String, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Lower(w)) if !KEYWORDS.contains(&w.as_str()) => {
                self.pos += 1;
                Ok(w)
            }
            _ => self.err("expected a variable"),
        }
    }

    fn var_list(&mut self) -> Result<Vec<String>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut vars = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            vars.push(self.variable()?);
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                vars.push(self.variable()?);
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(vars)
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let (line, col) = self.here();
        let name = match self.bump() {
            Some(Tok::Upper(n)) => n,
            _ => {
                self.pos -= 1;
                return self.err("expected an atom");
            }
        };
        let args = self.var_list()?;
        if let Some(&(_, params)) = self.scope.iter().rev().find(|(z, _)| *z == name) {
            if params != args.len() {
                return Err(ParseError::ArityMismatch {
                    line,
                    col,
                    name,
                    expected: params,
                    found: args.len(),
                });
            }
            return Ok(Atom { pred: Predicate::Fix(name), args });
        }
        match self.sig.arity(&name) {
            Some(a) if a == args.len() => Ok(Atom { pred: Predicate::Rel(name), args }),
            Some(a) => Err(ParseError::ArityMismatch {
                line,
                col,
                name,
                expected: a,
                found: args.len(),
            }),
            None if self.declared_fixvars.contains(&name) => Err(ParseError::UnboundFixpoint { line, col, name }),
            None => Err(ParseError::UnknownRelation { line, col, name }),
        }
    }

    fn quantifier(&mut self, existential: bool) -> Result<Formula, ParseError> {
        self.pos += 1;
        let mut vars = vec![self.variable()?];
        while matches!(self.peek(), Some(Tok::Lower(_))) {
            vars.push(self.variable()?);
        }
        self.expect(Tok::Dot, "`.` after the quantified variables")?;
        self.expect(Tok::LParen, "`(` opening the guarded body")?;
        let guard = self.atom()?;
        if existential {
            self.expect(Tok::Amp, "`&` after the guard of `exists`")?;
        } else {
            self.expect(Tok::Arrow, "`->` after the guard of `forall`")?;
        }
        let body = Box::new(self.formula()?);
        self.expect(Tok::RParen, "`)` closing the guarded body")?;
        let q = Quantifier { vars, guard, body };
        Ok(if existential { Formula::Exists(q) } else { Formula::Forall(q) })
    }

    fn fixpoint(&mut self) -> Result<Formula, ParseError> {
        self.pos += 1;
        let kind = if self.keyword("lfp") {
            FixKind::Lfp
        } else if self.keyword("gfp") {
            FixKind::Gfp
        } else {
            return self.err("expected `lfp` or `gfp`");
        };
        self.pos += 1;
        let (line, col) = self.here();
        let var = match self.bump() {
            Some(Tok::Upper(n)) => n,
            _ => {
                self.pos -= 1;
                return self.err("expected an uppercase fixpoint variable");
            }
        };
        if self.sig.contains(&var) {
            return Err(ParseError::ShadowedRelation { line, col, name: var });
        }
        let params = self.var_list()?;
        self.expect(Tok::Dot, "`.` after the fixpoint parameters")?;
        self.scope.push((var.clone(), params.len()));
        let body = self.formula();
        self.scope.pop();
        let body = Box::new(body?);
        self.expect(Tok::RBrack, "`]` closing the fixpoint")?;
        let args = self.var_list()?;
        if args.len() != params.len() {
            return Err(ParseError::ArityMismatch {
                line,
                col,
                name: var,
                expected: params.len(),
                found: args.len(),
            });
        }
        Ok(Formula::Fix(Fixpoint { kind, var, params, body, args }))
    }
}

fn declared_fixvars(toks: &[Spanned]) -> BTreeSet<String> {
    toks.windows(3)
        .filter_map(|w| match (&w[0].tok, &w[1].tok, &w[2].tok) {
            (Tok::LBrack, Tok::Lower(k), Tok::Upper(z)) if k == "lfp" || k == "gfp" => Some(z.clone()),
            _ => None,
        })
        .collect()
}

/// Parses `text` against `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let declared = declared_fixvars(&toks);
    let mut p = Parser {
        toks,
        pos: 0,
        sig,
        scope: Vec::new(),
        declared_fixvars: declared,
    };
    let f = p.formula()?;
    if p.pos < p.toks.len() {
        if p.peek() == Some(&Tok::Eq) {
            let (line, col) = p.here();
            return Err(ParseError::Equality { line, col });
        }
        return p.err("trailing input after formula");
    }
    Ok(f)
}

/// Parses `text`, inferring the signature from relation uses: every uppercase name
/// applied outside a binder of the same name becomes a relation with the arity of
/// its first use.
pub fn parse_formula_inferring(text: &str) -> Result<(Formula, Signature), ParseError> {
    let toks = lex(text)?;
    let declared = declared_fixvars(&toks);
    let mut sig = Signature::new();
    for (i, w) in toks.windows(2).enumerate() {
        if let (Tok::Upper(name), Tok::LParen) = (&w[0].tok, &w[1].tok) {
            if declared.contains(name) {
                continue;
            }
            let mut arity = 0;
            let mut j = i + 2;
            while let Some(t) = toks.get(j) {
                match t.tok {
                    Tok::Lower(_) => arity += 1,
                    Tok::Comma => {}
                    _ => break,
                }
                j += 1;
            }
            if arity > 0 && !sig.contains(name) {
                sig.declare(name, arity).expect("positive arity, fresh name");
            }
        }
    }
    let f = parse_formula(text, &sig)?;
    Ok((f, sig))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e2() -> Signature {
        Signature::new().with("E", 2)
    }

    #[test]
    fn guarded_existence() {
        let f = parse_formula("exists x y . (E(x,y) & true)", &e2()).unwrap();
        assert_eq!(f, Formula::exists(&["x", "y"], Atom::rel("E", &["x", "y"]), Formula::Const(true)));
    }

    #[test]
    fn arity_mismatch() {
        let err = parse_formula("E(x)", &e2()).unwrap_err();
        assert!(matches!(err, ParseError::ArityMismatch { expected: 2, found: 1, .. }), "{err:?}");
    }

    #[test]
    fn unknown_relation_and_unbound_fixvar() {
        assert!(matches!(
            parse_formula("exists x y . (F(x,y) & true)", &e2()),
            Err(ParseError::UnknownRelation { .. })
        ));
        let text = "exists x y . (E(x,y) & Z(x)) & [lfp Z(z) . Z(z)](x)";
        assert!(matches!(parse_formula(text, &e2()), Err(ParseError::UnboundFixpoint { .. })));
    }

    #[test]
    fn equality_rejected() {
        let err = parse_formula("exists x y . (E(x,y) & x = y)", &e2()).unwrap_err();
        assert!(matches!(err, ParseError::Equality { .. }), "{err:?}");
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_formula("exists x y . (E(x,y) -> true)", &e2()).unwrap_err();
        match err {
            ParseError::Syntax { line, col, .. } => assert_eq!((line, col), (1, 22)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comments_and_inference() {
        let (f, sig) = parse_formula_inferring("# header\nexists x . (P(x) & R(x,x,x)) # trailing").unwrap();
        assert_eq!(sig.to_string(), "P/1,R/3");
        assert!(matches!(f, Formula::Exists(_)));
        let (_, sig) = parse_formula_inferring("[lfp Z(z) . P(z) | Z(z)](x)").unwrap();
        assert_eq!(sig.to_string(), "P/1");
    }
}
