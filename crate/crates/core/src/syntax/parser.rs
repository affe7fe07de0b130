//! Concrete grammar.
//!
//! ```text
//! type  ::= 'mu' X '.' type | 'All' '(' X ['<:' type] ')' type
//!         | 'Some' '(' X ['<:' type] ')' type | arrow
//! arrow ::= tatom ['->' type]
//! tatom ::= 'Top' | 'Bot' | X | '(' type ')'
//!         | '[' [m ':' (variance type | '(' type ',' type ')') {',' ...}] ']'
//!         | 'Obj' '(' X ')' '[' m ':' variance type {',' ...} ']'
//!
//! term  ::= 'let' x [':' type] '=' term 'in' term
//!         | ('\' | 'λ') '(' x [':' type] ')' term
//!         | 'Fun' '(' X ['<:' type] ')' term
//!         | 'open' term 'as' '<' X '<:' type ',' x ':' type '>' 'in' term ':' type
//!         | app
//! app   ::= post {post}
//! post  ::= atom { '.' m [':=' sigma] | '[' type ']' }
//! sigma ::= ('ς' | 'self') '(' x [':' type] ')' term
//! atom  ::= x | '(' term ')' | 'clone' '(' term ')'
//!         | 'fold' '[' type ']' post | 'unfold' '[' type ']' post
//!         | 'obj' tatom '{' [m '=' sigma {',' m '=' sigma}] '}'
//!         | 'pack' '<' X '<:' type '=' type ',' term ':' type '>'
//!         | '{' [m '=' '@' n {',' ...}] '}'
//! ```

use super::ast::{Field, Loc, Method, MethodType, SplitMethod, Term, Type, Variance};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    /// A character that starts no token.
    #[error("{line}:{col}: unexpected character '{ch}'")]
    Lex { line: usize, col: usize, ch: char },
    /// The token stream does not match the grammar.
    #[error("{line}:{col}: expected {}, found {found}", expected.join(" or "))]
    Syntax { line: usize, col: usize, expected: Vec<String>, found: String },
    /// Two methods of one object share a name.
    #[error("{line}:{col}: duplicate method name '{name}'")]
    DuplicateMethod { line: usize, col: usize, name: String },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Loc(u64),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Loc(n) => format!("'@{n}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "let", "in", "obj", "clone", "fold", "unfold", "Fun", "pack", "open", "as", "self", "Top", "Bot",
    "mu", "All", "Some", "Obj", "inv", "cov", "con",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            continue;
        }
        let (l0, c0) = (line, col);
        let greek = match c {
            'λ' => Some(Tok::Sym("\\")),
            'ς' => Some(Tok::Ident("self".into())),
            'μ' => Some(Tok::Ident("mu".into())),
            '∀' => Some(Tok::Ident("All".into())),
            '∃' => Some(Tok::Ident("Some".into())),
            '⊤' => Some(Tok::Ident("Top".into())),
            '⊥' => Some(Tok::Ident("Bot".into())),
            '→' => Some(Tok::Sym("->")),
            '≤' => Some(Tok::Sym("<:")),
            _ => None,
        };
        if let Some(tok) = greek {
            advance(&mut i, &mut line, &mut col, c);
            out.push(Spanned { tok, line: l0, col: c0 });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Spanned { tok: Tok::Ident(word), line: l0, col: c0 });
            continue;
        }
        if c == '@' {
            advance(&mut i, &mut line, &mut col, c);
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            if start == i {
                return Err(ParseError::Lex { line: l0, col: c0, ch: '@' });
            }
            let n: String = chars[start..i].iter().collect();
            let n = n.parse().map_err(|_| ParseError::Lex { line: l0, col: c0, ch: '@' })?;
            out.push(Spanned { tok: Tok::Loc(n), line: l0, col: c0 });
            continue;
        }
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let sym: Option<&'static str> = match two.as_str() {
            "->" => Some("->"),
            "<:" => Some("<:"),
            ":=" => Some(":="),
            _ => None,
        };
        if let Some(s) = sym {
            advance(&mut i, &mut line, &mut col, c);
            { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            out.push(Spanned { tok: Tok::Sym(s), line: l0, col: c0 });
            continue;
        }
        let one: Option<&'static str> = match c {
            '(' => Some("("),
            ')' => Some(")"),
            '[' => Some("["),
            ']' => Some("]"),
            '{' => Some("{"),
            '}' => Some("}"),
            '<' => Some("<"),
            '>' => Some(">"),
            ',' => Some(","),
            '.' => Some("."),
            ':' => Some(":"),
            '=' => Some("="),
            '\\' => Some("\\"),
            _ => None,
        };
        match one {
            Some(s) => {
                advance(&mut i, &mut line, &mut col, c);
                out.push(Spanned { tok: Tok::Sym(s), line: l0, col: c0 });
            }
            None => return Err(ParseError::Lex { line: l0, col: c0, ch: c }),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
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

    fn here(&self) -> (usize, usize) {
        let s = &self.toks[self.pos];
        (s.line, s.col)
    }

    fn fail<T>(&self, expected: &[&str]) -> PResult<T> {
        let (line, col) = self.here();
        Err(ParseError::Syntax {
            line,
            col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.fail(&[&format!("'{s}'")])
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            self.fail(&[&format!("'{s}'")])
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.fail(&[what]),
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.fail(&["end of input"])
        }
    }

    // ---- types ----

    fn ty(&mut self) -> PResult<Type> {
        if self.is_kw("mu") {
            self.bump();
            let x = self.ident("type variable")?;
            self.expect_sym(".")?;
            let body = self.ty()?;
            return Ok(Type::mu(x, body));
        }
        if self.is_kw("All") || self.is_kw("Some") {
            let universal = self.is_kw("All");
            self.bump();
            let (x, bound) = self.binder_with_bound()?;
            let body = self.ty()?;
            return Ok(if universal { Type::all(x, bound, body) } else { Type::exists(x, bound, body) });
        }
        let lhs = self.ty_atom()?;
        if self.eat_sym("->") {
            let rhs = self.ty()?;
            return Ok(Type::arrow(lhs, rhs));
        }
        Ok(lhs)
    }

    /// `(X [<: A])`, bound defaulting to Top.
    fn binder_with_bound(&mut self) -> PResult<(String, Type)> {
        self.expect_sym("(")?;
        let x = self.ident("type variable")?;
        let bound = if self.eat_sym("<:") { self.ty()? } else { Type::Top };
        self.expect_sym(")")?;
        Ok((x, bound))
    }

    fn variance(&mut self) -> Option<Variance> {
        let v = match self.peek() {
            Tok::Ident(s) if s == "inv" => Variance::Inv,
            Tok::Ident(s) if s == "cov" => Variance::Cov,
            Tok::Ident(s) if s == "con" => Variance::Con,
            _ => return None,
        };
        self.bump();
        Some(v)
    }

    fn ty_atom(&mut self) -> PResult<Type> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "Top" => {
                self.bump();
                Ok(Type::Top)
            }
            Tok::Ident(s) if s == "Bot" => {
                self.bump();
                Ok(Type::Bot)
            }
            Tok::Ident(s) if s == "Obj" => {
                self.bump();
                self.expect_sym("(")?;
                let x = self.ident("type variable")?;
                self.expect_sym(")")?;
                match self.object_type_body()? {
                    Type::Obj { methods } => Ok(Type::SelfObj { var: x, methods }),
                    _ => self.fail(&["variance-annotated methods in a self type"]),
                }
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Type::var(s))
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.ty()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Sym("[") => self.object_type_body(),
            _ => self.fail(&["type"]),
        }
    }

    /// `[m : inv A, ...]` or `[m : (W, R), ...]`.
    fn object_type_body(&mut self) -> PResult<Type> {
        self.expect_sym("[")?;
        let mut var_methods: Vec<MethodType> = Vec::new();
        let mut split_methods: Vec<SplitMethod> = Vec::new();
        let mut seen = HashSet::new();
        if !self.is_sym("]") {
            loop {
                let (line, col) = self.here();
                let name = self.ident("method name")?;
                if !seen.insert(name.clone()) {
                    return Err(ParseError::DuplicateMethod { line, col, name });
                }
                self.expect_sym(":")?;
                if let Some(variance) = self.variance() {
                    if !split_methods.is_empty() {
                        return self.fail(&["'(' for a split method"]);
                    }
                    let ty = self.ty()?;
                    var_methods.push(MethodType { name, variance, ty });
                } else if self.is_sym("(") {
                    if !var_methods.is_empty() {
                        return self.fail(&["variance annotation"]);
                    }
                    self.bump();
                    let write = self.ty()?;
                    self.expect_sym(",")?;
                    let read = self.ty()?;
                    self.expect_sym(")")?;
                    split_methods.push(SplitMethod { name, write, read });
                } else {
                    return self.fail(&["'inv'", "'cov'", "'con'", "'('"]);
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym("]")?;
        if split_methods.is_empty() {
            Ok(Type::Obj { methods: var_methods })
        } else {
            Ok(Type::Split { methods: split_methods })
        }
    }

    // ---- terms ----

    fn term(&mut self) -> PResult<Term> {
        if self.is_kw("let") {
            self.bump();
            let x = self.ident("variable")?;
            let annot = if self.eat_sym(":") { self.ty()? } else { Type::Top };
            self.expect_sym("=")?;
            let bound = self.term()?;
            self.expect_kw("in")?;
            let body = self.term()?;
            return Ok(Term::let_in(x, annot, bound, body));
        }
        if self.is_sym("\\") {
            self.bump();
            self.expect_sym("(")?;
            let x = self.ident("variable")?;
            let annot = if self.eat_sym(":") { self.ty()? } else { Type::Top };
            self.expect_sym(")")?;
            let body = self.term()?;
            return Ok(Term::lam(x, annot, body));
        }
        if self.is_kw("Fun") {
            self.bump();
            let (x, bound) = self.binder_with_bound()?;
            let body = self.term()?;
            return Ok(Term::tlam(x, bound, body));
        }
        if self.is_kw("open") {
            self.bump();
            let arg = self.term()?;
            self.expect_kw("as")?;
            self.expect_sym("<")?;
            let tvar = self.ident("type variable")?;
            let bound = if self.eat_sym("<:") { self.ty()? } else { Type::Top };
            self.expect_sym(",")?;
            let var = self.ident("variable")?;
            self.expect_sym(":")?;
            let var_ty = self.ty()?;
            self.expect_sym(">")?;
            self.expect_kw("in")?;
            let body = self.term()?;
            self.expect_sym(":")?;
            let result_ty = self.ty()?;
            return Ok(Term::Open {
                arg: Box::new(arg),
                tvar,
                bound,
                var,
                var_ty,
                body: Box::new(body),
                result_ty,
            });
        }
        self.app()
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => {
                !is_keyword(s) || matches!(s.as_str(), "clone" | "fold" | "unfold" | "obj" | "pack")
            }
            Tok::Sym(s) => matches!(*s, "(" | "{"),
            _ => false,
        }
    }

    fn app(&mut self) -> PResult<Term> {
        let mut t = self.post()?;
        while self.starts_atom() {
            let arg = self.post()?;
            t = Term::app(t, arg);
        }
        Ok(t)
    }

    fn post(&mut self) -> PResult<Term> {
        let mut t = self.atom()?;
        loop {
            if self.eat_sym(".") {
                let m = self.ident("method name")?;
                if self.eat_sym(":=") {
                    let (x, annot, body) = self.sigma()?;
                    let annot = annot.unwrap_or(Type::Top);
                    return Ok(Term::update(t, m, x, annot, body));
                }
                t = Term::invoke(t, m);
            } else if self.is_sym("[") {
                self.bump();
                let a = self.ty()?;
                self.expect_sym("]")?;
                t = Term::tapp(t, a);
            } else {
                return Ok(t);
            }
        }
    }

    /// `ς(x[:A]) body`.
    fn sigma(&mut self) -> PResult<(String, Option<Type>, Term)> {
        if !self.is_kw("self") {
            return self.fail(&["'ς'", "'self'"]);
        }
        self.bump();
        self.expect_sym("(")?;
        let x = self.ident("self variable")?;
        let annot = if self.eat_sym(":") { Some(self.ty()?) } else { None };
        self.expect_sym(")")?;
        let body = self.term()?;
        Ok((x, annot, body))
    }

    fn atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "clone" => {
                self.bump();
                self.expect_sym("(")?;
                let a = self.term()?;
                self.expect_sym(")")?;
                Ok(Term::clone_of(a))
            }
            Tok::Ident(s) if s == "fold" || s == "unfold" => {
                self.bump();
                self.expect_sym("[")?;
                let annot = self.ty()?;
                self.expect_sym("]")?;
                let arg = self.post()?;
                Ok(if s == "fold" { Term::fold(annot, arg) } else { Term::unfold(annot, arg) })
            }
            Tok::Ident(s) if s == "obj" => {
                self.bump();
                let annot = self.ty_atom()?;
                self.expect_sym("{")?;
                let mut methods = Vec::new();
                let mut seen = HashSet::new();
                if !self.is_sym("}") {
                    loop {
                        let (line, col) = self.here();
                        let name = self.ident("method name")?;
                        if !seen.insert(name.clone()) {
                            return Err(ParseError::DuplicateMethod { line, col, name });
                        }
                        self.expect_sym("=")?;
                        let (x, sa, body) = self.sigma()?;
                        methods.push(Method {
                            name,
                            self_var: x,
                            self_annot: sa.unwrap_or_else(|| annot.clone()),
                            body,
                        });
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.expect_sym("}")?;
                Ok(Term::Obj { annot, methods })
            }
            Tok::Ident(s) if s == "pack" => {
                self.bump();
                self.expect_sym("<")?;
                let var = self.ident("type variable")?;
                let bound = if self.eat_sym("<:") { self.ty()? } else { Type::Top };
                self.expect_sym("=")?;
                let witness = self.ty()?;
                self.expect_sym(",")?;
                let payload = self.term()?;
                self.expect_sym(":")?;
                let body_ty = self.ty()?;
                self.expect_sym(">")?;
                Ok(Term::Pack { var, bound, witness, payload: Box::new(payload), body_ty })
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Term::var(s))
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Sym("{") => {
                self.bump();
                let mut fields = Vec::new();
                let mut seen = HashSet::new();
                if !self.is_sym("}") {
                    loop {
                        let (line, col) = self.here();
                        let name = self.ident("method name")?;
                        if !seen.insert(name.clone()) {
                            return Err(ParseError::DuplicateMethod { line, col, name });
                        }
                        self.expect_sym("=")?;
                        let loc = match self.peek() {
                            Tok::Loc(n) => Loc(*n),
                            _ => return self.fail(&["location '@n'"]),
                        };
                        self.bump();
                        fields.push(Field { name, loc });
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.expect_sym("}")?;
                Ok(Term::RtObj { fields })
            }
            _ => self.fail(&["term"]),
        }
    }
}

fn parser(text: &str) -> PResult<Parser> {
    Ok(Parser { toks: lex(text)?, pos: 0 })
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = parser(text)?;
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let mut p = parser(text)?;
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}
