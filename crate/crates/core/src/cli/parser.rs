//! Thread specification files.
//!
//! ```text
//! spec     ::= "foci" idlist ";" "methods" idlist ";" { equation }
//! idlist   ::= ident { "," ident }
//! equation ::= ident "=" thread ";"
//! thread   ::= ident "." ident ";" thread
//!            | primary [ "<" ident "." ident ">" primary ]
//! primary  ::= "S" | "D" | ident | "(" thread ")"
//! ```
//!
//! `#` starts a comment running to the end of the line. Postconditional
//! composition does not associate; nest it with parentheses.

use std::fmt;

use thiserror::Error;

use crate::thread::{
    validate_spec, Alphabet, BasicAction, CheckedSpec, SpecError, ThreadSpec, ThreadTerm,
};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}", join_spec_errors(.0))]
    Spec(Vec<SpecError>),
    #[error("no equation defines {0}")]
    UnknownEntry(String),
    #[error("specification has no equations")]
    NoEquations,
}

fn join_spec_errors(errors: &[SpecError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// A parsed and validated specification file.
#[derive(Clone, Debug)]
pub struct SpecFile {
    pub alphabet: Alphabet,
    pub spec: CheckedSpec,
    /// Equation names in file order.
    pub order: Vec<String>,
}

impl SpecFile {
    /// The recursion constant for `name`, or for the first equation.
    pub fn entry(&self, name: Option<&str>) -> Result<ThreadTerm, ParseError> {
        let name = match name {
            Some(n) => n,
            None => self.order.first().ok_or(ParseError::NoEquations)?,
        };
        if !self.spec.spec().equations.contains_key(name) {
            return Err(ParseError::UnknownEntry(name.to_string()));
        }
        Ok(ThreadTerm::Rec(name.to_string(), self.spec.spec().clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Punct(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Punct(c) => write!(f, "'{c}'"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
        } else if c.is_whitespace() {
            chars.next();
            column += 1;
        } else if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                chars.next();
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    ident.push(c);
                    chars.next();
                    column += 1;
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Ident(ident),
                line: l,
                column: col,
            });
        } else if ";=<>.(),".contains(c) {
            chars.next();
            column += 1;
            out.push(Token {
                tok: Tok::Punct(c),
                line: l,
                column: col,
            });
        } else {
            return Err(ParseError::Syntax {
                line,
                column,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    alphabet: Option<&'a Alphabet>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)].tok
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let t = &self.tokens[self.pos];
        ParseError::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error_here(format!("expected {wanted}, found {}", self.peek()))
    }

    fn punct(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Punct(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{c}'")))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if *self.peek() == Tok::Ident(kw.to_string()) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{kw}'")))
        }
    }

    fn idlist(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = vec![self.ident()?];
        while *self.peek() == Tok::Punct(',') {
            self.pos += 1;
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn action(&mut self) -> Result<BasicAction, ParseError> {
        let start = self.pos;
        let focus = self.ident()?;
        self.punct('.')?;
        let method = self.ident()?;
        let action = BasicAction::new(&focus, &method);
        if let Some(alphabet) = self.alphabet {
            if !alphabet.contains(&action) {
                self.pos = start;
                return Err(self.error_here(format!(
                    "basic action {action} is not over the declared foci and methods"
                )));
            }
        }
        Ok(action)
    }

    fn thread(&mut self) -> Result<ThreadTerm, ParseError> {
        let is_prefix = matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Punct('.');
        if is_prefix {
            let a = self.action()?;
            self.punct(';')?;
            let rest = self.thread()?;
            return Ok(ThreadTerm::prefix(a, rest));
        }
        let left = self.primary()?;
        if *self.peek() != Tok::Punct('<') {
            return Ok(left);
        }
        self.pos += 1;
        let a = self.action()?;
        self.punct('>')?;
        let right = self.primary()?;
        if *self.peek() == Tok::Punct('<') {
            return Err(
                self.error_here("postconditional composition is non-associative; add parentheses")
            );
        }
        Ok(ThreadTerm::post(left, a, right))
    }

    fn primary(&mut self) -> Result<ThreadTerm, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "S" => {
                self.pos += 1;
                Ok(ThreadTerm::Stop)
            }
            Tok::Ident(s) if s == "D" => {
                self.pos += 1;
                Ok(ThreadTerm::Deadlock)
            }
            Tok::Ident(s) => {
                if *self.peek_at(1) == Tok::Punct('.') {
                    return Err(self.error_here("a prefixed thread must be parenthesized here"));
                }
                self.pos += 1;
                Ok(ThreadTerm::Var(s))
            }
            Tok::Punct('(') => {
                self.pos += 1;
                let t = self.thread()?;
                self.punct(')')?;
                Ok(t)
            }
            _ => Err(self.unexpected("a thread")),
        }
    }
}

fn parser<'a>(text: &str, alphabet: Option<&'a Alphabet>) -> Result<Parser<'a>, ParseError> {
    Ok(Parser {
        tokens: tokenize(text)?,
        pos: 0,
        alphabet,
    })
}

/// Parse and validate a specification file.
pub fn parse_spec_text(text: &str) -> Result<SpecFile, ParseError> {
    let mut p = parser(text, None)?;
    p.keyword("foci")?;
    let foci = p.idlist()?;
    p.punct(';')?;
    p.keyword("methods")?;
    let methods = p.idlist()?;
    p.punct(';')?;
    let foci: Vec<&str> = foci.iter().map(String::as_str).collect();
    let methods: Vec<&str> = methods.iter().map(String::as_str).collect();
    let alphabet = Alphabet::new(&foci, &methods);
    p.alphabet = Some(&alphabet);

    let mut spec = ThreadSpec::new();
    let mut order = Vec::new();
    while *p.peek() != Tok::End {
        let at = p.pos;
        let name = p.ident()?;
        if name == "S" || name == "D" {
            p.pos = at;
            return Err(p.error_here(format!("'{name}' is reserved")));
        }
        if spec.equations.contains_key(&name) {
            p.pos = at;
            return Err(p.error_here(format!("{name} is defined twice")));
        }
        p.punct('=')?;
        let rhs = p.thread()?;
        p.punct(';')?;
        order.push(name.clone());
        spec = spec.with(&name, rhs);
    }
    if order.is_empty() {
        return Err(ParseError::NoEquations);
    }
    let checked = validate_spec(spec).map_err(ParseError::Spec)?;
    Ok(SpecFile {
        alphabet,
        spec: checked,
        order,
    })
}

/// Parse a single thread expression (variables stay open).
pub fn parse_thread(text: &str) -> Result<ThreadTerm, ParseError> {
    let mut p = parser(text, None)?;
    let t = p.thread()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm() -> BasicAction {
        BasicAction::new("f", "m")
    }

    fn rhs(file: &SpecFile, name: &str) -> ThreadTerm {
        file.spec.spec().equations[name].clone()
    }

    #[test]
    fn basic_file() {
        let file = parse_spec_text("foci f; methods m; X = S <f.m> D;").unwrap();
        assert_eq!(
            rhs(&file, "X"),
            ThreadTerm::post(ThreadTerm::Stop, fm(), ThreadTerm::Deadlock)
        );
        assert_eq!(file.order, ["X"]);
        assert!(matches!(file.entry(None).unwrap(), ThreadTerm::Rec(ref x, _) if x == "X"));
    }

    #[test]
    fn prefix_sugar() {
        let file = parse_spec_text("foci f; methods m; X = f.m ; S;").unwrap();
        assert_eq!(
            rhs(&file, "X"),
            ThreadTerm::post(ThreadTerm::Stop, fm(), ThreadTerm::Stop)
        );
    }

    #[test]
    fn leading_angle_is_rejected() {
        let err = parse_spec_text("foci f; methods m;\nX = <f.m> S;").unwrap_err();
        assert_eq!(
            err,
            ParseError::Syntax {
                line: 2,
                column: 5,
                message: "expected a thread, found '<'".into()
            }
        );
    }

    #[test]
    fn chained_postconditional_needs_parentheses() {
        let err = parse_spec_text("foci f; methods m; X = S <f.m> S <f.m> D;").unwrap_err();
        assert!(
            matches!(err, ParseError::Syntax { column: 34, .. }),
            "{err}"
        );
        let file = parse_spec_text("foci f; methods m; X = (S <f.m> S) <f.m> D;").unwrap();
        assert_eq!(rhs(&file, "X").depth(), 2);
    }

    #[test]
    fn comments_and_lists() {
        let text =
            "# header\nfoci f, g; # two services\nmethods m, n;\nX = g.n ; Y;\nY = X <f.m> D;\n";
        let file = parse_spec_text(text).unwrap();
        assert_eq!(file.alphabet.basic_actions().len(), 4);
        assert_eq!(file.order, ["X", "Y"]);
    }

    #[test]
    fn undeclared_action_is_reported_with_position() {
        let err = parse_spec_text("foci f; methods m; X = S <g.m> D;").unwrap_err();
        assert!(
            matches!(
                err,
                ParseError::Syntax {
                    line: 1,
                    column: 27,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn semantic_errors_are_delegated() {
        let err = parse_spec_text("foci f; methods m; X = Y;").unwrap_err();
        assert!(matches!(err, ParseError::Spec(_)), "{err}");
        let err = parse_spec_text("foci f; methods m; X = S <f.m> Z;").unwrap_err();
        assert!(matches!(err, ParseError::Spec(_)), "{err}");
    }

    #[test]
    fn entry_selection() {
        let file = parse_spec_text("foci f; methods m; X = f.m ; Y; Y = f.m ; X;").unwrap();
        assert!(matches!(file.entry(Some("Y")).unwrap(), ThreadTerm::Rec(ref y, _) if y == "Y"));
        assert_eq!(
            file.entry(Some("Z")).unwrap_err(),
            ParseError::UnknownEntry("Z".into())
        );
    }

    #[test]
    fn bare_expression() {
        assert_eq!(
            parse_thread("(S <f.m> D) <f.m> S").unwrap(),
            ThreadTerm::post(
                ThreadTerm::post(ThreadTerm::Stop, fm(), ThreadTerm::Deadlock),
                fm(),
                ThreadTerm::Stop
            )
        );
        assert!(parse_thread("S S").is_err());
    }
}
