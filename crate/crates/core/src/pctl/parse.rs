//! Recursive-descent parser for
//!
//! ```text
//! formula ::= "P<=" NUM "[" path "]"
//! path    ::= "X" sf | sf "U<=" INT sf
//! sf      ::= conj ("|" conj)*
//! conj    ::= unary ("&" unary)*
//! unary   ::= "!" unary | "true" | "\"" ap "\"" | "(" sf ")"
//! ```

use super::formula::{BoundedFormula, PathFormula, StateFormula};
use super::PctlError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Prob,
    Le,
    Num(String),
    LBrack,
    RBrack,
    Next,
    Until,
    True,
    Str(String),
    Not,
    And,
    Or,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number {n}"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::End => "end of input".into(),
        other => format!("{other:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, PctlError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let syntax = |pos: usize, message: String| PctlError::Syntax { pos, message };
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '[' | ']' | '(' | ')' | '!' | '&' | '|' => {
                out.push((
                    pos,
                    match c {
                        '[' => Tok::LBrack,
                        ']' => Tok::RBrack,
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '!' => Tok::Not,
                        '&' => Tok::And,
                        _ => Tok::Or,
                    },
                ));
                i += 1;
            }
            '<' => {
                if chars.get(i + 1).map(|c| c.1) != Some('=') {
                    return Err(syntax(pos, "expected `<=`".into()));
                }
                out.push((pos, Tok::Le));
                i += 2;
            }
            '"' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].1 != '"' {
                    j += 1;
                }
                if j == chars.len() {
                    return Err(syntax(pos, "unterminated proposition name".into()));
                }
                let name: String = chars[start..j].iter().map(|c| c.1).collect();
                if name.is_empty() {
                    return Err(syntax(pos, "empty proposition name".into()));
                }
                out.push((pos, Tok::Str(name)));
                i = j + 1;
            }
            c if c.is_ascii_digit() || c == '.' || c == '-' => {
                let mut j = i + 1;
                while j < chars.len() {
                    let d = chars[j].1;
                    let exponent_sign =
                        (d == '-' || d == '+') && matches!(chars[j - 1].1, 'e' | 'E');
                    if d.is_ascii_digit() || matches!(d, '.' | '/' | 'e' | 'E') || exponent_sign {
                        j += 1;
                    } else {
                        break;
                    }
                }
                out.push((pos, Tok::Num(chars[i..j].iter().map(|c| c.1).collect())));
                i = j;
            }
            c if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && (chars[j].1.is_ascii_alphanumeric() || chars[j].1 == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().map(|c| c.1).collect();
                let tok = match word.as_str() {
                    "P" => Tok::Prob,
                    "X" => Tok::Next,
                    "U" => Tok::Until,
                    "true" => Tok::True,
                    _ => {
                        return Err(syntax(
                            pos,
                            format!("unknown identifier `{word}`; quote proposition names"),
                        ))
                    }
                };
                out.push((pos, tok));
                i = j;
            }
            other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), PctlError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn error(&self, message: String) -> PctlError {
        PctlError::Syntax {
            pos: self.pos(),
            message,
        }
    }

    fn bounded(&mut self) -> Result<BoundedFormula, PctlError> {
        self.expect(Tok::Prob, "`P`")?;
        self.expect(Tok::Le, "`<=`")?;
        let bound = match self.bump() {
            Tok::Num(n) => n,
            other => {
                return Err(self.error(format!(
                    "expected probability bound, found {}",
                    describe(&other)
                )))
            }
        };
        self.expect(Tok::LBrack, "`[`")?;
        let path = if *self.peek() == Tok::Next {
            self.bump();
            PathFormula::Next(self.state()?)
        } else {
            let lhs = self.state()?;
            self.expect(Tok::Until, "`U`")?;
            self.expect(Tok::Le, "`<=` after `U`")?;
            let pos = self.pos();
            let steps = match self.bump() {
                Tok::Num(n) if n.starts_with('-') => return Err(PctlError::NegativeHorizon(n)),
                Tok::Num(n) => n.parse::<usize>().map_err(|_| PctlError::Syntax {
                    pos,
                    message: format!("step bound `{n}` is not a natural number"),
                })?,
                other => {
                    return Err(PctlError::Syntax {
                        pos,
                        message: format!("expected step bound, found {}", describe(&other)),
                    })
                }
            };
            let rhs = self.state()?;
            PathFormula::Until {
                lhs,
                rhs,
                bound: steps,
            }
        };
        self.expect(Tok::RBrack, "`]`")?;
        BoundedFormula::new(&bound, path)
    }

    fn state(&mut self) -> Result<StateFormula, PctlError> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Or {
            self.bump();
            f = StateFormula::or(f, self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<StateFormula, PctlError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            f = StateFormula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<StateFormula, PctlError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Not => Ok(StateFormula::negate(self.unary()?)),
            Tok::True => Ok(StateFormula::True),
            Tok::Str(name) => Ok(StateFormula::Atom(name)),
            Tok::LParen => {
                let f = self.state()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Prob => {
                self.at -= 1;
                self.bounded()?;
                Err(PctlError::Nested { pos })
            }
            other => Err(PctlError::Syntax {
                pos,
                message: format!("expected state formula, found {}", describe(&other)),
            }),
        }
    }
}

/// Parses a bounded weak-safety formula.
pub fn parse_formula(text: &str) -> Result<BoundedFormula, PctlError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let f = p.bounded()?;
    if *p.peek() != Tok::End {
        return Err(p.error(format!("trailing input: {}", describe(p.peek()))));
    }
    Ok(f)
}

/// Parses a bare state formula such as `"a" & !"b"`.
pub fn parse_state_formula(text: &str) -> Result<StateFormula, PctlError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let f = p.state()?;
    if *p.peek() != Tok::End {
        return Err(p.error(format!("trailing input: {}", describe(p.peek()))));
    }
    Ok(f)
}
