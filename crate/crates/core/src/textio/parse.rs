//! Parser and formatter for expanded polynomial expressions such as
//! `2t^3 - 0.5t + 4`.

use thiserror::Error;

use crate::poly::Polynomial;

/// Largest accepted exponent.
pub const MAX_EXPONENT: usize = 65_535;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    /// `column` is 1-based.
    #[error("unexpected character '{ch}' at column {column}")]
    UnexpectedChar { ch: char, column: usize },
    #[error("unexpected end of input, expected {expected}")]
    UnexpectedEnd { expected: &'static str },
    #[error("exponent too large at column {column} (max {MAX_EXPONENT})")]
    ExponentOverflow { column: usize },
    #[error("malformed number '{text}' at column {column}")]
    BadNumber { text: String, column: usize },
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    var: char,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn unexpected(&self) -> ParseError {
        match self.chars.get(self.pos) {
            Some(&ch) => ParseError::UnexpectedChar {
                ch,
                column: self.pos + 1,
            },
            None => ParseError::UnexpectedEnd { expected: "a term" },
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.chars.len() && p.chars[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.unexpected());
        }
        // scientific exponent, unless 'e' is the variable
        if matches!(self.chars.get(self.pos), Some('e' | 'E')) && self.var != 'e' && self.var != 'E'
        {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.chars.get(self.pos), Some('+' | '-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>().map_err(|_| ParseError::BadNumber {
            text,
            column: start + 1,
        })
    }

    fn exponent(&mut self) -> Result<usize, ParseError> {
        if self.peek() != Some('^') {
            return Ok(1);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(match self.chars.get(self.pos) {
                Some(_) => self.unexpected(),
                None => ParseError::UnexpectedEnd {
                    expected: "an exponent",
                },
            });
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        match text.parse::<usize>() {
            Ok(e) if e <= MAX_EXPONENT => Ok(e),
            _ => Err(ParseError::ExponentOverflow { column: start + 1 }),
        }
    }

    /// One unsigned term as (coefficient, power).
    fn term(&mut self) -> Result<(f64, usize), ParseError> {
        match self.peek() {
            Some(c) if c == self.var => {
                self.pos += 1;
                Ok((1.0, self.exponent()?))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let coef = self.number()?;
                match self.peek() {
                    Some('*') => {
                        self.pos += 1;
                        if self.peek() != Some(self.var) {
                            return Err(match self.chars.get(self.pos) {
                                Some(_) => self.unexpected(),
                                None => ParseError::UnexpectedEnd {
                                    expected: "the variable",
                                },
                            });
                        }
                        self.pos += 1;
                        Ok((coef, self.exponent()?))
                    }
                    Some(c) if c == self.var => {
                        self.pos += 1;
                        Ok((coef, self.exponent()?))
                    }
                    _ => Ok((coef, 0)),
                }
            }
            Some(_) => Err(self.unexpected()),
            None => Err(ParseError::UnexpectedEnd { expected: "a term" }),
        }
    }
}

/// Parse an expanded polynomial in `var`.
///
/// Grammar: `expr := ['+'|'-'] term (('+'|'-') term)*`,
/// `term := number | number '*'? var ('^' uint)? | var ('^' uint)?`.
/// Whitespace is ignored and repeated powers are summed.
pub fn parse_poly(text: &str, var: char) -> Result<Polynomial, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        var,
    };
    let mut coeffs: Vec<f64> = Vec::new();
    let mut add = |c: f64, e: usize| {
        if coeffs.len() <= e {
            coeffs.resize(e + 1, 0.0);
        }
        coeffs[e] += c;
    };
    let mut sign = match p.peek() {
        Some('-') => {
            p.pos += 1;
            -1.0
        }
        Some('+') => {
            p.pos += 1;
            1.0
        }
        _ => 1.0,
    };
    loop {
        let (c, e) = p.term()?;
        add(sign * c, e);
        match p.peek() {
            None => break,
            Some('+') => sign = 1.0,
            Some('-') => sign = -1.0,
            Some(_) => return Err(p.unexpected()),
        }
        p.pos += 1;
    }
    Ok(Polynomial::new(coeffs))
}

/// Format so that `parse_poly(format_poly(p, v), v) == p` (highest power first).
pub fn format_poly(p: &Polynomial, var: char) -> String {
    let mut out = String::new();
    for (i, &c) in p.coeffs().iter().enumerate().rev() {
        if c == 0.0 {
            continue;
        }
        let mag = c.abs();
        if out.is_empty() {
            if c < 0.0 {
                out.push('-');
            }
        } else {
            out.push_str(if c < 0.0 { " - " } else { " + " });
        }
        let num = format!("{mag:?}");
        match i {
            0 => out.push_str(&num),
            _ => {
                if mag != 1.0 {
                    out.push_str(&num);
                    out.push('*');
                }
                out.push(var);
                if i > 1 {
                    out.push('^');
                    out.push_str(&i.to_string());
                }
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
