//! Parser for increment-level Ito expressions.
//!
//! Grammar (whitespace-insensitive between tokens):
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor (['.'] factor)*          products; '.' is optional
//! factor := scalar | atom | symbol
//! scalar := '(' float ('+'|'-') float 'i' ')'   e.g. (0.5+0i), (0-2i)
//! atom   := dt | dB | dB* | dL | dW | dN | dQ | dP | nu | sqrt_nu
//! symbol := identifier ['*']                '*' takes the adjoint
//! ```
//!
//! `dW`, `dN`, `dQ`, `dP` expand to their fundamental forms at parse time,
//! `nu` / `sqrt_nu` are the reserved Poisson-intensity factors, and every
//! other identifier is a noncommuting coefficient symbol. Parsing always
//! yields a canonical expression.

use super::{Increment, ItoExpr, SymbolFactor};
use crate::linalg::{C64, ONE};
use std::fmt;

#[derive(Debug, Clone)]
pub struct SyntaxError {
    /// Byte offset into the input.
    pub position: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at byte {}: found {}, expected {}",
            self.position,
            self.found,
            self.expected.join(" or ")
        )
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Plus,
    Minus,
    Dot,
    Scalar(C64),
    Word { text: String, starred: bool },
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Dot => "`.`".into(),
            Token::Scalar(_) => "scalar".into(),
            Token::Word { text, starred } => {
                format!("`{}{}`", text, if *starred { "*" } else { "" })
            }
            Token::End => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(input: &'a str) -> Self {
        Lexer {
            input: input.as_bytes(),
            pos: 0,
        }
    }

    fn error(&self, pos: usize, expected: &[&str]) -> SyntaxError {
        let found = if pos >= self.input.len() {
            "end of input".to_string()
        } else {
            format!("`{}`", self.input[pos] as char)
        };
        SyntaxError {
            position: pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn scan_float(&mut self) -> Result<f64, SyntaxError> {
        let start = self.pos;
        if self.pos < self.input.len() && (self.input[self.pos] == b'+' || self.input[self.pos] == b'-')
        {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.input.len() && self.input[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos == digits_start {
            return Err(self.error(self.pos, &["digit"]));
        }
        if self.pos < self.input.len() && (self.input[self.pos] | 0x20) == b'e' {
            self.pos += 1;
            if self.pos < self.input.len()
                && (self.input[self.pos] == b'+' || self.input[self.pos] == b'-')
            {
                self.pos += 1;
            }
            let exp_start = self.pos;
            while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == exp_start {
                return Err(self.error(self.pos, &["exponent digit"]));
            }
        }
        let text = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
        text.parse::<f64>().map_err(|_| self.error(start, &["number"]))
    }

    fn next_token(&mut self) -> Result<(Token, usize), SyntaxError> {
        self.skip_ws();
        let pos = self.pos;
        if self.pos >= self.input.len() {
            return Ok((Token::End, pos));
        }
        let ch = self.input[self.pos];
        match ch {
            b'+' => {
                self.pos += 1;
                Ok((Token::Plus, pos))
            }
            b'-' => {
                self.pos += 1;
                Ok((Token::Minus, pos))
            }
            b'.' => {
                self.pos += 1;
                Ok((Token::Dot, pos))
            }
            b'(' => {
                self.pos += 1;
                let re = self.scan_float()?;
                if self.pos >= self.input.len()
                    || (self.input[self.pos] != b'+' && self.input[self.pos] != b'-')
                {
                    return Err(self.error(self.pos, &["`+`", "`-`"]));
                }
                // sign belongs to the imaginary part's float
                let im = self.scan_float()?;
                if self.pos >= self.input.len() || self.input[self.pos] != b'i' {
                    return Err(self.error(self.pos, &["`i`"]));
                }
                self.pos += 1;
                if self.pos >= self.input.len() || self.input[self.pos] != b')' {
                    return Err(self.error(self.pos, &["`)`"]));
                }
                self.pos += 1;
                Ok((Token::Scalar(C64::new(re, im)), pos))
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.input.len()
                    && (self.input[self.pos].is_ascii_alphanumeric() || self.input[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.input[start..self.pos])
                    .unwrap()
                    .to_string();
                let starred = if self.pos < self.input.len() && self.input[self.pos] == b'*' {
                    self.pos += 1;
                    true
                } else {
                    false
                };
                Ok((Token::Word { text, starred }, pos))
            }
            _ => Err(self.error(pos, &["`+`", "`-`", "`.`", "scalar", "identifier"])),
        }
    }
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    index: usize,
}

const FACTOR_EXPECTED: &[&str] = &["scalar", "increment atom", "coefficient symbol"];

impl Parser {
    fn peek(&self) -> &(Token, usize) {
        &self.tokens[self.index]
    }

    fn bump(&mut self) -> (Token, usize) {
        let t = self.tokens[self.index].clone();
        if self.index + 1 < self.tokens.len() {
            self.index += 1;
        }
        t
    }

    fn err(&self, at: usize, expected: &[&str]) -> SyntaxError {
        SyntaxError {
            position: self.tokens[at].1,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.tokens[at].0.describe(),
        }
    }

    fn starts_factor(tok: &Token) -> bool {
        matches!(tok, Token::Scalar(_) | Token::Word { .. })
    }

    fn factor(&mut self) -> Result<ItoExpr, SyntaxError> {
        let at = self.index;
        match self.bump() {
            (Token::Scalar(w), _) => Ok(ItoExpr::scalar(w)),
            (Token::Word { text, starred }, pos) => {
                let atom = match text.as_str() {
                    "dt" => Some(Increment::Dt),
                    "dB" => {
                        return Ok(ItoExpr::increment(if starred {
                            Increment::DbDag
                        } else {
                            Increment::Db
                        }))
                    }
                    "dL" => Some(Increment::DLambda),
                    "dW" => Some(Increment::Dw),
                    "dN" => Some(Increment::Dn),
                    "dQ" => Some(Increment::Dq),
                    "dP" => Some(Increment::Dp),
                    _ => None,
                };
                if let Some(kind) = atom {
                    if starred {
                        return Err(SyntaxError {
                            position: pos,
                            expected: vec![format!("`{}` without `*` (self-adjoint)", text)],
                            found: format!("`{text}*`"),
                        });
                    }
                    return Ok(ItoExpr::increment(kind));
                }
                match text.as_str() {
                    "nu" | "sqrt_nu" if starred => Err(SyntaxError {
                        position: pos,
                        expected: vec![format!("`{text}` without `*`")],
                        found: format!("`{text}*`"),
                    }),
                    "nu" => Ok(ItoExpr::nu()),
                    "sqrt_nu" => Ok(super::ItoExpr {
                        monomials: vec![super::ItoMonomial {
                            weight: ONE,
                            nu_half_power: 1,
                            coeff: vec![],
                            increment: None,
                        }],
                    }),
                    _ => {
                        let mut sym = SymbolFactor::new(text);
                        if starred {
                            sym = sym.adjoint();
                        }
                        Ok(super::ItoExpr {
                            monomials: vec![super::ItoMonomial {
                                weight: ONE,
                                nu_half_power: 0,
                                coeff: vec![sym],
                                increment: None,
                            }],
                        })
                    }
                }
            }
            _ => Err(self.err(at, FACTOR_EXPECTED)),
        }
    }

    fn term(&mut self) -> Result<ItoExpr, SyntaxError> {
        let mut product = self.factor()?;
        loop {
            match &self.peek().0 {
                Token::Dot => {
                    self.bump();
                    product = product.mul(&self.factor()?);
                }
                tok if Self::starts_factor(tok) => {
                    product = product.mul(&self.factor()?);
                }
                _ => break,
            }
        }
        Ok(product)
    }

    fn expr(&mut self) -> Result<ItoExpr, SyntaxError> {
        let mut acc = if matches!(self.peek().0, Token::Minus) {
            self.bump();
            self.term()?.neg()
        } else {
            self.term()?
        };
        loop {
            match self.peek().0 {
                Token::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Token::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                Token::End => return Ok(acc),
                _ => {
                    return Err(self.err(self.index, &["`+`", "`-`", "end of input"]));
                }
            }
        }
    }
}

/// Parse an increment expression into canonical form. The bare word `0`
/// denotes the zero expression (matching the canonical printer).
pub fn parse_ito_expr(text: &str) -> Result<ItoExpr, SyntaxError> {
    if text.trim() == "0" {
        return Ok(ItoExpr::zero());
    }
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    loop {
        let (tok, pos) = lexer.next_token()?;
        let end = tok == Token::End;
        tokens.push((tok, pos));
        if end {
            break;
        }
    }
    let mut parser = Parser { tokens, index: 0 };
    parser.expr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cr, I};
    use Increment::*;

    #[test]
    fn product_awaits_resolution() {
        // "dB.dB*" resolves through the table at parse time
        let e = parse_ito_expr("dB.dB*").unwrap();
        assert_eq!(e, ItoExpr::increment(Dt));
    }

    #[test]
    fn hp_generator_shape() {
        let e = parse_ito_expr("L.dB* - L*.dB - (0.5+0i) L*.L.dt").unwrap();
        assert_eq!(e.monomials().len(), 3);
        let built = ItoExpr::symbol("L")
            .mul(&ItoExpr::increment(DbDag))
            .sub(&ItoExpr::symbol("L").adjoint().mul(&ItoExpr::increment(Db)))
            .sub(
                &ItoExpr::symbol("L")
                    .adjoint()
                    .mul(&ItoExpr::symbol("L"))
                    .scale(cr(0.5))
                    .mul(&ItoExpr::increment(Dt)),
            );
        assert_eq!(e, built);
    }

    #[test]
    fn quadrature_alias_expands() {
        let e = parse_ito_expr("dQ").unwrap();
        assert_eq!(
            e,
            ItoExpr::increment(Db).add(&ItoExpr::increment(DbDag))
        );
        assert_eq!(format!("{e}"), "dB + dB*");
    }

    #[test]
    fn scalars_and_signs() {
        let e = parse_ito_expr("-(0+2i) dt + (1+0i) dt").unwrap();
        assert_eq!(e, ItoExpr::increment(Dt).scale(c(1.0, -2.0)));
        let e = parse_ito_expr("(0-1i).dQ.dP").unwrap();
        assert_eq!(e, ItoExpr::increment(Dt).scale(-I * I));
    }

    #[test]
    fn nu_tokens_roundtrip() {
        let dn = parse_ito_expr("dN").unwrap();
        assert_eq!(format!("{dn}"), "nu.dt + sqrt_nu.dB + sqrt_nu.dB* + dL");
        let back = parse_ito_expr(&format!("{dn}")).unwrap();
        assert_eq!(back, dn);
    }

    #[test]
    fn error_positions_and_expectations() {
        let err = parse_ito_expr("dB +").unwrap_err();
        assert_eq!(err.position, 4);
        assert!(err.expected.iter().any(|e| e.contains("symbol")));

        let err = parse_ito_expr("dB ) dt").unwrap_err();
        assert_eq!(err.position, 3);

        let err = parse_ito_expr("(0.5+i)").unwrap_err();
        assert_eq!(err.position, 5); // the imaginary part needs digits

        let err = parse_ito_expr("dt*").unwrap_err();
        assert!(err.found.contains("dt*"));

        let err = parse_ito_expr("").unwrap_err();
        assert_eq!(err.found, "end of input");
    }

    #[test]
    fn display_roundtrip_canonical() {
        for text in [
            "dB.dB*",
            "L.dB* - L*.dB - (0.5+0i) L*.L.dt",
            "dN.dN",
            "dQ.dP - dP.dQ",
            "(0.25-3i) K*.H.dL + dW",
        ] {
            let e = parse_ito_expr(text).unwrap();
            let printed = format!("{e}");
            let reparsed = parse_ito_expr(&printed).unwrap();
            assert_eq!(reparsed, e, "roundtrip failed for {text} -> {printed}");
        }
    }
}
