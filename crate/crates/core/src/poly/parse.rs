use super::{Monomial, Polynomial};
use crate::error::{Error, Result};

/// Parses `text` as a polynomial in the given variables.
///
/// Grammar (whitespace ignored):
///
/// ```text
/// expr    := sign? term (('+' | '-') term)*
/// term    := factor ('*' factor)*
/// factor  := sign? primary ('^' uint)?
/// primary := number ('/' number)? | name | '(' expr ')'
/// number  := digits ('.' digits?)? | '.' digits, followed by an optional
///            exponent part ([eE] sign? digits)
/// ```
///
/// Parenthesized sub-expressions are a convenience on top of the plain
/// sum-of-products form.
pub fn parse_polynomial(text: &str, variables: &[String]) -> Result<Polynomial> {
    Parser::new(variables)?.parse(text)
}

/// Reusable parser bound to a variable list.
pub struct Parser<'v> {
    variables: &'v [String],
}

impl<'v> Parser<'v> {
    pub fn new(variables: &'v [String]) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::Schema("variable list is empty".into()));
        }
        for (i, v) in variables.iter().enumerate() {
            if !is_identifier(v) {
                return Err(Error::Schema(format!("`{v}` is not a valid variable name")));
            }
            if variables[..i].contains(v) {
                return Err(Error::Schema(format!("duplicate variable `{v}`")));
            }
        }
        Ok(Parser { variables })
    }

    pub fn parse(&self, text: &str) -> Result<Polynomial> {
        let mut cur = Cursor {
            src: text.as_bytes(),
            pos: 0,
            vars: self.variables,
        };
        let p = cur.expr()?;
        cur.skip_ws();
        if cur.pos != cur.src.len() {
            return Err(cur.syntax(format!("unexpected `{}`", cur.peek_char())));
        }
        Ok(p)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

impl Cursor<'_> {
    fn n(&self) -> usize {
        self.vars.len()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn peek_char(&self) -> char {
        std::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
            .unwrap_or('?')
    }

    fn syntax(&self, message: String) -> Error {
        Error::Syntax {
            position: self.pos,
            message,
        }
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.term()?.scale(-1.0)
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?)?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial> {
        let sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1.0
            }
            Some(b'+') => {
                self.pos += 1;
                1.0
            }
            _ => 1.0,
        };
        let base = self.primary()?;
        let base = if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.exponent()?;
            base.pow(k)
        } else {
            base
        };
        Ok(if sign < 0.0 { base.scale(-1.0) } else { base })
    }

    fn exponent(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let bad = |pos, message: &str| Error::BadExponent {
            position: pos,
            message: message.to_string(),
        };
        if start == self.pos {
            return Err(bad(start, "exponent must be a non-negative integer"));
        }
        if matches!(self.src.get(self.pos), Some(b'.') | Some(b'e') | Some(b'E')) {
            return Err(bad(start, "exponent must be a non-negative integer"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        digits.parse::<u32>().map_err(|_| bad(start, "exponent out of range"))
    }

    fn primary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected `)`".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let mut value = self.number()?;
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    self.skip_ws();
                    let den = self.number()?;
                    if den == 0.0 {
                        return Err(self.syntax("division by zero in rational literal".into()));
                    }
                    value /= den;
                }
                if !value.is_finite() {
                    return Err(self.syntax("coefficient is not finite".into()));
                }
                Ok(Polynomial::constant(self.n(), value))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                match self.vars.iter().position(|v| v == name) {
                    Some(k) => Ok(Polynomial::from_terms(self.n(), [(Monomial::var(self.n(), k), 1.0)])),
                    None => Err(Error::UnknownVariable {
                        name: name.to_string(),
                        position: start,
                    }),
                }
            }
            Some(_) => Err(self.syntax(format!("unexpected `{}`", self.peek_char()))),
            None => Err(self.syntax("unexpected end of input".into())),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let digits = |cur: &mut Self| {
            let s = cur.pos;
            while cur.pos < cur.src.len() && cur.src[cur.pos].is_ascii_digit() {
                cur.pos += 1;
            }
            cur.pos - s
        };
        let int_digits = digits(self);
        let mut frac_digits = 0;
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            frac_digits = digits(self);
        }
        if int_digits + frac_digits == 0 {
            self.pos = start;
            return Err(self.syntax("expected a number".into()));
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // `2e` followed by a non-digit: not an exponent part
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map_err(|e| Error::Syntax {
            position: start,
            message: format!("bad number `{text}`: {e}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn transcribes_terms() {
        let p = parse_polynomial("x1^2 - 2*x1*x2 + 1", &vars(&["x1", "x2"])).unwrap();
        assert_eq!(p.num_terms(), 3);
        assert_eq!(p.coefficient(&Monomial::new(vec![2, 0])), 1.0);
        assert_eq!(p.coefficient(&Monomial::new(vec![1, 1])), -2.0);
        assert_eq!(p.coefficient(&Monomial::new(vec![0, 0])), 1.0);
    }

    #[test]
    fn zero_literal() {
        let p = parse_polynomial("0", &vars(&["x1"])).unwrap();
        assert!(p.is_zero());
        let q = parse_polynomial("x1 - x1", &vars(&["x1"])).unwrap();
        assert!(q.is_zero());
    }

    #[test]
    fn repeated_factors_merge() {
        let v = vars(&["x1"]);
        let p = parse_polynomial("3*x1*x1", &v).unwrap();
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coefficient(&Monomial::new(vec![2])), 3.0);
        // both spellings agree as functions
        let q = parse_polynomial("3*x1^2", &v).unwrap();
        for x in [-1.7, -0.3, 0.0, 0.9, 2.4] {
            assert_eq!(p.evaluate(&[x]).unwrap(), q.evaluate(&[x]).unwrap());
        }
    }

    #[test]
    fn literals() {
        let v = vars(&["x"]);
        let p = parse_polynomial("1/4*x + 2.5e-1 + .5 - 1E1*x^0", &v).unwrap();
        assert_eq!(p.coefficient(&Monomial::new(vec![1])), 0.25);
        assert_eq!(p.coefficient(&Monomial::new(vec![0])), 0.25 + 0.5 - 10.0);
        let q = parse_polynomial("  -  x ^ 2   ", &v).unwrap();
        assert_eq!(q.coefficient(&Monomial::new(vec![2])), -1.0);
    }

    #[test]
    fn parentheses_and_powers() {
        let v = vars(&["x"]);
        let p = parse_polynomial("x*(x-1)", &v).unwrap();
        assert_eq!(p, parse_polynomial("x^2 - x", &v).unwrap());
        let q = parse_polynomial("(x+1)^3", &v).unwrap();
        assert_eq!(q, parse_polynomial("x^3 + 3*x^2 + 3*x + 1", &v).unwrap());
    }

    #[test]
    fn errors_carry_positions() {
        let v = vars(&["x1", "x2"]);
        match parse_polynomial("x1 + y", &v) {
            Err(Error::UnknownVariable { name, position }) => {
                assert_eq!(name, "y");
                assert_eq!(position, 5);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_polynomial("x1^-2", &v),
            Err(Error::BadExponent { position: 3, .. })
        ));
        assert!(matches!(parse_polynomial("x1^1.5", &v), Err(Error::BadExponent { .. })));
        assert!(matches!(parse_polynomial("x1 +", &v), Err(Error::Syntax { .. })));
        assert!(matches!(parse_polynomial("x1 x2", &v), Err(Error::Syntax { position: 3, .. })));
        assert!(matches!(parse_polynomial("1/0", &v), Err(Error::Syntax { .. })));
        assert!(matches!(parse_polynomial("", &v), Err(Error::Syntax { .. })));
    }

    #[test]
    fn variable_list_is_validated() {
        assert!(parse_polynomial("1", &[]).is_err());
        assert!(parse_polynomial("x", &vars(&["x", "x"])).is_err());
        assert!(parse_polynomial("x", &vars(&["x", "2y"])).is_err());
    }
}
