//! Expression grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | '+' unary | power
//! power   := primary ('^' exponent)?
//! exponent:= ['-'|'+'] INT | '(' ['-'|'+'] INT ')'
//! primary := INT | IDENT | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::ExprError;
use crate::expr::Expr;
use crate::symbol::{is_word_letter, Symbol};

pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(p.err("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, message: &str) -> ExprError {
        ExprError::Syntax { offset: self.pos, message: message.to_string() }
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

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    terms.push(self.term()?.neg());
                }
                _ => break,
            }
        }
        Ok(Expr::add_all(terms))
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = Expr::mul_all([acc, rhs]);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let rhs = self.unary()?;
                    acc = acc.checked_div(&rhs).map_err(|_| ExprError::Syntax {
                        offset: at,
                        message: "division by zero".to_string(),
                    })?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            let k = self.exponent()?;
            return base.pow(k).map_err(|_| ExprError::Syntax {
                offset: at,
                message: "negative power of zero".to_string(),
            });
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ExprError> {
        let paren = self.peek() == Some(b'(');
        if paren {
            self.pos += 1;
        }
        let mut negative = false;
        match self.peek() {
            Some(b'-') => {
                negative = true;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            _ => {}
        }
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("exponent must be an integer literal"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let k: i32 = digits.parse().map_err(|_| ExprError::Syntax {
            offset: start,
            message: "exponent out of range".to_string(),
        })?;
        if paren {
            if self.peek() != Some(b')') {
                return Err(self.err("expected `)` after exponent"));
            }
            self.pos += 1;
        }
        Ok(if negative { -k } else { k })
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let n: BigInt = digits.parse().expect("digits");
                Ok(Expr::constant(BigRational::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if is_word_letter(name) {
                    return Err(ExprError::UnknownSymbol { name: name.to_string(), offset: start });
                }
                Symbol::lookup(name)
                    .map(Expr::sym)
                    .ok_or_else(|| ExprError::UnknownSymbol { name: name.to_string(), offset: start })
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;
    use proptest::prelude::*;

    fn sym(name: &str) -> Expr {
        Expr::sym(Symbol::lookup(name).unwrap())
    }

    #[test]
    fn product_of_two_symbols() {
        let e = parse("nu3*nu4").unwrap();
        match e.node() {
            Node::Mul(fs) => assert_eq!(fs, &vec![sym("nu3"), sym("nu4")]),
            other => panic!("expected product, got {other:?}"),
        }
    }

    #[test]
    fn constraint_replacement_parses() {
        let e = parse("kappa1^2*kappa2^2/(q*nu1*nu2*nu3*nu4*nu5*nu6*nu7)").unwrap();
        let mut den = vec![sym("q")];
        den.extend((1..=7).map(Expr::nu));
        let expected = (sym("kappa1").pow(2).unwrap() * sym("kappa2").pow(2).unwrap())
            / Expr::mul_all(den);
        assert_eq!(e, expected);
    }

    #[test]
    fn numerator_factor_parses() {
        let e = parse("(g - nu5/kappa2)*(g - nu6/kappa2)").unwrap();
        let a = sym("g") - sym("nu5") / sym("kappa2");
        let b = sym("g") - sym("nu6") / sym("kappa2");
        assert_eq!(e, a * b);
    }

    #[test]
    fn errors_carry_offsets() {
        match parse("nu1 + * nu2") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        match parse("nu1 + nu9") {
            Err(ExprError::UnknownSymbol { name, offset }) => {
                assert_eq!(name, "nu9");
                assert_eq!(offset, 6);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("pi1*f"), Err(ExprError::UnknownSymbol { .. })));
        assert!(matches!(parse("f^g"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("f/(1-1)"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse(""), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("(f"), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn exponents_accept_signs() {
        assert_eq!(parse("f^-2").unwrap(), parse("f^(-2)").unwrap());
        assert_eq!(parse("f^(-2)").unwrap(), sym("f").pow(-2).unwrap());
        assert_eq!(parse("-3/4").unwrap().as_const().unwrap(), &BigRational::new((-3).into(), 4.into()));
    }

    #[test]
    fn tricky_prints_reparse() {
        for src in [
            "-f/g",
            "(-f)/g",
            "f - (g + 1)*q",
            "f - 3/4*g",
            "-(f + g)",
            "x",
        ] {
            let Ok(e) = parse(src) else { continue };
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{src} printed as {printed}");
        }
        let e = Expr::add_all([sym("f"), Expr::mul_all([Expr::int(-1), sym("g") + sym("q")])]);
        assert_eq!(parse(&e.to_string()).unwrap(), e, "{e}");
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-5i64..6, 1i64..4).prop_map(|(n, d)| Expr::rational(n, d).unwrap()),
            prop::sample::select(vec!["q", "nu1", "nu7", "kappa1", "kappa2", "f", "g"])
                .prop_map(sym),
        ];
        leaf.prop_recursive(4, 32, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::add_all),
                prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::mul_all),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| a.checked_div(&b).unwrap_or(a)),
                (inner.clone(), -3i32..4).prop_map(|(a, k)| a.pow(k).unwrap_or(a)),
                inner.prop_map(|a| a.neg()),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            let back = parse(&printed).unwrap();
            prop_assert_eq!(back, e, "printed: {}", printed);
        }
    }
}
