//! Text formats: polynomials, matrices and serialized micromorphisms.
//!
//! Polynomials use variables `p1..pm`, `x1..xn`, rational literals `a/b` and
//! the operators `+ - * / ^` with parentheses; division is only by nonzero
//! constants. A micromorphism record is
//!
//! ```text
//! source=1 target=1 order=2
//! S = p1*x1 + 1/2*p1^2
//! core1 = x1
//! terms = [([1],[1],1,1), ([2],[0],1,2)]
//! ```
//!
//! where the `core` and `terms` lines are optional on input and are checked
//! against `S` when present. The header and the `S` line may share a line.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::jetalg::{FiberGradedPoly, Rational};
use crate::matrix::Matrix;
use crate::micro::{is_micromorphism, MicroObject, Micromorphism};

/// Order used while parsing, before the declared truncation is applied.
const PARSE_ORDER: u32 = u32::MAX / 4;

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

struct PolyParser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col0: usize,
    fiber: usize,
    base: usize,
}

impl PolyParser<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        syntax(self.line, self.col0 + self.pos + 1, msg)
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

    fn expr(&mut self) -> Result<FiberGradedPoly> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == b'+' { &acc + &t } else { &acc - &t };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<FiberGradedPoly> {
        let mut acc = self.factor()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let f = self.factor()?;
            if c == b'*' {
                acc = &acc * &f;
            } else {
                let d = constant_value(&f).ok_or_else(|| {
                    syntax(self.line, self.col0 + at + 1, "division by a non-constant")
                })?;
                if d.is_zero() {
                    return Err(syntax(self.line, self.col0 + at + 1, "division by zero"));
                }
                acc = acc.scale(&d.recip());
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<FiberGradedPoly> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.factor()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.factor()
            }
            _ => {
                let a = self.atom()?;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    self.skip_ws();
                    let e = self.integer()?;
                    let e: u32 = e
                        .try_into()
                        .ok()
                        .filter(|&e| e <= 64)
                        .ok_or_else(|| self.err("exponent too large"))?;
                    Ok(a.pow(e))
                } else {
                    Ok(a)
                }
            }
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }

    fn atom(&mut self) -> Result<FiberGradedPoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(FiberGradedPoly::constant(
                    self.fiber,
                    self.base,
                    PARSE_ORDER,
                    Rational::from_integer(n),
                ))
            }
            Some(c @ (b'p' | b'x')) => {
                let at = self.pos;
                self.pos += 1;
                let idx = self.integer()?;
                let bad = || syntax(self.line, self.col0 + at + 1, "variable index out of range");
                let idx: usize = idx.try_into().map_err(|_| bad())?;
                if idx == 0 {
                    return Err(bad());
                }
                let v = if c == b'p' {
                    FiberGradedPoly::fiber_var(self.fiber, self.base, PARSE_ORDER, idx - 1)
                } else {
                    FiberGradedPoly::base_var(self.fiber, self.base, PARSE_ORDER, idx - 1)
                };
                v.map_err(|_| {
                    syntax(
                        self.line,
                        self.col0 + at + 1,
                        format!(
                            "{}{idx} is out of range for {} fiber and {} base variables",
                            c as char, self.fiber, self.base
                        ),
                    )
                })
            }
            Some(c) => Err(self.err(format!("unexpected character '{}'", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

fn constant_value(f: &FiberGradedPoly) -> Option<Rational> {
    match f.len() {
        0 => Some(Rational::zero()),
        1 => {
            let (m, c) = f.terms().next()?;
            (m.degree() == 0).then(|| c.clone())
        }
        _ => None,
    }
}

fn parse_poly_at(
    text: &str,
    line: usize,
    col0: usize,
    fiber: usize,
    base: usize,
    order: u32,
) -> Result<FiberGradedPoly> {
    let mut p = PolyParser {
        src: text.as_bytes(),
        pos: 0,
        line,
        col0,
        fiber,
        base,
    };
    let out = if p.peek().is_none() {
        return Err(p.err("empty expression"));
    } else {
        p.expr()?
    };
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    if let Some(d) = out.max_p_degree() {
        if d > order {
            return Err(syntax(
                line,
                col0 + 1,
                format!("term of p-degree {d} exceeds order {order}"),
            ));
        }
    }
    Ok(out.with_order(order))
}

/// Parses a polynomial in `fiber` p-variables and `base` x-variables; terms
/// above fiber order `order` are rejected.
pub fn parse_poly(text: &str, fiber: usize, base: usize, order: u32) -> Result<FiberGradedPoly> {
    parse_poly_at(text, 1, 0, fiber, base, order)
}

/// Parses a rational literal `a`, `-a` or `a/b`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || syntax(1, 1, format!("not a rational number: '{t}'"));
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(syntax(1, 1, "zero denominator"));
    }
    Ok(Rational::new(n, d))
}

/// Matrix text: rows separated by `;`, entries by `,`.
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let t = text.trim();
    if t.is_empty() {
        return Ok(Matrix::zeros(0, 0));
    }
    let rows: Vec<Vec<Rational>> = t
        .split(';')
        .map(|r| r.split(',').map(parse_rational).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(syntax(1, 1, "rows of different lengths"));
    }
    Ok(Matrix::from_rows(rows))
}

/// Structured text record of a micromorphism, stable for identical inputs.
pub fn serialize_morphism(f: &Micromorphism) -> String {
    let mut out = format!(
        "source={} target={} order={}\nS = {}\n",
        f.source().dim(),
        f.target().dim(),
        f.order(),
        f.generating_function()
    );
    for (i, c) in f.core().components().iter().enumerate() {
        out.push_str(&format!("core{} = {}\n", i + 1, c));
    }
    out.push_str(&format!("terms = {}\n", f.generating_function().records_text()));
    out
}

#[derive(Default)]
struct Header {
    source: Option<usize>,
    target: Option<usize>,
    order: Option<u32>,
}

/// A parsed record whose generating function has not yet been validated.
#[derive(Debug, Clone)]
pub struct Record {
    pub source: usize,
    pub target: usize,
    pub order: u32,
    pub s: FiberGradedPoly,
    declared: Vec<(usize, usize, String, String)>,
}

/// Parses a micromorphism record; see the module docs for the format.
pub fn parse_morphism(text: &str) -> Result<Micromorphism> {
    parse_record(text)?.into_morphism()
}

/// Parses header and `S` without checking the normal form.
pub fn parse_record(text: &str) -> Result<Record> {
    let mut header = Header::default();
    let mut s_line: Option<(usize, usize, String)> = None;
    let mut extra: Vec<(usize, usize, String, String)> = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut rest = content;
        let mut col = 0;
        loop {
            let trimmed = rest.trim_start();
            col += rest.len() - trimmed.len();
            rest = trimmed;
            if rest.is_empty() {
                break;
            }
            let Some(eq) = rest.find('=') else {
                return Err(syntax(line, col + 1, "expected 'key=value' or 'S = ...'"));
            };
            let key = rest[..eq].trim();
            let after = &rest[eq + 1..];
            match key {
                "source" | "target" | "order" => {
                    let v_trim = after.trim_start();
                    let vcol = col + eq + 1 + (after.len() - v_trim.len());
                    let end = v_trim.find(char::is_whitespace).unwrap_or(v_trim.len());
                    let v = &v_trim[..end];
                    let num: u64 = v
                        .parse()
                        .map_err(|_| syntax(line, vcol + 1, format!("invalid {key} value '{v}'")))?;
                    match key {
                        "source" => header.source = Some(num as usize),
                        "target" => header.target = Some(num as usize),
                        _ => {
                            header.order = Some(u32::try_from(num).map_err(|_| {
                                syntax(line, vcol + 1, "order too large")
                            })?)
                        }
                    }
                    col = vcol + end;
                    rest = &v_trim[end..];
                }
                "S" => {
                    if s_line.is_some() {
                        return Err(syntax(line, col + 1, "duplicate S"));
                    }
                    s_line = Some((line, col + eq + 1, after.to_string()));
                    break;
                }
                k if k.starts_with("core") || k == "terms" => {
                    extra.push((line, col + eq + 1, k.to_string(), after.to_string()));
                    break;
                }
                other => {
                    return Err(syntax(line, col + 1, format!("unknown field '{other}'")));
                }
            }
        }
    }

    let missing = |what: &str| syntax(1, 1, format!("missing header field '{what}'"));
    let m = header.source.ok_or_else(|| missing("source"))?;
    let n = header.target.ok_or_else(|| missing("target"))?;
    let k = header.order.ok_or_else(|| missing("order"))?;
    if k < 1 {
        return Err(syntax(1, 1, "order must be at least 1"));
    }
    let (sl, sc, stext) = s_line.ok_or_else(|| syntax(1, 1, "missing 'S = ...' line"))?;
    let s = parse_poly_at(&stext, sl, sc, m, n, k)?;
    Ok(Record {
        source: m,
        target: n,
        order: k,
        s,
        declared: extra,
    })
}

impl Record {
    /// Validates the normal form and any declared `core` and `terms` lines.
    pub fn into_morphism(self) -> Result<Micromorphism> {
        let m = self.source;
        let n = self.target;
        let f = Micromorphism::new(MicroObject::new(m), MicroObject::new(n), self.s)?;
        let check = is_micromorphism(f.generating_function(), f.source(), f.target())?;
        if !check.ok() {
            return Err(Error::Validity(check.linear_failures.join("; ")));
        }
        for (line, col, key, value) in self.declared {
            if key == "terms" {
                let shown = f.generating_function().records_text();
                if value.trim() != shown {
                    return Err(Error::Validity(format!(
                        "line {line}: terms record does not match S"
                    )));
                }
                continue;
            }
            let idx: usize = key["core".len()..]
                .parse()
                .map_err(|_| syntax(line, col, format!("invalid field '{key}'")))?;
            if idx == 0 || idx > m {
                return Err(syntax(line, col, format!("core component {idx} out of range")));
            }
            let c = parse_poly_at(&value, line, col, 0, n, 0)?;
            if c != f.core().components()[idx - 1] {
                return Err(Error::Validity(format!(
                    "line {line}: declared core{idx} = {c} but S gives {}",
                    f.core().components()[idx - 1]
                )));
            }
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetalg::{frac, rat};
    use crate::micro;

    #[test]
    fn polynomial_grammar() {
        let s = parse_poly("p1*x1 + 1/2*p1^2*x1", 1, 1, 2).unwrap();
        assert_eq!(s.coeff(&[2, 1]), frac(1, 2));
        assert_eq!(s.to_string(), "p1*x1 + 1/2*p1^2*x1");
        let t = parse_poly("(p1 + x1)*(p1 - x1) - -x2/3", 1, 2, 2).unwrap();
        assert_eq!(t.to_string(), "1/3*x2 + p1^2 - x1^2");
    }

    #[test]
    fn polynomial_errors_carry_positions() {
        match parse_poly("p1 * x3", 1, 2, 2) {
            Err(Error::Syntax { line: 1, column: 6, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_poly("p1^3", 1, 1, 2), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("p1 / x1", 1, 1, 2), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("p1 +", 1, 1, 2), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("p1 $", 1, 1, 2), Err(Error::Syntax { column: 4, .. })));
    }

    #[test]
    fn matrix_text() {
        let m = parse_matrix("1, -2/4; 0, 3").unwrap();
        assert_eq!(m[(0, 1)], frac(-1, 2));
        assert_eq!(parse_matrix(&m.to_string()).unwrap(), m);
        assert!(parse_matrix("1, 2; 3").is_err());
        assert!(parse_matrix("1/0").is_err());
    }

    #[test]
    fn inline_identity_record() {
        let f = parse_morphism("source=1 target=1 order=2 S = p1*x1").unwrap();
        assert_eq!(f, micro::identity(&MicroObject::new(1), 2).unwrap());
    }

    #[test]
    fn normal_form_violation_names_the_monomial() {
        let err = parse_morphism("source=1 target=1 order=2\nS = p1*x1 + x1^2").unwrap_err();
        assert_eq!(err, Error::NormalForm("x1^2".into()));
        assert!(err.to_string().contains("S(0,x) != 0"));
    }

    #[test]
    fn serialized_record_round_trips() {
        let s = parse_poly("p1*x1^2 + 1/2*p1^2 - 3*p1^2*x1", 1, 1, 3).unwrap();
        let f = Micromorphism::new(MicroObject::new(1), MicroObject::new(1), s).unwrap();
        let text = serialize_morphism(&f);
        assert_eq!(
            text,
            "source=1 target=1 order=3\nS = 1/2*p1^2 - 3*p1^2*x1 + p1*x1^2\ncore1 = x1^2\nterms = [([2],[0],1,2), ([2],[1],-3,1), ([1],[2],1,1)]\n"
        );
        assert_eq!(parse_morphism(&text).unwrap(), f);
        let tampered = text.replace("core1 = x1^2", "core1 = x1");
        assert!(matches!(parse_morphism(&tampered), Err(Error::Validity(_))));
    }

    #[test]
    fn header_errors() {
        assert!(matches!(parse_morphism("S = p1*x1"), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse_morphism("source=1 target=1 order=0 S = p1*x1"),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_morphism("source=1 target=1 order=2 colour=3"),
            Err(Error::Syntax { line: 1, column: 27, .. })
        ));
        assert_eq!(parse_rational(" -7/21 ").unwrap(), frac(-1, 3));
        assert_eq!(parse_rational("4").unwrap(), rat(4));
    }
}
