//! Multivariate polynomials and polynomial vector fields over `Q`.
//!
//! Text form: `1 + 2*x1*x2 - 1/2*x2^2`, variables `x1..xe`.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_q, parse_q, Q};
use crate::trees::Cursor;

/// Polynomial in `vars` variables; keys are exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    vars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl Polynomial {
    pub fn zero(vars: usize) -> Self {
        Polynomial {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: Q) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    /// The coordinate `x_{i+1}` (0-based `i`).
    pub fn var(vars: usize, i: usize) -> Self {
        let mut e = vec![0; vars];
        e[i] = 1;
        let mut p = Self::zero(vars);
        p.add_term(e, Q::one());
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Q> {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_term(&mut self, e: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        let v = self.terms.remove(&e).map(|v| v + &c).unwrap_or(c);
        if !v.is_zero() {
            self.terms.insert(e, v);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    /// `∂/∂x_{i+1}`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c * Q::from_integer(e[i].into()));
            }
        }
        out
    }

    pub fn eval(&self, y: &[Q]) -> Q {
        let mut total = Q::zero();
        for (e, c) in &self.terms {
            let mut v = c.clone();
            for (x, &k) in y.iter().zip(e) {
                if k > 0 {
                    v *= num::pow(x.clone(), k as usize);
                }
            }
            total += v;
        }
        total
    }

    /// Parse the text form with variables `x1..x{vars}`.
    pub fn parse(src: &str, vars: usize) -> Result<Self> {
        let mut c = Cursor::new(src);
        let mut out = Self::zero(vars);
        let mut first = true;
        loop {
            c.skip_ws();
            let negative = match c.peek() {
                Some(b'-') => {
                    c.pos += 1;
                    true
                }
                Some(b'+') if !first => {
                    c.pos += 1;
                    false
                }
                None if !first => break,
                _ if first => false,
                _ => return Err(c.err("expected '+' or '-'")),
            };
            let (e, coeff) = monomial(&mut c, vars)?;
            out.add_term(e, if negative { -coeff } else { coeff });
            first = false;
        }
        Ok(out)
    }
}

fn monomial(c: &mut Cursor<'_>, vars: usize) -> Result<(Vec<u32>, Q)> {
    let mut e = vec![0u32; vars];
    let mut coeff = Q::one();
    loop {
        c.skip_ws();
        match c.peek() {
            Some(b'x') => {
                c.pos += 1;
                let at = c.pos;
                let i: usize = c.number()?.parse().map_err(|_| Error::parse(c.src, at, "bad variable index"))?;
                if i == 0 || i > vars {
                    return Err(Error::parse(c.src, at, format!("variable index outside 1..={vars}")));
                }
                let mut k = 1u32;
                c.skip_ws();
                if c.peek() == Some(b'^') {
                    c.pos += 1;
                    c.skip_ws();
                    let at = c.pos;
                    k = c.number()?.parse().map_err(|_| Error::parse(c.src, at, "bad exponent"))?;
                }
                e[i - 1] += k;
            }
            Some(b) if b.is_ascii_digit() => {
                let start = c.pos;
                while matches!(c.peek(), Some(b) if b.is_ascii_digit() || b == b'.' || b == b'/') {
                    c.pos += 1;
                }
                coeff *= parse_q(&c.src[start..c.pos]).map_err(|_| Error::parse(c.src, start, "bad coefficient"))?;
            }
            _ => return Err(c.err("expected a number or a variable")),
        }
        c.skip_ws();
        if c.peek() == Some(b'*') {
            c.pos += 1;
        } else {
            return Ok((e, coeff));
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            match (n, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let factors: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(i, k)| if *k == 1 { format!("x{}", i + 1) } else { format!("x{}^{k}", i + 1) })
                .collect();
            match (factors.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{}", format_q(&mag))?,
                (false, true) => write!(f, "{}", factors.join("*"))?,
                (false, false) => write!(f, "{}*{}", format_q(&mag), factors.join("*"))?,
            }
        }
        Ok(())
    }
}

/// A map `ℝ^e → ℝ^e` with polynomial components.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyVectorField {
    components: Vec<Polynomial>,
}

impl PolyVectorField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let e = components.len();
        if e == 0 || components.iter().any(|p| p.vars() != e) {
            return Err(Error::domain("vector field components must be polynomials in e variables"));
        }
        Ok(PolyVectorField { components })
    }

    pub fn zero(e: usize) -> Self {
        PolyVectorField {
            components: vec![Polynomial::zero(e); e],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        PolyVectorField {
            components: self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        PolyVectorField {
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Directional derivative `Σ_a self^a ∂_a p`.
    pub fn apply(&self, p: &Polynomial) -> Polynomial {
        self.components
            .iter()
            .enumerate()
            .fold(Polynomial::zero(p.vars()), |acc, (a, fa)| acc.add(&fa.mul(&p.derivative(a))))
    }

    /// The pre-Lie product `self ◁ g = Σ_a self^a ∂_a g`.
    pub fn pre_lie(&self, g: &Self) -> Self {
        PolyVectorField {
            components: g.components.iter().map(|gc| self.apply(gc)).collect(),
        }
    }

    pub fn eval(&self, y: &[Q]) -> Vec<Q> {
        self.components.iter().map(|p| p.eval(y)).collect()
    }
}

/// `D^n p (v₁,…,v_n)`, the n-th derivative of `p` applied to the fields,
/// which are not themselves differentiated.
pub fn higher_derivative(p: &Polynomial, vs: &[&PolyVectorField]) -> Polynomial {
    match vs.split_first() {
        None => p.clone(),
        Some((v, rest)) => v
            .components()
            .iter()
            .enumerate()
            .fold(Polynomial::zero(p.vars()), |acc, (a, va)| {
                acc.add(&va.mul(&higher_derivative(&p.derivative(a), rest)))
            }),
    }
}

/// Driving vector fields `f₁,…,f_d` on `ℝ^e`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFields {
    e: usize,
    fields: Vec<PolyVectorField>,
}

impl VectorFields {
    pub fn new(fields: Vec<PolyVectorField>) -> Result<Self> {
        let e = fields.first().map(|f| f.dim()).ok_or_else(|| Error::domain("need at least one field"))?;
        if fields.iter().any(|f| f.dim() != e) {
            return Err(Error::domain("all fields must act on the same state dimension"));
        }
        Ok(VectorFields { e, fields })
    }

    pub fn state_dim(&self) -> usize {
        self.e
    }

    pub fn driver_dim(&self) -> usize {
        self.fields.len()
    }

    /// `f_i`, 1-based.
    pub fn field(&self, i: u32) -> Option<&PolyVectorField> {
        (i as usize).checked_sub(1).and_then(|k| self.fields.get(k))
    }

    pub fn to_json(&self) -> FieldsJson {
        FieldsJson {
            e: self.e,
            components: self
                .fields
                .iter()
                .map(|f| f.components().iter().map(|p| p.to_string()).collect())
                .collect(),
        }
    }
}

/// `fields.json`: `components[i][c]` is component `c` of `f_{i+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldsJson {
    pub e: usize,
    pub components: Vec<Vec<String>>,
}

impl FieldsJson {
    pub fn to_fields(&self) -> Result<VectorFields> {
        let fields = self
            .components
            .iter()
            .map(|f| {
                if f.len() != self.e {
                    return Err(Error::invariant(format!("field has {} components, e = {}", f.len(), self.e)));
                }
                PolyVectorField::new(f.iter().map(|s| Polynomial::parse(s, self.e)).collect::<Result<_>>()?)
            })
            .collect::<Result<_>>()?;
        VectorFields::new(fields)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qr};

    #[test]
    fn parse_print_eval() {
        let p = Polynomial::parse("1 + 2*x1*x2 - x2^2", 2).unwrap();
        assert_eq!(p.eval(&[q(3), q(2)]), q(9));
        let again = Polynomial::parse(&p.to_string(), 2).unwrap();
        assert_eq!(p, again);
        assert_eq!(Polynomial::parse("-1/2*x1^3", 1).unwrap().eval(&[q(2)]), q(-4));
        assert!(Polynomial::parse("x3", 2).is_err());
        assert!(Polynomial::parse("1 +", 2).is_err());
        assert!(Polynomial::parse("", 2).is_err());
    }

    #[test]
    fn derivatives() {
        let p = Polynomial::parse("x1^2*x2 + 3*x2", 2).unwrap();
        assert_eq!(p.derivative(0), Polynomial::parse("2*x1*x2", 2).unwrap());
        assert_eq!(p.derivative(1), Polynomial::parse("x1^2 + 3", 2).unwrap());
        let v = PolyVectorField::new(vec![Polynomial::constant(2, q(1)), Polynomial::constant(2, qr(1, 2))]).unwrap();
        // D²p(v, v) with v = (1, ½): 2·x2·1 + 2·(2x1)·½ = 2x2 + 2x1
        assert_eq!(higher_derivative(&p, &[&v, &v]), Polynomial::parse("2*x2 + 2*x1", 2).unwrap());
    }
}
