//! Text and JSON forms of [`ForestSeries`].
//!
//! Text: terms `coeff*forest` joined by `+`/`-`; a bare coefficient stands
//! for a multiple of the unit, e.g. `1 + 2*1 + 1/2*1[1]`. The printer always
//! writes `coeff*forest` (the unit as `e`), so printed output re-parses to the
//! same series.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ForestSeries;
use crate::error::{Error, Result};
use crate::scalar::{parse_q, Scalar, Q};
use crate::trees::{CanonicalForest, Cursor};

impl<S: Scalar> fmt::Display for ForestSeries<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        for (i, (forest, c)) in self.iter().enumerate() {
            let neg = c.is_negative();
            let mag = if neg { -c.clone() } else { c.clone() };
            match (i, neg) {
                (0, false) => {}
                (0, true) => f.write_str("-")?,
                (_, false) => f.write_str(" + ")?,
                (_, true) => f.write_str(" - ")?,
            }
            write!(f, "{}*{}", mag.fmt_coeff(), forest)?;
        }
        Ok(())
    }
}

fn coefficient<'a>(c: &mut Cursor<'a>) -> Result<&'a str> {
    let start = c.pos;
    while matches!(c.peek(), Some(b) if b.is_ascii_digit() || b == b'.' || b == b'/') {
        c.pos += 1;
    }
    if start == c.pos {
        return Err(c.err("expected a coefficient"));
    }
    Ok(&c.src[start..c.pos])
}

/// Parse the series text form; `truncation` is attached to the result.
pub fn parse_series(src: &str, truncation: Option<usize>) -> Result<ForestSeries<Q>> {
    let mut c = Cursor::new(src);
    let mut out = ForestSeries::zero(truncation);
    c.skip_ws();
    let mut first = true;
    loop {
        c.skip_ws();
        let mut negative = false;
        match c.peek() {
            Some(b'+') if !first => c.pos += 1,
            Some(b'-') => {
                negative = true;
                c.pos += 1;
            }
            _ if first => {}
            None => break,
            _ => return Err(c.err("expected '+' or '-'")),
        }
        c.skip_ws();
        let at = c.pos;
        let coeff_text = coefficient(&mut c)?;
        let coeff = parse_q(coeff_text).map_err(|_| Error::parse(src, at, "bad coefficient"))?;
        c.skip_ws();
        let forest = if c.peek() == Some(b'*') {
            c.pos += 1;
            c.forest()?
        } else {
            if matches!(c.peek(), Some(b'[')) {
                return Err(c.err("write coefficients explicitly, e.g. 1*1[2]"));
            }
            CanonicalForest::unit()
        };
        out.add_term(forest, if negative { -coeff } else { coeff });
        first = false;
        c.skip_ws();
        if c.at_end() {
            break;
        }
    }
    Ok(out)
}

impl FromStr for ForestSeries<Q> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_series(s, None)
    }
}

/// Parse either a bare forest (coefficient one) or a full series.
pub fn parse_forest_or_series(src: &str, truncation: Option<usize>) -> Result<ForestSeries<Q>> {
    match src.parse::<CanonicalForest>() {
        Ok(f) => Ok(ForestSeries::from_forest(f, truncation)),
        Err(_) if src.contains('*') => parse_series(src, truncation),
        Err(e) => Err(e),
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct TermJson {
    pub forest: String,
    pub coeff: String,
}

/// JSON form: a term list plus the truncation level.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct SeriesJson {
    pub terms: Vec<TermJson>,
    pub truncation: Option<usize>,
}

impl<S: Scalar> ForestSeries<S> {
    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            terms: self
                .iter()
                .map(|(f, c)| TermJson {
                    forest: f.to_string(),
                    coeff: c.fmt_coeff(),
                })
                .collect(),
            truncation: self.truncation(),
        }
    }
}

impl SeriesJson {
    pub fn to_series(&self) -> Result<ForestSeries<Q>> {
        let mut out = ForestSeries::zero(self.truncation);
        for t in &self.terms {
            let f: CanonicalForest = t.forest.parse()?;
            if let Some(n) = self.truncation {
                if f.node_count() > n {
                    return Err(Error::invariant(format!(
                        "forest {f} exceeds truncation level {n}"
                    )));
                }
            }
            out.add_term(f, parse_q(&t.coeff)?);
        }
        Ok(out)
    }
}
