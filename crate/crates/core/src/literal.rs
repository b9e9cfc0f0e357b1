//! Vector literals: sums of `c*e(n,k)` and `c*e(n)` terms.
//!
//! `e(n,k)` is copy `n` (from 1), coordinate `k` of a power space. `e(n)` is
//! coordinate `n` of a single space, or the raw enumeration index elsewhere.
//! Coefficients are integers, fractions `a/b` or decimals, and a bare `e(..)`
//! or `-e(..)` means coefficient `±1`.

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational, Scalar};
use crate::space::{BasisLabel, SpaceDescriptor, SpaceKind};
use crate::vector::{FinVector, Frame};

pub fn parse_vector(space: &SpaceDescriptor, text: &str) -> Result<FinVector<Rational>> {
    let bad = |why: &str| Error::Parse(format!("bad vector literal '{text}': {why}"));
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(bad("empty"));
    }
    let mut out = FinVector::zero(Frame::E);
    for (negative, term) in split_terms(&compact) {
        if term.is_empty() {
            return Err(bad("empty term"));
        }
        let (coef, basis) = match term.rsplit_once('*') {
            Some((c, b)) => (parse_rational(c)?, b),
            None => (Rational::one(), term),
        };
        let coef = if negative { -coef } else { coef };
        let inner = basis
            .strip_prefix("e(")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| bad("terms look like c*e(n,k) or c*e(n)"))?;
        let num = |s: &str| s.parse::<u64>().map_err(|_| bad("indices are nonnegative integers"));
        let enum_no = match inner.split_once(',') {
            Some((n, k)) => space.enum_of(BasisLabel::Pair { copy: num(n)?, coord: num(k)? })?,
            None if matches!(space.kind(), SpaceKind::Single(_)) => space.enum_of(BasisLabel::Coord(num(inner)?))?,
            None => num(inner)?,
        };
        out.add_at(enum_no, coef);
    }
    Ok(out)
}

/// Splits on `+`/`-` outside parentheses.
fn split_terms(s: &str) -> Vec<(bool, &str)> {
    let mut terms = Vec::new();
    let (mut start, mut negative, mut depth) = (0, false, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | '-' if depth == 0 => {
                if i > start {
                    terms.push((negative, &s[start..i]));
                } else if i > 0 {
                    terms.push((negative, ""));
                }
                negative = ch == '-';
                start = i + 1;
            }
            _ => {}
        }
    }
    terms.push((negative, &s[start..]));
    terms
}
