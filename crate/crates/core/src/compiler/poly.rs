use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::spin::{mode_ops, Space, SpinOperator, C64};

/// Longest word `symmetrized` will permute.
pub const MAX_SYMMETRIZE_LEN: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Axis {
        Self::ALL[i]
    }

    pub fn letter(self) -> char {
        ['X', 'Y', 'Z'][self.index()]
    }
}

/// One collective spin component on one mode (zero-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub mode: usize,
    pub axis: Axis,
}

impl Letter {
    pub fn new(mode: usize, axis: Axis) -> Self {
        Self { mode, axis }
    }
}

/// Letters on different modes commute, so words are kept stably sorted by
/// mode; the order within a mode is the operator order.
fn canonical(mut word: Vec<Letter>) -> Vec<Letter> {
    word.sort_by_key(|l| l.mode);
    word
}

fn reversed(word: &[Letter]) -> Vec<Letter> {
    canonical(word.iter().rev().copied().collect())
}

/// Sum of ordered operator words with complex coefficients.
///
/// Physical Hamiltonians have real coefficients on formally Hermitian
/// combinations; complex coefficients are admitted so that commutator
/// identities such as `X^3 = (i/4)[Z^2 - Y^2, YZ + ZY] + ...` can be written
/// and checked symbolically.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PolynomialHamiltonian {
    terms: BTreeMap<Vec<Letter>, C64>,
}

impl PolynomialHamiltonian {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::term(c, Vec::new())
    }

    pub fn letter(mode: usize, axis: Axis) -> Self {
        Self::term(C64::new(1.0, 0.0), vec![Letter::new(mode, axis)])
    }

    pub fn term(coeff: C64, word: Vec<Letter>) -> Self {
        let mut p = Self::zero();
        p.add_term(coeff, word);
        p
    }

    /// Adds `coeff * word`; exact cancellations drop the entry.
    pub fn add_term(&mut self, coeff: C64, word: Vec<Letter>) {
        let key = canonical(word);
        let entry = self.terms.entry(key.clone()).or_insert(C64::new(0.0, 0.0));
        *entry += coeff;
        if *entry == C64::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
    }

    /// Terms ordered by degree, then lexicographically.
    pub fn terms(&self) -> Vec<(&[Letter], C64)> {
        let mut v: Vec<_> = self.terms.iter().map(|(w, &c)| (w.as_slice(), c)).collect();
        v.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then(a.0.cmp(b.0)));
        v
    }

    pub fn coefficient(&self, word: &[Letter]) -> C64 {
        self.terms
            .get(&canonical(word.to_vec()))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// One more than the largest mode index referenced; 0 for constants.
    pub fn num_modes(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|w| w.iter().map(|l| l.mode + 1))
            .max()
            .unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// Constant value if the expression has no operator words.
    pub fn as_constant(&self) -> Option<C64> {
        match self.terms.len() {
            0 => Some(C64::new(0.0, 0.0)),
            1 => self.terms.get(&Vec::new()).copied(),
            _ => None,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero();
        for (w, &v) in &self.terms {
            out.add_term(v * c, w.clone());
        }
        out
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(C64::new(1.0, 0.0));
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// Formal adjoint: reversed words, conjugated coefficients.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (w, &c) in &self.terms {
            out.add_term(c.conj(), reversed(w));
        }
        out
    }

    /// Largest coefficient of `P - P^dagger`; zero means formally Hermitian.
    pub fn hermitian_defect(&self) -> f64 {
        (self - &self.adjoint())
            .terms
            .values()
            .fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Every word is paired with its reverse at the conjugate coefficient.
    pub fn is_formally_hermitian(&self) -> bool {
        self.hermitian_defect() <= 1e-14 * self.max_coefficient().max(1.0)
    }

    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Replaces each word by the average over all its orderings.
    pub fn symmetrized(&self) -> Result<Self> {
        let mut out = Self::zero();
        for (w, &c) in &self.terms {
            if w.len() > MAX_SYMMETRIZE_LEN {
                return Err(Error::InvalidParameter {
                    name: "word",
                    reason: format!(
                        "length {} exceeds the symmetrization limit {MAX_SYMMETRIZE_LEN}",
                        w.len()
                    ),
                });
            }
            let perms = permutations(w);
            let weight = c / perms.len() as f64;
            for p in perms {
                out.add_term(weight, p);
            }
        }
        Ok(out)
    }

    /// Drops coefficients below `tol` in modulus.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut out = self.clone();
        out.terms.retain(|_, c| c.norm() > tol);
        out
    }

    /// Exact matrix on `space`. Formally Hermitian expressions come back
    /// flagged Hermitian.
    pub fn materialize(&self, space: &Space) -> Result<SpinOperator> {
        let needed = self.num_modes();
        if needed > space.num_modes() {
            return Err(Error::UnknownMode {
                mode: needed - 1,
                modes: space.num_modes(),
            });
        }
        let ops = (0..space.num_modes())
            .map(|m| mode_ops(space, m))
            .collect::<Result<Vec<_>>>()?;
        let mut acc = SpinOperator::zero(space.clone());
        for (w, &c) in &self.terms {
            let mut prod: Option<SpinOperator> = None;
            for l in w {
                let f = ops[l.mode].component(l.axis.index());
                prod = Some(match prod {
                    None => f.clone(),
                    Some(p) => &p * f,
                });
            }
            let prod = prod.unwrap_or_else(|| SpinOperator::identity(space.clone()));
            acc = &acc + &prod.scale(c);
        }
        if self.is_formally_hermitian() {
            acc.into_hermitian()
        } else {
            Ok(acc)
        }
    }
}

/// Distinct orderings of a word (multiset permutations, canonicalized).
fn permutations(word: &[Letter]) -> Vec<Vec<Letter>> {
    let mut out = Vec::new();
    let mut items = word.to_vec();
    items.sort();
    loop {
        out.push(canonical(items.clone()));
        if !next_permutation(&mut items) {
            break;
        }
    }
    out
}

fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

impl Add for &PolynomialHamiltonian {
    type Output = PolynomialHamiltonian;

    fn add(self, rhs: Self) -> PolynomialHamiltonian {
        let mut out = self.clone();
        for (w, &c) in &rhs.terms {
            out.add_term(c, w.clone());
        }
        out
    }
}

impl Sub for &PolynomialHamiltonian {
    type Output = PolynomialHamiltonian;

    fn sub(self, rhs: Self) -> PolynomialHamiltonian {
        let mut out = self.clone();
        for (w, &c) in &rhs.terms {
            out.add_term(-c, w.clone());
        }
        out
    }
}

impl Mul for &PolynomialHamiltonian {
    type Output = PolynomialHamiltonian;

    fn mul(self, rhs: Self) -> PolynomialHamiltonian {
        let mut out = PolynomialHamiltonian::zero();
        for (wa, &ca) in &self.terms {
            for (wb, &cb) in &rhs.terms {
                let mut w = wa.clone();
                w.extend_from_slice(wb);
                out.add_term(ca * cb, w);
            }
        }
        out
    }
}

impl Neg for &PolynomialHamiltonian {
    type Output = PolynomialHamiltonian;

    fn neg(self) -> PolynomialHamiltonian {
        self.scale_real(-1.0)
    }
}

impl fmt::Display for PolynomialHamiltonian {
    /// Mode suffixes are one-based; real coefficients print in shortest
    /// round-trip form so parsing the output reproduces the value exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in terms.iter().enumerate() {
            let (neg, coeff) = if c.im == 0.0 {
                let neg = c.re < 0.0;
                let r = c.re.abs();
                let s = if r == 1.0 && !w.is_empty() {
                    String::new()
                } else {
                    format!("{r}")
                };
                (neg, s)
            } else if c.re == 0.0 {
                (c.im < 0.0, format!("{}i", c.im.abs()))
            } else {
                let sign = if c.im < 0.0 { '-' } else { '+' };
                (false, format!("({}{sign}{}i)", c.re, c.im.abs()))
            };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut parts = Vec::new();
            if !coeff.is_empty() {
                parts.push(coeff);
            }
            let mut i = 0;
            while i < w.len() {
                let mut run = 1;
                while i + run < w.len() && w[i + run] == w[i] {
                    run += 1;
                }
                let l = w[i];
                let mut s = format!("{}{}", l.axis.letter(), l.mode + 1);
                if run > 1 {
                    s.push_str(&format!("^{run}"));
                }
                parts.push(s);
                i += run;
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl FromStr for PolynomialHamiltonian {
    type Err = Error;

    /// Grammar (whitespace-insensitive):
    ///
    /// ```text
    /// expr   := ['+'|'-'] term (('+'|'-') term)*
    /// term   := power (['*'|'/'] power)*        juxtaposition multiplies
    /// power  := atom ['^' integer]
    /// atom   := number | 'i' | 'I' | ('X'|'Y'|'Z')[mode] | '(' expr ')'
    ///         | '[' expr ',' expr ']' | '{' expr ',' expr '}'
    /// ```
    ///
    /// Modes are one-based and default to 1; `[A,B]` is the commutator and
    /// `{A,B}` the anticommutator. Division is only by constants.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser {
            src: s,
            chars: s.chars().collect(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(p.error(format!("unexpected `{}`", p.chars[p.pos])));
        }
        Ok(e)
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, reason: String) -> Error {
        Error::Parse {
            input: self.src.to_string(),
            reason: format!("{reason} at position {}", self.pos),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<PolynomialHamiltonian> {
        let mut sign = 1.0;
        match self.peek() {
            Some('+') => self.pos += 1,
            Some('-') => {
                self.pos += 1;
                sign = -1.0;
            }
            _ => {}
        }
        let mut acc = self.term()?.scale_real(sign);
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some('-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_atom(c: char) -> bool {
        c.is_ascii_digit() || matches!(c, '.' | 'i' | 'I' | 'X' | 'Y' | 'Z' | '(' | '[' | '{')
    }

    fn term(&mut self) -> Result<PolynomialHamiltonian> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = &acc * &self.power()?;
                }
                Some('/') => {
                    self.pos += 1;
                    let d = self.power()?;
                    let c = d
                        .as_constant()
                        .ok_or_else(|| self.error("division by a non-constant".into()))?;
                    if c.norm() == 0.0 {
                        return Err(self.error("division by zero".into()));
                    }
                    acc = acc.scale(C64::new(1.0, 0.0) / c);
                }
                Some(c) if Self::starts_atom(c) => {
                    acc = &acc * &self.power()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<PolynomialHamiltonian> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let k = self.integer()?;
            let k = u32::try_from(k).map_err(|_| self.error("exponent too large".into()))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer".into()));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| self.error(format!("bad integer `{s}`")))
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let n = self.chars.len();
        while self.pos < n && (self.chars[self.pos].is_ascii_digit() || self.chars[self.pos] == '.') {
            self.pos += 1;
        }
        if self.pos < n && matches!(self.chars[self.pos], 'e' | 'E') {
            let mut k = self.pos + 1;
            if k < n && matches!(self.chars[k], '+' | '-') {
                k += 1;
            }
            if k < n && self.chars[k].is_ascii_digit() {
                self.pos = k;
                while self.pos < n && self.chars[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse()
            .map_err(|_| self.error(format!("bad number `{s}`")))
    }

    fn atom(&mut self) -> Result<PolynomialHamiltonian> {
        let c = self
            .peek()
            .ok_or_else(|| self.error("unexpected end of input".into()))?;
        match c {
            '0'..='9' | '.' => {
                let v = self.number()?;
                Ok(PolynomialHamiltonian::constant(C64::new(v, 0.0)))
            }
            'i' => {
                self.pos += 1;
                Ok(PolynomialHamiltonian::constant(C64::new(0.0, 1.0)))
            }
            'I' => {
                self.pos += 1;
                Ok(PolynomialHamiltonian::constant(C64::new(1.0, 0.0)))
            }
            'X' | 'Y' | 'Z' => {
                self.pos += 1;
                let axis = match c {
                    'X' => Axis::X,
                    'Y' => Axis::Y,
                    _ => Axis::Z,
                };
                // the mode suffix must be adjacent to its letter
                let mode = if self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                    let m = self.integer()?;
                    if m == 0 {
                        return Err(self.error("mode indices are one-based".into()));
                    }
                    m - 1
                } else {
                    0
                };
                Ok(PolynomialHamiltonian::letter(mode, axis))
            }
            '(' => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            '[' | '{' => {
                self.pos += 1;
                let a = self.expr()?;
                self.expect(',')?;
                let b = self.expr()?;
                if c == '[' {
                    self.expect(']')?;
                    Ok(a.commutator(&b))
                } else {
                    self.expect('}')?;
                    Ok(a.anticommutator(&b))
                }
            }
            other => Err(self.error(format!("unexpected `{other}`"))),
        }
    }
}

impl Serialize for PolynomialHamiltonian {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PolynomialHamiltonian {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{build_collective_ops, SpinSystem};

    fn p(s: &str) -> PolynomialHamiltonian {
        s.parse().unwrap()
    }

    #[test]
    fn parses_words_and_powers() {
        let e = p("X1^3 Z2");
        assert_eq!(e.len(), 1);
        let (w, c) = e.terms()[0];
        assert_eq!(c, C64::new(1.0, 0.0));
        assert_eq!(w.len(), 4);
        assert_eq!(e.num_modes(), 2);
        assert_eq!(p("Z2 X1"), p("X1*Z2"));
        assert_ne!(p("YZ"), p("ZY"));
        assert_eq!(p("2X/4"), p("0.5*X"));
        assert_eq!(p("(X+Y)^2"), p("X^2 + XY + YX + Y^2"));
    }

    #[test]
    fn commutator_brackets() {
        assert_eq!(p("[X,Y]"), p("XY - YX"));
        assert_eq!(p("{X,Y}"), p("XY + YX"));
        assert_eq!(p("i[X,Y]"), p("iXY - iYX"));
    }

    #[test]
    fn rejects_bad_input() {
        for s in ["X0", "X +", "(X", "X/Y", "Q", "X^", "1/0"] {
            assert!(s.parse::<PolynomialHamiltonian>().is_err(), "{s}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "X1^3*Z2",
            "0.25*X1*Z2 - Y1^2 + 3",
            "(1+2i)*X - (1-2i)*X",
            "-0.1*Z^2",
            "0.3i*XY - 0.3i*YX",
            "0",
            "1e-17*Z",
        ] {
            let e = p(s);
            let back = p(&e.to_string());
            assert_eq!(e, back, "{s} -> {e}");
        }
    }

    #[test]
    fn formal_hermiticity() {
        assert!(p("YZ + ZY").is_formally_hermitian());
        assert!(!p("YZ").is_formally_hermitian());
        assert!(p("i(XY - YX)").is_formally_hermitian());
        assert!(p("X1 Z2").is_formally_hermitian());
        assert!(p("X^3").is_formally_hermitian());
    }

    #[test]
    fn symmetrize_averages_orderings() {
        assert_eq!(p("XY").symmetrized().unwrap(), p("0.5XY + 0.5YX"));
        let s = p("X^2 Y").symmetrized().unwrap();
        assert_eq!(s, p("(XXY + XYX + YXX)/3"));
        assert!(s.is_formally_hermitian());
    }

    #[test]
    fn materialize_matches_products() {
        let sys = SpinSystem::new(2).unwrap();
        let ops = build_collective_ops(sys);
        let space = Space::single(sys);
        let m = p("YZ+ZY").materialize(&space).unwrap();
        assert!(m.is_hermitian_flagged());
        let direct = &(&ops.y * &ops.z) + &(&ops.z * &ops.y);
        assert_eq!(m.max_abs_diff(&direct).unwrap(), 0.0);
        assert!(p("X2").materialize(&space).is_err());
    }
}
