//! Sparse ring elements and their text form.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{Generator, RingModel, RingPresentation};
use crate::error::{Error, Result};
use crate::partitions::{subset_mask, SetPartition};

/// A monomial as a sorted multiset of generator indices. Ordered by degree,
/// then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<usize>);

impl Monomial {
    pub fn new(mut generators: Vec<usize>) -> Self {
        generators.sort_unstable();
        Monomial(generators)
    }

    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn generators(&self) -> &[usize] {
        &self.0
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        let mut g = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            if j == other.0.len() || (i < self.0.len() && self.0[i] <= other.0[j]) {
                g.push(self.0[i]);
                i += 1;
            } else {
                g.push(other.0[j]);
                j += 1;
            }
        }
        Monomial(g)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Integer combination of monomials with no zero coefficients stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolyElement {
    terms: BTreeMap<Monomial, BigInt>,
}

impl PolyElement {
    pub fn zero() -> Self {
        PolyElement::default()
    }

    pub fn one() -> Self {
        PolyElement::monomial(Monomial::one())
    }

    pub fn monomial(m: Monomial) -> Self {
        let mut e = PolyElement::zero();
        e.add_term(m, BigInt::one());
        e
    }

    pub fn generator(g: usize) -> Self {
        PolyElement::monomial(Monomial::new(vec![g]))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_default();
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &PolyElement) -> PolyElement {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> PolyElement {
        let mut out = PolyElement::zero();
        for (m, v) in self.terms() {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn sub(&self, other: &PolyElement) -> PolyElement {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    /// Whether every term has degree `k`.
    pub fn is_homogeneous_of(&self, k: usize) -> bool {
        self.terms.keys().all(|m| m.degree() == k)
    }
}

pub(super) fn format(p: &RingPresentation, e: &PolyElement) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in e.terms().enumerate() {
        let negative = c.is_negative();
        match (i, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let abs = c.abs();
        let mut factors = Vec::new();
        if !abs.is_one() || m.degree() == 0 {
            factors.push(abs.to_string());
        }
        let g = m.generators();
        let mut at = 0;
        while at < g.len() {
            let run = g[at..].iter().take_while(|&&h| h == g[at]).count();
            let label = p.generators[g[at]].to_string();
            factors.push(if run == 1 { label } else { format!("{label}^{run}") });
            at += run;
        }
        out.push_str(&factors.join(" * "));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(BigInt),
    Generator(usize),
    Plus,
    Minus,
    Star,
    Caret,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn resolve(p: &RingPresentation, head: char, body: &str) -> Result<usize> {
    let numbers = |s: &str| -> Result<Vec<usize>> {
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad(format!("bad element {t:?} in {head}[{body}]"))))
            .collect()
    };
    let generator = match (head, p.model) {
        ('y', RingModel::Augmented) => {
            let v = numbers(body)?;
            let [i, j] = v[..] else {
                return Err(bad(format!("y[{body}] needs exactly two elements")));
            };
            Generator::Edge(i.min(j), i.max(j))
        }
        ('x', RingModel::Keel) => {
            let v = if body.contains(',') {
                numbers(body)?
            } else {
                body.chars()
                    .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(|| bad(format!("bad subset {body:?}"))))
                    .collect::<Result<_>>()?
            };
            if v.iter().any(|&i| i == 0 || i > p.n) {
                return Err(bad(format!("x[{body}] is not a subset of 1..{}", p.n)));
            }
            Generator::Subset(subset_mask(&v))
        }
        ('x', _) => {
            let sigma: SetPartition = body.parse()?;
            if sigma.n() != p.n {
                return Err(bad(format!("x[{body}] is not a partition of 1..{}", p.n)));
            }
            Generator::Flat(sigma)
        }
        _ => return Err(bad(format!("{head}[..] generators do not exist in model {}", p.model))),
    };
    p.generator_index(&generator.to_string())
        .ok_or_else(|| bad(format!("{generator} is not a generator of the {} ring for n = {}", p.model, p.n)))
}

fn tokenize(p: &RingPresentation, text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            _ if c.is_whitespace() => i += 1,
            '+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '^' => {
                tokens.push(Token::Caret);
                i += 1;
            }
            _ if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                tokens.push(Token::Number(s.parse().map_err(|_| bad(format!("bad number {s}")))?));
            }
            'x' | 'y' => {
                if chars.get(i + 1) != Some(&'[') {
                    return Err(bad(format!("expected '[' after {c} at offset {i}")));
                }
                let close = chars[i..]
                    .iter()
                    .position(|&d| d == ']')
                    .ok_or_else(|| bad(format!("unclosed bracket at offset {i}")))?;
                let body: String = chars[i + 2..i + close].iter().collect();
                tokens.push(Token::Generator(resolve(p, c, &body)?));
                i += close + 1;
            }
            _ => return Err(bad(format!("unexpected character {c:?} at offset {i}"))),
        }
    }
    Ok(tokens)
}

/// Parses sums of products such as `2 * x[12|3|4]^2 - x[12|34] * x[12|3|4]`.
pub(super) fn parse(p: &RingPresentation, text: &str) -> Result<PolyElement> {
    let tokens = tokenize(p, text)?;
    if tokens.is_empty() {
        return Err(bad("empty expression"));
    }
    let mut result = PolyElement::zero();
    let mut pos = 0;
    let mut first = true;
    while pos < tokens.len() {
        let mut sign = BigInt::one();
        match tokens[pos] {
            Token::Plus if !first => pos += 1,
            Token::Minus => {
                sign = BigInt::from(-1);
                pos += 1;
            }
            _ if first => {}
            _ => return Err(bad("expected '+' or '-' between terms")),
        }
        first = false;
        let mut coef = sign;
        let mut gens = Vec::new();
        let mut expect_factor = true;
        while pos < tokens.len() {
            match &tokens[pos] {
                Token::Number(v) if expect_factor => {
                    coef *= v;
                    pos += 1;
                }
                Token::Generator(g) if expect_factor => {
                    let g = *g;
                    pos += 1;
                    let mut power = 1usize;
                    if tokens.get(pos) == Some(&Token::Caret) {
                        match tokens.get(pos + 1) {
                            Some(Token::Number(v)) => {
                                power = v.to_string().parse().map_err(|_| bad("exponent too large"))?;
                                pos += 2;
                            }
                            _ => return Err(bad("expected an exponent after '^'")),
                        }
                    }
                    gens.extend(std::iter::repeat(g).take(power));
                }
                Token::Star if !expect_factor => {
                    pos += 1;
                    expect_factor = true;
                    continue;
                }
                Token::Plus | Token::Minus if !expect_factor => break,
                _ => return Err(bad("malformed product")),
            }
            expect_factor = false;
        }
        if expect_factor {
            return Err(bad("expression ends with an operator"));
        }
        let m = Monomial::new(gens);
        if p.survives(m.generators()) {
            result.add_term(m, coef);
        }
    }
    Ok(result)
}
