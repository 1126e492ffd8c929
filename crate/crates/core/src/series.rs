//! Sparse graded noncommutative series with exact rational coefficients.
//!
//! A `GradedSeries` is a finitely supported map from words to scalars, cut
//! off at a fixed truncation degree `N`: products silently discard any word
//! of degree `> N`. Zero coefficients are never stored. With the word order
//! from [`crate::alphabet`], iteration and both serializations are
//! deterministic.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde_json::{json, Map, Value};

use crate::alphabet::{GeneratorAlphabet, Word};
use crate::error::{Error, Result};
use crate::scalar::{format_scalar, inv_factorial, parse_scalar, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedSeries {
    alphabet: Arc<GeneratorAlphabet>,
    truncation: u32,
    terms: BTreeMap<Word, Scalar>,
}

impl GradedSeries {
    pub fn zero(alphabet: Arc<GeneratorAlphabet>, truncation: u32) -> Self {
        GradedSeries {
            alphabet,
            truncation,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(alphabet: Arc<GeneratorAlphabet>, truncation: u32) -> Self {
        let mut s = Self::zero(alphabet, truncation);
        s.add_term(s.alphabet.empty_word(), Scalar::one());
        s
    }

    pub fn constant(alphabet: Arc<GeneratorAlphabet>, truncation: u32, c: Scalar) -> Self {
        let mut s = Self::zero(alphabet, truncation);
        s.add_term(s.alphabet.empty_word(), c);
        s
    }

    pub fn generator(alphabet: Arc<GeneratorAlphabet>, truncation: u32, label: &str) -> Result<Self> {
        let idx = alphabet.lookup(label)?;
        let w = alphabet.word(vec![idx]);
        let mut s = Self::zero(alphabet, truncation);
        s.add_term(w, Scalar::one());
        Ok(s)
    }

    pub fn from_terms<I>(alphabet: Arc<GeneratorAlphabet>, truncation: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Word, Scalar)>,
    {
        let mut s = Self::zero(alphabet, truncation);
        for (w, c) in terms {
            s.add_term(w, c);
        }
        s
    }

    pub fn alphabet(&self) -> &Arc<GeneratorAlphabet> {
        &self.alphabet
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Word, Scalar> {
        self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &Word) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn constant_term(&self) -> Scalar {
        self.coefficient(&self.alphabet.empty_word())
    }

    /// Lowest degree with a nonzero term, if any.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(|w| w.degree())
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|w| w.degree())
    }

    /// Adds one term in place, dropping it if past truncation and removing
    /// the entry when the coefficient cancels to zero.
    pub fn add_term(&mut self, w: Word, c: Scalar) {
        if c.is_zero() || w.degree() > self.truncation {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.alphabet, &other.alphabet) && self.alphabet != other.alphabet {
            return Err(Error::structural("series over different alphabets"));
        }
        if self.truncation != other.truncation {
            return Err(Error::structural(format!(
                "series at different truncations ({} vs {})",
                self.truncation, other.truncation
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.alphabet.clone(), self.truncation);
        for (w, c) in &self.terms {
            out.terms.insert(w.clone(), -c.clone());
        }
        out
    }

    pub fn scalar_mul(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.alphabet.clone(), self.truncation);
        }
        let mut out = Self::zero(self.alphabet.clone(), self.truncation);
        for (w, a) in &self.terms {
            out.terms.insert(w.clone(), a * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.alphabet.clone(), self.truncation);
        for (wa, ca) in &self.terms {
            if wa.degree() > self.truncation {
                continue;
            }
            for (wb, cb) in &other.terms {
                if wa.degree() + wb.degree() > self.truncation {
                    break; // terms sorted by degree, the rest only grow
                }
                out.add_term(wa.concat(wb), ca * cb);
            }
        }
        Ok(out)
    }

    /// Restricts to the homogeneous component of a single degree.
    pub fn degree_component(&self, d: u32) -> Self {
        let mut out = Self::zero(self.alphabet.clone(), self.truncation);
        for (w, c) in &self.terms {
            if w.degree() == d {
                out.terms.insert(w.clone(), c.clone());
            }
        }
        out
    }

    /// Keeps only degrees `<= d`.
    pub fn truncate_to(&self, d: u32) -> Self {
        let mut out = Self::zero(self.alphabet.clone(), d.min(self.truncation));
        for (w, c) in &self.terms {
            if w.degree() <= out.truncation {
                out.terms.insert(w.clone(), c.clone());
            }
        }
        out
    }

    /// Re-interprets the series at a higher truncation order (no new terms).
    pub fn with_truncation(&self, n: u32) -> Self {
        let mut out = Self::zero(self.alphabet.clone(), n);
        for (w, c) in &self.terms {
            if w.degree() <= n {
                out.terms.insert(w.clone(), c.clone());
            }
        }
        out
    }

    /// exp(a) = sum a^k/k! for a with zero constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(Error::domain("exp needs a zero constant term"));
        }
        let mut out = Self::one(self.alphabet.clone(), self.truncation);
        let mut power = Self::one(self.alphabet.clone(), self.truncation);
        for k in 1..=self.truncation {
            power = power.mul(self)?;
            if power.is_zero() {
                break;
            }
            out = out.add(&power.scalar_mul(&inv_factorial(k)))?;
        }
        Ok(out)
    }

    /// log(u) = sum (-1)^{k+1} (u-1)^k / k for u with constant term 1.
    pub fn log(&self) -> Result<Self> {
        if !self.constant_term().is_one() {
            return Err(Error::domain("log needs constant term 1"));
        }
        let one = Self::one(self.alphabet.clone(), self.truncation);
        let v = self.sub(&one)?;
        let mut out = Self::zero(self.alphabet.clone(), self.truncation);
        let mut power = one;
        for k in 1..=self.truncation {
            power = power.mul(&v)?;
            if power.is_zero() {
                break;
            }
            let coeff = crate::scalar::frac(if k % 2 == 1 { 1 } else { -1 }, k as i64);
            out = out.add(&power.scalar_mul(&coeff))?;
        }
        Ok(out)
    }

    /// u^{-1} = sum (1-u)^k for u with constant term 1.
    pub fn inverse(&self) -> Result<Self> {
        if !self.constant_term().is_one() {
            return Err(Error::domain("inverse needs constant term 1"));
        }
        let one = Self::one(self.alphabet.clone(), self.truncation);
        let v = one.sub(self)?;
        let mut out = one.clone();
        let mut power = one;
        for _ in 1..=self.truncation {
            power = power.mul(&v)?;
            if power.is_zero() {
                break;
            }
            out = out.add(&power)?;
        }
        Ok(out)
    }

    /// Applies the algebra morphism sending generator `i` of this series'
    /// alphabet to `images[i]`. All images must live in one common target.
    pub fn apply_morphism(&self, images: &[GradedSeries]) -> Result<GradedSeries> {
        if images.len() != self.alphabet.len() {
            return Err(Error::structural(format!(
                "morphism needs {} generator images, got {}",
                self.alphabet.len(),
                images.len()
            )));
        }
        let (target, trunc) = match images.first() {
            Some(s) => (s.alphabet.clone(), s.truncation),
            None => {
                return Err(Error::structural("morphism on empty alphabet unsupported"));
            }
        };
        for im in images {
            if im.alphabet != target || im.truncation != trunc {
                return Err(Error::structural("morphism images in different targets"));
            }
        }
        let mut out = GradedSeries::zero(target.clone(), trunc);
        for (w, c) in &self.terms {
            let mut acc = GradedSeries::constant(target.clone(), trunc, c.clone());
            for &letter in w.letters() {
                acc = acc.mul(&images[letter as usize])?;
                if acc.is_zero() {
                    break;
                }
            }
            out = out.add(&acc)?;
        }
        Ok(out)
    }

    /// Text form: terms joined by ` + `/` - ` in canonical order, each as
    /// `coeff * w1.w2` (coefficient omitted when it is 1, word omitted for
    /// the constant term). The zero series prints as `0`.
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let neg = c < &Scalar::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if w.is_empty() {
                out.push_str(&format_scalar(&mag));
            } else if mag.is_one() {
                out.push_str(&w.render(&self.alphabet));
            } else {
                out.push_str(&format_scalar(&mag));
                out.push_str(" * ");
                out.push_str(&w.render(&self.alphabet));
            }
        }
        out
    }

    pub fn parse_text(
        alphabet: Arc<GeneratorAlphabet>,
        truncation: u32,
        text: &str,
    ) -> Result<Self> {
        let mut s = Self::zero(alphabet.clone(), truncation);
        let text = text.trim();
        if text == "0" {
            return Ok(s);
        }
        // split on top-level + / - (no parentheses in this grammar)
        let mut chunks: Vec<(bool, String)> = Vec::new();
        let mut current = String::new();
        let mut sign = false;
        let mut first = true;
        for ch in text.chars() {
            match ch {
                '+' | '-' if !first && !current.trim().is_empty() => {
                    chunks.push((sign, current.trim().to_string()));
                    current = String::new();
                    sign = ch == '-';
                }
                '-' if first => {
                    sign = true;
                }
                _ => current.push(ch),
            }
            if !ch.is_whitespace() {
                first = false;
            }
        }
        if !current.trim().is_empty() {
            chunks.push((sign, current.trim().to_string()));
        }
        for (neg, chunk) in chunks {
            let (coeff_text, word_text) = match chunk.split_once('*') {
                Some((c, w)) => (c.trim().to_string(), Some(w.trim().to_string())),
                None => {
                    // either a bare coefficient or a bare word
                    let t = chunk.trim();
                    if t.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                        (t.to_string(), None)
                    } else {
                        ("1".to_string(), Some(t.to_string()))
                    }
                }
            };
            let mut c = parse_scalar(&coeff_text)?;
            if neg {
                c = -c;
            }
            let w = match word_text {
                None => alphabet.empty_word(),
                Some(wt) if wt == "1" => alphabet.empty_word(),
                Some(wt) => {
                    let labels: Vec<&str> = wt.split('.').map(str::trim).collect();
                    alphabet.word_from_labels(&labels)?
                }
            };
            if w.degree() > truncation {
                return Err(Error::parse(format!(
                    "term of degree {} exceeds truncation {}",
                    w.degree(),
                    truncation
                )));
            }
            s.add_term(w, c);
        }
        Ok(s)
    }

    /// JSON form: `{ "N": n, "terms": [{"word": [...], "coeff": "p/q"}] }`.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let word: Vec<Value> = w
                    .letters()
                    .iter()
                    .map(|&l| Value::String(self.alphabet.label(l).to_string()))
                    .collect();
                json!({ "word": word, "coeff": format_scalar(c) })
            })
            .collect();
        let mut obj = Map::new();
        obj.insert("N".into(), json!(self.truncation));
        obj.insert("terms".into(), Value::Array(terms));
        Value::Object(obj)
    }

    pub fn from_json(alphabet: Arc<GeneratorAlphabet>, value: &Value) -> Result<Self> {
        let n = value
            .get("N")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse("series JSON missing numeric `N`"))?;
        let terms = value
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse("series JSON missing `terms` array"))?;
        let mut s = Self::zero(alphabet.clone(), n as u32);
        for t in terms {
            let word = t
                .get("word")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::parse("series term missing `word`"))?;
            let labels = word
                .iter()
                .map(|v| {
                    v.as_str()
                        .ok_or_else(|| Error::parse("series word entry not a string"))
                })
                .collect::<Result<Vec<_>>>()?;
            let coeff = t
                .get("coeff")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::parse("series term missing `coeff`"))?;
            let w = alphabet.word_from_labels(&labels)?;
            if w.degree() > s.truncation {
                return Err(Error::parse("series term exceeds truncation"));
            }
            s.add_term(w, parse_scalar(coeff)?);
        }
        Ok(s)
    }
}
