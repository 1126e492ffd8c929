//! Free Lie algebras on a weighted alphabet via Lyndon words.
//!
//! Lyndon words of a given degree form a basis of the free Lie algebra; the
//! Chen-Fox-Lyndon factorization turns every associative word into a unique
//! nonincreasing product of Lyndon words, and the corresponding bracketed
//! monomials form a PBW basis of the free associative algebra. Expansions of
//! bracketed Lyndon words are triangular (leading word = the word itself,
//! all other words lex-greater of the same degree), which makes expressing a
//! series in the PBW basis a finite elimination. The length-1 part of that
//! expression is the Lie (primitive) part; the complement is spanned by PBW
//! monomials of length >= 2.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};

use crate::alphabet::{GeneratorAlphabet, Word};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::GradedSeries;

/// `true` when `letters` is strictly smaller than every proper rotation.
pub fn is_lyndon(letters: &[u16]) -> bool {
    if letters.is_empty() {
        return false;
    }
    let n = letters.len();
    for k in 1..n {
        let rotation = letters[k..].iter().chain(letters[..k].iter());
        if !(letters.iter().lt(rotation)) {
            return false;
        }
    }
    true
}

/// Chen-Fox-Lyndon factorization into nonincreasing Lyndon factors (Duval).
pub fn cfl_factorize(letters: &[u16]) -> Vec<Vec<u16>> {
    let n = letters.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        let mut k = i;
        while j < n && letters[k] <= letters[j] {
            if letters[k] < letters[j] {
                k = i;
            } else {
                k += 1;
            }
            j += 1;
        }
        while i <= k {
            out.push(letters[i..i + j - k].to_vec());
            i += j - k;
        }
    }
    out
}

/// Standard factorization of a Lyndon word of length >= 2: the right factor
/// is the lexicographically smallest proper suffix (equivalently the longest
/// proper Lyndon suffix), the left factor is the corresponding prefix.
pub fn standard_factorization(letters: &[u16]) -> (Vec<u16>, Vec<u16>) {
    assert!(letters.len() >= 2, "single letters have no factorization");
    let mut best = 1;
    for k in 2..letters.len() {
        if letters[k..] < letters[best..] {
            best = k;
        }
    }
    (letters[..best].to_vec(), letters[best..].to_vec())
}

/// All Lyndon words of total weighted degree exactly `degree`, in lex order.
pub fn lyndon_words(alphabet: &Arc<GeneratorAlphabet>, degree: u32) -> Vec<Word> {
    let k = alphabet.len() as u16;
    if k == 0 || degree == 0 {
        return Vec::new();
    }
    let max_len = degree as usize; // degrees are >= 1
    let mut out = Vec::new();
    // Duval's generation of Lyndon words of length <= max_len in lex order
    let mut w: Vec<u16> = vec![0];
    loop {
        if alphabet.word_degree(&w) == degree {
            out.push(alphabet.word(w.clone()));
        }
        let m = w.len();
        while w.len() < max_len {
            w.push(w[w.len() - m]);
        }
        while let Some(&last) = w.last() {
            if last == k - 1 {
                w.pop();
            } else {
                break;
            }
        }
        match w.last_mut() {
            None => break,
            Some(last) => *last += 1,
        }
    }
    out
}

/// A Lyndon word with its standard factorization (absent for single letters).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LyndonWord {
    pub word: Word,
    pub factorization: Option<(Word, Word)>,
}

pub fn lyndon_basis(alphabet: &Arc<GeneratorAlphabet>, degree: u32) -> Vec<LyndonWord> {
    lyndon_words(alphabet, degree)
        .into_iter()
        .map(|word| {
            let factorization = if word.len() >= 2 {
                let (u, v) = standard_factorization(word.letters());
                Some((alphabet.word(u), alphabet.word(v)))
            } else {
                None
            };
            LyndonWord { word, factorization }
        })
        .collect()
}

/// Shared expansion cache for bracketed Lyndon words over one alphabet.
///
/// Write-once-per-key; safe for concurrent readers.
pub struct FreeLieOps {
    alphabet: Arc<GeneratorAlphabet>,
    memo: RwLock<HashMap<Word, Arc<BTreeMap<Word, Scalar>>>>,
}

impl FreeLieOps {
    pub fn new(alphabet: Arc<GeneratorAlphabet>) -> Arc<Self> {
        Arc::new(FreeLieOps {
            alphabet,
            memo: RwLock::new(HashMap::new()),
        })
    }

    pub fn alphabet(&self) -> &Arc<GeneratorAlphabet> {
        &self.alphabet
    }

    /// Associative expansion of the standard bracketing b(w) of a Lyndon word.
    pub fn bracket_expansion(&self, w: &Word) -> Arc<BTreeMap<Word, Scalar>> {
        if let Some(hit) = self.memo.read().unwrap().get(w) {
            return hit.clone();
        }
        let result: BTreeMap<Word, Scalar> = if w.len() <= 1 {
            let mut m = BTreeMap::new();
            m.insert(w.clone(), Scalar::one());
            m
        } else {
            let (u, v) = standard_factorization(w.letters());
            let bu = self.bracket_expansion(&self.alphabet.word(u));
            let bv = self.bracket_expansion(&self.alphabet.word(v));
            let mut m = BTreeMap::new();
            for (wu, cu) in bu.iter() {
                for (wv, cv) in bv.iter() {
                    add_to(&mut m, wu.concat(wv), cu * cv);
                    add_to(&mut m, wv.concat(wu), -(cu * cv));
                }
            }
            m
        };
        let arc = Arc::new(result);
        self.memo
            .write()
            .unwrap()
            .entry(w.clone())
            .or_insert_with(|| arc.clone())
            .clone()
    }

    /// Expansion of an ordered PBW monomial b(f1)...b(fk).
    pub fn pbw_eval(&self, factors: &[Word]) -> BTreeMap<Word, Scalar> {
        let mut acc: BTreeMap<Word, Scalar> = BTreeMap::new();
        acc.insert(self.alphabet.empty_word(), Scalar::one());
        for f in factors {
            let expansion = self.bracket_expansion(f);
            let mut next = BTreeMap::new();
            for (wa, ca) in &acc {
                for (wb, cb) in expansion.iter() {
                    add_to(&mut next, wa.concat(wb), ca * cb);
                }
            }
            acc = next;
        }
        acc
    }
}

fn add_to(m: &mut BTreeMap<Word, Scalar>, w: Word, c: Scalar) {
    if c.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match m.entry(w) {
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

/// Element of the free Lie algebra in the Lyndon basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieElement {
    alphabet: Arc<GeneratorAlphabet>,
    truncation: u32,
    terms: BTreeMap<Word, Scalar>,
}

impl LieElement {
    pub fn zero(alphabet: Arc<GeneratorAlphabet>, truncation: u32) -> Self {
        LieElement {
            alphabet,
            truncation,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_lyndon_word(
        alphabet: Arc<GeneratorAlphabet>,
        truncation: u32,
        word: Word,
        coeff: Scalar,
    ) -> Result<Self> {
        if !is_lyndon(word.letters()) {
            return Err(Error::domain(format!(
                "`{}` is not a Lyndon word",
                word.render(&alphabet)
            )));
        }
        let mut e = Self::zero(alphabet, truncation);
        e.add_term(word, coeff);
        Ok(e)
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

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, w: Word, c: Scalar) {
        if w.degree() > self.truncation || c.is_zero() {
            return;
        }
        add_to(&mut self.terms, w, c);
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn scalar_mul(&self, c: &Scalar) -> Self {
        let mut out = Self::zero(self.alphabet.clone(), self.truncation);
        for (w, a) in &self.terms {
            out.add_term(w.clone(), a * c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scalar_mul(&-Scalar::one())
    }

    /// Expands into the free associative algebra.
    pub fn embed(&self, ops: &FreeLieOps) -> GradedSeries {
        let mut out = GradedSeries::zero(self.alphabet.clone(), self.truncation);
        for (w, c) in &self.terms {
            for (word, coeff) in ops.bracket_expansion(w).iter() {
                out.add_term(word.clone(), coeff * c);
            }
        }
        out
    }

    /// Lie bracket, re-expressed in the Lyndon basis.
    pub fn bracket(&self, other: &Self, ops: &FreeLieOps) -> Result<Self> {
        let a = self.embed(ops);
        let b = other.embed(ops);
        let comm = a.mul(&b)?.sub(&b.mul(&a)?)?;
        let (lie, residual) = lie_project(ops, &comm)?;
        if !residual.is_zero() {
            return Err(Error::contract(
                "commutator of Lie elements had a non-Lie residual",
            ));
        }
        Ok(lie)
    }
}

/// First Eulerian idempotent: the canonical projection of a cocommutative
/// Hopf algebra onto its primitive part, with kernel the span of symmetrized
/// products of length >= 2. On a word it is
///
///   e1(w) = sum_{k>=1} (-1)^{k+1}/k  sum  w_{B1} w_{B2} ... w_{Bk},
///
/// the inner sum over ordered partitions of the letter positions into k
/// nonempty blocks (each w_{Bi} keeps the letters of block Bi in their
/// original order). Hopf morphisms commute with e1, so quotients like `T_n`
/// can apply it to any representative and reduce afterwards.
pub fn eulerian_lie_part(series: &GradedSeries) -> GradedSeries {
    let alphabet = series.alphabet().clone();
    let mut out = GradedSeries::zero(alphabet.clone(), series.truncation());
    for (w, c) in series.terms() {
        if w.is_empty() {
            continue;
        }
        for_each_ordered_partition(w.len(), &mut |blocks: &[Vec<usize>]| {
            let k = blocks.len() as u32;
            let sign = if k % 2 == 1 { 1 } else { -1 };
            let coeff = crate::scalar::frac(sign, k as i64) * c;
            let mut letters = Vec::with_capacity(w.len());
            for block in blocks {
                for &pos in block {
                    letters.push(w.letters()[pos]);
                }
            }
            out.add_term(alphabet.word(letters), coeff);
        });
    }
    out
}

/// Calls `f` on every ordered partition of `{0..n-1}` into nonempty blocks.
fn for_each_ordered_partition(n: usize, f: &mut impl FnMut(&[Vec<usize>])) {
    // unordered partitions in first-use order, then all block orderings
    fn rec(pos: usize, n: usize, blocks: &mut Vec<Vec<usize>>, f: &mut impl FnMut(&[Vec<usize>])) {
        if pos == n {
            let k = blocks.len();
            let mut order: Vec<usize> = (0..k).collect();
            permute(&mut order, 0, blocks, f);
            return;
        }
        for i in 0..blocks.len() {
            blocks[i].push(pos);
            rec(pos + 1, n, blocks, f);
            let i_len = blocks[i].len();
            blocks[i].truncate(i_len - 1);
        }
        blocks.push(vec![pos]);
        rec(pos + 1, n, blocks, f);
        blocks.pop();
    }
    fn permute(
        order: &mut Vec<usize>,
        at: usize,
        blocks: &[Vec<usize>],
        f: &mut impl FnMut(&[Vec<usize>]),
    ) {
        if at == order.len() {
            let arranged: Vec<Vec<usize>> = order.iter().map(|&i| blocks[i].clone()).collect();
            f(&arranged);
            return;
        }
        for i in at..order.len() {
            order.swap(at, i);
            permute(order, at + 1, blocks, f);
            order.swap(at, i);
        }
    }
    if n == 0 {
        return;
    }
    rec(0, n, &mut Vec::new(), f);
}

/// Expresses a series in the Lyndon PBW basis: list of (nonincreasing Lyndon
/// factor sequence, coefficient). The empty factor sequence carries the
/// constant term.
pub fn pbw_decompose(ops: &FreeLieOps, series: &GradedSeries) -> Vec<(Vec<Word>, Scalar)> {
    let alphabet = series.alphabet().clone();
    let mut rest: BTreeMap<Word, Scalar> =
        series.terms().map(|(w, c)| (w.clone(), c.clone())).collect();
    let mut out = Vec::new();
    while let Some((w, c)) = rest.iter().next().map(|(w, c)| (w.clone(), c.clone())) {
        rest.remove(&w);
        if w.is_empty() {
            out.push((Vec::new(), c));
            continue;
        }
        let factors: Vec<Word> = cfl_factorize(w.letters())
            .into_iter()
            .map(|ls| alphabet.word(ls))
            .collect();
        let expansion = ops.pbw_eval(&factors);
        debug_assert_eq!(expansion.get(&w), Some(&Scalar::one()));
        for (word, coeff) in expansion {
            if word != w {
                add_to(&mut rest, word, -(coeff * &c));
            }
        }
        out.push((factors, c));
    }
    out
}

/// Splits a zero-constant-term series into its Lie part (the Eulerian
/// projection, expressed in the Lyndon basis) and the residual
/// `s - embed(lie part)`. The residual vanishes exactly when `s` lies in the
/// free Lie algebra, independently of any basis convention.
pub fn lie_project(ops: &FreeLieOps, series: &GradedSeries) -> Result<(LieElement, GradedSeries)> {
    if !series.constant_term().is_zero() {
        return Err(Error::domain("lie_project needs a zero constant term"));
    }
    let primitive = eulerian_lie_part(series);
    let mut lie = LieElement::zero(series.alphabet().clone(), series.truncation());
    for (factors, coeff) in pbw_decompose(ops, &primitive) {
        debug_assert_eq!(factors.len(), 1, "Eulerian image must be primitive");
        if factors.len() == 1 {
            lie.add_term(factors.into_iter().next().unwrap(), coeff);
        }
    }
    let residual = series.sub(&lie.embed(ops))?;
    Ok((lie, residual))
}

/// Reduced coproduct on the free algebra with all generators primitive:
/// delta(s) = Delta(s) - s (x) 1 - 1 (x) s + eps(s) 1 (x) 1.
pub fn reduced_coproduct_square(series: &GradedSeries) -> BTreeMap<(Word, Word), Scalar> {
    let alphabet = series.alphabet().clone();
    let empty = alphabet.empty_word();
    let mut out: BTreeMap<(Word, Word), Scalar> = BTreeMap::new();
    let mut add = |k: (Word, Word), c: Scalar| {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match out.entry(k) {
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
    };
    for (w, c) in series.terms() {
        let n = w.len();
        // Delta(w): distribute the letters over the two slots in order
        for mask in 0..(1u64 << n) {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for (i, &l) in w.letters().iter().enumerate() {
                if mask & (1 << i) != 0 {
                    left.push(l);
                } else {
                    right.push(l);
                }
            }
            add((alphabet.word(left), alphabet.word(right)), c.clone());
        }
        add((w.clone(), empty.clone()), -c.clone());
        add((empty.clone(), w.clone()), -c.clone());
        if w.is_empty() {
            add((empty.clone(), empty.clone()), c.clone());
        }
    }
    out
}

pub fn is_primitive(series: &GradedSeries) -> bool {
    series.constant_term().is_zero() && reduced_coproduct_square(series).is_empty()
}
