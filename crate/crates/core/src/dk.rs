//! The algebras `t_n` and `T_n = U(t_n)`.
//!
//! Generators `t^{i,j} = t^{j,i}` (1 <= i < j <= n, degree 1) with the
//! infinitesimal-braid relations `[t^{i,j}+t^{i,k}, t^{j,k}] = 0` and
//! `[t^{i,j}, t^{k,l}] = 0` for disjoint pairs.
//!
//! Normal forms come from the iterated semidirect decomposition
//! `t_n = t_{n-1} x| f_n`, with `f_n` the free Lie algebra on
//! `t^{1,n}, ..., t^{n-1,n}`: assigning `t^{i,j}` the level `j`, a word is
//! normal when its letter levels never increase left to right. A word with a
//! level ascent `t^{a,b} t^{c,d}` (b < d) straightens by
//!
//! ```text
//! t^{a,b} t^{c,d} -> t^{c,d} t^{a,b} + [t^{a,b}, t^{c,d}],
//! ```
//!
//! where the bracket is `0` when `c` lies outside `{a,b}`, and
//! `+-[t^{a,d}, t^{b,d}]` for `c = a` / `c = b` — both level-`d` letters, so
//! each rewrite strictly decreases a well-founded measure. The result is the
//! PBW expansion of the semidirect decomposition: two raw series are
//! congruent modulo the relation ideal exactly when their normal forms
//! coincide.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::alphabet::{GeneratorAlphabet, Word};
use crate::error::{Error, Result};
use crate::freelie::{self, FreeLieOps};
use crate::scalar::Scalar;
use crate::series::GradedSeries;

pub const MAX_STRANDS: u8 = 5;

/// Context for one strand count: alphabet plus straightening cache.
/// Caches are write-once-per-key and safe for concurrent readers.
pub struct DkAlgebra {
    n: u8,
    alphabet: Arc<GeneratorAlphabet>,
    pairs: Vec<(u8, u8)>, // generator index -> (i, j), i < j
    lie_ops: Arc<FreeLieOps>,
    straighten_memo: RwLock<HashMap<Word, Arc<BTreeMap<Word, Scalar>>>>,
}

fn registry() -> &'static Mutex<HashMap<u8, Arc<DkAlgebra>>> {
    static REGISTRY: OnceLock<Mutex<HashMap<u8, Arc<DkAlgebra>>>> = OnceLock::new();
    REGISTRY.get_or_init(|| Mutex::new(HashMap::new()))
}

impl DkAlgebra {
    /// Shared handle for the given strand count (2 to 5); caches persist for
    /// the life of the process.
    pub fn get(n: u8) -> Result<Arc<DkAlgebra>> {
        if n < 2 {
            return Err(Error::domain("strand count must be at least 2"));
        }
        if n > MAX_STRANDS {
            return Err(Error::unsupported(format!(
                "strand count {n} exceeds the supported maximum {MAX_STRANDS}"
            )));
        }
        let mut reg = registry().lock().unwrap();
        if let Some(a) = reg.get(&n) {
            return Ok(a.clone());
        }
        // level-major generator order: t12 | t13 t23 | t14 t24 t34 | ...
        let mut pairs = Vec::new();
        for j in 2..=n {
            for i in 1..j {
                pairs.push((i, j));
            }
        }
        let labels: Vec<String> = pairs.iter().map(|(i, j)| format!("t{i}{j}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let alphabet = GeneratorAlphabet::unit_degrees(&refs)?;
        let algebra = Arc::new(DkAlgebra {
            n,
            alphabet: alphabet.clone(),
            pairs,
            lie_ops: FreeLieOps::new(alphabet),
            straighten_memo: RwLock::new(HashMap::new()),
        });
        reg.insert(n, algebra.clone());
        Ok(algebra)
    }

    pub fn strands(&self) -> u8 {
        self.n
    }

    pub fn alphabet(&self) -> &Arc<GeneratorAlphabet> {
        &self.alphabet
    }

    pub fn lie_ops(&self) -> &Arc<FreeLieOps> {
        &self.lie_ops
    }

    pub fn pair_of(&self, letter: u16) -> (u8, u8) {
        self.pairs[letter as usize]
    }

    fn level(&self, letter: u16) -> u8 {
        self.pairs[letter as usize].1
    }

    pub fn generator_index(&self, i: u8, j: u8) -> Result<u16> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        if a == 0 || a == b || b > self.n {
            return Err(Error::domain(format!(
                "no generator t{i}{j} in T_{}",
                self.n
            )));
        }
        Ok(self
            .pairs
            .iter()
            .position(|&p| p == (a, b))
            .expect("pair in range") as u16)
    }

    /// The generator t^{i,j} as an element.
    pub fn generator(&self, i: u8, j: u8, truncation: u32) -> Result<TnElement> {
        let idx = self.generator_index(i, j)?;
        let w = self.alphabet.word(vec![idx]);
        let series = GradedSeries::from_terms(
            self.alphabet.clone(),
            truncation,
            [(w, Scalar::one())],
        );
        Ok(TnElement {
            algebra: self.arc(),
            series,
        })
    }

    fn arc(&self) -> Arc<DkAlgebra> {
        DkAlgebra::get(self.n).expect("registered")
    }

    pub fn zero(&self, truncation: u32) -> TnElement {
        TnElement {
            algebra: self.arc(),
            series: GradedSeries::zero(self.alphabet.clone(), truncation),
        }
    }

    pub fn one(&self, truncation: u32) -> TnElement {
        TnElement {
            algebra: self.arc(),
            series: GradedSeries::one(self.alphabet.clone(), truncation),
        }
    }

    /// The central element t^{1,2} + t^{1,3} + ... of degree 1.
    pub fn symmetric_degree_one(&self, truncation: u32) -> TnElement {
        let mut s = GradedSeries::zero(self.alphabet.clone(), truncation);
        for idx in 0..self.pairs.len() {
            s.add_term(self.alphabet.word(vec![idx as u16]), Scalar::one());
        }
        TnElement {
            algebra: self.arc(),
            series: s,
        }
    }

    /// Bracket correction for one level ascent: `[t^{ab}, t^{cd}]` with
    /// `b < d` equals `sign * (uv - vu)` on the returned letters, or `None`
    /// when the generators commute.
    fn ascent_bracket(&self, x: u16, y: u16) -> Option<(i8, u16, u16)> {
        let (a, b) = self.pairs[x as usize];
        let (c, d) = self.pairs[y as usize];
        debug_assert!(b < d);
        let u = self.generator_index(a.min(d), a.max(d)).ok()?;
        let v = self.generator_index(b.min(d), b.max(d)).ok()?;
        if c == a {
            Some((1, u, v))
        } else if c == b {
            Some((-1, u, v))
        } else {
            None
        }
    }

    fn first_ascent(&self, letters: &[u16]) -> Option<usize> {
        letters
            .windows(2)
            .position(|w| self.level(w[0]) < self.level(w[1]))
    }

    fn straighten_word(&self, w: &Word) -> Arc<BTreeMap<Word, Scalar>> {
        if let Some(hit) = self.straighten_memo.read().unwrap().get(w) {
            return hit.clone();
        }
        let result = match self.first_ascent(w.letters()) {
            None => {
                let mut m = BTreeMap::new();
                m.insert(w.clone(), Scalar::one());
                m
            }
            Some(i) => {
                let letters = w.letters();
                let mut acc: BTreeMap<Word, Scalar> = BTreeMap::new();
                let mut push = |word: Vec<u16>, c: Scalar, this: &Self| {
                    let sub = this.straighten_word(&this.alphabet.word(word));
                    for (sw, sc) in sub.iter() {
                        add_to(&mut acc, sw.clone(), sc * &c);
                    }
                };
                let mut swapped = letters.to_vec();
                swapped.swap(i, i + 1);
                push(swapped, Scalar::one(), self);
                if let Some((sign, u, v)) = self.ascent_bracket(letters[i], letters[i + 1]) {
                    let s = crate::scalar::int(sign as i64);
                    let mut uv = letters.to_vec();
                    uv.splice(i..i + 2, [u, v]);
                    push(uv, s.clone(), self);
                    let mut vu = letters.to_vec();
                    vu.splice(i..i + 2, [v, u]);
                    push(vu, -s, self);
                }
                acc
            }
        };
        let arc = Arc::new(result);
        self.straighten_memo
            .write()
            .unwrap()
            .entry(w.clone())
            .or_insert_with(|| arc.clone())
            .clone()
    }

    /// Canonical representative of a raw series modulo the relation ideal.
    pub fn normal_form(&self, raw: &GradedSeries) -> Result<TnElement> {
        if raw.alphabet() != &self.alphabet {
            return Err(Error::structural("series not over this T_n alphabet"));
        }
        let mut out = GradedSeries::zero(self.alphabet.clone(), raw.truncation());
        for (w, c) in raw.terms() {
            for (nw, nc) in self.straighten_word(w).iter() {
                out.add_term(nw.clone(), nc * c);
            }
        }
        Ok(TnElement {
            algebra: self.arc(),
            series: out,
        })
    }

    /// Basis of the degree-`d` part of the Lie algebra `t_n`: per level `q`,
    /// the Lyndon words in the level-`q` letters (level 2 contributes only
    /// the single degree-1 generator).
    pub fn lie_basis(&self, d: u32) -> Vec<Word> {
        let mut out = Vec::new();
        for q in 2..=self.n {
            let letters: Vec<u16> = (0..self.pairs.len() as u16)
                .filter(|&l| self.level(l) == q)
                .collect();
            if letters.len() == 1 {
                if d == 1 {
                    out.push(self.alphabet.word(vec![letters[0]]));
                }
                continue;
            }
            // Lyndon words over this level's letters, remapped into the full
            // alphabet; the level block is contiguous so order is preserved.
            let sub = GeneratorAlphabet::unit_degrees(
                &letters
                    .iter()
                    .map(|&l| self.alphabet.label(l))
                    .collect::<Vec<_>>(),
            )
            .expect("sub-alphabet");
            for w in freelie::lyndon_words(&sub, d) {
                let letters_full: Vec<u16> =
                    w.letters().iter().map(|&l| letters[l as usize]).collect();
                out.push(self.alphabet.word(letters_full));
            }
        }
        out
    }

    /// dim `t_n(d)` from the semidirect decomposition.
    pub fn graded_dimension(&self, d: u32) -> usize {
        self.lie_basis(d).len()
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

/// Element of `T_n` in PBW normal form.
#[derive(Clone)]
pub struct TnElement {
    algebra: Arc<DkAlgebra>,
    series: GradedSeries,
}

impl std::fmt::Debug for TnElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "T{}[{}]", self.algebra.n, self.series.to_text())
    }
}

impl PartialEq for TnElement {
    fn eq(&self, other: &Self) -> bool {
        self.algebra.n == other.algebra.n && self.series == other.series
    }
}
impl Eq for TnElement {}

impl TnElement {
    pub fn algebra(&self) -> &Arc<DkAlgebra> {
        &self.algebra
    }

    pub fn strands(&self) -> u8 {
        self.algebra.n
    }

    pub fn series(&self) -> &GradedSeries {
        &self.series
    }

    pub fn truncation(&self) -> u32 {
        self.series.truncation()
    }

    pub fn is_zero(&self) -> bool {
        self.series.is_zero()
    }

    pub fn constant_term(&self) -> Scalar {
        self.series.constant_term()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.algebra.n != other.algebra.n {
            return Err(Error::structural("elements of different T_n"));
        }
        if self.truncation() != other.truncation() {
            return Err(Error::structural("elements at different truncations"));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(TnElement {
            algebra: self.algebra.clone(),
            series: self.series.add(&other.series)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(TnElement {
            algebra: self.algebra.clone(),
            series: self.series.sub(&other.series)?,
        })
    }

    pub fn neg(&self) -> Self {
        TnElement {
            algebra: self.algebra.clone(),
            series: self.series.neg(),
        }
    }

    pub fn scalar_mul(&self, c: &Scalar) -> Self {
        TnElement {
            algebra: self.algebra.clone(),
            series: self.series.scalar_mul(c),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let raw = self.series.mul(&other.series)?;
        self.algebra.normal_form(&raw)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn degree_component(&self, d: u32) -> Self {
        TnElement {
            algebra: self.algebra.clone(),
            series: self.series.degree_component(d),
        }
    }

    pub fn truncate_to(&self, d: u32) -> Self {
        TnElement {
            algebra: self.algebra.clone(),
            series: self.series.truncate_to(d),
        }
    }

    pub fn exp(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(Error::domain("exp needs a zero constant term"));
        }
        let n = self.truncation();
        let mut out = self.algebra.one(n);
        let mut power = self.algebra.one(n);
        for k in 1..=n {
            power = power.mul(self)?;
            if power.is_zero() {
                break;
            }
            out = out.add(&power.scalar_mul(&crate::scalar::inv_factorial(k)))?;
        }
        Ok(out)
    }

    pub fn log(&self) -> Result<Self> {
        if !self.constant_term().is_one() {
            return Err(Error::domain("log needs constant term 1"));
        }
        let n = self.truncation();
        let v = self.sub(&self.algebra.one(n))?;
        let mut out = self.algebra.zero(n);
        let mut power = self.algebra.one(n);
        for k in 1..=n {
            power = power.mul(&v)?;
            if power.is_zero() {
                break;
            }
            out = out.add(&power.scalar_mul(&crate::scalar::frac(
                if k % 2 == 1 { 1 } else { -1 },
                k as i64,
            )))?;
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.constant_term().is_one() {
            return Err(Error::domain("inverse needs constant term 1"));
        }
        let n = self.truncation();
        let one = self.algebra.one(n);
        let v = one.sub(self)?;
        let mut out = one.clone();
        let mut power = one;
        for _ in 1..=n {
            power = power.mul(&v)?;
            if power.is_zero() {
                break;
            }
            out = out.add(&power)?;
        }
        Ok(out)
    }

    /// The Lie part in the Lyndon-derived PBW decomposition. Normal words
    /// have nonincreasing letter levels and the generator order is
    /// level-major, so Chen-Fox-Lyndon factors never cross a level
    /// boundary: the elimination stays inside normal forms and its
    /// length-1 part is a genuine element of `t_n`.
    pub fn lie_part(&self) -> Result<TnElement> {
        let mut out = GradedSeries::zero(self.algebra.alphabet.clone(), self.truncation());
        for (factors, coeff) in freelie::pbw_decompose(self.algebra.lie_ops(), &self.series) {
            if factors.len() == 1 {
                for (w, c) in self.algebra.lie_ops().bracket_expansion(&factors[0]).iter() {
                    out.add_term(w.clone(), c * &coeff);
                }
            }
        }
        Ok(TnElement {
            algebra: self.algebra.clone(),
            series: out,
        })
    }

    /// `self - lie_part(self)`; zero exactly when the element lies in `t_n`.
    pub fn non_lie_residual(&self) -> Result<TnElement> {
        let lie = self.lie_part()?;
        let mut x = self.clone();
        let c = self.constant_term();
        if !c.is_zero() {
            // constant terms are never part of the Lie algebra
            x = x.sub(&self.algebra.one(self.truncation()).scalar_mul(&c))?;
        }
        x.sub(&lie)
    }

    pub fn is_lie(&self) -> Result<bool> {
        Ok(self.constant_term().is_zero() && self.non_lie_residual()?.is_zero())
    }

    /// Coordinates of a homogeneous Lie element w.r.t. `lie_basis(d)`;
    /// `None` when the degree-`d` component is not Lie.
    pub fn lie_coordinates(&self, d: u32) -> Result<Option<Vec<Scalar>>> {
        let component = self.degree_component(d);
        let basis = self.algebra.lie_basis(d);
        let index: HashMap<&Word, usize> = basis.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let mut coords = vec![Scalar::zero(); basis.len()];
        for (factors, coeff) in freelie::pbw_decompose(self.algebra.lie_ops(), component.series()) {
            if factors.len() != 1 {
                return Ok(None);
            }
            let Some(&i) = index.get(&factors[0]) else {
                return Err(Error::contract("Lie part outside the single-level basis"));
            };
            coords[i] = coeff;
        }
        Ok(Some(coords))
    }

    /// Insertion-coproduct morphism determined by `t^{i,j} -> sum over
    /// blocks`; `blocks[k]` lists the strands of `{1..m}` that strand `k+1`
    /// maps to. Blocks must be pairwise disjoint and nonempty.
    pub fn insertion(&self, blocks: &[Vec<u8>], m: u8) -> Result<TnElement> {
        let n = self.algebra.n;
        if blocks.len() != n as usize {
            return Err(Error::domain(format!(
                "expected {n} blocks, got {}",
                blocks.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for b in blocks {
            if b.is_empty() {
                return Err(Error::domain("insertion block is empty"));
            }
            for &s in b {
                if s == 0 || s > m {
                    return Err(Error::domain(format!("strand {s} outside 1..={m}")));
                }
                if !seen.insert(s) {
                    return Err(Error::domain(format!("strand {s} in two blocks")));
                }
            }
        }
        let target = DkAlgebra::get(m)?;
        let trunc = self.truncation();
        let mut images = Vec::with_capacity(self.algebra.pairs.len());
        for &(i, j) in &self.algebra.pairs {
            let mut im = GradedSeries::zero(target.alphabet.clone(), trunc);
            for &alpha in &blocks[(i - 1) as usize] {
                for &beta in &blocks[(j - 1) as usize] {
                    let idx = target.generator_index(alpha, beta)?;
                    im.add_term(target.alphabet.word(vec![idx]), Scalar::one());
                }
            }
            images.push(im);
        }
        let raw = self.series.apply_morphism(&images)?;
        target.normal_form(&raw)
    }

    /// Permutation action: strand `k` goes to `sigma[k-1]`.
    pub fn permute(&self, sigma: &[u8]) -> Result<TnElement> {
        let blocks: Vec<Vec<u8>> = sigma.iter().map(|&s| vec![s]).collect();
        self.insertion(&blocks, self.algebra.n)
    }

    /// Kills strand `i` and downshifts the remaining labels.
    pub fn epsilon(&self, i: u8) -> Result<TnElement> {
        let n = self.algebra.n;
        if n < 3 {
            return Err(Error::domain("epsilon needs at least 3 strands"));
        }
        if i == 0 || i > n {
            return Err(Error::domain(format!("strand {i} outside 1..={n}")));
        }
        let target = DkAlgebra::get(n - 1)?;
        let trunc = self.truncation();
        let mut images = Vec::with_capacity(self.algebra.pairs.len());
        let shift = |j: u8| if j > i { j - 1 } else { j };
        for &(a, b) in &self.algebra.pairs {
            if a == i || b == i {
                images.push(GradedSeries::zero(target.alphabet.clone(), trunc));
            } else {
                let idx = target.generator_index(shift(a), shift(b))?;
                let mut im = GradedSeries::zero(target.alphabet.clone(), trunc);
                im.add_term(target.alphabet.word(vec![idx]), Scalar::one());
                images.push(im);
            }
        }
        let raw = self.series.apply_morphism(&images)?;
        target.normal_form(&raw)
    }

    /// Co-Hochschild differential into `T_{n+1}`:
    /// `d(x) = sum_i (-1)^{i+1} x^{1,..,{i,i+1},..,n+1} - x^{2,..,n+1}
    ///  + (-1)^n x^{1,..,n}`.
    pub fn cohochschild_d(&self) -> Result<TnElement> {
        let n = self.algebra.n;
        let m = n + 1;
        let target = DkAlgebra::get(m)?;
        let mut out = target.zero(self.truncation());
        for i in 1..=n {
            // singleton blocks except {i, i+1} at position i
            let mut blocks = Vec::with_capacity(n as usize);
            for k in 1..=n {
                if k == i {
                    blocks.push(vec![k, k + 1]);
                } else if k < i {
                    blocks.push(vec![k]);
                } else {
                    blocks.push(vec![k + 1]);
                }
            }
            let image = self.insertion(&blocks, m)?;
            let sign = crate::scalar::int(if i % 2 == 1 { 1 } else { -1 });
            out = out.add(&image.scalar_mul(&sign))?;
        }
        let tail: Vec<Vec<u8>> = (2..=m).map(|s| vec![s]).collect();
        out = out.sub(&self.insertion(&tail, m)?)?;
        let head: Vec<Vec<u8>> = (1..=n).map(|s| vec![s]).collect();
        let sign = crate::scalar::int(if n % 2 == 0 { 1 } else { -1 });
        out = out.add(&self.insertion(&head, m)?.scalar_mul(&sign))?;
        Ok(out)
    }

    /// Signed sum over the permutation action of `S_n`, optionally averaged
    /// by `1/n!`.
    pub fn alt(&self, norm: AltNormalization) -> Result<TnElement> {
        let n = self.algebra.n as usize;
        let mut out = self.algebra.zero(self.truncation());
        let mut sigma: Vec<u8> = (1..=n as u8).collect();
        loop {
            let sign = permutation_sign(&sigma);
            let term = self.permute(&sigma)?;
            out = out.add(&term.scalar_mul(&crate::scalar::int(sign as i64)))?;
            if !next_permutation(&mut sigma) {
                break;
            }
        }
        if norm == AltNormalization::Averaged {
            out = out.scalar_mul(&crate::scalar::inv_factorial(n as u32));
        }
        Ok(out)
    }

    /// n + series JSON.
    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("n".into(), json!(self.algebra.n));
        if let Value::Object(series) = self.series.to_json() {
            for (k, v) in series {
                obj.insert(k, v);
            }
        }
        Value::Object(obj)
    }

    pub fn from_json(value: &Value) -> Result<TnElement> {
        let n = value
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse("T_n element JSON missing `n`"))?;
        let algebra = DkAlgebra::get(n as u8)?;
        let raw = GradedSeries::from_json(algebra.alphabet().clone(), value)?;
        algebra.normal_form(&raw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AltNormalization {
    /// Plain signed sum over `S_n`.
    SignedSum,
    /// Signed sum divided by `n!` (a projection; the default).
    Averaged,
}

pub fn permutation_sign(sigma: &[u8]) -> i8 {
    let mut inversions = 0;
    for i in 0..sigma.len() {
        for j in i + 1..sigma.len() {
            if sigma[i] > sigma[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Lexicographic next permutation; `false` once wrapped around.
pub fn next_permutation(sigma: &mut [u8]) -> bool {
    let n = sigma.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && sigma[i - 1] >= sigma[i] {
        i -= 1;
    }
    if i == 0 {
        sigma.sort_unstable();
        return false;
    }
    let mut j = n - 1;
    while sigma[j] <= sigma[i - 1] {
        j -= 1;
    }
    sigma.swap(i - 1, j);
    sigma[i..].reverse();
    true
}

/// A group-like element `1 + ...` of `T_n`, stored by logarithm together
/// with its cached expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupLikeTn {
    log: TnElement,
    expanded: TnElement,
}

impl GroupLikeTn {
    pub fn one(algebra: &Arc<DkAlgebra>, truncation: u32) -> Self {
        GroupLikeTn {
            log: algebra.zero(truncation),
            expanded: algebra.one(truncation),
        }
    }

    pub fn from_log(log: TnElement) -> Result<Self> {
        if !log.constant_term().is_zero() {
            return Err(Error::domain("group-like logarithm needs zero constant term"));
        }
        let expanded = log.exp()?;
        Ok(GroupLikeTn { log, expanded })
    }

    pub fn from_expanded(expanded: TnElement) -> Result<Self> {
        if !expanded.constant_term().is_one() {
            return Err(Error::domain("group-like element needs constant term 1"));
        }
        let log = expanded.log()?;
        Ok(GroupLikeTn { log, expanded })
    }

    pub fn log(&self) -> &TnElement {
        &self.log
    }

    pub fn expanded(&self) -> &TnElement {
        &self.expanded
    }

    pub fn truncation(&self) -> u32 {
        self.log.truncation()
    }

    pub fn strands(&self) -> u8 {
        self.log.strands()
    }

    pub fn is_one(&self) -> bool {
        self.log.is_zero()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let expanded = self.expanded.mul(&other.expanded)?;
        let log = expanded.log()?;
        Ok(GroupLikeTn { log, expanded })
    }

    pub fn inverse(&self) -> Result<Self> {
        Self::from_log(self.log.neg())
    }

    pub fn insertion(&self, blocks: &[Vec<u8>], m: u8) -> Result<Self> {
        Self::from_log(self.log.insertion(blocks, m)?)
    }

    pub fn permute(&self, sigma: &[u8]) -> Result<Self> {
        Self::from_log(self.log.permute(sigma)?)
    }
}
