//! Finitely truncated quasi-Hopf deformations of enveloping algebras.
//!
//! The carrier is `U(g)[[hbar]]` cut at a bidegree: hbar-power at most `M`
//! and PBW degree at most `D` in each tensor slot. Elements of tensor powers
//! are sparse maps from `(hbar power, one PBW monomial per slot)` to exact
//! rational coefficients. The hbar truncation is an algebra quotient, so
//! identities checked "within truncation" are honest statements about the
//! quotient; the PBW cap only discards terms and the callers that need
//! exactness keep their data inside it.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{format_scalar, parse_scalar, Scalar};

/// A finite-dimensional Lie algebra given by structure constants on an
/// ordered basis. Validated for antisymmetry and the Jacobi identity at
/// construction.
pub struct LieAlgebraSpec {
    names: Vec<String>,
    // brackets[i][j] = [x_i, x_j] as a sparse vector
    brackets: Vec<Vec<Vec<(u16, Scalar)>>>,
    straighten_memo: RwLock<HashMap<Vec<u16>, Arc<BTreeMap<Mono, Scalar>>>>,
}

impl std::fmt::Debug for LieAlgebraSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LieAlgebraSpec({:?})", self.names)
    }
}

impl PartialEq for LieAlgebraSpec {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.brackets == other.brackets
    }
}

impl LieAlgebraSpec {
    /// `rows` lists `[x_i, x_j]` for `i < j` as `(i, j, terms)`; omitted
    /// pairs commute.
    pub fn new(names: Vec<String>, rows: Vec<(u16, u16, Vec<(u16, Scalar)>)>) -> Result<Arc<Self>> {
        let dim = names.len();
        let mut brackets = vec![vec![Vec::new(); dim]; dim];
        for (i, j, terms) in rows {
            let (i, j) = (i as usize, j as usize);
            if i >= dim || j >= dim || i == j {
                return Err(Error::domain("bad bracket row indices"));
            }
            brackets[i][j] = terms.clone();
            brackets[j][i] = terms.into_iter().map(|(k, c)| (k, -c)).collect();
        }
        let spec = Arc::new(LieAlgebraSpec {
            names,
            brackets,
            straighten_memo: RwLock::new(HashMap::new()),
        });
        spec.check_jacobi()?;
        Ok(spec)
    }

    fn check_jacobi(&self) -> Result<()> {
        let dim = self.dim();
        let mut acc = vec![Scalar::zero(); dim];
        for a in 0..dim as u16 {
            for b in 0..dim as u16 {
                for c in 0..dim as u16 {
                    for v in acc.iter_mut() {
                        *v = Scalar::zero();
                    }
                    // [[a,b],c] + [[b,c],a] + [[c,a],b] = 0
                    for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                        for (k, co) in &self.brackets[x as usize][y as usize] {
                            for (m, co2) in &self.brackets[*k as usize][z as usize] {
                                acc[*m as usize] += co * co2;
                            }
                        }
                    }
                    if acc.iter().any(|v| !v.is_zero()) {
                        return Err(Error::domain(format!(
                            "structure constants violate Jacobi at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, i: u16) -> &str {
        &self.names[i as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Result<u16> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| i as u16)
            .ok_or_else(|| Error::parse(format!("unknown basis element `{name}`")))
    }

    pub fn bracket(&self, i: u16, j: u16) -> &[(u16, Scalar)] {
        &self.brackets[i as usize][j as usize]
    }

    /// PBW straightening of a generator word into ordered monomials.
    pub fn straighten(&self, word: &[u16]) -> Arc<BTreeMap<Mono, Scalar>> {
        if let Some(hit) = self.straighten_memo.read().unwrap().get(word) {
            return hit.clone();
        }
        let descent = word.windows(2).position(|w| w[0] > w[1]);
        let result: BTreeMap<Mono, Scalar> = match descent {
            None => {
                let mut m = BTreeMap::new();
                m.insert(Mono::from_word(self.dim(), word), Scalar::one());
                m
            }
            Some(i) => {
                let mut acc: BTreeMap<Mono, Scalar> = BTreeMap::new();
                let mut swapped = word.to_vec();
                swapped.swap(i, i + 1);
                for (mono, c) in self.straighten(&swapped).iter() {
                    add_mono(&mut acc, mono.clone(), c.clone());
                }
                for (k, co) in self.bracket(word[i], word[i + 1]) {
                    let mut corr = word.to_vec();
                    corr.splice(i..i + 2, [*k]);
                    for (mono, c) in self.straighten(&corr).iter() {
                        add_mono(&mut acc, mono.clone(), c * co);
                    }
                }
                acc
            }
        };
        let arc = Arc::new(result);
        self.straighten_memo
            .write()
            .unwrap()
            .entry(word.to_vec())
            .or_insert_with(|| arc.clone())
            .clone()
    }

    pub fn abelian(names: &[&str]) -> Arc<Self> {
        LieAlgebraSpec::new(names.iter().map(|s| s.to_string()).collect(), vec![]).unwrap()
    }

    /// Heisenberg: [x, y] = z, z central.
    pub fn heisenberg() -> Arc<Self> {
        LieAlgebraSpec::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![(0, 1, vec![(2, Scalar::one())])],
        )
        .unwrap()
    }

    /// sl2 with basis (e, f, h): `[e,f] = h`, `[h,e] = 2e`, `[h,f] = -2f`.
    pub fn sl2() -> Arc<Self> {
        LieAlgebraSpec::new(
            vec!["e".into(), "f".into(), "h".into()],
            vec![
                (0, 1, vec![(2, Scalar::one())]),
                (2, 0, vec![(0, crate::scalar::int(2))]),
                (2, 1, vec![(1, crate::scalar::int(-2))]),
            ],
        )
        .unwrap()
    }

    pub fn to_json(&self) -> Value {
        let mut rows = Vec::new();
        for i in 0..self.dim() {
            for j in i + 1..self.dim() {
                let terms = &self.brackets[i][j];
                if !terms.is_empty() {
                    rows.push(json!({
                        "x": self.names[i],
                        "y": self.names[j],
                        "terms": terms
                            .iter()
                            .map(|(k, c)| json!([self.names[*k as usize], format_scalar(c)]))
                            .collect::<Vec<_>>(),
                    }));
                }
            }
        }
        json!({ "basis": self.names, "brackets": rows })
    }

    pub fn from_json(value: &Value) -> Result<Arc<Self>> {
        let names: Vec<String> = value
            .get("basis")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse("Lie algebra JSON missing `basis`"))?
            .iter()
            .map(|v| {
                v.as_str()
                    .map(String::from)
                    .ok_or_else(|| Error::parse("basis entry not a string"))
            })
            .collect::<Result<_>>()?;
        let lookup = |name: &str| -> Result<u16> {
            names
                .iter()
                .position(|n| n == name)
                .map(|i| i as u16)
                .ok_or_else(|| Error::parse(format!("unknown basis element `{name}`")))
        };
        let mut rows = Vec::new();
        for row in value
            .get("brackets")
            .and_then(Value::as_array)
            .unwrap_or(&Vec::new())
        {
            let x = lookup(
                row.get("x")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::parse("bracket row missing `x`"))?,
            )?;
            let y = lookup(
                row.get("y")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::parse("bracket row missing `y`"))?,
            )?;
            let mut terms = Vec::new();
            for t in row
                .get("terms")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::parse("bracket row missing `terms`"))?
            {
                let pair = t
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| Error::parse("bracket term must be [name, coeff]"))?;
                let k = lookup(
                    pair[0]
                        .as_str()
                        .ok_or_else(|| Error::parse("bracket term name"))?,
                )?;
                let c = parse_scalar(
                    pair[1]
                        .as_str()
                        .ok_or_else(|| Error::parse("bracket term coeff"))?,
                )?;
                terms.push((k, c));
            }
            rows.push((x, y, terms));
        }
        LieAlgebraSpec::new(names, rows)
    }
}

fn add_mono(m: &mut BTreeMap<Mono, Scalar>, k: Mono, c: Scalar) {
    if c.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match m.entry(k) {
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

/// PBW monomial as an exponent vector over the ordered basis of `g`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono(pub Vec<u16>);

impl Mono {
    pub fn unit(dim: usize) -> Self {
        Mono(vec![0; dim])
    }

    pub fn generator(dim: usize, i: u16) -> Self {
        let mut m = vec![0; dim];
        m[i as usize] = 1;
        Mono(m)
    }

    pub fn from_word(dim: usize, word: &[u16]) -> Self {
        let mut m = vec![0; dim];
        for &l in word {
            m[l as usize] += 1;
        }
        Mono(m)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn letters(&self) -> Vec<u16> {
        let mut out = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            for _ in 0..e {
                out.push(i as u16);
            }
        }
        out
    }

    pub fn render(&self, g: &LieAlgebraSpec) -> String {
        if self.is_unit() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            if e == 1 {
                parts.push(g.name(i as u16).to_string());
            } else if e > 1 {
                parts.push(format!("{}^{}", g.name(i as u16), e));
            }
        }
        parts.join(".")
    }
}

/// Key of one tensor term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TensorKey {
    pub hbar: u32,
    pub slots: Vec<Mono>,
}

/// Sparse element of `U^{(x) k}` at the instance bidegree truncation.
/// `k = 0` elements are scalars in `K[[hbar]]/hbar^{M+1}`.
#[derive(Clone)]
pub struct Tensor {
    g: Arc<LieAlgebraSpec>,
    k: u8,
    hbar_cap: u32,
    deg_cap: u32,
    terms: BTreeMap<TensorKey, Scalar>,
}

impl std::fmt::Debug for Tensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Tensor(k={}, {} terms)", self.k, self.terms.len())
    }
}

impl PartialEq for Tensor {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.terms == other.terms
    }
}
impl Eq for Tensor {}

impl Tensor {
    pub fn zero(g: Arc<LieAlgebraSpec>, hbar_cap: u32, deg_cap: u32, k: u8) -> Self {
        Tensor {
            g,
            k,
            hbar_cap,
            deg_cap,
            terms: BTreeMap::new(),
        }
    }

    pub fn unit(g: Arc<LieAlgebraSpec>, hbar_cap: u32, deg_cap: u32, k: u8) -> Self {
        let mut t = Self::zero(g.clone(), hbar_cap, deg_cap, k);
        let key = TensorKey {
            hbar: 0,
            slots: vec![Mono::unit(g.dim()); k as usize],
        };
        t.terms.insert(key, Scalar::one());
        t
    }

    pub fn generator(
        g: Arc<LieAlgebraSpec>,
        hbar_cap: u32,
        deg_cap: u32,
        i: u16,
    ) -> Result<Self> {
        if i as usize >= g.dim() {
            return Err(Error::domain("generator index out of range"));
        }
        let mut t = Self::zero(g.clone(), hbar_cap, deg_cap, 1);
        t.add_term(
            TensorKey {
                hbar: 0,
                slots: vec![Mono::generator(g.dim(), i)],
            },
            Scalar::one(),
        );
        Ok(t)
    }

    pub fn g(&self) -> &Arc<LieAlgebraSpec> {
        &self.g
    }

    pub fn arity(&self) -> u8 {
        self.k
    }

    pub fn hbar_cap(&self) -> u32 {
        self.hbar_cap
    }

    pub fn deg_cap(&self) -> u32 {
        self.deg_cap
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TensorKey, &Scalar)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, key: TensorKey, c: Scalar) {
        debug_assert_eq!(key.slots.len(), self.k as usize);
        if c.is_zero()
            || key.hbar > self.hbar_cap
            || key.slots.iter().any(|m| m.degree() > self.deg_cap)
        {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
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

    fn check(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.g, &other.g) && *self.g != *other.g {
            return Err(Error::structural("tensors over different Lie algebras"));
        }
        if self.k != other.k {
            return Err(Error::structural("tensors of different arity"));
        }
        if self.hbar_cap != other.hbar_cap || self.deg_cap != other.deg_cap {
            return Err(Error::structural("tensors at different truncations"));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.g.clone(), self.hbar_cap, self.deg_cap, self.k);
        for (k, c) in &self.terms {
            out.terms.insert(k.clone(), -c.clone());
        }
        out
    }

    pub fn scalar_mul(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.g.clone(), self.hbar_cap, self.deg_cap, self.k);
        }
        let mut out = Self::zero(self.g.clone(), self.hbar_cap, self.deg_cap, self.k);
        for (k, a) in &self.terms {
            out.terms.insert(k.clone(), a * c);
        }
        out
    }

    /// Multiplies by `hbar^p`.
    pub fn hbar_mul(&self, p: u32) -> Self {
        let mut out = Self::zero(self.g.clone(), self.hbar_cap, self.deg_cap, self.k);
        for (k, c) in &self.terms {
            let mut key = k.clone();
            key.hbar += p;
            out.add_term(key, c.clone());
        }
        out
    }

    /// Divides by `hbar^p`; errors if any term has a smaller power.
    pub fn hbar_div(&self, p: u32) -> Result<Self> {
        let mut out = Self::zero(self.g.clone(), self.hbar_cap, self.deg_cap, self.k);
        for (k, c) in &self.terms {
            if k.hbar < p {
                return Err(Error::domain(format!(
                    "term with hbar^{} not divisible by hbar^{p}",
                    k.hbar
                )));
            }
            let mut key = k.clone();
            key.hbar -= p;
            out.terms.insert(key, c.clone());
        }
        Ok(out)
    }

    /// Smallest hbar power present (`None` for the zero tensor).
    pub fn hbar_valuation(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.hbar).min()
    }

    /// Slotwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.g.clone(), self.hbar_cap, self.deg_cap, self.k);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let hbar = ka.hbar + kb.hbar;
                if hbar > self.hbar_cap {
                    continue;
                }
                // slotwise PBW products, expanded one slot at a time
                let mut partial: Vec<(Vec<Mono>, Scalar)> = vec![(Vec::new(), ca * cb)];
                for s in 0..self.k as usize {
                    let mut word = ka.slots[s].letters();
                    word.extend(kb.slots[s].letters());
                    let product = self.g.straighten(&word);
                    let mut next = Vec::with_capacity(partial.len() * product.len());
                    for (slots, coeff) in &partial {
                        for (mono, c) in product.iter() {
                            if mono.degree() > self.deg_cap {
                                continue;
                            }
                            let mut ns = slots.clone();
                            ns.push(mono.clone());
                            next.push((ns, coeff * c));
                        }
                    }
                    partial = next;
                }
                for (slots, coeff) in partial {
                    out.add_term(TensorKey { hbar, slots }, coeff);
                }
            }
        }
        Ok(out)
    }

    /// Side-by-side tensor product: slots of `other` appended after the
    /// slots of `self`, hbar powers adding.
    pub fn outer(&self, other: &Self) -> Result<Self> {
        if !Arc::ptr_eq(&self.g, &other.g) && *self.g != *other.g {
            return Err(Error::structural("tensors over different Lie algebras"));
        }
        if self.hbar_cap != other.hbar_cap || self.deg_cap != other.deg_cap {
            return Err(Error::structural("tensors at different truncations"));
        }
        let mut out = Self::zero(self.g.clone(), self.hbar_cap, self.deg_cap, self.k + other.k);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let hbar = ka.hbar + kb.hbar;
                if hbar > self.hbar_cap {
                    continue;
                }
                let mut slots = ka.slots.clone();
                slots.extend(kb.slots.iter().cloned());
                out.add_term(TensorKey { hbar, slots }, ca * cb);
            }
        }
        Ok(out)
    }

    /// Counit in one slot: drops the slot, killing terms with a non-unit
    /// monomial there.
    pub fn counit_slot(&self, slot: usize) -> Result<Self> {
        if slot >= self.k as usize {
            return Err(Error::domain("counit slot out of range"));
        }
        let mut out = Self::zero(self.g.clone(), self.hbar_cap, self.deg_cap, self.k - 1);
        for (key, c) in &self.terms {
            if key.slots[slot].is_unit() {
                let mut slots = key.slots.clone();
                slots.remove(slot);
                out.add_term(
                    TensorKey {
                        hbar: key.hbar,
                        slots,
                    },
                    c.clone(),
                );
            }
        }
        Ok(out)
    }

    /// Places the slots of `self` at the given (strictly increasing)
    /// positions of a width-`n` tensor, units elsewhere.
    pub fn place(&self, positions: &[usize], n: u8) -> Result<Self> {
        if positions.len() != self.k as usize {
            return Err(Error::domain("wrong number of placement positions"));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("placement positions must increase"));
        }
        if positions.iter().any(|&p| p == 0 || p > n as usize) {
            return Err(Error::domain("placement position out of range"));
        }
        let mut out = Self::zero(self.g.clone(), self.hbar_cap, self.deg_cap, n);
        for (key, c) in &self.terms {
            let mut slots = vec![Mono::unit(self.g.dim()); n as usize];
            for (s, &p) in positions.iter().enumerate() {
                slots[p - 1] = key.slots[s].clone();
            }
            out.add_term(
                TensorKey {
                    hbar: key.hbar,
                    slots,
                },
                c.clone(),
            );
        }
        Ok(out)
    }

    /// Permutes the slots: new slot `i` takes old slot `sigma[i] - 1`.
    pub fn permute_slots(&self, sigma: &[usize]) -> Result<Self> {
        if sigma.len() != self.k as usize {
            return Err(Error::domain("permutation arity mismatch"));
        }
        let mut out = Self::zero(self.g.clone(), self.hbar_cap, self.deg_cap, self.k);
        for (key, c) in &self.terms {
            let slots: Vec<Mono> = sigma.iter().map(|&i| key.slots[i - 1].clone()).collect();
            out.add_term(
                TensorKey {
                    hbar: key.hbar,
                    slots,
                },
                c.clone(),
            );
        }
        Ok(out)
    }

    /// Inverse of a tensor with invertible constant part `1 + nilpotent`.
    pub fn inverse(&self) -> Result<Self> {
        let one = Self::unit(self.g.clone(), self.hbar_cap, self.deg_cap, self.k);
        let v = one.sub(self)?;
        let mut out = one.clone();
        let mut power = one.clone();
        // v must be nilpotent within truncation; bound the iteration hard
        let bound = (self.hbar_cap + self.deg_cap * self.k as u32 + 2) as usize;
        for _ in 0..bound {
            power = power.mul(&v)?;
            if power.is_zero() {
                return Ok(out);
            }
            out = out.add(&power)?;
        }
        Err(Error::domain(
            "tensor is not invertible within truncation (constant part not 1?)",
        ))
    }

    pub fn exp(&self) -> Result<Self> {
        let unit_key = TensorKey {
            hbar: 0,
            slots: vec![Mono::unit(self.g.dim()); self.k as usize],
        };
        if self.terms.contains_key(&unit_key) {
            return Err(Error::domain("exp needs a zero constant term"));
        }
        let mut out = Self::unit(self.g.clone(), self.hbar_cap, self.deg_cap, self.k);
        let mut power = out.clone();
        let bound = self.hbar_cap + self.deg_cap * self.k as u32 + 2;
        for k in 1..=bound {
            power = power.mul(self)?;
            if power.is_zero() {
                return Ok(out);
            }
            out = out.add(&power.scalar_mul(&crate::scalar::inv_factorial(k)))?;
        }
        Err(Error::domain("exp argument not nilpotent within truncation"))
    }

    pub fn log(&self) -> Result<Self> {
        let one = Self::unit(self.g.clone(), self.hbar_cap, self.deg_cap, self.k);
        let unit_key = TensorKey {
            hbar: 0,
            slots: vec![Mono::unit(self.g.dim()); self.k as usize],
        };
        if self.terms.get(&unit_key) != Some(&Scalar::one()) {
            return Err(Error::domain("log needs constant term 1"));
        }
        let v = self.sub(&one)?;
        let mut out = Self::zero(self.g.clone(), self.hbar_cap, self.deg_cap, self.k);
        let mut power = one;
        let bound = self.hbar_cap + self.deg_cap * self.k as u32 + 2;
        for k in 1..=bound {
            power = power.mul(&v)?;
            if power.is_zero() {
                return Ok(out);
            }
            out = out.add(&power.scalar_mul(&crate::scalar::frac(
                if k % 2 == 1 { 1 } else { -1 },
                k as i64,
            )))?;
        }
        Err(Error::domain("log argument not unipotent within truncation"))
    }

    /// Conjugation `phi . self . phi^{-1}`.
    pub fn ad(&self, phi: &Self) -> Result<Self> {
        phi.mul(self)?.mul(&phi.inverse()?)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(key, c)| {
                let slots: Vec<Value> = key
                    .slots
                    .iter()
                    .map(|m| {
                        Value::Array(
                            m.0.iter()
                                .enumerate()
                                .filter(|(_, &e)| e > 0)
                                .map(|(i, &e)| json!([self.g.name(i as u16), e]))
                                .collect(),
                        )
                    })
                    .collect();
                json!({ "hbar": key.hbar, "slots": slots, "coeff": format_scalar(c) })
            })
            .collect();
        json!({
            "arity": self.k,
            "hbar_cap": self.hbar_cap,
            "deg_cap": self.deg_cap,
            "terms": terms,
        })
    }

    pub fn from_json(g: Arc<LieAlgebraSpec>, value: &Value) -> Result<Self> {
        let k = value
            .get("arity")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse("tensor JSON missing `arity`"))? as u8;
        let hbar_cap = value
            .get("hbar_cap")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse("tensor JSON missing `hbar_cap`"))? as u32;
        let deg_cap = value
            .get("deg_cap")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse("tensor JSON missing `deg_cap`"))? as u32;
        let mut t = Self::zero(g.clone(), hbar_cap, deg_cap, k);
        for term in value
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse("tensor JSON missing `terms`"))?
        {
            let hbar = term
                .get("hbar")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::parse("tensor term missing `hbar`"))? as u32;
            let coeff = parse_scalar(
                term.get("coeff")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::parse("tensor term missing `coeff`"))?,
            )?;
            let slots_json = term
                .get("slots")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::parse("tensor term missing `slots`"))?;
            if slots_json.len() != k as usize {
                return Err(Error::parse("tensor term has wrong slot count"));
            }
            let mut slots = Vec::with_capacity(k as usize);
            for slot in slots_json {
                let mut mono = Mono::unit(g.dim());
                for entry in slot
                    .as_array()
                    .ok_or_else(|| Error::parse("tensor slot must be an array"))?
                {
                    let pair = entry
                        .as_array()
                        .filter(|a| a.len() == 2)
                        .ok_or_else(|| Error::parse("slot entry must be [name, exp]"))?;
                    let idx = g.index(
                        pair[0]
                            .as_str()
                            .ok_or_else(|| Error::parse("slot entry name"))?,
                    )?;
                    let exp = pair[1]
                        .as_u64()
                        .ok_or_else(|| Error::parse("slot entry exponent"))?;
                    mono.0[idx as usize] += exp as u16;
                }
                slots.push(mono);
            }
            t.add_term(TensorKey { hbar, slots }, coeff);
        }
        Ok(t)
    }
}

/// A truncated quasi-Hopf instance: the algebra plus its coproduct data and
/// associator element. Instances are immutable; twisting produces a new one.
pub struct QhqueInstance {
    g: Arc<LieAlgebraSpec>,
    hbar_cap: u32,
    deg_cap: u32,
    gen_coproducts: Vec<Tensor>,
    phi: Tensor,
    delta_memo: RwLock<HashMap<Mono, Arc<Tensor>>>,
}

impl std::fmt::Debug for QhqueInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "QhqueInstance(dim {}, caps ({}, {}))",
            self.g.dim(),
            self.hbar_cap,
            self.deg_cap
        )
    }
}

impl QhqueInstance {
    /// Undeformed instance: standard coproduct, trivial associator.
    pub fn hopf(g: Arc<LieAlgebraSpec>, hbar_cap: u32, deg_cap: u32) -> Result<Arc<Self>> {
        let gen_coproducts = (0..g.dim() as u16)
            .map(|i| primitive_coproduct(&g, hbar_cap, deg_cap, i))
            .collect::<Result<Vec<_>>>()?;
        let phi = Tensor::unit(g.clone(), hbar_cap, deg_cap, 3);
        Self::new(g, hbar_cap, deg_cap, gen_coproducts, phi)
    }

    pub fn new(
        g: Arc<LieAlgebraSpec>,
        hbar_cap: u32,
        deg_cap: u32,
        gen_coproducts: Vec<Tensor>,
        phi: Tensor,
    ) -> Result<Arc<Self>> {
        if gen_coproducts.len() != g.dim() {
            return Err(Error::structural("one coproduct image per generator"));
        }
        if phi.arity() != 3 {
            return Err(Error::structural("associator element must have arity 3"));
        }
        let instance = Arc::new(QhqueInstance {
            g,
            hbar_cap,
            deg_cap,
            gen_coproducts,
            phi,
            delta_memo: RwLock::new(HashMap::new()),
        });
        instance.validate()?;
        Ok(instance)
    }

    fn validate(&self) -> Result<()> {
        let dim = self.g.dim() as u16;
        for i in 0..dim {
            let dx = &self.gen_coproducts[i as usize];
            // counit axioms on generators
            let x = Tensor::generator(self.g.clone(), self.hbar_cap, self.deg_cap, i)?;
            if dx.counit_slot(0)? != x || dx.counit_slot(1)? != x {
                return Err(Error::domain("counit axiom fails on a generator"));
            }
            // mod hbar the coproduct is the standard one
            let primitive = primitive_coproduct(&self.g, self.hbar_cap, self.deg_cap, i)?;
            let diff = dx.sub(&primitive)?;
            if let Some(v) = diff.hbar_valuation() {
                if v == 0 {
                    return Err(Error::domain(
                        "coproduct does not reduce to the standard one mod hbar",
                    ));
                }
            }
        }
        // Delta extends to an algebra morphism iff it respects the brackets
        for i in 0..dim {
            for j in 0..dim {
                let di = &self.gen_coproducts[i as usize];
                let dj = &self.gen_coproducts[j as usize];
                let lhs = di.mul(dj)?.sub(&dj.mul(di)?)?;
                let mut rhs = Tensor::zero(self.g.clone(), self.hbar_cap, self.deg_cap, 2);
                for (k, c) in self.g.bracket(i, j) {
                    rhs = rhs.add(&self.gen_coproducts[*k as usize].scalar_mul(c))?;
                }
                if lhs != rhs {
                    return Err(Error::domain(
                        "coproduct is not an algebra morphism on the brackets",
                    ));
                }
            }
        }
        // associator is counit-normalized with constant term 1
        let unit_key = TensorKey {
            hbar: 0,
            slots: vec![Mono::unit(self.g.dim()); 3],
        };
        if self.phi.terms.get(&unit_key) != Some(&Scalar::one()) {
            return Err(Error::domain("associator must have constant term 1"));
        }
        for slot in 0..3 {
            let reduced = self.phi.counit_slot(slot)?;
            if reduced != Tensor::unit(self.g.clone(), self.hbar_cap, self.deg_cap, 2) {
                return Err(Error::domain("associator is not counit-normalized"));
            }
        }
        Ok(())
    }

    pub fn g(&self) -> &Arc<LieAlgebraSpec> {
        &self.g
    }

    pub fn hbar_cap(&self) -> u32 {
        self.hbar_cap
    }

    pub fn deg_cap(&self) -> u32 {
        self.deg_cap
    }

    pub fn phi(&self) -> &Tensor {
        &self.phi
    }

    pub fn zero(&self, k: u8) -> Tensor {
        Tensor::zero(self.g.clone(), self.hbar_cap, self.deg_cap, k)
    }

    pub fn unit(&self, k: u8) -> Tensor {
        Tensor::unit(self.g.clone(), self.hbar_cap, self.deg_cap, k)
    }

    pub fn generator(&self, i: u16) -> Result<Tensor> {
        Tensor::generator(self.g.clone(), self.hbar_cap, self.deg_cap, i)
    }

    /// Coproduct of a PBW monomial (memoized; multiplicative in the word).
    fn delta_mono(&self, mono: &Mono) -> Arc<Tensor> {
        if let Some(hit) = self.delta_memo.read().unwrap().get(mono) {
            return hit.clone();
        }
        let result = if mono.is_unit() {
            Tensor::unit(self.g.clone(), self.hbar_cap, self.deg_cap, 2)
        } else {
            let mut acc = Tensor::unit(self.g.clone(), self.hbar_cap, self.deg_cap, 2);
            for letter in mono.letters() {
                acc = acc
                    .mul(&self.gen_coproducts[letter as usize])
                    .expect("compatible");
            }
            acc
        };
        let arc = Arc::new(result);
        self.delta_memo
            .write()
            .unwrap()
            .entry(mono.clone())
            .or_insert_with(|| arc.clone())
            .clone()
    }

    /// Applies the coproduct in one slot, widening the tensor by one.
    pub fn delta_slot(&self, t: &Tensor, slot: usize) -> Result<Tensor> {
        if slot >= t.k as usize {
            return Err(Error::domain("coproduct slot out of range"));
        }
        let mut out = Tensor::zero(self.g.clone(), self.hbar_cap, self.deg_cap, t.k + 1);
        for (key, c) in &t.terms {
            let dm = self.delta_mono(&key.slots[slot]);
            for (dk, dc) in &dm.terms {
                let hbar = key.hbar + dk.hbar;
                if hbar > self.hbar_cap {
                    continue;
                }
                let mut slots = Vec::with_capacity(t.k as usize + 1);
                slots.extend_from_slice(&key.slots[..slot]);
                slots.push(dk.slots[0].clone());
                slots.push(dk.slots[1].clone());
                slots.extend_from_slice(&key.slots[slot + 1..]);
                out.add_term(TensorKey { hbar, slots }, c * dc);
            }
        }
        Ok(out)
    }

    /// Iterated-coproduct insertion: slot `j` of `t` expands into the
    /// consecutive positions `targets[j]` (left-iterated coproduct inside
    /// the block); uncovered positions receive units.
    pub fn expand(&self, t: &Tensor, targets: &[Vec<u8>], n: u8) -> Result<Tensor> {
        if targets.len() != t.k as usize {
            return Err(Error::domain("one target block per tensor slot"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for block in targets {
            if block.is_empty() {
                return Err(Error::domain("empty insertion block"));
            }
            if block.windows(2).any(|w| w[1] != w[0] + 1) {
                return Err(Error::unsupported(
                    "non-contiguous insertion blocks are not supported on this carrier",
                ));
            }
            for &p in block {
                if p == 0 || p > n || !seen.insert(p) {
                    return Err(Error::domain("insertion blocks must be disjoint and in range"));
                }
            }
        }
        // widen each slot by iterated coproducts, then place
        let mut wide = t.clone();
        let mut slot_cursor = 0usize;
        let mut positions = Vec::new();
        for block in targets {
            for _ in 1..block.len() {
                wide = self.delta_slot(&wide, slot_cursor)?;
            }
            slot_cursor += block.len();
            positions.extend(block.iter().map(|&p| p as usize));
        }
        // positions must be strictly increasing overall for `place`; the
        // slots were widened in block order, so sort both consistently
        let mut order: Vec<usize> = (0..positions.len()).collect();
        order.sort_by_key(|&i| positions[i]);
        let sigma: Vec<usize> = order.iter().map(|&i| i + 1).collect();
        let rearranged = wide.permute_slots(&sigma)?;
        let mut sorted_positions = positions.clone();
        sorted_positions.sort_unstable();
        rearranged.place(&sorted_positions, n)
    }

    /// Counit as a `k = 0` tensor (an hbar-series scalar).
    pub fn counit(&self, t: &Tensor) -> Result<Tensor> {
        if t.k != 1 {
            return Err(Error::domain("counit expects a single-slot tensor"));
        }
        t.counit_slot(0)
    }

    /// Pentagon residual `LHS - RHS` of the quasi-Hopf pentagon for `phi`
    /// with this instance's coproduct.
    pub fn pentagon_residual(&self) -> Result<Tensor> {
        let phi = &self.phi;
        let lhs = self
            .expand(phi, &[vec![1], vec![2], vec![3, 4]], 4)?
            .mul(&self.expand(phi, &[vec![1, 2], vec![3], vec![4]], 4)?)?;
        let rhs = self
            .expand(phi, &[vec![2], vec![3], vec![4]], 4)?
            .mul(&self.expand(phi, &[vec![1], vec![2, 3], vec![4]], 4)?)?
            .mul(&self.expand(phi, &[vec![1], vec![2], vec![3]], 4)?)?;
        lhs.sub(&rhs)
    }

    /// Twisted instance `(Ad(F) o Delta, F-twisted phi)`; `F` must be
    /// counit-normalized with constant term 1.
    pub fn twist(&self, f: &Tensor) -> Result<Arc<Self>> {
        if f.arity() != 2 {
            return Err(Error::structural("twist must have arity 2"));
        }
        for slot in 0..2 {
            if f.counit_slot(slot)? != Tensor::unit(self.g.clone(), self.hbar_cap, self.deg_cap, 1)
            {
                return Err(Error::domain("twist is not counit-normalized"));
            }
        }
        let f_inv = f.inverse()?;
        let gen_coproducts = self
            .gen_coproducts
            .iter()
            .map(|dx| f.mul(dx)?.mul(&f_inv))
            .collect::<Result<Vec<_>>>()?;
        // ^F phi = (1 (x) F) (id (x) Delta)(F) phi (Delta (x) id)(F)^{-1} (F (x) 1)^{-1}
        let f23 = self.expand(f, &[vec![2], vec![3]], 3)?;
        let f123 = self.expand(f, &[vec![1], vec![2, 3]], 3)?;
        let f12_3 = self.expand(f, &[vec![1, 2], vec![3]], 3)?;
        let f12 = self.expand(f, &[vec![1], vec![2]], 3)?;
        let phi = f23
            .mul(&f123)?
            .mul(&self.phi)?
            .mul(&f12_3.inverse()?)?
            .mul(&f12.inverse()?)?;
        QhqueInstance::new(
            self.g.clone(),
            self.hbar_cap,
            self.deg_cap,
            gen_coproducts,
            phi,
        )
    }
}

fn primitive_coproduct(
    g: &Arc<LieAlgebraSpec>,
    hbar_cap: u32,
    deg_cap: u32,
    i: u16,
) -> Result<Tensor> {
    let x = Tensor::generator(g.clone(), hbar_cap, deg_cap, i)?;
    let left = x.place(&[1], 2)?;
    let right = x.place(&[2], 2)?;
    left.add(&right)
}

/// Random single-slot element with bounded monomial degree and hbar power;
/// used by randomized scans and tests.
pub fn random_u_element(
    rng: &mut crate::sample::SeededRng,
    g: &Arc<LieAlgebraSpec>,
    hbar_cap: u32,
    deg_cap: u32,
    terms: usize,
    max_deg: u32,
    max_hbar: u32,
) -> Tensor {
    let mut t = Tensor::zero(g.clone(), hbar_cap, deg_cap, 1);
    for _ in 0..terms {
        let deg = rng.range_i64(0, max_deg as i64) as u32;
        let mut mono = Mono::unit(g.dim());
        for _ in 0..deg {
            mono.0[rng.below(g.dim() as u64) as usize] += 1;
        }
        let hbar = rng.range_i64(0, max_hbar as i64) as u32;
        t.add_term(
            TensorKey {
                hbar,
                slots: vec![mono],
            },
            rng.scalar(),
        );
    }
    t
}
