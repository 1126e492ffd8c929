//! Truncated symmetric algebras of a Lie algebra with the Kostant-Kirillov
//! bracket, and the star-product calculus on their tensor powers.
//!
//! `SymTensor` holds an element of `(S(g))^{(x) k}` cut at a total
//! polynomial degree. The bracket extends the structure constants by the
//! Leibniz rule slotwise; the coproduct is the symmetric-coalgebra one
//! (generators primitive), so insertion maps are plain binomial expansions
//! and no tree bookkeeping is needed on this carrier.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::cbh;
use crate::error::{Error, Result};
use crate::linalg;
use crate::qhque::{LieAlgebraSpec, Mono};
use crate::scalar::{format_scalar, parse_scalar, Scalar};

#[derive(Clone)]
pub struct SymTensor {
    g: Arc<LieAlgebraSpec>,
    k: u8,
    degree_cap: u32,
    terms: BTreeMap<Vec<Mono>, Scalar>,
}

impl std::fmt::Debug for SymTensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SymTensor(k={}, {} terms)", self.k, self.terms.len())
    }
}

impl PartialEq for SymTensor {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.terms == other.terms
    }
}
impl Eq for SymTensor {}

fn total_degree(slots: &[Mono]) -> u32 {
    slots.iter().map(Mono::degree).sum()
}

impl SymTensor {
    pub fn zero(g: Arc<LieAlgebraSpec>, degree_cap: u32, k: u8) -> Self {
        SymTensor {
            g,
            k,
            degree_cap,
            terms: BTreeMap::new(),
        }
    }

    pub fn unit(g: Arc<LieAlgebraSpec>, degree_cap: u32, k: u8) -> Self {
        let mut t = Self::zero(g.clone(), degree_cap, k);
        t.terms
            .insert(vec![Mono::unit(g.dim()); k as usize], Scalar::one());
        t
    }

    /// `x_i` placed in one slot of a width-`k` tensor.
    pub fn generator_at(
        g: Arc<LieAlgebraSpec>,
        degree_cap: u32,
        k: u8,
        i: u16,
        slot: usize,
    ) -> Result<Self> {
        if i as usize >= g.dim() || slot >= k as usize {
            return Err(Error::domain("generator or slot out of range"));
        }
        let mut slots = vec![Mono::unit(g.dim()); k as usize];
        slots[slot] = Mono::generator(g.dim(), i);
        let mut t = Self::zero(g.clone(), degree_cap, k);
        t.add_term(slots, Scalar::one());
        Ok(t)
    }

    pub fn g(&self) -> &Arc<LieAlgebraSpec> {
        &self.g
    }

    pub fn arity(&self) -> u8 {
        self.k
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Mono>, &Scalar)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, slots: Vec<Mono>, c: Scalar) {
        debug_assert_eq!(slots.len(), self.k as usize);
        if c.is_zero() || total_degree(&slots) > self.degree_cap {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(slots) {
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
        if self.k != other.k || self.degree_cap != other.degree_cap {
            return Err(Error::structural("tensor arity or truncation mismatch"));
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
        let mut out = Self::zero(self.g.clone(), self.degree_cap, self.k);
        for (k, c) in &self.terms {
            out.terms.insert(k.clone(), -c.clone());
        }
        out
    }

    pub fn scalar_mul(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.g.clone(), self.degree_cap, self.k);
        }
        let mut out = Self::zero(self.g.clone(), self.degree_cap, self.k);
        for (k, a) in &self.terms {
            out.terms.insert(k.clone(), a * c);
        }
        out
    }

    /// Commutative slotwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.g.clone(), self.degree_cap, self.k);
        for (ka, ca) in &self.terms {
            let da = total_degree(ka);
            for (kb, cb) in &other.terms {
                if da + total_degree(kb) > self.degree_cap {
                    continue;
                }
                let slots: Vec<Mono> = ka
                    .iter()
                    .zip(kb)
                    .map(|(a, b)| {
                        let mut m = a.clone();
                        for (e, eb) in m.0.iter_mut().zip(&b.0) {
                            *e += eb;
                        }
                        m
                    })
                    .collect();
                out.add_term(slots, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|s| total_degree(s)).min()
    }

    pub fn degree_component(&self, d: u32) -> Self {
        let mut out = Self::zero(self.g.clone(), self.degree_cap, self.k);
        for (k, c) in &self.terms {
            if total_degree(k) == d {
                out.terms.insert(k.clone(), c.clone());
            }
        }
        out
    }

    /// Component with the given per-slot degrees.
    pub fn multidegree_component(&self, degrees: &[u32]) -> Self {
        let mut out = Self::zero(self.g.clone(), self.degree_cap, self.k);
        for (k, c) in &self.terms {
            if k.iter()
                .zip(degrees)
                .all(|(m, &d)| m.degree() == d)
            {
                out.terms.insert(k.clone(), c.clone());
            }
        }
        out
    }

    /// Kostant-Kirillov bracket, extended slotwise by Leibniz.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.g.clone(), self.degree_cap, self.k);
        for (ka, ca) in &self.terms {
            let da = total_degree(ka);
            for (kb, cb) in &other.terms {
                // the bracket drops total degree by exactly one
                if da + total_degree(kb) > self.degree_cap + 1 {
                    continue;
                }
                for s in 0..self.k as usize {
                    // bracket in slot s, product elsewhere
                    let ma = &ka[s];
                    let mb = &kb[s];
                    for (i, &ea) in ma.0.iter().enumerate() {
                        if ea == 0 {
                            continue;
                        }
                        for (j, &eb) in mb.0.iter().enumerate() {
                            if eb == 0 {
                                continue;
                            }
                            let pairs = self.g.bracket(i as u16, j as u16);
                            if pairs.is_empty() {
                                continue;
                            }
                            let factor =
                                crate::scalar::int(ea as i64) * crate::scalar::int(eb as i64);
                            for (target, coeff) in pairs {
                                let mut slots = Vec::with_capacity(self.k as usize);
                                for (t, (xa, xb)) in ka.iter().zip(kb).enumerate() {
                                    if t == s {
                                        let mut m = xa.clone();
                                        m.0[i] -= 1;
                                        for (e, eb2) in m.0.iter_mut().zip(&xb.0) {
                                            *e += eb2;
                                        }
                                        m.0[j] -= 1;
                                        m.0[*target as usize] += 1;
                                        slots.push(m);
                                    } else {
                                        let mut m = xa.clone();
                                        for (e, eb2) in m.0.iter_mut().zip(&xb.0) {
                                            *e += eb2;
                                        }
                                        slots.push(m);
                                    }
                                }
                                out.add_term(slots, ca * cb * &factor * coeff);
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `sum_m (1/m!) ad_f^m (self)`: conjugation by `exp(f)` in the star
    /// group, computed directly through the adjoint series.
    pub fn ad_star(&self, f: &Self) -> Result<Self> {
        let mut out = self.clone();
        let mut term = self.clone();
        let bound = self.degree_cap + 2;
        for m in 1..=bound {
            term = f.bracket(&term)?;
            if term.is_zero() {
                return Ok(out);
            }
            out = out.add(&term.scalar_mul(&crate::scalar::frac(1, m as i64)))?;
        }
        Err(Error::domain(
            "adjoint series did not terminate within the degree cap",
        ))
    }

    /// Symmetric-coalgebra coproduct on one slot (binomial expansion).
    pub fn delta0_slot(&self, slot: usize) -> Result<Self> {
        if slot >= self.k as usize {
            return Err(Error::domain("coproduct slot out of range"));
        }
        let mut out = Self::zero(self.g.clone(), self.degree_cap, self.k + 1);
        for (key, c) in &self.terms {
            let m = &key.slots_ref()[slot];
            let splits = binomial_splits(m);
            for (a, b, w) in splits {
                let mut slots = Vec::with_capacity(self.k as usize + 1);
                slots.extend_from_slice(&key[..slot]);
                slots.push(a);
                slots.push(b);
                slots.extend_from_slice(&key[slot + 1..]);
                out.add_term(slots, c * &w);
            }
        }
        Ok(out)
    }

    /// Slot placement with units elsewhere (positions 1-based, increasing).
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
        let mut out = Self::zero(self.g.clone(), self.degree_cap, n);
        for (key, c) in &self.terms {
            let mut slots = vec![Mono::unit(self.g.dim()); n as usize];
            for (s, &p) in positions.iter().enumerate() {
                slots[p - 1] = key[s].clone();
            }
            out.add_term(slots, c.clone());
        }
        Ok(out)
    }

    pub fn permute_slots(&self, sigma: &[usize]) -> Result<Self> {
        if sigma.len() != self.k as usize {
            return Err(Error::domain("permutation arity mismatch"));
        }
        let mut out = Self::zero(self.g.clone(), self.degree_cap, self.k);
        for (key, c) in &self.terms {
            let slots: Vec<Mono> = sigma.iter().map(|&i| key[i - 1].clone()).collect();
            out.add_term(slots, c.clone());
        }
        Ok(out)
    }

    /// Insertion by contiguous blocks: slot `j` expands into positions
    /// `targets[j]` through iterated primitive coproducts.
    pub fn expand(&self, targets: &[Vec<u8>], n: u8) -> Result<Self> {
        self.expand_twisted(targets, n, None)
    }

    /// Insertion with the coproduct `ad_star(f) o Delta_0`: each coproduct
    /// application is followed by conjugation with `f` placed at the two
    /// freshly created slots. With `f = None` this is the primitive
    /// coproduct. Invariant `f` leave the coproduct untouched.
    pub fn expand_twisted(
        &self,
        targets: &[Vec<u8>],
        n: u8,
        twist: Option<&SymTensor>,
    ) -> Result<Self> {
        if targets.len() != self.k as usize {
            return Err(Error::domain("one target block per tensor slot"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for block in targets {
            if block.is_empty() {
                return Err(Error::domain("empty insertion block"));
            }
            if block.windows(2).any(|w| w[1] != w[0] + 1) {
                return Err(Error::unsupported("non-contiguous insertion blocks"));
            }
            for &p in block {
                if p == 0 || p > n || !seen.insert(p) {
                    return Err(Error::domain(
                        "insertion blocks must be disjoint and in range",
                    ));
                }
            }
        }
        let mut wide = self.clone();
        let mut cursor = 0usize;
        let mut positions = Vec::new();
        for block in targets {
            for _ in 1..block.len() {
                wide = wide.delta0_slot(cursor)?;
                if let Some(f) = twist {
                    let placed =
                        f.place(&[cursor + 1, cursor + 2], wide.arity())?;
                    wide = wide.ad_star(&placed)?;
                }
            }
            cursor += block.len();
            positions.extend(block.iter().map(|&p| p as usize));
        }
        let mut order: Vec<usize> = (0..positions.len()).collect();
        order.sort_by_key(|&i| positions[i]);
        let sigma: Vec<usize> = order.iter().map(|&i| i + 1).collect();
        let rearranged = wide.permute_slots(&sigma)?;
        let mut sorted = positions;
        sorted.sort_unstable();
        rearranged.place(&sorted, n)
    }

    /// Signed sum over slot permutations, optionally averaged by `1/k!`.
    pub fn alt(&self, norm: crate::dk::AltNormalization) -> Result<Self> {
        let k = self.k as usize;
        let mut out = Self::zero(self.g.clone(), self.degree_cap, self.k);
        let mut sigma: Vec<u8> = (1..=k as u8).collect();
        loop {
            let sign = crate::dk::permutation_sign(&sigma);
            let arranged = self.permute_slots(&sigma.iter().map(|&s| s as usize).collect::<Vec<_>>())?;
            out = out.add(&arranged.scalar_mul(&crate::scalar::int(sign as i64)))?;
            if !crate::dk::next_permutation(&mut sigma) {
                break;
            }
        }
        if norm == crate::dk::AltNormalization::Averaged {
            out = out.scalar_mul(&crate::scalar::inv_factorial(k as u32));
        }
        Ok(out)
    }

    /// Diagonal invariance: brackets with every `sum_slots x_i` vanish.
    pub fn is_invariant(&self) -> Result<bool> {
        for i in 0..self.g.dim() as u16 {
            let mut diag = Self::zero(self.g.clone(), self.degree_cap, self.k);
            for s in 0..self.k as usize {
                diag = diag.add(&Self::generator_at(
                    self.g.clone(),
                    self.degree_cap,
                    self.k,
                    i,
                    s,
                )?)?;
            }
            if !diag.bracket(self)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(slots, c)| {
                let slots_json: Vec<Value> = slots
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
                json!({ "slots": slots_json, "coeff": format_scalar(c) })
            })
            .collect();
        json!({
            "arity": self.k,
            "degree_cap": self.degree_cap,
            "terms": terms,
        })
    }

    pub fn from_json(g: Arc<LieAlgebraSpec>, value: &Value) -> Result<Self> {
        let k = value
            .get("arity")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse("sym tensor JSON missing `arity`"))? as u8;
        let degree_cap = value
            .get("degree_cap")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse("sym tensor JSON missing `degree_cap`"))?
            as u32;
        let mut t = Self::zero(g.clone(), degree_cap, k);
        for term in value
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse("sym tensor JSON missing `terms`"))?
        {
            let coeff = parse_scalar(
                term.get("coeff")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::parse("sym tensor term missing `coeff`"))?,
            )?;
            let slots_json = term
                .get("slots")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::parse("sym tensor term missing `slots`"))?;
            if slots_json.len() != k as usize {
                return Err(Error::parse("sym tensor term has wrong slot count"));
            }
            let mut slots = Vec::with_capacity(k as usize);
            for slot in slots_json {
                let mut mono = Mono::unit(g.dim());
                for entry in slot
                    .as_array()
                    .ok_or_else(|| Error::parse("sym tensor slot must be an array"))?
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
            t.add_term(slots, coeff);
        }
        Ok(t)
    }
}

// small trait hack so delta0_slot can borrow key slices naturally
trait SlotsRef {
    fn slots_ref(&self) -> &[Mono];
}
impl SlotsRef for Vec<Mono> {
    fn slots_ref(&self) -> &[Mono] {
        self
    }
}

/// All splits `m = a + b` with multinomial weights `prod C(m_i, a_i)`.
fn binomial_splits(m: &Mono) -> Vec<(Mono, Mono, Scalar)> {
    let mut out = vec![(
        Mono(vec![0; m.0.len()]),
        Mono(vec![0; m.0.len()]),
        Scalar::one(),
    )];
    for (i, &e) in m.0.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for (a, b, w) in &out {
            for ai in 0..=e {
                let mut na = a.clone();
                let mut nb = b.clone();
                na.0[i] = ai;
                nb.0[i] = e - ai;
                next.push((na, nb, w * binomial(e as u64, ai as u64)));
            }
        }
        out = next;
    }
    out
}

fn binomial(n: u64, k: u64) -> Scalar {
    let mut num = Scalar::one();
    for i in 0..k {
        num = num * crate::scalar::int((n - i) as i64) / crate::scalar::int((i + 1) as i64);
    }
    num
}

/// All monomials of exact degree `d`.
pub fn monos_of_degree(g: &Arc<LieAlgebraSpec>, d: u32) -> Vec<Mono> {
    let dim = g.dim();
    let mut out = Vec::new();
    let mut current = Mono::unit(dim);
    fn rec(dim: usize, at: usize, left: u32, current: &mut Mono, out: &mut Vec<Mono>) {
        if at == dim {
            if left == 0 {
                out.push(current.clone());
            }
            return;
        }
        if at == dim - 1 {
            current.0[at] = left as u16;
            out.push(current.clone());
            current.0[at] = 0;
            return;
        }
        for e in 0..=left {
            current.0[at] = e as u16;
            rec(dim, at + 1, left - e, current, out);
            current.0[at] = 0;
        }
    }
    rec(dim, 0, d, &mut current, &mut out);
    out.sort();
    out
}

/// Star product on zero-constant tensors whose terms all have total degree
/// at least 2: a nested bracket of `m` letters of degree >= dmin has total
/// degree at least `m (dmin - 1) + 1`, so the universal series is complete
/// once `m (dmin - 1) + 1 > cap`.
pub fn star(a: &SymTensor, b: &SymTensor) -> Result<SymTensor> {
    let mut dmin = u32::MAX;
    for t in [a, b] {
        if let Some(d) = t.min_degree() {
            if d < 2 {
                return Err(Error::domain(
                    "star product needs terms of total degree >= 2",
                ));
            }
            dmin = dmin.min(d);
        }
    }
    let cap = a.degree_cap();
    let max_degree = if dmin == u32::MAX {
        1 // one side is zero; only the linear part of the series matters
    } else {
        ((cap.saturating_sub(1)) / (dmin - 1)).max(1)
    };
    if max_degree > cbh::MAX_BCH_DEGREE {
        return Err(Error::unsupported(
            "degree cap too large for the universal star product",
        ));
    }
    struct Carrier(SymTensor);
    impl cbh::BchCarrier for Carrier {
        type Elem = SymTensor;
        fn zero(&self) -> SymTensor {
            self.0.clone()
        }
        fn add(&self, a: &SymTensor, b: &SymTensor) -> Result<SymTensor> {
            a.add(b)
        }
        fn scale(&self, a: &SymTensor, c: &Scalar) -> SymTensor {
            a.scalar_mul(c)
        }
        fn bracket(&self, a: &SymTensor, b: &SymTensor) -> Result<SymTensor> {
            a.bracket(b)
        }
    }
    let carrier = Carrier(SymTensor::zero(a.g().clone(), a.degree_cap(), a.arity()));
    cbh::bch_star(&carrier, a, b, max_degree)
}

fn star_chain(factors: &[(bool, &SymTensor)]) -> Result<SymTensor> {
    let mut acc: Option<SymTensor> = None;
    for (negate, t) in factors {
        let v = if *negate { t.neg() } else { (*t).clone() };
        acc = Some(match acc {
            None => v,
            Some(prev) => star(&prev, &v)?,
        });
    }
    acc.ok_or_else(|| Error::domain("empty star chain"))
}

/// Co-Hochschild differential on the symmetric carrier:
/// `d(x) = sum_i (-1)^{i+1} x^{1,..,{i,i+1},..,k+1} - x^{2,..,k+1}
///  + (-1)^k x^{1,..,k}`.
pub fn sym_cohochschild_d(x: &SymTensor) -> Result<SymTensor> {
    let k = x.arity();
    let n = k + 1;
    let mut out = SymTensor::zero(x.g().clone(), x.degree_cap(), n);
    for i in 1..=k {
        let mut blocks = Vec::with_capacity(k as usize);
        for s in 1..=k {
            if s == i {
                blocks.push(vec![s, s + 1]);
            } else if s < i {
                blocks.push(vec![s]);
            } else {
                blocks.push(vec![s + 1]);
            }
        }
        let image = x.expand(&blocks, n)?;
        let sign = crate::scalar::int(if i % 2 == 1 { 1 } else { -1 });
        out = out.add(&image.scalar_mul(&sign))?;
    }
    let tail: Vec<Vec<u8>> = (2..=n).map(|s| vec![s]).collect();
    out = out.sub(&x.expand(&tail, n)?)?;
    let head: Vec<Vec<u8>> = (1..=k).map(|s| vec![s]).collect();
    let sign = crate::scalar::int(if k % 2 == 0 { 1 } else { -1 });
    out.add(&x.expand(&head, n)?.scalar_mul(&sign))
}

/// Star-pentagon residual: the star-difference of the two sides, zero
/// exactly when the axiom holds within truncation. `coproduct_twist` is the
/// accumulated twist applied to the primitive coproduct of the structure
/// that `phi` belongs to (`None` means the untwisted coproduct). Twisting by
/// a non-invariant element changes the coproduct, and the pentagon only
/// holds relative to the changed one.
pub fn drinfeld_pentagon_residual(
    phi: &SymTensor,
    coproduct_twist: Option<&SymTensor>,
) -> Result<SymTensor> {
    if phi.arity() != 3 {
        return Err(Error::structural("pentagon element must have arity 3"));
    }
    let ins = |blocks: &[Vec<u8>]| phi.expand_twisted(blocks, 4, coproduct_twist);
    let lhs = star_chain(&[
        (false, &ins(&[vec![1], vec![2], vec![3, 4]])?),
        (false, &ins(&[vec![1, 2], vec![3], vec![4]])?),
    ])?;
    let rhs = star_chain(&[
        (false, &ins(&[vec![2], vec![3], vec![4]])?),
        (false, &ins(&[vec![1], vec![2, 3], vec![4]])?),
        (false, &ins(&[vec![1], vec![2], vec![3]])?),
    ])?;
    star(&rhs.neg(), &lhs)
}

/// Twist of a star-pentagon element:
/// `^f phi = f^{2,3} * f^{1,23} * phi * (-f^{12,3}) * (-f^{1,2})`,
/// with insertions taken in the coproduct of the structure being twisted
/// (`prior`, `None` for the primitive one).
pub fn drinfeld_twist(
    phi: &SymTensor,
    f: &SymTensor,
    prior: Option<&SymTensor>,
) -> Result<SymTensor> {
    if phi.arity() != 3 || f.arity() != 2 {
        return Err(Error::structural("twist needs arities (3, 2)"));
    }
    let f23 = f.expand_twisted(&[vec![2], vec![3]], 3, prior)?;
    let f123 = f.expand_twisted(&[vec![1], vec![2, 3]], 3, prior)?;
    let f12_3 = f.expand_twisted(&[vec![1, 2], vec![3]], 3, prior)?;
    let f12 = f.expand_twisted(&[vec![1], vec![2]], 3, prior)?;
    star_chain(&[
        (false, &f23),
        (false, &f123),
        (false, phi),
        (true, &f12_3),
        (true, &f12),
    ])
}

/// Which adjacent slot pair `(id (x) m)` multiplies in the equalizing
/// recursion. The bidegree bookkeeping of the recursion labels forces the
/// product onto slots 1-2; the mirrored convention is kept selectable and
/// is validated against the round-trip oracle in tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MSlots {
    #[default]
    OneTwo,
    TwoThree,
}

#[derive(Debug, Clone)]
pub struct EqualizeStage {
    pub degree: u32,
    pub b_invariant: bool,
}

#[derive(Debug, Clone)]
pub struct EqualizeOutcome {
    pub twist: SymTensor,
    pub stages: Vec<EqualizeStage>,
    pub all_invariant: bool,
    pub matches: bool,
}

/// Produces an invariant twist relating two star-pentagon solutions through
/// the degree cap, by the lowest-degree recursion
/// `B_{2,k-2} = 1/2 m(C_{1,1,k-2})`,
/// `B_{i+1,k-i-1} = 1/(i+1) m[C_{i,1,k-i-1} + ((id (x) d) B_{i,k-i})_{i,1,k-i-1}]`.
pub fn equalize_lifts(
    phi1: &SymTensor,
    phi2: &SymTensor,
    slots: MSlots,
) -> Result<EqualizeOutcome> {
    if !drinfeld_pentagon_residual(phi1, None)?.is_zero()
        || !drinfeld_pentagon_residual(phi2, None)?.is_zero()
    {
        return Err(Error::domain(
            "equalize_lifts needs two star-pentagon solutions",
        ));
    }
    let g = phi1.g().clone();
    let cap = phi1.degree_cap();
    let mut current = phi1.clone();
    let mut total: Option<SymTensor> = None;
    let mut stages = Vec::new();
    let mut all_invariant = true;
    loop {
        let diff = phi2.sub(&current)?;
        let Some(k) = diff.min_degree() else { break };
        let c = diff.degree_component(k);
        if k < 3 {
            return Err(Error::contract(format!(
                "lift difference starts at degree {k} < 3"
            )));
        }
        if !sym_cohochschild_d(&c)?.is_zero() {
            return Err(Error::contract(format!(
                "lowest difference at degree {k} is not d-closed"
            )));
        }
        if !c.alt(crate::dk::AltNormalization::Averaged)?.is_zero() {
            return Err(Error::contract(format!(
                "lowest difference at degree {k} has a nonzero alternating part"
            )));
        }
        let b = b_recursion(&g, cap, &c, k, slots)?;
        let db = sym_cohochschild_d(&b)?;
        if db != c {
            return Err(Error::contract(format!(
                "recursion output fails d(B) = C at degree {k}"
            )));
        }
        let b_invariant = b.is_invariant()?;
        all_invariant &= b_invariant;
        stages.push(EqualizeStage {
            degree: k,
            b_invariant,
        });
        // twisting by exp(f) shifts phi by -d(f) at lowest order, so f = -B
        let f = b.neg();
        let next = drinfeld_twist(&current, &f, None)?;
        let next_diff = phi2.sub(&next)?;
        if next_diff.min_degree().is_some_and(|d| d <= k) {
            return Err(Error::contract(format!(
                "twist failed to raise the difference degree past {k}"
            )));
        }
        current = next;
        total = Some(match total {
            None => f,
            Some(prev) => star(&f, &prev)?,
        });
    }
    let twist = total.unwrap_or_else(|| SymTensor::zero(g, cap, 2));
    let matches = drinfeld_twist(phi1, &twist, None)? == *phi2;
    Ok(EqualizeOutcome {
        twist,
        stages,
        all_invariant,
        matches,
    })
}

fn b_recursion(
    g: &Arc<LieAlgebraSpec>,
    cap: u32,
    c: &SymTensor,
    k: u32,
    slots: MSlots,
) -> Result<SymTensor> {
    let oriented = match slots {
        MSlots::OneTwo => c.clone(),
        MSlots::TwoThree => c.permute_slots(&[3, 2, 1])?,
    };
    // slots fixed to (1,2)-multiplication from here on
    let m12 = |t: &SymTensor| -> Result<SymTensor> {
        // multiply slots 1 and 2 of a 3-slot tensor
        let mut out = SymTensor::zero(t.g().clone(), t.degree_cap(), 2);
        for (key, coeff) in t.terms() {
            let mut m = key[0].clone();
            for (e, eb) in m.0.iter_mut().zip(&key[1].0) {
                *e += eb;
            }
            out.add_term(vec![m, key[2].clone()], coeff.clone());
        }
        Ok(out)
    };
    let mut b = SymTensor::zero(g.clone(), cap, 2);
    let mut b_prev = SymTensor::zero(g.clone(), cap, 2); // B_{i,k-i}
    for i in 2..k {
        // i indexes the bidegree (i, k-i) being built
        let c_part = oriented.multidegree_component(&[i - 1, 1, k - i]);
        let correction = if i == 2 {
            SymTensor::zero(g.clone(), cap, 3)
        } else {
            // ((id (x) d)(B_{i-1,k-i+1})) component (i-1, 1, k-i)
            b_prev
                .delta0_slot(1)?
                .multidegree_component(&[i - 1, 1, k - i])
        };
        let sum = c_part.add(&correction)?;
        let stage = m12(&sum)?.scalar_mul(&crate::scalar::frac(1, i as i64));
        b_prev = stage.clone();
        b = b.add(&stage)?;
    }
    match slots {
        MSlots::OneTwo => Ok(b),
        MSlots::TwoThree => b.permute_slots(&[2, 1]),
    }
}

/// Solves `d(f) = target` on the symmetric carrier for homogeneous `target`
/// of arity 3; `f` ranges over bidegrees with both slots nonconstant.
/// Returns `None` when no solution exists (a nonzero obstruction class).
pub fn solve_sym_d(target: &SymTensor) -> Result<Option<SymTensor>> {
    if target.arity() != 3 {
        return Err(Error::structural("solve_sym_d expects arity 3"));
    }
    if target.is_zero() {
        return Ok(Some(SymTensor::zero(
            target.g().clone(),
            target.degree_cap(),
            2,
        )));
    }
    let degree = {
        let degrees: std::collections::BTreeSet<u32> =
            target.terms().map(|(s, _)| total_degree(s)).collect();
        if degrees.len() != 1 {
            return Err(Error::domain("solve_sym_d expects a homogeneous target"));
        }
        *degrees.iter().next().unwrap()
    };
    let g = target.g().clone();
    let cap = target.degree_cap();
    // basis of candidate bidegrees
    let mut basis = Vec::new();
    for p in 1..degree {
        let q = degree - p;
        if q < 1 {
            continue;
        }
        for mp in monos_of_degree(&g, p) {
            for mq in monos_of_degree(&g, q) {
                basis.push(vec![mp.clone(), mq.clone()]);
            }
        }
    }
    let images: Vec<SymTensor> = basis
        .iter()
        .map(|slots| {
            let mut t = SymTensor::zero(g.clone(), cap, 2);
            t.add_term(slots.clone(), Scalar::one());
            sym_cohochschild_d(&t)
        })
        .collect::<Result<_>>()?;
    // coordinates over the union support
    let mut support: std::collections::BTreeSet<Vec<Mono>> =
        target.terms().map(|(s, _)| s.clone()).collect();
    for im in &images {
        support.extend(im.terms().map(|(s, _)| s.clone()));
    }
    let support: Vec<Vec<Mono>> = support.into_iter().collect();
    let mut matrix = linalg::QMatrix::zero(support.len(), basis.len());
    let mut rhs = Vec::with_capacity(support.len());
    for (r, key) in support.iter().enumerate() {
        for (ccol, im) in images.iter().enumerate() {
            let v = im
                .terms()
                .find(|(s, _)| *s == key)
                .map(|(_, c)| c.clone())
                .unwrap_or_else(Scalar::zero);
            matrix.set(r, ccol, v);
        }
        let tv = target
            .terms()
            .find(|(s, _)| *s == key)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Scalar::zero);
        rhs.push(tv);
    }
    let Some((particular, _)) = linalg::solve_affine(&matrix, &rhs) else {
        return Ok(None);
    };
    let mut f = SymTensor::zero(g, cap, 2);
    for (c, slots) in particular.iter().zip(&basis) {
        if !c.is_zero() {
            f.add_term(slots.clone(), c.clone());
        }
    }
    Ok(Some(f))
}

/// An invariant symmetric 2-tensor on `g`, entered as a symmetric
/// coefficient matrix `t^{ab}`.
#[derive(Debug, Clone)]
pub struct Metric {
    g: Arc<LieAlgebraSpec>,
    coeffs: Vec<Vec<Scalar>>,
}

impl Metric {
    pub fn new(g: Arc<LieAlgebraSpec>, coeffs: Vec<Vec<Scalar>>) -> Result<Self> {
        let dim = g.dim();
        if coeffs.len() != dim || coeffs.iter().any(|row| row.len() != dim) {
            return Err(Error::structural("metric matrix has wrong shape"));
        }
        for a in 0..dim {
            for b in 0..dim {
                if coeffs[a][b] != coeffs[b][a] {
                    return Err(Error::domain("metric matrix must be symmetric"));
                }
            }
        }
        let metric = Metric { g, coeffs };
        // invariance: the associated 2-tensor commutes with the diagonal action
        if !metric.insert(1, 2, 2, 4)?.is_invariant()? {
            return Err(Error::domain("metric tensor is not invariant"));
        }
        Ok(metric)
    }

    /// sl2 Casimir tensor `e (x) f + f (x) e + 1/2 h (x) h`.
    pub fn sl2_casimir() -> Result<Metric> {
        let g = LieAlgebraSpec::sl2();
        let one = Scalar::one();
        let half = crate::scalar::frac(1, 2);
        let zero = Scalar::zero();
        Metric::new(
            g,
            vec![
                vec![zero.clone(), one.clone(), zero.clone()],
                vec![one, zero.clone(), zero.clone()],
                vec![zero.clone(), zero, half],
            ],
        )
    }

    pub fn g(&self) -> &Arc<LieAlgebraSpec> {
        &self.g
    }

    /// `t^{i,j}` as a `k`-slot tensor (1-based slots `i != j`).
    pub fn insert(&self, i: u8, j: u8, k: u8, degree_cap: u32) -> Result<SymTensor> {
        if i == 0 || j == 0 || i > k || j > k || i == j {
            return Err(Error::domain("bad metric insertion slots"));
        }
        let dim = self.g.dim();
        let mut out = SymTensor::zero(self.g.clone(), degree_cap, k);
        for a in 0..dim {
            for b in 0..dim {
                let c = &self.coeffs[a][b];
                if c.is_zero() {
                    continue;
                }
                let mut slots = vec![Mono::unit(dim); k as usize];
                slots[(i - 1) as usize].0[a] += 1;
                slots[(j - 1) as usize].0[b] += 1;
                out.add_term(slots, c.clone());
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let mut entries = Vec::new();
        for a in 0..self.g.dim() {
            for b in a..self.g.dim() {
                if !self.coeffs[a][b].is_zero() {
                    entries.push(json!([
                        self.g.name(a as u16),
                        self.g.name(b as u16),
                        format_scalar(&self.coeffs[a][b])
                    ]));
                }
            }
        }
        json!(entries)
    }

    pub fn from_json(g: Arc<LieAlgebraSpec>, value: &Value) -> Result<Self> {
        let entries = value
            .as_array()
            .ok_or_else(|| Error::parse("metric JSON must be an array of triples"))?;
        let dim = g.dim();
        let mut coeffs = vec![vec![Scalar::zero(); dim]; dim];
        for e in entries {
            let triple = e
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| Error::parse("metric entry must be [a, b, coeff]"))?;
            let a = g.index(
                triple[0]
                    .as_str()
                    .ok_or_else(|| Error::parse("metric name"))?,
            )? as usize;
            let b = g.index(
                triple[1]
                    .as_str()
                    .ok_or_else(|| Error::parse("metric name"))?,
            )? as usize;
            let c = parse_scalar(
                triple[2]
                    .as_str()
                    .ok_or_else(|| Error::parse("metric coeff"))?,
            )?;
            coeffs[a][b] = c.clone();
            coeffs[b][a] = c;
        }
        Metric::new(g, coeffs)
    }
}

/// Evaluates a two-letter Lie series at `A -> t^{1,2}, B -> t^{2,3}` with
/// the Poisson bracket, producing a 3-slot tensor.
pub fn eval_lie_series(
    lie: &crate::freelie::LieElement,
    metric: &Metric,
    degree_cap: u32,
) -> Result<SymTensor> {
    if lie.alphabet().len() != 2 {
        return Err(Error::structural(
            "eval_lie_series expects a series in two letters",
        ));
    }
    let t12 = metric.insert(1, 2, 3, degree_cap)?;
    let t23 = metric.insert(2, 3, 3, degree_cap)?;
    let mut out = SymTensor::zero(metric.g().clone(), degree_cap, 3);
    let mut memo: BTreeMap<Vec<u16>, SymTensor> = BTreeMap::new();
    fn eval(
        word: &[u16],
        t12: &SymTensor,
        t23: &SymTensor,
        memo: &mut BTreeMap<Vec<u16>, SymTensor>,
    ) -> Result<SymTensor> {
        if let Some(hit) = memo.get(word) {
            return Ok(hit.clone());
        }
        let value = if word.len() == 1 {
            if word[0] == 0 {
                t12.clone()
            } else {
                t23.clone()
            }
        } else {
            let (u, v) = crate::freelie::standard_factorization(word);
            let eu = eval(&u, t12, t23, memo)?;
            let ev = eval(&v, t12, t23, memo)?;
            eu.bracket(&ev)?
        };
        memo.insert(word.to_vec(), value.clone());
        Ok(value)
    }
    for (w, c) in lie.terms() {
        let v = eval(w.letters(), &t12, &t23, &mut memo)?;
        out = out.add(&v.scalar_mul(c))?;
    }
    Ok(out)
}

/// Classical reduction of a Drinfeld-algebra structure: the Lie bracket
/// from the linear Poisson structure, the cobracket from the (possibly
/// twisted) coproduct, and the alternating class of the pentagon element.
#[derive(Debug, Clone)]
pub struct Reduction {
    /// [x_a, x_b] rows for a < b, as coefficient vectors.
    pub mu: Vec<((u16, u16), Vec<Scalar>)>,
    /// delta(x_c) in Lambda^2 coordinates (pairs a < b), per generator.
    pub delta: Vec<Vec<Scalar>>,
    /// Lambda^3 coordinates of Alt(phi) on triples a < b < c.
    pub phi: Vec<Scalar>,
    pub phi_invariant: Option<bool>,
}

pub fn classical_reduction(
    phi: &SymTensor,
    twist: Option<&SymTensor>,
) -> Result<Reduction> {
    if phi.arity() != 3 {
        return Err(Error::structural("reduction expects an arity-3 element"));
    }
    let g = phi.g().clone();
    let cap = phi.degree_cap();
    let dim = g.dim();
    let mut mu = Vec::new();
    for a in 0..dim as u16 {
        for b in a + 1..dim as u16 {
            let mut row = vec![Scalar::zero(); dim];
            for (k, c) in g.bracket(a, b) {
                row[*k as usize] = c.clone();
            }
            mu.push(((a, b), row));
        }
    }
    // cobracket: antisymmetric (1,1) part of the twisted coproduct
    let pair_count = dim * (dim - 1) / 2;
    let pair_index = |a: usize, b: usize| -> usize {
        // a < b
        let mut idx = 0;
        for x in 0..a {
            idx += dim - x - 1;
        }
        idx + (b - a - 1)
    };
    let mut delta = vec![vec![Scalar::zero(); pair_count]; dim];
    if let Some(f) = twist {
        for cgen in 0..dim as u16 {
            let x1 = SymTensor::generator_at(g.clone(), cap, 2, cgen, 0)?;
            let x2 = SymTensor::generator_at(g.clone(), cap, 2, cgen, 1)?;
            let d0 = x1.add(&x2)?;
            let twisted = d0.ad_star(f)?;
            let flipped = twisted.permute_slots(&[2, 1])?;
            let anti = twisted.sub(&flipped)?.multidegree_component(&[1, 1]);
            for (slots, coeff) in anti.terms() {
                let a = slots[0].0.iter().position(|&e| e == 1).unwrap();
                let b = slots[1].0.iter().position(|&e| e == 1).unwrap();
                if a < b {
                    delta[cgen as usize][pair_index(a, b)] += coeff.clone();
                }
                // terms with a > b are the antisymmetric mirror images
            }
        }
    }
    // Lambda^3 class of phi
    let alt = phi
        .alt(crate::dk::AltNormalization::Averaged)?
        .multidegree_component(&[1, 1, 1]);
    let mut phi_coords = Vec::new();
    for a in 0..dim {
        for b in a + 1..dim {
            for c in b + 1..dim {
                let mut slots = vec![Mono::unit(dim); 3];
                slots[0].0[a] = 1;
                slots[1].0[b] = 1;
                slots[2].0[c] = 1;
                let v = alt
                    .terms()
                    .find(|(s, _)| **s == slots)
                    .map(|(_, cf)| cf.clone())
                    .unwrap_or_else(Scalar::zero);
                phi_coords.push(v);
            }
        }
    }
    let delta_is_zero = delta.iter().all(|row| row.iter().all(Scalar::is_zero));
    let phi_invariant = if delta_is_zero {
        Some(alt.is_invariant()?)
    } else {
        None
    };
    Ok(Reduction {
        mu,
        delta,
        phi: phi_coords,
        phi_invariant,
    })
}
