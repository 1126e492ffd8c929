//! The universal Campbell-Baker-Hausdorff series over a pluggable bracket.
//!
//! The table of bracketing patterns is obtained once by computing
//! log(exp(a) exp(b)) symbolically in the free associative algebra on two
//! letters and projecting onto the Lyndon basis of the free Lie algebra —
//! never copied from a literature table. Substituting any bilinear bracket
//! (associative commutator, rescaled commutator, Poisson bracket, zero)
//! evaluates the star product `a * b = a + b + 1/2 [a,b] + ...` through a
//! chosen degree.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::alphabet::{GeneratorAlphabet, Word};
use crate::error::{Error, Result};
use crate::freelie::{self, FreeLieOps};
use crate::scalar::Scalar;
use crate::series::GradedSeries;

pub const MAX_BCH_DEGREE: u32 = 8;

/// Rational-weighted bracketing patterns of the BCH series, degree by
/// degree. Patterns are Lyndon words over the two-letter alphabet `{a, b}`;
/// the bracketing is their standard factorization.
#[derive(Debug, Clone)]
pub struct BchTable {
    max_degree: u32,
    terms: Vec<(u32, Word, Scalar)>,
}

impl BchTable {
    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn terms(&self) -> &[(u32, Word, Scalar)] {
        &self.terms
    }
}

fn table_cache() -> &'static Mutex<HashMap<u32, Arc<BchTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<BchTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The universal table through `max_degree` (at most 8; the table size
/// explodes beyond that and nothing here needs it).
pub fn bch_table(max_degree: u32) -> Result<Arc<BchTable>> {
    if max_degree > MAX_BCH_DEGREE {
        return Err(Error::unsupported(format!(
            "BCH table capped at degree {MAX_BCH_DEGREE}, requested {max_degree}"
        )));
    }
    let mut cache = table_cache().lock().unwrap();
    if let Some(t) = cache.get(&max_degree) {
        return Ok(t.clone());
    }
    let alphabet = GeneratorAlphabet::unit_degrees(&["a", "b"])?;
    let ops = FreeLieOps::new(alphabet.clone());
    let a = GradedSeries::generator(alphabet.clone(), max_degree, "a")?;
    let b = GradedSeries::generator(alphabet.clone(), max_degree, "b")?;
    let product = a.exp()?.mul(&b.exp()?)?;
    let log = product.log()?;
    let mut terms: Vec<(u32, Word, Scalar)> = Vec::new();
    for (factors, coeff) in freelie::pbw_decompose(&ops, &log) {
        if factors.len() != 1 {
            return Err(Error::contract(
                "log(exp(a)exp(b)) had a non-Lie residual; series engine is broken",
            ));
        }
        let w = factors.into_iter().next().unwrap();
        terms.push((w.degree(), w, coeff));
    }
    terms.sort_by(|x, y| (x.0, &x.1).cmp(&(y.0, &y.1)));
    let table = Arc::new(BchTable { max_degree, terms });
    cache.insert(max_degree, table.clone());
    Ok(table)
}

/// A carrier on which the universal series can be evaluated: a module with
/// a bilinear bracket. Brackets are expected to be antisymmetric and to
/// satisfy Jacobi within truncation; that is verified by tests on each
/// provider, not assumed here.
pub trait BchCarrier {
    type Elem: Clone;
    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn scale(&self, a: &Self::Elem, c: &Scalar) -> Self::Elem;
    fn bracket(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
}

/// Evaluates one Lyndon bracketing pattern: letters `a`/`b` at the leaves,
/// the carrier bracket at each standard-factorization node. Sub-bracket
/// values are shared across the patterns of one star evaluation.
fn eval_pattern<C: BchCarrier>(
    carrier: &C,
    word: &[u16],
    a: &C::Elem,
    b: &C::Elem,
    memo: &mut HashMap<Vec<u16>, C::Elem>,
) -> Result<C::Elem> {
    if word.len() == 1 {
        return Ok(if word[0] == 0 { a.clone() } else { b.clone() });
    }
    if let Some(hit) = memo.get(word) {
        return Ok(hit.clone());
    }
    let (u, v) = freelie::standard_factorization(word);
    let eu = eval_pattern(carrier, &u, a, b, memo)?;
    let ev = eval_pattern(carrier, &v, a, b, memo)?;
    let value = carrier.bracket(&eu, &ev)?;
    memo.insert(word.to_vec(), value.clone());
    Ok(value)
}

/// The CBH star product through universal degree `max_degree`.
pub fn bch_star<C: BchCarrier>(
    carrier: &C,
    a: &C::Elem,
    b: &C::Elem,
    max_degree: u32,
) -> Result<C::Elem> {
    let table = bch_table(max_degree)?;
    let mut out = carrier.zero();
    let mut memo: HashMap<Vec<u16>, C::Elem> = HashMap::new();
    for (degree, word, coeff) in table.terms() {
        if *degree > max_degree {
            break;
        }
        let value = eval_pattern(carrier, word.letters(), a, b, &mut memo)?;
        out = carrier.add(&out, &carrier.scale(&value, coeff))?;
    }
    Ok(out)
}

/// Star product of two zero-constant-term free series under the commutator.
pub fn bch_star_series(a: &GradedSeries, b: &GradedSeries, max_degree: u32) -> Result<GradedSeries> {
    struct Ctx(GradedSeries);
    impl BchCarrier for Ctx {
        type Elem = GradedSeries;
        fn zero(&self) -> GradedSeries {
            self.0.clone()
        }
        fn add(&self, a: &GradedSeries, b: &GradedSeries) -> Result<GradedSeries> {
            a.add(b)
        }
        fn scale(&self, a: &GradedSeries, c: &Scalar) -> GradedSeries {
            a.scalar_mul(c)
        }
        fn bracket(&self, a: &GradedSeries, b: &GradedSeries) -> Result<GradedSeries> {
            a.mul(b)?.sub(&b.mul(a)?)
        }
    }
    let ctx = Ctx(GradedSeries::zero(a.alphabet().clone(), a.truncation()));
    bch_star(&ctx, a, b, max_degree)
}

/// `T_n` elements with the commutator bracket.
pub struct TnCommutator {
    zero: crate::dk::TnElement,
}

impl TnCommutator {
    pub fn new(algebra: &Arc<crate::dk::DkAlgebra>, truncation: u32) -> Self {
        TnCommutator {
            zero: algebra.zero(truncation),
        }
    }
}

impl BchCarrier for TnCommutator {
    type Elem = crate::dk::TnElement;
    fn zero(&self) -> Self::Elem {
        self.zero.clone()
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        a.add(b)
    }
    fn scale(&self, a: &Self::Elem, c: &Scalar) -> Self::Elem {
        a.scalar_mul(c)
    }
    fn bracket(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        a.commutator(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::SeededRng;

    #[test]
    fn low_degree_coefficients() {
        let table = bch_table(3).unwrap();
        let alphabet = GeneratorAlphabet::unit_degrees(&["a", "b"]).unwrap();
        let find = |labels: &[&str]| {
            let w = alphabet.word_from_labels(labels).unwrap();
            table
                .terms()
                .iter()
                .find(|(_, word, _)| word == &w)
                .map(|(_, _, c)| c.clone())
        };
        // degree 1: a + b
        assert_eq!(find(&["a"]), Some(crate::scalar::int(1)));
        assert_eq!(find(&["b"]), Some(crate::scalar::int(1)));
        // degree 2: (1/2)[a,b]
        assert_eq!(find(&["a", "b"]), Some(crate::scalar::frac(1, 2)));
        // degree 3: (1/12)[a,[a,b]] + (1/12)[[a,b],b]
        assert_eq!(find(&["a", "a", "b"]), Some(crate::scalar::frac(1, 12)));
        assert_eq!(find(&["a", "b", "b"]), Some(crate::scalar::frac(1, 12)));
    }

    #[test]
    fn reproduces_log_exp_exp() {
        // evaluate the table with the commutator and compare against a
        // fresh log(exp exp) — the evaluation path differs from the build
        let alphabet = GeneratorAlphabet::unit_degrees(&["a", "b"]).unwrap();
        for n in 1..=6u32 {
            let a = GradedSeries::generator(alphabet.clone(), n, "a").unwrap();
            let b = GradedSeries::generator(alphabet.clone(), n, "b").unwrap();
            let star = bch_star_series(&a, &b, n).unwrap();
            let oracle = a.exp().unwrap().mul(&b.exp().unwrap()).unwrap().log().unwrap();
            assert_eq!(star, oracle, "universal table wrong at degree {n}");
        }
    }

    #[test]
    fn star_unit_and_inverse() {
        let alphabet = GeneratorAlphabet::unit_degrees(&["a", "b"]).unwrap();
        let mut rng = SeededRng::new(3);
        for _ in 0..5 {
            let a = crate::sample::random_series(&mut rng, &alphabet, 5, 4, true);
            let zero = GradedSeries::zero(alphabet.clone(), 5);
            assert_eq!(bch_star_series(&a, &zero, 5).unwrap(), a);
            assert_eq!(bch_star_series(&zero, &a, 5).unwrap(), a);
            assert!(bch_star_series(&a, &a.neg(), 5).unwrap().is_zero());
        }
    }

    #[test]
    fn star_on_random_series_matches_group_law() {
        let alphabet = GeneratorAlphabet::unit_degrees(&["a", "b"]).unwrap();
        let mut rng = SeededRng::new(4);
        for _ in 0..8 {
            let a = crate::sample::random_series(&mut rng, &alphabet, 6, 3, true);
            let b = crate::sample::random_series(&mut rng, &alphabet, 6, 3, true);
            let star = bch_star_series(&a, &b, 6).unwrap();
            let grp = a.exp().unwrap().mul(&b.exp().unwrap()).unwrap().log().unwrap();
            assert_eq!(star, grp);
        }
    }

    #[test]
    fn abelian_degeneration() {
        struct ZeroBracket(Arc<GeneratorAlphabet>);
        impl BchCarrier for ZeroBracket {
            type Elem = GradedSeries;
            fn zero(&self) -> GradedSeries {
                GradedSeries::zero(self.0.clone(), 5)
            }
            fn add(&self, a: &GradedSeries, b: &GradedSeries) -> Result<GradedSeries> {
                a.add(b)
            }
            fn scale(&self, a: &GradedSeries, c: &Scalar) -> GradedSeries {
                a.scalar_mul(c)
            }
            fn bracket(&self, _: &GradedSeries, _: &GradedSeries) -> Result<GradedSeries> {
                Ok(self.zero())
            }
        }
        let alphabet = GeneratorAlphabet::unit_degrees(&["a", "b"]).unwrap();
        let carrier = ZeroBracket(alphabet.clone());
        let mut rng = SeededRng::new(5);
        for _ in 0..5 {
            let a = crate::sample::random_series(&mut rng, &alphabet, 5, 4, true);
            let b = crate::sample::random_series(&mut rng, &alphabet, 5, 4, true);
            let star = bch_star(&carrier, &a, &b, 5).unwrap();
            assert_eq!(star, a.add(&b).unwrap());
        }
    }

    #[test]
    fn associativity_within_truncation() {
        // commutator carrier on T_3 plus the free-series carrier
        let t3 = crate::dk::DkAlgebra::get(3).unwrap();
        let carrier = TnCommutator::new(&t3, 5);
        let mut rng = SeededRng::new(6);
        for _ in 0..3 {
            let raw = |rng: &mut SeededRng| {
                let s = crate::sample::random_series(rng, t3.alphabet(), 5, 3, true);
                t3.normal_form(&s).unwrap()
            };
            let a = raw(&mut rng);
            let b = raw(&mut rng);
            let c = raw(&mut rng);
            let ab_c = bch_star(&carrier, &bch_star(&carrier, &a, &b, 5).unwrap(), &c, 5).unwrap();
            let a_bc = bch_star(&carrier, &a, &bch_star(&carrier, &b, &c, 5).unwrap(), 5).unwrap();
            assert_eq!(ab_c, a_bc, "star not associative on T_3");
        }
    }

    #[test]
    fn naturality_under_insertion() {
        // insertion morphisms preserve the commutator, so they commute with star
        let t2 = crate::dk::DkAlgebra::get(2).unwrap();
        let t3 = crate::dk::DkAlgebra::get(3).unwrap();
        let c2 = TnCommutator::new(&t2, 5);
        let c3 = TnCommutator::new(&t3, 5);
        let mut rng = SeededRng::new(7);
        let blocks = vec![vec![1u8, 3], vec![2]];
        for _ in 0..4 {
            let a = t2
                .normal_form(&crate::sample::random_series(&mut rng, t2.alphabet(), 5, 3, true))
                .unwrap();
            let b = t2
                .normal_form(&crate::sample::random_series(&mut rng, t2.alphabet(), 5, 3, true))
                .unwrap();
            let lhs = bch_star(&c2, &a, &b, 5).unwrap().insertion(&blocks, 3).unwrap();
            let rhs = bch_star(
                &c3,
                &a.insertion(&blocks, 3).unwrap(),
                &b.insertion(&blocks, 3).unwrap(),
                5,
            )
            .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn degree_guard() {
        assert!(bch_table(9).is_err());
        assert!(bch_table(8).is_ok());
    }
}
