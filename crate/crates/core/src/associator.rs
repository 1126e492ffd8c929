//! Pentagon and hexagon residuals, twisting, and the degree-by-degree
//! algorithm that twists any pentagon solution into the unique one with Lie
//! logarithm in its twist orbit.
//!
//! Conventions: group elements are stored by logarithm; residuals are
//! `log(RHS^{-1} LHS)`, so an equation holds within truncation exactly when
//! its residual vanishes. `solve_beta` solves `gamma + d(beta)` Lie (the
//! proposition's sign); the Lie-ification loop therefore twists by
//! `exp(-beta)` at each degree, since twisting by `exp(b)` shifts the top
//! degree of the logarithm by `-d(b)`.

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::dk::{DkAlgebra, GroupLikeTn, TnElement};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{format_scalar, Scalar};
use crate::series::GradedSeries;

/// A candidate associator: group-like element of `T_3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociatorCandidate {
    phi: GroupLikeTn,
}

/// A twist: group-like element of `T_2`, i.e. a one-variable series
/// `f(t^{1,2})` with constant term 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistT2 {
    f: GroupLikeTn,
}

impl AssociatorCandidate {
    pub fn one(truncation: u32) -> Result<Self> {
        let t3 = DkAlgebra::get(3)?;
        Ok(AssociatorCandidate {
            phi: GroupLikeTn::one(&t3, truncation),
        })
    }

    pub fn from_log(log: TnElement) -> Result<Self> {
        if log.strands() != 3 {
            return Err(Error::structural("associator logarithm must live in T_3"));
        }
        Ok(AssociatorCandidate {
            phi: GroupLikeTn::from_log(log)?,
        })
    }

    pub fn from_expanded(expanded: TnElement) -> Result<Self> {
        if expanded.strands() != 3 {
            return Err(Error::structural("associator must live in T_3"));
        }
        Ok(AssociatorCandidate {
            phi: GroupLikeTn::from_expanded(expanded)?,
        })
    }

    pub fn group(&self) -> &GroupLikeTn {
        &self.phi
    }

    pub fn log(&self) -> &TnElement {
        self.phi.log()
    }

    pub fn expanded(&self) -> &TnElement {
        self.phi.expanded()
    }

    pub fn truncation(&self) -> u32 {
        self.phi.truncation()
    }

    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("kind".into(), json!("associator"));
        if let Value::Object(rest) = self.expanded().to_json() {
            for (k, v) in rest {
                obj.insert(k, v);
            }
        }
        Value::Object(obj)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        match value.get("kind").and_then(Value::as_str) {
            Some("associator") => {}
            other => {
                return Err(Error::parse(format!(
                    "expected kind \"associator\", found {other:?}"
                )))
            }
        }
        Self::from_expanded(TnElement::from_json(value)?)
    }
}

impl TwistT2 {
    pub fn one(truncation: u32) -> Result<Self> {
        let t2 = DkAlgebra::get(2)?;
        Ok(TwistT2 {
            f: GroupLikeTn::one(&t2, truncation),
        })
    }

    pub fn from_log(log: TnElement) -> Result<Self> {
        if log.strands() != 2 {
            return Err(Error::structural("twist logarithm must live in T_2"));
        }
        Ok(TwistT2 {
            f: GroupLikeTn::from_log(log)?,
        })
    }

    pub fn from_expanded(expanded: TnElement) -> Result<Self> {
        if expanded.strands() != 2 {
            return Err(Error::structural("twist must live in T_2"));
        }
        Ok(TwistT2 {
            f: GroupLikeTn::from_expanded(expanded)?,
        })
    }

    /// exp(lambda t^{1,2}).
    pub fn isotropy(lambda: &Scalar, truncation: u32) -> Result<Self> {
        let t2 = DkAlgebra::get(2)?;
        let log = t2.generator(1, 2, truncation)?.scalar_mul(lambda);
        Self::from_log(log)
    }

    pub fn group(&self) -> &GroupLikeTn {
        &self.f
    }

    pub fn log(&self) -> &TnElement {
        self.f.log()
    }

    pub fn truncation(&self) -> u32 {
        self.f.truncation()
    }

    pub fn is_one(&self) -> bool {
        self.f.is_one()
    }

    /// `T_2` is commutative, so products add logarithms.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        Self::from_log(self.log().add(other.log())?)
    }

    pub fn inverse(&self) -> Result<Self> {
        Self::from_log(self.log().neg())
    }

    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("kind".into(), json!("twist"));
        if let Value::Object(rest) = self.f.expanded().to_json() {
            for (k, v) in rest {
                obj.insert(k, v);
            }
        }
        Value::Object(obj)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        match value.get("kind").and_then(Value::as_str) {
            Some("twist") => {}
            other => {
                return Err(Error::parse(format!(
                    "expected kind \"twist\", found {other:?}"
                )))
            }
        }
        Self::from_expanded(TnElement::from_json(value)?)
    }
}

fn ins(g: &GroupLikeTn, blocks: &[&[u8]], m: u8) -> Result<GroupLikeTn> {
    let blocks: Vec<Vec<u8>> = blocks.iter().map(|b| b.to_vec()).collect();
    g.insertion(&blocks, m)
}

/// log(RHS^{-1} LHS) of the pentagon equation, in `T_4` normal form.
pub fn pentagon_residual(phi: &AssociatorCandidate) -> Result<TnElement> {
    let g = phi.group();
    let lhs = ins(g, &[&[1], &[2], &[3, 4]], 4)?.mul(&ins(g, &[&[1, 2], &[3], &[4]], 4)?)?;
    let rhs = ins(g, &[&[2], &[3], &[4]], 4)?
        .mul(&ins(g, &[&[1], &[2, 3], &[4]], 4)?)?
        .mul(&ins(g, &[&[1], &[2], &[3]], 4)?)?;
    Ok(rhs.inverse()?.mul(&lhs)?.log().clone())
}

/// Both hexagon residuals (`log(RHS^{-1} LHS)` each), in `T_3`.
pub fn hexagon_residuals(phi: &AssociatorCandidate) -> Result<(TnElement, TnElement)> {
    let t3 = DkAlgebra::get(3)?;
    let n = phi.truncation();
    let g = phi.group();
    let half = crate::scalar::frac(1, 2);
    let e = |i: u8, j: u8| -> Result<GroupLikeTn> {
        GroupLikeTn::from_log(t3.generator(i, j, n)?.scalar_mul(&half))
    };
    let e13 = e(1, 3)?;
    let e23 = e(2, 3)?;
    let e12 = e(1, 2)?;
    let lhs1 = GroupLikeTn::from_log(
        t3.generator(1, 3, n)?
            .add(&t3.generator(2, 3, n)?)?
            .scalar_mul(&half),
    )?;
    let rhs1 = g
        .permute(&[3, 1, 2])?
        .mul(&e13)?
        .mul(&g.permute(&[1, 3, 2])?.inverse()?)?
        .mul(&e23)?
        .mul(g)?;
    let first = rhs1.inverse()?.mul(&lhs1)?.log().clone();
    let lhs2 = GroupLikeTn::from_log(
        t3.generator(1, 2, n)?
            .add(&t3.generator(1, 3, n)?)?
            .scalar_mul(&half),
    )?;
    let rhs2 = g
        .permute(&[2, 3, 1])?
        .inverse()?
        .mul(&e13)?
        .mul(&g.permute(&[2, 1, 3])?)?
        .mul(&e12)?
        .mul(&g.inverse()?)?;
    let second = rhs2.inverse()?.mul(&lhs2)?.log().clone();
    Ok((first, second))
}

/// log(Phi^{3,2,1} Phi); zero exactly when the duality condition holds.
pub fn duality_residual(phi: &AssociatorCandidate) -> Result<TnElement> {
    let mirrored = phi.group().permute(&[3, 2, 1])?;
    Ok(mirrored.mul(phi.group())?.log().clone())
}

/// The twist action `F^{2,3} F^{1,23} Phi (F^{1,2} F^{12,3})^{-1}`.
pub fn twist_apply(f: &TwistT2, phi: &AssociatorCandidate) -> Result<AssociatorCandidate> {
    let g = f.group();
    let f23 = ins(g, &[&[2], &[3]], 3)?;
    let f123 = ins(g, &[&[1], &[2, 3]], 3)?;
    let f12 = ins(g, &[&[1], &[2]], 3)?;
    let f12_3 = ins(g, &[&[1, 2], &[3]], 3)?;
    let result = f23
        .mul(&f123)?
        .mul(phi.group())?
        .mul(&f12.mul(&f12_3)?.inverse()?)?;
    Ok(AssociatorCandidate { phi: result })
}

/// Solves `gamma + d(beta)` Lie in `T_3` for homogeneous `gamma` of degree
/// `d`, with `beta = mu (t^{1,2})^d`. The solve is overdetermined with one
/// unknown; inconsistency means `gamma` broke the proposition's hypothesis.
pub fn solve_beta(gamma: &TnElement, d: u32) -> Result<TnElement> {
    if gamma.strands() != 3 {
        return Err(Error::structural("solve_beta expects an element of T_3"));
    }
    if gamma.series().terms().any(|(w, _)| w.degree() != d) {
        return Err(Error::domain(format!("gamma is not homogeneous of degree {d}")));
    }
    if !gamma.cohochschild_d()?.is_lie()? {
        return Err(Error::domain("d(gamma) is not Lie; hypothesis violated"));
    }
    let t2 = DkAlgebra::get(2)?;
    let n = gamma.truncation();
    let t12 = t2.generator(1, 2, n)?;
    let mut power = t2.one(n);
    for _ in 0..d {
        power = power.mul(&t12)?;
    }
    let gamma_residual = gamma.non_lie_residual()?;
    let image_residual = power.cohochschild_d()?.non_lie_residual()?;
    if image_residual.is_zero() {
        return if gamma_residual.is_zero() {
            Ok(t2.zero(n))
        } else {
            Err(Error::contract(
                "no twist direction available at this degree, but gamma is not Lie",
            ))
        };
    }
    // one-unknown exact solve: gamma_residual + mu * image_residual = 0
    let (w, c) = image_residual
        .series()
        .terms()
        .next()
        .map(|(w, c)| (w.clone(), c.clone()))
        .expect("nonzero");
    let mu = -(gamma_residual.series().coefficient(&w) / c);
    let combined = gamma_residual.add(&image_residual.scalar_mul(&mu))?;
    if !combined.is_zero() {
        return Err(Error::contract(format!(
            "overdetermined solve for beta failed at degree {d}"
        )));
    }
    Ok(power.scalar_mul(&mu))
}

/// One degree of the Lie-ification certificate.
#[derive(Debug, Clone)]
pub struct LieifyStep {
    pub degree: u32,
    pub already_lie: bool,
    pub mu: Option<Scalar>,
}

#[derive(Debug, Clone)]
pub struct LieificationResult {
    pub twist: TwistT2,
    pub phi_lie: AssociatorCandidate,
    pub steps: Vec<LieifyStep>,
    pub log_is_lie: bool,
    pub twist_reproduces: bool,
}

/// Twists a pentagon solution into the Lie-logarithm representative of its
/// orbit, degree by degree, returning the accumulated twist and a
/// per-degree certificate.
pub fn lieify(phi: &AssociatorCandidate) -> Result<LieificationResult> {
    if !pentagon_residual(phi)?.is_zero() {
        return Err(Error::domain(
            "lieify requires a pentagon solution within truncation",
        ));
    }
    let n = phi.truncation();
    let mut current = phi.clone();
    let mut twist = TwistT2::one(n)?;
    let mut steps = Vec::new();
    for degree in 2..=n {
        let gamma = current.log().degree_component(degree);
        let residual = gamma.non_lie_residual()?;
        if residual.is_zero() {
            steps.push(LieifyStep {
                degree,
                already_lie: true,
                mu: None,
            });
            continue;
        }
        let beta_plus = solve_beta(&gamma, degree)?;
        let mu = beta_plus
            .series()
            .terms()
            .next()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Scalar::zero);
        let step_twist = TwistT2::from_log(beta_plus.neg())?;
        current = twist_apply(&step_twist, &current)?;
        twist = twist.mul(&step_twist)?;
        steps.push(LieifyStep {
            degree,
            already_lie: false,
            mu: Some(mu),
        });
    }
    let log_is_lie = current.log().is_lie()?;
    let twist_reproduces = twist_apply(&twist, phi)? == current;
    if !log_is_lie {
        return Err(Error::contract(
            "lie-ification left a non-Lie residual; iteration is broken",
        ));
    }
    Ok(LieificationResult {
        twist,
        phi_lie: current,
        steps,
        log_is_lie,
        twist_reproduces,
    })
}

/// Kills the degree-1 part of the twist: the canonical representative of
/// its coset modulo the isotropy group `exp(lambda t^{1,2})`.
pub fn canonicalize_twist(f: &TwistT2) -> Result<TwistT2> {
    let t2 = DkAlgebra::get(2)?;
    let n = f.truncation();
    let t12 = t2.generator(1, 2, n)?;
    let lambda = f.log().degree_component(1).series().terms().next().map(|(_, c)| c.clone());
    match lambda {
        None => Ok(f.clone()),
        Some(l) => TwistT2::from_log(f.log().sub(&t12.scalar_mul(&l))?),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExtendFlags {
    pub hexagons: bool,
    pub duality: bool,
    pub lie: bool,
}

/// Affine space of degree-`(d+1)` extensions of a candidate whose residuals
/// vanish through degree `d`: `log Phi` gains `particular + span(kernel)`.
#[derive(Debug, Clone)]
pub struct Extension {
    pub degree: u32,
    pub particular: TnElement,
    pub kernel: Vec<TnElement>,
}

/// Solves the inhomogeneous linear system for the next degree of `log Phi`
/// under the pentagon equation and any flagged extra constraints. Returns
/// `None` when the system is inconsistent (reported, not an error).
pub fn extend_associator(
    phi: &AssociatorCandidate,
    through_degree: u32,
    flags: ExtendFlags,
) -> Result<Option<Extension>> {
    let d1 = through_degree + 1;
    let t3 = DkAlgebra::get(3)?;
    // work at truncation d+1: higher terms cannot affect the solve
    let base_log = t3.normal_form(&phi.log().series().with_truncation(d1))?;
    let base = AssociatorCandidate::from_log(base_log.clone())?;

    let basis: Vec<TnElement> = if flags.lie {
        t3.lie_basis(d1)
            .iter()
            .map(|w| {
                let terms: Vec<_> = t3
                    .lie_ops()
                    .bracket_expansion(w)
                    .iter()
                    .map(|(word, c)| (word.clone(), c.clone()))
                    .collect();
                t3.normal_form(&GradedSeries::from_terms(t3.alphabet().clone(), d1, terms))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let mut words = Vec::new();
        collect_degree_words(&t3, d1, &mut words);
        words
            .into_iter()
            .map(|w| {
                t3.normal_form(&GradedSeries::from_terms(
                    t3.alphabet().clone(),
                    d1,
                    [(w, Scalar::one())],
                ))
            })
            .collect::<Result<Vec<_>>>()?
    };

    // residual stack at the top degree, as a function of the unknown
    let residuals = |cand: &AssociatorCandidate| -> Result<Vec<TnElement>> {
        let mut out = vec![pentagon_residual(cand)?.degree_component(d1)];
        if flags.hexagons {
            let (h1, h2) = hexagon_residuals(cand)?;
            out.push(h1.degree_component(d1));
            out.push(h2.degree_component(d1));
        }
        if flags.duality {
            out.push(duality_residual(cand)?.degree_component(d1));
        }
        Ok(out)
    };
    let at = |x: Option<&TnElement>| -> Result<Vec<TnElement>> {
        let log = match x {
            None => base_log.clone(),
            Some(v) => base_log.add(v)?,
        };
        residuals(&AssociatorCandidate::from_log(log)?)
    };

    let r0 = at(None)?;
    let mut images = Vec::with_capacity(basis.len());
    for e in &basis {
        let re = at(Some(e))?;
        let diff: Vec<TnElement> = re
            .iter()
            .zip(&r0)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        images.push(diff);
    }
    let _ = base;

    // assemble coordinates over the union of words per residual slot
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    let mut rhs: Vec<Scalar> = Vec::new();
    for slot in 0..r0.len() {
        let mut words: std::collections::BTreeSet<crate::alphabet::Word> = r0[slot]
            .series()
            .terms()
            .map(|(w, _)| w.clone())
            .collect();
        for im in &images {
            words.extend(im[slot].series().terms().map(|(w, _)| w.clone()));
        }
        for w in words {
            let row: Vec<Scalar> = images
                .iter()
                .map(|im| im[slot].series().coefficient(&w))
                .collect();
            rows.push(row);
            rhs.push(-r0[slot].series().coefficient(&w));
        }
    }
    if rows.is_empty() {
        // no constraints at all: every extension works
        return Ok(Some(Extension {
            degree: d1,
            particular: t3.zero(d1),
            kernel: basis,
        }));
    }
    let matrix = linalg::QMatrix::from_rows(rows);
    let Some((particular, kernel)) = linalg::solve_affine(&matrix, &rhs) else {
        return Ok(None);
    };
    let combine = |coords: &[Scalar]| -> Result<TnElement> {
        let mut acc = t3.zero(d1);
        for (c, e) in coords.iter().zip(&basis) {
            if !c.is_zero() {
                acc = acc.add(&e.scalar_mul(c))?;
            }
        }
        Ok(acc)
    };
    Ok(Some(Extension {
        degree: d1,
        particular: combine(&particular)?,
        kernel: kernel
            .iter()
            .map(|v| combine(v))
            .collect::<Result<Vec<_>>>()?,
    }))
}

fn collect_degree_words(t3: &std::sync::Arc<DkAlgebra>, d: u32, out: &mut Vec<crate::alphabet::Word>) {
    // normal words of degree d: level sequence nonincreasing
    fn rec(
        t3: &DkAlgebra,
        letters: &mut Vec<u16>,
        remaining: u32,
        out: &mut Vec<crate::alphabet::Word>,
    ) {
        if remaining == 0 {
            out.push(t3.alphabet().word(letters.clone()));
            return;
        }
        let max_letter = match letters.last() {
            None => t3.alphabet().len() as u16,
            Some(&l) => {
                // next letter must not increase the level; letters are
                // level-major so this caps the index at the end of the
                // previous letter's level block
                let level = t3.pair_of(l).1;
                (0..t3.alphabet().len() as u16)
                    .filter(|&x| t3.pair_of(x).1 <= level)
                    .count() as u16
            }
        };
        for l in 0..max_letter {
            letters.push(l);
            rec(t3, letters, remaining - 1, out);
            letters.pop();
        }
    }
    rec(t3, &mut Vec::new(), d, out);
}

/// Random group-like twist with log supported in degrees 1..=N.
pub fn random_twist(rng: &mut crate::sample::SeededRng, truncation: u32) -> Result<TwistT2> {
    let t2 = DkAlgebra::get(2)?;
    let t12 = t2.generator(1, 2, truncation)?;
    let mut log = t2.zero(truncation);
    let mut power = t2.one(truncation);
    for _ in 1..=truncation {
        power = power.mul(&t12)?;
        log = log.add(&power.scalar_mul(&rng.scalar_or_zero()))?;
    }
    TwistT2::from_log(log)
}

/// Renders the certificate for reports.
pub fn lieify_report(result: &LieificationResult) -> Value {
    let steps: Vec<Value> = result
        .steps
        .iter()
        .map(|s| {
            json!({
                "degree": s.degree,
                "already_lie": s.already_lie,
                "mu": s.mu.as_ref().map(format_scalar),
            })
        })
        .collect();
    json!({
        "steps": steps,
        "log_is_lie": result.log_is_lie,
        "twist_reproduces_input": result.twist_reproduces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::SeededRng;

    #[test]
    fn trivial_associator_passes_pentagon() {
        let one = AssociatorCandidate::one(4).unwrap();
        assert!(pentagon_residual(&one).unwrap().is_zero());
    }

    #[test]
    fn coboundaries_satisfy_pentagon() {
        let mut rng = SeededRng::new(41);
        for _ in 0..3 {
            let f = random_twist(&mut rng, 5).unwrap();
            let phi = twist_apply(&f, &AssociatorCandidate::one(5).unwrap()).unwrap();
            assert!(pentagon_residual(&phi).unwrap().is_zero());
        }
    }

    #[test]
    fn junk_fails_pentagon() {
        // exp(t12 t23) is not group-like in the braided sense; its pentagon
        // residual must show up by degree 2
        let t3 = DkAlgebra::get(3).unwrap();
        let t12 = t3.generator(1, 2, 3).unwrap();
        let t23 = t3.generator(2, 3, 3).unwrap();
        let log = t12.mul(&t23).unwrap();
        let phi = AssociatorCandidate::from_log(log).unwrap();
        let residual = pentagon_residual(&phi).unwrap();
        assert!(!residual.degree_component(2).is_zero());
    }

    #[test]
    fn hexagons_of_trivial_associator() {
        let one = AssociatorCandidate::one(2).unwrap();
        let (h1, h2) = hexagon_residuals(&one).unwrap();
        assert!(h1.degree_component(1).is_zero());
        assert!(h2.degree_component(1).is_zero());
        assert!(!h1.degree_component(2).is_zero());
        assert!(!h2.degree_component(2).is_zero());
    }

    #[test]
    fn degree_two_hexagon_solution() {
        // Phi = exp(c [t12, t23]) with c from the one-unknown degree-2 solve
        let t3 = DkAlgebra::get(3).unwrap();
        let omega = t3
            .generator(1, 2, 2)
            .unwrap()
            .commutator(&t3.generator(2, 3, 2).unwrap())
            .unwrap();
        // scan the linear condition: residual(c) = r0 + c * slope
        let at = |c: Scalar| -> TnElement {
            let phi = AssociatorCandidate::from_log(omega.scalar_mul(&c)).unwrap();
            hexagon_residuals(&phi).unwrap().0.degree_component(2)
        };
        let r0 = at(crate::scalar::int(0));
        let r1 = at(crate::scalar::int(1));
        let slope = r1.sub(&r0).unwrap();
        let (w, s) = slope
            .series()
            .terms()
            .next()
            .map(|(w, c)| (w.clone(), c.clone()))
            .expect("nonzero slope");
        let c = -(r0.series().coefficient(&w) / s);
        assert_eq!(c, crate::scalar::frac(1, 24));
        assert!(at(c.clone()).is_zero());
        // and the second hexagon agrees on the same coefficient
        let phi = AssociatorCandidate::from_log(omega.scalar_mul(&c)).unwrap();
        let (_, h2) = hexagon_residuals(&phi).unwrap();
        assert!(h2.degree_component(2).is_zero());
    }

    #[test]
    fn twist_is_group_action() {
        let mut rng = SeededRng::new(43);
        let phi = twist_apply(
            &random_twist(&mut rng, 5).unwrap(),
            &AssociatorCandidate::one(5).unwrap(),
        )
        .unwrap();
        let f = random_twist(&mut rng, 5).unwrap();
        let g = random_twist(&mut rng, 5).unwrap();
        let one_twist = TwistT2::one(5).unwrap();
        assert_eq!(twist_apply(&one_twist, &phi).unwrap(), phi);
        let gf = g.mul(&f).unwrap();
        assert_eq!(
            twist_apply(&g, &twist_apply(&f, &phi).unwrap()).unwrap(),
            twist_apply(&gf, &phi).unwrap()
        );
        let back = twist_apply(&f.inverse().unwrap(), &twist_apply(&f, &phi).unwrap()).unwrap();
        assert_eq!(back, phi);
    }

    #[test]
    fn isotropy_fixes_pentagon_solutions() {
        let mut rng = SeededRng::new(44);
        let phi = twist_apply(
            &random_twist(&mut rng, 5).unwrap(),
            &AssociatorCandidate::one(5).unwrap(),
        )
        .unwrap();
        for lambda in [crate::scalar::int(5), crate::scalar::frac(-3, 7)] {
            let f = TwistT2::isotropy(&lambda, 5).unwrap();
            assert_eq!(twist_apply(&f, &phi).unwrap(), phi);
        }
    }

    #[test]
    fn solve_beta_examples() {
        let t2 = DkAlgebra::get(2).unwrap();
        let t3 = DkAlgebra::get(3).unwrap();
        let t12 = t2.generator(1, 2, 4).unwrap();
        let sq = t12.mul(&t12).unwrap();
        // gamma already Lie -> beta = 0
        let omega = t3
            .generator(1, 2, 4)
            .unwrap()
            .commutator(&t3.generator(2, 3, 4).unwrap())
            .unwrap();
        assert!(solve_beta(&omega, 2).unwrap().is_zero());
        // gamma = d((t12)^2) -> beta = -(t12)^2
        let gamma = sq.cohochschild_d().unwrap();
        let beta = solve_beta(&gamma, 2).unwrap();
        assert_eq!(beta, sq.neg());
        // gamma = (1/8)omega + 3 d((t12)^2) -> mu = -3
        let gamma = omega
            .scalar_mul(&crate::scalar::frac(1, 8))
            .add(&sq.cohochschild_d().unwrap().scalar_mul(&crate::scalar::int(3)))
            .unwrap();
        let beta = solve_beta(&gamma, 2).unwrap();
        assert_eq!(beta, sq.scalar_mul(&crate::scalar::int(-3)));
    }

    #[test]
    fn lieify_trivial_and_coboundary() {
        let one = AssociatorCandidate::one(5).unwrap();
        let res = lieify(&one).unwrap();
        assert!(res.twist.is_one());
        assert_eq!(res.phi_lie, one);

        let mut rng = SeededRng::new(45);
        let f = random_twist(&mut rng, 5).unwrap();
        let phi = twist_apply(&f, &one).unwrap();
        let res = lieify(&phi).unwrap();
        assert!(res.twist_reproduces);
        assert_eq!(res.phi_lie, one, "coboundary must lieify back to 1");
        // recovered twist differs from F^{-1} by isotropy only
        let product = res.twist.mul(&f).unwrap();
        let canon = canonicalize_twist(&product).unwrap();
        assert!(canon.is_one());
    }

    #[test]
    fn canonicalize_examples() {
        let f = TwistT2::isotropy(&crate::scalar::int(5), 4).unwrap();
        assert!(canonicalize_twist(&f).unwrap().is_one());
        let mut rng = SeededRng::new(46);
        let g = random_twist(&mut rng, 4).unwrap();
        let shifted = g
            .mul(&TwistT2::isotropy(&crate::scalar::frac(2, 3), 4).unwrap())
            .unwrap();
        assert_eq!(
            canonicalize_twist(&g).unwrap(),
            canonicalize_twist(&shifted).unwrap()
        );
        assert!(canonicalize_twist(&g)
            .unwrap()
            .log()
            .degree_component(1)
            .is_zero());
    }

    #[test]
    fn extend_with_hexagons_pins_degree_two() {
        let one = AssociatorCandidate::one(1).unwrap();
        let ext = extend_associator(
            &one,
            1,
            ExtendFlags {
                hexagons: true,
                duality: false,
                lie: true,
            },
        )
        .unwrap()
        .expect("degree-2 extension exists");
        assert_eq!(ext.degree, 2);
        // the solution is c [t12, t23] with c = 1/24, up to kernel directions
        // that the hexagons kill entirely at this degree
        assert!(ext.kernel.is_empty(), "hexagons pin degree 2 uniquely");
        let t3 = DkAlgebra::get(3).unwrap();
        let omega = t3
            .generator(1, 2, 2)
            .unwrap()
            .commutator(&t3.generator(2, 3, 2).unwrap())
            .unwrap();
        assert_eq!(ext.particular, omega.scalar_mul(&crate::scalar::frac(1, 24)));
    }

    #[test]
    fn extend_with_duality_gives_self_dual_candidates() {
        let flags = ExtendFlags {
            hexagons: true,
            duality: true,
            lie: true,
        };
        let mut phi = AssociatorCandidate::one(1).unwrap();
        for d in 1..4 {
            let ext = extend_associator(&phi, d, flags)
                .unwrap()
                .expect("duality-constrained system solvable");
            let t3 = DkAlgebra::get(3).unwrap();
            let log = t3
                .normal_form(
                    &phi.log()
                        .series()
                        .with_truncation(d + 1)
                        .add(&ext.particular.series().with_truncation(d + 1))
                        .unwrap(),
                )
                .unwrap();
            phi = AssociatorCandidate::from_log(log).unwrap();
        }
        assert!(duality_residual(&phi).unwrap().is_zero());
        let (h1, h2) = hexagon_residuals(&phi).unwrap();
        assert!(h1.is_zero() && h2.is_zero());
        assert!(pentagon_residual(&phi).unwrap().is_zero());
        assert!(phi.log().is_lie().unwrap());
    }

    #[test]
    fn extend_pentagon_only_has_kernel() {
        let one = AssociatorCandidate::one(1).unwrap();
        let ext = extend_associator(
            &one,
            1,
            ExtendFlags {
                hexagons: false,
                duality: false,
                lie: true,
            },
        )
        .unwrap()
        .expect("pentagon-only extension exists");
        assert!(
            !ext.kernel.is_empty(),
            "pentagon-only degree-2 space contains the hexagon solution"
        );
        // extending by a kernel element keeps the pentagon residual zero
        let t3 = DkAlgebra::get(3).unwrap();
        let log = ext.particular.add(&ext.kernel[0]).unwrap();
        let phi = AssociatorCandidate::from_log(t3.normal_form(log.series()).unwrap()).unwrap();
        assert!(pentagon_residual(&phi).unwrap().degree_component(2).is_zero());
    }
}
