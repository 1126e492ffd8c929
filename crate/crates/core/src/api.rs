//! JSON request runner shared by the command-line binary and the C ABI.
//!
//! A request is a JSON object with a `command` field and inline payloads
//! (series, instances, tensors). The response echoes the effective
//! configuration, carries a machine-readable result, and classifies the
//! outcome for the process exit code: 0 for success/zero residual, 1 for a
//! nonzero residual or broken contract, 2 for usage errors.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::associator::{
    canonicalize_twist, duality_residual, extend_associator, hexagon_residuals, lieify,
    lieify_report, pentagon_residual, twist_apply, AssociatorCandidate, ExtendFlags, TwistT2,
};
use crate::dk::{AltNormalization, DkAlgebra, TnElement};
use crate::error::{Error, Result};
use crate::poisson::{self, Metric, MSlots, SymTensor};
use crate::qhque::{random_u_element, LieAlgebraSpec, QhqueInstance, Tensor};
use crate::sample::SeededRng;
use crate::scalar::format_scalar;
use crate::tree::PlanarTree;
use crate::treecalc::{
    admissibilize, coherence_element, coherence_verify, multiplication_identity_residual,
    symbol_map, uprime_report, uprime_report_json, DeltaEvaluator,
};

/// Outcome of one request: suggested exit code plus the response body.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit: i32,
    pub body: Value,
}

pub fn run_request(request: &Value) -> Outcome {
    let command = match request.get("command").and_then(Value::as_str) {
        Some(c) => c.to_string(),
        None => {
            return usage_error("request is missing the `command` field");
        }
    };
    let result = dispatch(&command, request);
    match result {
        Ok((status, config, result)) => {
            let exit = if status == "ok" { 0 } else { 1 };
            let mut body = Map::new();
            body.insert("command".into(), json!(command));
            body.insert("config".into(), config);
            body.insert("status".into(), json!(status));
            body.insert("result".into(), result);
            Outcome {
                exit,
                body: Value::Object(body),
            }
        }
        Err(err) => {
            let (exit, kind) = match &err {
                Error::Parse(_) => (2, "parse"),
                Error::Unsupported(_) => (2, "unsupported"),
                Error::Structural(_) => (1, "structural"),
                Error::Domain(_) => (1, "domain"),
                Error::ContractViolation(_) => (1, "contract-violation"),
            };
            Outcome {
                exit,
                body: json!({
                    "command": command,
                    "status": "error",
                    "error": { "kind": kind, "message": format!("{err}") },
                }),
            }
        }
    }
}

fn usage_error(message: &str) -> Outcome {
    Outcome {
        exit: 2,
        body: json!({
            "status": "error",
            "error": { "kind": "usage", "message": message },
        }),
    }
}

type CommandResult = Result<(&'static str, Value, Value)>;

fn dispatch(command: &str, request: &Value) -> CommandResult {
    match command {
        "pentagon" => cmd_pentagon(request),
        "hexagon" => cmd_hexagon(request),
        "twist" => cmd_twist(request),
        "lieify" => cmd_lieify(request),
        "canonicalize" => cmd_canonicalize(request),
        "extend" => cmd_extend(request),
        "dk-dim" => cmd_dk_dim(request),
        "cohochschild" => cmd_cohochschild(request),
        "bch" => cmd_bch(request),
        "trees" => cmd_trees(request),
        "delta" => cmd_delta(request),
        "prop14" => cmd_prop14(request),
        "uprime" => cmd_uprime(request),
        "symbol" => cmd_symbol(request),
        "coherence" => cmd_coherence(request),
        "admissibilize" => cmd_admissibilize(request),
        "poisson-pentagon" => cmd_poisson_pentagon(request),
        "equalize" => cmd_equalize(request),
        "eval-assoc" => cmd_eval_assoc(request),
        "reduce" => cmd_reduce(request),
        other => Err(Error::parse(format!("unknown command `{other}`"))),
    }
}

// ---- request helpers -------------------------------------------------

fn need<'v>(request: &'v Value, field: &str) -> Result<&'v Value> {
    request
        .get(field)
        .ok_or_else(|| Error::parse(format!("request is missing `{field}`")))
}

fn get_u32(request: &Value, field: &str, default: u32) -> Result<u32> {
    match request.get(field) {
        None => Ok(default),
        Some(v) => v
            .as_u64()
            .map(|x| x as u32)
            .ok_or_else(|| Error::parse(format!("`{field}` must be a number"))),
    }
}

fn get_u64(request: &Value, field: &str, default: u64) -> Result<u64> {
    match request.get(field) {
        None => Ok(default),
        Some(v) => v
            .as_u64()
            .ok_or_else(|| Error::parse(format!("`{field}` must be a number"))),
    }
}

fn get_bool(request: &Value, field: &str, default: bool) -> Result<bool> {
    match request.get(field) {
        None => Ok(default),
        Some(v) => v
            .as_bool()
            .ok_or_else(|| Error::parse(format!("`{field}` must be a boolean"))),
    }
}

fn associator_arg(request: &Value) -> Result<AssociatorCandidate> {
    AssociatorCandidate::from_json(need(request, "associator")?)
}

fn twist_arg(request: &Value) -> Result<TwistT2> {
    TwistT2::from_json(need(request, "twist")?)
}

fn tn_report(x: &TnElement) -> Value {
    json!({
        "n": x.strands(),
        "is_zero": x.is_zero(),
        "text": x.series().to_text(),
        "json": x.to_json(),
    })
}

fn alt_normalization(request: &Value) -> Result<AltNormalization> {
    match request.get("alt_normalization").and_then(Value::as_str) {
        None | Some("averaged") => Ok(AltNormalization::Averaged),
        Some("signed-sum") => Ok(AltNormalization::SignedSum),
        Some(other) => Err(Error::parse(format!(
            "unknown alt normalization `{other}` (expected `averaged` or `signed-sum`)"
        ))),
    }
}

fn instance_arg(request: &Value) -> Result<(Arc<QhqueInstance>, Value)> {
    let spec = need(request, "instance")?;
    let g = LieAlgebraSpec::from_json(spec)?;
    let hbar_cap = get_u32(spec, "hbar_cap", 4)?;
    let pbw_cap = get_u32(spec, "pbw_cap", 4)?;
    let mut instance = QhqueInstance::hopf(g.clone(), hbar_cap, pbw_cap)?;
    if let Some(twist_json) = spec.get("coproduct_twist") {
        let f = Tensor::from_json(g.clone(), twist_json)?;
        instance = instance.twist(&f)?;
    }
    if let Some(phi_json) = spec.get("phi") {
        let phi = Tensor::from_json(g.clone(), phi_json)?;
        instance = QhqueInstance::new(
            g.clone(),
            hbar_cap,
            pbw_cap,
            (0..g.dim() as u16)
                .map(|i| {
                    let x = instance.generator(i)?;
                    instance.delta_slot(&x, 0)
                })
                .collect::<Result<Vec<_>>>()?,
            phi,
        )?;
    }
    let config = json!({
        "basis": g.names(),
        "hbar_cap": hbar_cap,
        "pbw_cap": pbw_cap,
        "twisted": spec.get("coproduct_twist").is_some(),
        "explicit_phi": spec.get("phi").is_some(),
    });
    Ok((instance, config))
}

fn sym_args(request: &Value) -> Result<Arc<LieAlgebraSpec>> {
    LieAlgebraSpec::from_json(need(request, "g")?)
}

// ---- associator pipeline ----------------------------------------------

fn cmd_pentagon(request: &Value) -> CommandResult {
    let phi = associator_arg(request)?;
    let residual = pentagon_residual(&phi)?;
    let status = if residual.is_zero() { "ok" } else { "nonzero_residual" };
    Ok((
        status,
        json!({ "N": phi.truncation() }),
        json!({ "residual": tn_report(&residual) }),
    ))
}

fn cmd_hexagon(request: &Value) -> CommandResult {
    let phi = associator_arg(request)?;
    let (h1, h2) = hexagon_residuals(&phi)?;
    let duality = duality_residual(&phi)?;
    let status = if h1.is_zero() && h2.is_zero() { "ok" } else { "nonzero_residual" };
    Ok((
        status,
        json!({ "N": phi.truncation() }),
        json!({
            "first": tn_report(&h1),
            "second": tn_report(&h2),
            "duality": tn_report(&duality),
        }),
    ))
}

fn cmd_twist(request: &Value) -> CommandResult {
    let phi = associator_arg(request)?;
    let f = twist_arg(request)?;
    let twisted = twist_apply(&f, &phi)?;
    Ok((
        "ok",
        json!({ "N": phi.truncation() }),
        json!({ "associator": twisted.to_json() }),
    ))
}

fn cmd_lieify(request: &Value) -> CommandResult {
    let phi = associator_arg(request)?;
    // the reported per-degree coefficient follows the chosen sign
    // convention; the algorithm itself is unaffected
    let sign_minus = match request.get("solve_beta_sign").and_then(Value::as_str) {
        None | Some("plus") => false,
        Some("minus") => true,
        Some(other) => {
            return Err(Error::parse(format!(
                "unknown solve_beta_sign `{other}` (expected `plus` or `minus`)"
            )))
        }
    };
    let mut result = lieify(&phi)?;
    if sign_minus {
        for step in &mut result.steps {
            if let Some(mu) = &mut step.mu {
                *mu = -mu.clone();
            }
        }
    }
    let canonical = canonicalize_twist(&result.twist)?;
    let status = if result.log_is_lie && result.twist_reproduces {
        "ok"
    } else {
        "nonzero_residual"
    };
    Ok((
        status,
        json!({
            "N": phi.truncation(),
            "solve_beta_sign": if sign_minus { "minus" } else { "plus" },
        }),
        json!({
            "twist": result.twist.to_json(),
            "twist_canonical": canonical.to_json(),
            "associator": result.phi_lie.to_json(),
            "certificate": lieify_report(&result),
        }),
    ))
}

fn cmd_canonicalize(request: &Value) -> CommandResult {
    let f = twist_arg(request)?;
    let canonical = canonicalize_twist(&f)?;
    Ok((
        "ok",
        json!({ "N": f.truncation() }),
        json!({ "twist": canonical.to_json() }),
    ))
}

fn cmd_extend(request: &Value) -> CommandResult {
    let mut phi = associator_arg(request)?;
    let from = get_u32(request, "from_degree", 1)?;
    let to = get_u32(request, "to_degree", phi.truncation())?;
    let flags = ExtendFlags {
        hexagons: get_bool(request, "hexagons", false)?,
        duality: get_bool(request, "duality", false)?,
        lie: get_bool(request, "lie", false)?,
    };
    let mut degrees = Vec::new();
    let mut solvable = true;
    for d in from..to {
        match extend_associator(&phi, d, flags)? {
            None => {
                degrees.push(json!({ "degree": d + 1, "solvable": false }));
                solvable = false;
                break;
            }
            Some(ext) => {
                let t3 = DkAlgebra::get(3)?;
                let new_log = t3.normal_form(
                    &phi.log()
                        .series()
                        .with_truncation(phi.truncation())
                        .add(&ext.particular.series().with_truncation(phi.truncation()))?,
                )?;
                degrees.push(json!({
                    "degree": d + 1,
                    "solvable": true,
                    "kernel_dimension": ext.kernel.len(),
                    "kernel": ext.kernel.iter().map(|k| k.series().to_text()).collect::<Vec<_>>(),
                    "particular": ext.particular.series().to_text(),
                }));
                phi = AssociatorCandidate::from_log(new_log)?;
            }
        }
    }
    Ok((
        "ok",
        json!({
            "from_degree": from,
            "to_degree": to,
            "hexagons": flags.hexagons,
            "duality": flags.duality,
            "lie": flags.lie,
        }),
        json!({
            "solvable": solvable,
            "degrees": degrees,
            "associator": phi.to_json(),
        }),
    ))
}

// ---- dk utilities -------------------------------------------------------

fn cmd_dk_dim(request: &Value) -> CommandResult {
    let n = get_u32(request, "n", 3)? as u8;
    let max = get_u32(request, "max", 6)?;
    let algebra = DkAlgebra::get(n)?;
    let dims: Vec<usize> = (1..=max).map(|d| algebra.graded_dimension(d)).collect();
    Ok((
        "ok",
        json!({ "n": n, "max": max }),
        json!({ "dimensions": dims }),
    ))
}

fn cmd_cohochschild(request: &Value) -> CommandResult {
    let carrier = request
        .get("carrier")
        .and_then(Value::as_str)
        .unwrap_or("dk");
    match carrier {
        "dk" => {
            let x = TnElement::from_json(need(request, "element")?)?;
            let d = x.cohochschild_d()?;
            Ok((
                "ok",
                json!({ "carrier": "dk", "n": x.strands() }),
                json!({ "image": tn_report(&d) }),
            ))
        }
        "sym" => {
            let g = sym_args(request)?;
            let x = SymTensor::from_json(g, need(request, "element")?)?;
            let d = poisson::sym_cohochschild_d(&x)?;
            Ok((
                "ok",
                json!({ "carrier": "sym", "arity": x.arity() }),
                json!({ "image": d.to_json() }),
            ))
        }
        other => Err(Error::parse(format!("unknown carrier `{other}`"))),
    }
}

fn cmd_bch(request: &Value) -> CommandResult {
    let degree = get_u32(request, "degree", 6)?;
    let table = crate::cbh::bch_table(degree)?;
    let alphabet = crate::alphabet::GeneratorAlphabet::unit_degrees(&["a", "b"])?;
    let terms: Vec<Value> = table
        .terms()
        .iter()
        .map(|(d, w, c)| {
            json!({
                "degree": d,
                "pattern": w.render(&alphabet),
                "coeff": format_scalar(c),
            })
        })
        .collect();
    let mut result = Map::new();
    result.insert("table".into(), Value::Array(terms));
    if let (Some(a_json), Some(b_json)) = (request.get("a"), request.get("b")) {
        let a = TnElement::from_json(a_json)?;
        let b = TnElement::from_json(b_json)?;
        if a.strands() != b.strands() {
            return Err(Error::structural("star arguments in different T_n"));
        }
        let algebra = DkAlgebra::get(a.strands())?;
        let carrier = crate::cbh::TnCommutator::new(&algebra, a.truncation());
        let star = crate::cbh::bch_star(&carrier, &a, &b, degree)?;
        result.insert("star".into(), tn_report(&star));
    }
    Ok((
        "ok",
        json!({ "degree": degree }),
        Value::Object(result),
    ))
}

fn cmd_trees(request: &Value) -> CommandResult {
    let n = get_u32(request, "n", 4)? as usize;
    let trees = PlanarTree::enumerate(n)?;
    let mut result = Map::new();
    result.insert("count".into(), json!(trees.len()));
    result.insert(
        "trees".into(),
        Value::Array(trees.iter().map(|t| json!(t.render())).collect()),
    );
    if let Some(leaves) = request.get("extract") {
        let set: BTreeSet<usize> = leaves
            .as_array()
            .ok_or_else(|| Error::parse("`extract` must be an array of leaf numbers"))?
            .iter()
            .map(|v| {
                v.as_u64()
                    .map(|x| x as usize)
                    .ok_or_else(|| Error::parse("leaf numbers must be integers"))
            })
            .collect::<Result<_>>()?;
        let tree = match request.get("tree").and_then(Value::as_str) {
            Some(text) => PlanarTree::parse(text)?,
            None => PlanarTree::left_comb(n)?,
        };
        result.insert("extracted".into(), json!(tree.extract(&set)?.render()));
    }
    Ok(("ok", json!({ "n": n }), Value::Object(result)))
}

// ---- tree calculus -------------------------------------------------------

fn cmd_delta(request: &Value) -> CommandResult {
    let (instance, config) = instance_arg(request)?;
    let x = Tensor::from_json(instance.g().clone(), need(request, "element")?)?;
    let tree = PlanarTree::parse(
        need(request, "tree")?
            .as_str()
            .ok_or_else(|| Error::parse("`tree` must be a string"))?,
    )?;
    let ev = DeltaEvaluator::new(instance);
    let value = ev.delta_tree(&x, &tree)?;
    Ok((
        "ok",
        config,
        json!({
            "tree": tree.render(),
            "value": value.to_json(),
            "hbar_valuation": value.hbar_valuation(),
        }),
    ))
}

fn cmd_prop14(request: &Value) -> CommandResult {
    let (instance, instance_config) = instance_arg(request)?;
    let pairs = get_u64(request, "pairs", 100)?;
    let tree_max = get_u32(request, "tree_bound", 4)? as usize;
    let seed = get_u64(request, "seed", 0)?;
    let max_deg = get_u32(request, "max_deg", instance.deg_cap() / 2)?;
    let max_hbar = get_u32(request, "hbar_cap", 1)?;
    let mut rng = SeededRng::new(seed);
    let ev = DeltaEvaluator::new(instance.clone());
    let trees: Vec<PlanarTree> = (0..=tree_max)
        .map(PlanarTree::enumerate)
        .collect::<Result<Vec<_>>>()?
        .concat();
    let mut checked = 0u64;
    let mut failures = Vec::new();
    for _ in 0..pairs {
        let x = random_u_element(
            &mut rng,
            instance.g(),
            instance.hbar_cap(),
            instance.deg_cap(),
            2,
            max_deg,
            max_hbar,
        );
        let y = random_u_element(
            &mut rng,
            instance.g(),
            instance.hbar_cap(),
            instance.deg_cap(),
            2,
            max_deg,
            max_hbar,
        );
        for tree in &trees {
            let residual = multiplication_identity_residual(&ev, &x, &y, tree)?;
            checked += 1;
            if !residual.is_zero() {
                failures.push(json!({
                    "tree": tree.render(),
                    "x": x.to_json(),
                    "y": y.to_json(),
                }));
            }
        }
    }
    let status = if failures.is_empty() { "ok" } else { "nonzero_residual" };
    Ok((
        status,
        json!({
            "instance": instance_config,
            "pairs": pairs,
            "tree_bound": tree_max,
            "seed": seed,
            "max_deg": max_deg,
            "max_hbar": max_hbar,
        }),
        json!({
            "checks": checked,
            "all_zero": failures.is_empty(),
            "failures": failures,
        }),
    ))
}

fn cmd_uprime(request: &Value) -> CommandResult {
    let (instance, config) = instance_arg(request)?;
    let x = Tensor::from_json(instance.g().clone(), need(request, "element")?)?;
    let tree_bound = get_u32(request, "tree_bound", 3)? as usize;
    let n_bound = get_u32(request, "n_bound", 2)?;
    let ev = DeltaEvaluator::new(instance);
    let report = uprime_report(&ev, &x, tree_bound, n_bound)?;
    Ok((
        "ok",
        json!({ "instance": config, "tree_bound": tree_bound, "n_bound": n_bound }),
        uprime_report_json(&report),
    ))
}

fn cmd_symbol(request: &Value) -> CommandResult {
    let (instance, config) = instance_arg(request)?;
    let x = Tensor::from_json(instance.g().clone(), need(request, "element")?)?;
    let n = get_u32(request, "n", 1)?;
    let ev = DeltaEvaluator::new(instance);
    let symbol = symbol_map(&ev, &x, n)?;
    Ok((
        "ok",
        json!({ "instance": config, "n": n }),
        json!({ "symbol": symbol.to_json() }),
    ))
}

fn cmd_coherence(request: &Value) -> CommandResult {
    let (instance, config) = instance_arg(request)?;
    let n = get_u32(request, "n", 3)? as usize;
    let seed = get_u64(request, "seed", 0)?;
    let samples = get_u64(request, "verify_samples", 2)?;
    let ev = DeltaEvaluator::new(instance.clone());
    let trees = PlanarTree::enumerate(n)?;
    let mut rng = SeededRng::new(seed);
    let sample: Vec<Tensor> = (0..samples)
        .map(|_| {
            random_u_element(
                &mut rng,
                instance.g(),
                instance.hbar_cap(),
                instance.deg_cap(),
                2,
                2,
                1,
            )
        })
        .collect();
    let (p, p0) = match (
        request.get("p").and_then(Value::as_str),
        request.get("p0").and_then(Value::as_str),
    ) {
        (Some(p), Some(p0)) => (PlanarTree::parse(p)?, PlanarTree::parse(p0)?),
        _ => (
            trees.last().expect("nonempty").clone(),
            trees.first().expect("nonempty").clone(),
        ),
    };
    let element = coherence_element(&ev, &p, &p0)?;
    let conjugation_ok = coherence_verify(&ev, &p, &p0, &element, &sample)?;
    // transitivity across a third tree
    let mut transitivity_ok = true;
    for q in &trees {
        let direct = coherence_element(&ev, &p, &p0)?;
        let via = coherence_element(&ev, &p, q)?.mul(&coherence_element(&ev, q, &p0)?)?;
        transitivity_ok &= direct == via;
    }
    let status = if conjugation_ok && transitivity_ok { "ok" } else { "nonzero_residual" };
    Ok((
        status,
        json!({
            "instance": config,
            "n": n,
            "p": p.render(),
            "p0": p0.render(),
            "seed": seed,
            "verify_samples": samples,
        }),
        json!({
            "element": element.to_json(),
            "conjugation_verified": conjugation_ok,
            "transitivity_verified": transitivity_ok,
        }),
    ))
}

fn cmd_admissibilize(request: &Value) -> CommandResult {
    let (instance, config) = instance_arg(request)?;
    let max_total_degree = get_u32(request, "max_total_degree", 4)?;
    let outcome = admissibilize(instance, max_total_degree)?;
    let stages: Vec<Value> = outcome
        .stages
        .iter()
        .map(|s| {
            json!({
                "total_degree": s.total_degree,
                "compositions": s.compositions,
                "obstruction_zero": s.obstruction_zero,
                "d_closed": s.d_closed,
                "solved": s.solved,
            })
        })
        .collect();
    let status = if outcome.certified { "ok" } else { "nonzero_residual" };
    Ok((
        status,
        json!({ "instance": config, "max_total_degree": max_total_degree }),
        json!({
            "stages": stages,
            "twists": outcome.twists.iter().map(Tensor::to_json).collect::<Vec<_>>(),
            "certified": outcome.certified,
        }),
    ))
}

// ---- poisson ------------------------------------------------------------

fn cmd_poisson_pentagon(request: &Value) -> CommandResult {
    let g = sym_args(request)?;
    let phi = SymTensor::from_json(g.clone(), need(request, "phi")?)?;
    let twist = request
        .get("coproduct_twist")
        .map(|v| SymTensor::from_json(g.clone(), v))
        .transpose()?;
    let residual = poisson::drinfeld_pentagon_residual(&phi, twist.as_ref())?;
    let status = if residual.is_zero() { "ok" } else { "nonzero_residual" };
    Ok((
        status,
        json!({ "basis": g.names(), "degree_cap": phi.degree_cap() }),
        json!({ "residual": residual.to_json(), "is_zero": residual.is_zero() }),
    ))
}

fn cmd_equalize(request: &Value) -> CommandResult {
    let g = sym_args(request)?;
    let phi1 = SymTensor::from_json(g.clone(), need(request, "phi1")?)?;
    let phi2 = SymTensor::from_json(g.clone(), need(request, "phi2")?)?;
    let slots = match request.get("idm_slots").and_then(Value::as_str) {
        None | Some("1-2") => MSlots::OneTwo,
        Some("2-3") => MSlots::TwoThree,
        Some(other) => {
            return Err(Error::parse(format!(
                "unknown idm_slots `{other}` (expected `1-2` or `2-3`)"
            )))
        }
    };
    let outcome = poisson::equalize_lifts(&phi1, &phi2, slots)?;
    let status = if outcome.matches { "ok" } else { "nonzero_residual" };
    Ok((
        status,
        json!({
            "basis": g.names(),
            "degree_cap": phi1.degree_cap(),
            "idm_slots": if slots == MSlots::OneTwo { "1-2" } else { "2-3" },
        }),
        json!({
            "twist": outcome.twist.to_json(),
            "stages": outcome
                .stages
                .iter()
                .map(|s| json!({ "degree": s.degree, "b_invariant": s.b_invariant }))
                .collect::<Vec<_>>(),
            "all_invariant": outcome.all_invariant,
            "matches": outcome.matches,
        }),
    ))
}

fn cmd_eval_assoc(request: &Value) -> CommandResult {
    let g = sym_args(request)?;
    let metric = Metric::from_json(g.clone(), need(request, "metric")?)?;
    let degree_cap = get_u32(request, "degree_cap", 5)?;
    // the series comes in as an associative series over {A, B}; it must be
    // a Lie element
    let two = crate::alphabet::GeneratorAlphabet::unit_degrees(&["A", "B"])?;
    let series = crate::series::GradedSeries::from_json(two.clone(), need(request, "series")?)?;
    let ops = crate::freelie::FreeLieOps::new(two);
    let (lie, residual) = crate::freelie::lie_project(&ops, &series)?;
    if !residual.is_zero() {
        return Err(Error::domain(
            "series is not a Lie element; evaluation needs a Lie series",
        ));
    }
    let value = poisson::eval_lie_series(&lie, &metric, degree_cap)?;
    Ok((
        "ok",
        json!({ "basis": g.names(), "degree_cap": degree_cap }),
        json!({ "value": value.to_json(), "invariant": value.is_invariant()? }),
    ))
}

fn cmd_reduce(request: &Value) -> CommandResult {
    let g = sym_args(request)?;
    let phi = SymTensor::from_json(g.clone(), need(request, "phi")?)?;
    let twist = request
        .get("coproduct_twist")
        .map(|v| SymTensor::from_json(g.clone(), v))
        .transpose()?;
    let norm = alt_normalization(request)?;
    let mut reduction = poisson::classical_reduction(&phi, twist.as_ref())?;
    if norm == AltNormalization::SignedSum {
        // the signed-sum convention scales the alternating class by 3!
        for c in &mut reduction.phi {
            *c *= crate::scalar::int(6);
        }
    }
    let mu: Vec<Value> = reduction
        .mu
        .iter()
        .map(|((a, b), row)| {
            json!({
                "pair": [g.name(*a), g.name(*b)],
                "bracket": row.iter().map(format_scalar).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok((
        "ok",
        json!({
            "basis": g.names(),
            "alt_normalization": if norm == AltNormalization::Averaged { "averaged" } else { "signed-sum" },
        }),
        json!({
            "mu": mu,
            "delta": reduction
                .delta
                .iter()
                .map(|row| row.iter().map(format_scalar).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "phi": reduction.phi.iter().map(format_scalar).collect::<Vec<_>>(),
            "phi_invariant": reduction.phi_invariant,
        }),
    ))
}

/// Plain-text rendering of a response for `--pretty`.
pub fn render_pretty(value: &Value) -> String {
    let mut out = String::new();
    fn rec(value: &Value, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match value {
            Value::Object(map) => {
                for (k, v) in map {
                    match v {
                        Value::Object(_) | Value::Array(_) => {
                            out.push_str(&format!("{pad}{k}:\n"));
                            rec(v, indent + 1, out);
                        }
                        _ => out.push_str(&format!("{pad}{k}: {v}\n")),
                    }
                }
            }
            Value::Array(items) => {
                for v in items {
                    match v {
                        Value::Object(_) | Value::Array(_) => {
                            out.push_str(&format!("{pad}-\n"));
                            rec(v, indent + 1, out);
                        }
                        _ => out.push_str(&format!("{pad}- {v}\n")),
                    }
                }
            }
            other => out.push_str(&format!("{pad}{other}\n")),
        }
    }
    rec(value, 0, &mut out);
    out
}
