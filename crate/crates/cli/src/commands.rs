use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use num_complex::Complex;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use shiftlab::gauge::{modulus, phase_gauge, GaugeReal};
use shiftlab::gen::random_non_forkless_tree;
use shiftlab::hypo::{check_hyponormal, check_hyponormal_power, check_power_hyponormal_in, hip_k, make_counterexample, HipVerdict};
use shiftlab::moments::{backward_extend_moments, hankel_check, HankelKind, HankelVerdict, MomentExtension, MomentSeq};
use shiftlab::rational::{format_q, parse_q, to_f64};
use shiftlab::scalar::{format_f64, Scalar};
use shiftlab::subnormal::{check_subnormal, construct_backward_extension, join_at_depth, powerhypo_rooted_sum_extend, rooted_sum_extend};
use shiftlab::{AtomicMeasure, DirectedForest, Error, Node, VertexId, WeightSystem, WeightedShift, Q};

use crate::report::{
    forest_from, read_forest, read_json, read_shift, to_value, CmdResult, Failure, Outcome, FAILS, HOLDS, INTERNAL,
    STRUCTURAL,
};
use crate::{Cli, Command, ExtendCmd, ForestCmd, Mode, Property};

pub fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Forest(cmd) => forest(cmd),
        Command::Check { property, k, kmax, shift } => check(cli, *property, *k, *kmax, shift),
        Command::Extend(cmd) => extend(cmd),
        Command::Counterexample { tree, generate, v1 } => counterexample(cli, tree.as_deref(), *generate, v1.as_deref()),
        Command::Gauge { input } => gauge(cli, input),
        Command::Moments { input, k, n } => moments(input, *k, *n),
    }
}

fn forest_summary(f: &DirectedForest) -> Value {
    json!({
        "forest": to_value(f),
        "vertices": f.len(),
        "roots": f.roots(),
        "components": f.component_count(),
    })
}

fn forest(cmd: &ForestCmd) -> CmdResult {
    let result = match cmd {
        ForestCmd::Validate { forest } => {
            let f = read_forest(forest)?;
            let mut report = forest_summary(&f);
            report["valid"] = json!(true);
            return Ok(Outcome::new(HOLDS, report));
        }
        ForestCmd::Power { k, forest } => {
            if *k == 0 {
                return Err(Failure::Usage("power needs k >= 1".into()));
            }
            read_forest(forest)?.power(*k)
        }
        ForestCmd::RootedSum { root, trees } => {
            let trees = trees.iter().map(|p| read_forest(p)).collect::<Result<Vec<_>, _>>()?;
            DirectedForest::rooted_sum(&trees, root.as_str(), true)?
        }
        ForestCmd::Backward { k, tree } => read_forest(tree)?.backward_extend(*k)?,
        ForestCmd::Classify { forest } => {
            let f = read_forest(forest)?;
            let tailed: BTreeSet<VertexId> = f.childless().into_iter().collect();
            let classes = f
                .components()
                .iter()
                .map(|c| c.classify_forkless(&tailed.iter().filter(|v| c.contains(v)).cloned().collect()))
                .collect::<Result<Vec<_>, _>>()?;
            let roots: Vec<VertexId> = f.components().iter().map(|c| c.roots()[0].clone()).collect();
            return Ok(Outcome::new(HOLDS, json!({"roots": roots, "classes": classes})));
        }
    };
    let artifact = to_value(&result);
    Ok(Outcome::new(HOLDS, forest_summary(&result)).with_artifact(artifact))
}

fn verdict_code(v: &HipVerdict) -> u8 {
    match v {
        HipVerdict::Hyponormal => HOLDS,
        HipVerdict::NotHyponormal(_) => FAILS,
        HipVerdict::LeafObstruction(_) => STRUCTURAL,
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Exact => "exact",
        Mode::Float => "float",
    }
}

fn check(cli: &Cli, property: Property, k: usize, kmax: usize, path: &Path) -> CmdResult {
    let s = read_shift(path)?;
    let tol = cli.tolerance()?;
    match property {
        Property::Hyponormal => {
            if k == 0 {
                return Err(Failure::Usage("k must be at least 1".into()));
            }
            let (code, mut report) = match cli.mode {
                Mode::Exact => hyponormal_report::<Q>(&s, k, tol)?,
                Mode::Float => hyponormal_report::<f64>(&s, k, tol)?,
            };
            report["property"] = json!("hyponormal");
            report["mode"] = json!(mode_name(cli.mode));
            Ok(Outcome::new(code, report))
        }
        Property::PowerHyponormal => {
            if kmax == 0 {
                return Err(Failure::Usage("kmax must be at least 1".into()));
            }
            let (code, mut report) = match cli.mode {
                Mode::Exact => power_report::<Q>(&s, kmax, tol)?,
                Mode::Float => power_report::<f64>(&s, kmax, tol)?,
            };
            report["property"] = json!("power-hyponormal");
            report["mode"] = json!(mode_name(cli.mode));
            Ok(Outcome::new(code, report))
        }
        Property::Subnormal => {
            let cert = check_subnormal(&s)?;
            let mut report = cert.to_json();
            report["property"] = json!("subnormal");
            report["mode"] = json!("exact");
            let code = if cert.is_subnormal() { HOLDS } else { FAILS };
            Ok(Outcome::new(code, report))
        }
    }
}

fn hyponormal_report<S: Scalar>(s: &WeightedShift, k: usize, tol: f64) -> Result<(u8, Value), Failure> {
    let rep = check_hyponormal_power::<S>(s, k, tol)?;
    Ok((verdict_code(&rep.verdict), rep.to_json()))
}

fn power_report<S: Scalar>(s: &WeightedShift, kmax: usize, tol: f64) -> Result<(u8, Value), Failure> {
    let rep = check_power_hyponormal_in::<S>(s, kmax, tol)?;
    let mut out = rep.to_json();
    match rep.first_failure() {
        None => {
            out["holds"] = json!(true);
            Ok((HOLDS, out))
        }
        Some(bad) => {
            let witness = bad.verdict.witness().expect("failing verdicts have a witness");
            out["holds"] = json!(false);
            out["k"] = json!(bad.k);
            out["verdict"] = json!(bad.verdict.name());
            out["witness"] = json!(witness.to_string());
            out["hip"] = bad.values.get(witness).map_or(Value::Null, |h| json!(h.render()));
            Ok((verdict_code(&bad.verdict), out))
        }
    }
}

fn read_shifts(paths: &[PathBuf]) -> Result<Vec<WeightedShift>, Failure> {
    paths.iter().map(|p| read_shift(p)).collect()
}

/// Refuses to emit a shift that does not re-certify as subnormal.
fn certified(shift: &WeightedShift) -> Result<(), Failure> {
    if check_subnormal(shift)?.is_subnormal() {
        Ok(())
    } else {
        Err(Failure::Lib(Error::Postcondition("output is not subnormal".into())))
    }
}

fn q_strings(values: &[Q]) -> Vec<String> {
    values.iter().map(format_q).collect()
}

fn extend(cmd: &ExtendCmd) -> CmdResult {
    match cmd {
        ExtendCmd::Single { k, scale, shift } => {
            let s = read_shift(shift)?;
            let scale = scale.as_deref().map(parse_q).transpose()?;
            let (ext, plan) = construct_backward_extension(&s, *k, scale)?;
            certified(&ext)?;
            let shift = to_value(&ext);
            let report = json!({"plan": plan.to_json(), "certified": true, "shift": shift});
            Ok(Outcome::new(HOLDS, report).with_artifact(shift))
        }
        ExtendCmd::RootedSum { k, root, shifts } => {
            let members = read_shifts(shifts)?;
            let joint = rooted_sum_extend(&members, *k, root, true)?;
            certified(&joint.shift)?;
            let shift = to_value(&joint.shift);
            let report = json!({
                "k": k,
                "theta_sq": q_strings(&joint.theta_sq),
                "C": q_strings(&joint.c),
                "D": q_strings(&joint.d),
                "certified": true,
                "shift": shift,
            });
            Ok(Outcome::new(HOLDS, report).with_artifact(shift))
        }
        ExtendCmd::JoinDepth { depth, envelope, shifts } => {
            let members = read_shifts(shifts)?;
            let env = read_forest(envelope)?;
            let joint = join_at_depth(&members, &env, *depth)?;
            certified(&joint)?;
            let shift = to_value(&joint);
            let report = json!({"depth": depth, "certified": true, "shift": shift});
            Ok(Outcome::new(HOLDS, report).with_artifact(shift))
        }
        ExtendCmd::Powerhypo { kmax, root, sq, shifts } => {
            let members = read_shifts(shifts)?;
            if sq.len() != members.len() {
                return Err(Failure::Usage(format!("{} values for --sq, {} shifts", sq.len(), members.len())));
            }
            let sq = sq.iter().map(|t| parse_q(t)).collect::<Result<Vec<_>, _>>()?;
            let pairs: Vec<(WeightedShift, Q)> = members.into_iter().zip(sq).collect();
            let joint = powerhypo_rooted_sum_extend(&pairs, *kmax, root)?;
            let shift = to_value(&joint.shift);
            let report = json!({
                "kmax": kmax,
                "a_sq": q_strings(&joint.a_sq),
                "root_sq": q_strings(&joint.root_sq),
                "certified": true,
                "shift": shift,
            });
            Ok(Outcome::new(HOLDS, report).with_artifact(shift))
        }
    }
}

fn counterexample(cli: &Cli, tree: Option<&Path>, generate: Option<usize>, v1: Option<&str>) -> CmdResult {
    let t = match (tree, generate) {
        (Some(path), _) => read_forest(path)?,
        (None, Some(n)) if n >= 4 => random_non_forkless_tree(&mut ChaCha8Rng::seed_from_u64(cli.seed), n),
        (None, Some(n)) => return Err(Failure::Usage(format!("a non-forkless tree needs at least 4 vertices, got {n}"))),
        (None, None) => unreachable!("clap requires a source"),
    };
    let v1 = v1.map(VertexId::from);
    let ce = make_counterexample(&t, v1.as_ref())?;
    let s = &ce.shift;
    let h1 = check_hyponormal(s, 1)?;
    let h2 = check_hyponormal(s, 2)?;
    let at_v0 = hip_k(s, &Node::Core(ce.v0.clone()), 2)?;
    let expected = ce.expected_hip2();
    let ok = h1.holds() && !h2.holds() && at_v0 == expected;
    let shift = to_value(s);
    let report = json!({
        "v0": ce.v0,
        "v1": ce.v1,
        "v2": ce.v2,
        "beta": format_q(&ce.beta),
        "verification": {
            "hip_1": h1.to_json()["hip"],
            "hyponormal": h1.holds(),
            "square_hyponormal": h2.holds(),
            "hip_2": format_q(&at_v0),
            "expected_hip_2": format_q(&expected),
            "witness": h2.verdict.witness().map(|n| n.to_string()),
        },
        "shift": shift,
    });
    Ok(Outcome::new(if ok { HOLDS } else { INTERNAL }, report).with_artifact(shift))
}

fn component<T>(v: &Value, parse: impl Fn(&str) -> Result<T, Failure>) -> Result<T, Failure> {
    match v {
        Value::String(s) => parse(s),
        Value::Number(n) => parse(&n.to_string()),
        other => Err(Failure::Lib(Error::Parse(format!("expected a number, found {other}")))),
    }
}

/// `{"v": [re, im]}` with entries parsed by `parse`.
fn complex_weights<T>(lambda: &Value, parse: impl Fn(&str) -> Result<T, Failure>) -> Result<BTreeMap<VertexId, Complex<T>>, Failure> {
    let map = lambda
        .as_object()
        .ok_or_else(|| Failure::Lib(Error::Parse("lambda must be an object".into())))?;
    let mut out = BTreeMap::new();
    for (v, z) in map {
        let parts = z
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Failure::Lib(Error::Parse(format!("weight of {v} must be [re, im]"))))?;
        out.insert(VertexId::from(v.as_str()), Complex::new(component(&parts[0], &parse)?, component(&parts[1], &parse)?));
    }
    Ok(out)
}

fn gauge(cli: &Cli, path: &Path) -> CmdResult {
    let mut input = read_json(path)?;
    let f = forest_from(input["forest"].take())?;
    match cli.mode {
        Mode::Exact => {
            let lambda = complex_weights(&input["lambda"], |s| Ok(parse_q(s)?))?;
            let g = phase_gauge(&f, &lambda)?;
            let sq: BTreeMap<VertexId, Q> = lambda.iter().map(|(v, z)| (v.clone(), z.norm_sqr())).collect();
            let moduli = gauged(&f, &lambda)?;
            if g.conjugated(&f, &lambda) != moduli {
                return Err(Failure::Lib(Error::Postcondition("gauge does not remove the phases".into())));
            }
            let beta: BTreeMap<&VertexId, [String; 2]> = g.beta.iter().map(|(v, b)| (v, [format_q(&b.re), format_q(&b.im)])).collect();
            let shift = WeightedShift::new_allow_leaves(f.clone(), WeightSystem::new(sq, BTreeMap::new()))?;
            let shift = to_value(&shift);
            let report = json!({"mode": "exact", "beta": beta, "verified": true, "shift": shift});
            Ok(Outcome::new(HOLDS, report).with_artifact(shift))
        }
        Mode::Float => {
            let parse = |s: &str| match s.trim().parse::<f64>() {
                Ok(x) => Ok(x),
                Err(_) => Ok(to_f64(&parse_q(s)?)),
            };
            let lambda = complex_weights(&input["lambda"], parse)?;
            let g = phase_gauge(&f, &lambda)?;
            let moduli = gauged(&f, &lambda)?;
            let err = g
                .conjugated(&f, &lambda)
                .iter()
                .map(|(v, z)| (z - moduli[v]).norm())
                .fold(0.0, f64::max);
            let beta: BTreeMap<&VertexId, [String; 2]> = g.beta.iter().map(|(v, b)| (v, [format_f64(b.re), format_f64(b.im)])).collect();
            let modulus: BTreeMap<&VertexId, String> = moduli.iter().map(|(v, z)| (v, format_f64(z.re))).collect();
            let report = json!({"mode": "float", "beta": beta, "modulus": modulus, "max_error": format_f64(err)});
            let code = if err <= cli.tolerance()? { HOLDS } else { INTERNAL };
            Ok(Outcome::new(code, report))
        }
    }
}

/// `|λ_v|` as complex numbers, 0 at roots.
fn gauged<T: GaugeReal>(f: &DirectedForest, lambda: &BTreeMap<VertexId, Complex<T>>) -> Result<BTreeMap<VertexId, Complex<T>>, Failure> {
    let mut out = BTreeMap::new();
    for v in f.vertices() {
        let l = lambda.get(v).cloned().unwrap_or_else(Complex::zero);
        out.insert(v.clone(), Complex::new(modulus(&l)?, T::zero()));
    }
    Ok(out)
}

fn moments(path: &Path, k: usize, n: usize) -> CmdResult {
    let input = read_json(path)?;
    if let Some(seq) = input.get("moments") {
        let a: Vec<shiftlab::json::Rat> =
            serde_json::from_value(seq.clone()).map_err(|e| Failure::Lib(Error::Parse(format!("moments: {e}"))))?;
        let seq = MomentSeq::new(shiftlab::json::unrats(a))?;
        return Ok(match hankel_check(&seq) {
            HankelVerdict::ConsistentUpTo(last) => Outcome::new(HOLDS, json!({"verdict": "consistent", "up_to": last})),
            HankelVerdict::Inconsistent { kind, size, x, value, det } => {
                let kind = match kind {
                    HankelKind::Plain => "plain",
                    HankelKind::Shifted => "shifted",
                };
                let report = json!({
                    "verdict": "inconsistent",
                    "hankel": kind,
                    "size": size,
                    "x": q_strings(&x),
                    "value": format_q(&value),
                    "det": format_q(&det),
                });
                Outcome::new(FAILS, report)
            }
        });
    }
    let mu: AtomicMeasure =
        serde_json::from_value(input).map_err(|e| Failure::Lib(Error::Parse(format!("measure: {e}"))))?;
    let mut report = json!({"moments": q_strings(mu.moments_of(n).values())});
    if k == 0 {
        return Ok(Outcome::new(HOLDS, report));
    }
    match backward_extend_moments(&mu, k)? {
        MomentExtension::Feasible { prefix, measure } => {
            report["backward"] = json!({"k": k, "prefix": q_strings(&prefix), "measure": to_value(&measure)});
            Ok(Outcome::new(HOLDS, report))
        }
        MomentExtension::Infeasible { neg_moment } => {
            let neg = neg_moment.finite().map_or_else(|| "inf".to_string(), format_q);
            report["backward"] = json!({"k": k, "feasible": false, "neg_moment": neg});
            Ok(Outcome::new(crate::report::INFEASIBLE, report))
        }
    }
}
