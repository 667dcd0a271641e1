use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use rep_core::canonical_form::{cf_circuit, mes_circuit, CfParams, GateSequence};
use rep_core::compiler::{compile, compile_all_gadgets};
use rep_core::graphstab::{builtin, chromatic_info, color_classes, find_lc_sequence, is_lc_equivalent, lc_orbit, Graph};
use rep_core::lme_classical::{classical_channel_demo, default_extraction_set, LmesSpec};
use rep_core::purification::{
    setup, threshold_search, variant_thresholds, w_ppt_boundary, w_ppt_min_eigenvalue, PurificationSetup,
};
use rep_core::rep_protocol::{obliviousness_audit, Family, Rep, RepRun};

use crate::output::{bits, csv, emit, json as to_json, list};
use crate::{
    AuditArgs, AuditFamily, Command, CompileArgs, Format, GraphArgs, GraphCmd, LcEquivArgs, LcOrbitArgs,
    LmeCmd, LmeSendArgs, PptCmd, PurifyCmd, RepCmd, RepMesArgs, RepRunArgs, RunConfig, SweepArgs,
    ThresholdArgs, VariantArgs, WstateArgs,
};

const FIDELITY_TOL: f64 = 1e-9;

/// Runs a command; `Ok(false)` means it completed but its check failed.
pub fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Rep(RepCmd::Run(a)) => rep_run(a),
        Command::Rep(RepCmd::Mes(a)) => rep_mes(a),
        Command::Rep(RepCmd::Audit(a)) => rep_audit(a),
        Command::Compile(a) => compile_cmd(a),
        Command::Graph(GraphCmd::Color(a)) => graph_color(a),
        Command::Graph(GraphCmd::LcOrbit(a)) => graph_lc_orbit(a),
        Command::Graph(GraphCmd::LcEquiv(a)) => graph_lc_equiv(a),
        Command::Purify(PurifyCmd::Threshold(a)) => purify_threshold(a),
        Command::Purify(PurifyCmd::Sweep(a)) => purify_sweep(a),
        Command::Purify(PurifyCmd::Variants(a)) => purify_variants(a),
        Command::Ppt(PptCmd::Wstate(a)) => ppt_wstate(a),
        Command::Lme(LmeCmd::Send(a)) => lme_send(a),
    }
}

fn format_or(config: &RunConfig, default: Format) -> Format {
    config.format.unwrap_or(default)
}

fn json_only(config: &RunConfig) -> Result<()> {
    if config.format == Some(Format::Csv) {
        bail!("this command only produces JSON");
    }
    Ok(())
}

fn random_angles(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(-PI..PI)).collect()
}

fn rep_rows(runs: &[RepRun]) -> Vec<Vec<String>> {
    runs.iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                i.to_string(),
                list(&r.params, ";"),
                bits(&r.outcomes),
                bits(&r.message),
                r.correction.to_string(),
                r.cbits.to_string(),
                r.ebits.to_string(),
                r.fidelity.to_string(),
            ]
        })
        .collect()
}

fn emit_runs(config: &RunConfig, runs: &[RepRun]) -> Result<bool> {
    let text = match format_or(config, Format::Json) {
        Format::Json if runs.len() == 1 => to_json(&runs[0])?,
        Format::Json => to_json(runs)?,
        Format::Csv => csv(
            "rep-runs",
            1,
            &["run", "params", "outcomes", "message", "correction", "cbits", "ebits", "fidelity"],
            &rep_rows(runs),
        )?,
    };
    emit(config, &text)?;
    Ok(runs.iter().all(|r| r.fidelity >= 1.0 - FIDELITY_TOL))
}

fn run_many(
    family: Family,
    runs: usize,
    rng: &mut ChaCha8Rng,
    mut params: impl FnMut(&mut ChaCha8Rng) -> Result<CfParams>,
) -> Result<Vec<RepRun>> {
    let rep = Rep::new(family)?;
    (0..runs)
        .map(|_| {
            let p = params(rng)?;
            Ok(rep.run(&p, rep_core::compiler::Outcomes::Random(rng))?)
        })
        .collect()
}

fn rep_run(a: RepRunArgs) -> Result<bool> {
    if !matches!(a.n, 2 | 3) {
        bail!("unsupported qubit count {} (supported: 2, 3)", a.n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.config.seed);
    let k = rep_core::canonical_form::param_count(a.n)? as usize;
    let fixed = match (&a.angles, a.random) {
        (Some(v), _) => Some(CfParams::new(a.n, v.clone())?),
        (None, true) => None,
        (None, false) => bail!("give --angles or --random"),
    };
    let runs = run_many(Family::Cf(a.n), a.runs, &mut rng, |rng| match &fixed {
        Some(p) => Ok(p.clone()),
        None => Ok(CfParams::new(a.n, random_angles(rng, k))?),
    })?;
    emit_runs(&a.config, &runs)
}

fn rep_mes(a: RepMesArgs) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.config.seed);
    let fixed = match (&a.angles, a.random) {
        (Some(v), _) if v.len() == 3 => Some(CfParams::mes(v[0], v[1], v[2])?),
        (Some(v), _) => bail!("expected 3 angles (α1, α2, α5), got {}", v.len()),
        (None, true) => None,
        (None, false) => bail!("give --angles or --random"),
    };
    let runs = run_many(Family::Mes, a.runs, &mut rng, |rng| match &fixed {
        Some(p) => Ok(p.clone()),
        None => {
            let v = random_angles(rng, 3);
            Ok(CfParams::mes(v[0], v[1], v[2])?)
        }
    })?;
    emit_runs(&a.config, &runs)
}

fn rep_audit(a: AuditArgs) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.config.seed);
    let family = match a.family {
        AuditFamily::Cf2 => Family::Cf(2),
        AuditFamily::Cf3 => Family::Cf(3),
        AuditFamily::Mes => Family::Mes,
    };
    let params = |given: &Option<Vec<f64>>, rng: &mut ChaCha8Rng| -> Result<CfParams> {
        let v = match given {
            Some(v) => v.clone(),
            None if family == Family::Mes => random_angles(rng, 3),
            None => random_angles(rng, rep_core::canonical_form::param_count(family.n())? as usize),
        };
        Ok(match family {
            Family::Mes if v.len() == 3 => CfParams::mes(v[0], v[1], v[2])?,
            Family::Mes => bail!("expected 3 angles for the MES family, got {}", v.len()),
            Family::Cf(n) => CfParams::new(n, v)?,
        })
    };
    let pa = params(&a.a, &mut rng)?;
    let pb = params(&a.b, &mut rng)?;
    let report = obliviousness_audit(family, &pa, &pb, a.runs, &mut rng)?;
    let text = match format_or(&a.config, Format::Json) {
        Format::Json => to_json(&json!({
            "params_a": pa.angles(),
            "params_b": pb.angles(),
            "report": report,
        }))?,
        Format::Csv => csv(
            "rep-audit",
            1,
            &["family", "runs", "statistic", "dof", "p_value", "resource_identical", "indistinguishable"],
            &[vec![
                format!("{:?}", a.family).to_lowercase(),
                report.runs.to_string(),
                report.chi_square.statistic.to_string(),
                report.chi_square.dof.to_string(),
                report.chi_square.p_value.to_string(),
                report.resource_identical.to_string(),
                report.indistinguishable.to_string(),
            ]],
        )?,
    };
    emit(&a.config, &text)?;
    Ok(report.indistinguishable && report.resource_identical)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn compile_cmd(a: CompileArgs) -> Result<bool> {
    json_only(&a.config)?;
    let seq = match (a.n, a.mes, &a.circuit) {
        (Some(n), _, _) => cf_circuit(n)?,
        (None, true, _) => mes_circuit(),
        (None, false, Some(path)) => {
            let raw: GateSequence = read_json(path)?;
            GateSequence::new(raw.n, raw.gates)?
        }
        (None, false, None) => bail!("give --n, --mes or --circuit"),
    };
    let cp = if a.all_gadgets { compile_all_gadgets(&seq)? } else { compile(&seq)? };
    emit(&a.config, &to_json(&json!({ "hash": cp.circuit_hash(), "protocol": cp }))?)?;
    Ok(true)
}

/// Built-in id or JSON file, with the built-in transmitted set if any.
fn load_graph(spec: &str) -> Result<(Graph, Option<Vec<usize>>)> {
    if let Some((g, tx)) = builtin(spec) {
        return Ok((g, Some(tx)));
    }
    let path = Path::new(spec);
    if !path.exists() {
        bail!("{spec:?} is neither a built-in graph (rep8, mes6) nor a file");
    }
    Ok((read_json(path)?, None))
}

#[derive(Serialize)]
struct ColorReport {
    graph: Graph,
    chromatic_number: usize,
    coloring: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

fn graph_color(a: GraphArgs) -> Result<bool> {
    json_only(&a.config)?;
    let (graph, _) = load_graph(&a.graph)?;
    let (k, coloring) = chromatic_info(&graph);
    let classes = color_classes(&coloring);
    emit(&a.config, &to_json(&ColorReport { graph, chromatic_number: k, coloring, classes })?)?;
    Ok(true)
}

fn graph_lc_orbit(a: LcOrbitArgs) -> Result<bool> {
    json_only(&a.config)?;
    let (g, _) = load_graph(&a.graph)?;
    let orbit = lc_orbit(&g, a.max)?;
    let report = if a.find_bipartite {
        let found = find_lc_sequence(&g, Graph::is_bipartite, a.max)?;
        json!({
            "orbit_size": orbit.len(),
            "found": found.is_some(),
            "lc_sequence": found.as_ref().map(|f| &f.0),
            "bipartite": found.as_ref().map(|f| &f.1),
        })
    } else {
        json!({ "orbit_size": orbit.len(), "members": orbit })
    };
    emit(&a.config, &to_json(&report)?)?;
    Ok(true)
}

fn graph_lc_equiv(a: LcEquivArgs) -> Result<bool> {
    json_only(&a.config)?;
    let (ga, _) = load_graph(&a.a)?;
    let (gb, _) = load_graph(&a.b)?;
    let equivalent = is_lc_equivalent(&ga, &gb, a.max)?;
    emit(&a.config, &to_json(&json!({ "equivalent": equivalent }))?)?;
    Ok(true)
}

fn purification_setup(graph: &str) -> Result<(String, PurificationSetup)> {
    if builtin(graph).is_some() {
        return Ok((graph.to_string(), setup(graph)?));
    }
    let (g, _) = load_graph(graph)?;
    let coloring = chromatic_info(&g).1;
    Ok(("file".to_string(), PurificationSetup { graph: g, coloring, transmitted: Vec::new(), lc_sequence: Vec::new() }))
}

fn transmitted_or(s: &PurificationSetup, given: &Option<Vec<usize>>) -> Result<Vec<usize>> {
    let tx = given.clone().unwrap_or_else(|| s.transmitted.clone());
    if tx.is_empty() {
        bail!("give --transmitted for graphs loaded from a file");
    }
    if let Some(&v) = tx.iter().find(|&&v| v >= s.graph.n()) {
        bail!("transmitted vertex {v} out of range");
    }
    Ok(tx)
}

fn purify_threshold(a: ThresholdArgs) -> Result<bool> {
    let (id, s) = purification_setup(&a.graph)?;
    let tx = transmitted_or(&s, &a.transmitted)?;
    let start = Instant::now();
    let t = threshold_search(&s.scenario(&tx, a.q), a.tol)?;
    let seconds = if a.timing { format!("{:.3}", start.elapsed().as_secs_f64()) } else { String::new() };
    let p_star = if t.found { t.p_star.to_string() } else { "none".to_string() };
    let text = match format_or(&a.config, Format::Csv) {
        Format::Csv => csv(
            "purify-threshold",
            1,
            &["graph", "q", "transmitted", "p_star", "iterations_at_threshold", "seconds"],
            &[vec![id, a.q.to_string(), list(&tx, ";"), p_star, t.iterations_at_threshold.to_string(), seconds]],
        )?,
        Format::Json => to_json(&json!({
            "graph": id,
            "graph_edges": s.graph,
            "q": a.q,
            "transmitted": tx,
            "tol": a.tol,
            "threshold": t,
        }))?,
    };
    emit(&a.config, &text)?;
    Ok(t.found)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|x| x.trim().parse::<f64>().map_err(|e| anyhow!("bad grid {spec:?}: {e}")))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else { bail!("grid must be start:stop:step") };
    if !(step > 0.0) || stop < start {
        bail!("grid must have step > 0 and stop >= start");
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn purify_sweep(a: SweepArgs) -> Result<bool> {
    let (id, s) = purification_setup(&a.graph)?;
    let tx = transmitted_or(&s, &a.transmitted)?;
    let ps = parse_grid(&a.p)?;
    let points: Vec<(f64, f64)> = a.q.iter().flat_map(|&q| ps.iter().map(move |&p| (q, p))).collect();
    let scenarios: Vec<_> = a.q.iter().map(|&q| s.scenario(&tx, q)).collect();
    let results: Vec<_> = points
        .par_iter()
        .enumerate()
        .map(|(i, &(_, p))| scenarios[i / ps.len()].run(p))
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .zip(&results)
        .map(|(&(q, p), r)| {
            vec![
                id.clone(),
                q.to_string(),
                format!("{p:.6}"),
                r.converged.to_string(),
                r.iterations.to_string(),
                r.trajectory.last().copied().unwrap_or(f64::NAN).to_string(),
            ]
        })
        .collect();
    let text = match format_or(&a.config, Format::Csv) {
        Format::Csv => {
            csv("purify-sweep", 1, &["graph", "q", "p", "converged", "iterations", "final_fidelity"], &rows)?
        }
        Format::Json => to_json(
            &points
                .iter()
                .zip(&results)
                .map(|(&(q, p), r)| json!({ "q": q, "p": p, "result": r }))
                .collect::<Vec<_>>(),
        )?,
    };
    emit(&a.config, &text)?;
    Ok(true)
}

fn purify_variants(a: VariantArgs) -> Result<bool> {
    let rows = variant_thresholds(a.tol)?;
    let text = match format_or(&a.config, Format::Csv) {
        Format::Csv => csv(
            "purify-variants",
            1,
            &["graph", "q", "transmitted", "retained", "p_star", "iterations_at_threshold"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.graph.clone(),
                        r.q.to_string(),
                        list(&r.transmitted, ";"),
                        r.retained.to_string(),
                        if r.threshold.found { r.threshold.p_star.to_string() } else { "none".into() },
                        r.threshold.iterations_at_threshold.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Json => to_json(&rows)?,
    };
    emit(&a.config, &text)?;
    Ok(true)
}

fn ppt_wstate(a: WstateArgs) -> Result<bool> {
    let boundary = w_ppt_boundary(a.tol)?;
    let samples: Vec<(f64, f64)> = (0..a.samples)
        .map(|i| {
            let p = if a.samples == 1 { 0.0 } else { i as f64 / (a.samples - 1) as f64 };
            Ok((p, w_ppt_min_eigenvalue(p)?))
        })
        .collect::<Result<_>>()?;
    let text = match format_or(&a.config, Format::Json) {
        Format::Json => to_json(&json!({
            "boundary": boundary,
            "tol": a.tol,
            "samples": samples.iter().map(|&(p, l)| json!({ "p": p, "min_eigenvalue": l })).collect::<Vec<_>>(),
        }))?,
        Format::Csv => {
            let mut rows = vec![vec!["boundary".to_string(), boundary.to_string(), String::new()]];
            rows.extend(samples.iter().map(|(p, l)| vec!["sample".to_string(), p.to_string(), l.to_string()]));
            csv("ppt-wstate", 1, &["kind", "p", "min_eigenvalue"], &rows)?
        }
    };
    emit(&a.config, &text)?;
    Ok(true)
}

fn parse_payload(hex: &str, nbits: usize) -> Result<Vec<u8>> {
    let digits = hex.trim().trim_start_matches("0x").trim_start_matches("0X");
    let value = u128::from_str_radix(if digits.is_empty() { "0" } else { digits }, 16)
        .map_err(|e| anyhow!("bad hex payload {hex:?}: {e}"))?;
    if nbits < 128 && value >> nbits != 0 {
        bail!("payload {hex} does not fit in {nbits} bits");
    }
    Ok((0..nbits).rev().map(|i| (value >> i & 1) as u8).collect())
}

fn lme_send(a: LmeSendArgs) -> Result<bool> {
    json_only(&a.config)?;
    let raw: LmesSpec = read_json(&a.spec)?;
    let spec = LmesSpec::new(raw.n, raw.gates)?;
    let set = a.set.clone().unwrap_or_else(|| default_extraction_set(&spec));
    let nbits = a.nbits.unwrap_or(set.len());
    let payload = parse_payload(&a.bits, nbits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.config.seed);
    let run = classical_channel_demo(&spec, &payload, Some(&set), &mut rng)?;
    let ok = run.received == payload;
    emit(&a.config, &to_json(&json!({ "payload": payload, "delivered": ok, "run": run }))?)?;
    Ok(ok)
}
