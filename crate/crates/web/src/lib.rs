//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes system-file text (or a built-in id) and returns JSON.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use dirac_core::catalog;
use dirac_core::dynamics::{integrate, HamiltonianKind, MultiplierFn, MultiplierPolicy};
use dirac_core::pipeline::{analyze, flow_for, initial_point, run_quantize, Overrides};
use dirac_core::quantum::{Representation, WaveState};
use dirac_core::report::{render, AnalysisReport, Format, QuantizeReport};
use dirac_core::system_file::{parse, SystemFile};

const MAX_SAMPLES: usize = 400;

fn load(source: &str) -> Result<SystemFile, String> {
    if let Ok(entry) = catalog::get(source.trim()) {
        return Ok(entry.file);
    }
    parse(source).map_err(|e| format!("system file: {e}"))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

#[derive(Serialize)]
struct Entry {
    id: &'static str,
    summary: &'static str,
    text: String,
}

pub fn catalog_json() -> String {
    let entries: Vec<Entry> =
        catalog::all().into_iter().map(|e| Entry { id: e.id, summary: e.summary, text: e.file.to_text() }).collect();
    to_json(&entries)
}

pub fn analysis_report(source: &str, format: &str) -> Result<String, String> {
    let format: Format = format.parse()?;
    let a = analyze(&load(source)?).map_err(|e| e.to_string())?;
    Ok(render(&AnalysisReport::new(&a), AnalysisReport::to_text, format))
}

#[derive(Serialize)]
struct Run {
    seed: u64,
    series: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct Sweep {
    hamiltonian: HamiltonianKind,
    variables: Vec<String>,
    times: Vec<f64>,
    runs: Vec<Run>,
    /// Per variable, the largest spread across runs over the whole interval.
    spread: Vec<f64>,
}

/// Trajectories of one Hamiltonian under `runs` random multiplier policies.
pub fn sweep(source: &str, hamiltonian: &str, runs: u32, steps: usize, h: f64) -> Result<String, String> {
    let file = load(source)?;
    let kind: HamiltonianKind = hamiltonian.parse()?;
    let overrides = Overrides { h: Some(h), steps: Some(steps), hamiltonian: Some(kind), ..Default::default() };
    overrides.validate().map_err(|e| e.to_string())?;
    let cfg = overrides.integrate_config(&file);
    let a = analyze(&file).map_err(|e| e.to_string())?;
    let (flow, _, _) = flow_for(&a, kind).map_err(|e| e.to_string())?;
    let (init, _) = initial_point(&flow, &a, &cfg.initial);
    let stride = (cfg.steps / MAX_SAMPLES).max(1);
    let mut out = Sweep {
        hamiltonian: kind,
        variables: flow.variables.clone(),
        times: Vec::new(),
        runs: Vec::new(),
        spread: vec![0.0; flow.variables.len()],
    };
    let mut lo = vec![vec![f64::INFINITY; flow.variables.len()]; cfg.steps + 1];
    let mut hi = vec![vec![f64::NEG_INFINITY; flow.variables.len()]; cfg.steps + 1];
    for seed in 1..=u64::from(runs.max(1)) {
        let policy = MultiplierPolicy::uniform(MultiplierFn::random(seed, 1.0, 2.0));
        let t = integrate(&flow, &init, &policy, cfg.grid()).map_err(|e| e.to_string())?;
        for (i, s) in t.states.iter().enumerate() {
            for (k, x) in s.iter().enumerate() {
                lo[i][k] = lo[i][k].min(*x);
                hi[i][k] = hi[i][k].max(*x);
            }
        }
        if out.times.is_empty() {
            out.times = t.times().step_by(stride).collect();
        }
        let series = (0..flow.variables.len())
            .map(|k| t.states.iter().step_by(stride).map(|s| s[k]).collect())
            .collect();
        out.runs.push(Run { seed, series });
    }
    for (l, u) in lo.iter().zip(&hi) {
        for k in 0..out.spread.len() {
            if u[k].is_finite() {
                out.spread[k] = out.spread[k].max(u[k] - l[k]);
            }
        }
    }
    Ok(to_json(&out))
}

/// `|ψ|²` summed over every axis but the first.
fn marginal(rep: &Representation, psi: &WaveState) -> Vec<f64> {
    let n = rep.axes[0].points;
    let mut out = vec![0.0; n];
    for (i, z) in psi.amplitudes.iter().enumerate() {
        out[rep.indices(i)[0]] += z.norm_sqr();
    }
    out
}

#[derive(Serialize)]
struct QuantumDemo {
    report: QuantizeReport,
    axis: String,
    grid: Vec<f64>,
    initial: Vec<f64>,
    final_density: Vec<f64>,
}

pub fn quantum(source: &str, steps: usize) -> Result<String, String> {
    let file = load(source)?;
    let overrides = Overrides { steps: Some(steps), ..Default::default() };
    overrides.validate().map_err(|e| e.to_string())?;
    let a = analyze(&file).map_err(|e| e.to_string())?;
    let run = run_quantize(&a, &overrides.quantum_config(&file)).map_err(|e| e.to_string())?;
    let rep = &run.representation;
    let axis = &rep.axes[0];
    Ok(to_json(&QuantumDemo {
        axis: axis.variable.clone(),
        grid: (0..axis.points).map(|j| axis.coordinate(j)).collect(),
        initial: marginal(rep, &run.initial),
        final_density: marginal(rep, &run.final_state),
        report: QuantizeReport::new(a.name.clone(), &run),
    }))
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Built-in systems as `[{id, summary, text}]`.
#[wasm_bindgen(js_name = catalog)]
pub fn wasm_catalog() -> String {
    catalog_json()
}

/// Analysis report; `format` is `text` or `structured`.
#[wasm_bindgen(js_name = analyze)]
pub fn wasm_analyze(source: &str, format: &str) -> Result<String, JsError> {
    js(analysis_report(source, format))
}

#[wasm_bindgen(js_name = gaugeSweep)]
pub fn wasm_gauge_sweep(source: &str, hamiltonian: &str, runs: u32, steps: usize, h: f64) -> Result<String, JsError> {
    js(sweep(source, hamiltonian, runs, steps, h))
}

#[wasm_bindgen(js_name = quantize)]
pub fn wasm_quantize(source: &str, steps: usize) -> Result<String, JsError> {
    js(quantum(source, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn analysis_of_builtin_and_text_agree() {
        let text = catalog::get("cawley").unwrap().file.to_text();
        assert_eq!(analysis_report("cawley", "structured"), analysis_report(&text, "structured"));
        assert!(analysis_report("system: x\n", "text").is_err());
    }

    #[test]
    fn total_hamiltonian_spreads_only_gauge_variables() {
        let v: Value = serde_json::from_str(&sweep("counterexample-a", "total", 3, 2000, 0.005).unwrap()).unwrap();
        let vars: Vec<&str> = v["variables"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
        let spread = |name: &str| v["spread"][vars.iter().position(|s| *s == name).unwrap()].as_f64().unwrap();
        assert!(spread("x") < 1e-10);
        assert!(spread("y") > 0.1);
        assert_eq!(v["runs"].as_array().unwrap().len(), 3);
        assert!(v["times"].as_array().unwrap().len() <= MAX_SAMPLES + 1);

        let v: Value = serde_json::from_str(&sweep("counterexample-a", "extended", 2, 2000, 0.005).unwrap()).unwrap();
        let vars: Vec<&str> = v["variables"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
        assert!(v["spread"][vars.iter().position(|s| *s == "x").unwrap()].as_f64().unwrap() > 0.1);
    }

    #[test]
    fn quantum_demo_density_is_normalized() {
        let v: Value = serde_json::from_str(&quantum("harmonic-oscillator", 50).unwrap()).unwrap();
        let grid = v["grid"].as_array().unwrap();
        let dx = grid[1].as_f64().unwrap() - grid[0].as_f64().unwrap();
        let total: f64 = v["final_density"].as_array().unwrap().iter().map(|d| d.as_f64().unwrap()).sum::<f64>() * dx;
        assert!((total - 1.0).abs() < 1e-8, "{total}");
        assert_eq!(v["axis"], "x");
    }

    #[test]
    fn catalog_lists_all_entries() {
        let v: Value = serde_json::from_str(&catalog_json()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), catalog::IDS.len());
    }
}
