use std::path::Path;

use itp_core::decoherence::{decoherence_horizon, sample_counts, FrequencyTable, Horizon, MeasurementModel};
use itp_core::io::{ext_f64, parse_cascade, parse_model, parse_operator, parse_sequence, parse_state};
use itp_core::products::{classify_product, ClassifyOptions};
use itp_core::scenarios::{cascade_stage_report, run_cascade, spin_sweep, CascadeReport, SpinChainScenario, StageRow};
use itp_core::{expectation_sweep, overlap_sweep, same_sector, OverlapSweep};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::output::{csv_table, emit, num, read_file, to_json, CliError, CliResult};
use crate::Format;

fn load<T>(path: &Path, what: &str, parse: impl Fn(&str) -> itp_core::Result<T>) -> CliResult<T> {
    let text = read_file(path)?;
    parse(&text).map_err(|e| CliError::core(e, json!({ "input": what, "path": path.display().to_string() })))
}

fn core(ctx: Value) -> impl Fn(itp_core::Error) -> CliError {
    move |e| CliError::core(e, ctx.clone())
}

fn check_n_max(n_max: usize) -> CliResult<()> {
    if n_max == 0 {
        return Err(CliError::usage("--n-max must be at least 1", json!({ "n_max": n_max })));
    }
    Ok(())
}

fn check_eps(eps: Option<f64>) -> CliResult<()> {
    match eps {
        Some(e) if !(e > 0.0 && e.is_finite()) => Err(CliError::usage(
            "--eps must be positive and finite",
            json!({ "eps": e }),
        )),
        _ => Ok(()),
    }
}

pub fn product_classify(spec: &Path, budget: usize, tol: f64, out: Option<&Path>) -> CliResult<()> {
    if budget == 0 || !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::usage(
            "--budget must be positive and --tol positive and finite",
            json!({ "budget": budget, "tol": tol }),
        ));
    }
    let seq = load(spec, "spec", parse_sequence)?;
    let verdict = classify_product(&seq, ClassifyOptions::new(budget, tol))
        .map_err(core(json!({ "spec": spec.display().to_string() })))?;
    emit(out, &to_json(&verdict))
}

pub fn sector_test(a: &Path, b: &Path, out: Option<&Path>) -> CliResult<()> {
    let sa = load(a, "a", parse_state)?;
    let sb = load(b, "b", parse_state)?;
    let verdict = same_sector(&sa, &sb).map_err(core(
        json!({ "a": a.display().to_string(), "b": b.display().to_string() }),
    ))?;
    emit(out, &to_json(&verdict))
}

/// JSON form of `overlap-sweep` and `expectation-sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub sweep: OverlapSweep,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_below: Option<usize>,
}

fn sweep_csv(s: &OverlapSweep) -> String {
    let header = ["N", "re", "im", "log10_modulus"].map(String::from);
    let rows: Vec<Vec<String>> = (0..s.len())
        .map(|i| {
            vec![
                s.truncations[i].to_string(),
                num(s.values[i].re),
                num(s.values[i].im),
                num(s.log10_modulus(i)),
            ]
        })
        .collect();
    csv_table(&header, &rows)
}

fn emit_sweep(sweep: OverlapSweep, eps: Option<f64>, out: Option<&Path>, format: Format) -> CliResult<()> {
    let text = match format {
        Format::Csv => sweep_csv(&sweep),
        Format::Json => {
            let first_below = eps.and_then(|e| sweep.first_below(e));
            to_json(&SweepReport {
                sweep,
                eps,
                first_below,
            })
        }
    };
    emit(out, &text)
}

pub fn overlap_sweep_cmd(
    a: &Path,
    b: &Path,
    n_max: usize,
    eps: Option<f64>,
    out: Option<&Path>,
    format: Format,
) -> CliResult<()> {
    check_n_max(n_max)?;
    check_eps(eps)?;
    let sa = load(a, "a", parse_state)?;
    let sb = load(b, "b", parse_state)?;
    let ns: Vec<usize> = (1..=n_max).collect();
    let sweep = overlap_sweep(&sa, &sb, &ns).map_err(core(
        json!({ "a": a.display().to_string(), "b": b.display().to_string() }),
    ))?;
    emit_sweep(sweep, eps, out, format)
}

pub fn expectation_sweep_cmd(
    op: &Path,
    state: &Path,
    n_max: usize,
    eps: Option<f64>,
    out: Option<&Path>,
    format: Format,
) -> CliResult<()> {
    check_n_max(n_max)?;
    check_eps(eps)?;
    let u = load(op, "op", parse_operator)?;
    let s = load(state, "state", parse_state)?;
    let ns: Vec<usize> = (1..=n_max).collect();
    let sweep = expectation_sweep(&u, &s, &ns).map_err(core(
        json!({ "op": op.display().to_string(), "state": state.display().to_string() }),
    ))?;
    emit_sweep(sweep, eps, out, format)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizonEntry {
    pub i: usize,
    pub j: usize,
    pub horizon: Horizon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonsDoc {
    pub eps: f64,
    pub horizons: Vec<HorizonEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSeries {
    pub i: usize,
    pub j: usize,
    pub modulus: Vec<f64>,
    #[serde(with = "ext_f64::vec")]
    pub log10_modulus: Vec<f64>,
}

/// JSON form of `decohere`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecohereReport {
    pub truncations: Vec<usize>,
    pub pairs: Vec<PairSeries>,
    pub horizons: HorizonsDoc,
}

/// `|ρ_ij(N)| = |s_i s_j| |⟨d_j|d_i⟩_N|` for every pair `i < j`.
fn off_diagonals(m: &MeasurementModel, ns: &[usize]) -> itp_core::Result<Vec<PairSeries>> {
    let (s, d) = (m.amplitudes(), m.device_states());
    let mut pairs = Vec::new();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let sweep = overlap_sweep(&d[j], &d[i], ns)?;
            let scale = (s[i] * s[j].conj()).norm();
            let log10: Vec<f64> = (0..sweep.len())
                .map(|k| scale.log10() + sweep.log10_modulus(k))
                .collect();
            pairs.push(PairSeries {
                i,
                j,
                modulus: sweep.values.iter().map(|v| scale * v.norm()).collect(),
                log10_modulus: log10,
            });
        }
    }
    Ok(pairs)
}

pub fn decohere(
    model: &Path,
    n_max: usize,
    eps: f64,
    horizons_out: Option<&Path>,
    out: Option<&Path>,
    format: Format,
) -> CliResult<()> {
    check_n_max(n_max)?;
    check_eps(Some(eps))?;
    let m = load(model, "model", parse_model)?;
    let ctx = json!({ "model": model.display().to_string() });
    let ns: Vec<usize> = (1..=n_max).collect();
    let pairs = off_diagonals(&m, &ns).map_err(core(ctx.clone()))?;
    let horizons = HorizonsDoc {
        eps,
        horizons: decoherence_horizon(&m, eps)
            .map_err(core(ctx))?
            .into_iter()
            .map(|((i, j), horizon)| HorizonEntry { i, j, horizon })
            .collect(),
    };
    if let Some(p) = horizons_out {
        emit(Some(p), &to_json(&horizons))?;
    }
    let text = match format {
        Format::Json => to_json(&DecohereReport {
            truncations: ns,
            pairs,
            horizons,
        }),
        Format::Csv => {
            let mut header = vec!["N".to_string()];
            for p in &pairs {
                header.push(format!("abs_rho_{}_{}", p.i, p.j));
                header.push(format!("log10_abs_rho_{}_{}", p.i, p.j));
            }
            let rows: Vec<Vec<String>> = ns
                .iter()
                .enumerate()
                .map(|(k, n)| {
                    let mut r = vec![n.to_string()];
                    for p in &pairs {
                        r.push(num(p.modulus[k]));
                        r.push(num(p.log10_modulus[k]));
                    }
                    r
                })
                .collect();
            csv_table(&header, &rows)
        }
    };
    emit(out, &text)
}

pub fn sample(model: &Path, shots: u64, seed: u64, out: Option<&Path>) -> CliResult<()> {
    if shots == 0 {
        return Err(CliError::usage("--shots must be at least 1", json!({ "shots": shots })));
    }
    let m = load(model, "model", parse_model)?;
    let table: FrequencyTable = sample_counts(&m, shots, seed);
    emit(out, &to_json(&table))
}

pub fn spin_sweep_cmd(xi: &str, n_max: usize, out: Option<&Path>, format: Format) -> CliResult<()> {
    check_n_max(n_max)?;
    let ctx = json!({ "xi": xi, "n_max": n_max });
    let difference = xi.parse().map_err(core(ctx.clone()))?;
    let rows = spin_sweep(&SpinChainScenario::new(difference), n_max).map_err(core(ctx))?;
    let text = match format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let header = ["N", "overlap", "log10_overlap", "probability", "log10_probability"].map(String::from);
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        num(r.overlap),
                        num(r.log10_overlap),
                        num(r.probability),
                        num(r.log10_probability),
                    ]
                })
                .collect();
            csv_table(&header, &body)
        }
    };
    emit(out, &text)
}

/// JSON form of `qnd-sim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QndReport {
    pub run: CascadeReport,
    pub stages: Vec<StageRow>,
}

pub fn stage_csv(rows: &[StageRow]) -> String {
    let header = [
        "stage",
        "name",
        "count",
        "cumulative_dof",
        "off_diagonal",
        "off_diagonal_log10",
    ]
    .map(String::from);
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.stage.to_string(),
                r.name.clone(),
                r.count.to_string(),
                r.cumulative_dof.to_string(),
                num(10f64.powf(r.off_diagonal_log10)),
                num(r.off_diagonal_log10),
            ]
        })
        .collect();
    csv_table(&header, &body)
}

pub fn qnd_sim(spec: &Path, seed: u64, stages_out: Option<&Path>, out: Option<&Path>) -> CliResult<()> {
    let cascade = load(spec, "spec", parse_cascade)?;
    let run = run_cascade(&cascade, seed).map_err(core(json!({ "spec": spec.display().to_string(), "seed": seed })))?;
    let stages = cascade_stage_report(&run);
    if let Some(p) = stages_out {
        emit(Some(p), &stage_csv(&stages))?;
    }
    emit(
        out,
        &to_json(&QndReport {
            run: run.report,
            stages,
        }),
    )
}
