use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use super::trial::{run_instance, write_artifacts, ClassPinning, TrialOutcome};
use crate::error::{Error, Result};
use crate::stability::GainMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Feasible,
    Infeasible,
    Failed,
}

/// One line of `trials.csv`; everything the batch summary is folded from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub status: TrialStatus,
    pub nodes: usize,
    pub pinned_count: usize,
    pub convergence_time: Option<f64>,
    pub log10_terminal_error: Option<f64>,
    pub class_pinning: Vec<ClassPinning>,
    pub error: Option<String>,
}

impl TrialRow {
    pub fn from_outcome(o: &TrialOutcome) -> Self {
        Self {
            trial: o.trial,
            seed: o.seed,
            status: if o.feasible {
                TrialStatus::Feasible
            } else {
                TrialStatus::Infeasible
            },
            nodes: o.nodes,
            pinned_count: o.pinned_count,
            convergence_time: o.convergence_time,
            log10_terminal_error: o.log10_terminal_error(),
            class_pinning: o.class_pinning.clone(),
            error: None,
        }
    }

    fn failed(trial: usize, seed: u64, err: &Error) -> Self {
        Self {
            trial,
            seed,
            status: TrialStatus::Failed,
            nodes: 0,
            pinned_count: 0,
            convergence_time: None,
            log10_terminal_error: None,
            class_pinning: Vec::new(),
            error: Some(err.to_string()),
        }
    }

    pub fn pinned_fraction(&self) -> Option<f64> {
        (self.status != TrialStatus::Failed).then(|| self.pinned_count as f64 / self.nodes as f64)
    }
}

const HEADER: &str =
    "trial,seed,status,nodes,pinned_count,pinned_fraction,convergence_time,log10_terminal_error,class_pinning,error";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trials_csv<W: Write>(rows: &[TrialRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for r in rows {
        let status = match r.status {
            TrialStatus::Feasible => "feasible",
            TrialStatus::Infeasible => "infeasible",
            TrialStatus::Failed => "failed",
        };
        let classes = r
            .class_pinning
            .iter()
            .map(|c| format!("{}/{}", c.pinned, c.nodes))
            .collect::<Vec<_>>()
            .join(";");
        let error = r
            .error
            .as_deref()
            .unwrap_or("")
            .replace([',', '\n', '\r'], " ");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.trial,
            r.seed,
            status,
            r.nodes,
            r.pinned_count,
            opt(r.pinned_fraction()),
            opt(r.convergence_time),
            opt(r.log10_terminal_error),
            classes,
            error
        )?;
    }
    Ok(())
}

pub fn read_trials_csv<R: BufRead>(input: R) -> Result<Vec<TrialRow>> {
    let bad = |line: usize, what: &str| Error::Csv(format!("line {line}: {what}"));
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h == HEADER => {}
        _ => return Err(Error::Csv("missing trials header".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Csv(e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(bad(i + 2, "expected 10 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 2, "bad number"));
        let int = |s: &str| s.parse::<u64>().map_err(|_| bad(i + 2, "bad integer"));
        let opt_num = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        let status = match f[2] {
            "feasible" => TrialStatus::Feasible,
            "infeasible" => TrialStatus::Infeasible,
            "failed" => TrialStatus::Failed,
            _ => return Err(bad(i + 2, "bad status")),
        };
        let class_pinning = if f[8].is_empty() {
            Vec::new()
        } else {
            f[8].split(';')
                .enumerate()
                .map(|(k, c)| {
                    let (p, n) = c.split_once('/').ok_or_else(|| bad(i + 2, "bad class"))?;
                    Ok(ClassPinning {
                        multiplicity: k + 1,
                        pinned: int(p)? as usize,
                        nodes: int(n)? as usize,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        };
        rows.push(TrialRow {
            trial: int(f[0])? as usize,
            seed: int(f[1])?,
            status,
            nodes: int(f[3])? as usize,
            pinned_count: int(f[4])? as usize,
            convergence_time: opt_num(f[6])?,
            log10_terminal_error: opt_num(f[7])?,
            class_pinning,
            error: (!f[9].is_empty()).then(|| f[9].to_string()),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self {
            count: values.len(),
            mean,
            std,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRate {
    pub multiplicity: usize,
    pub nodes: usize,
    pub pinned: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub scenario: String,
    pub trials: usize,
    pub failed: usize,
    /// Feasible trials over all trials.
    pub feasibility_rate: f64,
    pub pinned_fraction: Option<Stats>,
    pub pinned_count: Option<Stats>,
    /// Over trials that settled within the horizon.
    pub convergence_time: Option<Stats>,
    pub converged: usize,
    pub log10_terminal_error: Option<Stats>,
    /// Pooled over completed trials.
    pub class_pinning: Vec<ClassRate>,
    pub failures: Vec<(usize, String)>,
}

/// Folds per-trial rows into the batch statistics.
pub fn summarize(scenario: &str, rows: &[TrialRow]) -> BatchSummary {
    let done: Vec<&TrialRow> = rows.iter().filter(|r| r.status != TrialStatus::Failed).collect();
    let collect = |f: &dyn Fn(&TrialRow) -> Option<f64>| done.iter().filter_map(|r| f(r)).collect::<Vec<_>>();
    let feasible = rows.iter().filter(|r| r.status == TrialStatus::Feasible).count();
    let times = collect(&|r| r.convergence_time);

    let mut classes: Vec<ClassRate> = Vec::new();
    for r in &done {
        for c in &r.class_pinning {
            if classes.len() < c.multiplicity {
                classes.resize_with(c.multiplicity, || ClassRate {
                    multiplicity: 0,
                    nodes: 0,
                    pinned: 0,
                    rate: 0.0,
                });
            }
            let e = &mut classes[c.multiplicity - 1];
            e.multiplicity = c.multiplicity;
            e.nodes += c.nodes;
            e.pinned += c.pinned;
        }
    }
    for (k, c) in classes.iter_mut().enumerate() {
        c.multiplicity = k + 1;
        c.rate = if c.nodes > 0 {
            c.pinned as f64 / c.nodes as f64
        } else {
            0.0
        };
    }

    BatchSummary {
        scenario: scenario.to_string(),
        trials: rows.len(),
        failed: rows.len() - done.len(),
        feasibility_rate: if rows.is_empty() {
            0.0
        } else {
            feasible as f64 / rows.len() as f64
        },
        pinned_fraction: Stats::of(&collect(&|r| r.pinned_fraction())),
        pinned_count: Stats::of(&collect(&|r| Some(r.pinned_count as f64))),
        converged: times.len(),
        convergence_time: Stats::of(&times),
        log10_terminal_error: Stats::of(&collect(&|r| r.log10_terminal_error)),
        class_pinning: classes,
        failures: rows
            .iter()
            .filter_map(|r| r.error.clone().map(|e| (r.trial, e)))
            .collect(),
    }
}

fn trial_dir(out: &Path, trial: usize) -> std::path::PathBuf {
    out.join(format!("trial_{trial:04}"))
}

fn run_rows(sc: &Scenario, trials: usize, out: Option<&Path>) -> Vec<TrialRow> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let inst = match sc.instance(t) {
                Ok(i) => i,
                Err(e) => return TrialRow::failed(t, super::scenario::trial_seed(sc.seed, t), &e),
            };
            let res = run_instance(sc, &inst).and_then(|run| {
                if let Some(dir) = out {
                    write_artifacts(&run, sc.output_stride, &trial_dir(dir, t))?;
                }
                Ok(run.outcome)
            });
            match res {
                Ok(o) => TrialRow::from_outcome(&o),
                Err(e) => TrialRow::failed(t, inst.seed, &e),
            }
        })
        .collect()
}

/// Runs `trials` independent trials (in parallel). Per-trial failures are
/// recorded, not propagated. With `out`, writes per-trial artifacts under
/// `trial_NNNN/`, plus `trials.csv` and `batch_summary.json`.
pub fn run_batch(sc: &Scenario, trials: usize, out: Option<&Path>) -> Result<BatchSummary> {
    if trials == 0 {
        return Err(Error::param("trials", "must be >= 1"));
    }
    sc.validate()?;
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let rows = run_rows(sc, trials, out);
    let summary = summarize(&sc.name, &rows);
    if let Some(dir) = out {
        let path = dir.join("trials.csv");
        let f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_trials_csv(&rows, std::io::BufWriter::new(f)).map_err(|e| Error::io(&path, e))?;
        let path = dir.join("batch_summary.json");
        let f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::to_writer_pretty(f, &summary)?;
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    /// `None` for the minimal-gain baseline.
    pub gain: Option<f64>,
    pub pinned_count: Option<Stats>,
    pub feasibility_rate: f64,
    pub log10_terminal_error: Option<Stats>,
    /// Per trial, in trial order.
    pub trials: Vec<TrialRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedGainTable {
    pub scenario: String,
    pub baseline: GainRow,
    pub fixed: Vec<GainRow>,
}

impl FixedGainTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "gain,trials,mean_pinned,std_pinned,feasibility_rate,mean_log10_terminal_error"
        )?;
        for row in std::iter::once(&self.baseline).chain(&self.fixed) {
            let label = row.gain.map_or_else(|| "lmi".to_string(), |c| c.to_string());
            let p = row.pinned_count.as_ref();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                label,
                row.trials.len(),
                opt(p.map(|s| s.mean)),
                opt(p.map(|s| s.std)),
                row.feasibility_rate,
                opt(row.log10_terminal_error.as_ref().map(|s| s.mean)),
            )?;
        }
        Ok(())
    }
}

fn gain_row(gain: Option<f64>, trials: Vec<TrialRow>) -> GainRow {
    let s = summarize("", &trials);
    GainRow {
        gain,
        pinned_count: s.pinned_count,
        feasibility_rate: s.feasibility_rate,
        log10_terminal_error: s.log10_terminal_error,
        trials,
    }
}

/// Paired comparison: every trial draws one instance, then runs the GA with
/// the minimal-gain LMI test and once per fixed gain on that same instance.
pub fn fixed_gain_study(sc: &Scenario, gains: &[f64], trials: usize) -> Result<FixedGainTable> {
    if gains.is_empty() {
        return Err(Error::Empty("gain list"));
    }
    if let Some(c) = gains.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
        return Err(Error::param("gains", format!("{c} must be > 0")));
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be >= 1"));
    }
    sc.validate()?;
    let modes: Vec<Scenario> = std::iter::once(GainMode::Minimal)
        .chain(gains.iter().map(|&c| GainMode::Fixed(c)))
        .map(|m| sc.with_gain_mode(m))
        .collect();

    // per_trial[t][mode]
    let per_trial: Vec<Vec<TrialRow>> = (0..trials)
        .into_par_iter()
        .map(|t| match sc.instance(t) {
            Ok(inst) => modes
                .iter()
                .map(|m| match run_instance(m, &inst) {
                    Ok(run) => TrialRow::from_outcome(&run.outcome),
                    Err(e) => TrialRow::failed(t, inst.seed, &e),
                })
                .collect(),
            Err(e) => {
                let row = TrialRow::failed(t, super::scenario::trial_seed(sc.seed, t), &e);
                vec![row; modes.len()]
            }
        })
        .collect();

    let column = |j: usize| per_trial.iter().map(|r| r[j].clone()).collect::<Vec<_>>();
    Ok(FixedGainTable {
        scenario: sc.name.clone(),
        baseline: gain_row(None, column(0)),
        fixed: gains
            .iter()
            .enumerate()
            .map(|(j, &c)| gain_row(Some(c), column(j + 1)))
            .collect(),
    })
}
