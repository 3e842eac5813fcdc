use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::Scenario;
use crate::error::{Error, Result};
use crate::learner::{self, ExperienceLog, LearnerConfig, TracePoint};
use crate::output::sig9;
use crate::par;

/// The knobs swept by an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub t_test: f64,
    pub penalty: f64,
    pub m: f64,
}

impl RunSettings {
    /// File-name label, e.g. `T20_pen10_m10`.
    pub fn label(&self) -> String {
        format!(
            "T{}_pen{}_m{}",
            sig9(self.t_test),
            sig9(self.penalty),
            sig9(self.m)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    /// Everything but `t_test`, `m` and `seed` is taken from here.
    pub base: LearnerConfig,
    pub success_reward: f64,
    pub t_values: Vec<f64>,
    pub penalties: Vec<f64>,
    pub m_values: Vec<f64>,
    pub replications: usize,
    pub seed_base: u64,
    pub grid_points: usize,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.grid_points < 2 {
            return Err(Error::Config("grid_points must be at least 2".into()));
        }
        if self.t_values.is_empty() || self.penalties.is_empty() || self.m_values.is_empty() {
            return Err(Error::Config("every sweep list needs at least one value".into()));
        }
        for s in self.settings() {
            self.config_for(&s, 0).validate()?;
            if !(s.penalty >= 0.0 && s.penalty.is_finite()) {
                return Err(Error::Config(format!(
                    "penalty must be a non-negative number, got {}",
                    s.penalty
                )));
            }
        }
        Ok(())
    }

    /// The grid in sweep order: T outermost, then penalty, then m.
    pub fn settings(&self) -> Vec<RunSettings> {
        let mut out = Vec::new();
        for &t_test in &self.t_values {
            for &penalty in &self.penalties {
                for &m in &self.m_values {
                    out.push(RunSettings { t_test, penalty, m });
                }
            }
        }
        out
    }

    /// Replication `rep` uses seed `seed_base + rep` under every setting.
    pub fn seed(&self, rep: usize) -> u64 {
        self.seed_base.wrapping_add(rep as u64)
    }

    pub fn config_for(&self, s: &RunSettings, rep: usize) -> LearnerConfig {
        LearnerConfig {
            t_test: s.t_test,
            m: s.m,
            seed: self.seed(rep),
            ..self.base.clone()
        }
    }

    /// `grid_points` equally spaced times from 0 to the budget.
    pub fn grid(&self) -> Vec<f64> {
        let g = self.grid_points;
        (0..g)
            .map(|k| self.base.total_budget * k as f64 / (g - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub time: f64,
    pub mean: f64,
    /// Population standard deviation across replications.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardCurve {
    pub points: Vec<CurvePoint>,
}

/// Score of a trace at time `t`: the last point at or before `t`, else 0.
pub fn score_at(trace: &[TracePoint], t: f64) -> f64 {
    let k = trace.partition_point(|p| p.time <= t);
    if k == 0 { 0.0 } else { trace[k - 1].score }
}

impl RewardCurve {
    /// Mean and spread of step-interpolated traces on `grid`.
    pub fn aggregate(grid: &[f64], traces: &[&[TracePoint]]) -> Self {
        let n = traces.len() as f64;
        let points = grid
            .iter()
            .map(|&time| {
                let values: Vec<f64> = traces.iter().map(|t| score_at(t, time)).collect();
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                CurvePoint {
                    time,
                    mean,
                    std: var.max(0.0).sqrt(),
                }
            })
            .collect();
        RewardCurve { points }
    }

    pub fn final_mean(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.mean)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["time", "mean", "std"])?;
        for p in &self.points {
            out.write_record([sig9(p.time), sig9(p.mean), sig9(p.std)])?;
        }
        out.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(BufWriter::new(f))
    }
}

/// All replications of one setting.
#[derive(Debug, Clone)]
pub struct ConfigResult {
    pub settings: RunSettings,
    /// Aggregated over the successful replications.
    pub curve: RewardCurve,
    /// One entry per replication index; failures keep their message.
    pub runs: Vec<std::result::Result<ExperienceLog, String>>,
}

impl ConfigResult {
    pub fn logs(&self) -> impl Iterator<Item = (usize, &ExperienceLog)> {
        self.runs
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.as_ref().ok().map(|l| (i, l)))
    }

    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.is_err()).count()
    }

    /// Final score of every successful replication, by index.
    pub fn final_scores(&self) -> Vec<(usize, f64)> {
        self.logs().map(|(i, l)| (i, l.score())).collect()
    }
}

/// Run every (setting, replication) pair and aggregate per setting, in plan
/// order. Replications may run in parallel; results do not depend on it.
/// A failed replication is logged and left out of its curve; a setting whose
/// replications all fail is an error.
pub fn run_replications(plan: &ExperimentPlan, scenario: &Scenario) -> Result<Vec<ConfigResult>> {
    plan.validate()?;
    let settings = plan.settings();
    let reps = plan.replications;
    let rewards = settings
        .iter()
        .map(|s| scenario.reward(plan.success_reward, s.penalty))
        .collect::<Result<Vec<_>>>()?;
    let runs = par::map_range(settings.len() * reps, |k| {
        let (i, rep) = (k / reps, k % reps);
        let cfg = plan.config_for(&settings[i], rep);
        let (mut target, mut test) = scenario.environments(cfg.seed)?;
        learner::run(
            &cfg,
            &mut target,
            &mut test,
            &scenario.rules,
            &rewards[i],
            &scenario.actions,
        )
    });
    let grid = plan.grid();
    let mut runs = runs.into_iter();
    let mut out = Vec::with_capacity(settings.len());
    for s in settings {
        let mut first_err = None;
        let results: Vec<_> = runs
            .by_ref()
            .take(reps)
            .enumerate()
            .map(|(rep, r)| {
                r.map_err(|e| {
                    log::error!("{} replication {rep} failed: {e}", s.label());
                    let msg = e.to_string();
                    first_err.get_or_insert(e);
                    msg
                })
            })
            .collect();
        let traces: Vec<&[TracePoint]> = results
            .iter()
            .filter_map(|r| r.as_ref().ok().map(|l| l.trace()))
            .collect();
        if traces.is_empty() {
            return Err(first_err.expect("at least one replication ran"));
        }
        out.push(ConfigResult {
            settings: s,
            curve: RewardCurve::aggregate(&grid, &traces),
            runs: results,
        });
    }
    Ok(out)
}
