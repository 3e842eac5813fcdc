use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::env::{EnvKind, Experience};
use crate::error::{Error, Result};
use crate::output::sig9;

/// One experience together with how it was filed and scored.
#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    /// Learner clock after the execution.
    pub sim_time: f64,
    pub experience: Experience,
    pub rule_id: String,
    pub outcome: usize,
    /// Always 0 for test experiences.
    pub reward: f64,
    pub cum_reward: f64,
}

/// Accumulated score after a scoring event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub time: f64,
    pub score: f64,
}

/// Append-only record of a run. The trace gets a point for every target
/// execution and for every failed episode penalty; test experiences never
/// change the score.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperienceLog {
    entries: Vec<LogEntry>,
    trace: Vec<TracePoint>,
    score: f64,
}

impl ExperienceLog {
    pub fn new() -> Self {
        ExperienceLog::default()
    }

    pub(crate) fn push(
        &mut self,
        sim_time: f64,
        experience: Experience,
        rule_id: String,
        outcome: usize,
        reward: f64,
    ) {
        let target = experience.env_label == EnvKind::Target;
        if target {
            self.score += reward;
            self.trace.push(TracePoint {
                time: sim_time,
                score: self.score,
            });
        }
        self.entries.push(LogEntry {
            sim_time,
            experience,
            rule_id,
            outcome,
            reward: if target { reward } else { 0.0 },
            cum_reward: self.score,
        });
    }

    pub(crate) fn penalize(&mut self, time: f64, reward: f64) {
        self.score += reward;
        self.trace.push(TracePoint {
            time,
            score: self.score,
        });
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn trace(&self) -> &[TracePoint] {
        &self.trace
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn count(&self, kind: EnvKind) -> usize {
        self.entries
            .iter()
            .filter(|e| e.experience.env_label == kind)
            .count()
    }

    /// Time of the last test experience, if any.
    pub fn last_test_time(&self) -> Option<f64> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.experience.env_label == EnvKind::Test)
            .map(|e| e.sim_time)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "sim_time",
            "env_label",
            "action",
            "rule_id",
            "outcome_index",
            "reward",
            "cum_reward",
        ])?;
        for e in &self.entries {
            out.write_record([
                sig9(e.sim_time),
                e.experience.env_label.to_string(),
                e.experience.action.to_string(),
                e.rule_id.clone(),
                e.outcome.to_string(),
                sig9(e.reward),
                sig9(e.cum_reward),
            ])?;
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
