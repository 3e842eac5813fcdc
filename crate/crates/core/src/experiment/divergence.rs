use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::jaccard_error;
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::output::sig9;
use crate::rules::GroundedAction;

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceRow {
    pub action: GroundedAction,
    pub mean_jaccard_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DivergenceTable {
    pub rows: Vec<DivergenceRow>,
}

impl DivergenceTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["action", "mean_jaccard_error"])?;
        for r in &self.rows {
            out.write_record([r.action.to_string(), sig9(r.mean_jaccard_error)])?;
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

/// Execute each action `k` times in both environments, each time from their
/// initial states, and average the Jaccard error between the two successors
/// of the same repetition. `k = 0` gives an empty table.
pub fn symbolic_divergence_report(
    env_a: &mut dyn Environment,
    env_b: &mut dyn Environment,
    actions: &[GroundedAction],
    k: usize,
) -> Result<DivergenceTable> {
    let mut table = DivergenceTable::default();
    if k == 0 {
        return Ok(table);
    }
    for a in actions {
        let mut total = 0.0;
        for _ in 0..k {
            env_a.reset();
            env_b.reset();
            let ea = env_a.exec_action(a)?;
            let eb = env_b.exec_action(a)?;
            total += jaccard_error(&ea.s_next, &eb.s_next);
        }
        table.rows.push(DivergenceRow {
            action: a.clone(),
            mean_jaccard_error: total / k as f64,
        });
    }
    env_a.reset();
    env_b.reset();
    Ok(table)
}
