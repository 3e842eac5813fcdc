use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::env::sample_index;
use crate::error::{Error, Result};
use crate::estimation::{delta_bounds, CountVector, ProbVector};
use crate::output::sig9;
use crate::{par, rng};

/// Averages over the streams at one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    pub n: usize,
    /// Mean of `max_i |p_i - x_i / n|`.
    pub actual_error: f64,
    /// Mean bound per epsilon.
    pub delta: Vec<f64>,
    /// Fraction of streams whose actual error exceeded the bound, per epsilon.
    pub exceedance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    pub epsilons: Vec<f64>,
    pub streams: usize,
    pub rows: Vec<CalibrationRow>,
}

impl CalibrationTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["N".to_string(), "actual_error".to_string()];
        header.extend(self.epsilons.iter().map(|e| format!("delta_eps_{}", sig9(*e))));
        header.extend(self.epsilons.iter().map(|e| format!("exceed_eps_{}", sig9(*e))));
        out.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.n.to_string(), sig9(r.actual_error)];
            rec.extend(r.delta.iter().map(|d| sig9(*d)));
            rec.extend(r.exceedance.iter().map(|d| sig9(*d)));
            out.write_record(&rec)?;
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

/// Calibrate the error bound at the sample sizes `ns`.
///
/// Each of the `streams` streams is one sequence of observations drawn from
/// `true_dist`; the row for `n` uses its first `n` observations, so rows of a
/// stream are nested. The bound at every (stream, n) gets its own seed.
pub fn calibrate_at(
    true_dist: &ProbVector,
    ns: &[usize],
    epsilons: &[f64],
    sample_size: usize,
    streams: usize,
    seed: u64,
) -> Result<CalibrationTable> {
    if streams == 0 {
        return Err(Error::InvalidParameter("need at least one stream".into()));
    }
    if epsilons.is_empty() {
        return Err(Error::InvalidParameter("need at least one epsilon".into()));
    }
    if ns.contains(&0) {
        return Err(Error::InvalidParameter("sample sizes must be positive".into()));
    }
    let max_n = ns.iter().copied().max().unwrap_or(0);
    let obs_seed = rng::derive_seed(seed, "observations", 0);
    let observations: Vec<Vec<usize>> = par::map_range(streams, |r| {
        let mut g = rng::indexed(obs_seed, r as u64);
        (0..max_n).map(|_| sample_index(true_dist, &mut g)).collect()
    });
    let k = true_dist.len();
    let cells = par::map_range(streams * ns.len(), |c| -> Result<(f64, Vec<f64>)> {
        let (r, j) = (c / ns.len(), c % ns.len());
        let n = ns[j];
        let mut x = vec![0u64; k];
        for &i in &observations[r][..n] {
            x[i] += 1;
        }
        let actual = x
            .iter()
            .zip(true_dist.as_slice())
            .map(|(&xi, p)| (p - xi as f64 / n as f64).abs())
            .fold(0.0, f64::max);
        let dseed = rng::derive_seed(rng::derive_seed(seed, rng::DELTA, r as u64), rng::DELTA, n as u64);
        let d = delta_bounds(&CountVector::new(x)?, epsilons, sample_size, dseed)?;
        Ok((actual, d))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let rows = ns
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let mut actual = 0.0;
            let mut delta = vec![0.0; epsilons.len()];
            let mut exceed = vec![0.0; epsilons.len()];
            for r in 0..streams {
                let (a, d) = &cells[r * ns.len() + j];
                actual += a;
                for (e, &de) in d.iter().enumerate() {
                    delta[e] += de;
                    if *a > de {
                        exceed[e] += 1.0;
                    }
                }
            }
            let s = streams as f64;
            CalibrationRow {
                n,
                actual_error: actual / s,
                delta: delta.into_iter().map(|v| v / s).collect(),
                exceedance: exceed.into_iter().map(|v| v / s).collect(),
            }
        })
        .collect();
    Ok(CalibrationTable {
        epsilons: epsilons.to_vec(),
        streams,
        rows,
    })
}

/// Calibration table for every sample size `1..=max_n`.
pub fn delta_calibration(
    true_dist: &ProbVector,
    max_n: usize,
    epsilons: &[f64],
    sample_size: usize,
    streams: usize,
    seed: u64,
) -> Result<CalibrationTable> {
    if max_n < 10 {
        return Err(Error::InvalidParameter(format!("max_N must be at least 10, got {max_n}")));
    }
    let ns: Vec<usize> = (1..=max_n).collect();
    calibrate_at(true_dist, &ns, epsilons, sample_size, streams, seed)
}
