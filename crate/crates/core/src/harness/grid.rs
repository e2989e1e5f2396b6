//! Grid search over the practical step rule `η_t = min{1/(2ℓ), a/t}`.

use std::cmp::Ordering;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::{EtaSpec, RunConfig};
use super::experiment::Experiment;
use crate::error::{Error, Result};
use crate::par;

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub ells: Vec<f64>,
    /// Empty for a constant step `1/(2ℓ)`.
    pub a_values: Vec<f64>,
    /// Every candidate is scored by its mean over these seeds.
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub rank: usize,
    pub ell: f64,
    pub a: Option<f64>,
    pub eta_0: f64,
    /// Mean final last-iterate gradient norm; empty when any seed diverged.
    pub mean_final_grad_norm: Option<f64>,
    pub diverged_runs: usize,
    pub runs: usize,
}

impl Candidate {
    pub fn diverged(&self) -> bool {
        self.mean_final_grad_norm.is_none()
    }

    /// The configuration that reproduces this candidate.
    pub fn apply(&self, cfg: &RunConfig) -> RunConfig {
        RunConfig { eta: EtaSpec::Value(self.eta_0), a: self.a, ell: Some(self.ell), ..cfg.clone() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridReport {
    /// Best first.
    pub ranking: Vec<Candidate>,
}

impl GridReport {
    pub fn best(&self) -> Result<&Candidate> {
        self.ranking
            .first()
            .filter(|c| !c.diverged())
            .ok_or_else(|| Error::numeric(format!("all {} grid candidates diverged", self.ranking.len())))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        for c in &self.ranking {
            out.serialize(c)?;
        }
        if self.ranking.is_empty() {
            out.write_record(["rank", "ell", "a", "eta_0", "mean_final_grad_norm", "diverged_runs", "runs"])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn check_grid(name: &str, values: &[f64]) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Config(format!("{name} grid values must be positive, got {v}")));
    }
    Ok(())
}

/// Runs every `(ℓ, a)` candidate for each seed with `cfg.iters` steps and
/// ranks them by mean final gradient norm. Candidates with a diverged seed go
/// last; ties favour the smaller step.
pub fn grid_search(cfg: &RunConfig, spec: &GridSpec) -> Result<GridReport> {
    if spec.ells.is_empty() {
        return Err(Error::Config("the ell grid is empty".into()));
    }
    if spec.seeds.is_empty() {
        return Err(Error::Config("no seeds given".into()));
    }
    check_grid("ell", &spec.ells)?;
    check_grid("a", &spec.a_values)?;
    let a_values: Vec<Option<f64>> =
        if spec.a_values.is_empty() { vec![None] } else { spec.a_values.iter().copied().map(Some).collect() };
    let proto: Vec<Candidate> = spec
        .ells
        .iter()
        .flat_map(|&ell| {
            a_values.iter().map(move |&a| Candidate {
                rank: 0,
                ell,
                a,
                eta_0: 1.0 / (2.0 * ell),
                mean_final_grad_norm: None,
                diverged_runs: 0,
                runs: 0,
            })
        })
        .collect();
    let scored = par::map(cfg.execution, &proto, |c| -> Result<Candidate> {
        let exp = Experiment::prepare(&c.apply(cfg))?;
        let mut finals = Vec::with_capacity(spec.seeds.len());
        let mut diverged = 0;
        for &seed in &spec.seeds {
            let report = exp.run_seed(seed)?;
            match (&report.failure, report.trace.last()) {
                (None, Some(row)) if row.grad_norm.is_finite() => finals.push(row.grad_norm),
                (Some((_, e)), _) if !e.is_numeric() => return Err(e.clone()),
                _ => diverged += 1,
            }
        }
        let mean = (diverged == 0).then(|| finals.iter().sum::<f64>() / finals.len() as f64);
        Ok(Candidate { mean_final_grad_norm: mean, diverged_runs: diverged, runs: spec.seeds.len(), ..c.clone() })
    });
    let mut ranking = scored.into_iter().collect::<Result<Vec<_>>>()?;
    ranking.sort_by(|p, q| {
        let by_score = match (p.mean_final_grad_norm, q.mean_final_grad_norm) {
            (Some(a), Some(b)) => a.total_cmp(&b),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        };
        by_score.then(p.eta_0.total_cmp(&q.eta_0)).then(p.a.unwrap_or(0.0).total_cmp(&q.a.unwrap_or(0.0)))
    });
    for (i, c) in ranking.iter_mut().enumerate() {
        c.rank = i + 1;
    }
    Ok(GridReport { ranking })
}
