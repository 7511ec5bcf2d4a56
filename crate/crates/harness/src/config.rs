//! Experiment configuration files and the sweep driver.

use std::path::{Path, PathBuf};

use koszul_core::ample::AmplenessConfig;
use koszul_core::curve::{CurveModel, CurveSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::{self, CheckContext, CheckId, CheckReport, CheckRequest, Instance};
use crate::error::{HarnessError, Result};
use crate::presets::resolve_curve;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// A preset name, a path to a curve JSON file, or an inline curve spec.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveEntry {
    Named(String),
    Spec(CurveSpec),
}

impl CurveEntry {
    /// Resolves the entry; `prime` overrides the spec's prime.
    pub fn resolve(&self, prime: Option<u32>, base_dir: Option<&Path>) -> Result<CurveModel> {
        match self {
            CurveEntry::Named(name) => {
                let relative = base_dir.map(|d| d.join(name)).filter(|p| p.is_file());
                match relative {
                    Some(path) => resolve_curve(&path.to_string_lossy(), prime),
                    None => resolve_curve(name, prime),
                }
            }
            CurveEntry::Spec(spec) => {
                let mut spec = spec.clone();
                if let Some(p) = prime {
                    spec.p = p;
                }
                Ok(CurveModel::from_spec(&spec)?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub curves: Vec<CurveEntry>,
    pub checks: Vec<CheckRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_prime: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Per-check wall-clock budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_seconds: Option<f64>,
    /// Per-matrix nonzero cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_nnz: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ampleness: Option<AmplenessConfig>,
    /// Report path; a CSV summary is written next to it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_schema() -> u32 {
    CONFIG_SCHEMA_VERSION
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        if config.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(HarnessError::Usage(format!(
                "config schema_version {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        Ok(config)
    }
}

/// Expands every request against every curve, validates all recipes, then
/// runs the instances on `workers` threads. Reports come back in grid order:
/// curves, then requests, then grid points.
pub fn run_requests(
    ctx: &CheckContext,
    curves: &[CurveModel],
    requests: &[CheckRequest],
    workers: Option<usize>,
) -> Result<Vec<CheckReport>> {
    let mut jobs: Vec<(usize, CheckId, Instance)> = Vec::new();
    for (ci, curve) in curves.iter().enumerate() {
        for req in requests {
            for (check, inst) in checks::expand(curve, req, ctx.seed)? {
                checks::validate(curve, &inst)?;
                jobs.push((ci, check, inst));
            }
        }
    }
    let run = || -> Vec<CheckReport> {
        jobs.par_iter().map(|(ci, check, inst)| checks::run(ctx, &curves[*ci], *check, inst)).collect()
    };
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::Usage(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(run))
        }
        None => Ok(run()),
    }
}
