//! Observation table shared by the model family: log satellite estimates,
//! log observed PM2.5, and a super-region index per observation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<R: Real> {
    /// Log satellite estimate per observation. The school model reuses this
    /// column for the known per-observation standard errors.
    pub x: Vec<R>,
    /// Log observed outcome per observation.
    pub y: Vec<R>,
    /// Super-region index per observation, in [0, n_groups).
    pub group: Vec<usize>,
    /// Group labels; `group_names.len()` is the number of groups, which may
    /// exceed the number of groups that actually appear in `group` (regions
    /// without moniters stay in the model as prior-only groups).
    pub group_names: Vec<String>,
    /// Optional country tag per observation.
    pub country: Option<Vec<String>>,
}

impl<R: Real> Dataset<R> {
    /// Build a dataset, checking lengths and group indices. `n = 0` is
    /// allowed here (prior-only evaluation); the CSV loader rejects it.
    pub fn new(
        x: Vec<R>,
        y: Vec<R>,
        group: Vec<usize>,
        group_names: Vec<String>,
        country: Option<Vec<String>>,
    ) -> Result<Self> {
        if x.len() != y.len() || x.len() != group.len() {
            return Err(Error::DimMismatch { what: "dataset columns", expected: x.len(), got: y.len().max(group.len()) });
        }
        if let Some(c) = &country {
            if c.len() != x.len() {
                return Err(Error::DimMismatch { what: "dataset country column", expected: x.len(), got: c.len() });
            }
        }
        let n_groups = group_names.len();
        if let Some(&bad) = group.iter().find(|&&g| g >= n_groups) {
            return Err(Error::invalid(format!(
                "group index {} out of range for {} groups",
                bad, n_groups
            )));
        }
        for (i, (&xi, &yi)) in x.iter().zip(&y).enumerate() {
            if !xi.is_finite() {
                return Err(Error::NonFinite { name: "x".into(), index: i });
            }
            if !yi.is_finite() {
                return Err(Error::NonFinite { name: "y".into(), index: i });
            }
        }
        Ok(Dataset { x, y, group, group_names, country })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn n_groups(&self) -> usize {
        self.group_names.len()
    }

    /// Same groups, zero observations. Evaluating a model on this isolates
    /// the prior + Jacobian part of the log posterior.
    pub fn empty_like(&self) -> Dataset<R> {
        Dataset {
            x: Vec::new(),
            y: Vec::new(),
            group: Vec::new(),
            group_names: self.group_names.clone(),
            country: None,
        }
    }

    /// Observation indices belonging to each group.
    pub fn group_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.n_groups()];
        for (i, &g) in self.group.iter().enumerate() {
            members[g].push(i);
        }
        members
    }
}
