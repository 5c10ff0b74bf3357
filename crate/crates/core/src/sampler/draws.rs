//! Posterior sample store: constrained draws plus per-iteration chain id,
//! divergence flag, Hamiltonian energy, and acceptance statistic.
//!
//! Serializes to CSV with header
//! `chain,iteration,divergent,energy,accept_stat,<param names...>` and to an
//! equivalent JSON-lines form; both round-trip losslessly (floats are written
//! with shortest-round-trip formatting).

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Draws<R: Real> {
    /// Constrained parameter names (columns of `params`).
    pub names: Vec<String>,
    /// S_total × P constrained values, chains concatenated in chain order.
    pub params: Array2<R>,
    pub chain: Vec<u32>,
    /// Post-warmup iteration index within the chain, starting at 0.
    pub iteration: Vec<u32>,
    pub divergent: Vec<bool>,
    pub energy: Vec<R>,
    pub accept_stat: Vec<R>,
}

impl<R: Real> Draws<R> {
    pub fn new(
        names: Vec<String>,
        params: Array2<R>,
        chain: Vec<u32>,
        iteration: Vec<u32>,
        divergent: Vec<bool>,
        energy: Vec<R>,
        accept_stat: Vec<R>,
    ) -> Result<Self> {
        let s = params.nrows();
        if params.ncols() != names.len() {
            return Err(Error::DimMismatch { what: "draws names", expected: params.ncols(), got: names.len() });
        }
        for (what, len) in [
            ("draws chain column", chain.len()),
            ("draws iteration column", iteration.len()),
            ("draws divergent column", divergent.len()),
            ("draws energy column", energy.len()),
            ("draws accept_stat column", accept_stat.len()),
        ] {
            if len != s {
                return Err(Error::DimMismatch { what, expected: s, got: len });
            }
        }
        Ok(Draws { names, params, chain, iteration, divergent, energy, accept_stat })
    }

    pub fn n_draws(&self) -> usize {
        self.params.nrows()
    }

    pub fn n_params(&self) -> usize {
        self.params.ncols()
    }

    pub fn n_chains(&self) -> usize {
        self.chain.iter().copied().max().map_or(0, |m| m as usize + 1)
    }

    pub fn n_divergent(&self) -> usize {
        self.divergent.iter().filter(|&&d| d).count()
    }

    pub fn col_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownParam(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<R>> {
        let idx = self.col_index(name)?;
        Ok(self.params.column(idx).to_vec())
    }

    pub fn row(&self, s: usize) -> ArrayView1<'_, R> {
        self.params.row(s)
    }

    /// Values of one parameter for one chain, in iteration order.
    pub fn chain_column(&self, chain: u32, col: usize) -> Vec<R> {
        self.chain
            .iter()
            .zip(self.params.column(col))
            .filter(|(&c, _)| c == chain)
            .map(|(_, &v)| v)
            .collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str("chain,iteration,divergent,energy,accept_stat");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for s in 0..self.n_draws() {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                self.chain[s], self.iteration[s], self.divergent[s], self.energy[s], self.accept_stat[s]
            );
            for v in self.params.row(s) {
                let _ = write!(out, ",{}", v);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn from_csv_string(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty draws file"))?;
        let cols: Vec<&str> = header.split(',').collect();
        const FIXED: [&str; 5] = ["chain", "iteration", "divergent", "energy", "accept_stat"];
        if cols.len() < FIXED.len() || cols[..FIXED.len()] != FIXED {
            return Err(Error::parse(1, "bad draws header"));
        }
        let names: Vec<String> = cols[FIXED.len()..].iter().map(|s| s.to_string()).collect();
        let p = names.len();

        let mut chain = Vec::new();
        let mut iteration = Vec::new();
        let mut divergent = Vec::new();
        let mut energy = Vec::new();
        let mut accept_stat = Vec::new();
        let mut flat: Vec<R> = Vec::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let lineno = i + 1;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != FIXED.len() + p {
                return Err(Error::parse(lineno, format!("expected {} fields, got {}", FIXED.len() + p, fields.len())));
            }
            let bad = |what: &str| Error::parse(lineno, format!("bad {what} field"));
            chain.push(fields[0].parse::<u32>().map_err(|_| bad("chain"))?);
            iteration.push(fields[1].parse::<u32>().map_err(|_| bad("iteration"))?);
            divergent.push(fields[2].parse::<bool>().map_err(|_| bad("divergent"))?);
            energy.push(R::of(fields[3].parse::<f64>().map_err(|_| bad("energy"))?));
            accept_stat.push(R::of(fields[4].parse::<f64>().map_err(|_| bad("accept_stat"))?));
            for f in &fields[FIXED.len()..] {
                flat.push(R::of(f.parse::<f64>().map_err(|_| bad("param"))?));
            }
        }
        let s = chain.len();
        let params = Array2::from_shape_vec((s, p), flat)
            .map_err(|e| Error::invalid(format!("draws shape: {e}")))?;
        Draws::new(names, params, chain, iteration, divergent, energy, accept_stat)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_string(&std::fs::read_to_string(path)?)
    }

    pub fn to_jsonl_string(&self) -> String
    where
        R: Serialize,
    {
        let mut out = String::new();
        let header = JsonlHeader { names: &self.names };
        out.push_str(&serde_json::to_string(&header).expect("header serializes"));
        out.push('\n');
        for s in 0..self.n_draws() {
            let row = JsonlRowRef {
                chain: self.chain[s],
                iteration: self.iteration[s],
                divergent: self.divergent[s],
                energy: &self.energy[s],
                accept_stat: &self.accept_stat[s],
                params: self.params.row(s).to_vec(),
            };
            out.push_str(&serde_json::to_string(&row).expect("row serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl_string(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.is_empty());
        let (_, first) = lines.next().ok_or_else(|| Error::parse(1, "empty draws file"))?;
        let header: JsonlHeaderOwned = serde_json::from_str(first)?;
        let p = header.names.len();
        let mut chain = Vec::new();
        let mut iteration = Vec::new();
        let mut divergent = Vec::new();
        let mut energy = Vec::new();
        let mut accept_stat = Vec::new();
        let mut flat: Vec<R> = Vec::new();
        for (i, line) in lines {
            let row: JsonlRow = serde_json::from_str(line)
                .map_err(|e| Error::parse(i + 1, e.to_string()))?;
            if row.params.len() != p {
                return Err(Error::parse(i + 1, format!("expected {} params, got {}", p, row.params.len())));
            }
            chain.push(row.chain);
            iteration.push(row.iteration);
            divergent.push(row.divergent);
            energy.push(R::of(row.energy));
            accept_stat.push(R::of(row.accept_stat));
            flat.extend(row.params.into_iter().map(R::of));
        }
        let s = chain.len();
        let params = Array2::from_shape_vec((s, p), flat)
            .map_err(|e| Error::invalid(format!("draws shape: {e}")))?;
        Draws::new(header.names, params, chain, iteration, divergent, energy, accept_stat)
    }
}

#[derive(Serialize)]
struct JsonlHeader<'a> {
    names: &'a [String],
}

#[derive(Deserialize)]
struct JsonlHeaderOwned {
    names: Vec<String>,
}

#[derive(Serialize)]
struct JsonlRowRef<'a, R: Serialize> {
    chain: u32,
    iteration: u32,
    divergent: bool,
    energy: &'a R,
    accept_stat: &'a R,
    params: Vec<R>,
}

#[derive(Deserialize)]
struct JsonlRow {
    chain: u32,
    iteration: u32,
    divergent: bool,
    energy: f64,
    accept_stat: f64,
    params: Vec<f64>,
}
