//! JSON configuration schemas shared by the subcommands.
//!
//! Words are strings of digit color indices ("1212"), the empty string
//! being the unit; rational numbers travel as "p/q" strings to keep the
//! exact pipeline exact. All randomness comes from the explicit `seed`
//! field — a missing seed is an error, never a wall-clock fallback.

use genusexp::matmodel::{EnsembleConfig, NumPotential};
use genusexp::ncpoly::{Monomial, Potential};
use genusexp::scalar::parse_rat;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
pub struct PotentialTermSpec {
    pub word: String,
    #[serde(default)]
    pub t: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct PotentialFile {
    pub m: usize,
    #[serde(default)]
    pub terms: Vec<PotentialTermSpec>,
}

impl PotentialFile {
    pub fn load(path: &str) -> Result<PotentialFile, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read potential file {path}: {e}"))?;
        serde_json::from_str(&text).map_err(|e| format!("malformed potential file {path}: {e}"))
    }

    /// Formal potential (t values attached when every term carries one).
    pub fn to_potential(&self) -> Result<Potential, String> {
        let mut monomials = Vec::new();
        for term in &self.terms {
            let w = Monomial::parse(&term.word, self.m).map_err(|e| e.to_string())?;
            monomials.push(w);
        }
        let mut v = Potential::new(self.m, monomials).map_err(|e| e.to_string())?;
        if self.terms.iter().all(|t| t.t.is_some()) && !self.terms.is_empty() {
            let values = self
                .terms
                .iter()
                .map(|t| {
                    let s = t.t.as_ref().unwrap();
                    parse_rat(s).ok_or_else(|| format!("bad rational {s:?} (want p/q)"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            v = v.with_values(values).map_err(|e| e.to_string())?;
        }
        Ok(v)
    }
}

#[derive(Debug, Deserialize)]
pub struct EnsembleFile {
    pub m: usize,
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub potential: Vec<PotentialTermSpec>,
    #[serde(default = "default_c")]
    pub c: f64,
    pub seed: u64,
    pub steps: usize,
    pub burn_in: usize,
    #[serde(default = "default_chains")]
    pub chains: usize,
    #[serde(default = "default_thin")]
    pub thin: usize,
    #[serde(default)]
    pub step_size: Option<f64>,
    pub observables: Vec<String>,
    /// skip the convexity screen (recorded in the report)
    #[serde(default)]
    pub override_convexity: bool,
}

fn default_c() -> f64 {
    0.5
}
fn default_chains() -> usize {
    2
}
fn default_thin() -> usize {
    1
}

impl EnsembleFile {
    pub fn load(path: &str) -> Result<EnsembleFile, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read ensemble file {path}: {e}"))?;
        serde_json::from_str(&text).map_err(|e| format!("malformed ensemble file {path}: {e}"))
    }

    pub fn numeric_potential(&self) -> Result<NumPotential, String> {
        let mut terms = Vec::new();
        for term in &self.potential {
            let w = Monomial::parse(&term.word, self.m).map_err(|e| e.to_string())?;
            let t = term
                .t
                .as_ref()
                .ok_or_else(|| format!("term {:?} needs a numeric t for sampling", term.word))?;
            let r = parse_rat(t).ok_or_else(|| format!("bad rational {t:?}"))?;
            terms.push((genusexp::scalar::rat_to_f64(&r), w.0.clone()));
        }
        Ok(NumPotential::new(self.m, terms))
    }

    pub fn ensemble_for(&self, n: usize) -> Result<EnsembleConfig, String> {
        Ok(EnsembleConfig {
            m: self.m,
            n,
            potential: self.numeric_potential()?,
            c: self.c,
            seed: self.seed,
        })
    }

    pub fn observable_words(&self) -> Result<Vec<Monomial>, String> {
        self.observables
            .iter()
            .map(|s| Monomial::parse(s, self.m).map_err(|e| e.to_string()))
            .collect()
    }
}
