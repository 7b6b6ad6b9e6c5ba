//! The [`Spectrum`] record shared by exact, oracle and discrete solvers.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance below which neighbouring eigenvalues are merged.
pub const MERGE_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bc {
    Dirichlet,
    Neumann,
    Periodic,
}

impl fmt::Display for Bc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bc::Dirichlet => "dirichlet",
            Bc::Neumann => "neumann",
            Bc::Periodic => "periodic",
        })
    }
}

impl std::str::FromStr for Bc {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(Bc::Dirichlet),
            "neumann" => Ok(Bc::Neumann),
            "periodic" => Ok(Bc::Periodic),
            _ => Err(Error::Argument(format!("unknown boundary condition {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    /// Closed form or exhaustive lattice enumeration.
    Exact,
    /// Computed by an independent high-accuracy oracle.
    Oracle,
    /// Eigenvalues of a discretized operator.
    Discrete,
}

/// Solver metadata attached to discrete spectra.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

/// Sorted eigenvalues with multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub p: f64,
    pub bc: Bc,
    pub exactness: Exactness,
    /// Spatial dimension of the underlying domain.
    pub n: usize,
    pub domain_volume: f64,
    /// `(value, multiplicity)`, strictly increasing in value.
    pub eigenvalues: Vec<(f64, u32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverMeta>,
}

impl Spectrum {
    /// Builds a spectrum from unsorted values, merging values that agree to
    /// [`MERGE_RTOL`] relative.
    pub fn from_values(
        values: Vec<f64>,
        p: f64,
        bc: Bc,
        exactness: Exactness,
        n: usize,
        domain_volume: f64,
    ) -> Self {
        let weighted = values.into_iter().map(|v| (v, 1)).collect();
        Spectrum::from_weighted(weighted, p, bc, exactness, n, domain_volume)
    }

    /// As [`Spectrum::from_values`] for values that already carry multiplicities.
    pub fn from_weighted(
        mut values: Vec<(f64, u32)>,
        p: f64,
        bc: Bc,
        exactness: Exactness,
        n: usize,
        domain_volume: f64,
    ) -> Self {
        values.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut eigenvalues: Vec<(f64, u32)> = Vec::new();
        for (v, k) in values {
            match eigenvalues.last_mut() {
                Some((w, m)) if (v - *w).abs() <= MERGE_RTOL * w.abs().max(v.abs()) => *m += k,
                _ => eigenvalues.push((v, k)),
            }
        }
        Spectrum {
            p,
            bc,
            exactness,
            n,
            domain_volume,
            eigenvalues,
            solver: None,
        }
    }

    pub fn with_solver(mut self, meta: SolverMeta) -> Self {
        self.solver = Some(meta);
        self
    }

    /// Total number of eigenvalues counted with multiplicity.
    pub fn len(&self) -> u64 {
        self.eigenvalues.iter().map(|&(_, m)| m as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalues repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat_n(v, m as usize))
            .collect()
    }

    pub fn first(&self) -> Option<f64> {
        self.eigenvalues.first().map(|&(v, _)| v)
    }

    /// Checks ordering, multiplicities and the zero-mode convention.
    pub fn validate(&self) -> Result<()> {
        for w in self.eigenvalues.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::Validation(
                    "eigenvalues not strictly increasing".into(),
                ));
            }
        }
        if self
            .eigenvalues
            .iter()
            .any(|&(v, m)| m == 0 || v < 0.0 || !v.is_finite())
        {
            return Err(Error::Validation(
                "bad eigenvalue or zero multiplicity".into(),
            ));
        }
        match (self.bc, self.first()) {
            (Bc::Dirichlet, Some(0.0)) => {
                Err(Error::Validation("dirichlet spectrum contains zero".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sp: Spectrum = serde_json::from_str(s)?;
        sp.validate()?;
        Ok(sp)
    }

    /// CSV with columns `value,multiplicity`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,multiplicity\n");
        for &(v, m) in &self.eigenvalues {
            out.push_str(&format!("{v},{m}\n"));
        }
        out
    }
}
