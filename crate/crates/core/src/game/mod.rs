//! Zero-sum normal-form games and their Nash equilibria.
//!
//! Only X's payoff table `U` is stored; Y's payoff is `-U` by construction.

mod lp;
mod nash;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use nash::{
    equilibrium_segment, null_space, solve_nash, verify_equilibrium, EquilibriumCheck,
    EquilibriumInfo, EquilibriumSegmentParam, DEFAULT_NASH_TOL,
};

/// X's payoff table of a two-player zero-sum game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameFile", into = "GameFile")]
pub struct PayoffMatrix {
    entries: DMatrix<f64>,
    variant: Option<String>,
    seed: Option<u64>,
}

impl PayoffMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidPayoff(format!(
                "need at least 2x2 actions, got {rows}x{cols}"
            )));
        }
        if let Some(v) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidPayoff(format!("non-finite entry {v}")));
        }
        Ok(Self {
            entries,
            variant: None,
            seed: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidPayoff("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n_rows, n_cols, &flat))
    }

    fn with_origin(mut self, variant: &str, seed: Option<u64>) -> Self {
        self.variant = Some(variant.to_string());
        self.seed = seed;
        self
    }

    /// Number of X's actions, `m_X`.
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of Y's actions, `m_Y`.
    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Name of the generator that produced the matrix, if any.
    pub fn variant(&self) -> Option<&str> {
        self.variant.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("payoff matrix serializes")
    }
}

/// On-disk form of a game: `{"rows", "cols", "entries" (row-major), "variant", "seed"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameFile {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
    #[serde(default)]
    pub variant: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl TryFrom<GameFile> for PayoffMatrix {
    type Error = Error;

    fn try_from(f: GameFile) -> Result<Self> {
        if f.entries.len() != f.rows * f.cols {
            return Err(Error::InvalidPayoff(format!(
                "{} entries for a {}x{} game",
                f.entries.len(),
                f.rows,
                f.cols
            )));
        }
        let mut m = Self::new(DMatrix::from_row_slice(f.rows, f.cols, &f.entries))?;
        m.variant = f.variant;
        m.seed = f.seed;
        Ok(m)
    }
}

impl From<PayoffMatrix> for GameFile {
    fn from(m: PayoffMatrix) -> Self {
        let (rows, cols) = m.entries.shape();
        let entries = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| m.entries[(i, j)])
            .collect();
        GameFile {
            rows,
            cols,
            entries,
            variant: m.variant,
            seed: m.seed,
        }
    }
}

/// `U = ((+1, -1), (-1, +1))`.
pub fn make_matching_pennies() -> PayoffMatrix {
    PayoffMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]))
        .expect("static matrix is valid")
        .with_origin("matching-pennies", None)
}

/// How the entries outside the cyclic ±2 pattern of the coupled game are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoupledVariant {
    /// i.i.d. uniform on `[-1, 1]`; a unique interior equilibrium for typical seeds.
    Interior,
    /// All zero; a continuum of equilibria.
    Continuous,
    /// All zero except `u_11 = -1`; a unique equilibrium on the boundary.
    Boundary,
}

impl CoupledVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            CoupledVariant::Interior => "interior",
            CoupledVariant::Continuous => "continuous",
            CoupledVariant::Boundary => "boundary",
        }
    }
}

impl fmt::Display for CoupledVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoupledVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interior" => Ok(Self::Interior),
            "continuous" => Ok(Self::Continuous),
            "boundary" => Ok(Self::Boundary),
            other => Err(Error::InvalidPayoff(format!("unknown coupled variant {other:?}"))),
        }
    }
}

/// Successor in the 4-cycle `1→2→3→4→1`, zero-based.
fn sigma(i: usize) -> usize {
    (i + 1) % 4
}

/// Two matching-pennies games coupled through a 4-cycle: `u_ij = +2` when
/// `j = σ(i)`, `u_ij = -2` when `i = σ(j)`, other entries per `variant`.
/// The seed only affects [`CoupledVariant::Interior`], whose free entries are
/// drawn row-major from a ChaCha8 stream.
pub fn make_coupled_matching_pennies(variant: CoupledVariant, seed: u64) -> PayoffMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = DMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            u[(i, j)] = if j == sigma(i) {
                2.0
            } else if i == sigma(j) {
                -2.0
            } else {
                match variant {
                    CoupledVariant::Interior => rng.gen_range(-1.0..=1.0),
                    CoupledVariant::Continuous => 0.0,
                    CoupledVariant::Boundary if i == 0 && j == 0 => -1.0,
                    CoupledVariant::Boundary => 0.0,
                }
            };
        }
    }
    let seed = (variant == CoupledVariant::Interior).then_some(seed);
    PayoffMatrix::new(u)
        .expect("generated matrix is valid")
        .with_origin(&format!("coupled-{variant}"), seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_pennies_entries() {
        let mp = make_matching_pennies();
        assert_eq!(mp.entries().as_slice(), &[1.0, -1.0, -1.0, 1.0]);
        let row_sums: Vec<f64> = mp.entries().row_iter().map(|r| r.sum()).collect();
        assert_eq!(row_sums, vec![0.0, 0.0]);
    }

    #[test]
    fn coupled_pattern() {
        let u = make_coupled_matching_pennies(CoupledVariant::Continuous, 0);
        let col1: Vec<f64> = u.entries().column(0).iter().copied().collect();
        assert_eq!(col1, vec![0.0, -2.0, 0.0, 2.0]);

        let b = make_coupled_matching_pennies(CoupledVariant::Boundary, 0);
        assert_eq!(b.get(0, 0), -1.0);
        assert_eq!(b.get(0, 1), 2.0);
        let nonzero_free = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|&(i, j)| j != sigma(i) && i != sigma(j) && b.get(i, j) != 0.0)
            .count();
        assert_eq!(nonzero_free, 1);
    }

    #[test]
    fn interior_entries_in_range_and_deterministic() {
        for seed in 0..20 {
            let a = make_coupled_matching_pennies(CoupledVariant::Interior, seed);
            let b = make_coupled_matching_pennies(CoupledVariant::Interior, seed);
            assert_eq!(a.to_json(), b.to_json());
            for i in 0..4 {
                for j in 0..4 {
                    let v = a.get(i, j);
                    if j == sigma(i) {
                        assert_eq!(v, 2.0);
                    } else if i == sigma(j) {
                        assert_eq!(v, -2.0);
                    } else {
                        assert!((-1.0..=1.0).contains(&v));
                    }
                }
            }
        }
        let a = make_coupled_matching_pennies(CoupledVariant::Interior, 1);
        let b = make_coupled_matching_pennies(CoupledVariant::Interior, 2);
        assert_ne!(a, b);
    }

    #[test]
    fn json_schema() {
        let mp = make_matching_pennies();
        let v: serde_json::Value = serde_json::from_str(&mp.to_json()).unwrap();
        assert_eq!(v["rows"], 2);
        assert_eq!(v["cols"], 2);
        assert_eq!(v["entries"], serde_json::json!([1.0, -1.0, -1.0, 1.0]));
        assert_eq!(v["variant"], "matching-pennies");
        assert!(v["seed"].is_null());

        let g: PayoffMatrix =
            serde_json::from_str(r#"{"rows":2,"cols":3,"entries":[1,2,3,4,5,6]}"#).unwrap();
        assert_eq!(g.get(1, 0), 4.0);
        assert!(serde_json::from_str::<PayoffMatrix>(r#"{"rows":2,"cols":2,"entries":[1]}"#).is_err());
        assert!(serde_json::from_str::<PayoffMatrix>(r#"{"rows":1,"cols":2,"entries":[1,2]}"#).is_err());
    }
}
