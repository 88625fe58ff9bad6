//! Edge heatmaps used as next-edge policies.
//!
//! Row `i` of the matrix weights the edges leaving node `i`. Masking the row
//! with the environment's feasibility mask and renormalizing gives the
//! next-edge distribution.
//!
//! On disk a heatmap is plain text:
//!
//! ```text
//! NGS-HEATMAP 1
//! <n>
//! <n rows of n space-separated floats>
//! ```

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::decoding::Policy;
use crate::error::Result;
use crate::routing::{RouteState, RoutingInstance};

const MAGIC: &str = "NGS-HEATMAP 1";

#[derive(Debug, Error, PartialEq)]
pub enum HeatmapError {
    #[error("missing or unsupported header (expected {MAGIC:?})")]
    BadHeader,
    #[error("invalid node count {0:?}")]
    BadCount(String),
    #[error("dimension mismatch: expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid number {0:?}")]
    BadNumber(String),
    #[error("negative weight {value} at ({row}, {col})")]
    NegativeWeight { row: usize, col: usize, value: f64 },
    #[error("non-finite weight at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("nonzero diagonal at node {0}")]
    NonzeroDiagonal(usize),
    #[error("row {0} has no positive entry")]
    EmptyRow(usize),
    #[error("coincident nodes {0} and {1}")]
    CoincidentNodes(usize, usize),
    #[error("beta must be positive and finite")]
    BadBeta,
    #[error("heatmap has {heatmap} nodes but instance has {instance}")]
    SizeMismatch { heatmap: usize, instance: usize },
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    n: usize,
    weights: Vec<f64>,
}

impl Heatmap {
    /// Validates a row-major `n × n` matrix.
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self, HeatmapError> {
        if weights.len() != n * n {
            return Err(HeatmapError::DimensionMismatch {
                expected: n * n,
                found: weights.len(),
            });
        }
        for (k, &w) in weights.iter().enumerate() {
            let (row, col) = (k / n, k % n);
            if !w.is_finite() {
                return Err(HeatmapError::NonFinite { row, col });
            }
            if w < 0.0 {
                return Err(HeatmapError::NegativeWeight { row, col, value: w });
            }
            if row == col && w != 0.0 {
                return Err(HeatmapError::NonzeroDiagonal(row));
            }
        }
        if n > 1 {
            if let Some(row) = (0..n).find(|&i| weights[i * n..(i + 1) * n].iter().all(|&w| w == 0.0)) {
                return Err(HeatmapError::EmptyRow(row));
            }
        }
        Ok(Self { n, weights })
    }

    pub fn uniform(n: usize) -> Self {
        let weights = (0..n * n).map(|k| if k / n == k % n { 0.0 } else { 1.0 }).collect();
        Self { n, weights }
    }

    /// `w[i][j] = dist(i, j)^(-beta)` off the diagonal.
    pub fn inverse_distance(inst: &RoutingInstance, beta: f64) -> Result<Self, HeatmapError> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(HeatmapError::BadBeta);
        }
        let n = inst.n();
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = inst.dist(i, j);
                if d <= 0.0 {
                    return Err(HeatmapError::CoincidentNodes(i.min(j), i.max(j)));
                }
                weights[i * n + j] = d.recip().powf(beta);
            }
        }
        Self::new(n, weights)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Row `st.current` with masked entries zeroed.
    pub fn policy_weights(&self, st: &RouteState, mask: &[bool], out: &mut [f64]) {
        for ((o, &w), &m) in out.iter_mut().zip(self.row(st.current)).zip(mask) {
            *o = if m { w } else { 0.0 };
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(16 + self.weights.len() * 20);
        s.push_str(MAGIC);
        s.push('\n');
        s.push_str(&self.n.to_string());
        s.push('\n');
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|w| w.to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, HeatmapError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim_end) != Some(MAGIC) {
            return Err(HeatmapError::BadHeader);
        }
        let count = lines.next().unwrap_or("").trim();
        let n: usize = count.parse().map_err(|_| HeatmapError::BadCount(count.to_string()))?;
        let mut weights = Vec::with_capacity(n * n);
        for tok in lines.flat_map(str::split_whitespace) {
            weights.push(
                tok.parse::<f64>()
                    .map_err(|_| HeatmapError::BadNumber(tok.to_string()))?,
            );
        }
        Self::new(n, weights)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<(), HeatmapError> {
        fs::write(path, self.to_text()).map_err(|e| HeatmapError::Io(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HeatmapError> {
        let text = fs::read_to_string(path).map_err(|e| HeatmapError::Io(e.to_string()))?;
        Self::from_text(&text)
    }
}

impl Policy<RoutingInstance> for Heatmap {
    fn weights(&self, env: &RoutingInstance, state: &RouteState, out: &mut [f64]) -> Result<()> {
        if self.n != env.n() {
            return Err(HeatmapError::SizeMismatch {
                heatmap: self.n,
                instance: env.n(),
            }
            .into());
        }
        for ((j, o), &w) in out.iter_mut().enumerate().zip(self.row(state.current)) {
            *o = if env.is_move_feasible(state, j) { w } else { 0.0 };
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoding::Environment;
    use crate::routing::feasible_mask;

    fn square(scale: f64) -> RoutingInstance {
        RoutingInstance::tsp("sq", vec![[0.0, 0.0], [scale, 0.0], [scale, scale], [0.0, scale]]).unwrap()
    }

    #[test]
    fn inverse_distance_square() {
        let hm = Heatmap::inverse_distance(&square(1.0), 2.0).unwrap();
        let row = hm.row(0);
        assert_eq!(row[0], 0.0);
        assert_eq!(row[1], 1.0);
        assert_eq!(row[3], 1.0);
        assert!((row[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tiny_beta_is_nearly_uniform() {
        let hm = Heatmap::inverse_distance(&square(1.0), 1e-12).unwrap();
        for (k, &w) in hm.weights().iter().enumerate() {
            if k / 4 != k % 4 {
                assert!((w - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rescaling_distances_preserves_rows() {
        let beta = 3.0;
        let a = Heatmap::inverse_distance(&square(1.0), beta).unwrap();
        let b = Heatmap::inverse_distance(&square(2.0), beta).unwrap();
        for (x, y) in a.weights().iter().zip(b.weights()) {
            assert!((y - x * 2f64.powf(-beta)).abs() < 1e-12);
        }
        let inst = square(1.0);
        let st = inst.initial_state(0).unwrap();
        let (mut pa, mut pb) = (vec![0.0; 4], vec![0.0; 4]);
        Policy::weights(&a, &inst, &st, &mut pa).unwrap();
        Policy::weights(&b, &inst, &st, &mut pb).unwrap();
        let (sa, sb): (f64, f64) = (pa.iter().sum(), pb.iter().sum());
        for (x, y) in pa.iter().zip(&pb) {
            assert!((x / sa - y / sb).abs() < 1e-12);
        }
    }

    #[test]
    fn coincident_nodes_rejected() {
        let inst = RoutingInstance::tsp("c", vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!(
            Heatmap::inverse_distance(&inst, 1.0),
            Err(HeatmapError::CoincidentNodes(0, 1))
        );
    }

    #[test]
    fn policy_weights_match_mask() {
        let inst = square(1.0);
        let hm = Heatmap::inverse_distance(&inst, 2.0).unwrap();
        let mut st = inst.initial_state(0).unwrap();
        let mask = feasible_mask(&inst, &st).unwrap();
        let mut out = vec![0.0; 4];
        hm.policy_weights(&st, &mask, &mut out);
        assert_eq!(out, vec![0.0, 1.0, hm.row(0)[2], 1.0]);
        for j in [1, 2] {
            inst.apply(&mut st, j).unwrap();
        }
        let mask = feasible_mask(&inst, &st).unwrap();
        Heatmap::uniform(4).policy_weights(&st, &mask, &mut out);
        assert_eq!(out, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn parse_errors() {
        let short = format!("{MAGIC}\n4\n{}\n", vec!["0"; 15].join(" "));
        assert_eq!(
            Heatmap::from_text(&short),
            Err(HeatmapError::DimensionMismatch {
                expected: 16,
                found: 15
            })
        );
        let neg = format!("{MAGIC}\n2\n0 -0.1\n1 0\n");
        assert!(matches!(
            Heatmap::from_text(&neg),
            Err(HeatmapError::NegativeWeight { .. })
        ));
        let diag = format!("{MAGIC}\n2\n1 1\n1 0\n");
        assert_eq!(Heatmap::from_text(&diag), Err(HeatmapError::NonzeroDiagonal(0)));
        assert_eq!(Heatmap::from_text("HEATMAP\n2\n"), Err(HeatmapError::BadHeader));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.txt");
        let hm = Heatmap::inverse_distance(&square(0.37), 2.5).unwrap();
        hm.store(&path).unwrap();
        assert_eq!(Heatmap::load(&path).unwrap(), hm);
    }

    proptest::proptest! {
        #[test]
        fn text_round_trip_is_bit_exact(vals in proptest::collection::vec(1e-300f64..1e300, 20)) {
            let n = 5;
            let mut w = vec![0.0; n * n];
            let mut it = vals.into_iter();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        w[i * n + j] = it.next().unwrap();
                    }
                }
            }
            let hm = Heatmap::new(n, w).unwrap();
            let back = Heatmap::from_text(&hm.to_text()).unwrap();
            proptest::prop_assert!(hm.weights().iter().zip(back.weights()).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }
}
