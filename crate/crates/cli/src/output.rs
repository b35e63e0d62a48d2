//! Serializable records and number formatting for the CLI outputs.

use frolov_core::{ChebyshevSystem, CoveringStats};
use serde::Serialize;

/// Stats record, one per `(d, n)`.
#[derive(Debug, Serialize)]
pub struct StatsRecord {
    pub d: usize,
    pub n: u64,
    pub cube_points: u64,
    pub ellipsoid_points: u64,
    pub overhead: f64,
    pub bound_lower: Option<f64>,
    pub bound_upper: Option<f64>,
    pub in_regime: bool,
}

impl StatsRecord {
    pub fn new(d: usize, n: u64, s: &CoveringStats) -> Self {
        StatsRecord {
            d,
            n,
            cube_points: s.cube_points,
            ellipsoid_points: s.ellipsoid_points,
            overhead: s.overhead,
            bound_lower: s.in_regime.then_some(s.bound_lower),
            bound_upper: Some(s.bound_upper),
            in_regime: s.in_regime,
        }
    }

    pub fn sandwich_holds(&self) -> bool {
        let c = self.ellipsoid_points as f64;
        self.bound_lower.is_none_or(|lo| lo <= c) && self.bound_upper.is_none_or(|hi| c <= hi)
    }
}

#[derive(Debug, Serialize)]
pub struct BoundsRecord {
    #[serde(flatten)]
    pub stats: StatsRecord,
    pub holds: bool,
}

#[derive(Debug, Serialize)]
pub struct Diagnostics {
    pub gram_residual: f64,
    pub orthogonality_residual: f64,
    pub reduction_residual: f64,
    pub q_determinant: f64,
}

#[derive(Debug, Serialize)]
pub struct BasisRecord {
    pub d: usize,
    pub admissible: bool,
    pub roots: Vec<f64>,
    pub vandermonde: Vec<Vec<f64>>,
    pub orthogonal: Vec<Vec<f64>>,
    pub reduction: Vec<Vec<i64>>,
    pub q: Vec<Vec<f64>>,
    pub d_factor: Vec<f64>,
    pub gram_diagonal: Vec<f64>,
    pub determinant: f64,
    pub diagnostics: Diagnostics,
}

impl BasisRecord {
    pub fn new(sys: &ChebyshevSystem) -> Self {
        let gram = sys.orthogonal().matrix().gram();
        BasisRecord {
            d: sys.dim(),
            admissible: sys.admissible(),
            roots: sys.roots().to_vec(),
            vandermonde: sys.vandermonde().matrix().to_rows(),
            orthogonal: sys.orthogonal().matrix().to_rows(),
            reduction: sys.reduction().to_rows(),
            q: sys.q_factor().to_rows(),
            d_factor: sys.d_factor().to_vec(),
            gram_diagonal: (0..sys.dim()).map(|i| gram[(i, i)]).collect(),
            determinant: sys.orthogonal().det(),
            diagnostics: Diagnostics {
                gram_residual: sys.gram_residual(),
                orthogonality_residual: sys.orthogonality_residual(),
                reduction_residual: sys.reduction_residual(),
                q_determinant: sys.q_factor().determinant(),
            },
        }
    }

    /// Long-form CSV: `name,row,col,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,row,col,value\n");
        let mut vector = |name: &str, v: &[f64]| {
            for (i, x) in v.iter().enumerate() {
                s.push_str(&format!("{name},{},0,{x}\n", i + 1));
            }
        };
        vector("roots", &self.roots);
        vector("d_factor", &self.d_factor);
        vector("gram_diagonal", &self.gram_diagonal);
        let mut matrix = |name: &str, rows: &[Vec<f64>]| {
            for (i, row) in rows.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    s.push_str(&format!("{name},{},{},{x}\n", i + 1, j + 1));
                }
            }
        };
        matrix("vandermonde", &self.vandermonde);
        matrix("orthogonal", &self.orthogonal);
        matrix("q", &self.q);
        for (i, row) in self.reduction.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                s.push_str(&format!("reduction,{},{},{x}\n", i + 1, j + 1));
            }
        }
        s.push_str(&format!("admissible,0,0,{}\n", self.admissible));
        s.push_str(&format!("determinant,0,0,{}\n", self.determinant));
        s.push_str(&format!("gram_residual,0,0,{}\n", self.diagnostics.gram_residual));
        s.push_str(&format!("orthogonality_residual,0,0,{}\n", self.diagnostics.orthogonality_residual));
        s.push_str(&format!("reduction_residual,0,0,{}\n", self.diagnostics.reduction_residual));
        s
    }
}

/// Two decimals, halves rounded up.
pub fn two_decimals(x: f64) -> String {
    let cents = (x * 100.0).round() as i64;
    format!("{}.{:02}", cents / 100, cents % 100)
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn node_header(d: usize) -> String {
    (1..=d).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",")
}
