//! Frolov cubature nodes `X_n = T_n(Z^d) ∩ [-1/2, 1/2]^d` for the scaled
//! orthogonal basis `T_n = T~ / s_n`, `s_n = (n |det T~|)^{1/d}`.
//!
//! Because `T~ = Q D` with `Q` orthogonal, the preimage of the cube's bounding
//! ball is the axis-aligned ellipsoid
//! `K_n = { k : d k_1^2 + 2d (k_2^2 + ... + k_d^2) <= R_n^2 }` with
//! `R_n = (sqrt d / 2) (n det D)^{1/d}`. Candidates are streamed from `K_n`
//! and kept when `max_j |(T~ k)_j| <= s_n / 2`.
//!
//! `T~ k` is accumulated column by column down the enumeration, so every
//! innermost row shares one partial sum `a = sum_{j>=2} k_j t_j`. The first
//! column of `T~` is all ones, so the accepted `k_1` of a row form the integer
//! interval `{ k_1 : |a_i + k_1| <= s_n / 2 for all i }`; its endpoints are
//! estimated in closed form and then settled with the direct test.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::ellipsoid::PEllipsoid;
use crate::error::{FrolovError, Result};
use crate::lattice::{abs_det, det_d_squared, ChebyshevSystem};
use crate::matrix::Matrix;

/// `T_n = T~ / s_n`, a generating matrix with `|det T_n| = 1/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledBasis {
    system: ChebyshevSystem,
    n: u64,
    scale: f64,
    matrix: Matrix,
}

impl ScaledBasis {
    pub fn system(&self) -> &ChebyshevSystem {
        &self.system
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `s_n = (n sqrt(d (2d)^{d-1}))^{1/d}`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// `det T~ / s_n^d`, which is `+-1/n`.
    pub fn det(&self) -> f64 {
        self.system.orthogonal().det() / self.scale.powi(self.system.dim() as i32)
    }

    /// The point `T_n k`.
    pub fn apply(&self, k: &[i64]) -> Vec<f64> {
        self.matrix.mul_int(k)
    }
}

pub fn scaled_basis(system: &ChebyshevSystem, n: u64) -> Result<ScaledBasis> {
    check_n(n)?;
    let d = system.dim();
    let scale = (n as f64 * abs_det(d)).powf(1.0 / d as f64);
    let matrix = system.orthogonal().matrix().scale(1.0 / scale);
    Ok(ScaledBasis { system: system.clone(), n, scale, matrix })
}

/// `K_n` as an l_2 ellipsoid with weights `(d, 2d, ..., 2d)` (that is,
/// `mu_j = 1 / lambda_j`) and `R_n^2 = (d/4) (n^2 d (2d)^{d-1})^{1/d}`.
pub fn covering_ellipsoid(system: &ChebyshevSystem, n: u64) -> Result<PEllipsoid> {
    check_n(n)?;
    let d = system.dim();
    let nf = n as f64;
    let radius_sq = d as f64 / 4.0 * (nf * nf * det_d_squared(d)).powf(1.0 / d as f64);
    let mut weights = vec![(2 * d) as f64; d];
    weights[0] = d as f64;
    PEllipsoid::from_weights(2.0, radius_sq, weights)
}

/// Candidate and node counts plus the asymptotic comparison values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveringStats {
    /// `|X_n|`
    pub cube_points: u64,
    /// `|K_n|`
    pub ellipsoid_points: u64,
    /// `|K_n| / |X_n|`
    pub overhead: f64,
    pub bound_lower: f64,
    pub bound_upper: f64,
    /// `n > 2^{3d/2}`, where `bound_lower` is meaningful.
    pub in_regime: bool,
    /// `vol((sqrt d / 2) B_2^d)`
    pub overhead_limit: f64,
}

impl CoveringStats {
    fn new(d: usize, n: u64, cube_points: u64, ellipsoid_points: u64) -> Self {
        let bounds = kn_bounds(d, n);
        CoveringStats {
            cube_points,
            ellipsoid_points,
            overhead: ellipsoid_points as f64 / cube_points as f64,
            bound_lower: bounds.lower,
            bound_upper: bounds.upper,
            in_regime: bounds.in_regime,
            overhead_limit: overhead_limit(d).limit,
        }
    }
}

/// The node set with its integer preimages, both in enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    dim: usize,
    n: u64,
    nodes: Vec<f64>,
    preimages: Vec<i64>,
    stats: CoveringStats,
}

impl NodeSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.preimages.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.preimages.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn preimage(&self, i: usize) -> &[i64] {
        &self.preimages[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn preimages(&self) -> impl ExactSizeIterator<Item = &[i64]> + '_ {
        self.preimages.chunks_exact(self.dim)
    }

    pub fn stats(&self) -> &CoveringStats {
        &self.stats
    }
}

/// Knobs for the enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationOptions {
    /// Nodes are accepted when `|x_j| <= 1/2 + tolerance`.
    pub tolerance: f64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions { tolerance: 0.0, threads: None }
    }
}

pub fn enumerate_nodes(system: &ChebyshevSystem, n: u64) -> Result<NodeSet> {
    enumerate_nodes_with(system, n, &EnumerationOptions::default())
}

/// Materialize `X_n` and count `K_n`.
pub fn enumerate_nodes_with(system: &ChebyshevSystem, n: u64, opts: &EnumerationOptions) -> Result<NodeSet> {
    let basis = scaled_basis(system, n)?;
    let ellipsoid = covering_ellipsoid(system, n)?;
    let kernel = Kernel::new(&basis, &ellipsoid, opts.tolerance)?;
    let parts = kernel.partitions();
    let chunks: Vec<NodeSink> = run_pool(opts.threads, || {
        parts
            .par_iter()
            .map(|part| {
                let mut sink = NodeSink { scale: basis.scale, ..Default::default() };
                kernel.run(part, &mut sink);
                sink
            })
            .collect()
    })?;

    let d = system.dim();
    let total: usize = chunks.iter().map(|c| c.preimages.len()).sum();
    let mut nodes = Vec::with_capacity(total);
    let mut preimages = Vec::with_capacity(total);
    let mut ellipsoid_points = 0;
    for c in chunks {
        nodes.extend_from_slice(&c.nodes);
        preimages.extend_from_slice(&c.preimages);
        ellipsoid_points += c.ellipsoid_points;
    }
    let cube_points = (preimages.len() / d) as u64;
    Ok(NodeSet { dim: d, n, nodes, preimages, stats: CoveringStats::new(d, n, cube_points, ellipsoid_points) })
}

/// `|X_n|` and `|K_n|` without materializing either set.
pub fn count_nodes(system: &ChebyshevSystem, n: u64, opts: &EnumerationOptions) -> Result<CoveringStats> {
    let basis = scaled_basis(system, n)?;
    let ellipsoid = covering_ellipsoid(system, n)?;
    let kernel = Kernel::new(&basis, &ellipsoid, opts.tolerance)?;
    let parts = kernel.partitions();
    let (cube, ell) = run_pool(opts.threads, || {
        parts
            .par_iter()
            .map(|part| {
                let mut sink = CountSink::default();
                kernel.run(part, &mut sink);
                (sink.cube_points, sink.ellipsoid_points)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    })?;
    Ok(CoveringStats::new(system.dim(), n, cube, ell))
}

/// Bounds on `|K_n|`:
/// `n (1 -+ 2^{3/2} n^{-1/d})^d (d pi)^{d/2} / (2^d Gamma(d/2 + 1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnBounds {
    /// Clamped to 0 out of regime.
    pub lower: f64,
    pub upper: f64,
    pub in_regime: bool,
}

pub fn kn_bounds(d: usize, n: u64) -> KnBounds {
    let df = d as f64;
    let nf = n as f64;
    let prefactor = kn_prefactor(d);
    let c = 2f64.powf(1.5) / nf.powf(1.0 / df);
    let in_regime = nf > 2f64.powf(1.5 * df);
    let lower = if in_regime { nf * (1.0 - c).powi(d as i32) * prefactor } else { 0.0 };
    KnBounds { lower, upper: nf * (1.0 + c).powi(d as i32) * prefactor, in_regime }
}

/// `(d pi)^{d/2} / (2^d Gamma(d/2 + 1))`, the volume of `(sqrt d / 2) B_2^d`.
pub fn kn_prefactor(d: usize) -> f64 {
    let df = d as f64;
    (0.5 * df * (df * PI / 4.0).ln() - ln_gamma(df / 2.0 + 1.0)).exp()
}

/// Limiting value of `|K_n| / |X_n|` and its exponential cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadLimit {
    /// `vol((sqrt d / 2) B_2^d) = (d pi / 4)^{d/2} / Gamma(d/2 + 1)`
    pub limit: f64,
    /// `(pi e / 2)^{d/2}`
    pub cap: f64,
    /// `(pi e / 2)^{1/2}`, about 2.0664
    pub per_dim_factor: f64,
}

pub fn overhead_limit(d: usize) -> OverheadLimit {
    let per_dim_factor = (PI * std::f64::consts::E / 2.0).sqrt();
    OverheadLimit { limit: kn_prefactor(d), cap: per_dim_factor.powi(d as i32), per_dim_factor }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(FrolovError::domain("scaling parameter n must be >= 1"));
    }
    Ok(())
}

fn run_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| FrolovError::domain(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Fixed top-level prefix of the enumeration tree. Partitions depend only on
/// the ellipsoid, so results never depend on the number of workers.
#[derive(Debug, Clone)]
struct Partition {
    /// values of axes `d-1, d-2, ...` down to `axis + 1`
    prefix: Vec<i64>,
    sum: f64,
}

const MIN_PARTITIONS: usize = 256;

trait RowSink {
    /// `partial` holds `sum_{j>=2} k_j t_j`, `k` the current vector with
    /// `k[0]` unset, `cube` the accepted `k_1` values, `bound` the ellipsoid
    /// bound on `|k_1|`.
    fn row(&mut self, partial: &[f64], k: &[i64], cube: RangeInclusive<i64>, bound: i64);
}

#[derive(Default)]
struct CountSink {
    cube_points: u64,
    ellipsoid_points: u64,
}

impl RowSink for CountSink {
    #[inline]
    fn row(&mut self, _: &[f64], _: &[i64], cube: RangeInclusive<i64>, bound: i64) {
        self.ellipsoid_points += (2 * bound + 1) as u64;
        if cube.start() <= cube.end() {
            self.cube_points += (cube.end() - cube.start() + 1) as u64;
        }
    }
}

#[derive(Default)]
struct NodeSink {
    scale: f64,
    nodes: Vec<f64>,
    preimages: Vec<i64>,
    ellipsoid_points: u64,
}

impl RowSink for NodeSink {
    fn row(&mut self, partial: &[f64], k: &[i64], cube: RangeInclusive<i64>, bound: i64) {
        self.ellipsoid_points += (2 * bound + 1) as u64;
        for k1 in cube {
            self.preimages.push(k1);
            self.preimages.extend_from_slice(&k[1..]);
            self.nodes.extend(partial.iter().map(|a| (a + k1 as f64) / self.scale));
        }
    }
}

struct Kernel<'a> {
    ellipsoid: &'a PEllipsoid,
    /// `columns[j]` is column `j` of `T~`; column 0 is all ones and unused.
    columns: Vec<Vec<f64>>,
    half_width: f64,
    dim: usize,
}

impl<'a> Kernel<'a> {
    fn new(basis: &ScaledBasis, ellipsoid: &'a PEllipsoid, tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance > -0.5) {
            return Err(FrolovError::domain(format!("cube tolerance {tolerance} out of range")));
        }
        let t = basis.system().orthogonal().matrix();
        let dim = t.rows();
        debug_assert!((0..dim).all(|i| t[(i, 0)] == 1.0));
        Ok(Kernel {
            ellipsoid,
            columns: (0..dim).map(|j| t.column(j)).collect(),
            half_width: basis.scale() * (0.5 + tolerance),
            dim,
        })
    }

    fn partitions(&self) -> Vec<Partition> {
        let d = self.dim;
        let mut parts = vec![Partition { prefix: Vec::new(), sum: 0.0 }];
        // expand one axis at a time, never the innermost one
        for axis in (1..d).rev() {
            if parts.len() >= MIN_PARTITIONS {
                break;
            }
            let mut next = Vec::new();
            for p in &parts {
                let b = self.ellipsoid.axis_bound(axis, p.sum);
                for k in -b..=b {
                    let mut prefix = p.prefix.clone();
                    prefix.push(k);
                    next.push(Partition { prefix, sum: p.sum + self.ellipsoid.term(axis, k) });
                }
            }
            parts = next;
        }
        parts
    }

    fn run(&self, part: &Partition, sink: &mut impl RowSink) {
        let d = self.dim;
        let mut k = vec![0i64; d];
        // acc[j * d..(j + 1) * d] = sum_{i >= j} k_i t_i, acc for j = d is zero
        let mut acc = vec![0.0; (d + 1) * d];
        for (depth, &v) in part.prefix.iter().enumerate() {
            let axis = d - 1 - depth;
            k[axis] = v;
            self.push_column(&mut acc, axis, v);
        }
        let axis = d - 1 - part.prefix.len();
        self.level(axis, part.sum, &mut k, &mut acc, sink);
    }

    #[inline]
    fn push_column(&self, acc: &mut [f64], axis: usize, v: i64) {
        let d = self.dim;
        let (lower, upper) = acc.split_at_mut((axis + 1) * d);
        let dst = &mut lower[axis * d..];
        let src = &upper[..d];
        let col = &self.columns[axis];
        let vf = v as f64;
        for i in 0..d {
            dst[i] = src[i] + vf * col[i];
        }
    }

    fn level(&self, axis: usize, sum: f64, k: &mut [i64], acc: &mut [f64], sink: &mut impl RowSink) {
        let b = self.ellipsoid.axis_bound(axis, sum);
        if axis == 0 {
            let d = self.dim;
            let partial = &acc[d..2 * d];
            let cube = self.cube_interval(partial, b);
            sink.row(partial, k, cube, b);
            return;
        }
        for v in -b..=b {
            k[axis] = v;
            self.push_column(acc, axis, v);
            self.level(axis - 1, sum + self.ellipsoid.term(axis, v), k, acc, sink);
        }
    }

    #[inline]
    fn accepts(&self, partial: &[f64], k1: i64) -> bool {
        let x = k1 as f64;
        partial.iter().all(|a| (a + x).abs() <= self.half_width)
    }

    /// `{ k_1 in [-bound, bound] : |a_i + k_1| <= h for all i }`.
    fn cube_interval(&self, partial: &[f64], bound: i64) -> RangeInclusive<i64> {
        let h = self.half_width;
        let (mut lo_f, mut hi_f) = (f64::NEG_INFINITY, f64::INFINITY);
        for &a in partial {
            lo_f = lo_f.max(-h - a);
            hi_f = hi_f.min(h - a);
        }
        let mut lo = (lo_f.ceil().max(-(bound as f64) - 1.0)) as i64;
        let mut hi = (hi_f.floor().min(bound as f64 + 1.0)) as i64;
        if lo > hi + 2 {
            return empty();
        }
        lo = lo.max(-bound);
        hi = hi.min(bound);
        // settle the endpoints against the direct test
        while lo > -bound && self.accepts(partial, lo - 1) {
            lo -= 1;
        }
        while hi < bound && self.accepts(partial, hi + 1) {
            hi += 1;
        }
        while lo <= hi && !self.accepts(partial, lo) {
            lo += 1;
        }
        while hi >= lo && !self.accepts(partial, hi) {
            hi -= 1;
        }
        if lo > hi {
            return empty();
        }
        lo..=hi
    }
}

#[allow(clippy::reversed_empty_ranges)]
fn empty() -> RangeInclusive<i64> {
    1..=0
}
