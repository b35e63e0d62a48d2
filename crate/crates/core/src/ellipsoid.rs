//! Integer points in axis-aligned l_p ellipsoids
//! `E = { x : sum_j |x_j / mu_j|^p <= R^p }`.
//!
//! Points are produced by peeling off the last coordinate: for each `k_d` with
//! `|k_d| <= R mu_d` recurse into dimensions `1..d-1` with the remaining
//! budget `R^p - |k_d / mu_d|^p`. Internally the ellipsoid is stored as weights
//! `w_j = mu_j^-p` and a budget `R^p`, and membership of an integer vector is
//! the floating-point test
//!
//! ```text
//! ((w_d |k_d|^p + w_{d-1} |k_{d-1}|^p) + ...) + w_1 |k_1|^p <= R^p
//! ```
//!
//! accumulated outermost coordinate first. Every prefix of that sum is
//! monotone, so each loop bound is computed exactly against the same test and
//! the enumeration never drops a boundary point nor emits one outside.

use std::ops::RangeInclusive;

use statrs::function::gamma::ln_gamma;

use crate::error::{FrolovError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PEllipsoid {
    p: f64,
    radius: f64,
    radius_pow: f64,
    scales: Vec<f64>,
    weights: Vec<f64>,
}

impl PEllipsoid {
    /// `E_{p,d}(R; mu_1, ..., mu_d)`. A negative radius gives the empty set.
    pub fn new(p: f64, radius: f64, scales: Vec<f64>) -> Result<Self> {
        check_exponent(p)?;
        if !radius.is_finite() {
            return Err(FrolovError::domain("radius must be finite"));
        }
        check_positive(&scales, "scales")?;
        let weights = scales.iter().map(|&mu| inv_pow(mu, p)).collect();
        let radius_pow = if radius < 0.0 { -1.0 } else { radius.powf(p) };
        Ok(PEllipsoid { p, radius, radius_pow, scales, weights })
    }

    /// The ellipsoid `sum_j w_j |x_j|^p <= radius_pow`, i.e. `mu_j = w_j^{-1/p}`
    /// and `R = radius_pow^{1/p}`. Integer weights keep membership sums exact.
    pub fn from_weights(p: f64, radius_pow: f64, weights: Vec<f64>) -> Result<Self> {
        check_exponent(p)?;
        if !radius_pow.is_finite() {
            return Err(FrolovError::domain("radius must be finite"));
        }
        check_positive(&weights, "weights")?;
        let scales = weights.iter().map(|&w| w.powf(-1.0 / p)).collect();
        let radius = if radius_pow < 0.0 { -1.0 } else { radius_pow.powf(1.0 / p) };
        Ok(PEllipsoid { p, radius, radius_pow, scales, weights })
    }

    pub fn dim(&self) -> usize {
        self.scales.len()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `R^p`, the budget the weighted sum is compared against.
    pub fn radius_pow(&self) -> f64 {
        self.radius_pow
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_empty(&self) -> bool {
        self.radius_pow < 0.0
    }

    /// `w_j |k|^p`.
    #[inline]
    pub fn term(&self, axis: usize, k: i64) -> f64 {
        let a = k.unsigned_abs() as f64;
        let w = self.weights[axis];
        if self.p == 2.0 {
            w * (a * a)
        } else if self.p == 1.0 {
            w * a
        } else {
            w * a.powf(self.p)
        }
    }

    /// Largest `k >= 0` with `prefix + term(axis, k) <= R^p`. The caller
    /// guarantees `prefix <= R^p`, so `k = 0` always qualifies.
    #[inline]
    pub fn axis_bound(&self, axis: usize, prefix: f64) -> i64 {
        let budget = (self.radius_pow - prefix).max(0.0);
        let est = (budget / self.weights[axis]).powf(1.0 / self.p).floor();
        let mut k = if est.is_finite() { est.min(i64::MAX as f64 / 4.0) as i64 } else { 0 };
        while prefix + self.term(axis, k + 1) <= self.radius_pow {
            k += 1;
        }
        while k > 0 && prefix + self.term(axis, k) > self.radius_pow {
            k -= 1;
        }
        k
    }

    /// Range of the outermost coordinate `k_d`; empty if the ellipsoid is.
    pub fn outer_range(&self) -> RangeInclusive<i64> {
        if self.is_empty() {
            #[allow(clippy::reversed_empty_ranges)]
            return 1..=0;
        }
        let b = self.axis_bound(self.dim() - 1, 0.0);
        -b..=b
    }

    /// Split the outer range into at most `parts` contiguous, disjoint,
    /// ascending sub-ranges covering it.
    pub fn split_outer(&self, parts: usize) -> Vec<RangeInclusive<i64>> {
        split_range(self.outer_range(), parts)
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        assert_eq!(k.len(), self.dim());
        if self.is_empty() {
            return false;
        }
        let mut s = 0.0;
        for axis in (0..self.dim()).rev() {
            s += self.term(axis, k[axis]);
        }
        s <= self.radius_pow
    }

    /// Stream every integer point, `k_d` outermost and ascending.
    pub fn enumerate(&self) -> IntegerPointStream<'_> {
        IntegerPointStream::new(self, self.outer_range())
    }

    /// Stream the points whose outer coordinate lies in `outer`.
    pub fn enumerate_outer(&self, outer: RangeInclusive<i64>) -> IntegerPointStream<'_> {
        let full = self.outer_range();
        let lo = (*outer.start()).max(*full.start());
        let hi = (*outer.end()).min(*full.end());
        IntegerPointStream::new(self, lo..=hi)
    }

    /// Number of integer points, without materializing them.
    pub fn count(&self) -> u64 {
        let r = self.outer_range();
        self.count_outer(r)
    }

    /// Number of points with outer coordinate in `outer`.
    pub fn count_outer(&self, outer: RangeInclusive<i64>) -> u64 {
        if self.is_empty() {
            return 0;
        }
        let d = self.dim();
        let full = self.outer_range();
        let lo = (*outer.start()).max(*full.start());
        let hi = (*outer.end()).min(*full.end());
        if d == 1 {
            return if lo <= hi { (hi - lo + 1) as u64 } else { 0 };
        }
        let mut total = 0;
        for k in lo..=hi {
            total += self.count_level(d - 2, self.term(d - 1, k));
        }
        total
    }

    fn count_level(&self, axis: usize, prefix: f64) -> u64 {
        let b = self.axis_bound(axis, prefix);
        if axis == 0 {
            return (2 * b + 1) as u64;
        }
        // term(axis, k) == term(axis, -k)
        let mut total = self.count_level(axis - 1, prefix);
        for k in 1..=b {
            total += 2 * self.count_level(axis - 1, prefix + self.term(axis, k));
        }
        total
    }

    /// `r(mu, p) = 1/2 (sum_j mu_j^-p)^{1/p}`.
    pub fn lattice_radius(&self) -> f64 {
        0.5 * self.weights.iter().sum::<f64>().powf(1.0 / self.p)
    }

    /// Volume of `E(1; mu)`.
    pub fn unit_volume(&self) -> f64 {
        // vol(B_p^d) prod mu_j, with prod mu_j = (prod w_j)^{-1/p}
        let prod_mu: f64 = self.scales.iter().product();
        lp_ball_volume(self.dim(), self.p) * prod_mu
    }

    /// Lower and upper bounds on the number of integer points,
    /// `(R^q -+ r^q)^{d/q} vol(E(1; mu))` with `q = min(p, 1)`. The lower bound
    /// is clamped to 0 when `R <= r(mu, p)`, where it carries no information.
    pub fn cardinality_bounds(&self) -> (f64, f64) {
        let d = self.dim() as f64;
        let q = self.p.min(1.0);
        let r = self.lattice_radius();
        let big_r = self.radius.max(0.0);
        let vol = self.unit_volume();
        let upper = (big_r.powf(q) + r.powf(q)).powf(d / q) * vol;
        let lower = if big_r > r { (big_r.powf(q) - r.powf(q)).powf(d / q) * vol } else { 0.0 };
        (lower, upper)
    }
}

/// `vol(B_p^d) = 2^d Gamma(1 + 1/p)^d / Gamma(d/p + 1)`.
pub fn lp_ball_volume(d: usize, p: f64) -> f64 {
    let d = d as f64;
    // log-space keeps d = 32 with small p finite
    let ln = d * std::f64::consts::LN_2 + d * ln_gamma(1.0 + 1.0 / p) - ln_gamma(d / p + 1.0);
    ln.exp()
}

/// Closed-form volume of `E_{p,d}(1; mu)`.
pub fn unit_volume(d: usize, p: f64, scales: &[f64]) -> Result<f64> {
    if d == 0 || scales.len() != d {
        return Err(FrolovError::DimensionMismatch { expected: d, actual: scales.len() });
    }
    check_exponent(p)?;
    check_positive(scales, "scales")?;
    Ok(lp_ball_volume(d, p) * scales.iter().product::<f64>())
}

/// Iterator over `Z^d ∩ E` in lexicographic order on `(k_d, ..., k_1)`.
#[derive(Debug, Clone)]
pub struct IntegerPointStream<'a> {
    ellipsoid: &'a PEllipsoid,
    point: Vec<i64>,
    upper: Vec<i64>,
    // prefix[j] = sum of terms for axes j..d
    prefix: Vec<f64>,
    outer_end: i64,
    started: bool,
    done: bool,
}

impl<'a> IntegerPointStream<'a> {
    fn new(ellipsoid: &'a PEllipsoid, outer: RangeInclusive<i64>) -> Self {
        let d = ellipsoid.dim();
        let (lo, hi) = (*outer.start(), *outer.end());
        let mut s = IntegerPointStream {
            ellipsoid,
            point: vec![0; d],
            upper: vec![0; d],
            prefix: vec![0.0; d + 1],
            outer_end: hi,
            started: false,
            done: ellipsoid.is_empty() || lo > hi,
        };
        if !s.done {
            s.point[d - 1] = lo;
            s.upper[d - 1] = hi;
            s.prefix[d - 1] = ellipsoid.term(d - 1, lo);
            s.descend(d - 1);
        }
        s
    }

    pub fn ellipsoid(&self) -> &PEllipsoid {
        self.ellipsoid
    }

    /// Reset axes below `axis` to the start of their ranges.
    fn descend(&mut self, axis: usize) {
        for j in (0..axis).rev() {
            let b = self.ellipsoid.axis_bound(j, self.prefix[j + 1]);
            self.point[j] = -b;
            self.upper[j] = b;
            self.prefix[j] = self.prefix[j + 1] + self.ellipsoid.term(j, -b);
        }
    }

    fn advance(&mut self) {
        let d = self.point.len();
        for j in 0..d {
            if self.point[j] < self.upper[j] {
                self.point[j] += 1;
                self.prefix[j] = self.prefix[j + 1] + self.ellipsoid.term(j, self.point[j]);
                self.descend(j);
                return;
            }
        }
        self.done = true;
    }

    /// Next point without allocating.
    pub fn next_point(&mut self) -> Option<&[i64]> {
        if self.done {
            return None;
        }
        if self.started {
            self.advance();
            if self.done {
                return None;
            }
        }
        self.started = true;
        debug_assert!(self.point[self.point.len() - 1] <= self.outer_end);
        Some(&self.point)
    }
}

impl Iterator for IntegerPointStream<'_> {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        self.next_point().map(<[i64]>::to_vec)
    }
}

pub(crate) fn split_range(r: RangeInclusive<i64>, parts: usize) -> Vec<RangeInclusive<i64>> {
    let (lo, hi) = (*r.start(), *r.end());
    if lo > hi || parts == 0 {
        return Vec::new();
    }
    let len = (hi - lo + 1) as u64;
    let parts = (parts as u64).min(len);
    let mut out = Vec::with_capacity(parts as usize);
    let mut start = lo;
    for i in 0..parts {
        let size = len / parts + u64::from(i < len % parts);
        let end = start + size as i64 - 1;
        out.push(start..=end);
        start = end + 1;
    }
    out
}

fn inv_pow(mu: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0 / (mu * mu)
    } else if p == 1.0 {
        1.0 / mu
    } else {
        mu.powf(-p)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 0.0) {
        return Err(FrolovError::domain(format!("exponent p must be finite and positive, got {p}")));
    }
    Ok(())
}

fn check_positive(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(FrolovError::domain(format!("{what} must be non-empty")));
    }
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(FrolovError::domain(format!("{what} must be finite and positive")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;
    use std::f64::consts::PI;

    fn disc(r: f64) -> PEllipsoid {
        PEllipsoid::new(2.0, r, vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn one_dimensional_interval() {
        let e = PEllipsoid::new(2.0, 2.5, vec![1.0]).unwrap();
        let pts: Vec<_> = e.enumerate().collect();
        assert_eq!(pts, vec![vec![-2], vec![-1], vec![0], vec![1], vec![2]]);
        assert_eq!(e.count(), 5);
    }

    #[test]
    fn small_disc_and_diamond() {
        let e = disc(1.5);
        let pts: BTreeSet<_> = e.enumerate().collect();
        let mut brute = BTreeSet::new();
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                if (a * a + b * b) as f64 <= 2.25 {
                    brute.insert(vec![a, b]);
                }
            }
        }
        assert_eq!(pts, brute);
        assert_eq!(e.count(), 9);

        let diamond = PEllipsoid::new(1.0, 2.0, vec![1.0, 1.0]).unwrap();
        assert_eq!(diamond.enumerate().count(), 13);
        assert_eq!(diamond.count(), 13);
    }

    #[test]
    fn stream_order_is_lexicographic_outer_first() {
        let e = PEllipsoid::new(2.0, 2.0, vec![1.0, 0.7, 1.3]).unwrap();
        let pts: Vec<Vec<i64>> = e.enumerate().collect();
        let keys: Vec<Vec<i64>> = pts.iter().map(|k| k.iter().rev().copied().collect()).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn radius_zero_and_negative() {
        assert_eq!(disc(0.0).count(), 1);
        assert_eq!(disc(0.0).enumerate().collect::<Vec<_>>(), vec![vec![0, 0]]);
        assert_eq!(disc(-1.0).count(), 0);
        assert_eq!(disc(-1.0).enumerate().count(), 0);
    }

    #[test]
    fn rejects_non_finite_inputs() {
        assert!(PEllipsoid::new(f64::NAN, 1.0, vec![1.0]).is_err());
        assert!(PEllipsoid::new(2.0, f64::INFINITY, vec![1.0]).is_err());
        assert!(PEllipsoid::new(2.0, 1.0, vec![0.0]).is_err());
        assert!(PEllipsoid::new(2.0, 1.0, vec![]).is_err());
        assert!(PEllipsoid::new(f64::INFINITY, 1.0, vec![1.0]).is_err());
    }

    #[test]
    fn boundary_points_are_kept() {
        // k1^2 + k2^2 = 25 has 12 solutions on the circle
        let e = disc(5.0);
        let on_circle = e.enumerate().filter(|k| k[0] * k[0] + k[1] * k[1] == 25).count();
        assert_eq!(on_circle, 12);
        assert_eq!(e.count(), 81);
    }

    #[test]
    fn volumes() {
        assert!((unit_volume(2, 2.0, &[1.0, 1.0]).unwrap() - PI).abs() < 1e-13);
        assert!((unit_volume(2, 1.0, &[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-13);
        assert!((unit_volume(3, 2.0, &[1.0; 3]).unwrap() - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((unit_volume(2, 2.0, &[2.0, 0.5]).unwrap() - PI).abs() < 1e-13);
        assert!(unit_volume(2, 2.0, &[1.0]).is_err());
    }

    #[test]
    fn bounds_disc_radius_ten() {
        let e = disc(10.0);
        assert!((e.lattice_radius() - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        let (lo, hi) = e.cardinality_bounds();
        let r = 0.5 * 2f64.sqrt();
        assert!((lo - (10.0 - r).powi(2) * PI).abs() < 1e-9);
        assert!((hi - (10.0 + r).powi(2) * PI).abs() < 1e-9);
        assert!((lo - 271.3).abs() < 0.05 && (hi - 360.2).abs() < 0.05);
        assert_eq!(e.count(), 317);
    }

    #[test]
    fn bounds_quasi_norm_exponent() {
        let e = PEllipsoid::new(0.5, 9.0, vec![1.0, 1.0]).unwrap();
        let r = e.lattice_radius();
        assert!((r - 0.5 * 4.0).abs() < 1e-12); // (1 + 1)^2 / 2
        let vol = e.unit_volume();
        let (lo, hi) = e.cardinality_bounds();
        assert!((lo - (3.0 - r.sqrt()).powi(4) * vol).abs() < 1e-9);
        assert!((hi - (3.0 + r.sqrt()).powi(4) * vol).abs() < 1e-9);
        let c = e.count() as f64;
        assert!(lo <= c && c <= hi);
    }

    #[test]
    fn lower_bound_clamps_inside_lattice_radius() {
        let e = disc(0.5);
        assert_eq!(e.cardinality_bounds().0, 0.0);
    }

    #[test]
    fn disc_asymptotics() {
        let e = disc(1000.0);
        let ratio = e.count() as f64 / 1e6;
        assert!((ratio / PI - 1.0).abs() < 0.02);
    }

    #[test]
    fn split_covers_range() {
        let parts = split_range(-5..=5, 3);
        assert_eq!(parts, vec![-5..=-2, -1..=2, 3..=5]);
        assert_eq!(split_range(0..=1, 8), vec![0..=0, 1..=1]);
        #[allow(clippy::reversed_empty_ranges)]
        let empty = split_range(1..=0, 4);
        assert!(empty.is_empty());
    }

    #[test]
    fn partitioned_streams_concatenate_to_full_stream() {
        let e = PEllipsoid::new(2.0, 6.3, vec![1.0, 0.8, 1.1]).unwrap();
        let full: Vec<_> = e.enumerate().collect();
        for parts in [1, 2, 5, 64] {
            let merged: Vec<_> =
                e.split_outer(parts).into_iter().flat_map(|r| e.enumerate_outer(r).collect::<Vec<_>>()).collect();
            assert_eq!(merged, full);
            let counted: u64 = e.split_outer(parts).into_iter().map(|r| e.count_outer(r)).sum();
            assert_eq!(counted, full.len() as u64);
        }
    }
}
