//! Frolov cubature `Phi(n; f) = (1/n) sum_{x in X_n} f(x)` for integrands
//! supported in `[-1/2, 1/2]^d`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{FrolovError, Result};
use crate::lattice::ChebyshevSystem;
use crate::nodes::{enumerate_nodes_with, EnumerationOptions, NodeSet};

/// `int_{-1/2}^{1/2} exp(-1 / (1/4 - x^2)) dx`, from a 40-digit adaptive
/// quadrature; the unit tests re-derive it with an independent Gauss-Legendre rule.
pub const SMOOTH_BUMP_1D: f64 = 0.007_029_858_406_609_656_2;

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A real function on `R^d` that vanishes outside the unit cube.
#[derive(Clone)]
pub struct Integrand {
    name: String,
    dim: usize,
    eval: Arc<EvalFn>,
    exact_integral: Option<f64>,
}

impl Integrand {
    pub fn new(name: impl Into<String>, dim: usize, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Integrand { name: name.into(), dim, eval: Arc::new(eval), exact_integral: None }
    }

    pub fn with_exact_integral(mut self, value: f64) -> Self {
        self.exact_integral = Some(value);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exact_integral(&self) -> Option<f64> {
        self.exact_integral
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// `alpha f + beta g`, with the exact integral combined when both are known.
    pub fn linear_combination(alpha: f64, f: &Integrand, beta: f64, g: &Integrand) -> Result<Integrand> {
        if f.dim != g.dim {
            return Err(FrolovError::DimensionMismatch { expected: f.dim, actual: g.dim });
        }
        let (ff, gg) = (f.clone(), g.clone());
        let combined = Integrand::new(format!("{alpha}*{}+{beta}*{}", f.name, g.name), f.dim, move |x| {
            alpha * ff.eval(x) + beta * gg.eval(x)
        });
        Ok(match (f.exact_integral, g.exact_integral) {
            (Some(a), Some(b)) => combined.with_exact_integral(alpha * a + beta * b),
            _ => combined,
        })
    }
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("exact_integral", &self.exact_integral)
            .finish_non_exhaustive()
    }
}

fn in_cube(x: &[f64]) -> bool {
    x.iter().all(|v| v.abs() <= 0.5)
}

/// Names accepted by [`builtin_integrand`].
pub const BUILTIN_NAMES: [&str; 3] = ["const", "quadbump", "smoothbump"];

/// The built-in test family: indicator of the cube, the tensor quadratic bump
/// `prod (1/4 - x_j^2)` and the tensor smooth bump `prod exp(-1/(1/4 - x_j^2))`.
pub fn builtin_integrands(d: usize) -> Result<Vec<Integrand>> {
    if d < 2 {
        return Err(FrolovError::DegenerateDimension(d));
    }
    Ok(BUILTIN_NAMES.iter().map(|name| builtin_integrand(name, d).expect("known name")).collect())
}

pub fn builtin_integrand(name: &str, d: usize) -> Option<Integrand> {
    let di = d as i32;
    match name {
        "const" => Some(Integrand::new("const", d, |x| if in_cube(x) { 1.0 } else { 0.0 }).with_exact_integral(1.0)),
        "quadbump" => Some(
            Integrand::new("quadbump", d, |x| if in_cube(x) { x.iter().map(|v| 0.25 - v * v).product() } else { 0.0 })
                .with_exact_integral((1.0f64 / 6.0).powi(di)),
        ),
        "smoothbump" => Some(
            Integrand::new("smoothbump", d, |x| {
                let mut acc = 1.0;
                for v in x {
                    let q = 0.25 - v * v;
                    if q <= 0.0 {
                        return 0.0;
                    }
                    acc *= (-1.0 / q).exp();
                }
                acc
            })
            .with_exact_integral(SMOOTH_BUMP_1D.powi(di)),
        ),
        _ => None,
    }
}

/// One cubature evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CubatureResult {
    pub n: u64,
    pub node_count: u64,
    pub value: f64,
    /// `|Phi - I(f)|` when the exact integral is known.
    pub error: Option<f64>,
    pub warning: Option<String>,
}

pub fn frolov_quadrature(system: &ChebyshevSystem, n: u64, f: &Integrand) -> Result<CubatureResult> {
    frolov_quadrature_with(system, n, f, &EnumerationOptions::default())
}

pub fn frolov_quadrature_with(
    system: &ChebyshevSystem,
    n: u64,
    f: &Integrand,
    opts: &EnumerationOptions,
) -> Result<CubatureResult> {
    if f.dim() != system.dim() {
        return Err(FrolovError::DimensionMismatch { expected: system.dim(), actual: f.dim() });
    }
    let nodes = enumerate_nodes_with(system, n, opts)?;
    let mut result = quadrature_on_nodes(&nodes, f)?;
    if !system.admissible() {
        result.warning = Some(non_admissible_warning(system.dim()));
    }
    Ok(result)
}

pub fn non_admissible_warning(d: usize) -> String {
    format!("dimension {d} is not a power of two: the Chebyshev lattice is not admissible")
}

/// Nodes summed per fixed chunk in stream order; chunk sums are merged in
/// order, so the value does not depend on the worker count.
const CHUNK: usize = 4096;

/// Evaluate the cubature sum on an already enumerated node set.
pub fn quadrature_on_nodes(nodes: &NodeSet, f: &Integrand) -> Result<CubatureResult> {
    if f.dim() != nodes.dim() {
        return Err(FrolovError::DimensionMismatch { expected: nodes.dim(), actual: f.dim() });
    }
    let count = nodes.len();
    let partials: Vec<CompensatedSum> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut s = CompensatedSum::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(count) {
                s.add(f.eval(nodes.node(i)));
            }
            s
        })
        .collect();
    let mut total = CompensatedSum::default();
    for p in &partials {
        total.merge(p);
    }
    let value = total.value() / nodes.n() as f64;
    Ok(CubatureResult {
        n: nodes.n(),
        node_count: count as u64,
        value,
        error: f.exact_integral().map(|exact| (value - exact).abs()),
        warning: None,
    })
}

/// One row per `n`, each computed independently.
pub fn convergence_study(
    system: &ChebyshevSystem,
    f: &Integrand,
    n_list: &[u64],
    opts: &EnumerationOptions,
) -> Result<Vec<CubatureResult>> {
    if f.exact_integral().is_none() {
        return Err(FrolovError::domain(format!("integrand '{}' has no exact integral", f.name())));
    }
    n_list.iter().map(|&n| frolov_quadrature_with(system, n, f, opts)).collect()
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.compensation += other.compensation;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
