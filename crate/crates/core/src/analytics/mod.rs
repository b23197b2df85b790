//! Branching-process quantities for cascades on infinite trees.
//!
//! A node activated on a d-regular tree activates `Bin(d - 1, p)` children
//! (the source activates `Bin(d, p)`); on a Poisson(λ) Galton–Watson tree
//! every activated node has `Po(λp)` active children by thinning. The
//! probability `x_t` that such a process has no active node `t` generations
//! below its root obeys `x_t = f(x_{t-1})` with `f` the offspring pgf and
//! `x_0 = 0`.

mod bessel;

pub use bessel::{bessel_i0, prob_all_children_activated, BesselI0};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("series kind {series:?} does not match the requested offspring law {requested:?}")]
    KindMismatch {
        series: OffspringLaw,
        requested: OffspringLaw,
    },
    #[error("index {index} is beyond the series (last index {last})")]
    IndexOutOfRange { index: usize, last: usize },
}

fn invalid(msg: impl Into<String>) -> AnalyticsError {
    AnalyticsError::InvalidParameter(msg.into())
}

/// Offspring law of non-root activated nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OffspringLaw {
    /// d-regular tree: `Bin(d - 1, p)` active children.
    Binomial { d: u32, p: f64 },
    /// Poisson Galton–Watson tree: `Po(mu)` active children, `mu = λp`.
    Poisson { mu: f64 },
}

impl OffspringLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            OffspringLaw::Binomial { d, p } => (d - 1) as f64 * p,
            OffspringLaw::Poisson { mu } => mu,
        }
    }

    /// Probability generating function.
    pub fn pgf(&self, s: f64) -> f64 {
        match *self {
            OffspringLaw::Binomial { d, p } => (1.0 - p + p * s).powi(d as i32 - 1),
            OffspringLaw::Poisson { mu } => (-mu * (1.0 - s)).exp(),
        }
    }

    // f(s) = s: every node has exactly one child and the process never dies.
    fn is_identity(&self) -> bool {
        matches!(*self, OffspringLaw::Binomial { d: 2, p } if p == 1.0)
    }

    /// Smallest fixed point of the pgf on `[0, 1]` and the iterations used.
    ///
    /// For mean at most one the answer is 1 (the non-degenerate critical
    /// and subcritical cases); iterating from 0 there converges only like
    /// `1/t`, so it is not attempted. Otherwise the iteration from 0 is run
    /// until successive values differ by less than `1e-12`.
    pub fn extinction_probability(&self) -> (f64, usize) {
        if self.is_identity() {
            return (0.0, 0);
        }
        if self.mean() <= 1.0 {
            return (1.0, 0);
        }
        let mut x = 0.0f64;
        for iteration in 1..=MAX_FIXED_POINT_ITERATIONS {
            let next = self.pgf(x);
            if (next - x).abs() < FIXED_POINT_TOL {
                return (next, iteration);
            }
            x = next;
        }
        (x, MAX_FIXED_POINT_ITERATIONS)
    }
}

const FIXED_POINT_TOL: f64 = 1e-12;
const MAX_FIXED_POINT_ITERATIONS: usize = 50_000_000;

/// `x_0..=x_T` of the extinction recurrence plus its limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtinctionSeries {
    pub law: OffspringLaw,
    pub values: Vec<f64>,
    pub fixed_point: f64,
    /// Iterations needed to reach the fixed point tolerance; 0 when the
    /// fixed point is known in closed form.
    pub iterations_to_tol: usize,
}

impl ExtinctionSeries {
    fn new(law: OffspringLaw, steps: usize) -> Self {
        let mut values = Vec::with_capacity(steps + 1);
        values.push(0.0);
        for t in 1..=steps {
            values.push(law.pgf(values[t - 1]));
        }
        let (fixed_point, iterations_to_tol) = law.extinction_probability();
        ExtinctionSeries {
            law,
            values,
            fixed_point,
            iterations_to_tol,
        }
    }

    pub fn last_index(&self) -> usize {
        self.values.len() - 1
    }
}

/// `x_t = (1 - p + p x_{t-1})^(d-1)` for `t = 0..=steps`.
pub fn extinction_series_binomial(d: u32, p: f64, steps: usize) -> Result<ExtinctionSeries, AnalyticsError> {
    if d < 2 {
        return Err(invalid(format!("degree {d} must be at least 2")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(ExtinctionSeries::new(OffspringLaw::Binomial { d, p }, steps))
}

/// `x_t = exp(-mu (1 - x_{t-1}))` for `t = 0..=steps`.
pub fn extinction_series_poisson(mu: f64, steps: usize) -> Result<ExtinctionSeries, AnalyticsError> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(invalid(format!("mean {mu} must be finite and non-negative")));
    }
    Ok(ExtinctionSeries::new(OffspringLaw::Poisson { mu }, steps))
}

/// Tree family seen from the source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeFamily {
    DRegular { d: u32 },
    GwPoisson { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateRole {
    ClosestCandidate,
    OtherCandidate,
}

/// Query for the law of `Y_v`, the number of subtrees below `v` that hold
/// active nodes, given that `v` is the source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YvSpec {
    pub family: TreeFamily,
    pub p: f64,
    pub k: u32,
    /// Distance from `v` to the active set.
    pub t_star: usize,
    pub role: CandidateRole,
}

impl YvSpec {
    fn offspring_law(&self) -> OffspringLaw {
        match self.family {
            TreeFamily::DRegular { d } => OffspringLaw::Binomial { d, p: self.p },
            TreeFamily::GwPoisson { lambda } => OffspringLaw::Poisson { mu: lambda * self.p },
        }
    }
}

fn laws_match(a: &OffspringLaw, b: &OffspringLaw) -> bool {
    match (*a, *b) {
        (OffspringLaw::Binomial { d: d1, p: p1 }, OffspringLaw::Binomial { d: d2, p: p2 }) => {
            d1 == d2 && (p1 - p2).abs() <= 1e-12
        }
        (OffspringLaw::Poisson { mu: m1 }, OffspringLaw::Poisson { mu: m2 }) => {
            (m1 - m2).abs() <= 1e-12 * m1.abs().max(1.0)
        }
        _ => false,
    }
}

/// `Pr[Y_v = k | source = v]`.
///
/// Each of the `d0` children activated by `v` roots an independent process,
/// and that child's subtree holds active nodes iff its process survives
/// `t_star - 1` generations (the children sit one hop below `v`), which has
/// probability `1 - x_{t_star - 1}`. The closest-candidate law is
/// `sum_{d0 >= k} Pr[D = d0] C(d0, k) x^(d0 - k) (1 - x)^k` with `D ~ Bin(d, p)`
/// or `Po(λp)`. For any other candidate exactly one subtree is active, so
/// only `k = 1` is admitted: `sum_{d0 >= 1} Pr[D = d0] d0 x^(d0 - 1) (1 - x)`.
pub fn yv_distribution(spec: &YvSpec, series: &ExtinctionSeries) -> Result<f64, AnalyticsError> {
    let requested = spec.offspring_law();
    if !laws_match(&series.law, &requested) {
        return Err(AnalyticsError::KindMismatch {
            series: series.law,
            requested,
        });
    }
    if spec.t_star == 0 {
        return Err(invalid("t_star must be at least 1"));
    }
    let index = spec.t_star - 1;
    if index > series.last_index() {
        return Err(AnalyticsError::IndexOutOfRange {
            index,
            last: series.last_index(),
        });
    }
    let x = series.values[index];
    let k = spec.k;
    if let TreeFamily::DRegular { d } = spec.family {
        if k > d {
            return Err(invalid(format!("k = {k} exceeds the degree {d}")));
        }
    }
    match spec.role {
        CandidateRole::ClosestCandidate => Ok(match spec.family {
            TreeFamily::DRegular { d } => binomial_mixture(d, spec.p, k, x),
            TreeFamily::GwPoisson { lambda } => poisson_mixture(lambda * spec.p, k, x),
        }),
        CandidateRole::OtherCandidate => {
            if k != 1 {
                return Err(invalid("a non-closest candidate has exactly one active subtree (k = 1)"));
            }
            Ok(match spec.family {
                TreeFamily::DRegular { d } => (1..=d)
                    .map(|d0| binomial_pmf(d, spec.p, d0) * d0 as f64 * x.powi(d0 as i32 - 1) * (1.0 - x))
                    .sum(),
                TreeFamily::GwPoisson { lambda } => poisson_mixture(lambda * spec.p, 1, x),
            })
        }
    }
}

fn binomial_coefficient(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub(crate) fn binomial_pmf(n: u32, p: f64, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    binomial_coefficient(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

fn binomial_mixture(d: u32, p: f64, k: u32, x: f64) -> f64 {
    (k..=d)
        .map(|d0| {
            binomial_pmf(d, p, d0)
                * binomial_coefficient(d0, k)
                * x.powi((d0 - k) as i32)
                * (1.0 - x).powi(k as i32)
        })
        .sum()
}

/// `sum_{d0 >= k} Po(mu)(d0) C(d0, k) x^(d0 - k) (1 - x)^k`, summed term by
/// term with the ratio `mu x / (d0 + 1 - k)` between consecutive terms.
fn poisson_mixture(mu: f64, k: u32, x: f64) -> f64 {
    if mu == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if k > 0 && x >= 1.0 {
        return 0.0;
    }
    let ln_k_factorial: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    let survive = if k == 0 { 0.0 } else { k as f64 * (1.0 - x).ln() };
    let mut term = (-mu + k as f64 * mu.ln() - ln_k_factorial + survive).exp();
    let mut sum = 0.0;
    let mut d0 = k as f64;
    loop {
        sum += term;
        let ratio = mu * x / (d0 + 1.0 - k as f64);
        term *= ratio;
        d0 += 1.0;
        // past the mode the terms decay at least geometrically
        if ratio < 0.5 && term <= sum * 1e-17 {
            break;
        }
        if term == 0.0 {
            break;
        }
    }
    sum
}
