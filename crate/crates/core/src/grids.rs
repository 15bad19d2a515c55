//! Node generators and the test-function corpus used by the experiments.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("need at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("interval must satisfy a < b, got [{0}, {1}]")]
    BadInterval(f64, f64),
    #[error("halton nodes support 1..=6 dimensions, got {0}")]
    HaltonDimension(usize),
    #[error("expected {expected} intervals, got {got}")]
    IntervalCount { expected: usize, got: usize },
    #[error("unknown test function '{0}'")]
    UnknownFunction(String),
    #[error("test function {name} expects dimension {expected}, got {got}")]
    Dimension {
        name: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Which family of Chebyshev points to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChebyshevVariant {
    /// Extrema including the endpoints.
    #[default]
    Lobatto,
    /// Roots, strictly interior.
    Gauss,
}

fn check_interval([a, b]: [f64; 2]) -> Result<(), GridError> {
    if a < b && a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(GridError::BadInterval(a, b))
    }
}

/// Chebyshev–Gauss–Lobatto points on `[a, b]`, ascending.
pub fn chebyshev_nodes(n: usize, interval: [f64; 2]) -> Result<Vec<f64>, GridError> {
    chebyshev_nodes_variant(n, interval, ChebyshevVariant::Lobatto)
}

pub fn chebyshev_nodes_variant(
    n: usize,
    interval: [f64; 2],
    variant: ChebyshevVariant,
) -> Result<Vec<f64>, GridError> {
    if n < 2 {
        return Err(GridError::TooFewNodes(n));
    }
    check_interval(interval)?;
    let [a, b] = interval;
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let unit = |i: usize| match variant {
        ChebyshevVariant::Lobatto => {
            // Pin the symmetric pairs and the midpoint exactly.
            let k = n - 1 - i;
            if 2 * k == n - 1 {
                0.0
            } else if 2 * k > n - 1 {
                -(PI * (n - 1 - k) as f64 / (n - 1) as f64).cos()
            } else {
                (PI * k as f64 / (n - 1) as f64).cos()
            }
        }
        ChebyshevVariant::Gauss => {
            let k = n - 1 - i;
            if 2 * k + 1 == n {
                0.0
            } else if 2 * k + 1 > n {
                -(PI * (2 * (n - 1 - k) + 1) as f64 / (2 * n) as f64).cos()
            } else {
                (PI * (2 * k + 1) as f64 / (2 * n) as f64).cos()
            }
        }
    };
    Ok((0..n)
        .map(|i| match (variant, i) {
            (ChebyshevVariant::Lobatto, 0) => a,
            (ChebyshevVariant::Lobatto, i) if i == n - 1 => b,
            _ => mid + half * unit(i),
        })
        .collect())
}

/// Inclusive equispaced grid from `a` to `b`.
pub fn uniform_nodes(n: usize, interval: [f64; 2]) -> Result<Vec<f64>, GridError> {
    if n < 2 {
        return Err(GridError::TooFewNodes(n));
    }
    check_interval(interval)?;
    let [a, b] = interval;
    let h = (b - a) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            // Mirror from the nearer endpoint so the grid is exactly symmetric.
            if 2 * i < n - 1 {
                a + i as f64 * h
            } else if 2 * i == n - 1 {
                0.5 * (a + b)
            } else {
                b - (n - 1 - i) as f64 * h
            }
        })
        .collect())
}

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// Halton points with indices `1..=n` in bases `2, 3, 5, ...`, mapped onto `intervals`.
pub fn halton_nodes(
    n: usize,
    d: usize,
    intervals: &[[f64; 2]],
) -> Result<Vec<Vec<f64>>, GridError> {
    if d == 0 || d > PRIMES.len() {
        return Err(GridError::HaltonDimension(d));
    }
    if intervals.len() != d {
        return Err(GridError::IntervalCount {
            expected: d,
            got: intervals.len(),
        });
    }
    for &iv in intervals {
        check_interval(iv)?;
    }
    Ok((1..=n as u64)
        .map(|idx| {
            intervals
                .iter()
                .zip(PRIMES)
                .map(|(&[a, b], p)| a + (b - a) * radical_inverse(idx, p))
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Chebyshev,
    Uniform,
    Halton,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Chebyshev => "chebyshev",
            NodeKind::Uniform => "uniform",
            NodeKind::Halton => "halton",
        })
    }
}

/// Point set together with the box it was generated for.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    pub kind: NodeKind,
    pub points: Vec<Vec<f64>>,
    pub intervals: Vec<[f64; 2]>,
}

impl NodeSet {
    /// One-dimensional Chebyshev or uniform nodes.
    pub fn line(kind: NodeKind, n: usize, interval: [f64; 2]) -> Result<Self, GridError> {
        let xs = match kind {
            NodeKind::Chebyshev => chebyshev_nodes(n, interval)?,
            NodeKind::Uniform => uniform_nodes(n, interval)?,
            NodeKind::Halton => halton_nodes(n, 1, &[interval])?
                .into_iter()
                .map(|p| p[0])
                .collect(),
        };
        Ok(Self {
            kind,
            points: xs.into_iter().map(|x| vec![x]).collect(),
            intervals: vec![interval],
        })
    }

    pub fn halton(n: usize, intervals: &[[f64; 2]]) -> Result<Self, GridError> {
        Ok(Self {
            kind: NodeKind::Halton,
            points: halton_nodes(n, intervals.len(), intervals)?,
            intervals: intervals.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Test functions from the numerical studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunction {
    /// `eˣ sin(2πx) + 1/(x²+1)`
    F1,
    /// `sin(x/2) - 2cos(x) + 4sin(πx)`
    F2,
    /// `cos(x²)`
    Fc1,
    /// `cos(2x²)`
    Fc2,
    /// `cos(4x²)`
    Fc4,
    /// `sin(2x) + cos(4x) + 1/(2+x)`
    Fu,
    /// `cos(|x|²)` in any dimension
    F3,
    /// `cos((x+y)²/2.88 + (y-x)²/4.5)`
    Fa,
}

impl TestFunction {
    pub const ALL: [TestFunction; 8] = [
        TestFunction::F1,
        TestFunction::F2,
        TestFunction::Fc1,
        TestFunction::Fc2,
        TestFunction::Fc4,
        TestFunction::Fu,
        TestFunction::F3,
        TestFunction::Fa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::F1 => "f1",
            TestFunction::F2 => "f2",
            TestFunction::Fc1 => "fc1",
            TestFunction::Fc2 => "fc2",
            TestFunction::Fc4 => "fc4",
            TestFunction::Fu => "fu",
            TestFunction::F3 => "f3",
            TestFunction::Fa => "fa",
        }
    }

    /// Required dimension, `None` when any dimension is accepted.
    pub fn dim(self) -> Option<usize> {
        match self {
            TestFunction::F3 => None,
            TestFunction::Fa => Some(2),
            _ => Some(1),
        }
    }

    pub fn eval(self, x: &[f64]) -> Result<f64, GridError> {
        match self.dim() {
            Some(d) if d != x.len() => {
                return Err(GridError::Dimension {
                    name: self.name(),
                    expected: d,
                    got: x.len(),
                })
            }
            None if x.is_empty() => {
                return Err(GridError::Dimension {
                    name: self.name(),
                    expected: 1,
                    got: 0,
                })
            }
            _ => {}
        }
        Ok(match self {
            TestFunction::F3 => x.iter().map(|v| v * v).sum::<f64>().cos(),
            TestFunction::Fa => {
                let (u, v) = (x[0], x[1]);
                ((u + v).powi(2) / 2.88 + (v - u).powi(2) / 4.5).cos()
            }
            f => f.eval_1d(x[0]),
        })
    }

    /// Scalar evaluation for the one-dimensional functions (and `f3` with `d = 1`).
    pub fn eval_1d(self, x: f64) -> f64 {
        match self {
            TestFunction::F1 => x.exp() * (2.0 * PI * x).sin() + 1.0 / (x * x + 1.0),
            TestFunction::F2 => (0.5 * x).sin() - 2.0 * x.cos() + 4.0 * (PI * x).sin(),
            TestFunction::Fc1 => (x * x).cos(),
            TestFunction::Fc2 => (2.0 * x * x).cos(),
            TestFunction::Fc4 => (4.0 * x * x).cos(),
            TestFunction::Fu => (2.0 * x).sin() + (4.0 * x).cos() + 1.0 / (2.0 + x),
            TestFunction::F3 => (x * x).cos(),
            TestFunction::Fa => f64::NAN,
        }
    }
}

impl FromStr for TestFunction {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TestFunction::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| GridError::UnknownFunction(s.to_string()))
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evaluates `name` at `x`.
pub fn test_function(name: &str, x: &[f64]) -> Result<f64, GridError> {
    name.parse::<TestFunction>()?.eval(x)
}
