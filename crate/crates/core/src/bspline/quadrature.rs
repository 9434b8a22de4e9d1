use super::{Axis, BasisValues, SplineBasis, SplineConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Gauss–Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre<T: Scalar>(n: usize) -> Vec<(T, T)> {
    assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
    let two = T::lit(2.0);
    let nf = T::from_usize_lossy(n);
    let mut nodes = vec![(T::zero(), T::zero()); n];
    for i in 0..n.div_ceil(2) {
        let fi = T::from_usize_lossy(i + 1);
        let mut x = (T::PI() * (fi - T::lit(0.25)) / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != T::zero() {
            dp = d;
        }
        let w = two / ((T::one() - x * x) * dp * dp);
        nodes[i] = (-x, w);
        nodes[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        let (_, d) = legendre(n, T::zero());
        nodes[n / 2] = (T::zero(), two / (d * d));
    }
    nodes
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nf = T::from_usize_lossy(n);
    (p1, nf * (x * p1 - p0) / (x * x - T::one()))
}

/// Integration sites with positive weights and a table of the basis
/// functions (and first two derivatives) at each site.
#[derive(Debug, Clone)]
pub struct QuadratureGrid<T> {
    pub sites: Vec<T>,
    pub weights: Vec<T>,
    pub basis: Vec<BasisValues<T>>,
}

impl<T: Scalar> QuadratureGrid<T> {
    /// Tabulate `basis` at arbitrary sites with caller-provided weights.
    pub fn from_sites(basis: &SplineBasis<T>, sites: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if sites.len() != weights.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} sites but {} weights",
                sites.len(),
                weights.len()
            )));
        }
        let table = sites.iter().map(|&x| basis.eval(x)).collect();
        Ok(Self {
            sites,
            weights,
            basis: table,
        })
    }

    /// Per-span Gauss–Legendre rule with `points_per_span` nodes.
    pub fn gauss(basis: &SplineBasis<T>, points_per_span: usize) -> Result<Self> {
        if points_per_span == 0 {
            return Err(Error::InvalidArgument("quadrature needs at least one point per span".into()));
        }
        let rule = gauss_legendre::<T>(points_per_span);
        let half = basis.span_width() / T::lit(2.0);
        let spans = basis.n_spans();
        let mut sites = Vec::with_capacity(spans * points_per_span);
        let mut weights = Vec::with_capacity(spans * points_per_span);
        for s in 0..spans {
            let mid = basis.span_start(s) + half;
            for &(x, w) in &rule {
                sites.push(mid + half * x);
                weights.push(half * w);
            }
        }
        Self::from_sites(basis, sites, weights)
    }

    /// Composite midpoint rule with `n` equally weighted sites.
    pub fn midpoint(basis: &SplineBasis<T>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("midpoint rule needs at least one site".into()));
        }
        let (lo, hi) = basis.domain();
        let h = (hi - lo) / T::from_usize_lossy(n);
        let sites = (0..n)
            .map(|i| lo + h * (T::from_usize_lossy(i) + T::lit(0.5)))
            .collect();
        Self::from_sites(basis, sites, vec![h; n])
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn integrate<F: Fn(T) -> T>(&self, f: F) -> T {
        self.sites
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

pub fn make_quadrature<T: Scalar>(config: &SplineConfig, which: Axis) -> Result<QuadratureGrid<T>> {
    let basis = SplineBasis::new(config, which)?;
    QuadratureGrid::gauss(&basis, config.quad_points(which))
}
