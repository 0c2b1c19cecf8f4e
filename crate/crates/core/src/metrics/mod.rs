//! Chart domains, metric fields over them, and the product / warped-product
//! constructors. A metric is a symmetric matrix of expressions in the chart
//! coordinates, evaluable on jets so curvature can differentiate it twice.

mod spec;
mod zoo;

pub use spec::parse_metric_spec;
pub use zoo::{builtin, BuiltinParams};

use crate::error::{Error, Result};
use crate::expr::{Expr, Jet2};
use crate::linalg::{self, Mat4};

/// Coordinate box `[lowerᵢ, upperᵢ]` with per-axis periodicity and
/// degenerate-boundary flags (sphere poles, where `√det g → 0`).
#[derive(Clone, Debug)]
pub struct ChartDomain {
    pub dim: usize,
    pub lower: [f64; 4],
    pub upper: [f64; 4],
    pub periodic: [bool; 4],
    pub degenerate_boundary: [bool; 4],
}

impl ChartDomain {
    pub fn new(
        dim: usize,
        lower: [f64; 4],
        upper: [f64; 4],
        periodic: [bool; 4],
        degenerate_boundary: [bool; 4],
    ) -> Result<Self> {
        if dim == 0 || dim > 4 {
            return Err(Error::Chart(format!("dimension {dim} not in 1..=4")));
        }
        for i in 0..dim {
            if !(lower[i] < upper[i]) {
                return Err(Error::Chart(format!(
                    "axis {}: lower {} must be below upper {}",
                    i + 1,
                    lower[i],
                    upper[i]
                )));
            }
            if periodic[i] && degenerate_boundary[i] {
                return Err(Error::Chart(format!(
                    "axis {}: a degenerate-boundary axis cannot be periodic",
                    i + 1
                )));
            }
        }
        Ok(ChartDomain {
            dim,
            lower,
            upper,
            periodic,
            degenerate_boundary,
        })
    }

    /// Plain box, no periodicity, no degeneracy.
    pub fn boxed(dim: usize, lower: [f64; 4], upper: [f64; 4]) -> Result<Self> {
        ChartDomain::new(dim, lower, upper, [false; 4], [false; 4])
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim
            && point
                .iter()
                .enumerate()
                .all(|(i, &x)| x >= self.lower[i] && x <= self.upper[i])
    }

    /// Deterministic low-discrepancy interior samples (Halton bases 2,3,5,7),
    /// shrunk away from the boundary by `margin` of each axis length.
    pub fn sample_points(&self, count: usize, margin: f64) -> Vec<[f64; 4]> {
        const BASES: [u64; 4] = [2, 3, 5, 7];
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let mut p = [0.0; 4];
            for i in 0..self.dim {
                let u = halton(k as u64 + 1, BASES[i]);
                let len = self.upper[i] - self.lower[i];
                p[i] = self.lower[i] + len * (margin + (1.0 - 2.0 * margin) * u);
            }
            out.push(p);
        }
        out
    }

    /// Concatenate two charts into a product chart.
    pub fn product(&self, other: &ChartDomain) -> Result<ChartDomain> {
        let dim = self.dim + other.dim;
        if dim > 4 {
            return Err(Error::Chart(format!(
                "product dimension {dim} exceeds 4"
            )));
        }
        let mut lower = self.lower;
        let mut upper = self.upper;
        let mut periodic = self.periodic;
        let mut degenerate = self.degenerate_boundary;
        for i in 0..other.dim {
            lower[self.dim + i] = other.lower[i];
            upper[self.dim + i] = other.upper[i];
            periodic[self.dim + i] = other.periodic[i];
            degenerate[self.dim + i] = other.degenerate_boundary[i];
        }
        ChartDomain::new(dim, lower, upper, periodic, degenerate)
    }
}

fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Known curvature sign of a built-in metric, used by tests and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvatureSign {
    Flat,
    Positive,
    Negative,
    NonPositive,
    NonNegative,
}

/// Symmetric matrix of expressions; `entries[i][j]` and `entries[j][i]` are
/// the same tree by construction.
#[derive(Clone, Debug)]
pub struct MetricField {
    pub dim: usize,
    entries: Vec<Expr>,
    pub name: String,
    pub known_chi: Option<i64>,
    pub known_curvature_sign: Option<CurvatureSign>,
}

impl MetricField {
    /// Build from the upper triangle: `f(i, j)` is called for `i <= j`.
    pub fn from_upper(dim: usize, name: &str, mut f: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut entries = vec![Expr::Num(0.0); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let e = f(i, j);
                entries[i * dim + j] = e.clone();
                entries[j * dim + i] = e;
            }
        }
        MetricField {
            dim,
            entries,
            name: name.to_string(),
            known_chi: None,
            known_curvature_sign: None,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.dim + j]
    }

    pub fn with_chi(mut self, chi: i64) -> Self {
        self.known_chi = Some(chi);
        self
    }

    pub fn with_sign(mut self, sign: CurvatureSign) -> Self {
        self.known_curvature_sign = Some(sign);
        self
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// Metric matrix at a point (values only).
    pub fn eval(&self, point: &[f64]) -> Result<Mat4> {
        let mut g = [[0.0; 4]; 4];
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = self.entry(i, j).eval_f64(point)?;
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        Ok(g)
    }
}

/// Symmetric 2-tensor field, same storage discipline as [`MetricField`].
#[derive(Clone, Debug)]
pub struct SymTensorField {
    pub dim: usize,
    entries: Vec<Expr>,
}

impl SymTensorField {
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut entries = vec![Expr::Num(0.0); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let e = f(i, j);
                entries[i * dim + j] = e.clone();
                entries[j * dim + i] = e;
            }
        }
        SymTensorField { dim, entries }
    }

    pub fn zero(dim: usize) -> Self {
        SymTensorField::from_upper(dim, |_, _| Expr::Num(0.0))
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.dim + j]
    }

    /// The metric itself as a tensor field.
    pub fn from_metric(metric: &MetricField) -> Self {
        SymTensorField::from_upper(metric.dim, |i, j| metric.entry(i, j).clone())
    }

    pub fn eval(&self, point: &[f64]) -> Result<Mat4> {
        let mut q = [[0.0; 4]; 4];
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = self.entry(i, j).eval_f64(point)?;
                q[i][j] = v;
                q[j][i] = v;
            }
        }
        Ok(q)
    }
}

/// Metric values and first/second partials at a point:
/// `dg[k][i][j] = ∂ₖ g_ij`, `d2g[k][l][i][j] = ∂ₖ∂ₗ g_ij`.
#[derive(Clone, Debug)]
pub struct MetricJets {
    pub dim: usize,
    pub g: Mat4,
    pub dg: [Mat4; 4],
    pub d2g: [[Mat4; 4]; 4],
}

impl MetricJets {
    pub fn zeroed() -> Self {
        MetricJets {
            dim: 0,
            g: [[0.0; 4]; 4],
            dg: [[[0.0; 4]; 4]; 4],
            d2g: [[[[0.0; 4]; 4]; 4]; 4],
        }
    }
}

/// Evaluate the metric and its first and second partials at an interior
/// point. Fails with the eigenvalue list if g is not positive definite.
pub fn metric_jets(metric: &MetricField, point: &[f64]) -> Result<MetricJets> {
    let mut jets = MetricJets::zeroed();
    metric_jets_into(metric, point, &mut jets)?;
    Ok(jets)
}

pub(crate) fn metric_jets_into(
    metric: &MetricField,
    point: &[f64],
    out: &mut MetricJets,
) -> Result<()> {
    let n = metric.dim;
    debug_assert_eq!(point.len(), n);
    out.dim = n;
    for i in 0..n {
        for j in i..n {
            let entry = metric.entry(i, j);
            if entry.is_zero() {
                out.g[i][j] = 0.0;
                out.g[j][i] = 0.0;
                for k in 0..n {
                    out.dg[k][i][j] = 0.0;
                    out.dg[k][j][i] = 0.0;
                    for l in 0..n {
                        out.d2g[k][l][i][j] = 0.0;
                        out.d2g[k][l][j][i] = 0.0;
                    }
                }
                continue;
            }
            let jet: Jet2 = entry.eval_jet(point)?;
            out.g[i][j] = jet.value;
            out.g[j][i] = jet.value;
            for k in 0..n {
                out.dg[k][i][j] = jet.grad[k];
                out.dg[k][j][i] = jet.grad[k];
                for l in 0..n {
                    out.d2g[k][l][i][j] = jet.hess[k][l];
                    out.d2g[k][l][j][i] = jet.hess[k][l];
                }
            }
        }
    }
    if linalg::cholesky(&out.g, n).is_none() {
        return Err(Error::NotPositiveDefinite {
            point: point.to_vec(),
            eigenvalues: linalg::sym_eigenvalues(&out.g, n),
        });
    }
    Ok(())
}

/// Warped product `g₁ + f²g₂`: base block unchanged, fiber block scaled by
/// `f²`, fiber coordinates shifted after the base's. `f` may depend on all
/// product coordinates and must be strictly positive on the chart (checked
/// by sampling).
pub fn warped_product(
    base: &MetricField,
    base_chart: &ChartDomain,
    fiber: &MetricField,
    fiber_chart: &ChartDomain,
    f: Expr,
) -> Result<(MetricField, ChartDomain)> {
    let dim = base.dim + fiber.dim;
    if dim > 4 {
        return Err(Error::Chart(format!(
            "warped product dimension {dim} exceeds 4"
        )));
    }
    if let Some(c) = f.max_coord() {
        if c >= dim {
            return Err(Error::CoordOutOfRange { coord: c + 1, dim });
        }
    }
    let chart = base_chart.product(fiber_chart)?;
    check_positive_on_chart(&f, &chart)?;
    let b = base.dim;
    let f2 = f.clone().squared();
    let name = format!("warp({}, {})", base.name, fiber.name);
    let metric = MetricField::from_upper(dim, &name, |i, j| {
        if i < b && j < b {
            base.entry(i, j).clone()
        } else if i >= b && j >= b {
            let fib = fiber.entry(i - b, j - b).shift_coords(b);
            if fib.is_zero() {
                fib
            } else {
                Expr::mul(f2.clone(), fib)
            }
        } else {
            Expr::Num(0.0)
        }
    });
    Ok((metric, chart))
}

pub(crate) fn check_positive_on_chart(f: &Expr, chart: &ChartDomain) -> Result<()> {
    for p in chart.sample_points(128, 0.01) {
        let v = f.eval_f64(&p[..chart.dim])?;
        if !(v > 0.0) {
            return Err(Error::NonPositiveWarp {
                point: p[..chart.dim].to_vec(),
                value: v,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn euclidean_jets_vanish() {
        let (m, chart) = builtin("euclidean4", &BuiltinParams::default()).unwrap();
        let jets = metric_jets(&m, &[0.3, -0.2, 0.5, 0.9]).unwrap();
        assert_eq!(chart.dim, 4);
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(jets.dg[k][i][j], 0.0);
                    for l in 0..4 {
                        assert_eq!(jets.d2g[k][l][i][j], 0.0);
                    }
                }
            }
        }
        assert_eq!(jets.g[2][2], 1.0);
    }

    #[test]
    fn sphere_jets_match_hand_differentiation() {
        let (m, _) = builtin("s2", &BuiltinParams::default()).unwrap();
        let th = std::f64::consts::FRAC_PI_2;
        let jets = metric_jets(&m, &[th, 0.0]).unwrap();
        assert!((jets.g[0][0] - 1.0).abs() < 1e-15);
        assert!((jets.g[1][1] - 1.0).abs() < 1e-15);
        // ∂_θ g_φφ = 2 sinθ cosθ = 0 at θ = π/2.
        assert!(jets.dg[0][1][1].abs() < 1e-15);
        // ∂²_θ g_φφ = 2 cos 2θ = -2.
        assert!((jets.d2g[0][0][1][1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn half_plane_jets_match_hand_differentiation() {
        let (m, _) = builtin("h2", &BuiltinParams::default()).unwrap();
        let jets = metric_jets(&m, &[0.0, 2.0]).unwrap();
        assert!((jets.g[0][0] - 0.25).abs() < 1e-15);
        assert!((jets.g[1][1] - 0.25).abs() < 1e-15);
        // ∂_y g_xx = -2/y³ = -1/4.
        assert!((jets.dg[1][0][0] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn indefinite_matrix_reports_eigenvalues() {
        let m = MetricField::from_upper(2, "bad", |i, j| {
            if i == j {
                Expr::num(-1.0)
            } else {
                Expr::Num(0.0)
            }
        });
        match metric_jets(&m, &[0.0, 0.0]) {
            Err(Error::NotPositiveDefinite { eigenvalues, .. }) => {
                assert_eq!(eigenvalues.len(), 2);
                assert!(eigenvalues[0] < 0.0);
            }
            other => panic!("expected positive-definite failure, got {other:?}"),
        }
    }

    #[test]
    fn warped_product_with_unit_f_is_direct_product() {
        let (h2, h2c) = builtin("h2", &BuiltinParams::default()).unwrap();
        let (s2, s2c) = builtin("s2", &BuiltinParams::default()).unwrap();
        let (m, chart) = warped_product(&h2, &h2c, &s2, &s2c, Expr::Num(1.0)).unwrap();
        assert_eq!(m.dim, 4);
        assert_eq!(chart.dim, 4);
        let p = [0.2, 1.7, 1.1, 0.4];
        let g = m.eval(&p).unwrap();
        // Base block is h2 at (0.2, 1.7), fiber block is s2 at (1.1, 0.4).
        let gh = h2.eval(&[0.2, 1.7]).unwrap();
        let gs = s2.eval(&[1.1, 0.4]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((g[i][j] - gh[i][j]).abs() < 1e-15);
                assert!((g[2 + i][2 + j] - gs[i][j]).abs() < 1e-15);
                assert_eq!(g[i][2 + j], 0.0);
            }
        }
    }

    #[test]
    fn warped_product_scales_fiber_by_f_squared() {
        let (e2, e2c) = builtin("euclidean2", &BuiltinParams::default()).unwrap();
        let f = parse("exp(x1)").unwrap();
        let (m, _) = warped_product(&e2, &e2c, &e2, &e2c, f).unwrap();
        let p = [0.5, 0.0, 0.0, 0.0];
        let g = m.eval(&p).unwrap();
        let e2x1 = (2.0f64 * 0.5).exp();
        assert!((g[0][0] - 1.0).abs() < 1e-15);
        assert!((g[2][2] - e2x1).abs() < 1e-14);
        assert!((g[3][3] - e2x1).abs() < 1e-14);
    }

    #[test]
    fn non_positive_warp_is_rejected() {
        let (e2, e2c) = builtin("euclidean2", &BuiltinParams::default()).unwrap();
        let (e1, e1c) = builtin("euclidean1", &BuiltinParams::default()).unwrap();
        let f = parse("x1").unwrap(); // changes sign on [-1, 1]
        assert!(matches!(
            warped_product(&e2, &e2c, &e1, &e1c, f),
            Err(Error::NonPositiveWarp { .. })
        ));
    }

    #[test]
    fn dimension_overflow_is_rejected() {
        let (e3, e3c) = builtin("euclidean3", &BuiltinParams::default()).unwrap();
        let (e2, e2c) = builtin("euclidean2", &BuiltinParams::default()).unwrap();
        assert!(warped_product(&e3, &e3c, &e2, &e2c, Expr::Num(1.0)).is_err());
    }
}
