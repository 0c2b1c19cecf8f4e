//! Built-in metrics: flat spaces, round spheres, hyperbolic half-planes,
//! their products, and the local model `dx₁²+dx₂²+dx₃²+f²dx₄²`.

use super::{check_positive_on_chart, warped_product, ChartDomain, CurvatureSign, MetricField};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Parameters for [`builtin`]: real-valued (`r`, `r1`, `r2`) and
/// expression-valued (`f` for `model_gf`).
#[derive(Clone, Debug, Default)]
pub struct BuiltinParams {
    pub reals: BTreeMap<String, f64>,
    pub exprs: BTreeMap<String, Expr>,
}

impl BuiltinParams {
    pub fn with_r(r: f64) -> Self {
        let mut p = BuiltinParams::default();
        p.reals.insert("r".into(), r);
        p
    }

    pub fn with_f(f: Expr) -> Self {
        let mut p = BuiltinParams::default();
        p.exprs.insert("f".into(), f);
        p
    }

    fn check_keys(&self, name: &str, reals: &[&str], exprs: &[&str]) -> Result<()> {
        for k in self.reals.keys() {
            if !reals.contains(&k.as_str()) {
                return Err(Error::BadParameter {
                    name: k.clone(),
                    reason: format!("builtin `{name}` takes no real parameter `{k}`"),
                });
            }
        }
        for k in self.exprs.keys() {
            if !exprs.contains(&k.as_str()) {
                return Err(Error::BadParameter {
                    name: k.clone(),
                    reason: format!("builtin `{name}` takes no expression parameter `{k}`"),
                });
            }
        }
        Ok(())
    }

    fn radius(&self, key: &str, fallback: &str) -> Result<f64> {
        let r = self
            .reals
            .get(key)
            .or_else(|| self.reals.get(fallback))
            .copied()
            .unwrap_or(1.0);
        if r > 0.0 {
            Ok(r)
        } else {
            Err(Error::BadParameter {
                name: key.to_string(),
                reason: format!("radius must be positive, got {r}"),
            })
        }
    }
}

fn euclidean(dim: usize) -> (MetricField, ChartDomain) {
    let m = MetricField::from_upper(dim, &format!("euclidean{dim}"), |i, j| {
        Expr::Num(if i == j { 1.0 } else { 0.0 })
    })
    .with_sign(CurvatureSign::Flat);
    let chart = ChartDomain::boxed(dim, [-1.0; 4], [1.0; 4]).unwrap();
    (m, chart)
}

fn sphere2(r: f64) -> (MetricField, ChartDomain) {
    let r2 = Expr::num(r * r);
    let m = MetricField::from_upper(2, "s2", |i, j| match (i, j) {
        (0, 0) => r2.clone(),
        (1, 1) => Expr::mul(r2.clone(), parse("sin(x1)^2").unwrap()),
        _ => Expr::Num(0.0),
    })
    .with_sign(CurvatureSign::Positive);
    let chart = ChartDomain::new(
        2,
        [0.0, 0.0, 0.0, 0.0],
        [PI, 2.0 * PI, 0.0, 0.0],
        [false, true, false, false],
        [true, false, false, false],
    )
    .unwrap();
    (m, chart)
}

fn sphere4(r: f64) -> (MetricField, ChartDomain) {
    // Polar chart: g = r²(dθ₁² + sin²θ₁ dθ₂² + sin²θ₁ sin²θ₂ dθ₃²
    //                    + sin²θ₁ sin²θ₂ sin²θ₃ dφ²).
    let r2 = Expr::num(r * r);
    let m = MetricField::from_upper(4, "s4", |i, j| {
        if i != j {
            return Expr::Num(0.0);
        }
        let mut e = r2.clone();
        for k in 0..i {
            e = Expr::mul(e, Expr::pow(Expr::func(crate::expr::Function::Sin, Expr::coord(k)), Expr::Num(2.0)));
        }
        e
    })
    .with_chi(2)
    .with_sign(CurvatureSign::Positive);
    let chart = ChartDomain::new(
        4,
        [0.0; 4],
        [PI, PI, PI, 2.0 * PI],
        [false, false, false, true],
        [true, true, true, false],
    )
    .unwrap();
    (m, chart)
}

fn half_plane() -> (MetricField, ChartDomain) {
    let m = MetricField::from_upper(2, "h2", |i, j| {
        if i == j {
            parse("1/x2^2").unwrap()
        } else {
            Expr::Num(0.0)
        }
    })
    .with_sign(CurvatureSign::Negative);
    let chart = ChartDomain::boxed(2, [-1.0, 1.0, 0.0, 0.0], [1.0, 3.0, 0.0, 0.0]).unwrap();
    (m, chart)
}

fn torus4() -> (MetricField, ChartDomain) {
    let m = MetricField::from_upper(4, "torus4", |i, j| {
        Expr::Num(if i == j { 1.0 } else { 0.0 })
    })
    .with_chi(0)
    .with_sign(CurvatureSign::Flat);
    let chart = ChartDomain::new(
        4,
        [0.0; 4],
        [2.0 * PI; 4],
        [true; 4],
        [false; 4],
    )
    .unwrap();
    (m, chart)
}

/// Construct a built-in metric and its chart.
///
/// Names: `euclidean1..4`, `torus4`, `s2`, `s4` (radius `r`), `h2`,
/// `s2xs2` (`r` or `r1`/`r2`), `h2xh2`, `h2xr2`, `model_gf` (warping
/// expression `f`, default `1 + x1^2 + x2^2 + x3^2`).
pub fn builtin(name: &str, params: &BuiltinParams) -> Result<(MetricField, ChartDomain)> {
    match name {
        "euclidean1" | "euclidean2" | "euclidean3" | "euclidean4" => {
            params.check_keys(name, &[], &[])?;
            let dim = name.as_bytes()[name.len() - 1] - b'0';
            Ok(euclidean(dim as usize))
        }
        "torus4" => {
            params.check_keys(name, &[], &[])?;
            Ok(torus4())
        }
        "s2" => {
            params.check_keys(name, &["r"], &[])?;
            Ok(sphere2(params.radius("r", "r")?))
        }
        "s4" => {
            params.check_keys(name, &["r"], &[])?;
            Ok(sphere4(params.radius("r", "r")?))
        }
        "h2" => {
            params.check_keys(name, &[], &[])?;
            Ok(half_plane())
        }
        "s2xs2" => {
            params.check_keys(name, &["r", "r1", "r2"], &[])?;
            let (a, ac) = sphere2(params.radius("r1", "r")?);
            let (b, bc) = sphere2(params.radius("r2", "r")?);
            let (m, chart) = warped_product(&a, &ac, &b, &bc, Expr::Num(1.0))?;
            Ok((
                m.with_name("s2xs2")
                    .with_chi(4)
                    .with_sign(CurvatureSign::NonNegative),
                chart,
            ))
        }
        "h2xh2" => {
            params.check_keys(name, &[], &[])?;
            let (a, ac) = half_plane();
            let (b, bc) = half_plane();
            let (m, chart) = warped_product(&a, &ac, &b, &bc, Expr::Num(1.0))?;
            Ok((
                m.with_name("h2xh2").with_sign(CurvatureSign::NonPositive),
                chart,
            ))
        }
        "h2xr2" => {
            params.check_keys(name, &[], &[])?;
            let (a, ac) = half_plane();
            let (b, bc) = euclidean(2);
            let (m, chart) = warped_product(&a, &ac, &b, &bc, Expr::Num(1.0))?;
            Ok((
                m.with_name("h2xr2").with_sign(CurvatureSign::NonPositive),
                chart,
            ))
        }
        "model_gf" => {
            params.check_keys(name, &[], &["f"])?;
            let f = params
                .exprs
                .get("f")
                .cloned()
                .unwrap_or_else(|| parse("1 + x1^2 + x2^2 + x3^2").unwrap());
            let (base, base_chart) = euclidean(3);
            let (fiber, fiber_chart) = euclidean(1);
            let chart = base_chart.product(&fiber_chart)?;
            check_positive_on_chart(&f, &chart)?;
            let (m, chart) = warped_product(&base, &base_chart, &fiber, &fiber_chart, f)?;
            Ok((m.with_name("model_gf"), chart))
        }
        other => Err(Error::UnknownBuiltin(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::metrics::metric_jets;

    #[test]
    fn euclidean4_is_identity() {
        let (m, _) = builtin("euclidean4", &BuiltinParams::default()).unwrap();
        let g = m.eval(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn s2xs2_is_block_diagonal() {
        let (m, _) = builtin("s2xs2", &BuiltinParams::with_r(1.0)).unwrap();
        let g = m.eval(&[1.0, 0.3, 0.8, 2.0]).unwrap();
        assert!((g[1][1] - 1.0f64.sin().powi(2)).abs() < 1e-15);
        assert!((g[3][3] - 0.8f64.sin().powi(2)).abs() < 1e-15);
        for i in 0..2 {
            for j in 2..4 {
                assert_eq!(g[i][j], 0.0);
            }
        }
    }

    #[test]
    fn model_gf_squares_the_warp() {
        let f = parse("1 + x1^2 + x2^2 + x3^2").unwrap();
        let (m, _) = builtin("model_gf", &BuiltinParams::with_f(f)).unwrap();
        let p = [0.5, -0.3, 0.2, 0.9];
        let g = m.eval(&p).unwrap();
        let fval = 1.0 + 0.25 + 0.09 + 0.04;
        assert!((g[3][3] - fval * fval).abs() < 1e-14);
        assert_eq!(g[0][0], 1.0);
        assert_eq!(g[0][3], 0.0);
    }

    #[test]
    fn model_gf_rejects_sign_changing_f() {
        let f = parse("x1 + x2").unwrap();
        assert!(matches!(
            builtin("model_gf", &BuiltinParams::with_f(f)),
            Err(Error::NonPositiveWarp { .. })
        ));
    }

    #[test]
    fn unknown_name_and_bad_params() {
        assert!(matches!(
            builtin("klein_bottle", &BuiltinParams::default()),
            Err(Error::UnknownBuiltin(_))
        ));
        assert!(builtin("s2", &BuiltinParams::with_r(-1.0)).is_err());
        let mut p = BuiltinParams::default();
        p.reals.insert("radius".into(), 1.0);
        assert!(builtin("s2", &p).is_err());
    }

    #[test]
    fn zoo_is_positive_definite_at_interior_samples()  {
        for name in [
            "euclidean4", "torus4", "s2", "s4", "h2", "s2xs2", "h2xh2", "h2xr2", "model_gf",
        ] {
            let (m, chart) = builtin(name, &BuiltinParams::default()).unwrap();
            for p in chart.sample_points(1000, 0.02) {
                let jets = metric_jets(&m, &p[..m.dim])
                    .unwrap_or_else(|e| panic!("{name} at {p:?}: {e}"));
                assert!(linalg::cholesky(&jets.g, m.dim).is_some());
            }
        }
    }
}
