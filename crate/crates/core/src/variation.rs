//! First variation of curvature along metric families `g⁽ˢ⁾ = g + s·q`.
//!
//! The analytic route is
//!
//! ```text
//! d/ds R⁽ˢ⁾(X,Y,Z,W)|₀ = ½[∇²q(X,W;Z;Y) − ∇²q(X,Z;W;Y)
//!                          − ∇²q(Y,W;Z;X) + ∇²q(Y,Z;W;X)]
//!                       + ½[q(R(X,Y)Z,W) − q(Z,R(X,Y)W)],
//! ```
//!
//! checked against central differences of curvature on symbolically
//! perturbed metrics. For `q = ⟨·,V⟩⟨·,V⟩` and `X,Y,Z ⊥ V` the variation
//! with `W = Y` collapses to an eight-term expression in `∇V` alone.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::Mat4;
use crate::metrics::{ChartDomain, MetricField, SymTensorField};
use crate::tensor::{cov_deriv2_q_at, curvature_at, CurvaturePoint, Tensor4};
use nalgebra::Matrix3;

/// A family `g + s·q` with the positive-definite range found by bisection
/// over chart samples, capped at 0.5.
#[derive(Clone, Debug)]
pub struct MetricFamily {
    pub base: MetricField,
    pub q: SymTensorField,
    pub s_max: f64,
}

impl MetricFamily {
    pub fn new(base: MetricField, chart: &ChartDomain, q: SymTensorField) -> Result<Self> {
        let samples = chart.sample_points(64, 0.02);
        let pd_at = |s: f64| -> Result<bool> {
            for p in &samples {
                let gm = base.eval(&p[..base.dim])?;
                let qm = q.eval(&p[..base.dim])?;
                let mut m = [[0.0; 4]; 4];
                for i in 0..base.dim {
                    for j in 0..base.dim {
                        m[i][j] = gm[i][j] + s * qm[i][j];
                    }
                }
                if crate::linalg::cholesky(&m, base.dim).is_none() {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        let mut lo = 0.0;
        let mut hi = 0.5;
        if pd_at(0.5)? && pd_at(-0.5)? {
            lo = 0.5;
        } else {
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if pd_at(mid)? && pd_at(-mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        Ok(MetricFamily {
            base,
            q,
            s_max: lo,
        })
    }

    pub fn metric_at(&self, s: f64) -> MetricField {
        metric_plus_sq(&self.base, &self.q, s)
    }
}

/// Symbolic perturbation `g + s·q` with `s` a literal, so finite differences
/// reuse the exact-jet engine.
pub fn metric_plus_sq(metric: &MetricField, q: &SymTensorField, s: f64) -> MetricField {
    MetricField::from_upper(metric.dim, &format!("{}+sq", metric.name), |i, j| {
        let base = metric.entry(i, j).clone();
        let qe = q.entry(i, j).clone();
        if qe.is_zero() || s == 0.0 {
            base
        } else if base.is_zero() {
            Expr::mul(Expr::num(s), qe)
        } else {
            Expr::add(base, Expr::mul(Expr::num(s), qe))
        }
    })
}

/// `q(·,·) = ⟨·,W⟩⟨·,W⟩`: the squared metric-dual 1-form of a vector field,
/// composed symbolically: `q_ij = (gW)_i (gW)_j`.
pub fn q_from_vector_field(metric: &MetricField, w: &[Expr; 4]) -> SymTensorField {
    let n = metric.dim;
    let mut duals: Vec<Expr> = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc: Option<Expr> = None;
        for (j, wj) in w.iter().enumerate().take(n) {
            let gij = metric.entry(i, j);
            if gij.is_zero() || wj.is_zero() {
                continue;
            }
            let term = Expr::mul(gij.clone(), wj.clone());
            acc = Some(match acc {
                Some(a) => Expr::add(a, term),
                None => term,
            });
        }
        duals.push(acc.unwrap_or(Expr::Num(0.0)));
    }
    SymTensorField::from_upper(n, |i, j| {
        if duals[i].is_zero() || duals[j].is_zero() {
            Expr::Num(0.0)
        } else {
            Expr::mul(duals[i].clone(), duals[j].clone())
        }
    })
}

fn contract4(t: &Tensor4, a: &[f64; 4], b: &[f64; 4], c: &[f64; 4], d: &[f64; 4], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        if a[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if b[j] == 0.0 {
                continue;
            }
            for k in 0..n {
                if c[k] == 0.0 {
                    continue;
                }
                let mut u = 0.0;
                for m in 0..n {
                    u += t[i][j][k][m] * d[m];
                }
                s += a[i] * b[j] * c[k] * u;
            }
        }
    }
    s
}

/// `q(R(X,Y)A, B)` with the operator recovered from the (0,4) tensor.
fn q_curvature_bracket(
    cp: &CurvaturePoint,
    qv: &Mat4,
    x: &[f64; 4],
    y: &[f64; 4],
    a: &[f64; 4],
    b: &[f64; 4],
) -> f64 {
    let n = cp.dim;
    // (R(X,Y)A)^l = g^{ld} R_abcd X^a Y^b A^c
    let mut r = [0.0; 4];
    for l in 0..n {
        let mut s = 0.0;
        for d in 0..n {
            s += cp.g_inv[l][d] * cp.riemann(x, y, a, &unit(d));
        }
        r[l] = s;
    }
    let mut s = 0.0;
    for l in 0..n {
        for w in 0..n {
            s += qv[l][w] * r[l] * b[w];
        }
    }
    s
}

fn unit(i: usize) -> [f64; 4] {
    let mut v = [0.0; 4];
    v[i] = 1.0;
    v
}

/// Analytic first variation of the (0,4) curvature at a point.
pub fn dr_analytic(
    metric: &MetricField,
    q: &SymTensorField,
    x: &[f64; 4],
    y: &[f64; 4],
    z: &[f64; 4],
    w: &[f64; 4],
    point: &[f64],
) -> Result<f64> {
    let cp = curvature_at(metric, point)?;
    dr_analytic_at(&cp, q, x, y, z, w, point)
}

pub(crate) fn dr_analytic_at(
    cp: &CurvaturePoint,
    q: &SymTensorField,
    x: &[f64; 4],
    y: &[f64; 4],
    z: &[f64; 4],
    w: &[f64; 4],
    point: &[f64],
) -> Result<f64> {
    let n = cp.dim;
    let n2q = cov_deriv2_q_at(cp, q, point)?;
    let hessian_part = 0.5
        * (contract4(&n2q, x, w, z, y, n) - contract4(&n2q, x, z, w, y, n)
            - contract4(&n2q, y, w, z, x, n)
            + contract4(&n2q, y, z, w, x, n));
    let qv = q.eval(point)?;
    let bracket = 0.5
        * (q_curvature_bracket(cp, &qv, x, y, z, w) - q_curvature_bracket(cp, &qv, x, y, w, z));
    Ok(hessian_part + bracket)
}

/// Central-difference oracle on symbolically perturbed metrics.
pub fn dr_numeric(
    metric: &MetricField,
    q: &SymTensorField,
    x: &[f64; 4],
    y: &[f64; 4],
    z: &[f64; 4],
    w: &[f64; 4],
    point: &[f64],
    h: f64,
) -> Result<f64> {
    let plus = curvature_at(&metric_plus_sq(metric, q, h), point)?;
    let minus = curvature_at(&metric_plus_sq(metric, q, -h), point)?;
    Ok((plus.riemann(x, y, z, w) - minus.riemann(x, y, z, w)) / (2.0 * h))
}

/// Richardson-extrapolated oracle: cancels the O(h²) term of [`dr_numeric`].
pub fn dr_numeric_richardson(
    metric: &MetricField,
    q: &SymTensorField,
    x: &[f64; 4],
    y: &[f64; 4],
    z: &[f64; 4],
    w: &[f64; 4],
    point: &[f64],
    h: f64,
) -> Result<f64> {
    let coarse = dr_numeric(metric, q, x, y, z, w, point, h)?;
    let fine = dr_numeric(metric, q, x, y, z, w, point, 0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// The specialized eight-term variation for `q = ⟨·,V⟩⟨·,V⟩`, `W = Y`, and
/// `X, Y, Z ⊥ V` at the point; built from `∇V` jets only.
pub fn dr_perp_simplified(
    metric: &MetricField,
    v_field: &[Expr; 4],
    x: &[f64; 4],
    y: &[f64; 4],
    z: &[f64; 4],
    point: &[f64],
) -> Result<f64> {
    let cp = curvature_at(metric, point)?;
    let n = cp.dim;
    // V and ∇V: (∇_j V)^k = ∂_j V^k + Γ^k_{jl} V^l.
    let mut v = [0.0; 4];
    let mut dv = [[0.0; 4]; 4];
    for (k, comp) in v_field.iter().enumerate().take(n) {
        let jet = comp.eval_jet(point)?;
        v[k] = jet.value;
        for j in 0..n {
            dv[j][k] = jet.grad[j];
        }
    }
    let mut nabla_v = [[0.0; 4]; 4]; // nabla_v[j][k] = (∇_{∂j} V)^k
    for j in 0..n {
        for k in 0..n {
            let mut s = dv[j][k];
            for l in 0..n {
                s += cp.gamma[k][j][l] * v[l];
            }
            nabla_v[j][k] = s;
        }
    }
    // Perpendicularity preconditions.
    let vnorm = cp.inner(&v, &v).sqrt();
    for u in [x, y, z] {
        let dot = cp.inner(u, &v);
        let scale = vnorm * cp.inner(u, u).sqrt();
        if dot.abs() > 1e-10 * (1.0 + scale) {
            return Err(Error::PerpendicularityViolation { dot });
        }
    }
    // ⟨a, ∇_dir V⟩
    let inner_nv = |a: &[f64; 4], dir: &[f64; 4]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    s += a[i] * cp.g[i][k] * dir[j] * nabla_v[j][k];
                }
            }
        }
        s
    };
    let xz = inner_nv(x, z);
    let xy = inner_nv(x, y);
    let yy = inner_nv(y, y);
    let yz = inner_nv(y, z);
    let yx = inner_nv(y, x);
    let zy = inner_nv(z, y);
    let zx = inner_nv(z, x);
    Ok(0.5 * (xz * yy + xy * yz - 2.0 * xy * zy - 2.0 * yx * yz + yy * zx + yx * zy))
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `d/ds|₀ det(L − sN)` for skew `L` and negative-definite `N`, computed
/// both in the basis diagonalizing `N` (closed form) and as a Richardson
/// central difference of determinants; the routes must agree to 1e-10.
/// The value is nonnegative, zero exactly when `L = 0`.
pub fn det_fact_derivative(l: &[[f64; 3]; 3], nmat: &[[f64; 3]; 3]) -> Result<f64> {
    let mut lmax: f64 = 0.0;
    let mut skew_residual: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            lmax = lmax.max(l[i][j].abs());
            skew_residual = skew_residual.max((l[i][j] + l[j][i]).abs());
        }
    }
    if skew_residual > 1e-12 * (1.0 + lmax) {
        return Err(Error::NotSkew {
            residual: skew_residual,
        });
    }
    let nm = Matrix3::from_fn(|i, j| nmat[i][j]);
    let sym_res = (nm - nm.transpose()).abs().max();
    if sym_res > 1e-12 * (1.0 + nm.abs().max()) {
        return Err(Error::NotNegativeDefinite {
            eigenvalues: vec![],
        });
    }
    let eig = nalgebra::SymmetricEigen::new(nm);
    if eig.eigenvalues.iter().any(|&ev| ev >= 0.0) {
        let mut evs: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        evs.sort_by(f64::total_cmp);
        return Err(Error::NotNegativeDefinite { eigenvalues: evs });
    }
    // Rotate L into the eigenbasis of N; it stays skew.
    let qmat = eig.eigenvectors;
    let lm = Matrix3::from_fn(|i, j| l[i][j]);
    let lp = qmat.transpose() * lm * qmat;
    let d = eig.eigenvalues;
    let closed = d[0] * lp[(1, 2)] * lp[(2, 1)]
        + d[1] * lp[(0, 2)] * lp[(2, 0)]
        + d[2] * lp[(0, 1)] * lp[(1, 0)];

    // det(L − sN) is cubic in s, so one Richardson level of the central
    // difference is exact up to rounding.
    let scale = 1.0 + lmax.max(nm.abs().max());
    let h = 0.25 * scale;
    let fd_at = |s: f64| {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = l[i][j] - s * nmat[i][j];
            }
        }
        det3(&m)
    };
    let d1 = (fd_at(h) - fd_at(-h)) / (2.0 * h);
    let d2 = (fd_at(0.5 * h) - fd_at(-0.5 * h)) / h;
    let fd = (4.0 * d2 - d1) / 3.0;
    if (closed - fd).abs() > 1e-10 * (1.0 + closed.abs()) {
        return Err(Error::RouteMismatch {
            what: "det-fact derivative".into(),
            lhs: closed,
            rhs: fd,
        });
    }
    Ok(closed)
}

/// Determinant-variation identity on the local model metric: both the
/// six-term Pfaffian variation assembled from `dr_analytic` in the adapted
/// frame, and `3ρ² d/ds det[⟨∇·V,·⟩ − sR(·,V,·,V)]`, have derivative 0 at
/// `s = 0` because the shape terms `⟨∇·V,·⟩` vanish on `V^⊥`.
pub struct ModelDetIdentity {
    /// Pfaffian-variation side.
    pub pf_variation: f64,
    /// Determinant side, `3ρ² d/ds det[Q − sN]`.
    pub det_variation: f64,
    /// Largest entry of `Q = ⟨∇·V,·⟩|_{V^⊥}`.
    pub shape_max: f64,
}

pub fn model_determinant_identity(
    f: &Expr,
    rho: &Expr,
    point: &[f64; 4],
) -> Result<ModelDetIdentity> {
    let (metric, _) = crate::metrics::builtin(
        "model_gf",
        &crate::metrics::BuiltinParams::with_f(f.clone()),
    )?;
    let cp = curvature_at(&metric, point)?;
    let fval = f.eval_f64(point)?;
    // Adapted orthonormal frame: V first, then the leaf directions.
    let v1 = [0.0, 0.0, 0.0, 1.0 / fval];
    let frame = [v1, unit(0), unit(1), unit(2)];
    // q built from the damped field ρV.
    let inv_f = Expr::div(Expr::Num(1.0), f.clone());
    let v_field = [
        Expr::Num(0.0),
        Expr::Num(0.0),
        Expr::Num(0.0),
        inv_f.clone(),
    ];
    let w_field = [
        Expr::Num(0.0),
        Expr::Num(0.0),
        Expr::Num(0.0),
        Expr::mul(rho.clone(), inv_f),
    ];
    let q = q_from_vector_field(&metric, &w_field);

    let r = |i: usize, j: usize| cp.riemann(&frame[0], &frame[i], &frame[0], &frame[j]);
    let dr = |a: usize, b: usize, c: usize, d: usize| -> Result<f64> {
        dr_analytic_at(&cp, &q, &frame[a], &frame[b], &frame[c], &frame[d], point)
    };
    let pf_variation = r(1, 1) * dr(2, 3, 2, 3)?
        + r(2, 2) * dr(3, 1, 3, 1)?
        + r(3, 3) * dr(1, 2, 1, 2)?
        - 2.0 * r(1, 2) * dr(3, 1, 3, 2)?
        - 2.0 * r(1, 3) * dr(2, 1, 2, 3)?
        - 2.0 * r(2, 3) * dr(1, 2, 1, 3)?;

    // Q and N on V^⊥ from exact jets of the unit field V = f⁻¹∂₄.
    let mut nabla_v = [[0.0; 4]; 4];
    let mut v = [0.0; 4];
    {
        let mut dv = [[0.0; 4]; 4];
        for (k, comp) in v_field.iter().enumerate().take(4) {
            let jet = comp.eval_jet(point)?;
            v[k] = jet.value;
            for j in 0..4 {
                dv[j][k] = jet.grad[j];
            }
        }
        for j in 0..4 {
            for k in 0..4 {
                let mut s = dv[j][k];
                for l in 0..4 {
                    s += cp.gamma[k][j][l] * v[l];
                }
                nabla_v[j][k] = s;
            }
        }
    }
    let mut qmat = [[0.0; 3]; 3];
    let mut nmat = [[0.0; 3]; 3];
    let mut shape_max: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            // ⟨V_{i+1}, ∇_{V_{j+1}} V⟩
            let mut s = 0.0;
            for a in 0..4 {
                for k in 0..4 {
                    for b in 0..4 {
                        s += frame[1 + i][a] * cp.g[a][k] * frame[1 + j][b] * nabla_v[b][k];
                    }
                }
            }
            qmat[i][j] = s;
            shape_max = shape_max.max(s.abs());
            nmat[i][j] = cp.riemann(&frame[1 + i], &v, &frame[1 + j], &v);
        }
    }
    // d/ds|₀ det(Q − sN) by row replacement.
    let mut det_variation = 0.0;
    for i in 0..3 {
        let mut m = qmat;
        for j in 0..3 {
            m[i][j] = -nmat[i][j];
        }
        det_variation += det3(&m);
    }
    let rho_val = rho.eval_f64(point)?;
    det_variation *= 3.0 * rho_val * rho_val;
    Ok(ModelDetIdentity {
        pf_variation,
        det_variation,
        shape_max,
    })
}
