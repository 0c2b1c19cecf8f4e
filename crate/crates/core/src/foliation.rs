//! Geometry around points with negative-definite Ricci: the smallest-
//! eigenvalue unit eigenfield V, the shape operator of V^⊥, integrability,
//! leaf flatness, and the divergence identity `div(∇_V V) = R/2`.
//!
//! V is defined through an eigendecomposition, so it has no closed-form jet;
//! all differentiation of V here is central finite differences over sign-
//! coherent samples, optionally Richardson-refined.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::frames::{classify_point, gram_schmidt, ClassTag, Frame};
use crate::metrics::{ChartDomain, MetricField};
use crate::tensor::{curvature_at, sectional, CurvaturePoint};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How the unit field V is produced at a point.
#[derive(Clone, Debug)]
pub enum VectorFieldSpec {
    /// Smallest-eigenvalue unit eigenvector of Ricci; requires a
    /// NegativeDefinite classification with gap at least `eps_gap`.
    RicciEigenfield { eps_deg: f64, eps_gap: f64 },
    /// Explicit components, normalized to g-unit length.
    Explicit([Expr; 4]),
}

impl VectorFieldSpec {
    pub fn eigen_default() -> Self {
        VectorFieldSpec::RicciEigenfield {
            eps_deg: 0.0,
            eps_gap: 0.0,
        }
    }

    /// Unit V at `point`, sign-aligned against `reference` when given
    /// (otherwise largest-magnitude coordinate positive).
    pub fn eval(
        &self,
        metric: &MetricField,
        point: &[f64],
        reference: Option<&[f64; 4]>,
    ) -> Result<[f64; 4]> {
        let cp = curvature_at(metric, point)?;
        let mut v = match self {
            VectorFieldSpec::RicciEigenfield { eps_deg, eps_gap } => {
                let (d0, g0) = crate::frames::default_eps(&cp);
                let class = classify_point(&cp, d0.max(*eps_deg), g0.max(*eps_gap))?;
                match class.tag {
                    ClassTag::NegativeDefinite => class.v.unwrap(),
                    ClassTag::Degenerate => {
                        return Err(Error::EigenfieldPoint {
                            point: point.to_vec(),
                            reason: format!(
                                "Ricci is degenerate (eigenvalues {:?})",
                                class.eigenvalues
                            ),
                        })
                    }
                    ClassTag::DegenerateAmbiguous => {
                        return Err(Error::EigenfieldPoint {
                            point: point.to_vec(),
                            reason: format!(
                                "spectral gap {} too small to follow the eigenvector",
                                class.gap
                            ),
                        })
                    }
                }
            }
            VectorFieldSpec::Explicit(components) => {
                let mut v = [0.0; 4];
                for (k, c) in components.iter().enumerate().take(cp.dim) {
                    v[k] = c.eval_f64(point)?;
                }
                let norm = cp.inner(&v, &v).sqrt();
                if !(norm > 1e-12) {
                    return Err(Error::EigenfieldPoint {
                        point: point.to_vec(),
                        reason: "explicit field vanishes".into(),
                    });
                }
                for x in v.iter_mut() {
                    *x /= norm;
                }
                v
            }
        };
        if let Some(r) = reference {
            let dot = cp.inner(&v, r);
            if dot.abs() < 1e-6 {
                return Err(Error::SignFlip {
                    point: point.to_vec(),
                });
            }
            if dot < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
        }
        Ok(v)
    }

    /// Spectral gap at a point, for reporting; meaningful for the eigenfield.
    pub fn gap(&self, metric: &MetricField, point: &[f64]) -> Result<f64> {
        let cp = curvature_at(metric, point)?;
        let class = crate::frames::classify_point_default(&cp)?;
        Ok(class.gap)
    }
}

/// Axis-aligned 4D lattice centered at `center`.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub center: [f64; 4],
    pub half_extent: f64,
    pub nodes_per_axis: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<[f64; 4]> {
        let n = self.nodes_per_axis;
        let mut out = Vec::with_capacity(n.pow(4));
        for i in 0..n.pow(4) {
            out.push(self.point_at(self.unflatten(i)));
        }
        out
    }

    fn unflatten(&self, flat: usize) -> [usize; 4] {
        let n = self.nodes_per_axis;
        let mut idx = [0; 4];
        let mut rest = flat;
        for axis in (0..4).rev() {
            idx[axis] = rest % n;
            rest /= n;
        }
        idx
    }

    fn flatten(&self, idx: [usize; 4]) -> usize {
        let n = self.nodes_per_axis;
        ((idx[0] * n + idx[1]) * n + idx[2]) * n + idx[3]
    }

    fn point_at(&self, idx: [usize; 4]) -> [f64; 4] {
        let n = self.nodes_per_axis;
        let mut p = self.center;
        for axis in 0..4 {
            let t = if n == 1 {
                0.0
            } else {
                2.0 * idx[axis] as f64 / (n - 1) as f64 - 1.0
            };
            p[axis] += t * self.half_extent;
        }
        p
    }
}

/// Unit eigenfield samples over a grid with coherent signs.
#[derive(Clone, Debug)]
pub struct VFieldSample {
    pub grid: GridSpec,
    pub points: Vec<[f64; 4]>,
    pub vectors: Vec<[f64; 4]>,
    pub gaps: Vec<f64>,
}

/// Sample the smallest-eigenvalue unit eigenfield of Ricci over the grid.
/// The sign is propagated breadth-first from the grid center; every grid
/// point must classify NegativeDefinite with an adequate gap.
pub fn eigenfield(metric: &MetricField, chart: &ChartDomain, grid: &GridSpec) -> Result<VFieldSample> {
    let n = grid.nodes_per_axis;
    let total = n.pow(4);
    let spec = VectorFieldSpec::eigen_default();
    let mut points = Vec::with_capacity(total);
    for i in 0..total {
        let p = grid.point_at(grid.unflatten(i));
        if !chart.contains(&p[..metric.dim]) {
            return Err(Error::OutsideChart { point: p.to_vec() });
        }
        points.push(p);
    }
    let mut vectors: Vec<Option<[f64; 4]>> = vec![None; total];
    let mut gaps = vec![0.0; total];

    let center_idx = grid.flatten([n / 2; 4]);
    let v0 = spec.eval(metric, &points[center_idx], None)?;
    gaps[center_idx] = spec.gap(metric, &points[center_idx])?;
    vectors[center_idx] = Some(v0);

    let mut queue = std::collections::VecDeque::new();
    queue.push_back(center_idx);
    while let Some(cur) = queue.pop_front() {
        let cur_v = vectors[cur].unwrap();
        let idx = grid.unflatten(cur);
        for axis in 0..4 {
            for dir in [-1i64, 1i64] {
                let next = idx[axis] as i64 + dir;
                if next < 0 || next >= n as i64 {
                    continue;
                }
                let mut nidx = idx;
                nidx[axis] = next as usize;
                let flat = grid.flatten(nidx);
                if vectors[flat].is_some() {
                    continue;
                }
                let v = spec.eval(metric, &points[flat], Some(&cur_v))?;
                gaps[flat] = spec.gap(metric, &points[flat])?;
                vectors[flat] = Some(v);
                queue.push_back(flat);
            }
        }
    }
    let vectors: Vec<[f64; 4]> = vectors.into_iter().map(|v| v.unwrap()).collect();
    Ok(VFieldSample {
        grid: *grid,
        points,
        vectors,
        gaps,
    })
}

/// Orthonormal basis of V^⊥ at a point: complete V to a frame, seeding with
/// the coordinate directions least aligned with V.
fn perp_basis(cp: &CurvaturePoint, v: &[f64; 4]) -> Result<[[f64; 4]; 3]> {
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()));
    let mut seeds = [[0.0; 4]; 4];
    seeds[0] = *v;
    for (row, &coord) in order.iter().take(3).enumerate() {
        seeds[row + 1][coord] = 1.0;
    }
    let frame = gram_schmidt(&cp.g, 4, &seeds)?;
    Ok([frame[1], frame[2], frame[3]])
}

/// `∇V` at `point` from central differences of the field plus Christoffel
/// terms: `(∇_a V)^k = ∂_a V^k + Γ^k_{ab} V^b`.
fn nabla_v_fd(
    metric: &MetricField,
    field: &VectorFieldSpec,
    cp: &CurvaturePoint,
    point: &[f64; 4],
    h: f64,
) -> Result<[[f64; 4]; 4]> {
    let v0 = field.eval(metric, &point[..cp.dim], None)?;
    let mut out = [[0.0; 4]; 4];
    for a in 0..cp.dim {
        let mut plus = *point;
        plus[a] += h;
        let mut minus = *point;
        minus[a] -= h;
        let vp = field.eval(metric, &plus[..cp.dim], Some(&v0))?;
        let vm = field.eval(metric, &minus[..cp.dim], Some(&v0))?;
        for k in 0..cp.dim {
            let mut s = (vp[k] - vm[k]) / (2.0 * h);
            for b in 0..cp.dim {
                s += cp.gamma[k][a][b] * v0[b];
            }
            out[a][k] = s;
        }
    }
    Ok(out)
}

/// Shape operator of V^⊥: `S_ij = ⟨∇_{X_i} V, X_j⟩` for an orthonormal
/// basis `X_i` of V^⊥, with `∇V` by step-`h` central differences
/// (Richardson-refined when `richardson` is set).
pub fn shape_operator(
    metric: &MetricField,
    field: &VectorFieldSpec,
    point: &[f64; 4],
    h: f64,
    richardson: bool,
) -> Result<[[f64; 3]; 3]> {
    let cp = curvature_at(metric, &point[..metric.dim])?;
    let v = field.eval(metric, &point[..metric.dim], None)?;
    let basis = perp_basis(&cp, &v)?;
    let assemble = |nv: &[[f64; 4]; 4]| -> [[f64; 3]; 3] {
        let mut s = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for a in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            acc += basis[i][a] * nv[a][k] * cp.g[k][l] * basis[j][l];
                        }
                    }
                }
                s[i][j] = acc;
            }
        }
        s
    };
    let coarse = assemble(&nabla_v_fd(metric, field, &cp, point, h)?);
    if !richardson {
        return Ok(coarse);
    }
    let fine = assemble(&nabla_v_fd(metric, field, &cp, point, 0.5 * h)?);
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (4.0 * fine[i][j] - coarse[i][j]) / 3.0;
        }
    }
    Ok(out)
}

pub fn shape_operator_max(s: &[[f64; 3]; 3]) -> f64 {
    let mut m: f64 = 0.0;
    for row in s {
        for x in row {
            m = m.max(x.abs());
        }
    }
    m
}

/// Frobenius norm of the skew part of S; `V^⊥` is integrable iff this
/// vanishes (`⟨[X,Y],V⟩ = ⟨X,∇_Y V⟩ − ⟨Y,∇_X V⟩`).
pub fn integrability_defect(s: &[[f64; 3]; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let skew = 0.5 * (s[i][j] - s[j][i]);
            acc += skew * skew;
        }
    }
    acc.sqrt()
}

/// Max |sectional| over the coordinate pairs of an orthonormal basis of
/// V^⊥ plus `extra` random planes inside V^⊥.
pub fn leaf_flatness(cp: &CurvaturePoint, v: &[f64; 4], extra: usize, seed: u64) -> Result<f64> {
    let basis = perp_basis(cp, v)?;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            worst = worst.max(sectional(cp, &basis[i], &basis[j])?.abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    while done < extra {
        let mut a = [0.0; 4];
        let mut b = [0.0; 4];
        for i in 0..4 {
            let (ca, cb) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            for k in 0..3 {
                a[i] += ca * basis[k][i] * if k == i % 3 { 1.0 } else { 0.5 };
                b[i] += cb * basis[k][i] * if k == (i + 1) % 3 { 1.0 } else { 0.5 };
            }
        }
        match sectional(cp, &a, &b) {
            Ok(k) => {
                worst = worst.max(k.abs());
                done += 1;
            }
            Err(_) => continue,
        }
    }
    Ok(worst)
}

/// Largest sectional curvature K(V, X) over `count` random unit X ⊥ V;
/// negative when the paper's property (v) holds.
pub fn max_sectional_with_v(
    cp: &CurvaturePoint,
    v: &[f64; 4],
    count: usize,
    seed: u64,
) -> Result<f64> {
    let basis = perp_basis(cp, v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..count {
        let mut x = [0.0; 4];
        let coeffs: [f64; 3] = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        for i in 0..4 {
            for k in 0..3 {
                x[i] += coeffs[k] * basis[k][i];
            }
        }
        if cp.inner(&x, &x) < 1e-12 {
            continue;
        }
        worst = worst.max(sectional(cp, v, &x)?);
    }
    Ok(worst)
}

/// `|div(∇_V V) − R/2|` with `∇_V V` assembled from field samples and
/// Christoffels on a step-`h` stencil and its divergence by a second
/// central difference.
pub fn divergence_identity_residual(
    metric: &MetricField,
    field: &VectorFieldSpec,
    point: &[f64; 4],
    h: f64,
) -> Result<f64> {
    let cp = curvature_at(metric, &point[..metric.dim])?;
    let v_ref = field.eval(metric, &point[..metric.dim], None)?;
    // W(x) = (∇_V V)(x), each evaluation needing its own inner stencil.
    let w_at = |x: &[f64; 4]| -> Result<[f64; 4]> {
        let cpx = curvature_at(metric, &x[..metric.dim])?;
        let vx = field.eval(metric, &x[..metric.dim], Some(&v_ref))?;
        let nv = nabla_v_fd(metric, field, &cpx, x, h)?;
        let mut w = [0.0; 4];
        for k in 0..4 {
            let mut s = 0.0;
            for a in 0..4 {
                s += vx[a] * nv[a][k];
            }
            w[k] = s;
        }
        Ok(w)
    };
    // div W = ∂k W^k + Γ^k_{ka} W^a at the center.
    let w0 = w_at(point)?;
    let mut div = 0.0;
    for k in 0..4 {
        let mut plus = *point;
        plus[k] += h;
        let mut minus = *point;
        minus[k] -= h;
        let wp = w_at(&plus)?;
        let wm = w_at(&minus)?;
        div += (wp[k] - wm[k]) / (2.0 * h);
    }
    for k in 0..4 {
        for a in 0..4 {
            div += cp.gamma[k][k][a] * w0[a];
        }
    }
    Ok((div - 0.5 * cp.scalar).abs())
}

/// Everything the foliation check produces at one grid point.
#[derive(Clone, Debug)]
pub struct FoliationRow {
    pub point: [f64; 4],
    pub eigenvalues: [f64; 4],
    pub gap: f64,
    pub defect: f64,
    pub shape_max: f64,
    pub flatness: f64,
    pub max_k_with_v: f64,
    pub divergence_residual: f64,
}

/// Run the full foliation suite on a grid.
pub fn foliation_report(
    metric: &MetricField,
    chart: &ChartDomain,
    grid: &GridSpec,
    h: f64,
    seed: u64,
) -> Result<Vec<FoliationRow>> {
    let sample = eigenfield(metric, chart, grid)?;
    let field = VectorFieldSpec::eigen_default();
    let mut rows = Vec::with_capacity(sample.points.len());
    for (i, p) in sample.points.iter().enumerate() {
        let cp = curvature_at(metric, &p[..metric.dim])?;
        let class = crate::frames::classify_point_default(&cp)?;
        let s = shape_operator(metric, &field, p, h, true)?;
        let row = FoliationRow {
            point: *p,
            eigenvalues: class.eigenvalues,
            gap: class.gap,
            defect: integrability_defect(&s),
            shape_max: shape_operator_max(&s),
            flatness: leaf_flatness(&cp, &sample.vectors[i], 20, seed ^ i as u64)?,
            max_k_with_v: max_sectional_with_v(&cp, &sample.vectors[i], 20, seed ^ (i as u64) << 1)?,
            divergence_residual: divergence_identity_residual(metric, &field, p, h)?,
        };
        rows.push(row);
    }
    Ok(rows)
}

/// Complete V to a full frame (V first); convenience for reports.
pub fn adapted_frame(cp: &CurvaturePoint, v: &[f64; 4]) -> Result<Frame> {
    let basis = perp_basis(cp, v)?;
    Ok(Frame::new(
        cp.dim,
        cp.point,
        [*v, basis[0], basis[1], basis[2]],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::metrics::{builtin, BuiltinParams};

    fn model() -> (MetricField, ChartDomain) {
        builtin("model_gf", &BuiltinParams::default()).unwrap()
    }

    fn small_grid() -> GridSpec {
        GridSpec {
            center: [0.1, -0.05, 0.08, 0.0],
            half_extent: 0.15,
            nodes_per_axis: 3,
        }
    }

    #[test]
    fn eigenfield_on_model_gf_aligns_with_d4() {
        let (m, chart) = model();
        let sample = eigenfield(&m, &chart, &small_grid()).unwrap();
        for (p, v) in sample.points.iter().zip(&sample.vectors) {
            let f = 1.0 + p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            // V = f⁻¹ ∂₄ up to sign; sign coherence makes it +.
            assert!((v[3] - 1.0 / f).abs() < 1e-8, "V = {v:?} at {p:?}");
            for i in 0..3 {
                assert!(v[i].abs() < 1e-8);
            }
        }
    }

    #[test]
    fn eigenfield_rejects_h2xh2_and_euclidean() {
        let (m, chart) = builtin("h2xh2", &BuiltinParams::default()).unwrap();
        let grid = GridSpec {
            center: [0.0, 2.0, 0.0, 2.0],
            half_extent: 0.1,
            nodes_per_axis: 2,
        };
        assert!(matches!(
            eigenfield(&m, &chart, &grid),
            Err(Error::EigenfieldPoint { .. })
        ));
        let (m, chart) = builtin("euclidean4", &BuiltinParams::default()).unwrap();
        let grid = GridSpec {
            center: [0.0; 4],
            half_extent: 0.1,
            nodes_per_axis: 2,
        };
        assert!(matches!(
            eigenfield(&m, &chart, &grid),
            Err(Error::EigenfieldPoint { .. })
        ));
    }

    #[test]
    fn shape_operator_vanishes_on_model_gf() {
        let (m, _) = model();
        let field = VectorFieldSpec::eigen_default();
        let s = shape_operator(&m, &field, &[0.1, 0.2, -0.1, 0.05], 1e-3, true).unwrap();
        assert!(shape_operator_max(&s) < 1e-6, "S = {s:?}");
        assert!(integrability_defect(&s) < 1e-6);
    }

    #[test]
    fn shape_operator_zero_for_constant_field_on_flat_space() {
        let (m, _) = builtin("euclidean4", &BuiltinParams::default()).unwrap();
        let field = VectorFieldSpec::Explicit([
            Expr::Num(1.0),
            Expr::Num(0.0),
            Expr::Num(0.0),
            Expr::Num(0.0),
        ]);
        let s = shape_operator(&m, &field, &[0.1, 0.0, 0.2, 0.0], 1e-3, false).unwrap();
        assert!(shape_operator_max(&s) < 1e-14);
    }

    #[test]
    fn non_integrable_control_field_is_flagged() {
        // V = unit(∂₁ + x₃ ∂₂): the dual form dx₁ + x₃ dx₂ has
        // α ∧ dα ≠ 0, so V^⊥ is not integrable.
        let (m, _) = builtin("euclidean4", &BuiltinParams::default()).unwrap();
        let field = VectorFieldSpec::Explicit([
            Expr::Num(1.0),
            parse("x3").unwrap(),
            Expr::Num(0.0),
            Expr::Num(0.0),
        ]);
        let s = shape_operator(&m, &field, &[0.0; 4], 1e-3, true).unwrap();
        let defect = integrability_defect(&s);
        assert!(defect > 1e-3, "defect = {defect}");
    }

    #[test]
    fn integrability_defect_of_symmetric_matrix_is_zero() {
        let s = [[1.0, 0.5, -0.2], [0.5, 2.0, 0.1], [-0.2, 0.1, 0.7]];
        assert_eq!(integrability_defect(&s), 0.0);
        let z = [[0.0; 3]; 3];
        assert_eq!(integrability_defect(&z), 0.0);
    }

    #[test]
    fn leaf_flatness_model_vs_s4() {
        let (m, _) = model();
        let p = [0.2, 0.1, -0.1, 0.3];
        let cp = curvature_at(&m, &p).unwrap();
        let f = 1.0 + p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        let v = [0.0, 0.0, 0.0, 1.0 / f];
        assert!(leaf_flatness(&cp, &v, 20, 3).unwrap() < 1e-9);

        let (s4, _) = builtin("s4", &BuiltinParams::default()).unwrap();
        let cp = curvature_at(&s4, &[1.2, 1.1, 0.9, 0.5]).unwrap();
        let v = [1.0, 0.0, 0.0, 0.0];
        let flat = leaf_flatness(&cp, &v, 20, 3).unwrap();
        assert!((flat - 1.0).abs() < 1e-9, "constant curvature 1, got {flat}");

        let (e4, _) = builtin("euclidean4", &BuiltinParams::default()).unwrap();
        let cp = curvature_at(&e4, &[0.0; 4]).unwrap();
        assert_eq!(leaf_flatness(&cp, &v, 20, 3).unwrap(), 0.0);
    }

    #[test]
    fn divergence_identity_on_model_gf() {
        let (m, _) = model();
        let field = VectorFieldSpec::eigen_default();
        // R/2 = −Δf/f = −6 at the origin region.
        let residual =
            divergence_identity_residual(&m, &field, &[0.05, -0.02, 0.04, 0.1], 1e-3).unwrap();
        assert!(residual < 1e-5, "residual {residual}");
    }

    #[test]
    fn divergence_identity_with_x4_dependent_f() {
        let f = parse("(1 + x1^2 + x2^2 + x3^2)*(2 + sin(x4))/2").unwrap();
        let (m, _) = builtin("model_gf", &BuiltinParams::with_f(f)).unwrap();
        let field = VectorFieldSpec::eigen_default();
        let residual =
            divergence_identity_residual(&m, &field, &[0.1, 0.05, -0.08, 0.2], 1e-3).unwrap();
        assert!(residual < 1e-4, "residual {residual}");
    }

    #[test]
    fn halving_h_quarters_the_divergence_residual() {
        let (m, _) = model();
        let field = VectorFieldSpec::eigen_default();
        let p = [0.12, 0.07, -0.06, 0.04];
        let r1 = divergence_identity_residual(&m, &field, &p, 4e-3).unwrap();
        let r2 = divergence_identity_residual(&m, &field, &p, 2e-3).unwrap();
        if r1 > 1e-9 && r2 > 1e-9 {
            let ratio = r1 / r2;
            assert!(ratio > 3.0 && ratio < 5.5, "ratio {ratio}");
        }
    }

    #[test]
    fn foliation_report_meets_model_tolerances() {
        let (m, chart) = model();
        let grid = GridSpec {
            center: [0.1, -0.05, 0.08, 0.0],
            half_extent: 0.1,
            nodes_per_axis: 2,
        };
        let rows = foliation_report(&m, &chart, &grid, 1e-3, 42).unwrap();
        for row in rows {
            assert!(row.shape_max < 1e-6);
            assert!(row.defect < 1e-6);
            assert!(row.flatness < 1e-9);
            assert!(row.max_k_with_v < 0.0, "property (v): K(V,·) < 0");
            assert!(row.divergence_residual < 1e-4);
        }
    }
}
