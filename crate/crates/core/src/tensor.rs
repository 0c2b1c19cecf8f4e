//! The curvature engine.
//!
//! Conventions, pinned by the sphere/hyperbolic anchor tests:
//!
//! ```text
//! R(X,Y)Z = ∇_Y ∇_X Z − ∇_X ∇_Y Z + ∇_{[X,Y]} Z,      R(X,Y,Z,W) = g(R(X,Y)Z, W)
//! ```
//!
//! so that `K(v,w) = R(v,w,v,w)` for orthonormal `v,w`, the unit round
//! sphere has `K = +1` and the hyperbolic plane `K = -1`. In coordinates
//!
//! ```text
//! R(∂a,∂b)∂c = [∂b Γ^l_ac − ∂a Γ^l_bc + Γ^k_ac Γ^l_bk − Γ^k_bc Γ^l_ak] ∂l,
//! ```
//!
//! and `Ric(X,Y) = Σ_j R(X,e_j,Y,e_j)` over any orthonormal frame, which in
//! coordinates is `Ric_ac = g^{bd} R_abcd`. Tensor norms sum over all index
//! tuples in an orthonormal frame, with no symmetry factors.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::frames::Frame;
use crate::linalg::{self, Mat4};
use crate::metrics::{metric_jets_into, MetricField, MetricJets, SymTensorField};

pub type Tensor3 = [[[f64; 4]; 4]; 4];
pub type Tensor4 = [[[[f64; 4]; 4]; 4]; 4];

/// Everything curvature knows about one point: metric, inverse, Christoffel
/// symbols `gamma[k][i][j] = Γ^k_ij` and their partials
/// `dgamma[l][k][i][j] = ∂l Γ^k_ij`, the (0,4) curvature `riem[a][b][c][d] =
/// R_abcd`, Ricci, and the scalar curvature.
#[derive(Clone)]
pub struct CurvaturePoint {
    pub dim: usize,
    pub point: [f64; 4],
    pub g: Mat4,
    pub g_inv: Mat4,
    pub sqrt_det_g: f64,
    pub gamma: Tensor3,
    pub dgamma: Tensor4,
    pub riem: Tensor4,
    pub ricci: Mat4,
    pub scalar: f64,
}

impl CurvaturePoint {
    pub(crate) fn zeroed() -> Self {
        CurvaturePoint {
            dim: 0,
            point: [0.0; 4],
            g: [[0.0; 4]; 4],
            g_inv: [[0.0; 4]; 4],
            sqrt_det_g: 0.0,
            gamma: [[[0.0; 4]; 4]; 4],
            dgamma: [[[[0.0; 4]; 4]; 4]; 4],
            riem: [[[[0.0; 4]; 4]; 4]; 4],
            ricci: [[0.0; 4]; 4],
            scalar: 0.0,
        }
    }

    /// g-inner product of tangent vectors.
    pub fn inner(&self, v: &[f64; 4], w: &[f64; 4]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += v[i] * self.g[i][j] * w[j];
            }
        }
        s
    }

    /// `R(x,y,z,w)` on coordinate-component vectors.
    pub fn riemann(&self, x: &[f64; 4], y: &[f64; 4], z: &[f64; 4], w: &[f64; 4]) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                if y[b] == 0.0 {
                    continue;
                }
                for c in 0..n {
                    if z[c] == 0.0 {
                        continue;
                    }
                    let mut t = 0.0;
                    for d in 0..n {
                        t += self.riem[a][b][c][d] * w[d];
                    }
                    s += x[a] * y[b] * z[c] * t;
                }
            }
        }
        s
    }

    /// Largest curvature component, used to scale residual tolerances.
    pub fn riem_max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..self.dim {
            for b in 0..self.dim {
                for c in 0..self.dim {
                    for d in 0..self.dim {
                        m = m.max(self.riem[a][b][c][d].abs());
                    }
                }
            }
        }
        m
    }
}

/// Reusable buffers for batch evaluation.
pub struct Scratch {
    pub(crate) jets: MetricJets,
    pub(crate) cp: CurvaturePoint,
}

impl Scratch {
    pub fn new() -> Self {
        Scratch {
            jets: MetricJets::zeroed(),
            cp: CurvaturePoint::zeroed(),
        }
    }
}

impl Default for Scratch {
    fn default() -> Self {
        Scratch::new()
    }
}

/// Christoffel symbols `Γ^k_ij = ½ g^{kl}(∂i g_jl + ∂j g_il − ∂l g_ij)` and
/// their first partials, from exact second metric jets.
pub fn christoffel(metric: &MetricField, point: &[f64]) -> Result<(Tensor3, Tensor4)> {
    let cp = curvature_at(metric, point)?;
    Ok((cp.gamma, cp.dgamma))
}

/// Full curvature package at a point.
pub fn curvature_at(metric: &MetricField, point: &[f64]) -> Result<Box<CurvaturePoint>> {
    let mut scratch = Scratch::new();
    curvature_into(metric, point, &mut scratch)?;
    Ok(Box::new(scratch.cp))
}

pub(crate) fn curvature_into(
    metric: &MetricField,
    point: &[f64],
    scratch: &mut Scratch,
) -> Result<()> {
    metric_jets_into(metric, point, &mut scratch.jets)?;
    assemble(point, &scratch.jets, &mut scratch.cp)
}

fn assemble(point: &[f64], jets: &MetricJets, cp: &mut CurvaturePoint) -> Result<()> {
    let n = jets.dim;
    cp.dim = n;
    cp.point = [0.0; 4];
    cp.point[..n].copy_from_slice(point);
    cp.g = jets.g;
    let chol = linalg::cholesky(&jets.g, n).ok_or_else(|| Error::NotPositiveDefinite {
        point: point.to_vec(),
        eigenvalues: linalg::sym_eigenvalues(&jets.g, n),
    })?;
    cp.g_inv = linalg::spd_inverse(&chol, n);
    cp.sqrt_det_g = linalg::det_from_cholesky(&chol, n).sqrt();

    let g_inv = &cp.g_inv;
    let dg = &jets.dg;
    let d2g = &jets.d2g;

    // Γ^k_ij, over the symmetric pairs i <= j.
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += g_inv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                }
                let v = 0.5 * s;
                cp.gamma[k][i][j] = v;
                cp.gamma[k][j][i] = v;
            }
        }
    }

    // ∂m g^{kl} = −g^{ka} (∂m g_ab) g^{bl}
    let mut dginv = [[[0.0; 4]; 4]; 4];
    for m in 0..n {
        for k in 0..n {
            for l in k..n {
                let mut s = 0.0;
                for a in 0..n {
                    let mut t = 0.0;
                    for b in 0..n {
                        t += dg[m][a][b] * g_inv[b][l];
                    }
                    s += g_inv[k][a] * t;
                }
                dginv[m][k][l] = -s;
                dginv[m][l][k] = -s;
            }
        }
    }

    // ∂m Γ^k_ij
    for m in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += dginv[m][k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j])
                            + g_inv[k][l]
                                * (d2g[m][i][j][l] + d2g[m][j][i][l] - d2g[m][l][i][j]);
                    }
                    let v = 0.5 * s;
                    cp.dgamma[m][k][i][j] = v;
                    cp.dgamma[m][k][j][i] = v;
                }
            }
        }
    }

    // R^l_abc, then lower the last index: R_abcd = g_ld R^l_abc.
    let mut rop = [[[[0.0; 4]; 4]; 4]; 4];
    for l in 0..n {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut s = cp.dgamma[b][l][a][c] - cp.dgamma[a][l][b][c];
                    for k in 0..n {
                        s += cp.gamma[k][a][c] * cp.gamma[l][b][k]
                            - cp.gamma[k][b][c] * cp.gamma[l][a][k];
                    }
                    rop[l][a][b][c] = s;
                }
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += cp.g[l][d] * rop[l][a][b][c];
                    }
                    cp.riem[a][b][c][d] = s;
                }
            }
        }
    }

    // Ric_ac = g^{bd} R_abcd, symmetrised; scalar = g^{ac} Ric_ac.
    for a in 0..n {
        for c in a..n {
            let mut s = 0.0;
            for b in 0..n {
                for d in 0..n {
                    s += g_inv[b][d] * cp.riem[a][b][c][d];
                }
            }
            cp.ricci[a][c] = s;
            cp.ricci[c][a] = s;
        }
    }
    let mut scalar = 0.0;
    for a in 0..n {
        for c in 0..n {
            scalar += g_inv[a][c] * cp.ricci[a][c];
        }
    }
    cp.scalar = scalar;
    Ok(())
}

/// The curvature operator components `(R(∂a,∂b)∂c)^l`, recovered from the
/// stored (0,4) tensor by raising the last index.
pub(crate) fn curvature_operator(cp: &CurvaturePoint) -> Tensor4 {
    let n = cp.dim;
    let mut rop = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for d in 0..n {
                        s += cp.g_inv[l][d] * cp.riem[a][b][c][d];
                    }
                    rop[l][a][b][c] = s;
                }
            }
        }
    }
    rop
}

/// Sectional curvature of the plane spanned by `v, w`:
/// `R(v,w,v,w) / (|v|²|w|² − ⟨v,w⟩²)`.
pub fn sectional(cp: &CurvaturePoint, v: &[f64; 4], w: &[f64; 4]) -> Result<f64> {
    let vv = cp.inner(v, v);
    let ww = cp.inner(w, w);
    let vw = cp.inner(v, w);
    let gram = vv * ww - vw * vw;
    if gram <= 1e-14 * vv * ww {
        return Err(Error::DegeneratePlane { det: gram });
    }
    Ok(cp.riemann(v, w, v, w) / gram)
}

/// `(|R|², |Ric|²)` with all indices raised by `g⁻¹`; equal to the plain
/// component sums in any orthonormal frame.
pub fn riemann_norms(cp: &CurvaturePoint) -> (f64, f64) {
    let n = cp.dim;
    let gi = &cp.g_inv;
    // Raise indices one at a time.
    let mut t1 = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for e in 0..n {
                    let mut s = 0.0;
                    for d in 0..n {
                        s += cp.riem[a][b][c][d] * gi[d][e];
                    }
                    t1[a][b][c][e] = s;
                }
            }
        }
    }
    let mut t2 = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..n {
        for b in 0..n {
            for e in 0..n {
                for dd in 0..n {
                    let mut s = 0.0;
                    for c in 0..n {
                        s += t1[a][b][c][dd] * gi[c][e];
                    }
                    t2[a][b][e][dd] = s;
                }
            }
        }
    }
    let mut t3 = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..n {
        for e in 0..n {
            for cc in 0..n {
                for dd in 0..n {
                    let mut s = 0.0;
                    for b in 0..n {
                        s += t2[a][b][cc][dd] * gi[b][e];
                    }
                    t3[a][e][cc][dd] = s;
                }
            }
        }
    }
    let mut riem2 = 0.0;
    for a in 0..n {
        for bb in 0..n {
            for cc in 0..n {
                for dd in 0..n {
                    let mut up = 0.0;
                    for e in 0..n {
                        up += t3[e][bb][cc][dd] * gi[a][e];
                    }
                    riem2 += cp.riem[a][bb][cc][dd] * up;
                }
            }
        }
    }
    // |Ric|² = tr((g⁻¹ Ric)²)
    let mut m = [[0.0; 4]; 4];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += gi[i][k] * cp.ricci[k][j];
            }
            m[i][j] = s;
        }
    }
    let mut ric2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            ric2 += m[i][j] * m[j][i];
        }
    }
    (riem2, ric2)
}

/// Gauss-Bonnet-Chern integrand in dimension 4:
/// `Pf = (|R|² − 4|Ric|² + R²)/8`.
pub fn pfaffian_norm(cp: &CurvaturePoint) -> Result<f64> {
    if cp.dim != 4 {
        return Err(Error::Dimension {
            op: "pfaffian_norm",
            expected: 4,
            found: cp.dim,
        });
    }
    let (riem2, ric2) = riemann_norms(cp);
    Ok((riem2 - 4.0 * ric2 + cp.scalar * cp.scalar) / 8.0)
}

/// Curvature components in an orthonormal frame:
/// `Rf[i][j][k][l] = R(v_i, v_j, v_k, v_l)`.
pub fn riemann_in_frame(cp: &CurvaturePoint, frame: &Frame) -> Tensor4 {
    let n = cp.dim;
    let f = &frame.vectors;
    let mut t1 = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for d in 0..n {
                        s += cp.riem[a][b][c][d] * f[l][d];
                    }
                    t1[a][b][c][l] = s;
                }
            }
        }
    }
    let mut t2 = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..n {
        for b in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for c in 0..n {
                        s += t1[a][b][c][l] * f[k][c];
                    }
                    t2[a][b][k][l] = s;
                }
            }
        }
    }
    let mut t3 = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for b in 0..n {
                        s += t2[a][b][k][l] * f[j][b];
                    }
                    t3[a][j][k][l] = s;
                }
            }
        }
    }
    let mut rf = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for a in 0..n {
                        s += t3[a][j][k][l] * f[i][a];
                    }
                    rf[i][j][k][l] = s;
                }
            }
        }
    }
    rf
}

// The 18 pair products of the general Pfaffian expansion in an orthonormal
// frame, 0-based index tuples.
const PF_TERMS: [([usize; 4], [usize; 4]); 18] = [
    ([0, 1, 0, 1], [2, 3, 2, 3]),
    ([0, 1, 0, 2], [2, 3, 3, 1]),
    ([0, 1, 0, 3], [2, 3, 1, 2]),
    ([0, 1, 1, 2], [2, 3, 0, 3]),
    ([0, 1, 1, 3], [2, 3, 2, 0]),
    ([0, 1, 2, 3], [2, 3, 0, 1]),
    ([0, 2, 0, 1], [3, 1, 2, 3]),
    ([0, 2, 0, 2], [3, 1, 3, 1]),
    ([0, 2, 0, 3], [3, 1, 1, 2]),
    ([0, 2, 1, 2], [3, 1, 0, 3]),
    ([0, 2, 1, 3], [3, 1, 2, 0]),
    ([0, 2, 2, 3], [3, 1, 0, 1]),
    ([0, 3, 0, 1], [1, 2, 2, 3]),
    ([0, 3, 0, 2], [1, 2, 3, 1]),
    ([0, 3, 0, 3], [1, 2, 1, 2]),
    ([0, 3, 1, 2], [1, 2, 0, 3]),
    ([0, 3, 1, 3], [1, 2, 2, 0]),
    ([0, 3, 2, 3], [1, 2, 0, 1]),
];

fn rf_at(rf: &Tensor4, idx: &[usize; 4]) -> f64 {
    rf[idx[0]][idx[1]][idx[2]][idx[3]]
}

/// The full 18-term Pfaffian expansion evaluated in the given orthonormal
/// frame. Frame independence against [`pfaffian_norm`] is a test oracle.
pub fn pfaffian_frame(cp: &CurvaturePoint, frame: &Frame) -> Result<f64> {
    if cp.dim != 4 {
        return Err(Error::Dimension {
            op: "pfaffian_frame",
            expected: 4,
            found: cp.dim,
        });
    }
    frame.check_orthonormal(&cp.g, 1e-10)?;
    let rf = riemann_in_frame(cp, frame);
    let mut s = 0.0;
    for (a, b) in &PF_TERMS {
        s += rf_at(&rf, a) * rf_at(&rf, b);
    }
    Ok(s)
}

/// The grouped form of the same expansion; equal to [`pfaffian_frame`] by
/// the pair symmetries, kept as an independent route for tests.
pub fn pfaffian_frame_grouped(rf: &Tensor4) -> f64 {
    rf[0][1][0][1] * rf[2][3][2][3]
        + rf[0][2][0][2] * rf[3][1][3][1]
        + rf[0][3][0][3] * rf[1][2][1][2]
        + rf[0][1][2][3] * rf[0][1][2][3]
        + rf[0][2][3][1] * rf[0][2][3][1]
        + rf[0][3][1][2] * rf[0][3][1][2]
        - 2.0 * rf[0][1][0][2] * rf[3][1][3][2]
        - 2.0 * rf[0][1][0][3] * rf[2][1][2][3]
        - 2.0 * rf[0][2][0][3] * rf[1][2][1][3]
        - 2.0 * rf[1][0][1][2] * rf[3][0][3][2]
        - 2.0 * rf[1][0][1][3] * rf[2][0][2][3]
        - 2.0 * rf[2][0][2][1] * rf[3][0][3][1]
}

/// Six-term simplified Pfaffian, valid in a curvature-minimizing frame.
pub fn pfaffian_simplified(rf: &Tensor4) -> f64 {
    rf[0][1][0][1] * rf[2][3][2][3]
        + rf[0][2][0][2] * rf[3][1][3][1]
        + rf[0][3][0][3] * rf[1][2][1][2]
        + rf[0][1][2][3] * rf[0][1][2][3]
        + rf[0][2][3][1] * rf[0][2][3][1]
        + rf[0][3][1][2] * rf[0][3][1][2]
}

/// Covariant derivative of a symmetric 2-tensor:
/// `(∇q)_{ij;k} = ∂k q_ij − Γ^l_{ki} q_lj − Γ^l_{kj} q_il`.
pub fn cov_deriv_q(metric: &MetricField, q: &SymTensorField, point: &[f64]) -> Result<Tensor3> {
    let cp = curvature_at(metric, point)?;
    let n = cp.dim;
    let (qv, dq, _) = q_jets(q, point, n)?;
    let mut nq = [[[0.0; 4]; 4]; 4];
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                let mut s = dq[k][i][j];
                for l in 0..n {
                    s -= cp.gamma[l][k][i] * qv[l][j] + cp.gamma[l][k][j] * qv[i][l];
                }
                nq[i][j][k] = s;
                nq[j][i][k] = s;
            }
        }
    }
    Ok(nq)
}

/// Second covariant derivative `(∇²q)_{ij;k;m} = (∇_m ∇q)_{ij;k}`, the inner
/// slot `k` first and the outer derivative `m` last.
pub fn cov_deriv2_q(metric: &MetricField, q: &SymTensorField, point: &[f64]) -> Result<Tensor4> {
    let cp = curvature_at(metric, point)?;
    cov_deriv2_q_at(&cp, q, point)
}

pub(crate) fn cov_deriv2_q_at(
    cp: &CurvaturePoint,
    q: &SymTensorField,
    point: &[f64],
) -> Result<Tensor4> {
    let n = cp.dim;
    let (qv, dq, d2q) = q_jets(q, point, n)?;
    // T_{ijk} = (∇q)_{ij;k} and its plain partials ∂m T_{ijk}.
    let mut t = [[[0.0; 4]; 4]; 4];
    let mut dt = [[[[0.0; 4]; 4]; 4]; 4]; // dt[m][i][j][k]
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                let mut s = dq[k][i][j];
                for l in 0..n {
                    s -= cp.gamma[l][k][i] * qv[l][j] + cp.gamma[l][k][j] * qv[i][l];
                }
                t[i][j][k] = s;
                t[j][i][k] = s;
                for m in 0..n {
                    let mut ds = d2q[m][k][i][j];
                    for l in 0..n {
                        ds -= cp.dgamma[m][l][k][i] * qv[l][j]
                            + cp.gamma[l][k][i] * dq[m][l][j]
                            + cp.dgamma[m][l][k][j] * qv[i][l]
                            + cp.gamma[l][k][j] * dq[m][i][l];
                    }
                    dt[m][i][j][k] = ds;
                    dt[m][j][i][k] = ds;
                }
            }
        }
    }
    let mut n2q = [[[[0.0; 4]; 4]; 4]; 4]; // n2q[i][j][k][m]
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                for m in 0..n {
                    let mut s = dt[m][i][j][k];
                    for l in 0..n {
                        s -= cp.gamma[l][m][i] * t[l][j][k]
                            + cp.gamma[l][m][j] * t[i][l][k]
                            + cp.gamma[l][m][k] * t[i][j][l];
                    }
                    n2q[i][j][k][m] = s;
                    n2q[j][i][k][m] = s;
                }
            }
        }
    }
    Ok(n2q)
}

fn q_jets(
    q: &SymTensorField,
    point: &[f64],
    n: usize,
) -> Result<(Mat4, [Mat4; 4], [[Mat4; 4]; 4])> {
    let mut qv = [[0.0; 4]; 4];
    let mut dq = [[[0.0; 4]; 4]; 4];
    let mut d2q = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..n {
        for j in i..n {
            let jet = q.entry(i, j).eval_jet(point)?;
            qv[i][j] = jet.value;
            qv[j][i] = jet.value;
            for k in 0..n {
                dq[k][i][j] = jet.grad[k];
                dq[k][j][i] = jet.grad[k];
                for l in 0..n {
                    d2q[k][l][i][j] = jet.hess[k][l];
                    d2q[k][l][j][i] = jet.hess[k][l];
                }
            }
        }
    }
    Ok((qv, dq, d2q))
}

/// Residual of the Ricci commutation identity for `∇²q`:
/// swapping the two derivative slots equals the curvature action on `q`.
pub fn ricci_identity_residual(
    metric: &MetricField,
    q: &SymTensorField,
    point: &[f64],
) -> Result<f64> {
    let cp = curvature_at(metric, point)?;
    let n = cp.dim;
    let n2q = cov_deriv2_q_at(&cp, q, point)?;
    let rop = curvature_operator(&cp);
    let qv = q.eval(point)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for m in 0..n {
                    let lhs = n2q[i][j][k][m] - n2q[i][j][m][k];
                    let mut rhs = 0.0;
                    for l in 0..n {
                        rhs += rop[l][m][k][i] * qv[l][j] + rop[l][m][k][j] * qv[i][l];
                    }
                    worst = worst.max((lhs - rhs).abs());
                    scale = scale.max(lhs.abs());
                }
            }
        }
    }
    Ok(worst / scale)
}

/// Divergence of a vector field: `div X = ∂i X^i + Γ^i_{ij} X^j`.
pub fn divergence(metric: &MetricField, field: &[Expr; 4], point: &[f64]) -> Result<f64> {
    let cp = curvature_at(metric, point)?;
    let n = cp.dim;
    let mut s = 0.0;
    for (i, comp) in field.iter().enumerate().take(n) {
        let jet = comp.eval_jet(point)?;
        s += jet.grad[i];
        for j in 0..n {
            s += cp.gamma[j][j][i] * jet.value;
        }
    }
    Ok(s)
}

/// `∇R` by central differences of the curvature components plus Christoffel
/// corrections: `nr[u][a][b][c][d] = (∇_u R)(∂a,∂b,∂c,∂d)`.
pub fn nabla_riemann_fd(metric: &MetricField, point: &[f64], h: f64) -> Result<[Tensor4; 4]> {
    let cp = curvature_at(metric, point)?;
    let n = cp.dim;
    let mut out = [[[[[0.0; 4]; 4]; 4]; 4]; 4];
    for u in 0..n {
        let mut plus = point.to_vec();
        plus[u] += h;
        let mut minus = point.to_vec();
        minus[u] -= h;
        let rp = curvature_at(metric, &plus)?;
        let rm = curvature_at(metric, &minus)?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut s = (rp.riem[a][b][c][d] - rm.riem[a][b][c][d]) / (2.0 * h);
                        for e in 0..n {
                            s -= cp.gamma[e][u][a] * cp.riem[e][b][c][d]
                                + cp.gamma[e][u][b] * cp.riem[a][e][c][d]
                                + cp.gamma[e][u][c] * cp.riem[a][b][e][d]
                                + cp.gamma[e][u][d] * cp.riem[a][b][c][e];
                        }
                        out[u][a][b][c][d] = s;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Relative residual of the second Bianchi identity with `∇R` from
/// [`nabla_riemann_fd`]: the cyclic sum over the last three slots vanishes.
pub fn second_bianchi_residual(metric: &MetricField, point: &[f64], h: f64) -> Result<f64> {
    let nr = nabla_riemann_fd(metric, point, h)?;
    let n = curvature_at(metric, point)?.dim;
    let mut scale: f64 = 1.0;
    for u in 0..n {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        scale = scale.max(nr[u][a][b][c][d].abs());
                    }
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    for u in 0..n {
                        let cyc = nr[u][a][b][c][d] + nr[c][a][b][d][u] + nr[d][a][b][u][c];
                        worst = worst.max(cyc.abs());
                    }
                }
            }
        }
    }
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::metrics::{builtin, BuiltinParams};

    fn zoo(name: &str) -> (MetricField, crate::metrics::ChartDomain) {
        builtin(name, &BuiltinParams::default()).unwrap()
    }

    #[test]
    fn flat_christoffels_vanish() {
        let (m, _) = zoo("euclidean4");
        let (gamma, dgamma) = christoffel(&m, &[0.2, 0.4, -0.1, 0.8]).unwrap();
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(gamma[k][i][j], 0.0);
                    for l in 0..4 {
                        assert_eq!(dgamma[l][k][i][j], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_christoffels_match_hand_computation() {
        let (m, _) = zoo("s2");
        let th = 1.1;
        let (gamma, _) = christoffel(&m, &[th, 0.4]).unwrap();
        // Γ^θ_φφ = −sinθ cosθ, Γ^φ_θφ = cotθ.
        assert!((gamma[0][1][1] + th.sin() * th.cos()).abs() < 1e-13);
        assert!((gamma[1][0][1] - th.cos() / th.sin()).abs() < 1e-13);
        assert!(gamma[0][0][0].abs() < 1e-15);
    }

    #[test]
    fn half_plane_christoffels_match_hand_computation() {
        let (m, _) = zoo("h2");
        let y = 2.0;
        let (gamma, _) = christoffel(&m, &[0.3, y]).unwrap();
        // Γ^x_xy = −1/y, Γ^y_xx = 1/y, Γ^y_yy = −1/y.
        assert!((gamma[0][0][1] + 1.0 / y).abs() < 1e-14);
        assert!((gamma[1][0][0] - 1.0 / y).abs() < 1e-14);
        assert!((gamma[1][1][1] + 1.0 / y).abs() < 1e-14);
        assert!(gamma[1][0][1].abs() < 1e-15);
    }

    #[test]
    fn sign_anchor_sphere_is_positive() {
        let (m, _) = zoo("s2");
        let cp = curvature_at(&m, &[1.0, 0.2]).unwrap();
        let k = sectional(&cp, &[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((k - 1.0).abs() < 1e-12, "sphere K = {k}");
        assert!((cp.scalar - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sign_anchor_hyperbolic_is_negative() {
        let (m, _) = zoo("h2");
        let cp = curvature_at(&m, &[0.1, 1.8]).unwrap();
        let k = sectional(&cp, &[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((k + 1.0).abs() < 1e-12, "hyperbolic K = {k}");
        assert!((cp.scalar + 2.0).abs() < 1e-12);
    }

    #[test]
    fn euclidean4_curvature_vanishes() {
        let (m, _) = zoo("euclidean4");
        let cp = curvature_at(&m, &[0.0; 4]).unwrap();
        assert_eq!(cp.riem_max_abs(), 0.0);
        assert_eq!(cp.scalar, 0.0);
        assert_eq!(pfaffian_norm(&cp).unwrap(), 0.0);
    }

    #[test]
    fn h2xh2_factor_frame_components() {
        let (m, _) = zoo("h2xh2");
        let p = [0.0, 2.0, 0.0, 2.0];
        let cp = curvature_at(&m, &p).unwrap();
        // Factor-aligned orthonormal frame: y·∂ᵢ at y = 2.
        let e = |i: usize| {
            let mut v = [0.0; 4];
            v[i] = 2.0;
            v
        };
        let r1212 = cp.riemann(&e(0), &e(1), &e(0), &e(1));
        let r3434 = cp.riemann(&e(2), &e(3), &e(2), &e(3));
        assert!((r1212 + 1.0).abs() < 1e-12);
        assert!((r3434 + 1.0).abs() < 1e-12);
        // Mixed-factor components vanish.
        let r1313 = cp.riemann(&e(0), &e(2), &e(0), &e(2));
        let r1234 = cp.riemann(&e(0), &e(1), &e(2), &e(3));
        assert!(r1313.abs() < 1e-13);
        assert!(r1234.abs() < 1e-13);
        assert!((cp.scalar + 4.0).abs() < 1e-12);
        assert!((pfaffian_norm(&cp).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn s2xs2_sectional_curvatures() {
        let (m, _) = zoo("s2xs2");
        let cp = curvature_at(&m, &[1.0, 0.3, 1.3, 0.7]).unwrap();
        let k_first = sectional(
            &cp,
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
        )
        .unwrap();
        let k_mixed = sectional(
            &cp,
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
        )
        .unwrap();
        assert!((k_first - 1.0).abs() < 1e-11);
        assert!(k_mixed.abs() < 1e-12);
        assert!((pfaffian_norm(&cp).unwrap() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn s4_pfaffian_is_three() {
        let (m, _) = zoo("s4");
        let cp = curvature_at(&m, &[1.2, 1.0, 0.8, 0.3]).unwrap();
        let (riem2, ric2) = riemann_norms(&cp);
        assert!((riem2 - 24.0).abs() < 1e-9, "|R|² = {riem2}");
        assert!((ric2 - 36.0).abs() < 1e-9, "|Ric|² = {ric2}");
        assert!((cp.scalar - 12.0).abs() < 1e-10);
        assert!((pfaffian_norm(&cp).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn h2xr2_is_ricci_degenerate_with_zero_pfaffian() {
        let (m, _) = zoo("h2xr2");
        let cp = curvature_at(&m, &[0.4, 1.5, 0.2, -0.3]).unwrap();
        assert!(pfaffian_norm(&cp).unwrap().abs() < 1e-12);
        // Ricci block: (-1, -1) on the hyperbolic factor, 0 on the flat one.
        assert!((cp.ricci[0][0] * cp.g_inv[0][0] + 1.0).abs() < 1e-12);
        assert!(cp.ricci[2][2].abs() < 1e-13);
        assert!(cp.ricci[3][3].abs() < 1e-13);
    }

    #[test]
    fn degenerate_plane_is_rejected() {
        let (m, _) = zoo("euclidean4");
        let cp = curvature_at(&m, &[0.0; 4]).unwrap();
        let v = [1.0, 0.0, 0.0, 0.0];
        let w = [2.0, 0.0, 0.0, 0.0];
        assert!(matches!(
            sectional(&cp, &v, &w),
            Err(Error::DegeneratePlane { .. })
        ));
    }

    #[test]
    fn cov_deriv_of_metric_vanishes() {
        for name in ["s2", "h2", "s2xs2", "model_gf"] {
            let (m, chart) = zoo(name);
            let q = SymTensorField::from_metric(&m);
            for p in chart.sample_points(5, 0.15) {
                let nq = cov_deriv_q(&m, &q, &p[..m.dim]).unwrap();
                let n2q = cov_deriv2_q(&m, &q, &p[..m.dim]).unwrap();
                for i in 0..m.dim {
                    for j in 0..m.dim {
                        for k in 0..m.dim {
                            assert!(nq[i][j][k].abs() < 1e-11, "{name} ∇g ≠ 0");
                            for l in 0..m.dim {
                                assert!(n2q[i][j][k][l].abs() < 1e-9, "{name} ∇²g ≠ 0");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cov_deriv2_flat_linear_q_vanishes() {
        let (m, _) = zoo("euclidean4");
        let q = SymTensorField::from_upper(4, |i, j| {
            if i == j {
                parse("1 + x1").unwrap()
            } else {
                Expr::num(0.25)
            }
        });
        let n2q = cov_deriv2_q(&m, &q, &[0.3, 0.1, -0.2, 0.5]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        assert_eq!(n2q[i][j][k][l], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn ricci_identity_on_sphere_q() {
        let (m, _) = zoo("s2");
        let q = SymTensorField::from_upper(2, |i, j| match (i, j) {
            (0, 0) => parse("1 + x1^2").unwrap(),
            (0, 1) => parse("x1*x2/4").unwrap(),
            (1, 1) => parse("2 + sin(x1)*x2").unwrap(),
            _ => unreachable!(),
        });
        let res = ricci_identity_residual(&m, &q, &[1.2, 0.8]).unwrap();
        assert!(res < 1e-8, "Ricci identity residual {res}");
    }

    #[test]
    fn divergence_examples() {
        let (e4, _) = zoo("euclidean4");
        let radial = [
            parse("x1").unwrap(),
            parse("x2").unwrap(),
            parse("x3").unwrap(),
            parse("x4").unwrap(),
        ];
        let d = divergence(&e4, &radial, &[0.4, 0.1, -0.7, 0.2]).unwrap();
        assert!((d - 4.0).abs() < 1e-14);
        let constant = [
            Expr::num(3.0),
            Expr::num(-1.0),
            Expr::num(0.5),
            Expr::num(2.0),
        ];
        let d = divergence(&e4, &constant, &[0.0; 4]).unwrap();
        assert_eq!(d, 0.0);

        // h2, field y ∂_y, against the density-formula oracle
        // (1/√det g) ∂i(√det g X^i) with central differences.
        let (h2m, _) = zoo("h2");
        let field = [Expr::Num(0.0), parse("x2").unwrap(), Expr::Num(0.0), Expr::Num(0.0)];
        let p = [0.2, 1.7];
        let d = divergence(&h2m, &field, &p).unwrap();
        let h = 1e-5;
        let dens = |x: f64, y: f64, i: usize| -> f64 {
            let cp = curvature_at(&h2m, &[x, y]).unwrap();
            let comps = [0.0, y];
            cp.sqrt_det_g * comps[i]
        };
        let mut oracle = (dens(p[0] + h, p[1], 0) - dens(p[0] - h, p[1], 0)) / (2.0 * h);
        oracle += (dens(p[0], p[1] + h, 1) - dens(p[0], p[1] - h, 1)) / (2.0 * h);
        let cp = curvature_at(&h2m, &p).unwrap();
        oracle /= cp.sqrt_det_g;
        assert!((d - oracle).abs() < 1e-8, "divergence {d} vs oracle {oracle}");
        assert!((d + 1.0).abs() < 1e-10);
    }

    #[test]
    fn second_bianchi_fd_residual_small() {
        for (name, p) in [
            ("s2", vec![1.1, 0.4]),
            ("h2", vec![0.2, 1.9]),
            ("s2xs2", vec![1.2, 0.5, 0.9, 0.3]),
            ("model_gf", vec![0.2, -0.1, 0.3, 0.4]),
        ] {
            let (m, _) = zoo(name);
            let res = second_bianchi_residual(&m, &p, 1e-4).unwrap();
            assert!(res < 1e-5, "{name}: second Bianchi residual {res}");
        }
    }

    #[test]
    fn warped_product_curvature_formula() {
        // R(X₁,Y₂,X₁,Y₂) = −(Hess f(X₁,X₁)/f)·⟨Y₂,Y₂⟩ on g₁ + f²g₂.
        let f = parse("1 + x1^2 + x2^2 + x3^2").unwrap();
        let (m, _) = builtin("model_gf", &BuiltinParams::with_f(f.clone())).unwrap();
        let p = [0.3, -0.2, 0.5, 0.1];
        let cp = curvature_at(&m, &p).unwrap();
        let fj = f.eval_jet(&p).unwrap();
        let x1 = [0.6, -0.2, 0.7, 0.0];
        let y2 = [0.0, 0.0, 0.0, 1.3];
        let lhs = cp.riemann(&x1, &y2, &x1, &y2);
        // Hessian of f with respect to g, contracted with X₁.
        let mut hess = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let mut hij = fj.hess[i][j];
                for k in 0..4 {
                    hij -= cp.gamma[k][i][j] * fj.grad[k];
                }
                hess += x1[i] * hij * x1[j];
            }
        }
        let rhs = -(hess / fj.value) * cp.inner(&y2, &y2);
        assert!(
            (lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()),
            "warped law: {lhs} vs {rhs}"
        );
    }

    #[test]
    fn model_gf_minimal_sectional_at_origin() {
        let (m, _) = zoo("model_gf");
        let cp = curvature_at(&m, &[0.0; 4]).unwrap();
        // V = ∂₄ at the origin (f = 1); K(eᵢ, V) = −2.
        let k = sectional(&cp, &[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((k + 2.0).abs() < 1e-12);
        // Leaf planes are flat.
        let k_leaf = sectional(&cp, &[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(k_leaf.abs() < 1e-13);
    }
}
