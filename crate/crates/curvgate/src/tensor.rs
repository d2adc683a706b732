//! Dense rank-4 tensor algebra with curvature symmetries.
//!
//! A *curvature tensor* here means a rank-4 array antisymmetric in its
//! first and last index pairs and symmetric under pair exchange. The first
//! Bianchi identity is an optional extra: the vertical curvature tensors
//! that prescribe fiber curvatures need the symmetries but not Bianchi,
//! while Levi-Civita curvature satisfies all four.
//!
//! Sign convention throughout the crate:
//! `R(E1,E2,E3,E4) = <R(E1,E2)E3, E4>` with unnormalized sectional
//! curvature `k(E1,E2) = R(E1,E2,E2,E1)`, so the round sphere comes out
//! positive.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Whether a constructor must enforce the first Bianchi identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BianchiMode {
    Required,
    Optional,
}

/// Default tolerance for symmetry enforcement. Algebraic identities sit
/// near 1e-14 in double precision, stencil-built tensors near 1e-10..1e-6.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[inline]
fn idx(d: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * d + j) * d + k) * d + l
}

/// Rank-4 tensor with the symmetries of a curvature tensor.
#[derive(Debug, Clone)]
pub struct CurvatureTensor {
    dim: usize,
    entries: Vec<f64>,
    satisfies_bianchi: bool,
}

impl CurvatureTensor {
    /// Validates symmetries (and Bianchi when `Required`) against `tol`,
    /// then stores the exact symmetry projection of `entries`.
    pub fn new(dim: usize, entries: Vec<f64>, mode: BianchiMode, tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Structural("curvature tensor needs dim >= 1".into()));
        }
        if entries.len() != dim.pow(4) {
            return Err(Error::Structural(format!(
                "expected {} entries for dim {dim}, got {}",
                dim.pow(4),
                entries.len()
            )));
        }
        let (projected, residual) = project_curvature_symmetries(dim, &entries);
        if residual > tol {
            return Err(Error::Structural(format!(
                "curvature symmetries violated: residual {residual:.3e} > tol {tol:.3e}"
            )));
        }
        let tensor = CurvatureTensor {
            dim,
            entries: projected,
            satisfies_bianchi: false,
        };
        let bianchi_residual = tensor.bianchi_residual();
        if mode == BianchiMode::Required && bianchi_residual > tol {
            return Err(Error::Structural(format!(
                "first Bianchi identity violated: residual {bianchi_residual:.3e} > tol {tol:.3e}"
            )));
        }
        Ok(CurvatureTensor {
            satisfies_bianchi: bianchi_residual <= tol,
            ..tensor
        })
    }

    /// Symmetry-projects raw entries (e.g. stencil output) and reports the
    /// projection residual instead of failing on it.
    pub fn project(dim: usize, entries: &[f64]) -> (Self, f64) {
        let (projected, residual) = project_curvature_symmetries(dim, entries);
        let mut t = CurvatureTensor {
            dim,
            entries: projected,
            satisfies_bianchi: false,
        };
        t.satisfies_bianchi = t.bianchi_residual() <= SYMMETRY_TOL;
        (t, residual)
    }

    pub fn zeros(dim: usize) -> Self {
        CurvatureTensor {
            dim,
            entries: vec![0.0; dim.pow(4)],
            satisfies_bianchi: true,
        }
    }

    /// Curvature tensor of a point of constant sectional curvature `c`
    /// in an orthonormal frame: `R(i,j,k,l) = c (d_il d_jk - d_ik d_jl)`.
    ///
    /// Polarizes the quadratic data `R(W,U,U,W) = c |W ^ U|^2`; this is the
    /// unique Bianchi-compatible extension.
    pub fn constant_curvature(dim: usize, c: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Structural(format!(
                "constant-curvature tensor needs dim >= 2, got {dim}"
            )));
        }
        let mut entries = vec![0.0; dim.pow(4)];
        for i in 0..dim {
            for j in 0..dim {
                entries[idx(dim, i, j, j, i)] += c;
                entries[idx(dim, i, j, i, j)] -= c;
            }
        }
        Ok(CurvatureTensor {
            dim,
            entries,
            satisfies_bianchi: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn satisfies_bianchi(&self) -> bool {
        self.satisfies_bianchi
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.entries[idx(self.dim, i, j, k, l)]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Full multilinear contraction `R(a,b,c,e)`.
    pub fn value(&self, a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>, e: &DVector<f64>) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            let ai = a[i];
            if ai == 0.0 {
                continue;
            }
            for j in 0..d {
                let bj = b[j];
                if bj == 0.0 {
                    continue;
                }
                for k in 0..d {
                    let ck = c[k];
                    if ck == 0.0 {
                        continue;
                    }
                    let base = idx(d, i, j, k, 0);
                    for l in 0..d {
                        acc += ai * bj * ck * e[l] * self.entries[base + l];
                    }
                }
            }
        }
        acc
    }

    /// Unnormalized sectional curvature `k(w,u) = R(w,u,u,w)`.
    pub fn sectional(&self, w: &DVector<f64>, u: &DVector<f64>) -> f64 {
        self.value(w, u, u, w)
    }

    /// `R°(w1,w2,u,v)` evaluated directly, without building the full
    /// symmetrized tensor.
    pub fn symmetrized_value(
        &self,
        w1: &DVector<f64>,
        w2: &DVector<f64>,
        u: &DVector<f64>,
        v: &DVector<f64>,
    ) -> f64 {
        0.5 * (self.value(w1, u, v, w2) + self.value(w2, u, v, w1))
    }

    /// Symmetrization `R°(w1,w2,u,v) = (R(w1,u,v,w2) + R(w2,u,v,w1)) / 2`,
    /// the induced tensor on symmetric 2-forms viewed as an order-4 tensor.
    pub fn symmetrize(&self) -> SymmetrizedTensor {
        let d = self.dim;
        let mut entries = vec![0.0; d.pow(4)];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        entries[idx(d, i, j, k, l)] =
                            0.5 * (self.get(i, k, l, j) + self.get(j, k, l, i));
                    }
                }
            }
        }
        SymmetrizedTensor { dim: d, entries }
    }

    pub fn add(&self, other: &CurvatureTensor) -> Result<CurvatureTensor> {
        if self.dim != other.dim {
            return Err(Error::Structural(format!(
                "dimension mismatch in tensor sum: {} vs {}",
                self.dim, other.dim
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CurvatureTensor {
            dim: self.dim,
            entries,
            satisfies_bianchi: self.satisfies_bianchi && other.satisfies_bianchi,
        })
    }

    pub fn scale(&self, s: f64) -> CurvatureTensor {
        CurvatureTensor {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * s).collect(),
            satisfies_bianchi: self.satisfies_bianchi,
        }
    }

    /// Worst entrywise violation of the three pair symmetries.
    pub fn symmetry_residual(&self) -> f64 {
        symmetry_residual(self.dim, &self.entries)
    }

    /// Worst entrywise violation of the first Bianchi identity
    /// `R(i,j,k,l) + R(j,k,i,l) + R(k,i,j,l) = 0`.
    pub fn bianchi_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let s = self.get(i, j, k, l) + self.get(j, k, i, l) + self.get(k, i, j, l);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }
}

fn symmetry_residual(d: usize, e: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let v = e[idx(d, i, j, k, l)];
                    worst = worst.max((v + e[idx(d, j, i, k, l)]).abs());
                    worst = worst.max((v + e[idx(d, i, j, l, k)]).abs());
                    worst = worst.max((v - e[idx(d, k, l, i, j)]).abs());
                }
            }
        }
    }
    worst
}

/// Average over the 8-element symmetry orbit (two signed pair swaps plus
/// pair exchange); returns the projection and the max distance moved.
fn project_curvature_symmetries(d: usize, e: &[f64]) -> (Vec<f64>, f64) {
    let mut out = vec![0.0; e.len()];
    let mut residual: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let avg = (e[idx(d, i, j, k, l)] - e[idx(d, j, i, k, l)]
                        - e[idx(d, i, j, l, k)]
                        + e[idx(d, j, i, l, k)]
                        + e[idx(d, k, l, i, j)]
                        - e[idx(d, l, k, i, j)]
                        - e[idx(d, k, l, j, i)]
                        + e[idx(d, l, k, j, i)])
                        / 8.0;
                    out[idx(d, i, j, k, l)] = avg;
                    residual = residual.max((avg - e[idx(d, i, j, k, l)]).abs());
                }
            }
        }
    }
    (out, residual)
}

/// Order-4 symmetrization of a curvature tensor: symmetric in (1,2) and in
/// (3,4), symmetric under pair exchange, and vanishing on `(W,W,W,U)`.
#[derive(Debug, Clone)]
pub struct SymmetrizedTensor {
    dim: usize,
    entries: Vec<f64>,
}

impl SymmetrizedTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.entries[idx(self.dim, i, j, k, l)]
    }

    pub fn value(
        &self,
        w1: &DVector<f64>,
        w2: &DVector<f64>,
        u: &DVector<f64>,
        v: &DVector<f64>,
    ) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            if w1[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                for k in 0..d {
                    let base = idx(d, i, j, k, 0);
                    for l in 0..d {
                        acc += w1[i] * w2[j] * u[k] * v[l] * self.entries[base + l];
                    }
                }
            }
        }
        acc
    }
}

/// Classification of a symmetric quadratic form's spectrum with a
/// tolerance band around zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
}

impl std::fmt::Display for Definiteness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Definiteness::PositiveDefinite => write!(f, "positive-definite"),
            Definiteness::PositiveSemidefinite => write!(f, "positive-semidefinite"),
            Definiteness::Indefinite => write!(f, "indefinite"),
        }
    }
}

/// Small symmetric quadratic form (the 2x2 and 3x3 gates).
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    matrix: DMatrix<f64>,
}

impl QuadraticForm {
    /// Accepts a matrix symmetric up to `tol` and stores its symmetric part.
    pub fn new(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Structural("quadratic form must be square".into()));
        }
        let asym = (&matrix - matrix.transpose()).abs().max();
        if asym > tol {
            return Err(Error::Structural(format!(
                "quadratic form asymmetric: residual {asym:.3e} > tol {tol:.3e}"
            )));
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        Ok(QuadraticForm { matrix: sym })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Eigenvalue classification: all above `tol` is definite, all above
    /// `-tol` semidefinite, anything lower indefinite.
    pub fn definiteness(&self, tol: f64) -> Definiteness {
        let ev = self.eigenvalues();
        if ev.iter().all(|&l| l > tol) {
            Definiteness::PositiveDefinite
        } else if ev.iter().all(|&l| l >= -tol) {
            Definiteness::PositiveSemidefinite
        } else {
            Definiteness::Indefinite
        }
    }
}

/// Gram determinant `g(x,x) g(y,y) - g(x,y)^2`; zero exactly when x, y are
/// linearly dependent.
pub fn wedge_norm_sq(x: &DVector<f64>, y: &DVector<f64>, g: &DMatrix<f64>) -> f64 {
    let gx = g * x;
    let gy = g * y;
    x.dot(&gx) * y.dot(&gy) - x.dot(&gy).powi(2)
}

/// Gram determinant against the identity form.
pub fn wedge_norm_sq_euclidean(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    x.norm_squared() * y.norm_squared() - x.dot(y).powi(2)
}
