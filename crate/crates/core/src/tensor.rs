//! Rank-3 connection coefficients and rank-4 curvature tensors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Connection coefficients Γ^k_{ij}, symmetric in (i, j).
#[derive(Debug, Clone)]
pub struct ChristoffelSymbols {
    pub dim: usize,
    data: Vec<f64>,
}

impl ChristoffelSymbols {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim] }
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, value: f64) {
        self.data[(k * self.dim + i) * self.dim + j] = value;
    }

    /// Γ^k_{ij} u^i v^j as a vector over k.
    pub fn contract(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        let mut out = DVector::zeros(d);
        for k in 0..d {
            let mut s = 0.0;
            for i in 0..d {
                let ui = u[i];
                if ui == 0.0 {
                    continue;
                }
                for j in 0..d {
                    s += self.get(k, i, j) * ui * v[j];
                }
            }
            out[k] = s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Max |Γ^k_{ij} − Γ^k_{ji}|.
    pub fn symmetry_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev: f64 = 0.0;
        for k in 0..d {
            for i in 0..d {
                for j in (i + 1)..d {
                    dev = dev.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        dev
    }
}

/// Fully lowered Riemann curvature tensor R_{ijkl} with the pairing
/// R(X,Y,Z,W) = R_{ijkl} X^i Y^j Z^k W^l = g(R(X,Y)Z, W).
///
/// The sign convention is fixed so that the round unit sphere has sectional
/// curvature +1, i.e. a constant-curvature-c space satisfies
/// R_{ijkl} = c (g_{jk} g_{il} − g_{ik} g_{jl}).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureTensor {
    pub dim: usize,
    data: Vec<f64>,
}

/// Residuals of the four algebraic curvature symmetries, each a max-abs value.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SymmetryResiduals {
    pub antisym_first_pair: f64,
    pub antisym_second_pair: f64,
    pub pair_interchange: f64,
    pub first_bianchi: f64,
}

impl SymmetryResiduals {
    pub fn max(&self) -> f64 {
        self.antisym_first_pair
            .max(self.antisym_second_pair)
            .max(self.pair_interchange)
            .max(self.first_bianchi)
    }
}

impl CurvatureTensor {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim * dim] }
    }

    /// R = c (g ∧ g pattern): the constant-curvature tensor for metric `g`.
    pub fn constant_curvature(c: f64, g: &DMatrix<f64>) -> Self {
        let d = g.nrows();
        let mut t = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        t.set(i, j, k, l, c * (g[(j, k)] * g[(i, l)] - g[(i, k)] * g[(j, l)]));
                    }
                }
            }
        }
        t
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.dim + j) * self.dim + k) * self.dim + l]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, value: f64) {
        self.data[((i * self.dim + j) * self.dim + k) * self.dim + l] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm of the component array.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// R(u, v, w, z).
    pub fn contract4(
        &self,
        u: &DVector<f64>,
        v: &DVector<f64>,
        w: &DVector<f64>,
        z: &DVector<f64>,
    ) -> f64 {
        let d = self.dim;
        // contract one slot at a time to keep the cost at O(d^4 + d^3 + ...)
        let mut t3 = vec![0.0; d * d * d];
        for i in 0..d {
            let ui = u[i];
            if ui == 0.0 {
                continue;
            }
            for rest in 0..d * d * d {
                t3[rest] += ui * self.data[i * d * d * d + rest];
            }
        }
        let mut t2 = vec![0.0; d * d];
        for j in 0..d {
            let vj = v[j];
            if vj == 0.0 {
                continue;
            }
            for rest in 0..d * d {
                t2[rest] += vj * t3[j * d * d + rest];
            }
        }
        let mut t1 = vec![0.0; d];
        for k in 0..d {
            let wk = w[k];
            if wk == 0.0 {
                continue;
            }
            for rest in 0..d {
                t1[rest] += wk * t2[k * d + rest];
            }
        }
        (0..d).map(|l| t1[l] * z[l]).sum()
    }

    /// Express the tensor in the coordinates of `frame` (components
    /// R'_{abcd} = R(f_a, f_b, f_c, f_d)). When the frame is g-orthonormal the
    /// restricted metric is the identity.
    pub fn restrict(&self, frame: &[DVector<f64>]) -> CurvatureTensor {
        let d = self.dim;
        let r = frame.len();
        // four passes, each converting one slot from dimension d to dimension r
        let mut cur = self.data.clone();
        for pass in 0..4u32 {
            let tail: usize = d.pow(3 - pass);
            let lead: usize = r.pow(pass);
            let mut next = vec![0.0; lead * r * tail];
            for a in 0..lead {
                for (fi, f) in frame.iter().enumerate() {
                    for m in 0..d {
                        let c = f[m];
                        if c == 0.0 {
                            continue;
                        }
                        let src = (a * d + m) * tail;
                        let dst = (a * r + fi) * tail;
                        for t in 0..tail {
                            next[dst + t] += c * cur[src + t];
                        }
                    }
                }
            }
            cur = next;
        }
        CurvatureTensor { dim: r, data: cur }
    }

    /// Residuals of the algebraic symmetries of a curvature tensor.
    pub fn symmetry_residuals(&self) -> SymmetryResiduals {
        let d = self.dim;
        let mut a1: f64 = 0.0;
        let mut a2: f64 = 0.0;
        let mut pi: f64 = 0.0;
        let mut bi: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let r = self.get(i, j, k, l);
                        a1 = a1.max((r + self.get(j, i, k, l)).abs());
                        a2 = a2.max((r + self.get(i, j, l, k)).abs());
                        pi = pi.max((r - self.get(k, l, i, j)).abs());
                        bi = bi.max((r + self.get(j, k, i, l) + self.get(k, i, j, l)).abs());
                    }
                }
            }
        }
        SymmetryResiduals {
            antisym_first_pair: a1,
            antisym_second_pair: a2,
            pair_interchange: pi,
            first_bianchi: bi,
        }
    }

    /// Max-abs componentwise difference with another tensor of the same dim.
    pub fn max_difference(&self, other: &CurvatureTensor) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_curvature_satisfies_symmetries() {
        let g = DMatrix::from_row_slice(3, 3, &[1.2, 0.1, 0.0, 0.1, 0.9, 0.2, 0.0, 0.2, 1.1]);
        let t = CurvatureTensor::constant_curvature(0.7, &g);
        assert!(t.symmetry_residuals().max() < 1e-14);
    }

    #[test]
    fn restrict_matches_direct_contraction() {
        let g = DMatrix::<f64>::identity(4, 4);
        let t = CurvatureTensor::constant_curvature(-0.5, &g);
        let f1 = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let f2 = DVector::from_vec(vec![0.0, 0.6, 0.8, 0.0]);
        let frame = vec![f1.clone(), f2.clone()];
        let r = t.restrict(&frame);
        assert_eq!(r.dim, 2);
        let direct = t.contract4(&f1, &f2, &f2, &f1);
        assert!((r.get(0, 1, 1, 0) - direct).abs() < 1e-14);
    }
}
