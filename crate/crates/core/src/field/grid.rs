//! Fields interpolated from tensor-grid samples.
//!
//! Samples live on a rectilinear grid over the bounding box; nodes outside the
//! polytope may be absent. Evaluation is a tensor-product clamped cubic spline
//! built axis by axis over the contiguous run of present nodes around the
//! query, so a full grid gives the ordinary tensor spline.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{FieldJet, MetricField, Provenance};
use crate::math;
use crate::{Error, Result};

/// Clamped cubic spline; end slopes come from the cubic through the four
/// outermost nodes, so cubics are reproduced exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline1d {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl Spline1d {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::InvalidArgument("spline needs at least two nodes".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("spline nodes must increase".into()));
        }
        let k = n.min(4);
        let s0 = lagrange_slope(&xs[..k], &ys[..k], xs[0]);
        let sn = lagrange_slope(&xs[n - k..], &ys[n - k..], xs[n - 1]);
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        // Tridiagonal system for the second derivatives.
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 2.0 * h[0];
        sup[0] = h[0];
        rhs[0] = 6.0 * ((ys[1] - ys[0]) / h[0] - s0);
        for i in 1..n - 1 {
            sub[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
        }
        sub[n - 1] = h[n - 2];
        diag[n - 1] = 2.0 * h[n - 2];
        rhs[n - 1] = 6.0 * (sn - (ys[n - 1] - ys[n - 2]) / h[n - 2]);
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
        }
        Ok(Self { xs, ys, m })
    }

    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let n = self.xs.len();
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        let (y0, y1, m0, m1) = (self.ys[i], self.ys[i + 1], self.m[i], self.m[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2 = a * m0 + b * m1;
        (v, d1, d2)
    }
}

fn lagrange_slope(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.len();
    let mut s = 0.0;
    for j in 0..k {
        let denom: f64 = (0..k).filter(|&p| p != j).map(|p| xs[j] - xs[p]).product();
        let mut num = 0.0;
        for m in (0..k).filter(|&m| m != j) {
            num += (0..k)
                .filter(|&p| p != j && p != m)
                .map(|p| x - xs[p])
                .product::<f64>();
        }
        s += ys[j] * num / denom;
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    n: usize,
    axes: Vec<Vec<f64>>,
    /// Upper-triangle entries of `H` per node, `None` where masked.
    values: Vec<Option<Vec<f64>>>,
}

fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

fn tri_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl GridField {
    /// Builds the field from `(z, upper-triangle of H)` samples.
    ///
    /// Sample coordinates define the grid axes; nodes without a sample are
    /// treated as outside the domain.
    pub fn from_samples(n: usize, samples: &[(Vec<f64>, Vec<f64>)]) -> Result<Self> {
        let m = tri_len(n);
        if samples.is_empty() {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        if let Some((z, _)) = samples.iter().find(|(z, h)| z.len() != n || h.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z.len(),
            });
        }
        let axes: Vec<Vec<f64>> = (0..n)
            .map(|a| {
                let mut xs: Vec<f64> = samples.iter().map(|(z, _)| z[a]).collect();
                xs.sort_by(f64::total_cmp);
                let mut out: Vec<f64> = Vec::new();
                for x in xs {
                    if out.last().is_none_or(|&l| !close(l, x)) {
                        out.push(x);
                    }
                }
                out
            })
            .collect();
        if axes.iter().any(|a| a.len() < 2) {
            return Err(Error::InvalidArgument("each axis needs at least two nodes".into()));
        }
        let total: usize = axes.iter().map(Vec::len).product();
        let mut values = vec![None; total];
        for (z, h) in samples {
            let mut flat = 0;
            for a in 0..n {
                let idx = nearest(&axes[a], z[a]);
                flat = flat * axes[a].len() + idx;
            }
            if values[flat].is_some() {
                return Err(Error::InvalidArgument("duplicate grid node".into()));
            }
            values[flat] = Some(h.clone());
        }
        Ok(Self { n, axes, values })
    }

    /// Samples `f` on the tensor grid `axes`, masking nodes where it fails.
    pub fn sample<F: MetricField + ?Sized>(f: &F, axes: &[Vec<f64>]) -> Result<Self> {
        let n = f.dim();
        let samples: Vec<(Vec<f64>, Vec<f64>)> = crate::polytope::tensor_points(axes)
            .into_iter()
            .filter_map(|z| {
                let h = f.h(&z).ok()?;
                let tri = (0..n).flat_map(|i| (i..n).map(move |j| (i, j)));
                let v = tri.map(|(i, j)| h[(i, j)]).collect();
                Some((z, v))
            })
            .collect();
        Self::from_samples(n, &samples)
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn node_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Per entry `[v, g_0..g_{d-1}, h_00..h_{d-1,d-1}]` for free axes `0..d`.
    fn eval_rec(&self, d: usize, fixed: &mut Vec<usize>, q: &[f64]) -> Option<Vec<f64>> {
        let m = tri_len(self.n);
        if d == 0 {
            let mut flat = 0;
            for (a, &i) in fixed.iter().rev().enumerate() {
                flat = flat * self.axes[a].len() + i;
            }
            return self.values[flat].clone();
        }
        let a = d - 1;
        let axis = &self.axes[a];
        let x = q[a];
        let tol = 1e-12 * (1.0 + math::abs(x));
        if x < axis[0] - tol || x > axis[axis.len() - 1] + tol {
            return None;
        }
        let cell = axis.partition_point(|&v| v <= x).clamp(1, axis.len() - 1) - 1;
        let mut sub = |i: usize| {
            fixed.push(i);
            let r = self.eval_rec(d - 1, fixed, q);
            fixed.pop();
            r
        };
        let (lo_jet, hi_jet) = (sub(cell)?, sub(cell + 1)?);
        let mut left = vec![lo_jet];
        let mut lo = cell;
        while lo > 0 {
            match sub(lo - 1) {
                Some(j) => {
                    left.push(j);
                    lo -= 1;
                }
                None => break,
            }
        }
        left.reverse();
        let mut run = left;
        run.push(hi_jet);
        let mut hi = cell + 1;
        while hi + 1 < axis.len() {
            match sub(hi + 1) {
                Some(j) => {
                    run.push(j);
                    hi += 1;
                }
                None => break,
            }
        }
        let xs = axis[lo..=hi].to_vec();
        let ds = d - 1;
        let cs = 1 + ds + ds * ds;
        let c = 1 + d + d * d;
        let mut out = vec![0.0; m * c];
        let fit = |comp: usize| -> (f64, f64, f64) {
            let ys = run.iter().map(|j| j[comp]).collect();
            Spline1d::new(xs.clone(), ys).map(|s| s.eval(x)).unwrap_or((f64::NAN, f64::NAN, f64::NAN))
        };
        for e in 0..m {
            let base = e * cs;
            let o = e * c;
            let (v, dv, ddv) = fit(base);
            out[o] = v;
            out[o + 1 + ds] = dv;
            out[o + 1 + d + ds * d + ds] = ddv;
            for b in 0..ds {
                let (g, dg, _) = fit(base + 1 + b);
                out[o + 1 + b] = g;
                out[o + 1 + d + b * d + ds] = dg;
                out[o + 1 + d + ds * d + b] = dg;
                for cc in 0..ds {
                    let (hv, _, _) = fit(base + 1 + ds + b * ds + cc);
                    out[o + 1 + d + b * d + cc] = hv;
                }
            }
        }
        Some(out)
    }
}

fn close(a: f64, b: f64) -> bool {
    math::abs(a - b) <= 1e-9 * (1.0 + math::abs(a).max(math::abs(b)))
}

fn nearest(axis: &[f64], x: f64) -> usize {
    let p = axis.partition_point(|&v| v < x);
    match p {
        0 => 0,
        p if p >= axis.len() => axis.len() - 1,
        p => {
            if math::abs(axis[p] - x) < math::abs(axis[p - 1] - x) {
                p
            } else {
                p - 1
            }
        }
    }
}

impl MetricField for GridField {
    fn dim(&self) -> usize {
        self.n
    }

    fn jet(&self, z: &[f64]) -> Result<FieldJet> {
        let n = self.n;
        if z.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z.len(),
            });
        }
        let flat = self
            .eval_rec(n, &mut Vec::with_capacity(n), z)
            .ok_or_else(|| Error::OutsideSampleHull(z.to_vec()))?;
        let c = 1 + n + n * n;
        let mut jet = FieldJet::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let o = tri_index(n, i, j) * c;
                jet.h[(i, j)] = flat[o];
                for k in 0..n {
                    jet.dh[k][(i, j)] = flat[o + 1 + k];
                    for l in 0..n {
                        jet.d2h[k * n + l][(i, j)] = flat[o + 1 + n + k * n + l];
                    }
                }
            }
        }
        if !jet.h.iter().all(|v| v.is_finite()) {
            return Err(Error::OutsideSampleHull(z.to_vec()));
        }
        jet.symmetrize();
        Ok(jet)
    }

    fn provenance(&self) -> Provenance {
        Provenance::Grid
    }
}

impl GridField {
    pub fn h_matrix(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.jet(z)?.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_cubics() {
        let xs: Vec<f64> = (0..9).map(|i| -1.0 + 0.25 * i as f64 + 0.01 * (i % 3) as f64).collect();
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - x * x * x;
        let s = Spline1d::new(xs.clone(), xs.iter().map(|&x| f(x)).collect()).unwrap();
        for x in [-0.93, -0.1, 0.37, 0.99] {
            let (v, d1, d2) = s.eval(x);
            assert!((v - f(x)).abs() < 1e-12);
            assert!((d1 - (-2.0 + x - 3.0 * x * x)).abs() < 1e-11);
            assert!((d2 - (1.0 - 6.0 * x)).abs() < 1e-10);
        }
    }

    #[test]
    fn parabola_on_101_nodes() {
        let samples: Vec<(Vec<f64>, Vec<f64>)> = (0..101)
            .map(|i| {
                let z = -1.0 + 0.02 * i as f64;
                (vec![z], vec![1.0 - z * z])
            })
            .collect();
        let g = GridField::from_samples(1, &samples).unwrap();
        let jet = g.jet(&[0.3]).unwrap();
        assert!((jet.h[(0, 0)] - 0.91).abs() < 1e-6);
        assert!((jet.dh[0][(0, 0)] + 0.6).abs() < 1e-6);
        assert!((jet.d2h[0][(0, 0)] + 2.0).abs() < 1e-6);
        assert!(matches!(g.jet(&[1.2]), Err(Error::OutsideSampleHull(_))));
    }

    #[test]
    fn masked_two_dimensional_grid() {
        // Triangle z1 >= -1, z2 >= -1, z1 + z2 <= 1 sampled on a square grid.
        let f = |z: &[f64]| [1.0 + z[0] * z[1], 0.3 * z[0], 2.0 - z[1] * z[1]];
        let mut samples = Vec::new();
        for i in 0..31 {
            for j in 0..31 {
                let z = vec![-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64];
                if z[0] + z[1] <= 1.0 + 1e-12 {
                    samples.push((z.clone(), f(&z).to_vec()));
                }
            }
        }
        let g = GridField::from_samples(2, &samples).unwrap();
        let z = [0.13, -0.42];
        let jet = g.jet(&z).unwrap();
        assert!((jet.h[(0, 0)] - (1.0 + z[0] * z[1])).abs() < 1e-12);
        assert!((jet.h2(0, 0, 0, 1) - 1.0).abs() < 1e-10);
        assert!((jet.h2(1, 1, 1, 1) + 2.0).abs() < 1e-10);
        assert!((jet.h1(0, 1, 0) - 0.3).abs() < 1e-12);
        assert!(g.jet(&[1.5, 1.5]).is_err());
    }
}
