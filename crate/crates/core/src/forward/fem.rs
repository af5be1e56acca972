use super::medium::{Influx, MediumConfig};
use super::mesh::Mesh;
use crate::boundary::BoundaryTrace;
use crate::error::{DsmError, Result};
use crate::probing::BackgroundMedium;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Symmetric sparse matrix in compressed-row form.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.col_idx[k] == i)
                    .map_or(0.0, |k| self.values[k])
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rel_tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
pub fn pcg(a: &CsrMatrix, b: &[f64], opts: SolverOptions) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut x = vec![0.0; n];
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for _ in 0..opts.max_iter {
        a.mul(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= opts.rel_tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(DsmError::Solver {
        iterations: opts.max_iter,
        residual: dot(&r, &r).sqrt() / bnorm,
    })
}

/// Assembles `sum_e sigma_e K_e + v_e M_e` over the elements where `coeff`
/// returns a value.
pub fn assemble(mesh: &Mesh, coeff: impl Fn([f64; 2]) -> Option<(f64, f64)>) -> CsrMatrix {
    let mut trip = Vec::with_capacity(9 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let Some((sigma, v)) = coeff(mesh.centroid(t)) else {
            continue;
        };
        let p = tri.map(|i| mesh.vertices[i]);
        let area = mesh.area(t);
        let grads: [[f64; 2]; 3] = std::array::from_fn(|i| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            [(p[j][1] - p[k][1]) / (2.0 * area), (p[k][0] - p[j][0]) / (2.0 * area)]
        });
        for i in 0..3 {
            for j in 0..3 {
                let stiff = area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                let mass = area / 12.0 * if i == j { 2.0 } else { 1.0 };
                trip.push((tri[i], tri[j], sigma * stiff + v * mass));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.vertices.len(), trip)
}

const GAUSS: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// Load vector of `int sigma0 f v` over the boundary polygon.
pub fn boundary_load(mesh: &Mesh, sigma0: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut b = vec![0.0; mesh.vertices.len()];
    let nb = mesh.boundary_vertices.len();
    for e in 0..nb {
        let (ia, ib) = (mesh.boundary_vertices[e], mesh.boundary_vertices[(e + 1) % nb]);
        let (pa, pb) = (mesh.vertices[ia], mesh.vertices[ib]);
        let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
        for (t, w) in GAUSS {
            let x = pa[0] + t * (pb[0] - pa[0]);
            let y = pa[1] + t * (pb[1] - pa[1]);
            let g = sigma0 * len * w * f(y.atan2(x));
            b[ia] += (1.0 - t) * g;
            b[ib] += t * g;
        }
    }
    b
}

fn check_background(mesh: &Mesh, bg: &BackgroundMedium) -> Result<()> {
    if !(bg.v0 > 0.0) {
        return Err(DsmError::UnsupportedBackground(
            "the finite-element solver needs v0 > 0".into(),
        ));
    }
    if (mesh.radius - bg.radius).abs() > 1e-12 * bg.radius {
        return Err(DsmError::RadiusMismatch {
            left: mesh.radius,
            right: bg.radius,
        });
    }
    Ok(())
}

/// Solves for the real and imaginary parts of the influx separately.
fn solve_complex(a: &CsrMatrix, mesh: &Mesh, sigma0: f64, influx: &Influx) -> Result<Vec<Complex64>> {
    let opts = SolverOptions::default();
    let re = |th: f64| influx.value(th).re;
    let im = |th: f64| influx.value(th).im;
    let (ur, ui) = rayon::join(
        || pcg(a, &boundary_load(mesh, sigma0, re), opts),
        || {
            if influx.is_real() {
                Ok(vec![0.0; mesh.vertices.len()])
            } else {
                pcg(a, &boundary_load(mesh, sigma0, im), opts)
            }
        },
    );
    let (ur, ui) = (ur?, ui?);
    Ok(ur.into_iter().zip(ui).map(|(r, i)| Complex64::new(r, i)).collect())
}

/// Background solution `u0` at the mesh vertices.
pub fn fem_background(mesh: &Mesh, bg: &BackgroundMedium, influx: &Influx) -> Result<Vec<Complex64>> {
    check_background(mesh, bg)?;
    let a = assemble(mesh, |_| Some((bg.sigma0, bg.v0)));
    solve_complex(&a, mesh, bg.sigma0, influx)
}

/// Total field `u` at the mesh vertices.
pub fn fem_solve(mesh: &Mesh, medium: &MediumConfig, influx: &Influx) -> Result<Vec<Complex64>> {
    let u0 = fem_background(mesh, &medium.background, influx)?;
    let w = scattered_from_background(mesh, medium, &u0)?;
    Ok(u0.iter().zip(&w).map(|(a, b)| a + b).collect())
}

/// `u - u0` at the mesh vertices, solved directly from
/// `A w = -(A - A0) u0` so the difference carries no cancellation error.
pub fn scattered_field(mesh: &Mesh, medium: &MediumConfig, influx: &Influx) -> Result<Vec<Complex64>> {
    let u0 = fem_background(mesh, &medium.background, influx)?;
    scattered_from_background(mesh, medium, &u0)
}

fn scattered_from_background(mesh: &Mesh, medium: &MediumConfig, u0: &[Complex64]) -> Result<Vec<Complex64>> {
    let bg = medium.background;
    let a = assemble(mesh, |c| {
        let (s, v) = medium.coefficients(c);
        Some((s, v))
    });
    let d = assemble(mesh, |c| {
        let (s, v) = medium.coefficients(c);
        (s != bg.sigma0 || v != bg.v0).then_some((s - bg.sigma0, v - bg.v0))
    });
    if d.nnz() == 0 {
        return Ok(vec![Complex64::new(0.0, 0.0); u0.len()]);
    }
    let n = u0.len();
    let rhs = |part: fn(&Complex64) -> f64| {
        let x: Vec<f64> = u0.iter().map(part).collect();
        let mut y = vec![0.0; n];
        d.mul(&x, &mut y);
        y.iter_mut().for_each(|v| *v = -*v);
        y
    };
    let opts = SolverOptions::default();
    let imag_zero = u0.iter().all(|c| c.im == 0.0);
    let (wr, wi) = rayon::join(
        || pcg(&a, &rhs(|c| c.re), opts),
        || {
            if imag_zero {
                Ok(vec![0.0; n])
            } else {
                pcg(&a, &rhs(|c| c.im), opts)
            }
        },
    );
    let (wr, wi) = (wr?, wi?);
    Ok(wr.into_iter().zip(wi).map(|(r, i)| Complex64::new(r, i)).collect())
}

/// Piecewise-linear interpolation of boundary nodal values in angle.
pub fn boundary_values(mesh: &Mesh, nodal: &[Complex64], angles: &[f64]) -> Vec<Complex64> {
    let nb = mesh.boundary_vertices.len();
    let step = 2.0 * PI / nb as f64;
    angles
        .iter()
        .map(|th| {
            let s = th.rem_euclid(2.0 * PI) / step;
            let j = (s.floor() as usize).min(nb - 1);
            let t = s - j as f64;
            let a = nodal[mesh.boundary_vertices[j]];
            let b = nodal[mesh.boundary_vertices[(j + 1) % nb]];
            a * (1.0 - t) + b * t
        })
        .collect()
}

/// Scattered boundary trace at `probe_count` uniform angles.
pub fn scattered_trace(
    medium: &MediumConfig,
    influx: &Influx,
    mesh: &Mesh,
    probe_count: usize,
) -> Result<BoundaryTrace> {
    if probe_count == 0 {
        return Err(DsmError::config("probes.count", "must be positive"));
    }
    if probe_count > mesh.boundary_vertices.len() {
        log::warn!(
            "{probe_count} probes exceed the {} boundary vertices",
            mesh.boundary_vertices.len()
        );
    }
    let w = scattered_field(mesh, medium, influx)?;
    let angles: Vec<f64> = (0..probe_count).map(|j| 2.0 * PI * j as f64 / probe_count as f64).collect();
    BoundaryTrace::new(medium.background.radius, boundary_values(mesh, &w, &angles))
}
