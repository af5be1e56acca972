use crate::error::{DsmError, Result};
use std::f64::consts::PI;

/// Triangulation of a disk by concentric rings.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Outer ring, angularly sorted from angle 0, not closed.
    pub boundary_vertices: Vec<usize>,
    pub h: f64,
    pub radius: f64,
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl Mesh {
    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    /// Angles of the boundary vertices in `[0, 2 pi)`.
    pub fn boundary_angles(&self) -> Vec<f64> {
        self.boundary_vertices
            .iter()
            .map(|&i| {
                let [x, y] = self.vertices[i];
                y.atan2(x).rem_euclid(2.0 * PI)
            })
            .collect()
    }
}

/// Quasi-uniform ring mesh of the disk of radius `radius` with target edge
/// length `h`.
///
/// Ring `i` sits at radius `i R / N`, `N = ceil(R / h)`, and carries
/// `ceil(2 pi r_i / h)` equally spaced vertices; neighbouring rings are
/// staggered by half a step and the outer ring starts at angle 0. Rings are
/// stitched by merging their angle sequences.
pub fn mesh_disk(radius: f64, h: f64) -> Result<Mesh> {
    if !(radius > 0.0 && h > 0.0 && h < radius / 4.0) {
        return Err(DsmError::Mesh(format!("need 0 < h < R/4, got h = {h}, R = {radius}")));
    }
    let rings = (radius / h).ceil() as usize;
    let mut vertices = vec![[0.0, 0.0]];
    // Per ring: (first vertex index, count, angle offset).
    let mut layout = vec![(0usize, 1usize, 0.0f64)];
    for i in 1..=rings {
        let r = radius * i as f64 / rings as f64;
        let n = ((2.0 * PI * r / h).ceil() as usize).max(6);
        let offset = if (rings - i) % 2 == 1 { PI / n as f64 } else { 0.0 };
        layout.push((vertices.len(), n, offset));
        for j in 0..n {
            let t = offset + 2.0 * PI * j as f64 / n as f64;
            let (s, c) = t.sin_cos();
            vertices.push([r * c, r * s]);
        }
    }
    let mut triangles = Vec::new();
    let (s1, n1, _) = layout[1];
    for j in 0..n1 {
        triangles.push([0, s1 + j, s1 + (j + 1) % n1]);
    }
    for i in 1..rings {
        let (sa, na, oa) = layout[i];
        let (sb, nb, ob) = layout[i + 1];
        let ang_a = |j: usize| oa + 2.0 * PI * j as f64 / na as f64;
        let ang_b = |j: usize| ob + 2.0 * PI * j as f64 / nb as f64;
        let (mut ia, mut ib) = (0, 0);
        while ia < na || ib < nb {
            let advance_a = ib == nb || (ia < na && ang_a(ia + 1) < ang_b(ib + 1));
            if advance_a {
                triangles.push([sa + ia % na, sa + (ia + 1) % na, sb + ib % nb]);
                ia += 1;
            } else {
                triangles.push([sa + ia % na, sb + (ib + 1) % nb, sb + ib % nb]);
                ib += 1;
            }
        }
    }
    for t in triangles.iter_mut() {
        let a = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
        if a < 0.0 {
            t.swap(1, 2);
        }
    }
    let (sb, nb, _) = layout[rings];
    let mesh = Mesh {
        vertices,
        triangles,
        boundary_vertices: (sb..sb + nb).collect(),
        h,
        radius,
    };
    for t in 0..mesh.triangles.len() {
        if !(mesh.area(t) > 0.0) {
            return Err(DsmError::Mesh(format!("degenerate triangle {t}")));
        }
    }
    Ok(mesh)
}
