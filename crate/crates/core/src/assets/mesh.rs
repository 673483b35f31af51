use std::sync::Arc;

use nalgebra::Vector3;

use super::AssetError;

/// Below this doubled triangle area (m^2) a triangle counts as degenerate.
const DEGENERATE_AREA2: f64 = 1e-14;

/// RGB texture in linear color, row-major with the top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct Texture {
    pub width: usize,
    pub height: usize,
    pub texels: Vec<[f32; 3]>,
}

impl Texture {
    pub fn from_srgb8(width: usize, height: usize, rgb: &[u8]) -> Self {
        let texels = rgb
            .chunks_exact(3)
            .map(|p| [srgb_to_linear(p[0]), srgb_to_linear(p[1]), srgb_to_linear(p[2])])
            .collect();
        Self {
            width,
            height,
            texels,
        }
    }

    pub fn to_srgb8(&self) -> Vec<u8> {
        self.texels
            .iter()
            .flat_map(|t| t.map(crate::render::linear_to_srgb8))
            .collect()
    }

    /// Nearest-texel lookup. `v = 0` is the bottom row, as in OBJ.
    pub fn sample_nearest(&self, u: f64, v: f64) -> [f32; 3] {
        let x = ((u * self.width as f64).floor() as i64).clamp(0, self.width as i64 - 1) as usize;
        let y = (((1.0 - v) * self.height as f64).floor() as i64).clamp(0, self.height as i64 - 1)
            as usize;
        self.texels[y * self.width + x]
    }
}

pub(crate) fn srgb_to_linear(c: u8) -> f32 {
    let c = c as f32 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

/// Indexed triangle mesh with per-vertex texture coordinates.
#[derive(Debug, Clone)]
pub struct Mesh {
    /// Positions in meters.
    pub vertices: Vec<Vector3<f64>>,
    /// Per-vertex UVs in `[0, 1]`; empty when the mesh is untextured.
    pub uvs: Vec<[f64; 2]>,
    /// Counter-clockwise seen from outside.
    pub triangles: Vec<[u32; 3]>,
    pub texture: Option<Arc<Texture>>,
    /// Albedo used when there is no texture.
    pub color: [f32; 3],
}

impl Mesh {
    pub fn new(vertices: Vec<Vector3<f64>>, triangles: Vec<[u32; 3]>) -> Self {
        Self {
            vertices,
            uvs: Vec::new(),
            triangles,
            texture: None,
            color: [0.6, 0.6, 0.6],
        }
    }

    /// Checks indices and coordinates and drops zero-area triangles.
    pub fn validate(&mut self) -> Result<(), AssetError> {
        let n = self.vertices.len();
        if !self.vertices.iter().all(|v| v.iter().all(|c| c.is_finite())) {
            return Err(AssetError::Validation("mesh has non-finite vertex coordinates".into()));
        }
        if !self.uvs.is_empty() && self.uvs.len() != n {
            return Err(AssetError::Validation(format!(
                "mesh has {} uvs for {n} vertices",
                self.uvs.len()
            )));
        }
        if let Some(t) = self.triangles.iter().find(|t| t.iter().any(|&i| i as usize >= n)) {
            return Err(AssetError::Validation(format!(
                "triangle {t:?} references a vertex beyond {n}"
            )));
        }
        let vertices = &self.vertices;
        self.triangles.retain(|t| {
            let [a, b, c] = t.map(|i| vertices[i as usize]);
            (b - a).cross(&(c - a)).norm() > DEGENERATE_AREA2
        });
        if self.triangles.is_empty() {
            return Err(AssetError::Validation("degenerate mesh: no non-zero-area triangles".into()));
        }
        Ok(())
    }

    /// Vertex centroid and the largest distance from it.
    pub fn bounding_sphere(&self) -> (Vector3<f64>, f64) {
        let c = super::centroid(self.vertices.iter());
        let r = self
            .vertices
            .iter()
            .map(|v| (v - c).norm())
            .fold(0.0, f64::max);
        (c, r)
    }

    /// Area-weighted vertex normals.
    pub fn vertex_normals(&self) -> Vec<Vector3<f64>> {
        let mut normals = vec![Vector3::zeros(); self.vertices.len()];
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| self.vertices[i as usize]);
            let n = (b - a).cross(&(c - a));
            for &i in t {
                normals[i as usize] += n;
            }
        }
        // Seam duplicates share a position but not a triangle fan, so merge
        // normals of coincident vertices.
        let mut by_pos: std::collections::HashMap<[u64; 3], Vector3<f64>> =
            std::collections::HashMap::new();
        for (v, n) in self.vertices.iter().zip(&normals) {
            *by_pos.entry(v.map(f64::to_bits).into()).or_insert_with(Vector3::zeros) += n;
        }
        self.vertices
            .iter()
            .map(|v| {
                let n = by_pos[&<[u64; 3]>::from(v.map(f64::to_bits))];
                let len = n.norm();
                if len > 0.0 {
                    n / len
                } else {
                    Vector3::y()
                }
            })
            .collect()
    }

    pub fn albedo_at(&self, u: f64, v: f64) -> [f32; 3] {
        match &self.texture {
            Some(t) => t.sample_nearest(u, v),
            None => self.color,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_triangles_are_dropped() {
        let mut m = Mesh::new(
            vec![Vector3::zeros(), Vector3::x(), Vector3::y(), Vector3::x() * 2.0],
            vec![[0, 1, 2], [0, 1, 3]],
        );
        m.validate().unwrap();
        assert_eq!(m.triangles, vec![[0, 1, 2]]);
    }

    #[test]
    fn all_degenerate_is_rejected() {
        let mut m = Mesh::new(vec![Vector3::zeros(), Vector3::x(), Vector3::x() * 2.0], vec![[0, 1, 2]]);
        assert!(matches!(m.validate(), Err(AssetError::Validation(_))));
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let mut m = Mesh::new(vec![Vector3::zeros(), Vector3::x(), Vector3::y()], vec![[0, 1, 3]]);
        assert!(m.validate().is_err());
    }

    #[test]
    fn nearest_lookup_uses_obj_v_convention() {
        let t = Texture {
            width: 1,
            height: 2,
            texels: vec![[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        };
        assert_eq!(t.sample_nearest(0.5, 0.9), [1.0, 0.0, 0.0]);
        assert_eq!(t.sample_nearest(0.5, 0.1), [0.0, 0.0, 1.0]);
    }
}
