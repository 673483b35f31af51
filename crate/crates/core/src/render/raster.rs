use nalgebra::Vector3;

use super::shading::{env_lookup, shade};
use super::{Framebuffer, Lighting, RenderConfig};
use crate::assets::{PreparedEnvironment, Texture};
use crate::geometry::{Camera, NEAR_PLANE};

/// Triangles are clipped slightly in front of the near plane so every
/// surviving vertex projects.
const CLIP_DEPTH: f64 = NEAR_PLANE * (1.0 + 1e-9);

/// A mesh already transformed into world space.
#[derive(Debug, Clone)]
pub struct RenderInstance<'a> {
    pub id: u32,
    pub positions: Vec<Vector3<f64>>,
    /// Unit per-vertex normals in world space.
    pub normals: Vec<Vector3<f64>>,
    /// Empty, or one per vertex.
    pub uvs: &'a [[f64; 2]],
    /// Counter-clockwise seen from outside.
    pub triangles: &'a [[u32; 3]],
    pub texture: Option<&'a Texture>,
    pub color: [f32; 3],
}

impl RenderInstance<'_> {
    fn albedo(&self, tri: [u32; 3], bary: [f64; 3]) -> [f32; 3] {
        match self.texture {
            Some(tex) if !self.uvs.is_empty() => {
                let mut uv = [0.0; 2];
                for (k, &vi) in tri.iter().enumerate() {
                    uv[0] += bary[k] * self.uvs[vi as usize][0];
                    uv[1] += bary[k] * self.uvs[vi as usize][1];
                }
                tex.sample_nearest(uv[0], uv[1])
            }
            _ => self.color,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RenderScene<'a> {
    pub instances: Vec<RenderInstance<'a>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterOptions {
    pub cull_backfaces: bool,
    /// `None` fills only depth and instance ids.
    pub lighting: Option<Lighting>,
}

impl RasterOptions {
    pub fn shaded(config: &RenderConfig) -> Self {
        Self {
            cull_backfaces: config.cull_backfaces,
            lighting: Some(config.lighting),
        }
    }

    pub fn ids_only(cull_backfaces: bool) -> Self {
        Self {
            cull_backfaces,
            lighting: None,
        }
    }
}

#[derive(Clone, Copy)]
struct ClipVertex {
    p: Vector3<f64>,
    bary: [f64; 3],
}

#[derive(Clone, Copy)]
struct ScreenVertex {
    x: f64,
    y: f64,
    inv_depth: f64,
    bary: [f64; 3],
}

#[derive(Clone, Copy)]
struct Fragment {
    triangle: u32,
    bary: [f32; 2],
}

fn clip_near(tri: [Vector3<f64>; 3]) -> Vec<ClipVertex> {
    let verts = [
        ClipVertex { p: tri[0], bary: [1.0, 0.0, 0.0] },
        ClipVertex { p: tri[1], bary: [0.0, 1.0, 0.0] },
        ClipVertex { p: tri[2], bary: [0.0, 0.0, 1.0] },
    ];
    let inside = |v: &ClipVertex| -v.p.z >= CLIP_DEPTH;
    if verts.iter().all(inside) {
        return verts.to_vec();
    }
    let mut out = Vec::with_capacity(4);
    for k in 0..3 {
        let a = verts[k];
        let b = verts[(k + 1) % 3];
        let (ia, ib) = (inside(&a), inside(&b));
        if ia {
            out.push(a);
        }
        if ia != ib {
            let da = -a.p.z - CLIP_DEPTH;
            let db = -b.p.z - CLIP_DEPTH;
            let t = da / (da - db);
            let mut p = a.p + (b.p - a.p) * t;
            p.z = -CLIP_DEPTH;
            let bary = [0, 1, 2].map(|i| a.bary[i] + (b.bary[i] - a.bary[i]) * t);
            out.push(ClipVertex { p, bary });
        }
    }
    out
}

/// Edge function of `p` against the directed edge `a -> b`, evaluated with
/// the endpoints in a canonical order so that a shared edge yields exactly
/// opposite values for its two triangles.
fn edge(a: &ScreenVertex, b: &ScreenVertex, px: f64, py: f64) -> f64 {
    let swap = (b.x, b.y) < (a.x, a.y);
    let (a, b) = if swap { (b, a) } else { (a, b) };
    let e = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
    if swap {
        -e
    } else {
        e
    }
}

/// Pixels exactly on an edge belong to one of the two triangles sharing it.
fn owns_edge(a: &ScreenVertex, b: &ScreenVertex) -> bool {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    dy > 0.0 || (dy == 0.0 && dx < 0.0)
}

/// Calls `visit(i, j, depth, bary)` for every pixel center inside the
/// triangle, with perspective-correct barycentrics of the source triangle.
fn scan_triangle(v: [ScreenVertex; 3], width: usize, height: usize, mut visit: impl FnMut(usize, usize, f64, [f64; 3])) {
    let [v0, mut v1, mut v2] = v;
    let mut area = edge(&v0, &v1, v2.x, v2.y);
    if area == 0.0 || !area.is_finite() {
        return;
    }
    if area < 0.0 {
        std::mem::swap(&mut v1, &mut v2);
        area = -area;
    }
    let min_x = v0.x.min(v1.x).min(v2.x);
    let max_x = v0.x.max(v1.x).max(v2.x);
    let min_y = v0.y.min(v1.y).min(v2.y);
    let max_y = v0.y.max(v1.y).max(v2.y);
    let i1 = (max_x - 0.5).floor().min(width as f64 - 1.0);
    let j1 = (max_y - 0.5).floor().min(height as f64 - 1.0);
    if i1 < 0.0 || j1 < 0.0 {
        return;
    }
    let i0 = (min_x - 0.5).ceil().max(0.0) as usize;
    let j0 = (min_y - 0.5).ceil().max(0.0) as usize;
    let (i1, j1) = (i1 as usize, j1 as usize);
    let verts = [v0, v1, v2];
    let edges = [(&verts[1], &verts[2]), (&verts[2], &verts[0]), (&verts[0], &verts[1])];
    let owns = edges.map(|(a, b)| owns_edge(a, b));
    for j in j0..=j1 {
        let py = j as f64 + 0.5;
        'px: for i in i0..=i1 {
            let px = i as f64 + 0.5;
            let mut w = [0.0; 3];
            for k in 0..3 {
                let (a, b) = edges[k];
                w[k] = edge(a, b, px, py);
                if w[k] < 0.0 || (w[k] == 0.0 && !owns[k]) {
                    continue 'px;
                }
            }
            let l = w.map(|x| x / area);
            let inv = l[0] * verts[0].inv_depth + l[1] * verts[1].inv_depth + l[2] * verts[2].inv_depth;
            let mut bary = [0.0; 3];
            for (k, vk) in verts.iter().enumerate() {
                let wk = l[k] * vk.inv_depth / inv;
                for (c, b) in bary.iter_mut().zip(vk.bary) {
                    *c += wk * b;
                }
            }
            visit(i, j, 1.0 / inv, bary);
        }
    }
}

/// Screen-space triangles of one instance after culling and near clipping.
fn for_each_screen_triangle(
    inst: &RenderInstance,
    camera: &Camera,
    cull_backfaces: bool,
    mut f: impl FnMut(u32, [ScreenVertex; 3]),
) {
    let focal = camera.focal_px();
    let (cx, cy) = (0.5 * camera.image_width as f64, 0.5 * camera.image_height as f64);
    let cam_pos: Vec<Vector3<f64>> = inst.positions.iter().map(|p| camera.to_camera_space(p)).collect();
    for (ti, tri) in inst.triangles.iter().enumerate() {
        let p = tri.map(|k| cam_pos[k as usize]);
        let n = (p[1] - p[0]).cross(&(p[2] - p[0]));
        if cull_backfaces && n.dot(&p[0]) >= 0.0 {
            continue;
        }
        let poly = clip_near(p);
        if poly.len() < 3 {
            continue;
        }
        let sv: Vec<ScreenVertex> = poly
            .iter()
            .map(|c| {
                let d = -c.p.z;
                ScreenVertex {
                    x: cx + focal * c.p.x / d,
                    y: cy - focal * c.p.y / d,
                    inv_depth: 1.0 / d,
                    bary: c.bary,
                }
            })
            .collect();
        for k in 1..sv.len() - 1 {
            f(ti as u32, [sv[0], sv[k], sv[k + 1]]);
        }
    }
}

/// Number of pixels an instance covers when rendered alone.
pub fn silhouette_pixels(inst: &RenderInstance, camera: &Camera, cull_backfaces: bool) -> usize {
    let (w, h) = (camera.image_width as usize, camera.image_height as usize);
    let mut mask = vec![false; w * h];
    for_each_screen_triangle(inst, camera, cull_backfaces, |_, tri| {
        scan_triangle(tri, w, h, |i, j, _, _| mask[j * w + i] = true);
    });
    mask.iter().filter(|&&m| m).count()
}

/// Z-buffered rasterization of every instance followed by deferred shading.
pub fn rasterize(
    scene: &RenderScene,
    camera: &Camera,
    env: Option<&PreparedEnvironment>,
    opts: &RasterOptions,
) -> Framebuffer {
    let (w, h) = (camera.image_width as usize, camera.image_height as usize);
    let mut fb = Framebuffer::new(w, h);
    let mut zbuf = vec![f64::INFINITY; w * h];
    // Holds instance indices until the end, then ids.
    let mut owner = vec![u32::MAX; w * h];
    let shading = opts.lighting.is_some() && env.is_some();
    let mut frags = vec![
        Fragment {
            triangle: 0,
            bary: [0.0; 2],
        };
        if shading { w * h } else { 0 }
    ];
    for (ii, inst) in scene.instances.iter().enumerate() {
        for_each_screen_triangle(inst, camera, opts.cull_backfaces, |ti, tri| {
            scan_triangle(tri, w, h, |i, j, depth, bary| {
                let idx = j * w + i;
                if depth < zbuf[idx] {
                    zbuf[idx] = depth;
                    owner[idx] = ii as u32;
                    if shading {
                        frags[idx] = Fragment {
                            triangle: ti,
                            bary: [bary[0] as f32, bary[1] as f32],
                        };
                    }
                }
            });
        });
    }

    for idx in 0..w * h {
        if owner[idx] != u32::MAX {
            let inst = &scene.instances[owner[idx] as usize];
            fb.instance_id[idx] = inst.id;
            fb.depth[idx] = zbuf[idx] as f32;
            if let (true, Some(mode), Some(env)) = (shading, opts.lighting, env) {
                let fr = frags[idx];
                let (b0, b1) = (fr.bary[0] as f64, fr.bary[1] as f64);
                let bary = [b0, b1, 1.0 - b0 - b1];
                let tri = inst.triangles[fr.triangle as usize];
                let mut n = Vector3::zeros();
                for (k, &vi) in tri.iter().enumerate() {
                    n += inst.normals[vi as usize] * bary[k];
                }
                let n = n.try_normalize(1e-12).unwrap_or_else(|| {
                    let p = tri.map(|k| inst.positions[k as usize]);
                    (p[1] - p[0]).cross(&(p[2] - p[0])).normalize()
                });
                fb.color[idx] = shade(inst.albedo(tri, bary), &n, &env.sh, mode);
            }
        } else if let (true, Some(env)) = (shading, env) {
            let (i, j) = (idx % w, idx / w);
            let d = camera.ray_direction(i as f64 + 0.5, j as f64 + 0.5).normalize();
            fb.color[idx] = env_lookup(&env.env, &d);
        }
    }
    fb
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assets::{make_test_head, Environment};
    use crate::render::NO_INSTANCE;
    use crate::render::ShIrradiance;

    fn quad(z: f64, half: f64) -> (Vec<Vector3<f64>>, Vec<[u32; 3]>) {
        (
            vec![
                Vector3::new(-half, -half, z),
                Vector3::new(half, -half, z),
                Vector3::new(half, half, z),
                Vector3::new(-half, half, z),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
    }

    fn instance<'a>(id: u32, pos: Vec<Vector3<f64>>, tris: &'a [[u32; 3]]) -> RenderInstance<'a> {
        let n = pos.len();
        RenderInstance {
            id,
            positions: pos,
            normals: vec![Vector3::z(); n],
            uvs: &[],
            triangles: tris,
            texture: None,
            color: [1.0; 3],
        }
    }

    fn env(c: f32) -> PreparedEnvironment {
        let env = Environment::constant("c", 8, [c; 3]);
        let sh = ShIrradiance::from_environment(&env);
        PreparedEnvironment { env, sh }
    }

    #[test]
    fn empty_scene_is_background() {
        let cam = Camera::looking_down_z(40.0, 32, 24);
        let e = env(0.25);
        let fb = rasterize(&RenderScene::default(), &cam, Some(&e), &RasterOptions::ids_only(true));
        assert!(fb.depth.iter().all(|d| d.is_infinite()));
        assert!(fb.instance_id.iter().all(|&i| i == NO_INSTANCE));
        let opts = RasterOptions {
            cull_backfaces: true,
            lighting: Some(Lighting::ShIrradiance),
        };
        let fb = rasterize(&RenderScene::default(), &cam, Some(&e), &opts);
        assert!(fb.color.iter().all(|c| (c[0] - 0.25).abs() < 1e-6));
    }

    #[test]
    fn nearer_quad_wins() {
        let cam = Camera::looking_down_z(40.0, 64, 48);
        let (far, tris) = quad(-5.0, 1.0);
        let (near, _) = quad(-2.0, 0.2);
        let scene = RenderScene {
            instances: vec![instance(7, far, &tris), instance(3, near, &tris)],
        };
        let fb = rasterize(&scene, &cam, None, &RasterOptions::ids_only(true));
        let c = 24 * 64 + 32;
        assert_eq!(fb.instance_id[c], 3);
        assert!((fb.depth[c] - 2.0).abs() < 1e-5);
        assert_eq!(fb.instance_id[24 * 64 + 2], NO_INSTANCE);
        // Far quad spans +-1 at 5 m: visible around the near one.
        let f = cam.focal_px();
        let edge_px = (32.0 + f * 0.8 / 5.0) as usize;
        assert_eq!(fb.instance_id[24 * 64 + edge_px], 7);
        assert!((fb.depth[24 * 64 + edge_px] - 5.0).abs() < 1e-5);
    }

    #[test]
    fn shared_edges_are_watertight() {
        // A fan of thin triangles: each pixel center is covered exactly once.
        let cam = Camera::looking_down_z(60.0, 40, 30);
        let mut pos = vec![Vector3::new(0.03, -0.01, -1.0)];
        for k in 0..=24 {
            let a = k as f64 / 24.0 * std::f64::consts::TAU;
            pos.push(Vector3::new(0.4 * a.cos(), 0.37 * a.sin(), -1.0));
        }
        let tris: Vec<[u32; 3]> = (1..25).map(|k| [0, k, k + 1]).collect();
        let mut counts = vec![0u32; 40 * 30];
        for t in &tris {
            let one = [*t];
            let scene = RenderScene {
                instances: vec![instance(0, pos.clone(), &one)],
            };
            let fb = rasterize(&scene, &cam, None, &RasterOptions::ids_only(true));
            for (c, id) in counts.iter_mut().zip(&fb.instance_id) {
                *c += (*id == 0) as u32;
            }
        }
        assert!(counts.iter().all(|&c| c <= 1));
        assert!(counts.iter().filter(|&&c| c == 1).count() > 100);
    }

    #[test]
    fn clipping_keeps_visible_part() {
        // Floor strip passing through the camera plane.
        let cam = Camera::looking_down_z(60.0, 40, 30);
        let pos = vec![
            Vector3::new(-1.0, -0.5, 1.0),
            Vector3::new(1.0, -0.5, 1.0),
            Vector3::new(1.0, -0.5, -10.0),
            Vector3::new(-1.0, -0.5, -10.0),
        ];
        let tris = [[0, 1, 2], [0, 2, 3]];
        let scene = RenderScene {
            instances: vec![instance(1, pos, &tris)],
        };
        let fb = rasterize(&scene, &cam, None, &RasterOptions::ids_only(false));
        // Bottom row is the floor, top row is empty.
        assert_eq!(fb.instance_id[29 * 40 + 20], 1);
        assert_eq!(fb.instance_id[20], NO_INSTANCE);
        assert!(fb.depth.iter().all(|d| d.is_infinite() || *d > NEAR_PLANE as f32));
    }

    /// Möller-Trumbore nearest hit.
    fn ray_hit(o: &Vector3<f64>, d: &Vector3<f64>, pos: &[Vector3<f64>], tris: &[[u32; 3]]) -> Option<f64> {
        let mut best: Option<f64> = None;
        for t in tris {
            let (a, b, c) = (pos[t[0] as usize], pos[t[1] as usize], pos[t[2] as usize]);
            let e1 = b - a;
            let e2 = c - a;
            let p = d.cross(&e2);
            let det = e1.dot(&p);
            if det.abs() < 1e-15 {
                continue;
            }
            let s = o - a;
            let u = s.dot(&p) / det;
            let q = s.cross(&e1);
            let v = d.dot(&q) / det;
            if u < 0.0 || v < 0.0 || u + v > 1.0 {
                continue;
            }
            let tt = e2.dot(&q) / det;
            if tt > 0.0 && best.map_or(true, |b| tt < b) {
                best = Some(tt);
            }
        }
        best
    }

    #[test]
    fn head_matches_ray_casting() {
        let head = make_test_head(3, 6).unwrap();
        let cam = Camera::looking_down_z(40.0, 96, 72);
        let pos: Vec<Vector3<f64>> = head.mesh.vertices.iter().map(|v| v + Vector3::new(0.02, 0.0, -0.6)).collect();
        let tris = head.mesh.triangles.clone();
        let scene = RenderScene {
            instances: vec![instance(0, pos.clone(), &tris)],
        };
        let fb = rasterize(&scene, &cam, None, &RasterOptions::ids_only(true));
        let mut agree = 0;
        let mut covered = 0;
        for j in 0..72 {
            for i in 0..96 {
                let d = cam.ray_direction(i as f64 + 0.5, j as f64 + 0.5);
                let hit = ray_hit(&Vector3::zeros(), &d, &pos, &tris);
                let idx = j * 96 + i;
                let ours = fb.instance_id[idx] == 0;
                if hit.is_some() == ours {
                    agree += 1;
                }
                if let (Some(t), true) = (hit, ours) {
                    covered += 1;
                    // Unit-depth ray: the hit parameter is the depth.
                    assert!((fb.depth[idx] as f64 - t).abs() < 1e-4, "{} vs {t}", fb.depth[idx]);
                }
            }
        }
        assert!(covered > 300);
        assert!(agree as f64 / (96.0 * 72.0) >= 0.99, "agreement {agree}");
    }

    #[test]
    fn culling_does_not_change_closed_mesh_silhouette() {
        let head = make_test_head(5, 6).unwrap();
        let cam = Camera::looking_down_z(40.0, 80, 60);
        let pos: Vec<Vector3<f64>> = head.mesh.vertices.iter().map(|v| v + Vector3::new(0.0, 0.01, -0.5)).collect();
        let tris = head.mesh.triangles.clone();
        let scene = RenderScene {
            instances: vec![instance(0, pos, &tris)],
        };
        let a = rasterize(&scene, &cam, None, &RasterOptions::ids_only(true));
        let b = rasterize(&scene, &cam, None, &RasterOptions::ids_only(false));
        assert_eq!(a.instance_id, b.instance_id);
    }

    #[test]
    fn silhouette_matches_solo_render() {
        let head = make_test_head(1, 5).unwrap();
        let cam = Camera::looking_down_z(40.0, 64, 48);
        let pos: Vec<Vector3<f64>> = head.mesh.vertices.iter().map(|v| v + Vector3::new(-0.05, 0.02, -0.8)).collect();
        let inst = instance(4, pos, &head.mesh.triangles);
        let fb = rasterize(
            &RenderScene {
                instances: vec![inst.clone()],
            },
            &cam,
            None,
            &RasterOptions::ids_only(true),
        );
        assert_eq!(silhouette_pixels(&inst, &cam, true), fb.count_instance(4));
    }
}
