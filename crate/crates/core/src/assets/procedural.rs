//! Procedural stand-ins for scanned heads, HDR panoramas and occluder props.
//!
//! Heads are UV-sphere ellipsoids facing +Z with +Y up, centered at the
//! origin, carrying 50 landmarks: 20 outline (indices 0-19), 12 eye (20-31),
//! 10 mouth (32-41) and 8 head (42-49). Every output is a pure function of
//! its arguments.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mesh::{Mesh, Texture};
use super::{AssetError, Environment, FaceModel, Landmark, OccluderKind, OccluderMesh, Region};

/// Semi-axes of the test head in meters (x: ear to ear, y: up, z: front).
pub const HEAD_RADII: [f64; 3] = [0.10, 0.14, 0.12];

const TEXTURE_SIZE: usize = 128;
const LANDMARK_JITTER_DEG: f64 = 0.5;

/// Unit direction at longitude `lon` (0 = +Z, positive toward +X) and
/// latitude `lat` (positive toward +Y), both in degrees.
fn direction(lon: f64, lat: f64) -> Vector3<f64> {
    let (lon, lat) = (lon.to_radians(), lat.to_radians());
    Vector3::new(lat.cos() * lon.sin(), lat.sin(), lat.cos() * lon.cos())
}

fn ellipsoid_point(radii: [f64; 3], dir: Vector3<f64>) -> Vector3<f64> {
    let q = (dir.x / radii[0]).powi(2) + (dir.y / radii[1]).powi(2) + (dir.z / radii[2]).powi(2);
    dir / q.sqrt()
}

/// Angular landmark layout `(lon, lat, region)` before jitter.
fn landmark_layout() -> Vec<(f64, f64, Region)> {
    let mut out = Vec::with_capacity(50);
    // Jaw and cheek contour, ear to ear through the chin.
    for k in 0..20 {
        let a = PI * k as f64 / 19.0;
        out.push((60.0 * a.cos(), -50.0 * a.sin(), Region::Outline));
    }
    for side in [-18.0, 18.0] {
        for k in 0..6 {
            let b = TAU * k as f64 / 6.0;
            out.push((side + 7.0 * b.cos(), 12.0 + 3.5 * b.sin(), Region::Eye));
        }
    }
    for k in 0..10 {
        let b = TAU * k as f64 / 10.0;
        out.push((14.0 * b.cos(), -28.0 + 5.0 * b.sin(), Region::Mouth));
    }
    for k in 0..8 {
        out.push((-40.0 + 80.0 * k as f64 / 7.0, 35.0, Region::Head));
    }
    out
}

/// UV-sphere ellipsoid, optionally cut below latitude `min_lat` (degrees).
/// Winding is counter-clockwise seen from outside; the seam is at the back.
pub fn ellipsoid_mesh(center: Vector3<f64>, radii: [f64; 3], stacks: usize, slices: usize, min_lat: Option<f64>) -> Mesh {
    let theta_max = min_lat.map_or(PI, |l| (90.0 - l).to_radians());
    let mut vertices = Vec::with_capacity((stacks + 1) * (slices + 1));
    let mut uvs = Vec::with_capacity(vertices.capacity());
    for i in 0..=stacks {
        let theta = theta_max * i as f64 / stacks as f64;
        for j in 0..=slices {
            let phi = -PI + TAU * j as f64 / slices as f64;
            let d = Vector3::new(theta.sin() * phi.sin(), theta.cos(), theta.sin() * phi.cos());
            vertices.push(center + Vector3::new(d.x * radii[0], d.y * radii[1], d.z * radii[2]));
            uvs.push([j as f64 / slices as f64, 1.0 - i as f64 / stacks as f64]);
        }
    }
    let at = |i: usize, j: usize| (i * (slices + 1) + j) as u32;
    let closed_bottom = min_lat.is_none();
    let mut triangles = Vec::new();
    for i in 0..stacks {
        for j in 0..slices {
            let (a, b, c, d) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
            if i == 0 {
                triangles.push([a, b, c]);
            } else if i == stacks - 1 && closed_bottom {
                triangles.push([a, b, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([d, b, c]);
            }
        }
    }
    let mut mesh = Mesh::new(vertices, triangles);
    mesh.uvs = uvs;
    mesh
}

/// Axis-aligned box, outward winding.
pub fn box_mesh(center: Vector3<f64>, half: [f64; 3]) -> Mesh {
    let mut vertices = Vec::with_capacity(8);
    for k in 0..8 {
        let s = |bit: usize| if k & bit != 0 { 1.0 } else { -1.0 };
        vertices.push(center + Vector3::new(s(1) * half[0], s(2) * half[1], s(4) * half[2]));
    }
    // Corner index bits: 1 = +x, 2 = +y, 4 = +z.
    let quads = [
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
    ];
    let triangles = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    Mesh::new(vertices, triangles)
}

/// Closed elliptic cylinder along Y from `y0` to `y1`.
pub fn cylinder_mesh(center_xz: [f64; 2], radii_xz: [f64; 2], y0: f64, y1: f64, slices: usize) -> Mesh {
    let mut vertices = Vec::new();
    for y in [y0, y1] {
        for j in 0..slices {
            let phi = TAU * j as f64 / slices as f64;
            vertices.push(Vector3::new(
                center_xz[0] + radii_xz[0] * phi.sin(),
                y,
                center_xz[1] + radii_xz[1] * phi.cos(),
            ));
        }
    }
    let bottom_c = vertices.len() as u32;
    vertices.push(Vector3::new(center_xz[0], y0, center_xz[1]));
    let top_c = vertices.len() as u32;
    vertices.push(Vector3::new(center_xz[0], y1, center_xz[1]));
    let n = slices as u32;
    let mut triangles = Vec::new();
    for j in 0..n {
        let k = (j + 1) % n;
        // Side: phi grows from +Z toward +X.
        triangles.push([j, k, n + k]);
        triangles.push([j, n + k, n + j]);
        triangles.push([top_c, n + j, n + k]);
        triangles.push([bottom_c, k, j]);
    }
    Mesh::new(vertices, triangles)
}

/// Concatenate meshes; the result takes the color of the first one.
fn merge(parts: Vec<Mesh>) -> Mesh {
    let color = parts.first().map_or([0.5; 3], |m| m.color);
    let mut out = Mesh::new(Vec::new(), Vec::new());
    for m in parts {
        let base = out.vertices.len() as u32;
        out.vertices.extend(m.vertices);
        out.triangles.extend(m.triangles.iter().map(|t| t.map(|i| i + base)));
    }
    out.color = color;
    out
}

const SKIN_TONES: [[f32; 3]; 6] = [
    [0.80, 0.56, 0.44],
    [0.70, 0.45, 0.33],
    [0.55, 0.34, 0.22],
    [0.38, 0.22, 0.14],
    [0.22, 0.12, 0.08],
    [0.85, 0.65, 0.55],
];
const HAIR_TONES: [[f32; 3]; 4] = [[0.02, 0.015, 0.01], [0.12, 0.06, 0.02], [0.35, 0.22, 0.08], [0.3, 0.3, 0.3]];

fn head_texture(rng: &mut ChaCha8Rng) -> Texture {
    let skin = SKIN_TONES[rng.gen_range(0..SKIN_TONES.len())];
    let hair = HAIR_TONES[rng.gen_range(0..HAIR_TONES.len())];
    let hairline: f64 = rng.gen_range(38.0..46.0);
    let mut texels = Vec::with_capacity(TEXTURE_SIZE * TEXTURE_SIZE);
    for row in 0..TEXTURE_SIZE {
        // Row 0 is v = 1, the north pole.
        let theta = PI * (row as f64 + 0.5) / TEXTURE_SIZE as f64;
        let lat = 90.0 - theta.to_degrees();
        for col in 0..TEXTURE_SIZE {
            let lon = -180.0 + 360.0 * (col as f64 + 0.5) / TEXTURE_SIZE as f64;
            let shade = 0.92 + 0.08 * rng.gen::<f32>();
            let near = |c_lon: f64, c_lat: f64, r_lon: f64, r_lat: f64| {
                ((lon - c_lon) / r_lon).powi(2) + ((lat - c_lat) / r_lat).powi(2) <= 1.0
            };
            let c = if lat > hairline || lon.abs() > 95.0 && lat > -20.0 {
                hair
            } else if near(-18.0, 12.0, 6.0, 3.0) || near(18.0, 12.0, 6.0, 3.0) {
                if near(-18.0, 12.0, 2.5, 2.5) || near(18.0, 12.0, 2.5, 2.5) {
                    [0.05, 0.04, 0.03]
                } else {
                    [0.85, 0.85, 0.82]
                }
            } else if near(-18.0, 17.5, 8.0, 1.2) || near(18.0, 17.5, 8.0, 1.2) {
                hair
            } else if near(0.0, -28.0, 13.0, 4.0) {
                [skin[0] * 0.8, skin[1] * 0.45, skin[2] * 0.45]
            } else {
                skin
            };
            texels.push(c.map(|v| v * shade));
        }
    }
    Texture {
        width: TEXTURE_SIZE,
        height: TEXTURE_SIZE,
        texels,
    }
}

/// Ellipsoid test head with procedural landmarks and texture.
///
/// `detail` controls tessellation (`2*detail + 2` stacks, `4*detail` slices).
/// The seed only changes skin/hair colors and sub-degree landmark jitter.
pub fn make_test_head(seed: u64, detail: u32) -> Result<FaceModel, AssetError> {
    if detail < 1 {
        return Err(AssetError::Validation("detail level must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stacks = 2 * detail as usize + 2;
    let slices = 4 * detail as usize;
    let mut mesh = ellipsoid_mesh(Vector3::zeros(), HEAD_RADII, stacks, slices, None);

    let landmarks = landmark_layout()
        .into_iter()
        .enumerate()
        .map(|(i, (lon, lat, region))| {
            let lon = lon + rng.gen_range(-LANDMARK_JITTER_DEG..=LANDMARK_JITTER_DEG);
            let lat = lat + rng.gen_range(-LANDMARK_JITTER_DEG..=LANDMARK_JITTER_DEG);
            Landmark {
                index: i as u8,
                position: ellipsoid_point(HEAD_RADII, direction(lon, lat)),
                region,
            }
        })
        .collect();
    mesh.texture = Some(Arc::new(head_texture(&mut rng)));
    mesh.color = [0.7, 0.5, 0.4];
    FaceModel {
        id: format!("test_head_{seed}"),
        mesh,
        landmarks,
    }
    .validate()
}

/// Eye-region landmark centroid of the layout, for sizing props.
fn layout_region_centroid(region: Region) -> Vector3<f64> {
    let pts: Vec<_> = landmark_layout()
        .into_iter()
        .filter(|(_, _, r)| *r == region)
        .map(|(lon, lat, _)| ellipsoid_point(HEAD_RADII, direction(lon, lat)))
        .collect();
    super::centroid(pts.iter())
}

const PROP_COLORS: [[f32; 3]; 6] = [
    [0.6, 0.08, 0.06],
    [0.08, 0.15, 0.5],
    [0.85, 0.85, 0.8],
    [0.1, 0.35, 0.12],
    [0.7, 0.55, 0.1],
    [0.25, 0.25, 0.28],
];

/// Procedural occluder prop. Geometry is relative to the anchor region's
/// landmark centroid of a canonical head; `variant` changes color and size.
pub fn make_occluder(kind: OccluderKind, variant: u32) -> OccluderMesh {
    let size = 1.0 + 0.05 * (variant % 3) as f64;
    let color = PROP_COLORS[(variant as usize + kind as usize) % PROP_COLORS.len()];
    let head_center = -layout_region_centroid(Region::Head);
    let mut mesh = match kind {
        OccluderKind::Sunglasses => {
            let eye = layout_region_centroid(Region::Eye);
            let dx = 0.036 * size;
            let lens = |x: f64| ellipsoid_mesh(Vector3::new(x, 0.0, 0.014), [0.024 * size, 0.017 * size, 0.006], 6, 12, None);
            let bridge = box_mesh(Vector3::new(0.0, 0.006, 0.016), [0.012, 0.003, 0.003]);
            // Temples run back along the sides of the head, just outside it.
            let side = HEAD_RADII[0] * (1.0 - (eye.y / HEAD_RADII[1]).powi(2)).sqrt() + 0.004;
            let temple = |s: f64| box_mesh(Vector3::new(s * side, 0.004, -0.04), [0.003, 0.003, 0.05]);
            let mut m = merge(vec![lens(-dx), lens(dx), bridge, temple(-1.0), temple(1.0)]);
            m.color = [0.03, 0.03, 0.035];
            m
        }
        OccluderKind::Hat => {
            let r = [HEAD_RADII[0] * 1.12 * size, HEAD_RADII[2] * 1.1 * size];
            let c = [head_center.x, head_center.z];
            let crown = cylinder_mesh(c, r, -0.01, 0.1, 24);
            let brim = cylinder_mesh([c[0], c[1] + 0.03], [r[0] * 1.45, r[1] * 1.6], -0.012, -0.002, 24);
            merge(vec![crown, brim])
        }
        OccluderKind::Helmet => {
            let r = [HEAD_RADII[0] * 1.18 * size, HEAD_RADII[1] * 1.12 * size, HEAD_RADII[2] * 1.15 * size];
            ellipsoid_mesh(head_center, r, 8, 24, Some(22.0))
        }
        OccluderKind::Generic => box_mesh(Vector3::new(0.0, 0.0, 0.025), [0.08 * size, 0.05 * size, 0.015]),
    };
    mesh.uvs.clear();
    mesh.color = if kind == OccluderKind::Sunglasses { mesh.color } else { color };
    OccluderMesh {
        id: format!("{}_{variant}", kind.as_str()),
        kind,
        mesh,
    }
}

/// Smooth 2D value noise on a periodic lattice (period `px` in x).
struct ValueNoise {
    grid: Vec<f32>,
    px: usize,
    py: usize,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, px: usize, py: usize) -> Self {
        Self {
            grid: (0..px * py).map(|_| rng.gen()).collect(),
            px,
            py,
        }
    }

    /// `u` wraps in `[0, 1)`, `v` clamps in `[0, 1]`.
    fn at(&self, u: f64, v: f64) -> f32 {
        let x = u.rem_euclid(1.0) * self.px as f64;
        let y = (v.clamp(0.0, 1.0) * (self.py - 1) as f64).min((self.py - 1) as f64);
        let (x0, y0) = (x.floor() as usize % self.px, y.floor() as usize);
        let (x1, y1) = ((x0 + 1) % self.px, (y0 + 1).min(self.py - 1));
        let (fx, fy) = ((x - x.floor()) as f32, (y - y.floor()) as f32);
        let s = |t: f32| t * t * (3.0 - 2.0 * t);
        let (fx, fy) = (s(fx), s(fy));
        let g = |x: usize, y: usize| self.grid[y * self.px + x];
        let top = g(x0, y0) * (1.0 - fx) + g(x1, y0) * fx;
        let bot = g(x0, y1) * (1.0 - fx) + g(x1, y1) * fx;
        top * (1.0 - fy) + bot * fy
    }
}

fn lerp3(a: [f32; 3], b: [f32; 3], t: f32) -> [f32; 3] {
    [0, 1, 2].map(|i| a[i] + (b[i] - a[i]) * t)
}

/// Procedural equirectangular panorama (`2*height` by `height`).
///
/// Outdoor maps have a sky gradient with a sun, clouds and a skyline over
/// textured ground; indoor maps have paneled walls, a lit ceiling and a floor.
pub fn make_test_environment(seed: u64, height: usize, indoor: bool) -> Environment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_0E4F);
    let width = 2 * height;
    let fine = ValueNoise::new(&mut rng, 64, 32);
    let coarse = ValueNoise::new(&mut rng, 12, 6);
    let mut texels = Vec::with_capacity(width * height);

    if indoor {
        let wall_a = PROP_COLORS[rng.gen_range(0..PROP_COLORS.len())];
        let wall_b = [rng.gen_range(0.5..0.9f32), rng.gen_range(0.5..0.9), rng.gen_range(0.45..0.85)];
        let floor = [rng.gen_range(0.15..0.4f32), rng.gen_range(0.1..0.3), rng.gen_range(0.05..0.2)];
        let lamp = rng.gen_range(4.0..12.0f32);
        let panels = rng.gen_range(4..10usize);
        for row in 0..height {
            let v = (row as f64 + 0.5) / height as f64;
            let lat = 90.0 - 180.0 * v;
            for col in 0..width {
                let u = (col as f64 + 0.5) / width as f64;
                let n = fine.at(u, v);
                let c = if lat > 55.0 {
                    let lit = ((u * 8.0).fract() - 0.5).abs() < 0.12 && lat > 65.0;
                    if lit {
                        [lamp, lamp * 0.95, lamp * 0.85]
                    } else {
                        [0.8 * n + 0.2; 3]
                    }
                } else if lat < -25.0 {
                    let check = ((u * 48.0) as i64 + ((lat / 6.0) as i64)).rem_euclid(2) as f32;
                    floor.map(|f| f * (0.8 + 0.3 * check) * (0.8 + 0.4 * n))
                } else {
                    let panel = (u * panels as f64) as usize % 2;
                    let base = if panel == 0 { wall_a } else { wall_b };
                    let window = ((u * panels as f64).fract() - 0.5).abs() < 0.2 && (0.0..30.0).contains(&lat) && panel == 1;
                    if window {
                        [2.5 + n, 2.6 + n, 3.0 + n]
                    } else {
                        base.map(|b| b * (0.6 + 0.5 * coarse.at(u, v)) * (0.85 + 0.3 * n))
                    }
                };
                texels.push(c);
            }
        }
    } else {
        let zenith = [rng.gen_range(0.1..0.3f32), rng.gen_range(0.25..0.45), rng.gen_range(0.6..1.0)];
        let horizon = [rng.gen_range(0.7..1.0f32), rng.gen_range(0.75..1.0), rng.gen_range(0.8..1.1)];
        let ground = [rng.gen_range(0.1..0.35f32), rng.gen_range(0.12..0.35), rng.gen_range(0.05..0.2)];
        let sun_dir = direction(rng.gen_range(-180.0..180.0), rng.gen_range(15.0..65.0));
        let sun_power = rng.gen_range(20.0..80.0f32);
        let cloudiness = rng.gen_range(0.0..0.8f32);
        let skyline: Vec<f64> = (0..48).map(|_| rng.gen_range(0.0..14.0)).collect();
        for row in 0..height {
            let v = (row as f64 + 0.5) / height as f64;
            let lat = 90.0 - 180.0 * v;
            for col in 0..width {
                let u = (col as f64 + 0.5) / width as f64;
                let n = fine.at(u, v);
                let building = skyline[(u * skyline.len() as f64) as usize % skyline.len()];
                let c = if lat >= 0.0 && lat < building {
                    let lit = ((u * 300.0).fract() < 0.3 && (lat * 0.8).fract() < 0.4) as u8 as f32;
                    [0.15 + 0.3 * lit, 0.14 + 0.25 * lit, 0.13 + 0.1 * lit].map(|x| x * (0.7 + 0.6 * n))
                } else if lat >= 0.0 {
                    let t = (lat / 90.0).sqrt() as f32;
                    let mut c = lerp3(horizon, zenith, t);
                    let cloud = ((coarse.at(u * 2.0, v) + 0.5 * n) / 1.5 - (1.0 - cloudiness)).max(0.0) * 2.0;
                    c = lerp3(c, [1.1, 1.1, 1.1], cloud.min(1.0));
                    let d = direction(360.0 * u - 180.0, lat);
                    let cosang = d.dot(&sun_dir);
                    if cosang > 0.999 {
                        c = c.map(|x| x + sun_power);
                    } else {
                        let glow = (((cosang - 0.9) / 0.099).max(0.0) as f32).powi(4);
                        c = c.map(|x| x + 1.5 * glow);
                    }
                    c
                } else {
                    let g = 0.6 + 0.5 * coarse.at(u * 3.0, v) + 0.3 * n;
                    ground.map(|x| x * g)
                };
                texels.push(c);
            }
        }
    }

    Environment {
        id: format!("{}_{seed}", if indoor { "indoor" } else { "outdoor" }),
        width,
        height,
        texels,
        is_indoor: indoor,
    }
}
