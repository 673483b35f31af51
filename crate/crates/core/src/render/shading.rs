use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;

use super::Lighting;
use crate::assets::Environment;

/// Equirectangular texture coordinates of a unit direction.
fn dir_to_uv(d: &Vector3<f64>) -> (f64, f64) {
    let u = 0.5 + d.x.atan2(-d.z) / TAU;
    let v = d.y.clamp(-1.0, 1.0).acos() / PI;
    (u, v)
}

/// Bilinear environment sample; wraps horizontally, clamps vertically.
pub fn env_lookup(env: &Environment, direction: &Vector3<f64>) -> [f32; 3] {
    let (u, v) = dir_to_uv(direction);
    let x = u * env.width as f64 - 0.5;
    let y = (v * env.height as f64 - 0.5).clamp(0.0, (env.height - 1) as f64);
    let x0 = x.floor();
    let fx = (x - x0) as f32;
    let y0 = y.floor();
    let fy = (y - y0) as f32;
    let w = env.width as i64;
    let xa = (x0 as i64).rem_euclid(w) as usize;
    let xb = (x0 as i64 + 1).rem_euclid(w) as usize;
    let ya = y0 as usize;
    let yb = (ya + 1).min(env.height - 1);
    let (a, b, c, d) = (env.texel(xa, ya), env.texel(xb, ya), env.texel(xa, yb), env.texel(xb, yb));
    [0, 1, 2].map(|i| {
        let top = a[i] + (b[i] - a[i]) * fx;
        let bot = c[i] + (d[i] - c[i]) * fx;
        top + (bot - top) * fy
    })
}

const Y00: f64 = 0.282_094_791_773_878_1;
const Y1: f64 = 0.488_602_511_902_919_9;
const Y2: f64 = 1.092_548_430_592_079_2;
const Y20: f64 = 0.315_391_565_252_520_05;
const Y22: f64 = 0.546_274_215_296_039_6;

fn sh_basis(n: &Vector3<f64>) -> [f64; 9] {
    let (x, y, z) = (n.x, n.y, n.z);
    [
        Y00,
        Y1 * y,
        Y1 * z,
        Y1 * x,
        Y2 * x * y,
        Y2 * y * z,
        Y20 * (3.0 * z * z - 1.0),
        Y2 * x * z,
        Y22 * (x * x - y * y),
    ]
}

/// Order-2 (9-coefficient) irradiance of an environment, scaled by `1/pi`
/// so a constant radiance `c` gives `c` for every normal.
#[derive(Debug, Clone, PartialEq)]
pub struct ShIrradiance {
    /// Band-convolved coefficients per channel.
    coeffs: [[f64; 3]; 9],
    mean_radiance: [f32; 3],
}

impl ShIrradiance {
    /// Projects the environment, treated as piecewise constant over its
    /// texels, by integrating each basis function exactly over every texel's
    /// solid angle.
    pub fn from_environment(env: &Environment) -> Self {
        let (w, h) = (env.width, env.height);
        // Per-row polar integrals (measure sin(theta) dtheta).
        let rows: Vec<[f64; 6]> = (0..h)
            .map(|j| {
                let (t0, t1) = (PI * j as f64 / h as f64, PI * (j + 1) as f64 / h as f64);
                let t_1 = t0.cos() - t1.cos();
                let t_c = 0.5 * (t1.sin().powi(2) - t0.sin().powi(2));
                let t_cc = (t0.cos().powi(3) - t1.cos().powi(3)) / 3.0;
                let t_ss = t_1 - t_cc;
                let t_s = (t1 - t0) / 2.0 - ((2.0 * t1).sin() - (2.0 * t0).sin()) / 4.0;
                let t_sc = (t1.sin().powi(3) - t0.sin().powi(3)) / 3.0;
                [t_1, t_c, t_cc, t_ss, t_s, t_sc]
            })
            .collect();
        // Per-column azimuth integrals.
        let cols: Vec<[f64; 6]> = (0..w)
            .map(|i| {
                let (p0, p1) = (TAU * i as f64 / w as f64 - PI, TAU * (i + 1) as f64 / w as f64 - PI);
                let p_1 = p1 - p0;
                let p_s = p0.cos() - p1.cos();
                let p_c = p1.sin() - p0.sin();
                let p_ss = p_1 / 2.0 - ((2.0 * p1).sin() - (2.0 * p0).sin()) / 4.0;
                let p_cc = p_1 / 2.0 + ((2.0 * p1).sin() - (2.0 * p0).sin()) / 4.0;
                let p_sc = 0.5 * (p1.sin().powi(2) - p0.sin().powi(2));
                [p_1, p_s, p_c, p_ss, p_cc, p_sc]
            })
            .collect();

        let mut l = [[0.0f64; 3]; 9];
        for (j, r) in rows.iter().enumerate() {
            let [t_1, t_c, t_cc, t_ss, t_s, t_sc] = *r;
            for (i, c) in cols.iter().enumerate() {
                let [p_1, p_s, p_c, p_ss, p_cc, p_sc] = *c;
                // Direction (sin t sin p, cos t, -sin t cos p).
                let one = t_1 * p_1;
                let x = t_s * p_s;
                let y = t_c * p_1;
                let z = -t_s * p_c;
                let xy = t_sc * p_s;
                let yz = -t_sc * p_c;
                let xz = -t_ss * p_sc;
                let xx = t_ss * p_ss;
                let zz = t_ss * p_cc;
                let yy = t_cc * p_1;
                let basis = [
                    Y00 * one,
                    Y1 * y,
                    Y1 * z,
                    Y1 * x,
                    Y2 * xy,
                    Y2 * yz,
                    Y20 * (3.0 * zz - one),
                    Y2 * xz,
                    Y22 * (xx - yy),
                ];
                let rad = env.texel(i, j);
                for (k, b) in basis.iter().enumerate() {
                    for ch in 0..3 {
                        l[k][ch] += rad[ch] as f64 * b;
                    }
                }
            }
        }

        // Cosine-lobe band factors divided by pi: 1, 2/3, 1/4.
        let band = [1.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 0.25, 0.25, 0.25, 0.25, 0.25];
        let mut coeffs = l;
        for (c, f) in coeffs.iter_mut().zip(band) {
            for ch in c.iter_mut() {
                *ch *= f;
            }
        }
        let mean_radiance = l[0].map(|v| (v * Y00) as f32);
        Self { coeffs, mean_radiance }
    }

    /// Normalized irradiance for a unit normal, clamped at zero.
    pub fn irradiance(&self, normal: &Vector3<f64>) -> [f32; 3] {
        let b = sh_basis(normal);
        let mut e = [0.0f64; 3];
        for (c, bk) in self.coeffs.iter().zip(b) {
            for ch in 0..3 {
                e[ch] += c[ch] * bk;
            }
        }
        e.map(|v| v.max(0.0) as f32)
    }

    /// Solid-angle weighted mean radiance.
    pub fn mean_radiance(&self) -> [f32; 3] {
        self.mean_radiance
    }
}

/// Diffuse shading of `albedo` under the environment's lighting.
pub fn shade(albedo: [f32; 3], normal: &Vector3<f64>, sh: &ShIrradiance, mode: Lighting) -> [f32; 3] {
    let e = match mode {
        Lighting::ShIrradiance => sh.irradiance(normal),
        Lighting::AmbientOnly => sh.mean_radiance(),
    };
    [albedo[0] * e[0], albedo[1] * e[1], albedo[2] * e[2]]
}
