/// Per-output-sample source taps along one axis.
fn weights(src: usize, dst: usize) -> Vec<Vec<(usize, f32)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|o| {
            if dst < src {
                // Box filter over the footprint [o*s, (o+1)*s).
                let lo = o as f64 * scale;
                let hi = (o + 1) as f64 * scale;
                let mut taps = Vec::new();
                let mut k = lo.floor() as usize;
                while (k as f64) < hi && k < src {
                    let overlap = (hi.min(k as f64 + 1.0) - lo.max(k as f64)).max(0.0);
                    if overlap > 0.0 {
                        taps.push((k, (overlap / scale) as f32));
                    }
                    k += 1;
                }
                taps
            } else {
                let x = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
                let x0 = x.floor() as usize;
                let x1 = (x0 + 1).min(src - 1);
                let t = (x - x0 as f64) as f32;
                if x1 == x0 || t == 0.0 {
                    vec![(x0, 1.0)]
                } else {
                    vec![(x0, 1.0 - t), (x1, t)]
                }
            }
        })
        .collect()
}

/// Separable resize of a linear RGB image: area averaging along shrinking
/// axes, bilinear interpolation along enlarging ones.
pub fn resample(src: &[[f32; 3]], sw: usize, sh: usize, dw: usize, dh: usize) -> Vec<[f32; 3]> {
    assert_eq!(src.len(), sw * sh);
    if sw == dw && sh == dh {
        return src.to_vec();
    }
    let wx = weights(sw, dw);
    let wy = weights(sh, dh);
    let mut rows = vec![[0.0f32; 3]; dw * sh];
    for y in 0..sh {
        let line = &src[y * sw..(y + 1) * sw];
        for (x, taps) in wx.iter().enumerate() {
            let mut acc = [0.0f32; 3];
            for &(k, w) in taps {
                for c in 0..3 {
                    acc[c] += line[k][c] * w;
                }
            }
            rows[y * dw + x] = acc;
        }
    }
    let mut out = vec![[0.0f32; 3]; dw * dh];
    for (y, taps) in wy.iter().enumerate() {
        for x in 0..dw {
            let mut acc = [0.0f32; 3];
            for &(k, w) in taps {
                for c in 0..3 {
                    acc[c] += rows[k * dw + x][c] * w;
                }
            }
            out[y * dw + x] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pattern(w: usize, h: usize) -> Vec<[f32; 3]> {
        (0..w * h)
            .map(|i| {
                let (x, y) = ((i % w) as f32, (i / w) as f32);
                [(x * 0.37 + y * 0.11).sin().abs(), (x * y * 0.01).fract(), ((x + y) % 7.0) / 7.0]
            })
            .collect()
    }

    #[test]
    fn same_size_is_identity() {
        let img = pattern(12, 9);
        assert_eq!(resample(&img, 12, 9, 12, 9), img);
    }

    #[test]
    fn halving_is_block_average() {
        let (w, h) = (16, 12);
        let img = pattern(w, h);
        let out = resample(&img, w, h, 8, 6);
        for y in 0..6 {
            for x in 0..8 {
                for c in 0..3 {
                    let s: f32 = [(0, 0), (1, 0), (0, 1), (1, 1)]
                        .iter()
                        .map(|(dx, dy)| img[(2 * y + dy) * w + 2 * x + dx][c])
                        .sum();
                    assert!((out[y * 8 + x][c] - s / 4.0).abs() < 1.0 / 255.0);
                }
            }
        }
    }

    #[test]
    fn upsampling_interpolates() {
        let img = vec![[0.0; 3], [1.0; 3]];
        let out = resample(&img, 2, 1, 4, 1);
        let r: Vec<f32> = out.iter().map(|p| p[0]).collect();
        assert_eq!(r, vec![0.0, 0.25, 0.75, 1.0]);
    }

    proptest! {
        #[test]
        fn constant_stays_constant(sw in 2usize..40, sh in 2usize..30, dw in 1usize..40, dh in 1usize..30, v in 0.0f32..4.0) {
            let img = vec![[v; 3]; sw * sh];
            for p in resample(&img, sw, sh, dw, dh) {
                prop_assert!((p[0] - v).abs() <= 1e-5 * v.max(1.0));
            }
        }

        #[test]
        fn downsampling_preserves_mean(sw in 8usize..60, sh in 8usize..40, fx in 0.1f64..1.0, fy in 0.1f64..1.0) {
            let dw = ((sw as f64 * fx) as usize).max(1);
            let dh = ((sh as f64 * fy) as usize).max(1);
            let img = pattern(sw, sh);
            let out = resample(&img, sw, sh, dw, dh);
            let mean = |v: &[[f32; 3]]| v.iter().map(|p| p[0] as f64).sum::<f64>() / v.len() as f64;
            let (a, b) = (mean(&img), mean(&out));
            prop_assert!((a - b).abs() <= 0.01 * a.max(1e-3), "{} vs {}", a, b);
        }
    }
}
