//! Drawing annotations onto an RGB8 image.

use facegen::annotate::FaceAnnotation;

pub const BOX_COLOR: [u8; 3] = [0, 255, 0];
pub const IGNORED_COLOR: [u8; 3] = [255, 0, 0];
pub const LANDMARK_COLOR: [u8; 3] = [255, 255, 0];

fn put(rgb: &mut [u8], width: u32, height: u32, x: i64, y: i64, c: [u8; 3]) {
    if x < 0 || y < 0 || x >= width as i64 || y >= height as i64 {
        return;
    }
    let i = (y as usize * width as usize + x as usize) * 3;
    rgb[i..i + 3].copy_from_slice(&c);
}

/// One-pixel outline on columns `x`, `x+w-1` and rows `y`, `y+h-1`.
pub fn draw_box(rgb: &mut [u8], width: u32, height: u32, b: &facegen::BBox, c: [u8; 3]) {
    if b.w < 1.0 || b.h < 1.0 {
        return;
    }
    let (x0, y0) = (b.x as i64, b.y as i64);
    let (x1, y1) = (x0 + b.w as i64 - 1, y0 + b.h as i64 - 1);
    for x in x0..=x1 {
        put(rgb, width, height, x, y0, c);
        put(rgb, width, height, x, y1, c);
    }
    for y in y0..=y1 {
        put(rgb, width, height, x0, y, c);
        put(rgb, width, height, x1, y, c);
    }
}

/// Landmarks first, then ignored boxes, then kept boxes on top.
pub fn draw_overlay(
    rgb: &mut [u8],
    width: u32,
    height: u32,
    annotations: &[FaceAnnotation],
    landmarks: &[Vec<Option<[f64; 2]>>],
) {
    for p in landmarks.iter().flatten().flatten() {
        let (cx, cy) = (p[0].floor() as i64, p[1].floor() as i64);
        for dy in -1..=1 {
            for dx in -1..=1 {
                put(rgb, width, height, cx + dx, cy + dy, LANDMARK_COLOR);
            }
        }
    }
    for ignored in [true, false] {
        let c = if ignored { IGNORED_COLOR } else { BOX_COLOR };
        for a in annotations.iter().filter(|a| a.ignored == ignored) {
            draw_box(rgb, width, height, &a.bbox, c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use facegen::BBox;

    #[test]
    fn box_outline_hits_the_edge_pixels() {
        let (w, h) = (10, 8);
        let mut rgb = vec![0u8; w * h * 3];
        draw_box(&mut rgb, w as u32, h as u32, &BBox::new(2.0, 1.0, 4.0, 3.0), BOX_COLOR);
        let at = |x: usize, y: usize| &rgb[(y * w + x) * 3..(y * w + x) * 3 + 3];
        for (x, y) in [(2, 1), (5, 1), (2, 3), (5, 3), (3, 1), (2, 2)] {
            assert_eq!(at(x, y), BOX_COLOR, "({x},{y})");
        }
        for (x, y) in [(3, 2), (4, 2), (6, 1), (2, 4), (1, 1)] {
            assert_eq!(at(x, y), [0, 0, 0], "({x},{y})");
        }
    }

    #[test]
    fn boxes_clip_at_the_border() {
        let mut rgb = vec![0u8; 4 * 4 * 3];
        draw_box(&mut rgb, 4, 4, &BBox::new(2.0, 2.0, 10.0, 10.0), BOX_COLOR);
        assert_eq!(&rgb[(2 * 4 + 2) * 3..(2 * 4 + 2) * 3 + 3], BOX_COLOR);
        draw_box(&mut rgb, 4, 4, &BBox::new(0.0, 0.0, 0.0, 0.0), IGNORED_COLOR);
        assert!(!rgb.chunks(3).any(|p| p == IGNORED_COLOR));
    }
}
