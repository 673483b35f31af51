/// Linear value to an 8-bit sRGB code, clamping to [0, 1].
pub fn linear_to_srgb8(x: f32) -> u8 {
    let x = if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) };
    let s = if x <= 0.003_130_8 {
        12.92 * x
    } else {
        1.055 * x.powf(1.0 / 2.4) - 0.055
    };
    (s * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Exposure scaling and sRGB encoding to interleaved RGB bytes.
pub fn tonemap_and_encode(color: &[[f32; 3]], exposure: f32) -> Vec<u8> {
    color
        .iter()
        .flat_map(|p| p.map(|c| linear_to_srgb8(c * exposure)))
        .collect()
}
