/// Instance id of pixels no triangle covers.
pub const NO_INSTANCE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct Framebuffer {
    pub width: usize,
    pub height: usize,
    /// Linear RGB, row-major.
    pub color: Vec<[f32; 3]>,
    /// Meters along the view axis; infinite on background pixels.
    pub depth: Vec<f32>,
    pub instance_id: Vec<u32>,
}

impl Framebuffer {
    pub fn new(width: usize, height: usize) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            color: vec![[0.0; 3]; n],
            depth: vec![f32::INFINITY; n],
            instance_id: vec![NO_INSTANCE; n],
        }
    }

    pub fn count_instance(&self, id: u32) -> usize {
        self.instance_id.iter().filter(|&&i| i == id).count()
    }
}

/// Depth in millimeters as 16-bit gray; background and overflow saturate.
pub fn depth_to_png16(fb: &Framebuffer) -> image::ImageBuffer<image::Luma<u16>, Vec<u16>> {
    let data = fb
        .depth
        .iter()
        .map(|&d| if d.is_finite() { (d as f64 * 1000.0).round().min(65535.0) as u16 } else { u16::MAX })
        .collect();
    image::ImageBuffer::from_raw(fb.width as u32, fb.height as u32, data).expect("buffer size matches")
}

/// Instance ids shifted by one so that 0 means background.
pub fn instance_to_png16(fb: &Framebuffer) -> image::ImageBuffer<image::Luma<u16>, Vec<u16>> {
    let data = fb
        .instance_id
        .iter()
        .map(|&i| if i == NO_INSTANCE { 0 } else { (i + 1).min(u16::MAX as u32) as u16 })
        .collect();
    image::ImageBuffer::from_raw(fb.width as u32, fb.height as u32, data).expect("buffer size matches")
}
