//! Radiance RGBE (`.hdr`) reading and writing.
//!
//! A channel decodes as `mantissa / 256 * 2^(exponent - 128)`, with no
//! half-step mantissa bias; an exponent byte of zero is black. Flat, old-style
//! run-length and adaptive run-length scanlines are all accepted.

use std::io::Write;
use std::path::Path;

use super::{AssetError, Environment};

pub fn decode_rgbe(p: [u8; 4]) -> [f32; 3] {
    if p[3] == 0 {
        return [0.0; 3];
    }
    let scale = 2f64.powi(p[3] as i32 - 128 - 8);
    [p[0], p[1], p[2]].map(|m| (m as f64 * scale) as f32)
}

/// Reference encoder: the largest channel gets a mantissa in `[128, 255]`.
pub fn encode_rgbe(c: [f32; 3]) -> [u8; 4] {
    let max = c[0].max(c[1]).max(c[2]) as f64;
    if !(max > 0.0) {
        return [0; 4];
    }
    let (_, e) = frexp(max);
    if e + 128 > 255 {
        return [255, 255, 255, 255];
    }
    if e + 128 < 1 {
        return [0; 4];
    }
    let scale = 256.0 / 2f64.powi(e);
    let m = c.map(|v| (v.max(0.0) as f64 * scale).floor().min(255.0) as u8);
    [m[0], m[1], m[2], (e + 128) as u8]
}

/// `x = f * 2^e` with `f` in `[0.5, 1)`, for positive finite `x`.
fn frexp(x: f64) -> (f64, i32) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp == 0 {
        let (f, e) = frexp(x * 2f64.powi(64));
        return (f, e - 64);
    }
    let f = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (f, exp - 1022)
}

/// Decode an HDR byte stream into `(width, height, texels)`.
pub fn read_hdr(bytes: &[u8], path: &Path) -> Result<(usize, usize, Vec<[f32; 3]>), AssetError> {
    let mut pos = 0usize;
    let next_line = |pos: &mut usize| -> Option<&[u8]> {
        if *pos >= bytes.len() {
            return None;
        }
        let start = *pos;
        let end = bytes[start..].iter().position(|&b| b == b'\n').map_or(bytes.len(), |i| start + i);
        *pos = (end + 1).min(bytes.len() + 1);
        Some(&bytes[start..end])
    };

    let magic = next_line(&mut pos).unwrap_or_default();
    if !(magic.starts_with(b"#?RADIANCE") || magic.starts_with(b"#?RGBE")) {
        return Err(AssetError::parse(path, 1, "bad magic: expected `#?RADIANCE` or `#?RGBE`"));
    }
    let mut header_lines = 1;
    loop {
        let Some(line) = next_line(&mut pos) else {
            return Err(AssetError::parse(path, header_lines, "truncated header"));
        };
        header_lines += 1;
        if line.is_empty() {
            break;
        }
        if let Some(fmt) = line.strip_prefix(b"FORMAT=") {
            if fmt != b"32-bit_rle_rgbe" {
                return Err(AssetError::parse(
                    path,
                    header_lines,
                    format!("unsupported pixel format `{}`", String::from_utf8_lossy(fmt)),
                ));
            }
        }
    }
    let res = next_line(&mut pos).ok_or_else(|| AssetError::parse(path, header_lines + 1, "missing resolution line"))?;
    let res_line = header_lines + 1;
    let res = String::from_utf8_lossy(res);
    let f: Vec<&str> = res.split_whitespace().collect();
    let (flip, height, width) = match f.as_slice() {
        [y, h, "+X", w] if *y == "-Y" || *y == "+Y" => {
            let h: usize = h.parse().map_err(|_| AssetError::parse(path, res_line, "invalid height"))?;
            let w: usize = w.parse().map_err(|_| AssetError::parse(path, res_line, "invalid width"))?;
            (*y == "+Y", h, w)
        }
        _ => {
            return Err(AssetError::parse(
                path,
                res_line,
                format!("unsupported resolution line `{res}`"),
            ))
        }
    };
    if width == 0 || height == 0 {
        return Err(AssetError::parse(path, res_line, "empty image"));
    }

    let mut data = &bytes[pos.min(bytes.len())..];
    let mut texels = Vec::with_capacity(width * height);
    let mut scan = vec![[0u8; 4]; width];
    for row in 0..height {
        read_scanline(&mut data, &mut scan).map_err(|m| {
            AssetError::parse(path, res_line, format!("scanline {row}: {m}"))
        })?;
        texels.extend(scan.iter().map(|&p| decode_rgbe(p)));
    }
    if flip {
        let flipped: Vec<_> = texels.chunks(width).rev().flatten().copied().collect();
        texels = flipped;
    }
    Ok((width, height, texels))
}

fn take<'a>(data: &mut &'a [u8], n: usize) -> Result<&'a [u8], String> {
    if data.len() < n {
        return Err("truncated scanline".into());
    }
    let (head, tail) = data.split_at(n);
    *data = tail;
    Ok(head)
}

fn read_scanline(data: &mut &[u8], scan: &mut [[u8; 4]]) -> Result<(), String> {
    let width = scan.len();
    if (8..0x8000).contains(&width) && data.len() >= 4 && data[0] == 2 && data[1] == 2 && data[2] & 0x80 == 0 {
        let head = take(data, 4)?;
        let len = ((head[2] as usize) << 8) | head[3] as usize;
        if len != width {
            return Err(format!("run-length scanline width {len} != {width}"));
        }
        for ch in 0..4 {
            let mut x = 0;
            while x < width {
                let count = take(data, 1)?[0] as usize;
                if count > 128 {
                    let run = count - 128;
                    if x + run > width {
                        return Err("run overflows scanline".into());
                    }
                    let v = take(data, 1)?[0];
                    for p in &mut scan[x..x + run] {
                        p[ch] = v;
                    }
                    x += run;
                } else {
                    if count == 0 || x + count > width {
                        return Err("bad literal run".into());
                    }
                    for (p, &v) in scan[x..x + count].iter_mut().zip(take(data, count)?) {
                        p[ch] = v;
                    }
                    x += count;
                }
            }
        }
        return Ok(());
    }

    // Flat pixels, possibly with old-style (1,1,1,n) repeat markers.
    let mut x = 0;
    let mut shift = 0;
    while x < width {
        let p: [u8; 4] = take(data, 4)?.try_into().unwrap();
        if p[0] == 1 && p[1] == 1 && p[2] == 1 {
            if x == 0 {
                return Err("repeat marker at start of scanline".into());
            }
            let count = (p[3] as usize) << shift;
            if x + count > width {
                return Err("repeat overflows scanline".into());
            }
            let prev = scan[x - 1];
            for q in &mut scan[x..x + count] {
                *q = prev;
            }
            x += count;
            shift += 8;
        } else {
            scan[x] = p;
            x += 1;
            shift = 0;
        }
    }
    Ok(())
}

/// Encode texels as an adaptive run-length `.hdr` stream (flat scanlines
/// when the width is outside the run-length range).
pub fn write_hdr(w: &mut impl Write, width: usize, height: usize, texels: &[[f32; 3]]) -> std::io::Result<()> {
    write!(w, "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y {height} +X {width}\n")?;
    let rle = (8..0x8000).contains(&width);
    let mut buf = Vec::new();
    for row in texels.chunks(width).take(height) {
        let px: Vec<[u8; 4]> = row.iter().map(|&c| encode_rgbe(c)).collect();
        buf.clear();
        if rle {
            buf.extend_from_slice(&[2, 2, (width >> 8) as u8, (width & 0xff) as u8]);
            for ch in 0..4 {
                let chan: Vec<u8> = px.iter().map(|p| p[ch]).collect();
                encode_channel(&chan, &mut buf);
            }
        } else {
            buf.extend(px.iter().flatten());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn encode_channel(chan: &[u8], out: &mut Vec<u8>) {
    let mut i = 0;
    while i < chan.len() {
        let mut run = 1;
        while i + run < chan.len() && run < 127 && chan[i + run] == chan[i] {
            run += 1;
        }
        if run >= 3 {
            out.push(128 + run as u8);
            out.push(chan[i]);
            i += run;
            continue;
        }
        // Literal span up to the next run of 3 or more.
        let start = i;
        while i < chan.len() && i - start < 128 {
            if i + 2 < chan.len() && chan[i] == chan[i + 1] && chan[i] == chan[i + 2] {
                break;
            }
            i += 1;
        }
        out.push((i - start) as u8);
        out.extend_from_slice(&chan[start..i]);
    }
}

/// Load an equirectangular environment map; the id is the file stem.
pub fn load_environment(path: &Path) -> Result<Environment, AssetError> {
    let bytes = std::fs::read(path).map_err(|e| AssetError::io(path, e))?;
    let (width, height, texels) = read_hdr(&bytes, path)?;
    Environment {
        id: path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        width,
        height,
        texels,
        is_indoor: false,
    }
    .validate()
}
