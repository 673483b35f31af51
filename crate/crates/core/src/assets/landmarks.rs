//! Landmark text files: a `count 50` header, then `index x y z region` lines.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use super::{AssetError, Landmark, Region};

pub const LANDMARK_COUNT: usize = 50;

pub fn parse_landmarks(text: &str, path: &Path) -> Result<Vec<Landmark>, AssetError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| AssetError::parse(path, 1, "empty landmark file"))?;
    let declared: usize = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["count", n] => n
            .parse()
            .map_err(|_| AssetError::parse(path, hline, format!("invalid landmark count `{n}`")))?,
        _ => return Err(AssetError::parse(path, hline, "expected header `count <n>`")),
    };

    let mut out = Vec::with_capacity(LANDMARK_COUNT);
    for (lineno, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(AssetError::parse(
                path,
                lineno,
                format!("expected `index x y z region`, got {} fields", f.len()),
            ));
        }
        let index: u8 = f[0]
            .parse()
            .map_err(|_| AssetError::parse(path, lineno, format!("invalid landmark index `{}`", f[0])))?;
        let mut xyz = [0.0; 3];
        for (k, slot) in xyz.iter_mut().enumerate() {
            *slot = f[k + 1]
                .parse()
                .map_err(|_| AssetError::parse(path, lineno, format!("invalid coordinate `{}`", f[k + 1])))?;
        }
        let region: Region = f[4].parse().map_err(|m: String| AssetError::parse(path, lineno, m))?;
        out.push(Landmark {
            index,
            position: Vector3::from(xyz),
            region,
        });
    }

    if declared != LANDMARK_COUNT || out.len() != LANDMARK_COUNT {
        return Err(AssetError::Validation(format!(
            "expected {LANDMARK_COUNT} landmarks, found {} (header declares {declared})",
            out.len()
        )));
    }
    Ok(out)
}

pub fn write_landmarks(landmarks: &[Landmark]) -> String {
    let mut out = format!("count {}\n", landmarks.len());
    for l in landmarks {
        let p = l.position;
        let _ = writeln!(out, "{} {} {} {} {}", l.index, p.x, p.y, p.z, l.region);
    }
    out
}
