use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{FaceAnnotation, OcclusionLevel, ScaleBin};
use crate::bbox::BBox;
use crate::geometry::Pose;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

/// One face line of a WIDER-style file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WiderFace {
    pub bbox: BBox,
    pub occlusion: OcclusionLevel,
    pub ignored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WiderImage {
    pub path: String,
    pub faces: Vec<WiderFace>,
}

/// Per image: path line, count line, then `x y w h occlusion ignored`.
pub fn write_wider(images: &[WiderImage]) -> String {
    let mut out = String::new();
    for img in images {
        let _ = writeln!(out, "{}", img.path);
        let _ = writeln!(out, "{}", img.faces.len());
        for f in &img.faces {
            let b = f.bbox;
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                b.x,
                b.y,
                b.w,
                b.h,
                f.occlusion.flag(),
                f.ignored as u8
            );
        }
    }
    out
}

pub fn read_wider(text: &str) -> Result<Vec<WiderImage>, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut images = Vec::new();
    while let Some((_, path)) = lines.next() {
        let (ln, count) = lines
            .next()
            .ok_or_else(|| parse_err(text.lines().count(), format!("missing face count after `{path}`")))?;
        let count: usize = count
            .parse()
            .map_err(|_| parse_err(ln, format!("expected a face count, found `{count}`")))?;
        let mut faces = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| parse_err(text.lines().count(), format!("`{path}` declares {count} faces")))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 6 {
                return Err(parse_err(ln, format!("expected `x y w h occlusion ignored`, found {} fields", f.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| parse_err(ln, format!("bad number `{s}`")));
            let bbox = BBox::new(num(f[0])?, num(f[1])?, num(f[2])?, num(f[3])?);
            let occlusion = f[4]
                .parse::<u8>()
                .ok()
                .and_then(OcclusionLevel::from_flag)
                .ok_or_else(|| parse_err(ln, format!("bad occlusion flag `{}`", f[4])))?;
            let ignored = match f[5] {
                "0" => false,
                "1" => true,
                other => return Err(parse_err(ln, format!("bad ignored flag `{other}`"))),
            };
            faces.push(WiderFace {
                bbox,
                occlusion,
                ignored,
            });
        }
        images.push(WiderImage {
            path: path.to_string(),
            faces,
        });
    }
    Ok(images)
}

impl From<&FaceAnnotation> for WiderFace {
    fn from(a: &FaceAnnotation) -> Self {
        WiderFace {
            bbox: a.bbox,
            occlusion: a.occlusion_level,
            ignored: a.ignored,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoAnnotation {
    pub id: u64,
    pub image_id: u64,
    pub category_id: u32,
    /// `[x, y, w, h]`.
    pub bbox: [f64; 4],
    pub area: f64,
    pub iscrowd: u8,
    pub ignore: u8,
    pub occlusion: OcclusionLevel,
    pub visibility: f64,
    pub scale_bin: ScaleBin,
    pub pose: Pose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoCategory {
    pub id: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoDataset {
    pub images: Vec<CocoImage>,
    pub annotations: Vec<CocoAnnotation>,
    pub categories: Vec<CocoCategory>,
}

impl CocoDataset {
    /// Boxes per image id, in annotation order.
    pub fn boxes_of(&self, image_id: u64) -> Vec<BBox> {
        self.annotations
            .iter()
            .filter(|a| a.image_id == image_id)
            .map(|a| BBox::new(a.bbox[0], a.bbox[1], a.bbox[2], a.bbox[3]))
            .collect()
    }
}

/// Build a COCO document. Each entry is an image with its annotations;
/// annotation ids are assigned sequentially from 1.
pub fn write_coco(images: &[(CocoImage, Vec<FaceAnnotation>)]) -> CocoDataset {
    let mut annotations = Vec::new();
    for (img, anns) in images {
        for a in anns {
            annotations.push(CocoAnnotation {
                id: annotations.len() as u64 + 1,
                image_id: img.id,
                category_id: 1,
                bbox: [a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h],
                area: a.bbox.area(),
                iscrowd: 0,
                ignore: a.ignored as u8,
                occlusion: a.occlusion_level,
                visibility: a.visibility,
                scale_bin: a.scale_bin,
                pose: a.pose,
            });
        }
    }
    CocoDataset {
        images: images.iter().map(|(i, _)| i.clone()).collect(),
        annotations,
        categories: vec![CocoCategory {
            id: 1,
            name: "face".into(),
        }],
    }
}

pub fn read_coco(text: &str) -> Result<CocoDataset, FormatError> {
    Ok(serde_json::from_str(text)?)
}
