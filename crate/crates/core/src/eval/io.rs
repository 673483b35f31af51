use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{Detection, EvalReport, GroundTruth};
use crate::annotate::{ScaleBin, WiderImage};
use crate::bbox::BBox;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Images are matched by file stem, so `images/000001.png`, `000001.jpg`
/// and `000001` name the same image.
pub fn image_key(path: &str) -> String {
    Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string())
}

/// Per image: path line, count line, then `x y w h score` lines.
pub fn read_predictions(text: &str) -> Result<Vec<Detection>, ParseError> {
    let total = text.lines().count();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut out = Vec::new();
    while let Some((_, path)) = lines.next() {
        let key = image_key(path);
        let (ln, count) = lines
            .next()
            .ok_or_else(|| err(total, format!("missing detection count after `{path}`")))?;
        let count: usize = count
            .parse()
            .map_err(|_| err(ln, format!("expected a detection count, found `{count}`")))?;
        for _ in 0..count {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| err(total, format!("`{path}` declares {count} detections")))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 5 {
                return Err(err(ln, format!("expected `x y w h score`, found {} fields", f.len())));
            }
            let mut v = [0.0; 5];
            for (slot, s) in v.iter_mut().zip(&f) {
                *slot = s
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(ln, format!("bad number `{s}`")))?;
            }
            if v[2] <= 0.0 || v[3] <= 0.0 {
                return Err(err(ln, "box width and height must be positive"));
            }
            out.push(Detection {
                image_id: key.clone(),
                bbox: BBox::new(v[0], v[1], v[2], v[3]),
                score: v[4],
            });
        }
    }
    Ok(out)
}

pub fn ground_truth_from_wider(images: &[WiderImage]) -> Vec<GroundTruth> {
    images
        .iter()
        .flat_map(|img| {
            let key = image_key(&img.path);
            img.faces.iter().map(move |f| GroundTruth {
                image_id: key.clone(),
                bbox: f.bbox,
                ignored: f.ignored,
            })
        })
        .collect()
}

/// `metric,value` rows; bins without ground truth are left blank.
pub fn report_csv(r: &EvalReport) -> String {
    let mut out = String::from("metric,value\n");
    let _ = writeln!(out, "iou_threshold,{}", r.iou_threshold);
    let _ = writeln!(out, "ap_overall,{}", r.ap_overall);
    for bin in ScaleBin::ALL {
        let v = r.ap_per_bin.get(&bin).copied().flatten();
        let _ = writeln!(out, "ap_{bin},{}", v.map(|x| x.to_string()).unwrap_or_default());
    }
    let c = r.counts;
    let _ = writeln!(out, "tp,{}", c.tp);
    let _ = writeln!(out, "fp,{}", c.fp);
    let _ = writeln!(out, "fn,{}", c.fn_);
    let _ = writeln!(out, "num_gt,{}", c.num_gt);
    let _ = writeln!(out, "ignored_detections,{}", c.ignored_detections);
    out
}

pub fn pr_curve_csv(r: &EvalReport) -> String {
    let mut out = String::from("recall,precision\n");
    for (rec, p) in &r.pr_curve {
        let _ = writeln!(out, "{rec},{p}");
    }
    out
}
