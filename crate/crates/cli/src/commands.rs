//! The `preview`, `validate-assets`, `evaluate` and `stats` commands.

use std::fs;
use std::path::{Path, PathBuf};

use facegen::annotate::{dataset_stats, read_coco, read_wider, scale_bin, FaceAnnotation};
use facegen::assets::validate_manifest;
use facegen::eval::{evaluate, ground_truth_from_wider, image_key, pr_curve_csv, read_predictions, report_csv, GroundTruth};
use facegen::pipeline::generate_image;
use facegen::BBox;

use crate::error::CliError;
use crate::generate::save_rgb;
use crate::job::{load_assets, ResolvedJob};
use crate::overlay::draw_overlay;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn preview(resolved: &ResolvedJob, index: u32, out: &Path, overlay: bool) -> Result<(), CliError> {
    let n = resolved.job.generation.num_images;
    if index >= n {
        return Err(CliError::Config(format!("image index {index} out of range (num_images = {n})")));
    }
    let assets = load_assets(&resolved.assets)?;
    let mut img = generate_image(&resolved.job, &assets, index)?;
    let mut rgb = std::mem::take(&mut img.rgb);
    if overlay {
        draw_overlay(&mut rgb, img.width, img.height, &img.annotations, &img.landmarks);
    }
    save_rgb(out, &img, rgb)
}

/// Prints one line per asset; `Ok(false)` if any failed.
pub fn validate_assets(manifest: Option<PathBuf>) -> Result<bool, CliError> {
    let path = manifest
        .or_else(|| std::env::var_os("FACEGEN_ASSETS").filter(|v| !v.is_empty()).map(PathBuf::from))
        .ok_or_else(|| CliError::Config("no manifest given and FACEGEN_ASSETS is not set".into()))?;
    let checks = validate_manifest(&path)?;
    let mut all_ok = true;
    for c in &checks {
        match &c.reason {
            None => println!("PASS {} {}", c.category, c.id),
            Some(r) => {
                all_ok = false;
                println!("FAIL {} {}: {r}", c.category, c.id);
            }
        }
    }
    let failed = checks.iter().filter(|c| !c.ok).count();
    println!("{} checked, {} failed", checks.len(), failed);
    Ok(all_ok)
}

/// Ground truth from `wider.txt`, or from a COCO `.json`.
pub fn parse_ground_truth(path: &Path, text: &str) -> Result<Vec<GroundTruth>, CliError> {
    let parse = |e: facegen::annotate::FormatError| CliError::Config(format!("{}: {e}", path.display()));
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let coco = read_coco(text).map_err(parse)?;
        let names: std::collections::HashMap<u64, String> =
            coco.images.iter().map(|i| (i.id, image_key(&i.file_name))).collect();
        coco.annotations
            .iter()
            .map(|a| {
                let key = names.get(&a.image_id).ok_or_else(|| {
                    CliError::Config(format!("{}: annotation {} names unknown image {}", path.display(), a.id, a.image_id))
                })?;
                Ok(GroundTruth {
                    image_id: key.clone(),
                    bbox: BBox::new(a.bbox[0], a.bbox[1], a.bbox[2], a.bbox[3]),
                    ignored: a.ignore != 0,
                })
            })
            .collect()
    } else {
        Ok(ground_truth_from_wider(&read_wider(text).map_err(parse)?))
    }
}

pub fn run_evaluate(pred: &Path, gt: &Path, iou: f64, out: Option<&Path>) -> Result<(), CliError> {
    if !(iou > 0.0 && iou <= 1.0) {
        return Err(CliError::Config(format!("--iou must be in (0, 1], got {iou}")));
    }
    let (pred_text, gt_text) = (read(pred)?, read(gt)?);
    let dets = read_predictions(&pred_text).map_err(|e| CliError::Config(format!("{}: {e}", pred.display())))?;
    let gts = parse_ground_truth(gt, &gt_text)?;
    let report = evaluate(&dets, &gts, iou).map_err(|e| CliError::Config(e.to_string()))?;
    let csv = report_csv(&report);
    print!("{csv}");
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        write(&dir.join("eval_report.csv"), &csv)?;
        write(&dir.join("pr_curve.csv"), &pr_curve_csv(&report))?;
    }
    Ok(())
}

pub fn run_stats(coco_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let coco = read_coco(&read(coco_path)?).map_err(|e| CliError::Config(format!("{}: {e}", coco_path.display())))?;
    let annotations: Vec<FaceAnnotation> = coco
        .annotations
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let h = a.bbox[3];
            FaceAnnotation {
                image_id: a.image_id.to_string(),
                face_index: i as u32,
                bbox: BBox::new(a.bbox[0], a.bbox[1], a.bbox[2], h),
                occlusion_level: a.occlusion,
                visibility: a.visibility,
                scale_bin: scale_bin(h).0,
                scale_out_of_range: scale_bin(h).1,
                pose: a.pose,
                ignored: a.ignore != 0,
            }
        })
        .collect();
    let stats = dataset_stats(&annotations).map_err(|e| CliError::Config(format!("{}: {e}", coco_path.display())))?;
    let csv = stats.to_csv();
    match out {
        Some(p) => write(p, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}
