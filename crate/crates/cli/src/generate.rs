//! The `generate` command: a dataset directory from a job.

use std::fs;
use std::path::Path;
use std::time::Instant;

use facegen::annotate::{dataset_stats, write_coco, write_wider, CocoImage, FaceAnnotation, WiderImage};
use facegen::assets::AssetLibrary;
use facegen::pipeline::{generate_image, ImageOutput, JobConfig};
use image::{ImageBuffer, Rgb};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::job::ResolvedJob;

pub const PARTIAL_MARKER: &str = ".partial";

/// Written next to the dataset; replaying `config` reproduces it.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub preset: Option<String>,
    pub seed: u64,
    pub assets: String,
    pub config: JobConfig,
    pub images: Vec<ImageRecord>,
}

#[derive(Debug, Serialize)]
pub struct ImageRecord {
    pub path: String,
    /// Zero-based line of the image's path in `wider.txt`.
    pub wider_line: usize,
    /// Inclusive range of COCO annotation ids; `None` for an empty image.
    pub coco_annotation_ids: Option<[u64; 2]>,
    pub environment: String,
    pub base_width: u32,
    pub faces: usize,
    pub ignored_faces: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Timings {
    jobs: usize,
    total_seconds: f64,
    images_per_second: f64,
    image_seconds: Vec<f64>,
}

/// What survives of an image once its pixels are on disk.
struct Generated {
    index: u32,
    environment: String,
    base_width: u32,
    width: u32,
    height: u32,
    annotations: Vec<FaceAnnotation>,
    warnings: Vec<String>,
    seconds: f64,
}

pub fn image_path(index: u32) -> String {
    format!("images/{index:06}.png")
}

pub fn save_rgb(path: &Path, out: &ImageOutput, rgb: Vec<u8>) -> Result<(), CliError> {
    let img: ImageBuffer<Rgb<u8>, _> =
        ImageBuffer::from_raw(out.width, out.height, rgb).expect("buffer matches the image size");
    img.save(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn render_one(job: &JobConfig, assets: &AssetLibrary, out_dir: &Path, index: u32) -> Result<Generated, CliError> {
    let start = Instant::now();
    let mut out = generate_image(job, assets, index)?;
    let rgb = std::mem::take(&mut out.rgb);
    save_rgb(&out_dir.join(image_path(index)), &out, rgb)?;
    if let Some(d) = &out.debug {
        let p = out_dir.join(format!("debug/{index:06}_depth.png"));
        d.depth.save(&p).map_err(|e| CliError::io(&p, e))?;
        let p = out_dir.join(format!("debug/{index:06}_instance.png"));
        d.instance.save(&p).map_err(|e| CliError::io(&p, e))?;
    }
    Ok(Generated {
        index,
        environment: out.scene.environment_id,
        base_width: out.base_width,
        width: out.width,
        height: out.height,
        annotations: out.annotations,
        warnings: out.scene.warnings,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Generate the whole dataset into `out_dir`. A `.partial` marker stays
/// behind if anything fails.
pub fn run_generate(resolved: &ResolvedJob, assets: &AssetLibrary, out_dir: &Path, jobs: usize) -> Result<(), CliError> {
    let job = &resolved.job;
    for sub in ["images", "annotations"] {
        let p = out_dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| CliError::io(&p, e))?;
    }
    if job.render.debug_maps {
        let p = out_dir.join("debug");
        fs::create_dir_all(&p).map_err(|e| CliError::io(&p, e))?;
    }
    let marker = out_dir.join(PARTIAL_MARKER);
    write(&marker, "")?;

    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    let generated: Vec<Generated> = pool.install(|| {
        (0..job.generation.num_images)
            .into_par_iter()
            .map(|i| render_one(job, assets, out_dir, i))
            .collect::<Result<_, _>>()
    })?;
    let total = start.elapsed().as_secs_f64();

    write_outputs(resolved, out_dir, &generated)?;
    let timings = Timings {
        jobs,
        total_seconds: total,
        images_per_second: generated.len() as f64 / total.max(1e-9),
        image_seconds: generated.iter().map(|g| g.seconds).collect(),
    };
    write(
        &out_dir.join("timings.json"),
        serde_json::to_string_pretty(&timings).expect("timings serialize"),
    )?;
    fs::remove_file(&marker).map_err(|e| CliError::io(&marker, e))
}

fn write_outputs(resolved: &ResolvedJob, out_dir: &Path, generated: &[Generated]) -> Result<(), CliError> {
    let wider_images: Vec<WiderImage> = generated
        .iter()
        .map(|g| WiderImage {
            path: image_path(g.index),
            faces: g.annotations.iter().map(Into::into).collect(),
        })
        .collect();
    let coco_input: Vec<(CocoImage, Vec<FaceAnnotation>)> = generated
        .iter()
        .map(|g| {
            let img = CocoImage {
                id: g.index as u64 + 1,
                file_name: image_path(g.index),
                width: g.width,
                height: g.height,
            };
            (img, g.annotations.clone())
        })
        .collect();
    let coco = write_coco(&coco_input);

    let mut records = Vec::with_capacity(generated.len());
    let (mut line, mut next_ann) = (0usize, 1u64);
    for g in generated {
        let n = g.annotations.len();
        records.push(ImageRecord {
            path: image_path(g.index),
            wider_line: line,
            coco_annotation_ids: (n > 0).then(|| [next_ann, next_ann + n as u64 - 1]),
            environment: g.environment.clone(),
            base_width: g.base_width,
            faces: n,
            ignored_faces: g.annotations.iter().filter(|a| a.ignored).count(),
            warnings: g.warnings.clone(),
        });
        line += 2 + n;
        next_ann += n as u64;
    }

    let ann_dir = out_dir.join("annotations");
    write(&ann_dir.join("wider.txt"), write_wider(&wider_images))?;
    write(
        &ann_dir.join("coco.json"),
        serde_json::to_string_pretty(&coco).expect("COCO serializes"),
    )?;

    let all: Vec<FaceAnnotation> = generated.iter().flat_map(|g| g.annotations.iter().cloned()).collect();
    let csv = match dataset_stats(&all) {
        Ok(s) => s.to_csv(),
        Err(e) => {
            eprintln!("warning: {e}; stats.csv has no rows");
            "bin,count,min_h,max_h,frac_in_range\n".to_string()
        }
    };
    write(&out_dir.join("stats.csv"), csv)?;

    let manifest = RunManifest {
        tool: "facegen".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        preset: resolved.preset.clone(),
        seed: resolved.job.generation.seed,
        assets: resolved.assets.describe(),
        config: resolved.job.clone(),
        images: records,
    };
    write(
        &out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )
}

