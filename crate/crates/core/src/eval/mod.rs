//! Detection scoring: greedy IoU matching and all-points average precision,
//! overall and per scale bin.

mod io;

pub use io::{ground_truth_from_wider, image_key, read_predictions, report_csv, pr_curve_csv, ParseError};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{scale_bin, ScaleBin};
use crate::bbox::BBox;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: String,
    pub bbox: BBox,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub image_id: String,
    pub bbox: BBox,
    pub ignored: bool,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum EvalError {
    #[error("ground truth has no non-ignored faces")]
    EmptyGroundTruth,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// Non-ignored ground-truth faces.
    pub num_gt: usize,
    /// Detections matched to ignored faces; they count neither way.
    pub ignored_detections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub iou_threshold: f64,
    pub ap_overall: f64,
    /// `None` for bins without ground truth.
    pub ap_per_bin: BTreeMap<ScaleBin, Option<f64>>,
    /// `(recall, precision)` after each counted detection, by descending score.
    pub pr_curve: Vec<(f64, f64)>,
    pub counts: Counts,
}

/// Intersection over union; zero when the boxes only touch.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    inter / (a.area() + b.area() - inter)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Tp,
    Fp,
    Ignored,
}

/// Greedy matching within one image. Detections are visited by descending
/// score; each takes the unmatched counted face of highest IoU (lower index
/// on ties), and failing that is absorbed by any ignored face it overlaps
/// enough.
fn match_image(dets: &[(f64, BBox)], gts: &[(BBox, bool)], thr: f64) -> Vec<(f64, Outcome)> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].0.total_cmp(&dets[a].0));
    let mut taken = vec![false; gts.len()];
    let mut out = Vec::with_capacity(dets.len());
    for di in order {
        let (score, db) = dets[di];
        let mut best: Option<(usize, f64)> = None;
        let mut absorbed = false;
        for (gi, (gb, ignored)) in gts.iter().enumerate() {
            let o = iou(&db, gb);
            if o < thr {
                continue;
            }
            if *ignored {
                absorbed = true;
            } else if !taken[gi] && best.is_none_or(|(_, bo)| o > bo) {
                best = Some((gi, o));
            }
        }
        let outcome = match best {
            Some((gi, _)) => {
                taken[gi] = true;
                Outcome::Tp
            }
            None if absorbed => Outcome::Ignored,
            None => Outcome::Fp,
        };
        out.push((score, outcome));
    }
    out
}

/// All-points interpolated area under a PR curve.
pub fn average_precision(curve: &[(f64, f64)]) -> f64 {
    let mut recall = vec![0.0];
    let mut precision = vec![0.0];
    for &(r, p) in curve {
        recall.push(r);
        precision.push(p);
    }
    recall.push(1.0);
    precision.push(0.0);
    for i in (0..precision.len() - 1).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    (1..recall.len())
        .map(|i| (recall[i] - recall[i - 1]) * precision[i])
        .sum()
}

struct Scored {
    curve: Vec<(f64, f64)>,
    counts: Counts,
}

fn score_with(detections: &[Detection], ground_truth: &[GroundTruth], thr: f64, counted: impl Fn(&GroundTruth) -> bool) -> Scored {
    let mut per_image: BTreeMap<&str, (Vec<(f64, BBox)>, Vec<(BBox, bool)>)> = BTreeMap::new();
    let mut num_gt = 0;
    for g in ground_truth {
        let c = counted(g);
        num_gt += c as usize;
        per_image.entry(&g.image_id).or_default().1.push((g.bbox, !c));
    }
    let mut unknown = Vec::new();
    for d in detections {
        match per_image.get_mut(d.image_id.as_str()) {
            Some(e) => e.0.push((d.score, d.bbox)),
            None => unknown.push((d.score, Outcome::Fp)),
        }
    }
    let mut results: Vec<(f64, Outcome)> = unknown;
    for (dets, gts) in per_image.values() {
        results.extend(match_image(dets, gts, thr));
    }
    // Stable: equal scores keep image order.
    results.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut counts = Counts {
        num_gt,
        ..Default::default()
    };
    let mut curve = Vec::new();
    for (_, o) in results {
        match o {
            Outcome::Tp => counts.tp += 1,
            Outcome::Fp => counts.fp += 1,
            Outcome::Ignored => {
                counts.ignored_detections += 1;
                continue;
            }
        }
        let recall = if num_gt > 0 { counts.tp as f64 / num_gt as f64 } else { 0.0 };
        curve.push((recall, counts.tp as f64 / (counts.tp + counts.fp) as f64));
    }
    counts.fn_ = num_gt - counts.tp;
    Scored { curve, counts }
}

/// Score detections against ground truth at an IoU threshold.
pub fn evaluate(detections: &[Detection], ground_truth: &[GroundTruth], iou_threshold: f64) -> Result<EvalReport, EvalError> {
    let overall = score_with(detections, ground_truth, iou_threshold, |g| !g.ignored);
    if overall.counts.num_gt == 0 {
        return Err(EvalError::EmptyGroundTruth);
    }
    let mut ap_per_bin = BTreeMap::new();
    for bin in ScaleBin::ALL {
        let s = score_with(detections, ground_truth, iou_threshold, |g| {
            !g.ignored && scale_bin(g.bbox.h).0 == bin
        });
        ap_per_bin.insert(bin, (s.counts.num_gt > 0).then(|| average_precision(&s.curve)));
    }
    Ok(EvalReport {
        iou_threshold,
        ap_overall: average_precision(&overall.curve),
        ap_per_bin,
        pr_curve: overall.curve,
        counts: overall.counts,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gt(img: &str, b: BBox) -> GroundTruth {
        GroundTruth {
            image_id: img.into(),
            bbox: b,
            ignored: false,
        }
    }

    fn det(img: &str, b: BBox, score: f64) -> Detection {
        Detection {
            image_id: img.into(),
            bbox: b,
            score,
        }
    }

    const B: BBox = BBox::new(0.0, 0.0, 10.0, 10.0);

    #[test]
    fn iou_examples() {
        assert_eq!(iou(&B, &B), 1.0);
        assert_eq!(iou(&B, &BBox::new(10.0, 10.0, 10.0, 10.0)), 0.0);
        assert!((iou(&B, &BBox::new(5.0, 0.0, 10.0, 10.0)) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_perfect_detection() {
        let r = evaluate(&[det("a", B, 0.7)], &[gt("a", B)], 0.5).unwrap();
        assert_eq!(r.ap_overall, 1.0);
        assert_eq!(r.counts.tp, 1);
    }

    #[test]
    fn hand_computed_pr_curve() {
        let dets = [det("a", B, 0.9), det("a", BBox::new(50.0, 50.0, 10.0, 10.0), 0.1)];
        let r = evaluate(&dets, &[gt("a", B)], 0.5).unwrap();
        assert_eq!(r.pr_curve, vec![(1.0, 1.0), (1.0, 0.5)]);
        assert_eq!(r.ap_overall, 1.0);
        assert_eq!((r.counts.tp, r.counts.fp, r.counts.fn_), (1, 1, 0));
    }

    #[test]
    fn duplicates_are_false_positives() {
        let dets = [det("a", B, 0.9), det("a", B, 0.8), det("a", B, 0.7)];
        let r = evaluate(&dets, &[gt("a", B)], 0.5).unwrap();
        assert_eq!((r.counts.tp, r.counts.fp), (1, 2));
    }

    #[test]
    fn ignored_faces_do_not_count() {
        let mut g = gt("a", BBox::new(100.0, 100.0, 10.0, 10.0));
        g.ignored = true;
        let dets = [det("a", B, 0.5), det("a", g.bbox, 0.9), det("a", g.bbox, 0.8)];
        let r = evaluate(&dets, &[gt("a", B), g], 0.5).unwrap();
        assert_eq!(r.ap_overall, 1.0);
        assert_eq!(r.counts.ignored_detections, 2);
        assert_eq!(r.counts.num_gt, 1);
    }

    #[test]
    fn unknown_images_and_empty_cases() {
        let r = evaluate(&[det("zzz", B, 0.9)], &[gt("a", B)], 0.5).unwrap();
        assert_eq!((r.counts.fp, r.counts.fn_), (1, 1));
        assert_eq!(r.ap_overall, 0.0);
        let r = evaluate(&[], &[gt("a", B), gt("b", B)], 0.5).unwrap();
        assert_eq!(r.ap_overall, 0.0);
        assert_eq!(r.counts.fn_, 2);
        assert_eq!(evaluate(&[], &[], 0.5), Err(EvalError::EmptyGroundTruth));
    }

    #[test]
    fn per_bin_treats_other_bins_as_ignored() {
        let tiny = BBox::new(0.0, 0.0, 15.0, 20.0);
        let large = BBox::new(100.0, 100.0, 60.0, 96.0);
        let dets = [det("a", large, 0.9), det("a", tiny, 0.8)];
        let r = evaluate(&dets, &[gt("a", tiny), gt("a", large)], 0.5).unwrap();
        assert_eq!(r.ap_per_bin[&ScaleBin::Tiny], Some(1.0));
        assert_eq!(r.ap_per_bin[&ScaleBin::Large], Some(1.0));
        assert_eq!(r.ap_per_bin[&ScaleBin::Medium], None);
    }

    /// Independent AP: for every distinct score threshold, rematch the
    /// detections at or above it from scratch, then integrate the precision
    /// envelope over recall steps.
    pub(crate) fn oracle_ap(dets: &[Detection], gts: &[GroundTruth], thr: f64) -> f64 {
        let npos = gts.iter().filter(|g| !g.ignored).count() as f64;
        let mut thresholds: Vec<f64> = dets.iter().map(|d| d.score).collect();
        thresholds.sort_by(|a, b| b.total_cmp(a));
        thresholds.dedup();
        let mut points = Vec::new();
        for &t in &thresholds {
            let (mut tp, mut fp) = (0usize, 0usize);
            let images: std::collections::BTreeSet<&str> = dets.iter().map(|d| d.image_id.as_str()).collect();
            for img in images {
                let mut ds: Vec<&Detection> = dets.iter().filter(|d| d.image_id == img && d.score >= t).collect();
                ds.sort_by(|a, b| b.score.total_cmp(&a.score));
                let gs: Vec<&GroundTruth> = gts.iter().filter(|g| g.image_id == img).collect();
                let mut used = vec![false; gs.len()];
                for d in ds {
                    let mut best: Option<usize> = None;
                    for (k, g) in gs.iter().enumerate() {
                        let o = iou(&d.bbox, &g.bbox);
                        if g.ignored || used[k] || o < thr {
                            continue;
                        }
                        if best.is_none_or(|b| o > iou(&d.bbox, &gs[b].bbox)) {
                            best = Some(k);
                        }
                    }
                    if let Some(k) = best {
                        used[k] = true;
                        tp += 1;
                    } else if !gs.iter().any(|g| g.ignored && iou(&d.bbox, &g.bbox) >= thr) {
                        fp += 1;
                    }
                }
            }
            if tp + fp > 0 {
                points.push((tp as f64 / npos, tp as f64 / (tp + fp) as f64));
            }
        }
        let mut ap = 0.0;
        let mut prev_r = 0.0;
        for (k, &(r, _)) in points.iter().enumerate() {
            let envelope = points[k..].iter().map(|p| p.1).fold(0.0, f64::max);
            ap += (r - prev_r) * envelope;
            prev_r = r;
        }
        ap
    }

    pub(crate) fn random_instance(rng: &mut impl Rng) -> (Vec<Detection>, Vec<GroundTruth>) {
        let n_img = rng.gen_range(1..=5);
        let mut dets = Vec::new();
        let mut gts = Vec::new();
        let rbox = |rng: &mut dyn rand::RngCore| {
            BBox::new(
                rng.gen_range(0.0..40.0f64).round(),
                rng.gen_range(0.0..40.0f64).round(),
                rng.gen_range(5.0..30.0f64).round(),
                rng.gen_range(5.0..60.0f64).round(),
            )
        };
        for i in 0..n_img {
            let img = format!("{i:06}");
            for _ in 0..rng.gen_range(0..=4) {
                gts.push(GroundTruth {
                    image_id: img.clone(),
                    bbox: rbox(rng),
                    ignored: rng.gen_bool(0.15),
                });
            }
            for _ in 0..rng.gen_range(0..=4) {
                // Half of the detections perturb a face of the image.
                let b = match gts.iter().find(|g| g.image_id == img) {
                    Some(g) if rng.gen_bool(0.5) => {
                        let j = rng.gen_range(-3.0..3.0f64);
                        BBox::new(g.bbox.x + j, g.bbox.y - j, g.bbox.w, g.bbox.h + j.abs())
                    }
                    _ => rbox(rng),
                };
                dets.push(Detection {
                    image_id: img.clone(),
                    bbox: b,
                    score: rng.gen::<f64>(),
                });
            }
        }
        if gts.iter().all(|g| g.ignored) {
            gts.push(GroundTruth {
                image_id: "000000".into(),
                bbox: B,
                ignored: false,
            });
        }
        (dets, gts)
    }

    #[test]
    fn matches_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let (dets, gts) = random_instance(&mut rng);
            let r = evaluate(&dets, &gts, 0.5).unwrap();
            let o = oracle_ap(&dets, &gts, 0.5);
            assert!((r.ap_overall - o).abs() < 1e-9, "{} vs {o}", r.ap_overall);
        }
    }

    #[test]
    fn curve_is_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let (dets, gts) = random_instance(&mut rng);
            let r = evaluate(&dets, &gts, 0.5).unwrap();
            let mut last = 0.0;
            for &(rec, p) in &r.pr_curve {
                assert!((0.0..=1.0).contains(&rec) && (0.0..=1.0).contains(&p));
                assert!(rec >= last);
                last = rec;
            }
            assert_eq!(r.counts.tp + r.counts.fn_, r.counts.num_gt);
        }
    }

    #[test]
    fn single_bin_dataset_matches_overall() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let (mut dets, mut gts) = random_instance(&mut rng);
            // Force every face into the large bin.
            for g in &mut gts {
                g.bbox.h += 60.0;
            }
            for d in &mut dets {
                d.bbox.h += 60.0;
            }
            let r = evaluate(&dets, &gts, 0.5).unwrap();
            assert_eq!(r.ap_per_bin[&ScaleBin::Large], Some(r.ap_overall));
        }
    }

    proptest! {
        #[test]
        fn monotone_score_transform_keeps_ap(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (dets, gts) = random_instance(&mut rng);
            let a = evaluate(&dets, &gts, 0.5).unwrap().ap_overall;
            let moved: Vec<Detection> = dets.iter().map(|d| Detection { score: (3.0 * d.score).exp() - 7.0, ..d.clone() }).collect();
            let b = evaluate(&moved, &gts, 0.5).unwrap().ap_overall;
            prop_assert_eq!(a, b);
        }

        #[test]
        fn lowest_scoring_miss_never_helps(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut dets, gts) = random_instance(&mut rng);
            let a = evaluate(&dets, &gts, 0.5).unwrap().ap_overall;
            dets.push(Detection { image_id: "000000".into(), bbox: BBox::new(1e4, 1e4, 5.0, 5.0), score: -1.0 });
            let b = evaluate(&dets, &gts, 0.5).unwrap().ap_overall;
            prop_assert!(b <= a + 1e-15);
        }
    }
}
