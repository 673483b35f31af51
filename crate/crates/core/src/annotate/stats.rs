use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{scale_bin, AnnotateError, FaceAnnotation, ScaleBin};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinStats {
    pub bin: ScaleBin,
    pub count: usize,
    /// `None` for an empty bin.
    pub min_h: Option<f64>,
    pub max_h: Option<f64>,
    pub median_h: Option<f64>,
    pub min_w: Option<f64>,
    pub max_w: Option<f64>,
    pub median_w: Option<f64>,
    /// Share of the bin whose height is inside its nominal range.
    pub frac_in_range: Option<f64>,
    /// Share of the bin whose width is inside the bin's nominal width range.
    pub frac_width_in_range: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    /// Non-ignored faces summarized.
    pub total: usize,
    pub bins: Vec<BinStats>,
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Per-bin counts and size ranges over the non-ignored faces.
pub fn dataset_stats(annotations: &[FaceAnnotation]) -> Result<DatasetStats, AnnotateError> {
    let kept: Vec<&FaceAnnotation> = annotations.iter().filter(|a| !a.ignored).collect();
    if kept.is_empty() {
        return Err(AnnotateError::EmptyDataset);
    }
    let bins = ScaleBin::ALL
        .iter()
        .map(|&bin| {
            let members: Vec<&&FaceAnnotation> = kept.iter().filter(|a| scale_bin(a.bbox.h).0 == bin).collect();
            let mut hs: Vec<f64> = members.iter().map(|a| a.bbox.h).collect();
            let mut ws: Vec<f64> = members.iter().map(|a| a.bbox.w).collect();
            let n = members.len();
            let frac = |k: usize| (n > 0).then(|| k as f64 / n as f64);
            let in_h = members.iter().filter(|a| !scale_bin(a.bbox.h).1).count();
            let [wlo, whi] = bin.width_range();
            let in_w = ws.iter().filter(|w| (wlo..=whi).contains(*w)).count();
            BinStats {
                bin,
                count: n,
                min_h: hs.iter().cloned().reduce(f64::min),
                max_h: hs.iter().cloned().reduce(f64::max),
                median_h: median(&mut hs),
                min_w: ws.iter().cloned().reduce(f64::min),
                max_w: ws.iter().cloned().reduce(f64::max),
                median_w: median(&mut ws),
                frac_in_range: frac(in_h),
                frac_width_in_range: frac(in_w),
            }
        })
        .collect();
    Ok(DatasetStats {
        total: kept.len(),
        bins,
    })
}

impl DatasetStats {
    pub fn bin(&self, bin: ScaleBin) -> &BinStats {
        self.bins.iter().find(|b| b.bin == bin).expect("every bin is present")
    }

    /// `bin,count,min_h,max_h,frac_in_range`; empty bins leave the value
    /// columns blank.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("bin,count,min_h,max_h,frac_in_range\n");
        for b in &self.bins {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                b.bin,
                b.count,
                opt(b.min_h),
                opt(b.max_h),
                opt(b.frac_in_range)
            );
        }
        out
    }
}
