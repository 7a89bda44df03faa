//! Corpus curation: low-level screening, texture and complexity scoring,
//! top-fraction selection and the persisted manifest.

mod filters;
mod glcm;

pub use filters::{histogram256, laplacian_variance, shannon_entropy, sobel_edge_density, sobel_magnitude};
pub use glcm::{glcm_matrix, glcm_stats, matrix_stats, quantize, GlcmParams, GlcmStats, Orientation};

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::{ensure_luma, load_image, PlanarImage};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// File extensions picked up when walking a corpus.
pub const IMAGE_EXTENSIONS: [&str; 4] = ["png", "pgm", "ppm", "pnm"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenThresholds {
    pub lap_low: f64,
    #[serde(with = "crate::serde_inf")]
    pub lap_high: f64,
    pub edge_min: f64,
}

impl Default for ScreenThresholds {
    fn default() -> Self {
        Self {
            lap_low: 10.0 / (255.0 * 255.0),
            lap_high: f64::INFINITY,
            edge_min: 0.01,
        }
    }
}

impl ScreenThresholds {
    pub fn accept_all() -> Self {
        Self {
            lap_low: 0.0,
            lap_high: f64::INFINITY,
            edge_min: 0.0,
        }
    }

    pub fn passes(&self, laplacian_var: f64, edge_density: f64) -> bool {
        self.lap_low <= laplacian_var && laplacian_var <= self.lap_high && edge_density >= self.edge_min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurationConfig {
    pub thresholds: ScreenThresholds,
    /// Sobel magnitude above which a pixel counts as an edge.
    pub edge_threshold: f64,
    pub glcm: GlcmParams,
    pub glcm_fraction: f64,
    pub entropy_fraction: f64,
    /// Manual inspection outcome; when set, only listed paths can be selected.
    pub approved: Option<Vec<String>>,
}

impl Default for CurationConfig {
    fn default() -> Self {
        Self {
            thresholds: ScreenThresholds::default(),
            edge_threshold: 0.1,
            glcm: GlcmParams::default(),
            glcm_fraction: 0.5,
            entropy_fraction: 0.5,
            approved: None,
        }
    }
}

impl CurationConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("glcm_fraction", self.glcm_fraction), ("entropy_fraction", self.entropy_fraction)] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {f}")));
            }
        }
        if self.glcm.levels < 2 || self.glcm.distance == 0 {
            return Err(Error::Config("GLCM needs levels >= 2 and distance >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityFlags {
    pub passed_screen: bool,
    pub in_sg: bool,
    pub in_se: bool,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// Corpus-relative path with `/` separators.
    pub path: String,
    pub width: usize,
    pub height: usize,
    pub laplacian_var: f64,
    pub edge_density: f64,
    pub glcm: Vec<GlcmStats>,
    pub glcm_score: f64,
    pub shannon_entropy: f64,
    pub flags: QualityFlags,
    /// Set when the image could not be read; statistics are then zero.
    pub error: Option<String>,
}

impl QualityReport {
    fn failed(path: String, err: &Error) -> Self {
        Self {
            path,
            width: 0,
            height: 0,
            laplacian_var: 0.0,
            edge_density: 0.0,
            glcm: Vec::new(),
            glcm_score: 0.0,
            shannon_entropy: 0.0,
            flags: QualityFlags::default(),
            error: Some(err.to_string()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Screening statistics for one image; the GLCM score and flags are left
/// for the corpus-level pass.
pub fn compute_report(path: &str, img: &PlanarImage, config: &CurationConfig) -> Result<QualityReport> {
    let luma = ensure_luma(img)?;
    Ok(QualityReport {
        path: path.to_string(),
        width: img.width(),
        height: img.height(),
        laplacian_var: laplacian_variance(&luma)?,
        edge_density: sobel_edge_density(&luma, config.edge_threshold)?,
        glcm: glcm_stats(&luma, config.glcm, &Orientation::ALL)?,
        glcm_score: 0.0,
        shannon_entropy: shannon_entropy(&luma)?,
        flags: QualityFlags::default(),
        error: None,
    })
}

/// Indices of readable reports inside the screening band.
pub fn screen_corpus(reports: &[QualityReport], thresholds: &ScreenThresholds) -> Vec<usize> {
    reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_ok() && thresholds.passes(r.laplacian_var, r.edge_density))
        .map(|(i, _)| i)
        .collect()
}

/// `ceil(fraction * n)`, tolerant of rounding in the product.
pub fn top_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// The `ceil(fraction * n)` highest-scoring keys; equal scores fall back to
/// ascending key order. Returned in that ranking order.
pub fn select_top_fraction<K: Ord + Clone>(scores: &[(K, f64)], fraction: f64) -> Result<Vec<K>> {
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    let mut ranked: Vec<&(K, f64)> = scores.iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked
        .into_iter()
        .take(top_count(scores.len(), fraction))
        .map(|(k, _)| k.clone())
        .collect())
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aggregated GLCM score for every report in `members`: per orientation,
/// the z-scores of contrast, entropy and correlation (normalised over
/// `members`) are summed, then averaged over orientations.
pub fn glcm_scores(reports: &[QualityReport], members: &[usize]) -> Vec<f64> {
    if members.is_empty() {
        return Vec::new();
    }
    let n_orient = reports[members[0]].glcm.len();
    let mut scores = vec![0.0; members.len()];
    for o in 0..n_orient {
        let stats: [fn(&GlcmStats) -> f64; 3] = [|s| s.contrast, |s| s.entropy, |s| s.correlation];
        for stat in stats {
            let vals: Vec<f64> = members.iter().map(|&i| stat(&reports[i].glcm[o])).collect();
            let (mean, std) = mean_std(&vals);
            for (s, v) in scores.iter_mut().zip(&vals) {
                if std > 0.0 {
                    *s += (v - mean) / std;
                }
            }
        }
    }
    if n_orient > 0 {
        for s in &mut scores {
            *s /= n_orient as f64;
        }
    }
    scores
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub total: usize,
    pub failed: usize,
    pub screened: usize,
    pub in_sg: usize,
    pub in_se: usize,
    pub selected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationManifest {
    pub schema_version: u32,
    pub corpus_root: String,
    pub config: CurationConfig,
    pub counts: StageCounts,
    pub reports: Vec<QualityReport>,
}

impl CurationManifest {
    pub fn selected(&self) -> impl Iterator<Item = &QualityReport> {
        self.reports.iter().filter(|r| r.flags.selected)
    }

    pub fn selected_paths(&self) -> Vec<String> {
        self.selected().map(|r| r.path.clone()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        if m.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported manifest schema version {}",
                m.schema_version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::io("<csv>", std::io::Error::other(e));
        w.write_record([
            "path",
            "width",
            "height",
            "laplacian_var",
            "edge_density",
            "glcm_score",
            "shannon_entropy",
            "passed_screen",
            "in_sg",
            "in_se",
            "selected",
            "error",
        ])
        .map_err(io)?;
        for r in &self.reports {
            w.write_record([
                r.path.clone(),
                r.width.to_string(),
                r.height.to_string(),
                r.laplacian_var.to_string(),
                r.edge_density.to_string(),
                r.glcm_score.to_string(),
                r.shannon_entropy.to_string(),
                r.flags.passed_screen.to_string(),
                r.flags.in_sg.to_string(),
                r.flags.in_se.to_string(),
                r.flags.selected.to_string(),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }
}

/// Image files under `dir`, as sorted `/`-separated relative paths.
pub fn list_images(dir: &Path) -> Result<Vec<String>> {
    if !dir.is_dir() {
        return Err(Error::FileNotFound(dir.to_path_buf()));
    }
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(dir).follow_links(true) {
        let entry = entry.map_err(|e| {
            let path = e.path().map(Path::to_path_buf).unwrap_or_else(|| dir.to_path_buf());
            Error::io(path, std::io::Error::other(e.to_string()))
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let ext = entry
            .path()
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if !ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
            continue;
        }
        let rel = entry.path().strip_prefix(dir).unwrap_or(entry.path());
        let parts: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
        out.push(parts.join("/"));
    }
    out.sort();
    Ok(out)
}

/// Corpus-level pass over precomputed reports: screening, scoring,
/// selection and counts.
pub fn assemble_manifest(
    corpus_root: String,
    mut reports: Vec<QualityReport>,
    config: &CurationConfig,
) -> Result<CurationManifest> {
    config.validate()?;
    reports.sort_by(|a, b| a.path.cmp(&b.path));
    let screened = screen_corpus(&reports, &config.thresholds);
    let scores = glcm_scores(&reports, &screened);
    for (&i, &s) in screened.iter().zip(&scores) {
        reports[i].glcm_score = s;
        reports[i].flags.passed_screen = true;
    }

    let mut in_sg = BTreeSet::new();
    let mut in_se = BTreeSet::new();
    if !screened.is_empty() {
        let g: Vec<(String, f64)> = screened
            .iter()
            .map(|&i| (reports[i].path.clone(), reports[i].glcm_score))
            .collect();
        let e: Vec<(String, f64)> = screened
            .iter()
            .map(|&i| (reports[i].path.clone(), reports[i].shannon_entropy))
            .collect();
        in_sg.extend(select_top_fraction(&g, config.glcm_fraction)?);
        in_se.extend(select_top_fraction(&e, config.entropy_fraction)?);
    }
    let approved: Option<BTreeSet<&str>> = config
        .approved
        .as_ref()
        .map(|a| a.iter().map(String::as_str).collect());

    let mut counts = StageCounts {
        total: reports.len(),
        screened: screened.len(),
        ..Default::default()
    };
    for r in &mut reports {
        if !r.is_ok() {
            counts.failed += 1;
            continue;
        }
        r.flags.in_sg = in_sg.contains(&r.path);
        r.flags.in_se = in_se.contains(&r.path);
        r.flags.selected = r.flags.in_sg
            && r.flags.in_se
            && approved.as_ref().is_none_or(|a| a.contains(r.path.as_str()));
        counts.in_sg += r.flags.in_sg as usize;
        counts.in_se += r.flags.in_se as usize;
        counts.selected += r.flags.selected as usize;
    }
    Ok(CurationManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        corpus_root,
        config: config.clone(),
        counts,
        reports,
    })
}

/// Scan `corpus_dir`, compute every report in parallel and assemble the
/// manifest. Unreadable images are recorded with an error and skipped.
pub fn run_pipeline(corpus_dir: impl AsRef<Path>, config: &CurationConfig) -> Result<CurationManifest> {
    config.validate()?;
    let dir = corpus_dir.as_ref();
    let paths = list_images(dir)?;
    let reports: Vec<QualityReport> = paths
        .par_iter()
        .map(|rel| {
            let full: PathBuf = dir.join(rel);
            load_image(&full)
                .and_then(|img| compute_report(rel, &img, config))
                .unwrap_or_else(|e| QualityReport::failed(rel.clone(), &e))
        })
        .collect();
    assemble_manifest(dir.to_string_lossy().into_owned(), reports, config)
}

/// Selected paths grouped by top-level directory, handy for summaries.
pub fn selected_by_dir(manifest: &CurationManifest) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for r in manifest.selected() {
        let top = r.path.split('/').next().unwrap_or("").to_string();
        *m.entry(top).or_insert(0) += 1;
    }
    m
}
