//! Triggered photon-counting camera: deterministic mean images and Poisson
//! sampling per (trigger, analyzer) setting.
//!
//! The camera accumulates heralded single photons for a fixed budget per
//! setting. With `E` the per-setting photon budget, `q` the quantum
//! efficiency, and `d` the mean dark counts per pixel:
//!
//! ```text
//! mean[pixel] = E * q * P_joint(trigger, analyzer, pixel) + d
//! ```
//!
//! so settings whose trigger rarely fires collect proportionally fewer
//! photons, as with fixed accumulation times. Counts are independent Poisson
//! draws per pixel; each image's RNG stream derives deterministically from
//! the master seed and the image's position in the acquisition plan, so
//! acquisitions are bit-reproducible and images may be sampled in parallel.

use std::path::Path;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, PixelRect};
use crate::pgm;
use crate::polarization::JonesVector;
use crate::state::{joint_probability_map, HybridBiphotonState};

/// Detector parameters for the triggered camera.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    /// Probability that an arriving photon is registered, in `(0, 1]`.
    pub quantum_efficiency: f64,
    /// Mean dark counts per pixel per exposure, `>= 0`.
    pub dark_count_rate: f64,
    /// Expected heralded-photon budget per setting, `> 0`.
    pub exposure_photons: f64,
    /// Master RNG seed for the whole acquisition.
    pub seed: u64,
}

impl DetectorModel {
    /// Build a validated detector.
    pub fn new(
        quantum_efficiency: f64,
        dark_count_rate: f64,
        exposure_photons: f64,
        seed: u64,
    ) -> Result<Self> {
        let d = DetectorModel {
            quantum_efficiency,
            dark_count_rate,
            exposure_photons,
            seed,
        };
        d.validate()?;
        Ok(d)
    }

    /// Defaults: 20% efficiency, no dark counts, 5e5 photons per setting.
    pub fn ideal_counting(seed: u64) -> Self {
        DetectorModel {
            quantum_efficiency: 0.2,
            dark_count_rate: 0.0,
            exposure_photons: 5e5,
            seed,
        }
    }

    /// Check field ranges.
    pub fn validate(&self) -> Result<()> {
        if !self.quantum_efficiency.is_finite()
            || !(0.0..=1.0).contains(&self.quantum_efficiency)
            || self.quantum_efficiency == 0.0
        {
            return Err(Error::Config(format!(
                "quantum_efficiency must lie in (0, 1], got {}",
                self.quantum_efficiency
            )));
        }
        if !self.dark_count_rate.is_finite() || self.dark_count_rate < 0.0 {
            return Err(Error::Config(format!(
                "dark_count_rate must be >= 0, got {}",
                self.dark_count_rate
            )));
        }
        if !self.exposure_photons.is_finite() || self.exposure_photons < 0.0 {
            return Err(Error::Config(format!(
                "exposure_photons must be >= 0 and finite, got {}",
                self.exposure_photons
            )));
        }
        Ok(())
    }
}

/// One (trigger, analyzer) acquisition setting with human-readable labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    /// Photon-1 projection.
    pub trigger: JonesVector,
    /// Photon-2 analyzer projection.
    pub analyzer: JonesVector,
    /// Label identifying the trigger (e.g. "D").
    pub trigger_label: String,
    /// Label identifying the analyzer (e.g. "H").
    pub analyzer_label: String,
}

impl Setting {
    /// Setting with explicit states and labels.
    pub fn new(
        trigger: JonesVector,
        trigger_label: &str,
        analyzer: JonesVector,
        analyzer_label: &str,
    ) -> Self {
        Setting {
            trigger,
            analyzer,
            trigger_label: trigger_label.to_string(),
            analyzer_label: analyzer_label.to_string(),
        }
    }

    /// Setting from two of the six canonical labels (H, V, D, A, R, L).
    pub fn named(trigger_label: &str, analyzer_label: &str) -> Result<Self> {
        let trigger = JonesVector::named(trigger_label).ok_or_else(|| {
            Error::Config(format!("unknown trigger polarization '{trigger_label}'"))
        })?;
        let analyzer = JonesVector::named(analyzer_label).ok_or_else(|| {
            Error::Config(format!("unknown analyzer polarization '{analyzer_label}'"))
        })?;
        Ok(Setting::new(
            trigger,
            trigger_label,
            analyzer,
            analyzer_label,
        ))
    }

    /// Identifying key used for duplicate detection and lookup.
    pub fn key(&self) -> String {
        format!("{}|{}", self.trigger_label, self.analyzer_label)
    }
}

/// One sampled coincidence image and the setting that produced it.
#[derive(Clone, Debug)]
pub struct CoincidenceImage {
    /// Pixel raster.
    pub grid: GridSpec,
    /// Photon counts per pixel, `[row, col]`.
    pub counts: Array2<u64>,
    /// Trigger label.
    pub trigger: String,
    /// Analyzer label.
    pub analyzer: String,
}

impl CoincidenceImage {
    /// Total counts inside a pixel rectangle.
    pub fn region_sum(&self, rect: &PixelRect) -> u64 {
        rect.pixels().map(|(ix, iy)| self.counts[[iy, ix]]).sum()
    }

    /// Total counts over the whole image.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// A set of coincidence images acquired under one plan, in plan order.
#[derive(Clone, Debug)]
pub struct CoincidenceImageStack {
    /// Images, one per plan entry, in plan order.
    pub images: Vec<CoincidenceImage>,
    /// Detector that produced them.
    pub detector: DetectorModel,
}

impl CoincidenceImageStack {
    /// Look up the image for a (trigger, analyzer) label pair.
    pub fn get(&self, trigger: &str, analyzer: &str) -> Option<&CoincidenceImage> {
        self.images
            .iter()
            .find(|im| im.trigger == trigger && im.analyzer == analyzer)
    }

    /// All images sharing one trigger label, in plan order.
    pub fn for_trigger(&self, trigger: &str) -> Vec<&CoincidenceImage> {
        self.images
            .iter()
            .filter(|im| im.trigger == trigger)
            .collect()
    }
}

/// Deterministic per-image seed: splitmix64 of the master seed offset by the
/// plan index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mean count image for one setting (see module docs for the formula).
///
/// A trigger that can never fire simply yields a dark-counts-only mean; it is
/// not an error at this level.
pub fn expected_counts(
    state: &HybridBiphotonState,
    trigger: &JonesVector,
    analyzer: &JonesVector,
    detector: &DetectorModel,
) -> Result<Array2<f64>> {
    detector.validate()?;
    let scale = detector.exposure_photons * detector.quantum_efficiency;
    let dark = detector.dark_count_rate;
    let mut mean = joint_probability_map(state, trigger, analyzer);
    mean.mapv_inplace(|p| scale * p + dark);
    Ok(mean)
}

/// One Poisson draw with mean `lambda` (0 for `lambda <= 0`).
pub fn poisson_draw(lambda: f64, rng: &mut ChaCha8Rng) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(lambda).expect("positive finite mean");
    let x: f64 = dist.sample(rng);
    x.round() as u64
}

/// Sample one coincidence image from its mean, reproducibly for a fixed seed.
pub fn sample_image(
    grid: &GridSpec,
    mean: &Array2<f64>,
    seed: u64,
    trigger: &str,
    analyzer: &str,
) -> Result<CoincidenceImage> {
    let (rows, cols) = mean.dim();
    if rows != grid.height_px || cols != grid.width_px {
        return Err(Error::GridMismatch(
            grid.width_px,
            grid.height_px,
            cols,
            rows,
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Array2::<u64>::zeros((rows, cols));
    for (slot, &m) in counts.iter_mut().zip(mean.iter()) {
        *slot = poisson_draw(m, &mut rng);
    }
    Ok(CoincidenceImage {
        grid: *grid,
        counts,
        trigger: trigger.to_string(),
        analyzer: analyzer.to_string(),
    })
}

/// Acquire one sampled image per plan entry.
///
/// Per-image seeds derive from `(detector.seed, plan index)`; images are
/// sampled in parallel without affecting reproducibility.
pub fn acquire_stack(
    state: &HybridBiphotonState,
    plan: &[Setting],
    detector: &DetectorModel,
) -> Result<CoincidenceImageStack> {
    if plan.is_empty() {
        return Err(Error::Config("acquisition plan is empty".into()));
    }
    detector.validate()?;
    for (i, s) in plan.iter().enumerate() {
        if plan[..i].iter().any(|t| t.key() == s.key()) {
            return Err(Error::DuplicateSetting(s.key()));
        }
    }
    let grid = *state.grid();
    let images: Result<Vec<CoincidenceImage>> = plan
        .par_iter()
        .enumerate()
        .map(|(idx, setting)| {
            let mean = expected_counts(state, &setting.trigger, &setting.analyzer, detector)?;
            sample_image(
                &grid,
                &mean,
                derive_seed(detector.seed, idx as u64),
                &setting.trigger_label,
                &setting.analyzer_label,
            )
        })
        .collect();
    Ok(CoincidenceImageStack {
        images: images?,
        detector: *detector,
    })
}

/// Stack metadata serialized alongside the PGM images.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StackManifest {
    /// Detector that produced the stack.
    pub detector: DetectorModel,
    /// Grid shared by all images.
    pub grid: GridSpec,
    /// One entry per image, in plan order.
    pub images: Vec<StackImageEntry>,
}

/// Manifest entry for one image file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StackImageEntry {
    /// Trigger label.
    pub trigger: String,
    /// Analyzer label.
    pub analyzer: String,
    /// File name relative to the stack directory.
    pub file: String,
    /// SHA-256 of the PGM file, lowercase hex.
    pub sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of a file on disk, lowercase hex.
pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Write a stack to `dir`: one 16-bit PGM per image plus `stack.json`.
pub fn save_stack(stack: &CoincidenceImageStack, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(stack.images.len());
    let grid = match stack.images.first() {
        Some(im) => im.grid,
        None => return Err(Error::Config("cannot save an empty stack".into())),
    };
    for image in &stack.images {
        let file = format!("t{}_a{}.pgm", image.trigger, image.analyzer);
        let path = dir.join(&file);
        let data = image.counts.mapv(|c| c as f64);
        pgm::write_pgm16(&path, &data)?;
        entries.push(StackImageEntry {
            trigger: image.trigger.clone(),
            analyzer: image.analyzer.clone(),
            file,
            sha256: file_sha256(&path)?,
        });
    }
    let manifest = StackManifest {
        detector: stack.detector,
        grid,
        images: entries,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let path = dir.join("stack.json");
    std::fs::write(&path, json).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a stack saved by [`save_stack`], verifying checksums.
pub fn load_stack(dir: &Path) -> Result<CoincidenceImageStack> {
    let manifest_path = dir.join("stack.json");
    let text =
        std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: StackManifest = serde_json::from_str(&text).map_err(|e| Error::Malformed {
        path: manifest_path.clone(),
        reason: e.to_string(),
    })?;
    let mut images = Vec::with_capacity(manifest.images.len());
    for entry in &manifest.images {
        let path = dir.join(&entry.file);
        if file_sha256(&path)? != entry.sha256 {
            return Err(Error::ChecksumMismatch(path));
        }
        let img = pgm::read_pgm(&path)?;
        let (rows, cols) = img.samples.dim();
        if rows != manifest.grid.height_px || cols != manifest.grid.width_px {
            return Err(Error::GridMismatch(
                manifest.grid.width_px,
                manifest.grid.height_px,
                cols,
                rows,
            ));
        }
        images.push(CoincidenceImage {
            grid: manifest.grid,
            counts: img.samples.mapv(u64::from),
            trigger: entry.trigger.clone(),
            analyzer: entry.analyzer.clone(),
        });
    }
    Ok(CoincidenceImageStack {
        images,
        detector: manifest.detector,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{default_waist, make_lg};
    use crate::state::{build_state, Arm};
    use approx::assert_relative_eq;

    fn grid() -> GridSpec {
        GridSpec::new(64, 64, 1.0).unwrap()
    }

    fn lg_state() -> HybridBiphotonState {
        let g = grid();
        let w = default_waist(&g);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        build_state(
            s,
            s,
            0.0,
            Arm::new(make_lg(&g, 1, 0, w).unwrap(), JonesVector::right_circular()),
            Arm::new(make_lg(&g, -1, 0, w).unwrap(), JonesVector::left_circular()),
        )
        .unwrap()
    }

    #[test]
    fn mean_images_scale_linearly_with_exposure() {
        let state = lg_state();
        let t = JonesVector::diagonal();
        let a = JonesVector::horizontal();
        let d1 = DetectorModel::new(0.2, 0.0, 1e5, 7).unwrap();
        let d2 = DetectorModel::new(0.2, 0.0, 2e5, 7).unwrap();
        let m1 = expected_counts(&state, &t, &a, &d1).unwrap();
        let m2 = expected_counts(&state, &t, &a, &d2).unwrap();
        for (x1, x2) in m1.iter().zip(m2.iter()) {
            assert_relative_eq!(2.0 * x1, *x2, epsilon = 1e-9);
        }
    }

    #[test]
    fn orthogonal_analyzer_gives_dark_mean() {
        // Trigger H leaves arm 1 only, uniformly R polarized; analyzing at L
        // blocks everything.
        let state = lg_state();
        let d = DetectorModel::new(0.2, 0.0, 1e5, 7).unwrap();
        let mean = expected_counts(
            &state,
            &JonesVector::horizontal(),
            &JonesVector::left_circular(),
            &d,
        )
        .unwrap();
        assert!(mean.iter().all(|&m| m < 1e-12), "crossed analyzer must be dark");
    }

    #[test]
    fn impossible_trigger_yields_dark_counts_only() {
        let g = grid();
        let u = make_lg(&g, 0, 0, default_waist(&g)).unwrap();
        let state = build_state(
            1.0,
            0.0,
            0.0,
            Arm::new(u.clone(), JonesVector::horizontal()),
            Arm::new(u, JonesVector::vertical()),
        )
        .unwrap();
        let d = DetectorModel::new(0.2, 0.05, 1e5, 7).unwrap();
        let mean = expected_counts(
            &state,
            &JonesVector::vertical(),
            &JonesVector::horizontal(),
            &d,
        )
        .unwrap();
        for &m in mean.iter() {
            assert_relative_eq!(m, 0.05, epsilon = 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_unbiased() {
        let state = lg_state();
        let d = DetectorModel::ideal_counting(123);
        let t = JonesVector::diagonal();
        let a = JonesVector::horizontal();
        let mean = expected_counts(&state, &t, &a, &d).unwrap();
        let g = grid();
        let im1 = sample_image(&g, &mean, 42, "D", "H").unwrap();
        let im2 = sample_image(&g, &mean, 42, "D", "H").unwrap();
        assert_eq!(im1.counts, im2.counts, "same seed must give identical images");
        let im3 = sample_image(&g, &mean, 43, "D", "H").unwrap();
        assert_ne!(im1.counts, im3.counts, "different seed must differ");

        // Totals match to Poisson accuracy: total mean ~ 2.5e4 counts here,
        // so 5 sigma is ~800.
        let total_mean: f64 = mean.sum();
        let total: u64 = im1.total();
        assert!(
            (total as f64 - total_mean).abs() < 5.0 * total_mean.sqrt(),
            "sampled total {total} too far from mean {total_mean}"
        );
    }

    #[test]
    fn single_bright_pixel_concentrates_counts() {
        let g = grid();
        let mut mean = Array2::<f64>::zeros((64, 64));
        mean[[10, 12]] = 1e6;
        let im = sample_image(&g, &mean, 5, "H", "H").unwrap();
        let c = im.counts[[10, 12]] as f64;
        assert!((c - 1e6).abs() < 5e3, "count {c} outside 5 sigma of 1e6");
        assert_eq!(im.total() - im.counts[[10, 12]], 0);
    }

    #[test]
    fn stacks_are_reproducible_and_reject_duplicates() {
        let state = lg_state();
        let d = DetectorModel::new(0.2, 0.0, 1e4, 99).unwrap();
        let plan = vec![
            Setting::named("D", "H").unwrap(),
            Setting::named("D", "V").unwrap(),
        ];
        let s1 = acquire_stack(&state, &plan, &d).unwrap();
        let s2 = acquire_stack(&state, &plan, &d).unwrap();
        for (a, b) in s1.images.iter().zip(s2.images.iter()) {
            assert_eq!(a.counts, b.counts);
        }
        assert!(s1.get("D", "H").is_some());
        assert!(s1.get("D", "R").is_none());

        let dup = vec![
            Setting::named("D", "H").unwrap(),
            Setting::named("D", "H").unwrap(),
        ];
        assert!(matches!(
            acquire_stack(&state, &dup, &d),
            Err(Error::DuplicateSetting(_))
        ));
        assert!(matches!(
            acquire_stack(&state, &[], &d),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn empty_state_dark_run_has_dark_mean() {
        let state = lg_state();
        let d = DetectorModel::new(0.2, 0.1, 0.0, 1).unwrap();
        let plan = vec![Setting::named("H", "H").unwrap()];
        let stack = acquire_stack(&state, &plan, &d).unwrap();
        let total = stack.images[0].total() as f64;
        // 64*64 pixels at mean 0.1 -> expect ~410 +- 5*sqrt(410).
        assert!((total - 409.6).abs() < 5.0 * 409.6_f64.sqrt() + 1.0);
    }

    #[test]
    fn save_load_round_trips_and_checks_integrity() {
        let state = lg_state();
        let d = DetectorModel::new(0.2, 0.0, 1e4, 7).unwrap();
        let plan = vec![
            Setting::named("D", "H").unwrap(),
            Setting::named("D", "R").unwrap(),
        ];
        let stack = acquire_stack(&state, &plan, &d).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_stack(&stack, dir.path()).unwrap();
        let loaded = load_stack(dir.path()).unwrap();
        assert_eq!(loaded.images.len(), 2);
        for (a, b) in stack.images.iter().zip(loaded.images.iter()) {
            assert_eq!(a.counts, b.counts);
            assert_eq!(a.trigger, b.trigger);
        }

        // Corrupt one image; loading must fail the checksum.
        let victim = dir.path().join("tD_aH.pgm");
        let mut bytes = std::fs::read(&victim).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 0xff;
        std::fs::write(&victim, bytes).unwrap();
        assert!(matches!(
            load_stack(dir.path()),
            Err(Error::ChecksumMismatch(_))
        ));
    }

    #[test]
    fn derived_seeds_do_not_collide_in_small_plans() {
        let mut seen = std::collections::HashSet::new();
        for master in [0u64, 1, 0xdeadbeef] {
            for idx in 0..64 {
                assert!(seen.insert(derive_seed(master, idx)));
            }
            seen.clear();
        }
    }
}
