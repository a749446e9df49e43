//! Spatially resolved polarization tomography: per-region Stokes vectors,
//! polarization-ellipse parameters, and singularity detection.
//!
//! Reconstruction uses the six-analyzer overcomplete scheme. With `I_X` the
//! summed counts of analyzer `X` inside one region:
//!
//! ```text
//! S0 = (I_H + I_V + I_D + I_A + I_R + I_L) / 3
//! S1 = I_H - I_V      S2 = I_D - I_A      S3 = I_R - I_L
//! ```
//!
//! Counting errors propagate assuming independent Poisson channels
//! (`Var I = I`). Ellipse parameters follow the standard relations
//! `psi = atan2(S2, S1) / 2` (orientation, `[0, pi)`) and
//! `chi = asin(S3 / |S|) / 2` (ellipticity angle); regions are classed as
//! linear when `|S3|` stays below a threshold fraction of `S0`, and excluded
//! as unpolarized when the degree of polarization is very low.
//!
//! Singularities live on the region lattice: C-points are half-integer
//! windings of `psi` around 2x2 region plaquettes; L-lines are zero contours
//! of `S3` traced by marching squares between region centers.

use std::collections::HashMap;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Region, RegionGrid};
use crate::imaging::CoincidenceImageStack;
use crate::state::DARK_THRESHOLD;

/// The six analyzer labels required for a tomography, in canonical order.
pub const ANALYZER_LABELS: [&str; 6] = ["H", "V", "D", "A", "R", "L"];

/// Default `|S3|/S0` bound below which a region counts as linearly polarized.
pub const L_LINE_THRESHOLD: f64 = 0.1;

/// Default degree-of-polarization floor below which a region is excluded as
/// unpolarized.
pub const DOP_EXCLUSION: f64 = 0.2;

/// Six analyzer images for one trigger, as real-valued count maps.
///
/// Accepts either sampled counts or noiseless mean images, so the same
/// reconstruction code serves both the simulation and its analytic oracle.
#[derive(Clone, Debug)]
pub struct TriggerImageSet {
    /// Common pixel raster.
    pub grid: GridSpec,
    /// Trigger label shared by all six images.
    pub trigger: String,
    /// Images keyed by [`ANALYZER_LABELS`] order.
    images: [Array2<f64>; 6],
}

impl TriggerImageSet {
    /// Assemble from labeled images; all must share the trigger and grid and
    /// cover exactly the six canonical analyzers.
    pub fn new(
        grid: GridSpec,
        entries: Vec<(String, String, Array2<f64>)>,
    ) -> Result<Self> {
        let mut trigger: Option<String> = None;
        let mut slots: [Option<Array2<f64>>; 6] = Default::default();
        for (t, analyzer, img) in entries {
            match &trigger {
                None => trigger = Some(t.clone()),
                Some(prev) if *prev != t => {
                    return Err(Error::MixedTriggers(prev.clone(), t));
                }
                _ => {}
            }
            let (rows, cols) = img.dim();
            if rows != grid.height_px || cols != grid.width_px {
                return Err(Error::GridMismatch(
                    grid.width_px,
                    grid.height_px,
                    cols,
                    rows,
                ));
            }
            if let Some(slot) = ANALYZER_LABELS.iter().position(|&l| l == analyzer) {
                slots[slot] = Some(img);
            } else {
                return Err(Error::Config(format!(
                    "analyzer '{analyzer}' is not one of the six tomography settings"
                )));
            }
        }
        let missing: Vec<String> = ANALYZER_LABELS
            .iter()
            .zip(slots.iter())
            .filter(|(_, s)| s.is_none())
            .map(|(l, _)| l.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::IncompleteTomography(missing));
        }
        Ok(TriggerImageSet {
            grid,
            trigger: trigger.expect("non-empty by construction"),
            images: slots.map(|s| s.expect("checked complete")),
        })
    }

    /// Extract the six-analyzer set for `trigger` from an acquired stack.
    pub fn from_stack(stack: &CoincidenceImageStack, trigger: &str) -> Result<Self> {
        let images: Vec<_> = stack
            .for_trigger(trigger)
            .into_iter()
            .map(|im| {
                (
                    im.trigger.clone(),
                    im.analyzer.clone(),
                    im.counts.mapv(|c| c as f64),
                )
            })
            .collect();
        if images.is_empty() {
            return Err(Error::IncompleteTomography(
                ANALYZER_LABELS.iter().map(|l| l.to_string()).collect(),
            ));
        }
        let grid = stack.images[0].grid;
        Self::new(grid, images)
    }

    /// Image for one canonical analyzer label.
    pub fn image(&self, analyzer: &str) -> Option<&Array2<f64>> {
        ANALYZER_LABELS
            .iter()
            .position(|&l| l == analyzer)
            .map(|i| &self.images[i])
    }

    /// Mean of the six images: proportional to the unanalyzed conditional
    /// intensity (useful as a render underlay).
    pub fn average_intensity(&self) -> Array2<f64> {
        let mut out = self.images[0].clone();
        for img in &self.images[1..] {
            out += img;
        }
        out.mapv_inplace(|v| v / 6.0);
        out
    }
}

/// Stokes parameters of one analysis region.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StokesRegion {
    /// Tile this belongs to.
    pub region: Region,
    /// `(S0, S1, S2, S3)` in count units.
    pub s: [f64; 4],
    /// Poisson-propagated standard deviation per component.
    pub sigma: [f64; 4],
    /// Summed counts `(I_H, I_V, I_D, I_A, I_R, I_L)`.
    pub intensities: [f64; 6],
}

impl StokesRegion {
    /// Total photons across all six images in this region.
    pub fn photons(&self) -> f64 {
        self.intensities.iter().sum()
    }

    /// Degree of polarization `|S| / S0` (NaN-free: 0 for dark regions).
    pub fn degree_of_polarization(&self) -> f64 {
        if self.s[0] <= 0.0 {
            return 0.0;
        }
        let p = (self.s[1] * self.s[1] + self.s[2] * self.s[2] + self.s[3] * self.s[3]).sqrt();
        p / self.s[0]
    }

    /// Normalized Stokes component `S_k / S0` (k = 1..=3) and its
    /// delta-method standard deviation, accounting for the covariance
    /// between `S_k` and `S0` (`Cov = S_k / 3` for shared Poisson channels).
    pub fn normalized(&self, k: usize) -> (f64, f64) {
        assert!((1..=3).contains(&k), "normalized component index must be 1..=3");
        let s0 = self.s[0];
        if s0 <= 0.0 {
            return (0.0, f64::INFINITY);
        }
        let val = self.s[k] / s0;
        let var_k = self.sigma[k] * self.sigma[k];
        let var_0 = self.sigma[0] * self.sigma[0];
        let cov = self.s[k] / 3.0;
        let var = (var_k - 2.0 * val * cov + val * val * var_0) / (s0 * s0);
        (val, var.max(0.0).sqrt())
    }
}

/// Per-region Stokes vectors for one trigger.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StokesMap {
    /// Trigger label of the underlying images.
    pub trigger: String,
    /// Tiling used.
    pub region_grid: RegionGrid,
    /// Tiles per row / rows of tiles.
    pub dims: (usize, usize),
    /// Regions in row-major order.
    pub regions: Vec<StokesRegion>,
}

impl StokesMap {
    /// Region at tile coordinates `(col, row)`.
    pub fn get(&self, col: usize, row: usize) -> Option<&StokesRegion> {
        let (cols, rows) = self.dims;
        if col >= cols || row >= rows {
            return None;
        }
        Some(&self.regions[row * cols + col])
    }
}

/// Reconstruct per-region Stokes vectors from a six-analyzer image set.
pub fn stokes_reconstruct(set: &TriggerImageSet, regions: &RegionGrid) -> Result<StokesMap> {
    let tiles = regions.regions(&set.grid);
    let dims = regions.dims(&set.grid);
    if tiles.is_empty() {
        return Err(Error::Config(
            "region tiling leaves no whole tiles on the grid".into(),
        ));
    }
    let mut out = Vec::with_capacity(tiles.len());
    for tile in tiles {
        let mut intensities = [0.0_f64; 6];
        for (slot, img) in intensities.iter_mut().zip(set.images.iter()) {
            *slot = tile
                .rect
                .pixels()
                .map(|(ix, iy)| img[[iy, ix]])
                .sum::<f64>();
        }
        let [ih, iv, id, ia, ir, il] = intensities;
        let total = intensities.iter().sum::<f64>();
        let s = [total / 3.0, ih - iv, id - ia, ir - il];
        let sigma = [
            total.sqrt() / 3.0,
            (ih + iv).sqrt(),
            (id + ia).sqrt(),
            (ir + il).sqrt(),
        ];
        out.push(StokesRegion {
            region: tile,
            s,
            sigma,
            intensities,
        });
    }
    Ok(StokesMap {
        trigger: set.trigger.clone(),
        region_grid: *regions,
        dims,
        regions: out,
    })
}

/// Polarization class of a region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolarizationClass {
    /// `|S3|` below the L-line threshold: (near-)linear polarization.
    Linear,
    /// `S3 > 0`: right-handed elliptical.
    RightElliptic,
    /// `S3 < 0`: left-handed elliptical.
    LeftElliptic,
    /// Degree of polarization too low to classify; excluded from patterns.
    Unpolarized,
}

impl PolarizationClass {
    /// Stable lowercase name used in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            PolarizationClass::Linear => "linear",
            PolarizationClass::RightElliptic => "right-elliptic",
            PolarizationClass::LeftElliptic => "left-elliptic",
            PolarizationClass::Unpolarized => "unpolarized",
        }
    }
}

/// Ellipse parameters of one region.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EllipseRegion {
    /// Tile this belongs to.
    pub region: Region,
    /// Orientation of the major axis, `[0, pi)`.
    pub psi: f64,
    /// Ellipticity angle, `[-pi/4, pi/4]`; sign = handedness.
    pub chi: f64,
    /// Degree of polarization.
    pub dop: f64,
    /// Classification.
    pub class: PolarizationClass,
}

/// Per-region ellipse parameters for one trigger.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EllipseMap {
    /// Trigger label.
    pub trigger: String,
    /// Tiles per row / rows of tiles.
    pub dims: (usize, usize),
    /// Regions in row-major order.
    pub regions: Vec<EllipseRegion>,
}

impl EllipseMap {
    /// Region at tile coordinates `(col, row)`.
    pub fn get(&self, col: usize, row: usize) -> Option<&EllipseRegion> {
        let (cols, rows) = self.dims;
        if col >= cols || row >= rows {
            return None;
        }
        Some(&self.regions[row * cols + col])
    }
}

/// Ellipse parameters for one Stokes region.
///
/// Regions whose polarized fraction falls below `dop_exclusion` (or with no
/// counts at all) come back classified [`PolarizationClass::Unpolarized`]
/// with `psi = chi = 0`.
pub fn ellipse_params(
    region: &StokesRegion,
    l_line_threshold: f64,
    dop_exclusion: f64,
) -> EllipseRegion {
    let [s0, s1, s2, s3] = region.s;
    let pol = (s1 * s1 + s2 * s2 + s3 * s3).sqrt();
    let dop = region.degree_of_polarization();
    if s0 <= 0.0 || pol < DARK_THRESHOLD || dop < dop_exclusion {
        return EllipseRegion {
            region: region.region,
            psi: 0.0,
            chi: 0.0,
            dop,
            class: PolarizationClass::Unpolarized,
        };
    }
    let mut psi = 0.5 * s2.atan2(s1);
    if psi < 0.0 {
        psi += std::f64::consts::PI;
    }
    let chi = 0.5 * (s3 / pol).clamp(-1.0, 1.0).asin();
    let class = if s3.abs() <= l_line_threshold * s0 {
        PolarizationClass::Linear
    } else if s3 > 0.0 {
        PolarizationClass::RightElliptic
    } else {
        PolarizationClass::LeftElliptic
    };
    EllipseRegion {
        region: region.region,
        psi,
        chi,
        dop,
        class,
    }
}

/// Ellipse parameters for every region of a Stokes map, with default
/// thresholds.
pub fn ellipse_map(smap: &StokesMap) -> EllipseMap {
    ellipse_map_with(smap, L_LINE_THRESHOLD, DOP_EXCLUSION)
}

/// Ellipse parameters for every region with explicit thresholds.
pub fn ellipse_map_with(
    smap: &StokesMap,
    l_line_threshold: f64,
    dop_exclusion: f64,
) -> EllipseMap {
    EllipseMap {
        trigger: smap.trigger.clone(),
        dims: smap.dims,
        regions: smap
            .regions
            .iter()
            .map(|r| ellipse_params(r, l_line_threshold, dop_exclusion))
            .collect(),
    }
}

/// A located C-point: position in pixel coordinates and its topological
/// index (a multiple of 1/2).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CPoint {
    /// Pixel x of the hosting plaquette center.
    pub x: f64,
    /// Pixel y of the hosting plaquette center.
    pub y: f64,
    /// Winding of the orientation angle around the plaquette, in units of
    /// full turns (so +-0.5 for generic C-points).
    pub index: f64,
}

/// Polarization singularities found on one map.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SingularitySet {
    /// C-points (orientation undefined).
    pub c_points: Vec<CPoint>,
    /// L-lines (handedness undefined): polylines of pixel-coordinate points.
    pub l_lines: Vec<Vec<(f64, f64)>>,
}

impl SingularitySet {
    /// True when a polyline's ends meet (within a small tolerance).
    pub fn is_closed(line: &[(f64, f64)]) -> bool {
        match (line.first(), line.last()) {
            (Some(a), Some(b)) => {
                line.len() > 2 && (a.0 - b.0).abs() < 1e-6 && (a.1 - b.1).abs() < 1e-6
            }
            _ => false,
        }
    }
}

/// Wrap an orientation difference into `(-pi/2, pi/2]` (orientations are
/// defined modulo pi).
fn wrap_orientation(d: f64) -> f64 {
    let mut d = d % std::f64::consts::PI;
    if d > std::f64::consts::FRAC_PI_2 {
        d -= std::f64::consts::PI;
    } else if d <= -std::f64::consts::FRAC_PI_2 {
        d += std::f64::consts::PI;
    }
    d
}

/// Locate polarization singularities on the region lattice.
///
/// Regions classified unpolarized are masked out: plaquettes and contour
/// cells touching them are skipped. Requires at least 3x3 regions.
pub fn find_singularities(emap: &EllipseMap, smap: &StokesMap) -> Result<SingularitySet> {
    if emap.dims != smap.dims {
        return Err(Error::Config(format!(
            "ellipse map is {}x{} regions but Stokes map is {}x{}",
            emap.dims.0, emap.dims.1, smap.dims.0, smap.dims.1
        )));
    }
    let (cols, rows) = smap.dims;
    if cols < 3 || rows < 3 {
        return Err(Error::InsufficientResolution { cols, rows });
    }

    let valid = |col: usize, row: usize| -> bool {
        emap.get(col, row)
            .map(|e| e.class != PolarizationClass::Unpolarized)
            .unwrap_or(false)
    };
    let center = |col: usize, row: usize| -> (f64, f64) {
        smap.get(col, row).expect("in range").region.rect.center()
    };

    // --- C-points: psi winding around each 2x2 plaquette ----------------
    let mut c_points = Vec::new();
    for row in 0..rows - 1 {
        for col in 0..cols - 1 {
            let corners = [
                (col, row),
                (col + 1, row),
                (col + 1, row + 1),
                (col, row + 1),
            ];
            if corners.iter().any(|&(c, r)| !valid(c, r)) {
                continue;
            }
            let psis: Vec<f64> = corners
                .iter()
                .map(|&(c, r)| emap.get(c, r).unwrap().psi)
                .collect();
            let mut total = 0.0;
            for k in 0..4 {
                total += wrap_orientation(psis[(k + 1) % 4] - psis[k]);
            }
            let index = total / (2.0 * std::f64::consts::PI);
            // Generic windings are multiples of 1/2; tiny numerical residue
            // rounds away.
            let snapped = (index * 2.0).round() / 2.0;
            if snapped != 0.0 {
                let pts: Vec<(f64, f64)> = corners.iter().map(|&(c, r)| center(c, r)).collect();
                let x = pts.iter().map(|p| p.0).sum::<f64>() / 4.0;
                let y = pts.iter().map(|p| p.1).sum::<f64>() / 4.0;
                c_points.push(CPoint {
                    x,
                    y,
                    index: snapped,
                });
            }
        }
    }

    // --- L-lines: marching squares on S3 over region centers ------------
    // Each cell spans four adjacent region centers; crossing points are
    // linear interpolations along cell edges where S3 changes sign.
    let s3 = |col: usize, row: usize| -> f64 { smap.get(col, row).unwrap().s[3] };
    let mut segments: Vec<((f64, f64), (f64, f64))> = Vec::new();
    for row in 0..rows - 1 {
        for col in 0..cols - 1 {
            let corners = [
                (col, row),
                (col + 1, row),
                (col + 1, row + 1),
                (col, row + 1),
            ];
            if corners.iter().any(|&(c, r)| !valid(c, r)) {
                continue;
            }
            let vals: Vec<f64> = corners.iter().map(|&(c, r)| s3(c, r)).collect();
            let pts: Vec<(f64, f64)> = corners.iter().map(|&(c, r)| center(c, r)).collect();
            let mut case = 0usize;
            for (k, &v) in vals.iter().enumerate() {
                if v > 0.0 {
                    case |= 1 << k;
                }
            }
            if case == 0 || case == 0b1111 {
                continue;
            }
            // Crossing point on the edge between corner i and corner j.
            let cross = |i: usize, j: usize| -> (f64, f64) {
                let t = vals[i] / (vals[i] - vals[j]);
                (
                    pts[i].0 + t * (pts[j].0 - pts[i].0),
                    pts[i].1 + t * (pts[j].1 - pts[i].1),
                )
            };
            // Edges in corner-index pairs: top (0,1), right (1,2),
            // bottom (2,3), left (3,0).
            let edge = [(0, 1), (1, 2), (2, 3), (3, 0)];
            let mut crossings: Vec<(f64, f64)> = Vec::new();
            let mut crossed_edges: Vec<usize> = Vec::new();
            for (e, &(i, j)) in edge.iter().enumerate() {
                if (vals[i] > 0.0) != (vals[j] > 0.0) {
                    crossings.push(cross(i, j));
                    crossed_edges.push(e);
                }
            }
            match crossings.len() {
                2 => segments.push((crossings[0], crossings[1])),
                4 => {
                    // Saddle: resolve by the cell-center average.
                    let avg = vals.iter().sum::<f64>() / 4.0;
                    let tl_pos = vals[0] > 0.0;
                    // Pair edges so that contours separate the corners
                    // consistently with the center sign.
                    if (avg > 0.0) == tl_pos {
                        segments.push((crossings[0], crossings[3])); // top-left pair
                        segments.push((crossings[1], crossings[2])); // bottom-right pair
                    } else {
                        segments.push((crossings[0], crossings[1]));
                        segments.push((crossings[2], crossings[3]));
                    }
                }
                _ => {}
            }
        }
    }

    Ok(SingularitySet {
        c_points,
        l_lines: stitch_segments(segments),
    })
}

/// Join contour segments that share endpoints into polylines.
fn stitch_segments(segments: Vec<((f64, f64), (f64, f64))>) -> Vec<Vec<(f64, f64)>> {
    let quantize = |p: (f64, f64)| -> (i64, i64) {
        ((p.0 * 4096.0).round() as i64, (p.1 * 4096.0).round() as i64)
    };
    let mut adjacency: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(quantize(*a)).or_default().push(i);
        adjacency.entry(quantize(*b)).or_default().push(i);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let mut line = vec![a, b];
        // Extend forward from the tail, then backward from the head.
        for dir in 0..2 {
            loop {
                let tip = if dir == 0 {
                    *line.last().unwrap()
                } else {
                    line[0]
                };
                let Some(candidates) = adjacency.get(&quantize(tip)) else {
                    break;
                };
                let Some(&next) = candidates.iter().find(|&&i| !used[i]) else {
                    break;
                };
                used[next] = true;
                let (na, nb) = segments[next];
                let far = if quantize(na) == quantize(tip) { nb } else { na };
                if dir == 0 {
                    line.push(far);
                } else {
                    line.insert(0, far);
                }
            }
        }
        lines.push(line);
    }
    lines
}

/// Write a combined Stokes/ellipse CSV: one row per region with columns
/// `x, y, s0, s1, s2, s3, sig0, sig1, sig2, sig3, psi, chi, dop, class`
/// (`x`, `y` are the region-center pixel coordinates).
pub fn write_stokes_csv(smap: &StokesMap, emap: &EllipseMap, path: &Path) -> Result<()> {
    if smap.dims != emap.dims {
        return Err(Error::Config(
            "Stokes and ellipse maps must share a region grid".into(),
        ));
    }
    let mut out = String::new();
    out.push_str("x,y,s0,s1,s2,s3,sig0,sig1,sig2,sig3,psi,chi,dop,class\n");
    for (s, e) in smap.regions.iter().zip(emap.regions.iter()) {
        let (x, y) = s.region.rect.center();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            x,
            y,
            s.s[0],
            s.s[1],
            s.s[2],
            s.s[3],
            s.sigma[0],
            s.sigma[1],
            s.sigma[2],
            s.sigma[3],
            e.psi,
            e.chi,
            e.dop,
            e.class.name()
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// One parsed row of a Stokes/ellipse CSV.
#[derive(Clone, Debug)]
pub struct StokesCsvRow {
    /// Region-center pixel x.
    pub x: f64,
    /// Region-center pixel y.
    pub y: f64,
    /// `(S0, S1, S2, S3)`.
    pub s: [f64; 4],
    /// Per-component sigma.
    pub sigma: [f64; 4],
    /// Orientation.
    pub psi: f64,
    /// Ellipticity angle.
    pub chi: f64,
    /// Degree of polarization.
    pub dop: f64,
    /// Class name.
    pub class: String,
}

/// Read a CSV written by [`write_stokes_csv`].
pub fn read_stokes_csv(path: &Path) -> Result<Vec<StokesCsvRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if !header.starts_with("x,y,s0") {
        return Err(Error::Malformed {
            path: path.to_path_buf(),
            reason: "missing Stokes CSV header".into(),
        });
    }
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 14 {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                reason: format!("row {} has {} fields, want 14", lineno + 2, fields.len()),
            });
        }
        let num = |i: usize| -> Result<f64> {
            fields[i].parse::<f64>().map_err(|_| Error::Malformed {
                path: path.to_path_buf(),
                reason: format!("row {} field {} is not a number", lineno + 2, i + 1),
            })
        };
        rows.push(StokesCsvRow {
            x: num(0)?,
            y: num(1)?,
            s: [num(2)?, num(3)?, num(4)?, num(5)?],
            sigma: [num(6)?, num(7)?, num(8)?, num(9)?],
            psi: num(10)?,
            chi: num(11)?,
            dop: num(12)?,
            class: fields[13].to_string(),
        });
    }
    Ok(rows)
}

/// Serialize a singularity report to pretty JSON.
pub fn write_singularities_json(set: &SingularitySet, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(set).expect("singularity set serializes");
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

/// Rendering choices for [`render_pattern`].
#[derive(Clone, Copy, Debug)]
pub struct RenderOptions {
    /// Draw a glyph every `stride` regions in each direction.
    pub stride: usize,
    /// Skip glyphs in regions dimmer than this fraction of the brightest
    /// region.
    pub intensity_floor: f64,
    /// Glyph radius as a fraction of half the region size.
    pub glyph_scale: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            stride: 1,
            intensity_floor: 0.02,
            glyph_scale: 0.9,
        }
    }
}

/// Render the polarization pattern: grayscale intensity underlay with one
/// ellipse glyph per (sufficiently bright, polarized) region, colored blue
/// for linear, red for right-handed, green for left-handed.
pub fn render_pattern(
    emap: &EllipseMap,
    smap: &StokesMap,
    intensity: &Array2<f64>,
    options: &RenderOptions,
) -> Result<image::RgbImage> {
    if smap.dims != emap.dims {
        return Err(Error::Config(
            "Stokes and ellipse maps must share a region grid".into(),
        ));
    }
    let (rows, cols) = intensity.dim();
    let peak = intensity.iter().cloned().fold(0.0_f64, f64::max);
    let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
    let mut img = image::RgbImage::new(cols as u32, rows as u32);
    for ((iy, ix), &v) in intensity.indexed_iter() {
        let g = (255.0 * (v * scale).clamp(0.0, 1.0)) as u8;
        img.put_pixel(ix as u32, iy as u32, image::Rgb([g, g, g]));
    }

    let s0_peak = smap
        .regions
        .iter()
        .map(|r| r.s[0])
        .fold(0.0_f64, f64::max);
    let stride = options.stride.max(1);
    for (s, e) in smap.regions.iter().zip(emap.regions.iter()) {
        if s.region.col % stride != 0 || s.region.row % stride != 0 {
            continue;
        }
        if e.class == PolarizationClass::Unpolarized {
            continue;
        }
        if s0_peak > 0.0 && s.s[0] < options.intensity_floor * s0_peak {
            continue;
        }
        let color = match e.class {
            PolarizationClass::Linear => image::Rgb([70, 110, 255]),
            PolarizationClass::RightElliptic => image::Rgb([235, 60, 60]),
            PolarizationClass::LeftElliptic => image::Rgb([60, 200, 90]),
            PolarizationClass::Unpolarized => unreachable!(),
        };
        let (cx, cy) = s.region.rect.center();
        let half = options.glyph_scale * (s.region.rect.width.min(s.region.rect.height) as f64)
            * 0.5
            * (stride as f64).sqrt();
        // Parametric ellipse: major axis along psi, axis ratio tan|chi|.
        let ratio = e.chi.abs().tan().clamp(0.06, 1.0);
        let (sp, cp) = e.psi.sin_cos();
        let steps = 40;
        for k in 0..steps {
            let t = 2.0 * std::f64::consts::PI * k as f64 / steps as f64;
            let (st, ct) = t.sin_cos();
            let ex = half * ct;
            let ey = half * ratio * st;
            let px = cx + ex * cp - ey * sp;
            let py = cy + ex * sp + ey * cp;
            let (ux, uy) = (px.round() as i64, py.round() as i64);
            if ux >= 0 && uy >= 0 && (ux as usize) < cols && (uy as usize) < rows {
                img.put_pixel(ux as u32, uy as u32, color);
            }
        }
    }
    Ok(img)
}
