//! Scalar transverse mode synthesis: Laguerre-Gauss, Hermite-Gauss, and
//! custom amplitude/phase maps.
//!
//! Modes are evaluated at the beam waist, where the wavefront is flat and the
//! only phase structure is the azimuthal vortex term. With `w` the waist
//! radius and `(r, theta)` polar coordinates about the grid center:
//!
//! ```text
//! LG_{l,p}(r,theta) ~ (sqrt(2) r / w)^|l| * L_p^{|l|}(2 r^2 / w^2)
//!                     * exp(-r^2 / w^2) * exp(i l theta)
//!
//! HG_{m,n}(x,y)     ~ H_m(sqrt(2) x / w) * H_n(sqrt(2) y / w)
//!                     * exp(-(x^2 + y^2) / w^2)
//! ```
//!
//! All constructors return fields normalized to unit total power on the
//! pixel lattice, `sum |u|^2 = 1`.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, PixelRect};

/// A complex scalar field sampled on a [`GridSpec`].
///
/// Values are stored `[row, col]`, i.e. `field.values()[[iy, ix]]` is the
/// amplitude at pixel `(ix, iy)`.
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: GridSpec,
    values: Array2<Complex64>,
}

impl ComplexField {
    /// Wrap raw samples; the array shape must be `(height_px, width_px)` and
    /// every value must be finite.
    pub fn new(grid: GridSpec, values: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows != grid.height_px || cols != grid.width_px {
            return Err(Error::GridMismatch(
                grid.width_px,
                grid.height_px,
                cols,
                rows,
            ));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::DegenerateInput(
                "field contains non-finite samples".into(),
            ));
        }
        Ok(ComplexField { grid, values })
    }

    /// The grid this field is sampled on.
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Raw samples, `[row, col]`.
    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    /// Amplitude at pixel `(ix, iy)`.
    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[[iy, ix]]
    }

    /// Total power `sum |u|^2` over the lattice.
    pub fn total_power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Pointwise intensity `|u|^2`.
    pub fn intensity(&self) -> Array2<f64> {
        self.values.mapv(|v| v.norm_sqr())
    }

    /// Same field scaled to unit total power.
    pub fn normalized(&self) -> Result<Self> {
        let power = self.total_power();
        if power < 1e-300 {
            return Err(Error::DegenerateInput(
                "cannot normalize an all-zero field".into(),
            ));
        }
        let scale = Complex64::new(1.0 / power.sqrt(), 0.0);
        Ok(ComplexField {
            grid: self.grid,
            values: self.values.mapv(|v| v * scale),
        })
    }

    /// Pointwise linear combination `sum_k coeff_k * field_k`.
    ///
    /// All fields must share a grid. The result is *not* renormalized.
    pub fn linear_combination(terms: &[(Complex64, &ComplexField)]) -> Result<Self> {
        let (first_coeff, first) = terms
            .first()
            .ok_or_else(|| Error::DegenerateInput("empty linear combination".into()))?;
        let mut values = first.values.mapv(|v| v * first_coeff);
        for (coeff, field) in &terms[1..] {
            first.grid.ensure_same_shape(&field.grid)?;
            values.zip_mut_with(&field.values, |acc, &v| *acc += v * coeff);
        }
        ComplexField::new(first.grid, values)
    }

    /// `sum_rect conj(self) * other` over a pixel rectangle.
    pub fn overlap_in(&self, other: &ComplexField, rect: &PixelRect) -> Result<Complex64> {
        self.grid.ensure_same_shape(&other.grid)?;
        rect.ensure_inside(&self.grid)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (ix, iy) in rect.pixels() {
            acc += self.values[[iy, ix]].conj() * other.values[[iy, ix]];
        }
        Ok(acc)
    }
}

/// Default beam waist for a grid: one sixth of the smaller physical extent.
///
/// This leaves three waists of clearance on each side, so even modes with
/// substantial radial structure stay clear of the grid edge.
pub fn default_waist(grid: &GridSpec) -> f64 {
    grid.min_extent() / 6.0
}

fn check_waist(grid: &GridSpec, waist: f64) -> Result<()> {
    if !(waist > 0.0) || !waist.is_finite() {
        return Err(Error::NonPositiveWaist(waist));
    }
    let required = 4.0 * waist;
    let extent = grid.min_extent();
    if required > extent {
        return Err(Error::WaistDoesNotFit {
            waist,
            required,
            extent,
        });
    }
    Ok(())
}

/// Generalized Laguerre polynomial `L_p^alpha(x)` by upward recurrence.
fn laguerre(p: u32, alpha: f64, x: f64) -> f64 {
    if p == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut curr = 1.0 + alpha - x;
    for k in 1..p {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * curr - (kf + alpha) * prev) / (kf + 1.0);
        prev = curr;
        curr = next;
    }
    curr
}

/// Physicists' Hermite polynomial `H_n(x)` by upward recurrence.
fn hermite(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut curr = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * curr - 2.0 * (k as f64) * prev;
        prev = curr;
        curr = next;
    }
    curr
}

/// Laguerre-Gauss mode with azimuthal index `l` and radial index `p`.
pub fn make_lg(grid: &GridSpec, l: i32, p: u32, waist: f64) -> Result<ComplexField> {
    check_waist(grid, waist)?;
    let abs_l = l.unsigned_abs();
    let mut values = Array2::<Complex64>::zeros((grid.height_px, grid.width_px));
    for iy in 0..grid.height_px {
        for ix in 0..grid.width_px {
            let (r, theta) = grid.polar(ix, iy);
            let rho = std::f64::consts::SQRT_2 * r / waist;
            let radial = rho.powi(abs_l as i32)
                * laguerre(p, abs_l as f64, rho * rho)
                * (-r * r / (waist * waist)).exp();
            let phase = Complex64::from_polar(1.0, l as f64 * theta);
            values[[iy, ix]] = radial * phase;
        }
    }
    ComplexField::new(*grid, values)?.normalized()
}

/// Hermite-Gauss mode with horizontal index `m` and vertical index `n`.
pub fn make_hg(grid: &GridSpec, m: u32, n: u32, waist: f64) -> Result<ComplexField> {
    check_waist(grid, waist)?;
    let mut values = Array2::<Complex64>::zeros((grid.height_px, grid.width_px));
    for iy in 0..grid.height_px {
        for ix in 0..grid.width_px {
            let (x, y) = grid.position(ix, iy);
            let amp = hermite(m, std::f64::consts::SQRT_2 * x / waist)
                * hermite(n, std::f64::consts::SQRT_2 * y / waist)
                * (-(x * x + y * y) / (waist * waist)).exp();
            values[[iy, ix]] = Complex64::new(amp, 0.0);
        }
    }
    ComplexField::new(*grid, values)?.normalized()
}

/// Field from explicit amplitude and phase maps (`[row, col]`, phase in
/// radians). The amplitude map must be nonnegative and not identically zero.
pub fn make_custom(
    grid: &GridSpec,
    amplitude: &Array2<f64>,
    phase: &Array2<f64>,
) -> Result<ComplexField> {
    let (rows, cols) = amplitude.dim();
    if rows != grid.height_px || cols != grid.width_px {
        return Err(Error::GridMismatch(
            grid.width_px,
            grid.height_px,
            cols,
            rows,
        ));
    }
    if amplitude.dim() != phase.dim() {
        return Err(Error::GridMismatch(cols, rows, phase.dim().1, phase.dim().0));
    }
    if amplitude.iter().any(|&a| a < 0.0) {
        return Err(Error::DegenerateInput(
            "amplitude map contains negative values".into(),
        ));
    }
    let mut values = Array2::<Complex64>::zeros((rows, cols));
    for iy in 0..rows {
        for ix in 0..cols {
            values[[iy, ix]] = Complex64::from_polar(amplitude[[iy, ix]], phase[[iy, ix]]);
        }
    }
    ComplexField::new(*grid, values)?.normalized()
}

/// Inner product `<a|b> = sum conj(a) * b` over the full grid.
pub fn mode_overlap(a: &ComplexField, b: &ComplexField) -> Result<Complex64> {
    a.grid.ensure_same_shape(&b.grid)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (va, vb) in a.values.iter().zip(b.values.iter()) {
        acc += va.conj() * vb;
    }
    Ok(acc)
}
