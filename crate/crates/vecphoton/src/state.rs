//! The hybrid biphoton state and its exact analytic observables.
//!
//! The two-photon state couples photon 1's polarization qubit to photon 2's
//! transverse mode:
//!
//! ```text
//! |psi> = a |H>|u1, pol1> + b e^{i phi} |V>|u2, pol2>
//! ```
//!
//! with `a, b >= 0`, `a^2 + b^2 = 1`, `u1, u2` unit-power scalar modes and
//! `pol1 _|_ pol2`. Projecting photon 1 onto a trigger polarization leaves
//! photon 2 in a spatially varying polarization pattern (a vector beam);
//! projecting both photons and reading out pixel `(x, y)` gives the joint
//! detection probability that drives the camera simulation.
//!
//! Everything here is exact (no sampling): these functions serve as the
//! noiseless oracle for the whole analysis chain. An optional isotropic
//! noise fraction `p` mixes the pure state with polarization-white noise
//! carrying the same marginal intensity profile; it multiplies every
//! two-photon correlation by `(1 - p)` and leaves marginals unchanged.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, PixelRect};
use crate::modes::ComplexField;
use crate::polarization::{JonesVector, PauliAxis, PolarizationBasis};

/// Threshold below which a local squared amplitude counts as dark.
pub const DARK_THRESHOLD: f64 = 1e-30;

/// One arm of the superposition: a scalar mode carrying a uniform
/// polarization.
#[derive(Clone, Debug)]
pub struct Arm {
    /// Unit-power transverse mode profile.
    pub field: ComplexField,
    /// Polarization carried by this mode.
    pub pol: JonesVector,
}

impl Arm {
    /// Convenience constructor.
    pub fn new(field: ComplexField, pol: JonesVector) -> Self {
        Arm { field, pol }
    }
}

/// Validated hybrid biphoton state (see module docs).
#[derive(Clone, Debug)]
pub struct HybridBiphotonState {
    a: f64,
    b: f64,
    phi: f64,
    noise_p: f64,
    arm1: Arm,
    arm2: Arm,
}

/// Build and validate a state.
///
/// `a` and `b` must be nonnegative with `a^2 + b^2 = 1` within `1e-9` (they
/// are renormalized exactly afterwards); the arm polarizations must be
/// orthogonal within `1e-12`; both mode fields must share a grid.
pub fn build_state(a: f64, b: f64, phi: f64, arm1: Arm, arm2: Arm) -> Result<HybridBiphotonState> {
    if !a.is_finite() || !b.is_finite() || !phi.is_finite() {
        return Err(Error::Config("state parameters must be finite".into()));
    }
    if a < 0.0 || b < 0.0 {
        return Err(Error::Config(format!(
            "amplitudes must be nonnegative (phases belong in phi), got a={a}, b={b}"
        )));
    }
    let norm = a * a + b * b;
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(norm));
    }
    let defect = arm1.pol.inner(&arm2.pol).norm();
    if defect > 1e-12 {
        return Err(Error::NonOrthogonalArms(defect));
    }
    arm1.field.grid().ensure_same_shape(arm2.field.grid())?;
    let s = norm.sqrt();
    Ok(HybridBiphotonState {
        a: a / s,
        b: b / s,
        phi,
        noise_p: 0.0,
        arm1,
        arm2,
    })
}

impl HybridBiphotonState {
    /// Amplitude of the `|H>` arm.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Amplitude of the `|V>` arm.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Relative phase between the arms, radians.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Isotropic noise fraction in `[0, 1)`.
    pub fn noise_p(&self) -> f64 {
        self.noise_p
    }

    /// Arm associated with photon 1 being `|H>`.
    pub fn arm1(&self) -> &Arm {
        &self.arm1
    }

    /// Arm associated with photon 1 being `|V>`.
    pub fn arm2(&self) -> &Arm {
        &self.arm2
    }

    /// The common grid of both arms.
    pub fn grid(&self) -> &GridSpec {
        self.arm1.field.grid()
    }

    /// Same state with an isotropic noise fraction `p` in `[0, 1)`.
    pub fn with_noise(mut self, p: f64) -> Result<Self> {
        if !p.is_finite() || !(0.0..1.0).contains(&p) {
            return Err(Error::NoiseOutOfRange(p));
        }
        self.noise_p = p;
        Ok(self)
    }

    /// Unconditioned detection probability per pixel,
    /// `I(x) = a^2 |u1|^2 + b^2 |u2|^2` (sums to 1 over the grid).
    pub fn marginal_intensity(&self) -> Array2<f64> {
        let a2 = self.a * self.a;
        let b2 = self.b * self.b;
        let mut out = self.arm1.field.intensity();
        out.zip_mut_with(&self.arm2.field.intensity(), |acc, &i2| {
            *acc = a2 * *acc + b2 * i2;
        });
        out
    }

    /// The two local amplitudes `(a u1(x), b e^{i phi} u2(x))` before any
    /// polarization projection.
    fn local_amplitudes(&self, ix: usize, iy: usize) -> (Complex64, Complex64) {
        let alpha1 = self.arm1.field.get(ix, iy) * self.a;
        let alpha2 = self.arm2.field.get(ix, iy) * Complex64::from_polar(self.b, self.phi);
        (alpha1, alpha2)
    }
}

/// Photon 2 after its partner was projected onto a trigger: a two-component
/// transverse polarization field with unit total intensity.
#[derive(Clone, Debug)]
pub struct VectorPhotonField {
    /// Grid shared by both components.
    pub grid: GridSpec,
    /// Horizontal Jones component per pixel.
    pub jones_h: Array2<Complex64>,
    /// Vertical Jones component per pixel.
    pub jones_v: Array2<Complex64>,
}

impl VectorPhotonField {
    /// Jones components at pixel `(ix, iy)`.
    pub fn jones_at(&self, ix: usize, iy: usize) -> (Complex64, Complex64) {
        (self.jones_h[[iy, ix]], self.jones_v[[iy, ix]])
    }

    /// Pointwise intensity `|j_h|^2 + |j_v|^2`.
    pub fn intensity(&self) -> Array2<f64> {
        let mut out = self.jones_h.mapv(|v| v.norm_sqr());
        out.zip_mut_with(&self.jones_v, |acc, &v| *acc += v.norm_sqr());
        out
    }

    /// Intensity after an ideal polarization analyzer.
    pub fn analyzed_intensity(&self, analyzer: &JonesVector) -> Array2<f64> {
        let ah = analyzer.c_h.conj();
        let av = analyzer.c_v.conj();
        let mut out = Array2::<f64>::zeros(self.jones_h.dim());
        out.indexed_iter_mut().for_each(|((iy, ix), slot)| {
            let amp = ah * self.jones_h[[iy, ix]] + av * self.jones_v[[iy, ix]];
            *slot = amp.norm_sqr();
        });
        out
    }
}

/// Project photon 1 onto `trigger`; return photon 2's normalized pattern and
/// the heralding probability of that trigger outcome.
///
/// The pattern is the pure-state conditional field
/// `a <t|H> u1 pol1 + b e^{i phi} <t|V> u2 pol2`, normalized to unit total
/// intensity; the probability is its squared norm before normalization,
/// `a^2 |<t|H>|^2 + b^2 |<t|V>|^2`.
pub fn conditional_field(
    state: &HybridBiphotonState,
    trigger: &JonesVector,
) -> Result<(VectorPhotonField, f64)> {
    let c1 = trigger.c_h.conj() * state.a;
    let c2 = trigger.c_v.conj() * Complex64::from_polar(state.b, state.phi);
    let probability = c1.norm_sqr() + c2.norm_sqr();
    if probability < DARK_THRESHOLD {
        return Err(Error::HeraldImpossible(format!(
            "({:.3}{:+.3}i)H + ({:.3}{:+.3}i)V",
            trigger.c_h.re, trigger.c_h.im, trigger.c_v.re, trigger.c_v.im
        )));
    }
    let grid = *state.grid();
    let scale = 1.0 / probability.sqrt();
    let u1 = state.arm1.field.values();
    let u2 = state.arm2.field.values();
    let (p1, p2) = (state.arm1.pol, state.arm2.pol);
    let mut jones_h = Array2::<Complex64>::zeros(u1.dim());
    let mut jones_v = Array2::<Complex64>::zeros(u1.dim());
    for ((iy, ix), jh) in jones_h.indexed_iter_mut() {
        let t1 = c1 * u1[[iy, ix]] * scale;
        let t2 = c2 * u2[[iy, ix]] * scale;
        *jh = t1 * p1.c_h + t2 * p2.c_h;
        jones_v[[iy, ix]] = t1 * p1.c_v + t2 * p2.c_v;
    }
    Ok((
        VectorPhotonField {
            grid,
            jones_h,
            jones_v,
        },
        probability,
    ))
}

/// The (pre-normalization) two-qubit state carried by one pixel: photon 1's
/// polarization entangled with photon 2's polarization at that position.
#[derive(Clone, Copy, Debug)]
pub struct LocalTwoQubitState {
    /// Pixel `(x, y)` this state belongs to.
    pub pixel: (usize, usize),
    /// Raw coefficient of `|H>|pol1>`: `a u1(x)`.
    pub amplitude_1: Complex64,
    /// Raw coefficient of `|V>|pol2>`: `b e^{i phi} u2(x)`.
    pub amplitude_2: Complex64,
    /// Local weight `|amplitude_1|^2 + |amplitude_2|^2` (the pixel's share
    /// of the total intensity).
    pub norm: f64,
}

impl LocalTwoQubitState {
    /// Amplitudes scaled to a unit-norm two-qubit state.
    pub fn normalized_amplitudes(&self) -> (Complex64, Complex64) {
        let s = 1.0 / self.norm.sqrt();
        (self.amplitude_1 * s, self.amplitude_2 * s)
    }
}

/// Reduce the state to the two-qubit state at one pixel.
///
/// Dark pixels (weight below `1e-30`) carry no state and are an error.
pub fn local_two_qubit(
    state: &HybridBiphotonState,
    pixel: (usize, usize),
) -> Result<LocalTwoQubitState> {
    let (ix, iy) = pixel;
    if !state.grid().contains(ix, iy) {
        return Err(Error::PixelOutsideGrid(ix, iy));
    }
    let (amplitude_1, amplitude_2) = state.local_amplitudes(ix, iy);
    let norm = amplitude_1.norm_sqr() + amplitude_2.norm_sqr();
    if norm < DARK_THRESHOLD {
        return Err(Error::DarkPixel {
            x: ix,
            y: iy,
            norm,
        });
    }
    Ok(LocalTwoQubitState {
        pixel,
        amplitude_1,
        amplitude_2,
        norm,
    })
}

/// Concurrence of a pure local two-qubit state: `C = 2 |a1 a2|` on the
/// normalized amplitudes. `0` when either arm vanishes locally, `1` when
/// both contribute equally.
pub fn local_concurrence(local: &LocalTwoQubitState) -> f64 {
    let (a1, a2) = local.normalized_amplitudes();
    2.0 * (a1 * a2).norm()
}

/// Exact probability that photon 1 passes `trigger`, photon 2 passes
/// `analyzer`, and photon 2 arrives at `pixel`.
///
/// Summed over a full trigger pair, a full analyzer pair, and all pixels
/// this is exactly 1. The isotropic noise fraction replaces the pure-state
/// term by `(1-p) P_pure + p I(x)/4`.
pub fn joint_probability(
    state: &HybridBiphotonState,
    trigger: &JonesVector,
    analyzer: &JonesVector,
    pixel: (usize, usize),
) -> Result<f64> {
    let (ix, iy) = pixel;
    if !state.grid().contains(ix, iy) {
        return Err(Error::PixelOutsideGrid(ix, iy));
    }
    let (c1, c2) = projection_coefficients(state, trigger, analyzer);
    let u1 = state.arm1.field.get(ix, iy);
    let u2 = state.arm2.field.get(ix, iy);
    let pure = (c1 * u1 + c2 * u2).norm_sqr();
    let p = state.noise_p;
    if p == 0.0 {
        return Ok(pure);
    }
    let a2 = state.a * state.a;
    let b2 = state.b * state.b;
    let marginal = a2 * u1.norm_sqr() + b2 * u2.norm_sqr();
    Ok((1.0 - p) * pure + p * marginal / 4.0)
}

/// Full-grid map of [`joint_probability`] for one (trigger, analyzer) pair.
pub fn joint_probability_map(
    state: &HybridBiphotonState,
    trigger: &JonesVector,
    analyzer: &JonesVector,
) -> Array2<f64> {
    let (c1, c2) = projection_coefficients(state, trigger, analyzer);
    let u1 = state.arm1.field.values();
    let u2 = state.arm2.field.values();
    let p = state.noise_p;
    let a2 = state.a * state.a;
    let b2 = state.b * state.b;
    let mut out = Array2::<f64>::zeros(u1.dim());
    for ((iy, ix), slot) in out.indexed_iter_mut() {
        let v1 = u1[[iy, ix]];
        let v2 = u2[[iy, ix]];
        let pure = (c1 * v1 + c2 * v2).norm_sqr();
        *slot = if p == 0.0 {
            pure
        } else {
            let marginal = a2 * v1.norm_sqr() + b2 * v2.norm_sqr();
            (1.0 - p) * pure + p * marginal / 4.0
        };
    }
    out
}

/// Amplitude coefficients multiplying `u1` and `u2` after projecting photon 1
/// onto `trigger` and photon 2 onto `analyzer`.
fn projection_coefficients(
    state: &HybridBiphotonState,
    trigger: &JonesVector,
    analyzer: &JonesVector,
) -> (Complex64, Complex64) {
    let c1 = trigger.c_h.conj() * analyzer.inner(&state.arm1.pol) * state.a;
    let c2 = trigger.c_v.conj()
        * analyzer.inner(&state.arm2.pol)
        * Complex64::from_polar(state.b, state.phi);
    (c1, c2)
}

/// Exact correlation `E = <sigma_t (x) sigma_a>` over a pixel region,
/// conditioned on detection inside the region.
///
/// `E = [P(++) + P(--) - P(+-) - P(-+)] / [sum of all four]`, with each term
/// summed over the region's pixels; the noise fraction scales the result by
/// `(1 - p)`.
pub fn theoretical_correlation(
    state: &HybridBiphotonState,
    region: &PixelRect,
    trigger_basis: &PolarizationBasis,
    analyzer_basis: &PolarizationBasis,
) -> Result<f64> {
    region.ensure_inside(state.grid())?;
    // Four outcome channels, weighted +1 for agreeing outcomes.
    let channels = [
        (&trigger_basis.plus, &analyzer_basis.plus, 1.0),
        (&trigger_basis.minus, &analyzer_basis.minus, 1.0),
        (&trigger_basis.plus, &analyzer_basis.minus, -1.0),
        (&trigger_basis.minus, &analyzer_basis.plus, -1.0),
    ];
    let coeffs: Vec<(Complex64, Complex64, f64)> = channels
        .iter()
        .map(|(t, a, sign)| {
            let (c1, c2) = projection_coefficients(state, t, a);
            (c1, c2, *sign)
        })
        .collect();

    let u1 = state.arm1.field.values();
    let u2 = state.arm2.field.values();
    let mut numerator = 0.0;
    let mut total = 0.0;
    for (ix, iy) in region.pixels() {
        let v1 = u1[[iy, ix]];
        let v2 = u2[[iy, ix]];
        for &(c1, c2, sign) in &coeffs {
            let p = (c1 * v1 + c2 * v2).norm_sqr();
            numerator += sign * p;
            total += p;
        }
    }
    if total < DARK_THRESHOLD {
        return Err(Error::DarkRegion(total));
    }
    Ok((1.0 - state.noise_p) * numerator / total)
}

/// [`theoretical_correlation`] for a pair of Pauli axes using the canonical
/// eigenbases (`sigma_z` -> {H,V}, `sigma_x` -> {D,A}, `sigma_y` -> {L,R}).
pub fn theoretical_pauli_correlation(
    state: &HybridBiphotonState,
    region: &PixelRect,
    trigger_axis: PauliAxis,
    analyzer_axis: PauliAxis,
) -> Result<f64> {
    theoretical_correlation(
        state,
        region,
        &trigger_axis.basis(),
        &analyzer_axis.basis(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::modes::{default_waist, make_custom, make_lg};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const EPS: f64 = 1e-9;

    fn grid() -> GridSpec {
        GridSpec::new(64, 64, 1.0).unwrap()
    }

    /// The cylindrical-vector configuration: circularly polarized first-order
    /// vortex modes of opposite charge.
    fn lg_vector_state() -> HybridBiphotonState {
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

    /// Uniform-profile maximally entangled state: both arms share one mode,
    /// so every pixel carries the same Bell pair.
    fn uniform_bell_state() -> HybridBiphotonState {
        let g = grid();
        let u = make_lg(&g, 0, 0, default_waist(&g)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        build_state(
            s,
            s,
            0.0,
            Arm::new(u.clone(), JonesVector::horizontal()),
            Arm::new(u, JonesVector::vertical()),
        )
        .unwrap()
    }

    #[test]
    fn build_rejects_bad_parameters() {
        let g = grid();
        let u = make_lg(&g, 0, 0, default_waist(&g)).unwrap();
        let err = build_state(
            0.9,
            0.9,
            0.0,
            Arm::new(u.clone(), JonesVector::horizontal()),
            Arm::new(u.clone(), JonesVector::vertical()),
        );
        assert!(matches!(err, Err(Error::NotNormalized(_))));

        let err = build_state(
            1.0,
            0.0,
            0.0,
            Arm::new(u.clone(), JonesVector::horizontal()),
            Arm::new(u.clone(), JonesVector::diagonal()),
        );
        assert!(matches!(err, Err(Error::NonOrthogonalArms(_))));

        let err = build_state(
            std::f64::consts::FRAC_1_SQRT_2,
            -std::f64::consts::FRAC_1_SQRT_2,
            0.0,
            Arm::new(u.clone(), JonesVector::horizontal()),
            Arm::new(u, JonesVector::vertical()),
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn impossible_trigger_is_reported() {
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
        let err = conditional_field(&state, &JonesVector::vertical());
        assert!(matches!(err, Err(Error::HeraldImpossible(_))));
    }

    #[test]
    fn plain_trigger_selects_one_arm() {
        let state = lg_vector_state();
        let (field, prob) = conditional_field(&state, &JonesVector::horizontal()).unwrap();
        assert_relative_eq!(prob, 0.5, epsilon = EPS);
        // The pattern is arm 1's mode with arm 1's uniform polarization:
        // j_v / j_h = pol1.c_v / pol1.c_h everywhere the field is bright.
        let p1 = state.arm1().pol;
        let want = p1.c_v / p1.c_h;
        for (ix, iy) in [(32, 20), (20, 32), (40, 40)] {
            let (jh, jv) = field.jones_at(ix, iy);
            if jh.norm() > 1e-6 {
                let got = jv / jh;
                assert_abs_diff_eq!(got.re, want.re, epsilon = EPS);
                assert_abs_diff_eq!(got.im, want.im, epsilon = EPS);
            }
        }
        // Total intensity normalized.
        assert_relative_eq!(field.intensity().sum(), 1.0, epsilon = EPS);
    }

    #[test]
    fn diagonal_trigger_on_vortex_pair_is_radial() {
        let state = lg_vector_state();
        let (field, _) = conditional_field(&state, &JonesVector::diagonal()).unwrap();
        let g = *state.grid();
        // At azimuth theta the local polarization must be linear along
        // theta: j_v / j_h = tan(theta), real.
        for (ix, iy) in [(50, 31), (31, 50), (45, 45), (20, 25)] {
            let (_, theta) = g.polar(ix, iy);
            let (jh, jv) = field.jones_at(ix, iy);
            if jh.norm() < 1e-9 {
                continue;
            }
            let ratio = jv / jh;
            assert_abs_diff_eq!(ratio.im, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(ratio.re, theta.tan(), epsilon = 1e-6);
        }
    }

    #[test]
    fn joint_probabilities_are_complete() {
        for state in [lg_vector_state(), uniform_bell_state()] {
            let mut total = 0.0;
            for trigger in [JonesVector::horizontal(), JonesVector::vertical()] {
                for analyzer in [JonesVector::diagonal(), JonesVector::antidiagonal()] {
                    total += joint_probability_map(&state, &trigger, &analyzer).sum();
                }
            }
            assert_relative_eq!(total, 1.0, epsilon = EPS);
        }
    }

    #[test]
    fn completeness_survives_noise() {
        let state = lg_vector_state().with_noise(0.3).unwrap();
        let mut total = 0.0;
        for trigger in [JonesVector::diagonal(), JonesVector::antidiagonal()] {
            for analyzer in [JonesVector::right_circular(), JonesVector::left_circular()] {
                total += joint_probability_map(&state, &trigger, &analyzer).sum();
            }
        }
        assert_relative_eq!(total, 1.0, epsilon = EPS);
    }

    #[test]
    fn joint_probability_factorizes_through_the_conditional_field() {
        let state = lg_vector_state();
        let trigger = JonesVector::linear(0.3);
        let analyzer = JonesVector::new(
            Complex64::new(0.6, 0.2),
            Complex64::new(-0.5, 0.4),
        )
        .unwrap();
        let (field, herald) = conditional_field(&state, &trigger).unwrap();
        for (ix, iy) in [(30, 30), (40, 25), (25, 40)] {
            let joint = joint_probability(&state, &trigger, &analyzer, (ix, iy)).unwrap();
            let (jh, jv) = field.jones_at(ix, iy);
            let amp = analyzer.c_h.conj() * jh + analyzer.c_v.conj() * jv;
            assert_abs_diff_eq!(joint, herald * amp.norm_sqr(), epsilon = 1e-12);
        }
    }

    #[test]
    fn conditional_patterns_recompose_the_marginal() {
        let state = lg_vector_state();
        let trigger = JonesVector::linear(1.1);
        let (f_plus, p_plus) = conditional_field(&state, &trigger).unwrap();
        let (f_minus, p_minus) = conditional_field(&state, &trigger.orthogonal()).unwrap();
        let marginal = state.marginal_intensity();
        let recomposed =
            f_plus.intensity().mapv(|v| v * p_plus) + f_minus.intensity().mapv(|v| v * p_minus);
        for (got, want) in recomposed.iter().zip(marginal.iter()) {
            assert_abs_diff_eq!(got, want, epsilon = EPS);
        }
    }

    #[test]
    fn concurrence_matches_closed_forms() {
        let mk = |a1: f64, a2: f64| LocalTwoQubitState {
            pixel: (0, 0),
            amplitude_1: Complex64::new(a1, 0.0),
            amplitude_2: Complex64::new(0.0, a2),
            norm: a1 * a1 + a2 * a2,
        };
        assert_relative_eq!(local_concurrence(&mk(1.0, 1.0)), 1.0, epsilon = EPS);
        assert_relative_eq!(local_concurrence(&mk(1.0, 0.0)), 0.0, epsilon = EPS);
        assert_relative_eq!(
            local_concurrence(&mk(0.9_f64.sqrt(), 0.1_f64.sqrt())),
            0.6,
            epsilon = EPS
        );
    }

    #[test]
    fn concurrence_ignores_the_global_phase() {
        let g = grid();
        let w = default_waist(&g);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let make = |phi: f64| {
            build_state(
                s,
                s,
                phi,
                Arm::new(make_lg(&g, 1, 0, w).unwrap(), JonesVector::horizontal()),
                Arm::new(make_lg(&g, 0, 0, w).unwrap(), JonesVector::vertical()),
            )
            .unwrap()
        };
        let s0 = make(0.0);
        let s1 = make(2.3);
        for pixel in [(40, 31), (31, 40)] {
            let c0 = local_concurrence(&local_two_qubit(&s0, pixel).unwrap());
            let c1 = local_concurrence(&local_two_qubit(&s1, pixel).unwrap());
            assert_relative_eq!(c0, c1, epsilon = EPS);
        }
    }

    #[test]
    fn dark_pixels_are_flagged() {
        let g = grid();
        let mut amp = ndarray::Array2::<f64>::zeros((g.height_px, g.width_px));
        let ph = ndarray::Array2::<f64>::zeros((g.height_px, g.width_px));
        // Bright only in the lower half.
        for iy in 32..64 {
            for ix in 0..64 {
                amp[[iy, ix]] = 1.0;
            }
        }
        let u = make_custom(&g, &amp, &ph).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let state = build_state(
            s,
            s,
            0.0,
            Arm::new(u.clone(), JonesVector::horizontal()),
            Arm::new(u, JonesVector::vertical()),
        )
        .unwrap();
        assert!(matches!(
            local_two_qubit(&state, (5, 5)),
            Err(Error::DarkPixel { .. })
        ));
        let dark = PixelRect::new(0, 0, 8, 8).unwrap();
        assert!(matches!(
            theoretical_correlation(
                &state,
                &dark,
                &PauliAxis::Z.basis(),
                &PauliAxis::Z.basis()
            ),
            Err(Error::DarkRegion(_))
        ));
        assert!(matches!(
            local_two_qubit(&state, (99, 5)),
            Err(Error::PixelOutsideGrid(_, _))
        ));
    }

    #[test]
    fn bell_pair_correlations_on_the_uniform_state() {
        let state = uniform_bell_state();
        let all = PixelRect::new(0, 0, 64, 64).unwrap();
        // (|H>|H> + |V>|V>)/sqrt(2): E_xx = +1, E_yy = -1, E_zz = +1.
        let exx =
            theoretical_pauli_correlation(&state, &all, PauliAxis::X, PauliAxis::X).unwrap();
        let eyy =
            theoretical_pauli_correlation(&state, &all, PauliAxis::Y, PauliAxis::Y).unwrap();
        let ezz =
            theoretical_pauli_correlation(&state, &all, PauliAxis::Z, PauliAxis::Z).unwrap();
        assert_relative_eq!(exx, 1.0, epsilon = EPS);
        assert_relative_eq!(eyy, -1.0, epsilon = EPS);
        assert_relative_eq!(ezz, 1.0, epsilon = EPS);
        // Cross terms vanish.
        let exy =
            theoretical_pauli_correlation(&state, &all, PauliAxis::X, PauliAxis::Y).unwrap();
        assert_abs_diff_eq!(exy, 0.0, epsilon = EPS);
    }

    #[test]
    fn noise_scales_correlations_linearly() {
        let state = uniform_bell_state();
        let noisy = uniform_bell_state().with_noise(0.4).unwrap();
        let all = PixelRect::new(0, 0, 64, 64).unwrap();
        let clean =
            theoretical_pauli_correlation(&state, &all, PauliAxis::X, PauliAxis::X).unwrap();
        let dimmed =
            theoretical_pauli_correlation(&noisy, &all, PauliAxis::X, PauliAxis::X).unwrap();
        assert_relative_eq!(dimmed, 0.6 * clean, epsilon = EPS);
        assert!(matches!(
            uniform_bell_state().with_noise(1.0),
            Err(Error::NoiseOutOfRange(_))
        ));
    }

    #[test]
    fn product_state_respects_the_separable_bound() {
        let g = grid();
        let w = default_waist(&g);
        let state = build_state(
            1.0,
            0.0,
            0.0,
            Arm::new(make_lg(&g, 1, 0, w).unwrap(), JonesVector::diagonal()),
            Arm::new(make_lg(&g, -1, 0, w).unwrap(), JonesVector::antidiagonal()),
        )
        .unwrap();
        let all = PixelRect::new(0, 0, 64, 64).unwrap();
        let mut witness = 0.0;
        for axis in PauliAxis::all() {
            witness += theoretical_pauli_correlation(&state, &all, axis, axis)
                .unwrap()
                .abs();
        }
        assert!(
            witness <= 1.0 + EPS,
            "separable witness sum must stay below 1, got {witness}"
        );
    }
}
