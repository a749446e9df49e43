//! Polarization qubits: Jones vectors, the six canonical states, Pauli
//! measurement bases, and sphere geometry.
//!
//! Conventions (fixed here once, used everywhere):
//!
//! ```text
//! D = (H + V)/sqrt(2)        A = (H - V)/sqrt(2)
//! R = (H - iV)/sqrt(2)       L = (H + iV)/sqrt(2)
//! sigma_z <-> {H, V}   sigma_x <-> {D, A}   sigma_y <-> {L, R}
//! ```
//!
//! `L` is the +1 eigenvector of `sigma_y` with these signs. Measurement
//! geometry uses the Pauli expectation vector
//! `axis = (<sigma_x>, <sigma_y>, <sigma_z>)`; the optics Stokes triplet
//! relates to it as `(S1, S2, S3) = (axis_z, axis_x, -axis_y)` since
//! `S3 = I_R - I_L` counts right-circular as positive.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A pure polarization state as a normalized complex 2-vector in the
/// horizontal/vertical basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JonesVector {
    /// Horizontal component.
    pub c_h: Complex64,
    /// Vertical component.
    pub c_v: Complex64,
}

impl JonesVector {
    /// Build from raw components, normalizing to unit norm.
    pub fn new(c_h: Complex64, c_v: Complex64) -> Result<Self> {
        let norm_sqr = c_h.norm_sqr() + c_v.norm_sqr();
        if !norm_sqr.is_finite() || norm_sqr < 1e-30 {
            return Err(Error::DegenerateInput(
                "polarization vector must be nonzero and finite".into(),
            ));
        }
        let s = norm_sqr.sqrt();
        Ok(JonesVector {
            c_h: c_h / s,
            c_v: c_v / s,
        })
    }

    /// Horizontal.
    pub fn horizontal() -> Self {
        JonesVector {
            c_h: Complex64::new(1.0, 0.0),
            c_v: Complex64::new(0.0, 0.0),
        }
    }

    /// Vertical.
    pub fn vertical() -> Self {
        JonesVector {
            c_h: Complex64::new(0.0, 0.0),
            c_v: Complex64::new(1.0, 0.0),
        }
    }

    /// Diagonal, +45 degrees.
    pub fn diagonal() -> Self {
        JonesVector {
            c_h: Complex64::new(FRAC_1_SQRT_2, 0.0),
            c_v: Complex64::new(FRAC_1_SQRT_2, 0.0),
        }
    }

    /// Anti-diagonal, -45 degrees.
    pub fn antidiagonal() -> Self {
        JonesVector {
            c_h: Complex64::new(FRAC_1_SQRT_2, 0.0),
            c_v: Complex64::new(-FRAC_1_SQRT_2, 0.0),
        }
    }

    /// Right-hand circular, `(H - iV)/sqrt(2)`.
    pub fn right_circular() -> Self {
        JonesVector {
            c_h: Complex64::new(FRAC_1_SQRT_2, 0.0),
            c_v: Complex64::new(0.0, -FRAC_1_SQRT_2),
        }
    }

    /// Left-hand circular, `(H + iV)/sqrt(2)`.
    pub fn left_circular() -> Self {
        JonesVector {
            c_h: Complex64::new(FRAC_1_SQRT_2, 0.0),
            c_v: Complex64::new(0.0, FRAC_1_SQRT_2),
        }
    }

    /// Linear polarization at `angle` radians from horizontal.
    pub fn linear(angle: f64) -> Self {
        JonesVector {
            c_h: Complex64::new(angle.cos(), 0.0),
            c_v: Complex64::new(angle.sin(), 0.0),
        }
    }

    /// One of the six canonical states by its single-letter label.
    pub fn named(label: &str) -> Option<Self> {
        match label.trim().to_ascii_uppercase().as_str() {
            "H" => Some(Self::horizontal()),
            "V" => Some(Self::vertical()),
            "D" => Some(Self::diagonal()),
            "A" => Some(Self::antidiagonal()),
            "R" => Some(Self::right_circular()),
            "L" => Some(Self::left_circular()),
            _ => None,
        }
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &JonesVector) -> Complex64 {
        self.c_h.conj() * other.c_h + self.c_v.conj() * other.c_v
    }

    /// The orthogonal polarization (unique up to phase).
    pub fn orthogonal(&self) -> JonesVector {
        JonesVector {
            c_h: -self.c_v.conj(),
            c_v: self.c_h.conj(),
        }
    }

    /// Pauli expectation vector `(<sigma_x>, <sigma_y>, <sigma_z>)`.
    pub fn pauli_axis(&self) -> [f64; 3] {
        let cross = self.c_h.conj() * self.c_v;
        [
            2.0 * cross.re,
            2.0 * cross.im,
            self.c_h.norm_sqr() - self.c_v.norm_sqr(),
        ]
    }

    /// State whose Pauli expectation vector points along `axis`
    /// (normalized first; near-zero vectors are rejected).
    pub fn from_pauli_axis(axis: [f64; 3]) -> Result<Self> {
        let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::DegenerateInput(
                "measurement axis must be a nonzero finite vector".into(),
            ));
        }
        let (x, y, z) = (axis[0] / norm, axis[1] / norm, axis[2] / norm);
        let theta = z.clamp(-1.0, 1.0).acos();
        let az = y.atan2(x);
        Ok(JonesVector {
            c_h: Complex64::new((theta / 2.0).cos(), 0.0),
            c_v: Complex64::from_polar((theta / 2.0).sin(), az),
        })
    }
}

/// Rotate `v` about the unit direction of `about` by `angle` radians
/// (Rodrigues formula, right-handed).
pub fn rotate_axis(v: [f64; 3], about: [f64; 3], angle: f64) -> [f64; 3] {
    let n = (about[0] * about[0] + about[1] * about[1] + about[2] * about[2]).sqrt();
    let k = [about[0] / n, about[1] / n, about[2] / n];
    let (s, c) = angle.sin_cos();
    let kxv = [
        k[1] * v[2] - k[2] * v[1],
        k[2] * v[0] - k[0] * v[2],
        k[0] * v[1] - k[1] * v[0],
    ];
    let kdv = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
    [
        v[0] * c + kxv[0] * s + k[0] * kdv * (1.0 - c),
        v[1] * c + kxv[1] * s + k[1] * kdv * (1.0 - c),
        v[2] * c + kxv[2] * s + k[2] * kdv * (1.0 - c),
    ]
}

/// The three Pauli measurement axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliAxis {
    /// `sigma_x`, eigenbasis {D, A}.
    X,
    /// `sigma_y`, eigenbasis {L, R}.
    Y,
    /// `sigma_z`, eigenbasis {H, V}.
    Z,
}

impl PauliAxis {
    /// All three axes in (x, y, z) order.
    pub fn all() -> [PauliAxis; 3] {
        [PauliAxis::X, PauliAxis::Y, PauliAxis::Z]
    }

    /// Unit vector of this axis in Pauli-expectation coordinates.
    pub fn unit(&self) -> [f64; 3] {
        match self {
            PauliAxis::X => [1.0, 0.0, 0.0],
            PauliAxis::Y => [0.0, 1.0, 0.0],
            PauliAxis::Z => [0.0, 0.0, 1.0],
        }
    }

    /// The eigenbasis of this Pauli operator, labeled.
    pub fn basis(&self) -> PolarizationBasis {
        match self {
            PauliAxis::X => PolarizationBasis {
                plus: JonesVector::diagonal(),
                minus: JonesVector::antidiagonal(),
                plus_label: "D".into(),
                minus_label: "A".into(),
            },
            PauliAxis::Y => PolarizationBasis {
                plus: JonesVector::left_circular(),
                minus: JonesVector::right_circular(),
                plus_label: "L".into(),
                minus_label: "R".into(),
            },
            PauliAxis::Z => PolarizationBasis {
                plus: JonesVector::horizontal(),
                minus: JonesVector::vertical(),
                plus_label: "H".into(),
                minus_label: "V".into(),
            },
        }
    }
}

/// An orthonormal polarization basis with outcome labels: `plus` is the +1
/// outcome of the associated two-outcome measurement, `minus` the -1 outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarizationBasis {
    /// +1 outcome projector state.
    pub plus: JonesVector,
    /// -1 outcome projector state.
    pub minus: JonesVector,
    /// Label of the +1 outcome (e.g. "D").
    pub plus_label: String,
    /// Label of the -1 outcome (e.g. "A").
    pub minus_label: String,
}

impl PolarizationBasis {
    /// Basis built from its +1 state; the -1 state is the orthogonal
    /// complement.
    pub fn from_plus(plus: JonesVector, plus_label: &str, minus_label: &str) -> Self {
        PolarizationBasis {
            minus: plus.orthogonal(),
            plus,
            plus_label: plus_label.to_string(),
            minus_label: minus_label.to_string(),
        }
    }

    /// Basis whose +1 state points along a Pauli-expectation axis.
    pub fn from_axis(axis: [f64; 3], plus_label: &str, minus_label: &str) -> Result<Self> {
        Ok(Self::from_plus(
            JonesVector::from_pauli_axis(axis)?,
            plus_label,
            minus_label,
        ))
    }

    /// Orthogonality defect `|<plus|minus>|`, for diagnostics.
    pub fn orthogonality_defect(&self) -> f64 {
        self.plus.inner(&self.minus).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const EPS: f64 = 1e-12;

    fn assert_axis(j: &JonesVector, want: [f64; 3]) {
        let got = j.pauli_axis();
        for k in 0..3 {
            assert_relative_eq!(got[k], want[k], epsilon = EPS);
        }
    }

    #[test]
    fn canonical_states_sit_on_cardinal_axes() {
        assert_axis(&JonesVector::horizontal(), [0.0, 0.0, 1.0]);
        assert_axis(&JonesVector::vertical(), [0.0, 0.0, -1.0]);
        assert_axis(&JonesVector::diagonal(), [1.0, 0.0, 0.0]);
        assert_axis(&JonesVector::antidiagonal(), [-1.0, 0.0, 0.0]);
        assert_axis(&JonesVector::left_circular(), [0.0, 1.0, 0.0]);
        assert_axis(&JonesVector::right_circular(), [0.0, -1.0, 0.0]);
    }

    #[test]
    fn canonical_pairs_are_orthogonal() {
        let pairs = [
            (JonesVector::horizontal(), JonesVector::vertical()),
            (JonesVector::diagonal(), JonesVector::antidiagonal()),
            (JonesVector::right_circular(), JonesVector::left_circular()),
        ];
        for (a, b) in pairs {
            assert!(a.inner(&b).norm() < EPS, "pair should be orthogonal");
            assert_relative_eq!(a.inner(&a).re, 1.0, epsilon = EPS);
        }
    }

    #[test]
    fn mutually_unbiased_overlaps() {
        let h = JonesVector::horizontal();
        for other in [
            JonesVector::diagonal(),
            JonesVector::antidiagonal(),
            JonesVector::right_circular(),
            JonesVector::left_circular(),
        ] {
            assert_relative_eq!(h.inner(&other).norm(), FRAC_1_SQRT_2, epsilon = EPS);
        }
    }

    #[test]
    fn orthogonal_flips_the_axis() {
        let j = JonesVector::new(Complex64::new(0.8, 0.1), Complex64::new(-0.3, 0.5)).unwrap();
        let o = j.orthogonal();
        assert!(j.inner(&o).norm() < EPS);
        let (a, b) = (j.pauli_axis(), o.pauli_axis());
        for k in 0..3 {
            assert_relative_eq!(a[k], -b[k], epsilon = EPS);
        }
    }

    #[test]
    fn axis_round_trip() {
        let samples = [
            [0.3, -0.4, 0.5],
            [1.0, 1.0, 1.0],
            [0.0, 0.0, -2.0],
            [-0.7, 0.1, 0.0],
        ];
        for axis in samples {
            let j = JonesVector::from_pauli_axis(axis).unwrap();
            let got = j.pauli_axis();
            let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
            for k in 0..3 {
                assert_relative_eq!(got[k], axis[k] / n, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn linear_polarizer_angle_doubles_on_the_sphere() {
        for deg in [0.0_f64, 22.5, 45.0, 67.5, 90.0, 130.0] {
            let th = deg.to_radians();
            assert_axis(
                &JonesVector::linear(th),
                [(2.0 * th).sin(), 0.0, (2.0 * th).cos()],
            );
        }
    }

    #[test]
    fn sphere_rotation_about_y_advances_polarizer_angle() {
        // Rotating the H axis about sigma_y by pi/2 lands on the D axis:
        // polarizer angle advances by half the sphere angle.
        let rot = rotate_axis([0.0, 0.0, 1.0], [0.0, 1.0, 0.0], std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(rot[0], 1.0, epsilon = EPS);
        assert_relative_eq!(rot[1], 0.0, epsilon = EPS);
        assert_relative_eq!(rot[2], 0.0, epsilon = EPS);
    }

    #[test]
    fn pauli_bases_match_the_dictionary() {
        let z = PauliAxis::Z.basis();
        assert_eq!((z.plus_label.as_str(), z.minus_label.as_str()), ("H", "V"));
        let x = PauliAxis::X.basis();
        assert_eq!((x.plus_label.as_str(), x.minus_label.as_str()), ("D", "A"));
        let y = PauliAxis::Y.basis();
        assert_eq!((y.plus_label.as_str(), y.minus_label.as_str()), ("L", "R"));
        for basis in [z, x, y] {
            assert!(basis.orthogonality_defect() < EPS);
            // The +1 state's axis must equal the corresponding unit vector.
        }
        assert_axis(&PauliAxis::Y.basis().plus, [0.0, 1.0, 0.0]);
        assert_axis(&PauliAxis::X.basis().plus, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn named_lookup_covers_the_six_states() {
        for (label, want) in [
            ("H", JonesVector::horizontal()),
            ("v", JonesVector::vertical()),
            ("D", JonesVector::diagonal()),
            ("a", JonesVector::antidiagonal()),
            ("R", JonesVector::right_circular()),
            ("l", JonesVector::left_circular()),
        ] {
            let got = JonesVector::named(label).unwrap();
            assert!(got.inner(&want).norm() > 1.0 - EPS);
        }
        assert!(JonesVector::named("Q").is_none());
    }
}
