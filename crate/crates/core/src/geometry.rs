//! Tetrahedral NV axes, field projection and Zeeman placement of the
//! resonances.
//!
//! Laboratory frame: the diamond top face has normal +z and the axon runs
//! along +y. The ⟨111⟩ family is rotated 45° about z so that axes 1 and 2 lie
//! in the x–z plane. Their bisector is +z (perpendicular to the axon), and the
//! in-plane azimuthal AP field under the axon, along ±x, projects equally onto
//! both of them and not at all onto axes 3 and 4.

use crate::constants::{Constants, TETRAHEDRAL_ANGLE_DEG, ZERO_FIELD_SPLITTING_HZ};
use crate::error::{domain, Result};
use crate::scalar::abs;
use crate::Real;
use std::ops::{Add, Mul, Neg, Sub};

/// Minimal 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > T::zero() && n.is_finite()).then(|| self * (T::one() / n))
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// The four NV symmetry axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NvAxes<T> {
    axes: [Vec3<T>; 4],
}

impl<T: Real> NvAxes<T> {
    /// Validates unit norm and pairwise −1/3 dot products to 1e-12 (or a few
    /// ulps in single precision).
    pub fn new(axes: [Vec3<T>; 4]) -> Result<Self> {
        let tol = T::check_tol(1e-12);
        for (i, a) in axes.iter().enumerate() {
            if !a.is_finite() || abs(a.norm() - T::one()) > tol {
                return Err(domain(format!("NV axis {} is not a unit vector", i + 1)));
            }
        }
        let third = T::one() / T::lit(3.0);
        for i in 0..4 {
            for j in (i + 1)..4 {
                if abs(axes[i].dot(axes[j]) + third) > tol {
                    return Err(domain(format!(
                        "NV axes {} and {} are not tetrahedral",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { axes })
    }

    /// The ⟨111⟩ family in the laboratory frame described in the module docs.
    pub fn lab_frame() -> Self {
        let s = (T::lit(2.0) / T::lit(3.0)).sqrt();
        let c = T::one() / T::lit(3.0).sqrt();
        let z = T::zero();
        Self::new([
            Vec3::new(s, z, c),
            Vec3::new(-s, z, c),
            Vec3::new(z, -s, -c),
            Vec3::new(z, s, -c),
        ])
        .expect("lab-frame axes are tetrahedral")
    }

    pub fn axes(&self) -> &[Vec3<T>; 4] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> Vec3<T> {
        self.axes[i]
    }
}

impl<T: Real> Default for NvAxes<T> {
    fn default() -> Self {
        Self::lab_frame()
    }
}

/// Dot products of `b` with each axis, in axis order.
pub fn project_field<T: Real>(b: Vec3<T>, axes: &NvAxes<T>) -> [T; 4] {
    axes.axes.map(|a| a.dot(b))
}

/// Static bias field in tesla.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasField<T> {
    vector: Vec3<T>,
}

impl<T: Real> BiasField<T> {
    pub fn new(vector: Vec3<T>) -> Result<Self> {
        if !vector.is_finite() {
            return Err(domain("bias field components must be finite"));
        }
        Ok(Self { vector })
    }

    /// Field along ±x giving a projection of `per_axis` tesla on lab-frame
    /// axes 1 and 2.
    pub fn equal_projection(per_axis: T) -> Result<Self> {
        let factor = NvAxes::<T>::lab_frame().axis(0).x;
        Self::new(Vec3::new(per_axis / factor, T::zero(), T::zero()))
    }

    pub fn vector(&self) -> Vec3<T> {
        self.vector
    }

    pub fn reversed(&self) -> Self {
        Self {
            vector: -self.vector,
        }
    }
}

impl<T: Real> Default for BiasField<T> {
    /// 7 G along each of the two sensing axes.
    fn default() -> Self {
        Self::equal_projection(T::lit(7e-4)).expect("finite")
    }
}

/// Which two axes are overlapped and read out, plus the bias that places
/// them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingGeometry<T> {
    pub axes: NvAxes<T>,
    pub bias: BiasField<T>,
    pub sensing: [usize; 2],
}

impl<T: Real> SensingGeometry<T> {
    pub fn new(axes: NvAxes<T>, bias: BiasField<T>, sensing: [usize; 2]) -> Result<Self> {
        if sensing[0] >= 4 || sensing[1] >= 4 || sensing[0] == sensing[1] {
            return Err(domain("sensing axes must be two distinct indices in 0..4"));
        }
        let p = project_field(bias.vector, &axes);
        let (p0, p1) = (abs(p[sensing[0]]), abs(p[sensing[1]]));
        let scale = p0.max(p1);
        if !(scale > T::zero()) {
            return Err(domain("bias field has no projection on the sensing axes"));
        }
        if abs(p0 - p1) > scale * T::check_tol(1e-9) {
            return Err(domain("bias projections on the sensing axes must be equal"));
        }
        Ok(Self {
            axes,
            bias,
            sensing,
        })
    }

    /// Bias projection magnitude on each sensing axis.
    pub fn bias_projection(&self) -> T {
        abs(self.axes.axis(self.sensing[0]).dot(self.bias.vector))
    }

    /// Summed resonance-shift field of the overlapped pair: each axis
    /// contributes its projection signed by the bias direction on it, so
    /// reversing the bias reverses the sensed field.
    pub fn sensed_projection(&self, b: Vec3<T>) -> T {
        self.sensing.iter().fold(T::zero(), |acc, &i| {
            let a = self.axes.axis(i);
            let sign = a.dot(self.bias.vector).signum();
            acc + sign * a.dot(b)
        })
    }

    /// Effective coupling of a field along `direction` (unit vector) into the
    /// summed resonance shift; 2·cos(π/2 − θ_tet/2) for the in-plane x
    /// direction.
    pub fn coupling(&self, direction: Vec3<T>) -> T {
        self.sensed_projection(direction)
    }

    pub fn with_reversed_bias(&self) -> Self {
        Self {
            bias: self.bias.reversed(),
            ..*self
        }
    }
}

impl<T: Real> Default for SensingGeometry<T> {
    fn default() -> Self {
        Self::new(NvAxes::lab_frame(), BiasField::default(), [0, 1]).expect("valid default")
    }
}

/// Per-axis geometric factor cos(π/2 − θ_tet/2).
pub fn two_axis_angle_factor<T: Real>() -> T {
    let half = T::lit(TETRAHEDRAL_ANGLE_DEG).to_radians() / T::lit(2.0);
    (T::FRAC_PI_2() - half).cos()
}

/// NV spin branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinBranch {
    Plus,
    Minus,
}

/// Resonance angular frequency for a field projection `b_proj` (T) along the
/// NV axis, linear Zeeman regime only.
pub fn zeeman_resonance<T: Real>(b_proj: T, branch: SpinBranch) -> Result<T> {
    if !b_proj.is_finite() || !(abs(b_proj) < T::lit(0.01)) {
        return Err(domain(
            "field projection outside the linear Zeeman regime (|B| < 10 mT)",
        ));
    }
    let d = T::TAU() * T::lit(ZERO_FIELD_SPLITTING_HZ);
    let shift = Constants::<T>::si().gamma * b_proj;
    Ok(match branch {
        SpinBranch::Plus => d + shift,
        SpinBranch::Minus => d - shift,
    })
}
