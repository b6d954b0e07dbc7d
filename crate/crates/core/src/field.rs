//! Sampled, compactly supported functions on a uniform 1D mesh.
//!
//! A [`Field1D`] stores samples `u_j ≈ u((j - center)·dx)` together with the
//! time it represents. The first and last samples are always exactly zero, so
//! the exterior of the stored window is implicitly zero as well.

use crate::error::{Result, RgError};

/// Node layout of a field: spacing, index of `x = 0`, and node count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    pub dx: f64,
    pub center: usize,
    pub len: usize,
}

impl Mesh {
    pub fn new(dx: f64, center: usize, len: usize) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(RgError::InvalidField(format!("mesh spacing must be > 0, got {dx}")));
        }
        if len < 3 || center >= len {
            return Err(RgError::InvalidField(format!(
                "mesh needs at least 3 nodes with center inside (len = {len}, center = {center})"
            )));
        }
        Ok(Self { dx, center, len })
    }

    /// Symmetric mesh covering `[-extent, extent]` (rounded to whole nodes).
    pub fn symmetric(dx: f64, extent: f64) -> Result<Self> {
        if !(extent > 0.0) {
            return Err(RgError::InvalidField(format!("extent must be > 0, got {extent}")));
        }
        let half = (extent / dx).round().max(1.0) as usize;
        Self::new(dx, half, 2 * half + 1)
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - self.center as f64) * self.dx
    }

    /// Nodes to the left and right of the center.
    pub fn span(&self) -> NodeSpan {
        NodeSpan { left: self.center, right: self.len - 1 - self.center }
    }
}

/// Number of nodes on each side of the center node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeSpan {
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    dx: f64,
    center: usize,
    values: Vec<f64>,
    t: f64,
}

impl Field1D {
    pub fn new(dx: f64, center: usize, values: Vec<f64>, t: f64) -> Result<Self> {
        Mesh::new(dx, center, values.len())?;
        if !t.is_finite() {
            return Err(RgError::InvalidField(format!("time tag must be finite, got {t}")));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(RgError::InvalidField(format!("sample {j} is not finite")));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
            return Err(RgError::InvalidField(
                "first and last samples must be exactly zero (compact support)".into(),
            ));
        }
        Ok(Self { dx, center, values, t })
    }

    /// Samples `f` on `mesh`; the two end samples are forced to zero.
    pub fn from_fn(mesh: Mesh, t: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values: Vec<f64> = (0..mesh.len).map(|j| f(mesh.x(j))).collect();
        values[0] = 0.0;
        values[mesh.len - 1] = 0.0;
        Self::new(mesh.dx, mesh.center, values, t)
    }

    pub fn zeros(mesh: Mesh, t: f64) -> Self {
        Self { dx: mesh.dx, center: mesh.center, values: vec![0.0; mesh.len], t }
    }

    /// Smooth bump `h·exp(1 − 1/(1 − (x/w)²))` for `|x| < w`, zero elsewhere.
    pub fn bump(mesh: Mesh, h: f64, w: f64) -> Result<Self> {
        if !(w > 0.0) {
            return Err(RgError::InvalidField(format!("bump half-width must be > 0, got {w}")));
        }
        Self::from_fn(mesh, 1.0, |x| bump_shape(x, w) * h)
    }

    /// Bump of half-width `w` whose discrete mass equals `target_mass`.
    pub fn bump_with_mass(mesh: Mesh, target_mass: f64, w: f64) -> Result<Self> {
        let unit = Self::bump(mesh, 1.0, w)?;
        let m = mass(&unit);
        if m <= 0.0 {
            return Err(RgError::InvalidField(format!(
                "bump of half-width {w} is not resolved by dx = {}",
                mesh.dx
            )));
        }
        Ok(unit.scaled(target_mass / m))
    }

    /// Internal constructor for hot loops that already maintain the invariants.
    pub(crate) fn from_parts(dx: f64, center: usize, values: Vec<f64>, t: f64) -> Self {
        debug_assert!(values.len() >= 3 && center < values.len());
        debug_assert!(values[0] == 0.0 && values[values.len() - 1] == 0.0);
        Self { dx, center, values, t }
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mesh(&self) -> Mesh {
        Mesh { dx: self.dx, center: self.center, len: self.values.len() }
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - self.center as f64) * self.dx
    }

    /// Sample at `x = 0`.
    pub fn origin(&self) -> f64 {
        self.values[self.center]
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn scaled(mut self, c: f64) -> Self {
        for v in &mut self.values {
            *v *= c;
        }
        self
    }

    /// Linear interpolation at an arbitrary point, zero outside the window.
    pub fn interpolate(&self, x: f64) -> f64 {
        self.interpolate_nodes(x / self.dx)
    }

    /// Linear interpolation at `s` node units from the center.
    pub(crate) fn interpolate_nodes(&self, s: f64) -> f64 {
        let pos = s + self.center as f64;
        if !(pos >= 0.0) || pos > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        if frac == 0.0 || i + 1 >= self.values.len() {
            return self.values[i];
        }
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

/// Unit-height bump profile with half-width `w`.
pub fn bump_shape(x: f64, w: f64) -> f64 {
    let s = x / w;
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Discrete integral `dx·Σ u_j`.
pub fn mass(f: &Field1D) -> f64 {
    f.dx * f.values.iter().sum::<f64>()
}

pub fn l1_norm(f: &Field1D) -> f64 {
    f.dx * f.values.iter().map(|v| v.abs()).sum::<f64>()
}

pub fn linf_norm(f: &Field1D) -> f64 {
    f.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
