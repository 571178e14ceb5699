use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    DecayToZero,
    Periodic,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::DecayToZero => "decay-to-zero",
            Boundary::Periodic => "periodic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "decay-to-zero" | "decay" => Some(Boundary::DecayToZero),
            "periodic" => Some(Boundary::Periodic),
            _ => None,
        }
    }
}

/// Uniform Cartesian grid. Node (i,j,k) sits at origin + (i,j,k)*spacing.
/// For periodic grids the period along each axis is dims*spacing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub boundary: Boundary,
}

impl Grid3 {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3], boundary: Boundary) -> Result<Self> {
        if dims.iter().any(|&n| n < 4) {
            return Err(Error::InvalidGrid(format!("all dims must be >= 4, got {dims:?}")));
        }
        if spacing.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing:?}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Grid3 { dims, spacing, origin, boundary })
    }

    /// Cube [-half, half]^3 with n nodes per axis, endpoints included.
    pub fn cube(half: f64, n: usize) -> Result<Self> {
        let h = 2.0 * half / (n as f64 - 1.0);
        Grid3::new([n; 3], [h; 3], [-half; 3], Boundary::DecayToZero)
    }

    /// Periodic box [-half, half)^3 with n nodes per axis.
    pub fn periodic_cube(half: f64, n: usize) -> Result<Self> {
        let h = 2.0 * half / n as f64;
        Grid3::new([n; 3], [h; 3], [-half; 3], Boundary::Periodic)
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn unindex(&self, n: usize) -> [usize; 3] {
        let k = n % self.dims[2];
        let j = (n / self.dims[2]) % self.dims[1];
        let i = n / (self.dims[1] * self.dims[2]);
        [i, j, k]
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(
            self.origin[0] + i as f64 * self.spacing[0],
            self.origin[1] + j as f64 * self.spacing[1],
            self.origin[2] + k as f64 * self.spacing[2],
        )
    }

    pub fn point_at(&self, n: usize) -> Vec3 {
        let [i, j, k] = self.unindex(n);
        self.point(i, j, k)
    }

    pub fn lower(&self) -> Vec3 {
        Vec3::from(self.origin)
    }

    /// Last node along each axis (for periodic grids the period ends one cell further).
    pub fn upper(&self) -> Vec3 {
        self.point(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Distance (in cells) of a node from the nearest face; infinite when periodic.
    pub fn cells_from_boundary(&self, idx: [usize; 3]) -> usize {
        if self.boundary == Boundary::Periodic {
            return usize::MAX;
        }
        (0..3).map(|a| idx[a].min(self.dims[a] - 1 - idx[a])).min().unwrap()
    }

    pub fn contains(&self, y: &Vec3) -> bool {
        if self.boundary == Boundary::Periodic {
            return true;
        }
        let lo = self.lower();
        let hi = self.upper();
        (0..3).all(|a| y[a] >= lo[a] - 1e-12 && y[a] <= hi[a] + 1e-12)
    }

    /// Nearest point of the (closed) grid box.
    pub fn clamp(&self, y: &Vec3) -> Vec3 {
        let lo = self.lower();
        let hi = self.upper();
        Vec3::new(y[0].clamp(lo[0], hi[0]), y[1].clamp(lo[1], hi[1]), y[2].clamp(lo[2], hi[2]))
    }

    /// Radius of the largest origin-centred ball inside the box.
    pub fn inscribed_radius(&self) -> f64 {
        let lo = self.lower();
        let hi = self.upper();
        (0..3).map(|a| (-lo[a]).min(hi[a])).fold(f64::INFINITY, f64::min).max(0.0)
    }

    pub fn same_nodes(&self, other: &Grid3) -> bool {
        self.dims == other.dims
            && (0..3).all(|a| {
                (self.spacing[a] - other.spacing[a]).abs() <= 1e-12 * self.spacing[a]
                    && (self.origin[a] - other.origin[a]).abs() <= 1e-12 * self.spacing[a].max(1.0)
            })
    }
}

/// Meridional (r, z) grid with r >= 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub dims: [usize; 2],
    pub spacing: [f64; 2],
    pub origin: [f64; 2],
}

impl Grid2 {
    pub fn new(dims: [usize; 2], spacing: [f64; 2], origin: [f64; 2]) -> Result<Self> {
        if dims.iter().any(|&n| n < 4) {
            return Err(Error::InvalidGrid(format!("all dims must be >= 4, got {dims:?}")));
        }
        if spacing.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing:?}")));
        }
        if origin[0] < 0.0 {
            return Err(Error::InvalidGrid("meridional grid must have r >= 0".into()));
        }
        Ok(Grid2 { dims, spacing, origin })
    }

    /// r in [r0, r1], z in [z0, z1] with the given node counts.
    pub fn span(r: (f64, f64), z: (f64, f64), nr: usize, nz: usize) -> Result<Self> {
        let hr = (r.1 - r.0) / (nr as f64 - 1.0);
        let hz = (z.1 - z.0) / (nz as f64 - 1.0);
        Grid2::new([nr, nz], [hr, hz], [r.0, z.0])
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.dims[1] + j
    }

    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (self.origin[0] + i as f64 * self.spacing[0], self.origin[1] + j as f64 * self.spacing[1])
    }

    pub fn upper(&self) -> (f64, f64) {
        self.point(self.dims[0] - 1, self.dims[1] - 1)
    }

    pub fn contains(&self, r: f64, z: f64) -> bool {
        let (r1, z1) = self.upper();
        r >= self.origin[0] - 1e-12 && r <= r1 + 1e-12 && z >= self.origin[1] - 1e-12 && z <= z1 + 1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(Grid3::new([3, 4, 4], [1.0; 3], [0.0; 3], Boundary::DecayToZero).is_err());
        assert!(Grid3::new([4, 4, 4], [1.0, 0.0, 1.0], [0.0; 3], Boundary::DecayToZero).is_err());
        assert!(Grid2::new([4, 4], [1.0, 1.0], [-1.0, 0.0]).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let g = Grid3::new([4, 5, 6], [1.0; 3], [0.0; 3], Boundary::DecayToZero).unwrap();
        for n in 0..g.len() {
            let [i, j, k] = g.unindex(n);
            assert_eq!(g.index(i, j, k), n);
        }
    }
}
