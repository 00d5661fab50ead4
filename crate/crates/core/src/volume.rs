//! Common interface for the things the transforms integrate: analytic
//! phantoms (evaluated exactly) and voxel fields (trilinear between centers).

use crate::field::ScalarField3;
use crate::geometry::{Aabb, Vec3};
use crate::phantom::AnalyticPhantom;

pub trait Volume: Sync {
    fn eval(&self, p: Vec3) -> f64;

    /// Bounding box of the support; `None` for identically zero volumes.
    fn support_box(&self) -> Option<Aabb>;

    /// True when the support lies in the half-space `y > 0`.
    fn upper_half(&self) -> bool;
}

impl Volume for AnalyticPhantom {
    fn eval(&self, p: Vec3) -> f64 {
        AnalyticPhantom::eval(self, p)
    }

    fn support_box(&self) -> Option<Aabb> {
        AnalyticPhantom::support_box(self)
    }

    fn upper_half(&self) -> bool {
        self.supported_in_upper_half()
    }
}

impl Volume for ScalarField3 {
    fn eval(&self, p: Vec3) -> f64 {
        self.sample(p)
    }

    fn support_box(&self) -> Option<Aabb> {
        Some(self.grid.support_box())
    }

    fn upper_half(&self) -> bool {
        self.upper_half
    }
}

impl<V: Volume + ?Sized> Volume for &V {
    fn eval(&self, p: Vec3) -> f64 {
        (**self).eval(p)
    }

    fn support_box(&self) -> Option<Aabb> {
        (**self).support_box()
    }

    fn upper_half(&self) -> bool {
        (**self).upper_half()
    }
}
