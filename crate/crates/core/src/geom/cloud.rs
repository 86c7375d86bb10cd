use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::geom::pose::Pose;

/// Unordered 3-D point set, mm.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<[f64; 3]>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>) -> Self {
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Vector3<f64> {
        Vector3::from_column_slice(&self.points[i])
    }

    pub fn centroid(&self) -> Vector3<f64> {
        let mut c = Vector3::zeros();
        for p in &self.points {
            c += Vector3::from_column_slice(p);
        }
        c / (self.points.len().max(1) as f64)
    }

    pub fn transformed(&self, pose: &Pose) -> PointCloud {
        PointCloud {
            points: self
                .points
                .iter()
                .map(|p| {
                    let q = pose.apply_point(&Vector3::from_column_slice(p));
                    [q.x, q.y, q.z]
                })
                .collect(),
        }
    }
}
