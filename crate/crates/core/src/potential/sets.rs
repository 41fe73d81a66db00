//! Compact target sets and their discretizations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed axis-aligned box `[lo, hi]`; `lo[i] == hi[i]` makes a degenerate side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// A compact set in `[-M, M]^d`: a union of boxes with disjoint interiors
/// and/or a point cloud. With `mesh` set, each cloud point stands for the
/// cube of that side centred on it; otherwise the points are just points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactSetSpec {
    pub dimension: usize,
    pub bound: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boxes: Vec<BoxSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<f64>,
}

/// Piece of a discretized set: a box cell given by centre and side lengths
/// (zero sides for degenerate directions).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub center: Vec<f64>,
    pub widths: Vec<f64>,
}

impl Cell {
    /// Number of non-degenerate sides.
    pub fn dimension(&self) -> usize {
        self.widths.iter().filter(|w| **w > 0.0).count()
    }
}

impl CompactSetSpec {
    pub fn from_boxes(dimension: usize, bound: f64, boxes: Vec<BoxSpec>) -> Result<Self> {
        let s = CompactSetSpec {
            dimension,
            bound,
            boxes,
            points: vec![],
            mesh: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_points(dimension: usize, bound: f64, points: Vec<Vec<f64>>, mesh: Option<f64>) -> Result<Self> {
        let s = CompactSetSpec {
            dimension,
            bound,
            boxes: vec![],
            points,
            mesh,
        };
        s.validate()?;
        Ok(s)
    }

    /// Closed ball of the max-norm, `z + [-r, r]^d`.
    pub fn cube(center: &[f64], radius: f64, bound: f64) -> Result<Self> {
        let lo = center.iter().map(|c| c - radius).collect();
        let hi = center.iter().map(|c| c + radius).collect();
        Self::from_boxes(center.len(), bound, vec![BoxSpec { lo, hi }])
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dimension;
        if d == 0 {
            return Err(Error::domain("set dimension must be at least 1"));
        }
        if !(self.bound > 0.0) || !self.bound.is_finite() {
            return Err(Error::domain("bound M must be positive and finite"));
        }
        if self.boxes.is_empty() && self.points.is_empty() {
            return Err(Error::domain("the set is empty"));
        }
        let inside = |v: &[f64]| v.len() == d && v.iter().all(|x| x.is_finite() && x.abs() <= self.bound);
        for b in &self.boxes {
            if !inside(&b.lo) || !inside(&b.hi) {
                return Err(Error::domain(format!(
                    "box must have {d} coordinates inside [-{m}, {m}]",
                    m = self.bound
                )));
            }
            if b.lo.iter().zip(&b.hi).any(|(l, h)| l > h) {
                return Err(Error::domain("box has lo > hi"));
            }
        }
        for (i, a) in self.boxes.iter().enumerate() {
            for b in &self.boxes[i + 1..] {
                let overlap = (0..d).all(|k| a.lo[k].max(b.lo[k]) < a.hi[k].min(b.hi[k]));
                if overlap {
                    return Err(Error::domain("boxes must have disjoint interiors"));
                }
            }
        }
        let half = self.mesh.unwrap_or(0.0) / 2.0;
        for p in &self.points {
            if p.len() != d || p.iter().any(|x| !x.is_finite() || x.abs() + half > self.bound) {
                return Err(Error::domain(format!(
                    "points (with their mesh cells) must lie inside [-{m}, {m}]^{d}",
                    m = self.bound
                )));
            }
        }
        if let Some(h) = self.mesh {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::domain("point-cloud mesh must be positive"));
            }
        }
        Ok(())
    }

    /// Cells of side about `mesh`; every non-degenerate box edge gets at
    /// least two cells.
    pub fn cells(&self, mesh: f64) -> Result<Vec<Cell>> {
        self.validate()?;
        if !(mesh > 0.0) || !mesh.is_finite() {
            return Err(Error::domain("mesh must be positive"));
        }
        let mut cells = vec![];
        for b in &self.boxes {
            let counts: Vec<usize> = b
                .lo
                .iter()
                .zip(&b.hi)
                .map(|(l, h)| {
                    let len = h - l;
                    if len == 0.0 {
                        Ok(1)
                    } else if len / mesh < 2.0 - 1e-9 {
                        Err(Error::domain(format!(
                            "mesh {mesh} does not resolve a box edge of length {len} (need two cells)"
                        )))
                    } else {
                        Ok((len / mesh - 1e-9).ceil() as usize)
                    }
                })
                .collect::<Result<_>>()?;
            let widths: Vec<f64> = (0..self.dimension)
                .map(|k| (b.hi[k] - b.lo[k]) / counts[k] as f64)
                .collect();
            for_each_index(&counts, |idx| {
                let center = (0..self.dimension)
                    .map(|k| b.lo[k] + (idx[k] as f64 + 0.5) * widths[k])
                    .collect();
                cells.push(Cell {
                    center,
                    widths: widths.clone(),
                });
            });
        }
        let w = self.mesh.unwrap_or(0.0);
        for p in &self.points {
            cells.push(Cell {
                center: p.clone(),
                widths: vec![w; self.dimension],
            });
        }
        Ok(cells)
    }

    /// Grid points with spacing at most `spacing` covering the set: any point
    /// of the set lies within `spacing·√k/2` of one of them, `k` the largest
    /// piece dimension.
    pub fn sample_points(&self, spacing: f64) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::domain("sampling spacing must be positive"));
        }
        let mut out = vec![];
        let add_box = |lo: &[f64], hi: &[f64], out: &mut Vec<Vec<f64>>| -> Result<()> {
            let counts: Vec<usize> = lo
                .iter()
                .zip(hi)
                .map(|(l, h)| ((h - l) / spacing - 1e-9).ceil().max(0.0) as usize + 1)
                .collect();
            let total = counts.iter().try_fold(1usize, |a, c| a.checked_mul(*c));
            if total.map_or(true, |t| t + out.len() > MAX_SAMPLE_POINTS) {
                return Err(Error::domain(format!(
                    "sampling at spacing {spacing} needs more than {MAX_SAMPLE_POINTS} points"
                )));
            }
            for_each_index(&counts, |idx| {
                out.push(
                    (0..lo.len())
                        .map(|k| {
                            if counts[k] == 1 {
                                lo[k]
                            } else {
                                lo[k] + (hi[k] - lo[k]) * idx[k] as f64 / (counts[k] - 1) as f64
                            }
                        })
                        .collect(),
                )
            });
            Ok(())
        };
        for b in &self.boxes {
            add_box(&b.lo, &b.hi, &mut out)?;
        }
        let half = self.mesh.unwrap_or(0.0) / 2.0;
        for p in &self.points {
            let lo: Vec<f64> = p.iter().map(|x| x - half).collect();
            let hi: Vec<f64> = p.iter().map(|x| x + half).collect();
            add_box(&lo, &hi, &mut out)?;
        }
        Ok(out)
    }

    /// Largest dimension of a piece of the set.
    pub fn piece_dimension(&self) -> usize {
        let boxes = self
            .boxes
            .iter()
            .map(|b| b.lo.iter().zip(&b.hi).filter(|(l, h)| h > l).count())
            .max()
            .unwrap_or(0);
        let cloud = if self.mesh.is_some() && !self.points.is_empty() {
            self.dimension
        } else {
            0
        };
        boxes.max(cloud)
    }

    /// Distance from `z` to the set.
    pub fn distance(&self, z: &[f64]) -> f64 {
        let half = self.mesh.unwrap_or(0.0) / 2.0;
        let to_box = |lo: &dyn Fn(usize) -> f64, hi: &dyn Fn(usize) -> f64| -> f64 {
            (0..self.dimension)
                .map(|k| {
                    let e = (lo(k) - z[k]).max(z[k] - hi(k)).max(0.0);
                    e * e
                })
                .sum::<f64>()
                .sqrt()
        };
        let boxes = self
            .boxes
            .iter()
            .map(|b| to_box(&|k| b.lo[k], &|k| b.hi[k]))
            .fold(f64::INFINITY, f64::min);
        let cloud = self
            .points
            .iter()
            .map(|p| to_box(&|k| p[k] - half, &|k| p[k] + half))
            .fold(f64::INFINITY, f64::min);
        boxes.min(cloud)
    }
}

pub const MAX_SAMPLE_POINTS: usize = 4_000_000;

/// Visit every multi-index below `counts` in row-major order.
pub(crate) fn for_each_index(counts: &[usize], mut f: impl FnMut(&[usize])) {
    if counts.iter().any(|c| *c == 0) {
        return;
    }
    let mut idx = vec![0usize; counts.len()];
    loop {
        f(&idx);
        let mut k = counts.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_interval() -> CompactSetSpec {
        CompactSetSpec::from_boxes(
            1,
            1.0,
            vec![BoxSpec {
                lo: vec![0.0],
                hi: vec![1.0],
            }],
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let s: CompactSetSpec =
            serde_json::from_str(r#"{"dimension":2,"bound":2,"boxes":[{"lo":[0,0],"hi":[1,0.5]}]}"#).unwrap();
        assert_eq!(s.boxes.len(), 1);
        let back: CompactSetSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<CompactSetSpec>(r#"{"dimension":1,"bound":1,"points":[[0]],"color":1}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(CompactSetSpec::from_points(1, 1.0, vec![vec![2.0]], None).is_err());
        assert!(CompactSetSpec::from_points(1, 1.0, vec![], None).is_err());
        let overlapping = vec![
            BoxSpec { lo: vec![0.0], hi: vec![0.6] },
            BoxSpec { lo: vec![0.5], hi: vec![1.0] },
        ];
        assert!(CompactSetSpec::from_boxes(1, 1.0, overlapping).is_err());
        let touching = vec![
            BoxSpec { lo: vec![0.0], hi: vec![0.5] },
            BoxSpec { lo: vec![0.5], hi: vec![1.0] },
        ];
        assert!(CompactSetSpec::from_boxes(1, 1.0, touching).is_ok());
    }

    #[test]
    fn cells_tile_the_box() {
        let cells = unit_interval().cells(0.1).unwrap();
        assert_eq!(cells.len(), 10);
        assert!((cells[3].center[0] - 0.35).abs() < 1e-15);
        assert!(unit_interval().cells(0.6).is_err());
        let seg = CompactSetSpec::from_boxes(2, 1.0, vec![BoxSpec { lo: vec![0.0, 0.2], hi: vec![1.0, 0.2] }]).unwrap();
        let cells = seg.cells(0.25).unwrap();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[0].dimension(), 1);
        assert_eq!(seg.piece_dimension(), 1);
    }

    #[test]
    fn samples_include_endpoints() {
        let pts = unit_interval().sample_points(0.3).unwrap();
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0], vec![0.0]);
        assert_eq!(pts[4], vec![1.0]);
    }

    #[test]
    fn distance_to_set() {
        let s = unit_interval();
        assert_eq!(s.distance(&[0.5]), 0.0);
        assert!((s.distance(&[1.25]) - 0.25).abs() < 1e-15);
        let c = CompactSetSpec::from_points(2, 1.0, vec![vec![0.0, 0.0]], Some(0.2)).unwrap();
        assert!((c.distance(&[0.4, 0.0]) - 0.3).abs() < 1e-15);
    }
}
