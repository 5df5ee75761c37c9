//! Barycentric lattice cells on the simplex face, for histogram binning and
//! cell-mass quadrature.

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

/// A subdivision of the face `Σy = 1` into `resolution^{n−1}` equal-volume
/// cells of the barycentric lattice, described in the chart of the first
/// `n−1` coordinates.
///
/// Cell geometry (vertices, point location) is implemented for `n = 2`
/// (intervals) and `n = 3` (the staircase triangulation). Higher dimensions
/// only use the grid as a resolution handle for quadrature.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexGrid {
    n: usize,
    resolution: usize,
}

impl SimplexGrid {
    pub fn new(n: usize, resolution: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("simplex grid needs n >= 2"));
        }
        if resolution < 1 {
            return Err(Error::domain("resolution must be >= 1"));
        }
        Ok(SimplexGrid { n, resolution })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn cell_count(&self) -> usize {
        self.resolution.pow((self.n - 1) as u32)
    }

    fn require_cells(&self) -> Result<()> {
        if self.n > 3 {
            return Err(Error::Dimension(format!(
                "cell geometry is implemented for n <= 3, grid has n = {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Index of the cell containing `y`.
    pub fn locate(&self, y: &SimplexPoint) -> Result<usize> {
        self.require_cells()?;
        if y.n() != self.n {
            return Err(Error::Dimension("point dimension does not match grid".into()));
        }
        let r = self.resolution;
        match self.n {
            2 => {
                let i = ((y.chart()[0] * r as f64) as usize).min(r - 1);
                Ok(i)
            }
            3 => {
                let u1 = y.chart()[0] * r as f64;
                let u2 = y.chart()[1] * r as f64;
                let mut i = (u1 as usize).min(r - 1);
                let mut j = (u2 as usize).min(r - 1);
                if i + j > r - 1 {
                    // numeric spill over the diagonal
                    let excess = i + j - (r - 1);
                    if i >= excess {
                        i -= excess;
                    } else {
                        j -= excess - i;
                        i = 0;
                    }
                }
                let f1 = u1 - i as f64;
                let f2 = u2 - j as f64;
                if f1 + f2 <= 1.0 + 1e-12 || i + j == r - 1 {
                    Ok(self.up_index(i, j))
                } else {
                    Ok(self.down_index(i, j))
                }
            }
            _ => unreachable!(),
        }
    }

    fn up_count(&self) -> usize {
        let r = self.resolution;
        r * (r + 1) / 2
    }

    fn up_index(&self, i: usize, j: usize) -> usize {
        let r = self.resolution;
        // lex over (i, j) with i + j <= r - 1; row i holds r - i entries
        i * r - i * i.saturating_sub(1) / 2 + j
    }

    fn down_index(&self, i: usize, j: usize) -> usize {
        let r = self.resolution;
        self.up_count() + i * (r - 1) - i * i.saturating_sub(1) / 2 + j
    }

    /// Chart-coordinate vertices of a cell.
    pub fn cell_vertices(&self, idx: usize) -> Result<Vec<Vec<f64>>> {
        self.require_cells()?;
        if idx >= self.cell_count() {
            return Err(Error::domain(format!("cell index {idx} out of range")));
        }
        let r = self.resolution;
        let rf = r as f64;
        match self.n {
            2 => Ok(vec![vec![idx as f64 / rf], vec![(idx + 1) as f64 / rf]]),
            3 => {
                let (i, j, up) = self.cell_coords(idx);
                let (i, j) = (i as f64, j as f64);
                let verts = if up {
                    vec![
                        vec![i / rf, j / rf],
                        vec![(i + 1.0) / rf, j / rf],
                        vec![i / rf, (j + 1.0) / rf],
                    ]
                } else {
                    vec![
                        vec![(i + 1.0) / rf, j / rf],
                        vec![i / rf, (j + 1.0) / rf],
                        vec![(i + 1.0) / rf, (j + 1.0) / rf],
                    ]
                };
                Ok(verts)
            }
            _ => unreachable!(),
        }
    }

    fn cell_coords(&self, idx: usize) -> (usize, usize, bool) {
        let r = self.resolution;
        if idx < self.up_count() {
            // invert the lex index over rows of length r - i
            let mut i = 0;
            let mut offset = 0;
            while offset + (r - i) <= idx {
                offset += r - i;
                i += 1;
            }
            (i, idx - offset, true)
        } else {
            let mut rem = idx - self.up_count();
            let mut i = 0;
            while i + 1 < r && rem >= r - 1 - i {
                rem -= r - 1 - i;
                i += 1;
            }
            (i, rem, false)
        }
    }

    /// Cell centroids with their volume weights; the weights add up to the
    /// chart volume `1/(n−1)!` exactly.
    pub fn centroid_weights(&self) -> Result<Vec<(SimplexPoint, f64)>> {
        self.require_cells()?;
        let vol = match self.n {
            2 => 1.0 / self.resolution as f64,
            3 => 0.5 / (self.resolution * self.resolution) as f64,
            _ => unreachable!(),
        };
        (0..self.cell_count())
            .map(|idx| {
                let verts = self.cell_vertices(idx)?;
                let dim = self.n - 1;
                let mut centroid = vec![0.0; dim];
                for v in &verts {
                    for (c, &vc) in centroid.iter_mut().zip(v) {
                        *c += vc / verts.len() as f64;
                    }
                }
                Ok((SimplexPoint::from_chart(&centroid)?, vol))
            })
            .collect()
    }
}
