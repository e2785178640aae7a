//! Star (local support) selection around interior nodes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nodes::{NodeSet, GEOMETRY_TOL};

/// Smallest singular value the offset matrix of a star may have.
pub const MIN_OFFSET_SINGULAR_VALUE: f64 = 1e-10;

/// Neighbour selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StarRule {
    /// `(N - 1) / 4` nearest nodes in each half-open quadrant
    /// `[0, 90)`, `[90, 180)`, `[180, 270)`, `[270, 360)` degrees.
    #[default]
    Quadrant,
    /// Nearest node on each of the four half-axes plus the nearest node in each open
    /// quadrant. Only defined for `N = 9`; on tensor grids this is the 3x3 block around
    /// the center regardless of how anisotropic the local spacing is. `N = 5` falls back
    /// to [`StarRule::Quadrant`].
    AxisQuadrant,
}

impl fmt::Display for StarRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StarRule::Quadrant => "quadrant",
            StarRule::AxisQuadrant => "axis-quadrant",
        })
    }
}

impl FromStr for StarRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrant" => Ok(StarRule::Quadrant),
            "axis-quadrant" => Ok(StarRule::AxisQuadrant),
            other => Err(Error::Parse(format!("unknown star rule `{other}`"))),
        }
    }
}

/// A central node and its selected neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct Star {
    center: usize,
    neighbors: Vec<usize>,
    offsets: Vec<[f64; 2]>,
}

impl Star {
    /// Builds a star from explicit neighbour indices, checking the star invariants.
    pub fn from_neighbors(nodes: &NodeSet, center: usize, neighbors: Vec<usize>) -> Result<Self> {
        if center >= nodes.len() {
            return Err(Error::invalid(format!("center {center} out of range")));
        }
        let mut seen = neighbors.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != neighbors.len() || neighbors.contains(&center) {
            return Err(Error::invalid(format!("star at {center} has repeated neighbours")));
        }
        if neighbors.iter().any(|&j| j >= nodes.len()) {
            return Err(Error::invalid(format!("star at {center} references a missing node")));
        }
        let c = nodes.node(center);
        let offsets = neighbors
            .iter()
            .map(|&j| {
                let p = nodes.node(j);
                [p.x - c.x, p.y - c.y]
            })
            .collect();
        let star = Star { center, neighbors, offsets };
        let sigma = star.min_singular_value();
        if sigma.is_nan() || sigma <= MIN_OFFSET_SINGULAR_VALUE {
            return Err(Error::IllConditionedStar { center, condition: f64::INFINITY });
        }
        Ok(star)
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn neighbors(&self) -> &[usize] {
        &self.neighbors
    }

    /// `(x_i - x_0, y_i - y_0)` for each neighbour, in neighbour order.
    pub fn offsets(&self) -> &[[f64; 2]] {
        &self.offsets
    }

    /// Star size `N`, center included.
    pub fn size(&self) -> usize {
        self.neighbors.len() + 1
    }

    /// Node indices with the center first.
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.center).chain(self.neighbors.iter().copied())
    }

    /// Positions relative to the center with the center first.
    pub fn local_points(&self) -> Vec<[f64; 2]> {
        std::iter::once([0.0, 0.0]).chain(self.offsets.iter().copied()).collect()
    }

    /// Largest neighbour distance.
    pub fn radius(&self) -> f64 {
        self.offsets.iter().map(|o| o[0].hypot(o[1])).fold(0.0, f64::max)
    }

    /// Smallest singular value of the `(N-1) x 2` offset matrix.
    pub fn min_singular_value(&self) -> f64 {
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for o in &self.offsets {
            a += o[0] * o[0];
            b += o[0] * o[1];
            c += o[1] * o[1];
        }
        // smaller eigenvalue of [[a, b], [b, c]]
        let mean = 0.5 * (a + c);
        let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        (mean - radius).max(0.0).sqrt()
    }

    /// Rescales all offsets by `factor` (used to probe scale covariance of stencils).
    pub fn scaled(&self, factor: f64) -> Star {
        Star {
            center: self.center,
            neighbors: self.neighbors.clone(),
            offsets: self.offsets.iter().map(|o| [o[0] * factor, o[1] * factor]).collect(),
        }
    }

    /// A star detached from any node set, built directly from offsets. Neighbour ids are `1..N`.
    pub fn from_offsets(offsets: Vec<[f64; 2]>) -> Result<Self> {
        let star = Star { center: 0, neighbors: (1..=offsets.len()).collect(), offsets };
        if star.offsets.iter().any(|o| o[0].hypot(o[1]) <= GEOMETRY_TOL) {
            return Err(Error::invalid("a star neighbour coincides with the center"));
        }
        for (i, a) in star.offsets.iter().enumerate() {
            if star.offsets[i + 1..].iter().any(|b| (a[0] - b[0]).hypot(a[1] - b[1]) <= GEOMETRY_TOL) {
                return Err(Error::invalid("star neighbours coincide"));
            }
        }
        let sigma = star.min_singular_value();
        if sigma.is_nan() || sigma <= MIN_OFFSET_SINGULAR_VALUE {
            return Err(Error::IllConditionedStar { center: 0, condition: f64::INFINITY });
        }
        Ok(star)
    }
}

/// Half-open sector containing the displacement `(dx, dy)`; `None` for the zero vector.
pub fn sector(dx: f64, dy: f64) -> Option<usize> {
    if dx > 0.0 && dy >= 0.0 {
        Some(0)
    } else if dx <= 0.0 && dy > 0.0 {
        Some(1)
    } else if dx < 0.0 && dy <= 0.0 {
        Some(2)
    } else if dx >= 0.0 && dy < 0.0 {
        Some(3)
    } else {
        None
    }
}

// Nearest-first candidate order, ties broken by index.
fn nearest(mut candidates: Vec<(f64, usize)>, count: usize) -> Vec<usize> {
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    candidates.into_iter().take(count).map(|(_, j)| j).collect()
}

/// Selects the star of size `size` (5 or 9) around an interior `center`.
pub fn select_star(center: usize, nodes: &NodeSet, size: usize, rule: StarRule) -> Result<Star> {
    if size != 5 && size != 9 {
        return Err(Error::invalid(format!("star size must be 5 or 9, got {size}")));
    }
    if center >= nodes.len() {
        return Err(Error::invalid(format!("center {center} out of range")));
    }
    let c = *nodes.node(center);
    if !c.is_interior() {
        return Err(Error::invalid(format!("star center {center} is a boundary node")));
    }
    let neighbors = match (rule, size) {
        (StarRule::AxisQuadrant, 9) => axis_quadrant_neighbors(center, nodes)?,
        _ => {
            let per = (size - 1) / 4;
            let mut buckets: [Vec<(f64, usize)>; 4] = Default::default();
            for p in nodes.nodes() {
                if p.index == center {
                    continue;
                }
                if let Some(s) = sector(p.x - c.x, p.y - c.y) {
                    buckets[s].push((c.distance_to(p), p.index));
                }
            }
            let mut chosen = Vec::with_capacity(size - 1);
            for (quadrant, bucket) in buckets.into_iter().enumerate() {
                if bucket.len() < per {
                    return Err(Error::EmptyQuadrant { center, quadrant, needed: per });
                }
                chosen.extend(nearest(bucket, per));
            }
            chosen
        }
    };
    Star::from_neighbors(nodes, center, neighbors)
}

fn axis_quadrant_neighbors(center: usize, nodes: &NodeSet) -> Result<Vec<usize>> {
    let c = *nodes.node(center);
    let d = nodes.domain();
    let tol = GEOMETRY_TOL * (d.x_hi - d.x_lo).max(d.y_hi - d.y_lo).max(1.0);
    // E, N, W, S rays, then the four open quadrants
    let mut buckets: [Vec<(f64, usize)>; 8] = Default::default();
    for p in nodes.nodes() {
        if p.index == center {
            continue;
        }
        let (dx, dy) = (p.x - c.x, p.y - c.y);
        let slot = if dy.abs() <= tol {
            if dx > 0.0 {
                0
            } else {
                2
            }
        } else if dx.abs() <= tol {
            if dy > 0.0 {
                1
            } else {
                3
            }
        } else {
            4 + sector(dx, dy).expect("nonzero displacement")
        };
        buckets[slot].push((c.distance_to(p), p.index));
    }
    let mut chosen = Vec::with_capacity(8);
    // Emit in angular order: E, NE, N, NW, W, SW, S, SE.
    for slot in [0, 4, 1, 5, 2, 6, 3, 7] {
        let bucket = std::mem::take(&mut buckets[slot]);
        if bucket.is_empty() {
            let quadrant = if slot < 4 { slot } else { slot - 4 };
            return Err(Error::EmptyQuadrant { center, quadrant, needed: 1 });
        }
        chosen.extend(nearest(bucket, 1));
    }
    Ok(chosen)
}
