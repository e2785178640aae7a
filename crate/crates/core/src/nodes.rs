//! Node sets over axis-aligned rectangles.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for "on the boundary" and "coincident" tests.
pub const GEOMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Rect {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        let finite = [x_lo, x_hi, y_lo, y_hi].iter().all(|v| v.is_finite());
        if !finite || x_hi - x_lo <= GEOMETRY_TOL || y_hi - y_lo <= GEOMETRY_TOL {
            return Err(Error::invalid(format!("degenerate domain [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}]")));
        }
        Ok(Rect { x_lo, x_hi, y_lo, y_hi })
    }

    pub fn unit() -> Self {
        Rect { x_lo: 0.0, x_hi: 1.0, y_lo: 0.0, y_hi: 1.0 }
    }

    pub fn square(side: f64) -> Self {
        Rect { x_lo: 0.0, x_hi: side, y_lo: 0.0, y_hi: side }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_lo - GEOMETRY_TOL
            && x <= self.x_hi + GEOMETRY_TOL
            && y >= self.y_lo - GEOMETRY_TOL
            && y <= self.y_hi + GEOMETRY_TOL
    }

    pub fn on_boundary(&self, x: f64, y: f64) -> bool {
        (x - self.x_lo).abs() <= GEOMETRY_TOL
            || (x - self.x_hi).abs() <= GEOMETRY_TOL
            || (y - self.y_lo).abs() <= GEOMETRY_TOL
            || (y - self.y_hi).abs() <= GEOMETRY_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Interior,
    Boundary,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Interior => "interior",
            NodeKind::Boundary => "boundary",
        })
    }
}

impl FromStr for NodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "interior" => Ok(NodeKind::Interior),
            "boundary" => Ok(NodeKind::Boundary),
            other => Err(Error::Parse(format!("unknown node kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub x: f64,
    pub y: f64,
    pub index: usize,
    pub kind: NodeKind,
}

impl Node {
    pub fn is_interior(&self) -> bool {
        self.kind == NodeKind::Interior
    }

    pub fn distance_to(&self, other: &Node) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// How a node set was produced. `Imported` covers node sets read from disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Uniform,
    Chebyshev,
    Imported,
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distribution::Uniform => "uniform",
            Distribution::Chebyshev => "chebyshev",
            Distribution::Imported => "imported",
        })
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(Distribution::Uniform),
            "chebyshev" => Ok(Distribution::Chebyshev),
            "imported" => Ok(Distribution::Imported),
            other => Err(Error::Parse(format!("unknown distribution `{other}`"))),
        }
    }
}

/// Shape of a row-major tensor-product node set: node `j * nx + i` sits at column `i`, row `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridShape {
    pub nx: usize,
    pub ny: usize,
}

impl GridShape {
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }
}

/// An immutable discretization of a rectangle. Indices are `0..len()` in storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    nodes: Vec<Node>,
    domain: Rect,
    distribution: Distribution,
    grid: Option<GridShape>,
}

impl NodeSet {
    /// Builds a node set from raw coordinates, classifying each node against `domain`.
    pub fn from_points(points: &[(f64, f64)], domain: Rect, distribution: Distribution) -> Result<Self> {
        let mut nodes = Vec::with_capacity(points.len());
        for (index, &(x, y)) in points.iter().enumerate() {
            if !domain.contains(x, y) {
                return Err(Error::invalid(format!("node {index} at ({x}, {y}) lies outside the domain")));
            }
            let kind = if domain.on_boundary(x, y) { NodeKind::Boundary } else { NodeKind::Interior };
            nodes.push(Node { x, y, index, kind });
        }
        let mut set = NodeSet { nodes, domain, distribution, grid: None };
        set.check_distinct()?;
        set.grid = set.detect_grid();
        Ok(set)
    }

    fn from_axes(xs: &[f64], ys: &[f64], domain: Rect, distribution: Distribution) -> Self {
        let mut nodes = Vec::with_capacity(xs.len() * ys.len());
        for (j, &y) in ys.iter().enumerate() {
            for (i, &x) in xs.iter().enumerate() {
                let edge = i == 0 || j == 0 || i + 1 == xs.len() || j + 1 == ys.len();
                nodes.push(Node {
                    x,
                    y,
                    index: nodes.len(),
                    kind: if edge { NodeKind::Boundary } else { NodeKind::Interior },
                });
            }
        }
        NodeSet { nodes, domain, distribution, grid: Some(GridShape { nx: xs.len(), ny: ys.len() }) }
    }

    // Quadratic, but node sets here stay below a few thousand points.
    fn check_distinct(&self) -> Result<()> {
        for (i, a) in self.nodes.iter().enumerate() {
            for b in &self.nodes[i + 1..] {
                if a.distance_to(b) <= GEOMETRY_TOL {
                    return Err(Error::invalid(format!("nodes {} and {} coincide", a.index, b.index)));
                }
            }
        }
        Ok(())
    }

    /// Recognizes row-major tensor grids so that imported files keep their grid structure.
    fn detect_grid(&self) -> Option<GridShape> {
        let n = self.nodes.len();
        let y0 = self.nodes.first()?.y;
        let nx = self.nodes.iter().take_while(|p| p.y == y0).count();
        if nx < 2 || !n.is_multiple_of(nx) || n / nx < 2 {
            return None;
        }
        let shape = GridShape { nx, ny: n / nx };
        let consistent = self.nodes.iter().enumerate().all(|(k, p)| {
            let (i, j) = shape.coords(k);
            p.x == self.nodes[i].x && p.y == self.nodes[shape.index(0, j)].y
        });
        consistent.then_some(shape)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &Node {
        &self.nodes[index]
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn distribution(&self) -> Distribution {
        self.distribution
    }

    pub fn grid(&self) -> Option<GridShape> {
        self.grid
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        self.nodes.iter().filter(|p| p.is_interior()).map(|p| p.index).collect()
    }

    pub fn interior_count(&self) -> usize {
        self.nodes.iter().filter(|p| p.is_interior()).count()
    }

    pub fn boundary_count(&self) -> usize {
        self.len() - self.interior_count()
    }

    /// Writes the `index,x,y,kind` CSV representation.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,x,y,kind")?;
        for p in &self.nodes {
            writeln!(out, "{},{:.17e},{:.17e},{}", p.index, p.x, p.y, p.kind)?;
        }
        Ok(())
    }

    /// Reads a node-set CSV. Node classification comes from the file; the domain is the
    /// bounding box of the nodes.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty node file".into()))??;
        if header.trim() != "index,x,y,kind" {
            return Err(Error::Parse(format!("unexpected header `{}`", header.trim())));
        }
        let mut nodes = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 fields", lineno + 2)));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
            };
            let index: usize =
                fields[0].trim().parse().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
            if index != nodes.len() {
                return Err(Error::Parse(format!("line {}: node indices must be 0..n-1 in order", lineno + 2)));
            }
            nodes.push(Node { index, x: parse(fields[1])?, y: parse(fields[2])?, kind: fields[3].parse()? });
        }
        if nodes.len() < 2 {
            return Err(Error::Parse("node file needs at least two nodes".into()));
        }
        let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &nodes {
            x_lo = x_lo.min(p.x);
            x_hi = x_hi.max(p.x);
            y_lo = y_lo.min(p.y);
            y_hi = y_hi.max(p.y);
        }
        let mut set = NodeSet {
            nodes,
            domain: Rect::new(x_lo, x_hi, y_lo, y_hi)?,
            distribution: Distribution::Imported,
            grid: None,
        };
        set.check_distinct()?;
        set.grid = set.detect_grid();
        Ok(set)
    }
}

fn check_counts(nx: usize, ny: usize) -> Result<()> {
    if nx < 2 || ny < 2 {
        return Err(Error::invalid(format!("need at least 2 nodes per axis, got {nx} x {ny}")));
    }
    Ok(())
}

fn uniform_axis(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { hi } else { lo + step * i as f64 }).collect()
}

/// Chebyshev-Gauss-Lobatto abscissae `(1 - cos(i pi / (n - 1))) / 2` mapped onto `[lo, hi]`.
///
/// The upper half is mirrored from the lower half so the set is symmetric about the midpoint.
pub fn chebyshev_axis(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let unit: Vec<f64> = (0..n).map(|i| 0.5 * (1.0 - (i as f64 * PI / (n - 1) as f64).cos())).collect();
    let len = hi - lo;
    (0..n)
        .map(|i| {
            let mirror = n - 1 - i;
            if i == 0 {
                lo
            } else if mirror == 0 {
                hi
            } else if 2 * i < n - 1 {
                lo + len * unit[i]
            } else if 2 * i == n - 1 {
                0.5 * (lo + hi)
            } else {
                hi - len * unit[mirror]
            }
        })
        .collect()
}

/// Tensor grid with equal spacing per axis.
pub fn generate_uniform(nx: usize, ny: usize, domain: Rect) -> Result<NodeSet> {
    check_counts(nx, ny)?;
    let domain = Rect::new(domain.x_lo, domain.x_hi, domain.y_lo, domain.y_hi)?;
    let xs = uniform_axis(nx, domain.x_lo, domain.x_hi);
    let ys = uniform_axis(ny, domain.y_lo, domain.y_hi);
    Ok(NodeSet::from_axes(&xs, &ys, domain, Distribution::Uniform))
}

/// Tensor grid of Chebyshev abscissae on each axis.
pub fn generate_chebyshev(nx: usize, ny: usize, domain: Rect) -> Result<NodeSet> {
    check_counts(nx, ny)?;
    let domain = Rect::new(domain.x_lo, domain.x_hi, domain.y_lo, domain.y_hi)?;
    let xs = chebyshev_axis(nx, domain.x_lo, domain.x_hi);
    let ys = chebyshev_axis(ny, domain.y_lo, domain.y_hi);
    Ok(NodeSet::from_axes(&xs, &ys, domain, Distribution::Chebyshev))
}

pub fn generate(distribution: Distribution, nx: usize, ny: usize, domain: Rect) -> Result<NodeSet> {
    match distribution {
        Distribution::Uniform => generate_uniform(nx, ny, domain),
        Distribution::Chebyshev => generate_chebyshev(nx, ny, domain),
        Distribution::Imported => Err(Error::invalid("imported node sets cannot be generated")),
    }
}

/// Fill distance `max_i min_{j != i} |x_i - x_j|`, by brute force.
pub fn nodal_spacing(nodes: &NodeSet) -> Result<f64> {
    if nodes.len() < 2 {
        return Err(Error::invalid("nodal spacing needs at least two nodes"));
    }
    let pts = nodes.nodes();
    let spacing = pts
        .iter()
        .map(|a| pts.iter().filter(|b| b.index != a.index).map(|b| a.distance_to(b)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    Ok(spacing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_11_by_11() {
        let set = generate_uniform(11, 11, Rect::unit()).unwrap();
        assert_eq!(set.len(), 121);
        assert_eq!(set.boundary_count(), 40);
        assert_abs_diff_eq!(nodal_spacing(&set).unwrap(), 0.1, epsilon = 1e-14);
    }

    #[test]
    fn two_by_two_is_all_corners() {
        let set = generate_uniform(2, 2, Rect::unit()).unwrap();
        assert_eq!(set.len(), 4);
        assert!(set.nodes().iter().all(|p| p.kind == NodeKind::Boundary));
        assert!(set.interior_indices().is_empty());
    }

    #[test]
    fn three_by_three_on_pi_square() {
        let set = generate_uniform(3, 3, Rect::square(PI)).unwrap();
        let center = set.node(4);
        assert_eq!(center.kind, NodeKind::Interior);
        assert_abs_diff_eq!(center.x, PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(center.y, PI / 2.0, epsilon = 1e-15);
        assert_eq!(set.boundary_count(), 8);
    }

    #[test]
    fn too_few_nodes_is_rejected() {
        assert!(matches!(generate_uniform(1, 5, Rect::unit()), Err(Error::InvalidArgument(_))));
        assert!(matches!(generate_chebyshev(5, 1, Rect::unit()), Err(Error::InvalidArgument(_))));
        assert!(Rect::new(0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn chebyshev_abscissae() {
        let three = chebyshev_axis(3, 0.0, 1.0);
        assert_eq!(three, vec![0.0, 0.5, 1.0]);

        let c = (PI / 4.0).cos();
        let expected = [0.0, (1.0 - c) / 2.0, 0.5, (1.0 + c) / 2.0, 1.0];
        for (got, want) in chebyshev_axis(5, 0.0, 1.0).iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        for n in 2..40 {
            let axis = chebyshev_axis(n, -2.0, 3.0);
            assert_eq!(axis[0], -2.0);
            assert_eq!(axis[n - 1], 3.0);
            for i in 0..n {
                assert_abs_diff_eq!(axis[i] + axis[n - 1 - i], 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn chebyshev_spacing_is_the_central_gap() {
        let set = generate_chebyshev(11, 11, Rect::unit()).unwrap();
        // brute force over all nodes
        let pts = set.nodes();
        let mut brute: f64 = 0.0;
        for a in pts {
            let mut nearest = f64::INFINITY;
            for b in pts {
                if a.index != b.index {
                    nearest = nearest.min(((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt());
                }
            }
            brute = brute.max(nearest);
        }
        let h = nodal_spacing(&set).unwrap();
        assert_abs_diff_eq!(h, brute, epsilon = 1e-15);
        // the middle node's neighbours sit at (1 - cos(2 pi / 5)) / 2
        assert_abs_diff_eq!(h, 0.5 * (0.4 * PI).cos(), epsilon = 1e-14);
    }

    #[test]
    fn spacing_of_two_nodes() {
        let set = NodeSet::from_points(&[(0.0, 0.0), (0.3, 0.4)], Rect::unit(), Distribution::Imported).unwrap();
        assert_abs_diff_eq!(nodal_spacing(&set).unwrap(), 0.5, epsilon = 1e-15);
        let single = NodeSet::from_points(&[(0.5, 0.5)], Rect::unit(), Distribution::Imported).unwrap();
        assert!(nodal_spacing(&single).is_err());
    }

    #[test]
    fn anisotropic_uniform_spacing() {
        // every node's nearest neighbour is along the finer axis
        let set = generate_uniform(5, 9, Rect::new(0.0, 2.0, 0.0, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(nodal_spacing(&set).unwrap(), 0.125, epsilon = 1e-14);
    }

    #[test]
    fn coincident_nodes_are_rejected() {
        let err = NodeSet::from_points(&[(0.2, 0.2), (0.2, 0.2)], Rect::unit(), Distribution::Imported);
        assert!(err.is_err());
    }

    #[test]
    fn csv_round_trip() {
        let set = generate_chebyshev(7, 5, Rect::new(-1.0, 2.0, 0.0, PI).unwrap()).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("index,x,y,kind\n0,"));
        let back = NodeSet::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.nodes(), set.nodes());
        assert_eq!(back.grid(), set.grid());
        assert_eq!(back.domain(), set.domain());
    }

    #[test]
    fn csv_rejects_bad_header_and_gaps() {
        assert!(NodeSet::read_csv("i,x,y\n".as_bytes()).is_err());
        let gap = "index,x,y,kind\n0,0,0,boundary\n2,1,1,boundary\n";
        assert!(NodeSet::read_csv(gap.as_bytes()).is_err());
        let kind = "index,x,y,kind\n0,0,0,edge\n1,1,1,boundary\n";
        assert!(NodeSet::read_csv(kind.as_bytes()).is_err());
    }
}
