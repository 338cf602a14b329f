//! Small motifs that get planted onto a skeleton.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeKind {
    House,
    Fan,
    Star,
    Chain,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 4] = [ShapeKind::House, ShapeKind::Fan, ShapeKind::Star, ShapeKind::Chain];

    pub fn as_str(self) -> &'static str {
        match self {
            ShapeKind::House => "house",
            ShapeKind::Fan => "fan",
            ShapeKind::Star => "star",
            ShapeKind::Chain => "chain",
        }
    }

    /// The frozen topology of this motif.
    pub fn shape(self) -> Shape {
        match self {
            // Square 0-1-2-3 with apex 4 over the roof edge 0-1.
            ShapeKind::House => Shape {
                kind: self,
                size: 5,
                edges: vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (1, 4)],
                anchor: 4,
                orbits: vec![1, 1, 2, 2, 0],
                orbit_names: vec!["apex", "roof", "base"],
            },
            // Path 0-1-2-3, apex 4 joined to each path node.
            ShapeKind::Fan => Shape {
                kind: self,
                size: 5,
                edges: vec![(0, 1), (1, 2), (2, 3), (0, 4), (1, 4), (2, 4), (3, 4)],
                anchor: 4,
                orbits: vec![1, 2, 2, 1, 0],
                orbit_names: vec!["apex", "end", "middle"],
            },
            // Hub 0 with five leaves.
            ShapeKind::Star => Shape {
                kind: self,
                size: 6,
                edges: (1..6).map(|l| (0, l)).collect(),
                anchor: 0,
                orbits: vec![0, 1, 1, 1, 1, 1],
                orbit_names: vec!["hub", "leaf"],
            },
            // Path 0-1-2-3-4 hung from its middle node.
            ShapeKind::Chain => Shape {
                kind: self,
                size: 5,
                edges: vec![(0, 1), (1, 2), (2, 3), (3, 4)],
                anchor: 2,
                orbits: vec![2, 1, 0, 1, 2],
                orbit_names: vec!["center", "inner", "end"],
            },
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShapeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown shape '{s}'"))
    }
}

/// A motif with local node indices `0..size`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub kind: ShapeKind,
    pub size: usize,
    pub edges: Vec<(usize, usize)>,
    /// The node joined to the skeleton; fixed by every automorphism.
    pub anchor: usize,
    /// Orbit index per local node.
    pub orbits: Vec<usize>,
    pub orbit_names: Vec<&'static str>,
}

impl Shape {
    pub fn orbit_count(&self) -> usize {
        self.orbit_names.len()
    }

    pub fn role_name(&self, orbit: usize) -> String {
        format!("{}-{}", self.kind, self.orbit_names[orbit])
    }
}
