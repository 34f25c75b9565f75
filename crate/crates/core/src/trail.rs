//! Directed edge steps, trails, (s,t)-decompositions and canonical Euler tours.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{EdgeLabel, Multigraph, VertexId};

/// Traversal direction relative to the edge's stored orientation `(u, v)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }

    fn sign(self) -> char {
        match self {
            Direction::Forward => '+',
            Direction::Backward => '-',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub label: EdgeLabel,
    pub direction: Direction,
}

impl Step {
    pub fn new(label: EdgeLabel, direction: Direction) -> Self {
        Step { label, direction }
    }

    pub fn reversed(self) -> Self {
        Step::new(self.label, self.direction.flip())
    }

    pub fn tail(self, g: &Multigraph) -> VertexId {
        let (u, v) = g.edge(self.label);
        match self.direction {
            Direction::Forward => u,
            Direction::Backward => v,
        }
    }

    pub fn head(self, g: &Multigraph) -> VertexId {
        let (u, v) = g.edge(self.label);
        match self.direction {
            Direction::Forward => v,
            Direction::Backward => u,
        }
    }

    /// The step over `label` that leaves `from`.
    pub fn leaving(g: &Multigraph, label: EdgeLabel, from: VertexId) -> Step {
        let (u, _) = g.edge(label);
        if u == from {
            Step::new(label, Direction::Forward)
        } else {
            Step::new(label, Direction::Backward)
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.label, self.direction.sign())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrailKind {
    /// Joins the two terminals.
    Path,
    SourceLoop,
    SinkLoop,
}

/// A walk stored as a sequence of directed steps.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trail {
    steps: Vec<Step>,
}

impl Trail {
    pub fn new(steps: Vec<Step>) -> Self {
        assert!(!steps.is_empty(), "trails have at least one edge");
        Trail { steps }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn into_steps(self) -> Vec<Step> {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn reversed(&self) -> Trail {
        Trail {
            steps: self.steps.iter().rev().map(|s| s.reversed()).collect(),
        }
    }

    /// Orientation with the lower-labeled end edge first. A single edge is
    /// stored forward.
    pub fn normalized(self) -> Trail {
        let first = self.steps[0];
        let last = self.steps[self.steps.len() - 1];
        if self.steps.len() == 1 {
            Trail::new(vec![Step::new(first.label, Direction::Forward)])
        } else if first.label > last.label {
            self.reversed()
        } else {
            self
        }
    }

    pub fn is_normalized(&self) -> bool {
        match self.steps.as_slice() {
            [only] => only.direction == Direction::Forward,
            steps => steps[0].label < steps[steps.len() - 1].label,
        }
    }

    pub fn start(&self, g: &Multigraph) -> VertexId {
        self.steps[0].tail(g)
    }

    pub fn end(&self, g: &Multigraph) -> VertexId {
        self.steps[self.steps.len() - 1].head(g)
    }

    /// This trail or its reverse, whichever starts at `v`.
    pub fn starting_at(&self, g: &Multigraph, v: VertexId) -> Trail {
        if self.start(g) == v {
            self.clone()
        } else {
            debug_assert_eq!(self.end(g), v);
            self.reversed()
        }
    }

    /// Classifies the trail with respect to terminals `(s, t)`, or `None` if it
    /// is not a contiguous walk, does not end in `{s, t}`, or passes through a
    /// terminal in its interior.
    pub fn kind(&self, g: &Multigraph, s: VertexId, t: VertexId) -> Option<TrailKind> {
        for pair in self.steps.windows(2) {
            let joint = pair[0].head(g);
            if joint != pair[1].tail(g) || joint == s || joint == t {
                return None;
            }
        }
        match (self.start(g), self.end(g)) {
            (a, b) if (a == s && b == t) || (a == t && b == s) => Some(TrailKind::Path),
            (a, b) if a == s && b == s => Some(TrailKind::SourceLoop),
            (a, b) if a == t && b == t => Some(TrailKind::SinkLoop),
            _ => None,
        }
    }
}

impl fmt::Display for Trail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{step}")?;
        }
        Ok(())
    }
}

/// A partition of a (sub)graph's edges into terminal-to-terminal paths,
/// source loops and sink loops, each trail stored normalized.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decomposition {
    pub paths: Vec<Trail>,
    pub source_loops: Vec<Trail>,
    pub sink_loops: Vec<Trail>,
}

impl Decomposition {
    /// Number of terminal-to-terminal paths.
    pub fn k(&self) -> usize {
        self.paths.len()
    }

    pub fn trail_count(&self) -> usize {
        self.paths.len() + self.source_loops.len() + self.sink_loops.len()
    }

    pub fn trails(&self) -> impl Iterator<Item = &Trail> {
        self.paths
            .iter()
            .chain(&self.source_loops)
            .chain(&self.sink_loops)
    }

    /// Sorted list of all trails: equal signatures mean equal decompositions.
    pub fn signature(&self) -> Vec<Trail> {
        let mut all: Vec<Trail> = self.trails().cloned().collect();
        all.sort();
        all
    }

    /// Groups normalized trails by kind.
    pub fn from_trails(
        g: &Multigraph,
        s: VertexId,
        t: VertexId,
        trails: impl IntoIterator<Item = Trail>,
    ) -> Result<Decomposition> {
        let mut out = Decomposition::default();
        for trail in trails {
            let trail = trail.normalized();
            match trail.kind(g, s, t) {
                Some(TrailKind::Path) => out.paths.push(trail),
                Some(TrailKind::SourceLoop) => out.source_loops.push(trail),
                Some(TrailKind::SinkLoop) => out.sink_loops.push(trail),
                None => return Err(Error::Contract(format!("`{trail}` is not a terminal trail"))),
            }
        }
        Ok(out)
    }

    /// Checks that the trails are normalized, correctly classified, cover the
    /// labels in `labels` exactly once, and number `(d(s) + d(t)) / 2`.
    pub fn validate(
        &self,
        g: &Multigraph,
        s: VertexId,
        t: VertexId,
        labels: std::ops::RangeInclusive<u32>,
        terminal_degrees: (u32, u32),
    ) -> Result<()> {
        let fail = |msg: String| Err(Error::Contract(msg));
        let groups = [
            (&self.paths, TrailKind::Path),
            (&self.source_loops, TrailKind::SourceLoop),
            (&self.sink_loops, TrailKind::SinkLoop),
        ];
        let lo = *labels.start();
        let mut seen = vec![false; labels.clone().count()];
        for (trails, expected) in groups {
            for trail in trails {
                if !trail.is_normalized() {
                    return fail(format!("trail `{trail}` is not normalized"));
                }
                if trail.kind(g, s, t) != Some(expected) {
                    return fail(format!("trail `{trail}` is not a {expected:?}"));
                }
                for step in trail.steps() {
                    let l = step.label.get();
                    if !labels.contains(&l) || std::mem::replace(&mut seen[(l - lo) as usize], true) {
                        return fail(format!("edge {l} is foreign or repeated"));
                    }
                }
            }
        }
        if !seen.iter().all(|&x| x) {
            return fail("decomposition misses an edge".into());
        }
        let expected = (terminal_degrees.0 + terminal_degrees.1) / 2;
        if self.trail_count() != expected as usize {
            return fail(format!("{} trails, expected {expected}", self.trail_count()));
        }
        Ok(())
    }
}

/// A closed walk covering every edge once, in canonical form: the
/// lexicographically least step sequence over all rotations and both
/// directions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EulerTour {
    steps: Vec<Step>,
}

impl EulerTour {
    /// Canonicalizes an arbitrary rotation/direction of a closed walk.
    pub fn new(steps: Vec<Step>) -> Self {
        let reversed: Vec<Step> = steps.iter().rev().map(|s| s.reversed()).collect();
        let best = least_rotation(&steps).min(least_rotation(&reversed));
        EulerTour { steps: best }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Comma-separated `label:+|-` form.
    pub fn edge_string(&self) -> String {
        self.steps
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Space-separated vertex walk, closed by repeating the first vertex.
    pub fn vertex_string(&self, g: &Multigraph) -> String {
        let mut out: Vec<String> = self.steps.iter().map(|s| s.tail(g).to_string()).collect();
        if let Some(first) = self.steps.first() {
            out.push(first.tail(g).to_string());
        }
        out.join(" ")
    }
}

impl fmt::Display for EulerTour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.edge_string())
    }
}

fn least_rotation(steps: &[Step]) -> Vec<Step> {
    let n = steps.len();
    let mut best = 0;
    for start in 1..n {
        let candidate = steps[start..].iter().chain(&steps[..start]);
        let current = steps[best..].iter().chain(&steps[..best]);
        if candidate.lt(current) {
            best = start;
        }
    }
    steps[best..].iter().chain(&steps[..best]).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn step(label: u32, forward: bool) -> Step {
        Step::new(
            EdgeLabel::new(label).unwrap(),
            if forward {
                Direction::Forward
            } else {
                Direction::Backward
            },
        )
    }

    #[test]
    fn digon_tour_canonical_form() {
        let tour = EulerTour::new(vec![step(2, true), step(1, false)]);
        assert_eq!(tour.edge_string(), "1:+,2:-");
        let g = Multigraph::new(2, 0, 1, vec![(0, 1), (0, 1)]).unwrap();
        assert_eq!(tour.vertex_string(&g), "0 1 0");
    }

    #[test]
    fn trail_kinds() {
        // triangle: 1 = s-t, 2 = s-a, 3 = a-t
        let g = Multigraph::new(3, 0, 1, vec![(0, 1), (0, 2), (2, 1)]).unwrap();
        let path = Trail::new(vec![step(2, true), step(3, true)]);
        assert_eq!(path.kind(&g, 0, 1), Some(TrailKind::Path));
        let broken = Trail::new(vec![step(2, true), step(1, true)]);
        assert_eq!(broken.kind(&g, 0, 1), None);
        // with terminals (s, a), the path through t touches nothing forbidden
        let lp = Trail::new(vec![step(1, true), step(3, false)]);
        assert_eq!(lp.kind(&g, 0, 2), Some(TrailKind::Path));
        let around = Trail::new(vec![step(1, true), step(3, false), step(2, false)]);
        assert_eq!(around.kind(&g, 0, 2), None);
    }

    #[test]
    fn single_edge_normalizes_forward() {
        let t = Trail::new(vec![step(4, false)]).normalized();
        assert_eq!(t.steps(), &[step(4, true)]);
    }

    fn arb_steps() -> impl Strategy<Value = Vec<Step>> {
        prop::collection::vec((1u32..20, any::<bool>()), 1..12).prop_map(|v| {
            let mut seen = std::collections::HashSet::new();
            v.into_iter()
                .filter(|(l, _)| seen.insert(*l))
                .map(|(l, f)| step(l, f))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(steps in arb_steps()) {
            let once = Trail::new(steps).normalized();
            prop_assert!(once.is_normalized());
            prop_assert_eq!(once.clone().normalized(), once);
        }

        #[test]
        fn canonical_tour_ignores_rotation_and_reversal(steps in arb_steps(), shift in 0usize..12, flip in any::<bool>()) {
            let n = steps.len();
            let mut moved: Vec<Step> = steps[shift % n..].iter().chain(&steps[..shift % n]).copied().collect();
            if flip {
                moved = moved.iter().rev().map(|s| s.reversed()).collect();
            }
            prop_assert_eq!(EulerTour::new(moved), EulerTour::new(steps));
        }
    }
}
