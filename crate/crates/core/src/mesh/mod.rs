//! Combinatorial triangulated surfaces.
//!
//! A [`Mesh`] is a list of vertex triples together with an explicit gluing of
//! face sides. Meshes read from files or generated by the catalog are glued
//! by vertex pairs ([`Mesh::build`]); derived surfaces such as branched covers
//! and doubles are glued side-by-side ([`Mesh::glue`]) so that two distinct
//! edges may share their endpoints.
//!
//! Side `k` of a face joins corners `k` and `k + 1 (mod 3)`. The stored corner
//! order fixes the face frame: angles are measured from the direction
//! `corner 0 -> corner 1`, positive towards corner 2.

mod off;
mod topology;

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

pub use off::{parse_off, write_off};
pub use topology::{replay_orientation_parity, DoubleMap, OrientationResult};
pub(crate) use topology::closing_cycle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("face {face} references vertex {vertex} but the mesh has {vertex_count} vertices")]
    InvalidVertex {
        face: usize,
        vertex: usize,
        vertex_count: usize,
    },
    #[error("degenerate face {face}: {reason}")]
    DegenerateFace { face: usize, reason: String },
    #[error("non-manifold edge ({a}, {b}) lies in {count} faces")]
    NonManifoldEdge { a: usize, b: usize, count: usize },
    #[error("non-manifold vertex {vertex}: its link is not a single cycle or path")]
    NonManifoldVertex { vertex: usize },
    #[error("mesh is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("vertex {vertex} is not used by any face")]
    IsolatedVertex { vertex: usize },
    #[error("inconsistent gluing at face {face} side {side}")]
    InconsistentGluing { face: usize, side: usize },
    #[error("mesh has no boundary")]
    ClosedInput,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("face at line {line} has {arity} vertices; only triangles are supported")]
    NonTriangular { line: usize, arity: usize },
}

impl MeshError {
    /// Stable error code used in CLI messages and reports.
    pub fn code(&self) -> &'static str {
        match self {
            MeshError::InvalidVertex { .. } => "INVALID_VERTEX",
            MeshError::DegenerateFace { .. } => "DEGENERATE_FACE",
            MeshError::NonManifoldEdge { .. } | MeshError::NonManifoldVertex { .. } => {
                "NON_MANIFOLD"
            }
            MeshError::Disconnected { .. } | MeshError::IsolatedVertex { .. } => "DISCONNECTED",
            MeshError::InconsistentGluing { .. } => "NON_MANIFOLD",
            MeshError::ClosedInput => "CLOSED_INPUT",
            MeshError::Parse { .. } => "PARSE_ERROR",
            MeshError::NonTriangular { .. } => "NON_TRIANGULAR",
        }
    }
}

/// One side of one face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Side {
    pub face: usize,
    pub side: usize,
}

impl Side {
    pub fn new(face: usize, side: usize) -> Self {
        Side { face, side }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Endpoints as stored on the first side that introduced the edge.
    pub vertices: [usize; 2],
    pub first: Side,
    /// `None` for boundary edges.
    pub second: Option<Side>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.second.is_none()
    }
}

/// One face of a vertex star, as seen by the walk around that vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StarEntry {
    pub face: usize,
    /// Corner of `face` occupied by the centre vertex.
    pub corner: usize,
    /// True when the stored face frame turns against the walk.
    pub flip: bool,
    /// Side through which the walk enters this face (shared with the previous entry).
    pub entry_side: usize,
    /// Side through which the walk leaves this face (shared with the next entry).
    pub exit_side: usize,
}

impl StarEntry {
    /// Neighbour across the entry side, i.e. the start of the corner sweep.
    pub fn in_vertex(&self, mesh: &Mesh) -> usize {
        mesh.faces[self.face][other_corner(self.entry_side, self.corner)]
    }

    /// Neighbour across the exit side, i.e. the end of the corner sweep.
    pub fn out_vertex(&self, mesh: &Mesh) -> usize {
        mesh.faces[self.face][other_corner(self.exit_side, self.corner)]
    }

    pub fn in_corner(&self) -> usize {
        other_corner(self.entry_side, self.corner)
    }

    pub fn out_corner(&self) -> usize {
        other_corner(self.exit_side, self.corner)
    }
}

fn other_corner(side: usize, corner: usize) -> usize {
    if side == corner {
        (side + 1) % 3
    } else {
        side
    }
}

/// Faces around a vertex in walk order.
///
/// For an interior vertex the list is cyclic: the last entry's exit side is
/// glued to the first entry's entry side. For a boundary vertex it is a path
/// whose first entry side and last exit side are boundary sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexStar {
    pub vertex: usize,
    pub entries: Vec<StarEntry>,
    pub cyclic: bool,
}

impl VertexStar {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The same star walked the other way round.
    pub fn reversed(&self) -> VertexStar {
        let entries = self
            .entries
            .iter()
            .rev()
            .map(|e| StarEntry {
                face: e.face,
                corner: e.corner,
                flip: !e.flip,
                entry_side: e.exit_side,
                exit_side: e.entry_side,
            })
            .collect();
        VertexStar {
            vertex: self.vertex,
            entries,
            cyclic: self.cyclic,
        }
    }
}

/// Immutable triangulated surface.
#[derive(Clone, Debug)]
pub struct Mesh {
    vertex_count: usize,
    faces: Vec<[usize; 3]>,
    twins: Vec<[Option<Side>; 3]>,
    side_edges: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    stars: Vec<VertexStar>,
    positions: Option<Vec<[f64; 3]>>,
}

impl PartialEq for Mesh {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_count == other.vertex_count
            && self.faces == other.faces
            && self.twins == other.twins
    }
}

impl Mesh {
    /// Builds a connected surface, gluing faces along shared vertex pairs.
    pub fn build(vertex_count: usize, faces: Vec<[usize; 3]>) -> Result<Mesh, MeshError> {
        check_faces(vertex_count, &faces)?;

        let mut by_pair: HashMap<(usize, usize), Vec<Side>> = HashMap::new();
        let mut pair_order = Vec::new();
        for (f, tri) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let slot = by_pair.entry(key).or_insert_with(|| {
                    pair_order.push(key);
                    Vec::new()
                });
                slot.push(Side::new(f, k));
            }
        }
        let mut twins = vec![[None; 3]; faces.len()];
        for key in &pair_order {
            let sides = &by_pair[key];
            match sides.as_slice() {
                [_] => {}
                [s, t] => {
                    twins[s.face][s.side] = Some(*t);
                    twins[t.face][t.side] = Some(*s);
                }
                _ => {
                    return Err(MeshError::NonManifoldEdge {
                        a: key.0,
                        b: key.1,
                        count: sides.len(),
                    })
                }
            }
        }

        let mesh = Mesh::assemble(vertex_count, faces, twins)?;
        let components = mesh.component_count();
        if components != 1 {
            return Err(MeshError::Disconnected { components });
        }
        Ok(mesh)
    }

    /// Builds a surface from an explicit side gluing.
    ///
    /// Unlike [`Mesh::build`], two edges may join the same pair of vertices and
    /// the result may have several components.
    pub fn glue(
        vertex_count: usize,
        faces: Vec<[usize; 3]>,
        twins: Vec<[Option<Side>; 3]>,
    ) -> Result<Mesh, MeshError> {
        for (f, tri) in faces.iter().enumerate() {
            for (k, &v) in tri.iter().enumerate() {
                if v >= vertex_count {
                    return Err(MeshError::InvalidVertex {
                        face: f,
                        vertex: v,
                        vertex_count,
                    });
                }
                if tri[(k + 1) % 3] == v {
                    return Err(MeshError::DegenerateFace {
                        face: f,
                        reason: "repeated vertex".into(),
                    });
                }
            }
        }
        if twins.len() != faces.len() {
            return Err(MeshError::InconsistentGluing { face: 0, side: 0 });
        }
        for (f, row) in twins.iter().enumerate() {
            for (k, t) in row.iter().enumerate() {
                if let Some(t) = t {
                    let ok = t.face < faces.len()
                        && t.side < 3
                        && *t != Side::new(f, k)
                        && twins[t.face][t.side] == Some(Side::new(f, k))
                        && same_endpoints(&faces, Side::new(f, k), *t);
                    if !ok {
                        return Err(MeshError::InconsistentGluing { face: f, side: k });
                    }
                }
            }
        }
        Mesh::assemble(vertex_count, faces, twins)
    }

    fn assemble(
        vertex_count: usize,
        faces: Vec<[usize; 3]>,
        twins: Vec<[Option<Side>; 3]>,
    ) -> Result<Mesh, MeshError> {
        let mut side_edges = vec![[usize::MAX; 3]; faces.len()];
        let mut edges = Vec::new();
        for f in 0..faces.len() {
            for k in 0..3 {
                if side_edges[f][k] != usize::MAX {
                    continue;
                }
                let id = edges.len();
                side_edges[f][k] = id;
                if let Some(t) = twins[f][k] {
                    side_edges[t.face][t.side] = id;
                }
                edges.push(Edge {
                    vertices: [faces[f][k], faces[f][(k + 1) % 3]],
                    first: Side::new(f, k),
                    second: twins[f][k],
                });
            }
        }

        let mut incidence = vec![0usize; vertex_count];
        let mut first_corner = vec![None; vertex_count];
        for (f, tri) in faces.iter().enumerate() {
            for (k, &v) in tri.iter().enumerate() {
                incidence[v] += 1;
                if first_corner[v].is_none() {
                    first_corner[v] = Some((f, k));
                }
            }
        }

        let mut mesh = Mesh {
            vertex_count,
            faces,
            twins,
            side_edges,
            edges,
            stars: Vec::with_capacity(vertex_count),
            positions: None,
        };

        let mut stars = Vec::with_capacity(vertex_count);
        for v in 0..vertex_count {
            let (f, k) = first_corner[v].ok_or(MeshError::IsolatedVertex { vertex: v })?;
            let star = mesh.walk_star(v, f, k)?;
            if star.entries.len() != incidence[v] {
                return Err(MeshError::NonManifoldVertex { vertex: v });
            }
            stars.push(star);
        }
        mesh.stars = stars;
        Ok(mesh)
    }

    /// Walks the faces around `v` starting from corner `k` of face `f`.
    fn walk_star(&self, v: usize, f: usize, k: usize) -> Result<VertexStar, MeshError> {
        let limit = self.faces.len() + 1;
        let first = entry_with_orientation(f, k, false);

        // Walk backwards first; if we reach a boundary, the star is a path and
        // the walk restarts from that end.
        let mut start = first;
        let mut steps = 0;
        let mut cyclic = false;
        loop {
            match self.step(v, start.reversed_walk()) {
                None => break,
                Some(prev) => {
                    let prev = prev.reversed_walk();
                    if prev.face == first.face && prev.corner == first.corner {
                        cyclic = true;
                        break;
                    }
                    start = prev;
                }
            }
            steps += 1;
            if steps > limit {
                return Err(MeshError::NonManifoldVertex { vertex: v });
            }
        }
        let start = if cyclic { first } else { start };

        let mut entries = vec![start];
        let mut cur = start;
        loop {
            match self.step(v, cur) {
                None => {
                    if cyclic {
                        return Err(MeshError::NonManifoldVertex { vertex: v });
                    }
                    break;
                }
                Some(next) => {
                    if next.face == start.face && next.corner == start.corner {
                        if !cyclic || next != start {
                            return Err(MeshError::NonManifoldVertex { vertex: v });
                        }
                        break;
                    }
                    entries.push(next);
                    cur = next;
                }
            }
            if entries.len() > limit {
                return Err(MeshError::NonManifoldVertex { vertex: v });
            }
        }
        Ok(VertexStar {
            vertex: v,
            entries,
            cyclic,
        })
    }

    /// Crosses the exit side of `entry`, returning the next star entry.
    fn step(&self, v: usize, entry: StarEntry) -> Option<StarEntry> {
        let t = self.twins[entry.face][entry.exit_side]?;
        let tri = self.faces[t.face];
        let corner = if tri[t.side] == v {
            t.side
        } else {
            debug_assert_eq!(tri[(t.side + 1) % 3], v);
            (t.side + 1) % 3
        };
        // Entering through side t.side: the neighbour on that side is the in-vertex.
        let in_corner = other_corner(t.side, corner);
        let flip = in_corner != (corner + 1) % 3;
        let exit_side = if flip { corner } else { (corner + 2) % 3 };
        Some(StarEntry {
            face: t.face,
            corner,
            flip,
            entry_side: t.side,
            exit_side,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> [usize; 3] {
        self.faces[f]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge id of side `k` of face `f`.
    pub fn side_edge(&self, f: usize, k: usize) -> usize {
        self.side_edges[f][k]
    }

    /// The side glued to side `k` of face `f`, if it is interior.
    pub fn twin(&self, f: usize, k: usize) -> Option<Side> {
        self.twins[f][k]
    }

    pub fn twins(&self) -> &[[Option<Side>; 3]] {
        &self.twins
    }

    /// True when the two faces glued along side `k` of `f` induce the same
    /// orientation on the shared edge (they traverse it in opposite directions).
    pub fn frames_agree(&self, f: usize, k: usize) -> Option<bool> {
        let t = self.twins[f][k]?;
        Some(self.faces[f][k] == self.faces[t.face][(t.side + 1) % 3])
    }

    pub fn star(&self, v: usize) -> &VertexStar {
        &self.stars[v]
    }

    /// Faces around `v` in walk order (see [`VertexStar`]).
    pub fn vertex_star(&self, v: usize) -> &VertexStar {
        &self.stars[v]
    }

    pub fn stars(&self) -> &[VertexStar] {
        &self.stars
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        !self.stars[v].cyclic
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count).filter(|&v| self.stars[v].cyclic)
    }

    pub fn boundary_sides(&self) -> impl Iterator<Item = Side> + '_ {
        self.twins.iter().enumerate().flat_map(|(f, row)| {
            (0..3)
                .filter(move |&k| row[k].is_none())
                .map(move |k| Side::new(f, k))
        })
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary_sides().next().is_some()
    }

    pub fn is_closed(&self) -> bool {
        !self.has_boundary()
    }

    /// V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Number of connected components of the dual graph.
    pub fn component_count(&self) -> usize {
        self.face_components().1
    }

    /// Component label per face and the number of components.
    pub fn face_components(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.faces.len()];
        let mut count = 0;
        for root in 0..self.faces.len() {
            if label[root] != usize::MAX {
                continue;
            }
            label[root] = count;
            let mut queue = VecDeque::from([root]);
            while let Some(f) = queue.pop_front() {
                for t in self.twins[f].iter().flatten() {
                    if label[t.face] == usize::MAX {
                        label[t.face] = count;
                        queue.push_back(t.face);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// Breadth-first dual spanning forest: for every face, the side of its
    /// parent through which it was reached (`None` for roots), in visit order.
    pub fn dual_spanning_tree(&self) -> Vec<(usize, Option<Side>)> {
        let mut seen = vec![false; self.faces.len()];
        let mut order = Vec::with_capacity(self.faces.len());
        for root in 0..self.faces.len() {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            order.push((root, None));
            let mut queue = VecDeque::from([root]);
            while let Some(f) = queue.pop_front() {
                for k in 0..3 {
                    if let Some(t) = self.twins[f][k] {
                        if !seen[t.face] {
                            seen[t.face] = true;
                            order.push((t.face, Some(Side::new(f, k))));
                            queue.push_back(t.face);
                        }
                    }
                }
            }
        }
        order
    }

    /// Vertex adjacency along edges (with multiplicity for multi-edges).
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbrs = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            nbrs[e.vertices[0]].push(e.vertices[1]);
            nbrs[e.vertices[1]].push(e.vertices[0]);
        }
        nbrs
    }

    pub fn positions(&self) -> Option<&[[f64; 3]]> {
        self.positions.as_deref()
    }

    /// Attaches vertex positions; panics if the count does not match.
    pub fn with_positions(mut self, positions: Vec<[f64; 3]>) -> Mesh {
        assert_eq!(positions.len(), self.vertex_count, "one position per vertex");
        self.positions = Some(positions);
        self
    }

    pub fn without_positions(mut self) -> Mesh {
        self.positions = None;
        self
    }

    /// True when positions exist and all lie in the plane z = 0.
    pub fn is_planar(&self) -> bool {
        self.positions
            .as_ref()
            .is_some_and(|p| p.iter().all(|x| x[2] == 0.0))
    }
}

impl StarEntry {
    fn reversed_walk(self) -> StarEntry {
        StarEntry {
            flip: !self.flip,
            entry_side: self.exit_side,
            exit_side: self.entry_side,
            ..self
        }
    }
}

fn entry_with_orientation(face: usize, corner: usize, flip: bool) -> StarEntry {
    let (entry_side, exit_side) = if flip {
        ((corner + 2) % 3, corner)
    } else {
        (corner, (corner + 2) % 3)
    };
    StarEntry {
        face,
        corner,
        flip,
        entry_side,
        exit_side,
    }
}

fn same_endpoints(faces: &[[usize; 3]], a: Side, b: Side) -> bool {
    let (x0, x1) = (faces[a.face][a.side], faces[a.face][(a.side + 1) % 3]);
    let (y0, y1) = (faces[b.face][b.side], faces[b.face][(b.side + 1) % 3]);
    (x0 == y0 && x1 == y1) || (x0 == y1 && x1 == y0)
}

fn check_faces(vertex_count: usize, faces: &[[usize; 3]]) -> Result<(), MeshError> {
    let mut seen: HashMap<[usize; 3], usize> = HashMap::new();
    for (f, tri) in faces.iter().enumerate() {
        for &v in tri {
            if v >= vertex_count {
                return Err(MeshError::InvalidVertex {
                    face: f,
                    vertex: v,
                    vertex_count,
                });
            }
        }
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            return Err(MeshError::DegenerateFace {
                face: f,
                reason: "repeated vertex".into(),
            });
        }
        let mut key = *tri;
        key.sort_unstable();
        if let Some(prev) = seen.insert(key, f) {
            return Err(MeshError::DegenerateFace {
                face: f,
                reason: format!("same vertices as face {prev}"),
            });
        }
    }
    Ok(())
}
