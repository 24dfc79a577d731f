use std::collections::VecDeque;

use super::{Mesh, MeshError, Side};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrientationResult {
    /// Per face: true when the stored corner order must be reversed to obtain
    /// a coherent orientation.
    Orientable { reversed: Vec<bool> },
    /// A closed walk through the dual graph. Each item is the side through
    /// which the walk leaves that face; the next item's face is across it and
    /// the last side leads back to the first face.
    NonOrientable { cycle: Vec<Side> },
}

impl OrientationResult {
    pub fn is_orientable(&self) -> bool {
        matches!(self, OrientationResult::Orientable { .. })
    }
}

/// Number of frame disagreements along a closed dual walk, modulo 2.
///
/// Returns `None` if the walk is not closed. An odd result means that carrying
/// an orientation around the walk reverses it.
pub fn replay_orientation_parity(mesh: &Mesh, cycle: &[Side]) -> Option<bool> {
    let mut odd = false;
    for (i, s) in cycle.iter().enumerate() {
        let t = mesh.twin(s.face, s.side)?;
        let next = cycle[(i + 1) % cycle.len()].face;
        if t.face != next {
            return None;
        }
        if !mesh.frames_agree(s.face, s.side)? {
            odd = !odd;
        }
    }
    Some(odd)
}

impl Mesh {
    /// Greedy breadth-first orientation of the dual graph.
    pub fn orientability(&self) -> OrientationResult {
        let n = self.face_count();
        let mut reversed = vec![false; n];
        let mut parent: Vec<Option<Side>> = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        for root in 0..n {
            if depth[root] != usize::MAX {
                continue;
            }
            depth[root] = 0;
            let mut queue = VecDeque::from([root]);
            while let Some(f) = queue.pop_front() {
                for k in 0..3 {
                    let Some(t) = self.twin(f, k) else { continue };
                    let agree = self.frames_agree(f, k).unwrap();
                    let want = reversed[f] ^ !agree;
                    if depth[t.face] == usize::MAX {
                        depth[t.face] = depth[f] + 1;
                        reversed[t.face] = want;
                        parent[t.face] = Some(Side::new(f, k));
                        queue.push_back(t.face);
                    } else if reversed[t.face] != want {
                        let cycle = closing_cycle(self, &parent, &depth, Side::new(f, k));
                        return OrientationResult::NonOrientable { cycle };
                    }
                }
            }
        }
        OrientationResult::Orientable { reversed }
    }
}

/// Closes a dual cycle: down the spanning tree from the common ancestor to
/// `crossing.face`, across `crossing`, then back up to the ancestor.
pub(crate) fn closing_cycle(
    mesh: &Mesh,
    parent: &[Option<Side>],
    depth: &[usize],
    crossing: Side,
) -> Vec<Side> {
    let target = mesh.twin(crossing.face, crossing.side).unwrap().face;
    let mut a = crossing.face;
    let mut b = target;
    let mut down: Vec<Side> = Vec::new();
    let mut up: Vec<Side> = Vec::new();
    while depth[a] > depth[b] {
        let p = parent[a].unwrap();
        down.push(p);
        a = p.face;
    }
    while depth[b] > depth[a] {
        let p = parent[b].unwrap();
        up.push(p);
        b = p.face;
    }
    while a != b {
        let (pa, pb) = (parent[a].unwrap(), parent[b].unwrap());
        down.push(pa);
        up.push(pb);
        a = pa.face;
        b = pb.face;
    }
    let mut cycle: Vec<Side> = down.into_iter().rev().collect();
    cycle.push(crossing);
    cycle.extend(up.into_iter().map(|p| mesh.twin(p.face, p.side).unwrap()));
    cycle
}

/// Correspondence between a boundary mesh and its double.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleMap {
    /// For every original face, its copy on each sheet of the double.
    pub seam: Vec<[usize; 2]>,
    /// For every original vertex, its copy on each sheet (equal on the boundary).
    pub vertices: Vec<[usize; 2]>,
}

impl DoubleMap {
    /// Corner permutation from an original face to its mirrored copy:
    /// corner `i` of the mirror holds original corner `MIRROR_CORNERS[i]`.
    pub const MIRROR_CORNERS: [usize; 3] = [0, 2, 1];
    /// Side `k` of the original face becomes side `MIRROR_SIDES[k]` of the mirror.
    pub const MIRROR_SIDES: [usize; 3] = [2, 1, 0];
}

impl Mesh {
    /// Glues a mirror copy onto the mesh along its boundary.
    pub fn double_along_boundary(&self) -> Result<(Mesh, DoubleMap), MeshError> {
        if self.is_closed() {
            return Err(MeshError::ClosedInput);
        }
        let nv = self.vertex_count();
        let nf = self.face_count();
        let mut vertices = Vec::with_capacity(nv);
        let mut next = nv;
        for v in 0..nv {
            if self.is_boundary_vertex(v) {
                vertices.push([v, v]);
            } else {
                vertices.push([v, next]);
                next += 1;
            }
        }
        let mut faces = self.faces().to_vec();
        for tri in self.faces() {
            let m = DoubleMap::MIRROR_CORNERS.map(|c| vertices[tri[c]][1]);
            faces.push(m);
        }
        let mut twins = vec![[None; 3]; 2 * nf];
        for f in 0..nf {
            for k in 0..3 {
                let mk = DoubleMap::MIRROR_SIDES[k];
                match self.twin(f, k) {
                    Some(t) => {
                        twins[f][k] = Some(t);
                        twins[nf + f][mk] =
                            Some(Side::new(nf + t.face, DoubleMap::MIRROR_SIDES[t.side]));
                    }
                    None => {
                        twins[f][k] = Some(Side::new(nf + f, mk));
                        twins[nf + f][mk] = Some(Side::new(f, k));
                    }
                }
            }
        }
        let mesh = Mesh::glue(next, faces, twins)?;
        let seam = (0..nf).map(|f| [f, nf + f]).collect();
        Ok((mesh, DoubleMap { seam, vertices }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, CatalogKey};
    use crate::mesh::tests::moebius_torus;

    /// Exhaustive check over all 2^F orientation choices (small meshes only).
    fn brute_force_orientable(mesh: &Mesh) -> bool {
        let n = mesh.face_count();
        assert!(n <= 20);
        'outer: for mask in 0u32..(1 << n) {
            for f in 0..n {
                for k in 0..3 {
                    if let Some(t) = mesh.twin(f, k) {
                        let rf = mask >> f & 1 == 1;
                        let rg = mask >> t.face & 1 == 1;
                        let agree = mesh.frames_agree(f, k).unwrap();
                        if agree == (rf != rg) {
                            continue 'outer;
                        }
                    }
                }
            }
            return true;
        }
        false
    }

    /// Independent oracle for larger meshes: the orientation double cover
    /// (faces x {kept, reversed}) splits into two components iff the surface
    /// is orientable.
    fn orientation_cover_disconnected(mesh: &Mesh) -> bool {
        let n = mesh.face_count();
        let mut seen = vec![false; 2 * n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            let (f, r) = (x % n, x / n);
            for k in 0..3 {
                if let Some(t) = mesh.twin(f, k) {
                    let agree = mesh.frames_agree(f, k).unwrap();
                    let y = t.face + n * (r ^ usize::from(!agree));
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        !seen[n]
    }

    fn mesh(name: &str) -> Mesh {
        catalog::generate_mesh(&CatalogKey::parse(name).unwrap()).unwrap()
    }

    #[test]
    fn projective_plane_is_non_orientable() {
        let m = mesh("rp2_minimal");
        assert!(!brute_force_orientable(&m));
        match m.orientability() {
            OrientationResult::NonOrientable { cycle } => {
                assert_eq!(replay_orientation_parity(&m, &cycle), Some(true));
            }
            r => panic!("expected non-orientable, got {r:?}"),
        }
    }

    #[test]
    fn orientable_examples() {
        let ico = mesh("icosphere:n=0");
        assert!(brute_force_orientable(&ico));
        assert!(ico.orientability().is_orientable());
        let t = Mesh::build(7, moebius_torus()).unwrap();
        assert!(brute_force_orientable(&t));
        assert!(t.orientability().is_orientable());
    }

    #[test]
    fn klein_bottle_witness() {
        let k = mesh("klein_grid:a=4,b=4");
        assert_eq!(k.euler_characteristic(), 0);
        match k.orientability() {
            OrientationResult::NonOrientable { cycle } => {
                assert_eq!(replay_orientation_parity(&k, &cycle), Some(true));
            }
            r => panic!("expected non-orientable, got {r:?}"),
        }
        // Orientable iff every dual cycle preserves orientation: propagate parity.
        assert!(!orientation_cover_disconnected(&k));
        let t = mesh("torus_grid:a=4,b=4");
        assert!(t.orientability().is_orientable());
        assert!(orientation_cover_disconnected(&t));
    }

    #[test]
    fn orientation_assignment_is_coherent() {
        let m = mesh("icosphere:n=1");
        let OrientationResult::Orientable { reversed } = m.orientability() else {
            panic!()
        };
        for f in 0..m.face_count() {
            for k in 0..3 {
                let t = m.twin(f, k).unwrap();
                let agree = m.frames_agree(f, k).unwrap();
                assert_eq!(agree, reversed[f] == reversed[t.face]);
            }
        }
    }

    #[test]
    fn doubling() {
        let d = mesh("disk_fan:rings=3,sectors=8");
        let (dd, map) = d.double_along_boundary().unwrap();
        assert!(dd.is_closed());
        assert_eq!(dd.euler_characteristic(), 2 * d.euler_characteristic());
        assert_eq!(dd.euler_characteristic(), 2);
        assert!(dd.orientability().is_orientable());
        assert_eq!(map.seam.len(), d.face_count());

        let a = mesh("annulus_grid:a=8,b=2");
        let (aa, _) = a.double_along_boundary().unwrap();
        assert!(aa.is_closed());
        assert_eq!(aa.euler_characteristic(), 0);

        assert_eq!(
            mesh("icosphere:n=0").double_along_boundary().unwrap_err(),
            MeshError::ClosedInput
        );
    }
}
