//! Combinatorial closed surfaces.
//!
//! A [`Triangulation`] is an abstract simplicial 2-complex: a vertex count
//! and a list of vertex triples. Validation checks that it is a closed
//! surface (every edge on two faces, every vertex link one cycle), then the
//! index theorem is checked twice over: once by Poincaré's vertex-excess
//! count and once by the barycentric singular pattern.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::half::HalfIndex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("face {face} references vertex {vertex}, but there are only {count} vertices")]
    VertexOutOfRange { face: usize, vertex: u32, count: u32 },
    #[error("face {face} repeats a vertex: {vertices:?}")]
    DegenerateFace { face: usize, vertices: [u32; 3] },
    #[error("edge {edge:?} lies on a single face (surface has boundary)")]
    NotClosed { edge: [u32; 2] },
    #[error("not a 2-manifold at {at}: {reason}")]
    NotManifold { at: String, reason: String },
    #[error("{0} is outside the fixture range")]
    Range(String),
    #[error("triangulation file, line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triangulation {
    pub vertex_count: u32,
    pub faces: Vec<[u32; 3]>,
}

/// Counts and flags from a successful validation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SurfaceReport {
    pub sigma0: u64,
    pub sigma1: u64,
    pub sigma2: u64,
    pub chi: i64,
    pub orientable: bool,
    pub components: u64,
    /// Number of faces at each vertex.
    pub degrees: Vec<u64>,
    pub two_faces_per_edge: bool,
    pub links_are_cycles: bool,
    pub three_sigma2_eq_two_sigma1: bool,
}

fn edge(a: u32, b: u32) -> [u32; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

impl Triangulation {
    pub fn new(vertex_count: u32, faces: Vec<[u32; 3]>) -> Self {
        Triangulation { vertex_count, faces }
    }

    /// Undirected edges with the faces on them.
    fn edge_faces(&self) -> BTreeMap<[u32; 2], Vec<usize>> {
        let mut map: BTreeMap<[u32; 2], Vec<usize>> = BTreeMap::new();
        for (i, f) in self.faces.iter().enumerate() {
            for k in 0..3 {
                map.entry(edge(f[k], f[(k + 1) % 3])).or_default().push(i);
            }
        }
        map
    }

    pub fn validate(&self) -> Result<SurfaceReport, SurfaceError> {
        let nv = self.vertex_count;
        for (i, f) in self.faces.iter().enumerate() {
            if let Some(&v) = f.iter().find(|&&v| v >= nv) {
                return Err(SurfaceError::VertexOutOfRange { face: i, vertex: v, count: nv });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(SurfaceError::DegenerateFace { face: i, vertices: *f });
            }
        }

        let edges = self.edge_faces();
        for (e, fs) in &edges {
            match fs.len() {
                1 => return Err(SurfaceError::NotClosed { edge: *e }),
                2 => {}
                n => {
                    return Err(SurfaceError::NotManifold {
                        at: format!("edge {e:?}"),
                        reason: format!("edge lies on {n} faces"),
                    })
                }
            }
        }

        // Vertex links: the opposite edges of the faces at v must form one
        // simple cycle.
        let mut link: Vec<Vec<[u32; 2]>> = vec![Vec::new(); nv as usize];
        for f in &self.faces {
            for k in 0..3 {
                link[f[k] as usize].push(edge(f[(k + 1) % 3], f[(k + 2) % 3]));
            }
        }
        for (v, l) in link.iter().enumerate() {
            check_link(v as u32, l)?;
        }

        let (orientable, components) = self.orientation(&edges);
        let sigma0 = nv as u64;
        let sigma1 = edges.len() as u64;
        let sigma2 = self.faces.len() as u64;
        Ok(SurfaceReport {
            sigma0,
            sigma1,
            sigma2,
            chi: sigma0 as i64 - sigma1 as i64 + sigma2 as i64,
            orientable,
            components,
            degrees: link.iter().map(|l| l.len() as u64).collect(),
            two_faces_per_edge: true,
            links_are_cycles: true,
            three_sigma2_eq_two_sigma1: 3 * sigma2 == 2 * sigma1,
        })
    }

    /// Greedy orientation propagation: two faces across an edge must run
    /// through it in opposite directions. Returns (orientable, components).
    fn orientation(&self, edges: &BTreeMap<[u32; 2], Vec<usize>>) -> (bool, u64) {
        let n = self.faces.len();
        // +1 keeps the stored vertex order, -1 reverses it.
        let mut sign: Vec<i8> = vec![0; n];
        let mut orientable = true;
        let mut components = 0;
        let runs_forward = |face: &[u32; 3], s: i8, a: u32, b: u32| -> bool {
            let fwd = (0..3).any(|k| face[k] == a && face[(k + 1) % 3] == b);
            fwd == (s > 0)
        };
        for seed in 0..n {
            if sign[seed] != 0 {
                continue;
            }
            components += 1;
            sign[seed] = 1;
            let mut queue = VecDeque::from([seed]);
            while let Some(i) = queue.pop_front() {
                let f = self.faces[i];
                for k in 0..3 {
                    let (a, b) = (f[k], f[(k + 1) % 3]);
                    let here = runs_forward(&f, sign[i], a, b);
                    for &j in &edges[&edge(a, b)] {
                        if j == i {
                            continue;
                        }
                        let g = self.faces[j];
                        // Neighbour must traverse a→b opposite to us.
                        let want: i8 = if runs_forward(&g, 1, a, b) == here { -1 } else { 1 };
                        if sign[j] == 0 {
                            sign[j] = want;
                            queue.push_back(j);
                        } else if sign[j] != want {
                            orientable = false;
                        }
                    }
                }
            }
        }
        (orientable, components)
    }

    /// Apply a vertex permutation: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[u32]) -> Triangulation {
        Triangulation {
            vertex_count: self.vertex_count,
            faces: self.faces.iter().map(|f| [perm[f[0] as usize], perm[f[1] as usize], perm[f[2] as usize]]).collect(),
        }
    }

    /// Parse the `tri` text format:
    ///
    /// ```text
    /// tri
    /// nv 4
    /// f 0 1 2
    /// ...
    /// ```
    ///
    /// Blank lines and `#` comments are ignored. Vertex ranges are checked by
    /// [`Triangulation::validate`], not here.
    pub fn parse(text: &str) -> Result<Triangulation, SurfaceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, msg: &str| SurfaceError::Parse { line, msg: msg.to_string() };

        match lines.next() {
            Some((_, "tri")) => {}
            Some((n, _)) => return Err(err(n, "expected header `tri`")),
            None => return Err(err(0, "empty file")),
        }
        let (n, nv_line) = lines.next().ok_or_else(|| err(0, "missing `nv` line"))?;
        let nv: u32 = match nv_line.split_whitespace().collect::<Vec<_>>()[..] {
            ["nv", count] => count.parse().map_err(|_| err(n, "bad vertex count"))?,
            _ => return Err(err(n, "expected `nv <count>`")),
        };
        let mut faces = Vec::new();
        for (n, l) in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let ["f", a, b, c] = parts[..] else {
                return Err(err(n, "expected `f <a> <b> <c>`"));
            };
            let mut face = [0u32; 3];
            for (slot, tok) in face.iter_mut().zip([a, b, c]) {
                *slot = tok.parse().map_err(|_| err(n, "bad vertex index"))?;
            }
            faces.push(face);
        }
        Ok(Triangulation { vertex_count: nv, faces })
    }

    pub fn to_tri_string(&self) -> String {
        let mut s = format!("tri\nnv {}\n", self.vertex_count);
        for f in &self.faces {
            let _ = writeln!(s, "f {} {} {}", f[0], f[1], f[2]);
        }
        s
    }
}

fn check_link(v: u32, link: &[[u32; 2]]) -> Result<(), SurfaceError> {
    let broken = |reason: String| SurfaceError::NotManifold { at: format!("vertex {v}"), reason };
    if link.len() < 3 {
        return Err(broken(format!("link has {} edges, a cycle needs at least 3", link.len())));
    }
    let distinct: HashSet<&[u32; 2]> = link.iter().collect();
    if distinct.len() != link.len() {
        return Err(broken("link repeats an edge".into()));
    }
    let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
    for e in link {
        adj.entry(e[0]).or_default().push(e[1]);
        adj.entry(e[1]).or_default().push(e[0]);
    }
    if adj.values().any(|n| n.len() != 2) {
        return Err(broken("link is not a disjoint union of cycles".into()));
    }
    // Walk one cycle; it must cover every link vertex.
    let start = link[0][0];
    let (mut prev, mut cur) = (start, adj[&start][0]);
    let mut seen = 1;
    while cur != start {
        let nb = &adj[&cur];
        let next = if nb[0] == prev { nb[1] } else { nb[0] };
        (prev, cur) = (cur, next);
        seen += 1;
    }
    if seen != adj.len() {
        return Err(broken("link has more than one cycle".into()));
    }
    Ok(())
}

/// Which closed surface to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SurfaceSpec {
    Orientable { genus: u32 },
    NonOrientable { crosscaps: u32 },
}

pub const MAX_FIXTURE: u32 = 8;

pub fn tetrahedron() -> Triangulation {
    Triangulation::new(4, vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]])
}

/// The 7-vertex torus: faces {i, i+1, i+3} and {i, i+3, i+2} mod 7.
pub fn seven_vertex_torus() -> Triangulation {
    let faces = (0..7u32).flat_map(|i| [[i, (i + 1) % 7, (i + 3) % 7], [i, (i + 3) % 7, (i + 2) % 7]]).collect();
    Triangulation::new(7, faces)
}

/// The 6-vertex projective plane (antipodal quotient of the icosahedron).
pub fn six_vertex_projective_plane() -> Triangulation {
    Triangulation::new(
        6,
        vec![
            [0, 1, 2],
            [0, 2, 3],
            [0, 3, 4],
            [0, 4, 5],
            [0, 5, 1],
            [1, 2, 4],
            [2, 3, 5],
            [3, 4, 1],
            [4, 5, 2],
            [5, 1, 3],
        ],
    )
}

/// Connected sum: delete the last face of `a` and the first face of `b`,
/// then identify the two boundary triangles.
pub fn connected_sum(a: &Triangulation, b: &Triangulation) -> Triangulation {
    let mut faces = a.faces.clone();
    let hole_a = faces.pop().expect("nonempty triangulation");
    let hole_b = b.faces[0];
    let mut next = a.vertex_count;
    let mut map = vec![u32::MAX; b.vertex_count as usize];
    for k in 0..3 {
        map[hole_b[k] as usize] = hole_a[k];
    }
    for slot in map.iter_mut().filter(|s| **s == u32::MAX) {
        *slot = next;
        next += 1;
    }
    faces.extend(b.faces[1..].iter().map(|f| [map[f[0] as usize], map[f[1] as usize], map[f[2] as usize]]));
    Triangulation::new(next, faces)
}

/// Fixture surfaces: `g` tori or `k` projective planes summed together.
pub fn generate_surface(spec: SurfaceSpec) -> Result<Triangulation, SurfaceError> {
    let (piece, count) = match spec {
        SurfaceSpec::Orientable { genus } if genus <= MAX_FIXTURE => {
            if genus == 0 {
                return Ok(tetrahedron());
            }
            (seven_vertex_torus(), genus)
        }
        SurfaceSpec::NonOrientable { crosscaps } if (1..=MAX_FIXTURE).contains(&crosscaps) => {
            (six_vertex_projective_plane(), crosscaps)
        }
        SurfaceSpec::Orientable { genus } => return Err(SurfaceError::Range(format!("genus {genus}"))),
        SurfaceSpec::NonOrientable { crosscaps } => {
            return Err(SurfaceError::Range(format!("crosscap count {crosscaps}")))
        }
    };
    let mut t = piece.clone();
    for _ in 1..count {
        t = connected_sum(&t, &piece);
    }
    Ok(t)
}

/// The intermediate quantities of Poincaré's counting argument.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Poincare1885Report {
    pub sigma0: u64,
    pub sigma1: u64,
    pub sigma2: u64,
    /// Σ over vertices of (2 − ν).
    pub vertex_excess: i64,
    /// 2σ₀ − 3σ₂.
    pub two_sigma0_minus_three_sigma2: i64,
    pub vertex_excess_holds: bool,
    pub three_sigma2: u64,
    pub two_sigma1: u64,
    pub descartes_euler_holds: bool,
    /// σ₂ + (2σ₀ − 3σ₂)/2: the per-triangle index sum.
    pub total_index: HalfIndex,
    pub chi: i64,
    pub total_equals_chi: bool,
    pub passed: bool,
}

pub fn poincare_1885_check(t: &Triangulation) -> Result<Poincare1885Report, SurfaceError> {
    let r = t.validate()?;
    let vertex_excess: i64 = r.degrees.iter().map(|&nu| 2 - nu as i64).sum();
    let two_s0_minus_three_s2 = 2 * r.sigma0 as i64 - 3 * r.sigma2 as i64;
    // Each triangle contributes 1 + (I − E)/2; Σ(I − E) is the vertex excess.
    let total_index = HalfIndex::from_int(r.sigma2 as i64) + HalfIndex::from_doubled(vertex_excess);
    let vertex_excess_holds = vertex_excess == two_s0_minus_three_s2;
    let descartes_euler_holds = 3 * r.sigma2 == 2 * r.sigma1;
    let total_equals_chi = total_index == HalfIndex::from_int(r.chi);
    Ok(Poincare1885Report {
        sigma0: r.sigma0,
        sigma1: r.sigma1,
        sigma2: r.sigma2,
        vertex_excess,
        two_sigma0_minus_three_sigma2: two_s0_minus_three_s2,
        vertex_excess_holds,
        three_sigma2: 3 * r.sigma2,
        two_sigma1: 2 * r.sigma1,
        descartes_euler_holds,
        total_index,
        chi: r.chi,
        total_equals_chi,
        passed: vertex_excess_holds && descartes_euler_holds && total_equals_chi,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CellKind {
    Vertex,
    EdgeMidpoint,
    FaceBarycenter,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SingularClass {
    pub at: CellKind,
    pub index: HalfIndex,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscretePhReport {
    pub singularities: Vec<SingularClass>,
    pub total_index: HalfIndex,
    pub chi: i64,
    pub passed: bool,
}

/// Barycentric pattern: a source at every vertex (+1), a saddle at every
/// edge midpoint (−1), a sink at every face barycenter (+1).
pub fn discrete_ph_sum(t: &Triangulation) -> Result<DiscretePhReport, SurfaceError> {
    let r = t.validate()?;
    let singularities = vec![
        SingularClass { at: CellKind::Vertex, index: HalfIndex::from_int(1), count: r.sigma0 },
        SingularClass { at: CellKind::EdgeMidpoint, index: HalfIndex::from_int(-1), count: r.sigma1 },
        SingularClass { at: CellKind::FaceBarycenter, index: HalfIndex::from_int(1), count: r.sigma2 },
    ];
    let total_index: HalfIndex =
        singularities.iter().map(|s| HalfIndex::from_doubled(s.index.doubled() * s.count as i64)).sum();
    Ok(DiscretePhReport { passed: total_index == HalfIndex::from_int(r.chi), chi: r.chi, total_index, singularities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tetrahedron_report() {
        let r = tetrahedron().validate().unwrap();
        assert_eq!((r.sigma0, r.sigma1, r.sigma2, r.chi), (4, 6, 4, 2));
        assert!(r.orientable);
    }

    #[test]
    fn torus_report() {
        let r = seven_vertex_torus().validate().unwrap();
        assert_eq!((r.sigma0, r.sigma1, r.sigma2, r.chi), (7, 21, 14, 0));
        assert!(r.orientable);
        assert!(r.degrees.iter().all(|&d| d == 6));
    }

    #[test]
    fn projective_plane_report() {
        let r = six_vertex_projective_plane().validate().unwrap();
        assert_eq!((r.sigma0, r.sigma1, r.sigma2, r.chi), (6, 15, 10, 1));
        assert!(!r.orientable);
    }

    #[test]
    fn doubled_face_is_not_manifold() {
        let t = Triangulation::new(3, vec![[0, 1, 2], [0, 2, 1]]);
        assert!(matches!(t.validate(), Err(SurfaceError::NotManifold { .. })));
    }

    #[test]
    fn validation_failures() {
        let open = Triangulation::new(4, vec![[0, 1, 2], [0, 2, 3], [0, 3, 1]]);
        assert!(matches!(open.validate(), Err(SurfaceError::NotClosed { .. })));
        let degenerate = Triangulation::new(3, vec![[0, 0, 1]]);
        assert!(matches!(degenerate.validate(), Err(SurfaceError::DegenerateFace { face: 0, .. })));
        let oob = Triangulation::new(3, vec![[0, 1, 5]]);
        assert!(matches!(oob.validate(), Err(SurfaceError::VertexOutOfRange { vertex: 5, .. })));
        // Isolated vertex.
        let mut t = tetrahedron();
        t.vertex_count = 5;
        assert!(matches!(t.validate(), Err(SurfaceError::NotManifold { .. })));
        // Two tetrahedra sharing a vertex: pinched link.
        let mut faces = tetrahedron().faces;
        faces.extend(tetrahedron().faces.iter().map(|f| f.map(|v| if v == 0 { 0 } else { v + 3 })));
        let pinched = Triangulation::new(7, faces);
        assert!(matches!(pinched.validate(), Err(SurfaceError::NotManifold { .. })));
        // Three faces on one edge.
        let fan = Triangulation::new(5, vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]]);
        assert!(matches!(fan.validate(), Err(SurfaceError::NotManifold { .. })));
    }

    #[test]
    fn generator_examples() {
        let g0 = generate_surface(SurfaceSpec::Orientable { genus: 0 }).unwrap();
        assert_eq!(g0, tetrahedron());
        let g2 = generate_surface(SurfaceSpec::Orientable { genus: 2 }).unwrap().validate().unwrap();
        assert_eq!(g2.chi, -2);
        let k1 = generate_surface(SurfaceSpec::NonOrientable { crosscaps: 1 }).unwrap().validate().unwrap();
        assert_eq!((k1.sigma0, k1.sigma1, k1.sigma2, k1.chi), (6, 15, 10, 1));
        assert!(generate_surface(SurfaceSpec::Orientable { genus: 9 }).is_err());
        assert!(generate_surface(SurfaceSpec::NonOrientable { crosscaps: 0 }).is_err());
        assert!(generate_surface(SurfaceSpec::NonOrientable { crosscaps: 9 }).is_err());
    }

    #[test]
    fn poincare_examples() {
        let r = poincare_1885_check(&tetrahedron()).unwrap();
        assert_eq!(r.vertex_excess, -4);
        assert_eq!(r.two_sigma0_minus_three_sigma2, -4);
        assert_eq!(r.total_index, HalfIndex::from_int(2));
        assert!(r.passed);

        let r = poincare_1885_check(&seven_vertex_torus()).unwrap();
        assert_eq!(r.vertex_excess, -28);
        assert_eq!(r.total_index, HalfIndex::ZERO);
        assert!(r.passed);

        let g2 = generate_surface(SurfaceSpec::Orientable { genus: 2 }).unwrap();
        assert_eq!(poincare_1885_check(&g2).unwrap().total_index, HalfIndex::from_int(-2));
    }

    #[test]
    fn discrete_examples() {
        assert_eq!(discrete_ph_sum(&tetrahedron()).unwrap().total_index, HalfIndex::from_int(2));
        assert_eq!(discrete_ph_sum(&seven_vertex_torus()).unwrap().total_index, HalfIndex::ZERO);
        let rp2 = discrete_ph_sum(&six_vertex_projective_plane()).unwrap();
        assert_eq!(rp2.total_index, HalfIndex::from_int(1));
        assert!(rp2.passed);
    }

    #[test]
    fn all_fixtures_and_orientability() {
        for g in 0..=MAX_FIXTURE {
            let t = generate_surface(SurfaceSpec::Orientable { genus: g }).unwrap();
            let r = t.validate().unwrap();
            assert_eq!(r.chi, 2 - 2 * g as i64);
            assert!(r.orientable);
            assert_eq!(r.components, 1);
            assert!(poincare_1885_check(&t).unwrap().passed);
        }
        for k in 1..=MAX_FIXTURE {
            let t = generate_surface(SurfaceSpec::NonOrientable { crosscaps: k }).unwrap();
            let r = t.validate().unwrap();
            assert_eq!(r.chi, 2 - k as i64);
            assert!(!r.orientable);
            assert!(discrete_ph_sum(&t).unwrap().passed);
        }
    }

    #[test]
    fn relabeling_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in [SurfaceSpec::Orientable { genus: 3 }, SurfaceSpec::NonOrientable { crosscaps: 4 }] {
            let t = generate_surface(spec).unwrap();
            let base = t.validate().unwrap();
            let base_p = poincare_1885_check(&t).unwrap();
            for _ in 0..10 {
                let mut perm: Vec<u32> = (0..t.vertex_count).collect();
                perm.shuffle(&mut rng);
                let u = t.relabel(&perm);
                let r = u.validate().unwrap();
                assert_eq!(
                    (r.sigma0, r.sigma1, r.sigma2, r.chi, r.orientable),
                    (base.sigma0, base.sigma1, base.sigma2, base.chi, base.orientable)
                );
                let mut d1 = base.degrees.clone();
                let mut d2 = r.degrees.clone();
                d1.sort();
                d2.sort();
                assert_eq!(d1, d2);
                assert_eq!(poincare_1885_check(&u).unwrap(), base_p);
            }
        }
    }

    #[test]
    fn tri_format() {
        let t = seven_vertex_torus();
        assert_eq!(Triangulation::parse(&t.to_tri_string()).unwrap(), t);
        let with_comments = "# a tetrahedron\ntri\n\nnv 4\nf 0 2 1\nf 0 1 3 # side\nf 1 2 3\nf 0 3 2\n";
        assert_eq!(Triangulation::parse(with_comments).unwrap(), tetrahedron());
        let oob = Triangulation::parse("tri\nnv 3\nf 0 1 3\n").unwrap();
        assert!(matches!(oob.validate(), Err(SurfaceError::VertexOutOfRange { vertex: 3, .. })));
        assert!(matches!(Triangulation::parse("mesh\n"), Err(SurfaceError::Parse { line: 1, .. })));
        assert!(matches!(Triangulation::parse("tri\nnv x\n"), Err(SurfaceError::Parse { line: 2, .. })));
        assert!(matches!(Triangulation::parse("tri\nnv 3\nf 0 1\n"), Err(SurfaceError::Parse { .. })));
    }
}
