//! Stable reduction trees of finite sets of points on the projective line,
//! their configurations and the combinatorial position checks.
//!
//! The tree of a set `S` has one vertex per closed disk holding at least
//! two points of `S` (with the outer direction handled by contraction when
//! no point sits at infinity). Points of `S` become marked points; edge
//! sizes are valuation gaps between nested disks.

use crate::error::{Error, Result};
use crate::padic::{Field, FieldElement, Residue, ResidueField};
use crate::projline::ProjPoint;
use num_rational::Rational64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

/// A point of the reduced line `P^1(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResPoint {
    Finite(Residue),
    Infinity,
}

impl fmt::Display for ResPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResPoint::Finite(r) => write!(f, "{r}"),
            ResPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// The involution of `P^1(k)` fixing `p1` and `p2`.
pub fn residue_involution(rf: &ResidueField, p1: ResPoint, p2: ResPoint, z: ResPoint) -> ResPoint {
    let two = rf.from_i64(2);
    match (p1, p2) {
        (ResPoint::Finite(a), ResPoint::Infinity) | (ResPoint::Infinity, ResPoint::Finite(a)) => match z {
            ResPoint::Infinity => ResPoint::Infinity,
            ResPoint::Finite(x) => ResPoint::Finite(rf.sub(rf.mul(two, a), x)),
        },
        (ResPoint::Finite(a), ResPoint::Finite(b)) => {
            let s = rf.add(a, b);
            match z {
                ResPoint::Infinity => ResPoint::Finite(rf.div(s, two).expect("p odd")),
                ResPoint::Finite(x) => {
                    let num = rf.sub(rf.mul(s, x), rf.mul(two, rf.mul(a, b)));
                    let den = rf.sub(rf.mul(two, x), s);
                    match rf.div(num, den) {
                        Some(q) => ResPoint::Finite(q),
                        None => ResPoint::Infinity,
                    }
                }
            }
        }
        _ => z,
    }
}

// ---------------------------------------------------------------------------
// combinatorial skeleton

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexType {
    /// no marked point, at least three edges, at most two odd edges
    A,
    /// one marked point, at least two edges, exactly one odd edge
    B,
    /// two marked points, all edges even
    C,
}

/// Tree shape with labelled marked points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skeleton {
    pub marks: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
    pub num_labels: usize,
}

impl Skeleton {
    /// Build from per-vertex mark counts, assigning labels in vertex order.
    pub fn from_counts(counts: &[usize], edges: &[(usize, usize)]) -> Skeleton {
        let mut next = 0;
        let marks = counts
            .iter()
            .map(|&c| {
                let v: Vec<usize> = (next..next + c).collect();
                next += c;
                v
            })
            .collect();
        Skeleton { marks, edges: edges.to_vec(), num_labels: next }
    }

    pub fn num_vertices(&self) -> usize {
        self.marks.len()
    }

    pub fn neighbors(&self, v: usize) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(i, &(a, b))| {
                if a == v {
                    Some((i, b))
                } else if b == v {
                    Some((i, a))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    pub fn label_vertex(&self, label: usize) -> Option<usize> {
        self.marks.iter().position(|m| m.contains(&label))
    }

    /// Vertices reachable from `start` without crossing edge `skip`.
    fn component(&self, start: usize, skip: usize) -> Vec<usize> {
        let mut seen = vec![false; self.num_vertices()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut out = vec![];
        while let Some(v) = queue.pop_front() {
            out.push(v);
            for (e, w) in self.neighbors(v) {
                if e != skip && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        out
    }

    /// Labels on the side of edge `e` containing vertex `toward`.
    pub fn side_labels(&self, e: usize, toward: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.component(toward, e).iter().flat_map(|&v| self.marks[v].clone()).collect();
        out.sort();
        out
    }

    pub fn edge_is_even(&self, e: usize) -> bool {
        self.side_labels(e, self.edges[e].0).len() % 2 == 0
    }

    pub fn vertex_is_even(&self, v: usize) -> bool {
        self.marks[v].is_empty() && self.neighbors(v).iter().all(|&(e, _)| self.edge_is_even(e))
    }

    /// Number of odd directions at `v`: marked points plus odd edges.
    pub fn odd_directions(&self, v: usize) -> usize {
        self.marks[v].len() + self.neighbors(v).iter().filter(|&&(e, _)| !self.edge_is_even(e)).count()
    }

    pub fn vertex_type(&self, v: usize) -> Option<VertexType> {
        let nb = self.neighbors(v);
        let odd = nb.iter().filter(|&&(e, _)| !self.edge_is_even(e)).count();
        match self.marks[v].len() {
            0 if nb.len() >= 3 && odd <= 2 => Some(VertexType::A),
            1 if nb.len() >= 2 && odd == 1 => Some(VertexType::B),
            2 if !nb.is_empty() && odd == 0 => Some(VertexType::C),
            _ => None,
        }
    }

    pub fn vertex_types(&self) -> Result<Vec<VertexType>> {
        (0..self.num_vertices())
            .map(|v| {
                self.vertex_type(v).ok_or_else(|| {
                    Error::NotWhittaker(format!(
                        "vertex {v} with {} marked points and {} edges fits no vertex type",
                        self.marks[v].len(),
                        self.degree(v)
                    ))
                })
            })
            .collect()
    }

    /// Every vertex has at most two odd directions.
    pub fn is_potential_mumford(&self) -> bool {
        (0..self.num_vertices()).all(|v| self.odd_directions(v) <= 2)
    }

    /// Pairs determined by the tree: marked points sharing a type C vertex,
    /// and type B vertices joined through type A vertices along odd edges.
    pub fn canonical_pairing(&self) -> Result<Vec<(usize, usize)>> {
        let types = self.vertex_types()?;
        let mut pairs = Vec::new();
        let mut used = vec![false; self.num_vertices()];
        for v in 0..self.num_vertices() {
            match types[v] {
                VertexType::C => pairs.push((self.marks[v][0], self.marks[v][1])),
                VertexType::B if !used[v] => {
                    let partner = self.walk_odd(v, &types)?;
                    used[v] = true;
                    used[partner] = true;
                    pairs.push((self.marks[v][0], self.marks[partner][0]));
                }
                _ => {}
            }
        }
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.sort();
        Ok(pairs)
    }

    fn walk_odd(&self, start: usize, types: &[VertexType]) -> Result<usize> {
        let mut prev_edge = usize::MAX;
        let mut v = start;
        loop {
            let next = self
                .neighbors(v)
                .into_iter()
                .find(|&(e, _)| e != prev_edge && !self.edge_is_even(e))
                .ok_or_else(|| Error::NotWhittaker(format!("odd path from vertex {start} ends at vertex {v}")))?;
            prev_edge = next.0;
            v = next.1;
            match types[v] {
                VertexType::B => return Ok(v),
                VertexType::A => continue,
                VertexType::C => {
                    return Err(Error::NotWhittaker(format!("odd path from vertex {start} meets a paired vertex")))
                }
            }
        }
    }

    /// Every pair sits alone at a leaf of type C.
    pub fn closed_disk(&self, pairs: &[(usize, usize)]) -> bool {
        pairs.iter().all(|&(a, b)| match (self.label_vertex(a), self.label_vertex(b)) {
            (Some(u), Some(w)) => u == w && self.marks[u].len() == 2 && self.degree(u) == 1,
            _ => false,
        })
    }

    fn rooted_code(&self, v: usize, parent: usize, with_labels: bool, sizes: Option<&[Rational64]>) -> String {
        let mut kids: Vec<String> = self
            .neighbors(v)
            .into_iter()
            .filter(|&(_, w)| w != parent)
            .map(|(e, w)| {
                let code = self.rooted_code(w, v, with_labels, sizes);
                match sizes {
                    Some(s) => format!("{}:{}", s[e], code),
                    None => code,
                }
            })
            .collect();
        kids.sort();
        let head = if with_labels {
            let mut m = self.marks[v].clone();
            m.sort();
            m.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
        } else {
            self.marks[v].len().to_string()
        };
        format!("[{head}{}]", kids.concat())
    }

    fn canonical_code(&self, with_labels: bool, sizes: Option<&[Rational64]>) -> String {
        (0..self.num_vertices())
            .map(|r| self.rooted_code(r, usize::MAX, with_labels, sizes))
            .min()
            .unwrap_or_default()
    }

    /// Canonical encoding of the shape with mark counts (label-free).
    pub fn signature(&self) -> String {
        self.canonical_code(false, None)
    }

    /// Canonical encoding including labels.
    pub fn labeled_signature(&self) -> String {
        self.canonical_code(true, None)
    }

    pub fn genus(&self) -> Option<usize> {
        (self.num_labels >= 2 && self.num_labels % 2 == 0).then(|| self.num_labels / 2 - 1)
    }

    pub fn doubled_graph(&self) -> DoubledGraph {
        DoubledGraph::new(self)
    }

    /// Relabel so that the given pairs become `(0,1), (2,3), ...`.
    pub fn relabeled(&self, pairs: &[(usize, usize)]) -> Skeleton {
        let mut map = vec![0; self.num_labels];
        for (i, &(a, b)) in pairs.iter().enumerate() {
            map[a] = 2 * i;
            map[b] = 2 * i + 1;
        }
        Skeleton {
            marks: self.marks.iter().map(|m| m.iter().map(|&l| map[l]).collect()).collect(),
            edges: self.edges.clone(),
            num_labels: self.num_labels,
        }
    }
}

// ---------------------------------------------------------------------------
// metric trees built from points

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    Edge(usize),
    Label(usize),
}

#[derive(Debug, Clone)]
pub struct TreeVertex {
    /// valuation radius of the disk
    pub depth: Rational64,
    /// canonical center (digits below the depth)
    pub center: FieldElement,
    /// residues of all special directions on this component
    pub directions: Vec<(Direction, ResPoint)>,
}

#[derive(Debug, Clone)]
pub struct ReductionTree {
    field: Field,
    pub skeleton: Skeleton,
    pub vertices: Vec<TreeVertex>,
    /// edge sizes (valuations), aligned with `skeleton.edges`
    pub sizes: Vec<Rational64>,
}

struct RawVertex {
    depth: i64,
    center: FieldElement,
    parent: Option<(usize, i64, ResPoint)>,
    marks: Vec<(usize, ResPoint)>,
}

impl ReductionTree {
    /// Tree of the given points; labels are the point indices.
    pub fn build(points: &[ProjPoint]) -> Result<ReductionTree> {
        if points.len() < 3 {
            return Err(Error::Domain("need at least three points".into()));
        }
        let field = ProjPoint::field_of(points).ok_or_else(|| Error::Domain("no finite point".into()))?;
        let infs: Vec<usize> = points.iter().enumerate().filter(|(_, p)| p.is_infinity()).map(|(i, _)| i).collect();
        if infs.len() > 1 {
            return Err(Error::Domain("infinity listed more than once".into()));
        }
        let finite: Vec<usize> = (0..points.len()).filter(|i| !infs.contains(i)).collect();
        let xs: Vec<Option<FieldElement>> = points.iter().map(|p| p.as_finite().copied()).collect();
        let mut raw = Vec::new();
        Self::cluster(&finite, &xs, None, &mut raw)?;
        if let Some(&i) = infs.first() {
            raw[0].marks.push((i, ResPoint::Infinity));
        }
        let mut tree = Self::assemble(field, raw);
        if infs.is_empty() {
            tree.contract_root();
        }
        Ok(tree)
    }

    fn cluster(
        idx: &[usize],
        xs: &[Option<FieldElement>],
        parent: Option<(usize, i64, ResPoint)>,
        raw: &mut Vec<RawVertex>,
    ) -> Result<usize> {
        let x0 = xs[idx[0]].unwrap();
        let mut depth = i64::MAX;
        for &i in &idx[1..] {
            let d = xs[i].unwrap().sub(&x0);
            let v = d.val_pi().ok_or_else(|| Error::Precision(format!("points {} and {} coincide", idx[0], i)))?;
            depth = depth.min(v);
        }
        let center = x0.truncate_below(depth);
        let residue = |x: &FieldElement| -> ResPoint {
            let r = x.sub(&center).shift(-depth).reduce().expect("point lies in its disk");
            ResPoint::Finite(r)
        };
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &i in idx {
            let xi = xs[i].unwrap();
            match groups.iter_mut().find(|g| xi.sub(&xs[g[0]].unwrap()).val_pi().map_or(true, |v| v > depth)) {
                Some(g) => g.push(i),
                None => groups.push(vec![i]),
            }
        }
        let me = raw.len();
        raw.push(RawVertex { depth, center, parent, marks: vec![] });
        for g in groups {
            let r = residue(&xs[g[0]].unwrap());
            if g.len() == 1 {
                raw[me].marks.push((g[0], r));
            } else {
                Self::cluster(&g, xs, Some((me, depth, r)), raw)?;
            }
        }
        Ok(me)
    }

    fn assemble(field: Field, raw: Vec<RawVertex>) -> ReductionTree {
        let n = raw.len();
        let mut marks = vec![vec![]; n];
        let mut dirs: Vec<Vec<(Direction, ResPoint)>> = vec![vec![]; n];
        let mut edges = vec![];
        let mut sizes = vec![];
        for (v, rv) in raw.iter().enumerate() {
            for &(l, r) in &rv.marks {
                marks[v].push(l);
                dirs[v].push((Direction::Label(l), r));
            }
            if let Some((p, pdepth, r)) = rv.parent {
                let e = edges.len();
                edges.push((p, v));
                sizes.push(field.to_val(rv.depth - pdepth));
                dirs[p].push((Direction::Edge(e), r));
                dirs[v].push((Direction::Edge(e), ResPoint::Infinity));
            }
        }
        let num_labels = marks.iter().map(|m| m.len()).sum();
        let vertices = raw
            .iter()
            .zip(dirs)
            .map(|(rv, d)| TreeVertex { depth: field.to_val(rv.depth), center: rv.center, directions: d })
            .collect();
        ReductionTree { field, skeleton: Skeleton { marks, edges, num_labels }, vertices, sizes }
    }

    /// Remove a root with only two special directions.
    fn contract_root(&mut self) {
        if self.vertices[0].directions.len() != 2 {
            return;
        }
        let dirs = self.vertices[0].directions.clone();
        let mut new_edges: Vec<(usize, usize)> = vec![];
        let mut new_sizes = vec![];
        let mut edge_map = vec![usize::MAX; self.skeleton.edges.len()];
        for (e, &(a, b)) in self.skeleton.edges.iter().enumerate() {
            if a != 0 && b != 0 {
                edge_map[e] = new_edges.len();
                new_edges.push((a - 1, b - 1));
                new_sizes.push(self.sizes[e]);
            }
        }
        let mut marks: Vec<Vec<usize>> = self.skeleton.marks[1..].to_vec();
        let mut verts: Vec<TreeVertex> = self.vertices[1..].to_vec();
        for v in verts.iter_mut() {
            for d in v.directions.iter_mut() {
                if let Direction::Edge(e) = d.0 {
                    if edge_map[e] != usize::MAX {
                        d.0 = Direction::Edge(edge_map[e]);
                    }
                }
            }
        }
        let child_of = |e: usize| if self.skeleton.edges[e].0 == 0 { self.skeleton.edges[e].1 } else { self.skeleton.edges[e].0 };
        match (dirs[0].0, dirs[1].0) {
            (Direction::Edge(e1), Direction::Edge(e2)) => {
                let (c1, c2) = (child_of(e1) - 1, child_of(e2) - 1);
                let ne = new_edges.len();
                new_edges.push((c1, c2));
                new_sizes.push(self.sizes[e1] + self.sizes[e2]);
                for (c, old) in [(c1, e1), (c2, e2)] {
                    for d in verts[c].directions.iter_mut() {
                        if d.0 == Direction::Edge(old) {
                            d.0 = Direction::Edge(ne);
                        }
                    }
                }
            }
            (Direction::Label(l), Direction::Edge(e)) | (Direction::Edge(e), Direction::Label(l)) => {
                let c = child_of(e) - 1;
                for d in verts[c].directions.iter_mut() {
                    if d.0 == Direction::Edge(e) {
                        d.0 = Direction::Label(l);
                    }
                }
                marks[c].push(l);
            }
            _ => unreachable!("a root with two marks holds every point"),
        }
        self.skeleton = Skeleton { marks, edges: new_edges, num_labels: self.skeleton.num_labels };
        self.vertices = verts;
        self.sizes = new_sizes;
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Smallest edge size (the largest double point).
    pub fn min_edge_size(&self) -> Option<Rational64> {
        self.sizes.iter().copied().min()
    }

    pub fn residue_of(&self, v: usize, dir: Direction) -> Option<ResPoint> {
        self.vertices[v].directions.iter().find(|d| d.0 == dir).map(|d| d.1)
    }

    /// Image of marked point `label` on the component of vertex `v`.
    pub fn projection(&self, v: usize, label: usize) -> ResPoint {
        if let Some(r) = self.residue_of(v, Direction::Label(label)) {
            return r;
        }
        let target = self.skeleton.label_vertex(label).expect("label present");
        for (e, w) in self.skeleton.neighbors(v) {
            if self.skeleton.component(w, e).contains(&target) {
                return self.residue_of(v, Direction::Edge(e)).expect("edge direction");
            }
        }
        unreachable!("tree is connected")
    }

    /// Residue points of odd multiplicity for the projected marked points.
    pub fn odd_points(&self, v: usize) -> Vec<ResPoint> {
        let mut mult: BTreeMap<ResPoint, usize> = BTreeMap::new();
        for l in 0..self.skeleton.num_labels {
            *mult.entry(self.projection(v, l)).or_default() += 1;
        }
        mult.into_iter().filter(|(_, m)| m % 2 == 1).map(|(p, _)| p).collect()
    }

    fn node_residues(&self, v: usize) -> Vec<ResPoint> {
        self.vertices[v]
            .directions
            .iter()
            .filter(|d| matches!(d.0, Direction::Edge(_)))
            .map(|d| d.1)
            .collect()
    }

    /// Each component separates at most one pair.
    pub fn separates_one_pair(&self, pairs: &[(usize, usize)]) -> bool {
        (0..self.num_vertices()).all(|v| {
            let odd = self.odd_points(v);
            if odd.is_empty() {
                return true;
            }
            if odd.len() != 2 {
                return false;
            }
            pairs.iter().any(|&(a, b)| {
                let (x, y) = (self.projection(v, a), self.projection(v, b));
                (x == odd[0] && y == odd[1]) || (x == odd[1] && y == odd[0])
            })
        })
    }

    /// On every odd component the residue involution fixing the two odd
    /// points moves no node onto another node.
    pub fn restricted_check(&self) -> bool {
        self.restricted_failures().is_empty()
    }

    /// Vertices where the restricted condition fails.
    pub fn restricted_failures(&self) -> Vec<usize> {
        let rf = self.field.residue_field();
        (0..self.num_vertices())
            .filter(|&v| {
                if self.skeleton.vertex_is_even(v) {
                    return false;
                }
                let odd = self.odd_points(v);
                if odd.len() != 2 {
                    return true;
                }
                let nodes: BTreeSet<ResPoint> =
                    self.node_residues(v).into_iter().filter(|n| !odd.contains(n)).collect();
                nodes.iter().any(|&n| nodes.contains(&residue_involution(&rf, odd[0], odd[1], n)))
            })
            .collect()
    }

    /// Residues on component `v` which a generic point must avoid.
    pub fn exceptional_residues(&self, v: usize) -> BTreeSet<ResPoint> {
        let mut out: BTreeSet<ResPoint> = self.vertices[v].directions.iter().map(|d| d.1).collect();
        if !self.skeleton.vertex_is_even(v) {
            let odd = self.odd_points(v);
            if odd.len() == 2 {
                let rf = self.field.residue_field();
                for n in self.node_residues(v) {
                    out.insert(residue_involution(&rf, odd[0], odd[1], n));
                }
            }
        }
        out
    }

    /// The outermost disk, when infinity is not a special direction.
    pub fn top_vertex(&self) -> Option<usize> {
        (0..self.num_vertices()).find(|&v| !self.vertices[v].directions.iter().any(|d| d.1 == ResPoint::Infinity))
    }

    /// Whether infinity reduces to a generic point of some component.
    pub fn infinity_is_generic(&self) -> bool {
        self.top_vertex().map_or(false, |v| !self.exceptional_residues(v).contains(&ResPoint::Infinity))
    }

    /// Component and residue to which `z` reduces; `None` when `z` lies in
    /// an annulus between components.
    pub fn locate(&self, z: &ProjPoint) -> Option<(usize, ResPoint)> {
        let outside = || self.top_vertex().map(|v| (v, ResPoint::Infinity));
        let ProjPoint::Finite(x) = z else { return outside() };
        let inside = |v: &TreeVertex| {
            let k = self.field.to_pi_units(v.depth).expect("depth in value group");
            x.sub(&v.center).val_lower_pi() >= k
        };
        let deepest = (0..self.num_vertices())
            .filter(|&v| inside(&self.vertices[v]))
            .max_by(|&a, &b| self.vertices[a].depth.cmp(&self.vertices[b].depth));
        let Some(v) = deepest else { return outside() };
        let vert = &self.vertices[v];
        let k = self.field.to_pi_units(vert.depth).expect("depth in value group");
        let r = x.sub(&vert.center).shift(-k).reduce()?;
        Some((v, ResPoint::Finite(r)))
    }

    /// Whether `z` reduces to a generic point of some component, so that
    /// it lies in the region where truncation errors are certified.
    pub fn is_generic(&self, z: &ProjPoint) -> bool {
        self.locate(z).is_some_and(|(v, r)| !self.exceptional_residues(v).contains(&r))
    }

    /// Random points whose reductions are generic points of the components.
    /// Such points lie in the standard fundamental domain when the marked
    /// points are the fixed points of a Schottky group in good position.
    pub fn generic_points<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<ProjPoint>> {
        let rf = self.field.residue_field();
        let mut choices = vec![];
        for v in 0..self.num_vertices() {
            let bad = self.exceptional_residues(v);
            for r in rf.elements() {
                if !bad.contains(&ResPoint::Finite(r)) {
                    choices.push((v, r));
                }
            }
        }
        if choices.is_empty() {
            return Err(Error::Domain("no generic residue available; enlarge the residue field".into()));
        }
        let mut out = vec![];
        for _ in 0..count {
            let (v, r) = choices[rng.gen_range(0..choices.len())];
            let vert = &self.vertices[v];
            let k = self.field.to_pi_units(vert.depth).expect("depth in value group");
            let noise = self.field.random_unit(rng).shift(1);
            let local = self.field.lift_residue(r).add(&noise);
            out.push(ProjPoint::Finite(vert.center.add(&local.shift(k))));
        }
        Ok(out)
    }

    pub fn signature(&self) -> String {
        self.skeleton.signature()
    }

    /// Canonical encoding with labels and edge sizes.
    pub fn metric_signature(&self) -> String {
        self.skeleton.canonical_code(true, Some(&self.sizes))
    }

    pub fn report(&self) -> TreeReport {
        TreeReport {
            signature: self.signature(),
            vertices: self
                .vertices
                .iter()
                .enumerate()
                .map(|(v, tv)| VertexReport {
                    id: v,
                    depth: fmt_rational(tv.depth),
                    marked: self.skeleton.marks[v].clone(),
                    residues: tv
                        .directions
                        .iter()
                        .map(|(d, r)| {
                            let key = match d {
                                Direction::Edge(e) => format!("edge{e}"),
                                Direction::Label(l) => format!("label{l}"),
                            };
                            (key, r.to_string())
                        })
                        .collect(),
                })
                .collect(),
            edges: self
                .skeleton
                .edges
                .iter()
                .zip(&self.sizes)
                .map(|(&(a, b), s)| EdgeReport { ends: (a, b), size: fmt_rational(*s), even: false })
                .enumerate()
                .map(|(e, mut r)| {
                    r.even = self.skeleton.edge_is_even(e);
                    r
                })
                .collect(),
        }
    }
}

pub fn fmt_rational(v: Rational64) -> String {
    if v.is_integer() {
        v.to_integer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct TreeReport {
    pub signature: String,
    pub vertices: Vec<VertexReport>,
    pub edges: Vec<EdgeReport>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct VertexReport {
    pub id: usize,
    pub depth: String,
    pub marked: Vec<usize>,
    pub residues: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct EdgeReport {
    pub ends: (usize, usize),
    pub size: String,
    pub even: bool,
}

// ---------------------------------------------------------------------------
// configurations

#[derive(Debug, Clone, Serialize)]
pub struct Configuration {
    pub genus: usize,
    pub signature: String,
    pub vertex_types: Vec<VertexType>,
    pub even_edges: Vec<bool>,
    pub even_vertices: Vec<bool>,
    pub pairs: Vec<(usize, usize)>,
    /// whether the given pairs equal the pairing forced by the tree
    pub pairing_matches: bool,
    pub catalog_name: Option<String>,
}

/// Classify the tree of `2g+2` labelled points, pairs given by label index.
pub fn classify(skeleton: &Skeleton, pairs: &[(usize, usize)]) -> Result<Configuration> {
    let genus = skeleton
        .genus()
        .ok_or_else(|| Error::Domain(format!("{} marked points is not 2g+2", skeleton.num_labels)))?;
    if pairs.len() != genus + 1 {
        return Err(Error::Domain(format!("expected {} pairs, got {}", genus + 1, pairs.len())));
    }
    let vertex_types = skeleton.vertex_types()?;
    let canonical = skeleton.canonical_pairing()?;
    let mut given: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    given.sort();
    let signature = skeleton.signature();
    Ok(Configuration {
        genus,
        catalog_name: crate::catalog::lookup(&signature).map(|s| s.name.to_string()),
        signature,
        vertex_types,
        even_edges: (0..skeleton.edges.len()).map(|e| skeleton.edge_is_even(e)).collect(),
        even_vertices: (0..skeleton.num_vertices()).map(|v| skeleton.vertex_is_even(v)).collect(),
        pairs: pairs.to_vec(),
        pairing_matches: given == canonical,
    })
}

/// Standard pairs `(a_i, b_i) = (2i, 2i+1)` for `n` labels.
pub fn standard_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect()
}

// ---------------------------------------------------------------------------
// doubled graph

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Item {
    Vertex(usize),
    Edge(usize),
}

/// Graph obtained by doubling even vertices and even edges; the swap of
/// copies is the hyperelliptic involution on the dual graph.
#[derive(Debug, Clone)]
pub struct DoubledGraph {
    /// (original vertex, copy index)
    pub vertices: Vec<(usize, u8)>,
    /// (original edge, copy index, endpoints in `vertices`)
    pub edges: Vec<(usize, u8, (usize, usize))>,
    /// items that come in conjugate pairs
    pub paired: Vec<Item>,
    even_vertex: Vec<bool>,
    even_edge: Vec<bool>,
}

impl DoubledGraph {
    pub fn new(sk: &Skeleton) -> DoubledGraph {
        let even_vertex: Vec<bool> = (0..sk.num_vertices()).map(|v| sk.vertex_is_even(v)).collect();
        let even_edge: Vec<bool> = (0..sk.edges.len()).map(|e| sk.edge_is_even(e)).collect();
        let mut vertices = vec![];
        let mut index = vec![[usize::MAX; 2]; sk.num_vertices()];
        for v in 0..sk.num_vertices() {
            let copies = if even_vertex[v] { 2 } else { 1 };
            for c in 0..copies {
                index[v][c] = vertices.len();
                vertices.push((v, c as u8));
            }
        }
        let mut edges = vec![];
        for (e, &(a, b)) in sk.edges.iter().enumerate() {
            let copies = if even_edge[e] { 2 } else { 1 };
            for c in 0..copies {
                let end = |v: usize| if even_vertex[v] { index[v][c] } else { index[v][0] };
                edges.push((e, c as u8, (end(a), end(b))));
            }
        }
        let mut paired = vec![];
        paired.extend((0..sk.num_vertices()).filter(|&v| even_vertex[v]).map(Item::Vertex));
        paired.extend((0..sk.edges.len()).filter(|&e| even_edge[e]).map(Item::Edge));
        DoubledGraph { vertices, edges, paired, even_vertex, even_edge }
    }

    /// First Betti number of the (connected) doubled graph.
    pub fn betti(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    /// Whether choosing copy `choice[i]` of each paired item (all unpaired
    /// items included) yields a subtree mapping isomorphically to the tree.
    pub fn is_fundamental_domain(&self, choice: &[u8]) -> bool {
        let pick = |item: Item| -> u8 { self.paired.iter().position(|&x| x == item).map_or(0, |i| choice[i]) };
        let vset: Vec<usize> = (0..self.vertices.len())
            .filter(|&i| {
                let (v, c) = self.vertices[i];
                !self.even_vertex[v] || pick(Item::Vertex(v)) == c
            })
            .collect();
        let chosen_edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|&&(e, c, _)| !self.even_edge[e] || pick(Item::Edge(e)) == c)
            .map(|&(_, _, ends)| ends)
            .collect();
        if !chosen_edges.iter().all(|&(a, b)| vset.contains(&a) && vset.contains(&b)) {
            return false;
        }
        // connected with |E| = |V| - 1
        if chosen_edges.len() + 1 != vset.len() {
            return false;
        }
        let mut seen = vec![vset[0]];
        let mut queue = vec![vset[0]];
        while let Some(x) = queue.pop() {
            for &(a, b) in &chosen_edges {
                for (p, q) in [(a, b), (b, a)] {
                    if p == x && !seen.contains(&q) {
                        seen.push(q);
                        queue.push(q);
                    }
                }
            }
        }
        seen.len() == vset.len()
    }

    /// All fundamental domains, as copy choices over `paired`. Each
    /// connected block of even vertices picks a sheet, which fixes its
    /// edges; even edges between odd vertices pick freely.
    pub fn fundamental_domains(&self, sk: &Skeleton) -> Vec<Vec<u8>> {
        let nv = sk.num_vertices();
        let mut block = vec![usize::MAX; nv];
        let mut nblocks = 0;
        for v in 0..nv {
            if self.even_vertex[v] && block[v] == usize::MAX {
                let mut stack = vec![v];
                block[v] = nblocks;
                while let Some(x) = stack.pop() {
                    for (_, w) in sk.neighbors(x) {
                        if self.even_vertex[w] && block[w] == usize::MAX {
                            block[w] = nblocks;
                            stack.push(w);
                        }
                    }
                }
                nblocks += 1;
            }
        }
        let free_edges: Vec<usize> = (0..sk.edges.len())
            .filter(|&e| {
                let (a, b) = sk.edges[e];
                self.even_edge[e] && !self.even_vertex[a] && !self.even_vertex[b]
            })
            .collect();
        let bits = nblocks + free_edges.len();
        let mut out = vec![];
        for mask in 0u64..(1u64 << bits) {
            let sheet = |b: usize| ((mask >> b) & 1) as u8;
            let choice: Vec<u8> = self
                .paired
                .iter()
                .map(|item| match *item {
                    Item::Vertex(v) => sheet(block[v]),
                    Item::Edge(e) => {
                        let (a, b) = sk.edges[e];
                        if self.even_vertex[a] {
                            sheet(block[a])
                        } else if self.even_vertex[b] {
                            sheet(block[b])
                        } else {
                            sheet(nblocks + free_edges.iter().position(|&x| x == e).unwrap())
                        }
                    }
                })
                .collect();
            out.push(choice);
        }
        out
    }

    /// `d` with `2^d` fundamental domains.
    pub fn domain_exponent(&self, sk: &Skeleton) -> u32 {
        self.fundamental_domains(sk).len().trailing_zeros()
    }
}

// ---------------------------------------------------------------------------
// Van Steen's sufficient conditions

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct VanSteenReport {
    pub g1: bool,
    pub g2: bool,
    pub g3: bool,
    pub g4: bool,
}

impl VanSteenReport {
    pub fn all(&self) -> bool {
        self.g1 && self.g2 && self.g3 && self.g4
    }
}

/// Check the four disk conditions after moving `infinity` to infinity
/// (by the map fixing 0 and 1).
pub fn van_steen_check(pairs: &[(ProjPoint, ProjPoint)], infinity: &ProjPoint) -> Result<VanSteenReport> {
    use crate::projline::Mobius;
    let all: Vec<ProjPoint> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let field = ProjPoint::field_of(&all).ok_or_else(|| Error::Domain("no finite point".into()))?;
    let move_map = match infinity {
        ProjPoint::Infinity => Mobius::identity(field),
        ProjPoint::Finite(w) => {
            // z -> z (1 - w) / (z - w)
            Mobius::new(field.one().sub(w), field.zero(), field.one(), w.neg())?
        }
    };
    let mut fixed = vec![];
    for &(a, b) in pairs {
        match (move_map.apply(&a)?, move_map.apply(&b)?) {
            (ProjPoint::Finite(x), ProjPoint::Finite(y)) => fixed.push((x, y)),
            _ => return Err(Error::Domain("a fixed point sits at the chosen infinity".into())),
        }
    }
    let n = fixed.len();
    let two_inv = field.from_i64(2).inv()?;
    let mut centers = vec![];
    let mut radii = vec![];
    let mut invs = vec![];
    for &(a, b) in &fixed {
        centers.push(a.add(&b).mul(&two_inv));
        radii.push(b.sub(&a).val_pi().ok_or_else(|| Error::Precision("fixed points coincide".into()))?);
        invs.push(Mobius::involution_from_pair(&ProjPoint::Finite(a), &ProjPoint::Finite(b))?);
    }
    let vdiff = |x: &FieldElement, y: &FieldElement| x.sub(y).val_lower_pi();
    let in_boundary = |i: usize, k: usize| radii[i] > radii[k] && vdiff(&centers[i], &centers[k]) == radii[k];
    let image_disk = |k: usize, i: usize| -> Result<(FieldElement, i64)> {
        let s = &invs[k];
        let c = centers[i];
        let den = s.c.mul(&c).add(&s.d);
        let img = s.a.mul(&c).add(&s.b).checked_div(&den)?;
        let det = s.det().val_pi().unwrap_or(i64::MAX);
        let dv = den.val_pi().ok_or_else(|| Error::Precision("pole inside disk".into()))?;
        Ok((img, radii[i] + det - 2 * dv))
    };
    let mut report = VanSteenReport { g1: true, g2: true, g3: true, g4: true };
    for i in 0..n {
        for j in 0..n {
            if i != j && vdiff(&centers[i], &centers[j]) > radii[i].min(radii[j]) {
                report.g1 = false;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if i == k || !in_boundary(i, k) {
                continue;
            }
            let (img, rho) = image_disk(k, i)?;
            for j in 0..n {
                if j == k || !in_boundary(j, k) {
                    continue;
                }
                let disjoint = vdiff(&img, &centers[j]) < rho.min(radii[j]);
                if !disjoint {
                    if i == j {
                        report.g4 = false;
                    }
                    report.g2 = false;
                }
                let skj = invs[k].apply(&ProjPoint::Finite(centers[j]))?;
                let ski = invs[k].apply(&ProjPoint::Finite(centers[i]))?;
                if let (ProjPoint::Finite(skj), ProjPoint::Finite(ski)) = (skj, ski) {
                    if vdiff(&centers[i], &skj) > vdiff(&centers[i], &ski) {
                        report.g3 = false;
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::FieldSpec;

    fn q3() -> Field {
        Field::new(FieldSpec::new(3, 12)).unwrap()
    }

    fn pts(f: Field, vals: &[Option<i64>]) -> Vec<ProjPoint> {
        vals.iter()
            .map(|v| match v {
                Some(n) => ProjPoint::Finite(f.from_i64(*n)),
                None => ProjPoint::Infinity,
            })
            .collect()
    }

    #[test]
    fn sampled_points_are_generic_and_marked_points_are_not() {
        use rand::SeedableRng;
        let f = Field::new(FieldSpec::new(5, 12)).unwrap();
        let points = pts(f, &[Some(0), Some(25), Some(1), Some(39), Some(125), None]);
        let tree = ReductionTree::build(&points).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for z in tree.generic_points(20, &mut rng).unwrap() {
            assert!(tree.is_generic(&z), "{}", z.to_text());
        }
        for z in &points {
            assert!(!tree.is_generic(z), "{}", z.to_text());
        }
        // between the disks around 0 and 25
        assert!(!tree.is_generic(&ProjPoint::Finite(f.from_i64(5))));
    }

    #[test]
    fn chain_of_powers_of_three() {
        // {0, 27, 9, 3, 1, oo}
        let f = q3();
        let t = ReductionTree::build(&pts(f, &[Some(0), Some(27), Some(9), Some(3), Some(1), None])).unwrap();
        assert_eq!(t.num_vertices(), 4);
        let mut marks: Vec<Vec<usize>> = t.skeleton.marks.clone();
        for m in marks.iter_mut() {
            m.sort();
        }
        marks.sort();
        assert_eq!(marks, vec![vec![0, 1], vec![2], vec![3], vec![4, 5]]);
        assert!(t.sizes.iter().all(|s| *s == Rational64::from_integer(1)));
        let cfg = classify(&t.skeleton, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        assert!(cfg.pairing_matches);
        assert_eq!(cfg.catalog_name.as_deref(), Some("g2c"));
    }

    #[test]
    fn root_contraction_without_infinity() {
        let f = q3();
        // two clusters {0, 9} and {1, 10} plus 2: root has three directions
        let t = ReductionTree::build(&pts(f, &[Some(0), Some(9), Some(1), Some(10), Some(2), Some(5)])).unwrap();
        assert_eq!(t.signature(), ReductionTree::build(&pts(f, &[Some(0), Some(9), Some(1), Some(10), Some(2), Some(5)])).unwrap().signature());
        // {0, 3} and {1, 4} only: the root is contracted into one edge of size 2
        let t = ReductionTree::build(&pts(f, &[Some(0), Some(3), Some(1), Some(4)])).unwrap();
        assert_eq!(t.num_vertices(), 2);
        assert_eq!(t.sizes, vec![Rational64::from_integer(2)]);
    }

    #[test]
    fn genus_one_cross_pairing_does_not_separate() {
        let f = q3();
        let t = ReductionTree::build(&pts(f, &[Some(0), Some(1), Some(4), Some(3)])).unwrap();
        // a0 = 0 and b1 = 3 share a disk, as do a1 = 4 and b0 = 1
        assert!(!t.separates_one_pair(&[(0, 1), (2, 3)]));
        let cfg = classify(&t.skeleton, &[(0, 1), (2, 3)]).unwrap();
        assert!(!cfg.pairing_matches);
    }

    #[test]
    fn unmarked_leaf_rejected() {
        let sk = Skeleton::from_counts(&[2, 0, 2, 2], &[(0, 1), (1, 2), (1, 3)]);
        assert!(sk.vertex_types().is_ok());
        let bad = Skeleton::from_counts(&[4, 2], &[(0, 1)]);
        assert!(bad.vertex_types().is_err());
    }

    #[test]
    fn star_doubled_graph() {
        let sk = Skeleton::from_counts(&[0, 2, 2, 2], &[(0, 1), (0, 2), (0, 3)]);
        let dg = sk.doubled_graph();
        assert_eq!(dg.vertices.len(), 5);
        assert_eq!(dg.edges.len(), 6);
        assert_eq!(dg.betti(), 2);
        assert_eq!(dg.fundamental_domains(&sk).len(), 2);
    }

    #[test]
    fn residue_involution_swaps() {
        let rf = ResidueField { p: 5, u: None };
        let s = |z| residue_involution(&rf, ResPoint::Finite(Residue::ONE), ResPoint::Finite(rf.from_i64(4)), z);
        assert_eq!(s(ResPoint::Finite(Residue::ZERO)), ResPoint::Infinity);
        assert_eq!(s(ResPoint::Finite(rf.from_i64(2))), ResPoint::Finite(rf.from_i64(3)));
    }
}
