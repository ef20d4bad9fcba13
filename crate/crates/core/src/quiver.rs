//! Quivers with a mutable/frozen vertex partition, stored as a dense skew
//! matrix over a sorted vertex list.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, EngineError, Result};

/// Vertex label. Product quivers carry a level; frame companions carry a flag
/// and print with a trailing `'`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VertexId {
    pub node: String,
    pub level: Option<u32>,
    pub companion: bool,
}

impl VertexId {
    pub fn plain(node: impl ToString) -> VertexId {
        VertexId { node: node.to_string(), level: None, companion: false }
    }

    pub fn at(node: impl ToString, level: u32) -> VertexId {
        VertexId { node: node.to_string(), level: Some(level), companion: false }
    }

    pub fn companion(&self) -> VertexId {
        VertexId { companion: true, ..self.clone() }
    }

    pub fn base(&self) -> VertexId {
        VertexId { companion: false, ..self.clone() }
    }

    /// Integer value of the node label, if it has one.
    pub fn node_number(&self) -> Option<u32> {
        self.node.parse().ok()
    }
}

fn node_key(s: &str) -> (u8, u64, &str) {
    match s.parse::<u64>() {
        Ok(n) => (0, n, s),
        Err(_) => (1, 0, s),
    }
}

impl Ord for VertexId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.companion
            .cmp(&other.companion)
            .then_with(|| node_key(&self.node).cmp(&node_key(&other.node)))
            .then_with(|| self.level.cmp(&other.level))
    }
}

impl PartialOrd for VertexId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.level {
            Some(l) => write!(f, "v{}.{}", self.node, l)?,
            None => write!(f, "{}", self.node)?,
        }
        if self.companion {
            write!(f, "'")?;
        }
        Ok(())
    }
}

impl FromStr for VertexId {
    type Err = EngineError;

    /// Accepts `3`, `v2.1`, `2.1` and a trailing `'` for companions.
    fn from_str(s: &str) -> Result<VertexId> {
        let s = s.trim();
        let (body, companion) = match s.strip_suffix('\'') {
            Some(b) => (b, true),
            None => (s, false),
        };
        if body.is_empty() {
            return invalid("empty vertex id");
        }
        let (node, level) = match body.rsplit_once('.') {
            Some((n, l)) => {
                let level: u32 = l.parse().map_err(|_| EngineError::InvalidInput(format!("bad level in vertex id `{s}`")))?;
                let n = match n.strip_prefix('v') {
                    Some(rest) if !rest.is_empty() => rest,
                    _ => n,
                };
                (n, Some(level))
            }
            None => (body, None),
        };
        if node.is_empty() || node.contains(|c: char| c.is_whitespace() || c == ',' || c == '\'') {
            return invalid(format!("bad vertex id `{s}`"));
        }
        Ok(VertexId { node: node.to_string(), level, companion })
    }
}

impl Serialize for VertexId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a comma-separated list of vertex ids.
pub fn parse_sequence(s: &str) -> Result<Vec<VertexId>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|t| t.parse()).collect()
}

pub fn format_sequence(seq: &[VertexId]) -> String {
    seq.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Family {
    A,
    D,
    E,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct DynkinType {
    pub family: Family,
    pub rank: usize,
}

impl DynkinType {
    pub fn new(family: Family, rank: usize) -> Result<DynkinType> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::D => rank >= 4,
            Family::E => (6..=8).contains(&rank),
        };
        if !ok {
            return invalid(format!("no Dynkin type {family:?}{rank}"));
        }
        Ok(DynkinType { family, rank })
    }

    pub fn a(n: usize) -> DynkinType {
        DynkinType::new(Family::A, n).expect("valid rank")
    }

    pub fn d(n: usize) -> DynkinType {
        DynkinType::new(Family::D, n).expect("valid rank")
    }

    pub fn e(n: usize) -> DynkinType {
        DynkinType::new(Family::E, n).expect("valid rank")
    }

    pub fn coxeter_number(&self) -> usize {
        match (self.family, self.rank) {
            (Family::A, n) => n + 1,
            (Family::D, n) => 2 * n - 2,
            (Family::E, 6) => 12,
            (Family::E, 7) => 18,
            (Family::E, _) => 30,
        }
    }

    pub fn positive_roots(&self) -> usize {
        self.rank * self.coxeter_number() / 2
    }

    /// Edges of the alternating orientation, as (source, target).
    pub fn alternating_arrows(&self) -> Vec<(usize, usize)> {
        let chain = |len: usize| -> Vec<(usize, usize)> {
            (1..len).map(|i| if i % 2 == 0 { (i, i + 1) } else { (i + 1, i) }).collect()
        };
        match self.family {
            Family::A => chain(self.rank),
            Family::D => {
                let n = self.rank;
                let mut arrows = chain(n - 1);
                let b = n - 2;
                arrows.push(if b.is_multiple_of(2) { (b, n) } else { (n, b) });
                arrows
            }
            Family::E => {
                let mut arrows = vec![(3, 1), (3, 4), (5, 4), (2, 4), (5, 6)];
                if self.rank >= 7 {
                    arrows.push((7, 6));
                }
                if self.rank == 8 {
                    arrows.push((7, 8));
                }
                arrows
            }
        }
    }
}

impl fmt::Display for DynkinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self.rank)
    }
}

impl FromStr for DynkinType {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<DynkinType> {
        let s = s.trim();
        let mut chars = s.chars();
        let family = match chars.next().map(|c| c.to_ascii_uppercase()) {
            Some('A') => Family::A,
            Some('D') => Family::D,
            Some('E') => Family::E,
            _ => return invalid(format!("unknown Dynkin type `{s}`")),
        };
        let rank = chars.as_str().trim_start_matches('_').parse().map_err(|_| EngineError::InvalidInput(format!("unknown Dynkin type `{s}`")))?;
        DynkinType::new(family, rank)
    }
}

pub fn parse_family(s: &str) -> Result<Family> {
    match s.trim().to_ascii_uppercase().as_str() {
        "A" => Ok(Family::A),
        "D" => Ok(Family::D),
        "E" => Ok(Family::E),
        _ => invalid(format!("unknown Dynkin family `{s}`")),
    }
}

/// A finite ice quiver. Vertices are kept sorted; `b[u][v]` counts arrows
/// u→v minus arrows v→u. Arrows between two frozen vertices are dropped.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Quiver {
    ids: Vec<VertexId>,
    frozen: Vec<bool>,
    index: HashMap<VertexId, usize>,
    b: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: VertexId,
    #[serde(default)]
    frozen: bool,
}

#[derive(Serialize, Deserialize)]
struct ArrowJson {
    from: VertexId,
    to: VertexId,
    #[serde(default = "one")]
    mult: i64,
}

fn one() -> i64 {
    1
}

#[derive(Serialize, Deserialize)]
struct QuiverJson {
    vertices: Vec<VertexJson>,
    #[serde(default)]
    arrows: Vec<ArrowJson>,
}

impl Quiver {
    /// Builds a quiver. Opposite arrows cancel; loops and unknown endpoints
    /// are rejected.
    pub fn new(vertices: Vec<(VertexId, bool)>, arrows: &[(VertexId, VertexId, i64)]) -> Result<Quiver> {
        let mut vertices = vertices;
        vertices.sort_by(|a, b| a.0.cmp(&b.0));
        for w in vertices.windows(2) {
            if w[0].0 == w[1].0 {
                return invalid(format!("duplicate vertex {}", w[0].0));
            }
        }
        let n = vertices.len();
        let ids: Vec<VertexId> = vertices.iter().map(|v| v.0.clone()).collect();
        let frozen: Vec<bool> = vertices.iter().map(|v| v.1).collect();
        let index: HashMap<VertexId, usize> = ids.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let mut b = vec![0i64; n * n];
        for (from, to, mult) in arrows {
            let u = *index.get(from).ok_or_else(|| EngineError::UnknownVertex(from.to_string()))?;
            let v = *index.get(to).ok_or_else(|| EngineError::UnknownVertex(to.to_string()))?;
            if u == v {
                return invalid(format!("loop at {from}"));
            }
            if *mult < 1 {
                return invalid(format!("arrow {from}->{to} has multiplicity {mult}"));
            }
            b[u * n + v] += mult;
            b[v * n + u] -= mult;
        }
        let mut q = Quiver { ids, frozen, index, b };
        q.drop_frozen_arrows();
        Ok(q)
    }

    /// Builds a quiver directly from a skew-symmetric matrix.
    pub fn from_matrix(ids: Vec<VertexId>, frozen: Vec<bool>, b: Vec<i64>) -> Result<Quiver> {
        let n = ids.len();
        if frozen.len() != n || b.len() != n * n {
            return invalid("matrix shape mismatch");
        }
        for i in 0..n {
            for j in 0..n {
                if b[i * n + j] != -b[j * n + i] {
                    return invalid("matrix is not skew-symmetric");
                }
            }
        }
        let mut arrows = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if b[i * n + j] > 0 {
                    arrows.push((ids[i].clone(), ids[j].clone(), b[i * n + j]));
                }
            }
        }
        Quiver::new(ids.into_iter().zip(frozen).collect(), &arrows)
    }

    fn drop_frozen_arrows(&mut self) {
        let n = self.n();
        for i in 0..n {
            if !self.frozen[i] {
                continue;
            }
            for j in 0..n {
                if self.frozen[j] {
                    self.b[i * n + j] = 0;
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &VertexId {
        &self.ids[i]
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn require(&self, v: &VertexId) -> Result<usize> {
        self.index_of(v).ok_or_else(|| EngineError::UnknownVertex(v.to_string()))
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    pub fn mutable_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.frozen[i]).collect()
    }

    pub fn frozen_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.frozen[i]).collect()
    }

    /// Signed arrow count u→v.
    pub fn b(&self, u: usize, v: usize) -> i64 {
        self.b[u * self.n() + v]
    }

    pub fn matrix(&self) -> &[i64] {
        &self.b
    }

    /// Arrows with positive multiplicity, sorted by (from, to).
    pub fn arrows(&self) -> Vec<(usize, usize, i64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let m = self.b[i * n + j];
                if m > 0 {
                    out.push((i, j, m));
                }
            }
        }
        out
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows().len()
    }

    pub fn mutate_in_place(&mut self, k: usize) {
        let n = self.n();
        let row: Vec<i64> = (0..n).map(|j| self.b[k * n + j]).collect();
        for i in 0..n {
            if i == k {
                continue;
            }
            let bik = self.b[i * n + k];
            if bik == 0 {
                continue;
            }
            for j in 0..n {
                if j == k || j == i {
                    continue;
                }
                let bkj = row[j];
                if bkj == 0 {
                    continue;
                }
                self.b[i * n + j] += (bik.abs() * bkj + bik * bkj.abs()) / 2;
            }
        }
        for j in 0..n {
            self.b[k * n + j] = -self.b[k * n + j];
            self.b[j * n + k] = -self.b[j * n + k];
        }
        self.drop_frozen_arrows();
    }

    pub fn mutate(&self, v: &VertexId) -> Result<Quiver> {
        let k = self.require(v)?;
        if self.frozen[k] {
            return Err(EngineError::NotMutable { vertex: v.to_string(), step: 0 });
        }
        let mut q = self.clone();
        q.mutate_in_place(k);
        Ok(q)
    }

    /// Applies a sequence, reporting the first invalid step.
    pub fn mutate_sequence(&self, seq: &[VertexId]) -> Result<Quiver> {
        let mut q = self.clone();
        for (step, v) in seq.iter().enumerate() {
            let k = q.require(v)?;
            if q.frozen[k] {
                return Err(EngineError::NotMutable { vertex: v.to_string(), step });
            }
            q.mutate_in_place(k);
        }
        Ok(q)
    }

    pub fn opposite(&self) -> Quiver {
        let mut q = self.clone();
        for x in q.b.iter_mut() {
            *x = -*x;
        }
        q
    }

    /// Same arrows with a different frozen set.
    pub fn with_frozen(&self, frozen: &[VertexId]) -> Result<Quiver> {
        let mut flags = vec![false; self.n()];
        for v in frozen {
            flags[self.require(v)?] = true;
        }
        Quiver::from_matrix(self.ids.clone(), flags, self.b.clone())
    }

    pub fn unfrozen(&self) -> Quiver {
        Quiver::from_matrix(self.ids.clone(), vec![false; self.n()], self.b.clone()).expect("same shape")
    }

    fn with_companions(&self, outgoing: bool) -> Quiver {
        let mut vertices: Vec<(VertexId, bool)> = self.ids.iter().cloned().zip(self.frozen.iter().copied()).collect();
        let mut arrows: Vec<(VertexId, VertexId, i64)> = self.arrows().into_iter().map(|(i, j, m)| (self.ids[i].clone(), self.ids[j].clone(), m)).collect();
        for v in &self.ids {
            let c = v.companion();
            vertices.push((c.clone(), true));
            if outgoing {
                arrows.push((v.clone(), c, 1));
            } else {
                arrows.push((c, v.clone(), 1));
            }
        }
        Quiver::new(vertices, &arrows).expect("companions are fresh")
    }

    /// Adds a frozen companion v' and an arrow v→v' for every vertex.
    pub fn frame(&self) -> Quiver {
        self.with_companions(true)
    }

    /// Adds a frozen companion v' and an arrow v'→v for every vertex.
    pub fn coframe(&self) -> Quiver {
        self.with_companions(false)
    }

    /// Induced subquiver on the listed vertices.
    pub fn restrict(&self, keep: &[VertexId]) -> Result<Quiver> {
        let idx: Vec<usize> = keep.iter().map(|v| self.require(v)).collect::<Result<_>>()?;
        let mut arrows = Vec::new();
        for &i in &idx {
            for &j in &idx {
                let m = self.b(i, j);
                if m > 0 {
                    arrows.push((self.ids[i].clone(), self.ids[j].clone(), m));
                }
            }
        }
        Quiver::new(idx.iter().map(|&i| (self.ids[i].clone(), self.frozen[i])).collect(), &arrows)
    }

    /// Vertices with no incoming arrows (isolated vertices included), sorted.
    pub fn sources(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| (0..self.n()).all(|j| self.b(j, i) <= 0)).collect()
    }

    /// Vertices with no outgoing arrows that are not already sources, sorted.
    pub fn sinks(&self) -> Vec<usize> {
        let src = self.sources();
        (0..self.n()).filter(|&i| !src.contains(&i) && (0..self.n()).all(|j| self.b(i, j) <= 0)).collect()
    }

    /// Sources then sinks; fails unless every vertex is one or the other.
    pub fn source_sink_order(&self) -> Result<Vec<VertexId>> {
        let src = self.sources();
        let snk = self.sinks();
        if src.len() + snk.len() != self.n() {
            return invalid("quiver orientation is not alternating");
        }
        Ok(src.into_iter().chain(snk).map(|i| self.ids[i].clone()).collect())
    }

    /// True if no directed cycle exists among all vertices.
    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.n();
        let mut indeg: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| self.b(j, i) > 0).count()).collect();
        let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = ready.pop() {
            order.push(u);
            for v in 0..n {
                if self.b(u, v) > 0 {
                    indeg[v] -= 1;
                    if indeg[v] == 0 {
                        ready.push(v);
                    }
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let q = QuiverJson {
            vertices: self.ids.iter().zip(&self.frozen).map(|(id, &f)| VertexJson { id: id.clone(), frozen: f }).collect(),
            arrows: self
                .arrows()
                .into_iter()
                .map(|(i, j, m)| ArrowJson { from: self.ids[i].clone(), to: self.ids[j].clone(), mult: m })
                .collect(),
        };
        serde_json::to_value(q).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Quiver> {
        let q: QuiverJson = serde_json::from_value(v.clone()).map_err(|e| EngineError::InvalidInput(format!("quiver JSON: {e}")))?;
        if q.vertices.is_empty() {
            return invalid("quiver has no vertices");
        }
        let arrows: Vec<(VertexId, VertexId, i64)> = q.arrows.into_iter().map(|a| (a.from, a.to, a.mult)).collect();
        Quiver::new(q.vertices.into_iter().map(|v| (v.id, v.frozen)).collect(), &arrows)
    }
}

impl fmt::Display for Quiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verts: Vec<String> = self
            .ids
            .iter()
            .zip(&self.frozen)
            .map(|(v, &fr)| if fr { format!("[{v}]") } else { v.to_string() })
            .collect();
        writeln!(f, "vertices: {}", verts.join(" "))?;
        for (i, j, m) in self.arrows() {
            if m == 1 {
                writeln!(f, "  {} -> {}", self.ids[i], self.ids[j])?;
            } else {
                writeln!(f, "  {} -> {} x{}", self.ids[i], self.ids[j], m)?;
            }
        }
        Ok(())
    }
}

/// Alternating-orientation Dynkin quiver with nodes 1..n.
pub fn dynkin_quiver(t: DynkinType) -> Quiver {
    let vertices = (1..=t.rank).map(|i| (VertexId::plain(i), false)).collect();
    let arrows: Vec<_> = t.alternating_arrows().into_iter().map(|(a, b)| (VertexId::plain(a), VertexId::plain(b), 1)).collect();
    Quiver::new(vertices, &arrows).expect("well-formed Dynkin quiver")
}

/// Vertices 1..m with arrows i+1→i; vertex 1 is the unique sink.
pub fn line_quiver(m: usize) -> Result<Quiver> {
    if m < 1 {
        return invalid("line quiver needs at least one vertex");
    }
    let vertices = (1..=m).map(|i| (VertexId::plain(i), false)).collect();
    let arrows: Vec<_> = (1..m).map(|i| (VertexId::plain(i + 1), VertexId::plain(i), 1)).collect();
    Quiver::new(vertices, &arrows)
}

/// Q⊠R: vertex (p, p') becomes `v{p}.{p'}`. R's labels must be integers.
/// Product vertices are frozen when either factor is.
pub fn triangular_product(q: &Quiver, r: &Quiver) -> Result<Quiver> {
    let mut levels = Vec::with_capacity(r.n());
    for id in r.ids() {
        match (id.level, id.node_number()) {
            (None, Some(l)) if !id.companion => levels.push(l),
            _ => return invalid(format!("second factor needs integer labels, found {id}")),
        }
    }
    for id in q.ids() {
        if id.level.is_some() || id.companion {
            return invalid(format!("first factor has a composite label {id}"));
        }
    }
    let pid = |p: usize, pp: usize| VertexId::at(&q.id(p).node, levels[pp]);
    let mut vertices = Vec::new();
    for p in 0..q.n() {
        for pp in 0..r.n() {
            vertices.push((pid(p, pp), q.is_frozen(p) || r.is_frozen(pp)));
        }
    }
    let mut arrows = Vec::new();
    for (p, qv, m) in q.arrows() {
        for pp in 0..r.n() {
            arrows.push((pid(p, pp), pid(qv, pp), m));
        }
    }
    for (pp, qq, m) in r.arrows() {
        for p in 0..q.n() {
            arrows.push((pid(p, pp), pid(p, qq), m));
        }
    }
    for (p, qv, m1) in q.arrows() {
        for (pp, qq, m2) in r.arrows() {
            arrows.push((pid(qv, qq), pid(p, pp), m1 * m2));
        }
    }
    Quiver::new(vertices, &arrows)
}

/// Q⊠A_levels with the sink-oriented line quiver; `frozen_from` freezes every
/// level at or above it.
pub fn product_with_line(q: &Quiver, levels: usize, frozen_from: Option<u32>) -> Result<Quiver> {
    let p = triangular_product(q, &line_quiver(levels)?)?;
    match frozen_from {
        None => Ok(p),
        Some(f) => {
            let frozen: Vec<VertexId> = p.ids().iter().filter(|v| v.level.is_some_and(|l| l >= f)).cloned().collect();
            p.with_frozen(&frozen)
        }
    }
}

/// Sink-oriented A_{n+1} line quiver with vertex n+1 frozen.
pub fn iced_line(n: usize) -> Result<Quiver> {
    let q = line_quiver(n + 1)?;
    q.with_frozen(&[VertexId::plain(n + 1)])
}
