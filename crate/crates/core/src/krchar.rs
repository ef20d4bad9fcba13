//! q-characters of Kirillov-Reshetikhin modules as cluster variables of
//! Q⊠A_L truncations, and the interval-collection sequences built on them.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use serde_json::json;

use crate::error::{invalid, EngineError, Result};
use crate::greenseq::{classify_sequence, lift, run_framed, sink_letters_an, MutationSequence, Provenance, SequenceKind};
use crate::laurent::{LaurentPoly, Monomial, Var};
use crate::quiver::{dynkin_quiver, product_with_line, DynkinType, Family, Quiver, VertexId};
use crate::seed::Seed;

/// Closed integer interval [lo, hi].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Interval {
    pub lo: u32,
    pub hi: u32,
}

impl Interval {
    pub fn new(lo: u32, hi: u32) -> Result<Interval> {
        if lo < 1 || hi < lo {
            return invalid(format!("bad interval [{lo}, {hi}]"));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, o: &Interval) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    pub fn comparable(&self, o: &Interval) -> bool {
        self.contains(o) || o.contains(self)
    }

    pub fn len(&self) -> u32 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct IntervalCollection {
    pub intervals: Vec<Interval>,
}

impl IntervalCollection {
    pub fn new(intervals: Vec<Interval>) -> IntervalCollection {
        IntervalCollection { intervals }
    }

    pub fn from_pairs(pairs: &[(u32, u32)]) -> Result<IntervalCollection> {
        Ok(IntervalCollection::new(pairs.iter().map(|&(a, b)| Interval::new(a, b)).collect::<Result<_>>()?))
    }

    pub fn is_nested(&self) -> bool {
        let v = &self.intervals;
        (0..v.len()).all(|i| (i + 1..v.len()).all(|j| v[i].comparable(&v[j])))
    }

    pub fn max_hi(&self) -> Option<u32> {
        self.intervals.iter().map(|i| i.hi).max()
    }

    pub fn min_lo(&self) -> Option<u32> {
        self.intervals.iter().map(|i| i.lo).min()
    }

    pub fn union(&self, o: &IntervalCollection) -> IntervalCollection {
        IntervalCollection::new(self.intervals.iter().chain(&o.intervals).copied().collect())
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// W^{(v)}_{k,right}: dominant monomial t_{v,right-k+1}⋯t_{v,right}.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KRDescriptor {
    pub node: String,
    pub k: u32,
    pub right: u32,
}

impl KRDescriptor {
    pub fn new(node: &str, k: u32, right: u32) -> Result<KRDescriptor> {
        if k < 1 || right < k {
            return invalid(format!("no KR module with k={k}, right end {right}"));
        }
        Ok(KRDescriptor { node: node.to_string(), k, right })
    }

    pub fn support(&self) -> Interval {
        Interval { lo: self.right + 1 - self.k, hi: self.right }
    }

    pub fn dominant_monomial(&self) -> Monomial {
        Monomial::from_exps((self.right + 1 - self.k..=self.right).map(|j| (t_var(&self.node, j), 1)))
    }
}

#[derive(Clone, Debug)]
pub struct QCharacter {
    pub module: KRDescriptor,
    pub poly: LaurentPoly,
    pub truncated: bool,
}

impl QCharacter {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "module": {"node": format!("v{}", self.module.node), "k": self.module.k, "right": self.module.right},
            "truncated": self.truncated,
            "character": self.poly.to_json(),
        })
    }
}

pub fn t_var(node: &str, level: u32) -> Var {
    Var::new(&format!("t.v{node}.{level}"))
}

pub fn y_var_sl2(k: u32) -> Var {
    Var::new(&format!("Y.q{k}"))
}

fn parse_family_var(v: Var, prefix: &str) -> Result<(String, u32)> {
    let name = v.name();
    let rest = name.strip_prefix(prefix).ok_or_else(|| EngineError::InvalidInput(format!("unexpected variable {name}")))?;
    let id: VertexId = rest.parse()?;
    match id.level {
        Some(l) if !id.companion && l >= 1 => Ok((id.node, l)),
        _ => invalid(format!("variable {name} is not attached to a product vertex")),
    }
}

/// Rewrites a polynomial in x_{v,k} as one in t_{v,k} via x_{v,k} = ∏_{j≤k} t_{v,j}.
pub fn to_t_variables(p: &LaurentPoly) -> Result<LaurentPoly> {
    let mut images: HashMap<Var, LaurentPoly> = HashMap::new();
    for v in p.vars() {
        let (node, level) = parse_family_var(v, "x.")?;
        let m = Monomial::from_exps((1..=level).map(|j| (t_var(&node, j), 1)));
        images.insert(v, LaurentPoly::monomial(m));
    }
    Ok(p.substitute(&images)?)
}

/// Inverse of [`to_t_variables`]: t_{v,k} = x_{v,k}/x_{v,k-1}.
pub fn from_t_variables(p: &LaurentPoly) -> Result<LaurentPoly> {
    let mut images: HashMap<Var, LaurentPoly> = HashMap::new();
    for v in p.vars() {
        let (node, level) = parse_family_var(v, "t.")?;
        let x = |l: u32| crate::seed::xvar(&VertexId::at(&node, l));
        let mut exps = vec![(x(level), 1)];
        if level > 1 {
            exps.push((x(level - 1), -1));
        }
        images.insert(v, LaurentPoly::monomial(Monomial::from_exps(exps)));
    }
    Ok(p.substitute(&images)?)
}

/// Renames Y_{q^k} to t_{1,k}, the sl2 dictionary x_k/x_{k-1} = Y_{q^k}.
pub fn sl2_y_to_t(p: &LaurentPoly) -> Result<LaurentPoly> {
    let mut images = HashMap::new();
    for v in p.vars() {
        let name = v.name();
        let k: u32 = name
            .strip_prefix("Y.q")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| EngineError::InvalidInput(format!("unexpected variable {name}")))?;
        images.insert(v, LaurentPoly::monomial(Monomial::var(t_var("1", k))));
    }
    Ok(p.substitute(&images)?)
}

/// Names of t-variables in the Y_{v,q^s} convention: sources carry even
/// powers (t_{v,k} ↔ Y_{v,q^{2-2k}}), sinks odd ones (t_{v,k} ↔ Y_{v,q^{1-2k}}).
pub fn y_renaming_table(q: &Quiver, levels: u32) -> Vec<(String, String)> {
    let sources: BTreeSet<usize> = q.sources().into_iter().collect();
    let mut out = Vec::new();
    for (i, v) in q.ids().iter().enumerate() {
        for k in 1..=levels as i64 {
            let s = if sources.contains(&i) { 2 - 2 * k } else { 1 - 2 * k };
            out.push((t_var(&v.node, k as u32).name().to_string(), format!("Y.{}.q{}", v.node, s)));
        }
    }
    out
}

fn check_node(t: DynkinType, node: &str) -> Result<String> {
    let node = node.strip_prefix('v').unwrap_or(node);
    match node.parse::<usize>() {
        Ok(i) if (1..=t.rank).contains(&i) => Ok(i.to_string()),
        _ => invalid(format!("{t} has no node {node}")),
    }
}

/// The sweep sequence: sweep j (1-based) visits levels 1..=k+d-j, each level
/// through Sc(Q). Only this cone influences the variable at level k.
pub fn hl_sweep_sequence(q: &Quiver, d: u32, k: u32) -> Result<Vec<VertexId>> {
    let order = q.source_sink_order()?;
    let mut letters = Vec::new();
    for j in 1..=d {
        letters.extend(1..=k + d - j);
    }
    Ok(lift(&order, &letters))
}

/// d sweeps over Q⊠A_L read at (node, k): χ_q(W_{k,d+k}), truncated when d < h/2.
pub fn hl_sweep_character(t: DynkinType, d: u32, k: u32, node: &str, levels: u32) -> Result<QCharacter> {
    if d < 1 || k < 1 {
        return invalid("sweep count and length must be positive");
    }
    if levels < d + k {
        return Err(EngineError::DepthViolation(format!("{d} sweeps read at level {k} need at least {} levels, got {levels}", d + k)));
    }
    let node = check_node(t, node)?;
    let q = dynkin_quiver(t);
    let p = product_with_line(&q, levels as usize, Some(d + k))?;
    let seq = hl_sweep_sequence(&q, d, k)?;
    let s = Seed::plain(p).apply_sequence(&seq)?;
    let x = s.x(&VertexId::at(&node, k))?;
    Ok(QCharacter {
        module: KRDescriptor::new(&node, k, d + k)?,
        poly: to_t_variables(x)?,
        truncated: 2 * d < t.coxeter_number() as u32,
    })
}

/// Sc(Q)×S_{A_{L-1}} on Q⊠A_L (level L frozen) read at (node, a): χ_q(W_{a,L}).
/// Complete exactly when L - a ≥ h/2, the same depth as d sweeps with d = L - a.
pub fn mgs_character(t: DynkinType, a: u32, levels: u32, node: &str) -> Result<QCharacter> {
    if a == 0 {
        return invalid("KR modules have positive length");
    }
    if a >= levels {
        return Err(EngineError::DepthViolation(format!("length {a} needs more than {a} levels, got {levels}")));
    }
    let node = check_node(t, node)?;
    let q = dynkin_quiver(t);
    let p = product_with_line(&q, levels as usize, Some(levels))?;
    let seq = lift(&q.source_sink_order()?, &sink_letters_an(levels as usize - 1));
    let s = Seed::plain(p).apply_sequence(&seq)?;
    let x = s.x(&VertexId::at(&node, a))?;
    Ok(QCharacter {
        module: KRDescriptor::new(&node, a, levels)?,
        poly: to_t_variables(x)?,
        truncated: 2 * (levels - a) < t.coxeter_number() as u32,
    })
}

/// Every character of Sc(Q)×S_{A_{L-1}} at once: level a holds W_{a,L}.
pub fn mgs_characters_all(t: DynkinType, levels: u32) -> Result<Vec<QCharacter>> {
    let q = dynkin_quiver(t);
    let p = product_with_line(&q, levels as usize, Some(levels))?;
    let seq = lift(&q.source_sink_order()?, &sink_letters_an(levels as usize - 1));
    let s = Seed::plain(p).apply_sequence(&seq)?;
    let mut out = Vec::new();
    for v in q.ids() {
        for a in 1..levels {
            out.push(QCharacter {
                module: KRDescriptor::new(&v.node, a, levels)?,
                poly: to_t_variables(s.x(&VertexId::at(&v.node, a))?)?,
                truncated: 2 * (levels - a) < t.coxeter_number() as u32,
            });
        }
    }
    Ok(out)
}

/// t_{v,j} ↦ t_{v,j+s}.
pub fn shift_t_levels(p: &LaurentPoly, s: u32) -> Result<LaurentPoly> {
    let mut images = HashMap::new();
    for v in p.vars() {
        let (node, level) = parse_family_var(v, "t.")?;
        images.insert(v, LaurentPoly::monomial(Monomial::var(t_var(&node, level + s))));
    }
    Ok(p.substitute(&images)?)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CharacterRoute {
    Sweep,
    Mgs,
}

/// χ_q(W_{k,right}) at `node`. When right - k exceeds ⌈h/2⌉ the character is
/// computed on the shallowest complete truncation, right' = k + ⌈h/2⌉, and
/// shifted up by right - right'.
pub fn kr_character(t: DynkinType, node: &str, k: u32, right: u32, route: CharacterRoute) -> Result<QCharacter> {
    if k == 0 || right <= k {
        return Err(EngineError::DepthViolation(format!("need 1 <= k < right, got k={k} right={right}")));
    }
    let d = right - k;
    let d0 = (t.coxeter_number() as u32).div_ceil(2);
    let base = d.min(d0);
    let c = match route {
        CharacterRoute::Sweep => hl_sweep_character(t, base, k, node, k + base)?,
        CharacterRoute::Mgs => mgs_character(t, k, k + base, node)?,
    };
    if base == d {
        return Ok(c);
    }
    Ok(QCharacter {
        module: KRDescriptor::new(&c.module.node, k, right)?,
        poly: shift_t_levels(&c.poly, d - base)?,
        truncated: false,
    })
}

/// Y_{q^{n+1}}⋯Y_{q^{a+1}}(1 + A_a^{-1} + … + A_a^{-1}⋯A_n^{-1}) with
/// A_j = Y_{q^j}Y_{q^{j+1}} and n = r + a - 1.
pub fn sl2_closed_form(r: u32, a: u32) -> Result<QCharacter> {
    if r < 1 || a < 1 {
        return invalid("sl2 closed form needs r >= 1 and a >= 1");
    }
    let n = r + a - 1;
    let lead = Monomial::from_exps((a + 1..=n + 1).map(|k| (y_var_sl2(k), 1)));
    let mut sum = LaurentPoly::one();
    let mut acc = Monomial::one();
    for j in a..=n {
        acc = acc.mul(&Monomial::from_exps([(y_var_sl2(j), -1), (y_var_sl2(j + 1), -1)]));
        sum = sum.add(&LaurentPoly::monomial(acc.clone()));
    }
    Ok(QCharacter {
        module: KRDescriptor::new("1", r, n + 1)?,
        poly: sum.mul_monomial(&lead),
        truncated: false,
    })
}

/// Monomials with only nonnegative exponents.
pub fn dominant_monomials(p: &LaurentPoly) -> Vec<Monomial> {
    p.terms().iter().filter(|(m, _)| m.exps().iter().all(|&(_, e)| e > 0)).map(|(m, _)| m.clone()).collect()
}

/// Evaluates characters in parallel threads; order of results follows input.
pub fn batch_mgs_characters(jobs: &[(DynkinType, u32, u32, String)]) -> Vec<Result<QCharacter>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs.iter().map(|(t, a, l, node)| scope.spawn(move || mgs_character(*t, *a, *l, node))).collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(EngineError::Invariant("worker panicked".into())))).collect()
    })
}

/// Letters of the sink sequence for a nested collection on A_∞. Intervals
/// are processed from the innermost outwards; [lo, hi] ends up with a
/// variable of g-vector e_hi - e_{lo-1}.
pub fn nested_letters(n: &IntervalCollection) -> Result<Vec<u32>> {
    if !n.is_nested() {
        return invalid("interval collection is not nested");
    }
    let mut ivs = n.intervals.clone();
    ivs.sort_by(|a, b| b.lo.cmp(&a.lo).then(a.hi.cmp(&b.hi)));
    ivs.dedup();
    let mut letters = Vec::new();
    let mut top: Option<u32> = None;
    for iv in ivs {
        let r = iv.lo - 1;
        match top {
            None => {
                if r == 0 {
                    continue;
                }
                letters.extend(sink_letters_an(iv.hi as usize - 1));
                top = Some(iv.hi);
            }
            Some(t) => {
                for f in t..iv.hi {
                    letters.extend((f + 1 - r..=f).rev());
                }
                top = Some(t.max(iv.hi));
            }
        }
    }
    Ok(letters)
}

/// Sc(Q) lift of [`nested_letters`].
pub fn nested_sequence(n: &IntervalCollection, q: &Quiver) -> Result<MutationSequence> {
    let letters = nested_letters(n)?;
    Ok(MutationSequence::new(lift(&q.source_sink_order()?, &letters), Provenance::Nested))
}

/// Length of the prefix S_{A_{T-1}} of the nested sequence (in letters).
pub fn nested_prefix_letters(n: &IntervalCollection) -> usize {
    let inner = n.intervals.iter().filter(|i| i.lo >= 2).max_by(|a, b| a.lo.cmp(&b.lo).then(b.hi.cmp(&a.hi)));
    inner.map(|i| sink_letters_an(i.hi as usize - 1).len()).unwrap_or(0)
}

fn gap_ok(left: &IntervalCollection, right: &IntervalCollection, h: usize) -> bool {
    match (left.max_hi(), right.min_lo()) {
        (Some(b), Some(a)) => a > b && 2 * (a - b) as usize > h,
        _ => true,
    }
}

pub fn general_position(n: &IntervalCollection, n2: &IntervalCollection, h: usize) -> bool {
    n.union(n2).is_nested() || gap_ok(n, n2, h) || gap_ok(n2, n, h)
}

/// A sequence whose seed carries the g-vectors of both collections: S_N,
/// then S_{N'} computed on levels shifted down by the highest letter L of
/// S_N and played back shifted up by L. Separated collections need a gap
/// above ⌈h/2⌉; at odd h a gap of exactly ⌈h/2⌉ loses g-vectors.
pub fn combined_sequence(n: &IntervalCollection, n2: &IntervalCollection, q: &Quiver, h: usize) -> Result<MutationSequence> {
    if !n.is_nested() || !n2.is_nested() {
        return invalid("both collections must be nested");
    }
    let order = q.source_sink_order()?;
    let letters = if n.union(n2).is_nested() {
        nested_letters(&n.union(n2))?
    } else {
        let (left, right) = if gap_ok(n, n2, h + 1) {
            (n, n2)
        } else if gap_ok(n2, n, h + 1) {
            (n2, n)
        } else {
            return invalid("collections are neither nested together nor separated by more than h/2");
        };
        let mut letters = nested_letters(left)?;
        let shift = letters.iter().copied().max().unwrap_or(0);
        let moved = IntervalCollection::new(right.intervals.iter().map(|i| Interval { lo: i.lo - shift, hi: i.hi - shift }).collect());
        letters.extend(nested_letters(&moved)?.into_iter().map(|l| l + shift));
        letters
    };
    Ok(MutationSequence::new(lift(&order, &letters), Provenance::Combined))
}

/// Level supports of the c-vectors of the variables produced after the
/// prefix S_{A_{T-1}} of the nested sequence, read at the moment each
/// variable is created.
pub fn post_prefix_supports(n: &IntervalCollection, q: &Quiver) -> Result<Vec<BTreeSet<u32>>> {
    let seq = nested_sequence(n, q)?;
    let top = n.max_hi().unwrap_or(1).max(2);
    let p = product_with_line(q, top as usize, Some(top))?;
    let prefix = nested_prefix_letters(n) * q.n();
    let mut out = Vec::new();
    run_framed(&p, &seq.steps, |step, fr, k| {
        if step >= prefix {
            let c = fr.c_vector(k);
            out.push((0..p.n()).filter(|&w| c[w] != 0).filter_map(|w| p.id(w).level).collect());
        }
        Ok(())
    })?;
    Ok(out)
}

/// First pair of supports neither of which contains the other.
pub fn non_nested_pair(supports: &[BTreeSet<u32>]) -> Option<(BTreeSet<u32>, BTreeSet<u32>)> {
    for (i, a) in supports.iter().enumerate() {
        for b in &supports[i + 1..] {
            if !a.is_subset(b) && !b.is_subset(a) {
                return Some((a.clone(), b.clone()));
            }
        }
    }
    None
}

/// Exponents of the q-string of W_r(q^c): c-r+1, c-r+3, …, c+r-1.
pub fn qstring(c: i64, r: u32) -> Vec<i64> {
    (0..r as i64).map(|j| c - r as i64 + 1 + 2 * j).collect()
}

/// Pairwise check: the union is not a q-string, or one contains the other.
pub fn qstring_general_position(strings: &[(i64, u32)]) -> bool {
    let sets: Vec<BTreeSet<i64>> = strings.iter().map(|&(c, r)| qstring(c, r).into_iter().collect()).collect();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let (a, b) = (&sets[i], &sets[j]);
            if a.is_subset(b) || b.is_subset(a) {
                continue;
            }
            let u: Vec<i64> = a.union(b).copied().collect();
            if u.windows(2).all(|w| w[1] - w[0] == 2) {
                return false;
            }
        }
    }
    true
}

/// The interval of each node in the collection C(l; m).
pub fn c_collection_intervals(t: DynkinType, l: &[u32], m: u32) -> Result<Vec<(String, Interval)>> {
    let n = t.rank;
    if l.len() != n {
        return invalid(format!("{t} needs {n} left ends, got {}", l.len()));
    }
    let h = t.coxeter_number() as u32;
    if 2 * m < h + 2 {
        return invalid(format!("m = {m} is below h/2 + 1 for {t}"));
    }
    if let Some(&bad) = l.iter().find(|&&x| 2 * x < h) {
        return invalid(format!("left end {bad} is below h/2 for {t}"));
    }
    let a_top = |i: u32| m + i / 2 + 1;
    let tops: Vec<u32> = match t.family {
        Family::A => (1..=n as u32).map(a_top).collect(),
        Family::D => {
            let tail = if n.is_multiple_of(2) { m + n as u32 / 2 - 1 } else { m + (n as u32 - 1) / 2 };
            (1..=n as u32 - 2).map(a_top).chain([tail, tail]).collect()
        }
        Family::E => {
            let mut v = vec![m, m + 1, m + 1, m + 1, m + 2, m + 2];
            if n >= 7 {
                v.push(m + 3);
            }
            if n == 8 {
                v.push(m + 3);
            }
            v
        }
    };
    let mut out = Vec::new();
    for (i, (&lo, &hi)) in l.iter().zip(&tops).enumerate() {
        if lo > hi {
            return invalid(format!("interval [{lo}, {hi}] at node {} is empty", i + 1));
        }
        out.push(((i + 1).to_string(), Interval { lo, hi }));
    }
    Ok(out)
}

/// The staged sequence for a family of per-node tops T(v): first
/// Sc(Q)×S_{A_{T0-1}} with T0 the least top, then for t = T0, T0+1, …
/// the block t, t-1, …, 1 lifted over the nodes whose top exceeds t.
pub fn staged_letters_sequence(q: &Quiver, tops: &HashMap<String, u32>) -> Result<Vec<VertexId>> {
    for (p, qq, _) in q.arrows() {
        let (tp, tq) = (tops[&q.id(p).node], tops[&q.id(qq).node]);
        if !(tq <= tp && tp <= tq + 1) {
            return invalid(format!("tops {tp} at {} and {tq} at {} cannot be staged", q.id(p), q.id(qq)));
        }
    }
    let order = q.source_sink_order()?;
    let t0 = *tops.values().min().ok_or_else(|| EngineError::InvalidInput("empty quiver".into()))?;
    let tmax = *tops.values().max().unwrap();
    let mut seq = lift(&order, &sink_letters_an(t0 as usize - 1));
    for t in t0..tmax {
        let active: Vec<VertexId> = order.iter().filter(|v| tops[&v.node] > t).cloned().collect();
        let block: Vec<u32> = (1..=t).rev().collect();
        seq.extend(lift(&active, &block));
    }
    Ok(seq)
}

/// The collection C(l; m) together with its staged sequence and the
/// truncation (highest top) the sequence runs on.
pub fn c_collection(t: DynkinType, l: &[u32], m: u32) -> Result<(Vec<(String, Interval)>, MutationSequence, u32)> {
    let ivs = c_collection_intervals(t, l, m)?;
    let tops: HashMap<String, u32> = ivs.iter().map(|(v, i)| (v.clone(), i.hi)).collect();
    let q = dynkin_quiver(t);
    let seq = staged_letters_sequence(&q, &tops)?;
    let top = tops.values().copied().max().unwrap();
    Ok((ivs, MutationSequence::new(seq, Provenance::CCollection), top))
}

/// g-vectors (quiver data only) after `seq`, keyed by vertex, over the
/// vertices of `q`.
pub fn g_vectors_after(q: &Quiver, seq: &[VertexId]) -> Result<Vec<Vec<i64>>> {
    run_framed(q, seq, |_, _, _| Ok(()))?.g_columns()
}

/// The vector e_{(node,hi)} - e_{(node,lo)} over the vertices of `q`, with
/// level 0 standing for the constant 1.
pub fn kr_gvector(q: &Quiver, node: &str, hi: u32, lo: u32) -> Result<Vec<i64>> {
    let mut g = vec![0i64; q.n()];
    g[q.require(&VertexId::at(node, hi))?] += 1;
    if lo >= 1 {
        g[q.require(&VertexId::at(node, lo))?] -= 1;
    }
    Ok(g)
}

/// Outcome of running an interval sequence on its truncation.
#[derive(Clone, Debug)]
pub struct CollectionRun {
    pub quiver: Quiver,
    pub kind: SequenceKind,
    pub gvectors: Vec<Vec<i64>>,
}

impl CollectionRun {
    pub fn contains(&self, g: &[i64]) -> bool {
        self.gvectors.iter().any(|x| x == g)
    }
}

/// Runs `seq` on Q⊠A_levels with the top level frozen.
pub fn run_on_truncation(q: &Quiver, levels: u32, seq: &[VertexId]) -> Result<CollectionRun> {
    let p = product_with_line(q, levels as usize, Some(levels))?;
    let report = classify_sequence(&p, seq)?;
    let gvectors = g_vectors_after(&p, seq)?;
    Ok(CollectionRun { quiver: p, kind: report.kind, gvectors })
}

/// True when the sequence stays green on the truncation.
pub fn is_green(kind: SequenceKind) -> bool {
    matches!(kind, SequenceKind::Green | SequenceKind::MaximalGreen)
}

/// Product formula check: evaluate at all ones.
pub fn dimension(p: &LaurentPoly) -> BigInt {
    p.evaluate_all_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse_poly;

    #[test]
    fn t_variable_conversion() {
        let p = parse_poly("x.v1.3*x.v1.1^-1").unwrap();
        assert_eq!(to_t_variables(&p).unwrap(), parse_poly("t.v1.2*t.v1.3").unwrap());
        assert_eq!(to_t_variables(&parse_poly("x.v1.1").unwrap()).unwrap(), parse_poly("t.v1.1").unwrap());
        assert_eq!(to_t_variables(&parse_poly("7").unwrap()).unwrap(), parse_poly("7").unwrap());
        assert!(to_t_variables(&parse_poly("x.3").unwrap()).is_err());
        let q = parse_poly("t.v2.4 + t.v2.3^-1*t.v1.1").unwrap();
        assert_eq!(to_t_variables(&from_t_variables(&q).unwrap()).unwrap(), q);
    }

    #[test]
    fn sl2_fundamental() {
        let c = hl_sweep_character(DynkinType::a(1), 2, 1, "1", 3).unwrap();
        assert_eq!(c.poly, parse_poly("t.v1.3 + t.v1.2^-1").unwrap());
        let m = mgs_character(DynkinType::a(1), 1, 3, "1").unwrap();
        assert_eq!(m.poly, c.poly);
        let s = sl2_closed_form(1, 2).unwrap();
        assert_eq!(s.poly, parse_poly("Y.q3 + Y.q2^-1").unwrap());
        assert_eq!(sl2_y_to_t(&s.poly).unwrap(), c.poly);
    }

    #[test]
    fn depth_and_argument_errors() {
        assert!(matches!(hl_sweep_character(DynkinType::a(2), 2, 2, "1", 3), Err(EngineError::DepthViolation(_))));
        assert!(hl_sweep_character(DynkinType::a(2), 0, 2, "1", 5).is_err());
        assert!(mgs_character(DynkinType::a(2), 0, 5, "1").is_err());
        assert!(mgs_character(DynkinType::a(2), 1, 5, "3").is_err());
    }

    #[test]
    fn nested_example() {
        let n = IntervalCollection::from_pairs(&[(3, 4), (2, 5)]).unwrap();
        assert_eq!(nested_letters(&n).unwrap(), vec![1, 2, 1, 3, 2, 1, 4]);
        let bad = IntervalCollection::from_pairs(&[(2, 4), (3, 5)]).unwrap();
        assert!(nested_letters(&bad).is_err());
        let single = IntervalCollection::from_pairs(&[(2, 4)]).unwrap();
        assert_eq!(nested_letters(&single).unwrap(), sink_letters_an(3));
    }

    #[test]
    fn nested_example_gvectors() {
        let n = IntervalCollection::from_pairs(&[(3, 4), (2, 5)]).unwrap();
        let q = dynkin_quiver(DynkinType::a(1));
        let seq = nested_sequence(&n, &q).unwrap();
        let run = run_on_truncation(&q, 5, &seq.steps).unwrap();
        assert!(is_green(run.kind));
        assert!(run.contains(&kr_gvector(&run.quiver, "1", 4, 2).unwrap()));
        assert!(run.contains(&kr_gvector(&run.quiver, "1", 5, 1).unwrap()));
    }

    #[test]
    fn post_prefix_supports_single_block() {
        let q = dynkin_quiver(DynkinType::a(1));
        let n = IntervalCollection::from_pairs(&[(3, 4), (2, 5)]).unwrap();
        let s = post_prefix_supports(&n, &q).unwrap();
        assert_eq!(s.len(), 1);
        assert!(non_nested_pair(&s).is_none());
    }

    #[test]
    fn post_prefix_supports_cross_blocks() {
        let q = dynkin_quiver(DynkinType::a(1));
        let n = IntervalCollection::from_pairs(&[(5, 9), (4, 12)]).unwrap();
        let s = post_prefix_supports(&n, &q).unwrap();
        let (a, b) = non_nested_pair(&s).unwrap();
        assert_eq!((a.first(), a.last()), (Some(&1), Some(&9)));
        assert_eq!((b.first(), b.last()), (Some(&2), Some(&10)));
    }

    #[test]
    fn general_position_examples() {
        let c = |p: &[(u32, u32)]| IntervalCollection::from_pairs(p).unwrap();
        assert!(general_position(&c(&[(1, 3)]), &c(&[(10, 12)]), 4));
        assert!(general_position(&c(&[(3, 4)]), &c(&[(2, 5)]), 4));
        assert!(!general_position(&c(&[(2, 5)]), &c(&[(4, 8)]), 4));
        assert!(general_position(&c(&[(10, 12)]), &c(&[(1, 3)]), 4));
    }

    #[test]
    fn qstrings() {
        assert_eq!(qstring(0, 2), vec![-1, 1]);
        assert!(qstring_general_position(&[(0, 2), (4, 1)]));
        assert!(qstring_general_position(&[(0, 2), (0, 2)]));
        assert!(!qstring_general_position(&[(0, 2), (2, 2)]));
        assert!(qstring_general_position(&[(0, 3), (0, 1)]));
    }

    #[test]
    fn collection_shapes() {
        let a3 = c_collection_intervals(DynkinType::a(3), &[2, 2, 2], 3).unwrap();
        let ivs: Vec<(u32, u32)> = a3.iter().map(|(_, i)| (i.lo, i.hi)).collect();
        assert_eq!(ivs, vec![(2, 4), (2, 5), (2, 5)]);
        let e6 = c_collection_intervals(DynkinType::e(6), &[6, 7, 8, 9, 10, 11], 12).unwrap();
        let ivs: Vec<(u32, u32)> = e6.iter().map(|(_, i)| (i.lo, i.hi)).collect();
        assert_eq!(ivs, vec![(6, 12), (7, 13), (8, 13), (9, 13), (10, 14), (11, 14)]);
        assert!(c_collection_intervals(DynkinType::a(3), &[2, 2, 2], 2).is_err());
        assert!(c_collection_intervals(DynkinType::a(3), &[1, 2, 2], 3).is_err());
        assert!(c_collection_intervals(DynkinType::a(3), &[5, 2, 2], 3).is_err());
    }

    #[test]
    fn distinct_left_ends_are_not_nested() {
        for (t, m) in [(DynkinType::a(4), 4), (DynkinType::d(5), 5), (DynkinType::e(6), 8)] {
            let h = t.coxeter_number() as u32;
            let l: Vec<u32> = (0..t.rank as u32).map(|i| h.div_ceil(2) + i).collect();
            let m = m.max(l[l.len() - 1]);
            let ivs = c_collection_intervals(t, &l, m).unwrap();
            let coll = IntervalCollection::new(ivs.into_iter().map(|(_, i)| i).collect());
            assert!(!coll.is_nested(), "{t}");
        }
    }

    #[test]
    fn sl2_closed_form_shape() {
        for r in 1..5 {
            assert_eq!(sl2_closed_form(r, 3).unwrap().poly.len(), r as usize + 1);
        }
        assert!(sl2_closed_form(0, 1).is_err());
    }

    #[test]
    fn dominant_monomial_of_fundamental() {
        let c = mgs_character(DynkinType::a(2), 1, 4, "1").unwrap();
        assert!(!c.truncated);
        let dom = dominant_monomials(&c.poly);
        assert_eq!(dom, vec![c.module.dominant_monomial()]);
        assert_eq!(dimension(&c.poly), BigInt::from(3));
    }

    #[test]
    fn truncation_flag_is_sharp() {
        let t = DynkinType::a(3);
        let full = mgs_character(t, 1, 3, "1").unwrap();
        assert!(!full.truncated);
        assert_eq!(dimension(&full.poly), BigInt::from(4));
        let cut = mgs_character(t, 1, 2, "1").unwrap();
        assert!(cut.truncated);
        assert!(dimension(&cut.poly) < BigInt::from(4));
        assert_eq!(hl_sweep_character(t, 1, 1, "1", 2).unwrap().poly, cut.poly);
    }

    #[test]
    fn renaming_table_parity() {
        let q = dynkin_quiver(DynkinType::a(3));
        let table = y_renaming_table(&q, 2);
        assert!(table.contains(&("t.v2.1".to_string(), "Y.2.q0".to_string())));
        assert!(table.contains(&("t.v1.2".to_string(), "Y.1.q-3".to_string())));
    }

    #[test]
    fn shifted_characters_match_direct_runs() {
        for t in [DynkinType::a(1), DynkinType::a(2), DynkinType::a(3), DynkinType::d(4)] {
            let node = if t.rank >= 2 { "2" } else { "1" };
            let d0 = (t.coxeter_number() as u32).div_ceil(2);
            for k in 1..=2 {
                for extra in 1..=2 {
                    let right = k + d0 + extra;
                    if t.family == Family::D && (k, extra) != (1, 1) {
                        continue;
                    }
                    let direct = mgs_character(t, k, right, node).unwrap();
                    for route in [CharacterRoute::Sweep, CharacterRoute::Mgs] {
                        let c = kr_character(t, node, k, right, route).unwrap();
                        assert_eq!(c.poly, direct.poly, "{t} k={k} right={right} {route:?}");
                        assert_eq!(c.module, direct.module);
                        assert!(!c.truncated);
                    }
                }
            }
        }
    }
}
