//! Green and red vertices, classification of mutation sequences, BPS charges
//! and the sequence families used throughout the engine.

use std::fmt;

use serde_json::json;

use crate::error::{invalid, invariant, EngineError, Result};
use crate::quiver::{line_quiver, product_with_line, Quiver, VertexId};
use crate::seed::{Color, Framing};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Provenance {
    Manual,
    SinkAn,
    HlAn,
    SourceMgs,
    SourceSink,
    Nested,
    Combined,
    CCollection,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Manual => "manual",
            Provenance::SinkAn => "sink_An",
            Provenance::HlAn => "hl_An",
            Provenance::SourceMgs => "source_mgs",
            Provenance::SourceSink => "source_sink",
            Provenance::Nested => "nested_N",
            Provenance::Combined => "combined",
            Provenance::CCollection => "c_collection",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MutationSequence {
    pub steps: Vec<VertexId>,
    pub provenance: Provenance,
}

impl MutationSequence {
    pub fn new(steps: Vec<VertexId>, provenance: Provenance) -> MutationSequence {
        MutationSequence { steps, provenance }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl fmt::Display for MutationSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::quiver::format_sequence(&self.steps))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SequenceKind {
    Green,
    Reddening,
    MaximalGreen,
    Neither,
}

impl SequenceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SequenceKind::Green => "green",
            SequenceKind::Reddening => "reddening",
            SequenceKind::MaximalGreen => "maximal_green",
            SequenceKind::Neither => "neither",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SequenceReport {
    pub kind: SequenceKind,
    /// Mutable vertices of the initial quiver; c-vectors are over this basis.
    pub basis: Vec<VertexId>,
    pub steps: Vec<VertexId>,
    pub step_green: Vec<bool>,
    pub sigma: Option<Vec<(VertexId, VertexId)>>,
    pub bps: Option<Vec<Vec<i64>>>,
    /// Final c-vectors of the mutable vertices, in basis order.
    pub final_c: Vec<Vec<i64>>,
}

impl SequenceReport {
    pub fn to_json(&self) -> serde_json::Value {
        let sigma = self.sigma.as_ref().map(|s| {
            s.iter().map(|(a, b)| (a.to_string(), json!(b.to_string()))).collect::<serde_json::Map<_, _>>()
        });
        let c: serde_json::Map<String, serde_json::Value> =
            self.basis.iter().zip(&self.final_c).map(|(v, c)| (v.to_string(), json!(c))).collect();
        json!({
            "kind": self.kind.as_str(),
            "length": self.steps.len(),
            "sequence": crate::quiver::format_sequence(&self.steps),
            "basis": self.basis.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "step_green": self.step_green,
            "sigma": sigma,
            "bps": self.bps,
            "c_vectors": c,
        })
    }

    pub fn is_maximal_green(&self) -> bool {
        self.kind == SequenceKind::MaximalGreen
    }
}

/// Runs the framed quiver along a sequence, calling `visit` before each step
/// with the framing and the index to be mutated.
pub fn run_framed<F>(q: &Quiver, seq: &[VertexId], mut visit: F) -> Result<Framing>
where
    F: FnMut(usize, &Framing, usize) -> Result<()>,
{
    let mut fr = Framing::new(q);
    for (step, v) in seq.iter().enumerate() {
        let k = q.index_of(v).ok_or_else(|| EngineError::InvalidInput(format!("step {step}: unknown vertex {v}")))?;
        if q.is_frozen(k) {
            return Err(EngineError::NotMutable { vertex: v.to_string(), step });
        }
        visit(step, &fr, k)?;
        fr.mutate(k);
    }
    Ok(fr)
}

fn restrict(c: &[i64], idx: &[usize]) -> Vec<i64> {
    idx.iter().map(|&i| c[i]).collect()
}

/// σ with c_v = -e_{σ(v)}; checks that the c-matrix is minus a permutation.
fn sigma_of(q: &Quiver, fr: &Framing) -> Result<Vec<(VertexId, VertexId)>> {
    let mutable = q.mutable_indices();
    let mut seen = vec![false; q.n()];
    let mut out = Vec::new();
    for &v in &mutable {
        let c = fr.c_vector(v);
        let nz: Vec<usize> = (0..c.len()).filter(|&i| c[i] != 0).collect();
        if nz.len() != 1 || c[nz[0]] != -1 || q.is_frozen(nz[0]) || seen[nz[0]] {
            return invariant(format!("final c-matrix is not minus a permutation matrix (vertex {})", q.id(v)));
        }
        seen[nz[0]] = true;
        out.push((q.id(v).clone(), q.id(nz[0]).clone()));
    }
    Ok(out)
}

pub fn classify_sequence(q: &Quiver, seq: &[VertexId]) -> Result<SequenceReport> {
    let mutable = q.mutable_indices();
    let mut step_green = Vec::with_capacity(seq.len());
    let mut bps = Vec::with_capacity(seq.len());
    let fr = run_framed(q, seq, |_, fr, k| {
        let color = fr.color(k)?;
        step_green.push(color == Color::Green);
        bps.push(restrict(&fr.c_vector(k), &mutable));
        Ok(())
    })?;
    let mut all_red = true;
    for &v in &mutable {
        if fr.color(v)? == Color::Green {
            all_red = false;
        }
    }
    let green = step_green.iter().all(|&g| g);
    let kind = match (green, all_red) {
        (true, true) => SequenceKind::MaximalGreen,
        (true, false) => SequenceKind::Green,
        (false, true) => SequenceKind::Reddening,
        (false, false) => SequenceKind::Neither,
    };
    let sigma = if all_red { Some(sigma_of(q, &fr)?) } else { None };
    Ok(SequenceReport {
        kind,
        basis: mutable.iter().map(|&i| q.id(i).clone()).collect(),
        steps: seq.to_vec(),
        step_green,
        sigma,
        bps: green.then_some(bps),
        final_c: mutable.iter().map(|&v| restrict(&fr.c_vector(v), &mutable)).collect(),
    })
}

/// c-vector at each mutated vertex just before its mutation. Fails at the
/// first red step.
pub fn bps_charges(q: &Quiver, seq: &[VertexId]) -> Result<Vec<Vec<i64>>> {
    let mutable = q.mutable_indices();
    let mut out = Vec::with_capacity(seq.len());
    run_framed(q, seq, |step, fr, k| {
        if fr.color(k)? != Color::Green {
            return invalid(format!("step {step}: vertex {} is red", q.id(k)));
        }
        out.push(restrict(&fr.c_vector(k), &mutable));
        Ok(())
    })?;
    Ok(out)
}

/// Colors of the mutable vertices after applying `seq`.
pub fn colors_after(q: &Quiver, seq: &[VertexId]) -> Result<Vec<(VertexId, Color)>> {
    let fr = run_framed(q, seq, |_, _, _| Ok(()))?;
    q.mutable_indices().into_iter().map(|v| Ok((q.id(v).clone(), fr.color(v)?))).collect()
}

/// Source maximal green sequence of an acyclic quiver. Each round mutates,
/// in increasing id order, the sources of the subquiver spanned by the green
/// vertices.
pub fn source_mgs(q: &Quiver) -> Result<MutationSequence> {
    let mutable = q.mutable_indices();
    let core = q.restrict(&mutable.iter().map(|&i| q.id(i).clone()).collect::<Vec<_>>())?;
    if !core.is_acyclic() {
        return invalid("source sequences need an acyclic quiver");
    }
    let mut fr = Framing::new(q);
    let mut steps = Vec::new();
    loop {
        let green: Vec<usize> = mutable.iter().copied().filter(|&v| matches!(fr.color(v), Ok(Color::Green))).collect();
        if green.is_empty() {
            break;
        }
        let is_source = |fr: &Framing, v: usize, green: &[usize]| green.iter().all(|&u| fr.framed().b(u, v) <= 0);
        let layer: Vec<usize> = green.iter().copied().filter(|&v| is_source(&fr, v, &green)).collect();
        if layer.is_empty() {
            return invariant("green subquiver has no source");
        }
        for v in layer {
            let still_green: Vec<usize> = mutable.iter().copied().filter(|&u| matches!(fr.color(u), Ok(Color::Green))).collect();
            if still_green.contains(&v) && is_source(&fr, v, &still_green) {
                fr.mutate(v);
                steps.push(q.id(v).clone());
            }
        }
    }
    Ok(MutationSequence::new(steps, Provenance::SourceMgs))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LocalShape {
    Source,
    Sink,
}

/// True when every step mutates a green vertex that is a source (or sink)
/// of the subquiver spanned by the green mutable vertices.
pub fn is_local_sequence(q: &Quiver, seq: &[VertexId], shape: LocalShape) -> Result<bool> {
    let mutable = q.mutable_indices();
    let mut ok = true;
    run_framed(q, seq, |_, fr, k| {
        let green: Vec<usize> = mutable.iter().copied().filter(|&v| matches!(fr.color(v), Ok(Color::Green))).collect();
        let local = green.contains(&k)
            && green.iter().all(|&u| match shape {
                LocalShape::Source => fr.framed().b(u, k) <= 0,
                LocalShape::Sink => fr.framed().b(k, u) <= 0,
            });
        ok &= local;
        Ok(())
    })?;
    Ok(ok)
}

/// 1, 2,1, 3,2,1, …, n,…,1.
pub fn sink_letters_an(n: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for top in 1..=n as u32 {
        out.extend((1..=top).rev());
    }
    out
}

/// 1..n, 1..n-1, …, 1.
pub fn hl_letters_an(n: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for top in (1..=n as u32).rev() {
        out.extend(1..=top);
    }
    out
}

fn plain_steps(letters: &[u32]) -> Vec<VertexId> {
    letters.iter().map(|&i| VertexId::plain(i)).collect()
}

pub fn sink_sequence_an(n: usize) -> MutationSequence {
    MutationSequence::new(plain_steps(&sink_letters_an(n)), Provenance::SinkAn)
}

pub fn hl_sequence_an(n: usize) -> MutationSequence {
    MutationSequence::new(plain_steps(&hl_letters_an(n)), Provenance::HlAn)
}

/// Sc(Q): the sources of an alternating quiver followed by its sinks.
pub fn source_order(q: &Quiver) -> Result<Vec<VertexId>> {
    q.source_sink_order()
}

/// Sc(Q)×letters: for each level letter emit (v, letter) for v in `order`.
pub fn lift(order: &[VertexId], letters: &[u32]) -> Vec<VertexId> {
    let mut out = Vec::with_capacity(order.len() * letters.len());
    for &i in letters {
        for v in order {
            out.push(VertexId::at(&v.node, i));
        }
    }
    out
}

/// Source-sink sequence Sc(Q)×Sk(D) for a sink sequence of the line quiver D.
pub fn source_sink_sequence(q: &Quiver, sink_seq: &[VertexId], d: &Quiver) -> Result<MutationSequence> {
    let order = q.source_sink_order()?;
    let mut letters = Vec::with_capacity(sink_seq.len());
    for v in sink_seq {
        d.require(v)?;
        match (v.level, v.node_number()) {
            (None, Some(i)) => letters.push(i),
            _ => return invalid(format!("sink sequence letter {v} is not an integer vertex")),
        }
    }
    Ok(MutationSequence::new(lift(&order, &letters), Provenance::SourceSink))
}

/// True when every c-vector of every mutable vertex stays inside its own
/// fiber {v}×levels at every step.
pub fn check_level_property(qxa: &Quiver, seq: &[VertexId]) -> Result<bool> {
    if qxa.ids().iter().any(|v| v.level.is_none()) {
        return invalid("level property needs a product quiver");
    }
    let mutable = qxa.mutable_indices();
    let fiber_ok = |fr: &Framing| {
        mutable.iter().all(|&v| {
            let c = fr.c_vector(v);
            let node = &qxa.id(v).node;
            c.iter().enumerate().all(|(w, &e)| e == 0 || &qxa.id(w).node == node)
        })
    };
    let mut ok = true;
    let fr = run_framed(qxa, seq, |_, fr, _| {
        if ok && !fiber_ok(fr) {
            ok = false;
        }
        Ok(())
    })?;
    Ok(ok && fiber_ok(&fr))
}

/// Checks the truncation chain for Q⊠A_∞: for every L up to `max_level`
/// the lifted sink sequence is a maximal green sequence of Q⊠A_L and the
/// sequence at L−1 is a prefix of the one at L.
pub fn check_truncation_chain(q: &Quiver, max_level: usize) -> Result<bool> {
    let order = q.source_sink_order()?;
    let mut prev: Vec<VertexId> = Vec::new();
    for l in 1..=max_level {
        let p = product_with_line(q, l, None)?;
        let s = lift(&order, &sink_letters_an(l));
        if !s.starts_with(&prev) || !classify_sequence(&p, &s)?.is_maximal_green() {
            return Ok(false);
        }
        prev = s;
    }
    Ok(true)
}

/// The sink-oriented A_n line quiver.
pub fn sink_an(n: usize) -> Result<Quiver> {
    line_quiver(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::{dynkin_quiver, parse_sequence, DynkinType};

    fn seq(s: &str) -> Vec<VertexId> {
        parse_sequence(s).unwrap()
    }

    #[test]
    fn sequence_families() {
        assert_eq!(sink_sequence_an(2).to_string(), "1,2,1");
        assert_eq!(hl_sequence_an(3).to_string(), "1,2,3,1,2,1");
        assert_eq!(sink_sequence_an(1).to_string(), "1");
        assert_eq!(hl_sequence_an(1).to_string(), "1");
    }

    #[test]
    fn a2_sink_sequence() {
        let r = classify_sequence(&sink_an(2).unwrap(), &seq("1,2,1")).unwrap();
        assert_eq!(r.kind, SequenceKind::MaximalGreen);
        assert_eq!(r.bps.unwrap(), vec![vec![1, 0], vec![1, 1], vec![0, 1]]);
        let sigma: Vec<(String, String)> = r.sigma.unwrap().iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        assert_eq!(sigma, vec![("1".into(), "2".into()), ("2".into(), "1".into())]);
    }

    #[test]
    fn empty_and_partial_sequences() {
        let q = sink_an(3).unwrap();
        let r = classify_sequence(&q, &[]).unwrap();
        assert_eq!(r.kind, SequenceKind::Green);
        assert!(r.sigma.is_none());
        assert_eq!(r.bps.unwrap().len(), 0);
        let r = classify_sequence(&q, &seq("1,1")).unwrap();
        assert_eq!(r.kind, SequenceKind::Neither);
        assert!(r.bps.is_none());
        assert!(bps_charges(&q, &seq("1,1")).is_err());
    }

    #[test]
    fn reddening_but_not_green() {
        // a red step followed by a maximal green sequence of the result
        let q = sink_an(1).unwrap();
        let r = classify_sequence(&q, &seq("1,1,1")).unwrap();
        assert_eq!(r.kind, SequenceKind::Reddening);
        assert!(r.sigma.is_some());
    }

    #[test]
    fn source_mgs_examples() {
        let a5 = dynkin_quiver(DynkinType::a(5));
        assert_eq!(source_mgs(&a5).unwrap().to_string(), "2,4,1,3,5");
        assert_eq!(source_mgs(&sink_an(2).unwrap()).unwrap().to_string(), "2,1");
        assert_eq!(source_mgs(&sink_an(1).unwrap()).unwrap().to_string(), "1");
        let cyc = Quiver::new(
            (1..=3).map(|i| (VertexId::plain(i), false)).collect(),
            &[(VertexId::plain(1), VertexId::plain(2), 1), (VertexId::plain(2), VertexId::plain(3), 1), (VertexId::plain(3), VertexId::plain(1), 1)],
        )
        .unwrap();
        assert!(source_mgs(&cyc).is_err());
    }

    #[test]
    fn source_sink_example() {
        let q = line_quiver(2).unwrap();
        let d = line_quiver(3).unwrap();
        let s = source_sink_sequence(&q, &sink_sequence_an(3).steps, &d).unwrap();
        assert_eq!(s.to_string(), "v2.1,v1.1,v2.2,v1.2,v2.1,v1.1,v2.3,v1.3,v2.2,v1.2,v2.1,v1.1");
        let single = dynkin_quiver(DynkinType::a(1));
        let s = source_sink_sequence(&single, &sink_sequence_an(3).steps, &d).unwrap();
        assert_eq!(s.to_string(), "v1.1,v1.2,v1.1,v1.3,v1.2,v1.1");
    }

    #[test]
    fn level_property_small() {
        let q = dynkin_quiver(DynkinType::a(3));
        let p = product_with_line(&q, 4, None).unwrap();
        let s = lift(&q.source_sink_order().unwrap(), &sink_letters_an(4));
        assert!(check_level_property(&p, &s).unwrap());
        assert!(check_level_property(&p, &[]).unwrap());
        assert!(check_level_property(&line_quiver(2).unwrap(), &[]).is_err());
    }

    #[test]
    fn truncation_chain() {
        assert!(check_truncation_chain(&dynkin_quiver(DynkinType::a(3)), 3).unwrap());
    }
}
