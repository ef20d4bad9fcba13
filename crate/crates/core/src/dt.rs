//! Cluster Donaldson-Thomas transformations.

use serde_json::json;

use crate::error::{invalid, EngineError, Result};
use crate::greenseq::{classify_sequence, lift, sink_letters_an, source_mgs, MutationSequence, Provenance};
use crate::krchar::{from_t_variables, hl_sweep_character, sl2_closed_form, sl2_y_to_t};
use crate::laurent::{LaurentPoly, Monomial};
use crate::quiver::{dynkin_quiver, product_with_line, DynkinType, Family, Quiver, VertexId};
use crate::seed::{x_poly, xvar, Seed};

/// Image of every initial cluster variable, in quiver vertex order.
#[derive(Clone, Debug)]
pub struct DTMap {
    pub quiver: Quiver,
    pub images: Vec<LaurentPoly>,
}

impl DTMap {
    pub fn image(&self, v: &VertexId) -> Result<&LaurentPoly> {
        Ok(&self.images[self.quiver.require(v)?])
    }

    pub fn to_json(&self) -> serde_json::Value {
        let m: serde_json::Map<String, serde_json::Value> =
            self.quiver.ids().iter().zip(&self.images).map(|(v, p)| (v.to_string(), p.to_json())).collect();
        json!({ "images": m })
    }
}

impl PartialEq for DTMap {
    fn eq(&self, o: &DTMap) -> bool {
        self.quiver.ids() == o.quiver.ids() && self.images == o.images
    }
}

/// The base quiver and level count when `q` is Q'⊠A_L with exactly the top
/// level frozen.
pub fn as_product(q: &Quiver) -> Option<(Quiver, usize)> {
    let levels = q.ids().iter().map(|v| v.level).collect::<Option<Vec<u32>>>()?;
    let top = *levels.iter().max()?;
    let base_ids: Vec<VertexId> = q.ids().iter().filter(|v| v.level == Some(1)).cloned().collect();
    let base = q.restrict(&base_ids).ok()?;
    let nodes: Vec<VertexId> = base.ids().iter().map(|v| VertexId::plain(&v.node)).collect();
    let arrows: Vec<(VertexId, VertexId, i64)> =
        base.arrows().into_iter().map(|(a, b, m)| (nodes[a].clone(), nodes[b].clone(), m)).collect();
    let base = Quiver::new(nodes.into_iter().map(|v| (v, false)).collect(), &arrows).ok()?;
    let rebuilt = product_with_line(&base, top as usize, Some(top)).ok()?;
    (rebuilt.ids().len() == q.n() && reorder(&rebuilt, rebuilt.ids())? == reorder(q, rebuilt.ids())?
        && rebuilt.ids().iter().all(|v| q.is_frozen(q.index_of(v).unwrap()) == (v.level == Some(top))))
    .then_some((base, top as usize))
}

fn reorder(q: &Quiver, ids: &[VertexId]) -> Option<Vec<Vec<i64>>> {
    let idx: Vec<usize> = ids.iter().map(|v| q.index_of(v)).collect::<Option<_>>()?;
    Some(idx.iter().map(|&i| idx.iter().map(|&j| q.b(i, j)).collect()).collect())
}

/// A reddening sequence the engine knows for `q`: the source sequence for
/// acyclic quivers, Sc(Q')×S_{A_{L-1}} for Q'⊠A_L with the top level frozen.
pub fn default_reddening(q: &Quiver) -> Result<MutationSequence> {
    let mutable: Vec<VertexId> = q.mutable_indices().into_iter().map(|i| q.id(i).clone()).collect();
    if q.restrict(&mutable)?.is_acyclic() {
        return source_mgs(q);
    }
    if let Some((base, levels)) = as_product(q) {
        let seq = lift(&base.source_sink_order()?, &sink_letters_an(levels - 1));
        return Ok(MutationSequence::new(seq, Provenance::SourceSink));
    }
    Err(EngineError::Unsupported("no known reddening sequence for this quiver".into()))
}

/// DT(x)_v is the final cluster variable with g-vector -e_v; frozen
/// variables are fixed.
pub fn dt_with_sequence(q: &Quiver, seq: &[VertexId]) -> Result<DTMap> {
    let report = classify_sequence(q, seq)?;
    let Some(sigma) = report.sigma else {
        return invalid(format!("sequence {} is not reddening", crate::quiver::format_sequence(seq)));
    };
    let s = Seed::plain(q.clone()).apply_sequence(seq)?;
    let mut images: Vec<LaurentPoly> = q.ids().iter().map(x_poly).collect();
    for (u, v) in sigma {
        images[q.require(&v)?] = s.x(&u)?.clone();
    }
    Ok(DTMap { quiver: q.clone(), images })
}

pub fn dt_transform(q: &Quiver) -> Result<DTMap> {
    let seq = default_reddening(q)?;
    dt_with_sequence(q, &seq.steps)
}

/// DT(x_a) = (x_{n+1}/x_a)(1 + y_a + y_a y_{a+1} + … + y_a⋯y_n) with
/// y_j = x_{j-1}/x_{j+1} and x_0 = 1, on the line 1 ← 2 ← … ← n+1. With
/// `iced` false the line has n vertices and x_{n+1} = 1.
pub fn dt_closed_form_a(n: usize, iced: bool) -> Result<DTMap> {
    if n == 0 {
        return invalid("closed form needs n >= 1");
    }
    let q = if iced { crate::quiver::iced_line(n)? } else { crate::quiver::line_quiver(n)? };
    let x = |j: usize| -> Vec<(crate::laurent::Var, i32)> {
        if j == 0 || (j == n + 1 && !iced) {
            vec![]
        } else {
            vec![(xvar(&VertexId::plain(j.to_string())), 1)]
        }
    };
    let inv = |v: Vec<(crate::laurent::Var, i32)>| v.into_iter().map(|(a, e)| (a, -e)).collect::<Vec<_>>();
    let mut images: Vec<LaurentPoly> = q.ids().iter().map(x_poly).collect();
    for a in 1..=n {
        let lead = Monomial::from_exps(x(n + 1).into_iter().chain(inv(x(a))));
        let mut sum = LaurentPoly::one();
        let mut acc = Monomial::one();
        for j in a..=n {
            acc = acc.mul(&Monomial::from_exps(x(j - 1).into_iter().chain(inv(x(j + 1)))));
            sum = sum.add(&LaurentPoly::monomial(acc.clone()));
        }
        images[q.require(&VertexId::plain(a.to_string()))?] = sum.mul_monomial(&lead);
    }
    Ok(DTMap { quiver: q, images })
}

/// DT of Q⊠A_{m+1} (top level frozen) from KR q-characters:
/// x_{v,j} ↦ χ_q(W^{(v)}_{m+1-j, m+1}) written in x-variables.
pub fn dt_via_qcharacters(t: DynkinType, levels: u32) -> Result<DTMap> {
    if levels == 0 {
        return invalid("need at least one level");
    }
    let base = dynkin_quiver(t);
    let q = product_with_line(&base, levels as usize, Some(levels))?;
    let mut images: Vec<LaurentPoly> = q.ids().iter().map(x_poly).collect();
    for v in base.ids() {
        for j in 1..levels {
            let chi = if t.family == Family::A && t.rank == 1 {
                sl2_y_to_t(&sl2_closed_form(levels - j, j)?.poly)?
            } else {
                hl_sweep_character(t, j, levels - j, &v.node, levels)?.poly
            };
            images[q.require(&VertexId::at(&v.node, j))?] = from_t_variables(&chi)?;
        }
    }
    Ok(DTMap { quiver: q, images })
}

/// The double Bruhat cell case m+1 = h/2; odd Coxeter numbers have no such
/// truncation.
pub fn double_bruhat_dt(t: DynkinType) -> Result<DTMap> {
    let h = t.coxeter_number();
    if h % 2 == 1 {
        return Err(EngineError::Unsupported(format!("{t} has odd Coxeter number {h}")));
    }
    dt_via_qcharacters(t, (h / 2) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse_poly;
    use crate::quiver::line_quiver;

    #[test]
    fn a1_unfrozen() {
        let q = line_quiver(1).unwrap();
        let dt = dt_transform(&q).unwrap();
        assert_eq!(dt.images[0], parse_poly("2*x.1^-1").unwrap());
        assert_eq!(dt, dt_closed_form_a(1, false).unwrap());
    }

    #[test]
    fn iced_a2() {
        let dt = dt_closed_form_a(1, true).unwrap();
        assert_eq!(dt.image(&"1".parse().unwrap()).unwrap(), &parse_poly("x.2*x.1^-1 + x.1^-1").unwrap());
        assert_eq!(dt.image(&"2".parse().unwrap()).unwrap(), &parse_poly("x.2").unwrap());
        assert_eq!(dt_transform(&dt.quiver).unwrap(), dt);
    }

    #[test]
    fn product_detection() {
        let q = product_with_line(&dynkin_quiver(DynkinType::a(3)), 3, Some(3)).unwrap();
        let (base, l) = as_product(&q).unwrap();
        assert_eq!(l, 3);
        assert_eq!(base.n(), 3);
        let open = product_with_line(&dynkin_quiver(DynkinType::a(3)), 3, None).unwrap();
        assert!(as_product(&open).is_none());
    }

    #[test]
    fn rejects_non_reddening_and_odd_h() {
        let q = line_quiver(2).unwrap();
        assert!(dt_with_sequence(&q, &["1".parse().unwrap()]).is_err());
        assert!(matches!(double_bruhat_dt(DynkinType::a(2)), Err(EngineError::Unsupported(_))));
    }

    #[test]
    fn json_shape() {
        let j = dt_closed_form_a(2, true).unwrap().to_json();
        assert!(j["images"]["3"].is_object() || j["images"]["3"].is_array() || j["images"]["3"].is_string());
    }
}
