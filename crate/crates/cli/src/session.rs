//! Server-side mutation sessions: a framed quiver, its trail and an undo stack.

use serde_json::{json, Value};

use clusterkr_core::greenseq::classify_sequence;
use clusterkr_core::quiver::{dynkin_quiver, line_quiver, product_with_line};
use clusterkr_core::seed::{Color, Framing};
use clusterkr_core::{DynkinType, EngineError, Quiver, VertexId};

/// A rejected request, with a hint for the person clicking.
#[derive(Debug)]
pub struct SessionError {
    pub kind: &'static str,
    pub message: String,
    pub hint: Option<String>,
}

impl SessionError {
    pub fn to_json(&self) -> Value {
        json!({"error": {"kind": self.kind, "message": self.message}, "hint": self.hint})
    }
}

impl From<EngineError> for SessionError {
    fn from(e: EngineError) -> Self {
        SessionError { kind: e.kind(), message: e.to_string(), hint: None }
    }
}

/// Quivers the explorer offers by name:
/// `A5-alternating` (or just `A5`), `sink-A4`, and products such as
/// `A3alt⊠A3` or `A3alt-x-A3`. A trailing `-iced` freezes the top level.
pub fn preset(name: &str) -> Result<Quiver, SessionError> {
    let bad = || SessionError {
        kind: "invalid_input",
        message: format!("unknown preset `{name}`"),
        hint: Some("try A5-alternating, sink-A3, A3alt⊠A3 or A2alt-x-A3-iced".into()),
    };
    let (body, iced) = match name.strip_suffix("-iced") {
        Some(b) => (b, true),
        None => (name, false),
    };
    let dynkin = |s: &str| s.strip_suffix("-alternating").or_else(|| s.strip_suffix("alt")).unwrap_or(s).parse::<DynkinType>().map_err(|_| bad());
    if let Some(n) = body.strip_prefix("sink-A") {
        return n.parse().ok().and_then(|n| line_quiver(n).ok()).ok_or_else(bad);
    }
    if let Some((left, right)) = body.split_once('⊠').or_else(|| body.split_once("-x-")) {
        let levels: usize = right.strip_prefix('A').and_then(|l| l.parse().ok()).filter(|&l| l >= 1).ok_or_else(bad)?;
        return Ok(product_with_line(&dynkin_quiver(dynkin(left)?), levels, iced.then_some(levels as u32))?);
    }
    if iced {
        return Err(bad());
    }
    Ok(dynkin_quiver(dynkin(body)?))
}

#[derive(Clone, Debug)]
pub struct Session {
    initial: Quiver,
    current: Quiver,
    framing: Framing,
    trail: Vec<VertexId>,
    undo: Vec<(Quiver, Framing)>,
}

impl Session {
    pub fn new(q: Quiver) -> Session {
        Session { framing: Framing::new(&q), current: q.clone(), initial: q, trail: Vec::new(), undo: Vec::new() }
    }

    pub fn trail(&self) -> &[VertexId] {
        &self.trail
    }

    pub fn current(&self) -> &Quiver {
        &self.current
    }

    pub fn green(&self) -> Result<Vec<VertexId>, SessionError> {
        let mut out = Vec::new();
        for k in self.current.mutable_indices() {
            if self.framing.color(k)? == Color::Green {
                out.push(self.current.id(k).clone());
            }
        }
        Ok(out)
    }

    pub fn mutate(&mut self, vertex: &str) -> Result<(), SessionError> {
        let v: VertexId = vertex.parse().map_err(SessionError::from)?;
        let hint_list = |ids: Vec<VertexId>| ids.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
        let Some(k) = self.current.index_of(&v) else {
            let mutable = self.current.mutable_indices().into_iter().map(|i| self.current.id(i).clone()).collect();
            return Err(SessionError {
                kind: "unknown_vertex",
                message: format!("no vertex {v} in this quiver"),
                hint: Some(format!("mutable vertices: {}", hint_list(mutable))),
            });
        };
        if self.current.is_frozen(k) {
            return Err(SessionError {
                kind: "not_mutable",
                message: format!("{v} is frozen"),
                hint: Some(format!("frozen vertices cannot be mutated; green vertices: {}", hint_list(self.green()?))),
            });
        }
        self.undo.push((self.current.clone(), self.framing.clone()));
        self.current.mutate_in_place(k);
        self.framing.mutate(k);
        self.trail.push(v);
        log::debug!("session trail now {}", clusterkr_core::quiver::format_sequence(&self.trail));
        Ok(())
    }

    pub fn undo(&mut self) -> Result<(), SessionError> {
        let Some((q, f)) = self.undo.pop() else {
            return Err(SessionError { kind: "invalid_input", message: "nothing to undo".into(), hint: Some("the session is at its initial quiver".into()) });
        };
        self.current = q;
        self.framing = f;
        self.trail.pop();
        Ok(())
    }

    /// The same report `mgs verify` prints for the initial quiver and trail.
    pub fn report(&self) -> Result<Value, SessionError> {
        Ok(classify_sequence(&self.initial, &self.trail)?.to_json())
    }

    /// Levels along x and Dynkin nodes along y for products; a circle otherwise.
    fn layout(&self) -> Value {
        let q = &self.current;
        let mut pos = serde_json::Map::new();
        let product = q.ids().iter().all(|v| v.level.is_some() && v.node_number().is_some());
        for (i, v) in q.ids().iter().enumerate() {
            let (x, y) = if product {
                (v.level.unwrap() as f64, v.node_number().unwrap() as f64)
            } else {
                let a = std::f64::consts::TAU * i as f64 / q.n() as f64;
                (a.cos(), a.sin())
            };
            pos.insert(v.to_string(), json!([x, y]));
        }
        Value::Object(pos)
    }

    pub fn view(&self, id: &str) -> Result<Value, SessionError> {
        let q = &self.current;
        let mutable = q.mutable_indices();
        let mut vertices = Vec::with_capacity(q.n());
        for (k, v) in q.ids().iter().enumerate() {
            if q.is_frozen(k) {
                vertices.push(json!({"id": v.to_string(), "color": "frozen", "c_vector": null}));
            } else {
                let full = self.framing.c_vector(k);
                let c: Vec<i64> = mutable.iter().map(|&w| full[w]).collect();
                vertices.push(json!({"id": v.to_string(), "color": self.framing.color(k)?.as_str(), "c_vector": c}));
            }
        }
        Ok(json!({
            "id": id,
            "quiver": q.to_json(),
            "vertices": vertices,
            "c_basis": mutable.iter().map(|&i| self.initial.id(i).to_string()).collect::<Vec<_>>(),
            "trail": self.trail.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "green": self.green()?.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "can_undo": !self.undo.is_empty(),
            "layout": self.layout(),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(vs: Vec<VertexId>) -> Vec<String> {
        vs.iter().map(|v| v.to_string()).collect()
    }

    #[test]
    fn presets() {
        assert_eq!(preset("A5-alternating").unwrap().n(), 5);
        assert_eq!(preset("A5").unwrap(), preset("A5-alternating").unwrap());
        let p = preset("A3alt⊠A3").unwrap();
        assert_eq!(p.n(), 9);
        assert_eq!(p, preset("A3alt-x-A3").unwrap());
        assert_eq!(preset("A2alt-x-A3-iced").unwrap().frozen_indices().len(), 2);
        assert_eq!(preset("sink-A3").unwrap(), line_quiver(3).unwrap());
        assert!(preset("B3").is_err());
        assert!(preset("A3-iced").is_err());
    }

    #[test]
    fn green_source_flips_alone() {
        let mut s = Session::new(preset("A5-alternating").unwrap());
        assert_eq!(s.green().unwrap().len(), 5);
        let src = s.current().id(s.current().sources()[0]).to_string();
        s.mutate(&src).unwrap();
        let green = ids(s.green().unwrap());
        assert_eq!(green.len(), 4);
        assert!(!green.contains(&src));
    }

    #[test]
    fn undo_restores_the_initial_view() {
        let mut s = Session::new(preset("A3").unwrap());
        let before = s.view("x").unwrap();
        s.mutate("2").unwrap();
        assert_ne!(s.view("x").unwrap(), before);
        s.undo().unwrap();
        assert_eq!(s.view("x").unwrap(), before);
        assert!(s.undo().is_err());
    }

    #[test]
    fn frozen_vertices_are_refused_with_a_hint() {
        let mut s = Session::new(preset("A2alt-x-A3-iced").unwrap());
        let e = s.mutate("v1.3").unwrap_err();
        assert_eq!(e.kind, "not_mutable");
        assert!(e.hint.unwrap().contains("green"));
        assert!(s.trail().is_empty());
    }
}
