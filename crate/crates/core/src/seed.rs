//! Seeds: cluster variables attached to a quiver, with optional tracking of
//! the framed quiver (c-vectors, colors, g-vectors) and of principal
//! coefficients (F-polynomials).

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, invariant, EngineError, Result};
use crate::laurent::{Fraction, LaurentError, LaurentPoly, Monomial, Var};
use crate::quiver::{Quiver, VertexId};

pub fn xvar(v: &VertexId) -> Var {
    Var::new(&format!("x.{v}"))
}

pub fn yvar(v: &VertexId) -> Var {
    Var::new(&format!("y.{v}"))
}

pub fn x_poly(v: &VertexId) -> LaurentPoly {
    LaurentPoly::monomial(Monomial::var(xvar(v)))
}

fn is_family(v: Var, prefix: &str) -> bool {
    v.name().starts_with(prefix)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Color {
    Green,
    Red,
}

impl Color {
    pub fn as_str(&self) -> &'static str {
        match self {
            Color::Green => "green",
            Color::Red => "red",
        }
    }
}

/// The framed copy of a quiver in which every original vertex may be
/// mutated and only the companions are frozen. Original frozen vertices are
/// simply never mutated, so their rows still carry c-vector data.
#[derive(Clone, Debug)]
pub struct Framing {
    framed: Quiver,
    n: usize,
}

impl Framing {
    pub fn new(q: &Quiver) -> Framing {
        Framing { framed: q.unfrozen().frame(), n: q.n() }
    }

    /// Number of original vertices.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn framed(&self) -> &Quiver {
        &self.framed
    }

    pub fn mutate(&mut self, k: usize) {
        self.framed.mutate_in_place(k);
    }

    /// c-vector of original vertex `k` over all original vertices.
    pub fn c_vector(&self, k: usize) -> Vec<i64> {
        (0..self.n).map(|w| self.framed.b(k, self.n + w)).collect()
    }

    /// Columns are c-vectors.
    pub fn c_columns(&self) -> Vec<Vec<i64>> {
        (0..self.n).map(|k| self.c_vector(k)).collect()
    }

    pub fn color(&self, k: usize) -> Result<Color> {
        let c = self.c_vector(k);
        let pos = c.iter().any(|&e| e > 0);
        let neg = c.iter().any(|&e| e < 0);
        match (pos, neg) {
            (true, false) => Ok(Color::Green),
            (false, true) => Ok(Color::Red),
            _ => invariant(format!("c-vector {c:?} of {} is not sign-coherent", self.framed.id(k))),
        }
    }

    /// g-vectors as columns: G = (C^{-1})^T, with C taken over every
    /// original vertex.
    pub fn g_columns(&self) -> Result<Vec<Vec<i64>>> {
        let cols = self.c_columns();
        let n = self.n;
        // matrix with C[w][k] = cols[k][w]
        let c: Vec<Vec<i64>> = (0..n).map(|w| (0..n).map(|k| cols[k][w]).collect()).collect();
        let inv = invert(&c)?;
        // g_k = row k of C^{-1}
        Ok(inv)
    }
}

/// Exact inverse of an integer matrix that is unimodular; errors otherwise.
pub fn invert(m: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> = row.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else {
            return invariant("c-matrix is singular");
        };
        a.swap(col, p);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(pivot_row.iter()) {
                    *x = &*x - &f * y;
                }
            }
        }
    }
    a.into_iter()
        .map(|row| {
            row[n..]
                .iter()
                .map(|x| {
                    if !x.is_integer() {
                        return invariant("c-matrix is not unimodular");
                    }
                    x.to_integer().to_i64().ok_or_else(|| EngineError::Invariant("g-vector entry overflow".into()))
                })
                .collect()
        })
        .collect()
}

fn exchange<'a, F>(q: &Quiver, k: usize, val: F) -> std::result::Result<LaurentPoly, LaurentError>
where
    F: Fn(usize) -> &'a LaurentPoly,
{
    let mut incoming = LaurentPoly::one();
    let mut outgoing = LaurentPoly::one();
    for j in 0..q.n() {
        let m = q.b(j, k);
        if m > 0 {
            incoming = incoming.mul(&val(j).pow(m as u32));
        } else if m < 0 {
            outgoing = outgoing.mul(&val(j).pow((-m) as u32));
        }
    }
    incoming.add(&outgoing).div_exact(val(k))
}

/// Cluster seed. `x[i]` belongs to `quiver.id(i)`.
#[derive(Clone, Debug)]
pub struct Seed {
    initial: Arc<Quiver>,
    quiver: Quiver,
    x: Vec<LaurentPoly>,
    trail: Vec<VertexId>,
    framing: Option<Framing>,
    principal: Option<Vec<LaurentPoly>>,
    y_companions: Arc<Vec<LaurentPoly>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Tracking {
    /// Cluster variables only.
    Plain,
    /// Also the framed quiver: colors, c- and g-vectors.
    Tropical,
    /// Also principal-coefficient cluster variables: F-polynomials.
    Principal,
}

impl Seed {
    pub fn new(q: Quiver, tracking: Tracking) -> Seed {
        let x = q.ids().iter().map(x_poly).collect();
        let framing = (tracking != Tracking::Plain).then(|| Framing::new(&q));
        let principal = (tracking == Tracking::Principal).then(|| q.ids().iter().map(x_poly).collect());
        let y_companions = Arc::new(q.ids().iter().map(|v| LaurentPoly::monomial(Monomial::var(yvar(v)))).collect());
        Seed { initial: Arc::new(q.clone()), quiver: q, x, trail: Vec::new(), framing, principal, y_companions }
    }

    pub fn plain(q: Quiver) -> Seed {
        Seed::new(q, Tracking::Plain)
    }

    pub fn tracking(&self) -> Tracking {
        match (&self.framing, &self.principal) {
            (None, _) => Tracking::Plain,
            (Some(_), None) => Tracking::Tropical,
            (Some(_), Some(_)) => Tracking::Principal,
        }
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn initial_quiver(&self) -> &Quiver {
        &self.initial
    }

    pub fn framing(&self) -> Option<&Framing> {
        self.framing.as_ref()
    }

    pub fn trail(&self) -> &[VertexId] {
        &self.trail
    }

    pub fn x_values(&self) -> &[LaurentPoly] {
        &self.x
    }

    pub fn x_at(&self, i: usize) -> &LaurentPoly {
        &self.x[i]
    }

    pub fn x(&self, v: &VertexId) -> Result<&LaurentPoly> {
        Ok(&self.x[self.quiver.require(v)?])
    }

    pub fn mutate_index(&mut self, k: usize) -> Result<()> {
        let step = self.trail.len();
        let id = self.quiver.id(k).clone();
        if self.quiver.is_frozen(k) {
            return Err(EngineError::NotMutable { vertex: id.to_string(), step });
        }
        let fault = |e: LaurentError, what: &str| match e {
            LaurentError::NonExactDivision => EngineError::NonExactDivision {
                context: format!("{what} exchange at vertex {id}, step {step}, trail [{}]", crate::quiver::format_sequence(&self.trail)),
            },
            other => EngineError::Laurent(other),
        };
        let new_x = exchange(&self.quiver, k, |j| &self.x[j]).map_err(|e| fault(e, "cluster"))?;
        let new_p = match (&self.framing, &self.principal) {
            (Some(fr), Some(p)) => {
                let n = fr.n();
                Some(exchange(fr.framed(), k, |j| if j < n { &p[j] } else { &self.y_companions[j - n] }).map_err(|e| fault(e, "principal"))?)
            }
            _ => None,
        };
        self.x[k] = new_x;
        if let (Some(p), Some(v)) = (self.principal.as_mut(), new_p) {
            p[k] = v;
        }
        if let Some(fr) = self.framing.as_mut() {
            fr.mutate(k);
        }
        self.quiver.mutate_in_place(k);
        self.trail.push(id);
        Ok(())
    }

    pub fn mutate_in_place(&mut self, v: &VertexId) -> Result<()> {
        let k = self.quiver.require(v)?;
        self.mutate_index(k)
    }

    pub fn mutate(&self, v: &VertexId) -> Result<Seed> {
        let mut s = self.clone();
        s.mutate_in_place(v)?;
        Ok(s)
    }

    /// Left-to-right fold of single mutations; errors name the failing step.
    pub fn apply_sequence(&self, seq: &[VertexId]) -> Result<Seed> {
        let mut s = self.clone();
        for (i, v) in seq.iter().enumerate() {
            let k = s.quiver.index_of(v).ok_or_else(|| EngineError::InvalidInput(format!("step {i}: unknown vertex {v}")))?;
            s.mutate_index(k).map_err(|e| match e {
                EngineError::NotMutable { vertex, .. } => EngineError::NotMutable { vertex, step: i },
                other => other,
            })?;
        }
        Ok(s)
    }

    fn require_framing(&self) -> Result<&Framing> {
        self.framing.as_ref().ok_or_else(|| EngineError::InvalidInput("seed does not track the framed quiver".into()))
    }

    pub fn color(&self, v: &VertexId) -> Result<Color> {
        let k = self.quiver.require(v)?;
        if self.quiver.is_frozen(k) {
            return invalid(format!("{v} is frozen and has no color"));
        }
        self.require_framing()?.color(k)
    }

    /// c-vector of `v` over the mutable vertices of the initial quiver.
    pub fn c_vector(&self, v: &VertexId) -> Result<Vec<i64>> {
        let k = self.quiver.require(v)?;
        let full = self.require_framing()?.c_vector(k);
        Ok(self.quiver.mutable_indices().into_iter().map(|w| full[w]).collect())
    }

    /// g-vectors of all vertices over all vertices of the initial quiver.
    pub fn g_vectors(&self) -> Result<Vec<Vec<i64>>> {
        self.require_framing()?.g_columns()
    }

    /// Principal-coefficient value of vertex `k` (x and y variables).
    pub fn principal_value(&self, k: usize) -> Option<&LaurentPoly> {
        self.principal.as_ref().map(|p| &p[k])
    }

    pub fn tropical_data(&self) -> Result<TropicalData> {
        let fr = self.require_framing()?;
        let Some(p) = &self.principal else {
            return invalid("seed does not track principal coefficients");
        };
        let q = &self.quiver;
        let mutable = q.mutable_indices();
        let g_all = fr.g_columns()?;
        let mut c = Vec::new();
        let mut g = Vec::new();
        let mut f = Vec::new();
        for &k in &mutable {
            let id = q.id(k);
            let full_c = fr.c_vector(k);
            for w in q.frozen_indices() {
                if full_c[w] != 0 {
                    return invariant(format!("c-vector of {id} has a frozen component"));
                }
            }
            fr.color(k)?;
            c.push(mutable.iter().map(|&w| full_c[w]).collect());
            let fk = p[k].set_one(|v| is_family(v, "x."));
            if fk.constant_term() != BigInt::one() {
                return invariant(format!("F-polynomial of {id} has constant term {}", fk.constant_term()));
            }
            let low = p[k].set_zero(|v| is_family(v, "y.")).map_err(EngineError::Laurent)?;
            let expected = LaurentPoly::monomial(g_monomial(q, &g_all[k]));
            if low != expected {
                return invariant(format!("g-vector of {id}: framed run gives {:?}, y-free part is {low}", g_all[k]));
            }
            g.push(g_all[k].clone());
            f.push(fk);
        }
        Ok(TropicalData {
            basis: q.ids().to_vec(),
            mutable: mutable.iter().map(|&k| q.id(k).clone()).collect(),
            c,
            g,
            f,
        })
    }

    /// x^g F(ŷ) with ŷ read off the initial quiver; compared with the stored
    /// value by the caller.
    pub fn separation_reconstruct(&self, td: &TropicalData, v: &VertexId) -> Result<LaurentPoly> {
        let pos = td.mutable.iter().position(|w| w == v).ok_or_else(|| EngineError::UnknownVertex(v.to_string()))?;
        let init = &self.initial;
        let mut yhat: HashMap<Var, LaurentPoly> = HashMap::new();
        for j in 0..init.n() {
            let m = Monomial::from_exps((0..init.n()).map(|u| (xvar(init.id(u)), init.b(j, u) as i32)));
            yhat.insert(yvar(init.id(j)), LaurentPoly::monomial(m));
        }
        let f = td.f[pos].substitute(&yhat)?;
        Ok(f.mul_monomial(&g_monomial(init, &td.g[pos])))
    }

    /// Checks the separation formula at every mutable vertex.
    pub fn check_separation(&self) -> Result<TropicalData> {
        let td = self.tropical_data()?;
        for v in &td.mutable {
            let r = self.separation_reconstruct(&td, v)?;
            if &r != self.x(v)? {
                return invariant(format!("separation formula fails at {v}"));
            }
        }
        Ok(td)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut j = self.quiver.to_json();
        let x: serde_json::Map<String, serde_json::Value> =
            self.quiver.ids().iter().zip(&self.x).map(|(id, p)| (id.to_string(), p.to_json())).collect();
        j["x"] = serde_json::Value::Object(x);
        j["trail"] = serde_json::Value::from(self.trail.iter().map(|v| v.to_string()).collect::<Vec<_>>());
        j
    }
}

fn g_monomial(q: &Quiver, g: &[i64]) -> Monomial {
    Monomial::from_exps(g.iter().enumerate().map(|(i, &e)| (xvar(q.id(i)), e as i32)))
}

/// c-vectors, g-vectors and F-polynomials of the mutable vertices.
#[derive(Clone, Debug)]
pub struct TropicalData {
    /// Every initial vertex; g-vectors use this basis.
    pub basis: Vec<VertexId>,
    /// Mutable vertices; c-vectors use this basis and entries follow it.
    pub mutable: Vec<VertexId>,
    pub c: Vec<Vec<i64>>,
    pub g: Vec<Vec<i64>>,
    pub f: Vec<LaurentPoly>,
}

impl TropicalData {
    pub fn to_json(&self) -> serde_json::Value {
        let keyed = |rows: &[Vec<i64>]| -> serde_json::Value {
            self.mutable.iter().zip(rows).map(|(v, r)| (v.to_string(), serde_json::json!(r))).collect::<serde_json::Map<_, _>>().into()
        };
        let f: serde_json::Map<String, serde_json::Value> = self.mutable.iter().zip(&self.f).map(|(v, p)| (v.to_string(), p.to_json())).collect();
        serde_json::json!({
            "c_basis": self.mutable.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "g_basis": self.basis.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "c": keyed(&self.c),
            "g": keyed(&self.g),
            "F": f,
        })
    }
}

/// Y-seed whose coordinates live in the fraction field of the x-variables.
#[derive(Clone, Debug)]
pub struct YSeed {
    pub quiver: Quiver,
    pub y: Vec<Fraction>,
}

impl YSeed {
    /// Y-seed with independent variables `y.<vertex>`.
    pub fn initial(q: Quiver) -> YSeed {
        let y = q.ids().iter().map(|v| Fraction::from_poly(LaurentPoly::monomial(Monomial::var(yvar(v))))).collect();
        YSeed { quiver: q, y }
    }

    pub fn mutate(&self, v: &VertexId) -> Result<YSeed> {
        let k = self.quiver.require(v)?;
        if self.quiver.is_frozen(k) {
            return Err(EngineError::NotMutable { vertex: v.to_string(), step: 0 });
        }
        let yk = &self.y[k];
        let one = Fraction::from_poly(LaurentPoly::one());
        let plus = one.add(yk);
        let plus_inv = one.add(&yk.inv()?);
        let mut y = self.y.clone();
        for j in 0..self.quiver.n() {
            if j == k {
                continue;
            }
            let m = self.quiver.b(k, j);
            if m > 0 {
                y[j] = y[j].mul(&plus.pow(m as i32)?);
            } else if m < 0 {
                y[j] = y[j].mul(&plus_inv.pow(m as i32)?);
            }
        }
        y[k] = yk.inv()?;
        let mut q = self.quiver.clone();
        q.mutate_in_place(k);
        Ok(YSeed { quiver: q, y })
    }
}

/// y_v = ∏_{v→u} x_u / ∏_{w→v} x_w on the current quiver.
pub fn p_map(s: &Seed) -> Vec<Fraction> {
    let q = s.quiver();
    (0..q.n())
        .map(|v| {
            let mut num = LaurentPoly::one();
            let mut den = LaurentPoly::one();
            for u in 0..q.n() {
                let m = q.b(v, u);
                if m > 0 {
                    num = num.mul(&s.x_at(u).pow(m as u32));
                } else if m < 0 {
                    den = den.mul(&s.x_at(u).pow((-m) as u32));
                }
            }
            Fraction::new(num, den).expect("cluster variables are nonzero")
        })
        .collect()
}

/// True when every coefficient of `p` is positive.
pub fn is_positive(p: &LaurentPoly) -> bool {
    p.terms().iter().all(|(_, c)| c.is_positive())
}
