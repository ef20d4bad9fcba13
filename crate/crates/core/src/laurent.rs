//! Sparse multivariate Laurent polynomials with arbitrary-precision integer
//! coefficients.
//!
//! Variables are interned strings such as `x.v1.3` or `y.2`. Monomials are
//! kept sorted by interned index and ordered lexicographically as dense
//! exponent vectors, which is a total order compatible with multiplication;
//! exact division relies on that.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, LazyLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("division is not exact")]
    NonExactDivision,
    #[error("division by zero")]
    DivisionByZero,
    #[error("variable `{0}` has no image")]
    MissingImage(String),
    #[error("negative power of non-monomial image for `{0}`")]
    NonInvertibleImage(String),
    #[error("malformed polynomial: {0}")]
    Malformed(String),
}

struct Interner {
    names: Vec<Arc<str>>,
    index: HashMap<Arc<str>, u32>,
}

static INTERNER: LazyLock<RwLock<Interner>> = LazyLock::new(|| {
    RwLock::new(Interner {
        names: Vec::new(),
        index: HashMap::new(),
    })
});

/// An interned variable name.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u32);

impl Var {
    pub fn new(name: &str) -> Var {
        if let Some(&i) = INTERNER.read().unwrap().index.get(name) {
            return Var(i);
        }
        let mut w = INTERNER.write().unwrap();
        if let Some(&i) = w.index.get(name) {
            return Var(i);
        }
        let i = w.names.len() as u32;
        let s: Arc<str> = Arc::from(name);
        w.names.push(s.clone());
        w.index.insert(s, i);
        Var(i)
    }

    pub fn name(&self) -> Arc<str> {
        INTERNER.read().unwrap().names[self.0 as usize].clone()
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// A Laurent monomial: nonzero exponents keyed by variable, sorted by variable.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, i32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Monomial {
        Monomial(vec![(v, 1)])
    }

    pub fn from_exps<I: IntoIterator<Item = (Var, i32)>>(it: I) -> Monomial {
        let mut acc: BTreeMap<Var, i32> = BTreeMap::new();
        for (v, e) in it {
            *acc.entry(v).or_insert(0) += e;
        }
        Monomial(acc.into_iter().filter(|&(_, e)| e != 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exps(&self) -> &[(Var, i32)] {
        &self.0
    }

    pub fn exp(&self, v: Var) -> i32 {
        match self.0.binary_search_by(|(w, _)| w.cmp(&v)) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    fn combine(&self, other: &Monomial, sign: i32) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b[j].0, sign * b[j].1));
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + sign * b[j].1;
                    if e != 0 {
                        out.push((a[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend(b[j..].iter().map(|&(v, e)| (v, sign * e)));
        Monomial(out)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        self.combine(other, 1)
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        self.combine(other, -1)
    }

    pub fn pow(&self, k: i32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|&(v, e)| (v, e * k)).collect())
    }

    pub fn inv(&self) -> Monomial {
        self.pow(-1)
    }

    /// Variables sorted by name with their exponents.
    pub fn named(&self) -> Vec<(String, i32)> {
        let mut v: Vec<(String, i32)> = self.0.iter().map(|&(x, e)| (x.name().to_string(), e)).collect();
        v.sort();
        v
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(&(_, e)), None) => return e.cmp(&0),
                (None, Some(&(_, e))) => return 0.cmp(&e),
                (Some(&(va, ea)), Some(&(vb, eb))) => match va.cmp(&vb) {
                    Ordering::Less => return ea.cmp(&0),
                    Ordering::Greater => return 0.cmp(&eb),
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        for (k, (name, e)) in self.named().into_iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Exact Laurent polynomial. Terms are sorted ascending by monomial and never
/// carry a zero coefficient.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentPoly {
    terms: Vec<(Monomial, BigInt)>,
}

impl LaurentPoly {
    pub fn zero() -> LaurentPoly {
        LaurentPoly { terms: Vec::new() }
    }

    pub fn one() -> LaurentPoly {
        LaurentPoly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> LaurentPoly {
        LaurentPoly::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: BigInt) -> LaurentPoly {
        if c.is_zero() {
            LaurentPoly::zero()
        } else {
            LaurentPoly { terms: vec![(m, c)] }
        }
    }

    pub fn monomial(m: Monomial) -> LaurentPoly {
        LaurentPoly::term(m, BigInt::one())
    }

    pub fn var(name: &str) -> LaurentPoly {
        LaurentPoly::monomial(Monomial::var(Var::new(name)))
    }

    /// Builds a polynomial from arbitrary terms, merging duplicates.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigInt)>>(it: I) -> LaurentPoly {
        let mut v: Vec<(Monomial, BigInt)> = it.into_iter().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Monomial, BigInt)> = Vec::with_capacity(v.len());
        for (m, c) in v {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc += c,
                _ => {
                    if let Some((_, lc)) = out.last() {
                        if lc.is_zero() {
                            out.pop();
                        }
                    }
                    out.push((m, c));
                }
            }
        }
        if let Some((_, lc)) = out.last() {
            if lc.is_zero() {
                out.pop();
            }
        }
        LaurentPoly { terms: out }
    }

    fn from_map(map: HashMap<Monomial, BigInt>) -> LaurentPoly {
        let mut terms: Vec<(Monomial, BigInt)> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        LaurentPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Monomial, BigInt)] {
        &self.terms
    }

    /// The single monomial of a one-term polynomial with coefficient 1.
    pub fn as_monomial(&self) -> Option<&Monomial> {
        match self.terms.as_slice() {
            [(m, c)] if c.is_one() => Some(m),
            _ => None,
        }
    }

    /// Coefficient of `m`, zero when absent.
    pub fn coeff(&self, m: &Monomial) -> BigInt {
        match self.terms.binary_search_by(|(t, _)| t.cmp(m)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => BigInt::zero(),
        }
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeff(&Monomial::one())
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut v: Vec<Var> = self.terms.iter().flat_map(|(m, _)| m.0.iter().map(|&(x, _)| x)).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a[i].1 + &b[j].1;
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        LaurentPoly { terms: out }
    }

    pub fn neg(&self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &LaurentPoly) -> LaurentPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigInt) -> LaurentPoly {
        if c.is_zero() {
            return LaurentPoly::zero();
        }
        LaurentPoly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(t, c)| (t.mul(m), c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || other.is_zero() {
            return LaurentPoly::zero();
        }
        if other.terms.len() == 1 {
            let (m, c) = &other.terms[0];
            return self.mul_monomial(m).scale(c);
        }
        if self.terms.len() == 1 {
            return other.mul(self);
        }
        let mut acc: HashMap<Monomial, BigInt> = HashMap::with_capacity(self.terms.len() * other.terms.len() / 2 + 1);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let c = ca * cb;
                match acc.entry(ma.mul(mb)) {
                    std::collections::hash_map::Entry::Occupied(mut e) => *e.get_mut() += c,
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                }
            }
        }
        LaurentPoly::from_map(acc)
    }

    pub fn pow(&self, k: u32) -> LaurentPoly {
        let mut result = LaurentPoly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Exact quotient `self / d`; fails unless the remainder is zero.
    pub fn div_exact(&self, d: &LaurentPoly) -> Result<LaurentPoly, LaurentError> {
        if d.is_zero() {
            return Err(LaurentError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(LaurentPoly::zero());
        }
        if d.terms.len() == 1 {
            let (dm, dc) = &d.terms[0];
            let mut terms = Vec::with_capacity(self.terms.len());
            for (m, c) in &self.terms {
                let (q, r) = c.div_rem(dc);
                if !r.is_zero() {
                    return Err(LaurentError::NonExactDivision);
                }
                terms.push((m.div(dm), q));
            }
            return Ok(LaurentPoly { terms });
        }
        let bounds = quotient_box(self, d)?;
        let (lead_m, lead_c) = d.terms.last().unwrap();
        let rest = &d.terms[..d.terms.len() - 1];
        let mut rem: BTreeMap<Monomial, BigInt> = self.terms.iter().cloned().collect();
        let mut quot: Vec<(Monomial, BigInt)> = Vec::new();
        while let Some((m, c)) = rem.pop_last() {
            let qm = m.div(lead_m);
            if !bounds.contains(&qm) {
                return Err(LaurentError::NonExactDivision);
            }
            let (qc, r) = c.div_rem(lead_c);
            if !r.is_zero() {
                return Err(LaurentError::NonExactDivision);
            }
            for (dm, dc) in rest {
                let key = qm.mul(dm);
                let delta = &qc * dc;
                match rem.entry(key) {
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() -= delta;
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(-delta);
                    }
                }
            }
            quot.push((qm, qc));
        }
        quot.reverse();
        Ok(LaurentPoly { terms: quot })
    }

    /// Substitutes every variable by its image. Variables absent from the map
    /// are an error; negative powers need monomial images with coefficient 1.
    pub fn substitute(&self, map: &HashMap<Var, LaurentPoly>) -> Result<LaurentPoly, LaurentError> {
        self.subst_impl(|v| map.get(&v), true)
    }

    /// Like [`substitute`](Self::substitute) but leaves unmapped variables alone.
    pub fn substitute_partial(&self, map: &HashMap<Var, LaurentPoly>) -> Result<LaurentPoly, LaurentError> {
        self.subst_impl(|v| map.get(&v), false)
    }

    fn subst_impl<'a, F>(&self, image: F, strict: bool) -> Result<LaurentPoly, LaurentError>
    where
        F: Fn(Var) -> Option<&'a LaurentPoly>,
    {
        let mut mono_img: HashMap<Var, Option<Monomial>> = HashMap::new();
        let mut poly_img: HashMap<Var, &LaurentPoly> = HashMap::new();
        for v in self.vars() {
            match image(v) {
                Some(p) => {
                    if let Some(m) = p.as_monomial() {
                        mono_img.insert(v, Some(m.clone()));
                    } else {
                        poly_img.insert(v, p);
                    }
                }
                None if strict => return Err(LaurentError::MissingImage(v.name().to_string())),
                None => {
                    mono_img.insert(v, None);
                }
            }
        }
        if poly_img.is_empty() {
            let it = self.terms.iter().map(|(m, c)| {
                let mut out = Monomial::one();
                for &(v, e) in m.exps() {
                    match &mono_img[&v] {
                        Some(img) => out = out.mul(&img.pow(e)),
                        None => out = out.mul(&Monomial(vec![(v, e)])),
                    }
                }
                (out, c.clone())
            });
            return Ok(LaurentPoly::from_terms(it));
        }
        let mut powers: HashMap<(Var, i32), LaurentPoly> = HashMap::new();
        let mut acc = LaurentPoly::zero();
        for (m, c) in &self.terms {
            let mut mono = Monomial::one();
            let mut poly = LaurentPoly::one();
            for &(v, e) in m.exps() {
                if let Some(p) = poly_img.get(&v) {
                    let base = if e < 0 {
                        match p.terms() {
                            [(m, c)] if c.magnitude().is_one() => LaurentPoly::term(m.inv(), c.clone()),
                            _ => return Err(LaurentError::NonInvertibleImage(v.name().to_string())),
                        }
                    } else {
                        (*p).clone()
                    };
                    let pw = powers.entry((v, e)).or_insert_with(|| base.pow(e.unsigned_abs()));
                    poly = poly.mul(pw);
                } else {
                    match &mono_img[&v] {
                        Some(img) => mono = mono.mul(&img.pow(e)),
                        None => mono = mono.mul(&Monomial(vec![(v, e)])),
                    }
                }
            }
            acc = acc.add(&poly.mul_monomial(&mono).scale(c));
        }
        Ok(acc)
    }

    /// Renames variables monomially; never fails.
    pub fn map_monomials<F: Fn(&Monomial) -> Monomial>(&self, f: F) -> LaurentPoly {
        LaurentPoly::from_terms(self.terms.iter().map(|(m, c)| (f(m), c.clone())))
    }

    /// Sets every variable accepted by `pred` to 1.
    pub fn set_one<P: Fn(Var) -> bool>(&self, pred: P) -> LaurentPoly {
        self.map_monomials(|m| Monomial(m.0.iter().copied().filter(|&(v, _)| !pred(v)).collect()))
    }

    /// Sets every variable accepted by `pred` to 0. Fails when such a
    /// variable occurs with a negative exponent.
    pub fn set_zero<P: Fn(Var) -> bool>(&self, pred: P) -> Result<LaurentPoly, LaurentError> {
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            let mut keep = true;
            for &(v, e) in m.exps() {
                if pred(v) {
                    if e < 0 {
                        return Err(LaurentError::NonInvertibleImage(v.name().to_string()));
                    }
                    keep = false;
                }
            }
            if keep {
                terms.push((m.clone(), c.clone()));
            }
        }
        Ok(LaurentPoly { terms })
    }

    pub fn evaluate_all_one(&self) -> BigInt {
        self.terms.iter().map(|(_, c)| c).sum()
    }

    pub fn all_coefficients_positive(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.is_positive())
    }

    /// Terms in canonical order: sorted by (variable name, exponent) lists.
    pub fn canonical_terms(&self) -> Vec<(Vec<(String, i32)>, BigInt)> {
        let mut v: Vec<(Vec<(String, i32)>, BigInt)> = self.terms.iter().map(|(m, c)| (m.named(), c.clone())).collect();
        v.sort();
        v
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .canonical_terms()
            .into_iter()
            .map(|(exps, c)| {
                let mut map = serde_json::Map::new();
                for (name, e) in exps {
                    map.insert(name, serde_json::Value::from(e));
                }
                serde_json::json!({"coeff": c.to_string(), "exps": map})
            })
            .collect();
        serde_json::json!({ "terms": terms })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<LaurentPoly, LaurentError> {
        let bad = |s: &str| LaurentError::Malformed(s.to_string());
        let terms = v.get("terms").and_then(|t| t.as_array()).ok_or_else(|| bad("missing `terms` array"))?;
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let coeff = match t.get("coeff") {
                Some(serde_json::Value::String(s)) => s.parse::<BigInt>().map_err(|_| bad("bad coefficient"))?,
                Some(serde_json::Value::Number(n)) => n
                    .as_i64()
                    .map(BigInt::from)
                    .ok_or_else(|| bad("bad coefficient"))?,
                _ => return Err(bad("missing `coeff`")),
            };
            let mut exps = Vec::new();
            if let Some(obj) = t.get("exps") {
                let obj = obj.as_object().ok_or_else(|| bad("`exps` must be an object"))?;
                for (name, e) in obj {
                    let e = e.as_i64().ok_or_else(|| bad("exponent must be an integer"))?;
                    exps.push((Var::new(name), e as i32));
                }
            }
            out.push((Monomial::from_exps(exps), coeff));
        }
        Ok(LaurentPoly::from_terms(out))
    }
}

/// Per-variable exponent bounds any exact quotient must respect.
struct QuotientBox {
    bounds: HashMap<Var, (i32, i32)>,
}

impl QuotientBox {
    fn contains(&self, m: &Monomial) -> bool {
        for &(v, e) in m.exps() {
            match self.bounds.get(&v) {
                Some(&(lo, hi)) if lo <= e && e <= hi => {}
                _ => return false,
            }
        }
        self.bounds.iter().all(|(v, &(lo, hi))| {
            let e = m.exp(*v);
            lo <= e && e <= hi
        })
    }
}

fn exponent_ranges(p: &LaurentPoly, vars: &[Var]) -> HashMap<Var, (i32, i32)> {
    let mut r: HashMap<Var, (i32, i32)> = vars.iter().map(|&v| (v, (i32::MAX, i32::MIN))).collect();
    for (m, _) in p.terms() {
        for &v in vars {
            let e = m.exp(v);
            let ent = r.get_mut(&v).unwrap();
            ent.0 = ent.0.min(e);
            ent.1 = ent.1.max(e);
        }
    }
    r
}

fn quotient_box(p: &LaurentPoly, d: &LaurentPoly) -> Result<QuotientBox, LaurentError> {
    let mut vars = p.vars();
    vars.extend(d.vars());
    vars.sort();
    vars.dedup();
    let rp = exponent_ranges(p, &vars);
    let rd = exponent_ranges(d, &vars);
    let mut bounds = HashMap::new();
    for v in vars {
        let lo = rp[&v].0 - rd[&v].0;
        let hi = rp[&v].1 - rd[&v].1;
        if lo > hi {
            return Err(LaurentError::NonExactDivision);
        }
        bounds.insert(v, (lo, hi));
    }
    Ok(QuotientBox { bounds })
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (exps, c)) in self.canonical_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mono: Vec<String> = exps
                .iter()
                .map(|(n, e)| if *e == 1 { n.clone() } else { format!("{n}^{e}") })
                .collect();
            if mono.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{abs}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        LaurentPoly::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Parses a compact textual polynomial such as `x.1^-1*x.2 + 3 - y.1` or
/// `x.1^-1*(1 + x.2)^2`. Intended for tests and command-line input.
pub fn parse_poly(s: &str) -> Result<LaurentPoly, LaurentError> {
    let mut p = Parser { src: s, chars: s.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0 };
    if p.chars.is_empty() {
        return Err(p.bad("empty input"));
    }
    let out = p.expr()?;
    if p.pos != p.chars.len() {
        return Err(p.bad(&format!("unexpected `{}`", p.chars[p.pos])));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl Parser<'_> {
    fn bad(&self, m: &str) -> LaurentError {
        LaurentError::Malformed(format!("{m} in `{}`", self.src))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<LaurentPoly, LaurentError> {
        let mut neg = self.eat('-');
        if !neg {
            self.eat('+');
        }
        let mut acc = LaurentPoly::zero();
        loop {
            let t = self.term()?;
            acc = if neg { acc.sub(&t) } else { acc.add(&t) };
            if self.eat('+') {
                neg = false;
            } else if self.eat('-') {
                neg = true;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<LaurentPoly, LaurentError> {
        let mut acc = self.factor()?;
        while self.eat('*') {
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<LaurentPoly, LaurentError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        let digits = self.take_while(|c| c.is_ascii_digit());
        let e: u32 = digits.parse().map_err(|_| self.bad("bad exponent"))?;
        if !neg {
            return Ok(base.pow(e));
        }
        match base.terms() {
            [(m, c)] if c.magnitude().is_one() => Ok(LaurentPoly::term(m.inv(), c.clone()).pow(e)),
            _ => Err(self.bad("negative power of a non-monomial")),
        }
    }

    fn atom(&mut self) -> Result<LaurentPoly, LaurentError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.bad("missing `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.take_while(|c| c.is_ascii_digit());
                Ok(LaurentPoly::constant(digits.parse().map_err(|_| self.bad("bad integer"))?))
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let name = self.take_while(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '\''));
                Ok(LaurentPoly::var(&name))
            }
            Some(c) => Err(self.bad(&format!("unexpected `{c}`"))),
            None => Err(self.bad("unexpected end")),
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while self.peek().is_some_and(&f) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }
}

/// Element of the fraction field stored as a numerator over a denominator,
/// with monomial content moved into the numerator.
#[derive(Clone, Debug)]
pub struct Fraction {
    pub num: LaurentPoly,
    pub den: LaurentPoly,
}

impl Fraction {
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Result<Fraction, LaurentError> {
        if den.is_zero() {
            return Err(LaurentError::DivisionByZero);
        }
        Ok(Fraction { num, den }.reduced())
    }

    pub fn from_poly(p: LaurentPoly) -> Fraction {
        Fraction { num: p, den: LaurentPoly::one() }
    }

    fn reduced(self) -> Fraction {
        if let Ok(q) = self.num.div_exact(&self.den) {
            return Fraction::from_poly(q);
        }
        let (content, unit) = monomial_content(&self.den);
        let den = self.den.div_exact(&LaurentPoly::term(content.clone(), unit.clone())).expect("content divides");
        let num = self.num.mul_monomial(&content.inv());
        let num = if unit.is_negative() { num.neg() } else { num };
        Fraction { num, den }
    }

    pub fn inv(&self) -> Result<Fraction, LaurentError> {
        Fraction::new(self.den.clone(), self.num.clone())
    }

    pub fn mul(&self, o: &Fraction) -> Fraction {
        Fraction { num: self.num.mul(&o.num), den: self.den.mul(&o.den) }.reduced()
    }

    pub fn add(&self, o: &Fraction) -> Fraction {
        if self.den == o.den {
            return Fraction { num: self.num.add(&o.num), den: self.den.clone() }.reduced();
        }
        Fraction {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
        .reduced()
    }

    pub fn pow(&self, k: i32) -> Result<Fraction, LaurentError> {
        if k >= 0 {
            Ok(Fraction { num: self.num.pow(k as u32), den: self.den.pow(k as u32) }.reduced())
        } else {
            self.inv()?.pow(-k)
        }
    }

    pub fn equals(&self, o: &Fraction) -> bool {
        self.num.mul(&o.den) == o.num.mul(&self.den)
    }
}

/// Largest monomial dividing every term, plus the sign of the leading term.
fn monomial_content(p: &LaurentPoly) -> (Monomial, BigInt) {
    let vars = p.vars();
    let ranges = exponent_ranges(p, &vars);
    let content = Monomial::from_exps(ranges.into_iter().map(|(v, (lo, _))| (v, lo)));
    let unit = match p.terms().last() {
        Some((_, c)) if c.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    (content, unit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> LaurentPoly {
        parse_poly(s).unwrap()
    }

    #[test]
    fn ring_examples() {
        assert_eq!(p("x1 + 1").add(&p("-1")), p("x1"));
        assert_eq!(p("x1 + x2").mul(&p("x1 - x2")), p("x1^2 - x2^2"));
        assert_eq!(p("x1^-1").mul(&p("x1")), LaurentPoly::one());
    }

    #[test]
    fn division_examples() {
        assert_eq!(p("x2 + 1").div_exact(&p("x1")).unwrap(), p("x1^-1*x2 + x1^-1"));
        assert_eq!(p("x1^2 - x2^2").div_exact(&p("x1 + x2")).unwrap(), p("x1 - x2"));
        assert_eq!(p("x1 + 1").div_exact(&p("x2")).unwrap(), p("x2^-1*x1 + x2^-1"));
        assert_eq!(p("x1 + 1").div_exact(&p("x1 + 2")), Err(LaurentError::NonExactDivision));
        assert_eq!(p("x1^2 + 1").div_exact(&p("x1 + 1")), Err(LaurentError::NonExactDivision));
        assert_eq!(p("2*x1").div_exact(&p("3")), Err(LaurentError::NonExactDivision));
        assert_eq!(p("x1").div_exact(&LaurentPoly::zero()), Err(LaurentError::DivisionByZero));
    }

    #[test]
    fn division_with_laurent_shift() {
        let d = p("x1^-1*x2 + x3^-2");
        let q = p("x1 + x2^-1*x3 - 4");
        assert_eq!(d.mul(&q).div_exact(&d).unwrap(), q);
    }

    #[test]
    fn substitution_examples() {
        let mut map = HashMap::new();
        map.insert(Var::new("x.v.2"), p("t.v.1*t.v.2"));
        map.insert(Var::new("x.v.1"), p("t.v.1"));
        assert_eq!(p("x.v.2*x.v.1^-1").substitute(&map).unwrap(), p("t.v.2"));

        let mut map = HashMap::new();
        map.insert(Var::new("y.1"), p("x2^-1"));
        assert_eq!(p("y.1").substitute(&map).unwrap(), p("x2^-1"));

        let q = p("3*a^2*b^-1 - a + 7");
        let ident: HashMap<Var, LaurentPoly> = q.vars().into_iter().map(|v| (v, LaurentPoly::monomial(Monomial::var(v)))).collect();
        assert_eq!(q.substitute(&ident).unwrap(), q);
    }

    #[test]
    fn substitution_errors() {
        let mut map = HashMap::new();
        map.insert(Var::new("a"), p("b + 1"));
        assert!(matches!(p("a^-1").substitute(&map), Err(LaurentError::NonInvertibleImage(_))));
        assert!(matches!(p("c").substitute(&map), Err(LaurentError::MissingImage(_))));
        assert_eq!(p("a^2").substitute(&map).unwrap(), p("b^2 + 2*b + 1"));
    }

    #[test]
    fn evaluation() {
        assert_eq!(p("x1 + x2^-1").evaluate_all_one(), BigInt::from(2));
        assert_eq!(LaurentPoly::zero().evaluate_all_one(), BigInt::from(0));
    }

    #[test]
    fn json_round_trip_and_canonical_order() {
        let q = p("-12*x.v1.1^-1*x.v1.3 + 5 + x.v1.2");
        let j = q.to_json();
        assert_eq!(LaurentPoly::from_json(&j).unwrap(), q);
        let first = &j["terms"][0];
        assert_eq!(first["coeff"], "5");
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains("\"coeff\":\"-12\""));
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(p("t.3 + t.2^-1").to_string(), "t.2^-1 + t.3");
        assert_eq!(p("1 - 2*a").to_string(), "1 - 2*a");
    }

    #[test]
    fn fraction_equality() {
        let a = Fraction::new(p("x + 1"), p("x^2 + x")).unwrap();
        let b = Fraction::new(p("1"), p("x")).unwrap();
        assert!(a.equals(&b));
        let c = Fraction::new(p("x"), p("-2*x")).unwrap();
        assert!(c.equals(&Fraction::new(p("-1"), p("2")).unwrap()));
    }

    #[test]
    fn monomial_order_respects_multiplication() {
        let a = Monomial::from_exps([(Var::new("a"), 1), (Var::new("b"), -2)]);
        let b = Monomial::from_exps([(Var::new("a"), 1), (Var::new("b"), 3)]);
        let c = Monomial::from_exps([(Var::new("b"), 5), (Var::new("c"), -1)]);
        assert_eq!(a.cmp(&b), a.mul(&c).cmp(&b.mul(&c)));
    }

    #[test]
    fn parser_handles_parentheses_and_rejects_junk() {
        let p = parse_poly("x.1^-1*x.2^-1*(x.1 + x.2 + 1)").unwrap();
        assert_eq!(p, parse_poly("x.2^-1 + x.1^-1 + x.1^-1*x.2^-1").unwrap());
        assert_eq!(parse_poly("(1 + y.1)^2 - 2*y.1").unwrap(), parse_poly("1 + y.1^2").unwrap());
        assert_eq!(parse_poly("-(x - 1)*(-x)^-1").unwrap(), parse_poly("1 - x^-1").unwrap());
        assert_eq!(parse_poly("t.v1.3 + t.v1.2^-1").unwrap().len(), 2);
        for junk in ["", "(x + 1", "x +", "x*^2", "(1 + x)^-1", "x $ y", "2x"] {
            assert!(parse_poly(junk).is_err(), "{junk}");
        }
    }
}
