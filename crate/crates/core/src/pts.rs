//! The probabilistic points-to domain.
//!
//! A [`PtsType`] maps every program variable to a finite set of
//! (symbolic address, probability) pairs whose probabilities sum to at most
//! one. The lattice order only looks at supports; probabilities enter through
//! the weighted join [`nabla`], which is also the least upper bound when all
//! weights are equal.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::lang::{VarId, VarName, VarTable};
use crate::prob::Prob;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PtsError {
    #[error("points-to types range over different variable sets")]
    VarSetMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("join weights sum to {0}, which exceeds 1")]
    WeightsExceedOne(String),
    #[error("cannot join an empty collection of points-to types")]
    EmptyJoin,
    #[error("probabilities for `{var}` sum to {sum}, which exceeds 1")]
    MassExceedsOne { var: String, sum: String },
    #[error("malformed points-to JSON: {0}")]
    Json(String),
}

/// The symbolic address `x'` of variable `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(pub VarId);

impl Address {
    pub fn render(self, vars: &VarTable) -> String {
        format!("{}'", vars.name(self.0))
    }
}

/// Addresses with strictly positive probabilities, at most one entry each.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AddrProbSet {
    entries: BTreeMap<Address, Prob>,
}

impl AddrProbSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(addr: Address, p: Prob) -> Self {
        let mut s = AddrProbSet::new();
        s.insert(addr, p);
        s
    }

    /// Sets the probability of `addr`; a zero probability removes it.
    pub fn insert(&mut self, addr: Address, p: Prob) {
        if p.is_zero() {
            self.entries.remove(&addr);
        } else {
            self.entries.insert(addr, p);
        }
    }

    pub fn get(&self, addr: Address) -> Option<&Prob> {
        self.entries.get(&addr)
    }

    pub fn contains(&self, addr: Address) -> bool {
        self.entries.contains_key(&addr)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Address, &Prob)> {
        self.entries.iter().map(|(a, p)| (*a, p))
    }

    pub fn addresses(&self) -> impl Iterator<Item = Address> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass(&self) -> BigRational {
        self.entries
            .values()
            .fold(BigRational::zero(), |acc, p| acc + p.as_rational())
    }

    pub fn same_support(&self, other: &AddrProbSet) -> bool {
        self.entries.len() == other.entries.len() && self.entries.keys().eq(other.entries.keys())
    }

    pub fn support_subset_of(&self, other: &AddrProbSet) -> bool {
        self.entries.keys().all(|a| other.entries.contains_key(a))
    }

    pub fn scaled(&self, q: &Prob) -> AddrProbSet {
        let mut out = AddrProbSet::new();
        for (a, p) in self.iter() {
            out.insert(a, p.mul(q));
        }
        out
    }
}

/// A points-to type: a total map from the program's variables to
/// [`AddrProbSet`]s with mass at most one each.
#[derive(Clone, PartialEq, Eq)]
pub struct PtsType {
    vars: Arc<VarTable>,
    slots: Vec<AddrProbSet>,
}

impl PtsType {
    /// Every variable points nowhere.
    pub fn bottom(vars: &Arc<VarTable>) -> PtsType {
        PtsType {
            vars: Arc::clone(vars),
            slots: vec![AddrProbSet::new(); vars.len()],
        }
    }

    /// Builds a type from explicit per-variable sets, checking the mass bound.
    pub fn from_sets(
        vars: &Arc<VarTable>,
        sets: impl IntoIterator<Item = (VarId, AddrProbSet)>,
    ) -> Result<PtsType, PtsError> {
        let mut pts = PtsType::bottom(vars);
        for (x, set) in sets {
            pts.set(x, set)?;
        }
        Ok(pts)
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    pub fn same_vars(&self, other: &PtsType) -> bool {
        Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars
    }

    fn check_vars(&self, other: &PtsType) -> Result<(), PtsError> {
        if self.same_vars(other) {
            Ok(())
        } else {
            Err(PtsError::VarSetMismatch)
        }
    }

    fn resolve(&self, x: &VarName) -> Result<VarId, PtsError> {
        self.vars
            .id(x)
            .ok_or_else(|| PtsError::UnknownVariable(x.to_string()))
    }

    pub fn get(&self, x: VarId) -> &AddrProbSet {
        &self.slots[x.0]
    }

    pub fn get_named(&self, x: &VarName) -> Result<&AddrProbSet, PtsError> {
        Ok(self.get(self.resolve(x)?))
    }

    /// Replaces the set of `x`, rejecting sets whose mass exceeds one.
    pub fn set(&mut self, x: VarId, set: AddrProbSet) -> Result<(), PtsError> {
        let mass = set.mass();
        if mass > BigRational::from_integer(1.into()) {
            return Err(PtsError::MassExceedsOne {
                var: self.vars.name(x).to_string(),
                sum: mass.to_string(),
            });
        }
        self.slots[x.0] = set;
        Ok(())
    }

    /// `self[x ↦ set]`.
    pub fn with(&self, x: VarId, set: AddrProbSet) -> Result<PtsType, PtsError> {
        let mut out = self.clone();
        out.set(x, set)?;
        Ok(out)
    }

    /// Total probability that `x` holds some address.
    pub fn mass(&self, x: &VarName) -> Result<Prob, PtsError> {
        Ok(Prob::from_rational_unchecked(self.get_named(x)?.mass()))
    }

    /// Addresses `x` may hold with nonzero probability.
    pub fn support(&self, x: &VarName) -> Result<Vec<Address>, PtsError> {
        Ok(self.get_named(x)?.addresses().collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &AddrProbSet)> {
        self.slots.iter().enumerate().map(|(i, s)| (VarId(i), s))
    }

    /// Bit length of the largest denominator stored; 0 for ⊥.
    pub fn max_denominator_bits(&self) -> u64 {
        self.slots
            .iter()
            .flat_map(|s| s.iter())
            .map(|(_, p)| p.denom().bits())
            .max()
            .unwrap_or(0)
    }

    pub fn is_bottom(&self) -> bool {
        self.slots.iter().all(AddrProbSet::is_empty)
    }

    /// `(pts × q)(x) = pts(x) × q`; scaling by zero yields bottom.
    pub fn scale(&self, q: &Prob) -> PtsType {
        PtsType {
            vars: Arc::clone(&self.vars),
            slots: self.slots.iter().map(|s| s.scaled(q)).collect(),
        }
    }

    /// Pointwise support inclusion.
    pub fn leq(&self, other: &PtsType) -> Result<bool, PtsError> {
        self.check_vars(other)?;
        Ok(self
            .slots
            .iter()
            .zip(&other.slots)
            .all(|(a, b)| a.support_subset_of(b)))
    }

    /// Pointwise support equality.
    pub fn equiv(&self, other: &PtsType) -> Result<bool, PtsError> {
        self.check_vars(other)?;
        Ok(self
            .slots
            .iter()
            .zip(&other.slots)
            .all(|(a, b)| a.same_support(b)))
    }

    /// Every address-valued variable of `env` holds an address in its support.
    pub fn models(&self, env: &Env) -> bool {
        env.values.iter().enumerate().all(|(i, v)| match v {
            Value::Int(_) => true,
            Value::Addr(a) => self.slots.get(i).is_some_and(|s| s.contains(*a)),
        })
    }

    /// Machine-readable form: `{var: [[addr, "num/den", decimal], ...]}`,
    /// variables in table order, addresses alphabetical.
    pub fn to_json(&self) -> Json {
        let mut map = Map::new();
        for (x, set) in self.iter() {
            let mut entries: Vec<(String, &Prob)> =
                set.iter().map(|(a, p)| (a.render(&self.vars), p)).collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let list: Vec<Json> = entries
                .into_iter()
                .map(|(addr, p)| {
                    let approx = (p.to_f64() * 1e6).round() / 1e6;
                    json!([addr, p.to_fraction_string(), approx])
                })
                .collect();
            map.insert(self.vars.name(x).to_string(), Json::Array(list));
        }
        Json::Object(map)
    }

    /// Inverse of [`PtsType::to_json`]; the exact fraction is authoritative,
    /// the decimal is ignored. Variables absent from the object map to ∅.
    pub fn from_json(vars: &Arc<VarTable>, value: &Json) -> Result<PtsType, PtsError> {
        let bad = |m: &str| PtsError::Json(m.to_string());
        let obj = value.as_object().ok_or_else(|| bad("expected an object"))?;
        let mut pts = PtsType::bottom(vars);
        for (name, list) in obj {
            let x = vars
                .id_of(name)
                .ok_or_else(|| PtsError::UnknownVariable(name.clone()))?;
            let mut set = AddrProbSet::new();
            for entry in list.as_array().ok_or_else(|| bad("expected a list of entries"))? {
                let addr = entry
                    .get(0)
                    .and_then(Json::as_str)
                    .and_then(|s| s.strip_suffix('\''))
                    .ok_or_else(|| bad("expected an address string like \"x'\""))?;
                let target = vars
                    .id_of(addr)
                    .ok_or_else(|| PtsError::UnknownVariable(addr.to_string()))?;
                let frac = entry
                    .get(1)
                    .and_then(Json::as_str)
                    .ok_or_else(|| bad("expected a fraction string"))?;
                let p = Prob::parse_literal(frac).map_err(|e| PtsError::Json(e.to_string()))?;
                set.insert(Address(target), p);
            }
            pts.set(x, set)?;
        }
        Ok(pts)
    }
}

impl fmt::Debug for PtsType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Compact rendering listing only variables with a nonempty set, e.g.
/// `{a ↦ {(c', 1)}, b ↦ {(c', 3/5), (d', 2/5)}}`; bottom prints as `⊥`.
impl fmt::Display for PtsType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bottom() {
            return f.write_str("⊥");
        }
        f.write_str("{")?;
        let mut first = true;
        for (x, set) in self.iter().filter(|(_, s)| !s.is_empty()) {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{} ↦ {{", self.vars.name(x))?;
            let mut entries: Vec<(String, &Prob)> =
                set.iter().map(|(a, p)| (a.render(&self.vars), p)).collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            for (i, (addr, p)) in entries.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "({addr}, {p})")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

/// The weighted join ∇((pts₁,q₁),…,(ptsₙ,qₙ)).
///
/// For every variable `x` and every address `z'` in some input's support, the
/// result holds `Σₖ qₖ·pₖ` over the inputs containing `(z', pₖ)`; sums that
/// come out as zero are dropped. Requires `Σ qᵢ ≤ 1`, which keeps every
/// output mass at most one.
pub fn nabla(weighted: &[(&PtsType, Prob)]) -> Result<PtsType, PtsError> {
    let (first, _) = weighted.first().ok_or(PtsError::EmptyJoin)?;
    let mut total = BigRational::zero();
    for (pts, q) in weighted {
        first.check_vars(pts)?;
        total += q.as_rational();
    }
    if total > BigRational::from_integer(1.into()) {
        return Err(PtsError::WeightsExceedOne(total.to_string()));
    }

    let slots = (0..first.slots.len())
        .map(|i| {
            let mut sums: BTreeMap<Address, BigRational> = BTreeMap::new();
            for (pts, q) in weighted {
                for (addr, p) in pts.slots[i].iter() {
                    *sums.entry(addr).or_insert_with(BigRational::zero) +=
                        q.as_rational() * p.as_rational();
                }
            }
            let mut set = AddrProbSet::new();
            for (addr, sum) in sums {
                set.insert(addr, Prob::from_rational_unchecked(sum));
            }
            set
        })
        .collect();
    Ok(PtsType {
        vars: Arc::clone(&first.vars),
        slots,
    })
}

/// Least upper bound: ∇ with every weight `1/n`.
pub fn lub(types: &[PtsType]) -> Result<PtsType, PtsError> {
    if types.is_empty() {
        return Err(PtsError::EmptyJoin);
    }
    let w = Prob::reciprocal(types.len());
    let weighted: Vec<(&PtsType, Prob)> = types.iter().map(|t| (t, w.clone())).collect();
    nabla(&weighted)
}

/// A concrete value: an integer or a symbolic address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Addr(Address),
}

/// A concrete store, total over the program's variables. Comparison and
/// hashing look at the values only.
#[derive(Clone)]
pub struct Env {
    values: Vec<Value>,
    vars: Arc<VarTable>,
}

impl Env {
    /// Every variable holds `0`.
    pub fn zeroed(vars: &Arc<VarTable>) -> Env {
        Env {
            values: vec![Value::Int(0); vars.len()],
            vars: Arc::clone(vars),
        }
    }

    pub fn vars(&self) -> &Arc<VarTable> {
        &self.vars
    }

    pub fn get(&self, x: VarId) -> Value {
        self.values[x.0]
    }

    pub fn set(&mut self, x: VarId, v: Value) {
        self.values[x.0] = v;
    }

    pub fn with(&self, x: VarId, v: Value) -> Env {
        let mut out = self.clone();
        out.set(x, v);
        out
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn render_value(&self, v: Value) -> String {
        match v {
            Value::Int(n) => n.to_string(),
            Value::Addr(a) => a.render(&self.vars),
        }
    }
}

impl PartialEq for Env {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl Eq for Env {}

impl std::hash::Hash for Env {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.values.hash(state);
    }
}

impl PartialOrd for Env {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Env {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.values.cmp(&other.values)
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} = {}", self.vars.name(VarId(i)), self.render_value(*v))?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Env{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(names: &[&str]) -> Arc<VarTable> {
        Arc::new(VarTable::from_names(
            names.iter().map(|n| VarName::new(*n).unwrap()),
        ))
    }

    fn p(n: u64, d: u64) -> Prob {
        Prob::ratio(n, d).unwrap()
    }

    fn addr(vars: &VarTable, name: &str) -> Address {
        Address(vars.id_of(name).unwrap())
    }

    fn pts_of(vars: &Arc<VarTable>, entries: &[(&str, &[(&str, Prob)])]) -> PtsType {
        let mut pts = PtsType::bottom(vars);
        for (x, set) in entries {
            let mut s = AddrProbSet::new();
            for (a, q) in set.iter() {
                s.insert(addr(vars, a), q.clone());
            }
            pts.set(vars.id_of(x).unwrap(), s).unwrap();
        }
        pts
    }

    fn name(s: &str) -> VarName {
        VarName::new(s).unwrap()
    }

    #[test]
    fn bottom_is_empty_everywhere() {
        let vars = table(&["a"]);
        let b = PtsType::bottom(&vars);
        assert!(b.get_named(&name("a")).unwrap().is_empty());
        assert_eq!(b.mass(&name("a")).unwrap(), Prob::zero());
        assert!(b.support(&name("a")).unwrap().is_empty());
        assert_eq!(PtsType::bottom(&table(&[])).iter().count(), 0);
    }

    #[test]
    fn mass_and_support() {
        let vars = table(&["x", "y", "z", "b", "c", "d"]);
        let pts = pts_of(&vars, &[("x", &[("y", p(1, 5)), ("z", p(1, 2))]), ("b", &[("c", p(3, 5)), ("d", p(2, 5))])]);
        assert_eq!(pts.mass(&name("x")).unwrap(), p(7, 10));
        assert_eq!(pts.mass(&name("b")).unwrap(), Prob::one());
        assert_eq!(
            pts.support(&name("x")).unwrap(),
            vec![addr(&vars, "y"), addr(&vars, "z")]
        );
        assert_eq!(
            pts.mass(&name("nope")),
            Err(PtsError::UnknownVariable("nope".into()))
        );
    }

    #[test]
    fn set_rejects_excess_mass() {
        let vars = table(&["x", "y", "z"]);
        let mut s = AddrProbSet::new();
        s.insert(addr(&vars, "y"), p(2, 3));
        s.insert(addr(&vars, "z"), p(2, 3));
        assert!(matches!(
            PtsType::bottom(&vars).with(VarId(0), s),
            Err(PtsError::MassExceedsOne { .. })
        ));
    }

    #[test]
    fn scaling() {
        let vars = table(&["x", "y"]);
        let pts = pts_of(&vars, &[("x", &[("y", p(2, 5))])]);
        assert_eq!(pts.scale(&Prob::one()), pts);
        assert_eq!(pts.scale(&p(1, 2)), pts_of(&vars, &[("x", &[("y", p(1, 5))])]));
        assert_eq!(pts.scale(&Prob::zero()), PtsType::bottom(&vars));
    }

    #[test]
    fn nabla_examples() {
        let vars = table(&["x", "y", "z", "b", "c", "d"]);
        let pts = pts_of(&vars, &[("x", &[("y", p(2, 5))])]);
        assert_eq!(nabla(&[(&pts, Prob::one())]).unwrap(), pts);

        let other = pts_of(&vars, &[("x", &[("z", Prob::one())])]);
        let joined = nabla(&[(&pts, p(1, 2)), (&other, p(1, 2))]).unwrap();
        assert_eq!(joined, pts_of(&vars, &[("x", &[("y", p(1, 5)), ("z", p(1, 2))])]));

        let t = pts_of(&vars, &[("b", &[("c", Prob::one())])]);
        let f = pts_of(&vars, &[("b", &[("d", Prob::one())])]);
        let joined = nabla(&[(&t, p(3, 5)), (&f, p(2, 5))]).unwrap();
        assert_eq!(joined, pts_of(&vars, &[("b", &[("c", p(3, 5)), ("d", p(2, 5))])]));
    }

    #[test]
    fn nabla_errors() {
        let vars = table(&["x"]);
        let b = PtsType::bottom(&vars);
        assert!(matches!(
            nabla(&[(&b, p(2, 3)), (&b, p(2, 3))]),
            Err(PtsError::WeightsExceedOne(_))
        ));
        let other = PtsType::bottom(&table(&["q"]));
        assert_eq!(
            nabla(&[(&b, p(1, 2)), (&other, p(1, 2))]),
            Err(PtsError::VarSetMismatch)
        );
        assert_eq!(nabla(&[]), Err(PtsError::EmptyJoin));
    }

    #[test]
    fn zero_weight_entries_are_dropped() {
        let vars = table(&["x", "y"]);
        let pts = pts_of(&vars, &[("x", &[("y", Prob::one())])]);
        let b = PtsType::bottom(&vars);
        assert_eq!(nabla(&[(&pts, Prob::zero()), (&b, Prob::one())]).unwrap(), b);
    }

    #[test]
    fn lub_examples() {
        let vars = table(&["a", "c", "d"]);
        let pc = pts_of(&vars, &[("a", &[("c", Prob::one())])]);
        let pd = pts_of(&vars, &[("a", &[("d", Prob::one())])]);
        assert_eq!(lub(std::slice::from_ref(&pc)).unwrap(), pc);
        assert_eq!(
            lub(&[pc.clone(), pd]).unwrap(),
            pts_of(&vars, &[("a", &[("c", p(1, 2)), ("d", p(1, 2))])])
        );
        let mixed = pts_of(&vars, &[("a", &[("c", p(1, 3)), ("d", p(1, 7))])]);
        assert_eq!(lub(&[mixed.clone(), mixed.clone(), mixed.clone()]).unwrap(), mixed);
        assert_eq!(lub(&[]), Err(PtsError::EmptyJoin));
    }

    #[test]
    fn order_ignores_probabilities() {
        let vars = table(&["x", "y"]);
        let hi = pts_of(&vars, &[("x", &[("y", p(9, 10))])]);
        let lo = pts_of(&vars, &[("x", &[("y", p(1, 100))])]);
        let b = PtsType::bottom(&vars);
        assert!(b.leq(&hi).unwrap());
        assert!(hi.leq(&lo).unwrap());
        assert!(!hi.leq(&b).unwrap());
        assert!(hi.equiv(&hi).unwrap());
        assert!(pts_of(&vars, &[("x", &[("y", p(1, 2))])])
            .equiv(&pts_of(&vars, &[("x", &[("y", p(1, 4))])]))
            .unwrap());
        assert!(!b.equiv(&pts_of(&vars, &[("x", &[("y", Prob::one())])])).unwrap());
        assert_eq!(b.leq(&PtsType::bottom(&table(&["z"]))), Err(PtsError::VarSetMismatch));
    }

    #[test]
    fn modeling() {
        let vars = table(&["a", "c", "d"]);
        let b = PtsType::bottom(&vars);
        let env = Env::zeroed(&vars);
        assert!(b.models(&env));
        let env = env.with(VarId(0), Value::Addr(addr(&vars, "c")));
        let pts = pts_of(&vars, &[("a", &[("c", p(1, 2)), ("d", p(1, 2))])]);
        assert!(pts.models(&env));
        assert!(!b.models(&env));
    }

    #[test]
    fn json_shape_and_round_trip() {
        let vars = table(&["b", "d", "c"]);
        let pts = pts_of(&vars, &[("b", &[("d", p(2, 5)), ("c", p(3, 5))])]);
        let json = pts.to_json();
        assert_eq!(
            json.to_string(),
            r#"{"b":[["c'","3/5",0.6],["d'","2/5",0.4]],"d":[],"c":[]}"#
        );
        assert_eq!(PtsType::from_json(&vars, &json).unwrap(), pts);
    }

    #[test]
    fn display() {
        let vars = table(&["a", "c"]);
        assert_eq!(PtsType::bottom(&vars).to_string(), "⊥");
        let pts = pts_of(&vars, &[("a", &[("c", Prob::one())])]);
        assert_eq!(pts.to_string(), "{a ↦ {(c', 1)}}");
    }
}
