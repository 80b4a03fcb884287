//! Layered algebraic branching programs with labeled edges.

use std::collections::{BTreeMap, HashMap};

use serde_json::{json, Value};

use crate::field::{addm, mulm, validate_modulus};
use crate::models::{span_union, spans_overlap, Span, StructReport};
use crate::{Error, MultilinearPoly, Result};

/// Expansion cap: the dense DP carries a polynomial per node.
pub const MAX_EXPAND_VARS: usize = 20;

/// An edge label: a constant `c`, or `c * x_i`. `c = 1` recovers the
/// plain `X ∪ F` labeling; carrying the coefficient means constant
/// folding never needs extra layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeLabel {
    Const(u64),
    Var { index: usize, coeff: u64 },
}

impl EdgeLabel {
    pub fn var_index(&self) -> Option<usize> {
        match self {
            EdgeLabel::Const(_) => None,
            EdgeLabel::Var { index, .. } => Some(*index),
        }
    }

    fn span(&self) -> Span {
        self.var_index().map(|i| (i, i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: EdgeLabel,
}

/// A layered DAG with a single source `s` (first layer) and sink `t`
/// (last layer); edges run only between consecutive layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abp {
    n: usize,
    modulus: u64,
    layers: Vec<Vec<usize>>,
    edges: Vec<Edge>,
}

/// Result of the oblivious/ROABP check; `order` is the variable read
/// order (constant-only transitions skipped) when the verdict holds.
#[derive(Debug, Clone)]
pub struct RoabpReport {
    pub report: StructReport,
    pub order: Option<Vec<usize>>,
}

/// Result of the strict-interval check; `intervals` maps node pairs
/// `(u, v)` to the minimal covering span of the subprogram's variables.
#[derive(Debug, Clone)]
pub struct StrictIntervalReport {
    pub report: StructReport,
    pub intervals: BTreeMap<(usize, usize), (usize, usize)>,
}

impl Abp {
    pub fn new(n: usize, modulus: u64, layers: Vec<Vec<usize>>, edges: Vec<Edge>) -> Result<Self> {
        validate_modulus(modulus)?;
        if layers.len() < 2 {
            return Err(Error::InvalidModel("an ABP needs at least two layers".into()));
        }
        if layers.first().map(Vec::len) != Some(1) || layers.last().map(Vec::len) != Some(1) {
            return Err(Error::InvalidModel(
                "first and last layers must be the single source/sink".into(),
            ));
        }
        let mut node_layer: HashMap<usize, usize> = HashMap::new();
        for (k, layer) in layers.iter().enumerate() {
            if layer.is_empty() && k != 0 && k != layers.len() - 1 {
                // allowed: a fully disconnected middle layer computes 0
            }
            for &id in layer {
                if node_layer.insert(id, k).is_some() {
                    return Err(Error::InvalidModel(format!("duplicate node id {id}")));
                }
            }
        }
        let mut edges = edges;
        for e in &mut edges {
            let (Some(&lf), Some(&lt)) = (node_layer.get(&e.from), node_layer.get(&e.to)) else {
                return Err(Error::InvalidModel(format!(
                    "edge {} -> {} references an unknown node",
                    e.from, e.to
                )));
            };
            if lt != lf + 1 {
                return Err(Error::InvalidModel(format!(
                    "edge {} -> {} does not connect consecutive layers",
                    e.from, e.to
                )));
            }
            match &mut e.label {
                EdgeLabel::Const(c) => *c %= modulus,
                EdgeLabel::Var { index, coeff } => {
                    if *index >= n {
                        return Err(Error::InvalidModel(format!(
                            "edge variable x{index} out of range for n = {n}"
                        )));
                    }
                    *coeff %= modulus;
                }
            }
        }
        edges.sort_unstable_by_key(|e| (node_layer[&e.from], e.from, e.to, e.label));
        Ok(Self {
            n,
            modulus,
            layers,
            edges,
        })
    }

    /// The trivial program computing 0.
    pub fn zero(n: usize, modulus: u64) -> Result<Self> {
        Self::new(n, modulus, vec![vec![0], vec![1]], vec![])
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn source(&self) -> usize {
        self.layers[0][0]
    }

    pub fn sink(&self) -> usize {
        self.layers[self.layers.len() - 1][0]
    }

    /// Size of the program: number of nodes.
    pub fn num_nodes(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    fn node_layer(&self) -> HashMap<usize, usize> {
        let mut m = HashMap::new();
        for (k, layer) in self.layers.iter().enumerate() {
            for &id in layer {
                m.insert(id, k);
            }
        }
        m
    }

    /// Drops every node that is not on some source-to-sink path. If no
    /// such path exists the result is the trivial zero program.
    pub fn prune(&self) -> Abp {
        let (s, t) = (self.source(), self.sink());
        let mut fwd: HashMap<usize, bool> = HashMap::new();
        fwd.insert(s, true);
        for e in &self.edges {
            if fwd.get(&e.from).copied().unwrap_or(false) {
                fwd.insert(e.to, true);
            }
        }
        let mut bwd: HashMap<usize, bool> = HashMap::new();
        bwd.insert(t, true);
        for e in self.edges.iter().rev() {
            if bwd.get(&e.to).copied().unwrap_or(false) {
                bwd.insert(e.from, true);
            }
        }
        let alive = |id: usize| {
            fwd.get(&id).copied().unwrap_or(false) && bwd.get(&id).copied().unwrap_or(false)
        };
        if !alive(s) {
            return Abp::new(self.n, self.modulus, vec![vec![s], vec![t]], vec![])
                .expect("trivial zero program");
        }
        let layers: Vec<Vec<usize>> = self
            .layers
            .iter()
            .map(|l| l.iter().copied().filter(|&id| alive(id)).collect())
            .collect();
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .copied()
            .filter(|e| alive(e.from) && alive(e.to))
            .collect();
        Abp::new(self.n, self.modulus, layers, edges).expect("pruning preserves validity")
    }

    /// Gate-free evaluation: layer-by-layer value propagation.
    pub fn eval(&self, point: &[u64]) -> Result<u64> {
        if point.len() != self.n {
            return Err(Error::PointLengthMismatch {
                expected: self.n,
                got: point.len(),
            });
        }
        let p = self.modulus;
        let mut val: HashMap<usize, u64> = HashMap::new();
        val.insert(self.source(), 1 % p);
        for e in &self.edges {
            let Some(&v) = val.get(&e.from) else { continue };
            let w = match e.label {
                EdgeLabel::Const(c) => mulm(v, c, p),
                EdgeLabel::Var { index, coeff } => mulm(v, mulm(coeff, point[index] % p, p), p),
            };
            let entry = val.entry(e.to).or_insert(0);
            *entry = addm(*entry, w, p);
        }
        Ok(val.get(&self.sink()).copied().unwrap_or(0))
    }

    /// Variables readable strictly before each node (union over all
    /// source paths), and strictly after (union over all sink paths).
    pub(crate) fn var_frontiers(&self) -> (HashMap<usize, u64>, HashMap<usize, u64>) {
        let mut before: HashMap<usize, u64> = HashMap::new();
        before.insert(self.source(), 0);
        for e in &self.edges {
            let Some(&b) = before.get(&e.from) else { continue };
            let bits = b | e.label.var_index().map_or(0, |i| 1u64 << i);
            let entry = before.entry(e.to).or_insert(0);
            *entry |= bits;
        }
        let mut after: HashMap<usize, u64> = HashMap::new();
        after.insert(self.sink(), 0);
        for e in self.edges.iter().rev() {
            let Some(&a) = after.get(&e.to) else { continue };
            let bits = a | e.label.var_index().map_or(0, |i| 1u64 << i);
            let entry = after.entry(e.from).or_insert(0);
            *entry |= bits;
        }
        (before, after)
    }

    /// Syntactic multilinearity: no source-to-sink path reads a variable
    /// twice. Checked per variable edge against the reachable-variable
    /// sets on both sides, on the pruned program.
    pub fn check_syntactic_multilinear(&self) -> StructReport {
        let pruned = self.prune();
        let (before, after) = pruned.var_frontiers();
        for e in &pruned.edges {
            let Some(i) = e.label.var_index() else { continue };
            let bit = 1u64 << i;
            if before.get(&e.from).copied().unwrap_or(0) & bit != 0 {
                return StructReport::fail(format!(
                    "x{i} on edge {} -> {} is already read on a path into node {}",
                    e.from, e.to, e.from
                ));
            }
            if after.get(&e.to).copied().unwrap_or(0) & bit != 0 {
                return StructReport::fail(format!(
                    "x{i} on edge {} -> {} is read again on a path out of node {}",
                    e.from, e.to, e.to
                ));
            }
        }
        StructReport::ok()
    }

    /// Dense expansion by a layer-by-layer dynamic program; equals the
    /// sum over source-to-sink paths of the path weight.
    pub fn expand(&self) -> Result<MultilinearPoly> {
        if self.n > MAX_EXPAND_VARS {
            return Err(Error::TooManyVariables {
                n: self.n,
                cap: MAX_EXPAND_VARS,
            });
        }
        let rep = self.check_syntactic_multilinear();
        if !rep.verdict {
            return Err(Error::NonMultilinear(rep.witness.unwrap_or_default()));
        }
        let pruned = self.prune();
        let p = self.modulus;
        let mut poly: HashMap<usize, MultilinearPoly> = HashMap::new();
        poly.insert(pruned.source(), MultilinearPoly::constant(self.n, p, 1)?);
        for e in &pruned.edges {
            let Some(f) = poly.get(&e.from).cloned() else { continue };
            let contrib = match e.label {
                EdgeLabel::Const(c) => f.scale(c),
                EdgeLabel::Var { index, coeff } => {
                    let xi = MultilinearPoly::var(self.n, p, index)?.scale(coeff);
                    f.mul(&xi).map_err(|e| match e {
                        Error::OverlappingSupports(v) => {
                            Error::NonMultilinear(format!("variable x{v} repeats on a path"))
                        }
                        other => other,
                    })?
                }
            };
            match poly.get_mut(&e.to) {
                Some(g) => *g = g.add(&contrib)?,
                None => {
                    poly.insert(e.to, contrib);
                }
            }
        }
        match poly.remove(&pruned.sink()) {
            Some(f) => Ok(f),
            None => MultilinearPoly::zero(self.n, p),
        }
    }

    /// Oblivious + read-once check. On success also reports the variable
    /// read order (constant-only transitions skipped).
    pub fn check_oblivious_roabp(&self) -> RoabpReport {
        let pruned = self.prune();
        let node_layer = pruned.node_layer();
        let transitions = pruned.layers.len() - 1;
        let mut per_transition: Vec<Option<usize>> = vec![None; transitions];
        let mut seen_at: HashMap<usize, usize> = HashMap::new();
        for e in &pruned.edges {
            let k = node_layer[&e.from];
            let Some(i) = e.label.var_index() else { continue };
            match per_transition[k] {
                None => {
                    if let Some(&other) = seen_at.get(&i) {
                        if other != k {
                            return RoabpReport {
                                report: StructReport::fail(format!(
                                    "x{i} appears in layers {other} and {k}"
                                )),
                                order: None,
                            };
                        }
                    }
                    per_transition[k] = Some(i);
                    seen_at.insert(i, k);
                }
                Some(j) if j == i => {}
                Some(j) => {
                    return RoabpReport {
                        report: StructReport::fail(format!(
                            "layer {k} reads two variables x{j} and x{i}"
                        )),
                        order: None,
                    };
                }
            }
        }
        let order: Vec<usize> = per_transition.into_iter().flatten().collect();
        RoabpReport {
            report: StructReport::ok(),
            order: Some(order),
        }
    }

    /// Minimal covering spans of `X_{uv}` for every ordered node pair
    /// with a connecting path, on the pruned program.
    pub(crate) fn subprogram_spans(&self) -> (Vec<usize>, Vec<Vec<bool>>, Vec<Vec<Span>>) {
        let ids: Vec<usize> = self.layers.iter().flatten().copied().collect();
        let index: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let v = ids.len();
        let mut reach = vec![vec![false; v]; v];
        let mut spans: Vec<Vec<Span>> = vec![vec![None; v]; v];
        for start in 0..v {
            for e in &self.edges {
                let (f, t) = (index[&e.from], index[&e.to]);
                if f != start && !reach[start][f] {
                    continue;
                }
                let base = if f == start { None } else { spans[start][f] };
                let s = span_union(base, e.label.span());
                reach[start][t] = true;
                spans[start][t] = span_union(spans[start][t], s);
            }
        }
        (ids, reach, spans)
    }

    /// Strict-interval check with the identity variable order: for every
    /// pair of chained subprograms `[u,v]`, `[v,w]`, the covering spans
    /// of their variables must be disjoint.
    pub fn check_strict_interval(&self) -> StrictIntervalReport {
        let sml = self.check_syntactic_multilinear();
        if !sml.verdict {
            return StrictIntervalReport {
                report: sml,
                intervals: BTreeMap::new(),
            };
        }
        let pruned = self.prune();
        let (ids, reach, spans) = pruned.subprogram_spans();
        let v = ids.len();
        let mut intervals = BTreeMap::new();
        for a in 0..v {
            for b in 0..v {
                if reach[a][b] {
                    if let Some(sp) = spans[a][b] {
                        intervals.insert((ids[a], ids[b]), sp);
                    }
                }
            }
        }
        for mid in 0..v {
            for a in 0..v {
                if !reach[a][mid] {
                    continue;
                }
                for b in 0..v {
                    if reach[mid][b] && spans_overlap(spans[a][mid], spans[mid][b]) {
                        let (s1, s2) = (spans[a][mid].unwrap(), spans[mid][b].unwrap());
                        return StrictIntervalReport {
                            report: StructReport::fail(format!(
                                "subprograms [{},{}] and [{},{}] have overlapping spans [{},{}] and [{},{}]",
                                ids[a], ids[mid], ids[mid], ids[b], s1.0, s1.1, s2.0, s2.1
                            )),
                            intervals,
                        };
                    }
                }
            }
        }
        StrictIntervalReport {
            report: StructReport::ok(),
            intervals,
        }
    }

    /// Renames variables: `x_i` becomes `x_{perm[i]}`.
    pub fn relabel_vars(&self, perm: &[usize]) -> Result<Abp> {
        if perm.len() != self.n {
            return Err(Error::InvalidPermutation(format!(
                "permutation length {} does not match n = {}",
                perm.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &q in perm {
            if q >= self.n || seen[q] {
                return Err(Error::InvalidPermutation("not a bijection".into()));
            }
            seen[q] = true;
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                from: e.from,
                to: e.to,
                label: match e.label {
                    EdgeLabel::Const(c) => EdgeLabel::Const(c),
                    EdgeLabel::Var { index, coeff } => EdgeLabel::Var {
                        index: perm[index],
                        coeff,
                    },
                },
            })
            .collect();
        Abp::new(self.n, self.modulus, self.layers.clone(), edges)
    }

    pub fn to_json(&self) -> String {
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|e| match e.label {
                EdgeLabel::Const(c) => json!({"from": e.from, "to": e.to, "coeff": c}),
                EdgeLabel::Var { index, coeff } => {
                    json!({"from": e.from, "to": e.to, "var": index, "coeff": coeff})
                }
            })
            .collect();
        let v = json!({
            "kind": "abp",
            "n": self.n,
            "p": self.modulus,
            "layers": self.layers,
            "edges": edges,
        });
        serde_json::to_string_pretty(&v).expect("abp serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let n = v
            .get("n")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::Json("missing \"n\"".into()))? as usize;
        let p = v
            .get("p")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::Json("missing \"p\"".into()))?;
        let layers: Vec<Vec<usize>> = serde_json::from_value(
            v.get("layers")
                .ok_or_else(|| Error::Json("missing \"layers\"".into()))?
                .clone(),
        )?;
        let raw_edges = v
            .get("edges")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Json("missing \"edges\"".into()))?;
        let mut edges = Vec::with_capacity(raw_edges.len());
        for e in raw_edges {
            let from = e
                .get("from")
                .and_then(|x| x.as_u64())
                .ok_or_else(|| Error::Json("edge missing \"from\"".into()))?
                as usize;
            let to = e
                .get("to")
                .and_then(|x| x.as_u64())
                .ok_or_else(|| Error::Json("edge missing \"to\"".into()))? as usize;
            let coeff = e.get("coeff").and_then(|x| x.as_u64()).unwrap_or(1);
            let label = match e.get("var").and_then(|x| x.as_u64()) {
                Some(i) => EdgeLabel::Var {
                    index: i as usize,
                    coeff,
                },
                None => EdgeLabel::Const(coeff),
            };
            edges.push(Edge { from, to, label });
        }
        Abp::new(n, p, layers, edges)
    }
}
