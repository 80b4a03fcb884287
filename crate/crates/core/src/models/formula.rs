//! Rooted gate trees with sum/product gates of arbitrary arity.

use serde_json::{json, Value};

use crate::field::{addm, mulm};
use crate::models::{span_union, spans_overlap, Span, StructReport};
use crate::{Error, MultilinearPoly, Result};

/// A formula node. Internal gates carry one or more children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Var(usize),
    Const(u64),
    Sum(Vec<Node>),
    Prod(Vec<Node>),
}

/// An arithmetic formula over `n` variables and modulus `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    n: usize,
    modulus: u64,
    root: Node,
}

impl Formula {
    pub fn new(n: usize, modulus: u64, root: Node) -> Result<Self> {
        crate::field::validate_modulus(modulus)?;
        validate_node(&root, n)?;
        let root = reduce_consts(root, modulus);
        Ok(Self { n, modulus, root })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Total node count, leaves included.
    pub fn size(&self) -> usize {
        node_size(&self.root)
    }

    /// Length of the longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        node_depth(&self.root)
    }

    /// Expands the formula into its dense polynomial. This is the oracle
    /// every transformation is tested against.
    pub fn expand(&self) -> Result<MultilinearPoly> {
        expand_node(&self.root, self.n, self.modulus)
    }

    /// Gate-wise evaluation at a point, without expanding.
    pub fn eval(&self, point: &[u64]) -> Result<u64> {
        if point.len() != self.n {
            return Err(Error::PointLengthMismatch {
                expected: self.n,
                got: point.len(),
            });
        }
        Ok(eval_node(&self.root, point, self.modulus))
    }

    /// Checks that every product gate has pairwise variable-disjoint children.
    pub fn check_syntactic_multilinear(&self) -> StructReport {
        match check_sml(&self.root) {
            Ok(_) => StructReport::ok(),
            Err(w) => StructReport::fail(w),
        }
    }

    /// Number of leaves labeled by each variable.
    pub fn read_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n];
        count_reads(&self.root, &mut counts);
        counts
    }

    /// Maximum read count over all variables.
    pub fn max_read(&self) -> usize {
        self.read_counts().into_iter().max().unwrap_or(0)
    }

    /// Read-once check: every variable labels at most one leaf.
    pub fn check_rof(&self) -> StructReport {
        let counts = self.read_counts();
        match counts.iter().position(|&c| c > 1) {
            None => StructReport::ok(),
            Some(i) => StructReport::fail(format!("x{i} is read {} times", counts[i])),
        }
    }

    /// Minimal covering span `[min, max]` of the variables under the root.
    pub fn span(&self) -> Span {
        node_span(&self.root)
    }

    /// Interval-formula check: bottom-up, every product gate must have
    /// pairwise disjoint child spans. Sum gates take span unions. Minimal
    /// covering spans are disjoint exactly when disjoint covering
    /// intervals exist, so the check is sound and complete.
    pub fn check_interval_formula(&self) -> StructReport {
        match check_interval(&self.root) {
            Ok(_) => StructReport::ok(),
            Err(w) => StructReport::fail(w),
        }
    }

    /// Rewrites every gate of arity > 2 into a balanced binary tree.
    /// Product children are ordered by span start first, which keeps the
    /// interval property intact for interval formulas.
    pub fn binarize(&self) -> Formula {
        Formula {
            n: self.n,
            modulus: self.modulus,
            root: binarize_node(self.root.clone()),
        }
    }

    /// True if every internal gate has exactly two children.
    pub fn is_binary(&self) -> bool {
        node_is_binary(&self.root)
    }
}

fn validate_node(node: &Node, n: usize) -> Result<()> {
    match node {
        Node::Var(i) => {
            if *i >= n {
                return Err(Error::InvalidModel(format!(
                    "leaf variable x{i} out of range for n = {n}"
                )));
            }
        }
        Node::Const(_) => {}
        Node::Sum(children) | Node::Prod(children) => {
            if children.is_empty() {
                return Err(Error::InvalidModel("internal gate with no children".into()));
            }
            for c in children {
                validate_node(c, n)?;
            }
        }
    }
    Ok(())
}

fn reduce_consts(node: Node, p: u64) -> Node {
    match node {
        Node::Const(c) => Node::Const(c % p),
        Node::Sum(ch) => Node::Sum(ch.into_iter().map(|c| reduce_consts(c, p)).collect()),
        Node::Prod(ch) => Node::Prod(ch.into_iter().map(|c| reduce_consts(c, p)).collect()),
        leaf => leaf,
    }
}

fn node_size(node: &Node) -> usize {
    match node {
        Node::Var(_) | Node::Const(_) => 1,
        Node::Sum(ch) | Node::Prod(ch) => 1 + ch.iter().map(node_size).sum::<usize>(),
    }
}

fn node_depth(node: &Node) -> usize {
    match node {
        Node::Var(_) | Node::Const(_) => 0,
        Node::Sum(ch) | Node::Prod(ch) => 1 + ch.iter().map(node_depth).max().unwrap_or(0),
    }
}

fn expand_node(node: &Node, n: usize, p: u64) -> Result<MultilinearPoly> {
    match node {
        Node::Var(i) => MultilinearPoly::var(n, p, *i),
        Node::Const(c) => MultilinearPoly::constant(n, p, *c),
        Node::Sum(ch) => {
            let mut acc = MultilinearPoly::zero(n, p)?;
            for c in ch {
                acc = acc.add(&expand_node(c, n, p)?)?;
            }
            Ok(acc)
        }
        Node::Prod(ch) => {
            let mut acc = MultilinearPoly::constant(n, p, 1)?;
            for c in ch {
                let f = expand_node(c, n, p)?;
                acc = acc.mul(&f).map_err(|e| match e {
                    Error::OverlappingSupports(v) => Error::NonMultilinear(format!(
                        "product gate merges operands sharing x{v}"
                    )),
                    other => other,
                })?;
            }
            Ok(acc)
        }
    }
}

fn eval_node(node: &Node, point: &[u64], p: u64) -> u64 {
    match node {
        Node::Var(i) => point[*i] % p,
        Node::Const(c) => c % p,
        Node::Sum(ch) => ch.iter().fold(0, |acc, c| addm(acc, eval_node(c, point, p), p)),
        Node::Prod(ch) => ch
            .iter()
            .fold(1 % p, |acc, c| mulm(acc, eval_node(c, point, p), p)),
    }
}

/// Returns the variable set (as a bitmask) or a witness string on failure.
fn check_sml(node: &Node) -> std::result::Result<u64, String> {
    match node {
        Node::Var(i) => Ok(1u64 << i),
        Node::Const(_) => Ok(0),
        Node::Sum(ch) => {
            let mut acc = 0u64;
            for c in ch {
                acc |= check_sml(c)?;
            }
            Ok(acc)
        }
        Node::Prod(ch) => {
            let mut acc = 0u64;
            for c in ch {
                let vars = check_sml(c)?;
                let shared = acc & vars;
                if shared != 0 {
                    return Err(format!(
                        "product gate with children sharing x{}",
                        shared.trailing_zeros()
                    ));
                }
                acc |= vars;
            }
            Ok(acc)
        }
    }
}

fn count_reads(node: &Node, counts: &mut [usize]) {
    match node {
        Node::Var(i) => counts[*i] += 1,
        Node::Const(_) => {}
        Node::Sum(ch) | Node::Prod(ch) => {
            for c in ch {
                count_reads(c, counts);
            }
        }
    }
}

pub(crate) fn node_span(node: &Node) -> Span {
    match node {
        Node::Var(i) => Some((*i, *i)),
        Node::Const(_) => None,
        Node::Sum(ch) | Node::Prod(ch) => ch.iter().fold(None, |acc, c| span_union(acc, node_span(c))),
    }
}

fn check_interval(node: &Node) -> std::result::Result<Span, String> {
    match node {
        Node::Var(i) => Ok(Some((*i, *i))),
        Node::Const(_) => Ok(None),
        Node::Sum(ch) => {
            let mut acc = None;
            for c in ch {
                acc = span_union(acc, check_interval(c)?);
            }
            Ok(acc)
        }
        Node::Prod(ch) => {
            let mut spans = Vec::new();
            let mut acc = None;
            for c in ch {
                let s = check_interval(c)?;
                acc = span_union(acc, s);
                if let Some(sp) = s {
                    spans.push(sp);
                }
            }
            spans.sort_unstable();
            for w in spans.windows(2) {
                if spans_overlap(Some(w[0]), Some(w[1])) {
                    return Err(format!(
                        "product gate children on overlapping spans [{},{}] and [{},{}]",
                        w[0].0, w[0].1, w[1].0, w[1].1
                    ));
                }
            }
            Ok(acc)
        }
    }
}

fn node_is_binary(node: &Node) -> bool {
    match node {
        Node::Var(_) | Node::Const(_) => true,
        Node::Sum(ch) | Node::Prod(ch) => ch.len() == 2 && ch.iter().all(node_is_binary),
    }
}

fn binarize_node(node: Node) -> Node {
    match node {
        Node::Sum(ch) => {
            let ch: Vec<Node> = ch.into_iter().map(binarize_node).collect();
            comb(ch, false)
        }
        Node::Prod(ch) => {
            let mut ch: Vec<Node> = ch.into_iter().map(binarize_node).collect();
            // span-sorted order keeps adjacent groupings interval-disjoint
            ch.sort_by_key(|c| match node_span(c) {
                None => (0, 0),
                Some((lo, hi)) => (lo + 1, hi),
            });
            comb(ch, true)
        }
        leaf => leaf,
    }
}

fn comb(mut children: Vec<Node>, is_prod: bool) -> Node {
    match children.len() {
        0 => unreachable!("validated gates are non-empty"),
        1 => children.pop().unwrap(),
        _ => {
            let right = children.split_off(children.len() / 2);
            let pair = vec![comb(children, is_prod), comb(right, is_prod)];
            if is_prod {
                Node::Prod(pair)
            } else {
                Node::Sum(pair)
            }
        }
    }
}

// --- JSON: nested arrays ["+", ...] / ["*", ...] / {"x": i} / {"c": v} ---

fn node_to_value(node: &Node) -> Value {
    match node {
        Node::Var(i) => json!({ "x": i }),
        Node::Const(c) => json!({ "c": c }),
        Node::Sum(ch) => {
            let mut arr = vec![json!("+")];
            arr.extend(ch.iter().map(node_to_value));
            Value::Array(arr)
        }
        Node::Prod(ch) => {
            let mut arr = vec![json!("*")];
            arr.extend(ch.iter().map(node_to_value));
            Value::Array(arr)
        }
    }
}

fn node_from_value(v: &Value) -> Result<Node> {
    match v {
        Value::Object(map) => {
            if let Some(x) = map.get("x") {
                let i = x
                    .as_u64()
                    .ok_or_else(|| Error::Json("\"x\" must be an integer".into()))?;
                Ok(Node::Var(i as usize))
            } else if let Some(c) = map.get("c") {
                let c = c
                    .as_u64()
                    .ok_or_else(|| Error::Json("\"c\" must be a non-negative integer".into()))?;
                Ok(Node::Const(c))
            } else {
                Err(Error::Json("leaf object needs an \"x\" or \"c\" key".into()))
            }
        }
        Value::Array(arr) => {
            let op = arr
                .first()
                .and_then(|v| v.as_str())
                .ok_or_else(|| Error::Json("gate array must start with \"+\" or \"*\"".into()))?;
            let children = arr[1..]
                .iter()
                .map(node_from_value)
                .collect::<Result<Vec<_>>>()?;
            match op {
                "+" => Ok(Node::Sum(children)),
                "*" => Ok(Node::Prod(children)),
                other => Err(Error::Json(format!("unknown gate operator {other:?}"))),
            }
        }
        _ => Err(Error::Json("formula node must be an object or array".into())),
    }
}

impl Formula {
    pub fn to_json(&self) -> String {
        let v = json!({
            "kind": "formula",
            "n": self.n,
            "p": self.modulus,
            "root": node_to_value(&self.root),
        });
        serde_json::to_string_pretty(&v).expect("formula serialization")
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
        let root = node_from_value(
            v.get("root")
                .ok_or_else(|| Error::Json("missing \"root\"".into()))?,
        )?;
        Formula::new(n, p, root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DEFAULT_PRIME;

    const P: u64 = DEFAULT_PRIME;

    fn f(n: usize, root: Node) -> Formula {
        Formula::new(n, P, root).unwrap()
    }

    fn x(i: usize) -> Node {
        Node::Var(i)
    }

    #[test]
    fn expand_examples() {
        // (x1 + x2) * x3 = x1x3 + x2x3
        let g = f(3, Node::Prod(vec![Node::Sum(vec![x(0), x(1)]), x(2)]));
        let expect =
            MultilinearPoly::from_terms(3, P, [(0b101u32, 1u64), (0b110, 1)]).unwrap();
        assert_eq!(g.expand().unwrap(), expect);

        // single leaf
        let g = f(1, x(0));
        assert_eq!(
            g.expand().unwrap(),
            MultilinearPoly::var(1, P, 0).unwrap()
        );

        // x1 * (x2 + x3 * (x4 + x5)) = x1x2 + x1x3x4 + x1x3x5
        let g = f(
            5,
            Node::Prod(vec![
                x(0),
                Node::Sum(vec![x(1), Node::Prod(vec![x(2), Node::Sum(vec![x(3), x(4)])])]),
            ]),
        );
        let expect = MultilinearPoly::from_terms(
            5,
            P,
            [(0b00011u32, 1u64), (0b01101, 1), (0b10101, 1)],
        )
        .unwrap();
        assert_eq!(g.expand().unwrap(), expect);
    }

    #[test]
    fn expand_rejects_non_multilinear() {
        let g = f(2, Node::Prod(vec![x(0), Node::Sum(vec![x(0), x(1)])]));
        assert!(matches!(g.expand(), Err(Error::NonMultilinear(_))));
        let rep = g.check_syntactic_multilinear();
        assert!(!rep.verdict);
        assert!(rep.witness.unwrap().contains("x0"));
    }

    #[test]
    fn sml_check_accepts_disjoint_product() {
        let g = f(2, Node::Prod(vec![x(0), x(1)]));
        assert!(g.check_syntactic_multilinear().verdict);
    }

    #[test]
    fn rof_and_read_counts() {
        // (1 + x1x2)(1 + x3x4): each variable read once
        let blk = |a, b| Node::Sum(vec![Node::Const(1), Node::Prod(vec![x(a), x(b)])]);
        let g = f(4, Node::Prod(vec![blk(0, 1), blk(2, 3)]));
        assert!(g.check_rof().verdict);
        assert_eq!(g.max_read(), 1);

        // x1x2 + x2x3 + x1x3 as an SOP: every variable read twice
        let sop = f(
            3,
            Node::Sum(vec![
                Node::Prod(vec![x(0), x(1)]),
                Node::Prod(vec![x(1), x(2)]),
                Node::Prod(vec![x(0), x(2)]),
            ]),
        );
        assert!(!sop.check_rof().verdict);
        assert_eq!(sop.max_read(), 2);
        // ...but it is an interval formula
        assert!(sop.check_interval_formula().verdict);
    }

    #[test]
    fn interval_check_rejects_straddle() {
        // x2 * (x1 + x3): [1,1] sits inside [0,2]
        let g = f(3, Node::Prod(vec![x(1), Node::Sum(vec![x(0), x(2)])]));
        assert!(!g.check_interval_formula().verdict);
    }

    #[test]
    fn rof_in_index_order_is_interval() {
        let blk = |a, b| Node::Sum(vec![Node::Const(1), Node::Prod(vec![x(a), x(b)])]);
        let g = f(4, Node::Prod(vec![blk(0, 1), blk(2, 3)]));
        assert!(g.check_interval_formula().verdict);
    }

    #[test]
    fn binarize_preserves_semantics_and_intervals() {
        let g = f(
            6,
            Node::Prod(vec![
                Node::Sum(vec![x(4), x(5), Node::Const(3)]),
                x(3),
                Node::Prod(vec![x(0), x(1), x(2)]),
            ]),
        );
        assert!(g.check_interval_formula().verdict);
        let b = g.binarize();
        assert!(b.is_binary());
        assert!(b.check_interval_formula().verdict);
        assert_eq!(b.expand().unwrap(), g.expand().unwrap());
    }

    #[test]
    fn json_round_trip() {
        let g = f(
            3,
            Node::Sum(vec![Node::Prod(vec![x(0), x(1)]), Node::Const(5), x(2)]),
        );
        let s = g.to_json();
        let h = Formula::from_json(&s).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn expand_matches_eval_at_random_points() {
        let g = f(
            5,
            Node::Prod(vec![
                x(0),
                Node::Sum(vec![x(1), Node::Prod(vec![x(2), Node::Sum(vec![x(3), x(4)])])]),
            ]),
        );
        let poly = g.expand().unwrap();
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..100 {
            let pt: Vec<u64> = (0..5)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    state % P
                })
                .collect();
            assert_eq!(poly.eval(&pt).unwrap(), g.eval(&pt).unwrap());
        }
    }
}
