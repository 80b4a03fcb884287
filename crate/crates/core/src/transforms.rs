//! Constructive model transformations: strict-interval ABPs into ROABPs
//! (classify, split, reverse, stagger, sum) and logarithmic-depth
//! rebalancing of interval formulas.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::field::{addm, mulm};
use crate::models::{Abp, Edge, EdgeLabel, Formula, Node};
use crate::{Error, Result};

/// Orientation of a non-terminal node: the variables readable before it
/// sit below (Ascending) or above (Descending) the variables readable
/// after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ascending,
    Descending,
}

/// Tags every non-terminal node of the pruned program. Nodes whose
/// before- or after-span is empty carry no constraint of their own;
/// they inherit the direction of their weakly-connected component so
/// every source-to-sink path stays uniformly tagged. Components without
/// any constrained node default to Ascending.
pub fn classify_nodes(p: &Abp) -> Result<BTreeMap<usize, Direction>> {
    let rep = p.check_strict_interval();
    if !rep.report.verdict {
        return Err(Error::InvalidModel(format!(
            "not a strict-interval program: {}",
            rep.report.witness.unwrap_or_default()
        )));
    }
    let pr = p.prune();
    let (ids, reach, spans) = pr.subprogram_spans();
    let index: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let (s, t) = (index[&pr.source()], index[&pr.sink()]);
    let mut forced: HashMap<usize, Direction> = HashMap::new();
    let mut interior: Vec<usize> = Vec::new();
    for (i, &id) in ids.iter().enumerate() {
        if i == s || i == t {
            continue;
        }
        interior.push(id);
        let before = if reach[s][i] { spans[s][i] } else { None };
        let after = if reach[i][t] { spans[i][t] } else { None };
        match (before, after) {
            (None, _) | (_, None) => {}
            (Some((_, b)), Some((c, _))) if b <= c => {
                forced.insert(id, Direction::Ascending);
            }
            (Some((a, _)), Some((_, d))) if d <= a => {
                forced.insert(id, Direction::Descending);
            }
            (Some(x), Some(y)) => {
                return Err(Error::InvalidModel(format!(
                    "node {id} has incomparable spans [{},{}] and [{},{}]",
                    x.0, x.1, y.0, y.1
                )))
            }
        }
    }
    // adjacency among interior nodes (source/sink do not connect components)
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for e in pr.edges() {
        if [e.from, e.to].iter().all(|id| *id != pr.source() && *id != pr.sink()) {
            adj.entry(e.from).or_default().push(e.to);
            adj.entry(e.to).or_default().push(e.from);
        }
    }
    let mut out: BTreeMap<usize, Direction> = BTreeMap::new();
    for &start in &interior {
        if out.contains_key(&start) {
            continue;
        }
        let mut component = vec![start];
        let mut stack = vec![start];
        let mut seen: HashMap<usize, ()> = HashMap::from([(start, ())]);
        while let Some(v) = stack.pop() {
            for &w in adj.get(&v).into_iter().flatten() {
                if seen.insert(w, ()).is_none() {
                    component.push(w);
                    stack.push(w);
                }
            }
        }
        let mut dir: Option<Direction> = None;
        for id in &component {
            if let Some(&d) = forced.get(id) {
                match dir {
                    None => dir = Some(d),
                    Some(prev) if prev != d => {
                        return Err(Error::InvalidModel(format!(
                            "connected component around node {start} mixes directions"
                        )))
                    }
                    _ => {}
                }
            }
        }
        let d = dir.unwrap_or(Direction::Ascending);
        for id in component {
            out.insert(id, d);
        }
    }
    Ok(out)
}

/// Splits into the ascending part and the descending part, so the input
/// polynomial is the sum of the two parts' polynomials. Direct
/// source-to-sink edges go to the ascending part only.
pub fn split_asc_desc(p: &Abp) -> Result<(Abp, Abp)> {
    let pr = p.prune();
    let classes = classify_nodes(&pr)?;
    let (s, t) = (pr.source(), pr.sink());
    let part = |dir: Direction, take_direct: bool| -> Result<Abp> {
        let keep = |id: usize| id == s || id == t || classes.get(&id) == Some(&dir);
        let layers: Vec<Vec<usize>> = pr
            .layers()
            .iter()
            .map(|l| l.iter().copied().filter(|&id| keep(id)).collect())
            .collect();
        let edges: Vec<Edge> = pr
            .edges()
            .iter()
            .copied()
            .filter(|e| keep(e.from) && keep(e.to) && (take_direct || !(e.from == s && e.to == t)))
            .collect();
        Ok(Abp::new(pr.num_vars(), pr.modulus(), layers, edges)?.prune())
    };
    Ok((
        part(Direction::Ascending, true)?,
        part(Direction::Descending, false)?,
    ))
}

/// Reverses all edges and swaps source and sink: same polynomial, read
/// order reversed.
pub fn reverse_abp(p: &Abp) -> Abp {
    let layers: Vec<Vec<usize>> = p.layers().iter().rev().cloned().collect();
    let edges: Vec<Edge> = p
        .edges()
        .iter()
        .map(|e| Edge {
            from: e.to,
            to: e.from,
            label: e.label,
        })
        .collect();
    Abp::new(p.num_vars(), p.modulus(), layers, edges).expect("reversal preserves validity")
}

/// Re-layers a program whose paths read variables in `schedule` order
/// (possibly skipping some) so that transition `k` reads exactly
/// `schedule[k]`, followed by one final constant transition.
///
/// Constant-only path segments are folded: segment weights are
/// pre-summed into each read edge (closure from the previous read's
/// endpoint) and a trailing closure edge feeds the sink. Skipped
/// variables pass through on constant-1 edges.
pub fn stagger_to_schedule(p: &Abp, schedule: &[usize]) -> Result<Abp> {
    let n = p.num_vars();
    let modulus = p.modulus();
    let m = schedule.len();
    let mut pos: HashMap<usize, usize> = HashMap::new();
    for (k, &v) in schedule.iter().enumerate() {
        if v >= n || pos.insert(v, k).is_some() {
            return Err(Error::InvalidPermutation(format!(
                "schedule entry x{v} repeated or out of range"
            )));
        }
    }
    let pr = p.prune();
    let (before, after) = pr.var_frontiers();
    let in_order = |mask: u64, bound: usize, above: bool| -> Result<()> {
        let mut bits = mask;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let Some(&pj) = pos.get(&j) else {
                return Err(Error::Precondition(format!("x{j} is read but not scheduled")));
            };
            if (above && pj <= bound) || (!above && pj >= bound) {
                return Err(Error::Precondition(format!(
                    "x{j} is read out of schedule order"
                )));
            }
        }
        Ok(())
    };
    for e in pr.edges() {
        let Some(i) = e.label.var_index() else { continue };
        let Some(&k) = pos.get(&i) else {
            return Err(Error::Precondition(format!("x{i} is read but not scheduled")));
        };
        in_order(before.get(&e.from).copied().unwrap_or(0), k, false)?;
        in_order(after.get(&e.to).copied().unwrap_or(0), k, true)?;
    }

    let ids: Vec<usize> = pr.layers().iter().flatten().copied().collect();
    let index: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let nn = ids.len();
    let (s, t) = (index[&pr.source()], index[&pr.sink()]);
    // closure[a][b]: total weight of constant-only paths a -> b
    let mut closure: Vec<BTreeMap<usize, u64>> = (0..nn).map(|a| BTreeMap::from([(a, 1 % modulus)])).collect();
    for e in pr.edges() {
        let EdgeLabel::Const(c) = e.label else { continue };
        let (u, v) = (index[&e.from], index[&e.to]);
        for a in 0..nn {
            if let Some(&w) = closure[a].get(&u) {
                let add = mulm(w, c, modulus);
                let entry = closure[a].entry(v).or_insert(0);
                *entry = addm(*entry, add, modulus);
            }
        }
    }

    // new node ids: (v, k) -> v*(m+1)+k; sink -> nn*(m+1)
    let node = |v: usize, k: usize| v * (m + 1) + k;
    let sink = nn * (m + 1);
    let mut layers: Vec<Vec<usize>> = Vec::with_capacity(m + 2);
    layers.push(vec![node(s, 0)]);
    for k in 1..=m {
        layers.push((0..nn).map(|v| node(v, k)).collect());
    }
    layers.push(vec![sink]);

    let mut edges: Vec<Edge> = Vec::new();
    for k in 0..m {
        if k == 0 {
            edges.push(Edge { from: node(s, 0), to: node(s, 1), label: EdgeLabel::Const(1) });
        } else {
            for v in 0..nn {
                edges.push(Edge { from: node(v, k), to: node(v, k + 1), label: EdgeLabel::Const(1) });
            }
        }
    }
    for e in pr.edges() {
        let EdgeLabel::Var { index: i, coeff } = e.label else { continue };
        let k = pos[&i];
        let (u, v) = (index[&e.from], index[&e.to]);
        for w in 0..nn {
            if k == 0 && w != s {
                continue;
            }
            if let Some(&cw) = closure[w].get(&u) {
                edges.push(Edge {
                    from: node(w, k),
                    to: node(v, k + 1),
                    label: EdgeLabel::Var { index: i, coeff: mulm(cw, coeff, modulus) },
                });
            }
        }
    }
    for v in 0..nn {
        if let Some(&cw) = closure[v].get(&t) {
            if m == 0 && v != s {
                continue;
            }
            edges.push(Edge { from: node(v, m), to: sink, label: EdgeLabel::Const(cw) });
        }
    }

    let out = Abp::new(n, modulus, layers, edges)?.prune();
    if out.layers().len() == m + 2 {
        return Ok(out);
    }
    // no surviving path: keep the staggered layer layout so sums still align
    let mut empty_layers = vec![vec![node(s, 0)]];
    empty_layers.extend((1..=m).map(|_| Vec::new()));
    empty_layers.push(vec![sink]);
    Abp::new(n, modulus, empty_layers, Vec::new())
}

/// Staggers a one-ordered program onto the identity schedule; descending
/// programs are reversed first so the result always reads `x_0..x_{n-1}`.
pub fn one_order_to_roabp(p: &Abp, direction: Direction) -> Result<Abp> {
    let identity: Vec<usize> = (0..p.num_vars()).collect();
    match direction {
        Direction::Ascending => stagger_to_schedule(p, &identity),
        Direction::Descending => stagger_to_schedule(&reverse_abp(p), &identity),
    }
}

/// The variable each layer transition reads, if any; errors if some
/// transition reads two.
fn transition_reads(p: &Abp) -> Result<Vec<Option<usize>>> {
    let mut layer_of: HashMap<usize, usize> = HashMap::new();
    for (k, layer) in p.layers().iter().enumerate() {
        for &id in layer {
            layer_of.insert(id, k);
        }
    }
    let mut reads: Vec<Option<usize>> = vec![None; p.layers().len() - 1];
    for e in p.edges() {
        let Some(i) = e.label.var_index() else { continue };
        let k = layer_of[&e.from];
        match reads[k] {
            None => reads[k] = Some(i),
            Some(j) if j == i => {}
            Some(j) => {
                return Err(Error::InvalidModel(format!(
                    "transition {k} reads both x{j} and x{i}"
                )))
            }
        }
    }
    Ok(reads)
}

/// Merges two read orders into a common supersequence, smallest variable
/// first among the ready ones; errors when the orders conflict.
fn merge_orders(a: &[usize], b: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut succ: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut indeg: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in a.iter().chain(b) {
        if v >= n {
            return Err(Error::InvalidPermutation(format!("x{v} out of range")));
        }
        indeg.entry(v).or_insert(0);
    }
    for order in [a, b] {
        for w in order.windows(2) {
            if succ.entry(w[0]).or_default().insert(w[1]) {
                *indeg.entry(w[1]).or_insert(0) += 1;
            }
        }
    }
    let mut ready: BTreeSet<usize> = indeg
        .iter()
        .filter(|&(_, &d)| d == 0)
        .map(|(&v, _)| v)
        .collect();
    let mut out = Vec::with_capacity(indeg.len());
    while let Some(&v) = ready.iter().next() {
        ready.remove(&v);
        out.push(v);
        for &w in succ.get(&v).into_iter().flatten() {
            let d = indeg.get_mut(&w).expect("tracked");
            *d -= 1;
            if *d == 0 {
                ready.insert(w);
            }
        }
    }
    if out.len() != indeg.len() {
        return Err(Error::Precondition("conflicting read orders".into()));
    }
    Ok(out)
}

/// Disjoint union sharing the source and sink. Both inputs must have the
/// same number of layers.
fn glue(a: &Abp, b: &Abp) -> Result<Abp> {
    if a.layers().len() != b.layers().len() {
        return Err(Error::DimensionMismatch {
            left: a.layers().len(),
            right: b.layers().len(),
        });
    }
    if a.modulus() != b.modulus() {
        return Err(Error::ModulusMismatch { left: a.modulus(), right: b.modulus() });
    }
    let offset = a
        .layers()
        .iter()
        .flatten()
        .chain(b.layers().iter().flatten())
        .max()
        .copied()
        .unwrap_or(0)
        + 1;
    let map_id = |id: usize| {
        if id == b.source() {
            a.source()
        } else if id == b.sink() {
            a.sink()
        } else {
            id + offset
        }
    };
    let last = a.layers().len() - 1;
    let mut layers = a.layers().to_vec();
    for (k, layer) in b.layers().iter().enumerate() {
        if k == 0 || k == last {
            continue;
        }
        layers[k].extend(layer.iter().map(|&id| map_id(id)));
    }
    let mut edges = a.edges().to_vec();
    edges.extend(b.edges().iter().map(|e| Edge {
        from: map_id(e.from),
        to: map_id(e.to),
        label: e.label,
    }));
    Abp::new(a.num_vars(), a.modulus(), layers, edges)
}

/// Sum of two ROABPs with compatible read orders, again a ROABP. Inputs
/// that already share a layer layout are glued directly; otherwise both
/// are staggered onto the merged order first.
pub fn sum_roabps(a: &Abp, b: &Abp) -> Result<Abp> {
    let ra = a.check_oblivious_roabp();
    let rb = b.check_oblivious_roabp();
    let (Some(oa), Some(ob)) = (ra.order, rb.order) else {
        let w = ra.report.witness.or(rb.report.witness).unwrap_or_default();
        return Err(Error::InvalidModel(format!("sum operand is not a ROABP: {w}")));
    };
    if a.num_vars() != b.num_vars() {
        return Err(Error::DimensionMismatch {
            left: a.num_vars(),
            right: b.num_vars(),
        });
    }
    let direct_ok = a.layers().len() == b.layers().len() && {
        let ta = transition_reads(a)?;
        let tb = transition_reads(b)?;
        let mut slot: HashMap<usize, usize> = HashMap::new();
        let mut ok = true;
        for (k, pair) in ta.iter().zip(&tb).enumerate() {
            for v in [pair.0, pair.1].into_iter().flatten() {
                match slot.insert(*v, k) {
                    Some(prev) if prev != k => ok = false,
                    _ => {}
                }
            }
            if let (Some(x), Some(y)) = (pair.0, pair.1) {
                if x != y {
                    ok = false;
                }
            }
        }
        ok
    };
    let out = if direct_ok {
        glue(a, b)?
    } else {
        let merged = merge_orders(&oa, &ob, a.num_vars())?;
        glue(
            &stagger_to_schedule(a, &merged)?,
            &stagger_to_schedule(b, &merged)?,
        )?
    };
    let check = out.check_oblivious_roabp();
    if !check.report.verdict {
        return Err(Error::InvalidModel(format!(
            "sum result failed the ROABP check: {}",
            check.report.witness.unwrap_or_default()
        )));
    }
    Ok(out)
}

/// Full pipeline: classify, split, reverse the descending part, stagger
/// both onto the identity order, and glue. The result is a ROABP reading
/// `x_0..x_{n-1}` that computes the same polynomial.
pub fn strict_interval_to_roabp(p: &Abp) -> Result<Abp> {
    let (asc, desc) = split_asc_desc(p)?;
    let q1 = one_order_to_roabp(&asc, Direction::Ascending)?;
    let q2 = one_order_to_roabp(&desc, Direction::Descending)?;
    sum_roabps(&q1, &q2)
}

fn node_size(node: &Node) -> usize {
    match node {
        Node::Var(_) | Node::Const(_) => 1,
        Node::Sum(ch) | Node::Prod(ch) => 1 + ch.iter().map(node_size).sum::<usize>(),
    }
}

fn child_at<'a>(node: &'a Node, step: usize) -> &'a Node {
    match node {
        Node::Sum(ch) | Node::Prod(ch) => &ch[step],
        _ => unreachable!("separator paths only step through gates"),
    }
}

fn separator_path(root: &Node, total: usize) -> Result<Vec<usize>> {
    let mut path = Vec::new();
    let mut cur = root;
    let mut size = total;
    loop {
        if 3 * size <= 2 * total {
            if 3 * size < total {
                return Err(Error::Precondition(format!(
                    "separator walk left the balance window at size {size} of {total}"
                )));
            }
            return Ok(path);
        }
        let children = match cur {
            Node::Sum(ch) | Node::Prod(ch) => ch,
            _ => {
                return Err(Error::Precondition(
                    "separator walk hit a leaf before balancing".into(),
                ))
            }
        };
        let (step, child) = children
            .iter()
            .enumerate()
            .max_by_key(|(i, c)| (node_size(c), usize::MAX - i))
            .expect("gates are non-empty");
        size = node_size(child);
        path.push(step);
        cur = child;
    }
}

/// Finds a gate whose subtree holds between a third and two thirds of
/// the nodes, as the child-index path from the root.
pub fn find_tree_separator(f: &Formula) -> Result<Vec<usize>> {
    let s = f.size();
    if s < 3 {
        return Err(Error::Precondition(format!(
            "formula of size {s} has no proper separator"
        )));
    }
    separator_path(f.root(), s)
}

/// Constant folding: collapses constant subtrees, drops additive zeros
/// and multiplicative ones, and shorts products containing a zero.
fn fold_consts(node: &Node, p: u64) -> Node {
    match node {
        Node::Var(i) => Node::Var(*i),
        Node::Const(c) => Node::Const(c % p),
        Node::Sum(ch) => {
            let mut c_acc = 0u64;
            let mut rest = Vec::new();
            for child in ch {
                match fold_consts(child, p) {
                    Node::Const(c) => c_acc = addm(c_acc, c, p),
                    other => rest.push(other),
                }
            }
            if rest.is_empty() {
                Node::Const(c_acc)
            } else if c_acc == 0 && rest.len() == 1 {
                rest.pop().unwrap()
            } else {
                if c_acc != 0 {
                    rest.push(Node::Const(c_acc));
                }
                Node::Sum(rest)
            }
        }
        Node::Prod(ch) => {
            let mut c_acc = 1 % p;
            let mut rest = Vec::new();
            for child in ch {
                match fold_consts(child, p) {
                    Node::Const(c) => c_acc = mulm(c_acc, c, p),
                    other => rest.push(other),
                }
            }
            if c_acc == 0 || rest.is_empty() {
                Node::Const(c_acc)
            } else if c_acc == 1 && rest.len() == 1 {
                rest.pop().unwrap()
            } else {
                if c_acc != 1 {
                    rest.push(Node::Const(c_acc));
                }
                Node::Prod(rest)
            }
        }
    }
}

fn substitute_zero(node: &Node, path: &[usize]) -> Node {
    let Some((&step, rest)) = path.split_first() else {
        return Node::Const(0);
    };
    match node {
        Node::Sum(ch) => Node::Sum(
            ch.iter()
                .enumerate()
                .map(|(i, c)| if i == step { substitute_zero(c, rest) } else { c.clone() })
                .collect(),
        ),
        Node::Prod(ch) => Node::Prod(
            ch.iter()
                .enumerate()
                .map(|(i, c)| if i == step { substitute_zero(c, rest) } else { c.clone() })
                .collect(),
        ),
        _ => unreachable!("separator paths only step through gates"),
    }
}

/// Balancing recursion on a constant-folded binary tree. Writes the
/// input as A*g + f|_{g:=0} where g is a separator subtree and A is the
/// product of the off-path siblings of product gates on the root-to-g
/// path; all three pieces shrink by a constant factor.
fn reduce_node(node: &Node, p: u64) -> Result<Node> {
    let s = node_size(node);
    if s <= 3 {
        return Ok(node.clone());
    }
    let path = separator_path(node, s)?;
    let mut factors = Vec::new();
    let mut cur = node;
    for &step in &path {
        if let Node::Prod(ch) = cur {
            factors.push(reduce_node(&ch[1 - step], p)?);
        }
        cur = child_at(cur, step);
    }
    factors.push(reduce_node(cur, p)?);
    let lead = if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Node::Prod(factors)
    };
    let rest = fold_consts(&substitute_zero(node, &path), p);
    let rest = reduce_node(&rest, p)?;
    Ok(match rest {
        Node::Const(0) => lead,
        other => Node::Sum(vec![lead, other]),
    })
}

/// Rebalances an interval formula to logarithmic depth while preserving
/// the interval property and the computed polynomial.
pub fn depth_reduce_interval(f: &Formula) -> Result<Formula> {
    let rep = f.check_interval_formula();
    if !rep.verdict {
        return Err(Error::InvalidModel(format!(
            "not an interval formula: {}",
            rep.witness.unwrap_or_default()
        )));
    }
    let binary = f.binarize();
    let folded = fold_consts(binary.root(), f.modulus());
    let reduced = reduce_node(&folded, f.modulus())?;
    Formula::new(f.num_vars(), f.modulus(), reduced)
}

/// Depth budget the reduction guarantees for an input of the given size.
pub fn depth_bound(size: usize) -> usize {
    (2.0 * (size.max(1) as f64).log(1.5) + 4.0).floor() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DEFAULT_PRIME;
    use crate::hardpoly::{random_interval_formula, random_roabp, random_strict_interval_abp};
    use crate::MultilinearPoly;

    const P: u64 = DEFAULT_PRIME;

    fn var(i: usize) -> EdgeLabel {
        EdgeLabel::Var { index: i, coeff: 1 }
    }

    fn path_abp(reads: &[usize], n: usize) -> Abp {
        let layers: Vec<Vec<usize>> = (0..=reads.len()).map(|k| vec![k]).collect();
        let edges: Vec<Edge> = reads
            .iter()
            .enumerate()
            .map(|(k, &i)| Edge { from: k, to: k + 1, label: var(i) })
            .collect();
        Abp::new(n, P, layers, edges).unwrap()
    }

    /// Two parallel branches reading (x0, x1) and (x1, x0).
    fn two_branch() -> Abp {
        Abp::new(
            2,
            P,
            vec![vec![0], vec![1, 2], vec![3]],
            vec![
                Edge { from: 0, to: 1, label: var(0) },
                Edge { from: 1, to: 3, label: var(1) },
                Edge { from: 0, to: 2, label: var(1) },
                Edge { from: 2, to: 3, label: var(0) },
            ],
        )
        .unwrap()
    }

    /// Scales the program's polynomial by `c` (applied on source edges).
    fn scale_abp(p: &Abp, c: u64) -> Abp {
        let s = p.source();
        let edges: Vec<Edge> = p
            .edges()
            .iter()
            .map(|e| {
                if e.from != s {
                    return *e;
                }
                let label = match e.label {
                    EdgeLabel::Const(k) => EdgeLabel::Const(mulm(k, c, P)),
                    EdgeLabel::Var { index, coeff } => {
                        EdgeLabel::Var { index, coeff: mulm(coeff, c, P) }
                    }
                };
                Edge { from: e.from, to: e.to, label }
            })
            .collect();
        Abp::new(p.num_vars(), p.modulus(), p.layers().to_vec(), edges).unwrap()
    }

    #[test]
    fn classify_directions() {
        let asc = path_abp(&[0, 1], 2);
        assert_eq!(classify_nodes(&asc).unwrap()[&1], Direction::Ascending);
        let desc = path_abp(&[1, 0], 2);
        assert_eq!(classify_nodes(&desc).unwrap()[&1], Direction::Descending);

        // constant-only interior node defaults to ascending
        let consts = Abp::new(
            2,
            P,
            vec![vec![0], vec![1], vec![2]],
            vec![
                Edge { from: 0, to: 1, label: EdgeLabel::Const(3) },
                Edge { from: 1, to: 2, label: EdgeLabel::Const(5) },
            ],
        )
        .unwrap();
        assert_eq!(classify_nodes(&consts).unwrap()[&1], Direction::Ascending);
    }

    #[test]
    fn split_two_branch() {
        let p = two_branch();
        let (asc, desc) = split_asc_desc(&p).unwrap();
        let x0x1 = MultilinearPoly::from_terms(2, P, [(0b11u32, 1u64)]).unwrap();
        assert_eq!(asc.expand().unwrap(), x0x1);
        assert_eq!(desc.expand().unwrap(), x0x1);
    }

    #[test]
    fn split_all_ascending_gives_zero_part() {
        let p = path_abp(&[0, 1, 2], 3);
        let (asc, desc) = split_asc_desc(&p).unwrap();
        assert_eq!(asc.expand().unwrap(), p.expand().unwrap());
        assert!(desc.expand().unwrap().is_zero());
    }

    #[test]
    fn split_sums_to_input_on_random_corpus() {
        for seed in 0..50 {
            let p = random_strict_interval_abp(6, 30, seed, P).unwrap();
            let (asc, desc) = split_asc_desc(&p).unwrap();
            let sum = asc.expand().unwrap().add(&desc.expand().unwrap()).unwrap();
            assert_eq!(sum, p.expand().unwrap(), "seed {seed}");

            // no edge crosses between differently tagged nodes
            let pr = p.prune();
            let classes = classify_nodes(&pr).unwrap();
            for e in pr.edges() {
                if let (Some(a), Some(b)) = (classes.get(&e.from), classes.get(&e.to)) {
                    assert_eq!(a, b, "mixed edge {} -> {} at seed {seed}", e.from, e.to);
                }
            }
        }
    }

    #[test]
    fn reverse_reverses() {
        let p = path_abp(&[0, 1], 2);
        let r = reverse_abp(&p);
        assert_eq!(r.expand().unwrap(), p.expand().unwrap());
        assert_eq!(r.check_oblivious_roabp().order.unwrap(), vec![1, 0]);
        assert_eq!(reverse_abp(&r).expand().unwrap(), p.expand().unwrap());

        let widths: Vec<usize> = p.layers().iter().map(Vec::len).collect();
        let rwidths: Vec<usize> = r.layers().iter().map(Vec::len).collect();
        assert_eq!(rwidths, widths.into_iter().rev().collect::<Vec<_>>());
    }

    #[test]
    fn stagger_pads_skipped_variables() {
        // path reading x0 then x2 in a 3-variable space
        let p = path_abp(&[0, 2], 3);
        let q = one_order_to_roabp(&p, Direction::Ascending).unwrap();
        let rep = q.check_oblivious_roabp();
        assert!(rep.report.verdict);
        assert_eq!(rep.order.unwrap(), vec![0, 2]);
        assert_eq!(q.layers().len(), 5);
        assert_eq!(q.expand().unwrap(), p.expand().unwrap());
    }

    #[test]
    fn stagger_folds_constant_segments() {
        // s -c:2-> a -x0-> b -c:3-> c -x1-> d -c:5-> t computes 30*x0*x1
        let p = Abp::new(
            2,
            P,
            vec![vec![0], vec![1], vec![2], vec![3], vec![4], vec![5]],
            vec![
                Edge { from: 0, to: 1, label: EdgeLabel::Const(2) },
                Edge { from: 1, to: 2, label: var(0) },
                Edge { from: 2, to: 3, label: EdgeLabel::Const(3) },
                Edge { from: 3, to: 4, label: var(1) },
                Edge { from: 4, to: 5, label: EdgeLabel::Const(5) },
            ],
        )
        .unwrap();
        let q = one_order_to_roabp(&p, Direction::Ascending).unwrap();
        assert!(q.check_oblivious_roabp().report.verdict);
        assert_eq!(q.expand().unwrap(), p.expand().unwrap());
        assert_eq!(q.expand().unwrap().coeff(0b11), 30);
    }

    #[test]
    fn stagger_descending_path() {
        let p = path_abp(&[1, 0], 2);
        let q = one_order_to_roabp(&p, Direction::Descending).unwrap();
        assert!(q.check_oblivious_roabp().report.verdict);
        assert_eq!(
            q.expand().unwrap(),
            MultilinearPoly::from_terms(2, P, [(0b11u32, 1u64)]).unwrap()
        );
    }

    #[test]
    fn stagger_rejects_out_of_order_reads() {
        let p = path_abp(&[1, 0], 2);
        assert!(matches!(
            one_order_to_roabp(&p, Direction::Ascending),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn sum_disjoint_singletons() {
        let a = path_abp(&[0], 2);
        let b = path_abp(&[1], 2);
        let q = sum_roabps(&a, &b).unwrap();
        assert!(q.check_oblivious_roabp().report.verdict);
        let expect = MultilinearPoly::from_terms(2, P, [(0b01u32, 1u64), (0b10, 1)]).unwrap();
        assert_eq!(q.expand().unwrap(), expect);
    }

    #[test]
    fn sum_with_negation_cancels() {
        for seed in 0..10 {
            let p = random_roabp(5, 3, seed, P).unwrap();
            let q = sum_roabps(&p, &scale_abp(&p, P - 1)).unwrap();
            assert!(q.expand().unwrap().is_zero(), "seed {seed}");
        }
    }

    #[test]
    fn sum_same_layout_width_bound() {
        // two programs over the same order and layout glue directly
        let a = path_abp(&[0, 1, 2], 3);
        let b = scale_abp(&path_abp(&[0, 1, 2], 3), 7);
        let q = sum_roabps(&a, &b).unwrap();
        let wq = q.layers().iter().map(Vec::len).max().unwrap();
        assert!(wq <= 1 + 1 + 2);
        let expect = MultilinearPoly::from_terms(3, P, [(0b111u32, 8u64)]).unwrap();
        assert_eq!(q.expand().unwrap(), expect);
    }

    #[test]
    fn sum_random_roabps() {
        for seed in 0..10 {
            // same seed and n give both programs the same read order
            let a = random_roabp(5, 3, seed, P).unwrap();
            let b = random_roabp(5, 2, seed, P).unwrap();
            let q = sum_roabps(&a, &b).unwrap();
            assert!(q.check_oblivious_roabp().report.verdict, "seed {seed}");
            assert_eq!(
                q.expand().unwrap(),
                a.expand().unwrap().add(&b.expand().unwrap()).unwrap(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn conversion_two_branch_end_to_end() {
        let p = two_branch();
        let q = strict_interval_to_roabp(&p).unwrap();
        assert!(q.check_oblivious_roabp().report.verdict);
        let expect = MultilinearPoly::from_terms(2, P, [(0b11u32, 2u64)]).unwrap();
        assert_eq!(q.expand().unwrap(), expect);
    }

    #[test]
    fn conversion_of_identity_roabp_is_stable() {
        let p = path_abp(&[0, 1, 2], 3);
        let q = strict_interval_to_roabp(&p).unwrap();
        assert_eq!(q.expand().unwrap(), p.expand().unwrap());
    }

    #[test]
    fn conversion_random_corpus() {
        for seed in 0..30 {
            let p = random_strict_interval_abp(6, 30, seed, P).unwrap();
            let q = strict_interval_to_roabp(&p).unwrap();
            assert!(q.check_oblivious_roabp().report.verdict, "seed {seed}");
            assert_eq!(q.expand().unwrap(), p.expand().unwrap(), "seed {seed}");
            let bound = 2 * p.num_vars() * p.num_nodes();
            assert!(
                q.num_nodes() <= bound,
                "seed {seed}: {} nodes > {bound}",
                q.num_nodes()
            );
        }
    }

    fn comb5() -> Formula {
        // x0*(x1*(x2*(x3*x4)))
        Formula::new(
            5,
            P,
            Node::Prod(vec![
                Node::Var(0),
                Node::Prod(vec![
                    Node::Var(1),
                    Node::Prod(vec![
                        Node::Var(2),
                        Node::Prod(vec![Node::Var(3), Node::Var(4)]),
                    ]),
                ]),
            ]),
        )
        .unwrap()
    }

    #[test]
    fn separator_on_comb() {
        let f = comb5();
        assert_eq!(f.size(), 9);
        let path = find_tree_separator(&f).unwrap();
        assert_eq!(path, vec![1, 1]);
        let mut cur = f.root();
        for &s in &path {
            cur = child_at(cur, s);
        }
        assert_eq!(node_size(cur), 5);
    }

    #[test]
    fn separator_on_three_nodes() {
        let f = Formula::new(2, P, Node::Sum(vec![Node::Var(0), Node::Var(1)])).unwrap();
        let path = find_tree_separator(&f).unwrap();
        assert_eq!(path.len(), 1);
        assert!(find_tree_separator(
            &Formula::new(1, P, Node::Var(0)).unwrap()
        )
        .is_err());
    }

    #[test]
    fn depth_reduce_comb() {
        let f = comb5();
        let g = depth_reduce_interval(&f).unwrap();
        assert!(g.check_interval_formula().verdict);
        assert_eq!(g.expand().unwrap(), f.expand().unwrap());
        assert!(g.depth() <= 6, "depth {}", g.depth());
    }

    #[test]
    fn depth_reduce_sum_under_product() {
        // x0*(x1+(x2*(x3+x4)))
        let f = Formula::new(
            5,
            P,
            Node::Prod(vec![
                Node::Var(0),
                Node::Sum(vec![
                    Node::Var(1),
                    Node::Prod(vec![
                        Node::Var(2),
                        Node::Sum(vec![Node::Var(3), Node::Var(4)]),
                    ]),
                ]),
            ]),
        )
        .unwrap();
        let g = depth_reduce_interval(&f).unwrap();
        assert!(g.check_interval_formula().verdict);
        assert_eq!(g.expand().unwrap(), f.expand().unwrap());
    }

    #[test]
    fn depth_reduce_linear_in_separator_fixture() {
        // h*(p+g) with g the heavy subtree: checks the g:=0 branch keeps
        // the h*p cross term
        let f = Formula::new(
            4,
            P,
            Node::Prod(vec![
                Node::Var(0),
                Node::Sum(vec![
                    Node::Var(1),
                    Node::Prod(vec![Node::Var(2), Node::Var(3)]),
                ]),
            ]),
        )
        .unwrap();
        let g = depth_reduce_interval(&f).unwrap();
        assert_eq!(g.expand().unwrap(), f.expand().unwrap());
        let expect = MultilinearPoly::from_terms(
            4,
            P,
            [(0b0011u32, 1u64), (0b1101, 1)],
        )
        .unwrap();
        assert_eq!(g.expand().unwrap(), expect);
    }

    #[test]
    fn depth_reduce_random_corpus() {
        for seed in 0..30 {
            let f = random_interval_formula(8, 80, seed, P).unwrap();
            let g = depth_reduce_interval(&f).unwrap();
            assert!(g.check_interval_formula().verdict, "seed {seed}");
            assert_eq!(g.expand().unwrap(), f.expand().unwrap(), "seed {seed}");
            let s = f.binarize().size();
            assert!(
                g.depth() <= depth_bound(s),
                "seed {seed}: depth {} > bound {} at size {s}",
                g.depth(),
                depth_bound(s)
            );
        }
    }

    #[test]
    fn depth_reduce_rejects_non_interval() {
        let f = Formula::new(
            3,
            P,
            Node::Prod(vec![
                Node::Var(1),
                Node::Sum(vec![Node::Var(0), Node::Var(2)]),
            ]),
        )
        .unwrap();
        assert!(matches!(
            depth_reduce_interval(&f),
            Err(Error::InvalidModel(_))
        ));
    }
}
