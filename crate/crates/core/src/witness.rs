//! Infection witness trees for the d-neighbour process between two
//! infected hyperplanes.
//!
//! Fix a strip index `s` and infect `V_{(s-1)n} ∪ V_{sn}`. Every cell `v`
//! strictly between those levels has offset `t_v = sum(v) - (s-1)n` and a
//! designated set of `d` infectors
//!
//! ```text
//! Pre(v) = { v + e_j : v_j <= t_v } ∪ { v - e_j : v_j > t_v }.
//! ```
//!
//! Expanding `Pre` recursively until labels land on a seeded hyperplane
//! gives a d-ary tree certifying that `v` gets infected. A label's subtree
//! depends only on the label, so the tree is stored as a DAG with one node
//! per distinct label; the tree is its unfolding and has the same depth.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cellset::CellSet;
use crate::constructions::level_set;
use crate::error::{Error, Result};
use crate::lattice::{level_of, Cell, LatticeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StripContext {
    d: u32,
    n: u32,
    s: u32,
}

impl StripContext {
    /// Requires `ceil(d/n) <= s <= d`.
    pub fn new(d: u32, n: u32, s: u32) -> Result<Self> {
        LatticeSpec::grid(d, n)?;
        let lo = d.div_ceil(n);
        if s < lo || s > d {
            return Err(Error::input(format!(
                "strip index s = {s} outside {lo}..={d} for d = {d}, n = {n}"
            )));
        }
        Ok(StripContext { d, n, s })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn lattice(&self) -> LatticeSpec {
        LatticeSpec::grid(self.d, self.n).expect("validated in new")
    }

    /// Level of the lower seeded hyperplane, `(s-1)n`.
    pub fn lower_level(&self) -> u32 {
        (self.s - 1) * self.n
    }

    /// Level of the upper seeded hyperplane, `sn`.
    pub fn upper_level(&self) -> u32 {
        self.s * self.n
    }

    fn check_cell(&self, v: &Cell) -> Result<()> {
        self.lattice().index_of_cell(v).map(|_| ())
    }

    /// Strictly between the two seeded hyperplanes.
    pub fn in_strip(&self, v: &Cell) -> bool {
        let k = level_of(v);
        self.check_cell(v).is_ok() && k > self.lower_level() && k < self.upper_level()
    }

    fn on_boundary(&self, v: &Cell) -> bool {
        let k = level_of(v);
        k == self.lower_level() || k == self.upper_level()
    }

    /// All cells of the strip `F_s`, in row-major order.
    pub fn strip_cells(&self) -> Vec<Cell> {
        let spec = self.lattice();
        (0..spec.cell_count())
            .filter(|&i| {
                let k = spec.level_of_index(i);
                k > self.lower_level() && k < self.upper_level()
            })
            .map(|i| spec.cell_at(i))
            .collect()
    }

    /// The seeded hyperplanes `V_{(s-1)n} ∪ V_{sn}`.
    pub fn seed_set(&self) -> CellSet {
        let mut set = level_set(self.d, self.n, i64::from(self.lower_level())).expect("valid lattice");
        set.union_with(&level_set(self.d, self.n, i64::from(self.upper_level())).expect("valid lattice"));
        set
    }
}

/// `t_v = sum(v) - (s-1)n`, defined on the strip and its two boundary levels.
pub fn t_of(v: &Cell, ctx: &StripContext) -> Result<u32> {
    ctx.check_cell(v)?;
    let k = level_of(v);
    if k < ctx.lower_level() || k > ctx.upper_level() {
        return Err(Error::input(format!(
            "{v} (level {k}) lies outside levels {}..={} of strip s = {}",
            ctx.lower_level(),
            ctx.upper_level(),
            ctx.s
        )));
    }
    Ok(k - ctx.lower_level())
}

fn pre_coords(v: &[u32], t: u32) -> Vec<Vec<u32>> {
    (0..v.len())
        .map(|j| {
            let mut w = v.to_vec();
            if v[j] <= t {
                w[j] += 1;
            } else {
                w[j] -= 1;
            }
            w
        })
        .collect()
}

/// The `d` designated infectors of a strip cell, one per coordinate in
/// order `j = 1..d`.
pub fn pre_set(v: &Cell, ctx: &StripContext) -> Result<Vec<Cell>> {
    if !ctx.in_strip(v) {
        ctx.check_cell(v)?;
        return Err(Error::input(format!(
            "{v} is not strictly inside strip s = {} (levels {}..{})",
            ctx.s,
            ctx.lower_level(),
            ctx.upper_level()
        )));
    }
    let t = t_of(v, ctx)?;
    Ok(pre_coords(v.coords(), t).into_iter().map(Cell::new).collect())
}

/// Sum of the coordinates of `v` that exceed `c`.
pub fn potential_l(v: &Cell, c: u32) -> u64 {
    v.coords().iter().filter(|&&x| x > c).map(|&x| u64::from(x)).sum()
}

/// Sum of squared coordinates.
pub fn potential_h(v: &Cell) -> u64 {
    v.coords().iter().map(|&x| u64::from(x) * u64::from(x)).sum()
}

/// `(d+2)n^2 + n`: bound on the number of edges on any root-to-leaf path.
pub fn depth_bound(d: u32, n: u32) -> u64 {
    let (d, n) = (u64::from(d), u64::from(n));
    (d + 2) * n * n + n
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessNode {
    pub label: Cell,
    pub t: u32,
    /// Node ids of `Pre(label)` in coordinate order; `None` for leaves.
    pub children: Option<Vec<usize>>,
    /// Longest path (in edges) from this node to a leaf.
    pub height: u32,
}

impl WitnessNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessDag {
    ctx: StripContext,
    /// Node 0 is the root; ids follow FIFO expansion order.
    nodes: Vec<WitnessNode>,
    by_label: HashMap<Cell, usize>,
}

impl WitnessDag {
    pub fn context(&self) -> &StripContext {
        &self.ctx
    }

    pub fn root(&self) -> &WitnessNode {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[WitnessNode] {
        &self.nodes
    }

    pub fn node(&self, label: &Cell) -> Option<&WitnessNode> {
        self.by_label.get(label).map(|&i| &self.nodes[i])
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> u32 {
        self.nodes[0].height
    }

    pub fn leaves(&self) -> impl Iterator<Item = &WitnessNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn internal(&self) -> impl Iterator<Item = &WitnessNode> {
        self.nodes.iter().filter(|n| !n.is_leaf())
    }

    /// Every `(parent, child)` pair, by node id.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes.iter().enumerate().flat_map(|(i, node)| {
            node.children.iter().flatten().map(move |&c| (i, c))
        })
    }

    /// Number of root-to-leaf paths, i.e. leaves of the unfolded tree.
    pub fn tree_leaf_count(&self) -> u128 {
        let mut memo = vec![None; self.nodes.len()];
        fn count(dag: &WitnessDag, i: usize, memo: &mut Vec<Option<u128>>) -> u128 {
            if let Some(c) = memo[i] {
                return c;
            }
            let c = match &dag.nodes[i].children {
                None => 1,
                Some(ch) => ch.iter().map(|&j| count(dag, j, memo)).sum(),
            };
            memo[i] = Some(c);
            c
        }
        count(self, 0, &mut memo)
    }

    pub fn to_json(&self) -> WitnessDagJson {
        WitnessDagJson {
            root: self.root().label.clone(),
            s: self.ctx.s,
            n: self.ctx.n,
            d: self.ctx.d,
            depth: self.depth(),
            nodes: self
                .nodes
                .iter()
                .map(|node| WitnessNodeJson {
                    label: node.label.clone(),
                    t: node.t,
                    children: node
                        .children
                        .as_ref()
                        .map(|ch| ch.iter().map(|&j| self.nodes[j].label.clone()).collect()),
                })
                .collect(),
        }
    }

    /// Graphviz digraph, one node statement per label (`u/t_u`) and one
    /// edge line per Pre relation.
    pub fn to_dot(&self) -> String {
        let key = |c: &Cell| {
            c.coords().iter().map(u32::to_string).collect::<Vec<_>>().join(",")
        };
        let mut out = String::from("digraph witness {\n");
        for node in &self.nodes {
            let shape = if node.is_leaf() { "circle" } else { "box" };
            let compact: String = node.label.coords().iter().map(u32::to_string).collect::<Vec<_>>().join("");
            let _ = writeln!(
                out,
                "  \"{}\" [label=\"{}/{}\", shape={}];",
                key(&node.label),
                compact,
                node.t,
                shape
            );
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "  \"{}\" -> \"{}\";", key(&self.nodes[a].label), key(&self.nodes[b].label));
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDagJson {
    pub root: Cell,
    pub s: u32,
    pub n: u32,
    pub d: u32,
    pub depth: u32,
    pub nodes: Vec<WitnessNodeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessNodeJson {
    pub label: Cell,
    pub t: u32,
    pub children: Option<Vec<Cell>>,
}

/// Builds the witness DAG of a strip cell.
///
/// Active labels are expanded in FIFO order. Afterwards a depth-first pass
/// with on-path marking computes heights; reaching a label already on the
/// current path is reported as an [`Error::Invariant`] naming the cycle.
pub fn build_witness(v: &Cell, ctx: &StripContext) -> Result<WitnessDag> {
    if !ctx.in_strip(v) {
        ctx.check_cell(v)?;
        return Err(Error::input(format!("{v} is not strictly inside strip s = {}", ctx.s)));
    }
    let mut nodes: Vec<WitnessNode> = Vec::new();
    let mut by_label: HashMap<Cell, usize> = HashMap::new();
    let mut queue = VecDeque::new();

    let mut intern = |label: Cell, nodes: &mut Vec<WitnessNode>, queue: &mut VecDeque<usize>| -> Result<usize> {
        if let Some(&id) = by_label.get(&label) {
            return Ok(id);
        }
        let t = t_of(&label, ctx)?;
        let id = nodes.len();
        by_label.insert(label.clone(), id);
        nodes.push(WitnessNode {
            label,
            t,
            children: None,
            height: 0,
        });
        queue.push_back(id);
        Ok(id)
    };

    intern(v.clone(), &mut nodes, &mut queue)?;
    while let Some(id) = queue.pop_front() {
        let label = nodes[id].label.clone();
        if ctx.on_boundary(&label) {
            continue;
        }
        let mut children = Vec::with_capacity(ctx.d as usize);
        for coords in pre_coords(label.coords(), nodes[id].t) {
            children.push(intern(Cell::new(coords), &mut nodes, &mut queue)?);
        }
        nodes[id].children = Some(children);
    }

    compute_heights(&mut nodes)?;
    Ok(WitnessDag {
        ctx: *ctx,
        nodes,
        by_label,
    })
}

fn compute_heights(nodes: &mut [WitnessNode]) -> Result<()> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        OnPath,
        Done,
    }
    let mut mark = vec![Mark::New; nodes.len()];
    // (node, index of next child to visit)
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    mark[0] = Mark::OnPath;
    while let Some(&mut (id, ref mut next)) = stack.last_mut() {
        let child = nodes[id].children.as_ref().and_then(|ch| ch.get(*next).copied());
        match child {
            Some(c) => {
                *next += 1;
                match mark[c] {
                    Mark::Done => {}
                    Mark::New => {
                        mark[c] = Mark::OnPath;
                        stack.push((c, 0));
                    }
                    Mark::OnPath => {
                        let start = stack.iter().position(|&(i, _)| i == c).expect("on path");
                        let mut cycle: Vec<String> =
                            stack[start..].iter().map(|&(i, _)| nodes[i].label.to_string()).collect();
                        cycle.push(nodes[c].label.to_string());
                        return Err(Error::Invariant(format!(
                            "witness construction revisits a label: {}",
                            cycle.join(" -> ")
                        )));
                    }
                }
            }
            None => {
                let height = nodes[id]
                    .children
                    .as_ref()
                    .map(|ch| 1 + ch.iter().map(|&c| nodes[c].height).max().unwrap_or(0))
                    .unwrap_or(0);
                nodes[id].height = height;
                mark[id] = Mark::Done;
                stack.pop();
            }
        }
    }
    Ok(())
}

/// Checks on every DAG edge that levels change by exactly one, in the
/// direction fixed by the Pre rule.
pub fn check_level_alternation(dag: &WitnessDag) -> Result<()> {
    for (a, b) in dag.edges() {
        let (u, w) = (&dag.nodes[a], &dag.nodes[b]);
        let diff: Vec<i64> = u
            .label
            .coords()
            .iter()
            .zip(w.label.coords())
            .map(|(&x, &y)| i64::from(y) - i64::from(x))
            .collect();
        let step: i64 = diff.iter().sum();
        let moved = diff.iter().filter(|&&x| x != 0).count();
        let ok = moved == 1
            && (step == 1 && w.t == u.t + 1 || step == -1 && w.t + 1 == u.t);
        if !ok {
            return Err(Error::Invariant(format!(
                "edge {} (t={}) -> {} (t={}) is not a unit step between adjacent levels",
                u.label, u.t, w.label, w.t
            )));
        }
    }
    Ok(())
}

/// Edge-local form of the no-cycle potential argument.
///
/// For a path whose maximum offset `C` is attained at its first label, every
/// edge on it has both endpoints at offset `<= C`. So it suffices to check,
/// for each edge `u -> w`:
/// - `L_C(w) <= L_C(u)` for every `C` from `max(t_u, t_w)` to `n`;
/// - `L_C(w) < L_C(u)` for `C = t_u` when the edge goes down a level.
pub fn check_potential_certificate(dag: &WitnessDag) -> Result<()> {
    let n = dag.ctx.n;
    for (a, b) in dag.edges() {
        let (u, w) = (&dag.nodes[a], &dag.nodes[b]);
        for c in u.t.max(w.t)..=n {
            if potential_l(&w.label, c) > potential_l(&u.label, c) {
                return Err(Error::Invariant(format!(
                    "L_{c} increases along {} -> {}",
                    u.label, w.label
                )));
            }
        }
        if w.t + 1 == u.t && potential_l(&w.label, u.t) >= potential_l(&u.label, u.t) {
            return Err(Error::Invariant(format!(
                "L_{} does not drop on the downward edge {} -> {}",
                u.t, u.label, w.label
            )));
        }
    }
    Ok(())
}

/// Summary of the structural checks on one witness DAG.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub root: Cell,
    pub depth: u32,
    pub depth_bound: u64,
    pub nodes: usize,
    /// Infection round of the root when only the two hyperplanes start infected.
    pub infection_time: Option<u32>,
}

/// Builds every witness DAG of a strip and verifies level alternation, the
/// potential certificate, the depth bound, leaf placement, and that each
/// root is infected by the simulated process no later than its depth.
pub fn verify_strip(ctx: &StripContext) -> Result<Vec<WitnessCheck>> {
    let spec = ctx.lattice();
    let seeds = ctx.seed_set();
    let run = crate::dynamics::run(&spec, &seeds, Default::default())?;
    let bound = depth_bound(ctx.d, ctx.n);
    let mut out = Vec::new();
    for v in ctx.strip_cells() {
        let dag = build_witness(&v, ctx)?;
        check_level_alternation(&dag)?;
        check_potential_certificate(&dag)?;
        for leaf in dag.leaves() {
            if !ctx.on_boundary(&leaf.label) {
                return Err(Error::Invariant(format!("leaf {} is not on a seeded hyperplane", leaf.label)));
            }
        }
        if u64::from(dag.depth()) > bound {
            return Err(Error::Invariant(format!(
                "witness of {v} has depth {} > {bound}",
                dag.depth()
            )));
        }
        let time = run.time(spec.index_of_cell(&v)?);
        match time {
            Some(t) if t <= dag.depth() => {}
            other => {
                return Err(Error::Invariant(format!(
                    "{v} infected at {other:?}, later than witness depth {}",
                    dag.depth()
                )))
            }
        }
        out.push(WitnessCheck {
            root: v,
            depth: dag.depth(),
            depth_bound: bound,
            nodes: dag.nodes().len(),
            infection_time: time,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[u32]) -> Cell {
        Cell::new(v.to_vec())
    }

    fn ctx() -> StripContext {
        StripContext::new(3, 5, 2).unwrap()
    }

    #[test]
    fn offsets() {
        assert_eq!(t_of(&c(&[4, 2, 2]), &ctx()).unwrap(), 3);
        assert_eq!(t_of(&c(&[2, 2, 1]), &ctx()).unwrap(), 0);
        assert_eq!(t_of(&c(&[3, 3, 3]), &ctx()).unwrap(), 4);
        assert_eq!(t_of(&c(&[5, 4, 1]), &ctx()).unwrap(), 5);
        assert!(t_of(&c(&[1, 1, 1]), &ctx()).is_err());
        assert!(t_of(&c(&[5, 5, 5]), &ctx()).is_err());
    }

    #[test]
    fn pre_sets() {
        assert_eq!(
            pre_set(&c(&[4, 2, 2]), &ctx()).unwrap(),
            vec![c(&[3, 2, 2]), c(&[4, 3, 2]), c(&[4, 2, 3])]
        );
        assert_eq!(
            pre_set(&c(&[2, 2, 2]), &ctx()).unwrap(),
            vec![c(&[1, 2, 2]), c(&[2, 1, 2]), c(&[2, 2, 1])]
        );
        assert_eq!(
            pre_set(&c(&[3, 3, 3]), &ctx()).unwrap(),
            vec![c(&[4, 3, 3]), c(&[3, 4, 3]), c(&[3, 3, 4])]
        );
        assert!(matches!(pre_set(&c(&[2, 2, 1]), &ctx()), Err(Error::Input(_))));
        assert!(matches!(pre_set(&c(&[6, 1, 1]), &ctx()), Err(Error::Input(_))));
    }

    #[test]
    fn context_bounds() {
        assert!(StripContext::new(3, 5, 1).is_ok());
        assert!(StripContext::new(3, 5, 0).is_err());
        assert!(StripContext::new(3, 5, 4).is_err());
        assert!(StripContext::new(3, 2, 1).is_err());
        assert!(StripContext::new(3, 2, 2).is_ok());
    }

    #[test]
    fn shallow_witness() {
        let dag = build_witness(&c(&[2, 2, 2]), &ctx()).unwrap();
        assert_eq!(dag.depth(), 1);
        assert_eq!(dag.nodes().len(), 4);
        assert!(dag.leaves().all(|l| level_of(&l.label) == 5));
    }

    #[test]
    fn all_coordinates_below_offset_step_up() {
        let cx = StripContext::new(3, 7, 2).unwrap();
        let v = c(&[4, 4, 3]);
        assert_eq!(t_of(&v, &cx).unwrap(), 4);
        let pre = pre_set(&v, &cx).unwrap();
        assert_eq!(pre, vec![c(&[5, 4, 3]), c(&[4, 5, 3]), c(&[4, 4, 4])]);
        assert!(pre.iter().all(|w| cx.in_strip(w)));
        assert!(build_witness(&v, &cx).unwrap().depth() >= 2);
    }

    #[test]
    fn potentials() {
        let v = c(&[4, 2, 2]);
        assert_eq!(potential_l(&v, 3), 4);
        assert_eq!(potential_l(&v, 0), 8);
        assert_eq!(potential_l(&v, 5), 0);
        assert_eq!(potential_h(&v), 24);
        assert_eq!(potential_h(&c(&[1, 1, 1, 1])), 4);
        assert_eq!(potential_h(&c(&[5, 5, 5])), 75);
    }

    #[test]
    fn serializations() {
        let dag = build_witness(&c(&[2, 2, 2]), &ctx()).unwrap();
        let json = serde_json::to_value(dag.to_json()).unwrap();
        assert_eq!(json["depth"], 1);
        assert_eq!(json["root"], serde_json::json!([2, 2, 2]));
        assert_eq!(json["nodes"][1]["children"], serde_json::Value::Null);
        let dot = dag.to_dot();
        assert!(dot.contains("\"2,2,2\" -> \"1,2,2\";"));
        assert!(dot.contains("label=\"222/1\""));
    }
}
