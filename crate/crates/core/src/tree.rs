//! Ordered rooted trees.
//!
//! A [`FiniteTree`] is stored as its preorder out-degree sequence (the
//! Łukasiewicz word) plus subtree sizes. The children of a vertex are the
//! contiguous blocks that follow it, which is equivalent to the Ulam-Harris
//! child-contiguity constraint; labels are only built at the API boundary.
//!
//! A [`PartialTree`] is a finite window onto a possibly infinite tree: each
//! vertex carries a [`Mark`] saying whether its out-degree is fully shown,
//! cut by a width limit, infinite, or unknown (an unexpanded frontier).

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::offspring::OffspringLaw;
use crate::{Error, Result};

/// An Ulam-Harris label: the sequence of (1-based) child indices from the
/// root. The root is the empty sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Label(Vec<u32>);

impl Label {
    pub fn root() -> Self {
        Label(Vec::new())
    }

    pub fn new(path: Vec<u32>) -> Result<Self> {
        if path.contains(&0) {
            return Err(Error::InvalidTree(format!("label {path:?} has a zero coordinate")));
        }
        Ok(Label(path))
    }

    /// The `i`-th child (1-based).
    pub fn child(&self, i: u32) -> Self {
        let mut path = self.0.clone();
        path.push(i);
        Label(path)
    }

    pub fn parent(&self) -> Option<Self> {
        let (_, rest) = self.0.split_last()?;
        Some(Label(rest.to_vec()))
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// `true` if `self` is a strict ancestor of `other`.
    pub fn is_ancestor_of(&self, other: &Label) -> bool {
        other.0.len() > self.0.len() && other.0.starts_with(&self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// An out-degree in `ℕ ∪ {+∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutDegree {
    Finite(u64),
    Infinite,
}

impl fmt::Display for OutDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutDegree::Finite(k) => write!(f, "{k}"),
            OutDegree::Infinite => f.write_str("inf"),
        }
    }
}

fn subtree_sizes(degrees: &[u32]) -> Vec<u32> {
    let mut sizes = vec![0u32; degrees.len()];
    let mut stack: Vec<u32> = Vec::new();
    for v in (0..degrees.len()).rev() {
        let mut size = 1u32;
        for _ in 0..degrees[v] {
            size += stack.pop().expect("valid preorder degree sequence");
        }
        sizes[v] = size;
        stack.push(size);
    }
    sizes
}

fn check_preorder(degrees: &[u32]) -> Result<()> {
    let mut pending: u64 = 1;
    for (i, d) in degrees.iter().enumerate() {
        if pending == 0 {
            return Err(Error::InvalidTree(format!("degree sequence closes before position {i}")));
        }
        pending = pending - 1 + *d as u64;
    }
    if pending != 0 {
        return Err(Error::InvalidTree(format!("degree sequence leaves {pending} vertices open")));
    }
    Ok(())
}

/// Shared preorder navigation.
trait Preorder {
    fn present(&self) -> &[u32];
    fn sizes(&self) -> &[u32];

    fn child_index(&self, v: usize, i: usize) -> usize {
        let mut c = v + 1;
        for _ in 0..i {
            c += self.sizes()[c] as usize;
        }
        c
    }

    fn children_of(&self, v: usize) -> Children<'_> {
        Children { sizes: self.sizes(), next: v + 1, left: self.present()[v] }
    }

    fn find(&self, label: &Label) -> Option<usize> {
        let mut v = 0usize;
        for &i in label.as_slice() {
            if i as usize > self.present()[v] as usize {
                return None;
            }
            v = self.child_index(v, i as usize - 1);
        }
        Some(v)
    }

    fn label_at(&self, target: usize) -> Label {
        let mut path = Vec::new();
        let mut v = 0usize;
        while v != target {
            let mut c = v + 1;
            let mut i = 1u32;
            while target >= c + self.sizes()[c] as usize {
                c += self.sizes()[c] as usize;
                i += 1;
            }
            path.push(i);
            v = c;
        }
        Label(path)
    }

    fn depths(&self) -> Vec<u32> {
        let n = self.present().len();
        let mut depth = vec![0u32; n];
        for v in 0..n {
            for c in self.children_of(v) {
                depth[c] = depth[v] + 1;
            }
        }
        depth
    }
}

/// Iterator over the preorder indices of a vertex's children.
pub struct Children<'a> {
    sizes: &'a [u32],
    next: usize,
    left: u32,
}

impl Iterator for Children<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.left == 0 {
            return None;
        }
        let c = self.next;
        self.next += self.sizes[c] as usize;
        self.left -= 1;
        Some(c)
    }
}

/// A finite ordered rooted tree.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteTree {
    degrees: Vec<u32>,
    sizes: Vec<u32>,
}

impl Preorder for FiniteTree {
    fn present(&self) -> &[u32] {
        &self.degrees
    }
    fn sizes(&self) -> &[u32] {
        &self.sizes
    }
}

/// Trees order by size, then lexicographically by preorder degree sequence.
impl Ord for FiniteTree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degrees.len().cmp(&other.degrees.len()).then_with(|| self.degrees.cmp(&other.degrees))
    }
}

impl PartialOrd for FiniteTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `S_u(t)`, `F_u(t)` and `S^u(t)` for a vertex `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    /// The subtree above `u`, re-rooted at `u`.
    pub above: FiniteTree,
    /// The subtrees rooted at the children of `u` (empty for a leaf).
    pub forest: Vec<FiniteTree>,
    /// The tree below `u`: everything except the strict descendants of `u`.
    pub below: FiniteTree,
}

impl FiniteTree {
    /// The tree `{∅}`.
    pub fn leaf() -> Self {
        FiniteTree { degrees: vec![0], sizes: vec![1] }
    }

    /// A tree from its preorder out-degree sequence.
    pub fn from_degrees(degrees: Vec<u32>) -> Result<Self> {
        check_preorder(&degrees)?;
        let sizes = subtree_sizes(&degrees);
        Ok(FiniteTree { degrees, sizes })
    }

    pub(crate) fn from_degrees_unchecked(degrees: Vec<u32>) -> Self {
        debug_assert!(check_preorder(&degrees).is_ok());
        let sizes = subtree_sizes(&degrees);
        FiniteTree { degrees, sizes }
    }

    /// A root whose children are the given subtrees, in order.
    pub fn from_children<I: IntoIterator<Item = FiniteTree>>(children: I) -> Self {
        let mut degrees = vec![0u32];
        for c in children {
            degrees[0] += 1;
            degrees.extend_from_slice(&c.degrees);
        }
        Self::from_degrees_unchecked(degrees)
    }

    /// A path with `vertices` vertices.
    pub fn path(vertices: usize) -> Self {
        assert!(vertices >= 1);
        let mut degrees = vec![1u32; vertices];
        degrees[vertices - 1] = 0;
        Self::from_degrees_unchecked(degrees)
    }

    /// A root with `k` leaf children.
    pub fn star(k: u32) -> Self {
        let mut degrees = vec![0u32; k as usize + 1];
        degrees[0] = k;
        Self::from_degrees_unchecked(degrees)
    }

    /// Number of vertices `|t|`.
    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Out-degree of the vertex at preorder index `v`.
    pub fn degree(&self, v: usize) -> u32 {
        self.degrees[v]
    }

    pub fn subtree_size(&self, v: usize) -> usize {
        self.sizes[v] as usize
    }

    pub fn children(&self, v: usize) -> Children<'_> {
        self.children_of(v)
    }

    /// Preorder index of the vertex with the given label.
    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.find(label)
    }

    pub fn label_of(&self, v: usize) -> Label {
        self.label_at(v)
    }

    /// All labels, in preorder.
    pub fn labels(&self) -> Vec<Label> {
        (0..self.len()).map(|v| self.label_of(v)).collect()
    }

    /// `L_0(t)`.
    pub fn leaves(&self) -> Vec<Label> {
        (0..self.len()).filter(|&v| self.degrees[v] == 0).map(|v| self.label_of(v)).collect()
    }

    pub fn depth_of(&self, v: usize) -> usize {
        self.label_of(v).depth()
    }

    pub fn height(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0) as usize
    }

    /// `M(t)`.
    pub fn max_out_degree(&self) -> u64 {
        self.degrees.iter().copied().max().unwrap_or(0) as u64
    }

    /// The subtree rooted at `v`.
    pub fn subtree(&self, v: usize) -> FiniteTree {
        let end = v + self.sizes[v] as usize;
        FiniteTree { degrees: self.degrees[v..end].to_vec(), sizes: self.sizes[v..end].to_vec() }
    }

    fn locate(&self, x: &Label) -> Result<usize> {
        self.index_of(x).ok_or_else(|| Error::NoSuchVertex(x.to_string()))
    }

    /// `ln P(τ = t)`, or `None` when the probability is exactly zero.
    pub fn ln_weight(&self, law: &OffspringLaw) -> Option<f64> {
        let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
        for d in &self.degrees {
            *counts.entry(*d).or_insert(0) += 1;
        }
        let mut acc = crate::sum::Compensated::new();
        for (d, count) in counts {
            let p = law.pmf(d as u64);
            if p == 0.0 {
                return None;
            }
            acc.add(count as f64 * libm::log(p));
        }
        Some(acc.value())
    }

    /// `P(τ = t) = Π_{u ∈ t} p(k_u(t))`.
    pub fn weight(&self, law: &OffspringLaw) -> f64 {
        self.ln_weight(law).map_or(0.0, libm::exp)
    }

    /// `t ⊛ (s, x)` for a leaf `x`: `s` is attached in place of `x`.
    pub fn graft_leaf(&self, x: &Label, s: &FiniteTree) -> Result<FiniteTree> {
        let v = self.locate(x)?;
        if self.degrees[v] != 0 {
            return Err(Error::NotALeaf(x.to_string()));
        }
        let mut degrees = Vec::with_capacity(self.len() + s.len() - 1);
        degrees.extend_from_slice(&self.degrees[..v]);
        degrees.extend_from_slice(&s.degrees);
        degrees.extend_from_slice(&self.degrees[v + 1..]);
        Ok(Self::from_degrees_unchecked(degrees))
    }

    /// `t ⊛ (s, x)` on the right: the root children of `s` become extra
    /// children of `x`, after its existing ones.
    pub fn graft_right(&self, x: &Label, s: &FiniteTree) -> Result<FiniteTree> {
        let v = self.locate(x)?;
        if s.len() == 1 {
            return Ok(self.clone());
        }
        let end = v + self.sizes[v] as usize;
        let mut degrees = Vec::with_capacity(self.len() + s.len() - 1);
        degrees.extend_from_slice(&self.degrees[..end]);
        degrees[v] += s.degrees[0];
        degrees.extend_from_slice(&s.degrees[1..]);
        degrees.extend_from_slice(&self.degrees[end..]);
        Ok(Self::from_degrees_unchecked(degrees))
    }

    /// Right graft of a partial tree; the result is partial.
    pub fn graft_right_partial(&self, x: &Label, s: &PartialTree) -> Result<PartialTree> {
        let v = self.locate(x)?;
        let base = self.to_partial();
        let root_mark = s.marks[0];
        if root_mark == Mark::Frontier {
            return Err(Error::InvalidTree("cannot graft a tree whose root is unexpanded".into()));
        }
        if s.len() == 1 && root_mark == Mark::Materialized {
            return Ok(base);
        }
        let ell = self.degrees[v];
        let end = v + self.sizes[v] as usize;
        let mut present = base.present[..end].to_vec();
        let mut marks = base.marks[..end].to_vec();
        let mut special = base.special[..end].to_vec();
        present[v] += s.present[0];
        marks[v] = match root_mark {
            Mark::WidthCut { degree } => Mark::WidthCut { degree: degree + ell as u64 },
            other => other,
        };
        present.extend_from_slice(&s.present[1..]);
        marks.extend_from_slice(&s.marks[1..]);
        special.extend_from_slice(&s.special[1..]);
        present.extend_from_slice(&base.present[end..]);
        marks.extend_from_slice(&base.marks[end..]);
        special.extend_from_slice(&base.special[end..]);
        PartialTree::from_parts(present, marks, special)
    }

    /// `S_u(t)`, `F_u(t)`, `S^u(t)`.
    pub fn decompose(&self, u: &Label) -> Result<Decomposition> {
        let v = self.locate(u)?;
        let above = self.subtree(v);
        let forest = self.children(v).map(|c| self.subtree(c)).collect();
        let end = v + self.sizes[v] as usize;
        let mut degrees = Vec::with_capacity(self.len() - self.sizes[v] as usize + 1);
        degrees.extend_from_slice(&self.degrees[..=v]);
        degrees[v] = 0;
        degrees.extend_from_slice(&self.degrees[end..]);
        Ok(Decomposition { above, forest, below: Self::from_degrees_unchecked(degrees) })
    }

    /// The same tree with every vertex marked as fully materialised.
    pub fn to_partial(&self) -> PartialTree {
        PartialTree {
            present: self.degrees.clone(),
            sizes: self.sizes.clone(),
            marks: vec![Mark::Materialized; self.len()],
            special: vec![false; self.len()],
            depth_limit: None,
            width_limit: None,
        }
    }

    /// Keep vertices of depth `≤ h` whose label coordinates are all `≤ w`.
    pub fn truncate(&self, h: u64, w: u64) -> PartialTree {
        self.to_partial().truncate(h, w)
    }
}

impl fmt::Debug for FiniteTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteTree({self})")
    }
}

/// The nested-list encoding: `[]` is a leaf, `[[],[]]` a root with two leaf
/// children.
impl fmt::Display for FiniteTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut open: Vec<u32> = Vec::new();
        for (i, d) in self.degrees.iter().enumerate() {
            if let Some(top) = open.last_mut() {
                if i > 0 && *top > 0 && f.alternate() {
                    f.write_str(" ")?;
                }
            }
            f.write_str("[")?;
            open.push(*d);
            while let Some(top) = open.last() {
                if *top == 0 {
                    open.pop();
                    f.write_str("]")?;
                    if let Some(parent) = open.last_mut() {
                        *parent -= 1;
                        if *parent > 0 {
                            f.write_str(",")?;
                        }
                    }
                } else {
                    break;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for FiniteTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        // degree of each open vertex, in preorder
        let mut degrees: Vec<u32> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut closed_root = false;
        for ch in s.chars() {
            match ch {
                '[' => {
                    if closed_root {
                        return Err(Error::InvalidTree(format!("trailing input in {s:?}")));
                    }
                    if let Some(&parent) = stack.last() {
                        degrees[parent] += 1;
                    }
                    stack.push(degrees.len());
                    degrees.push(0);
                }
                ']' => {
                    stack.pop().ok_or_else(|| Error::InvalidTree(format!("unbalanced {s:?}")))?;
                    if stack.is_empty() {
                        closed_root = true;
                    }
                }
                ',' | ' ' | '\n' | '\t' | '\r' => {}
                other => return Err(Error::InvalidTree(format!("unexpected {other:?} in tree"))),
            }
        }
        if !closed_root || !stack.is_empty() {
            return Err(Error::InvalidTree(format!("unbalanced {s:?}")));
        }
        Ok(Self::from_degrees_unchecked(degrees))
    }
}

/// How much of a vertex's offspring a [`PartialTree`] shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mark {
    /// All children are present.
    Materialized,
    /// The out-degree is finite and known, but only a prefix of the children
    /// is present.
    WidthCut { degree: u64 },
    /// Infinite out-degree; a finite prefix of the children is present.
    Infinite,
    /// Not expanded: the out-degree is unknown and no children are present.
    Frontier,
}

/// A finite window onto a possibly infinite tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialTree {
    present: Vec<u32>,
    sizes: Vec<u32>,
    marks: Vec<Mark>,
    special: Vec<bool>,
    depth_limit: Option<u64>,
    width_limit: Option<u64>,
}

impl Preorder for PartialTree {
    fn present(&self) -> &[u32] {
        &self.present
    }
    fn sizes(&self) -> &[u32] {
        &self.sizes
    }
}

/// `M` of a partial tree: the supremum over visible information, flagged
/// when unexpanded vertices could raise it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeBound {
    pub value: OutDegree,
    pub lower_bound_only: bool,
}

impl PartialTree {
    /// Build from preorder arrays: present-children counts, marks and
    /// special-node flags.
    pub fn from_parts(present: Vec<u32>, marks: Vec<Mark>, special: Vec<bool>) -> Result<Self> {
        if marks.len() != present.len() || special.len() != present.len() {
            return Err(Error::InvalidTree("mismatched partial-tree arrays".into()));
        }
        check_preorder(&present)?;
        let mut infinite = 0;
        for (v, (m, c)) in marks.iter().zip(&present).enumerate() {
            match m {
                Mark::Frontier if *c != 0 => {
                    return Err(Error::InvalidTree(format!("frontier vertex {v} has children")))
                }
                Mark::WidthCut { degree } if *degree <= *c as u64 => {
                    return Err(Error::InvalidTree(format!(
                        "width-cut vertex {v} shows {c} of {degree} children"
                    )))
                }
                Mark::Infinite => infinite += 1,
                _ => {}
            }
        }
        if infinite > 1 {
            return Err(Error::InvalidTree("more than one infinite vertex".into()));
        }
        let sizes = subtree_sizes(&present);
        Ok(PartialTree { present, sizes, marks, special, depth_limit: None, width_limit: None })
    }

    pub(crate) fn with_limits(mut self, depth: Option<u64>, width: Option<u64>) -> Self {
        self.depth_limit = depth;
        self.width_limit = width;
        self
    }

    pub fn len(&self) -> usize {
        self.present.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mark(&self, v: usize) -> Mark {
        self.marks[v]
    }

    pub fn marks(&self) -> &[Mark] {
        &self.marks
    }

    /// Number of children present at `v`.
    pub fn present_children(&self, v: usize) -> u32 {
        self.present[v]
    }

    pub fn present_counts(&self) -> &[u32] {
        &self.present
    }

    pub fn is_special(&self, v: usize) -> bool {
        self.special[v]
    }

    pub fn special_flags(&self) -> &[bool] {
        &self.special
    }

    pub fn depth_limit(&self) -> Option<u64> {
        self.depth_limit
    }

    pub fn width_limit(&self) -> Option<u64> {
        self.width_limit
    }

    pub fn children(&self, v: usize) -> Children<'_> {
        self.children_of(v)
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.find(label)
    }

    pub fn label_of(&self, v: usize) -> Label {
        self.label_at(v)
    }

    pub fn depth_of(&self, v: usize) -> usize {
        self.label_of(v).depth()
    }

    /// Preorder indices of the special vertices (the spine), root first.
    pub fn spine(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.special[v]).collect()
    }

    pub fn infinite_vertex(&self) -> Option<usize> {
        self.marks.iter().position(|m| *m == Mark::Infinite)
    }

    /// The out-degree of `v`, if known.
    pub fn out_degree(&self, v: usize) -> Option<OutDegree> {
        match self.marks[v] {
            Mark::Materialized => Some(OutDegree::Finite(self.present[v] as u64)),
            Mark::WidthCut { degree } => Some(OutDegree::Finite(degree)),
            Mark::Infinite => Some(OutDegree::Infinite),
            Mark::Frontier => None,
        }
    }

    pub fn max_out_degree(&self) -> DegreeBound {
        let mut best = OutDegree::Finite(0);
        let mut unknown = false;
        for v in 0..self.len() {
            match self.out_degree(v) {
                Some(d) => best = best.max(d),
                None => unknown = true,
            }
        }
        DegreeBound { value: best, lower_bound_only: unknown && best != OutDegree::Infinite }
    }

    /// The visible skeleton with all marks erased.
    pub fn skeleton(&self) -> FiniteTree {
        FiniteTree { degrees: self.present.clone(), sizes: self.sizes.clone() }
    }

    /// `Some(t)` when every vertex is fully materialised.
    pub fn to_finite(&self) -> Option<FiniteTree> {
        self.marks.iter().all(|m| *m == Mark::Materialized).then(|| self.skeleton())
    }

    /// Keep vertices of depth `≤ h` whose label coordinates are all `≤ w`,
    /// marking every cut.
    pub fn truncate(&self, h: u64, w: u64) -> PartialTree {
        let mut present = Vec::new();
        let mut marks = Vec::new();
        let mut special = Vec::new();
        let mut stack: Vec<(usize, u64)> = vec![(0, 0)];
        while let Some((v, depth)) = stack.pop() {
            let shown = self.present[v];
            let mark = self.marks[v];
            special.push(self.special[v]);
            if depth >= h {
                present.push(0);
                marks.push(match mark {
                    Mark::Infinite => Mark::Infinite,
                    Mark::Materialized if shown == 0 => Mark::Materialized,
                    _ => Mark::Frontier,
                });
                continue;
            }
            let keep = (shown as u64).min(w) as u32;
            present.push(keep);
            marks.push(match mark {
                Mark::Materialized if keep < shown => Mark::WidthCut { degree: shown as u64 },
                other => other,
            });
            let kids: Vec<usize> = self.children_of(v).take(keep as usize).collect();
            for c in kids.into_iter().rev() {
                stack.push((c, depth + 1));
            }
        }
        let depth_limit = Some(self.depth_limit.map_or(h, |d| d.min(h)));
        let width_limit = Some(self.width_limit.map_or(w, |x| x.min(w)));
        PartialTree::from_parts(present, marks, special)
            .expect("truncation preserves validity")
            .with_limits(depth_limit, width_limit)
    }
}

/// Which graft set a probe describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraftKind {
    /// `T(t, x)`: trees obtained by grafting any tree on the leaf `x`.
    Leaf,
    /// `T_+(t, x, k)`: right grafts at `x` where `x` ends with at least `k`
    /// children.
    RightPlus { k: u64 },
}

/// A probe `(t, x)` or `(t, x, k)` naming a graft set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraftEvent {
    base: FiniteTree,
    site: Label,
    site_index: usize,
    kind: GraftKind,
}

impl GraftEvent {
    /// `T(t, x)`; `x` must be a leaf of `t`.
    pub fn leaf(base: FiniteTree, site: Label) -> Result<Self> {
        let v = base.locate(&site)?;
        if base.degree(v) != 0 {
            return Err(Error::NotALeaf(site.to_string()));
        }
        Ok(GraftEvent { base, site, site_index: v, kind: GraftKind::Leaf })
    }

    /// `T_+(t, x, k)`; `x` must be a vertex of `t`.
    pub fn right_plus(base: FiniteTree, site: Label, k: u64) -> Result<Self> {
        let v = base.locate(&site)?;
        Ok(GraftEvent { base, site, site_index: v, kind: GraftKind::RightPlus { k } })
    }

    pub fn base(&self) -> &FiniteTree {
        &self.base
    }

    pub fn site(&self) -> &Label {
        &self.site
    }

    pub fn site_index(&self) -> usize {
        self.site_index
    }

    pub fn kind(&self) -> GraftKind {
        self.kind
    }

    /// `ℓ = k_x(t)`.
    pub fn site_degree(&self) -> u64 {
        self.base.degree(self.site_index) as u64
    }

    /// Membership of a finite tree.
    pub fn contains(&self, s: &FiniteTree) -> bool {
        self.walk(&FiniteView(s)).expect("finite trees always decide membership")
    }

    /// Membership of a partial tree; `None` when the visible part does not
    /// decide it.
    pub fn contains_partial(&self, s: &PartialTree) -> Option<bool> {
        self.walk(s)
    }

    fn walk<V: View>(&self, s: &V) -> Option<bool> {
        let t = &self.base;
        let mut undecided = false;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((tv, sv)) = stack.pop() {
            let ell = t.degree(tv);
            let needed = if tv == self.site_index {
                match self.kind {
                    GraftKind::Leaf => continue,
                    GraftKind::RightPlus { k } => {
                        match s.degree(sv) {
                            None => {
                                undecided = true;
                                continue;
                            }
                            Some(OutDegree::Finite(d)) if d < k.max(ell as u64) => return Some(false),
                            Some(_) => {}
                        }
                        ell
                    }
                }
            } else {
                match s.degree(sv) {
                    None => {
                        undecided = true;
                        continue;
                    }
                    Some(OutDegree::Finite(d)) if d == ell as u64 => ell,
                    Some(_) => return Some(false),
                }
            };
            let shown = s.shown(sv);
            for i in 0..needed as usize {
                if i < shown as usize {
                    stack.push((t.child_index(tv, i), s.child(sv, i)));
                } else {
                    undecided = true;
                }
            }
        }
        if undecided {
            None
        } else {
            Some(true)
        }
    }
}

trait View {
    fn degree(&self, v: usize) -> Option<OutDegree>;
    fn shown(&self, v: usize) -> u32;
    fn child(&self, v: usize, i: usize) -> usize;
}

struct FiniteView<'a>(&'a FiniteTree);

impl View for FiniteView<'_> {
    fn degree(&self, v: usize) -> Option<OutDegree> {
        Some(OutDegree::Finite(self.0.degrees[v] as u64))
    }
    fn shown(&self, v: usize) -> u32 {
        self.0.degrees[v]
    }
    fn child(&self, v: usize, i: usize) -> usize {
        self.0.child_index(v, i)
    }
}

impl View for PartialTree {
    fn degree(&self, v: usize) -> Option<OutDegree> {
        self.out_degree(v)
    }
    fn shown(&self, v: usize) -> u32 {
        self.present[v]
    }
    fn child(&self, v: usize, i: usize) -> usize {
        self.child_index(v, i)
    }
}

impl fmt::Display for GraftEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GraftKind::Leaf => write!(f, "T({}, {})", self.base, self.site),
            GraftKind::RightPlus { k } => write!(f, "T+({}, {}, {k})", self.base, self.site),
        }
    }
}

#[doc(hidden)]
pub fn tree(s: &str) -> FiniteTree {
    s.parse().expect("valid tree literal")
}

#[doc(hidden)]
pub fn label(path: &[u32]) -> Label {
    Label::new(path.to_vec()).expect("valid label")
}

impl From<&FiniteTree> for String {
    fn from(t: &FiniteTree) -> String {
        t.to_string()
    }
}
