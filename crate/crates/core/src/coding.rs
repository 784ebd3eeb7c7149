//! Coding sequences for `d`-type forests.
//!
//! A coding sequence holds, for each type `i` (0-based in this module's
//! API), a path in `Z^d` given by its increments. Coordinate `(i, i)` is
//! downward skip free (increments `>= -1`), coordinates `(i, j)` with
//! `j != i` are nondecreasing. [`encode`] walks each typed subforest of
//! a forest in breadth-first order; [`decode`] reconstructs the unique
//! forest with a given sequence and root type sequence, resolving
//! subtree attachment with one frontier queue of unattached slots per
//! type, consumed in breadth-first order.

use crate::error::{Error, Result};
use crate::forest::{TreeNode, TypedForest};

/// An element of the coding-sequence space: `d` integer-vector paths
/// with cached prefix values and first-passage indices so that
/// first-passage lookups are O(1) after O(n) preprocessing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingSequence {
    d: usize,
    /// `steps[i][t][j]` is the increment of coordinate `(i, j)` into
    /// position `t + 1`; `steps[i].len()` is the length `n_i`.
    steps: Vec<Vec<Vec<i64>>>,
    /// `values[i][s][j] = x^{i,j}(s)` for `0 <= s <= n_i`.
    values: Vec<Vec<Vec<i64>>>,
    /// `passage[i][k]` is the first `s` with `x^{i,i}(s) = -k`; the
    /// vector covers `k = 0..=max_level(i)`.
    passage: Vec<Vec<usize>>,
}

impl CodingSequence {
    pub fn from_steps(d: usize, steps: Vec<Vec<Vec<i64>>>) -> Result<Self> {
        if steps.len() != d {
            return Err(Error::Parse(format!("expected {d} paths, got {}", steps.len())));
        }
        for (i, path) in steps.iter().enumerate() {
            for (t, inc) in path.iter().enumerate() {
                if inc.len() != d {
                    return Err(Error::InvalidIncrement { kind: i, step: t + 1 });
                }
                for (j, &v) in inc.iter().enumerate() {
                    let bad = if i == j { v < -1 } else { v < 0 };
                    if bad {
                        return Err(Error::InvalidIncrement { kind: i, step: t + 1 });
                    }
                }
            }
        }
        let mut values = Vec::with_capacity(d);
        let mut passage = Vec::with_capacity(d);
        for (i, path) in steps.iter().enumerate() {
            let mut vals = Vec::with_capacity(path.len() + 1);
            vals.push(vec![0i64; d]);
            for inc in path {
                let prev = vals.last().unwrap();
                let next: Vec<i64> = prev.iter().zip(inc).map(|(a, b)| a + b).collect();
                vals.push(next);
            }
            let mut fp = vec![0usize];
            let mut level = 0i64;
            for (s, v) in vals.iter().enumerate() {
                if v[i] < level {
                    // skip-free: new minima descend one unit at a time
                    level = v[i];
                    fp.push(s);
                }
            }
            values.push(vals);
            passage.push(fp);
        }
        Ok(CodingSequence { d, steps, values, passage })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Length `n_i` of the path of type `i`.
    pub fn len(&self, i: usize) -> usize {
        self.steps[i].len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.iter().all(|p| p.is_empty())
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.steps.iter().map(|p| p.len()).collect()
    }

    pub fn steps_of(&self, i: usize) -> &[Vec<i64>] {
        &self.steps[i]
    }

    /// `x^{i,j}(s)`.
    pub fn value(&self, i: usize, j: usize, s: usize) -> i64 {
        self.values[i][s][j]
    }

    /// Final value `x^{i,j}(n_i)`.
    pub fn endpoint(&self, i: usize, j: usize) -> i64 {
        self.value(i, j, self.len(i))
    }

    /// Matrix of final values, row `i`, column `j`.
    pub fn endpoint_matrix(&self) -> Vec<Vec<i64>> {
        (0..self.d).map(|i| (0..self.d).map(|j| self.endpoint(i, j)).collect()).collect()
    }

    /// Deepest level reached by `x^{i,i}`, as a nonnegative count.
    pub fn max_level(&self, i: usize) -> usize {
        self.passage[i].len() - 1
    }

    /// First passage of `x^{i,i}` at level `-k`; zero for `k = 0`.
    pub fn first_passage(&self, i: usize, k: usize) -> Result<usize> {
        self.passage[i].get(k).copied().ok_or(Error::LevelNotReached { kind: i, level: k })
    }

    /// Whether `r_j + sum_i x^{i,j}(n_j strata)` vanishes at `n`.
    pub fn is_solution(&self, r: &[i64], n: &[usize]) -> bool {
        (0..self.d).all(|j| {
            let mut acc = r[j];
            for i in 0..self.d {
                acc += self.value(i, j, n[i]);
            }
            acc == 0
        })
    }

    /// The reduced sequence: position `k` of path `i` samples the
    /// original path at its `k`-th first-passage time, so the diagonal
    /// becomes a unit descent.
    pub fn reduced(&self) -> CodingSequence {
        let mut steps = Vec::with_capacity(self.d);
        for i in 0..self.d {
            let fp = &self.passage[i];
            let mut path = Vec::with_capacity(fp.len() - 1);
            for k in 1..fp.len() {
                let inc: Vec<i64> = (0..self.d)
                    .map(|j| self.values[i][fp[k]][j] - self.values[i][fp[k - 1]][j])
                    .collect();
                path.push(inc);
            }
            steps.push(path);
        }
        CodingSequence::from_steps(self.d, steps).expect("reduction preserves validity")
    }

    /// The shifted system: drops the first `start_i` steps of each path
    /// and rebases values at zero.
    pub fn suffix(&self, start: &[usize]) -> Result<CodingSequence> {
        let mut steps = Vec::with_capacity(self.d);
        for i in 0..self.d {
            if start[i] > self.len(i) {
                return Err(Error::Parse(format!("suffix start {} beyond length", start[i])));
            }
            steps.push(self.steps[i][start[i]..].to_vec());
        }
        CodingSequence::from_steps(self.d, steps)
    }

    /// Restriction of each path to its first `n_i` steps.
    pub fn window(&self, n: &[usize]) -> Result<CodingSequence> {
        let mut steps = Vec::with_capacity(self.d);
        for i in 0..self.d {
            if n[i] > self.len(i) {
                return Err(Error::Parse(format!("window {} beyond length", n[i])));
            }
            steps.push(self.steps[i][..n[i]].to_vec());
        }
        CodingSequence::from_steps(self.d, steps)
    }
}

/// Encodes a forest: for each type the subforest is walked in its own
/// breadth-first order (subtrees ranked by the position of their roots,
/// each subtree generation by generation); the step of a vertex is its
/// per-type progeny, with one subtracted on the diagonal coordinate.
pub fn encode(f: &TypedForest) -> CodingSequence {
    let d = f.d();
    let mut steps: Vec<Vec<Vec<i64>>> = vec![Vec::new(); d];
    for color in 1..=d {
        let i = color - 1;
        // Bucket the color-class vertices by subtree; the arena scan
        // meets every subtree's vertices in that subtree's own BFS
        // order, and subtree ids increase with root position.
        let mut subtree_of: Vec<Option<usize>> = vec![None; f.len()];
        let mut per_subtree: Vec<Vec<usize>> = Vec::new();
        for v in 0..f.len() {
            if f.color(v) != color {
                continue;
            }
            let sub = match f.parent(v) {
                Some(p) if f.color(p) == color => subtree_of[p].unwrap(),
                _ => {
                    per_subtree.push(Vec::new());
                    per_subtree.len() - 1
                }
            };
            subtree_of[v] = Some(sub);
            per_subtree[sub].push(v);
        }
        let mut path = Vec::new();
        for sub in &per_subtree {
            for &v in sub {
                let p = f.progeny(v);
                let inc: Vec<i64> =
                    (0..d).map(|j| p[j] as i64 - if j == i { 1 } else { 0 }).collect();
                path.push(inc);
            }
        }
        steps[i] = path;
    }
    CodingSequence::from_steps(d, steps).expect("encoding of a valid forest is valid")
}

/// Smallest solution of the balance system for root counts `r`: the
/// componentwise-minimal `s <= lengths` with
/// `r_j + sum_i x^{i,j}(s_i) = 0` for every `j`, or `None` if the system
/// has no solution within the available lengths.
///
/// Runs the monotone fixed-point scheme: start from the root counts as
/// target levels, convert levels to first-passage times, fold the
/// off-diagonal gains back into the levels, and repeat. The round count
/// is capped at `1 + sum n_i`; the scheme provably stabilizes or walks
/// off the paths before that, so hitting the cap reports a defect.
pub fn smallest_solution(r: &[i64], x: &CodingSequence) -> Result<Option<Vec<usize>>> {
    let d = x.d();
    if r.len() != d {
        return Err(Error::Parse(format!("expected {d} root counts, got {}", r.len())));
    }
    if r.iter().any(|&v| v < 0) {
        return Err(Error::Hypothesis("negative root count".into()));
    }
    let mut levels: Vec<i64> = r.to_vec();
    let cap = 1 + x.lengths().iter().sum::<usize>();
    for _ in 0..=cap {
        let mut times = vec![0usize; d];
        for i in 0..d {
            match x.first_passage(i, levels[i] as usize) {
                Ok(t) => times[i] = t,
                Err(_) => return Ok(None),
            }
        }
        let mut next = vec![0i64; d];
        for j in 0..d {
            let mut acc = r[j];
            for i in 0..d {
                if i != j {
                    acc += x.value(i, j, times[i]);
                }
            }
            next[j] = acc;
        }
        if next == levels {
            return Ok(Some(times));
        }
        levels = next;
    }
    Err(Error::IterationCapExceeded)
}

/// Decodes `(x, c)` into the unique forest whose coding sequence is `x`
/// and whose root type sequence is `c` (colors `1..=d`). `r` is the
/// per-type root count; the call fails fast if `c` does not realize `r`
/// or if the length of `x` is not the smallest solution for `r`.
pub fn decode(x: &CodingSequence, c: &[usize], r: &[i64]) -> Result<TypedForest> {
    let d = x.d();
    if r.len() != d {
        return Err(Error::Parse(format!("expected {d} root counts, got {}", r.len())));
    }
    let mut counts = vec![0i64; d];
    for &color in c {
        if color == 0 || color > d {
            return Err(Error::ColorOutOfRange { color, d });
        }
        counts[color - 1] += 1;
    }
    if counts != r {
        return Err(Error::InvalidCoding("root type sequence does not realize the root counts".into()));
    }
    match smallest_solution(r, x)? {
        Some(n) if n == x.lengths() => {}
        _ => {
            return Err(Error::InvalidCoding(
                "length of the sequence is not the smallest solution for these roots".into(),
            ))
        }
    }

    // Subtree k of type i spans step indices passage[i][k] .. passage[i][k+1].
    let total_subtrees: Vec<usize> = (0..d).map(|i| x.max_level(i)).collect();
    let mut allocated = vec![0usize; d]; // frontier counters per type
    let mut consumed: Vec<usize> = vec![0; d];

    struct Slot {
        vertex: usize,
        kind: usize,
        subtree: usize,
    }

    let mut colors: Vec<usize> = Vec::new();
    let mut child_ids: Vec<Vec<usize>> = Vec::new();
    let mut tree_roots: Vec<usize> = Vec::new();
    let mut cursor: Vec<Vec<usize>> = (0..d).map(|i| vec![0usize; total_subtrees[i]]).collect();

    for &root_color in c {
        let i = root_color - 1;
        if allocated[i] == total_subtrees[i] {
            return Err(Error::InvalidCoding("more root subtrees demanded than coded".into()));
        }
        let sub = allocated[i];
        allocated[i] += 1;
        let root_id = colors.len();
        colors.push(root_color);
        child_ids.push(Vec::new());
        tree_roots.push(root_id);
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(Slot { vertex: root_id, kind: i, subtree: sub });
        while let Some(slot) = queue.pop_front() {
            let start = x.first_passage(slot.kind, slot.subtree)?;
            let step_index = start + cursor[slot.kind][slot.subtree];
            let end = x.first_passage(slot.kind, slot.subtree + 1)?;
            if step_index >= end {
                return Err(Error::InvalidCoding("subtree demanded more steps than its span".into()));
            }
            cursor[slot.kind][slot.subtree] += 1;
            consumed[slot.kind] += 1;
            let inc = &x.steps_of(slot.kind)[step_index];
            for j in 0..d {
                let births = inc[j] + if j == slot.kind { 1 } else { 0 };
                for _ in 0..births {
                    let child_id = colors.len();
                    colors.push(j + 1);
                    child_ids.push(Vec::new());
                    child_ids[slot.vertex].push(child_id);
                    let subtree = if j == slot.kind {
                        slot.subtree
                    } else {
                        if allocated[j] == total_subtrees[j] {
                            return Err(Error::InvalidCoding(
                                "more subtrees demanded than coded".into(),
                            ));
                        }
                        allocated[j] += 1;
                        allocated[j] - 1
                    };
                    queue.push_back(Slot { vertex: child_id, kind: j, subtree });
                }
            }
        }
    }
    for i in 0..d {
        if allocated[i] != total_subtrees[i] || consumed[i] != x.len(i) {
            return Err(Error::InvalidCoding("sequence not exhausted by the coded forest".into()));
        }
    }

    fn build(v: usize, colors: &[usize], child_ids: &[Vec<usize>]) -> TreeNode {
        TreeNode {
            color: colors[v],
            children: child_ids[v].iter().map(|&ch| build(ch, colors, child_ids)).collect(),
        }
    }
    let trees: Vec<TreeNode> = tree_roots.iter().map(|&t| build(t, &colors, &child_ids)).collect();
    TypedForest::new(d, &trees)
}
