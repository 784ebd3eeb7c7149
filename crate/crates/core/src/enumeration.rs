//! Closed-form counts of multitype forests by degrees, each paired with
//! an exhaustive brute-force oracle over the same class.
//!
//! The closed forms return exact big integers; every division is
//! performed last and asserted exact, so a transcription error in a
//! formula surfaces as an error rather than a silently rounded count.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, Factorials};
use crate::forest::{Signature, TreeNode, TypedForest};

fn require_positive_subtree_counts(sig: &Signature) -> Result<()> {
    sig.validate()?;
    if (0..sig.d).any(|i| -sig.k[i][i] <= 0) {
        return Err(Error::Hypothesis(
            "each type must contribute at least one subtree".into(),
        ));
    }
    Ok(())
}

/// Number of plane forests with a fixed root type sequence realizing
/// the signature: `n_i` vertices of type `i`, `r_i` roots of type `i`,
/// off-diagonal parent-type counts `k_ij`. The count does not depend on
/// which root type sequence realizes `r`.
pub fn count_plane_forests(sig: &Signature) -> Result<BigInt> {
    require_positive_subtree_counts(sig)?;
    let det = exact::determinant_i64(&sig.negated_matrix());
    let kp = sig.k_prime();
    let mut num = det;
    for i in 0..sig.d {
        for j in 0..sig.d {
            num *= exact::binomial(sig.n[i] + kp[i][j] - 1, kp[i][j]);
        }
    }
    if num.is_zero() {
        return Ok(BigInt::zero());
    }
    let mut den = BigInt::one();
    for i in 0..sig.d {
        den *= BigInt::from(sig.n[i]);
    }
    exact::exact_div(num, den)
}

/// Labeled forests with a full indegree tuple: `tuple[i][j][l]` is the
/// number of type-`j+1` children of the type-`i+1` vertex labeled
/// `l + 1`.
pub fn count_labeled_by_indegree(sig: &Signature, tuple: &[Vec<Vec<i64>>]) -> Result<BigInt> {
    require_positive_subtree_counts(sig)?;
    let d = sig.d;
    let kp = sig.k_prime();
    if tuple.len() != d {
        return Err(Error::Hypothesis("indegree tuple dimension mismatch".into()));
    }
    for i in 0..d {
        if tuple[i].len() != d {
            return Err(Error::Hypothesis("indegree tuple dimension mismatch".into()));
        }
        for j in 0..d {
            if tuple[i][j].len() != sig.n[i] as usize {
                return Err(Error::Hypothesis(format!(
                    "indegree tuple ({i},{j}) must list one count per vertex"
                )));
            }
            if tuple[i][j].iter().any(|&c| c < 0) {
                return Err(Error::Hypothesis("negative indegree entry".into()));
            }
            if tuple[i][j].iter().sum::<i64>() != kp[i][j] {
                return Err(Error::Hypothesis(format!(
                    "indegree tuple ({i},{j}) does not sum to the edge count"
                )));
            }
        }
    }
    let mut facts = Factorials::new();
    let det = exact::determinant_i64(&sig.negated_matrix());
    let mut num = det;
    for j in 0..d {
        num *= facts.get(sig.n[j] as usize - 1);
    }
    let mut den = BigInt::one();
    for i in 0..d {
        den *= facts.get(sig.r[i] as usize);
    }
    for row in tuple {
        for col in row {
            for &c in col {
                den *= facts.get(c as usize);
            }
        }
    }
    exact_div_or_zero(num, den)
}

/// Labeled forests with given numbers of each edge type.
pub fn count_labeled_by_edge_types(sig: &Signature) -> Result<BigInt> {
    require_positive_subtree_counts(sig)?;
    let d = sig.d;
    let kp = sig.k_prime();
    let mut facts = Factorials::new();
    let det = exact::determinant_i64(&sig.negated_matrix());
    let mut num = det;
    for i in 0..d {
        for j in 0..d {
            num *= BigInt::from(sig.n[i]).pow(kp[i][j] as u32);
        }
    }
    for j in 0..d {
        num *= facts.get(sig.n[j] as usize - 1);
    }
    let mut den = BigInt::one();
    for j in 0..d {
        den *= facts.get(sig.r[j] as usize);
        for i in 0..d {
            den *= facts.get(kp[i][j] as usize);
        }
    }
    exact_div_or_zero(num, den)
}

/// Labeled forests in which every vertex has at most one child of each
/// type.
pub fn count_injective(sig: &Signature) -> Result<BigInt> {
    require_positive_subtree_counts(sig)?;
    let d = sig.d;
    let kp = sig.k_prime();
    let mut facts = Factorials::new();
    let det = exact::determinant_i64(&sig.negated_matrix());
    let mut num = det;
    for i in 0..d {
        for j in 0..d {
            num *= exact::binomial(sig.n[i], kp[i][j]);
        }
    }
    for j in 0..d {
        num *= facts.get(sig.n[j] as usize - 1);
    }
    let mut den = BigInt::one();
    for j in 0..d {
        den *= facts.get(sig.r[j] as usize);
    }
    exact_div_or_zero(num, den)
}

/// Census of indegree types: entry `(type, offspring vector, count)`
/// says how many type-`type+1` vertices have exactly that offspring
/// vector. Entries with zero count may be omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndegreeCensus {
    pub entries: Vec<(usize, Vec<i64>, i64)>,
}

impl IndegreeCensus {
    fn validate(&self, sig: &Signature) -> Result<()> {
        let d = sig.d;
        let mut per_type = vec![0i64; d];
        let mut edge = vec![vec![0i64; d]; d];
        for (i, u, count) in &self.entries {
            if *i >= d || u.len() != d {
                return Err(Error::Hypothesis("census entry dimension mismatch".into()));
            }
            if u.iter().any(|&x| x < 0) || *count < 0 {
                return Err(Error::Hypothesis("negative census entry".into()));
            }
            per_type[*i] += count;
            for j in 0..d {
                edge[*i][j] += u[j] * count;
            }
        }
        let kp = sig.k_prime();
        for i in 0..d {
            if per_type[i] != sig.n[i] {
                return Err(Error::Hypothesis(format!(
                    "census counts {} type-{} vertices, signature has {}",
                    per_type[i],
                    i + 1,
                    sig.n[i]
                )));
            }
            for j in 0..d {
                if edge[i][j] != kp[i][j] {
                    return Err(Error::Hypothesis(format!(
                        "census edge totals disagree with the signature at ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `N(k)`: how many offspring-vector coordinates across the census
    /// equal `k`, weighted by multiplicities, plus the root counts equal
    /// to `k`.
    fn coordinate_multiplicity(&self, sig: &Signature, k: i64) -> i64 {
        let mut total = 0i64;
        for (_, u, count) in &self.entries {
            total += count * u.iter().filter(|&&x| x == k).count() as i64;
        }
        total += sig.r.iter().filter(|&&x| x == k).count() as i64;
        total
    }
}

/// Labeled forests with a prescribed number of vertices of each
/// indegree type.
pub fn count_labeled_by_census(sig: &Signature, census: &IndegreeCensus) -> Result<BigInt> {
    require_positive_subtree_counts(sig)?;
    census.validate(sig)?;
    let d = sig.d;
    let mut facts = Factorials::new();
    let det = exact::determinant_i64(&sig.negated_matrix());
    let mut num = det;
    for j in 0..d {
        num *= facts.get(sig.n[j] as usize);
        num *= facts.get(sig.n[j] as usize - 1);
    }
    let mut den = BigInt::one();
    for (_, _, count) in &census.entries {
        den *= facts.get(*count as usize);
    }
    let max_coord = sig.n.iter().copied().max().unwrap_or(0);
    for k in 2..=max_coord {
        let mult = census.coordinate_multiplicity(sig, k);
        den *= facts.get(k as usize).pow(mult as u32);
    }
    exact_div_or_zero(num, den)
}

/// Plane (unlabeled) forests with a prescribed census.
pub fn count_unlabeled_by_census(sig: &Signature, census: &IndegreeCensus) -> Result<BigInt> {
    require_positive_subtree_counts(sig)?;
    census.validate(sig)?;
    let d = sig.d;
    let mut facts = Factorials::new();
    let det = exact::determinant_i64(&sig.negated_matrix());
    let mut num = det;
    for j in 0..d {
        num *= facts.get(sig.n[j] as usize - 1);
    }
    let mut den = BigInt::one();
    for (_, _, count) in &census.entries {
        den *= facts.get(*count as usize);
    }
    exact_div_or_zero(num, den)
}

/// Single-type labeled forests in which vertex `l + 1` has `degrees[l]`
/// children; the number of trees is forced by the degree sum.
pub fn count_single_type_by_degrees(degrees: &[i64]) -> Result<BigInt> {
    let n = degrees.len() as i64;
    if n == 0 {
        return Err(Error::Hypothesis("empty degree sequence".into()));
    }
    if degrees.iter().any(|&c| c < 0) {
        return Err(Error::Hypothesis("negative degree".into()));
    }
    let total: i64 = degrees.iter().sum();
    let roots = n - total;
    if roots <= 0 {
        return Ok(BigInt::zero());
    }
    let mut facts = Factorials::new();
    // (roots/n) * C(n, roots) * multinomial(n - roots; degrees)
    let mut num = BigInt::from(roots) * exact::binomial(n, roots) * facts.get((n - roots) as usize);
    let mut den = BigInt::from(n);
    for &c in degrees {
        den *= facts.get(c as usize);
    }
    let _ = &mut num;
    exact_div_or_zero(num, den)
}

fn exact_div_or_zero(num: BigInt, den: BigInt) -> Result<BigInt> {
    if num.is_zero() {
        return Ok(BigInt::zero());
    }
    exact::exact_div(num, den)
}

// ---------------------------------------------------------------------
// Exhaustive generation
// ---------------------------------------------------------------------

/// Bottom-up tables of all trees and monotone tree lists by exact size.
struct ShapeTables {
    /// `trees[c][s]`: trees with root color `c + 1` and exactly `s`
    /// vertices.
    trees: Vec<Vec<Vec<TreeNode>>>,
}

impl ShapeTables {
    fn build(d: usize, max_size: usize) -> Self {
        let mut trees: Vec<Vec<Vec<TreeNode>>> = vec![vec![Vec::new(); max_size + 1]; d];
        // monotone[min_c][s]: child lists with nondecreasing colors >= min_c + 1
        let mut monotone: Vec<Vec<Vec<Vec<TreeNode>>>> =
            vec![vec![Vec::new(); max_size + 1]; d + 1];
        for mc in 0..=d {
            monotone[mc][0].push(Vec::new());
        }
        for s in 1..=max_size {
            for c in 0..d {
                let mut bucket = Vec::new();
                for kids in &monotone[0][s - 1] {
                    bucket.push(TreeNode::new(c + 1, kids.clone()));
                }
                trees[c][s] = bucket;
            }
            // rebuild monotone lists of total size s now that trees of
            // size <= s exist
            for mc in (0..d).rev() {
                let mut bucket = Vec::new();
                for first_color in mc..d {
                    for first_size in 1..=s {
                        for t in &trees[first_color][first_size] {
                            for rest in &monotone[first_color][s - first_size] {
                                let mut list = Vec::with_capacity(1 + rest.len());
                                list.push(t.clone());
                                list.extend(rest.iter().cloned());
                                bucket.push(list);
                            }
                        }
                    }
                }
                monotone[mc][s] = bucket;
            }
        }
        let _ = d;
        ShapeTables { trees }
    }
}

/// All nonempty plane forests with at most `max_total` vertices and any
/// root type sequence, in a fixed deterministic order.
pub fn all_forests(d: usize, max_total: usize) -> Vec<TypedForest> {
    let tables = ShapeTables::build(d, max_total);
    // free root colors: lists of trees without the sibling constraint
    let mut free: Vec<Vec<Vec<TreeNode>>> = vec![Vec::new(); max_total + 1];
    free[0].push(Vec::new());
    for s in 1..=max_total {
        let mut bucket = Vec::new();
        for c in 0..d {
            for first_size in 1..=s {
                for t in &tables.trees[c][first_size] {
                    for rest in &free[s - first_size] {
                        let mut list = Vec::with_capacity(1 + rest.len());
                        list.push(t.clone());
                        list.extend(rest.iter().cloned());
                        bucket.push(list);
                    }
                }
            }
        }
        free[s] = bucket;
    }
    let mut out = Vec::new();
    for s in 1..=max_total {
        for list in &free[s] {
            out.push(TypedForest::new(d, list).expect("generated forests are valid"));
        }
    }
    out
}

/// All plane forests with the exact root type sequence `root_colors`
/// (colors `1..=d`) and at most `max_total` vertices.
pub fn forests_rooted(d: usize, root_colors: &[usize], max_total: usize) -> Vec<TypedForest> {
    if root_colors.len() > max_total {
        return Vec::new();
    }
    let tables = ShapeTables::build(d, max_total - root_colors.len() + 1);
    fn rec(
        tables: &ShapeTables,
        roots: &[usize],
        budget: usize,
        out_prefix: &mut Vec<TreeNode>,
        sink: &mut Vec<Vec<TreeNode>>,
    ) {
        match roots.split_first() {
            None => sink.push(out_prefix.clone()),
            Some((&c, rest)) => {
                let reserve = rest.len();
                for size in 1..=budget.saturating_sub(reserve) {
                    for t in &tables.trees[c - 1][size] {
                        out_prefix.push(t.clone());
                        rec(tables, rest, budget - size, out_prefix, sink);
                        out_prefix.pop();
                    }
                }
            }
        }
    }
    let mut lists = Vec::new();
    rec(&tables, root_colors, max_total, &mut Vec::new(), &mut lists);
    lists
        .into_iter()
        .map(|list| TypedForest::new(d, &list).expect("generated forests are valid"))
        .collect()
}

/// Exhaustive, duplicate-free stream of the plane forests matching a
/// signature, using the canonical root type sequence (type 1 roots
/// first). The stream length equals [`count_plane_forests`].
pub fn plane_forests_matching(sig: &Signature) -> Result<Vec<TypedForest>> {
    sig.validate()?;
    let mut c = Vec::new();
    for (i, &count) in sig.r.iter().enumerate() {
        for _ in 0..count {
            c.push(i + 1);
        }
    }
    let total: i64 = sig.n.iter().sum();
    let forests = forests_rooted(sig.d, &c, total as usize);
    Ok(forests
        .into_iter()
        .filter(|f| {
            let s = f.signature();
            s.n == sig.n && s.k == sig.k
        })
        .collect())
}

// ---------------------------------------------------------------------
// Labeled brute force
// ---------------------------------------------------------------------

/// Exhaustive tallies over labeled forests on a fixed typed vertex set:
/// vertices `(type, label)` with `label` in `1..=n[type]`, a forest
/// being an acyclic parent assignment. Trees and children carry no
/// order; the labels distinguish everything.
#[derive(Debug, Default)]
pub struct LabeledTally {
    /// `(r, k)` class -> labeled-forest count.
    pub by_class: HashMap<(Vec<i64>, Vec<Vec<i64>>), u64>,
    /// `(r, k, indegree tuple)` -> count; the tuple lists, per (type,
    /// child type), the child counts of each labeled vertex.
    pub by_indegree: HashMap<(Vec<i64>, Vec<Vec<i64>>, Vec<Vec<Vec<i64>>>), u64>,
    /// `(r, k, census)` -> count; census entries sorted.
    pub by_census: HashMap<(Vec<i64>, Vec<Vec<i64>>, Vec<(usize, Vec<i64>, i64)>), u64>,
    /// `(r, k)` -> count of forests where every vertex has at most one
    /// child of each type.
    pub injective: HashMap<(Vec<i64>, Vec<Vec<i64>>), u64>,
}

/// Enumerates every parent assignment on the typed labeled vertex set
/// and tallies the acyclic ones by class, indegree tuple, census and
/// injectivity.
pub fn tally_labeled_forests(d: usize, n: &[i64]) -> LabeledTally {
    let total: usize = n.iter().map(|&x| x as usize).sum();
    let mut vertex_type = Vec::with_capacity(total);
    let mut vertex_label = Vec::with_capacity(total);
    for (i, &count) in n.iter().enumerate() {
        for l in 0..count as usize {
            vertex_type.push(i);
            vertex_label.push(l);
        }
    }
    let mut tally = LabeledTally::default();
    if total == 0 {
        return tally;
    }
    // parent[v] in 0..=total: total means root, otherwise an index
    // (skipping v itself is unnecessary: v -> v is cyclic and filtered)
    let mut parent = vec![0usize; total];
    'outer: loop {
        if is_acyclic(&parent, total) {
            record(&mut tally, d, n, &vertex_type, &vertex_label, &parent, total);
        }
        let mut pos = 0;
        loop {
            parent[pos] += 1;
            if parent[pos] <= total {
                break;
            }
            parent[pos] = 0;
            pos += 1;
            if pos == total {
                break 'outer;
            }
        }
    }
    tally
}

fn is_acyclic(parent: &[usize], root_marker: usize) -> bool {
    let total = parent.len();
    for start in 0..total {
        let mut v = start;
        let mut hops = 0;
        while parent[v] != root_marker {
            v = parent[v];
            hops += 1;
            if hops > total {
                return false;
            }
        }
    }
    true
}

#[allow(clippy::too_many_arguments)]
fn record(
    tally: &mut LabeledTally,
    d: usize,
    n: &[i64],
    vertex_type: &[usize],
    vertex_label: &[usize],
    parent: &[usize],
    root_marker: usize,
) {
    let mut r = vec![0i64; d];
    let mut k = vec![vec![0i64; d]; d];
    let mut tuple: Vec<Vec<Vec<i64>>> =
        (0..d).map(|i| vec![vec![0i64; n[i] as usize]; d]).collect();
    for v in 0..parent.len() {
        let tv = vertex_type[v];
        if parent[v] == root_marker {
            r[tv] += 1;
        } else {
            let p = parent[v];
            let tp = vertex_type[p];
            tuple[tp][tv][vertex_label[p]] += 1;
            if tp != tv {
                k[tp][tv] += 1;
            }
        }
    }
    for j in 0..d {
        let col: i64 = (0..d).filter(|&i| i != j).map(|i| k[i][j]).sum();
        k[j][j] = -(r[j] + col);
    }
    let injective = tuple
        .iter()
        .all(|per_child| per_child.iter().all(|counts| counts.iter().all(|&c| c <= 1)));
    // census: per (type, offspring vector) multiplicities
    let mut census_map: std::collections::BTreeMap<(usize, Vec<i64>), i64> =
        std::collections::BTreeMap::new();
    for i in 0..d {
        for l in 0..n[i] as usize {
            let u: Vec<i64> = (0..d).map(|j| tuple[i][j][l]).collect();
            *census_map.entry((i, u)).or_insert(0) += 1;
        }
    }
    let census: Vec<(usize, Vec<i64>, i64)> =
        census_map.into_iter().map(|((i, u), c)| (i, u, c)).collect();

    let class = (r.clone(), k.clone());
    *tally.by_class.entry(class.clone()).or_insert(0) += 1;
    if injective {
        *tally.injective.entry(class.clone()).or_insert(0) += 1;
    }
    *tally.by_indegree.entry((r.clone(), k.clone(), tuple)).or_insert(0) += 1;
    *tally.by_census.entry((r, k, census)).or_insert(0) += 1;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(d: usize, r: Vec<i64>, n: Vec<i64>, offdiag: Vec<Vec<i64>>) -> Signature {
        Signature::from_off_diagonal(d, r, n, offdiag).unwrap()
    }

    #[test]
    fn single_type_plane_counts() {
        // r trees, n vertices: one-type collapse of the plane formula
        let two = count_plane_forests(&sig(1, vec![1], vec![3], vec![vec![0]])).unwrap();
        assert_eq!(two, BigInt::from(2));
        // oracle: enumerate plane trees on three vertices
        let generated = forests_rooted(1, &[1], 3)
            .into_iter()
            .filter(|f| f.len() == 3)
            .count();
        assert_eq!(generated, 2);
        for (r, n) in [(1i64, 5i64), (2, 5), (3, 4)] {
            let formula = count_plane_forests(&sig(1, vec![r], vec![n], vec![vec![0]])).unwrap();
            let direct = BigInt::from(r) * exact::binomial(2 * n - r - 1, n - r);
            assert_eq!(formula, exact::exact_div(direct, BigInt::from(n)).unwrap());
        }
    }

    #[test]
    fn forced_single_forest() {
        let s = sig(2, vec![1, 0], vec![1, 1], vec![vec![0, 1], vec![0, 0]]);
        assert_eq!(count_plane_forests(&s).unwrap(), BigInt::one());
        let stream = plane_forests_matching(&s).unwrap();
        assert_eq!(stream.len(), 1);
        // every vertex its own single-vertex tree
        let isolated = sig(2, vec![1, 1], vec![1, 1], vec![vec![0, 0], vec![0, 0]]);
        assert_eq!(count_plane_forests(&isolated).unwrap(), BigInt::one());
    }

    #[test]
    fn plane_count_matches_generator_small() {
        // all admissible 2-type signatures with r = (1, 1), total <= 5
        let forests = forests_rooted(2, &[1, 2], 5);
        let mut buckets: HashMap<(Vec<i64>, Vec<Vec<i64>>), u64> = HashMap::new();
        for f in &forests {
            let s = f.signature();
            *buckets.entry((s.n.clone(), s.k.clone())).or_insert(0) += 1;
        }
        for ((n, k), count) in buckets {
            let s = Signature::new(2, vec![1, 1], n, k).unwrap();
            if (0..2).any(|i| -s.k[i][i] <= 0) {
                continue;
            }
            assert_eq!(count_plane_forests(&s).unwrap(), BigInt::from(count));
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let a = all_forests(2, 4);
        let b = all_forests(2, 4);
        assert_eq!(a, b);
        assert!(!a.is_empty());
        // duplicate-free
        let mut seen = std::collections::HashSet::new();
        for f in &a {
            assert!(seen.insert(format!("{f:?}")));
        }
    }

    #[test]
    fn degree_sequence_counts() {
        assert_eq!(count_single_type_by_degrees(&[0]).unwrap(), BigInt::one());
        assert_eq!(count_single_type_by_degrees(&[2, 0, 0]).unwrap(), BigInt::one());
        // all childless: one forest (every vertex a root)
        assert_eq!(count_single_type_by_degrees(&[0, 0, 0]).unwrap(), BigInt::one());
        // degree sum equal to n leaves no root
        assert_eq!(count_single_type_by_degrees(&[3, 0, 0]).unwrap(), BigInt::zero());
        // oracle: labeled tally with d = 1, n = 3
        let tally = tally_labeled_forests(1, &[3]);
        let mut by_deg: HashMap<Vec<i64>, u64> = HashMap::new();
        for ((_r, _k, tuple), count) in &tally.by_indegree {
            by_deg
                .entry(tuple[0][0].clone())
                .and_modify(|c| *c += count)
                .or_insert(*count);
        }
        for (deg, count) in by_deg {
            assert_eq!(
                count_single_type_by_degrees(&deg).unwrap(),
                BigInt::from(count),
                "degrees {deg:?}"
            );
        }
    }

    #[test]
    fn indegree_count_is_label_permutation_invariant() {
        // the closed form only sees the multiset of per-vertex counts
        let s = sig(2, vec![1, 0], vec![3, 2], vec![vec![0, 2], vec![1, 0]]);
        let tuple = vec![
            vec![vec![1, 0, 0], vec![2, 0, 0]],
            vec![vec![1, 0], vec![0, 0]],
        ];
        let mut permuted = tuple.clone();
        permuted[0][0] = vec![0, 0, 1];
        permuted[0][1] = vec![0, 0, 2];
        permuted[1][0] = vec![0, 1];
        let a = count_labeled_by_indegree(&s, &tuple).unwrap();
        let b = count_labeled_by_indegree(&s, &permuted).unwrap();
        assert_eq!(a, b);
        assert!(a > BigInt::zero());
    }

    #[test]
    fn labeled_class_counts_small() {
        // d = 1, n = 2, one root: two labeled forests (either vertex on top)
        let s = sig(1, vec![1], vec![2], vec![vec![0]]);
        assert_eq!(count_labeled_by_edge_types(&s).unwrap(), BigInt::from(2));
        let tally = tally_labeled_forests(1, &[2]);
        assert_eq!(tally.by_class[&(vec![1], vec![vec![-1]])], 2);
    }

    #[test]
    fn labeled_formulas_match_tally_two_types() {
        let n = vec![2i64, 1];
        let tally = tally_labeled_forests(2, &n);
        for ((r, k), &count) in &tally.by_class {
            if (0..2).any(|i| -k[i][i] <= 0) {
                continue;
            }
            let s = Signature::new(2, r.clone(), n.clone(), k.clone()).unwrap();
            assert_eq!(
                count_labeled_by_edge_types(&s).unwrap(),
                BigInt::from(count),
                "r={r:?} k={k:?}"
            );
            let inj = tally.injective.get(&(r.clone(), k.clone())).copied().unwrap_or(0);
            assert_eq!(count_injective(&s).unwrap(), BigInt::from(inj));
        }
        for ((r, k, tuple), &count) in &tally.by_indegree {
            if (0..2).any(|i| -k[i][i] <= 0) {
                continue;
            }
            let s = Signature::new(2, r.clone(), n.clone(), k.clone()).unwrap();
            assert_eq!(count_labeled_by_indegree(&s, tuple).unwrap(), BigInt::from(count));
        }
        for ((r, k, census), &count) in &tally.by_census {
            if (0..2).any(|i| -k[i][i] <= 0) {
                continue;
            }
            let s = Signature::new(2, r.clone(), n.clone(), k.clone()).unwrap();
            let c = IndegreeCensus { entries: census.clone() };
            assert_eq!(count_labeled_by_census(&s, &c).unwrap(), BigInt::from(count));
        }
    }

    #[test]
    fn census_fiber_relation() {
        // labeled = unlabeled * prod n_j! / prod_k (k!)^{N(k)}
        let n = vec![2i64, 1];
        let tally = tally_labeled_forests(2, &n);
        let mut facts = Factorials::new();
        for ((r, k, census), _) in tally.by_census.iter() {
            if (0..2).any(|i| -k[i][i] <= 0) {
                continue;
            }
            let s = Signature::new(2, r.clone(), n.clone(), k.clone()).unwrap();
            let c = IndegreeCensus { entries: census.clone() };
            let labeled = count_labeled_by_census(&s, &c).unwrap();
            let unlabeled = count_unlabeled_by_census(&s, &c).unwrap();
            let mut fiber = BigInt::one();
            for j in 0..2 {
                fiber *= facts.get(n[j] as usize);
            }
            let mut den = BigInt::one();
            let max_coord = n.iter().copied().max().unwrap();
            for kk in 2..=max_coord {
                let mult = c.coordinate_multiplicity(&s, kk);
                den *= facts.get(kk as usize).pow(mult as u32);
            }
            assert_eq!(labeled, unlabeled * exact::exact_div(fiber, den).unwrap());
        }
    }

    #[test]
    fn injective_binomial_degeneracy() {
        // an edge count above the vertex count kills the binomial
        let s = Signature::from_off_diagonal(2, vec![1, 0], vec![2, 3], vec![vec![0, 3], vec![1, 0]])
            .unwrap();
        assert_eq!(count_injective(&s).unwrap(), BigInt::zero());
    }

    #[test]
    fn hypothesis_guard() {
        // a type with zero subtrees is outside the counting hypotheses
        let s = Signature::from_off_diagonal(2, vec![1, 0], vec![1, 0], vec![vec![0, 0], vec![0, 0]]);
        // n_2 = 0 = subtree count passes signature validation but not
        // the counting hypotheses
        let s = s.unwrap();
        assert!(count_plane_forests(&s).is_err());
    }
}
