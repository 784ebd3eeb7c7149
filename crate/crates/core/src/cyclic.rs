//! Componentwise cyclic permutations of coding sequences and the exact
//! identities that count the "good" ones: the brute-force count, the
//! endpoint determinant, and the sum over elementary-forest codes.
//!
//! The brute-force count is deliberately a plain loop over all shift
//! vectors; its value as an oracle lies in being independent of the
//! determinant formula.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::coding::{smallest_solution, CodingSequence};
use crate::error::{Error, Result};
use crate::exact;
use crate::rng::SplitMix64;

/// Cyclically permutes the first `n_i` increments of each path by
/// `q_i`, leaving any tail beyond `n_i` untouched. The path values at 0
/// and `n_i` are preserved.
pub fn cyclic_shift(x: &CodingSequence, q: &[usize], n: &[usize]) -> Result<CodingSequence> {
    let d = x.d();
    if q.len() != d || n.len() != d {
        return Err(Error::Parse("shift vectors must have one entry per type".into()));
    }
    let mut steps = Vec::with_capacity(d);
    for i in 0..d {
        if n[i] > x.len(i) || n[i] == 0 {
            return Err(Error::ShiftOutOfRange { kind: i, offset: q[i], len: n[i] });
        }
        if q[i] >= n[i] {
            return Err(Error::ShiftOutOfRange { kind: i, offset: q[i], len: n[i] });
        }
        let path = x.steps_of(i);
        let mut rotated: Vec<Vec<i64>> = Vec::with_capacity(path.len());
        rotated.extend_from_slice(&path[q[i]..n[i]]);
        rotated.extend_from_slice(&path[..q[i]]);
        rotated.extend_from_slice(&path[n[i]..]);
        steps.push(rotated);
    }
    CodingSequence::from_steps(d, steps)
}

fn check_shift_hypotheses(r: &[i64], x: &CodingSequence, n: &[usize]) -> Result<()> {
    let d = x.d();
    if r.len() != d || n.len() != d {
        return Err(Error::Parse("vectors must have one entry per type".into()));
    }
    for i in 0..d {
        if n[i] == 0 || n[i] > x.len(i) {
            return Err(Error::Hypothesis(format!("window {} invalid for path {i}", n[i])));
        }
        if x.value(i, i, n[i]) == 0 {
            return Err(Error::Hypothesis(format!(
                "diagonal endpoint of path {i} vanishes; the count identity needs it nonzero"
            )));
        }
    }
    if !x.is_solution(r, n) {
        return Err(Error::Hypothesis("endpoint is not a solution of the balance system".into()));
    }
    Ok(())
}

/// Counts, over all `n_1 * ... * n_d` cyclic permutations, those for
/// which `n` is the smallest solution of the shifted system.
pub fn count_good_shifts(r: &[i64], x: &CodingSequence, n: &[usize]) -> Result<u64> {
    check_shift_hypotheses(r, x, n)?;
    let d = x.d();
    let window = x.window(n)?;
    let mut q = vec![0usize; d];
    let mut count = 0u64;
    loop {
        let shifted = cyclic_shift(&window, &q, n)?;
        if smallest_solution(r, &shifted)? == Some(n.to_vec()) {
            count += 1;
        }
        // odometer over the shift grid
        let mut carry = 0;
        while carry < d {
            q[carry] += 1;
            if q[carry] < n[carry] {
                break;
            }
            q[carry] = 0;
            carry += 1;
        }
        if carry == d {
            return Ok(count);
        }
    }
}

/// Exact determinant of the negated endpoint matrix `(-x^{i,j}(n_i))`.
pub fn cyclic_determinant(x: &CodingSequence, n: &[usize]) -> Result<BigInt> {
    let d = x.d();
    if n.len() != d || (0..d).any(|i| n[i] > x.len(i)) {
        return Err(Error::Parse("window exceeds path lengths".into()));
    }
    let m: Vec<Vec<i64>> =
        (0..d).map(|i| (0..d).map(|j| -x.value(i, j, n[i])).collect()).collect();
    Ok(exact::determinant_i64(&m))
}

/// Whether `code` (one parent type per type, 0 for a root) induces an
/// acyclic functional graph, i.e. codes an elementary forest.
pub fn is_elementary_code(code: &[usize]) -> bool {
    let d = code.len();
    for start in 1..=d {
        let mut hops = 0;
        let mut v = start;
        while v != 0 {
            if code[v - 1] == v {
                return false;
            }
            v = code[v - 1];
            hops += 1;
            if hops > d {
                return false;
            }
        }
    }
    code.iter().all(|&p| p <= d)
}

/// All parent-type vectors coding an elementary forest, in
/// lexicographic order. Small `d` uses the exhaustive filter; larger
/// `d` switches to a pruned recursive construction (the two paths are
/// tested against each other).
pub fn elementary_forests(d: usize) -> Vec<Vec<usize>> {
    if d <= 6 {
        elementary_forests_by_filter(d)
    } else {
        elementary_forests_by_construction(d)
    }
}

/// Filters all `(d+1)^d` candidate vectors with a cycle check.
pub fn elementary_forests_by_filter(d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut code = vec![0usize; d];
    loop {
        if is_elementary_code(&code) {
            out.push(code.clone());
        }
        let mut carry = d;
        loop {
            if carry == 0 {
                return out;
            }
            carry -= 1;
            code[carry] += 1;
            if code[carry] <= d {
                break;
            }
            code[carry] = 0;
            if carry == 0 {
                return out;
            }
        }
    }
}

/// Builds the codes recursively, abandoning a branch as soon as the
/// assigned prefix closes a cycle.
pub fn elementary_forests_by_construction(d: usize) -> Vec<Vec<usize>> {
    fn prefix_acyclic(code: &[usize], assigned: usize) -> bool {
        for start in 1..=assigned {
            let mut v = start;
            let mut hops = 0;
            while v != 0 && v <= assigned {
                v = code[v - 1];
                hops += 1;
                if hops > assigned {
                    return false;
                }
            }
        }
        true
    }
    fn rec(d: usize, code: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let i = code.len();
        if i == d {
            out.push(code.clone());
            return;
        }
        for parent in 0..=d {
            if parent == i + 1 {
                continue; // self-loop can never become acyclic
            }
            code.push(parent);
            if prefix_acyclic(code, code.len()) {
                rec(d, code, out);
            }
            code.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, &mut Vec::new(), &mut out);
    out
}

/// The matrix-tree side of the count: sum over elementary-forest codes
/// of the products `prod_i factor(parent_of_i, i)`, roots contributing
/// the root counts. `k` must satisfy the column identity for `r`.
pub fn elementary_forest_sum(k: &[Vec<i64>], r: &[i64]) -> Result<BigInt> {
    let d = r.len();
    if k.len() != d || k.iter().any(|row| row.len() != d) {
        return Err(Error::Parse("matrix must be d x d".into()));
    }
    for j in 0..d {
        for i in 0..d {
            if i != j && k[i][j] < 0 {
                return Err(Error::Hypothesis("negative off-diagonal entry".into()));
            }
        }
        let col: i64 = (0..d).filter(|&i| i != j).map(|i| k[i][j]).sum();
        if -k[j][j] != r[j] + col {
            return Err(Error::Hypothesis(format!("column {j} violates the diagonal identity")));
        }
    }
    let mut total = BigInt::zero();
    for code in elementary_forests(d) {
        let mut term = BigInt::from(1);
        for (i, &parent) in code.iter().enumerate() {
            let factor = if parent == 0 { r[i] } else { k[parent - 1][i] };
            if factor == 0 {
                term = BigInt::zero();
                break;
            }
            term *= BigInt::from(factor);
        }
        total += term;
    }
    Ok(total)
}

/// Moves one unit of the final jump of coordinate `(kind, coord)` one
/// step earlier, leaving everything else unchanged. The transformation
/// preserves the number of good cyclic permutations; it exists to make
/// that invariance testable in isolation.
pub fn shift_last_jump(x: &CodingSequence, kind: usize, coord: usize) -> Result<CodingSequence> {
    let d = x.d();
    if kind >= d || coord >= d || kind == coord {
        return Err(Error::Parse("jump shift needs an off-diagonal coordinate".into()));
    }
    let len = x.len(kind);
    if len < 2 {
        return Err(Error::Hypothesis("path too short to move its last jump".into()));
    }
    let mut steps: Vec<Vec<Vec<i64>>> = (0..d).map(|i| x.steps_of(i).to_vec()).collect();
    if steps[kind][len - 1][coord] <= 0 {
        return Err(Error::Hypothesis("last jump of the coordinate is not positive".into()));
    }
    steps[kind][len - 1][coord] -= 1;
    steps[kind][len - 2][coord] += 1;
    CodingSequence::from_steps(d, steps)
}

/// Random element of the sequence space together with root counts for
/// which its full length is a (not necessarily smallest) solution with
/// nonvanishing diagonal endpoints. Used by oracle suites.
pub fn random_solved_sequence(
    d: usize,
    max_len: usize,
    rng: &mut SplitMix64,
) -> (Vec<i64>, CodingSequence, Vec<usize>) {
    loop {
        let mut r: Vec<i64> = (0..d).map(|_| rng.below(2) as i64).collect();
        let mut k = vec![vec![0i64; d]; d];
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    k[i][j] = rng.below(2) as i64;
                }
            }
        }
        let mut levels = vec![0i64; d];
        for j in 0..d {
            let col: i64 = (0..d).filter(|&i| i != j).map(|i| k[i][j]).sum();
            levels[j] = r[j] + col;
            if levels[j] == 0 {
                r[j] += 1;
                levels[j] = 1;
            }
        }
        if r.iter().sum::<i64>() < 1 {
            continue;
        }
        if levels.iter().any(|&l| l as usize > max_len) {
            continue;
        }
        let n: Vec<usize> =
            (0..d).map(|i| rng.range_usize(levels[i] as usize, max_len)).collect();
        let mut steps: Vec<Vec<Vec<i64>>> = Vec::with_capacity(d);
        for i in 0..d {
            let mut path = vec![vec![0i64; d]; n[i]];
            // diagonal: distribute the slack above a full descent
            for t in 0..n[i] {
                path[t][i] = -1;
            }
            for _ in 0..(n[i] as i64 - levels[i]) {
                let t = rng.below(n[i] as u64) as usize;
                path[t][i] += 1;
            }
            // off-diagonal gains placed uniformly
            for j in 0..d {
                if j == i {
                    continue;
                }
                for _ in 0..k[i][j] {
                    let t = rng.below(n[i] as u64) as usize;
                    path[t][j] += 1;
                }
            }
            steps.push(path);
        }
        let x = CodingSequence::from_steps(d, steps).expect("constructed steps are valid");
        debug_assert!(x.is_solution(&r, &n));
        return (r, x, n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::encode;
    use crate::forest::{TreeNode, TypedForest};

    fn t(color: usize, children: Vec<TreeNode>) -> TreeNode {
        TreeNode::new(color, children)
    }

    fn two_vertex_sequence() -> CodingSequence {
        let f = TypedForest::new(2, &[t(1, vec![t(2, vec![])])]).unwrap();
        encode(&f)
    }

    #[test]
    fn zero_shift_is_identity() {
        let x = two_vertex_sequence();
        let y = cyclic_shift(&x, &[0, 0], &[1, 1]).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn inverse_shift_restores_window() {
        let mut rng = SplitMix64::new(11);
        let (_r, x, n) = random_solved_sequence(2, 5, &mut rng);
        let q = vec![n[0] / 2, n[1].saturating_sub(1).min(1)];
        let y = cyclic_shift(&x, &q, &n).unwrap();
        let back: Vec<usize> = (0..2).map(|i| (n[i] - q[i]) % n[i]).collect();
        let z = cyclic_shift(&y, &back, &n).unwrap();
        assert_eq!(z, x);
    }

    #[test]
    fn endpoint_invariant_under_all_shifts() {
        let mut rng = SplitMix64::new(5);
        let (_r, x, n) = random_solved_sequence(2, 4, &mut rng);
        for q0 in 0..n[0] {
            for q1 in 0..n[1] {
                let y = cyclic_shift(&x, &[q0, q1], &n).unwrap();
                for i in 0..2 {
                    for j in 0..2 {
                        assert_eq!(y.value(i, j, n[i]), x.value(i, j, n[i]));
                    }
                }
            }
        }
    }

    #[test]
    fn shift_range_checked() {
        let x = two_vertex_sequence();
        assert!(cyclic_shift(&x, &[1, 0], &[1, 1]).is_err());
        assert!(cyclic_shift(&x, &[0, 0], &[2, 1]).is_err());
    }

    #[test]
    fn two_vertex_count_and_determinant() {
        let x = two_vertex_sequence();
        let n = [1usize, 1];
        assert_eq!(count_good_shifts(&[1, 0], &x, &n).unwrap(), 1);
        assert_eq!(cyclic_determinant(&x, &n).unwrap(), BigInt::from(1));
    }

    #[test]
    fn determinant_identity_like() {
        // unit diagonal descents, no off-diagonal movement
        let x = CodingSequence::from_steps(
            2,
            vec![vec![vec![-1, 0]], vec![vec![0, -1]]],
        )
        .unwrap();
        assert_eq!(cyclic_determinant(&x, &[1, 1]).unwrap(), BigInt::from(1));
    }

    #[test]
    fn count_matches_determinant_on_random_sequences() {
        for d in [2usize, 3] {
            let mut rng = SplitMix64::new(97 + d as u64);
            for _ in 0..40 {
                let (r, x, n) = random_solved_sequence(d, 4, &mut rng);
                let brute = count_good_shifts(&r, &x, &n).unwrap();
                let det = cyclic_determinant(&x, &n).unwrap();
                assert_eq!(BigInt::from(brute), det, "d={d} r={r:?} n={n:?}");
            }
        }
    }

    #[test]
    fn elementary_forest_codes_d2() {
        let mut codes = elementary_forests(2);
        codes.sort();
        assert_eq!(codes, vec![vec![0, 0], vec![0, 1], vec![2, 0]]);
        assert_eq!(elementary_forests(1), vec![vec![0]]);
    }

    #[test]
    fn elementary_forest_code_counts() {
        // rooted labeled forests with an external sink: (d+1)^(d-1)
        for d in 1..=5usize {
            let filter = elementary_forests_by_filter(d);
            let mut built = elementary_forests_by_construction(d);
            built.sort();
            let mut sorted = filter.clone();
            sorted.sort();
            assert_eq!(sorted, built);
            assert_eq!(filter.len(), (d + 1).pow(d as u32 - 1));
        }
    }

    #[test]
    fn elementary_sum_hand_cases() {
        // only the code assigning type 2's parent to type 1 contributes
        let k = vec![vec![-1, 1], vec![0, -1]];
        assert_eq!(elementary_forest_sum(&k, &[1, 0]).unwrap(), BigInt::from(1));
        // diagonal case: no cross edges, every type a root
        let k0 = vec![vec![-2, 0], vec![0, -3]];
        assert_eq!(elementary_forest_sum(&k0, &[2, 3]).unwrap(), BigInt::from(6));
        // inconsistent column identity is rejected
        assert!(elementary_forest_sum(&k, &[2, 0]).is_err());
    }

    #[test]
    fn determinant_equals_elementary_sum_exhaustive_small() {
        // all valid (K, r) with d = 2 and entries <= 3
        for r1 in 0..=3i64 {
            for r2 in 0..=3i64 {
                if r1 + r2 == 0 {
                    continue;
                }
                for k12 in 0..=3i64 {
                    for k21 in 0..=3i64 {
                        let k = vec![vec![-(r1 + k21), k12], vec![k21, -(r2 + k12)]];
                        let det = exact::determinant_i64(&[
                            vec![r1 + k21, -k12],
                            vec![-k21, r2 + k12],
                        ]);
                        let sum = elementary_forest_sum(&k, &[r1, r2]).unwrap();
                        assert_eq!(det, sum);
                    }
                }
            }
        }
    }

    #[test]
    fn moving_the_last_jump_preserves_the_count() {
        // reduced-style sequence with unit diagonal descents
        let steps = vec![
            vec![vec![-1, 0], vec![-1, 2]],
            vec![vec![1, -1], vec![0, -1]],
        ];
        let x = CodingSequence::from_steps(2, steps).unwrap();
        let r = [1i64, 0];
        let n = [2usize, 2];
        assert!(x.is_solution(&r, &n));
        let moved = shift_last_jump(&x, 0, 1).unwrap();
        assert_eq!(
            count_good_shifts(&r, &x, &n).unwrap(),
            count_good_shifts(&r, &moved, &n).unwrap(),
        );
    }

    #[test]
    fn simple_system_count_matches_elementary_sum() {
        // for each type, all off-diagonal gains land on one step
        let mut rng = SplitMix64::new(2024);
        for _ in 0..30 {
            let d = 2 + (rng.below(2) as usize);
            let mut r: Vec<i64> = (0..d).map(|_| rng.below(2) as i64).collect();
            let mut k = vec![vec![0i64; d]; d];
            for i in 0..d {
                for j in 0..d {
                    if i != j {
                        k[i][j] = rng.below(3) as i64;
                    }
                }
            }
            let mut levels = vec![0i64; d];
            for j in 0..d {
                let col: i64 = (0..d).filter(|&i| i != j).map(|i| k[i][j]).sum();
                levels[j] = r[j] + col;
                if levels[j] == 0 {
                    r[j] += 1;
                    levels[j] = 1;
                }
            }
            for j in 0..d {
                let col: i64 = (0..d).filter(|&i| i != j).map(|i| k[i][j]).sum();
                k[j][j] = -(r[j] + col);
            }
            let mut steps: Vec<Vec<Vec<i64>>> = Vec::new();
            for i in 0..d {
                let len = levels[i] as usize;
                let mut path = vec![vec![0i64; d]; len];
                for (t, inc) in path.iter_mut().enumerate() {
                    inc[i] = -1;
                    let _ = t;
                }
                let jump_at = rng.below(len as u64) as usize;
                for j in 0..d {
                    if j != i {
                        path[jump_at][j] = k[i][j];
                    }
                }
                steps.push(path);
            }
            let x = CodingSequence::from_steps(d, steps).unwrap();
            let n: Vec<usize> = levels.iter().map(|&l| l as usize).collect();
            let brute = count_good_shifts(&r, &x, &n).unwrap();
            let sum = elementary_forest_sum(&k, &r).unwrap();
            assert_eq!(BigInt::from(brute), sum);
        }
    }
}
