//! Seeded sampling of branching forests and the statistics used to
//! compare empirical frequencies against the exact laws.
//!
//! Offspring vectors are drawn by inverse CDF over the finite support
//! in its canonical key order, with thresholds discretized to 64-bit
//! fixed point (a bias below 2^-64 per draw, far under any tolerance
//! used here). Same seed, same forest.

use crate::branching::{classify, Classification, OffspringLaw, Regime};
use crate::error::{Error, Result};
use crate::exact::rational_to_f64;
use crate::forest::{TreeNode, TypedForest};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy)]
pub struct SimCaps {
    /// Sampling stops (with a truncation report) once the forest holds
    /// this many vertices.
    pub max_vertices: usize,
}

impl Default for SimCaps {
    fn default() -> Self {
        SimCaps { max_vertices: 100_000 }
    }
}

#[derive(Debug, Clone)]
pub enum SimOutcome {
    Forest(TypedForest),
    /// The cap was hit; the partial forest is withheld because its law
    /// is not the conditional law of interest.
    Truncated { vertices: usize },
}

/// Reusable sampler; validates the law once (almost-sure extinction
/// requires a subcritical or critical, nondegenerate law).
pub struct Simulator {
    d: usize,
    thresholds: Vec<Vec<(u128, Vec<usize>)>>,
    pub classification: Classification,
}

impl Simulator {
    pub fn new(law: &OffspringLaw) -> Result<Self> {
        let classification = classify(law)?;
        if classification.regime == Regime::Supercritical {
            return Err(Error::InvalidLaw("supercritical laws do not die out".into()));
        }
        if classification.degenerate {
            return Err(Error::InvalidLaw(
                "degenerate laws (always exactly one child) never go extinct".into(),
            ));
        }
        let d = law.d();
        let scale = 1u128 << 64;
        let mut thresholds = Vec::with_capacity(d);
        for i in 0..d {
            let mut cum = num_rational::BigRational::from_integer(0.into());
            let support = law.support(i);
            let mut levels = Vec::with_capacity(support.len());
            for (idx, (z, w)) in support.iter().enumerate() {
                cum += w;
                let level = if idx + 1 == support.len() {
                    scale
                } else {
                    // floor(cum * 2^64)
                    let scaled = (&cum
                        * num_rational::BigRational::from_integer(num_bigint::BigInt::from(scale)))
                    .floor();
                    use num_traits::ToPrimitive;
                    scaled.to_integer().to_u128().unwrap_or(scale)
                };
                levels.push((level, z.clone()));
            }
            thresholds.push(levels);
        }
        Ok(Simulator { d, thresholds, classification })
    }

    fn draw(&self, kind: usize, rng: &mut SplitMix64) -> &[usize] {
        let u = rng.next_u64() as u128;
        for (level, z) in &self.thresholds[kind] {
            if u < *level {
                return z;
            }
        }
        &self.thresholds[kind].last().expect("nonempty support").1
    }

    /// Grows the forest tree by tree from the given root colors;
    /// children are emitted in nondecreasing color order.
    pub fn sample(
        &self,
        root_colors: &[usize],
        caps: SimCaps,
        rng: &mut SplitMix64,
    ) -> Result<SimOutcome> {
        Ok(self.sample_detailed(root_colors, caps, rng)?.outcome)
    }

    /// Like [`Simulator::sample`] but also reports, per type, the first
    /// increment of that type's coding path (the progeny of the first
    /// vertex of the type in walk order, diagonal entry shifted down by
    /// one). First increments are recorded as the walk reaches them, so
    /// they are present even when the forest is later truncated; across
    /// replicas they are independent draws from the coding step law.
    pub fn sample_detailed(
        &self,
        root_colors: &[usize],
        caps: SimCaps,
        rng: &mut SplitMix64,
    ) -> Result<SampleDetail> {
        for &c in root_colors {
            if c == 0 || c > self.d {
                return Err(Error::ColorOutOfRange { color: c, d: self.d });
            }
        }
        let mut first_steps: Vec<Option<Vec<i64>>> = vec![None; self.d];
        let mut colors: Vec<usize> = Vec::new();
        let mut children: Vec<Vec<usize>> = Vec::new();
        let mut roots = Vec::with_capacity(root_colors.len());
        for &c in root_colors {
            let id = colors.len();
            colors.push(c);
            children.push(Vec::new());
            roots.push(id);
        }
        let mut truncated = colors.len() > caps.max_vertices;
        // tree by tree, so vertex creation order is the forest's
        // breadth-first labeling
        if !truncated {
            'trees: for tree in 0..roots.len() {
                let mut queue = std::collections::VecDeque::new();
                queue.push_back(roots[tree]);
                while let Some(v) = queue.pop_front() {
                    let kind = colors[v] - 1;
                    let offspring = self.draw(kind, rng).to_vec();
                    if first_steps[kind].is_none() {
                        let mut step: Vec<i64> =
                            offspring.iter().map(|&x| x as i64).collect();
                        step[kind] -= 1;
                        first_steps[kind] = Some(step);
                    }
                    for (j, &count) in offspring.iter().enumerate() {
                        for _ in 0..count {
                            let id = colors.len();
                            colors.push(j + 1);
                            children.push(Vec::new());
                            children[v].push(id);
                            queue.push_back(id);
                            if colors.len() > caps.max_vertices {
                                truncated = true;
                                break 'trees;
                            }
                        }
                    }
                }
            }
        }
        if truncated {
            return Ok(SampleDetail {
                outcome: SimOutcome::Truncated { vertices: colors.len() },
                first_steps,
            });
        }
        fn build(v: usize, colors: &[usize], children: &[Vec<usize>]) -> TreeNode {
            TreeNode {
                color: colors[v],
                children: children[v].iter().map(|&c| build(c, colors, children)).collect(),
            }
        }
        let trees: Vec<TreeNode> = roots.iter().map(|&t| build(t, &colors, &children)).collect();
        Ok(SampleDetail {
            outcome: SimOutcome::Forest(TypedForest::new(self.d, &trees)?),
            first_steps,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SampleDetail {
    pub outcome: SimOutcome,
    /// Per type: the first increment of the coding path, when the type
    /// appeared before any truncation.
    pub first_steps: Vec<Option<Vec<i64>>>,
}

/// One-shot convenience wrapper.
pub fn simulate_forest(
    law: &OffspringLaw,
    root_colors: &[usize],
    seed: u64,
    caps: SimCaps,
) -> Result<SimOutcome> {
    let sim = Simulator::new(law)?;
    let mut rng = SplitMix64::new(seed);
    sim.sample(root_colors, caps, &mut rng)
}

/// Mean of the law's spectral radius enclosure as a float, for reports.
pub fn rho_estimate(c: &Classification) -> f64 {
    0.5 * (rational_to_f64(&c.rho.0) + rational_to_f64(&c.rho.1))
}

// ---------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------

/// Pearson statistic over categories with positive expectation.
pub fn chi_square_statistic(observed: &[f64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .filter(|(_, e)| **e > 0.0)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum()
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation
    const COF: [f64; 6] = [
        76.180_091_729_471_46,
        -86.505_320_329_416_77,
        24.014_098_240_830_91,
        -1.231_739_572_450_155,
        0.120_865_097_386_617_9e-2,
        -0.539_523_938_495_3e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000_000_000_190_015;
    for c in COF {
        y += 1.0;
        ser += c / y;
    }
    -tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// Regularized lower incomplete gamma, by series or continued fraction.
pub fn regularized_gamma_lower(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        // series expansion
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..500 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-15 {
                break;
            }
        }
        (sum.ln() + a * x.ln() - x - ln_gamma(a)).exp()
    } else {
        // continued fraction for the upper tail (modified Lentz)
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-15 {
                break;
            }
        }
        let upper = (a * x.ln() - x - ln_gamma(a)).exp() * h;
        1.0 - upper
    }
}

/// Upper quantile of the chi-square distribution: the threshold that a
/// statistic with `df` degrees of freedom exceeds with probability
/// `alpha`.
pub fn chi_square_quantile_upper(df: usize, alpha: f64) -> f64 {
    let a = df as f64 / 2.0;
    let target = 1.0 - alpha;
    let mut lo = 0.0f64;
    let mut hi = 10.0 * df as f64 + 100.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if regularized_gamma_lower(a, mid / 2.0) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn critical_exchange() -> OffspringLaw {
        OffspringLaw::from_parts(
            2,
            &[&[(&[0, 0], "1/2"), (&[0, 2], "1/2")], &[(&[0, 0], "1/2"), (&[2, 0], "1/2")]],
        )
        .unwrap()
    }

    #[test]
    fn childless_law_reproduces_roots() {
        let law = OffspringLaw::from_parts(2, &[&[(&[0, 0], "1")], &[(&[0, 0], "1")]]).unwrap();
        match simulate_forest(&law, &[2, 1, 1], 7, SimCaps::default()).unwrap() {
            SimOutcome::Forest(f) => {
                assert_eq!(f.len(), 3);
                assert_eq!(f.root_colors(), vec![2, 1, 1]);
            }
            SimOutcome::Truncated { .. } => panic!("no births, no truncation"),
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let law = critical_exchange();
        let a = simulate_forest(&law, &[1], 42, SimCaps::default()).unwrap();
        let b = simulate_forest(&law, &[1], 42, SimCaps::default()).unwrap();
        match (a, b) {
            (SimOutcome::Forest(fa), SimOutcome::Forest(fb)) => assert_eq!(fa, fb),
            (SimOutcome::Truncated { vertices: va }, SimOutcome::Truncated { vertices: vb }) => {
                assert_eq!(va, vb)
            }
            _ => panic!("outcomes diverged under the same seed"),
        }
    }

    #[test]
    fn truncation_reported() {
        let law = critical_exchange();
        let sim = Simulator::new(&law).unwrap();
        let mut rng = SplitMix64::new(5);
        let caps = SimCaps { max_vertices: 3 };
        let mut saw_truncation = false;
        for _ in 0..200 {
            if let SimOutcome::Truncated { vertices } = sim.sample(&[1], caps, &mut rng).unwrap() {
                assert!(vertices > 3);
                saw_truncation = true;
            }
        }
        assert!(saw_truncation);
    }

    #[test]
    fn rejects_unsafe_laws() {
        let supercritical = OffspringLaw::from_parts(1, &[&[(&[0], "1/4"), (&[2], "3/4")]]).unwrap();
        assert!(Simulator::new(&supercritical).is_err());
        let degenerate =
            OffspringLaw::from_parts(2, &[&[(&[0, 1], "1")], &[(&[1, 0], "1")]]).unwrap();
        assert!(Simulator::new(&degenerate).is_err());
    }

    #[test]
    fn chi_square_quantiles_match_tables() {
        let cases = [(1usize, 10.828), (2, 13.816), (5, 20.515)];
        for (df, expected) in cases {
            let q = chi_square_quantile_upper(df, 1e-3);
            assert!((q - expected).abs() / expected < 1e-3, "df={df}: {q} vs {expected}");
        }
    }

    #[test]
    fn gamma_lower_sane() {
        // P(1, x) = 1 - exp(-x)
        for x in [0.1f64, 1.0, 3.0] {
            let p = regularized_gamma_lower(1.0, x);
            assert!((p - (1.0 - (-x).exp())).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_frequency_of_smallest_forest() {
        // under the exchange law, a single type-1 root is childless with
        // probability 1/2
        let law = critical_exchange();
        let sim = Simulator::new(&law).unwrap();
        let caps = SimCaps { max_vertices: 10_000 };
        let n = 20_000usize;
        let mut singletons = 0usize;
        for rep in 0..n {
            let mut rng = SplitMix64::stream(99, rep as u64);
            if let SimOutcome::Forest(f) = sim.sample(&[1], caps, &mut rng).unwrap() {
                if f.len() == 1 {
                    singletons += 1;
                }
            }
        }
        let freq = singletons as f64 / n as f64;
        let sigma = (0.5 * 0.5 / n as f64).sqrt();
        assert!((freq - 0.5).abs() < 5.0 * sigma, "freq={freq}");
    }
}
