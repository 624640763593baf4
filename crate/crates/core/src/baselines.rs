//! Reference solvers: exact oracles, the round-the-continuous-solution
//! heuristic, and fixed codebooks.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::rng_from_seed;
use crate::das::subproblem_best;
use crate::error::{Error, Result};
use crate::types::{
    continuous_bound, evaluate, weighted_sum, Method, PhaseConfig, QuantizationScheme,
    RankOneObjective, Solution,
};

/// Largest `L^N` the exhaustive oracle accepts.
pub const EXHAUSTIVE_CAP: u64 = 1 << 24;

const RESYNC_INTERVAL: u64 = 1024;
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Exhaustive,
    QuantizedAlignment,
    Random(u64),
    AllZeros,
}

/// Number of configurations in `u^N`, as a float so huge values do not overflow.
pub fn search_space(n: usize, scheme: QuantizationScheme) -> f64 {
    (scheme.levels() as f64).powi(n as i32)
}

pub fn exhaustive_admits(n: usize, scheme: QuantizationScheme) -> bool {
    search_space(n, scheme) <= EXHAUSTIVE_CAP as f64
}

/// Global optimum by full enumeration of `u^N`.
///
/// Every configuration has a global shift with first index 0 and the same
/// value, so only those `L^{N-1}` are visited, in reflected Gray order (one
/// digit changes by ±1 per step). Among optimal configurations the
/// lexicographically smallest is returned.
pub fn exhaustive(obj: &RankOneObjective, scheme: QuantizationScheme) -> Result<Solution> {
    let n = obj.len();
    if n == 0 {
        return Err(Error::Empty("objective"));
    }
    if !exhaustive_admits(n, scheme) {
        return Err(Error::BudgetExceeded {
            required: search_space(n, scheme),
            cap: EXHAUSTIVE_CAP,
        });
    }
    let l = scheme.levels();
    let z = obj.z();
    let phasors = scheme.phasors();

    let mut levels = vec![0u32; n];
    let mut dir = vec![1i8; n];
    let mut sum = weighted_sum(z, &levels, &phasors);
    let mut best_v = sum.norm_sqr();
    let mut best = levels.clone();
    let mut visited: u64 = 1;

    loop {
        // Advance the lowest movable digit (entry 0 stays fixed).
        let mut j = n - 1;
        loop {
            if j == 0 {
                break;
            }
            let next = levels[j] as i64 + dir[j] as i64;
            if next >= 0 && next < l as i64 {
                break;
            }
            dir[j] = -dir[j];
            j -= 1;
        }
        if j == 0 {
            break;
        }
        let k = levels[j];
        let k1 = (k as i64 + dir[j] as i64) as u32;
        sum += z[j] * (phasors[k1 as usize] - phasors[k as usize]);
        levels[j] = k1;
        visited += 1;
        if visited.is_multiple_of(RESYNC_INTERVAL) {
            sum = weighted_sum(z, &levels, &phasors);
        }

        let v = sum.norm_sqr();
        if v > best_v * (1.0 + TIE_TOLERANCE) {
            best_v = v;
            best.copy_from_slice(&levels);
        } else if v >= best_v * (1.0 - TIE_TOLERANCE) && levels < best {
            best_v = best_v.max(v);
            best.copy_from_slice(&levels);
        }
    }
    Ok(Solution::evaluated(
        obj,
        PhaseConfig::from_valid(best, scheme),
        visited as usize,
        Method::Exhaustive,
    ))
}

/// Exact optimum by depth-first search with the continuous bound
/// `|partial sum| + Σ_{remaining} |z_i|`.
///
/// Intended as a ground truth beyond the exhaustive cap; worst case is still
/// exponential. Entries are visited by decreasing magnitude and the largest
/// one is pinned to level 0 (global shift symmetry).
pub fn branch_and_bound(obj: &RankOneObjective, scheme: QuantizationScheme) -> Result<Solution> {
    let n = obj.len();
    if n == 0 {
        return Err(Error::Empty("objective"));
    }
    let mags = obj.magnitudes();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]).then(a.cmp(&b)));
    let mut tail = vec![0.0; n + 1];
    for d in (0..n).rev() {
        tail[d] = tail[d + 1] + mags[order[d]];
    }

    let incumbent = quantized_alignment(obj, scheme);
    let mut search = Bnb {
        z: obj.z(),
        angles: obj.angles(),
        order: &order,
        tail: &tail,
        scheme,
        phasors: scheme.phasors(),
        levels: vec![0u32; n],
        best_value: incumbent.value,
        best: incumbent.config.indices().to_vec(),
        nodes: 0,
    };
    let first = order[0];
    search.levels[first] = 0;
    search.descend(1, obj.z()[first]);

    let nodes = search.nodes;
    let cfg = PhaseConfig::from_valid(search.best, scheme);
    Ok(Solution::evaluated(obj, cfg, nodes, Method::BranchAndBound))
}

struct Bnb<'a> {
    z: &'a [Complex64],
    angles: &'a [f64],
    order: &'a [usize],
    tail: &'a [f64],
    scheme: QuantizationScheme,
    phasors: Vec<Complex64>,
    levels: Vec<u32>,
    best_value: f64,
    best: Vec<u32>,
    nodes: usize,
}

impl Bnb<'_> {
    fn descend(&mut self, depth: usize, partial: Complex64) {
        self.nodes += 1;
        if depth == self.order.len() {
            let v = partial.norm();
            if v > self.best_value {
                self.best_value = v;
                self.best.copy_from_slice(&self.levels);
            }
            return;
        }
        if partial.norm() + self.tail[depth] <= self.best_value {
            return;
        }
        let i = self.order[depth];
        // Try levels nearest to the current partial direction first.
        let target = partial.im.atan2(partial.re);
        let start = subproblem_best(self.angles[i], target, self.scheme);
        let l = self.scheme.levels() as i64;
        for step in 0..l {
            // start, start+1, start-1, start+2, …
            let off = if step % 2 == 1 {
                (step + 1) / 2
            } else {
                -(step / 2)
            };
            let k = self.scheme.wrap(start as i64 + off);
            self.levels[i] = k;
            self.descend(depth + 1, partial + self.z[i] * self.phasors[k as usize]);
        }
        self.levels[i] = 0;
    }
}

/// Rounds the continuous optimum `ω_i = −τ_i` to the nearest level.
pub fn quantized_alignment(obj: &RankOneObjective, scheme: QuantizationScheme) -> Solution {
    let levels = obj
        .angles()
        .iter()
        .zip(obj.magnitudes())
        .map(|(&tau, &m)| {
            if m == 0.0 {
                0
            } else {
                subproblem_best(tau, 0.0, scheme)
            }
        })
        .collect();
    Solution::evaluated(
        obj,
        PhaseConfig::from_valid(levels, scheme),
        1,
        Method::QuantizedAlignment,
    )
}

/// Fixed codebooks. All-zeros follows the hardware convention where a
/// control bit of 0 applies phase `π` to every cell.
pub fn trivial_codebook(
    kind: BaselineKind,
    n: usize,
    scheme: QuantizationScheme,
) -> Result<PhaseConfig> {
    if n == 0 {
        return Err(Error::Empty("codebook length"));
    }
    match kind {
        BaselineKind::AllZeros => PhaseConfig::new(vec![scheme.levels() / 2; n], scheme),
        BaselineKind::Random(seed) => {
            let mut rng = rng_from_seed(seed);
            let idx = (0..n)
                .map(|_| rng.random_range(0..scheme.levels()))
                .collect();
            PhaseConfig::new(idx, scheme)
        }
        other => Err(Error::Misuse(match other {
            BaselineKind::Exhaustive => "exhaustive is a solver, not a fixed codebook",
            _ => "quantized alignment is a solver, not a fixed codebook",
        })),
    }
}

/// Evaluates a fixed codebook against an objective.
pub fn codebook_solution(
    obj: &RankOneObjective,
    kind: BaselineKind,
    scheme: QuantizationScheme,
) -> Result<Solution> {
    let cfg = trivial_codebook(kind, obj.len(), scheme)?;
    let method = match kind {
        BaselineKind::AllZeros => Method::AllZeros,
        _ => Method::Random,
    };
    let value = evaluate(obj, &cfg)?;
    Ok(Solution {
        config: cfg,
        value,
        candidate_count: 1,
        method,
        augmented: obj.is_augmented(),
    })
}

/// Gap to the continuous optimum, `20 log10(bound / value)` in dB.
pub fn gap_db(obj: &RankOneObjective, value: f64) -> f64 {
    20.0 * (continuous_bound(obj) / value).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::das::solve_das;
    use crate::types::circular_distance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn obj(z: Vec<Complex64>) -> RankOneObjective {
        RankOneObjective::new(z).unwrap()
    }

    fn scheme(b: u32) -> QuantizationScheme {
        QuantizationScheme::new(b).unwrap()
    }

    fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect()
    }

    /// Lexicographic odometer over all of u^N, no symmetry reduction.
    fn odometer(o: &RankOneObjective, s: QuantizationScheme) -> (f64, Vec<u32>) {
        let n = o.len();
        let mut idx = vec![0u32; n];
        let mut best = (-1.0, idx.clone());
        loop {
            let v = evaluate(o, &PhaseConfig::new(idx.clone(), s).unwrap()).unwrap();
            if v > best.0 * (1.0 + TIE_TOLERANCE) {
                best = (v, idx.clone());
            }
            let mut j = n;
            loop {
                if j == 0 {
                    return best;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < s.levels() {
                    break;
                }
                idx[j] = 0;
            }
        }
    }

    #[test]
    fn exhaustive_examples() {
        let sol = exhaustive(&obj(vec![c(1., 0.); 2]), scheme(1)).unwrap();
        assert_eq!(sol.value, 2.0);
        assert_eq!(sol.config.indices(), &[0, 0]);

        let o = obj(vec![
            c(1., 0.),
            Complex64::from_polar(1.0, TAU / 3.0),
            Complex64::from_polar(1.0, 2.0 * TAU / 3.0),
        ]);
        let sol = exhaustive(&o, scheme(1)).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-12);
        // Optima with first index 0: [0,0,1], [0,1,0], [0,1,1].
        assert_eq!(sol.config.indices(), &[0, 0, 1]);
    }

    #[test]
    fn exhaustive_refuses_over_cap() {
        let o = obj(vec![c(1., 0.); 13]);
        match exhaustive(&o, scheme(2)) {
            Err(Error::BudgetExceeded { cap, .. }) => assert_eq!(cap, EXHAUSTIVE_CAP),
            other => panic!("expected refusal, got {other:?}"),
        }
        assert!(exhaustive_admits(12, scheme(2)));
        assert!(exhaustive_admits(8, scheme(3)));
        assert!(!exhaustive_admits(9, scheme(3)));
    }

    #[test]
    fn exhaustive_matches_plain_odometer() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let n = rng.random_range(1..6);
            let s = scheme(rng.random_range(1..4));
            let o = obj(gaussian(&mut rng, n));
            let sol = exhaustive(&o, s).unwrap();
            let (v, cfg) = odometer(&o, s);
            assert!((sol.value - v).abs() <= 1e-12 * v);
            assert_eq!(sol.config.indices(), cfg.as_slice());
            assert_eq!(sol.candidate_count as f64, search_space(n - 1, s));
        }
    }

    #[test]
    fn exhaustive_agrees_with_das() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let n = rng.random_range(1..9);
            let s = scheme(rng.random_range(1..3));
            let o = obj(gaussian(&mut rng, n));
            let a = exhaustive(&o, s).unwrap().value;
            let b = solve_das(&o, s).unwrap().value;
            assert!((a - b).abs() <= 1e-9 * a);
        }
    }

    #[test]
    fn branch_and_bound_matches_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let n = rng.random_range(1..9);
            let s = scheme(rng.random_range(1..4));
            let o = obj(gaussian(&mut rng, n));
            let a = exhaustive(&o, s).unwrap().value;
            let b = branch_and_bound(&o, s).unwrap().value;
            assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn quantized_alignment_examples() {
        let o = obj(vec![
            Complex64::from_polar(1.0, PI / 4.0),
            Complex64::from_polar(1.0, -PI / 4.0),
        ]);
        let sol = quantized_alignment(&o, scheme(1));
        assert_eq!(sol.config.indices(), &[0, 0]);
        assert!((sol.value - 2f64.sqrt()).abs() < 1e-12);

        // All τ_i on the grid: rounding is exact and optimal.
        let s = scheme(2);
        let o = obj(vec![c(1., 0.), c(0., 2.), c(-0.5, 0.), c(0., -1.)]);
        let qa = quantized_alignment(&o, s);
        assert!((qa.value - solve_das(&o, s).unwrap().value).abs() < 1e-12);
        assert!((qa.value - 4.5).abs() < 1e-12);
    }

    #[test]
    fn quantized_alignment_rounding_error_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let s = scheme(rng.random_range(1..6));
            let o = obj(gaussian(&mut rng, 20));
            let sol = quantized_alignment(&o, s);
            for (tau, &k) in o.angles().iter().zip(sol.config.indices()) {
                assert!(circular_distance(tau + s.phase(k), 0.0) <= s.step() / 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn quantized_alignment_dominated_by_das() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let mut strict = 0;
        for _ in 0..500 {
            let o = obj(gaussian(&mut rng, 50));
            let das = solve_das(&o, scheme(1)).unwrap().value;
            let qa = quantized_alignment(&o, scheme(1)).value;
            assert!(qa <= das * (1.0 + 1e-12));
            if qa < das * (1.0 - 1e-12) {
                strict += 1;
            }
        }
        assert!(strict >= 50, "strictly better in only {strict}/500");
    }

    #[test]
    fn codebooks() {
        let zeros = trivial_codebook(BaselineKind::AllZeros, 3, scheme(1)).unwrap();
        assert_eq!(zeros.phases(), vec![PI; 3]);
        let zeros2 = trivial_codebook(BaselineKind::AllZeros, 3, scheme(2)).unwrap();
        assert_eq!(zeros2.phases(), vec![PI; 3]);

        let a = trivial_codebook(BaselineKind::Random(5), 50, scheme(2)).unwrap();
        let b = trivial_codebook(BaselineKind::Random(5), 50, scheme(2)).unwrap();
        assert_eq!(a, b);
        assert!(trivial_codebook(BaselineKind::Exhaustive, 3, scheme(1)).is_err());
    }

    #[test]
    fn random_codebook_is_uniform() {
        let n = 10_000;
        let cfg = trivial_codebook(BaselineKind::Random(42), n, scheme(2)).unwrap();
        let mut hist = [0usize; 4];
        for &k in cfg.indices() {
            hist[k as usize] += 1;
        }
        let expect = n as f64 / 4.0;
        for h in hist {
            assert!((h as f64 / expect - 1.0).abs() < 0.05, "{hist:?}");
        }
        // chi-square with 3 dof; 16.27 is the 0.1% critical value
        let chi2: f64 = hist
            .iter()
            .map(|&h| (h as f64 - expect).powi(2) / expect)
            .sum();
        assert!(chi2 < 16.27, "chi2 = {chi2}");
    }
}
