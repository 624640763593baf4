//! Divide-and-sort search for `max |Σ_i e^{jω_i} z_i|` over `ω ∈ u^N`.
//!
//! Writing `|s| = max_ψ Re{e^{-jψ} s}` swaps the two maximizations: for a
//! fixed auxiliary angle `ψ` every element independently picks the level
//! that brings `τ_i + ω_i` closest to `ψ`. That choice is piecewise constant
//! in `ψ` and changes only at the `L` switch points of each element, so the
//! circle splits into at most `L·N` arcs and one of the arc configurations is
//! a global optimizer.
//!
//! Folding every angle into `[0, Ω)` makes the switch points of all elements
//! repeat with period `Ω`, so a single sort of the folded angles orders all
//! `L·N` of them. Walking the arcs in that order changes exactly one element
//! by one level per step, and the objective is updated in O(1).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::{
    canonicalize, circular_distance, weighted_sum, wrap_angle, Method, PhaseConfig,
    QuantizationScheme, RankOneObjective, Solution,
};

/// Minimum sweep steps between full recomputations of the running sum.
/// The actual interval is `max(RESYNC_INTERVAL, N)`, which keeps the resync
/// cost at `O(L N)` over a whole sweep.
pub const RESYNC_INTERVAL: usize = 1024;

/// The level `k` that brings `τ + kΩ` circularly closest to `ψ`.
/// An exact tie (distance `Ω/2` to both neighbours) goes to the smaller index.
pub fn subproblem_best(tau: f64, psi: f64, scheme: QuantizationScheme) -> u32 {
    let x = wrap_angle(psi - tau) / scheme.step();
    let lo = scheme.wrap(x.floor() as i64);
    let hi = scheme.wrap(lo as i64 + 1);
    let d_lo = circular_distance(psi, tau + scheme.phase(lo));
    let d_hi = circular_distance(psi, tau + scheme.phase(hi));
    if d_lo < d_hi || (d_lo == d_hi && lo < hi) {
        lo
    } else {
        hi
    }
}

/// Sorted folded angles of the active (nonzero) entries of an objective.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionCoder {
    scheme: QuantizationScheme,
    /// `τ_i mod Ω` for every entry (0 for zero-magnitude entries).
    folded: Vec<f64>,
    /// Level of each entry on the arc just below the first switch point:
    /// `-⌊τ_i / Ω⌋ mod L`, so that `τ_i + ω_i ≡ τ̄_i`.
    base: Vec<u32>,
    /// Active entries sorted by folded angle, ties by original index.
    order: Vec<usize>,
}

impl PartitionCoder {
    pub fn scheme(&self) -> QuantizationScheme {
        self.scheme
    }

    pub fn folded(&self) -> &[f64] {
        &self.folded
    }

    /// The sorting permutation over active entries (0-based).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn base_levels(&self) -> &[u32] {
        &self.base
    }

    /// Number of candidates the sweep produces.
    pub fn candidate_count(&self) -> usize {
        (self.scheme.levels() as usize * self.order.len()).max(1)
    }

    /// Switch points of `ψ`, increasing, over one turn starting at `Ω/2`.
    /// Step `t ≥ 1` of the sweep happens when `ψ` crosses the `t`-th point.
    pub fn boundaries(&self) -> Vec<f64> {
        let step = self.scheme.step();
        (0..self.scheme.levels())
            .flat_map(|m| {
                self.order
                    .iter()
                    .map(move |&i| step / 2.0 + self.folded[i] + m as f64 * step)
            })
            .collect()
    }

    /// Levels after `t` sweep steps.
    pub fn levels_at(&self, t: usize) -> Vec<u32> {
        let mut levels = self.base.clone();
        let n = self.order.len();
        if n == 0 {
            return levels;
        }
        let (full, rem) = (t / n, t % n);
        for (p, &i) in self.order.iter().enumerate() {
            let adv = full + usize::from(p < rem);
            levels[i] = self.scheme.wrap(levels[i] as i64 + adv as i64);
        }
        levels
    }
}

pub fn build_coder(obj: &RankOneObjective, scheme: QuantizationScheme) -> PartitionCoder {
    let step = scheme.step();
    let n = obj.len();
    let mut folded = vec![0.0; n];
    let mut base = vec![0u32; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for (i, (&tau, &mag)) in obj.angles().iter().zip(obj.magnitudes()).enumerate() {
        if mag == 0.0 {
            continue;
        }
        let mut q = (tau / step).floor() as i64;
        let mut rem = tau - q as f64 * step;
        if rem < 0.0 {
            q -= 1;
            rem += step;
        } else if rem >= step {
            q += 1;
            rem -= step;
        }
        folded[i] = rem.clamp(0.0, step);
        base[i] = scheme.wrap(-q);
        order.push(i);
    }
    let mut keyed: Vec<(f64, usize)> = order.iter().map(|&i| (folded[i], i)).collect();
    keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let order = keyed.into_iter().map(|(_, i)| i).collect();
    PartitionCoder {
        scheme,
        folded,
        base,
        order,
    }
}

/// The `L·N` arc configurations, stored implicitly through the coder.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    coder: PartitionCoder,
    values: Vec<f64>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Objective values from the incremental sweep, in sweep order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn config(&self, t: usize) -> PhaseConfig {
        assert!(t < self.values.len(), "candidate {t} out of range");
        PhaseConfig::from_valid(self.coder.levels_at(t), self.coder.scheme)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PhaseConfig, f64)> + '_ {
        (0..self.len()).map(|t| (self.config(t), self.values[t]))
    }

    pub fn coder(&self) -> &PartitionCoder {
        &self.coder
    }

    /// Index of the first candidate with the largest value.
    pub fn best(&self) -> usize {
        let mut best = 0;
        for (t, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = t;
            }
        }
        best
    }
}

/// Runs the sweep, calling `visit(step, |sum|²)` for every candidate.
fn sweep(obj: &RankOneObjective, coder: &PartitionCoder, mut visit: impl FnMut(usize, f64)) {
    let phasors = coder.scheme.phasors();
    let mask = coder.scheme.levels() - 1;
    let z = obj.z();
    let mut sum = weighted_sum(z, &coder.base, &phasors);
    visit(0, sum.norm_sqr());

    // Entries permuted into sweep order so the loop reads memory sequentially.
    let zs: Vec<Complex64> = coder.order.iter().map(|&i| z[i]).collect();
    let mut ks: Vec<u32> = coder.order.iter().map(|&i| coder.base[i]).collect();
    // Entries outside the sweep never move; their contribution is constant.
    let fixed = sum - weighted_sum(&zs, &ks, &phasors);
    let n = zs.len();
    let total = coder.candidate_count();
    let resync = RESYNC_INTERVAL.max(n);
    let mut pos = 0;
    for t in 1..total {
        let k = ks[pos];
        let k1 = (k + 1) & mask;
        sum += zs[pos] * (phasors[k1 as usize] - phasors[k as usize]);
        ks[pos] = k1;
        pos += 1;
        if pos == n {
            pos = 0;
        }
        if t % resync == 0 {
            sum = weighted_sum(&zs, &ks, &phasors) + fixed;
        }
        visit(t, sum.norm_sqr());
    }
}

pub fn enumerate_candidates(obj: &RankOneObjective, scheme: QuantizationScheme) -> CandidateSet {
    let coder = build_coder(obj, scheme);
    let mut values = Vec::with_capacity(coder.candidate_count());
    sweep(obj, &coder, |_, v| values.push(v.sqrt()));
    CandidateSet { coder, values }
}

/// Globally optimal discrete configuration for `|w^H z|` with `B`-bit phases.
pub fn solve_das(obj: &RankOneObjective, scheme: QuantizationScheme) -> Result<Solution> {
    if obj.is_empty() {
        return Err(Error::Empty("objective"));
    }
    let coder = build_coder(obj, scheme);
    let mut best = (0usize, f64::NEG_INFINITY);
    sweep(obj, &coder, |t, v| {
        if v > best.1 {
            best = (t, v);
        }
    });
    let mut levels = coder.levels_at(best.0);
    canonicalize(obj, &mut levels, scheme);
    Ok(Solution::evaluated(
        obj,
        PhaseConfig::from_valid(levels, scheme),
        coder.candidate_count(),
        Method::Das,
    ))
}

/// Optimal 1-bit configuration using `N` prefix-sign candidates.
///
/// Angles are folded into `[0, π)`, remembering which entries were flipped.
/// In sorted order the optimal signs for the folded vector are `+1` on a
/// prefix and `−1` on the rest; flipped entries get their sign negated back.
pub fn solve_binary(obj: &RankOneObjective) -> Result<Solution> {
    if obj.is_empty() {
        return Err(Error::Empty("objective"));
    }
    let scheme = QuantizationScheme::new(1)?;
    let z = obj.z();
    let mut folded = Vec::new();
    // +1 for τ ∈ [0, π), −1 for τ ∈ [π, 2π).
    let mut sign = vec![1.0f64; z.len()];
    for (i, (&tau, &mag)) in obj.angles().iter().zip(obj.magnitudes()).enumerate() {
        if mag == 0.0 {
            continue;
        }
        if tau >= PI {
            sign[i] = -1.0;
            folded.push((tau - PI, i));
        } else {
            folded.push((tau, i));
        }
    }
    folded.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let active = folded.len();
    let mut levels = vec![0u32; z.len()];
    if active > 0 {
        // Candidate 0 (every folded sign −1) is the global flip of candidate N.
        let mut sum = Complex64::new(0.0, 0.0);
        for &(_, i) in &folded {
            sum -= z[i] * sign[i];
        }
        let mut best = (0usize, f64::NEG_INFINITY);
        for (p, &(_, i)) in folded.iter().enumerate() {
            sum += z[i] * (2.0 * sign[i]);
            let v = sum.norm_sqr();
            if v > best.1 {
                best = (p + 1, v);
            }
        }
        for (p, &(_, i)) in folded.iter().enumerate() {
            let folded_sign = if p < best.0 { 1.0 } else { -1.0 };
            levels[i] = u32::from(folded_sign * sign[i] < 0.0);
        }
    }
    canonicalize(obj, &mut levels, scheme);
    Ok(Solution::evaluated(
        obj,
        PhaseConfig::from_valid(levels, scheme),
        active.max(1),
        Method::Binary,
    ))
}
