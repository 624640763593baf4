//! Domain types shared by every solver: the phase quantization scheme,
//! discrete phase configurations, the rank-one objective `|w^H z|` and
//! solver results.
//!
//! Convention: for a configuration with phases `ω_i`, the objective is
//! `|Σ_i e^{jω_i} z_i|`. Data written with the opposite sign convention
//! must be conjugated before it reaches this module.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnitudes below this are treated as exactly zero (no defined angle).
pub const ZERO_MAGNITUDE: f64 = 1e-300;

/// Largest supported number of control bits per cell.
pub const MAX_BITS: u32 = 16;

/// Uniform `B`-bit phase quantizer: levels `{0, Ω, …, (2^B − 1)Ω}` with `Ω = 2π / 2^B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SchemeRepr", into = "SchemeRepr")]
pub struct QuantizationScheme {
    bits: u32,
    levels: u32,
    step: f64,
}

#[derive(Serialize, Deserialize)]
struct SchemeRepr {
    bits: u32,
}

impl TryFrom<SchemeRepr> for QuantizationScheme {
    type Error = Error;
    fn try_from(r: SchemeRepr) -> Result<Self> {
        QuantizationScheme::new(r.bits)
    }
}

impl From<QuantizationScheme> for SchemeRepr {
    fn from(s: QuantizationScheme) -> Self {
        SchemeRepr { bits: s.bits }
    }
}

impl QuantizationScheme {
    pub fn new(bits: u32) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::UnsupportedScheme(format!(
                "bits must be in 1..={MAX_BITS}, got {bits}"
            )));
        }
        let levels = 1u32 << bits;
        Ok(Self {
            bits,
            levels,
            step: TAU / levels as f64,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// Angular spacing `Ω` between adjacent levels, in radians.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn phase(&self, level: u32) -> f64 {
        level as f64 * self.step
    }

    /// `(k + delta) mod L` for any signed delta.
    pub fn wrap(&self, level: i64) -> u32 {
        level.rem_euclid(self.levels as i64) as u32
    }

    /// Unit phasors `e^{jkΩ}` for every level. Multiples of `π/2` are exact.
    pub fn phasors(&self) -> Vec<Complex64> {
        let l = self.levels;
        (0..l)
            .map(|k| {
                // k/L of a full turn; quarter turns land on exact axis points.
                if (4 * k) % l == 0 {
                    match 4 * k / l {
                        0 => Complex64::new(1.0, 0.0),
                        1 => Complex64::new(0.0, 1.0),
                        2 => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(0.0, -1.0),
                    }
                } else {
                    Complex64::from_polar(1.0, self.phase(k))
                }
            })
            .collect()
    }
}

/// A discrete phase configuration stored as level indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ConfigRepr", into = "ConfigRepr")]
pub struct PhaseConfig {
    indices: Vec<u32>,
    bits: u32,
}

#[derive(Serialize, Deserialize)]
struct ConfigRepr {
    bits: u32,
    indices: Vec<u32>,
}

impl TryFrom<ConfigRepr> for PhaseConfig {
    type Error = Error;
    fn try_from(r: ConfigRepr) -> Result<Self> {
        PhaseConfig::new(r.indices, QuantizationScheme::new(r.bits)?)
    }
}

impl From<PhaseConfig> for ConfigRepr {
    fn from(c: PhaseConfig) -> Self {
        ConfigRepr {
            bits: c.bits,
            indices: c.indices,
        }
    }
}

impl PhaseConfig {
    pub fn new(indices: Vec<u32>, scheme: QuantizationScheme) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("phase configuration"));
        }
        if let Some((i, &k)) = indices
            .iter()
            .enumerate()
            .find(|(_, &k)| k >= scheme.levels())
        {
            return Err(Error::Domain(format!(
                "index {k} at position {i} is not a level of a {}-bit scheme",
                scheme.bits()
            )));
        }
        Ok(Self {
            indices,
            bits: scheme.bits(),
        })
    }

    pub fn zeros(n: usize, scheme: QuantizationScheme) -> Result<Self> {
        Self::new(vec![0; n], scheme)
    }

    pub(crate) fn from_valid(indices: Vec<u32>, scheme: QuantizationScheme) -> Self {
        debug_assert!(!indices.is_empty());
        debug_assert!(indices.iter().all(|&k| k < scheme.levels()));
        Self {
            indices,
            bits: scheme.bits(),
        }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn scheme(&self) -> QuantizationScheme {
        QuantizationScheme::new(self.bits).expect("validated at construction")
    }

    /// Phases `ω_i = k_i Ω` in radians.
    pub fn phases(&self) -> Vec<f64> {
        let s = self.scheme();
        self.indices.iter().map(|&k| s.phase(k)).collect()
    }

    /// The same configuration with every index advanced by `offset` levels.
    pub fn shifted(&self, offset: i64) -> Self {
        let s = self.scheme();
        let indices = self
            .indices
            .iter()
            .map(|&k| s.wrap(k as i64 + offset))
            .collect();
        Self::from_valid(indices, s)
    }
}

impl fmt::Display for PhaseConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, k) in self.indices.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, "]")
    }
}

/// The vector `z` of the objective `|w^H z|` together with its polar form.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneObjective {
    z: Vec<Complex64>,
    magnitudes: Vec<f64>,
    angles: Vec<f64>,
    augmented: bool,
}

impl RankOneObjective {
    pub fn new(z: Vec<Complex64>) -> Result<Self> {
        Self::build(z, false)
    }

    /// An objective whose last slot is the direct link (see [`crate::reduce::homogenize`]).
    pub fn augmented(z: Vec<Complex64>) -> Result<Self> {
        if z.len() < 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: z.len(),
            });
        }
        Self::build(z, true)
    }

    fn build(z: Vec<Complex64>, augmented: bool) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::Empty("objective vector"));
        }
        if let Some(i) = z
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::Domain(format!("entry {i} is not finite")));
        }
        let mut magnitudes = Vec::with_capacity(z.len());
        let mut angles = Vec::with_capacity(z.len());
        for c in &z {
            let m = c.norm();
            if m < ZERO_MAGNITUDE {
                magnitudes.push(0.0);
                angles.push(0.0);
            } else {
                magnitudes.push(m);
                angles.push(wrap_angle(c.im.atan2(c.re)));
            }
        }
        Ok(Self {
            z,
            magnitudes,
            angles,
            augmented,
        })
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    /// Angles `τ_i ∈ [0, 2π)`; zero-magnitude entries carry 0.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn is_augmented(&self) -> bool {
        self.augmented
    }

    /// `e^{jθ} z`, keeping the augmentation flag.
    pub fn rotated(&self, theta: f64) -> Self {
        let r = Complex64::from_polar(1.0, theta);
        Self::build(self.z.iter().map(|c| c * r).collect(), self.augmented)
            .expect("rotation preserves finiteness")
    }
}

/// Maps any finite angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Shortest angular distance between two angles, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Das,
    Binary,
    Exhaustive,
    BranchAndBound,
    QuantizedAlignment,
    Random,
    AllZeros,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Das => "das",
            Method::Binary => "binary",
            Method::Exhaustive => "exhaustive",
            Method::BranchAndBound => "branch_and_bound",
            Method::QuantizedAlignment => "quantized_alignment",
            Method::Random => "random",
            Method::AllZeros => "all_zeros",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub config: PhaseConfig,
    /// Achieved `|w^H z|`.
    pub value: f64,
    pub candidate_count: usize,
    pub method: Method,
    /// True when solved against a direct-link-augmented objective.
    #[serde(default)]
    pub augmented: bool,
}

impl Solution {
    pub(crate) fn evaluated(
        obj: &RankOneObjective,
        config: PhaseConfig,
        candidate_count: usize,
        method: Method,
    ) -> Self {
        let value =
            evaluate(obj, &config).expect("solver produced a config matching its objective");
        Self {
            config,
            value,
            candidate_count,
            method,
            augmented: obj.is_augmented(),
        }
    }
}

/// Neumaier-compensated accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, v.re);
        neumaier(&mut self.im, &mut self.im_c, v.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

pub(crate) fn weighted_sum(z: &[Complex64], levels: &[u32], phasors: &[Complex64]) -> Complex64 {
    let mut acc = CompensatedSum::default();
    for (zi, &k) in z.iter().zip(levels) {
        acc.add(zi * phasors[k as usize]);
    }
    acc.value()
}

/// `Σ_i e^{jω_i} z_i` for the given configuration.
pub fn inner_product(obj: &RankOneObjective, cfg: &PhaseConfig) -> Result<Complex64> {
    if obj.len() != cfg.len() {
        return Err(Error::Dimension {
            expected: obj.len(),
            got: cfg.len(),
        });
    }
    let scheme = cfg.scheme();
    Ok(weighted_sum(obj.z(), cfg.indices(), &scheme.phasors()))
}

/// `|Σ_i |z_i| e^{j(τ_i + ω_i)}|`, the objective value of `cfg`.
pub fn evaluate(obj: &RankOneObjective, cfg: &PhaseConfig) -> Result<f64> {
    inner_product(obj, cfg).map(|s| s.norm())
}

/// `Σ_i |z_i|`: the optimum over continuous phases, an upper bound for every discrete configuration.
pub fn continuous_bound(obj: &RankOneObjective) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &m in obj.magnitudes() {
        neumaier(&mut sum, &mut comp, m);
    }
    sum + comp
}

/// Shifts `levels` so the first nonzero-magnitude entry sits at level 0.
/// Zero-magnitude entries are left at level 0.
pub(crate) fn canonicalize(obj: &RankOneObjective, levels: &mut [u32], scheme: QuantizationScheme) {
    let mags = obj.magnitudes();
    let Some(first) = mags.iter().position(|&m| m > 0.0) else {
        levels.iter_mut().for_each(|k| *k = 0);
        return;
    };
    let offset = levels[first] as i64;
    for (k, &m) in levels.iter_mut().zip(mags) {
        *k = if m > 0.0 {
            scheme.wrap(*k as i64 - offset)
        } else {
            0
        };
    }
}
