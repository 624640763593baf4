//! Reduction of channel models to a [`RankOneObjective`].
//!
//! The received amplitude `h_r^H W h_s + h_d` becomes `w^H φ + h_d` with
//! `φ = diag(h_r^H) h_s`. Appending `h_d` to `φ` and a fixed unit slot to `w`
//! homogenizes the problem; the optimizer of the augmented problem is mapped
//! back by dividing out the last phase, which for a cyclic level set is a
//! plain index subtraction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{PhaseConfig, RankOneObjective, Solution};

/// Second-to-first eigenvalue ratio above which a matrix is not rank one.
pub const RANK_ONE_TOLERANCE: f64 = 1e-9;

const POWER_ITERATIONS: usize = 200;
const RAYLEIGH_TOLERANCE: f64 = 1e-14;

/// BS→RIS channel `h_s`, RIS→user channel `h_r` and the direct link `h_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadedChannel {
    pub h_s: Vec<Complex64>,
    pub h_r: Vec<Complex64>,
    pub h_d: Complex64,
}

impl CascadedChannel {
    pub fn new(h_s: Vec<Complex64>, h_r: Vec<Complex64>, h_d: Complex64) -> Result<Self> {
        let ch = Self { h_s, h_r, h_d };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_s.len() != self.h_r.len() {
            return Err(Error::Dimension {
                expected: self.h_s.len(),
                got: self.h_r.len(),
            });
        }
        if self.h_s.is_empty() {
            return Err(Error::Empty("cascaded channel"));
        }
        let finite = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
        if !(self.h_s.iter().all(finite) && self.h_r.iter().all(finite) && finite(&self.h_d)) {
            return Err(Error::Domain("channel entries must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.h_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_s.is_empty()
    }

    /// The objective for this channel: augmented with `h_d` when it is nonzero.
    pub fn objective(&self) -> Result<RankOneObjective> {
        let phi = build_phi(self)?;
        if self.h_d == Complex64::new(0.0, 0.0) {
            RankOneObjective::new(phi)
        } else {
            homogenize(&phi, self.h_d)
        }
    }

    /// Received amplitude `Σ_i e^{jω_i} conj(h_r,i) h_s,i + h_d`.
    pub fn received(&self, cfg: &PhaseConfig) -> Result<Complex64> {
        let phi = build_phi(self)?;
        let obj = RankOneObjective::new(phi)?;
        Ok(crate::types::inner_product(&obj, cfg)? + self.h_d)
    }
}

/// `φ_i = conj(h_r,i) · h_s,i`.
pub fn build_phi(ch: &CascadedChannel) -> Result<Vec<Complex64>> {
    if ch.h_s.len() != ch.h_r.len() {
        return Err(Error::Dimension {
            expected: ch.h_s.len(),
            got: ch.h_r.len(),
        });
    }
    Ok(ch
        .h_r
        .iter()
        .zip(&ch.h_s)
        .map(|(r, s)| r.conj() * s)
        .collect())
}

/// `[φ; h_d]` as an augmented objective over `N + 1` slots.
pub fn homogenize(phi: &[Complex64], h_d: Complex64) -> Result<RankOneObjective> {
    if phi.is_empty() {
        return Err(Error::Empty("phi"));
    }
    let mut z = Vec::with_capacity(phi.len() + 1);
    z.extend_from_slice(phi);
    z.push(h_d);
    RankOneObjective::augmented(z)
}

/// Maps a solution of the augmented problem back to the `N` RIS cells:
/// `k_i ← (k_i − k_{N+1}) mod L`.
pub fn dehomogenize(sol: &Solution) -> Result<Solution> {
    if !sol.augmented {
        return Err(Error::Misuse(
            "dehomogenize needs a solution of an augmented objective",
        ));
    }
    let idx = sol.config.indices();
    if idx.len() < 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: idx.len(),
        });
    }
    let scheme = sol.config.scheme();
    let last = idx[idx.len() - 1] as i64;
    let indices = idx[..idx.len() - 1]
        .iter()
        .map(|&k| scheme.wrap(k as i64 - last))
        .collect();
    Ok(Solution {
        config: PhaseConfig::new(indices, scheme)?,
        value: sol.value,
        candidate_count: sol.candidate_count,
        method: sol.method,
        augmented: false,
    })
}

/// A Hermitian positive semidefinite matrix of rank one.
///
/// Keeps the generator `v` with `R = v v^H` when the construction supplies it,
/// otherwise a dense row-major copy of `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneMatrix {
    dim: usize,
    repr: Repr,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Generator(Vec<Complex64>),
    Dense(Vec<Complex64>),
}

impl RankOneMatrix {
    pub fn from_generator(v: Vec<Complex64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::Empty("generator"));
        }
        Ok(Self {
            dim: v.len(),
            repr: Repr::Generator(v),
        })
    }

    /// A dense matrix in row-major order. Only shape and Hermitian symmetry are
    /// checked here; rank and definiteness are checked by [`principal_vector`].
    pub fn from_dense(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("matrix"));
        }
        if entries.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        let scale = entries.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for i in 0..dim {
            for j in i..dim {
                let d = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                if d > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::Domain(format!(
                        "matrix is not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            repr: Repr::Dense(entries),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.repr {
            Repr::Generator(v) => v[i] * v[j].conj(),
            Repr::Dense(m) => m[i * self.dim + j],
        }
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.entry(i, j));
            }
        }
        out
    }

    /// `x^H R x`.
    pub fn quadratic_form(&self, x: &[Complex64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        match &self.repr {
            Repr::Generator(v) => {
                let s: Complex64 = x.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
                Ok(s.norm_sqr())
            }
            Repr::Dense(m) => {
                let n = self.dim;
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    let row: Complex64 = (0..n).map(|j| m[i * n + j] * x[j]).sum();
                    acc += x[i].conj() * row;
                }
                Ok(acc.re)
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        match &self.repr {
            Repr::Generator(v) => v.iter().map(|c| c.norm_sqr()).sum::<f64>(),
            Repr::Dense(m) => m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
        }
    }
}

/// Returns `v` with `R ≈ v v^H` (unique up to a global phase).
///
/// Exact when `R` carries its generator; otherwise power iteration started
/// from the column of largest norm, followed by a rank-one residual check.
pub fn principal_vector(r: &RankOneMatrix) -> Result<Vec<Complex64>> {
    let m = match &r.repr {
        Repr::Generator(v) => return Ok(v.clone()),
        Repr::Dense(m) => m,
    };
    let n = r.dim;
    let norm = r.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::Degenerate {
            ratio: f64::INFINITY,
            tolerance: RANK_ONE_TOLERANCE,
        });
    }
    let col_norm = |j: usize| (0..n).map(|i| m[i * n + j].norm_sqr()).sum::<f64>();
    let start = (0..n)
        .max_by(|&a, &b| col_norm(a).total_cmp(&col_norm(b)))
        .expect("n > 0");
    let mut x: Vec<Complex64> = (0..n).map(|i| m[i * n + start]).collect();
    normalize(&mut x);

    let matvec = |x: &[Complex64]| -> Vec<Complex64> {
        (0..n)
            .map(|i| (0..n).map(|j| m[i * n + j] * x[j]).sum())
            .collect()
    };
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let mut y = matvec(&x);
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum();
        let converged = (rayleigh - lambda).abs() <= RAYLEIGH_TOLERANCE * rayleigh.abs();
        lambda = rayleigh;
        if normalize(&mut y) == 0.0 {
            break;
        }
        x = y;
        if converged {
            break;
        }
    }

    // A PSD rank-one matrix has a single positive eigenvalue; anything else
    // (negative definite, rank ≥ 2) leaves a residual of order λ_2.
    if lambda <= 0.0 {
        return Err(Error::Degenerate {
            ratio: f64::INFINITY,
            tolerance: RANK_ONE_TOLERANCE,
        });
    }
    let scale = lambda.sqrt();
    let v: Vec<Complex64> = x.iter().map(|c| c * scale).collect();
    let residual = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (m[i * n + j] - v[i] * v[j].conj()).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let ratio = residual / lambda;
    if ratio > RANK_ONE_TOLERANCE {
        return Err(Error::Degenerate {
            ratio,
            tolerance: RANK_ONE_TOLERANCE,
        });
    }
    Ok(v)
}

fn normalize(x: &mut [Complex64]) -> f64 {
    let n = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|c| *c /= n);
    }
    n
}
