//! Seeded channel generators and the far-field scene model.
//!
//! Every generator takes an explicit seed and draws from [`ChaCha8Rng`], so a
//! realization is reproducible bit for bit. Circularly-symmetric complex
//! Gaussians `CN(0, σ²)` have independent `N(0, σ²/2)` real and imaginary parts.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduce::{CascadedChannel, RankOneMatrix};
use crate::types::RankOneObjective;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream seed from a parent seed and a label
/// (splitmix64 finalizer over the combined words).
pub fn derive_seed(parent: u64, label: u64) -> u64 {
    let mut x = parent ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// One `CN(0, variance)` sample.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

/// i.i.d. `CN(0, c)` entries for `h_s`, `h_r` and `h_d`.
pub fn sample_gaussian_cascade(n: usize, variance: f64, seed: u64) -> Result<CascadedChannel> {
    if n == 0 {
        return Err(Error::Empty("cascade length"));
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::Domain(format!(
            "variance must be positive, got {variance}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let h_s = (0..n).map(|_| complex_normal(&mut rng, variance)).collect();
    let h_r = (0..n).map(|_| complex_normal(&mut rng, variance)).collect();
    let h_d = complex_normal(&mut rng, variance);
    CascadedChannel::new(h_s, h_r, h_d)
}

pub type Vec3 = [f64; 3];

fn distance(a: Vec3, b: Vec3) -> f64 {
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Statistical pathloss model with Rayleigh fading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model1Params {
    /// Transmitter, RIS and receiver positions in meters.
    pub tx_pos: Vec3,
    pub ris_pos: Vec3,
    pub rx_pos: Vec3,
    pub n: usize,
    #[serde(default = "default_power_dbm")]
    pub power_dbm: f64,
    #[serde(default = "default_noise_dbm")]
    pub noise_dbm: f64,
}

pub fn default_power_dbm() -> f64 {
    30.0
}

pub fn default_noise_dbm() -> f64 {
    -90.0
}

impl Model1Params {
    /// The reference geometry: Tx (50, −200, 20), RIS (−2, −1, 0), Rx at the origin.
    pub fn reference(n: usize) -> Self {
        Self {
            tx_pos: [50.0, -200.0, 20.0],
            ris_pos: [-2.0, -1.0, 0.0],
            rx_pos: [0.0, 0.0, 0.0],
            n,
            power_dbm: default_power_dbm(),
            noise_dbm: default_noise_dbm(),
        }
    }

    /// `(d_0, d_1, d_2)`: Tx→Rx, Tx→RIS and RIS→Rx distances.
    pub fn distances(&self) -> Result<(f64, f64, f64)> {
        let all = [self.tx_pos, self.ris_pos, self.rx_pos];
        if all.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Geometry("positions must be finite".into()));
        }
        let d0 = distance(self.tx_pos, self.rx_pos);
        let d1 = distance(self.tx_pos, self.ris_pos);
        let d2 = distance(self.ris_pos, self.rx_pos);
        for (name, d) in [("tx-rx", d0), ("tx-ris", d1), ("ris-rx", d2)] {
            if d <= 0.0 {
                return Err(Error::Geometry(format!("{name} distance is zero")));
            }
        }
        Ok((d0, d1, d2))
    }
}

/// Background-link pathloss in dB: `32.6 + 36.7 log10(d)`.
pub fn direct_pathloss_db(d: f64) -> f64 {
    32.6 + 36.7 * d.log10()
}

/// Per-hop RIS pathloss in dB: `30 + 22 log10(d)`.
pub fn ris_hop_pathloss_db(d: f64) -> f64 {
    30.0 + 22.0 * d.log10()
}

/// `[h_0, h_1, …, h_N]`: background channel followed by the per-cell cascades.
pub fn sample_model1(params: &Model1Params, seed: u64) -> Result<Vec<Complex64>> {
    if params.n == 0 {
        return Err(Error::Empty("cell count"));
    }
    let (d0, d1, d2) = params.distances()?;
    let a0 = 10f64.powf(-direct_pathloss_db(d0) / 20.0);
    let ar = 10f64.powf(-(ris_hop_pathloss_db(d1) + ris_hop_pathloss_db(d2)) / 20.0);
    let mut rng = rng_from_seed(seed);
    let mut h = Vec::with_capacity(params.n + 1);
    h.push(complex_normal(&mut rng, 1.0) * a0);
    for _ in 0..params.n {
        h.push(complex_normal(&mut rng, 1.0) * ar);
    }
    Ok(h)
}

/// Augmented objective `[h_1, …, h_N, h_0]` for a Model 1 draw.
pub fn model1_objective(h: &[Complex64]) -> Result<RankOneObjective> {
    let (h0, cells) = h.split_first().ok_or(Error::Empty("model 1 channel"))?;
    crate::reduce::homogenize(cells, *h0)
}

/// Unit direction `[sinθ cosφ, sinθ sinφ, cosθ]`.
pub fn direction(theta: f64, phi: f64) -> Vec3 {
    [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ]
}

/// `e^{j2π pᵀu(θ, φ)/λ}`.
pub fn steering_entry(p: Vec3, theta: f64, phi: f64, wavelength: f64) -> Complex64 {
    let u = direction(theta, phi);
    let proj = p[0] * u[0] + p[1] * u[1] + p[2] * u[2];
    Complex64::from_polar(1.0, 2.0 * PI * proj / wavelength)
}

/// Cell positions of a `rows × cols` planar array in the xy-plane, row-major,
/// centred on the origin.
pub fn uniform_planar_array(rows: usize, cols: usize, spacing: f64) -> Vec<Vec3> {
    let cx = (cols as f64 - 1.0) / 2.0;
    let cy = (rows as f64 - 1.0) / 2.0;
    (0..rows)
        .flat_map(|r| {
            (0..cols).map(move |c| [(c as f64 - cx) * spacing, (cy - r as f64) * spacing, 0.0])
        })
        .collect()
}

/// An arrival path: direction (radians) and complex amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub theta: f64,
    pub phi: f64,
    pub amplitude: Complex64,
}

/// Far-field RIS scene; angles in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldScene {
    pub positions: Vec<Vec3>,
    pub wavelength: f64,
    pub departure: (f64, f64),
    pub arrivals: Vec<Arrival>,
    pub path_gain: Complex64,
}

impl FarFieldScene {
    pub fn validate(&self) -> Result<()> {
        if self.positions.is_empty() {
            return Err(Error::Empty("cell positions"));
        }
        if self.arrivals.is_empty() {
            return Err(Error::Empty("arrival paths"));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::Geometry(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            )));
        }
        let angles = self
            .arrivals
            .iter()
            .flat_map(|a| [a.theta, a.phi])
            .chain([self.departure.0, self.departure.1]);
        if angles
            .chain(self.positions.iter().flatten().copied())
            .any(|v| !v.is_finite())
        {
            return Err(Error::Geometry(
                "angles and positions must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Departure steering vector `b` (length N).
    pub fn departure_vector(&self) -> Vec<Complex64> {
        let (t, p) = self.departure;
        self.positions
            .iter()
            .map(|&pos| steering_entry(pos, t, p, self.wavelength))
            .collect()
    }

    /// Arrival steering matrix `B` (N × M, row-major).
    pub fn arrival_matrix(&self) -> Vec<Vec<Complex64>> {
        self.positions
            .iter()
            .map(|&pos| {
                self.arrivals
                    .iter()
                    .map(|a| steering_entry(pos, a.theta, a.phi, self.wavelength))
                    .collect()
            })
            .collect()
    }

    /// Incident field at each cell, `B x`.
    pub fn incident(&self) -> Vec<Complex64> {
        self.arrival_matrix()
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.arrivals)
                    .map(|(b, a)| b * a.amplitude)
                    .sum()
            })
            .collect()
    }

    /// `y = η bᵀ W B x` for unit-modulus reflection coefficients `w`.
    pub fn received(&self, w: &[Complex64]) -> Result<Complex64> {
        if w.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: w.len(),
            });
        }
        let b = self.departure_vector();
        let bx = self.incident();
        let s: Complex64 = b
            .iter()
            .zip(w)
            .zip(&bx)
            .map(|((bi, wi), xi)| bi * wi * xi)
            .sum();
        Ok(self.path_gain * s)
    }

    /// Dense `R = |η|² (Q ⊙ Pᵀ)` with `Q = b^H b`, `P = B x x^H B^H`, so that
    /// `|y|² = ẅ^H R ẅ` for `ẅ = [e^{jω_i}]`.
    pub fn quadratic_matrix(&self) -> Result<RankOneMatrix> {
        let n = self.len();
        let b = self.departure_vector();
        let bx = self.incident();
        let g2 = self.path_gain.norm_sqr();
        let mut r = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let q = b[i].conj() * b[j];
                let p_t = bx[j] * bx[i].conj();
                r.push(q * p_t * g2);
            }
        }
        RankOneMatrix::from_dense(n, r)
    }
}

/// Rank-one objective of a far-field scene: `z_i = η b_i (B x)_i`, so that
/// `|Σ e^{jω_i} z_i| = |y|`.
pub fn build_model2_objective(scene: &FarFieldScene) -> Result<RankOneObjective> {
    scene.validate()?;
    let b = scene.departure_vector();
    let bx = scene.incident();
    let z: Vec<Complex64> = b
        .iter()
        .zip(&bx)
        .map(|(bi, xi)| scene.path_gain * bi * xi)
        .collect();
    #[cfg(debug_assertions)]
    if z.len() <= 64 {
        // The dense form must be rank one with principal vector conj(z).
        let r = scene.quadratic_matrix()?;
        let v: Vec<Complex64> = z.iter().map(|c| c.conj()).collect();
        let g = RankOneMatrix::from_generator(v)?;
        let scale = r.frobenius_norm().max(f64::MIN_POSITIVE);
        for i in 0..z.len() {
            for j in 0..z.len() {
                if (r.entry(i, j) - g.entry(i, j)).norm() > 1e-9 * scale {
                    return Err(Error::Degenerate {
                        ratio: (r.entry(i, j) - g.entry(i, j)).norm() / scale,
                        tolerance: 1e-9,
                    });
                }
            }
        }
    }
    RankOneObjective::new(z)
}

/// Serializable scene description: positions in meters, angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    /// Explicit cell positions; alternatively give `grid`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Vec3>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub wavelength: f64,
    /// `[θ, φ]` in degrees.
    pub departure_deg: [f64; 2],
    pub arrivals: Vec<ArrivalSpec>,
    /// `[re, im]`; defaults to 1.
    #[serde(default = "unit_gain")]
    pub path_gain: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalSpec {
    pub theta_deg: f64,
    pub phi_deg: f64,
    /// `[re, im]`; defaults to 1.
    #[serde(default = "unit_gain")]
    pub amplitude: [f64; 2],
}

fn unit_gain() -> [f64; 2] {
    [1.0, 0.0]
}

impl SceneSpec {
    pub fn to_scene(&self) -> Result<FarFieldScene> {
        let positions = match (&self.positions, &self.grid) {
            (Some(p), None) => p.clone(),
            (None, Some(g)) => {
                if g.rows == 0 || g.cols == 0 || !(g.spacing.is_finite() && g.spacing > 0.0) {
                    return Err(Error::Geometry(
                        "grid needs rows, cols ≥ 1 and spacing > 0".into(),
                    ));
                }
                uniform_planar_array(g.rows, g.cols, g.spacing)
            }
            _ => {
                return Err(Error::Geometry(
                    "scene needs exactly one of `positions` or `grid`".into(),
                ))
            }
        };
        let scene = FarFieldScene {
            positions,
            wavelength: self.wavelength,
            departure: (
                self.departure_deg[0].to_radians(),
                self.departure_deg[1].to_radians(),
            ),
            arrivals: self
                .arrivals
                .iter()
                .map(|a| Arrival {
                    theta: a.theta_deg.to_radians(),
                    phi: a.phi_deg.to_radians(),
                    amplitude: Complex64::new(a.amplitude[0], a.amplitude[1]),
                })
                .collect(),
            path_gain: Complex64::new(self.path_gain[0], self.path_gain[1]),
        };
        scene.validate()?;
        Ok(scene)
    }
}

/// Random far-field scene over the given cell positions: departure and `m`
/// arrival directions with `θ ∈ [0, π/2)`, `φ ∈ [0, 2π)` and `CN(0, 1)` amplitudes.
pub fn sample_model2_scene(
    positions: Vec<Vec3>,
    wavelength: f64,
    m: usize,
    seed: u64,
) -> Result<FarFieldScene> {
    let mut rng = rng_from_seed(seed);
    let angle = |rng: &mut ChaCha8Rng| {
        (
            rng.random_range(0.0..PI / 2.0),
            rng.random_range(0.0..2.0 * PI),
        )
    };
    let departure = angle(&mut rng);
    let arrivals = (0..m)
        .map(|_| {
            let (theta, phi) = angle(&mut rng);
            Arrival {
                theta,
                phi,
                amplitude: complex_normal(&mut rng, 1.0),
            }
        })
        .collect();
    let scene = FarFieldScene {
        positions,
        wavelength,
        departure,
        arrivals,
        path_gain: Complex64::new(1.0, 0.0),
    };
    scene.validate()?;
    Ok(scene)
}

/// Received SNR in dB, or an explicit no-signal marker for zero gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrDb {
    Db(f64),
    NoSignal,
}

impl SnrDb {
    pub fn db(&self) -> Option<f64> {
        match self {
            SnrDb::Db(v) => Some(*v),
            SnrDb::NoSignal => None,
        }
    }
}

impl std::fmt::Display for SnrDb {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SnrDb::Db(v) => write!(f, "{v}"),
            SnrDb::NoSignal => f.write_str("-inf"),
        }
    }
}

impl Serialize for SnrDb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SnrDb::Db(v) => s.serialize_f64(*v),
            SnrDb::NoSignal => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for SnrDb {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(SnrDb::Db(v)),
            Raw::Str(s) if s == "-inf" => Ok(SnrDb::NoSignal),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad snr value {s:?}"))),
        }
    }
}

/// `P|h|²/σ²` in dB, from powers in dBm.
pub fn snr_db(gain: f64, power_dbm: f64, noise_dbm: f64) -> SnrDb {
    let g = gain.abs();
    if g == 0.0 || !g.is_finite() {
        return SnrDb::NoSignal;
    }
    SnrDb::Db(power_dbm - noise_dbm + 20.0 * g.log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{evaluate, PhaseConfig, QuantizationScheme};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gaussian_is_deterministic() {
        let a = sample_gaussian_cascade(4, 1.0, 99).unwrap();
        let b = sample_gaussian_cascade(4, 1.0, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_gaussian_cascade(4, 1.0, 100).unwrap());
    }

    #[test]
    fn gaussian_variance_scales_exactly() {
        let a = sample_gaussian_cascade(16, 1.0, 5).unwrap();
        let b = sample_gaussian_cascade(16, 4.0, 5).unwrap();
        for (x, y) in a.h_s.iter().zip(&b.h_s).chain(a.h_r.iter().zip(&b.h_r)) {
            assert_eq!(x * 2.0, *y);
        }
        assert_eq!(a.h_d * 2.0, b.h_d);
    }

    #[test]
    fn gaussian_second_moment() {
        let ch = sample_gaussian_cascade(10_000, 1.0, 1).unwrap();
        let m = ch.h_s.iter().map(|h| h.norm_sqr()).sum::<f64>() / 10_000.0;
        assert!((m - 1.0).abs() < 0.05, "mean |h|^2 = {m}");
    }

    #[test]
    fn gaussian_rejects_bad_args() {
        assert!(sample_gaussian_cascade(0, 1.0, 1).is_err());
        assert!(sample_gaussian_cascade(3, 0.0, 1).is_err());
    }

    #[test]
    fn pathloss_values() {
        assert!((direct_pathloss_db(100.0) - 106.0).abs() < 1e-12);
        assert!((ris_hop_pathloss_db(10.0) - 52.0).abs() < 1e-12);
    }

    #[test]
    fn reference_geometry_distances() {
        let (d0, d1, d2) = Model1Params::reference(200).distances().unwrap();
        assert!((d0 - 42900f64.sqrt()).abs() < 1e-9);
        assert!((d0 - 207.12).abs() < 0.01);
        assert!((d1 - 42705f64.sqrt()).abs() < 1e-9);
        assert!((d2 - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn coincident_positions_rejected() {
        let mut p = Model1Params::reference(4);
        p.ris_pos = p.rx_pos;
        assert!(matches!(sample_model1(&p, 0), Err(Error::Geometry(_))));
    }

    #[test]
    fn model1_magnitude_law() {
        // Mean |h_i|^2 over many draws matches 10^{-(PL1+PL2)/10}.
        let mut p = Model1Params::reference(10);
        p.tx_pos = [10.0, 0.0, 0.0];
        p.ris_pos = [0.0, 10.0, 0.0];
        p.rx_pos = [0.0, 0.0, 0.0];
        let (d0, d1, d2) = p.distances().unwrap();
        let expect_cell = 10f64.powf(-(ris_hop_pathloss_db(d1) + ris_hop_pathloss_db(d2)) / 10.0);
        let expect_bg = 10f64.powf(-direct_pathloss_db(d0) / 10.0);
        let draws = 1000;
        let (mut cell, mut bg) = (0.0, 0.0);
        for s in 0..draws {
            let h = sample_model1(&p, s).unwrap();
            bg += h[0].norm_sqr();
            cell += h[1..].iter().map(|x| x.norm_sqr()).sum::<f64>();
        }
        let cell = cell / (draws as f64 * 10.0);
        let bg = bg / draws as f64;
        assert!(
            (cell / expect_cell - 1.0).abs() < 0.05,
            "{cell} vs {expect_cell}"
        );
        assert!((bg / expect_bg - 1.0).abs() < 0.1, "{bg} vs {expect_bg}");
        assert!((ris_hop_pathloss_db(10.0) * 2.0 - 104.0).abs() < 1e-12);
    }

    #[test]
    fn steering_examples() {
        let lam = 0.062;
        assert_eq!(steering_entry([0.0; 3], 0.3, 1.2, lam), c(1., 0.));
        let e = steering_entry([lam, 0.0, 0.0], PI / 2.0, 0.0, lam);
        assert!((e - c(1., 0.)).norm() < 1e-12);
        let e = steering_entry([lam / 4.0, 0.0, 0.0], PI / 2.0, 0.0, lam);
        assert!((e - c(0., 1.)).norm() < 1e-12);
    }

    #[test]
    fn steering_unit_modulus() {
        let mut rng = rng_from_seed(4);
        for _ in 0..1000 {
            let p = [
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            ];
            let e = steering_entry(
                p,
                rng.random_range(0.0..PI),
                rng.random_range(0.0..2.0 * PI),
                0.05,
            );
            assert!((e.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn planar_array_layout() {
        let p = uniform_planar_array(10, 16, 0.027);
        assert_eq!(p.len(), 160);
        let cx: f64 = p.iter().map(|q| q[0]).sum();
        assert!(cx.abs() < 1e-12);
        assert!((p[1][0] - p[0][0] - 0.027).abs() < 1e-15);
        assert!((p[0][1] - p[16][1] - 0.027).abs() < 1e-15);
    }

    fn flat_scene(n: usize, eta: Complex64) -> FarFieldScene {
        FarFieldScene {
            positions: vec![[0.0; 3]; n],
            wavelength: 0.062,
            departure: (0.4, 0.1),
            arrivals: vec![Arrival {
                theta: 0.0,
                phi: 0.0,
                amplitude: c(1., 0.),
            }],
            path_gain: eta,
        }
    }

    #[test]
    fn model2_without_geometry_phase() {
        let eta = c(0.5, -0.25);
        let o = build_model2_objective(&flat_scene(5, eta)).unwrap();
        for zi in o.z() {
            assert!((zi - eta).norm() < 1e-15);
        }
        let sol = crate::das::solve_das(&o, QuantizationScheme::new(1).unwrap()).unwrap();
        assert!((sol.value - eta.norm() * 5.0).abs() < 1e-12);

        let o1 = build_model2_objective(&flat_scene(1, eta)).unwrap();
        assert_eq!(o1.len(), 1);
    }

    #[test]
    fn model2_identity_random_scenes() {
        let s = QuantizationScheme::new(2).unwrap();
        for seed in 0..20u64 {
            let mut rng = rng_from_seed(1000 + seed);
            let positions = (0..8)
                .map(|_| {
                    [
                        rng.random_range(-0.2..0.2),
                        rng.random_range(-0.2..0.2),
                        0.0,
                    ]
                })
                .collect();
            let mut scene = sample_model2_scene(positions, 0.062, 3, seed).unwrap();
            scene.path_gain = complex_normal(&mut rng, 1.0);
            let o = build_model2_objective(&scene).unwrap();
            let r = scene.quadratic_matrix().unwrap();
            let v = crate::reduce::principal_vector(&r).unwrap();
            let rec: f64 = (0..8)
                .flat_map(|i| (0..8).map(move |j| (i, j)))
                .map(|(i, j)| (r.entry(i, j) - v[i] * v[j].conj()).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(rec <= 1e-8 * r.frobenius_norm());
            for _ in 0..100 {
                let idx: Vec<u32> = (0..8).map(|_| rng.random_range(0..4)).collect();
                let cfg = PhaseConfig::new(idx, s).unwrap();
                let w: Vec<Complex64> = cfg
                    .phases()
                    .iter()
                    .map(|&p| Complex64::from_polar(1.0, p))
                    .collect();
                let direct = scene.received(&w).unwrap().norm_sqr();
                let quad = r.quadratic_form(&w).unwrap();
                assert!((direct - quad).abs() <= 1e-9 * direct.max(1e-300));
                let via_z = evaluate(&o, &cfg).unwrap().powi(2);
                assert!((direct - via_z).abs() <= 1e-9 * direct.max(1e-300));
            }
        }
    }

    #[test]
    fn scene_spec_degrees_and_grid() {
        let spec: SceneSpec = serde_json::from_str(
            r#"{"grid":{"rows":10,"cols":16,"spacing":0.027},"wavelength":0.062,
                "departure_deg":[45,0],"arrivals":[{"theta_deg":0,"phi_deg":0}]}"#,
        )
        .unwrap();
        let scene = spec.to_scene().unwrap();
        assert_eq!(scene.len(), 160);
        assert!((scene.departure.0 - PI / 4.0).abs() < 1e-15);
        assert_eq!(scene.path_gain, c(1., 0.));

        let mut bad = spec.clone();
        bad.positions = Some(vec![[0.0; 3]]);
        assert!(bad.to_scene().is_err());
        let mut bad = spec;
        bad.wavelength = 0.0;
        assert!(bad.to_scene().is_err());
    }

    #[test]
    fn snr_examples() {
        assert_eq!(snr_db(1.0, 30.0, -90.0), SnrDb::Db(120.0));
        assert_eq!(snr_db(0.1, 30.0, -90.0), SnrDb::Db(100.0));
        assert_eq!(snr_db(0.0, 30.0, -90.0), SnrDb::NoSignal);
        assert_eq!(serde_json::to_string(&SnrDb::NoSignal).unwrap(), "\"-inf\"");
        let back: SnrDb = serde_json::from_str("\"-inf\"").unwrap();
        assert_eq!(back, SnrDb::NoSignal);
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(7, 0);
        let b = derive_seed(7, 1);
        let c = derive_seed(8, 0);
        assert!(a != b && a != c && b != c);
        assert_eq!(derive_seed(7, 0), a);
    }
}
