//! Monte-Carlo experiment harness.
//!
//! A plan fixes a channel model, the grid of cell counts and bit widths, and
//! the methods to compare. Each trial draws one channel realization per cell
//! count from a seed derived from `(master seed, trial, N)`; every bit width
//! and method in that trial sees the same realization, so results are paired.
//! Trials run in parallel and are re-assembled in trial order.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    branch_and_bound, codebook_solution, exhaustive, exhaustive_admits, quantized_alignment,
    BaselineKind,
};
use crate::channels::{
    default_noise_dbm, default_power_dbm, derive_seed, model1_objective, sample_gaussian_cascade,
    sample_model1, sample_model2_scene, snr_db, Model1Params, SnrDb, Vec3,
};
use crate::das::{solve_binary, solve_das};
use crate::error::{Error, Result};
use crate::types::{continuous_bound, QuantizationScheme, RankOneObjective, Solution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelModel {
    /// i.i.d. `CN(0, variance)` cascade with a direct link.
    Gaussian {
        #[serde(default = "unit_variance")]
        variance: f64,
    },
    /// Pathloss + Rayleigh model; positions in meters.
    Model1 {
        tx_pos: Vec3,
        ris_pos: Vec3,
        rx_pos: Vec3,
    },
    /// Far-field scenes with random directions over a planar grid.
    Model2 {
        wavelength: f64,
        spacing: f64,
        #[serde(default = "one_path")]
        paths: usize,
    },
}

fn unit_variance() -> f64 {
    1.0
}

fn one_path() -> usize {
    1
}

impl ChannelModel {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelModel::Gaussian { .. } => "gaussian",
            ChannelModel::Model1 { .. } => "model1",
            ChannelModel::Model2 { .. } => "model2",
        }
    }

    pub fn model1_reference() -> Self {
        let p = Model1Params::reference(1);
        ChannelModel::Model1 {
            tx_pos: p.tx_pos,
            ris_pos: p.ris_pos,
            rx_pos: p.rx_pos,
        }
    }

    /// Length of the objective for `n` cells (direct-link models add one slot).
    pub fn objective_len(&self, n: usize) -> usize {
        match self {
            ChannelModel::Gaussian { .. } | ChannelModel::Model1 { .. } => n + 1,
            ChannelModel::Model2 { .. } => n,
        }
    }

    /// Draws one realization and reduces it to an objective.
    pub fn objective(&self, n: usize, seed: u64) -> Result<RankOneObjective> {
        match self {
            ChannelModel::Gaussian { variance } => {
                let ch = sample_gaussian_cascade(n, *variance, seed)?;
                crate::reduce::homogenize(&crate::reduce::build_phi(&ch)?, ch.h_d)
            }
            ChannelModel::Model1 {
                tx_pos,
                ris_pos,
                rx_pos,
            } => {
                let params = Model1Params {
                    tx_pos: *tx_pos,
                    ris_pos: *ris_pos,
                    rx_pos: *rx_pos,
                    n,
                    power_dbm: default_power_dbm(),
                    noise_dbm: default_noise_dbm(),
                };
                model1_objective(&sample_model1(&params, seed)?)
            }
            ChannelModel::Model2 {
                wavelength,
                spacing,
                paths,
            } => {
                let cols = (n as f64).sqrt().ceil() as usize;
                let rows = n.div_ceil(cols);
                let mut positions = crate::channels::uniform_planar_array(rows, cols, *spacing);
                positions.truncate(n);
                let scene = sample_model2_scene(positions, *wavelength, *paths, seed)?;
                crate::channels::build_model2_objective(&scene)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMethod {
    Das,
    Binary,
    Exhaustive,
    BranchAndBound,
    QuantizedAlignment,
    Random,
    AllZeros,
    /// The continuous-phase optimum `Σ|z_i|`.
    Continuous,
}

impl BenchMethod {
    pub fn name(&self) -> &'static str {
        match self {
            BenchMethod::Das => "das",
            BenchMethod::Binary => "binary",
            BenchMethod::Exhaustive => "exhaustive",
            BenchMethod::BranchAndBound => "branch_and_bound",
            BenchMethod::QuantizedAlignment => "quantized_alignment",
            BenchMethod::Random => "random",
            BenchMethod::AllZeros => "all_zeros",
            BenchMethod::Continuous => "continuous",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "das" => BenchMethod::Das,
            "binary" => BenchMethod::Binary,
            "exhaustive" => BenchMethod::Exhaustive,
            "branch_and_bound" | "bnb" => BenchMethod::BranchAndBound,
            "quantized_alignment" | "qa" => BenchMethod::QuantizedAlignment,
            "random" => BenchMethod::Random,
            "all_zeros" | "zeros" => BenchMethod::AllZeros,
            "continuous" => BenchMethod::Continuous,
            other => return Err(Error::InvalidPlan(format!("unknown method {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub model: ChannelModel,
    pub n: Vec<usize>,
    pub bits: Vec<u32>,
    pub methods: Vec<BenchMethod>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_power_dbm")]
    pub power_dbm: f64,
    #[serde(default = "default_noise_dbm")]
    pub noise_dbm: f64,
    /// Off by default: `time_s` is then 0 and output is byte-reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPlan(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("no methods given".into());
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return bad("cell counts must be nonempty and positive".into());
        }
        if self.bits.is_empty() {
            return bad("no bit widths given".into());
        }
        for &b in &self.bits {
            QuantizationScheme::new(b).map_err(|e| Error::InvalidPlan(e.to_string()))?;
        }
        match &self.model {
            ChannelModel::Gaussian { variance } if !(*variance > 0.0 && variance.is_finite()) => {
                return bad(format!("variance must be positive, got {variance}"));
            }
            ChannelModel::Model1 {
                tx_pos,
                ris_pos,
                rx_pos,
            } => {
                let mut p = Model1Params::reference(1);
                p.tx_pos = *tx_pos;
                p.ris_pos = *ris_pos;
                p.rx_pos = *rx_pos;
                p.distances()
                    .map_err(|e| Error::InvalidPlan(e.to_string()))?;
            }
            ChannelModel::Model2 {
                wavelength,
                spacing,
                paths,
            } if !(*wavelength > 0.0 && *spacing > 0.0 && *paths > 0) => {
                return bad("model2 needs wavelength > 0, spacing > 0, paths ≥ 1".into());
            }
            _ => {}
        }
        for &b in &self.bits {
            let scheme = QuantizationScheme::new(b).expect("checked above");
            if self.methods.contains(&BenchMethod::Binary) && b != 1 {
                return bad(format!("method binary needs bits = 1, plan has {b}"));
            }
            if self.methods.contains(&BenchMethod::Exhaustive) {
                for &n in &self.n {
                    let len = self.model.objective_len(n);
                    if !exhaustive_admits(len, scheme) {
                        return bad(format!(
                            "exhaustive over {len} entries at {b} bits exceeds the search cap"
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Seed of the channel realization for `(trial, n)`.
    pub fn channel_seed(&self, trial: usize, n: usize) -> u64 {
        derive_seed(derive_seed(self.seed, trial as u64), n as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "B")]
    pub bits: u32,
    pub method: BenchMethod,
    pub value: f64,
    pub snr_db: SnrDb,
    pub time_s: f64,
    /// FNV-1a over the objective entries; equal within a paired cell.
    pub channel_hash: u64,
    /// Continuous bound of the realization.
    pub bound: f64,
}

impl TrialRecord {
    /// `20 log10(bound / value)`; `None` when the value is zero.
    pub fn gap_db(&self) -> Option<f64> {
        (self.value > 0.0).then(|| 20.0 * (self.bound / self.value).log10())
    }
}

pub fn channel_hash(obj: &RankOneObjective) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for c in obj.z() {
        for word in [c.re.to_bits(), c.im.to_bits()] {
            for byte in word.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
    }
    h
}

fn run_method(
    method: BenchMethod,
    obj: &RankOneObjective,
    scheme: QuantizationScheme,
    seed: u64,
) -> Result<f64> {
    let sol: Solution = match method {
        BenchMethod::Das => solve_das(obj, scheme)?,
        BenchMethod::Binary => solve_binary(obj)?,
        BenchMethod::Exhaustive => exhaustive(obj, scheme)?,
        BenchMethod::BranchAndBound => branch_and_bound(obj, scheme)?,
        BenchMethod::QuantizedAlignment => quantized_alignment(obj, scheme),
        BenchMethod::Random => codebook_solution(
            obj,
            BaselineKind::Random(derive_seed(seed, scheme.bits() as u64)),
            scheme,
        )?,
        BenchMethod::AllZeros => codebook_solution(obj, BaselineKind::AllZeros, scheme)?,
        BenchMethod::Continuous => return Ok(continuous_bound(obj)),
    };
    Ok(sol.value)
}

fn run_trial(plan: &ExperimentPlan, trial: usize) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::with_capacity(plan.n.len() * plan.bits.len() * plan.methods.len());
    for &n in &plan.n {
        let seed = plan.channel_seed(trial, n);
        let obj = plan.model.objective(n, seed)?;
        let hash = channel_hash(&obj);
        let bound = continuous_bound(&obj);
        for &b in &plan.bits {
            let scheme = QuantizationScheme::new(b)?;
            for &method in &plan.methods {
                let start = Instant::now();
                let value = run_method(method, &obj, scheme, seed)?;
                let elapsed = start.elapsed().as_secs_f64();
                out.push(TrialRecord {
                    trial,
                    seed,
                    n,
                    bits: b,
                    method,
                    value,
                    snr_db: snr_db(value, plan.power_dbm, plan.noise_dbm),
                    time_s: if plan.timing { elapsed } else { 0.0 },
                    channel_hash: hash,
                    bound,
                });
            }
        }
    }
    Ok(out)
}

/// Runs every trial of the plan and returns records in trial-major order.
pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<TrialRecord>> {
    plan.validate()?;
    if plan.timing {
        // One discarded solve per cell so first-touch costs stay out of the timings.
        for &n in &plan.n {
            let obj = plan.model.objective(n, plan.channel_seed(0, n))?;
            for &b in &plan.bits {
                let scheme = QuantizationScheme::new(b)?;
                for &m in &plan.methods {
                    run_method(m, &obj, scheme, 0)?;
                }
            }
        }
    }
    let per_trial: Vec<Result<Vec<TrialRecord>>> = (0..plan.trials)
        .into_par_iter()
        .map(|t| run_trial(plan, t))
        .collect();
    let mut records = Vec::new();
    for r in per_trial {
        records.extend(r?);
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "B")]
    pub bits: u32,
    pub method: BenchMethod,
    pub trials: usize,
    pub mean_value: f64,
    pub mean_snr_db: Option<f64>,
    pub median_snr_db: Option<f64>,
    pub p10_snr_db: Option<f64>,
    pub p90_snr_db: Option<f64>,
    /// Records whose gain was exactly zero (excluded from the dB statistics).
    pub no_signal: usize,
    pub mean_gap_db: Option<f64>,
    pub mean_time_s: f64,
    /// Empirical CDF of SNR in dB as `(value, fraction)` pairs.
    pub cdf: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub cells: Vec<CellSummary>,
}

impl Summary {
    pub fn cell(&self, n: usize, bits: u32, method: BenchMethod) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.n == n && c.bits == bits && c.method == method)
    }
}

/// Empirical CDF: sorted values paired with `(i + 1) / len`.
pub fn empirical_cdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let len = v.len() as f64;
    v.into_iter()
        .enumerate()
        .map(|(i, x)| (x, (i + 1) as f64 / len))
        .collect()
}

/// Nearest-rank percentile of sorted data, `q ∈ [0, 1]`.
fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

fn mean(v: impl ExactSizeIterator<Item = f64>) -> Option<f64> {
    let n = v.len();
    (n > 0).then(|| v.sum::<f64>() / n as f64)
}

/// Per-`(N, B, method)` statistics, cells ordered by `N`, `B`, then method.
pub fn aggregate(records: &[TrialRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(Error::Empty("records"));
    }
    let mut groups: BTreeMap<(usize, u32, BenchMethod), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.n, r.bits, r.method)).or_default().push(r);
    }
    let cells = groups
        .into_iter()
        .map(|((n, bits, method), rs)| {
            let db: Vec<f64> = rs.iter().filter_map(|r| r.snr_db.db()).collect();
            let cdf = empirical_cdf(&db);
            let sorted: Vec<f64> = cdf.iter().map(|p| p.0).collect();
            let gaps: Vec<f64> = rs.iter().filter_map(|r| r.gap_db()).collect();
            CellSummary {
                n,
                bits,
                method,
                trials: rs.len(),
                mean_value: mean(rs.iter().map(|r| r.value)).unwrap_or(0.0),
                mean_snr_db: mean(db.iter().copied()),
                median_snr_db: percentile(&sorted, 0.5),
                p10_snr_db: percentile(&sorted, 0.1),
                p90_snr_db: percentile(&sorted, 0.9),
                no_signal: rs.len() - db.len(),
                mean_gap_db: mean(gaps.iter().copied()),
                mean_time_s: mean(rs.iter().map(|r| r.time_s)).unwrap_or(0.0),
                cdf,
            }
        })
        .collect();
    Ok(Summary { cells })
}

pub const CSV_HEADER: [&str; 8] = [
    "trial", "seed", "N", "B", "method", "value", "snr_db", "time_s",
];

pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.trial.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            r.bits.to_string(),
            r.method.name().to_string(),
            r.value.to_string(),
            r.snr_db.to_string(),
            r.time_s.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl<W: Write>(records: &[TrialRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::Io(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(methods: Vec<BenchMethod>, n: usize, bits: u32, trials: usize) -> ExperimentPlan {
        ExperimentPlan {
            model: ChannelModel::Gaussian { variance: 1.0 },
            n: vec![n],
            bits: vec![bits],
            methods,
            trials,
            seed: 7,
            power_dbm: 30.0,
            noise_dbm: -90.0,
            timing: false,
        }
    }

    fn record(trial: usize, snr: f64) -> TrialRecord {
        TrialRecord {
            trial,
            seed: 0,
            n: 4,
            bits: 1,
            method: BenchMethod::Das,
            value: 1.0,
            snr_db: SnrDb::Db(snr),
            time_s: 0.0,
            channel_hash: 0,
            bound: 1.0,
        }
    }

    #[test]
    fn das_matches_exhaustive_in_every_record() {
        let p = plan(vec![BenchMethod::Das, BenchMethod::Exhaustive], 8, 1, 100);
        let recs = run_plan(&p).unwrap();
        assert_eq!(recs.len(), 200);
        for pair in recs.chunks(2) {
            assert_eq!(pair[0].method, BenchMethod::Das);
            assert_eq!(pair[0].channel_hash, pair[1].channel_hash);
            assert!((pair[0].value - pair[1].value).abs() <= 1e-9 * pair[1].value);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let p = plan(
            vec![BenchMethod::Das, BenchMethod::QuantizedAlignment],
            16,
            2,
            1,
        );
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_csv(&run_plan(&p).unwrap(), &mut a).unwrap();
        write_csv(&run_plan(&p).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn records_are_trial_major_and_paired() {
        let mut p = plan(vec![BenchMethod::Das, BenchMethod::Continuous], 10, 1, 5);
        p.n = vec![4, 10];
        p.bits = vec![1, 2];
        let recs = run_plan(&p).unwrap();
        assert_eq!(recs.len(), 5 * 2 * 2 * 2);
        assert!(recs.windows(2).all(|w| w[0].trial <= w[1].trial));
        for w in recs.windows(2) {
            if w[0].trial == w[1].trial && w[0].n == w[1].n {
                assert_eq!(w[0].channel_hash, w[1].channel_hash);
                assert_eq!(w[0].seed, w[1].seed);
            }
        }
        for r in &recs {
            let expect = snr_db(r.value, 30.0, -90.0);
            assert_eq!(r.snr_db, expect);
        }
    }

    #[test]
    fn validation_failures() {
        let mut p = plan(vec![BenchMethod::Das], 4, 1, 0);
        assert!(matches!(run_plan(&p), Err(Error::InvalidPlan(_))));
        p.trials = 1;
        p.methods.clear();
        assert!(p.validate().is_err());
        let p = plan(vec![BenchMethod::Exhaustive], 12, 2, 1);
        // 13 slots with the direct link: 4^13 > cap
        assert!(p.validate().is_err());
        let p = plan(vec![BenchMethod::Binary], 4, 2, 1);
        assert!(p.validate().is_err());
        let mut p = plan(vec![BenchMethod::Das], 4, 1, 1);
        p.model = ChannelModel::Model1 {
            tx_pos: [0.0; 3],
            ris_pos: [0.0; 3],
            rx_pos: [1.0, 0.0, 0.0],
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn aggregate_cdf_examples() {
        let s = aggregate(&[record(0, 3.0)]).unwrap();
        assert_eq!(s.cells[0].cdf, vec![(3.0, 1.0)]);
        let s = aggregate(&[record(0, 5.0), record(1, 2.0)]).unwrap();
        assert_eq!(s.cells[0].cdf, vec![(2.0, 0.5), (5.0, 1.0)]);
        assert_eq!(s.cells[0].median_snr_db, Some(2.0));
        assert!(matches!(aggregate(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn aggregate_counts_no_signal() {
        let mut r = record(0, 0.0);
        r.snr_db = SnrDb::NoSignal;
        r.value = 0.0;
        let s = aggregate(&[r, record(1, 1.0)]).unwrap();
        assert_eq!(s.cells[0].no_signal, 1);
        assert_eq!(s.cells[0].cdf.len(), 1);
        assert_eq!(s.cells[0].mean_snr_db, Some(1.0));
    }

    #[test]
    fn csv_header_and_sentinel() {
        let mut r = record(0, 0.0);
        r.snr_db = SnrDb::NoSignal;
        let mut buf = Vec::new();
        write_csv(&[r.clone()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("trial,seed,N,B,method,value,snr_db,time_s")
        );
        assert_eq!(lines.next(), Some("0,0,4,1,das,1,-inf,0"));

        let mut buf = Vec::new();
        write_jsonl(&[r.clone()], &mut buf).unwrap();
        let back: TrialRecord = serde_json::from_slice(buf.trim_ascii_end()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn plan_json_roundtrip() {
        let json = r#"{"model":{"kind":"gaussian"},"n":[8],"bits":[1],
            "methods":["das","exhaustive"],"trials":3,"seed":1}"#;
        let p: ExperimentPlan = serde_json::from_str(json).unwrap();
        assert_eq!(p.model, ChannelModel::Gaussian { variance: 1.0 });
        assert!(!p.timing);
        assert_eq!(p.noise_dbm, -90.0);
        p.validate().unwrap();
    }

    #[test]
    fn model2_plan_runs() {
        let mut p = plan(vec![BenchMethod::Das, BenchMethod::Exhaustive], 6, 1, 3);
        p.model = ChannelModel::Model2 {
            wavelength: 0.062,
            spacing: 0.027,
            paths: 2,
        };
        let recs = run_plan(&p).unwrap();
        for pair in recs.chunks(2) {
            assert!((pair[0].value - pair[1].value).abs() <= 1e-9 * pair[1].value);
        }
    }
}
