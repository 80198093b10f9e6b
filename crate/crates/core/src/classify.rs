//! Sampling trading orbits and recovering their log-space geometry.
//!
//! Fee-free orbits of a conforming rule are level sets of a weighted
//! product, which in log coordinates are parallel lines (two assets) or
//! parallel hyperplanes with a positive normal (n assets). The fits here
//! are total least squares: the line follows the principal direction of the
//! centered log cloud and the hyperplane normal is its direction of least
//! variance.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{log_uniform, log_uniform_state, token_pair, trial_rng, AUX_STREAM};
use crate::state::{LogPoint, ReserveN, WeightVector};
use crate::swap::{swap, SwapRule};

/// Minimum number of swaps in a sampled orbit.
pub const MIN_ORBIT_SWAPS: usize = 8;

/// Swap sizes while sampling, relative to the input reserve.
pub const ORBIT_AMOUNT_RANGE: (f64, f64) = (1e-3, 1.0);

/// Points (or spreads) closer than this in log units are indistinct.
pub const DISTINCT_LOG_THRESHOLD: f64 = 1e-10;

/// Normal components must exceed this before weights are formed.
pub const NORMAL_POSITIVITY_THRESHOLD: f64 = 1e-9;

/// Range of the extra orbit starts drawn by [`default_starts`].
pub const START_RANGE: (f64, f64) = (1e-2, 1e2);

const RESIDUAL_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            samples: 64,
            seed: 0,
            tolerance: 1e-9,
        }
    }
}

/// States visited by one seeded swap chain, with their log images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub rule: String,
    pub start: ReserveN,
    pub states: Vec<ReserveN>,
    pub log_points: Vec<LogPoint>,
    pub seed: u64,
}

impl OrbitSample {
    fn from_states(rule: String, states: Vec<ReserveN>, seed: u64) -> Result<Self> {
        let log_points = states
            .iter()
            .map(ReserveN::log_map)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rule,
            start: states[0].clone(),
            states,
            log_points,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.start.dim()
    }
}

fn walk<R, F>(rule: &R, s0: &ReserveN, count: usize, seed: u64, mut pick: F) -> Result<OrbitSample>
where
    R: SwapRule + ?Sized,
    F: FnMut(usize, &mut rand_chacha::ChaCha8Rng) -> (usize, usize),
{
    if count < MIN_ORBIT_SWAPS {
        return Err(Error::Usage(format!(
            "orbit samples need at least {MIN_ORBIT_SWAPS} swaps, got {count}"
        )));
    }
    s0.require_valid()?;
    let mut rng = trial_rng(seed, 0);
    let mut states = vec![s0.clone()];
    for step in 0..count {
        let current = states.last().expect("non-empty");
        let (i, j) = pick(step, &mut rng);
        let amount =
            current.get(i) * log_uniform(&mut rng, ORBIT_AMOUNT_RANGE.0, ORBIT_AMOUNT_RANGE.1);
        let next = swap(rule, current, i, j, amount).and_then(|t| {
            if rule.in_domain(&t) && t.is_valid() {
                Ok(t)
            } else {
                Err(Error::Domain(format!("swap reached {:?}", t.as_slice())))
            }
        });
        match next {
            Ok(t) => states.push(t),
            Err(e) => {
                return Err(Error::Sampling {
                    reason: format!("step {}: {e}", step + 1),
                    states: states.iter().map(|s| s.as_slice().to_vec()).collect(),
                })
            }
        }
    }
    OrbitSample::from_states(rule.name(), states, seed)
}

/// Runs `count` seeded forward swaps from `s0` and records every state.
/// Two-asset rules alternate X-in and Y-in; larger rules draw a random
/// token pair per step.
pub fn sample_orbit<R: SwapRule + ?Sized>(
    rule: &R,
    s0: &ReserveN,
    count: usize,
    seed: u64,
) -> Result<OrbitSample> {
    let n = rule.dimension();
    walk(rule, s0, count, seed, |step, rng| {
        if n == 2 {
            if step % 2 == 0 {
                (0, 1)
            } else {
                (1, 0)
            }
        } else {
            token_pair(rng, n)
        }
    })
}

/// Like [`sample_orbit`] but only swaps tokens `i` and `j`, alternating
/// direction, so the sample stays on the two-token slice through `p`.
pub fn sample_slice<R: SwapRule + ?Sized>(
    rule: &R,
    p: &ReserveN,
    i: usize,
    j: usize,
    count: usize,
    seed: u64,
) -> Result<OrbitSample> {
    walk(rule, p, count, seed, |step, _| {
        if step % 2 == 0 {
            (i, j)
        } else {
            (j, i)
        }
    })
}

/// Total-least-squares line `v = slope·u + intercept` in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest orthogonal distance of a point from the line.
    pub residual: f64,
    /// `-slope`, present only for negative slopes.
    pub c: Option<f64>,
}

/// Fits a line through `(u, v)` points along the principal direction of
/// the centered cloud.
pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    let (u0, v0) = *points
        .first()
        .ok_or_else(|| Error::DegenerateSample("no points".into()))?;
    let spread = points
        .iter()
        .map(|(u, v)| (u - u0).hypot(v - v0))
        .fold(0.0, f64::max);
    if spread <= DISTINCT_LOG_THRESHOLD {
        return Err(Error::DegenerateSample(format!(
            "fewer than 2 distinct log points among {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mu = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut suu, mut svv, mut suv) = (0.0, 0.0, 0.0);
    for (u, v) in points {
        let (du, dv) = (u - mu, v - mv);
        suu += du * du;
        svv += dv * dv;
        suv += du * dv;
    }
    let theta = 0.5 * (2.0 * suv).atan2(suu - svv);
    let (sin, cos) = theta.sin_cos();
    if cos.abs() <= f64::EPSILON * sin.abs() {
        return Err(Error::VerticalFit);
    }
    let slope = sin / cos;
    let residual = points
        .iter()
        .map(|(u, v)| (-sin * (u - mu) + cos * (v - mv)).abs())
        .fold(0.0, f64::max);
    Ok(LineFit {
        slope,
        intercept: mv - slope * mu,
        residual,
        c: (slope < 0.0).then_some(-slope),
    })
}

/// Line fit of a two-asset sample.
pub fn fit_log_line(sample: &OrbitSample) -> Result<LineFit> {
    if sample.dim() != 2 {
        return Err(Error::Usage(format!(
            "line fits need two-asset samples, got {} coordinates",
            sample.dim()
        )));
    }
    fit_coordinate_line(sample, 0, 1)
}

fn fit_coordinate_line(sample: &OrbitSample, i: usize, j: usize) -> Result<LineFit> {
    let pts: Vec<(f64, f64)> = sample
        .log_points
        .iter()
        .map(|z| (z.as_slice()[i], z.as_slice()[j]))
        .collect();
    fit_line(&pts)
}

/// `w = c / (1 + c)`.
pub fn weight_from_slope(c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!(
            "slope parameter {c} is not positive; the log orbit is not strictly decreasing"
        )));
    }
    Ok(c / (1.0 + c))
}

/// A log-space hyperplane `⟨normal, z⟩ = offset` with weights
/// `w_i = a_i / Σ a_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneFit {
    /// Unit length, all components positive.
    pub normal: Vec<f64>,
    pub offset: f64,
    /// Largest `|⟨normal, z⟩ - offset|` over the sample.
    pub residual: f64,
    pub weights: WeightVector,
}

/// Fits the hyperplane of least variance through the log points.
pub fn fit_log_hyperplane(sample: &OrbitSample) -> Result<HyperplaneFit> {
    let n = sample.dim();
    let m = sample.log_points.len();
    if m < n {
        return Err(Error::DegenerateSample(format!(
            "{m} points cannot span a hyperplane in {n} dimensions"
        )));
    }
    let mean: Vec<f64> = (0..n)
        .map(|k| {
            sample
                .log_points
                .iter()
                .map(|z| z.as_slice()[k])
                .sum::<f64>()
                / m as f64
        })
        .collect();
    let centered = DMatrix::from_fn(m, n, |r, k| sample.log_points[r].as_slice()[k] - mean[k]);
    let svd = nalgebra::SVD::new(centered, false, true);
    let sv = &svd.singular_values;
    // RMS spread along the second-least direction must be resolvable
    let rank_spread = sv[n - 2] / (m as f64).sqrt();
    if rank_spread <= DISTINCT_LOG_THRESHOLD {
        return Err(Error::DegenerateSample(format!(
            "centered log cloud has rank below {} (spread {rank_spread:e})",
            n - 1
        )));
    }
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut normal: Vec<f64> = v_t.row(n - 1).iter().copied().collect();
    let norm = normal.iter().map(|a| a * a).sum::<f64>().sqrt();
    let sign = if normal.iter().sum::<f64>() < 0.0 {
        -1.0
    } else {
        1.0
    };
    for a in &mut normal {
        *a *= sign / norm;
    }
    let offset: f64 = normal.iter().zip(&mean).map(|(a, u)| a * u).sum();
    let residual = sample
        .log_points
        .iter()
        .map(|z| (dot(&normal, z.as_slice()) - offset).abs())
        .fold(0.0, f64::max);
    if let Some(bad) = normal.iter().find(|a| **a <= NORMAL_POSITIVITY_THRESHOLD) {
        return Err(Error::Classification(format!(
            "hyperplane normal {normal:?} has non-positive component {bad:e}"
        )));
    }
    let weights = WeightVector::normalized(&normal)?;
    Ok(HyperplaneFit {
        normal,
        offset,
        residual,
        weights,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Whether every weight is within `tol` of `1/n`.
pub fn check_equal_weights(fit: &HyperplaneFit, tol: f64) -> bool {
    let w = fit.weights.as_slice();
    let target = 1.0 / w.len() as f64;
    w.iter().all(|wi| (wi - target).abs() <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitFit {
    pub start: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal: Option<Vec<f64>>,
    /// Line intercept, or hyperplane offset.
    pub intercept: Option<f64>,
    pub residual: Option<f64>,
    /// Invariant of the start under the pooled weights.
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl OrbitFit {
    fn failed(start: &ReserveN, why: String) -> Self {
        Self {
            start: start.as_slice().to_vec(),
            slope: None,
            normal: None,
            intercept: None,
            residual: None,
            phi: None,
            failure: Some(why),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub rule: String,
    /// Two-asset weight estimate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_hat: Option<f64>,
    /// Pooled weight vector (for two assets, `(w_hat, 1 - w_hat)`).
    pub weights: Option<Vec<f64>>,
    pub residual_max: f64,
    /// Largest pairwise deviation of per-orbit slopes (or normals).
    pub slope_spread: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub per_orbit: Vec<OrbitFit>,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

/// `(1, ..., 1)` followed by `count - 1` seeded log-uniform starts.
pub fn default_starts(n: usize, count: usize, seed: u64) -> Vec<ReserveN> {
    let mut rng = trial_rng(seed, AUX_STREAM);
    let mut starts = Vec::with_capacity(count);
    if count > 0 {
        starts.push(ReserveN::ones(n).expect("n >= 2"));
    }
    while starts.len() < count {
        starts.push(log_uniform_state(&mut rng, n, START_RANGE.0, START_RANGE.1));
    }
    starts
}

fn inverse_residual_mean(values: &[f64], residuals: &[f64]) -> f64 {
    let weights: Vec<f64> = residuals
        .iter()
        .map(|r| 1.0 / (r + RESIDUAL_FLOOR))
        .collect();
    let total: f64 = weights.iter().sum();
    values.iter().zip(&weights).map(|(v, w)| v * w).sum::<f64>() / total
}

/// Checks that the rule's orbits through `starts` are level sets of one
/// weighted product.
///
/// Orbit `k` is sampled with seed `cfg.seed + k`. Every fit must have a
/// strictly decreasing (positive-normal) geometry and a residual within
/// `cfg.tolerance`; all orbits must be parallel within `cfg.tolerance`;
/// and the invariant under the pooled weights must be constant on each
/// orbit. Starts whose invariants coincide are merged with a warning.
pub fn verify_level_sets<R: SwapRule + ?Sized>(
    rule: &R,
    starts: &[ReserveN],
    cfg: &ClassifyConfig,
) -> Result<ClassificationReport> {
    if starts.len() < 2 {
        return Err(Error::Usage(format!(
            "level-set verification needs at least 2 starts, got {}",
            starts.len()
        )));
    }
    let n = rule.dimension();
    if let Some(bad) = starts.iter().find(|s| s.dim() != n) {
        return Err(Error::Usage(format!(
            "start {:?} does not match the {n}-asset rule",
            bad.as_slice()
        )));
    }

    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    let mut fits = Vec::new();
    let mut samples = Vec::new();

    for (k, start) in starts.iter().enumerate() {
        let sample = match sample_orbit(rule, start, cfg.samples, cfg.seed.wrapping_add(k as u64)) {
            Ok(s) => s,
            Err(e @ Error::Sampling { .. }) | Err(e @ Error::Domain(_)) => {
                failures.push(format!("orbit {k}: {e}"));
                fits.push(OrbitFit::failed(start, e.to_string()));
                continue;
            }
            Err(e) => return Err(e),
        };
        let fit = if n == 2 {
            fit_log_line(&sample).map(|line| OrbitFit {
                start: start.as_slice().to_vec(),
                slope: Some(line.slope),
                normal: None,
                intercept: Some(line.intercept),
                residual: Some(line.residual),
                phi: None,
                failure: None,
            })
        } else {
            fit_log_hyperplane(&sample).map(|plane| OrbitFit {
                start: start.as_slice().to_vec(),
                slope: None,
                normal: Some(plane.normal),
                intercept: Some(plane.offset),
                residual: Some(plane.residual),
                phi: None,
                failure: None,
            })
        };
        match fit {
            Ok(f) => {
                fits.push(f);
                samples.push((fits.len() - 1, sample));
            }
            Err(e @ Error::Classification(_)) => {
                failures.push(format!("orbit {k}: {e}"));
                fits.push(OrbitFit::failed(start, e.to_string()));
            }
            Err(e) => return Err(e),
        }
    }

    let good: Vec<&OrbitFit> = fits.iter().filter(|f| f.failure.is_none()).collect();
    let residuals: Vec<f64> = good.iter().filter_map(|f| f.residual).collect();
    let residual_max = residuals.iter().copied().fold(0.0, f64::max);
    if residual_max > cfg.tolerance {
        failures.push(format!(
            "max residual {residual_max:e} exceeds tolerance {:e}",
            cfg.tolerance
        ));
    }

    let (pooled, slope_spread, w_hat) = if n == 2 {
        let slopes: Vec<f64> = good.iter().filter_map(|f| f.slope).collect();
        for (k, s) in slopes.iter().enumerate() {
            if *s >= 0.0 {
                failures.push(format!("orbit {k}: slope {s} is not negative"));
            }
        }
        let spread = spread(slopes.iter().map(|s| vec![*s]));
        if slopes.is_empty() {
            (None, spread, None)
        } else {
            let c = -inverse_residual_mean(&slopes, &residuals);
            match weight_from_slope(c) {
                Ok(w) => (Some(vec![w, 1.0 - w]), spread, Some(w)),
                Err(e) => {
                    failures.push(e.to_string());
                    (None, spread, None)
                }
            }
        }
    } else {
        let normals: Vec<Vec<f64>> = good.iter().filter_map(|f| f.normal.clone()).collect();
        let spread = spread(normals.iter().cloned());
        if normals.is_empty() {
            (None, spread, None)
        } else {
            let mean: Vec<f64> = (0..n)
                .map(|k| {
                    let comp: Vec<f64> = normals.iter().map(|a| a[k]).collect();
                    inverse_residual_mean(&comp, &residuals)
                })
                .collect();
            let total: f64 = mean.iter().sum();
            (Some(mean.iter().map(|a| a / total).collect()), spread, None)
        }
    };
    if slope_spread > cfg.tolerance {
        failures.push(format!(
            "orbits are not parallel: spread {slope_spread:e} exceeds tolerance {:e}",
            cfg.tolerance
        ));
    }

    if let Some(w) = pooled
        .as_ref()
        .and_then(|w| WeightVector::new(w.clone()).ok())
    {
        for (idx, sample) in &samples {
            let phis: Vec<f64> = sample
                .states
                .iter()
                .map(|s| s.phi(&w))
                .collect::<Result<_>>()?;
            let lo = phis.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = phis.iter().copied().fold(0.0, f64::max);
            if hi / lo - 1.0 > cfg.tolerance {
                failures.push(format!(
                    "orbit {idx}: invariant varies by {:e} along the orbit",
                    hi / lo - 1.0
                ));
            }
            fits[*idx].phi = Some(phis[0]);
        }
        // merge starts that landed on the same level set
        let mut kept: Vec<OrbitFit> = Vec::new();
        for fit in fits.drain(..) {
            let same = fit.phi.and_then(|p| {
                kept.iter()
                    .position(|k| k.phi.is_some_and(|q| (p / q - 1.0).abs() <= cfg.tolerance))
            });
            match same {
                Some(k) => warnings.push(format!(
                    "start {:?} lies on the same orbit as {:?}; merged",
                    fit.start, kept[k].start
                )),
                None => kept.push(fit),
            }
        }
        fits = kept;
        if fits.len() < 2 {
            failures.push("fewer than two distinct orbits remain after merging".into());
        }
    } else if pooled.is_some() {
        failures.push("pooled weights are not a valid weight vector".into());
    }

    let verdict = if failures.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ClassificationReport {
        rule: rule.name(),
        w_hat,
        weights: pooled,
        residual_max,
        slope_spread,
        tolerance: cfg.tolerance,
        verdict,
        per_orbit: fits,
        failures,
        warnings,
    })
}

fn spread<I: Iterator<Item = Vec<f64>>>(vectors: I) -> f64 {
    let vs: Vec<Vec<f64>> = vectors.collect();
    let mut worst: f64 = 0.0;
    for a in 0..vs.len() {
        for b in a + 1..vs.len() {
            for (p, q) in vs[a].iter().zip(&vs[b]) {
                worst = worst.max((p - q).abs());
            }
        }
    }
    worst
}

/// One two-token slice checked by [`check_slices`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSlice {
    pub i: usize,
    pub j: usize,
    pub slope: Option<f64>,
    pub residual: Option<f64>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// States of the offending chain, when the pair failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub rule: String,
    pub base: Vec<f64>,
    pub pairs: Vec<PairSlice>,
    pub passed: bool,
}

impl SliceReport {
    pub fn slope(&self, i: usize, j: usize) -> Option<f64> {
        self.pairs
            .iter()
            .find(|p| p.i == i && p.j == j)
            .and_then(|p| p.slope)
    }
}

/// Checks every two-token restriction through `p`: swapping only tokens
/// `i < j` must leave the other reserves untouched and trace a log line of
/// negative slope with residual within `cfg.tolerance`.
pub fn check_slices<R: SwapRule + ?Sized>(
    rule: &R,
    p: &ReserveN,
    cfg: &ClassifyConfig,
) -> Result<SliceReport> {
    p.require_valid()?;
    let n = rule.dimension();
    if n < 3 || p.dim() != n {
        return Err(Error::Usage(format!(
            "slice checks need a rule with at least 3 tokens and a matching base point; rule has {n}, base has {}",
            p.dim()
        )));
    }
    let mut pairs = Vec::new();
    let mut pair_index = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            let seed = cfg.seed.wrapping_add(pair_index);
            pair_index += 1;
            pairs.push(check_pair(rule, p, i, j, cfg, seed)?);
        }
    }
    let passed = pairs.iter().all(|p| p.passed);
    Ok(SliceReport {
        rule: rule.name(),
        base: p.as_slice().to_vec(),
        pairs,
        passed,
    })
}

fn check_pair<R: SwapRule + ?Sized>(
    rule: &R,
    p: &ReserveN,
    i: usize,
    j: usize,
    cfg: &ClassifyConfig,
    seed: u64,
) -> Result<PairSlice> {
    let fail = |why: String, states: Vec<Vec<f64>>| PairSlice {
        i,
        j,
        slope: None,
        residual: None,
        passed: false,
        failure: Some(why),
        witness: Some(states),
    };
    let sample = match sample_slice(rule, p, i, j, cfg.samples, seed) {
        Ok(s) => s,
        Err(Error::Sampling { reason, states }) => return Ok(fail(reason, states)),
        Err(e) => return Err(e),
    };
    let states = || {
        sample
            .states
            .iter()
            .map(|s| s.as_slice().to_vec())
            .collect()
    };
    let off_slice = sample.states.iter().find(|s| {
        (0..p.dim())
            .filter(|k| *k != i && *k != j)
            .any(|k| s.get(k) != p.get(k))
    });
    if let Some(s) = off_slice {
        return Ok(fail(
            format!("state {:?} left the ({i}, {j}) slice", s.as_slice()),
            states(),
        ));
    }
    let line = match fit_coordinate_line(&sample, i, j) {
        Ok(l) => l,
        Err(e) => return Ok(fail(e.to_string(), states())),
    };
    let mut problems = Vec::new();
    if line.slope >= 0.0 {
        problems.push(format!("slope {} is not negative", line.slope));
    }
    if line.residual > cfg.tolerance {
        problems.push(format!("residual {:e} exceeds tolerance", line.residual));
    }
    let passed = problems.is_empty();
    Ok(PairSlice {
        i,
        j,
        slope: Some(line.slope),
        residual: Some(line.residual),
        passed,
        failure: (!passed).then(|| problems.join("; ")),
        witness: (!passed).then(states),
    })
}

/// Draws `n` positive weights summing to one, each at least `floor`.
pub fn random_weights<G: Rng + ?Sized>(rng: &mut G, n: usize, floor: f64) -> Result<WeightVector> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0) + floor).collect();
    WeightVector::normalized(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swap::BuiltinRule;
    use std::f64::consts::LN_2;

    fn rule(spec: &str) -> BuiltinRule {
        spec.parse().unwrap()
    }

    fn s(v: &[f64]) -> ReserveN {
        ReserveN::new(v.to_vec()).unwrap()
    }

    #[test]
    fn line_fit_examples() {
        let f = fit_line(&[(0.0, 0.0), (LN_2, -LN_2), (-LN_2, LN_2)]).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-15);
        assert!(f.intercept.abs() < 1e-15);
        assert!(f.residual < 1e-15);
        assert!((f.c.unwrap() - 1.0).abs() < 1e-15);

        let f = fit_line(&[(0.0, 0.0), (LN_2, -4.0 * LN_2)]).unwrap();
        assert!((f.slope + 4.0).abs() < 1e-14);
        assert!(f.residual < 1e-15);

        assert!(matches!(
            fit_line(&[(0.3, 0.2), (0.3, 0.2), (0.3, 0.2)]),
            Err(Error::DegenerateSample(_))
        ));
        assert!(matches!(
            fit_line(&[(1.0, 0.0), (1.0, 2.0)]),
            Err(Error::VerticalFit)
        ));
    }

    #[test]
    fn positive_slope_has_no_c() {
        let f = fit_line(&[(0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert_eq!(f.c, None);
    }

    #[test]
    fn weight_from_slope_examples() {
        assert_eq!(weight_from_slope(1.0).unwrap(), 0.5);
        assert!((weight_from_slope(4.0).unwrap() - 0.8).abs() < 1e-16);
        assert!((weight_from_slope(0.25).unwrap() - 0.2).abs() < 1e-16);
        assert!(matches!(weight_from_slope(0.0), Err(Error::Domain(_))));
        assert!(matches!(weight_from_slope(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn sample_orbit_examples() {
        let r = rule("wgm:0.5");
        let o = sample_orbit(&r, &s(&[1.0, 1.0]), 8, 3).unwrap();
        assert_eq!(o.states.len(), 9);
        for st in &o.states {
            assert!((st.get(0) * st.get(1) - 1.0).abs() < 1e-12);
        }
        let o = sample_orbit(&r, &s(&[4.0, 0.25]), 8, 3).unwrap();
        for st in &o.states {
            assert!((st.get(0) * st.get(1) - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            sample_orbit(&r, &s(&[1.0, 1.0]), 7, 3),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn csum_orbit_sampling_leaves_domain() {
        // with the constant-sum rule the random walk hits the boundary
        let r = rule("csum");
        let err = sample_orbit(&r, &s(&[1.0, 1.0]), 256, 7).unwrap_err();
        let Error::Sampling { states, .. } = err else {
            panic!("expected a sampling error, got {err:?}")
        };
        assert!(!states.is_empty());
    }

    #[test]
    fn hyperplane_rejects_slice_confined_sample() {
        let r = rule("wprod:0.5,0.3,0.2");
        let slice = sample_slice(&r, &s(&[1.0, 1.0, 1.0]), 0, 1, 64, 1).unwrap();
        assert!(matches!(
            fit_log_hyperplane(&slice),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn hyperplane_matches_line_fit_in_two_dimensions() {
        let r = rule("wgm:0.3");
        let o = sample_orbit(&r, &s(&[2.0, 3.0]), 64, 9).unwrap();
        let line = fit_log_line(&o).unwrap();
        let plane = fit_log_hyperplane(&o).unwrap();
        let w = weight_from_slope(line.c.unwrap()).unwrap();
        assert!((plane.weights.as_slice()[0] - w).abs() < 1e-12);
        assert!((w - 0.3).abs() < 1e-12);
    }

    #[test]
    fn mixed_sign_normal_is_a_classification_failure() {
        // points on u1 - u2 + u3 = 0
        let pts = [
            [0.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 1.0],
            [1.0, 0.0, -1.0],
            [2.0, 1.0, -1.0],
        ];
        let states: Vec<ReserveN> = pts
            .iter()
            .map(|z| s(&z.iter().map(|u: &f64| u.exp()).collect::<Vec<_>>()))
            .collect();
        let sample = OrbitSample::from_states("synthetic".into(), states, 0).unwrap();
        assert!(matches!(
            fit_log_hyperplane(&sample),
            Err(Error::Classification(_))
        ));
    }

    #[test]
    fn equal_weight_checks() {
        let fit = |w: Vec<f64>| HyperplaneFit {
            normal: w.clone(),
            offset: 0.0,
            residual: 0.0,
            weights: WeightVector::new(w).unwrap(),
        };
        assert!(check_equal_weights(&fit(vec![1.0 / 3.0; 3]), 1e-9));
        assert!(!check_equal_weights(&fit(vec![0.5, 0.3, 0.2]), 1e-9));
        assert!(check_equal_weights(&fit(vec![0.25; 4]), 1e-9));
    }

    #[test]
    fn verify_needs_two_starts() {
        let r = rule("wgm:0.5");
        assert!(matches!(
            verify_level_sets(&r, &[s(&[1.0, 1.0])], &ClassifyConfig::default()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn coincident_starts_are_merged() {
        let r = rule("wgm:0.5");
        let starts = [s(&[1.0, 1.0]), s(&[4.0, 0.25]), s(&[2.0, 2.0])];
        let rep = verify_level_sets(&r, &starts, &ClassifyConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.failures);
        assert_eq!(rep.per_orbit.len(), 2);
        assert_eq!(rep.warnings.len(), 1);
    }

    #[test]
    fn slice_checks_need_three_tokens() {
        assert!(matches!(
            check_slices(
                &rule("wgm:0.5"),
                &s(&[1.0, 1.0]),
                &ClassifyConfig::default()
            ),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn default_starts_begin_at_ones() {
        let st = default_starts(3, 5, 7);
        assert_eq!(st.len(), 5);
        assert_eq!(st[0].as_slice(), &[1.0, 1.0, 1.0]);
        assert_eq!(st, default_starts(3, 5, 7));
    }
}
