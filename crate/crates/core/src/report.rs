//! JSON and CSV renderings of reports and samples.
//!
//! Floating-point values go out at full precision: JSON uses the shortest
//! round-trip representation, CSV uses 17 significant digits.

use serde::Serialize;

use crate::classify::OrbitSample;
use crate::fees::DriftSeries;

/// Version of the report layouts, emitted as `spec_version`.
pub const SPEC_VERSION: &str = "1";

/// 17 significant digits in scientific notation.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Header `x1,...,xn,u1,...,un`, one row per state.
pub fn orbit_csv(sample: &OrbitSample) -> String {
    states_csv(
        sample.dim(),
        sample
            .states
            .iter()
            .zip(&sample.log_points)
            .map(|(s, z)| (s.as_slice().to_vec(), z.as_slice().to_vec())),
    )
}

/// CSV of raw states and their logs, for partial samples.
pub fn raw_states_csv(states: &[Vec<f64>]) -> String {
    let n = states.first().map_or(2, Vec::len);
    states_csv(
        n,
        states
            .iter()
            .map(|s| (s.clone(), s.iter().map(|v| v.ln()).collect())),
    )
}

fn states_csv<I: Iterator<Item = (Vec<f64>, Vec<f64>)>>(n: usize, rows: I) -> String {
    let header: Vec<String> = (1..=n)
        .map(|k| format!("x{k}"))
        .chain((1..=n).map(|k| format!("u{k}")))
        .collect();
    let mut out = header.join(",");
    out.push('\n');
    for (xs, us) in rows {
        let cells: Vec<String> = xs.iter().chain(&us).map(|v| fmt17(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Header `step,x,y,phi`.
pub fn drift_csv(series: &DriftSeries) -> String {
    let mut out = String::from("step,x,y,phi\n");
    for (step, (s, phi)) in series
        .states
        .iter()
        .zip(&series.invariant_values)
        .enumerate()
    {
        out.push_str(&format!(
            "{step},{},{},{}\n",
            fmt17(s.x),
            fmt17(s.y),
            fmt17(*phi)
        ));
    }
    out
}
