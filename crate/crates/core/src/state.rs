//! Reserve states, the Pareto order, log coordinates and weighted-product
//! invariants.
//!
//! All values are immutable; operations return new values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ w_i = 1` accepted by [`WeightVector::new`].
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// `a` and `b` agree to within `tol` relative to the larger magnitude.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Coordinate-wise [`rel_close`]; slices of different length never agree.
pub fn rel_close_all(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(&p, &q)| rel_close(p, q, tol))
}

/// Largest coordinate-wise relative deviation between two vectors.
pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&p, &q)| {
            if p == q {
                0.0
            } else {
                (p - q).abs() / p.abs().max(q.abs())
            }
        })
        .fold(0.0, f64::max)
}

/// A two-asset reserve pair `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reserve2 {
    pub x: f64,
    pub y: f64,
}

impl Reserve2 {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::MalformedInput(format!(
                "non-finite reserve ({x}, {y})"
            )));
        }
        Ok(Self { x, y })
    }

    pub fn is_valid(&self) -> bool {
        self.x > 0.0 && self.y > 0.0
    }

    /// The token relabeling `(x, y) -> (y, x)`.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y,
            y: self.x,
        }
    }
}

impl From<Reserve2> for ReserveN {
    fn from(s: Reserve2) -> Self {
        ReserveN(vec![s.x, s.y])
    }
}

impl TryFrom<&ReserveN> for Reserve2 {
    type Error = Error;

    fn try_from(s: &ReserveN) -> Result<Self> {
        match s.as_slice() {
            &[x, y] => Ok(Reserve2 { x, y }),
            other => Err(Error::Usage(format!(
                "expected a two-asset state, got {} coordinates",
                other.len()
            ))),
        }
    }
}

/// A reserve vector with `n >= 2` finite coordinates.
///
/// Finiteness is enforced on construction. Positivity is not: invalid
/// states (e.g. the output of a constant-sum swap that drains a reserve)
/// are representable so that validity can be checked as a property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ReserveN(Vec<f64>);

impl ReserveN {
    pub fn new(reserves: Vec<f64>) -> Result<Self> {
        if reserves.len() < 2 {
            return Err(Error::MalformedInput(format!(
                "a state needs at least 2 coordinates, got {}",
                reserves.len()
            )));
        }
        if let Some(bad) = reserves.iter().find(|v| !v.is_finite()) {
            return Err(Error::MalformedInput(format!(
                "non-finite reserve coordinate {bad}"
            )));
        }
        Ok(Self(reserves))
    }

    /// The state with every coordinate equal to one.
    pub fn ones(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Valid iff every coordinate is strictly positive.
    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|&v| v > 0.0)
    }

    pub(crate) fn require_valid(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid state {:?}", self.0)))
        }
    }

    /// Coordinate-wise natural logarithm.
    pub fn log_map(&self) -> Result<LogPoint> {
        self.require_valid()?;
        Ok(LogPoint(self.0.iter().map(|v| v.ln()).collect()))
    }

    /// Coordinate-wise product with `factors`. Defined on every finite
    /// state, valid or not, like the unit change it models.
    pub fn scale(&self, factors: &[f64]) -> Result<ReserveN> {
        if factors.len() != self.dim() {
            return Err(Error::Usage(format!(
                "{} scale factors for a {}-asset state",
                factors.len(),
                self.dim()
            )));
        }
        if let Some(bad) = factors.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(Error::Domain(format!("scale factor {bad} is not positive")));
        }
        ReserveN::new(self.0.iter().zip(factors).map(|(v, f)| v * f).collect())
            .map_err(|e| Error::Range(e.to_string()))
    }

    /// Pareto order `self ⪰ other`: every coordinate at least as large.
    /// Exact comparison.
    pub fn pareto_geq(&self, other: &ReserveN) -> Result<bool> {
        if self.dim() != other.dim() {
            return Err(Error::Usage(format!(
                "cannot compare a {}-asset state with a {}-asset state",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.0.iter().zip(&other.0).all(|(t, s)| t >= s))
    }

    /// Weighted product `∏ s_i^{w_i}`, evaluated as `exp(Σ w_i ln s_i)`.
    pub fn phi(&self, w: &WeightVector) -> Result<f64> {
        if w.dim() != self.dim() {
            return Err(Error::Usage(format!(
                "{} weights for a {}-asset state",
                w.dim(),
                self.dim()
            )));
        }
        self.require_valid()?;
        Ok(log_phi(&self.0, w.as_slice()).exp())
    }

    /// Copy with coordinate `i` replaced.
    pub fn with(&self, i: usize, value: f64) -> Result<ReserveN> {
        let mut v = self.0.clone();
        v[i] = value;
        ReserveN::new(v)
    }
}

impl TryFrom<Vec<f64>> for ReserveN {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        ReserveN::new(v)
    }
}

impl From<ReserveN> for Vec<f64> {
    fn from(s: ReserveN) -> Self {
        s.0
    }
}

pub(crate) fn log_phi(reserves: &[f64], weights: &[f64]) -> f64 {
    reserves.iter().zip(weights).map(|(s, w)| w * s.ln()).sum()
}

/// A point in log-reserve coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogPoint(Vec<f64>);

impl LogPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::MalformedInput(format!(
                "a log point needs at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedInput("non-finite log coordinate".into()));
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Coordinate-wise exponential. Overflow to infinity or underflow to
    /// zero is a range error.
    pub fn exp_map(&self) -> Result<ReserveN> {
        let out: Vec<f64> = self.0.iter().map(|u| u.exp()).collect();
        if out.iter().any(|v| !v.is_finite() || *v == 0.0) {
            return Err(Error::Range(format!(
                "log point {:?} is outside the representable reserve range",
                self.0
            )));
        }
        ReserveN::new(out)
    }
}

/// Positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.len() < 2 {
            return Err(Error::Config(format!(
                "need at least 2 weights, got {}",
                w.len()
            )));
        }
        if let Some(bad) = w.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::Config(format!("weight {bad} is outside (0, 1)")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::Config(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(w))
    }

    /// `(w, 1 - w)`.
    pub fn two_asset(w: f64) -> Result<Self> {
        Self::new(vec![w, 1.0 - w])
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    /// Normalizes positive raw values to sum to one.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        let sum: f64 = raw.iter().sum();
        Self::new(raw.iter().map(|v| v / sum).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        WeightVector::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, LN_2};

    fn s(v: &[f64]) -> ReserveN {
        ReserveN::new(v.to_vec()).unwrap()
    }

    #[test]
    fn validity() {
        assert!(s(&[1.0, 1.0]).is_valid());
        assert!(!s(&[2.0, 0.0]).is_valid());
        assert!(!s(&[1.0, -0.5, 3.0]).is_valid());
        assert!(matches!(
            ReserveN::new(vec![1.0, f64::NAN]),
            Err(Error::MalformedInput(_))
        ));
        assert!(matches!(
            ReserveN::new(vec![f64::INFINITY, 1.0]),
            Err(Error::MalformedInput(_))
        ));
        assert!(ReserveN::new(vec![1.0]).is_err());
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn log_and_exp_examples() {
        assert_eq!(s(&[1.0, 1.0]).log_map().unwrap().as_slice(), &[0.0, 0.0]);
        assert_eq!(s(&[E, 1.0]).log_map().unwrap().as_slice(), &[1.0, 0.0]);
        let z = s(&[2.0, 0.5]).log_map().unwrap();
        assert!((z.as_slice()[0] - 0.693147).abs() < 1e-6);
        assert!((z.as_slice()[1] + 0.693147).abs() < 1e-6);
        assert!(matches!(s(&[2.0, 0.0]).log_map(), Err(Error::Domain(_))));

        let p = LogPoint::new(vec![0.0, 0.0]).unwrap().exp_map().unwrap();
        assert_eq!(p.as_slice(), &[1.0, 1.0]);
        let p = LogPoint::new(vec![1.0, 0.0]).unwrap().exp_map().unwrap();
        assert_eq!(p.as_slice(), &[E, 1.0]);
        let p = LogPoint::new(vec![LN_2, -LN_2]).unwrap().exp_map().unwrap();
        assert!(rel_close_all(p.as_slice(), &[2.0, 0.5], 1e-15));
        assert!(matches!(
            LogPoint::new(vec![800.0, 0.0]).unwrap().exp_map(),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            LogPoint::new(vec![-800.0, 0.0]).unwrap().exp_map(),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn scale_examples() {
        assert_eq!(
            s(&[1.0, 1.0]).scale(&[2.0, 3.0]).unwrap().as_slice(),
            &[2.0, 3.0]
        );
        assert_eq!(
            s(&[2.0, 0.5]).scale(&[0.5, 2.0]).unwrap().as_slice(),
            &[1.0, 1.0]
        );
        assert_eq!(
            s(&[1.0, 1.0, 1.0])
                .scale(&[2.0, 2.0, 2.0])
                .unwrap()
                .as_slice(),
            &[2.0, 2.0, 2.0]
        );
        assert!(matches!(
            s(&[1.0, 1.0]).scale(&[0.0, 1.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            s(&[1.0, 1.0]).scale(&[-2.0, 1.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(s(&[1.0, 1.0]).scale(&[1.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn pareto_examples() {
        assert!(s(&[2.0, 1.0]).pareto_geq(&s(&[1.0, 1.0])).unwrap());
        assert!(!s(&[2.0, 0.5]).pareto_geq(&s(&[1.0, 1.0])).unwrap());
        assert!(s(&[3.0, 7.0]).pareto_geq(&s(&[3.0, 7.0])).unwrap());
        assert!(matches!(
            s(&[1.0, 1.0]).pareto_geq(&s(&[1.0, 1.0, 1.0])),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn phi_examples() {
        let half = WeightVector::two_asset(0.5).unwrap();
        assert_eq!(s(&[1.0, 1.0]).phi(&half).unwrap(), 1.0);
        assert!(rel_close(s(&[4.0, 1.0]).phi(&half).unwrap(), 2.0, 1e-15));
        let w3 = WeightVector::new(vec![0.5, 0.3, 0.2]).unwrap();
        assert_eq!(s(&[1.0, 1.0, 1.0]).phi(&w3).unwrap(), 1.0);
        assert!(matches!(s(&[0.0, 1.0]).phi(&half), Err(Error::Domain(_))));
        assert!(matches!(s(&[1.0, 1.0]).phi(&w3), Err(Error::Usage(_))));
    }

    #[test]
    fn phi_does_not_overflow_on_huge_reserves() {
        let half = WeightVector::two_asset(0.5).unwrap();
        let v = s(&[1e300, 1e300]).phi(&half).unwrap();
        assert!(rel_close(v, 1e300, 1e-12));
    }

    #[test]
    fn weight_vector_rules() {
        assert!(WeightVector::two_asset(0.0).is_err());
        assert!(WeightVector::two_asset(1.0).is_err());
        assert!(WeightVector::new(vec![0.5, 0.4]).is_err());
        assert!(WeightVector::new(vec![0.5]).is_err());
        assert!(WeightVector::uniform(3).is_ok());
        assert!(WeightVector::uniform(6).is_ok());
        let w = WeightVector::normalized(&[2.0, 1.0, 1.0]).unwrap();
        assert_eq!(w.as_slice(), &[0.5, 0.25, 0.25]);
    }

    #[test]
    fn reserve2_conversions() {
        let r = Reserve2::new(2.0, 3.0).unwrap();
        let n: ReserveN = r.into();
        assert_eq!(Reserve2::try_from(&n).unwrap(), r);
        assert_eq!(r.swapped(), Reserve2 { x: 3.0, y: 2.0 });
        assert!(Reserve2::try_from(&s(&[1.0, 1.0, 1.0])).is_err());
        assert!(Reserve2::new(f64::NAN, 1.0).is_err());
    }
}
