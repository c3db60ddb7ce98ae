use serde::{Deserialize, Deserializer, Serialize};

use super::profile::{AxiomProfile, Control};
use super::Space;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// `n` labeled points with a distance matrix and an optional control matrix.
///
/// Points are identified by index; labels are for display. Construction
/// enforces shape, `P >= 0` and `Theta >= 1`. Whether the axioms of the
/// declared profile actually hold is the checker's business.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteSpace {
    #[serde(flatten)]
    declared: AxiomProfile,
    labels: Vec<String>,
    #[serde(rename = "P")]
    p: SquareMatrix,
    #[serde(rename = "Theta", skip_serializing_if = "Option::is_none")]
    theta: Option<SquareMatrix>,
    /// Coordinates of the points when the space is a grid sample.
    #[serde(skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<f64>>,
}

impl FiniteSpace {
    pub fn new(
        labels: Vec<String>,
        p: SquareMatrix,
        theta: Option<SquareMatrix>,
        declared: AxiomProfile,
    ) -> Result<Self> {
        let n = labels.len();
        if p.dim() != n {
            return Err(Error::Construction(format!(
                "P is {0}x{0} but there are {n} labels",
                p.dim()
            )));
        }
        if let Some(((i, j), v)) = p.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Construction(format!(
                "P({i},{j}) = {v} is not a finite nonnegative real"
            )));
        }
        if let Some(t) = &theta {
            if t.dim() != n {
                return Err(Error::Construction(format!(
                    "Theta is {0}x{0} but there are {n} labels",
                    t.dim()
                )));
            }
            if let Some(((i, j), v)) = t.iter().find(|(_, v)| !(v.is_finite() && *v >= 1.0)) {
                return Err(Error::Construction(format!(
                    "Theta({i},{j}) = {v} is not a finite real >= 1"
                )));
            }
        }
        Ok(Self {
            declared,
            labels,
            p,
            theta,
            coords: None,
        })
    }

    /// Labels `0..n` with the given matrices.
    pub fn unlabeled(
        p: SquareMatrix,
        theta: Option<SquareMatrix>,
        declared: AxiomProfile,
    ) -> Result<Self> {
        let labels = (0..p.dim()).map(|i| i.to_string()).collect();
        Self::new(labels, p, theta, declared)
    }

    pub(crate) fn with_coords(mut self, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len(), self.labels.len());
        self.coords = Some(coords);
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn declared(&self) -> AxiomProfile {
        self.declared
    }

    pub fn distance_matrix(&self) -> &SquareMatrix {
        &self.p
    }

    pub fn theta_matrix(&self) -> Option<&SquareMatrix> {
        self.theta.as_ref()
    }

    pub fn coords(&self) -> Option<&[f64]> {
        self.coords.as_deref()
    }

    /// Index of the grid point with exactly this coordinate.
    pub fn index_of_coord(&self, x: f64) -> Option<usize> {
        self.coords.as_ref()?.iter().position(|&c| c == x)
    }

    pub fn with_theta(&self, theta: SquareMatrix) -> Result<Self> {
        let mut out = Self::new(
            self.labels.clone(),
            self.p.clone(),
            Some(theta),
            self.declared,
        )?;
        out.coords = self.coords.clone();
        Ok(out)
    }

    pub fn with_declared(&self, declared: AxiomProfile) -> Self {
        Self {
            declared,
            ..self.clone()
        }
    }

    /// The control matrix, materialized from the declared profile when absent.
    pub fn control_matrix(&self) -> Result<SquareMatrix> {
        if let Some(t) = &self.theta {
            return Ok(t.clone());
        }
        match self.declared.control() {
            Control::Constant(s) => Ok(SquareMatrix::filled(self.len(), s)),
            Control::Matrix => Err(Error::Configuration(format!(
                "space declared {} has no Theta matrix",
                self.declared
            ))),
        }
    }

    /// Restriction to the points in `keep` (in that order).
    pub fn subspace(&self, keep: &[usize]) -> Self {
        Self {
            declared: self.declared,
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            p: self.p.submatrix(keep),
            theta: self.theta.as_ref().map(|t| t.submatrix(keep)),
            coords: self
                .coords
                .as_ref()
                .map(|c| keep.iter().map(|&i| c[i]).collect()),
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(self.domain_error(i))
        }
    }
}

impl Space for FiniteSpace {
    type Point = usize;

    fn p(&self, x: usize, y: usize) -> Result<f64> {
        self.check_index(x)?;
        self.check_index(y)?;
        Ok(self.p.get(x, y))
    }

    fn theta(&self, x: usize, y: usize) -> Result<f64> {
        self.check_index(x)?;
        self.check_index(y)?;
        match (&self.theta, self.declared.control()) {
            (Some(t), _) => Ok(t.get(x, y)),
            (None, Control::Constant(s)) => Ok(s),
            (None, Control::Matrix) => Err(Error::Configuration(format!(
                "space declared {} has no Theta matrix",
                self.declared
            ))),
        }
    }

    fn contains(&self, x: usize) -> bool {
        x < self.len()
    }

    fn domain_label(&self) -> String {
        format!("{{0..{}}}", self.len())
    }

    fn size(&self) -> Option<usize> {
        Some(self.len())
    }

    fn sample(&self, _n: usize) -> Vec<usize> {
        (0..self.len()).collect()
    }
}

#[derive(Deserialize)]
struct FiniteRepr {
    #[serde(flatten)]
    declared: AxiomProfile,
    #[serde(default, deserialize_with = "labels_any")]
    labels: Option<Vec<String>>,
    #[serde(rename = "P")]
    p: SquareMatrix,
    #[serde(rename = "Theta", default)]
    theta: Option<SquareMatrix>,
    #[serde(default)]
    coords: Option<Vec<f64>>,
}

// Labels may be written as strings or numbers.
fn labels_any<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<Option<Vec<String>>, D::Error> {
    let raw = Option::<Vec<serde_json::Value>>::deserialize(d)?;
    Ok(raw.map(|vals| {
        vals.into_iter()
            .map(|v| match v {
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            })
            .collect()
    }))
}

impl<'de> Deserialize<'de> for FiniteSpace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FiniteRepr::deserialize(d)?;
        let labels = repr
            .labels
            .unwrap_or_else(|| (0..repr.p.dim()).map(|i| i.to_string()).collect());
        let mut space = FiniteSpace::new(labels, repr.p, repr.theta, repr.declared)
            .map_err(serde::de::Error::custom)?;
        if let Some(c) = repr.coords {
            if c.len() != space.len() {
                return Err(serde::de::Error::custom(
                    "coords length differs from labels",
                ));
            }
            space.coords = Some(c);
        }
        Ok(space)
    }
}

/// The induced extended b-metric: same labels and control, diagonal zeroed.
///
/// A space without a stored control matrix gets its declared constant
/// materialized, so the result can always be checked under the
/// extended b-metric profile.
pub fn induced_ebm(space: &FiniteSpace) -> FiniteSpace {
    let p = &space.p;
    let d = SquareMatrix::from_fn(space.len(), |i, j| if i == j { 0.0 } else { p.get(i, j) });
    let theta = match space.control_matrix() {
        Ok(t) => Some(t),
        Err(_) => space.theta.clone(),
    };
    FiniteSpace {
        declared: AxiomProfile::ExtendedBMetric,
        labels: space.labels.clone(),
        p: d,
        theta,
        coords: space.coords.clone(),
    }
}
