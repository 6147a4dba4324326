use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Uniform physical grid x_k = x_min + k*h, k = 0..n_points, h = (x_max - x_min)/n_points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalGrid {
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl PhysicalGrid {
    pub fn new(n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        let g = PhysicalGrid { n_points, x_min, x_max };
        g.validate()?;
        Ok(g)
    }

    pub fn symmetric(n_points: usize, half_length: f64) -> Result<Self> {
        Self::new(n_points, -half_length, half_length)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 || !self.n_points.is_power_of_two() {
            return Err(Error::Grid(format!("n_points = {} is not a power of two", self.n_points)));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite()) || self.x_max <= self.x_min {
            return Err(Error::Grid(format!("bad window [{}, {}]", self.x_min, self.x_max)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn point(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.point(k)).collect()
    }
}

impl Default for PhysicalGrid {
    fn default() -> Self {
        PhysicalGrid { n_points: 4096, x_min: -200.0, x_max: 200.0 }
    }
}

/// Midpoint grid on the positive frequency half-line: xi_j = (j + 1/2) * xi_max / n_modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub n_modes: usize,
    pub xi_max: f64,
}

impl FrequencyGrid {
    pub fn new(n_modes: usize, xi_max: f64) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::Grid("n_modes must be positive".into()));
        }
        if !xi_max.is_finite() || xi_max <= 0.0 {
            return Err(Error::Grid(format!("xi_max = {xi_max} must be positive")));
        }
        Ok(FrequencyGrid { n_modes, xi_max })
    }

    pub fn spacing(&self) -> f64 {
        self.xi_max / self.n_modes as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_modes).map(|j| self.node(j)).collect()
    }

    /// The level used for the stability check: half the spacing, twice the extent.
    pub fn refined(&self) -> FrequencyGrid {
        FrequencyGrid { n_modes: 4 * self.n_modes, xi_max: 2.0 * self.xi_max }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Physical,
    Frequency,
}

/// Sampled complex function tagged with the domain it lives on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexField {
    pub domain: Domain,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        check_finite(&values)?;
        Ok(ComplexField { domain, values })
    }

    pub fn physical(grid: &PhysicalGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::Grid(format!("{} values on a {}-point grid", values.len(), grid.n_points)));
        }
        Self::new(Domain::Physical, values)
    }

    pub fn frequency(grid: &FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_modes {
            return Err(Error::Grid(format!("{} values on a {}-mode grid", values.len(), grid.n_modes)));
        }
        Self::new(Domain::Frequency, values)
    }
}

pub(crate) fn check_finite(values: &[Complex64]) -> Result<()> {
    match values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        Some(i) => Err(Error::Parameter(format!("non-finite sample at index {i}"))),
        None => Ok(()),
    }
}

pub(crate) fn real_field(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}
