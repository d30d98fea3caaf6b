//! Bayesian estimation of the grid power vector of each transmitter.
//!
//! The posterior over the grid is the estimator's whole memory: every new
//! measurement is folded in through a linear-Gaussian likelihood
//! `y ~ N(a' r + b, var)` whose coefficients depend only on the measurement
//! location, so the cost per measurement does not grow with their number.
//! [`batch_posterior`] conditions on all measurements at once and serves as
//! the reference for the recursion.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use statrs::function::erf::erfc;

use crate::channel::{
    base_power, base_power_grid, shadow_cov_matrix, shadow_cov_unchecked, ChannelParams,
    ShadowCovariance, Transmitter, COV_JITTER,
};
use crate::error::{invalid, Result, SurveyError};
use crate::spatial::{GridSpec, Point};

/// Floor on the likelihood variance (dB²).
pub const EPS_VAR: f64 = 1e-9;

/// Grid prior shared by all transmitters: the covariance
/// `C_s + fading_var * I` of the grid power vector and its factorization.
#[derive(Debug, Clone)]
pub struct GridPrior {
    grid: GridSpec,
    points: Vec<Point>,
    params: ChannelParams,
    cov: DMatrix<f64>,
    factor: Option<Cholesky<f64, Dyn>>,
}

impl GridPrior {
    pub fn new(grid: &GridSpec, params: &ChannelParams) -> Result<Self> {
        let shadow = ShadowCovariance::new(grid, params)?;
        Self::from_shadow(&shadow, params)
    }

    pub fn from_shadow(shadow: &ShadowCovariance, params: &ChannelParams) -> Result<Self> {
        params.validate()?;
        let grid = shadow.grid().clone();
        if !shadow.matches(&grid, params) {
            return Err(invalid(
                "shadow_var",
                "shadowing covariance built for different parameters",
            ));
        }
        let mut cov = shadow.matrix().clone();
        for i in 0..cov.nrows() {
            cov[(i, i)] += params.fading_var;
        }
        let factor = if params.prior_var() > 0.0 {
            let mut jittered = cov.clone();
            for i in 0..jittered.nrows() {
                jittered[(i, i)] += COV_JITTER * params.shadow_var;
            }
            Some(Cholesky::new(jittered).ok_or_else(|| {
                SurveyError::Factorization("grid prior covariance is not positive definite".into())
            })?)
        } else {
            None
        };
        Ok(Self {
            points: grid.points(),
            grid,
            params: params.clone(),
            cov,
            factor,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Location-dependent part of the likelihood of a measurement at `x`;
    /// identical for every transmitter.
    pub fn kernel_at(&self, x: &Point) -> Result<ObservationKernel> {
        self.grid.check_contains(x)?;
        let n = self.grid.len();
        let p = &self.params;
        let total = p.shadow_var + p.fading_var + p.noise_var;
        if let Some(j) = self.grid.point_to_index(x) {
            // a = K^{-1} K e_j = e_j, b = 0 and the quadratic form cancels the prior variance.
            return Ok(ObservationKernel {
                a: unit(n, j),
                unit: Some(j),
                var: p.noise_var.max(EPS_VAR),
            });
        }
        // Off the grid the fading term is uncorrelated with every grid point.
        let c = DVector::from_fn(n, |i, _| {
            shadow_cov_unchecked(x.distance(&self.points[i]), p)
        });
        let a = match (&self.factor, c.iter().any(|v| *v != 0.0)) {
            (Some(chol), true) => chol.solve(&c),
            _ => DVector::zeros(n),
        };
        let var = (total - c.dot(&a)).max(EPS_VAR);
        Ok(ObservationKernel { a, unit: None, var })
    }

    /// Likelihood coefficients at `x` computed through the dense solve, even
    /// when `x` is a grid point.
    pub fn kernel_dense(&self, x: &Point) -> Result<ObservationKernel> {
        self.grid.check_contains(x)?;
        let n = self.grid.len();
        let p = &self.params;
        let mut c = DVector::from_fn(n, |i, _| {
            shadow_cov_unchecked(x.distance(&self.points[i]), p)
        });
        if let Some(j) = self.grid.point_to_index(x) {
            c[j] += p.fading_var;
        }
        let a = match &self.factor {
            Some(chol) => chol.solve(&c),
            None => DVector::zeros(n),
        };
        let var = (p.shadow_var + p.fading_var + p.noise_var - c.dot(&a)).max(EPS_VAR);
        Ok(ObservationKernel { a, unit: None, var })
    }
}

fn unit(n: usize, j: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[j] = 1.0;
    v
}

/// `a` and `var` of the likelihood at one location.
#[derive(Debug, Clone)]
pub struct ObservationKernel {
    pub a: DVector<f64>,
    pub var: f64,
    unit: Option<usize>,
}

impl ObservationKernel {
    /// Completes the coefficients for transmitter `tx`, whose grid base power is `beta_grid`.
    pub fn for_transmitter(
        &self,
        x: &Point,
        altitude: f64,
        tx: &Transmitter,
        beta_grid: &DVector<f64>,
        params: &ChannelParams,
    ) -> Result<ObservationCoefficients> {
        let b = match self.unit {
            Some(_) => 0.0,
            None => base_power(x, altitude, tx, params)? - self.a.dot(beta_grid),
        };
        Ok(ObservationCoefficients {
            a: self.a.clone(),
            b,
            var: self.var,
            unit: self.unit,
        })
    }
}

/// Linear-Gaussian likelihood `y | r ~ N(a' r + b, var)` of one measurement.
#[derive(Debug, Clone)]
pub struct ObservationCoefficients {
    pub a: DVector<f64>,
    pub b: f64,
    pub var: f64,
    unit: Option<usize>,
}

impl ObservationCoefficients {
    pub fn new(a: DVector<f64>, b: f64, var: f64) -> Self {
        Self {
            a,
            b,
            var,
            unit: None,
        }
    }
}

/// Likelihood coefficients of a measurement at `x` for transmitter `tx`.
pub fn observation_coefficients(
    prior: &GridPrior,
    tx: &Transmitter,
    x: &Point,
) -> Result<ObservationCoefficients> {
    let beta = base_power_grid(prior.grid(), tx, prior.params())?;
    prior
        .kernel_at(x)?
        .for_transmitter(x, prior.grid().altitude, tx, &beta, prior.params())
}

/// Gaussian posterior over the grid power vector of one transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

/// Prior: mean `beta` on the grid, covariance `C_s + fading_var * I`.
pub fn init_posterior(prior: &GridPrior, tx: &Transmitter) -> Result<PosteriorState> {
    Ok(PosteriorState {
        mean: base_power_grid(prior.grid(), tx, prior.params())?,
        cov: prior.covariance().clone(),
    })
}

impl PosteriorState {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn variances(&self) -> DVector<f64> {
        self.cov.diagonal()
    }

    /// Conditions on one measurement `y` with gain `k = S a / (var + a' S a)`:
    /// `S <- S - k (S a)'`, `m <- m + k (y - a' m - b)`.
    pub fn update(&mut self, coeffs: &ObservationCoefficients, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(SurveyError::NonFinite("measurement"));
        }
        if !(coeffs.b.is_finite() && coeffs.var.is_finite())
            || coeffs.a.iter().any(|v| !v.is_finite())
        {
            return Err(SurveyError::NonFinite("observation coefficients"));
        }
        if coeffs.a.len() != self.len() {
            return Err(SurveyError::LengthMismatch {
                expected: self.len(),
                got: coeffs.a.len(),
            });
        }
        let var = coeffs.var.max(EPS_VAR);
        let (sa, a_m) = match coeffs.unit {
            Some(j) => (self.cov.column(j).into_owned(), self.mean[j]),
            None => (&self.cov * &coeffs.a, coeffs.a.dot(&self.mean)),
        };
        let quad = match coeffs.unit {
            Some(j) => sa[j],
            None => coeffs.a.dot(&sa),
        };
        if sa.iter().all(|v| *v == 0.0) {
            return Ok(());
        }
        let denom = var + quad;
        let innovation = y - a_m - coeffs.b;
        self.mean.axpy(innovation / denom, &sa, 1.0);
        self.cov.ger(-1.0 / denom, &sa, &sa, 1.0);
        symmetrize(&mut self.cov);
        Ok(())
    }
}

/// Consuming form of [`PosteriorState::update`].
pub fn online_update(
    mut state: PosteriorState,
    coeffs: &ObservationCoefficients,
    y: f64,
) -> Result<PosteriorState> {
    state.update(coeffs, y)?;
    Ok(state)
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        if m[(j, j)] < 0.0 {
            m[(j, j)] = 0.0;
        }
    }
}

/// Posterior of the grid power vector given all `measurements` (position and
/// received power of transmitter `tx`) by direct joint-Gaussian conditioning.
///
/// Fading is a single realization per location, so it correlates measurements
/// taken at the same position and couples a measurement at grid point `j`
/// with `r_j`; off the grid and at distinct positions it only adds
/// `fading_var` to the measurement variance.
pub fn batch_posterior(
    prior: &GridPrior,
    tx: &Transmitter,
    measurements: &[(Point, f64)],
) -> Result<PosteriorState> {
    let mut state = init_posterior(prior, tx)?;
    if measurements.is_empty() {
        return Ok(state);
    }
    let grid = prior.grid();
    let p = prior.params();
    let xs: Vec<Point> = measurements.iter().map(|(x, _)| *x).collect();
    for x in &xs {
        grid.check_contains(x)?;
    }
    let m = xs.len();
    let same = |a: &Point, b: &Point| a.distance(b) <= crate::spatial::GRID_SNAP_TOL * grid.spacing;

    let mut gram = shadow_cov_matrix(&xs, &xs, p);
    for i in 0..m {
        for j in 0..m {
            if same(&xs[i], &xs[j]) {
                gram[(i, j)] += p.fading_var;
            }
        }
        gram[(i, i)] += p.noise_var;
    }
    let mut cross = shadow_cov_matrix(&prior.points, &xs, p);
    for (t, x) in xs.iter().enumerate() {
        if let Some(j) = grid.point_to_index(x) {
            cross[(j, t)] += p.fading_var;
        }
    }
    let residual = DVector::from_vec(
        measurements
            .iter()
            .map(|(x, y)| Ok(y - base_power(x, grid.altitude, tx, p)?))
            .collect::<Result<Vec<_>>>()?,
    );
    if residual.iter().any(|v| !v.is_finite()) {
        return Err(SurveyError::NonFinite("measurement"));
    }

    let chol = match Cholesky::new(gram.clone()) {
        Some(c) => c,
        None => {
            for i in 0..m {
                gram[(i, i)] += COV_JITTER * p.shadow_var.max(EPS_VAR);
            }
            Cholesky::new(gram).ok_or_else(|| {
                SurveyError::Factorization("measurement covariance is singular".into())
            })?
        }
    };
    state.mean += &cross * chol.solve(&residual);
    let gain_t = chol.solve(&cross.transpose());
    state.cov -= &cross * gain_t;
    symmetrize(&mut state.cov);
    Ok(state)
}

/// Probability that each grid point is served (`r >= r_min`) under the posterior.
pub fn service_probability(state: &PosteriorState, r_min: f64) -> Vec<f64> {
    state
        .mean
        .iter()
        .zip(state.cov.diagonal().iter())
        .map(|(&m, &v)| {
            if v > 0.0 {
                0.5 * erfc((r_min - m) / (v.sqrt() * std::f64::consts::SQRT_2))
            } else if m >= r_min {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}
