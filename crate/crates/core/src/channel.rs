//! Synthetic radio environment: free-space gain, spatially correlated
//! log-normal shadowing, fading and measurement noise.
//!
//! Powers are in dBm, variances in dB². The received power at `x` from one
//! transmitter is `r(x) = beta(x) - s(x) + f(x)`, where `beta` is the known
//! deterministic part, `s` is zero-mean shadowing with covariance
//! `shadow_var * 2^(-d / corr_distance)` and `f` is spatially white fading.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SurveyError};
use crate::spatial::{GridSpec, Point, GRID_SNAP_TOL};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Diagonal loading, relative to the shadowing variance, applied before
/// factorizing shadowing covariance matrices.
pub const COV_JITTER: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transmitter {
    /// `[x, y, height]` in meters.
    pub position: [f64; 3],
    /// Transmit power (dBm).
    pub power_dbm: f64,
}

impl Transmitter {
    pub fn ground(&self) -> Point {
        Point::new(self.position[0], self.position[1])
    }

    pub fn height(&self) -> f64 {
        self.position[2]
    }

    /// 3D distance from a receiver at `x` flying at `altitude`.
    pub fn distance(&self, x: &Point, altitude: f64) -> f64 {
        let dz = altitude - self.height();
        (self.position[0] - x.x)
            .hypot(self.position[1] - x.y)
            .hypot(dz)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub transmitters: Vec<Transmitter>,
    pub frequency_hz: f64,
    pub pathloss_exponent: f64,
    /// Shadowing variance (dB²).
    pub shadow_var: f64,
    /// Shadowing mean (dB).
    pub shadow_mean: f64,
    /// Distance at which the shadowing correlation halves (m).
    pub corr_distance: f64,
    pub fading_var: f64,
    pub noise_var: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            transmitters: Vec::new(),
            frequency_hz: 2.4e9,
            pathloss_exponent: 2.0,
            shadow_var: 9.0,
            shadow_mean: 0.0,
            corr_distance: 50.0,
            fading_var: 0.0,
            noise_var: 0.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("must be >= 0, got {v}")))
            }
        };
        nonneg("shadow_var", self.shadow_var)?;
        nonneg("fading_var", self.fading_var)?;
        nonneg("noise_var", self.noise_var)?;
        if !(self.corr_distance.is_finite() && self.corr_distance > 0.0) {
            return Err(invalid(
                "corr_distance",
                format!("must be > 0, got {}", self.corr_distance),
            ));
        }
        if !(self.frequency_hz.is_finite() && self.frequency_hz > 0.0) {
            return Err(invalid(
                "frequency_hz",
                format!("must be > 0, got {}", self.frequency_hz),
            ));
        }
        if !self.pathloss_exponent.is_finite() {
            return Err(invalid("pathloss_exponent", "must be finite"));
        }
        if !self.shadow_mean.is_finite() {
            return Err(invalid("shadow_mean", "must be finite"));
        }
        for tx in &self.transmitters {
            if !(tx.position.iter().all(|v| v.is_finite()) && tx.power_dbm.is_finite()) {
                return Err(invalid(
                    "transmitters",
                    "positions and powers must be finite",
                ));
            }
        }
        Ok(())
    }

    /// Prior variance of the received power at any single location.
    pub fn prior_var(&self) -> f64 {
        self.shadow_var + self.fading_var
    }
}

/// Shadowing covariance at distance `d`: `shadow_var * 2^(-d / corr_distance)`.
pub fn shadow_cov(d: f64, params: &ChannelParams) -> Result<f64> {
    if d.is_nan() || d < 0.0 {
        return Err(invalid("distance", format!("must be >= 0, got {d}")));
    }
    Ok(shadow_cov_unchecked(d, params))
}

#[inline]
pub(crate) fn shadow_cov_unchecked(d: f64, params: &ChannelParams) -> f64 {
    params.shadow_var * (-d / params.corr_distance).exp2()
}

/// Deterministic power component `P_tx + g(x) - shadow_mean`, with `g` the
/// free-space gain scaled by `pathloss_exponent / 2`.
pub fn base_power(
    x: &Point,
    altitude: f64,
    tx: &Transmitter,
    params: &ChannelParams,
) -> Result<f64> {
    let d = tx.distance(x, altitude);
    if d.is_nan() || d <= 0.0 {
        return Err(invalid("distance", "receiver coincides with transmitter"));
    }
    Ok(base_power_at_distance(d, tx.power_dbm, params))
}

pub fn base_power_at_distance(d: f64, power_dbm: f64, params: &ChannelParams) -> f64 {
    let fspl =
        20.0 * (4.0 * std::f64::consts::PI * params.frequency_hz * d / SPEED_OF_LIGHT).log10();
    power_dbm - 0.5 * params.pathloss_exponent * fspl - params.shadow_mean
}

/// Horizontal distance from `tx` at which `beta` equals `level`, for a
/// receiver at `altitude`. `None` if `beta` stays below `level` everywhere.
pub fn level_set_radius(
    level: f64,
    tx: &Transmitter,
    altitude: f64,
    params: &ChannelParams,
) -> Option<f64> {
    if params.pathloss_exponent <= 0.0 {
        return None;
    }
    let log_d = (tx.power_dbm - params.shadow_mean - level) / (10.0 * params.pathloss_exponent)
        - (4.0 * std::f64::consts::PI * params.frequency_hz / SPEED_OF_LIGHT).log10();
    let d3 = 10f64.powf(log_d);
    let dz = altitude - tx.height();
    let h2 = d3 * d3 - dz * dz;
    (h2 >= 0.0).then(|| h2.sqrt())
}

/// `beta` evaluated at every grid point.
pub fn base_power_grid(
    grid: &GridSpec,
    tx: &Transmitter,
    params: &ChannelParams,
) -> Result<DVector<f64>> {
    let vals = grid
        .points()
        .iter()
        .map(|p| base_power(p, grid.altitude, tx, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(vals))
}

/// Shadowing covariance between every pair of points of `a` and `b`.
pub fn shadow_cov_matrix(a: &[Point], b: &[Point], params: &ChannelParams) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| {
        shadow_cov_unchecked(a[i].distance(&b[j]), params)
    })
}

/// Shadowing covariance of the grid together with its factorization.
/// Depends only on the grid and the shadowing parameters, so one instance can
/// be shared by every realization of a scenario.
#[derive(Debug, Clone)]
pub struct ShadowCovariance {
    grid: GridSpec,
    shadow_var: f64,
    corr_distance: f64,
    cov: DMatrix<f64>,
    factor: Option<Cholesky<f64, Dyn>>,
}

impl ShadowCovariance {
    pub fn new(grid: &GridSpec, params: &ChannelParams) -> Result<Self> {
        grid.validate()?;
        params.validate()?;
        let points = grid.points();
        let cov = shadow_cov_matrix(&points, &points, params);
        let factor = if params.shadow_var > 0.0 {
            let mut jittered = cov.clone();
            for i in 0..jittered.nrows() {
                jittered[(i, i)] += COV_JITTER * params.shadow_var;
            }
            Some(Cholesky::new(jittered).ok_or_else(|| {
                SurveyError::Factorization(format!(
                    "shadowing covariance of {}x{} grid is not positive definite after jitter",
                    grid.rows, grid.cols
                ))
            })?)
        } else {
            None
        };
        Ok(Self {
            grid: grid.clone(),
            shadow_var: params.shadow_var,
            corr_distance: params.corr_distance,
            cov,
            factor,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// True if this covariance was built for the same grid and shadowing law.
    pub fn matches(&self, grid: &GridSpec, params: &ChannelParams) -> bool {
        self.grid == *grid
            && self.shadow_var == params.shadow_var
            && self.corr_distance == params.corr_distance
    }

    /// One zero-mean shadowing realization over the grid.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let n = self.cov.nrows();
        match &self.factor {
            Some(chol) => {
                let xi = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                chol.l() * xi
            }
            None => DVector::zeros(n),
        }
    }
}

/// Separable Catmull-Rom interpolation over grid values, replicating the edge
/// rows and columns outside the grid.
#[derive(Debug, Clone)]
pub struct GridInterpolator {
    grid: GridSpec,
    values: DVector<f64>,
}

fn catmull_rom_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t + 2.0 * t2 - t3),
        0.5 * (2.0 - 5.0 * t2 + 3.0 * t3),
        0.5 * (t + 4.0 * t2 - 3.0 * t3),
        0.5 * (-t2 + t3),
    ]
}

/// Base index, local parameter and clamped stencil along one axis.
fn stencil(f: f64, n: usize) -> ([usize; 4], [f64; 4]) {
    if n == 1 {
        return ([0; 4], [0.0, 1.0, 0.0, 0.0]);
    }
    let snapped = if (f - f.round()).abs() <= GRID_SNAP_TOL {
        f.round()
    } else {
        f
    };
    let i = (snapped.floor().max(0.0) as usize).min(n - 2);
    let t = (snapped - i as f64).clamp(0.0, 1.0);
    let clamp = |k: i64| k.clamp(0, n as i64 - 1) as usize;
    let i = i as i64;
    (
        [clamp(i - 1), clamp(i), clamp(i + 1), clamp(i + 2)],
        catmull_rom_weights(t),
    )
}

impl GridInterpolator {
    pub fn new(grid: &GridSpec, values: DVector<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SurveyError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        self.grid.check_contains(x)?;
        let (fc, fr) = self.grid.fractional(x);
        let (cols, wc) = stencil(fc, self.grid.cols);
        let (rows, wr) = stencil(fr, self.grid.rows);
        let mut acc = 0.0;
        for (r, w_r) in rows.iter().zip(wr) {
            if w_r == 0.0 {
                continue;
            }
            let mut row_acc = 0.0;
            for (c, w_c) in cols.iter().zip(wc) {
                if w_c != 0.0 {
                    row_acc += w_c * self.values[self.grid.index(*r, *c)];
                }
            }
            acc += w_r * row_acc;
        }
        Ok(acc)
    }
}

/// The hidden true radio map: per-transmitter power over the grid.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    grid: GridSpec,
    maps: Vec<GridInterpolator>,
}

impl GroundTruth {
    pub fn from_grid_values(grid: &GridSpec, power: Vec<DVector<f64>>) -> Result<Self> {
        let maps = power
            .into_iter()
            .map(|v| GridInterpolator::new(grid, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: grid.clone(),
            maps,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn num_transmitters(&self) -> usize {
        self.maps.len()
    }

    /// True power of transmitter `k` at the grid points (dBm).
    pub fn grid_power(&self, k: usize) -> &DVector<f64> {
        self.maps[k].values()
    }

    /// True power at `x` for every transmitter.
    pub fn true_power(&self, x: &Point) -> Result<Vec<f64>> {
        self.maps.iter().map(|m| m.eval(x)).collect()
    }

    /// Grid-point service indicator: served if any transmitter reaches `r_min`.
    pub fn service_map(&self, r_min: f64) -> Vec<bool> {
        (0..self.grid.len())
            .map(|j| self.maps.iter().any(|m| m.values()[j] >= r_min))
            .collect()
    }
}

/// Draws a true map with a freshly built shadowing covariance.
pub fn sample_ground_truth<R: Rng + ?Sized>(
    grid: &GridSpec,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<GroundTruth> {
    let shadow = ShadowCovariance::new(grid, params)?;
    sample_ground_truth_with(&shadow, params, rng)
}

/// Draws `r = beta - s + f` over the grid, independently per transmitter.
pub fn sample_ground_truth_with<R: Rng + ?Sized>(
    shadow: &ShadowCovariance,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<GroundTruth> {
    params.validate()?;
    let grid = shadow.grid();
    if shadow.shadow_var != params.shadow_var || shadow.corr_distance != params.corr_distance {
        return Err(invalid(
            "shadow_var",
            "shadowing covariance built for different parameters",
        ));
    }
    let fading_sd = params.fading_var.sqrt();
    let mut maps = Vec::with_capacity(params.transmitters.len());
    for tx in &params.transmitters {
        let beta = base_power_grid(grid, tx, params)?;
        let s = shadow.sample(rng);
        let mut r = beta - s;
        if fading_sd > 0.0 {
            for v in r.iter_mut() {
                *v += fading_sd * rng.sample::<f64, _>(StandardNormal);
            }
        }
        maps.push(r);
    }
    GroundTruth::from_grid_values(grid, maps)
}

/// One received-signal-strength measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub position: Point,
    /// Received power per transmitter (dBm).
    pub rss: Vec<f64>,
}

/// Measures the true map at `x` with additive Gaussian noise.
pub fn take_measurement<R: Rng + ?Sized>(
    gt: &GroundTruth,
    x: &Point,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<Measurement> {
    let mut rss = gt.true_power(x)?;
    if params.noise_var > 0.0 {
        let noise = Normal::new(0.0, params.noise_var.sqrt())
            .map_err(|e| invalid("noise_var", e.to_string()))?;
        for v in rss.iter_mut() {
            *v += noise.sample(rng);
        }
    }
    Ok(Measurement { position: *x, rss })
}

/// Places `count` transmitters uniformly at random over the grid rectangle.
pub fn place_transmitters<R: Rng + ?Sized>(
    grid: &GridSpec,
    count: usize,
    height: f64,
    power_dbm: f64,
    rng: &mut R,
) -> Vec<Transmitter> {
    let (w, h) = grid.extent();
    (0..count)
        .map(|_| Transmitter {
            position: [
                grid.origin.x + rng.random::<f64>() * w,
                grid.origin.y + rng.random::<f64>() * h,
                height,
            ],
            power_dbm,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> ChannelParams {
        ChannelParams::default()
    }

    /// Free-space path loss in dB, written out independently of `base_power`.
    fn fspl_oracle(d: f64, f: f64) -> f64 {
        let lambda = 299_792_458.0 / f;
        -20.0 * (lambda / (4.0 * std::f64::consts::PI * d)).log10()
    }

    #[test]
    fn shadow_cov_examples() {
        let p = params();
        assert_eq!(shadow_cov(0.0, &p).unwrap(), 9.0);
        assert!((shadow_cov(50.0, &p).unwrap() - 4.5).abs() < 1e-12);
        assert!((shadow_cov(100.0, &p).unwrap() - 2.25).abs() < 1e-12);
        assert!(shadow_cov(-1.0, &p).is_err());
        assert!(shadow_cov(10.0, &p).unwrap() > shadow_cov(11.0, &p).unwrap());
    }

    #[test]
    fn base_power_examples() {
        let p = params();
        let tx = Transmitter {
            position: [0.0, 0.0, 0.0],
            power_dbm: 10.0,
        };
        let at1 = base_power(&Point::new(1.0, 0.0), 0.0, &tx, &p).unwrap();
        assert!((fspl_oracle(1.0, 2.4e9) - 40.052).abs() < 1e-3);
        assert!((at1 - (10.0 - fspl_oracle(1.0, 2.4e9))).abs() < 1e-9);
        assert!((at1 + 30.05).abs() < 0.01);
        let at10 = base_power(&Point::new(10.0, 0.0), 0.0, &tx, &p).unwrap();
        assert!((at10 + 50.05).abs() < 0.01);

        let shifted = ChannelParams {
            shadow_mean: 3.0,
            ..p.clone()
        };
        let s = base_power(&Point::new(10.0, 0.0), 0.0, &tx, &shifted).unwrap();
        assert!((s - (at10 - 3.0)).abs() < 1e-12);

        assert!(base_power(&Point::new(0.0, 0.0), 0.0, &tx, &p).is_err());
    }

    #[test]
    fn base_power_uses_height_difference() {
        let p = params();
        let tx = Transmitter {
            position: [0.0, 0.0, 10.0],
            power_dbm: 10.0,
        };
        let above = base_power(&Point::new(0.0, 0.0), 20.0, &tx, &p).unwrap();
        assert!((above - (10.0 - fspl_oracle(10.0, 2.4e9))).abs() < 1e-9);
    }

    #[test]
    fn level_set_radius_inverts_base_power() {
        let p = params();
        let tx = Transmitter {
            position: [0.0, 0.0, 10.0],
            power_dbm: 10.0,
        };
        let r = level_set_radius(-70.0, &tx, 20.0, &p).unwrap();
        let beta = base_power(&Point::new(r, 0.0), 20.0, &tx, &p).unwrap();
        assert!((beta + 70.0).abs() < 1e-9);
        // The strongest possible reading, straight above the transmitter, is about -50 dBm.
        assert!(level_set_radius(5.0, &tx, 20.0, &p).is_none());
    }

    #[test]
    fn noiseless_ground_truth_equals_base_power() {
        let grid = GridSpec::new(4, 5, 10.0)
            .unwrap()
            .with_altitude(20.0)
            .unwrap();
        let p = ChannelParams {
            shadow_var: 0.0,
            fading_var: 0.0,
            transmitters: vec![Transmitter {
                position: [12.0, 7.0, 10.0],
                power_dbm: 10.0,
            }],
            ..params()
        };
        let gt = sample_ground_truth(&grid, &p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let beta = base_power_grid(&grid, &p.transmitters[0], &p).unwrap();
        assert_eq!(gt.grid_power(0), &beta);
    }

    #[test]
    fn ground_truth_is_deterministic() {
        let grid = GridSpec::new(6, 5, 10.0)
            .unwrap()
            .with_altitude(20.0)
            .unwrap();
        let p = ChannelParams {
            fading_var: 1.0,
            transmitters: vec![
                Transmitter {
                    position: [3.0, 4.0, 10.0],
                    power_dbm: 10.0,
                },
                Transmitter {
                    position: [30.0, 14.0, 10.0],
                    power_dbm: 10.0,
                },
            ],
            ..params()
        };
        let a = sample_ground_truth(&grid, &p, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = sample_ground_truth(&grid, &p, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        for k in 0..2 {
            assert_eq!(a.grid_power(k), b.grid_power(k));
        }
        assert_ne!(a.grid_power(0), a.grid_power(1));
    }

    #[test]
    fn shadow_matrix_is_symmetric() {
        let grid = GridSpec::new(6, 5, 10.0).unwrap();
        let sc = ShadowCovariance::new(&grid, &params()).unwrap();
        let m = sc.matrix();
        let asym = (m - m.transpose()).abs().max();
        assert!(asym < 1e-12);
    }

    #[test]
    fn interpolator_is_exact_at_grid_points() {
        let grid = GridSpec::new(5, 4, 10.0)
            .unwrap()
            .with_origin(Point::new(-3.3, 7.1));
        let vals = DVector::from_fn(grid.len(), |i, _| ((i * 37) % 11) as f64 - 4.2);
        let it = GridInterpolator::new(&grid, vals.clone()).unwrap();
        for g in 0..grid.len() {
            let p = grid.index_to_point(g).unwrap();
            assert!((it.eval(&p).unwrap() - vals[g]).abs() < 1e-9);
        }
    }

    #[test]
    fn interpolator_reproduces_constants_and_linears() {
        let grid = GridSpec::new(5, 6, 10.0).unwrap();
        let konst = GridInterpolator::new(&grid, DVector::from_element(grid.len(), 7.0)).unwrap();
        assert!((konst.eval(&Point::new(23.7, 31.2)).unwrap() - 7.0).abs() < 1e-12);
        assert!((konst.eval(&Point::new(3.0, 1.0)).unwrap() - 7.0).abs() < 1e-12);

        let lin = DVector::from_fn(grid.len(), |i, _| 2.0 * (i % 6) as f64 * 10.0 - 5.0);
        let it = GridInterpolator::new(&grid, lin).unwrap();
        // Midpoint of columns 2 and 3: mean of 35 and 55.
        assert!((it.eval(&Point::new(25.0, 20.0)).unwrap() - 45.0).abs() < 1e-12);
        assert!((it.eval(&Point::new(21.3, 17.0)).unwrap() - (2.0 * 21.3 - 5.0)).abs() < 1e-12);
    }

    #[test]
    fn interpolator_rejects_outside_points() {
        let grid = GridSpec::new(3, 3, 10.0).unwrap();
        let it = GridInterpolator::new(&grid, DVector::zeros(9)).unwrap();
        assert!(matches!(
            it.eval(&Point::new(20.5, 0.0)),
            Err(SurveyError::OutOfBounds { .. })
        ));
        assert!(it.eval(&Point::new(20.0, 20.0)).is_ok());
    }

    #[test]
    fn single_row_grid_interpolates_along_columns() {
        let grid = GridSpec::new(1, 4, 10.0).unwrap();
        let it = GridInterpolator::new(&grid, DVector::from_vec(vec![0.0, 1.0, 2.0, 3.0])).unwrap();
        assert!((it.eval(&Point::new(15.0, 0.0)).unwrap() - 1.5).abs() < 1e-12);
    }

    fn one_tx_truth(noise_var: f64) -> (GroundTruth, ChannelParams) {
        let grid = GridSpec::new(3, 3, 10.0)
            .unwrap()
            .with_altitude(20.0)
            .unwrap();
        let p = ChannelParams {
            noise_var,
            transmitters: vec![Transmitter {
                position: [5.0, 5.0, 10.0],
                power_dbm: 10.0,
            }],
            ..params()
        };
        let gt = sample_ground_truth(&grid, &p, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        (gt, p)
    }

    #[test]
    fn noiseless_measurement_is_true_power() {
        let (gt, p) = one_tx_truth(0.0);
        let x = Point::new(13.0, 4.0);
        let m = take_measurement(&gt, &x, &p, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(m.rss, gt.true_power(&x).unwrap());
    }

    #[test]
    fn measurement_noise_is_reproducible() {
        let (gt, p) = one_tx_truth(4.0);
        let x = Point::new(13.0, 4.0);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..5)
                .map(|_| take_measurement(&gt, &x, &p, &mut rng).unwrap().rss[0])
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }

    #[test]
    fn measurement_noise_variance() {
        let (gt, p) = one_tx_truth(4.0);
        let x = Point::new(13.0, 4.0);
        let truth = gt.true_power(&x).unwrap()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 10_000;
        let devs: Vec<f64> = (0..n)
            .map(|_| take_measurement(&gt, &x, &p, &mut rng).unwrap().rss[0] - truth)
            .collect();
        let mean = devs.iter().sum::<f64>() / n as f64;
        let var = devs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // Standard error of a Gaussian sample variance: sigma^2 * sqrt(2 / (n - 1)).
        let se = 4.0 * (2.0 / (n - 1) as f64).sqrt();
        assert!((var - 4.0).abs() < 3.0 * se, "var {var}");
    }

    #[test]
    fn transmitters_fall_inside_grid() {
        let grid = GridSpec::new(30, 25, 10.0).unwrap();
        let txs = place_transmitters(&grid, 50, 10.0, 10.0, &mut ChaCha8Rng::seed_from_u64(5));
        assert!(txs
            .iter()
            .all(|t| grid.contains(&t.ground()) && t.height() == 10.0));
    }
}
