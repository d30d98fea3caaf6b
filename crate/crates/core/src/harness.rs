//! The survey loop (plan, fly, measure, update) and Monte Carlo aggregation.
//!
//! Every run draws from three independent ChaCha streams keyed by
//! `(seed, run)`: the environment (transmitter placement and the true map),
//! the measurement noise and the planner. Runs with the same id therefore see
//! the same environment whatever the planner, and results do not depend on
//! how runs are scheduled across threads.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    base_power_grid, place_transmitters, sample_ground_truth_with, take_measurement, ChannelParams,
    GroundTruth, Measurement, ShadowCovariance, Transmitter,
};
use crate::error::{invalid, Result, SurveyError};
use crate::estimator::{init_posterior, service_probability, GridPrior, PosteriorState};
use crate::planner::{leg_length, PlanRequest, Planner, PlannerKind, ShortestPath};
use crate::spatial::{build_motion_graph, ArcSampler, GridSpec, MotionGraph, Point};
use crate::uncertainty::{
    aggregate, power_uncertainty, service_uncertainty, total_uncertainty, Aggregation, MapKind,
    UncertaintyField,
};

/// Consecutive zero-length legs tolerated before a run is aborted.
const MAX_IDLE_LEGS: usize = 64;

const STREAM_ENVIRONMENT: u64 = 0;
const STREAM_NOISE: u64 = 1;
const STREAM_PLANNER: u64 = 2;
const STREAMS_PER_RUN: u64 = 4;

/// Where the transmitters are.
#[derive(Debug, Clone, PartialEq)]
pub enum TransmitterLayout {
    Fixed(Vec<Transmitter>),
    /// Drawn uniformly over the grid rectangle for every run.
    Random {
        count: usize,
        height: f64,
        power_dbm: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyConfig {
    pub grid: GridSpec,
    /// Propagation constants; the transmitter list is filled in per run from `layout`.
    pub channel: ChannelParams,
    pub layout: TransmitterLayout,
    /// Service threshold (dBm).
    pub r_min: f64,
    /// Arc length between consecutive measurements (m).
    pub measurement_spacing: f64,
    pub planner: PlannerKind,
    pub engine: ShortestPath,
    pub aggregation: Aggregation,
    /// Map whose uncertainty drives the min-cost planner and the threshold stop.
    pub target: MapKind,
    pub max_measurements: Option<usize>,
    pub uncertainty_threshold: Option<f64>,
    /// Flight speed (m/s).
    pub speed: f64,
    pub start_position: Point,
    pub seed: u64,
}

impl Default for SurveyConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec {
                rows: 30,
                cols: 25,
                spacing: 10.0,
                origin: Point::default(),
                altitude: 20.0,
            },
            channel: ChannelParams::default(),
            layout: TransmitterLayout::Random {
                count: 2,
                height: 10.0,
                power_dbm: 10.0,
            },
            r_min: 5.0,
            measurement_spacing: 5.0,
            planner: PlannerKind::MinCost,
            engine: ShortestPath::Dijkstra,
            aggregation: Aggregation::Max,
            target: MapKind::Service,
            max_measurements: Some(300),
            uncertainty_threshold: None,
            speed: 5.0,
            start_position: Point::default(),
            seed: 0,
        }
    }
}

impl SurveyConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.channel.validate()?;
        if !(self.measurement_spacing.is_finite() && self.measurement_spacing > 0.0) {
            return Err(invalid("measurement_spacing", "must be > 0"));
        }
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(invalid("speed", "must be > 0"));
        }
        if !self.r_min.is_finite() {
            return Err(invalid("r_min", "must be finite"));
        }
        if self.max_measurements.is_none() && self.uncertainty_threshold.is_none() {
            return Err(invalid(
                "max_measurements",
                "at least one stop criterion must be set",
            ));
        }
        if let Some(th) = self.uncertainty_threshold {
            if !(0.0..=1.0).contains(&th) {
                return Err(invalid("uncertainty_threshold", "must lie in [0, 1]"));
            }
        }
        if !self.grid.contains(&self.start_position) {
            return Err(invalid("start_position", "must lie inside the grid"));
        }
        match &self.layout {
            TransmitterLayout::Fixed(txs) if txs.is_empty() => {
                return Err(invalid(
                    "transmitters",
                    "at least one transmitter is required",
                ))
            }
            TransmitterLayout::Random { count: 0, .. } => {
                return Err(invalid(
                    "num_transmitters",
                    "at least one transmitter is required",
                ))
            }
            TransmitterLayout::Random {
                height, power_dbm, ..
            } if !(height.is_finite() && power_dbm.is_finite()) => {
                return Err(invalid(
                    "tx_height",
                    "transmitter height and power must be finite",
                ))
            }
            _ => {}
        }
        if self.planner == PlannerKind::MinCost && (self.grid.rows < 2 || self.grid.cols < 2) {
            return Err(invalid("planner", "min_cost needs a grid of at least 2x2"));
        }
        if self.target == MapKind::Power && self.channel.prior_var() <= 0.0 {
            return Err(invalid(
                "shadow_var",
                "power uncertainty needs a positive prior variance",
            ));
        }
        Ok(())
    }
}

/// Per-measurement performance metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub run: usize,
    pub t: usize,
    pub meters: f64,
    pub total_unc_power: f64,
    pub total_unc_service: f64,
    pub service_error_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxMeasurements,
    UncertaintyThreshold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyRecord {
    pub run: usize,
    pub transmitters: Vec<Transmitter>,
    pub measurements: Vec<Measurement>,
    /// Planned legs, concatenated.
    pub waypoints: Vec<Point>,
    pub metrics: Vec<MetricsRow>,
    pub stop: StopReason,
    /// Flight time up to the last measurement (s).
    pub flight_time: f64,
}

/// Scenario-wide precomputation shared by all runs.
#[derive(Debug, Clone)]
pub struct SharedModel {
    pub shadow: ShadowCovariance,
    pub prior: GridPrior,
    pub graph: Option<MotionGraph>,
}

impl SharedModel {
    pub fn new(config: &SurveyConfig) -> Result<Self> {
        config.validate()?;
        let shadow = ShadowCovariance::new(&config.grid, &config.channel)?;
        let prior = GridPrior::from_shadow(&shadow, &config.channel)?;
        let graph = if config.grid.rows >= 2 && config.grid.cols >= 2 {
            Some(build_motion_graph(&config.grid)?)
        } else {
            None
        };
        Ok(Self {
            shadow,
            prior,
            graph,
        })
    }
}

/// Deterministic per-run random stream.
pub fn run_rng(seed: u64, run: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64 * STREAMS_PER_RUN + stream);
    rng
}

/// One realized environment: transmitters and the true map.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: ChannelParams,
    pub truth: GroundTruth,
}

pub fn realize_scenario(
    config: &SurveyConfig,
    shared: &SharedModel,
    run: usize,
) -> Result<Scenario> {
    let mut rng = run_rng(config.seed, run, STREAM_ENVIRONMENT);
    let transmitters = match &config.layout {
        TransmitterLayout::Fixed(txs) => txs.clone(),
        TransmitterLayout::Random {
            count,
            height,
            power_dbm,
        } => place_transmitters(&config.grid, *count, *height, *power_dbm, &mut rng),
    };
    let params = ChannelParams {
        transmitters,
        ..config.channel.clone()
    };
    let truth = sample_ground_truth_with(&shared.shadow, &params, &mut rng)?;
    Ok(Scenario { params, truth })
}

/// Fraction of grid points where the thresholded service estimate
/// (`p >= 0.5`) disagrees with the true service map.
pub fn service_error_rate(p: &[f64], gt: &GroundTruth, r_min: f64) -> Result<f64> {
    let truth = gt.service_map(r_min);
    if p.len() != truth.len() {
        return Err(SurveyError::LengthMismatch {
            expected: truth.len(),
            got: p.len(),
        });
    }
    let wrong = p
        .iter()
        .zip(&truth)
        .filter(|(&pj, &sj)| (pj >= 0.5) != sj)
        .count();
    Ok(wrong as f64 / truth.len() as f64)
}

/// Probability that at least one transmitter serves each grid point.
pub fn combined_service_probability(per_tx: &[Vec<f64>]) -> Vec<f64> {
    let n = per_tx.first().map_or(0, Vec::len);
    (0..n)
        .map(|j| 1.0 - per_tx.iter().map(|p| 1.0 - p[j]).product::<f64>())
        .collect()
}

/// Read-only view of the estimator during a survey.
pub struct SurveyView<'a> {
    /// Number of measurements folded into `states`.
    pub count: usize,
    pub position: Point,
    pub states: &'a [PosteriorState],
    pub scenario: &'a Scenario,
    pub config: &'a SurveyConfig,
}

impl SurveyView<'_> {
    pub fn service_probabilities(&self) -> Vec<Vec<f64>> {
        self.states
            .iter()
            .map(|s| service_probability(s, self.config.r_min))
            .collect()
    }

    pub fn uncertainty(&self, kind: MapKind) -> Result<UncertaintyField> {
        field_for(kind, self.states, self.config, &self.scenario.params)
    }
}

fn field_for(
    kind: MapKind,
    states: &[PosteriorState],
    config: &SurveyConfig,
    params: &ChannelParams,
) -> Result<UncertaintyField> {
    let per_tx = states
        .iter()
        .map(|s| match kind {
            MapKind::Power => power_uncertainty(s, params),
            MapKind::Service => Ok(service_uncertainty(&service_probability(s, config.r_min))),
        })
        .collect::<Result<Vec<_>>>()?;
    aggregate(&per_tx, config.aggregation)
}

struct RunState<'a> {
    config: &'a SurveyConfig,
    shared: &'a SharedModel,
    scenario: &'a Scenario,
    run: usize,
    betas: Vec<DVector<f64>>,
    states: Vec<PosteriorState>,
    measurements: Vec<Measurement>,
    metrics: Vec<MetricsRow>,
    noise_rng: ChaCha8Rng,
    stop: Option<StopReason>,
}

impl RunState<'_> {
    fn measure<F: FnMut(&SurveyView<'_>)>(&mut self, x: Point, observer: &mut F) -> Result<()> {
        let params = &self.scenario.params;
        let m = take_measurement(&self.scenario.truth, &x, params, &mut self.noise_rng)?;
        let kernel = self.shared.prior.kernel_at(&x)?;
        for (k, tx) in params.transmitters.iter().enumerate() {
            let coeffs = kernel.for_transmitter(
                &x,
                self.config.grid.altitude,
                tx,
                &self.betas[k],
                params,
            )?;
            self.states[k].update(&coeffs, m.rss[k])?;
        }
        let t = self.measurements.len();
        self.measurements.push(m);

        let power = if params.prior_var() > 0.0 {
            total_uncertainty(&field_for(
                MapKind::Power,
                &self.states,
                self.config,
                params,
            )?)
        } else {
            0.0
        };
        let probs: Vec<Vec<f64>> = self
            .states
            .iter()
            .map(|s| service_probability(s, self.config.r_min))
            .collect();
        let service_fields: Vec<UncertaintyField> =
            probs.iter().map(|p| service_uncertainty(p)).collect();
        let service = total_uncertainty(&aggregate(&service_fields, self.config.aggregation)?);
        let err = service_error_rate(
            &combined_service_probability(&probs),
            &self.scenario.truth,
            self.config.r_min,
        )?;
        self.metrics.push(MetricsRow {
            run: self.run,
            t,
            meters: t as f64 * self.config.measurement_spacing,
            total_unc_power: power,
            total_unc_service: service,
            service_error_rate: err,
        });

        observer(&SurveyView {
            count: t + 1,
            position: x,
            states: &self.states,
            scenario: self.scenario,
            config: self.config,
        });

        if self.config.max_measurements.is_some_and(|m| t >= m) {
            self.stop = Some(StopReason::MaxMeasurements);
        } else if let Some(th) = self.config.uncertainty_threshold {
            let total = match self.config.target {
                MapKind::Power => power,
                MapKind::Service => service,
            };
            if total <= th {
                self.stop = Some(StopReason::UncertaintyThreshold);
            }
        }
        Ok(())
    }
}

/// Runs one survey with run id 0.
pub fn run_survey(config: &SurveyConfig) -> Result<SurveyRecord> {
    let shared = SharedModel::new(config)?;
    run_survey_with(config, &shared, 0, |_| {})
}

/// Runs one survey; `observer` sees the prior (`count == 0`) and the
/// posterior after every measurement.
pub fn run_survey_with<F: FnMut(&SurveyView<'_>)>(
    config: &SurveyConfig,
    shared: &SharedModel,
    run: usize,
    mut observer: F,
) -> Result<SurveyRecord> {
    config.validate()?;
    let scenario = realize_scenario(config, shared, run)?;
    let params = &scenario.params;
    let betas = params
        .transmitters
        .iter()
        .map(|tx| base_power_grid(&config.grid, tx, params))
        .collect::<Result<Vec<_>>>()?;
    let states = params
        .transmitters
        .iter()
        .map(|tx| init_posterior(&shared.prior, tx))
        .collect::<Result<Vec<_>>>()?;

    let mut st = RunState {
        config,
        shared,
        scenario: &scenario,
        run,
        betas,
        states,
        measurements: Vec::new(),
        metrics: Vec::new(),
        noise_rng: run_rng(config.seed, run, STREAM_NOISE),
        stop: None,
    };
    observer(&SurveyView {
        count: 0,
        position: config.start_position,
        states: &st.states,
        scenario: &scenario,
        config,
    });

    let mut planner_rng = run_rng(config.seed, run, STREAM_PLANNER);
    let mut planner = Planner::new(config.planner, &config.grid);
    let mut position = config.start_position;
    let mut waypoints = vec![position];
    let mut flown = 0.0;

    st.measure(position, &mut observer)?;
    let mut sampler = ArcSampler::after_sample(config.measurement_spacing)?;
    let mut idle = 0;
    let fallback_graph;
    let graph = match &shared.graph {
        Some(g) => g,
        None => {
            fallback_graph = MotionGraph::empty(config.grid.len());
            &fallback_graph
        }
    };

    while st.stop.is_none() {
        let field = field_for(config.target, &st.states, config, params)?;
        let request = PlanRequest {
            current_position: position,
            uncertainty: &field,
            grid: &config.grid,
            graph,
            engine: config.engine,
        };
        let leg = planner.next_leg(&request, &mut planner_rng)?;
        let length = leg_length(&leg);
        if length <= 0.0 {
            idle += 1;
            if idle > MAX_IDLE_LEGS {
                return Err(SurveyError::Stalled(idle));
            }
            continue;
        }
        idle = 0;

        let before = sampler.until_next();
        let mut failure = None;
        let mut taken = 0usize;
        let completed = sampler.walk(&leg, |p| {
            taken += 1;
            match st.measure(p, &mut observer) {
                Ok(()) => st.stop.is_none(),
                Err(e) => {
                    failure = Some(e);
                    false
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        waypoints.extend(leg.iter().skip(1));
        if completed {
            flown += length;
            position = *leg.last().unwrap_or(&position);
        } else {
            flown += before + (taken - 1) as f64 * config.measurement_spacing;
            position = st.measurements.last().map_or(position, |m| m.position);
        }
    }

    Ok(SurveyRecord {
        run,
        transmitters: scenario.params.transmitters.clone(),
        measurements: st.measurements,
        waypoints,
        metrics: st.metrics,
        stop: st.stop.unwrap_or(StopReason::MaxMeasurements),
        flight_time: flown / config.speed,
    })
}

/// Mean and population standard deviation of every metric at one measurement index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub t: usize,
    pub mean_meters: f64,
    pub std_meters: f64,
    pub mean_total_unc_power: f64,
    pub std_total_unc_power: f64,
    pub mean_total_unc_service: f64,
    pub std_total_unc_service: f64,
    pub mean_service_error_rate: f64,
    pub std_service_error_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    pub planner: PlannerKind,
    pub runs: usize,
    pub rows: Vec<AggregateRow>,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aligns runs by measurement index and averages their metrics. Runs that
/// stopped early truncate the table to the shortest run.
pub fn summarize(planner: PlannerKind, records: &[SurveyRecord]) -> Result<MonteCarloSummary> {
    if records.is_empty() {
        return Err(SurveyError::Empty("monte carlo runs"));
    }
    let len = records.iter().map(|r| r.metrics.len()).min().unwrap_or(0);
    let rows = (0..len)
        .map(|t| {
            let col =
                |f: fn(&MetricsRow) -> f64| mean_std(records.iter().map(move |r| f(&r.metrics[t])));
            let (mean_meters, std_meters) = col(|m| m.meters);
            let (mean_total_unc_power, std_total_unc_power) = col(|m| m.total_unc_power);
            let (mean_total_unc_service, std_total_unc_service) = col(|m| m.total_unc_service);
            let (mean_service_error_rate, std_service_error_rate) = col(|m| m.service_error_rate);
            AggregateRow {
                t,
                mean_meters,
                std_meters,
                mean_total_unc_power,
                std_total_unc_power,
                mean_total_unc_service,
                std_total_unc_service,
                mean_service_error_rate,
                std_service_error_rate,
            }
        })
        .collect();
    Ok(MonteCarloSummary {
        planner,
        runs: records.len(),
        rows,
    })
}

/// Runs `runs` independent surveys with `config.planner`.
pub fn monte_carlo(
    config: &SurveyConfig,
    runs: usize,
    threads: Option<usize>,
) -> Result<MonteCarloSummary> {
    let shared = SharedModel::new(config)?;
    let records = run_many(config, &shared, runs, threads)?;
    summarize(config.planner, &records)
}

/// Monte Carlo comparison of several planners over the same environments.
pub fn monte_carlo_planners(
    config: &SurveyConfig,
    planners: &[PlannerKind],
    runs: usize,
    threads: Option<usize>,
) -> Result<Vec<MonteCarloSummary>> {
    let shared = SharedModel::new(config)?;
    planners
        .iter()
        .map(|&planner| {
            let cfg = SurveyConfig {
                planner,
                ..config.clone()
            };
            cfg.validate()?;
            let records = run_many(&cfg, &shared, runs, threads)?;
            summarize(planner, &records)
        })
        .collect()
}

/// Runs `0..runs` in parallel and returns the records in run order.
pub fn run_many(
    config: &SurveyConfig,
    shared: &SharedModel,
    runs: usize,
    threads: Option<usize>,
) -> Result<Vec<SurveyRecord>> {
    if runs == 0 {
        return Err(invalid("runs", "must be >= 1"));
    }
    let work = || {
        (0..runs)
            .into_par_iter()
            .map(|run| run_survey_with(config, shared, run, |_| {}))
            .collect::<Result<Vec<_>>>()
    };
    match threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| invalid("threads", e.to_string()))?
            .install(work),
        _ => work(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SurveyConfig {
        SurveyConfig {
            grid: GridSpec::new(6, 5, 10.0)
                .unwrap()
                .with_altitude(20.0)
                .unwrap(),
            r_min: -60.0,
            max_measurements: Some(40),
            ..SurveyConfig::default()
        }
    }

    #[test]
    fn zero_budget_measures_only_start() {
        let cfg = SurveyConfig {
            max_measurements: Some(0),
            ..small_config()
        };
        let rec = run_survey(&cfg).unwrap();
        assert_eq!(rec.measurements.len(), 1);
        assert_eq!(rec.measurements[0].position, cfg.start_position);
        assert_eq!(rec.metrics.len(), 1);
        assert_eq!(rec.metrics[0].t, 0);
    }

    #[test]
    fn survey_is_deterministic() {
        for planner in PlannerKind::ALL {
            let cfg = SurveyConfig {
                planner,
                ..small_config()
            };
            assert_eq!(run_survey(&cfg).unwrap(), run_survey(&cfg).unwrap());
        }
    }

    #[test]
    fn exhaustive_noiseless_survey_removes_power_uncertainty() {
        let cfg = SurveyConfig {
            grid: GridSpec::new(4, 4, 10.0)
                .unwrap()
                .with_altitude(20.0)
                .unwrap(),
            planner: PlannerKind::Grid,
            target: MapKind::Power,
            // Boustrophedon over 4x4 at 5 m spacing: 4 rows of 30 m plus 3 steps of 10 m.
            max_measurements: Some(30),
            ..SurveyConfig::default()
        };
        let rec = run_survey(&cfg).unwrap();
        let visited: std::collections::HashSet<usize> = rec
            .measurements
            .iter()
            .filter_map(|m| cfg.grid.point_to_index(&m.position))
            .collect();
        assert_eq!(visited.len(), 16);
        assert!(rec.metrics.last().unwrap().total_unc_power < 0.01);
    }

    #[test]
    fn meters_follow_measurement_index() {
        for planner in PlannerKind::ALL {
            let cfg = SurveyConfig {
                planner,
                ..small_config()
            };
            let rec = run_survey(&cfg).unwrap();
            assert_eq!(rec.metrics.len(), 41);
            for (t, row) in rec.metrics.iter().enumerate() {
                assert_eq!(row.meters, t as f64 * 5.0);
            }
            for w in rec.measurements.windows(2) {
                // Consecutive samples never lie more than one spacing apart.
                assert!(w[0].position.distance(&w[1].position) <= 5.0 + 1e-9);
            }
            assert!((rec.flight_time - 40.0 * 5.0 / cfg.speed).abs() < 1e-6);
        }
    }

    #[test]
    fn power_uncertainty_never_increases() {
        for planner in PlannerKind::ALL {
            let cfg = SurveyConfig {
                planner,
                ..small_config()
            };
            let rec = run_survey(&cfg).unwrap();
            for w in rec.metrics.windows(2) {
                assert!(w[1].total_unc_power <= w[0].total_unc_power + 1e-9);
            }
        }
    }

    #[test]
    fn threshold_stop() {
        let cfg = SurveyConfig {
            max_measurements: None,
            uncertainty_threshold: Some(0.8),
            target: MapKind::Power,
            ..small_config()
        };
        let rec = run_survey(&cfg).unwrap();
        assert_eq!(rec.stop, StopReason::UncertaintyThreshold);
        assert!(rec.metrics.last().unwrap().total_unc_power <= 0.8);
        assert!(rec.metrics[..rec.metrics.len() - 1]
            .iter()
            .all(|m| m.total_unc_power > 0.8));
    }

    #[test]
    fn invalid_configs_rejected() {
        let no_stop = SurveyConfig {
            max_measurements: None,
            ..small_config()
        };
        assert!(run_survey(&no_stop).is_err());
        let outside = SurveyConfig {
            start_position: Point::new(-5.0, 0.0),
            ..small_config()
        };
        assert!(run_survey(&outside).is_err());
    }

    #[test]
    fn service_error_rate_examples() {
        let grid = GridSpec::new(2, 2, 10.0).unwrap();
        let gt =
            GroundTruth::from_grid_values(&grid, vec![DVector::from_vec(vec![1.0, 9.0, 3.0, 7.0])])
                .unwrap();
        let truth = [0.0, 1.0, 0.0, 1.0];
        assert_eq!(service_error_rate(&truth, &gt, 5.0).unwrap(), 0.0);
        let inverted: Vec<f64> = truth.iter().map(|p| 1.0 - p).collect();
        assert_eq!(service_error_rate(&inverted, &gt, 5.0).unwrap(), 1.0);
        assert_eq!(
            service_error_rate(&[0.0, 0.0, 0.0, 0.0], &gt, 5.0).unwrap(),
            0.5
        );
        assert!(service_error_rate(&[0.0], &gt, 5.0).is_err());
    }

    #[test]
    fn service_map_is_or_combined() {
        let grid = GridSpec::new(1, 2, 10.0).unwrap();
        let gt = GroundTruth::from_grid_values(
            &grid,
            vec![
                DVector::from_vec(vec![9.0, 1.0]),
                DVector::from_vec(vec![1.0, 9.0]),
            ],
        )
        .unwrap();
        assert_eq!(gt.service_map(5.0), vec![true, true]);
        let p = combined_service_probability(&[vec![0.9, 0.2], vec![0.1, 0.5]]);
        assert!((p[0] - 0.91).abs() < 1e-12 && (p[1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn single_run_monte_carlo_has_zero_spread() {
        let cfg = small_config();
        let mc = monte_carlo(&cfg, 1, Some(1)).unwrap();
        let rec = run_survey(&cfg).unwrap();
        assert_eq!(mc.rows.len(), 41);
        for (row, m) in mc.rows.iter().zip(&rec.metrics) {
            assert_eq!(row.mean_total_unc_service, m.total_unc_service);
            assert_eq!(row.std_total_unc_service, 0.0);
            assert_eq!(row.std_service_error_rate, 0.0);
        }
    }

    #[test]
    fn monte_carlo_independent_of_thread_count() {
        let cfg = SurveyConfig {
            max_measurements: Some(15),
            ..small_config()
        };
        let a = monte_carlo(&cfg, 6, Some(1)).unwrap();
        let b = monte_carlo(&cfg, 6, Some(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn planners_share_environments() {
        let cfg = small_config();
        let shared = SharedModel::new(&cfg).unwrap();
        let a = realize_scenario(&cfg, &shared, 3).unwrap();
        let b = realize_scenario(
            &SurveyConfig {
                planner: PlannerKind::Spiral,
                ..cfg.clone()
            },
            &shared,
            3,
        )
        .unwrap();
        assert_eq!(a.params.transmitters, b.params.transmitters);
        assert_eq!(a.truth.grid_power(0), b.truth.grid_power(0));
        let c = realize_scenario(&cfg, &shared, 4).unwrap();
        assert_ne!(a.params.transmitters, c.params.transmitters);
    }

    #[test]
    fn observer_sees_prior_then_each_measurement() {
        let cfg = SurveyConfig {
            max_measurements: Some(5),
            ..small_config()
        };
        let shared = SharedModel::new(&cfg).unwrap();
        let mut counts = Vec::new();
        run_survey_with(&cfg, &shared, 0, |v| counts.push(v.count)).unwrap();
        assert_eq!(counts, vec![0, 1, 2, 3, 4, 5, 6]);
    }
}
