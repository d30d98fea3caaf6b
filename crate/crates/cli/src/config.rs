//! JSON scenario files.
//!
//! The file is a flat object; every key is optional and falls back to the
//! default scenario (30x25 grid at 10 m, two random transmitters, 2.4 GHz).

use std::path::Path;

use aerosurvey::{
    Aggregation, ChannelParams, GridSpec, MapKind, PlannerKind, Point, ShortestPath, SurveyConfig,
    Transmitter, TransmitterLayout,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// serde_json messages already carry the line and column.
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
    pub altitude: f64,
    /// Explicit transmitters; when absent they are drawn at random for each run.
    pub transmitters: Option<Vec<Transmitter>>,
    pub num_transmitters: usize,
    pub tx_height: f64,
    pub tx_power_dbm: f64,
    pub frequency_hz: f64,
    pub pathloss_exponent: f64,
    pub shadow_var: f64,
    pub corr_distance: f64,
    pub shadow_mean: f64,
    pub fading_var: f64,
    pub noise_var: f64,
    pub r_min: f64,
    pub measurement_spacing: f64,
    pub planner: PlannerKind,
    pub shortest_path: ShortestPath,
    pub aggregation: Aggregation,
    pub target: MapKind,
    pub max_measurements: Option<usize>,
    pub uncertainty_threshold: Option<f64>,
    pub speed: f64,
    pub start_position: Point,
    pub seed: u64,
}

impl Default for ConfigFile {
    fn default() -> Self {
        let d = SurveyConfig::default();
        let (num_transmitters, tx_height, tx_power_dbm) = match d.layout {
            TransmitterLayout::Random {
                count,
                height,
                power_dbm,
            } => (count, height, power_dbm),
            TransmitterLayout::Fixed(_) => unreachable!("default layout is random"),
        };
        Self {
            rows: d.grid.rows,
            cols: d.grid.cols,
            spacing: d.grid.spacing,
            altitude: d.grid.altitude,
            transmitters: None,
            num_transmitters,
            tx_height,
            tx_power_dbm,
            frequency_hz: d.channel.frequency_hz,
            pathloss_exponent: d.channel.pathloss_exponent,
            shadow_var: d.channel.shadow_var,
            corr_distance: d.channel.corr_distance,
            shadow_mean: d.channel.shadow_mean,
            fading_var: d.channel.fading_var,
            noise_var: d.channel.noise_var,
            r_min: d.r_min,
            measurement_spacing: d.measurement_spacing,
            planner: d.planner,
            shortest_path: d.engine,
            aggregation: d.aggregation,
            target: d.target,
            max_measurements: d.max_measurements,
            uncertainty_threshold: d.uncertainty_threshold,
            speed: d.speed,
            start_position: d.start_position,
            seed: d.seed,
        }
    }
}

impl ConfigFile {
    pub fn into_survey_config(self) -> Result<SurveyConfig, ConfigError> {
        let config = SurveyConfig {
            grid: GridSpec {
                rows: self.rows,
                cols: self.cols,
                spacing: self.spacing,
                origin: Point::default(),
                altitude: self.altitude,
            },
            channel: ChannelParams {
                transmitters: Vec::new(),
                frequency_hz: self.frequency_hz,
                pathloss_exponent: self.pathloss_exponent,
                shadow_var: self.shadow_var,
                shadow_mean: self.shadow_mean,
                corr_distance: self.corr_distance,
                fading_var: self.fading_var,
                noise_var: self.noise_var,
            },
            layout: match self.transmitters {
                Some(txs) => TransmitterLayout::Fixed(txs),
                None => TransmitterLayout::Random {
                    count: self.num_transmitters,
                    height: self.tx_height,
                    power_dbm: self.tx_power_dbm,
                },
            },
            r_min: self.r_min,
            measurement_spacing: self.measurement_spacing,
            planner: self.planner,
            engine: self.shortest_path,
            aggregation: self.aggregation,
            target: self.target,
            max_measurements: self.max_measurements,
            uncertainty_threshold: self.uncertainty_threshold,
            speed: self.speed,
            start_position: self.start_position,
            seed: self.seed,
        };
        validate(&config)?;
        Ok(config)
    }
}

/// Checks a config and reports the offending key.
pub fn validate(config: &SurveyConfig) -> Result<(), ConfigError> {
    if config.grid.rows == 0 || config.grid.cols == 0 {
        let field = if config.grid.rows == 0 {
            "rows"
        } else {
            "cols"
        };
        return Err(ConfigError::Invalid {
            field: field.into(),
            reason: "must be >= 1".into(),
        });
    }
    config.validate().map_err(|e| match e {
        aerosurvey::SurveyError::InvalidParameter { name, reason } => ConfigError::Invalid {
            field: name.into(),
            reason,
        },
        other => ConfigError::Invalid {
            field: "config".into(),
            reason: other.to_string(),
        },
    })
}

pub fn parse_config(text: &str, origin: &str) -> Result<SurveyConfig, ConfigError> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|source| ConfigError::Parse {
        path: origin.to_string(),
        source,
    })?;
    file.into_survey_config()
}

pub fn load_config(path: &Path) -> Result<SurveyConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, &path.display().to_string())
}
