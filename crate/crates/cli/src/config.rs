//! Run configuration: one JSON document per run, command-line flags applied
//! on top.

use std::path::{Path, PathBuf};

use chmhd::forms::{CoefficientLaw, Coefficients};
use chmhd::scheme::{CubicLinearization, NonConvergence, SchemeParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Energy,
    Converge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Informational; the subcommand decides what runs. A mismatch is an error.
    pub mode: Option<Mode>,
    /// Mesh resolution for `simulate` and `energy`.
    pub n: usize,
    /// Resolutions for `converge`.
    pub levels: Vec<usize>,
    /// Explicit time step. Takes precedence over `dt_rule`.
    pub dt: Option<f64>,
    /// `"<c>h2"`: dt = c h^2 on every level.
    pub dt_rule: Option<String>,
    pub t_final: f64,
    /// Step count for `energy`; overrides `t_final` there.
    pub steps: Option<usize>,
    pub eps: f64,
    pub lambda: f64,
    pub s_c: f64,
    /// `"paper-exp"` or `"constant:<c>"`.
    pub coefficients: String,
    pub picard_tol: f64,
    pub picard_max: usize,
    /// `"abort"` or `"warn"`.
    pub on_nonconvergence: String,
    /// `"newton"` or `"picard"`.
    pub linearization: String,
    pub output_dir: PathBuf,
    pub snapshot_every: usize,
    pub seed: u64,
    /// `"cosine"`, `"random"`, `"mms"` or `"constant:<c>"`.
    pub initial: String,
    /// Allowed energy increase per step, relative to `|E^0|`.
    pub energy_slack: f64,
    /// Worker threads for independent levels; `None` uses the default pool.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: None,
            n: 16,
            levels: vec![4, 8, 16],
            dt: None,
            dt_rule: None,
            t_final: 0.5,
            steps: None,
            eps: 0.05,
            lambda: 1.0,
            s_c: 1.0,
            coefficients: "paper-exp".into(),
            picard_tol: 1e-10,
            picard_max: 50,
            on_nonconvergence: "abort".into(),
            linearization: "newton".into(),
            output_dir: PathBuf::from("out"),
            snapshot_every: 0,
            seed: 0,
            initial: "cosine".into(),
            energy_slack: 1e-8,
            threads: None,
        }
    }
}

/// Initial data selected by `initial`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initial {
    /// `phi = cos(pi x) cos(pi y)`, `u = B = 0`
    Cosine,
    /// Seeded smooth phase field in [-0.9, 0.9] with small solenoidal `u`, `B`.
    Random,
    /// Manufactured solution at `t = 0`, driven by its sources.
    Manufactured,
    Constant(f64),
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_constant(s: &str, what: &str) -> Result<Option<f64>, CliError> {
    match s.strip_prefix("constant:") {
        Some(v) => v
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| config_error(format!("{what}: cannot parse constant in {s:?}"))),
        None => Ok(None),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_error(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Everything that can be checked without running: enumerations parse,
    /// and the scheme parameters are valid at the coarsest time step.
    pub fn validate(&self) -> Result<(), CliError> {
        self.coefficients()?;
        self.linearization()?;
        self.on_nonconvergence()?;
        self.initial()?;
        self.dt_factor()?;
        if self.n == 0 {
            return Err(config_error("n must be positive"));
        }
        if self.levels.contains(&0) {
            return Err(config_error("levels must be positive"));
        }
        if self.threads == Some(0) {
            return Err(config_error("threads must be positive"));
        }
        if !(self.energy_slack >= 0.0 && self.energy_slack.is_finite()) {
            return Err(config_error("energy_slack must be non-negative"));
        }
        let dt = self.dt.unwrap_or(1.0);
        self.scheme_params(dt, self.t_final.max(0.0))?;
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(config_error(format!("t_final must be non-negative, got {}", self.t_final)));
        }
        Ok(())
    }

    pub fn check_mode(&self, mode: Mode) -> Result<(), CliError> {
        match self.mode {
            Some(m) if m != mode => Err(config_error(format!("config is for {m:?}, not {mode:?}"))),
            _ => Ok(()),
        }
    }

    pub fn coefficients(&self) -> Result<Coefficients, CliError> {
        if self.coefficients == "paper-exp" {
            return Ok(Coefficients::exponential());
        }
        match parse_constant(&self.coefficients, "coefficients")? {
            Some(c) => Ok(Coefficients {
                kappa: CoefficientLaw::Constant(c),
                nu: CoefficientLaw::Constant(c),
                eta: CoefficientLaw::Constant(c),
            }),
            None => Err(config_error(format!("unknown coefficient law {:?}", self.coefficients))),
        }
    }

    pub fn linearization(&self) -> Result<CubicLinearization, CliError> {
        match self.linearization.as_str() {
            "newton" => Ok(CubicLinearization::Newton),
            "picard" => Ok(CubicLinearization::Picard),
            other => Err(config_error(format!("unknown linearization {other:?}"))),
        }
    }

    pub fn on_nonconvergence(&self) -> Result<NonConvergence, CliError> {
        match self.on_nonconvergence.as_str() {
            "abort" => Ok(NonConvergence::Abort),
            "warn" => Ok(NonConvergence::Warn),
            other => Err(config_error(format!("unknown non-convergence policy {other:?}"))),
        }
    }

    pub fn initial(&self) -> Result<Initial, CliError> {
        match self.initial.as_str() {
            "cosine" => Ok(Initial::Cosine),
            "random" => Ok(Initial::Random),
            "mms" => Ok(Initial::Manufactured),
            s => parse_constant(s, "initial")?
                .map(Initial::Constant)
                .ok_or_else(|| config_error(format!("unknown initial data {s:?}"))),
        }
    }

    fn dt_factor(&self) -> Result<Option<f64>, CliError> {
        let Some(rule) = &self.dt_rule else { return Ok(None) };
        let c = rule
            .strip_suffix("h2")
            .and_then(|c| c.parse::<f64>().ok())
            .filter(|c| *c > 0.0 && c.is_finite())
            .ok_or_else(|| config_error(format!("dt_rule must look like \"0.1h2\", got {rule:?}")))?;
        Ok(Some(c))
    }

    /// Time step and step count on a mesh of resolution `n` running to
    /// `t_final`: explicit `dt` first, then `dt_rule`, then `0.1h2`. The step
    /// count is `round(T / dt)` and `dt` is reset to `T / steps`.
    pub fn time_grid(&self, n: usize, t_final: f64) -> Result<(f64, usize), CliError> {
        let dt = match (self.dt, self.dt_factor()?) {
            (Some(dt), _) => dt,
            (None, c) => {
                let h = 1.0 / n as f64;
                c.unwrap_or(0.1) * h * h
            }
        };
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(config_error(format!("dt must be positive, got {dt}")));
        }
        if t_final == 0.0 {
            return Ok((dt, 0));
        }
        let steps = ((t_final / dt).round() as usize).max(1);
        Ok((t_final / steps as f64, steps))
    }

    pub fn scheme_params(&self, dt: f64, t_final: f64) -> Result<SchemeParams, CliError> {
        let params = SchemeParams {
            eps: self.eps,
            lambda: self.lambda,
            s_c: self.s_c,
            dt,
            t_final,
            coefficients: self.coefficients()?,
            picard_tol: self.picard_tol,
            picard_max: self.picard_max,
            linearization: self.linearization()?,
            on_nonconvergence: self.on_nonconvergence()?,
        };
        params.validate().map_err(|e| config_error(e.to_string()))?;
        Ok(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_experiment_parameters() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!((c.eps, c.lambda, c.s_c), (0.05, 1.0, 1.0));
        assert_eq!(c.coefficients().unwrap(), Coefficients::exponential());
        let (dt, steps) = c.time_grid(4, 0.5).unwrap();
        assert_eq!(steps, 80);
        assert!((dt - 0.00625).abs() < 1e-15);
    }

    #[test]
    fn explicit_dt_wins_over_rule() {
        let c = RunConfig::from_json(r#"{"dt": 0.1, "dt_rule": "0.2h2"}"#).unwrap();
        assert_eq!(c.time_grid(8, 1.0).unwrap(), (0.1, 10));
        let c = RunConfig::from_json(r#"{"dt_rule": "0.2h2"}"#).unwrap();
        assert_eq!(c.time_grid(2, 0.5).unwrap().1, 10);
        assert_eq!(c.time_grid(2, 0.0).unwrap().1, 0);
    }

    #[test]
    fn constant_coefficients_parse() {
        let c = RunConfig::from_json(r#"{"coefficients": "constant:2.5"}"#).unwrap();
        assert_eq!(c.coefficients().unwrap().nu, CoefficientLaw::Constant(2.5));
    }

    #[test]
    fn bad_values_are_config_errors() {
        for bad in [
            r#"{"eps": -1}"#,
            r#"{"coefficients": "constant:0"}"#,
            r#"{"coefficients": "linear"}"#,
            r#"{"dt_rule": "h"}"#,
            r#"{"picard_tol": 0}"#,
            r#"{"on_nonconvergence": "retry"}"#,
            r#"{"initial": "constant:x"}"#,
            r#"{"unknown": 1}"#,
            r#"{"t_final": -1}"#,
            r#"{"threads": 0}"#,
            "not json",
        ] {
            let e = RunConfig::from_json(bad).unwrap_err();
            assert_eq!(e.exit_code(), 4, "{bad}");
        }
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let c = RunConfig::from_json(r#"{"mode": "energy"}"#).unwrap();
        assert!(c.check_mode(Mode::Energy).is_ok());
        assert!(c.check_mode(Mode::Converge).is_err());
    }
}
