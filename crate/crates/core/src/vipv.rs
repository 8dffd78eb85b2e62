//! Side-facing irradiance prediction for vehicle-integrated photovoltaics.
//!
//! The reading `s₂` of a side sensor is modelled relative to the roof sensor
//! `s₁` as `s₂ = s₁(1 + f(heading, lon, lat))`. The regression target is
//! `y = (s₂ − s₁)/s₁` and a prediction `ŷ` maps back to `ŝ₂ = s₁(1 + ŷ)`.
//! Three predictors of `y` are compared on a validation window of the test
//! log: the training mean, a linear regression on the raw inputs and an
//! extreme learning machine chosen by cross-validation over weight draws.
//! Errors are reported in sensor units, `s₂ − ŝ₂`.
//!
//! Heading enters in degrees; the jump between 359° and 0° is left as is.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::criteria::{decompose_mspe, mean_squared_error, MspeDecomposition};
use crate::crossval::{mean, run_cv, CvConfig};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::training::{fit_least_squares, trim_extremes, Dataset, Role};

/// Roof readings below this value give no relative target.
pub const MIN_REFERENCE_IRRADIANCE: f64 = 1.0;

/// Quantile levels of the error decomposition.
pub const DECOMPOSITION_LEVELS: (f64, f64) = (0.1, 0.9);

/// One row of a sensor log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorRecord {
    /// UTC seconds.
    pub timestamp: f64,
    pub irr_up: f64,
    pub irr_left: f64,
    pub irr_right: f64,
    pub irr_back: f64,
    /// Degrees in `[0, 360)`.
    pub heading: f64,
    pub lat: f64,
    pub lon: f64,
    /// m/s.
    pub wind_speed: f64,
    pub wind_dir: f64,
    /// °C.
    pub air_temp: f64,
}

impl SensorRecord {
    /// Field-level checks; ordering of timestamps is checked by [`clean_log`].
    pub fn validate(&self) -> core::result::Result<(), String> {
        let fields = [
            ("timestamp", self.timestamp),
            ("irr_up", self.irr_up),
            ("irr_left", self.irr_left),
            ("irr_right", self.irr_right),
            ("irr_back", self.irr_back),
            ("heading", self.heading),
            ("lat", self.lat),
            ("lon", self.lon),
            ("wind_speed", self.wind_speed),
            ("wind_dir", self.wind_dir),
            ("air_temp", self.air_temp),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(format!("{name} is not a finite number"));
        }
        for (name, v) in [
            ("irr_up", self.irr_up),
            ("irr_left", self.irr_left),
            ("irr_right", self.irr_right),
            ("irr_back", self.irr_back),
            ("wind_speed", self.wind_speed),
        ] {
            if v < 0.0 {
                return Err(format!("{name} = {v} is negative"));
            }
        }
        if !(0.0..360.0).contains(&self.heading) {
            return Err(format!("heading = {} is outside [0, 360)", self.heading));
        }
        if !(-90.0..=90.0).contains(&self.lat) {
            return Err(format!("lat = {} is outside [-90, 90]", self.lat));
        }
        if !(-180.0..=180.0).contains(&self.lon) {
            return Err(format!("lon = {} is outside [-180, 180]", self.lon));
        }
        Ok(())
    }

    pub fn side(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.irr_left,
            Side::Right => self.irr_right,
            Side::Back => self.irr_back,
        }
    }
}

/// Keeps valid records whose timestamp exceeds the last kept one; returns
/// them in order with the number dropped.
pub fn clean_log(records: impl IntoIterator<Item = SensorRecord>) -> (Vec<SensorRecord>, usize) {
    let mut kept: Vec<SensorRecord> = Vec::new();
    let mut dropped = 0;
    for r in records {
        let ordered = kept.last().is_none_or(|last| r.timestamp > last.timestamp);
        if ordered && r.validate().is_ok() {
            kept.push(r);
        } else {
            dropped += 1;
        }
    }
    (kept, dropped)
}

/// Side sensor compared with the roof sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Back,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Back => "back",
        }
    }
}

impl core::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            "back" => Ok(Side::Back),
            _ => Err(Error::param("side", format!("expected left, right or back, got {s:?}"))),
        }
    }
}

/// `(s₂ − s₁)/s₁`, or `None` when `s₁ < MIN_REFERENCE_IRRADIANCE`.
pub fn relative_target(s1: f64, s2: f64) -> Option<f64> {
    if s1 >= MIN_REFERENCE_IRRADIANCE {
        Some((s2 - s1) / s1)
    } else {
        None
    }
}

/// `s₁(1 + ŷ)`.
pub fn reconstruct_prediction(s1: f64, y_hat: f64) -> f64 {
    s1 * (1.0 + y_hat)
}

/// Least-squares constant: the mean of the targets.
pub fn fit_null_model(targets: &[f64]) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::param("targets", "null model of an empty sample"));
    }
    Ok(mean(targets))
}

/// Running sums.
pub fn cumulate_yield(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VipvConfig {
    /// Cross-validation of the extreme learning machine.
    pub cv: CvConfig,
    /// Share of training rows removed as extremes of the target.
    pub trim_fraction: f64,
    pub side: Side,
    /// 1-based inclusive row range of the (cleaned) test log used for
    /// validation; `None` takes the whole log.
    pub val_window: Option<(usize, usize)>,
}

impl VipvConfig {
    pub fn validate(&self) -> Result<()> {
        self.cv.validate()?;
        if !(0.0..1.0).contains(&self.trim_fraction) {
            return Err(Error::param(
                "trim",
                format!("trim fraction must lie in [0, 1), got {}", self.trim_fraction),
            ));
        }
        if let Some((a, b)) = self.val_window {
            if a == 0 || b < a {
                return Err(Error::param("val-window", format!("expected 1 ≤ a ≤ b, got {a}:{b}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Null,
    Linear,
    Elm,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Null, Method::Linear, Method::Elm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Null => "null",
            Method::Linear => "linear",
            Method::Elm => "elm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodReport {
    pub method: Method,
    /// Validation error `s₂ − ŝ₂` split by quantiles of its size.
    pub decomposition: MspeDecomposition,
    /// MSPE of the relative target on the trimmed training sample.
    pub training_mspe: f64,
    /// `ŝ₂` over the validation window.
    pub predictions: Vec<f64>,
    pub cumulative_predicted: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VipvReport {
    pub side: Side,
    /// Usable training rows after trimming.
    pub n_train: usize,
    pub n_trimmed: usize,
    /// Usable validation rows.
    pub n_validation: usize,
    /// Rows skipped by the roof-irradiance guard, training and validation.
    pub n_low_light: usize,
    /// 0-based index of the selected weight draw.
    pub best_draw: usize,
    pub elm_mean_mspe: f64,
    pub timestamps: Vec<f64>,
    /// Observed `s₂` over the validation window.
    pub observed: Vec<f64>,
    pub cumulative_observed: Vec<f64>,
    /// Rows in [`Method::ALL`] order.
    pub methods: Vec<MethodReport>,
}

impl VipvReport {
    pub fn method(&self, m: Method) -> &MethodReport {
        self.methods
            .iter()
            .find(|r| r.method == m)
            .expect("every method is reported")
    }
}

struct Usable {
    inputs: Vec<f64>,
    targets: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
    timestamps: Vec<f64>,
    low_light: usize,
}

fn usable(records: &[SensorRecord], side: Side) -> Usable {
    let mut u = Usable {
        inputs: Vec::new(),
        targets: Vec::new(),
        s1: Vec::new(),
        s2: Vec::new(),
        timestamps: Vec::new(),
        low_light: 0,
    };
    for r in records {
        let s2 = r.side(side);
        match relative_target(r.irr_up, s2) {
            Some(y) => {
                u.inputs.extend_from_slice(&[r.heading, r.lon, r.lat]);
                u.targets.push(y);
                u.s1.push(r.irr_up);
                u.s2.push(s2);
                u.timestamps.push(r.timestamp);
            }
            None => u.low_light += 1,
        }
    }
    u
}

fn dataset(u: &Usable, role: Role) -> Result<Dataset> {
    Dataset::with_targets(
        Matrix::from_vec(u.targets.len(), 3, u.inputs.clone())?,
        &u.targets,
        role,
    )
}

fn with_intercept(z: &Matrix) -> Matrix {
    let mut x = Matrix::zeros(z.rows(), z.cols() + 1);
    for i in 0..z.rows() {
        let row = x.row_mut(i);
        row[0] = 1.0;
        row[1..].copy_from_slice(z.row(i));
    }
    x
}

/// Fits the three predictors on `training` and evaluates them on the
/// validation window of `test`. Both logs are expected to be cleaned.
pub fn run_vipv_pipeline(training: &[SensorRecord], test: &[SensorRecord], cfg: &VipvConfig) -> Result<VipvReport> {
    cfg.validate()?;
    let window = match cfg.val_window {
        Some((a, b)) => {
            if b > test.len() {
                return Err(Error::param(
                    "val-window",
                    format!("window {a}:{b} exceeds the {} rows of the test log", test.len()),
                ));
            }
            &test[a - 1..b]
        }
        None => test,
    };
    let train_u = usable(training, cfg.side);
    let val_u = usable(window, cfg.side);
    if train_u.targets.is_empty() {
        return Err(Error::param("train", "no training row has usable roof irradiance"));
    }
    if val_u.targets.len() < 2 {
        return Err(Error::param(
            "val-window",
            format!("{} usable validation rows, at least 2 are needed", val_u.targets.len()),
        ));
    }
    let full = dataset(&train_u, Role::Training)?;
    let train = trim_extremes(&full, cfg.trim_fraction)?;
    let validation = dataset(&val_u, Role::Validation)?;
    let y_train = train.target_vector();

    let f0 = fit_null_model(&y_train)?;
    let null_train = alloc::vec![f0; y_train.len()];
    let null_val = alloc::vec![f0; val_u.targets.len()];

    let x_lin = with_intercept(train.inputs());
    let beta_lin = fit_least_squares(&x_lin, train.targets())?;
    let lin_train = x_lin.matmul(beta_lin.beta())?.into_vec();
    let lin_val = with_intercept(validation.inputs()).matmul(beta_lin.beta())?.into_vec();

    let cv = run_cv(&train, &validation, &cfg.cv)?;
    let elm_train = cv.selected.predict(train.inputs())?.into_vec();
    let elm_val = cv.selected.predict(validation.inputs())?.into_vec();

    let (p_lo, p_hi) = DECOMPOSITION_LEVELS;
    let mut methods = Vec::with_capacity(3);
    for (method, fit, pred) in [
        (Method::Null, null_train, null_val),
        (Method::Linear, lin_train, lin_val),
        (Method::Elm, elm_train, elm_val),
    ] {
        let s2_hat: Vec<f64> = val_u
            .s1
            .iter()
            .zip(&pred)
            .map(|(&s1, &y)| reconstruct_prediction(s1, y))
            .collect();
        let errors: Vec<f64> = val_u.s2.iter().zip(&s2_hat).map(|(s, h)| s - h).collect();
        methods.push(MethodReport {
            method,
            decomposition: decompose_mspe(&errors, p_lo, p_hi)?,
            training_mspe: mean_squared_error(&y_train, &fit)?,
            cumulative_predicted: cumulate_yield(&s2_hat),
            predictions: s2_hat,
        });
    }

    Ok(VipvReport {
        side: cfg.side,
        n_train: train.len(),
        n_trimmed: full.len() - train.len(),
        n_validation: val_u.targets.len(),
        n_low_light: train_u.low_light + val_u.low_light,
        best_draw: cv.best,
        elm_mean_mspe: cv.mean_mspe,
        timestamps: val_u.timestamps,
        cumulative_observed: cumulate_yield(&val_u.s2),
        observed: val_u.s2,
        methods,
    })
}
