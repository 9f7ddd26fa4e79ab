//! The metric flag grammar: presets by name, or `loss+agg[+transform]`
//! combined specs, or the same pieces split across `--loss`, `--agg`, and
//! `--transform`.

use thiserror::Error;

use tloss_core::aggregate::{PresetMetric, Transform};
use tloss_core::loss::LossKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("unknown metric {0:?} (presets: mape, medape, rmse, gmape; or loss+agg[+transform])")]
    UnknownMetric(String),
    #[error("unknown loss {0:?} (expected ape, ae, se, or spe)")]
    UnknownLoss(String),
    #[error("unknown aggregator {0:?} (expected additive, multiplicative, quantile:<q>, or ltype:<file>)")]
    UnknownAggregator(String),
    #[error("unknown transform {0:?} (expected mean, geomean, root:<p>, scale:<s>, log:<b>, or none)")]
    UnknownTransform(String),
    #[error("{what} needs a number, got {got:?}")]
    BadNumber { what: &'static str, got: String },
    #[error("quantile level must lie in (0, 1], got {0}")]
    QOutOfRange(f64),
    #[error("root exponent must be positive, got {0}")]
    BadRoot(f64),
    #[error("scale factor must be positive, got {0}")]
    BadScale(f64),
    #[error("log base must exceed 1, got {0}")]
    BadLogBase(f64),
    #[error("ltype needs a coefficient file: ltype:<file>")]
    MissingCoefficientFile,
}

/// Aggregator selection before coefficient files are read.
#[derive(Debug, Clone, PartialEq)]
pub enum AggChoice {
    Additive,
    Multiplicative,
    Quantile(f64),
    /// Coefficients come one per line from this file and apply to the
    /// ascending sort.
    LTypeFile(String),
}

impl AggChoice {
    pub fn label(&self) -> String {
        match self {
            AggChoice::Additive => "additive".to_owned(),
            AggChoice::Multiplicative => "multiplicative".to_owned(),
            AggChoice::Quantile(q) => format!("quantile:{q}"),
            AggChoice::LTypeFile(path) => format!("ltype:{path}"),
        }
    }
}

/// One requested metric.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricChoice {
    Preset(PresetMetric),
    Explicit {
        loss: LossKind,
        agg: AggChoice,
        transform: Transform,
    },
}

impl MetricChoice {
    pub fn loss_kind(&self) -> LossKind {
        match self {
            MetricChoice::Preset(preset) => preset.loss_kind(),
            MetricChoice::Explicit { loss, .. } => *loss,
        }
    }

    /// Stable identifier used in report rows.
    pub fn label(&self) -> String {
        match self {
            MetricChoice::Preset(preset) => preset.name().to_owned(),
            MetricChoice::Explicit {
                loss,
                agg,
                transform,
            } => {
                let base = format!("{}+{}", loss.short_name(), agg.label());
                match transform {
                    Transform::None => base,
                    t => format!("{base}+{}", t.label()),
                }
            }
        }
    }
}

pub fn parse_loss_kind(text: &str) -> Result<LossKind, SpecError> {
    match text {
        "ape" => Ok(LossKind::AbsolutePercentageError),
        "ae" => Ok(LossKind::AbsoluteError),
        "se" => Ok(LossKind::SquaredError),
        "spe" => Ok(LossKind::SquaredPercentageError),
        other => Err(SpecError::UnknownLoss(other.to_owned())),
    }
}

fn parse_number(what: &'static str, text: &str) -> Result<f64, SpecError> {
    text.parse().map_err(|_| SpecError::BadNumber {
        what,
        got: text.to_owned(),
    })
}

pub fn parse_agg(text: &str) -> Result<AggChoice, SpecError> {
    match text {
        "additive" => return Ok(AggChoice::Additive),
        "multiplicative" => return Ok(AggChoice::Multiplicative),
        _ => {}
    }
    if let Some(param) = text.strip_prefix("quantile:") {
        let q = parse_number("quantile level", param)?;
        if !(q > 0.0 && q <= 1.0) {
            return Err(SpecError::QOutOfRange(q));
        }
        return Ok(AggChoice::Quantile(q));
    }
    if let Some(path) = text.strip_prefix("ltype:") {
        if path.is_empty() {
            return Err(SpecError::MissingCoefficientFile);
        }
        return Ok(AggChoice::LTypeFile(path.to_owned()));
    }
    if text == "ltype" {
        return Err(SpecError::MissingCoefficientFile);
    }
    Err(SpecError::UnknownAggregator(text.to_owned()))
}

pub fn parse_transform(text: &str) -> Result<Transform, SpecError> {
    match text {
        "none" => return Ok(Transform::None),
        "mean" => return Ok(Transform::Mean),
        "geomean" => return Ok(Transform::GeometricMean),
        _ => {}
    }
    if let Some(param) = text.strip_prefix("root:") {
        let p = parse_number("root exponent", param)?;
        if !(p > 0.0 && p.is_finite()) {
            return Err(SpecError::BadRoot(p));
        }
        return Ok(Transform::Root(p));
    }
    if let Some(param) = text.strip_prefix("scale:") {
        let s = parse_number("scale factor", param)?;
        if !(s > 0.0 && s.is_finite()) {
            return Err(SpecError::BadScale(s));
        }
        return Ok(Transform::Scale(s));
    }
    if let Some(param) = text.strip_prefix("log:") {
        let b = parse_number("log base", param)?;
        if !(b > 1.0 && b.is_finite()) {
            return Err(SpecError::BadLogBase(b));
        }
        return Ok(Transform::LogBase(b));
    }
    Err(SpecError::UnknownTransform(text.to_owned()))
}

/// Parse a `--metric` value: a preset name or `loss+agg[+transform]`.
/// Coefficient file paths must not contain `+` here; use `--agg` for those.
pub fn parse_metric_spec(text: &str) -> Result<MetricChoice, SpecError> {
    if let Some(preset) = PresetMetric::from_name(text) {
        return Ok(MetricChoice::Preset(preset));
    }
    let parts: Vec<&str> = text.split('+').collect();
    match parts.as_slice() {
        [loss, agg] => Ok(MetricChoice::Explicit {
            loss: parse_loss_kind(loss)?,
            agg: parse_agg(agg)?,
            transform: Transform::None,
        }),
        [loss, agg, transform] => Ok(MetricChoice::Explicit {
            loss: parse_loss_kind(loss)?,
            agg: parse_agg(agg)?,
            transform: parse_transform(transform)?,
        }),
        _ => Err(SpecError::UnknownMetric(text.to_owned())),
    }
}
