use thiserror::Error;

use crate::geometry::Point2;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("point ({}, {}) is not inside the domain", .0.x, .0.y)]
    Membership(Point2),

    #[error("grid spacing h = {h} does not resolve the domain: {reason}; try a smaller h")]
    Resolution { h: f64, reason: String },

    #[error("arc leaves the domain near ({}, {})", .0.x, .0.y)]
    Geometry(Point2),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown domain '{0}'")]
    UnknownDomain(String),

    #[error("inconsistent tripod: {0}")]
    Inconsistent(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
