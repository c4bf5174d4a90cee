//! Object shape representations for fisheye cameras.
//!
//! The crate covers the whole ground-truth and evaluation path for fisheye
//! object detection:
//!
//! - [`camera`]: polynomial, equidistant and division radial models, line
//!   projection curves and division-model fitting.
//! - [`geometry`]: hulls, minimum enclosing shapes, circle fitting,
//!   rasterization and IoU.
//! - [`shapes`]: the six representation kinds (standard box, oriented box,
//!   ellipse, curved box, vertex polygon, polar polygon).
//! - [`fitting`] and [`sampling`]: best-fit procedures from instance contours.
//! - [`detect`]: target assignment, loss kernels, orientation bins and
//!   representation-aware NMS.
//! - [`metrics`]: mIoU capacity tables and mAP.
//! - [`synth`]: a synthetic surround-view ground-truth generator.
//! - [`io`]: annotation schema, calibration/run configuration, reports and
//!   SVG overlays.

pub mod error;
pub mod camera;
pub mod geometry;
pub mod fitting;
pub mod sampling;
pub mod shapes;
pub mod detect;
pub mod metrics;
pub mod synth;
pub mod io;

pub use error::{Error, Result};
