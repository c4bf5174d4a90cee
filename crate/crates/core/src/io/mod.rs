//! Annotation files, run configuration, dataset splits, report tables and
//! SVG overlays.

mod annotations;
mod config;
mod report;
mod svg;

pub use annotations::{load_annotations, save_annotations, AnnotationFile, AnnotationImage, AnnotationObject, Diagnostic, SCHEMA_VERSION};
pub use config::{split_of, RunConfig, Split};
pub use report::{division_residual_csv, emit_report, ReportFormat};
pub use svg::{render_overlay, render_polylines, shape_element, OverlayObject, OverlayStyle};

use std::collections::BTreeMap;

use crate::synth::SynthImage;

/// Annotation record of a rendered frame. With `mask_dir`, each object
/// refers to `{mask_dir}/{image_id}_{k}.pgm`.
pub fn annotation_from_synth(img: &SynthImage, mask_dir: Option<&str>) -> AnnotationImage {
    AnnotationImage {
        image_id: img.image_id.clone(),
        camera_id: img.camera,
        width: img.width,
        height: img.height,
        objects: img
            .instances
            .iter()
            .enumerate()
            .map(|(k, inst)| AnnotationObject {
                class: inst.class,
                contour: inst.contour.vertices().to_vec(),
                mask: mask_dir.map(|d| format!("{d}/{}_{k}.pgm", img.image_id)),
                shapes: BTreeMap::new(),
            })
            .collect(),
    }
}
