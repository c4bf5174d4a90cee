use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::camera::CameraId;
use crate::error::{Error, Result};
use crate::geometry::{Contour, Point2};
use crate::metrics::{EvalImage, Representation};
use crate::shapes::Shape;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationObject {
    pub class: usize,
    pub contour: Vec<Point2>,
    /// Relative path of the object's PGM mask, if one was written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub shapes: BTreeMap<Representation, Shape>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationImage {
    pub image_id: String,
    pub camera_id: CameraId,
    pub width: usize,
    pub height: usize,
    pub objects: Vec<AnnotationObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationFile {
    pub version: String,
    pub images: Vec<AnnotationImage>,
}

impl Default for AnnotationFile {
    fn default() -> Self {
        Self { version: SCHEMA_VERSION.into(), images: Vec::new() }
    }
}

/// A problem found while validating, tied to an object.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub image_id: String,
    pub object: usize,
    pub reason: String,
}

impl AnnotationFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Canonical pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("annotation serialization is infallible");
        s.push('\n');
        s
    }

    /// Checks version, id uniqueness and contours. Invalid objects are an
    /// error unless `lenient`, in which case they are dropped and reported.
    pub fn validate(&mut self, lenient: bool) -> Result<Vec<Diagnostic>> {
        if self.version != SCHEMA_VERSION {
            return Err(Error::Schema(format!("unsupported version '{}', expected '{SCHEMA_VERSION}'", self.version)));
        }
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (i, img) in self.images.iter().enumerate() {
            if let Some(j) = seen.insert(img.image_id.as_str(), i) {
                return Err(Error::Schema(format!("duplicate image_id '{}' at images {j} and {i}", img.image_id)));
            }
            if img.width == 0 || img.height == 0 {
                return Err(Error::Schema(format!("image '{}' has size {}x{}", img.image_id, img.width, img.height)));
            }
        }
        let mut diags = Vec::new();
        for img in &mut self.images {
            let mut keep = Vec::with_capacity(img.objects.len());
            for (k, obj) in img.objects.drain(..).enumerate() {
                match Contour::new(obj.contour.clone()) {
                    Ok(_) => keep.push(obj),
                    Err(e) => {
                        if !lenient {
                            return Err(Error::InvalidContour { image_id: img.image_id.clone(), object: k, reason: e.to_string() });
                        }
                        warn!("{} object {k}: {e}; dropped", img.image_id);
                        diags.push(Diagnostic { image_id: img.image_id.clone(), object: k, reason: e.to_string() });
                    }
                }
            }
            img.objects = keep;
        }
        Ok(diags)
    }

    /// Images in the form the evaluators take. Call after [`validate`](Self::validate).
    pub fn eval_images(&self) -> Result<Vec<EvalImage>> {
        self.images
            .iter()
            .map(|img| {
                let contours = img
                    .objects
                    .iter()
                    .enumerate()
                    .map(|(k, o)| {
                        Contour::new(o.contour.clone()).map_err(|e| Error::InvalidContour {
                            image_id: img.image_id.clone(),
                            object: k,
                            reason: e.to_string(),
                        })
                    })
                    .collect::<Result<_>>()?;
                Ok(EvalImage { image_id: img.image_id.clone(), camera: img.camera_id, width: img.width, height: img.height, contours })
            })
            .collect()
    }
}

/// Reads and validates an annotation file.
pub fn load_annotations(path: &Path, lenient: bool) -> Result<(AnnotationFile, Vec<Diagnostic>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut file = AnnotationFile::from_json(&text)?;
    let diags = file.validate(lenient)?;
    Ok((file, diags))
}

pub fn save_annotations(path: &Path, file: &AnnotationFile) -> Result<()> {
    std::fs::write(path, file.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
