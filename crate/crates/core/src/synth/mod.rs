//! Synthetic fisheye ground truth: cuboid scenes around the ego vehicle,
//! rendered through the surround-view rig into instance masks and
//! contours, plus the open-cube line visualization.
//!
//! Rendering casts one ray per pixel center (the same sampling rule the
//! rasterizer uses), so emitted contours reproduce their masks exactly.

mod cube;
mod render;
mod scene;

pub use cube::{open_cube_segments, render_open_cube, CubeCurve, CUBE_CURVE_SAMPLES};
pub use render::{label_image, largest_component, render_instances, trace_boundary, RayTable, RenderedInstance, MIN_INSTANCE_PIXELS};
pub use scene::{footprints_overlap, generate_scene, Cuboid, Scene, SceneConfig};

use rayon::prelude::*;

use crate::camera::{CameraId, CameraRig};
use crate::error::Result;

/// Downscale applied to the calibration for synthetic rendering.
pub const SYNTH_SCALE: f64 = 0.25;

/// One rendered camera frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthImage {
    pub image_id: String,
    pub scene: usize,
    pub camera: CameraId,
    pub width: usize,
    pub height: usize,
    pub instances: Vec<RenderedInstance>,
}

/// How much to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusSize {
    /// Exactly this many frames.
    Images(usize),
    /// Exactly this many instances; the last frame is cut short if needed.
    Objects(usize),
}

/// Renders scenes through every camera of `rig` (already scaled).
pub struct Renderer {
    tables: Vec<RayTable>,
}

impl Renderer {
    pub fn new(rig: &CameraRig) -> Self {
        Self { tables: rig.cameras().iter().map(RayTable::new).collect() }
    }

    /// The shipped rig at [`SYNTH_SCALE`].
    pub fn shipped() -> Result<Self> {
        Ok(Self::new(&CameraRig::shipped().scaled(SYNTH_SCALE)?))
    }

    pub fn tables(&self) -> &[RayTable] {
        &self.tables
    }

    /// Scene `index` of a corpus. Its seed mixes the corpus seed with the
    /// index so scenes are independent of how many are generated.
    pub fn scene_config(base: &SceneConfig, index: usize) -> SceneConfig {
        let seed = base.seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        SceneConfig { seed, ..base.clone() }
    }

    pub fn render_scene(&self, scene: &Scene, index: usize) -> Result<Vec<SynthImage>> {
        self.tables
            .par_iter()
            .map(|t| {
                Ok(SynthImage {
                    image_id: format!("scene{index:04}_{}", t.camera),
                    scene: index,
                    camera: t.camera,
                    width: t.width,
                    height: t.height,
                    instances: render_instances(scene, t)?,
                })
            })
            .collect()
    }

    /// Deterministic corpus for `base.seed`.
    pub fn generate_corpus(&self, base: &SceneConfig, size: CorpusSize) -> Result<Vec<SynthImage>> {
        let mut images = Vec::new();
        let mut objects = 0;
        let mut index = 0;
        loop {
            let done = match size {
                CorpusSize::Images(n) => images.len() >= n,
                CorpusSize::Objects(n) => objects >= n,
            };
            if done {
                break;
            }
            let scene = generate_scene(&Self::scene_config(base, index))?;
            for mut img in self.render_scene(&scene, index)? {
                match size {
                    CorpusSize::Images(n) if images.len() >= n => break,
                    CorpusSize::Objects(n) => {
                        if objects >= n {
                            break;
                        }
                        img.instances.truncate(n - objects);
                    }
                    _ => {}
                }
                objects += img.instances.len();
                images.push(img);
            }
            index += 1;
        }
        Ok(images)
    }
}
