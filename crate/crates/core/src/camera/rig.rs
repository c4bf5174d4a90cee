use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{add3, sub3, PolynomialFisheyeModel, Vec3};
use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Surround-view camera position. Ordering follows the report columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CameraId {
    Front,
    Rear,
    Left,
    Right,
}

impl CameraId {
    pub const ALL: [CameraId; 4] = [CameraId::Front, CameraId::Rear, CameraId::Left, CameraId::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            CameraId::Front => "front",
            CameraId::Rear => "rear",
            CameraId::Left => "left",
            CameraId::Right => "right",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            CameraId::Front => "Front",
            CameraId::Rear => "Rear",
            CameraId::Left => "Left",
            CameraId::Right => "Right",
        }
    }
}

impl fmt::Display for CameraId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CameraId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "front" => Ok(CameraId::Front),
            "rear" => Ok(CameraId::Rear),
            "left" => Ok(CameraId::Left),
            "right" => Ok(CameraId::Right),
            other => Err(Error::Config(format!("unknown camera id '{other}'"))),
        }
    }
}

/// Rigid camera pose in the vehicle frame (x forward, y left, z up).
/// `rotation` maps camera-frame vectors to vehicle-frame vectors;
/// `translation` is the camera center in the vehicle frame (meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: [[f64; 3]; 3],
    pub translation: Vec3,
}

fn matmul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = (0..3).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

impl Pose {
    /// Camera looking along vehicle heading `yaw` (about +z, 0 = forward,
    /// 90° = left), tilted down by `pitch`, rolled about its optical axis.
    pub fn from_angles(translation: Vec3, yaw_deg: f64, pitch_deg: f64, roll_deg: f64) -> Self {
        // camera z -> vehicle x, camera x -> vehicle -y, camera y -> vehicle -z
        let base = [[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]];
        let (sy, cy) = yaw_deg.to_radians().sin_cos();
        let (sp, cp) = pitch_deg.to_radians().sin_cos();
        let (sr, cr) = roll_deg.to_radians().sin_cos();
        let rz = [[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]];
        let ry = [[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]];
        let roll = [[cr, -sr, 0.0], [sr, cr, 0.0], [0.0, 0.0, 1.0]];
        let rotation = matmul(&matmul(&matmul(&rz, &ry), &base), &roll);
        Self { rotation, translation }
    }

    pub fn camera_to_vehicle_dir(&self, d: Vec3) -> Vec3 {
        let r = &self.rotation;
        [
            r[0][0] * d[0] + r[0][1] * d[1] + r[0][2] * d[2],
            r[1][0] * d[0] + r[1][1] * d[1] + r[1][2] * d[2],
            r[2][0] * d[0] + r[2][1] * d[1] + r[2][2] * d[2],
        ]
    }

    pub fn vehicle_to_camera(&self, p: Vec3) -> Vec3 {
        let q = sub3(p, self.translation);
        let r = &self.rotation;
        [
            r[0][0] * q[0] + r[1][0] * q[1] + r[2][0] * q[2],
            r[0][1] * q[0] + r[1][1] * q[1] + r[2][1] * q[2],
            r[0][2] * q[0] + r[1][2] * q[1] + r[2][2] * q[2],
        ]
    }

    pub fn camera_to_vehicle(&self, p: Vec3) -> Vec3 {
        add3(self.camera_to_vehicle_dir(p), self.translation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseConfig {
    pub translation: Vec3,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    #[serde(default)]
    pub roll_deg: f64,
}

impl PoseConfig {
    pub fn pose(&self) -> Pose {
        Pose::from_angles(self.translation, self.yaw_deg, self.pitch_deg, self.roll_deg)
    }
}

fn default_max_field_angle_deg() -> f64 {
    95.0
}

/// One camera of the calibration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraCalibration {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub principal_point: Point2,
    pub image_size: [u32; 2],
    #[serde(default = "default_max_field_angle_deg")]
    pub max_field_angle_deg: f64,
    pub pose: PoseConfig,
}

impl CameraCalibration {
    pub fn model(&self) -> Result<PolynomialFisheyeModel> {
        PolynomialFisheyeModel::new(
            [self.a1, self.a2, self.a3, self.a4],
            self.principal_point,
            self.image_size,
            self.max_field_angle_deg.to_radians(),
        )
    }
}

/// Calibration config: one entry per camera id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFile {
    #[serde(default)]
    pub description: Option<String>,
    pub cameras: BTreeMap<CameraId, CameraCalibration>,
}

/// The calibration shipped with the crate (see `config/rig.json`).
const SHIPPED_RIG: &str = include_str!("../../config/rig.json");

impl CalibrationFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn shipped() -> Self {
        Self::from_json(SHIPPED_RIG).expect("shipped rig config parses")
    }

    pub fn rig(&self) -> Result<CameraRig> {
        let cameras = self
            .cameras
            .iter()
            .map(|(&id, c)| Ok(RigCamera { id, pose: c.pose.pose(), model: c.model()? }))
            .collect::<Result<Vec<_>>>()?;
        CameraRig::new(cameras)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigCamera {
    pub id: CameraId,
    pub pose: Pose,
    pub model: PolynomialFisheyeModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraRig {
    cameras: Vec<RigCamera>,
}

impl CameraRig {
    pub fn new(cameras: Vec<RigCamera>) -> Result<Self> {
        for (i, a) in cameras.iter().enumerate() {
            if cameras[..i].iter().any(|b| b.id == a.id) {
                return Err(Error::Config(format!("duplicate camera id '{}'", a.id)));
            }
        }
        Ok(Self { cameras })
    }

    pub fn shipped() -> Self {
        CalibrationFile::shipped().rig().expect("shipped rig is valid")
    }

    pub fn cameras(&self) -> &[RigCamera] {
        &self.cameras
    }

    pub fn get(&self, id: CameraId) -> Option<&RigCamera> {
        self.cameras.iter().find(|c| c.id == id)
    }

    /// The rig with every camera resampled by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let cameras = self
            .cameras
            .iter()
            .map(|c| Ok(RigCamera { id: c.id, pose: c.pose, model: c.model.scaled(factor)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { cameras })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::RadialModel;

    #[test]
    fn shipped_rig_loads() {
        let rig = CameraRig::shipped();
        assert_eq!(rig.cameras().len(), 4);
        for id in CameraId::ALL {
            assert!(rig.get(id).is_some());
        }
    }

    #[test]
    fn front_camera_sees_forward() {
        let pose = Pose::from_angles([3.0, 0.0, 1.0], 0.0, 0.0, 0.0);
        let p = pose.vehicle_to_camera([10.0, 0.0, 1.0]);
        assert!((p[2] - 7.0).abs() < 1e-12 && p[0].abs() < 1e-12 && p[1].abs() < 1e-12);
        // a point to the left appears on the image left (negative camera x)
        assert!(pose.vehicle_to_camera([10.0, 2.0, 1.0])[0] < 0.0);
        // a point below appears lower in the image (positive camera y)
        assert!(pose.vehicle_to_camera([10.0, 0.0, 0.0])[1] > 0.0);
    }

    #[test]
    fn pitch_tilts_down_and_round_trips() {
        let pose = Pose::from_angles([0.0, 0.0, 1.0], 90.0, 30.0, 5.0);
        let axis = pose.camera_to_vehicle_dir([0.0, 0.0, 1.0]);
        assert!(axis[1] > 0.8 && axis[2] < -0.45);
        let p = [1.0, 4.0, -0.5];
        let back = pose.camera_to_vehicle(pose.vehicle_to_camera(p));
        for i in 0..3 {
            assert!((back[i] - p[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let rig = CameraRig::shipped();
        let c = rig.cameras()[0].clone();
        assert!(CameraRig::new(vec![c.clone(), c]).is_err());
    }

    #[test]
    fn scaled_rig_halves_radius() {
        let rig = CameraRig::shipped();
        let half = rig.scaled(0.5).unwrap();
        let a = &rig.cameras()[0].model;
        let b = &half.cameras()[0].model;
        assert!((b.radius(1.0).unwrap() * 2.0 - a.radius(1.0).unwrap()).abs() < 1e-9);
    }
}
