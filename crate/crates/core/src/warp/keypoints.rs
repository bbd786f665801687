use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum detector confidence for a joint to count as present.
pub const DEFAULT_CONFIDENCE_THRESHOLD: f64 = 0.3;

/// The 25 joint names of the OpenPose BODY_25 model, in model order.
pub const BODY_25: [&str; 25] = [
    "Nose", "Neck", "RShoulder", "RElbow", "RWrist", "LShoulder", "LElbow", "LWrist", "MidHip",
    "RHip", "RKnee", "RAnkle", "LHip", "LKnee", "LAnkle", "REye", "LEye", "REar", "LEar",
    "LBigToe", "LSmallToe", "LHeel", "RBigToe", "RSmallToe", "RHeel",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub name: String,
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

#[derive(Serialize, Deserialize)]
struct KeypointSetFile {
    image_size: [u32; 2],
    keypoints: Vec<Keypoint>,
}

/// Named body joints detected in (or canonical for) one image.
///
/// Serialized as `{"image_size": [w, h], "keypoints": [{name, x, y, confidence}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KeypointSetFile", into = "KeypointSetFile")]
pub struct KeypointSet {
    image_size: [u32; 2],
    keypoints: BTreeMap<String, Keypoint>,
}

impl TryFrom<KeypointSetFile> for KeypointSet {
    type Error = Error;

    fn try_from(f: KeypointSetFile) -> Result<Self> {
        KeypointSet::new(f.image_size, f.keypoints)
    }
}

impl From<KeypointSet> for KeypointSetFile {
    fn from(s: KeypointSet) -> Self {
        KeypointSetFile {
            image_size: s.image_size,
            keypoints: s.keypoints.into_values().collect(),
        }
    }
}

impl KeypointSet {
    pub fn new(image_size: [u32; 2], keypoints: Vec<Keypoint>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for kp in keypoints {
            if !(0.0..=1.0).contains(&kp.confidence) {
                return Err(Error::invalid(format!(
                    "keypoint {} confidence {} outside [0, 1]",
                    kp.name, kp.confidence
                )));
            }
            if map.contains_key(&kp.name) {
                return Err(Error::invalid(format!("duplicate keypoint name {}", kp.name)));
            }
            map.insert(kp.name.clone(), kp);
        }
        Ok(Self {
            image_size,
            keypoints: map,
        })
    }

    pub fn image_size(&self) -> [u32; 2] {
        self.image_size
    }

    pub fn len(&self) -> usize {
        self.keypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keypoints.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Keypoint> {
        self.keypoints.get(name)
    }

    /// The joint, if present with confidence at or above `threshold`.
    pub fn confident(&self, name: &str, threshold: f64) -> Option<&Keypoint> {
        self.keypoints.get(name).filter(|k| k.confidence >= threshold)
    }

    /// Keypoints in name order.
    pub fn iter(&self) -> impl Iterator<Item = &Keypoint> {
        self.keypoints.values()
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Canonical per-joint positions: the coordinate-wise mean over the examples
/// in which the joint was detected with at least `threshold` confidence.
///
/// The output confidence is the mean confidence of the contributing entries.
/// Joints never confidently detected are left out.
pub fn typical_keypoints(examples: &[KeypointSet], threshold: f64) -> Result<KeypointSet> {
    let first = examples
        .first()
        .ok_or_else(|| Error::invalid("typical keypoints need at least one example"))?;
    if let Some(bad) = examples.iter().find(|e| e.image_size != first.image_size) {
        return Err(Error::invalid(format!(
            "example image sizes differ: {:?} vs {:?}",
            first.image_size, bad.image_size
        )));
    }
    let mut sums: BTreeMap<&str, (f64, f64, f64, usize)> = BTreeMap::new();
    for ex in examples {
        for kp in ex.iter().filter(|k| k.confidence >= threshold) {
            let e = sums.entry(&kp.name).or_insert((0.0, 0.0, 0.0, 0));
            e.0 += kp.x;
            e.1 += kp.y;
            e.2 += kp.confidence;
            e.3 += 1;
        }
    }
    let keypoints = sums
        .into_iter()
        .map(|(name, (sx, sy, sc, n))| {
            let n = n as f64;
            Keypoint {
                name: name.to_string(),
                x: sx / n,
                y: sy / n,
                confidence: sc / n,
            }
        })
        .collect();
    KeypointSet::new(first.image_size, keypoints)
}
