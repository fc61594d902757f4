//! Robot description files: a kinematic description plus a home pose.

use std::path::Path;

use cdts_core::kinematics::{KinematicChain, RobotDescription};
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotFile {
    pub robot: RobotDescription,
    /// Default initial joint configuration.
    pub home: Vec<f64>,
}

pub const FRANKA_PANDA: &str = include_str!("../robots/franka_panda.json");

/// Names resolvable without a file.
pub const BUNDLED: &[&str] = &["franka_panda"];

pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "franka_panda" => Some(FRANKA_PANDA),
        _ => None,
    }
}

impl RobotFile {
    pub fn parse(text: &str, origin: &str) -> SimResult<Self> {
        let file: RobotFile =
            serde_json::from_str(text).map_err(|e| SimError::Validation(format!("robot {origin}: {e}")))?;
        let chain = file.chain()?;
        if file.home.len() != chain.dof() {
            return Err(SimError::Validation(format!(
                "robot {origin}: home has {} values for {} joints",
                file.home.len(),
                chain.dof()
            )));
        }
        Ok(file)
    }

    pub fn chain(&self) -> SimResult<KinematicChain> {
        self.robot.to_chain().map_err(|e| SimError::Validation(e.to_string()))
    }
}

/// A bundled robot name, or a path relative to `base_dir`.
pub fn resolve(reference: &str, base_dir: &Path) -> SimResult<RobotFile> {
    if let Some(text) = bundled(reference) {
        return RobotFile::parse(text, reference);
    }
    let path = base_dir.join(reference);
    let text = std::fs::read_to_string(&path).map_err(|e| SimError::io(&path, e))?;
    RobotFile::parse(&text, &path.display().to_string())
}
