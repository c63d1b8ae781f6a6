//! Artifact IO. Every writer goes through a same-directory temp file
//! plus rename, so partially written artifacts never appear under their
//! final names.

use std::fs;
use std::io::Write;
use std::path::Path;

use lightcast_core::grid::{GridMap, MapError};
use lightcast_core::irl::{CheckpointError, RewardModel};
use lightcast_core::mdp::Mdp;
use lightcast_core::pipeline::{PipelineError, ProfileStore, ResidentProfile, Scenario};
use lightcast_core::traj::{self, TrajError, Trajectory};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Map {
        path: String,
        #[source]
        source: MapError,
    },
    #[error("{path}: {source}")]
    Traj {
        path: String,
        #[source]
        source: TrajError,
    },
    #[error("{path}: {source}")]
    Checkpoint {
        path: String,
        #[source]
        source: CheckpointError,
    },
    #[error("malformed profile file {path}: {reason}")]
    MalformedProfileFile { path: String, reason: String },
    #[error("malformed scenario file {path}: {reason}")]
    MalformedScenario { path: String, reason: String },
    #[error("{path}: {source}")]
    Pipeline {
        path: String,
        #[source]
        source: PipelineError,
    },
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

fn read(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path_str(path),
        source,
    })
}

/// Write via temp file + rename in the same directory.
pub fn atomic_write(path: &Path, contents: &str) -> Result<(), FileError> {
    let io_err = |source| FileError::Io {
        path: path_str(path),
        source,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(contents.as_bytes()).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

pub fn load_map(path: &Path, cell_size: f64) -> Result<GridMap, FileError> {
    GridMap::parse_with_cell_size(&read(path)?, cell_size).map_err(|source| FileError::Map {
        path: path_str(path),
        source,
    })
}

pub fn save_map(path: &Path, map: &GridMap) -> Result<(), FileError> {
    atomic_write(path, &map.to_text())
}

pub fn load_trajectories(
    path: &Path,
    map: &GridMap,
    mdp: &Mdp,
) -> Result<Vec<(u64, Trajectory)>, FileError> {
    traj::decode_file(&read(path)?, map, mdp).map_err(|source| FileError::Traj {
        path: path_str(path),
        source,
    })
}

pub fn save_trajectories(
    path: &Path,
    trajs: &[(u64, Trajectory)],
    map: &GridMap,
    mdp: &Mdp,
) -> Result<(), FileError> {
    atomic_write(path, &traj::encode_file(trajs, map, mdp))
}

pub fn load_checkpoint(path: &Path) -> Result<RewardModel, FileError> {
    RewardModel::decode_checkpoint(&read(path)?).map_err(|source| FileError::Checkpoint {
        path: path_str(path),
        source,
    })
}

pub fn save_checkpoint(path: &Path, model: &RewardModel) -> Result<(), FileError> {
    atomic_write(path, &model.encode_checkpoint())
}

/// JSON array of profiles; rejects duplicate ids.
pub fn load_profiles(path: &Path) -> Result<ProfileStore, FileError> {
    let text = read(path)?;
    let profiles: Vec<ResidentProfile> =
        serde_json::from_str(&text).map_err(|e| FileError::MalformedProfileFile {
            path: path_str(path),
            reason: e.to_string(),
        })?;
    ProfileStore::new(profiles).map_err(|source| FileError::Pipeline {
        path: path_str(path),
        source,
    })
}

pub fn profiles_to_string(store: &ProfileStore) -> String {
    let mut out =
        serde_json::to_string_pretty(store.profiles()).expect("profiles always serialize");
    out.push('\n');
    out
}

pub fn save_profiles(path: &Path, store: &ProfileStore) -> Result<(), FileError> {
    atomic_write(path, &profiles_to_string(store))
}

pub fn load_scenario(path: &Path) -> Result<Scenario, FileError> {
    serde_json::from_str(&read(path)?).map_err(|e| FileError::MalformedScenario {
        path: path_str(path),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use lightcast_core::pipeline::LightingSpec;

    #[test]
    fn profiles_round_trip_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profiles.json");
        let store = ProfileStore::new(vec![
            ResidentProfile {
                person_id: "alice".into(),
                display_name: "Alice".into(),
                identity_token: "f3a91c2e77b04d51".into(),
                lighting: LightingSpec {
                    red: 255,
                    green: 221,
                    blue: 85,
                    intensity: 80,
                },
            },
            ResidentProfile {
                person_id: "bob".into(),
                display_name: "Bob".into(),
                identity_token: "0b7d44aa19c2e8f6".into(),
                lighting: LightingSpec {
                    red: 255,
                    green: 255,
                    blue: 255,
                    intensity: 70,
                },
            },
        ])
        .unwrap();
        save_profiles(&path, &store).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let back = load_profiles(&path).unwrap();
        assert_eq!(back, store);
        save_profiles(&path, &back).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), text);
    }

    #[test]
    fn empty_profile_store_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profiles.json");
        save_profiles(&path, &ProfileStore::default()).unwrap();
        let back = load_profiles(&path).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn duplicate_profile_ids_rejected_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profiles.json");
        let one = r#"{"person_id":"a","display_name":"A","identity_token":"t","lighting":{"red":1,"green":2,"blue":3,"intensity":4}}"#;
        fs::write(&path, format!("[{one},{one}]")).unwrap();
        let err = load_profiles(&path).unwrap_err();
        assert!(matches!(err, FileError::Pipeline { .. }), "{err}");
    }

    #[test]
    fn garbage_profile_file_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profiles.json");
        fs::write(&path, "not json").unwrap();
        assert!(matches!(
            load_profiles(&path).unwrap_err(),
            FileError::MalformedProfileFile { .. }
        ));
    }

    #[test]
    fn map_save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.txt");
        let map = GridMap::parse("####\n#AA#\n####\n\nA=hall,1,1\n").unwrap();
        save_map(&path, &map).unwrap();
        assert_eq!(load_map(&path, 0.5).unwrap(), map);
    }
}
