//! JSON instance and scenario files.
//!
//! Instance:
//!
//! ```json
//! {
//!   "vertices": 3,
//!   "edges": [{"tail": 1, "head": 2, "p_fail": "0.1"}],
//!   "sight": [{"observer": 1, "tail": 2, "head": 3}],
//!   "task": {"start": 1, "dest": 3}
//! }
//! ```
//!
//! Probabilities are strings so they parse exactly. A scenario maps
//! `"tail-head"` keys to `"up"` or `"down"`; with `"world": true` it must
//! assign every edge.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::model::{Edge, EdgeId, Instance, KnowledgeState, SightEntry, Status, Task, World};
use crate::prob::{format_exact, parse_probability};

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Content(#[from] Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub tail: u32,
    pub head: u32,
    pub p_fail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SightRecord {
    pub observer: u32,
    pub tail: u32,
    pub head: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRecord {
    pub start: u32,
    pub dest: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub vertices: u32,
    pub edges: Vec<EdgeRecord>,
    #[serde(default)]
    pub sight: Vec<SightRecord>,
    pub task: TaskRecord,
}

impl InstanceFile {
    /// Parses probabilities; structure is left for `validate` to judge.
    pub fn to_instance(&self) -> Result<Instance, Error> {
        let edges = self
            .edges
            .iter()
            .map(|r| {
                Ok(Edge {
                    id: EdgeId::new(r.tail, r.head),
                    p_fail: parse_probability(&r.p_fail)?,
                })
            })
            .collect::<Result<_, Error>>()?;
        Ok(Instance {
            vertices: self.vertices,
            edges,
            sights: self
                .sight
                .iter()
                .map(|r| SightEntry {
                    observer: r.observer,
                    edge: EdgeId::new(r.tail, r.head),
                })
                .collect(),
            task: Task {
                start: self.task.start,
                dest: self.task.dest,
            },
        })
    }

    pub fn from_instance(instance: &Instance) -> Self {
        InstanceFile {
            vertices: instance.vertices,
            edges: instance
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    tail: e.id.tail,
                    head: e.id.head,
                    p_fail: format_exact(&e.p_fail),
                })
                .collect(),
            sight: instance
                .sights
                .iter()
                .map(|s| SightRecord {
                    observer: s.observer,
                    tail: s.edge.tail,
                    head: s.edge.head,
                })
                .collect(),
            task: TaskRecord {
                start: instance.task.start,
                dest: instance.task.dest,
            },
        }
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, FileError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    Ok(file.to_instance()?)
}

pub fn instance_to_json(instance: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(instance)).expect("plain data serializes")
}

fn read(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_instance(path: &Path) -> Result<Instance, FileError> {
    parse_instance(&read(path)?)
}

pub fn write_instance(path: &Path, instance: &Instance) -> Result<(), FileError> {
    fs::write(path, instance_to_json(instance) + "\n").map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatusRecord {
    Up,
    Down,
}

impl From<StatusRecord> for Status {
    fn from(s: StatusRecord) -> Self {
        match s {
            StatusRecord::Up => Status::Up,
            StatusRecord::Down => Status::Down,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub statuses: BTreeMap<String, StatusRecord>,
    #[serde(default)]
    pub world: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scenario {
    Knowledge(KnowledgeState),
    World(World),
}

impl Scenario {
    /// What the pathfinder knows under this scenario; a full world is known
    /// completely.
    pub fn knowledge(&self) -> KnowledgeState {
        match self {
            Scenario::Knowledge(k) => k.clone(),
            Scenario::World(w) => w.iter().collect(),
        }
    }
}

impl ScenarioFile {
    pub fn to_scenario(&self, instance: &Instance) -> Result<Scenario, Error> {
        let mut statuses = BTreeMap::new();
        for (key, status) in &self.statuses {
            let e: EdgeId = key.parse()?;
            if instance.edge(e).is_none() {
                return Err(Error::UnknownEdge(e));
            }
            statuses.insert(e, Status::from(*status));
        }
        if self.world {
            Ok(Scenario::World(World::from_statuses(instance, statuses)?))
        } else {
            Ok(Scenario::Knowledge(statuses.into_iter().collect()))
        }
    }
}

pub fn parse_scenario(text: &str, instance: &Instance) -> Result<Scenario, FileError> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    Ok(file.to_scenario(instance)?)
}

pub fn read_scenario(path: &Path, instance: &Instance) -> Result<Scenario, FileError> {
    parse_scenario(&read(path)?, instance)
}
