//! Class-id ↔ name registry, with the bundled 20-beverage table built in.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RegistryError {
    #[error("registry ids must be contiguous from 0; missing id {0}")]
    IdGap(u32),
    #[error("registry is empty")]
    Empty,
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("invalid id key `{0}`: must be a non-negative integer")]
    BadIdKey(String),
}

const BUILTIN_NAMES: [&str; 20] = [
    "Mineral water",
    "Cola Zero 1",
    "Orange Zero",
    "Cola Light",
    "Cola Mix",
    "Cola Classic 1",
    "Cola Zero 2",
    "Sprite",
    "7 UP",
    "Fanta",
    "Colar classic 2",
    "Cola Zero 3",
    "Eistee Pfirsch",
    "Apfel Schorle",
    "Banana juice",
    "Pineapple juice",
    "Currants juice",
    "Orange juice",
    "Carrots juice",
    "Mixed vegetable juice",
];

/// Maps contiguous class ids starting at 0 to unique display names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, String>", into = "BTreeMap<String, String>")]
pub struct LabelRegistry {
    names: Vec<String>,
}

impl LabelRegistry {
    /// The bundled 20-beverage table.
    pub fn builtin() -> Self {
        Self {
            names: BUILTIN_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Builds a registry from an id → name map, enforcing contiguous ids and
    /// unique names.
    pub fn from_map(map: BTreeMap<u32, String>) -> Result<Self, RegistryError> {
        if map.is_empty() {
            return Err(RegistryError::Empty);
        }
        let mut names = Vec::with_capacity(map.len());
        for (expected, (&id, name)) in map.iter().enumerate() {
            if id != expected as u32 {
                return Err(RegistryError::IdGap(expected as u32));
            }
            if names.contains(name) {
                return Err(RegistryError::DuplicateName(name.clone()));
            }
            names.push(name.clone());
        }
        Ok(Self { names })
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn contains(&self, id: u32) -> bool {
        (id as usize) < self.names.len()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

impl TryFrom<BTreeMap<String, String>> for LabelRegistry {
    type Error = RegistryError;

    fn try_from(raw: BTreeMap<String, String>) -> Result<Self, RegistryError> {
        let mut map = BTreeMap::new();
        for (key, name) in raw {
            let id: u32 = key
                .parse()
                .map_err(|_| RegistryError::BadIdKey(key.clone()))?;
            map.insert(id, name);
        }
        Self::from_map(map)
    }
}

impl From<LabelRegistry> for BTreeMap<String, String> {
    fn from(reg: LabelRegistry) -> Self {
        reg.names
            .into_iter()
            .enumerate()
            .map(|(id, name)| (id.to_string(), name))
            .collect()
    }
}
