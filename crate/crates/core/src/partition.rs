//! Feature groups and partitions — the genome the genetic algorithm
//! evolves. A partition holds exactly `k` groups; groups may be empty
//! and may overlap (the same feature can sit in several groups).

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("feature index {index} out of range for {n_features} features")]
    FeatureOutOfRange { index: usize, n_features: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed partition file: {0}")]
    Parse(String),
}

/// Sorted, duplicate-free set of feature indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureGroup(Vec<usize>);

impl FeatureGroup {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        FeatureGroup(v)
    }

    pub fn empty() -> Self {
        FeatureGroup(Vec::new())
    }

    /// All features `0..n`.
    pub fn full(n_features: usize) -> Self {
        FeatureGroup((0..n_features).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, feature: usize) -> bool {
        self.0.binary_search(&feature).is_ok()
    }

    /// Insert keeping order; duplicates are ignored (set semantics).
    pub fn insert(&mut self, feature: usize) {
        if let Err(pos) = self.0.binary_search(&feature) {
            self.0.insert(pos, feature);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn min(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn retain(&mut self, keep: impl FnMut(&usize) -> bool) {
        self.0.retain(keep);
    }

    pub fn validate(&self, n_features: usize) -> Result<(), PartitionError> {
        match self.max() {
            Some(m) if m >= n_features => Err(PartitionError::FeatureOutOfRange {
                index: m,
                n_features,
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// One genetic-algorithm solution: an ordered list of exactly `k` groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    groups: Vec<FeatureGroup>,
}

impl Partition {
    pub fn new(groups: Vec<FeatureGroup>) -> Self {
        Partition { groups }
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[FeatureGroup] {
        &self.groups
    }

    pub fn groups_mut(&mut self) -> &mut [FeatureGroup] {
        &mut self.groups
    }

    pub fn group(&self, i: usize) -> &FeatureGroup {
        &self.groups[i]
    }

    pub fn non_empty_groups(&self) -> impl Iterator<Item = (usize, &FeatureGroup)> {
        self.groups.iter().enumerate().filter(|(_, g)| !g.is_empty())
    }

    /// Does any group contain this feature?
    pub fn contains_feature(&self, feature: usize) -> bool {
        self.groups.iter().any(|g| g.contains(feature))
    }

    /// Occurrences of each feature across all groups.
    pub fn feature_counts(&self, n_features: usize) -> Vec<usize> {
        let mut counts = vec![0usize; n_features];
        for g in &self.groups {
            for f in g.iter() {
                counts[f] += 1;
            }
        }
        counts
    }

    pub fn validate(&self, n_features: usize) -> Result<(), PartitionError> {
        for g in &self.groups {
            g.validate(n_features)?;
        }
        Ok(())
    }

    /// Stable content fingerprint, independent of group order.
    pub fn content_seed(&self, group: usize) -> u64 {
        let mut bytes = Vec::with_capacity(self.groups[group].len() * 8);
        for f in self.groups[group].iter() {
            bytes.extend_from_slice(&(f as u64).to_le_bytes());
        }
        crate::seeds::content_hash(&bytes)
    }
}

pub const PARTITION_FORMAT_VERSION: u32 = 1;

/// Write the versioned text format:
///
/// ```text
/// evoad-partition v1
/// features=30
/// k=3
/// 0: 0 1 2
/// 1: 3 4
/// 2:
/// ```
pub fn write_partition_file(path: &Path, partition: &Partition, n_features: usize) -> Result<(), PartitionError> {
    let mut out = String::new();
    out.push_str(&format!("evoad-partition v{PARTITION_FORMAT_VERSION}\n"));
    out.push_str(&format!("features={n_features}\n"));
    out.push_str(&format!("k={}\n", partition.k()));
    for (i, g) in partition.groups().iter().enumerate() {
        let indices: Vec<String> = g.iter().map(|f| f.to_string()).collect();
        if indices.is_empty() {
            out.push_str(&format!("{i}:\n"));
        } else {
            out.push_str(&format!("{i}: {}\n", indices.join(" ")));
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_partition_file(path: &Path) -> Result<(Partition, usize), PartitionError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| PartitionError::Parse("empty file".into()))?;
    let version = head
        .strip_prefix("evoad-partition v")
        .ok_or_else(|| PartitionError::Parse(format!("unexpected header {head:?}")))?;
    if version.trim() != PARTITION_FORMAT_VERSION.to_string() {
        return Err(PartitionError::Parse(format!("unsupported version {version}")));
    }
    let features_line = lines.next().ok_or_else(|| PartitionError::Parse("missing features line".into()))?;
    let n_features: usize = features_line
        .strip_prefix("features=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| PartitionError::Parse(format!("bad features line {features_line:?}")))?;
    let k_line = lines.next().ok_or_else(|| PartitionError::Parse("missing k line".into()))?;
    let k: usize = k_line
        .strip_prefix("k=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| PartitionError::Parse(format!("bad k line {k_line:?}")))?;

    let mut groups = Vec::with_capacity(k);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (idx, rest) = line
            .split_once(':')
            .ok_or_else(|| PartitionError::Parse(format!("bad group line {line:?}")))?;
        if idx.trim().parse::<usize>() != Ok(i) {
            return Err(PartitionError::Parse(format!("group lines out of order at {line:?}")));
        }
        let indices: Result<Vec<usize>, _> = rest.split_whitespace().map(|t| t.parse::<usize>()).collect();
        let indices = indices.map_err(|_| PartitionError::Parse(format!("bad feature index in {line:?}")))?;
        groups.push(FeatureGroup::new(indices));
    }
    if groups.len() != k {
        return Err(PartitionError::Parse(format!("expected {k} groups, found {}", groups.len())));
    }
    let partition = Partition::new(groups);
    partition.validate(n_features)?;
    Ok((partition, n_features))
}
