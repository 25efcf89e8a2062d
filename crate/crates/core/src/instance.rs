//! Links, SINR parameters, and the immutable instance object shared by all
//! algorithms. Distances are computed on demand from the space; instances
//! never mutate after construction, so they can be shared freely.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{DistanceMatrix, Space};

/// A directed communication request from a sender point to a receiver point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub sender: usize,
    pub receiver: usize,
    pub weight: f64,
}

impl Link {
    pub fn new(sender: usize, receiver: usize) -> Self {
        Link { sender, receiver, weight: 1.0 }
    }

    pub fn weighted(sender: usize, receiver: usize, weight: f64) -> Self {
        Link { sender, receiver, weight }
    }
}

/// Physical-model parameters: path-loss exponent, SINR threshold, noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrParams {
    pub alpha: f64,
    pub beta: f64,
    pub noise: f64,
}

impl SinrParams {
    pub fn new(alpha: f64, beta: f64, noise: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidParam(format!("alpha must be positive, got {alpha}")));
        }
        if !beta.is_finite() || beta < 1.0 {
            return Err(Error::InvalidParam(format!("beta must be >= 1, got {beta}")));
        }
        if !noise.is_finite() || noise < 0.0 {
            return Err(Error::InvalidParam(format!("noise must be >= 0, got {noise}")));
        }
        Ok(SinrParams { alpha, beta, noise })
    }
}

/// A set of links embedded in a metric space, with SINR parameters.
/// Link ids are the indices into [`Instance::links`].
#[derive(Debug, Clone)]
pub struct Instance {
    space: Space,
    links: Vec<Link>,
    params: SinrParams,
}

impl Instance {
    pub fn new(space: Space, links: Vec<Link>, params: SinrParams) -> Result<Self> {
        let np = space.point_count();
        for (id, l) in links.iter().enumerate() {
            if l.sender >= np || l.receiver >= np {
                return Err(Error::InvalidParam(format!(
                    "link {id} references point beyond the {np} points of the space"
                )));
            }
            if !(l.weight.is_finite() && l.weight > 0.0) {
                return Err(Error::InvalidParam(format!("link {id} has non-positive weight")));
            }
            if space.distance(l.sender, l.receiver) <= 0.0 {
                return Err(Error::ZeroLengthLink(id));
            }
        }
        Ok(Instance { space, links, params })
    }

    pub fn n(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn params(&self) -> SinrParams {
        self.params
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn link(&self, i: usize) -> Result<&Link> {
        self.links.get(i).ok_or(Error::UnknownLink(i))
    }

    /// Length of link `i`: the distance from its sender to its receiver.
    pub fn link_length(&self, i: usize) -> Result<f64> {
        let l = self.link(i)?;
        Ok(self.space.distance(l.sender, l.receiver))
    }

    /// Snapshot of all link lengths, indexed by link id.
    pub fn lengths(&self) -> Vec<f64> {
        self.links
            .iter()
            .map(|l| self.space.distance(l.sender, l.receiver))
            .collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.weight).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.links.iter().map(|l| l.weight).sum()
    }

    /// Distance from the sender of `i` to the receiver of `j`; for `i == j`
    /// this is the length of the link.
    pub fn sr_distance(&self, i: usize, j: usize) -> Result<f64> {
        let li = self.link(i)?;
        let lj = self.link(j)?;
        Ok(self.space.distance(li.sender, lj.receiver))
    }

    /// Minimum distance between an endpoint of link `i` and an endpoint of
    /// link `j`. Symmetric; undefined for `i == j`.
    pub fn link_gap(&self, i: usize, j: usize) -> Result<f64> {
        if i == j {
            return Err(Error::SameLink(i));
        }
        let a = self.link(i)?;
        let b = self.link(j)?;
        let d = self
            .space
            .distance(a.sender, b.sender)
            .min(self.space.distance(a.sender, b.receiver))
            .min(self.space.distance(a.receiver, b.sender))
            .min(self.space.distance(a.receiver, b.receiver));
        Ok(d)
    }

    /// Ratio of the longest to the shortest link length.
    pub fn delta(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyInstance);
        }
        let lengths = self.lengths();
        let max = lengths.iter().cloned().fold(f64::MIN, f64::max);
        let min = lengths.iter().cloned().fold(f64::MAX, f64::min);
        Ok(max / min)
    }

    /// Dyadic partition of link ids by length: class `t` holds links with
    /// length in `[l_min * 2^t, l_min * 2^(t+1))`. Every class is equilength
    /// (internal length ratio <= 2). Empty classes are dropped; classes are
    /// returned in ascending length order, members in ascending id order.
    pub fn length_classes(&self) -> Result<Vec<Vec<usize>>> {
        if self.is_empty() {
            return Err(Error::EmptyInstance);
        }
        let lengths = self.lengths();
        let lmin = lengths.iter().cloned().fold(f64::MAX, f64::min);
        let mut buckets: Vec<Vec<usize>> = Vec::new();
        for (id, &l) in lengths.iter().enumerate() {
            let t = (l / lmin).log2().floor().max(0.0) as usize;
            if buckets.len() <= t {
                buckets.resize_with(t + 1, Vec::new);
            }
            buckets[t].push(id);
        }
        Ok(buckets.into_iter().filter(|b| !b.is_empty()).collect())
    }
}

// ---------------------------------------------------------------------------
// Instance file format (version 1).
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileInstance {
    version: u64,
    metric: FileMetric,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    points: Option<Vec<Vec<f64>>>,
    params: SinrParams,
    links: Vec<FileLink>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type")]
enum FileMetric {
    #[serde(rename = "euclidean")]
    Euclidean { dim: usize },
    #[serde(rename = "matrix")]
    Matrix { n: usize, d: Vec<f64> },
}

#[derive(Serialize, Deserialize)]
struct FileLink {
    s: usize,
    r: usize,
    w: f64,
}

impl Instance {
    pub fn to_json(&self) -> String {
        let (metric, points) = match &self.space {
            Space::Euclidean { dim, points } => {
                (FileMetric::Euclidean { dim: *dim }, Some(points.clone()))
            }
            Space::Matrix(m) => (
                FileMetric::Matrix { n: m.len(), d: m.upper_triangle().to_vec() },
                None,
            ),
        };
        let file = FileInstance {
            version: 1,
            metric,
            points,
            params: self.params,
            links: self
                .links
                .iter()
                .map(|l| FileLink { s: l.sender, r: l.receiver, w: l.weight })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FileInstance =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.version != 1 {
            return Err(Error::UnsupportedVersion(file.version));
        }
        let space = match file.metric {
            FileMetric::Euclidean { dim } => {
                let points = file.points.ok_or_else(|| {
                    Error::Parse("euclidean metric requires a points field".into())
                })?;
                Space::euclidean(dim, points)?
            }
            FileMetric::Matrix { n, d } => {
                if file.points.is_some() {
                    return Err(Error::Parse("matrix metric must not carry points".into()));
                }
                Space::Matrix(DistanceMatrix::new(n, d)?)
            }
        };
        let params = SinrParams::new(file.params.alpha, file.params.beta, file.params.noise)?;
        let links = file
            .links
            .into_iter()
            .map(|l| Link::weighted(l.s, l.r, l.w))
            .collect();
        Instance::new(space, links, params)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}
