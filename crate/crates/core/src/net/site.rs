use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error};

/// Lattice coordinate of a block. An empty coordinate denotes a stand-alone
/// block template that is not placed in any lattice.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coord(pub Vec<i32>);

impl Coord {
    pub fn new(c: impl Into<Vec<i32>>) -> Self {
        Coord(c.into())
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn offset(&self, delta: &[i32]) -> Coord {
        Coord(self.0.iter().zip(delta).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Coord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| invalid(format!("malformed coordinate `{s}`")))?;
        if inner.trim().is_empty() {
            return Ok(Coord::default());
        }
        inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i32>()
                    .map_err(|_| invalid(format!("malformed coordinate `{s}`")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Coord)
    }
}

/// Position of a site inside a star block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockSite {
    /// Branch `branch` in `1..=2d`, `depth` 1 at the extremal (port) site.
    Arm { branch: usize, depth: usize },
    Center,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PairMember {
    P,
    Q,
}

/// Structured site identifier. The derived ordering is the canonical site
/// order of every graph and therefore of every basis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SiteId {
    /// Plain 1-based index (prototype chain and ad-hoc graphs).
    Index(usize),
    Block { block: Coord, site: BlockSite },
    /// Member of the shared V-pair that replaces the two extremal sites of
    /// an inter-block link.
    Pair { link: usize, member: PairMember },
}

impl SiteId {
    pub fn arm(block: Coord, branch: usize, depth: usize) -> Self {
        SiteId::Block {
            block,
            site: BlockSite::Arm { branch, depth },
        }
    }

    pub fn center(block: Coord) -> Self {
        SiteId::Block {
            block,
            site: BlockSite::Center,
        }
    }

    pub fn block(&self) -> Option<&Coord> {
        match self {
            SiteId::Block { block, .. } => Some(block),
            _ => None,
        }
    }
}

impl From<usize> for SiteId {
    fn from(n: usize) -> Self {
        SiteId::Index(n)
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteId::Index(n) => write!(f, "{n}"),
            SiteId::Block { block, site } => {
                if block.dims() > 0 {
                    write!(f, "b{block}.")?;
                }
                match site {
                    BlockSite::Arm { branch, depth } => write!(f, "br{branch}.d{depth}"),
                    BlockSite::Center => write!(f, "c"),
                }
            }
            SiteId::Pair { link, member } => {
                let m = match member {
                    PairMember::P => "p",
                    PairMember::Q => "q",
                };
                write!(f, "l{link}.{m}")
            }
        }
    }
}

fn parse_block_site(s: &str) -> Option<BlockSite> {
    if s == "c" {
        return Some(BlockSite::Center);
    }
    let (br, d) = s.split_once('.')?;
    let branch = br.strip_prefix("br")?.parse().ok()?;
    let depth = d.strip_prefix('d')?.parse().ok()?;
    Some(BlockSite::Arm { branch, depth })
}

impl FromStr for SiteId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || invalid(format!("malformed site id `{s}`"));
        let s = s.trim();
        if let Ok(n) = s.parse::<usize>() {
            return Ok(SiteId::Index(n));
        }
        if let Some(rest) = s.strip_prefix('b') {
            if rest.starts_with('(') {
                let close = rest.find(')').ok_or_else(bad)?;
                let block: Coord = rest[..=close].parse()?;
                let tail = rest[close + 1..].strip_prefix('.').ok_or_else(bad)?;
                let site = parse_block_site(tail).ok_or_else(bad)?;
                return Ok(SiteId::Block { block, site });
            }
        }
        if let Some(rest) = s.strip_prefix('l') {
            let (link, m) = rest.split_once('.').ok_or_else(bad)?;
            let link = link.parse().map_err(|_| bad())?;
            let member = match m {
                "p" => PairMember::P,
                "q" => PairMember::Q,
                _ => return Err(bad()),
            };
            return Ok(SiteId::Pair { link, member });
        }
        let site = parse_block_site(s).ok_or_else(bad)?;
        Ok(SiteId::Block {
            block: Coord::default(),
            site,
        })
    }
}

impl Serialize for SiteId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SiteId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
