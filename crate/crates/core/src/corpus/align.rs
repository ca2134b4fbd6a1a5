use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Word alignment links `(source index, target index)`, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AlignmentSet {
    links: BTreeSet<(usize, usize)>,
}

impl AlignmentSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, i: usize, j: usize) -> bool {
        self.links.insert((i, j))
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.links.contains(&(i, j))
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Links in `(i, j)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().copied()
    }

    /// Parses one Pharaoh line; `line_no` is only used for error messages.
    pub fn parse_line(line: &str, line_no: usize) -> Result<Self> {
        let mut set = AlignmentSet::new();
        for tok in line.split_whitespace() {
            let (i, j) = tok
                .split_once('-')
                .ok_or_else(|| Error::parse(line_no, format!("link `{tok}` is not of the form i-j")))?;
            let parse = |s: &str| {
                if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(Error::parse(line_no, format!("link `{tok}` has a non-numeric index")));
                }
                s.parse::<usize>()
                    .map_err(|_| Error::parse(line_no, format!("link `{tok}` index out of range")))
            };
            set.insert(parse(i)?, parse(j)?);
        }
        Ok(set)
    }
}

impl FromIterator<(usize, usize)> for AlignmentSet {
    fn from_iter<T: IntoIterator<Item = (usize, usize)>>(iter: T) -> Self {
        AlignmentSet { links: iter.into_iter().collect() }
    }
}

impl fmt::Display for AlignmentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (i, j)) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{i}-{j}")?;
        }
        Ok(())
    }
}

/// One set per line; duplicate links collapse.
pub fn parse_alignments(text: &str) -> Result<Vec<AlignmentSet>> {
    text.lines()
        .enumerate()
        .map(|(n, line)| AlignmentSet::parse_line(line, n + 1))
        .collect()
}

/// Symmetrization by intersection. Both inputs use source-target orientation.
pub fn intersect_alignments(forward: &AlignmentSet, backward: &AlignmentSet) -> AlignmentSet {
    AlignmentSet {
        links: forward.links.intersection(&backward.links).copied().collect(),
    }
}
