use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GRID_HALF: i64 = 50;
pub const GRID_SIZE: usize = (2 * GRID_HALF + 1) as usize;

/// Integer outcome levels `-half..=half`. `open` marks a model whose support
/// extends past the grid, with the excess reported as residual mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub half: i64,
    pub open: bool,
}

impl Grid {
    pub const fn truncated() -> Self {
        Self {
            half: GRID_HALF,
            open: false,
        }
    }

    pub const fn open() -> Self {
        Self {
            half: GRID_HALF,
            open: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.half != GRID_HALF {
            return Err(Error::Unsupported {
                op: "Grid",
                msg: format!("only the +-{GRID_HALF} grid is supported, got +-{}", self.half),
            });
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        (2 * self.half + 1) as usize
    }

    pub fn contains(&self, y: i64) -> bool {
        y.abs() <= self.half
    }

    pub fn index(&self, y: i64) -> usize {
        debug_assert!(self.contains(y));
        (y + self.half) as usize
    }

    pub fn value(&self, i: usize) -> i64 {
        i as i64 - self.half
    }

    pub fn values(&self) -> impl Iterator<Item = i64> {
        -self.half..=self.half
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self::truncated()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let g = Grid::truncated();
        assert_eq!(g.size(), 101);
        assert_eq!(g.index(0), 50);
        assert_eq!(g.index(-50), 0);
        for i in 0..g.size() {
            assert_eq!(g.index(g.value(i)), i);
        }
        assert!(g.contains(0) && !g.contains(51));
    }
}
