use std::fmt;

use super::{Result, UltrafilterError};

/// Subsets are stored as a single machine word.
pub const MAX_CELLS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundSet {
    size: usize,
    label: String,
}

impl GroundSet {
    pub fn new(size: usize, label: impl Into<String>) -> Result<Self> {
        if size == 0 {
            return Err(UltrafilterError::EmptyGround);
        }
        if size > MAX_CELLS {
            return Err(UltrafilterError::TooManyCells {
                cells: size,
                max: MAX_CELLS,
            });
        }
        Ok(GroundSet {
            size,
            label: label.into(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Cartesian product of ground sets. Cells are numbered row-major, the last
/// factor varying fastest, so `I × (J × K)` and `(I × J) × K` coincide.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Space {
    factors: Vec<GroundSet>,
    cells: usize,
}

impl Space {
    pub fn new(factors: Vec<GroundSet>) -> Result<Self> {
        if factors.is_empty() {
            return Err(UltrafilterError::EmptyGround);
        }
        let cells = factors
            .iter()
            .try_fold(1usize, |acc, g| acc.checked_mul(g.size))
            .filter(|c| *c <= MAX_CELLS)
            .ok_or_else(|| UltrafilterError::TooManyCells {
                cells: factors.iter().map(|g| g.size).product(),
                max: MAX_CELLS,
            })?;
        Ok(Space { factors, cells })
    }

    pub fn single(ground: GroundSet) -> Self {
        let cells = ground.size;
        Space {
            factors: vec![ground],
            cells,
        }
    }

    /// Convenience: unlabeled product of the given sizes.
    pub fn of_sizes(sizes: &[usize]) -> Result<Self> {
        let names = ["I", "J", "K", "L", "M"];
        let factors = sizes
            .iter()
            .enumerate()
            .map(|(i, s)| GroundSet::new(*s, *names.get(i).unwrap_or(&"X")))
            .collect::<Result<Vec<_>>>()?;
        Space::new(factors)
    }

    pub fn factors(&self) -> &[GroundSet] {
        &self.factors
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.factors.iter().map(|g| g.size).collect()
    }

    pub fn product(&self, other: &Space) -> Result<Space> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Space::new(factors)
    }

    /// Factor sizes agree; labels are ignored.
    pub fn same_shape(&self, other: &Space) -> bool {
        self.sizes() == other.sizes()
    }

    pub fn shape_string(&self) -> String {
        let sizes: Vec<String> = self.sizes().iter().map(|s| s.to_string()).collect();
        sizes.join("x")
    }

    pub fn encode(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.factors.len() {
            return Err(UltrafilterError::GroundMismatch {
                expected: format!("{} coordinates", self.factors.len()),
                got: format!("{} coordinates", coords.len()),
            });
        }
        let mut flat = 0;
        for (c, g) in coords.iter().zip(&self.factors) {
            if *c >= g.size {
                return Err(UltrafilterError::IndexOutOfRange {
                    index: *c,
                    size: g.size,
                });
            }
            flat = flat * g.size + c;
        }
        Ok(flat)
    }

    pub fn decode(&self, mut flat: usize) -> Vec<usize> {
        let mut coords = vec![0; self.factors.len()];
        for (slot, g) in coords.iter_mut().zip(&self.factors).rev() {
            *slot = flat % g.size;
            flat /= g.size;
        }
        coords
    }

    pub fn check_mask(&self, s: &SubsetMask) -> Result<()> {
        if s.cells() != self.cells {
            return Err(UltrafilterError::GroundMismatch {
                expected: format!("{} cells", self.cells),
                got: format!("{} cells", s.cells()),
            });
        }
        Ok(())
    }

    /// Iterates every subset of the space. Only sensible for small spaces.
    pub fn subsets(&self) -> impl Iterator<Item = SubsetMask> {
        let cells = self.cells;
        let count: u64 = if cells >= 64 { u64::MAX } else { 1u64 << cells };
        (0..count).map(move |bits| SubsetMask { cells, bits })
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|g| format!("{}[{}]", g.label, g.size))
            .collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// A subset of a space with at most [`MAX_CELLS`] cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    cells: usize,
    bits: u64,
}

impl SubsetMask {
    pub fn new(cells: usize, bits: u64) -> Result<Self> {
        if cells > MAX_CELLS {
            return Err(UltrafilterError::TooManyCells {
                cells,
                max: MAX_CELLS,
            });
        }
        Ok(SubsetMask {
            cells,
            bits: bits & full_bits(cells),
        })
    }

    pub fn empty(cells: usize) -> Self {
        SubsetMask { cells, bits: 0 }
    }

    pub fn full(cells: usize) -> Self {
        SubsetMask {
            cells,
            bits: full_bits(cells),
        }
    }

    pub fn from_cells<I: IntoIterator<Item = usize>>(cells: usize, items: I) -> Result<Self> {
        let mut m = SubsetMask::new(cells, 0)?;
        for i in items {
            if i >= cells {
                return Err(UltrafilterError::IndexOutOfRange {
                    index: i,
                    size: cells,
                });
            }
            m.bits |= 1 << i;
        }
        Ok(m)
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.cells
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.cells && self.bits >> i & 1 == 1
    }

    pub fn complement(&self) -> Self {
        SubsetMask {
            cells: self.cells,
            bits: !self.bits & full_bits(self.cells),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        SubsetMask {
            cells: self.cells,
            bits: self.bits | other.bits,
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        SubsetMask {
            cells: self.cells,
            bits: self.bits & other.bits,
        }
    }

    /// Vertical fiber `X_i` when the space splits as `outer × inner` with
    /// `inner` cells per row.
    #[inline]
    pub fn fiber(&self, i: usize, inner: usize) -> SubsetMask {
        SubsetMask {
            cells: inner,
            bits: (self.bits >> (i * inner)) & full_bits(inner),
        }
    }

    pub fn hex(&self) -> String {
        format!("{:#x}", self.bits)
    }
}

#[inline]
fn full_bits(cells: usize) -> u64 {
    if cells >= 64 {
        u64::MAX
    } else {
        (1u64 << cells) - 1
    }
}
