use super::{Result, Space, SubsetMask, UltrafilterError};
use crate::ultrafilter::GroundSet;

/// A total map between finite spaces, stored as a lookup table over flat cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMap {
    domain: Space,
    codomain: Space,
    table: Vec<usize>,
}

impl FiniteMap {
    pub fn new(domain: &Space, codomain: &Space, table: Vec<usize>) -> Result<Self> {
        if table.len() != domain.cells() {
            return Err(UltrafilterError::PartialMap {
                expected: domain.cells(),
                got: table.len(),
            });
        }
        if let Some((at, &value)) = table
            .iter()
            .enumerate()
            .find(|(_, v)| **v >= codomain.cells())
        {
            return Err(UltrafilterError::MapValueOutOfRange {
                at,
                value,
                size: codomain.cells(),
            });
        }
        Ok(FiniteMap {
            domain: domain.clone(),
            codomain: codomain.clone(),
            table,
        })
    }

    pub fn from_fn(domain: &Space, codomain: &Space, f: impl Fn(usize) -> usize) -> Result<Self> {
        FiniteMap::new(domain, codomain, (0..domain.cells()).map(f).collect())
    }

    pub fn identity(space: &Space) -> Self {
        FiniteMap {
            domain: space.clone(),
            codomain: space.clone(),
            table: (0..space.cells()).collect(),
        }
    }

    /// Coordinate projection onto the given 1-based axes (distinct, in range).
    pub fn projection(space: &Space, axes: &[usize]) -> Result<Self> {
        let invalid = || UltrafilterError::InvalidAxes {
            axes: axes.to_vec(),
            arity: space.arity(),
        };
        if axes.is_empty() || axes.iter().any(|a| *a == 0 || *a > space.arity()) {
            return Err(invalid());
        }
        let mut seen = axes.to_vec();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != axes.len() {
            return Err(invalid());
        }
        let factors: Vec<GroundSet> = axes
            .iter()
            .map(|a| space.factors()[a - 1].clone())
            .collect();
        let codomain = Space::new(factors)?;
        FiniteMap::from_fn(space, &codomain, |flat| {
            let c = space.decode(flat);
            let picked: Vec<usize> = axes.iter().map(|a| c[a - 1]).collect();
            codomain.encode(&picked).expect("projected coordinates are in range")
        })
    }

    /// `Sum(n, m) = n + m` from `[0,N)²` into `[0, 2N-1)`.
    pub fn sum(bound: usize) -> Result<Self> {
        let seg = Space::single(GroundSet::new(bound, "N")?);
        let domain = seg.product(&seg)?;
        let codomain = Space::single(GroundSet::new(2 * bound - 1, "Sum")?);
        FiniteMap::from_fn(&domain, &codomain, |flat| flat / bound + flat % bound)
    }

    /// `(f₁, f₂)(x, y) = (f₁(x), f₂(y))`.
    pub fn pair(f1: &FiniteMap, f2: &FiniteMap) -> Result<Self> {
        let domain = f1.domain.product(&f2.domain)?;
        let codomain = f1.codomain.product(&f2.codomain)?;
        let inner_dom = f2.domain.cells();
        let inner_cod = f2.codomain.cells();
        FiniteMap::from_fn(&domain, &codomain, |flat| {
            f1.apply(flat / inner_dom) * inner_cod + f2.apply(flat % inner_dom)
        })
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &FiniteMap) -> Result<Self> {
        if !g.codomain.same_shape(&self.domain) {
            return Err(UltrafilterError::GroundMismatch {
                expected: self.domain.shape_string(),
                got: g.codomain.shape_string(),
            });
        }
        FiniteMap::from_fn(&g.domain, &self.codomain, |x| self.apply(g.apply(x)))
    }

    /// Every map `domain → codomain`, in lexicographic table order.
    pub fn all_maps<'a>(domain: &'a Space, codomain: &'a Space) -> impl Iterator<Item = FiniteMap> + 'a {
        let n = domain.cells();
        let base = codomain.cells();
        let total = (base as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
        (0..total).map(move |mut code| {
            let mut table = vec![0; n];
            for slot in table.iter_mut().rev() {
                *slot = (code % base as u64) as usize;
                code /= base as u64;
            }
            FiniteMap {
                domain: domain.clone(),
                codomain: codomain.clone(),
                table,
            }
        })
    }

    pub fn domain(&self) -> &Space {
        &self.domain
    }

    pub fn codomain(&self) -> &Space {
        &self.codomain
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    pub fn preimage(&self, x: SubsetMask) -> SubsetMask {
        let mut bits = 0u64;
        for (d, v) in self.table.iter().enumerate() {
            if x.contains(*v) {
                bits |= 1 << d;
            }
        }
        SubsetMask::new(self.domain.cells(), bits).expect("domain fits in a mask")
    }
}
