//! Membership evaluated from the defining set conditions, with no appeal to
//! the generating point. These evaluators are what [`super::check_model`]
//! compares against the point arithmetic.

use super::{FiniteMap, FiniteUltrafilter, Result, Space, SubsetMask, UltrafilterError};
use crate::bitset::BitSet;

/// Largest space whose subsets we are willing to enumerate one by one.
pub const SCAN_CAP: usize = 24;
/// Largest space whose membership table we materialize.
pub const TABLE_CAP: usize = 20;

pub trait Membership: Sync {
    fn space(&self) -> &Space;
    fn contains(&self, x: SubsetMask) -> bool;
}

impl Membership for FiniteUltrafilter {
    fn space(&self) -> &Space {
        FiniteUltrafilter::space(self)
    }

    #[inline]
    fn contains(&self, x: SubsetMask) -> bool {
        x.contains(self.point())
    }
}

type Pred<'a> = Box<dyn Fn(SubsetMask) -> bool + Send + Sync + 'a>;

/// A family of subsets given by a predicate.
pub struct Definitional<'a> {
    space: Space,
    pred: Pred<'a>,
}

impl<'a> Definitional<'a> {
    pub fn new(space: Space, pred: impl Fn(SubsetMask) -> bool + Send + Sync + 'a) -> Self {
        Definitional {
            space,
            pred: Box::new(pred),
        }
    }

    pub fn tabulate(&self) -> Result<Tabulated> {
        Tabulated::of(self)
    }
}

impl Membership for Definitional<'_> {
    fn space(&self) -> &Space {
        &self.space
    }

    #[inline]
    fn contains(&self, x: SubsetMask) -> bool {
        (self.pred)(x)
    }
}

/// Membership table over every subset of a small space.
pub struct Tabulated {
    space: Space,
    table: BitSet,
}

impl Tabulated {
    pub fn of(m: &dyn Membership) -> Result<Self> {
        let space = m.space().clone();
        if space.cells() > TABLE_CAP {
            return Err(UltrafilterError::CapExceeded(format!(
                "membership table over {} cells (max {TABLE_CAP})",
                space.cells()
            )));
        }
        let mut table = BitSet::new(1 << space.cells());
        for x in space.subsets() {
            if m.contains(x) {
                table.insert(x.bits() as usize);
            }
        }
        Ok(Tabulated { space, table })
    }
}

impl Membership for Tabulated {
    fn space(&self) -> &Space {
        &self.space
    }

    #[inline]
    fn contains(&self, x: SubsetMask) -> bool {
        self.table.contains(x.bits() as usize)
    }
}

/// `X ∈ f(U) ⇔ f⁻¹(X) ∈ U`.
pub fn image_of<'a>(f: &'a FiniteMap, u: &'a dyn Membership) -> Result<Definitional<'a>> {
    if !f.domain().same_shape(u.space()) {
        return Err(UltrafilterError::GroundMismatch {
            expected: f.domain().shape_string(),
            got: u.space().shape_string(),
        });
    }
    Ok(Definitional::new(f.codomain().clone(), move |x| {
        u.contains(f.preimage(x))
    }))
}

/// `X ∈ U ⊗ V ⇔ { i : X_i ∈ V } ∈ U`.
pub fn tensor_of<'a>(u: &'a dyn Membership, v: &'a dyn Membership) -> Result<Definitional<'a>> {
    let space = u.space().product(v.space())?;
    let outer = u.space().cells();
    let inner = v.space().cells();
    Ok(Definitional::new(space, move |x| {
        let mut rows = 0u64;
        for i in 0..outer {
            if v.contains(x.fiber(i, inner)) {
                rows |= 1 << i;
            }
        }
        u.contains(SubsetMask::new(outer, rows).expect("outer space fits"))
    }))
}

/// `X ∈ V ⊛ W ⇔ { (a,b) : { (c,d) : (a,d) ∈ X } ∈ W } ∈ V` for the
/// semigroup `(a,b) ⋆ (c,d) = (a,d)` on `I × J`.
pub fn star_of<'a>(v: &'a dyn Membership, w: &'a dyn Membership) -> Result<Definitional<'a>> {
    let space = v.space().clone();
    if space.arity() != 2 {
        return Err(UltrafilterError::NotAPairSpace {
            arity: space.arity(),
        });
    }
    if !space.same_shape(w.space()) {
        return Err(UltrafilterError::GroundMismatch {
            expected: space.shape_string(),
            got: w.space().shape_string(),
        });
    }
    let rows = space.sizes()[0];
    let cols = space.sizes()[1];
    let cells = space.cells();
    let row_mask = (1u64 << cols) - 1;
    Ok(Definitional::new(space, move |x| {
        let mut outer = 0u64;
        for a in 0..rows {
            // {(c,d) : (a,d) ∈ X} repeats row a of X in every row c.
            let row = x.fiber(a, cols).bits();
            let mut inner = 0u64;
            for c in 0..rows {
                inner |= row << (c * cols);
            }
            if w.contains(SubsetMask::new(cells, inner).expect("same space")) {
                outer |= row_mask << (a * cols);
            }
        }
        v.contains(SubsetMask::new(cells, outer).expect("same space"))
    }))
}

/// `A ∈ U ⊕ V ⇔ { n : A − n ∈ V } ∈ U` on the segment `[0, N)`.
pub fn pseudo_sum_of<'a>(u: &'a dyn Membership, v: &'a dyn Membership) -> Result<Definitional<'a>> {
    let space = u.space().clone();
    if space.arity() != 1 || !space.same_shape(v.space()) {
        return Err(UltrafilterError::GroundMismatch {
            expected: "two ultrafilters on the same segment [0,N)".into(),
            got: format!("{} and {}", space.shape_string(), v.space().shape_string()),
        });
    }
    let n = space.cells();
    Ok(Definitional::new(space, move |a| {
        let mut shifts = 0u64;
        for s in 0..n {
            let translate = SubsetMask::new(n, a.bits() >> s).expect("same segment");
            if v.contains(translate) {
                shifts |= 1 << s;
            }
        }
        u.contains(SubsetMask::new(n, shifts).expect("same segment"))
    }))
}

/// First subset (in mask order) on which the two families differ.
pub fn first_disagreement(a: &dyn Membership, b: &dyn Membership) -> Result<Option<SubsetMask>> {
    if !a.space().same_shape(b.space()) {
        return Err(UltrafilterError::GroundMismatch {
            expected: a.space().shape_string(),
            got: b.space().shape_string(),
        });
    }
    if a.space().cells() > SCAN_CAP {
        return Err(UltrafilterError::CapExceeded(format!(
            "scan over {} cells (max {SCAN_CAP})",
            a.space().cells()
        )));
    }
    Ok(a.space().subsets().find(|x| a.contains(*x) != b.contains(*x)))
}

/// The generating point if the family is the principal ultrafilter at it.
pub fn principal_point(m: &dyn Membership) -> Result<Option<usize>> {
    let cells = m.space().cells();
    let singletons: Vec<usize> = (0..cells)
        .filter(|p| m.contains(SubsetMask::new(cells, 1 << p).expect("fits")))
        .collect();
    if singletons.len() != 1 {
        return Ok(None);
    }
    let p = singletons[0];
    let candidate = FiniteUltrafilter::at(m.space().clone(), p)?;
    Ok(first_disagreement(m, &candidate)?.map_or(Some(p), |_| None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_ultrafilter_is_not_principal() {
        let sp = Space::of_sizes(&[3]).unwrap();
        let everything = Definitional::new(sp.clone(), |_| true);
        assert_eq!(principal_point(&everything).unwrap(), None);
        // Filter generated by {0,1}: contains no singleton.
        let filt = Definitional::new(sp.clone(), |x| x.bits() & 0b11 == 0b11);
        assert_eq!(principal_point(&filt).unwrap(), None);
        let p = FiniteUltrafilter::at(sp, 2).unwrap();
        assert_eq!(principal_point(&p).unwrap(), Some(2));
    }

    #[test]
    fn tabulated_matches_source() {
        let sp = Space::of_sizes(&[2, 3]).unwrap();
        let w = FiniteUltrafilter::at(sp.clone(), 4).unwrap();
        let t = Tabulated::of(&w).unwrap();
        assert_eq!(first_disagreement(&t, &w).unwrap(), None);
    }

    #[test]
    fn scan_cap_enforced() {
        let sp = Space::of_sizes(&[5, 5]).unwrap();
        let w = FiniteUltrafilter::at(sp, 0).unwrap();
        assert!(first_disagreement(&w, &w).is_err());
    }
}
