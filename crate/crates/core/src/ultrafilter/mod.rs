//! Ultrafilters on finite ground sets.
//!
//! On a finite set every ultrafilter is principal, so a [`FiniteUltrafilter`]
//! is stored as its generating point. The operations of this module
//! (images, tensor products, projections, pseudo-sums, the ⋆-extension)
//! compute that point directly. The [`definitional`] submodule evaluates the
//! same operations straight from their set-theoretic membership conditions,
//! and [`check_model`] compares the two exhaustively.
//!
//! Clauses that only make sense for non-principal ultrafilters (cofinite
//! fibers, infinitely many large fibers) have no finite content and are not
//! represented here.

pub mod definitional;
mod map;
mod model;
mod space;

pub use definitional::{Definitional, Membership, Tabulated};
pub use map::FiniteMap;
pub use model::{check_model, ClauseReport, Counterexample, ModelConfig, ModelReport};
pub use space::{GroundSet, Space, SubsetMask, MAX_CELLS};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UltrafilterError {
    #[error("ground set must have at least one element")]
    EmptyGround,
    #[error("space has {cells} cells, at most {max} are supported")]
    TooManyCells { cells: usize, max: usize },
    #[error("element {index} out of range for ground of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("ground mismatch: expected {expected} cells, got {got}")]
    GroundMismatch { expected: String, got: String },
    #[error("map table has {got} entries but the domain has {expected} elements")]
    PartialMap { expected: usize, got: usize },
    #[error("map value {value} at {at} is outside a codomain of size {size}")]
    MapValueOutOfRange { at: usize, value: usize, size: usize },
    #[error("invalid axis selector {axes:?} for a space of arity {arity}")]
    InvalidAxes { axes: Vec<usize>, arity: usize },
    #[error("sum {sum} leaves the truncated segment [0, {bound})")]
    OverflowBeyondTruncation { sum: usize, bound: usize },
    #[error("operation needs a two-factor product space, got arity {arity}")]
    NotAPairSpace { arity: usize },
    #[error("exhaustive check cap exceeded: {0}")]
    CapExceeded(String),
}

pub type Result<T> = std::result::Result<T, UltrafilterError>;

/// A principal ultrafilter on a finite (product) space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteUltrafilter {
    space: Space,
    point: usize,
}

impl FiniteUltrafilter {
    /// The ultrafilter of all subsets of `space` containing the flat cell `point`.
    pub fn at(space: Space, point: usize) -> Result<Self> {
        if point >= space.cells() {
            return Err(UltrafilterError::IndexOutOfRange {
                index: point,
                size: space.cells(),
            });
        }
        Ok(FiniteUltrafilter { space, point })
    }

    /// Principal ultrafilter at the given coordinates (one per factor).
    pub fn at_coords(space: Space, coords: &[usize]) -> Result<Self> {
        let point = space.encode(coords)?;
        Ok(FiniteUltrafilter { space, point })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn point(&self) -> usize {
        self.point
    }

    pub fn coords(&self) -> Vec<usize> {
        self.space.decode(self.point)
    }

    /// Every principal ultrafilter on `space`, in point order.
    pub fn all_on(space: &Space) -> Vec<FiniteUltrafilter> {
        (0..space.cells())
            .map(|p| FiniteUltrafilter {
                space: space.clone(),
                point: p,
            })
            .collect()
    }
}

/// `U_i = { A ⊆ I | i ∈ A }`.
pub fn principal(ground: &GroundSet, i: usize) -> Result<FiniteUltrafilter> {
    if i >= ground.size() {
        return Err(UltrafilterError::IndexOutOfRange {
            index: i,
            size: ground.size(),
        });
    }
    FiniteUltrafilter::at(Space::single(ground.clone()), i)
}

pub fn member(u: &FiniteUltrafilter, s: &SubsetMask) -> Result<bool> {
    u.space.check_mask(s)?;
    Ok(s.contains(u.point))
}

/// Image ultrafilter `f(U)`: `X ∈ f(U) ⇔ f⁻¹(X) ∈ U`.
pub fn image(f: &FiniteMap, u: &FiniteUltrafilter) -> Result<FiniteUltrafilter> {
    if !f.domain().same_shape(&u.space) {
        return Err(UltrafilterError::GroundMismatch {
            expected: f.domain().shape_string(),
            got: u.space.shape_string(),
        });
    }
    FiniteUltrafilter::at(f.codomain().clone(), f.apply(u.point))
}

/// Tensor product `U ⊗ V` on the concatenated product space.
pub fn tensor(u: &FiniteUltrafilter, v: &FiniteUltrafilter) -> Result<FiniteUltrafilter> {
    let space = u.space.product(&v.space)?;
    let point = u.point * v.space.cells() + v.point;
    FiniteUltrafilter::at(space, point)
}

/// `π_axes(W)` with 1-based axes, e.g. `&[1, 3]` for `π₁,₃`.
pub fn project(w: &FiniteUltrafilter, axes: &[usize]) -> Result<FiniteUltrafilter> {
    let pi = FiniteMap::projection(&w.space, axes)?;
    image(&pi, w)
}

/// Pseudo-sum `U ⊕ V` of ultrafilters on the segment `[0, N)`.
pub fn pseudo_sum(u: &FiniteUltrafilter, v: &FiniteUltrafilter) -> Result<FiniteUltrafilter> {
    let bound = segment_bound(u)?;
    if segment_bound(v)? != bound {
        return Err(UltrafilterError::GroundMismatch {
            expected: u.space.shape_string(),
            got: v.space.shape_string(),
        });
    }
    let sum = u.point + v.point;
    if sum >= bound {
        return Err(UltrafilterError::OverflowBeyondTruncation { sum, bound });
    }
    FiniteUltrafilter::at(u.space.clone(), sum)
}

fn segment_bound(u: &FiniteUltrafilter) -> Result<usize> {
    if u.space.arity() != 1 {
        return Err(UltrafilterError::GroundMismatch {
            expected: "a single segment [0,N)".into(),
            got: u.space.shape_string(),
        });
    }
    Ok(u.space.cells())
}

/// Extension of `(a,b) ⋆ (c,d) = (a,d)` to ultrafilters on `I × J`.
pub fn star_extension(v: &FiniteUltrafilter, w: &FiniteUltrafilter) -> Result<FiniteUltrafilter> {
    if v.space.arity() != 2 {
        return Err(UltrafilterError::NotAPairSpace {
            arity: v.space.arity(),
        });
    }
    if !v.space.same_shape(&w.space) {
        return Err(UltrafilterError::GroundMismatch {
            expected: v.space.shape_string(),
            got: w.space.shape_string(),
        });
    }
    let a = v.coords()[0];
    let d = w.coords()[1];
    FiniteUltrafilter::at_coords(v.space.clone(), &[a, d])
}

#[cfg(test)]
mod tests {
    use super::definitional as def;
    use super::*;

    fn g(n: usize) -> GroundSet {
        GroundSet::new(n, "I").unwrap()
    }

    fn mask(space: &Space, items: &[usize]) -> SubsetMask {
        SubsetMask::from_cells(space.cells(), items.iter().copied()).unwrap()
    }

    #[test]
    fn principal_membership() {
        let ground = g(3);
        let u = principal(&ground, 1).unwrap();
        let sp = Space::single(ground.clone());
        assert!(member(&u, &mask(&sp, &[1, 2])).unwrap());
        assert!(!member(&u, &mask(&sp, &[0, 2])).unwrap());
        assert!(principal(&ground, 3).is_err());

        let one = g(1);
        let u0 = principal(&one, 0).unwrap();
        let sp1 = Space::single(one);
        assert!(member(&u0, &mask(&sp1, &[0])).unwrap());
        assert!(!member(&u0, &SubsetMask::empty(1)).unwrap());
    }

    #[test]
    fn member_axioms_on_point_two() {
        let ground = g(4);
        let sp = Space::single(ground.clone());
        let u = principal(&ground, 2).unwrap();
        assert!(member(&u, &mask(&sp, &[0, 2])).unwrap());
        assert!(!member(&u, &SubsetMask::empty(4)).unwrap());
        for bits in 0..16u64 {
            let s = SubsetMask::new(4, bits).unwrap();
            let c = s.complement();
            assert_ne!(member(&u, &s).unwrap(), member(&u, &c).unwrap());
        }
        let wrong = SubsetMask::empty(3);
        assert!(member(&u, &wrong).is_err());
    }

    #[test]
    fn image_examples() {
        let dom = Space::single(g(4));
        let cod = Space::single(GroundSet::new(2, "J").unwrap());
        let u = FiniteUltrafilter::at(dom.clone(), 3).unwrap();

        let constant = FiniteMap::from_fn(&dom, &cod, |_| 1).unwrap();
        assert_eq!(image(&constant, &u).unwrap().point(), 1);

        let id = FiniteMap::identity(&dom);
        assert_eq!(image(&id, &u).unwrap(), u);

        let parity = FiniteMap::from_fn(&dom, &cod, |x| x % 2).unwrap();
        let img = image(&parity, &u).unwrap();
        assert_eq!(img.point(), 1);
        let definitional = def::image_of(&parity, &u).unwrap();
        for bits in 0..4u64 {
            let s = SubsetMask::new(2, bits).unwrap();
            assert_eq!(definitional.contains(s), img.contains(s));
        }
        assert_eq!(def::first_disagreement(&definitional, &img).unwrap(), None);
    }

    #[test]
    fn partial_map_rejected() {
        let dom = Space::single(g(3));
        let cod = Space::single(g(2));
        assert!(matches!(
            FiniteMap::new(&dom, &cod, vec![0, 1]),
            Err(UltrafilterError::PartialMap { .. })
        ));
        assert!(matches!(
            FiniteMap::new(&dom, &cod, vec![0, 1, 2]),
            Err(UltrafilterError::MapValueOutOfRange { .. })
        ));
    }

    #[test]
    fn tensor_principal_at_pair() {
        let i = Space::single(g(2));
        let u = FiniteUltrafilter::at(i.clone(), 1).unwrap();
        let v = FiniteUltrafilter::at(i.clone(), 0).unwrap();
        let t = tensor(&u, &v).unwrap();
        assert_eq!(t.coords(), vec![1, 0]);
        let d = def::tensor_of(&u, &v).unwrap();
        for bits in 0..16u64 {
            let x = SubsetMask::new(4, bits).unwrap();
            assert_eq!(d.contains(x), t.contains(x), "subset {bits:#x}");
        }
    }

    #[test]
    fn tensor_associativity_all_triples() {
        let i = Space::single(g(2));
        let all = FiniteUltrafilter::all_on(&i);
        for u in &all {
            for v in &all {
                for w in &all {
                    let left = tensor(u, &tensor(v, w).unwrap()).unwrap();
                    let right = tensor(&tensor(u, v).unwrap(), w).unwrap();
                    assert_eq!(left, right);
                    let vw = def::tensor_of(v, w).unwrap();
                    let uv = def::tensor_of(u, v).unwrap();
                    let dl = def::tensor_of(u, &vw).unwrap();
                    let dr = def::tensor_of(&uv, w).unwrap();
                    assert_eq!(def::first_disagreement(&dl, &dr).unwrap(), None);
                    assert_eq!(def::first_disagreement(&dl, &left).unwrap(), None);
                }
            }
        }
    }

    #[test]
    fn projections_recover_factors() {
        let i = Space::single(g(3));
        let all = FiniteUltrafilter::all_on(&i);
        for u in &all {
            for v in &all {
                let t = tensor(u, v).unwrap();
                assert_eq!(project(&t, &[1]).unwrap(), *u);
                assert_eq!(project(&t, &[2]).unwrap(), *v);
                assert_eq!(project(&t, &[1, 2]).unwrap(), t);
            }
        }
        let triple = Space::new(vec![g(2), g(3), g(4)]).unwrap();
        let z = FiniteUltrafilter::at_coords(triple, &[1, 2, 3]).unwrap();
        assert_eq!(project(&z, &[1, 3]).unwrap().coords(), vec![1, 3]);
        assert!(matches!(
            project(&z, &[4]),
            Err(UltrafilterError::InvalidAxes { .. })
        ));
        assert!(project(&z, &[]).is_err());
        assert!(project(&z, &[2, 2]).is_err());
    }

    #[test]
    fn pseudo_sum_examples() {
        let seg = Space::single(GroundSet::new(16, "N").unwrap());
        let u = FiniteUltrafilter::at(seg.clone(), 2).unwrap();
        let v = FiniteUltrafilter::at(seg.clone(), 3).unwrap();
        let s = pseudo_sum(&u, &v).unwrap();
        assert_eq!(s.point(), 5);
        let d = def::pseudo_sum_of(&u, &v).unwrap();
        assert_eq!(def::first_disagreement(&d, &s).unwrap(), None);

        let zero = FiniteUltrafilter::at(seg.clone(), 0).unwrap();
        for p in 0..16 {
            let w = FiniteUltrafilter::at(seg.clone(), p).unwrap();
            assert_eq!(pseudo_sum(&zero, &w).unwrap(), w);
        }

        let big = FiniteUltrafilter::at(seg.clone(), 9).unwrap();
        assert!(matches!(
            pseudo_sum(&big, &big),
            Err(UltrafilterError::OverflowBeyondTruncation { sum: 18, bound: 16 })
        ));
    }

    #[test]
    fn pseudo_sum_is_image_of_tensor_under_sum() {
        let n = 6;
        let seg = Space::single(GroundSet::new(n, "N").unwrap());
        let sum = FiniteMap::sum(n).unwrap();
        for u in FiniteUltrafilter::all_on(&seg) {
            for v in FiniteUltrafilter::all_on(&seg) {
                let pushed = image(&sum, &tensor(&u, &v).unwrap()).unwrap();
                match pseudo_sum(&u, &v) {
                    Ok(s) => {
                        assert_eq!(s.point(), pushed.point());
                        let d = def::pseudo_sum_of(&u, &v).unwrap();
                        // A ⊆ [0,N) embedded into [0, 2N-1).
                        for bits in 0..(1u64 << n) {
                            let a = SubsetMask::new(n, bits).unwrap();
                            let wide = SubsetMask::new(2 * n - 1, bits).unwrap();
                            assert_eq!(d.contains(a), pushed.contains(wide));
                        }
                    }
                    Err(UltrafilterError::OverflowBeyondTruncation { sum, .. }) => {
                        assert!(sum >= n);
                        assert_eq!(pushed.point(), sum);
                    }
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }

    #[test]
    fn pseudo_sum_associative_with_headroom() {
        let seg = Space::single(GroundSet::new(8, "N").unwrap());
        let all = FiniteUltrafilter::all_on(&seg);
        for u in &all {
            for v in &all {
                for w in &all {
                    if u.point() + v.point() + w.point() >= 8 {
                        continue;
                    }
                    let l = pseudo_sum(&pseudo_sum(u, v).unwrap(), w).unwrap();
                    let r = pseudo_sum(u, &pseudo_sum(v, w).unwrap()).unwrap();
                    assert_eq!(l, r);
                }
            }
        }
    }

    #[test]
    fn star_extension_examples() {
        let sp = Space::new(vec![g(2), g(2)]).unwrap();
        let v = FiniteUltrafilter::at_coords(sp.clone(), &[1, 0]).unwrap();
        let w = FiniteUltrafilter::at_coords(sp.clone(), &[0, 1]).unwrap();
        assert_eq!(star_extension(&v, &w).unwrap().coords(), vec![1, 1]);

        for v in FiniteUltrafilter::all_on(&sp) {
            for w in FiniteUltrafilter::all_on(&sp) {
                let star = def::star_of(&v, &w).unwrap();
                let p1 = project(&v, &[1]).unwrap();
                let p2 = project(&w, &[2]).unwrap();
                let t = tensor(&p1, &p2).unwrap();
                assert_eq!(def::first_disagreement(&star, &t).unwrap(), None);
                assert_eq!(star_extension(&v, &w).unwrap(), t);
            }
            assert_eq!(star_extension(&v, &v).unwrap(), v);
        }

        let other = Space::new(vec![g(3), g(2)]).unwrap();
        let x = FiniteUltrafilter::at(other, 0).unwrap();
        let v = FiniteUltrafilter::at(sp, 0).unwrap();
        assert!(star_extension(&v, &x).is_err());
    }

    #[test]
    fn image_is_functorial() {
        let a = Space::single(g(3));
        let b = Space::single(g(2));
        let c = Space::single(g(3));
        let maps_ab: Vec<FiniteMap> = FiniteMap::all_maps(&a, &b).collect();
        let maps_bc: Vec<FiniteMap> = FiniteMap::all_maps(&b, &c).collect();
        for gmap in &maps_ab {
            for fmap in &maps_bc {
                let fg = fmap.compose(gmap).unwrap();
                for u in FiniteUltrafilter::all_on(&a) {
                    let direct = image(&fg, &u).unwrap();
                    let stepwise = image(fmap, &image(gmap, &u).unwrap()).unwrap();
                    assert_eq!(direct, stepwise);
                }
            }
        }
    }
}
