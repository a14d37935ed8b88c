//! Self-maps, right inverses, coincidence points and weak compatibility.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{CheckReport, Coverage, Witness};
use crate::space::{Point, Space};
use crate::TAU_EQ;

/// Default grid size for interval scans.
pub const DEFAULT_GRID: usize = 100_001;

/// Grid used for advisory surjectivity checks on intervals.
pub const SURJECTIVITY_GRID: usize = 1_001;

#[derive(Debug, Clone, PartialEq)]
pub enum MappingKind {
    /// `images[i]` is the index of the image of point `i` of a finite space.
    FiniteTable(Vec<usize>),
    /// `1/(r+1) -> 1/r` for `r >= 1`, `0 -> 0`, `1 -> 1`.
    Example1Shift,
    /// `x -> slope * x` on a real interval.
    Linear { slope: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mapping {
    pub name: String,
    pub kind: MappingKind,
}

impl Mapping {
    pub fn table(name: impl Into<String>, images: Vec<usize>) -> Self {
        Mapping {
            name: name.into(),
            kind: MappingKind::FiniteTable(images),
        }
    }

    pub fn example1_shift() -> Self {
        Mapping {
            name: "example1_shift".into(),
            kind: MappingKind::Example1Shift,
        }
    }

    pub fn linear(slope: f64) -> Self {
        Mapping {
            name: format!("x -> {slope} x"),
            kind: MappingKind::Linear { slope },
        }
    }

    /// The identity of `space`.
    pub fn identity(space: &Space) -> Result<Self> {
        match space {
            Space::Finite(fs) => Ok(Mapping::table("identity", (0..fs.len()).collect())),
            Space::RealInterval { .. } => Ok(Mapping {
                name: "identity".into(),
                kind: MappingKind::Linear { slope: 1.0 },
            }),
            Space::ShrinkingFractions { .. } => Err(Error::UnsupportedSpace(
                "no built-in identity on the shrinking-fractions space".into(),
            )),
        }
    }

    pub fn check_compatible(&self, space: &Space) -> Result<()> {
        match (&self.kind, space) {
            (MappingKind::FiniteTable(images), Space::Finite(fs)) => {
                if images.len() != fs.len() {
                    return Err(Error::InvalidConfig(format!(
                        "mapping '{}' defines {} images for {} points",
                        self.name,
                        images.len(),
                        fs.len()
                    )));
                }
                if let Some(bad) = images.iter().find(|&&j| j >= fs.len()) {
                    return Err(Error::InvalidConfig(format!(
                        "mapping '{}' sends a point to unknown index {bad}",
                        self.name
                    )));
                }
                Ok(())
            }
            (MappingKind::Example1Shift, Space::ShrinkingFractions { .. }) => Ok(()),
            (MappingKind::Linear { slope }, Space::RealInterval { .. }) if slope.is_finite() => Ok(()),
            _ => Err(Error::UnsupportedSpace(format!(
                "mapping '{}' is not defined on a {:?} space",
                self.name,
                space.kind()
            ))),
        }
    }

    /// `U(x)`.
    ///
    /// # Panics
    ///
    /// If `x` is not a point of a space the mapping is defined on.
    pub fn apply(&self, x: &Point) -> Point {
        match (&self.kind, *x) {
            (MappingKind::FiniteTable(images), Point::Finite(i)) => Point::Finite(images[i]),
            (MappingKind::Example1Shift, Point::Zero) => Point::Zero,
            (MappingKind::Example1Shift, Point::Recip(1)) => Point::Recip(1),
            (MappingKind::Example1Shift, Point::Recip(r)) => Point::Recip(r - 1),
            (MappingKind::Linear { slope }, Point::Real(v)) => Point::real(slope * v),
            (_, p) => panic!("mapping '{}' applied to foreign point {p:?}", self.name),
        }
    }

    /// All preimages of `y` in canonical order. On intervals at most one
    /// preimage (the least) is returned.
    pub fn preimages(&self, space: &Space, y: &Point) -> Vec<Point> {
        match (&self.kind, *y) {
            (MappingKind::FiniteTable(images), Point::Finite(j)) => images
                .iter()
                .enumerate()
                .filter(|(_, &img)| img == j)
                .map(|(i, _)| Point::Finite(i))
                .collect(),
            (MappingKind::Example1Shift, Point::Zero) => vec![Point::Zero],
            (MappingKind::Example1Shift, Point::Recip(1)) => vec![Point::Recip(2), Point::Recip(1)],
            (MappingKind::Example1Shift, Point::Recip(r)) => vec![Point::Recip(r + 1)],
            (MappingKind::Linear { slope }, Point::Real(target)) => {
                let Space::RealInterval { a, b } = *space else {
                    return vec![];
                };
                if *slope == 0.0 {
                    return if target.abs() <= TAU_EQ { vec![Point::real(a)] } else { vec![] };
                }
                let s = *slope;
                bisect_preimage(|x| s * x, a, b, target).map(Point::real).into_iter().collect()
            }
            _ => vec![],
        }
    }

    /// The canonically least preimage of `y`.
    pub fn least_preimage(&self, space: &Space, y: &Point) -> Option<Point> {
        self.preimages(space, y).into_iter().next()
    }
}

/// Inverts a monotone continuous `f` on `[lo, hi]` by bisection.
///
/// Bisects down to adjacent floating-point numbers and accepts the result
/// when `|f(x) - target| <= TAU_EQ`; returns `None` when `target` is outside
/// the range of `f` on the bracket.
pub fn bisect_preimage(f: impl Fn(f64) -> f64, lo: f64, hi: f64, target: f64) -> Option<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    let increasing = flo <= fhi;
    let (min, max) = if increasing { (flo, fhi) } else { (fhi, flo) };
    if target < min - TAU_EQ || target > max + TAU_EQ {
        return None;
    }
    let (mut lo, mut hi) = (lo, hi);
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = if (f(lo) - target).abs() <= (f(hi) - target).abs() { lo } else { hi };
    ((f(best) - target).abs() <= TAU_EQ).then_some(best)
}

/// Locates a sign change of `g` between `lo` and `hi` by bisection.
fn bisect_sign(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let neg_at_lo = g(lo) < 0.0;
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) < 0.0) == neg_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if g(lo).abs() <= g(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Zeros of `g` on `[a, b]`: grid hits with `|g| <= TAU_EQ` (adjacent hits
/// merged into one cluster, represented by its smallest `|g|`), plus sign
/// changes refined by bisection. Sorted ascending.
pub fn grid_zeros(g: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 || a == b {
        return if g(a).abs() <= TAU_EQ { vec![a] } else { vec![] };
    }
    let xs: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect();
    let vals: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let hit = |i: usize| vals[i].abs() <= TAU_EQ;

    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if hit(i) {
            let mut best = i;
            while i + 1 < n && hit(i + 1) {
                i += 1;
                if vals[i].abs() < vals[best].abs() {
                    best = i;
                }
            }
            out.push(xs[best]);
        } else if i + 1 < n && !hit(i + 1) && vals[i] * vals[i + 1] < 0.0 {
            let root = bisect_sign(&g, xs[i], xs[i + 1]);
            if g(root).abs() <= TAU_EQ {
                out.push(root);
            }
        }
        i += 1;
    }
    out
}

/// A right inverse `U*` with `U(U*(x)) = x`.
///
/// On enumerable spaces the enumerated points are tabulated; any other
/// member of the space is resolved through the canonical-least preimage
/// rule, which is also what the table holds.
#[derive(Debug, Clone, PartialEq)]
pub struct RightInverse {
    base: Mapping,
    space: Space,
    table: BTreeMap<Point, Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RightInverseEntry {
    pub x: String,
    pub right_inverse: String,
}

impl RightInverse {
    pub fn base(&self) -> &Mapping {
        &self.base
    }

    pub fn table(&self) -> &BTreeMap<Point, Point> {
        &self.table
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        if let Some(p) = self.table.get(x) {
            return Ok(*p);
        }
        self.base
            .least_preimage(&self.space, x)
            .ok_or_else(|| Error::NotSurjective {
                uncovered: vec![self.space.label(x)],
            })
    }

    /// The tabulated part as `(x, U*x)` label pairs.
    pub fn entries(&self) -> Vec<RightInverseEntry> {
        self.table
            .iter()
            .map(|(x, y)| RightInverseEntry {
                x: self.space.label(x),
                right_inverse: self.space.label(y),
            })
            .collect()
    }
}

fn interval_grid(a: f64, b: f64, n: usize) -> Vec<Point> {
    if n <= 1 || a == b {
        return vec![Point::real(a)];
    }
    (0..n)
        .map(|i| {
            let x = if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 };
            Point::real(x)
        })
        .collect()
}

fn probe_points(space: &Space) -> (Vec<Point>, Coverage) {
    match space {
        Space::RealInterval { a, b } => (
            interval_grid(*a, *b, SURJECTIVITY_GRID),
            Coverage::Grid {
                points: SURJECTIVITY_GRID,
            },
        ),
        _ => (space.points().unwrap_or_default(), Coverage::Exhaustive),
    }
}

/// PASS iff every enumerated point (grid point on intervals) has a preimage.
pub fn verify_surjective(u: &Mapping, space: &Space) -> Result<CheckReport> {
    const NAME: &str = "surjectivity";
    u.check_compatible(space)?;
    let (pts, coverage) = probe_points(space);
    let uncovered: Vec<Point> = pts
        .iter()
        .filter(|y| u.least_preimage(space, y).is_none())
        .copied()
        .collect();
    let mut report = if uncovered.is_empty() {
        CheckReport::pass(NAME, coverage.clone())
    } else {
        CheckReport::fail(
            NAME,
            coverage.clone(),
            Witness::Uncovered {
                points: uncovered.iter().map(|p| space.labeled(*p)).collect(),
            },
        )
    };
    report.pairs_examined = pts.len() as u64;
    if matches!(coverage, Coverage::Grid { .. }) {
        report.notes.push("advisory: image coverage checked on a uniform grid".into());
    }
    Ok(report)
}

/// Uncovered points listed in a [`Error::NotSurjective`] before truncation.
pub const MAX_REPORTED: usize = 16;

/// Builds `U*` by selecting the canonically least preimage of every point.
pub fn build_right_inverse(u: &Mapping, space: &Space) -> Result<RightInverse> {
    u.check_compatible(space)?;
    let mut table = BTreeMap::new();
    let mut uncovered = Vec::new();
    let (pts, _) = probe_points(space);
    for y in pts {
        match u.least_preimage(space, &y) {
            Some(x) => {
                if space.is_enumerable() {
                    table.insert(y, x);
                }
            }
            None => uncovered.push(space.label(&y)),
        }
    }
    if !uncovered.is_empty() {
        if uncovered.len() > MAX_REPORTED {
            let rest = uncovered.len() - MAX_REPORTED;
            uncovered.truncate(MAX_REPORTED);
            uncovered.push(format!("... {rest} more"));
        }
        return Err(Error::NotSurjective { uncovered });
    }
    Ok(RightInverse {
        base: u.clone(),
        space: space.clone(),
        table,
    })
}

/// PASS iff `U(U*(x)) = x` on every enumerated point (grid on intervals).
pub fn verify_right_inverse(ustar: &RightInverse, space: &Space) -> Result<CheckReport> {
    const NAME: &str = "right inverse";
    let (pts, coverage) = probe_points(space);
    let mut examined = 0;
    for x in pts {
        examined += 1;
        let composed = ustar.base.apply(&ustar.apply(&x)?);
        if !space.same_point(&composed, &x) {
            let mut r = CheckReport::fail(
                NAME,
                coverage,
                Witness::NotRightInverse {
                    point: space.labeled(x),
                    composed: space.labeled(composed),
                },
            );
            r.pairs_examined = examined;
            return Ok(r);
        }
    }
    let mut r = CheckReport::pass(NAME, coverage);
    r.pairs_examined = examined;
    Ok(r)
}

/// All `x` with `d(Ux, Vx) <= TAU_EQ` (exactly zero on tabulated metrics),
/// in canonical order.
pub fn coincidence_points(u: &Mapping, v: &Mapping, space: &Space) -> Result<Vec<Point>> {
    coincidence_points_on_grid(u, v, space, DEFAULT_GRID)
}

pub fn coincidence_points_on_grid(u: &Mapping, v: &Mapping, space: &Space, grid: usize) -> Result<Vec<Point>> {
    u.check_compatible(space)?;
    v.check_compatible(space)?;
    match space {
        Space::RealInterval { a, b } => {
            let coord = |m: &Mapping, x: f64| m.apply(&Point::real(x)).coordinate().unwrap_or(f64::NAN);
            let g = |x: f64| coord(u, x) - coord(v, x);
            Ok(grid_zeros(g, *a, *b, grid).into_iter().map(Point::real).collect())
        }
        _ => Ok(space
            .enumerate()?
            .into_iter()
            .filter(|x| space.same_point(&u.apply(x), &v.apply(x)))
            .collect()),
    }
}

/// PASS iff `UVz = VUz` at every coincidence point `z`.
pub fn verify_weak_compatibility(u: &Mapping, v: &Mapping, space: &Space) -> Result<CheckReport> {
    const NAME: &str = "weak compatibility";
    let coverage = match space {
        Space::RealInterval { .. } => Coverage::Grid { points: DEFAULT_GRID },
        _ => Coverage::Exhaustive,
    };
    let zs = coincidence_points(u, v, space)?;
    let mut examined = 0;
    for z in &zs {
        examined += 1;
        let uv = u.apply(&v.apply(z));
        let vu = v.apply(&u.apply(z));
        if !space.same_point(&uv, &vu) {
            let mut r = CheckReport::fail(
                NAME,
                coverage,
                Witness::NotCommuting {
                    point: space.labeled(*z),
                    uv: space.labeled(uv),
                    vu: space.labeled(vu),
                },
            );
            r.pairs_examined = examined;
            return Ok(r);
        }
    }
    let mut r = CheckReport::pass(NAME, coverage);
    r.pairs_examined = examined;
    let labels: Vec<String> = zs.iter().map(|z| space.label(z)).collect();
    r.notes.push(if labels.is_empty() {
        "no coincidence points (vacuous)".into()
    } else {
        format!("coincidence points: {}", labels.join(", "))
    });
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Verdict;
    use crate::space::FiniteSpace;

    fn ab() -> Space {
        Space::Finite(FiniteSpace::named(&["a", "b"], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap())
    }

    #[test]
    fn example1_shift_is_surjective() {
        for depth in [1, 2, 10, 64] {
            let s = Space::shrinking_fractions(depth).unwrap();
            assert!(verify_surjective(&Mapping::example1_shift(), &s).unwrap().passed());
        }
    }

    #[test]
    fn identity_is_surjective_and_constant_is_not() {
        let s = ab();
        assert!(verify_surjective(&Mapping::identity(&s).unwrap(), &s).unwrap().passed());
        let r = verify_surjective(&Mapping::table("const", vec![0, 0]), &s).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        match r.witness.unwrap() {
            Witness::Uncovered { points } => assert_eq!(points.len(), 1),
            w => panic!("{w:?}"),
        }
    }

    #[test]
    fn example1_right_inverse() {
        let s = Space::shrinking_fractions(30).unwrap();
        let ustar = build_right_inverse(&Mapping::example1_shift(), &s).unwrap();
        for r in 1..=30u64 {
            assert_eq!(ustar.apply(&Point::Recip(r)).unwrap(), Point::Recip(r + 1));
        }
        assert_eq!(ustar.apply(&Point::Zero).unwrap(), Point::Zero);
        // beyond the tabulated depth the rule still applies
        assert_eq!(ustar.apply(&Point::Recip(31)).unwrap(), Point::Recip(32));
        assert!(verify_right_inverse(&ustar, &s).unwrap().passed());
    }

    #[test]
    fn swap_is_its_own_right_inverse() {
        let s = ab();
        let swap = Mapping::table("swap", vec![1, 0]);
        let ustar = build_right_inverse(&swap, &s).unwrap();
        assert_eq!(ustar.apply(&Point::Finite(0)).unwrap(), Point::Finite(1));
        assert_eq!(ustar.apply(&Point::Finite(1)).unwrap(), Point::Finite(0));
    }

    #[test]
    fn quarter_map_is_not_surjective_on_unit_interval() {
        let s = Space::interval(0.0, 1.0).unwrap();
        assert!(matches!(
            build_right_inverse(&Mapping::linear(0.25), &s),
            Err(Error::NotSurjective { .. })
        ));
        assert!(!verify_surjective(&Mapping::linear(0.25), &s).unwrap().passed());
    }

    #[test]
    fn linear_right_inverse_on_interval() {
        let s = Space::interval(-1.0, 1.0).unwrap();
        match build_right_inverse(&Mapping::linear(-0.5), &s) {
            Err(Error::NotSurjective { uncovered }) => assert!(uncovered.len() <= MAX_REPORTED + 1),
            other => panic!("{other:?}"),
        }
        let ustar = build_right_inverse(&Mapping::linear(-2.0), &s).unwrap();
        assert!(verify_right_inverse(&ustar, &s).unwrap().passed());
        let x = ustar.apply(&Point::real(0.3)).unwrap();
        assert!((x.coordinate().unwrap() + 0.15).abs() < 1e-12);
    }

    #[test]
    fn bisection_matches_analytic_inverse() {
        for &slope in &[0.25, 1.0 / 12.0, 2.0, -3.0] {
            for &y in &[0.0, 1e-11, 0.01, 0.2] {
                let x = bisect_preimage(|x| slope * x, -10.0, 10.0, y).unwrap();
                assert!((x - y / slope).abs() <= 1e-12, "slope {slope} y {y}");
            }
        }
        assert_eq!(bisect_preimage(|x| x / 4.0, 0.0, 1.0, 0.5), None);
    }

    #[test]
    fn grid_zeros_merges_clusters_and_refines_sign_changes() {
        assert_eq!(grid_zeros(|x| x / 6.0, 0.0, 1.0, 1001), vec![0.0]);
        let z = grid_zeros(|x| x - 0.123_456_789, 0.0, 1.0, 101);
        assert_eq!(z.len(), 1);
        assert!((z[0] - 0.123_456_789).abs() < 1e-12);
        assert_eq!(grid_zeros(|_| 0.0, 0.0, 1.0, 11).len(), 1);
        assert!(grid_zeros(|x| x + 1.0, 0.0, 1.0, 11).is_empty());
    }

    #[test]
    fn example2_coincidences() {
        let s = Space::interval(0.0, 1.0).unwrap();
        let u = Mapping::linear(0.25);
        let v = Mapping::linear(1.0 / 12.0);
        let z = coincidence_points(&u, &v, &s).unwrap();
        assert_eq!(z, vec![Point::real(0.0)]);
        let r = verify_weak_compatibility(&u, &v, &s).unwrap();
        assert!(r.passed());
        assert_eq!(r.pairs_examined, 1);
    }

    #[test]
    fn coincidences_on_finite_spaces() {
        let s = ab();
        let id = Mapping::identity(&s).unwrap();
        let swap = Mapping::table("swap", vec![1, 0]);
        assert_eq!(coincidence_points(&id, &id, &s).unwrap().len(), 2);
        assert!(coincidence_points(&id, &swap, &s).unwrap().is_empty());
        assert!(verify_weak_compatibility(&id, &id, &s).unwrap().passed());
        // vacuous
        assert!(verify_weak_compatibility(&id, &swap, &s).unwrap().passed());
    }

    #[test]
    fn non_commuting_coincidence_fails() {
        // U = (b, b, a), V = (b, c, c): coincidence at a (U a = V a = b),
        // UV a = U b = b, VU a = V b = c
        let s = Space::Finite(FiniteSpace::on_line(&[0.0, 1.0, 2.0]).unwrap());
        let u = Mapping::table("u", vec![1, 1, 0]);
        let v = Mapping::table("v", vec![1, 2, 2]);
        let r = verify_weak_compatibility(&u, &v, &s).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn mismatched_table_is_rejected() {
        let s = ab();
        assert!(Mapping::table("bad", vec![0]).check_compatible(&s).is_err());
        assert!(Mapping::table("bad", vec![0, 5]).check_compatible(&s).is_err());
        assert!(Mapping::example1_shift().check_compatible(&s).is_err());
    }
}
