//! Closed intervals, input boxes and affine forms.
//!
//! All arithmetic is plain IEEE double precision. With the `outward-rounding`
//! feature enabled, every computed endpoint is pushed one ulp outward so that
//! the result encloses the exact real-valued result.

use std::fmt;
use std::ops::Add;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// True when endpoints are rounded outward.
pub(crate) const OUTWARD: bool = cfg!(feature = "outward-rounding");

#[cfg(feature = "outward-rounding")]
#[inline]
fn round_down(v: f64) -> f64 {
    v.next_down()
}

#[cfg(not(feature = "outward-rounding"))]
#[inline]
fn round_down(v: f64) -> f64 {
    v
}

#[cfg(feature = "outward-rounding")]
#[inline]
pub(crate) fn round_up(v: f64) -> f64 {
    v.next_up()
}

#[cfg(not(feature = "outward-rounding"))]
#[inline]
pub(crate) fn round_up(v: f64) -> f64 {
    v
}

/// A closed interval `[lo, hi]` of reals with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::NonFinite("interval endpoint".into()));
        }
        if lo > hi {
            return Err(Error::InvertedInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// The degenerate interval `[v, v]`.
    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        self.lo + (self.hi - self.lo) / 2.0
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn scale(&self, w: f64) -> Interval {
        let (a, b) = if w >= 0.0 {
            (w * self.lo, w * self.hi)
        } else {
            (w * self.hi, w * self.lo)
        };
        Interval {
            lo: round_down(a),
            hi: round_up(b),
        }
    }

    pub fn relu(&self) -> Interval {
        Interval {
            lo: self.lo.max(0.0),
            hi: self.hi.max(0.0),
        }
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: round_down(self.lo + rhs.lo),
            hi: round_up(self.hi + rhs.hi),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Pair([f64; 2]),
            Named { lo: f64, hi: f64 },
        }
        let (lo, hi) = match Repr::deserialize(deserializer)? {
            Repr::Pair([lo, hi]) => (lo, hi),
            Repr::Named { lo, hi } => (lo, hi),
        };
        Interval::new(lo, hi).map_err(serde::de::Error::custom)
    }
}

/// Result of bisecting a box.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub lower: InputBox,
    pub upper: InputBox,
    /// False when the chosen dimension was degenerate and both halves equal the input.
    pub progress: bool,
}

/// A hyperrectangle: one independent interval per input feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InputBox {
    dims: Vec<Interval>,
}

impl InputBox {
    pub fn new(dims: Vec<Interval>) -> Self {
        InputBox { dims }
    }

    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self> {
        bounds
            .iter()
            .map(|&(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()
            .map(InputBox::new)
    }

    /// The degenerate box at a concrete point.
    pub fn from_point(x: &[f64]) -> Self {
        InputBox::new(x.iter().copied().map(Interval::point).collect())
    }

    pub fn dims(&self) -> &[Interval] {
        &self.dims
    }

    pub fn dim(&self, i: usize) -> Interval {
        self.dims[i]
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn into_dims(self) -> Vec<Interval> {
        self.dims
    }

    pub(crate) fn dims_mut(&mut self) -> &mut [Interval] {
        &mut self.dims
    }

    /// Pointwise containment. Boxes of different length are never related.
    pub fn contains(&self, inner: &InputBox) -> bool {
        self.len() == inner.len()
            && self
                .dims
                .iter()
                .zip(&inner.dims)
                .all(|(o, i)| o.contains_interval(i))
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.len() == x.len() && self.dims.iter().zip(x).all(|(d, &v)| d.contains(v))
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().map(Interval::width).product()
    }

    pub fn is_point(&self) -> bool {
        self.dims.iter().all(Interval::is_degenerate)
    }

    pub fn max_width(&self) -> f64 {
        self.dims.iter().map(Interval::width).fold(0.0, f64::max)
    }

    /// Index of the widest dimension; the lowest index wins ties.
    pub fn widest_dim(&self) -> usize {
        let mut best = 0;
        for (i, d) in self.dims.iter().enumerate() {
            if d.width() > self.dims[best].width() {
                best = i;
            }
        }
        best
    }

    pub fn center(&self) -> Vec<f64> {
        self.dims.iter().map(Interval::midpoint).collect()
    }

    pub fn lower_corner(&self) -> Vec<f64> {
        self.dims.iter().map(Interval::lo).collect()
    }

    /// Bisect at the midpoint of `dim`.
    pub fn split(&self, dim: usize) -> Result<Split> {
        if dim >= self.len() {
            return Err(Error::DimensionMismatch {
                what: "split dimension",
                expected: self.len(),
                found: dim,
            });
        }
        let d = self.dims[dim];
        if d.is_degenerate() {
            return Ok(Split {
                lower: self.clone(),
                upper: self.clone(),
                progress: false,
            });
        }
        let mid = d.midpoint();
        let mut lower = self.clone();
        let mut upper = self.clone();
        lower.dims[dim] = Interval { lo: d.lo, hi: mid };
        upper.dims[dim] = Interval { lo: mid, hi: d.hi };
        Ok(Split {
            lower,
            upper,
            progress: true,
        })
    }

    /// Vertex `bits` of the box: bit `i` selects the upper endpoint of dimension `i`.
    pub fn corner(&self, bits: u64) -> Vec<f64> {
        self.dims
            .iter()
            .enumerate()
            .map(|(i, d)| {
                if i < 64 && (bits >> i) & 1 == 1 {
                    d.hi
                } else {
                    d.lo
                }
            })
            .collect()
    }

    /// Uniform sample from the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.dims
            .iter()
            .map(|d| {
                if d.is_degenerate() {
                    d.lo
                } else {
                    // gen_range excludes hi; clamp keeps rounding inside the box
                    (d.lo + rng.gen::<f64>() * d.width()).clamp(d.lo, d.hi)
                }
            })
            .collect()
    }
}

impl fmt::Display for InputBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, d) in self.dims.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ">")
    }
}

/// `constant + Σ coeffs[i] * x_i` over the input variables.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    pub constant: f64,
    pub coeffs: Vec<f64>,
}

/// Outcome of pushing an affine form through a ReLU.
#[derive(Debug, Clone, PartialEq)]
pub enum ReluImage {
    Form(AffineForm),
    Interval(Interval),
}

impl AffineForm {
    pub fn zero(num_vars: usize) -> Self {
        AffineForm {
            constant: 0.0,
            coeffs: vec![0.0; num_vars],
        }
    }

    pub fn constant(c: f64, num_vars: usize) -> Self {
        AffineForm {
            constant: c,
            coeffs: vec![0.0; num_vars],
        }
    }

    /// The form `x_var`.
    pub fn variable(var: usize, num_vars: usize) -> Self {
        let mut f = AffineForm::zero(num_vars);
        f.coeffs[var] = 1.0;
        f
    }

    pub fn num_vars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(x)
            .fold(self.constant, |acc, (c, v)| acc + c * v)
    }

    /// Exact range of the form over `bx` (up to rounding).
    pub fn concretize(&self, bx: &InputBox) -> Interval {
        self.coeffs
            .iter()
            .zip(bx.dims())
            .fold(Interval::point(self.constant), |acc, (&c, d)| {
                acc + d.scale(c)
            })
    }

    /// `self += w * other`.
    pub fn add_scaled(&mut self, other: &AffineForm, w: f64) {
        self.constant += w * other.constant;
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += w * o;
        }
    }

    /// `self += w * other`, adding to `slack` a per-coefficient bound on the
    /// rounding error of the update. `slack` has one entry per variable plus
    /// a final entry for the constant.
    pub(crate) fn add_scaled_tracked(&mut self, other: &AffineForm, w: f64, slack: &mut [f64]) {
        let n = self.coeffs.len();
        let step = |c: &mut f64, o: f64, s: &mut f64| {
            let p = w * o;
            *c += p;
            *s += f64::EPSILON * (p.abs() + c.abs());
        };
        step(&mut self.constant, other.constant, &mut slack[n]);
        for ((c, &o), s) in self
            .coeffs
            .iter_mut()
            .zip(&other.coeffs)
            .zip(slack.iter_mut())
        {
            step(c, o, s);
        }
    }

    /// Keeps the form when the ReLU is stably active, returns zero when
    /// stably inactive, and falls back to the concretized interval otherwise.
    pub fn relu(self, bx: &InputBox) -> ReluImage {
        let range = self.concretize(bx);
        if range.lo() >= 0.0 {
            ReluImage::Form(self)
        } else if range.hi() <= 0.0 {
            ReluImage::Form(AffineForm::zero(self.num_vars()))
        } else {
            ReluImage::Interval(range.relu())
        }
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if wrote {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
                write!(f, "{}*x{}", c.abs(), i + 1)?;
            } else {
                write!(f, "{}*x{}", c, i + 1)?;
            }
            wrote = true;
        }
        if self.constant != 0.0 || !wrote {
            if wrote {
                write!(
                    f,
                    " {} {}",
                    if self.constant < 0.0 { '-' } else { '+' },
                    self.constant.abs()
                )?;
            } else {
                write!(f, "{}", self.constant)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    #[cfg_attr(
        feature = "outward-rounding",
        ignore = "asserts exact double-precision values"
    )]
    fn add_examples() {
        assert_eq!(iv(0.0, 3.0) + iv(0.0, 2.0), iv(0.0, 5.0));
        assert_eq!(iv(1.0, 1.0) + iv(0.0, 0.0), iv(1.0, 1.0));
        assert_eq!(iv(-3.0, 2.0) + iv(2.0, 4.0), iv(-1.0, 6.0));
    }

    #[test]
    #[cfg_attr(
        feature = "outward-rounding",
        ignore = "asserts exact double-precision values"
    )]
    fn scale_examples() {
        assert_eq!(iv(0.0, 3.0).scale(0.8), iv(0.0, 0.8 * 3.0));
        assert!((iv(0.0, 3.0).scale(0.8).hi() - 2.4).abs() < 1e-15);
        assert_eq!(iv(0.0, 2.0).scale(-1.0), iv(-2.0, 0.0));
        assert_eq!(iv(-3.0, 2.2).scale(0.5), iv(-1.5, 1.1));
    }

    #[test]
    fn relu_examples() {
        assert_eq!(iv(-3.0, 2.0).relu(), iv(0.0, 2.0));
        assert_eq!(iv(0.6, 6.0).relu(), iv(0.6, 6.0));
        assert_eq!(iv(-11.0, -5.0).relu(), iv(0.0, 0.0));
    }

    #[test]
    fn rejects_inverted_and_nan() {
        assert!(matches!(
            Interval::new(1.0, 0.0),
            Err(Error::InvertedInterval { .. })
        ));
        assert!(Interval::new(f64::NAN, 0.0).is_err());
        assert!(Interval::new(2.0, 2.0).unwrap().is_degenerate());
    }

    #[test]
    fn deserializes_pair_and_rejects_inverted() {
        let i: Interval = serde_json::from_str("[0.8, 1]").unwrap();
        assert_eq!(i, iv(0.8, 1.0));
        let i: Interval = serde_json::from_str(r#"{"lo": -1, "hi": 2}"#).unwrap();
        assert_eq!(i, iv(-1.0, 2.0));
        assert!(serde_json::from_str::<Interval>("[2, 1]").is_err());
    }

    #[test]
    fn box_split_contains_volume() {
        let b = InputBox::from_bounds(&[(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let s = b.split(0).unwrap();
        assert!(s.progress);
        assert_eq!(
            s.lower,
            InputBox::from_bounds(&[(0.0, 0.5), (0.0, 1.0)]).unwrap()
        );
        assert_eq!(
            s.upper,
            InputBox::from_bounds(&[(0.5, 1.0), (0.0, 1.0)]).unwrap()
        );

        let outer = InputBox::from_bounds(&[(0.0, 1.0)]).unwrap();
        let inner = InputBox::from_bounds(&[(0.2, 0.8)]).unwrap();
        assert!(outer.contains(&inner));
        assert!(!inner.contains(&outer));

        let v = InputBox::from_bounds(&[(0.0, 1.0), (0.0, 1.0), (0.8, 1.0)]).unwrap();
        assert!((v.volume() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn split_degenerate_dimension_is_non_progress() {
        let b = InputBox::from_bounds(&[(0.3, 0.3), (0.0, 1.0)]).unwrap();
        let s = b.split(0).unwrap();
        assert!(!s.progress);
        assert_eq!(s.lower, b);
        assert_eq!(s.upper, b);
        assert!(b.split(2).is_err());
    }

    #[test]
    fn widest_dim_prefers_lowest_index() {
        let b = InputBox::from_bounds(&[(0.0, 1.0), (0.0, 2.0), (1.0, 3.0)]).unwrap();
        assert_eq!(b.widest_dim(), 1);
    }

    #[test]
    #[cfg_attr(
        feature = "outward-rounding",
        ignore = "asserts exact double-precision values"
    )]
    fn affine_relu_cases() {
        let unit = InputBox::from_bounds(&[(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let stable = AffineForm {
            constant: 0.0,
            coeffs: vec![1.0, 2.0],
        };
        assert_eq!(stable.clone().relu(&unit), ReluImage::Form(stable));

        let unstable = AffineForm {
            constant: 0.0,
            coeffs: vec![2.0, -3.0],
        };
        assert_eq!(
            unstable.clone().relu(&unit),
            ReluImage::Interval(iv(0.0, 2.0))
        );

        // 2*x1 - 3*x2 <= 0 everywhere on this box
        let neg_box = InputBox::from_bounds(&[(0.0, 0.3), (0.2, 1.0)]).unwrap();
        assert_eq!(
            unstable.relu(&neg_box),
            ReluImage::Form(AffineForm::zero(2))
        );
    }

    #[test]
    fn affine_display() {
        let f = AffineForm {
            constant: 0.0,
            coeffs: vec![0.8, 1.6],
        };
        assert_eq!(f.to_string(), "0.8*x1 + 1.6*x2");
        let g = AffineForm {
            constant: -2.0,
            coeffs: vec![-0.1, -0.2],
        };
        assert_eq!(g.to_string(), "-0.1*x1 - 0.2*x2 - 2");
    }

    fn interval_strategy() -> impl Strategy<Value = Interval> {
        (-100.0f64..100.0, 0.0f64..50.0).prop_map(|(lo, w)| iv(lo, lo + w))
    }

    proptest! {
        #[test]
        fn arithmetic_is_sound(a in interval_strategy(), b in interval_strategy(),
                               s in 0.0f64..=1.0, t in 0.0f64..=1.0, w in -10.0f64..10.0) {
            let x = a.lo() + s * a.width();
            let y = b.lo() + t * b.width();
            let x = x.clamp(a.lo(), a.hi());
            let y = y.clamp(b.lo(), b.hi());
            prop_assert!((a + b).contains(x + y));
            prop_assert!(a.scale(w).contains(w * x));
            prop_assert!(a.relu().contains(x.max(0.0)));
        }

        #[test]
        fn affine_concretization_is_sound(
            coeffs in proptest::collection::vec(-5.0f64..5.0, 3),
            constant in -5.0f64..5.0,
            lows in proptest::collection::vec(-2.0f64..2.0, 3),
            widths in proptest::collection::vec(0.0f64..2.0, 3),
            fracs in proptest::collection::vec(0.0f64..=1.0, 3),
        ) {
            let bx = InputBox::new(lows.iter().zip(&widths).map(|(&l, &w)| iv(l, l + w)).collect());
            let p: Vec<f64> = bx.dims().iter().zip(&fracs)
                .map(|(d, &f)| (d.lo() + f * d.width()).clamp(d.lo(), d.hi())).collect();
            let form = AffineForm { constant, coeffs };
            let range = form.concretize(&bx);
            let v = form.evaluate(&p);
            // only rounding separates the two evaluation orders
            prop_assert!(range.lo() - 1e-12 <= v && v <= range.hi() + 1e-12);
        }

        #[test]
        fn split_partitions(lows in proptest::collection::vec(-2.0f64..2.0, 1..5),
                            widths in proptest::collection::vec(0.0f64..2.0, 5),
                            dim_seed in 0usize..5) {
            let bx = InputBox::new(lows.iter().zip(&widths).map(|(&l, &w)| iv(l, l + w)).collect());
            let dim = dim_seed % bx.len();
            let s = bx.split(dim).unwrap();
            prop_assert!(bx.contains(&s.lower) && bx.contains(&s.upper));
            if s.progress {
                let total = s.lower.volume() + s.upper.volume();
                prop_assert!((total - bx.volume()).abs() <= 1e-12 * bx.volume().max(1.0));
                prop_assert_eq!(s.lower.dim(dim).hi(), s.upper.dim(dim).lo());
                prop_assert_eq!(s.lower.dim(dim).lo(), bx.dim(dim).lo());
                prop_assert_eq!(s.upper.dim(dim).hi(), bx.dim(dim).hi());
            }
        }
    }
}
