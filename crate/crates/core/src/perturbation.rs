//! Widening input perturbations.
//!
//! Each perturbation maps an input box to a box that contains it, modelling
//! a whole family of attacks as one enlarged abstract input.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{InputBox, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    Identity,
    FeatureWiden,
    LinfBall,
    LightPatch,
    SensorRupture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
    #[default]
    Both,
}

/// Rectangular pixel region: columns `x..x+w`, rows `y..y+h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Patch {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

/// Layout of an image-typed input, stored channel-major (`c * H * W + y * W + x`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageShape {
    pub height: usize,
    pub width: usize,
    #[serde(default = "one")]
    pub channels: usize,
}

fn one() -> usize {
    1
}

impl ImageShape {
    pub fn len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat indices of every pixel in `patch`, across all channels, in
    /// channel-major row-major order.
    pub fn patch_indices(&self, patch: &Patch) -> Result<Vec<usize>> {
        if patch.x + patch.w > self.width || patch.y + patch.h > self.height {
            return Err(Error::InvalidPerturbation(format!(
                "patch {}x{} at ({}, {}) exceeds {}x{} image",
                patch.w, patch.h, patch.x, patch.y, self.width, self.height
            )));
        }
        let mut out = Vec::with_capacity(patch.w * patch.h * self.channels);
        for c in 0..self.channels {
            for y in patch.y..patch.y + patch.h {
                for x in patch.x..patch.x + patch.w {
                    out.push(c * self.height * self.width + y * self.width + x);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<Patch>,
    /// 0-based input feature for `feature_widen`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip: Option<Interval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ImageShape>,
}

impl PerturbationSpec {
    pub fn identity() -> Self {
        PerturbationSpec {
            kind: PerturbationKind::Identity,
            epsilon: 0.0,
            patch: None,
            feature: None,
            side: None,
            seed: None,
            clip: None,
            shape: None,
        }
    }

    pub fn feature_widen(feature: usize, side: Side, epsilon: f64) -> Self {
        PerturbationSpec {
            kind: PerturbationKind::FeatureWiden,
            epsilon,
            feature: Some(feature),
            side: Some(side),
            ..Self::identity()
        }
    }

    pub fn linf(epsilon: f64, clip: Option<Interval>) -> Self {
        PerturbationSpec {
            kind: PerturbationKind::LinfBall,
            epsilon,
            clip,
            ..Self::identity()
        }
    }

    pub fn light_patch(shape: ImageShape, patch: Patch, epsilon: f64) -> Self {
        PerturbationSpec {
            kind: PerturbationKind::LightPatch,
            epsilon,
            patch: Some(patch),
            shape: Some(shape),
            ..Self::identity()
        }
    }

    pub fn sensor_rupture(shape: ImageShape, patch: Patch, epsilon: f64, seed: u64) -> Self {
        PerturbationSpec {
            kind: PerturbationKind::SensorRupture,
            epsilon,
            patch: Some(patch),
            shape: Some(shape),
            seed: Some(seed),
            ..Self::identity()
        }
    }

    /// Domain clamp: explicit `clip`, else `[0, 1]` for image-typed inputs.
    pub fn effective_clip(&self) -> Option<Interval> {
        self.clip.or_else(|| {
            self.shape
                .map(|_| Interval::new(0.0, 1.0).expect("unit interval"))
        })
    }

    pub fn validate(&self, input_dim: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPerturbation(msg));
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return bad(format!(
                "epsilon must be finite and nonnegative, got {}",
                self.epsilon
            ));
        }
        if let Some(shape) = self.shape {
            if shape.len() != input_dim {
                return bad(format!(
                    "image shape has {} values, network expects {input_dim}",
                    shape.len()
                ));
            }
        }
        match self.kind {
            PerturbationKind::Identity | PerturbationKind::LinfBall => Ok(()),
            PerturbationKind::FeatureWiden => match self.feature {
                Some(f) if f < input_dim => Ok(()),
                Some(f) => bad(format!("feature {f} out of range for {input_dim} inputs")),
                None => bad("feature_widen requires `feature`".into()),
            },
            PerturbationKind::LightPatch | PerturbationKind::SensorRupture => {
                if self.kind == PerturbationKind::SensorRupture && self.epsilon > 1.0 {
                    return bad(format!("rupture probability {} exceeds 1", self.epsilon));
                }
                let (Some(shape), Some(patch)) = (self.shape, self.patch) else {
                    return bad("patch attacks require `shape` and `patch`".into());
                };
                shape.patch_indices(&patch).map(|_| ())
            }
        }
    }

    /// Applies the perturbation to `bx`. The result always contains `bx`.
    pub fn widen(&self, bx: &InputBox) -> Result<InputBox> {
        self.validate(bx.len())?;
        let eps = self.epsilon;
        let mut out = bx.clone();
        match self.kind {
            PerturbationKind::Identity => {}
            PerturbationKind::FeatureWiden => {
                let f = self.feature.expect("validated");
                let d = bx.dim(f);
                let side = self.side.unwrap_or_default();
                let lo = if side == Side::Upper {
                    d.lo()
                } else {
                    d.lo() - eps
                };
                let hi = if side == Side::Lower {
                    d.hi()
                } else {
                    d.hi() + eps
                };
                out.dims_mut()[f] = Interval::new(lo, hi)?;
            }
            PerturbationKind::LinfBall => {
                let clip = self.effective_clip();
                for d in out.dims_mut() {
                    let mut lo = d.lo() - eps;
                    let mut hi = d.hi() + eps;
                    if let Some(c) = clip {
                        // clamp to the domain without cutting into the original box
                        lo = lo.max(c.lo()).min(d.lo());
                        hi = hi.min(c.hi()).max(d.hi());
                    }
                    *d = Interval::new(lo, hi)?;
                }
            }
            PerturbationKind::LightPatch => {
                let idx = self.patch_indices()?;
                for i in idx {
                    let d = out.dims()[i];
                    let hi = light_value(d.hi(), eps).max(d.hi());
                    out.dims_mut()[i] = Interval::new(d.lo(), hi)?;
                }
            }
            PerturbationKind::SensorRupture => {
                let idx = self.patch_indices()?;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed.unwrap_or(0));
                for i in idx {
                    if rng.gen_bool(eps) {
                        // hull of the original value and black
                        let d = out.dims()[i];
                        out.dims_mut()[i] = d.hull(&Interval::ZERO);
                    }
                }
            }
        }
        Ok(out)
    }

    fn patch_indices(&self) -> Result<Vec<usize>> {
        let (Some(shape), Some(patch)) = (self.shape, self.patch) else {
            return Err(Error::InvalidPerturbation(
                "patch attacks require `shape` and `patch`".into(),
            ));
        };
        shape.patch_indices(&patch)
    }
}

/// `min(p + eps * (1 - p), 1)`.
fn light_value(p: f64, eps: f64) -> f64 {
    (p + eps * (1.0 - p)).min(1.0)
}

/// The l-infinity ball of radius `eps` around `x`, intersected with `clip`.
/// The clamp never excludes `x` itself.
pub fn linf_ball(x: &[f64], eps: f64, clip: Option<Interval>) -> InputBox {
    InputBox::new(
        x.iter()
            .map(|&v| {
                let (mut lo, mut hi) = (v - eps, v + eps);
                if let Some(c) = clip {
                    lo = lo.max(c.lo()).min(v);
                    hi = hi.min(c.hi()).max(v);
                }
                Interval::new(lo, hi).expect("ordered by construction")
            })
            .collect(),
    )
}

/// Brightening patch: pixels in `patch` cover every intensity between the
/// original value and full brightening by `eps`; all others stay fixed.
pub fn light_patch(image: &[f64], shape: ImageShape, patch: &Patch, eps: f64) -> Result<InputBox> {
    check_image(image, shape)?;
    let mut out = InputBox::from_point(image);
    for i in shape.patch_indices(patch)? {
        let p = image[i];
        out.dims_mut()[i] = Interval::new(p, light_value(p, eps).max(p))?;
    }
    Ok(out)
}

/// One sampled sensor rupture: each pixel in `patch` independently turns
/// black with probability `eps`. Deterministic for a fixed seed.
pub fn sensor_rupture(
    image: &[f64],
    shape: ImageShape,
    patch: &Patch,
    eps: f64,
    seed: u64,
) -> Result<InputBox> {
    check_image(image, shape)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidPerturbation(format!(
            "rupture probability {eps} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = InputBox::from_point(image);
    for i in shape.patch_indices(patch)? {
        if rng.gen_bool(eps) {
            out.dims_mut()[i] = Interval::ZERO;
        }
    }
    Ok(out)
}

/// Upper limit on patch size for exhaustive rupture enumeration.
pub const MAX_EXHAUSTIVE_RUPTURE: usize = 16;

/// Every possible rupture pattern of a small patch, in subset order.
pub fn sensor_rupture_exhaustive(
    image: &[f64],
    shape: ImageShape,
    patch: &Patch,
) -> Result<Vec<InputBox>> {
    check_image(image, shape)?;
    let idx = shape.patch_indices(patch)?;
    if idx.len() > MAX_EXHAUSTIVE_RUPTURE {
        return Err(Error::InvalidPerturbation(format!(
            "{} pixels is too many for exhaustive rupture (limit {MAX_EXHAUSTIVE_RUPTURE})",
            idx.len()
        )));
    }
    let base = InputBox::from_point(image);
    Ok((0u32..1 << idx.len())
        .map(|mask| {
            let mut b = base.clone();
            for (k, &i) in idx.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    b.dims_mut()[i] = Interval::ZERO;
                }
            }
            b
        })
        .collect())
}

fn check_image(image: &[f64], shape: ImageShape) -> Result<()> {
    if image.len() != shape.len() {
        return Err(Error::DimensionMismatch {
            what: "image",
            expected: shape.len(),
            found: image.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn bounds(b: &InputBox) -> Vec<(f64, f64)> {
        b.dims().iter().map(|d| (d.lo(), d.hi())).collect()
    }

    #[test]
    fn identity_and_feature_widen() {
        let x = fixtures::headline_box();
        assert_eq!(PerturbationSpec::identity().widen(&x).unwrap(), x);

        let w = PerturbationSpec::feature_widen(2, Side::Lower, 0.8)
            .widen(&x)
            .unwrap();
        let b = bounds(&w);
        assert_eq!(b[0], (0.0, 1.0));
        assert_eq!(b[1], (0.0, 1.0));
        assert!((b[2].0 - 0.0).abs() < 1e-15 && b[2].1 == 1.0);

        let w = PerturbationSpec::feature_widen(0, Side::Upper, 0.8)
            .widen(&x)
            .unwrap();
        assert_eq!(bounds(&w), vec![(0.0, 1.8), (0.0, 1.0), (0.8, 1.0)]);

        let w = PerturbationSpec::feature_widen(1, Side::Both, 0.5)
            .widen(&x)
            .unwrap();
        assert_eq!(bounds(&w)[1], (-0.5, 1.5));
    }

    #[test]
    fn feature_widen_requires_valid_feature() {
        let x = fixtures::headline_box();
        assert!(PerturbationSpec::feature_widen(3, Side::Both, 0.1)
            .widen(&x)
            .is_err());
        let mut spec = PerturbationSpec::feature_widen(0, Side::Both, 0.1);
        spec.feature = None;
        assert!(spec.widen(&x).is_err());
        let spec = PerturbationSpec::feature_widen(0, Side::Both, -0.1);
        assert!(spec.widen(&x).is_err());
    }

    #[test]
    fn linf_examples() {
        let unit = Interval::new(0.0, 1.0).unwrap();
        assert_eq!(
            bounds(&linf_ball(&[0.5, 0.5], 0.5, Some(unit))),
            vec![(0.0, 1.0), (0.0, 1.0)]
        );
        assert_eq!(
            linf_ball(&[0.3, 0.7], 0.0, Some(unit)),
            InputBox::from_point(&[0.3, 0.7])
        );
        let b = bounds(&linf_ball(&[0.9], 0.2, Some(unit)));
        assert!((b[0].0 - 0.7).abs() < 1e-15 && b[0].1 == 1.0);
        assert_eq!(bounds(&linf_ball(&[0.9], 0.2, None))[0].1, 0.9 + 0.2);
    }

    fn grid(h: usize, w: usize) -> ImageShape {
        ImageShape {
            height: h,
            width: w,
            channels: 1,
        }
    }

    #[test]
    fn light_patch_examples() {
        let shape = grid(1, 2);
        let patch = Patch {
            x: 0,
            y: 0,
            w: 1,
            h: 1,
        };
        let b = light_patch(&[0.5, 0.5], shape, &patch, 1.0).unwrap();
        assert_eq!(bounds(&b), vec![(0.5, 1.0), (0.5, 0.5)]);
        let b = light_patch(&[0.2, 0.5], shape, &patch, 0.5).unwrap();
        assert!((b.dim(0).hi() - 0.6).abs() < 1e-15);
        let b = light_patch(&[0.2, 0.5], shape, &patch, 0.0).unwrap();
        assert_eq!(b, InputBox::from_point(&[0.2, 0.5]));
        let far = Patch {
            x: 1,
            y: 0,
            w: 2,
            h: 1,
        };
        assert!(light_patch(&[0.2, 0.5], shape, &far, 0.5).is_err());
    }

    #[test]
    fn patch_indices_channel_major() {
        let shape = ImageShape {
            height: 3,
            width: 4,
            channels: 2,
        };
        let idx = shape
            .patch_indices(&Patch {
                x: 1,
                y: 1,
                w: 2,
                h: 1,
            })
            .unwrap();
        assert_eq!(idx, vec![5, 6, 17, 18]);
    }

    #[test]
    fn rupture_extremes_and_count() {
        let shape = grid(32, 32);
        let image = vec![0.5; 1024];
        let patch = Patch {
            x: 0,
            y: 0,
            w: 32,
            h: 32,
        };
        let all = sensor_rupture(&image, shape, &patch, 1.0, 7).unwrap();
        assert!(all.dims().iter().all(|d| *d == Interval::ZERO));
        let none = sensor_rupture(&image, shape, &patch, 0.0, 7).unwrap();
        assert_eq!(none, InputBox::from_point(&image));

        let some = sensor_rupture(&image, shape, &patch, 0.3, 42).unwrap();
        let count = some.dims().iter().filter(|d| **d == Interval::ZERO).count() as f64;
        let mean = 0.3 * 1024.0;
        let sigma = (1024.0f64 * 0.3 * 0.7).sqrt();
        assert!((count - mean).abs() <= 3.0 * sigma, "count {count}");
        assert_eq!(
            some,
            sensor_rupture(&image, shape, &patch, 0.3, 42).unwrap()
        );
    }

    #[test]
    fn rupture_exhaustive_small_patch() {
        let shape = grid(2, 2);
        let image = [0.1, 0.2, 0.3, 0.4];
        let all = sensor_rupture_exhaustive(
            &image,
            shape,
            &Patch {
                x: 0,
                y: 0,
                w: 2,
                h: 1,
            },
        )
        .unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!(all[0], InputBox::from_point(&image));
        assert_eq!(all[3], InputBox::from_point(&[0.0, 0.0, 0.3, 0.4]));
        let big = grid(5, 5);
        assert!(sensor_rupture_exhaustive(
            &[0.0; 25],
            big,
            &Patch {
                x: 0,
                y: 0,
                w: 5,
                h: 4
            }
        )
        .is_err());
    }

    #[test]
    fn clip_defaults_to_unit_for_images() {
        let spec = PerturbationSpec::light_patch(
            grid(1, 1),
            Patch {
                x: 0,
                y: 0,
                w: 1,
                h: 1,
            },
            0.5,
        );
        assert_eq!(
            spec.effective_clip(),
            Some(Interval::new(0.0, 1.0).unwrap())
        );
        assert_eq!(PerturbationSpec::linf(0.1, None).effective_clip(), None);
    }

    #[test]
    fn spec_json() {
        let spec: PerturbationSpec = serde_json::from_str(
            r#"{"kind": "feature_widen", "epsilon": 0.8, "feature": 2, "side": "lower"}"#,
        )
        .unwrap();
        assert_eq!(spec, PerturbationSpec::feature_widen(2, Side::Lower, 0.8));
        let spec: PerturbationSpec = serde_json::from_str(
            r#"{"kind": "light_patch", "epsilon": 1.0, "patch": {"x": 0, "y": 0, "w": 2, "h": 2},
                "shape": {"height": 4, "width": 4}}"#,
        )
        .unwrap();
        assert_eq!(spec.shape.unwrap().channels, 1);
        assert!(serde_json::from_str::<PerturbationSpec>(r#"{"kind": "rotate"}"#).is_err());
    }

    fn image_box() -> impl Strategy<Value = InputBox> {
        proptest::collection::vec((0.0f64..1.0, 0.0f64..0.3), 16).prop_map(|v| {
            InputBox::new(
                v.into_iter()
                    .map(|(l, w)| Interval::new(l, l + w).unwrap())
                    .collect(),
            )
        })
    }

    fn any_spec() -> impl Strategy<Value = PerturbationSpec> {
        let shape = grid(4, 4);
        (
            0usize..5,
            0.0f64..1.0,
            0usize..16,
            0usize..3,
            any::<u64>(),
            0usize..3,
            0usize..3,
        )
            .prop_map(move |(kind, eps, feature, side, seed, px, py)| {
                let patch = Patch {
                    x: px,
                    y: py,
                    w: 2,
                    h: 2,
                };
                let side = [Side::Lower, Side::Upper, Side::Both][side];
                match kind {
                    0 => PerturbationSpec::identity(),
                    1 => PerturbationSpec::feature_widen(feature, side, eps),
                    2 => PerturbationSpec::linf(
                        eps,
                        if seed % 2 == 0 {
                            None
                        } else {
                            Some(Interval::new(0.0, 1.0).unwrap())
                        },
                    ),
                    3 => PerturbationSpec::light_patch(shape, patch, eps),
                    _ => PerturbationSpec::sensor_rupture(shape, patch, eps, seed),
                }
            })
    }

    proptest! {
        #[test]
        fn widening_is_extensive(spec in any_spec(), bx in image_box()) {
            let w = spec.widen(&bx).unwrap();
            prop_assert!(w.contains(&bx));
            prop_assert_eq!(&w, &spec.widen(&bx).unwrap());
        }

        #[test]
        fn linf_embeds_concrete_ball(bx in image_box(), eps in 0.0f64..0.5,
                                     fr in proptest::collection::vec(0.0f64..=1.0, 16),
                                     off in proptest::collection::vec(-1.0f64..=1.0, 16)) {
            let w = PerturbationSpec::linf(eps, None).widen(&bx).unwrap();
            let z: Vec<f64> = bx.dims().iter().zip(&fr).zip(&off)
                .map(|((d, &f), &o)| (d.lo() + f * d.width()).clamp(d.lo(), d.hi()) + o * eps).collect();
            prop_assert!(w.contains_point(&z));
        }

        #[test]
        fn light_patch_capped_rupture_binary(image in proptest::collection::vec(0.0f64..=1.0, 16),
                                             eps in 0.0f64..=1.0, seed in any::<u64>()) {
            let shape = grid(4, 4);
            let patch = Patch { x: 1, y: 1, w: 3, h: 3 };
            let lit = light_patch(&image, shape, &patch, eps).unwrap();
            prop_assert!(lit.dims().iter().all(|d| d.hi() <= 1.0));
            let r = sensor_rupture(&image, shape, &patch, eps, seed).unwrap();
            for (d, &p) in r.dims().iter().zip(&image) {
                prop_assert!(*d == Interval::point(p) || *d == Interval::ZERO);
            }
        }
    }
}
