//! Abstract semantics: pushing an input box through a network.
//!
//! Two propagators are provided. Interval bound propagation (IBP) is the
//! default used by every verdict-producing path. Symbolic propagation keeps
//! affine forms over the input variables through stable ReLUs and is never
//! looser than IBP.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{round_up, AffineForm, InputBox, Interval, ReluImage, OUTWARD};
use crate::network::{Activation, Network};

/// Output reachable sets, one interval per output neuron.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ReachableTuple {
    outputs: Vec<Interval>,
}

impl ReachableTuple {
    pub fn new(outputs: Vec<Interval>) -> Self {
        ReachableTuple { outputs }
    }

    pub fn outputs(&self) -> &[Interval] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Pointwise containment.
    pub fn contains(&self, other: &ReachableTuple) -> bool {
        self.len() == other.len()
            && self
                .outputs
                .iter()
                .zip(&other.outputs)
                .all(|(a, b)| a.contains_interval(b))
    }

    pub fn contains_point(&self, y: &[f64]) -> bool {
        self.len() == y.len() && self.outputs.iter().zip(y).all(|(i, &v)| i.contains(v))
    }
}

impl fmt::Display for ReachableTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, y) in self.outputs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{y}")?;
        }
        write!(f, ">")
    }
}

fn check_dim(net: &Network, bx: &InputBox) -> Result<()> {
    if bx.len() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            what: "input box",
            expected: net.input_dim(),
            found: bx.len(),
        });
    }
    Ok(())
}

/// Interval bound propagation, returning the bounds of every layer
/// (pre-activation, post-activation) followed by the output tuple.
pub fn propagate_ibp_layers(net: &Network, bx: &InputBox) -> Result<Vec<LayerBounds>> {
    check_dim(net, bx)?;
    let mut h: Vec<Interval> = bx.dims().to_vec();
    let mut out = Vec::with_capacity(net.layers().len());
    for layer in net.layers() {
        let pre: Vec<Interval> = layer
            .rows()
            .zip(layer.biases())
            .map(|(row, &b)| {
                row.iter()
                    .zip(&h)
                    .fold(Interval::point(b), |acc, (&w, x)| acc + x.scale(w))
            })
            .collect();
        let post: Vec<Interval> = match layer.activation() {
            Activation::Relu => pre.iter().map(Interval::relu).collect(),
            Activation::Identity => pre.clone(),
        };
        out.push(LayerBounds {
            pre,
            post: post.clone(),
        });
        h = post;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerBounds {
    pub pre: Vec<Interval>,
    pub post: Vec<Interval>,
}

pub fn propagate_ibp(net: &Network, bx: &InputBox) -> Result<ReachableTuple> {
    let mut layers = propagate_ibp_layers(net, bx)?;
    let last = layers.pop().expect("networks have at least one layer");
    Ok(ReachableTuple::new(last.post))
}

/// A neuron value during symbolic propagation: an affine form over the
/// inputs plus an interval residual collecting concretized unstable neurons.
#[derive(Debug, Clone)]
struct SymbolicValue {
    form: AffineForm,
    residual: Interval,
    /// Radius covering rounding error in `form`; zero unless rounding outward.
    err: f64,
}

impl SymbolicValue {
    fn zero(m: usize) -> Self {
        SymbolicValue {
            form: AffineForm::zero(m),
            residual: Interval::ZERO,
            err: 0.0,
        }
    }

    fn is_exact(&self) -> bool {
        self.residual == Interval::ZERO && self.err == 0.0
    }

    fn concretize(&self, bx: &InputBox) -> Interval {
        let r = self.form.concretize(bx) + self.residual;
        if self.err > 0.0 {
            r + Interval::new(-self.err, self.err).expect("nonnegative radius")
        } else {
            r
        }
    }
}

/// Result of symbolic propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicOutput {
    pub reach: ReachableTuple,
    /// Exact affine form of each output, when no unstable ReLU feeds it.
    pub forms: Vec<Option<AffineForm>>,
}

/// Affine combination of the previous layer for one neuron.
fn combine(row: &[f64], bias: f64, prev: &[SymbolicValue], bx: &InputBox) -> SymbolicValue {
    let m = bx.len();
    let mut form = AffineForm::constant(bias, m);
    let mut residual = Interval::ZERO;
    if !OUTWARD {
        for (&w, v) in row.iter().zip(prev) {
            form.add_scaled(&v.form, w);
            residual = residual + v.residual.scale(w);
        }
        return SymbolicValue {
            form,
            residual,
            err: 0.0,
        };
    }
    let mut slack = vec![0.0; m + 1];
    let mut err = 0.0;
    for (&w, v) in row.iter().zip(prev) {
        form.add_scaled_tracked(&v.form, w, &mut slack);
        residual = residual + v.residual.scale(w);
        err += w.abs() * v.err;
    }
    let spread: f64 = slack[..m]
        .iter()
        .zip(bx.dims())
        .map(|(s, d)| s * d.lo().abs().max(d.hi().abs()))
        .sum();
    // padded for the rounding of this bound computation itself
    let err = round_up((err + spread + slack[m]) * (1.0 + 8.0 * f64::EPSILON)) + f64::MIN_POSITIVE;
    SymbolicValue {
        form,
        residual,
        err,
    }
}

pub fn propagate_symbolic(net: &Network, bx: &InputBox) -> Result<SymbolicOutput> {
    check_dim(net, bx)?;
    let m = net.input_dim();
    let mut h: Vec<SymbolicValue> = (0..m)
        .map(|i| SymbolicValue {
            form: AffineForm::variable(i, m),
            ..SymbolicValue::zero(m)
        })
        .collect();
    for layer in net.layers() {
        h = layer
            .rows()
            .zip(layer.biases())
            .map(|(row, &b)| {
                let value = combine(row, b, &h, bx);
                match layer.activation() {
                    Activation::Identity => value,
                    Activation::Relu if value.is_exact() => match value.form.relu(bx) {
                        ReluImage::Form(form) => SymbolicValue {
                            form,
                            ..SymbolicValue::zero(m)
                        },
                        ReluImage::Interval(i) => SymbolicValue {
                            residual: i,
                            ..SymbolicValue::zero(m)
                        },
                    },
                    Activation::Relu => {
                        let range = value.concretize(bx);
                        if range.lo() >= 0.0 {
                            value
                        } else if range.hi() <= 0.0 {
                            SymbolicValue::zero(m)
                        } else {
                            SymbolicValue {
                                residual: range.relu(),
                                ..SymbolicValue::zero(m)
                            }
                        }
                    }
                }
            })
            .collect();
    }

    // Both results are sound; intersecting them makes dominance over IBP
    // exact even where the two evaluation orders round differently.
    let ibp = propagate_ibp(net, bx)?;
    let outputs = h
        .iter()
        .zip(ibp.outputs())
        .map(|(v, i)| v.concretize(bx).intersect(i).unwrap_or(*i))
        .collect();
    let forms = h
        .into_iter()
        .map(|v| v.is_exact().then_some(v.form))
        .collect();
    Ok(SymbolicOutput {
        reach: ReachableTuple::new(outputs),
        forms,
    })
}
