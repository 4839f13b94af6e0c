//! Feedforward ReLU networks and their concrete semantics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

/// Affine map followed by an activation. Weights are stored row-major,
/// one row per output neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    weights: Vec<f64>,
    biases: Vec<f64>,
    inputs: usize,
    activation: Activation,
}

impl Layer {
    pub fn new(weights: Vec<Vec<f64>>, biases: Vec<f64>, activation: Activation) -> Result<Self> {
        Self::checked(0, weights, biases, activation)
    }

    fn checked(
        index: usize,
        weights: Vec<Vec<f64>>,
        biases: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidLayer {
            layer: index,
            reason,
        };
        if weights.is_empty() {
            return Err(invalid("weight matrix has no rows".into()));
        }
        if weights.len() != biases.len() {
            return Err(invalid(format!(
                "{} weight rows but {} biases",
                weights.len(),
                biases.len()
            )));
        }
        let inputs = weights[0].len();
        if inputs == 0 {
            return Err(invalid("weight matrix has no columns".into()));
        }
        if let Some(r) = weights.iter().position(|row| row.len() != inputs) {
            return Err(invalid(format!(
                "row {r} has {} columns, expected {inputs}",
                weights[r].len()
            )));
        }
        if weights
            .iter()
            .flatten()
            .chain(&biases)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite(format!("layer {index}")));
        }
        Ok(Layer {
            weights: weights.into_iter().flatten().collect(),
            biases,
            inputs,
            activation,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.biases.len()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn row(&self, out: usize) -> &[f64] {
        &self.weights[out * self.inputs..(out + 1) * self.inputs]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks_exact(self.inputs)
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    /// Concrete evaluation. The accumulation order (bias first, then inputs
    /// in order) is shared with interval propagation so that point boxes
    /// reproduce this result bit for bit.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.rows()
            .zip(&self.biases)
            .map(|(row, &b)| {
                let pre = row.iter().zip(x).fold(b, |acc, (w, v)| acc + w * v);
                match self.activation {
                    Activation::Relu => pre.max(0.0),
                    Activation::Identity => pre,
                }
            })
            .collect()
    }
}

/// A chain of layers mapping `R^input_dim` to `R^output_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let Some(last) = layers.last() else {
            return Err(Error::NoLayers);
        };
        if last.activation != Activation::Identity {
            return Err(Error::InvalidLayer {
                layer: layers.len() - 1,
                reason: "final layer must use the identity activation".into(),
            });
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[1].inputs != pair[0].outputs() {
                return Err(Error::InvalidLayer {
                    layer: k + 1,
                    reason: format!(
                        "expects {} inputs but previous layer produces {}",
                        pair[1].inputs,
                        pair[0].outputs()
                    ),
                });
            }
        }
        Ok(Network { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "network input",
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let mut h = x.to_vec();
        for layer in &self.layers {
            h = layer.eval(&h);
        }
        Ok(h)
    }

    /// `forward` followed by `argmax_g`.
    pub fn classify(&self, x: &[f64]) -> Result<ClassOutcome> {
        Ok(argmax_g(&self.forward(x)?))
    }

    pub fn from_document(doc: NetworkDocument) -> Result<Self> {
        let layers = doc
            .layers
            .into_iter()
            .enumerate()
            .map(|(k, l)| Layer::checked(k, l.weights, l.biases, l.activation))
            .collect::<Result<Vec<_>>>()?;
        let net = Network::new(layers)?;
        if net.input_dim() != doc.input_dim {
            return Err(Error::DimensionMismatch {
                what: "input_dim",
                expected: doc.input_dim,
                found: net.input_dim(),
            });
        }
        Ok(net)
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            input_dim: self.input_dim(),
            layers: self
                .layers
                .iter()
                .map(|l| LayerDocument {
                    weights: l.rows().map(<[f64]>::to_vec).collect(),
                    biases: l.biases.clone(),
                    activation: l.activation,
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkDocument = serde_json::from_str(text).map_err(|source| Error::Parse {
            field: "network".into(),
            source,
        })?;
        Network::from_document(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document())
            .expect("network documents always serialize")
    }
}

/// On-disk network description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub input_dim: usize,
    pub layers: Vec<LayerDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDocument {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

/// An output class paired with its (possibly degenerate) value interval.
/// Class indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassOutcome {
    pub index: usize,
    pub value: Interval,
}

/// Concrete decision: index and value of the maximum score. Ties go to the
/// lowest index.
///
/// # Panics
/// If `y` is empty.
pub fn argmax_g(y: &[f64]) -> ClassOutcome {
    assert!(!y.is_empty(), "argmax of an empty output vector");
    let mut best = 0;
    for (i, &v) in y.iter().enumerate().skip(1) {
        if v > y[best] {
            best = i;
        }
    }
    ClassOutcome {
        index: best + 1,
        value: Interval::point(y[best]),
    }
}
