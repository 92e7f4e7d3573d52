use super::{shape_err, NnError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Sigmoid,
    Relu,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Sigmoid => sigmoid(z),
            Activation::Relu => z.max(0.0),
        }
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    // Split on sign so exp never overflows.
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Fully connected layer `y = σ(Wx + b)` with `W` stored row-major (`out × in`).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    inputs: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    pub fn new(
        inputs: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self, NnError> {
        if inputs == 0 || bias.is_empty() {
            return shape_err("dense layer needs at least one input and one output");
        }
        if weights.len() != inputs * bias.len() {
            return shape_err(format!(
                "weight matrix has {} entries, expected {}x{}",
                weights.len(),
                bias.len(),
                inputs
            ));
        }
        Ok(Self {
            inputs,
            weights,
            bias,
            activation,
        })
    }

    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Result<Self, NnError> {
        Self::new(inputs, vec![0.0; inputs * outputs], vec![0.0; outputs], activation)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.bias.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.weights, &mut self.bias)
    }

    /// Pre-activation `Wx + b`.
    pub fn linear(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        if x.len() != self.inputs {
            return shape_err(format!("dense input has length {}, expected {}", x.len(), self.inputs));
        }
        Ok(self
            .weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b)
            .collect())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        let mut z = self.linear(x)?;
        z.iter_mut().for_each(|v| *v = self.activation.apply(*v));
        Ok(z)
    }
}

pub fn dense_forward(x: &[f64], layer: &DenseLayer) -> Result<Vec<f64>, NnError> {
    layer.forward(x)
}
