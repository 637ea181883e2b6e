use serde::{Deserialize, Serialize};

use super::network::affine;
use crate::error::{Error, Result};
use crate::scm::expr::relu;

/// Sparse feature dictionary attached after a node layer.
///
/// Encoding is `ReLU(W_e (x - b_d) + b_e)`; decoding is `W_d f + b_d`.
/// Dictionaries are constructed or loaded, never trained here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDictionary {
    /// Node layer whose output is encoded (0 = inputs).
    pub attach_point: usize,
    /// features × width
    pub encoder_weights: Vec<Vec<f64>>,
    pub encoder_bias: Vec<f64>,
    pub decoder_bias: Vec<f64>,
    /// width × features
    pub decoder_weights: Vec<Vec<f64>>,
}

impl FeatureDictionary {
    pub fn new(
        attach_point: usize,
        encoder_weights: Vec<Vec<f64>>,
        encoder_bias: Vec<f64>,
        decoder_bias: Vec<f64>,
        decoder_weights: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let features = encoder_bias.len();
        let width = decoder_bias.len();
        if features == 0 || width == 0 {
            return Err(Error::Empty("dictionary".into()));
        }
        if encoder_weights.len() != features || encoder_weights.iter().any(|r| r.len() != width) {
            return Err(Error::invalid(format!("encoder weights must be {features}×{width}")));
        }
        if decoder_weights.len() != width || decoder_weights.iter().any(|r| r.len() != features) {
            return Err(Error::invalid(format!("decoder weights must be {width}×{features}")));
        }
        let all = encoder_weights
            .iter()
            .chain(&decoder_weights)
            .flatten()
            .chain(&encoder_bias)
            .chain(&decoder_bias);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("dictionary parameter".into()));
        }
        Ok(FeatureDictionary {
            attach_point,
            encoder_weights,
            encoder_bias,
            decoder_bias,
            decoder_weights,
        })
    }

    /// Square identity dictionary: features equal the (nonnegative) layer output.
    pub fn identity(attach_point: usize, width: usize) -> Self {
        let eye: Vec<Vec<f64>> = (0..width)
            .map(|i| (0..width).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        FeatureDictionary {
            attach_point,
            encoder_weights: eye.clone(),
            encoder_bias: vec![0.0; width],
            decoder_bias: vec![0.0; width],
            decoder_weights: eye,
        }
    }

    /// Overcomplete dictionary that splits each coordinate into a positive
    /// and a negative part, so decode(encode(x)) == x for every x.
    pub fn signed_split(attach_point: usize, width: usize) -> Self {
        let features = 2 * width;
        let mut enc = vec![vec![0.0; width]; features];
        let mut dec = vec![vec![0.0; features]; width];
        for i in 0..width {
            enc[2 * i][i] = 1.0;
            enc[2 * i + 1][i] = -1.0;
            dec[i][2 * i] = 1.0;
            dec[i][2 * i + 1] = -1.0;
        }
        FeatureDictionary {
            attach_point,
            encoder_weights: enc,
            encoder_bias: vec![0.0; features],
            decoder_bias: vec![0.0; width],
            decoder_weights: dec,
        }
    }

    /// Width of the layer this dictionary reads.
    pub fn width(&self) -> usize {
        self.decoder_bias.len()
    }

    pub fn feature_count(&self) -> usize {
        self.encoder_bias.len()
    }

    /// Pre-ReLU encoder values. Centring happens first, then a left fold.
    pub(crate) fn encode_pre(&self, x: &[f64]) -> Vec<f64> {
        let centred: Vec<f64> = x.iter().zip(&self.decoder_bias).map(|(a, b)| a - b).collect();
        self.encoder_weights
            .iter()
            .zip(&self.encoder_bias)
            .map(|(row, &b)| affine(row, &centred, b))
            .collect()
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.width() {
            return Err(Error::WidthMismatch {
                expected: self.width(),
                found: x.len(),
            });
        }
        Ok(self.encode_pre(x).into_iter().map(relu).collect())
    }

    pub fn decode(&self, f: &[f64]) -> Vec<f64> {
        self.decoder_weights
            .iter()
            .zip(&self.decoder_bias)
            .map(|(row, &b)| affine(row, f, b))
            .collect()
    }
}

/// Standalone encoder entry point.
pub fn encode_features(dictionary: &FeatureDictionary, layer_output: &[f64]) -> Result<Vec<f64>> {
    dictionary.encode(layer_output)
}
