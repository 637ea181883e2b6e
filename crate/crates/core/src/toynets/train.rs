use serde::Serialize;

use super::network::{argmax, Example, NeuralNetwork, Overrides};
use super::rng::SplitMix64;
use crate::error::{Error, Result};
use crate::interventions::{Target, TargetMetric};

#[derive(Debug, Clone, Serialize)]
pub struct TrainConfig {
    pub steps: usize,
    pub learning_rate: f64,
    /// `None` means full-batch descent.
    pub batch_size: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            steps: 5000,
            learning_rate: 0.1,
            batch_size: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub network: NeuralNetwork,
    pub final_loss: f64,
    pub accuracy: f64,
}

/// Mean cross-entropy over a dataset.
pub fn cross_entropy(net: &NeuralNetwork, data: &[Example]) -> Result<f64> {
    let metric = TargetMetric::NegativeLogProbability { target: Target::Label };
    let mut total = 0.0;
    for (i, ex) in data.iter().enumerate() {
        let t = net.forward(&ex.input).map_err(|e| e.at_example(i))?;
        total += metric.value(net, &t, ex.label).map_err(|e| e.at_example(i))?;
    }
    Ok(total / data.len() as f64)
}

pub fn accuracy(net: &NeuralNetwork, data: &[Example]) -> Result<f64> {
    let mut hits = 0usize;
    for ex in data {
        let out = net.forward(&ex.input)?;
        if Some(argmax(out.output())) == ex.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

/// Plain gradient descent on mean cross-entropy. Examples are visited in a
/// fixed order, so the result depends only on the inputs and the seed.
/// Dictionary parameters, if any, are frozen.
pub fn train(net: &NeuralNetwork, data: &[Example], config: &TrainConfig) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(Error::Empty("training dataset".into()));
    }
    if data.iter().any(|e| e.label.is_none()) {
        return Err(Error::invalid("training examples need labels"));
    }
    if !(config.learning_rate.is_finite() && config.learning_rate > 0.0) {
        return Err(Error::invalid("learning rate must be positive"));
    }
    let metric = TargetMetric::NegativeLogProbability { target: Target::Label };
    let mut net = net.clone();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = SplitMix64::derived(config.seed, "batches");
    let batch = config.batch_size.unwrap_or(data.len()).clamp(1, data.len());
    let mut cursor = data.len();

    for step in 0..config.steps {
        if cursor + batch > data.len() {
            if config.batch_size.is_some() {
                rng.shuffle(&mut order);
            }
            cursor = 0;
        }
        let idx = &order[cursor..cursor + batch];
        cursor += batch;

        let mut gw: Vec<Vec<Vec<f64>>> = net
            .layers()
            .iter()
            .map(|l| vec![vec![0.0; l.fan_in()]; l.width()])
            .collect();
        let mut gb: Vec<Vec<f64>> = net.layers().iter().map(|l| vec![0.0; l.width()]).collect();
        let mut loss = 0.0;
        for &i in idx {
            let ex = &data[i];
            let trace = net.forward(&ex.input)?;
            loss += match metric.value(&net, &trace, ex.label) {
                Ok(v) => v,
                Err(Error::MetricUndefined(_) | Error::NonFinite(_)) => return Err(Error::Divergence { step }),
                Err(e) => return Err(e),
            };
            let grads = net.backward_from(&trace, &Overrides::new(), &metric, ex.label)?;
            let inputs = net.consumer_inputs(&trace);
            for (l, gp) in grads.pre.iter().enumerate() {
                for (o, &g) in gp.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    gb[l][o] += g;
                    for (w, &x) in gw[l][o].iter_mut().zip(&inputs[l]) {
                        *w += g * x;
                    }
                }
            }
        }
        if !loss.is_finite() {
            return Err(Error::Divergence { step });
        }
        let scale = config.learning_rate / batch as f64;
        for (l, layer) in net.layers_mut().iter_mut().enumerate() {
            for (row, grow) in layer.weights.iter_mut().zip(&gw[l]) {
                for (w, g) in row.iter_mut().zip(grow) {
                    *w -= scale * g;
                }
            }
            for (b, g) in layer.bias.iter_mut().zip(&gb[l]) {
                *b -= scale * g;
            }
        }
        if net
            .layers()
            .iter()
            .any(|l| l.bias.iter().chain(l.weights.iter().flatten()).any(|x| !x.is_finite()))
        {
            return Err(Error::Divergence { step });
        }
    }

    let final_loss = cross_entropy(&net, data)?;
    let accuracy = accuracy(&net, data)?;
    log::info!(
        "trained {} steps: loss {final_loss:.6}, accuracy {accuracy:.3}",
        config.steps
    );
    Ok(TrainReport {
        network: net,
        final_loss,
        accuracy,
    })
}
