//! Small dense networks with exact forward and reverse passes.

mod compile;
mod dictionary;
mod generators;
mod network;
mod rng;
mod train;

pub use compile::{compile_to_graph, input_assignment, input_var, node_var, var_node};
pub use dictionary::{encode_features, FeatureDictionary};
pub use generators::{
    make_nontransitive_net, make_overdetermined_net, make_preemption_net, make_rocks_net, make_succession_net,
    make_succession_task, network_by_name, succession_example, succession_input_labels, GENERATORS,
};
pub use network::{
    Activation, ActivationTrace, Example, GradientMap, Layer, NeuralNetwork, NodeRef, Overrides, FORMAT_VERSION,
};
pub use rng::SplitMix64;
pub use train::{accuracy, cross_entropy, train, TrainConfig, TrainReport};
