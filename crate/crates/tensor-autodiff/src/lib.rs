//! Minimal dense-matrix reverse-mode automatic differentiation plus the
//! training primitives (layers, ELU, batch norm, dropout, Adam, early
//! stopping) needed to fit small feed-forward networks.
//!
//! Everything is `f64`, single-threaded per training job, and driven by
//! explicitly seeded generators: the same seed produces bit-identical
//! results across runs and thread counts.

pub mod adam;
pub mod error;
pub mod gradcheck;
pub mod graph;
pub mod layers;
pub mod linalg;
pub mod matrix;
pub mod nn;
pub mod rng;
pub mod train;

pub use adam::{adam_step, AdamState};
pub use error::{Error, Result};
pub use graph::{Graph, NodeId};
pub use layers::{ForwardPass, LayerParams, Mlp};
pub use matrix::Matrix;
pub use nn::{batch_norm, batch_norm_graph, dropout, elu, xavier_init, BatchNormState, Mode};
pub use rng::{rng_from_seed, seed_mix, SeededRng};
pub use train::{train_loop, BatchLoss, TrainConfig, TrainData, TrainHistory};
