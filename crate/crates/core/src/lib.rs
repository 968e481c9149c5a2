//! Clustering of individuals whose features are only known up to an
//! uncertainty set.
//!
//! Each individual carries an *empirical feature uncertainty set*: candidate
//! feature vectors obtained by sampling its covariate uncertainty set and
//! pushing the samples through a nonlinear transform. The greedy optimistic
//! clustering loop ([`goc::run_goc`]) alternates a clustering oracle with a
//! per-individual search for the candidate closest to a cluster center.
//!
//! | module | contents |
//! |---|---|
//! | [`types`] | datasets, uncertainty models, assignments, traces |
//! | [`uncertainty`] | set sampling, transforms, penalties, standardization, coverage |
//! | [`oracles`] | K-means, K-medoids, spherical GMM, BIC selection |
//! | [`goc`] | GOC / GPC loop |
//! | [`baselines`] | representative vectors, set discrepancies, affinity propagation |
//! | [`metrics`] | NMI, F-measure, convergence diagnostics |
//! | [`datagen`] | synthetic orbit-invariant benchmark |
//! | [`io`], [`experiment`], [`cli`] | file formats, sweeps, command line |

pub mod baselines;
pub mod cli;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod goc;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod oracles;
pub mod rng;
pub mod types;
pub mod uncertainty;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use types::{Assignment, Dataset, EmpiricalFeatureSet, GocTrace};
