pub mod config;
pub mod corpus_io;
pub mod evaluation;
pub mod pipeline;
pub mod profiling;
pub mod ranking;
pub mod seed;
pub mod synthetic;
pub mod taxonomy;
pub mod temporal;
pub mod text;
pub mod topic_model;
