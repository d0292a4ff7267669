pub mod analysis;
pub mod backends;
pub mod cli;
pub mod elicitation;
pub mod optimizer;
pub mod ranking;
pub mod scoring;
pub mod text;
pub mod values;
