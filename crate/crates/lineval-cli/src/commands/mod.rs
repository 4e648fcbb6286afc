pub mod eval;
pub mod run;
pub mod stats;
pub mod synth;
pub mod validate;
