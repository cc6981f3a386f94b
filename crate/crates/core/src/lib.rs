pub mod borrowck;
pub mod cgen;
pub mod dataflow;
pub mod diag;
pub mod driver;
pub mod dropelab;
pub mod interp;
pub mod ir;
pub mod liveness;
pub mod lower;
pub mod movecheck;
pub mod syntax;
pub mod types;
