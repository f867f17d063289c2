pub mod autodiff;
pub mod data;
pub mod eval;
pub mod model;
pub mod stgraph;
pub mod training;
pub mod verify;
