pub mod embed;
pub mod eval;
pub mod filtration;
pub mod posetlab;
