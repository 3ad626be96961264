pub mod symexpr;
pub mod extalg;
pub mod nonhol;
pub mod measure;
pub mod liealg;
pub mod dynamics;
pub mod cli;
