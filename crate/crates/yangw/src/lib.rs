pub mod cli;
pub mod current;
pub mod modesum;
pub mod oracle;
pub mod phi;
pub mod scalar;
pub mod shape;
pub mod walg;
pub mod yangian;
