pub mod decompose;
pub mod fixtures;
pub mod index;
pub mod inequality;
pub mod network;
pub mod quantum_oracle;
pub mod rational;
pub mod resource;
pub mod sample;
pub mod wiring;
