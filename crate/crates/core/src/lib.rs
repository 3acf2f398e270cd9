pub mod characters;
pub mod error;
pub mod exec;
pub mod kirillov;
pub mod local_factors;
pub mod local_field;
pub mod op_calculus;
pub mod phase_space;
pub mod relative_character;
pub mod residue;
pub mod verify;
