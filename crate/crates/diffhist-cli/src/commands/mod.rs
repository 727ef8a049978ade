pub mod compare;
pub mod decompose;
pub mod gradcheck;
pub mod hist;
pub mod synth;
pub mod train;
