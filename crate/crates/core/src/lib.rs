pub mod checks;
pub mod coeffs;
pub mod decomp;
pub mod driver;
pub mod error;
pub mod generators;
pub mod gmres;
pub mod init;
pub mod matrix;
pub mod mtx;
pub mod precond;
pub mod scalar;
pub mod scheme;
pub mod sparse;
pub mod stability;
