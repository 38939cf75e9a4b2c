//! Smoothed retarded fields of rigid charges.

pub mod error;
pub mod field;
pub mod form_factor;
pub mod history;
pub mod kernels;
pub mod quadrature;
pub mod shell;
pub mod tables;

pub use error::{FieldError, Result};
