//! Green-premium economics for electric vs combustion vehicles, and a
//! premium-driven Bass diffusion model fitted by a genetic algorithm.
//!
//! Modules build on each other bottom-up:
//! [`cost_model`] prices one year, [`trajectory`] strings years together,
//! [`diffusion`] turns premiums into adoption, [`fitting`] estimates the
//! diffusion parameters and [`sensitivity`] perturbs one input at a time.

pub mod config;
pub mod cost_model;
pub mod diffusion;
pub mod error;
pub mod fitting;
pub mod io;
pub mod sensitivity;
pub mod trajectory;

pub use error::{Error, Result};
