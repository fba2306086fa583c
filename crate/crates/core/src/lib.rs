//! Interpreter and simulation toolkit for a small hybrid-systems modeling
//! language, together with a symbolic Euler-Lagrange pipeline that turns
//! kinetic and potential energy expressions into explicit equations of motion.

pub mod lang;
pub mod models;
pub mod numlin;
pub mod sim;
pub mod symcas;
