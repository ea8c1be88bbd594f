pub mod action;
pub mod cli;
pub mod closedform;
pub mod conditions;
pub mod expr;
pub mod linalg;
pub mod pde;
pub mod verify;
