pub mod cards;
pub mod legal;
