pub mod bayes;
pub mod ctmc;
pub mod nmr;
pub mod compose;
pub mod dsl;
pub mod cli;
