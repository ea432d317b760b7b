pub mod cli;
pub mod hypercube;
pub mod model;
pub mod oracle;
pub mod parser;
pub mod search;
