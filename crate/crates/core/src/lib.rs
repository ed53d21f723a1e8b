pub mod cli;
pub mod closedform;
pub mod error;
pub mod fixedpoint;
pub mod freeboundary;
pub mod kernel;
pub mod oracle;
pub mod profile;
pub mod quad;
pub mod specfun;
pub mod thermal;
pub mod vapor;
