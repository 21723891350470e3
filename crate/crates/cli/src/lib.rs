//! Support code for the `multiscale` command line tool.

pub mod suites;
