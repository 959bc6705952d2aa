//! Image decoding, level files, HTTP service and command line for turning
//! drawings into Science Birds levels. The algorithms live in
//! `sketchlevel-core`; this crate does the I/O around them.

#![deny(missing_docs)]

pub mod cli;
pub mod files;
pub mod image;
pub mod pipeline;
pub mod service;
pub mod store;
pub mod xml;
