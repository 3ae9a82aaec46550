#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;
pub mod betti;
pub mod error;
pub mod exec;
pub mod family;
pub mod heights;
pub mod legendre;
pub mod locus;
pub mod mp;
pub mod periods;
pub mod poly;
pub mod relations;
