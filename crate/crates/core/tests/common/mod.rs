// Shared test helpers: an independent Monte-Carlo model of the synthetic
// generator's status/mention story, and random record generators.

#![allow(dead_code)]

pub mod oracle;
pub mod records;
