#![doc = include_str!("../../../book/src/introduction.md")]

#[doc = include_str!("../../../book/src/gauge.md")]
pub mod gauge {}

#[doc = include_str!("../../../book/src/one-dimensional-limit.md")]
pub mod one_dimensional_limit {}

#[doc = include_str!("../../../book/src/pair-spectrum.md")]
pub mod pair_spectrum {}

#[doc = include_str!("../../../book/src/trial-states.md")]
pub mod trial_states {}

#[doc = include_str!("../../../book/src/hardy.md")]
pub mod hardy {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
